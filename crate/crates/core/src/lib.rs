//! Branch-and-price for partition coloring models of charging-pile scheduling.

#![allow(clippy::needless_range_loop)]

pub mod bnp;
pub mod config;
pub mod graph;
pub mod instance;
pub mod lp;
pub mod qaia;
pub mod master;
pub mod pricing;

#[cfg(test)]
mod testutil;
