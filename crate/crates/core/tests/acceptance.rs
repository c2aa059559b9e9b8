//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! `PCP_ACCEPTANCE_FULL=1` runs the scalability check on all three seeds of
//! each family instead of the first one.

use std::collections::BTreeMap;
use std::io::Write;
use std::panic;
use std::time::{Duration, Instant};

use pcp_core::bnp::{solve, SolveStats, SolveStatus};
use pcp_core::config::SolverConfig;
use pcp_core::graph::{build_conflict_graph, ConflictGraph};
use pcp_core::instance::{generate, Instance};
use pcp_core::lp::LpAudit;
use pcp_core::pricing::{auto_penalties, build_qubo, qubo_to_ising, repair, Backend};
use pcp_core::qaia::{brute_force_ground, solve_bsb, solve_simcim, IsingModel, QaiaConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const HORIZON: u32 = 24;
const DURATION: u32 = 3;
const KKT_TOL: f64 = 1e-6;
const ENERGY_TOL: f64 = 1e-12;
const BSB_HIT_RATE: f64 = 0.90;
const SIMCIM_HIT_RATE: f64 = 0.85;
const SCALE_TIME_LIMIT: Duration = Duration::from_secs(600);
/// Criteria whose failure is analysed and expected; they still print FAIL.
const KNOWN_RED: &[u32] = &[7];

struct Verdict {
    id: u32,
    pass: bool,
    detail: String,
}

fn say(line: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{line}");
    let _ = out.flush();
}

// ---------------------------------------------------------------- oracles

/// Peak number of simultaneously running intervals.
fn peak_load(inst: &Instance, sel: &[usize]) -> usize {
    let mut load = 0;
    for &a in sel {
        let t = inst.vertices[a].start;
        let here = sel
            .iter()
            .filter(|&&b| inst.vertices[b].start <= t && t < inst.vertices[b].completion)
            .count();
        load = load.max(here);
    }
    load
}

/// Minimum makespan over all `K^N` selections whose peak load fits the piles.
fn oracle_makespan(inst: &Instance) -> Option<u32> {
    let parts = &inst.partitions;
    let mut pick = vec![0usize; parts.len()];
    let mut best: Option<u32> = None;
    loop {
        let sel: Vec<usize> = pick.iter().zip(parts).map(|(&i, p)| p[i]).collect();
        if peak_load(inst, &sel) <= inst.piles {
            let m = sel.iter().map(|&v| inst.vertices[v].completion).max().unwrap_or(0);
            best = Some(best.map_or(m, |b| b.min(m)));
        }
        let mut k = 0;
        while k < pick.len() && pick[k] + 1 == parts[k].len() {
            pick[k] = 0;
            k += 1;
        }
        if k == pick.len() {
            return best;
        }
        pick[k] += 1;
    }
}

fn overlap(inst: &Instance, a: usize, b: usize) -> bool {
    let (x, y) = (&inst.vertices[a], &inst.vertices[b]);
    x.start < y.completion && y.start < x.completion
}

/// A labelled integral solution of a node, in original interval ids: the
/// chosen intervals and their grouping into piles.
type Labelled = (Vec<usize>, Vec<Vec<usize>>);

/// Every selection of one alive vertex per active partition together with
/// every split of it into at most `piles` independent groups on `graph`.
fn labelled_solutions(graph: &ConflictGraph, piles: usize) -> Vec<Labelled> {
    let members = graph.partition_members();
    let parts: Vec<Vec<usize>> = graph.active_partitions().iter().map(|&p| members[p].clone()).collect();
    let mut out = Vec::new();
    if parts.iter().any(|p| p.is_empty()) {
        return out;
    }
    let mut pick = vec![0usize; parts.len()];
    loop {
        let sel: Vec<usize> = pick.iter().zip(&parts).map(|(&i, p)| p[i]).collect();
        let mut groups: Vec<Vec<usize>> = Vec::new();
        split(graph, &sel, 0, piles, &mut groups, &mut out);
        let mut k = 0;
        while k < pick.len() && pick[k] + 1 == parts[k].len() {
            pick[k] = 0;
            k += 1;
        }
        if k == pick.len() {
            break;
        }
        pick[k] += 1;
    }
    out.sort();
    out
}

fn split(
    graph: &ConflictGraph,
    sel: &[usize],
    i: usize,
    piles: usize,
    groups: &mut Vec<Vec<usize>>,
    out: &mut Vec<Labelled>,
) {
    if i == sel.len() {
        let mut chosen: Vec<usize> = sel.iter().flat_map(|&v| graph.members(v).to_vec()).collect();
        chosen.sort_unstable();
        let mut gs: Vec<Vec<usize>> = groups
            .iter()
            .map(|g| {
                let mut o: Vec<usize> = g.iter().flat_map(|&v| graph.members(v).to_vec()).collect();
                o.sort_unstable();
                o
            })
            .collect();
        gs.sort();
        out.push((chosen, gs));
        return;
    }
    let v = sel[i];
    for g in 0..groups.len() {
        if groups[g].iter().all(|&u| !graph.has_edge(u, v)) {
            groups[g].push(v);
            split(graph, sel, i + 1, piles, groups, out);
            groups[g].pop();
        }
    }
    if groups.len() < piles {
        groups.push(vec![v]);
        split(graph, sel, i + 1, piles, groups, out);
        groups.pop();
    }
}

/// Ising energy by the dense double loop, summed in sorted order with a
/// two-sum carry so that only the final rounding remains.
fn ising_dense(m: &IsingModel, s: &[i8]) -> f64 {
    let n = m.num_spins();
    let j = m.dense_couplings();
    let mut terms = vec![m.offset()];
    for a in 0..n {
        terms.push(m.field()[a] * f64::from(s[a]));
        for b in (a + 1)..n {
            terms.push(j[a * n + b] * f64::from(s[a]) * f64::from(s[b]));
        }
    }
    terms.sort_by(|x, y| y.abs().total_cmp(&x.abs()));
    let (mut sum, mut carry) = (0.0f64, 0.0f64);
    for t in terms {
        let next = sum + t;
        let bp = next - sum;
        carry += (sum - (next - bp)) + (t - bp);
        sum = next;
    }
    sum + carry
}

fn worst(acc: &mut LpAudit, a: &LpAudit) {
    acc.primal_infeasibility = acc.primal_infeasibility.max(a.primal_infeasibility);
    acc.dual_sign_violation = acc.dual_sign_violation.max(a.dual_sign_violation);
    acc.reduced_cost_violation = acc.reduced_cost_violation.max(a.reduced_cost_violation);
    acc.complementary_slackness = acc.complementary_slackness.max(a.complementary_slackness);
    acc.duality_gap = acc.duality_gap.max(a.duality_gap);
}

fn config(backend: Backend, audit: bool) -> SolverConfig {
    let mut cfg = SolverConfig::default();
    cfg.pricing.backend = backend;
    cfg.audit_lp = audit;
    cfg
}

// ---------------------------------------------------------------- criteria

struct LpLog {
    audit: LpAudit,
    solves: usize,
    errors: Vec<String>,
}

impl LpLog {
    fn record(&mut self, name: &str, result: &Result<SolveStats, String>) {
        match result {
            Ok(stats) => {
                if let Some(a) = &stats.lp_audit {
                    worst(&mut self.audit, a);
                }
                self.solves += 1;
            }
            Err(e) => self.errors.push(format!("{name}: {e}")),
        }
    }
}

fn run(inst: &Instance, cfg: &SolverConfig) -> Result<SolveStats, String> {
    solve(inst, cfg).map(|o| o.stats).map_err(|e| e.to_string())
}

fn criterion1(log: &mut LpLog) -> Verdict {
    let started = Instant::now();
    let sizes = [6, 8, 10, 12];
    let piles = [1, 2, 5];
    let mut mismatches = Vec::new();
    for idx in 0..30 {
        let v = sizes[idx % 4];
        let c = piles[(idx / 4) % 3];
        let seed = (idx / 12 + 1) as u64;
        let inst = generate(v, 2, c, seed, HORIZON, DURATION).unwrap();
        let expected = oracle_makespan(&inst);
        let result = run(&inst, &config(Backend::Exact, true));
        log.record(&inst.name(), &result);
        let got = match &result {
            Ok(s) if s.status == SolveStatus::Optimal => s.obj,
            Ok(s) if s.status == SolveStatus::Infeasible => None,
            _ => Some(u32::MAX),
        };
        if got != expected {
            mismatches.push(format!("{} got {got:?} want {expected:?}", inst.name()));
        }
    }
    Verdict {
        id: 1,
        pass: mismatches.is_empty(),
        detail: format!(
            "30 instances vs enumeration oracle, {} mismatches in {:.1}s {}",
            mismatches.len(),
            started.elapsed().as_secs_f64(),
            mismatches.join("; ")
        ),
    }
}

fn criterion2(log: &mut LpLog) -> Verdict {
    let started = Instant::now();
    let mut bad = Vec::new();
    let mut objs = Vec::new();
    for (v, c, k) in [(10, 5, 2), (20, 5, 2), (30, 5, 3)] {
        for seed in 1..=3 {
            let inst = generate(v, k, c, seed, HORIZON, DURATION).unwrap();
            let mut seen = Vec::new();
            for backend in Backend::ALL {
                let result = run(&inst, &config(backend, true));
                log.record(&inst.name(), &result);
                match result {
                    Ok(s) => seen.push((backend, s.obj, s.gap_percent, s.status)),
                    Err(e) => bad.push(format!("{} {backend}: {e}", inst.name())),
                }
            }
            let agree = seen.len() == 3
                && seen.iter().all(|&(_, obj, gap, status)| {
                    obj == seen[0].1 && gap == 0.0 && status == SolveStatus::Optimal
                });
            if !agree {
                bad.push(format!("{} {seen:?}", inst.name()));
            }
            objs.push(format!("{}={:?}", inst.name(), seen.first().and_then(|s| s.1)));
        }
    }
    Verdict {
        id: 2,
        pass: bad.is_empty(),
        detail: format!(
            "9 instances x 3 backends in {:.1}s, Obj {} {}",
            started.elapsed().as_secs_f64(),
            objs.join(" "),
            bad.join("; ")
        ),
    }
}

fn criterion3() -> Verdict {
    let (mut bsb, mut simcim) = (0, 0);
    let models = 50;
    for k in 0..models {
        let mut rng = ChaCha8Rng::seed_from_u64(9000 + k);
        let mut couplings = Vec::new();
        for i in 0..12 {
            for j in (i + 1)..12 {
                let v: i32 = rng.random_range(-1..=1);
                if v != 0 {
                    couplings.push((i, j, f64::from(v)));
                }
            }
        }
        let m = IsingModel::from_couplings(12, &couplings, vec![0.0; 12], 0.0).unwrap();
        let ground = brute_force_ground(&m).unwrap().best_energy;
        let cfg = QaiaConfig {
            restarts: 32,
            seed: k,
            ..QaiaConfig::default()
        };
        if solve_bsb(&m, &cfg).unwrap().best_energy <= ground + 1e-9 {
            bsb += 1;
        }
        if solve_simcim(&m, &cfg).unwrap().best_energy <= ground + 1e-9 {
            simcim += 1;
        }
    }
    let rb = f64::from(bsb) / models as f64;
    let rs = f64::from(simcim) / models as f64;
    Verdict {
        id: 3,
        pass: rb >= BSB_HIT_RATE && rs >= SIMCIM_HIT_RATE,
        detail: format!(
            "ground state hit rate bsb {bsb}/{models} (need {BSB_HIT_RATE}), simcim {simcim}/{models} (need {SIMCIM_HIT_RATE})"
        ),
    }
}

fn criterion4() -> Verdict {
    let mut worst_gap: f64 = 0.0;
    let mut infeasible_minimizers = 0;
    let mut total_minimizers = 0;
    for k in 0..20u64 {
        let (v, c, per) = [(10, 1, 2), (10, 1, 5), (5, 2, 5), (4, 2, 2)][k as usize % 4];
        let inst = generate(v, per, c, 500 + k, HORIZON, DURATION).unwrap();
        let g = build_conflict_graph(&inst);
        let mut rng = ChaCha8Rng::seed_from_u64(k);
        let w: Vec<f64> = (0..v).map(|_| rng.random_range(-4.0..4.0)).collect();
        let (l1, l2) = auto_penalties(&w, &g, c);
        let q = build_qubo(&w, &g, c, l1, l2).unwrap();
        let m = qubo_to_ising(&q);
        let n = q.num_binaries();
        assert!(n <= 10);
        let mut energies = Vec::with_capacity(1 << n);
        for bits in 0u32..(1 << n) {
            let x: Vec<bool> = (0..n).map(|i| bits >> i & 1 == 1).collect();
            let s: Vec<i8> = x.iter().map(|&b| if b { 1 } else { -1 }).collect();
            let eq = q.energy(&x);
            worst_gap = worst_gap.max((eq - ising_dense(&m, &s)).abs());
            worst_gap = worst_gap.max((eq - m.energy(&s).unwrap()).abs());
            energies.push(eq);
        }
        let min = energies.iter().copied().fold(f64::INFINITY, f64::min);
        for (bits, &e) in energies.iter().enumerate() {
            if e > min + 1e-9 {
                continue;
            }
            total_minimizers += 1;
            let on: Vec<(usize, usize)> = (0..n).filter(|i| bits >> i & 1 == 1).map(|i| q.var_map[i]).collect();
            let mut ok = true;
            for a in 0..on.len() {
                for b in (a + 1)..on.len() {
                    let (u, cu) = on[a];
                    let (x, cx) = on[b];
                    let same_vehicle = inst.vertices[u].vehicle == inst.vertices[x].vehicle;
                    if same_vehicle || (cu == cx && overlap(&inst, u, x)) {
                        ok = false;
                    }
                }
            }
            if !ok {
                infeasible_minimizers += 1;
            }
        }
    }
    Verdict {
        id: 4,
        pass: worst_gap <= ENERGY_TOL && infeasible_minimizers == 0,
        detail: format!(
            "20 QUBOs, max |E_qubo - E_ising| = {worst_gap:.2e} (tol {ENERGY_TOL:e}), {infeasible_minimizers}/{total_minimizers} minimizers infeasible"
        ),
    }
}

fn criterion5(log: &LpLog) -> Verdict {
    let a = &log.audit;
    let pass = log.errors.is_empty()
        && a.complementary_slackness <= KKT_TOL
        && a.dual_sign_violation <= KKT_TOL
        && a.primal_infeasibility <= KKT_TOL;
    Verdict {
        id: 5,
        pass,
        detail: format!(
            "{} audited solves, worst complementary slackness {:.2e}, dual sign {:.2e}, primal {:.2e}, reduced cost {:.2e}, duality gap {:.2e} (tol {KKT_TOL:e}) {}",
            log.solves,
            a.complementary_slackness,
            a.dual_sign_violation,
            a.primal_infeasibility,
            a.reduced_cost_violation,
            a.duality_gap,
            log.errors.join("; ")
        ),
    }
}

fn criterion6() -> Verdict {
    let started = Instant::now();
    let mut branchings = 0;
    let mut bad = Vec::new();
    for k in 0..20u64 {
        let v = if k % 2 == 0 { 6 } else { 8 };
        let c = 1 + (k as usize / 2) % 2;
        let inst = generate(v, 2, c, 100 + k, HORIZON, DURATION).unwrap();
        let mut cfg = config(Backend::Exact, false);
        cfg.record_branches = true;
        let out = match solve(&inst, &cfg) {
            Ok(o) => o,
            Err(e) => {
                bad.push(format!("{}: {e}", inst.name()));
                continue;
            }
        };
        for rec in &out.branches {
            branchings += 1;
            let parent = labelled_solutions(&rec.parent, inst.piles);
            let mut union: Vec<Labelled> = rec
                .children
                .iter()
                .flatten()
                .flat_map(|g| labelled_solutions(g, inst.piles))
                .collect();
            union.sort();
            if parent != union {
                bad.push(format!(
                    "{} node {} {:?}: parent {} vs children {}",
                    inst.name(),
                    rec.node,
                    rec.branching,
                    parent.len(),
                    union.len()
                ));
            }
        }
    }
    Verdict {
        id: 6,
        pass: bad.is_empty() && branchings > 0,
        detail: format!(
            "20 instances, {branchings} branchings checked in {:.1}s, {} violations {}",
            started.elapsed().as_secs_f64(),
            bad.len(),
            bad.join("; ")
        ),
    }
}

fn criterion7() -> Verdict {
    let full = std::env::var("PCP_ACCEPTANCE_FULL").is_ok_and(|v| v == "1");
    let seeds: &[u64] = if full { &[1, 2, 3] } else { &[1] };
    let mut solved: BTreeMap<Backend, usize> = BTreeMap::new();
    let mut times: BTreeMap<String, BTreeMap<Backend, f64>> = BTreeMap::new();
    let mut errors = Vec::new();
    for (v, c, k) in [(40, 5, 4), (50, 10, 5), (60, 10, 6)] {
        for &seed in seeds {
            let inst = generate(v, k, c, seed, HORIZON, DURATION).unwrap();
            for backend in Backend::ALL {
                let mut cfg = config(backend, false);
                cfg.time_limit = SCALE_TIME_LIMIT;
                match run(&inst, &cfg) {
                    Ok(s) => {
                        say(&format!(
                            "  {} {backend}: obj {:?} gap {:.2} t_total {:.2}s t_pricing {:.2}s nodes {} pricing calls {}",
                            inst.name(),
                            s.obj,
                            s.gap_percent,
                            s.t_total.as_secs_f64(),
                            s.t_pricing.as_secs_f64(),
                            s.n_nodes,
                            s.n_pricing()
                        ));
                        if s.status == SolveStatus::Optimal && s.gap_percent == 0.0 {
                            *solved.entry(backend).or_default() += 1;
                            times.entry(inst.name()).or_default().insert(backend, s.t_total.as_secs_f64());
                        }
                    }
                    Err(e) => errors.push(format!("{} {backend}: {e}", inst.name())),
                }
            }
        }
    }
    let count = |b: Backend| solved.get(&b).copied().unwrap_or(0);
    let common: Vec<&BTreeMap<Backend, f64>> = times.values().filter(|t| t.len() == 3).collect();
    let mean = |b: Backend| {
        if common.is_empty() {
            f64::NAN
        } else {
            common.iter().map(|t| t[&b]).sum::<f64>() / common.len() as f64
        }
    };
    let (te, tb, ts) = (mean(Backend::Exact), mean(Backend::Bsb), mean(Backend::SimCim));
    let pass = errors.is_empty()
        && count(Backend::Bsb) >= count(Backend::Exact)
        && count(Backend::SimCim) >= count(Backend::Exact)
        && tb <= te;
    Verdict {
        id: 7,
        pass,
        detail: format!(
            "{} instances, solved exact {} bsb {} simcim {}, mean t_total on common subset exact {te:.2}s bsb {tb:.2}s simcim {ts:.2}s {}",
            3 * seeds.len(),
            count(Backend::Exact),
            count(Backend::Bsb),
            count(Backend::SimCim),
            errors.join("; ")
        ),
    }
}

fn criterion8() -> Verdict {
    let trials = 10_000u64;
    let mut dirty = 0;
    let mut panics = 0;
    let mut emitted = 0;
    let prev = panic::take_hook();
    panic::set_hook(Box::new(|_| {}));
    for t in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(t);
        let k = rng.random_range(1..=4usize);
        let vehicles = rng.random_range(1..=6usize);
        let c = rng.random_range(1..=3usize);
        let inst = generate(k * vehicles, k, c, t, HORIZON, DURATION).unwrap();
        let g = build_conflict_graph(&inst);
        let n = inst.num_vertices();
        let w: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let map: Vec<(usize, usize)> = (0..n).flat_map(|v| (0..c).map(move |p| (v, p))).collect();
        let raw: Vec<bool> = (0..map.len()).map(|_| rng.random_bool(0.5)).collect();
        match panic::catch_unwind(|| repair(&raw, &map, &w, &g, 1e-6)) {
            Err(_) => panics += 1,
            Ok(None) => {}
            Ok(Some(col)) => {
                emitted += 1;
                let vs = col.vertices();
                let sorted = vs.windows(2).all(|p| p[0] < p[1]);
                let clean = !vs.is_empty()
                    && sorted
                    && vs.iter().all(|&v| v < n)
                    && vs.iter().enumerate().all(|(i, &a)| {
                        vs[i + 1..].iter().all(|&b| {
                            inst.vertices[a].vehicle != inst.vertices[b].vehicle && !overlap(&inst, a, b)
                        })
                    });
                if !clean {
                    dirty += 1;
                }
            }
        }
    }
    panic::set_hook(prev);
    Verdict {
        id: 8,
        pass: dirty == 0 && panics == 0,
        detail: format!("{trials} random inputs, {emitted} columns, {dirty} dirty, {panics} panics"),
    }
}

fn main() {
    let started = Instant::now();
    let mut log = LpLog {
        audit: LpAudit::default(),
        solves: 0,
        errors: Vec::new(),
    };
    let mut verdicts = Vec::new();
    let mut report = |v: Verdict| {
        say(&format!(
            "criterion {} {}: {}",
            v.id,
            if v.pass { "PASS" } else { "FAIL" },
            v.detail.trim_end()
        ));
        verdicts.push(v);
    };
    report(criterion1(&mut log));
    report(criterion2(&mut log));
    report(criterion3());
    report(criterion4());
    report(criterion5(&log));
    report(criterion6());
    report(criterion7());
    report(criterion8());
    let unexpected: Vec<u32> = verdicts
        .iter()
        .filter(|v| !v.pass && !KNOWN_RED.contains(&v.id))
        .map(|v| v.id)
        .collect();
    let known: Vec<u32> = verdicts
        .iter()
        .filter(|v| !v.pass && KNOWN_RED.contains(&v.id))
        .map(|v| v.id)
        .collect();
    say(&format!(
        "acceptance: {}/{} PASS, known failing {known:?}, unexpected failing {unexpected:?}, {:.1}s",
        verdicts.iter().filter(|v| v.pass).count(),
        verdicts.len(),
        started.elapsed().as_secs_f64()
    ));
    if !unexpected.is_empty() {
        std::process::exit(1);
    }
}
