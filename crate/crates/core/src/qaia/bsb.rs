use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{run_restarts, sign, IsingModel, QaiaConfig, QaiaError, SpinResult};

const DEFAULT_DT: f64 = 0.25;

/// Ballistic simulated bifurcation with inelastic walls at ±1.
pub fn solve_bsb(m: &IsingModel, cfg: &QaiaConfig) -> Result<SpinResult, QaiaError> {
    let dt = cfg.dt.unwrap_or(DEFAULT_DT);
    cfg.validate(dt)?;
    let xi = cfg.coupling_scale(m);
    run_restarts(m, cfg.restarts, |r| {
        let seed = cfg.seed.wrapping_add(r as u64);
        evolve(m, cfg, dt, xi, seed, |_| {}).map(|x| x.iter().map(|&v| sign(v)).collect())
    })
}

/// One restart; `observe` sees the positions after every step. Returns the
/// final positions, or `None` if the state stopped being finite.
fn evolve(
    m: &IsingModel,
    cfg: &QaiaConfig,
    dt: f64,
    xi: f64,
    seed: u64,
    mut observe: impl FnMut(&[f64]),
) -> Option<Vec<f64>> {
    let n = m.num_spins();
    let h = m.field();
    let a0 = cfg.pump_amplitude;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<f64> = (0..n).map(|_| rng.random_range(-0.1..=0.1)).collect();
    let mut y: Vec<f64> = (0..n).map(|_| rng.random_range(-0.1..=0.1)).collect();
    let mut jx = vec![0.0; n];
    for t in 1..=cfg.steps {
        let a = a0 * t as f64 / cfg.steps as f64;
        m.couple(&x, &mut jx);
        for i in 0..n {
            y[i] += dt * (-(a0 - a) * x[i] + xi * (-jx[i] - h[i]));
            x[i] += dt * a0 * y[i];
            if x[i].abs() > 1.0 {
                x[i] = x[i].signum();
                y[i] = 0.0;
            }
        }
        if x.iter().chain(&y).any(|v| !v.is_finite()) {
            return None;
        }
        observe(&x);
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positions_stay_inside_walls() {
        let couplings: Vec<(usize, usize, f64)> = (0..9)
            .flat_map(|i| ((i + 1)..10).map(move |j| (i, j, if (i + j) % 3 == 0 { 3.0 } else { -2.0 })))
            .collect();
        let m = IsingModel::from_couplings(10, &couplings, vec![5.0; 10], 0.0).unwrap();
        let cfg = QaiaConfig {
            steps: 300,
            xi: 2.0,
            ..QaiaConfig::default()
        };
        let mut worst: f64 = 0.0;
        evolve(&m, &cfg, 0.5, cfg.xi, 3, |x| {
            worst = x.iter().fold(worst, |w, v| w.max(v.abs()));
        })
        .unwrap();
        assert!(worst <= 1.0);
    }
}
