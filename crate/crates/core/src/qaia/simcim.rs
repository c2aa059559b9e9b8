use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{run_restarts, sign, IsingModel, QaiaConfig, QaiaError, SpinResult};

const DEFAULT_DT: f64 = 0.05;

/// Simulated coherent Ising machine: linearly pumped, noisy amplitude
/// dynamics clamped to `[-1, 1]`.
pub fn solve_simcim(m: &IsingModel, cfg: &QaiaConfig) -> Result<SpinResult, QaiaError> {
    let dt = cfg.dt.unwrap_or(DEFAULT_DT);
    cfg.validate(dt)?;
    let xi = cfg.coupling_scale(m);
    let n = m.num_spins();
    let h = m.field();
    run_restarts(m, cfg.restarts, |r| {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(r as u64));
        let mut c = vec![0.0; n];
        let mut jc = vec![0.0; n];
        let span = cfg.pump_end - cfg.pump_start;
        for t in 1..=cfg.steps {
            let p = cfg.pump_start + span * t as f64 / cfg.steps as f64;
            m.couple(&c, &mut jc);
            for i in 0..n {
                let noise: f64 = StandardNormal.sample(&mut rng);
                let next = c[i] + dt * (p * c[i] + xi * (-jc[i] - h[i])) + cfg.noise * noise;
                c[i] = next.clamp(-1.0, 1.0);
            }
            if c.iter().any(|v| !v.is_finite()) {
                return None;
            }
        }
        Some(c.iter().map(|&v| sign(v)).collect())
    })
}
