//! Seeded global-best particle swarm maximizer over a box, with a single
//! linear (or any scalar) equality constraint handled by a quadratic penalty.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const DEFAULT_MAX_ITER: usize = 1050;
pub const DEFAULT_INERTIA: f64 = 0.5;
pub const DEFAULT_LEARNING_FACTOR: f64 = 1.6;
pub const DEFAULT_EQUALITY_TOLERANCE: f64 = 1e-3;
/// Per-coordinate velocity limit as a fraction of the box width.
pub const VELOCITY_CLAMP_FRACTION: f64 = 0.2;

/// Swarm size used when none is configured: `max(30, 2m)` capped at 200.
pub fn default_pop(dim: usize) -> usize {
    (2 * dim).clamp(30, 200)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct PsoConfig<T: Scalar> {
    /// Number of particles; `None` picks [`default_pop`] for the problem size.
    pub pop: Option<usize>,
    pub max_iter: usize,
    pub inertia: T,
    pub c1: T,
    pub c2: T,
    /// Box bounds. Model trainers overwrite these with `0` and `delta_i * C`.
    pub lower: Vec<T>,
    pub upper: Vec<T>,
    pub equality_tolerance: T,
    /// Quadratic penalty weight; `None` means `1e3` here and `1e3 * C` in the
    /// model trainers.
    pub penalty_coefficient: Option<T>,
    pub seed: u64,
}

impl<T: Scalar> Default for PsoConfig<T> {
    fn default() -> Self {
        Self {
            pop: None,
            max_iter: DEFAULT_MAX_ITER,
            inertia: T::lit(DEFAULT_INERTIA),
            c1: T::lit(DEFAULT_LEARNING_FACTOR),
            c2: T::lit(DEFAULT_LEARNING_FACTOR),
            lower: Vec::new(),
            upper: Vec::new(),
            equality_tolerance: T::lit(DEFAULT_EQUALITY_TOLERANCE),
            penalty_coefficient: None,
            seed: 0,
        }
    }
}

impl<T: Scalar> PsoConfig<T> {
    pub fn with_bounds(mut self, lower: Vec<T>, upper: Vec<T>) -> Self {
        self.lower = lower;
        self.upper = upper;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn resolved_pop(&self) -> usize {
        self.pop.unwrap_or_else(|| default_pop(self.dim()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.lower.len() != self.upper.len() {
            return Err(Error::LengthMismatch {
                expected: self.lower.len(),
                got: self.upper.len(),
            });
        }
        if self.lower.is_empty() {
            return Err(Error::InvalidParameter("empty search box".into()));
        }
        if let Some(i) = (0..self.lower.len()).find(|&i| {
            !(self.lower[i] <= self.upper[i]) || !self.lower[i].is_finite() || !self.upper[i].is_finite()
        }) {
            return Err(Error::InvalidParameter(format!(
                "bounds [{}, {}] invalid at coordinate {i}",
                self.lower[i], self.upper[i]
            )));
        }
        if self.pop == Some(0) || self.max_iter == 0 {
            return Err(Error::InvalidParameter("pop and max_iter must be >= 1".into()));
        }
        if let Some(p) = self.penalty_coefficient {
            if !(p > T::zero()) {
                return Err(Error::InvalidParameter("penalty coefficient must be positive".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct PsoResult<T: Scalar> {
    pub position: Vec<T>,
    /// Raw fitness at `position`.
    pub value: T,
    /// `|constraint(position)|`.
    pub residual: T,
    /// Penalized score `value - penalty * constraint^2`.
    pub score: T,
    /// Global-best penalized score after initialization and each iteration.
    pub history: Vec<T>,
    pub seed: u64,
}

/// Maximizes `fitness` over the configured box, penalizing the squared
/// equality residual `constraint(x)`. Deterministic for a fixed seed.
///
/// Velocities start at zero and positions uniformly in the box. Each
/// iteration moves every particle, then evaluates all of them and updates the
/// personal and global bests; ties keep the earlier incumbent (lowest index
/// among new candidates).
pub fn optimize<T, F, G>(fitness: F, constraint: G, cfg: &PsoConfig<T>) -> Result<PsoResult<T>>
where
    T: Scalar,
    F: Fn(&[T]) -> T,
    G: Fn(&[T]) -> T,
{
    cfg.validate()?;
    let dim = cfg.dim();
    let pop = cfg.resolved_pop();
    let penalty = cfg.penalty_coefficient.unwrap_or_else(|| T::lit(1e3));
    let vmax: Vec<T> = cfg
        .lower
        .iter()
        .zip(&cfg.upper)
        .map(|(&lo, &hi)| (hi - lo) * T::lit(VELOCITY_CLAMP_FRACTION))
        .collect();
    let score_of = |x: &[T]| {
        let r = constraint(x);
        let f = fitness(x);
        let s = f - penalty * r * r;
        // NaN never wins.
        (if s.is_nan() { T::neg_infinity() } else { s }, f, r)
    };

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut pos: Vec<T> = Vec::with_capacity(pop * dim);
    for _ in 0..pop {
        for j in 0..dim {
            let u: f64 = rng.gen();
            pos.push(cfg.lower[j] + (cfg.upper[j] - cfg.lower[j]) * T::lit(u));
        }
    }
    let mut vel = vec![T::zero(); pop * dim];
    let mut pbest = pos.clone();
    let mut pbest_score: Vec<T> = pos.chunks_exact(dim).map(|x| score_of(x).0).collect();

    let mut g = 0;
    for i in 1..pop {
        if pbest_score[i] > pbest_score[g] {
            g = i;
        }
    }
    let mut gbest = pbest[g * dim..(g + 1) * dim].to_vec();
    let mut gbest_score = pbest_score[g];
    let mut history = Vec::with_capacity(cfg.max_iter + 1);
    history.push(gbest_score);

    for _ in 0..cfg.max_iter {
        for i in 0..pop {
            let base = i * dim;
            for j in 0..dim {
                let k = base + j;
                let u1 = T::lit(rng.gen::<f64>());
                let u2 = T::lit(rng.gen::<f64>());
                let mut v = cfg.inertia * vel[k]
                    + cfg.c1 * u1 * (pbest[k] - pos[k])
                    + cfg.c2 * u2 * (gbest[j] - pos[k]);
                v = v.max(-vmax[j]).min(vmax[j]);
                vel[k] = v;
                pos[k] = (pos[k] + v).max(cfg.lower[j]).min(cfg.upper[j]);
            }
        }
        let mut best_new: Option<(usize, T)> = None;
        for i in 0..pop {
            let x = &pos[i * dim..(i + 1) * dim];
            let s = score_of(x).0;
            if s > pbest_score[i] {
                pbest_score[i] = s;
                pbest[i * dim..(i + 1) * dim].copy_from_slice(x);
            }
            if s > best_new.map_or(gbest_score, |(_, b)| b) {
                best_new = Some((i, s));
            }
        }
        if let Some((b, s)) = best_new {
            gbest.copy_from_slice(&pos[b * dim..(b + 1) * dim]);
            gbest_score = s;
        }
        history.push(gbest_score);
    }

    let (score, value, r) = score_of(&gbest);
    Ok(PsoResult {
        position: gbest,
        value,
        residual: r.abs(),
        score,
        history,
        seed: cfg.seed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct BestOfRuns<T: Scalar> {
    pub best: PsoResult<T>,
    /// Index `k` of the winning run; its seed is `cfg.seed + k`.
    pub run: usize,
    /// Whether the winner meets the equality tolerance.
    pub feasible: bool,
    /// Raw fitness and residual of every run, in run order.
    pub runs: Vec<(T, T)>,
}

/// Runs [`optimize`] `runs` times with seeds `cfg.seed + k` and keeps the run
/// with the highest raw fitness among those within the equality tolerance,
/// or else the run with the smallest residual.
pub fn best_of_runs<T, F, G>(fitness: F, constraint: G, cfg: &PsoConfig<T>, runs: usize) -> Result<BestOfRuns<T>>
where
    T: Scalar,
    F: Fn(&[T]) -> T,
    G: Fn(&[T]) -> T,
{
    if runs == 0 {
        return Err(Error::InvalidParameter("runs must be >= 1".into()));
    }
    let mut results = Vec::with_capacity(runs);
    for k in 0..runs {
        let c = cfg.clone().with_seed(cfg.seed.wrapping_add(k as u64));
        results.push(optimize(&fitness, &constraint, &c)?);
    }
    let (run, feasible) = select_run(&results, cfg.equality_tolerance);
    let summary = results.iter().map(|r| (r.value, r.residual)).collect();
    Ok(BestOfRuns {
        best: results.swap_remove(run),
        run,
        feasible,
        runs: summary,
    })
}

/// Winner index among `results` under the best-of-runs rule.
pub fn select_run<T: Scalar>(results: &[PsoResult<T>], tolerance: T) -> (usize, bool) {
    select_run_by(results, |r| r.residual <= tolerance)
}

/// Highest raw fitness among runs accepted by `feasible`, else the smallest
/// residual (reported as infeasible). Ties keep the earlier run.
pub fn select_run_by<T, P>(results: &[PsoResult<T>], feasible: P) -> (usize, bool)
where
    T: Scalar,
    P: Fn(&PsoResult<T>) -> bool,
{
    let best = results
        .iter()
        .enumerate()
        .filter(|(_, r)| feasible(r))
        .fold(None::<usize>, |best, (k, r)| match best {
            Some(b) if results[b].value >= r.value => Some(b),
            _ => Some(k),
        });
    match best {
        Some(k) => (k, true),
        None => {
            let k = results
                .iter()
                .enumerate()
                .fold(0, |b, (k, r)| if r.residual < results[b].residual { k } else { b });
            (k, false)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(dim: usize) -> PsoConfig<f64> {
        PsoConfig {
            pop: Some(40),
            max_iter: 300,
            ..PsoConfig::default()
        }
        .with_bounds(vec![0.0; dim], vec![1.0; dim])
        .with_seed(11)
    }

    #[test]
    fn unimodal_optimum() {
        let f = |x: &[f64]| -x.iter().map(|v| (v - 0.3) * (v - 0.3)).sum::<f64>();
        let r = optimize(f, |_| 0.0, &cfg(5)).unwrap();
        for v in &r.position {
            assert!((v - 0.3).abs() < 1e-3, "{v}");
        }
        assert_eq!(r.residual, 0.0);
    }

    #[test]
    fn constrained_face() {
        let f = |x: &[f64]| x.iter().sum::<f64>();
        let g = |x: &[f64]| x.iter().sum::<f64>() - 1.0;
        let r = optimize(f, g, &cfg(3)).unwrap();
        assert!(r.residual <= 1e-3, "residual {}", r.residual);
        // Every point with sum 1 is optimal; the raw value is 1 + residual-sized slack.
        assert!((r.value - 1.0).abs() <= 1e-3);
    }

    #[test]
    fn deterministic_under_seed() {
        let f = |x: &[f64]| -(x[0] - 0.7).powi(2) - (x[1] - 0.1).abs();
        let a = optimize(f, |_| 0.0, &cfg(2)).unwrap();
        let b = optimize(f, |_| 0.0, &cfg(2)).unwrap();
        assert_eq!(a, b);
        let c = optimize(f, |_| 0.0, &cfg(2).with_seed(12)).unwrap();
        assert_ne!(a.history, c.history);
    }

    #[test]
    fn incumbent_is_monotone() {
        let f = |x: &[f64]| (x[0] * 13.0).sin() + (x[1] * 7.0).cos();
        let r = optimize(f, |x| x[0] - x[1], &cfg(2)).unwrap();
        assert!(r.history.windows(2).all(|w| w[1] >= w[0]));
        assert_eq!(r.history.len(), 301);
    }

    #[test]
    fn best_of_runs_semantics() {
        let f = |x: &[f64]| (x[0] * 9.0).sin() * x[1];
        let base = cfg(2);
        let one = best_of_runs(f, |_| 0.0, &base, 1).unwrap();
        assert_eq!(one.best, optimize(f, |_| 0.0, &base).unwrap());

        let four = best_of_runs(f, |_| 0.0, &base, 4).unwrap();
        assert!(four.runs.iter().all(|&(v, _)| four.best.value >= v));
        assert_eq!(four.best.seed, base.seed + four.run as u64);
        assert_eq!(four, best_of_runs(f, |_| 0.0, &base, 4).unwrap());
        assert!(best_of_runs(f, |_| 0.0, &base, 0).is_err());
    }

    #[test]
    fn infeasible_runs_fall_back_to_lowest_residual() {
        let mk = |value: f64, residual: f64| PsoResult {
            position: vec![],
            value,
            residual,
            score: value,
            history: vec![],
            seed: 0,
        };
        let rs = vec![mk(5.0, 0.5), mk(1.0, 0.1), mk(9.0, 0.3)];
        assert_eq!(select_run(&rs, 1e-3), (1, false));
        assert_eq!(select_run(&rs, 0.35), (2, true));
    }

    #[test]
    fn invalid_configs() {
        let f = |_: &[f64]| 0.0;
        assert!(optimize(f, f, &PsoConfig::default()).is_err());
        let bad = PsoConfig::default().with_bounds(vec![1.0], vec![0.0]);
        assert!(optimize(f, f, &bad).is_err());
    }

    #[test]
    fn default_pop_rule() {
        assert_eq!(default_pop(3), 30);
        assert_eq!(default_pop(40), 80);
        assert_eq!(default_pop(600), 200);
    }
}
