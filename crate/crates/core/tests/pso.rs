use std::cell::RefCell;

use gbfsvm::pso::{best_of_runs, optimize};
use gbfsvm::PsoConfig;
use proptest::prelude::*;

fn config(dim: usize, hi: f64, seed: u64) -> PsoConfig<f64> {
    PsoConfig {
        max_iter: 60,
        ..PsoConfig::default()
    }
    .with_bounds(vec![0.0; dim], vec![hi; dim])
    .with_seed(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn particles_stay_in_box_and_best_is_monotone(dim in 1usize..6, hi in 0.1f64..20.0, seed in any::<u64>()) {
        let cfg = config(dim, hi, seed);
        let visited = RefCell::new(Vec::new());
        let fitness = |x: &[f64]| {
            visited.borrow_mut().push(x.to_vec());
            -x.iter().map(|v| (v - 0.3 * hi).powi(2)).sum::<f64>()
        };
        let constraint = |x: &[f64]| x.iter().sum::<f64>() - 0.5 * hi;
        let r = optimize(fitness, constraint, &cfg).unwrap();
        prop_assert!(visited.borrow().iter().flatten().all(|&v| (0.0..=hi).contains(&v)));
        prop_assert!(r.history.windows(2).all(|w| w[1] >= w[0]));
        prop_assert_eq!(r.history.len(), cfg.max_iter + 1);
        prop_assert_eq!(*r.history.last().unwrap(), r.score);
    }

    #[test]
    fn fixed_seed_is_reproducible(dim in 1usize..6, seed in any::<u64>()) {
        let cfg = config(dim, 5.0, seed);
        let f = |x: &[f64]| x.iter().map(|v| v.sin()).sum::<f64>();
        let g = |x: &[f64]| x[0] - 1.0;
        prop_assert_eq!(optimize(f, g, &cfg).unwrap(), optimize(f, g, &cfg).unwrap());
    }
}

#[test]
fn best_of_runs_prefers_feasible_runs() {
    let cfg = config(3, 10.0, 9);
    let f = |x: &[f64]| x.iter().sum::<f64>();
    let g = |x: &[f64]| x[0] - x[1];
    let out = best_of_runs(f, g, &cfg, 4).unwrap();
    assert_eq!(out.runs.len(), 4);
    assert_eq!(out.best.seed, 9 + out.run as u64);
    if out.feasible {
        let best = out
            .runs
            .iter()
            .filter(|(_, res)| *res <= cfg.equality_tolerance)
            .map(|(v, _)| *v)
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(out.best.value, best);
    }
}
