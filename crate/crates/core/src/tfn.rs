//! Triangular fuzzy labels and the chance-constrained ball model.
//!
//! A ball's crisp membership `delta` becomes a triangular fuzzy label. At a
//! confidence level `lambda`, the chance constraint on each ball reduces to a
//! crisp margin constraint whose label is the clear coefficient
//! `(1 - lambda) a3 + lambda a2` (positives) or `(1 - lambda) a1 + lambda a2`
//! (negatives). The resulting dual has the same shape as the crisp one.

use std::cell::RefCell;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::data::Label;
use crate::error::{Error, Result};
use crate::granular_ball::FuzzyBallSet;
use crate::pso::PsoConfig;
use crate::scalar::{axpy, dot, norm, Scalar};
use crate::svm::{
    bias_from_margins, dual_value, require_feasible, solve_dual, w_from_a_b, DualSolution, MarginSet, ModelKind, INTERIOR_TOLERANCE,
    PENALTY_PER_C,
};

/// `(r1, r2, r3)` with `r1 <= r2 <= r3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct TriangularFuzzyNumber<T: Scalar> {
    r1: T,
    r2: T,
    r3: T,
}

impl<T: Scalar> TriangularFuzzyNumber<T> {
    pub fn new(r1: T, r2: T, r3: T) -> Result<Self> {
        if !(r1 <= r2 && r2 <= r3) {
            return Err(Error::InvalidParameter(format!("fuzzy number ({r1}, {r2}, {r3}) is not ordered")));
        }
        Ok(Self { r1, r2, r3 })
    }

    pub fn crisp(v: T) -> Self {
        Self { r1: v, r2: v, r3: v }
    }

    pub fn r1(&self) -> T {
        self.r1
    }

    pub fn r2(&self) -> T {
        self.r2
    }

    pub fn r3(&self) -> T {
        self.r3
    }
}

/// Confidence level in `(0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ConfidenceLevel<T: Scalar>(T);

impl<T: Scalar> ConfidenceLevel<T> {
    pub fn new(lambda: T) -> Result<Self> {
        if !(lambda > T::zero() && lambda <= T::one()) {
            return Err(Error::InvalidParameter(format!("confidence level {lambda} outside (0, 1]")));
        }
        Ok(Self(lambda))
    }

    pub fn get(self) -> T {
        self.0
    }
}

/// Class side of a fuzzy-labelled ball.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Positive,
    Negative,
}

impl From<Label> for Side {
    fn from(l: Label) -> Self {
        match l {
            Label::Pos => Side::Positive,
            Label::Neg => Side::Negative,
        }
    }
}

/// Possibility that `a <= 0`.
pub fn pos_leq_zero<T: Scalar>(a: &TriangularFuzzyNumber<T>) -> T {
    if a.r2 <= T::zero() {
        T::one()
    } else if a.r1 <= T::zero() {
        a.r1 / (a.r1 - a.r2)
    } else {
        T::zero()
    }
}

/// Crisp form of `Pos{a <= 0} >= lambda`: `(1 - lambda) r1 + lambda r2 <= 0`.
pub fn chance_leq_zero<T: Scalar>(a: &TriangularFuzzyNumber<T>, lambda: ConfidenceLevel<T>) -> bool {
    let l = lambda.get();
    (T::one() - l) * a.r1 + l * a.r2 <= T::zero()
}

/// Fuzzy label of a ball with signed membership `delta`: `delta` in
/// `[0.5, 1]` for positives, `[-1, -0.5]` for negatives.
pub fn fuzzy_label_from_membership<T: Scalar>(delta: T, side: Side) -> Result<TriangularFuzzyNumber<T>> {
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    let half = T::lit(0.5);
    let d2 = two * delta * delta;
    let (r1, r2, r3) = match side {
        Side::Positive => {
            if !(delta >= half && delta <= T::one()) {
                return Err(Error::InvalidParameter(format!("positive delta {delta} outside [0.5, 1]")));
            }
            ((d2 + delta - two) / delta, two * delta - T::one(), (d2 - three * delta + two) / delta)
        }
        Side::Negative => {
            if !(delta >= -T::one() && delta <= -half) {
                return Err(Error::InvalidParameter(format!("negative delta {delta} outside [-1, -0.5]")));
            }
            ((d2 + three * delta + two) / delta, two * delta + T::one(), (d2 - delta - two) / delta)
        }
    };
    // Rounding can break the ordering by an ulp near delta = 1.
    let r1 = r1.min(r2);
    let r3 = r3.max(r2);
    TriangularFuzzyNumber::new(r1, r2, r3)
}

/// Maps a membership in `(0, 1]` into the signed domain of its side, clamping
/// values below `0.5`. Returns the signed value and whether it was clamped.
pub fn signed_membership<T: Scalar>(membership: T, side: Side) -> (T, bool) {
    let half = T::lit(0.5);
    let clamped = membership < half;
    let m = membership.max(half).min(T::one());
    match side {
        Side::Positive => (m, clamped),
        Side::Negative => (-m, clamped),
    }
}

/// Coefficient multiplying `w . c + b` in the crisp margin constraint.
pub fn clear_constraint_coefficient<T: Scalar>(
    label: &TriangularFuzzyNumber<T>,
    side: Side,
    lambda: ConfidenceLevel<T>,
) -> T {
    let l = lambda.get();
    let outer = match side {
        Side::Positive => label.r3,
        Side::Negative => label.r1,
    };
    (T::one() - l) * outer + l * label.r2
}

/// Chance constraint `Pos{1 + |w| r - label (w . c + b) <= 0} >= lambda`
/// evaluated with the coefficient matching the sign of `w . c + b`.
pub fn sign_split_constraint_holds<T: Scalar>(
    label: &TriangularFuzzyNumber<T>,
    lambda: ConfidenceLevel<T>,
    w: &[T],
    b: T,
    center: &[T],
    radius: T,
) -> bool {
    let s = dot(w, center) + b;
    let side = if s >= T::zero() { Side::Positive } else { Side::Negative };
    clear_constraint_coefficient(label, side, lambda) * s >= T::one() + norm(w) * radius
}

/// Fuzzy-labelled balls, positives first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct TfnBallTrainingSet<T: Scalar> {
    dim: usize,
    centers: Vec<T>,
    radii: Vec<T>,
    fuzzy_labels: Vec<TriangularFuzzyNumber<T>>,
    split_index: usize,
    /// Source ball index of each entry.
    order: Vec<usize>,
}

impl<T: Scalar> TfnBallTrainingSet<T> {
    /// `entries` in any order as `(center, radius, fuzzy label, side)`; they
    /// are stably reordered positives first.
    pub fn new(dim: usize, entries: Vec<(Vec<T>, T, TriangularFuzzyNumber<T>, Side)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyInput("TfnBallTrainingSet"));
        }
        let mut idx: Vec<usize> = (0..entries.len()).collect();
        idx.sort_by_key(|&i| entries[i].3 == Side::Negative);
        let mut out = Self {
            dim,
            centers: Vec::with_capacity(entries.len() * dim),
            radii: Vec::with_capacity(entries.len()),
            fuzzy_labels: Vec::with_capacity(entries.len()),
            split_index: entries.iter().filter(|e| e.3 == Side::Positive).count(),
            order: idx.clone(),
        };
        for i in idx {
            let (c, r, lab, _) = &entries[i];
            if c.len() != dim {
                return Err(Error::LengthMismatch { expected: dim, got: c.len() });
            }
            if !(*r >= T::zero()) {
                return Err(Error::InvalidParameter("radii must be nonnegative".into()));
            }
            out.centers.extend_from_slice(c);
            out.radii.push(*r);
            out.fuzzy_labels.push(*lab);
        }
        Ok(out)
    }

    /// Labels each ball from its attached membership. Memberships below `0.5`
    /// are clamped to `0.5` with a logged warning.
    pub fn from_balls(fbs: &FuzzyBallSet<T>) -> Result<Self> {
        let dim = fbs.balls.first().map(|b| b.center.len()).unwrap_or(0);
        let mut clamped = 0;
        let entries = fbs
            .balls
            .iter()
            .map(|b| {
                let side = Side::from(b.label);
                let (delta, c) = signed_membership(b.membership, side);
                clamped += usize::from(c);
                Ok((b.center.clone(), b.radius, fuzzy_label_from_membership(delta, side)?, side))
            })
            .collect::<Result<Vec<_>>>()?;
        if clamped > 0 {
            warn!("{clamped} ball memberships below 0.5 clamped to 0.5 for fuzzy labelling");
        }
        Self::new(dim, entries)
    }

    /// Crisp labels `(1, 1, 1)` and `(-1, -1, -1)`.
    pub fn crisp(dim: usize, centers: &[T], radii: &[T], labels: &[Label]) -> Result<Self> {
        let entries = labels
            .iter()
            .enumerate()
            .map(|(i, &l)| {
                (
                    centers[i * dim..(i + 1) * dim].to_vec(),
                    radii[i],
                    TriangularFuzzyNumber::crisp(l.value()),
                    Side::from(l),
                )
            })
            .collect();
        Self::new(dim, entries)
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn split_index(&self) -> usize {
        self.split_index
    }

    pub fn center(&self, i: usize) -> &[T] {
        &self.centers[i * self.dim..(i + 1) * self.dim]
    }

    pub fn radii(&self) -> &[T] {
        &self.radii
    }

    pub fn fuzzy_labels(&self) -> &[TriangularFuzzyNumber<T>] {
        &self.fuzzy_labels
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn side(&self, i: usize) -> Side {
        if i < self.split_index {
            Side::Positive
        } else {
            Side::Negative
        }
    }

    pub fn coefficients(&self, lambda: ConfidenceLevel<T>) -> Vec<T> {
        (0..self.len())
            .map(|i| clear_constraint_coefficient(&self.fuzzy_labels[i], self.side(i), lambda))
            .collect()
    }
}

fn accumulate<T: Scalar>(mult: &[T], ts: &TfnBallTrainingSet<T>, coeffs: &[T], a: &mut [T]) -> T {
    a.iter_mut().for_each(|v| *v = T::zero());
    let mut b = T::zero();
    for (i, &m) in mult.iter().enumerate() {
        if m != T::zero() {
            axpy(a, m * coeffs[i], ts.center(i));
            b += m * ts.radii[i];
        }
    }
    b
}

/// Dual fitness with `A = M + N` built from clear coefficients; `beta` holds
/// the positive multipliers and `alpha` the negative ones.
pub fn tfn_dual_objective<T: Scalar>(
    beta: &[T],
    alpha: &[T],
    ts: &TfnBallTrainingSet<T>,
    lambda: ConfidenceLevel<T>,
) -> Result<T> {
    if beta.len() != ts.split_index {
        return Err(Error::LengthMismatch {
            expected: ts.split_index,
            got: beta.len(),
        });
    }
    if alpha.len() != ts.len() - ts.split_index {
        return Err(Error::LengthMismatch {
            expected: ts.len() - ts.split_index,
            got: alpha.len(),
        });
    }
    let mult: Vec<T> = beta.iter().chain(alpha).copied().collect();
    let mut a = vec![T::zero(); ts.dim];
    let b = accumulate(&mult, ts, &ts.coefficients(lambda), &mut a);
    Ok(dual_value(norm(&a), b, mult.iter().copied().sum()))
}

/// Maximizes the fuzzy-label dual under `sum mult_i coef_i = 0` and the box
/// `[0, C]`. The returned multipliers follow the set's positives-first order.
pub fn train_tfn<T: Scalar>(
    ts: &TfnBallTrainingSet<T>,
    lambda: ConfidenceLevel<T>,
    c: T,
    pso_cfg: &PsoConfig<T>,
) -> Result<DualSolution<T>> {
    require_feasible(solve_tfn(ts, lambda, c, pso_cfg, 1)?, pso_cfg.equality_tolerance)
}

/// Like [`train_tfn`], keeping the best of `runs` swarm runs.
pub fn train_tfn_best_of_runs<T: Scalar>(
    ts: &TfnBallTrainingSet<T>,
    lambda: ConfidenceLevel<T>,
    c: T,
    pso_cfg: &PsoConfig<T>,
    runs: usize,
) -> Result<DualSolution<T>> {
    require_feasible(solve_tfn(ts, lambda, c, pso_cfg, runs)?, pso_cfg.equality_tolerance)
}

/// Best of `runs` swarm runs, returned even when it misses the equality
/// tolerance; see [`DualSolution::feasible`].
pub fn solve_tfn<T: Scalar>(
    ts: &TfnBallTrainingSet<T>,
    lambda: ConfidenceLevel<T>,
    c: T,
    pso_cfg: &PsoConfig<T>,
    runs: usize,
) -> Result<DualSolution<T>> {
    if !(c > T::zero()) {
        return Err(Error::InvalidParameter(format!("penalty C = {c} must be positive")));
    }
    let coeffs = ts.coefficients(lambda);
    let mut cfg = pso_cfg
        .clone()
        .with_bounds(vec![T::zero(); ts.len()], vec![c; ts.len()]);
    cfg.penalty_coefficient = Some(pso_cfg.penalty_coefficient.unwrap_or(T::lit(PENALTY_PER_C) * c));

    let buf = RefCell::new(vec![T::zero(); ts.dim]);
    let fitness = |m: &[T]| {
        let mut a = buf.borrow_mut();
        let b = accumulate(m, ts, &coeffs, &mut a);
        dual_value(norm(&a), b, m.iter().copied().sum())
    };
    let constraint = |m: &[T]| m.iter().zip(&coeffs).map(|(&x, &k)| x * k).sum::<T>();
    let (result, feasible) = solve_dual(fitness, constraint, &cfg, runs)?;

    let mult = result.position;
    let mut a = vec![T::zero(); ts.dim];
    let b_sum = accumulate(&mult, ts, &coeffs, &mut a);
    let w = w_from_a_b(&a, b_sum)?;
    let ones = vec![T::one(); ts.len()];
    let (b, bias_source) = bias_from_margins(
        &MarginSet {
            dim: ts.dim,
            centers: &ts.centers,
            radii: &ts.radii,
            coeffs: &coeffs,
            weights: &ones,
        },
        &mult,
        &cfg.upper,
        &w,
        T::lit(INTERIOR_TOLERANCE) * c,
    );
    Ok(DualSolution {
        model: ModelKind::GbfsvmTfn,
        objective: result.value,
        feasibility_gap: result.residual,
        feasible,
        degenerate: norm(&a) <= b_sum,
        alpha: mult,
        w,
        b,
        bias_source,
        seed: result.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tfn(a: f64, b: f64, c: f64) -> TriangularFuzzyNumber<f64> {
        TriangularFuzzyNumber::new(a, b, c).unwrap()
    }

    fn lam(l: f64) -> ConfidenceLevel<f64> {
        ConfidenceLevel::new(l).unwrap()
    }

    #[test]
    fn possibility_examples() {
        assert_eq!(pos_leq_zero(&tfn(-3.0, -1.0, 0.0)), 1.0);
        assert_eq!(pos_leq_zero(&tfn(1.0, 2.0, 3.0)), 0.0);
        assert_eq!(pos_leq_zero(&tfn(-1.0, 1.0, 2.0)), 0.5);
    }

    #[test]
    fn chance_examples() {
        assert!(chance_leq_zero(&tfn(-1.0, 1.0, 2.0), lam(0.5)));
        for l in [0.1, 0.5, 1.0] {
            assert!(!chance_leq_zero(&tfn(1.0, 2.0, 3.0), lam(l)));
            assert!(chance_leq_zero(&tfn(-3.0, -1.0, 0.0), lam(l)));
        }
    }

    #[test]
    fn validation() {
        assert!(TriangularFuzzyNumber::new(1.0, 0.0, 2.0).is_err());
        assert!(ConfidenceLevel::new(0.0).is_err());
        assert!(ConfidenceLevel::new(1.5).is_err());
        assert!(ConfidenceLevel::new(1.0).is_ok());
    }

    #[test]
    fn label_examples() {
        assert_eq!(fuzzy_label_from_membership(1.0, Side::Positive).unwrap(), tfn(1.0, 1.0, 1.0));
        assert_eq!(fuzzy_label_from_membership(0.5, Side::Positive).unwrap(), tfn(-2.0, 0.0, 2.0));
        assert_eq!(fuzzy_label_from_membership(-1.0, Side::Negative).unwrap(), tfn(-1.0, -1.0, -1.0));
        assert!(fuzzy_label_from_membership(0.4, Side::Positive).is_err());
        assert!(fuzzy_label_from_membership(0.7, Side::Negative).is_err());
    }

    #[test]
    fn signed_membership_clamps() {
        assert_eq!(signed_membership(0.8, Side::Negative), (-0.8, false));
        assert_eq!(signed_membership(0.2, Side::Negative), (-0.5, true));
        assert_eq!(signed_membership(0.3, Side::Positive), (0.5, true));
    }

    #[test]
    fn coefficient_examples() {
        for l in [0.1, 0.5, 1.0] {
            assert_eq!(clear_constraint_coefficient(&tfn(1.0, 1.0, 1.0), Side::Positive, lam(l)), 1.0);
            assert_eq!(clear_constraint_coefficient(&tfn(1.0, 1.0, 1.0), Side::Negative, lam(l)), 1.0);
        }
        let y = tfn(-2.0, 0.0, 2.0);
        assert_eq!(clear_constraint_coefficient(&y, Side::Positive, lam(1.0)), 0.0);
        assert_eq!(clear_constraint_coefficient(&y, Side::Positive, lam(0.5)), 1.0);
    }

    #[test]
    fn objective_examples() {
        let ts = TfnBallTrainingSet::new(
            2,
            vec![
                (vec![1.0, 0.0], 0.5, tfn(-2.0, 0.0, 2.0), Side::Positive),
                (vec![0.0, 1.0], 0.1, tfn(-1.0, -1.0, -1.0), Side::Negative),
            ],
        )
        .unwrap();
        assert_eq!(tfn_dual_objective(&[0.0], &[0.0], &ts, lam(0.5)).unwrap(), 0.0);
        assert_eq!(tfn_dual_objective(&[1.0], &[0.0], &ts, lam(0.5)).unwrap(), 0.875);
        assert!(tfn_dual_objective(&[1.0, 0.0], &[], &ts, lam(0.5)).is_err());
    }

    #[test]
    fn positives_ranked_first() {
        let ts = TfnBallTrainingSet::crisp(
            1,
            &[0.0, 1.0, 2.0, 3.0],
            &[0.0; 4],
            &[Label::Neg, Label::Pos, Label::Neg, Label::Pos],
        )
        .unwrap();
        assert_eq!(ts.split_index(), 2);
        assert_eq!(ts.order(), &[1, 3, 0, 2]);
        assert_eq!(ts.center(0), &[1.0]);
        assert_eq!(ts.side(2), Side::Negative);
    }

    #[test]
    fn two_ball_separable() {
        let ts = TfnBallTrainingSet::crisp(1, &[-1.0, 1.0], &[0.0, 0.0], &[Label::Neg, Label::Pos]).unwrap();
        let sol = train_tfn(&ts, lam(0.7), 10.0, &PsoConfig::default()).unwrap();
        assert_eq!(sol.predict(&[1.0]), Label::Pos);
        assert_eq!(sol.predict(&[-1.0]), Label::Neg);
        assert_eq!(sol.model, ModelKind::GbfsvmTfn);
    }

    #[test]
    fn sign_split_predicate() {
        let y = tfn(1.0, 1.0, 1.0);
        assert!(sign_split_constraint_holds(&y, lam(0.5), &[2.0], 0.0, &[1.0], 0.0));
        assert!(!sign_split_constraint_holds(&y, lam(0.5), &[0.5], 0.0, &[1.0], 0.0));
        let n = tfn(-1.0, -1.0, -1.0);
        assert!(sign_split_constraint_holds(&n, lam(0.5), &[2.0], 0.0, &[-1.0], 0.0));
    }
}
