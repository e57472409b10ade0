//! Dual model of the granular-ball fuzzy SVM and its degenerate baselines.
//!
//! With multipliers `alpha`, ball centers `c_i`, radii `r_i` and labels `y_i`,
//! let `A = sum alpha_i y_i c_i` and `B = sum alpha_i r_i`. The dual maximizes
//!
//! ```text
//! -1/2 |A|^2 + 1/2 B^2 + | |A| - B | B + sum alpha_i
//! s.t. sum alpha_i y_i = 0,  0 <= alpha_i <= delta_i C
//! ```
//!
//! and the separating plane is recovered as `w = (|A| - B) A / |A|`, with the
//! bias taken from the margin equality of the balls whose multipliers are
//! strictly inside their box. Zero radii give the plain (fuzzy) SVM dual and
//! unit memberships drop the fuzzy weighting, so all four variants share this
//! code path.

use std::cell::RefCell;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Label};
use crate::error::{Error, Result};
use crate::granular_ball::FuzzyBallSet;
use crate::pso::{self, PsoConfig, PsoResult};
use crate::scalar::{axpy, dot, norm, Scalar};

/// Number of candidate biases scanned by the fallback search.
pub const BIAS_GRID_POINTS: usize = 401;
/// A multiplier counts as interior when it is farther than this fraction of
/// `C` from both box faces.
pub const INTERIOR_TOLERANCE: f64 = 1e-6;
/// Default penalty weight per unit of `C`.
pub const PENALTY_PER_C: f64 = 1e3;

/// Which degeneracies of the ball model apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Points, unit memberships.
    Svm,
    /// Points, fuzzy memberships.
    Fsvm,
    /// Balls, unit memberships.
    Gbsvm,
    /// Balls, fuzzy memberships.
    Gbfsvm,
}

impl Variant {
    pub fn uses_balls(self) -> bool {
        matches!(self, Variant::Gbsvm | Variant::Gbfsvm)
    }

    pub fn uses_memberships(self) -> bool {
        matches!(self, Variant::Fsvm | Variant::Gbfsvm)
    }
}

/// Every trainable model, including the triangular-fuzzy-label variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "svm")]
    Svm,
    #[serde(rename = "fsvm")]
    Fsvm,
    #[serde(rename = "gbsvm")]
    Gbsvm,
    #[serde(rename = "gbfsvm")]
    Gbfsvm,
    #[serde(rename = "gbfsvm-tfn")]
    GbfsvmTfn,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        ModelKind::Svm,
        ModelKind::Fsvm,
        ModelKind::Gbsvm,
        ModelKind::Gbfsvm,
        ModelKind::GbfsvmTfn,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Svm => "svm",
            ModelKind::Fsvm => "fsvm",
            ModelKind::Gbsvm => "gbsvm",
            ModelKind::Gbfsvm => "gbfsvm",
            ModelKind::GbfsvmTfn => "gbfsvm-tfn",
        }
    }

    pub fn variant(self) -> Option<Variant> {
        match self {
            ModelKind::Svm => Some(Variant::Svm),
            ModelKind::Fsvm => Some(Variant::Fsvm),
            ModelKind::Gbsvm => Some(Variant::Gbsvm),
            ModelKind::Gbfsvm => Some(Variant::Gbfsvm),
            ModelKind::GbfsvmTfn => None,
        }
    }

    pub fn uses_balls(self) -> bool {
        self.variant().is_none_or(Variant::uses_balls)
    }
}

impl From<Variant> for ModelKind {
    fn from(v: Variant) -> Self {
        match v {
            Variant::Svm => ModelKind::Svm,
            Variant::Fsvm => ModelKind::Fsvm,
            Variant::Gbsvm => ModelKind::Gbsvm,
            Variant::Gbfsvm => ModelKind::Gbfsvm,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|m| m.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::InvalidParameter(format!("unknown model {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ModelConfig<T: Scalar> {
    pub c: T,
    pub variant: Variant,
}

impl<T: Scalar> ModelConfig<T> {
    pub fn new(c: T, variant: Variant) -> Result<Self> {
        if !(c > T::zero()) || !c.is_finite() {
            return Err(Error::InvalidParameter(format!("penalty C = {c} must be positive")));
        }
        Ok(Self { c, variant })
    }
}

/// Training inputs of the dual: balls (or points, with zero radii).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct BallTrainingSet<T: Scalar> {
    dim: usize,
    centers: Vec<T>,
    radii: Vec<T>,
    labels: Vec<Label>,
    memberships: Vec<T>,
}

impl<T: Scalar> BallTrainingSet<T> {
    pub fn new(dim: usize, centers: Vec<T>, radii: Vec<T>, labels: Vec<Label>, memberships: Vec<T>) -> Result<Self> {
        let m = labels.len();
        if m == 0 {
            return Err(Error::EmptyInput("BallTrainingSet"));
        }
        if dim == 0 || centers.len() != m * dim {
            return Err(Error::LengthMismatch {
                expected: m * dim.max(1),
                got: centers.len(),
            });
        }
        for len in [radii.len(), memberships.len()] {
            if len != m {
                return Err(Error::LengthMismatch { expected: m, got: len });
            }
        }
        if radii.iter().any(|&r| !(r >= T::zero())) {
            return Err(Error::InvalidParameter("radii must be nonnegative".into()));
        }
        if memberships.iter().any(|&v| !(v > T::zero() && v <= T::one())) {
            return Err(Error::InvalidParameter("memberships must lie in (0, 1]".into()));
        }
        Ok(Self {
            dim,
            centers,
            radii,
            labels,
            memberships,
        })
    }

    /// Balls as training units, memberships as attached to each ball.
    pub fn from_balls(fbs: &FuzzyBallSet<T>) -> Result<Self> {
        let dim = fbs.balls.first().map(|b| b.center.len()).unwrap_or(0);
        Self::new(
            dim,
            fbs.balls.iter().flat_map(|b| b.center.iter().copied()).collect(),
            fbs.balls.iter().map(|b| b.radius).collect(),
            fbs.balls.iter().map(|b| b.label).collect(),
            fbs.balls.iter().map(|b| b.membership).collect(),
        )
    }

    /// Points as zero-radius balls. Memberships default to the dataset's own,
    /// or 1.
    pub fn from_points(d: &Dataset<T>, memberships: Option<Vec<T>>) -> Result<Self> {
        let memberships = memberships
            .or_else(|| d.memberships().map(<[T]>::to_vec))
            .unwrap_or_else(|| vec![T::one(); d.len()]);
        Self::new(
            d.dim(),
            d.features().to_vec(),
            vec![T::zero(); d.len()],
            d.labels().to_vec(),
            memberships,
        )
    }

    /// Applies the variant's degeneracies: zero radii for point models, unit
    /// memberships for unweighted models.
    pub fn degenerate(&self, variant: Variant) -> Self {
        let mut out = self.clone();
        if !variant.uses_balls() {
            out.radii.iter_mut().for_each(|r| *r = T::zero());
        }
        if !variant.uses_memberships() {
            out.memberships.iter_mut().for_each(|v| *v = T::one());
        }
        out
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn center(&self, i: usize) -> &[T] {
        &self.centers[i * self.dim..(i + 1) * self.dim]
    }

    pub fn centers(&self) -> &[T] {
        &self.centers
    }

    pub fn radii(&self) -> &[T] {
        &self.radii
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn memberships(&self) -> &[T] {
        &self.memberships
    }

    fn check_len(&self, alpha: &[T]) -> Result<()> {
        if alpha.len() != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                got: alpha.len(),
            });
        }
        Ok(())
    }
}

/// `A = sum alpha_i y_i c_i` and `B = sum alpha_i r_i`.
pub fn compute_a_b<T: Scalar>(alpha: &[T], ts: &BallTrainingSet<T>) -> Result<(Vec<T>, T)> {
    ts.check_len(alpha)?;
    let mut a = vec![T::zero(); ts.dim()];
    let b = accumulate_a_b(alpha, ts, &mut a);
    Ok((a, b))
}

fn accumulate_a_b<T: Scalar>(alpha: &[T], ts: &BallTrainingSet<T>, a: &mut [T]) -> T {
    a.iter_mut().for_each(|v| *v = T::zero());
    let mut b = T::zero();
    for (i, &al) in alpha.iter().enumerate() {
        if al != T::zero() {
            axpy(a, al * ts.labels[i].value::<T>(), ts.center(i));
            b += al * ts.radii[i];
        }
    }
    b
}

/// Dual fitness from `A`, `B` and the multiplier sum.
pub(crate) fn dual_value<T: Scalar>(a_norm: T, b: T, alpha_sum: T) -> T {
    let half = T::lit(0.5);
    -half * a_norm * a_norm + half * b * b + (a_norm - b).abs() * b + alpha_sum
}

/// `-1/2 |A|^2 + 1/2 B^2 + | |A| - B | B + sum alpha_i`.
pub fn gbfsvm_dual_objective<T: Scalar>(alpha: &[T], ts: &BallTrainingSet<T>) -> Result<T> {
    let (a, b) = compute_a_b(alpha, ts)?;
    Ok(dual_value(norm(&a), b, alpha.iter().copied().sum()))
}

/// `w = (|A| - B) A / |A|`, so that `|w| = | |A| - B |`.
///
/// Fails when `|A| = 0`, which leaves no separating direction.
pub fn recover_w<T: Scalar>(alpha: &[T], ts: &BallTrainingSet<T>) -> Result<Vec<T>> {
    let (a, b) = compute_a_b(alpha, ts)?;
    w_from_a_b(&a, b)
}

pub(crate) fn w_from_a_b<T: Scalar>(a: &[T], b: T) -> Result<Vec<T>> {
    let a_norm = norm(a);
    if a_norm == T::zero() {
        return Err(Error::DegenerateSolution("|A| = 0".into()));
    }
    let scale = (a_norm - b) / a_norm;
    Ok(a.iter().map(|&v| v * scale).collect())
}

/// How the bias was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum BiasSource {
    /// Mean over this many interior multipliers.
    Interior { count: usize },
    /// No interior multiplier; bias minimizing the weighted hinge violation.
    GridFallback,
}

/// Bias from the margin equality `(1 + |w| r_i) / y_i - w . c_i` averaged over
/// interior multipliers `0 < alpha_i < delta_i C` (tolerance `1e-6 C`).
/// Without interior multipliers, a grid search minimizes the total weighted
/// hinge violation.
pub fn recover_b<T: Scalar>(alpha: &[T], ts: &BallTrainingSet<T>, w: &[T], c: T) -> Result<(T, BiasSource)> {
    ts.check_len(alpha)?;
    let coeffs: Vec<T> = ts.labels.iter().map(|l| l.value()).collect();
    let upper: Vec<T> = ts.memberships.iter().map(|&d| d * c).collect();
    Ok(bias_from_margins(
        &MarginSet {
            dim: ts.dim,
            centers: &ts.centers,
            radii: &ts.radii,
            coeffs: &coeffs,
            weights: &ts.memberships,
        },
        alpha,
        &upper,
        w,
        T::lit(INTERIOR_TOLERANCE) * c,
    ))
}

/// Per-unit margin constraints `k_i (w . c_i + b) - |w| r_i >= 1`.
pub(crate) struct MarginSet<'a, T> {
    pub dim: usize,
    pub centers: &'a [T],
    pub radii: &'a [T],
    pub coeffs: &'a [T],
    pub weights: &'a [T],
}

pub(crate) fn bias_from_margins<T: Scalar>(
    set: &MarginSet<'_, T>,
    alpha: &[T],
    upper: &[T],
    w: &[T],
    tol: T,
) -> (T, BiasSource) {
    let w_norm = norm(w);
    let proj: Vec<T> = set.centers.chunks_exact(set.dim).map(|c| dot(w, c)).collect();

    let mut sum = T::zero();
    let mut count = 0;
    for i in 0..alpha.len() {
        let k = set.coeffs[i];
        if alpha[i] > tol && alpha[i] < upper[i] - tol && k.abs() > T::epsilon() {
            sum += (T::one() + w_norm * set.radii[i]) / k - proj[i];
            count += 1;
        }
    }
    if count > 0 {
        return (sum / T::from_count(count), BiasSource::Interior { count });
    }

    let hinge = |b: T| -> T {
        (0..alpha.len())
            .map(|i| {
                let slack = T::one() + w_norm * set.radii[i] - set.coeffs[i] * (proj[i] + b);
                set.weights[i] * slack.max(T::zero())
            })
            .sum()
    };
    let reach = proj.iter().fold(T::zero(), |m, p| m.max(p.abs()))
        + w_norm * set.radii.iter().fold(T::zero(), |m, &r| m.max(r))
        + T::one();
    let steps = T::from_count(BIAS_GRID_POINTS - 1);
    let mut best = (T::infinity(), T::zero());
    for s in 0..BIAS_GRID_POINTS {
        let b = -reach + (reach + reach) * T::from_count(s) / steps;
        let h = hinge(b);
        if h < best.0 || (h == best.0 && b.abs() < best.1.abs()) {
            best = (h, b);
        }
    }
    (best.1, BiasSource::GridFallback)
}

/// `sign(w . x + b)`, with zero mapped to `+1`.
pub fn predict<T: Scalar>(w: &[T], b: T, x: &[T]) -> Label {
    if dot(w, x) + b >= T::zero() {
        Label::Pos
    } else {
        Label::Neg
    }
}

/// Fraction of `d` classified correctly by `(w, b)`.
pub fn accuracy<T: Scalar>(w: &[T], b: T, d: &Dataset<T>) -> f64 {
    if d.is_empty() {
        return 0.0;
    }
    let correct = d
        .rows()
        .zip(d.labels())
        .filter(|(x, &y)| predict(w, b, x) == y)
        .count();
    correct as f64 / d.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct DualSolution<T: Scalar> {
    pub model: ModelKind,
    pub alpha: Vec<T>,
    pub w: Vec<T>,
    pub b: T,
    pub objective: T,
    /// Absolute equality-constraint residual at `alpha`.
    pub feasibility_gap: T,
    /// Whether the residual is within the relative tolerance.
    pub feasible: bool,
    /// `|A| <= B`: the normal is zero or points against `A`.
    pub degenerate: bool,
    pub bias_source: BiasSource,
    pub seed: u64,
}

impl<T: Scalar> DualSolution<T> {
    pub fn predict(&self, x: &[T]) -> Label {
        predict(&self.w, self.b, x)
    }

    pub fn accuracy(&self, d: &Dataset<T>) -> f64 {
        accuracy(&self.w, self.b, d)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Serialization(e.to_string()))
    }
}

/// Box `[0, delta_i C]`, penalty `1e3 C` unless configured, default swarm size.
fn dual_pso_config<T: Scalar>(ts: &BallTrainingSet<T>, c: T, pso: &PsoConfig<T>) -> PsoConfig<T> {
    let mut cfg = pso.clone().with_bounds(
        vec![T::zero(); ts.len()],
        ts.memberships.iter().map(|&d| d * c).collect(),
    );
    cfg.penalty_coefficient = Some(pso.penalty_coefficient.unwrap_or(T::lit(PENALTY_PER_C) * c));
    cfg
}

/// Residual bound for multipliers `alpha`: `tolerance * max(1, sum alpha)`.
pub fn feasibility_bound<T: Scalar>(alpha: &[T], tolerance: T) -> T {
    tolerance * alpha.iter().copied().sum::<T>().max(T::one())
}

/// Winner of `runs` swarm runs (seeds `seed + k`) under the best-of-runs rule
/// with [`feasibility_bound`], and whether it is feasible.
pub(crate) fn solve_dual<T, F, G>(
    fitness: F,
    constraint: G,
    cfg: &PsoConfig<T>,
    runs: usize,
) -> Result<(PsoResult<T>, bool)>
where
    T: Scalar,
    F: Fn(&[T]) -> T,
    G: Fn(&[T]) -> T,
{
    if runs == 0 {
        return Err(Error::InvalidParameter("runs must be >= 1".into()));
    }
    let tol = cfg.equality_tolerance;
    let mut results = (0..runs)
        .map(|k| pso::optimize(&fitness, &constraint, &cfg.clone().with_seed(cfg.seed.wrapping_add(k as u64))))
        .collect::<Result<Vec<_>>>()?;
    let (k, feasible) = pso::select_run_by(&results, |r| r.residual <= feasibility_bound(&r.position, tol));
    Ok((results.swap_remove(k), feasible))
}

pub(crate) fn require_feasible<T: Scalar>(sol: DualSolution<T>, tolerance: T) -> Result<DualSolution<T>> {
    if sol.feasible {
        Ok(sol)
    } else {
        Err(Error::SolverFailure {
            residual: sol.feasibility_gap.to_f64_lossy(),
            tolerance: feasibility_bound(&sol.alpha, tolerance).to_f64_lossy(),
        })
    }
}

/// Raw swarm maximization of the dual over the box `[0, delta_i C]`, best of
/// `runs` runs, with its feasibility under [`feasibility_bound`].
pub fn optimize_dual<T: Scalar>(
    ts: &BallTrainingSet<T>,
    c: T,
    pso: &PsoConfig<T>,
    runs: usize,
) -> Result<(PsoResult<T>, bool)> {
    let cfg = dual_pso_config(ts, c, pso);
    let buf = RefCell::new(vec![T::zero(); ts.dim()]);
    let fitness = |alpha: &[T]| {
        let mut a = buf.borrow_mut();
        let b = accumulate_a_b(alpha, ts, &mut a);
        dual_value(norm(&a), b, alpha.iter().copied().sum())
    };
    let constraint = |alpha: &[T]| {
        alpha
            .iter()
            .zip(&ts.labels)
            .map(|(&a, l)| a * l.value::<T>())
            .sum::<T>()
    };
    solve_dual(fitness, constraint, &cfg, runs)
}

/// Maximizes the dual over `runs` swarm runs and recovers the plane even when
/// the winner misses the equality tolerance; see [`DualSolution::feasible`].
///
/// `ts` must already carry the variant's degeneracies (see
/// [`BallTrainingSet::degenerate`]).
pub fn solve<T: Scalar>(
    ts: &BallTrainingSet<T>,
    mc: &ModelConfig<T>,
    pso: &PsoConfig<T>,
    runs: usize,
) -> Result<DualSolution<T>> {
    let (result, feasible) = optimize_dual(ts, mc.c, pso, runs)?;
    let alpha = result.position;
    let (a, b_sum) = compute_a_b(&alpha, ts)?;
    let w = w_from_a_b(&a, b_sum)?;
    let (b, bias_source) = recover_b(&alpha, ts, &w, mc.c)?;
    Ok(DualSolution {
        model: mc.variant.into(),
        objective: result.value,
        feasibility_gap: result.residual,
        feasible,
        degenerate: norm(&a) <= b_sum,
        alpha,
        w,
        b,
        bias_source,
        seed: result.seed,
    })
}

/// Maximizes the dual with one swarm run and recovers the plane. Fails when
/// the equality residual exceeds [`feasibility_bound`].
pub fn train<T: Scalar>(ts: &BallTrainingSet<T>, mc: &ModelConfig<T>, pso: &PsoConfig<T>) -> Result<DualSolution<T>> {
    require_feasible(solve(ts, mc, pso, 1)?, pso.equality_tolerance)
}

/// Like [`train`], keeping the best of `runs` swarm runs (seeds `seed + k`).
pub fn train_best_of_runs<T: Scalar>(
    ts: &BallTrainingSet<T>,
    mc: &ModelConfig<T>,
    pso: &PsoConfig<T>,
    runs: usize,
) -> Result<DualSolution<T>> {
    require_feasible(solve(ts, mc, pso, runs)?, pso.equality_tolerance)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(centers: &[[f64; 2]], radii: &[f64], labels: &[i8]) -> BallTrainingSet<f64> {
        BallTrainingSet::new(
            2,
            centers.iter().flatten().copied().collect(),
            radii.to_vec(),
            labels.iter().map(|&s| Label::from_sign(s).unwrap()).collect(),
            vec![1.0; labels.len()],
        )
        .unwrap()
    }

    #[test]
    fn a_b_examples() {
        let one = set(&[[1.0, 0.0]], &[0.5], &[1]);
        assert_eq!(compute_a_b(&[0.0], &one).unwrap(), (vec![0.0, 0.0], 0.0));
        assert_eq!(compute_a_b(&[1.0], &one).unwrap(), (vec![1.0, 0.0], 0.5));
        let two = set(&[[1.0, 0.0], [1.0, 0.0]], &[0.2, 0.3], &[1, -1]);
        let (a, b) = compute_a_b(&[1.0, 1.0], &two).unwrap();
        assert_eq!(a, vec![0.0, 0.0]);
        assert!((b - 0.5).abs() < 1e-15);
        assert!(matches!(compute_a_b(&[1.0], &two), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn objective_examples() {
        let one = set(&[[1.0, 0.0]], &[0.5], &[1]);
        assert_eq!(gbfsvm_dual_objective(&[0.0], &one).unwrap(), 0.0);
        // -0.5 + 0.125 + 0.25 + 1
        assert_eq!(gbfsvm_dual_objective(&[1.0], &one).unwrap(), 0.875);
    }

    #[test]
    fn w_examples() {
        let one = set(&[[1.0, 0.0]], &[0.5], &[1]);
        assert_eq!(recover_w(&[1.0], &one).unwrap(), vec![0.5, 0.0]);
        let point = set(&[[3.0, -2.0]], &[0.0], &[1]);
        assert_eq!(recover_w(&[1.0], &point).unwrap(), vec![3.0, -2.0]);
        // |A| = 5 = B: zero normal.
        let edge = set(&[[3.0, 4.0]], &[5.0], &[1]);
        let w = recover_w(&[1.0], &edge).unwrap();
        assert_eq!(norm(&w), 0.0);
        let zero = set(&[[1.0, 0.0]], &[0.5], &[1]);
        assert!(matches!(recover_w(&[0.0], &zero), Err(Error::DegenerateSolution(_))));
    }

    #[test]
    fn b_examples() {
        let one = set(&[[1.0, 0.0]], &[0.0], &[1]);
        let (b, src) = recover_b(&[0.5], &one, &[1.0, 0.0], 10.0).unwrap();
        assert_eq!(b, 0.0);
        assert_eq!(src, BiasSource::Interior { count: 1 });

        // Two interior balls with estimates 0.1 and 0.3.
        let two = set(&[[0.9, 0.0], [0.7, 0.0]], &[0.0, 0.0], &[1, 1]);
        let (b, _) = recover_b(&[1.0, 1.0], &two, &[1.0, 0.0], 10.0).unwrap();
        assert!((b - 0.2).abs() < 1e-12);
    }

    #[test]
    fn b_symmetric_points() {
        let ts = BallTrainingSet::<f64>::new(1, vec![1.0, -1.0], vec![0.0, 0.0], vec![Label::Pos, Label::Neg], vec![1.0, 1.0]).unwrap();
        let alpha = [1.0, 1.0];
        let w = recover_w(&alpha, &ts).unwrap();
        assert_eq!(w, vec![2.0]);
        let (b, _) = recover_b(&alpha, &ts, &w, 10.0).unwrap();
        assert_eq!(b, 0.0);
        // All multipliers at a bound: grid fallback still finds the symmetric bias.
        let (b, src) = recover_b(&[0.0, 0.0], &ts, &[1.0], 10.0).unwrap();
        assert_eq!(src, BiasSource::GridFallback);
        assert!(b.abs() < 1e-12);
    }

    #[test]
    fn predict_examples() {
        assert_eq!(predict(&[1.0, 0.0], 0.0, &[2.0, 0.0]), Label::Pos);
        assert_eq!(predict(&[1.0, 0.0], 0.0, &[-2.0, 0.0]), Label::Neg);
        assert_eq!(predict(&[1.0, 0.0], 0.0, &[0.0, 0.0]), Label::Pos);
    }

    #[test]
    fn degeneracies() {
        let ts = BallTrainingSet::new(1, vec![0.0, 1.0], vec![0.3, 0.4], vec![Label::Pos, Label::Neg], vec![0.5, 0.7]).unwrap();
        let svm = ts.degenerate(Variant::Svm);
        assert_eq!(svm.radii(), &[0.0, 0.0]);
        assert_eq!(svm.memberships(), &[1.0, 1.0]);
        let fsvm = ts.degenerate(Variant::Fsvm);
        assert_eq!(fsvm.radii(), &[0.0, 0.0]);
        assert_eq!(fsvm.memberships(), &[0.5, 0.7]);
        let gbsvm = ts.degenerate(Variant::Gbsvm);
        assert_eq!(gbsvm.radii(), &[0.3, 0.4]);
        assert_eq!(gbsvm.memberships(), &[1.0, 1.0]);
        assert_eq!(ts.degenerate(Variant::Gbfsvm), ts);
    }

    #[test]
    fn separable_sanity() {
        let ts = BallTrainingSet::<f64>::new(1, vec![1.0, -1.0], vec![0.0, 0.0], vec![Label::Pos, Label::Neg], vec![1.0, 1.0]).unwrap();
        let mc = ModelConfig::new(10.0, Variant::Gbfsvm).unwrap();
        let sol = train(&ts, &mc, &PsoConfig::default()).unwrap();
        assert_eq!(sol.predict(&[1.0]), Label::Pos);
        assert_eq!(sol.predict(&[-1.0]), Label::Neg);
        assert!(sol.feasibility_gap <= feasibility_bound(&sol.alpha, 1e-3));
        assert!(sol.alpha.iter().zip(ts.memberships()).all(|(&a, &d)| (0.0..=d * 10.0).contains(&a)));
    }

    #[test]
    fn model_kind_parsing() {
        assert_eq!("gbfsvm-tfn".parse::<ModelKind>().unwrap(), ModelKind::GbfsvmTfn);
        assert_eq!("SVM".parse::<ModelKind>().unwrap(), ModelKind::Svm);
        assert!("lasso".parse::<ModelKind>().is_err());
        assert!(ModelConfig::new(0.0, Variant::Svm).is_err());
    }
}
