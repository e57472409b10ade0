//! Granular-ball generation.
//!
//! A granular ball summarizes a subset of the training samples by the mean of
//! their feature vectors (the center), a radius (mean or max distance of the
//! members to the center) and the majority label. Generation starts with a
//! 2-means split of the whole training set and keeps re-splitting every ball
//! whose purity is below the threshold, using k-means with one cluster per
//! label present in the ball. Once all balls are pure enough each ball gets a
//! membership degree, either averaged from its members or evaluated by a
//! membership function at its center.

use std::collections::VecDeque;

use log::warn;
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Label};
use crate::error::{Error, Result};
use crate::scalar::{distance, Scalar};

/// Statistic of member-to-center distances used as the ball radius.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadiusMode {
    #[default]
    MeanDistance,
    MaxDistance,
}

impl std::str::FromStr for RadiusMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean" | "mean_distance" | "mean-distance" => Ok(RadiusMode::MeanDistance),
            "max" | "max_distance" | "max-distance" => Ok(RadiusMode::MaxDistance),
            other => Err(Error::InvalidParameter(format!("unknown radius mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct BallGenConfig<T: Scalar> {
    /// Balls with purity strictly below this value are split again.
    pub purity_threshold: T,
    pub radius_mode: RadiusMode,
    pub kmeans_max_iters: usize,
    /// Seeds the random restart used when class-mean seeding cannot split a ball.
    pub kmeans_seed: u64,
    /// Balls of at most this many members are never split.
    pub min_ball_size: usize,
}

impl<T: Scalar> Default for BallGenConfig<T> {
    fn default() -> Self {
        Self {
            purity_threshold: T::lit(0.9),
            radius_mode: RadiusMode::MeanDistance,
            kmeans_max_iters: 100,
            kmeans_seed: 0,
            min_ball_size: 1,
        }
    }
}

impl<T: Scalar> BallGenConfig<T> {
    pub fn with_threshold(threshold: T) -> Self {
        Self {
            purity_threshold: threshold,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.purity_threshold;
        if !(p > T::lit(0.5) && p <= T::one()) {
            return Err(Error::InvalidParameter(format!(
                "purity threshold {p} outside (0.5, 1]"
            )));
        }
        if self.kmeans_max_iters == 0 {
            return Err(Error::InvalidParameter("kmeans_max_iters must be >= 1".into()));
        }
        if self.min_ball_size == 0 {
            return Err(Error::InvalidParameter("min_ball_size must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct GranularBall<T: Scalar> {
    pub center: Vec<T>,
    pub radius: T,
    pub label: Label,
    pub purity: T,
    /// Membership degree in (0, 1]; 1 until one is attached.
    pub membership: T,
    /// Indices into the source dataset, ascending.
    pub members: Vec<usize>,
}

impl<T: Scalar> GranularBall<T> {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Summarizes the given members of `d`.
    pub fn from_members(d: &Dataset<T>, mut members: Vec<usize>, mode: RadiusMode) -> Result<Self> {
        members.sort_unstable();
        let points: Vec<&[T]> = members.iter().map(|&i| d.row(i)).collect();
        let labels: Vec<Label> = members.iter().map(|&i| d.label(i)).collect();
        let center = ball_center(&points)?;
        let radius = ball_radius(&points, &center, mode)?;
        let (purity, label) = ball_purity::<T>(&labels)?;
        Ok(Self {
            center,
            radius,
            label,
            purity,
            membership: T::one(),
            members,
        })
    }
}

/// Coordinatewise mean of `points`.
pub fn ball_center<T: Scalar>(points: &[&[T]]) -> Result<Vec<T>> {
    let first = points.first().ok_or(Error::EmptyInput("ball_center"))?;
    let mut c = vec![T::zero(); first.len()];
    for p in points {
        if p.len() != c.len() {
            return Err(Error::LengthMismatch {
                expected: c.len(),
                got: p.len(),
            });
        }
        for (acc, &v) in c.iter_mut().zip(*p) {
            *acc += v;
        }
    }
    let n = T::from_count(points.len());
    c.iter_mut().for_each(|v| *v /= n);
    Ok(c)
}

/// Mean or max Euclidean distance from `points` to `center`.
pub fn ball_radius<T: Scalar>(points: &[&[T]], center: &[T], mode: RadiusMode) -> Result<T> {
    if points.is_empty() {
        return Err(Error::EmptyInput("ball_radius"));
    }
    if points.len() == 1 {
        return Ok(T::zero());
    }
    let dists = points.iter().map(|p| distance(p, center));
    Ok(match mode {
        RadiusMode::MeanDistance => dists.sum::<T>() / T::from_count(points.len()),
        RadiusMode::MaxDistance => dists.fold(T::zero(), T::max),
    })
}

/// Fraction of the majority label and the majority label itself; ties go to `+1`.
pub fn ball_purity<T: Scalar>(labels: &[Label]) -> Result<(T, Label)> {
    if labels.is_empty() {
        return Err(Error::EmptyInput("ball_purity"));
    }
    let pos = labels.iter().filter(|&&l| l == Label::Pos).count();
    let neg = labels.len() - pos;
    let (count, label) = if pos >= neg { (pos, Label::Pos) } else { (neg, Label::Neg) };
    Ok((T::from_count(count) / T::from_count(labels.len()), label))
}

/// Balls generated from one dataset. Member index sets partition the source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct FuzzyBallSet<T: Scalar> {
    pub balls: Vec<GranularBall<T>>,
    pub config: BallGenConfig<T>,
    pub source_n: usize,
    /// Balls accepted below the threshold because their members coincide.
    pub warnings: Vec<String>,
}

impl<T: Scalar> FuzzyBallSet<T> {
    pub fn len(&self) -> usize {
        self.balls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.balls.is_empty()
    }

    pub fn records(&self) -> Vec<BallRecord<T>> {
        self.balls
            .iter()
            .map(|b| BallRecord {
                center: b.center.clone(),
                radius: b.radius,
                label: b.label.sign(),
                purity: b.purity,
                membership: b.membership,
                size: b.len(),
            })
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(&self.records()).map_err(|e| Error::Serialization(e.to_string()))
    }

    /// One row per ball: `c0..c{d-1},radius,label,purity,membership,size`.
    pub fn to_csv(&self) -> Result<String> {
        let dim = self.balls.first().map(|b| b.center.len()).unwrap_or(0);
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header: Vec<String> = (0..dim).map(|j| format!("c{j}")).collect();
        header.extend(["radius", "label", "purity", "membership", "size"].map(String::from));
        w.write_record(&header).map_err(|e| Error::Serialization(e.to_string()))?;
        for r in self.records() {
            let mut row: Vec<String> = r.center.iter().map(|v| v.to_string()).collect();
            row.push(r.radius.to_string());
            row.push(r.label.to_string());
            row.push(r.purity.to_string());
            row.push(r.membership.to_string());
            row.push(r.size.to_string());
            w.write_record(&row).map_err(|e| Error::Serialization(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Serialization(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Serialization(e.to_string()))
    }
}

/// Flat per-ball record used by the ball dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct BallRecord<T: Scalar> {
    pub center: Vec<T>,
    pub radius: T,
    pub label: i8,
    pub purity: T,
    pub membership: T,
    pub size: usize,
}

/// Generates granular balls whose purity meets `cfg.purity_threshold`.
///
/// The whole dataset is always split once by 2-means. Afterwards only balls
/// below the threshold are re-split. Results are ordered by smallest member
/// index.
pub fn generate_balls<T: Scalar>(d: &Dataset<T>, cfg: &BallGenConfig<T>) -> Result<FuzzyBallSet<T>> {
    cfg.validate()?;
    d.require_both_classes()?;

    let mut warnings = Vec::new();
    let mut done: Vec<GranularBall<T>> = Vec::new();
    let mut queue: VecDeque<Vec<usize>> = VecDeque::new();

    let all: Vec<usize> = (0..d.len()).collect();
    match split_members(d, &all, cfg) {
        Some(parts) => queue.extend(parts),
        None => queue.push_back(all),
    }

    while let Some(members) = queue.pop_front() {
        let ball = GranularBall::from_members(d, members, cfg.radius_mode)?;
        if ball.purity >= cfg.purity_threshold || ball.len() <= cfg.min_ball_size {
            done.push(ball);
            continue;
        }
        match split_members(d, &ball.members, cfg) {
            Some(parts) => queue.extend(parts),
            None => {
                let msg = format!(
                    "ball of {} identical points (first member {}) kept at purity {}",
                    ball.len(),
                    ball.members[0],
                    ball.purity
                );
                warn!("{msg}");
                warnings.push(msg);
                done.push(ball);
            }
        }
    }

    done.sort_by_key(|b| b.members[0]);
    Ok(FuzzyBallSet {
        balls: done,
        config: cfg.clone(),
        source_n: d.len(),
        warnings,
    })
}

/// Splits `members` into at least two nonempty strictly smaller parts, or
/// returns `None` when all member points coincide.
fn split_members<T: Scalar>(d: &Dataset<T>, members: &[usize], cfg: &BallGenConfig<T>) -> Option<Vec<Vec<usize>>> {
    if members.len() < 2 {
        return None;
    }
    let first = d.row(members[0]);
    if members.iter().all(|&i| d.row(i) == first) {
        return None;
    }

    // One initial center per label present: the per-class means.
    let mut seeds: Vec<Vec<T>> = Vec::new();
    for l in [Label::Pos, Label::Neg] {
        let pts: Vec<&[T]> = members
            .iter()
            .filter(|&&i| d.label(i) == l)
            .map(|&i| d.row(i))
            .collect();
        if !pts.is_empty() {
            seeds.push(ball_center(&pts).expect("nonempty"));
        }
    }
    if seeds.len() < 2 {
        // A pure ball asked to split (the mandatory first split of a dataset
        // never reaches here since both classes are present).
        seeds = farthest_pair_seeds(d, members);
    }
    if let Some(parts) = kmeans_partition(d, members, seeds, cfg.kmeans_max_iters) {
        return Some(parts);
    }

    // Class means collapsed into one cluster: retry from seeded random members.
    let k = 2;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.kmeans_seed ^ (members[0] as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let picks = index::sample(&mut rng, members.len(), k);
    let seeds: Vec<Vec<T>> = picks.iter().map(|p| d.row(members[p]).to_vec()).collect();
    if seeds[0] != seeds[1] {
        if let Some(parts) = kmeans_partition(d, members, seeds, cfg.kmeans_max_iters) {
            return Some(parts);
        }
    }

    // Last resort: peel off the point farthest from the center.
    let pts: Vec<&[T]> = members.iter().map(|&i| d.row(i)).collect();
    let c = ball_center(&pts).expect("nonempty");
    let (far, _) = members
        .iter()
        .enumerate()
        .map(|(k, &i)| (k, distance(d.row(i), &c)))
        .fold((0, T::neg_infinity()), |best, cur| if cur.1 > best.1 { cur } else { best });
    let mut rest = members.to_vec();
    let lone = rest.remove(far);
    Some(vec![rest, vec![lone]])
}

fn farthest_pair_seeds<T: Scalar>(d: &Dataset<T>, members: &[usize]) -> Vec<Vec<T>> {
    let a = d.row(members[0]);
    let b = members
        .iter()
        .map(|&i| d.row(i))
        .fold(a, |best, p| if distance(p, a) > distance(best, a) { p } else { best });
    vec![a.to_vec(), b.to_vec()]
}

/// Lloyd iterations from the given centers. Returns the nonempty clusters when
/// at least two remain, otherwise `None`.
fn kmeans_partition<T: Scalar>(
    d: &Dataset<T>,
    members: &[usize],
    mut centers: Vec<Vec<T>>,
    max_iters: usize,
) -> Option<Vec<Vec<usize>>> {
    let k = centers.len();
    let mut assign = vec![usize::MAX; members.len()];
    for _ in 0..max_iters {
        let mut changed = false;
        for (slot, &i) in assign.iter_mut().zip(members) {
            let x = d.row(i);
            let mut best = 0;
            let mut best_d = distance(x, &centers[0]);
            for (c, center) in centers.iter().enumerate().skip(1) {
                let dist = distance(x, center);
                if dist < best_d {
                    best = c;
                    best_d = dist;
                }
            }
            if *slot != best {
                *slot = best;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        for (c, center) in centers.iter_mut().enumerate() {
            let pts: Vec<&[T]> = members
                .iter()
                .zip(&assign)
                .filter(|(_, &a)| a == c)
                .map(|(&i, _)| d.row(i))
                .collect();
            // An emptied cluster keeps its previous center.
            if let Ok(m) = ball_center(&pts) {
                *center = m;
            }
        }
    }
    let parts: Vec<Vec<usize>> = (0..k)
        .map(|c| {
            members
                .iter()
                .zip(&assign)
                .filter(|(_, &a)| a == c)
                .map(|(&i, _)| i)
                .collect::<Vec<_>>()
        })
        .filter(|p| !p.is_empty())
        .collect();
    (parts.len() >= 2).then_some(parts)
}

/// Sets each ball's membership to the mean of its members' memberships.
pub fn attach_membership_from_samples<T: Scalar>(fbs: &FuzzyBallSet<T>, d: &Dataset<T>) -> Result<FuzzyBallSet<T>> {
    let m = d.memberships().ok_or(Error::MembershipsAbsent)?;
    if d.len() != fbs.source_n {
        return Err(Error::LengthMismatch {
            expected: fbs.source_n,
            got: d.len(),
        });
    }
    let mut out = fbs.clone();
    for ball in &mut out.balls {
        let sum: T = ball.members.iter().map(|&i| m[i]).sum();
        ball.membership = sum / T::from_count(ball.len());
    }
    Ok(out)
}

/// Sets each ball's membership to `mu(center, label)`.
pub fn attach_membership_from_function<T, F>(fbs: &FuzzyBallSet<T>, mu: F) -> Result<FuzzyBallSet<T>>
where
    T: Scalar,
    F: Fn(&[T], Label) -> T,
{
    let mut out = fbs.clone();
    for (k, ball) in out.balls.iter_mut().enumerate() {
        let v = mu(&ball.center, ball.label);
        if !(v > T::zero() && v <= T::one()) {
            return Err(Error::MembershipOutOfRange {
                ball: k,
                value: v.to_f64_lossy(),
            });
        }
        ball.membership = v;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::membership::{fit_class_geometry, membership_value};

    fn blobs() -> Dataset<f64> {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..10 {
            let t = i as f64 * 0.01;
            rows.push(vec![t, t]);
            labels.push(Label::Neg);
            rows.push(vec![5.0 + t, 5.0 - t]);
            labels.push(Label::Pos);
        }
        Dataset::new("blobs", rows, labels, None).unwrap()
    }

    #[test]
    fn center_examples() {
        assert_eq!(ball_center(&[&[0.0, 0.0][..], &[2.0, 0.0]]).unwrap(), vec![1.0, 0.0]);
        assert_eq!(ball_center(&[&[3.0, 3.0][..]]).unwrap(), vec![3.0, 3.0]);
        let sq: [&[f64]; 4] = [&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0], &[1.0, 1.0]];
        assert_eq!(ball_center(&sq).unwrap(), vec![0.5, 0.5]);
        assert!(matches!(ball_center::<f64>(&[]), Err(Error::EmptyInput(_))));
    }

    #[test]
    fn radius_examples() {
        let pts: [&[f64]; 2] = [&[0.0, 0.0], &[2.0, 0.0]];
        assert_eq!(ball_radius(&pts, &[1.0, 0.0], RadiusMode::MeanDistance).unwrap(), 1.0);
        assert_eq!(ball_radius(&pts, &[1.0, 0.0], RadiusMode::MaxDistance).unwrap(), 1.0);
        let pts: [&[f64]; 2] = [&[0.0, 0.0], &[4.0, 0.0]];
        assert_eq!(ball_radius(&pts, &[1.0, 0.0], RadiusMode::MeanDistance).unwrap(), 2.0);
        assert_eq!(ball_radius(&pts, &[1.0, 0.0], RadiusMode::MaxDistance).unwrap(), 3.0);
        assert!(ball_radius::<f64>(&[], &[0.0], RadiusMode::MaxDistance).is_err());
    }

    #[test]
    fn purity_examples() {
        use Label::*;
        assert_eq!(ball_purity::<f64>(&[Pos, Pos, Pos, Neg]).unwrap(), (0.75, Pos));
        assert_eq!(ball_purity::<f64>(&[Pos, Neg]).unwrap(), (0.5, Pos));
        assert_eq!(ball_purity::<f64>(&[Neg, Neg, Neg]).unwrap(), (1.0, Neg));
        assert!(ball_purity::<f64>(&[]).is_err());
    }

    #[test]
    fn separated_clusters_give_two_pure_balls() {
        let fbs = generate_balls(&blobs(), &BallGenConfig::with_threshold(0.9)).unwrap();
        assert_eq!(fbs.len(), 2);
        assert!(fbs.balls.iter().all(|b| b.purity == 1.0 && b.len() == 10));
        assert_eq!(fbs.balls[0].label, Label::Neg);
    }

    #[test]
    fn identical_conflicting_points_are_kept_with_warning() {
        let rows = vec![vec![0.0], vec![0.0], vec![0.0], vec![1.0]];
        let labels = vec![Label::Pos, Label::Neg, Label::Neg, Label::Pos];
        let d = Dataset::new("dup", rows, labels, None).unwrap();
        let fbs = generate_balls(&d, &BallGenConfig::with_threshold(1.0)).unwrap();
        let total: usize = fbs.balls.iter().map(|b| b.len()).sum();
        assert_eq!(total, 4);
        assert_eq!(fbs.warnings.len(), 1);
        assert!(fbs.balls.iter().any(|b| b.len() == 3 && b.purity < 1.0));
    }

    #[test]
    fn membership_from_samples() {
        let rows = vec![vec![0.0], vec![0.1], vec![0.2], vec![9.0]];
        let labels = vec![Label::Neg, Label::Neg, Label::Neg, Label::Pos];
        let d = Dataset::<f64>::new("m", rows, labels, Some(vec![0.2, 0.4, 0.6, 0.9])).unwrap();
        let fbs = generate_balls(&d, &BallGenConfig::with_threshold(0.9)).unwrap();
        let out = attach_membership_from_samples(&fbs, &d).unwrap();
        assert_eq!(out.len(), 2);
        assert!((out.balls[0].membership - 0.4).abs() < 1e-12);
        assert_eq!(out.balls[1].membership, 0.9);

        let plain = Dataset::new("m", vec![vec![0.0], vec![1.0]], vec![Label::Neg, Label::Pos], None).unwrap();
        let fbs = generate_balls(&plain, &BallGenConfig::default()).unwrap();
        assert!(matches!(
            attach_membership_from_samples(&fbs, &plain),
            Err(Error::MembershipsAbsent)
        ));
    }

    #[test]
    fn membership_from_function() {
        let d = blobs();
        let fbs = generate_balls(&d, &BallGenConfig::default()).unwrap();
        let constant = attach_membership_from_function(&fbs, |_, _| 0.7).unwrap();
        assert!(constant.balls.iter().all(|b| b.membership == 0.7));

        // Pure balls centered exactly on their class mean get membership 1.
        let g = fit_class_geometry(&d, 1e-6).unwrap();
        let fitted = attach_membership_from_function(&fbs, |c, y| membership_value(c, y, &g)).unwrap();
        assert!(fitted.balls.iter().all(|b| (b.membership - 1.0).abs() < 1e-12));

        assert!(matches!(
            attach_membership_from_function(&fbs, |_, _| 1.5),
            Err(Error::MembershipOutOfRange { ball: 0, .. })
        ));
        assert!(attach_membership_from_function(&fbs, |_, _| 0.0).is_err());
    }

    #[test]
    fn serialized_dump_has_one_record_per_ball() {
        let fbs = generate_balls(&blobs(), &BallGenConfig::default()).unwrap();
        let csv = fbs.to_csv().unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "c0,c1,radius,label,purity,membership,size");
        assert_eq!(lines.count(), 2);
        let json: Vec<BallRecord<f64>> = serde_json::from_str(&fbs.to_json().unwrap()).unwrap();
        assert_eq!(json.len(), 2);
        assert_eq!(json[0].size, 10);
    }

    #[test]
    fn rejects_bad_threshold() {
        let d = blobs();
        assert!(generate_balls(&d, &BallGenConfig::with_threshold(0.5)).is_err());
        assert!(generate_balls(&d, &BallGenConfig::with_threshold(1.01)).is_err());
    }
}
