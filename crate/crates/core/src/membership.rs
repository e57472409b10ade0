//! Class-center membership function: a sample's degree of belonging to its
//! class decays linearly with its distance to the class mean, reaching zero
//! just beyond the farthest training member.

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Label};
use crate::error::{Error, Result};
use crate::scalar::{distance, Scalar};

/// Default `epsilon` keeping the farthest member's membership positive.
pub const DEFAULT_EPSILON: f64 = 1e-6;

/// Per-class means and radii fitted on a training set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ClassGeometry<T: Scalar> {
    pub mean_pos: Vec<T>,
    pub mean_neg: Vec<T>,
    pub radius_pos: T,
    pub radius_neg: T,
    pub epsilon: T,
}

impl<T: Scalar> ClassGeometry<T> {
    pub fn mean(&self, label: Label) -> &[T] {
        match label {
            Label::Pos => &self.mean_pos,
            Label::Neg => &self.mean_neg,
        }
    }

    pub fn radius(&self, label: Label) -> T {
        match label {
            Label::Pos => self.radius_pos,
            Label::Neg => self.radius_neg,
        }
    }

    /// Membership of `x` in class `y`; see [`membership_value`].
    pub fn membership(&self, x: &[T], y: Label) -> T {
        membership_value(x, y, self)
    }

    /// Memberships of every sample of `d` under its own label.
    pub fn memberships_for(&self, d: &Dataset<T>) -> Vec<T> {
        d.rows()
            .zip(d.labels())
            .map(|(x, &y)| self.membership(x, y))
            .collect()
    }
}

fn class_mean_and_radius<T: Scalar>(d: &Dataset<T>, label: Label) -> Result<(Vec<T>, T)> {
    let members: Vec<&[T]> = d
        .rows()
        .zip(d.labels())
        .filter(|(_, &l)| l == label)
        .map(|(r, _)| r)
        .collect();
    if members.is_empty() {
        return Err(Error::ClassTooSmall {
            label: label.sign(),
            count: 0,
            required: 1,
        });
    }
    let mut mean = vec![T::zero(); d.dim()];
    for r in &members {
        for (m, &v) in mean.iter_mut().zip(*r) {
            *m += v;
        }
    }
    let n = T::from_count(members.len());
    mean.iter_mut().for_each(|m| *m /= n);
    let radius = members
        .iter()
        .map(|r| distance(r, &mean))
        .fold(T::zero(), T::max);
    Ok((mean, radius))
}

/// Fits class means and max-distance radii.
pub fn fit_class_geometry<T: Scalar>(d: &Dataset<T>, epsilon: T) -> Result<ClassGeometry<T>> {
    if !(epsilon > T::zero()) {
        return Err(Error::InvalidParameter(format!("epsilon {epsilon} must be positive")));
    }
    let (mean_pos, radius_pos) = class_mean_and_radius(d, Label::Pos)?;
    let (mean_neg, radius_neg) = class_mean_and_radius(d, Label::Neg)?;
    Ok(ClassGeometry {
        mean_pos,
        mean_neg,
        radius_pos,
        radius_neg,
        epsilon,
    })
}

/// `1 - |x - mean_y| / (radius_y + epsilon)`, floored at `epsilon` for
/// queries beyond the class radius.
pub fn membership_value<T: Scalar>(x: &[T], y: Label, g: &ClassGeometry<T>) -> T {
    let raw = T::one() - distance(x, g.mean(y)) / (g.radius(y) + g.epsilon);
    raw.max(g.epsilon)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ds(pos: &[[f64; 2]], neg: &[[f64; 2]]) -> Dataset<f64> {
        let rows = pos.iter().chain(neg).map(|r| r.to_vec()).collect();
        let labels = std::iter::repeat_n(Label::Pos, pos.len())
            .chain(std::iter::repeat_n(Label::Neg, neg.len()))
            .collect();
        Dataset::new("g", rows, labels, None).unwrap()
    }

    #[test]
    fn geometry_examples() {
        let d = ds(&[[0.0, 0.0], [2.0, 0.0]], &[[0.0, 0.0], [0.0, 4.0], [0.0, 2.0]]);
        let g = fit_class_geometry(&d, 1e-6).unwrap();
        assert_eq!(g.mean_pos, vec![1.0, 0.0]);
        assert_eq!(g.radius_pos, 1.0);
        assert_eq!(g.mean_neg, vec![0.0, 2.0]);
        assert_eq!(g.radius_neg, 2.0);

        let single = ds(&[[5.0, 5.0]], &[[0.0, 0.0], [1.0, 1.0]]);
        assert_eq!(fit_class_geometry(&single, 1e-6).unwrap().radius_pos, 0.0);
    }

    #[test]
    fn empty_class_is_an_error() {
        let d = Dataset::from_flat("x", 1, vec![0.0, 1.0], vec![Label::Pos, Label::Pos], None).unwrap();
        assert!(matches!(
            fit_class_geometry(&d, 1e-6),
            Err(Error::ClassTooSmall { label: -1, .. })
        ));
        let ok = ds(&[[0.0, 0.0]], &[[1.0, 1.0]]);
        assert!(fit_class_geometry(&ok, 0.0).is_err());
    }

    #[test]
    fn membership_examples() {
        let g = ClassGeometry::<f64> {
            mean_pos: vec![1.0, 0.0],
            mean_neg: vec![0.0, 0.0],
            radius_pos: 1.0,
            radius_neg: 1.0,
            epsilon: 1e-6,
        };
        assert_eq!(membership_value(&[1.0, 0.0], Label::Pos, &g), 1.0);
        let v = membership_value(&[1.5, 0.0], Label::Pos, &g);
        assert!((v - (1.0 - 0.5 / (1.0 + 1e-6))).abs() < 1e-15);
        assert!((v - 0.5000005).abs() < 1e-9);
        // At the class radius the raw value is epsilon / (r + epsilon) ~ 1e-6.
        let edge = membership_value(&[2.0, 0.0], Label::Pos, &g);
        assert!(edge > 0.0 && edge <= 1.0000001e-6);
        // Far outside: clamped to the epsilon floor.
        assert_eq!(membership_value(&[10.0, 0.0], Label::Pos, &g), 1e-6);
    }
}
