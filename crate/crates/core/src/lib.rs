//! Granular-ball fuzzy support vector machines trained by particle swarm
//! optimization on the dual.
//!
//! The pipeline is: load and normalize a labelled dataset, cover it with
//! granular balls, weight the balls by class-center membership, then maximize
//! the ball dual with a seeded swarm and recover a separating plane.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod data;
pub mod error;
pub mod experiment;
pub mod granular_ball;
pub mod membership;
pub mod pso;
pub mod scalar;
pub mod svm;
pub mod tfn;

pub use data::{Dataset, Label, LabelColumn, NoiseSpec};
pub use error::{Error, Result};
pub use granular_ball::{BallGenConfig, FuzzyBallSet, GranularBall, RadiusMode};
pub use membership::ClassGeometry;
pub use pso::{PsoConfig, PsoResult};
pub use scalar::Scalar;
pub use svm::{BallTrainingSet, DualSolution, ModelConfig, ModelKind, Variant};
pub use tfn::{ConfidenceLevel, TfnBallTrainingSet, TriangularFuzzyNumber};

pub type Dataset64 = Dataset<f64>;
pub type Dataset32 = Dataset<f32>;
pub type GranularBall64 = GranularBall<f64>;
pub type GranularBall32 = GranularBall<f32>;
pub type FuzzyBallSet64 = FuzzyBallSet<f64>;
pub type FuzzyBallSet32 = FuzzyBallSet<f32>;
pub type BallGenConfig64 = BallGenConfig<f64>;
pub type BallGenConfig32 = BallGenConfig<f32>;
pub type ClassGeometry64 = ClassGeometry<f64>;
pub type ClassGeometry32 = ClassGeometry<f32>;
pub type PsoConfig64 = PsoConfig<f64>;
pub type PsoConfig32 = PsoConfig<f32>;
pub type BallTrainingSet64 = BallTrainingSet<f64>;
pub type BallTrainingSet32 = BallTrainingSet<f32>;
pub type DualSolution64 = DualSolution<f64>;
pub type DualSolution32 = DualSolution<f32>;
pub type TfnBallTrainingSet64 = TfnBallTrainingSet<f64>;
pub type TfnBallTrainingSet32 = TfnBallTrainingSet<f32>;
pub type TriangularFuzzyNumber64 = TriangularFuzzyNumber<f64>;
pub type TriangularFuzzyNumber32 = TriangularFuzzyNumber<f32>;
