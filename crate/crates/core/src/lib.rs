//! Exact calculus on tensor densities and differential operators over the
//! line and the circle, with a classifier for the algebras of linear maps
//! on operator modules that commute with the action of vector fields.

pub mod algebra;
pub mod classifier;
pub mod density;
pub mod engine;
pub mod error;
pub mod invariant;
pub mod linalg;
pub mod loci;
pub mod rational;
pub mod ring;
pub mod verify;

pub use algebra::{AlgebraKind, FiniteAlgebra};
pub use classifier::{classify, ClassificationReport};
pub use density::{Density, DensityOperator, PolynomialSymbol, VectorField};
pub use error::{Error, Result};
pub use rational::Rat;
pub use ring::{CoefficientFunction, Space};
