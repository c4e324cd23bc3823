//! Scalar abstraction for coordinate arithmetic.
//!
//! The geometric substrate and the oracles are generic over the scalar so the
//! same code paths can be exercised at `f32` and `f64`. The dynamic engines
//! are instantiated at [`Real`].

use num_traits::{Float, FromPrimitive, ToPrimitive};
use std::fmt::{Debug, Display};
use std::iter::Sum;

/// Floating-point scalar usable as a coordinate type.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Absolute tolerance for geometric comparisons.
    fn geom_tol() -> Self;
}

impl Scalar for f64 {
    fn geom_tol() -> Self {
        1e-9
    }
}

impl Scalar for f32 {
    fn geom_tol() -> Self {
        1e-4
    }
}

/// Coordinate type used by the dynamic engines.
pub type Real = f64;
