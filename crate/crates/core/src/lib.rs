//! Certified lower bounds for the squeezing function of convex domains in ℂⁿ.
//!
//! A bound at a point q is produced by an explicit injective holomorphic map
//! F: Ω → 𝔹ⁿ with F(q) = 0; the bound is the radius of the largest ball about
//! the origin contained in F(Ω). Two constructions are provided: a frame-based
//! one valid for arbitrary bounded convex domains, and a boundary-adapted one
//! for strongly convex smooth domains.

pub mod error;
pub mod point;
pub mod sampling;
pub mod linalg;
pub mod domain;
pub mod frame;
pub mod maps;
pub mod image;
pub mod certificate;
pub mod convex;
pub mod strict;
pub mod aux;
pub mod cli;

pub use error::{Result, SqueezeError};
pub use point::{CMatrix, CPoint};
pub use domain::{ConvexDomainSpec, HermitianForm, RealHyperplane, Shape, Support};
