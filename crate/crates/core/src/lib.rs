//! Exact machinery for curves over p-adic fields and their tropical shadows.
//!
//! The crate is organized around three layers:
//!
//! * exact p-adic scalar arithmetic, projective points, Möbius maps and
//!   discs ([`padic`]);
//! * trees and tropical geometry built on top of valuations: dendrograms in
//!   the Bruhat–Tits tree ([`btree`]), tropicalized plane points and plane
//!   tropical curves ([`tropical`]), and curve counting through point
//!   configurations ([`counting`]);
//! * measures and integrals in the tropical limit: four-point string
//!   amplitudes with their region decomposition ([`amplitude`]) and
//!   discrete/cell measures with quadrature ([`clmeasure`]).
//!
//! All algebra is carried out in exact rational arithmetic (`BigRational`);
//! floating point appears only in Monte-Carlo estimates and quadrature,
//! which are seed-deterministic.

pub mod amplitude;
pub mod btree;
pub mod clmeasure;
pub mod counting;
pub mod padic;
pub mod render;
pub mod tropical;

pub use padic::{FieldParams, PadicError};
