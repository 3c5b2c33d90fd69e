//! Exact-arithmetic workbench for twisted free-boson and affine sl2 modules
//! on the double cover `t -> t^2` of the projective line.
//!
//! The crate is organized around a small stack of exact structures:
//! rational scalars ([`rat`]), formal Laurent series in `z^(1/N)` with
//! truncation windows ([`series`]), Heisenberg Fock modules and their twisted
//! vertex operators ([`fock`], [`field`]), the group of special coordinate
//! changes and its module actions ([`coords`]), modules along fibers of the
//! cover ([`orbit`]), coinvariants of function algebras on the cover
//! ([`cover`], [`blocks`]), and the level-`k` sl2 analogue ([`affine`]).
//! [`verify`] packages the identity checks behind a reporting interface used
//! by the CLI and the acceptance suite.

pub mod error;
pub mod rat;
pub mod series;

pub mod fock;

pub mod field;

pub mod coords;

pub mod orbit;

pub mod cover;

pub mod blocks;

pub mod affine;

pub mod verify;













pub use error::{Error, Result};
pub use rat::Rat;
