#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod expr;
pub mod finsler;
pub mod identity;
pub mod jet;
pub mod map;
pub mod quadrature;
pub mod riemann;

pub use error::{Error, Result};
pub use expr::{eval_jet, parse, Expr};
pub use finsler::{Chart, FinslerStructure, PointState};
pub use jet::{Composer, Jet, JetSpace};
pub use riemann::RiemannStructure;
pub use map::{MapPoint, PullbackSection, SmoothMap, VariationFamily};
