#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod error;
pub mod linalg;
pub mod manifolds;
pub mod packing;
pub mod specfun;
pub mod volumes;

pub use error::{Error, Result};
pub use manifolds::{Manifold, ManifoldKind, Point};
pub use packing::Code;
pub use volumes::VolumeModel;
