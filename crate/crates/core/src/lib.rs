//! Assembly sequence and production line planning engine.
//!
//! Pipeline: an assembly description (parts + joints) is loaded and
//! normalized ([`model`]), optional STL meshes yield pairwise spatial
//! relations and degree-of-freedom constraints ([`geometry`]), all feasible
//! assembly sequences are enumerated as a layered weighted digraph
//! ([`digraph`]), optionally shrunk by shortest-path-protected randomized
//! edge removal ([`reduce`]), and finally the joint sequence and station
//! assignment minimizing the blended engineering/time objective is solved
//! exactly ([`balance`]).

pub mod balance;
pub mod digraph;
pub mod error;
pub mod geometry;
pub mod model;
pub mod reduce;

pub use error::{BalanceError, DigraphError, GeometryError, ModelError, ReduceError};
pub use model::{Joint, JointId, Part, PartGraph, PartId};
