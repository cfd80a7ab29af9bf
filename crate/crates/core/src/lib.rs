//! Partition categories, intertwiner matrices, matrix-model relation
//! checkers and free moment identities for two-parameter quantum symmetry
//! groups on the index set `J_{p,q}`.

pub mod category;
pub mod cli;
pub mod enumerate;
pub mod identities;
mod error;
pub mod models;
pub mod moments;
pub mod partition;
pub mod tensor_rep;

pub use enumerate::{count, enumerate, product_enumerate, CategoryId};
pub use error::{Error, Result};
pub use partition::{BlockTag, BulletedPartition, Color, Diagram, Kind, Partition, ProductPartition};
