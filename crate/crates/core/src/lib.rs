pub mod error;
pub mod gowers_hatami;
pub mod graph_of_groups;
pub mod group_core;
pub mod json;
pub mod linalg;
pub mod schatten;
pub mod stabilizer;
pub mod theta_cone;

pub use error::{Error, Result};
