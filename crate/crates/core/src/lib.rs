pub mod cx_linear;
pub mod error;
pub mod geodesic_space;
pub mod harness;
pub mod hrm_kernel;
pub mod rng;
pub mod space_forms;
pub mod symmetric_spaces;
pub mod sl2_lie;

pub use error::{Error, Result};
