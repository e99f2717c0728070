pub mod estimation;
pub mod geometry;
pub mod harness;
pub mod linalg;
pub mod losses;
pub mod network;
pub mod optimizer;
pub mod rng;
pub(crate) mod serde_mat;
