//! Random walks on free groups and subgroup mixing experiments.

pub mod cantor;
pub mod freegroup;
pub mod harness;
pub mod mixing;
pub mod oracle;
pub mod rng;
pub mod stallings;
pub mod stats;
pub mod transverse;
pub mod walks;
