//! Secrecy energy efficiency maximization for MISO underlay cognitive radio
//! with an energy-harvesting eavesdropper.

extern crate openblas_src as _;

pub mod baselines;
pub mod channel;
pub mod conic;
pub mod dinkelbach;
pub mod harness;
pub mod model;
pub mod oracle;
pub mod perfect;
pub mod statistical;
pub mod robust;
