//! Decides whether a multipartite quantum state is detectably
//! k-nonseparable, and plans the local measurements that certify it.

pub mod criteria;
pub mod error;
pub mod io;
pub mod linalg;
pub mod measurement;
pub mod probes;
pub mod rng;
pub mod scan;
pub mod selfcheck;
pub mod states;
pub mod tensor;

pub mod cli;

pub use error::{Error, Result};
