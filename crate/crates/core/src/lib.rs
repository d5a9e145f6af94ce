//! Open quantum system dynamics under Markovian master equations whose spectral
//! correlation tensor is not diagonal, with the trajectory hierarchy that solves
//! them block by block and the dissipative Jaynes-Cummings model as the main
//! application.

pub mod concurrence;
pub mod eigenops;
pub mod error;
pub mod integrator;
pub mod jc;
pub mod linalg;
pub mod master;
pub mod ops;
pub mod trajectory;
pub mod transcribed;

pub use error::{Error, Result};
pub use linalg::{CMat, CVec};
pub use num_complex::Complex64;
pub use ops::{DensityMatrix, HilbertSpace, KetState, Operator};
