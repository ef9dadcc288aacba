//! Binary cubic forms, cubic fields, and the smoothed counting and
//! L-function statistics built on them.
//!
//! Modules are layered: [`forms`] and [`local`] handle integral and p-adic
//! structure, [`fourier`] the finite Fourier analysis mod p, [`artin`] and
//! [`analytic`] the Artin L-functions of cubic forms, and [`counting`] and
//! [`stats`] the aggregate statistics.

pub mod analytic;
pub mod arith;
pub mod counting;
pub mod artin;
pub mod cli;
pub mod error;
pub mod forms;
pub mod fourier;
pub mod local;
pub mod stats;

pub use error::{Error, Result};
pub use forms::{BinaryCubicForm, Gl2};
