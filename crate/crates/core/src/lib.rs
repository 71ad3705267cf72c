//! Gradient-descent schemes and their diagnostics: difference-of-convex
//! optimizers, Lotka–Volterra dynamics, and concentration–dispersion flows on
//! a periodic domain, with Łojasiewicz-rate fitting for any trajectory.

pub mod dc;
pub mod lv;
pub mod cd;
pub mod error;
pub mod linalg;
pub mod loja;
pub mod regcd;
pub mod ode;
pub mod spec;
pub mod torus;

pub use error::{Error, Result};
