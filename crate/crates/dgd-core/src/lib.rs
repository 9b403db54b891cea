//! Delayed gradient descent with mechanically checked convergence bounds.
//!
//! The crate is `no_std` (with `alloc`) so the numerical kernels can run in
//! constrained or embedded harnesses. Everything IO-shaped lives in the
//! companion CLI crate.

#![cfg_attr(not(test), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

pub mod constants;
pub mod descent;
pub mod linalg;
pub mod problems;
pub mod rng;
pub mod verify;
