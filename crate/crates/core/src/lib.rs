//! Numerics for an attached transonic shock in front of a three-dimensional wedge.
//!
//! The crate is `no_std` (with `alloc`) when built without the default `std`
//! feature. Enable `parallel` to spread independent mode problems over rayon;
//! every reduction runs in a fixed order, so results do not depend on the
//! number of worker threads.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod bessel;
pub mod homogeneous;
pub mod math;
pub mod nonlinear;
pub mod norms;
pub mod par;
pub mod quad;
pub mod shockstate;
pub mod spectral;
