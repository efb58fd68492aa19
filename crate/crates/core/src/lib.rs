//! Enclosure method for the time-harmonic Maxwell system.
//!
//! Complex geometrical optics (CGO) probes are paired with exact spectral
//! impedance maps of concentric-sphere configurations to evaluate the
//! indicator `I_ρ(τ, t)`. Its exponential behaviour in `τ` locates the support
//! function `h_D(ρ)`, from which the convex hull of the obstacle is assembled.

pub mod cgo;
pub mod cli;
pub mod forward;
pub mod indicator;
pub mod layerpot;
pub mod mathkit;
pub mod recon;
