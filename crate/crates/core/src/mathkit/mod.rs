//! Numerical substrate: frames, spherical Bessel functions, sphere quadrature,
//! vector spherical harmonics, extended-exponent arithmetic and the halfspace hull.

pub mod bessel;
pub mod frame;
pub mod hull;
pub mod legendre;
pub mod quadrature;
pub mod scaled;
pub mod vec3;
pub mod vsh;

pub use bessel::{sph_bessel, sph_bessel_seq, BesselError, BesselKind};
pub use frame::{build_frame, Frame, FrameError};
pub use hull::{halfspace_hull, HullError, HullMesh};

pub use quadrature::{gauss_legendre, sphere_quadrature, SphereGrid};
pub use scaled::ScaledComplex;
pub use vsh::{vsh_analyze, vsh_synthesize, VshCoeffs, VshError};
