//! Orthonormal triad completing a direction `rho`.

use super::vec3::{cross, norm, normalize, V3};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FrameError {
    #[error("direction has norm {0:e}, below 1e-12")]
    ZeroVector(f64),
    #[error("direction has norm {0}, expected a unit vector within 1e-12")]
    NotUnit(f64),
}

/// `(rho, rho_perp, rho_cross)` with `rho_cross = rho × rho_perp`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub rho: V3,
    pub rho_perp: V3,
    pub rho_cross: V3,
}

/// Completes `rho` to a right-handed orthonormal frame.
///
/// `rho_perp = normalize(e × rho)` where `e` is the canonical axis with the
/// smallest `|e·rho|`; ties go to the lower axis index.
pub fn build_frame(rho: V3) -> Result<Frame, FrameError> {
    let n = norm(rho);
    if !(n >= 1e-12) {
        return Err(FrameError::ZeroVector(n));
    }
    if (n - 1.0).abs() > 1e-12 {
        return Err(FrameError::NotUnit(n));
    }
    let mut axis = 0;
    for i in 1..3 {
        if rho[i].abs() < rho[axis].abs() {
            axis = i;
        }
    }
    let mut e = [0.0; 3];
    e[axis] = 1.0;
    let rho_perp = normalize(cross(e, rho));
    let rho_cross = cross(rho, rho_perp);
    Ok(Frame {
        rho,
        rho_perp,
        rho_cross,
    })
}

impl Frame {
    /// Convenience: normalizes `v` first, then completes it.
    pub fn from_direction(v: V3) -> Result<Frame, FrameError> {
        let n = norm(v);
        if !(n >= 1e-12) {
            return Err(FrameError::ZeroVector(n));
        }
        build_frame(normalize(v))
    }
}
