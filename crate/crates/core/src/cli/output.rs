//! CSV and OFF serialization plus all-or-nothing file writes.
//!
//! Floats are written with `{:.16e}` (17 significant digits), which round-trips
//! every finite `f64`; a vanishing indicator has `log_abs_I = -inf`.

use crate::indicator::IndicatorSample;
use crate::mathkit::hull::HullMesh;
use crate::recon::SupportEstimate;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use tempfile::NamedTempFile;

pub const SWEEP_HEADER: &str = "rho_x,rho_y,rho_z,tau,t,re_mantissa,im_mantissa,ln_exponent,log_abs_I,tail,trusted";
pub const ESTIMATE_HEADER: &str = "rho_x,rho_y,rho_z,h_hat,ci_lo,ci_hi,residual";

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Rows must already be in (direction, t, tau) order.
pub fn sweep_csv(rows: &[IndicatorSample]) -> String {
    let mut s = String::with_capacity(200 * (rows.len() + 1));
    s.push_str(SWEEP_HEADER);
    s.push('\n');
    for r in rows {
        let v = &r.value;
        let fields = [
            num(r.rho[0]),
            num(r.rho[1]),
            num(r.rho[2]),
            num(r.tau),
            num(r.t),
            num(v.mantissa.re),
            num(v.mantissa.im),
            num(v.exponent),
            num(v.ln_abs()),
            num(r.trace_tail),
            r.trusted.to_string(),
        ];
        s.push_str(&fields.join(","));
        s.push('\n');
    }
    s
}

pub fn estimates_csv(est: &[SupportEstimate]) -> String {
    let mut s = String::from(ESTIMATE_HEADER);
    s.push('\n');
    for e in est {
        let fields = [
            num(e.rho[0]),
            num(e.rho[1]),
            num(e.rho[2]),
            num(e.h_hat),
            num(e.fit_slope_ci.0),
            num(e.fit_slope_ci.1),
            num(e.residual),
        ];
        s.push_str(&fields.join(","));
        s.push('\n');
    }
    s
}

/// ASCII OFF: magic, `V F 0` counts, vertices, then triangles.
pub fn off(mesh: &HullMesh) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "OFF");
    let _ = writeln!(s, "{} {} 0", mesh.vertices.len(), mesh.faces.len());
    for v in &mesh.vertices {
        let _ = writeln!(s, "{} {} {}", num(v[0]), num(v[1]), num(v[2]));
    }
    for f in &mesh.faces {
        let _ = writeln!(s, "3 {} {} {}", f[0], f[1], f[2]);
    }
    s
}

/// Writes every file or none: contents go to temporaries beside their
/// targets and are renamed only after all temporaries are complete.
pub fn write_all(files: &[(PathBuf, String)]) -> std::io::Result<()> {
    let mut staged = Vec::with_capacity(files.len());
    for (path, body) in files {
        let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
        std::fs::create_dir_all(dir)?;
        let mut tmp = NamedTempFile::new_in(dir)?;
        tmp.write_all(body.as_bytes())?;
        tmp.as_file().sync_all()?;
        #[cfg(unix)]
        {
            use std::os::unix::fs::PermissionsExt;
            tmp.as_file().set_permissions(std::fs::Permissions::from_mode(0o644))?;
        }
        staged.push((tmp, path));
    }
    for (tmp, path) in staged {
        tmp.persist(path).map_err(|e| e.error)?;
    }
    Ok(())
}
