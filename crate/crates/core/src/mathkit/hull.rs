//! Bounded intersection of halfspaces `{x : x·ρ <= h}` as a triangulated,
//! watertight polytope.
//!
//! Vertices come from all plane triples whose intersection point is feasible;
//! each supporting plane then contributes a convex polygon, ordered by angle
//! and fan-triangulated with outward orientation.

use super::vec3::{add, cross, dot, norm, normalize, scale, sub, V3};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HullError {
    #[error("need at least 4 planes, got {0}")]
    TooFewPlanes(usize),
    #[error("directions do not positively span R^3; intersection is unbounded")]
    Unbounded,
    #[error("halfspace intersection is empty or degenerate")]
    Infeasible,
    #[error("plane normal has zero length")]
    ZeroNormal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HullMesh {
    pub vertices: Vec<V3>,
    pub faces: Vec<[usize; 3]>,
    pub source_directions: Vec<(V3, f64)>,
}

const FEAS_TOL: f64 = 1e-9;

pub fn halfspace_hull(planes: &[(V3, f64)]) -> Result<HullMesh, HullError> {
    if planes.len() < 4 {
        return Err(HullError::TooFewPlanes(planes.len()));
    }
    let mut ps: Vec<(V3, f64)> = Vec::with_capacity(planes.len());
    for &(r, h) in planes {
        let n = norm(r);
        if !(n > 1e-12) {
            return Err(HullError::ZeroNormal);
        }
        ps.push((scale(1.0 / n, r), h / n));
    }
    if !positively_spanning(&ps) {
        return Err(HullError::Unbounded);
    }
    let hscale = ps.iter().map(|p| p.1.abs()).fold(1.0f64, f64::max);
    let tol = FEAS_TOL * hscale;
    let merge = 1e-9 * hscale;
    let n = ps.len();
    let mut verts: Vec<V3> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let cij = cross(ps[i].0, ps[j].0);
            if norm(cij) < 1e-12 {
                continue;
            }
            for k in j + 1..n {
                let det = dot(cij, ps[k].0);
                if det.abs() < 1e-12 {
                    continue;
                }
                // Cramer: x = (h_i (n_j×n_k) + h_j (n_k×n_i) + h_k (n_i×n_j)) / det
                let x = scale(
                    1.0 / det,
                    add(
                        add(
                            scale(ps[i].1, cross(ps[j].0, ps[k].0)),
                            scale(ps[j].1, cross(ps[k].0, ps[i].0)),
                        ),
                        scale(ps[k].1, cij),
                    ),
                );
                if ps.iter().all(|(r, h)| dot(x, *r) - h <= tol)
                    && !verts.iter().any(|v| norm(sub(*v, x)) <= merge)
                {
                    verts.push(x);
                }
            }
        }
    }
    if verts.len() < 4 {
        return Err(HullError::Infeasible);
    }
    let mut faces = Vec::new();
    let mut used_planes: Vec<V3> = Vec::new();
    for &(r, h) in &ps {
        // coincident planes would emit the same polygon twice
        if used_planes.iter().any(|u| norm(sub(*u, r)) < 1e-12) {
            continue;
        }
        let on: Vec<usize> = (0..verts.len())
            .filter(|&i| (dot(verts[i], r) - h).abs() <= tol.max(merge) * 10.0)
            .collect();
        if on.len() < 3 {
            continue;
        }
        used_planes.push(r);
        let c = scale(
            1.0 / on.len() as f64,
            on.iter().fold([0.0; 3], |a, &i| add(a, verts[i])),
        );
        let e1 = {
            let mut best = [0.0; 3];
            for &i in &on {
                let d = sub(verts[i], c);
                if norm(d) > norm(best) {
                    best = d;
                }
            }
            normalize(sub(best, scale(dot(best, r), r)))
        };
        let e2 = cross(r, e1);
        let mut ang: Vec<(f64, usize)> = on
            .iter()
            .map(|&i| {
                let d = sub(verts[i], c);
                (dot(d, e2).atan2(dot(d, e1)), i)
            })
            .collect();
        ang.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        // angle increases counter-clockwise about r, so fans are outward
        for t in 1..ang.len() - 1 {
            faces.push([ang[0].1, ang[t].1, ang[t + 1].1]);
        }
    }
    let mesh = HullMesh {
        vertices: verts,
        faces,
        source_directions: planes.to_vec(),
    };
    if mesh.volume() <= 1e-14 * hscale.powi(3) {
        return Err(HullError::Infeasible);
    }
    Ok(mesh)
}

/// True when no nonzero `w` has `w·ρ_i <= 0` for every plane.
fn positively_spanning(ps: &[(V3, f64)]) -> bool {
    let mut cands: Vec<V3> = Vec::new();
    for i in 0..ps.len() {
        for j in i + 1..ps.len() {
            let c = cross(ps[i].0, ps[j].0);
            if norm(c) > 1e-12 {
                let c = normalize(c);
                cands.push(c);
                cands.push(scale(-1.0, c));
            }
        }
    }
    if cands.is_empty() {
        // all normals collinear
        return false;
    }
    for i in 0..ps.len() {
        cands.push(scale(-1.0, ps[i].0));
    }
    !cands
        .iter()
        .any(|w| ps.iter().all(|(r, _)| dot(*w, *r) <= 1e-12))
}

impl HullMesh {
    fn interior_point(&self) -> V3 {
        let n = self.vertices.len() as f64;
        scale(1.0 / n, self.vertices.iter().fold([0.0; 3], |a, v| add(a, *v)))
    }

    pub fn volume(&self) -> f64 {
        let o = self.interior_point();
        self.faces
            .iter()
            .map(|f| tet_volume(o, self.vertices[f[0]], self.vertices[f[1]], self.vertices[f[2]]))
            .sum()
    }

    /// Centroid of the solid polytope.
    pub fn centroid(&self) -> V3 {
        let o = self.interior_point();
        let mut acc = [0.0; 3];
        let mut vol = 0.0;
        for f in &self.faces {
            let (a, b, c) = (self.vertices[f[0]], self.vertices[f[1]], self.vertices[f[2]]);
            let v = tet_volume(o, a, b, c);
            let g = scale(0.25, add(add(o, a), add(b, c)));
            acc = add(acc, scale(v, g));
            vol += v;
        }
        scale(1.0 / vol, acc)
    }

    /// Support function of the mesh, `max_v v·ρ`.
    pub fn support(&self, rho: V3) -> f64 {
        self.vertices
            .iter()
            .map(|v| dot(*v, rho))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Every undirected edge is shared by exactly two faces with opposite
    /// orientation.
    pub fn is_watertight(&self) -> bool {
        use std::collections::HashMap;
        let mut edges: HashMap<(usize, usize), i32> = HashMap::new();
        for f in &self.faces {
            for e in 0..3 {
                let (a, b) = (f[e], f[(e + 1) % 3]);
                *edges.entry((a, b)).or_insert(0) += 1;
            }
        }
        edges.iter().all(|(&(a, b), &c)| c == 1 && edges.get(&(b, a)) == Some(&1))
    }
}

fn tet_volume(o: V3, a: V3, b: V3, c: V3) -> f64 {
    dot(sub(a, o), cross(sub(b, o), sub(c, o))) / 6.0
}
