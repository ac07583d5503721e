//! Periodic pointed pseudo-triangulations: certification, and rigidifying
//! edge insertions ranked by the one-degree-of-freedom flex.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::deformation::{copy_velocity, flex_tangent, Configuration};
use crate::error::{Error, Result};
use crate::framework::{EdgeOrbit, PeriodicFramework, Shift};
use crate::rigidity::flex_space;
use crate::topology::{check_noncrossing, corner_count, crossings_with, max_angular_gap, trace_faces, ANGLE_TOL};

/// Default lattice-step cutoff when searching for new edge orbits.
pub const DEFAULT_CUTOFF: i64 = 2;
/// Candidates whose length derivative is below this fraction of the largest are dropped.
pub const DERIVATIVE_TOL: f64 = 1e-8;

/// A vertex is pointed when its incident edge directions fit in an open half-plane.
pub fn is_pointed(fw: &PeriodicFramework, v: usize) -> bool {
    max_angular_gap(fw, v) > PI + ANGLE_TOL
}

#[derive(Debug, Clone, Serialize)]
pub struct PptCertificate {
    pub valid: bool,
    pub noncrossing: bool,
    /// Per vertex orbit.
    pub pointed: Vec<bool>,
    /// Per face orbit: exactly three corners.
    pub pseudo_triangular: Vec<bool>,
    pub corners: Vec<usize>,
    /// `(n, m, n*)`
    pub counts: (usize, usize, usize),
    pub stress_free: bool,
    pub sigma: i64,
    pub flex_dim: i64,
    /// One line per failed clause.
    pub failures: Vec<String>,
}

pub type PPTCertificate = PptCertificate;

pub fn certify_ppt(fw: &PeriodicFramework) -> Result<PptCertificate> {
    let crossing = check_noncrossing(fw);
    // a crossing placement has no face structure to speak of
    let traced = match trace_faces(fw) {
        Ok(fc) => Some(fc),
        Err(_) if !crossing.noncrossing => None,
        Err(e) => return Err(e),
    };
    let corners = traced.as_ref().map(|fc| corner_count(fw, fc).corners).unwrap_or_default();
    let pointed: Vec<bool> = (0..fw.n()).map(|v| is_pointed(fw, v)).collect();
    let pseudo_triangular: Vec<bool> = corners.iter().map(|&c| c == 3).collect();
    let rank = flex_space(fw).report;
    let (n, m, nf) = (fw.n(), fw.m(), traced.as_ref().map_or(0, |fc| fc.n_faces()));

    let mut failures = Vec::new();
    if !crossing.noncrossing {
        failures.push(format!("{} crossing segment pair(s)", crossing.pairs.len()));
    }
    let unpointed: Vec<usize> = (0..n).filter(|&v| !pointed[v]).collect();
    if !unpointed.is_empty() {
        failures.push(format!("vertices not pointed: {unpointed:?}"));
    }
    if traced.is_none() {
        failures.push("faces cannot be traced".to_string());
    }
    let bad_faces: Vec<String> =
        corners.iter().enumerate().filter(|(_, &c)| c != 3).map(|(f, c)| format!("{f} ({c} corners)")).collect();
    if !bad_faces.is_empty() {
        failures.push(format!("faces not pseudo-triangles: {}", bad_faces.join(", ")));
    }
    if m != 2 * n {
        failures.push(format!("m = {m} but 2n = {}", 2 * n));
    }
    if rank.sigma != 0 {
        failures.push(format!("periodic stress space has dimension {}", rank.sigma));
    }
    if rank.phi != 1 {
        failures.push(format!("non-trivial flex dimension is {}", rank.phi));
    }
    Ok(PptCertificate {
        valid: failures.is_empty(),
        noncrossing: crossing.noncrossing,
        pointed,
        pseudo_triangular,
        corners,
        counts: (n, m, nf),
        stress_free: rank.sigma == 0,
        sigma: rank.sigma,
        flex_dim: rank.phi,
        failures,
    })
}

/// A prospective new edge orbit `(tail, 0) — (head, shift)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EdgeCandidate {
    pub tail: usize,
    pub head: usize,
    pub shift: Shift,
    /// Rate of change of its length under the unit flex.
    pub derivative: f64,
}

impl EdgeCandidate {
    pub fn new(tail: usize, head: usize, shift: Shift) -> Self {
        Self { tail, head, shift, derivative: 0.0 }
    }

    pub fn key(&self) -> (usize, usize, Shift) {
        EdgeOrbit::canonical_key(self.tail, self.head, self.shift)
    }
}

/// Adds the full lattice orbit of `cand` to `fw`.
pub fn insert_edge_orbit(fw: &PeriodicFramework, cand: &EdgeCandidate) -> Result<PeriodicFramework> {
    let (t, h, s) = cand.key();
    if let Some(existing) = fw.find_edge(t, h, s) {
        return Err(Error::DuplicateOrbit { existing });
    }
    let out = fw.with_edge(cand.tail, cand.head, cand.shift)?;
    let new_id = out.m() - 1;
    // the existing edges are assumed non-crossing among themselves
    let report = crossings_with(&out, new_id);
    if let Some(p) = report.pairs.first() {
        return Err(Error::CrossingInsertion { with: format!("edge orbit {} (copy shift {:?})", p.second, p.shift) });
    }
    Ok(out)
}

/// Length derivative of the pair `(u, 0) — (v, c)` under motion `t` at `cfg`.
pub fn length_derivative(cfg: &Configuration, t: &nalgebra::DVector<f64>, u: usize, v: usize, c: Shift) -> f64 {
    let d = cfg.copy_position(v, c) - cfg.positions[u];
    d.dot(&(copy_velocity(t, v, c) - copy_velocity(t, u, [0, 0]))) / d.norm()
}

/// Insertable vertex pairs of a pseudo-triangulation ranked by how fast the
/// flex changes their distance. Signs are oriented so the first candidate
/// expands.
pub fn find_rigidifying_edges(fw: &PeriodicFramework, cutoff: i64) -> Result<Vec<EdgeCandidate>> {
    let cert = certify_ppt(fw)?;
    if !cert.valid {
        return Err(Error::NotPpt(cert.failures.join("; ")));
    }
    let cfg = Configuration::gauged(fw);
    let t = flex_tangent(&cfg, fw)?;
    let mut cands: Vec<EdgeCandidate> = crate::deformation::vertex_pairs(fw.n(), cutoff)
        .into_iter()
        .filter(|&(u, v, c)| fw.find_edge(u, v, c).is_none())
        .map(|(u, v, c)| EdgeCandidate { tail: u, head: v, shift: c, derivative: length_derivative(&cfg, &t, u, v, c) })
        .collect();
    let scale = cands.iter().map(|c| c.derivative.abs()).fold(0.0, f64::max);
    cands.retain(|c| c.derivative.abs() >= DERIVATIVE_TOL * scale && scale > 0.0);
    let mut cands: Vec<EdgeCandidate> =
        cands.into_par_iter().filter(|c| insert_edge_orbit(fw, c).is_ok()).collect();
    cands.sort_by(|a, b| b.derivative.abs().total_cmp(&a.derivative.abs()).then(a.key().cmp(&b.key())));
    if cands.is_empty() {
        return Err(Error::NoCandidate { cutoff });
    }
    if cands[0].derivative < 0.0 {
        cands.iter_mut().for_each(|c| c.derivative = -c.derivative);
    }
    Ok(cands)
}
