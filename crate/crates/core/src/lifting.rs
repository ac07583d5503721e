//! Periodic Maxwell liftings and the stresses they induce.
//!
//! A lifting assigns to every face orbit `F` an affine height
//! `H(q) = ν_F·q + C_F` on its representative copy. Periodicity fixes the
//! other copies: the copy translated by `λ` has the same `ν_F` and constant
//! `C_F − ν_F·λ`.

use std::collections::VecDeque;
use std::fmt::Write as _;

use nalgebra::{Matrix2, Vector2};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::framework::{add_shift, perp, sub_shift, PeriodicFramework, Shift, TileRange, Vec2};
use crate::rigidity::StressVector;
use crate::topology::{FaceComplex, FaceCopy};

/// Relative tolerance for compatibility of a given lifting.
pub const COMPAT_TOL: f64 = 1e-9;
/// Relative tolerance for face-cycle and periodicity residuals while building a lifting.
pub const CONSTRUCTION_TOL: f64 = 1e-8;
/// Relative dead-band for fold classification.
pub const FOLD_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodicLifting {
    /// `ν_F` per face orbit; these are also the points of the reciprocal diagram.
    pub normals: Vec<Vec2>,
    /// `C_F` per face orbit, on the representative copy.
    pub offsets: Vec<f64>,
    pub base_face: usize,
    pub c0: f64,
}

impl PeriodicLifting {
    /// Constant term on the face copy `(F, a)`.
    pub fn copy_offset(&self, fw: &PeriodicFramework, (f, a): FaceCopy) -> f64 {
        self.offsets[f] - self.normals[f].dot(&fw.lattice().period(a))
    }

    pub fn height_on(&self, fw: &PeriodicFramework, face: FaceCopy, q: Vec2) -> f64 {
        self.normals[face.0].dot(&q) + self.copy_offset(fw, face)
    }

    /// Height of each vertex orbit, read from the first face that contains it.
    pub fn vertex_heights(&self, fw: &PeriodicFramework, fc: &FaceComplex) -> Vec<f64> {
        let mut h = vec![f64::NAN; fw.n()];
        for f in &fc.faces {
            for s in &f.boundary {
                if h[s.vertex].is_nan() {
                    h[s.vertex] = self.height_on(fw, (f.id, [0, 0]), fw.copy_position(s.vertex, s.shift));
                }
            }
        }
        h
    }

    /// Magnitude of heights over the representative faces.
    pub fn height_scale(&self, fw: &PeriodicFramework) -> f64 {
        let nu = self.normals.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let c = self.offsets.iter().map(|c| c.abs()).fold(0.0, f64::max);
        nu * fw.length_scale() + c
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            normals: self.normals.iter().map(|v| v * factor).collect(),
            offsets: self.offsets.iter().map(|c| c * factor).collect(),
            base_face: self.base_face,
            c0: self.c0 * factor,
        }
    }
}

/// Largest height mismatch at the endpoints of shared edges.
pub fn compatibility_residual(fw: &PeriodicFramework, fc: &FaceComplex, lifting: &PeriodicLifting) -> f64 {
    fc.tetrads
        .iter()
        .map(|t| {
            let e = &fw.edges()[t.edge];
            [fw.position(e.tail), fw.copy_position(e.head, e.shift)]
                .iter()
                .map(|&q| (lifting.height_on(fw, t.left, q) - lifting.height_on(fw, t.right, q)).abs())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

/// The stress factor of each tetrad, `s = (ν_left − ν_right)·e^⊥ / |e|²`.
pub fn stress_from_lifting(
    fw: &PeriodicFramework,
    fc: &FaceComplex,
    lifting: &PeriodicLifting,
) -> Result<StressVector> {
    check_shape(fw, fc, lifting)?;
    let residual = compatibility_residual(fw, fc, lifting);
    let tolerance = COMPAT_TOL * lifting.height_scale(fw);
    if residual > tolerance {
        return Err(Error::IncompatibleLifting { residual, tolerance });
    }
    let values = fc
        .tetrads
        .iter()
        .map(|t| {
            let e = fw.edge_vec(t.edge);
            (lifting.normals[t.left.0] - lifting.normals[t.right.0]).dot(&perp(e)) / e.norm_squared()
        })
        .collect();
    StressVector::classify(fw, values)
}

fn check_shape(fw: &PeriodicFramework, fc: &FaceComplex, lifting: &PeriodicLifting) -> Result<()> {
    if fc.m != fw.m() || fc.n != fw.n() {
        return Err(Error::DimensionMismatch { expected: fw.m(), found: fc.m });
    }
    if lifting.normals.len() != fc.n_faces() || lifting.offsets.len() != fc.n_faces() {
        return Err(Error::DimensionMismatch { expected: fc.n_faces(), found: lifting.normals.len() });
    }
    Ok(())
}

/// Residuals recorded while building a lifting.
#[derive(Debug, Clone, Serialize)]
pub struct LiftingResiduals {
    /// Normal mismatch on dual edges closing contractible face cycles.
    pub cycle_normal: f64,
    /// Height mismatch on dual edges closing contractible face cycles.
    pub cycle_offset: f64,
    /// Normal mismatch on dual edges closing cycles that wind around the torus.
    pub periodic_normal: f64,
    /// Least-squares misfit of the base normal against `N_U(λ)`.
    pub periodic_offset: f64,
}

/// Builds the periodic lifting inducing `s`, with `C = c0` on the lowest face id.
pub fn lifting_from_stress(fw: &PeriodicFramework, fc: &FaceComplex, s: &[f64], c0: f64) -> Result<PeriodicLifting> {
    lifting_with_residuals(fw, fc, s, c0).map(|(l, _)| l)
}

pub fn lifting_with_residuals(
    fw: &PeriodicFramework,
    fc: &FaceComplex,
    s: &[f64],
    c0: f64,
) -> Result<(PeriodicLifting, LiftingResiduals)> {
    if s.len() != fw.m() {
        return Err(Error::DimensionMismatch { expected: fw.m(), found: s.len() });
    }
    let nf = fc.n_faces();
    let lattice = fw.lattice();
    let smax = s.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let emax = fw.edge_vectors().iter().map(|e| e.norm()).fold(0.0, f64::max);
    let nu_scale = smax * emax;
    let c_scale = nu_scale * fw.length_scale();

    // Each dual edge, oriented right → left, with the edge copy at shift 0.
    // Crossing it changes ν by s·e^⊥ and C by −s·e^⊥·u, u the tail point.
    struct Step {
        from: FaceCopy,
        to: FaceCopy,
        dnu: Vec2,
        tail: Vec2,
    }
    let steps: Vec<Step> = fc
        .tetrads
        .iter()
        .map(|t| Step {
            from: t.right,
            to: t.left,
            dnu: perp(fw.edge_vec(t.edge)) * s[t.edge],
            tail: fw.position(fw.edges()[t.edge].tail),
        })
        .collect();
    let mut incident = vec![Vec::new(); nf];
    for (k, st) in steps.iter().enumerate() {
        incident[st.from.0].push(k);
        incident[st.to.0].push(k);
    }
    for list in &mut incident {
        list.sort_by_key(|&k| {
            let st = &steps[k];
            (st.from.0.max(st.to.0), k)
        });
    }

    // Breadth-first spanning tree from the base face. For each face orbit:
    // the copy reached (`reach`), ν − ν_0 (`dnu`), and C on that copy (`k`).
    let base = 0;
    let mut reach: Vec<Option<Shift>> = vec![None; nf];
    let mut dnu = vec![Vec2::zeros(); nf];
    let mut kc = vec![0.0; nf];
    let mut tree_edge = vec![false; steps.len()];
    reach[base] = Some([0, 0]);
    kc[base] = c0;
    let mut queue = VecDeque::from([base]);
    while let Some(f) = queue.pop_front() {
        let g = reach[f].expect("queued faces are reached");
        for &k in &incident[f] {
            let st = &steps[k];
            // traverse forwards (right → left) or backwards
            let (here, there, sign) = if st.from.0 == f && reach[st.to.0].is_none() {
                (st.from, st.to, 1.0)
            } else if st.to.0 == f && reach[st.from.0].is_none() {
                (st.to, st.from, -1.0)
            } else {
                continue;
            };
            let tau = sub_shift(g, here.1);
            let u = st.tail + lattice.period(tau);
            let nf_ = there.0;
            reach[nf_] = Some(add_shift(there.1, tau));
            dnu[nf_] = dnu[f] + st.dnu * sign;
            kc[nf_] = kc[f] - sign * st.dnu.dot(&u);
            tree_edge[k] = true;
            queue.push_back(nf_);
        }
    }
    let reach: Vec<Shift> = reach
        .into_iter()
        .map(|r| r.ok_or(Error::Schema("dual graph is disconnected".into())))
        .collect::<Result<_>>()?;

    // Non-tree dual edges close face cycles.
    let mut res = LiftingResiduals { cycle_normal: 0.0, cycle_offset: 0.0, periodic_normal: 0.0, periodic_offset: 0.0 };
    let mut rows: Vec<(Vec2, f64)> = Vec::new();
    for (k, st) in steps.iter().enumerate() {
        if tree_edge[k] {
            continue;
        }
        let (r, l) = (st.from.0, st.to.0);
        let tau = sub_shift(reach[r], st.from.1);
        let u = st.tail + lattice.period(tau);
        let winding = sub_shift(add_shift(st.to.1, tau), reach[l]);
        let nu_res = (dnu[l] - dnu[r] - st.dnu).norm();
        // C on the copy of l reached through this edge must equal
        // kc[l] − ν_l·Λ·winding, with ν_l = ν_0 + dnu[l].
        let period = lattice.period(winding);
        let rhs = kc[l] - dnu[l].dot(&period) - kc[r] + st.dnu.dot(&u);
        if winding == [0, 0] {
            res.cycle_normal = res.cycle_normal.max(nu_res);
            res.cycle_offset = res.cycle_offset.max(rhs.abs());
        } else {
            res.periodic_normal = res.periodic_normal.max(nu_res);
            rows.push((period, rhs));
        }
    }
    let check = |kind: &'static str, residual: f64, scale: f64| {
        let tolerance = CONSTRUCTION_TOL * scale;
        if residual > tolerance {
            Err(Error::NotPeriodicStress { kind, residual, tolerance })
        } else {
            Ok(())
        }
    };
    check("face-cycle normal", res.cycle_normal, nu_scale)?;
    check("face-cycle height", res.cycle_offset, c_scale)?;
    check("periodicity normal", res.periodic_normal, nu_scale)?;

    // ν_0·λ = N(λ) for the winding cycles, solved in least squares.
    let mut ata = Matrix2::zeros();
    let mut atb = Vector2::zeros();
    for (p, b) in &rows {
        ata += p * p.transpose();
        atb += p * *b;
    }
    let nu0 = ata.try_inverse().ok_or(Error::Singular("base normal system"))? * atb;
    res.periodic_offset = rows.iter().map(|(p, b)| (nu0.dot(p) - b).abs()).fold(0.0, f64::max);
    check("periodicity height", res.periodic_offset, c_scale)?;

    let normals: Vec<Vec2> = dnu.iter().map(|d| nu0 + d).collect();
    let offsets = (0..nf).map(|f| kc[f] + normals[f].dot(&lattice.period(reach[f]))).collect();
    Ok((PeriodicLifting { normals, offsets, base_face: base, c0 }, res))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FoldClass {
    Mountain,
    Valley,
    Flat,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EdgeFold {
    pub edge: usize,
    pub stress: f64,
    pub class: FoldClass,
}

/// Negative stress folds as a mountain, positive as a valley.
pub fn classify_folds(s: &[f64]) -> Vec<EdgeFold> {
    let tol = FOLD_TOL * s.iter().map(|x| x.abs()).fold(0.0, f64::max);
    s.iter()
        .enumerate()
        .map(|(edge, &stress)| {
            let class = if stress < -tol {
                FoldClass::Mountain
            } else if stress > tol {
                FoldClass::Valley
            } else {
                FoldClass::Flat
            };
            EdgeFold { edge, stress, class }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TerrainMesh {
    pub vertices: Vec<[f64; 3]>,
    /// Zero-based vertex indices.
    pub triangles: Vec<[usize; 3]>,
}

impl TerrainMesh {
    pub fn to_obj(&self) -> String {
        let mut out = String::new();
        for v in &self.vertices {
            let _ = writeln!(out, "v {} {} {}", v[0], v[1], v[2]);
        }
        for t in &self.triangles {
            let _ = writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
        }
        out
    }
}

/// Lifted surface over a block of tiles: one mesh vertex per vertex copy,
/// each face copy whose corners are all present fanned from its first corner.
pub fn export_terrain(
    fw: &PeriodicFramework,
    fc: &FaceComplex,
    lifting: &PeriodicLifting,
    tiles: &TileRange,
) -> Result<TerrainMesh> {
    check_shape(fw, fc, lifting)?;
    let patch = fw.realize_patch(tiles)?;
    let heights = lifting.vertex_heights(fw, fc);
    let index: std::collections::HashMap<(usize, Shift), usize> =
        patch.vertices.iter().enumerate().map(|(k, v)| ((v.orbit, v.shift), k)).collect();
    let vertices = patch.vertices.iter().map(|v| [v.position.x, v.position.y, heights[v.orbit]]).collect();

    // face copies touching the tile box
    let reach = fc
        .faces
        .iter()
        .flat_map(|f| f.boundary.iter().map(|s| s.shift[0].abs().max(s.shift[1].abs())))
        .max()
        .unwrap_or(0);
    let expanded = TileRange::new(
        [tiles.lo[0] - reach, tiles.lo[1] - reach],
        [tiles.hi[0] + reach, tiles.hi[1] + reach],
    );
    let mut triangles = Vec::new();
    for f in &fc.faces {
        for a in expanded.shifts() {
            let ids: Option<Vec<usize>> = f
                .boundary
                .iter()
                .map(|s| index.get(&(s.vertex, add_shift(s.shift, a))).copied())
                .collect();
            if let Some(ids) = ids {
                for k in 1..ids.len() - 1 {
                    triangles.push([ids[0], ids[k], ids[k + 1]]);
                }
            }
        }
    }
    Ok(TerrainMesh { vertices, triangles })
}
