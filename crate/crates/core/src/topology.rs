//! Faces of a non-crossing periodic framework on the torus.
//!
//! Half-edge `2β` runs along edge orbit `β` from `(tail, 0)` to
//! `(head, c_β)`; half-edge `2β + 1` is its twin, from `(head, 0)` to
//! `(tail, −c_β)`. Faces are traced on the quotient with the face on the
//! left of each half-edge, tracking the lattice shift of every boundary
//! vertex copy.

use std::collections::HashSet;
use std::f64::consts::{PI, TAU};

use serde::Serialize;

use crate::error::{CrossingPair, Error, Result};
use crate::framework::{add_shift, cross, sub_shift, EdgeOrbit, PeriodicFramework, Shift, Vec2};

/// Angles within this distance of π are flat and indeterminate.
pub const ANGLE_TOL: f64 = 1e-9;

/// Tolerance for the interior angle sum of a face.
pub const ANGLE_SUM_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    Forward,
    Backward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct HalfEdge {
    pub orbit: usize,
    pub direction: Direction,
    pub tail: usize,
    pub head: usize,
    /// Shift of the head copy when the tail copy sits at shift 0.
    pub head_shift: Shift,
}

impl HalfEdge {
    pub fn index(&self) -> usize {
        2 * self.orbit + matches!(self.direction, Direction::Backward) as usize
    }
}

pub fn twin(h: usize) -> usize {
    h ^ 1
}

pub fn half_edge(fw: &PeriodicFramework, h: usize) -> HalfEdge {
    let e = &fw.edges()[h / 2];
    if h % 2 == 0 {
        HalfEdge { orbit: e.id, direction: Direction::Forward, tail: e.tail, head: e.head, head_shift: e.shift }
    } else {
        HalfEdge {
            orbit: e.id,
            direction: Direction::Backward,
            tail: e.head,
            head: e.tail,
            head_shift: [-e.shift[0], -e.shift[1]],
        }
    }
}

pub fn half_edge_vector(fw: &PeriodicFramework, h: usize) -> Vec2 {
    let v = fw.edge_vec(h / 2);
    if h % 2 == 0 {
        v
    } else {
        -v
    }
}

fn angle_of(v: Vec2) -> f64 {
    let a = v.y.atan2(v.x);
    if a < 0.0 {
        a + TAU
    } else {
        a
    }
}

/// Outgoing half-edges around each vertex orbit, sorted counter-clockwise.
#[derive(Debug, Clone)]
pub struct RotationSystem {
    pub around: Vec<Vec<usize>>,
    position: Vec<usize>,
}

impl RotationSystem {
    pub fn new(fw: &PeriodicFramework) -> Result<Self> {
        let mut around = vec![Vec::new(); fw.n()];
        for h in 0..2 * fw.m() {
            around[half_edge(fw, h).tail].push(h);
        }
        let mut position = vec![0; 2 * fw.m()];
        for (v, list) in around.iter_mut().enumerate() {
            list.sort_by(|&a, &b| {
                angle_of(half_edge_vector(fw, a)).total_cmp(&angle_of(half_edge_vector(fw, b)))
            });
            for k in 0..list.len() {
                let (a, b) = (list[k], list[(k + 1) % list.len()]);
                if a == b {
                    continue;
                }
                let (u, w) = (half_edge_vector(fw, a), half_edge_vector(fw, b));
                if cross(u, w).abs() <= 1e-12 * u.norm() * w.norm() && u.dot(&w) > 0.0 {
                    return Err(Error::DegeneratePlacement { vertex: v, first: a, second: b });
                }
            }
            for (k, &h) in list.iter().enumerate() {
                position[h] = k;
            }
        }
        Ok(Self { around, position })
    }

    /// The half-edge following `h` on the boundary of the face left of `h`:
    /// the clockwise neighbour of `twin(h)` around the head of `h`.
    pub fn next(&self, fw: &PeriodicFramework, h: usize) -> usize {
        let t = twin(h);
        let list = &self.around[half_edge(fw, t).tail];
        let k = self.position[t];
        list[(k + list.len() - 1) % list.len()]
    }
}

/// Largest counter-clockwise gap between consecutive incident edge
/// directions at vertex orbit `v` (2π for a vertex of degree one).
pub fn max_angular_gap(fw: &PeriodicFramework, v: usize) -> f64 {
    let mut angles: Vec<f64> = (0..2 * fw.m())
        .filter(|&h| half_edge(fw, h).tail == v)
        .map(|h| angle_of(half_edge_vector(fw, h)))
        .collect();
    if angles.is_empty() {
        return TAU;
    }
    angles.sort_by(f64::total_cmp);
    let mut gap = angles[0] + TAU - angles[angles.len() - 1];
    for w in angles.windows(2) {
        gap = gap.max(w[1] - w[0]);
    }
    gap
}

/// Interior angle at the head of `incoming`, between `twin(incoming)` and
/// `outgoing`, measured clockwise from the reversed incoming direction
/// (i.e. inside the face on the left).
fn interior_angle(fw: &PeriodicFramework, incoming: usize, outgoing: usize) -> f64 {
    let back = angle_of(-half_edge_vector(fw, incoming));
    let out = angle_of(half_edge_vector(fw, outgoing));
    let a = (back - out).rem_euclid(TAU);
    if a == 0.0 {
        TAU
    } else {
        a
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BoundaryStep {
    pub half_edge: usize,
    /// Vertex orbit at the tail of the half-edge (the corner vertex).
    pub vertex: usize,
    /// Shift of that vertex copy in the face representative.
    pub shift: Shift,
}

#[derive(Debug, Clone, Serialize)]
pub struct FaceOrbit {
    pub id: usize,
    pub boundary: Vec<BoundaryStep>,
    /// Interior angle at the tail vertex of each boundary step.
    pub corner_angles: Vec<f64>,
}

impl FaceOrbit {
    pub fn len(&self) -> usize {
        self.boundary.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boundary.is_empty()
    }

    /// Boundary vertex positions of the face copy translated by `offset`.
    pub fn polygon(&self, fw: &PeriodicFramework, offset: Shift) -> Vec<Vec2> {
        self.boundary
            .iter()
            .map(|s| fw.copy_position(s.vertex, add_shift(s.shift, offset)))
            .collect()
    }
}

/// A face copy: orbit id plus lattice offset of its representative.
pub type FaceCopy = (usize, Shift);

/// Oriented edge with its two faces: the edge copy runs from `(tail, 0)`
/// to `(head, c_β)`, `right` is traversed clockwise by it and `left`
/// counter-clockwise; the dual edge goes right → left.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Tetrad {
    pub edge: usize,
    pub right: FaceCopy,
    pub left: FaceCopy,
}

#[derive(Debug, Clone, Serialize)]
pub struct FaceComplex {
    pub faces: Vec<FaceOrbit>,
    pub tetrads: Vec<Tetrad>,
    /// For each half-edge, the face copy on its left when its tail sits at shift 0.
    pub half_edge_face: Vec<FaceCopy>,
    pub n: usize,
    pub m: usize,
}

impl FaceComplex {
    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn euler(&self) -> i64 {
        self.n as i64 - self.m as i64 + self.faces.len() as i64
    }

    /// Dual adjacency: for each face orbit, `(neighbour, offset, edge)` with the
    /// neighbour copy offset relative to the face representative.
    pub fn dual_adjacency(&self) -> Vec<Vec<(usize, Shift, usize)>> {
        let mut adj = vec![Vec::new(); self.faces.len()];
        for t in &self.tetrads {
            let (r, ro) = t.right;
            let (l, lo) = t.left;
            adj[r].push((l, sub_shift(lo, ro), t.edge));
            adj[l].push((r, sub_shift(ro, lo), t.edge));
        }
        adj
    }

    /// Corner angles of every face recomputed for a placement of the same graph.
    pub fn corner_angles_for(&self, fw: &PeriodicFramework) -> Vec<Vec<f64>> {
        self.faces
            .iter()
            .map(|f| {
                let k = f.boundary.len();
                (0..k)
                    .map(|i| interior_angle(fw, f.boundary[(i + k - 1) % k].half_edge, f.boundary[i].half_edge))
                    .collect()
            })
            .collect()
    }
}

pub fn trace_faces(fw: &PeriodicFramework) -> Result<FaceComplex> {
    let rot = RotationSystem::new(fw)?;
    let nh = 2 * fw.m();
    let mut half_edge_face: Vec<Option<FaceCopy>> = vec![None; nh];
    let mut faces = Vec::new();
    for start in 0..nh {
        if half_edge_face[start].is_some() {
            continue;
        }
        let id = faces.len();
        let mut boundary = Vec::new();
        let mut seen: HashSet<(usize, Shift)> = HashSet::new();
        let (mut h, mut shift) = (start, [0, 0]);
        loop {
            let he = half_edge(fw, h);
            if !seen.insert((he.tail, shift)) {
                return Err(Error::NonSimpleFace { face: id, vertex: he.tail, shift });
            }
            boundary.push(BoundaryStep { half_edge: h, vertex: he.tail, shift });
            shift = add_shift(shift, he.head_shift);
            h = rot.next(fw, h);
            if h == start {
                break;
            }
            if boundary.len() > nh {
                // a half-edge orbit reached twice without closing
                return Err(Error::NonContractibleFace { half_edge: start, shift });
            }
        }
        if shift != [0, 0] {
            return Err(Error::NonContractibleFace { half_edge: start, shift });
        }
        for s in &boundary {
            half_edge_face[s.half_edge] = Some((id, [-s.shift[0], -s.shift[1]]));
        }
        let k = boundary.len();
        let corner_angles: Vec<f64> = (0..k)
            .map(|i| interior_angle(fw, boundary[(i + k - 1) % k].half_edge, boundary[i].half_edge))
            .collect();
        let sum: f64 = corner_angles.iter().sum();
        let expected = (k as f64 - 2.0) * PI;
        if (sum - expected).abs() > ANGLE_SUM_TOL {
            return Err(Error::FaceAngleSum { face: id, sum, expected });
        }
        faces.push(FaceOrbit { id, boundary, corner_angles });
    }
    let half_edge_face: Vec<FaceCopy> = half_edge_face.into_iter().map(|f| f.expect("all traced")).collect();
    let tetrads = fw
        .edges()
        .iter()
        .map(|e| {
            let left = half_edge_face[2 * e.id];
            let (rf, ro) = half_edge_face[2 * e.id + 1];
            Tetrad { edge: e.id, left, right: (rf, add_shift(ro, e.shift)) }
        })
        .collect();
    let fc = FaceComplex { faces, tetrads, half_edge_face, n: fw.n(), m: fw.m() };
    if fc.euler() != 0 {
        return Err(Error::EulerViolation { value: fc.euler() });
    }
    Ok(fc)
}

#[derive(Debug, Clone, Serialize)]
pub struct CornerReport {
    /// Interior angles below π − tol, per face.
    pub corners: Vec<usize>,
    /// `(face, boundary index)` of angles within tol of π.
    pub flat: Vec<(usize, usize)>,
    pub degree_sum: usize,
    /// `Σ d_v = 2m`
    pub degree_sum_ok: bool,
    /// `2m = n + 3n*`, evaluated only when every face has exactly three corners.
    pub pseudo_triangle_relation: Option<bool>,
}

pub fn corner_count(fw: &PeriodicFramework, fc: &FaceComplex) -> CornerReport {
    corner_count_angles(fw, fc, &fc.faces.iter().map(|f| f.corner_angles.clone()).collect::<Vec<_>>())
}

pub(crate) fn corner_count_angles(fw: &PeriodicFramework, fc: &FaceComplex, angles: &[Vec<f64>]) -> CornerReport {
    let mut flat = Vec::new();
    let corners = angles
        .iter()
        .enumerate()
        .map(|(f, a)| {
            a.iter()
                .enumerate()
                .filter(|&(k, &x)| {
                    if (x - PI).abs() <= ANGLE_TOL {
                        flat.push((f, k));
                    }
                    x < PI - ANGLE_TOL
                })
                .count()
        })
        .collect::<Vec<_>>();
    let degree_sum: usize = fw.degrees().iter().sum();
    let pseudo_triangle_relation = corners
        .iter()
        .all(|&c| c == 3)
        .then(|| 2 * fw.m() == fw.n() + 3 * fc.n_faces());
    CornerReport { corners, flat, degree_sum, degree_sum_ok: degree_sum == 2 * fw.m(), pseudo_triangle_relation }
}

#[derive(Debug, Clone, Serialize)]
pub struct CrossingReport {
    pub noncrossing: bool,
    pub pairs: Vec<CrossingPair>,
    /// Half-width of the shift box that was searched.
    pub radius: i64,
}

fn orient(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    cross(b - a, c - a)
}

fn on_segment(a: Vec2, b: Vec2, p: Vec2, eps: f64) -> bool {
    orient(a, b, p).abs() <= eps
        && p.x >= a.x.min(b.x) - eps.sqrt()
        && p.x <= a.x.max(b.x) + eps.sqrt()
        && p.y >= a.y.min(b.y) - eps.sqrt()
        && p.y <= a.y.max(b.y) + eps.sqrt()
}

fn closed_segments_meet(p1: Vec2, p2: Vec2, q1: Vec2, q2: Vec2, eps: f64) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    let strict = |a: f64, b: f64| (a > eps && b < -eps) || (a < -eps && b > eps);
    if strict(d1, d2) && strict(d3, d4) {
        return true;
    }
    on_segment(q1, q2, p1, eps) || on_segment(q1, q2, p2, eps) || on_segment(p1, p2, q1, eps) || on_segment(p1, p2, q2, eps)
}

struct SegmentContext {
    vecs: Vec<Vec2>,
    mids: Vec<Vec2>,
    eps: f64,
    stretch: f64,
}

impl SegmentContext {
    fn new(fw: &PeriodicFramework) -> Self {
        let vecs = fw.edge_vectors();
        let mids = fw.edges().iter().map(|e| fw.position(e.tail) + vecs[e.id] * 0.5).collect();
        let scale = fw.length_scale();
        Self { vecs, mids, eps: 1e-12 * scale * scale, stretch: fw.lattice().min_stretch() }
    }

    /// Improper meetings between orbit `a` at shift 0 and copies of orbit `b`;
    /// returns the searched radius.
    fn pair(&self, fw: &PeriodicFramework, a: &EdgeOrbit, b: &EdgeOrbit, out: &mut Vec<CrossingPair>) -> i64 {
        let (vecs, mids, eps) = (&self.vecs, &self.mids, self.eps);
        let half = 0.5 * (vecs[a.id].norm() + vecs[b.id].norm());
        let reach = (mids[a.id] - mids[b.id]).norm() + half;
        let r = ((reach / self.stretch).ceil() as i64).max(1);
        for sx in -r..=r {
            for sy in -r..=r {
                let s = [sx, sy];
                if a.id == b.id && s <= [0, 0] {
                    continue;
                }
                if (mids[a.id] - mids[b.id] - fw.lattice().period(s)).norm() > half + eps.sqrt() {
                    continue;
                }
                let pa = [(a.tail, [0, 0]), (a.head, a.shift)];
                let pb = [(b.tail, s), (b.head, add_shift(s, b.shift))];
                let pos = |(v, c): (usize, Shift)| fw.copy_position(v, c);
                let shared: Vec<(usize, usize)> =
                    (0..2).flat_map(|i| (0..2).map(move |j| (i, j))).filter(|&(i, j)| pa[i] == pb[j]).collect();
                let bad = match shared.as_slice() {
                    [] => closed_segments_meet(pos(pa[0]), pos(pa[1]), pos(pb[0]), pos(pb[1]), eps),
                    [(i, j)] => {
                        // sharing an endpoint is fine unless the segments overlap
                        let o = pos(pa[*i]);
                        let x = pos(pa[1 - i]) - o;
                        let y = pos(pb[1 - j]) - o;
                        cross(x, y).abs() <= eps && x.dot(&y) > 0.0
                    }
                    _ => true,
                };
                if bad {
                    out.push(CrossingPair { first: a.id, second: b.id, shift: s });
                }
            }
        }
        r
    }
}

/// Tests every pair of edge segments that can come close; the searched shift
/// box grows with edge length so long edges are covered.
pub fn check_noncrossing(fw: &PeriodicFramework) -> CrossingReport {
    let ctx = SegmentContext::new(fw);
    let mut radius = 1;
    let mut pairs = Vec::new();
    for a in fw.edges() {
        for b in fw.edges().iter().filter(|b| b.id >= a.id) {
            radius = radius.max(ctx.pair(fw, a, b, &mut pairs));
        }
    }
    CrossingReport { noncrossing: pairs.is_empty(), pairs, radius }
}

/// Like [`check_noncrossing`], restricted to pairs involving edge orbit `edge`.
pub fn crossings_with(fw: &PeriodicFramework, edge: usize) -> CrossingReport {
    let ctx = SegmentContext::new(fw);
    let a = &fw.edges()[edge];
    let mut radius = 1;
    let mut pairs = Vec::new();
    for b in fw.edges() {
        radius = radius.max(ctx.pair(fw, a, b, &mut pairs));
    }
    CrossingReport { noncrossing: pairs.is_empty(), pairs, radius }
}
