//! One-parameter deformations of periodic mechanisms: gauge-fixed flex
//! tangents, predictor–corrector continuation, and the expansive / auxetic
//! certificates evaluated along a path.
//!
//! Motions are vectors of length `2n + 4` laid out like the columns of the
//! rigidity matrix: vertex velocities first, then `λ̇1`, `λ̇2`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Matrix2, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::framework::{LatticeBasis, PeriodicFramework, Shift, Vec2};
use crate::linalg;
use crate::topology::{max_angular_gap, trace_faces, FaceComplex, ANGLE_TOL};

/// Relative Newton tolerance on squared edge lengths.
pub const CORRECTOR_TOL: f64 = 1e-12;
pub const CORRECTOR_MAX_ITER: usize = 20;
pub const MIN_STEP: f64 = 1e-6;
/// Bisection tolerance in the path parameter when locating events.
pub const EVENT_TOL: f64 = 1e-10;
/// Relative tolerance for pair-distance derivatives and Gram eigenvalues.
pub const SIGN_TOL: f64 = 1e-9;

pub type GramMatrix = Matrix2<f64>;

/// Vertex positions and lattice of a placement, with vertex 0 at the origin
/// and `λ1` on the positive x-axis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Configuration {
    pub positions: Vec<Vec2>,
    /// Lattice generators as columns.
    pub lattice: Matrix2<f64>,
}

impl Configuration {
    /// Moves `fw` rigidly into the gauge.
    pub fn gauged(fw: &PeriodicFramework) -> Self {
        let l = *fw.lattice().matrix();
        let angle = l[(1, 0)].atan2(l[(0, 0)]);
        let rot = nalgebra::Rotation2::new(-angle);
        let origin = fw.position(0);
        let positions = fw.positions().iter().map(|p| rot * (p - origin)).collect();
        let mut lattice = rot.matrix() * l;
        lattice[(1, 0)] = 0.0;
        Self { positions, lattice }
    }

    pub fn n(&self) -> usize {
        self.positions.len()
    }

    pub fn to_vector(&self) -> DVector<f64> {
        let n = self.n();
        let mut y = DVector::zeros(2 * n + 4);
        for (i, p) in self.positions.iter().enumerate() {
            y[2 * i] = p.x;
            y[2 * i + 1] = p.y;
        }
        for j in 0..2 {
            y[2 * n + 2 * j] = self.lattice[(0, j)];
            y[2 * n + 2 * j + 1] = self.lattice[(1, j)];
        }
        y
    }

    pub fn from_vector(y: &DVector<f64>) -> Self {
        let n = (y.len() - 4) / 2;
        let positions = (0..n).map(|i| Vec2::new(y[2 * i], y[2 * i + 1])).collect();
        let lattice = Matrix2::new(y[2 * n], y[2 * n + 2], y[2 * n + 1], y[2 * n + 3]);
        Self { positions, lattice }
    }

    pub fn gram(&self) -> GramMatrix {
        self.lattice.transpose() * self.lattice
    }

    pub fn copy_position(&self, i: usize, c: Shift) -> Vec2 {
        self.positions[i] + self.lattice * Vec2::new(c[0] as f64, c[1] as f64)
    }

    /// Rebuilds a validated framework with this placement and `graph`'s edges.
    pub fn framework(&self, graph: &PeriodicFramework) -> Result<PeriodicFramework> {
        graph.with_placement(self.positions.clone(), LatticeBasis::new(self.lattice)?)
    }
}

/// Velocity of the vertex copy `(i, c)` under motion `t`.
pub fn copy_velocity(t: &DVector<f64>, i: usize, c: Shift) -> Vec2 {
    let n = (t.len() - 4) / 2;
    let l1 = Vec2::new(t[2 * n], t[2 * n + 1]);
    let l2 = Vec2::new(t[2 * n + 2], t[2 * n + 3]);
    Vec2::new(t[2 * i], t[2 * i + 1]) + l1 * c[0] as f64 + l2 * c[1] as f64
}

/// Lattice velocity `Λ̇` (columns `λ̇1`, `λ̇2`) of a motion.
pub fn lattice_velocity(t: &DVector<f64>) -> Matrix2<f64> {
    let n = (t.len() - 4) / 2;
    Matrix2::new(t[2 * n], t[2 * n + 2], t[2 * n + 1], t[2 * n + 3])
}

/// Columns left free by the gauge: everything except `x0`, `y0` and `λ1.y`.
fn free_columns(n: usize) -> Vec<usize> {
    (2..2 * n + 4).filter(|&k| k != 2 * n + 1).collect()
}

fn embed(n: usize, reduced: &DVector<f64>) -> DVector<f64> {
    let mut full = DVector::zeros(2 * n + 4);
    for (k, col) in free_columns(n).into_iter().enumerate() {
        full[col] = reduced[k];
    }
    full
}

fn restrict(n: usize, full: &DVector<f64>) -> DVector<f64> {
    DVector::from_iterator(2 * n + 1, free_columns(n).into_iter().map(|c| full[c]))
}

/// Squared edge lengths minus `targets`, and the Jacobian (twice the rigidity matrix).
fn constraints(graph: &PeriodicFramework, y: &DVector<f64>, targets: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
    let cfg = Configuration::from_vector(y);
    let n = cfg.n();
    let m = graph.m();
    let mut g = DVector::zeros(m);
    let mut jac = DMatrix::zeros(m, 2 * n + 4);
    for (b, e) in graph.edges().iter().enumerate() {
        let d = cfg.copy_position(e.head, e.shift) - cfg.positions[e.tail];
        g[b] = d.norm_squared() - targets[b];
        for k in 0..2 {
            jac[(b, 2 * e.tail + k)] -= 2.0 * d[k];
            jac[(b, 2 * e.head + k)] += 2.0 * d[k];
            jac[(b, 2 * n + k)] += 2.0 * e.shift[0] as f64 * d[k];
            jac[(b, 2 * n + 2 + k)] += 2.0 * e.shift[1] as f64 * d[k];
        }
    }
    (g, jac)
}

fn squared_lengths(graph: &PeriodicFramework, cfg: &Configuration) -> Vec<f64> {
    graph
        .edges()
        .iter()
        .map(|e| (cfg.copy_position(e.head, e.shift) - cfg.positions[e.tail]).norm_squared())
        .collect()
}

/// Basis of the gauge-reduced flex space at `cfg`, as full-length motions.
pub fn gauged_flex_basis(cfg: &Configuration, graph: &PeriodicFramework) -> Vec<DVector<f64>> {
    let n = cfg.n();
    let (_, jac) = constraints(graph, &cfg.to_vector(), &vec![0.0; graph.m()]);
    let cols = free_columns(n);
    let reduced = DMatrix::from_fn(jac.nrows(), cols.len(), |r, k| jac[(r, cols[k])]);
    linalg::kernel(&reduced).basis.iter().map(|v| embed(n, v)).collect()
}

/// Unit generator of the one-dimensional gauge-reduced flex space.
pub fn flex_tangent(cfg: &Configuration, graph: &PeriodicFramework) -> Result<DVector<f64>> {
    if cfg.n() != graph.n() {
        return Err(Error::DimensionMismatch { expected: graph.n(), found: cfg.n() });
    }
    let basis = gauged_flex_basis(cfg, graph);
    match <[_; 1]>::try_from(basis) {
        Ok([t]) => Ok(t),
        Err(b) => Err(Error::NotOneDimensional { dim: b.len() }),
    }
}

/// Candidate vertex-copy pairs `(u, 0), (v, c)` with `u ≤ v` and `|c|∞ ≤ cutoff`.
pub fn vertex_pairs(n: usize, cutoff: i64) -> Vec<(usize, usize, Shift)> {
    let mut out = Vec::new();
    for u in 0..n {
        for v in u..n {
            for c0 in -cutoff..=cutoff {
                for c1 in -cutoff..=cutoff {
                    let c = [c0, c1];
                    // each unordered pair of copies of one orbit once
                    if u == v && c <= [0, 0] {
                        continue;
                    }
                    out.push((u, v, c));
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct ExpansiveReport {
    pub expansive: bool,
    /// Smallest `d/dt |p_v + Λc − p_u|²` over the pair set.
    pub min_derivative: f64,
    pub min_pair: Option<(usize, usize, Shift)>,
    /// Largest derivative magnitude; the tolerance is relative to it.
    pub scale: f64,
    pub pairs_checked: usize,
    pub cutoff: i64,
}

/// Checks that no vertex-pair distance within `cutoff` lattice steps decreases.
/// This is a finite falsifier: pairs beyond the cutoff are not examined.
pub fn expansive_check(cfg: &Configuration, t: &DVector<f64>, cutoff: i64) -> ExpansiveReport {
    let pairs = vertex_pairs(cfg.n(), cutoff);
    let derivs: Vec<f64> = pairs
        .par_iter()
        .map(|&(u, v, c)| {
            let d = cfg.copy_position(v, c) - cfg.positions[u];
            2.0 * d.dot(&(copy_velocity(t, v, c) - copy_velocity(t, u, [0, 0])))
        })
        .collect();
    let scale = derivs.iter().map(|d| d.abs()).fold(0.0, f64::max);
    let (k, &min) = derivs
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .unwrap_or((0, &0.0));
    ExpansiveReport {
        expansive: min >= -SIGN_TOL * scale,
        min_derivative: min,
        min_pair: pairs.get(k).copied(),
        scale,
        pairs_checked: pairs.len(),
        cutoff,
    }
}

/// Returns `t` or `−t`, whichever has the larger minimum pair derivative.
pub fn orient_expansive(cfg: &Configuration, t: &DVector<f64>, cutoff: i64) -> DVector<f64> {
    let fwd = expansive_check(cfg, t, cutoff).min_derivative;
    let back = expansive_check(cfg, &-t, cutoff).min_derivative;
    if back > fwd {
        -t
    } else {
        t.clone()
    }
}

/// `dω = Λ̇ᵗΛ + ΛᵗΛ̇`, symmetrized.
pub fn gram_derivative(cfg: &Configuration, t: &DVector<f64>) -> GramMatrix {
    let ld = lattice_velocity(t);
    let d = ld.transpose() * cfg.lattice + cfg.lattice.transpose() * ld;
    (d + d.transpose()) * 0.5
}

/// True iff `dω` is positive semidefinite up to `1e-9` of its eigenvalue scale.
pub fn auxetic_tangent_check(domega: &GramMatrix) -> bool {
    let eig = SymmetricEigen::new((domega + domega.transpose()) * 0.5).eigenvalues;
    let scale = eig.iter().map(|x| x.abs()).sum::<f64>();
    eig.iter().all(|&x| x >= -SIGN_TOL * scale)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ContractionReport {
    /// Largest singular value of `T = Λ_τ1 Λ_τ2⁻¹`.
    pub norm: f64,
    pub contraction: bool,
}

pub fn contraction_check(l1: &Matrix2<f64>, l2: &Matrix2<f64>) -> Result<ContractionReport> {
    let inv = l2.try_inverse().ok_or(Error::Singular("later lattice"))?;
    let norm = (l1 * inv).singular_values().max();
    Ok(ContractionReport { norm, contraction: norm <= 1.0 + SIGN_TOL })
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdicts {
    pub expansive: Option<bool>,
    pub auxetic: Option<bool>,
    pub min_pair_derivative: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PathSample {
    pub tau: f64,
    pub config: Configuration,
    pub gram: GramMatrix,
    pub dgram: GramMatrix,
    /// Unit tangent at this sample, oriented along the path.
    #[serde(skip)]
    pub tangent: DVector<f64>,
    pub verdicts: Verdicts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    /// A vertex's largest angular gap reached π.
    PointednessLost,
    /// A face corner angle reached π.
    CornerChange,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum Termination {
    StepsCompleted,
    Event { kind: EventKind, index: usize, tau: f64 },
    CorrectorFailure { tau: f64, last_step: f64 },
}

#[derive(Debug, Clone, Serialize)]
pub struct DeformationPath {
    pub samples: Vec<PathSample>,
    pub termination: Termination,
    /// Events crossed without stopping.
    pub events: Vec<Termination>,
}

impl DeformationPath {
    /// Largest relative drift of squared edge lengths from the first sample.
    pub fn length_drift(&self, graph: &PeriodicFramework) -> f64 {
        let base = squared_lengths(graph, &self.samples[0].config);
        self.samples
            .iter()
            .flat_map(|s| {
                squared_lengths(graph, &s.config)
                    .into_iter()
                    .zip(&base)
                    .map(|(l, b)| ((l.sqrt() - b.sqrt()) / b.sqrt()).abs())
                    .collect::<Vec<_>>()
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone)]
pub struct PathOptions {
    pub steps: usize,
    pub ds: f64,
    pub cutoff: i64,
    pub check_expansive: bool,
    pub check_auxetic: bool,
    pub stop_at_event: bool,
    /// Walk against the expansive orientation.
    pub reverse: bool,
    /// Skip the starting pseudo-triangulation certificate.
    pub allow_non_ppt: bool,
}

impl Default for PathOptions {
    fn default() -> Self {
        Self {
            steps: 100,
            ds: 1e-2,
            cutoff: 2,
            check_expansive: true,
            check_auxetic: true,
            stop_at_event: true,
            reverse: false,
            allow_non_ppt: false,
        }
    }
}

/// Newton-projects the prediction `y0 + h·t` back onto the constraint set,
/// holding `tᵀ(y − y_pred) = 0`.
pub fn corrector_step(
    graph: &PeriodicFramework,
    targets: &[f64],
    y0: &DVector<f64>,
    t: &DVector<f64>,
    h: f64,
) -> Option<DVector<f64>> {
    let n = graph.n();
    let pred = y0 + t * h;
    let tr = restrict(n, t);
    let scale = targets.iter().fold(0.0_f64, |a, &b| a.max(b));
    let mut y = pred.clone();
    for _ in 0..CORRECTOR_MAX_ITER {
        let (g, jac) = constraints(graph, &y, targets);
        let arc = t.dot(&(&y - &pred));
        let res = g.amax().max(arc.abs() * scale.sqrt());
        if res <= CORRECTOR_TOL * scale {
            return Some(y);
        }
        let cols = free_columns(n);
        let m = g.len();
        let mut a = DMatrix::zeros(m + 1, cols.len());
        for (k, &c) in cols.iter().enumerate() {
            a.column_mut(k).rows_mut(0, m).copy_from(&jac.column(c));
            a[(m, k)] = tr[k];
        }
        let mut rhs = DVector::zeros(m + 1);
        rhs.rows_mut(0, m).copy_from(&(-&g));
        rhs[m] = -arc;
        let dx = a.svd(true, true).solve(&rhs, 1e-14).ok()?;
        if !dx.iter().all(|x| x.is_finite()) {
            return None;
        }
        y += embed(n, &dx);
    }
    let (g, _) = constraints(graph, &y, targets);
    (g.amax() <= CORRECTOR_TOL * scale).then_some(y)
}

/// Signed distances from the pseudo-triangulation boundary: per vertex
/// `max gap − π`, per face corner `π − angle`.
fn event_functions(graph: &PeriodicFramework, fc: &FaceComplex, cfg: &Configuration) -> Option<(Vec<f64>, Vec<f64>)> {
    let fw = cfg.framework(graph).ok()?;
    let gaps = (0..fw.n()).map(|v| max_angular_gap(&fw, v) - PI).collect();
    let corners = fc.corner_angles_for(&fw).into_iter().flatten().map(|a| PI - a).collect();
    Some((gaps, corners))
}

fn first_sign_change(before: &(Vec<f64>, Vec<f64>), after: &(Vec<f64>, Vec<f64>)) -> Option<(EventKind, usize)> {
    let flipped = |a: &[f64], b: &[f64]| {
        a.iter().zip(b).position(|(&x, &y)| (x > ANGLE_TOL && y <= ANGLE_TOL) || (x < -ANGLE_TOL && y >= -ANGLE_TOL))
    };
    flipped(&before.0, &after.0)
        .map(|v| (EventKind::PointednessLost, v))
        .or_else(|| flipped(&before.1, &after.1).map(|k| (EventKind::CornerChange, k)))
}

fn sample(cfg: Configuration, tau: f64, tangent: DVector<f64>, opts: &PathOptions) -> PathSample {
    let dgram = gram_derivative(&cfg, &tangent);
    let exp = opts.check_expansive.then(|| expansive_check(&cfg, &tangent, opts.cutoff));
    let verdicts = Verdicts {
        expansive: exp.as_ref().map(|r| r.expansive),
        auxetic: opts.check_auxetic.then(|| auxetic_tangent_check(&dgram)),
        min_pair_derivative: exp.map(|r| r.min_derivative),
    };
    PathSample { tau, gram: cfg.gram(), dgram, tangent, verdicts, config: cfg }
}

/// Continues the one-degree-of-freedom flex of `fw` from its current placement.
pub fn continue_path(fw: &PeriodicFramework, opts: &PathOptions) -> Result<DeformationPath> {
    if !(opts.ds > 0.0 && opts.ds.is_finite()) {
        return Err(Error::InvalidParameter(format!("step size must be positive, got {}", opts.ds)));
    }
    if !opts.allow_non_ppt {
        let cert = crate::ppt::certify_ppt(fw)?;
        if !cert.valid {
            return Err(Error::NotPpt(cert.failures.join("; ")));
        }
    }
    let cfg = Configuration::gauged(fw);
    if opts.steps == 0 {
        let t = DVector::zeros(2 * fw.n() + 4);
        let gram = cfg.gram();
        let none = Verdicts { expansive: None, auxetic: None, min_pair_derivative: None };
        let s = PathSample { tau: 0.0, config: cfg, gram, dgram: GramMatrix::zeros(), tangent: t, verdicts: none };
        return Ok(DeformationPath { samples: vec![s], termination: Termination::StepsCompleted, events: vec![] });
    }
    let fc = trace_faces(fw)?;
    let targets = squared_lengths(fw, &cfg);
    let mut t = orient_expansive(&cfg, &flex_tangent(&cfg, fw)?, opts.cutoff);
    if opts.reverse {
        t = -t;
    }
    let mut samples = vec![sample(cfg, 0.0, t, opts)];
    let mut events = Vec::new();
    let mut ds = opts.ds;
    let mut termination = Termination::StepsCompleted;

    while samples.len() <= opts.steps {
        let last = samples.last().expect("path is never empty");
        let y0 = last.config.to_vector();
        let Some(y1) = corrector_step(fw, &targets, &y0, &last.tangent, ds) else {
            ds *= 0.5;
            if ds < MIN_STEP {
                termination = Termination::CorrectorFailure { tau: last.tau, last_step: ds * 2.0 };
                break;
            }
            continue;
        };
        let cfg1 = Configuration::from_vector(&y1);
        let Ok(t1) = flex_tangent(&cfg1, fw) else {
            termination = Termination::CorrectorFailure { tau: last.tau, last_step: ds };
            break;
        };
        let t1 = if t1.dot(&last.tangent) < 0.0 { -t1 } else { t1 };

        let f0 = event_functions(fw, &fc, &last.config);
        let f1 = event_functions(fw, &fc, &cfg1);
        if let (Some(f0), Some(f1)) = (&f0, &f1) {
            if let Some((kind, index)) = first_sign_change(f0, f1) {
                let (h, cfg_e) = locate_event(fw, &fc, &targets, &y0, &last.tangent, ds, f0, &cfg1);
                let event = Termination::Event { kind, index, tau: last.tau + h };
                if opts.stop_at_event {
                    let te = flex_tangent(&cfg_e, fw).unwrap_or_else(|_| last.tangent.clone());
                    let te = if te.dot(&last.tangent) < 0.0 { -te } else { te };
                    let tau = last.tau + h;
                    samples.push(sample(cfg_e, tau, te, opts));
                    termination = event;
                    break;
                }
                events.push(event);
            }
        }
        let tau = last.tau + ds;
        samples.push(sample(cfg1, tau, t1, opts));
        ds = opts.ds;
    }
    Ok(DeformationPath { samples, termination, events })
}

/// Bisects the step length `h ∈ (0, ds]` at which the first event function
/// changes sign, to `EVENT_TOL`.
#[allow(clippy::too_many_arguments)]
fn locate_event(
    graph: &PeriodicFramework,
    fc: &FaceComplex,
    targets: &[f64],
    y0: &DVector<f64>,
    t: &DVector<f64>,
    ds: f64,
    f0: &(Vec<f64>, Vec<f64>),
    end: &Configuration,
) -> (f64, Configuration) {
    let (mut lo, mut hi) = (0.0, ds);
    let mut best = end.clone();
    while hi - lo > EVENT_TOL {
        let mid = 0.5 * (lo + hi);
        let Some(y) = corrector_step(graph, targets, y0, t, mid) else { break };
        let cfg = Configuration::from_vector(&y);
        match event_functions(graph, fc, &cfg) {
            Some(f) if first_sign_change(f0, &f).is_some() => {
                hi = mid;
                best = cfg;
            }
            _ => lo = mid,
        }
    }
    (hi, best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn auxetic_examples() {
        assert!(auxetic_tangent_check(&Matrix2::zeros()));
        assert!(!auxetic_tangent_check(&Matrix2::new(1.0, 0.0, 0.0, -1.0)));
        let s = 0.7;
        assert!(auxetic_tangent_check(&(Matrix2::new(2.0, 1.0, 1.0, 2.0) * s)));
    }

    #[test]
    fn contraction_examples() {
        let l = Matrix2::new(1.0, 0.3, 0.2, 2.0);
        let r = contraction_check(&l, &l).unwrap();
        assert!((r.norm - 1.0).abs() < 1e-12 && r.contraction);
        let r = contraction_check(&(l * 0.5), &l).unwrap();
        assert!((r.norm - 0.5).abs() < 1e-12 && r.contraction);
        assert!(contraction_check(&l, &Matrix2::zeros()).is_err());
    }

    #[test]
    fn zero_tangent_zero_gram_derivative() {
        let cfg = Configuration { positions: vec![Vec2::zeros()], lattice: Matrix2::identity() };
        assert_eq!(gram_derivative(&cfg, &DVector::zeros(6)), Matrix2::zeros());
    }

    #[test]
    fn pair_enumeration() {
        // one orbit, cutoff 1: the 4 copies with positive lexicographic shift
        assert_eq!(vertex_pairs(1, 1).len(), 4);
        assert_eq!(vertex_pairs(2, 1).len(), 4 + 9 + 4);
    }

    #[test]
    fn gauge_places_vertex_zero_and_first_generator() {
        let fw = PeriodicFramework::new(
            LatticeBasis::from_generators(Vec2::new(1.0, 1.0), Vec2::new(-1.0, 1.0)).unwrap(),
            vec![Vec2::new(0.3, 0.2), Vec2::new(0.8, 0.7)],
            [(0, 1, [0, 0]), (0, 1, [-1, 0]), (0, 0, [0, 1])],
        )
        .unwrap();
        let cfg = Configuration::gauged(&fw);
        assert_eq!(cfg.positions[0], Vec2::zeros());
        assert_eq!(cfg.lattice[(1, 0)], 0.0);
        assert!((cfg.lattice[(0, 0)] - 2f64.sqrt()).abs() < 1e-14);
        let back = Configuration::from_vector(&cfg.to_vector());
        assert_eq!(back, cfg);
    }
}
