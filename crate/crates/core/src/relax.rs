//! Relaxing periodicity to a finite-index sublattice, and a bounded
//! ultrarigidity probe built on it.

use nalgebra::Matrix2;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::framework::{LatticeBasis, PeriodicFramework, Shift, Vec2};
use crate::rigidity::{check_periodic_stress, flex_space};

/// Index-`a·d` sublattice with generators `λ̃1 = a·λ1 + b·λ2`, `λ̃2 = d·λ2`,
/// written as the matrix `[[a, b], [0, d]]` whose rows are the new generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Sublattice {
    pub a: i64,
    pub b: i64,
    pub d: i64,
}

impl Sublattice {
    pub const IDENTITY: Self = Self { a: 1, b: 0, d: 1 };

    pub fn new(a: i64, b: i64, d: i64) -> Result<Self> {
        if a < 1 || d < 1 || !(0..d).contains(&b) {
            return Err(Error::InvalidParameter(format!(
                "sublattice [[{a},{b}],[0,{d}]] is not in canonical form (a, d >= 1, 0 <= b < d)"
            )));
        }
        Ok(Self { a, b, d })
    }

    /// From the row-major entries `a, b, c, d`; `c` must be zero.
    pub fn from_entries(e: [i64; 4]) -> Result<Self> {
        if e[2] != 0 {
            return Err(Error::InvalidParameter(format!("lower-left entry must be 0, got {}", e[2])));
        }
        Self::new(e[0], e[1], e[3])
    }

    pub fn index(&self) -> usize {
        (self.a * self.d) as usize
    }

    /// Coset representatives `r ∈ [0, a) × [0, d)`, in index order.
    pub fn cosets(&self) -> Vec<Shift> {
        (0..self.a).flat_map(|r1| (0..self.d).map(move |r2| [r1, r2])).collect()
    }

    fn coset_index(&self, r: Shift) -> usize {
        (r[0] * self.d + r[1]) as usize
    }

    /// Splits `v = r + k1·(a, b) + k2·(0, d)`; returns `(r, (k1, k2))`.
    pub fn reduce(&self, v: Shift) -> (Shift, Shift) {
        let k1 = v[0].div_euclid(self.a);
        let w = [v[0] - k1 * self.a, v[1] - k1 * self.b];
        let k2 = w[1].div_euclid(self.d);
        ([w[0], w[1] - k2 * self.d], [k1, k2])
    }

    /// Old-basis coordinates of the new generators, as columns.
    pub fn column_matrix(&self) -> Matrix2<f64> {
        Matrix2::new(self.a as f64, 0.0, self.b as f64, self.d as f64)
    }

    /// The sublattice of the sublattice: `other` expressed in this one's generators.
    pub fn compose(&self, other: &Sublattice) -> Sublattice {
        // rows: other's generators in terms of ours, ours in terms of the original
        let g1 = [other.a * self.a, other.a * self.b + other.b * self.d];
        let g2 = [0, other.d * self.d];
        hermite(g1, g2)
    }
}

/// Canonical form of the lattice spanned by integer row vectors `g1`, `g2`.
fn hermite(mut g1: Shift, mut g2: Shift) -> Sublattice {
    // column-0 gcd by Euclid on rows
    while g2[0] != 0 {
        let q = g1[0].div_euclid(g2[0]);
        g1 = [g1[0] - q * g2[0], g1[1] - q * g2[1]];
        std::mem::swap(&mut g1, &mut g2);
    }
    if g1[0] < 0 {
        g1 = [-g1[0], -g1[1]];
    }
    let d = g2[1].abs();
    Sublattice { a: g1[0], b: g1[1].rem_euclid(d), d }
}

impl std::fmt::Display for Sublattice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[[{},{}],[0,{}]]", self.a, self.b, self.d)
    }
}

/// All sublattices of index `k`, each once; there are `σ₁(k)` of them.
pub fn sublattices_of_index(k: usize) -> Vec<Sublattice> {
    let k = k as i64;
    let mut out = Vec::new();
    for a in 1..=k {
        if k % a != 0 {
            continue;
        }
        let d = k / a;
        out.extend((0..d).map(|b| Sublattice { a, b, d }));
    }
    out
}

#[derive(Debug, Clone)]
pub struct UnfoldedFramework {
    pub framework: PeriodicFramework,
    pub sublattice: Sublattice,
    /// For each new vertex orbit: original orbit and coset representative.
    pub vertex_origin: Vec<(usize, Shift)>,
    /// For each new edge orbit: original orbit and coset of its tail.
    pub edge_origin: Vec<(usize, Shift)>,
}

impl UnfoldedFramework {
    /// Copies a per-orbit stress onto every coset copy.
    pub fn copy_stress(&self, s: &[f64]) -> Vec<f64> {
        self.edge_origin.iter().map(|&(b, _)| s[b]).collect()
    }
}

/// Unfolds `fw` to the sublattice `sub`. Vertex `(i, r)` gets id `i·ρ + index(r)`,
/// edge `(β, r)` gets id `β·ρ + index(r)`.
pub fn relax(fw: &PeriodicFramework, sub: Sublattice) -> Result<UnfoldedFramework> {
    let rho = sub.index();
    let cosets = sub.cosets();
    let lattice = LatticeBasis::new(fw.lattice().matrix() * sub.column_matrix())?;
    let mut positions = Vec::with_capacity(fw.n() * rho);
    let mut vertex_origin = Vec::with_capacity(fw.n() * rho);
    for i in 0..fw.n() {
        for &r in &cosets {
            positions.push(fw.copy_position(i, r));
            vertex_origin.push((i, r));
        }
    }
    let mut edges = Vec::with_capacity(fw.m() * rho);
    let mut edge_origin = Vec::with_capacity(fw.m() * rho);
    for e in fw.edges() {
        for &r in &cosets {
            let (r2, c) = sub.reduce([r[0] + e.shift[0], r[1] + e.shift[1]]);
            edges.push((e.tail * rho + sub.coset_index(r), e.head * rho + sub.coset_index(r2), c));
            edge_origin.push((e.id, r));
        }
    }
    let framework = PeriodicFramework::new(lattice, positions, edges)?;
    Ok(UnfoldedFramework { framework, sublattice: sub, vertex_origin, edge_origin })
}

/// Whether the coset-copied stress is a periodic stress of the relaxation.
pub fn stress_persists(fw: &PeriodicFramework, s: &[f64], sub: Sublattice) -> Result<bool> {
    if s.len() != fw.m() {
        return Err(Error::DimensionMismatch { expected: fw.m(), found: s.len() });
    }
    let u = relax(fw, sub)?;
    Ok(check_periodic_stress(&u.framework, &u.copy_stress(s))?.periodic)
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeEntry {
    pub sublattice: Sublattice,
    pub index: usize,
    pub n: usize,
    pub m: usize,
    pub sigma: i64,
    pub delta: i64,
    pub phi: i64,
}

#[derive(Debug, Clone, Serialize)]
pub struct UltraReport {
    pub max_index: usize,
    /// True iff every probed relaxation is infinitesimally rigid.
    pub ultrarigid_up_to_max_index: bool,
    pub first_failure: Option<Sublattice>,
    pub entries: Vec<ProbeEntry>,
    pub note: &'static str,
}

/// Computes `φ` for every relaxation of index at most `max_index`.
/// A bounded falsifier: passing says nothing about larger indices.
pub fn ultrarigidity_probe(fw: &PeriodicFramework, max_index: usize) -> Result<UltraReport> {
    if max_index < 1 {
        return Err(Error::InvalidParameter("max index must be at least 1".into()));
    }
    let subs: Vec<Sublattice> = (1..=max_index).flat_map(sublattices_of_index).collect();
    let entries = subs
        .par_iter()
        .map(|&s| {
            let u = relax(fw, s)?;
            let r = flex_space(&u.framework).report;
            Ok(ProbeEntry {
                sublattice: s,
                index: s.index(),
                n: u.framework.n(),
                m: u.framework.m(),
                sigma: r.sigma,
                delta: r.delta,
                phi: r.phi,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let first_failure = entries.iter().find(|e| e.phi != 0).map(|e| e.sublattice);
    Ok(UltraReport {
        max_index,
        ultrarigid_up_to_max_index: first_failure.is_none(),
        first_failure,
        entries,
        note: "bounded check over finitely many sublattices; not a proof for larger indices",
    })
}

/// Sorted edge lengths, for comparing relaxations up to relabeling.
pub fn length_multiset(fw: &PeriodicFramework) -> Vec<f64> {
    let mut l: Vec<f64> = fw.edge_vectors().iter().map(Vec2::norm).collect();
    l.sort_by(f64::total_cmp);
    l
}
