//! Periodic framework data model.
//!
//! A framework is stored on the quotient: `n` vertex orbit representatives,
//! `m` edge orbits, and a lattice basis whose columns generate the period
//! lattice. Edge orbit `β` joins representative `tail` to the copy of `head`
//! translated by `Λ·shift`.

use std::collections::{HashMap, VecDeque};

use nalgebra::{Matrix2, Vector2};

use crate::error::{Error, Result};

pub type Vec2 = Vector2<f64>;

/// Integer lattice coordinates of a period.
pub type Shift = [i64; 2];

/// Relative threshold on `|det Λ|` against the squared longest column.
pub const LATTICE_RANK_TOL: f64 = 1e-12;

/// Relative threshold below which an edge vector counts as zero length.
pub const ZERO_LENGTH_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeBasis {
    columns: Matrix2<f64>,
}

impl LatticeBasis {
    pub fn new(columns: Matrix2<f64>) -> Result<Self> {
        let det = columns.determinant();
        let scale = columns.column(0).norm().max(columns.column(1).norm());
        let threshold = LATTICE_RANK_TOL * scale * scale;
        if !det.is_finite() || det.abs() < threshold || scale == 0.0 {
            return Err(Error::SingularLattice { det, threshold });
        }
        Ok(Self { columns })
    }

    pub fn from_generators(l1: Vec2, l2: Vec2) -> Result<Self> {
        Self::new(Matrix2::from_columns(&[l1, l2]))
    }

    pub fn identity() -> Self {
        Self { columns: Matrix2::identity() }
    }

    pub fn matrix(&self) -> &Matrix2<f64> {
        &self.columns
    }

    pub fn generator(&self, j: usize) -> Vec2 {
        self.columns.column(j).into_owned()
    }

    /// The period `Λ·c`.
    pub fn period(&self, c: Shift) -> Vec2 {
        self.generator(0) * c[0] as f64 + self.generator(1) * c[1] as f64
    }

    pub fn gram(&self) -> Matrix2<f64> {
        self.columns.transpose() * self.columns
    }

    pub fn determinant(&self) -> f64 {
        self.columns.determinant()
    }

    /// Largest generator length.
    pub fn scale(&self) -> f64 {
        self.generator(0).norm().max(self.generator(1).norm())
    }

    /// Smallest singular value of the basis matrix.
    pub fn min_stretch(&self) -> f64 {
        let s = self.columns.singular_values();
        s[0].min(s[1])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VertexOrbit {
    pub id: usize,
    pub position: Vec2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeOrbit {
    pub id: usize,
    pub tail: usize,
    pub head: usize,
    pub shift: Shift,
}

impl EdgeOrbit {
    /// Canonical key for an edge orbit: `tail <= head`, and a loop orbit
    /// carries a lexicographically positive shift.
    pub fn canonical_key(tail: usize, head: usize, shift: Shift) -> (usize, usize, Shift) {
        let neg = [-shift[0], -shift[1]];
        if tail > head || (tail == head && shift < [0, 0]) {
            (head, tail, neg)
        } else {
            (tail, head, shift)
        }
    }

    pub fn key(&self) -> (usize, usize, Shift) {
        (self.tail, self.head, self.shift)
    }

    pub fn is_loop(&self) -> bool {
        self.tail == self.head
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicFramework {
    lattice: LatticeBasis,
    vertices: Vec<VertexOrbit>,
    edges: Vec<EdgeOrbit>,
}

impl PeriodicFramework {
    /// Builds and validates a framework. Edge orbits are brought to
    /// canonical form; their ids follow the input order.
    pub fn new(
        lattice: LatticeBasis,
        positions: Vec<Vec2>,
        edges: impl IntoIterator<Item = (usize, usize, Shift)>,
    ) -> Result<Self> {
        let vertices = positions
            .into_iter()
            .enumerate()
            .map(|(id, position)| VertexOrbit { id, position })
            .collect::<Vec<_>>();
        let edges = edges
            .into_iter()
            .enumerate()
            .map(|(id, (tail, head, shift))| {
                let (tail, head, shift) = EdgeOrbit::canonical_key(tail, head, shift);
                EdgeOrbit { id, tail, head, shift }
            })
            .collect::<Vec<_>>();
        let fw = Self { lattice, vertices, edges };
        fw.validate()?;
        Ok(fw)
    }

    fn validate(&self) -> Result<()> {
        let n = self.vertices.len();
        if n == 0 {
            return Err(Error::NoVertices);
        }
        for (k, v) in self.vertices.iter().enumerate() {
            if v.id != k {
                return Err(Error::VertexId { expected: k, found: v.id });
            }
            if !(v.position.x.is_finite() && v.position.y.is_finite()) {
                return Err(Error::Schema(format!("vertex {k}: non-finite position")));
            }
        }
        self.check_vertex_separation()?;

        let scale = self.length_scale();
        let mut seen: HashMap<(usize, usize, Shift), usize> = HashMap::new();
        for e in &self.edges {
            for v in [e.tail, e.head] {
                if v >= n {
                    return Err(Error::UnknownVertex { edge: e.id, vertex: v, n });
                }
            }
            if e.tail == e.head && e.shift == [0, 0] {
                return Err(Error::DegenerateEdge { edge: e.id, reason: "loop with zero shift" });
            }
            if self.edge_vec(e.id).norm() <= ZERO_LENGTH_TOL * scale {
                return Err(Error::DegenerateEdge { edge: e.id, reason: "zero length" });
            }
            if let Some(&other) = seen.get(&e.key()) {
                return Err(Error::DuplicateEdge { edge: e.id, other });
            }
            seen.insert(e.key(), e.id);
        }
        self.check_connected()
    }

    fn check_vertex_separation(&self) -> Result<()> {
        let inv = self
            .lattice
            .matrix()
            .try_inverse()
            .ok_or(Error::Singular("lattice inverse"))?;
        let tol = ZERO_LENGTH_TOL * self.length_scale();
        for a in 0..self.vertices.len() {
            for b in a + 1..self.vertices.len() {
                let d = self.vertices[b].position - self.vertices[a].position;
                let frac = inv * d;
                let c = [frac.x.round() as i64, frac.y.round() as i64];
                if (d - self.lattice.period(c)).norm() <= tol {
                    return Err(Error::CoincidentVertices { a, b });
                }
            }
        }
        Ok(())
    }

    fn check_connected(&self) -> Result<()> {
        let n = self.n();
        let mut adj = vec![Vec::new(); n];
        for e in &self.edges {
            adj[e.tail].push(e.head);
            adj[e.head].push(e.tail);
        }
        let mut seen = vec![false; n];
        seen[0] = true;
        let mut queue = VecDeque::from([0]);
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        match seen.iter().position(|s| !s) {
            Some(vertex) => Err(Error::Disconnected { vertex }),
            None => Ok(()),
        }
    }

    pub fn lattice(&self) -> &LatticeBasis {
        &self.lattice
    }

    pub fn vertices(&self) -> &[VertexOrbit] {
        &self.vertices
    }

    pub fn edges(&self) -> &[EdgeOrbit] {
        &self.edges
    }

    pub fn n(&self) -> usize {
        self.vertices.len()
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn position(&self, i: usize) -> Vec2 {
        self.vertices[i].position
    }

    pub fn positions(&self) -> Vec<Vec2> {
        self.vertices.iter().map(|v| v.position).collect()
    }

    /// Position of the vertex copy `(i, c)`, i.e. `p_i + Λ·c`.
    pub fn copy_position(&self, i: usize, c: Shift) -> Vec2 {
        self.vertices[i].position + self.lattice.period(c)
    }

    /// `e_β = (x_j + Λ c_β) − x_i`.
    pub fn edge_vector(&self, beta: usize) -> Result<Vec2> {
        if beta >= self.m() {
            return Err(Error::IndexOutOfRange { what: "edge orbit", index: beta, len: self.m() });
        }
        Ok(self.edge_vec(beta))
    }

    pub(crate) fn edge_vec(&self, beta: usize) -> Vec2 {
        let e = &self.edges[beta];
        self.copy_position(e.head, e.shift) - self.vertices[e.tail].position
    }

    pub fn edge_vectors(&self) -> Vec<Vec2> {
        (0..self.m()).map(|b| self.edge_vec(b)).collect()
    }

    /// Looks up an edge orbit joining `(tail, 0)` to `(head, shift)` in either
    /// orientation.
    pub fn find_edge(&self, tail: usize, head: usize, shift: Shift) -> Option<usize> {
        let key = EdgeOrbit::canonical_key(tail, head, shift);
        self.edges.iter().find(|e| e.key() == key).map(|e| e.id)
    }

    /// Characteristic length used for relative tolerances.
    pub fn length_scale(&self) -> f64 {
        let pmax = self.vertices.iter().map(|v| v.position.norm()).fold(0.0, f64::max);
        self.lattice.scale().max(pmax)
    }

    /// Same graph with new vertex positions and lattice, revalidated.
    pub fn with_placement(&self, positions: Vec<Vec2>, lattice: LatticeBasis) -> Result<Self> {
        if positions.len() != self.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), found: positions.len() });
        }
        Self::new(lattice, positions, self.edges.iter().map(|e| (e.tail, e.head, e.shift)))
    }

    /// Same placement with one more edge orbit appended.
    pub fn with_edge(&self, tail: usize, head: usize, shift: Shift) -> Result<Self> {
        let edges = self
            .edges
            .iter()
            .map(|e| (e.tail, e.head, e.shift))
            .chain(std::iter::once((tail, head, shift)));
        Self::new(self.lattice, self.positions(), edges)
    }

    /// Degree of each vertex orbit in the quotient multigraph (loops count twice).
    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n()];
        for e in &self.edges {
            d[e.tail] += 1;
            d[e.head] += 1;
        }
        d
    }

    pub fn realize_patch(&self, range: &TileRange) -> Result<FinitePatch> {
        if range.is_empty() {
            return Err(Error::EmptyRange);
        }
        let mut index = HashMap::new();
        let mut vertices = Vec::new();
        for c in range.shifts() {
            for v in &self.vertices {
                index.insert((v.id, c), vertices.len());
                vertices.push(PatchVertex { orbit: v.id, shift: c, position: self.copy_position(v.id, c) });
            }
        }
        let mut edges = Vec::new();
        for c in range.shifts() {
            for e in &self.edges {
                let head = [c[0] + e.shift[0], c[1] + e.shift[1]];
                if let (Some(&a), Some(&b)) = (index.get(&(e.tail, c)), index.get(&(e.head, head))) {
                    edges.push(PatchEdge { orbit: e.id, tail: a, head: b });
                }
            }
        }
        Ok(FinitePatch { vertices, edges })
    }
}

/// Integer box of lattice shifts, half-open in both coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TileRange {
    pub lo: Shift,
    pub hi: Shift,
}

impl TileRange {
    pub fn new(lo: Shift, hi: Shift) -> Self {
        Self { lo, hi }
    }

    /// `rows × cols` tiles starting at the origin; rows run along `λ2`.
    pub fn grid(rows: i64, cols: i64) -> Self {
        Self { lo: [0, 0], hi: [cols, rows] }
    }

    /// Tiles with shifts in `[-r, r]²`.
    pub fn centered(r: i64) -> Self {
        Self { lo: [-r, -r], hi: [r + 1, r + 1] }
    }

    pub fn is_empty(&self) -> bool {
        self.hi[0] <= self.lo[0] || self.hi[1] <= self.lo[1]
    }

    pub fn contains(&self, c: Shift) -> bool {
        (self.lo[0]..self.hi[0]).contains(&c[0]) && (self.lo[1]..self.hi[1]).contains(&c[1])
    }

    pub fn shifts(&self) -> impl Iterator<Item = Shift> + '_ {
        (self.lo[1]..self.hi[1]).flat_map(move |y| (self.lo[0]..self.hi[0]).map(move |x| [x, y]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatchVertex {
    pub orbit: usize,
    pub shift: Shift,
    pub position: Vec2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PatchEdge {
    pub orbit: usize,
    pub tail: usize,
    pub head: usize,
}

/// A finite piece of the infinite framework.
#[derive(Debug, Clone, PartialEq)]
pub struct FinitePatch {
    pub vertices: Vec<PatchVertex>,
    pub edges: Vec<PatchEdge>,
}

pub(crate) fn add_shift(a: Shift, b: Shift) -> Shift {
    [a[0] + b[0], a[1] + b[1]]
}

pub(crate) fn sub_shift(a: Shift, b: Shift) -> Shift {
    [a[0] - b[0], a[1] - b[1]]
}

/// Counter-clockwise quarter turn, `(x, y) ↦ (−y, x)`.
pub fn perp(v: Vec2) -> Vec2 {
    Vec2::new(-v.y, v.x)
}

/// `det(a b)` with `a`, `b` as columns.
pub fn cross(a: Vec2, b: Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}
