//! Periodic rigidity matrix, flex and stress spaces.
//!
//! Column layout of the rigidity matrix: two columns per vertex orbit in id
//! order, then `λ1.x, λ1.y, λ2.x, λ2.y`. Row `β` is the differential of
//! `½|e_β|²`.

use nalgebra::{DMatrix, DVector, Matrix2};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::framework::{perp, PeriodicFramework};
use crate::linalg::{self, Kernel, RANK_GAP_MIN};

/// Relative tolerance for stress residuals.
pub const STRESS_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct RigidityMatrix {
    pub matrix: DMatrix<f64>,
    pub n: usize,
    pub m: usize,
}

impl RigidityMatrix {
    pub fn cols(&self) -> usize {
        2 * self.n + 4
    }
}

pub fn rigidity_matrix(fw: &PeriodicFramework) -> RigidityMatrix {
    let (n, m) = (fw.n(), fw.m());
    let mut r = DMatrix::zeros(m, 2 * n + 4);
    for (b, e) in fw.edges().iter().enumerate() {
        let v = fw.edge_vec(b);
        for k in 0..2 {
            r[(b, 2 * e.tail + k)] -= v[k];
            r[(b, 2 * e.head + k)] += v[k];
            r[(b, 2 * n + k)] = e.shift[0] as f64 * v[k];
            r[(b, 2 * n + 2 + k)] = e.shift[1] as f64 * v[k];
        }
    }
    RigidityMatrix { matrix: r, n, m }
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectralReport {
    /// Dimension of the periodic stress space.
    pub sigma: i64,
    /// Dimension of the infinitesimal periodic deformation space.
    pub delta: i64,
    /// Non-trivial flexes, `δ − 3`.
    pub phi: i64,
    pub rank: usize,
    pub singular_values: Vec<f64>,
    pub gap_ratio: f64,
}

#[derive(Debug, Clone)]
pub struct FlexSpace {
    /// Orthonormal basis of ker R (trivial motions included).
    pub basis: Vec<DVector<f64>>,
    pub report: SpectralReport,
}

pub fn flex_space(fw: &PeriodicFramework) -> FlexSpace {
    let r = rigidity_matrix(fw);
    let k = linalg::kernel(&r.matrix);
    let delta = k.dim() as i64;
    let report = SpectralReport {
        sigma: r.m as i64 - k.rank as i64,
        delta,
        phi: delta - 3,
        rank: k.rank,
        singular_values: k.singular_values.clone(),
        gap_ratio: k.gap_ratio,
    };
    FlexSpace { basis: k.basis, report }
}

/// A stress given by one value per edge orbit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StressVector {
    pub values: Vec<f64>,
    pub is_equilibrium: bool,
    pub is_periodic: bool,
}

impl StressVector {
    /// Classifies `values` against `fw`.
    pub fn classify(fw: &PeriodicFramework, values: Vec<f64>) -> Result<Self> {
        let check = check_periodic_stress(fw, &values)?;
        Ok(Self { values, is_equilibrium: check.equilibrium, is_periodic: check.periodic })
    }

    /// Stresses are stored per edge orbit, so they are invariant under the lattice.
    pub fn is_gamma_invariant(&self) -> bool {
        true
    }
}

fn stress_kernel(fw: &PeriodicFramework) -> Kernel {
    linalg::kernel(&rigidity_matrix(fw).matrix.transpose())
}

/// Basis of ker Rᵗ, unit vectors with first nonzero entry positive.
pub fn periodic_stress_space(fw: &PeriodicFramework) -> Vec<StressVector> {
    stress_kernel(fw)
        .basis
        .into_iter()
        .map(|v| StressVector { values: v.iter().copied().collect(), is_equilibrium: true, is_periodic: true })
        .collect()
}

/// The `2n × m` equilibrium matrix: vertex rows of Rᵗ.
pub fn equilibrium_matrix(fw: &PeriodicFramework) -> DMatrix<f64> {
    let r = rigidity_matrix(fw);
    r.matrix.columns(0, 2 * fw.n()).transpose()
}

/// Basis of the lattice-invariant equilibrium stresses.
pub fn invariant_equilibrium_stress_space(fw: &PeriodicFramework) -> Vec<DVector<f64>> {
    linalg::kernel(&equilibrium_matrix(fw)).basis
}

#[derive(Debug, Clone, Serialize)]
pub struct StressCheck {
    pub periodic: bool,
    pub equilibrium: bool,
    /// Largest per-vertex force imbalance.
    pub equilibrium_residual: f64,
    /// `|Σ s_β c_β^j e_β|` for `j = 1, 2`.
    pub lattice_residual: [f64; 2],
    /// Frobenius norm of `Σ s_β (Λc_β) ⊗ e_β`.
    pub tensor_residual: f64,
    /// Verdict of the tensor form alone (equilibrium and tensor residual).
    pub tensor_periodic: bool,
    pub tolerance: f64,
}

pub fn check_periodic_stress(fw: &PeriodicFramework, s: &[f64]) -> Result<StressCheck> {
    if s.len() != fw.m() {
        return Err(Error::DimensionMismatch { expected: fw.m(), found: s.len() });
    }
    let lattice = fw.lattice();
    let mut force = vec![DVector::<f64>::zeros(2); fw.n()];
    let mut lat = [nalgebra::Vector2::zeros(); 2];
    let mut tensor = Matrix2::zeros();
    let (mut scale, mut lat_scale, mut tensor_scale) = (0.0, 0.0, 0.0);
    for (b, e) in fw.edges().iter().enumerate() {
        let v = fw.edge_vec(b);
        let sv = v * s[b];
        for k in 0..2 {
            force[e.tail][k] += sv[k];
            force[e.head][k] -= sv[k];
        }
        let period = lattice.period(e.shift);
        lat[0] += sv * e.shift[0] as f64;
        lat[1] += sv * e.shift[1] as f64;
        tensor += period * sv.transpose();
        let w = s[b].abs() * v.norm();
        scale += w;
        lat_scale += w * (e.shift[0].abs() + e.shift[1].abs()) as f64;
        tensor_scale += w * period.norm();
    }
    let eq_res = force.iter().map(|f| f.norm()).fold(0.0, f64::max);
    let lat_res = [lat[0].norm(), lat[1].norm()];
    let tensor_res = tensor.norm();
    let eq_ok = eq_res <= STRESS_TOL * scale;
    let lat_ok = lat_res.iter().all(|&r| r <= STRESS_TOL * lat_scale.max(scale));
    let tensor_ok = tensor_res <= STRESS_TOL * tensor_scale.max(scale * lattice.scale());
    Ok(StressCheck {
        periodic: eq_ok && lat_ok,
        equilibrium: eq_ok,
        equilibrium_residual: eq_res,
        lattice_residual: lat_res,
        tensor_residual: tensor_res,
        tensor_periodic: eq_ok && tensor_ok,
        tolerance: STRESS_TOL * scale,
    })
}

/// Two translations and the infinitesimal rotation of the whole
/// configuration, lattice included.
pub fn trivial_motions(fw: &PeriodicFramework) -> [DVector<f64>; 3] {
    let n = fw.n();
    let cols = 2 * n + 4;
    let mut tx = DVector::zeros(cols);
    let mut ty = DVector::zeros(cols);
    let mut rot = DVector::zeros(cols);
    for i in 0..n {
        tx[2 * i] = 1.0;
        ty[2 * i + 1] = 1.0;
        let w = perp(fw.position(i));
        rot[2 * i] = w.x;
        rot[2 * i + 1] = w.y;
    }
    for j in 0..2 {
        let w = perp(fw.lattice().generator(j));
        rot[2 * n + 2 * j] = w.x;
        rot[2 * n + 2 * j + 1] = w.y;
    }
    [tx, ty, rot]
}

#[derive(Debug, Clone, Serialize)]
pub struct CountReport {
    pub n: usize,
    pub m: usize,
    pub sigma: i64,
    pub delta: i64,
    pub phi: i64,
    /// `σ − δ = m − 2n − 4`
    pub stress_flex_identity: bool,
    /// `σ = φ − 1 + (m − 2n)`
    pub reduced_identity: bool,
}

/// Computes `σ` from ker Rᵗ and `δ` from ker R with separate decompositions
/// and checks both count identities.
pub fn count_identity_check(fw: &PeriodicFramework) -> Result<CountReport> {
    let r = rigidity_matrix(fw);
    let flex = linalg::kernel(&r.matrix);
    let stress = linalg::kernel(&r.matrix.transpose());
    let ratio = flex.gap_ratio.min(stress.gap_ratio);
    if ratio < RANK_GAP_MIN {
        return Err(Error::RankInstability { ratio });
    }
    let (n, m) = (fw.n() as i64, fw.m() as i64);
    let sigma = stress.dim() as i64;
    let delta = flex.dim() as i64;
    let phi = delta - 3;
    Ok(CountReport {
        n: fw.n(),
        m: fw.m(),
        sigma,
        delta,
        phi,
        stress_flex_identity: sigma - delta == m - 2 * n - 4,
        reduced_identity: sigma == phi - 1 + (m - 2 * n),
    })
}
