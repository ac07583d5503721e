//! Small dense SVD helpers: numerical rank and orthonormal kernels.

use nalgebra::{DMatrix, DVector};

/// Singular values below this fraction of the largest one count as zero.
pub const RANK_TOL: f64 = 1e-9;

/// Minimum acceptable ratio between the smallest kept and the largest
/// dropped singular value.
pub const RANK_GAP_MIN: f64 = 10.0;

#[derive(Debug, Clone)]
pub struct Kernel {
    /// Orthonormal basis of the kernel, sign-normalized.
    pub basis: Vec<DVector<f64>>,
    /// All singular values, descending (`min(rows, cols)` of them).
    pub singular_values: Vec<f64>,
    pub rank: usize,
    /// `smallest kept / largest dropped`; infinite when nothing is dropped
    /// or the dropped values are exactly zero.
    pub gap_ratio: f64,
}

impl Kernel {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Basis vectors as columns.
    pub fn matrix(&self, rows: usize) -> DMatrix<f64> {
        if self.basis.is_empty() {
            return DMatrix::zeros(rows, 0);
        }
        DMatrix::from_columns(&self.basis)
    }
}

/// Numerical rank from descending singular values.
pub fn numerical_rank(sv: &[f64]) -> usize {
    let top = sv.first().copied().unwrap_or(0.0);
    if top <= 0.0 {
        return 0;
    }
    sv.iter().take_while(|&&s| s > RANK_TOL * top).count()
}

fn gap_ratio(sv: &[f64], rank: usize) -> f64 {
    match (rank.checked_sub(1).map(|k| sv[k]), sv.get(rank)) {
        (Some(kept), Some(&dropped)) if dropped > 0.0 => kept / dropped,
        _ => f64::INFINITY,
    }
}

/// Flips `v` so that its first entry with magnitude above `1e-12·|v|∞` is positive.
pub fn fix_sign(v: &mut DVector<f64>) {
    let amax = v.amax();
    if let Some(first) = v.iter().copied().find(|x| x.abs() > 1e-12 * amax) {
        if first < 0.0 {
            *v *= -1.0;
        }
    }
}

/// Kernel of `a` (right null space) via a full SVD.
pub fn kernel(a: &DMatrix<f64>) -> Kernel {
    let (rows, cols) = a.shape();
    if cols == 0 {
        return Kernel { basis: vec![], singular_values: vec![], rank: 0, gap_ratio: f64::INFINITY };
    }
    // pad with zero rows so that the SVD returns a complete right basis
    let padded = if rows < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.rows_mut(0, rows).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let all: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let rank = numerical_rank(&all);
    let basis = order[rank..]
        .iter()
        .map(|&i| {
            let mut v = v_t.row(i).transpose().into_owned();
            v /= v.norm();
            fix_sign(&mut v);
            v
        })
        .collect();
    let gap = gap_ratio(&all, rank);
    let singular_values = all.into_iter().take(rows.min(cols)).collect();
    Kernel { basis, singular_values, rank, gap_ratio: gap }
}

/// Largest distance from a vector in span(`a`) to span(`b`), both given by
/// orthonormal bases.
pub fn subspace_excess(a: &[DVector<f64>], b: &[DVector<f64>]) -> f64 {
    a.iter()
        .map(|v| {
            let mut r = v.clone();
            for w in b {
                r -= w * w.dot(v);
            }
            r.norm()
        })
        .fold(0.0, f64::max)
}
