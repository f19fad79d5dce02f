//! Dense linear algebra kernel: SVD, Moore-Penrose pseudoinverse,
//! minimal-norm least squares and singular-value diagnostics.
//!
//! Matrices are stored column-major (the layout of the backing
//! [`nalgebra::DMatrix`]); every constructor that takes flat input states
//! the order it expects. All entries are validated to be finite at the
//! API boundary, so the algorithms below never see NaN or infinities.
//!
//! The pseudoinverse is always computed through the SVD. Near the
//! interpolation point the feature matrix has very small singular values,
//! and forming normal equations there would square an already bad
//! condition number.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Default relative cutoff for singular values: entries below
/// `DEFAULT_RCOND * sigma_max` are treated as zero.
pub const DEFAULT_RCOND: f64 = 1e-12;

/// Iteration cap handed to the SVD; exceeding it is reported as
/// [`Error::SvdNoConvergence`] rather than returning garbage.
const SVD_MAX_ITERATIONS: usize = 4000;

/// Dense real matrix with finite entries and at least one row and column.
#[derive(Debug, Clone, PartialEq)]
pub struct RealMatrix {
    inner: DMatrix<f64>,
}

/// Dense real vector with finite entries and at least one element.
#[derive(Debug, Clone, PartialEq)]
pub struct RealVector {
    inner: DVector<f64>,
}

impl RealMatrix {
    /// Builds a matrix from entries laid out row by row.
    pub fn from_row_major(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyMatrix { rows, cols });
        }
        if entries.len() != rows * cols {
            return Err(Error::dim_mismatch(
                "from_row_major",
                format!("{rows}x{cols}"),
                entries.len(),
            ));
        }
        let inner = DMatrix::from_row_slice(rows, cols, entries);
        Self::from_inner(inner)
    }

    /// Builds a matrix from a list of equally long rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::EmptyMatrix {
                rows: rows.len(),
                cols: rows.first().map_or(0, Vec::len),
            });
        }
        let cols = rows[0].len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::dim_mismatch("from_rows", cols, format!("row {i}: {}", row.len())));
            }
        }
        let inner = DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]);
        Self::from_inner(inner)
    }

    /// Builds a matrix by evaluating `f(row, col)` for every entry.
    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyMatrix { rows, cols });
        }
        Self::from_inner(DMatrix::from_fn(rows, cols, f))
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyMatrix { rows, cols });
        }
        Ok(Self {
            inner: DMatrix::zeros(rows, cols),
        })
    }

    pub fn identity(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyMatrix { rows: 0, cols: 0 });
        }
        Ok(Self {
            inner: DMatrix::identity(n, n),
        })
    }

    /// Validates finiteness and non-emptiness of an owned `DMatrix`.
    pub(crate) fn from_inner(inner: DMatrix<f64>) -> Result<Self> {
        if inner.nrows() == 0 || inner.ncols() == 0 {
            return Err(Error::EmptyMatrix {
                rows: inner.nrows(),
                cols: inner.ncols(),
            });
        }
        for j in 0..inner.ncols() {
            for i in 0..inner.nrows() {
                if !inner[(i, j)].is_finite() {
                    return Err(Error::NonFiniteEntry { row: i, col: j });
                }
            }
        }
        Ok(Self { inner })
    }

    pub fn rows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn cols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.inner[(row, col)]
    }

    /// Entries in column-major order, the crate-wide storage layout.
    pub fn as_column_major_slice(&self) -> &[f64] {
        self.inner.as_slice()
    }

    pub fn transpose(&self) -> Self {
        Self {
            inner: self.inner.transpose(),
        }
    }

    pub fn matmul(&self, other: &RealMatrix) -> Result<RealMatrix> {
        if self.cols() != other.rows() {
            return Err(Error::dim_mismatch(
                "matmul",
                format!("{}x{}", self.rows(), self.cols()),
                format!("{}x{}", other.rows(), other.cols()),
            ));
        }
        Self::from_inner(&self.inner * &other.inner)
    }

    pub fn matvec(&self, v: &RealVector) -> Result<RealVector> {
        if self.cols() != v.len() {
            return Err(Error::dim_mismatch(
                "matvec",
                format!("{}x{}", self.rows(), self.cols()),
                v.len(),
            ));
        }
        RealVector::from_inner(&self.inner * &v.inner)
    }

    pub fn column(&self, j: usize) -> RealVector {
        RealVector {
            inner: self.inner.column(j).into_owned(),
        }
    }

    /// New matrix with `v` appended as the rightmost column.
    pub fn with_appended_column(&self, v: &RealVector) -> Result<RealMatrix> {
        if v.len() != self.rows() {
            return Err(Error::dim_mismatch("with_appended_column", self.rows(), v.len()));
        }
        let mut inner = DMatrix::zeros(self.rows(), self.cols() + 1);
        inner.view_mut((0, 0), (self.rows(), self.cols())).copy_from(&self.inner);
        inner.set_column(self.cols(), &v.inner);
        Ok(Self { inner })
    }

    /// New matrix keeping the given columns, in the given order.
    pub fn select_columns(&self, indices: &[usize]) -> Result<RealMatrix> {
        if indices.is_empty() {
            return Err(Error::EmptyMatrix { rows: self.rows(), cols: 0 });
        }
        if let Some(&bad) = indices.iter().find(|&&j| j >= self.cols()) {
            return Err(Error::invalid("select_columns", format!("column index {bad} out of range")));
        }
        let mut inner = DMatrix::zeros(self.rows(), indices.len());
        for (k, &idx) in indices.iter().enumerate() {
            inner.set_column(k, &self.inner.column(idx));
        }
        Ok(Self { inner })
    }

    /// New matrix keeping the given rows, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Result<RealMatrix> {
        if indices.is_empty() {
            return Err(Error::EmptyMatrix { rows: 0, cols: self.cols() });
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.rows()) {
            return Err(Error::invalid("select_rows", format!("row index {bad} out of range")));
        }
        let mut inner = DMatrix::zeros(indices.len(), self.cols());
        for (k, &idx) in indices.iter().enumerate() {
            inner.set_row(k, &self.inner.row(idx));
        }
        Ok(Self { inner })
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner.norm()
    }

    pub(crate) fn inner(&self) -> &DMatrix<f64> {
        &self.inner
    }
}

impl RealVector {
    pub fn from_slice(entries: &[f64]) -> Result<Self> {
        Self::from_inner(DVector::from_column_slice(entries))
    }

    pub fn from_vec(entries: Vec<f64>) -> Result<Self> {
        Self::from_inner(DVector::from_vec(entries))
    }

    pub fn zeros(len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::EmptyVector);
        }
        Ok(Self {
            inner: DVector::zeros(len),
        })
    }

    pub(crate) fn from_inner(inner: DVector<f64>) -> Result<Self> {
        if inner.is_empty() {
            return Err(Error::EmptyVector);
        }
        for (i, x) in inner.iter().enumerate() {
            if !x.is_finite() {
                return Err(Error::NonFiniteEntry { row: i, col: 0 });
            }
        }
        Ok(Self { inner })
    }

    pub fn len(&self) -> usize {
        self.inner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inner.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.inner[i]
    }

    pub fn as_slice(&self) -> &[f64] {
        self.inner.as_slice()
    }

    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.inner.iter()
    }

    pub fn norm(&self) -> f64 {
        self.inner.norm()
    }

    pub fn select(&self, indices: &[usize]) -> Result<RealVector> {
        if indices.is_empty() {
            return Err(Error::EmptyVector);
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.len()) {
            return Err(Error::invalid("select", format!("index {bad} out of range")));
        }
        let entries: Vec<f64> = indices.iter().map(|&i| self.inner[i]).collect();
        Self::from_vec(entries)
    }

    pub(crate) fn inner(&self) -> &DVector<f64> {
        &self.inner
    }
}

/// Thin singular value decomposition `A = U * diag(s) * V^T`.
///
/// With `A` of shape `m x n` and `k = min(m, n)`: `u` is `m x k`, `s` has
/// length `k` sorted non-increasing, and `v` is `n x k`. Both `u` and `v`
/// have orthonormal columns.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: RealMatrix,
    pub s: RealVector,
    pub v: RealMatrix,
}

/// Computes the thin SVD of `a`.
///
/// Iteration failure is reported as an error; singular values come back
/// sorted in non-increasing order.
pub fn svd(a: &RealMatrix) -> Result<Svd> {
    let decomp = nalgebra::linalg::SVD::try_new(
        a.inner.clone(),
        true,
        true,
        f64::EPSILON,
        SVD_MAX_ITERATIONS,
    )
    .ok_or(Error::SvdNoConvergence {
        max_iterations: SVD_MAX_ITERATIONS,
    })?;

    let u = decomp.u.expect("u requested");
    let v_t = decomp.v_t.expect("v_t requested");
    let s = decomp.singular_values;

    // nalgebra sorts the values, but the ordering is part of this
    // function's contract, so enforce it here instead of trusting the
    // backend version.
    let k = s.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| s[j].partial_cmp(&s[i]).expect("finite singular values"));

    let sorted_s = DVector::from_fn(k, |i, _| s[order[i]]);
    let sorted_u = DMatrix::from_fn(u.nrows(), k, |i, j| u[(i, order[j])]);
    let sorted_v_t = DMatrix::from_fn(k, v_t.ncols(), |i, j| v_t[(order[i], j)]);

    Ok(Svd {
        u: RealMatrix::from_inner(sorted_u)?,
        s: RealVector::from_inner(sorted_s)?,
        v: RealMatrix::from_inner(sorted_v_t.transpose())?,
    })
}

/// Moore-Penrose pseudoinverse of `a`.
///
/// Singular values `sigma > rcond * sigma_max` are inverted; the rest are
/// zeroed. The strict inequality means exact zeros are never inverted,
/// even with `rcond = 0`.
pub fn pseudoinverse(a: &RealMatrix, rcond: f64) -> Result<RealMatrix> {
    check_rcond(rcond)?;
    let Svd { u, s, v } = svd(a)?;
    let cutoff = rcond * s.get(0);
    let k = s.len();

    // A^+ = V * diag(1/sigma) * U^T, restricted to retained values.
    let mut scaled_v = v.inner.clone();
    for j in 0..k {
        let sigma = s.get(j);
        let factor = if sigma > cutoff { 1.0 / sigma } else { 0.0 };
        scaled_v.column_mut(j).scale_mut(factor);
    }
    RealMatrix::from_inner(scaled_v * u.inner.transpose())
}

/// Minimal-norm least-squares solution of `H * beta = y`.
///
/// Among all minimizers of the residual 2-norm this returns the one of
/// smallest Euclidean norm, i.e. `H^+ * y` with the `rcond` cutoff of
/// [`pseudoinverse`].
pub fn min_norm_lsq(h: &RealMatrix, y: &RealVector, rcond: f64) -> Result<RealVector> {
    check_rcond(rcond)?;
    if h.rows() != y.len() {
        return Err(Error::dim_mismatch(
            "min_norm_lsq",
            format!("{}x{}", h.rows(), h.cols()),
            y.len(),
        ));
    }
    let Svd { u, s, v } = svd(h)?;
    let cutoff = rcond * s.get(0);

    // beta = V * S^+ * U^T y without forming the full pseudoinverse.
    let mut projected = u.inner.tr_mul(y.inner());
    for j in 0..s.len() {
        let sigma = s.get(j);
        projected[j] = if sigma > cutoff { projected[j] / sigma } else { 0.0 };
    }
    RealVector::from_inner(v.inner() * projected)
}

/// Smallest singular value above the `rcond * sigma_max` cutoff, or 0
/// when every singular value falls below it.
pub fn smallest_nonzero_singular_value(a: &RealMatrix, rcond: f64) -> Result<f64> {
    check_rcond(rcond)?;
    let s = svd(a)?.s;
    let cutoff = rcond * s.get(0);
    // Values are sorted non-increasing, so the last retained one is the
    // smallest above the cutoff.
    Ok(s.iter().copied().filter(|&x| x > cutoff).last().unwrap_or(0.0))
}

fn check_rcond(rcond: f64) -> Result<()> {
    if !rcond.is_finite() || rcond < 0.0 {
        return Err(Error::invalid("rcond", format!("must be finite and >= 0, got {rcond}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> RealMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        RealMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0)).unwrap()
    }

    fn random_vector(len: usize, seed: u64) -> RealVector {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        RealVector::from_vec((0..len).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
    }

    fn diag(values: &[f64]) -> RealMatrix {
        RealMatrix::from_fn(values.len(), values.len(), |i, j| if i == j { values[i] } else { 0.0 })
            .unwrap()
    }

    fn rel_frobenius_diff(a: &RealMatrix, b: &RealMatrix) -> f64 {
        let mut num = 0.0;
        for i in 0..a.rows() {
            for j in 0..a.cols() {
                let d = a.get(i, j) - b.get(i, j);
                num += d * d;
            }
        }
        num.sqrt() / a.frobenius_norm().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn construction_rejects_non_finite_and_empty() {
        assert!(matches!(
            RealMatrix::from_row_major(2, 2, &[1.0, f64::NAN, 0.0, 1.0]),
            Err(Error::NonFiniteEntry { .. })
        ));
        assert!(matches!(
            RealMatrix::from_row_major(0, 3, &[]),
            Err(Error::EmptyMatrix { .. })
        ));
        assert!(matches!(
            RealVector::from_slice(&[f64::INFINITY]),
            Err(Error::NonFiniteEntry { .. })
        ));
        assert!(matches!(RealVector::from_vec(vec![]), Err(Error::EmptyVector)));
    }

    #[test]
    fn svd_identity_has_unit_singular_values() {
        let s = svd(&RealMatrix::identity(3).unwrap()).unwrap().s;
        for i in 0..3 {
            assert!((s.get(i) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn svd_of_diagonal_recovers_entries() {
        let d = svd(&diag(&[3.0, 2.0])).unwrap();
        assert!((d.s.get(0) - 3.0).abs() < 1e-14);
        assert!((d.s.get(1) - 2.0).abs() < 1e-14);
        // U and V are the identity up to per-column sign; U and V carry
        // the same sign since the diagonal is positive.
        for j in 0..2 {
            let sign = d.u.get(j, j).signum();
            for i in 0..2 {
                let expect = if i == j { sign } else { 0.0 };
                assert!((d.u.get(i, j) - expect).abs() < 1e-14);
                assert!((d.v.get(i, j) - expect).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn svd_reconstructs_random_matrix() {
        let a = random_matrix(6, 4, 11);
        let Svd { u, s, v } = svd(&a).unwrap();
        let recon = RealMatrix::from_fn(6, 4, |i, j| {
            (0..s.len()).map(|k| u.get(i, k) * s.get(k) * v.get(j, k)).sum()
        })
        .unwrap();
        assert!(rel_frobenius_diff(&a, &recon) < 1e-12);
    }

    #[test]
    fn svd_columns_are_orthonormal() {
        let a = random_matrix(8, 5, 3);
        let Svd { u, v, .. } = svd(&a).unwrap();
        for m in [&u, &v] {
            for j in 0..m.cols() {
                for k in j..m.cols() {
                    let dot: f64 = (0..m.rows()).map(|i| m.get(i, j) * m.get(i, k)).sum();
                    let expect = if j == k { 1.0 } else { 0.0 };
                    assert!((dot - expect).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn pseudoinverse_of_identity_is_identity() {
        let p = pseudoinverse(&RealMatrix::identity(4).unwrap(), DEFAULT_RCOND).unwrap();
        assert!(rel_frobenius_diff(&RealMatrix::identity(4).unwrap(), &p) < 1e-14);
    }

    #[test]
    fn pseudoinverse_zeroes_zero_singular_values() {
        let p = pseudoinverse(&diag(&[2.0, 0.0]), DEFAULT_RCOND).unwrap();
        assert!((p.get(0, 0) - 0.5).abs() < 1e-14);
        assert_eq!(p.get(1, 1), 0.0);
        assert_eq!(p.get(0, 1), 0.0);
        assert_eq!(p.get(1, 0), 0.0);
    }

    #[test]
    fn pseudoinverse_satisfies_penrose_conditions() {
        let a = random_matrix(5, 3, 7);
        let p = pseudoinverse(&a, DEFAULT_RCOND).unwrap();

        let apa = a.matmul(&p).unwrap().matmul(&a).unwrap();
        assert!(rel_frobenius_diff(&a, &apa) < 1e-10);

        let pap = p.matmul(&a).unwrap().matmul(&p).unwrap();
        assert!(rel_frobenius_diff(&p, &pap) < 1e-10);

        let ap = a.matmul(&p).unwrap();
        assert!(rel_frobenius_diff(&ap, &ap.transpose()) < 1e-10);
        let pa = p.matmul(&a).unwrap();
        assert!(rel_frobenius_diff(&pa, &pa.transpose()) < 1e-10);
    }

    #[test]
    fn min_norm_lsq_solves_identity_system() {
        let h = RealMatrix::identity(2).unwrap();
        let y = RealVector::from_slice(&[1.0, -1.0]).unwrap();
        let beta = min_norm_lsq(&h, &y, DEFAULT_RCOND).unwrap();
        assert!((beta.get(0) - 1.0).abs() < 1e-14);
        assert!((beta.get(1) + 1.0).abs() < 1e-14);
    }

    #[test]
    fn min_norm_lsq_picks_smallest_solution_on_underdetermined_system() {
        // beta_1 + beta_2 = 2 has a line of solutions; the minimal-norm
        // one splits the mass evenly.
        let h = RealMatrix::from_rows(&[vec![1.0, 1.0]]).unwrap();
        let y = RealVector::from_slice(&[2.0]).unwrap();
        let beta = min_norm_lsq(&h, &y, DEFAULT_RCOND).unwrap();
        assert!((beta.get(0) - 1.0).abs() < 1e-12);
        assert!((beta.get(1) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn min_norm_lsq_matches_normal_equations_on_full_rank_system() {
        // Independent oracle: solve H^T H beta = H^T y by LU, which never
        // touches the SVD path.
        let h = random_matrix(8, 5, 21);
        let y = random_vector(8, 22);
        let beta = min_norm_lsq(&h, &y, DEFAULT_RCOND).unwrap();

        let hth = h.inner().tr_mul(h.inner());
        let hty = h.inner().tr_mul(y.inner());
        let oracle = hth.lu().solve(&hty).expect("full-rank system");

        let rel: f64 = (0..5)
            .map(|i| (beta.get(i) - oracle[i]).powi(2))
            .sum::<f64>()
            .sqrt()
            / oracle.norm();
        assert!(rel < 1e-8, "relative deviation {rel}");
    }

    #[test]
    fn min_norm_lsq_rejects_dimension_mismatch() {
        let h = RealMatrix::identity(3).unwrap();
        let y = RealVector::from_slice(&[1.0, -1.0]).unwrap();
        assert!(matches!(
            min_norm_lsq(&h, &y, DEFAULT_RCOND),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn smallest_nonzero_singular_value_on_diagonals() {
        assert!((smallest_nonzero_singular_value(&diag(&[3.0, 1.0]), DEFAULT_RCOND).unwrap() - 1.0).abs() < 1e-14);
        // The exact zero is excluded, not reported.
        assert!((smallest_nonzero_singular_value(&diag(&[1.0, 0.0]), 1e-12).unwrap() - 1.0).abs() < 1e-14);
        // Zero matrix keeps nothing above the cutoff.
        assert_eq!(
            smallest_nonzero_singular_value(&RealMatrix::zeros(2, 2).unwrap(), DEFAULT_RCOND).unwrap(),
            0.0
        );
    }

    #[test]
    fn adding_random_columns_raises_smallest_singular_value_on_average() {
        // Monte Carlo check on column-normalized random matrices: growing
        // M from N to 4N should not shrink the mean smallest retained
        // singular value.
        let n = 20;
        let mut means = Vec::new();
        for &m in &[n, 2 * n, 3 * n, 4 * n] {
            let mut total = 0.0;
            for seed in 0..20 {
                let mut a = random_matrix(n, m, 1000 + seed).inner().clone();
                for mut col in a.column_iter_mut() {
                    let norm = col.norm();
                    col.scale_mut(1.0 / norm);
                }
                let a = RealMatrix::from_inner(a).unwrap();
                total += smallest_nonzero_singular_value(&a, DEFAULT_RCOND).unwrap();
            }
            means.push(total / 20.0);
        }
        for w in means.windows(2) {
            assert!(w[1] >= w[0], "means not non-decreasing: {means:?}");
        }
    }

    #[test]
    fn rcond_must_be_non_negative() {
        let a = RealMatrix::identity(2).unwrap();
        assert!(pseudoinverse(&a, -1.0).is_err());
        assert!(pseudoinverse(&a, f64::NAN).is_err());
    }
}
