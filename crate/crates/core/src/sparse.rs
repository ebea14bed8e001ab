//! Sparse matrices (CSR, via `sprs`) and a symmetric LDLᵀ solver with AMD ordering.

use sprs::{CsMat, PermOwned, TriMat};
use sprs_ldl::{LdlNumeric, LdlSymbolic};

use crate::error::{Error, Result};

pub type SpMat = CsMat<f64>;

/// Accumulates (row, col, value) entries; `build` sorts them and sums duplicates
/// in insertion order, so the result does not depend on how work was split.
#[derive(Debug, Clone)]
pub struct TripletBuilder {
    rows: usize,
    cols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl TripletBuilder {
    pub fn new(rows: usize, cols: usize) -> TripletBuilder {
        TripletBuilder {
            rows,
            cols,
            entries: Vec::new(),
        }
    }

    pub fn with_capacity(rows: usize, cols: usize, cap: usize) -> TripletBuilder {
        TripletBuilder {
            rows,
            cols,
            entries: Vec::with_capacity(cap),
        }
    }

    #[inline]
    pub fn push(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.rows && j < self.cols);
        if v != 0.0 {
            self.entries.push((i, j, v));
        }
    }

    pub fn build(mut self) -> SpMat {
        self.entries.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut indptr = vec![0usize; self.rows + 1];
        let mut indices = Vec::with_capacity(self.entries.len());
        let mut data: Vec<f64> = Vec::with_capacity(self.entries.len());
        let mut last: Option<(usize, usize)> = None;
        for &(i, j, v) in &self.entries {
            if last == Some((i, j)) {
                *data.last_mut().unwrap() += v;
            } else {
                indices.push(j);
                data.push(v);
                indptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..self.rows {
            indptr[i + 1] += indptr[i];
        }
        CsMat::new((self.rows, self.cols), indptr, indices, data)
    }
}

pub fn zeros(rows: usize, cols: usize) -> SpMat {
    CsMat::zero((rows, cols))
}

/// y = A x
pub fn spmv(a: &SpMat, x: &[f64]) -> Vec<f64> {
    assert_eq!(a.cols(), x.len());
    let mut y = vec![0.0; a.rows()];
    if a.is_csr() {
        for (i, row) in a.outer_iterator().enumerate() {
            let mut s = 0.0;
            for (j, v) in row.iter() {
                s += v * x[j];
            }
            y[i] = s;
        }
    } else {
        for (j, col) in a.outer_iterator().enumerate() {
            for (i, v) in col.iter() {
                y[i] += v * x[j];
            }
        }
    }
    y
}

/// y = Aᵀ x
pub fn spmv_t(a: &SpMat, x: &[f64]) -> Vec<f64> {
    assert_eq!(a.rows(), x.len());
    let mut y = vec![0.0; a.cols()];
    for (i, row) in a.outer_iterator().enumerate() {
        for (j, v) in row.iter() {
            y[j] += v * x[i];
        }
    }
    y
}

pub fn quad_form(a: &SpMat, x: &[f64]) -> f64 {
    dot(x, &spmv(a, x))
}

pub fn bilinear(a: &SpMat, x: &[f64], y: &[f64]) -> f64 {
    dot(x, &spmv(a, y))
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Infinity norm of a sparse matrix (max row sum).
pub fn mat_norm_inf(a: &SpMat) -> f64 {
    let csr = if a.is_csr() { a.clone() } else { a.to_csr() };
    csr.outer_iterator()
        .map(|r| r.iter().map(|(_, v)| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// α A + β B (same shape).
pub fn lin_comb(alpha: f64, a: &SpMat, beta: f64, b: &SpMat) -> SpMat {
    assert_eq!(a.shape(), b.shape());
    let mut t = TripletBuilder::with_capacity(a.rows(), a.cols(), a.nnz() + b.nnz());
    for (m, s) in [(a, alpha), (b, beta)] {
        for (i, row) in m.outer_iterator().enumerate() {
            for (j, v) in row.iter() {
                t.push(i, j, s * v);
            }
        }
    }
    t.build()
}

pub fn transpose(a: &SpMat) -> SpMat {
    let mut t = TripletBuilder::with_capacity(a.cols(), a.rows(), a.nnz());
    for (i, row) in a.outer_iterator().enumerate() {
        for (j, v) in row.iter() {
            t.push(j, i, *v);
        }
    }
    t.build()
}

/// Leading `n × n` block.
pub fn leading_block(a: &SpMat, n: usize) -> SpMat {
    let mut t = TripletBuilder::new(n, n);
    for (i, row) in a.outer_iterator().enumerate().take(n) {
        for (j, v) in row.iter() {
            if j < n {
                t.push(i, j, *v);
            }
        }
    }
    t.build()
}

/// Embeds `a` into a larger zero matrix at offset (`r0`, `c0`).
pub fn embed(t: &mut TripletBuilder, a: &SpMat, r0: usize, c0: usize, scale: f64) {
    for (i, row) in a.outer_iterator().enumerate() {
        for (j, v) in row.iter() {
            t.push(r0 + i, c0 + j, scale * v);
        }
    }
}

/// [A Bᵀ; B −s C]
pub fn saddle_point(a: &SpMat, b: &SpMat, c: &SpMat, s: f64) -> SpMat {
    let n = a.rows();
    let m = c.rows();
    let mut t = TripletBuilder::with_capacity(n + m, n + m, a.nnz() + 2 * b.nnz() + c.nnz());
    embed(&mut t, a, 0, 0, 1.0);
    for (i, row) in b.outer_iterator().enumerate() {
        for (j, v) in row.iter() {
            t.push(n + i, j, *v);
            t.push(j, n + i, *v);
        }
    }
    embed(&mut t, c, n, n, -s);
    t.build()
}

/// P A Pᵀ with `perm[new] = old`.
pub fn permute_symmetric(a: &SpMat, perm: &[usize]) -> SpMat {
    let n = a.rows();
    let mut inv = vec![0usize; n];
    for (new, &old) in perm.iter().enumerate() {
        inv[old] = new;
    }
    let mut t = TripletBuilder::with_capacity(n, n, a.nnz());
    for (i, row) in a.outer_iterator().enumerate() {
        for (j, v) in row.iter() {
            t.push(inv[i], inv[j], *v);
        }
    }
    t.build()
}

/// Relative asymmetry max|A − Aᵀ| / max|A|.
pub fn asymmetry(a: &SpMat) -> f64 {
    let at = transpose(a);
    let d = lin_comb(1.0, a, -1.0, &at);
    let dm = d.data().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let am = a.data().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if am == 0.0 {
        0.0
    } else {
        dm / am
    }
}

pub fn to_dense(a: &SpMat) -> nalgebra::DMatrix<f64> {
    let mut m = nalgebra::DMatrix::zeros(a.rows(), a.cols());
    for (i, row) in a.outer_iterator().enumerate() {
        for (j, v) in row.iter() {
            m[(i, j)] += *v;
        }
    }
    m
}

pub fn from_trimat(t: TriMat<f64>) -> SpMat {
    t.to_csr()
}

/// Sparse LDLᵀ factorization (no pivoting) of a symmetric matrix under an AMD ordering.
pub struct LdlFactor {
    numeric: LdlNumeric<f64, usize>,
    n: usize,
}

impl std::fmt::Debug for LdlFactor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LdlFactor").field("n", &self.n).finish()
    }
}

impl LdlFactor {
    pub fn new(a: &SpMat) -> Result<LdlFactor> {
        let n = a.rows();
        if a.cols() != n {
            return Err(Error::Factorization("matrix is not square".into()));
        }
        let a = if a.is_csr() { a.clone() } else { a.to_csr() };
        // structure of A + Aᵀ including the diagonal, as AMD expects
        let mut pattern = TripletBuilder::with_capacity(n, n, 2 * a.nnz() + n);
        for (i, row) in a.outer_iterator().enumerate() {
            for (j, _) in row.iter() {
                pattern.push(i, j, 1.0);
                pattern.push(j, i, 1.0);
            }
        }
        for i in 0..n {
            pattern.push(i, i, 1.0);
        }
        let pat = pattern.build();
        let perm: Vec<usize> = if n == 0 {
            Vec::new()
        } else {
            let (p, _, _) = amd::order::<usize>(
                n,
                pat.indptr().raw_storage(),
                pat.indices(),
                &amd::Control::default(),
            )
            .map_err(|s| Error::Factorization(format!("AMD ordering failed: {s:?}")))?;
            p
        };
        // the factorization walks the full pattern; make sure every diagonal exists
        let mut full = TripletBuilder::with_capacity(n, n, a.nnz() + n);
        for (i, row) in a.outer_iterator().enumerate() {
            for (j, v) in row.iter() {
                full.entries.push((i, j, *v));
            }
        }
        for i in 0..n {
            full.entries.push((i, i, 0.0));
        }
        let full = full.build();
        let symbolic = LdlSymbolic::new_perm(
            full.view(),
            PermOwned::new(perm),
            sprs::SymmetryCheck::DontCheckSymmetry,
        );
        let numeric = symbolic
            .factor(full.view())
            .map_err(|e| Error::Factorization(format!("{e}")))?;
        if numeric.d().iter().any(|d| !d.is_finite()) {
            return Err(Error::Factorization("non-finite pivot".into()));
        }
        Ok(LdlFactor { numeric, n })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn diag(&self) -> &[f64] {
        self.numeric.d()
    }

    /// (positive, negative, zero) pivot counts; the inertia for quasidefinite matrices.
    pub fn inertia(&self) -> (usize, usize, usize) {
        let mut c = (0, 0, 0);
        for &d in self.diag() {
            if d > 0.0 {
                c.0 += 1;
            } else if d < 0.0 {
                c.1 += 1;
            } else {
                c.2 += 1;
            }
        }
        c
    }

    pub fn is_positive_definite(&self) -> bool {
        self.diag().iter().all(|&d| d > 0.0)
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        assert_eq!(rhs.len(), self.n);
        self.numeric.solve(rhs.to_vec())
    }
}

/// Outcome of a checked solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    /// ‖b − A x‖₂ / ‖b‖₂
    pub relative_residual: f64,
    /// ‖b − A x‖∞ / (‖A‖∞ ‖x‖∞ + ‖b‖∞)
    pub backward_error: f64,
    pub refinement_steps: usize,
}

pub const BACKWARD_ERROR_TOL: f64 = 1e-10;

/// Solves A x = b with iterative refinement and a mandatory residual check.
pub fn solve_checked(a: &SpMat, factor: &LdlFactor, b: &[f64]) -> Result<(Vec<f64>, SolveStats)> {
    let n = b.len();
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        return Ok((
            vec![0.0; n],
            SolveStats {
                relative_residual: 0.0,
                backward_error: 0.0,
                refinement_steps: 0,
            },
        ));
    }
    let anorm = mat_norm_inf(a);
    let mut x = factor.solve(b);
    let residual = |x: &[f64]| -> Vec<f64> {
        let ax = spmv(a, x);
        b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect()
    };
    let mut r = residual(&x);
    let berr = |x: &[f64], r: &[f64]| norm_inf(r) / (anorm * norm_inf(x) + norm_inf(b));
    let mut steps = 0;
    let mut be = berr(&x, &r);
    while steps < 5 && be > 1e-15 {
        let dx = factor.solve(&r);
        let xn: Vec<f64> = x.iter().zip(&dx).map(|(a, d)| a + d).collect();
        let rn = residual(&xn);
        let ben = berr(&xn, &rn);
        steps += 1;
        if !(ben < be) {
            break;
        }
        x = xn;
        r = rn;
        be = ben;
    }
    let stats = SolveStats {
        relative_residual: norm2(&r) / bnorm,
        backward_error: be,
        refinement_steps: steps,
    };
    if !(stats.backward_error <= BACKWARD_ERROR_TOL) || x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Residual {
            residual: stats.backward_error,
            tol: BACKWARD_ERROR_TOL,
        });
    }
    Ok((x, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn random_spd(n: usize, seed: u64) -> SpMat {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut t = TripletBuilder::new(n, n);
        for i in 0..n {
            t.push(i, i, 4.0 + rng.gen::<f64>());
            if i + 1 < n {
                let v = rng.gen::<f64>() - 0.5;
                t.push(i, i + 1, v);
                t.push(i + 1, i, v);
            }
            if i + 7 < n {
                let v = 0.3 * (rng.gen::<f64>() - 0.5);
                t.push(i, i + 7, v);
                t.push(i + 7, i, v);
            }
        }
        t.build()
    }

    #[test]
    fn builder_sums_duplicates() {
        let mut t = TripletBuilder::new(2, 2);
        t.push(1, 0, 1.0);
        t.push(0, 1, 2.0);
        t.push(1, 0, 3.0);
        let m = t.build();
        assert_eq!(m.get(1, 0), Some(&4.0));
        assert_eq!(m.get(0, 1), Some(&2.0));
        assert_eq!(m.nnz(), 2);
    }

    #[test]
    fn ldl_solves_spd_and_saddle() {
        let a = random_spd(60, 3);
        let f = LdlFactor::new(&a).unwrap();
        assert!(f.is_positive_definite());
        let b: Vec<f64> = (0..60).map(|i| (i as f64).sin()).collect();
        let (x, st) = solve_checked(&a, &f, &b).unwrap();
        let dense = to_dense(&a);
        let xd = dense
            .lu()
            .solve(&nalgebra::DVector::from_vec(b.clone()))
            .unwrap();
        for i in 0..60 {
            assert!((x[i] - xd[i]).abs() < 1e-12);
        }
        assert!(st.relative_residual < 1e-13);

        let mut bt = TripletBuilder::new(10, 60);
        for i in 0..10 {
            bt.push(i, 3 * i, 1.0);
            bt.push(i, 3 * i + 1, -0.5);
        }
        let b_mat = bt.build();
        let c = random_spd(10, 5);
        let k = saddle_point(&a, &b_mat, &c, 1e-4);
        let f = LdlFactor::new(&k).unwrap();
        assert_eq!(f.inertia(), (60, 10, 0));
        let rhs: Vec<f64> = (0..70).map(|i| (i as f64 * 0.3).cos()).collect();
        let (x, _) = solve_checked(&k, &f, &rhs).unwrap();
        let xd = to_dense(&k)
            .lu()
            .solve(&nalgebra::DVector::from_vec(rhs))
            .unwrap();
        for i in 0..70 {
            assert!((x[i] - xd[i]).abs() < 1e-9 * (1.0 + xd[i].abs()));
        }
    }

    #[test]
    fn permutation_and_blocks() {
        let a = random_spd(12, 9);
        let perm: Vec<usize> = (0..12).rev().collect();
        let p = permute_symmetric(&a, &perm);
        assert_eq!(p.get(0, 0), a.get(11, 11));
        let l = leading_block(&a, 5);
        assert_eq!(l.rows(), 5);
        assert_eq!(l.get(4, 4), a.get(4, 4));
        assert_eq!(asymmetry(&a), 0.0);
    }
}
