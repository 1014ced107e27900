//! Dense real linear algebra: SVD-based pseudoinverse, symmetric
//! positive-definite solves, regularized Gram matrices, and the two-block
//! pseudoinverse identity used to cross-check aggregation.
//!
//! All routines work on row-major `f64` matrices ([`Matrix`]). Factorizations
//! are delegated to LAPACK; matrix products go through `ndarray`. Explicit
//! inverses are never formed — everything is a solve against a factorization
//! or an SVD.

use ndarray::prelude::*;
use ndarray_linalg::{Cholesky, Diag, JobSvd, SolveTriangular, SVDDC, UPLO};
use std::sync::Once;

use crate::error::{Error, Result};

/// Dense 64-bit real matrix, row-major. The universal carrier for embeddings,
/// one-hot labels, weights and Gram matrices.
pub type Matrix = Array2<f64>;

static BLAS_INIT: Once = Once::new();

extern "C" {
    fn openblas_set_num_threads(num: std::os::raw::c_int);
}

/// Pin OpenBLAS to one thread. Parallelism in this crate lives at the client
/// level (rayon); letting BLAS spawn its own pool on top of that oversubscribes
/// the CPU and has proven flaky in containerized environments.
fn ensure_blas_init() {
    BLAS_INIT.call_once(|| unsafe {
        openblas_set_num_threads(1);
    });
}

/// Default reciprocal condition number for rank decisions:
/// machine epsilon times the larger matrix dimension.
pub fn default_rcond(rows: usize, cols: usize) -> f64 {
    f64::EPSILON * rows.max(cols) as f64
}

fn ensure_finite(name: &str, m: &Matrix) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Numerical(format!("{name} contains NaN or Inf")))
    }
}

/// Moore–Penrose pseudoinverse via SVD.
///
/// Singular values at or below `rcond * sigma_max` are treated as zero. The
/// result has shape `cols x rows` and satisfies the four Penrose conditions
/// within numerical tolerance.
pub fn pinv(a: &Matrix, rcond: f64) -> Result<Matrix> {
    ensure_finite("pinv input", a)?;
    if rcond < 0.0 || !rcond.is_finite() {
        return Err(Error::contract(format!("pinv: rcond must be >= 0, got {rcond}")));
    }
    let (rows, cols) = a.dim();
    if rows == 0 || cols == 0 {
        return Ok(Matrix::zeros((cols, rows)));
    }
    ensure_blas_init();
    let (u, s, vt) = a
        .svddc(JobSvd::Some)
        .map_err(|e| Error::Numerical(format!("SVD failed: {e}")))?;
    let u = u.expect("JobSvd::Some returns U");
    let mut vt = vt.expect("JobSvd::Some returns V^T");
    let cutoff = rcond * s[0];
    for (i, &sigma) in s.iter().enumerate() {
        let inv = if sigma > cutoff && sigma > 0.0 { 1.0 / sigma } else { 0.0 };
        vt.row_mut(i).mapv_inplace(|v| v * inv);
    }
    let result = vt.t().dot(&u.t());
    ensure_finite("pinv result", &result)?;
    Ok(result)
}

/// Singular values of `a`, largest first.
pub fn singular_values(a: &Matrix) -> Result<Array1<f64>> {
    ensure_blas_init();
    let (_, s, _) = a
        .svddc(JobSvd::None)
        .map_err(|e| Error::Numerical(format!("SVD failed: {e}")))?;
    Ok(s)
}

/// Cholesky factorization of a symmetric positive-definite matrix, kept
/// around so repeated solves against the same matrix reuse the factor.
#[derive(Debug, Clone)]
pub struct SpdFactor {
    lower: Matrix,
}

impl SpdFactor {
    /// Factor `c = L L^T`. Fails if `c` is not numerically positive definite.
    pub fn new(c: &Matrix) -> Result<SpdFactor> {
        if c.nrows() != c.ncols() {
            return Err(Error::contract(format!(
                "SpdFactor: matrix must be square, got {}x{}",
                c.nrows(),
                c.ncols()
            )));
        }
        ensure_blas_init();
        let lower = c
            .cholesky(UPLO::Lower)
            .map_err(|e| Error::Numerical(format!("Cholesky failed (matrix not positive definite): {e}")))?;
        Ok(SpdFactor { lower })
    }

    pub fn dim(&self) -> usize {
        self.lower.nrows()
    }

    /// Solve `C x = b` for a matrix right-hand side using the stored factor.
    pub fn solve(&self, b: &Matrix) -> Result<Matrix> {
        if b.nrows() != self.dim() {
            return Err(Error::contract(format!(
                "SpdFactor::solve: rhs has {} rows, expected {}",
                b.nrows(),
                self.dim()
            )));
        }
        if b.ncols() == 0 {
            return Ok(b.clone());
        }
        ensure_blas_init();
        // L z = b, then L^T x = z.
        let z = self
            .lower
            .solve_triangular(UPLO::Lower, Diag::NonUnit, b)
            .map_err(|e| Error::Numerical(format!("triangular solve failed: {e}")))?;
        let x = self
            .lower
            .t()
            .solve_triangular(UPLO::Upper, Diag::NonUnit, &z)
            .map_err(|e| Error::Numerical(format!("triangular solve failed: {e}")))?;
        Ok(x)
    }
}

/// Solution of an SPD system, with a note when the solver had to degrade.
#[derive(Debug, Clone)]
pub struct SpdSolution {
    pub x: Matrix,
    /// True when `c` was not positive definite and the solution was computed
    /// as `pinv(c) * b` instead of via Cholesky.
    pub pinv_fallback: bool,
}

/// Solve `C Z = B` with `C` square symmetric.
///
/// Prefers a Cholesky factorization; if `C` is not positive definite the
/// solve degrades to `pinv(C) * B` and reports it through
/// [`SpdSolution::pinv_fallback`].
pub fn spd_solve(c: &Matrix, b: &Matrix) -> Result<SpdSolution> {
    if c.nrows() != c.ncols() {
        return Err(Error::contract(format!(
            "spd_solve: C must be square, got {}x{}",
            c.nrows(),
            c.ncols()
        )));
    }
    if b.nrows() != c.nrows() {
        return Err(Error::contract(format!(
            "spd_solve: B has {} rows but C is {}x{}",
            b.nrows(),
            c.nrows(),
            c.ncols()
        )));
    }
    match SpdFactor::new(c) {
        Ok(factor) => {
            let x = factor.solve(b)?;
            ensure_finite("spd_solve result", &x)?;
            Ok(SpdSolution { x, pinv_fallback: false })
        }
        Err(_) => {
            let x = pinv(c, default_rcond(c.nrows(), c.ncols()))?.dot(b);
            ensure_finite("spd_solve result", &x)?;
            Ok(SpdSolution { x, pinv_fallback: true })
        }
    }
}

/// Regularized Gram matrix `X^T X + gamma I`.
///
/// The product is symmetrized entry-by-entry afterwards so the output is
/// exactly symmetric (entry (i,j) bit-equal to (j,i)), which keeps the
/// downstream Cholesky factorizations stable.
pub fn gram(x: &Matrix, gamma: f64) -> Result<Matrix> {
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(Error::contract(format!("gram: gamma must be >= 0, got {gamma}")));
    }
    let d = x.ncols();
    let mut m = x.t().dot(x);
    for i in 0..d {
        for j in (i + 1)..d {
            let v = 0.5 * (m[[i, j]] + m[[j, i]]);
            m[[i, j]] = v;
            m[[j, i]] = v;
        }
    }
    if gamma > 0.0 {
        for i in 0..d {
            m[[i, i]] += gamma;
        }
    }
    ensure_finite("gram result", &m)?;
    Ok(m)
}

/// Pseudoinverse of the row-stacked matrix `[Xu; Xv]` computed from its
/// blocks, each of which must have full column rank.
///
/// Returns `[U V]` where
/// `U = [I - Ru Cv + Ru Cv (Cu + Cv)^-1 Cv] Xu^+` with `Cu = Xu^T Xu`,
/// `Ru = Cu^-1`, and symmetrically for `V`. Equals `pinv` of the stacked
/// matrix; all inverses are realized as Cholesky solves.
pub fn block_pinv(xu: &Matrix, xv: &Matrix) -> Result<Matrix> {
    if xu.ncols() != xv.ncols() {
        return Err(Error::contract(format!(
            "block_pinv: blocks must share column count, got {} and {}",
            xu.ncols(),
            xv.ncols()
        )));
    }
    check_full_column_rank("Xu", xu)?;
    check_full_column_rank("Xv", xv)?;

    let cu = gram(xu, 0.0)?;
    let cv = gram(xv, 0.0)?;
    let fu = SpdFactor::new(&cu)
        .map_err(|_| Error::RankDeficient("block_pinv: block Xu has a singular Gram matrix".into()))?;
    let fv = SpdFactor::new(&cv)
        .map_err(|_| Error::RankDeficient("block_pinv: block Xv has a singular Gram matrix".into()))?;
    let sum = &cu + &cv;
    let fsum = SpdFactor::new(&sum)
        .map_err(|e| Error::Numerical(format!("block_pinv: Cu + Cv not positive definite: {e}")))?;

    let ubar = block_half(&fu, &cv, &fsum, xu)?;
    let vbar = block_half(&fv, &cu, &fsum, xv)?;
    let out = ndarray::concatenate(Axis(1), &[ubar.view(), vbar.view()])
        .map_err(|e| Error::Numerical(format!("block_pinv: concatenate failed: {e}")))?;
    ensure_finite("block_pinv result", &out)?;
    Ok(out)
}

/// One of the two halves of the block pseudoinverse:
/// `[I - R Co + R Co (Cu+Cv)^-1 Co] X^+` where `R = C^-1` belongs to this
/// block, `Co` is the other block's Gram matrix, and `X^+ = C^-1 X^T`.
fn block_half(f_own: &SpdFactor, c_other: &Matrix, f_sum: &SpdFactor, x: &Matrix) -> Result<Matrix> {
    let x_pinv = f_own.solve(&x.t().to_owned())?;
    let r_co = f_own.solve(c_other)?;
    let inner = f_sum.solve(&c_other.dot(&x_pinv))?;
    Ok(&x_pinv - &r_co.dot(&x_pinv) + r_co.dot(&inner))
}

fn check_full_column_rank(name: &str, x: &Matrix) -> Result<()> {
    if x.nrows() < x.ncols() {
        return Err(Error::RankDeficient(format!(
            "block {name} is {}x{} (fewer rows than columns, cannot have full column rank)",
            x.nrows(),
            x.ncols()
        )));
    }
    let s = singular_values(x)?;
    let rcond = default_rcond(x.nrows(), x.ncols());
    let smax = s.iter().cloned().fold(0.0f64, f64::max);
    let smin = s.iter().cloned().fold(f64::INFINITY, f64::min);
    if smax == 0.0 || smin <= rcond * smax {
        return Err(Error::RankDeficient(format!(
            "block {name} is rank-deficient (sigma_min = {smin:.3e}, sigma_max = {smax:.3e})"
        )));
    }
    Ok(())
}
