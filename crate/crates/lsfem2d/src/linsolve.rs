//! Solvers for the assembled symmetric systems: Jacobi-preconditioned
//! conjugate gradients, a dense LU fallback for small systems, and a power
//! iteration estimate of the smallest eigenvalue used by the coercivity probe.

use crate::assembly::LsSystem;
use crate::sparse::CsrMatrix;
use crate::{Error, Result};

/// Outcome of a linear solve.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub solution: Vec<f64>,
    pub iterations: usize,
    pub relative_residual: f64,
    pub converged: bool,
    /// Set when CG encountered nonpositive curvature `p' A p <= 0`, which
    /// signals loss of discrete coercivity (the assembled quadratic form is
    /// positive semidefinite by construction, so this only fires on singular
    /// or numerically indefinite systems).
    pub breakdown: bool,
}

const SYMMETRY_TOL: f64 = 1e-10;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Jacobi-preconditioned conjugate gradients with zero start vector.
pub fn cg_solve(sys: &LsSystem, tol: f64, maxit: usize) -> Result<SolveReport> {
    let a = &sys.matrix;
    if a.asymmetry() > SYMMETRY_TOL {
        return Err(Error::InvalidArgument(format!(
            "cg_solve requires a symmetric matrix (relative asymmetry {:.2e})",
            a.asymmetry()
        )));
    }
    cg_on_matrix(a, &sys.rhs, tol, maxit)
}

pub(crate) fn cg_on_matrix(
    a: &CsrMatrix,
    rhs: &[f64],
    tol: f64,
    maxit: usize,
) -> Result<SolveReport> {
    let n = a.n;
    let diag = a.diagonal();
    let dinv: Vec<f64> = diag
        .iter()
        .map(|&d| if d.abs() > 0.0 { 1.0 / d } else { 1.0 })
        .collect();

    let mut x = vec![0.0; n];
    let mut r = rhs.to_vec();
    let rhs_norm = dot(&r, &r).sqrt();
    if rhs_norm == 0.0 {
        return Ok(SolveReport {
            solution: x,
            iterations: 0,
            relative_residual: 0.0,
            converged: true,
            breakdown: false,
        });
    }
    let mut z: Vec<f64> = r.iter().zip(&dinv).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut breakdown = false;
    let mut iterations = 0;

    for it in 1..=maxit {
        iterations = it;
        a.mul_vec(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            breakdown = true;
            break;
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let res = dot(&r, &r).sqrt() / rhs_norm;
        if res <= tol {
            return Ok(SolveReport {
                solution: x,
                iterations,
                relative_residual: res,
                converged: true,
                breakdown: false,
            });
        }
        for i in 0..n {
            z[i] = r[i] * dinv[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let res = dot(&r, &r).sqrt() / rhs_norm;
    Ok(SolveReport {
        solution: x,
        iterations,
        relative_residual: res,
        converged: res <= tol,
        breakdown,
    })
}

/// Size limit for the dense fallback solver.
pub const DIRECT_SOLVE_LIMIT: usize = 2000;

/// Dense LU with partial pivoting; intended as an oracle for small systems.
pub fn direct_solve_small(sys: &LsSystem) -> Result<SolveReport> {
    let n = sys.matrix.n;
    if n > DIRECT_SOLVE_LIMIT {
        return Err(Error::TooLarge {
            dofs: n,
            limit: DIRECT_SOLVE_LIMIT,
        });
    }
    let mut a = sys.matrix.to_dense();
    let mut x = sys.rhs.clone();
    let mut piv: Vec<usize> = (0..n).collect();
    let scale = sys
        .matrix
        .values
        .iter()
        .fold(0.0_f64, |acc, v| acc.max(v.abs()))
        .max(f64::MIN_POSITIVE);

    for col in 0..n {
        let mut best = col;
        for row in col + 1..n {
            if a[row][col].abs() > a[best][col].abs() {
                best = row;
            }
        }
        if a[best][col].abs() <= 1e-14 * scale {
            return Err(Error::Singular { pivot: col });
        }
        a.swap(col, best);
        x.swap(col, best);
        piv.swap(col, best);
        for row in col + 1..n {
            let m = a[row][col] / a[col][col];
            a[row][col] = 0.0;
            if m != 0.0 {
                for j in col + 1..n {
                    a[row][j] -= m * a[col][j];
                }
                x[row] -= m * x[col];
            }
        }
    }
    for col in (0..n).rev() {
        x[col] /= a[col][col];
        for row in 0..col {
            x[row] -= a[row][col] * x[col];
        }
    }

    let mut res = vec![0.0; n];
    sys.matrix.mul_vec(&x, &mut res);
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..n {
        num += (res[i] - sys.rhs[i]).powi(2);
        den += sys.rhs[i].powi(2);
    }
    let rel = if den > 0.0 { (num / den).sqrt() } else { 0.0 };
    Ok(SolveReport {
        solution: x,
        iterations: 1,
        relative_residual: rel,
        converged: true,
        breakdown: false,
    })
}

/// Estimate the smallest eigenvalue of a symmetric matrix by power iteration
/// on `mu I - B`, where `mu` is the Gershgorin upper bound of the spectrum.
/// The start vector is the normalized all-ones vector; the returned value
/// approaches the true smallest eigenvalue from above as `iters` grows.
pub fn lambda_min_estimate(sys: &LsSystem, iters: usize) -> Result<f64> {
    let a = &sys.matrix;
    if a.asymmetry() > SYMMETRY_TOL {
        return Err(Error::InvalidArgument(
            "lambda_min_estimate requires a symmetric matrix".into(),
        ));
    }
    let n = a.n;
    let mu = a.gershgorin_upper();
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    let mut av = vec![0.0; n];
    let mut rayleigh = 0.0;
    for _ in 0..iters.max(1) {
        // w = (mu I - A) v
        a.mul_vec(&v, &mut av);
        let mut w: Vec<f64> = (0..n).map(|i| mu * v[i] - av[i]).collect();
        let wn = dot(&w, &w).sqrt();
        if wn == 0.0 {
            // v is an exact eigenvector of A with eigenvalue mu.
            return Ok(mu);
        }
        for wi in &mut w {
            *wi /= wn;
        }
        v = w;
        a.mul_vec(&v, &mut av);
        rayleigh = dot(&v, &av);
    }
    Ok(rayleigh)
}

/// Estimate the largest eigenvalue of a symmetric matrix by plain power
/// iteration (all-ones start).
pub fn lambda_max_estimate(sys: &LsSystem, iters: usize) -> Result<f64> {
    let a = &sys.matrix;
    if a.asymmetry() > SYMMETRY_TOL {
        return Err(Error::InvalidArgument(
            "lambda_max_estimate requires a symmetric matrix".into(),
        ));
    }
    let n = a.n;
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    let mut av = vec![0.0; n];
    let mut rayleigh = 0.0;
    for _ in 0..iters.max(1) {
        a.mul_vec(&v, &mut av);
        let nn = dot(&av, &av).sqrt();
        if nn == 0.0 {
            return Ok(0.0);
        }
        for i in 0..n {
            v[i] = av[i] / nn;
        }
        a.mul_vec(&v, &mut av);
        rayleigh = dot(&v, &av);
    }
    Ok(rayleigh)
}
