//! Cyclic Jacobi eigensolver for small dense Hermitian matrices.
//!
//! Every invariant-subspace block is at most 4×4, so one deterministic code
//! path serves all of them. Output eigenvalues ascend; each eigenvector has its
//! largest-magnitude component real and positive.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub const HERMITIAN_TOL: f64 = 1e-12;
const CONVERGENCE: f64 = 1e-14;
const MAX_SWEEPS: usize = 64;

#[derive(Clone, Debug)]
pub struct EigenSystem {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Column `i` is the eigenvector for `values[i]`.
    pub vectors: DMatrix<C64>,
}

impl EigenSystem {
    pub fn vector(&self, i: usize) -> DVector<C64> {
        self.vectors.column(i).into_owned()
    }
}

fn frobenius(a: &DMatrix<C64>) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn off_diagonal(a: &DMatrix<C64>) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Largest `|a_ij − conj(a_ji)|`.
pub fn hermiticity_defect(a: &DMatrix<C64>) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Diagonalizes a Hermitian matrix.
///
/// Fails with [`Error::Validation`] if the input is not square or departs from
/// Hermiticity by more than `1e-12 · max(1, ‖A‖)`.
pub fn eigh(matrix: &DMatrix<C64>) -> Result<EigenSystem> {
    let n = matrix.nrows();
    if matrix.ncols() != n {
        return Err(Error::Validation(format!(
            "matrix is {}x{}, not square",
            n,
            matrix.ncols()
        )));
    }
    let norm = frobenius(matrix);
    let defect = hermiticity_defect(matrix);
    if defect > HERMITIAN_TOL * norm.max(1.0) {
        return Err(Error::Validation(format!(
            "matrix is not Hermitian (defect {defect:.3e})"
        )));
    }

    // symmetrize so rounding in the input cannot leak into the sweep
    let mut a = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            C64::new(matrix[(i, i)].re, 0.0)
        } else {
            (matrix[(i, j)] + matrix[(j, i)].conj()) * 0.5
        }
    });
    let mut v = DMatrix::<C64>::identity(n, n);
    let threshold = CONVERGENCE * norm;

    for _ in 0..MAX_SWEEPS {
        if off_diagonal(&a) <= threshold {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re).then(i.cmp(&j)));
    let values: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vectors = DMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);

    reorthonormalize_clusters(&values, &mut vectors, norm);
    for c in 0..n {
        fix_phase(&mut vectors, c);
    }
    Ok(EigenSystem { values, vectors })
}

/// Annihilates `a[p][q]` with a unitary acting on rows and columns `p`, `q`.
fn rotate(a: &mut DMatrix<C64>, v: &mut DMatrix<C64>, p: usize, q: usize) {
    let apq = a[(p, q)];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    // phase that makes the pivot real, then a real Givens rotation
    let phase = apq / r;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let tau = (aqq - app) / (2.0 * r);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    // U restricted to (p, q): [[c, s], [-s·e^{-iφ}, c·e^{-iφ}]]
    let u_pp = C64::new(c, 0.0);
    let u_pq = C64::new(s, 0.0);
    let u_qp = -phase.conj() * s;
    let u_qq = phase.conj() * c;

    let n = a.nrows();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * u_pp + akq * u_qp;
        a[(k, q)] = akp * u_pq + akq * u_qq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = u_pp.conj() * apk + u_qp.conj() * aqk;
        a[(q, k)] = u_pq.conj() * apk + u_qq.conj() * aqk;
    }
    a[(p, q)] = C64::new(0.0, 0.0);
    a[(q, p)] = C64::new(0.0, 0.0);
    a[(p, p)] = C64::new(app - t * r, 0.0);
    a[(q, q)] = C64::new(aqq + t * r, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * u_pp + vkq * u_qp;
        v[(k, q)] = vkp * u_pq + vkq * u_qq;
    }
}

/// Modified Gram-Schmidt in index order inside each run of equal eigenvalues.
fn reorthonormalize_clusters(values: &[f64], vectors: &mut DMatrix<C64>, norm: f64) {
    let n = values.len();
    let tol = 1e-12 * norm.max(1.0);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[end] - values[end - 1] <= tol {
            end += 1;
        }
        if end - start > 1 {
            for c in start..end {
                for prev in start..c {
                    let proj: C64 = (0..n)
                        .map(|r| vectors[(r, prev)].conj() * vectors[(r, c)])
                        .sum();
                    for r in 0..n {
                        let x = vectors[(r, prev)];
                        vectors[(r, c)] -= x * proj;
                    }
                }
                let nrm: f64 = (0..n).map(|r| vectors[(r, c)].norm_sqr()).sum::<f64>().sqrt();
                for r in 0..n {
                    vectors[(r, c)] /= nrm;
                }
            }
        }
        start = end;
    }
}

fn fix_phase(vectors: &mut DMatrix<C64>, c: usize) {
    let n = vectors.nrows();
    let max = (0..n).map(|r| vectors[(r, c)].norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return;
    }
    // first component within rounding of the maximum, so near-ties resolve by index
    let pivot = (0..n)
        .find(|&r| vectors[(r, c)].norm() >= max * (1.0 - 1e-12))
        .unwrap_or(0);
    let z = vectors[(pivot, c)];
    let rot = z.conj() / z.norm();
    for r in 0..n {
        vectors[(r, c)] *= rot;
    }
    vectors[(pivot, c)] = C64::new(vectors[(pivot, c)].re, 0.0);
}
