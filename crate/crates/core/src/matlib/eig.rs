//! Eigendecomposition of small real matrices.
//!
//! The 2x2 case (the short-period plant) is solved in closed form; larger
//! matrices go through a complex shifted-QR iteration with eigenvectors
//! recovered by inverse iteration. Stable short-period dynamics carry
//! complex-conjugate pairs, so all internal arithmetic is complex and the
//! caller projects back to the reals where appropriate.

use num_complex::Complex64;

use super::{CMatrix, MatError, Matrix, RCOND_SINGULAR};

const MAX_QR_SWEEPS: usize = 500;

/// Eigenvalues and eigenvector basis of a square real matrix.
///
/// Invariants checked on construction: `S * S⁻¹ ≈ I` (via a reciprocal
/// condition estimate on `S`); callers may additionally verify the
/// reconstruction residual `‖A − S Λ S⁻¹‖`.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<Complex64>,
    /// Columns are eigenvectors.
    pub vectors: CMatrix,
    pub inverse_vectors: CMatrix,
}

impl EigenDecomposition {
    /// Reconstruct `S diag(λ) S⁻¹` (complex).
    pub fn reconstruct(&self) -> CMatrix {
        self.vectors
            .matmul(&CMatrix::from_diag(&self.values))
            .matmul(&self.inverse_vectors)
    }
}

fn check_input(a: &Matrix) -> Result<(), MatError> {
    if !a.is_square() {
        return Err(MatError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    if !a.is_finite() {
        return Err(MatError::NonFinite);
    }
    Ok(())
}

/// Eigenvalues only. Never needs a well-conditioned eigenvector basis, so it
/// also works for defective matrices.
pub fn eigenvalues(a: &Matrix) -> Result<Vec<Complex64>, MatError> {
    check_input(a)?;
    let n = a.rows();
    match n {
        1 => Ok(vec![Complex64::new(a[(0, 0)], 0.0)]),
        2 => Ok(eig2_values(a)),
        _ => qr_eigenvalues(a),
    }
}

/// Full eigendecomposition `A = S diag(λ) S⁻¹`.
///
/// Errors with `NonDiagonalizable` when the eigenvector basis is numerically
/// singular (reciprocal condition estimate below `1e-12`), which covers
/// defective and near-defective matrices, including repeated eigenvalues with
/// deficient eigenspaces.
pub fn eig(a: &Matrix) -> Result<EigenDecomposition, MatError> {
    check_input(a)?;
    let n = a.rows();
    let values = match n {
        1 => vec![Complex64::new(a[(0, 0)], 0.0)],
        2 => eig2_values(a),
        _ => qr_eigenvalues(a)?,
    };
    let vectors = if n == 1 {
        CMatrix::identity(1)
    } else {
        eigenvectors_inverse_iteration(a, &values)?
    };
    let inverse_vectors = vectors.inverse().map_err(|_| MatError::NonDiagonalizable)?;
    let cond = vectors.norm_inf() * inverse_vectors.norm_inf();
    if cond <= 0.0 || 1.0 / cond < RCOND_SINGULAR {
        return Err(MatError::NonDiagonalizable);
    }
    let decomp = EigenDecomposition {
        values,
        vectors,
        inverse_vectors,
    };
    // defective matrices with exactly repeated eigenvalues can still produce
    // a numerically invertible S; the reconstruction residual exposes them
    let rec = decomp.reconstruct();
    let scale = a.max_abs().max(1.0);
    let mut residual = rec.max_abs_imag();
    let re = rec.real();
    for i in 0..n {
        for j in 0..n {
            residual = residual.max((re[(i, j)] - a[(i, j)]).abs());
        }
    }
    if residual > 1e-8 * scale {
        return Err(MatError::NonDiagonalizable);
    }
    Ok(decomp)
}

fn eig2_values(a: &Matrix) -> Vec<Complex64> {
    let tr = a[(0, 0)] + a[(1, 1)];
    let det = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)];
    let disc = Complex64::new(tr * tr - 4.0 * det, 0.0);
    let sq = disc.sqrt();
    let half = Complex64::new(tr / 2.0, 0.0);
    vec![half + sq / 2.0, half - sq / 2.0]
}

/// Complex Hessenberg reduction followed by shifted QR with Givens rotations.
fn qr_eigenvalues(a: &Matrix) -> Result<Vec<Complex64>, MatError> {
    let n = a.rows();
    let mut h = CMatrix::from_real(a);
    hessenberg(&mut h);
    let scale = h.norm_inf().max(f64::MIN_POSITIVE);
    let tol = scale * 1e-15;
    let mut hi = n; // active block is 0..hi
    let mut sweeps = 0;
    while hi > 1 {
        // deflate converged trailing entries
        let s = (h[(hi - 1, hi - 1)].norm() + h[(hi - 2, hi - 2)].norm()).max(tol);
        if h[(hi - 1, hi - 2)].norm() <= s * 1e-14 {
            h[(hi - 1, hi - 2)] = Complex64::new(0.0, 0.0);
            hi -= 1;
            continue;
        }
        sweeps += 1;
        if sweeps > MAX_QR_SWEEPS {
            return Err(MatError::ConvergenceFailure);
        }
        let mu = wilkinson_shift(&h, hi);
        qr_step(&mut h, hi, mu);
    }
    Ok((0..n).map(|i| h[(i, i)]).collect())
}

fn hessenberg(h: &mut CMatrix) {
    let n = h.rows();
    for k in 0..n.saturating_sub(2) {
        // Householder vector to zero column k below the subdiagonal
        let mut norm2 = 0.0;
        for i in (k + 1)..n {
            norm2 += h[(i, k)].norm_sqr();
        }
        let x0 = h[(k + 1, k)];
        let alpha = norm2.sqrt();
        if alpha <= 1e-300 {
            continue;
        }
        let phase = if x0.norm() > 0.0 {
            x0 / x0.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let v0 = x0 + phase * alpha;
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        v[k + 1] = v0;
        for i in (k + 2)..n {
            v[i] = h[(i, k)];
        }
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm2 <= 1e-300 {
            continue;
        }
        // H <- (I - 2 v v*/|v|²) H (I - 2 v v*/|v|²)
        for j in 0..n {
            let mut dot = Complex64::new(0.0, 0.0);
            for i in (k + 1)..n {
                dot += v[i].conj() * h[(i, j)];
            }
            let f = dot * 2.0 / vnorm2;
            for i in (k + 1)..n {
                let s = v[i] * f;
                h[(i, j)] -= s;
            }
        }
        for i in 0..n {
            let mut dot = Complex64::new(0.0, 0.0);
            for j in (k + 1)..n {
                dot += h[(i, j)] * v[j];
            }
            let f = dot * 2.0 / vnorm2;
            for j in (k + 1)..n {
                let s = f * v[j].conj();
                h[(i, j)] -= s;
            }
        }
    }
}

fn wilkinson_shift(h: &CMatrix, hi: usize) -> Complex64 {
    let a = h[(hi - 2, hi - 2)];
    let b = h[(hi - 2, hi - 1)];
    let c = h[(hi - 1, hi - 2)];
    let d = h[(hi - 1, hi - 1)];
    let tr = a + d;
    let det = a * d - b * c;
    let disc = (tr * tr - det * 4.0).sqrt();
    let l1 = (tr + disc) / 2.0;
    let l2 = (tr - disc) / 2.0;
    if (l1 - d).norm() < (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// One shifted QR step on the leading `hi`x`hi` Hessenberg block via Givens
/// rotations: H - μI = QR, H <- RQ + μI.
fn qr_step(h: &mut CMatrix, hi: usize, mu: Complex64) {
    let n = h.rows();
    for i in 0..hi {
        h[(i, i)] -= mu;
    }
    let mut rot: Vec<(Complex64, Complex64)> = Vec::with_capacity(hi - 1);
    for k in 0..(hi - 1) {
        let a = h[(k, k)];
        let b = h[(k + 1, k)];
        let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
        let (c, s) = if r <= 1e-300 {
            (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
        } else {
            (a / r, b / r)
        };
        // apply G* from the left to rows k, k+1
        for j in k..n {
            let x = h[(k, j)];
            let y = h[(k + 1, j)];
            h[(k, j)] = c.conj() * x + s.conj() * y;
            h[(k + 1, j)] = -s * x + c * y;
        }
        rot.push((c, s));
    }
    for (k, (c, s)) in rot.iter().enumerate() {
        // apply G from the right to columns k, k+1
        let top = (k + 2).min(hi);
        for i in 0..top {
            let x = h[(i, k)];
            let y = h[(i, k + 1)];
            h[(i, k)] = x * c + y * s;
            h[(i, k + 1)] = -x * s.conj() + y * c.conj();
        }
    }
    for i in 0..hi {
        h[(i, i)] += mu;
    }
}

/// Eigenvectors by inverse iteration on the shifted original matrix.
fn eigenvectors_inverse_iteration(
    a: &Matrix,
    values: &[Complex64],
) -> Result<CMatrix, MatError> {
    let n = a.rows();
    let ac = CMatrix::from_real(a);
    let scale = a.norm_inf().max(1.0);
    let mut s = CMatrix::zeros(n, n);
    for (idx, lam) in values.iter().enumerate() {
        let mut shift_eps = scale * 1e-10 * (1.0 + idx as f64);
        let mut vec = None;
        for _attempt in 0..6 {
            let mut m = ac.clone();
            let shifted = *lam + Complex64::new(shift_eps, shift_eps);
            for i in 0..n {
                m[(i, i)] -= shifted;
            }
            match m.inverse() {
                Ok(minv) => {
                    // deterministic start vector, varied per eigenvalue index
                    let mut v: Vec<Complex64> = (0..n)
                        .map(|i| Complex64::new(1.0, ((i + idx) % n) as f64 * 0.25))
                        .collect();
                    normalize(&mut v);
                    for _ in 0..3 {
                        let mut w = vec![Complex64::new(0.0, 0.0); n];
                        for i in 0..n {
                            for j in 0..n {
                                w[i] += minv[(i, j)] * v[j];
                            }
                        }
                        normalize(&mut w);
                        v = w;
                    }
                    vec = Some(v);
                    break;
                }
                Err(_) => {
                    shift_eps *= 100.0;
                }
            }
        }
        let v = vec.ok_or(MatError::NonDiagonalizable)?;
        for i in 0..n {
            s[(i, idx)] = v[i];
        }
    }
    Ok(s)
}

/// Normalize to unit 2-norm and rotate so the largest-magnitude component is
/// real and positive (makes eigenvectors deterministic).
fn normalize(v: &mut [Complex64]) {
    let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm > 0.0 {
        for z in v.iter_mut() {
            *z /= norm;
        }
    }
    let mut kmax = 0;
    let mut vmax = 0.0;
    for (k, z) in v.iter().enumerate() {
        if z.norm() > vmax {
            vmax = z.norm();
            kmax = k;
        }
    }
    if vmax > 0.0 {
        let phase = v[kmax] / v[kmax].norm();
        let rot = phase.conj();
        for z in v.iter_mut() {
            *z *= rot;
        }
    }
}
