//! Small dense-matrix helpers shared by the rest of the crate.
//!
//! Hermitian eigendecompositions run through a verified path: the QR-based
//! solver is checked in the eigenbasis and, when its off-diagonal residue is
//! too large (which happens on heavily degenerate spectra), a cyclic complex
//! Jacobi pass finishes the diagonalization. Singular values and polar
//! factors are derived from that path rather than a separate SVD.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<C64>;
pub type CVector = nalgebra::DVector<C64>;

pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Frobenius norm.
pub fn fro(m: &CMatrix) -> f64 {
    m.norm()
}

fn off_diagonal_norm(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += m[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Cyclic complex Jacobi diagonalization of a Hermitian matrix. Returns the
/// (unsorted) eigenvalues and the accumulated unitary. Converges for every
/// Hermitian input; fast when the input is already nearly diagonal.
fn jacobi_herm(mut a: CMatrix) -> (Vec<f64>, CMatrix) {
    let n = a.nrows();
    let mut v = CMatrix::identity(n, n);
    let scale = fro(&a).max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        if off_diagonal_norm(&a) <= 1e-14 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let b = apq.norm();
                if b <= 1e-300 {
                    continue;
                }
                let phase = apq / b; // e^{i φ}
                let alpha = a[(p, p)].re;
                let gamma = a[(q, q)].re;
                let tau = (gamma - alpha) / (2.0 * b);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // A <- U* A U with U = [[c, s e^{iφ}], [-s e^{-iφ}, c]]
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * c - akq * s * phase.conj();
                    a[(k, q)] = akp * s * phase + akq * c;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * c - aqk * s * phase;
                    a[(q, k)] = apk * s * phase.conj() + aqk * c;
                }
                a[(p, q)] = C64::new(0.0, 0.0);
                a[(q, p)] = C64::new(0.0, 0.0);
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * c - vkq * s * phase.conj();
                    v[(k, q)] = vkp * s * phase + vkq * c;
                }
            }
        }
    }
    let vals = (0..n).map(|k| a[(k, k)].re).collect();
    (vals, v)
}

/// Eigendecomposition of a Hermitian matrix with eigenvalues sorted
/// ascending. The input is symmetrized first so callers can pass matrices
/// carrying round-off.
pub fn herm_eig(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let n = m.nrows();
    if n == 0 {
        return Ok((Vec::new(), CMatrix::identity(0, 0)));
    }
    let sym = hermitize(m);
    let scale = fro(&sym);
    if scale == 0.0 {
        return Ok((vec![0.0; n], CMatrix::identity(n, n)));
    }
    let (mut vals, mut vecs) = match nalgebra::linalg::SymmetricEigen::try_new(sym.clone(), 1e-14, 0)
    {
        Some(eig) => {
            // verify in the eigenbasis; polish with Jacobi when the QR
            // solver left off-diagonal residue behind
            let residual = eig.eigenvectors.adjoint() * &sym * &eig.eigenvectors;
            if off_diagonal_norm(&residual) > 1e-12 * scale {
                let (vals, rot) = jacobi_herm(residual);
                (vals, eig.eigenvectors * rot)
            } else {
                let vals = (0..n).map(|k| residual[(k, k)].re).collect();
                (vals, eig.eigenvectors)
            }
        }
        None => jacobi_herm(sym),
    };
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| vals[a].partial_cmp(&vals[b]).unwrap());
    let sorted_vals: Vec<f64> = idx.iter().map(|&k| vals[k]).collect();
    let mut sorted_vecs = CMatrix::zeros(n, n);
    for (col, &k) in idx.iter().enumerate() {
        sorted_vecs.set_column(col, &vecs.column(k));
    }
    vals = sorted_vals;
    vecs = sorted_vecs;
    Ok((vals, vecs))
}

/// f(H) for Hermitian H given its eigendecomposition.
pub fn herm_fn(vals: &[f64], vecs: &CMatrix, f: impl Fn(f64) -> C64) -> CMatrix {
    let n = vals.len();
    let diag = CMatrix::from_fn(n, n, |i, j| if i == j { f(vals[i]) } else { C64::new(0.0, 0.0) });
    vecs * diag * vecs.adjoint()
}

/// exp(z H) for Hermitian H.
pub fn herm_exp(h: &CMatrix, z: C64) -> Result<CMatrix> {
    let (vals, vecs) = herm_eig(h)?;
    Ok(herm_fn(&vals, &vecs, |x| (z * x).exp()))
}

/// Singular values of an arbitrary matrix, descending, via the Hermitian
/// eigenvalues of A*A.
pub fn singular_values(m: &CMatrix) -> Result<Vec<f64>> {
    let gram = m.adjoint() * m;
    let (vals, _) = herm_eig(&gram)?;
    let mut sv: Vec<f64> = vals.iter().map(|&x| x.max(0.0).sqrt()).collect();
    sv.reverse();
    Ok(sv)
}

/// Operator (spectral) norm.
pub fn two_norm(m: &CMatrix) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    singular_values(m).map(|sv| sv[0]).unwrap_or(f64::NAN)
}

/// Trace norm: sum of singular values.
pub fn trace_norm(m: &CMatrix) -> f64 {
    singular_values(m).map(|sv| sv.iter().sum()).unwrap_or(f64::NAN)
}

pub fn unitarity_residual(u: &CMatrix) -> f64 {
    let n = u.nrows();
    fro(&(u.adjoint() * u - CMatrix::identity(n, n)))
}

/// Unitary polar factor U = A (A*A)^{-1/2}; intended for near-unitary A.
pub fn polar_unitary(m: &CMatrix) -> Result<CMatrix> {
    let gram = m.adjoint() * m;
    let (vals, vecs) = herm_eig(&gram)?;
    if vals.iter().any(|&x| x <= 0.0) {
        return Err(Error::EigensolverFailure);
    }
    let inv_sqrt = herm_fn(&vals, &vecs, |x| C64::new(1.0 / x.sqrt(), 0.0));
    Ok(m * inv_sqrt)
}

/// Projection onto the span of the given columns.
pub fn projector_from_columns(cols: &CMatrix) -> CMatrix {
    cols * cols.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn herm_eig_sorts_and_reconstructs() {
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(1.0, 0.0),
                C64::new(0.0, -2.0),
                C64::new(0.0, 2.0),
                C64::new(-1.0, 0.0),
            ],
        );
        let (vals, vecs) = herm_eig(&m).unwrap();
        assert!(vals[0] <= vals[1]);
        let rebuilt = herm_fn(&vals, &vecs, |x| C64::new(x, 0.0));
        assert!(fro(&(rebuilt - m)) < 1e-12);
        // eigenvalues of [[1, -2i], [2i, -1]] are +/- sqrt(5)
        assert!((vals[1] - 5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn polar_of_unitary_is_identity_like() {
        let theta = 0.7f64;
        let u = CMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(theta.cos(), 0.0),
                C64::new(-theta.sin(), 0.0),
                C64::new(theta.sin(), 0.0),
                C64::new(theta.cos(), 0.0),
            ],
        );
        let w = polar_unitary(&u).unwrap();
        assert!(fro(&(w - u)) < 1e-12);
    }

    #[test]
    fn singular_values_of_diagonal() {
        let m = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            C64::new(0.0, -3.0),
            C64::new(1.0, 0.0),
        ]));
        let sv = singular_values(&m).unwrap();
        assert!((sv[0] - 3.0).abs() < 1e-12);
        assert!((sv[1] - 1.0).abs() < 1e-12);
        assert!((two_norm(&m) - 3.0).abs() < 1e-12);
        assert!((trace_norm(&m) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn jacobi_polish_handles_degenerate_spectra() {
        // 25-site periodic BdG chains have every eigenvalue doubly
        // degenerate; the polished path must reconstruct to near round-off
        use crate::lattice::{build_kitaev_chain, Boundary, KitaevParams};
        for mu in [0.905, 0.5, 0.0] {
            let params = KitaevParams { t: 1.0, mu, delta: 1.0, boundary: Boundary::Periodic };
            let h = build_kitaev_chain(25, &params).unwrap();
            let (vals, vecs) = herm_eig(h.matrix()).unwrap();
            let rebuilt = herm_fn(&vals, &vecs, |x| C64::new(x, 0.0));
            let res = fro(&(rebuilt - h.matrix()));
            assert!(res < 1e-11, "mu = {mu}: reconstruction residual {res:.3e}");
            assert!(unitarity_residual(&vecs) < 1e-12);
        }
    }
}
