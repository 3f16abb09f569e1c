//! Pfaffian of complex skew-symmetric matrices. The production path is a
//! Parlett-Reid tridiagonalization with partial pivoting and explicit
//! transposition-sign bookkeeping; a literal permutation-sum evaluation is
//! kept as the small-size oracle.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{fro, CMatrix};

fn check_skew(m: &CMatrix) -> Result<usize> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::ShapeMismatch { expected: n, got: m.ncols() });
    }
    if !n.is_multiple_of(2) {
        return Err(Error::OddDimension(n));
    }
    let scale = fro(m).max(1.0);
    let residual = fro(&(m + m.transpose()));
    if residual > 1e-9 * scale {
        return Err(Error::NotSkew { residual: residual / scale });
    }
    Ok(n)
}

/// Pfaffian via Parlett-Reid elimination with partial pivoting. By
/// convention Pf of the empty matrix is 1.
pub fn pfaffian(m: &CMatrix) -> Result<C64> {
    let n = check_skew(m)?;
    if n == 0 {
        return Ok(C64::new(1.0, 0.0));
    }
    let mut a = m.clone();
    let mut pf = C64::new(1.0, 0.0);
    for k in (0..n - 1).step_by(2) {
        // pivot: largest |a[i][k]| for i > k
        let mut kp = k + 1;
        let mut best = a[(k + 1, k)].norm();
        for i in k + 2..n {
            let v = a[(i, k)].norm();
            if v > best {
                best = v;
                kp = i;
            }
        }
        if kp != k + 1 {
            a.swap_rows(k + 1, kp);
            a.swap_columns(k + 1, kp);
            pf = -pf;
        }
        let pivot = a[(k + 1, k)];
        if pivot.norm() == 0.0 {
            // whole column is zero: the matrix is singular
            return Ok(C64::new(0.0, 0.0));
        }
        pf *= a[(k, k + 1)];
        if k + 2 < n {
            // rank-2 update of the trailing block: A += tau b^T - b tau^T
            // with tau = A[k, k+2..] / A[k, k+1] and b = A[k+2.., k+1]
            let denom = a[(k, k + 1)];
            let tau: Vec<C64> = (k + 2..n).map(|j| a[(k, j)] / denom).collect();
            let b: Vec<C64> = (k + 2..n).map(|i| a[(i, k + 1)]).collect();
            for (ii, i) in (k + 2..n).enumerate() {
                for (jj, j) in (k + 2..n).enumerate() {
                    a[(i, j)] += tau[ii] * b[jj] - b[ii] * tau[jj];
                }
            }
            // re-enforce skew symmetry of the trailing block to damp drift
            for i in k + 2..n {
                a[(i, i)] = C64::new(0.0, 0.0);
                for j in i + 1..n {
                    let v = (a[(i, j)] - a[(j, i)]).scale(0.5);
                    a[(i, j)] = v;
                    a[(j, i)] = -v;
                }
            }
        }
    }
    Ok(pf)
}

/// Literal permutation-sum Pfaffian, usable up to dimension 8:
/// Pf(M) = (1 / 2^N N!) Σ_π sgn(π) Π_j M_{π(2j-1), π(2j)}.
pub fn pfaffian_perm_sum(m: &CMatrix) -> Result<C64> {
    let n = check_skew(m)?;
    if n == 0 {
        return Ok(C64::new(1.0, 0.0));
    }
    if n > 8 {
        return Err(Error::ShapeMismatch { expected: 8, got: n });
    }
    let mut perm: Vec<usize> = (0..n).collect();
    let mut total = C64::new(0.0, 0.0);
    permute_sum(&mut perm, 0, 1, m, &mut total);
    let half = n / 2;
    let mut norm = 2f64.powi(half as i32);
    for k in 2..=half {
        norm *= k as f64;
    }
    Ok(total.scale(1.0 / norm))
}

fn permute_sum(perm: &mut Vec<usize>, k: usize, sign: i32, m: &CMatrix, total: &mut C64) {
    let n = perm.len();
    if k == n {
        let mut term = C64::new(sign as f64, 0.0);
        for j in 0..n / 2 {
            term *= m[(perm[2 * j], perm[2 * j + 1])];
        }
        *total += term;
        return;
    }
    for i in k..n {
        perm.swap(k, i);
        let s = if i == k { sign } else { -sign };
        permute_sum(perm, k + 1, s, m, total);
        perm.swap(k, i);
    }
}

/// Random dense skew-symmetric matrix with entries of order one.
pub fn random_skew(n: usize, seed: u64) -> CMatrix {
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut m = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let v = C64::new(rng.gen::<f64>() * 2.0 - 1.0, rng.gen::<f64>() * 2.0 - 1.0);
            m[(i, j)] = v;
            m[(j, i)] = -v;
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_is_the_upper_entry() {
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 1)] = C64::new(0.37, -1.2);
        m[(1, 0)] = -m[(0, 1)];
        assert!((pfaffian(&m).unwrap() - m[(0, 1)]).norm() < 1e-15);
        assert!((pfaffian_perm_sum(&m).unwrap() - m[(0, 1)]).norm() < 1e-15);
    }

    #[test]
    fn four_by_four_closed_form() {
        // upper entries (a,b,c,d,e,f) row-major: Pf = af - be + cd
        let vals = [
            C64::new(0.3, 0.1),
            C64::new(-0.7, 0.4),
            C64::new(0.2, -0.9),
            C64::new(1.1, 0.0),
            C64::new(-0.25, 0.6),
            C64::new(0.05, -0.3),
        ];
        let mut m = CMatrix::zeros(4, 4);
        let mut it = vals.iter();
        for i in 0..4 {
            for j in i + 1..4 {
                let v = *it.next().unwrap();
                m[(i, j)] = v;
                m[(j, i)] = -v;
            }
        }
        let (a, b, c, d, e, f) = (vals[0], vals[1], vals[2], vals[3], vals[4], vals[5]);
        let want = a * f - b * e + c * d;
        assert!((pfaffian(&m).unwrap() - want).norm() < 1e-13);
        assert!((pfaffian_perm_sum(&m).unwrap() - want).norm() < 1e-13);
    }

    #[test]
    fn production_and_oracle_agree_up_to_dim_8() {
        for n in [2usize, 4, 6, 8] {
            for seed in 0..5u64 {
                let m = random_skew(n, 1000 * n as u64 + seed);
                let a = pfaffian(&m).unwrap();
                let b = pfaffian_perm_sum(&m).unwrap();
                assert!((a - b).norm() < 1e-12 * b.norm().max(1.0), "n={n} seed={seed}");
            }
        }
    }

    #[test]
    fn pfaffian_squared_is_determinant() {
        for seed in 0..10u64 {
            let m = random_skew(8, seed);
            let pf = pfaffian(&m).unwrap();
            let det = m.determinant();
            assert!((pf * pf - det).norm() < 1e-10 * det.norm().max(1.0));
        }
    }

    #[test]
    fn empty_odd_and_nonskew_inputs() {
        let empty = CMatrix::zeros(0, 0);
        assert_eq!(pfaffian(&empty).unwrap(), C64::new(1.0, 0.0));
        let odd = CMatrix::zeros(3, 3);
        assert!(matches!(pfaffian(&odd), Err(Error::OddDimension(3))));
        let mut bad = CMatrix::zeros(2, 2);
        bad[(0, 1)] = C64::new(1.0, 0.0);
        bad[(1, 0)] = C64::new(1.0, 0.0);
        assert!(matches!(pfaffian(&bad), Err(Error::NotSkew { .. })));
    }

    #[test]
    fn singular_matrix_gives_zero() {
        // block-diagonal with one zero 2x2 block
        let mut m = CMatrix::zeros(4, 4);
        m[(2, 3)] = C64::new(1.0, 0.0);
        m[(3, 2)] = C64::new(-1.0, 0.0);
        assert_eq!(pfaffian(&m).unwrap(), C64::new(0.0, 0.0));
    }
}
