//! The Z2 projection index σ(P1, P2) = (-1)^{dim(P1 ∧ P2⊥)}, computed by
//! three routes that must agree: intersection counting, the kernel dimension
//! of P1 + P2 - 1, and the determinant of a relating Bogoliubov unitary.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{fro, herm_eig, CMatrix};
use crate::operators::BasisProjection;

/// Eigenvalues of P1 P2⊥ P1 within this distance of 1 count towards the
/// intersection dimension.
pub const TOL_ONE: f64 = 1e-6;
/// Eigenvalues inside (1 - 1e-3, 1 - 1e-6) make the count ambiguous.
pub const AMBIGUOUS_BAND: (f64, f64) = (1.0 - 1e-3, 1.0 - TOL_ONE);

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IndexReport {
    pub sigma: i8,
    pub dim_intersection: usize,
    pub kernel_dim: usize,
    /// Smallest distance of spec(P1 P2⊥ P1) to {0, 1} outside the counted
    /// clusters; large values mean a well-conditioned count.
    pub conditioning: f64,
    pub conditioning_warning: bool,
    pub methods_agree: bool,
    pub sigma_intersection: i8,
    pub sigma_kernel: i8,
    pub sigma_det: Option<i8>,
}

/// dim(ran P1 ∩ ran P2⊥): the number of eigenvalues of P1 P2⊥ P1 at 1.
/// Also returns the conditioning margin and whether any eigenvalue falls in
/// the soft warning band (0.1, 0.9).
pub fn intersection_dim(p1: &CMatrix, p2_perp: &CMatrix) -> Result<(usize, f64, bool)> {
    let prod = p1 * p2_perp * p1;
    let (vals, _) = herm_eig(&prod)?;
    let mut count = 0usize;
    let mut margin = f64::INFINITY;
    let mut warn = false;
    for &v in &vals {
        if v > AMBIGUOUS_BAND.0 && v < AMBIGUOUS_BAND.1 {
            return Err(Error::IllConditioned { eigenvalue: v });
        }
        if (1.0 - v).abs() <= TOL_ONE {
            count += 1;
        } else if v.abs() > TOL_ONE {
            // outside both counted clusters
            margin = margin.min((1.0 - v).abs().min(v.abs()));
            if v > 0.1 && v < 0.9 {
                warn = true;
            }
        }
    }
    Ok((count, margin, warn))
}

/// dim ker(P1 + P2 - 1), counting eigenvalues within TOL_ONE of zero.
pub fn kernel_dim(p1: &CMatrix, p2: &CMatrix) -> Result<usize> {
    let n = p1.nrows();
    let m = p1 + p2 - CMatrix::identity(n, n);
    let (vals, _) = herm_eig(&m)?;
    Ok(vals.iter().filter(|v| v.abs() <= TOL_ONE).count())
}

/// The index σ(P1, P2) with cross-validation. When `u` is supplied it must
/// relate the projections as P2 = U* P1 U (up to tolerance); its determinant
/// sign is then checked against the other two methods.
pub fn z2_index(
    p1: &BasisProjection,
    p2: &BasisProjection,
    u: Option<&CMatrix>,
) -> Result<IndexReport> {
    if p1.space().dim() != p2.space().dim() {
        return Err(Error::ShapeMismatch { expected: p1.space().dim(), got: p2.space().dim() });
    }
    let (dim_intersection, conditioning, warn) = intersection_dim(p1.matrix(), &p2.complement())?;
    let sigma_intersection: i8 = if dim_intersection.is_multiple_of(2) { 1 } else { -1 };

    let kdim = kernel_dim(p1.matrix(), p2.matrix())?;
    if kdim % 2 != 0 {
        return Err(Error::MethodDisagreement(format!(
            "kernel dimension {kdim} is odd; it must equal twice the intersection dimension"
        )));
    }
    let sigma_kernel: i8 = if (kdim / 2) % 2 == 0 { 1 } else { -1 };

    let sigma_det = match u {
        Some(u) => {
            let moved = u.adjoint() * p1.matrix() * u;
            let res = fro(&(moved - p2.matrix()));
            if res > 1e-4 {
                return Err(Error::MethodDisagreement(format!(
                    "supplied unitary does not relate the projections (residual {res:.3e})"
                )));
            }
            let det = u.determinant();
            if det.im.abs() > 1e-6 {
                return Err(Error::DetNotReal { imag: det.im });
            }
            Some(if det.re >= 0.0 { 1i8 } else { -1 })
        }
        None => None,
    };

    let mut agree = sigma_intersection == sigma_kernel && kdim == 2 * dim_intersection;
    if let Some(sd) = sigma_det {
        agree = agree && sd == sigma_intersection;
    }
    if !agree {
        return Err(Error::MethodDisagreement(format!(
            "intersection {sigma_intersection} (dim {dim_intersection}), kernel {sigma_kernel} \
             (dim {kdim}), det {sigma_det:?}"
        )));
    }
    Ok(IndexReport {
        sigma: sigma_intersection,
        dim_intersection,
        kernel_dim: kdim,
        conditioning,
        conditioning_warning: warn,
        methods_agree: agree,
        sigma_intersection,
        sigma_kernel,
        sigma_det,
    })
}

/// Orthonormal columns spanning the eigenvalue-1 cluster of P1 P2 P1, i.e.
/// the wedge intersection ran P1 ∧ ran P2. Errors when the cluster is not
/// cleanly separated.
pub fn wedge_basis(p1: &CMatrix, p2: &CMatrix) -> Result<CMatrix> {
    let prod = p1 * p2 * p1;
    let (vals, vecs) = herm_eig(&prod)?;
    let n = vals.len();
    let mut cols = Vec::new();
    for (k, &v) in vals.iter().enumerate() {
        if v > AMBIGUOUS_BAND.0 && v < AMBIGUOUS_BAND.1 {
            return Err(Error::DegenerateWedge(format!("eigenvalue {v} in the ambiguous band")));
        }
        if (1.0 - v).abs() <= TOL_ONE {
            cols.push(k);
        }
    }
    let mut basis = CMatrix::zeros(n, cols.len());
    for (j, &k) in cols.iter().enumerate() {
        basis.set_column(j, &vecs.column(k));
    }
    Ok(basis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64 as C64;
    use crate::operators::{pair_swap_reflection, random_bogoliubov, BasisProjection};
    use crate::space::SelfDualSpace;

    fn rotated(space: &std::sync::Arc<SelfDualSpace>, u: &CMatrix) -> BasisProjection {
        let p0 = BasisProjection::canonical(space);
        let m = u.adjoint() * p0.matrix() * u;
        BasisProjection::new(space.clone(), m).unwrap()
    }

    #[test]
    fn index_of_projection_with_itself_is_even() {
        let space = SelfDualSpace::synthetic(3);
        let p = BasisProjection::canonical(&space);
        let r = z2_index(&p, &p, None).unwrap();
        assert_eq!(r.sigma, 1);
        assert_eq!(r.dim_intersection, 0);
        assert_eq!(r.kernel_dim, 0);
    }

    #[test]
    fn gamma_conjugate_flips_with_mode_parity() {
        // sigma(P, GPG) = (-1)^N since the intersection is all of ran P
        for n_modes in [1usize, 2, 3] {
            let space = SelfDualSpace::synthetic(n_modes);
            let p = BasisProjection::canonical(&space);
            let q = BasisProjection::new(space.clone(), p.complement()).unwrap();
            let r = z2_index(&p, &q, None).unwrap();
            assert_eq!(r.dim_intersection, n_modes);
            assert_eq!(r.sigma, if n_modes % 2 == 0 { 1 } else { -1 });
        }
    }

    #[test]
    fn methods_agree_with_determinant_on_random_pairs() {
        let space = SelfDualSpace::synthetic(4);
        for seed in 0..20u64 {
            let u1 = random_bogoliubov(&space, 2 * seed);
            let mut u2m = random_bogoliubov(&space, 2 * seed + 1).matrix().clone();
            if seed % 2 == 1 {
                u2m = pair_swap_reflection(&space, (seed % 4) as usize) * u2m;
            }
            let p1 = rotated(&space, u1.matrix());
            let p2 = rotated(&space, &u2m);
            // P2 = U* P1 U with U = U1* U2
            let u12 = u1.matrix().adjoint() * &u2m;
            let r = z2_index(&p1, &p2, Some(&u12)).unwrap();
            assert!(r.methods_agree);
            assert_eq!(r.kernel_dim % 2, 0);
            let expected = if seed % 2 == 1 { -1 } else { 1 };
            assert_eq!(r.sigma, expected, "seed {seed}");
        }
    }

    #[test]
    fn index_is_symmetric() {
        let space = SelfDualSpace::synthetic(3);
        for seed in 100..150u64 {
            let u1 = random_bogoliubov(&space, 3 * seed);
            let mut u2m = random_bogoliubov(&space, 3 * seed + 1).matrix().clone();
            if seed % 3 == 0 {
                u2m = pair_swap_reflection(&space, (seed % 3) as usize) * u2m;
            }
            let p1 = rotated(&space, u1.matrix());
            let p2 = rotated(&space, &u2m);
            let ab = z2_index(&p1, &p2, None).unwrap();
            let ba = z2_index(&p2, &p1, None).unwrap();
            assert_eq!(ab.sigma, ba.sigma, "seed {seed}");
        }
    }

    #[test]
    fn conjugation_invariance() {
        let space = SelfDualSpace::synthetic(3);
        let u1 = random_bogoliubov(&space, 7);
        let odd = pair_swap_reflection(&space, 1) * random_bogoliubov(&space, 8).matrix();
        let p1 = rotated(&space, u1.matrix());
        let p2 = rotated(&space, &odd);
        let before = z2_index(&p1, &p2, None).unwrap().sigma;
        let w = random_bogoliubov(&space, 99);
        let c1 = BasisProjection::new(
            space.clone(),
            w.matrix() * p1.matrix() * w.matrix().adjoint(),
        )
        .unwrap();
        let c2 = BasisProjection::new(
            space.clone(),
            w.matrix() * p2.matrix() * w.matrix().adjoint(),
        )
        .unwrap();
        let after = z2_index(&c1, &c2, None).unwrap().sigma;
        assert_eq!(before, after);
    }

    #[test]
    fn small_gamma_compatible_rotations_never_flip_sigma() {
        // a theta <= 1e-3 rotation cannot push an eigenvalue across the
        // 1e-6 counting threshold, so sigma is stable for every pair whose
        // count succeeded in the first place
        let space = SelfDualSpace::synthetic(3);
        for seed in 41..61u64 {
            let u1 = random_bogoliubov(&space, seed);
            let p1 = rotated(&space, u1.matrix());
            let mut u2m = random_bogoliubov(&space, seed + 1000).matrix().clone();
            if seed % 2 == 0 {
                u2m = pair_swap_reflection(&space, 0) * u2m;
            }
            let p2 = rotated(&space, &u2m);
            let base = z2_index(&p1, &p2, None).unwrap();
            let d = crate::operators::random_self_dual(&space, seed + 2000, 1.0);
            let rot = crate::linalg::herm_exp(d.matrix(), C64::new(0.0, 1e-3)).unwrap();
            let p2r =
                BasisProjection::new(space.clone(), rot.adjoint() * p2.matrix() * &rot).unwrap();
            let moved = z2_index(&p1, &p2r, None).unwrap();
            assert_eq!(base.sigma, moved.sigma, "seed {seed}");
        }
    }
}
