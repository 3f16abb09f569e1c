//! Combes-Thomas resolvent decay: the constants S(A,μ) and Δ(A,z), the
//! general off-diagonal bound and the gapped-case bound, verified pair by
//! pair at finite volume.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::operators::SelfDualHamiltonian;
use crate::spectral::{resolvent_element, SpectralResolution};

/// The decay constants entering the Combes-Thomas estimate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecayParams {
    pub mu: f64,
    pub epsilon: f64,
    /// S(A,μ) = max_x Σ_y (e^{μ|x-y|^ε} - 1) |A_xy|.
    pub s_value: f64,
    /// Δ(A,z): distance from z to the spectrum.
    pub delta_value: f64,
}

/// Computes S(H,μ) and Δ(H,z).
pub fn ct_constants(
    h: &SelfDualHamiltonian,
    res: &SpectralResolution,
    mu: f64,
    epsilon: f64,
    z: C64,
) -> DecayParams {
    let space = h.space();
    let m = h.matrix();
    let n = space.dim();
    let mut s_value = 0.0f64;
    for x in 0..n {
        let mut row = 0.0;
        for y in 0..n {
            let w = (mu * space.distance(x, y).powf(epsilon)).exp() - 1.0;
            row += w * m[(x, y)].norm();
        }
        s_value = s_value.max(row);
    }
    let delta_value = res
        .eigenvalues
        .iter()
        .map(|&l| (z - C64::new(l, 0.0)).norm())
        .fold(f64::INFINITY, f64::min);
    DecayParams { mu, epsilon, s_value, delta_value }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CtStatus {
    /// Δ > S: the general bound applies.
    Applicable,
    /// Hypothesis Δ > S fails; nothing was checked.
    NotApplicable,
}

/// Result of checking the Combes-Thomas bounds over every basis pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CtReport {
    pub status: CtStatus,
    pub params: DecayParams,
    /// Worst |R_xy| / bound ratio for the general estimate.
    pub worst_ratio: f64,
    pub worst_pair: (usize, usize),
    /// Worst ratio against the gapped-case bound (when the gap is open).
    pub gapped_worst_ratio: Option<f64>,
    pub gap: Option<f64>,
    pub n_pairs: usize,
    pub violations: usize,
}

/// Checks |⟨e_x, (z-H)^{-1} e_y⟩| ≤ e^{-μ|x-y|^ε} / (Δ - S) for all pairs,
/// and the gapped-case bound 4 g^{-1} exp(-μ min{1, g/(4S)} |x-y|^ε) when
/// the spectral gap g is open. A small relative slack absorbs round-off.
pub fn ct_verify(
    h: &SelfDualHamiltonian,
    res: &SpectralResolution,
    mu: f64,
    epsilon: f64,
    z: C64,
) -> Result<CtReport> {
    const SLACK: f64 = 1.0 + 1e-9;
    let params = ct_constants(h, res, mu, epsilon, z);
    if params.delta_value <= params.s_value {
        return Ok(CtReport {
            status: CtStatus::NotApplicable,
            params,
            worst_ratio: 0.0,
            worst_pair: (0, 0),
            gapped_worst_ratio: None,
            gap: None,
            n_pairs: 0,
            violations: 0,
        });
    }
    let space = h.space();
    let n = space.dim();
    let denom = params.delta_value - params.s_value;
    let gap = if res.gap_defined { Some(res.gap) } else { None };
    // gapped-case rate: μ min{1, g/(4S)}; with S = 0 the min is 1
    let gapped = gap.and_then(|g| {
        if params.delta_value >= g / 2.0 {
            let shrink = if params.s_value > 0.0 { (g / (4.0 * params.s_value)).min(1.0) } else { 1.0 };
            Some((4.0 / g, mu * shrink))
        } else {
            None
        }
    });
    let mut worst_ratio = 0.0f64;
    let mut worst_pair = (0, 0);
    let mut gapped_worst: Option<f64> = gapped.map(|_| 0.0);
    let mut violations = 0usize;
    for x in 0..n {
        for y in 0..n {
            let r = resolvent_element(res, z, x, y)?.norm();
            let dist_eps = space.distance(x, y).powf(epsilon);
            let bound = (-mu * dist_eps).exp() / denom;
            let ratio = r / bound;
            if ratio > worst_ratio {
                worst_ratio = ratio;
                worst_pair = (x, y);
            }
            if ratio > SLACK {
                violations += 1;
            }
            if let Some((prefactor, rate)) = gapped {
                let gb = prefactor * (-rate * dist_eps).exp();
                let gr = r / gb;
                let cur = gapped_worst.get_or_insert(0.0);
                if gr > *cur {
                    *cur = gr;
                }
                if gr > SLACK {
                    violations += 1;
                }
            }
        }
    }
    Ok(CtReport {
        status: CtStatus::Applicable,
        params,
        worst_ratio,
        worst_pair,
        gapped_worst_ratio: gapped_worst,
        gap,
        n_pairs: n * n,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{
        build_laplacian, embed_quadratic, kitaev_space, Boundary, LatticeConfig, QuadraticModel,
    };
    use crate::linalg::CMatrix;
    use crate::space::SelfDualSpace;
    use crate::spectral::resolve;

    #[test]
    fn mu_zero_reduces_to_trivial_resolvent_bound() {
        let space = SelfDualSpace::synthetic(3);
        let h = crate::operators::random_self_dual(&space, 4, 1.0);
        let res = resolve(&h, None).unwrap();
        let z = C64::new(0.0, 2.0);
        let report = ct_verify(&h, &res, 0.0, 1.0, z).unwrap();
        assert_eq!(report.status, CtStatus::Applicable);
        assert!((report.params.s_value).abs() < 1e-14);
        // bound is 1/Δ which always holds
        assert!(report.worst_ratio <= 1.0 + 1e-12);
        assert_eq!(report.violations, 0);
    }

    #[test]
    fn diagonal_hamiltonian_passes_trivially() {
        let space = SelfDualSpace::synthetic(2);
        let m = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            C64::new(0.5, 0.0),
            C64::new(-0.5, 0.0),
            C64::new(1.0, 0.0),
            C64::new(-1.0, 0.0),
        ]));
        let h = SelfDualHamiltonian::new(space, m).unwrap();
        let res = resolve(&h, None).unwrap();
        let report = ct_verify(&h, &res, 0.3, 1.0, C64::new(0.0, 3.0)).unwrap();
        assert_eq!(report.violations, 0);
    }

    #[test]
    fn laplacian_chain_bound_holds_everywhere() {
        // 1-d Laplacian embedded self-dually; z = 3i, μ = 0.2
        let cfg = LatticeConfig::chain(10); // 21 sites
        let lap = build_laplacian(&cfg, 1.0);
        let model = QuadraticModel::gauge_invariant(lap).unwrap();
        let space = kitaev_space(21, Boundary::Open).unwrap();
        let h = embed_quadratic(&model, &space).unwrap();
        let res = resolve(&h, None).unwrap();
        let report = ct_verify(&h, &res, 0.2, 1.0, C64::new(0.0, 3.0)).unwrap();
        assert_eq!(report.status, CtStatus::Applicable);
        assert!(report.params.delta_value > report.params.s_value);
        assert!(report.worst_ratio < 1.0, "worst ratio {}", report.worst_ratio);
        assert_eq!(report.violations, 0);
    }

    #[test]
    fn hypothesis_failure_reports_not_applicable() {
        let cfg = LatticeConfig::chain(5);
        let lap = build_laplacian(&cfg, 1.0);
        let model = QuadraticModel::gauge_invariant(lap).unwrap();
        let space = kitaev_space(11, Boundary::Open).unwrap();
        let h = embed_quadratic(&model, &space).unwrap();
        let res = resolve(&h, None).unwrap();
        // huge μ makes S blow up past Δ
        let report = ct_verify(&h, &res, 3.0, 1.0, C64::new(0.0, 0.5)).unwrap();
        assert_eq!(report.status, CtStatus::NotApplicable);
    }
}
