//! Eigendecomposition of self-dual Hamiltonians: spectral projections and
//! gap, one-particle propagators, resolvent matrix elements and empirical
//! kernel-decay fits.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Tolerances};
use crate::linalg::{herm_fn, CMatrix};
use crate::operators::{BasisProjection, SelfDualHamiltonian};
use crate::space::SelfDualSpace;

/// Full eigendata of a self-dual Hamiltonian, split into negative, zero and
/// positive bands. Eigenvalues below `zero_tol` in modulus count as zero.
#[derive(Debug, Clone)]
pub struct SpectralResolution {
    space: Arc<SelfDualSpace>,
    pub eigenvalues: Vec<f64>,
    /// Columns are the eigenvectors, ordered with the eigenvalues.
    pub eigenvectors: CMatrix,
    pub zero_tol: f64,
    pub n_negative: usize,
    pub n_zero: usize,
    /// Spectral gap: min |λ| over the nonzero bands; 0.0 when the zero band
    /// is nonempty or the operator vanishes (then `gap_defined` is false).
    pub gap: f64,
    pub gap_defined: bool,
    e_plus: CMatrix,
    e_minus: CMatrix,
    e_zero: CMatrix,
}

impl SpectralResolution {
    pub fn space(&self) -> &Arc<SelfDualSpace> {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn e_plus(&self) -> &CMatrix {
        &self.e_plus
    }

    pub fn e_minus(&self) -> &CMatrix {
        &self.e_minus
    }

    pub fn e_zero(&self) -> &CMatrix {
        &self.e_zero
    }

    /// Indices of the positive band in eigenvalue order.
    pub fn plus_range(&self) -> std::ops::Range<usize> {
        self.n_negative + self.n_zero..self.dim()
    }

    pub fn minus_range(&self) -> std::ops::Range<usize> {
        0..self.n_negative
    }

    /// The positive spectral projection as a validated basis projection.
    /// Requires an empty zero band.
    pub fn plus_projection(&self) -> Result<BasisProjection> {
        if self.n_zero > 0 {
            return Err(Error::GapClosed { gap: self.gap, zero_tol: self.zero_tol });
        }
        BasisProjection::new(self.space.clone(), self.e_plus.clone())
    }

    /// Largest |λ|.
    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }
}

fn band_projector(vecs: &CMatrix, range: std::ops::Range<usize>) -> CMatrix {
    let n = vecs.nrows();
    let mut p = CMatrix::zeros(n, n);
    for k in range {
        let col = vecs.column(k);
        for i in 0..n {
            for j in 0..n {
                p[(i, j)] += col[i] * col[j].conj();
            }
        }
    }
    p
}

/// Diagonalizes H and splits the spectrum at ±zero_tol. The default
/// tolerance is `zero_tol_factor` times the spectral radius.
pub fn resolve(h: &SelfDualHamiltonian, zero_tol: Option<f64>) -> Result<SpectralResolution> {
    resolve_impl(h, zero_tol, Tolerances::DEFAULT.zero_tol_factor)
}

/// Like [`resolve`], with the zero threshold given as a factor of the
/// spectral radius.
pub fn resolve_scaled(h: &SelfDualHamiltonian, factor: f64) -> Result<SpectralResolution> {
    resolve_impl(h, None, factor)
}

fn resolve_impl(
    h: &SelfDualHamiltonian,
    zero_tol: Option<f64>,
    factor: f64,
) -> Result<SpectralResolution> {
    let (vals, vecs) = crate::linalg::herm_eig(h.matrix())?;
    let radius = vals.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let zero_tol = zero_tol.unwrap_or(factor * radius);
    let n_negative = vals.iter().filter(|&&x| x < -zero_tol).count();
    let n_zero = vals.iter().filter(|&&x| x.abs() <= zero_tol).count();
    let n = vals.len();
    let gap_defined = n_zero == 0 && radius > 0.0;
    let gap = if gap_defined {
        vals.iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min)
    } else {
        0.0
    };
    let e_minus = band_projector(&vecs, 0..n_negative);
    let e_zero = band_projector(&vecs, n_negative..n_negative + n_zero);
    let e_plus = band_projector(&vecs, n_negative + n_zero..n);
    Ok(SpectralResolution {
        space: h.space().clone(),
        eigenvalues: vals,
        eigenvectors: vecs,
        zero_tol,
        n_negative,
        n_zero,
        gap,
        gap_defined,
        e_plus,
        e_minus,
        e_zero,
    })
}

/// One-particle propagator e^{itH}.
pub fn propagator(res: &SpectralResolution, t: f64) -> CMatrix {
    herm_fn(&res.eigenvalues, &res.eigenvectors, |x| (C64::new(0.0, t) * x).exp())
}

/// ⟨e_x, (z - H)^{-1} e_y⟩ evaluated in the eigenbasis.
pub fn resolvent_element(res: &SpectralResolution, z: C64, x: usize, y: usize) -> Result<C64> {
    let dist = res
        .eigenvalues
        .iter()
        .map(|&l| (z - C64::new(l, 0.0)).norm())
        .fold(f64::INFINITY, f64::min);
    if dist < 1e-12 {
        return Err(Error::ZNearSpectrum { dist });
    }
    let mut out = C64::new(0.0, 0.0);
    for k in 0..res.dim() {
        let vk = res.eigenvectors.column(k);
        out += vk[x] * vk[y].conj() / (z - res.eigenvalues[k]);
    }
    Ok(out)
}

/// Least-squares decay fit of a lattice-indexed kernel.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecayFit {
    /// Decay rate: log|K_xy| ≈ intercept - rate · |x-y|^ε.
    pub rate: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit.
    pub residual: f64,
    pub n_pairs: usize,
}

/// Fits log|kernel_xy| against |x-y|^ε over all off-diagonal entries above
/// the floor 1e-14.
pub fn decay_fit(kernel: &CMatrix, space: &SelfDualSpace, epsilon: f64) -> Result<DecayFit> {
    const FLOOR: f64 = 1e-14;
    const MIN_PAIRS: usize = 10;
    let n = kernel.nrows();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let a = kernel[(i, j)].norm();
            if a > FLOOR {
                xs.push(space.distance(i, j).powf(epsilon));
                ys.push(a.ln());
            }
        }
    }
    if xs.len() < MIN_PAIRS {
        return Err(Error::InsufficientData { n: xs.len(), need: MIN_PAIRS });
    }
    let n_f = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n_f;
    let my = ys.iter().sum::<f64>() / n_f;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx < 1e-12 {
        return Err(Error::InsufficientData { n: 1, need: MIN_PAIRS });
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let e = y - (intercept + slope * x);
            e * e
        })
        .sum();
    Ok(DecayFit { rate: -slope, intercept, residual: (ss / n_f).sqrt(), n_pairs: xs.len() })
}
