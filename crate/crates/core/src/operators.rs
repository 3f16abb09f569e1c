//! Validated operator types on a self-dual space: self-dual Hamiltonians
//! (H = H* = -ΓHΓ), basis projections (ΓPΓ = 1 - P) and Bogoliubov
//! transformations (Γ-commuting unitaries with parity ±1).

use std::sync::Arc;

use num_complex::Complex64 as C64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Tolerances};
use crate::linalg::{fro, hermitize, two_norm, CMatrix};
use crate::space::SelfDualSpace;

/// Provenance and validation residuals of a Hamiltonian.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct HamiltonianMeta {
    pub model: String,
    pub seed: Option<u64>,
    pub path_s: Option<f64>,
    pub hermitian_residual: f64,
    pub self_dual_residual: f64,
    pub trace_residual: f64,
}

/// A Hermitian matrix H with H = -ΓHΓ. Spectrum is symmetric about zero and
/// the trace vanishes.
#[derive(Debug, Clone)]
pub struct SelfDualHamiltonian {
    space: Arc<SelfDualSpace>,
    matrix: CMatrix,
    pub meta: HamiltonianMeta,
}

impl SelfDualHamiltonian {
    /// Validates `matrix` against the self-dual invariants and wraps it.
    pub fn validate(
        space: Arc<SelfDualSpace>,
        matrix: CMatrix,
        mut meta: HamiltonianMeta,
        tol: &Tolerances,
    ) -> Result<Self> {
        let n = space.dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::ShapeMismatch { expected: n, got: matrix.nrows() });
        }
        let scale = fro(&matrix).max(f64::MIN_POSITIVE);
        let herm = fro(&(&matrix - matrix.adjoint()));
        if herm > tol.hermitian_rel * scale {
            return Err(Error::NotHermitian { residual: herm / scale, tol: tol.hermitian_rel });
        }
        let sd = fro(&(&matrix + space.gamma_conj(&matrix)));
        if sd > tol.self_dual_rel * scale {
            return Err(Error::NotSelfDual { residual: sd / scale, tol: tol.self_dual_rel });
        }
        let trace = matrix.trace().norm();
        if trace > tol.trace_rel * scale * n as f64 {
            return Err(Error::NotSelfDual { residual: trace / scale, tol: tol.trace_rel });
        }
        meta.hermitian_residual = herm / scale;
        meta.self_dual_residual = sd / scale;
        meta.trace_residual = trace / scale;
        Ok(SelfDualHamiltonian { space, matrix, meta })
    }

    pub fn new(space: Arc<SelfDualSpace>, matrix: CMatrix) -> Result<Self> {
        Self::validate(space, matrix, HamiltonianMeta::default(), &Tolerances::DEFAULT)
    }

    pub fn space(&self) -> &Arc<SelfDualSpace> {
        &self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    /// Operator norm of the matrix.
    pub fn norm(&self) -> f64 {
        two_norm(&self.matrix)
    }
}

/// An orthogonal projection P with ΓPΓ = 1 - P; rank is half the dimension.
#[derive(Debug, Clone)]
pub struct BasisProjection {
    space: Arc<SelfDualSpace>,
    matrix: CMatrix,
}

impl BasisProjection {
    pub fn validate(space: Arc<SelfDualSpace>, matrix: CMatrix, tol: &Tolerances) -> Result<Self> {
        let n = space.dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::ShapeMismatch { expected: n, got: matrix.nrows() });
        }
        let idem = fro(&(&matrix * &matrix - &matrix));
        let herm = fro(&(&matrix - matrix.adjoint()));
        if idem > tol.projection || herm > tol.projection {
            return Err(Error::NotProjection { residual: idem.max(herm) });
        }
        let id = CMatrix::identity(n, n);
        let gamma_res = fro(&(space.gamma_conj(&matrix) - (&id - &matrix)));
        if gamma_res > tol.basis_projection {
            return Err(Error::NotBasisProjection { residual: gamma_res });
        }
        let rank_res = (matrix.trace().re - (n as f64) / 2.0).abs();
        if rank_res > 1e-8 || matrix.trace().im.abs() > 1e-8 {
            return Err(Error::NotBasisProjection { residual: rank_res });
        }
        Ok(BasisProjection { space, matrix })
    }

    pub fn new(space: Arc<SelfDualSpace>, matrix: CMatrix) -> Result<Self> {
        Self::validate(space, matrix, &Tolerances::DEFAULT)
    }

    /// The canonical projection onto the Minus-tagged labels.
    pub fn canonical(space: &Arc<SelfDualSpace>) -> Self {
        let matrix = space.canonical_projection();
        BasisProjection { space: space.clone(), matrix }
    }

    pub fn space(&self) -> &Arc<SelfDualSpace> {
        &self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn complement(&self) -> CMatrix {
        CMatrix::identity(self.matrix.nrows(), self.matrix.ncols()) - &self.matrix
    }
}

/// A Γ-commuting unitary together with the sign of its (real) determinant.
#[derive(Debug, Clone)]
pub struct BogoliubovTransform {
    space: Arc<SelfDualSpace>,
    matrix: CMatrix,
    pub parity: i8,
    pub det: C64,
}

impl BogoliubovTransform {
    pub fn space(&self) -> &Arc<SelfDualSpace> {
        &self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }
}

/// Residual of the Γ-commutation UΓ = ΓU, i.e. ‖UG - G conj(U)‖.
pub fn gamma_commutation_residual(space: &SelfDualSpace, u: &CMatrix) -> f64 {
    let g = space.gamma_matrix();
    fro(&(u * g - g * u.conjugate()))
}

/// Validates a Bogoliubov transformation and computes its parity, the sign
/// of det(U) ∈ {+1, -1}.
pub fn bogoliubov_parity(
    space: &Arc<SelfDualSpace>,
    u: CMatrix,
    tol: &Tolerances,
) -> Result<BogoliubovTransform> {
    let n = space.dim();
    if u.nrows() != n || u.ncols() != n {
        return Err(Error::ShapeMismatch { expected: n, got: u.nrows() });
    }
    let unit = crate::linalg::unitarity_residual(&u);
    if unit > tol.unitary {
        return Err(Error::NotUnitary { residual: unit });
    }
    let gc = gamma_commutation_residual(space, &u);
    if gc > tol.gamma_commute {
        return Err(Error::NotGammaCommuting { residual: gc });
    }
    let det = u.determinant();
    if det.im.abs() > tol.det_imag {
        return Err(Error::DetNotReal { imag: det.im });
    }
    if (det.norm() - 1.0).abs() > 1e-8 {
        return Err(Error::NotUnitary { residual: (det.norm() - 1.0).abs() });
    }
    let parity = if det.re >= 0.0 { 1 } else { -1 };
    Ok(BogoliubovTransform { space: space.clone(), matrix: u, parity, det })
}

/// dim ker(PUP) mod 2 on ran(P), reported as a sign: +1 for an even kernel,
/// -1 for odd. Agrees with the determinant parity of a Bogoliubov U.
pub fn kernel_parity(u: &CMatrix, p: &BasisProjection, zero_tol: f64) -> Result<i8> {
    // Compress PUP onto an orthonormal basis of ran(P): the eigenvectors of
    // P with eigenvalue 1.
    let (vals, vecs) = crate::linalg::herm_eig(p.matrix())?;
    let n = vals.len();
    let mut cols = Vec::new();
    for (k, &v) in vals.iter().enumerate() {
        if v > 0.5 {
            cols.push(k);
        }
    }
    let mut basis = CMatrix::zeros(n, cols.len());
    for (j, &k) in cols.iter().enumerate() {
        basis.set_column(j, &vecs.column(k));
    }
    let compressed = basis.adjoint() * u * &basis;
    let sv = compressed.singular_values();
    let kernel_dim = sv.iter().filter(|&&s| s < zero_tol).count();
    Ok(if kernel_dim.is_multiple_of(2) { 1 } else { -1 })
}

/// Deterministic random self-dual Hamiltonian: a seeded Hermitian draw
/// projected onto the self-dual subspace via H = (A - ΓAΓ)/2.
pub fn random_self_dual(
    space: &Arc<SelfDualSpace>,
    seed: u64,
    norm_scale: f64,
) -> SelfDualHamiltonian {
    assert!(norm_scale > 0.0, "norm_scale must be positive");
    let n = space.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw = CMatrix::from_fn(n, n, |_, _| {
        C64::new(rng.gen::<f64>() * 2.0 - 1.0, rng.gen::<f64>() * 2.0 - 1.0)
    });
    let herm = hermitize(&raw);
    let projected = (&herm - space.gamma_conj(&herm)).scale(0.5 * norm_scale);
    let meta = HamiltonianMeta {
        model: "random-self-dual".into(),
        seed: Some(seed),
        ..Default::default()
    };
    SelfDualHamiltonian::validate(space.clone(), projected, meta, &Tolerances::DEFAULT)
        .expect("symmetrized draw is self-dual by construction")
}

/// Random Bogoliubov transformation exp(iD) for a seeded self-dual D. Its
/// determinant is +1; compose with `pair_swap_reflection` for the odd
/// component.
pub fn random_bogoliubov(space: &Arc<SelfDualSpace>, seed: u64) -> BogoliubovTransform {
    let d = random_self_dual(space, seed, 1.0);
    let u = crate::linalg::herm_exp(d.matrix(), C64::new(0.0, 1.0)).expect("eig of Hermitian");
    bogoliubov_parity(space, u, &Tolerances::DEFAULT).expect("exp(iD) is Bogoliubov")
}

/// The unitary swapping one ± pair of basis vectors. It commutes with Γ and
/// has determinant -1.
pub fn pair_swap_reflection(space: &Arc<SelfDualSpace>, mode: usize) -> CMatrix {
    let n = space.dim();
    let minus = space.minus_indices();
    let i = minus[mode];
    let j = space.partner_index(i);
    let mut m = CMatrix::identity(n, n);
    m[(i, i)] = C64::new(0.0, 0.0);
    m[(j, j)] = C64::new(0.0, 0.0);
    m[(i, j)] = C64::new(1.0, 0.0);
    m[(j, i)] = C64::new(1.0, 0.0);
    m
}
