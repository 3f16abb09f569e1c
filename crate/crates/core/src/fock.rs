//! Exact dense Fock-space oracle for small systems: field operators in the
//! Fock representation fixed by the canonical basis projection, bilinear
//! Hamiltonians as 2^n × 2^n matrices, and vacuum / Gibbs / ground-vector
//! expectations. Everything here is an independent cross-check for the
//! Pfaffian evaluation path.

use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{herm_eig, herm_fn, CMatrix, CVector};
use crate::qf::Monomial;
use crate::space::SelfDualSpace;

pub const MAX_MODES: usize = 10;

/// Dense Fock representation over the canonical basis projection of a
/// space. Basis states are occupation bitstrings in lexicographic order;
/// creation signs come from the popcount of lower-index occupied modes.
pub struct FockOracle {
    space: Arc<SelfDualSpace>,
    n_modes: usize,
    dim: usize,
    minus: Vec<usize>,
    annihilators: Vec<CMatrix>,
}

impl FockOracle {
    pub fn canonical(space: &Arc<SelfDualSpace>) -> Result<Self> {
        let n_modes = space.n_modes();
        if n_modes > MAX_MODES {
            return Err(Error::TooManyModes { max: MAX_MODES, got: n_modes });
        }
        let dim = 1usize << n_modes;
        let minus = space.minus_indices();
        let mut annihilators = Vec::with_capacity(n_modes);
        for j in 0..n_modes {
            let mut a = CMatrix::zeros(dim, dim);
            let mask_low = (1usize << j) - 1;
            for b in 0..dim {
                if b & (1 << j) != 0 {
                    let sign = if (b & mask_low).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
                    a[(b ^ (1 << j), b)] = C64::new(sign, 0.0);
                }
            }
            annihilators.push(a);
        }
        Ok(FockOracle { space: space.clone(), n_modes, dim, minus, annihilators })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn fock_dim(&self) -> usize {
        self.dim
    }

    pub fn space(&self) -> &Arc<SelfDualSpace> {
        &self.space
    }

    pub fn annihilator(&self, j: usize) -> &CMatrix {
        &self.annihilators[j]
    }

    /// The vacuum vector (no occupied modes).
    pub fn vacuum(&self) -> CVector {
        let mut v = CVector::zeros(self.dim);
        v[0] = C64::new(1.0, 0.0);
        v
    }

    /// π(B(φ)) = a(Pφ) + a*(Γ P⊥ φ) as a dense matrix; `star` applies the
    /// adjoint, which equals π(B(Γφ)).
    pub fn field(&self, phi: &CVector, star: bool) -> Result<CMatrix> {
        if phi.len() != self.space.dim() {
            return Err(Error::SpaceMismatch { expected: self.space.dim(), got: phi.len() });
        }
        // hole components of φ, pulled back through Γ
        let mut p_perp = phi.clone();
        for &i in &self.minus {
            p_perp[i] = C64::new(0.0, 0.0);
        }
        let hole = self.space.gamma_apply(&p_perp);
        let mut out = CMatrix::zeros(self.dim, self.dim);
        for (j, &mi) in self.minus.iter().enumerate() {
            let c_ann = phi[mi].conj();
            let c_cre = hole[mi];
            if c_ann.norm() > 0.0 {
                out += self.annihilators[j].scale(1.0) * c_ann;
            }
            if c_cre.norm() > 0.0 {
                out += self.annihilators[j].adjoint() * c_cre;
            }
        }
        Ok(if star { out.adjoint() } else { out })
    }

    /// Applies the monomial to a state vector, rightmost factor first.
    fn apply_monomial(&self, m: &Monomial, v: &CVector) -> Result<CVector> {
        let mut out = v.clone();
        for (phi, star) in m.factors.iter().rev() {
            let op = self.field(phi, *star)?;
            out = op * out;
        }
        Ok(out)
    }

    /// ⟨Ω, π(m) Ω⟩.
    pub fn expectation(&self, m: &Monomial) -> Result<C64> {
        self.vector_expectation(&self.vacuum(), m)
    }

    /// ⟨ψ, π(m) ψ⟩ / ⟨ψ, ψ⟩.
    pub fn vector_expectation(&self, psi: &CVector, m: &Monomial) -> Result<C64> {
        let applied = self.apply_monomial(m, psi)?;
        Ok(psi.dotc(&applied) / psi.norm_squared())
    }

    /// The bilinear element Σ_ij ⟨ψ_i, H ψ_j⟩ B(ψ_j) B(ψ_i)* over the full
    /// canonical basis of the space, as a Fock-space matrix.
    pub fn bilinear(&self, h: &CMatrix) -> Result<CMatrix> {
        let n = self.space.dim();
        if h.nrows() != n || h.ncols() != n {
            return Err(Error::ShapeMismatch { expected: n, got: h.nrows() });
        }
        let mut fields = Vec::with_capacity(n);
        for i in 0..n {
            let mut e = CVector::zeros(n);
            e[i] = C64::new(1.0, 0.0);
            fields.push(self.field(&e, false)?);
        }
        let mut k = CMatrix::zeros(self.dim, self.dim);
        for i in 0..n {
            let fi_adj = fields[i].adjoint();
            for j in 0..n {
                let c = h[(i, j)];
                if c.norm() > 0.0 {
                    k += (&fields[j] * &fi_adj) * c;
                }
            }
        }
        Ok(k)
    }

    /// Normalized Gibbs density matrix e^{(β/2) K} / Z for a bilinear K.
    pub fn gibbs_density(&self, k: &CMatrix, beta: f64) -> Result<CMatrix> {
        let (vals, vecs) = herm_eig(k)?;
        // shift by the max to keep the exponentials bounded
        let top = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let rho = herm_fn(&vals, &vecs, |x| C64::new((0.5 * beta * (x - top)).exp(), 0.0));
        let z = rho.trace();
        Ok(rho * (1.0 / z))
    }

    /// tr(ρ π(m)) = Σ_{b,c} ρ_bc (π(m))_cb.
    pub fn density_expectation(&self, rho: &CMatrix, m: &Monomial) -> Result<C64> {
        let mut out = C64::new(0.0, 0.0);
        for b in 0..self.dim {
            let mut e = CVector::zeros(self.dim);
            e[b] = C64::new(1.0, 0.0);
            let applied = self.apply_monomial(m, &e)?;
            for c in 0..self.dim {
                out += rho[(b, c)] * applied[c];
            }
        }
        Ok(out)
    }

    /// The eigenvector of K with the largest eigenvalue: the many-body
    /// ground state of the bilinear Hamiltonian in this sign convention
    /// (the β → ∞ limit of the Gibbs weight e^{(β/2)K}).
    pub fn top_eigenvector(&self, k: &CMatrix) -> Result<CVector> {
        let (vals, vecs) = herm_eig(k)?;
        let n = vals.len();
        Ok(CVector::from_column_slice(vecs.column(n - 1).as_slice()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::fro;
    use crate::operators::random_self_dual;
    use crate::qf::{evaluate, ground_symbol, tracial_symbol};
    use crate::spectral::resolve;

    #[test]
    fn car_holds_on_matrices() {
        let space = SelfDualSpace::synthetic(3);
        let oracle = FockOracle::canonical(&space).unwrap();
        let id = CMatrix::identity(8, 8);
        for i in 0..3 {
            for j in 0..3 {
                let ai = oracle.annihilator(i);
                let aj = oracle.annihilator(j);
                let anti = ai * aj.adjoint() + aj.adjoint() * ai;
                let want = if i == j { id.clone() } else { CMatrix::zeros(8, 8) };
                assert!(fro(&(anti - want)) < 1e-12);
                let anti2 = ai * aj + aj * ai;
                assert!(fro(&anti2) < 1e-12);
            }
        }
        // annihilators kill the vacuum
        for j in 0..3 {
            assert!((oracle.annihilator(j) * oracle.vacuum()).norm() < 1e-15);
        }
    }

    #[test]
    fn occupied_mode_expectation() {
        // ⟨Ω, π(B(φ) B(φ)*) Ω⟩ = ‖φ‖² for φ in ran P
        let space = SelfDualSpace::synthetic(2);
        let oracle = FockOracle::canonical(&space).unwrap();
        let minus = space.minus_indices();
        let mut phi = CVector::zeros(4);
        phi[minus[0]] = C64::new(0.6, 0.0);
        phi[minus[1]] = C64::new(0.0, -0.8);
        let m = Monomial::new(vec![(phi.clone(), false), (phi.clone(), true)]);
        let got = oracle.expectation(&m).unwrap();
        assert!((got - C64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn too_many_modes_is_rejected() {
        let space = SelfDualSpace::synthetic(11);
        assert!(matches!(
            FockOracle::canonical(&space),
            Err(Error::TooManyModes { .. })
        ));
    }

    #[test]
    fn tracial_matches_gibbs_at_beta_zero() {
        let space = SelfDualSpace::synthetic(2);
        let oracle = FockOracle::canonical(&space).unwrap();
        let h = random_self_dual(&space, 5, 1.0);
        let k = oracle.bilinear(h.matrix()).unwrap();
        let rho = oracle.gibbs_density(&k, 0.0).unwrap();
        assert!((rho.trace() - C64::new(1.0, 0.0)).norm() < 1e-12);
        let s = tracial_symbol(&space);
        for idx in [[0usize, 1], [0, 2], [1, 3]] {
            let m = Monomial::from_indices(&space, &idx);
            let a = oracle.density_expectation(&rho, &m).unwrap();
            let b = evaluate(&s, &m).unwrap();
            assert!((a - b).norm() < 1e-12, "{idx:?}: {a} vs {b}");
        }
    }

    #[test]
    fn gibbs_density_two_points_match_gibbs_symbol() {
        // complex rho: catches transposition/conjugation slips in the trace
        let space = SelfDualSpace::synthetic(2);
        let oracle = FockOracle::canonical(&space).unwrap();
        let h = random_self_dual(&space, 21, 1.0);
        let k = oracle.bilinear(h.matrix()).unwrap();
        let beta = 0.7;
        let rho = oracle.gibbs_density(&k, beta).unwrap();
        let res = resolve(&h, None).unwrap();
        let s = crate::qf::gibbs_symbol_from(&res, beta).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let m = Monomial::from_indices(&space, &[i, j]);
                let a = oracle.density_expectation(&rho, &m).unwrap();
                let b = evaluate(&s, &m).unwrap();
                assert!((a - b).norm() < 1e-10, "({i},{j}): {a} vs {b}");
            }
        }
    }

    #[test]
    fn ground_state_two_points_match_plus_projection() {
        let space = SelfDualSpace::synthetic(3);
        let h = random_self_dual(&space, 8, 1.0);
        let res = resolve(&h, None).unwrap();
        if !res.gap_defined {
            return;
        }
        let oracle = FockOracle::canonical(&space).unwrap();
        let k = oracle.bilinear(h.matrix()).unwrap();
        let psi = oracle.top_eigenvector(&k).unwrap();
        let s = ground_symbol(&res).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                let m = Monomial::from_indices(&space, &[i, j]);
                let a = oracle.vector_expectation(&psi, &m).unwrap();
                let b = evaluate(&s, &m).unwrap();
                assert!((a - b).norm() < 1e-9, "({i},{j}): {a} vs {b}");
            }
        }
    }

    #[test]
    fn conjugation_identity_moves_fields() {
        // e^{-(z/2) K} π(B(φ)*) e^{(z/2) K} = π(B(e^{zH} φ)*)
        let space = SelfDualSpace::synthetic(2);
        let oracle = FockOracle::canonical(&space).unwrap();
        let h = random_self_dual(&space, 13, 1.0);
        let k = oracle.bilinear(h.matrix()).unwrap();
        let z = C64::new(0.0, 0.3);
        let (kv, kw) = herm_eig(&k).unwrap();
        let exp_plus = herm_fn(&kv, &kw, |x| (z * 0.5 * x).exp());
        let exp_minus = herm_fn(&kv, &kw, |x| (-z * 0.5 * x).exp());
        let mut phi = CVector::zeros(4);
        phi[0] = C64::new(0.3, -0.4);
        phi[2] = C64::new(-0.1, 0.8);
        phi[3] = C64::new(0.05, 0.0);
        let lhs = &exp_minus * oracle.field(&phi, true).unwrap() * &exp_plus;
        let (hv, hw) = herm_eig(h.matrix()).unwrap();
        let ezh = herm_fn(&hv, &hw, |x| (z * x).exp());
        let rhs = oracle.field(&(ezh * &phi), true).unwrap();
        assert!(fro(&(lhs - rhs)) < 1e-9);
    }
}
