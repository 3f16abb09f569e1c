//! Quasi-free states: symbols (tracial, Gibbs, ground), Pfaffian evaluation
//! of monomials in the field operators, the deterministic observable family
//! and the weak* distance it induces.

use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{fro, herm_eig, herm_fn, CMatrix, CVector};
use crate::operators::SelfDualHamiltonian;
use crate::pfaffian::pfaffian;
use crate::space::SelfDualSpace;
use crate::spectral::{resolve, SpectralResolution};

/// The symbol of a quasi-free state: a positive contraction S with
/// S + ΓSΓ = 1. Two-point functions are ω(B(φ)B(χ)*) = ⟨φ, Sχ⟩.
#[derive(Debug, Clone)]
pub struct Symbol {
    space: Arc<SelfDualSpace>,
    matrix: CMatrix,
}

impl Symbol {
    pub fn validate(space: Arc<SelfDualSpace>, matrix: CMatrix) -> Result<Self> {
        let n = space.dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::ShapeMismatch { expected: n, got: matrix.nrows() });
        }
        let herm = fro(&(&matrix - matrix.adjoint()));
        if herm > 1e-9 {
            return Err(Error::NotHermitian { residual: herm, tol: 1e-9 });
        }
        let (vals, _) = herm_eig(&matrix)?;
        for v in vals {
            if !(-1e-10..=1.0 + 1e-10).contains(&v) {
                return Err(Error::InvalidConfig(format!(
                    "symbol eigenvalue {v} outside [0, 1]"
                )));
            }
        }
        let id = CMatrix::identity(n, n);
        let res = fro(&(&matrix + space.gamma_conj(&matrix) - id));
        if res > 1e-9 {
            return Err(Error::NotSelfDual { residual: res, tol: 1e-9 });
        }
        Ok(Symbol { space, matrix })
    }

    pub fn space(&self) -> &Arc<SelfDualSpace> {
        &self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }
}

/// Symbol of the tracial state: S = 1/2.
pub fn tracial_symbol(space: &Arc<SelfDualSpace>) -> Symbol {
    let n = space.dim();
    Symbol { space: space.clone(), matrix: CMatrix::identity(n, n).scale(0.5) }
}

/// Symbol of the Gibbs state, S = (1 + e^{-βH})^{-1}. At β = 0 this is the
/// tracial symbol exactly.
pub fn gibbs_symbol_from(res: &SpectralResolution, beta: f64) -> Result<Symbol> {
    if beta < 0.0 {
        return Err(Error::InvalidConfig("beta must be non-negative".into()));
    }
    if beta == 0.0 {
        return Ok(tracial_symbol(res.space()));
    }
    let m = herm_fn(&res.eigenvalues, &res.eigenvectors, |x| {
        C64::new(1.0 / (1.0 + (-beta * x).exp()), 0.0)
    });
    Symbol::validate(res.space().clone(), m)
}

pub fn gibbs_symbol(h: &SelfDualHamiltonian, beta: f64) -> Result<Symbol> {
    gibbs_symbol_from(&resolve(h, None)?, beta)
}

/// Symbol of the unique quasi-free ground state: S = E+. The zero band must
/// be empty, otherwise the ground state is not unique.
pub fn ground_symbol(res: &SpectralResolution) -> Result<Symbol> {
    if res.n_zero > 0 {
        return Err(Error::GapClosed { gap: res.gap, zero_tol: res.zero_tol });
    }
    Symbol::validate(res.space().clone(), res.e_plus().clone())
}

/// A product of field operators. Each factor is a vector φ with a star flag:
/// B(φ) or B(φ)*. Starred factors rewrite internally as B(φ)* = B(Γφ).
#[derive(Debug, Clone)]
pub struct Monomial {
    pub factors: Vec<(CVector, bool)>,
}

impl Monomial {
    pub fn new(factors: Vec<(CVector, bool)>) -> Self {
        Monomial { factors }
    }

    /// B(e_{i1}) ... B(e_{ik}) over canonical basis vectors of `space`.
    pub fn from_indices(space: &SelfDualSpace, idx: &[usize]) -> Self {
        let factors = idx
            .iter()
            .map(|&i| {
                let mut v = CVector::zeros(space.dim());
                v[i] = C64::new(1.0, 0.0);
                (v, false)
            })
            .collect();
        Monomial { factors }
    }

    pub fn degree(&self) -> usize {
        self.factors.len()
    }

    /// The adjoint monomial: reversed order, stars flipped.
    pub fn adjoint(&self) -> Monomial {
        let factors =
            self.factors.iter().rev().map(|(v, s)| (v.clone(), !s)).collect();
        Monomial { factors }
    }

    /// Factors with the stars resolved through B(φ)* = B(Γφ).
    pub fn plain_factors(&self, space: &SelfDualSpace) -> Result<Vec<CVector>> {
        self.factors
            .iter()
            .map(|(v, star)| {
                if v.len() != space.dim() {
                    return Err(Error::SpaceMismatch { expected: space.dim(), got: v.len() });
                }
                Ok(if *star { space.gamma_apply(v) } else { v.clone() })
            })
            .collect()
    }
}

/// ω(B(ψ)B(χ)) = ⟨ψ, S Γχ⟩ for plain (unstarred) factors.
fn pair_value(sym: &Symbol, psi: &CVector, chi: &CVector) -> C64 {
    let s_gamma_chi = sym.matrix() * sym.space().gamma_apply(chi);
    psi.dotc(&s_gamma_chi)
}

/// Quasi-free evaluation: odd monomials vanish; even ones are the Pfaffian
/// of the skew matrix of pair values.
pub fn evaluate(sym: &Symbol, m: &Monomial) -> Result<C64> {
    let space = sym.space();
    let psi = m.plain_factors(space)?;
    let k = psi.len();
    if k == 0 {
        return Ok(C64::new(1.0, 0.0));
    }
    if k % 2 == 1 {
        return Ok(C64::new(0.0, 0.0));
    }
    let mut mat = CMatrix::zeros(k, k);
    for a in 0..k {
        for b in a + 1..k {
            let v = pair_value(sym, &psi[a], &psi[b]);
            mat[(a, b)] = v;
            mat[(b, a)] = -v;
        }
    }
    pfaffian(&mat)
}

/// Deterministic observable family: even monomials of degree 2 then 4 over
/// canonical basis vectors, strictly increasing index tuples in
/// lexicographic order, truncated at `n_max`. Each has operator norm <= 1.
pub fn canonical_family(space: &SelfDualSpace, n_max: usize) -> Vec<Monomial> {
    let dim = space.dim();
    let mut out = Vec::new();
    'outer: {
        for i in 0..dim {
            for j in i + 1..dim {
                if out.len() >= n_max {
                    break 'outer;
                }
                out.push(Monomial::from_indices(space, &[i, j]));
            }
        }
        for i in 0..dim {
            for j in i + 1..dim {
                for k in j + 1..dim {
                    for l in k + 1..dim {
                        if out.len() >= n_max {
                            break 'outer;
                        }
                        out.push(Monomial::from_indices(space, &[i, j, k, l]));
                    }
                }
            }
        }
    }
    out
}

/// d(ω1, ω2) = Σ_n 2^{-n} |ω1(A_n) - ω2(A_n)| over the family (n is
/// 1-based).
pub fn weakstar_distance(s1: &Symbol, s2: &Symbol, family: &[Monomial]) -> Result<f64> {
    if s1.space().dim() != s2.space().dim() {
        return Err(Error::SpaceMismatch { expected: s1.space().dim(), got: s2.space().dim() });
    }
    let mut d = 0.0;
    for (n, a) in family.iter().enumerate() {
        let w = (evaluate(s1, a)? - evaluate(s2, a)?).norm();
        d += w / 2f64.powi(n as i32 + 1);
    }
    Ok(d)
}

/// The first observable separating the two states: returns (m, w) with m
/// the 1-based index and w = |ω1(A_m) - ω2(A_m)| > tol. The distance then
/// obeys d >= w / 2^m.
pub fn first_separating(
    s1: &Symbol,
    s2: &Symbol,
    family: &[Monomial],
    tol: f64,
) -> Result<Option<(usize, f64)>> {
    for (n, a) in family.iter().enumerate() {
        let w = (evaluate(s1, a)? - evaluate(s2, a)?).norm();
        if w > tol {
            return Ok(Some((n + 1, w)));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::random_self_dual;

    fn random_gapped(n_modes: usize, mut seed: u64) -> (Arc<SelfDualSpace>, SpectralResolution) {
        let space = SelfDualSpace::synthetic(n_modes);
        loop {
            let h = random_self_dual(&space, seed, 1.0);
            let r = resolve(&h, None).unwrap();
            if r.gap_defined && r.gap > 0.05 {
                return (space, r);
            }
            seed += 500;
        }
    }

    #[test]
    fn tracial_two_point_is_half_norm() {
        let space = SelfDualSpace::synthetic(3);
        let s = tracial_symbol(&space);
        let mut v = CVector::zeros(6);
        v[0] = C64::new(0.6, 0.3);
        v[4] = C64::new(-0.2, 0.9);
        let m = Monomial::new(vec![(v.clone(), false), (v.clone(), true)]);
        let got = evaluate(&s, &m).unwrap();
        let want = 0.5 * v.norm_squared();
        assert!((got - C64::new(want, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn odd_monomials_vanish() {
        let (space, res) = random_gapped(3, 1);
        let s = ground_symbol(&res).unwrap();
        let m = Monomial::from_indices(&space, &[0, 2, 3]);
        assert_eq!(evaluate(&s, &m).unwrap(), C64::new(0.0, 0.0));
    }

    #[test]
    fn gibbs_limits() {
        let (space, res) = random_gapped(3, 3);
        let s0 = gibbs_symbol_from(&res, 0.0).unwrap();
        let tr = tracial_symbol(&space);
        assert_eq!(s0.matrix(), tr.matrix());
        let beta = 50.0;
        let s = gibbs_symbol_from(&res, beta).unwrap();
        let e_plus = res.e_plus();
        let err = crate::linalg::two_norm(&(s.matrix() - e_plus));
        let bound = (-beta * res.gap).exp() * (1.0 + 1e-6);
        assert!(err <= bound, "err {err} bound {bound}");
    }

    #[test]
    fn gibbs_diagonal_pair_values() {
        let space = SelfDualSpace::synthetic(1);
        let eps = 0.7;
        let m = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            C64::new(eps, 0.0),
            C64::new(-eps, 0.0),
        ]));
        let h = SelfDualHamiltonian::new(space, m).unwrap();
        let beta = 2.3;
        let s = gibbs_symbol(&h, beta).unwrap();
        let want0 = 1.0 / (1.0 + (-beta * eps).exp());
        let want1 = 1.0 / (1.0 + (beta * eps).exp());
        assert!((s.matrix()[(0, 0)].re - want0).abs() < 1e-12);
        assert!((s.matrix()[(1, 1)].re - want1).abs() < 1e-12);
    }

    #[test]
    fn ground_symbol_requires_open_gap() {
        let space = SelfDualSpace::synthetic(1);
        let h = SelfDualHamiltonian::new(space, CMatrix::zeros(2, 2)).unwrap();
        let r = resolve(&h, None).unwrap();
        assert!(matches!(ground_symbol(&r), Err(Error::GapClosed { .. })));
    }

    #[test]
    fn car_anticommutator_holds_for_all_symbols() {
        let (space, res) = random_gapped(3, 7);
        let symbols = vec![
            tracial_symbol(&space),
            gibbs_symbol_from(&res, 1.0).unwrap(),
            ground_symbol(&res).unwrap(),
        ];
        let mut phi = CVector::zeros(6);
        let mut chi = CVector::zeros(6);
        for i in 0..6 {
            phi[i] = C64::new(0.1 * i as f64 - 0.2, 0.05 * i as f64);
            chi[i] = C64::new(0.3 - 0.07 * i as f64, -0.02 * i as f64);
        }
        for s in &symbols {
            let a = evaluate(s, &Monomial::new(vec![(phi.clone(), false), (chi.clone(), true)]))
                .unwrap();
            let b = evaluate(s, &Monomial::new(vec![(chi.clone(), true), (phi.clone(), false)]))
                .unwrap();
            let want = phi.dotc(&chi);
            assert!((a + b - want).norm() < 1e-12);
        }
    }

    #[test]
    fn states_are_hermitian() {
        let (space, res) = random_gapped(2, 9);
        let s = gibbs_symbol_from(&res, 0.7).unwrap();
        for idx in [vec![0usize, 1], vec![0, 1, 2, 3], vec![3, 2, 1, 0]] {
            let m = Monomial::from_indices(&space, &idx);
            let v = evaluate(&s, &m).unwrap();
            let vs = evaluate(&s, &m.adjoint()).unwrap();
            assert!((vs - v.conj()).norm() < 1e-12);
        }
    }

    #[test]
    fn weakstar_distance_is_a_metric_on_samples() {
        let (space, res) = random_gapped(2, 11);
        let fam = canonical_family(&space, 64);
        // first observable is B(e0) B(e0)* = B(e0) B(e1)
        let tr = tracial_symbol(&space);
        let gr = ground_symbol(&res).unwrap();
        let gb = gibbs_symbol_from(&res, 0.5).unwrap();
        assert_eq!(weakstar_distance(&tr, &tr, &fam).unwrap(), 0.0);
        let dtg = weakstar_distance(&tr, &gr, &fam).unwrap();
        assert!(dtg > 0.0);
        // symmetry
        assert!((dtg - weakstar_distance(&gr, &tr, &fam).unwrap()).abs() < 1e-15);
        // triangle inequality
        let dtb = weakstar_distance(&tr, &gb, &fam).unwrap();
        let dbg = weakstar_distance(&gb, &gr, &fam).unwrap();
        assert!(dtg <= dtb + dbg + 1e-15);
        // separating bound
        let (m, w) = first_separating(&tr, &gr, &fam, 1e-9).unwrap().unwrap();
        assert!(dtg >= w / 2f64.powi(m as i32) - 1e-15);
    }
}
