//! Concrete lattice models: boxes in Z^d, graph Laplacians, Anderson
//! disorder, Kitaev-chain pairing, the quadratic-to-self-dual embedding and
//! finite-volume restriction with its boundary term.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Tolerances};
use crate::linalg::{fro, CMatrix};
use crate::operators::{HamiltonianMeta, SelfDualHamiltonian};
use crate::space::{box_labels, Geometry, SelfDualSpace, SiteLabel, Tag};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Open,
    Periodic,
}

/// Geometry of a cubic box Λ_L = {x ∈ Z^d : |x_i| <= L} with a spin set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LatticeConfig {
    pub d: usize,
    pub l: i64,
    pub spins: Vec<String>,
    pub boundary: Boundary,
    /// Exponent of the pseudometric |x - y|^epsilon.
    pub epsilon: f64,
}

impl LatticeConfig {
    pub fn new(d: usize, l: i64, spins: Vec<String>, boundary: Boundary, epsilon: f64) -> Result<Self> {
        let cfg = LatticeConfig { d, l, spins, boundary, epsilon };
        cfg.check()?;
        Ok(cfg)
    }

    pub fn chain(l: i64) -> Self {
        LatticeConfig { d: 1, l, spins: vec!["0".into()], boundary: Boundary::Open, epsilon: 1.0 }
    }

    pub fn check(&self) -> Result<()> {
        if self.d < 1 {
            return Err(Error::InvalidConfig("dimension must be at least 1".into()));
        }
        if self.l < 0 {
            return Err(Error::InvalidConfig("box radius must be non-negative".into()));
        }
        if self.spins.is_empty() {
            return Err(Error::InvalidConfig("spin set must be nonempty".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(Error::InvalidConfig("epsilon must lie in (0, 1]".into()));
        }
        Ok(())
    }

    pub fn side(&self) -> i64 {
        2 * self.l + 1
    }

    pub fn n_sites(&self) -> usize {
        (self.side() as usize).pow(self.d as u32)
    }

    pub fn n_spins(&self) -> usize {
        self.spins.len()
    }

    /// Sites of the box in lexicographic order.
    pub fn sites(&self) -> Vec<Vec<i64>> {
        let mut out = Vec::with_capacity(self.n_sites());
        let mut site = vec![-self.l; self.d];
        loop {
            out.push(site.clone());
            let mut k = self.d;
            loop {
                if k == 0 {
                    return out;
                }
                k -= 1;
                if site[k] < self.l {
                    site[k] += 1;
                    for x in site.iter_mut().skip(k + 1) {
                        *x = -self.l;
                    }
                    break;
                }
            }
        }
    }

    /// Nearest neighbors of a site, respecting the boundary condition.
    fn neighbors(&self, site: &[i64]) -> Vec<Vec<i64>> {
        let mut out = Vec::with_capacity(2 * self.d);
        let side = self.side();
        for k in 0..self.d {
            for step in [-1i64, 1] {
                let mut n = site.to_vec();
                n[k] += step;
                if n[k].abs() > self.l {
                    match self.boundary {
                        Boundary::Open => continue,
                        Boundary::Periodic => {
                            if side < 3 {
                                continue; // no wrap on degenerate rings
                            }
                            n[k] -= step * side;
                        }
                    }
                }
                out.push(n);
            }
        }
        out
    }

    fn geometry(&self) -> Geometry {
        match self.boundary {
            Boundary::Open => Geometry::Open,
            Boundary::Periodic => Geometry::Periodic { extent: vec![self.side(); self.d] },
        }
    }
}

/// Builds the self-dual space over X_L = Λ_L × spins × {+,-}.
pub fn build_box_space(config: &LatticeConfig) -> Result<Arc<SelfDualSpace>> {
    config.check()?;
    let labels = box_labels(config.d, config.l, config.n_spins() as u32);
    SelfDualSpace::make_space_with_geometry(labels, config.geometry())
}

fn site_index(sites: &[Vec<i64>], site: &[i64]) -> usize {
    sites.iter().position(|s| s == site).expect("neighbor inside box")
}

/// Graph Laplacian on the one-particle space l2(Λ_L × spins):
/// [Δψ](v) = deg(v) ψ(v) - s Σ_neighbors ψ(w), spin-diagonal.
pub fn build_laplacian(config: &LatticeConfig, hopping_scale: f64) -> CMatrix {
    let sites = config.sites();
    let ns = config.n_spins();
    let n = sites.len() * ns;
    let mut h = CMatrix::zeros(n, n);
    for (i, site) in sites.iter().enumerate() {
        let neigh = config.neighbors(site);
        for sp in 0..ns {
            let row = i * ns + sp;
            h[(row, row)] = C64::new(neigh.len() as f64, 0.0);
            for w in &neigh {
                let col = site_index(&sites, w) * ns + sp;
                h[(row, col)] += C64::new(-hopping_scale, 0.0);
            }
        }
    }
    h
}

/// One disorder draw: i.i.d. uniform values on [-1, 1], one per site, keyed
/// by (seed, site) with a counter-based mix so the values do not depend on
/// enumeration order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DisorderRealization {
    pub seed: u64,
    pub lambda: f64,
    pub potential: Vec<f64>,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

fn site_key(seed: u64, site: &[i64]) -> u64 {
    let mut k = splitmix64(seed ^ 0x5851f42d4c957f2d);
    for &c in site {
        k = splitmix64(k ^ (c as u64).wrapping_mul(0x2545f4914f6cdd1d));
    }
    k
}

impl DisorderRealization {
    pub fn new(seed: u64, lambda: f64, sites: &[Vec<i64>]) -> Result<Self> {
        if lambda < 0.0 {
            return Err(Error::InvalidConfig("lambda must be non-negative".into()));
        }
        let potential = sites
            .iter()
            .map(|s| {
                let u = site_key(seed, s);
                // 53-bit mantissa draw mapped to [-1, 1]
                let x = (u >> 11) as f64 / (1u64 << 53) as f64;
                2.0 * x - 1.0
            })
            .collect();
        Ok(DisorderRealization { seed, lambda, potential })
    }

    pub fn for_box(seed: u64, lambda: f64, config: &LatticeConfig) -> Result<Self> {
        Self::new(seed, lambda, &config.sites())
    }
}

/// Random tight-binding Hamiltonian h = Δ + λ V_ρ on the one-particle space.
pub fn build_anderson(
    config: &LatticeConfig,
    realization: &DisorderRealization,
    hopping_scale: f64,
) -> Result<CMatrix> {
    let sites = config.sites();
    if realization.potential.len() != sites.len() {
        return Err(Error::ShapeMismatch { expected: sites.len(), got: realization.potential.len() });
    }
    let ns = config.n_spins();
    let mut h = build_laplacian(config, hopping_scale);
    for (i, &v) in realization.potential.iter().enumerate() {
        for sp in 0..ns {
            let k = i * ns + sp;
            h[(k, k)] += C64::new(realization.lambda * v, 0.0);
        }
    }
    Ok(h)
}

/// A quadratic fermion model: Hermitian hopping block h and skew pairing
/// block g, both on the one-particle space.
#[derive(Debug, Clone)]
pub struct QuadraticModel {
    pub h: CMatrix,
    pub g: CMatrix,
}

impl QuadraticModel {
    pub fn new(h: CMatrix, g: CMatrix) -> Result<Self> {
        let n = h.nrows();
        if h.ncols() != n || g.nrows() != n || g.ncols() != n {
            return Err(Error::ShapeMismatch { expected: n, got: g.nrows() });
        }
        let herm = fro(&(&h - h.adjoint()));
        let scale = fro(&h).max(1.0);
        if herm > 1e-10 * scale {
            return Err(Error::NotHermitian { residual: herm / scale, tol: 1e-10 });
        }
        let skew = fro(&(&g + g.transpose()));
        if skew > 1e-9 * fro(&g).max(1.0) {
            return Err(Error::NotSkew { residual: skew });
        }
        Ok(QuadraticModel { h, g })
    }

    pub fn gauge_invariant(h: CMatrix) -> Result<Self> {
        let n = h.nrows();
        let g = CMatrix::zeros(n, n);
        Self::new(h, g)
    }
}

/// Embeds a quadratic model as a self-dual Hamiltonian on `space`:
/// κ(h) + κ~(g), i.e. the matrix ½ [[h, g], [-conj(g), -hᵀ]] written in the
/// interleaved (mode, tag) basis order of the space.
pub fn embed_quadratic(
    model: &QuadraticModel,
    space: &Arc<SelfDualSpace>,
) -> Result<SelfDualHamiltonian> {
    let n_modes = space.n_modes();
    if model.h.nrows() != n_modes {
        return Err(Error::ShapeMismatch { expected: n_modes, got: model.h.nrows() });
    }
    let minus = space.minus_indices();
    let dim = space.dim();
    let mut m = CMatrix::zeros(dim, dim);
    for (i, &mi) in minus.iter().enumerate() {
        let pi = space.partner_index(mi);
        for (j, &mj) in minus.iter().enumerate() {
            let pj = space.partner_index(mj);
            let h = model.h[(i, j)];
            let g = model.g[(i, j)];
            m[(mi, mj)] += 0.5 * h;
            m[(pi, pj)] -= 0.5 * h.conj();
            m[(mi, pj)] += 0.5 * g;
            m[(pi, mj)] -= 0.5 * g.conj();
        }
    }
    let meta = HamiltonianMeta { model: "quadratic-embedding".into(), ..Default::default() };
    SelfDualHamiltonian::validate(space.clone(), m, meta, &Tolerances::DEFAULT)
}

/// Parameters of the Kitaev chain builder. Positions are centered so that
/// odd chains line up with box radii for finite-volume restriction.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct KitaevParams {
    pub t: f64,
    pub mu: f64,
    pub delta: f64,
    pub boundary: Boundary,
}

pub fn kitaev_space(n_sites: usize, boundary: Boundary) -> Result<Arc<SelfDualSpace>> {
    if n_sites < 2 {
        return Err(Error::InvalidConfig("Kitaev chain needs at least 2 sites".into()));
    }
    let offset = (n_sites as i64 - 1) / 2;
    let mut labels = Vec::with_capacity(2 * n_sites);
    for j in 0..n_sites {
        let x = j as i64 - offset;
        labels.push(SiteLabel::new(vec![x], 0, Tag::Minus));
        labels.push(SiteLabel::new(vec![x], 0, Tag::Plus));
    }
    let geometry = match boundary {
        Boundary::Open => Geometry::Open,
        Boundary::Periodic => Geometry::Periodic { extent: vec![n_sites as i64] },
    };
    SelfDualSpace::make_space_with_geometry(labels, geometry)
}

/// One-particle blocks of the Kitaev chain: hopping -t, chemical potential
/// -mu on site, nearest-neighbor pairing delta.
pub fn kitaev_blocks(n: usize, params: &KitaevParams) -> (CMatrix, CMatrix) {
    let mut h = CMatrix::zeros(n, n);
    let mut g = CMatrix::zeros(n, n);
    for j in 0..n {
        h[(j, j)] = C64::new(-params.mu, 0.0);
    }
    let mut bond = |a: usize, b: usize| {
        h[(a, b)] += C64::new(-params.t, 0.0);
        h[(b, a)] += C64::new(-params.t, 0.0);
        g[(a, b)] += C64::new(params.delta, 0.0);
        g[(b, a)] -= C64::new(params.delta, 0.0);
    };
    for j in 0..n - 1 {
        bond(j, j + 1);
    }
    if params.boundary == Boundary::Periodic && n > 2 {
        bond(n - 1, 0);
    }
    (h, g)
}

pub fn build_kitaev_chain(n_sites: usize, params: &KitaevParams) -> Result<SelfDualHamiltonian> {
    let space = kitaev_space(n_sites, params.boundary)?;
    let (h, g) = kitaev_blocks(n_sites, params);
    let model = QuadraticModel::new(h, g)?;
    let mut out = embed_quadratic(&model, &space)?;
    out.meta.model = "kitaev".into();
    Ok(out)
}

/// Kitaev chain with on-site disorder λV added to the chemical potential.
pub fn build_kitaev_disordered(
    n_sites: usize,
    params: &KitaevParams,
    realization: &DisorderRealization,
) -> Result<SelfDualHamiltonian> {
    let space = kitaev_space(n_sites, params.boundary)?;
    if realization.potential.len() != n_sites {
        return Err(Error::ShapeMismatch { expected: n_sites, got: realization.potential.len() });
    }
    let (mut h, g) = kitaev_blocks(n_sites, params);
    for (j, &v) in realization.potential.iter().enumerate() {
        h[(j, j)] += C64::new(realization.lambda * v, 0.0);
    }
    let model = QuadraticModel::new(h, g)?;
    let mut out = embed_quadratic(&model, &space)?;
    out.meta.model = "kitaev-disordered".into();
    out.meta.seed = Some(realization.seed);
    Ok(out)
}

/// Restricts a self-dual Hamiltonian on a large box to the sub-box of radius
/// `l_small` (labels with |x|_inf <= l_small). Returns the restricted
/// Hamiltonian on its own space together with the boundary term
/// ∂H = P H Pᶜ + Pᶜ H P on the large space.
pub fn restrict_finite_volume(
    h_big: &SelfDualHamiltonian,
    l_small: i64,
) -> Result<(SelfDualHamiltonian, CMatrix)> {
    let space = h_big.space();
    let inside: Vec<usize> = (0..space.dim())
        .filter(|&i| space.labels()[i].pos.iter().all(|&x| x.abs() <= l_small))
        .collect();
    if inside.is_empty() {
        return Err(Error::BoxMismatch { small: l_small, big: space.dim() as i64 });
    }
    if inside.len() == space.dim() {
        // full projector: boundary term vanishes
        let zero = CMatrix::zeros(space.dim(), space.dim());
        return Ok((h_big.clone(), zero));
    }
    let labels: Vec<SiteLabel> = inside.iter().map(|&i| space.labels()[i].clone()).collect();
    // restriction always produces an open sub-box
    let small_space = SelfDualSpace::make_space(labels)?;
    let m = h_big.matrix();
    let sub = CMatrix::from_fn(inside.len(), inside.len(), |a, b| m[(inside[a], inside[b])]);
    let meta = HamiltonianMeta {
        model: format!("{}|restricted", h_big.meta.model),
        seed: h_big.meta.seed,
        path_s: h_big.meta.path_s,
        ..Default::default()
    };
    let restricted = SelfDualHamiltonian::validate(small_space, sub, meta, &Tolerances::DEFAULT)?;

    let dim = space.dim();
    let mut is_inside = vec![false; dim];
    for &i in &inside {
        is_inside[i] = true;
    }
    let mut boundary = CMatrix::zeros(dim, dim);
    for a in 0..dim {
        for b in 0..dim {
            if is_inside[a] != is_inside[b] {
                boundary[(a, b)] = m[(a, b)];
            }
        }
    }
    Ok((restricted, boundary))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::herm_eig;

    #[test]
    fn box_dims_count() {
        let c = LatticeConfig::new(1, 0, vec!["0".into()], Boundary::Open, 1.0).unwrap();
        assert_eq!(build_box_space(&c).unwrap().dim(), 2);
        let c = LatticeConfig::new(2, 1, vec!["0".into()], Boundary::Open, 1.0).unwrap();
        assert_eq!(build_box_space(&c).unwrap().dim(), 18);
        let c = LatticeConfig::new(1, 2, vec!["u".into(), "d".into()], Boundary::Open, 1.0).unwrap();
        assert_eq!(build_box_space(&c).unwrap().dim(), 20);
    }

    #[test]
    fn laplacian_degree_only_at_zero_hopping() {
        let c = LatticeConfig::chain(1);
        let h = build_laplacian(&c, 0.0);
        for (i, want) in [1.0, 2.0, 1.0].iter().enumerate() {
            assert_eq!(h[(i, i)], C64::new(*want, 0.0));
        }
    }

    #[test]
    fn open_path_laplacian_matches_closed_form() {
        // P3 graph Laplacian eigenvalues 2 - 2cos(k pi / 3) = {0, 1, 3}
        let c = LatticeConfig::chain(1);
        let h = build_laplacian(&c, 1.0);
        let (vals, _) = herm_eig(&h).unwrap();
        for (v, want) in vals.iter().zip([0.0, 1.0, 3.0]) {
            assert!((v - want).abs() < 1e-12, "{v} vs {want}");
        }
    }

    #[test]
    fn periodic_ring_rows_sum_to_zero() {
        let c = LatticeConfig::new(1, 2, vec!["0".into()], Boundary::Periodic, 1.0).unwrap();
        let h = build_laplacian(&c, 1.0);
        for i in 0..h.nrows() {
            let s: C64 = (0..h.ncols()).map(|j| h[(i, j)]).sum();
            assert!(s.norm() < 1e-14);
        }
    }

    #[test]
    fn anderson_reduces_to_laplacian_and_differs_on_diagonal() {
        let c = LatticeConfig::chain(3);
        let r0 = DisorderRealization::for_box(7, 0.0, &c).unwrap();
        let h0 = build_anderson(&c, &r0, 1.0).unwrap();
        assert_eq!(h0, build_laplacian(&c, 1.0));
        let ra = DisorderRealization::for_box(7, 1.0, &c).unwrap();
        let rb = DisorderRealization::for_box(8, 1.0, &c).unwrap();
        let ha = build_anderson(&c, &ra, 1.0).unwrap();
        let hb = build_anderson(&c, &rb, 1.0).unwrap();
        let diff = &ha - &hb;
        for i in 0..diff.nrows() {
            for j in 0..diff.ncols() {
                if i != j {
                    assert_eq!(diff[(i, j)], C64::new(0.0, 0.0));
                }
            }
        }
        assert!(fro(&diff) > 1e-6);
        // same seed reproduces bit for bit
        let ra2 = DisorderRealization::for_box(7, 1.0, &c).unwrap();
        assert_eq!(ra.potential, ra2.potential);
        // all values inside [-1, 1]
        assert!(ra.potential.iter().all(|v| (-1.0..=1.0).contains(v)));
    }

    #[test]
    fn constant_potential_shifts_diagonal() {
        let c = LatticeConfig::chain(2);
        let mut r = DisorderRealization::for_box(1, 1.0, &c).unwrap();
        r.potential.iter_mut().for_each(|v| *v = 1.0);
        let h = build_anderson(&c, &r, 1.0).unwrap();
        let want = build_laplacian(&c, 1.0) + CMatrix::identity(5, 5);
        assert!(fro(&(h - want)) < 1e-14);
    }

    #[test]
    fn embedding_of_diagonal_h_halves_and_mirrors() {
        let space = SelfDualSpace::synthetic(2);
        let h = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            C64::new(0.8, 0.0),
            C64::new(-0.8, 0.0),
        ]));
        let model = QuadraticModel::gauge_invariant(h).unwrap();
        let sd = embed_quadratic(&model, &space).unwrap();
        // interleaved order: (mode0,-), (mode0,+), (mode1,-), (mode1,+)
        let want = [0.4, -0.4, -0.4, 0.4];
        for (i, w) in want.iter().enumerate() {
            assert!((sd.matrix()[(i, i)].re - w).abs() < 1e-14);
        }
        // zero model embeds to zero
        let z = QuadraticModel::gauge_invariant(CMatrix::zeros(2, 2)).unwrap();
        assert_eq!(fro(embed_quadratic(&z, &space).unwrap().matrix()), 0.0);
    }

    #[test]
    fn embedding_spectrum_is_half_of_h_spectrum_mirrored() {
        let space = SelfDualSpace::synthetic(3);
        let mut h = CMatrix::zeros(3, 3);
        h[(0, 1)] = C64::new(0.3, 0.2);
        h[(1, 0)] = C64::new(0.3, -0.2);
        h[(0, 0)] = C64::new(0.5, 0.0);
        h[(1, 1)] = C64::new(-0.1, 0.0);
        h[(2, 2)] = C64::new(-0.4, 0.0);
        let model = QuadraticModel::gauge_invariant(h.clone()).unwrap();
        let sd = embed_quadratic(&model, &space).unwrap();
        let (hv, _) = herm_eig(&h).unwrap();
        let (sv, _) = herm_eig(sd.matrix()).unwrap();
        let mut want: Vec<f64> = hv.iter().flat_map(|&x| [0.5 * x, -0.5 * x]).collect();
        want.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in sv.iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
        // the positive-band one-particle matrix 2 P H P recovers h on ran P
        let minus = space.minus_indices();
        for (i, &mi) in minus.iter().enumerate() {
            for (j, &mj) in minus.iter().enumerate() {
                assert!((2.0 * sd.matrix()[(mi, mj)] - h[(i, j)]).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn kitaev_diagonal_limit_gap_is_half_mu() {
        let params = KitaevParams { t: 0.0, mu: 1.0, delta: 0.0, boundary: Boundary::Open };
        let h = build_kitaev_chain(5, &params).unwrap();
        let (vals, _) = herm_eig(h.matrix()).unwrap();
        for v in vals {
            assert!((v.abs() - 0.5).abs() < 1e-14);
        }
    }

    #[test]
    fn kitaev_periodic_matches_dispersion() {
        // eigenvalues come in pairs ±E(k)/2 with
        // E(k) = sqrt((2t cos k + mu)^2 + 4 delta^2 sin^2 k), k = 2 pi m / n
        let n = 8usize;
        let params = KitaevParams { t: 1.0, mu: 0.7, delta: 0.9, boundary: Boundary::Periodic };
        let h = build_kitaev_chain(n, &params).unwrap();
        let (vals, _) = herm_eig(h.matrix()).unwrap();
        let mut want = Vec::new();
        for m in 0..n {
            let k = 2.0 * std::f64::consts::PI * m as f64 / n as f64;
            let e = ((2.0 * params.t * k.cos() + params.mu).powi(2)
                + 4.0 * params.delta.powi(2) * k.sin().powi(2))
            .sqrt();
            want.push(e / 2.0);
            want.push(-e / 2.0);
        }
        want.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in vals.iter().zip(want) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn restriction_blocks_reassemble() {
        let params = KitaevParams { t: 1.0, mu: 0.3, delta: 0.8, boundary: Boundary::Open };
        let big = build_kitaev_chain(9, &params).unwrap(); // box radius 4
        let (small, boundary) = restrict_finite_volume(&big, 2).unwrap();
        assert_eq!(small.dim(), 10);
        // embed the small block back and add the outer block and boundary
        let space = big.space();
        let inside: Vec<usize> = (0..space.dim())
            .filter(|&i| space.labels()[i].pos[0].abs() <= 2)
            .collect();
        let mut rebuilt = boundary.clone();
        for (a, &ia) in inside.iter().enumerate() {
            for (b, &ib) in inside.iter().enumerate() {
                rebuilt[(ia, ib)] += small.matrix()[(a, b)];
            }
        }
        for a in 0..space.dim() {
            for b in 0..space.dim() {
                let a_in = inside.contains(&a);
                let b_in = inside.contains(&b);
                if !a_in && !b_in {
                    rebuilt[(a, b)] += big.matrix()[(a, b)];
                }
            }
        }
        assert!(fro(&(rebuilt - big.matrix())) < 1e-14);
        // boundary is supported within distance 1 of the cut
        for a in 0..space.dim() {
            for b in 0..space.dim() {
                if boundary[(a, b)].norm() > 0.0 {
                    let xa = space.labels()[a].pos[0];
                    let xb = space.labels()[b].pos[0];
                    assert!((xa - xb).abs() <= 1);
                    assert!(xa.abs().min(xb.abs()) <= 2 && xa.abs().max(xb.abs()) == 3);
                }
            }
        }
    }

    #[test]
    fn kitaev_gap_scan_vanishes_only_near_the_boundary() {
        // dense mu scan: the periodic-chain gap is continuous, large deep in
        // both phases (mu = 0 and the mu = 10 strong-field proxy), and dips
        // only near the boundary located by the scan itself
        let n = 40usize;
        let gap_at = |mu: f64| {
            let params = KitaevParams { t: 1.0, mu, delta: 1.0, boundary: Boundary::Periodic };
            let h = build_kitaev_chain(n, &params).unwrap();
            let (vals, _) = herm_eig(h.matrix()).unwrap();
            vals.iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min)
        };
        let mus: Vec<f64> = (0..=400).map(|i| i as f64 / 100.0).collect();
        let gaps: Vec<f64> = mus.iter().map(|&m| gap_at(m)).collect();
        // continuity: steps of 0.01 in mu move the gap by at most ~0.01
        for w in gaps.windows(2) {
            assert!((w[1] - w[0]).abs() < 2e-2);
        }
        let (argmin, _) = gaps
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap();
        let mu_star = mus[argmin];
        assert!((mu_star - 2.0).abs() < 0.1, "boundary located at {mu_star}");
        for (&mu, &g) in mus.iter().zip(&gaps) {
            if (mu - 2.0).abs() > 0.5 {
                assert!(g > 0.2, "gap {g} far from the boundary at mu = {mu}");
            }
        }
        assert!(gap_at(10.0) > 3.9, "strong-field side is deeply gapped");
    }

    #[test]
    fn open_sweet_spot_chain_has_exactly_two_zero_modes() {
        // t = delta, mu = 0: the open chain carries one exact zero pair;
        // every remaining (bulk) eigenvalue sits at the dispersion value 1/2·E(k) = 1
        let params = KitaevParams { t: 1.0, mu: 0.0, delta: 1.0, boundary: Boundary::Open };
        let h = build_kitaev_chain(20, &params).unwrap();
        let (vals, _) = herm_eig(h.matrix()).unwrap();
        let zero_modes = vals.iter().filter(|x| x.abs() < 1e-10).count();
        assert_eq!(zero_modes, 2);
        for v in vals.iter().filter(|x| x.abs() >= 1e-10) {
            assert!((v.abs() - 1.0).abs() < 1e-10, "bulk eigenvalue {v}");
        }
    }

    #[test]
    fn restriction_is_identity_at_full_radius_and_trivial_for_diagonal() {
        let params = KitaevParams { t: 1.0, mu: 0.3, delta: 0.8, boundary: Boundary::Open };
        let big = build_kitaev_chain(9, &params).unwrap();
        let (same, boundary) = restrict_finite_volume(&big, 4).unwrap();
        assert_eq!(same.matrix(), big.matrix());
        assert_eq!(fro(&boundary), 0.0);

        let diag = KitaevParams { t: 0.0, mu: 1.0, delta: 0.0, boundary: Boundary::Open };
        let big = build_kitaev_chain(9, &diag).unwrap();
        let (_, boundary) = restrict_finite_volume(&big, 1).unwrap();
        assert_eq!(fro(&boundary), 0.0);
    }
}
