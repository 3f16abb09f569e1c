//! The experiment operations behind the CLI subcommands.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use sdcar::decay::{ct_verify, CtReport, CtStatus};
use sdcar::flow::{
    integrate_flow, transport_deficit_study, DeficitRow, FilterProfile,
    HamiltonianPath, StepControl,
};
use sdcar::lattice::{
    build_anderson, build_box_space, embed_quadratic, kitaev_blocks, kitaev_space, Boundary,
    DisorderRealization, KitaevParams, LatticeConfig, QuadraticModel,
};
use sdcar::linalg::{fro, two_norm, CMatrix};
use sdcar::qf::{
    canonical_family, evaluate, first_separating, weakstar_distance, Monomial, Symbol,
};
use sdcar::spectral::{decay_fit, resolve_scaled, SpectralResolution};
use sdcar::z2::{wedge_basis, z2_index, IndexReport};
use sdcar::{BasisProjection, HamiltonianMeta, SelfDualHamiltonian, SelfDualSpace, Tolerances};

use crate::config::{waypoint_derivative, waypoint_value, ExperimentConfig, ModelConfig};
use crate::{ExperimentError, Result};

/// The model space and the affine decomposition H(s) = base + c(s) * ramp
/// used by every configured path. Disorder, when enabled, enters the base.
struct AffinePath {
    space: Arc<SelfDualSpace>,
    base: CMatrix,
    ramp: CMatrix,
    waypoints: Vec<f64>,
}

fn kitaev_matrices(
    cfg: &ExperimentConfig,
    n_sites: usize,
    t: f64,
    delta: f64,
    boundary: Boundary,
    seed: Option<u64>,
) -> Result<(Arc<SelfDualSpace>, CMatrix, CMatrix)> {
    let space = kitaev_space(n_sites, boundary)?;
    let (mut h0, g) = kitaev_blocks(n_sites, &KitaevParams { t, mu: 0.0, delta, boundary });
    if let Some(seed) = seed {
        if cfg.disorder.lambda > 0.0 {
            let sites: Vec<Vec<i64>> = space
                .labels()
                .iter()
                .filter(|l| l.tag == sdcar::Tag::Minus)
                .map(|l| l.pos.clone())
                .collect();
            let real = DisorderRealization::new(seed, cfg.disorder.lambda, &sites)?;
            for (j, &v) in real.potential.iter().enumerate() {
                h0[(j, j)] += C64::new(real.lambda * v, 0.0);
            }
        }
    }
    let base = embed_quadratic(&QuadraticModel::new(h0, g)?, &space)?.matrix().clone();
    // d/dmu of the embedded matrix: the on-site block with mu = 1
    let (h_mu, g0) = kitaev_blocks(n_sites, &KitaevParams {
        t: 0.0,
        mu: 1.0,
        delta: 0.0,
        boundary,
    });
    let ramp = embed_quadratic(&QuadraticModel::new(h_mu, g0)?, &space)?.matrix().clone();
    Ok((space, base, ramp))
}

fn affine_path(cfg: &ExperimentConfig, seed: Option<u64>) -> Result<AffinePath> {
    match &cfg.model {
        ModelConfig::Kitaev { n_sites, t, mu, delta, boundary } => {
            let (space, base, ramp) = kitaev_matrices(cfg, *n_sites, *t, *delta, *boundary, seed)?;
            let waypoints =
                cfg.path.mu_waypoints.clone().unwrap_or_else(|| vec![*mu, *mu]);
            Ok(AffinePath { space, base, ramp, waypoints })
        }
        ModelConfig::Anderson { d, box_radius, spins, boundary, hopping_scale } => {
            let lat = LatticeConfig::new(*d, *box_radius, spins.clone(), *boundary, cfg.ct.epsilon)?;
            let space = build_box_space(&lat)?;
            let real = DisorderRealization::for_box(
                seed.unwrap_or(cfg.disorder.master_seed),
                cfg.disorder.lambda,
                &lat,
            )?;
            let with_hop = |hop: f64| -> Result<CMatrix> {
                let h = build_anderson(&lat, &real, hop)?;
                Ok(embed_quadratic(&QuadraticModel::gauge_invariant(h)?, &space)?
                    .matrix()
                    .clone())
            };
            let base = with_hop(0.0)?;
            let ramp = with_hop(1.0)? - &base;
            let waypoints = cfg
                .path
                .hopping_waypoints
                .clone()
                .unwrap_or_else(|| vec![*hopping_scale, *hopping_scale]);
            Ok(AffinePath { space, base, ramp, waypoints })
        }
        ModelConfig::Custom { h0_file, h1_file } => {
            let m0 = sdcar::matio::load_matrix(std::path::Path::new(h0_file))?;
            let m1 = sdcar::matio::load_matrix(std::path::Path::new(h1_file))?;
            if m0.nrows() != m1.nrows() {
                return Err(ExperimentError::Parse(format!(
                    "endpoint dimension mismatch: {} vs {}",
                    m0.nrows(),
                    m1.nrows()
                )));
            }
            if m0.nrows() % 2 != 0 {
                return Err(ExperimentError::Parse("custom matrices need even dimension".into()));
            }
            let space = SelfDualSpace::synthetic(m0.nrows() / 2);
            // validate both endpoints before any computation
            SelfDualHamiltonian::new(space.clone(), m0.clone())?;
            SelfDualHamiltonian::new(space.clone(), m1.clone())?;
            let ramp = &m1 - &m0;
            Ok(AffinePath { space, base: m0, ramp, waypoints: vec![0.0, 1.0] })
        }
    }
}

/// Builds the configured Hamiltonian path. Disorder (if any) is frozen at
/// the given seed, or the master seed by default.
pub fn build_path(
    cfg: &ExperimentConfig,
    seed: Option<u64>,
) -> Result<HamiltonianPath<'static>> {
    let seed = seed.or(Some(cfg.disorder.master_seed));
    let AffinePath { space, base, ramp, waypoints } = affine_path(cfg, seed)?;
    let grid: Vec<f64> = (0..cfg.path.grid_points)
        .map(|k| k as f64 / (cfg.path.grid_points - 1) as f64)
        .collect();
    let base2 = base.clone();
    let ramp2 = ramp.clone();
    let w2 = waypoints.clone();
    let path = HamiltonianPath::new(
        space,
        Box::new(move |s| &base2 + ramp2.scale(waypoint_value(&w2, s))),
        Box::new(move |s| ramp.scale(waypoint_derivative(&waypoints, s))),
        grid,
    )?;
    Ok(path)
}

/// The Hamiltonian of the configured model at path parameter s.
pub fn hamiltonian_at(
    cfg: &ExperimentConfig,
    s: f64,
    seed: Option<u64>,
) -> Result<SelfDualHamiltonian> {
    let seed = seed.or(Some(cfg.disorder.master_seed));
    let AffinePath { space, base, ramp, waypoints } = affine_path(cfg, seed)?;
    let m = &base + ramp.scale(waypoint_value(&waypoints, s));
    let meta = HamiltonianMeta { model: "configured".into(), seed, path_s: Some(s), ..Default::default() };
    Ok(SelfDualHamiltonian::validate(space, m, meta, &Tolerances::DEFAULT)?)
}

fn resolve_cfg(
    cfg: &ExperimentConfig,
    h: &SelfDualHamiltonian,
) -> Result<SpectralResolution> {
    resolve_scaled(h, cfg.tolerances.zero_tol_factor).map_err(ExperimentError::from)
}

fn step_control(cfg: &ExperimentConfig) -> StepControl {
    StepControl {
        h_init: cfg.flow.h_init,
        h_min: cfg.flow.h_min,
        transport_tol: cfg.flow.transport_tol,
    }
}

fn filter_profile(cfg: &ExperimentConfig) -> Option<FilterProfile> {
    cfg.flow.nu0.map(FilterProfile::new)
}

fn sigma_between(
    a: &SpectralResolution,
    b: &SpectralResolution,
    u: Option<&CMatrix>,
) -> Result<IndexReport> {
    let pa = a.plus_projection()?;
    let pb = b.plus_projection()?;
    Ok(z2_index(&pa, &pb, u)?)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepPoint {
    pub s: f64,
    pub gap: f64,
    pub sigma: i8,
    pub transport_error: f64,
    pub det: [f64; 2],
    pub deficit: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SweepStatus {
    Completed,
    GapClosingDetected { s_near: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepOutput {
    pub status: SweepStatus,
    pub gap_min: f64,
    pub gamma_residual: f64,
    pub flow_converged: bool,
    pub points: Vec<SweepPoint>,
}

/// Sweeps the configured path: the mandatory 10x finer gap/index pre-scan,
/// then the spectral flow with per-grid-point index, transport, determinant
/// and deficit diagnostics. An index flip on the pre-scan aborts the sweep
/// and reports the closing location for `find_gap_closing`.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepOutput> {
    let path = build_path(cfg, None)?;
    let scan = scan_index(cfg, &path)?;
    if let Some(bracket) = scan.brackets.first() {
        return Ok(SweepOutput {
            status: SweepStatus::GapClosingDetected { s_near: 0.5 * (bracket.0 + bracket.1) },
            gap_min: scan.min_gap,
            gamma_residual: 0.0,
            flow_converged: false,
            points: Vec::new(),
        });
    }
    let flow = integrate_flow(
        &path,
        cfg.flow.mode,
        filter_profile(cfg).as_ref(),
        &step_control(cfg),
    )?;
    let res0 = resolve_cfg(cfg, &path.hamiltonian_at(path.grid[0])?)?;
    let mut points = Vec::with_capacity(path.grid.len());
    let mut gap_min = f64::INFINITY;
    for (k, &s) in path.grid.iter().enumerate() {
        let res_s = resolve_cfg(cfg, &path.hamiltonian_at(s)?)?;
        gap_min = gap_min.min(res_s.gap);
        // V_s transports E+(0) onto E+(s): E+(s) = U* E+(0) U with U = V_s*
        let u = flow.v[k].adjoint();
        let sigma = sigma_between(&res0, &res_s, Some(&u))?;
        let det = flow.det_track[k];
        points.push(SweepPoint {
            s,
            gap: res_s.gap,
            sigma: sigma.sigma,
            transport_error: flow.transport_errors[k],
            det: [det.re, det.im],
            deficit: flow.deficits[k],
        });
    }
    Ok(SweepOutput {
        status: SweepStatus::Completed,
        gap_min,
        gamma_residual: flow.gamma_residual,
        flow_converged: flow.converged,
        points,
    })
}

struct IndexScan {
    /// (s_left, s_right) intervals over which sigma flips.
    brackets: Vec<(f64, f64)>,
    min_gap: f64,
    sigma_end: i8,
}

fn scan_index(cfg: &ExperimentConfig, path: &HamiltonianPath<'_>) -> Result<IndexScan> {
    let fine = 10 * (cfg.path.grid_points - 1) + 1;
    let res0 = resolve_cfg(cfg, &path.hamiltonian_at(0.0)?)?;
    let mut brackets = Vec::new();
    let mut min_gap = f64::INFINITY;
    let mut prev: Option<(f64, i8)> = None;
    let mut sigma_end = 1i8;
    for k in 0..fine {
        let s = k as f64 / (fine - 1) as f64;
        let res_s = resolve_cfg(cfg, &path.hamiltonian_at(s)?)?;
        min_gap = min_gap.min(res_s.gap);
        let sigma = match sigma_between(&res0, &res_s, None) {
            Ok(r) => r.sigma,
            // ill-conditioned right at a closing: skip the point
            Err(ExperimentError::Core(
                sdcar::Error::IllConditioned { .. } | sdcar::Error::GapClosed { .. },
            )) => continue,
            Err(e) => return Err(e),
        };
        if let Some((ps, psigma)) = prev {
            if sigma != psigma {
                brackets.push((ps, s));
            }
        }
        prev = Some((s, sigma));
        sigma_end = sigma;
    }
    Ok(IndexScan { brackets, min_gap, sigma_end })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GapClosing {
    pub s_tilde: f64,
    pub gap_at_s_tilde: f64,
    pub n_crossings: usize,
    pub multiple_crossing_warning: bool,
    pub sigma_endpoints: i8,
}

/// Locates the first gap closing by bisecting the index flip inside the
/// bracket found by the pre-scan.
pub fn find_gap_closing(cfg: &ExperimentConfig) -> Result<GapClosing> {
    let path = build_path(cfg, None)?;
    let scan = scan_index(cfg, &path)?;
    if scan.brackets.is_empty() {
        return Err(ExperimentError::NoSignChange {
            sigma_endpoints: scan.sigma_end,
            min_gap: scan.min_gap,
        });
    }
    let res0 = resolve_cfg(cfg, &path.hamiltonian_at(0.0)?)?;
    let (mut a, mut b) = scan.brackets[0];
    let sigma_a = sigma_between(&res0, &resolve_cfg(cfg, &path.hamiltonian_at(a)?)?, None)?.sigma;
    while b - a > cfg.tolerances.bisection_interval {
        let mid = 0.5 * (a + b);
        let res_mid = resolve_cfg(cfg, &path.hamiltonian_at(mid)?)?;
        match sigma_between(&res0, &res_mid, None) {
            Ok(r) if r.sigma == sigma_a => a = mid,
            Ok(_) => b = mid,
            // undecidable at the midpoint: shrink from the right
            Err(ExperimentError::Core(
                sdcar::Error::IllConditioned { .. } | sdcar::Error::GapClosed { .. },
            )) => b = mid,
            Err(e) => return Err(e),
        }
    }
    let s_tilde = 0.5 * (a + b);
    let gap_at = resolve_cfg(cfg, &path.hamiltonian_at(s_tilde)?)?.gap;
    if gap_at > cfg.tolerances.gap_escalation {
        return Err(ExperimentError::StillGapped {
            s: s_tilde,
            gap: gap_at,
            threshold: cfg.tolerances.gap_escalation,
        });
    }
    Ok(GapClosing {
        s_tilde,
        gap_at_s_tilde: gap_at,
        n_crossings: scan.brackets.len(),
        multiple_crossing_warning: scan.brackets.len() > 1,
        sigma_endpoints: scan.sigma_end,
    })
}

/// Serializable summary of a crossing analysis.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CrossingSummary {
    pub s_tilde: f64,
    pub delta: f64,
    pub sigma_across: i8,
    pub dim_k0: usize,
    pub dim_k1: usize,
    pub splitting_residual: f64,
    pub weakstar_jump: f64,
    pub separating_index: usize,
    pub separating_value: f64,
    pub jump_lower_bound: f64,
}

/// Full crossing analysis: one-sided projections, the Z2 index across the
/// crossing, the wedge splitting P+ + P- + P0 = 1, restricted symbols for
/// the mixed ground-state family, and the weak* discontinuity.
pub struct CrossingAnalysis {
    pub summary: CrossingSummary,
    pub e_left: BasisProjection,
    pub e_right: BasisProjection,
    pub p_plus: CMatrix,
    pub p_minus: CMatrix,
    pub p_zero: CMatrix,
    k1_basis: CMatrix,
    k0_basis: CMatrix,
    pub k1_space: Arc<SelfDualSpace>,
    pub k0_space: Arc<SelfDualSpace>,
    pub symbol_k1: Symbol,
    pub symbol_k0_plus: Symbol,
    pub symbol_k0_minus: Symbol,
}

impl CrossingAnalysis {
    /// Projects a full-space monomial onto one of the invariant subspaces,
    /// failing when a factor has weight outside it.
    fn project(&self, m: &Monomial, basis: &CMatrix) -> Result<Monomial> {
        let mut factors = Vec::with_capacity(m.factors.len());
        for (phi, star) in &m.factors {
            let coords = basis.adjoint() * phi;
            let back = basis * &coords;
            if (phi - &back).norm() > 1e-8 * phi.norm().max(1e-30) {
                return Err(ExperimentError::Assertion(
                    "monomial factor is not supported in the requested subspace".into(),
                ));
            }
            factors.push((coords, *star));
        }
        Ok(Monomial::new(factors))
    }

    /// The mixed ground-state family: ω̃_λ(a1 a0) with a1 supported in K1
    /// and a0 in K0, both given in full-space coordinates.
    pub fn evaluate_mixed(&self, lambda: f64, a1: &Monomial, a0: &Monomial) -> Result<C64> {
        let m1 = self.project(a1, &self.k1_basis)?;
        let m0 = self.project(a0, &self.k0_basis)?;
        let v1 = evaluate(&self.symbol_k1, &m1)?;
        let plus = evaluate(&self.symbol_k0_plus, &m0)?;
        let minus = evaluate(&self.symbol_k0_minus, &m0)?;
        Ok(v1 * (plus * lambda + minus * (1.0 - lambda)))
    }

    /// One-sided state evaluation on the full space (symbols E_{s~±}).
    pub fn evaluate_one_sided(&self, right: bool, m: &Monomial) -> Result<C64> {
        let space = self.e_left.space().clone();
        let s = if right {
            Symbol::validate(space, self.e_right.matrix().clone())?
        } else {
            Symbol::validate(space, self.e_left.matrix().clone())?
        };
        Ok(evaluate(&s, m)?)
    }
}

/// Interleaves Γ-paired columns (Γu_i, u_i) so the subspace carries the
/// canonical pair-swap involution in its own basis.
fn paired_basis(space: &SelfDualSpace, cols: &CMatrix) -> CMatrix {
    let n = cols.nrows();
    let k = cols.ncols();
    let mut out = CMatrix::zeros(n, 2 * k);
    for j in 0..k {
        let u = cols.column(j).clone_owned();
        let gu = space.gamma_apply(&u.clone_owned());
        out.set_column(2 * j, &gu.column(0));
        out.set_column(2 * j + 1, &u.column(0));
    }
    out
}

pub fn crossing_analysis(cfg: &ExperimentConfig, s_tilde: Option<f64>) -> Result<CrossingAnalysis> {
    let closing = match s_tilde {
        Some(s) => GapClosing {
            s_tilde: s,
            gap_at_s_tilde: 0.0,
            n_crossings: 1,
            multiple_crossing_warning: false,
            sigma_endpoints: -1,
        },
        None => find_gap_closing(cfg)?,
    };
    let s_tilde = closing.s_tilde;
    let path = build_path(cfg, None)?;
    // confirm the crossing when the location was supplied by the caller
    let res_at = resolve_cfg(cfg, &path.hamiltonian_at(s_tilde)?)?;
    if res_at.gap > cfg.tolerances.gap_escalation && res_at.n_zero == 0 {
        return Err(ExperimentError::StillGapped {
            s: s_tilde,
            gap: res_at.gap,
            threshold: cfg.tolerances.gap_escalation,
        });
    }

    // one-sided projections with a Richardson check: shrink delta until
    // E+(s±δ) and E+(s±δ/2) agree to 1e-3
    let mut delta = cfg.tolerances.crossing_delta;
    let e_at = |s: f64| -> Result<SpectralResolution> {
        resolve_cfg(cfg, &path.hamiltonian_at(s)?)
    };
    let (res_l, res_r) = loop {
        let rl = e_at(s_tilde - delta)?;
        let rr = e_at(s_tilde + delta)?;
        if rl.n_zero > 0 || rr.n_zero > 0 {
            return Err(ExperimentError::Assertion(format!(
                "gap not open at s~ ± {delta:.1e}"
            )));
        }
        let rl2 = e_at(s_tilde - delta / 2.0)?;
        let rr2 = e_at(s_tilde + delta / 2.0)?;
        let dl = two_norm(&(rl.e_plus() - rl2.e_plus()));
        let dr = two_norm(&(rr.e_plus() - rr2.e_plus()));
        if dl <= 1e-3 && dr <= 1e-3 {
            break (rl, rr);
        }
        delta /= 2.0;
        if delta < 1e-7 {
            return Err(ExperimentError::Assertion(
                "one-sided projections did not stabilize".into(),
            ));
        }
    };
    let e_left = res_l.plus_projection()?;
    let e_right = res_r.plus_projection()?;
    let space = e_left.space().clone();
    let sigma_across = z2_index(&e_right, &e_left, None)?;

    // wedge splitting (Theorem-style): P+ = Er ∧ El, P- = Er⊥ ∧ El⊥,
    // P0 the two cross wedges
    let id = CMatrix::identity(space.dim(), space.dim());
    let w_plus = wedge_basis(e_right.matrix(), e_left.matrix())?;
    let w_minus = wedge_basis(&(&id - e_right.matrix()), &(&id - e_left.matrix()))?;
    let w_a = wedge_basis(e_right.matrix(), &(&id - e_left.matrix()))?;
    let w_b = wedge_basis(e_left.matrix(), &(&id - e_right.matrix()))?;
    let p_plus = &w_plus * w_plus.adjoint();
    let p_minus = &w_minus * w_minus.adjoint();
    let p_zero = &w_a * w_a.adjoint() + &w_b * w_b.adjoint();
    let splitting_residual = fro(&(&p_plus + &p_minus + &p_zero - &id));

    // Γ-paired bases of the invariant subspaces
    let k1_basis = paired_basis(&space, &w_plus);
    let k0_basis = paired_basis(&space, &w_a);
    let k1_space = SelfDualSpace::synthetic(w_plus.ncols());
    let k0_space = SelfDualSpace::synthetic(w_a.ncols());
    let symbol_k1 = Symbol::validate(k1_space.clone(), k1_basis.adjoint() * &p_plus * &k1_basis)?;
    let symbol_k0_plus =
        Symbol::validate(k0_space.clone(), k0_basis.adjoint() * e_right.matrix() * &k0_basis)?;
    let symbol_k0_minus =
        Symbol::validate(k0_space.clone(), k0_basis.adjoint() * e_left.matrix() * &k0_basis)?;

    // weak* discontinuity of the one-sided states
    let family = canonical_family(&space, cfg.tolerances.weakstar_n_max);
    let s_minus = Symbol::validate(space.clone(), e_left.matrix().clone())?;
    let s_plus = Symbol::validate(space.clone(), e_right.matrix().clone())?;
    let jump = weakstar_distance(&s_minus, &s_plus, &family)?;
    let (m_idx, w_val) = first_separating(&s_minus, &s_plus, &family, 1e-9)?
        .ok_or_else(|| ExperimentError::Assertion("no separating observable found".into()))?;
    let bound = w_val / 2f64.powi(m_idx as i32);

    Ok(CrossingAnalysis {
        summary: CrossingSummary {
            s_tilde,
            delta,
            sigma_across: sigma_across.sigma,
            dim_k0: 2 * w_a.ncols(),
            dim_k1: 2 * w_plus.ncols(),
            splitting_residual,
            weakstar_jump: jump,
            separating_index: m_idx,
            separating_value: w_val,
            jump_lower_bound: bound,
        },
        e_left,
        e_right,
        p_plus,
        p_minus,
        p_zero,
        k1_basis,
        k0_basis,
        k1_space,
        k0_space,
        symbol_k1,
        symbol_k0_plus,
        symbol_k0_minus,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnsembleRecord {
    pub index: usize,
    pub seed: u64,
    pub gap: f64,
    pub sigma: i8,
    pub decay_rate: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnsembleAggregate {
    pub n: usize,
    pub mean_gap: f64,
    pub min_gap: f64,
    pub sigma_plus: usize,
    pub sigma_minus: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnsembleOutput {
    pub records: Vec<EnsembleRecord>,
    pub aggregate: EnsembleAggregate,
}

/// Disorder ensemble at the base point of the path: per-realization gap,
/// index against the clean reference, and E+ kernel decay rate. Fully
/// deterministic in the master seed; realizations run in parallel and are
/// reported in index order.
pub fn ensemble_run(cfg: &ExperimentConfig, n_realizations: usize) -> Result<EnsembleOutput> {
    let clean = {
        let mut c = cfg.clone();
        c.disorder.lambda = 0.0;
        hamiltonian_at(&c, 0.0, None)?
    };
    let res_clean = resolve_cfg(cfg, &clean)?;
    let records: Vec<Result<EnsembleRecord>> = (0..n_realizations)
        .into_par_iter()
        .map(|r| {
            let seed = cfg.disorder.master_seed.wrapping_add(r as u64);
            let h = hamiltonian_at(cfg, 0.0, Some(seed))?;
            let res = resolve_cfg(cfg, &h)?;
            let sigma = sigma_between(&res_clean, &res, None)?.sigma;
            let decay_rate = decay_fit(res.e_plus(), h.space(), cfg.ct.epsilon)
                .ok()
                .map(|f| f.rate);
            Ok(EnsembleRecord { index: r, seed, gap: res.gap, sigma, decay_rate })
        })
        .collect();
    let mut out = Vec::with_capacity(n_realizations);
    for r in records {
        out.push(r?);
    }
    let n = out.len();
    let mean_gap = out.iter().map(|r| r.gap).sum::<f64>() / n.max(1) as f64;
    let min_gap = out.iter().map(|r| r.gap).fold(f64::INFINITY, f64::min);
    let sigma_plus = out.iter().filter(|r| r.sigma == 1).count();
    let sigma_minus = n - sigma_plus;
    Ok(EnsembleOutput {
        records: out,
        aggregate: EnsembleAggregate { n, mean_gap, min_gap, sigma_plus, sigma_minus },
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CtInstanceRecord {
    pub index: usize,
    pub seed: u64,
    pub gap: f64,
    pub report: CtReport,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CtOutput {
    pub records: Vec<CtInstanceRecord>,
    pub all_applicable: bool,
    pub total_violations: usize,
    pub worst_general_ratio: f64,
    pub worst_gapped_ratio: f64,
}

/// Combes-Thomas verification over the configured disorder ensemble.
pub fn ct_check(cfg: &ExperimentConfig, n_realizations: usize) -> Result<CtOutput> {
    let z = C64::new(cfg.ct.z[0], cfg.ct.z[1]);
    let records: Vec<Result<CtInstanceRecord>> = (0..n_realizations)
        .into_par_iter()
        .map(|r| {
            let seed = cfg.disorder.master_seed.wrapping_add(r as u64);
            let h = hamiltonian_at(cfg, 0.0, Some(seed))?;
            let res = resolve_cfg(cfg, &h)?;
            let report = ct_verify(&h, &res, cfg.ct.mu, cfg.ct.epsilon, z)?;
            Ok(CtInstanceRecord { index: r, seed, gap: res.gap, report })
        })
        .collect();
    let mut out = Vec::with_capacity(n_realizations);
    for r in records {
        out.push(r?);
    }
    let all_applicable = out.iter().all(|r| r.report.status == CtStatus::Applicable);
    let total_violations = out.iter().map(|r| r.report.violations).sum();
    let worst_general_ratio =
        out.iter().map(|r| r.report.worst_ratio).fold(0.0, f64::max);
    let worst_gapped_ratio = out
        .iter()
        .filter_map(|r| r.report.gapped_worst_ratio)
        .fold(0.0, f64::max);
    Ok(CtOutput { records: out, all_applicable, total_violations, worst_general_ratio, worst_gapped_ratio })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IndexOutput {
    pub s_first: f64,
    pub s_second: f64,
    pub report: IndexReport,
}

/// The Z2 index between the positive projections at the path endpoints.
pub fn index_endpoints(cfg: &ExperimentConfig) -> Result<IndexOutput> {
    let h0 = hamiltonian_at(cfg, 0.0, None)?;
    let h1 = hamiltonian_at(cfg, 1.0, None)?;
    let r0 = resolve_cfg(cfg, &h0)?;
    let r1 = resolve_cfg(cfg, &h1)?;
    let report = sigma_between(&r0, &r1, None)?;
    Ok(IndexOutput { s_first: 0.0, s_second: 1.0, report })
}

/// Finite-size uniformity study: flows on restrictions of the configured
/// path to each box radius.
pub fn deficit_study(cfg: &ExperimentConfig) -> Result<Vec<DeficitRow>> {
    if cfg.study.box_radii.is_empty() {
        return Err(ExperimentError::Parse("study.box_radii is empty".into()));
    }
    let path = build_path(cfg, None)?;
    let rows = transport_deficit_study(
        &path,
        &cfg.study.box_radii,
        cfg.flow.mode,
        filter_profile(cfg).as_ref(),
        &step_control(cfg),
    )?;
    Ok(rows)
}
