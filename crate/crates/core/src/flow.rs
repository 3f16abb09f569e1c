//! Spectral-flow transport along gapped paths of self-dual Hamiltonians:
//! the flow generator in Kato (parallel-transport) and filter-function form,
//! midpoint-exponential integration of ∂_s V_s = -i D_s V_s on the unitary
//! group, and the determinant / trace-per-volume diagnostics.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Tolerances};
use crate::linalg::{
    fro, herm_exp, polar_unitary, trace_norm, two_norm, unitarity_residual, CMatrix,
};
use crate::operators::{gamma_commutation_residual, HamiltonianMeta, SelfDualHamiltonian};
use crate::space::SelfDualSpace;
use crate::spectral::{resolve, SpectralResolution};

/// Odd filter multiplier: J(ν) = -1/ν outside the cutoff, linear ramp
/// -ν/ν0² inside. Continuous at ±ν0.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FilterProfile {
    pub nu0: f64,
}

impl FilterProfile {
    pub fn new(nu0: f64) -> Self {
        assert!(nu0 > 0.0, "cutoff must be positive");
        FilterProfile { nu0 }
    }

    pub fn j(&self, nu: f64) -> f64 {
        if nu.abs() >= self.nu0 {
            -1.0 / nu
        } else {
            -nu / (self.nu0 * self.nu0)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorMode {
    /// Exact parallel transport, D = i[∂E+, E+] built from first-order
    /// perturbation theory: cross-band blocks only.
    Kato,
    /// Frequency-multiplier form: D_mn = i J(λm - λn) (∂H)_mn for m ≠ n.
    Filter,
}

/// First-order perturbation theory for ∂E+ in the eigenbasis of `res`.
/// Valid when the zero band is empty. Cross-band blocks only; within-band
/// blocks of ∂E+ vanish for a projection.
fn de_plus_eigenbasis(res: &SpectralResolution, dh_eig: &CMatrix) -> CMatrix {
    let n = res.dim();
    let mut out = CMatrix::zeros(n, n);
    let plus = res.plus_range();
    let minus = res.minus_range();
    for m in plus.clone() {
        for k in minus.clone() {
            let dl = res.eigenvalues[m] - res.eigenvalues[k];
            out[(m, k)] = dh_eig[(m, k)] / dl;
            out[(k, m)] = dh_eig[(k, m)] / dl;
        }
    }
    out
}

/// Builds the flow generator D at one path point, in the original basis.
///
/// Both modes are Hermitian, traceless, satisfy the transport identity
/// ∂E+ = -i[D, E+] on the cross-band blocks, and are self-dual
/// (ΓDΓ = -D), which is what makes the integrated flow Γ-commuting.
pub fn flow_generator(
    res: &SpectralResolution,
    dh: &CMatrix,
    mode: GeneratorMode,
    profile: Option<&FilterProfile>,
) -> Result<CMatrix> {
    if res.n_zero > 0 || !res.gap_defined {
        return Err(Error::GapClosed { gap: res.gap, zero_tol: res.zero_tol });
    }
    let n = res.dim();
    let w = &res.eigenvectors;
    let dh_eig = w.adjoint() * dh * w;
    let mut d = CMatrix::zeros(n, n);
    match mode {
        GeneratorMode::Kato => {
            let plus = res.plus_range();
            let minus = res.minus_range();
            for m in plus.clone() {
                for k in minus.clone() {
                    let dl = res.eigenvalues[m] - res.eigenvalues[k];
                    d[(m, k)] = C64::new(0.0, -1.0) * dh_eig[(m, k)] / dl;
                    d[(k, m)] = C64::new(0.0, -1.0) * dh_eig[(k, m)] / (-dl);
                }
            }
        }
        GeneratorMode::Filter => {
            let default = FilterProfile::new(2.0 * res.gap);
            let profile = profile.unwrap_or(&default);
            // smallest eigenvalue difference across the bands
            let min_cross = res.eigenvalues[res.plus_range().start]
                - res.eigenvalues[res.minus_range().end - 1];
            if profile.nu0 > min_cross + 1e-12 {
                return Err(Error::CutoffTooLarge { nu0: profile.nu0, min_diff: min_cross });
            }
            for m in 0..n {
                for k in 0..n {
                    if m == k {
                        continue;
                    }
                    let j = profile.j(res.eigenvalues[m] - res.eigenvalues[k]);
                    d[(m, k)] = C64::new(0.0, j) * dh_eig[(m, k)];
                }
            }
        }
    }
    Ok(w * d * w.adjoint())
}

/// Residuals of the generator invariants, for diagnostics and tests.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeneratorDiagnostics {
    pub hermitian_residual: f64,
    /// ‖D + ΓDΓ‖: self-duality of the generator, equivalently Γ-commutation
    /// of -iD.
    pub gamma_residual: f64,
    pub trace_residual: f64,
    /// ‖∂E+ + i[D, E+]‖ with ∂E+ from first-order perturbation theory.
    pub transport_identity_residual: f64,
}

pub fn generator_diagnostics(
    res: &SpectralResolution,
    dh: &CMatrix,
    d: &CMatrix,
) -> GeneratorDiagnostics {
    let space = res.space();
    let w = &res.eigenvectors;
    let dh_eig = w.adjoint() * dh * w;
    let de = w * de_plus_eigenbasis(res, &dh_eig) * w.adjoint();
    let comm = d * res.e_plus() - res.e_plus() * d;
    GeneratorDiagnostics {
        hermitian_residual: fro(&(d - d.adjoint())),
        gamma_residual: fro(&(d + space.gamma_conj(d))),
        trace_residual: d.trace().norm(),
        transport_identity_residual: fro(&(de + comm.scale(1.0) * C64::new(0.0, 1.0))),
    }
}

/// A differentiable family s ↦ H_s with its derivative and sample grid.
pub struct HamiltonianPath<'a> {
    space: Arc<SelfDualSpace>,
    at: Box<dyn Fn(f64) -> CMatrix + Send + Sync + 'a>,
    derivative_at: Box<dyn Fn(f64) -> CMatrix + Send + Sync + 'a>,
    pub grid: Vec<f64>,
}

impl<'a> HamiltonianPath<'a> {
    pub fn new(
        space: Arc<SelfDualSpace>,
        at: Box<dyn Fn(f64) -> CMatrix + Send + Sync + 'a>,
        derivative_at: Box<dyn Fn(f64) -> CMatrix + Send + Sync + 'a>,
        grid: Vec<f64>,
    ) -> Result<Self> {
        if grid.len() < 2 {
            return Err(Error::InvalidConfig("path grid needs at least 2 points".into()));
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidConfig("path grid must be strictly increasing".into()));
        }
        Ok(HamiltonianPath { space, at, derivative_at, grid })
    }

    /// Linear interpolation H_s = (1-s) H_0 + s H_1 on a uniform grid.
    pub fn linear(
        h0: &SelfDualHamiltonian,
        h1: &SelfDualHamiltonian,
        n_grid: usize,
    ) -> Result<HamiltonianPath<'static>> {
        if h0.dim() != h1.dim() {
            return Err(Error::ShapeMismatch { expected: h0.dim(), got: h1.dim() });
        }
        let a = h0.matrix().clone();
        let b = h1.matrix().clone();
        let diff = &b - &a;
        let space = h0.space().clone();
        let grid = uniform_grid(n_grid);
        let a2 = a.clone();
        let diff2 = diff.clone();
        HamiltonianPath::new(
            space,
            Box::new(move |s| &a2 + diff2.scale(s)),
            Box::new(move |_| diff.clone()),
            grid,
        )
    }

    pub fn space(&self) -> &Arc<SelfDualSpace> {
        &self.space
    }

    pub fn matrix_at(&self, s: f64) -> CMatrix {
        (self.at)(s)
    }

    pub fn derivative_matrix_at(&self, s: f64) -> CMatrix {
        (self.derivative_at)(s)
    }

    pub fn hamiltonian_at(&self, s: f64) -> Result<SelfDualHamiltonian> {
        let meta = HamiltonianMeta { model: "path".into(), path_s: Some(s), ..Default::default() };
        SelfDualHamiltonian::validate(self.space.clone(), (self.at)(s), meta, &Tolerances::DEFAULT)
    }

    /// Validates self-duality at every grid point and the derivative against
    /// central finite differences at interior probe points. The quadratic
    /// error model is calibrated at `h` and checked to shrink at h/2.
    pub fn validate(&self, probes: &[f64], h: f64) -> Result<()> {
        for &s in &self.grid {
            self.hamiltonian_at(s)?;
            let dh = (self.derivative_at)(s);
            let sd = fro(&(&dh + self.space.gamma_conj(&dh)));
            if sd > 1e-9 * fro(&dh).max(1.0) {
                return Err(Error::NotSelfDual { residual: sd, tol: 1e-9 });
            }
        }
        for &s in probes {
            let fd =
                |hh: f64| ((self.at)(s + hh) - (self.at)(s - hh)).scale(1.0 / (2.0 * hh));
            let err1 = fro(&(fd(h) - (self.derivative_at)(s)));
            let err2 = fro(&(fd(h / 2.0) - (self.derivative_at)(s)));
            let scale = fro(&(self.derivative_at)(s)).max(1.0);
            // allow exact (affine) derivatives straight through
            if err1 > 1e-12 * scale && err2 > 0.35 * err1 + 1e-12 * scale {
                return Err(Error::InvalidConfig(format!(
                    "derivative check failed at s = {s}: fd errors {err1:.3e} -> {err2:.3e}"
                )));
            }
        }
        Ok(())
    }
}

fn uniform_grid(n: usize) -> Vec<f64> {
    let n = n.max(2);
    (0..n).map(|k| k as f64 / (n - 1) as f64).collect()
}

/// Step-size policy for the flow integrator.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct StepControl {
    pub h_init: f64,
    pub h_min: f64,
    pub transport_tol: f64,
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl { h_init: 1e-2, h_min: 1e-5, transport_tol: 1e-6 }
    }
}

/// Flow unitaries on the path grid with their transport, determinant and
/// Γ-commutation diagnostics.
#[derive(Debug, Clone)]
pub struct FlowResult {
    pub s_grid: Vec<f64>,
    pub v: Vec<CMatrix>,
    /// ‖V_s* E_{+,s} V_s - E_{+,0}‖ per grid point.
    pub transport_errors: Vec<f64>,
    pub transport_error: f64,
    pub det_track: Vec<C64>,
    /// max_s ‖V_s G - G conj(V_s)‖.
    pub gamma_residual: f64,
    /// tr|1 - V_s| / dim per grid point.
    pub deficits: Vec<f64>,
    /// Uniform gap over the grid.
    pub gap_min: f64,
    /// Final step size used by the integrator.
    pub h_used: f64,
    /// False when the transport target was still unmet at the step floor.
    pub converged: bool,
}

impl FlowResult {
    /// Errors with [`Error::StepFloorReached`] when the transport target was
    /// unmet at the step floor; the diagnostics stay available through the
    /// error-free path of [`integrate_flow`].
    pub fn require_converged(self) -> Result<FlowResult> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::StepFloorReached {
                transport_error: self.transport_error,
                h: self.h_used,
            })
        }
    }

    pub fn final_v(&self) -> &CMatrix {
        self.v.last().expect("grid is nonempty")
    }

    pub fn final_det(&self) -> C64 {
        *self.det_track.last().expect("grid is nonempty")
    }

    /// U(s, r) = V_s V_r* between two grid indices.
    pub fn u_between(&self, s_idx: usize, r_idx: usize) -> CMatrix {
        &self.v[s_idx] * self.v[r_idx].adjoint()
    }
}

/// Integrates ∂_s V = -i D_s V by midpoint exponential steps, halving the
/// step until the worst transport error meets the target. When the floor
/// `h_min` is reached the diagnostic result is still returned, flagged as
/// unconverged.
pub fn integrate_flow(
    path: &HamiltonianPath<'_>,
    mode: GeneratorMode,
    profile: Option<&FilterProfile>,
    ctrl: &StepControl,
) -> Result<FlowResult> {
    let grid = &path.grid;
    let mut resolutions = Vec::with_capacity(grid.len());
    let mut gap_min = f64::INFINITY;
    for &s in grid {
        let h = path.hamiltonian_at(s)?;
        let res = resolve(&h, None)?;
        if res.n_zero > 0 || !res.gap_defined {
            return Err(Error::GapClosedOnPath { s });
        }
        gap_min = gap_min.min(res.gap);
        resolutions.push(res);
    }
    let default_profile = FilterProfile::new(2.0 * gap_min);
    let profile = match mode {
        GeneratorMode::Filter => Some(profile.unwrap_or(&default_profile)),
        GeneratorMode::Kato => None,
    };

    let mut h_step = ctrl.h_init;
    loop {
        let out = integrate_once(path, &resolutions, mode, profile, h_step, gap_min)?;
        if out.transport_error <= ctrl.transport_tol {
            return Ok(out);
        }
        if h_step / 2.0 < ctrl.h_min {
            return Ok(FlowResult { converged: false, ..out });
        }
        h_step /= 2.0;
    }
}

fn integrate_once(
    path: &HamiltonianPath<'_>,
    resolutions: &[SpectralResolution],
    mode: GeneratorMode,
    profile: Option<&FilterProfile>,
    h_step: f64,
    gap_min: f64,
) -> Result<FlowResult> {
    let grid = &path.grid;
    let space = path.space();
    let dim = space.dim();
    let id = CMatrix::identity(dim, dim);
    let e_ref = resolutions[0].e_plus().clone();

    let mut v = id.clone();
    let mut vs = vec![id.clone()];
    let mut transport_errors = vec![0.0f64];
    let mut det_track = vec![C64::new(1.0, 0.0)];
    let mut deficits = vec![0.0f64];
    let mut gamma_residual = gamma_commutation_residual(space, &v);

    for w in 1..grid.len() {
        let (s_a, s_b) = (grid[w - 1], grid[w]);
        let n_sub = ((s_b - s_a) / h_step).ceil().max(1.0) as usize;
        let dt = (s_b - s_a) / n_sub as f64;
        for k in 0..n_sub {
            let sm = s_a + (k as f64 + 0.5) * dt;
            let hm = path.hamiltonian_at(sm)?;
            let res_m = resolve(&hm, None)?;
            if res_m.n_zero > 0 || !res_m.gap_defined {
                return Err(Error::GapClosedOnPath { s: sm });
            }
            let dh = path.derivative_matrix_at(sm);
            let d = flow_generator(&res_m, &dh, mode, profile)?;
            let step = herm_exp(&d, C64::new(0.0, -dt))?;
            v = step * v;
            if unitarity_residual(&v) > 1e-9 {
                v = polar_unitary(&v)?;
            }
        }
        let res_s = &resolutions[w];
        let transported = v.adjoint() * res_s.e_plus() * &v;
        transport_errors.push(two_norm(&(transported - &e_ref)));
        det_track.push(v.determinant());
        deficits.push(trace_norm(&(&id - &v)) / dim as f64);
        gamma_residual = gamma_residual.max(gamma_commutation_residual(space, &v));
        vs.push(v.clone());
    }
    let transport_error = transport_errors.iter().cloned().fold(0.0, f64::max);
    Ok(FlowResult {
        s_grid: grid.clone(),
        v: vs,
        transport_errors,
        transport_error,
        det_track,
        gamma_residual,
        deficits,
        gap_min,
        h_used: h_step,
        converged: true,
    })
}

/// One row of the finite-size transport study.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeficitRow {
    pub l: i64,
    pub n_sites: usize,
    /// tr|1 - V_1| / |Λ_L| at the end of the path.
    pub deficit_per_site: f64,
    pub det_re: f64,
    pub det_im: f64,
    pub transport_error: f64,
    pub converged: bool,
}

/// Runs the flow on restrictions of a common path to boxes of radius `l`
/// and tabulates the end-point deficit per site and determinant.
pub fn transport_deficit_study(
    big: &HamiltonianPath<'_>,
    ls: &[i64],
    mode: GeneratorMode,
    profile: Option<&FilterProfile>,
    ctrl: &StepControl,
) -> Result<Vec<DeficitRow>> {
    let mut rows = Vec::new();
    for &l in ls {
        let h0 = big.hamiltonian_at(big.grid[0])?;
        let (h0_small, _) = crate::lattice::restrict_finite_volume(&h0, l)?;
        let small_space = h0_small.space().clone();
        // index map from the small space into the big one
        let big_space = big.space();
        let idx: Vec<usize> = small_space
            .labels()
            .iter()
            .map(|lab| big_space.index_of(lab).expect("restricted label exists"))
            .collect();
        let at = {
            let idx = idx.clone();
            let big_at: Vec<f64> = Vec::new();
            let _ = big_at;
            let f = clone_path_fn(big);
            Box::new(move |s: f64| {
                let m = f(s);
                CMatrix::from_fn(idx.len(), idx.len(), |a, b| m[(idx[a], idx[b])])
            }) as Box<dyn Fn(f64) -> CMatrix + Send + Sync>
        };
        let d_at = {
            let idx = idx.clone();
            let f = clone_path_dfn(big);
            Box::new(move |s: f64| {
                let m = f(s);
                CMatrix::from_fn(idx.len(), idx.len(), |a, b| m[(idx[a], idx[b])])
            }) as Box<dyn Fn(f64) -> CMatrix + Send + Sync>
        };
        let small_path = HamiltonianPath::new(small_space.clone(), at, d_at, big.grid.clone())?;
        let flow = integrate_flow(&small_path, mode, profile, ctrl)?;
        let n_sites = small_space.n_modes();
        let det = flow.final_det();
        rows.push(DeficitRow {
            l,
            n_sites,
            deficit_per_site: trace_norm(
                &(CMatrix::identity(small_space.dim(), small_space.dim()) - flow.final_v()),
            ) / n_sites as f64,
            det_re: det.re,
            det_im: det.im,
            transport_error: flow.transport_error,
            converged: flow.converged,
        });
    }
    Ok(rows)
}

// The path closures cannot be cloned; share them through raw references
// with the lifetime pinned to the study call.
fn clone_path_fn<'a, 'b>(p: &'a HamiltonianPath<'b>) -> impl Fn(f64) -> CMatrix + Send + Sync + 'a {
    move |s| p.matrix_at(s)
}

fn clone_path_dfn<'a, 'b>(p: &'a HamiltonianPath<'b>) -> impl Fn(f64) -> CMatrix + Send + Sync + 'a {
    move |s| p.derivative_matrix_at(s)
}
