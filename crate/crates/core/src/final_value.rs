//! Compatibility analysis and backward reconstruction for final value data.
//!
//! Final data `(f, g, u_T)` are solvable in the solution space exactly when
//! the compatibility vector `u_T - y_f + z_g` lies in `D(e^{TA})`; in that
//! case the initial state is `u(0) = e^{TA}(u_T - y_f + z_g)` and the
//! trajectory follows from the forward machinery. Incompatibility is the
//! generic case for measured data and is reported as a verdict with a
//! per-mode amplification ledger, never as a panic.

use crate::boundary::{self, BoundarySignal};
use crate::eigenbasis::{EigenSystem, SpectralVector};
use crate::error::{FvpError, Result};
use crate::exec::log_sum_exp;
use crate::forward::{self, ModalSignal, Trajectory};
use crate::semigroup::{self, MembershipDiagnostic, Verdict};

/// Numerical thresholds for the compatibility decision.
#[derive(Debug, Clone, Copy)]
pub struct Thresholds {
    /// Cap on per-mode log-amplification for applying `e^{TA}`.
    pub log_cap: f64,
    /// Tail tolerance of the membership diagnostic.
    pub tail_tol: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { log_cap: semigroup::DEFAULT_LOG_CAP, tail_tol: semigroup::DEFAULT_TAIL_TOL }
    }
}

/// Outcome of analysing final data: the compatibility vector, its membership
/// diagnostic, the reconstructed initial state when one exists, and the
/// pieces of the data-space graph norm.
#[derive(Debug, Clone)]
pub struct CompatibilityReport {
    pub horizon: f64,
    /// `u_T - y_f + z_g`.
    pub compat_vector: SpectralVector,
    pub diagnostic: MembershipDiagnostic,
    /// Present iff the verdict is compatible.
    pub reconstructed_u0: Option<SpectralVector>,
    /// `|u_T|` in `H`.
    pub u_t_norm: f64,
    /// `||f||_{L2(0,T;V*)}`, exact for the piecewise-linear signal.
    pub f_vstar_norm: f64,
    /// Discrete boundary norm of `g` (zero when no boundary data).
    pub boundary_norm_term: f64,
    /// `|e^{TA}(u_T - y_f + z_g)|`, `+inf` when not representable.
    pub graph_term: f64,
    /// Data-space graph norm: root of the sum of squares of the above.
    pub y_graph_norm: f64,
    /// 1-based index of the mode with the largest log-amplification.
    pub worst_mode: usize,
    pub worst_log_amplification: f64,
    /// `T * lambda_max`: log of the worst-case backward conditioning.
    pub log_conditioning: f64,
}

impl CompatibilityReport {
    pub fn verdict(&self) -> Verdict {
        self.diagnostic.verdict
    }

    pub fn is_compatible(&self) -> bool {
        self.verdict() == Verdict::Compatible
    }

    /// `exp(T * lambda_max)`, `+inf` when not representable. Reconstruction
    /// error bounds scale with this factor; failures at large values are
    /// ill-posedness, not bugs.
    pub fn conditioning(&self) -> f64 {
        self.log_conditioning.exp()
    }
}

/// `u_T - y_f + z_g`, with `z_g` treated as zero when absent.
pub fn compatibility_vector(
    u_t: &SpectralVector,
    y_f: &SpectralVector,
    z_g: Option<&SpectralVector>,
) -> Result<SpectralVector> {
    let base = u_t.sub(y_f)?;
    match z_g {
        Some(z) => base.add(z),
        None => Ok(base),
    }
}

/// Log-safe `|e^{tA} v|` (may be `+inf`).
fn amplified_norm(es: &EigenSystem, v: &SpectralVector, t: f64) -> f64 {
    let log_terms: Vec<f64> = (0..es.n_modes())
        .map(|j| 2.0 * (v.coeff(j).norm().ln() + t * es.eigenvalue(j)))
        .collect();
    (0.5 * log_sum_exp(&log_terms)).exp()
}

/// Decide compatibility of final data and reconstruct the initial state
/// when possible. `horizon` must match the signal horizons.
pub fn analyze(
    es: &EigenSystem,
    u_t: &SpectralVector,
    f: &ModalSignal,
    g: Option<&BoundarySignal>,
    horizon: f64,
    thresholds: Thresholds,
) -> Result<CompatibilityReport> {
    es.check_vector(u_t)?;
    if (f.horizon() - horizon).abs() > 1e-12 * horizon.max(1.0) {
        return Err(FvpError::invalid(format!(
            "horizon {horizon} does not match the source horizon {}",
            f.horizon()
        )));
    }
    if let Some(g) = g {
        if (g.horizon() - horizon).abs() > 1e-12 * horizon.max(1.0) {
            return Err(FvpError::invalid(format!(
                "horizon {horizon} does not match the boundary horizon {}",
                g.horizon()
            )));
        }
    }

    let y_f = forward::yield_map(es, f)?;
    let z_g = match g {
        Some(g) => Some(boundary::boundary_yield(es, g, horizon)?.z_g),
        None => None,
    };
    let compat = compatibility_vector(u_t, &y_f, z_g.as_ref())?;

    let diagnostic =
        semigroup::membership_diagnostic(es, &compat, horizon, thresholds.tail_tol, thresholds.log_cap)?;
    let reconstructed_u0 = if diagnostic.verdict == Verdict::Compatible {
        Some(semigroup::propagate_inverse(es, &compat, horizon, thresholds.log_cap)?)
    } else {
        None
    };

    let (worst_mode, worst_log_amplification) = diagnostic
        .per_mode_log_amplification
        .iter()
        .enumerate()
        .fold((0usize, f64::NEG_INFINITY), |acc, (j, &a)| if a > acc.1 { (j, a) } else { acc });

    let u_t_norm = u_t.norm_h();
    let f_vstar_norm = forward::signal_vstar_norm_sq(es, f)?.sqrt();
    let boundary_norm_term = g.map(boundary::boundary_norm).unwrap_or(0.0);
    let graph_term = amplified_norm(es, &compat, horizon);
    let y_graph_norm = (u_t_norm * u_t_norm
        + f_vstar_norm * f_vstar_norm
        + boundary_norm_term * boundary_norm_term
        + graph_term * graph_term)
        .sqrt();

    Ok(CompatibilityReport {
        horizon,
        compat_vector: compat,
        diagnostic,
        reconstructed_u0,
        u_t_norm,
        f_vstar_norm,
        boundary_norm_term,
        graph_term,
        y_graph_norm,
        worst_mode: worst_mode + 1,
        worst_log_amplification,
        log_conditioning: horizon * es.lambda_max(),
    })
}

/// Solve the final value problem: analyse, reconstruct `u(0)`, then run the
/// forward solver (with boundary influence when `g` is given). Refuses
/// incompatible data, attaching the full report.
pub fn solve_fvp(
    es: &EigenSystem,
    u_t: &SpectralVector,
    f: &ModalSignal,
    g: Option<&BoundarySignal>,
    horizon: f64,
    out_grid: &[f64],
    thresholds: Thresholds,
) -> Result<Trajectory> {
    let report = analyze(es, u_t, f, g, horizon, thresholds)?;
    let Some(u0) = report.reconstructed_u0.clone() else {
        return Err(FvpError::Incompatible { report: Box::new(report) });
    };
    match g {
        Some(g) => boundary::inhom_forward_solve(es, &u0, f, g, out_grid),
        None => forward::duhamel_solve(es, &u0, f, out_grid),
    }
}

/// Constant `c` in the well-posedness estimate
/// `||u||_X^2 <= c ||(f, u_T)||_Y^2`, assembled from the energy estimates of
/// the forward problem in the unit-ellipticity normalisation.
pub fn wellposedness_constant(es: &EigenSystem, horizon: f64) -> f64 {
    6.0 + horizon / es.lambda_min()
}

/// Check of the equivalent data norm that omits `|u_T|`:
/// `|u_T| <= C (||f||_{L2(V*)} + |e^{TA}(u_T - y_f + z_g)|)` with the sharp
/// truncated constant `C = max(c_yield, e^{-lambda_1 T})`.
#[derive(Debug, Clone)]
pub struct EquivalentNormReport {
    pub c_yield: f64,
    pub c_decay: f64,
    pub c: f64,
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
}

pub fn equivalent_norm_check(
    es: &EigenSystem,
    reports: &[CompatibilityReport],
) -> Result<EquivalentNormReport> {
    let mut ratios = Vec::with_capacity(reports.len());
    let mut c_yield: f64 = 0.0;
    let mut c_decay: f64 = 0.0;
    for report in reports {
        if !report.is_compatible() {
            return Err(FvpError::invalid(
                "equivalent_norm_check expects compatible reports only",
            ));
        }
        let cy = forward::yield_bound(es, report.horizon);
        let cd = (-es.lambda_min() * report.horizon).exp();
        c_yield = c_yield.max(cy);
        c_decay = c_decay.max(cd);
        let c = cy.max(cd);
        let denom = c * (report.f_vstar_norm + report.graph_term);
        ratios.push(if denom == 0.0 { 0.0 } else { report.u_t_norm / denom });
    }
    let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
    Ok(EquivalentNormReport { c_yield, c_decay, c: c_yield.max(c_decay), ratios, max_ratio })
}
