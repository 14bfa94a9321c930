//! Explicit steering controls: for any target `v` in `H`, a source `f` with
//! `y_f = v`, built mode by mode.
//!
//! Mode `j` carries the coefficient
//! `beta_j(t) = k_j 1_{[theta_j T, T]}(t) exp(t (sqrt(lambda_j) - lambda_j))`
//! with gain `k_j = alpha_j e^{T lambda_j} sqrt(lambda_j)
//! (e^{T sqrt(lambda_j)} - e^{theta_j T sqrt(lambda_j)})^{-1}`. Above the
//! eigenvalue threshold 3 the onset is `theta_j = 1 - (lambda_j -
//! sqrt(lambda_j))^{-1}`, which pushes high modes ever later; the finitely
//! many low modes are actuated from a chosen time `T0` instead. Controls
//! stay analytic per mode (exponential segments) so verification integrates
//! them exactly; an exporter resamples onto a piecewise-linear grid and
//! reports the resampling error.
//!
//! Steering cost grows like `e^{T lambda_j}`, so gains are capped the same
//! way as the inverse semigroup.

use num_complex::Complex64;

use crate::eigenbasis::{BasisId, EigenSystem, SpectralVector};
use crate::error::{FvpError, Result};
use crate::exec::{log_sum_exp, pairwise_sum};
use crate::forward::{phi1, yield_map, ModalSignal};

/// Eigenvalue threshold above which the shrinking-support onset applies.
const LAMBDA_THRESHOLD: f64 = 3.0;

/// One mode of a steering control: `beta(t) = gain e^{rate t}` on
/// `[theta T, T]`, zero before.
#[derive(Debug, Clone, Copy)]
pub struct ModeControl {
    pub lambda: f64,
    /// Onset fraction of the horizon.
    pub theta: f64,
    /// `sqrt(lambda) - lambda`.
    pub rate: f64,
    pub gain: Complex64,
}

/// Per-mode analytic control with `y_f = target`.
#[derive(Debug, Clone)]
pub struct SteeringControl {
    basis: BasisId,
    pub horizon: f64,
    pub t0: f64,
    pub modes: Vec<ModeControl>,
    target: SpectralVector,
}

impl SteeringControl {
    pub fn basis_id(&self) -> BasisId {
        self.basis
    }

    pub fn target(&self) -> &SpectralVector {
        &self.target
    }

    /// Control value of mode `j` at time `t`.
    pub fn eval(&self, mode: usize, t: f64) -> Complex64 {
        let m = &self.modes[mode];
        if t < m.theta * self.horizon {
            Complex64::new(0.0, 0.0)
        } else {
            m.gain * (m.rate * t).exp()
        }
    }
}

/// Build the control steering the source yield to `v` over `[0, T]`.
/// Low modes (`lambda <= 3`) switch on at `t0 in [0, T)`.
pub fn steer(
    es: &EigenSystem,
    v: &SpectralVector,
    horizon: f64,
    t0: f64,
    log_cap: f64,
) -> Result<SteeringControl> {
    es.check_vector(v)?;
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(FvpError::invalid(format!("steering horizon must be positive, got {horizon}")));
    }
    if !(0.0..horizon).contains(&t0) {
        return Err(FvpError::invalid(format!("t0 = {t0} must lie in [0, T) with T = {horizon}")));
    }
    let mut modes = Vec::with_capacity(es.n_modes());
    for j in 0..es.n_modes() {
        let lambda = es.eigenvalue(j);
        let root = lambda.sqrt();
        let theta = if lambda > LAMBDA_THRESHOLD {
            1.0 - 1.0 / (lambda - root)
        } else {
            t0 / horizon
        };
        let alpha = v.coeff(j);
        // k = alpha e^{T lambda} sqrt(lambda) / (e^{T root} - e^{theta T root});
        // the denominator in log form: T root + log(1 - e^{-(1-theta) T root})
        let span = (1.0 - theta) * horizon * root;
        let log_denominator = horizon * root + (-(-span).exp_m1()).ln();
        let log_gain =
            alpha.norm().ln() + horizon * lambda + 0.5 * lambda.ln() - log_denominator;
        if log_gain > log_cap {
            return Err(FvpError::Overflow {
                mode: j + 1,
                log_amplification: log_gain,
                log_cap,
            });
        }
        let gain = if alpha.norm() == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            (alpha / alpha.norm()) * log_gain.exp()
        };
        modes.push(ModeControl { lambda, theta, rate: root - lambda, gain });
    }
    Ok(SteeringControl { basis: es.id(), horizon, t0, modes, target: v.clone() })
}

/// Closed-form verification of a steering control.
#[derive(Debug, Clone)]
pub struct SteeringVerification {
    /// `|y_f - v| / |v|` (absolute when `v = 0`), by exact integration of
    /// the exponential segments.
    pub residual: f64,
    /// `( sum_j lambda_j^{-1} int_0^T |beta_j|^2 dt )^{1/2}`.
    pub control_vstar_norm: f64,
    /// `int |beta_j|^2 / (lambda_j |alpha_j|^2)` per mode with
    /// `lambda_j > 3`; all must stay below `e^{6T}/T^2`.
    pub bound_ratios: Vec<f64>,
    pub energy_bound: f64,
    pub bound_ok: bool,
}

/// Integrate the control analytically and compare its yield with the target.
pub fn verify_steering(
    es: &EigenSystem,
    control: &SteeringControl,
    v: &SpectralVector,
    horizon: f64,
) -> Result<SteeringVerification> {
    es.check_vector(v)?;
    if control.basis_id() != es.id() {
        return Err(FvpError::BasisMismatch { expected: es.id(), found: control.basis_id() });
    }
    if (control.horizon - horizon).abs() > 1e-12 * horizon.max(1.0) {
        return Err(FvpError::invalid("verification horizon differs from the control's"));
    }
    let n = es.n_modes();

    // y_j = e^{-T lambda} k_j int_{theta T}^{T} e^{s sqrt(lambda)} ds
    let mut residual_sq = Vec::with_capacity(n);
    let mut log_beta_sq = Vec::with_capacity(n);
    let mut bound_ratios = Vec::new();
    let energy_bound = (6.0 * horizon).exp() / (horizon * horizon);
    let mut bound_ok = true;
    for j in 0..n {
        let m = &control.modes[j];
        let root = m.lambda.sqrt();
        let span = (1.0 - m.theta) * horizon;
        // int_{theta T}^{T} e^{s root} ds = e^{theta T root} span phi1(span root)
        let i_exp = (m.theta * horizon * root).exp() * span * phi1(span * root);
        let y_j = m.gain * (-horizon * m.lambda).exp() * i_exp;
        residual_sq.push((y_j - v.coeff(j)).norm_sqr());

        // int_{theta T}^{T} e^{2 rate s} ds, in log form against overflow
        let log_int = if m.gain.norm() == 0.0 {
            f64::NEG_INFINITY
        } else {
            2.0 * m.gain.norm().ln()
                + 2.0 * m.rate * m.theta * horizon
                + (span * phi1(2.0 * m.rate * span)).ln()
        };
        log_beta_sq.push(log_int - m.lambda.ln());

        if m.lambda > LAMBDA_THRESHOLD && v.coeff(j).norm() > 0.0 {
            let log_ratio = log_int - m.lambda.ln() - 2.0 * v.coeff(j).norm().ln();
            let ratio = log_ratio.exp();
            bound_ok &= ratio <= energy_bound * (1.0 + 1e-12);
            bound_ratios.push(ratio);
        }
    }
    let target_norm = v.norm_h();
    let abs_residual = pairwise_sum(&residual_sq).sqrt();
    let residual = if target_norm > 0.0 { abs_residual / target_norm } else { abs_residual };
    let control_vstar_norm = (0.5 * log_sum_exp(&log_beta_sq)).exp();
    Ok(SteeringVerification { residual, control_vstar_norm, bound_ratios, energy_bound, bound_ok })
}

/// Resample the analytic control onto a uniform piecewise-linear grid and
/// report the yield error that resampling introduces.
pub fn export_signal(
    es: &EigenSystem,
    control: &SteeringControl,
    steps: usize,
) -> Result<(ModalSignal, f64)> {
    if control.basis_id() != es.id() {
        return Err(FvpError::BasisMismatch { expected: es.id(), found: control.basis_id() });
    }
    let signal =
        ModalSignal::from_fn(es, control.horizon, steps, |j, t| control.eval(j, t))?;
    let y = yield_map(es, &signal)?;
    let target_norm = control.target.norm_h();
    let gap = y.sub(control.target())?.norm_h();
    let err = if target_norm > 0.0 { gap / target_norm } else { gap };
    Ok((signal, err))
}
