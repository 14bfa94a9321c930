//! The heat semigroup `e^{-tA}`, its unbounded inverse `e^{tA}`, and
//! numerical membership in the domain `D(e^{tA})`.
//!
//! On the eigenbasis both act diagonally: `e^{-tA} e_j = e^{-t lambda_j} e_j`.
//! The inverse amplifies mode `j` by `e^{t lambda_j}`, so applying it is
//! gated by a cap on the per-mode log-amplification `log|c_j| + t lambda_j`.
//! Exceeding the cap is the numerical signature of a vector outside
//! `D(e^{tA})`.
//!
//! Membership at a finite truncation is undecidable in principle; the
//! operational rule used here watches the partial graph-norm sums over a
//! doubling schedule of mode counts and classifies by their tail behaviour.

use crate::eigenbasis::{EigenSystem, SpectralVector};
use crate::error::{FvpError, Result};
use crate::exec::log_sum_exp;

/// Default cap on per-mode log-amplification. Leaves headroom below the
/// f64 overflow threshold (~709) for sums formed afterwards.
pub const DEFAULT_LOG_CAP: f64 = 300.0;

/// Default tail tolerance for the membership diagnostic.
pub const DEFAULT_TAIL_TOL: f64 = 1e-6;

/// Partial sums growing by at least this factor over the final doubling
/// mean divergence: the amplified mass concentrates at the truncation edge.
const DIVERGENCE_DECADE: f64 = 10.0;

/// Growth up to this factor is what the partial sums of any fixed
/// square-summable vector exhibit; it certifies boundedness even when the
/// tail has not yet converged to `tail_tol`.
const BOUNDED_GROWTH: f64 = 4.0;

/// Apply `e^{-tA}`: mode `j` is damped by `e^{-lambda_j t}`.
pub fn propagate(es: &EigenSystem, v: &SpectralVector, t: f64) -> Result<SpectralVector> {
    es.check_vector(v)?;
    if !(t >= 0.0) {
        return Err(FvpError::invalid(format!(
            "propagate requires t >= 0 (got {t}); use propagate_inverse for backward steps"
        )));
    }
    Ok(v.map_with(|j| (-es.eigenvalue(j) * t).exp()))
}

/// Per-mode log-amplification `ln|c_j| + t lambda_j` of applying `e^{tA}`.
pub fn log_amplifications(es: &EigenSystem, v: &SpectralVector, t: f64) -> Vec<f64> {
    (0..es.n_modes()).map(|j| v.coeff(j).norm().ln() + t * es.eigenvalue(j)).collect()
}

/// Apply the unbounded inverse `e^{tA}`: mode `j` is amplified by
/// `e^{lambda_j t}`. Fails with the offending mode when any amplified
/// coefficient would exceed `exp(log_cap)`.
pub fn propagate_inverse(
    es: &EigenSystem,
    v: &SpectralVector,
    t: f64,
    log_cap: f64,
) -> Result<SpectralVector> {
    es.check_vector(v)?;
    if !(t >= 0.0) {
        return Err(FvpError::invalid(format!("propagate_inverse requires t >= 0, got {t}")));
    }
    for (j, log_amp) in log_amplifications(es, v, t).into_iter().enumerate() {
        if log_amp > log_cap {
            return Err(FvpError::Overflow { mode: j + 1, log_amplification: log_amp, log_cap });
        }
    }
    Ok(v.map_with(|j| (es.eigenvalue(j) * t).exp()))
}

/// Graph norm of `D(e^{tA})`:
/// `( sum_j (1 + e^{2 lambda_j t}) |c_j|^2 )^{1/2}`,
/// evaluated in log space term by term. Returns `+inf` once any term's
/// logarithm passes the floating-point representable range.
pub fn graph_norm(es: &EigenSystem, v: &SpectralVector, t: f64) -> Result<f64> {
    es.check_vector(v)?;
    if !(t >= 0.0) {
        return Err(FvpError::invalid(format!("graph_norm requires t >= 0, got {t}")));
    }
    let log_sq = log_graph_norm_sq(es, v, t, es.n_modes());
    Ok((0.5 * log_sq).exp())
}

/// log of the partial squared graph norm over the first `n` modes.
fn log_graph_norm_sq(es: &EigenSystem, v: &SpectralVector, t: f64, n: usize) -> f64 {
    let log_terms: Vec<f64> = (0..n)
        .map(|j| {
            let a = v.coeff(j).norm_sqr().ln();
            // ln(1 + e^{2 lambda t}) without overflow
            let e = 2.0 * es.eigenvalue(j) * t;
            let log1p_exp = if e > 36.0 { e } else { e.exp().ln_1p() };
            a + log1p_exp
        })
        .collect();
    log_sum_exp(&log_terms)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Compatible,
    Incompatible,
    Indeterminate,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Compatible => "compatible",
            Verdict::Incompatible => "incompatible",
            Verdict::Indeterminate => "indeterminate",
        }
    }
}

/// Truncation behaviour of the graph-norm sum for one vector at one time.
#[derive(Debug, Clone)]
pub struct MembershipDiagnostic {
    pub verdict: Verdict,
    /// `ln|c_j| + t lambda_j` per mode; `-inf` on zero coefficients.
    pub per_mode_log_amplification: Vec<f64>,
    /// Mode counts of the doubling schedule, ending at `n_modes`.
    pub schedule: Vec<usize>,
    /// Partial graph norms `S_N` along the schedule (may be `+inf`).
    pub partial_graph_norms: Vec<f64>,
    /// Log of the squared partial sums (always finite unless `S_N = 0`).
    pub log_partial_sums_sq: Vec<f64>,
    /// `S_N / S_{N/2} - 1` over the final doubling (in squared sums).
    pub tail_ratio: f64,
}

/// Classify whether `v` is numerically inside `D(e^{tA})`.
///
/// Incompatible when a mode amplifies past `log_cap` or the partial sums
/// grow by a decade over the last doubling. Compatible when all modes stay
/// under the cap and either the tail has converged (`tail_ratio <=
/// tail_tol`) or the growth stays below the bounded-partial-sum factor 4,
/// the signature of a fixed square-summable vector whose mass simply has
/// not decayed yet within the truncation. Between those bands, or when all
/// amplified mass sits in the top half of the truncation, no certificate is
/// possible: indeterminate.
pub fn membership_diagnostic(
    es: &EigenSystem,
    v: &SpectralVector,
    t: f64,
    tail_tol: f64,
    log_cap: f64,
) -> Result<MembershipDiagnostic> {
    es.check_vector(v)?;
    if es.n_modes() < 8 {
        return Err(FvpError::invalid(format!(
            "membership diagnostic needs at least 8 modes, basis has {}",
            es.n_modes()
        )));
    }
    if !(t >= 0.0) {
        return Err(FvpError::invalid(format!("membership diagnostic requires t >= 0, got {t}")));
    }
    let mut schedule = vec![es.n_modes()];
    while *schedule.last().unwrap() / 2 >= 4 {
        let half = schedule.last().unwrap() / 2;
        schedule.push(half);
    }
    schedule.reverse();

    let log_sums: Vec<f64> =
        schedule.iter().map(|&n| log_graph_norm_sq(es, v, t, n)).collect();
    let partial_graph_norms: Vec<f64> = log_sums.iter().map(|&l| (0.5 * l).exp()).collect();

    let n = log_sums.len();
    let (log_last, log_prev) = (log_sums[n - 1], log_sums[n - 2]);
    let tail_ratio = if log_last == f64::NEG_INFINITY {
        0.0 // zero vector: trivially inside every domain
    } else {
        (log_last - log_prev).exp() - 1.0 // +inf when S_{N/2} = 0 < S_N
    };

    let per_mode_log_amplification = log_amplifications(es, v, t);
    let amplification_ok =
        per_mode_log_amplification.iter().all(|&a| a <= log_cap);

    let growth = tail_ratio + 1.0;
    let verdict = if log_last == f64::NEG_INFINITY {
        Verdict::Compatible
    } else if !amplification_ok {
        Verdict::Incompatible
    } else if log_prev == f64::NEG_INFINITY {
        // every amplified coefficient sits in the top half: no evidence
        Verdict::Indeterminate
    } else if growth >= DIVERGENCE_DECADE {
        Verdict::Incompatible
    } else if tail_ratio <= tail_tol || growth <= BOUNDED_GROWTH {
        Verdict::Compatible
    } else {
        Verdict::Indeterminate
    };

    Ok(MembershipDiagnostic {
        verdict,
        per_mode_log_amplification,
        schedule,
        partial_graph_norms,
        log_partial_sums_sq: log_sums,
        tail_ratio,
    })
}

/// Truncation of the classical witness separating `D(e^{tA})` from
/// `D(e^{t'A})` for every `t' > t`: term `n` places `e^{-lambda_{j_n} t}/n`
/// on mode `j_n`, where the `j_n` are strictly increasing with
/// `lambda_{j_n} >= n`. Its graph norm at `t` stays bounded as terms are
/// added, while the amplified sums at any later time grow without bound.
pub fn domain_chain_witness(es: &EigenSystem, t: f64, n_terms: usize) -> Result<SpectralVector> {
    if !(t >= 0.0) {
        return Err(FvpError::invalid(format!("witness requires t >= 0, got {t}")));
    }
    if n_terms == 0 {
        return Err(FvpError::invalid("witness needs at least one term"));
    }
    let mut coeffs = vec![num_complex::Complex64::new(0.0, 0.0); es.n_modes()];
    let mut j = 0usize;
    for n in 1..=n_terms {
        while j < es.n_modes() && es.eigenvalue(j) < n as f64 {
            j += 1;
        }
        if j >= es.n_modes() {
            return Err(FvpError::invalid(format!(
                "witness needs {n_terms} terms but only {} usable modes (lambda_max = {})",
                n - 1,
                es.lambda_max()
            )));
        }
        coeffs[j] = num_complex::Complex64::new((-es.eigenvalue(j) * t).exp() / n as f64, 0.0);
        j += 1; // indices strictly increase
    }
    Ok(SpectralVector::from_parts(coeffs, es.id()))
}
