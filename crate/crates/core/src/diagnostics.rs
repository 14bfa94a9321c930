//! Scenario-level diagnostics: per-mode backward amplification, Weyl
//! counting, and the shrinkage of the numerically recoverable mode set.
//!
//! The central quantities overflow by design, so every table carries the
//! log-amplification column unconditionally and flags the linear column
//! once it passes the cap.

use crate::eigenbasis::{DomainKind, EigenSystem};
use crate::error::{FvpError, Result};
use crate::semigroup::{domain_chain_witness, graph_norm};

/// One row of the backward instability table.
#[derive(Debug, Clone, Copy)]
pub struct InstabilityRow {
    /// 1-based mode index.
    pub mode: usize,
    pub lambda: f64,
    /// `T * lambda_k`.
    pub log_amplification: f64,
    /// `e^{T lambda_k}` when below the cap, `None` (flagged) otherwise.
    pub amplification: Option<f64>,
}

/// Backward amplification `e^{T lambda_k}` of each retained mode: final data
/// of unit size on mode `k` come from initial states of this size.
pub fn instability_table(
    es: &EigenSystem,
    horizon: f64,
    k_max: usize,
    log_cap: f64,
) -> Result<Vec<InstabilityRow>> {
    if k_max == 0 || k_max > es.n_modes() {
        return Err(FvpError::invalid(format!(
            "k_max = {k_max} outside 1..={}",
            es.n_modes()
        )));
    }
    if !(horizon >= 0.0) {
        return Err(FvpError::invalid(format!("horizon must be nonnegative, got {horizon}")));
    }
    Ok((0..k_max)
        .map(|j| {
            let lambda = es.eigenvalue(j);
            let log_amp = horizon * lambda;
            InstabilityRow {
                mode: j + 1,
                lambda,
                log_amplification: log_amp,
                amplification: (log_amp <= log_cap).then(|| log_amp.exp()),
            }
        })
        .collect())
}

/// Eigenvalue count against the Weyl prediction.
#[derive(Debug, Clone, Copy)]
pub struct WeylReport {
    pub count: usize,
    pub predicted: f64,
    pub ratio: f64,
}

/// Count eigenvalues up to `lambda_cut` and compare with the Weyl law:
/// `L sqrt(lambda)/pi` on the interval, `area * lambda/(4 pi)` on the
/// rectangle. The truncation must contain every eigenvalue below the cut.
pub fn weyl_check(es: &EigenSystem, lambda_cut: f64) -> Result<WeylReport> {
    if !(lambda_cut > 0.0) {
        return Err(FvpError::invalid(format!("lambda_cut must be positive, got {lambda_cut}")));
    }
    if lambda_cut > es.lambda_max() {
        return Err(FvpError::invalid(format!(
            "lambda_cut = {lambda_cut} beyond the truncation (lambda_max = {})",
            es.lambda_max()
        )));
    }
    if es.kind() == DomainKind::Rectangle {
        // indices just outside the per-axis truncation must already exceed
        // the cut, otherwise the count would miss lattice points
        let m = (es.n_modes() as f64).sqrt().round() as u32;
        let pi = std::f64::consts::PI;
        let (lx, ly) = (es.length_x(), es.length_y());
        let beyond_x = ((m + 1) as f64 * pi / lx).powi(2) + (pi / ly).powi(2);
        let beyond_y = (pi / lx).powi(2) + ((m + 1) as f64 * pi / ly).powi(2);
        if lambda_cut > beyond_x.min(beyond_y) {
            return Err(FvpError::invalid(format!(
                "lambda_cut = {lambda_cut} beyond the truncation: lattice points outside \
                 the {m}x{m} index box reach below the cut"
            )));
        }
    }
    let count = es.eigenvalues().iter().filter(|&&l| l <= lambda_cut).count();
    let predicted = match es.kind() {
        DomainKind::Interval => es.length_x() * lambda_cut.sqrt() / std::f64::consts::PI,
        DomainKind::Rectangle => {
            es.length_x() * es.length_y() * lambda_cut / (4.0 * std::f64::consts::PI)
        }
    };
    Ok(WeylReport { count, predicted, ratio: count as f64 / predicted })
}

/// One horizon of the backward conditioning report.
#[derive(Debug, Clone, Copy)]
pub struct ConditioningRow {
    pub horizon: f64,
    /// Largest mode index with `lambda_k * T <= log_cap`; every mode is
    /// recoverable at `T = 0`.
    pub max_recoverable_mode: usize,
    /// Graph norm of the chain witness built at this horizon...
    pub witness_graph_norm_at_t: f64,
    /// ...and the same vector measured at twice the horizon.
    pub witness_graph_norm_at_2t: f64,
}

/// How the numerically recoverable mode set shrinks as the horizon grows,
/// with the witness vector's graph norms at `T` and `2T` alongside.
pub fn backward_conditioning_report(
    es: &EigenSystem,
    horizons: &[f64],
    log_cap: f64,
) -> Result<Vec<ConditioningRow>> {
    let mut rows = Vec::with_capacity(horizons.len());
    for &t in horizons {
        if !(t >= 0.0) {
            return Err(FvpError::invalid(format!("horizon must be nonnegative, got {t}")));
        }
        let max_recoverable_mode =
            es.eigenvalues().iter().filter(|&&l| l * t <= log_cap).count();
        let witness_terms = witness_capacity(es).clamp(1, 8);
        let w = domain_chain_witness(es, t, witness_terms)?;
        rows.push(ConditioningRow {
            horizon: t,
            max_recoverable_mode,
            witness_graph_norm_at_t: graph_norm(es, &w, t)?,
            witness_graph_norm_at_2t: graph_norm(es, &w, 2.0 * t)?,
        });
    }
    Ok(rows)
}

/// Number of witness terms the truncation supports.
fn witness_capacity(es: &EigenSystem) -> usize {
    let mut count = 0;
    let mut j = 0;
    loop {
        let need = (count + 1) as f64;
        while j < es.n_modes() && es.eigenvalue(j) < need {
            j += 1;
        }
        if j >= es.n_modes() {
            return count;
        }
        count += 1;
        j += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigenbasis::{interval_basis, rectangle_basis};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn instability_anchor_mode_three() {
        let es = interval_basis(PI, 8, 32).unwrap();
        let rows = instability_table(&es, 1.0, 8, 300.0).unwrap();
        let r3 = rows[2];
        assert_eq!(r3.mode, 3);
        assert_abs_diff_eq!(r3.lambda, 9.0, epsilon = 1e-14);
        assert_abs_diff_eq!(r3.amplification.unwrap(), 8103.083927575384, epsilon = 1e-8);
    }

    #[test]
    fn instability_zero_horizon() {
        let es = interval_basis(PI, 4, 16).unwrap();
        let rows = instability_table(&es, 0.0, 4, 300.0).unwrap();
        assert_abs_diff_eq!(rows[0].amplification.unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn instability_flags_overflowing_modes() {
        let es = interval_basis(PI, 30, 120).unwrap();
        let rows = instability_table(&es, 1.0, 30, 300.0).unwrap();
        let r30 = rows[29];
        assert_abs_diff_eq!(r30.log_amplification, 900.0, epsilon = 1e-10);
        assert!(r30.amplification.is_none());
        assert!(rows[16].amplification.is_some()); // 17^2 = 289 <= 300
        assert!(rows[17].amplification.is_none()); // 18^2 = 324 > 300
    }

    #[test]
    fn weyl_interval_is_exact() {
        let es = interval_basis(PI, 128, 512).unwrap();
        let rep = weyl_check(&es, 1e4).unwrap();
        assert_eq!(rep.count, 100);
        assert_abs_diff_eq!(rep.predicted, 100.0, epsilon = 1e-9);
        assert_abs_diff_eq!(rep.ratio, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn weyl_at_ground_eigenvalue() {
        let es = interval_basis(PI, 8, 32).unwrap();
        let rep = weyl_check(&es, es.lambda_min()).unwrap();
        assert_eq!(rep.count, 1);
    }

    #[test]
    fn weyl_rectangle_ratio() {
        let es = rectangle_basis(PI, PI, 110, 440).unwrap();
        let rep = weyl_check(&es, 1e4).unwrap();
        assert!(rep.ratio > 0.9 && rep.ratio < 1.1, "ratio {}", rep.ratio);
    }

    #[test]
    fn weyl_rejects_cut_beyond_truncation() {
        let es = interval_basis(PI, 8, 32).unwrap();
        assert!(weyl_check(&es, 100.0).is_err()); // lambda_max = 64
        let es = rectangle_basis(PI, PI, 10, 40).unwrap();
        // lambda_max = 200 but (11, 1) sits at 122 < 150
        assert!(weyl_check(&es, 150.0).is_err());
    }

    #[test]
    fn conditioning_anchors() {
        let es = interval_basis(PI, 64, 256).unwrap();
        let rows = backward_conditioning_report(&es, &[0.0, 1.0, 4.0], 300.0).unwrap();
        assert_eq!(rows[0].max_recoverable_mode, 64); // T = 0: everything
        assert_eq!(rows[1].max_recoverable_mode, 17); // 17^2 = 289 <= 300 < 324
        assert_eq!(rows[2].max_recoverable_mode, 8); // 4*64 = 256 <= 300 < 324
    }

    #[test]
    fn recoverable_count_nonincreasing() {
        let es = interval_basis(PI, 48, 192).unwrap();
        let ts: Vec<f64> = (0..12).map(|i| 0.5 * i as f64).collect();
        let rows = backward_conditioning_report(&es, &ts, 300.0).unwrap();
        for w in rows.windows(2) {
            assert!(w[1].max_recoverable_mode <= w[0].max_recoverable_mode);
        }
    }

    #[test]
    fn witness_norm_grows_with_doubled_horizon() {
        let es = interval_basis(PI, 64, 256).unwrap();
        let rows = backward_conditioning_report(&es, &[0.5], 300.0).unwrap();
        assert!(rows[0].witness_graph_norm_at_2t > rows[0].witness_graph_norm_at_t);
    }

    #[test]
    fn table_matches_inverse_propagation() {
        use crate::eigenbasis::SpectralVector;
        use crate::semigroup::propagate_inverse;
        let es = interval_basis(PI, 12, 48).unwrap();
        let rows = instability_table(&es, 1.0, 12, 300.0).unwrap();
        for (j, row) in rows.iter().enumerate() {
            let v = SpectralVector::basis_mode(&es, j).unwrap();
            let amplified = propagate_inverse(&es, &v, 1.0, 300.0).unwrap();
            let got = amplified.coeff(j).re;
            let want = row.amplification.unwrap();
            assert!((got - want).abs() / want <= 1e-12);
        }
    }
}
