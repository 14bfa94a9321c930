//! Dirichlet boundary influence on the interval: the Poisson (harmonic
//! extension) operator, the improper boundary-yield integral, and the
//! inhomogeneous forward solver.
//!
//! Sign convention: the yield is defined through the Laplacian form,
//! `(z_g)_j = -lambda_j int_0^T e^{-lambda_j (T-s)} (K0 g(s))_j ds`,
//! so that `u(T) = e^{-TA} u0 + y_f - z_g` and the solution with constant
//! boundary data relaxes to `+K0 g`, the affine steady state. A grid-based
//! Crank-Nicolson oracle confirms this orientation (see the crate tests).
//!
//! The rectangle carries no boundary machinery here: only `g = 0` is
//! supported in 2D, where the plain forward solver applies.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::eigenbasis::{DomainKind, EigenSystem, SpectralVector};
use crate::error::{FvpError, Result};
use crate::exec::{map_modes, pairwise_sum};
use crate::forward::{advance_segment, duhamel_solve, ModalSignal, Trajectory};

/// Dirichlet boundary values on the interval's two endpoints, piecewise
/// linear on a uniform time grid.
#[derive(Debug, Clone)]
pub struct BoundarySignal {
    horizon: f64,
    steps: usize,
    left: Vec<f64>,
    right: Vec<f64>,
}

impl BoundarySignal {
    pub fn from_values(horizon: f64, left: Vec<f64>, right: Vec<f64>) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(FvpError::invalid(format!("boundary horizon must be positive, got {horizon}")));
        }
        if left.len() != right.len() || left.len() < 2 {
            return Err(FvpError::invalid("boundary signal needs matching node arrays (>= 2 nodes)"));
        }
        if left.iter().chain(&right).any(|v| !v.is_finite()) {
            return Err(FvpError::invalid("non-finite boundary value"));
        }
        Ok(BoundarySignal { horizon, steps: left.len() - 1, left, right })
    }

    pub fn constant(horizon: f64, left: f64, right: f64, steps: usize) -> Result<Self> {
        Self::from_values(horizon, vec![left; steps + 1], vec![right; steps + 1])
    }

    pub fn zero(horizon: f64, steps: usize) -> Result<Self> {
        Self::constant(horizon, 0.0, 0.0, steps)
    }

    pub fn from_fn(
        horizon: f64,
        steps: usize,
        mut fl: impl FnMut(f64) -> f64,
        mut fr: impl FnMut(f64) -> f64,
    ) -> Result<Self> {
        let dt = horizon / steps as f64;
        let left = (0..=steps).map(|i| fl(i as f64 * dt)).collect();
        let right = (0..=steps).map(|i| fr(i as f64 * dt)).collect();
        Self::from_values(horizon, left, right)
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    pub fn node(&self, i: usize) -> (f64, f64) {
        (self.left[i], self.right[i])
    }

    pub fn eval(&self, t: f64) -> (f64, f64) {
        let dt = self.dt();
        let i = ((t / dt).floor() as usize).min(self.steps - 1);
        let s = (t - i as f64 * dt) / dt;
        (
            self.left[i] * (1.0 - s) + self.left[i + 1] * s,
            self.right[i] * (1.0 - s) + self.right[i + 1] * s,
        )
    }

    pub fn is_zero(&self) -> bool {
        self.left.iter().chain(&self.right).all(|&v| v == 0.0)
    }
}

fn require_interval(es: &EigenSystem) -> Result<()> {
    if es.kind() != DomainKind::Interval {
        return Err(FvpError::UnsupportedDomain(es.kind()));
    }
    Ok(())
}

/// Coefficient of the affine extension `left + (right-left) x/L` on mode `k`
/// (1-based): `sqrt(2/L) (L/(k pi)) [ left (1 - (-1)^k) + (right-left) (-1)^{k+1} ]`.
fn affine_coeff(length: f64, k: u32, left: f64, right: f64) -> f64 {
    let even = k.is_multiple_of(2);
    let sign = if even { -1.0 } else { 1.0 }; // (-1)^{k+1}
    let jump = if even { 0.0 } else { 2.0 }; // 1 - (-1)^k
    (2.0 / length).sqrt() * (length / (k as f64 * PI)) * (left * jump + (right - left) * sign)
}

/// Poisson operator `K0`: spectral coefficients of the harmonic (here
/// affine) extension of endpoint values. The trace identity `gamma_0 K0 = I`
/// holds in the Cesaro sense of the synthesized series at the endpoints.
pub fn poisson_extend(es: &EigenSystem, left: f64, right: f64) -> Result<SpectralVector> {
    require_interval(es)?;
    let length = es.length_x();
    let coeffs = (0..es.n_modes())
        .map(|j| Complex64::new(affine_coeff(length, es.mode_pair(j).0, left, right), 0.0))
        .collect();
    SpectralVector::new(es, coeffs)
}

/// `int_0^{t_end} e^{-lambda (t_end - s)} kappa(s) ds` for the
/// piecewise-linear mode coefficient `kappa(s) = (K0 g(s))_j`.
fn convolve_mode(es: &EigenSystem, g: &BoundarySignal, mode: usize, t_end: f64) -> Complex64 {
    let lam = es.eigenvalue(mode);
    let k = es.mode_pair(mode).0;
    let length = es.length_x();
    let dt = g.dt();
    let kappa = |i: usize| {
        let (l, r) = g.node(i);
        affine_coeff(length, k, l, r)
    };
    let n_full = ((t_end / dt) + 1e-12).floor() as usize;
    let n_full = n_full.min(g.steps());
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n_full {
        let a = kappa(i);
        let b = (kappa(i + 1) - a) / dt;
        acc = advance_segment(acc, Complex64::new(a, 0.0), Complex64::new(b, 0.0), lam, dt);
    }
    let rem = t_end - n_full as f64 * dt;
    if rem > 1e-14 && n_full < g.steps() {
        let a = kappa(n_full);
        let b = (kappa(n_full + 1) - a) / dt;
        acc = advance_segment(acc, Complex64::new(a, 0.0), Complex64::new(b, 0.0), lam, rem);
    }
    acc
}

/// Boundary yield with its improper-integral convergence trace.
#[derive(Debug, Clone)]
pub struct BoundaryYield {
    /// `(z_g)_j = -lambda_j int_0^T e^{-lambda_j (T-s)} (K0 g(s))_j ds`.
    pub z_g: SpectralVector,
    /// `(epsilon, |z_g(epsilon) - z_g|_H)` for the truncations
    /// `int_0^{T-epsilon}`, over a halving schedule of epsilon.
    pub eps_trace: Vec<(f64, f64)>,
}

/// Number of halvings in the epsilon schedule.
const EPS_TRACE_LEN: usize = 12;

/// Full influence of the boundary data on the final state, as the limit of
/// the truncated integrals; the trace records the truncation gap closing.
pub fn boundary_yield(es: &EigenSystem, g: &BoundarySignal, horizon: f64) -> Result<BoundaryYield> {
    require_interval(es)?;
    if (g.horizon() - horizon).abs() > 1e-12 * horizon.max(1.0) {
        return Err(FvpError::invalid(format!(
            "boundary horizon {} does not match {horizon}",
            g.horizon()
        )));
    }
    let full: Vec<Complex64> = map_modes(es.n_modes(), |j| {
        convolve_mode(es, g, j, horizon) * (-es.eigenvalue(j))
    });
    let z_g = SpectralVector::new(es, full)?;

    let mut eps_trace = Vec::with_capacity(EPS_TRACE_LEN);
    for i in 1..=EPS_TRACE_LEN {
        let eps = horizon / (2.0f64).powi(i as i32);
        let truncated: Vec<Complex64> = map_modes(es.n_modes(), |j| {
            let lam = es.eigenvalue(j);
            convolve_mode(es, g, j, horizon - eps) * (-lam) * (-lam * eps).exp()
        });
        let gap_sq: Vec<f64> =
            (0..es.n_modes()).map(|j| (truncated[j] - z_g.coeff(j)).norm_sqr()).collect();
        eps_trace.push((eps, pairwise_sum(&gap_sq).sqrt()));
    }
    Ok(BoundaryYield { z_g, eps_trace })
}

/// Forward solve with source and Dirichlet boundary data: per mode,
/// `u_j' + lambda_j u_j = f_j + lambda_j (K0 g)_j`, exactly per segment.
/// `f` and `g` must share the time grid so the combined source stays
/// piecewise linear.
pub fn inhom_forward_solve(
    es: &EigenSystem,
    u0: &SpectralVector,
    f: &ModalSignal,
    g: &BoundarySignal,
    out_grid: &[f64],
) -> Result<Trajectory> {
    require_interval(es)?;
    es.check_vector(u0)?;
    if (f.horizon() - g.horizon()).abs() > 1e-12 * f.horizon().max(1.0) || f.steps() != g.steps() {
        return Err(FvpError::invalid(format!(
            "source grid ({} steps over {}) and boundary grid ({} steps over {}) must coincide",
            f.steps(),
            f.horizon(),
            g.steps(),
            g.horizon()
        )));
    }
    let length = es.length_x();
    let mut values = Vec::with_capacity(es.n_modes() * (f.steps() + 1));
    for j in 0..es.n_modes() {
        let lam = es.eigenvalue(j);
        let k = es.mode_pair(j).0;
        for i in 0..=f.steps() {
            let (l, r) = g.node(i);
            values.push(f.node_value(j, i) + lam * affine_coeff(length, k, l, r));
        }
    }
    let combined = ModalSignal::from_values(es, f.horizon(), f.steps(), values)?;
    duhamel_solve(es, u0, &combined, out_grid)
}

/// Discrete surrogate for the trace-space norm of the boundary data:
/// per endpoint `( ||g||^2_{L2(0,T)} + ||g'||_{L2} ||g||_{L2} )^{1/2}`,
/// summed over the two endpoints. Exact on the piecewise-linear
/// representation.
pub fn boundary_norm(g: &BoundarySignal) -> f64 {
    let dt = g.dt();
    let endpoint = |vals: &[f64]| -> f64 {
        let mut l2_sq = 0.0;
        let mut deriv_sq = 0.0;
        for i in 0..g.steps() {
            let a = vals[i];
            let b = (vals[i + 1] - a) / dt;
            l2_sq += a * a * dt + a * b * dt * dt + b * b * dt * dt * dt / 3.0;
            deriv_sq += b * b * dt;
        }
        (l2_sq + deriv_sq.sqrt() * l2_sq.sqrt()).sqrt()
    };
    endpoint(&g.left) + endpoint(&g.right)
}
