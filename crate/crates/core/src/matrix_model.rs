//! Finite-dimensional non-selfadjoint models: complex matrices whose
//! Hermitian part is positive definite.
//!
//! These carry the dynamics checks that have no spectral shortcut: numerical
//! range sampling, hyponormality and accretivity of the square (decided by
//! exact Hermitian eigencomputation), the contraction semigroup `e^{-tA}`,
//! and the height function `h(t) = |e^{-tA} u0|`, which is strictly
//! decreasing and strictly convex when the model is hyponormal or has an
//! accretive square. In finite dimension `e^{-tA}` is invertible for every
//! `t`, so domain-chain strictness is exclusively a phenomenon of unbounded
//! spectra.
//!
//! `e^{-tA}` goes through an eigendecomposition when the matrix is
//! diagonalizable with eigenvector condition number below 1e8, and through
//! scaling-and-squaring Pade otherwise.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{FvpError, Result};

type CMat = DMatrix<Complex64>;
type CVec = DVector<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Seed of the numerical-range sampler; recorded in reports.
const SAMPLER_SEED: u64 = 0x4656_504d; // "FVPM"
const SAMPLER_LABEL: &str = "chacha8:seed=0x4656504d";
const N_RANGE_SAMPLES: usize = 10_000;

/// Eigenvector condition number above which `expm` falls back to Pade.
const EIGEN_COND_LIMIT: f64 = 1e8;

#[derive(Debug, Clone)]
enum ExpmRoute {
    Eigen { values: Vec<Complex64>, vectors: CMat, inverse: CMat, cond: f64 },
    Pade,
}

/// Elliptic matrix model with its structure flags.
#[derive(Debug, Clone)]
pub struct MatrixModel {
    a: CMat,
    n: usize,
    /// Lower bound of the numerical range: smallest eigenvalue of the
    /// Hermitian part. Positive by construction.
    pub m_a: f64,
    /// Spectral norm of `A`.
    pub op_norm: f64,
    /// Sampled half-angle of the numerical range.
    pub sector_half_angle: f64,
    /// Analytic bound `arctan(||A||_2 / m_A)`.
    pub sector_half_angle_bound: f64,
    pub hyponormal: bool,
    pub accretive_square: bool,
    /// Smallest eigenvalue of the Hermitian part of `A^2` (exact).
    pub herm_a2_min_eig: f64,
    pub rng_label: &'static str,
    route: ExpmRoute,
}

fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

fn min_hermitian_eig(m: &CMat) -> f64 {
    m.clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

fn spectral_norm(m: &CMat) -> f64 {
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .fold(0.0, f64::max)
}

/// `<Av, v>` in the `H` inner product.
fn rayleigh(a: &CMat, v: &CVec) -> Complex64 {
    let av = a * v;
    v.dotc(&av)
}

/// Build a model from a general complex matrix. Rejects matrices whose
/// Hermitian part is not positive definite.
pub fn build(a: CMat) -> Result<MatrixModel> {
    let n = a.nrows();
    if n == 0 || a.ncols() != n {
        return Err(FvpError::invalid(format!(
            "model matrix must be square and nonempty, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if a.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(FvpError::invalid("non-finite matrix entry"));
    }

    let herm = hermitian_part(&a);
    let herm_eigen = herm.clone().symmetric_eigen();
    let m_a = herm_eigen.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if m_a <= 0.0 {
        return Err(FvpError::NotElliptic { m_a });
    }
    let op_norm = spectral_norm(&a);

    let a2 = &a * &a;
    let herm_a2_min_eig = min_hermitian_eig(&hermitian_part(&a2));
    let accretive_square = herm_a2_min_eig >= -1e-12 * (1.0 + spectral_norm(&a2));

    // hyponormal iff A*A - AA* is positive semidefinite
    let commutator = a.adjoint() * &a - &a * a.adjoint();
    let hyponormal = min_hermitian_eig(&commutator) >= -1e-12 * (1.0 + op_norm * op_norm);

    let route = match eigen_decomposition(&a) {
        Some((values, vectors, inverse, cond)) if cond <= EIGEN_COND_LIMIT => {
            ExpmRoute::Eigen { values, vectors, inverse, cond }
        }
        _ => ExpmRoute::Pade,
    };

    // numerical-range aspect: coordinate axes, Hermitian-part eigenvectors,
    // eigenvectors when available, then the seeded random sweep
    let mut directions: Vec<CVec> = Vec::new();
    for i in 0..n {
        let mut e = CVec::zeros(n);
        e[i] = ONE;
        directions.push(e);
    }
    for c in herm_eigen.eigenvectors.column_iter() {
        directions.push(c.into_owned());
    }
    if let ExpmRoute::Eigen { vectors, .. } = &route {
        for c in vectors.column_iter() {
            directions.push(c.into_owned());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SAMPLER_SEED);
    for _ in 0..N_RANGE_SAMPLES {
        let v = CVec::from_fn(n, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        if v.norm() > 1e-6 {
            directions.push(v);
        }
    }
    let mut aspect: f64 = 0.0;
    for v in &directions {
        let norm = v.norm();
        if norm == 0.0 {
            continue;
        }
        let q = rayleigh(&a, v) / Complex64::new(norm * norm, 0.0);
        if q.re > 0.0 {
            aspect = aspect.max(q.im.abs() / q.re);
        }
    }

    Ok(MatrixModel {
        a,
        n,
        m_a,
        op_norm,
        sector_half_angle: aspect.atan(),
        sector_half_angle_bound: (op_norm / m_a).atan(),
        hyponormal,
        accretive_square,
        herm_a2_min_eig,
        rng_label: SAMPLER_LABEL,
        route,
    })
}

impl MatrixModel {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &CMat {
        &self.a
    }

    /// Condition number of the eigenvector basis when the eigendecomposition
    /// route is active.
    pub fn eigen_cond(&self) -> Option<f64> {
        match &self.route {
            ExpmRoute::Eigen { cond, .. } => Some(*cond),
            ExpmRoute::Pade => None,
        }
    }

    /// `e^{-tA}` as a matrix.
    pub fn expm(&self, t: f64) -> Result<CMat> {
        if !(t >= 0.0) {
            return Err(FvpError::invalid(format!("expm requires t >= 0, got {t}")));
        }
        if t == 0.0 {
            return Ok(CMat::identity(self.n, self.n));
        }
        match &self.route {
            ExpmRoute::Eigen { values, vectors, inverse, .. } => {
                let mut scaled = vectors.clone();
                for (j, &lam) in values.iter().enumerate() {
                    let factor = (-lam * t).exp();
                    for i in 0..self.n {
                        scaled[(i, j)] *= factor;
                    }
                }
                Ok(scaled * inverse)
            }
            ExpmRoute::Pade => Ok(expm_pade(&(&self.a * Complex64::new(-t, 0.0)))),
        }
    }
}

/// Apply `e^{-tA}` to a vector.
pub fn expm_apply(model: &MatrixModel, t: f64, v: &CVec) -> Result<CVec> {
    if v.len() != model.n {
        return Err(FvpError::invalid(format!(
            "vector length {} does not match model dimension {}",
            v.len(),
            model.n
        )));
    }
    if t == 0.0 {
        return Ok(v.clone());
    }
    Ok(model.expm(t)? * v)
}

/// Height function samples and the dynamics checks attached to them.
#[derive(Debug, Clone)]
pub struct HeightReport {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub strictly_decreasing: bool,
    /// Smallest discrete second difference (divided differences).
    pub min_second_difference: f64,
    /// Whether the convexity hypotheses (hyponormal or accretive square) hold.
    pub convexity_flagged: bool,
    /// Asserted only under the flags; `None` otherwise.
    pub second_differences_positive: Option<bool>,
    /// Right derivative at 0, Richardson-extrapolated one-sided difference.
    pub hprime0: f64,
    /// `h'(0) <= -m(A)` up to 1e-4.
    pub hprime0_bound_ok: bool,
    /// `Re <A u0, u0>` for the normalised initial vector.
    pub rayleigh: f64,
    /// `h'(0) = -Re <A u0, u0>` up to 1e-4.
    pub rayleigh_match: bool,
}

/// Sample `h(t) = |e^{-tA} u0|` on an ascending grid (`|u0|` is normalised
/// to 1 first) and evaluate the monotonicity, convexity and short-time
/// decay checks.
pub fn height_function(model: &MatrixModel, u0: &CVec, t_grid: &[f64]) -> Result<HeightReport> {
    if u0.len() != model.n {
        return Err(FvpError::invalid("initial vector dimension mismatch"));
    }
    let norm = u0.norm();
    if norm == 0.0 {
        return Err(FvpError::invalid("height function needs a nonzero initial vector"));
    }
    if t_grid.len() < 3 {
        return Err(FvpError::invalid("height grid needs at least 3 points"));
    }
    if t_grid[0] < 0.0 || t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(FvpError::invalid("height grid must be ascending and nonnegative"));
    }
    let u = u0.map(|c| c / norm);

    let values: Vec<f64> = t_grid
        .iter()
        .map(|&t| expm_apply(model, t, &u).map(|w| w.norm()))
        .collect::<Result<_>>()?;

    let strictly_decreasing = values.windows(2).all(|w| w[1] < w[0]);

    let mut min_second_difference = f64::INFINITY;
    for i in 1..values.len() - 1 {
        let dl = (values[i] - values[i - 1]) / (t_grid[i] - t_grid[i - 1]);
        let dr = (values[i + 1] - values[i]) / (t_grid[i + 1] - t_grid[i]);
        let d2 = 2.0 * (dr - dl) / (t_grid[i + 1] - t_grid[i - 1]);
        min_second_difference = min_second_difference.min(d2);
    }
    let convexity_flagged = model.hyponormal || model.accretive_square;
    let second_differences_positive =
        convexity_flagged.then_some(min_second_difference > -1e-12);

    // one-sided difference at 1e-6, Richardson-extrapolated (h(0) = 1)
    let eps = 1e-6;
    let d_full = (expm_apply(model, eps, &u)?.norm() - 1.0) / eps;
    let d_half = (expm_apply(model, eps / 2.0, &u)?.norm() - 1.0) / (eps / 2.0);
    let hprime0 = 2.0 * d_half - d_full;

    let ray = rayleigh(&model.a, &u).re;
    Ok(HeightReport {
        times: t_grid.to_vec(),
        values,
        strictly_decreasing,
        min_second_difference,
        convexity_flagged,
        second_differences_positive,
        hprime0,
        hprime0_bound_ok: hprime0 <= -model.m_a + 1e-4,
        rayleigh: ray,
        rayleigh_match: (hprime0 + ray).abs() <= 1e-4,
    })
}

// ---------------------------------------------------------------------------
// complex eigendecomposition: Hessenberg + shifted QR for the values,
// inverse iteration for the vectors

fn householder_hessenberg(mut h: CMat) -> CMat {
    let n = h.nrows();
    if n < 3 {
        return h;
    }
    for k in 0..n - 2 {
        let mut v: Vec<Complex64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm <= 1e-300 {
            continue;
        }
        let phase = if v[0].norm() > 0.0 { v[0] / v[0].norm() } else { ONE };
        let alpha = -phase * norm;
        v[0] -= alpha;
        let vnorm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if vnorm <= 1e-300 {
            continue;
        }
        for c in v.iter_mut() {
            *c /= vnorm;
        }
        // rows: H <- (I - 2 v v^H) H on rows k+1..
        for col in 0..n {
            let s: Complex64 =
                (0..v.len()).map(|i| v[i].conj() * h[(k + 1 + i, col)]).sum();
            for i in 0..v.len() {
                h[(k + 1 + i, col)] -= v[i] * s * 2.0;
            }
        }
        // columns: H <- H (I - 2 v v^H) on columns k+1..
        for row in 0..n {
            let s: Complex64 = (0..v.len()).map(|i| h[(row, k + 1 + i)] * v[i]).sum();
            for i in 0..v.len() {
                h[(row, k + 1 + i)] -= s * v[i].conj() * 2.0;
            }
        }
        for i in k + 2..n {
            h[(i, k)] = ZERO;
        }
        h[(k + 1, k)] = alpha;
    }
    h
}

fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
    if r <= 1e-300 {
        return (1.0, ZERO);
    }
    if a.norm() <= 1e-300 {
        return (0.0, b.conj() / b.norm());
    }
    let c = a.norm() / r;
    let s = (a / a.norm()) * b.conj() / r;
    (c, s)
}

/// Eigenvalues of a complex matrix by explicit single-shift QR on the
/// Hessenberg form. Returns `None` if the iteration stalls.
fn qr_eigenvalues(a: &CMat) -> Option<Vec<Complex64>> {
    let n = a.nrows();
    let mut h = householder_hessenberg(a.clone());
    let mut eigs = vec![ZERO; n];
    let mut hi = n;
    let mut iters = 0usize;
    let budget = 80 * n.max(2);
    while hi > 0 {
        if hi == 1 {
            eigs[0] = h[(0, 0)];
            break;
        }
        // deflation scan from the bottom of the active block
        let mut lo = hi - 1;
        while lo > 0 {
            let s = h[(lo - 1, lo - 1)].norm() + h[(lo, lo)].norm();
            if h[(lo, lo - 1)].norm() <= f64::EPSILON * s + 1e-300 {
                h[(lo, lo - 1)] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi - 1 {
            eigs[hi - 1] = h[(hi - 1, hi - 1)];
            hi -= 1;
            continue;
        }
        iters += 1;
        if iters > budget {
            return None;
        }
        // Wilkinson shift from the trailing 2x2, occasionally perturbed
        let (p, q) = (h[(hi - 2, hi - 2)], h[(hi - 2, hi - 1)]);
        let (r, s) = (h[(hi - 1, hi - 2)], h[(hi - 1, hi - 1)]);
        let tr = p + s;
        let det = p * s - q * r;
        let disc = (tr * tr * 0.25 - det).sqrt();
        let mu1 = tr * 0.5 + disc;
        let mu2 = tr * 0.5 - disc;
        let mut mu = if (mu1 - s).norm() < (mu2 - s).norm() { mu1 } else { mu2 };
        if iters.is_multiple_of(24) {
            mu = s + Complex64::new(r.norm(), 0.0);
        }
        for i in lo..hi {
            h[(i, i)] -= mu;
        }
        let mut rotations = Vec::with_capacity(hi - lo - 1);
        for i in lo..hi - 1 {
            let (c, sgn) = givens(h[(i, i)], h[(i + 1, i)]);
            for col in i..hi {
                let x = h[(i, col)];
                let y = h[(i + 1, col)];
                h[(i, col)] = x * c + sgn * y;
                h[(i + 1, col)] = -sgn.conj() * x + y * c;
            }
            rotations.push((i, c, sgn));
        }
        for &(i, c, sgn) in &rotations {
            let top = (i + 2).min(hi);
            for row in lo..top {
                let x = h[(row, i)];
                let y = h[(row, i + 1)];
                h[(row, i)] = x * c + y * sgn.conj();
                h[(row, i + 1)] = -x * sgn + y * c;
            }
        }
        for i in lo..hi {
            h[(i, i)] += mu;
        }
    }
    Some(eigs)
}

/// Eigenvectors by inverse iteration, their matrix, its inverse, and the
/// condition number of the basis. `None` when the matrix looks defective.
fn eigen_decomposition(a: &CMat) -> Option<(Vec<Complex64>, CMat, CMat, f64)> {
    let n = a.nrows();
    let values = qr_eigenvalues(a)?;
    let scale = a.norm().max(1.0);
    let mut vectors = CMat::zeros(n, n);
    for (j, &lam) in values.iter().enumerate() {
        let shift = lam + Complex64::new(1e-10 * scale, 1e-10 * scale);
        let shifted = a - CMat::identity(n, n) * shift;
        let lu = shifted.lu();
        let mut v = CVec::from_fn(n, |i, _| Complex64::new(1.0, 0.3 * (i + j) as f64));
        v /= Complex64::new(v.norm(), 0.0);
        for _ in 0..3 {
            let w = lu.solve(&v)?;
            let norm = w.norm();
            if !norm.is_finite() || norm == 0.0 {
                return None;
            }
            v = w.map(|c| c / norm);
        }
        let residual = (a * &v - &v * lam).norm();
        if residual > 1e-6 * scale {
            return None;
        }
        vectors.set_column(j, &v);
    }
    let svd = vectors.clone().svd(false, false);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let smin = svd.singular_values.iter().copied().fold(f64::INFINITY, f64::min);
    if smin <= 0.0 {
        return None;
    }
    let inverse = vectors.clone().lu().try_inverse()?;
    Some((values, vectors, inverse, smax / smin))
}

// ---------------------------------------------------------------------------
// scaling-and-squaring Pade approximant of e^M (degree 13)

const PADE13_THETA: f64 = 5.371920351148152;
const PADE13_B: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

fn one_norm(m: &CMat) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|c| c.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn expm_pade(m: &CMat) -> CMat {
    let n = m.nrows();
    let norm = one_norm(m);
    let s = if norm > PADE13_THETA {
        ((norm / PADE13_THETA).log2().ceil() as i32).max(0)
    } else {
        0
    };
    let a = m * Complex64::new(0.5f64.powi(s), 0.0);
    let id = CMat::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;
    let b = |i: usize| Complex64::new(PADE13_B[i], 0.0);
    let u_inner = &a6 * (&a6 * b(13) + &a4 * b(11) + &a2 * b(9))
        + &a6 * b(7)
        + &a4 * b(5)
        + &a2 * b(3)
        + &id * b(1);
    let u = &a * u_inner;
    let v = &a6 * (&a6 * b(12) + &a4 * b(10) + &a2 * b(8))
        + &a6 * b(6)
        + &a4 * b(4)
        + &a2 * b(2)
        + &id * b(0);
    let lhs = &v - &u;
    let rhs = &v + &u;
    let mut f = lhs.lu().solve(&rhs).expect("Pade denominator is nonsingular");
    for _ in 0..s {
        f = &f * &f;
    }
    f
}
