//! Scenario execution: build the data from the configuration, call the
//! library, and emit the CSV/SVG artifacts.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fvp_core::boundary::{boundary_norm, boundary_yield, inhom_forward_solve, BoundarySignal};
use fvp_core::diagnostics::{backward_conditioning_report, instability_table, weyl_check};
use fvp_core::eigenbasis::{interval_basis, rectangle_basis, EigenSystem, Space, SpectralVector};
use fvp_core::final_value::{analyze, Thresholds};
use fvp_core::forward::{
    duhamel_solve, smoothing_inequality_check, stability_check, uniform_grid, x_norm, ModalSignal,
    Trajectory,
};
use fvp_core::matrix_model::{build, height_function};
use fvp_core::steering::{export_signal, steer, verify_steering};

use crate::config::{
    BoundarySpec, DomainKindSpec, MatrixSpec, ScenarioConfig, ScenarioKind, SignalSpec, TimeSpec,
    VectorSpec,
};
use crate::output::{fmt_f64, line_plot, write_csv, Report};

/// Outcome of a scenario run, mapped to the process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunOutcome {
    /// Success (exit 0).
    Ok,
    /// Backward data rejected by the compatibility analysis (exit 2).
    Incompatible,
}

pub struct RunContext<'a> {
    pub config: &'a ScenarioConfig,
    pub config_bytes: &'a [u8],
    pub out_dir: &'a Path,
    pub seed: u64,
    pub svg: bool,
    pub log_cap: f64,
}

fn build_basis(config: &ScenarioConfig) -> Result<EigenSystem> {
    let domain = config.domain.as_ref().ok_or_else(|| anyhow!("domain missing"))?;
    let es = match domain.kind {
        DomainKindSpec::Interval => interval_basis(
            domain.length.ok_or_else(|| anyhow!("domain.length missing"))?,
            domain.n_modes,
            domain.n_quad,
        )?,
        DomainKindSpec::Rectangle => rectangle_basis(
            domain.length_x.ok_or_else(|| anyhow!("domain.length_x missing"))?,
            domain.length_y.ok_or_else(|| anyhow!("domain.length_y missing"))?,
            domain.n_modes,
            domain.n_quad,
        )?,
    };
    Ok(es)
}

fn build_vector(
    spec: &VectorSpec,
    es: &EigenSystem,
    horizon: f64,
    rng: &mut ChaCha8Rng,
) -> Result<SpectralVector> {
    Ok(match spec {
        VectorSpec::Zero => SpectralVector::zero(es),
        VectorSpec::Basis { mode, scale } => {
            SpectralVector::basis_mode(es, mode - 1)?.scale(*scale)
        }
        VectorSpec::ReachableBasis { mode } => {
            let v = SpectralVector::basis_mode(es, mode - 1)?;
            fvp_core::propagate(es, &v, horizon)?
        }
        VectorSpec::Coeffs { re, im } => {
            let coeffs = re
                .iter()
                .enumerate()
                .map(|(j, &r)| {
                    Complex64::new(r, im.as_ref().map_or(0.0, |v| v[j]))
                })
                .collect();
            SpectralVector::new(es, coeffs)?
        }
        VectorSpec::RandomDecay { rate, amplitude } => {
            let coeffs = (0..es.n_modes())
                .map(|j| {
                    let damp = (-rate * es.eigenvalue(j)).exp() * amplitude;
                    Complex64::new(
                        rng.gen_range(-1.0..1.0) * damp,
                        rng.gen_range(-1.0..1.0) * damp,
                    )
                })
                .collect();
            SpectralVector::new(es, coeffs)?
        }
    })
}

fn build_signal(
    spec: Option<&SignalSpec>,
    es: &EigenSystem,
    time: &TimeSpec,
    rng: &mut ChaCha8Rng,
) -> Result<ModalSignal> {
    Ok(match spec {
        None | Some(SignalSpec::Zero) => ModalSignal::zero(es, time.horizon, time.steps)?,
        Some(SignalSpec::Constant { vector }) => {
            let v = build_vector(vector, es, time.horizon, rng)?;
            ModalSignal::constant(es, &v, time.horizon, time.steps)?
        }
        Some(SignalSpec::Random { amplitude }) => {
            let mut draws = Vec::with_capacity(es.n_modes() * (time.steps + 1));
            for _ in 0..es.n_modes() * (time.steps + 1) {
                draws.push(Complex64::new(
                    rng.gen_range(-1.0..1.0) * amplitude,
                    rng.gen_range(-1.0..1.0) * amplitude,
                ));
            }
            ModalSignal::from_values(es, time.horizon, time.steps, draws)?
        }
    })
}

fn build_boundary(spec: &BoundarySpec, time: &TimeSpec) -> Result<BoundarySignal> {
    Ok(match spec {
        BoundarySpec::Zero => BoundarySignal::zero(time.horizon, time.steps)?,
        BoundarySpec::Constant { left, right } => {
            BoundarySignal::constant(time.horizon, *left, *right, time.steps)?
        }
        BoundarySpec::Linear { left, right } => BoundarySignal::from_fn(
            time.horizon,
            time.steps,
            |t| left[0] + (left[1] - left[0]) * t / time.horizon,
            |t| right[0] + (right[1] - right[0]) * t / time.horizon,
        )?,
    })
}

fn write_trajectory(path: &Path, traj: &Trajectory) -> Result<()> {
    let mut rows = Vec::new();
    for (i, &t) in traj.times().iter().enumerate() {
        let state = traj.state(i);
        for j in 0..state.len() {
            let c = state.coeff(j);
            rows.push(vec![
                fmt_f64(t),
                (j + 1).to_string(),
                fmt_f64(c.re),
                fmt_f64(c.im),
            ]);
        }
    }
    write_csv(path, "t,mode,re,im", &rows)
}

fn mode_amplitude_svg(es: &EigenSystem, v: &SpectralVector, title: &str) -> String {
    let xs: Vec<f64> = (1..=es.n_modes()).map(|k| k as f64).collect();
    let ys: Vec<f64> = (0..es.n_modes())
        .map(|j| v.coeff(j).norm().max(1e-300).log10())
        .collect();
    line_plot(title, &xs, &ys)
}

fn push_vector_rows(report: &mut Report, name: &str, v: &SpectralVector) {
    for j in 0..v.len() {
        report.push(&format!("{name}_mode_{}", j + 1), v.coeff(j).re);
        report.push(&format!("{name}_mode_{}_im", j + 1), v.coeff(j).im);
    }
}

/// Execute a validated configuration, writing artifacts into `out_dir`.
pub fn run(ctx: &RunContext) -> Result<RunOutcome> {
    std::fs::create_dir_all(ctx.out_dir)
        .with_context(|| format!("creating {}", ctx.out_dir.display()))?;
    let mut report = Report::new(ctx.config.scenario.as_str(), ctx.config_bytes);
    report.push_int("seed", ctx.seed as usize);
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let thresholds =
        Thresholds { log_cap: ctx.log_cap, tail_tol: ctx.config.thresholds.tail_tol };

    let outcome = match ctx.config.scenario {
        ScenarioKind::Forward => run_forward(ctx, &mut report, &mut rng)?,
        ScenarioKind::Backward => run_backward(ctx, &mut report, &mut rng, thresholds)?,
        ScenarioKind::Steer => run_steer(ctx, &mut report, &mut rng)?,
        ScenarioKind::Boundary => run_boundary(ctx, &mut report, &mut rng)?,
        ScenarioKind::Diagnostics => run_diagnostics(ctx, &mut report)?,
        ScenarioKind::Matrix => run_matrix(ctx, &mut report)?,
    };
    report.write(&ctx.out_dir.join("report.csv"))?;
    Ok(outcome)
}

fn time_of(config: &ScenarioConfig) -> Result<&TimeSpec> {
    config.time.as_ref().ok_or_else(|| anyhow!("time section missing"))
}

fn run_forward(ctx: &RunContext, report: &mut Report, rng: &mut ChaCha8Rng) -> Result<RunOutcome> {
    let es = build_basis(ctx.config)?;
    let time = time_of(ctx.config)?;
    let u0 = build_vector(
        ctx.config.data.u0.as_ref().ok_or_else(|| anyhow!("data.u0 missing"))?,
        &es,
        time.horizon,
        rng,
    )?;
    let f = build_signal(ctx.config.data.f.as_ref(), &es, time, rng)?;
    let grid = uniform_grid(time.horizon, time.out_points);
    let traj = duhamel_solve(&es, &u0, &f, &grid)?;
    write_trajectory(&ctx.out_dir.join("trajectory.csv"), &traj)?;

    report.push("horizon", time.horizon);
    report.push("u0_norm_h", u0.norm_h());
    report.push("final_norm_h", traj.final_state().norm_h());
    report.push("final_norm_v", es.sobolev_norm(traj.final_state(), Space::V)?);
    report.push("x_norm", x_norm(&es, &traj, &f)?);
    let stab = stability_check(&es, &u0, &f, &traj)?;
    report.push("stability_sup_ratio", stab.sup.ratio);
    report.push("stability_l2v_ratio", stab.l2v.ratio);
    report.push_str("stability_passed", if stab.passed() { "true" } else { "false" });
    if u0.norm_h() > 0.0 {
        let smooth = smoothing_inequality_check(&es, &u0, time.horizon)?;
        report.push("smoothing_ratio", smooth.check.ratio);
        report.push("smoothing_c5", smooth.c5);
    }
    if ctx.svg {
        let svg = mode_amplitude_svg(&es, traj.final_state(), "log10 |u_j(T)|");
        std::fs::write(ctx.out_dir.join("modes.svg"), svg)?;
    }
    println!("forward: solved to T = {} on {} modes", time.horizon, es.n_modes());
    Ok(RunOutcome::Ok)
}

fn run_backward(
    ctx: &RunContext,
    report: &mut Report,
    rng: &mut ChaCha8Rng,
    thresholds: Thresholds,
) -> Result<RunOutcome> {
    let es = build_basis(ctx.config)?;
    let time = time_of(ctx.config)?;
    let u_t = build_vector(
        ctx.config.data.u_t.as_ref().ok_or_else(|| anyhow!("data.u_t missing"))?,
        &es,
        time.horizon,
        rng,
    )?;
    let f = build_signal(ctx.config.data.f.as_ref(), &es, time, rng)?;
    let g = match &ctx.config.data.g {
        Some(spec) => Some(build_boundary(spec, time)?),
        None => None,
    };

    let analysis = analyze(&es, &u_t, &f, g.as_ref(), time.horizon, thresholds)?;
    report.push_str("verdict", analysis.verdict().as_str());
    report.push_int("worst_mode", analysis.worst_mode);
    report.push("worst_log_amplification", analysis.worst_log_amplification);
    report.push("log_conditioning", analysis.log_conditioning);
    report.push("conditioning", analysis.conditioning());
    report.push("tail_ratio", analysis.diagnostic.tail_ratio);
    report.push("u_t_norm", analysis.u_t_norm);
    report.push("f_vstar_norm", analysis.f_vstar_norm);
    report.push("boundary_norm", analysis.boundary_norm_term);
    report.push("graph_term", analysis.graph_term);
    report.push("y_graph_norm", analysis.y_graph_norm);

    let Some(u0) = analysis.reconstructed_u0.clone() else {
        println!(
            "backward: {} (worst mode {}, log-amplification {})",
            analysis.verdict().as_str(),
            analysis.worst_mode,
            fmt_f64(analysis.worst_log_amplification)
        );
        return Ok(RunOutcome::Incompatible);
    };
    push_vector_rows(report, "u0", &u0);

    let grid = uniform_grid(time.horizon, time.out_points);
    let traj = match &g {
        Some(g) => inhom_forward_solve(&es, &u0, &f, g, &grid)?,
        None => duhamel_solve(&es, &u0, &f, &grid)?,
    };
    write_trajectory(&ctx.out_dir.join("trajectory.csv"), &traj)?;
    let final_gap = traj.final_state().sub(&u_t)?.norm_h();
    report.push("final_state_gap", final_gap);
    if ctx.svg {
        let svg = mode_amplitude_svg(&es, &u0, "log10 |u_j(0)|");
        std::fs::write(ctx.out_dir.join("modes.svg"), svg)?;
    }
    println!("backward: compatible, |u(0)| = {}", fmt_f64(u0.norm_h()));
    Ok(RunOutcome::Ok)
}

fn run_steer(ctx: &RunContext, report: &mut Report, rng: &mut ChaCha8Rng) -> Result<RunOutcome> {
    let es = build_basis(ctx.config)?;
    let time = time_of(ctx.config)?;
    let target = build_vector(
        ctx.config.data.target.as_ref().ok_or_else(|| anyhow!("data.target missing"))?,
        &es,
        time.horizon,
        rng,
    )?;
    let t0 = time.t0.unwrap_or(time.horizon / 2.0);
    let control = steer(&es, &target, time.horizon, t0, ctx.log_cap)?;
    let ver = verify_steering(&es, &control, &target, time.horizon)?;
    let (_, resample_error) = export_signal(&es, &control, 16 * time.steps.max(1))?;

    let rows: Vec<Vec<String>> = control
        .modes
        .iter()
        .enumerate()
        .map(|(j, m)| {
            vec![
                (j + 1).to_string(),
                fmt_f64(m.lambda),
                fmt_f64(m.theta),
                fmt_f64(m.rate),
                fmt_f64(m.gain.re),
                fmt_f64(m.gain.im),
            ]
        })
        .collect();
    write_csv(&ctx.out_dir.join("control.csv"), "mode,lambda,theta,rate,gain_re,gain_im", &rows)?;

    report.push("horizon", time.horizon);
    report.push("t0", t0);
    report.push("residual", ver.residual);
    report.push("control_vstar_norm", ver.control_vstar_norm);
    report.push("energy_bound", ver.energy_bound);
    let worst = ver.bound_ratios.iter().copied().fold(0.0, f64::max);
    report.push("worst_energy_ratio", worst);
    report.push_str("energy_bound_ok", if ver.bound_ok { "true" } else { "false" });
    report.push("resample_error", resample_error);
    println!("steer: residual {}", fmt_f64(ver.residual));
    Ok(RunOutcome::Ok)
}

fn run_boundary(ctx: &RunContext, report: &mut Report, rng: &mut ChaCha8Rng) -> Result<RunOutcome> {
    let es = build_basis(ctx.config)?;
    let time = time_of(ctx.config)?;
    let u0 = build_vector(
        ctx.config.data.u0.as_ref().ok_or_else(|| anyhow!("data.u0 missing"))?,
        &es,
        time.horizon,
        rng,
    )?;
    let f = build_signal(ctx.config.data.f.as_ref(), &es, time, rng)?;
    let g = build_boundary(
        ctx.config.data.g.as_ref().ok_or_else(|| anyhow!("data.g missing"))?,
        time,
    )?;

    let grid = uniform_grid(time.horizon, time.out_points);
    let traj = inhom_forward_solve(&es, &u0, &f, &g, &grid)?;
    write_trajectory(&ctx.out_dir.join("trajectory.csv"), &traj)?;

    let by = boundary_yield(&es, &g, time.horizon)?;
    let eps_rows: Vec<Vec<String>> =
        by.eps_trace.iter().map(|&(eps, gap)| vec![fmt_f64(eps), fmt_f64(gap)]).collect();
    write_csv(&ctx.out_dir.join("eps_trace.csv"), "epsilon,gap", &eps_rows)?;

    report.push("horizon", time.horizon);
    report.push("boundary_norm", boundary_norm(&g));
    report.push("z_g_norm_h", by.z_g.norm_h());
    push_vector_rows(report, "z_g", &by.z_g);
    report.push("final_norm_h", traj.final_state().norm_h());
    if ctx.svg {
        let svg = mode_amplitude_svg(&es, traj.final_state(), "log10 |u_j(T)|");
        std::fs::write(ctx.out_dir.join("modes.svg"), svg)?;
    }
    println!("boundary: |z_g| = {}", fmt_f64(by.z_g.norm_h()));
    Ok(RunOutcome::Ok)
}

fn run_diagnostics(ctx: &RunContext, report: &mut Report) -> Result<RunOutcome> {
    let es = build_basis(ctx.config)?;
    let horizon = ctx.config.time.as_ref().map_or(1.0, |t| t.horizon);

    let rows = instability_table(&es, horizon, es.n_modes(), ctx.log_cap)?;
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.mode.to_string(),
                fmt_f64(r.lambda),
                fmt_f64(r.log_amplification),
                r.amplification.map(fmt_f64).unwrap_or_default(),
                if r.amplification.is_none() { "overflow" } else { "" }.to_string(),
            ]
        })
        .collect();
    write_csv(
        &ctx.out_dir.join("instability.csv"),
        "mode,lambda,log_amplification,amplification,flagged",
        &table,
    )?;

    let lambda_cut = ctx.config.data.lambda_cut.unwrap_or_else(|| es.lambda_max());
    let weyl = weyl_check(&es, lambda_cut)?;
    report.push("horizon", horizon);
    report.push("weyl_lambda_cut", lambda_cut);
    report.push_int("weyl_count", weyl.count);
    report.push("weyl_predicted", weyl.predicted);
    report.push("weyl_ratio", weyl.ratio);

    let default_horizons = vec![0.25, 0.5, 1.0, 2.0, 4.0];
    let horizons = ctx.config.data.horizons.clone().unwrap_or(default_horizons);
    let cond = backward_conditioning_report(&es, &horizons, ctx.log_cap)?;
    let cond_rows: Vec<Vec<String>> = cond
        .iter()
        .map(|r| {
            vec![
                fmt_f64(r.horizon),
                r.max_recoverable_mode.to_string(),
                fmt_f64(r.witness_graph_norm_at_t),
                fmt_f64(r.witness_graph_norm_at_2t),
            ]
        })
        .collect();
    write_csv(
        &ctx.out_dir.join("conditioning.csv"),
        "horizon,max_recoverable_mode,witness_graph_norm_t,witness_graph_norm_2t",
        &cond_rows,
    )?;
    println!("diagnostics: weyl ratio {}", fmt_f64(weyl.ratio));
    Ok(RunOutcome::Ok)
}

fn build_matrix(spec: &MatrixSpec) -> Result<(DMatrix<Complex64>, DVector<Complex64>)> {
    let n = spec.re.len();
    let a = DMatrix::from_fn(n, n, |i, j| {
        Complex64::new(spec.re[i][j], spec.im.as_ref().map_or(0.0, |im| im[i][j]))
    });
    let u0 = DVector::from_fn(n, |i, _| {
        Complex64::new(spec.u0_re[i], spec.u0_im.as_ref().map_or(0.0, |im| im[i]))
    });
    Ok((a, u0))
}

fn run_matrix(ctx: &RunContext, report: &mut Report) -> Result<RunOutcome> {
    let spec =
        ctx.config.data.matrix.as_ref().ok_or_else(|| anyhow!("data.matrix missing"))?;
    let (a, u0) = build_matrix(spec)?;
    let model = build(a)?;
    report.push_int("dimension", model.dim());
    report.push("m_a", model.m_a);
    report.push("op_norm", model.op_norm);
    report.push("sector_half_angle", model.sector_half_angle);
    report.push("sector_half_angle_bound", model.sector_half_angle_bound);
    report.push_str("hyponormal", if model.hyponormal { "true" } else { "false" });
    report.push_str(
        "accretive_square",
        if model.accretive_square { "true" } else { "false" },
    );
    report.push("herm_a2_min_eig", model.herm_a2_min_eig);
    match model.eigen_cond() {
        Some(c) => report.push("eigen_cond", c),
        None => report.push_str("eigen_cond", "pade"),
    }
    report.push_str("rng", model.rng_label);

    let grid: Vec<f64> =
        (0..=spec.t_steps).map(|i| spec.t_max * i as f64 / spec.t_steps as f64).collect();
    let height = height_function(&model, &u0, &grid)?;
    let rows: Vec<Vec<String>> = grid
        .iter()
        .zip(&height.values)
        .map(|(&t, &h)| vec![fmt_f64(t), fmt_f64(h)])
        .collect();
    write_csv(&ctx.out_dir.join("height.csv"), "t,h", &rows)?;
    report.push_str(
        "strictly_decreasing",
        if height.strictly_decreasing { "true" } else { "false" },
    );
    report.push("min_second_difference", height.min_second_difference);
    report.push_str(
        "convexity_flagged",
        if height.convexity_flagged { "true" } else { "false" },
    );
    if let Some(convex) = height.second_differences_positive {
        report.push_str("second_differences_positive", if convex { "true" } else { "false" });
    }
    report.push("hprime0", height.hprime0);
    report.push_str("hprime0_bound_ok", if height.hprime0_bound_ok { "true" } else { "false" });
    report.push("rayleigh", height.rayleigh);
    report.push_str("rayleigh_match", if height.rayleigh_match { "true" } else { "false" });

    if ctx.svg {
        let svg = line_plot("h(t) = |e^{-tA} u0|", &grid, &height.values);
        std::fs::write(ctx.out_dir.join("height.svg"), svg)?;
    }
    println!("matrix: m(A) = {}, h'(0) = {}", fmt_f64(model.m_a), fmt_f64(height.hprime0));
    Ok(RunOutcome::Ok)
}

/// Guard against silent misuse: scenarios that would need boundary data on
/// a rectangle are rejected before reaching the solvers.
pub fn precheck(config: &ScenarioConfig) -> Result<()> {
    if config.scenario == ScenarioKind::Backward {
        if let (Some(domain), Some(_)) = (&config.domain, &config.data.g) {
            if domain.kind == DomainKindSpec::Rectangle {
                bail!("backward scenarios with boundary data support interval domains only");
            }
        }
    }
    Ok(())
}
