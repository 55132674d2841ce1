//! The five experiment commands: spectrum, transition, stability, simulate,
//! speedup.

use std::path::Path;

use nalgebra::DVector;
use num_complex::Complex64;

use sapi_core::driver::{self, SimulationSetup};
use sapi_core::grid::{Grid1D, RelaxationProfile};
use sapi_core::model::{self, ModelSystem, MomentState};
use sapi_core::operator::{self, SemiDiscreteOperator};
use sapi_core::pvm;
use sapi_core::spectral;
use sapi_core::speedup::{self, reference_scenarios};
use sapi_core::stability::{self, IntegratorKind};
use sapi_core::stepping::{self, IntegratorConfig, ModeFamily};
use sapi_core::transition::{self, TransitionMatrix};

use crate::config::{ExperimentConfig, InitialData, ModelKind};
use crate::output::{csv_table, fmt_csv, write_atomic};

/// Command failure with the process exit code it maps to
/// (2 = configuration, 3 = numerical failure or instability).
#[derive(Debug)]
pub struct CmdError {
    pub code: u8,
    pub message: String,
}

impl CmdError {
    fn config(msg: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: msg.into(),
        }
    }

    fn numerical(msg: impl Into<String>) -> Self {
        Self {
            code: 3,
            message: msg.into(),
        }
    }
}

impl From<sapi_core::Error> for CmdError {
    fn from(e: sapi_core::Error) -> Self {
        use sapi_core::Error::*;
        match e {
            NonPositive { .. } | Invalid(_) | IntegratorConfig(_) => CmdError::config(e.to_string()),
            ComplexEigenvalue { .. } | EigenSolver(_) | SizeGuard { .. } | NonFiniteField { .. }
            | SimulationAborted { .. } => CmdError::numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CmdError {
    fn from(e: std::io::Error) -> Self {
        CmdError::numerical(format!("i/o error: {e}"))
    }
}

type CmdResult = Result<(), CmdError>;

struct LinearSetup {
    model: ModelSystem,
    grid: Grid1D,
    profile: RelaxationProfile,
    op: SemiDiscreteOperator,
    lambda_max: f64,
}

fn build_linear(cfg: &ExperimentConfig) -> Result<LinearSetup, CmdError> {
    let model = cfg.build_model()?;
    if !model.is_constant() {
        return Err(CmdError::config(
            "this command needs a linear model (scalar, hme_linearized, or hsm)",
        ));
    }
    let grid = Grid1D::new(cfg.x_min, cfg.x_max, cfg.n_cells)?;
    let profile = RelaxationProfile::new(&grid, cfg.eps_left, cfg.eps_right, cfg.split_x)?;
    let vs = cfg.viscosity()?;
    let op = operator::assemble_semi_discrete(&model, &grid, &profile, &vs)?;
    let lambda_max = model::spectral_bound(&model, None)?.lambda_max;
    Ok(LinearSetup {
        model,
        grid,
        profile,
        op,
        lambda_max,
    })
}

/// Resolve the integrator parameters: explicit keys, or the closed-form
/// bounds when `integrator.auto` is set.
fn resolve_integrator(
    cfg: &ExperimentConfig,
    lambda_max: f64,
    dx: f64,
) -> Result<IntegratorConfig, CmdError> {
    if cfg.integrator_auto {
        let verdict = stability::select_params(
            cfg.integrator,
            cfg.scheme,
            lambda_max,
            dx,
            cfg.eps_left.min(cfg.eps_right),
            cfg.eps_left.max(cfg.eps_right),
            cfg.k,
        )?;
        if !verdict.stable {
            return Err(CmdError::numerical(format!(
                "no stable parameters for {}/{}: {}",
                cfg.integrator.name(),
                cfg.scheme.name(),
                verdict.reason
            )));
        }
        return Ok(verdict.config(cfg.integrator, lambda_max, dx, cfg.k)?);
    }

    let dt = match cfg.dt {
        Some(dt) => dt,
        None => cfg.cfl * dx / lambda_max,
    };
    let missing = |key: &str| CmdError::config(format!("integrator.{key} required (or set integrator.auto = true)"));
    let config = match cfg.integrator {
        IntegratorKind::Fe => IntegratorConfig::Fe { dt },
        IntegratorKind::Pfe => IntegratorConfig::Pfe {
            delta_t: cfg.delta_t.ok_or_else(|| missing("delta_t"))?,
            k: cfg.k,
            dt,
        },
        IntegratorKind::Afe => IntegratorConfig::Afe {
            delta_t: cfg.delta_t.ok_or_else(|| missing("delta_t"))?,
            dt,
        },
        IntegratorKind::Apfe => IntegratorConfig::Apfe {
            delta_t: cfg.delta_t.ok_or_else(|| missing("delta_t"))?,
            k: cfg.k,
            dt,
        },
        IntegratorKind::Appfe => IntegratorConfig::Appfe {
            delta_t_l: cfg
                .delta_t_left
                .or(cfg.delta_t)
                .ok_or_else(|| missing("delta_t_left"))?,
            k_l: cfg.k_left.unwrap_or(cfg.k),
            delta_t_r: cfg
                .delta_t_right
                .or(cfg.delta_t)
                .ok_or_else(|| missing("delta_t_right"))?,
            k_r: cfg.k_right.unwrap_or(cfg.k),
            dt,
        },
    };
    config.validate()?;
    Ok(config)
}

fn eig_csv(eigs: &[Complex64]) -> String {
    csv_table("re,im", eigs.iter().map(|z| vec![z.re, z.im]))
}

pub fn cmd_spectrum(cfg: &ExperimentConfig, out: &Path) -> CmdResult {
    let setup = build_linear(cfg)?;
    let eigs = spectral::numerical_spectrum(&setup.op)?;

    let a = setup.model.constant_matrix().unwrap().clone();
    let vs = cfg.viscosity()?;
    let q = pvm::viscosity_matrix(&vs, &a, setup.grid.dx(), setup.lambda_max)?;
    let clusters =
        spectral::clusters_theorem1(&a, &q, setup.grid.dx(), &setup.profile.distinct_eps())?;
    let report = spectral::containment_check(&eigs, &clusters, cfg.containment_tol);

    write_atomic(&out.join("eigenvalues.csv"), &eig_csv(&eigs))?;
    let disks: Vec<Vec<f64>> = report
        .clusters
        .all_disks()
        .map(|d| vec![d.center.re, d.center.im, d.radius])
        .collect();
    write_atomic(
        &out.join("clusters.csv"),
        &csv_table("center_re,center_im,radius", disks),
    )?;

    println!(
        "spectrum: {} eigenvalues, {} cluster disks, lambda_max = {}",
        report.eigenvalues.len(),
        report.clusters.n_disks(),
        fmt_csv(setup.lambda_max)
    );
    println!(
        "containment: {} (worst margin {})",
        if report.contained { "PASS" } else { "FAIL" },
        fmt_csv(report.worst_margin)
    );
    if !report.contained {
        return Err(CmdError::numerical(format!(
            "eigenvalues escape the cluster disks by {}",
            report.worst_margin
        )));
    }
    Ok(())
}

pub fn cmd_transition(cfg: &ExperimentConfig, out: &Path) -> CmdResult {
    let setup = build_linear(cfg)?;
    let integrator = resolve_integrator(cfg, setup.lambda_max, setup.grid.dx())?;

    let t: TransitionMatrix = match integrator {
        IntegratorConfig::Fe { dt } => transition::transition_fe(&setup.op, dt)?,
        IntegratorConfig::Pfe { delta_t, k, dt } => {
            transition::transition_pfe(&setup.op, delta_t, k, dt)?
        }
        _ => {
            let split = operator::split_blocks(&setup.op, setup.profile.split_index())?;
            transition::transition_for(&split, &integrator)?
        }
    };
    let radius = stability::spectral_radius(&t)?;
    let eigs = sapi_core::linalg::complex_eigenvalues(t.matrix());
    write_atomic(&out.join("transition_eigs.csv"), &eig_csv(&eigs))?;

    println!(
        "transition: {} with dt = {}, spectral radius = {}",
        integrator.name(),
        fmt_csv(integrator.macro_dt()),
        fmt_csv(radius)
    );
    if radius > 1.0 + 1e-9 {
        println!("warning: spectral radius exceeds 1, the configuration is unstable");
        return Err(CmdError::numerical(format!(
            "transition spectral radius {radius} > 1"
        )));
    }
    Ok(())
}

/// Deterministic xorshift for the stability-map sample jitter.
struct Jitter(u64);

impl Jitter {
    fn next_unit(&mut self) -> f64 {
        let mut x = self.0;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.0 = x;
        (x >> 11) as f64 / (1u64 << 53) as f64
    }
}

pub fn cmd_stability(cfg: &ExperimentConfig, out: &Path, samples: usize, seed: u64) -> CmdResult {
    let model = cfg.build_model()?;
    let grid = Grid1D::new(cfg.x_min, cfg.x_max, cfg.n_cells)?;
    let lambda_max = match model.constant_matrix() {
        Some(_) => model::spectral_bound(&model, None)?.lambda_max,
        None => {
            return Err(CmdError::config(
                "stability analysis needs a linear model",
            ))
        }
    };
    let eps_l = cfg.eps_left.min(cfg.eps_right);
    let eps_r = cfg.eps_left.max(cfg.eps_right);
    let verdict = stability::select_params(
        cfg.integrator,
        cfg.scheme,
        lambda_max,
        grid.dx(),
        eps_l,
        eps_r,
        cfg.k,
    )?;

    let mut text = String::new();
    text.push_str(&format!("integrator = {}\n", cfg.integrator.name()));
    text.push_str(&format!("scheme = {}\n", cfg.scheme.name()));
    text.push_str(&format!("lambda_max = {}\n", fmt_csv(lambda_max)));
    text.push_str(&format!("dx = {}\n", fmt_csv(grid.dx())));
    text.push_str(&format!("stable = {}\n", verdict.stable));
    if let Some(v) = verdict.cfl_bound {
        text.push_str(&format!("cfl_bound = {}\n", fmt_csv(v)));
    }
    if let Some(v) = verdict.delta_t {
        text.push_str(&format!("delta_t = {}\n", fmt_csv(v)));
    }
    if let Some(v) = verdict.delta_t_r {
        text.push_str(&format!("delta_t_r = {}\n", fmt_csv(v)));
    }
    if let Some(v) = verdict.k {
        text.push_str(&format!("k = {v}\n"));
    }
    text.push_str(&format!("reason = {}\n", verdict.reason));
    print!("{text}");
    write_atomic(&out.join("verdict.txt"), &text)?;

    if !verdict.stable {
        // an unstable verdict is a valid analysis result
        return Ok(());
    }

    let config = verdict.config(cfg.integrator, lambda_max, grid.dx(), cfg.k)?;
    let region = stability::stability_region(&config)?;
    let mut disk_rows: Vec<Vec<f64>> = Vec::new();
    let mut map_rows: Vec<Vec<f64>> = Vec::new();
    let mut jitter = Jitter(seed.max(1));
    for (family_id, family) in [ModeFamily::Global, ModeFamily::Left, ModeFamily::Right]
        .into_iter()
        .enumerate()
    {
        for disk in region.family(family) {
            disk_rows.push(vec![
                family_id as f64,
                disk.center.re,
                disk.center.im,
                disk.radius,
            ]);
            for s in 0..samples {
                let angle = 2.0 * std::f64::consts::PI
                    * ((s as f64 + jitter.next_unit()) / samples as f64);
                let lam = disk.center
                    + Complex64::new(angle.cos(), angle.sin()) * disk.radius;
                let sigma = stepping::amplification_factor(&config, lam)?.for_family(family);
                let stable = if sigma.norm() <= 1.0 + 1e-10 { 1.0 } else { 0.0 };
                map_rows.push(vec![lam.re, lam.im, stable]);
            }
        }
    }
    write_atomic(
        &out.join("regions.csv"),
        &csv_table("family,center_re,center_im,radius", disk_rows),
    )?;
    write_atomic(
        &out.join("stability_map.csv"),
        &csv_table("lambda_re,lambda_im,stable", map_rows),
    )?;
    Ok(())
}

fn initial_field(
    cfg: &ExperimentConfig,
    model: &ModelSystem,
    grid: &Grid1D,
) -> Result<DVector<f64>, CmdError> {
    let n = model.n_vars();
    match &cfg.initial {
        InitialData::Riemann {
            left,
            right,
            split_x,
        } => Ok(driver::riemann_field(grid, n, left, right, *split_x)?),
        InitialData::Uniform(state) => Ok(driver::riemann_field(grid, n, state, state, 0.0)?),
        InitialData::Equilibrium => {
            let state = match cfg.model_kind {
                ModelKind::HmeLinearized { rho, u, theta, .. } => {
                    let mut s = vec![0.0; n];
                    s[0] = rho;
                    s[1] = u;
                    s[2] = theta;
                    s
                }
                ModelKind::Hme { .. } => {
                    let mut s = vec![0.0; n];
                    s[0] = 1.0;
                    s[2] = 1.0;
                    s
                }
                _ => {
                    return Err(CmdError::config(
                        "initial.kind = equilibrium needs an HME model; give explicit states",
                    ))
                }
            };
            Ok(driver::riemann_field(grid, n, &state, &state, 0.0)?)
        }
    }
}

/// Largest wave speed over the cells of a field.
fn field_lambda_max(model: &ModelSystem, w: &DVector<f64>) -> Result<f64, CmdError> {
    if model.is_constant() {
        return Ok(model::spectral_bound(model, None)?.lambda_max);
    }
    let n = model.n_vars();
    let mut lam = 0.0f64;
    for i in 0..w.len() / n {
        let state = MomentState::new(w.as_slice()[i * n..(i + 1) * n].to_vec());
        let b = model::spectral_bound(model, Some(&state))?;
        lam = lam.max(b.lambda_max);
    }
    Ok(lam)
}

pub fn cmd_simulate(cfg: &ExperimentConfig, out: &Path) -> CmdResult {
    let model = cfg.build_model()?;
    let grid = Grid1D::new(cfg.x_min, cfg.x_max, cfg.n_cells)?;
    let profile = RelaxationProfile::new(&grid, cfg.eps_left, cfg.eps_right, cfg.split_x)?;
    let vs = cfg.viscosity()?;
    let w0 = initial_field(cfg, &model, &grid)?;
    let lambda_max = field_lambda_max(&model, &w0)?;
    let integrator = resolve_integrator(cfg, lambda_max, grid.dx())?;

    let mut snapshot_times = cfg.snapshots.clone();
    if snapshot_times.is_empty() {
        snapshot_times = vec![0.0, cfg.end_time];
    }
    let setup = SimulationSetup {
        model: &model,
        grid: &grid,
        profile: &profile,
        scheme: &vs,
        bc: cfg.boundary,
        integrator,
        end_time: cfg.end_time,
        snapshot_times,
        quad_points: cfg.quad_points,
    };
    let run = driver::run_simulation(&setup, w0)?;

    let is_hme = matches!(
        cfg.model_kind,
        ModelKind::Hme { .. } | ModelKind::HmeLinearized { .. }
    );
    let n = model.n_vars();
    for snap in &run.snapshots {
        let mut header: Vec<String> = vec!["x".into()];
        match cfg.model_kind {
            ModelKind::Scalar { .. } => header.push("w".into()),
            ModelKind::Hsm { .. } => (0..n).for_each(|i| header.push(format!("f{i}"))),
            _ => {
                header.extend(["rho".into(), "u".into(), "theta".into()]);
                (3..n).for_each(|i| header.push(format!("f{i}")));
                // postprocessing convention: p = rho theta, q = 3 f_3
                header.push("p".into());
                header.push("q".into());
            }
        }
        let rows = (0..grid.n_cells()).map(|i| {
            let mut row = vec![grid.center(i)];
            let cell = &snap.field.as_slice()[i * n..(i + 1) * n];
            row.extend_from_slice(cell);
            if is_hme {
                row.push(cell[0] * cell[2]);
                row.push(3.0 * cell[3]);
            }
            row
        });
        let name = format!("solution_t{:.6}.csv", snap.time);
        write_atomic(&out.join(name), &csv_table(&header.join(","), rows))?;
    }

    let mut info = String::new();
    info.push_str(&format!("steps_taken = {}\n", run.steps_taken));
    info.push_str(&format!("macro_dt = {}\n", fmt_csv(run.macro_dt)));
    info.push_str(&format!("end_time = {}\n", fmt_csv(cfg.end_time)));
    info.push_str(&format!("lambda_max = {}\n", fmt_csv(lambda_max)));
    info.push_str(&format!("integrator = {}\n", integrator.name()));
    write_atomic(&out.join("run_info.txt"), &info)?;

    let mut echo = cfg.clone();
    echo.dt = Some(integrator.macro_dt());
    write_atomic(&out.join("run_config.cfg"), &echo.to_flat_text())?;

    println!(
        "simulate: {} steps of dt = {} to t = {}; {} snapshots written",
        run.steps_taken,
        fmt_csv(run.macro_dt),
        fmt_csv(cfg.end_time),
        run.snapshots.len()
    );
    Ok(())
}

pub fn cmd_speedup(out: &Path) -> CmdResult {
    let table = speedup::table1();
    let mut csv = String::from("scheme,case_a,case_b,case_c\n");
    let mut pretty = String::from("case  | (A)    | (B)    | (C)\n");
    for (kind, row) in &table {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            kind.name(),
            fmt_csv(row[0]),
            fmt_csv(row[1]),
            fmt_csv(row[2])
        ));
        pretty.push_str(&format!(
            "{:5} | {:6.1} | {:6.1} | {:6.1}\n",
            kind.name(),
            row[0],
            row[1],
            row[2]
        ));
    }
    write_atomic(&out.join("table1.csv"), &csv)?;
    print!("{pretty}");
    let cases = reference_scenarios();
    println!(
        "scenarios: lambda_max = 6, dx = 1/50, K = 1; (A) eps = ({}, {}), theta = {}; (B) eps = ({}, {}), theta = {}; (C) eps = ({}, {}), theta = {}",
        cases[0].1.eps_l, cases[0].1.eps_r, cases[0].1.theta_frac,
        cases[1].1.eps_l, cases[1].1.eps_r, cases[1].1.theta_frac,
        cases[2].1.eps_l, cases[2].1.eps_r, cases[2].1.theta_frac,
    );
    let _ = IntegratorKind::ALL;
    Ok(())
}
