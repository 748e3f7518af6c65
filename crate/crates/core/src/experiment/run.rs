//! End-to-end runs: initial data, flow, monitors and output files.

use std::fs;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{normalize_to_area_decreasing, synthesize, Codim, FourierTerm, MapField, Wave};
use crate::flow::{Flow, FlowState, Observation, StepperConfig};
use crate::geometry::GeometrySnapshot;
use crate::lagrangian::{from_potential, require_square};
use crate::monitor::{checks, Check, Monitor, MonitorConfig, MonitorReport};

use super::config::{MapSpec, RandomSpec, RunConfig};
use super::io::{load_snapshot, write_atomic, write_snapshot, write_timeseries};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_BLOW_UP: i32 = 3;

/// Seeded Fourier terms over `max(|k1|, |k2|) <= modes`, one per half-plane
/// mode and wave kind, with amplitudes `amplitude * U(-1, 1) / |k|^decay`.
pub fn random_terms(rng: &mut ChaCha8Rng, spec: RandomSpec, components: usize, decay: f64) -> Vec<FourierTerm> {
    let k = spec.modes as i32;
    let mut out = Vec::new();
    for k1 in 0..=k {
        for k2 in -k..=k {
            if k1 == 0 && k2 <= 0 {
                continue;
            }
            let norm = ((k1 * k1 + k2 * k2) as f64).powf(0.5 * decay);
            for kind in [Wave::Cos, Wave::Sin] {
                let amp = (0..components).map(|_| spec.amplitude * rng.gen_range(-1.0..1.0) / norm).collect();
                out.push(FourierTerm { k1, k2, kind, amp });
            }
        }
    }
    out
}

/// Initial state and the target rescaling factor `c` applied to it.
pub fn initial_state(cfg: &RunConfig, flow: &Flow) -> Result<(FlowState, f64)> {
    let grid = cfg.grid;
    let sp = flow.spectral();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let margin = cfg.checks.alpha_margin;
    let (field, c, t0, steps) = match &cfg.map {
        MapSpec::Fourier { affine, offset, terms, random } => {
            let m = cfg.codim.dim();
            let mut pert = synthesize(&grid, m, terms);
            let generated = random.map(|r| random_terms(&mut rng, r, m, 2.0));
            if let Some(extra) = &generated {
                for (u, v) in pert.iter_mut().zip(synthesize(&grid, m, extra)) {
                    u.iter_mut().zip(v).for_each(|(a, b)| *a += b);
                }
            }
            let field = MapField::new(grid, cfg.codim, *affine, *offset, pert)?;
            if generated.is_some() && cfg.codim == Codim::Two {
                let (f, c) = normalize_to_area_decreasing(sp, &field, margin)?;
                (f, c, 0.0, 0)
            } else {
                (field, 1.0, 0.0, 0)
            }
        }
        MapSpec::Potential { q, terms, random } => {
            require_square(&grid)?;
            let mut all = terms.clone();
            if let Some(r) = random {
                all.extend(random_terms(&mut rng, *r, 1, 3.0));
            }
            let phi = synthesize(&grid, 1, &all).remove(0);
            let field = from_potential(sp, *q, &phi)?;
            if random.is_some() {
                let (f, c) = normalize_to_area_decreasing(sp, &field, margin)?;
                (f, c, 0.0, 0)
            } else {
                (field, 1.0, 0.0, 0)
            }
        }
        MapSpec::Snapshot { path } => {
            let state = load_snapshot(path)?;
            if *state.field.grid() != grid || state.field.codim() != cfg.codim {
                return Err(Error::InvalidInput(format!(
                    "snapshot {} does not match the configured grid and codimension",
                    path.display()
                )));
            }
            (state.field, 1.0, state.t, state.step_count)
        }
    };
    Ok((FlowState { t: t0, field, step_count: steps, last_dt: 0.0 }, c))
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub codim: usize,
    pub grid: [usize; 2],
    pub lengths: [f64; 2],
    pub seed: u64,
    pub rescale: f64,
    pub alpha: Option<f64>,
    pub v0: Option<f64>,
    pub t_start: f64,
    pub t_final: f64,
    pub steps: u64,
    pub snapshots: usize,
    pub blow_up: Option<String>,
    pub monitor_error: Option<String>,
    pub passed: bool,
    pub exit_code: i32,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunOutcome {
    pub summary: RunSummary,
    pub report: MonitorReport,
    #[serde(skip)]
    pub final_state: Option<FlowState>,
    #[serde(skip)]
    pub artifacts: Vec<PathBuf>,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        self.summary.exit_code
    }
}

/// Runs a configuration and writes its outputs.
///
/// Configuration-stage problems (including data that are not area
/// decreasing while an `alpha`-dependent check is enabled) are returned as
/// errors and map to exit code 2.
pub fn run_case(cfg: &RunConfig) -> Result<RunOutcome> {
    run_case_with(cfg, true)
}

/// As [`run_case`]; `write = false` keeps everything in memory.
pub fn run_case_with(cfg: &RunConfig, write: bool) -> Result<RunOutcome> {
    let flow = Flow::new(cfg.grid);
    let (initial, rescale) = initial_state(cfg, &flow)?;
    let lagrangian = cfg.map.is_lagrangian();
    let snap0 = GeometrySnapshot::compute(flow.spectral(), &initial.field)?;
    let needs_alpha = [Check::TrsMin, Check::HDecay, Check::ADecayLagrangian].iter().any(|c| cfg.checks.enabled.contains(c));
    let alpha = match checks::alpha0(&snap0) {
        Ok(a) => Some(a),
        Err(e) if needs_alpha => return Err(e),
        Err(_) => None,
    };
    let v0 = snap0.sup_v();
    let mcfg = MonitorConfig {
        alpha: alpha.unwrap_or(f64::NAN),
        v0: v0.unwrap_or(1.0),
        rel_tol: cfg.checks.rel_tol,
        id_tol: cfg.checks.id_tol,
        ..MonitorConfig::default()
    };
    let mut monitor = Monitor::new(mcfg, cfg.checks.enabled.clone(), cfg.codim, lagrangian)?;
    let stepper = StepperConfig {
        cfl: cfg.flow.cfl,
        t_end: cfg.flow.t_end,
        max_steps: cfg.flow.max_steps,
        snapshot_every: cfg.flow.snapshot_every,
    };
    stepper.validate()?;
    if initial.t >= stepper.t_end {
        return Err(Error::InvalidInput(format!(
            "initial time {} is not before flow.t_end = {}",
            initial.t, stepper.t_end
        )));
    }

    let out_dir = cfg.output.dir.clone();
    let mut artifacts = Vec::new();
    if write {
        fs::create_dir_all(&out_dir)?;
    }
    let snap_dir = out_dir.join("snapshots");
    if write && cfg.output.snapshots {
        fs::create_dir_all(&snap_dir)?;
    }
    let mut snap_err: Option<Error> = None;
    let mut snap_files = Vec::new();
    let t_start = initial.t;
    let trajectory = {
        let mut count = 0usize;
        let mut obs_monitor = |o: &Observation<'_>| monitor.observe(&flow, o);
        let mut obs_writer = |o: &Observation<'_>| {
            if !(write && cfg.output.snapshots) || snap_err.is_some() {
                return;
            }
            match write_snapshot(o.state, &snap_dir.join(format!("snap_{count:05}"))) {
                Ok((bin, json)) => {
                    snap_files.push(bin);
                    snap_files.push(json);
                }
                Err(e) => snap_err = Some(e),
            }
            count += 1;
        };
        flow.evolve(initial, &stepper, &mut [&mut obs_monitor, &mut obs_writer])?
    };
    if let Some(e) = snap_err {
        return Err(e);
    }
    artifacts.extend(snap_files);
    monitor.observe_steps(&trajectory.steps);
    let monitor_error = monitor.error().map(ToString::to_string);
    let report = monitor.finish();

    let exit_code = if trajectory.blow_up.is_some() {
        EXIT_BLOW_UP
    } else if monitor_error.is_some() || !report.passed() {
        EXIT_CHECK_FAILED
    } else {
        EXIT_PASS
    };
    let summary = RunSummary {
        codim: cfg.codim.dim(),
        grid: [cfg.grid.n1(), cfg.grid.n2()],
        lengths: [cfg.grid.l1(), cfg.grid.l2()],
        seed: cfg.seed,
        rescale,
        alpha,
        v0,
        t_start,
        t_final: trajectory.final_state.t,
        steps: trajectory.final_state.step_count,
        snapshots: trajectory.snapshots,
        blow_up: trajectory.blow_up.as_ref().map(ToString::to_string),
        monitor_error,
        passed: exit_code == EXIT_PASS,
        exit_code,
    };
    let mut outcome = RunOutcome { summary, report, final_state: Some(trajectory.final_state), artifacts };
    if write {
        if cfg.output.csv && !outcome.report.rows.is_empty() {
            let path = out_dir.join("timeseries.csv");
            write_timeseries(&outcome.report.rows, &path)?;
            outcome.artifacts.push(path);
        }
        if cfg.output.json {
            let path = out_dir.join("report.json");
            let json = serde_json::json!({
                "summary": &outcome.summary,
                "monitor": &outcome.report.config,
                "verdicts": &outcome.report.verdicts,
            });
            write_atomic(&path, serde_json::to_string_pretty(&json)?.as_bytes())?;
            outcome.artifacts.push(path);
        }
        if let Some(state) = &outcome.final_state {
            if cfg.output.snapshots {
                let (bin, json) = write_snapshot(state, &out_dir.join("final"))?;
                outcome.artifacts.push(bin);
                outcome.artifacts.push(json);
            }
        }
    }
    Ok(outcome)
}

/// One line per verdict, `PASS`/`FAIL` first.
pub fn verdict_lines(report: &MonitorReport) -> Vec<String> {
    report
        .verdicts
        .iter()
        .map(|v| {
            let when = v.worst_time.map(|t| format!(" t={t}")).unwrap_or_default();
            let at = v.worst_point.map(|(i, j)| format!(" at ({i},{j})")).unwrap_or_default();
            format!(
                "{} {:<28} worst={:.6e} threshold={:.6e}{when}{at}  [{}]",
                if v.passed { "PASS" } else { "FAIL" },
                v.check,
                v.worst_value,
                v.threshold,
                v.reference
            )
        })
        .collect()
}
