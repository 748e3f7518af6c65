//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

mod common;

use std::fs;
use std::process::ExitCode;
use std::time::Instant;

use gmcf::experiment::config::{parse_config, RunConfig};
use gmcf::experiment::run::{initial_state, run_case_with, RunOutcome};
use gmcf::field::{jacobian, Codim, MapField};
use gmcf::flow::{Flow, FlowState, StepperConfig};
use gmcf::geometry::PointGeometry;
use gmcf::grid::PeriodicGrid;
use gmcf::monitor::checks::lagrangian_constant;
use gmcf::monitor::identities::fuzz_identities;
use gmcf::monitor::trs_evolution_probe;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

struct Line {
    id: u32,
    title: &'static str,
    pass: bool,
    detail: String,
    secs: f64,
}

fn line(id: u32, title: &'static str, pass: bool, detail: String, start: Instant) -> Line {
    Line { id, title, pass, detail, secs: start.elapsed().as_secs_f64() }
}

fn print(l: &Line) {
    println!(
        "{} criterion {:>2} {}: {} ({:.1} s)",
        if l.pass { "PASS" } else { "FAIL" },
        l.id,
        l.title,
        l.detail,
        l.secs
    );
}

fn config(text: &str) -> RunConfig {
    parse_config(text).unwrap_or_else(|e| panic!("acceptance config rejected: {e}"))
}

fn verdict_passed(out: &RunOutcome, name: &str) -> bool {
    out.report.verdict(name).is_some_and(|v| v.passed)
}

fn describe_failures(out: &RunOutcome) -> String {
    let failed: Vec<String> = out.report.failed().map(|v| format!("{} ({:.3e} vs {:.3e})", v.check, v.worst_value, v.threshold)).collect();
    let mut s = String::new();
    if !failed.is_empty() {
        s.push_str(&format!("; failed verdicts: {}", failed.join(", ")));
    }
    if let Some(e) = &out.summary.monitor_error {
        s.push_str(&format!("; monitor error: {e}"));
    }
    if let Some(e) = &out.summary.blow_up {
        s.push_str(&format!("; blow-up: {e}"));
    }
    s
}

const THEOREM_RUN: &str = "grid.n1 = 128
grid.n2 = 128
map.affine = 0.6, 0, 0, 0.4
map.random_modes = 3
map.random_amplitude = 0.2
seed = 1
flow.t_end = 10
flow.snapshot_every = 1
checks.enabled = trS_min, H_decay, relation, pythagoras, li_li, gauss_bonnet, trS_evolution, soft_diffineq
";

const LAGRANGIAN_RUN: &str = "grid.n1 = 128
grid.n2 = 128
map.kind = potential
map.q = 0.3, 0.1, 0.1, 0.2
map.random_modes = 3
map.random_amplitude = 0.2
seed = 1
flow.t_end = 10
flow.snapshot_every = 1
checks.enabled = A_decay_lagrangian, lagrangian_residual, h_symmetry, gauss_bonnet, pythagoras
";

const CODIM1_RUN: &str = "grid.n1 = 128
grid.n2 = 128
map.codim = 1
map.affine = 0, 0
map.fourier = 1,0,sin,0.7; 0,1,sin,0.7
flow.t_end = 10
flow.snapshot_every = 1
checks.enabled = codim1
";

fn affine_stationarity() -> Line {
    let start = Instant::now();
    let grid = PeriodicGrid::square_2pi(128).unwrap();
    let flow = Flow::new(grid);
    let field = MapField::affine(grid, Codim::Two, [[0.7, 0.0], [0.0, 0.5]], [0.0; 2]).unwrap();
    let cfg = StepperConfig { cfl: 0.5, t_end: 1.0, max_steps: u64::MAX, snapshot_every: 1.0 };
    let traj = flow.evolve(FlowState::new(field), &cfg, &mut []).unwrap();
    let sup = traj.final_state.field.sup_perturbation();
    let secs = start.elapsed().as_secs_f64();
    let pass = traj.blow_up.is_none() && traj.final_state.t == 1.0 && sup <= 1e-11 && secs < 30.0;
    line(1, "affine stationarity", pass, format!("sup|u|(t=1) = {sup:.3e} after {} steps", traj.final_state.step_count), start)
}

/// Criteria 2, 3, 4 from one run; its outcome is reused for criteria 8 and 9.
fn theorem_one(lines: &mut Vec<Line>) -> Option<RunOutcome> {
    let start = Instant::now();
    let out = match run_case_with(&config(THEOREM_RUN), false) {
        Ok(o) => o,
        Err(e) => {
            for (id, title) in [(2, "t|H|^2 bound"), (3, "inf TrS preserved"), (4, "decay at t = 10")] {
                lines.push(line(id, title, false, format!("run failed at setup: {e}"), start));
            }
            return None;
        }
    };
    let secs = start.elapsed().as_secs_f64();
    let alpha = out.summary.alpha.unwrap_or(f64::NAN);
    let rows = &out.report.rows;
    let finished = out.summary.blow_up.is_none() && out.summary.t_final == 10.0;
    let extra = describe_failures(&out);

    let bound = 2.0 / alpha * 1.02;
    let worst = rows.iter().map(|r| r.t * r.sup_h2).fold(0.0, f64::max);
    let pass2 = finished && alpha >= 0.3 && verdict_passed(&out, "H_decay") && worst <= bound && secs < 300.0;
    lines.push(Line {
        id: 2,
        title: "t|H|^2 bound",
        pass: pass2,
        detail: format!("alpha = {alpha:.4}, max t sup|H|^2 = {worst:.4e} <= {bound:.4e}, {} steps{extra}", out.summary.steps),
        secs,
    });

    let first = rows.first().and_then(|r| r.inf_trs).unwrap_or(f64::NAN);
    let last = rows.last().and_then(|r| r.inf_trs).unwrap_or(f64::NAN);
    let step_v = out.report.verdict("trS_min");
    let pass3 = finished && step_v.is_some_and(|v| v.passed) && last >= alpha;
    lines.push(Line {
        id: 3,
        title: "inf TrS preserved",
        pass: pass3,
        detail: format!(
            "inf TrS {first:.6} -> {last:.6}, per-step check {} ({} comparisons)",
            step_v.map_or("missing", |v| if v.passed { "passed" } else { "failed" }),
            step_v.map_or(0, |v| v.evaluations)
        ),
        secs: 0.0,
    });

    let end = rows.last();
    let h_end = end.map_or(f64::NAN, |r| r.sup_h2);
    let a_end = end.map_or(f64::NAN, |r| r.sup_a2);
    let a_start = rows.first().map_or(f64::NAN, |r| r.sup_a2);
    let h_bound = 2.0 / (10.0 * alpha) * 1.02;
    let pass4 = finished && end.is_some_and(|r| r.t == 10.0) && h_end <= h_bound && a_end <= a_start;
    lines.push(Line {
        id: 4,
        title: "decay at t = 10",
        pass: pass4,
        detail: format!("sup|H|^2 = {h_end:.4e} <= {h_bound:.4e}; sup|A|^2 {a_start:.4e} -> {a_end:.4e}"),
        secs: 0.0,
    });
    Some(out)
}

fn theorem_two() -> (Line, Option<RunOutcome>) {
    let start = Instant::now();
    let out = match run_case_with(&config(LAGRANGIAN_RUN), false) {
        Ok(o) => o,
        Err(e) => return (line(5, "Lagrangian t|A|^2 bound", false, format!("run failed at setup: {e}"), start), None),
    };
    let secs = start.elapsed().as_secs_f64();
    let alpha = out.summary.alpha.unwrap_or(f64::NAN);
    let rows = &out.report.rows;
    let lag = rows.iter().filter_map(|r| r.lagrangian_resid).fold(0.0, f64::max);
    let c_alpha = lagrangian_constant(alpha);
    let worst = rows.iter().map(|r| r.t * r.sup_a2).fold(0.0, f64::max);
    let sym = out.report.verdict("h_symmetry").map_or(f64::NAN, |v| v.worst_value);
    let finished = out.summary.blow_up.is_none() && out.summary.monitor_error.is_none() && out.summary.t_final == 10.0;
    let pass = finished
        && alpha >= 0.5
        && lag <= 1e-8
        && verdict_passed(&out, "lagrangian_residual")
        && verdict_passed(&out, "A_decay_lagrangian")
        && worst <= c_alpha
        && verdict_passed(&out, "h_symmetry")
        && sym <= 1e-8
        && secs < 300.0;
    let detail = format!(
        "alpha = {alpha:.4}, max lagrangian residual {lag:.3e}, max t sup|A|^2 = {worst:.4e} <= C_alpha = {c_alpha:.4e}, h-symmetry {sym:.3e}{}",
        describe_failures(&out)
    );
    (Line { id: 5, title: "Lagrangian t|A|^2 bound", pass, detail, secs }, Some(out))
}

fn codim_one() -> Line {
    let start = Instant::now();
    let out = match run_case_with(&config(CODIM1_RUN), false) {
        Ok(o) => o,
        Err(e) => return line(6, "codimension-one decay", false, format!("run failed at setup: {e}"), start),
    };
    let v0 = out.summary.v0.unwrap_or(f64::NAN);
    let pass = out.summary.blow_up.is_none()
        && out.summary.t_final == 10.0
        && (v0 * v0 - 2.0).abs() < 0.05
        && ["codim1_sup_v", "codim1_tA2", "codim1_tA2v2"].iter().all(|n| verdict_passed(&out, n));
    let worst = |n: &str| out.report.verdict(n).map_or(f64::NAN, |v| v.worst_value);
    let detail = format!(
        "v0^2 = {:.4}, sup t|A|^2 = {:.4e}, sup (t|A|^2+1)v^2 = {:.4e}, bound {:.4e}{}",
        v0 * v0,
        worst("codim1_tA2"),
        worst("codim1_tA2v2"),
        v0 * v0 * 1.02,
        describe_failures(&out)
    );
    line(6, "codimension-one decay", pass, detail, start)
}

fn identity_fuzz() -> Line {
    let start = Instant::now();
    let rep = fuzz_identities(1_000_000, 20_240_601);
    let secs = start.elapsed().as_secs_f64();
    let pass = rep.relation_ok(1e-10) && rep.pythagoras_ok(1e-13) && rep.li_li_ok() && secs < 60.0;
    let detail = format!(
        "{} samples: relation {:.3e}, pythagoras {:.3e}, Li-Li max ratio {:.6} ({} violations)",
        rep.samples, rep.relation_max_relative, rep.pythagoras_max, rep.li_li_max_ratio, rep.li_li_violations
    );
    line(7, "algebraic identities", pass, detail, start)
}

fn gauss_formula(runs: &[Option<&RunOutcome>]) -> Line {
    let start = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, run) in ["theorem run", "Lagrangian run"].iter().zip(runs) {
        match run.and_then(|o| o.report.verdict("gauss_bonnet").map(|v| (v, o.report.rows.len()))) {
            Some((v, n)) => {
                pass &= v.passed && v.evaluations == n as u64;
                parts.push(format!("{name}: worst {:.3e} vs {:.3e} over {} snapshots", v.worst_value, v.threshold, v.evaluations));
            }
            None => {
                pass = false;
                parts.push(format!("{name}: unavailable"));
            }
        }
    }
    line(8, "integral |A|^2 = integral |H|^2", pass, parts.join("; "), start)
}

fn evolution_oracle() -> Line {
    let start = Instant::now();
    let cfg = config(THEOREM_RUN);
    let flow = Flow::new(cfg.grid);
    let result = (|| -> gmcf::Result<(f64, f64, f64, f64)> {
        let (state, _) = initial_state(&cfg, &flow)?;
        let dt = flow.stable_dt(&state.field, 0.5);
        let r1 = trs_evolution_probe(&flow, &state, dt, true)?;
        let r2 = trs_evolution_probe(&flow, &state, dt / 2.0, true)?;
        let ablated = trs_evolution_probe(&flow, &state, dt, false)?;
        Ok((dt, r1, r2, ablated))
    })();
    match result {
        Ok((dt, r1, r2, ablated)) => {
            let ratio = r1 / r2;
            let inflation = ablated / r1;
            let pass = (ratio - 2.0).abs() <= 0.4 && inflation >= 10.0;
            let detail = format!(
                "dt = {dt:.3e}: residual {r1:.3e} -> {r2:.3e} (ratio {ratio:.3}), without tangential correction {ablated:.3e} ({inflation:.1}x)"
            );
            line(9, "TrS evolution equation", pass, detail, start)
        }
        Err(e) => line(9, "TrS evolution equation", false, format!("probe failed: {e}"), start),
    }
}

fn second_fundamental_form_oracle() -> Line {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for codim in [Codim::Two, Codim::One] {
        for _ in 0..10_000 {
            let (df, d2f) = common::random_point(&mut rng, codim);
            let p = PointGeometry::compute(&df, &d2f, codim);
            let o = common::gram_schmidt_oracle(&df, &d2f, codim);
            worst = worst.max((p.norm_a2 - o.norm_a2).abs()).max((p.norm_h2 - o.norm_h2).abs());
            count += 1;
        }
    }
    line(10, "second fundamental form oracle", worst <= 1e-10, format!("{count} points, max |A|^2/|H|^2 difference {worst:.3e}"), start)
}

fn convergence_orders() -> Line {
    let start = Instant::now();
    // temporal: small-amplitude data, RK4 at dt, dt/2, dt/4 to a fixed time
    let grid = PeriodicGrid::square_2pi(32).unwrap();
    let flow = Flow::new(grid);
    let eps = 1e-3;
    let u1 = grid.sample(|x, y| eps * ((x + y).sin() + (2.0 * x - y).cos()));
    let u2 = grid.sample(|x, y| eps * (x - 2.0 * y).sin());
    let field = MapField::new(grid, Codim::Two, [[0.0; 2]; 2], [0.0; 2], vec![u1, u2]).unwrap();
    let t_end = 0.5;
    let base = (t_end / flow.stable_dt(&field, 0.5)).ceil() as usize;
    let solve = |steps: usize| -> Vec<Vec<f64>> {
        let dt = t_end / steps as f64;
        let mut s = FlowState::new(field.clone());
        for _ in 0..steps {
            s = flow.step(&s, dt).expect("small data stay finite");
        }
        s.field.perturbation().to_vec()
    };
    let sols: Vec<_> = [base, 2 * base, 4 * base].into_iter().map(solve).collect();
    let diff = |a: &[Vec<f64>], b: &[Vec<f64>]| {
        a.iter().zip(b).flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).abs())).fold(0.0, f64::max)
    };
    let order = (diff(&sols[0], &sols[1]) / diff(&sols[1], &sols[2])).log2();

    // spatial: band-limited data, spectral derivatives against exact ones
    let spatial = |n: usize| {
        let grid = PeriodicGrid::square_2pi(n).unwrap();
        let sp = gmcf::Spectral::new(grid);
        let f = |x: f64, y: f64| 0.2 * (3.0 * x - 2.0 * y).sin() + 0.1 * (4.0 * y).cos();
        let fx = |x: f64, y: f64| 0.6 * (3.0 * x - 2.0 * y).cos();
        let fy = |x: f64, y: f64| -0.4 * (3.0 * x - 2.0 * y).cos() - 0.4 * (4.0 * y).sin();
        let fxy = |x: f64, y: f64| 1.2 * (3.0 * x - 2.0 * y).sin();
        let g = |x: f64, y: f64| 0.15 * (x + 4.0 * y).cos();
        let field = MapField::new(grid, Codim::Two, [[0.5, 0.0], [0.0, 0.5]], [0.0; 2], vec![grid.sample(f), grid.sample(g)]).unwrap();
        let jac = jacobian(&sp, &field).unwrap();
        let mut err: f64 = 0.0;
        for p in 0..grid.len() {
            let (i, j) = grid.point(p);
            let [x, y] = grid.coords(i, j);
            err = err
                .max((jac.df[p][0][0] - 0.5 - fx(x, y)).abs())
                .max((jac.df[p][0][1] - fy(x, y)).abs())
                .max((jac.d2f[p][0][0][1] - fxy(x, y)).abs())
                .max((jac.df[p][1][1] - 0.5 + 0.6 * (x + 4.0 * y).sin()).abs());
        }
        err
    };
    let s64 = spatial(64);
    let pass = order >= 3.9 && s64 <= 1e-12;
    line(11, "convergence orders", pass, format!("RK4 order {order:.3}; spectral derivative error at N = 64: {s64:.3e}"), start)
}

fn determinism() -> Line {
    let start = Instant::now();
    let cases = [
        "grid.n1 = 32\ngrid.n2 = 32\nmap.affine = 0.6, 0, 0, 0.4\nmap.random_modes = 3\nmap.random_amplitude = 0.2\nseed = 9\nflow.t_end = 0.3\noutput.formats = csv, snapshot\n",
        "grid.n1 = 32\ngrid.n2 = 32\nmap.kind = potential\nmap.q = 0.3, 0.1, 0.1, 0.2\nmap.random_modes = 3\nmap.random_amplitude = 0.2\nseed = 9\nflow.t_end = 0.3\noutput.formats = csv, snapshot\n",
        "grid.n1 = 32\ngrid.n2 = 32\nmap.codim = 1\nmap.fourier = 1,0,sin,0.7; 0,1,sin,0.7\nflow.t_end = 0.3\noutput.formats = csv, snapshot\n",
    ];
    let dir = tempfile::tempdir().expect("temporary directory");
    let mut identical = true;
    let mut compared = 0;
    for (k, text) in cases.iter().enumerate() {
        let mut outputs = Vec::new();
        for rep in 0..2 {
            let mut cfg = config(text);
            cfg.output.dir = dir.path().join(format!("case{k}_{rep}"));
            match run_case_with(&cfg, true) {
                Ok(_) => {}
                Err(e) => return line(12, "determinism", false, format!("case {k} failed: {e}"), start),
            }
            let csv = fs::read(cfg.output.dir.join("timeseries.csv")).unwrap_or_default();
            let snap = fs::read(cfg.output.dir.join("final.bin")).unwrap_or_default();
            outputs.push((csv, snap));
        }
        identical &= !outputs[0].0.is_empty() && outputs[0] == outputs[1];
        compared += 1;
    }
    line(12, "determinism", identical, format!("{compared} configurations run twice, CSV and final snapshot compared byte for byte"), start)
}

fn main() -> ExitCode {
    let total = Instant::now();
    let mut lines = Vec::new();
    let emit = |l: Line, lines: &mut Vec<Line>| {
        print(&l);
        lines.push(l);
    };
    emit(affine_stationarity(), &mut lines);
    let mut batch = Vec::new();
    let theorem = theorem_one(&mut batch);
    for l in batch {
        emit(l, &mut lines);
    }
    let (l5, lagrangian) = theorem_two();
    emit(l5, &mut lines);
    emit(codim_one(), &mut lines);
    emit(identity_fuzz(), &mut lines);
    emit(gauss_formula(&[theorem.as_ref(), lagrangian.as_ref()]), &mut lines);
    emit(evolution_oracle(), &mut lines);
    emit(second_fundamental_form_oracle(), &mut lines);
    emit(convergence_orders(), &mut lines);
    emit(determinism(), &mut lines);

    let failed: Vec<u32> = lines.iter().filter(|l| !l.pass).map(|l| l.id).collect();
    println!("acceptance: {} of {} criteria passed in {:.1} s", lines.len() - failed.len(), lines.len(), total.elapsed().as_secs_f64());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed criteria: {failed:?}");
        ExitCode::FAILURE
    }
}
