//! Resolution and time-step sweeps of one configuration.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::flow::Flow;
use crate::geometry::GeometrySnapshot;
use crate::grid::PeriodicGrid;
use crate::monitor::{checks, trs_evolution_probe};

use super::config::{MapSpec, RunConfig};
use super::run::{initial_state, run_case_with};

#[derive(Debug, Clone, Serialize)]
pub struct SweepLevel {
    pub n: usize,
    pub exit_code: i32,
    pub t_final: f64,
    pub steps: u64,
    pub sup_h2: f64,
    pub sup_a2: f64,
    pub relation: Option<f64>,
    pub pythagoras: Option<f64>,
    pub gauss_bonnet: Option<f64>,
    pub lagrangian: Option<f64>,
    /// Relative gap between the frame and spectral gradients of `tr S`.
    pub gradient_gap: Option<f64>,
    /// `|sup |H|^2 - sup |H|^2 at the finest level|`.
    pub sup_h2_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub levels: Vec<SweepLevel>,
    /// Observed orders `log2(e_k / e_{k+1})` of `sup_h2_error` between successive
    /// levels, omitted when the finer error is at round-off.
    pub sup_h2_orders: Vec<Option<f64>>,
    /// Time steps and `tr S` evolution residuals at the finest level, halving `dt`.
    pub dt_levels: Vec<(f64, f64)>,
    pub dt_orders: Vec<f64>,
}

fn order(coarse: f64, fine: f64) -> Option<f64> {
    (fine > 1e-13 && coarse > 0.0).then(|| (coarse / fine).log2())
}

/// Runs `cfg` on square `n x n` grids (same lengths), with file output off.
pub fn resolution_sweep(cfg: &RunConfig, resolutions: &[usize]) -> Result<SweepReport> {
    if matches!(cfg.map, MapSpec::Snapshot { .. }) {
        return Err(Error::InvalidInput("snapshot data cannot be resampled for a sweep".into()));
    }
    let mut sorted = resolutions.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() < 3 {
        return Err(Error::InvalidInput("a sweep needs at least three distinct resolutions".into()));
    }

    let mut levels = Vec::new();
    let mut finest_flow = None;
    for &n in &sorted {
        let mut c = cfg.clone();
        c.grid = PeriodicGrid::new(n, n, cfg.grid.l1(), cfg.grid.l2())?;
        let out = run_case_with(&c, false)?;
        let last = out.report.rows.last().cloned();
        let flow = Flow::new(c.grid);
        let gap = match &out.final_state {
            Some(state) if c.codim == crate::field::Codim::Two => {
                let snap = GeometrySnapshot::compute(flow.spectral(), &state.field)?;
                let (stats, _) = checks::check_relation(flow.spectral(), state.t, &snap, c.checks.id_tol, 1.0);
                Some(stats.gradient_gap)
            }
            _ => None,
        };
        levels.push(SweepLevel {
            n,
            exit_code: out.exit_code(),
            t_final: out.summary.t_final,
            steps: out.summary.steps,
            sup_h2: last.as_ref().map_or(f64::NAN, |r| r.sup_h2),
            sup_a2: last.as_ref().map_or(f64::NAN, |r| r.sup_a2),
            relation: last.as_ref().and_then(|r| r.relation_resid),
            pythagoras: last.as_ref().and_then(|r| r.pythagoras_resid),
            gauss_bonnet: last.as_ref().and_then(|r| r.gauss_bonnet_resid),
            lagrangian: last.as_ref().and_then(|r| r.lagrangian_resid),
            gradient_gap: gap,
            sup_h2_error: 0.0,
        });
        finest_flow = Some((c, flow));
    }
    let finest = levels.last().map_or(f64::NAN, |l| l.sup_h2);
    for l in &mut levels {
        l.sup_h2_error = (l.sup_h2 - finest).abs();
    }
    let sup_h2_orders = levels[..levels.len() - 1]
        .windows(2)
        .map(|w| order(w[0].sup_h2_error, w[1].sup_h2_error))
        .collect();

    let (c, flow) = finest_flow.expect("at least three levels");
    let (state, _) = initial_state(&c, &flow)?;
    let dt0 = flow.stable_dt(&state.field, c.flow.cfl);
    let mut dt_levels = Vec::new();
    for k in 0..3 {
        let dt = dt0 / f64::from(1 << k);
        dt_levels.push((dt, trs_evolution_probe(&flow, &state, dt, true)?));
    }
    let dt_orders = dt_levels.windows(2).map(|w| (w[0].1 / w[1].1).log2()).collect();
    Ok(SweepReport { levels, sup_h2_orders, dt_levels, dt_orders })
}

impl SweepReport {
    pub fn table(&self) -> String {
        let cell = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.3e}"));
        let mut out = format!(
            "{:>5} {:>4} {:>11} {:>11} {:>11} {:>11} {:>11} {:>11} {:>11}\n",
            "n", "exit", "sup_H2", "H2_err", "relation", "pythagoras", "gauss", "lagrangian", "grad_gap"
        );
        for l in &self.levels {
            out.push_str(&format!(
                "{:>5} {:>4} {:>11.4e} {:>11} {:>11} {:>11} {:>11} {:>11} {:>11}\n",
                l.n,
                l.exit_code,
                l.sup_h2,
                cell(Some(l.sup_h2_error)),
                cell(l.relation),
                cell(l.pythagoras),
                cell(l.gauss_bonnet),
                cell(l.lagrangian),
                cell(l.gradient_gap)
            ));
        }
        let orders: Vec<String> = self.sup_h2_orders.iter().map(|o| o.map_or("-".into(), |x| format!("{x:.2}"))).collect();
        out.push_str(&format!("sup_H2 orders: {}\n", orders.join(", ")));
        for (dt, r) in &self.dt_levels {
            out.push_str(&format!("dt={dt:.4e} trS evolution residual={r:.4e}\n"));
        }
        let orders: Vec<String> = self.dt_orders.iter().map(|x| format!("{x:.2}")).collect();
        out.push_str(&format!("dt orders: {}\n", orders.join(", ")));
        out
    }
}
