//! Numerical monitors for bounds, preserved quantities and identities along a flow.

pub mod checks;
pub mod identities;
mod verdict;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::Codim;
use crate::flow::{Flow, FlowState, Observation, StepRecord};
use crate::geometry::GeometrySnapshot;
use crate::lagrangian::{lagrangian_residual, lagrangian_snapshot};

pub use verdict::{Bound, Verdict};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonitorConfig {
    /// `inf Tr(S)` on the initial surface.
    pub alpha: f64,
    /// Codimension one: `sup v` on the initial surface.
    pub v0: f64,
    pub delta: f64,
    pub epsilon: f64,
    /// Relative slack for bound checks.
    pub rel_tol: f64,
    /// Tolerance for identity residuals.
    pub id_tol: f64,
    /// Allowed per-step growth of `sup v`.
    pub step_tol: f64,
    /// Allowed per-step relative drop of `inf Tr(S)`.
    pub trs_step_rel: f64,
    /// `Tr(S)` evolution tolerance is `evolution_per_dt * dt * (1 + sup|A|^2)^2 + evolution_floor`.
    pub evolution_per_dt: f64,
    pub evolution_floor: f64,
    /// Relative tolerance of the frame/spectral `|grad Tr S|^2` comparison.
    pub crosscheck_tol: f64,
    /// Absolute slack added to the soft differential-inequality checks.
    pub soft_slack: f64,
    /// Relative tolerance of `int |H|^2 = int |A|^2`.
    pub gauss_tol: f64,
}

impl Default for MonitorConfig {
    fn default() -> Self {
        Self {
            alpha: 2.0,
            v0: 1.0,
            delta: 1.0,
            epsilon: 1.0,
            rel_tol: 0.02,
            id_tol: 1e-8,
            step_tol: 1e-6,
            trs_step_rel: 1e-4,
            evolution_per_dt: 100.0,
            evolution_floor: 1e-8,
            crosscheck_tol: 1e-6,
            soft_slack: 1e-8,
            gauss_tol: 1e-6,
        }
    }
}

impl MonitorConfig {
    pub fn validate(&self, codim: Codim) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInput(m));
        // NaN marks an unknown alpha (data that are not area decreasing)
        if !(self.alpha > 0.0 && self.alpha <= 2.0) && !(self.alpha.is_nan() && codim == Codim::Two) {
            return bad(format!("alpha must lie in (0, 2], got {}", self.alpha));
        }
        if !(self.v0 >= 1.0) {
            return bad(format!("v0 must be at least 1, got {}", self.v0));
        }
        // 0 < delta <= 2 epsilon / n with n = 2
        if !(self.delta > 0.0 && self.epsilon > 0.0 && self.delta <= self.epsilon) {
            return bad(format!("need 0 < delta <= epsilon, got delta = {}, epsilon = {}", self.delta, self.epsilon));
        }
        for (name, v) in [
            ("rel_tol", self.rel_tol),
            ("id_tol", self.id_tol),
            ("step_tol", self.step_tol),
            ("trs_step_rel", self.trs_step_rel),
            ("evolution_per_dt", self.evolution_per_dt),
            ("evolution_floor", self.evolution_floor),
            ("crosscheck_tol", self.crosscheck_tol),
            ("soft_slack", self.soft_slack),
            ("gauss_tol", self.gauss_tol),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(format!("{name} must be a nonnegative number, got {v}"));
            }
        }
        Ok(())
    }
}

/// Selectable check groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Check {
    TrsMin,
    HDecay,
    ADecayLagrangian,
    Codim1,
    Relation,
    Pythagoras,
    LiLi,
    GaussBonnet,
    TrsEvolution,
    SoftDiffineq,
    HSymmetry,
    LagrangianResidual,
}

impl Check {
    pub const ALL: [Check; 12] = [
        Check::TrsMin,
        Check::HDecay,
        Check::ADecayLagrangian,
        Check::Codim1,
        Check::Relation,
        Check::Pythagoras,
        Check::LiLi,
        Check::GaussBonnet,
        Check::TrsEvolution,
        Check::SoftDiffineq,
        Check::HSymmetry,
        Check::LagrangianResidual,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::TrsMin => "trS_min",
            Check::HDecay => "H_decay",
            Check::ADecayLagrangian => "A_decay_lagrangian",
            Check::Codim1 => "codim1",
            Check::Relation => "relation",
            Check::Pythagoras => "pythagoras",
            Check::LiLi => "li_li",
            Check::GaussBonnet => "gauss_bonnet",
            Check::TrsEvolution => "trS_evolution",
            Check::SoftDiffineq => "soft_diffineq",
            Check::HSymmetry => "h_symmetry",
            Check::LagrangianResidual => "lagrangian_residual",
        }
    }

    pub fn applies_to(self, codim: Codim, lagrangian: bool) -> bool {
        match self {
            Check::TrsMin | Check::HDecay | Check::Relation | Check::TrsEvolution => codim == Codim::Two,
            Check::Codim1 => codim == Codim::One,
            Check::ADecayLagrangian | Check::HSymmetry | Check::LagrangianResidual => lagrangian,
            Check::Pythagoras | Check::LiLi | Check::GaussBonnet | Check::SoftDiffineq => true,
        }
    }

    /// Every check meaningful for the given run type.
    pub fn applicable(codim: Codim, lagrangian: bool) -> BTreeSet<Check> {
        Check::ALL.into_iter().filter(|c| c.applies_to(codim, lagrangian)).collect()
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Check {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Check::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown check '{s}'"))
    }
}

/// One time-series row; `None` marks quantities that do not apply.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub t: f64,
    pub dt: f64,
    pub sup_h2: f64,
    pub sup_a2: f64,
    pub inf_trs: Option<f64>,
    pub sup_v: Option<f64>,
    pub th2_over_bound: Option<f64>,
    pub ta2_over_bound: Option<f64>,
    pub relation_resid: Option<f64>,
    pub pythagoras_resid: Option<f64>,
    pub gauss_bonnet_resid: Option<f64>,
    pub lagrangian_resid: Option<f64>,
    pub degenerate_pts: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct MonitorReport {
    pub config: MonitorConfig,
    pub rows: Vec<ReportRow>,
    pub verdicts: Vec<Verdict>,
}

impl MonitorReport {
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    pub fn verdict(&self, check: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.check == check)
    }

    pub fn failed(&self) -> impl Iterator<Item = &Verdict> {
        self.verdicts.iter().filter(|v| !v.passed)
    }
}

/// Accumulates rows and verdicts from flow observations.
pub struct Monitor {
    cfg: MonitorConfig,
    checks: BTreeSet<Check>,
    codim: Codim,
    lagrangian: bool,
    rows: Vec<ReportRow>,
    verdicts: Vec<Verdict>,
    sups: Vec<(f64, f64, f64)>,
    error: Option<Error>,
}

impl Monitor {
    pub fn new(cfg: MonitorConfig, checks: BTreeSet<Check>, codim: Codim, lagrangian: bool) -> Result<Self> {
        cfg.validate(codim)?;
        if let Some(c) = checks.iter().find(|c| !c.applies_to(codim, lagrangian)) {
            return Err(Error::InvalidInput(format!(
                "check '{c}' does not apply to codimension {}{}",
                codim.dim(),
                if lagrangian { " Lagrangian data" } else { "" }
            )));
        }
        let needs_alpha = [Check::TrsMin, Check::HDecay, Check::ADecayLagrangian];
        if cfg.alpha.is_nan() {
            if let Some(c) = needs_alpha.iter().find(|c| checks.contains(c)) {
                return Err(Error::InvalidInput(format!("check '{c}' needs area-decreasing initial data")));
            }
        }
        Ok(Self { cfg, checks, codim, lagrangian, rows: Vec::new(), verdicts: Vec::new(), sups: Vec::new(), error: None })
    }

    pub fn config(&self) -> &MonitorConfig {
        &self.cfg
    }

    pub fn enabled(&self, c: Check) -> bool {
        self.checks.contains(&c)
    }

    /// First error raised while observing, if any.
    pub fn error(&self) -> Option<&Error> {
        self.error.as_ref()
    }

    pub fn rows(&self) -> &[ReportRow] {
        &self.rows
    }

    fn record(&mut self, v: Verdict) {
        match self.verdicts.iter_mut().find(|x| x.check == v.check) {
            Some(existing) => existing.merge(&v),
            None => self.verdicts.push(v),
        }
    }

    /// Observer entry point; errors are kept and reported by [`Monitor::error`].
    pub fn observe(&mut self, flow: &Flow, obs: &Observation<'_>) {
        if self.error.is_some() {
            return;
        }
        if let Err(e) = self.try_observe(flow, obs.state, obs.snapshot) {
            self.error = Some(e);
        }
    }

    pub fn try_observe(&mut self, flow: &Flow, state: &FlowState, snap: &GeometrySnapshot) -> Result<()> {
        let cfg = self.cfg;
        let sp = flow.spectral();
        let t = state.t;
        let tensor = snap.tensor_s();
        let sup_a2 = snap.sup_a2();
        let sup_h2 = snap.sup_h2();
        let two = self.codim == Codim::Two;

        let mut row = ReportRow {
            t,
            dt: state.last_dt,
            sup_h2,
            sup_a2,
            inf_trs: two.then(|| snap.inf_trace_s().value),
            sup_v: snap.sup_v(),
            th2_over_bound: (two && cfg.alpha.is_finite()).then(|| t * sup_h2 / (2.0 / cfg.alpha)),
            ta2_over_bound: None,
            relation_resid: None,
            pythagoras_resid: None,
            gauss_bonnet_resid: None,
            lagrangian_resid: None,
            degenerate_pts: snap.degenerate_count(),
        };

        if self.codim == Codim::One {
            row.ta2_over_bound = Some(t * sup_a2 / (cfg.v0 * cfg.v0));
            if self.enabled(Check::Codim1) && t > 0.0 {
                for v in checks::check_codim1(t, snap, cfg.v0, cfg.rel_tol) {
                    self.record(v);
                }
            }
        }
        if two {
            if self.enabled(Check::HDecay) {
                self.record(checks::check_h_decay(t, snap, cfg.alpha, cfg.rel_tol));
            }
            let (stats, [rel, cross]) = checks::check_relation(sp, t, snap, cfg.id_tol, cfg.crosscheck_tol);
            row.relation_resid = Some(stats.sup_relative);
            if self.enabled(Check::Relation) {
                self.record(rel);
                self.record(cross);
            }
            if self.enabled(Check::TrsEvolution) {
                let dt = flow.stable_dt(&state.field, 0.5);
                let r = trs_evolution_probe(flow, state, dt, true)?;
                let tol = cfg.evolution_per_dt * dt * (1.0 + sup_a2).powi(2) + cfg.evolution_floor;
                let mut v = Verdict::new("trS_evolution", checks::EVOLUTION, Bound::Upper);
                v.observe(r, tol, Some(t), None);
                self.record(v);
            }
        }
        if self.lagrangian {
            let lag = lagrangian_residual(sp, &state.field)?;
            row.lagrangian_resid = Some(lag);
            row.ta2_over_bound = cfg.alpha.is_finite().then(|| t * sup_a2 / checks::lagrangian_constant(cfg.alpha));
            if self.enabled(Check::LagrangianResidual) {
                self.record(checks::check_lagrangian_residual(t, lag, cfg.id_tol));
            }
            if lag > cfg.id_tol {
                // the remaining Lagrangian checks presuppose the condition
                self.rows.push(row);
                return Err(Error::NotLagrangian { residual: lag, tol: cfg.id_tol });
            }
            if self.enabled(Check::ADecayLagrangian) {
                for v in checks::check_a_decay_lagrangian(t, snap, cfg.alpha, lag, cfg.id_tol, cfg.rel_tol)? {
                    self.record(v);
                }
            }
            if self.enabled(Check::HSymmetry) {
                let lsnap = lagrangian_snapshot(sp, &state.field, cfg.id_tol)?;
                let (_, vs) = checks::check_h_symmetry(t, &lsnap, cfg.id_tol);
                for v in vs {
                    self.record(v);
                }
            }
        }

        let (pyth, pv) = checks::check_pythagoras(t, &tensor);
        row.pythagoras_resid = Some(pyth);
        if self.enabled(Check::Pythagoras) {
            self.record(pv);
        }
        let (gb, gv) = checks::check_gauss_bonnet(t, snap, cfg.gauss_tol);
        row.gauss_bonnet_resid = Some(gb);
        if self.enabled(Check::GaussBonnet) {
            self.record(gv);
        }
        if self.enabled(Check::LiLi) {
            self.record(checks::check_li_li(t, snap).1);
        }
        self.sups.push((t, sup_a2, sup_h2));
        self.rows.push(row);
        Ok(())
    }

    /// Per-step checks from the trajectory's step records.
    pub fn observe_steps(&mut self, steps: &[StepRecord]) {
        if self.enabled(Check::TrsMin) {
            self.record(checks::check_trs_min(steps, self.cfg.alpha, self.cfg.rel_tol, self.cfg.trs_step_rel));
        }
        if self.enabled(Check::Codim1) {
            self.record(checks::check_sup_v_monotone(steps, self.cfg.step_tol));
        }
    }

    pub fn finish(mut self) -> MonitorReport {
        if self.enabled(Check::SoftDiffineq) {
            for v in checks::soft_diffineq_checks(&self.sups, self.cfg.rel_tol, self.cfg.soft_slack) {
                self.record(v);
            }
        }
        MonitorReport { config: self.cfg, rows: self.rows, verdicts: self.verdicts }
    }
}

/// Advances `state` by `dt` off the main trajectory and returns the sup of
/// the `Tr(S)` evolution residual; `correct = false` drops the tangential term.
pub fn trs_evolution_probe(flow: &Flow, state: &FlowState, dt: f64, correct: bool) -> Result<f64> {
    let sp = flow.spectral();
    let next = flow.step(state, dt)?;
    let before = GeometrySnapshot::compute(sp, &state.field)?;
    let after = GeometrySnapshot::compute(sp, &next.field)?;
    let v = if correct { Some(flow.tangential_velocity(&state.field)?) } else { None };
    let r = checks::trs_evolution_residual(sp, &before, &after, dt, v.as_ref());
    Ok(r.iter().fold(0.0, |a: f64, b| a.max(b.abs())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::MapField;
    use crate::flow::StepperConfig;
    use crate::grid::PeriodicGrid;

    #[test]
    fn check_names_round_trip() {
        for c in Check::ALL {
            assert_eq!(c.name().parse::<Check>().unwrap(), c);
        }
        assert!("nope".parse::<Check>().is_err());
    }

    #[test]
    fn applicability() {
        let two = Check::applicable(Codim::Two, false);
        assert!(two.contains(&Check::HDecay) && !two.contains(&Check::Codim1) && !two.contains(&Check::HSymmetry));
        let one = Check::applicable(Codim::One, false);
        assert!(one.contains(&Check::Codim1) && !one.contains(&Check::TrsMin));
        assert!(Check::applicable(Codim::Two, true).contains(&Check::HSymmetry));
        let mut bad = BTreeSet::new();
        bad.insert(Check::Codim1);
        assert!(Monitor::new(MonitorConfig::default(), bad, Codim::Two, false).is_err());
    }

    #[test]
    fn config_validation() {
        let mut c = MonitorConfig::default();
        assert!(c.validate(Codim::Two).is_ok());
        c.alpha = 0.0;
        assert!(c.validate(Codim::Two).is_err());
        c.alpha = 1.0;
        c.delta = 2.0;
        assert!(c.validate(Codim::Two).is_err());
    }

    #[test]
    fn affine_run_passes_everything() {
        let g = PeriodicGrid::square_2pi(16).unwrap();
        let flow = Flow::new(g);
        let f = MapField::affine(g, Codim::Two, [[0.5, 0.0], [0.0, 0.5]], [0.0; 2]).unwrap();
        let alpha = checks::alpha0(&GeometrySnapshot::compute(flow.spectral(), &f).unwrap()).unwrap();
        let cfg = MonitorConfig { alpha, ..Default::default() };
        let mut mon = Monitor::new(cfg, Check::applicable(Codim::Two, false), Codim::Two, false).unwrap();
        let stepper = StepperConfig { cfl: 0.5, t_end: 0.05, max_steps: u64::MAX, snapshot_every: 0.025 };
        let traj = {
            let mut obs = |o: &Observation<'_>| mon.observe(&flow, o);
            flow.evolve(FlowState::new(f), &stepper, &mut [&mut obs]).unwrap()
        };
        assert!(mon.error().is_none());
        mon.observe_steps(&traj.steps);
        let report = mon.finish();
        assert_eq!(report.rows.len(), 3);
        assert!(report.passed(), "{:?}", report.failed().collect::<Vec<_>>());
        assert!(report.rows.iter().all(|r| r.inf_trs == Some(1.2) || (r.inf_trs.unwrap() - 1.2).abs() < 1e-15));
    }
}
