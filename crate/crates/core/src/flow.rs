//! Mean curvature flow of graphs in the nonparametric gauge.
//!
//! The unknown is the periodic part `u` of `f = A x + b + u`, evolved by
//! `df^c/dt = g^{ij} d_i d_j f^c` with `g = I + Df^T Df`. This velocity
//! differs from the mean curvature vector by a tangential field `V`
//! (see [`Flow::tangential_velocity`]), so scalar geometric quantities `w`
//! obey `dw/dt|_material = dw/dt|_gauge - V . grad w`.

use crate::error::{Error, Result};
use crate::field::{Codim, MapField};
use crate::geometry::{GeometrySnapshot, TensorSValues};
use crate::grid::PeriodicGrid;
use crate::linalg::{det, gram, norm2, Mat2};
use crate::spectral::{Derivatives, Spectral};

#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    pub t: f64,
    pub field: MapField,
    pub step_count: u64,
    pub last_dt: f64,
}

impl FlowState {
    pub fn new(field: MapField) -> Self {
        Self { t: 0.0, field, step_count: 0, last_dt: 0.0 }
    }

    pub fn at(field: MapField, t: f64) -> Self {
        Self { t, ..Self::new(field) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepperConfig {
    /// Fraction of the explicit stability limit, in `(0, 1]`.
    pub cfl: f64,
    pub t_end: f64,
    pub max_steps: u64,
    /// Time between emitted snapshots.
    pub snapshot_every: f64,
}

impl StepperConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::InvalidInput(format!("cfl must lie in (0, 1], got {}", self.cfl)));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidInput(format!("t_end must be positive, got {}", self.t_end)));
        }
        if !(self.snapshot_every > 0.0) {
            return Err(Error::InvalidInput(format!(
                "snapshot_every must be positive, got {}",
                self.snapshot_every
            )));
        }
        Ok(())
    }
}

/// Cheap per-step diagnostics taken from the first RK stage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub t: f64,
    /// Size of the step taken from `t`; zero for the final record.
    pub dt: f64,
    pub inf_trace_s: f64,
    pub sup_v: f64,
}

/// What observers see at each snapshot time.
pub struct Observation<'a> {
    pub state: &'a FlowState,
    pub snapshot: &'a GeometrySnapshot,
    pub tensor: &'a [TensorSValues],
}

pub type Observer<'a> = dyn FnMut(&Observation<'_>) + 'a;

#[derive(Debug)]
pub struct Trajectory {
    /// Last valid state (the state before a blow-up, if one happened).
    pub final_state: FlowState,
    pub steps: Vec<StepRecord>,
    pub snapshots: usize,
    pub blow_up: Option<Error>,
}

#[derive(Debug, Clone, Copy)]
struct Diagnostics {
    inf_trace_s: f64,
    sup_v: f64,
}

pub struct Flow {
    sp: Spectral,
}

impl Flow {
    pub fn new(grid: PeriodicGrid) -> Self {
        Self { sp: Spectral::new(grid) }
    }

    pub fn spectral(&self) -> &Spectral {
        &self.sp
    }

    pub fn grid(&self) -> &PeriodicGrid {
        self.sp.grid()
    }

    fn derivatives(&self, codim: Codim, pert: &[Vec<f64>]) -> Vec<Derivatives> {
        match codim {
            Codim::One => vec![self.sp.derivatives(&pert[0])],
            Codim::Two => {
                let (a, b) = self.sp.derivatives_pair(&pert[0], &pert[1]);
                vec![a, b]
            }
        }
    }

    fn evaluate(&self, codim: Codim, affine: &Mat2, pert: &[Vec<f64>], t: f64) -> Result<(Vec<Vec<f64>>, Diagnostics)> {
        let derivs = self.derivatives(codim, pert);
        let n = self.grid().len();
        let m = codim.dim();
        let mut out = vec![vec![0.0; n]; m];
        let mut diag = Diagnostics { inf_trace_s: f64::INFINITY, sup_v: 0.0 };
        for p in 0..n {
            let mut j = [[0.0; 2]; 2];
            for (c, d) in derivs.iter().enumerate() {
                j[c] = [affine[c][0] + d.d1[p], affine[c][1] + d.d2[p]];
            }
            let jj = gram(&j);
            let dj = det(&j);
            let nj = norm2(&j);
            let det_g = 1.0 + nj + dj * dj;
            let gi00 = (1.0 + jj[1][1]) / det_g;
            let gi01 = -jj[0][1] / det_g;
            let gi11 = (1.0 + jj[0][0]) / det_g;
            for (c, d) in derivs.iter().enumerate() {
                let r = gi00 * d.d11[p] + 2.0 * gi01 * d.d12[p] + gi11 * d.d22[p];
                if !r.is_finite() {
                    let (i, jj) = self.grid().point(p);
                    return Err(Error::BlowUp { t, i, j: jj });
                }
                out[c][p] = r;
            }
            diag.inf_trace_s = diag.inf_trace_s.min(2.0 * (1.0 - dj * dj) / det_g);
            diag.sup_v = diag.sup_v.max((1.0 + nj).sqrt());
        }
        Ok((out, diag))
    }

    /// `g^{ij} d_i d_j f^c` at every grid point; zero for affine maps.
    pub fn rhs(&self, field: &MapField) -> Result<Vec<Vec<f64>>> {
        self.rhs_at(field, 0.0)
    }

    /// As [`Flow::rhs`], tagging a blow-up with time `t`.
    pub fn rhs_at(&self, field: &MapField, t: f64) -> Result<Vec<Vec<f64>>> {
        if let Err(Error::InvalidField { i, j, .. }) = field.check_finite() {
            return Err(Error::BlowUp { t, i, j });
        }
        Ok(self.evaluate(field.codim(), field.affine_part(), field.perturbation(), t)?.0)
    }

    /// Stable explicit step `cfl * h_min^2 / 4`.
    ///
    /// The principal part of the flow operator is `g^{ij} d_i d_j` with
    /// `g^{-1} <= I`, so the flat heat-equation limit bounds every graph and
    /// `dt` never grows with `|Df|`. With Fourier differentiation the RK4
    /// limit corresponds to `cfl ~ 0.56`; larger values are accepted but can
    /// blow up at the Nyquist scale.
    pub fn stable_dt(&self, _field: &MapField, cfl: f64) -> f64 {
        let h = self.grid().h_min();
        cfl * h * h / 4.0
    }

    /// One classical RK4 step of size `dt`.
    pub fn step(&self, state: &FlowState, dt: f64) -> Result<FlowState> {
        Ok(self.step_with_diagnostics(state, dt)?.0)
    }

    fn step_with_diagnostics(&self, state: &FlowState, dt: f64) -> Result<(FlowState, Diagnostics)> {
        let field = &state.field;
        let (codim, affine) = (field.codim(), *field.affine_part());
        let t = state.t;
        let u0 = field.perturbation();
        let stage = |k: &[Vec<f64>], a: f64| -> Vec<Vec<f64>> {
            u0.iter().zip(k).map(|(u, k)| u.iter().zip(k).map(|(u, k)| u + a * k).collect()).collect()
        };
        let (k1, diag) = self.evaluate(codim, &affine, u0, t)?;
        let (k2, _) = self.evaluate(codim, &affine, &stage(&k1, 0.5 * dt), t + 0.5 * dt)?;
        let (k3, _) = self.evaluate(codim, &affine, &stage(&k2, 0.5 * dt), t + 0.5 * dt)?;
        let (k4, _) = self.evaluate(codim, &affine, &stage(&k3, dt), t + dt)?;
        let w = dt / 6.0;
        let next: Vec<Vec<f64>> = (0..u0.len())
            .map(|c| {
                (0..u0[c].len())
                    .map(|p| u0[c][p] + w * (k1[c][p] + 2.0 * k2[c][p] + 2.0 * k3[c][p] + k4[c][p]))
                    .collect()
            })
            .collect();
        let new_state = FlowState {
            t: t + dt,
            field: field.with_perturbation(next)?,
            step_count: state.step_count + 1,
            last_dt: dt,
        };
        Ok((new_state, diag))
    }

    fn diagnostics(&self, state: &FlowState) -> Result<Diagnostics> {
        let f = &state.field;
        Ok(self.evaluate(f.codim(), f.affine_part(), f.perturbation(), state.t)?.1)
    }

    /// Runs until `t_end` or `max_steps`, calling each observer at `t0` and at
    /// every multiple of `snapshot_every` (plus `t_end`).
    ///
    /// Step sizes are shortened to land exactly on snapshot times, so the run
    /// is fully determined by its inputs.
    pub fn evolve(&self, initial: FlowState, cfg: &StepperConfig, observers: &mut [&mut Observer<'_>]) -> Result<Trajectory> {
        cfg.validate()?;
        initial.field.check_finite()?;
        let t0 = initial.t;
        let mut state = initial;
        let mut steps = Vec::new();
        let mut snapshots = 0;
        let mut blow_up = None;

        let mut emit = |state: &FlowState, count: &mut usize| -> Result<()> {
            let snapshot = GeometrySnapshot::compute(&self.sp, &state.field)?;
            let tensor = snapshot.tensor_s();
            let obs = Observation { state, snapshot: &snapshot, tensor: &tensor };
            for o in observers.iter_mut() {
                o(&obs);
            }
            *count += 1;
            Ok(())
        };
        emit(&state, &mut snapshots)?;

        let mut k = 1u64;
        let mut taken = 0u64;
        let mut last_emit = state.t;
        while state.t < cfg.t_end && taken < cfg.max_steps {
            let next_snap = (t0 + k as f64 * cfg.snapshot_every).min(cfg.t_end);
            let mut dt = self.stable_dt(&state.field, cfg.cfl);
            let lands = state.t + dt >= next_snap;
            if lands {
                dt = next_snap - state.t;
            }
            match self.step_with_diagnostics(&state, dt) {
                Ok((mut next, diag)) => {
                    steps.push(StepRecord { t: state.t, dt, inf_trace_s: diag.inf_trace_s, sup_v: diag.sup_v });
                    if lands {
                        next.t = next_snap;
                    }
                    state = next;
                }
                Err(e) => {
                    blow_up = Some(e);
                    break;
                }
            }
            taken += 1;
            if lands {
                emit(&state, &mut snapshots)?;
                last_emit = state.t;
                while t0 + k as f64 * cfg.snapshot_every <= state.t {
                    k += 1;
                }
            }
        }
        if blow_up.is_none() && last_emit != state.t {
            emit(&state, &mut snapshots)?;
        }
        if blow_up.is_none() {
            let diag = self.diagnostics(&state)?;
            steps.push(StepRecord { t: state.t, dt: 0.0, inf_trace_s: diag.inf_trace_s, sup_v: diag.sup_v });
        }
        Ok(Trajectory { final_state: state, steps, snapshots, blow_up })
    }

    /// Base-coordinate tangential drift `V^i = g^{ij} <(0, rhs), d_j F>`.
    pub fn tangential_velocity(&self, field: &MapField) -> Result<[Vec<f64>; 2]> {
        let rhs = self.rhs(field)?;
        let jac = crate::field::jacobian(&self.sp, field)?;
        let n = self.grid().len();
        let mut v = [vec![0.0; n], vec![0.0; n]];
        for p in 0..n {
            let j = &jac.df[p];
            let gi = crate::geometry::induced_metric(j).g_inv;
            let mut w = [0.0; 2];
            for (c, r) in rhs.iter().enumerate() {
                w[0] += r[p] * j[c][0];
                w[1] += r[p] * j[c][1];
            }
            v[0][p] = gi[0][0] * w[0] + gi[0][1] * w[1];
            v[1][p] = gi[1][0] * w[0] + gi[1][1] * w[1];
        }
        Ok(v)
    }
}

/// First-order estimate of the derivative along the flow lines of the normal
/// motion: `(w1 - w0)/dt - V^i d_i w0`.
pub fn material_derivative(w0: &[f64], w1: &[f64], dt: f64, v: &[Vec<f64>; 2], dw: &[Vec<f64>; 2]) -> Vec<f64> {
    (0..w0.len())
        .map(|p| (w1[p] - w0[p]) / dt - v[0][p] * dw[0][p] - v[1][p] * dw[1][p])
        .collect()
}
