//! Individual checks. Each function inspects one snapshot (or one series)
//! and returns verdicts that the [`Monitor`](super::Monitor) merges over time.

use std::f64::consts::SQRT_2;

use crate::error::{Error, Result};
use crate::field::Codim;
use crate::flow::{material_derivative, StepRecord};
use crate::geometry::{laplace_beltrami, surface_gradient_norm, GeometrySnapshot, TensorSValues};
use crate::lagrangian::{cubic_symmetry_residual, h_symmetry_residual, mixed_square_difference};
use crate::spectral::Spectral;

use super::identities::{frame_gradient_trace_s, li_li, mixed_squares, relation_terms, s_and_t};
use super::verdict::{Bound, Verdict};

pub const TRS_MIN: &str = "inf Tr(S) >= alpha and the spatial minimum of Tr(S) does not decrease";
pub const H_DECAY: &str = "t |H|^2 <= 2/alpha for area-decreasing data";
pub const A_DECAY: &str = "t |A|^2 <= 8 (1 + C^2/alpha)/alpha^2 with C = 16 sqrt(2)/alpha for Lagrangian data";
pub const A_BARRIER: &str = "t |A|^2/Tr(S)^2 <= 2 (1 + C^2/alpha)/alpha^2 for Lagrangian data";
pub const V_MONOTONE: &str = "sup v does not increase for codimension one";
pub const V_DECAY: &str = "sup t |A|^2 <= v0^2 for codimension one";
pub const V_WEIGHTED: &str = "sup (t |A|^2 + 1) v^2 <= v0^2 for codimension one";
pub const V_METRIC: &str = "v^2 = det g for codimension one";
pub const RELATION: &str = "4 TrS (S11 - S22) sum_c (h3c1^2 - h4c2^2) + |grad TrS|^2 = 4 sum_c (T11 h4c2 + T22 h3c1)^2";
pub const GRADIENT: &str = "e_k(Tr S) = -2 T11 h3k1 - 2 T22 h4k2 agrees with the spectral gradient";
pub const PYTHAGORAS: &str = "S_ii^2 + T_ii^2 = 1";
pub const LI_LI: &str = "Li-Li commutator inequality bounded by 3 |A|^4";
pub const GAUSS: &str = "integral of |A|^2 equals integral of |H|^2 on a torus";
pub const EVOLUTION: &str = "(d/dt - Laplacian) Tr(S) = 2 |A|^2 Tr(S) + 2 (S11 - S22) sum_c (h3c1^2 - h4c2^2)";
pub const SOFT_A: &str = "d/dt sup |A|^2 <= 3 (sup |A|^2)^2";
pub const SOFT_H: &str = "d/dt sup |H|^2 <= 2 sup |A|^2 sup |H|^2";
pub const H_SYMMETRY: &str = "h3c2 = h4c1 and h is totally symmetric in J-adapted frames";
pub const H_SYMMETRY_ESTIMATE: &str = "|sum_c (h3c1^2 - h4c2^2)| <= 2 sqrt(2) |A| |H| for Lagrangian data";
pub const LAGRANGIAN: &str = "the flow preserves the Lagrangian condition";

/// `C_alpha = 8 (1 + C^2/alpha)/alpha^2` with `C = 16 sqrt(2)/alpha`.
pub fn lagrangian_constant(alpha: f64) -> f64 {
    let c = 16.0 * SQRT_2 / alpha;
    8.0 * (1.0 + c * c / alpha) / (alpha * alpha)
}

/// `inf Tr(S)` over the grid; an error when the map is not area decreasing.
pub fn alpha0(snapshot: &GeometrySnapshot) -> Result<f64> {
    let inf = snapshot.inf_trace_s();
    if inf.value > 0.0 {
        Ok(inf.value)
    } else {
        let (i, j) = inf.point;
        Err(Error::NotAreaDecreasing { value: inf.value, i, j })
    }
}

/// Lower bound `alpha (1 - rel_tol)` at every step and a per-step drop of
/// at most `rel_tol * dt`.
/// `inf Tr(S) >= alpha (1 - rel_tol)` at every step, and no step lowers it
/// by more than `step_rel` relative to the previous value.
pub fn check_trs_min(steps: &[StepRecord], alpha: f64, rel_tol: f64, step_rel: f64) -> Verdict {
    let mut v = Verdict::new("trS_min", TRS_MIN, Bound::Lower);
    for (k, s) in steps.iter().enumerate() {
        v.observe(s.inf_trace_s, alpha * (1.0 - rel_tol), Some(s.t), None);
        if k > 0 {
            let prev = &steps[k - 1];
            v.observe(s.inf_trace_s, prev.inf_trace_s - step_rel * prev.inf_trace_s.abs(), Some(s.t), None);
        }
    }
    v
}

pub fn check_h_decay(t: f64, snapshot: &GeometrySnapshot, alpha: f64, rel_tol: f64) -> Verdict {
    let mut v = Verdict::new("H_decay", H_DECAY, Bound::Upper);
    if t > 0.0 {
        let sup = snapshot.sup(|p| p.norm_h2);
        v.observe(t * sup.value, 2.0 / alpha * (1.0 + rel_tol), Some(t), Some(sup.point));
    }
    v
}

/// Both Lagrangian decay verdicts; `lagrangian_resid` must not exceed `id_tol`.
pub fn check_a_decay_lagrangian(
    t: f64,
    snapshot: &GeometrySnapshot,
    alpha: f64,
    lagrangian_resid: f64,
    id_tol: f64,
    rel_tol: f64,
) -> Result<[Verdict; 2]> {
    if !(lagrangian_resid <= id_tol) {
        return Err(Error::NotLagrangian { residual: lagrangian_resid, tol: id_tol });
    }
    let mut decay = Verdict::new("A_decay_lagrangian", A_DECAY, Bound::Upper);
    let mut barrier = Verdict::new("A_decay_lagrangian_barrier", A_BARRIER, Bound::Upper);
    if t > 0.0 {
        let c = 16.0 * SQRT_2 / alpha;
        let sup = snapshot.sup(|p| p.norm_a2);
        decay.observe(t * sup.value, lagrangian_constant(alpha) * (1.0 + rel_tol), Some(t), Some(sup.point));
        let ratio = snapshot.sup(|p| {
            let tr = p.tensor_s().tr_s;
            p.norm_a2 / (tr * tr)
        });
        let bound = 2.0 * (1.0 + c * c / alpha) / (alpha * alpha);
        barrier.observe(t * ratio.value, bound * (1.0 + rel_tol), Some(t), Some(ratio.point));
    }
    Ok([decay, barrier])
}

/// `sup v` from consecutive step records may grow by at most `step_tol`.
pub fn check_sup_v_monotone(steps: &[StepRecord], step_tol: f64) -> Verdict {
    let mut v = Verdict::new("codim1_sup_v", V_MONOTONE, Bound::Upper);
    for w in steps.windows(2) {
        v.observe(w[1].sup_v, w[0].sup_v + step_tol, Some(w[1].t), None);
    }
    v
}

/// Codimension-one decay verdicts `[t|A|^2, (t|A|^2 + 1) v^2, v^2 = det g]` at one snapshot.
pub fn check_codim1(t: f64, snapshot: &GeometrySnapshot, v0: f64, rel_tol: f64) -> [Verdict; 3] {
    let mut decay = Verdict::new("codim1_tA2", V_DECAY, Bound::Upper);
    let mut weighted = Verdict::new("codim1_tA2v2", V_WEIGHTED, Bound::Upper);
    let mut metric = Verdict::new("codim1_v_det_g", V_METRIC, Bound::Upper);
    let bound = v0 * v0 * (1.0 + rel_tol);
    let sup = snapshot.sup(|p| p.norm_a2);
    decay.observe(t * sup.value, bound, Some(t), Some(sup.point));
    let w = snapshot.sup(|p| {
        let v = p.v.unwrap_or(1.0);
        (t * p.norm_a2 + 1.0) * v * v
    });
    weighted.observe(w.value, bound, Some(t), Some(w.point));
    let m = snapshot.sup(|p| {
        let v = p.v.unwrap_or(f64::NAN);
        let det_g = p.metric.area_element * p.metric.area_element;
        (v * v - det_g).abs() / det_g
    });
    metric.observe(m.value, 1e-12, Some(t), Some(m.point));
    [decay, weighted, metric]
}

/// Relation residual statistics at one snapshot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelationStats {
    /// Sup of the relative residual over non-degenerate points.
    pub sup_relative: f64,
    /// Sup of `| |grad TrS|^2_frame - |grad TrS|^2_spectral |`.
    pub gradient_gap: f64,
    pub sup_gradient: f64,
    pub skipped: usize,
}

/// Relation identity and the frame/spectral gradient cross-check.
pub fn check_relation(
    sp: &Spectral,
    t: f64,
    snapshot: &GeometrySnapshot,
    id_tol: f64,
    crosscheck_tol: f64,
) -> (RelationStats, [Verdict; 2]) {
    let mut rel = Verdict::new("relation", RELATION, Bound::Upper);
    let mut cross = Verdict::new("relation_gradient_crosscheck", GRADIENT, Bound::Upper);
    let trs = snapshot.trace_s();
    let spectral = surface_gradient_norm(&snapshot.metric_inverse(), &sp.gradient(&trs));
    let mut stats = RelationStats { sup_relative: 0.0, gradient_gap: 0.0, sup_gradient: 0.0, skipped: 0 };
    let mut worst_rel = (0.0, (0, 0));
    let mut worst_gap = (0.0, (0, 0));
    for (idx, p) in snapshot.points.iter().enumerate() {
        if p.frame.degenerate {
            stats.skipped += 1;
            continue;
        }
        let terms = relation_terms(p.frame.signed, &p.h);
        let r = terms.relative();
        if !(r <= worst_rel.0) {
            worst_rel = (r, snapshot.grid.point(idx));
        }
        let (_, tt) = s_and_t(p.frame.signed);
        let g = frame_gradient_trace_s(tt, &p.h);
        let frame = g[0] * g[0] + g[1] * g[1];
        stats.sup_gradient = stats.sup_gradient.max(frame);
        let gap = (frame - spectral[idx]).abs();
        if !(gap <= worst_gap.0) {
            worst_gap = (gap, snapshot.grid.point(idx));
        }
    }
    stats.sup_relative = worst_rel.0;
    stats.gradient_gap = worst_gap.0;
    rel.observe(worst_rel.0, id_tol, Some(t), Some(worst_rel.1));
    cross.observe(worst_gap.0, crosscheck_tol * (stats.sup_gradient + 1e-12), Some(t), Some(worst_gap.1));
    (stats, [rel, cross])
}

pub fn pythagoras_residual(tensor: &[TensorSValues]) -> f64 {
    tensor.iter().map(TensorSValues::pythagoras_residual).fold(0.0, f64::max)
}

pub fn check_pythagoras(t: f64, tensor: &[TensorSValues]) -> (f64, Verdict) {
    let mut v = Verdict::new("pythagoras", PYTHAGORAS, Bound::Upper);
    let r = pythagoras_residual(tensor);
    v.observe(r, 1e-13, Some(t), None);
    (r, v)
}

/// Worst `lhs / (3 |A|^4)` and the verdict `lhs <= 3 |A|^4 (1 + 1e-12)`.
pub fn check_li_li(t: f64, snapshot: &GeometrySnapshot) -> (f64, Verdict) {
    let mut v = Verdict::new("li_li", LI_LI, Bound::Upper);
    let mut worst_ratio: f64 = 0.0;
    let mut worst = (f64::NEG_INFINITY, 0.0, 0.0, (0, 0));
    for (idx, p) in snapshot.points.iter().enumerate() {
        let (lhs, bound) = li_li(&p.h);
        if bound > 0.0 {
            worst_ratio = worst_ratio.max(lhs / bound);
        }
        let excess = lhs - bound * (1.0 + 1e-12);
        if excess > worst.0 || idx == 0 {
            worst = (excess, lhs, bound * (1.0 + 1e-12), snapshot.grid.point(idx));
        }
    }
    v.observe(worst.1, worst.2, Some(t), Some(worst.3));
    (worst_ratio, v)
}

/// `|int (|H|^2 - |A|^2) dmu|` and `int |A|^2 dmu`.
pub fn gauss_bonnet_residual(snapshot: &GeometrySnapshot) -> (f64, f64) {
    let a = snapshot.integrate(|p| p.norm_a2);
    let h = snapshot.integrate(|p| p.norm_h2);
    ((h - a).abs(), a)
}

pub fn check_gauss_bonnet(t: f64, snapshot: &GeometrySnapshot, tol: f64) -> (f64, Verdict) {
    let mut v = Verdict::new("gauss_bonnet", GAUSS, Bound::Upper);
    let (r, a) = gauss_bonnet_residual(snapshot);
    v.observe(r, tol * a.max(1e-12), Some(t), None);
    (r, v)
}

/// Pointwise residual of the `Tr(S)` evolution equation between two
/// snapshots `dt` apart. `velocity = None` omits the tangential correction.
pub fn trs_evolution_residual(
    sp: &Spectral,
    before: &GeometrySnapshot,
    after: &GeometrySnapshot,
    dt: f64,
    velocity: Option<&[Vec<f64>; 2]>,
) -> Vec<f64> {
    let w0 = before.trace_s();
    let w1 = after.trace_s();
    let n = w0.len();
    let zero = [vec![0.0; n], vec![0.0; n]];
    let v = velocity.unwrap_or(&zero);
    let md = material_derivative(&w0, &w1, dt, v, &sp.gradient(&w0));
    let lap = laplace_beltrami(sp, &w0, &before.metric_inverse(), &before.area_elements());
    before
        .points
        .iter()
        .enumerate()
        .map(|(p, g)| {
            let s = g.tensor_s();
            let reaction = 2.0 * g.norm_a2 * s.tr_s + 2.0 * (s.s11() - s.s22()) * mixed_squares(&g.h);
            md[p] - lap[p] - reaction
        })
        .collect()
}

/// Verdicts `[d sup|A|^2/dt, d sup|H|^2/dt]` between snapshots `(t, sup A2, sup H2)`.
pub fn soft_diffineq_checks(series: &[(f64, f64, f64)], rel_tol: f64, slack: f64) -> [Verdict; 2] {
    let mut a = Verdict::new("soft_A2", SOFT_A, Bound::Upper);
    let mut h = Verdict::new("soft_H2", SOFT_H, Bound::Upper);
    for w in series.windows(2) {
        let (t0, a0, h0) = w[0];
        let (t1, a1, h1) = w[1];
        let dt = t1 - t0;
        if dt <= 0.0 {
            continue;
        }
        let am = a0.max(a1);
        let hm = h0.max(h1);
        a.observe((a1 - a0) / dt, 3.0 * am * am * (1.0 + rel_tol) + slack, Some(t1), None);
        h.observe((h1 - h0) / dt, 2.0 * am * hm * (1.0 + rel_tol) + slack, Some(t1), None);
    }
    [a, h]
}

/// `[h_symmetry, h_symmetry_estimate]` on a snapshot taken in `J`-adapted frames.
pub fn check_h_symmetry(t: f64, lagrangian: &GeometrySnapshot, tol: f64) -> (f64, [Verdict; 2]) {
    let mut sym = Verdict::new("h_symmetry", H_SYMMETRY, Bound::Upper);
    let mut est = Verdict::new("h_symmetry_estimate", H_SYMMETRY_ESTIMATE, Bound::Upper);
    debug_assert_eq!(lagrangian.codim, Codim::Two);
    let mut worst = (0.0, (0, 0));
    let mut worst_est = (f64::NEG_INFINITY, 0.0, 0.0, (0, 0));
    for (idx, p) in lagrangian.points.iter().enumerate() {
        let r = h_symmetry_residual(&p.h).max(cubic_symmetry_residual(&p.h));
        if !(r <= worst.0) {
            worst = (r, lagrangian.grid.point(idx));
        }
        let lhs = mixed_square_difference(&p.h);
        let rhs = 2.0 * SQRT_2 * (p.norm_a2 * p.norm_h2).sqrt() + 1e-14 * p.norm_a2;
        if lhs - rhs > worst_est.0 {
            worst_est = (lhs - rhs, lhs, rhs, lagrangian.grid.point(idx));
        }
    }
    sym.observe(worst.0, tol, Some(t), Some(worst.1));
    est.observe(worst_est.1, worst_est.2, Some(t), Some(worst_est.3));
    (worst.0, [sym, est])
}

pub fn check_lagrangian_residual(t: f64, residual: f64, tol: f64) -> Verdict {
    let mut v = Verdict::new("lagrangian_residual", LAGRANGIAN, Bound::Upper);
    v.observe(residual, tol, Some(t), None);
    v
}
