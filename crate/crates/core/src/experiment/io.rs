//! Time-series CSV and binary field snapshots.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Codim, MapField};
use crate::flow::FlowState;
use crate::grid::PeriodicGrid;
use crate::linalg::Mat2;
use crate::monitor::ReportRow;

pub const TIMESERIES_VERSION: &str = "# gmcf-timeseries v1";
pub const TIMESERIES_HEADER: &str = "t,dt,sup_H2,sup_A2,inf_trS,sup_v,tH2_over_bound,tA2_over_bound,relation_resid,pythagoras_resid,gauss_bonnet_resid,lagrangian_resid,degenerate_pts";
pub const SNAPSHOT_FORMAT: &str = "gmcf-snap-1";

/// Shortest representation that parses back to the same `f64`.
fn float(v: f64) -> String {
    format!("{v:?}")
}

fn opt(v: Option<f64>) -> String {
    v.map(float).unwrap_or_default()
}

pub fn timeseries_csv(rows: &[ReportRow]) -> String {
    let mut out = String::new();
    out.push_str(TIMESERIES_VERSION);
    out.push('\n');
    out.push_str(TIMESERIES_HEADER);
    out.push('\n');
    for r in rows {
        let fields = [
            float(r.t),
            float(r.dt),
            float(r.sup_h2),
            float(r.sup_a2),
            opt(r.inf_trs),
            opt(r.sup_v),
            opt(r.th2_over_bound),
            opt(r.ta2_over_bound),
            opt(r.relation_resid),
            opt(r.pythagoras_resid),
            opt(r.gauss_bonnet_resid),
            opt(r.lagrangian_resid),
            r.degenerate_pts.to_string(),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn write_timeseries(rows: &[ReportRow], path: &Path) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::InvalidInput("refusing to write an empty time series".into()));
    }
    write_atomic(path, timeseries_csv(rows).as_bytes())
}

/// Writes to a temporary sibling and renames, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("")
    ));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotHeader {
    pub format: String,
    pub grid: PeriodicGrid,
    pub codim: Codim,
    pub affine: Mat2,
    pub offset: [f64; 2],
    pub t: f64,
    pub step_count: u64,
}

fn paths(base: &Path) -> (PathBuf, PathBuf) {
    let base = match base.extension().and_then(|e| e.to_str()) {
        Some("json") | Some("bin") => base.with_extension(""),
        _ => base.to_path_buf(),
    };
    let name = base.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    (base.with_file_name(format!("{name}.bin")), base.with_file_name(format!("{name}.json")))
}

/// Writes `<base>.bin` (little-endian f64, i fastest, components interleaved)
/// and the `<base>.json` sidecar. Returns both paths.
pub fn write_snapshot(state: &FlowState, base: &Path) -> Result<(PathBuf, PathBuf)> {
    let (bin, json) = paths(base);
    let f = &state.field;
    let pert = f.perturbation();
    let mut bytes = Vec::with_capacity(8 * pert.len() * f.grid().len());
    for p in 0..f.grid().len() {
        for u in pert {
            bytes.extend_from_slice(&u[p].to_le_bytes());
        }
    }
    let header = SnapshotHeader {
        format: SNAPSHOT_FORMAT.into(),
        grid: *f.grid(),
        codim: f.codim(),
        affine: *f.affine_part(),
        offset: f.offset(),
        t: state.t,
        step_count: state.step_count,
    };
    write_atomic(&bin, &bytes)?;
    write_atomic(&json, serde_json::to_string_pretty(&header)?.as_bytes())?;
    Ok((bin, json))
}

/// Loads a snapshot written by [`write_snapshot`]; `base` may name either file.
pub fn load_snapshot(base: &Path) -> Result<FlowState> {
    let (bin, json) = paths(base);
    let header: SnapshotHeader = serde_json::from_str(&fs::read_to_string(&json)?)?;
    if header.format != SNAPSHOT_FORMAT {
        return Err(Error::SnapshotFormat(format!(
            "expected format '{SNAPSHOT_FORMAT}', found '{}'",
            header.format
        )));
    }
    let grid = PeriodicGrid::new(header.grid.n1(), header.grid.n2(), header.grid.l1(), header.grid.l2())?;
    let m = header.codim.dim();
    let bytes = fs::read(&bin)?;
    if bytes.len() != 8 * m * grid.len() {
        return Err(Error::SnapshotFormat(format!(
            "{} holds {} bytes, expected {}",
            bin.display(),
            bytes.len(),
            8 * m * grid.len()
        )));
    }
    let mut pert = vec![vec![0.0; grid.len()]; m];
    for (k, chunk) in bytes.chunks_exact(8).enumerate() {
        let v = f64::from_le_bytes(chunk.try_into().expect("chunk of 8 bytes"));
        pert[k % m][k / m] = v;
    }
    let field = MapField::new(grid, header.codim, header.affine, header.offset, pert)?;
    field.check_finite()?;
    Ok(FlowState { t: header.t, field, step_count: header.step_count, last_dt: 0.0 })
}
