//! Flat `key = value` run descriptions.
//!
//! ```text
//! # comments start with '#'
//! grid.n1 = 64
//! grid.n2 = 64
//! map.affine = 0.6, 0, 0, 0.4
//! map.fourier = 1,0,sin,0.1,0.05; 0,1,cos,0.02,0
//! flow.t_end = 1
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::field::{Codim, FourierTerm, Wave};
use crate::grid::PeriodicGrid;
use crate::linalg::Mat2;
use crate::monitor::Check;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub grid: PeriodicGrid,
    pub codim: Codim,
    pub map: MapSpec,
    pub flow: FlowSpec,
    pub checks: CheckSpec,
    pub output: OutputSpec,
    pub seed: u64,
}

/// Seeded random Fourier data: all modes with `max(|k1|, |k2|) <= modes`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomSpec {
    pub modes: u32,
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MapSpec {
    Fourier {
        affine: Mat2,
        offset: [f64; 2],
        terms: Vec<FourierTerm>,
        random: Option<RandomSpec>,
    },
    Potential {
        q: Mat2,
        terms: Vec<FourierTerm>,
        random: Option<RandomSpec>,
    },
    Snapshot {
        path: PathBuf,
    },
}

impl MapSpec {
    pub fn is_lagrangian(&self) -> bool {
        matches!(self, MapSpec::Potential { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowSpec {
    pub t_end: f64,
    pub cfl: f64,
    pub snapshot_every: f64,
    pub max_steps: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckSpec {
    pub enabled: BTreeSet<Check>,
    pub rel_tol: f64,
    pub id_tol: f64,
    pub alpha_margin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSpec {
    pub dir: PathBuf,
    pub csv: bool,
    pub json: bool,
    pub snapshots: bool,
}

/// Every problem found in a config file.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigErrors(pub Vec<String>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, e) in self.0.iter().enumerate() {
            if k > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

const KEYS: &[&str] = &[
    "grid.n1",
    "grid.n2",
    "grid.l1",
    "grid.l2",
    "map.codim",
    "map.kind",
    "map.affine",
    "map.offset",
    "map.fourier",
    "map.random_modes",
    "map.random_amplitude",
    "map.q",
    "map.potential",
    "map.snapshot",
    "flow.t_end",
    "flow.cfl",
    "flow.snapshot_every",
    "flow.max_steps",
    "checks.enabled",
    "checks.rel_tol",
    "checks.id_tol",
    "checks.alpha_margin",
    "output.dir",
    "output.formats",
    "seed",
];

struct Reader {
    values: BTreeMap<String, (usize, String)>,
    errors: Vec<String>,
}

impl Reader {
    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.values.remove(key)
    }

    fn parse<T: FromStr>(&mut self, key: &str, what: &str) -> Option<T> {
        let (line, raw) = self.take(key)?;
        match raw.parse::<T>() {
            Ok(v) => Some(v),
            Err(_) => {
                self.errors.push(format!("line {line}: {key}: expected {what}, got '{raw}'"));
                None
            }
        }
    }

    fn required<T: FromStr>(&mut self, key: &str, what: &str) -> Option<T> {
        if !self.values.contains_key(key) {
            self.errors.push(format!("missing required key {key}"));
            return None;
        }
        self.parse(key, what)
    }

    fn floats(&mut self, key: &str, count: &[usize]) -> Option<Vec<f64>> {
        let (line, raw) = self.take(key)?;
        let parsed: std::result::Result<Vec<f64>, _> = raw.split(',').map(|s| s.trim().parse::<f64>()).collect();
        match parsed {
            Ok(v) if count.contains(&v.len()) && v.iter().all(|x| x.is_finite()) => Some(v),
            Ok(v) => {
                let want: Vec<String> = count.iter().map(usize::to_string).collect();
                self.errors.push(format!(
                    "line {line}: {key}: expected {} finite numbers, got {}",
                    want.join(" or "),
                    v.len()
                ));
                None
            }
            Err(_) => {
                self.errors.push(format!("line {line}: {key}: expected comma-separated numbers, got '{raw}'"));
                None
            }
        }
    }

    fn terms(&mut self, key: &str, components: usize) -> Vec<FourierTerm> {
        let Some((line, raw)) = self.take(key) else {
            return Vec::new();
        };
        let mut out = Vec::new();
        for (n, term) in raw.split(';').map(str::trim).filter(|s| !s.is_empty()).enumerate() {
            match parse_term(term, components) {
                Ok(t) => out.push(t),
                Err(e) => self.errors.push(format!("line {line}: {key}: term {}: {e}", n + 1)),
            }
        }
        out
    }
}

/// `k1,k2,cos|sin,amp...` with one amplitude per component.
fn parse_term(s: &str, components: usize) -> std::result::Result<FourierTerm, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 + components {
        return Err(format!("expected k1,k2,kind and {components} amplitude(s), got '{s}'"));
    }
    let k1 = parts[0].parse::<i32>().map_err(|_| format!("bad mode index '{}'", parts[0]))?;
    let k2 = parts[1].parse::<i32>().map_err(|_| format!("bad mode index '{}'", parts[1]))?;
    let kind = match parts[2].to_ascii_lowercase().as_str() {
        "cos" => Wave::Cos,
        "sin" => Wave::Sin,
        other => return Err(format!("wave kind must be cos or sin, got '{other}'")),
    };
    let amp = parts[3..]
        .iter()
        .map(|a| a.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| format!("bad amplitude '{a}'")))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(FourierTerm { k1, k2, kind, amp })
}

fn matrix(v: &[f64], codim: Codim) -> Mat2 {
    match (codim, v.len()) {
        (Codim::One, 2) => [[v[0], v[1]], [0.0, 0.0]],
        (_, 4) => [[v[0], v[1]], [v[2], v[3]]],
        _ => [[0.0; 2]; 2],
    }
}

/// Parses and validates a config, collecting every error.
pub fn parse_config(text: &str) -> std::result::Result<RunConfig, ConfigErrors> {
    let mut values = BTreeMap::new();
    let mut errors = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((k, v)) = content.split_once('=') else {
            errors.push(format!("line {line}: expected 'key = value', got '{content}'"));
            continue;
        };
        let (k, v) = (k.trim().to_string(), v.trim().to_string());
        if !KEYS.contains(&k.as_str()) {
            errors.push(format!("line {line}: unknown key '{k}'"));
        } else if let Some((prev, _)) = values.insert(k.clone(), (line, v)) {
            errors.push(format!("line {line}: duplicate key '{k}' (first on line {prev})"));
        }
    }
    let mut r = Reader { values, errors };

    let n1 = r.required::<usize>("grid.n1", "an integer");
    let n2 = r.required::<usize>("grid.n2", "an integer");
    let l1 = r.parse::<f64>("grid.l1", "a number").unwrap_or(std::f64::consts::TAU);
    let l2 = r.parse::<f64>("grid.l2", "a number").unwrap_or(std::f64::consts::TAU);
    for (name, n) in [("n1", n1), ("n2", n2)] {
        if let Some(n) = n {
            if n < 8 || n % 2 != 0 {
                r.errors.push(format!("grid.{name}: {name} must be even and >= 8, got {n}"));
            }
        }
    }
    for (name, l) in [("l1", l1), ("l2", l2)] {
        if !(l > 0.0 && l.is_finite()) {
            r.errors.push(format!("grid.{name}: must be positive, got {l}"));
        }
    }
    let grid = match (n1, n2) {
        (Some(a), Some(b)) => PeriodicGrid::new(a, b, l1, l2).ok(),
        _ => None,
    };

    let codim = match r.parse::<usize>("map.codim", "1 or 2").unwrap_or(2) {
        1 => Codim::One,
        2 => Codim::Two,
        other => {
            r.errors.push(format!("map.codim: codimension must be 1 or 2, got {other}"));
            Codim::Two
        }
    };
    let m = codim.dim();
    let kind = r.take("map.kind").map(|(_, v)| v).unwrap_or_else(|| "affine+fourier".into());
    let random = |r: &mut Reader| -> Option<RandomSpec> {
        let modes = r.parse::<u32>("map.random_modes", "a nonnegative integer");
        let amplitude = r.parse::<f64>("map.random_amplitude", "a number");
        match (modes, amplitude) {
            (Some(modes), Some(amplitude)) if modes > 0 && amplitude >= 0.0 => Some(RandomSpec { modes, amplitude }),
            (None, None) => None,
            (Some(0), _) | (None, Some(_)) | (Some(_), None) => {
                r.errors.push("map.random_modes and map.random_amplitude must be given together, with modes >= 1".into());
                None
            }
            _ => {
                r.errors.push("map.random_amplitude must be nonnegative".into());
                None
            }
        }
    };
    let forbid = |r: &mut Reader, keys: &[&str], kind: &str| {
        for k in keys {
            if r.take(k).is_some() {
                r.errors.push(format!("{k} is not used by map.kind = {kind}"));
            }
        }
    };
    let map = match kind.as_str() {
        "affine+fourier" | "affine" | "fourier" => {
            let affine = r.floats("map.affine", &[2 * m]).map(|v| matrix(&v, codim)).unwrap_or([[0.0; 2]; 2]);
            let offset = r.floats("map.offset", &[m]).map(|v| [v[0], v.get(1).copied().unwrap_or(0.0)]).unwrap_or([0.0; 2]);
            let terms = r.terms("map.fourier", m);
            let random = random(&mut r);
            forbid(&mut r, &["map.q", "map.potential", "map.snapshot"], &kind);
            Some(MapSpec::Fourier { affine, offset, terms, random })
        }
        "potential" => {
            if codim != Codim::Two {
                r.errors.push("map.kind = potential requires map.codim = 2".into());
            }
            if let Some(g) = &grid {
                if !g.is_square() {
                    r.errors.push(format!(
                        "map.kind = potential requires a square torus (J is an isometry only when l1 = l2), got {} x {}",
                        g.l1(),
                        g.l2()
                    ));
                }
            }
            let q = r.floats("map.q", &[4]).map(|v| matrix(&v, Codim::Two)).unwrap_or([[0.0; 2]; 2]);
            if (q[0][1] - q[1][0]).abs() > 0.0 {
                r.errors.push("map.q must be symmetric".into());
            }
            let terms = r.terms("map.potential", 1);
            let random = random(&mut r);
            forbid(&mut r, &["map.affine", "map.offset", "map.fourier", "map.snapshot"], &kind);
            Some(MapSpec::Potential { q, terms, random })
        }
        "snapshot" => {
            let path = r.take("map.snapshot").map(|(_, v)| PathBuf::from(v));
            if path.is_none() {
                r.errors.push("map.kind = snapshot requires map.snapshot".into());
            }
            forbid(
                &mut r,
                &["map.affine", "map.offset", "map.fourier", "map.q", "map.potential", "map.random_modes", "map.random_amplitude"],
                &kind,
            );
            path.map(|path| MapSpec::Snapshot { path })
        }
        other => {
            r.errors.push(format!("map.kind: expected affine+fourier, potential or snapshot, got '{other}'"));
            None
        }
    };

    let t_end = r.required::<f64>("flow.t_end", "a number");
    if let Some(t) = t_end {
        if !(t > 0.0 && t.is_finite()) {
            r.errors.push(format!("flow.t_end must be positive, got {t}"));
        }
    }
    let cfl = r.parse::<f64>("flow.cfl", "a number").unwrap_or(0.5);
    if !(cfl > 0.0 && cfl <= 1.0) {
        r.errors.push(format!("flow.cfl must lie in (0, 1], got {cfl}"));
    }
    let snapshot_every = r.parse::<f64>("flow.snapshot_every", "a number").or(t_end.map(|t| t / 10.0)).unwrap_or(1.0);
    if !(snapshot_every > 0.0) {
        r.errors.push(format!("flow.snapshot_every must be positive, got {snapshot_every}"));
    }
    let max_steps = r.parse::<u64>("flow.max_steps", "a nonnegative integer").unwrap_or(u64::MAX);

    let lagrangian = map.as_ref().is_some_and(MapSpec::is_lagrangian);
    let enabled = match r.take("checks.enabled") {
        None => Check::applicable(codim, lagrangian),
        Some((_, v)) if v.trim() == "all" => Check::applicable(codim, lagrangian),
        Some((_, v)) if v.trim() == "none" => BTreeSet::new(),
        Some((line, v)) => {
            let mut set = BTreeSet::new();
            for name in v.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                match name.parse::<Check>() {
                    Ok(c) if c.applies_to(codim, lagrangian) => {
                        set.insert(c);
                    }
                    Ok(c) => r.errors.push(format!(
                        "line {line}: check '{c}' is inconsistent with codimension {m}{}",
                        if lagrangian { " Lagrangian data" } else { "" }
                    )),
                    Err(e) => r.errors.push(format!("line {line}: checks.enabled: {e}")),
                }
            }
            set
        }
    };
    let rel_tol = r.parse::<f64>("checks.rel_tol", "a number").unwrap_or(0.02);
    let id_tol = r.parse::<f64>("checks.id_tol", "a number").unwrap_or(1e-8);
    let alpha_margin = r.parse::<f64>("checks.alpha_margin", "a number").unwrap_or(0.05);
    if !(rel_tol >= 0.0) || !(id_tol >= 0.0) {
        r.errors.push("checks.rel_tol and checks.id_tol must be nonnegative".into());
    }
    if !(alpha_margin > 0.0 && alpha_margin < 1.0) {
        r.errors.push(format!("checks.alpha_margin must lie in (0, 1), got {alpha_margin}"));
    }

    let dir = r.take("output.dir").map(|(_, v)| PathBuf::from(v)).unwrap_or_else(|| PathBuf::from("gmcf-out"));
    let mut output = OutputSpec { dir, csv: true, json: true, snapshots: false };
    if let Some((line, v)) = r.take("output.formats") {
        output.csv = false;
        output.json = false;
        for f in v.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match f {
                "csv" => output.csv = true,
                "json" => output.json = true,
                "snapshot" | "snapshots" => output.snapshots = true,
                other => r.errors.push(format!("line {line}: output.formats: unknown format '{other}'")),
            }
        }
    }
    let seed = r.parse::<u64>("seed", "a nonnegative integer").unwrap_or(0);

    if !r.errors.is_empty() {
        return Err(ConfigErrors(r.errors));
    }
    match (grid, map, t_end) {
        (Some(grid), Some(map), Some(t_end)) => Ok(RunConfig {
            grid,
            codim,
            map,
            flow: FlowSpec { t_end, cfl, snapshot_every, max_steps },
            checks: CheckSpec { enabled, rel_tol, id_tol, alpha_margin },
            output,
            seed,
        }),
        _ => Err(ConfigErrors(vec!["incomplete configuration".into()])),
    }
}
