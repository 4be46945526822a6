//! Plain-text measure specifications.
//!
//! ```text
//! # comments run to the end of the line
//! window = [0, 1] x [0, 2]      # or a single interval such as [0, 1]
//! density = (sum (const 1) (poly 0 0.5))
//! levy = gamma(0.001)           # poisson | telegraph | gamma(eps) | atoms(s:w, ...)
//! quadrature_order = 32
//! seed = 7
//! ```
//!
//! Only `window` is required. `density` defaults to `(const 1)`, `levy` to
//! `poisson` (the unit jump ε₁), `quadrature_order` to 32 and `seed` to 0.
//! Numbers are written in Rust's shortest round-trip form, so
//! `parse(display(c)) == c` exactly.

use std::fmt;
use std::str::FromStr;

use super::{IntensityMeasure, LevyMeasure, TestFunction, Window, DEFAULT_ORDER};
use crate::error::{Error, Result};

/// One `key = value` line.
#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub line: usize,
    /// 1-based column where `value` starts.
    pub column: usize,
}

impl Entry {
    /// A config error located `offset` characters into the value.
    pub fn error(&self, offset: usize, msg: impl Into<String>) -> Error {
        Error::config(self.line, self.column + offset, msg)
    }
}

/// Splits `key = value` text into entries, dropping comments and blank
/// lines. Duplicate keys are rejected.
pub fn parse_entries(text: &str) -> Result<Vec<Entry>> {
    let mut out: Vec<Entry> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        if line.trim().is_empty() {
            continue;
        }
        let eq = line.find('=').ok_or_else(|| Error::config(i + 1, 1, "expected `key = value`"))?;
        let key = line[..eq].trim();
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(Error::config(i + 1, 1, format!("invalid key {key:?}")));
        }
        let rest = &line[eq + 1..];
        let lead = rest.len() - rest.trim_start().len();
        let value = rest.trim();
        if value.is_empty() {
            return Err(Error::config(i + 1, eq + 2, format!("missing value for {key}")));
        }
        if out.iter().any(|e| e.key == key) {
            return Err(Error::config(i + 1, 1, format!("duplicate key {key}")));
        }
        out.push(Entry { key: key.to_string(), value: value.to_string(), line: i + 1, column: eq + 2 + lead });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub enum LevySpec {
    /// ε₁; compound Poisson is plain Poisson.
    Poisson,
    /// ½(ε₋₁ + ε₁).
    Telegraph,
    /// Gamma Lévy measure truncated at `epsilon`.
    Gamma { epsilon: f64 },
    /// `Σ w ε_s` given as `(s, w)` pairs.
    Atoms(Vec<(f64, f64)>),
}

impl LevySpec {
    pub fn measure(&self) -> Result<LevyMeasure> {
        match self {
            LevySpec::Poisson => Ok(LevyMeasure::unit_jump()),
            LevySpec::Telegraph => Ok(LevyMeasure::telegraph()),
            LevySpec::Gamma { epsilon } => LevyMeasure::gamma(*epsilon),
            LevySpec::Atoms(a) => LevyMeasure::discrete(a.clone()),
        }
    }
}

impl fmt::Display for LevySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LevySpec::Poisson => write!(f, "poisson"),
            LevySpec::Telegraph => write!(f, "telegraph"),
            LevySpec::Gamma { epsilon } => write!(f, "gamma({epsilon:?})"),
            LevySpec::Atoms(a) => {
                let parts: Vec<String> = a.iter().map(|(s, w)| format!("{s:?}:{w:?}")).collect();
                write!(f, "atoms({})", parts.join(", "))
            }
        }
    }
}

fn parse_levy(e: &Entry) -> Result<LevySpec> {
    let v = e.value.as_str();
    let call = |name: &str| -> Option<&str> { v.strip_prefix(name)?.trim_start().strip_prefix('(')?.strip_suffix(')') };
    let spec = match v {
        "poisson" => LevySpec::Poisson,
        "telegraph" => LevySpec::Telegraph,
        _ => {
            if let Some(arg) = call("gamma") {
                let epsilon = arg.trim().parse().map_err(|_| e.error(v.find('(').unwrap() + 1, "gamma(eps) needs a number"))?;
                LevySpec::Gamma { epsilon }
            } else if let Some(args) = call("atoms") {
                let base = v.find('(').unwrap() + 1;
                let mut atoms = Vec::new();
                let mut off = base;
                for part in args.split(',') {
                    let col = off + (part.len() - part.trim_start().len());
                    let (s, w) = part
                        .trim()
                        .split_once(':')
                        .and_then(|(s, w)| Some((s.trim().parse().ok()?, w.trim().parse().ok()?)))
                        .ok_or_else(|| e.error(col, format!("expected `jump:weight`, found {:?}", part.trim())))?;
                    atoms.push((s, w));
                    off += part.len() + 1;
                }
                LevySpec::Atoms(atoms)
            } else {
                return Err(e.error(0, format!("unknown Lévy measure {v:?}")));
            }
        }
    };
    spec.measure().map_err(|err| e.error(0, err.to_string()))?;
    Ok(spec)
}

fn parse_window(e: &Entry) -> Result<Window> {
    let v = e.value.as_str();
    let mut bounds = Vec::new();
    let mut rest = v;
    let mut off = 0;
    loop {
        let lead = rest.len() - rest.trim_start().len();
        off += lead;
        rest = rest.trim_start();
        let body = rest.strip_prefix('[').ok_or_else(|| e.error(off, "expected '['"))?;
        let close = body.find(']').ok_or_else(|| e.error(off, "missing ']'"))?;
        let (a, b) = body[..close]
            .split_once(',')
            .and_then(|(a, b)| Some((a.trim().parse::<f64>().ok()?, b.trim().parse::<f64>().ok()?)))
            .ok_or_else(|| e.error(off + 1, "expected `[lo, hi]`"))?;
        bounds.push([a, b]);
        off += close + 2;
        rest = &body[close + 1..];
        let lead = rest.len() - rest.trim_start().len();
        rest = rest.trim_start();
        if rest.is_empty() {
            break;
        }
        off += lead;
        rest = rest.strip_prefix('x').ok_or_else(|| e.error(off, "expected 'x' between intervals"))?;
        off += 1;
    }
    let w = match bounds.as_slice() {
        [x] => Window::interval(x[0], x[1]),
        [x, y] => Window::rect(*x, *y),
        _ => return Err(e.error(0, "only 1D and 2D windows are supported")),
    };
    w.map_err(|err| e.error(0, err.to_string()))
}

fn display_window(w: &Window) -> String {
    let parts: Vec<String> = (0..w.dim).map(|i| format!("[{:?}, {:?}]", w.lo[i], w.hi[i])).collect();
    parts.join(" x ")
}

/// Keys understood by [`MeasureConfig`].
pub const MEASURE_KEYS: [&str; 5] = ["window", "density", "levy", "quadrature_order", "seed"];

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureConfig {
    pub window: Window,
    pub density: TestFunction,
    pub levy: LevySpec,
    pub quadrature_order: usize,
    pub seed: u64,
}

impl MeasureConfig {
    pub fn new(window: Window) -> Self {
        Self { window, density: TestFunction::constant(1.0), levy: LevySpec::Poisson, quadrature_order: DEFAULT_ORDER, seed: 0 }
    }

    /// Builds from parsed entries, reading only [`MEASURE_KEYS`].
    pub fn from_entries(entries: &[Entry]) -> Result<Self> {
        let get = |k: &str| entries.iter().find(|e| e.key == k);
        let window = match get("window") {
            Some(e) => parse_window(e)?,
            None => return Err(Error::config(entries.last().map_or(1, |e| e.line), 1, "missing required key `window`")),
        };
        let mut cfg = Self::new(window);
        if let Some(e) = get("density") {
            cfg.density = TestFunction::parse(&e.value).map_err(|err| match err {
                Error::Config { column, message, .. } => e.error(column - 1, message),
                other => other,
            })?;
        }
        if let Some(e) = get("levy") {
            cfg.levy = parse_levy(e)?;
        }
        if let Some(e) = get("quadrature_order") {
            cfg.quadrature_order = e.value.parse().ok().filter(|&n| n > 0 && n <= 512).ok_or_else(|| e.error(0, "quadrature_order must be an integer in 1..=512"))?;
        }
        if let Some(e) = get("seed") {
            cfg.seed = e.value.parse().map_err(|_| e.error(0, "seed must be a non-negative integer"))?;
        }
        if let Err(err) = cfg.intensity() {
            let at = get("density").or(get("window")).unwrap();
            return Err(at.error(0, err.to_string()));
        }
        Ok(cfg)
    }

    pub fn intensity(&self) -> Result<IntensityMeasure> {
        IntensityMeasure::new(self.window, self.density.clone(), self.quadrature_order)
    }

    pub fn levy_measure(&self) -> Result<LevyMeasure> {
        self.levy.measure()
    }
}

impl FromStr for MeasureConfig {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let entries = parse_entries(text)?;
        if let Some(e) = entries.iter().find(|e| !MEASURE_KEYS.contains(&e.key.as_str())) {
            return Err(Error::config(e.line, 1, format!("unknown key {}", e.key)));
        }
        Self::from_entries(&entries)
    }
}

impl fmt::Display for MeasureConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "window = {}", display_window(&self.window))?;
        writeln!(f, "density = {}", self.density)?;
        writeln!(f, "levy = {}", self.levy)?;
        writeln!(f, "quadrature_order = {}", self.quadrature_order)?;
        writeln!(f, "seed = {}", self.seed)
    }
}
