//! The verification experiments. Each suite runs a fixed family of checks
//! and returns a [`Report`]; identities that fail are recorded, never
//! raised. Errors are reserved for invalid input.
//!
//! Experiment files use the `key = value` syntax of the measure config,
//! with these extra keys:
//!
//! ```text
//! suite = charlier-orth        # required
//! phi = (poly 0.5 -0.4)        # first direction (suite-specific default)
//! psi = (poly 0.2 0.6)         # second direction
//! n = 1                        # order(s); omit for the full default grid
//! m = 2
//! samples = 100000
//! c = 0.4                      # laguerre-classical only
//! out = report.json
//! ```
//!
//! Measure keys (`window`, `density`, `levy`, `quadrature_order`) are
//! optional; when absent the suite's default measure is used. `seed` is
//! read either way and defaults to 0.

mod compound;
mod gamma;
mod poisson;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::mc::{Execution, McPlan};
use crate::measures::config::{parse_entries, Entry, MEASURE_KEYS};
use crate::measures::{IntensityMeasure, LevyMeasure, LevySpec, MeasureConfig, TestFunction, Window};
use crate::report::Report;
use crate::rng::StreamKey;

pub use gamma::combinatorics;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Suite {
    LaplaceCheck,
    Mecke,
    Rn,
    CharlierOrth,
    CreationIterate,
    FockBounds,
    UsigmaIsometry,
    CpOperators,
    GammaInnerThreepath,
    LaguerreOrth,
    LaguerreClassical,
}

impl Suite {
    pub const ALL: [Suite; 11] = [
        Suite::LaplaceCheck,
        Suite::Mecke,
        Suite::Rn,
        Suite::CharlierOrth,
        Suite::CreationIterate,
        Suite::FockBounds,
        Suite::UsigmaIsometry,
        Suite::CpOperators,
        Suite::GammaInnerThreepath,
        Suite::LaguerreOrth,
        Suite::LaguerreClassical,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::LaplaceCheck => "laplace-check",
            Suite::Mecke => "mecke",
            Suite::Rn => "rn",
            Suite::CharlierOrth => "charlier-orth",
            Suite::CreationIterate => "creation-iterate",
            Suite::FockBounds => "fock-bounds",
            Suite::UsigmaIsometry => "usigma-isometry",
            Suite::CpOperators => "cp-operators",
            Suite::GammaInnerThreepath => "gamma-inner-threepath",
            Suite::LaguerreOrth => "laguerre-orth",
            Suite::LaguerreClassical => "laguerre-classical",
        }
    }

    /// The measure a suite runs on when the experiment names none.
    pub fn default_measure(self) -> MeasureConfig {
        let unit = Window::interval(0.0, 1.0).expect("unit interval");
        let mut cfg = MeasureConfig::new(unit);
        match self {
            Suite::CreationIterate => cfg.density = TestFunction::constant(3.0),
            Suite::Mecke | Suite::Rn | Suite::CharlierOrth | Suite::FockBounds => {
                cfg.density = TestFunction::constant(2.0)
            }
            Suite::UsigmaIsometry | Suite::CpOperators => {
                cfg.density = TestFunction::constant(2.0);
                cfg.levy = LevySpec::Telegraph;
            }
            Suite::LaplaceCheck | Suite::GammaInnerThreepath | Suite::LaguerreOrth => {
                cfg.levy = LevySpec::Gamma { epsilon: 1e-3 };
            }
            Suite::LaguerreClassical => {
                cfg.window = Window::interval(0.0, 2.5).expect("classical window");
                cfg.levy = LevySpec::Gamma { epsilon: 1e-3 };
            }
        }
        cfg
    }

    pub fn default_samples(self) -> usize {
        match self {
            Suite::CreationIterate => 1_000,
            Suite::GammaInnerThreepath => 0,
            _ => 100_000,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Config { line: 0, column: 0, message: format!("unknown suite {s:?}") })
    }
}

const SPEC_KEYS: [&str; 8] = ["suite", "phi", "psi", "n", "m", "samples", "c", "out"];

/// One experiment: a suite plus the inputs it reads.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub suite: Suite,
    /// `None` selects the suite's default measure.
    pub measure: Option<MeasureConfig>,
    pub seed: u64,
    pub phi: Option<TestFunction>,
    pub psi: Option<TestFunction>,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub samples: Option<usize>,
    pub c: Option<f64>,
    pub out: Option<PathBuf>,
}

impl ExperimentSpec {
    pub fn new(suite: Suite) -> Self {
        Self { suite, measure: None, seed: 0, phi: None, psi: None, n: None, m: None, samples: None, c: None, out: None }
    }

    pub fn measure_config(&self) -> MeasureConfig {
        self.measure.clone().unwrap_or_else(|| self.suite.default_measure())
    }
}

fn parse_function(e: &Entry) -> Result<TestFunction> {
    TestFunction::parse(&e.value).map_err(|err| match err {
        Error::Config { column, message, .. } => e.error(column.saturating_sub(1), message),
        other => e.error(0, other.to_string()),
    })
}

fn parse_number<T: FromStr>(e: &Entry, what: &str) -> Result<T> {
    e.value.parse().map_err(|_| e.error(0, format!("{} must be {what}", e.key)))
}

impl FromStr for ExperimentSpec {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let entries = parse_entries(text)?;
        if let Some(e) = entries.iter().find(|e| !SPEC_KEYS.contains(&e.key.as_str()) && !MEASURE_KEYS.contains(&e.key.as_str())) {
            return Err(Error::config(e.line, 1, format!("unknown key {}", e.key)));
        }
        let get = |k: &str| entries.iter().find(|e| e.key == k);
        let suite_entry = get("suite").ok_or_else(|| Error::config(1, 1, "missing required key `suite`"))?;
        let suite: Suite = suite_entry.value.parse().map_err(|_| suite_entry.error(0, format!("unknown suite {:?}", suite_entry.value)))?;
        let mut spec = ExperimentSpec::new(suite);
        let measure_entries: Vec<Entry> =
            entries.iter().filter(|e| MEASURE_KEYS.contains(&e.key.as_str()) && e.key != "seed").cloned().collect();
        if !measure_entries.is_empty() {
            let mut with_seed = measure_entries;
            with_seed.extend(get("seed").cloned());
            spec.measure = Some(MeasureConfig::from_entries(&with_seed)?);
        }
        if let Some(e) = get("seed") {
            spec.seed = parse_number(e, "a non-negative integer")?;
        }
        if let Some(e) = get("phi") {
            spec.phi = Some(parse_function(e)?);
        }
        if let Some(e) = get("psi") {
            spec.psi = Some(parse_function(e)?);
        }
        if let Some(e) = get("n") {
            spec.n = Some(parse_number(e, "a non-negative integer")?);
        }
        if let Some(e) = get("m") {
            spec.m = Some(parse_number(e, "a non-negative integer")?);
        }
        if let Some(e) = get("samples") {
            spec.samples = Some(parse_number::<usize>(e, "a positive integer")?.max(1));
        }
        if let Some(e) = get("c") {
            spec.c = Some(parse_number(e, "a number")?);
        }
        if let Some(e) = get("out") {
            spec.out = Some(PathBuf::from(&e.value));
        }
        Ok(spec)
    }
}

/// Everything a suite body needs, resolved from an [`ExperimentSpec`].
pub(crate) struct Context<'a> {
    pub spec: &'a ExperimentSpec,
    pub sigma: IntensityMeasure,
    pub rho: LevyMeasure,
    pub samples: usize,
    pub exec: Execution,
    key: StreamKey,
}

impl Context<'_> {
    /// A Monte Carlo plan on sub-stream `k` of the experiment's key.
    pub fn plan(&self, k: u64) -> McPlan {
        self.plan_with(k, self.samples)
    }

    pub fn plan_with(&self, k: u64, samples: usize) -> McPlan {
        McPlan::new(samples, self.key.substream(k)).with_exec(self.exec)
    }

    pub fn key(&self, k: u64) -> StreamKey {
        self.key.substream(k)
    }

    /// The Gamma truncation level: the configured one, or 10⁻³.
    pub fn epsilon(&self) -> f64 {
        match &self.rho {
            LevyMeasure::Gamma(g) => g.epsilon(),
            _ => 1e-3,
        }
    }

    pub fn phi_or(&self, default: TestFunction) -> TestFunction {
        self.spec.phi.clone().unwrap_or(default)
    }

    pub fn psi_or(&self, default: TestFunction) -> TestFunction {
        self.spec.psi.clone().unwrap_or(default)
    }

    /// `[(n, m)]` if both orders are given, else the full grid up to `top`.
    pub fn grid(&self, top: usize) -> Vec<(usize, usize)> {
        match (self.spec.n, self.spec.m) {
            (Some(n), Some(m)) => vec![(n, m)],
            (Some(n), None) => vec![(n, n)],
            _ => (0..=top).flat_map(|n| (0..=top).map(move |m| (n, m))).collect(),
        }
    }

    pub fn report(&self) -> Report {
        let mut r = Report::new(self.spec.suite.name(), self.spec.seed);
        let cfg = self.spec.measure_config();
        r.input("measure", cfg.to_string().trim_end().replace('\n', "; "));
        r.input("samples", self.samples);
        if let Some(p) = &self.spec.phi {
            r.input("phi", p);
        }
        if let Some(p) = &self.spec.psi {
            r.input("psi", p);
        }
        if let Some(n) = self.spec.n {
            r.input("n", n);
        }
        if let Some(m) = self.spec.m {
            r.input("m", m);
        }
        if let Some(c) = self.spec.c {
            r.input("c", format!("{c:?}"));
        }
        r
    }
}

/// Runs one experiment. Identity failures show up in the report's `pass`
/// flag; `Err` means the inputs were unusable.
pub fn run(spec: &ExperimentSpec, exec: Execution) -> Result<Report> {
    let cfg = spec.measure_config();
    let cx = Context {
        spec,
        sigma: cfg.intensity()?,
        rho: cfg.levy_measure()?,
        samples: spec.samples.unwrap_or_else(|| spec.suite.default_samples()),
        exec,
        key: StreamKey::new(spec.seed, 0),
    };
    match spec.suite {
        Suite::LaplaceCheck => poisson::laplace_check(&cx),
        Suite::Mecke => poisson::mecke(&cx),
        Suite::Rn => poisson::rn(&cx),
        Suite::CharlierOrth => poisson::charlier_orth(&cx),
        Suite::CreationIterate => poisson::creation_iterate(&cx),
        Suite::FockBounds => poisson::fock_bounds(&cx),
        Suite::UsigmaIsometry => compound::usigma_isometry(&cx),
        Suite::CpOperators => compound::cp_operators(&cx),
        Suite::GammaInnerThreepath => gamma::threepath(&cx),
        Suite::LaguerreOrth => gamma::laguerre_orth(&cx),
        Suite::LaguerreClassical => gamma::laguerre_classical(&cx),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!(matches!("nope".parse::<Suite>(), Err(Error::Config { .. })));
    }

    #[test]
    fn parses_experiment() {
        let text = "suite = charlier-orth\nn = 1\nm = 2\nsamples = 5000\nseed = 9\nphi = (poly 0.5 -0.4)\n";
        let spec: ExperimentSpec = text.parse().unwrap();
        assert_eq!(spec.suite, Suite::CharlierOrth);
        assert_eq!((spec.n, spec.m, spec.samples, spec.seed), (Some(1), Some(2), Some(5000), 9));
        assert!(spec.measure.is_none());
        assert_eq!(spec.phi, Some(TestFunction::poly([0.5, -0.4])));
        let with_measure: ExperimentSpec = "suite = rn\nwindow = [0, 2]\nseed = 3".parse().unwrap();
        let m = with_measure.measure.unwrap();
        assert_eq!(m.window, Window::interval(0.0, 2.0).unwrap());
        assert_eq!(m.seed, 3);
    }

    #[test]
    fn experiment_errors_carry_positions() {
        let err = "suite = wat".parse::<ExperimentSpec>().unwrap_err();
        assert_eq!(err, Error::config(1, 9, "unknown suite \"wat\""));
        let err = "suite = rn\nn = x".parse::<ExperimentSpec>().unwrap_err();
        assert!(matches!(err, Error::Config { line: 2, column: 5, .. }));
        let err = "n = 1".parse::<ExperimentSpec>().unwrap_err();
        assert!(matches!(err, Error::Config { .. }));
        let err = "suite = rn\nbogus = 1".parse::<ExperimentSpec>().unwrap_err();
        assert!(matches!(err, Error::Config { line: 2, .. }));
        let err = "suite = rn\ndensity = (const 1)".parse::<ExperimentSpec>().unwrap_err();
        assert!(matches!(err, Error::Config { .. }));
    }

    #[test]
    fn small_runs_are_deterministic() {
        for s in Suite::ALL {
            let mut spec = ExperimentSpec::new(s);
            spec.samples = Some(200);
            spec.seed = 5;
            if s == Suite::GammaInnerThreepath {
                spec.n = Some(4);
            }
            let a = run(&spec, Execution::default()).unwrap();
            let b = run(&spec, Execution::Sequential).unwrap();
            assert_eq!(a.to_json(), b.to_json(), "{s}");
            assert!(!a.identities.is_empty(), "{s}");
        }
    }
}
