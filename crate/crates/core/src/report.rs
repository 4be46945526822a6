//! Machine-readable verification reports.
//!
//! Every [`IdentityCheck`] records the numbers its verdict was derived from
//! (`statistic` against `threshold`), so a report can be audited without
//! rerunning the experiment. Non-finite values serialise as `null`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::stats::Estimate;

pub const SCHEMA_VERSION: u32 = 1;

/// Monte Carlo tolerance in standard errors.
pub const SIGMA_MULTIPLIER: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    /// `|estimate - target| <= 3 se + budget`
    McVsValue,
    /// `|a - b| <= 3 sqrt(se_a^2 + se_b^2) + budget`
    McVsMc,
    /// `|a - b| <= tol * max(|a|, |b|, 1)`
    Relative,
    /// `|a - b| <= tol * max(|a|, |b|)`
    StrictRelative,
    /// `|a - b| <= tol`
    Absolute,
    /// `violations == 0`
    NoViolations,
    /// exact equality
    Exact,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub identity: String,
    pub rule: Rule,
    pub estimates: Vec<f64>,
    pub standard_errors: Vec<f64>,
    pub deterministic_budget: f64,
    pub statistic: f64,
    pub threshold: f64,
    pub pass: bool,
}

fn verdict(statistic: f64, threshold: f64) -> bool {
    statistic.is_finite() && statistic <= threshold
}

impl IdentityCheck {
    /// Monte Carlo estimate against a deterministic target.
    pub fn mc_vs_value(identity: impl Into<String>, est: Estimate, target: f64, budget: f64) -> Self {
        let statistic = (est.mean - target).abs();
        let threshold = SIGMA_MULTIPLIER * est.std_err + budget;
        Self {
            identity: identity.into(),
            rule: Rule::McVsValue,
            estimates: vec![est.mean, target],
            standard_errors: vec![est.std_err, 0.0],
            deterministic_budget: budget,
            statistic,
            threshold,
            pass: verdict(statistic, threshold),
        }
    }

    /// Two independent Monte Carlo estimates of the same quantity.
    pub fn mc_vs_mc(identity: impl Into<String>, a: Estimate, b: Estimate, budget: f64) -> Self {
        let statistic = (a.mean - b.mean).abs();
        let combined = (a.std_err.powi(2) + b.std_err.powi(2)).sqrt();
        let threshold = SIGMA_MULTIPLIER * combined + budget;
        Self {
            identity: identity.into(),
            rule: Rule::McVsMc,
            estimates: vec![a.mean, b.mean],
            standard_errors: vec![a.std_err, b.std_err],
            deterministic_budget: budget,
            statistic,
            threshold,
            pass: verdict(statistic, threshold),
        }
    }

    /// Deterministic agreement to a relative tolerance (floored at scale 1).
    pub fn relative(identity: impl Into<String>, a: f64, b: f64, tol: f64) -> Self {
        let statistic = (a - b).abs() / a.abs().max(b.abs()).max(1.0);
        Self {
            identity: identity.into(),
            rule: Rule::Relative,
            estimates: vec![a, b],
            standard_errors: vec![0.0, 0.0],
            deterministic_budget: 0.0,
            statistic,
            threshold: tol,
            pass: verdict(statistic, tol),
        }
    }

    /// Relative agreement without the unit floor.
    pub fn strict_relative(identity: impl Into<String>, a: f64, b: f64, tol: f64) -> Self {
        let diff = (a - b).abs();
        let statistic = if diff == 0.0 { 0.0 } else { diff / a.abs().max(b.abs()) };
        Self {
            identity: identity.into(),
            rule: Rule::StrictRelative,
            estimates: vec![a, b],
            standard_errors: vec![0.0, 0.0],
            deterministic_budget: 0.0,
            statistic,
            threshold: tol,
            pass: verdict(statistic, tol),
        }
    }

    pub fn absolute(identity: impl Into<String>, a: f64, b: f64, tol: f64) -> Self {
        let statistic = (a - b).abs();
        Self {
            identity: identity.into(),
            rule: Rule::Absolute,
            estimates: vec![a, b],
            standard_errors: vec![0.0, 0.0],
            deterministic_budget: 0.0,
            statistic,
            threshold: tol,
            pass: verdict(statistic, tol),
        }
    }

    /// A batch of pointwise checks; passes iff none were violated.
    pub fn no_violations(identity: impl Into<String>, violations: usize, total: usize, worst: f64) -> Self {
        Self {
            identity: identity.into(),
            rule: Rule::NoViolations,
            estimates: vec![violations as f64, total as f64, worst],
            standard_errors: vec![],
            deterministic_budget: 0.0,
            statistic: violations as f64,
            threshold: 0.0,
            pass: violations == 0,
        }
    }

    pub fn exact(identity: impl Into<String>, equal: bool) -> Self {
        Self {
            identity: identity.into(),
            rule: Rule::Exact,
            estimates: vec![],
            standard_errors: vec![],
            deterministic_budget: 0.0,
            statistic: if equal { 0.0 } else { 1.0 },
            threshold: 0.0,
            pass: equal,
        }
    }
}

/// A comparison table, emitted as CSV by the CLI.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema: u32,
    pub suite: String,
    pub seed: u64,
    pub inputs: BTreeMap<String, String>,
    pub identities: Vec<IdentityCheck>,
    /// Measured auxiliary quantities (e.g. normalisation constants).
    pub measurements: BTreeMap<String, serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<Table>,
    pub pass: bool,
}

impl Report {
    pub fn new(suite: impl Into<String>, seed: u64) -> Self {
        Self {
            schema: SCHEMA_VERSION,
            suite: suite.into(),
            seed,
            inputs: BTreeMap::new(),
            identities: Vec::new(),
            measurements: BTreeMap::new(),
            table: None,
            pass: true,
        }
    }

    pub fn input(&mut self, key: impl Into<String>, value: impl ToString) -> &mut Self {
        self.inputs.insert(key.into(), value.to_string());
        self
    }

    pub fn push(&mut self, check: IdentityCheck) -> &mut Self {
        self.pass &= check.pass;
        self.identities.push(check);
        self
    }

    pub fn measure(&mut self, key: impl Into<String>, value: serde_json::Value) -> &mut Self {
        self.measurements.insert(key.into(), value);
        self
    }

    pub fn failures(&self) -> impl Iterator<Item = &IdentityCheck> {
        self.identities.iter().filter(|c| !c.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialisation")
    }

    /// One CSV row per identity, or the comparison table when present.
    pub fn to_csv(&self) -> String {
        if let Some(t) = &self.table {
            return t.to_csv();
        }
        let mut t = Table {
            header: ["identity", "rule", "estimates", "standard_errors", "budget", "statistic", "threshold", "pass"]
                .map(String::from)
                .to_vec(),
            rows: Vec::new(),
        };
        for c in &self.identities {
            let join = |v: &[f64]| v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(";");
            t.rows.push(vec![
                format!("\"{}\"", c.identity.replace('"', "'")),
                serde_json::to_string(&c.rule).unwrap().trim_matches('"').to_string(),
                join(&c.estimates),
                join(&c.standard_errors),
                format!("{:e}", c.deterministic_budget),
                format!("{:e}", c.statistic),
                format!("{:e}", c.threshold),
                c.pass.to_string(),
            ]);
        }
        t.to_csv()
    }
}
