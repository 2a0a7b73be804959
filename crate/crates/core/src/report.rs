//! Residual checks and the verification report.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::Location;

pub const REPORT_FORMAT_VERSION: u32 = 1;

/// A tolerance of the form `constant * delta^order`, where `delta` is the
/// grid (or stencil) scale of the check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tol {
    pub constant: f64,
    pub order: u32,
}

impl Tol {
    pub const fn absolute(constant: f64) -> Self {
        Tol { constant, order: 0 }
    }

    pub const fn linear(constant: f64) -> Self {
        Tol { constant, order: 1 }
    }

    pub const fn quadratic(constant: f64) -> Self {
        Tol { constant, order: 2 }
    }

    pub fn scaled(self, s: f64) -> Self {
        Tol {
            constant: self.constant * s,
            order: self.order,
        }
    }

    pub fn bound(&self, delta: f64) -> f64 {
        self.constant * delta.powi(self.order as i32)
    }
}

/// Running maximum with the location where it was attained. NaN counts as
/// an infinite residual.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MaxTracker {
    pub value: f64,
    pub location: Option<Location>,
}

impl MaxTracker {
    pub fn new() -> Self {
        MaxTracker::default()
    }

    pub fn update(&mut self, x: f64, loc: Location) {
        let x = if x.is_nan() { f64::INFINITY } else { x.abs() };
        // Ties go to the smaller index so parallel reductions are
        // order-independent.
        let replace = match self.location {
            None => true,
            Some(cur) => x > self.value || (x == self.value && (loc.i, loc.j) < (cur.i, cur.j)),
        };
        if replace {
            self.value = x;
            self.location = Some(loc);
        }
    }

    pub fn merge(mut self, other: MaxTracker) -> MaxTracker {
        if let Some(loc) = other.location {
            self.update(other.value, loc);
        }
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub max_residual: f64,
    pub tolerance: f64,
    /// `max_residual / delta^order`; `None` for order-0 checks.
    pub order_constant: Option<f64>,
    pub order: u32,
    pub pass: bool,
    pub mandatory: bool,
    pub location: Option<Location>,
    /// Hypothesis or claim the check stands for.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub hypothesis: Option<String>,
}

impl Check {
    pub fn new(name: impl Into<String>, tracker: MaxTracker, tol: Tol, delta: f64) -> Check {
        let tolerance = tol.bound(delta);
        let residual = tracker.value;
        Check {
            name: name.into(),
            max_residual: residual,
            tolerance,
            order_constant: (tol.order > 0).then(|| residual / delta.powi(tol.order as i32)),
            order: tol.order,
            pass: residual <= tolerance,
            mandatory: true,
            location: tracker.location,
            hypothesis: None,
        }
    }

    pub fn scalar(name: impl Into<String>, residual: f64, tol: Tol, delta: f64) -> Check {
        let mut t = MaxTracker::new();
        if residual.is_nan() {
            t.value = f64::INFINITY;
        } else {
            t.value = residual.abs();
        }
        let mut c = Check::new(name, t, tol, delta);
        c.location = None;
        c
    }

    /// A pass/fail predicate without a residual.
    pub fn predicate(name: impl Into<String>, pass: bool) -> Check {
        Check {
            name: name.into(),
            max_residual: if pass { 0.0 } else { 1.0 },
            tolerance: 0.5,
            order_constant: None,
            order: 0,
            pass,
            mandatory: true,
            location: None,
            hypothesis: None,
        }
    }

    pub fn informational(mut self) -> Check {
        self.mandatory = false;
        self
    }

    pub fn with_hypothesis(mut self, h: impl Into<String>) -> Check {
        self.hypothesis = Some(h.into());
        self
    }

    /// Turns a check into one that is expected to fail (negative control):
    /// it passes iff the underlying residual exceeds its tolerance.
    pub fn expect_failure(mut self) -> Check {
        self.name = format!("{} [negative control]", self.name);
        self.pass = !self.pass;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub format_version: u32,
    pub kind: String,
    pub seed: u64,
    pub grid_spacing: f64,
    pub checks: Vec<Check>,
    /// Scalar diagnostics (sample counts, measured constants).
    pub info: BTreeMap<String, f64>,
    pub pass: bool,
}

impl Report {
    pub fn new(kind: impl Into<String>, seed: u64, grid_spacing: f64) -> Report {
        Report {
            format_version: REPORT_FORMAT_VERSION,
            kind: kind.into(),
            seed,
            grid_spacing,
            checks: Vec::new(),
            info: BTreeMap::new(),
            pass: true,
        }
    }

    pub fn push(&mut self, c: Check) {
        if c.mandatory && !c.pass {
            self.pass = false;
        }
        self.checks.push(c);
    }

    pub fn extend(&mut self, cs: impl IntoIterator<Item = Check>) {
        for c in cs {
            self.push(c);
        }
    }

    pub fn info(&mut self, key: &str, x: f64) {
        self.info.insert(key.to_string(), x);
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.mandatory && !c.pass)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn loc(i: usize) -> Location {
        Location {
            i,
            j: 0,
            u: i as f64,
            v: 0.0,
        }
    }

    #[test]
    fn tracker_keeps_max_and_nan() {
        let mut t = MaxTracker::new();
        t.update(-2.0, loc(0));
        t.update(1.0, loc(1));
        assert_eq!(t.value, 2.0);
        assert_eq!(t.location.unwrap().i, 0);
        t.update(f64::NAN, loc(5));
        assert!(t.value.is_infinite());
        assert_eq!(t.location.unwrap().i, 5);
    }

    #[test]
    fn order_constant_and_pass() {
        let mut t = MaxTracker::new();
        t.update(0.02, loc(0));
        let c = Check::new("x", t, Tol::quadratic(5.0), 0.1);
        assert!((c.tolerance - 0.05).abs() < 1e-15);
        assert!((c.order_constant.unwrap() - 2.0).abs() < 1e-12);
        assert!(c.pass);
        let mut r = Report::new("test", 1, 0.1);
        r.push(c.clone().expect_failure());
        assert!(!r.pass);
        r.pass = true;
        r.push(Check::predicate("p", false).informational());
        assert!(r.pass);
    }
}
