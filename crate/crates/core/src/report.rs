use serde::Serialize;

/// One measured quantity compared against a bound.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
    pub grid_size: usize,
}

impl Check {
    /// Passes iff `value ≤ bound`.
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64, grid_size: usize) -> Self {
        Check { name: name.into(), value, bound, pass: value <= bound, grid_size }
    }

    /// Passes iff `value < bound`.
    pub fn below(name: impl Into<String>, value: f64, bound: f64, grid_size: usize) -> Self {
        Check { name: name.into(), value, bound, pass: value < bound, grid_size }
    }

    /// Passes iff `value ≥ bound`.
    pub fn at_least(name: impl Into<String>, value: f64, bound: f64, grid_size: usize) -> Self {
        Check { name: name.into(), value, bound, pass: value >= bound, grid_size }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain struct serializes")
    }
}

/// First failing check, if any.
pub fn first_failure(checks: &[Check]) -> Option<&Check> {
    checks.iter().find(|c| !c.pass)
}
