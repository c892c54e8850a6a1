//! Residual records for identity suites.

use serde::{Deserialize, Serialize};

/// One identity check on one seeded input.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualRecord {
    pub identity: String,
    pub degree: usize,
    pub seed: u64,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl ResidualRecord {
    /// `passed` iff the residual is finite and within the tolerance.
    pub fn new(identity: impl Into<String>, degree: usize, seed: u64, residual: f64, tolerance: f64) -> Self {
        let passed = residual.is_finite() && residual <= tolerance;
        ResidualRecord { identity: identity.into(), degree, seed, residual, tolerance, passed }
    }

    pub const CSV_HEADER: [&'static str; 6] = ["identity", "degree", "seed", "residual", "tolerance", "passed"];

    pub fn csv_row(&self) -> Vec<String> {
        vec![
            self.identity.clone(),
            self.degree.to_string(),
            self.seed.to_string(),
            format!("{:e}", self.residual),
            format!("{:e}", self.tolerance),
            self.passed.to_string(),
        ]
    }
}

/// Per-identity aggregate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentitySummary {
    pub identity: String,
    pub trials: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    pub failures: usize,
}

/// Records of a suite run, in evaluation order.
#[derive(Clone, Debug, Default, Serialize)]
pub struct ResidualReport {
    pub suite: String,
    pub records: Vec<ResidualRecord>,
    pub runtime_s: f64,
}

impl ResidualReport {
    pub fn new(suite: impl Into<String>) -> Self {
        ResidualReport { suite: suite.into(), ..Default::default() }
    }

    pub fn extend(&mut self, records: impl IntoIterator<Item = ResidualRecord>) {
        self.records.extend(records);
    }

    pub fn passed(&self) -> bool {
        self.records.iter().all(|r| r.passed)
    }

    /// Summaries in order of first appearance.
    pub fn summaries(&self) -> Vec<IdentitySummary> {
        let mut out: Vec<IdentitySummary> = Vec::new();
        for r in &self.records {
            let s = match out.iter_mut().find(|s| s.identity == r.identity) {
                Some(s) => s,
                None => {
                    out.push(IdentitySummary { identity: r.identity.clone(), trials: 0, max_residual: 0.0, tolerance: r.tolerance, failures: 0 });
                    out.last_mut().expect("just pushed")
                }
            };
            s.trials += 1;
            s.max_residual = if r.residual.is_nan() { f64::NAN } else { s.max_residual.max(r.residual) };
            s.tolerance = s.tolerance.min(r.tolerance);
            s.failures += usize::from(!r.passed);
        }
        out
    }

    pub fn failures(&self) -> impl Iterator<Item = &ResidualRecord> {
        self.records.iter().filter(|r| !r.passed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nan_never_passes() {
        assert!(!ResidualRecord::new("x", 0, 1, f64::NAN, 1.0).passed);
        assert!(ResidualRecord::new("x", 0, 1, 0.0, 0.0).passed);
        assert!(!ResidualRecord::new("x", 0, 1, 1e-9, 1e-10).passed);
    }

    #[test]
    fn summaries_group_by_identity() {
        let mut r = ResidualReport::new("demo");
        r.extend([
            ResidualRecord::new("a", 1, 0, 1e-12, 1e-10),
            ResidualRecord::new("b", 2, 0, 1e-3, 1e-10),
            ResidualRecord::new("a", 1, 1, 1e-11, 1e-10),
        ]);
        let s = r.summaries();
        assert_eq!(s.len(), 2);
        assert_eq!((s[0].trials, s[0].max_residual, s[0].failures), (2, 1e-11, 0));
        assert_eq!(s[1].failures, 1);
        assert!(!r.passed());
        let json = serde_json::to_string(&r.records[0]).unwrap();
        assert_eq!(serde_json::from_str::<ResidualRecord>(&json).unwrap(), r.records[0]);
    }
}
