//! Shared pass/fail reporting for the checker routines.

use serde::Serialize;

/// Outcome of one checker run.
///
/// `checks` counts individual comparisons. When the search space exceeded the
/// caller's budget the checker switches to seeded sampling and records that in
/// `sampled`/`seed` so a failure can be replayed.
#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub passed: bool,
    pub checks: u64,
    pub sampled: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<Failure>,
}

/// First violation found, identified by the law that broke and the smallest
/// witness under the enumeration order.
#[derive(Debug, Clone, Serialize)]
pub struct Failure {
    pub law: String,
    pub witness: String,
}

impl Verdict {
    pub fn pass(checks: u64) -> Self {
        Verdict { passed: true, checks, sampled: false, seed: None, failure: None }
    }

    pub fn fail(checks: u64, law: impl Into<String>, witness: impl Into<String>) -> Self {
        Verdict {
            passed: false,
            checks,
            sampled: false,
            seed: None,
            failure: Some(Failure { law: law.into(), witness: witness.into() }),
        }
    }

    pub fn with_sampling(mut self, seed: u64) -> Self {
        self.sampled = true;
        self.seed = Some(seed);
        self
    }

    /// Folds another verdict into this one, keeping the first failure.
    pub fn merge(&mut self, other: Verdict) {
        self.checks += other.checks;
        self.sampled |= other.sampled;
        if self.seed.is_none() {
            self.seed = other.seed;
        }
        if self.passed && !other.passed {
            self.passed = false;
            self.failure = other.failure;
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.passed {
            write!(f, "pass ({} checks", self.checks)?;
        } else {
            write!(f, "FAIL ({} checks", self.checks)?;
        }
        if self.sampled {
            write!(f, ", sampled, seed {}", self.seed.unwrap_or(0))?;
        }
        write!(f, ")")?;
        if let Some(failure) = &self.failure {
            write!(f, " {}: {}", failure.law, failure.witness)?;
        }
        Ok(())
    }
}
