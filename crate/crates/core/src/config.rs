use crate::error::{Error, Result};

/// Default number of work units any exhaustive routine may spend.
pub const DEFAULT_WORK_BUDGET: u64 = 100_000_000;

/// Environment variable that overrides [`DEFAULT_WORK_BUDGET`].
pub const WORK_BUDGET_ENV: &str = "BAFO_WORK_BUDGET";

/// Upper bound on the work an exhaustive solver, verifier or checker may do.
/// A unit is roughly one subset evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WorkBudget(pub u64);

impl Default for WorkBudget {
    fn default() -> Self {
        WorkBudget(DEFAULT_WORK_BUDGET)
    }
}

impl WorkBudget {
    /// Reads `BAFO_WORK_BUDGET`, falling back to the default.
    pub fn from_env() -> Result<Self> {
        match std::env::var(WORK_BUDGET_ENV) {
            Ok(s) => s
                .trim()
                .parse::<u64>()
                .map(WorkBudget)
                .map_err(|e| Error::Parse(format!("{WORK_BUDGET_ENV}={s:?}: {e}"))),
            Err(_) => Ok(WorkBudget::default()),
        }
    }

    pub fn check(self, required: u128) -> Result<()> {
        if required > u128::from(self.0) {
            Err(Error::BudgetExceeded { required, budget: self.0 })
        } else {
            Ok(())
        }
    }
}

/// `base^exp` saturating at `u128::MAX`.
pub(crate) fn pow_sat(base: u128, exp: usize) -> u128 {
    (0..exp).fold(1u128, |acc, _| acc.saturating_mul(base))
}
