use crate::error::{Error, Result};

/// Physical and tuning constants of the plate model.
///
/// `epsilon` is the device aspect ratio, `lambda` is proportional to the
/// square of the applied voltage, `beta` scales plate bending, `tau` external
/// stretching, and `a` the nonlocal self-stretching term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub epsilon: f64,
    pub lambda: f64,
    pub beta: f64,
    pub tau: f64,
    pub a: f64,
}

impl ModelParams {
    /// Validates the admissible parameter ranges: epsilon > 0, beta > 0,
    /// lambda, tau, a >= 0. The second-order membrane case beta = 0 is
    /// rejected at construction.
    pub fn new(epsilon: f64, lambda: f64, beta: f64, tau: f64, a: f64) -> Result<Self> {
        if !(epsilon > 0.0) && epsilon != 0.0 {
            return Err(Error::InvalidParameter(format!("epsilon must be finite, got {epsilon}")));
        }
        if epsilon < 0.0 {
            return Err(Error::InvalidParameter(format!("epsilon must be >= 0, got {epsilon}")));
        }
        if !(beta > 0.0) {
            return Err(Error::InvalidParameter(format!("beta must be > 0, got {beta}")));
        }
        for (name, val) in [("lambda", lambda), ("tau", tau), ("a", a)] {
            if !(val >= 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be >= 0, got {val}")));
            }
        }
        Ok(Self { epsilon, lambda, beta, tau, a })
    }

    /// Returns a copy with a different voltage parameter.
    pub fn with_lambda(self, lambda: f64) -> Self {
        Self { lambda, ..self }
    }

    /// Re-checks the construction invariants (fields are public and can be
    /// tweaked after the fact).
    pub fn validate(&self) -> Result<()> {
        Self::new(self.epsilon, self.lambda, self.beta, self.tau, self.a).map(|_| ())
    }
}

impl Default for ModelParams {
    fn default() -> Self {
        Self { epsilon: 0.3, lambda: 0.0, beta: 1.0, tau: 0.0, a: 0.0 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_membrane_case() {
        assert!(ModelParams::new(0.3, 0.0, 0.0, 0.0, 0.0).is_err());
        assert!(ModelParams::new(0.3, 0.0, -1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn rejects_negative_lambda_tau_a() {
        assert!(ModelParams::new(0.3, -0.1, 1.0, 0.0, 0.0).is_err());
        assert!(ModelParams::new(0.3, 0.0, 1.0, -1.0, 0.0).is_err());
        assert!(ModelParams::new(0.3, 0.0, 1.0, 0.0, -1.0).is_err());
    }

    #[test]
    fn accepts_small_gap_limit() {
        // epsilon = 0 is the explicit small-gap model, used as an oracle.
        assert!(ModelParams::new(0.0, 1.0, 1.0, 0.0, 0.0).is_ok());
    }
}
