use serde::{Deserialize, Serialize};

use super::priors::Theta;
use crate::error::{Error, Result};
use crate::hypothesis::Hypothesis;

/// Decision-versus-truth cost `C[i, θ]`.
///
/// `base[i][j]` is the cost of deciding `Hi` when `Hj` is true. Under
/// multipath truth, the cost of deciding "interference-free" is scaled by
/// `α / alpha_ref` (capped at 1) when `multipath_scaling` is on, so mild
/// multipath declared clean is nearly free.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostModel {
    pub base: [[f64; 4]; 4],
    pub multipath_scaling: bool,
    pub alpha_ref: f64,
}

impl Default for CostModel {
    fn default() -> Self {
        //          truth:  H0    H1    H2    H3
        let base = [
            [0.0, 0.5, 1.0, 1.0], // decide H0
            [0.5, 0.0, 1.0, 1.0], // decide H1
            [0.7, 0.7, 0.0, 0.3], // decide H2
            [0.7, 0.7, 0.3, 0.0], // decide H3
        ];
        Self {
            base,
            multipath_scaling: true,
            alpha_ref: 0.8,
        }
    }
}

impl CostModel {
    pub fn validate(&self) -> Result<()> {
        for (i, row) in self.base.iter().enumerate() {
            for (j, &c) in row.iter().enumerate() {
                if !(c >= 0.0 && c.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "cost[{i}][{j}] must be finite and >= 0"
                    )));
                }
                if i == j && c != 0.0 {
                    return Err(Error::InvalidParameter(format!("cost[{i}][{i}] must be 0")));
                }
            }
        }
        if self.multipath_scaling && !(self.alpha_ref > 0.0) {
            return Err(Error::InvalidParameter("alpha_ref must be > 0".into()));
        }
        Ok(())
    }

    pub fn cost(&self, decision: Hypothesis, truth: Hypothesis, theta: &Theta) -> f64 {
        let c = self.base[decision.index()][truth.index()];
        if self.multipath_scaling && truth == Hypothesis::H1 && decision == Hypothesis::H0 {
            c * (theta.alpha / self.alpha_ref).min(1.0)
        } else {
            c
        }
    }

    /// Same model with every entry multiplied by `k`.
    pub fn scaled(&self, k: f64) -> Self {
        let mut out = *self;
        for row in out.base.iter_mut() {
            for c in row.iter_mut() {
                *c *= k;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid_with_zero_diagonal() {
        let c = CostModel::default();
        c.validate().unwrap();
        for h in Hypothesis::ALL {
            assert_eq!(c.cost(h, h, &Theta::default()), 0.0);
        }
    }

    #[test]
    fn mild_multipath_is_cheap() {
        let c = CostModel::default();
        let mild = Theta {
            alpha: 0.1,
            ..Theta::default()
        };
        let strong = Theta {
            alpha: 0.8,
            ..Theta::default()
        };
        let cm = c.cost(Hypothesis::H0, Hypothesis::H1, &mild);
        let cs = c.cost(Hypothesis::H0, Hypothesis::H1, &strong);
        assert!((cm - 0.5 * 0.125).abs() < 1e-15);
        assert!((cs - 0.5).abs() < 1e-15);
        assert_eq!(c.cost(Hypothesis::H2, Hypothesis::H1, &mild), 0.7);
    }

    #[test]
    fn rejects_bad_entries() {
        let mut c = CostModel::default();
        c.base[1][1] = 0.1;
        assert!(c.validate().is_err());
        let mut c = CostModel::default();
        c.base[0][3] = -1.0;
        assert!(c.validate().is_err());
    }
}
