//! Finite sequences of `(n, m)` pairs approaching a limit regime.

use serde::{Deserialize, Serialize};

use crate::error::{invalid_param, Error, Result};

/// How the points of a [`Schedule`] are generated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScheduleRule {
    /// `m = round((n / lambda)^2)`, so `n / sqrt(m)` stays near `lambda`.
    FixedLambda { lambda: f64, n: Vec<u64> },
    /// Fixed `m`, growing `n`.
    FixedM { m: u64, n: Vec<u64> },
    /// `m = round(n / ratio)`.
    Proportional { ratio: f64, n: Vec<u64> },
    /// Points given directly as `[n, m]`.
    Explicit { points: Vec<(u64, u64)> },
}

/// Validated list of `(n, m)` pairs with strictly increasing `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ScheduleRule", into = "ScheduleRule")]
pub struct Schedule {
    rule: ScheduleRule,
    points: Vec<(u64, u64)>,
}

fn rounded_cells(x: f64) -> Result<u64> {
    if !(x.is_finite() && x >= 0.5 && x < u64::MAX as f64) {
        return Err(invalid_param(format!("schedule yields invalid m = {x}")));
    }
    Ok(x.round() as u64)
}

impl Schedule {
    pub fn new(rule: ScheduleRule) -> Result<Self> {
        let points: Vec<(u64, u64)> = match &rule {
            ScheduleRule::FixedLambda { lambda, n } => {
                if !(*lambda > 0.0 && lambda.is_finite()) {
                    return Err(invalid_param("fixed_lambda needs lambda > 0"));
                }
                n.iter()
                    .map(|&n| Ok((n, rounded_cells((n as f64 / lambda).powi(2))?)))
                    .collect::<Result<_>>()?
            }
            ScheduleRule::FixedM { m, n } => n.iter().map(|&n| (n, *m)).collect(),
            ScheduleRule::Proportional { ratio, n } => {
                if !(*ratio > 0.0 && ratio.is_finite()) {
                    return Err(invalid_param("proportional needs ratio > 0"));
                }
                n.iter()
                    .map(|&n| Ok((n, rounded_cells(n as f64 / ratio)?)))
                    .collect::<Result<_>>()?
            }
            ScheduleRule::Explicit { points } => points.clone(),
        };
        if points.is_empty() {
            return Err(invalid_param("schedule has no points"));
        }
        for &(n, m) in &points {
            if n == 0 || m == 0 {
                return Err(invalid_param(format!(
                    "schedule point ({n}, {m}) has a zero entry"
                )));
            }
        }
        if points.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(invalid_param(
                "schedule n values must be strictly increasing",
            ));
        }
        Ok(Schedule { rule, points })
    }

    pub fn rule(&self) -> &ScheduleRule {
        &self.rule
    }

    pub fn points(&self) -> &[(u64, u64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

impl TryFrom<ScheduleRule> for Schedule {
    type Error = Error;

    fn try_from(rule: ScheduleRule) -> Result<Self> {
        Schedule::new(rule)
    }
}

impl From<Schedule> for ScheduleRule {
    fn from(s: Schedule) -> Self {
        s.rule
    }
}
