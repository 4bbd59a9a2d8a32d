//! Time-vector encoding: a timestamp becomes one fraction per period.

use chrono::{Datelike, NaiveDateTime, Timelike};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SomError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Period {
    Day,
    Week,
    Month,
}

impl Period {
    /// Period length in its own units (minutes, days, months).
    pub fn length(self) -> u32 {
        match self {
            Period::Day => 24 * 60,
            Period::Week => 7,
            Period::Month => 12,
        }
    }

    /// Zero-based position of `ts` within this period.
    fn numerator(self, ts: &NaiveDateTime) -> u32 {
        match self {
            Period::Day => ts.hour() * 60 + ts.minute(),
            Period::Week => ts.weekday().num_days_from_monday(),
            Period::Month => ts.month0(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Period::Day => "day",
            Period::Week => "week",
            Period::Month => "month",
        }
    }
}

/// Parses a comma-separated period list such as `day,week`.
pub fn parse_periods(s: &str) -> Result<Vec<Period>> {
    let periods = s
        .split(',')
        .map(|p| match p.trim() {
            "day" => Ok(Period::Day),
            "week" => Ok(Period::Week),
            "month" => Ok(Period::Month),
            other => Err(SomError::InvalidConfig(format!("unknown period {other:?}"))),
        })
        .collect::<Result<Vec<_>>>()?;
    validate_periods(&periods)?;
    Ok(periods)
}

pub fn validate_periods(periods: &[Period]) -> Result<()> {
    if periods.is_empty() {
        return Err(SomError::InvalidConfig("at least one time period is required".into()));
    }
    for (i, p) in periods.iter().enumerate() {
        if periods[..i].contains(p) {
            return Err(SomError::InvalidConfig(format!("period {} repeated", p.name())));
        }
    }
    Ok(())
}

/// Numerator convention for week and month positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NumeratorBase {
    /// Monday = 0, January = 0. Every fraction stays below 1.
    #[default]
    Zero,
    /// Monday = 1, January = 1, as in the customary written form
    /// (`8:30 on Tuesday in March` = `<510/1440, 2/7, 3/12>`). Sunday and
    /// December reach exactly 1; use for display only.
    One,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimeVector {
    numerators: Vec<u32>,
    periods: Vec<Period>,
}

impl TimeVector {
    pub fn periods(&self) -> &[Period] {
        &self.periods
    }

    /// Zero-based numerators, one per period.
    pub fn numerators(&self) -> &[u32] {
        &self.numerators
    }

    /// Fractions `n_i / P_i`, every one in `[0, 1)`.
    pub fn components(&self) -> Vec<f64> {
        self.components_with(NumeratorBase::Zero)
    }

    pub fn components_with(&self, base: NumeratorBase) -> Vec<f64> {
        self.numerators
            .iter()
            .zip(&self.periods)
            .map(|(&n, &p)| {
                let shifted = match (base, p) {
                    (NumeratorBase::One, Period::Week | Period::Month) => n + 1,
                    _ => n,
                };
                f64::from(shifted) / f64::from(p.length())
            })
            .collect()
    }
}

pub fn encode_time_vector(ts: &NaiveDateTime, periods: &[Period]) -> Result<TimeVector> {
    validate_periods(periods)?;
    Ok(TimeVector {
        numerators: periods.iter().map(|p| p.numerator(ts)).collect(),
        periods: periods.to_vec(),
    })
}
