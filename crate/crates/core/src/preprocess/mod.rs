//! Turning raw incident records into training vectors.
//!
//! A record's numeric part is `[time components..., latitude, longitude]`,
//! normalized with parameters fitted on the whole dataset. When categories
//! are enabled each vector also carries a one-hot [`CategoryVector`].

mod category;
mod normalize;
mod time;

use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};

pub use category::{encode_category, CategoryVector, Vocabulary};
pub use normalize::{fit_rescale, fit_zscore, NormalizationKind, NormalizationParams};
pub use time::{
    encode_time_vector, parse_periods, validate_periods, NumeratorBase, Period, TimeVector,
};

use crate::error::{Result, SomError};

/// One raw event.
#[derive(Debug, Clone, PartialEq)]
pub struct IncidentRecord {
    pub timestamp: NaiveDateTime,
    pub latitude: f64,
    pub longitude: f64,
    pub category: Option<String>,
    /// Source line, when the record came from a file.
    pub line: Option<usize>,
}

impl IncidentRecord {
    pub fn new(
        timestamp: NaiveDateTime,
        latitude: f64,
        longitude: f64,
        category: Option<String>,
    ) -> Result<Self> {
        let record = Self {
            timestamp,
            latitude,
            longitude,
            category,
            line: None,
        };
        record.validate()?;
        Ok(record)
    }

    pub fn at_line(mut self, line: usize) -> Self {
        self.line = Some(line);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |reason: String| SomError::InvalidRecord {
            line: self.line,
            reason,
        };
        if !(-90.0..=90.0).contains(&self.latitude) {
            return Err(bad(format!("latitude {} outside [-90, 90]", self.latitude)));
        }
        if !(-180.0..=180.0).contains(&self.longitude) {
            return Err(bad(format!("longitude {} outside [-180, 180]", self.longitude)));
        }
        Ok(())
    }
}

/// Encoded training point.
#[derive(Debug, Clone, PartialEq)]
pub struct InputVector {
    pub numeric: Vec<f64>,
    pub category: Option<CategoryVector>,
}

impl InputVector {
    pub fn numeric(numeric: Vec<f64>) -> Self {
        Self {
            numeric,
            category: None,
        }
    }

    pub fn with_category(numeric: Vec<f64>, category: CategoryVector) -> Self {
        Self {
            numeric,
            category: Some(category),
        }
    }

    pub fn category_id(&self) -> Option<u32> {
        self.category.map(|c| c.id())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnknownCategoryPolicy {
    #[default]
    Error,
    Skip,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodingConfig {
    pub periods: Vec<Period>,
    pub normalization: NormalizationKind,
    pub use_category: bool,
    #[serde(default)]
    pub unknown_category: UnknownCategoryPolicy,
}

impl Default for EncodingConfig {
    fn default() -> Self {
        Self {
            periods: vec![Period::Day],
            normalization: NormalizationKind::Rescale,
            use_category: false,
            unknown_category: UnknownCategoryPolicy::Error,
        }
    }
}

impl EncodingConfig {
    /// Numeric dimensionality of encoded vectors.
    pub fn numeric_dim(&self) -> usize {
        self.periods.len() + 2
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub inputs: Vec<InputVector>,
    pub norm: NormalizationParams,
    pub vocabulary: Option<Vocabulary>,
    /// Indices into the record list that were skipped (unknown categories
    /// under [`UnknownCategoryPolicy::Skip`]).
    pub skipped: Vec<usize>,
}

impl Dataset {
    pub fn numeric_rows(&self) -> Vec<Vec<f64>> {
        self.inputs.iter().map(|x| x.numeric.clone()).collect()
    }
}

fn raw_numeric(record: &IncidentRecord, periods: &[Period]) -> Result<Vec<f64>> {
    record.validate()?;
    let mut v = encode_time_vector(&record.timestamp, periods)?.components();
    v.push(record.latitude);
    v.push(record.longitude);
    Ok(v)
}

/// Encodes records, fitting normalization and building the vocabulary from
/// the data itself.
pub fn build_dataset(records: &[IncidentRecord], config: &EncodingConfig) -> Result<Dataset> {
    if records.is_empty() {
        return Err(SomError::EmptyData);
    }
    validate_periods(&config.periods)?;
    let raw = records
        .iter()
        .map(|r| raw_numeric(r, &config.periods))
        .collect::<Result<Vec<_>>>()?;
    let norm = NormalizationParams::fit(config.normalization, &raw)?;
    let vocabulary = if config.use_category {
        let labels = records
            .iter()
            .map(|r| {
                r.category
                    .as_deref()
                    .ok_or(SomError::MissingCategory { line: r.line })
            })
            .collect::<Result<Vec<_>>>()?;
        Some(Vocabulary::from_labels(labels))
    } else {
        None
    };
    let inputs = raw
        .iter()
        .zip(records)
        .map(|(v, r)| {
            let numeric = norm.apply(v)?;
            let category = vocabulary
                .as_ref()
                .map(|vocab| category_of(r, vocab))
                .transpose()?;
            Ok(InputVector { numeric, category })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset {
        inputs,
        norm,
        vocabulary,
        skipped: Vec::new(),
    })
}

/// Encodes records with already-fitted parameters, e.g. to evaluate a model
/// on data it was not trained on.
pub fn encode_with(
    records: &[IncidentRecord],
    config: &EncodingConfig,
    norm: &NormalizationParams,
    vocabulary: Option<&Vocabulary>,
) -> Result<Dataset> {
    if records.is_empty() {
        return Err(SomError::EmptyData);
    }
    if config.use_category != vocabulary.is_some() {
        return Err(SomError::InvalidConfig(
            "category encoding requires a vocabulary".into(),
        ));
    }
    let mut inputs = Vec::with_capacity(records.len());
    let mut skipped = Vec::new();
    for (idx, r) in records.iter().enumerate() {
        let numeric = norm.apply(&raw_numeric(r, &config.periods)?)?;
        let category = match vocabulary {
            None => None,
            Some(vocab) => match category_of(r, vocab) {
                Ok(c) => Some(c),
                Err(SomError::UnknownCategory { .. })
                    if config.unknown_category == UnknownCategoryPolicy::Skip =>
                {
                    skipped.push(idx);
                    continue;
                }
                Err(e) => return Err(e),
            },
        };
        inputs.push(InputVector { numeric, category });
    }
    if inputs.is_empty() {
        return Err(SomError::EmptyData);
    }
    Ok(Dataset {
        inputs,
        norm: norm.clone(),
        vocabulary: vocabulary.cloned(),
        skipped,
    })
}

fn category_of(record: &IncidentRecord, vocab: &Vocabulary) -> Result<CategoryVector> {
    let label = record
        .category
        .as_deref()
        .ok_or(SomError::MissingCategory { line: record.line })?;
    vocab.encode(label).map_err(|e| match e {
        SomError::UnknownCategory { label, .. } => SomError::UnknownCategory {
            label,
            line: record.line,
        },
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    fn rec(day: u32, h: u32, lat: f64, lon: f64, cat: Option<&str>) -> IncidentRecord {
        let ts = NaiveDate::from_ymd_opt(2015, 1, day)
            .unwrap()
            .and_hms_opt(h, 0, 0)
            .unwrap();
        IncidentRecord::new(ts, lat, lon, cat.map(str::to_owned)).unwrap()
    }

    #[test]
    fn single_record_day_only() {
        let cfg = EncodingConfig {
            normalization: NormalizationKind::None,
            ..Default::default()
        };
        let ds = build_dataset(&[rec(5, 6, 40.7, -73.9, None)], &cfg).unwrap();
        assert_eq!(ds.inputs.len(), 1);
        assert_eq!(ds.inputs[0].numeric, vec![360.0 / 1440.0, 40.7, -73.9]);
        assert!(ds.inputs[0].category.is_none());
    }

    #[test]
    fn two_period_vectors_are_4d() {
        let cfg = EncodingConfig {
            periods: vec![Period::Day, Period::Week],
            normalization: NormalizationKind::None,
            ..Default::default()
        };
        let ds = build_dataset(&[rec(5, 6, 40.7, -73.9, None), rec(6, 7, 40.8, -73.8, None)], &cfg)
            .unwrap();
        assert!(ds.inputs.iter().all(|x| x.numeric.len() == 4));
        // 2015-01-05 is a Monday.
        assert_eq!(ds.inputs[0].numeric[1], 0.0);
        assert_eq!(ds.inputs[1].numeric[1], 1.0 / 7.0);
    }

    #[test]
    fn mixed_felony_dataset() {
        let labels = [
            "Rape",
            "Burglary",
            "Felony Assault",
            "Grand Larceny",
            "Robbery",
            "Grand Larceny of Motor Vehicle",
            "Murder Non-Negl.Manslaughter",
        ];
        let records: Vec<_> = labels
            .iter()
            .enumerate()
            .map(|(i, l)| rec(1 + i as u32, i as u32, 40.6 + 0.01 * i as f64, -74.0 + 0.02 * i as f64, Some(l)))
            .collect();
        let cfg = EncodingConfig {
            use_category: true,
            ..Default::default()
        };
        let ds = build_dataset(&records, &cfg).unwrap();
        assert_eq!(ds.vocabulary.as_ref().unwrap().len(), 7);
        for (i, x) in ds.inputs.iter().enumerate() {
            assert_eq!(x.numeric.len(), 3);
            let c = x.category.unwrap();
            assert_eq!(c.one_hot().len(), 7);
            assert_eq!(c.id(), i as u32 + 1);
        }
    }

    #[test]
    fn missing_label_reports_line() {
        let cfg = EncodingConfig {
            use_category: true,
            ..Default::default()
        };
        let records = vec![
            rec(1, 1, 40.0, -74.0, Some("a")).at_line(2),
            rec(2, 2, 41.0, -73.0, None).at_line(3),
        ];
        assert_eq!(
            build_dataset(&records, &cfg),
            Err(SomError::MissingCategory { line: Some(3) })
        );
    }

    #[test]
    fn degenerate_dimension_propagates() {
        let cfg = EncodingConfig::default();
        let records = vec![rec(1, 1, 40.0, -74.0, None), rec(2, 2, 40.0, -73.0, None)];
        assert_eq!(
            build_dataset(&records, &cfg),
            Err(SomError::DegenerateDimension { dim: 1 })
        );
    }

    #[test]
    fn invalid_latitude_rejected() {
        let ts = NaiveDate::from_ymd_opt(2015, 1, 1).unwrap().and_hms_opt(0, 0, 0).unwrap();
        assert!(IncidentRecord::new(ts, 91.0, 0.0, None).is_err());
        assert!(IncidentRecord::new(ts, 0.0, -180.5, None).is_err());
    }

    #[test]
    fn encode_with_skips_unknown_labels() {
        let train = vec![rec(1, 1, 40.0, -74.0, Some("a")), rec(2, 5, 41.0, -73.0, Some("b"))];
        let mut cfg = EncodingConfig {
            use_category: true,
            ..Default::default()
        };
        let ds = build_dataset(&train, &cfg).unwrap();
        let test = vec![rec(3, 2, 40.5, -73.5, Some("c")).at_line(9), rec(4, 3, 40.2, -73.9, Some("b"))];
        let err = encode_with(&test, &cfg, &ds.norm, ds.vocabulary.as_ref()).unwrap_err();
        assert_eq!(err, SomError::UnknownCategory { label: "c".into(), line: Some(9) });
        cfg.unknown_category = UnknownCategoryPolicy::Skip;
        let out = encode_with(&test, &cfg, &ds.norm, ds.vocabulary.as_ref()).unwrap();
        assert_eq!(out.skipped, vec![0]);
        assert_eq!(out.inputs.len(), 1);
        assert_eq!(out.inputs[0].category_id(), Some(2));
    }

    #[test]
    fn deterministic() {
        let records: Vec<_> = (1..20)
            .map(|i| rec(i, i % 24, 40.0 + 0.01 * f64::from(i), -74.0 + 0.03 * f64::from(i % 7), Some(["x", "y", "z"][i as usize % 3])))
            .collect();
        let cfg = EncodingConfig {
            use_category: true,
            normalization: NormalizationKind::Zscore,
            ..Default::default()
        };
        assert_eq!(build_dataset(&records, &cfg).unwrap(), build_dataset(&records, &cfg).unwrap());
    }
}
