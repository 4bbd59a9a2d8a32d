//! Run configuration: defaults, an optional TOML file, then flag overrides.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use som3d::preprocess::{validate_periods, UnknownCategoryPolicy};
use som3d::train::{AlphaSetting, RadiusSchedule};
use som3d::{
    Connectivity, EncodingConfig, GridDims, HitBinning, IdAssignment, Init, NormalizationKind,
    Period, TrainingConfig,
};

use crate::error::{CliError, Result};
use crate::records::ColumnMapping;

/// Variable naming the output directory when neither a flag nor the config
/// file sets one.
pub const OUT_DIR_ENV: &str = "SOM3D_OUT";
const FALLBACK_OUT_DIR: &str = "som3d-out";

/// How node IDs are chosen for mixed data.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum IdMode {
    #[default]
    Wta,
    Prob,
    Hybrid(f64),
}

impl IdMode {
    pub fn assignment(self, seed: u64) -> IdAssignment {
        match self {
            IdMode::Wta => IdAssignment::WinnerTakeAll,
            IdMode::Prob => IdAssignment::Probabilistic { seed },
            IdMode::Hybrid(threshold) => IdAssignment::Hybrid { threshold, seed },
        }
    }
}

impl FromStr for IdMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "wta" => Ok(IdMode::Wta),
            "prob" => Ok(IdMode::Prob),
            other => {
                let t = other
                    .strip_prefix("hybrid:")
                    .ok_or_else(|| format!("unknown id mode {other:?}, expected wta, prob or hybrid:T"))?;
                match t.parse::<f64>() {
                    Ok(t) if (0.0..=1.0).contains(&t) => Ok(IdMode::Hybrid(t)),
                    _ => Err(format!("hybrid threshold {t:?} must be a number in [0, 1]")),
                }
            }
        }
    }
}

impl fmt::Display for IdMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IdMode::Wta => f.write_str("wta"),
            IdMode::Prob => f.write_str("prob"),
            IdMode::Hybrid(t) => write!(f, "hybrid:{t}"),
        }
    }
}

/// Cell counts per projected axis, written `AxBxC` or `AxB`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Divisions(pub Vec<usize>);

impl Default for Divisions {
    fn default() -> Self {
        Divisions(som3d::eval::DEFAULT_DIVISIONS.to_vec())
    }
}

impl FromStr for Divisions {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts = s
            .split(['x', 'X'])
            .map(|p| p.trim().parse::<usize>().ok().filter(|&d| d > 0))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| format!("bad divisions {s:?}, expected positive integers like 8x5x5"))?;
        if !(2..=3).contains(&parts.len()) {
            return Err(format!("divisions {s:?} must have 2 or 3 parts"));
        }
        Ok(Divisions(parts))
    }
}

impl fmt::Display for Divisions {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(usize::to_string).collect();
        f.write_str(&parts.join("x"))
    }
}

/// Serde through `Display`/`FromStr`, for compact `6x4x4`-style fields.
mod as_string {
    use std::fmt::Display;
    use std::str::FromStr;

    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<T: Display, S: Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(v)
    }

    pub fn deserialize<'de, T, D>(d: D) -> Result<T, D::Error>
    where
        T: FromStr,
        T::Err: Display,
        D: Deserializer<'de>,
    {
        String::deserialize(d)?.parse().map_err(de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitKind {
    #[default]
    Linear,
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub columns: ColumnMapping,
    pub periods: Vec<Period>,
    pub normalize: NormalizationKind,
    #[serde(with = "as_string")]
    pub grid: GridDims,
    pub epochs: usize,
    /// Defaults to `max(l, m, n) / 2` falling to 0.5.
    pub radius: Option<RadiusSchedule>,
    pub init: InitKind,
    /// Category mismatch weight; estimated from the data when unset.
    pub alpha: Option<f64>,
    #[serde(with = "as_string")]
    pub id_mode: IdMode,
    #[serde(with = "as_string")]
    pub divisions: Divisions,
    pub connectivity: Connectivity,
    pub hit_binning: HitBinning,
    pub unknown_category: UnknownCategoryPolicy,
    pub seed: u64,
    pub strict: bool,
    /// Never stored in artifacts, so reruns into other directories match.
    #[serde(skip_serializing)]
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            input: None,
            columns: ColumnMapping::default(),
            periods: vec![Period::Day],
            normalize: NormalizationKind::Rescale,
            grid: GridDims::new(13, 8, 7).expect("valid default grid"),
            epochs: 100,
            radius: None,
            init: InitKind::Linear,
            alpha: None,
            id_mode: IdMode::Wta,
            divisions: Divisions::default(),
            connectivity: Connectivity::Face,
            hit_binning: HitBinning::AtNode,
            unknown_category: UnknownCategoryPolicy::Error,
            seed: 0,
            strict: false,
            out: None,
        }
    }
}

/// Flag values; `None` leaves the layered value alone.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub input: Option<PathBuf>,
    pub grid: Option<GridDims>,
    pub epochs: Option<usize>,
    pub normalize: Option<NormalizationKind>,
    pub periods: Option<Vec<Period>>,
    pub category_column: Option<String>,
    pub alpha: Option<f64>,
    pub id_mode: Option<IdMode>,
    pub divisions: Option<Divisions>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub strict: bool,
}

fn merge(base: &mut toml::Table, top: toml::Table) {
    for (key, value) in top {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(t)) => merge(b, t),
            (_, value) => {
                base.insert(key, value);
            }
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str, path: &Path) -> Result<Self> {
        Self::default().layer_toml(text, path)
    }

    /// Fields present in `text` replace those of `self`; nested tables merge.
    pub fn layer_toml(&self, text: &str, path: &Path) -> Result<Self> {
        let config_err = |message: String| CliError::Config {
            path: path.to_path_buf(),
            message,
        };
        let top: toml::Table = toml::from_str(text).map_err(|e| config_err(e.to_string()))?;
        let mut base = toml::Table::try_from(self).map_err(|e| config_err(e.to_string()))?;
        if let Some(out) = &self.out {
            base.insert("out".into(), toml::Value::String(out.display().to_string()));
        }
        merge(&mut base, top);
        base.try_into().map_err(|e: toml::de::Error| config_err(e.to_string()))
    }

    pub fn layer_file(&self, path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        self.layer_toml(&text, path)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(v) = &o.input {
            self.input = Some(v.clone());
        }
        if let Some(v) = o.grid {
            self.grid = v;
        }
        if let Some(v) = o.epochs {
            self.epochs = v;
        }
        if let Some(v) = o.normalize {
            self.normalize = v;
        }
        if let Some(v) = &o.periods {
            self.periods = v.clone();
        }
        if let Some(v) = &o.category_column {
            self.columns.category = Some(v.clone());
        }
        if let Some(v) = o.alpha {
            self.alpha = Some(v);
        }
        if let Some(v) = o.id_mode {
            self.id_mode = v;
        }
        if let Some(v) = &o.divisions {
            self.divisions = v.clone();
        }
        if let Some(v) = o.seed {
            self.seed = v;
        }
        if let Some(v) = &o.out {
            self.out = Some(v.clone());
        }
        self.strict |= o.strict;
    }

    pub fn validate(&self) -> Result<()> {
        let usage = |m: String| Err(CliError::Usage(m));
        validate_periods(&self.periods)?;
        if self.epochs == 0 {
            return usage("epochs must be at least 1".into());
        }
        if let Some(a) = self.alpha {
            if !(a.is_finite() && a >= 0.0) {
                return usage(format!("alpha must be finite and >= 0, got {a}"));
            }
        }
        if !(2..=3).contains(&self.divisions.0.len()) || self.divisions.0.contains(&0) {
            return usage(format!("bad divisions {}", self.divisions));
        }
        self.training()?.validate()?;
        Ok(())
    }

    pub fn encoding(&self) -> EncodingConfig {
        EncodingConfig {
            periods: self.periods.clone(),
            normalization: self.normalize,
            use_category: self.columns.category.is_some(),
            unknown_category: self.unknown_category,
        }
    }

    pub fn training(&self) -> Result<TrainingConfig> {
        let mut t = TrainingConfig::new(self.grid).with_epochs(self.epochs);
        if let Some(r) = self.radius {
            t.radius = r;
        }
        t.init = match self.init {
            InitKind::Linear => Init::Linear,
            InitKind::Random => Init::Random { seed: self.seed },
        };
        t.alpha = match self.alpha {
            Some(value) => AlphaSetting::Fixed { value },
            None => AlphaSetting::Estimate { seed: self.seed },
        };
        t.id_assignment = self.id_mode.assignment(self.seed);
        t.time_dims = self.periods.len();
        Ok(t)
    }

    /// Flag or config value, then the environment, then `som3d-out`.
    pub fn out_dir(&self) -> PathBuf {
        self.out
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(FALLBACK_OUT_DIR))
    }

    pub fn divisions3(&self) -> Result<[usize; 3]> {
        <[usize; 3]>::try_from(self.divisions.0.as_slice()).map_err(|_| {
            CliError::Usage(format!(
                "evaluation needs three divisions (AxBxC), got {}",
                self.divisions
            ))
        })
    }
}
