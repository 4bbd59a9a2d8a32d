use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use som3d::eval::{default_projections, frequency_tensor, project, projected_bounds, validate_axes};
use som3d::{
    build_dataset, encode_with, evaluate, train_dataset, Dataset, EncodingConfig, EvaluateOptions,
    EvaluationReport, ProjectionSpec, SomModel,
};

use crate::artifact::ModelArtifact;
use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::records::{load_records, LoadedRecords, RowError};

pub const MODEL_FILE: &str = "model.json";
pub const ASSIGNMENTS_FILE: &str = "assignments.csv";
pub const TRAIN_LOG_FILE: &str = "train_log.csv";
pub const REJECTED_FILE: &str = "rejected_rows.csv";
pub const REPORT_FILE: &str = "report.json";

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| CliError::Write {
        path: dir.to_path_buf(),
        source,
    })
}

fn input_path(cfg: &RunConfig) -> Result<&Path> {
    cfg.input
        .as_deref()
        .ok_or_else(|| CliError::Usage("no input file: pass --input or set `input` in the config".into()))
}

fn load(cfg: &RunConfig) -> Result<LoadedRecords> {
    let path = input_path(cfg)?;
    let loaded = load_records(path, &cfg.columns, cfg.strict)?;
    if !loaded.rejected.is_empty() {
        log::warn!(
            "{}: skipped {} unparseable rows",
            path.display(),
            loaded.rejected.len()
        );
    }
    Ok(loaded)
}

fn rejected_csv(rows: &[RowError]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let to_err = |e: csv::Error| CliError::Write {
        path: PathBuf::from(REJECTED_FILE),
        source: e.into(),
    };
    w.write_record(["line", "reason"]).map_err(to_err)?;
    for r in rows {
        w.write_record([r.line.to_string(), r.reason.clone()]).map_err(to_err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Write {
        path: PathBuf::from(REJECTED_FILE),
        source: e.into_error(),
    })?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainSummary {
    pub out_dir: PathBuf,
    pub records: usize,
    pub rejected: usize,
    pub final_qe: f64,
    pub warnings: Vec<String>,
}

/// Loads, encodes and trains, then writes the model, per-input BMUs and the
/// per-epoch log into the output directory.
pub fn cmd_train(cfg: &RunConfig) -> Result<TrainSummary> {
    cfg.validate()?;
    let loaded = load(cfg)?;
    let encoding = cfg.encoding();
    let data = build_dataset(&loaded.records, &encoding)?;
    let outcome = train_dataset(&data, &cfg.training()?)?;
    for w in &outcome.warnings {
        log::warn!("{w}");
    }

    let out = cfg.out_dir();
    ensure_dir(&out)?;
    ModelArtifact::new(&outcome.model, encoding, cfg.clone()).save(&out.join(MODEL_FILE))?;

    let mut assignments = String::from("input_index,bmu,distance\n");
    for (i, b) in outcome.assignments.iter().enumerate() {
        writeln!(assignments, "{i},{},{}", b.bmu, b.distance).expect("string write");
    }
    write_file(&out.join(ASSIGNMENTS_FILE), &assignments)?;

    let mut log = String::from("epoch,radius,qe\n");
    for e in &outcome.history {
        writeln!(log, "{},{},{}", e.epoch, e.radius, e.qe).expect("string write");
    }
    write_file(&out.join(TRAIN_LOG_FILE), &log)?;

    if !loaded.rejected.is_empty() {
        write_file(&out.join(REJECTED_FILE), &rejected_csv(&loaded.rejected)?)?;
    }
    let final_qe = outcome.history.last().map_or(f64::NAN, |e| e.qe);
    log::info!(
        "trained {} map on {} records (final QE {final_qe:.6}); wrote {}",
        cfg.grid,
        data.inputs.len(),
        out.display()
    );
    Ok(TrainSummary {
        out_dir: out,
        records: data.inputs.len(),
        rejected: loaded.rejected.len(),
        final_qe,
        warnings: outcome.warnings.iter().map(ToString::to_string).collect(),
    })
}

fn period_names(e: &EncodingConfig) -> String {
    e.periods.iter().map(|p| p.name()).collect::<Vec<_>>().join(",")
}

/// The run must encode data exactly like the model was trained.
pub fn check_encoding(model: &EncodingConfig, run: &EncodingConfig) -> Result<()> {
    if model.periods != run.periods {
        return Err(CliError::EncodingMismatch(format!(
            "model encodes periods {} but the run requests {}",
            period_names(model),
            period_names(run)
        )));
    }
    if model.normalization != run.normalization {
        return Err(CliError::EncodingMismatch(format!(
            "model uses {:?} normalization but the run requests {:?}",
            model.normalization, run.normalization
        )));
    }
    match (model.use_category, run.use_category) {
        (true, false) => Err(CliError::EncodingMismatch(
            "model was trained with categories but no category column is mapped".into(),
        )),
        (false, true) => Err(CliError::EncodingMismatch(
            "a category column is mapped but the model was trained without categories".into(),
        )),
        _ => Ok(()),
    }
}

/// Data encoded with the model's fitted normalization and vocabulary.
pub struct ModelData {
    pub model: SomModel,
    pub data: Dataset,
    pub rejected: usize,
}

pub fn model_data(artifact: &ModelArtifact, cfg: &RunConfig) -> Result<ModelData> {
    cfg.validate()?;
    let run = cfg.encoding();
    check_encoding(&artifact.encoding, &run)?;
    let model = artifact
        .to_model()
        .map_err(|message| CliError::Artifact {
            path: PathBuf::from(MODEL_FILE),
            message,
        })?;
    let loaded = load(cfg)?;
    let encoding = EncodingConfig {
        unknown_category: cfg.unknown_category,
        ..artifact.encoding.clone()
    };
    let data = encode_with(&loaded.records, &encoding, &model.norm, model.vocabulary.as_ref())?;
    if !data.skipped.is_empty() {
        log::warn!("skipped {} records with categories unknown to the model", data.skipped.len());
    }
    Ok(ModelData {
        model,
        data,
        rejected: loaded.rejected.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportDocument {
    pub format: &'static str,
    pub format_version: u32,
    pub grid: String,
    pub nodes: usize,
    pub divisions: Vec<usize>,
    pub encoding: EncodingConfig,
    pub input: Option<PathBuf>,
    pub rejected_rows: usize,
    pub skipped_unknown_category: usize,
    /// Hits recounted from the first projection's tensor.
    pub total_hits: Option<u64>,
    #[serde(flatten)]
    pub evaluation: EvaluationReport,
}

/// QE, TE and the per-projection reliability tables, written as
/// `report.json` into the output directory.
pub fn cmd_evaluate(artifact: &ModelArtifact, cfg: &RunConfig) -> Result<ReportDocument> {
    let md = model_data(artifact, cfg)?;
    let divisions = cfg.divisions3()?;
    let options = EvaluateOptions {
        projections: default_projections(&artifact.encoding.periods, divisions),
        connectivity: cfg.connectivity,
        binning: cfg.hit_binning,
    };
    let evaluation = evaluate(&md.data.inputs, &md.model, &options)?;
    let total_hits = evaluation
        .projections
        .first()
        .and_then(|p| p.sections.as_ref())
        .map(|s| s.hits.iter().sum());
    let doc = ReportDocument {
        format: "som3d-report",
        format_version: 1,
        grid: artifact.dims.to_string(),
        nodes: artifact.dims.node_count(),
        divisions: divisions.to_vec(),
        encoding: artifact.encoding.clone(),
        input: cfg.input.clone(),
        rejected_rows: md.rejected,
        skipped_unknown_category: md.data.skipped.len(),
        total_hits,
        evaluation,
    };
    let out = cfg.out_dir();
    ensure_dir(&out)?;
    let mut text = serde_json::to_string_pretty(&doc).expect("report is serializable");
    text.push('\n');
    write_file(&out.join(REPORT_FILE), &text)?;
    log::info!("wrote {}", out.join(REPORT_FILE).display());
    Ok(doc)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProjectionChoice {
    /// One of the standard projections, e.g. `day-lat-lon` or `day-week`.
    Named(String),
    /// Explicit vector components; divisions come from the run config.
    Axes(Vec<usize>),
}

fn resolve_projection(choice: &ProjectionChoice, artifact: &ModelArtifact, cfg: &RunConfig) -> Result<ProjectionSpec> {
    match choice {
        ProjectionChoice::Named(name) => {
            let all = default_projections(&artifact.encoding.periods, cfg.divisions3()?);
            let names: Vec<&str> = all.iter().map(|p| p.name.as_str()).collect();
            let msg = format!("unknown projection {name:?}; available: {}", names.join(", "));
            all.iter()
                .find(|p| &p.name == name)
                .cloned()
                .ok_or(CliError::Som(som3d::SomError::InvalidAxes(msg)))
        }
        ProjectionChoice::Axes(axes) => {
            validate_axes(axes, artifact.dim)?;
            if cfg.divisions.0.len() != axes.len() {
                return Err(CliError::Usage(format!(
                    "{} axes need {} divisions, got {}",
                    axes.len(),
                    axes.len(),
                    cfg.divisions
                )));
            }
            let names: Vec<String> = axes.iter().map(usize::to_string).collect();
            Ok(ProjectionSpec {
                name: format!("axes-{}", names.join("-")),
                axes: axes.clone(),
                divisions: cfg.divisions.0.clone(),
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExportSummary {
    pub projection: ProjectionSpec,
    pub files: Vec<PathBuf>,
    /// Input count per exported slice.
    pub slice_totals: Vec<u64>,
}

fn matrix_csv(counts: &[u64], cols: usize) -> String {
    let mut s = String::new();
    for row in counts.chunks(cols) {
        let cells: Vec<String> = row.iter().map(u64::to_string).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

/// Input density matrices for a projection plus the projected position
/// and hit count of the nodes that fall in each slice.
///
/// With three axes there is one `density_<name>_s<k>.csv` per cell along
/// the first axis (rows = second axis, columns = third); with two axes a
/// single `density_<name>.csv`. Node lists and a bounds file sit alongside.
pub fn cmd_export_density(artifact: &ModelArtifact, cfg: &RunConfig, choice: &ProjectionChoice) -> Result<ExportSummary> {
    let spec = resolve_projection(choice, artifact, cfg)?;
    let md = model_data(artifact, cfg)?;
    let numeric: Vec<&[f64]> = md.data.inputs.iter().map(|x| x.numeric.as_slice()).collect();
    let points = project(&numeric, &spec.axes)?;
    let bounds = projected_bounds(&points)?;
    let tensor = frequency_tensor(&points, &bounds, &spec.divisions)?;
    let nodes = project(&md.model.codebook.to_vectors(), &spec.axes)?;
    let mut hits = vec![0u64; md.model.codebook.len()];
    for b in md.model.assign(&md.data.inputs)? {
        hits[b.bmu] += 1;
    }

    let out = cfg.out_dir();
    ensure_dir(&out)?;
    let mut files = Vec::new();
    let d = &spec.divisions;
    let (slices, suffix): (Vec<usize>, fn(usize) -> String) = if d.len() == 3 {
        ((0..d[0]).collect(), |s| format!("_s{s}"))
    } else {
        (vec![0], |_| String::new())
    };
    let mut slice_totals = Vec::new();
    for s in slices {
        let (counts, cols) = if d.len() == 3 {
            (tensor.slice(s).to_vec(), d[2])
        } else {
            (tensor.counts().to_vec(), d[1])
        };
        slice_totals.push(counts.iter().sum());
        let path = out.join(format!("density_{}{}.csv", spec.name, suffix(s)));
        write_file(&path, &matrix_csv(&counts, cols))?;
        files.push(path);

        let mut list = String::from(if d.len() == 3 { "node,u,v,hits\n" } else { "node,x,y,hits\n" });
        for (i, p) in nodes.iter().enumerate() {
            if d.len() == 3 && tensor.cell_along(0, p[0]) != s {
                continue;
            }
            let (x, y) = if d.len() == 3 { (p[1], p[2]) } else { (p[0], p[1]) };
            writeln!(list, "{i},{x},{y},{}", hits[i]).expect("string write");
        }
        let path = out.join(format!("nodes_{}{}.csv", spec.name, suffix(s)));
        write_file(&path, &list)?;
        files.push(path);
    }

    let mut b = String::from("axis,component,min,max,divisions\n");
    for (k, ((lo, hi), div)) in bounds.iter().zip(d).enumerate() {
        writeln!(b, "{k},{},{lo},{hi},{div}", spec.axes[k]).expect("string write");
    }
    let path = out.join(format!("bounds_{}.csv", spec.name));
    write_file(&path, &b)?;
    files.push(path);
    log::info!("wrote {} files for {} to {}", files.len(), spec.name, out.display());
    Ok(ExportSummary {
        projection: spec,
        files,
        slice_totals,
    })
}

/// Human-readable model summary.
pub fn cmd_inspect(artifact: &ModelArtifact) -> Result<String> {
    let model = artifact.to_model().map_err(|message| CliError::Artifact {
        path: PathBuf::from(MODEL_FILE),
        message,
    })?;
    let mut s = String::new();
    let w = &mut s;
    writeln!(w, "format      {} v{}", artifact.format, artifact.format_version).ok();
    writeln!(w, "grid        {} ({} nodes)", artifact.dims, artifact.dims.node_count()).ok();
    writeln!(w, "vector      {} components", artifact.dim).ok();
    writeln!(w, "periods     {}", period_names(&artifact.encoding)).ok();
    writeln!(w, "normalize   {:?}", artifact.encoding.normalization).ok();
    writeln!(w, "epochs      {}", artifact.config.epochs).ok();
    for k in 0..artifact.dim {
        let (lo, hi) = artifact
            .codebook
            .iter()
            .map(|r| r[k])
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
        writeln!(w, "component {k} spans [{lo:.6}, {hi:.6}]").ok();
    }
    if let (Some(ids), Some(vocab)) = (&model.node_ids, &model.vocabulary) {
        writeln!(w, "alpha       {}", model.alpha).ok();
        writeln!(w, "categories  {}", vocab.len()).ok();
        let unassigned = ids.iter().filter(|i| i.is_none()).count();
        for (idx, label) in vocab.labels().iter().enumerate() {
            let id = idx as u32 + 1;
            let n = ids.iter().filter(|&&i| i == Some(id)).count();
            writeln!(w, "  id {id:<3} {label:<24} {n} nodes").ok();
        }
        writeln!(w, "  unassigned {unassigned} nodes").ok();
    }
    Ok(s)
}
