#![allow(dead_code)]

use std::path::{Path, PathBuf};

use som3d::IncidentRecord;

/// Writes records in the default column layout, with a `category` column
/// when any record is labelled.
pub fn write_csv(path: &Path, records: &[IncidentRecord]) {
    let labelled = records.iter().any(|r| r.category.is_some());
    let mut w = csv::Writer::from_path(path).unwrap();
    let mut header = vec!["date", "time", "latitude", "longitude"];
    if labelled {
        header.push("category");
    }
    w.write_record(&header).unwrap();
    for r in records {
        let mut row = vec![
            r.timestamp.format("%Y-%m-%d").to_string(),
            r.timestamp.format("%H:%M:%S").to_string(),
            r.latitude.to_string(),
            r.longitude.to_string(),
        ];
        if labelled {
            row.push(r.category.clone().unwrap_or_default());
        }
        w.write_record(&row).unwrap();
    }
    w.flush().unwrap();
}

pub fn clustered_csv(dir: &Path, n: usize, seed: u64) -> PathBuf {
    let path = dir.join("incidents.csv");
    write_csv(&path, &som3d::synth::clustered_records(&som3d::synth::three_clusters(), n, seed));
    path
}
