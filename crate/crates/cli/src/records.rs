//! CSV ingestion of incident records.

use std::fmt;
use std::path::Path;

use chrono::{NaiveDate, NaiveDateTime, NaiveTime};
use serde::{Deserialize, Serialize};
use som3d::IncidentRecord;

use crate::error::{CliError, Result};

/// Which header names hold each field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ColumnMapping {
    pub date: String,
    pub time: String,
    pub latitude: String,
    pub longitude: String,
    pub category: Option<String>,
}

impl Default for ColumnMapping {
    fn default() -> Self {
        Self {
            date: "date".into(),
            time: "time".into(),
            latitude: "latitude".into(),
            longitude: "longitude".into(),
            category: None,
        }
    }
}

/// A rejected row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowError {
    pub line: u64,
    pub reason: String,
}

impl fmt::Display for RowError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.reason)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedRecords {
    pub records: Vec<IncidentRecord>,
    /// Rows skipped in lenient mode, in file order.
    pub rejected: Vec<RowError>,
}

struct Columns {
    date: usize,
    time: usize,
    latitude: usize,
    longitude: usize,
    category: Option<usize>,
}

impl Columns {
    fn locate(path: &Path, header: &csv::StringRecord, mapping: &ColumnMapping) -> Result<Self> {
        let find = |name: &str| {
            header
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| CliError::MissingColumn {
                    path: path.to_path_buf(),
                    column: name.to_owned(),
                    header: header.iter().collect::<Vec<_>>().join(","),
                })
        };
        Ok(Self {
            date: find(&mapping.date)?,
            time: find(&mapping.time)?,
            latitude: find(&mapping.latitude)?,
            longitude: find(&mapping.longitude)?,
            category: mapping.category.as_deref().map(find).transpose()?,
        })
    }
}

pub fn parse_date(s: &str) -> std::result::Result<NaiveDate, String> {
    NaiveDate::parse_from_str(s, "%Y-%m-%d").map_err(|_| format!("bad date {s:?}, expected YYYY-MM-DD"))
}

pub fn parse_time(s: &str) -> std::result::Result<NaiveTime, String> {
    NaiveTime::parse_from_str(s, "%H:%M:%S")
        .or_else(|_| NaiveTime::parse_from_str(s, "%H:%M"))
        .map_err(|_| format!("bad time {s:?}, expected HH:MM or HH:MM:SS"))
}

fn parse_coord(s: &str, what: &str) -> std::result::Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(format!("bad {what} {s:?}")),
    }
}

fn parse_row(row: &csv::StringRecord, cols: &Columns, line: u64) -> std::result::Result<IncidentRecord, String> {
    let field = |i: usize, name: &str| row.get(i).ok_or_else(|| format!("missing field {name}"));
    let date = parse_date(field(cols.date, "date")?)?;
    let time = parse_time(field(cols.time, "time")?)?;
    let latitude = parse_coord(field(cols.latitude, "latitude")?, "latitude")?;
    let longitude = parse_coord(field(cols.longitude, "longitude")?, "longitude")?;
    let category = match cols.category {
        Some(i) => match field(i, "category")? {
            "" => return Err("empty category".into()),
            label => Some(label.to_owned()),
        },
        None => None,
    };
    IncidentRecord::new(NaiveDateTime::new(date, time), latitude, longitude, category)
        .map(|r| r.at_line(line as usize))
        .map_err(|e| e.to_string())
}

/// Reads a headed CSV file. In strict mode the first bad row aborts; in
/// lenient mode bad rows are reported and skipped unless they are more than
/// half of the file.
pub fn load_records(path: &Path, mapping: &ColumnMapping, strict: bool) -> Result<LoadedRecords> {
    let file = std::fs::File::open(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let csv_err = |source| CliError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let header = reader.headers().map_err(csv_err)?.clone();
    let cols = Columns::locate(path, &header, mapping)?;

    let mut records = Vec::new();
    let mut rejected = Vec::new();
    let mut total = 0usize;
    for row in reader.records() {
        let row = row.map_err(csv_err)?;
        total += 1;
        let line = row.position().map_or(total as u64 + 1, |p| p.line());
        match parse_row(&row, &cols, line) {
            Ok(r) => records.push(r),
            Err(reason) => {
                let err = RowError { line, reason };
                if strict {
                    return Err(CliError::BadRow {
                        path: path.to_path_buf(),
                        row: err,
                    });
                }
                log::warn!("{}: skipping {err}", path.display());
                rejected.push(err);
            }
        }
    }
    if total == 0 {
        return Err(som3d::SomError::EmptyData.into());
    }
    if rejected.len() * 2 > total {
        return Err(CliError::TooManyBadRows {
            path: path.to_path_buf(),
            bad: rejected.len(),
            total,
            first: rejected.swap_remove(0),
        });
    }
    Ok(LoadedRecords { records, rejected })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn three_rows() {
        let f = write(
            "date,time,latitude,longitude\n\
             2015-01-01,08:30,40.7,-74.0\n\
             2015-01-02,23:59:59,40.8,-73.9\n\
             2015-01-03,00:00,40.6,-73.8\n",
        );
        let out = load_records(f.path(), &ColumnMapping::default(), true).unwrap();
        assert_eq!(out.records.len(), 3);
        assert!(out.rejected.is_empty());
        assert_eq!(out.records[1].line, Some(3));
        assert_eq!(out.records[0].timestamp.to_string(), "2015-01-01 08:30:00");
    }

    #[test]
    fn latitude_out_of_range_reports_line() {
        let f = write(
            "date,time,latitude,longitude\n\
             2015-01-01,08:30,40.7,-74.0\n\
             2015-01-01,08:30,91.0,-74.0\n\
             2015-01-01,09:30,40.7,-74.0\n",
        );
        let out = load_records(f.path(), &ColumnMapping::default(), false).unwrap();
        assert_eq!(out.records.len(), 2);
        assert_eq!(out.rejected.len(), 1);
        assert_eq!(out.rejected[0].line, 3);
        assert!(out.rejected[0].reason.contains("latitude"));

        match load_records(f.path(), &ColumnMapping::default(), true) {
            Err(CliError::BadRow { row, .. }) => assert_eq!(row.line, 3),
            other => panic!("expected a bad row error, got {other:?}"),
        }
    }

    #[test]
    fn majority_bad_aborts() {
        let f = write(
            "date,time,latitude,longitude\n\
             2015-01-01,08:30,40.7,-74.0\n\
             2015-13-01,08:30,40.7,-74.0\n\
             2015-01-01,25:00,40.7,-74.0\n",
        );
        assert!(matches!(
            load_records(f.path(), &ColumnMapping::default(), false),
            Err(CliError::TooManyBadRows { bad: 2, total: 3, .. })
        ));
    }

    #[test]
    fn missing_file_and_column() {
        assert!(matches!(
            load_records(Path::new("/nonexistent/x.csv"), &ColumnMapping::default(), false),
            Err(CliError::Read { .. })
        ));
        let f = write("date,hour,latitude,longitude\n2015-01-01,08:30,40.7,-74.0\n");
        assert!(matches!(
            load_records(f.path(), &ColumnMapping::default(), false),
            Err(CliError::MissingColumn { column, .. }) if column == "time"
        ));
    }

    #[test]
    fn custom_mapping_with_category() {
        let f = write(
            "Occurred Date,Occurred Time,Lat,Lon,Offense\n\
             2015-01-01,08:30,40.7,-74.0,BURGLARY\n\
             2015-01-01,08:30,40.7,-74.0,\n",
        );
        let mapping = ColumnMapping {
            date: "Occurred Date".into(),
            time: "Occurred Time".into(),
            latitude: "Lat".into(),
            longitude: "Lon".into(),
            category: Some("Offense".into()),
        };
        let out = load_records(f.path(), &mapping, false).unwrap();
        assert_eq!(out.records[0].category.as_deref(), Some("BURGLARY"));
        assert_eq!(out.rejected[0].reason, "empty category");
    }

    #[test]
    fn short_row_is_a_row_error() {
        let f = write("date,time,latitude,longitude\n2015-01-01,08:30,40.7\n2015-01-01,08:30,40.7,-74.0\n2015-01-01,08:31,40.7,-74.0\n");
        let out = load_records(f.path(), &ColumnMapping::default(), false).unwrap();
        assert_eq!(out.rejected[0].line, 2);
        assert!(out.rejected[0].reason.contains("longitude"));
    }
}
