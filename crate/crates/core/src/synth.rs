//! Seeded generators of synthetic incident data.

use chrono::{Duration, NaiveDate, NaiveDateTime};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::preprocess::IncidentRecord;

/// A Gaussian blob in time-of-day, latitude and longitude.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterSpec {
    /// Mean minute of the day.
    pub minute: f64,
    pub minute_sd: f64,
    pub latitude: f64,
    pub longitude: f64,
    /// Standard deviation in degrees for both spatial coordinates.
    pub spatial_sd: f64,
    /// Relative share of points.
    pub weight: f64,
}

/// First day of the generated month.
fn base_date() -> NaiveDate {
    NaiveDate::from_ymd_opt(2015, 1, 1).expect("valid date")
}

fn timestamp(day: u32, minute: f64) -> NaiveDateTime {
    let minute = minute.round().clamp(0.0, 1439.0) as i64;
    base_date().and_hms_opt(0, 0, 0).expect("midnight")
        + Duration::days(i64::from(day))
        + Duration::minutes(minute)
}

fn pick_weighted(rng: &mut impl Rng, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if u < *w {
            return i;
        }
        u -= w;
    }
    weights.len() - 1
}

fn record(rng: &mut impl Rng, c: &ClusterSpec, day: u32, category: Option<String>) -> IncidentRecord {
    let t = Normal::new(c.minute, c.minute_sd).expect("finite sd");
    let s = Normal::new(0.0, c.spatial_sd).expect("finite sd");
    let lat = (c.latitude + s.sample(rng)).clamp(-90.0, 90.0);
    let lon = (c.longitude + s.sample(rng)).clamp(-180.0, 180.0);
    IncidentRecord {
        timestamp: timestamp(day, t.sample(rng)),
        latitude: lat,
        longitude: lon,
        category,
        line: None,
    }
}

/// Points drawn from weighted clusters on uniformly random days of one month.
pub fn clustered_records(clusters: &[ClusterSpec], n: usize, seed: u64) -> Vec<IncidentRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights: Vec<f64> = clusters.iter().map(|c| c.weight).collect();
    (0..n)
        .map(|_| {
            let c = &clusters[pick_weighted(&mut rng, &weights)];
            let day = rng.random_range(0..31);
            record(&mut rng, c, day, None)
        })
        .collect()
}

/// Morning, afternoon and late-evening hot spots a few kilometres apart.
pub fn three_clusters() -> Vec<ClusterSpec> {
    vec![
        ClusterSpec {
            minute: 8.0 * 60.0,
            minute_sd: 70.0,
            latitude: 40.70,
            longitude: -74.00,
            spatial_sd: 0.015,
            weight: 0.40,
        },
        ClusterSpec {
            minute: 14.0 * 60.0,
            minute_sd: 90.0,
            latitude: 40.80,
            longitude: -73.92,
            spatial_sd: 0.02,
            weight: 0.35,
        },
        ClusterSpec {
            minute: 21.0 * 60.0,
            minute_sd: 60.0,
            latitude: 40.66,
            longitude: -73.85,
            spatial_sd: 0.015,
            weight: 0.25,
        },
    ]
}

/// The daily peak moves later by `shift_minutes` per day of the week,
/// starting at `first_peak` on Monday.
pub fn shifting_peak_records(n: usize, first_peak: f64, shift_minutes: f64, seed: u64) -> Vec<IncidentRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spots = [(40.72, -73.98), (40.82, -73.90)];
    let s = Normal::new(0.0, 0.02).expect("finite sd");
    let t = Normal::new(0.0, 45.0).expect("finite sd");
    (0..n)
        .map(|_| {
            // January 5th 2015 is a Monday; four full weeks follow.
            let weekday = rng.random_range(0..7u32);
            let week = rng.random_range(0..4u32);
            let day = 4 + week * 7 + weekday;
            let minute = first_peak + shift_minutes * f64::from(weekday) + t.sample(&mut rng);
            let (lat, lon) = spots[rng.random_range(0..spots.len())];
            IncidentRecord {
                timestamp: timestamp(day, minute),
                latitude: lat + s.sample(&mut rng),
                longitude: lon + s.sample(&mut rng),
                category: None,
                line: None,
            }
        })
        .collect()
}

/// Uniform over the day and over a `lat_span x lon_span` degree box, so on
/// the raw scale the time fraction carries most of the variance.
pub fn time_dominant_records(n: usize, lat_span: f64, lon_span: f64, seed: u64) -> Vec<IncidentRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let day = rng.random_range(0..31);
            let minute = f64::from(rng.random_range(0..1440u32));
            IncidentRecord {
                timestamp: timestamp(day, minute),
                latitude: 40.70 + lat_span * rng.random::<f64>(),
                longitude: -74.00 + lon_span * rng.random::<f64>(),
                category: None,
                line: None,
            }
        })
        .collect()
}

/// Labelled records: category `i` has share `shares[i]` and its own
/// hot spot; labels are `c1`, `c2`, ... in order of appearance of shares.
pub fn mixed_category_records(shares: &[f64], n: usize, seed: u64) -> Vec<IncidentRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers: Vec<ClusterSpec> = (0..shares.len())
        .map(|i| {
            let angle = i as f64 * std::f64::consts::TAU / shares.len() as f64;
            ClusterSpec {
                minute: 300.0 + 200.0 * i as f64,
                minute_sd: 120.0,
                latitude: 40.75 + 0.05 * angle.sin(),
                longitude: -73.95 + 0.05 * angle.cos(),
                spatial_sd: 0.03,
                weight: shares[i],
            }
        })
        .collect();
    (0..n)
        .map(|_| {
            let i = pick_weighted(&mut rng, shares);
            let day = rng.random_range(0..31);
            record(&mut rng, &centers[i], day, Some(format!("c{}", i + 1)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::Datelike;

    #[test]
    fn seeded_generators_repeat() {
        let c = three_clusters();
        assert_eq!(clustered_records(&c, 50, 1), clustered_records(&c, 50, 1));
        assert_ne!(clustered_records(&c, 50, 1), clustered_records(&c, 50, 2));
        assert_eq!(shifting_peak_records(30, 360.0, 120.0, 3), shifting_peak_records(30, 360.0, 120.0, 3));
    }

    #[test]
    fn records_are_valid() {
        for r in clustered_records(&three_clusters(), 500, 7) {
            r.validate().unwrap();
            assert_eq!(r.timestamp.month(), 1);
        }
        for r in time_dominant_records(200, 0.3, 0.1, 2) {
            r.validate().unwrap();
            assert!((40.70..=41.0).contains(&r.latitude));
        }
        let labelled = mixed_category_records(&[0.7, 0.3], 200, 4);
        assert!(labelled.iter().all(|r| r.category.is_some()));
    }
}
