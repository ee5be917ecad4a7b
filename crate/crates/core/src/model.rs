//! Shared domain types.

use std::collections::HashSet;
use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A raw geo-tagged record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TweetRecord {
    pub id: String,
    pub text: String,
    pub lat: f64,
    pub lon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub user_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub created_at: Option<DateTime<Utc>>,
}

impl TweetRecord {
    pub fn new(id: impl Into<String>, text: impl Into<String>, lat: f64, lon: f64) -> Self {
        Self {
            id: id.into(),
            text: text.into(),
            lat,
            lon,
            user_id: None,
            created_at: None,
        }
    }

    pub fn with_user(mut self, user_id: impl Into<String>, created_at: DateTime<Utc>) -> Self {
        self.user_id = Some(user_id.into());
        self.created_at = Some(created_at);
        self
    }
}

pub(crate) fn check_coordinate(lat: f64, lon: f64) -> Result<()> {
    // NaN fails both range checks
    if (-90.0..=90.0).contains(&lat) && (-180.0..=180.0).contains(&lon) {
        Ok(())
    } else {
        Err(Error::OutOfRangeCoordinate {
            lat,
            lon,
            line: None,
        })
    }
}

/// Returns the record unchanged if its coordinates are in range.
///
/// Text validity is guaranteed by `String`; byte-level input goes through
/// [`validate_text_bytes`] first.
pub fn validate_record(record: TweetRecord) -> Result<TweetRecord> {
    check_coordinate(record.lat, record.lon)?;
    Ok(record)
}

pub fn validate_text_bytes(bytes: &[u8]) -> Result<String> {
    String::from_utf8(bytes.to_vec()).map_err(|_| Error::MalformedText { line: None })
}

/// A point in the local planar frame, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanarPoint {
    pub x: f64,
    pub y: f64,
    /// Index into the originating record list.
    pub source_index: usize,
}

impl PlanarPoint {
    pub const fn new(x: f64, y: f64, source_index: usize) -> Self {
        Self { x, y, source_index }
    }

    #[inline]
    pub fn xy(&self) -> [f64; 2] {
        [self.x, self.y]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Relevance {
    Relevant,
    Irrelevant,
}

impl fmt::Display for Relevance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relevance::Relevant => "relevant",
            Relevance::Irrelevant => "irrelevant",
        })
    }
}

/// Planar points split into the relevant set `X` and the irrelevant set `Y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledDataset {
    pub relevant: Vec<PlanarPoint>,
    pub irrelevant: Vec<PlanarPoint>,
    /// `(lat, lon)` of the projection origin, degrees.
    pub projection_origin: (f64, f64),
}

impl LabeledDataset {
    pub fn new(
        relevant: Vec<PlanarPoint>,
        irrelevant: Vec<PlanarPoint>,
        projection_origin: (f64, f64),
    ) -> Result<Self> {
        for p in relevant.iter().chain(&irrelevant) {
            if !(p.x.is_finite() && p.y.is_finite()) {
                return Err(Error::Invariant(format!(
                    "non-finite planar coordinate for source index {}",
                    p.source_index
                )));
            }
        }
        let ids: HashSet<usize> = relevant.iter().map(|p| p.source_index).collect();
        if let Some(p) = irrelevant.iter().find(|p| ids.contains(&p.source_index)) {
            return Err(Error::Invariant(format!(
                "source index {} is both relevant and irrelevant",
                p.source_index
            )));
        }
        Ok(Self {
            relevant,
            irrelevant,
            projection_origin,
        })
    }

    /// Builds a dataset from bare coordinates, numbering relevant points
    /// first and irrelevant points after them.
    pub fn from_xy(relevant: &[[f64; 2]], irrelevant: &[[f64; 2]]) -> Result<Self> {
        let n = relevant.len();
        let x = relevant
            .iter()
            .enumerate()
            .map(|(i, p)| PlanarPoint::new(p[0], p[1], i))
            .collect();
        let y = irrelevant
            .iter()
            .enumerate()
            .map(|(i, p)| PlanarPoint::new(p[0], p[1], n + i))
            .collect();
        Self::new(x, y, (0.0, 0.0))
    }

    /// `n`
    pub fn n(&self) -> usize {
        self.relevant.len()
    }

    /// `m`
    pub fn m(&self) -> usize {
        self.irrelevant.len()
    }

    pub fn len(&self) -> usize {
        self.n() + self.m()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Same relevant points, empty irrelevant set.
    pub fn relevant_only(&self) -> Self {
        Self {
            relevant: self.relevant.clone(),
            irrelevant: Vec::new(),
            projection_origin: self.projection_origin,
        }
    }

    /// Point by combined index: `0..n` are relevant, `n..n+m` irrelevant.
    pub fn point(&self, combined: usize) -> &PlanarPoint {
        if combined < self.n() {
            &self.relevant[combined]
        } else {
            &self.irrelevant[combined - self.n()]
        }
    }

    pub fn iter_all(&self) -> impl Iterator<Item = (Relevance, &PlanarPoint)> {
        self.relevant
            .iter()
            .map(|p| (Relevance::Relevant, p))
            .chain(self.irrelevant.iter().map(|p| (Relevance::Irrelevant, p)))
    }
}

/// Crisp DBSTexC parameters `(ε, N_min, N_max)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterParams {
    pub epsilon: f64,
    pub n_min: usize,
    pub n_max: usize,
}

impl ClusterParams {
    pub fn new(epsilon: f64, n_min: usize, n_max: usize) -> Result<Self> {
        let p = Self {
            epsilon,
            n_min,
            n_max,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_epsilon(self.epsilon)?;
        if self.n_min < 1 {
            return Err(Error::InvalidParams("n_min must be at least 1".into()));
        }
        Ok(())
    }
}

/// Fuzzy parameters `(ε, N_min1, N_min2, N_max1, N_max2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FuzzyParams {
    pub epsilon: f64,
    pub n_min1: usize,
    pub n_min2: usize,
    pub n_max1: usize,
    pub n_max2: usize,
}

impl FuzzyParams {
    pub fn new(
        epsilon: f64,
        n_min1: usize,
        n_min2: usize,
        n_max1: usize,
        n_max2: usize,
    ) -> Result<Self> {
        let p = Self {
            epsilon,
            n_min1,
            n_min2,
            n_max1,
            n_max2,
        };
        p.validate()?;
        Ok(p)
    }

    /// The degenerate setting that reproduces crisp DBSTexC.
    pub fn crisp(params: &ClusterParams) -> Self {
        Self {
            epsilon: params.epsilon,
            n_min1: params.n_min,
            n_min2: params.n_min,
            n_max1: params.n_max,
            n_max2: params.n_max,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_epsilon(self.epsilon)?;
        if !(1 <= self.n_min1 && self.n_min1 <= self.n_min2) {
            return Err(Error::InvalidParams(format!(
                "need 1 <= n_min1 <= n_min2, got n_min1={} n_min2={}",
                self.n_min1, self.n_min2
            )));
        }
        if self.n_max1 > self.n_max2 {
            return Err(Error::InvalidParams(format!(
                "need n_max1 <= n_max2, got n_max1={} n_max2={}",
                self.n_max1, self.n_max2
            )));
        }
        Ok(())
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!(
            "epsilon must be positive and finite, got {epsilon}"
        )))
    }
}

/// Cluster assignment of a single point.
///
/// Noise is its own variant so it can never be mistaken for a cluster number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    Noise,
    /// 1-based cluster number.
    Cluster(u32),
}

impl Label {
    pub fn is_noise(self) -> bool {
        matches!(self, Label::Noise)
    }

    pub fn cluster(self) -> Option<u32> {
        match self {
            Label::Noise => None,
            Label::Cluster(c) => Some(c),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Noise => f.write_str("noise"),
            Label::Cluster(c) => write!(f, "{c}"),
        }
    }
}

/// Output of one clustering run.
///
/// `labels` and `fuzzy_scores` are indexed over `X` then `Y`; `core_flags`
/// covers `X` only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteringResult {
    pub labels: Vec<Label>,
    pub core_flags: Vec<bool>,
    pub fuzzy_scores: Option<Vec<f64>>,
    pub num_clusters: usize,
}

impl ClusteringResult {
    pub fn n(&self) -> usize {
        self.core_flags.len()
    }

    pub fn relevant_labels(&self) -> &[Label] {
        &self.labels[..self.n()]
    }

    pub fn irrelevant_labels(&self) -> &[Label] {
        &self.labels[self.n()..]
    }

    pub fn is_clustered(&self, combined: usize) -> bool {
        !self.labels[combined].is_noise()
    }

    /// Combined indices of the members of cluster `c`.
    pub fn members(&self, c: u32) -> impl Iterator<Item = usize> + '_ {
        self.labels
            .iter()
            .enumerate()
            .filter(move |(_, l)| **l == Label::Cluster(c))
            .map(|(i, _)| i)
    }

    /// Checks the structural invariants: cores are labeled, labels are
    /// contiguous `1..=C`, and fuzzy scores are in `[0, 1]`.
    pub fn check_invariants(&self, dataset: &LabeledDataset) -> Result<()> {
        if self.labels.len() != dataset.len() || self.n() != dataset.n() {
            return Err(Error::Invariant(format!(
                "result sized {}/{} for dataset {}/{}",
                self.labels.len(),
                self.n(),
                dataset.len(),
                dataset.n()
            )));
        }
        for (i, &core) in self.core_flags.iter().enumerate() {
            if core && self.labels[i].is_noise() {
                return Err(Error::Invariant(format!("core point {i} labeled noise")));
            }
        }
        let mut seen = vec![false; self.num_clusters];
        for l in &self.labels {
            if let Label::Cluster(c) = *l {
                let c = c as usize;
                if c == 0 || c > self.num_clusters {
                    return Err(Error::Invariant(format!(
                        "label {c} outside 1..={}",
                        self.num_clusters
                    )));
                }
                seen[c - 1] = true;
            }
        }
        if let Some(c) = seen.iter().position(|s| !s) {
            return Err(Error::Invariant(format!("cluster {} has no members", c + 1)));
        }
        if let Some(mu) = &self.fuzzy_scores {
            if mu.len() != self.labels.len() || mu.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(Error::Invariant("fuzzy scores malformed".into()));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_in_range_coordinate() {
        let r = TweetRecord::new("1", "x", 51.5074, -0.1657);
        assert_eq!(validate_record(r.clone()).unwrap(), r);
    }

    #[test]
    fn rejects_latitude_above_ninety() {
        let r = TweetRecord::new("1", "x", 91.0, 0.0);
        assert!(matches!(
            validate_record(r),
            Err(Error::OutOfRangeCoordinate { .. })
        ));
    }

    #[test]
    fn rejects_nan_and_longitude_overflow() {
        assert!(validate_record(TweetRecord::new("1", "", f64::NAN, 0.0)).is_err());
        assert!(validate_record(TweetRecord::new("1", "", 0.0, 180.5)).is_err());
        assert!(validate_record(TweetRecord::new("1", "", -90.0, -180.0)).is_ok());
    }

    #[test]
    fn empty_text_is_fine() {
        assert!(validate_record(TweetRecord::new("1", "", 0.0, 0.0)).is_ok());
    }

    #[test]
    fn invalid_utf8_bytes() {
        assert!(matches!(
            validate_text_bytes(&[0x66, 0xff, 0x6f]),
            Err(Error::MalformedText { .. })
        ));
        assert_eq!(validate_text_bytes("Hyde Park".as_bytes()).unwrap(), "Hyde Park");
    }

    #[test]
    fn dataset_rejects_shared_source_index() {
        let p = PlanarPoint::new(0.0, 0.0, 7);
        assert!(LabeledDataset::new(vec![p], vec![p], (0.0, 0.0)).is_err());
    }

    #[test]
    fn duplicate_coordinates_are_distinct_points() {
        let ds = LabeledDataset::from_xy(&[[1.0, 1.0], [1.0, 1.0]], &[[1.0, 1.0]]).unwrap();
        assert_eq!((ds.n(), ds.m()), (2, 1));
        assert_eq!(ds.point(2).source_index, 2);
    }

    #[test]
    fn param_validation() {
        assert!(ClusterParams::new(0.0, 1, 0).is_err());
        assert!(ClusterParams::new(1.0, 0, 0).is_err());
        assert!(ClusterParams::new(1.0, 1, 0).is_ok());
        assert!(FuzzyParams::new(1.0, 3, 2, 0, 0).is_err());
        assert!(FuzzyParams::new(1.0, 2, 3, 4, 1).is_err());
        assert!(FuzzyParams::new(1.0, 2, 3, 1, 4).is_ok());
    }
}
