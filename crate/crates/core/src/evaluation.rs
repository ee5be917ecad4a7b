//! Precision/recall/F1, clusters' area and the `Ā^α·F1` metric, plus
//! exhaustive parameter sweeps.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::io::Write;

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clustering::{dbscan, dbstexc, f_dbstexc};
use crate::error::{Error, Result};
use crate::geo::{convex_hull_xy, union_area, Projection, Shape, DEFAULT_AREA_RESOLUTION};
use crate::index::RangeQueryBackend;
use crate::ingest::QueryRegion;
use crate::model::{ClusterParams, ClusteringResult, FuzzyParams, Label, LabeledDataset};

/// Header of sweep and report CSV files.
pub const REPORT_CSV_HEADER: [&str; 18] = [
    "algorithm",
    "epsilon",
    "n_min",
    "n_max",
    "n_min1",
    "n_min2",
    "n_max1",
    "n_max2",
    "alpha",
    "tp",
    "fp",
    "fn",
    "precision",
    "recall",
    "f1",
    "area_m2",
    "area_norm",
    "score",
];

/// Knobs shared by every evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalOptions {
    /// Fuzzy members with `μ < tau` count as unclustered. Ignored for crisp results.
    pub tau: f64,
    /// Raster cell edge for the area computation, meters.
    pub resolution: f64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            tau: 0.0,
            resolution: DEFAULT_AREA_RESOLUTION,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl Confusion {
    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    /// Harmonic mean of precision and recall; 0 when nothing is clustered.
    pub fn f1(&self) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if p + r > 0.0 {
            2.0 * p * r / (p + r)
        } else {
            0.0
        }
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub area_m2: f64,
    /// Clusters' area over the query-region area, in `[0, 1]`.
    pub area_norm: f64,
    pub alpha: f64,
    /// `area_norm^alpha · f1`
    pub score: f64,
}

impl EvalReport {
    pub fn new(confusion: Confusion, area_m2: f64, region_area: f64, alpha: f64) -> Self {
        let area_norm = if region_area > 0.0 {
            (area_m2 / region_area).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let f1 = confusion.f1();
        Self {
            tp: confusion.tp,
            fp: confusion.fp,
            fn_: confusion.fn_,
            precision: confusion.precision(),
            recall: confusion.recall(),
            f1,
            area_m2,
            area_norm,
            alpha,
            score: metric(area_norm, f1, alpha),
        }
    }

    pub fn with_alpha(&self, alpha: f64) -> Self {
        Self {
            alpha,
            score: metric(self.area_norm, self.f1, alpha),
            ..*self
        }
    }
}

/// `Ā^α · F1`, with `0^0 = 1` so that `α = 0` gives F1 exactly.
pub fn metric(area_norm: f64, f1: f64, alpha: f64) -> f64 {
    if alpha == 0.0 {
        f1
    } else {
        area_norm.powf(alpha) * f1
    }
}

fn counts_as_clustered(result: &ClusteringResult, i: usize, tau: f64) -> bool {
    match (&result.labels[i], &result.fuzzy_scores) {
        (Label::Noise, _) => false,
        (_, Some(mu)) => mu[i] >= tau,
        (_, None) => true,
    }
}

/// `tp` = clustered relevant, `fp` = clustered irrelevant, `fn` = relevant noise.
pub fn confusion(result: &ClusteringResult, dataset: &LabeledDataset) -> Confusion {
    confusion_at(result, dataset, 0.0)
}

pub fn confusion_at(result: &ClusteringResult, dataset: &LabeledDataset, tau: f64) -> Confusion {
    let n = dataset.n();
    let tp = (0..n).filter(|&i| counts_as_clustered(result, i, tau)).count();
    let fp = (n..dataset.len())
        .filter(|&i| counts_as_clustered(result, i, tau))
        .count();
    Confusion {
        tp,
        fp,
        fn_: n - tp,
    }
}

/// Planar center of the query region in the dataset's frame.
pub fn region_center(region: &QueryRegion, dataset: &LabeledDataset) -> Result<[f64; 2]> {
    let (lat, lon) = dataset.projection_origin;
    let proj = Projection::new(lat, lon)?;
    Ok(proj.project(region.center.0, region.center.1, 0)?.xy())
}

/// Per-cluster member coordinates, keyed by cluster number.
pub fn cluster_members(
    result: &ClusteringResult,
    dataset: &LabeledDataset,
    tau: f64,
) -> BTreeMap<u32, Vec<[f64; 2]>> {
    let mut members: BTreeMap<u32, Vec<[f64; 2]>> = BTreeMap::new();
    for i in 0..dataset.len() {
        if let Label::Cluster(c) = result.labels[i] {
            if counts_as_clustered(result, i, tau) {
                members.entry(c).or_default().push(dataset.point(i).xy());
            }
        }
    }
    members
}

/// Shape covered by one cluster: its convex hull, or a disk of radius
/// `epsilon` around the member centroid when the hull is degenerate.
pub fn cluster_shape(members: &[[f64; 2]], epsilon: f64) -> Shape {
    let hull = convex_hull_xy(members.to_vec());
    if hull.is_degenerate() {
        let k = members.len().max(1) as f64;
        let (sx, sy) = members
            .iter()
            .fold((0.0, 0.0), |(sx, sy), p| (sx + p[0], sy + p[1]));
        Shape::Disk {
            center: [sx / k, sy / k],
            radius: epsilon,
        }
    } else {
        Shape::Polygon(hull)
    }
}

/// Area of the union of all cluster shapes, clipped to the query disk.
pub fn cluster_area(
    result: &ClusteringResult,
    dataset: &LabeledDataset,
    region: &QueryRegion,
    epsilon: f64,
    options: &EvalOptions,
) -> Result<f64> {
    let center = region_center(region, dataset)?;
    let shapes: Vec<Shape> = cluster_members(result, dataset, options.tau)
        .values()
        .map(|m| cluster_shape(m, epsilon))
        .collect();
    Ok(union_area(
        &shapes,
        Some((center, region.radius)),
        options.resolution,
    ))
}

/// Full report for one result and one `alpha`.
pub fn score(
    result: &ClusteringResult,
    dataset: &LabeledDataset,
    region: &QueryRegion,
    epsilon: f64,
    alpha: f64,
    options: &EvalOptions,
) -> Result<EvalReport> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParams(format!("alpha must be >= 0, got {alpha}")));
    }
    let conf = confusion_at(result, dataset, options.tau);
    let area = cluster_area(result, dataset, region, epsilon, options)?;
    Ok(EvalReport::new(conf, area, region.area(), alpha))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    Dbscan,
    Dbstexc,
    FDbstexc,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Dbscan => "dbscan",
            Algorithm::Dbstexc => "dbstexc",
            Algorithm::FDbstexc => "f_dbstexc",
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "dbscan" => Ok(Self::Dbscan),
            "dbstexc" => Ok(Self::Dbstexc),
            "f_dbstexc" | "fdbstexc" | "fuzzy" => Ok(Self::FDbstexc),
            other => Err(format!("unknown algorithm `{other}`")),
        }
    }
}

/// One parameter setting of one algorithm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ParamSet {
    Dbscan { epsilon: f64, n_min: usize },
    Dbstexc(ClusterParams),
    Fuzzy(FuzzyParams),
}

impl ParamSet {
    pub fn algorithm(&self) -> Algorithm {
        match self {
            ParamSet::Dbscan { .. } => Algorithm::Dbscan,
            ParamSet::Dbstexc(_) => Algorithm::Dbstexc,
            ParamSet::Fuzzy(_) => Algorithm::FDbstexc,
        }
    }

    pub fn epsilon(&self) -> f64 {
        match self {
            ParamSet::Dbscan { epsilon, .. } => *epsilon,
            ParamSet::Dbstexc(p) => p.epsilon,
            ParamSet::Fuzzy(p) => p.epsilon,
        }
    }

    pub fn run(&self, dataset: &LabeledDataset, backend: &RangeQueryBackend<'_>) -> ClusteringResult {
        match self {
            ParamSet::Dbscan { epsilon, n_min } => dbscan(dataset, backend, *epsilon, *n_min),
            ParamSet::Dbstexc(p) => dbstexc(dataset, backend, p),
            ParamSet::Fuzzy(p) => f_dbstexc(dataset, backend, p),
        }
    }

    /// `(ε, lower relevant bound, upper irrelevant bound, rest...)`. DBSCAN
    /// has no irrelevant bound and reports 0.
    fn key(&self) -> (f64, usize, usize, usize, usize) {
        match *self {
            ParamSet::Dbscan { epsilon, n_min } => (epsilon, n_min, 0, n_min, 0),
            ParamSet::Dbstexc(p) => (p.epsilon, p.n_min, p.n_max, p.n_min, p.n_max),
            ParamSet::Fuzzy(p) => (p.epsilon, p.n_min1, p.n_max2, p.n_min2, p.n_max1),
        }
    }

    /// Ascending parameter order used for output tables.
    pub fn cmp_params(&self, other: &Self) -> Ordering {
        let (a, b) = (self.key(), other.key());
        a.0.total_cmp(&b.0)
            .then(a.1.cmp(&b.1))
            .then(a.2.cmp(&b.2))
            .then(a.3.cmp(&b.3))
            .then(a.4.cmp(&b.4))
    }

    /// Preference among equal scores: smaller ε, smaller `N_min`, larger
    /// `N_max`, then ascending parameter order.
    fn cmp_preference(&self, other: &Self) -> Ordering {
        let (a, b) = (self.key(), other.key());
        a.0.total_cmp(&b.0)
            .then(a.1.cmp(&b.1))
            .then(b.2.cmp(&a.2))
            .then(a.3.cmp(&b.3))
            .then(a.4.cmp(&b.4))
    }

    /// The seven parameter columns of the report CSV, blank when unused.
    pub fn csv_columns(&self) -> [String; 7] {
        let s = |v: usize| v.to_string();
        let blank = String::new;
        match *self {
            ParamSet::Dbscan { epsilon, n_min } => [
                epsilon.to_string(),
                s(n_min),
                blank(),
                blank(),
                blank(),
                blank(),
                blank(),
            ],
            ParamSet::Dbstexc(p) => [
                p.epsilon.to_string(),
                s(p.n_min),
                s(p.n_max),
                blank(),
                blank(),
                blank(),
                blank(),
            ],
            ParamSet::Fuzzy(p) => [
                p.epsilon.to_string(),
                blank(),
                blank(),
                s(p.n_min1),
                s(p.n_min2),
                s(p.n_max1),
                s(p.n_max2),
            ],
        }
    }
}

/// An irrelevant-count bound in a sweep grid; `All` stands for `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NMax {
    Count(usize),
    All,
}

impl NMax {
    pub fn resolve(self, m: usize) -> usize {
        match self {
            NMax::Count(c) => c,
            NMax::All => m,
        }
    }
}

impl std::str::FromStr for NMax {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim() {
            "m" | "all" => Ok(NMax::All),
            t => t
                .parse()
                .map(NMax::Count)
                .map_err(|_| format!("bad N_max value `{t}` (integer or `m`)")),
        }
    }
}

/// Parameter grids and the `α` values to score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub epsilons: Vec<f64>,
    pub n_mins: Vec<usize>,
    pub n_maxs: Vec<NMax>,
    pub n_min1s: Vec<usize>,
    pub n_min2s: Vec<usize>,
    pub n_max1s: Vec<NMax>,
    pub n_max2s: Vec<NMax>,
    pub alphas: Vec<f64>,
    pub options: EvalOptions,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            epsilons: Vec::new(),
            n_mins: Vec::new(),
            n_maxs: Vec::new(),
            n_min1s: Vec::new(),
            n_min2s: Vec::new(),
            n_max1s: Vec::new(),
            n_max2s: Vec::new(),
            alphas: vec![0.0, 0.5, 0.75, 1.0],
            options: EvalOptions::default(),
        }
    }
}

impl SweepSpec {
    /// Every valid parameter setting of `algorithm`, sorted and deduplicated.
    pub fn cells(&self, algorithm: Algorithm, m: usize) -> Result<Vec<ParamSet>> {
        let need = |ok: bool, what: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::InvalidParams(format!("sweep grid `{what}` is empty")))
            }
        };
        need(!self.epsilons.is_empty(), "epsilon")?;
        need(!self.alphas.is_empty(), "alpha")?;
        let mut cells = Vec::new();
        match algorithm {
            Algorithm::Dbscan => {
                need(!self.n_mins.is_empty(), "n_min")?;
                for &epsilon in &self.epsilons {
                    for &n_min in &self.n_mins {
                        ClusterParams::new(epsilon, n_min, 0)?;
                        cells.push(ParamSet::Dbscan { epsilon, n_min });
                    }
                }
            }
            Algorithm::Dbstexc => {
                need(!self.n_mins.is_empty(), "n_min")?;
                need(!self.n_maxs.is_empty(), "n_max")?;
                for &epsilon in &self.epsilons {
                    for &n_min in &self.n_mins {
                        for n_max in &self.n_maxs {
                            let p = ClusterParams::new(epsilon, n_min, n_max.resolve(m))?;
                            cells.push(ParamSet::Dbstexc(p));
                        }
                    }
                }
            }
            Algorithm::FDbstexc => {
                need(!self.n_min1s.is_empty(), "n_min1")?;
                need(!self.n_min2s.is_empty(), "n_min2")?;
                need(!self.n_max1s.is_empty(), "n_max1")?;
                need(!self.n_max2s.is_empty(), "n_max2")?;
                for &epsilon in &self.epsilons {
                    for &a in &self.n_min1s {
                        for &b in &self.n_min2s {
                            for c in &self.n_max1s {
                                for d in &self.n_max2s {
                                    if let Ok(p) =
                                        FuzzyParams::new(epsilon, a, b, c.resolve(m), d.resolve(m))
                                    {
                                        cells.push(ParamSet::Fuzzy(p));
                                    }
                                }
                            }
                        }
                    }
                }
                if cells.is_empty() {
                    return Err(Error::InvalidParams(
                        "fuzzy grid has no setting with n_min1 <= n_min2 and n_max1 <= n_max2"
                            .into(),
                    ));
                }
            }
        }
        cells.sort_by(ParamSet::cmp_params);
        cells.dedup_by(|a, b| a.cmp_params(b) == Ordering::Equal);
        Ok(cells)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub params: ParamSet,
    pub report: EvalReport,
}

impl SweepRow {
    pub fn csv_record(&self) -> Vec<String> {
        let r = &self.report;
        let mut row = vec![self.params.algorithm().name().to_string()];
        row.extend(self.params.csv_columns());
        row.extend([
            r.alpha.to_string(),
            r.tp.to_string(),
            r.fp.to_string(),
            r.fn_.to_string(),
            r.precision.to_string(),
            r.recall.to_string(),
            r.f1.to_string(),
            r.area_m2.to_string(),
            r.area_norm.to_string(),
            r.score.to_string(),
        ]);
        row
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    /// Sorted by parameters, then `alpha` in the order of `SweepSpec::alphas`.
    pub rows: Vec<SweepRow>,
    /// Best row per `alpha`, in the order of `SweepSpec::alphas`.
    pub best: Vec<SweepRow>,
}

impl SweepResult {
    pub fn best_for(&self, alpha: f64) -> Option<&SweepRow> {
        self.best.iter().find(|r| r.report.alpha == alpha)
    }
}

/// Evaluates every grid cell of `algorithm` and picks the best row per `α`.
pub fn sweep(
    dataset: &LabeledDataset,
    backend: &RangeQueryBackend<'_>,
    region: &QueryRegion,
    spec: &SweepSpec,
    algorithm: Algorithm,
) -> Result<SweepResult> {
    for &a in &spec.alphas {
        if !(a >= 0.0 && a.is_finite()) {
            return Err(Error::InvalidParams(format!("alpha must be >= 0, got {a}")));
        }
    }
    let cells = spec.cells(algorithm, dataset.m())?;
    let center = region_center(region, dataset)?;
    let options = spec.options;

    let evaluate = |params: &ParamSet| -> Vec<SweepRow> {
        let result = params.run(dataset, backend);
        let conf = confusion_at(&result, dataset, options.tau);
        let shapes: Vec<Shape> = cluster_members(&result, dataset, options.tau)
            .values()
            .map(|m| cluster_shape(m, params.epsilon()))
            .collect();
        let area = union_area(&shapes, Some((center, region.radius)), options.resolution);
        let base = EvalReport::new(conf, area, region.area(), 0.0);
        spec.alphas
            .iter()
            .map(|&a| SweepRow {
                params: *params,
                report: base.with_alpha(a),
            })
            .collect()
    };

    #[cfg(feature = "parallel")]
    let rows: Vec<SweepRow> = cells.par_iter().flat_map_iter(evaluate).collect();
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<SweepRow> = cells.iter().flat_map(evaluate).collect();

    let best = spec
        .alphas
        .iter()
        .map(|&a| {
            *rows
                .iter()
                .filter(|r| r.report.alpha == a)
                .min_by(|x, y| {
                    y.report
                        .score
                        .total_cmp(&x.report.score)
                        .then_with(|| x.params.cmp_preference(&y.params))
                })
                .expect("non-empty grid")
        })
        .collect();
    Ok(SweepResult { rows, best })
}

/// Writes rows under [`REPORT_CSV_HEADER`].
pub fn write_report_csv<'a>(
    rows: impl IntoIterator<Item = &'a SweepRow>,
    writer: impl Write,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e.to_string()));
    w.write_record(REPORT_CSV_HEADER).map_err(io)?;
    for row in rows {
        w.write_record(row.csv_record()).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::BackendKind;

    fn result(labels: Vec<Label>, n: usize) -> ClusteringResult {
        ClusteringResult {
            core_flags: vec![false; n],
            labels,
            fuzzy_scores: None,
            num_clusters: 1,
        }
    }

    fn region(radius: f64) -> QueryRegion {
        QueryRegion {
            center: (0.0, 0.0),
            radius,
            precision_at_radius: 1.0,
            insufficient_precision: false,
        }
    }

    #[test]
    fn perfect_clustering() {
        let ds = LabeledDataset::from_xy(&[[0.0, 0.0]; 4], &[[5.0, 5.0]; 3]).unwrap();
        let mut labels = vec![Label::Cluster(1); 4];
        labels.extend([Label::Noise; 3]);
        let c = confusion(&result(labels, 4), &ds);
        assert_eq!((c.precision(), c.recall(), c.f1()), (1.0, 1.0, 1.0));
    }

    #[test]
    fn nothing_clustered() {
        let ds = LabeledDataset::from_xy(&[[0.0, 0.0]; 4], &[[5.0, 5.0]; 3]).unwrap();
        let c = confusion(&result(vec![Label::Noise; 7], 4), &ds);
        assert_eq!(c.tp, 0);
        assert_eq!((c.precision(), c.recall(), c.f1()), (0.0, 0.0, 0.0));
    }

    #[test]
    fn hand_computed_confusion() {
        let ds = LabeledDataset::from_xy(&[[0.0, 0.0]; 20], &[[1.0, 1.0]; 5]).unwrap();
        let mut labels = vec![Label::Cluster(1); 10];
        labels.extend([Label::Noise; 10]);
        labels.extend([Label::Cluster(1); 5]);
        let c = confusion(&result(labels, 20), &ds);
        assert_eq!((c.tp, c.fp, c.fn_), (10, 5, 10));
        assert!((c.precision() - 2.0 / 3.0).abs() < 1e-12);
        assert!((c.recall() - 0.5).abs() < 1e-12);
        assert!((c.f1() - 4.0 / 7.0).abs() < 1e-12);
    }

    #[test]
    fn fuzzy_threshold_drops_low_members() {
        let ds = LabeledDataset::from_xy(&[[0.0, 0.0]; 3], &[]).unwrap();
        let mut r = result(vec![Label::Cluster(1); 3], 3);
        r.fuzzy_scores = Some(vec![1.0, 0.4, 0.6]);
        assert_eq!(confusion_at(&r, &ds, 0.0).tp, 3);
        assert_eq!(confusion_at(&r, &ds, 0.5).tp, 2);
    }

    #[test]
    fn metric_values() {
        assert!((metric(0.25, 0.8, 0.5) - 0.4).abs() < 1e-15);
        assert_eq!(metric(0.0, 0.7, 0.0), 0.7);
        assert_eq!(metric(0.3, 0.7, 0.0), 0.7);
        assert_eq!(metric(1.0, 0.42, 0.75), 0.42);
    }

    #[test]
    fn lattice_square_area() {
        // 1 km x 1 km lattice at 50 m spacing, one cluster
        let pts: Vec<[f64; 2]> = (0..=20)
            .flat_map(|i| (0..=20).map(move |j| [i as f64 * 50.0, j as f64 * 50.0]))
            .collect();
        let n = pts.len();
        let ds = LabeledDataset::from_xy(&pts, &[]).unwrap();
        let r = result(vec![Label::Cluster(1); n], n);
        let area = cluster_area(&r, &ds, &region(5000.0), 60.0, &EvalOptions::default()).unwrap();
        assert!((area - 1e6).abs() <= 1e6 * 0.01, "{area}");
    }

    #[test]
    fn coincident_clusters_counted_once() {
        let sq = [[0.0, 0.0], [100.0, 0.0], [100.0, 100.0], [0.0, 100.0]];
        let pts: Vec<[f64; 2]> = sq.iter().chain(sq.iter()).copied().collect();
        let ds = LabeledDataset::from_xy(&pts, &[]).unwrap();
        let mut labels = vec![Label::Cluster(1); 4];
        labels.extend([Label::Cluster(2); 4]);
        let mut r = result(labels, 8);
        r.num_clusters = 2;
        let opts = EvalOptions {
            tau: 0.0,
            resolution: 1.0,
        };
        let area = cluster_area(&r, &ds, &region(1000.0), 10.0, &opts).unwrap();
        assert!((area - 1e4).abs() < 1e-6, "{area}");
    }

    #[test]
    fn two_point_cluster_is_epsilon_disk() {
        let ds = LabeledDataset::from_xy(&[[0.0, 0.0], [10.0, 0.0]], &[]).unwrap();
        let r = result(vec![Label::Cluster(1); 2], 2);
        let opts = EvalOptions {
            tau: 0.0,
            resolution: 0.5,
        };
        let eps = 100.0;
        let area = cluster_area(&r, &ds, &region(5000.0), eps, &opts).unwrap();
        let disk = std::f64::consts::PI * eps * eps;
        assert!((area - disk).abs() / disk < 2e-3, "{area} vs {disk}");
    }

    #[test]
    fn area_clipped_to_region() {
        let ds = LabeledDataset::from_xy(&[[0.0, 0.0], [10.0, 0.0]], &[]).unwrap();
        let r = result(vec![Label::Cluster(1); 2], 2);
        let rep = score(&r, &ds, &region(50.0), 1000.0, 1.0, &EvalOptions::default()).unwrap();
        assert!(rep.area_norm <= 1.0 && rep.area_norm > 0.95);
    }

    #[test]
    fn score_checks_alpha() {
        let ds = LabeledDataset::from_xy(&[[0.0, 0.0]], &[]).unwrap();
        let r = result(vec![Label::Cluster(1)], 1);
        let opts = EvalOptions::default();
        assert!(score(&r, &ds, &region(10.0), 1.0, -0.5, &opts).is_err());
        let rep = score(&r, &ds, &region(10.0), 1.0, 0.0, &opts).unwrap();
        assert_eq!(rep.score, rep.f1);
    }

    #[test]
    fn single_cell_sweep() {
        let ds = LabeledDataset::from_xy(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], &[]).unwrap();
        let b = RangeQueryBackend::build(&ds, BackendKind::KdTree);
        let spec = SweepSpec {
            epsilons: vec![2.0],
            n_mins: vec![2],
            n_maxs: vec![NMax::Count(0)],
            alphas: vec![0.5],
            ..Default::default()
        };
        let res = sweep(&ds, &b, &region(100.0), &spec, Algorithm::Dbstexc).unwrap();
        assert_eq!(res.rows.len(), 1);
        assert_eq!(res.best, res.rows);
    }

    #[test]
    fn sweep_tie_break_prefers_small_epsilon_and_large_n_max() {
        let ds = LabeledDataset::from_xy(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], &[]).unwrap();
        let b = RangeQueryBackend::build(&ds, BackendKind::KdTree);
        let spec = SweepSpec {
            epsilons: vec![3.0, 2.0],
            n_mins: vec![1, 2],
            n_maxs: vec![NMax::Count(0), NMax::Count(4)],
            alphas: vec![0.0],
            ..Default::default()
        };
        let res = sweep(&ds, &b, &region(100.0), &spec, Algorithm::Dbstexc).unwrap();
        assert_eq!(res.rows.len(), 8);
        let best = res.best_for(0.0).unwrap();
        assert_eq!(best.report.f1, 1.0);
        assert_eq!(best.params, ParamSet::Dbstexc(ClusterParams::new(2.0, 1, 4).unwrap()));
    }

    #[test]
    fn empty_grid_is_an_error() {
        let ds = LabeledDataset::from_xy(&[[0.0, 0.0]], &[]).unwrap();
        let b = RangeQueryBackend::build(&ds, BackendKind::KdTree);
        let spec = SweepSpec::default();
        assert!(sweep(&ds, &b, &region(10.0), &spec, Algorithm::Dbscan).is_err());
    }

    #[test]
    fn report_csv_layout() {
        let row = SweepRow {
            params: ParamSet::Dbscan {
                epsilon: 100.0,
                n_min: 4,
            },
            report: EvalReport::new(Confusion { tp: 1, fp: 1, fn_: 0 }, 0.0, 1.0, 0.5),
        };
        let mut buf = Vec::new();
        write_report_csv([&row], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), REPORT_CSV_HEADER.join(","));
        assert_eq!(
            lines.next().unwrap(),
            "dbscan,100,4,,,,,,0.5,1,1,0,0.5,1,0.6666666666666666,0,0,0"
        );
    }
}
