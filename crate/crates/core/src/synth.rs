//! Synthetic data, a brute-force clustering oracle and the worst-case
//! runtime benchmark.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::clustering::dbstexc;
use crate::error::{Error, Result};
use crate::evaluation::{NMax, SweepSpec};
use crate::geo::{dist_xy, Projection};
use crate::index::{BackendKind, RangeQueryBackend};
use crate::ingest::{PoiSpec, QueryRegion};
use crate::model::{ClusterParams, ClusteringResult, LabeledDataset, TweetRecord};

/// Largest `n + m` accepted by [`oracle_cluster`].
pub const ORACLE_LIMIT: usize = 10_000;

/// Isotropic Gaussian blob in planar meters around the region center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Blob {
    pub center: [f64; 2],
    pub stddev: f64,
    pub count: usize,
}

impl Blob {
    pub fn new(center: [f64; 2], stddev: f64, count: usize) -> Self {
        Self {
            center,
            stddev,
            count,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub seed: u64,
    pub relevant_blobs: Vec<Blob>,
    pub irrelevant_blobs: Vec<Blob>,
    /// Uniformly scattered `(relevant, irrelevant)` counts over the region.
    pub uniform_noise: (usize, usize),
    /// Meters; every generated point lies within this distance of the center.
    pub region_radius: f64,
    /// `(lat, lon)` of the region center.
    pub origin: (f64, f64),
}

impl GenSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.region_radius > 0.0 && self.region_radius.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "region radius must be positive, got {}",
                self.region_radius
            )));
        }
        for b in self.relevant_blobs.iter().chain(&self.irrelevant_blobs) {
            if !(b.stddev > 0.0 && b.stddev.is_finite()) {
                return Err(Error::InvalidParams(format!(
                    "blob stddev must be positive, got {}",
                    b.stddev
                )));
            }
            if !(b.center[0].is_finite() && b.center[1].is_finite()) {
                return Err(Error::InvalidParams("blob center must be finite".into()));
            }
        }
        crate::model::check_coordinate(self.origin.0, self.origin.1)?;
        Ok(())
    }

    /// The query region the generated data lives in.
    pub fn region(&self) -> QueryRegion {
        QueryRegion {
            center: self.origin,
            radius: self.region_radius,
            precision_at_radius: 1.0,
            insufficient_precision: false,
        }
    }

    /// Uniform data only: `n` relevant and `m` irrelevant points.
    pub fn uniform(seed: u64, n: usize, m: usize, region_radius: f64) -> Self {
        Self {
            seed,
            relevant_blobs: Vec::new(),
            irrelevant_blobs: Vec::new(),
            uniform_noise: (n, m),
            region_radius,
            origin: (51.5074, -0.1657),
        }
    }
}

fn sample_blob(rng: &mut ChaCha8Rng, blob: &Blob, radius: f64, out: &mut Vec<[f64; 2]>) -> Result<()> {
    let normal = Normal::new(0.0, blob.stddev)
        .map_err(|e| Error::InvalidParams(format!("blob stddev: {e}")))?;
    let budget = blob.count.saturating_mul(1000).max(1000);
    let mut tries = 0usize;
    let mut kept = 0;
    while kept < blob.count {
        tries += 1;
        if tries > budget {
            return Err(Error::InvalidParams(format!(
                "blob at ({}, {}) lies almost entirely outside the region",
                blob.center[0], blob.center[1]
            )));
        }
        let p = [
            blob.center[0] + normal.sample(rng),
            blob.center[1] + normal.sample(rng),
        ];
        if dist_xy(p, [0.0, 0.0]) <= radius {
            out.push(p);
            kept += 1;
        }
    }
    Ok(())
}

fn sample_disk(rng: &mut ChaCha8Rng, count: usize, radius: f64, out: &mut Vec<[f64; 2]>) {
    for _ in 0..count {
        let r = radius * rng.random::<f64>().sqrt();
        let t = rng.random::<f64>() * std::f64::consts::TAU;
        out.push([r * t.cos(), r * t.sin()]);
    }
}

/// Draws the dataset described by `spec`, deterministically in `spec.seed`.
///
/// Coordinates are planar meters around the region center, which is also
/// the dataset's projection origin. Relevant points come first: blobs in
/// order, then the uniform ones; irrelevant points follow the same order.
pub fn generate(spec: &GenSpec) -> Result<LabeledDataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut x = Vec::new();
    for b in &spec.relevant_blobs {
        sample_blob(&mut rng, b, spec.region_radius, &mut x)?;
    }
    sample_disk(&mut rng, spec.uniform_noise.0, spec.region_radius, &mut x);
    let mut y = Vec::new();
    for b in &spec.irrelevant_blobs {
        sample_blob(&mut rng, b, spec.region_radius, &mut y)?;
    }
    sample_disk(&mut rng, spec.uniform_noise.1, spec.region_radius, &mut y);
    let mut ds = LabeledDataset::from_xy(&x, &y)?;
    ds.projection_origin = spec.origin;
    Ok(ds)
}

/// Turns a generated dataset into text records for a POI named `poi_name`,
/// in source-index order. Relevant records mention the name, the others
/// do not.
pub fn to_records(dataset: &LabeledDataset, poi_name: &str) -> Result<Vec<TweetRecord>> {
    let (lat0, lon0) = dataset.projection_origin;
    let proj = Projection::new(lat0, lon0)?;
    const RELEVANT: [&str; 4] = [
        "Sunny afternoon at {}",
        "Walking through {} with friends",
        "{} is lovely today",
        "Picnic in {}",
    ];
    const OTHER: [&str; 4] = [
        "Coffee before work",
        "Stuck in traffic again",
        "Great lunch spot",
        "Heading home",
    ];
    let mut rows: Vec<(usize, TweetRecord)> = Vec::with_capacity(dataset.len());
    for (rel, p) in dataset.iter_all() {
        let (lat, lon) = proj.unproject(p.x, p.y);
        let k = p.source_index % 4;
        let text = match rel {
            crate::model::Relevance::Relevant => RELEVANT[k].replace("{}", poi_name),
            crate::model::Relevance::Irrelevant => OTHER[k].to_string(),
        };
        rows.push((p.source_index, TweetRecord::new(p.source_index.to_string(), text, lat, lon)));
    }
    rows.sort_by_key(|(i, _)| *i);
    Ok(rows.into_iter().map(|(_, r)| r).collect())
}

/// POI description matching [`to_records`] output.
pub fn poi_for(spec: &GenSpec, poi_name: &str) -> Result<PoiSpec> {
    PoiSpec::new(poi_name, spec.origin, vec![poi_name.to_string()])
}

/// A relevant blob drowned in a dense irrelevant crowd, a sparser relevant
/// blob away from it, and light uniform background noise.
///
/// Clustering the relevant set alone also sweeps up the crowd; bounding the
/// irrelevant count per neighborhood isolates the clean blob.
pub fn heterogeneity_spec(seed: u64) -> GenSpec {
    GenSpec {
        seed,
        relevant_blobs: vec![
            Blob::new([-500.0, 0.0], 120.0, 220),
            Blob::new([700.0, 350.0], 220.0, 160),
        ],
        irrelevant_blobs: vec![Blob::new([-500.0, 0.0], 160.0, 1400)],
        uniform_noise: (40, 300),
        region_radius: 2000.0,
        origin: (51.5074, -0.1657),
    }
}

/// Parameter grid used with [`heterogeneity_spec`].
pub fn heterogeneity_grid() -> SweepSpec {
    SweepSpec {
        epsilons: vec![50.0, 75.0, 100.0, 150.0, 200.0],
        n_mins: vec![3, 5, 8, 12, 20],
        n_maxs: vec![
            NMax::Count(0),
            NMax::Count(2),
            NMax::Count(5),
            NMax::Count(10),
            NMax::Count(20),
            NMax::Count(50),
            NMax::All,
        ],
        alphas: vec![0.0, 0.5, 1.0],
        ..SweepSpec::default()
    }
}

/// Core flags and the partition of core points into clusters, computed by
/// exhaustive pairwise distances.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorePartition {
    pub core_flags: Vec<bool>,
    /// Groups of relevant indices, each sorted, ordered by smallest member.
    pub components: Vec<Vec<usize>>,
}

/// Brute-force clustering: cores by direct counting, clusters as connected
/// components of the ε-graph restricted to cores.
pub fn oracle_cluster(dataset: &LabeledDataset, params: &ClusterParams) -> Result<CorePartition> {
    let size = dataset.len();
    if size > ORACLE_LIMIT {
        return Err(Error::InstanceTooLarge {
            size,
            limit: ORACLE_LIMIT,
        });
    }
    params.validate()?;
    let eps = params.epsilon;
    let x = &dataset.relevant;
    let core_flags: Vec<bool> = x
        .iter()
        .map(|p| {
            let xc = x.iter().filter(|q| dist_xy(p.xy(), q.xy()) <= eps).count();
            let yc = dataset
                .irrelevant
                .iter()
                .filter(|q| dist_xy(p.xy(), q.xy()) <= eps)
                .count();
            xc >= params.n_min && yc <= params.n_max
        })
        .collect();

    let mut parent: Vec<usize> = (0..x.len()).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..x.len() {
        if !core_flags[i] {
            continue;
        }
        for j in i + 1..x.len() {
            if core_flags[j] && dist_xy(x[i].xy(), x[j].xy()) <= eps {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in (0..x.len()).filter(|&i| core_flags[i]) {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(i);
    }
    Ok(CorePartition {
        core_flags,
        components: normalize(groups.into_values().collect()),
    })
}

/// The core-point partition induced by a clustering result.
pub fn core_partition(result: &ClusteringResult) -> CorePartition {
    let mut groups: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (i, &core) in result.core_flags.iter().enumerate() {
        if core {
            if let Some(c) = result.labels[i].cluster() {
                groups.entry(c).or_default().push(i);
            }
        }
    }
    CorePartition {
        core_flags: result.core_flags.clone(),
        components: normalize(groups.into_values().collect()),
    }
}

fn normalize(mut groups: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
    for g in &mut groups {
        g.sort_unstable();
    }
    groups.sort_by_key(|g| g[0]);
    groups
}

/// One benchmark size; `regime` names the sub-range its slope is fitted in.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchSize {
    pub n: usize,
    pub m: usize,
    pub regime: String,
}

impl BenchSize {
    pub fn new(n: usize, m: usize, regime: impl Into<String>) -> Self {
        Self {
            n,
            m,
            regime: regime.into(),
        }
    }
}

/// `m = n` over `n ∈ {1000, 2000, 4000, 8000}` and `m = n^1.5` over
/// `n ∈ {400, 800, 1600, 3200}`.
pub fn default_bench_sizes() -> Vec<BenchSize> {
    let mut sizes: Vec<BenchSize> = [1000, 2000, 4000, 8000]
        .into_iter()
        .map(|n| BenchSize::new(n, n, "m=n"))
        .collect();
    sizes.extend(
        [400usize, 800, 1600, 3200]
            .into_iter()
            .map(|n| BenchSize::new(n, (n as f64).powf(1.5).round() as usize, "m=n^1.5")),
    );
    sizes
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub n: usize,
    pub m: usize,
    pub regime: String,
    pub median_seconds: f64,
    pub backend: BackendKind,
    /// Range queries issued by the last run; equals `n` when each relevant
    /// point is visited once.
    pub queries: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    /// Least-squares slope of `ln(time)` against `ln(n)`, per regime.
    pub slopes: BTreeMap<String, f64>,
    /// First `n` of each regime after the first.
    pub regime_splits: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    /// Every run issued exactly `n` range queries.
    pub visit_once: bool,
}

const BENCH_REGION_RADIUS: f64 = 1000.0;

/// Times DBSTexC under worst-case parameters `(ε, N_min, N_max) =
/// (region radius, 1, m)` on uniform data, reporting the median over
/// `trials` runs after one discarded warm-up run.
///
/// Sizes must be strictly ascending in `n` within each regime. Data for a
/// size depends only on `seed`, `n` and `m`.
pub fn run_bench(sizes: &[BenchSize], trials: usize, backend: BackendKind, seed: u64) -> Result<BenchReport> {
    if trials == 0 {
        return Err(Error::InvalidParams("trials must be at least 1".into()));
    }
    let mut last_n: BTreeMap<&str, usize> = BTreeMap::new();
    let mut regime_splits = Vec::new();
    for s in sizes {
        if s.n == 0 {
            return Err(Error::InvalidParams("bench sizes need n >= 1".into()));
        }
        match last_n.get(s.regime.as_str()) {
            Some(&prev) if prev >= s.n => {
                return Err(Error::InvalidParams(format!(
                    "bench sizes of regime `{}` must be strictly ascending in n",
                    s.regime
                )))
            }
            None if !last_n.is_empty() => regime_splits.push(s.n),
            _ => {}
        }
        last_n.insert(&s.regime, s.n);
    }

    let mut rows = Vec::with_capacity(sizes.len());
    let mut visit_once = true;
    for s in sizes {
        let spec = GenSpec::uniform(seed ^ ((s.n as u64) << 32) ^ s.m as u64, s.n, s.m, BENCH_REGION_RADIUS);
        let dataset = generate(&spec)?;
        let params = ClusterParams::new(BENCH_REGION_RADIUS, 1, s.m)?;
        let b = RangeQueryBackend::build(&dataset, backend);
        let mut times = Vec::with_capacity(trials);
        for t in 0..=trials {
            b.reset_query_count();
            let start = Instant::now();
            let result = dbstexc(&dataset, &b, &params);
            let elapsed = start.elapsed().as_secs_f64();
            std::hint::black_box(&result);
            visit_once &= b.query_count() == s.n;
            if t > 0 {
                times.push(elapsed);
            }
        }
        times.sort_by(f64::total_cmp);
        let median = if times.len() % 2 == 1 {
            times[times.len() / 2]
        } else {
            0.5 * (times[times.len() / 2 - 1] + times[times.len() / 2])
        };
        log::info!("bench n={} m={} median={median:.6}s", s.n, s.m);
        rows.push(BenchRow {
            n: s.n,
            m: s.m,
            regime: s.regime.clone(),
            median_seconds: median,
            backend,
            queries: b.query_count(),
        });
    }

    let mut slopes = BTreeMap::new();
    for regime in last_n.keys() {
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r.regime == *regime)
            .map(|r| ((r.n as f64).ln(), r.median_seconds.max(1e-12).ln()))
            .collect();
        if let Some(s) = loglog_slope(&pts) {
            slopes.insert(regime.to_string(), s);
        }
    }
    Ok(BenchReport {
        rows,
        slopes,
        regime_splits,
        trials,
        seed,
        visit_once,
    })
}

/// Ordinary least-squares slope; `None` with fewer than two distinct abscissae.
pub fn loglog_slope(pts: &[(f64, f64)]) -> Option<f64> {
    let k = pts.len() as f64;
    if pts.len() < 2 {
        return None;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

impl BenchReport {
    /// `n,m,median_seconds,backend`
    pub fn write_csv(&self, writer: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let io = |e: csv::Error| Error::Io(std::io::Error::other(e.to_string()));
        w.write_record(["n", "m", "median_seconds", "backend"]).map_err(io)?;
        for r in &self.rows {
            w.write_record([
                r.n.to_string(),
                r.m.to_string(),
                r.median_seconds.to_string(),
                r.backend.to_string(),
            ])
            .map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "slopes": self.slopes,
            "regime_splits": self.regime_splits,
            "trials": self.trials,
            "seed": self.seed,
            "visit_once": self.visit_once,
            "sizes": self.rows.iter().map(|r| serde_json::json!({
                "n": r.n, "m": r.m, "regime": r.regime,
            })).collect::<Vec<_>>(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clustering::dbscan;

    #[test]
    fn generation_is_deterministic() {
        let spec = heterogeneity_spec(7);
        assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
        let other = heterogeneity_spec(8);
        assert_ne!(generate(&spec).unwrap(), generate(&other).unwrap());
    }

    #[test]
    fn single_relevant_blob() {
        let spec = GenSpec {
            seed: 1,
            relevant_blobs: vec![Blob::new([0.0, 0.0], 50.0, 100)],
            irrelevant_blobs: vec![],
            uniform_noise: (0, 0),
            region_radius: 1000.0,
            origin: (0.0, 0.0),
        };
        let ds = generate(&spec).unwrap();
        assert_eq!((ds.n(), ds.m()), (100, 0));
    }

    #[test]
    fn points_stay_in_region() {
        let spec = heterogeneity_spec(3);
        let ds = generate(&spec).unwrap();
        for (_, p) in ds.iter_all() {
            assert!(dist_xy(p.xy(), [0.0, 0.0]) <= spec.region_radius);
        }
    }

    #[test]
    fn blob_outside_region_is_rejected() {
        let spec = GenSpec {
            relevant_blobs: vec![Blob::new([1e6, 0.0], 1.0, 10)],
            ..GenSpec::uniform(0, 0, 0, 100.0)
        };
        assert!(matches!(generate(&spec), Err(Error::InvalidParams(_))));
        let spec = GenSpec {
            relevant_blobs: vec![Blob::new([0.0, 0.0], 0.0, 10)],
            ..GenSpec::uniform(0, 0, 0, 100.0)
        };
        assert!(generate(&spec).is_err());
    }

    #[test]
    fn oracle_clique_and_triads() {
        let five = [[0.0, 0.0], [0.5, 0.0], [0.0, 0.5], [0.5, 0.5], [0.25, 0.25]];
        let ds = LabeledDataset::from_xy(&five, &[]).unwrap();
        let part = oracle_cluster(&ds, &ClusterParams::new(1.0, 3, 0).unwrap()).unwrap();
        assert_eq!(part.components, vec![vec![0, 1, 2, 3, 4]]);

        let triads = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [10.0, 0.0], [11.0, 0.0], [10.0, 1.0]];
        let ds = LabeledDataset::from_xy(&triads, &[]).unwrap();
        let part = oracle_cluster(&ds, &ClusterParams::new(1.5, 3, 0).unwrap()).unwrap();
        assert_eq!(part.components, vec![vec![0, 1, 2], vec![3, 4, 5]]);
    }

    #[test]
    fn oracle_rejects_large_instances() {
        let ds = generate(&GenSpec::uniform(1, 6000, 4001, 100.0)).unwrap();
        assert!(matches!(
            oracle_cluster(&ds, &ClusterParams::new(1.0, 1, 0).unwrap()),
            Err(Error::InstanceTooLarge { size: 10_001, .. })
        ));
    }

    #[test]
    fn oracle_matches_dbstexc_on_fixture() {
        let ds = generate(&heterogeneity_spec(11)).unwrap();
        let b = RangeQueryBackend::build(&ds, BackendKind::KdTree);
        for (eps, n_min, n_max) in [(75.0, 5, 5), (150.0, 8, 40), (50.0, 3, 0)] {
            let p = ClusterParams::new(eps, n_min, n_max).unwrap();
            let r = dbstexc(&ds, &b, &p);
            assert_eq!(core_partition(&r), oracle_cluster(&ds, &p).unwrap());
        }
    }

    #[test]
    fn dbstexc_without_irrelevant_bound_equals_dbscan_on_fixture() {
        let ds = generate(&heterogeneity_spec(2)).unwrap();
        let b = RangeQueryBackend::build(&ds, BackendKind::KdTree);
        let p = ClusterParams::new(100.0, 8, ds.m()).unwrap();
        assert_eq!(dbstexc(&ds, &b, &p), dbscan(&ds, &b, 100.0, 8));
    }

    #[test]
    fn slope_of_exact_power_law() {
        let pts: Vec<(f64, f64)> = [1.0f64, 2.0, 4.0, 8.0]
            .iter()
            .map(|&n| (n.ln(), (3.0 * n.powf(2.5)).ln()))
            .collect();
        assert!((loglog_slope(&pts).unwrap() - 2.5).abs() < 1e-12);
        assert_eq!(loglog_slope(&pts[..1]), None);
    }

    #[test]
    fn small_bench_runs() {
        let sizes = vec![BenchSize::new(50, 50, "a"), BenchSize::new(100, 100, "a"), BenchSize::new(40, 250, "b"), BenchSize::new(80, 700, "b")];
        let rep = run_bench(&sizes, 3, BackendKind::LinearScan, 5).unwrap();
        assert!(rep.visit_once);
        assert_eq!(rep.rows.len(), 4);
        assert_eq!(rep.regime_splits, vec![40]);
        assert_eq!(rep.slopes.len(), 2);
        let mut buf = Vec::new();
        rep.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("n,m,median_seconds,backend\n50,50,"));
    }

    #[test]
    fn bench_rejects_unsorted_sizes() {
        let sizes = vec![BenchSize::new(100, 100, "a"), BenchSize::new(50, 50, "a")];
        assert!(run_bench(&sizes, 1, BackendKind::LinearScan, 0).is_err());
        assert!(run_bench(&[], 0, BackendKind::LinearScan, 0).is_err());
    }

    #[test]
    fn records_round_trip_relevance() {
        let spec = heterogeneity_spec(1);
        let ds = generate(&spec).unwrap();
        let recs = to_records(&ds, "Hyde Park").unwrap();
        let poi = poi_for(&spec, "Hyde Park").unwrap();
        let rel = recs
            .iter()
            .filter(|r| crate::ingest::classify(r, &poi, true) == crate::model::Relevance::Relevant)
            .count();
        assert_eq!(rel, ds.n());
        assert_eq!(recs[0].id, "0");
    }
}
