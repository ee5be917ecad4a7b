use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use spatiotex::clustering::knn_distance_profile;
use spatiotex::evaluation::{
    region_center, score, sweep, write_report_csv, Algorithm, EvalOptions, ParamSet, SweepRow,
    SweepSpec,
};
use spatiotex::export::{clusters_geojson, knn_svg, map_svg, write_knn_csv, write_labels_csv};
use spatiotex::geo::Projection;
use spatiotex::index::RangeQueryBackend;
use spatiotex::ingest::{
    assemble_dataset, filter_consecutive_posts, parse_records, write_records_csv, PoiSpec, QueryRegion,
    RecordFormat, RegionConfig,
};
use spatiotex::model::{ClusterParams, ClusteringResult, FuzzyParams, LabeledDataset, TweetRecord};
use spatiotex::synth::{
    default_bench_sizes, generate, heterogeneity_spec, run_bench, to_records, BenchSize, GenSpec,
};
use spatiotex::Error;

use crate::args::{BenchArgs, ClusterArgs, EvalArgs, Format, GenArgs, InputArgs, KnnArgs, Preset, SweepArgs};

struct Loaded {
    records: Vec<TweetRecord>,
    dataset: LabeledDataset,
    region: QueryRegion,
}

fn load(input: &InputArgs) -> Result<Loaded> {
    let format = match input.format {
        Some(Format::Csv) => RecordFormat::Csv,
        Some(Format::Jsonl) => RecordFormat::Jsonl,
        None => RecordFormat::from_path(&input.input),
    };
    let mut records = parse_records(&input.input, format)
        .with_context(|| format!("reading {}", input.input.display()))?;
    if !input.keep_consecutive {
        if records.iter().any(|r| r.user_id.is_some() || r.created_at.is_some()) {
            records = filter_consecutive_posts(records, input.consecutive_limit);
        } else {
            log::info!("records carry no user/time fields; consecutive-post filter not applied");
        }
    }
    let poi = PoiSpec::new(
        input.poi_name.clone(),
        (input.poi_lat, input.poi_lon),
        input.queries.clone(),
    )?;
    let (olat, olon) = match (input.origin_lat, input.origin_lon) {
        (Some(a), Some(b)) => (a, b),
        _ => poi.center,
    };
    let proj = Projection::new(olat, olon)?;
    let config = RegionConfig {
        eta: input.eta,
        r0: input.r0,
        step: input.step,
        case_sensitive: !input.case_insensitive,
    };
    let (dataset, region) = assemble_dataset(&records, &poi, &config, &proj)?;
    if region.insufficient_precision {
        log::warn!(
            "precision {:.4} at the initial radius is below eta; using {} m",
            region.precision_at_radius,
            region.radius
        );
    }
    Ok(Loaded {
        records,
        dataset,
        region,
    })
}

fn eval_options(eval: &EvalArgs) -> Result<EvalOptions> {
    if !(eval.resolution > 0.0 && eval.resolution.is_finite()) {
        bail!(Error::InvalidParams(format!(
            "resolution must be positive, got {}",
            eval.resolution
        )));
    }
    if !(0.0..=1.0).contains(&eval.tau) {
        bail!(Error::InvalidParams(format!("tau must be in [0, 1], got {}", eval.tau)));
    }
    Ok(EvalOptions {
        tau: eval.tau,
        resolution: eval.resolution,
    })
}

fn out_dir(path: &Path) -> Result<&Path> {
    fs::create_dir_all(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(path)
}

fn write(dir: &Path, name: &str, bytes: impl AsRef<[u8]>) -> Result<()> {
    let p = dir.join(name);
    fs::write(&p, bytes).with_context(|| format!("writing {}", p.display()))
}

fn need<T>(v: Option<T>, flag: &str, algorithm: Algorithm) -> Result<T> {
    v.ok_or_else(|| Error::InvalidParams(format!("--{flag} is required for {algorithm}")).into())
}

fn params_for(a: &ClusterArgs, m: usize) -> Result<ParamSet> {
    let alg = a.algorithm;
    Ok(match alg {
        Algorithm::Dbscan => {
            let n_min = need(a.n_min, "n-min", alg)?;
            ClusterParams::new(a.epsilon, n_min, 0)?;
            ParamSet::Dbscan {
                epsilon: a.epsilon,
                n_min,
            }
        }
        Algorithm::Dbstexc => ParamSet::Dbstexc(ClusterParams::new(
            a.epsilon,
            need(a.n_min, "n-min", alg)?,
            need(a.n_max, "n-max", alg)?.resolve(m),
        )?),
        Algorithm::FDbstexc => ParamSet::Fuzzy(FuzzyParams::new(
            a.epsilon,
            need(a.n_min1, "n-min1", alg)?,
            need(a.n_min2, "n-min2", alg)?,
            need(a.n_max1, "n-max1", alg)?.resolve(m),
            need(a.n_max2, "n-max2", alg)?.resolve(m),
        )?),
    })
}

/// Runs one setting and checks the result's structure and the visit-once
/// query count.
fn run_checked(params: &ParamSet, dataset: &LabeledDataset, backend: &RangeQueryBackend<'_>) -> Result<ClusteringResult> {
    backend.reset_query_count();
    let result = params.run(dataset, backend);
    result.check_invariants(dataset)?;
    if params.algorithm() != Algorithm::Dbscan && backend.query_count() != dataset.n() {
        bail!(Error::Invariant(format!(
            "{} range queries for {} relevant points",
            backend.query_count(),
            dataset.n()
        )));
    }
    Ok(result)
}

pub fn cluster(a: ClusterArgs) -> Result<()> {
    let options = eval_options(&a.eval)?;
    let loaded = load(&a.input)?;
    let ds = &loaded.dataset;
    let params = params_for(&a, ds.m())?;
    let backend = RangeQueryBackend::build(ds, a.eval.backend);
    let result = run_checked(&params, ds, &backend)?;

    let mut rows = Vec::with_capacity(a.eval.alphas.len());
    for &alpha in &a.eval.alphas {
        let report = score(&result, ds, &loaded.region, params.epsilon(), alpha, &options)?;
        rows.push(SweepRow { params, report });
    }

    let ids: Vec<String> = loaded.records.iter().map(|r| r.id.clone()).collect();
    let mut labels = Vec::new();
    write_labels_csv(&result, ds, &ids, &mut labels)?;
    let geojson = clusters_geojson(&result, ds, options.tau)?;
    let mut report = Vec::new();
    write_report_csv(&rows, &mut report)?;
    let center = region_center(&loaded.region, ds)?;
    let svg = map_svg(&result, ds, center, loaded.region.radius);

    let dir = out_dir(&a.common.out)?;
    write(dir, "labels.csv", labels)?;
    write(dir, "clusters.geojson", serde_json::to_string_pretty(&geojson)? + "\n")?;
    write(dir, "report.csv", report)?;
    write(dir, "map.svg", svg)?;

    println!(
        "{}: n={} m={} region radius {} m, {} clusters",
        params.algorithm(),
        ds.n(),
        ds.m(),
        loaded.region.radius,
        result.num_clusters
    );
    for r in &rows {
        let r = &r.report;
        println!(
            "  alpha={:<5} P={:.4} R={:.4} F1={:.4} A={:.4} score={:.4}",
            r.alpha, r.precision, r.recall, r.f1, r.area_norm, r.score
        );
    }
    Ok(())
}

pub fn sweep_cmd(a: SweepArgs) -> Result<()> {
    let options = eval_options(&a.eval)?;
    let loaded = load(&a.input)?;
    let ds = &loaded.dataset;
    let spec = SweepSpec {
        epsilons: a.epsilons.clone(),
        n_mins: a.n_mins.clone(),
        n_maxs: a.n_maxs.clone(),
        n_min1s: a.n_min1s.clone(),
        n_min2s: a.n_min2s.clone(),
        n_max1s: a.n_max1s.clone(),
        n_max2s: a.n_max2s.clone(),
        alphas: a.eval.alphas.clone(),
        options,
    };
    let mut algorithms = a.algorithms.clone();
    algorithms.dedup();

    let mut rows: Vec<SweepRow> = Vec::new();
    let mut best: Vec<SweepRow> = Vec::new();
    for &alg in &algorithms {
        let backend = RangeQueryBackend::build(ds, a.eval.backend);
        let res = sweep(ds, &backend, &loaded.region, &spec, alg)?;
        if alg != Algorithm::Dbscan {
            let cells = res.rows.len() / spec.alphas.len();
            if backend.query_count() != cells * ds.n() {
                bail!(Error::Invariant(format!(
                    "{} range queries over {cells} runs of {} relevant points",
                    backend.query_count(),
                    ds.n()
                )));
            }
        }
        rows.extend(res.rows);
        best.extend(res.best);
    }

    let mut table = Vec::new();
    write_report_csv(&rows, &mut table)?;
    let mut best_table = Vec::new();
    write_report_csv(&best, &mut best_table)?;
    let dir = out_dir(&a.common.out)?;
    write(dir, "sweep.csv", table)?;
    write(dir, "best.csv", best_table)?;

    println!(
        "n={} m={} region radius {} m, {} rows",
        ds.n(),
        ds.m(),
        loaded.region.radius,
        rows.len()
    );
    for b in &best {
        let r = &b.report;
        println!(
            "  best {:<9} alpha={:<5} score={:.4} F1={:.4} A={:.4} eps={}",
            b.params.algorithm(),
            r.alpha,
            r.score,
            r.f1,
            r.area_norm,
            b.params.epsilon()
        );
    }
    Ok(())
}

pub fn gen(a: GenArgs) -> Result<()> {
    let mut spec: GenSpec = match a.preset {
        Preset::Heterogeneity => heterogeneity_spec(a.seed),
        Preset::Uniform => GenSpec::uniform(a.seed, a.n, a.m, 1000.0),
    };
    if let Some(r) = a.region_radius {
        spec.region_radius = r;
    }
    let ds = generate(&spec)?;
    let records = to_records(&ds, &a.poi_name)?;
    let mut csv = Vec::new();
    write_records_csv(&records, &mut csv)?;
    let poi_conf = format!(
        "# POI for the generated dataset\npoi_name = {name}\npoi_lat = {lat}\npoi_lon = {lon}\nquery = {name}\n",
        name = a.poi_name,
        lat = spec.origin.0,
        lon = spec.origin.1
    );
    let dir = out_dir(&a.common.out)?;
    write(dir, "dataset.csv", csv)?;
    write(dir, "poi.conf", poi_conf)?;
    write(dir, "gen.json", serde_json::to_string_pretty(&spec)? + "\n")?;
    println!(
        "wrote {} records ({} relevant, {} irrelevant) to {}",
        records.len(),
        ds.n(),
        ds.m(),
        dir.join("dataset.csv").display()
    );
    Ok(())
}

fn parse_sizes(text: &str) -> Result<Vec<BenchSize>> {
    let mut sizes = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || (i == 0 && line.starts_with("n,")) {
            continue;
        }
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        let bad = || Error::Parse {
            line: i + 1,
            message: "expected `n,m[,regime]`".into(),
        };
        if f.len() < 2 || f.len() > 3 {
            bail!(bad());
        }
        let n: usize = f[0].parse().map_err(|_| bad())?;
        let m: usize = f[1].parse().map_err(|_| bad())?;
        let regime = f.get(2).map_or_else(|| "all".to_string(), |s| s.to_string());
        sizes.push(BenchSize::new(n, m, regime));
    }
    if sizes.is_empty() {
        bail!(Error::InvalidParams("sizes file lists no sizes".into()));
    }
    Ok(sizes)
}

pub fn bench(a: BenchArgs) -> Result<()> {
    let sizes = match &a.sizes {
        Some(p) => parse_sizes(
            &fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
        )
        .with_context(|| format!("in {}", p.display()))?,
        None => default_bench_sizes(),
    };
    let report = run_bench(&sizes, a.trials, a.backend, a.seed)?;
    if !report.visit_once {
        bail!(Error::Invariant("a benchmark run issued more than n range queries".into()));
    }
    let mut csv = Vec::new();
    report.write_csv(&mut csv)?;
    let dir = out_dir(&a.common.out)?;
    write(dir, "bench.csv", csv)?;
    write(
        dir,
        "bench_summary.json",
        serde_json::to_string_pretty(&report.summary_json())? + "\n",
    )?;
    for r in &report.rows {
        println!("n={:<6} m={:<8} {:.6} s", r.n, r.m, r.median_seconds);
    }
    for (regime, s) in &report.slopes {
        println!("slope[{regime}] = {s:.3}");
    }
    Ok(())
}

pub fn knn(a: KnnArgs) -> Result<()> {
    let loaded = load(&a.input)?;
    let profile = knn_distance_profile(&loaded.dataset.relevant, a.k)?;
    let mut csv = Vec::new();
    write_knn_csv(&profile, &mut csv)?;
    let dir = out_dir(&a.common.out)?;
    write(dir, "knn.csv", csv)?;
    write(dir, "knn.svg", knn_svg(&profile, a.k))?;
    println!(
        "{}-NN profile over {} relevant points, max {:.2} m",
        a.k,
        profile.len(),
        profile.last().copied().unwrap_or(0.0)
    );
    Ok(())
}
