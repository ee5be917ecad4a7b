use spatiotex::evaluation::{score, sweep, Algorithm, EvalOptions};
use spatiotex::ingest::{assemble_dataset, read_records, write_records_csv, RecordFormat, RegionConfig};
use spatiotex::prelude::*;
use spatiotex::synth::{generate, heterogeneity_grid, heterogeneity_spec, poi_for, to_records};

#[test]
fn generated_records_survive_a_csv_round_trip() {
    let spec = heterogeneity_spec(4);
    let ds = generate(&spec).unwrap();
    let recs = to_records(&ds, "Hyde Park").unwrap();
    let mut buf = Vec::new();
    write_records_csv(&recs, &mut buf).unwrap();
    let back = read_records(buf.as_slice(), RecordFormat::Csv).unwrap();
    assert_eq!(back, recs);
}

#[test]
fn text_pipeline_recovers_the_generated_split() {
    let spec = heterogeneity_spec(9);
    let ds = generate(&spec).unwrap();
    let recs = to_records(&ds, "Hyde Park").unwrap();
    let poi = poi_for(&spec, "Hyde Park").unwrap();
    let proj = Projection::new(spec.origin.0, spec.origin.1).unwrap();
    let (assembled, region) = assemble_dataset(&recs, &poi, &RegionConfig::default(), &proj).unwrap();
    assert!(!region.insufficient_precision);
    assert!(region.precision_at_radius >= 0.07);
    assert!(assembled.n() <= ds.n() && assembled.m() <= ds.m());
    assert!(assembled.n() > 0);
}

#[test]
fn cluster_and_score_fixture() {
    let spec = heterogeneity_spec(1);
    let ds = generate(&spec).unwrap();
    let backend = RangeQueryBackend::build(&ds, BackendKind::KdTree);
    let params = ClusterParams::new(200.0, 3, 50).unwrap();
    let result = dbstexc(&ds, &backend, &params);
    result.check_invariants(&ds).unwrap();
    assert_eq!(backend.query_count(), ds.n());
    let rep = score(&result, &ds, &spec.region(), 200.0, 0.5, &EvalOptions::default()).unwrap();
    assert!(rep.precision > 0.5, "{rep:?}");
    assert!(rep.area_norm > 0.0 && rep.area_norm < 1.0);
    assert!((rep.score - rep.area_norm.sqrt() * rep.f1).abs() < 1e-12);
}

#[test]
fn dbstexc_beats_dbscan_on_heterogeneous_fixture() {
    let spec = heterogeneity_spec(1);
    let ds = generate(&spec).unwrap();
    let backend = RangeQueryBackend::build(&ds, BackendKind::KdTree);
    let grid = heterogeneity_grid();
    let base = sweep(&ds, &backend, &spec.region(), &grid, Algorithm::Dbscan).unwrap();
    let ours = sweep(&ds, &backend, &spec.region(), &grid, Algorithm::Dbstexc).unwrap();
    let b = base.best_for(0.5).unwrap().report.score;
    let o = ours.best_for(0.5).unwrap().report.score;
    assert!(o >= 1.1 * b, "dbstexc {o} vs dbscan {b}");
    for alpha in &grid.alphas {
        let b = base.best_for(*alpha).unwrap().report.score;
        let o = ours.best_for(*alpha).unwrap().report.score;
        assert!(o >= b);
    }
}

#[test]
fn degenerate_fuzzy_grid_matches_crisp_grid() {
    let spec = heterogeneity_spec(5);
    let ds = generate(&spec).unwrap();
    let backend = RangeQueryBackend::build(&ds, BackendKind::KdTree);
    let mut grid = heterogeneity_grid();
    grid.epsilons = vec![75.0, 150.0];
    grid.n_mins = vec![3, 8];
    grid.n_maxs.truncate(3);
    grid.n_min1s = grid.n_mins.clone();
    grid.n_min2s = grid.n_mins.clone();
    grid.n_max1s = grid.n_maxs.clone();
    grid.n_max2s = grid.n_maxs.clone();
    let crisp = sweep(&ds, &backend, &spec.region(), &grid, Algorithm::Dbstexc).unwrap();
    let fuzzy = sweep(&ds, &backend, &spec.region(), &grid, Algorithm::FDbstexc).unwrap();
    let diag: Vec<_> = fuzzy
        .rows
        .iter()
        .filter(|r| match r.params {
            spatiotex::evaluation::ParamSet::Fuzzy(p) => p.n_min1 == p.n_min2 && p.n_max1 == p.n_max2,
            _ => false,
        })
        .collect();
    assert_eq!(diag.len(), crisp.rows.len());
    for (f, c) in diag.iter().zip(&crisp.rows) {
        assert_eq!(f.report, c.report);
    }
}
