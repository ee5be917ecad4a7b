//! DBSCAN, DBSTexC and F-DBSTexC.

mod dbscan;
mod expand;
mod membership;

pub use dbscan::dbscan;
pub use membership::{fuzzy_score, j_irre, j_re, FuzzyScore, MembershipFunctions};

use crate::error::{Error, Result};
use crate::index::{KdTree, RangeQueryBackend};
use crate::model::{ClusterParams, ClusteringResult, FuzzyParams, LabeledDataset, PlanarPoint};

/// Whether relevant point `p` satisfies `|X_ε(p)| >= N_min` and
/// `|Y_ε(p)| <= N_max`. The neighborhood includes `p` itself.
pub fn is_core(
    p: usize,
    dataset: &LabeledDataset,
    backend: &RangeQueryBackend<'_>,
    params: &ClusterParams,
) -> bool {
    let nb = backend.range_query(dataset.relevant[p].xy(), params.epsilon);
    nb.relevant.len() >= params.n_min && nb.irrelevant.len() <= params.n_max
}

/// DBSTexC: density clustering of the relevant set that refuses to grow
/// through neighborhoods crowded with irrelevant records.
///
/// Each relevant point is range-queried exactly once. Irrelevant points
/// never seed or extend a cluster; they join the first cluster whose core
/// neighborhoods cover them.
pub fn dbstexc(
    dataset: &LabeledDataset,
    backend: &RangeQueryBackend<'_>,
    params: &ClusterParams,
) -> ClusteringResult {
    expand::run(dataset, backend, params)
}

/// F-DBSTexC: DBSTexC with the relaxed core test `|X_ε| >= N_min1` and
/// `|Y_ε| <= N_max2`, recording a fuzzy score for every member.
///
/// Core points carry their own score; border and irrelevant members carry
/// the score of the core point whose neighborhood pulled them in. Noise
/// scores are 0.
pub fn f_dbstexc(
    dataset: &LabeledDataset,
    backend: &RangeQueryBackend<'_>,
    params: &FuzzyParams,
) -> ClusteringResult {
    expand::run(dataset, backend, params)
}

/// Distance from every point to its `k`-th nearest other point, ascending.
pub fn knn_distance_profile(points: &[PlanarPoint], k: usize) -> Result<Vec<f64>> {
    if k == 0 {
        return Err(Error::InvalidParams("k must be at least 1".into()));
    }
    if k >= points.len() {
        return Err(Error::KTooLarge {
            k,
            len: points.len(),
        });
    }
    let tree = KdTree::build(points);
    let mut out: Vec<f64> = points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            tree.nearest(p.xy(), k, Some(i))
                .last()
                .map(|&(d, _)| d)
                .expect("k < len guarantees k neighbors")
        })
        .collect();
    out.sort_by(f64::total_cmp);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::BackendKind;
    use crate::model::Label;

    fn ds(x: &[[f64; 2]], y: &[[f64; 2]]) -> LabeledDataset {
        LabeledDataset::from_xy(x, y).unwrap()
    }

    fn cp(eps: f64, n_min: usize, n_max: usize) -> ClusterParams {
        ClusterParams::new(eps, n_min, n_max).unwrap()
    }

    const FIVE: [[f64; 2]; 5] = [[0.0, 0.0], [0.5, 0.0], [0.0, 0.5], [0.5, 0.5], [0.25, 0.25]];

    #[test]
    fn core_point_examples() {
        let data = ds(&FIVE, &[]);
        let b = RangeQueryBackend::build(&data, BackendKind::KdTree);
        assert!(is_core(0, &data, &b, &cp(1.0, 3, 0)));
        let with_y = ds(&FIVE, &[[0.1, 0.1]]);
        let b = RangeQueryBackend::build(&with_y, BackendKind::KdTree);
        assert!(!is_core(0, &with_y, &b, &cp(1.0, 3, 0)));
        let lonely = ds(&[[9.0, 9.0]], &[]);
        let b = RangeQueryBackend::build(&lonely, BackendKind::KdTree);
        assert!(is_core(0, &lonely, &b, &cp(1.0, 1, 0)));
    }

    #[test]
    fn clique_is_one_cluster() {
        let data = ds(&FIVE, &[]);
        let b = RangeQueryBackend::build(&data, BackendKind::KdTree);
        let r = dbstexc(&data, &b, &cp(1.0, 3, 0));
        assert_eq!(r.num_clusters, 1);
        assert!(r.labels.iter().all(|l| *l == Label::Cluster(1)));
    }

    #[test]
    fn separated_triads() {
        let data = ds(
            &[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [10.0, 0.0], [11.0, 0.0], [10.0, 1.0]],
            &[],
        );
        let b = RangeQueryBackend::build(&data, BackendKind::LinearScan);
        let r = dbstexc(&data, &b, &cp(1.5, 3, 0));
        assert_eq!(r.num_clusters, 2);
        assert_eq!(r.labels[..3], [Label::Cluster(1); 3]);
        assert_eq!(r.labels[3..], [Label::Cluster(2); 3]);
    }

    #[test]
    fn irrelevant_crowd_blocks_expansion() {
        // a chain of relevant points; the middle one sits in an irrelevant crowd
        let x = [[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [3.0, 0.0], [4.0, 0.0]];
        let y = [[2.0, 0.2], [2.0, -0.2], [2.1, 0.0]];
        let data = ds(&x, &y);
        let b = RangeQueryBackend::build(&data, BackendKind::KdTree);
        let r = dbstexc(&data, &b, &cp(1.0, 2, 2));
        // point 2 has 3 irrelevant neighbors so it is a border point of cluster 1
        assert_eq!(r.core_flags, [true, true, false, true, true]);
        assert_eq!(r.num_clusters, 2);
        assert_eq!(
            r.relevant_labels(),
            [Label::Cluster(1), Label::Cluster(1), Label::Cluster(1), Label::Cluster(2), Label::Cluster(2)]
        );
        // only (2.1, 0) lies within ε of a core point (point 3)
        assert_eq!(
            r.irrelevant_labels(),
            [Label::Noise, Label::Noise, Label::Cluster(2)]
        );
    }

    #[test]
    fn dbscan_blob_and_outlier() {
        let mut x: Vec<[f64; 2]> = FIVE.to_vec();
        x.push([50.0, 50.0]);
        let data = ds(&x, &[]);
        let b = RangeQueryBackend::build(&data, BackendKind::KdTree);
        let r = dbscan(&data, &b, 1.0, 3);
        assert_eq!(r.num_clusters, 1);
        assert!(r.labels[..5].iter().all(|l| *l == Label::Cluster(1)));
        assert_eq!(r.labels[5], Label::Noise);
    }

    #[test]
    fn dbscan_attaches_covered_irrelevant_points() {
        let data = ds(&FIVE, &[[0.3, 0.3], [20.0, 20.0]]);
        let b = RangeQueryBackend::build(&data, BackendKind::KdTree);
        let r = dbscan(&data, &b, 1.0, 3);
        assert_eq!(r.irrelevant_labels(), [Label::Cluster(1), Label::Noise]);
    }

    #[test]
    fn dbstexc_visits_each_relevant_point_once() {
        let x: Vec<[f64; 2]> = (0..40).map(|i| [(i % 7) as f64, (i / 7) as f64]).collect();
        let y: Vec<[f64; 2]> = (0..15).map(|i| [i as f64 * 0.4, 2.5]).collect();
        let data = ds(&x, &y);
        let b = RangeQueryBackend::build(&data, BackendKind::KdTree);
        let r = dbstexc(&data, &b, &cp(1.1, 3, 1));
        assert_eq!(b.query_count(), 40);
        r.check_invariants(&data).unwrap();
    }

    #[test]
    fn fuzzy_scores_between_ramps() {
        // 5 relevant points within reach of each other; N_min1 = 3, N_min2 = 7
        let data = ds(&FIVE, &[]);
        let b = RangeQueryBackend::build(&data, BackendKind::KdTree);
        let fp = FuzzyParams::new(1.0, 3, 7, 0, 0).unwrap();
        let r = f_dbstexc(&data, &b, &fp);
        assert_eq!(r.num_clusters, 1);
        let mu = r.fuzzy_scores.as_ref().unwrap();
        // J_Re = (5 - 3) / 4, J_Irre = 1
        for &v in mu {
            assert!((v - 0.75).abs() < 1e-12, "{v}");
        }
    }

    #[test]
    fn fuzzy_tight_irrelevant_bound() {
        let data = ds(&FIVE, &[[0.25, 0.3]]);
        let b = RangeQueryBackend::build(&data, BackendKind::KdTree);
        let fp = FuzzyParams::new(1.0, 1, 2, 0, 0).unwrap();
        let r = f_dbstexc(&data, &b, &fp);
        assert_eq!(r.num_clusters, 0);
        assert!(r.core_flags.iter().all(|c| !c));
    }

    #[test]
    fn knn_examples() {
        let pts: Vec<PlanarPoint> = (0..3).map(|i| PlanarPoint::new(i as f64, 0.0, i)).collect();
        assert_eq!(knn_distance_profile(&pts, 1).unwrap(), vec![1.0, 1.0, 1.0]);
        assert_eq!(knn_distance_profile(&pts, 2).unwrap(), vec![1.0, 2.0, 2.0]);
        assert!(matches!(
            knn_distance_profile(&pts, 3),
            Err(Error::KTooLarge { k: 3, len: 3 })
        ));
    }

    #[test]
    fn knn_grid_profile() {
        // 10 x 10 unit grid, k = 4: interior points have four neighbors at 1,
        // edge points reach the 4th at √2 and corners at 2
        let pts: Vec<PlanarPoint> = (0..100)
            .map(|i| PlanarPoint::new((i % 10) as f64, (i / 10) as f64, i))
            .collect();
        let prof = knn_distance_profile(&pts, 4).unwrap();
        let ones = prof.iter().filter(|&&d| d == 1.0).count();
        let diag = prof.iter().filter(|&&d| d == 2f64.sqrt()).count();
        let twos = prof.iter().filter(|&&d| d == 2.0).count();
        assert_eq!((ones, diag, twos), (64, 32, 4));
        assert!(prof.windows(2).all(|w| w[0] <= w[1]));
    }
}
