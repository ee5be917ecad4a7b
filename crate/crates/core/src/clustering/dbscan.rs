//! Classic DBSCAN over the relevant set, kept as the comparison baseline.

use crate::index::RangeQueryBackend;
use crate::model::{ClusteringResult, Label, LabeledDataset};

#[derive(Clone, Copy, PartialEq, Eq)]
enum State {
    Undefined,
    Noise,
    Cluster(u32),
}

/// DBSCAN on `X` alone, in the seed-set formulation: every point is queried
/// at most once, noise found earlier may be claimed as a border point, and
/// border points keep the first cluster that reaches them.
///
/// Irrelevant points take no part in clustering. Afterwards each one lying
/// within `epsilon` of a core point is counted as covered by the
/// lowest-numbered such cluster, so precision reflects the irrelevant
/// records that fall inside DBSCAN's clusters.
pub fn dbscan(
    dataset: &LabeledDataset,
    backend: &RangeQueryBackend<'_>,
    epsilon: f64,
    n_min: usize,
) -> ClusteringResult {
    let n = dataset.n();
    let mut state = vec![State::Undefined; n];
    let mut core_flags = vec![false; n];
    let mut cluster = 0u32;
    let mut seeds: Vec<usize> = Vec::new();
    let mut queued = vec![0u32; n];

    for p in 0..n {
        if state[p] != State::Undefined {
            continue;
        }
        let neighbors = backend.relevant_within(dataset.relevant[p].xy(), epsilon);
        if neighbors.len() < n_min {
            state[p] = State::Noise;
            continue;
        }
        cluster += 1;
        core_flags[p] = true;
        state[p] = State::Cluster(cluster);
        seeds.clear();
        queued[p] = cluster;
        for &q in &neighbors {
            if queued[q] != cluster {
                queued[q] = cluster;
                seeds.push(q);
            }
        }
        let mut k = 0;
        while k < seeds.len() {
            let q = seeds[k];
            k += 1;
            match state[q] {
                State::Noise => {
                    state[q] = State::Cluster(cluster);
                    continue;
                }
                State::Cluster(_) => continue,
                State::Undefined => {}
            }
            state[q] = State::Cluster(cluster);
            let reach = backend.relevant_within(dataset.relevant[q].xy(), epsilon);
            if reach.len() >= n_min {
                core_flags[q] = true;
                for &s in &reach {
                    if queued[s] != cluster {
                        queued[s] = cluster;
                        seeds.push(s);
                    }
                }
            }
        }
    }

    let mut labels: Vec<Label> = state
        .iter()
        .map(|s| match s {
            State::Cluster(c) => Label::Cluster(*c),
            _ => Label::Noise,
        })
        .collect();
    labels.resize(n + dataset.m(), Label::Noise);
    if dataset.m() > 0 {
        for p in (0..n).filter(|&p| core_flags[p]) {
            let Label::Cluster(c) = labels[p] else {
                unreachable!("core point without cluster")
            };
            for q in backend.irrelevant_within(dataset.relevant[p].xy(), epsilon) {
                let slot = &mut labels[n + q];
                match *slot {
                    Label::Cluster(prev) if prev <= c => {}
                    _ => *slot = Label::Cluster(c),
                }
            }
        }
    }

    ClusteringResult {
        labels,
        core_flags,
        fuzzy_scores: None,
        num_clusters: cluster as usize,
    }
}
