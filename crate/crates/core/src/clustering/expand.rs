//! Seed-and-expand engine shared by DBSTexC and F-DBSTexC.

use crate::index::RangeQueryBackend;
use crate::model::{ClusterParams, ClusteringResult, FuzzyParams, Label, LabeledDataset};

use super::membership::fuzzy_score;

/// Core-point test plus the score recorded for cores.
pub(crate) trait CoreRule {
    fn epsilon(&self) -> f64;
    fn is_core(&self, x_count: usize, y_count: usize) -> bool;
    /// `None` for crisp rules.
    fn score(&self, x_count: usize, y_count: usize) -> Option<f64>;
    fn is_fuzzy(&self) -> bool;
}

impl CoreRule for ClusterParams {
    fn epsilon(&self) -> f64 {
        self.epsilon
    }

    fn is_core(&self, x_count: usize, y_count: usize) -> bool {
        x_count >= self.n_min && y_count <= self.n_max
    }

    fn score(&self, _: usize, _: usize) -> Option<f64> {
        None
    }

    fn is_fuzzy(&self) -> bool {
        false
    }
}

impl CoreRule for FuzzyParams {
    fn epsilon(&self) -> f64 {
        self.epsilon
    }

    fn is_core(&self, x_count: usize, y_count: usize) -> bool {
        x_count >= self.n_min1 && y_count <= self.n_max2
    }

    fn score(&self, x_count: usize, y_count: usize) -> Option<f64> {
        Some(fuzzy_score(x_count, y_count, self).value())
    }

    fn is_fuzzy(&self) -> bool {
        true
    }
}

/// Runs the clustering loop.
///
/// `X` is scanned in index order. An unvisited core point opens a new
/// cluster whose relevant frontier is processed FIFO: each unvisited entry
/// is queried once, and a core entry merges its `X_ε`/`Y_ε` into the
/// cluster's sets. Unlabeled frontier entries take the current label. Once
/// the frontier is exhausted, unlabeled points of the accumulated `Y_ε`
/// join the cluster. Non-core members inherit the score of the core whose
/// neighborhood brought them in.
pub(crate) fn run<R: CoreRule>(
    dataset: &LabeledDataset,
    backend: &RangeQueryBackend<'_>,
    rule: &R,
) -> ClusteringResult {
    let (n, m) = (dataset.n(), dataset.m());
    let eps = rule.epsilon();

    let mut visited_x = vec![false; n];
    let mut visited_y = vec![false; m];
    let mut labels = vec![Label::Noise; n + m];
    let mut core_flags = vec![false; n];
    let mut scores = rule.is_fuzzy().then(|| vec![0.0; n + m]);

    // frontier membership, stamped with the cluster that added the point
    let mut in_x = vec![0u32; n];
    let mut in_y = vec![0u32; m];
    let mut frontier: Vec<(usize, f64)> = Vec::new();
    let mut y_set: Vec<(usize, f64)> = Vec::new();
    let mut cluster = 0u32;

    for seed in 0..n {
        if visited_x[seed] {
            continue;
        }
        visited_x[seed] = true;
        let nb = backend.range_query(dataset.relevant[seed].xy(), eps);
        let (xc, yc) = (nb.relevant.len(), nb.irrelevant.len());
        if !rule.is_core(xc, yc) {
            continue;
        }

        cluster += 1;
        let seed_score = rule.score(xc, yc).unwrap_or(1.0);
        core_flags[seed] = true;
        labels[seed] = Label::Cluster(cluster);
        if let Some(s) = scores.as_mut() {
            s[seed] = seed_score;
        }

        frontier.clear();
        y_set.clear();
        merge(&mut frontier, &mut in_x, &nb.relevant, cluster, seed_score);
        merge(&mut y_set, &mut in_y, &nb.irrelevant, cluster, seed_score);

        let mut k = 0;
        while k < frontier.len() {
            let (j, source_score) = frontier[k];
            k += 1;
            if !visited_x[j] {
                visited_x[j] = true;
                let nb = backend.range_query(dataset.relevant[j].xy(), eps);
                let (xc, yc) = (nb.relevant.len(), nb.irrelevant.len());
                if rule.is_core(xc, yc) {
                    let own = rule.score(xc, yc).unwrap_or(1.0);
                    core_flags[j] = true;
                    merge(&mut frontier, &mut in_x, &nb.relevant, cluster, own);
                    merge(&mut y_set, &mut in_y, &nb.irrelevant, cluster, own);
                    // an unvisited point carries no label yet
                    labels[j] = Label::Cluster(cluster);
                    if let Some(s) = scores.as_mut() {
                        s[j] = own;
                    }
                }
            }
            if labels[j].is_noise() {
                labels[j] = Label::Cluster(cluster);
                if let Some(s) = scores.as_mut() {
                    s[j] = source_score;
                }
            }
        }

        for &(q, source_score) in &y_set {
            if !visited_y[q] {
                visited_y[q] = true;
                if labels[n + q].is_noise() {
                    labels[n + q] = Label::Cluster(cluster);
                    if let Some(s) = scores.as_mut() {
                        s[n + q] = source_score;
                    }
                }
            }
        }
    }

    ClusteringResult {
        labels,
        core_flags,
        fuzzy_scores: scores,
        num_clusters: cluster as usize,
    }
}

fn merge(set: &mut Vec<(usize, f64)>, stamp: &mut [u32], items: &[usize], cluster: u32, score: f64) {
    for &i in items {
        if stamp[i] != cluster {
            stamp[i] = cluster;
            set.push((i, score));
        }
    }
}
