//! Range queries over the relevant and irrelevant point sets.
//!
//! Two backends answer the same question: a linear scan, and a pair of
//! static 2-d trees (one per point set) built by median splitting. Both use
//! the closed ball `dist(p, q) <= ε`, and return indices sorted ascending.

use std::collections::BinaryHeap;
use std::sync::atomic::{AtomicUsize, Ordering};

use ordered::OrdF64;
use serde::{Deserialize, Serialize};

use crate::geo::dist_xy;
use crate::model::{LabeledDataset, PlanarPoint};

/// Maximum number of points stored in a k-d tree leaf.
pub const LEAF_SIZE: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum BackendKind {
    LinearScan,
    #[default]
    KdTree,
}

impl std::str::FromStr for BackendKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "linear" | "linear-scan" | "linearscan" => Ok(Self::LinearScan),
            "kd" | "kdtree" | "kd-tree" => Ok(Self::KdTree),
            other => Err(format!("unknown backend `{other}` (expected linear or kd)")),
        }
    }
}

impl std::fmt::Display for BackendKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BackendKind::LinearScan => "linear",
            BackendKind::KdTree => "kd",
        })
    }
}

/// Result of one range query: indices into `X` and into `Y`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Neighborhood {
    pub relevant: Vec<usize>,
    pub irrelevant: Vec<usize>,
}

#[derive(Debug, Clone)]
enum Node {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        axis: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

/// Static 2-d tree over a point slice, storing indices into that slice.
#[derive(Debug, Clone)]
pub struct KdTree {
    nodes: Vec<Node>,
    order: Vec<usize>,
    coords: Vec<[f64; 2]>,
}

impl KdTree {
    pub fn build(points: &[PlanarPoint]) -> Self {
        let coords: Vec<[f64; 2]> = points.iter().map(PlanarPoint::xy).collect();
        let mut order: Vec<usize> = (0..coords.len()).collect();
        let mut nodes = Vec::with_capacity(2 * coords.len() / LEAF_SIZE + 1);
        if !coords.is_empty() {
            build_rec(&coords, &mut order, 0, &mut nodes);
        }
        Self {
            nodes,
            order,
            coords,
        }
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    /// Number of node levels on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        fn rec(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 1,
                Node::Split { left, right, .. } => 1 + rec(nodes, left).max(rec(nodes, right)),
            }
        }
        if self.nodes.is_empty() {
            0
        } else {
            rec(&self.nodes, 0)
        }
    }

    /// Indices of all points within `radius` of `center` (closed), unsorted.
    pub fn within(&self, center: [f64; 2], radius: f64, out: &mut Vec<usize>) {
        if self.nodes.is_empty() {
            return;
        }
        let mut stack = vec![0usize];
        while let Some(i) = stack.pop() {
            match self.nodes[i] {
                Node::Leaf { start, end } => {
                    out.extend(
                        self.order[start..end]
                            .iter()
                            .copied()
                            .filter(|&j| dist_xy(self.coords[j], center) <= radius),
                    );
                }
                Node::Split {
                    axis,
                    value,
                    left,
                    right,
                } => {
                    // left holds coordinates <= value, right holds >= value
                    if center[axis] - value <= radius {
                        stack.push(left);
                    }
                    if value - center[axis] <= radius {
                        stack.push(right);
                    }
                }
            }
        }
    }

    /// The `k` nearest points to `center` as `(distance, index)`, ascending,
    /// skipping index `exclude`.
    pub fn nearest(&self, center: [f64; 2], k: usize, exclude: Option<usize>) -> Vec<(f64, usize)> {
        let mut heap: BinaryHeap<(OrdF64, usize)> = BinaryHeap::with_capacity(k + 1);
        if self.nodes.is_empty() || k == 0 {
            return Vec::new();
        }
        self.nearest_rec(0, center, k, exclude, &mut heap);
        let mut out: Vec<(f64, usize)> = heap.into_iter().map(|(d, i)| (d.0, i)).collect();
        out.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        out
    }

    fn nearest_rec(
        &self,
        i: usize,
        center: [f64; 2],
        k: usize,
        exclude: Option<usize>,
        heap: &mut BinaryHeap<(OrdF64, usize)>,
    ) {
        match self.nodes[i] {
            Node::Leaf { start, end } => {
                for &j in &self.order[start..end] {
                    if Some(j) == exclude {
                        continue;
                    }
                    let d = OrdF64(dist_xy(self.coords[j], center));
                    if heap.len() < k {
                        heap.push((d, j));
                    } else if let Some(top) = heap.peek() {
                        if (d, j) < *top {
                            heap.pop();
                            heap.push((d, j));
                        }
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let delta = center[axis] - value;
                let (near, far) = if delta <= 0.0 {
                    (left, right)
                } else {
                    (right, left)
                };
                self.nearest_rec(near, center, k, exclude, heap);
                let worst = heap.peek().map(|t| t.0 .0);
                if heap.len() < k || worst.is_some_and(|w| delta.abs() <= w) {
                    self.nearest_rec(far, center, k, exclude, heap);
                }
            }
        }
    }
}

fn build_rec(coords: &[[f64; 2]], order: &mut [usize], offset: usize, nodes: &mut Vec<Node>) -> usize {
    let id = nodes.len();
    if order.len() <= LEAF_SIZE {
        nodes.push(Node::Leaf {
            start: offset,
            end: offset + order.len(),
        });
        return id;
    }
    let axis = widest_axis(coords, order);
    let mid = order.len() / 2;
    order.select_nth_unstable_by(mid, |&a, &b| coords[a][axis].total_cmp(&coords[b][axis]));
    let value = coords[order[mid]][axis];
    nodes.push(Node::Leaf { start: 0, end: 0 });
    let (lo, hi) = order.split_at_mut(mid);
    let left = build_rec(coords, lo, offset, nodes);
    let right = build_rec(coords, hi, offset + mid, nodes);
    nodes[id] = Node::Split {
        axis,
        value,
        left,
        right,
    };
    id
}

fn widest_axis(coords: &[[f64; 2]], order: &[usize]) -> usize {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for &i in order {
        for a in 0..2 {
            lo[a] = lo[a].min(coords[i][a]);
            hi[a] = hi[a].max(coords[i][a]);
        }
    }
    if hi[1] - lo[1] > hi[0] - lo[0] {
        1
    } else {
        0
    }
}

/// The range-query primitive over a [`LabeledDataset`].
///
/// A built backend is read-only; the query counter is atomic so the backend
/// can be shared across threads.
#[derive(Debug)]
pub struct RangeQueryBackend<'a> {
    kind: BackendKind,
    relevant: &'a [PlanarPoint],
    irrelevant: &'a [PlanarPoint],
    trees: Option<(KdTree, KdTree)>,
    queries: AtomicUsize,
}

impl<'a> RangeQueryBackend<'a> {
    pub fn build(dataset: &'a LabeledDataset, kind: BackendKind) -> Self {
        let trees = match kind {
            BackendKind::LinearScan => None,
            BackendKind::KdTree => Some((
                KdTree::build(&dataset.relevant),
                KdTree::build(&dataset.irrelevant),
            )),
        };
        Self {
            kind,
            relevant: &dataset.relevant,
            irrelevant: &dataset.irrelevant,
            trees,
            queries: AtomicUsize::new(0),
        }
    }

    pub fn kind(&self) -> BackendKind {
        self.kind
    }

    pub fn trees(&self) -> Option<(&KdTree, &KdTree)> {
        self.trees.as_ref().map(|(x, y)| (x, y))
    }

    /// Number of queries answered since build (or the last reset).
    pub fn query_count(&self) -> usize {
        self.queries.load(Ordering::Relaxed)
    }

    pub fn reset_query_count(&self) {
        self.queries.store(0, Ordering::Relaxed);
    }

    /// `(X_ε(p), Y_ε(p))` for an arbitrary location `p`.
    pub fn range_query(&self, p: [f64; 2], epsilon: f64) -> Neighborhood {
        self.queries.fetch_add(1, Ordering::Relaxed);
        Neighborhood {
            relevant: self.search(p, epsilon, true),
            irrelevant: self.search(p, epsilon, false),
        }
    }

    /// `X_ε(p)` only.
    pub fn relevant_within(&self, p: [f64; 2], epsilon: f64) -> Vec<usize> {
        self.queries.fetch_add(1, Ordering::Relaxed);
        self.search(p, epsilon, true)
    }

    /// `Y_ε(p)` only.
    pub fn irrelevant_within(&self, p: [f64; 2], epsilon: f64) -> Vec<usize> {
        self.queries.fetch_add(1, Ordering::Relaxed);
        self.search(p, epsilon, false)
    }

    fn search(&self, p: [f64; 2], epsilon: f64, relevant: bool) -> Vec<usize> {
        let mut out = Vec::new();
        match &self.trees {
            Some((x, y)) => {
                let tree = if relevant { x } else { y };
                tree.within(p, epsilon, &mut out);
                out.sort_unstable();
            }
            None => {
                let pts = if relevant {
                    self.relevant
                } else {
                    self.irrelevant
                };
                out.extend(
                    pts.iter()
                        .enumerate()
                        .filter(|(_, q)| dist_xy(q.xy(), p) <= epsilon)
                        .map(|(i, _)| i),
                );
            }
        }
        out
    }
}

mod ordered {
    /// Total-ordered `f64` for heaps.
    #[derive(Debug, Clone, Copy, PartialEq)]
    pub struct OrdF64(pub f64);

    impl Eq for OrdF64 {}

    impl PartialOrd for OrdF64 {
        fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
            Some(self.cmp(other))
        }
    }

    impl Ord for OrdF64 {
        fn cmp(&self, other: &Self) -> std::cmp::Ordering {
            self.0.total_cmp(&other.0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_dataset(rng: &mut ChaCha8Rng, n: usize, m: usize, extent: f64) -> LabeledDataset {
        let pt = |rng: &mut ChaCha8Rng| [rng.random_range(0.0..extent), rng.random_range(0.0..extent)];
        let x: Vec<[f64; 2]> = (0..n).map(|_| pt(rng)).collect();
        let y: Vec<[f64; 2]> = (0..m).map(|_| pt(rng)).collect();
        LabeledDataset::from_xy(&x, &y).unwrap()
    }

    fn brute(points: &[PlanarPoint], p: [f64; 2], eps: f64) -> Vec<usize> {
        (0..points.len())
            .filter(|&i| {
                let dx = points[i].x - p[0];
                let dy = points[i].y - p[1];
                (dx * dx + dy * dy).sqrt() <= eps
            })
            .collect()
    }

    #[test]
    fn empty_dataset_answers_empty() {
        let ds = LabeledDataset::from_xy(&[], &[]).unwrap();
        for kind in [BackendKind::LinearScan, BackendKind::KdTree] {
            let b = RangeQueryBackend::build(&ds, kind);
            assert_eq!(b.range_query([0.0, 0.0], 10.0), Neighborhood::default());
        }
    }

    #[test]
    fn single_point_found_at_itself() {
        let ds = LabeledDataset::from_xy(&[[3.0, -2.0]], &[]).unwrap();
        for kind in [BackendKind::LinearScan, BackendKind::KdTree] {
            let b = RangeQueryBackend::build(&ds, kind);
            for eps in [1e-9, 1.0, 1e6] {
                assert_eq!(b.range_query([3.0, -2.0], eps).relevant, vec![0]);
            }
        }
    }

    #[test]
    fn boundary_is_inclusive() {
        let ds = LabeledDataset::from_xy(&[[0.0, 0.0]], &[[3.0, 4.0]]).unwrap();
        for kind in [BackendKind::LinearScan, BackendKind::KdTree] {
            let b = RangeQueryBackend::build(&ds, kind);
            let nb = b.range_query([0.0, 0.0], 5.0);
            assert_eq!((nb.relevant, nb.irrelevant), (vec![0], vec![0]));
            assert!(b.range_query([0.0, 0.0], 4.999).irrelevant.is_empty());
        }
    }

    #[test]
    fn query_counter_counts_every_call() {
        let ds = LabeledDataset::from_xy(&[[0.0, 0.0]], &[]).unwrap();
        let b = RangeQueryBackend::build(&ds, BackendKind::KdTree);
        b.range_query([0.0, 0.0], 1.0);
        b.relevant_within([0.0, 0.0], 1.0);
        b.range_query([0.0, 0.0], 1.0);
        assert_eq!(b.query_count(), 3);
        b.reset_query_count();
        assert_eq!(b.query_count(), 0);
    }

    #[test]
    fn kd_tree_depth_is_logarithmic() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let ds = random_dataset(&mut rng, 10_000, 0, 1000.0);
        let tree = KdTree::build(&ds.relevant);
        let bound = (10_000f64).log2().ceil() as usize + 2;
        assert!(tree.depth() <= bound, "depth {} > {bound}", tree.depth());
        // leaves hold at most LEAF_SIZE points, so the depth is well below the bound
        assert!(tree.depth() >= 10);
    }

    #[test]
    fn kd_tree_handles_many_duplicates() {
        let pts = vec![[1.0, 1.0]; 100];
        let ds = LabeledDataset::from_xy(&pts, &[]).unwrap();
        let b = RangeQueryBackend::build(&ds, BackendKind::KdTree);
        assert_eq!(b.range_query([1.0, 1.0], 0.5).relevant.len(), 100);
        assert_eq!(b.range_query([1.0, 1.6], 0.5).relevant.len(), 0);
    }

    #[test]
    fn matches_exhaustive_filter() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let ds = random_dataset(&mut rng, 120, 80, 100.0);
        let kd = RangeQueryBackend::build(&ds, BackendKind::KdTree);
        for _ in 0..50 {
            let p = [rng.random_range(-10.0..110.0), rng.random_range(-10.0..110.0)];
            let eps = rng.random_range(0.1..40.0);
            let nb = kd.range_query(p, eps);
            assert_eq!(nb.relevant, brute(&ds.relevant, p, eps));
            assert_eq!(nb.irrelevant, brute(&ds.irrelevant, p, eps));
        }
    }

    #[test]
    fn nearest_matches_sorting() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ds = random_dataset(&mut rng, 300, 0, 50.0);
        let tree = KdTree::build(&ds.relevant);
        for q in 0..30 {
            let c = ds.relevant[q].xy();
            let mut all: Vec<(f64, usize)> = (0..300)
                .filter(|&j| j != q)
                .map(|j| (dist_xy(ds.relevant[j].xy(), c), j))
                .collect();
            all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let got = tree.nearest(c, 5, Some(q));
            assert_eq!(got, all[..5].to_vec());
        }
    }

    proptest! {
        #[test]
        fn backends_agree_and_are_monotone(seed in any::<u64>(), n in 0usize..60, m in 0usize..60, px in -5.0f64..55.0, py in -5.0f64..55.0, e1 in 0.01f64..30.0, e2 in 0.01f64..30.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let ds = random_dataset(&mut rng, n, m, 50.0);
            let lin = RangeQueryBackend::build(&ds, BackendKind::LinearScan);
            let kd = RangeQueryBackend::build(&ds, BackendKind::KdTree);
            let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
            let a = kd.range_query([px, py], lo);
            prop_assert_eq!(&a, &lin.range_query([px, py], lo));
            let b = kd.range_query([px, py], hi);
            prop_assert!(a.relevant.iter().all(|i| b.relevant.contains(i)));
            prop_assert!(a.irrelevant.iter().all(|i| b.irrelevant.contains(i)));
        }

        #[test]
        fn relevant_point_finds_itself(seed in any::<u64>(), n in 1usize..80, eps in 1e-6f64..10.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let ds = random_dataset(&mut rng, n, 10, 100.0);
            let kd = RangeQueryBackend::build(&ds, BackendKind::KdTree);
            for (i, p) in ds.relevant.iter().enumerate() {
                prop_assert!(kd.range_query(p.xy(), eps).relevant.contains(&i));
            }
        }
    }
}
