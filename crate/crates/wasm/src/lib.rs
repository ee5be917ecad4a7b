//! Browser bindings: generate a synthetic POI scene, cluster it with any of
//! the three algorithms, and inspect the k-NN distance profile.
//!
//! Every method returns a JSON string so the page needs no generated
//! TypeScript types.

use serde_json::{json, Value};
use spatiotex::clustering::knn_distance_profile;
use spatiotex::evaluation::{cluster_members, score, Algorithm, EvalOptions, ParamSet};
use spatiotex::geo::convex_hull_xy;
use spatiotex::index::{BackendKind, RangeQueryBackend};
use spatiotex::model::{ClusterParams, FuzzyParams, LabeledDataset};
use spatiotex::synth::{generate, heterogeneity_spec, GenSpec};
use wasm_bindgen::prelude::*;

/// Cell size used for areas in the demo; coarser than the CLI default so
/// that slider drags stay interactive.
const DEMO_RESOLUTION: f64 = 20.0;

pub struct Scene {
    spec: GenSpec,
    dataset: LabeledDataset,
}

impl Scene {
    /// The heterogeneity preset with the irrelevant crowd scaled by `crowd`.
    pub fn new(seed: u32, crowd: f64) -> Result<Self, String> {
        if !(crowd >= 0.0 && crowd.is_finite()) {
            return Err(format!("crowd factor must be >= 0, got {crowd}"));
        }
        let mut spec = heterogeneity_spec(seed as u64);
        for b in &mut spec.irrelevant_blobs {
            b.count = (b.count as f64 * crowd).round() as usize;
        }
        let dataset = generate(&spec).map_err(|e| e.to_string())?;
        Ok(Self { spec, dataset })
    }

    pub fn points(&self) -> Value {
        let xy = |pts: &[spatiotex::model::PlanarPoint]| -> Vec<[f64; 2]> { pts.iter().map(|p| p.xy()).collect() };
        json!({
            "radius": self.spec.region_radius,
            "relevant": xy(&self.dataset.relevant),
            "irrelevant": xy(&self.dataset.irrelevant),
        })
    }

    /// Crisp algorithms read `n_min1` as `N_min` and `n_max1` as `N_max`.
    #[allow(clippy::too_many_arguments)]
    pub fn cluster(
        &self,
        algorithm: &str,
        epsilon: f64,
        n_min1: usize,
        n_min2: usize,
        n_max1: usize,
        n_max2: usize,
        alpha: f64,
    ) -> Result<Value, String> {
        let alg: Algorithm = algorithm.parse()?;
        let params = match alg {
            Algorithm::Dbscan => {
                ClusterParams::new(epsilon, n_min1, 0).map_err(|e| e.to_string())?;
                ParamSet::Dbscan {
                    epsilon,
                    n_min: n_min1,
                }
            }
            Algorithm::Dbstexc => {
                ParamSet::Dbstexc(ClusterParams::new(epsilon, n_min1, n_max1).map_err(|e| e.to_string())?)
            }
            Algorithm::FDbstexc => ParamSet::Fuzzy(
                FuzzyParams::new(epsilon, n_min1, n_min2, n_max1, n_max2).map_err(|e| e.to_string())?,
            ),
        };
        let backend = RangeQueryBackend::build(&self.dataset, BackendKind::KdTree);
        let result = params.run(&self.dataset, &backend);
        let options = EvalOptions {
            tau: 0.0,
            resolution: DEMO_RESOLUTION,
        };
        let report = score(&result, &self.dataset, &self.spec.region(), epsilon, alpha, &options)
            .map_err(|e| e.to_string())?;
        let hulls: Vec<Vec<[f64; 2]>> = cluster_members(&result, &self.dataset, 0.0)
            .into_values()
            .map(|pts| convex_hull_xy(pts).vertices)
            .collect();
        let labels: Vec<u32> = result.labels.iter().map(|l| l.cluster().unwrap_or(0)).collect();
        Ok(json!({
            "labels": labels,
            "mu": result.fuzzy_scores,
            "hulls": hulls,
            "clusters": result.num_clusters,
            "queries": backend.query_count(),
            "report": report,
        }))
    }

    pub fn knn(&self, k: usize) -> Result<Value, String> {
        let profile = knn_distance_profile(&self.dataset.relevant, k).map_err(|e| e.to_string())?;
        Ok(json!({ "k": k, "distances": profile }))
    }
}

/// Handle held by the page.
#[wasm_bindgen]
pub struct Demo {
    scene: Scene,
}

#[wasm_bindgen]
impl Demo {
    #[wasm_bindgen(constructor)]
    pub fn new(seed: u32, crowd: f64) -> Result<Demo, JsError> {
        Ok(Demo {
            scene: Scene::new(seed, crowd).map_err(|e| JsError::new(&e))?,
        })
    }

    pub fn points(&self) -> String {
        self.scene.points().to_string()
    }

    #[allow(clippy::too_many_arguments)]
    pub fn cluster(
        &self,
        algorithm: &str,
        epsilon: f64,
        n_min1: usize,
        n_min2: usize,
        n_max1: usize,
        n_max2: usize,
        alpha: f64,
    ) -> Result<String, JsError> {
        self.scene
            .cluster(algorithm, epsilon, n_min1, n_min2, n_max1, n_max2, alpha)
            .map(|v| v.to_string())
            .map_err(|e| JsError::new(&e))
    }

    pub fn knn(&self, k: usize) -> Result<String, JsError> {
        self.scene
            .knn(k)
            .map(|v| v.to_string())
            .map_err(|e| JsError::new(&e))
    }
}
