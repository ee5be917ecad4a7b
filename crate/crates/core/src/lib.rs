//! Density-based spatio-textual clustering.
//!
//! Geo-tagged records are split into a *relevant* set (the text mentions a
//! point of interest) and an *irrelevant* set. DBSTexC grows clusters only
//! from relevant points whose ε-neighborhood holds at least `n_min` relevant
//! and at most `n_max` irrelevant records; F-DBSTexC relaxes both bounds into
//! fuzzy membership ramps. Classic DBSCAN over the relevant set is kept as a
//! baseline, and [`evaluation`] scores all three with the `Ā^α·F1` metric.
//!
//! Typical flow:
//!
//! ```
//! use spatiotex::prelude::*;
//!
//! let relevant = vec![
//!     PlanarPoint::new(0.0, 0.0, 0),
//!     PlanarPoint::new(1.0, 0.0, 1),
//!     PlanarPoint::new(0.0, 1.0, 2),
//! ];
//! let dataset = LabeledDataset::new(relevant, vec![], (0.0, 0.0)).unwrap();
//! let backend = RangeQueryBackend::build(&dataset, BackendKind::KdTree);
//! let params = ClusterParams::new(1.5, 3, 0).unwrap();
//! let result = dbstexc(&dataset, &backend, &params);
//! assert_eq!(result.num_clusters, 1);
//! ```

pub mod clustering;
pub mod error;
pub mod evaluation;
pub mod export;
pub mod geo;
pub mod index;
pub mod ingest;
pub mod model;
pub mod synth;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::clustering::{
        dbscan, dbstexc, f_dbstexc, fuzzy_score, is_core, j_irre, j_re, knn_distance_profile,
    };
    pub use crate::error::{Error, Result};
    pub use crate::evaluation::{
        confusion, score, sweep, Algorithm, EvalOptions, EvalReport, NMax, SweepSpec,
    };
    pub use crate::geo::{convex_hull, dist, polygon_union_area, Polygon, Projection};
    pub use crate::index::{BackendKind, Neighborhood, RangeQueryBackend};
    pub use crate::ingest::{PoiSpec, QueryRegion};
    pub use crate::model::{
        ClusterParams, ClusteringResult, FuzzyParams, Label, LabeledDataset, PlanarPoint,
        Relevance, TweetRecord,
    };
}
