//! Local planar projection, distances, hulls and rasterized union areas.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{check_coordinate, PlanarPoint};

/// Meters per degree of latitude used by the equirectangular projection.
pub const METERS_PER_DEG_LAT: f64 = 111_320.0;

/// Default raster cell edge for area computations, meters.
pub const DEFAULT_AREA_RESOLUTION: f64 = 10.0;

/// Upper bound on raster cells; coarser cells are used beyond it.
const MAX_RASTER_CELLS: usize = 1 << 26;

/// Equirectangular projection centered on an origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    pub origin_lat: f64,
    pub origin_lon: f64,
    pub meters_per_deg_lat: f64,
    pub meters_per_deg_lon: f64,
}

impl Projection {
    pub fn new(origin_lat: f64, origin_lon: f64) -> Result<Self> {
        check_coordinate(origin_lat, origin_lon)?;
        Ok(Self {
            origin_lat,
            origin_lon,
            meters_per_deg_lat: METERS_PER_DEG_LAT,
            meters_per_deg_lon: METERS_PER_DEG_LAT * origin_lat.to_radians().cos(),
        })
    }

    pub fn project(&self, lat: f64, lon: f64, source_index: usize) -> Result<PlanarPoint> {
        check_coordinate(lat, lon)?;
        Ok(PlanarPoint::new(
            (lon - self.origin_lon) * self.meters_per_deg_lon,
            (lat - self.origin_lat) * self.meters_per_deg_lat,
            source_index,
        ))
    }

    /// Inverse of [`Projection::project`], returning `(lat, lon)`.
    pub fn unproject(&self, x: f64, y: f64) -> (f64, f64) {
        (
            self.origin_lat + y / self.meters_per_deg_lat,
            self.origin_lon + x / self.meters_per_deg_lon,
        )
    }
}

/// Euclidean distance in the planar frame.
#[inline]
pub fn dist(p: &PlanarPoint, q: &PlanarPoint) -> f64 {
    dist_xy(p.xy(), q.xy())
}

#[inline]
pub fn dist_xy(p: [f64; 2], q: [f64; 2]) -> f64 {
    let dx = p[0] - q[0];
    let dy = p[1] - q[1];
    (dx * dx + dy * dy).sqrt()
}

#[inline]
fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// A polygon given by its vertices in counter-clockwise order.
///
/// Fewer than three vertices is a degenerate polygon (point or segment).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polygon {
    pub vertices: Vec<[f64; 2]>,
}

impl Polygon {
    pub fn new(vertices: Vec<[f64; 2]>) -> Self {
        Self { vertices }
    }

    pub fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Self::new(vec![[x0, y0], [x1, y0], [x1, y1], [x0, y1]])
    }

    pub fn is_degenerate(&self) -> bool {
        self.vertices.len() < 3
    }

    /// Shoelace area; positive for counter-clockwise vertices.
    pub fn signed_area(&self) -> f64 {
        let v = &self.vertices;
        if v.len() < 3 {
            return 0.0;
        }
        let mut acc = 0.0;
        for i in 0..v.len() {
            let a = v[i];
            let b = v[(i + 1) % v.len()];
            acc += a[0] * b[1] - b[0] * a[1];
        }
        acc / 2.0
    }

    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    /// Closed containment test for a convex counter-clockwise polygon.
    pub fn contains(&self, p: [f64; 2]) -> bool {
        let v = &self.vertices;
        if v.len() < 3 {
            return false;
        }
        (0..v.len()).all(|i| cross(v[i], v[(i + 1) % v.len()], p) >= 0.0)
    }

    pub fn centroid_of_vertices(&self) -> [f64; 2] {
        let n = self.vertices.len().max(1) as f64;
        let (sx, sy) = self
            .vertices
            .iter()
            .fold((0.0, 0.0), |(sx, sy), v| (sx + v[0], sy + v[1]));
        [sx / n, sy / n]
    }

    fn bbox(&self) -> Option<[f64; 4]> {
        bbox_of(self.vertices.iter().copied())
    }
}

fn bbox_of(points: impl Iterator<Item = [f64; 2]>) -> Option<[f64; 4]> {
    points.fold(None, |acc, p| {
        Some(match acc {
            None => [p[0], p[1], p[0], p[1]],
            Some([x0, y0, x1, y1]) => [x0.min(p[0]), y0.min(p[1]), x1.max(p[0]), y1.max(p[1])],
        })
    })
}

/// Counter-clockwise convex hull (Andrew's monotone chain).
///
/// Collinear boundary points and duplicates are dropped. One distinct input
/// point yields a one-vertex polygon, collinear input a two-vertex segment.
pub fn convex_hull(points: &[PlanarPoint]) -> Polygon {
    convex_hull_xy(points.iter().map(|p| p.xy()).collect())
}

pub fn convex_hull_xy(mut pts: Vec<[f64; 2]>) -> Polygon {
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return Polygon::new(pts);
    }

    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(pts.len() + 1);
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len
            && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0
        {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    Polygon::new(hull)
}

/// A region contributing to a union-area computation.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Polygon(Polygon),
    Disk { center: [f64; 2], radius: f64 },
}

impl Shape {
    fn contains(&self, p: [f64; 2]) -> bool {
        match self {
            Shape::Polygon(poly) => poly.contains(p),
            Shape::Disk { center, radius } => dist_xy(*center, p) <= *radius,
        }
    }

    fn bbox(&self) -> Option<[f64; 4]> {
        match self {
            Shape::Polygon(poly) if poly.is_degenerate() => None,
            Shape::Polygon(poly) => poly.bbox(),
            Shape::Disk { center, radius } => Some([
                center[0] - radius,
                center[1] - radius,
                center[0] + radius,
                center[1] + radius,
            ]),
        }
    }
}

/// Area of the union of convex polygons, by rasterization at `resolution`.
pub fn polygon_union_area(polygons: &[Polygon], resolution: f64) -> f64 {
    let shapes: Vec<Shape> = polygons.iter().cloned().map(Shape::Polygon).collect();
    union_area(&shapes, None, resolution)
}

/// Rasterized area of the union of `shapes`, optionally intersected with a
/// clipping disk `(center, radius)`.
///
/// Cells of edge `resolution` are laid out from the lower-left corner of the
/// union's bounding box; a cell counts when its center is covered.
pub fn union_area(shapes: &[Shape], clip: Option<([f64; 2], f64)>, resolution: f64) -> f64 {
    assert!(resolution > 0.0, "raster resolution must be positive");
    let Some(mut bb) = bbox_of(
        shapes
            .iter()
            .filter_map(Shape::bbox)
            .flat_map(|b| [[b[0], b[1]], [b[2], b[3]]]),
    ) else {
        return 0.0;
    };
    if let Some((c, r)) = clip {
        bb = [
            bb[0].max(c[0] - r),
            bb[1].max(c[1] - r),
            bb[2].min(c[0] + r),
            bb[3].min(c[1] + r),
        ];
        if bb[0] > bb[2] || bb[1] > bb[3] {
            return 0.0;
        }
    }

    let mut res = resolution;
    let (nx, ny) = loop {
        let nx = (((bb[2] - bb[0]) / res).ceil() as usize).max(1);
        let ny = (((bb[3] - bb[1]) / res).ceil() as usize).max(1);
        if nx.saturating_mul(ny) <= MAX_RASTER_CELLS {
            break (nx, ny);
        }
        res *= 2.0;
    };
    if res != resolution {
        log::warn!("raster coarsened from {resolution} m to {res} m cells");
    }

    let mut covered = vec![false; nx * ny];
    let cell_center = |ix: usize, iy: usize| {
        [
            bb[0] + (ix as f64 + 0.5) * res,
            bb[1] + (iy as f64 + 0.5) * res,
        ]
    };
    let to_cell = |v: f64, lo: f64, n: usize| -> usize {
        (((v - lo) / res).floor().max(0.0) as usize).min(n - 1)
    };
    for shape in shapes {
        let Some(sb) = shape.bbox() else { continue };
        if sb[2] < bb[0] || sb[0] > bb[2] || sb[3] < bb[1] || sb[1] > bb[3] {
            continue;
        }
        let (x0, x1) = (to_cell(sb[0], bb[0], nx), to_cell(sb[2], bb[0], nx));
        let (y0, y1) = (to_cell(sb[1], bb[1], ny), to_cell(sb[3], bb[1], ny));
        for iy in y0..=y1 {
            let row = iy * nx;
            for ix in x0..=x1 {
                if !covered[row + ix] && shape.contains(cell_center(ix, iy)) {
                    covered[row + ix] = true;
                }
            }
        }
    }

    let count = (0..ny)
        .flat_map(|iy| (0..nx).map(move |ix| (ix, iy)))
        .filter(|&(ix, iy)| covered[iy * nx + ix])
        .filter(|&(ix, iy)| match clip {
            Some((c, r)) => dist_xy(c, cell_center(ix, iy)) <= r,
            None => true,
        })
        .count();
    count as f64 * res * res
}
