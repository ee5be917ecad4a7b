//! GeoJSON, CSV and SVG renderings of clustering results.

use std::fmt::Write as _;
use std::io::Write;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::evaluation::cluster_members;
use crate::geo::{convex_hull_xy, Projection};
use crate::model::{ClusteringResult, Label, LabeledDataset, Relevance};

const PALETTE: [&str; 8] = [
    "#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}

/// Membership value per point: the fuzzy score when present, otherwise 1
/// for clustered points and 0 for noise.
pub fn member_scores(result: &ClusteringResult) -> Vec<f64> {
    match &result.fuzzy_scores {
        Some(mu) => mu.clone(),
        None => result
            .labels
            .iter()
            .map(|l| if l.is_noise() { 0.0 } else { 1.0 })
            .collect(),
    }
}

/// One feature per cluster: the hull of its members in `[lon, lat]`, a
/// point or a line when the hull is degenerate. Properties are the cluster
/// number, member counts and mean membership.
pub fn clusters_geojson(result: &ClusteringResult, dataset: &LabeledDataset, tau: f64) -> Result<Value> {
    let (lat0, lon0) = dataset.projection_origin;
    let proj = Projection::new(lat0, lon0)?;
    let mu = member_scores(result);
    let to_lonlat = |p: [f64; 2]| {
        let (lat, lon) = proj.unproject(p[0], p[1]);
        json!([lon, lat])
    };
    let mut features = Vec::new();
    for (c, pts) in cluster_members(result, dataset, tau) {
        let idx: Vec<usize> = result
            .members(c)
            .filter(|&i| result.fuzzy_scores.as_ref().is_none_or(|m| m[i] >= tau))
            .collect();
        let relevant = idx.iter().filter(|&&i| i < dataset.n()).count();
        let mean_mu = idx.iter().map(|&i| mu[i]).sum::<f64>() / idx.len() as f64;
        let hull = convex_hull_xy(pts);
        let v = &hull.vertices;
        let geometry = match v.len() {
            1 => json!({"type": "Point", "coordinates": to_lonlat(v[0])}),
            2 => json!({"type": "LineString", "coordinates": [to_lonlat(v[0]), to_lonlat(v[1])]}),
            _ => {
                let mut ring: Vec<Value> = v.iter().map(|&p| to_lonlat(p)).collect();
                ring.push(to_lonlat(v[0]));
                json!({"type": "Polygon", "coordinates": [ring]})
            }
        };
        features.push(json!({
            "type": "Feature",
            "geometry": geometry,
            "properties": {
                "cluster": c,
                "members": idx.len(),
                "relevant": relevant,
                "irrelevant": idx.len() - relevant,
                "mean_mu": mean_mu,
            },
        }));
    }
    Ok(json!({"type": "FeatureCollection", "features": features}))
}

/// `id,relevance,cluster,core,mu`, one row per point in source order.
///
/// `ids[source_index]` names each point; missing entries fall back to the
/// source index.
pub fn write_labels_csv(
    result: &ClusteringResult,
    dataset: &LabeledDataset,
    ids: &[String],
    writer: impl Write,
) -> Result<()> {
    let mu = member_scores(result);
    let n = dataset.n();
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    order.sort_by_key(|&i| dataset.point(i).source_index);
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["id", "relevance", "cluster", "core", "mu"])
        .map_err(csv_err)?;
    for i in order {
        let src = dataset.point(i).source_index;
        let id = ids.get(src).cloned().unwrap_or_else(|| src.to_string());
        let rel = if i < n {
            Relevance::Relevant
        } else {
            Relevance::Irrelevant
        };
        let core = i < n && result.core_flags[i];
        w.write_record([
            id,
            rel.to_string(),
            result.labels[i].to_string(),
            core.to_string(),
            mu[i].to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Scatter plot of the query region: irrelevant points grey, relevant
/// points colored by cluster (hollow when noise), hulls outlined.
pub fn map_svg(result: &ClusteringResult, dataset: &LabeledDataset, center: [f64; 2], radius: f64) -> String {
    const SIZE: f64 = 800.0;
    let s = SIZE / (2.0 * radius.max(f64::MIN_POSITIVE));
    let px = |p: [f64; 2]| ((p[0] - center[0] + radius) * s, (center[1] + radius - p[1]) * s);
    let color = |l: Label| match l {
        Label::Cluster(c) => PALETTE[(c as usize - 1) % PALETTE.len()],
        Label::Noise => "#555555",
    };

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(out, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##);
    let _ = writeln!(
        out,
        r##"<circle cx="{h}" cy="{h}" r="{h}" fill="none" stroke="#999999" stroke-dasharray="6 4"/>"##,
        h = SIZE / 2.0
    );
    for (c, pts) in cluster_members(result, dataset, 0.0) {
        let hull = convex_hull_xy(pts);
        if hull.vertices.len() < 2 {
            continue;
        }
        let points: Vec<String> = hull
            .vertices
            .iter()
            .map(|&p| {
                let (x, y) = px(p);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let col = color(Label::Cluster(c));
        let _ = writeln!(
            out,
            r#"<polygon points="{}" fill="{col}" fill-opacity="0.12" stroke="{col}" stroke-width="1.5"/>"#,
            points.join(" ")
        );
    }
    for (i, p) in dataset.irrelevant.iter().enumerate() {
        let (x, y) = px(p.xy());
        let l = result.labels[dataset.n() + i];
        let fill = if l.is_noise() { "#bbbbbb" } else { "#777777" };
        let _ = writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="1.5" fill="{fill}"/>"#);
    }
    for (i, p) in dataset.relevant.iter().enumerate() {
        let (x, y) = px(p.xy());
        let l = result.labels[i];
        if l.is_noise() {
            let _ = writeln!(
                out,
                r##"<circle cx="{x:.2}" cy="{y:.2}" r="2.5" fill="none" stroke="#1f3a93"/>"##
            );
        } else {
            let _ = writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="2.5" fill="{}"/>"#, color(l));
        }
    }
    out.push_str("</svg>\n");
    out
}

/// `rank,distance`, ranks starting at 1.
pub fn write_knn_csv(profile: &[f64], writer: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["rank", "distance"]).map_err(csv_err)?;
    for (i, d) in profile.iter().enumerate() {
        w.write_record([(i + 1).to_string(), d.to_string()])
            .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Line plot of a sorted k-NN distance profile.
pub fn knn_svg(profile: &[f64], k: usize) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const PAD: f64 = 48.0;
    let max = profile.iter().copied().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let span = (profile.len().max(2) - 1) as f64;
    let pts: Vec<String> = profile
        .iter()
        .enumerate()
        .map(|(i, &d)| {
            let x = PAD + i as f64 / span * (W - 2.0 * PAD);
            let y = H - PAD - d / max * (H - 2.0 * PAD);
            format!("{x:.2},{y:.2}")
        })
        .collect();
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(out, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##);
    let _ = writeln!(
        out,
        r##"<path d="M{PAD},{PAD} V{b} H{r}" fill="none" stroke="#333333"/>"##,
        b = H - PAD,
        r = W - PAD
    );
    let _ = writeln!(
        out,
        r##"<polyline points="{}" fill="none" stroke="#d62728" stroke-width="1.5"/>"##,
        pts.join(" ")
    );
    let _ = writeln!(
        out,
        r#"<text x="{PAD}" y="{t}" font-family="sans-serif" font-size="12">{k}-NN distance (max {max:.1} m)</text>"#,
        t = PAD - 12.0
    );
    let _ = writeln!(
        out,
        r#"<text x="{x}" y="{y}" font-family="sans-serif" font-size="12" text-anchor="end">rank (n = {n})</text>"#,
        x = W - PAD,
        y = H - PAD + 24.0,
        n = profile.len()
    );
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> (LabeledDataset, ClusteringResult) {
        let ds = LabeledDataset::from_xy(
            &[[0.0, 0.0], [100.0, 0.0], [0.0, 100.0], [900.0, 900.0]],
            &[[50.0, 50.0], [-700.0, 0.0]],
        )
        .unwrap();
        let r = ClusteringResult {
            labels: vec![
                Label::Cluster(1),
                Label::Cluster(1),
                Label::Cluster(1),
                Label::Noise,
                Label::Cluster(1),
                Label::Noise,
            ],
            core_flags: vec![true, true, false, false],
            fuzzy_scores: None,
            num_clusters: 1,
        };
        (ds, r)
    }

    #[test]
    fn geojson_has_one_closed_polygon() {
        let (ds, r) = sample();
        let g = clusters_geojson(&r, &ds, 0.0).unwrap();
        let f = &g["features"];
        assert_eq!(f.as_array().unwrap().len(), 1);
        assert_eq!(f[0]["geometry"]["type"], "Polygon");
        let ring = f[0]["geometry"]["coordinates"][0].as_array().unwrap();
        assert_eq!(ring.first(), ring.last());
        assert_eq!(f[0]["properties"]["members"], 4);
        assert_eq!(f[0]["properties"]["irrelevant"], 1);
        assert_eq!(f[0]["properties"]["mean_mu"], 1.0);
    }

    #[test]
    fn geojson_degenerate_clusters() {
        let ds = LabeledDataset::from_xy(&[[0.0, 0.0], [5.0, 0.0], [500.0, 0.0]], &[]).unwrap();
        let r = ClusteringResult {
            labels: vec![Label::Cluster(1), Label::Cluster(1), Label::Cluster(2)],
            core_flags: vec![true, true, true],
            fuzzy_scores: None,
            num_clusters: 2,
        };
        let g = clusters_geojson(&r, &ds, 0.0).unwrap();
        assert_eq!(g["features"][0]["geometry"]["type"], "LineString");
        assert_eq!(g["features"][1]["geometry"]["type"], "Point");
    }

    #[test]
    fn labels_csv_in_source_order() {
        let (ds, r) = sample();
        let ids: Vec<String> = ["a", "b", "c", "d", "e", "f"].map(String::from).to_vec();
        let mut buf = Vec::new();
        write_labels_csv(&r, &ds, &ids, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "id,relevance,cluster,core,mu");
        assert_eq!(lines[1], "a,relevant,1,true,1");
        assert_eq!(lines[4], "d,relevant,noise,false,0");
        assert_eq!(lines[5], "e,irrelevant,1,false,1");
        assert_eq!(lines.len(), 7);
    }

    #[test]
    fn svg_outputs_are_well_formed() {
        let (ds, r) = sample();
        let svg = map_svg(&r, &ds, [0.0, 0.0], 1500.0);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polygon").count(), 1);
        let knn = knn_svg(&[1.0, 2.0, 3.0], 4);
        assert!(knn.contains("<polyline"));
    }

    #[test]
    fn knn_csv_ranks() {
        let mut buf = Vec::new();
        write_knn_csv(&[0.5, 1.5], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "rank,distance\n1,0.5\n2,1.5\n");
    }
}
