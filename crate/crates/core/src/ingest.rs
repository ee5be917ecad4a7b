//! Record I/O, preprocessing, POI relevance and query-region construction.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::{dist_xy, Projection};
use crate::model::{validate_record, LabeledDataset, PlanarPoint, Relevance, TweetRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RecordFormat {
    Csv,
    Jsonl,
}

impl RecordFormat {
    /// Guesses the format from a file extension, defaulting to CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("jsonl") || e.eq_ignore_ascii_case("ndjson") => {
                Self::Jsonl
            }
            _ => Self::Csv,
        }
    }
}

impl std::str::FromStr for RecordFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "jsonl" | "ndjson" => Ok(Self::Jsonl),
            other => Err(format!("unknown record format `{other}`")),
        }
    }
}

/// A point of interest and the search strings that mark a record relevant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoiSpec {
    pub name: String,
    /// `(lat, lon)`, degrees.
    pub center: (f64, f64),
    pub queries: Vec<String>,
}

impl PoiSpec {
    pub fn new(name: impl Into<String>, center: (f64, f64), queries: Vec<String>) -> Result<Self> {
        if queries.is_empty() || queries.iter().any(String::is_empty) {
            return Err(Error::InvalidParams(
                "a POI needs at least one non-empty query".into(),
            ));
        }
        crate::model::check_coordinate(center.0, center.1)?;
        Ok(Self {
            name: name.into(),
            center,
            queries,
        })
    }
}

/// Circle around the POI center inside which records are clustered.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QueryRegion {
    /// `(lat, lon)`, degrees.
    pub center: (f64, f64),
    /// Meters.
    pub radius: f64,
    pub precision_at_radius: f64,
    /// Set when even the initial radius falls below the precision threshold.
    pub insufficient_precision: bool,
}

impl QueryRegion {
    pub fn area(&self) -> f64 {
        std::f64::consts::PI * self.radius * self.radius
    }
}

/// Settings for query-region growth and matching.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionConfig {
    /// Precision threshold `η`.
    pub eta: f64,
    /// Initial radius, meters.
    pub r0: f64,
    /// Additive radius step, meters.
    pub step: f64,
    pub case_sensitive: bool,
}

impl Default for RegionConfig {
    fn default() -> Self {
        Self {
            eta: 0.07,
            r0: 500.0,
            step: 100.0,
            case_sensitive: true,
        }
    }
}

pub fn parse_records(path: impl AsRef<Path>, format: RecordFormat) -> Result<Vec<TweetRecord>> {
    let file = File::open(path.as_ref())?;
    read_records(BufReader::new(file), format)
}

pub fn read_records(reader: impl Read, format: RecordFormat) -> Result<Vec<TweetRecord>> {
    let records = match format {
        RecordFormat::Csv => read_csv(reader)?,
        RecordFormat::Jsonl => read_jsonl(BufReader::new(reader))?,
    };
    let mut ids = HashSet::with_capacity(records.len());
    for (rec, line) in &records {
        if !ids.insert(rec.id.as_str()) {
            return Err(Error::Parse {
                line: *line,
                message: format!("duplicate id `{}`", rec.id),
            });
        }
    }
    Ok(records.into_iter().map(|(r, _)| r).collect())
}

fn parse_field<T: std::str::FromStr>(raw: &str, name: &str, line: usize) -> Result<T> {
    raw.trim().parse().map_err(|_| Error::Parse {
        line,
        message: format!("cannot parse {name} from `{raw}`"),
    })
}

fn parse_timestamp(raw: &str, line: usize) -> Result<DateTime<Utc>> {
    DateTime::parse_from_rfc3339(raw.trim())
        .map(|t| t.with_timezone(&Utc))
        .map_err(|e| Error::Parse {
            line,
            message: format!("bad created_at `{raw}`: {e}"),
        })
}

fn non_empty(s: &str) -> Option<&str> {
    (!s.is_empty()).then_some(s)
}

fn read_csv(reader: impl Read) -> Result<Vec<(TweetRecord, usize)>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr
        .byte_headers()
        .map_err(|e| csv_error(e, 1))?
        .iter()
        .map(|h| String::from_utf8_lossy(h).trim().to_string())
        .collect::<Vec<_>>();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let (Some(c_id), Some(c_text), Some(c_lat), Some(c_lon)) =
        (col("id"), col("text"), col("lat"), col("lon"))
    else {
        return Err(Error::Parse {
            line: 1,
            message: format!("header must contain id,text,lat,lon; got {}", headers.join(",")),
        });
    };
    let (c_user, c_time) = (col("user_id"), col("created_at"));

    let mut out = Vec::new();
    let mut row = csv::ByteRecord::new();
    loop {
        let line_hint = rdr.position().line() as usize;
        match rdr.read_byte_record(&mut row) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) => return Err(csv_error(e, line_hint)),
        }
        let line = row.position().map_or(line_hint, |p| p.line() as usize);
        let field = |c: usize| -> Result<String> {
            let bytes = row.get(c).ok_or_else(|| Error::Parse {
                line,
                message: format!("missing column {}", c + 1),
            })?;
            crate::model::validate_text_bytes(bytes).map_err(|e| e.at_line(line))
        };
        let opt_field = |c: Option<usize>| -> Result<Option<String>> {
            match c.and_then(|c| row.get(c)) {
                None => Ok(None),
                Some(b) => Ok(non_empty(
                    &crate::model::validate_text_bytes(b).map_err(|e| e.at_line(line))?,
                )
                .map(str::to_string)),
            }
        };
        let created_at = match opt_field(c_time)? {
            Some(t) => Some(parse_timestamp(&t, line)?),
            None => None,
        };
        let record = TweetRecord {
            id: field(c_id)?,
            text: field(c_text)?,
            lat: parse_field(&field(c_lat)?, "lat", line)?,
            lon: parse_field(&field(c_lon)?, "lon", line)?,
            user_id: opt_field(c_user)?,
            created_at,
        };
        out.push((validate_record(record).map_err(|e| e.at_line(line))?, line));
    }
    Ok(out)
}

fn csv_error(e: csv::Error, line: usize) -> Error {
    let line = e.position().map_or(line, |p| p.line() as usize);
    match e.kind() {
        csv::ErrorKind::Utf8 { .. } => Error::MalformedText { line: Some(line) },
        csv::ErrorKind::Io(_) => match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            _ => unreachable!(),
        },
        _ => Error::Parse {
            line,
            message: e.to_string(),
        },
    }
}

#[derive(Deserialize)]
struct JsonRecord {
    id: serde_json::Value,
    #[serde(default)]
    text: String,
    lat: f64,
    lon: f64,
    #[serde(default)]
    user_id: Option<serde_json::Value>,
    #[serde(default)]
    created_at: Option<String>,
}

fn json_scalar_to_string(v: serde_json::Value) -> Option<String> {
    match v {
        serde_json::Value::Null => None,
        serde_json::Value::String(s) => Some(s),
        other => Some(other.to_string()),
    }
}

fn read_jsonl(reader: impl BufRead) -> Result<Vec<(TweetRecord, usize)>> {
    let mut out = Vec::new();
    for (i, chunk) in reader.split(b'\n').enumerate() {
        let line = i + 1;
        let bytes = chunk?;
        let text = crate::model::validate_text_bytes(&bytes).map_err(|e| e.at_line(line))?;
        if text.trim().is_empty() {
            continue;
        }
        let raw: JsonRecord = serde_json::from_str(&text).map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        let created_at = match raw.created_at.as_deref().and_then(non_empty) {
            Some(t) => Some(parse_timestamp(t, line)?),
            None => None,
        };
        let id = json_scalar_to_string(raw.id).ok_or_else(|| Error::Parse {
            line,
            message: "null id".into(),
        })?;
        let record = TweetRecord {
            id,
            text: raw.text,
            lat: raw.lat,
            lon: raw.lon,
            user_id: raw.user_id.and_then(json_scalar_to_string),
            created_at,
        };
        out.push((validate_record(record).map_err(|e| e.at_line(line))?, line));
    }
    Ok(out)
}

fn format_timestamp(t: &DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::AutoSi, true)
}

/// Writes records as CSV. The optional columns appear only if some record
/// carries a user id or timestamp.
pub fn write_records_csv(records: &[TweetRecord], writer: impl Write) -> Result<()> {
    let extended = records
        .iter()
        .any(|r| r.user_id.is_some() || r.created_at.is_some());
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["id", "text", "lat", "lon"];
    if extended {
        header.extend(["user_id", "created_at"]);
    }
    w.write_record(&header).map_err(csv_write_error)?;
    for r in records {
        let mut row = vec![r.id.clone(), r.text.clone(), r.lat.to_string(), r.lon.to_string()];
        if extended {
            row.push(r.user_id.clone().unwrap_or_default());
            row.push(r.created_at.as_ref().map(format_timestamp).unwrap_or_default());
        }
        w.write_record(&row).map_err(csv_write_error)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_write_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Io(std::io::Error::other(format!("{other:?}"))),
    }
}

pub fn write_records_jsonl(records: &[TweetRecord], mut writer: impl Write) -> Result<()> {
    for r in records {
        let mut obj = serde_json::json!({
            "id": r.id,
            "text": r.text,
            "lat": r.lat,
            "lon": r.lon,
        });
        if let Some(u) = &r.user_id {
            obj["user_id"] = u.clone().into();
        }
        if let Some(t) = &r.created_at {
            obj["created_at"] = format_timestamp(t).into();
        }
        writeln!(writer, "{obj}")?;
    }
    Ok(())
}

/// Drops every run of more than `limit` consecutive posts by one user at the
/// exact same coordinates. Runs are taken in `created_at` order per user.
///
/// If any record lacks a user id or timestamp the input is returned as is.
pub fn filter_consecutive_posts(records: Vec<TweetRecord>, limit: usize) -> Vec<TweetRecord> {
    if records
        .iter()
        .any(|r| r.user_id.is_none() || r.created_at.is_none())
    {
        log::warn!("records without user_id/created_at; consecutive-post filter skipped");
        return records;
    }

    let mut by_user: HashMap<&str, Vec<usize>> = HashMap::new();
    for (i, r) in records.iter().enumerate() {
        by_user.entry(r.user_id.as_deref().unwrap()).or_default().push(i);
    }
    let mut drop = vec![false; records.len()];
    for posts in by_user.values_mut() {
        posts.sort_by_key(|&i| (records[i].created_at, i));
        let same_spot = |a: usize, b: usize| {
            records[a].lat == records[b].lat && records[a].lon == records[b].lon
        };
        let mut start = 0;
        while start < posts.len() {
            let mut end = start + 1;
            while end < posts.len() && same_spot(posts[start], posts[end]) {
                end += 1;
            }
            if end - start > limit {
                for &i in &posts[start..end] {
                    drop[i] = true;
                }
            }
            start = end;
        }
    }
    records
        .into_iter()
        .zip(drop)
        .filter_map(|(r, d)| (!d).then_some(r))
        .collect()
}

/// Relevant iff any query is a substring of the text.
pub fn classify(record: &TweetRecord, poi: &PoiSpec, case_sensitive: bool) -> Relevance {
    classify_text(&record.text, &poi.queries, case_sensitive)
}

pub fn classify_text(text: &str, queries: &[String], case_sensitive: bool) -> Relevance {
    let hit = if case_sensitive {
        queries.iter().any(|q| text.contains(q.as_str()))
    } else {
        let lower = text.to_lowercase();
        queries
            .iter()
            .any(|q| lower.contains(q.to_lowercase().as_str()))
    };
    if hit {
        Relevance::Relevant
    } else {
        Relevance::Irrelevant
    }
}

/// Grows a disk around `center` in additive steps and keeps the last radius
/// whose precision (relevant / all records inside) is at least `eta`.
///
/// The radius never exceeds the distance to the farthest record, unless that
/// distance is below `r0`. An empty disk counts as precision 1.
pub fn build_query_region(
    records: &[(PlanarPoint, Relevance)],
    center: (f64, f64),
    proj: &Projection,
    eta: f64,
    r0: f64,
    step: f64,
) -> Result<QueryRegion> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::InvalidParams(format!("eta must be in (0, 1], got {eta}")));
    }
    if !(r0 > 0.0 && step > 0.0 && r0.is_finite() && step.is_finite()) {
        return Err(Error::InvalidParams("r0 and step must be positive".into()));
    }
    if !records.iter().any(|(_, r)| *r == Relevance::Relevant) {
        return Err(Error::EmptyRelevantSet);
    }
    let c = proj.project(center.0, center.1, usize::MAX)?.xy();
    let mut by_dist: Vec<(f64, bool)> = records
        .iter()
        .map(|(p, r)| (dist_xy(p.xy(), c), *r == Relevance::Relevant))
        .collect();
    by_dist.sort_by(|a, b| a.0.total_cmp(&b.0));
    let cap = by_dist.last().map_or(0.0, |d| d.0).max(r0);

    let mut inside = 0usize;
    let mut relevant = 0usize;
    let mut precision_at = |r: f64| {
        while inside < by_dist.len() && by_dist[inside].0 <= r {
            relevant += by_dist[inside].1 as usize;
            inside += 1;
        }
        if inside == 0 {
            1.0
        } else {
            relevant as f64 / inside as f64
        }
    };

    let region = |radius: f64, precision: f64, insufficient: bool| QueryRegion {
        center,
        radius,
        precision_at_radius: precision,
        insufficient_precision: insufficient,
    };

    let first = precision_at(r0);
    if first < eta {
        log::warn!("precision {first:.4} at r0 = {r0} m is already below eta = {eta}");
        return Ok(region(r0, first, true));
    }
    let mut last = (r0, first);
    let mut k = 1u64;
    while last.0 < cap {
        let r = (r0 + k as f64 * step).min(cap);
        let p = precision_at(r);
        if p < eta {
            break;
        }
        last = (r, p);
        k += 1;
    }
    Ok(region(last.0, last.1, false))
}

/// Classifies, projects and windows records to the query region.
///
/// Source indices of the returned points refer to positions in `records`.
pub fn assemble_dataset(
    records: &[TweetRecord],
    poi: &PoiSpec,
    config: &RegionConfig,
    proj: &Projection,
) -> Result<(LabeledDataset, QueryRegion)> {
    let tagged: Vec<(PlanarPoint, Relevance)> = records
        .iter()
        .enumerate()
        .map(|(i, r)| {
            Ok((
                proj.project(r.lat, r.lon, i)?,
                classify(r, poi, config.case_sensitive),
            ))
        })
        .collect::<Result<_>>()?;
    let region = build_query_region(
        &tagged,
        poi.center,
        proj,
        config.eta,
        config.r0,
        config.step,
    )?;
    let c = proj.project(poi.center.0, poi.center.1, usize::MAX)?.xy();
    let (mut relevant, mut irrelevant) = (Vec::new(), Vec::new());
    for (p, rel) in tagged {
        if dist_xy(p.xy(), c) <= region.radius {
            match rel {
                Relevance::Relevant => relevant.push(p),
                Relevance::Irrelevant => irrelevant.push(p),
            }
        }
    }
    let dataset = LabeledDataset::new(relevant, irrelevant, (proj.origin_lat, proj.origin_lon))?;
    Ok((dataset, region))
}
