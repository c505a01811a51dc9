//! Measurement CSV: `time,slice_id,sfc_id,vn_id,pn_id,feature_1,...,feature_p`, one row per
//! (time, vn), rows ordered by time.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use super::dataset::{Dataset, MeasurementStreams, VnStream};
use crate::error::{Error, Result};
use crate::slicing_sim::AnomalySchedule;

/// Column names to read. Defaults follow the exported header with `p` features.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnMapping {
    pub time: String,
    pub slice_id: String,
    pub sfc_id: String,
    pub vn_id: String,
    pub pn_id: String,
    pub features: Vec<String>,
    pub label: Option<String>,
}

impl ColumnMapping {
    pub fn standard(num_features: usize) -> Self {
        Self {
            time: "time".into(),
            slice_id: "slice_id".into(),
            sfc_id: "sfc_id".into(),
            vn_id: "vn_id".into(),
            pn_id: "pn_id".into(),
            features: (1..=num_features).map(|k| format!("feature_{k}")).collect(),
            label: None,
        }
    }

    /// Standard names, with every `feature_*` column of the header taken in order.
    pub fn detect(path: &Path) -> Result<Self> {
        let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::Csv { path: path.into(), source: e })?;
        let headers = rdr.headers().map_err(|e| Error::Csv { path: path.into(), source: e })?;
        let mut m = Self::standard(0);
        m.features = headers.iter().filter(|h| h.starts_with("feature_")).map(String::from).collect();
        if headers.iter().any(|h| h == "label") {
            m.label = Some("label".into());
        }
        Ok(m)
    }
}

pub fn write_csv(ds: &Dataset, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
    let wrap = |e: csv::Error| Error::Csv { path: path.into(), source: e };
    let mut header: Vec<String> =
        ["time", "slice_id", "sfc_id", "vn_id", "pn_id"].iter().map(|s| s.to_string()).collect();
    header.extend((1..=ds.num_features()).map(|k| format!("feature_{k}")));
    w.write_record(&header).map_err(wrap)?;
    let mut order: Vec<usize> = (0..ds.vns.len()).collect();
    order.sort_by_key(|&i| ds.vns[i].vn_id);
    for (t, row) in ds.times.iter().zip(&ds.features) {
        for &i in &order {
            let v = &ds.vns[i];
            let mut rec = vec![
                t.to_string(),
                v.slice_id.to_string(),
                v.sfc_id.to_string(),
                v.vn_id.to_string(),
                v.pn_id.to_string(),
            ];
            rec.extend(row[i].iter().map(|x| x.to_string()));
            w.write_record(&rec).map_err(wrap)?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Ground truth next to an exported trace: `kind,target,start,end,loss_fraction`.
pub fn write_schedule_csv(schedule: &AnomalySchedule, path: &Path) -> Result<()> {
    let mut out = String::from("kind,target,start,end,loss_fraction\n");
    for e in &schedule.events {
        let (kind, target) = match e.target {
            crate::slicing_sim::Target::Pn(q) => ("pn", q.to_string()),
            crate::slicing_sim::Target::Pl(r) => ("pl", r.to_string()),
        };
        out.push_str(&format!("{kind},{target},{},{},{}\n", e.start, e.end, e.loss_fraction));
    }
    let mut f = File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
}

fn column(headers: &csv::StringRecord, name: &str) -> Result<usize> {
    headers.iter().position(|h| h == name).ok_or_else(|| Error::MissingColumn(name.to_string()))
}

fn parse_id(rec: &csv::StringRecord, idx: usize, name: &str, row: usize) -> Result<usize> {
    let raw = rec.get(idx).unwrap_or("").trim();
    raw.parse().map_err(|_| Error::MalformedRow {
        row,
        msg: format!("column `{name}` needs a non-negative integer, got {raw:?}"),
    })
}

fn parse_label(raw: &str, row: usize) -> Result<bool> {
    match raw.trim() {
        "1" | "true" | "True" | "TRUE" => Ok(true),
        "0" | "false" | "False" | "FALSE" | "" => Ok(false),
        other => Err(Error::MalformedRow { row, msg: format!("label {other:?} is not 0/1") }),
    }
}

/// Row numbers in errors count the header as row 1.
pub fn ingest_csv(path: &Path, mapping: &ColumnMapping) -> Result<MeasurementStreams> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::Csv { path: path.into(), source: e })?;
    let headers = rdr.headers().map_err(|e| Error::Csv { path: path.into(), source: e })?.clone();
    let ti = column(&headers, &mapping.time)?;
    let si = column(&headers, &mapping.slice_id)?;
    let ci = column(&headers, &mapping.sfc_id)?;
    let vi = column(&headers, &mapping.vn_id)?;
    let pi = column(&headers, &mapping.pn_id)?;
    let fi: Vec<usize> = mapping.features.iter().map(|f| column(&headers, f)).collect::<Result<_>>()?;
    let li = mapping.label.as_deref().map(|l| column(&headers, l)).transpose()?;
    if fi.is_empty() {
        return Err(Error::MissingColumn("feature_1".into()));
    }

    let mut streams: BTreeMap<usize, VnStream> = BTreeMap::new();
    let mut last_time: Option<i64> = None;
    for (k, rec) in rdr.records().enumerate() {
        let row = k + 2;
        let rec = rec.map_err(|e| Error::Csv { path: path.into(), source: e })?;
        let raw_t = rec.get(ti).unwrap_or("").trim();
        let time: i64 =
            raw_t.parse().map_err(|_| Error::MalformedRow { row, msg: format!("time {raw_t:?} is not an integer") })?;
        if let Some(prev) = last_time {
            if time < prev {
                return Err(Error::UnorderedTime { row, time, previous: prev });
            }
        }
        last_time = Some(time);
        let slice_id = parse_id(&rec, si, &mapping.slice_id, row)?;
        let sfc_id = parse_id(&rec, ci, &mapping.sfc_id, row)?;
        let vn_id = parse_id(&rec, vi, &mapping.vn_id, row)?;
        let pn_id = parse_id(&rec, pi, &mapping.pn_id, row)?;
        let mut features = Vec::with_capacity(fi.len());
        for (&i, name) in fi.iter().zip(&mapping.features) {
            let raw = rec.get(i).unwrap_or("").trim();
            let v: f64 =
                raw.parse().map_err(|_| Error::NonNumeric { row, column: name.clone(), value: raw.to_string() })?;
            if !v.is_finite() {
                return Err(Error::NonNumeric { row, column: name.clone(), value: raw.to_string() });
            }
            features.push(v);
        }
        let label = li.map(|i| parse_label(rec.get(i).unwrap_or(""), row)).transpose()?;

        let s = streams.entry(vn_id).or_insert_with(|| VnStream {
            slice_id,
            sfc_id,
            vn_id,
            pn_id,
            times: Vec::new(),
            features: Vec::new(),
            labels: li.map(|_| Vec::new()),
        });
        if (s.slice_id, s.sfc_id, s.pn_id) != (slice_id, sfc_id, pn_id) {
            return Err(Error::MalformedRow { row, msg: format!("vn {vn_id} changes its slice, sfc or pn") });
        }
        if s.times.last() == Some(&time) {
            return Err(Error::MalformedRow { row, msg: format!("duplicate row for vn {vn_id} at time {time}") });
        }
        s.times.push(time);
        s.features.push(features);
        if let (Some(ls), Some(l)) = (s.labels.as_mut(), label) {
            ls.push(l);
        }
    }
    Ok(MeasurementStreams { feature_names: mapping.features.clone(), streams: streams.into_values().collect() })
}
