//! Table-shaped reports for `analyze`.
//!
//! Column order is fixed by [`COLUMNS`]. Floats are written with six
//! decimals, undefined ratios as `na` and an infinite PSNR as `inf`. The JSON
//! mirror uses numbers where the CSV has numbers and the same sentinel
//! strings otherwise.

use std::fmt;
use std::io::Write;

use rdh_core::{Psnr, SweepRecord};
use serde_json::{Map, Value};

pub const COLUMNS: [&str; 19] = [
    "row_kind",
    "image_id",
    "path",
    "width",
    "height",
    "T",
    "t0",
    "t1",
    "boundary_before",
    "boundary_after",
    "map_bits_before",
    "map_bits_after",
    "r0",
    "r1",
    "max_payload_before",
    "max_payload_bits",
    "r_emb",
    "psnr_db",
    "best",
];

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Empty,
    Int(u64),
    Float(f64),
    Text(String),
    /// Zero denominator.
    Undefined,
    Inf,
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Empty => Ok(()),
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Float(v) => write!(f, "{v:.6}"),
            Cell::Text(s) => f.write_str(s),
            Cell::Undefined => f.write_str("na"),
            Cell::Inf => f.write_str("inf"),
        }
    }
}

impl Cell {
    fn to_json(&self) -> Value {
        match self {
            Cell::Empty => Value::Null,
            Cell::Int(v) => Value::from(*v),
            // round-trip the printed precision so CSV and JSON agree
            Cell::Float(v) => format!("{v:.6}").parse::<f64>().map(Value::from).unwrap_or(Value::Null),
            Cell::Text(s) => Value::from(s.as_str()),
            Cell::Undefined => Value::from("na"),
            Cell::Inf => Value::from("inf"),
        }
    }

    fn ratio(v: Option<f64>) -> Cell {
        v.map_or(Cell::Undefined, Cell::Float)
    }

    fn psnr(v: Option<Psnr>) -> Cell {
        match v {
            Some(Psnr::Finite(db)) => Cell::Float(db),
            Some(Psnr::Infinite) => Cell::Inf,
            None => Cell::Undefined,
        }
    }
}

/// Identity of the image a row describes.
pub struct ImageInfo<'a> {
    pub id: &'a str,
    pub path: &'a str,
    pub width: usize,
    pub height: usize,
}

pub fn image_row(img: &ImageInfo<'_>, t: u8, rec: &SweepRecord, best: Option<bool>) -> Vec<Cell> {
    let int = |v: usize| Cell::Int(v as u64);
    vec![
        Cell::Text("image".into()),
        Cell::Text(img.id.into()),
        Cell::Text(img.path.into()),
        int(img.width),
        int(img.height),
        Cell::Int(t.into()),
        Cell::Int(rec.t0.into()),
        Cell::Int(rec.t1.into()),
        int(rec.boundary_before),
        int(rec.boundary_after),
        int(rec.map_bits_before),
        int(rec.map_bits_after),
        Cell::ratio(rec.r0),
        Cell::ratio(rec.r1),
        int(rec.max_payload_before),
        int(rec.max_payload_bits),
        Cell::Float(rec.r_emb),
        Cell::psnr(rec.psnr),
        best.map_or(Cell::Empty, |b| Cell::Int(b.into())),
    ]
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Corpus means for one `(t0, t1)`. Ratios average over images where they
/// are defined, PSNR over images with a finite value.
pub fn mean_row(t: u8, t0: u8, t1: u8, records: &[&SweepRecord]) -> Vec<Cell> {
    let psnr = mean(records.iter().filter_map(|r| match r.psnr {
        Some(Psnr::Finite(db)) => Some(db),
        _ => None,
    }));
    let embeddable = records.iter().filter(|r| r.max_payload_bits > 0).count();
    let embeddable_before = records.iter().filter(|r| r.max_payload_before > 0).count();
    vec![
        Cell::Text("mean".into()),
        Cell::Text("mean".into()),
        Cell::Empty,
        Cell::Empty,
        Cell::Empty,
        Cell::Int(t.into()),
        Cell::Int(t0.into()),
        Cell::Int(t1.into()),
        Cell::Empty,
        Cell::Empty,
        Cell::Empty,
        Cell::Empty,
        Cell::ratio(mean(records.iter().filter_map(|r| r.r0))),
        Cell::ratio(mean(records.iter().filter_map(|r| r.r1))),
        // in mean rows the payload columns count embeddable images
        Cell::Int(embeddable_before as u64),
        Cell::Int(embeddable as u64),
        Cell::ratio(mean(records.iter().map(|r| r.r_emb))),
        psnr.map_or(Cell::Undefined, Cell::Float),
        Cell::Empty,
    ]
}

pub fn write_csv<W: Write>(out: W, rows: &[Vec<Cell>]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COLUMNS)?;
    for row in rows {
        w.write_record(row.iter().map(|c| c.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_json(rows: &[Vec<Cell>]) -> Value {
    Value::Array(
        rows.iter()
            .map(|row| {
                let obj: Map<String, Value> =
                    COLUMNS.iter().zip(row).map(|(k, c)| (k.to_string(), c.to_json())).collect();
                Value::Object(obj)
            })
            .collect(),
    )
}
