//! Long-format CSV: one `(time, q, quantity, value)` observation per row,
//! with units and a formula anchor.

use std::fs::File;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub time: f64,
    /// Empty for quantities not resolved by block.
    pub q: Option<i32>,
    pub quantity: &'static str,
    pub value: f64,
    pub units: &'static str,
    pub anchor: &'static str,
}

/// Quantity descriptor shared by all rows of one kind.
#[derive(Debug, Clone, Copy)]
pub struct Quantity {
    pub name: &'static str,
    pub units: &'static str,
    pub anchor: &'static str,
}

impl Quantity {
    pub const fn new(name: &'static str, units: &'static str, anchor: &'static str) -> Self {
        Quantity {
            name,
            units,
            anchor,
        }
    }

    pub fn row(&self, time: f64, q: Option<i32>, value: f64) -> Row {
        Row {
            time,
            q,
            quantity: self.name,
            value,
            units: self.units,
            anchor: self.anchor,
        }
    }
}

pub fn write_rows(path: &Path, rows: &[Row]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    let io = |e: csv::Error| Error::io(path, std::io::Error::other(e));
    if rows.is_empty() {
        w.write_record(["time", "q", "quantity", "value", "units", "anchor"])
            .map_err(io)?;
    }
    for r in rows {
        w.serialize(r).map_err(io)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
