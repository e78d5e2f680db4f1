//! Field serialization: a CSV body (axis coordinates, then `re`, `im`) and a
//! JSON header carrying the grid metadata.

use std::io::{Read, Write};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::{ComplexField, Grid};

const AXIS_NAMES: [&str; 3] = ["x", "y", "z"];

/// JSON header written next to a field CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldHeader {
    pub dims: usize,
    pub points: Vec<usize>,
    pub lengths: Vec<f64>,
    pub spacing: Vec<f64>,
    pub time: f64,
    pub columns: Vec<String>,
}

impl FieldHeader {
    pub fn for_grid<T: Real>(grid: &Grid<T>, time: T) -> Self {
        let d = grid.dims();
        let mut columns: Vec<String> = AXIS_NAMES[..d].iter().map(|s| s.to_string()).collect();
        columns.push("re".into());
        columns.push("im".into());
        Self {
            dims: d,
            points: grid.points()[..d].to_vec(),
            lengths: grid.lengths()[..d].iter().map(|v| v.as_f64()).collect(),
            spacing: grid.spacing()[..d].iter().map(|v| v.as_f64()).collect(),
            time: time.as_f64(),
            columns,
        }
    }

    pub fn grid<T: Real>(&self) -> Result<Grid<T>> {
        let lengths: Vec<T> = self.lengths.iter().map(|v| T::lit(*v)).collect();
        Grid::new(self.dims, &self.points, &lengths)
    }
}

/// Formats with 17 significant digits, enough to round-trip an `f64`.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_field_csv<T: Real, W: Write>(field: &ComplexField<T>, out: W) -> Result<()> {
    let grid = field.grid();
    let d = grid.dims();
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = AXIS_NAMES[..d].to_vec();
    header.extend(["re", "im"]);
    w.write_record(&header).map_err(csv_err)?;
    let mut row = Vec::with_capacity(d + 2);
    for (i, z) in field.values().iter().enumerate() {
        row.clear();
        let x = grid.node(i);
        for v in x.iter().take(d) {
            row.push(fmt_num(v.as_f64()));
        }
        row.push(fmt_num(z.re.as_f64()));
        row.push(fmt_num(z.im.as_f64()));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a field written by [`write_field_csv`]. Rows must be in storage order.
pub fn read_field_csv<T: Real, R: Read>(header: &FieldHeader, input: R) -> Result<ComplexField<T>> {
    let grid: Grid<T> = header.grid()?;
    let d = grid.dims();
    let mut r = csv::Reader::from_reader(input);
    let mut values = Vec::with_capacity(grid.len());
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        if rec.len() != d + 2 {
            return Err(Error::Io(format!("row {i}: expected {} columns", d + 2)));
        }
        let num = |k: usize| -> Result<f64> {
            rec[k]
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Io(format!("row {i}, column {k}: {e}")))
        };
        let expect = grid.node(i);
        for a in 0..d {
            let x = num(a)?;
            let tol = 1e-9 * grid.spacing()[a].as_f64();
            if (x - expect[a].as_f64()).abs() > tol {
                return Err(Error::Io(format!("row {i}: coordinate mismatch on axis {a}")));
            }
        }
        values.push(Complex::new(T::lit(num(d)?), T::lit(num(d + 1)?)));
    }
    ComplexField::new(grid, values)
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}
