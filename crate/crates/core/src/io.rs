//! CSV dumps of instances and estimates.
//!
//! An instance file starts with the header `N,n,rho,kind,seed,stream`, then
//! one line with those values, then the `N × n` matrix row by row. Floats are
//! written in Rust's shortest round-trip form, so a dump reads back
//! bit-identically.

use std::io::{BufRead, Write};

use nalgebra::{DMatrix, DVector};

use crate::error::{PvError, Result};
use crate::model_gen::{BasisKind, BasisMatrix};
use crate::rng::SeedSpec;

pub const INSTANCE_HEADER: &str = "N,n,rho,kind,seed,stream";

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceDump {
    pub rho: f64,
    pub seed: SeedSpec,
    pub basis: BasisMatrix,
}

pub fn write_instance_csv<W: Write>(mut w: W, basis: &BasisMatrix, rho: f64, seed: SeedSpec) -> Result<()> {
    let (rows, cols) = basis.data.shape();
    writeln!(w, "{INSTANCE_HEADER}")?;
    writeln!(
        w,
        "{rows},{cols},{rho},{},{},{}",
        basis.kind.as_str(),
        seed.master_seed,
        seed.stream_index
    )?;
    let mut line = String::new();
    for i in 0..rows {
        line.clear();
        for j in 0..cols {
            if j > 0 {
                line.push(',');
            }
            line.push_str(&basis.data[(i, j)].to_string());
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

fn parse<T: std::str::FromStr>(field: &str, what: &str) -> Result<T> {
    field
        .trim()
        .parse()
        .map_err(|_| PvError::Parse(format!("bad {what}: {field:?}")))
}

pub fn read_instance_csv<R: BufRead>(r: R) -> Result<InstanceDump> {
    let mut lines = r.lines();
    let mut next = || -> Result<String> {
        lines
            .next()
            .ok_or_else(|| PvError::Parse("unexpected end of file".into()))?
            .map_err(PvError::from)
    };
    let header = next()?;
    if header.trim() != INSTANCE_HEADER {
        return Err(PvError::Parse(format!("unexpected header {header:?}")));
    }
    let meta = next()?;
    let fields: Vec<&str> = meta.split(',').collect();
    if fields.len() != 6 {
        return Err(PvError::Parse(format!("metadata line needs 6 fields: {meta:?}")));
    }
    let rows: usize = parse(fields[0], "N")?;
    let cols: usize = parse(fields[1], "n")?;
    let rho: f64 = parse(fields[2], "rho")?;
    let kind = BasisKind::parse(fields[3].trim()).ok_or_else(|| PvError::Parse(format!("bad kind {:?}", fields[3])))?;
    let seed = SeedSpec::new(parse(fields[4], "seed")?, parse(fields[5], "stream")?);

    let mut data = DMatrix::zeros(rows, cols);
    for i in 0..rows {
        let line = next()?;
        let values: Vec<&str> = line.split(',').collect();
        if values.len() != cols {
            return Err(PvError::Parse(format!(
                "row {i} has {} fields, expected {cols}",
                values.len()
            )));
        }
        for (j, v) in values.iter().enumerate() {
            data[(i, j)] = parse(v, "matrix entry")?;
        }
    }
    Ok(InstanceDump {
        rho,
        seed,
        basis: BasisMatrix { data, kind },
    })
}

/// One value per line under the header `j,<name>`.
pub fn write_vector_csv<W: Write>(mut w: W, name: &str, v: &DVector<f64>) -> Result<()> {
    writeln!(w, "j,{name}")?;
    for (j, x) in v.iter().enumerate() {
        writeln!(w, "{j},{x}")?;
    }
    Ok(())
}
