//! CSV artifacts. Floats are written as `{:.16e}` (17 significant digits), so
//! every file reads back bit-for-bit.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use kinetic_hj::{GridSpec, PhaseField, SpatialField};

use crate::error::{HarnessError, Result};
use crate::metric::{ErrorRow, ErrorTable};

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| HarnessError::Data(format!("not a number: '{s}'")))
}

fn parse_usize(s: &str) -> Result<usize> {
    s.trim()
        .parse()
        .map_err(|_| HarnessError::Data(format!("not an index: '{s}'")))
}

fn expect_header(rdr: &mut csv::Reader<File>, expected: &[&str]) -> Result<()> {
    let header = rdr.headers()?;
    if header.iter().ne(expected.iter().copied()) {
        return Err(HarnessError::Data(format!(
            "expected header {expected:?}, got {header:?}"
        )));
    }
    Ok(())
}

/// Writes `(i, j, x, v, value)` rows, velocity-major.
pub fn write_field_csv(path: &Path, grid: &GridSpec, field: &PhaseField) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["i", "j", "x", "v", "value"])?;
    for j in 0..field.n_v() {
        for i in 0..field.n_x() {
            w.write_record([
                i.to_string(),
                j.to_string(),
                fmt_f64(grid.x()[i]),
                fmt_f64(grid.v()[j]),
                fmt_f64(field.get(i, j)),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads a field written by [`write_field_csv`]; the shape is inferred from
/// the largest indices and every node must appear exactly once.
pub fn read_field_csv(path: &Path) -> Result<PhaseField> {
    let mut rdr = csv::Reader::from_path(path)?;
    expect_header(&mut rdr, &["i", "j", "x", "v", "value"])?;
    let mut entries = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        entries.push((parse_usize(&rec[0])?, parse_usize(&rec[1])?, parse_f64(&rec[4])?));
    }
    let n_x = entries.iter().map(|e| e.0).max().map_or(0, |m| m + 1);
    let n_v = entries.iter().map(|e| e.1).max().map_or(0, |m| m + 1);
    if entries.len() != n_x * n_v {
        return Err(HarnessError::Data(format!(
            "{} rows do not fill a {n_x}x{n_v} grid",
            entries.len()
        )));
    }
    let mut values = vec![f64::NAN; n_x * n_v];
    for (i, j, v) in entries {
        values[j * n_x + i] = v;
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(HarnessError::Data("duplicate or missing nodes".into()));
    }
    Ok(PhaseField::from_values(n_x, n_v, values)?)
}

/// Writes `(i, x, value)` rows.
pub fn write_spatial_csv(path: &Path, grid: &GridSpec, field: &SpatialField) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["i", "x", "value"])?;
    for (i, &v) in field.values().iter().enumerate() {
        w.write_record([i.to_string(), fmt_f64(grid.x()[i]), fmt_f64(v)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_spatial_csv(path: &Path) -> Result<SpatialField> {
    let mut rdr = csv::Reader::from_path(path)?;
    expect_header(&mut rdr, &["i", "x", "value"])?;
    let mut values = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if parse_usize(&rec[0])? != k {
            return Err(HarnessError::Data(format!("row {k} out of order")));
        }
        values.push(parse_f64(&rec[2])?);
    }
    Ok(SpatialField::new(values))
}

/// Writes `(param, error, order)`; the order is empty where undefined.
pub fn write_table_csv(path: &Path, table: &ErrorTable) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["param", "error", "order"])?;
    for row in &table.rows {
        w.write_record([
            fmt_f64(row.param),
            fmt_f64(row.error),
            row.order.map(fmt_f64).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads the rows of a table; metadata is not part of the CSV.
pub fn read_table_csv(path: &Path) -> Result<Vec<ErrorRow>> {
    let mut rdr = csv::Reader::from_path(path)?;
    expect_header(&mut rdr, &["param", "error", "order"])?;
    rdr.records()
        .map(|rec| {
            let rec = rec?;
            Ok(ErrorRow {
                param: parse_f64(&rec[0])?,
                error: parse_f64(&rec[1])?,
                order: if rec[2].trim().is_empty() {
                    None
                } else {
                    Some(parse_f64(&rec[2])?)
                },
            })
        })
        .collect()
}

/// Generic two-column series `(t, value)`.
pub fn write_series_csv(path: &Path, names: [&str; 2], series: &[(f64, f64)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(names)?;
    for &(a, b) in series {
        w.write_record([fmt_f64(a), fmt_f64(b)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_series_csv(path: &Path) -> Result<Vec<(f64, f64)>> {
    let mut rdr = csv::Reader::from_path(path)?;
    rdr.records()
        .map(|rec| {
            let rec = rec?;
            Ok((parse_f64(&rec[0])?, parse_f64(&rec[1])?))
        })
        .collect()
}

/// Config lines followed by `derived.*` entries.
pub fn write_manifest(path: &Path, config_text: &str, derived: &[(String, String)]) -> Result<()> {
    let mut f = File::create(path)?;
    f.write_all(config_text.as_bytes())?;
    for (k, v) in derived {
        writeln!(f, "derived.{k} = {v}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use kinetic_hj::build_grid;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn files_round_trip_bitwise() {
        let dir = tempfile::tempdir().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let grid = build_grid(3.0, 2.0, 9, 7, 0.01, 0.1).unwrap();
        let values = (0..9 * 7).map(|_| rng.gen_range(-1e3..1e3) * rng.gen::<f64>().powi(9)).collect();
        let field = PhaseField::from_values(9, 7, values).unwrap();
        let p = dir.path().join("f.csv");
        write_field_csv(&p, &grid, &field).unwrap();
        assert_eq!(read_field_csv(&p).unwrap(), field);

        let spatial = SpatialField::new((0..9).map(|_| rng.gen::<f64>() - 0.5).collect());
        let p = dir.path().join("s.csv");
        write_spatial_csv(&p, &grid, &spatial).unwrap();
        assert_eq!(read_spatial_csv(&p).unwrap(), spatial);

        let table = ErrorTable::from_pairs("dx", &[(0.4, 0.3), (0.2, 0.16), (0.1, 0.07)]).unwrap();
        let p = dir.path().join("t.csv");
        write_table_csv(&p, &table).unwrap();
        assert_eq!(read_table_csv(&p).unwrap(), table.rows);

        let series = vec![(0.0, 1.0 / 3.0), (0.5, f64::MIN_POSITIVE), (1.0, -2.5e-300)];
        let p = dir.path().join("a.csv");
        write_series_csv(&p, ["t", "amplitude"], &series).unwrap();
        assert_eq!(read_series_csv(&p).unwrap(), series);
    }

    #[test]
    fn malformed_fields_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.csv");
        std::fs::write(&p, "i,j,x,v,value\n0,0,0,0,1\n1,1,0,0,1\n").unwrap();
        assert!(read_field_csv(&p).is_err());
        std::fs::write(&p, "a,b\n1,2\n").unwrap();
        assert!(read_field_csv(&p).is_err());
    }
}
