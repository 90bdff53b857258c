//! CSV schemas: traces `k,objective,t,s,residual` and scans `t,s,rho`.
//!
//! Reals are written with 17 significant digits so that reading a file back
//! reproduces the in-memory values bitwise.

use std::io::{Read, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use drsplit::spectral::{EigenRecord, ScanRow};
use drsplit::{SolveTrace, TraceRecord};

pub const TRACE_HEADER: [&str; 5] = ["k", "objective", "t", "s", "residual"];
pub const SCAN_HEADER: [&str; 3] = ["t", "s", "rho"];

pub fn real(v: f64) -> String {
    format!("{v:.16e}")
}

fn create(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).with_context(|| format!("cannot create {}", path.display()))
}

pub fn write_trace<W: Write>(trace: &SolveTrace, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_HEADER)?;
    for r in &trace.records {
        w.write_record([r.k.to_string(), real(r.objective), real(r.t), real(r.s), real(r.residual)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trace_csv(trace: &SolveTrace, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    write_trace(trace, file).with_context(|| format!("writing {}", path.display()))
}

pub fn read_trace<R: Read>(input: R) -> Result<SolveTrace> {
    let mut rd = csv::Reader::from_reader(input);
    if rd.headers()?.iter().ne(TRACE_HEADER) {
        bail!("unexpected trace header {:?}", rd.headers()?);
    }
    let mut trace = SolveTrace::default();
    for (line, row) in rd.records().enumerate() {
        let row = row?;
        let field = |i: usize| -> Result<f64> {
            row[i]
                .parse()
                .with_context(|| format!("row {}: bad `{}` value {:?}", line + 1, TRACE_HEADER[i], &row[i]))
        };
        trace.records.push(TraceRecord {
            k: row[0].parse().with_context(|| format!("row {}: bad k {:?}", line + 1, &row[0]))?,
            objective: field(1)?,
            t: field(2)?,
            s: field(3)?,
            residual: field(4)?,
        });
    }
    Ok(trace)
}

pub fn read_trace_csv(path: &Path) -> Result<SolveTrace> {
    let file = std::fs::File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    read_trace(file).with_context(|| format!("reading {}", path.display()))
}

pub fn write_scan_csv(rows: &[ScanRow], path: &Path) -> Result<()> {
    let mut w = create(path)?;
    w.write_record(SCAN_HEADER)?;
    for r in rows {
        w.write_record([real(r.t), real(r.s), real(r.rho)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_scan_csv(path: &Path) -> Result<Vec<ScanRow>> {
    let mut rd = csv::Reader::from_path(path).with_context(|| format!("cannot open {}", path.display()))?;
    if rd.headers()?.iter().ne(SCAN_HEADER) {
        bail!("unexpected scan header {:?}", rd.headers()?);
    }
    rd.records()
        .map(|row| {
            let row = row?;
            Ok(ScanRow {
                t: row[0].parse()?,
                s: row[1].parse()?,
                rho: row[2].parse()?,
            })
        })
        .collect()
}

/// `re,im,c,disc_bound,distance,exempt,contained`.
pub fn write_eigen_csv(records: &[EigenRecord], path: &Path) -> Result<()> {
    let mut w = create(path)?;
    w.write_record(["re", "im", "c", "disc_bound", "distance", "exempt", "contained"])?;
    for r in records {
        w.write_record([
            real(r.lambda.re),
            real(r.lambda.im),
            real(r.c),
            real(r.disc_bound),
            real(r.distance),
            r.exempt.to_string(),
            r.contained.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Named columns of equal length, written side by side with an `i` index.
pub fn write_columns(columns: &[(&str, &[f64])], path: &Path) -> Result<()> {
    let len = columns.first().map_or(0, |c| c.1.len());
    if columns.iter().any(|c| c.1.len() != len) {
        bail!("columns of unequal length");
    }
    let mut w = create(path)?;
    w.write_record(std::iter::once("i").chain(columns.iter().map(|c| c.0)))?;
    for i in 0..len {
        w.write_record(std::iter::once(i.to_string()).chain(columns.iter().map(|c| real(c.1[i]))))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_trace_is_header_only() {
        let mut buf = Vec::new();
        write_trace(&SolveTrace::default(), &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "k,objective,t,s,residual\n");
    }

    #[test]
    fn round_trip_is_bitwise() {
        let values = [0.1, 1.0 / 3.0, f64::MIN_POSITIVE, 1e300, -2.5e-17, 5e-324, f64::MAX];
        let trace = SolveTrace {
            records: values
                .iter()
                .enumerate()
                .map(|(k, &v)| TraceRecord { k, objective: v, t: v * 0.5, s: -v, residual: v.abs() })
                .collect(),
        };
        let mut buf = Vec::new();
        write_trace(&trace, &mut buf).unwrap();
        let back = read_trace(buf.as_slice()).unwrap();
        for (a, b) in trace.records.iter().zip(&back.records) {
            assert_eq!(a.k, b.k);
            for (x, y) in [(a.objective, b.objective), (a.t, b.t), (a.s, b.s), (a.residual, b.residual)] {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
        assert!(buf.ends_with(b"\n"));
    }

    #[test]
    fn rejects_foreign_header() {
        assert!(read_trace("a,b\n1,2\n".as_bytes()).is_err());
    }

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(real(0.1), "1.0000000000000001e-1");
    }
}
