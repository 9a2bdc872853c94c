//! `l,t,value` grids, one row per cell, time-major.

use std::fmt::Write as _;

use crate::error::CliError;

pub const HEADER: &str = "l,t,value";

#[derive(Debug, Clone, PartialEq)]
pub struct CsvGrid {
    pub sites: Vec<usize>,
    pub times: Vec<f64>,
    /// `values[k * sites.len() + i]` is site `i` at time `k`.
    pub values: Vec<f64>,
}

pub fn format_value(v: f64) -> String {
    format!("{v:.11e}")
}

pub fn write_grid(sites: &[usize], times: &[f64], values: &[f64]) -> String {
    assert_eq!(values.len(), sites.len() * times.len(), "grid shape");
    let mut out = String::with_capacity(32 * values.len() + 16);
    out.push_str(HEADER);
    out.push('\n');
    for (k, t) in times.iter().enumerate() {
        for (i, l) in sites.iter().enumerate() {
            writeln!(out, "{l},{t},{}", format_value(values[k * sites.len() + i]))
                .expect("string write");
        }
    }
    out
}

/// Reads a grid back, checking the rows form a complete time-major lattice.
pub fn read_grid(text: &str) -> Result<CsvGrid, CliError> {
    let bad = |row: usize, msg: String| CliError::Config(format!("csv row {row}: {msg}"));
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| bad(0, e.to_string()))?;
    if header.iter().collect::<Vec<_>>() != ["l", "t", "value"] {
        return Err(bad(0, format!("header must be {HEADER}")));
    }
    let mut rows: Vec<(usize, f64, f64)> = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| bad(row, e.to_string()))?;
        if rec.len() != 3 {
            return Err(bad(row, format!("expected 3 fields, got {}", rec.len())));
        }
        let l: usize = rec[0]
            .parse()
            .map_err(|_| bad(row, format!("bad site {:?}", &rec[0])))?;
        let t: f64 = rec[1]
            .parse()
            .map_err(|_| bad(row, format!("bad time {:?}", &rec[1])))?;
        let v: f64 = rec[2]
            .parse()
            .map_err(|_| bad(row, format!("bad value {:?}", &rec[2])))?;
        if !t.is_finite() {
            return Err(bad(row, "non-finite time".into()));
        }
        rows.push((l, t, v));
    }
    let Some(&(_, t_first, _)) = rows.first() else {
        return Ok(CsvGrid {
            sites: vec![],
            times: vec![],
            values: vec![],
        });
    };
    let sites: Vec<usize> = rows
        .iter()
        .take_while(|r| r.1 == t_first)
        .map(|r| r.0)
        .collect();
    if !rows.len().is_multiple_of(sites.len()) {
        return Err(bad(rows.len(), "incomplete final time slice".into()));
    }
    let mut times = Vec::new();
    for (k, chunk) in rows.chunks(sites.len()).enumerate() {
        let t = chunk[0].1;
        if times.last().is_some_and(|&prev| t <= prev) {
            return Err(bad(k * sites.len() + 1, "times must increase".into()));
        }
        for (i, r) in chunk.iter().enumerate() {
            if r.0 != sites[i] || r.1 != t {
                return Err(bad(
                    k * sites.len() + i + 1,
                    "rows do not form a time-major lattice".into(),
                ));
            }
        }
        times.push(t);
    }
    Ok(CsvGrid {
        sites,
        times,
        values: rows.into_iter().map(|r| r.2).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(format_value(0.5), "5.00000000000e-1");
        assert_eq!(format_value(-1.0 / 3.0), "-3.33333333333e-1");
    }

    #[test]
    fn round_trip() {
        let sites = vec![1, 2, 5];
        let times = vec![0.0, 0.25, 0.5];
        let values: Vec<f64> = (0..9).map(|i| i as f64 / 7.0 - 0.5).collect();
        let text = write_grid(&sites, &times, &values);
        assert!(text.starts_with("l,t,value\n1,0,"));
        let back = read_grid(&text).unwrap();
        assert_eq!(back.sites, sites);
        assert_eq!(back.times, times);
        for (a, b) in back.values.iter().zip(&values) {
            assert!((a - b).abs() < 1e-12 * b.abs().max(1.0));
        }
    }

    #[test]
    fn rejects_broken_lattices() {
        for bad in [
            "x,t,value\n1,0,1\n",
            "l,t,value\n1,0,1\n2,0,1\n1,1,1\n",
            "l,t,value\n1,0,1\n2,0,1\n2,1,1\n1,1,1\n",
            "l,t,value\n1,1,1\n1,0,1\n",
            "l,t,value\n1,0\n",
            "l,t,value\n-1,0,1\n",
            "l,t,value\n1,inf,1\n",
        ] {
            assert!(read_grid(bad).is_err(), "{bad:?}");
        }
        assert!(read_grid("l,t,value\n").unwrap().values.is_empty());
    }
}
