//! Deterministic report serialization.
//!
//! Every CSV starts with two comment lines — the experiment's config hash
//! and the per-column units — followed by a column-name row. Floats are
//! written with Rust's shortest round-tripping scientific notation, so a
//! byte-identical rerun certificate is meaningful and files parse back to
//! the exact binary values.

use std::fmt::Write as _;
use std::path::Path;

use crate::dini::DiniReport;
use crate::error::{CoreError, Result};
use crate::oscillation::OscillationProfile;

/// FNV-1a 64-bit hash of a canonical configuration string; printed in every
/// artifact header so outputs can be traced to the exact configuration.
pub fn config_hash(canonical: &str) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h = OFFSET;
    for b in canonical.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(PRIME);
    }
    h
}

/// Formats a float in shortest round-tripping scientific notation.
pub fn fmt_float(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v:e}")
    }
}

pub fn parse_float(s: &str) -> Result<f64> {
    match s.trim() {
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        "nan" => Ok(f64::NAN),
        t => t
            .parse::<f64>()
            .map_err(|_| CoreError::Parse(format!("bad float `{t}`"))),
    }
}

/// A small CSV document with the mandatory header block.
pub struct CsvDoc {
    text: String,
}

impl CsvDoc {
    /// Starts a document: config-hash line, units line, column-name row.
    ///
    /// `columns` pairs each column name with its unit (`"1"` for a pure
    /// number).
    pub fn new(hash: u64, columns: &[(&str, &str)]) -> Self {
        let mut text = String::new();
        let _ = writeln!(text, "# config_hash=0x{hash:016x}");
        let units = columns
            .iter()
            .map(|(name, unit)| format!("{name}={unit}"))
            .collect::<Vec<_>>()
            .join(",");
        let _ = writeln!(text, "# units: {units}");
        let names = columns
            .iter()
            .map(|(name, _)| *name)
            .collect::<Vec<_>>()
            .join(",");
        let _ = writeln!(text, "{names}");
        Self { text }
    }

    /// Appends one row of raw cells (caller formats floats via
    /// [`fmt_float`]).
    pub fn push_row(&mut self, cells: &[String]) {
        let _ = writeln!(self.text, "{}", cells.join(","));
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

/// Renders an oscillation profile as CSV
/// (`radius,value,centersTried,estimator`).
pub fn profile_csv(profile: &OscillationProfile, hash: u64) -> String {
    let mut doc = CsvDoc::new(
        hash,
        &[
            ("radius", "length"),
            ("value", "field"),
            ("centersTried", "1"),
            ("estimator", "enum"),
        ],
    );
    for (r, v) in profile.pairs() {
        doc.push_row(&[
            fmt_float(r),
            fmt_float(v),
            profile.centers_tried().to_string(),
            profile.estimator().to_string(),
        ]);
    }
    doc.into_string()
}

/// Renders a Dini/X report as CSV (`radius,xValue,cParameter`).
pub fn dini_csv(report: &DiniReport, hash: u64) -> String {
    let mut doc = CsvDoc::new(
        hash,
        &[
            ("radius", "length"),
            ("xValue", "1"),
            ("cParameter", "1"),
        ],
    );
    for &(r, x) in &report.x_values {
        doc.push_row(&[fmt_float(r), fmt_float(x), fmt_float(report.c_parameter)]);
    }
    doc.into_string()
}

/// Reads a `(radius, value)` table from CSV text: `#` comments and a
/// non-numeric first row (column names) are skipped.
pub fn parse_modulus_table(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut cells = line.split(',');
        let (a, b) = match (cells.next(), cells.next()) {
            (Some(a), Some(b)) => (a, b),
            _ => {
                return Err(CoreError::Parse(format!(
                    "modulus table row `{line}` needs two comma-separated columns"
                )))
            }
        };
        match (parse_float(a), parse_float(b)) {
            (Ok(r), Ok(v)) => out.push((r, v)),
            // Tolerate a single column-name row.
            _ if out.is_empty() => continue,
            (ra, vb) => {
                ra?;
                vb?;
            }
        }
    }
    if out.is_empty() {
        return Err(CoreError::Parse(
            "modulus table contains no numeric rows".into(),
        ));
    }
    Ok(out)
}

/// Reads a modulus table from disk (see [`parse_modulus_table`]).
pub fn read_modulus_table(path: &Path) -> Result<Vec<(f64, f64)>> {
    let text = std::fs::read_to_string(path)?;
    parse_modulus_table(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_is_stable_and_input_sensitive() {
        let a = config_hash("field=prop-c1,p=2");
        let b = config_hash("field=prop-c1,p=2");
        let c = config_hash("field=prop-c1,p=4");
        assert_eq!(a, b);
        assert_ne!(a, c);
        // FNV-1a of the empty string is the published offset basis.
        assert_eq!(config_hash(""), 0xcbf2_9ce4_8422_2325);
    }

    #[test]
    fn floats_round_trip_exactly() {
        for &v in &[
            0.0,
            1.0,
            -2.5e-300,
            std::f64::consts::PI,
            4f64.powi(-500),
            f64::INFINITY,
        ] {
            let s = fmt_float(v);
            let back = parse_float(&s).unwrap();
            assert_eq!(v.to_bits(), back.to_bits(), "{v} → {s} → {back}");
        }
    }

    #[test]
    fn csv_layout_and_table_round_trip() {
        let mut doc = CsvDoc::new(0xdead_beef, &[("radius", "length"), ("value", "1")]);
        doc.push_row(&[fmt_float(0.5), fmt_float(0.25)]);
        doc.push_row(&[fmt_float(0.125), fmt_float(0.1)]);
        let text = doc.into_string();
        assert!(text.starts_with("# config_hash=0x00000000deadbeef\n"));
        assert!(text.contains("# units: radius=length,value=1\n"));
        assert!(text.contains("radius,value\n"));
        let table = parse_modulus_table(&text).unwrap();
        assert_eq!(table, vec![(0.5, 0.25), (0.125, 0.1)]);
    }

    #[test]
    fn malformed_tables_are_rejected(){
        assert!(parse_modulus_table("# only comments\n").is_err());
        assert!(parse_modulus_table("radius,value\n0.5\n").is_err());
        assert!(parse_modulus_table("0.5,0.2\nbad,row\n").is_err());
    }
}
