//! Calibration files: CSV with header `score,label`, an optional
//! `# provenance=...` comment line first, and scores written with 17
//! significant digits. File order is irrelevant; loading sorts.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::pvalue::{CalibrationSet, Class};

/// Reads labeled scores from any `score,label` CSV.
pub fn read_labeled_scores<R: Read>(reader: R, origin: &Path) -> Result<Vec<(f64, Class)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| Error::Format {
            path: origin.to_path_buf(),
            line: 1,
            message: format!("missing column {name:?}"),
        })
    };
    let (score_col, label_col) = (col("score")?, col("label")?);
    let mut out = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let line = record.position().map_or(i + 2, |p| p.line() as usize);
        let bad = |message: String| Error::Format {
            path: origin.to_path_buf(),
            line,
            message,
        };
        let raw = record.get(score_col).unwrap_or("");
        let score: f64 = raw
            .parse()
            .map_err(|_| bad(format!("score {raw:?} is not a number")))?;
        if !score.is_finite() {
            return Err(bad(format!("score {raw:?} is not finite")));
        }
        let label: Class = record
            .get(label_col)
            .unwrap_or("")
            .parse()
            .map_err(|e: Error| bad(e.to_string()))?;
        out.push((score, label));
    }
    Ok(out)
}

pub fn load_calibration(path: &Path) -> Result<CalibrationSet> {
    let mut text = String::new();
    File::open(path)?.read_to_string(&mut text)?;
    let provenance = text
        .lines()
        .next()
        .and_then(|l| l.strip_prefix("# provenance="))
        .unwrap_or("")
        .to_string();
    let scores = read_labeled_scores(text.as_bytes(), path)?;
    CalibrationSet::from_labeled(scores, provenance)
}

pub fn write_calibration<W: Write>(cal: &CalibrationSet, mut out: W) -> Result<()> {
    writeln!(out, "# provenance={}", cal.provenance().replace('\n', " "))?;
    writeln!(out, "score,label")?;
    for class in [Class::Negative, Class::Positive] {
        for s in cal.scores(class) {
            writeln!(out, "{s:.16e},{class}")?;
        }
    }
    Ok(())
}

pub fn save_calibration(cal: &CalibrationSet, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_calibration(cal, &mut out)?;
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn load_sorts_and_splits() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scores.csv");
        std::fs::write(&path, "score,label\n0.7,0\n0.2,1\n0.1,0\n0.9,1\n").unwrap();
        let cal = load_calibration(&path).unwrap();
        assert_eq!(cal.scores(Class::Negative), &[0.1, 0.7]);
        assert_eq!(cal.scores(Class::Positive), &[0.2, 0.9]);
    }

    #[test]
    fn bad_rows_report_line() {
        let err = read_labeled_scores("score,label\n0.1,0\nabc,1\n".as_bytes(), Path::new("x.csv"))
            .unwrap_err();
        assert!(matches!(err, Error::Format { line: 3, .. }), "{err}");
        let err = read_labeled_scores("score,label\n0.1,2\n".as_bytes(), Path::new("x.csv")).unwrap_err();
        assert!(matches!(err, Error::Format { .. }));
        let err = read_labeled_scores("value,label\n".as_bytes(), Path::new("x.csv")).unwrap_err();
        assert!(err.to_string().contains("score"));
    }

    proptest! {
        #[test]
        fn round_trip_is_exact(c0 in prop::collection::vec(-1e6f64..1e6, 0..30),
                               c1 in prop::collection::vec(-1e-3f64..1e-3, 0..30)) {
            let cal = CalibrationSet::new(c0, c1, "split=calib seed=3").unwrap();
            let mut buf = Vec::new();
            write_calibration(&cal, &mut buf).unwrap();
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("c.csv");
            std::fs::write(&path, &buf).unwrap();
            prop_assert_eq!(load_calibration(&path).unwrap(), cal);
        }
    }
}
