use std::io::{Read, Write};
use std::path::Path;

use super::experiment::{LabeledSample, LabeledSampleSet, MAX_SAMPLE_LEN};
use crate::error::{Error, Result};
use crate::pvalue::Class;
use crate::scoring::ObjectSample;

/// Writes `split,group,label,n,v1..v100`; cells past `n` are left empty.
pub fn write_samples<W: Write>(set: &LabeledSampleSet, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["split".to_string(), "group".into(), "label".into(), "n".into()];
    header.extend((1..=MAX_SAMPLE_LEN).map(|i| format!("v{i}")));
    w.write_record(&header)?;
    for s in &set.samples {
        if s.sample.len() > MAX_SAMPLE_LEN {
            return Err(Error::InvalidArgument(format!(
                "sample of length {} exceeds {MAX_SAMPLE_LEN}",
                s.sample.len()
            )));
        }
        let mut row = vec![
            s.split.to_string(),
            s.group.to_string(),
            s.label.to_string(),
            s.sample.len().to_string(),
        ];
        row.extend(s.sample.values().iter().map(|v| format!("{v:e}")));
        row.resize(4 + MAX_SAMPLE_LEN, String::new());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_samples<R: Read>(input: R, origin: &Path) -> Result<LabeledSampleSet> {
    let mut r = csv::ReaderBuilder::new().flexible(true).from_reader(input);
    let mut samples = Vec::new();
    for (i, record) in r.records().enumerate() {
        let record = record?;
        let line = i + 2;
        let fail = |message: String| Error::Format {
            path: origin.to_path_buf(),
            line,
            message,
        };
        let field = |k: usize| record.get(k).ok_or_else(|| fail(format!("missing column {k}")));
        let split = field(0)?.parse()?;
        let group = field(1)?.parse()?;
        let label: Class = field(2)?.parse()?;
        let n: usize = field(3)?.parse().map_err(|_| fail("bad length".into()))?;
        if n > MAX_SAMPLE_LEN {
            return Err(fail(format!("length {n} exceeds {MAX_SAMPLE_LEN}")));
        }
        let values = (0..n)
            .map(|k| {
                let cell = field(4 + k)?;
                cell.trim().parse::<f64>().map_err(|_| fail(format!("bad value {cell:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if (4 + n..record.len()).any(|k| !record[k].trim().is_empty()) {
            return Err(fail("values beyond n".into()));
        }
        samples.push(LabeledSample {
            split,
            group,
            label,
            sample: ObjectSample::new(values)?,
        });
    }
    Ok(LabeledSampleSet { samples })
}

pub fn save_samples(set: &LabeledSampleSet, path: &Path) -> Result<()> {
    write_samples(set, std::io::BufWriter::new(std::fs::File::create(path)?))
}

pub fn load_samples(path: &Path) -> Result<LabeledSampleSet> {
    read_samples(std::fs::File::open(path)?, path)
}
