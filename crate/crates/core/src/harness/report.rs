use std::io::Write;

use super::metrics::RateReport;
use crate::error::Result;

pub const REPORT_HEADER: [&str; 10] = [
    "experiment", "group", "n", "alpha", "fpr", "fnr", "tpr", "tnr", "accuracy", "pass",
];

/// One row of a report CSV. Undefined entries are written as empty cells.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ReportRow {
    pub experiment: String,
    pub group: String,
    pub n: Option<usize>,
    pub alpha: Option<f64>,
    pub fpr: Option<f64>,
    pub fnr: Option<f64>,
    pub tpr: Option<f64>,
    pub tnr: Option<f64>,
    pub accuracy: Option<f64>,
    pub pass: Option<bool>,
}

impl ReportRow {
    pub fn new(experiment: impl Into<String>, group: impl Into<String>) -> Self {
        ReportRow {
            experiment: experiment.into(),
            group: group.into(),
            ..Default::default()
        }
    }

    pub fn with_rates(mut self, r: &RateReport) -> Self {
        self.fpr = Some(r.fpr);
        self.fnr = Some(r.fnr);
        self.tpr = Some(r.tpr);
        self.tnr = Some(r.tnr);
        self.accuracy = Some(r.accuracy);
        self
    }

    fn cells(&self) -> Vec<String> {
        let real = |v: Option<f64>| v.map(|x| format!("{x}")).unwrap_or_default();
        vec![
            self.experiment.clone(),
            self.group.clone(),
            self.n.map(|n| n.to_string()).unwrap_or_default(),
            real(self.alpha),
            real(self.fpr),
            real(self.fnr),
            real(self.tpr),
            real(self.tnr),
            real(self.accuracy),
            self.pass.map(|p| p.to_string()).unwrap_or_default(),
        ]
    }
}

pub fn write_report<W: Write>(rows: &[ReportRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(REPORT_HEADER)?;
    for r in rows {
        w.write_record(r.cells())?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_cells_for_undefined_entries() {
        let row = ReportRow {
            n: Some(10),
            alpha: Some(0.1),
            fpr: Some(0.25),
            pass: Some(true),
            ..ReportRow::new("power_derived", "G1")
        };
        let mut buf = Vec::new();
        write_report(&[row], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "experiment,group,n,alpha,fpr,fnr,tpr,tnr,accuracy,pass\npower_derived,G1,10,0.1,0.25,,,,,true\n"
        );
    }
}
