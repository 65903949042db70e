//! Text output for sweep results.
//!
//! CSV (UTF-8, LF line endings), one row per (run, epoch):
//!
//! ```text
//! hidden_layers,neurons,batch_size,epochs,seed,epoch,test_accuracy
//! 4,500,50,50,5,1,0.9611
//! ```
//!
//! Plot data is newline-delimited JSON. Every line carries `series`,
//! `config_id` (grid index), `epoch` and `accuracy`. Per-epoch curves use
//! `"series":"epoch"`; after all curves, one `"series":"final"` line per run
//! gives its last-epoch accuracy keyed by hidden-layer count:
//!
//! ```text
//! {"series":"epoch","config_id":0,"hidden_layers":2,"batch_size":50,"epoch":1,"accuracy":0.9512}
//! {"series":"final","config_id":0,"hidden_layers":2,"batch_size":50,"epoch":50,"accuracy":0.9726}
//! ```
//!
//! Accuracies are printed with four decimals, rounding half up.

use std::fmt::Write;
use std::str::FromStr;

use crate::error::Error;
use crate::experiment::train::SweepRecord;

pub const CSV_HEADER: &str = "hidden_layers,neurons,batch_size,epochs,seed,epoch,test_accuracy";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmitFormat {
    Csv,
    PlotData,
}

impl FromStr for EmitFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "csv" => Ok(Self::Csv),
            "plotdata" => Ok(Self::PlotData),
            _ => Err(Error::InvalidValue(format!("unknown output format {s:?}"))),
        }
    }
}

/// Four decimal places, halves rounded up.
pub fn format_accuracy(value: f64) -> String {
    let scaled = (value * 10_000.0 + 0.5).floor() as i64;
    let sign = if scaled < 0 { "-" } else { "" };
    let scaled = scaled.unsigned_abs();
    format!("{sign}{}.{:04}", scaled / 10_000, scaled % 10_000)
}

pub fn emit(records: &SweepRecord, format: EmitFormat) -> String {
    match format {
        EmitFormat::Csv => emit_csv(records),
        EmitFormat::PlotData => emit_plotdata(records),
    }
}

pub fn emit_csv(records: &SweepRecord) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for report in &records.reports {
        let c = &report.config;
        for (e, &acc) in report.per_epoch_accuracy.iter().enumerate() {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                c.hidden_layers,
                c.neurons_per_layer,
                c.batch_size,
                c.epochs,
                c.seed,
                e + 1,
                format_accuracy(acc)
            )
            .unwrap();
        }
    }
    out
}

pub fn emit_plotdata(records: &SweepRecord) -> String {
    let mut out = String::new();
    let line = |out: &mut String,
                series: &str,
                id: usize,
                hidden: usize,
                batch: usize,
                epoch: usize,
                acc: f64| {
        writeln!(
            out,
            "{{\"series\":\"{series}\",\"config_id\":{id},\"hidden_layers\":{hidden},\"batch_size\":{batch},\"epoch\":{epoch},\"accuracy\":{}}}",
            format_accuracy(acc)
        )
        .unwrap();
    };
    for (id, report) in records.reports.iter().enumerate() {
        let c = &report.config;
        for (e, &acc) in report.per_epoch_accuracy.iter().enumerate() {
            line(
                &mut out,
                "epoch",
                id,
                c.hidden_layers,
                c.batch_size,
                e + 1,
                acc,
            );
        }
    }
    for (id, report) in records.reports.iter().enumerate() {
        let c = &report.config;
        line(
            &mut out,
            "final",
            id,
            c.hidden_layers,
            c.batch_size,
            report.per_epoch_accuracy.len(),
            report.final_accuracy,
        );
    }
    out
}
