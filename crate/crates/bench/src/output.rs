//! Episode CSV, plot data, step logs and scenario files.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use hsp_core::dreamr::{DreamrSwitch, Scenario};
use hsp_core::model::StepRecord;
use serde::Serialize;
use thiserror::Error;

use crate::report::{AggregateReport, SetComparison};
use crate::runner::EpisodeRow;

/// First line of every episode CSV.
pub const CSV_SCHEMA: &str = "#schema hsp-bench-episodes v1";

#[derive(Debug, Error)]
pub enum OutputError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("unsupported CSV schema line: {0:?}")]
    Schema(String),
}

pub fn write_rows(w: impl Write, rows: &[EpisodeRow]) -> Result<(), OutputError> {
    let mut w = BufWriter::new(w);
    writeln!(w, "{CSV_SCHEMA}")?;
    let mut c = csv::Writer::from_writer(w);
    for r in rows {
        c.serialize(r)?;
    }
    c.flush()?;
    Ok(())
}

pub fn read_rows(r: impl Read) -> Result<Vec<EpisodeRow>, OutputError> {
    let mut r = BufReader::new(r);
    let mut first = String::new();
    r.read_line(&mut first)?;
    if first.trim_end() != CSV_SCHEMA {
        return Err(OutputError::Schema(first.trim_end().to_string()));
    }
    let mut c = csv::Reader::from_reader(r);
    Ok(c.deserialize().collect::<Result<_, _>>()?)
}

pub fn save_rows(path: &Path, rows: &[EpisodeRow]) -> Result<(), OutputError> {
    write_rows(File::create(path)?, rows)
}

pub fn load_rows(path: &Path) -> Result<Vec<EpisodeRow>, OutputError> {
    read_rows(File::open(path)?)
}

/// One point of a plot series.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlotPoint {
    pub label: String,
    pub x: f64,
    pub y: f64,
    pub err: f64,
}

pub fn write_plot(w: impl Write, points: &[PlotPoint]) -> Result<(), OutputError> {
    let mut c = csv::Writer::from_writer(w);
    for p in points {
        c.serialize(p)?;
    }
    c.flush()?;
    Ok(())
}

/// Mean cost and mean switch count per algorithm with standard errors.
pub fn report_plots(report: &AggregateReport) -> (Vec<PlotPoint>, Vec<PlotPoint>) {
    let mut cost = Vec::new();
    let mut switches = Vec::new();
    for (i, a) in report.algorithms.iter().enumerate() {
        cost.push(PlotPoint {
            label: a.algorithm.clone(),
            x: i as f64,
            y: a.mean_cost,
            err: a.stderr_cost,
        });
        switches.push(PlotPoint {
            label: a.algorithm.clone(),
            x: i as f64,
            y: a.mean_switches,
            err: a.stderr_switches,
        });
    }
    (cost, switches)
}

pub fn comparison_plot(rows: &[SetComparison]) -> Vec<PlotPoint> {
    rows.iter()
        .enumerate()
        .map(|(i, c)| PlotPoint {
            label: c.algorithm.clone(),
            x: i as f64,
            y: 100.0 * c.relative_decrease,
            err: 0.0,
        })
        .collect()
}

#[derive(Serialize)]
struct LogLine<'a> {
    set: usize,
    episode: u32,
    algorithm: &'a str,
    #[serde(flatten)]
    step: &'a StepRecord<DreamrSwitch>,
}

/// One JSON object per executed step.
pub fn write_step_log(w: impl Write, row: &EpisodeRow, log: &[StepRecord<DreamrSwitch>]) -> Result<(), OutputError> {
    let mut w = BufWriter::new(w);
    for step in log {
        let line = LogLine {
            set: row.set,
            episode: row.episode,
            algorithm: &row.algorithm,
            step,
        };
        serde_json::to_writer(&mut w, &line)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_scenario(path: &Path, sc: &Scenario) -> Result<(), OutputError> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, sc)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn load_scenario(path: &Path) -> Result<Scenario, OutputError> {
    Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
}
