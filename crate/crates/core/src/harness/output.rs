use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::runner::AlphaRun;
use crate::{Error, Result};

/// Column order of the results table.
pub const CSV_HEADER: [&str; 17] = [
    "run_id",
    "algorithm",
    "formulation",
    "instance_class",
    "n",
    "regime",
    "r",
    "t",
    "nu",
    "alpha",
    "change_index",
    "p_star",
    "e_i",
    "E",
    "seed_schedule",
    "seed_algorithm",
    "sd_E",
];

/// `run_id` of the aggregate rows.
pub const SUMMARY_RUN_ID: &str = "summary";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(Error::invalid(format!(
                "unknown output format {s:?} (csv|json)"
            ))),
        }
    }
}

/// Mean and sample standard deviation of `E` over the runs of one cell.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub algorithm: String,
    pub formulation: String,
    pub instance_class: String,
    pub n: usize,
    pub regime: String,
    pub r: f64,
    pub t: u64,
    pub nu: usize,
    pub alpha: f64,
    pub runs: usize,
    #[serde(rename = "mean_E")]
    pub mean_e: f64,
    #[serde(rename = "sd_E")]
    pub sd_e: f64,
}

impl Summary {
    fn same_cell(&self, other: &Summary) -> bool {
        self.algorithm == other.algorithm
            && self.formulation == other.formulation
            && self.instance_class == other.instance_class
            && self.n == other.n
            && self.regime == other.regime
            && self.r == other.r
            && self.t == other.t
            && self.nu == other.nu
            && self.alpha == other.alpha
    }
}

/// Groups per-run totals into cells (first-seen order) and computes mean and sample SD.
fn summarise(cells: impl IntoIterator<Item = (Summary, f64)>) -> Vec<Summary> {
    let mut groups: Vec<(Summary, Vec<f64>)> = Vec::new();
    for (key, e) in cells {
        match groups.iter_mut().find(|(k, _)| k.same_cell(&key)) {
            Some((_, v)) => v.push(e),
            None => groups.push((key, vec![e])),
        }
    }
    groups
        .into_iter()
        .map(|(mut s, v)| {
            let (mean, sd) = mean_sd(&v);
            s.runs = v.len();
            s.mean_e = mean;
            s.sd_e = sd;
            s
        })
        .collect()
}

/// Mean and sample standard deviation; the deviation of a single value is 0.
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let ss = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// One summary per (algorithm, formulation, setting, α) cell.
pub fn summarize(runs: &[AlphaRun]) -> Vec<Summary> {
    summarise(runs.iter().map(|run| {
        let m = &run.meta;
        let key = Summary {
            algorithm: m.algorithm.to_string(),
            formulation: m.formulation.to_string(),
            instance_class: m.instance_class.clone(),
            n: m.n,
            regime: m.regime.clone(),
            r: m.r,
            t: m.t,
            nu: m.nu,
            alpha: run.alpha,
            runs: 0,
            mean_e: 0.0,
            sd_e: 0.0,
        };
        (key, run.total_error)
    }))
}

fn fixed(x: f64) -> String {
    format!("{x:.9}")
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        kind => Error::Csv(csv::Error::from(std::io::Error::other(format!("{kind:?}")))),
    }
}

/// Writes detail rows (one per run, level and change) followed by summary rows.
///
/// Reals are written with 9 fixed decimals and `alpha` in shortest round-trip form,
/// so equal results give byte-identical output.
pub fn write_csv<W: Write>(runs: &[AlphaRun], out: W) -> Result<()> {
    if runs.is_empty() {
        return Err(Error::invalid("no results to write"));
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for run in runs {
        let m = &run.meta;
        for rec in &run.records {
            w.write_record([
                m.run_id.clone(),
                m.algorithm.to_string(),
                m.formulation.to_string(),
                m.instance_class.clone(),
                m.n.to_string(),
                m.regime.clone(),
                fixed(m.r),
                m.t.to_string(),
                m.nu.to_string(),
                run.alpha.to_string(),
                rec.change_index.to_string(),
                rec.p_star.to_string(),
                fixed(rec.error),
                fixed(run.total_error),
                m.seed_schedule.to_string(),
                m.seed_algorithm.to_string(),
                String::new(),
            ])?;
        }
    }
    for s in summarize(runs) {
        w.write_record([
            SUMMARY_RUN_ID.to_string(),
            s.algorithm,
            s.formulation,
            s.instance_class,
            s.n.to_string(),
            s.regime,
            fixed(s.r),
            s.t.to_string(),
            s.nu.to_string(),
            s.alpha.to_string(),
            String::new(),
            String::new(),
            String::new(),
            fixed(s.mean_e),
            String::new(),
            String::new(),
            fixed(s.sd_e),
        ])?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

#[derive(Serialize)]
struct JsonResults<'a> {
    runs: &'a [AlphaRun],
    summary: Vec<Summary>,
}

pub fn write_json<W: Write>(runs: &[AlphaRun], out: W) -> Result<()> {
    if runs.is_empty() {
        return Err(Error::invalid("no results to write"));
    }
    let doc = JsonResults {
        runs,
        summary: summarize(runs),
    };
    serde_json::to_writer_pretty(out, &doc)?;
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

/// Writes results to `path` as CSV or JSON.
pub fn emit_results(runs: &[AlphaRun], format: OutputFormat, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = create(path)?;
    match format {
        OutputFormat::Csv => write_csv(runs, &mut out).map_err(|e| match e {
            Error::Csv(c) => csv_err(path)(c),
            e => e,
        })?,
        OutputFormat::Json => write_json(runs, &mut out)?,
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// One row of a results table as read back.
#[derive(Clone, Debug, PartialEq, Deserialize)]
pub struct CsvRow {
    pub run_id: String,
    pub algorithm: String,
    pub formulation: String,
    pub instance_class: String,
    pub n: usize,
    pub regime: String,
    pub r: f64,
    pub t: u64,
    pub nu: usize,
    pub alpha: f64,
    pub change_index: Option<usize>,
    pub p_star: Option<u64>,
    pub e_i: Option<f64>,
    #[serde(rename = "E")]
    pub total_error: f64,
    pub seed_schedule: Option<u64>,
    pub seed_algorithm: Option<u64>,
    #[serde(rename = "sd_E")]
    pub sd_e: Option<f64>,
}

impl CsvRow {
    pub fn is_summary(&self) -> bool {
        self.run_id == SUMMARY_RUN_ID
    }
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<CsvRow>> {
    let mut rdr = csv::Reader::from_reader(input);
    let rows = rdr
        .deserialize()
        .collect::<std::result::Result<Vec<CsvRow>, _>>()?;
    Ok(rows)
}

pub fn load_results(path: impl AsRef<Path>) -> Result<Vec<CsvRow>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file)
}

/// Recomputes summaries from the detail rows of one or more results tables.
pub fn summarize_rows(rows: &[CsvRow]) -> Vec<Summary> {
    let mut seen: Vec<(&str, f64)> = Vec::new();
    let mut cells = Vec::new();
    for row in rows.iter().filter(|r| !r.is_summary()) {
        if seen.contains(&(row.run_id.as_str(), row.alpha)) {
            continue;
        }
        seen.push((&row.run_id, row.alpha));
        let key = Summary {
            algorithm: row.algorithm.clone(),
            formulation: row.formulation.clone(),
            instance_class: row.instance_class.clone(),
            n: row.n,
            regime: row.regime.clone(),
            r: row.r,
            t: row.t,
            nu: row.nu,
            alpha: row.alpha,
            runs: 0,
            mean_e: 0.0,
            sd_e: 0.0,
        };
        cells.push((key, row.total_error));
    }
    summarise(cells)
}

/// Writes the tidy plotting table `algorithm, formulation, alpha, mean_E, sd_E, runs`.
pub fn write_plot<W: Write>(summaries: &[Summary], out: W) -> Result<()> {
    if summaries.is_empty() {
        return Err(Error::invalid("no results to export"));
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "algorithm",
        "formulation",
        "alpha",
        "mean_E",
        "sd_E",
        "runs",
    ])?;
    for s in summaries {
        w.write_record([
            s.algorithm.clone(),
            s.formulation.clone(),
            s.alpha.to_string(),
            fixed(s.mean_e),
            fixed(s.sd_e),
            s.runs.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

pub fn plot_export(summaries: &[Summary], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = create(path)?;
    write_plot(summaries, &mut out)?;
    out.flush().map_err(|e| Error::io(path, e))
}
