//! CSV output. Column sets and order are fixed; floats use the shortest
//! representation that parses back to the same value.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use rankbreak_core::{BatchResult, RegretTrace, WinMatrix};

use crate::error::{AppError, AppResult};

pub const TRACE_HEADER: [&str; 8] = [
    "instance",
    "policy",
    "sweep_param",
    "sweep_value",
    "seed",
    "t",
    "reg_top_cum",
    "reg_wtd_cum",
];

pub const AGG_HEADER: [&str; 9] = [
    "instance",
    "policy",
    "sweep_param",
    "sweep_value",
    "t",
    "mean_reg_top_cum",
    "mean_reg_wtd_cum",
    "std_reg_top_cum",
    "std_reg_wtd_cum",
];

pub const WINS_HEADER: [&str; 3] = ["row", "col", "count"];

/// Sweep coordinates of a batch; empty columns outside sweeps.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepTag {
    pub param: String,
    pub value: String,
}

impl SweepTag {
    pub fn new(param: &str, value: f64) -> Self {
        SweepTag {
            param: param.to_string(),
            value: value.to_string(),
        }
    }
}

type CsvOut = csv::Writer<BufWriter<File>>;

fn create(path: &Path, header: &[&str]) -> AppResult<CsvOut> {
    let file = File::create(path).map_err(|e| AppError::io(path, e))?;
    let mut w = csv::WriterBuilder::new().from_writer(BufWriter::new(file));
    w.write_record(header)?;
    Ok(w)
}

/// Writes `<stem>.csv` (per seed) and `<stem>_agg.csv` (across seeds).
pub struct ResultWriter {
    traces: CsvOut,
    agg: CsvOut,
    paths: (PathBuf, PathBuf),
}

impl ResultWriter {
    pub fn create(dir: &Path, stem: &str) -> AppResult<Self> {
        std::fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))?;
        let trace_path = dir.join(format!("{stem}.csv"));
        let agg_path = dir.join(format!("{stem}_agg.csv"));
        Ok(ResultWriter {
            traces: create(&trace_path, &TRACE_HEADER)?,
            agg: create(&agg_path, &AGG_HEADER)?,
            paths: (trace_path, agg_path),
        })
    }

    pub fn paths(&self) -> (&Path, &Path) {
        (&self.paths.0, &self.paths.1)
    }

    pub fn write_traces(&mut self, traces: &[RegretTrace], tag: &SweepTag) -> AppResult<()> {
        for tr in traces {
            let seed = tr.seed.to_string();
            for p in &tr.points {
                self.traces.write_record([
                    tr.instance.as_str(),
                    tr.policy.as_str(),
                    &tag.param,
                    &tag.value,
                    &seed,
                    &p.t.to_string(),
                    &p.reg_top.to_string(),
                    &p.reg_wtd.to_string(),
                ])?;
            }
        }
        Ok(())
    }

    pub fn write_aggregate(&mut self, batch: &BatchResult, tag: &SweepTag) -> AppResult<()> {
        for p in &batch.points {
            self.agg.write_record([
                batch.instance.as_str(),
                batch.policy.as_str(),
                &tag.param,
                &tag.value,
                &p.t.to_string(),
                &p.mean_top.to_string(),
                &p.mean_wtd.to_string(),
                &p.std_top.to_string(),
                &p.std_wtd.to_string(),
            ])?;
        }
        Ok(())
    }

    pub fn finish(mut self) -> AppResult<()> {
        let (tp, ap) = self.paths;
        self.traces.flush().map_err(|e| AppError::io(&tp, e))?;
        self.agg.flush().map_err(|e| AppError::io(&ap, e))?;
        Ok(())
    }
}

/// Dumps every nonzero win count as `row,col,count`, row-major.
pub fn write_win_matrix(path: &Path, wins: &WinMatrix) -> AppResult<()> {
    let mut w = create(path, &WINS_HEADER)?;
    for (i, j, c) in wins.cells() {
        if c > 0 {
            w.write_record([i.to_string(), j.to_string(), c.to_string()])?;
        }
    }
    w.flush().map_err(|e| AppError::io(path, e))
}
