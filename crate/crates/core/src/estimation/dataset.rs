//! Yearly observations of susceptibles, infectives and the informed fraction.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DATASET_HEADER: [&str; 4] = ["year", "susceptible", "infected", "info_fraction"];

/// Survey size behind the informed fractions.
const SURVEY_SIZE: f64 = 1200.0;
const PERSONS_PER_MILLION: f64 = 1e6;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("line {line}, column `{column}`: cannot parse `{value}`")]
    Parse {
        line: u64,
        column: &'static str,
        value: String,
    },
    #[error("missing column `{0}`")]
    MissingColumn(&'static str),
    #[error("invalid observation: {0}")]
    Invalid(String),
}

/// Observations in millions (susceptible, infected) and fractions (info).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub susceptible_obs: Vec<(f64, f64)>,
    pub infected_obs: Vec<(f64, f64)>,
    pub info_obs: Vec<(f64, f64)>,
    /// Calendar year mapped to `t = 0`.
    pub epoch_year: f64,
}

impl Dataset {
    pub fn validate(&self) -> Result<(), DatasetError> {
        let series = [
            ("susceptible", &self.susceptible_obs),
            ("infected", &self.infected_obs),
            ("info_fraction", &self.info_obs),
        ];
        for (name, obs) in series {
            for &(year, value) in obs.iter() {
                if !(year.is_finite() && year >= self.epoch_year) {
                    return Err(DatasetError::Invalid(format!(
                        "{name} year {year} precedes epoch {}",
                        self.epoch_year
                    )));
                }
                if !(value.is_finite() && value > 0.0) {
                    return Err(DatasetError::Invalid(format!("{name} value {value} at {year} must be > 0")));
                }
                if name == "info_fraction" && value >= 1.0 {
                    return Err(DatasetError::Invalid(format!("info fraction {value} at {year} must be < 1")));
                }
            }
        }
        if self.susceptible_obs.is_empty() && self.infected_obs.is_empty() && self.info_obs.is_empty() {
            return Err(DatasetError::Invalid("no observations".into()));
        }
        Ok(())
    }

    /// Latest observation time relative to the epoch.
    pub fn max_time(&self) -> f64 {
        self.susceptible_obs
            .iter()
            .chain(&self.infected_obs)
            .chain(&self.info_obs)
            .map(|&(y, _)| y - self.epoch_year)
            .fold(0.0, f64::max)
    }

    /// All observation years in increasing order, without repeats.
    pub fn years(&self) -> Vec<f64> {
        let mut years: Vec<f64> = self
            .susceptible_obs
            .iter()
            .chain(&self.infected_obs)
            .chain(&self.info_obs)
            .map(|&(y, _)| y)
            .collect();
        years.sort_by(f64::total_cmp);
        years.dedup();
        years
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), DatasetError> {
        let lookup = |obs: &[(f64, f64)], year: f64| obs.iter().find(|o| o.0 == year).map(|o| o.1);
        let mut w = csv::Writer::from_writer(out);
        w.write_record(DATASET_HEADER)?;
        for year in self.years() {
            let cell = |v: Option<f64>| v.map(|x| format!("{x}")).unwrap_or_default();
            w.write_record([
                format!("{year}"),
                cell(lookup(&self.susceptible_obs, year).map(|v| v * PERSONS_PER_MILLION)),
                cell(lookup(&self.infected_obs, year).map(|v| v * PERSONS_PER_MILLION)),
                cell(lookup(&self.info_obs, year)),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the four-column format. Susceptible and infected counts are in
    /// persons; info cells are fractions, either decimal or `a/b`.
    pub fn read_csv<R: Read>(input: R, epoch_year: f64) -> Result<Self, DatasetError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        let headers = rdr.headers()?.clone();
        let mut pos = [0usize; 4];
        for (k, name) in DATASET_HEADER.iter().enumerate() {
            pos[k] = headers
                .iter()
                .position(|h| h == *name)
                .ok_or(DatasetError::MissingColumn(name))?;
        }
        let mut ds = Dataset {
            susceptible_obs: Vec::new(),
            infected_obs: Vec::new(),
            info_obs: Vec::new(),
            epoch_year,
        };
        for record in rdr.records() {
            let record = record?;
            let line = record.position().map_or(0, |p| p.line());
            let cell = |k: usize| record.get(pos[k]).unwrap_or("");
            if (0..4).all(|k| cell(k).is_empty()) {
                continue;
            }
            let year = parse_number(cell(0), line, DATASET_HEADER[0])?
                .ok_or_else(|| DatasetError::Parse {
                    line,
                    column: DATASET_HEADER[0],
                    value: String::new(),
                })?;
            if let Some(v) = parse_number(cell(1), line, DATASET_HEADER[1])? {
                ds.susceptible_obs.push((year, v / PERSONS_PER_MILLION));
            }
            if let Some(v) = parse_number(cell(2), line, DATASET_HEADER[2])? {
                ds.infected_obs.push((year, v / PERSONS_PER_MILLION));
            }
            if let Some(v) = parse_number(cell(3), line, DATASET_HEADER[3])? {
                ds.info_obs.push((year, v));
            }
        }
        ds.validate()?;
        Ok(ds)
    }
}

fn parse_number(s: &str, line: u64, column: &'static str) -> Result<Option<f64>, DatasetError> {
    if s.is_empty() {
        return Ok(None);
    }
    let err = || DatasetError::Parse {
        line,
        column,
        value: s.to_string(),
    };
    let value = match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| err())?;
            let b: f64 = b.trim().parse().map_err(|_| err())?;
            a / b
        }
        None => s.parse().map_err(|_| err())?,
    };
    if value.is_finite() {
        Ok(Some(value))
    } else {
        Err(err())
    }
}

/// Uganda adults 15-59, 1997-2005, with 1992 as the epoch.
pub fn builtin_uganda() -> Dataset {
    let m = |persons: f64| persons / PERSONS_PER_MILLION;
    let f = |informed: f64| informed / SURVEY_SIZE;
    Dataset {
        susceptible_obs: vec![
            (1999.0, m(6_700_000.0)),
            (2000.0, m(6_597_470.0)),
            (2001.0, m(7_130_000.0)),
            (2003.0, m(7_462_000.0)),
            (2005.0, m(7_636_000.0)),
        ],
        infected_obs: vec![
            (1999.0, m(606_000.0)),
            (2000.0, m(573_693.0)),
            (2001.0, m(383_000.0)),
            (2003.0, m(544_000.0)),
            (2005.0, m(548_261.0)),
        ],
        info_obs: vec![
            (1997.0, f(600.0)),
            (2000.0, f(700.0)),
            (2001.0, f(717.0)),
            (2005.0, f(778.0)),
        ],
        epoch_year: 1992.0,
    }
}

pub fn load_dataset(path: &Path) -> Result<Dataset, DatasetError> {
    let file = std::fs::File::open(path)?;
    Dataset::read_csv(file, builtin_uganda().epoch_year)
}
