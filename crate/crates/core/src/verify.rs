//! Named pass/fail checks over every stage of a run, and their CSV form.

use std::fmt::Write as _;
use std::io;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// Counts as a failure under `--strict`.
    Warn,
    Info,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub check_name: String,
    pub status: Status,
    pub measured: f64,
    pub threshold: f64,
}

impl Check {
    /// Passes when `measured <= threshold`.
    pub fn at_most(name: &str, measured: f64, threshold: f64) -> Self {
        Self::new(name, measured <= threshold, measured, threshold)
    }

    /// Passes when `measured >= threshold`.
    pub fn at_least(name: &str, measured: f64, threshold: f64) -> Self {
        Self::new(name, measured >= threshold, measured, threshold)
    }

    /// Passes when `measured > threshold`.
    pub fn above(name: &str, measured: f64, threshold: f64) -> Self {
        Self::new(name, measured > threshold, measured, threshold)
    }

    pub fn new(name: &str, ok: bool, measured: f64, threshold: f64) -> Self {
        Self {
            check_name: name.to_string(),
            status: if ok { Status::Pass } else { Status::Fail },
            measured,
            threshold,
        }
    }

    pub fn info(name: &str, measured: f64) -> Self {
        Self {
            check_name: name.to_string(),
            status: Status::Info,
            measured,
            threshold: f64::NAN,
        }
    }

    pub fn warn(name: &str, measured: f64, threshold: f64) -> Self {
        Self {
            check_name: name.to_string(),
            status: Status::Warn,
            measured,
            threshold,
        }
    }

    /// A check whose computation itself failed.
    pub fn failed(name: &str) -> Self {
        Self {
            check_name: name.to_string(),
            status: Status::Fail,
            measured: f64::NAN,
            threshold: f64::NAN,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn push(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn extend(&mut self, cs: impl IntoIterator<Item = Check>) {
        self.checks.extend(cs);
    }

    /// Checks that count against the run; warnings only under `strict`.
    pub fn failures(&self, strict: bool) -> Vec<&Check> {
        self.checks
            .iter()
            .filter(|c| c.status == Status::Fail || (strict && c.status == Status::Warn))
            .collect()
    }

    pub fn passed(&self, strict: bool) -> bool {
        self.failures(strict).is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.check_name == name)
    }

    pub fn write_csv<W: io::Write>(&self, w: W) -> Result<(), csv::Error> {
        let mut wr = csv::Writer::from_writer(w);
        for c in &self.checks {
            wr.serialize(c)?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("in-memory write");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    pub fn from_csv(text: &str) -> Result<Self, csv::Error> {
        let mut rd = csv::Reader::from_reader(text.as_bytes());
        let checks = rd.deserialize().collect::<Result<Vec<Check>, _>>()?;
        Ok(Self { checks })
    }

    /// One line per check followed by the overall verdict.
    pub fn summary(&self, strict: bool) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let tag = match c.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Warn => "WARN",
                Status::Info => "INFO",
            };
            let _ = writeln!(s, "{tag:4}  {:<36} measured={:<12.4e} threshold={:.4e}", c.check_name, c.measured, c.threshold);
        }
        let bad = self.failures(strict).len();
        let _ = writeln!(
            s,
            "{}: {} checks, {} failing",
            if bad == 0 { "PASS" } else { "FAIL" },
            self.checks.len(),
            bad
        );
        s
    }
}
