//! Parameter sweeps over `m` and the perturbation amplitude.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::pipeline::{run_pipeline, PipelineError, Stage};
use crate::scenario::{Poly, Scenario};
use crate::verify::VerifyReport;

#[derive(Debug, Clone)]
pub struct SweepCell {
    pub m: f64,
    pub scale: f64,
    pub dir: PathBuf,
    /// The report, or the error that stopped the cell.
    pub outcome: Result<VerifyReport, String>,
}

impl SweepCell {
    pub fn passed(&self, strict: bool) -> bool {
        matches!(&self.outcome, Ok(r) if r.passed(strict))
    }
}

/// Template with `m` replaced and `a1`, `v1`, `r1` scaled by `scale`.
pub fn cell_scenario(template: &Scenario, m: f64, scale: f64) -> Scenario {
    let mut s = template.clone();
    s.flow.m = m;
    let p = &mut s.perturbation;
    for poly in [&mut p.a1, &mut p.v1, &mut p.r1] {
        *poly = Poly(poly.0.iter().map(|c| c * scale).collect());
    }
    s
}

/// One full verify run per `(m, scale)` cell, in parallel, each in its own
/// subdirectory of `out`. Cell failures are recorded and the sweep goes on.
pub fn sweep(template: &Scenario, ms: &[f64], scales: &[f64], out: &Path) -> Result<Vec<SweepCell>, PipelineError> {
    if ms.is_empty() {
        return Err(PipelineError::Usage("sweep needs at least one m value".into()));
    }
    let scales = if scales.is_empty() { &[1.0][..] } else { scales };
    let cells: Vec<(f64, f64)> = ms
        .iter()
        .flat_map(|&m| scales.iter().map(move |&sc| (m, sc)))
        .collect();
    Ok(cells
        .into_par_iter()
        .map(|(m, scale)| {
            let dir = out.join(format!("m{m}_s{scale}"));
            let s = cell_scenario(template, m, scale);
            let outcome = match run_pipeline(&s, &Stage::Verify.through(), &dir) {
                Ok(sum) => match (sum.failure, sum.artifacts.report) {
                    (Some(msg), _) => Err(msg),
                    (None, Some(r)) => Ok(r),
                    (None, None) => Err("no report produced".into()),
                },
                Err(e) => Err(e.to_string()),
            };
            SweepCell { m, scale, dir, outcome }
        })
        .collect())
}

/// `m, scale, status, failing_checks` per cell.
pub fn sweep_table(cells: &[SweepCell], strict: bool) -> String {
    let mut s = String::from("m,scale,status,failing\n");
    for c in cells {
        let (status, failing) = match &c.outcome {
            Ok(r) => {
                let names: Vec<&str> = r.failures(strict).iter().map(|c| c.check_name.as_str()).collect();
                (if names.is_empty() { "pass" } else { "fail" }, names.join(";"))
            }
            Err(e) => ("error", e.replace(',', ";").replace('\n', " ")),
        };
        s.push_str(&format!("{},{},{},{}\n", c.m, c.scale, status, failing));
    }
    s
}
