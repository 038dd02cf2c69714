//! Stage orchestration: similarity → profile → march → reconstruct →
//! verify, with CSV artifacts and a run manifest per output directory.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::crocco_profile::{
    envelope_fit, from_similarity, solve_integral_equation, CroccoProfile, IntegralOptions,
    ProfileParams, ProfileSource,
};
use crate::grid::EtaGrid;
use crate::line_method::{
    coefficients, march, mu_star, sandwich_check, slice_residual_norm, uniqueness_probe, CroccoField, LineOptions,
    SliceDiag, SliceProblem,
};
use crate::physical::{
    chain_rule_gap, decay_check, reconstruct, residuals, similarity_gap, wall_slip, wall_transpiration_error,
    PhysicalField, PhysicalOptions,
};
use crate::scenario::{Scenario, ScenarioError};
use crate::similarity::{solve, ProfileSolution, ShootingOptions, SimilarityProblem};
use crate::verify::{Check, VerifyReport};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("{stage} stage failed: {message}")]
    Solver { stage: Stage, message: String },
    #[error("usage error: {0}")]
    Usage(String),
    #[error("i/o error on {path}: {message}")]
    Io { path: PathBuf, message: String },
}

impl PipelineError {
    /// Process exit status: 2 for invalid input, 3 for solver failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Scenario(_) | PipelineError::Usage(_) => 2,
            PipelineError::Solver { .. } | PipelineError::Io { .. } => 3,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |e| PipelineError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stage {
    Similarity,
    Profile,
    March,
    Reconstruct,
    Verify,
}

impl Stage {
    pub const ALL: [Stage; 5] = [
        Stage::Similarity,
        Stage::Profile,
        Stage::March,
        Stage::Reconstruct,
        Stage::Verify,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Similarity => "similarity",
            Stage::Profile => "profile",
            Stage::March => "march",
            Stage::Reconstruct => "reconstruct",
            Stage::Verify => "verify",
        }
    }

    /// This stage and every stage it depends on, in run order.
    pub fn through(self) -> Vec<Stage> {
        Stage::ALL.into_iter().filter(|s| *s <= self).collect()
    }
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Stage {
    type Err = PipelineError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Stage::ALL
            .into_iter()
            .find(|st| st.as_str() == s.trim())
            .ok_or_else(|| PipelineError::Usage(format!("unknown stage '{s}'")))
    }
}

/// Comma-separated stage list, closed under dependencies and sorted.
pub fn parse_stages(list: &str) -> Result<Vec<Stage>, PipelineError> {
    let mut out: Vec<Stage> = Vec::new();
    for item in list.split(',').filter(|s| !s.trim().is_empty()) {
        out.extend(item.parse::<Stage>()?.through());
    }
    if out.is_empty() {
        return Err(PipelineError::Usage("empty stage list".into()));
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// Everything computed by a run; later stages are `None` when not run.
#[derive(Debug, Clone, Default)]
pub struct Artifacts {
    pub problem: Option<SimilarityProblem>,
    pub solution: Option<ProfileSolution>,
    pub profile: Option<CroccoProfile>,
    pub field: Option<CroccoField>,
    pub physical: Option<PhysicalField>,
    pub report: Option<VerifyReport>,
}

pub fn shooting_options(s: &Scenario) -> ShootingOptions {
    let t = &s.tolerances;
    ShootingOptions {
        z_max: t.z_max,
        shoot_tol: t.shoot_tol,
        ode_tol: t.ode_tol,
        far_field_tol: t.far_field_tol,
        ..ShootingOptions::default()
    }
}

/// Similarity problem at the tip; a wall suction constant `b` becomes the
/// wall stream-function value `f0 = −b / (k a)`.
pub fn tip_problem(s: &Scenario) -> Result<SimilarityProblem, PipelineError> {
    let f = &s.flow;
    let k = f.variant.stretch(f.m);
    let f0 = -s.perturbation.b / (k * f.a);
    SimilarityProblem::with_wall(f.variant, f.m, f.a, f.nu, f0, 0.0).map_err(|e| PipelineError::Solver {
        stage: Stage::Similarity,
        message: e.to_string(),
    })
}

pub fn eta_grid(s: &Scenario) -> Result<EtaGrid, PipelineError> {
    EtaGrid::graded(s.grid.n, s.grid.grading).map_err(|e| PipelineError::Solver {
        stage: Stage::Profile,
        message: e.to_string(),
    })
}

fn solver(stage: Stage) -> impl FnOnce(String) -> PipelineError {
    move |message| PipelineError::Solver { stage, message }
}

/// Run `stages` in memory. A march that stops early keeps its partial field
/// and returns the failure next to it.
pub fn compute(s: &Scenario, stages: &[Stage]) -> (Artifacts, Option<PipelineError>) {
    let mut art = Artifacts::default();
    let err = compute_into(s, stages, &mut art).err();
    (art, err)
}

fn compute_into(s: &Scenario, stages: &[Stage], art: &mut Artifacts) -> Result<(), PipelineError> {
    s.validate()?;
    let has = |st: Stage| stages.contains(&st);
    let problem = tip_problem(s)?;
    art.problem = Some(problem);
    let sol = solve(&problem, &shooting_options(s)).map_err(|e| solver(Stage::Similarity)(e.to_string()))?;
    art.solution = Some(sol.clone());
    if !has(Stage::Profile) {
        return Ok(());
    }
    let profile = from_similarity(&sol, &problem, &eta_grid(s)?).map_err(|e| solver(Stage::Profile)(e.to_string()))?;
    art.profile = Some(profile.clone());
    if !has(Stage::March) {
        return Ok(());
    }
    let opts = LineOptions::from_tolerances(&s.tolerances);
    let outcome = march(s, &profile, &opts).map_err(|e| solver(Stage::March)(e.to_string()))?;
    art.field = Some(outcome.field.clone());
    if let Some((k, e)) = outcome.failure {
        return Err(solver(Stage::March)(format!(
            "slice {k} (xi = {}): {e}",
            k as f64 * s.grid.h
        )));
    }
    if !has(Stage::Reconstruct) {
        return Ok(());
    }
    let phys = reconstruct(s, &outcome.field, &physical_options(s))
        .map_err(|e| solver(Stage::Reconstruct)(e.to_string()))?;
    art.physical = Some(phys);
    if has(Stage::Verify) {
        art.report = Some(build_report(s, art));
    }
    Ok(())
}

pub fn physical_options(s: &Scenario) -> PhysicalOptions {
    PhysicalOptions {
        mu: s.tolerances.mu,
        ..PhysicalOptions::default()
    }
}

/// Sup deviation bound for the unperturbed march.
pub fn self_similar_threshold(s: &Scenario) -> f64 {
    1e-4 + 10.0 * s.tolerances.newton_tol
}

fn is_unperturbed(s: &Scenario) -> bool {
    let p = &s.perturbation;
    p.a1.is_zero() && p.v1.is_zero() && p.b == 0.0 && p.r1.is_zero()
}

/// Every check that the available artifacts allow.
pub fn build_report(s: &Scenario, art: &Artifacts) -> VerifyReport {
    let mut r = VerifyReport::default();
    let t = &s.tolerances;
    if let (Some(problem), Some(sol)) = (&art.problem, &art.solution) {
        r.extend(similarity_checks(problem, sol, t.far_field_tol));
    }
    if let Some(profile) = &art.profile {
        r.extend(profile_checks(s, profile));
    }
    if let (Some(field), Some(profile)) = (&art.field, &art.profile) {
        r.extend(march_checks(s, field, profile));
        match &art.physical {
            Some(phys) => r.extend(physical_checks(s, phys, art.solution.as_ref())),
            None => match reconstruct(s, field, &physical_options(s)) {
                Ok(phys) => r.extend(physical_checks(s, &phys, art.solution.as_ref())),
                Err(_) => r.push(Check::failed("physical.reconstruct")),
            },
        }
    }
    r
}

pub fn similarity_checks(problem: &SimilarityProblem, sol: &ProfileSolution, far_field_tol: f64) -> Vec<Check> {
    let min_fpp = sol.fpp.iter().cloned().fold(f64::INFINITY, f64::min);
    let min_fp = sol.fp.iter().cloned().fold(f64::INFINITY, f64::min);
    let max_fp = sol.fp.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let in_range = min_fp >= problem.f1 && max_fp < 1.0;
    vec![
        Check::above("similarity.wall_shear", sol.wall_shear, 0.0),
        Check::above("similarity.fpp_positive", min_fpp, 0.0),
        Check::new("similarity.fp_in_range", in_range, max_fp, 1.0),
        Check::at_most("similarity.far_field", 1.0 - max_fp, far_field_tol),
        Check::at_most("similarity.ode_residual", sol.rescaled_residual(problem), 1e-8),
    ]
}

pub fn profile_checks(s: &Scenario, profile: &CroccoProfile) -> Vec<Check> {
    let t = &s.tolerances;
    let n = profile.grid.intervals();
    let min_y = profile.y[..n].iter().cloned().fold(f64::INFINITY, f64::min);
    let mut out = vec![
        Check::above("profile.positivity", min_y, 0.0),
        Check::at_most("profile.robin", profile.robin_residual(), t.bc_tol),
        Check::info("profile.begin_residual", profile.begin_residual()),
    ];
    match envelope_fit(profile, t.mu) {
        Ok(env) => {
            let lo = [env.m5, env.m6, env.m7, env.m8, env.m9, env.m10]
                .into_iter()
                .fold(f64::INFINITY, f64::min);
            out.push(Check::above("profile.envelope_constants", lo, 0.0));
        }
        Err(_) => out.push(Check::failed("profile.envelope_constants")),
    }
    if profile.params.b == 0.0 && profile.source == ProfileSource::Similarity {
        let opts = IntegralOptions {
            fp_tol: t.fp_tol,
            mu: t.mu,
            ..IntegralOptions::default()
        };
        let p = &profile.params;
        match solve_integral_equation(p.variant, p.m, p.a, p.nu, &profile.grid, &opts) {
            Ok(ie) => out.push(Check::at_most("profile.route_gap", profile.sup_gap(&ie), 5e-3)),
            Err(_) => out.push(Check::failed("profile.route_gap")),
        }
    } else {
        out.push(Check::warn("profile.route_gap", f64::NAN, 5e-3));
    }
    out
}

pub fn march_checks(s: &Scenario, field: &CroccoField, profile: &CroccoProfile) -> Vec<Check> {
    let t = &s.tolerances;
    let grid = &field.grid;
    let n = grid.intervals();
    let opts = LineOptions::from_tolerances(t);
    let mut out = Vec::new();
    out.push(Check::at_least(
        "march.extent",
        field.attained_extent(),
        field.requested_extent * (1.0 - 1e-9),
    ));
    let min_omega = field
        .omega
        .iter()
        .flat_map(|w| w[..n].iter().cloned())
        .fold(f64::INFINITY, f64::min);
    out.push(Check::above("march.positivity", min_omega, 0.0));
    if !(min_omega > 0.0) {
        return out;
    }

    let mut worst_res: f64 = 0.0;
    let mut worst_robin: f64 = 0.0;
    for k in 1..field.slices() {
        let Ok(coef) = coefficients(s, field.xi[k]) else {
            out.push(Check::failed("march.residual"));
            return out;
        };
        let p = SliceProblem {
            grid,
            prev: &field.omega[k - 1],
            coef,
            nu: s.flow.nu,
            h: field.h,
            mu_k: field.mu_schedule[k],
            source: None,
            wall_source: 0.0,
        };
        worst_res = worst_res.max(slice_residual_norm(&p, &field.omega[k], 0.0));
        let r0 = crate::line_method::assemble_slice_residual(&p, &field.omega[k], 0.0)[0];
        worst_robin = worst_robin.max(r0.abs());
    }
    out.push(Check::at_most("march.residual", worst_res, t.newton_tol));
    out.push(Check::at_most("march.robin", worst_robin, t.bc_tol));
    if is_unperturbed(s) {
        out.push(Check::at_most(
            "march.self_similar_deviation",
            field.sup_deviation(&profile.y),
            self_similar_threshold(s),
        ));
    }

    let rep = sandwich_check(field, &profile.y, s.variant(), s.flow.m, t.mu);
    let x = field.attained_extent();
    out.push(Check::at_most("march.sandwich_flags", rep.flags.len() as f64, 0.0));
    out.push(Check::new(
        "march.sandwich_finite",
        rep.constants_finite(),
        rep.m13,
        f64::NAN,
    ));
    out.push(Check::at_most("march.m11_x", rep.m11 * x, 1.0));
    out.push(Check::at_most("march.m12_x", rep.m12 * x, 1.0));
    out.push(Check::above("march.m19", rep.m19, 0.0));
    if let Some((lo, hi)) = rep.m14_m15.or(rep.m16_m17) {
        out.push(Check::info("march.derivative_band_lo", lo));
        out.push(Check::info("march.derivative_band_hi", hi));
    }
    match uniqueness_probe(s, field, &opts, s.seed) {
        Ok(gap) => out.push(Check::at_most("march.uniqueness", gap, 10.0 * t.newton_tol)),
        Err(_) => out.push(Check::failed("march.uniqueness")),
    }
    out
}

pub fn physical_checks(s: &Scenario, phys: &PhysicalField, sol: Option<&ProfileSolution>) -> Vec<Check> {
    let mut out = Vec::new();
    out.push(Check::at_most("physical.wall_slip", wall_slip(phys), 0.0));
    out.push(Check::at_most(
        "physical.wall_transpiration",
        wall_transpiration_error(phys, s),
        1e-4,
    ));
    let res = residuals(phys, s);
    out.push(Check::at_most("physical.continuity", res.continuity_max, 1e-2));
    out.push(Check::at_most("physical.momentum", res.momentum_max, 1e-2));
    out.push(Check::at_most("physical.chain_rule", chain_rule_gap(phys), 0.05));
    let far = phys
        .stations
        .iter()
        .map(|st| st.u.last().unwrap() / st.u_outer)
        .fold(f64::INFINITY, f64::min);
    out.push(Check::at_least("physical.far_field", far, 0.999));
    if let (Some(sol), Some(first)) = (sol, phys.stations.first()) {
        match similarity_gap(first, s.flow.m, sol) {
            Ok(g) => out.push(Check::at_most("physical.similarity_limit", g, 0.01)),
            Err(_) => out.push(Check::failed("physical.similarity_limit")),
        }
    }
    let dec = decay_check(phys, 1e-8, 0.1, 10);
    out.push(Check::new(
        "physical.decay_negative",
        dec.all_negative(),
        dec.fits.iter().map(|f| f.slope).fold(f64::NEG_INFINITY, f64::max),
        0.0,
    ));
    out.push(Check::at_least("physical.decay_r2", dec.min_r_squared(), 0.99));
    out.push(Check::new("physical.decay_order", dec.m4 <= dec.m2 && dec.m4 > 0.0, dec.m4, dec.m2));
    out.push(Check::info("physical.decay_slope_spread", dec.slope_spread()));
    if !dec.empty_windows.is_empty() {
        out.push(Check::warn("physical.decay_windows", dec.empty_windows.len() as f64, 0.0));
    }
    out
}

/// Summary of a run written to disk.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub stages: Vec<Stage>,
    pub artifacts: Artifacts,
    pub failure: Option<String>,
    pub wall_clock: f64,
    pub out_dir: PathBuf,
}

impl RunSummary {
    pub fn attained_extent(&self) -> Option<f64> {
        self.artifacts.field.as_ref().map(|f| f.attained_extent())
    }

    /// 0 on success, 3 on a solver failure, 4 when verification fails.
    pub fn exit_code(&self, strict: bool) -> i32 {
        if self.failure.is_some() {
            return 3;
        }
        match &self.artifacts.report {
            Some(r) if !r.passed(strict) => 4,
            _ => 0,
        }
    }
}

pub fn scenario_hash(s: &Scenario) -> String {
    hex::encode(Sha256::digest(s.to_toml().as_bytes()))
}

/// Run the stages, then write every artifact that was produced, the
/// manifest, and a `FAILED` marker when a stage failed.
pub fn run_pipeline(s: &Scenario, stages: &[Stage], out: &Path) -> Result<RunSummary, PipelineError> {
    s.validate()?;
    let mut stages = stages.to_vec();
    stages.sort();
    stages.dedup();
    let start = Instant::now();
    let (art, err) = compute(s, &stages);
    let wall_clock = start.elapsed().as_secs_f64();
    if let Some(PipelineError::Scenario(e)) = err {
        return Err(e.into());
    }
    fs::create_dir_all(out).map_err(io_err(out))?;
    write_artifacts(s, &art, out)?;
    let failure = err.map(|e| e.to_string());
    let summary = RunSummary {
        stages,
        artifacts: art,
        failure,
        wall_clock,
        out_dir: out.to_path_buf(),
    };
    write_manifest(s, &summary)?;
    let marker = out.join("FAILED");
    match &summary.failure {
        Some(msg) => fs::write(&marker, format!("{msg}\n")).map_err(io_err(&marker))?,
        None if marker.exists() => fs::remove_file(&marker).map_err(io_err(&marker))?,
        None => {}
    }
    Ok(summary)
}

/// Write `body` to `path`, creating the parent directory when needed.
pub fn write_text(path: &Path, body: &str) -> Result<(), PipelineError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let mut f = fs::File::create(path).map_err(io_err(path))?;
    f.write_all(body.as_bytes()).map_err(io_err(path))
}

pub fn write_artifacts(s: &Scenario, art: &Artifacts, out: &Path) -> Result<(), PipelineError> {
    if let Some(sol) = &art.solution {
        write_text(&out.join("profile.csv"), &profile_csv(sol))?;
    }
    if let Some(p) = &art.profile {
        write_text(&out.join("crocco_profile.csv"), &crocco_profile_csv(p, s.tolerances.mu))?;
    }
    if let Some(f) = &art.field {
        write_text(&out.join("field.csv"), &field_csv(f))?;
    }
    if let Some(p) = &art.physical {
        write_text(&out.join("physical.csv"), &physical_csv(p))?;
    }
    if let Some(r) = &art.report {
        write_text(&out.join("report.csv"), &r.to_csv())?;
    }
    Ok(())
}

/// Dimensional similarity profile `F(z) = L g(z / L)`.
pub fn profile_csv(sol: &ProfileSolution) -> String {
    let l = sol.scale_length;
    let mut s = String::from("z,f,fp,fpp\n");
    for i in 0..sol.len() {
        let _ = writeln!(s, "{},{},{},{}", l * sol.z[i], l * sol.f[i], sol.fp[i], sol.fpp[i] / l);
    }
    s
}

pub fn crocco_profile_csv(p: &CroccoProfile, mu: f64) -> String {
    let env = envelope_fit(p, mu).ok();
    let mut s = String::from("eta,Y,Yp,envelope_lo,envelope_hi\n");
    for j in 0..p.len() {
        let eta = p.grid.eta[j];
        let (lo, hi) = match &env {
            Some(e) => (e.lower(eta), e.upper(eta)),
            None => (f64::NAN, f64::NAN),
        };
        let _ = writeln!(s, "{},{},{},{},{}", eta, p.y[j], p.yp[j], lo, hi);
    }
    s
}

pub fn field_csv(f: &CroccoField) -> String {
    let mut s = String::from("k,xi,eta,omega\n");
    for (k, w) in f.omega.iter().enumerate() {
        for (j, v) in w.iter().enumerate() {
            let _ = writeln!(s, "{},{},{},{}", k, f.xi[k], f.grid.eta[j], v);
        }
    }
    s
}

pub fn physical_csv(p: &PhysicalField) -> String {
    let mut s = String::from("x,y,u,v,one_minus_u_over_U\n");
    for st in &p.stations {
        for j in 0..st.y.len() {
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                st.x,
                st.y[j],
                st.u[j],
                st.v[j],
                1.0 - st.u[j] / st.u_outer
            );
        }
    }
    s
}

fn write_manifest(s: &Scenario, sum: &RunSummary) -> Result<(), PipelineError> {
    let t = &s.tolerances;
    let mut m = String::new();
    let _ = writeln!(m, "scenario_hash = {}", scenario_hash(s));
    let _ = writeln!(m, "version = {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(m, "variant = {}", s.variant().as_str());
    let _ = writeln!(m, "m = {}", s.flow.m);
    let _ = writeln!(m, "seed = {}", s.seed);
    let _ = writeln!(
        m,
        "stages = {}",
        sum.stages.iter().map(|st| st.as_str()).collect::<Vec<_>>().join(",")
    );
    for (k, v) in [
        ("shoot_tol", t.shoot_tol),
        ("ode_tol", t.ode_tol),
        ("far_field_tol", t.far_field_tol),
        ("z_max", t.z_max),
        ("fp_tol", t.fp_tol),
        ("bc_tol", t.bc_tol),
        ("newton_tol", t.newton_tol),
        ("eps0_scale", t.eps0_scale),
        ("eps_factor", t.eps_factor),
        ("eps_min", t.eps_min),
        ("mu", t.mu),
    ] {
        let _ = writeln!(m, "tolerances.{k} = {v:e}");
    }
    let ms = mu_star(s, &LineOptions::from_tolerances(t), (s.grid.x_extent / s.grid.h).round() as usize)
        .unwrap_or(f64::NAN);
    let _ = writeln!(m, "mu_star = {ms}");
    let _ = writeln!(m, "requested_extent = {}", s.grid.x_extent);
    match sum.attained_extent() {
        Some(x) => {
            let _ = writeln!(m, "attained_extent = {x}");
        }
        None => {
            let _ = writeln!(m, "attained_extent = none");
        }
    }
    let _ = writeln!(m, "wall_clock_s = {:.3}", sum.wall_clock);
    let status = match (&sum.failure, &sum.artifacts.report) {
        (Some(_), _) => "failed",
        (None, Some(r)) if !r.passed(false) => "verify_failed",
        _ => "ok",
    };
    let _ = writeln!(m, "status = {status}");
    if let Some(msg) = &sum.failure {
        let _ = writeln!(m, "failure = {}", msg.replace('\n', " "));
    }
    write_text(&sum.out_dir.join("manifest.txt"), &m)
}

/// Key-value pairs of a manifest.
pub fn read_manifest(dir: &Path) -> Result<Vec<(String, String)>, PipelineError> {
    let path = dir.join("manifest.txt");
    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
    Ok(text
        .lines()
        .filter_map(|l| l.split_once(" = "))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect())
}

fn parse_err(path: &Path, what: impl std::fmt::Display) -> PipelineError {
    PipelineError::Io {
        path: path.to_path_buf(),
        message: what.to_string(),
    }
}

fn read_rows(path: &Path, width: usize) -> Result<Vec<Vec<f64>>, PipelineError> {
    let mut rd = csv::Reader::from_path(path).map_err(|e| parse_err(path, e))?;
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(|e| parse_err(path, e))?;
        if rec.len() != width {
            return Err(parse_err(path, format!("expected {width} columns, got {}", rec.len())));
        }
        let row = rec
            .iter()
            .map(|v| v.parse::<f64>().map_err(|e| parse_err(path, format!("{v}: {e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    Ok(rows)
}

/// Tip profile from `crocco_profile.csv`.
pub fn load_profile(s: &Scenario, dir: &Path) -> Result<CroccoProfile, PipelineError> {
    let path = dir.join("crocco_profile.csv");
    let rows = read_rows(&path, 5)?;
    let grid = eta_grid(s)?;
    if rows.len() != grid.eta.len() {
        return Err(parse_err(&path, "row count does not match the scenario grid"));
    }
    let f = &s.flow;
    Ok(CroccoProfile {
        y: rows.iter().map(|r| r[1]).collect(),
        yp: rows.iter().map(|r| r[2]).collect(),
        grid,
        source: ProfileSource::Similarity,
        params: ProfileParams {
            variant: f.variant,
            m: f.m,
            a: f.a,
            nu: f.nu,
            b: s.perturbation.b,
        },
    })
}

/// Marched field from `field.csv`; slice diagnostics are left empty.
pub fn load_field(s: &Scenario, dir: &Path) -> Result<CroccoField, PipelineError> {
    let path = dir.join("field.csv");
    let rows = read_rows(&path, 4)?;
    let grid = eta_grid(s)?;
    let width = grid.eta.len();
    if rows.is_empty() || rows.len() % width != 0 {
        return Err(parse_err(&path, "row count is not a multiple of the grid size"));
    }
    let slices = rows.len() / width;
    let mut xi = Vec::with_capacity(slices);
    let mut omega = Vec::with_capacity(slices);
    for (k, chunk) in rows.chunks(width).enumerate() {
        if chunk.iter().any(|r| r[0] != k as f64) {
            return Err(parse_err(&path, format!("slice {k} is not contiguous")));
        }
        xi.push(chunk[0][1]);
        omega.push(chunk.iter().map(|r| r[3]).collect());
    }
    let opts = LineOptions::from_tolerances(&s.tolerances);
    let steps = (s.grid.x_extent / s.grid.h).round() as usize;
    let ms = mu_star(s, &opts, steps).map_err(|e| parse_err(&path, e))?;
    let mut mu_schedule = vec![ms; slices];
    mu_schedule[0] = 0.0;
    Ok(CroccoField {
        grid,
        h: s.grid.h,
        diag: (0..slices)
            .map(|k| SliceDiag {
                k,
                xi: xi[k],
                iterations: 0,
                residual: f64::NAN,
                robin_residual: f64::NAN,
                min_omega: f64::NAN,
                eps: 0.0,
                eps_path: vec![],
                stage_diffs: vec![],
                k1: f64::NAN,
                k2: f64::NAN,
            })
            .collect(),
        xi,
        omega,
        mu_schedule,
        requested_extent: s.grid.x_extent,
    })
}

/// Verify from the artifacts of an earlier run in `dir`. The similarity
/// stage is recomputed; the profile and field are read back from disk.
pub fn verify_artifacts(s: &Scenario, dir: &Path) -> Result<VerifyReport, PipelineError> {
    s.validate()?;
    let problem = tip_problem(s)?;
    let sol = solve(&problem, &shooting_options(s)).map_err(|e| solver(Stage::Similarity)(e.to_string()))?;
    let art = Artifacts {
        problem: Some(problem),
        solution: Some(sol),
        profile: Some(load_profile(s, dir)?),
        field: Some(load_field(s, dir)?),
        physical: None,
        report: None,
    };
    Ok(build_report(s, &art))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stage_lists_close_under_dependencies() {
        assert_eq!(parse_stages("march").unwrap(), vec![Stage::Similarity, Stage::Profile, Stage::March]);
        assert_eq!(parse_stages("similarity").unwrap(), vec![Stage::Similarity]);
        assert_eq!(parse_stages("profile, similarity").unwrap(), vec![Stage::Similarity, Stage::Profile]);
        assert!(parse_stages("").is_err());
        assert!(parse_stages("plot").is_err());
    }
}
