//! Experiment dispatch and artifact persistence for the `bolab` binary.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{parse_config, Params, RunConfig, Subcommand};
use crate::error::{Error, Result};
use crate::experiments::estimates::run_estimates;
use crate::experiments::illposed::growth_fit;
use crate::experiments::refinement::{duhamel_refinement, gauge_refinement};
use crate::experiments::scaling::{scaling_invariance_check, ScalingSpec};
use crate::experiments::{Check, ExperimentReport, Point};
use crate::norms::{audit_csv, failing_ids, minimal_k_for_n9, norm_family_audit};
use crate::solver::evolve;
use crate::spectral::io::field_to_csv;
use crate::spectral::sign_convention;

/// Exit status of a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
    Error,
}

impl Outcome {
    pub fn code(self) -> i32 {
        match self {
            Outcome::Pass => 0,
            Outcome::Fail => 1,
            Outcome::Error => 2,
        }
    }
}

#[derive(Serialize)]
struct FailureRecord<'a> {
    subcommand: &'a str,
    error: String,
    sign_convention: String,
}

/// Loads `config`, applies the overrides, runs and writes artifacts under the output directory.
pub fn run_from_file(cmd: Subcommand, config: &Path, out: Option<PathBuf>, seed: Option<u64>) -> (Outcome, PathBuf) {
    let fallback = out.clone().unwrap_or_else(|| PathBuf::from("out").join(cmd.name()));
    let parsed = fs::read_to_string(config).map_err(Error::from).and_then(|text| parse_config(&text, cmd));
    let mut cfg = match parsed {
        Ok(c) => c,
        Err(e) => return (write_failure(cmd, &fallback, &e), fallback),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let dir = out.or_else(|| cfg.out.clone().map(PathBuf::from)).unwrap_or(fallback);
    (run(&cfg, &dir), dir)
}

/// Executes a validated configuration; artifacts go to `dir`.
pub fn run(cfg: &RunConfig, dir: &Path) -> Outcome {
    match execute(cfg, dir) {
        Ok(report) => {
            if let Err(e) = report.write_to(dir) {
                return write_failure(cfg.subcommand, dir, &e);
            }
            if report.passed() {
                Outcome::Pass
            } else {
                Outcome::Fail
            }
        }
        Err(e) => write_failure(cfg.subcommand, dir, &e),
    }
}

fn write_failure(cmd: Subcommand, dir: &Path, e: &Error) -> Outcome {
    let record = FailureRecord { subcommand: cmd.name(), error: e.to_string(), sign_convention: sign_convention() };
    let _ = fs::create_dir_all(dir)
        .and_then(|_| fs::write(dir.join("failure.json"), serde_json::to_string_pretty(&record).expect("serializable")));
    eprintln!("{cmd}: error: {e}");
    Outcome::Error
}

fn execute(cfg: &RunConfig, dir: &Path) -> Result<ExperimentReport> {
    let mut report = match &cfg.params {
        Params::Simulate(p) => {
            let grid = p.grid.build()?;
            let u0 = p.initial.build(&grid)?;
            let solver_cfg = p.solver_config(&grid)?;
            let traj = evolve(&u0, &solver_cfg)?;
            fs::create_dir_all(dir)?;
            fs::write(dir.join("ledger.csv"), traj.ledger_csv())?;
            let last = traj.field.slices().last().expect("nonempty trajectory");
            fs::write(dir.join("final_field.csv"), field_to_csv(last))?;
            let mut report = match p.duhamel_spec(&grid)? {
                Some(spec) => duhamel_refinement(&u0, &spec)?,
                None => ExperimentReport::new("simulate", p),
            };
            report.id = "simulate".into();
            report.params = serde_json::to_value(p)?;
            let (mass, l2) = traj.conservation_drift();
            for r in &traj.ledger {
                report.points.push(Point::new("ledger", r.t, r.l2).with("mass", r.mass).with("linf", r.linf));
            }
            report.check(Check::at_most("mass_drift", mass, p.max_mass_drift));
            report.notes.push(format!("relative L2 drift {l2:e}"));
            report
        }
        Params::GaugeResidual(p) => {
            let grid = p.grid.build()?;
            let mut r = gauge_refinement(&p.initial.build(&grid)?, &p.spec())?;
            r.params = serde_json::to_value(p)?;
            r
        }
        Params::Illposed(p) => {
            let (mut report, _) = growth_fit(&p.spec(p.theta))?;
            if let Some(theta2) = p.theta_compare {
                let (other, _) = growth_fit(&p.spec(theta2))?;
                let (s1, s2) = (report.slope.expect("fit"), other.slope.expect("fit"));
                let observed = s2 - s1;
                let predicted = -1.5 * (theta2 - p.theta);
                for c in &other.checks {
                    report.check(Check { name: format!("theta{theta2}_{}", c.name), ..c.clone() });
                }
                for pt in &other.points {
                    report.points.push(Point { label: format!("theta{theta2}_{}", pt.label), ..pt.clone() });
                }
                report.check(Check::within("theta_sensitivity", observed, predicted, p.sensitivity_tol));
                report.notes.push(format!("slope at theta = {theta2}: {s2:.4}"));
            }
            report.params = serde_json::to_value(p)?;
            report.id = "illposed".into();
            report
        }
        Params::Estimates(p) => run_estimates(&p.spec(cfg.seed))?,
        Params::Admissible(p) => {
            let rows = norm_family_audit(p.s, p.k, p.eps, p.delta);
            fs::create_dir_all(dir)?;
            fs::write(dir.join("audit.csv"), audit_csv(&rows))?;
            let mut report = ExperimentReport::new("admissible", p);
            for r in &rows {
                report.points.push(
                    Point::new(r.entry.id.clone(), r.triplet.p, r.triplet.alpha)
                        .with("q", r.triplet.q)
                        .with("verdict", if r.verdict { 1.0 } else { 0.0 }),
                );
                let sum = if r.triplet.q.is_nan() { f64::NAN } else { r.triplet.exponent_sum() };
                report.check(Check::new(r.entry.id.clone(), sum, "1-admissible", r.verdict));
            }
            let failing = failing_ids(&rows);
            if !failing.is_empty() {
                report.notes.push(format!("failing reductions: {}", failing.join(", ")));
            }
            report.notes.push(format!("minimal k with s_k >= 5/12: {}", minimal_k_for_n9()));
            report
        }
        Params::Scaling(p) => {
            let grid = p.grid.build()?;
            let spec = ScalingSpec {
                k: p.k,
                lambdas: p.lambdas.clone(),
                s_list: p.s_list.clone(),
                norm_tol: p.norm_tol,
                flow: p.flow_config(&grid)?,
                flow_tol: p.flow_tol,
            };
            let mut r = scaling_invariance_check(&p.initial.build(&grid)?, &spec)?;
            r.params = serde_json::to_value(p)?;
            r
        }
    };
    report.seed = Some(cfg.seed);
    Ok(report)
}
