//! The `certify`, `simulate` and `uniformity` commands.
//!
//! Each command runs the analysis entries of its kind, in parallel, and
//! writes one report per entry named `<index>_<op>` in the output directory.
//! Results are reduced in entry order, so files do not depend on scheduling.

use std::path::{Path, PathBuf};

use anyhow::{bail, Result};
use pelab_core::linalg::norm2;
use pelab_core::ode::{self, Trajectory};
use pelab_core::pe::{
    certificate_map, classical_pe_certificate, mornar_scalar_pe, pointwise_pe_scan, power_certificate,
    udpe_certificate, window_starts, AnnulusGrid, AnnulusSampling, MapOptions, MapOutcome, MornarOptions, ScanOptions,
};
use pelab_core::probe::{self, uniformity_jobs, uniformity_report, SettlingRun, UniformityOptions, UniformityReport};
use pelab_core::{Interval, QuadratureSpec};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::build;
use crate::config::{Analysis, ExperimentConfig};
use crate::output::{self, write_atomic, write_json};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// At least one certificate op produced a counterexample.
    Counterexample,
}

#[derive(Debug, Clone)]
pub struct Settings {
    pub out: PathBuf,
    pub quiet: bool,
}

impl Settings {
    fn note(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }
}

/// Outcome of one certificate entry.
#[derive(Debug, Clone, Serialize)]
pub struct CertifyEntry {
    pub index: usize,
    pub op: &'static str,
    pub certified: bool,
    pub value: f64,
    pub report: Value,
}

fn quad(step: Option<f64>, window: f64) -> Result<QuadratureSpec> {
    Ok(match step {
        Some(h) => QuadratureSpec::simpson(h)?,
        None => QuadratureSpec::default_for(window),
    })
}

fn certify_one(cfg: &ExperimentConfig, index: usize, a: &Analysis) -> Result<CertifyEntry> {
    let (outcome, extra) = match a {
        Analysis::ClassicalPe {
            signal,
            window,
            t_lo,
            t_hi,
            count,
            quad_step,
        } => {
            let s = build::signal(cfg, signal)?;
            let out = classical_pe_certificate(&s, *window, &quad(*quad_step, *window)?, &window_starts(*t_lo, *t_hi, *count))?;
            (out, Value::Null)
        }
        Analysis::Udpe {
            function,
            delta,
            big_delta,
            window,
            t_lo,
            t_hi,
            count,
            power,
            quad_step,
        } => {
            let f = build::function(cfg, function)?;
            let grid = AnnulusGrid::sampled(
                f.partition().clone(),
                *delta,
                *big_delta,
                AnnulusSampling::default(),
                window_starts(*t_lo, *t_hi, *count),
            )?;
            let out = udpe_certificate(&f, &grid, *window, &quad(*quad_step, *window)?)?;
            let extra = match (power, out.certificate()) {
                (Some(p), Some(c)) => serde_json::to_value(power_certificate(c, *p)?)?,
                _ => Value::Null,
            };
            (out, extra)
        }
        Analysis::PointwiseScan {
            function,
            x,
            max_window,
            first_window,
            t_lo,
            t_hi,
            quad_step,
        } => {
            let f = build::function(cfg, function)?;
            let opts = ScanOptions::new(*max_window, Interval::new(*t_lo, *t_hi)?).with_first_window(*first_window);
            (pointwise_pe_scan(&f, x, &opts, &quad(*quad_step, *first_window)?)?, Value::Null)
        }
        Analysis::CertificateMap {
            function,
            big_delta,
            deltas,
            first_window,
            max_window,
            t_samples,
            quad_step,
        } => {
            let f = build::function(cfg, function)?;
            let opts = MapOptions {
                sampling: AnnulusSampling::default(),
                t_samples: t_samples.clone(),
                first_window: *first_window,
                max_window: *max_window,
            };
            let report = match certificate_map(&f, *big_delta, deltas, &opts, &quad(*quad_step, *first_window)?)? {
                MapOutcome::Map(m) => json!({ "outcome": "map", "map": m }),
                MapOutcome::NotUdpe { delta, counterexample } => {
                    json!({ "outcome": "not_udpe", "delta": delta, "counterexample": counterexample })
                }
            };
            let certified = report["outcome"] == "map";
            let value = if certified { report["map"]["gamma"][0].as_f64().unwrap_or(0.0) } else { 0.0 };
            return Ok(CertifyEntry {
                index,
                op: a.op(),
                certified,
                value,
                report,
            });
        }
        Analysis::Mornar {
            signal,
            directions,
            t0_lo,
            t0_hi,
            count,
            horizon,
        } => {
            let s = build::signal(cfg, signal)?;
            let t0s = window_starts(*t0_lo, *t0_hi, *count);
            (mornar_scalar_pe(&s, directions, &t0s, *horizon, &MornarOptions::default())?, Value::Null)
        }
        Analysis::Simulate { .. } | Analysis::Uniformity { .. } => unreachable!("filtered by caller"),
    };
    let mut report = serde_json::to_value(&outcome)?;
    if !extra.is_null() {
        report["power"] = extra;
    }
    Ok(CertifyEntry {
        index,
        op: a.op(),
        certified: outcome.is_certified(),
        value: outcome.value(),
        report,
    })
}

fn entries<'a>(cfg: &'a ExperimentConfig, pick: fn(&Analysis) -> bool, what: &str) -> Result<Vec<(usize, &'a Analysis)>> {
    let v: Vec<_> = cfg.analysis.iter().enumerate().filter(|(_, a)| pick(a)).collect();
    if v.is_empty() {
        bail!("config `{}` has no {what} entries", cfg.name);
    }
    Ok(v)
}

fn save_config(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    write_atomic(&out.join("config.json"), (cfg.to_json() + "\n").as_bytes())
}

pub fn certify(cfg: &ExperimentConfig, s: &Settings) -> Result<(Status, Vec<CertifyEntry>)> {
    let todo = entries(cfg, Analysis::is_certificate, "certificate")?;
    let results: Vec<CertifyEntry> = todo
        .par_iter()
        .map(|(i, a)| certify_one(cfg, *i, a))
        .collect::<Result<_>>()?;
    save_config(cfg, &s.out)?;
    for r in &results {
        write_json(&s.out.join(format!("{:02}_{}.json", r.index, r.op)), &r.report)?;
        s.note(format!(
            "{:02} {:<16} {} (value {:.6e})",
            r.index,
            r.op,
            if r.certified { "certified" } else { "counterexample" },
            r.value
        ));
    }
    let status = if results.iter().all(|r| r.certified) { Status::Ok } else { Status::Counterexample };
    Ok((status, results))
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub t0: f64,
    pub x0: Vec<f64>,
    pub final_time: f64,
    pub final_state: Vec<f64>,
    pub final_norm: f64,
    pub max_norm: f64,
    pub escaped: bool,
    pub csv: String,
}

pub struct Simulation {
    pub index: usize,
    pub runs: Vec<RunSummary>,
    pub trajectories: Vec<Trajectory>,
}

pub fn simulate(cfg: &ExperimentConfig, s: &Settings) -> Result<Vec<Simulation>> {
    let sys = build::system(cfg)?;
    let todo = entries(cfg, |a| matches!(a, Analysis::Simulate { .. }), "simulate")?;
    save_config(cfg, &s.out)?;
    let mut sims = Vec::new();
    for (index, a) in todo {
        let Analysis::Simulate {
            t0s,
            x0s,
            horizon,
            step,
            plot,
        } = a
        else {
            unreachable!()
        };
        let jobs: Vec<(f64, &Vec<f64>)> = t0s.iter().flat_map(|&t0| x0s.iter().map(move |x| (t0, x))).collect();
        let trajs: Vec<Trajectory> = jobs
            .par_iter()
            .map(|&(t0, x0)| ode::integrate(&sys, t0, x0, t0 + horizon, *step))
            .collect::<pelab_core::Result<_>>()?;
        let mut runs = Vec::new();
        for (k, ((t0, x0), tr)) in jobs.iter().zip(&trajs).enumerate() {
            let name = format!("{index:02}_traj_{k:03}.csv");
            write_atomic(&s.out.join(&name), &output::trajectory_csv(tr)?)?;
            runs.push(RunSummary {
                t0: *t0,
                x0: x0.to_vec(),
                final_time: tr.final_time(),
                final_state: tr.final_state().to_vec(),
                final_norm: norm2(tr.final_state()),
                max_norm: tr.norms().map(|(_, n)| n).fold(0.0, f64::max),
                escaped: tr.escaped(),
                csv: name,
            });
        }
        if *plot {
            let labelled: Vec<(String, &Trajectory)> = jobs
                .iter()
                .zip(&trajs)
                .map(|((t0, x0), tr)| (format!("t0={t0} x0={x0:?}"), tr))
                .collect();
            let svg = output::norm_plot_svg(&format!("{}: |x(t)|", sys.label()), &labelled);
            write_atomic(&s.out.join(format!("{index:02}_norms.svg")), svg.as_bytes())?;
        }
        write_json(
            &s.out.join(format!("{index:02}_simulate.json")),
            &json!({ "system": sys.label(), "step": step, "runs": runs }),
        )?;
        for r in &runs {
            s.note(format!(
                "{index:02} t0={} final |x|={:.3e}{}",
                r.t0,
                r.final_norm,
                if r.escaped { " (escaped)" } else { "" }
            ));
        }
        sims.push(Simulation {
            index,
            runs,
            trajectories: trajs,
        });
    }
    Ok(sims)
}

/// Settling-time probe with the runs spread over the thread pool.
pub fn uniformity_parallel(sys: &pelab_core::OdeSystem, opts: &UniformityOptions) -> Result<UniformityReport> {
    let runs: Vec<SettlingRun> = uniformity_jobs(opts)
        .into_par_iter()
        .map(|(t0, direction, x0)| {
            let (settling, final_norm, escaped) = probe::settle_one(sys, t0, &x0, opts.horizon, opts.step, opts.sigma)?;
            Ok(SettlingRun {
                t0,
                direction,
                settling,
                final_norm,
                escaped,
            })
        })
        .collect::<pelab_core::Result<_>>()?;
    Ok(uniformity_report(opts, runs))
}

pub fn uniformity(cfg: &ExperimentConfig, s: &Settings) -> Result<Vec<UniformityReport>> {
    let sys = build::system(cfg)?;
    let todo = entries(cfg, |a| matches!(a, Analysis::Uniformity { .. }), "uniformity")?;
    save_config(cfg, &s.out)?;
    let mut reports = Vec::new();
    for (index, a) in todo {
        let Analysis::Uniformity {
            r,
            sigma,
            t0s,
            directions,
            horizon,
            step,
        } = a
        else {
            unreachable!()
        };
        let dirs = build::directions(directions, sys.dim(), cfg.seed);
        let opts = UniformityOptions::new(*r, *sigma, t0s.clone(), dirs, *horizon, *step);
        probe::check_uniformity(&sys, &opts)?;
        let rep = uniformity_parallel(&sys, &opts)?;
        write_json(&s.out.join(format!("{index:02}_uniformity.json")), &rep)?;
        write_atomic(&s.out.join(format!("{index:02}_settling.csv")), &output::settling_csv(&rep.runs)?)?;
        s.note(format!(
            "{index:02} verdict {:?}: settling {:?}, dispersion {:.3}, trend {:.3}",
            rep.verdict, rep.settling, rep.dispersion, rep.trend
        ));
        reports.push(rep);
    }
    Ok(reports)
}
