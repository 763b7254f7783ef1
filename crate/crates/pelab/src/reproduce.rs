//! Bundled experiments. Each one writes its configs, the command outputs and
//! a `summary.csv` of named checks into its own directory.

use std::f64::consts::PI;
use std::path::Path;

use anyhow::{bail, Result};
use pelab_core::catalog::{self, make_pendulum_el, make_slotine_li, ControllerConfig, DesiredTrajectory};
use pelab_core::pe::{classical_pe_certificate, sphere_directions, window_starts, AnnulusGrid, AnnulusSampling, MornarOptions};
use pelab_core::probe::{contingency, necessity_experiment, ArtsteinOptions, UniformityOptions, Verdict};
use pelab_core::{Partition, QuadratureSpec};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::commands::{self, Settings};
use crate::config::{ExperimentConfig, SystemSpec};
use crate::output::{write_atomic, write_json};

pub const NAMES: [&str; 9] = [
    "eg31",
    "mornar",
    "mrac-pe",
    "mrac-nope",
    "feedforward",
    "driftless",
    "slotli-pe",
    "slotli-nope",
    "necessity",
];

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub check: String,
    pub value: String,
    pub pass: bool,
}

fn check(name: impl Into<String>, value: impl ToString, pass: bool) -> Check {
    Check {
        check: name.into(),
        value: value.to_string(),
        pass,
    }
}

pub fn run(name: &str, s: &Settings) -> Result<Vec<Check>> {
    let checks = match name {
        "eg31" => eg31(s)?,
        "mornar" => mornar(s)?,
        "mrac-pe" => mrac(s, true)?,
        "mrac-nope" => mrac(s, false)?,
        "feedforward" => feedforward(s)?,
        "driftless" => driftless(s)?,
        "slotli-pe" => slotli(s, true)?,
        "slotli-nope" => slotli(s, false)?,
        "necessity" => necessity(s)?,
        other => bail!("unknown experiment `{other}`; available: {}", NAMES.join(", ")),
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["check", "value", "status"])?;
    for c in &checks {
        w.write_record([c.check.as_str(), c.value.as_str(), if c.pass { "PASS" } else { "FAIL" }])?;
    }
    write_atomic(&s.out.join("summary.csv"), &w.into_inner()?)?;
    Ok(checks)
}

pub fn format_table(checks: &[Check]) -> String {
    let width = checks.iter().map(|c| c.check.len()).max().unwrap_or(0);
    checks
        .iter()
        .map(|c| format!("{:<width$}  {}: {}\n", c.check, c.value, if c.pass { "PASS" } else { "FAIL" }))
        .collect()
}

fn cfg(v: serde_json::Value) -> ExperimentConfig {
    serde_json::from_value(v).expect("bundled config is valid")
}

fn sub(s: &Settings, dir: &str) -> Settings {
    Settings {
        out: s.out.join(dir),
        quiet: s.quiet,
    }
}

fn eg31(s: &Settings) -> Result<Vec<Check>> {
    let c = cfg(json!({
        "name": "eg31",
        "analysis": [
            {"op": "udpe", "function": {"name": "rotating_projection"}, "delta": 1.0, "big_delta": 1.0,
             "window": 2.0 * PI, "t_lo": 0.0, "t_hi": 2.0 * PI, "count": 9},
            {"op": "udpe", "function": {"name": "coordinate", "n": 2, "k": 1, "x1": [0]}, "delta": 1.0,
             "big_delta": 1.0, "window": 2.0 * PI, "t_lo": 0.0, "t_hi": 2.0 * PI, "count": 9},
            {"op": "certificate_map", "function": {"name": "rotating_projection"}, "big_delta": 2.0,
             "deltas": [0.5, 1.0, 2.0], "first_window": 2.0 * PI, "max_window": 8.0 * PI, "t_samples": [0.0, 0.7]}
        ]
    }));
    let (_, r) = commands::certify(&c, &sub(s, "certify"))?;
    let cx = &r[1].report["x"];
    let gammas: Vec<f64> = r[2].report["map"]["gamma"]
        .as_array()
        .map(|a| a.iter().filter_map(|v| v.as_f64()).collect())
        .unwrap_or_default();
    let map_ok = gammas.len() == 3 && gammas.iter().zip([0.5, 1.0, 2.0]).all(|(g, d)| (g - 4.0 * d).abs() <= 0.05 * 4.0 * d);
    Ok(vec![
        check("psi mu within 5% of 4", format!("{:.6}", r[0].value), r[0].certified && (r[0].value - 4.0).abs() <= 0.2),
        check("x2 w.r.t. x1 counterexample at (1,0)", cx, !r[1].certified && *cx == json!([1.0, 0.0])),
        check("map gamma within 5% of 4 delta", format!("{gammas:?}"), map_ok),
    ])
}

fn mornar(s: &Settings) -> Result<Vec<Check>> {
    let c = cfg(json!({
        "name": "mornar",
        "signals": [
            {"id": "abs_sin", "signal": {"kind": "abs_sin"}},
            {"id": "inverse_time", "signal": {"kind": "inverse_time"}}
        ],
        "analysis": [
            {"op": "mornar", "signal": "abs_sin", "directions": [[1.0]], "t0_lo": 0.0, "t0_hi": 50.0, "count": 6, "horizon": 100.0},
            {"op": "mornar", "signal": "inverse_time", "directions": [[1.0]], "t0_lo": 0.0, "t0_hi": 200.0, "count": 9, "horizon": 100.0}
        ]
    }));
    let (_, r) = commands::certify(&c, &sub(s, "certify"))?;
    let oracle = 2.0 / PI;
    Ok(vec![
        check("|sin| slope a within 1% of 2/pi", format!("{:.6}", r[0].value), r[0].certified && (r[0].value - oracle).abs() <= 0.01 * oracle),
        check("1/(1+t) slope a = 0", format!("{}", r[1].value), !r[1].certified && r[1].value == 0.0),
    ])
}

fn probe_and_simulate(c: &ExperimentConfig, s: &Settings) -> Result<(pelab_core::probe::UniformityReport, commands::Simulation)> {
    let rep = commands::uniformity(c, &sub(s, "uniformity"))?.remove(0);
    let sim = commands::simulate(c, &sub(s, "simulate"))?.remove(0);
    Ok((rep, sim))
}

fn mrac(s: &Settings, pe: bool) -> Result<Vec<Check>> {
    let (sig, sigma) = if pe { ("sin", 0.1) } else { ("inverse_time", 0.9) };
    let c = cfg(json!({
        "name": if pe { "mrac-pe" } else { "mrac-nope" },
        "system": {"name": "gradient_adaptive", "params": {"phi": "phi"}},
        "signals": [{"id": "phi", "signal": {"kind": sig}}],
        "analysis": [
            {"op": "uniformity", "sigma": sigma, "t0s": [0.0, 7.3, 40.0, 100.0], "directions": {"sphere": 4}, "horizon": 200.0},
            {"op": "simulate", "t0s": [0.0, 40.0], "x0s": [[1.0, 0.0], [0.0, 1.0]], "horizon": 200.0}
        ]
    }));
    let (rep, sim) = probe_and_simulate(&c, s)?;
    let worst = sim.runs.iter().map(|r| r.final_norm).fold(0.0, f64::max);
    Ok(if pe {
        vec![
            check("verdict uniform", format!("{:?}", rep.verdict), rep.verdict == Verdict::Uniform),
            check("settling dispersion < 0.25", format!("{:.3}", rep.dispersion), rep.dispersion < 0.25),
            check("final |x| < 1e-3", format!("{worst:.3e}"), worst < 1e-3),
        ]
    } else {
        let stuck = sim.runs.iter().map(|r| r.final_state[1].abs()).fold(f64::INFINITY, f64::min);
        vec![
            check(
                "verdict non_uniform or growing",
                format!("{:?} (trend {:.3})", rep.verdict, rep.trend),
                rep.verdict == Verdict::NonUniform || (rep.verdict == Verdict::Inconclusive && rep.growing),
            ),
            check("parameter error persists", format!("{stuck:.3e}"), stuck > 1e-2),
        ]
    })
}

fn feedforward(s: &Settings) -> Result<Vec<Check>> {
    let c = cfg(json!({
        "name": "feedforward",
        "system": {"name": "oscillator_feedforward"},
        "analysis": [
            {"op": "uniformity", "sigma": 0.1, "t0s": [0.0, 10.0, 50.0], "directions": {"sphere": 6}, "horizon": 300.0},
            {"op": "simulate", "t0s": [0.0], "x0s": [[1.0, 0.0, 0.0], [0.0, 0.0, 2.0]], "horizon": 300.0}
        ]
    }));
    let (rep, sim) = probe_and_simulate(&c, s)?;
    let bf = catalog::oscillator_feedforward()?;
    let mut w_ok = true;
    for tr in &sim.trajectories {
        let w: Vec<f64> = (0..tr.len()).map(|i| bf.w.value(tr.time(i), tr.state(i))).collect();
        w_ok &= w.windows(2).all(|p| p[1] <= p[0] + 1e-9);
    }
    let worst = sim.runs.iter().map(|r| r.final_norm).fold(0.0, f64::max);
    Ok(vec![
        check("verdict uniform", format!("{:?}", rep.verdict), rep.verdict == Verdict::Uniform),
        check("W nonincreasing", w_ok, w_ok),
        check("final |x| < 1e-3", format!("{worst:.3e}"), worst < 1e-3),
    ])
}

fn driftless(s: &Settings) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for (sig, name) in [("sin", "sin"), ("inverse_time", "inverse_time")] {
        let c = cfg(json!({
            "name": format!("driftless-{name}"),
            "system": {"name": "driftless", "params": {"g": "g"}},
            "signals": [{"id": "g", "signal": {"kind": sig}}],
            "analysis": [
                {"op": "uniformity", "sigma": 0.1, "t0s": [0.0, 10.0, 50.0], "directions": {"sphere": 4}, "horizon": 300.0},
                {"op": "simulate", "t0s": [0.0, 50.0], "x0s": [[1.0, 0.0]], "horizon": 200.0}
            ]
        }));
        let (rep, sim) = probe_and_simulate(&c, &sub(s, name))?;
        let worst = sim.runs.iter().map(|r| r.final_norm).fold(0.0, f64::max);
        if sig == "sin" {
            checks.push(check("g = sin t: verdict uniform", format!("{:?}", rep.verdict), rep.verdict == Verdict::Uniform));
            checks.push(check("g = sin t: final |x| < 1e-2", format!("{worst:.3e}"), worst < 1e-2));
        } else {
            checks.push(check(
                "g = 1/(1+t): verdict not uniform",
                format!("{:?}", rep.verdict),
                rep.verdict != Verdict::Uniform,
            ));
        }
    }
    Ok(checks)
}

fn slotli(s: &Settings, pe: bool) -> Result<Vec<Check>> {
    let traj = if pe { json!({"kind": "sinusoid", "amp": 1.0, "omega": 1.0}) } else { json!({"kind": "rest"}) };
    let c = cfg(json!({
        "name": if pe { "slotli-pe" } else { "slotli-nope" },
        "system": {"name": "slotine_li", "params": {"plant": "pendulum", "trajectory": traj}},
        "analysis": [
            {"op": "simulate", "t0s": if pe { json!([0.0, 25.0]) } else { json!([0.0]) },
             "x0s": [[0.2, 0.0, 0.5, -0.5]], "horizon": 200.0, "step": 1e-3}
        ]
    }));
    let sim = commands::simulate(&c, &sub(s, "simulate"))?.remove(0);

    let Some(SystemSpec::SlotineLi { kd, lambda, gamma, .. }) = &c.system else { unreachable!() };
    let r = if pe { DesiredTrajectory::sinusoid(1, 1.0, 1.0) } else { DesiredTrajectory::rest(1) };
    let sl = make_slotine_li(&make_pendulum_el(false), &r, &ControllerConfig::scalar(1, *kd, *lambda, *gamma))?;
    let q = QuadratureSpec::default_for(2.0 * PI);
    let reg = classical_pe_certificate(&sl.regressor, 2.0 * PI, &q, &window_starts(0.0, 200.0, 33))?;
    write_json(&s.out.join("regressor_pe.json"), &reg)?;

    let param_final = sim.runs.iter().map(|r| r.final_state[2].hypot(r.final_state[3])).fold(0.0, f64::max);
    let tracking = sim.runs.iter().map(|r| r.final_state[0].hypot(r.final_state[1])).fold(0.0, f64::max);
    let worst = sim.runs.iter().map(|r| r.final_norm).fold(0.0, f64::max);
    let theta0 = 0.5f64.hypot(0.5);
    Ok(if pe {
        vec![
            check("regressor PE", format!("mu {:.3e}", reg.value()), reg.is_certified()),
            check("param_error_final < 1e-3", format!("{param_final:.3e}"), param_final < 1e-3),
            check("final |(q~, s, theta~)| < 1e-3", format!("{worst:.3e}"), worst < 1e-3),
        ]
    } else {
        vec![
            check("regressor not PE", format!("mu {:.3e}", reg.value()), !reg.is_certified()),
            check("tracking error < 1e-4", format!("{tracking:.3e}"), tracking < 1e-4),
            check("param error >= 0.9 initial", format!("{:.4}", param_final / theta0), param_final >= 0.9 * theta0),
        ]
    })
}

#[derive(Serialize)]
struct SweepRow {
    name: &'static str,
    verdict: Verdict,
    udpe_certified: bool,
    sublinear_at: Option<Vec<f64>>,
    excited: bool,
}

fn necessity(s: &Settings) -> Result<Vec<Check>> {
    let sweep = catalog::bundled_sweep()?;
    let window = 2.0 * PI;
    let q = QuadratureSpec::default_for(window);
    let artstein = ArtsteinOptions {
        t0_grid: window_starts(0.0, 200.0, 5),
        horizon: 200.0,
        mornar: MornarOptions::default(),
    };
    let rows: Vec<SweepRow> = sweep
        .par_iter()
        .map(|e| -> Result<SweepRow> {
            let dim = e.system.dim();
            let opts = UniformityOptions::new(1.0, 0.1, vec![0.0, 10.0, 50.0], sphere_directions(dim, 4), 500.0, 1e-2);
            let verdict = commands::uniformity_parallel(&e.system, &opts)?.verdict;
            let f = e.system.vector_field(e.domain);
            let grid = AnnulusGrid::sampled(
                Partition::full(dim),
                0.5,
                1.0,
                AnnulusSampling::default(),
                window_starts(e.domain.lo, e.domain.hi - window, 9),
            )?;
            let rep = necessity_experiment(verdict, &f, &grid, window, &q, Some(&artstein))?;
            Ok(SweepRow {
                name: e.name,
                verdict,
                udpe_certified: rep.excitation.udpe.is_certified(),
                sublinear_at: rep.excitation.sublinear.map(|(x, _)| x),
                excited: rep.cell.excited,
            })
        })
        .collect::<Result<_>>()?;
    let cells: Vec<_> = rows
        .iter()
        .map(|r| pelab_core::probe::Cell {
            verdict: r.verdict,
            excited: r.excited,
        })
        .collect();
    let table = contingency(&cells);
    write_json(&s.out.join("necessity.json"), &json!({ "systems": rows, "contingency": table }))?;
    let mut checks: Vec<Check> = rows
        .iter()
        .map(|r| check(r.name, format!("{:?}, excited={}", r.verdict, r.excited), !(r.verdict == Verdict::Uniform && !r.excited)))
        .collect();
    checks.push(check("systems swept >= 6", rows.len(), rows.len() >= 6));
    checks.push(check(
        "uniform & not excited cell empty",
        format!("table {table:?}"),
        table[Verdict::Uniform as usize][1] == 0,
    ));
    Ok(checks)
}

/// Runs `name` into `root/<name>`.
pub fn reproduce(name: &str, root: &Path, quiet: bool) -> Result<Vec<Check>> {
    if !NAMES.contains(&name) {
        bail!("unknown experiment `{name}`; available: {}", NAMES.join(", "));
    }
    run(
        name,
        &Settings {
            out: root.join(name),
            quiet,
        },
    )
}
