//! Turns config specs into core objects.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use pelab_core::catalog::{
    self, make_driftless, make_gradient_adaptive, make_pendulum_el, make_slotine_li, make_two_link_el, ControllerConfig,
    DesiredTrajectory, InputMap,
};
use pelab_core::ode::reference;
use pelab_core::pe::sphere_directions;
use pelab_core::signal::builtin;
use pelab_core::{Interval, Matrix, OdeSystem, Partition, StateFunction, TimeSignal};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::config::{Directions, ExperimentConfig, FunctionSpec, PlantSpec, SignalKind, SystemSpec, TrajectorySpec};

pub fn signal(cfg: &ExperimentConfig, id: &str) -> Result<TimeSignal> {
    let spec = cfg.signal(id).ok_or_else(|| anyhow!("unknown signal id `{id}`"))?;
    Ok(match &spec.signal {
        SignalKind::SinCos { omega } => builtin::sin_cos(*omega),
        SignalKind::Sin { omega } => builtin::sin(*omega),
        SignalKind::AbsSin { omega } => builtin::abs_sin(*omega),
        SignalKind::InverseTime => builtin::inverse_time(),
        SignalKind::Constant { rows, cols, values } => builtin::constant(Matrix::from_row_major(*rows, *cols, values.clone())?),
        SignalKind::Csv { path, rows, cols } => load_csv_signal(path, *rows, *cols, id)?,
    })
}

/// Reads a tabulated signal: a header row, then `t` and `rows · cols`
/// row-major entries per line.
pub fn load_csv_signal(path: &Path, rows: usize, cols: usize, label: &str) -> Result<TimeSignal> {
    let mut rd = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let (mut times, mut samples) = (Vec::new(), Vec::new());
    for (i, rec) in rd.records().enumerate() {
        let rec = rec.with_context(|| format!("{}: record {}", path.display(), i + 1))?;
        let vals = rec
            .iter()
            .map(|f| f.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .with_context(|| format!("{}: line {}", path.display(), i + 2))?;
        if vals.len() != 1 + rows * cols {
            bail!("{}: line {} has {} fields, expected {}", path.display(), i + 2, vals.len(), 1 + rows * cols);
        }
        times.push(vals[0]);
        samples.push(vals[1..].to_vec());
    }
    Ok(TimeSignal::tabulated(times, samples, rows, cols, label)?)
}

pub fn system(cfg: &ExperimentConfig) -> Result<OdeSystem> {
    let spec = cfg.system.as_ref().ok_or_else(|| anyhow!("config has no `system`"))?;
    Ok(match spec {
        SystemSpec::LinearDecay { n, a } => reference::linear_decay(*n, *a),
        SystemSpec::InverseTimeDecay { n } => reference::inverse_time_decay(*n),
        SystemSpec::Rotation {} => reference::rotation(),
        SystemSpec::GradientAdaptive { phi, a_tilde, p } => {
            let phi = signal(cfg, phi)?;
            let (n2, n1) = (phi.rows(), phi.cols());
            let a = Matrix::diag(&vec![*a_tilde; n1]);
            let p = Matrix::diag(&vec![*p; n2]);
            make_gradient_adaptive(&phi, &a, &p)?.into_ode()
        }
        SystemSpec::Driftless { g } => make_driftless(&InputMap::from_signal(&signal(cfg, g)?), None)?.system,
        SystemSpec::OscillatorFeedforward {} => catalog::oscillator_feedforward()?.system,
        SystemSpec::SlotineLi {
            plant,
            trajectory,
            kd,
            lambda,
            gamma,
        } => {
            let plant = match plant {
                PlantSpec::Pendulum => make_pendulum_el(false),
                PlantSpec::PendulumViscous => make_pendulum_el(true),
                PlantSpec::TwoLink => make_two_link_el(),
            };
            let dof = plant.dof();
            let r = match trajectory {
                TrajectorySpec::Sinusoid { amp, omega } => DesiredTrajectory::sinusoid(dof, *amp, *omega),
                TrajectorySpec::Rest => DesiredTrajectory::rest(dof),
            };
            make_slotine_li(&plant, &r, &ControllerConfig::scalar(dof, *kd, *lambda, *gamma))?.system
        }
    })
}

pub fn function(cfg: &ExperimentConfig, spec: &FunctionSpec) -> Result<StateFunction> {
    Ok(match spec {
        FunctionSpec::RotatingProjection => builtin::rotating_projection(),
        FunctionSpec::Coordinate { n, k, x1 } => {
            if k >= n {
                bail!("coordinate index {k} out of range for dimension {n}");
            }
            builtin::coordinate(*n, *k, Partition::indices(*n, x1.clone())?)
        }
        FunctionSpec::Linear { signal: id } => signal(cfg, id)?.transpose_action(),
        FunctionSpec::VectorField { t_lo, t_hi } => system(cfg)?.vector_field(Interval::new(*t_lo, *t_hi)?),
    })
}

pub fn directions(spec: &Directions, dim: usize, seed: u64) -> Vec<Vec<f64>> {
    match spec {
        Directions::Sphere(k) => sphere_directions(dim, *k),
        Directions::List(v) => v.clone(),
        Directions::Random(k) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..*k)
                .map(|_| loop {
                    let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
                    let n = v.iter().map(|e| e * e).sum::<f64>().sqrt();
                    if n > 1e-9 {
                        break v.into_iter().map(|e| e / n).collect();
                    }
                })
                .collect()
        }
    }
}
