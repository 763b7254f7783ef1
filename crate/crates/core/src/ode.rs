//! Fixed-step classical Runge–Kutta integration of `ẋ = F(t, x)`.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{contract, Error, Result};
use crate::linalg::{max_norm, norm2};
use crate::signal::{Interval, Partition, StateFunction};

type RhsFn = dyn Fn(f64, &[f64], &mut [f64]) + Send + Sync;

/// A time-varying vector field.
#[derive(Clone)]
pub struct OdeSystem {
    rhs: Arc<RhsFn>,
    dim: usize,
    label: String,
    params: BTreeMap<String, f64>,
}

impl fmt::Debug for OdeSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OdeSystem")
            .field("label", &self.label)
            .field("dim", &self.dim)
            .field("params", &self.params)
            .finish()
    }
}

impl OdeSystem {
    /// `rhs(t, x, out)` writes `ẋ` into `out`.
    pub fn new<F>(dim: usize, label: impl Into<String>, rhs: F) -> Self
    where
        F: Fn(f64, &[f64], &mut [f64]) + Send + Sync + 'static,
    {
        Self {
            rhs: Arc::new(rhs),
            dim,
            label: label.into(),
            params: BTreeMap::new(),
        }
    }

    pub fn with_param(mut self, key: impl Into<String>, value: f64) -> Self {
        self.params.insert(key.into(), value);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    #[inline]
    pub fn rhs_into(&self, t: f64, x: &[f64], out: &mut [f64]) {
        (self.rhs)(t, x, out)
    }

    pub fn rhs(&self, t: f64, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        (self.rhs)(t, x, &mut out);
        out
    }

    /// The vector field as a state function, uδ-PE candidate w.r.t. the whole state.
    pub fn vector_field(&self, domain_t: Interval) -> StateFunction {
        let sys = self.clone();
        StateFunction::new(
            self.dim,
            self.dim,
            Partition::full(self.dim),
            domain_t,
            self.label.clone() + " vector field",
            move |t, x, out| sys.rhs_into(t, x, out),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrajectoryFlags {
    pub finite: bool,
    pub escaped: bool,
}

/// Dense solution samples on the integration grid.
///
/// States and their time derivatives are stored row-major (`dim` values per
/// node); the derivatives feed the cubic Hermite interpolant in [`sample`].
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    dim: usize,
    step: f64,
    times: Vec<f64>,
    states: Vec<f64>,
    derivs: Vec<f64>,
    flags: TrajectoryFlags,
}

impl Trajectory {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn t0(&self) -> f64 {
        self.times[0]
    }

    pub fn x0(&self) -> &[f64] {
        self.state(0)
    }

    pub fn flags(&self) -> TrajectoryFlags {
        self.flags
    }

    pub fn escaped(&self) -> bool {
        self.flags.escaped
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn time(&self, i: usize) -> f64 {
        self.times[i]
    }

    pub fn state(&self, i: usize) -> &[f64] {
        &self.states[i * self.dim..(i + 1) * self.dim]
    }

    pub fn deriv(&self, i: usize) -> &[f64] {
        &self.derivs[i * self.dim..(i + 1) * self.dim]
    }

    pub fn final_time(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    pub fn final_state(&self) -> &[f64] {
        self.state(self.len() - 1)
    }

    /// `(tᵢ, ‖x(tᵢ)‖)` for every node.
    pub fn norms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        (0..self.len()).map(move |i| (self.times[i], norm2(self.state(i))))
    }

    pub fn span(&self) -> Interval {
        Interval {
            lo: self.t0(),
            hi: self.final_time(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrateOptions {
    /// Integration stops once `‖x‖` exceeds this radius.
    pub escape_radius: f64,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self { escape_radius: 1e6 }
    }
}

/// RK4 from `(t0, x0)` to `t_end` with the default escape radius.
pub fn integrate(sys: &OdeSystem, t0: f64, x0: &[f64], t_end: f64, step: f64) -> Result<Trajectory> {
    integrate_with(sys, t0, x0, t_end, step, IntegrateOptions::default())
}

pub fn integrate_with(
    sys: &OdeSystem,
    t0: f64,
    x0: &[f64],
    t_end: f64,
    step: f64,
    opts: IntegrateOptions,
) -> Result<Trajectory> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(contract("integration step must be positive"));
    }
    if !(t_end > t0) || !t0.is_finite() || !t_end.is_finite() {
        return Err(contract("integration needs finite t_end > t0"));
    }
    let n = sys.dim;
    if x0.len() != n {
        return Err(Error::Dimension {
            expected: n,
            found: x0.len(),
        });
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(contract("initial state must be finite"));
    }

    let span = t_end - t0;
    let full = libm::floor(span / step * (1.0 + 1e-12)) as usize;
    let remainder = span - full as f64 * step;
    let partial = remainder > 1e-9 * step;
    let total = full + usize::from(partial);

    let mut times = Vec::with_capacity(total + 1);
    let mut states = Vec::with_capacity((total + 1) * n);
    let mut derivs = Vec::with_capacity((total + 1) * n);
    let mut flags = TrajectoryFlags {
        finite: true,
        escaped: false,
    };

    let mut x = x0.to_vec();
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut tmp = vec![0.0; n];

    sys.rhs_into(t0, &x, &mut k1);
    times.push(t0);
    states.extend_from_slice(&x);
    derivs.extend_from_slice(&k1);
    if k1.iter().any(|v| !v.is_finite()) {
        flags.finite = false;
        flags.escaped = true;
        return Ok(Trajectory {
            dim: n,
            step,
            times,
            states,
            derivs,
            flags,
        });
    }

    for k in 0..total {
        let t = t0 + k as f64 * step;
        let (t_next, h) = if k + 1 == total && partial {
            (t_end, t_end - t)
        } else if k + 1 == total {
            (t_end, step)
        } else {
            (t0 + (k + 1) as f64 * step, step)
        };
        // k1 holds F(t, x) from the previous node.
        for i in 0..n {
            tmp[i] = x[i] + 0.5 * h * k1[i];
        }
        sys.rhs_into(t + 0.5 * h, &tmp, &mut k2);
        for i in 0..n {
            tmp[i] = x[i] + 0.5 * h * k2[i];
        }
        sys.rhs_into(t + 0.5 * h, &tmp, &mut k3);
        for i in 0..n {
            tmp[i] = x[i] + h * k3[i];
        }
        sys.rhs_into(t + h, &tmp, &mut k4);
        for i in 0..n {
            tmp[i] = x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let finite = tmp.iter().all(|v| v.is_finite());
        if !finite || norm2(&tmp) > opts.escape_radius {
            flags.finite = flags.finite && finite;
            flags.escaped = true;
            break;
        }
        sys.rhs_into(t_next, &tmp, &mut k1);
        if k1.iter().any(|v| !v.is_finite()) {
            flags.finite = false;
            flags.escaped = true;
            break;
        }
        core::mem::swap(&mut x, &mut tmp);
        times.push(t_next);
        states.extend_from_slice(&x);
        derivs.extend_from_slice(&k1);
    }

    Ok(Trajectory {
        dim: n,
        step,
        times,
        states,
        derivs,
        flags,
    })
}

/// Cubic Hermite interpolation between stored nodes; exact at nodes.
pub fn sample(traj: &Trajectory, t: f64) -> Result<Vec<f64>> {
    let mut out = vec![0.0; traj.dim];
    sample_into(traj, t, &mut out)?;
    Ok(out)
}

pub fn sample_into(traj: &Trajectory, t: f64, out: &mut [f64]) -> Result<()> {
    let lo = traj.t0();
    let hi = traj.final_time();
    if !(t >= lo && t <= hi) {
        return Err(Error::Domain {
            lo: t,
            hi: t,
            domain_lo: lo,
            domain_hi: hi,
        });
    }
    let k = match traj.times.binary_search_by(|p| p.total_cmp(&t)) {
        Ok(k) => {
            out.copy_from_slice(traj.state(k));
            return Ok(());
        }
        Err(k) => k - 1,
    };
    let (ta, tb) = (traj.times[k], traj.times[k + 1]);
    let h = tb - ta;
    let s = (t - ta) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    let (xa, xb) = (traj.state(k), traj.state(k + 1));
    let (fa, fb) = (traj.deriv(k), traj.deriv(k + 1));
    for i in 0..traj.dim {
        out[i] = h00 * xa[i] + h10 * h * fa[i] + h01 * xb[i] + h11 * h * fb[i];
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RichardsonEstimate {
    /// Estimated global endpoint error of the run at `step`; `+∞` when either run escaped.
    pub estimate: f64,
    pub converged: bool,
}

/// Compares endpoints at `step` and `step / 2`; the max-norm difference
/// divided by 15 estimates the error of the finer run (RK4 is order 4).
pub fn richardson_check(sys: &OdeSystem, t0: f64, x0: &[f64], t_end: f64, step: f64) -> Result<RichardsonEstimate> {
    let coarse = integrate(sys, t0, x0, t_end, step)?;
    let fine = integrate(sys, t0, x0, t_end, 0.5 * step)?;
    if coarse.escaped() || fine.escaped() {
        return Ok(RichardsonEstimate {
            estimate: f64::INFINITY,
            converged: false,
        });
    }
    let diff: Vec<f64> = coarse
        .final_state()
        .iter()
        .zip(fine.final_state())
        .map(|(a, b)| a - b)
        .collect();
    Ok(RichardsonEstimate {
        estimate: max_norm(&diff) / 15.0,
        converged: true,
    })
}

/// Small reference systems shared by tests, probes and the bundled experiments.
pub mod reference {
    use super::*;

    /// `ẋ = −a x` (componentwise, dimension `n`).
    pub fn linear_decay(n: usize, a: f64) -> OdeSystem {
        OdeSystem::new(n, "linear_decay", move |_, x, out| {
            for (o, v) in out.iter_mut().zip(x) {
                *o = -a * v;
            }
        })
        .with_param("a", a)
    }

    /// `ẋ = −x / (1 + t)`, defined for `t > −1`.
    pub fn inverse_time_decay(n: usize) -> OdeSystem {
        OdeSystem::new(n, "inverse_time_decay", |t, x, out| {
            let g = 1.0 / (1.0 + t);
            for (o, v) in out.iter_mut().zip(x) {
                *o = -g * v;
            }
        })
    }

    /// `ẋ₁ = −x₂, ẋ₂ = x₁`.
    pub fn rotation() -> OdeSystem {
        OdeSystem::new(2, "rotation", |_, x, out| {
            out[0] = -x[1];
            out[1] = x[0];
        })
    }

    pub fn zero(n: usize) -> OdeSystem {
        OdeSystem::new(n, "zero", |_, _, out| out.iter_mut().for_each(|o| *o = 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::reference::*;
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn exponential_decay_matches_closed_form() {
        let tr = integrate(&linear_decay(1, 1.0), 0.0, &[1.0], 1.0, 1e-3).unwrap();
        assert_eq!(tr.final_time(), 1.0);
        assert!((tr.final_state()[0] - libm::exp(-1.0)).abs() < 1e-9);
    }

    #[test]
    fn zero_field_gives_constant_trajectory() {
        let tr = integrate(&zero(3), 2.0, &[1.0, -2.0, 0.5], 4.0, 0.1).unwrap();
        for i in 0..tr.len() {
            assert_eq!(tr.state(i), &[1.0, -2.0, 0.5]);
        }
    }

    #[test]
    fn rotation_returns_and_conserves_norm() {
        let tr = integrate(&rotation(), 0.0, &[1.0, 0.0], 2.0 * PI, 1e-3).unwrap();
        let end = tr.final_state();
        assert!((end[0] - 1.0).abs() < 1e-8 && end[1].abs() < 1e-8);
        for (_, n) in tr.norms() {
            assert!((n - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn final_partial_step_lands_on_t_end() {
        let tr = integrate(&linear_decay(1, 1.0), 0.0, &[1.0], 1.05, 0.1).unwrap();
        assert_eq!(tr.final_time(), 1.05);
        assert_eq!(tr.len(), 12);
        assert!((tr.final_state()[0] - libm::exp(-1.05)).abs() < 1e-6);
    }

    #[test]
    fn sample_is_exact_at_nodes_and_accurate_between() {
        let tr = integrate(&rotation(), 0.0, &[1.0, 0.0], 4.0, 1e-2).unwrap();
        assert_eq!(sample(&tr, 0.0).unwrap(), vec![1.0, 0.0]);
        assert_eq!(sample(&tr, tr.time(37)).unwrap(), tr.state(37).to_vec());
        let mid = sample(&tr, PI / 2.0).unwrap();
        assert!(mid[0].abs() < 1e-6 && (mid[1] - 1.0).abs() < 1e-6, "{mid:?}");
        assert!(sample(&tr, 4.5).is_err());
    }

    #[test]
    fn escape_truncates_trajectory() {
        let blowup = OdeSystem::new(1, "blowup", |_, x, out| out[0] = x[0] * x[0]);
        let tr = integrate(&blowup, 0.0, &[1.0], 2.0, 1e-3).unwrap();
        assert!(tr.escaped());
        assert!(tr.final_time() < 1.1);
        assert!(tr.final_state()[0] <= 1e6);
        let est = richardson_check(&blowup, 0.0, &[1.0], 2.0, 1e-3).unwrap();
        assert!(!est.converged && est.estimate.is_infinite());
    }

    #[test]
    fn richardson_on_smooth_linear_problem() {
        let sys = linear_decay(1, 1.0);
        let e1 = richardson_check(&sys, 0.0, &[1.0], 1.0, 1e-2).unwrap().estimate;
        let e2 = richardson_check(&sys, 0.0, &[1.0], 1.0, 5e-3).unwrap().estimate;
        assert!(e1 < 1e-10);
        let ratio = e1 / e2;
        assert!(ratio > 12.0 && ratio < 20.0, "ratio {ratio}");
    }

    #[test]
    fn invalid_arguments_are_rejected() {
        let sys = linear_decay(2, 1.0);
        assert!(integrate(&sys, 0.0, &[1.0], 1.0, 0.1).is_err());
        assert!(integrate(&sys, 0.0, &[1.0, 0.0], 0.0, 0.1).is_err());
        assert!(integrate(&sys, 0.0, &[1.0, 0.0], 1.0, -0.1).is_err());
    }
}
