//! Empirical stability probes.
//!
//! Settling times and their dependence on the initial time, stability
//! envelopes, exponential tail fits, the contingency of "uniform" against
//! "excited" verdicts, and the auxiliary-function inequality evaluated along
//! trajectories.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{contract, Result};
use crate::linalg::norm2;
use crate::ode::{self, OdeSystem, Trajectory};
use crate::pe::{self, AnnulusGrid, CertificateMap, LinearEnvelope, MapOptions, MapOutcome, MornarOptions, PeOutcome};
use crate::signal::{QuadratureSpec, StateFunction};
use crate::stats;

/// Smallest `T` with `‖x(t)‖ ≤ σ` for every stored `t ≥ t₀ + T`; `+∞` when
/// the last sample is still outside, or the run escaped.
pub fn settling_time(traj: &Trajectory, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(contract("sigma must be positive"));
    }
    if traj.escaped() {
        return Ok(f64::INFINITY);
    }
    let n = traj.len();
    let last_out = (0..n).rev().find(|&i| norm2(traj.state(i)) > sigma);
    Ok(match last_out {
        None => 0.0,
        Some(i) if i + 1 == n => f64::INFINITY,
        Some(i) => traj.time(i + 1) - traj.t0(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Verdict {
    Uniform,
    NonUniform,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniformityOptions {
    pub r: f64,
    pub sigma: f64,
    pub t0_grid: Vec<f64>,
    /// Unit directions; initial states are `r · direction`.
    pub directions: Vec<Vec<f64>>,
    pub horizon: f64,
    pub step: f64,
    pub dispersion_threshold: f64,
    /// Minimum Spearman correlation between `t₀` and settling time.
    pub trend_threshold: f64,
}

impl UniformityOptions {
    pub fn new(r: f64, sigma: f64, t0_grid: Vec<f64>, directions: Vec<Vec<f64>>, horizon: f64, step: f64) -> Self {
        Self {
            r,
            sigma,
            t0_grid,
            directions,
            horizon,
            step,
            dispersion_threshold: 0.5,
            trend_threshold: 0.8,
        }
    }
}

/// One simulated run of the probe.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SettlingRun {
    pub t0: f64,
    pub direction: usize,
    pub settling: f64,
    pub final_norm: f64,
    pub escaped: bool,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct UniformityReport {
    pub r: f64,
    pub sigma: f64,
    pub horizon: f64,
    pub t0_grid: Vec<f64>,
    /// Worst settling time over directions, per `t₀` (`+∞` if unsettled).
    pub settling: Vec<f64>,
    pub runs: Vec<SettlingRun>,
    /// `(max − min)/median` with unsettled runs counted at the horizon.
    pub dispersion: f64,
    /// Spearman correlation of settling time against `t₀`.
    pub trend: f64,
    /// Settling grows with `t₀`.
    pub growing: bool,
    pub verdict: Verdict,
}

fn check_directions(dirs: &[Vec<f64>], dim: usize) -> Result<()> {
    if dirs.is_empty() {
        return Err(contract("need at least one direction"));
    }
    for d in dirs {
        if d.len() != dim || (norm2(d) - 1.0).abs() > 1e-9 {
            return Err(contract("directions must be unit vectors of the state dimension"));
        }
    }
    Ok(())
}

/// Simulates one run of the probe.
pub fn settle_one(sys: &OdeSystem, t0: f64, x0: &[f64], horizon: f64, step: f64, sigma: f64) -> Result<(f64, f64, bool)> {
    let tr = ode::integrate(sys, t0, x0, t0 + horizon, step)?;
    let fin = if tr.escaped() { f64::INFINITY } else { norm2(tr.final_state()) };
    Ok((settling_time(&tr, sigma)?, fin, tr.escaped()))
}

/// All `(t₀, direction)` jobs of a probe, in report order.
pub fn uniformity_jobs(opts: &UniformityOptions) -> Vec<(f64, usize, Vec<f64>)> {
    let mut jobs = Vec::new();
    for &t0 in &opts.t0_grid {
        for (k, d) in opts.directions.iter().enumerate() {
            jobs.push((t0, k, d.iter().map(|v| v * opts.r).collect()));
        }
    }
    jobs
}

/// Reduces finished runs (in [`uniformity_jobs`] order) to a report.
pub fn uniformity_report(opts: &UniformityOptions, runs: Vec<SettlingRun>) -> UniformityReport {
    let nd = opts.directions.len();
    let settling: Vec<f64> = runs
        .chunks(nd)
        .map(|c| c.iter().map(|r| r.settling).fold(0.0, f64::max))
        .collect();
    let censored: Vec<f64> = settling.iter().map(|s| s.min(opts.horizon)).collect();
    let lo = censored.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = censored.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let med = stats::median(&censored);
    let dispersion = if med > 0.0 {
        (hi - lo) / med
    } else if hi > lo {
        f64::INFINITY
    } else {
        0.0
    };
    let trend = stats::spearman(&opts.t0_grid, &censored);

    // Compare the settling at the earliest and latest initial times.
    let order = {
        let mut o: Vec<usize> = (0..settling.len()).collect();
        o.sort_by(|&a, &b| opts.t0_grid[a].total_cmp(&opts.t0_grid[b]));
        o
    };
    let growing = settling.len() >= 2
        && trend >= opts.trend_threshold
        && censored[order[order.len() - 1]] > censored[order[0]];
    let any_settled = settling.iter().any(|s| s.is_finite());
    let all_settled = settling.iter().all(|s| s.is_finite());

    let verdict = if !any_settled {
        Verdict::Inconclusive
    } else if dispersion > opts.dispersion_threshold && growing {
        Verdict::NonUniform
    } else if !all_settled {
        Verdict::Inconclusive
    } else if dispersion <= opts.dispersion_threshold {
        Verdict::Uniform
    } else {
        Verdict::Inconclusive
    };
    UniformityReport {
        r: opts.r,
        sigma: opts.sigma,
        horizon: opts.horizon,
        t0_grid: opts.t0_grid.clone(),
        settling,
        runs,
        dispersion,
        trend,
        growing,
        verdict,
    }
}

/// Worst-direction settling time per `t₀` and a verdict on its
/// dependence on `t₀`.
///
/// `non_uniform` needs both a dispersion above the threshold and settling
/// times that increase with `t₀`. Runs that never settle count at the
/// horizon in the statistics.
pub fn uniformity_probe(sys: &OdeSystem, opts: &UniformityOptions) -> Result<UniformityReport> {
    check_uniformity(sys, opts)?;
    let mut runs = Vec::new();
    for (t0, k, x0) in uniformity_jobs(opts) {
        let (settling, final_norm, escaped) = settle_one(sys, t0, &x0, opts.horizon, opts.step, opts.sigma)?;
        runs.push(SettlingRun {
            t0,
            direction: k,
            settling,
            final_norm,
            escaped,
        });
    }
    Ok(uniformity_report(opts, runs))
}

pub fn check_uniformity(sys: &OdeSystem, opts: &UniformityOptions) -> Result<()> {
    check_directions(&opts.directions, sys.dim())?;
    if opts.t0_grid.is_empty() || !(opts.r > 0.0) || !(opts.sigma > 0.0) || !(opts.horizon > 0.0) {
        return Err(contract("uniformity probe needs t0 values and positive r, sigma, horizon"));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct UgsReport {
    pub radii: Vec<f64>,
    /// Largest `‖x(t)‖` seen from initial states of norm `r`.
    pub observed: Vec<f64>,
    /// Least nondecreasing envelope above `observed`.
    pub envelope: Vec<f64>,
    /// `(r, t₀, direction)` of a run that escaped.
    pub violation: Option<(f64, f64, usize)>,
}

/// Stability envelope `γ̂(r) ≥ sup ‖x(t, t₀, x₀)‖` over `‖x₀‖ = r`.
pub fn ugs_probe(
    sys: &OdeSystem,
    radii: &[f64],
    t0_grid: &[f64],
    directions: &[Vec<f64>],
    horizon: f64,
    step: f64,
) -> Result<UgsReport> {
    check_directions(directions, sys.dim())?;
    if radii.windows(2).any(|w| w[0] >= w[1]) {
        return Err(contract("radii must be increasing"));
    }
    let mut observed = Vec::with_capacity(radii.len());
    let mut violation = None;
    for &r in radii {
        let mut sup = 0.0f64;
        for &t0 in t0_grid {
            for (k, d) in directions.iter().enumerate() {
                let x0: Vec<f64> = d.iter().map(|v| v * r).collect();
                let tr = ode::integrate(sys, t0, &x0, t0 + horizon, step)?;
                if tr.escaped() {
                    sup = f64::INFINITY;
                    violation.get_or_insert((r, t0, k));
                }
                sup = tr.norms().map(|(_, n)| n).fold(sup, f64::max);
            }
        }
        observed.push(sup);
    }
    let mut envelope = observed.clone();
    for i in 1..envelope.len() {
        envelope[i] = envelope[i].max(envelope[i - 1]);
    }
    Ok(UgsReport {
        radii: radii.to_vec(),
        observed,
        envelope,
        violation,
    })
}

/// `‖x(t)‖ ≤ γ₁‖x₀‖e^{−γ₂(t − t₀)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ExpFit {
    pub gamma1: f64,
    pub gamma2: f64,
    /// Largest absolute residual of the log-linear tail fits.
    pub residual: f64,
    pub r: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "reason", rename_all = "snake_case"))]
pub enum FitFailure {
    /// The tail does not decay (slope interval reaches zero).
    NotDecaying { t0: f64, slope: f64 },
    /// The two halves of the tail decay at different rates.
    NonExponential { t0: f64, early: f64, late: f64 },
    /// Too few samples above the noise floor.
    TooShort { t0: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Fraction of the horizon, counted from the end, used as the tail.
    pub tail_fraction: f64,
    /// Samples below `floor · r` are ignored.
    pub floor: f64,
    /// Allowed relative difference between early and late tail slopes.
    pub consistency: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            tail_fraction: 0.5,
            floor: 1e-12,
            consistency: 0.2,
        }
    }
}

fn log_tail(tr: &Trajectory, from: f64, floor: f64) -> (Vec<f64>, Vec<f64>) {
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    let thin = (tr.len() / 4000).max(1);
    for i in (0..tr.len()).step_by(thin) {
        let t = tr.time(i);
        let n = norm2(tr.state(i));
        if t >= from && n > floor {
            xs.push(t - tr.t0());
            ys.push(libm::log(n));
        }
    }
    (xs, ys)
}

/// Exponential envelope fitted to log-norm tails; see [`FitFailure`] for
/// the ways it can fail.
pub fn ules_fit(
    sys: &OdeSystem,
    r: f64,
    t0_grid: &[f64],
    directions: &[Vec<f64>],
    horizon: f64,
    step: f64,
    opts: &FitOptions,
) -> Result<core::result::Result<ExpFit, FitFailure>> {
    check_directions(directions, sys.dim())?;
    let mut trajs = Vec::new();
    let mut gamma2 = f64::INFINITY;
    let mut residual = 0.0f64;
    for &t0 in t0_grid {
        for d in directions {
            let x0: Vec<f64> = d.iter().map(|v| v * r).collect();
            let tr = ode::integrate(sys, t0, &x0, t0 + horizon, step)?;
            let from = t0 + horizon * (1.0 - opts.tail_fraction);
            let (xs, ys) = log_tail(&tr, from, opts.floor * r);
            let Some(fit) = stats::fit_line(&xs, &ys).filter(|_| xs.len() >= 8) else {
                return Ok(Err(FitFailure::TooShort { t0 }));
            };
            if fit.slope + 3.0 * fit.slope_se >= 0.0 {
                return Ok(Err(FitFailure::NotDecaying { t0, slope: fit.slope }));
            }
            let h = xs.len() / 2;
            let early = stats::fit_line(&xs[..h], &ys[..h]).map_or(fit.slope, |f| f.slope);
            let late = stats::fit_line(&xs[h..], &ys[h..]).map_or(fit.slope, |f| f.slope);
            if (early - late).abs() > opts.consistency * fit.slope.abs() {
                return Ok(Err(FitFailure::NonExponential { t0, early, late }));
            }
            gamma2 = gamma2.min(-fit.slope);
            residual = residual.max(fit.max_residual);
            trajs.push(tr);
        }
    }
    let mut gamma1 = 0.0f64;
    for tr in &trajs {
        let n0 = norm2(tr.x0());
        for (t, n) in tr.norms() {
            gamma1 = gamma1.max(n / (n0 * libm::exp(-gamma2 * (t - tr.t0()))));
        }
    }
    Ok(Ok(ExpFit {
        gamma1,
        gamma2,
        residual,
        r,
    }))
}

/// Cell of the verdict × excitation table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Cell {
    pub verdict: Verdict,
    pub excited: bool,
}

impl PartialOrd for Verdict {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Verdict {
    fn cmp(&self, other: &Self) -> core::cmp::Ordering {
        (*self as u8).cmp(&(*other as u8))
    }
}

/// Excitation verdict of a vector field on an annulus grid, combining the
/// window certificate with the running-integral test at every grid state.
#[derive(Debug, Clone, PartialEq)]
pub struct ExcitationVerdict {
    pub udpe: PeOutcome,
    /// First grid state whose running integral grows sublinearly.
    pub sublinear: Option<(Vec<f64>, LinearEnvelope)>,
}

impl ExcitationVerdict {
    pub fn excited(&self) -> bool {
        self.udpe.is_certified() && self.sublinear.is_none()
    }
}

/// Running-integral test settings for the necessity experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ArtsteinOptions {
    pub t0_grid: Vec<f64>,
    pub horizon: f64,
    pub mornar: MornarOptions,
}

pub fn excitation_verdict(
    f: &StateFunction,
    grid: &AnnulusGrid,
    window: f64,
    q: &QuadratureSpec,
    artstein: Option<&ArtsteinOptions>,
) -> Result<ExcitationVerdict> {
    let udpe = pe::udpe_certificate(f, grid, window, q)?;
    let mut sublinear = None;
    if let Some(a) = artstein {
        for x in grid.states() {
            let env = pe::artstein_check(f, &x, &a.t0_grid, a.horizon, &a.mornar)?;
            if env.a <= pe::MU_FLOOR {
                sublinear = Some((x, env));
                break;
            }
        }
    }
    Ok(ExcitationVerdict { udpe, sublinear })
}

#[derive(Debug, Clone, PartialEq)]
pub struct NecessityReport {
    pub verdict: Verdict,
    pub excitation: ExcitationVerdict,
    pub cell: Cell,
    /// Uniform yet not excited: contradicts necessity, so the grids are too
    /// coarse or the probe horizon too short.
    pub inconsistent: bool,
}

/// Cross-tabulates a uniformity verdict against the excitation of the
/// vector field `F`.
pub fn necessity_experiment(
    verdict: Verdict,
    f: &StateFunction,
    grid: &AnnulusGrid,
    window: f64,
    q: &QuadratureSpec,
    artstein: Option<&ArtsteinOptions>,
) -> Result<NecessityReport> {
    let excitation = excitation_verdict(f, grid, window, q, artstein)?;
    let cell = Cell {
        verdict,
        excited: excitation.excited(),
    };
    Ok(NecessityReport {
        verdict,
        inconsistent: verdict == Verdict::Uniform && !cell.excited,
        excitation,
        cell,
    })
}

/// Counts per cell, rows `uniform / non_uniform / inconclusive`, columns
/// `excited / not excited`.
pub fn contingency(cells: &[Cell]) -> [[usize; 2]; 3] {
    let mut t = [[0; 2]; 3];
    for c in cells {
        t[c.verdict as usize][usize::from(!c.excited)] += 1;
    }
    t
}

/// Horizon cap of [`vj_plus_1`]; `e^{−60}` is below double precision noise.
pub const H_MAX: f64 = 60.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VjValue {
    pub value: f64,
    pub horizon: f64,
    /// `M e^{−H}`.
    pub truncation: f64,
}

/// `−∫_t^{t+H} e^{t−τ} ‖φ₁(τ, x)‖ dτ`, widening `H` (up to [`H_MAX`]) until
/// the tail bound `M e^{−H}` is below `tol`.
pub fn vj_plus_1(
    phi1: &StateFunction,
    t: f64,
    x: &[f64],
    horizon: f64,
    bound: f64,
    tol: f64,
    q: &QuadratureSpec,
) -> Result<VjValue> {
    if !(horizon > 0.0) || !(bound >= 0.0) {
        return Err(contract("need a positive horizon and a nonnegative bound"));
    }
    let mut h = horizon.min(H_MAX);
    while bound * libm::exp(-h) > tol && h < H_MAX {
        h = (2.0 * h).min(H_MAX);
    }
    h = h.min(phi1.domain_t().hi - t);
    if !(h > 0.0) {
        return Err(contract("window start at or beyond the end of the domain"));
    }
    phi1.eval(t, x)?;
    let mut buf = vec![0.0; phi1.m()];
    let integral = q.integrate(t, t + h, |tau| {
        phi1.eval_into(tau, x, &mut buf);
        let v = norm2(&buf);
        if v.is_finite() {
            Ok(libm::exp(t - tau) * v)
        } else {
            Err(crate::Error::Evaluation { t: tau, x: x.to_vec() })
        }
    })?;
    Ok(VjValue {
        value: -integral,
        horizon: h,
        truncation: bound * libm::exp(-h),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LegoOptions {
    /// Centered difference half-width; must be below the trajectory step.
    pub fd_step: f64,
    pub sample_times: Vec<f64>,
    pub horizon: f64,
    /// Bound `M` on `‖φ₁‖` for the truncation estimate.
    pub bound: f64,
    pub tol: f64,
    pub k_delta: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LegoReport {
    /// `max_t [V̇ − RHS]`.
    pub max_violation: f64,
    pub at_t: f64,
    /// `(t, V̇, RHS)` per sample.
    pub samples: Vec<(f64, f64, f64)>,
}

/// `Y_a(x₂) = max{−‖x₂‖, −e^{−θ(‖x₂‖)} γ(‖x₂‖)}`.
pub fn y_a(map: &CertificateMap, x2_norm: f64) -> f64 {
    (-x2_norm).max(-map.envelope(x2_norm))
}

/// Evaluates `V̇_{j+1} ≤ |φ₁| + Y_a(x₂) + K ρ(x₁, φ₁)` along a trajectory.
///
/// `φ₁` carries the partition: its designated part plays the role of `x₂`.
/// `V̇` is a centered difference of [`vj_plus_1`] along the trajectory.
pub fn lego_check<R>(
    phi1: &StateFunction,
    traj: &Trajectory,
    map: &CertificateMap,
    rho: R,
    opts: &LegoOptions,
    q: &QuadratureSpec,
) -> Result<LegoReport>
where
    R: Fn(&[f64], &[f64]) -> f64,
{
    let h = opts.fd_step;
    if !(h > 0.0) || h >= traj.step() {
        return Err(contract("finite-difference step must be below the trajectory step"));
    }
    let span = traj.span();
    let part = phi1.partition().clone();
    let mut samples = Vec::with_capacity(opts.sample_times.len());
    let (mut worst, mut at_t) = (f64::NEG_INFINITY, f64::NAN);
    for &t in &opts.sample_times {
        if !(span.contains(t - h) && span.contains(t + h)) {
            return Err(contract("sample time too close to the trajectory ends"));
        }
        let v = |s: f64| -> Result<f64> {
            let x = ode::sample(traj, s)?;
            Ok(vj_plus_1(phi1, s, &x, opts.horizon, opts.bound, opts.tol, q)?.value)
        };
        let vdot = (v(t + h)? - v(t - h)?) / (2.0 * h);
        let x = ode::sample(traj, t)?;
        let p = phi1.eval(t, &x)?;
        let rhs = norm2(&p) + y_a(map, norm2(&part.x1(&x))) + opts.k_delta * rho(&part.x2(&x), &p);
        let gap = vdot - rhs;
        if gap > worst {
            worst = gap;
            at_t = t;
        }
        samples.push((t, vdot, rhs));
    }
    Ok(LegoReport {
        max_violation: worst,
        at_t,
        samples,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum LegoOutcome {
    Checked(LegoReport),
    /// `φ₁` is not excited on the requested grid, so `θ`, `γ` do not exist.
    HypothesisUnmet { delta: f64, counterexample: pe::Counterexample },
}

/// Builds the certificate map of `φ₁` first, then runs [`lego_check`].
pub fn lego_check_auto<R>(
    phi1: &StateFunction,
    traj: &Trajectory,
    big_delta: f64,
    delta_grid: &[f64],
    map_opts: &MapOptions,
    rho: R,
    opts: &LegoOptions,
    q: &QuadratureSpec,
) -> Result<LegoOutcome>
where
    R: Fn(&[f64], &[f64]) -> f64,
{
    match pe::certificate_map(phi1, big_delta, delta_grid, map_opts, q)? {
        MapOutcome::Map(m) => lego_check(phi1, traj, &m, rho, opts, q).map(LegoOutcome::Checked),
        MapOutcome::NotUdpe { delta, counterexample } => Ok(LegoOutcome::HypothesisUnmet { delta, counterexample }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ode::reference;
    use crate::signal::{Interval, Partition};

    #[test]
    fn settling_cases() {
        let tr = ode::integrate(&reference::linear_decay(1, 1.0), 0.0, &[1.0], 3.0, 1e-3).unwrap();
        let t = settling_time(&tr, libm::exp(-1.0)).unwrap();
        assert!((t - 1.0).abs() <= 1e-3 + 1e-12, "{t}");
        let tr = ode::integrate(&reference::zero(2), 0.0, &[0.0, 0.0], 1.0, 0.1).unwrap();
        assert_eq!(settling_time(&tr, 0.1).unwrap(), 0.0);
        let tr = ode::integrate(&reference::rotation(), 0.0, &[1.0, 0.0], 10.0, 1e-2).unwrap();
        assert_eq!(settling_time(&tr, 0.5).unwrap(), f64::INFINITY);
        assert!(settling_time(&tr, 0.0).is_err());
    }

    #[test]
    fn uniformity_verdicts() {
        let opts = UniformityOptions::new(1.0, 0.1, vec![0.0, 10.0, 50.0], vec![vec![1.0], vec![-1.0]], 500.0, 1e-2);
        let rep = uniformity_probe(&reference::inverse_time_decay(1), &opts).unwrap();
        for (s, t0) in rep.settling.iter().zip(&rep.t0_grid) {
            let oracle = 9.0 * (1.0 + t0);
            assert!((s - oracle).abs() < 0.02 * oracle, "{s} vs {oracle}");
        }
        assert_eq!(rep.verdict, Verdict::NonUniform);

        let opts = UniformityOptions::new(1.0, 0.1, vec![0.0, 10.0, 50.0], vec![vec![1.0]], 20.0, 1e-2);
        let rep = uniformity_probe(&reference::linear_decay(1, 1.0), &opts).unwrap();
        assert_eq!(rep.verdict, Verdict::Uniform);
        assert!(rep.dispersion < 1e-9);

        let short = UniformityOptions::new(1.0, 0.1, vec![0.0, 10.0], vec![vec![1.0]], 1.0, 1e-2);
        let rep = uniformity_probe(&reference::linear_decay(1, 1.0), &short).unwrap();
        assert_eq!(rep.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn ugs_envelopes() {
        let dirs = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let rep = ugs_probe(&reference::rotation(), &[0.5, 1.0, 2.0], &[0.0, 3.0], &dirs, 7.0, 1e-2).unwrap();
        for (r, g) in rep.radii.iter().zip(&rep.envelope) {
            assert!((g - r).abs() < 1e-8);
        }
        let rep = ugs_probe(&reference::linear_decay(2, 1.0), &[1.0, 2.0], &[0.0], &dirs, 5.0, 1e-2).unwrap();
        assert_eq!(rep.envelope, vec![1.0, 2.0]);
        assert!(rep.violation.is_none());
    }

    #[test]
    fn exponential_fits() {
        let dirs = vec![vec![1.0]];
        let fit = ules_fit(&reference::linear_decay(1, 2.0), 1.0, &[0.0, 5.0], &dirs, 10.0, 1e-3, &FitOptions::default())
            .unwrap()
            .unwrap();
        assert!((fit.gamma2 - 2.0).abs() < 0.01);
        assert!(fit.gamma1 >= 1.0 && fit.gamma1 <= 1.1);
        let fail = ules_fit(&reference::inverse_time_decay(1), 1.0, &[0.0], &dirs, 200.0, 1e-2, &FitOptions::default()).unwrap();
        assert!(fail.is_err(), "{fail:?}");
    }

    #[test]
    fn vj_values() {
        let q = QuadratureSpec::simpson(1e-3).unwrap();
        let c = StateFunction::scalar(1, Partition::full(1), Interval::unbounded(), "c", |_, _| 2.0);
        let v = vj_plus_1(&c, 0.0, &[1.0], 5.0, 2.0, 1e-12, &q).unwrap();
        assert!((v.value + 2.0 * (1.0 - libm::exp(-v.horizon))).abs() < 1e-7);
        assert!(v.horizon > 27.0 && v.horizon <= H_MAX);
        let z = StateFunction::scalar(1, Partition::full(1), Interval::unbounded(), "z", |_, _| 0.0);
        assert_eq!(vj_plus_1(&z, 0.0, &[1.0], 5.0, 0.0, 1e-9, &q).unwrap().value, 0.0);
    }

    #[test]
    fn contingency_counts() {
        let cells = [
            Cell { verdict: Verdict::Uniform, excited: true },
            Cell { verdict: Verdict::NonUniform, excited: false },
            Cell { verdict: Verdict::Inconclusive, excited: true },
            Cell { verdict: Verdict::NonUniform, excited: false },
        ];
        assert_eq!(contingency(&cells), [[1, 0], [0, 2], [1, 0]]);
    }

    #[test]
    fn lego_fd_step_contract_and_origin() {
        let q = QuadratureSpec::default_for(1.0);
        let phi = StateFunction::scalar(1, Partition::full(1), Interval::unbounded(), "x", |t, x| libm::sin(t) * x[0]);
        let tr = ode::integrate(&reference::zero(1), 0.0, &[0.0], 5.0, 1e-2).unwrap();
        let map = CertificateMap::regularize(1.0, vec![0.5, 1.0], vec![4.0, 4.0], vec![0.5, 1.0]).unwrap();
        let mut opts = LegoOptions {
            fd_step: 1e-2,
            sample_times: vec![1.0, 2.0],
            horizon: 20.0,
            bound: 1.0,
            tol: 1e-9,
            k_delta: 1.0,
        };
        assert!(lego_check(&phi, &tr, &map, |_, _| 0.0, &opts, &q).is_err());
        opts.fd_step = 5e-3;
        let rep = lego_check(&phi, &tr, &map, |_, _| 0.0, &opts, &q).unwrap();
        assert_eq!(rep.max_violation, 0.0);
    }
}
