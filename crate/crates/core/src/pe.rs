//! Persistency-of-excitation certificates.
//!
//! All certificates here are *grid certificates*: the quantifiers over time
//! and state are replaced by finite deterministic samples, and a value below
//! [`MU_FLOOR`] counts as no excitation at all. Failures come back as
//! [`Counterexample`] values carrying the minimizing window and state.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{contract, Error, Result};
use crate::linalg::{min_eigenvalue, norm2};
use crate::ode::{self, OdeSystem, Trajectory};
use crate::signal::{
    window_gram, window_integral_norm, Interval, Partition, QuadratureSpec, StateFunction, TimeSignal,
};
use crate::stats;

/// Excitation levels at or below this are treated as zero.
pub const MU_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum CertificateKind {
    ClassicalGram,
    UdpeAnnulus,
    MornarScalar,
}

/// One sampled window: its start, the state it was evaluated at (if any)
/// and the excitation it achieved.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Evidence {
    pub t: f64,
    #[cfg_attr(feature = "serde", serde(skip_serializing_if = "Option::is_none", default))]
    pub x: Option<Vec<f64>>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PeCertificate {
    pub kind: CertificateKind,
    #[cfg_attr(feature = "serde", serde(rename = "T"))]
    pub window: f64,
    pub mu: f64,
    /// Span covered by the certified windows.
    pub valid_t_range: Interval,
    pub evidence: Vec<Evidence>,
    /// Extra numbers, e.g. the intercept `b` of a running-integral fit.
    pub params: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Counterexample {
    pub kind: CertificateKind,
    #[cfg_attr(feature = "serde", serde(rename = "T"))]
    pub window: f64,
    /// Best excitation found; at or below [`MU_FLOOR`].
    pub value: f64,
    pub t: f64,
    #[cfg_attr(feature = "serde", serde(skip_serializing_if = "Option::is_none", default))]
    pub x: Option<Vec<f64>>,
    pub evidence: Vec<Evidence>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "outcome", rename_all = "snake_case"))]
pub enum PeOutcome {
    Certified(PeCertificate),
    Counterexample(Counterexample),
}

impl PeOutcome {
    pub fn is_certified(&self) -> bool {
        matches!(self, PeOutcome::Certified(_))
    }

    pub fn certificate(&self) -> Option<&PeCertificate> {
        match self {
            PeOutcome::Certified(c) => Some(c),
            PeOutcome::Counterexample(_) => None,
        }
    }

    pub fn counterexample(&self) -> Option<&Counterexample> {
        match self {
            PeOutcome::Certified(_) => None,
            PeOutcome::Counterexample(c) => Some(c),
        }
    }

    /// Certified μ, or the (sub-floor) best value of the counterexample.
    pub fn value(&self) -> f64 {
        match self {
            PeOutcome::Certified(c) => c.mu,
            PeOutcome::Counterexample(c) => c.value,
        }
    }
}

fn check_window(window: f64) -> Result<()> {
    if window.is_finite() && window > 0.0 {
        Ok(())
    } else {
        Err(contract("window length must be positive and finite"))
    }
}

fn covered(starts: &[f64], window: f64) -> Interval {
    let lo = starts.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = starts.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Interval { lo, hi: hi + window }
}

/// `count` evenly spaced window starts in `[lo, hi]` (both included).
pub fn window_starts(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let h = (hi - lo) / (count - 1) as f64;
            (0..count)
                .map(|i| if i + 1 == count { hi } else { lo + i as f64 * h })
                .collect()
        }
    }
}

fn conclude(
    kind: CertificateKind,
    window: f64,
    starts: &[f64],
    evidence: Vec<Evidence>,
    worst: (f64, f64, Option<Vec<f64>>),
) -> PeOutcome {
    let (mu, t, x) = worst;
    if mu > MU_FLOOR {
        PeOutcome::Certified(PeCertificate {
            kind,
            window,
            mu,
            valid_t_range: covered(starts, window),
            evidence,
            params: BTreeMap::new(),
        })
    } else {
        PeOutcome::Counterexample(Counterexample {
            kind,
            window,
            value: mu,
            t,
            x,
            evidence,
        })
    }
}

/// Smallest eigenvalue of the windowed Gram matrix, minimized over window
/// starts.
pub fn classical_pe_certificate(
    s: &TimeSignal,
    window: f64,
    q: &QuadratureSpec,
    t_grid: &[f64],
) -> Result<PeOutcome> {
    check_window(window)?;
    if t_grid.is_empty() {
        return Err(contract("classical certificate needs at least one window start"));
    }
    let mut evidence = Vec::with_capacity(t_grid.len());
    let mut worst = (f64::INFINITY, t_grid[0], None);
    for &t in t_grid {
        let lam = min_eigenvalue(&window_gram(s, t, window, q)?)?;
        evidence.push(Evidence { t, x: None, value: lam });
        if lam < worst.0 {
            worst = (lam, t, None);
        }
    }
    Ok(conclude(CertificateKind::ClassicalGram, window, t_grid, evidence, worst))
}

/// Sample counts for [`AnnulusGrid::sampled`].
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct AnnulusSampling {
    pub x1_directions: usize,
    pub x1_radii: usize,
    pub x2_directions: usize,
    /// Radii for `x₂` in `[0, Δ]`, zero included.
    pub x2_radii: usize,
}

impl Default for AnnulusSampling {
    fn default() -> Self {
        Self {
            x1_directions: 16,
            x1_radii: 3,
            x2_directions: 8,
            x2_radii: 3,
        }
    }
}

/// Deterministic unit vectors in `ℝ^dim`.
///
/// Dimension 1 gives `±1`, dimension 2 evenly spaced angles, dimension 3 a
/// Fibonacci lattice; higher dimensions use the signed axes followed by the
/// signed diagonals `(±1, …, ±1)/√dim`, truncated to `count` (but never fewer
/// than the `2·dim` axes).
pub fn sphere_directions(dim: usize, count: usize) -> Vec<Vec<f64>> {
    use core::f64::consts::PI;
    let count = count.max(1);
    match dim {
        0 => vec![Vec::new()],
        1 => {
            if count == 1 {
                vec![vec![1.0]]
            } else {
                vec![vec![1.0], vec![-1.0]]
            }
        }
        2 => (0..count)
            .map(|k| {
                let a = 2.0 * PI * k as f64 / count as f64;
                vec![libm::cos(a), libm::sin(a)]
            })
            .collect(),
        3 => {
            let golden = PI * (3.0 - libm::sqrt(5.0));
            (0..count)
                .map(|k| {
                    let z = if count == 1 {
                        0.0
                    } else {
                        1.0 - 2.0 * (k as f64 + 0.5) / count as f64
                    };
                    let r = libm::sqrt((1.0 - z * z).max(0.0));
                    let a = golden * k as f64;
                    vec![r * libm::cos(a), r * libm::sin(a), z]
                })
                .collect()
        }
        _ => {
            let mut out = Vec::new();
            for i in 0..dim {
                for sgn in [1.0, -1.0] {
                    let mut v = vec![0.0; dim];
                    v[i] = sgn;
                    out.push(v);
                }
            }
            let s = 1.0 / libm::sqrt(dim as f64);
            let mut mask: u64 = 0;
            while out.len() < count && dim < 64 && mask < (1u64 << dim) {
                out.push((0..dim).map(|i| if mask >> i & 1 == 1 { -s } else { s }).collect());
                mask += 1;
            }
            out
        }
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n <= 1 || lo == hi {
        return vec![lo];
    }
    (0..n)
        .map(|i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
        .collect()
}

/// Sampled version of the set `{δ ≤ ‖x₁‖ ≤ Δ, ‖x₂‖ ≤ Δ}` times a list of
/// window starts.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnulusGrid {
    delta: f64,
    big_delta: f64,
    partition: Partition,
    x1_samples: Vec<Vec<f64>>,
    x2_samples: Vec<Vec<f64>>,
    t_samples: Vec<f64>,
}

impl AnnulusGrid {
    pub fn new(
        partition: Partition,
        delta: f64,
        big_delta: f64,
        x1_samples: Vec<Vec<f64>>,
        x2_samples: Vec<Vec<f64>>,
        t_samples: Vec<f64>,
    ) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite() && big_delta >= delta && big_delta.is_finite()) {
            return Err(contract("annulus needs 0 < delta <= Delta"));
        }
        if x1_samples.is_empty() || x2_samples.is_empty() || t_samples.is_empty() {
            return Err(contract("annulus grid needs x1, x2 and t samples"));
        }
        let tol = 1e-12 * (1.0 + big_delta);
        for x1 in &x1_samples {
            if x1.len() != partition.n1() {
                return Err(Error::Dimension {
                    expected: partition.n1(),
                    found: x1.len(),
                });
            }
            let r = norm2(x1);
            if r < delta - tol || r > big_delta + tol {
                return Err(contract("x1 sample outside the annulus"));
            }
        }
        for x2 in &x2_samples {
            if x2.len() != partition.n2() {
                return Err(Error::Dimension {
                    expected: partition.n2(),
                    found: x2.len(),
                });
            }
            if norm2(x2) > big_delta + tol {
                return Err(contract("x2 sample outside the ball of radius Delta"));
            }
        }
        if t_samples.iter().any(|t| !t.is_finite()) {
            return Err(contract("window starts must be finite"));
        }
        Ok(Self {
            delta,
            big_delta,
            partition,
            x1_samples,
            x2_samples,
            t_samples,
        })
    }

    /// Product grid of directions and radii for both blocks.
    pub fn sampled(
        partition: Partition,
        delta: f64,
        big_delta: f64,
        sampling: AnnulusSampling,
        t_samples: Vec<f64>,
    ) -> Result<Self> {
        let mut x1 = Vec::new();
        for r in linspace(delta, big_delta, sampling.x1_radii) {
            for d in sphere_directions(partition.n1(), sampling.x1_directions) {
                x1.push(d.iter().map(|v| v * r).collect());
            }
        }
        let mut x2 = vec![vec![0.0; partition.n2()]];
        if partition.n2() > 0 {
            for r in linspace(0.0, big_delta, sampling.x2_radii).into_iter().skip(1) {
                for d in sphere_directions(partition.n2(), sampling.x2_directions) {
                    x2.push(d.iter().map(|v| v * r).collect());
                }
            }
        }
        Self::new(partition, delta, big_delta, x1, x2, t_samples)
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn big_delta(&self) -> f64 {
        self.big_delta
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn x1_samples(&self) -> &[Vec<f64>] {
        &self.x1_samples
    }

    pub fn x2_samples(&self) -> &[Vec<f64>] {
        &self.x2_samples
    }

    pub fn t_samples(&self) -> &[f64] {
        &self.t_samples
    }

    /// Full states in lexicographic `(x₁ index, x₂ index)` order.
    pub fn states(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        self.x1_samples
            .iter()
            .flat_map(move |a| self.x2_samples.iter().map(move |b| self.partition.assemble(a, b)))
    }

    pub fn state_count(&self) -> usize {
        self.x1_samples.len() * self.x2_samples.len()
    }
}

fn same_partition(a: &Partition, b: &Partition) -> bool {
    a.n() == b.n() && a.x1_indices() == b.x1_indices()
}

/// Windowed norm integrals of `f` at every grid point.
///
/// Rows follow [`AnnulusGrid::states`], columns follow the window starts.
/// Exposed so that callers can spread the work over threads and then reduce
/// with [`udpe_from_table`].
pub fn udpe_row(f: &StateFunction, x: &[f64], grid: &AnnulusGrid, window: f64, q: &QuadratureSpec) -> Result<Vec<f64>> {
    grid.t_samples
        .iter()
        .map(|&t| window_integral_norm(f, x, t, window, q))
        .collect()
}

/// Deterministic reduction of a table produced by [`udpe_row`].
pub fn udpe_from_table(grid: &AnnulusGrid, window: f64, table: &[Vec<f64>]) -> PeOutcome {
    let ts = &grid.t_samples;
    let mut per_t: Vec<(f64, usize)> = vec![(f64::INFINITY, 0); ts.len()];
    let mut worst = (f64::INFINITY, 0usize, 0usize);
    for (i, row) in table.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if v < per_t[j].0 {
                per_t[j] = (v, i);
            }
            if v < worst.0 {
                worst = (v, i, j);
            }
        }
    }
    let states: Vec<Vec<f64>> = grid.states().collect();
    let evidence = per_t
        .iter()
        .zip(ts)
        .map(|(&(v, i), &t)| Evidence {
            t,
            x: Some(states[i].clone()),
            value: v,
        })
        .collect();
    conclude(
        CertificateKind::UdpeAnnulus,
        window,
        ts,
        evidence,
        (worst.0, ts[worst.2], Some(states[worst.1].clone())),
    )
}

/// Minimum of `∫_t^{t+T} ‖f(τ, x)‖ dτ` over the annulus grid.
///
/// Ties are resolved towards the first grid point in lexicographic order, so
/// the witness does not depend on evaluation order.
pub fn udpe_certificate(f: &StateFunction, grid: &AnnulusGrid, window: f64, q: &QuadratureSpec) -> Result<PeOutcome> {
    check_window(window)?;
    if !same_partition(f.partition(), &grid.partition) {
        return Err(contract("annulus grid partition differs from the function's"));
    }
    let table = grid
        .states()
        .map(|x| udpe_row(f, &x, grid, window, q))
        .collect::<Result<Vec<_>>>()?;
    Ok(udpe_from_table(grid, window, &table))
}

/// Window schedule for [`pointwise_pe_scan`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    /// First window length; later ones double.
    pub first_window: f64,
    pub max_window: f64,
    /// Range of window starts.
    pub starts: Interval,
    /// Spacing of window starts; default `T/16` for window length `T`.
    pub stride: Option<f64>,
}

impl ScanOptions {
    pub fn new(max_window: f64, starts: Interval) -> Self {
        Self {
            first_window: 1.0,
            max_window,
            starts,
            stride: None,
        }
    }

    pub fn with_first_window(mut self, t0: f64) -> Self {
        self.first_window = t0;
        self
    }

    pub fn with_stride(mut self, stride: f64) -> Self {
        self.stride = Some(stride);
        self
    }
}

/// Doubling schedule `T₀, 2T₀, …` up to `max`.
pub fn doubling(first: f64, max: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut w = first;
    while w <= max * (1.0 + 1e-12) {
        out.push(w);
        w *= 2.0;
    }
    out
}

fn scan_starts(domain: Interval, opts: &ScanOptions, window: f64) -> Result<Vec<f64>> {
    let lo = opts.starts.lo.max(domain.lo);
    let hi = opts.starts.hi.min(domain.hi - window);
    if !lo.is_finite() || !hi.is_finite() {
        return Err(contract("scan needs a finite range of window starts"));
    }
    if hi < lo {
        return Ok(Vec::new());
    }
    let stride = opts.stride.unwrap_or(window / 16.0);
    if !(stride > 0.0) {
        return Err(contract("scan stride must be positive"));
    }
    let count = libm::floor((hi - lo) / stride + 1e-9) as usize + 1;
    let mut v: Vec<f64> = (0..count).map(|i| lo + i as f64 * stride).collect();
    if hi - v[count - 1] > 1e-9 * stride {
        v.push(hi);
    }
    Ok(v)
}

/// Excitation of `f` at a single state: the first window length on the
/// doubling schedule whose worst window exceeds [`MU_FLOOR`].
///
/// When no window length succeeds the counterexample reports the worst
/// window of the longest length tried.
pub fn pointwise_pe_scan(f: &StateFunction, x: &[f64], opts: &ScanOptions, q: &QuadratureSpec) -> Result<PeOutcome> {
    check_window(opts.first_window)?;
    if f.partition().n1() > 0 && norm2(&f.partition().x1(x)) == 0.0 {
        return Err(contract("pointwise scan needs a nonzero x1 part"));
    }
    let schedule = doubling(opts.first_window, opts.max_window);
    if schedule.is_empty() {
        return Err(contract("max_window is shorter than the first window"));
    }
    let mut last = None;
    for w in schedule {
        let starts = scan_starts(f.domain_t(), opts, w)?;
        if starts.is_empty() {
            break;
        }
        let mut evidence = Vec::with_capacity(starts.len());
        let mut worst = (f64::INFINITY, starts[0], Some(x.to_vec()));
        for &t in &starts {
            let v = window_integral_norm(f, x, t, w, q)?;
            evidence.push(Evidence { t, x: None, value: v });
            if v < worst.0 {
                worst = (v, t, Some(x.to_vec()));
            }
        }
        let out = conclude(CertificateKind::UdpeAnnulus, w, &starts, evidence, worst);
        if out.is_certified() {
            return Ok(out);
        }
        last = Some(out);
    }
    last.ok_or_else(|| contract("no window of the schedule fits the domain"))
}

/// Settings for [`certificate_map`].
#[derive(Debug, Clone, PartialEq)]
pub struct MapOptions {
    pub sampling: AnnulusSampling,
    pub t_samples: Vec<f64>,
    pub first_window: f64,
    pub max_window: f64,
}

/// Tabulated monotone `δ ↦ (θ_Δ(δ), γ_Δ(δ))`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CertificateMap {
    #[cfg_attr(feature = "serde", serde(rename = "Delta"))]
    pub big_delta: f64,
    pub deltas: Vec<f64>,
    /// Nonincreasing window lengths.
    pub theta: Vec<f64>,
    /// Nondecreasing excitation levels.
    pub gamma: Vec<f64>,
    /// Per-δ values before regularization.
    pub raw_theta: Vec<f64>,
    pub raw_gamma: Vec<f64>,
}

impl CertificateMap {
    /// Running inf of `μ` and running sup of `T` over `[δ, Δ]`.
    pub fn regularize(big_delta: f64, deltas: Vec<f64>, raw_theta: Vec<f64>, raw_gamma: Vec<f64>) -> Result<Self> {
        let n = deltas.len();
        if n == 0 || raw_theta.len() != n || raw_gamma.len() != n {
            return Err(contract("certificate map needs matching nonempty columns"));
        }
        if deltas.windows(2).any(|w| w[0] >= w[1]) {
            return Err(contract("deltas must be strictly increasing"));
        }
        let mut theta = raw_theta.clone();
        let mut gamma = raw_gamma.clone();
        for i in (0..n - 1).rev() {
            theta[i] = theta[i].max(theta[i + 1]);
            gamma[i] = gamma[i].min(gamma[i + 1]);
        }
        if theta.iter().chain(&gamma).any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(contract("certificate map entries must be finite and positive"));
        }
        Ok(Self {
            big_delta,
            deltas,
            theta,
            gamma,
            raw_theta,
            raw_gamma,
        })
    }

    // Index of the largest tabulated δ not above s, so both values stay on
    // the conservative side; below the first δ the first entry is used.
    fn slot(&self, s: f64) -> usize {
        self.deltas.iter().rposition(|&d| d <= s).unwrap_or(0)
    }

    /// Conservative `γ_Δ(s)` (step function from below).
    pub fn gamma_at(&self, s: f64) -> f64 {
        let i = self.slot(s);
        if s < self.deltas[0] {
            // Shrink linearly towards zero below the first sample.
            self.gamma[0] * (s.max(0.0) / self.deltas[0])
        } else {
            self.gamma[i]
        }
    }

    /// Conservative `θ_Δ(s)`.
    pub fn theta_at(&self, s: f64) -> f64 {
        self.theta[self.slot(s)]
    }

    /// `e^{−θ_Δ(s)} γ_Δ(s)`.
    pub fn envelope(&self, s: f64) -> f64 {
        libm::exp(-self.theta_at(s)) * self.gamma_at(s)
    }

    pub fn is_monotone(&self) -> bool {
        self.theta.windows(2).all(|w| w[0] >= w[1]) && self.gamma.windows(2).all(|w| w[0] <= w[1])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MapOutcome {
    Map(CertificateMap),
    /// Not uδ-PE at `delta`: no window on the schedule certified.
    NotUdpe { delta: f64, counterexample: Counterexample },
}

impl MapOutcome {
    pub fn map(&self) -> Option<&CertificateMap> {
        match self {
            MapOutcome::Map(m) => Some(m),
            MapOutcome::NotUdpe { .. } => None,
        }
    }
}

/// Annulus certificate at one `δ` with the doubling window schedule.
pub fn udpe_search(
    f: &StateFunction,
    delta: f64,
    big_delta: f64,
    opts: &MapOptions,
    q: &QuadratureSpec,
) -> Result<PeOutcome> {
    let grid = AnnulusGrid::sampled(f.partition().clone(), delta, big_delta, opts.sampling, opts.t_samples.clone())?;
    let mut last = None;
    for w in doubling(opts.first_window, opts.max_window) {
        let out = udpe_certificate(f, &grid, w, q)?;
        if out.is_certified() {
            return Ok(out);
        }
        last = Some(out);
    }
    last.ok_or_else(|| contract("max_window is shorter than the first window"))
}

pub fn certificate_map(
    f: &StateFunction,
    big_delta: f64,
    delta_grid: &[f64],
    opts: &MapOptions,
    q: &QuadratureSpec,
) -> Result<MapOutcome> {
    if delta_grid.is_empty() || delta_grid.iter().any(|&d| !(d > 0.0 && d <= big_delta)) {
        return Err(contract("delta grid must lie in (0, Delta]"));
    }
    let mut theta = Vec::with_capacity(delta_grid.len());
    let mut gamma = Vec::with_capacity(delta_grid.len());
    for &d in delta_grid {
        match udpe_search(f, d, big_delta, opts, q)? {
            PeOutcome::Certified(c) => {
                theta.push(c.window);
                gamma.push(c.mu);
            }
            PeOutcome::Counterexample(c) => {
                return Ok(MapOutcome::NotUdpe {
                    delta: d,
                    counterexample: c,
                })
            }
        }
    }
    CertificateMap::regularize(big_delta, delta_grid.to_vec(), theta, gamma).map(MapOutcome::Map)
}

/// Certificate for `|φ|ᵖ` from one for `φ`: `μ_p = μᵖ / T^{p−1}` by Hölder.
///
/// Evidence values are transformed by the same map, which is monotone, so
/// they stay above the new level.
pub fn power_certificate(c: &PeCertificate, p: f64) -> Result<PeCertificate> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(contract("power certificate needs p > 1"));
    }
    if c.kind == CertificateKind::MornarScalar {
        return Err(contract("power certificate does not apply to running-integral fits"));
    }
    let conv = |v: f64| libm::pow(v, p) / libm::pow(c.window, p - 1.0);
    let mut params = c.params.clone();
    params.insert("p".into(), p);
    Ok(PeCertificate {
        kind: c.kind,
        window: c.window,
        mu: conv(c.mu),
        valid_t_range: c.valid_t_range,
        evidence: c
            .evidence
            .iter()
            .map(|e| Evidence {
                t: e.t,
                x: e.x.clone(),
                value: conv(e.value),
            })
            .collect(),
        params,
    })
}

/// Settings for [`filtered_pe_check`]. Unset fields get defaults derived
/// from the input's own certificate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterOptions {
    pub horizon: Option<f64>,
    pub burn_in: Option<f64>,
    pub step: f64,
    pub first_window: f64,
    /// Reject the run if `‖Φ_f‖` ever exceeds this.
    pub bound: Option<f64>,
}

impl Default for FilterOptions {
    fn default() -> Self {
        Self {
            horizon: None,
            burn_in: None,
            step: 1e-3,
            first_window: 1.0,
            bound: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FilterOutcome {
    Pe(PeOutcome),
    /// The filter state left the admissible region.
    HypothesisViolation { t: f64, norm: f64 },
}

/// Filter trajectory `Φ̇_f = −f_φ(t, Φ_f) Φ_f + φ(t, z)` from `Φ_f(t₀) = phi_f0`.
pub fn filter_trajectory<D>(f: &StateFunction, damping: D, z: &[f64], phi_f0: &[f64], t0: f64, t_end: f64, step: f64) -> Result<Trajectory>
where
    D: Fn(f64, &[f64]) -> f64 + Send + Sync + 'static,
{
    if phi_f0.len() != f.m() {
        return Err(Error::Dimension {
            expected: f.m(),
            found: phi_f0.len(),
        });
    }
    if z.len() != f.n() {
        return Err(Error::Dimension {
            expected: f.n(),
            found: z.len(),
        });
    }
    let (g, z) = (f.clone(), z.to_vec());
    let m = f.m();
    let sys = OdeSystem::new(m, "filter", move |t, p, out| {
        g.eval_into(t, &z, out);
        let k = damping(t, p);
        for i in 0..m {
            out[i] -= k * p[i];
        }
    });
    ode::integrate(&sys, t0, phi_f0, t_end, step)
}

/// Excitation of the filtered signal `Φ_f`, scanned after a burn-in.
///
/// The default burn-in is five time constants of the damping at the initial
/// filter state; the default horizon is burn-in plus ten input windows.
pub fn filtered_pe_check<D>(
    f: &StateFunction,
    damping: D,
    z: &[f64],
    phi_f0: &[f64],
    opts: &FilterOptions,
    q: &QuadratureSpec,
) -> Result<FilterOutcome>
where
    D: Fn(f64, &[f64]) -> f64 + Send + Sync + 'static,
{
    let dom = f.domain_t();
    let t0 = if dom.lo.is_finite() { dom.lo } else { 0.0 };
    let burn = match opts.burn_in {
        Some(b) => b,
        None => 5.0 / damping(t0, phi_f0).abs().max(1e-3),
    };
    let horizon = match opts.horizon {
        Some(h) => h,
        None => {
            let probe = ScanOptions::new(64.0 * opts.first_window, Interval::new(t0, t0 + 64.0 * opts.first_window)?)
                .with_first_window(opts.first_window);
            let input = pointwise_pe_scan(f, z, &probe, q)?;
            match input.certificate() {
                Some(c) => burn + 10.0 * c.window,
                None => return Err(contract("input is not excited at z; give an explicit horizon")),
            }
        }
    };
    if !(horizon > burn) {
        return Err(contract("filter horizon must exceed the burn-in"));
    }
    let traj = filter_trajectory(f, damping, z, phi_f0, t0, t0 + horizon, opts.step)?;
    if traj.escaped() {
        return Ok(FilterOutcome::HypothesisViolation {
            t: traj.final_time(),
            norm: f64::INFINITY,
        });
    }
    if let Some(b) = opts.bound {
        if let Some((t, n)) = traj.norms().find(|&(_, n)| n > b) {
            return Ok(FilterOutcome::HypothesisViolation { t, norm: n });
        }
    }
    let span = traj.span();
    let m = f.m();
    let wrapped = StateFunction::new(0, m, Partition::full(0), span, "filtered", move |t, _x, out| {
        if ode::sample_into(&traj, t, out).is_err() {
            out.iter_mut().for_each(|v| *v = f64::NAN);
        }
    });
    let scan_len = horizon - burn;
    let opts_scan = ScanOptions::new(scan_len / 2.0, Interval::new(t0 + burn, t0 + horizon)?)
        .with_first_window(opts.first_window.min(scan_len / 2.0));
    pointwise_pe_scan(&wrapped, &[], &opts_scan, q).map(FilterOutcome::Pe)
}

/// Settings for the running-integral linear envelope test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MornarOptions {
    /// Quadrature step of the cumulative integral.
    pub step: f64,
    /// Only `t − t₀ ≥ burn` enters the slope fit.
    pub burn: Option<f64>,
    /// Slopes that fall below this fraction of the first one, with a
    /// decreasing rank trend across `t₀`, are read as decaying to zero.
    pub decay_ratio: f64,
    pub trend_threshold: f64,
}

impl Default for MornarOptions {
    fn default() -> Self {
        Self {
            step: 1e-2,
            burn: None,
            decay_ratio: 0.5,
            trend_threshold: -0.9,
        }
    }
}

/// Linear lower envelope fit of one running integral.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearEnvelope {
    pub a: f64,
    pub b: f64,
    /// Fitted slope per `t₀`.
    pub slopes: Vec<f64>,
    /// `a` read as zero because the slopes decay across `t₀`.
    pub decaying: bool,
    /// `t₀` with the smallest slope.
    pub t_worst: f64,
}

/// Fits `∫_{t₀}^t g(s) ds ≥ a(t − t₀) + b` over `t₀ ∈ t0_grid`,
/// `t ∈ [t₀, t₀ + horizon]`, for a scalar nonnegative integrand.
pub fn linear_envelope<G>(mut g: G, t0_grid: &[f64], horizon: f64, opts: &MornarOptions) -> Result<LinearEnvelope>
where
    G: FnMut(f64) -> Result<f64>,
{
    if t0_grid.is_empty() {
        return Err(contract("running-integral test needs window starts"));
    }
    check_window(horizon)?;
    if !(opts.step > 0.0) {
        return Err(contract("step must be positive"));
    }
    let lo = t0_grid.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = t0_grid.iter().copied().fold(f64::NEG_INFINITY, f64::max) + horizon;
    let h = opts.step;
    let n = libm::ceil((hi - lo) / h - 1e-9) as usize;
    // Cumulative trapezoid on the uniform grid lo + i·h.
    let mut cum = Vec::with_capacity(n + 1);
    cum.push(0.0);
    let mut prev = g(lo)?;
    for i in 1..=n {
        let cur = g(lo + i as f64 * h)?;
        cum.push(cum[i - 1] + 0.5 * h * (prev + cur));
        prev = cur;
    }
    let burn = opts.burn.unwrap_or(horizon / 4.0);
    let span = libm::floor(horizon / h + 1e-9) as usize;
    let skip = libm::ceil(burn / h - 1e-9) as usize;
    let thin = ((span - skip.min(span)) / 2000).max(1);

    let mut slopes = Vec::with_capacity(t0_grid.len());
    let mut intercepts = Vec::new();
    for &t0 in t0_grid {
        let i0 = libm::round((t0 - lo) / h) as usize;
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        let mut k = skip;
        while k <= span && i0 + k <= n {
            xs.push(k as f64 * h);
            ys.push(cum[i0 + k] - cum[i0]);
            k += thin;
        }
        let fit = stats::fit_line(&xs, &ys).ok_or_else(|| contract("running-integral window too short for a fit"))?;
        slopes.push(fit.slope);
        intercepts.push(i0);
    }
    let (mut a, mut worst) = (f64::INFINITY, 0);
    for (i, &s) in slopes.iter().enumerate() {
        if s < a {
            a = s;
            worst = i;
        }
    }
    let mut decaying = false;
    if slopes.len() >= 3 {
        let rho = stats::spearman(t0_grid, &slopes);
        let (first, last) = (slopes[0], slopes[slopes.len() - 1]);
        if rho <= opts.trend_threshold && last < opts.decay_ratio * first {
            decaying = true;
        }
    }
    let a_eff = if decaying { 0.0 } else { a.max(0.0) };
    let mut b = 0.0f64;
    for &i0 in &intercepts {
        for k in 0..=span.min(n - i0) {
            b = b.min(cum[i0 + k] - cum[i0] - a_eff * k as f64 * h);
        }
    }
    Ok(LinearEnvelope {
        a: a_eff,
        b,
        slopes,
        decaying,
        t_worst: t0_grid[worst],
    })
}

/// Running-integral test on `s ↦ ‖P(s) x‖` for each unit direction `x`.
///
/// Certifies with `μ = a` (smallest over directions) and the smallest
/// intercept in `params["b"]`; otherwise the flattest direction is the
/// counterexample. Evidence holds one row per direction.
pub fn mornar_scalar_pe(
    s: &TimeSignal,
    directions: &[Vec<f64>],
    t0_grid: &[f64],
    horizon: f64,
    opts: &MornarOptions,
) -> Result<PeOutcome> {
    if directions.is_empty() {
        return Err(contract("running-integral test needs at least one direction"));
    }
    let mut evidence = Vec::with_capacity(directions.len());
    let mut worst: Option<(f64, usize, f64)> = None;
    let mut b_min = 0.0f64;
    for (k, x) in directions.iter().enumerate() {
        if x.len() != s.cols() {
            return Err(Error::Dimension {
                expected: s.cols(),
                found: x.len(),
            });
        }
        if (norm2(x) - 1.0).abs() > 1e-9 {
            return Err(contract("directions must be unit vectors"));
        }
        let fit = linear_envelope(|t| Ok(norm2(&s.eval(t)?.mul_vec(x))), t0_grid, horizon, opts)?;
        evidence.push(Evidence {
            t: fit.t_worst,
            x: Some(x.clone()),
            value: fit.a,
        });
        b_min = b_min.min(fit.b);
        if worst.map_or(true, |(a, _, _)| fit.a < a) {
            worst = Some((fit.a, k, fit.t_worst));
        }
    }
    let (a, k, t) = worst.expect("directions nonempty");
    let starts: Vec<f64> = t0_grid.to_vec();
    let out = conclude(
        CertificateKind::MornarScalar,
        horizon,
        &starts,
        evidence,
        (a, t, Some(directions[k].clone())),
    );
    Ok(match out {
        PeOutcome::Certified(mut c) => {
            c.params.insert("b".into(), b_min);
            PeOutcome::Certified(c)
        }
        other => other,
    })
}

/// Running-integral test on `s ↦ ‖F(s, x)‖` at a fixed state.
pub fn artstein_check(
    f: &StateFunction,
    x: &[f64],
    t0_grid: &[f64],
    horizon: f64,
    opts: &MornarOptions,
) -> Result<LinearEnvelope> {
    let mut buf = vec![0.0; f.m()];
    let x = x.to_vec();
    linear_envelope(
        |t| {
            f.eval_into(t, &x, &mut buf);
            let v = norm2(&buf);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Evaluation { t, x: x.clone() })
            }
        },
        t0_grid,
        horizon,
        opts,
    )
}

/// Margin of the excitation gate: `min_s [e^{−θ(s)}γ(s) − 3ρ₁(Δ)ρ₄(s)]` over
/// `s_grid`. Positive means the gate holds on the grid.
pub fn enoughpe_margin<R>(map: &CertificateMap, rho1_delta: f64, rho4: R, s_grid: &[f64]) -> f64
where
    R: Fn(f64) -> f64,
{
    s_grid
        .iter()
        .map(|&s| map.envelope(s) - 3.0 * rho1_delta * rho4(s))
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::signal::builtin;
    use core::f64::consts::PI;

    fn x2_only(partition: Partition) -> StateFunction {
        StateFunction::scalar(2, partition, Interval::unbounded(), "x2", |_, x| x[1])
    }

    #[test]
    fn gram_certificate_for_sin_cos() {
        let s = builtin::sin_cos(1.0);
        let q = QuadratureSpec::default_for(2.0 * PI);
        let ts = window_starts(0.0, 4.0 * PI, 9);
        let out = classical_pe_certificate(&s, 2.0 * PI, &q, &ts).unwrap();
        let c = out.certificate().unwrap();
        assert!((c.mu - PI).abs() < 1e-4, "{}", c.mu);
        assert!(c.evidence.iter().all(|e| e.value >= c.mu));
        assert!(c.window <= c.valid_t_range.len());
    }

    #[test]
    fn constant_direction_is_not_pe() {
        let s = builtin::constant(Matrix::column(&[1.0, 0.0]));
        let q = QuadratureSpec::default_for(1.0);
        let out = classical_pe_certificate(&s, 1.0, &q, &[0.0, 0.5]).unwrap();
        assert!(out.counterexample().unwrap().value.abs() < 1e-12);
    }

    #[test]
    fn inverse_time_degrades_at_the_far_end() {
        let s = builtin::inverse_time();
        let q = QuadratureSpec::default_for(1.0);
        let ts = window_starts(0.0, 100.0, 101);
        let out = classical_pe_certificate(&s, 1.0, &q, &ts).unwrap();
        let c = out.certificate().unwrap();
        let oracle = 1.0 / 101.0 - 1.0 / 102.0;
        assert!((c.mu - oracle).abs() < 1e-9 * 1e3, "{} vs {oracle}", c.mu);
        assert!(c.evidence.windows(2).all(|w| w[1].value < w[0].value));
    }

    #[test]
    fn empty_grid_is_a_contract_error() {
        let s = builtin::sin(1.0);
        let q = QuadratureSpec::default_for(1.0);
        assert!(classical_pe_certificate(&s, 1.0, &q, &[]).is_err());
    }

    #[test]
    fn annulus_rotating_projection() {
        let psi = builtin::rotating_projection();
        let grid = AnnulusGrid::sampled(Partition::full(2), 1.0, 1.0, AnnulusSampling::default(), vec![0.0, 1.0, 2.5]).unwrap();
        let out = udpe_certificate(&psi, &grid, 2.0 * PI, &QuadratureSpec::default_for(2.0 * PI)).unwrap();
        assert!((out.value() - 4.0).abs() < 1e-3, "{}", out.value());
    }

    #[test]
    fn x2_wrt_x1_counterexample_and_wrt_x2_certificate() {
        let q = QuadratureSpec::default_for(1.0);
        let p1 = Partition::leading(2, 1).unwrap();
        let grid = AnnulusGrid::sampled(p1.clone(), 1.0, 1.0, AnnulusSampling::default(), vec![0.0]).unwrap();
        let out = udpe_certificate(&x2_only(p1), &grid, 1.0, &q).unwrap();
        let cx = out.counterexample().unwrap();
        assert_eq!(cx.x.as_deref(), Some(&[1.0, 0.0][..]));

        let p2 = Partition::indices(2, vec![1]).unwrap();
        let grid = AnnulusGrid::sampled(p2.clone(), 1.0, 2.0, AnnulusSampling::default(), vec![0.0, 3.0]).unwrap();
        for w in [0.5, 2.0] {
            let out = udpe_certificate(&x2_only(p2.clone()), &grid, w, &q).unwrap();
            assert!((out.value() - w).abs() < 1e-12);
        }
    }

    #[test]
    fn grid_rejects_samples_outside_bounds() {
        let p = Partition::full(1);
        assert!(AnnulusGrid::new(p.clone(), 1.0, 2.0, vec![vec![0.5]], vec![vec![]], vec![0.0]).is_err());
        assert!(AnnulusGrid::new(p.clone(), 1.0, 2.0, vec![vec![1.5]], vec![vec![]], vec![0.0]).is_ok());
        assert!(AnnulusGrid::new(p, 2.0, 1.0, vec![vec![1.5]], vec![vec![]], vec![0.0]).is_err());
    }

    #[test]
    fn sphere_directions_are_unit() {
        for dim in 1..7 {
            for v in sphere_directions(dim, 20) {
                assert!((norm2(&v) - 1.0).abs() < 1e-12);
            }
        }
        assert_eq!(sphere_directions(5, 3).len(), 10);
    }

    #[test]
    fn pointwise_scan_cases() {
        let psi = builtin::rotating_projection();
        let q = QuadratureSpec::default_for(1.0);
        let starts = Interval::new(0.0, 2.0 * PI).unwrap();

        // From T₀ = 1 the first length already certifies: the worst window
        // is centred on a zero of sin, 2(1 − cos ½).
        let out = pointwise_pe_scan(&psi, &[1.0, 0.0], &ScanOptions::new(4.0 * PI, starts).with_stride(PI / 512.0), &q).unwrap();
        let c = out.certificate().unwrap();
        assert_eq!(c.window, 1.0);
        assert!((c.mu - 2.0 * (1.0 - libm::cos(0.5))).abs() < 1e-5, "{}", c.mu);

        let opts = ScanOptions::new(4.0 * PI, starts).with_first_window(PI);
        let c = pointwise_pe_scan(&psi, &[1.0, 0.0], &opts, &q).unwrap();
        let c = c.certificate().unwrap();
        assert!(c.window <= 2.0 * PI && c.mu >= 2.0 - 1e-5);

        let zero = StateFunction::scalar(2, Partition::full(2), Interval::unbounded(), "zero", |_, _| 0.0);
        assert!(!pointwise_pe_scan(&zero, &[1.0, 0.0], &ScanOptions::new(8.0, starts), &q).unwrap().is_certified());

        let p2 = Partition::indices(2, vec![1]).unwrap();
        let c = pointwise_pe_scan(&x2_only(p2), &[0.0, 1.0], &ScanOptions::new(8.0, starts), &q).unwrap();
        let c = c.certificate().unwrap();
        assert_eq!(c.window, 1.0);
        assert!((c.mu - 1.0).abs() < 1e-12);
    }

    fn map_opts() -> MapOptions {
        MapOptions {
            sampling: AnnulusSampling::default(),
            t_samples: vec![0.0, 0.7],
            first_window: 2.0 * PI,
            max_window: 8.0 * PI,
        }
    }

    #[test]
    fn map_for_rotating_projection() {
        let psi = builtin::rotating_projection();
        let q = QuadratureSpec::default_for(2.0 * PI);
        let out = certificate_map(&psi, 2.0, &[0.5, 1.0, 2.0], &map_opts(), &q).unwrap();
        let m = out.map().unwrap();
        assert!(m.is_monotone());
        for (d, g) in m.deltas.iter().zip(&m.gamma) {
            assert!((g - 4.0 * d).abs() < 4e-3 * d, "{g} at {d}");
        }
        assert!(m.theta.iter().all(|t| (t - 2.0 * PI).abs() < 1e-12));
        assert_eq!(m.gamma_at(1.5), m.gamma[1]);
        assert!(m.gamma_at(0.25) < m.gamma[0]);
    }

    #[test]
    fn map_reports_not_udpe() {
        let p1 = Partition::leading(2, 1).unwrap();
        let q = QuadratureSpec::default_for(1.0);
        let out = certificate_map(&x2_only(p1), 1.0, &[0.5, 1.0], &map_opts(), &q).unwrap();
        match out {
            MapOutcome::NotUdpe { delta, counterexample } => {
                assert_eq!(delta, 0.5);
                assert_eq!(counterexample.x.as_deref(), Some(&[0.5, 0.0][..]));
            }
            MapOutcome::Map(_) => panic!("expected failure"),
        }
    }

    #[test]
    fn regularization_enforces_monotonicity() {
        let m = CertificateMap::regularize(1.0, vec![0.1, 0.5, 1.0], vec![1.0, 4.0, 2.0], vec![0.3, 0.1, 0.5]).unwrap();
        assert_eq!(m.theta, vec![4.0, 4.0, 2.0]);
        assert_eq!(m.gamma, vec![0.1, 0.1, 0.5]);
    }

    fn cert(window: f64, mu: f64) -> PeCertificate {
        PeCertificate {
            kind: CertificateKind::UdpeAnnulus,
            window,
            mu,
            valid_t_range: Interval::new(0.0, window).unwrap(),
            evidence: vec![Evidence { t: 0.0, x: None, value: mu }],
            params: BTreeMap::new(),
        }
    }

    #[test]
    fn power_conversion() {
        let c2 = power_certificate(&cert(2.0 * PI, 4.0), 2.0).unwrap();
        assert!((c2.mu - 8.0 / PI).abs() < 1e-12);
        assert!(c2.mu <= PI);
        assert!((power_certificate(&cert(1.0, 1.0), 3.0).unwrap().mu - 1.0).abs() < 1e-15);
        let near = power_certificate(&cert(1.0, 0.7), 1.001).unwrap().mu;
        assert!((near - 0.7).abs() < 0.007);
        let mus: Vec<f64> = [1.5, 2.0, 3.0]
            .iter()
            .map(|&p| power_certificate(&cert(2.0 * PI, 4.0), p).unwrap().mu)
            .collect();
        assert!(mus.windows(2).all(|w| w[1] <= w[0]));
        assert!(power_certificate(&cert(1.0, 1.0), 1.0).is_err());
        let mut m = cert(1.0, 1.0);
        m.kind = CertificateKind::MornarScalar;
        assert!(power_certificate(&m, 2.0).is_err());
    }

    fn time_only(label: &str, g: fn(f64) -> f64) -> StateFunction {
        StateFunction::scalar(0, Partition::full(0), Interval::from(0.0), label, move |t, _| g(t))
    }

    #[test]
    fn filtered_sine() {
        let f = time_only("sin", libm::sin);
        let q = QuadratureSpec::default_for(1.0);
        let opts = FilterOptions {
            horizon: Some(40.0),
            burn_in: Some(10.0),
            step: 1e-2,
            first_window: 2.0 * PI,
            bound: Some(2.0),
        };
        let out = filtered_pe_check(&f, |_, _| 1.0, &[], &[0.0], &opts, &q).unwrap();
        let FilterOutcome::Pe(PeOutcome::Certified(c)) = out else { panic!("{out:?}") };
        let oracle = 4.0 / core::f64::consts::SQRT_2;
        assert!((c.mu - oracle).abs() < 1e-3, "{}", c.mu);
    }

    #[test]
    fn filtered_zero_and_decay() {
        let f = time_only("zero", |_| 0.0);
        let q = QuadratureSpec::default_for(1.0);
        let base = FilterOptions {
            horizon: Some(60.0),
            burn_in: Some(40.0),
            step: 1e-2,
            ..FilterOptions::default()
        };
        for x0 in [0.0, 1.0] {
            let out = filtered_pe_check(&f, |_, _| 1.0, &[], &[x0], &base, &q).unwrap();
            assert!(matches!(out, FilterOutcome::Pe(PeOutcome::Counterexample(_))), "{out:?}");
        }
        let bounded = FilterOptions { bound: Some(0.5), ..base };
        let out = filtered_pe_check(&f, |_, _| 1.0, &[], &[1.0], &bounded, &q).unwrap();
        assert!(matches!(out, FilterOutcome::HypothesisViolation { .. }));
    }

    #[test]
    fn running_integral_envelopes() {
        let t0s = window_starts(0.0, 50.0, 6);
        let opts = MornarOptions::default();
        let one = builtin::constant(Matrix::scalar(1.0));
        let c = mornar_scalar_pe(&one, &[vec![1.0]], &t0s, 50.0, &opts).unwrap();
        let c = c.certificate().unwrap();
        assert!((c.mu - 1.0).abs() < 1e-9);
        assert!(c.params["b"].abs() < 1e-9);

        let s = builtin::abs_sin(1.0);
        let c = mornar_scalar_pe(&s, &[vec![1.0]], &t0s, 100.0, &opts).unwrap();
        let c = c.certificate().unwrap();
        assert!((c.mu - 2.0 / PI).abs() < 0.01 * 2.0 / PI, "{}", c.mu);
        assert!(c.params["b"] >= -2.0 && c.params["b"] <= 0.0);

        let inv = builtin::inverse_time();
        let t0s = window_starts(0.0, 200.0, 9);
        let out = mornar_scalar_pe(&inv, &[vec![1.0]], &t0s, 100.0, &opts).unwrap();
        assert_eq!(out.counterexample().unwrap().value, 0.0);
        assert!(mornar_scalar_pe(&inv, &[], &t0s, 100.0, &opts).is_err());
    }

    #[test]
    fn enoughpe_margin_sign() {
        let m = CertificateMap::regularize(1.0, vec![0.5, 1.0], vec![1.0, 1.0], vec![1.0, 2.0]).unwrap();
        let s = [0.5, 1.0];
        assert!(enoughpe_margin(&m, 0.01, |s| s, &s) > 0.0);
        assert!(enoughpe_margin(&m, 10.0, |s| s, &s) < 0.0);
    }
}
