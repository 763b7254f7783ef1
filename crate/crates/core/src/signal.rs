//! Time signals, state-dependent functions and the windowed quadrature that
//! every certificate is built from.
//!
//! Orientation convention: a [`TimeSignal`] `Φ(t)` is an `n × m` matrix and
//! the linear state function it induces is `φ(t, x) = Φ(t)ᵀ x` with
//! `x ∈ ℝⁿ`. [`window_gram`] therefore integrates `Φ(τ) Φ(τ)ᵀ` and returns an
//! `n × n` matrix whose quadratic form `vᵀ G v` equals the windowed integral of
//! `‖Φ(τ)ᵀ v‖²`.

use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{contract, Error, Result};
use crate::linalg::{norm2, Matrix};

/// Closed time interval; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(contract("interval needs lo <= hi"));
        }
        Ok(Self { lo, hi })
    }

    /// The whole real line.
    pub const fn unbounded() -> Self {
        Self {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
        }
    }

    /// `[lo, +∞)`.
    pub const fn from(lo: f64) -> Self {
        Self {
            lo,
            hi: f64::INFINITY,
        }
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.lo - slack(self.lo, t) && t <= self.hi + slack(self.hi, t)
    }

    pub fn contains_window(&self, lo: f64, hi: f64) -> bool {
        self.contains(lo) && self.contains(hi)
    }

    pub(crate) fn require_window(&self, lo: f64, hi: f64) -> Result<()> {
        if self.contains_window(lo, hi) {
            Ok(())
        } else {
            Err(Error::Domain {
                lo,
                hi,
                domain_lo: self.lo,
                domain_hi: self.hi,
            })
        }
    }
}

// Rounding slack for window ends computed as t + T.
fn slack(edge: f64, t: f64) -> f64 {
    if edge.is_finite() {
        1e-12 * (1.0 + edge.abs().max(t.abs()))
    } else {
        0.0
    }
}

type SignalFn = dyn Fn(f64) -> Matrix + Send + Sync;

/// Matrix-valued function of time on a declared domain.
#[derive(Clone)]
pub struct TimeSignal {
    eval: Arc<SignalFn>,
    rows: usize,
    cols: usize,
    domain: Interval,
    label: String,
}

impl fmt::Debug for TimeSignal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TimeSignal")
            .field("label", &self.label)
            .field("shape", &(self.rows, self.cols))
            .field("domain", &self.domain)
            .finish()
    }
}

impl TimeSignal {
    pub fn new<F>(rows: usize, cols: usize, domain: Interval, label: impl Into<String>, f: F) -> Self
    where
        F: Fn(f64) -> Matrix + Send + Sync + 'static,
    {
        Self {
            eval: Arc::new(f),
            rows,
            cols,
            domain,
            label: label.into(),
        }
    }

    /// Scalar (1 × 1) signal.
    pub fn scalar<F>(domain: Interval, label: impl Into<String>, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::new(1, 1, domain, label, move |t| Matrix::scalar(f(t)))
    }

    /// Column signal `(f₁(t), …, f_n(t))ᵀ`.
    pub fn column<F>(n: usize, domain: Interval, label: impl Into<String>, f: F) -> Self
    where
        F: Fn(f64) -> Vec<f64> + Send + Sync + 'static,
    {
        Self::new(n, 1, domain, label, move |t| Matrix::column(&f(t)))
    }

    /// Piecewise-linear interpolation of sampled matrices (row-major entries).
    ///
    /// The domain is `[times[0], times[last]]`.
    pub fn tabulated(
        times: Vec<f64>,
        samples: Vec<Vec<f64>>,
        rows: usize,
        cols: usize,
        label: impl Into<String>,
    ) -> Result<Self> {
        if times.len() < 2 || times.len() != samples.len() {
            return Err(contract("tabulated signal needs >= 2 samples and one row per time"));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(contract("sample times must be strictly increasing"));
        }
        for s in &samples {
            if s.len() != rows * cols {
                return Err(Error::Dimension {
                    expected: rows * cols,
                    found: s.len(),
                });
            }
            if s.iter().any(|v| !v.is_finite()) {
                return Err(contract("tabulated samples must be finite"));
            }
        }
        let domain = Interval::new(times[0], times[times.len() - 1])?;
        let times = Arc::new(times);
        let samples = Arc::new(samples);
        Ok(Self::new(rows, cols, domain, label, move |t| {
            let k = match times.binary_search_by(|p| p.total_cmp(&t)) {
                Ok(k) => return Matrix::from_row_major(rows, cols, samples[k].clone()).unwrap(),
                Err(0) => 0,
                Err(k) if k >= times.len() => times.len() - 2,
                Err(k) => k - 1,
            };
            let w = ((t - times[k]) / (times[k + 1] - times[k])).clamp(0.0, 1.0);
            let data = samples[k]
                .iter()
                .zip(&samples[k + 1])
                .map(|(a, b)| a + w * (b - a))
                .collect();
            Matrix::from_row_major(rows, cols, data).unwrap()
        }))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Restricts (or re-declares) the evaluation domain.
    pub fn with_domain(mut self, domain: Interval) -> Self {
        self.domain = domain;
        self
    }

    /// Unchecked evaluation, for use inside vector fields.
    #[inline]
    pub fn at(&self, t: f64) -> Matrix {
        (self.eval)(t)
    }

    /// Evaluates the signal, checking domain, shape and finiteness.
    pub fn eval(&self, t: f64) -> Result<Matrix> {
        self.domain.require_window(t, t)?;
        let m = (self.eval)(t);
        if m.shape() != (self.rows, self.cols) {
            return Err(Error::Dimension {
                expected: self.rows * self.cols,
                found: m.rows() * m.cols(),
            });
        }
        if !m.is_finite() {
            return Err(Error::Evaluation { t, x: Vec::new() });
        }
        Ok(m)
    }

    /// The induced state function `φ(t, x) = Φ(t)ᵀ x`, uδ-PE candidate w.r.t. all of `x`.
    pub fn transpose_action(&self) -> StateFunction {
        let sig = self.clone();
        let n = self.rows;
        StateFunction::new(
            n,
            self.cols,
            Partition::full(n),
            self.domain,
            self.label.clone() + "ᵀx",
            move |t, x, out| {
                let m = (sig.eval)(t);
                out.copy_from_slice(&m.tr_mul_vec(x));
            },
        )
    }
}

/// Designates which state coordinates form `x₁` (the part that must be
/// bounded away from zero); the remaining coordinates form `x₂`.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Partition {
    n: usize,
    excited: Vec<usize>,
}

impl Partition {
    /// `x₁` is the whole state.
    pub fn full(n: usize) -> Self {
        Self {
            n,
            excited: (0..n).collect(),
        }
    }

    /// `x₁` is the first `n1` coordinates.
    pub fn leading(n: usize, n1: usize) -> Result<Self> {
        if n1 > n {
            return Err(contract("n1 must not exceed n"));
        }
        Ok(Self {
            n,
            excited: (0..n1).collect(),
        })
    }

    /// `x₁` is the given coordinate set.
    pub fn indices(n: usize, mut idx: Vec<usize>) -> Result<Self> {
        idx.sort_unstable();
        idx.dedup();
        if idx.iter().any(|&i| i >= n) {
            return Err(contract("partition index out of range"));
        }
        Ok(Self { n, excited: idx })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn n1(&self) -> usize {
        self.excited.len()
    }

    pub fn n2(&self) -> usize {
        self.n - self.excited.len()
    }

    pub fn x1_indices(&self) -> &[usize] {
        &self.excited
    }

    pub fn x2_indices(&self) -> Vec<usize> {
        (0..self.n).filter(|i| !self.excited.contains(i)).collect()
    }

    pub fn x1(&self, x: &[f64]) -> Vec<f64> {
        self.excited.iter().map(|&i| x[i]).collect()
    }

    pub fn x2(&self, x: &[f64]) -> Vec<f64> {
        self.x2_indices().into_iter().map(|i| x[i]).collect()
    }

    /// Places `x1` and `x2` back into a full state vector.
    pub fn assemble(&self, x1: &[f64], x2: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x1.len(), self.n1());
        debug_assert_eq!(x2.len(), self.n2());
        let mut x = vec![0.0; self.n];
        for (&i, &v) in self.excited.iter().zip(x1) {
            x[i] = v;
        }
        for (i, &v) in self.x2_indices().into_iter().zip(x2) {
            x[i] = v;
        }
        x
    }
}

type StateFn = dyn Fn(f64, &[f64], &mut [f64]) + Send + Sync;

/// Vector-valued function `φ(t, x) ∈ ℝᵐ` of time and state `x ∈ ℝⁿ`.
#[derive(Clone)]
pub struct StateFunction {
    eval: Arc<StateFn>,
    n: usize,
    m: usize,
    partition: Partition,
    domain_t: Interval,
    label: String,
}

impl fmt::Debug for StateFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StateFunction")
            .field("label", &self.label)
            .field("n", &self.n)
            .field("m", &self.m)
            .field("partition", &self.partition)
            .field("domain_t", &self.domain_t)
            .finish()
    }
}

impl StateFunction {
    /// `f(t, x, out)` must write `m` entries into `out`.
    pub fn new<F>(
        n: usize,
        m: usize,
        partition: Partition,
        domain_t: Interval,
        label: impl Into<String>,
        f: F,
    ) -> Self
    where
        F: Fn(f64, &[f64], &mut [f64]) + Send + Sync + 'static,
    {
        assert_eq!(partition.n(), n, "partition dimension must match state dimension");
        Self {
            eval: Arc::new(f),
            n,
            m,
            partition,
            domain_t,
            label: label.into(),
        }
    }

    /// Scalar function, uδ-PE candidate w.r.t. the given partition.
    pub fn scalar<F>(n: usize, partition: Partition, domain_t: Interval, label: impl Into<String>, f: F) -> Self
    where
        F: Fn(f64, &[f64]) -> f64 + Send + Sync + 'static,
    {
        Self::new(n, 1, partition, domain_t, label, move |t, x, out| out[0] = f(t, x))
    }

    /// A function of time only, obtained by composing `f` with a path
    /// `τ ↦ z(τ)`. The returned function has an empty state.
    pub fn along_path<P>(f: &StateFunction, path: P) -> Self
    where
        P: Fn(f64) -> Vec<f64> + Send + Sync + 'static,
    {
        let inner = f.clone();
        Self::new(
            0,
            f.m,
            Partition::full(0),
            f.domain_t,
            f.label.clone() + " along path",
            move |t, _x, out| (inner.eval)(t, &path(t), out),
        )
    }

    /// Same function with a different designated `x₁`.
    pub fn with_partition(mut self, partition: Partition) -> Result<Self> {
        if partition.n() != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                found: partition.n(),
            });
        }
        self.partition = partition;
        Ok(self)
    }

    pub fn with_domain(mut self, domain_t: Interval) -> Self {
        self.domain_t = domain_t;
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Pointwise power `|φ(t, x)|ᵖ` of a scalar function.
    pub fn abs_pow(&self, p: f64) -> Result<Self> {
        if self.m != 1 {
            return Err(contract("pointwise power needs a scalar function"));
        }
        let inner = self.clone();
        Ok(Self::new(
            self.n,
            1,
            self.partition.clone(),
            self.domain_t,
            self.label.to_string() + "^p",
            move |t, x, out| {
                (inner.eval)(t, x, out);
                out[0] = libm::pow(out[0].abs(), p);
            },
        ))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn domain_t(&self) -> Interval {
        self.domain_t
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Raw evaluation into a caller buffer; no checks.
    #[inline]
    pub fn eval_into(&self, t: f64, x: &[f64], out: &mut [f64]) {
        (self.eval)(t, x, out)
    }

    /// Checked evaluation.
    pub fn eval(&self, t: f64, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                found: x.len(),
            });
        }
        let mut out = vec![0.0; self.m];
        (self.eval)(t, x, &mut out);
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::Evaluation { t, x: x.to_vec() });
        }
        Ok(out)
    }
}

/// Composite quadrature rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Rule {
    Trapezoid,
    Simpson,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct QuadratureSpec {
    pub rule: Rule,
    pub step: f64,
}

impl QuadratureSpec {
    pub fn new(rule: Rule, step: f64) -> Result<Self> {
        if !(step > 0.0) || !step.is_finite() {
            return Err(contract("quadrature step must be positive"));
        }
        Ok(Self { rule, step })
    }

    pub fn trapezoid(step: f64) -> Result<Self> {
        Self::new(Rule::Trapezoid, step)
    }

    pub fn simpson(step: f64) -> Result<Self> {
        Self::new(Rule::Simpson, step)
    }

    /// Trapezoid with step `1e-3 · min(T, 1)`.
    pub fn default_for(window: f64) -> Self {
        Self {
            rule: Rule::Trapezoid,
            step: 1e-3 * window.min(1.0),
        }
    }

    /// Node count and spacing for `[a, b]`; Simpson gets an even count.
    pub fn layout(&self, a: f64, b: f64) -> (usize, f64) {
        let len = b - a;
        let mut n = libm::ceil(len / self.step - 1e-9).max(1.0) as usize;
        if self.rule == Rule::Simpson && n % 2 == 1 {
            n += 1;
        }
        (n, len / n as f64)
    }

    #[inline]
    fn weight(&self, i: usize, n: usize, h: f64) -> f64 {
        match self.rule {
            Rule::Trapezoid => {
                if i == 0 || i == n {
                    0.5 * h
                } else {
                    h
                }
            }
            Rule::Simpson => {
                if i == 0 || i == n {
                    h / 3.0
                } else if i % 2 == 1 {
                    4.0 * h / 3.0
                } else {
                    2.0 * h / 3.0
                }
            }
        }
    }

    /// Integrates a scalar integrand over `[a, b]`.
    pub fn integrate<F>(&self, a: f64, b: f64, mut f: F) -> Result<f64>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        if b == a {
            return Ok(0.0);
        }
        let (n, h) = self.layout(a, b);
        let mut acc = 0.0;
        for i in 0..=n {
            let tau = if i == n { b } else { a + i as f64 * h };
            acc += self.weight(i, n, h) * f(tau)?;
        }
        Ok(acc)
    }
}

fn require_window(domain: Interval, t: f64, window: f64) -> Result<()> {
    if !(window > 0.0) || !window.is_finite() {
        return Err(contract("window length must be positive and finite"));
    }
    if !t.is_finite() {
        return Err(contract("window start must be finite"));
    }
    domain.require_window(t, t + window)
}

/// `∫_t^{t+T} ‖f(τ, x)‖₂ dτ` by composite quadrature.
pub fn window_integral_norm(
    f: &StateFunction,
    x: &[f64],
    t: f64,
    window: f64,
    q: &QuadratureSpec,
) -> Result<f64> {
    require_window(f.domain_t, t, window)?;
    if x.len() != f.n {
        return Err(Error::Dimension {
            expected: f.n,
            found: x.len(),
        });
    }
    let mut buf = vec![0.0; f.m];
    q.integrate(t, t + window, |tau| {
        f.eval_into(tau, x, &mut buf);
        let v = norm2(&buf);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Evaluation { t: tau, x: x.to_vec() })
        }
    })
}

/// `∫_t^{t+T} Φ(τ) Φ(τ)ᵀ dτ`, symmetrized.
pub fn window_gram(s: &TimeSignal, t: f64, window: f64, q: &QuadratureSpec) -> Result<Matrix> {
    require_window(s.domain, t, window)?;
    let (n, h) = q.layout(t, t + window);
    let mut g = Matrix::zeros(s.rows, s.rows);
    for i in 0..=n {
        let tau = if i == n { t + window } else { t + i as f64 * h };
        let phi = (s.eval)(tau);
        if phi.shape() != (s.rows, s.cols) {
            return Err(Error::Dimension {
                expected: s.rows * s.cols,
                found: phi.rows() * phi.cols(),
            });
        }
        if !phi.is_finite() {
            return Err(Error::Evaluation {
                t: tau,
                x: Vec::new(),
            });
        }
        g.add_outer_self(q.weight(i, n, h), &phi);
    }
    g.symmetrize();
    Ok(g)
}

pub use crate::linalg::min_eigenvalue;

/// Ready-made signals used by the bundled experiments.
pub mod builtin {
    use super::*;

    /// Column `(sin ωt, cos ωt)ᵀ`.
    pub fn sin_cos(omega: f64) -> TimeSignal {
        TimeSignal::column(2, Interval::unbounded(), "sin_cos", move |t| {
            vec![libm::sin(omega * t), libm::cos(omega * t)]
        })
    }

    pub fn sin(omega: f64) -> TimeSignal {
        TimeSignal::scalar(Interval::unbounded(), "sin", move |t| libm::sin(omega * t))
    }

    pub fn abs_sin(omega: f64) -> TimeSignal {
        TimeSignal::scalar(Interval::unbounded(), "abs_sin", move |t| libm::fabs(libm::sin(omega * t)))
    }

    /// `1 / (1 + t)` on `[0, ∞)`.
    pub fn inverse_time() -> TimeSignal {
        TimeSignal::scalar(Interval::from(0.0), "inverse_time", |t| 1.0 / (1.0 + t))
    }

    pub fn constant(m: Matrix) -> TimeSignal {
        let (r, c) = m.shape();
        TimeSignal::new(r, c, Interval::unbounded(), "constant", move |_| m.clone())
    }

    /// `ψ(t, x) = x₁ sin t − x₂ cos t`, uδ-PE candidate w.r.t. the whole state.
    pub fn rotating_projection() -> StateFunction {
        StateFunction::scalar(2, Partition::full(2), Interval::unbounded(), "rotating_projection", |t, x| {
            x[0] * libm::sin(t) - x[1] * libm::cos(t)
        })
    }

    /// `φ(t, x) = x_k` with the given designated part.
    pub fn coordinate(n: usize, k: usize, partition: Partition) -> StateFunction {
        StateFunction::scalar(n, partition, Interval::unbounded(), "coordinate", move |_, x| x[k])
    }
}

#[cfg(test)]
mod tests {
    use super::builtin::*;
    use super::*;
    use core::f64::consts::PI;

    // ∫ₐᵇ |sin τ| dτ from the antiderivative on each half-period.
    fn abs_sin_integral(a: f64, b: f64) -> f64 {
        let anti = |t: f64| {
            let k = libm::floor(t / PI);
            2.0 * k + (1.0 - libm::cos(t - k * PI))
        };
        anti(b) - anti(a)
    }

    #[test]
    fn rotating_projection_over_a_period() {
        let psi = rotating_projection();
        let q = QuadratureSpec::default_for(2.0 * PI);
        let v = window_integral_norm(&psi, &[1.0, 0.0], 0.0, 2.0 * PI, &q).unwrap();
        let oracle = abs_sin_integral(0.0, 2.0 * PI);
        assert!((oracle - 4.0).abs() < 1e-14);
        assert!((v - oracle).abs() < 1e-6, "{v}");
    }

    #[test]
    fn zero_integrand_gives_zero() {
        let f = StateFunction::scalar(1, Partition::full(1), Interval::unbounded(), "zero", |_, _| 0.0);
        let q = QuadratureSpec::simpson(0.01).unwrap();
        assert_eq!(window_integral_norm(&f, &[3.0], -2.0, 5.0, &q).unwrap(), 0.0);
    }

    #[test]
    fn along_trajectory_of_rotation_vanishes() {
        let psi = rotating_projection();
        let along = StateFunction::along_path(&psi, |t| vec![libm::cos(t), libm::sin(t)]);
        let q = QuadratureSpec::default_for(2.0 * PI);
        let v = window_integral_norm(&along, &[], 0.0, 2.0 * PI, &q).unwrap();
        assert!(v < 1e-9, "{v}");
    }

    #[test]
    fn window_outside_domain_is_rejected() {
        let f = inverse_time().transpose_action();
        let q = QuadratureSpec::default_for(1.0);
        let err = window_integral_norm(&f, &[1.0], -0.5, 1.0, &q).unwrap_err();
        assert!(matches!(err, Error::Domain { .. }));
    }

    #[test]
    fn non_finite_evaluation_carries_time_and_state() {
        let f = StateFunction::scalar(1, Partition::full(1), Interval::unbounded(), "pole", |t, x| x[0] / (t - 0.5));
        let q = QuadratureSpec::trapezoid(0.25).unwrap();
        match window_integral_norm(&f, &[2.0], 0.0, 1.0, &q) {
            Err(Error::Evaluation { t, x }) => {
                assert_eq!(t, 0.5);
                assert_eq!(x, vec![2.0]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn gram_of_sin_cos_is_pi_identity() {
        let s = sin_cos(1.0);
        let q = QuadratureSpec::default_for(2.0 * PI);
        for t0 in [0.0, 1.3] {
            let g = window_gram(&s, t0, 2.0 * PI, &q).unwrap();
            assert!((g[(0, 0)] - PI).abs() < 1e-6);
            assert!((g[(1, 1)] - PI).abs() < 1e-6);
            assert!(g[(0, 1)].abs() < 1e-6);
            assert_eq!(g[(0, 1)], g[(1, 0)]);
        }
    }

    #[test]
    fn gram_of_zero_signal() {
        let s = constant(Matrix::zeros(3, 2));
        let g = window_gram(&s, 0.0, 1.0, &QuadratureSpec::default_for(1.0)).unwrap();
        assert_eq!(g, Matrix::zeros(3, 3));
    }

    #[test]
    fn simpson_pads_to_even_count() {
        let q = QuadratureSpec::simpson(0.3).unwrap();
        let (n, h) = q.layout(0.0, 1.0);
        assert_eq!(n % 2, 0);
        assert!((h * n as f64 - 1.0).abs() < 1e-15);
        // exact on cubics
        let v = q.integrate(0.0, 1.0, |t| Ok(t * t * t)).unwrap();
        assert!((v - 0.25).abs() < 1e-15);
    }

    #[test]
    fn trapezoid_converges_quadratically() {
        // smooth integrand: |ψ| at x = (1, 0) restricted to a window inside (0, π)
        let psi = rotating_projection();
        let x = [1.0, 0.0];
        let oracle = abs_sin_integral(0.2, 2.9);
        let mut errs = Vec::new();
        for step in [0.04, 0.02, 0.01] {
            let q = QuadratureSpec::trapezoid(step).unwrap();
            let v = window_integral_norm(&psi, &x, 0.2, 2.7, &q).unwrap();
            errs.push((v - oracle).abs());
        }
        for w in errs.windows(2) {
            let ratio = w[0] / w[1];
            assert!(ratio > 3.5 && ratio < 4.5, "ratio {ratio}");
        }
    }

    #[test]
    fn tabulated_signal_interpolates_linearly() {
        let s = TimeSignal::tabulated(
            vec![0.0, 1.0, 3.0],
            vec![vec![0.0, 1.0], vec![2.0, 1.0], vec![2.0, -3.0]],
            2,
            1,
            "tab",
        )
        .unwrap();
        assert_eq!(s.eval(0.5).unwrap().as_slice(), &[1.0, 1.0]);
        assert_eq!(s.eval(2.0).unwrap().as_slice(), &[2.0, -1.0]);
        assert_eq!(s.eval(3.0).unwrap().as_slice(), &[2.0, -3.0]);
        assert!(s.eval(3.5).is_err());
    }

    #[test]
    fn partition_roundtrip() {
        let p = Partition::indices(4, vec![3, 1]).unwrap();
        let x = [10.0, 11.0, 12.0, 13.0];
        assert_eq!(p.x1(&x), vec![11.0, 13.0]);
        assert_eq!(p.x2(&x), vec![10.0, 12.0]);
        assert_eq!(p.assemble(&p.x1(&x), &p.x2(&x)), x.to_vec());
        assert!(Partition::indices(2, vec![2]).is_err());
    }
}
