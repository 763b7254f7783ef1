//! Closed-loop systems used by the experiments.
//!
//! * Systems with matching nonlinearities, in particular the gradient
//!   (MRAC-type) adaptive error dynamics.
//! * Bounded dynamic feedback `u = tanh z` for systems `ξ̇ = f + g u`, and
//!   its driftless special case.
//! * Euler–Lagrange plants under the Slotine–Li adaptive tracking law.
//!
//! Every constructor returns a system whose origin is an equilibrium.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{contract, Error, Result};
use crate::linalg::{self, cholesky, dot, inverse, norm2, solve, symmetric_eigenvalues, Matrix};
use crate::ode::{reference, OdeSystem};
use crate::signal::{Interval, Partition, StateFunction, TimeSignal};

type ScalarFn = dyn Fn(f64, &[f64]) -> f64 + Send + Sync;
type VectorFn = dyn Fn(f64, &[f64]) -> Vec<f64> + Send + Sync;

/// `V(t, x)` with its partial derivatives.
#[derive(Clone)]
pub struct Lyapunov {
    value: Arc<ScalarFn>,
    gradient: Arc<VectorFn>,
    partial_t: Arc<ScalarFn>,
}

impl fmt::Debug for Lyapunov {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Lyapunov")
    }
}

impl Lyapunov {
    pub fn new<V, G>(value: V, gradient: G) -> Self
    where
        V: Fn(f64, &[f64]) -> f64 + Send + Sync + 'static,
        G: Fn(f64, &[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        Self {
            value: Arc::new(value),
            gradient: Arc::new(gradient),
            partial_t: Arc::new(|_, _| 0.0),
        }
    }

    pub fn with_partial_t<P>(mut self, p: P) -> Self
    where
        P: Fn(f64, &[f64]) -> f64 + Send + Sync + 'static,
    {
        self.partial_t = Arc::new(p);
        self
    }

    /// `½‖x‖²`.
    pub fn half_square() -> Self {
        Self::new(|_, x| 0.5 * dot(x, x), |_, x| x.to_vec())
    }

    pub fn value(&self, t: f64, x: &[f64]) -> f64 {
        (self.value)(t, x)
    }

    pub fn gradient(&self, t: f64, x: &[f64]) -> Vec<f64> {
        (self.gradient)(t, x)
    }

    /// `∂V/∂t + ∇V · F(t, x)`.
    pub fn rate(&self, sys: &OdeSystem, t: f64, x: &[f64]) -> f64 {
        (self.partial_t)(t, x) + dot(&(self.gradient)(t, x), &sys.rhs(t, x))
    }
}

/// `ẋ₁ = A + B`, `ẋ₂ = C + D` with a UGS Lyapunov function.
///
/// All block functions take the full state (in the system's own ordering,
/// described by `partition`); `A`, `B` return `n₁` entries and `C`, `D`
/// return `n₂`. `B₀(t, x₂) = B(t, x)|_{x₁ = 0}`.
#[derive(Debug, Clone)]
pub struct MatchingSystem {
    pub partition: Partition,
    pub a: StateFunction,
    pub b: StateFunction,
    pub c: StateFunction,
    pub d: StateFunction,
    pub b0: StateFunction,
    pub lyapunov: Lyapunov,
    system: OdeSystem,
}

impl MatchingSystem {
    /// Assembles the vector field from the four blocks.
    pub fn new(
        label: impl Into<String>,
        partition: Partition,
        a: StateFunction,
        b: StateFunction,
        c: StateFunction,
        d: StateFunction,
        b0: StateFunction,
        lyapunov: Lyapunov,
    ) -> Result<Self> {
        let (n, n1, n2) = (partition.n(), partition.n1(), partition.n2());
        for (f, m) in [(&a, n1), (&b, n1), (&c, n2), (&d, n2)] {
            if f.n() != n || f.m() != m {
                return Err(Error::Dimension {
                    expected: m,
                    found: f.m(),
                });
            }
        }
        if b0.n() != n2 || b0.m() != n1 {
            return Err(Error::Dimension {
                expected: n1,
                found: b0.m(),
            });
        }
        let (i1, i2) = (partition.x1_indices().to_vec(), partition.x2_indices());
        let (fa, fb, fc, fd) = (a.clone(), b.clone(), c.clone(), d.clone());
        let system = OdeSystem::new(n, label, move |t, x, out| {
            let mut u = vec![0.0; n1];
            let mut v = vec![0.0; n1];
            fa.eval_into(t, x, &mut u);
            fb.eval_into(t, x, &mut v);
            for (k, &i) in i1.iter().enumerate() {
                out[i] = u[k] + v[k];
            }
            let mut u = vec![0.0; n2];
            let mut v = vec![0.0; n2];
            fc.eval_into(t, x, &mut u);
            fd.eval_into(t, x, &mut v);
            for (k, &i) in i2.iter().enumerate() {
                out[i] = u[k] + v[k];
            }
        });
        Ok(Self {
            partition,
            a,
            b,
            c,
            d,
            b0,
            lyapunov,
            system,
        })
    }

    pub fn ode(&self) -> &OdeSystem {
        &self.system
    }

    pub fn into_ode(self) -> OdeSystem {
        self.system
    }

    /// Largest `‖B₀(t, x₂) − B(t, (0, x₂))‖` over the samples.
    pub fn b0_mismatch(&self, t_samples: &[f64], x2_samples: &[Vec<f64>]) -> Result<f64> {
        let zero = vec![0.0; self.partition.n1()];
        let mut worst = 0.0f64;
        for &t in t_samples {
            for x2 in x2_samples {
                let x = self.partition.assemble(&zero, x2);
                let b = self.b.eval(t, &x)?;
                let b0 = self.b0.eval(t, x2)?;
                let diff: Vec<f64> = b.iter().zip(&b0).map(|(p, q)| p - q).collect();
                worst = worst.max(norm2(&diff));
            }
        }
        Ok(worst)
    }

    /// Samples of `(‖x₁‖, ‖B(t, x) − B₀(t, x₂)‖)`, the raw material of a
    /// `ρ₂` bound (see [`monotone_envelope`]).
    pub fn b_residual_samples(&self, t_samples: &[f64], states: &[Vec<f64>]) -> Result<Vec<(f64, f64)>> {
        let mut out = Vec::with_capacity(t_samples.len() * states.len());
        for &t in t_samples {
            for x in states {
                let b = self.b.eval(t, x)?;
                let b0 = self.b0.eval(t, &self.partition.x2(x))?;
                let diff: Vec<f64> = b.iter().zip(&b0).map(|(p, q)| p - q).collect();
                out.push((norm2(&self.partition.x1(x)), norm2(&diff)));
            }
        }
        Ok(out)
    }
}

/// Least nondecreasing function on `grid` lying above every sample
/// `(s, v)` with `s ≤ grid point`.
pub fn monotone_envelope(samples: &[(f64, f64)], grid: &[f64]) -> Vec<f64> {
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out = Vec::with_capacity(grid.len());
    let mut k = 0;
    let mut run = 0.0f64;
    for &g in grid {
        while k < sorted.len() && sorted[k].0 <= g {
            run = run.max(sorted[k].1);
            k += 1;
        }
        out.push(run);
    }
    out
}

fn max_sym_eig(m: &Matrix) -> Result<f64> {
    let mut s = m.clone();
    s.symmetrize();
    Ok(*symmetric_eigenvalues(&s)?.last().unwrap())
}

/// Gradient adaptive error dynamics
/// `ẋ₁ = Ãx₁ + Φ(t)ᵀx₂`, `ẋ₂ = −P⁻¹Φ(t)x₁`, with `V = ½‖x₁‖² + ½x₂ᵀPx₂`.
///
/// `Φ` is `n₂ × n₁`, so the interconnection is `G = Φᵀ` in both equations.
/// The state is ordered `(x₁, x₂)`.
pub fn make_gradient_adaptive(phi: &TimeSignal, a_tilde: &Matrix, p: &Matrix) -> Result<MatchingSystem> {
    let (n2, n1) = (phi.rows(), phi.cols());
    if a_tilde.shape() != (n1, n1) || p.shape() != (n2, n2) {
        return Err(Error::Dimension {
            expected: n1,
            found: a_tilde.rows(),
        });
    }
    if !(max_sym_eig(a_tilde)? < 0.0) {
        return Err(contract("the symmetric part of A~ must be negative definite"));
    }
    if p.asymmetry() > linalg::SYMMETRY_TOL {
        return Err(contract("P must be symmetric"));
    }
    cholesky(p)?;
    let p_inv = inverse(p)?;
    let n = n1 + n2;
    let part = Partition::leading(n, n1)?;
    let dom = phi.domain();

    let at = a_tilde.clone();
    let a = StateFunction::new(n, n1, part.clone(), dom, "A", move |_, x, out| {
        out.copy_from_slice(&at.mul_vec(&x[..n1]));
    });
    let ph = phi.clone();
    let b = StateFunction::new(n, n1, part.clone(), dom, "B", move |t, x, out| {
        out.copy_from_slice(&ph.at(t).tr_mul_vec(&x[n1..]));
    });
    let ph = phi.clone();
    let c = StateFunction::new(n, n2, part.clone(), dom, "C", move |t, x, out| {
        let v = ph.at(t).mul_vec(&x[..n1]);
        out.copy_from_slice(&p_inv.mul_vec(&v));
        out.iter_mut().for_each(|e| *e = -*e);
    });
    let d = StateFunction::new(n, n2, part.clone(), dom, "D", |_, _, out| out.fill(0.0));
    let ph = phi.clone();
    let b0 = StateFunction::new(n2, n1, Partition::full(n2), dom, "B0", move |t, x2, out| {
        out.copy_from_slice(&ph.at(t).tr_mul_vec(x2));
    });
    let (pv, pg) = (p.clone(), p.clone());
    let lyap = Lyapunov::new(
        move |_, x| 0.5 * dot(&x[..n1], &x[..n1]) + 0.5 * dot(&x[n1..], &pv.mul_vec(&x[n1..])),
        move |_, x| {
            let mut g = x[..n1].to_vec();
            g.extend(pg.mul_vec(&x[n1..]));
            g
        },
    );
    let sys = MatchingSystem::new(
        alloc::format!("gradient_adaptive[{}]", phi.label()),
        part,
        a,
        b,
        c,
        d,
        b0,
        lyap,
    )?;
    Ok(sys)
}

type InputFn = dyn Fn(f64, &[f64], &[f64]) -> Matrix + Send + Sync;

/// Input map `g(t, ξ, u)`, an `n_ξ × n_u` matrix.
#[derive(Clone)]
pub struct InputMap {
    f: Arc<InputFn>,
    n_xi: usize,
    n_u: usize,
    label: String,
}

impl fmt::Debug for InputMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "InputMap({}, {}x{})", self.label, self.n_xi, self.n_u)
    }
}

impl InputMap {
    pub fn new<F>(n_xi: usize, n_u: usize, label: impl Into<String>, f: F) -> Self
    where
        F: Fn(f64, &[f64], &[f64]) -> Matrix + Send + Sync + 'static,
    {
        Self {
            f: Arc::new(f),
            n_xi,
            n_u,
            label: label.into(),
        }
    }

    /// `g(t, ξ, u) = G(t)`.
    pub fn from_signal(s: &TimeSignal) -> Self {
        let sig = s.clone();
        Self::new(s.rows(), s.cols(), s.label(), move |t, _, _| sig.at(t))
    }

    pub fn eval(&self, t: f64, xi: &[f64], u: &[f64]) -> Matrix {
        (self.f)(t, xi, u)
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

/// Closed loop of `ξ̇ = f(t, ξ) + g(t, ξ, u)u` with `u = tanh z`,
/// `ż = −z − g(t, ξ, tanh z)ᵀ ∇V(ξ)`; state ordered `(ξ, z)`.
#[derive(Debug, Clone)]
pub struct BoundedFeedback {
    pub system: OdeSystem,
    /// `W = V(t, ξ) + Σ ln cosh zᵢ`.
    pub w: Lyapunov,
    /// The same loop read as a matching system with `x₁ = z`, `x₂ = ξ`.
    pub matching: MatchingSystem,
    pub n_xi: usize,
    pub n_u: usize,
}

/// `ln cosh z` without overflow.
pub fn ln_cosh(z: f64) -> f64 {
    let a = z.abs();
    a + libm::log1p(libm::exp(-2.0 * a)) - core::f64::consts::LN_2
}

fn tanh_all(z: &[f64]) -> Vec<f64> {
    z.iter().map(|v| libm::tanh(*v)).collect()
}

pub fn make_feedforward_bounded(drift: &StateFunction, g: &InputMap, v: &Lyapunov) -> Result<BoundedFeedback> {
    let (nx, nu) = (g.n_xi, g.n_u);
    if drift.n() != nx || drift.m() != nx {
        return Err(Error::Dimension {
            expected: nx,
            found: drift.m(),
        });
    }
    let n = nx + nu;
    let dom = drift.domain_t();
    // x₁ = z sits at the tail of the state.
    let part = Partition::indices(n, (nx..n).collect())?;

    let a = StateFunction::new(n, nu, part.clone(), dom, "A", move |_, x, out| {
        for (o, zi) in out.iter_mut().zip(&x[nx..]) {
            *o = -zi;
        }
    });
    let (gb, vb) = (g.clone(), v.clone());
    let b = StateFunction::new(n, nu, part.clone(), dom, "B", move |t, x, out| {
        let (xi, z) = x.split_at(nx);
        let gm = gb.eval(t, xi, &tanh_all(z));
        let r = gm.tr_mul_vec(&vb.gradient(t, xi));
        for (o, ri) in out.iter_mut().zip(&r) {
            *o = -ri;
        }
    });
    let gc = g.clone();
    let c = StateFunction::new(n, nx, part.clone(), dom, "C", move |t, x, out| {
        let (xi, z) = x.split_at(nx);
        let u = tanh_all(z);
        out.copy_from_slice(&gc.eval(t, xi, &u).mul_vec(&u));
    });
    let fd = drift.clone();
    let d = StateFunction::new(n, nx, part.clone(), dom, "D", move |t, x, out| {
        fd.eval_into(t, &x[..nx], out);
    });
    let (g0, v0) = (g.clone(), v.clone());
    let b0 = StateFunction::new(nx, nu, Partition::full(nx), dom, "B0", move |t, xi, out| {
        let gm = g0.eval(t, xi, &vec![0.0; nu]);
        let r = gm.tr_mul_vec(&v0.gradient(t, xi));
        for (o, ri) in out.iter_mut().zip(&r) {
            *o = -ri;
        }
    });
    let (vw, vg, vt) = (v.clone(), v.clone(), v.clone());
    let w = Lyapunov::new(
        move |t, x| vw.value(t, &x[..nx]) + x[nx..].iter().map(|z| ln_cosh(*z)).sum::<f64>(),
        move |t, x| {
            let mut gr = vg.gradient(t, &x[..nx]);
            gr.extend(tanh_all(&x[nx..]));
            gr
        },
    )
    .with_partial_t(move |t, x| (vt.partial_t)(t, &x[..nx]));
    let matching = MatchingSystem::new(
        alloc::format!("bounded_feedback[{}]", g.label()),
        part,
        a,
        b,
        c,
        d,
        b0,
        w.clone(),
    )?;
    Ok(BoundedFeedback {
        system: matching.ode().clone(),
        w,
        matching,
        n_xi: nx,
        n_u: nu,
    })
}

/// [`make_feedforward_bounded`] with `f ≡ 0`; `V` defaults to `½‖ξ‖²`.
pub fn make_driftless(g: &InputMap, v: Option<Lyapunov>) -> Result<BoundedFeedback> {
    let nx = g.n_xi;
    let zero = StateFunction::new(nx, nx, Partition::full(nx), Interval::unbounded(), "zero", |_, _, out| out.fill(0.0));
    make_feedforward_bounded(&zero, g, &v.unwrap_or_else(Lyapunov::half_square))
}

type MatFn = dyn Fn(&[f64], &[f64]) -> Matrix + Send + Sync;
type RegFn = dyn Fn(&[f64], &[f64], &[f64], &[f64]) -> Matrix + Send + Sync;

/// Euler–Lagrange plant `D(q)q̈ + C(q, q̇)q̇ + F q̇ + g(q) = u`, linear in
/// the lumped parameters through the regressor
/// `Ψ̃(q, q̇, v, a)ᵀθ = D(q)a + C(q, q̇)v + F v + g(q)`.
#[derive(Clone)]
pub struct ElPlant {
    dof: usize,
    theta: Vec<f64>,
    inertia: Arc<MatFn>,
    inertia_rate: Arc<MatFn>,
    coriolis: Arc<MatFn>,
    gravity: Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>,
    friction: Matrix,
    regressor: Arc<RegFn>,
    label: String,
}

impl fmt::Debug for ElPlant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ElPlant")
            .field("label", &self.label)
            .field("dof", &self.dof)
            .field("theta", &self.theta)
            .finish()
    }
}

impl ElPlant {
    pub fn dof(&self) -> usize {
        self.dof
    }

    pub fn n_params(&self) -> usize {
        self.theta.len()
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn inertia(&self, q: &[f64]) -> Matrix {
        (self.inertia)(q, &[])
    }

    /// `Ḋ(q)` along `q̇`.
    pub fn inertia_rate(&self, q: &[f64], qd: &[f64]) -> Matrix {
        (self.inertia_rate)(q, qd)
    }

    pub fn coriolis(&self, q: &[f64], qd: &[f64]) -> Matrix {
        (self.coriolis)(q, qd)
    }

    pub fn gravity(&self, q: &[f64]) -> Vec<f64> {
        (self.gravity)(q)
    }

    pub fn friction(&self) -> &Matrix {
        &self.friction
    }

    /// `Ψ̃(q, q̇, v, a)`, `n_params × dof`.
    pub fn regressor(&self, q: &[f64], qd: &[f64], v: &[f64], a: &[f64]) -> Matrix {
        (self.regressor)(q, qd, v, a)
    }

    /// `D q̈ + C q̇ + F q̇ + g` evaluated from the model.
    pub fn torque(&self, q: &[f64], qd: &[f64], qdd: &[f64]) -> Vec<f64> {
        let mut tau = self.inertia(q).mul_vec(qdd);
        let c = self.coriolis(q, qd).mul_vec(qd);
        let f = self.friction.mul_vec(qd);
        let g = self.gravity(q);
        for i in 0..self.dof {
            tau[i] += c[i] + f[i] + g[i];
        }
        tau
    }

    /// Largest deviation from the model invariants over the samples:
    /// regressor identity, `Ḋ − 2C` skew, and the smallest inertia eigenvalue
    /// (returned separately).
    pub fn invariant_defects(&self, samples: &[[Vec<f64>; 3]]) -> Result<(f64, f64, f64)> {
        let (mut lin, mut skew, mut eig) = (0.0f64, 0.0f64, f64::INFINITY);
        for [q, qd, qdd] in samples {
            let tau = self.torque(q, qd, qdd);
            let psi = self.regressor(q, qd, qd, qdd).tr_mul_vec(&self.theta);
            for (a, b) in tau.iter().zip(&psi) {
                lin = lin.max((a - b).abs());
            }
            let mut n = self.inertia_rate(q, qd);
            n.add_scaled(-2.0, &self.coriolis(q, qd));
            skew = skew.max(n.asymmetry_skew());
            eig = eig.min(symmetric_eigenvalues(&self.inertia(q))?[0]);
        }
        Ok((lin, skew, eig))
    }

    fn checked(self) -> Self {
        // Deterministic spread of states for the construction-time checks.
        let d = self.dof;
        let mut samples = Vec::new();
        for k in 0..25 {
            let f = |j: usize, s: f64| libm::sin(1.7 * k as f64 + 0.9 * j as f64 + s) * 2.0;
            samples.push([
                (0..d).map(|j| f(j, 0.0)).collect(),
                (0..d).map(|j| f(j, 1.3)).collect(),
                (0..d).map(|j| f(j, 2.1)).collect(),
            ]);
        }
        let (lin, skew, eig) = self.invariant_defects(&samples).expect("finite plant");
        assert!(lin < 1e-10 && skew < 1e-10 && eig > 0.0, "plant invariants: {lin} {skew} {eig}");
        self
    }
}

/// Pendulum `θ₁q̈ + θ₃q̇ + θ₂ sin q = u`; `viscous = false` drops `θ₃`.
/// Defaults `θ = (1, 9.81[, 0.1])`.
pub fn make_pendulum_el(viscous: bool) -> ElPlant {
    let theta = if viscous { vec![1.0, 9.81, 0.1] } else { vec![1.0, 9.81] };
    let (t1, t2) = (theta[0], theta[1]);
    let fv = if viscous { theta[2] } else { 0.0 };
    ElPlant {
        dof: 1,
        inertia: Arc::new(move |_, _| Matrix::scalar(t1)),
        inertia_rate: Arc::new(|_, _| Matrix::scalar(0.0)),
        coriolis: Arc::new(|_, _| Matrix::scalar(0.0)),
        gravity: Arc::new(move |q| vec![t2 * libm::sin(q[0])]),
        friction: Matrix::scalar(fv),
        regressor: Arc::new(move |q, _, v, a| {
            let mut rows = vec![a[0], libm::sin(q[0])];
            if viscous {
                rows.push(v[0]);
            }
            Matrix::column(&rows)
        }),
        label: String::from(if viscous { "pendulum_viscous" } else { "pendulum" }),
        theta,
    }
    .checked()
}

/// Planar two-link arm without gravity, lumped parameters
/// `θ₁ = m₁l_c1² + m₂(l₁² + l_c2²) + I₁ + I₂`, `θ₂ = m₂l₁l_c2`,
/// `θ₃ = m₂l_c2² + I₂`.
pub fn make_two_link_el() -> ElPlant {
    let theta = vec![5.0 / 3.0, 1.0 / 3.0, 0.5];
    let (t1, t2, t3) = (theta[0], theta[1], theta[2]);
    let inertia = move |q: &[f64], _: &[f64]| {
        let c = libm::cos(q[1]);
        Matrix::from_row_major(2, 2, vec![t1 + 2.0 * t2 * c, t3 + t2 * c, t3 + t2 * c, t3]).unwrap()
    };
    ElPlant {
        dof: 2,
        inertia: Arc::new(inertia),
        inertia_rate: Arc::new(move |q, qd| {
            let h = -t2 * libm::sin(q[1]) * qd[1];
            Matrix::from_row_major(2, 2, vec![2.0 * h, h, h, 0.0]).unwrap()
        }),
        coriolis: Arc::new(move |q, qd| {
            let h = t2 * libm::sin(q[1]);
            Matrix::from_row_major(2, 2, vec![-h * qd[1], -h * (qd[0] + qd[1]), h * qd[0], 0.0]).unwrap()
        }),
        gravity: Arc::new(|_| vec![0.0, 0.0]),
        friction: Matrix::zeros(2, 2),
        regressor: Arc::new(|q, qd, v, a| {
            let (c, s) = (libm::cos(q[1]), libm::sin(q[1]));
            Matrix::from_row_major(
                3,
                2,
                vec![
                    a[0],
                    0.0,
                    2.0 * c * a[0] + c * a[1] - s * qd[1] * v[0] - s * (qd[0] + qd[1]) * v[1],
                    c * a[0] + s * qd[0] * v[0],
                    a[1],
                    a[0] + a[1],
                ],
            )
            .unwrap()
        }),
        label: String::from("two_link"),
        theta,
    }
    .checked()
}

/// Desired joint trajectory with its first two derivatives (columns).
#[derive(Debug, Clone)]
pub struct DesiredTrajectory {
    pub pos: TimeSignal,
    pub vel: TimeSignal,
    pub acc: TimeSignal,
}

impl DesiredTrajectory {
    /// `q_d,j(t) = amp · sin(ω t + j)`.
    pub fn sinusoid(dof: usize, amp: f64, omega: f64) -> Self {
        let sig = |k: u32| {
            TimeSignal::column(dof, Interval::unbounded(), "q_d", move |t| {
                (0..dof)
                    .map(|j| {
                        let ph = omega * t + j as f64;
                        let w = libm::pow(omega, k as f64);
                        amp * w * match k % 4 {
                            0 => libm::sin(ph),
                            1 => libm::cos(ph),
                            2 => -libm::sin(ph),
                            _ => -libm::cos(ph),
                        }
                    })
                    .collect()
            })
        };
        Self {
            pos: sig(0),
            vel: sig(1),
            acc: sig(2),
        }
    }

    /// `q_d ≡ 0`.
    pub fn rest(dof: usize) -> Self {
        let z = TimeSignal::column(dof, Interval::unbounded(), "rest", move |_| vec![0.0; dof]);
        Self {
            pos: z.clone(),
            vel: z.clone(),
            acc: z,
        }
    }
}

/// Gains of the Slotine–Li law.
#[derive(Debug, Clone, PartialEq)]
pub struct ControllerConfig {
    pub kd: Matrix,
    pub lambda: f64,
    pub gamma: f64,
}

impl ControllerConfig {
    pub fn scalar(dof: usize, kd: f64, lambda: f64, gamma: f64) -> Self {
        Self {
            kd: Matrix::diag(&vec![kd; dof]),
            lambda,
            gamma,
        }
    }

    fn validate(&self, dof: usize) -> Result<()> {
        if self.kd.shape() != (dof, dof) {
            return Err(Error::Dimension {
                expected: dof,
                found: self.kd.rows(),
            });
        }
        if self.kd.asymmetry() > linalg::SYMMETRY_TOL {
            return Err(contract("K_d must be symmetric"));
        }
        cholesky(&self.kd)?;
        if !(self.lambda > 0.0 && self.gamma > 0.0) {
            return Err(contract("lambda and gamma must be positive"));
        }
        Ok(())
    }
}

/// Slotine–Li closed loop in error coordinates `(q̃, s, θ̃)`.
#[derive(Debug, Clone)]
pub struct SlotineLi {
    pub system: OdeSystem,
    /// `Φ(t) = Ψ̃(q_d, q̇_d, q̇_d, q̈_d)`, `n_params × dof`.
    pub regressor: TimeSignal,
    /// `½sᵀD(q)s + λq̃ᵀK_d q̃ + ½γ⁻¹‖θ̃‖²`.
    pub lyapunov: Lyapunov,
    pub dof: usize,
    pub n_params: usize,
}

impl SlotineLi {
    pub fn q_tilde<'a>(&self, x: &'a [f64]) -> &'a [f64] {
        &x[..self.dof]
    }

    pub fn s<'a>(&self, x: &'a [f64]) -> &'a [f64] {
        &x[self.dof..2 * self.dof]
    }

    pub fn theta_tilde<'a>(&self, x: &'a [f64]) -> &'a [f64] {
        &x[2 * self.dof..]
    }
}

struct LoopPoint {
    q: Vec<f64>,
    qd: Vec<f64>,
    psi: Matrix,
}

fn loop_point(plant: &ElPlant, r: &DesiredTrajectory, lambda: f64, t: f64, x: &[f64]) -> LoopPoint {
    let d = plant.dof;
    let (qt, s) = (&x[..d], &x[d..2 * d]);
    let (qd_, vd, ad) = (r.pos.at(t), r.vel.at(t), r.acc.at(t));
    let mut q = vec![0.0; d];
    let mut qdot = vec![0.0; d];
    let mut vr = vec![0.0; d];
    let mut ar = vec![0.0; d];
    for i in 0..d {
        q[i] = qd_.as_slice()[i] + qt[i];
        vr[i] = vd.as_slice()[i] - lambda * qt[i];
        qdot[i] = s[i] + vr[i];
        ar[i] = ad.as_slice()[i] - lambda * (s[i] - lambda * qt[i]);
    }
    let psi = plant.regressor(&q, &qdot, &vr, &ar);
    LoopPoint { q, qd: qdot, psi }
}

/// With `θ̃ = θ − θ̂` and `θ̂̇ = −γΨ̃s` the loop reads
/// `q̃̇ = s − λq̃`, `D ṡ = −Ψ̃ᵀθ̃ − C s − F s − K_d s`, `θ̃̇ = γΨ̃s`.
pub fn make_slotine_li(plant: &ElPlant, r: &DesiredTrajectory, cfg: &ControllerConfig) -> Result<SlotineLi> {
    let d = plant.dof;
    let p = plant.n_params();
    cfg.validate(d)?;
    for s in [&r.pos, &r.vel, &r.acc] {
        if s.rows() != d || s.cols() != 1 {
            return Err(Error::Dimension {
                expected: d,
                found: s.rows(),
            });
        }
    }
    let (pl, rf, c) = (plant.clone(), r.clone(), cfg.clone());
    let system = OdeSystem::new(2 * d + p, alloc::format!("slotine_li[{}]", plant.label), move |t, x, out| {
        let lp = loop_point(&pl, &rf, c.lambda, t, x);
        let (qt, s, th) = (&x[..d], &x[d..2 * d], &x[2 * d..]);
        let mut rhs = lp.psi.tr_mul_vec(th);
        let cs = pl.coriolis(&lp.q, &lp.qd).mul_vec(s);
        let fs = pl.friction.mul_vec(s);
        let ks = c.kd.mul_vec(s);
        for i in 0..d {
            rhs[i] = -rhs[i] - cs[i] - fs[i] - ks[i];
            out[i] = s[i] - c.lambda * qt[i];
        }
        match solve(&pl.inertia(&lp.q), &rhs) {
            Ok(sd) => out[d..2 * d].copy_from_slice(&sd),
            Err(_) => out[d..2 * d].fill(f64::NAN),
        }
        let ps = lp.psi.mul_vec(s);
        for k in 0..p {
            out[2 * d + k] = c.gamma * ps[k];
        }
    })
    .with_param("lambda", cfg.lambda)
    .with_param("gamma", cfg.gamma);

    let (pl, rf) = (plant.clone(), r.clone());
    let regressor = TimeSignal::new(p, d, Interval::unbounded(), "desired_regressor", move |t| {
        let (q, v, a) = (rf.pos.at(t), rf.vel.at(t), rf.acc.at(t));
        pl.regressor(q.as_slice(), v.as_slice(), v.as_slice(), a.as_slice())
    });

    let (pl, rf, c) = (plant.clone(), r.clone(), cfg.clone());
    let value = move |t: f64, x: &[f64]| {
        let q: Vec<f64> = rf.pos.at(t).as_slice().iter().zip(&x[..d]).map(|(a, b)| a + b).collect();
        let s = &x[d..2 * d];
        let qt = &x[..d];
        0.5 * dot(s, &pl.inertia(&q).mul_vec(s))
            + c.lambda * dot(qt, &c.kd.mul_vec(qt))
            + 0.5 / c.gamma * dot(&x[2 * d..], &x[2 * d..])
    };
    // Only the value is used along trajectories; the gradient is left to
    // finite differences by callers that need it.
    let lyapunov = Lyapunov::new(value, move |_, x| vec![f64::NAN; x.len()]);
    Ok(SlotineLi {
        system,
        regressor,
        lyapunov,
        dof: d,
        n_params: p,
    })
}

/// A named closed loop of the bundled sweep.
#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub system: OdeSystem,
    /// Time domain on which the vector field is examined.
    pub domain: Interval,
}

fn inv_time(label: &'static str) -> TimeSignal {
    TimeSignal::scalar(Interval::from(0.0), label, |t| 1.0 / (1.0 + t))
}

fn sin_sig() -> TimeSignal {
    TimeSignal::scalar(Interval::from(0.0), "sin", libm::sin)
}

/// Small harmonic oscillator `ξ̇ = (ξ₂, −ξ₁)` actuated on `ξ₂`.
pub fn oscillator_feedforward() -> Result<BoundedFeedback> {
    let f = StateFunction::new(2, 2, Partition::full(2), Interval::from(0.0), "oscillator", |_, x, out| {
        out[0] = x[1];
        out[1] = -x[0];
    });
    let g = InputMap::new(2, 1, "second_channel", |_, _, _| Matrix::column(&[0.0, 1.0]));
    make_feedforward_bounded(&f, &g, &Lyapunov::half_square())
}

/// The systems swept by the necessity experiment.
pub fn bundled_sweep() -> Result<Vec<CatalogEntry>> {
    let dom = Interval::new(0.0, 400.0)?;
    let one = Matrix::scalar(1.0);
    let entries = vec![
        CatalogEntry {
            name: "linear_decay",
            system: reference::linear_decay(1, 1.0),
            domain: dom,
        },
        CatalogEntry {
            name: "inverse_time_decay",
            system: reference::inverse_time_decay(1),
            domain: dom,
        },
        CatalogEntry {
            name: "rotation",
            system: reference::rotation(),
            domain: dom,
        },
        CatalogEntry {
            name: "mrac_sin",
            system: make_gradient_adaptive(&sin_sig(), &Matrix::scalar(-1.0), &one)?.into_ode(),
            domain: dom,
        },
        CatalogEntry {
            name: "mrac_inverse_time",
            system: make_gradient_adaptive(&inv_time("inverse_time"), &Matrix::scalar(-1.0), &one)?.into_ode(),
            domain: dom,
        },
        CatalogEntry {
            name: "driftless_sin",
            system: make_driftless(&InputMap::from_signal(&sin_sig()), None)?.system,
            domain: dom,
        },
        CatalogEntry {
            name: "driftless_inverse_time",
            system: make_driftless(&InputMap::from_signal(&inv_time("inverse_time")), None)?.system,
            domain: dom,
        },
        CatalogEntry {
            name: "oscillator_feedforward",
            system: oscillator_feedforward()?.system,
            domain: dom,
        },
    ];
    Ok(entries)
}
