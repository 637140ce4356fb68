//! Separated radial problem for the spin-s Teukolsky operator.
//!
//! The radial operator is assembled from the GHP pieces of the radial
//! symmetry operator R_s, with the angular operator replaced by its eigenvalue
//! σ = S̄ − s. Solutions are started from a Frobenius series at the horizon or
//! from an asymptotic series at large r, and integrated with an adaptive
//! Runge–Kutta scheme in y = ln(r − r₊) near the horizon and in r beyond 4M.

use crate::angular::{spheroidal_mode, SpheroidalMode};
use crate::error::{KerrError, Result};
use crate::geometry::KerrParams;
use crate::ghp::{self, Freq, Kin, Weight};
use crate::jet::{Jet, C64};
use crate::numerics::{dopri5, gauss_legendre, OdeOptions};
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Reference polar angle used when building the radial operator.
pub const THETA_REF: f64 = 1.0;
/// Switch radius between the y = ln(r − r₊) and r integration variables, in units of M.
pub const SWITCH_RADIUS: f64 = 4.0;
pub const DEFAULT_POINTS: usize = 2000;
pub const DEFAULT_EPS: f64 = 1e-4;
pub const DEFAULT_TOL: f64 = 1e-12;
pub const FROBENIUS_TERMS: usize = 6;
pub const ASYMPTOTIC_TERMS: usize = 4;
/// Radius of the asymptotic start point, in units of M.
pub const INFINITY_RADIUS: f64 = 50.0;
const FFT_POINTS: usize = 64;

/// A separated mode e^{−iωt + imφ} R(r) S(θ) of the spin-s Teukolsky equation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeSpec {
    pub params: KerrParams,
    pub s: i32,
    pub omega: f64,
    pub m: i32,
    pub ell: i32,
    /// Eigenvalue of the angular operator S̄ (the symmetry operator S_s has eigenvalue S̄ − s).
    pub sbar: f64,
}

impl ModeSpec {
    pub fn new(params: KerrParams, s: i32, omega: f64, m: i32, ell: i32) -> Result<Self> {
        let sbar = spheroidal_mode(s, m, params.a * omega, ell)?.sbar;
        Ok(Self { params, s, omega, m, ell, sbar })
    }

    pub fn freq(&self) -> Freq {
        Freq::new(self.omega, self.m)
    }

    /// Teukolsky separation constant λ = −2S̄.
    pub fn lambda(&self) -> f64 {
        -2.0 * self.sbar
    }

    pub fn sigma(&self) -> f64 {
        self.sbar - self.s as f64
    }

    pub fn angular(&self) -> Result<SpheroidalMode> {
        spheroidal_mode(self.s, self.m, self.params.a * self.omega, self.ell)
    }

    /// Mode data of the spin-flipped partner: (s, ω, m, S̄) ↦ (−s, −ω, −m, S̄ − s).
    pub fn flipped(&self) -> Self {
        Self { s: -self.s, omega: -self.omega, m: -self.m, sbar: self.sbar - self.s as f64, ..*self }
    }

    /// k̃ = (r₊² + a²)(ω − mΩ₊)/(r₊ − r₋).
    pub fn k_tilde(&self) -> f64 {
        let h = self.params.horizons();
        (h.r_plus * h.r_plus + self.params.a * self.params.a) * (self.omega - self.m as f64 * h.omega_plus) / (h.r_plus - h.r_minus)
    }
}

/// Boundary behaviour selecting a radial solution.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Bc {
    HorizonIn,
    HorizonOut,
    InfinityIn,
    InfinityOut,
}

impl Bc {
    /// Label after the spin flip, which reverses the frequency.
    pub fn flipped(self) -> Self {
        match self {
            Bc::HorizonIn => Bc::HorizonOut,
            Bc::HorizonOut => Bc::HorizonIn,
            Bc::InfinityIn => Bc::InfinityOut,
            Bc::InfinityOut => Bc::InfinityIn,
        }
    }
}

/// The ODE A R″ + B R′ + C R = 0 obtained from R_s R = σ R.
#[derive(Clone, Copy, Debug)]
pub struct RadialOde {
    pub mode: ModeSpec,
    pub theta: f64,
}

pub fn radial_operator_build(mode: &ModeSpec) -> RadialOde {
    RadialOde { mode: *mode, theta: THETA_REF }
}

impl RadialOde {
    /// Coefficient jets in h = r − r0. Only the first N − 2 orders are exact.
    pub fn coeffs_jet<const N: usize>(&self, r0: C64) -> [Jet<N>; 3] {
        let k = Kin::<N>::radial(&self.mode.params, r0, self.theta);
        let fr = self.mode.freq();
        let s = self.mode.s;
        let op = |f: Jet<N>| ghp::radial_symmetry_op(&k, f, fr, s);
        let h = Jet::<N>::var(r0) - r0;
        let c_op = op(Jet::one());
        let b = op(h) - c_op * h;
        let a = (op(h * h) - b * h * 2.0 - c_op * h * h) * 0.5;
        [a, b, c_op - self.mode.sigma()]
    }

    pub fn coeffs(&self, r: impl Into<C64>) -> [C64; 3] {
        let j = self.coeffs_jet::<3>(r.into());
        [j[0].val(), j[1].val(), j[2].val()]
    }

    /// Taylor jet of the solution with R(r0) = val, R′(r0) = der, obtained by
    /// recursively solving the ODE order by order.
    pub fn taylor<const K: usize>(&self, r0: C64, val: C64, der: C64) -> Jet<K> {
        let [a, b, c] = self.coeffs_jet::<K>(r0);
        let mut out = Jet::<K>::zero();
        if K > 0 {
            out.c[0] = val;
        }
        if K > 1 {
            out.c[1] = der;
        }
        for k in 0..K.saturating_sub(2) {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..=k {
                if j >= 1 {
                    acc += a.c[j] * ((k - j + 2) * (k - j + 1)) as f64 * out.c[k - j + 2];
                }
                acc += b.c[j] * (k - j + 1) as f64 * out.c[k - j + 1] + c.c[j] * out.c[k - j];
            }
            out.c[k + 2] = -acc / (a.c[0] * ((k + 2) * (k + 1)) as f64);
        }
        out
    }

    pub fn second_derivative(&self, r: f64, val: C64, der: C64) -> C64 {
        let [a, b, c] = self.coeffs(r);
        -(b * der + c * val) / a
    }
}

/// Standard Teukolsky radial coefficients
/// (Δ, (s+1)Δ′, (K² − 2is(r−M)K)/Δ + 4isωr − λ) with K = (r²+a²)ω − am.
pub fn hand_teukolsky_coeffs(mode: &ModeSpec, r: f64, lambda: f64) -> [C64; 3] {
    let (mass, a) = (mode.params.m, mode.params.a);
    let s = mode.s as f64;
    let i = C64::new(0.0, 1.0);
    let delta = r * r - 2.0 * mass * r + a * a;
    let k = (r * r + a * a) * mode.omega - a * mode.m as f64;
    let pot = (k * k - 2.0 * i * s * (r - mass) * k) / delta + 4.0 * i * s * mode.omega * r - lambda;
    [C64::from(delta), C64::from((s + 1.0) * (2.0 * r - 2.0 * mass)), pot]
}

/// Taylor coefficients of an analytic f about 0 from samples on |x| = radius.
fn fft_taylor(f: impl Fn(C64) -> C64, radius: f64, n: usize) -> Vec<C64> {
    let mut buf: Vec<C64> = (0..n).map(|j| f(C64::from_polar(radius, 2.0 * PI * j as f64 / n as f64))).collect();
    FftPlanner::<f64>::new().plan_fft_forward(n).process(&mut buf);
    buf.iter().enumerate().map(|(k, v)| v / (n as f64 * radius.powi(k as i32))).collect()
}

/// Local coefficients p(x) = xB/A and q(x) = x²C/A about x = r − r₊ = 0.
pub fn horizon_local_coeffs(ode: &RadialOde) -> (Vec<C64>, Vec<C64>) {
    let h = ode.mode.params.horizons();
    let rp = h.r_plus;
    let radius = 0.5 * (h.r_plus - h.r_minus);
    let p = fft_taylor(
        |x| {
            let [a, b, _] = ode.coeffs(x + rp);
            x * b / a
        },
        radius,
        FFT_POINTS,
    );
    let q = fft_taylor(
        |x| {
            let [a, _, c] = ode.coeffs(x + rp);
            x * x * c / a
        },
        radius,
        FFT_POINTS,
    );
    (p, q)
}

fn indicial(p0: C64, q0: C64, nu: C64) -> C64 {
    nu * (nu - 1.0) + p0 * nu + q0
}

/// Roots of the indicial polynomial at r₊, from the built coefficients.
pub fn indicial_exponents(mode: &ModeSpec) -> [C64; 2] {
    let (p, q) = horizon_local_coeffs(&radial_operator_build(mode));
    let b = p[0] - 1.0;
    let mut disc = (b * b - q[0] * 4.0).sqrt();
    // A double root is only resolved to about the square root of machine precision.
    if disc.norm() < 1e-7 {
        disc = C64::new(0.0, 0.0);
    }
    [(-b + disc) * 0.5, (-b - disc) * 0.5]
}

/// Frobenius start data at r = r₊(1 + eps).
#[derive(Clone, Debug, Serialize)]
pub struct FrobeniusData {
    pub nu: C64,
    pub coeffs: Vec<C64>,
    pub r0: f64,
    pub value: C64,
    pub derivative: C64,
    /// Relative size of the first omitted term.
    pub truncation_error: f64,
}

impl FrobeniusData {
    pub fn eval(&self, r: f64, rp: f64) -> (C64, C64) {
        let x = r - rp;
        let lx = x.ln();
        let mut v = C64::new(0.0, 0.0);
        let mut d = C64::new(0.0, 0.0);
        for (k, c) in self.coeffs.iter().take(FROBENIUS_TERMS).enumerate() {
            let e = self.nu + k as f64;
            v += c * (e * lx).exp();
            d += c * e * ((e - 1.0) * lx).exp();
        }
        (v, d)
    }
}

pub fn horizon_frobenius(mode: &ModeSpec, bc: Bc, eps: f64) -> Result<FrobeniusData> {
    if !(1e-8..=1e-3).contains(&eps) {
        return Err(KerrError::InvalidParameter(format!("eps = {eps} outside [1e-8, 1e-3]")));
    }
    let target = match bc {
        Bc::HorizonIn => C64::new(-mode.s as f64, -mode.k_tilde()),
        Bc::HorizonOut => C64::new(0.0, mode.k_tilde()),
        _ => return Err(KerrError::InvalidParameter("horizon_frobenius needs a horizon condition".into())),
    };
    let ode = radial_operator_build(mode);
    let (p, q) = horizon_local_coeffs(&ode);
    let roots = indicial_exponents(mode);
    let (nu, other) = if (roots[0] - target).norm() <= (roots[1] - target).norm() { (roots[0], roots[1]) } else { (roots[1], roots[0]) };
    let diff = other - nu;
    let n_int = diff.re.round();
    if diff.norm() > 1e-9 && diff.im.abs() < 1e-9 && (diff.re - n_int).abs() < 1e-9 && n_int >= 1.0 {
        return Err(KerrError::Resonance(format!("exponents {nu} and {other}; integrate from a smaller eps")));
    }
    let mut c = vec![C64::new(1.0, 0.0)];
    for n in 1..=FROBENIUS_TERMS {
        let mut acc = C64::new(0.0, 0.0);
        for k in 1..=n {
            acc += (p[k] * (nu + (n - k) as f64) + q[k]) * c[n - k];
        }
        c.push(-acc / indicial(p[0], q[0], nu + n as f64));
    }
    let rp = mode.params.r_plus();
    let r0 = rp * (1.0 + eps);
    let data = FrobeniusData { nu, coeffs: c.clone(), r0, value: C64::new(0.0, 0.0), derivative: C64::new(0.0, 0.0), truncation_error: 0.0 };
    let (value, derivative) = data.eval(r0, rp);
    let x = r0 - rp;
    let head: f64 = c.iter().take(FROBENIUS_TERMS).enumerate().map(|(k, v)| v.norm() * x.powi(k as i32)).sum();
    let truncation_error = c[FROBENIUS_TERMS].norm() * x.powi(FROBENIUS_TERMS as i32) / head;
    Ok(FrobeniusData { value, derivative, truncation_error, ..data })
}

/// Asymptotic start data R ≈ e^{iεωr} x^μ Σ a_n x^n, x = 1/r, at large r.
#[derive(Clone, Debug, Serialize)]
pub struct AsymptoticData {
    /// +1 outgoing, −1 ingoing.
    pub eps: f64,
    pub mu: C64,
    pub coeffs: Vec<C64>,
    pub r0: f64,
    pub value: C64,
    pub derivative: C64,
    pub truncation_error: f64,
}

pub fn infinity_asymptotic(mode: &ModeSpec, bc: Bc, r0: f64) -> Result<AsymptoticData> {
    let eps = match bc {
        Bc::InfinityOut => 1.0,
        Bc::InfinityIn => -1.0,
        _ => return Err(KerrError::InvalidParameter("infinity_asymptotic needs an infinity condition".into())),
    };
    if mode.omega.abs() < 1e-8 {
        return Err(KerrError::InvalidParameter("asymptotic series needs ω ≠ 0".into()));
    }
    let ode = radial_operator_build(mode);
    let w = mode.omega;
    let i = C64::new(0.0, 1.0);
    let radius = 0.5 / mode.params.r_plus();
    let f2 = fft_taylor(|x| ode.coeffs(x.inv())[0] * x * x, radius, FFT_POINTS);
    let f1 = fft_taylor(
        |x| {
            let [a, b, _] = ode.coeffs(x.inv());
            a * x.powi(3) * 2.0 - x * x * (a * (2.0 * eps * w) * i + b)
        },
        radius,
        FFT_POINTS,
    );
    let f0 = fft_taylor(
        |x| {
            let [a, b, c] = ode.coeffs(x.inv());
            x * (c + b * (eps * w) * i - a * w * w)
        },
        radius,
        FFT_POINTS,
    );
    // A surviving r² term in the potential would alias into the top coefficients.
    let scale = f0.iter().take(8).fold(0.0f64, |m, v| m.max(v.norm()));
    let tail = f0[FFT_POINTS / 2..].iter().enumerate().fold(0.0f64, |m, (k, v)| m.max(v.norm() * radius.powi((k + FFT_POINTS / 2) as i32)));
    if tail > 1e-8 * scale {
        return Err(KerrError::InvalidParameter("potential is not O(r) after removing the oscillation".into()));
    }
    let mu = -f0[0] / f1[0];
    let mut a = vec![C64::new(1.0, 0.0)];
    for n in 1..=ASYMPTOTIC_TERMS {
        let mut acc = C64::new(0.0, 0.0);
        for k in 1..=n {
            acc += (f1[k] * (mu + (n - k) as f64) + f0[k]) * a[n - k];
        }
        for k in 0..n {
            let e = mu + (n - k - 1) as f64;
            acc += f2[k] * e * (e - 1.0) * a[n - k - 1];
        }
        a.push(-acc / (f1[0] * n as f64));
    }
    let x = 1.0 / r0;
    let lx = x.ln();
    let mut u = C64::new(0.0, 0.0);
    let mut ux = C64::new(0.0, 0.0);
    for (n, c) in a.iter().take(ASYMPTOTIC_TERMS).enumerate() {
        let e = mu + n as f64;
        u += c * (e * lx).exp();
        ux += c * e * ((e - 1.0) * lx).exp();
    }
    let ph = (i * eps * w * r0).exp();
    let value = ph * u;
    let derivative = ph * (i * eps * w * u - ux * x * x);
    let head: f64 = a.iter().take(ASYMPTOTIC_TERMS).enumerate().map(|(n, v)| v.norm() * x.powi(n as i32)).sum();
    let truncation_error = a[ASYMPTOTIC_TERMS].norm() * x.powi(ASYMPTOTIC_TERMS as i32) / head;
    Ok(AsymptoticData { eps, mu, coeffs: a, r0, value, derivative, truncation_error })
}

fn to_state(v: C64, d: C64) -> [f64; 4] {
    [v.re, v.im, d.re, d.im]
}

/// Integrate from (r_start, R, R′) through monotone `targets`.
pub fn propagate(ode: &RadialOde, r_start: f64, init: (C64, C64), targets: &[f64], tol: f64) -> Result<Vec<(C64, C64)>> {
    if targets.is_empty() {
        return Ok(Vec::new());
    }
    let p = &ode.mode.params;
    let rp = p.r_plus();
    let rs = SWITCH_RADIUS * p.m;
    let outward = targets[targets.len() - 1] >= r_start;
    if targets.iter().any(|&t| t <= rp) || r_start <= rp {
        return Err(KerrError::Domain("radial integration must stay outside r₊".into()));
    }
    let opts = OdeOptions { rtol: tol, atol: 1e-300, h0: 1e-3, hmin: 1e-14, max_steps: 5_000_000 };
    let near_rhs = |y: f64, st: &[f64], d: &mut [f64]| {
        let x = y.exp();
        let r = rp + x;
        let rv = C64::new(st[0], st[1]);
        let pv = C64::new(st[2], st[3]);
        let [a, b, c] = ode.coeffs(r);
        let rpp = -(b * pv / x + c * rv) / a;
        let dp = pv + rpp * x * x;
        d.copy_from_slice(&[pv.re, pv.im, dp.re, dp.im]);
    };
    let run_near = |r0: f64, v: (C64, C64), outs: &[f64]| -> Result<Vec<(C64, C64)>> {
        let x0 = r0 - rp;
        let ys: Vec<f64> = outs.iter().map(|r| (r - rp).ln()).collect();
        let sol = dopri5(near_rhs, x0.ln(), &to_state(v.0, v.1 * x0), &ys, &opts).map_err(|e| relabel(e, rp))?;
        Ok(sol
            .iter()
            .zip(outs)
            .map(|(s, r)| (C64::new(s[0], s[1]), C64::new(s[2], s[3]) / (r - rp)))
            .collect())
    };
    let run_far = |r0: f64, v: (C64, C64), outs: &[f64]| taylor_steps(ode, r0, v, outs, tol);
    let first_near = if outward { r_start < rs } else { r_start <= rs };
    let split = targets
        .iter()
        .position(|&t| if first_near { t > rs } else { t <= rs })
        .unwrap_or(targets.len());
    let (first, second) = targets.split_at(split);
    let run = |near: bool, r0: f64, v: (C64, C64), outs: &[f64]| if near { run_near(r0, v, outs) } else { run_far(r0, v, outs) };
    if second.is_empty() {
        return run(first_near, r_start, init, first);
    }
    let mut outs = first.to_vec();
    outs.push(rs);
    let mut res = run(first_near, r_start, init, &outs)?;
    let at_switch = res.pop().expect("switch point appended");
    res.extend(run(!first_near, rs, at_switch, second)?);
    Ok(res)
}

/// Order of the Taylor-series stepper used beyond the switch radius.
const TAYLOR_STEP_ORDER: usize = 18;

/// Taylor-series integration in r. Each step expands the solution with the
/// ODE recursion and picks the step so the last two terms fall below the
/// tolerance; steps also stay within a quarter of the distance to r₊.
fn taylor_steps(ode: &RadialOde, r0: f64, v: (C64, C64), outs: &[f64], tol: f64) -> Result<Vec<(C64, C64)>> {
    const K: usize = TAYLOR_STEP_ORDER;
    let rp = ode.mode.params.r_plus();
    let (mut r, mut val, mut der) = (r0, v.0, v.1);
    let mut out = Vec::with_capacity(outs.len());
    let mut steps = 0usize;
    for &target in outs {
        while (target - r).abs() > 1e-14 * r.abs() {
            steps += 1;
            if steps > 5_000_000 {
                return Err(KerrError::Integration { r, msg: "step budget exhausted".into() });
            }
            let jet = ode.taylor::<K>(C64::from(r), val, der);
            let mut h = target - r;
            let cap = 0.25 * (r - rp);
            if h.abs() > cap {
                h = cap * h.signum();
            }
            loop {
                let size: f64 = (0..K).map(|k| jet.c[k].norm() * h.abs().powi(k as i32)).fold(0.0, f64::max);
                let tail = jet.c[K - 1].norm() * h.abs().powi(K as i32 - 1) + jet.c[K - 2].norm() * h.abs().powi(K as i32 - 2);
                if tail <= tol * 1e-6 * size || h.abs() < 1e-12 * r {
                    break;
                }
                h *= 0.5;
            }
            let hc = C64::new(h, 0.0);
            val = jet.eval_at(hc);
            der = jet.d().eval_at(hc);
            r += h;
            if !(val.is_finite() && der.is_finite()) {
                return Err(KerrError::Integration { r, msg: "non-finite state".into() });
            }
        }
        r = target;
        out.push((val, der));
    }
    Ok(out)
}

fn relabel(e: KerrError, rp: f64) -> KerrError {
    match e {
        KerrError::Integration { r, msg } => KerrError::Integration { r: rp + r.exp(), msg },
        other => other,
    }
}

/// Radial mode solution sampled on an increasing grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RadialSolution {
    pub mode: ModeSpec,
    pub bc: Bc,
    pub grid: Vec<f64>,
    pub value: Vec<C64>,
    pub derivative: Vec<C64>,
}

/// `n` points log-spaced in r − r₊ across [r_lo, r_hi].
pub fn log_grid(p: &KerrParams, r_lo: f64, r_hi: f64, n: usize) -> Vec<f64> {
    let rp = p.r_plus();
    let (y0, y1) = ((r_lo - rp).ln(), (r_hi - rp).ln());
    (0..n).map(|k| rp + (y0 + (y1 - y0) * k as f64 / (n - 1) as f64).exp()).collect()
}

pub fn integrate_mode(mode: &ModeSpec, bc: Bc, r_range: (f64, f64), tol: f64) -> Result<RadialSolution> {
    let grid = log_grid(&mode.params, r_range.0, r_range.1, DEFAULT_POINTS);
    integrate_mode_on(mode, bc, grid, tol)
}

pub fn integrate_mode_on(mode: &ModeSpec, bc: Bc, grid: Vec<f64>, tol: f64) -> Result<RadialSolution> {
    if grid.len() < 2 || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(KerrError::GridMismatch("grid must be strictly increasing with at least two points".into()));
    }
    let ode = radial_operator_build(mode);
    let rp = mode.params.r_plus();
    let states = match bc {
        Bc::HorizonIn | Bc::HorizonOut => {
            let mut eps = DEFAULT_EPS;
            while rp * (1.0 + eps) >= grid[0] {
                eps *= 0.1;
                if eps < 1e-8 {
                    return Err(KerrError::Domain(format!("grid starts too close to r₊: {}", grid[0])));
                }
            }
            let fb = horizon_frobenius(mode, bc, eps)?;
            propagate(&ode, fb.r0, (fb.value, fb.derivative), &grid, tol)?
        }
        Bc::InfinityIn | Bc::InfinityOut => {
            let r0 = INFINITY_RADIUS * mode.params.m;
            if grid[grid.len() - 1] > r0 {
                return Err(KerrError::Domain(format!("grid extends beyond the asymptotic start {r0}")));
            }
            let asy = infinity_asymptotic(mode, bc, r0)?;
            let rev: Vec<f64> = grid.iter().rev().copied().collect();
            let mut st = propagate(&ode, r0, (asy.value, asy.derivative), &rev, tol)?;
            st.reverse();
            st
        }
    };
    let (value, derivative) = states.into_iter().unzip();
    Ok(RadialSolution { mode: *mode, bc, grid, value, derivative })
}

impl RadialSolution {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Taylor jet at grid point `i` from the ODE.
    pub fn taylor<const K: usize>(&self, i: usize) -> Jet<K> {
        radial_operator_build(&self.mode).taylor(C64::from(self.grid[i]), self.value[i], self.derivative[i])
    }

    /// Maximum relative ODE residual, from ninth-order central differences in
    /// y = ln(r − r₊). The grid must be uniform in y; four points are trimmed at each end.
    pub fn residual(&self) -> Result<f64> {
        let rp = self.mode.params.r_plus();
        let n = self.len();
        if n < 9 {
            return Err(KerrError::GridMismatch("need at least nine points".into()));
        }
        let ys: Vec<f64> = self.grid.iter().map(|r| (r - rp).ln()).collect();
        let h = (ys[n - 1] - ys[0]) / (n - 1) as f64;
        if ys.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-8 * h.abs()) {
            return Err(KerrError::GridMismatch("residual needs a grid uniform in ln(r − r₊)".into()));
        }
        const W: [f64; 4] = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];
        let ode = radial_operator_build(&self.mode);
        let pv: Vec<C64> = (0..n).map(|i| self.derivative[i] * (self.grid[i] - rp)).collect();
        let mut worst = 0.0f64;
        for i in 4..n - 4 {
            let x = self.grid[i] - rp;
            let diff = |f: &[C64]| -> C64 { (0..4).map(|k| (f[i + k + 1] - f[i - k - 1]) * W[k]).sum::<C64>() / h };
            let rpp = ode.second_derivative(self.grid[i], self.value[i], self.derivative[i]);
            let e1 = diff(&self.value) - pv[i];
            let e2 = diff(&pv) - (pv[i] + rpp * x * x);
            let scale = self.value[i].norm() + pv[i].norm() + (rpp * x * x).norm();
            worst = worst.max((e1.norm() + e2.norm()) / scale);
        }
        Ok(worst)
    }

    pub fn scaled(&self, k: C64) -> Self {
        Self { value: self.value.iter().map(|v| v * k).collect(), derivative: self.derivative.iter().map(|v| v * k).collect(), ..self.clone() }
    }
}

/// Integrating factor of the radial ODE. B/A = (s+1)Δ′/Δ, so the weight is Δ^{s+1}.
pub fn wronskian_weight(mode: &ModeSpec, r: f64) -> f64 {
    mode.params.delta(r).powi(mode.s + 1)
}

pub fn wronskian(sol1: &RadialSolution, sol2: &RadialSolution, i: usize) -> Result<C64> {
    if sol1.mode != sol2.mode || sol1.grid != sol2.grid {
        return Err(KerrError::GridMismatch("wronskian needs solutions of one mode on one grid".into()));
    }
    let r = sol1.grid[i];
    Ok((sol1.value[i] * sol2.derivative[i] - sol1.derivative[i] * sol2.value[i]) * wronskian_weight(&sol1.mode, r))
}

/// Largest |W(r) − W(r₀)| / |W(r₀)| over the common grid.
pub fn wronskian_drift(sol1: &RadialSolution, sol2: &RadialSolution) -> Result<f64> {
    let w0 = wronskian(sol1, sol2, 0)?;
    let mut worst = 0.0f64;
    for i in 0..sol1.len() {
        worst = worst.max((wronskian(sol1, sol2, i)? - w0).norm() / w0.norm());
    }
    Ok(worst)
}

/// Order of the Taylor jets used for mode-level operator chains.
pub const CHAIN_ORDER: usize = 20;

/// þ^power (or þ′^power) of the mode at every grid point and angle `theta`,
/// starting from boost weight `weight`. Derivatives come from the ODE, so the
/// result is exact up to the integration error. Returns samples and the final weight.
pub fn mode_tho_apply(sol: &RadialSolution, power: usize, prime: bool, weight: Weight, theta: f64) -> Result<(Vec<C64>, Weight)> {
    if power + 1 >= CHAIN_ORDER {
        return Err(KerrError::InvalidParameter(format!("power {power} exceeds the jet order")));
    }
    let fr = sol.mode.freq();
    let mut wt = weight;
    let mut out = Vec::with_capacity(sol.len());
    for i in 0..sol.len() {
        let k = Kin::<CHAIN_ORDER>::radial(&sol.mode.params, sol.grid[i], theta);
        let f = sol.taylor::<CHAIN_ORDER>(i);
        let (g, w) = if prime { ghp::thop_pow(&k, f, fr, weight, power) } else { ghp::tho_pow(&k, f, fr, weight, power) };
        wt = w;
        out.push(g.val());
    }
    Ok((out, wt))
}

/// Spin flip of a mode solution: R ↦ (Δ/2)^s R with (s, ω, m, S̄) ↦ (−s, −ω, −m, S̄ − s).
pub fn flip_mode_map(sol: &RadialSolution) -> RadialSolution {
    let mode = sol.mode.flipped();
    let p = &sol.mode.params;
    let s = sol.mode.s;
    let mut value = Vec::with_capacity(sol.len());
    let mut derivative = Vec::with_capacity(sol.len());
    for i in 0..sol.len() {
        let r = sol.grid[i];
        let d = p.delta(r);
        let f = (0.5 * d).powi(s);
        let df = s as f64 * (2.0 * r - 2.0 * p.m) / d * f;
        value.push(sol.value[i] * f);
        derivative.push(sol.derivative[i] * f + sol.value[i] * df);
    }
    RadialSolution { mode, bc: sol.bc.flipped(), grid: sol.grid.clone(), value, derivative }
}

/// A V_s-valued mode e^{−iωt+imφ}(R₁(r), R₂(r)) S(θ): first component of
/// weight (s, s), second the conjugate of a weight (−s, −s) field.
#[derive(Clone, Debug, Serialize)]
pub struct ModePair {
    pub s: i32,
    pub freq: Freq,
    pub params: KerrParams,
    pub angular: SpheroidalMode,
    pub grid: Vec<f64>,
    pub first: Vec<(C64, C64)>,
    pub second: Vec<(C64, C64)>,
}

impl ModePair {
    /// Pair (φ_s, conj φ_{−s}) from a spin-s solution and a solution of the flipped mode.
    pub fn from_solutions(phi_s: &RadialSolution, phi_minus_s: &RadialSolution) -> Result<Self> {
        if phi_minus_s.mode != phi_s.mode.flipped() || phi_s.grid != phi_minus_s.grid {
            return Err(KerrError::GridMismatch("pair components must be flipped partners on one grid".into()));
        }
        let first = phi_s.value.iter().zip(&phi_s.derivative).map(|(v, d)| (*v, *d)).collect();
        let second = phi_minus_s.value.iter().zip(&phi_minus_s.derivative).map(|(v, d)| (v.conj(), d.conj())).collect();
        Ok(Self { s: phi_s.mode.s, freq: phi_s.mode.freq(), params: phi_s.mode.params, angular: phi_s.mode.angular()?, grid: phi_s.grid.clone(), first, second })
    }
}

/// Teukolsky potential Γ_a in Boyer–Lindquist components, Kinnersley tetrad.
pub fn gamma_covector_bl(p: &KerrParams, r: f64, theta: f64) -> [C64; 4] {
    let k = Kin::<1>::at(p, Jet::cst(r), Jet::cst(theta));
    let v = |j: Jet<1>| j.val();
    let (rho, tau, gam, beta, alpha) = (v(k.rho), v(k.tau), v(k.gam), v(k.beta), v(k.alpha));
    let (l, n, m, mb) = (k.l().map(v), k.n().map(v), k.m().map(v), k.mb().map(v));
    let g = crate::geometry::metric(p, &crate::geometry::ChartPoint::bl(0.0, r, theta, 0.0)).expect("exterior point");
    let lower = |u: [C64; 4]| -> [C64; 4] {
        let mut o = [C64::new(0.0, 0.0); 4];
        for (a, oa) in o.iter_mut().enumerate() {
            for b in 0..4 {
                *oa += u[b] * g.g[(a, b)];
            }
        }
        o
    };
    let (ll, nl, ml, mbl) = (lower(l), lower(n), lower(m), lower(mb));
    let mut out = [C64::new(0.0, 0.0); 4];
    for a in 0..4 {
        let b_a = tau * mbl[a] - rho * nl[a];
        let w_a = gam * ll[a] - alpha * ml[a] - beta * mbl[a];
        out[a] = b_a - w_a;
    }
    out
}

/// The four products making up J_a[f, h] = t₀ + t₁ − t₂ − t₃.
pub fn current_terms(s: i32, gamma: &[C64; 4], f: [C64; 2], df: [[C64; 2]; 4], h: [C64; 2], dh: [[C64; 2]; 4]) -> [[C64; 4]; 4] {
    let s2 = 2.0 * s as f64;
    let mut t = [[C64::new(0.0, 0.0); 4]; 4];
    for a in 0..4 {
        let g = gamma[a];
        let gb = g.conj();
        let dh1 = dh[a][0] + g * s2 * h[0];
        let dh2 = dh[a][1] - gb * s2 * h[1];
        let df1 = df[a][0] + g * s2 * f[0];
        let df2 = df[a][1] - gb * s2 * f[1];
        t[a] = [f[0].conj() * dh2, f[1].conj() * dh1, df1.conj() * h[1], df2.conj() * h[0]];
    }
    t
}

/// Current J_a[f, h] = ⟨f, D_a h⟩ − ⟨D_a f, h⟩ from component values and gradients, given Γ_a.
pub fn current(s: i32, gamma: &[C64; 4], f: [C64; 2], df: [[C64; 2]; 4], h: [C64; 2], dh: [[C64; 2]; 4]) -> [C64; 4] {
    current_terms(s, gamma, f, df, h, dh).map(|t| t[0] + t[1] - t[2] - t[3])
}

/// Gradient of e^{−iωt+imφ}R(r)S(θ) at t = φ = 0.
fn mode_gradient(fr: Freq, rv: C64, rd: C64, sv: f64, sd: f64) -> (C64, [C64; 4]) {
    let f = rv * sv;
    (f, [fr.dt() * f, rd * sv, rv * sd, fr.dphi() * f])
}

/// Value and gradient of both pair components at grid point `i` and angle θ.
pub fn pair_gradient(pair: &ModePair, i: usize, theta: f64) -> ([C64; 2], [[C64; 2]; 4]) {
    let sj: Jet<2> = pair.angular.eval_jet(Jet::var(theta));
    let (sv, sd) = (sj.val().re, sj.deriv(1).re);
    let (f1, d1) = mode_gradient(pair.freq, pair.first[i].0, pair.first[i].1, sv, sd);
    let (f2, d2) = mode_gradient(pair.freq, pair.second[i].0, pair.second[i].1, sv, sd);
    ([f1, f2], [[d1[0], d2[0]], [d1[1], d2[1]], [d1[2], d2[2]], [d1[3], d2[3]]])
}

/// Sphere-integrated radial flux of J[f, h] at sample radii.
#[derive(Clone, Debug, Serialize)]
pub struct FluxReport {
    pub radii: Vec<f64>,
    pub flux: Vec<C64>,
    /// Flux computed with absolute values of the individual products: the scale
    /// against which cancellation in the flux is judged.
    pub magnitude: Vec<f64>,
    pub max_drift: f64,
}

pub const FLUX_NODES: usize = 48;

/// ∫ √−g J^r dθ dφ at the grid indices `samples`. Conservation makes it r-independent.
pub fn mode_flux(f: &ModePair, h: &ModePair, samples: &[usize]) -> Result<FluxReport> {
    if f.grid != h.grid || f.freq != h.freq || f.s != h.s || f.angular.ell != h.angular.ell {
        return Err(KerrError::GridMismatch("flux needs pairs of one mode on one grid".into()));
    }
    let (xs, ws) = gauss_legendre(FLUX_NODES);
    let p = f.params;
    let mut radii = Vec::with_capacity(samples.len());
    let mut flux = Vec::with_capacity(samples.len());
    let mut magnitude = Vec::with_capacity(samples.len());
    for &i in samples {
        let r = f.grid[i];
        let mut acc = C64::new(0.0, 0.0);
        let mut mag = 0.0;
        for (x, w) in xs.iter().zip(&ws) {
            let th = x.acos();
            let gamma = gamma_covector_bl(&p, r, th);
            let (fv, fd) = pair_gradient(f, i, th);
            let (hv, hd) = pair_gradient(h, i, th);
            let t = current_terms(f.s, &gamma, fv, fd, hv, hd)[1];
            acc += (t[0] + t[1] - t[2] - t[3]) * *w;
            mag += t.iter().map(|v| v.norm()).sum::<f64>() * *w;
        }
        radii.push(r);
        flux.push(-acc * 2.0 * PI * p.delta(r));
        magnitude.push(mag * 2.0 * PI * p.delta(r));
    }
    let f0 = flux[0];
    let scale = flux.iter().fold(0.0f64, |m, v| m.max(v.norm()));
    let max_drift = flux.iter().fold(0.0f64, |m, v| m.max((v - f0).norm())) / scale;
    Ok(FluxReport { radii, flux, magnitude, max_drift })
}

/// Γ̆_a of the conformal tetrad, pulled back to Boyer–Lindquist components.
pub fn conformal_gamma_bl(p: &KerrParams, r: f64, theta: f64) -> Result<[C64; 4]> {
    use crate::geometry::{chart_transform, Chart, ChartPoint};
    let pt = chart_transform(p, &ChartPoint::bl(0.0, r, theta, 0.0), Chart::Conformal)?;
    let g = crate::tetrad::ghp_at(p, &pt, &crate::tetrad::Scaling::Conformal)?;
    let d = p.delta(r);
    let jac_r = [(r * r + p.a * p.a) / d, -1.0 / (r * r), 0.0, p.a / d];
    let mut out = g.gamma;
    out[1] = (0..4).map(|k| g.gamma[k] * jac_r[k]).sum();
    Ok(out)
}

/// BL components of J[f, h] and of the conformal current J̆[x⁻¹f, x⁻¹h] at
/// grid point `i` and angle θ.
pub fn conformal_current_pair(f: &ModePair, h: &ModePair, i: usize, theta: f64) -> Result<([C64; 4], [C64; 4])> {
    let p = f.params;
    let r = f.grid[i];
    let j = current(f.s, &gamma_covector_bl(&p, r, theta), pair_gradient(f, i, theta).0, pair_gradient(f, i, theta).1, pair_gradient(h, i, theta).0, pair_gradient(h, i, theta).1);
    let rescale = |(v, d): ([C64; 2], [[C64; 2]; 4])| {
        let mut dd = d;
        for c in 0..2 {
            for a in 0..4 {
                dd[a][c] = d[a][c] * r;
            }
            dd[1][c] += v[c];
        }
        ([v[0] * r, v[1] * r], dd)
    };
    let (fv, fd) = rescale(pair_gradient(f, i, theta));
    let (hv, hd) = rescale(pair_gradient(h, i, theta));
    let jc = current(f.s, &conformal_gamma_bl(&p, r, theta)?, fv, fd, hv, hd);
    Ok((j, jc))
}
