//! Boundary data on the future horizon H and on past null infinity I⁻, the
//! symplectic form σ on each surface and the Unruh two-point functions w^±.
//!
//! Data are sums of Gaussian bumps per spin-weighted harmonic (ℓ, m). The
//! primary component is sampled on a uniform grid, the second component is
//! derived from it spectrally. Frequency integrals run over Gauss–Legendre
//! panels on [0, K] with the transforms evaluated as direct sums, so both w^+
//! and w^− are sums of manifestly signed terms.
//!
//! Fourier convention: f̂(k) = ∫ f(x) e^{ikx} dx. A translate f(x − b) has
//! transform e^{ibk} f̂(k).

use crate::angular::{cos_couplings, lmin, spheroidal_matrix_from, ts_polynomial, BUFFER_ROWS};
use crate::error::{KerrError, Result};
use crate::geometry::KerrParams;
use crate::jet::{Jet, C64};
use crate::numerics::{fornberg_weights, gauss_legendre};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Zero-padding factor of the spectral derivatives.
pub const PADDING: usize = 4;
/// Endpoint samples must be below this fraction of the peak.
pub const SUPPORT_TOL: f64 = 1e-12;
/// Relative size of the integrand at the frequency cutoff above which a warning is raised.
pub const TAIL_TOL: f64 = 1e-10;
/// Half-width of the centred first-derivative stencil used by σ.
pub const SIGMA_STENCIL: usize = 8;
const GL_PER_PANEL: usize = 16;
/// Phase change allowed across one quadrature panel.
const PANEL_PHASE: f64 = 8.0;
const JET: usize = 6;

const I: C64 = C64::new(0.0, 1.0);
const ZERO: C64 = C64::new(0.0, 0.0);

// ---------------------------------------------------------------- kernels

/// χ₊(x) = x / (1 − e^{−βx}), continuous at 0 with value 1/β.
pub fn chi_plus(x: f64, beta: f64) -> f64 {
    if x == 0.0 {
        1.0 / beta
    } else {
        x / -(-beta * x).exp_m1()
    }
}

/// χ₋(x) = x / (e^{βx} − 1), continuous at 0 with value 1/β.
pub fn chi_minus(x: f64, beta: f64) -> f64 {
    if x == 0.0 {
        1.0 / beta
    } else {
        x / (beta * x).exp_m1()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThermalKernels {
    pub beta: f64,
    pub chi_plus: f64,
    pub chi_minus: f64,
    /// X₊(x) = 1_{x>0} x.
    pub x_plus: f64,
    /// X₋(x) = −1_{x<0} x.
    pub x_minus: f64,
}

pub fn thermal_kernels(x: f64, kappa_plus: f64) -> Result<ThermalKernels> {
    if !(kappa_plus > 0.0) || !kappa_plus.is_finite() {
        return Err(KerrError::InvalidParameter(format!("surface gravity must be positive, got {kappa_plus}")));
    }
    if !x.is_finite() {
        return Err(KerrError::InvalidParameter(format!("kernel argument {x}")));
    }
    let beta = 2.0 * PI / kappa_plus;
    Ok(ThermalKernels {
        beta,
        chi_plus: chi_plus(x, beta),
        chi_minus: chi_minus(x, beta),
        x_plus: if x > 0.0 { x } else { 0.0 },
        x_minus: if x < 0.0 { -x } else { 0.0 },
    })
}

// ---------------------------------------------------------------- profiles

/// amp · exp(−(x − center)² / 2 width² − i carrier x) in the harmonic (ℓ, m).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub ell: i32,
    pub m: i32,
    pub center: f64,
    pub width: f64,
    pub carrier: f64,
    pub amp: C64,
}

impl Bump {
    pub fn value(&self, x: f64) -> C64 {
        let z = (x - self.center) / self.width;
        self.amp * C64::new(-0.5 * z * z, -self.carrier * x).exp()
    }

    /// Taylor jet at `x`, used for exact derivatives.
    pub fn jet<const N: usize>(&self, x: f64) -> Jet<N> {
        let xv: Jet<N> = Jet::var(x);
        let z = (xv - self.center) / self.width;
        ((z * z) * -0.5 - xv * (I * self.carrier)).exp() * self.amp
    }

    /// Frequency beyond which the transform is below e^{−50} of its peak.
    fn bandwidth(&self) -> f64 {
        self.carrier.abs() + 10.0 / self.width
    }

    /// Half-width of the numerical support.
    fn reach(&self) -> f64 {
        8.0 * self.width
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub bumps: Vec<Bump>,
}

impl Profile {
    pub fn new(bumps: Vec<Bump>) -> Self {
        Self { bumps }
    }

    fn bandwidth(&self) -> f64 {
        self.bumps.iter().map(Bump::bandwidth).fold(0.0, f64::max)
    }

    fn validate(&self, s: i32, lmax: i32) -> Result<()> {
        for b in &self.bumps {
            if b.ell < s.abs() || b.ell > lmax || b.m.abs() > b.ell {
                return Err(KerrError::Index(format!("bump in (ell, m) = ({}, {}) outside s = {s}, lmax = {lmax}", b.ell, b.m)));
            }
            if !(b.width > 0.0) || !b.center.is_finite() || !b.carrier.is_finite() || !b.amp.is_finite() {
                return Err(KerrError::InvalidParameter(format!("malformed bump {b:?}")));
            }
        }
        Ok(())
    }

    fn sample(&self, modes: &[(i32, i32)], grid: &UniformGrid) -> Vec<Vec<C64>> {
        modes
            .iter()
            .map(|&(l, m)| {
                let mine: Vec<&Bump> = self.bumps.iter().filter(|b| b.ell == l && b.m == m).collect();
                (0..grid.len).map(|i| mine.iter().map(|b| b.value(grid.point(i))).sum()).collect()
            })
            .collect()
    }
}

/// Which boundary surface data live on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Surface {
    Horizon,
    Scri,
}

/// Parameter ranges of [`random_profile`] and the matching grid.
pub fn random_ranges(surface: Surface) -> (std::ops::Range<f64>, std::ops::Range<f64>, f64, UniformGrid) {
    match surface {
        Surface::Horizon => (-1.6..-0.6, 0.08..0.15, 3.0, UniformGrid::new(-3.0, 1.0, 512).unwrap()),
        Surface::Scri => (-5.0..5.0, 1.0..1.8, 1.5, UniformGrid::new(-24.0, 24.0, 1024).unwrap()),
    }
}

/// One to three bumps with random harmonics, centres, widths, carriers and amplitudes.
pub fn random_profile<R: Rng>(rng: &mut R, s: i32, lmax: i32, surface: Surface) -> Profile {
    let (centers, widths, carrier, _) = random_ranges(surface);
    let count = rng.random_range(1..=3);
    let bumps = (0..count)
        .map(|_| {
            let ell = rng.random_range(s.abs()..=lmax);
            let m = rng.random_range(-ell..=ell);
            Bump {
                ell,
                m,
                center: rng.random_range(centers.clone()),
                width: rng.random_range(widths.clone()),
                carrier: rng.random_range(-carrier..carrier),
                amp: C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
            }
        })
        .collect();
    Profile { bumps }
}

// ---------------------------------------------------------------- grids and modes

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniformGrid {
    pub start: f64,
    pub step: f64,
    pub len: usize,
}

impl UniformGrid {
    /// `len` points from `start` to `end` inclusive; `len` must be a power of two.
    pub fn new(start: f64, end: f64, len: usize) -> Result<Self> {
        if len < 16 || !len.is_power_of_two() {
            return Err(KerrError::GridMismatch(format!("grid length {len} is not a power of two >= 16")));
        }
        if !(end > start) {
            return Err(KerrError::GridMismatch(format!("empty interval [{start}, {end}]")));
        }
        Ok(Self { start, step: (end - start) / (len - 1) as f64, len })
    }

    pub fn point(&self, i: usize) -> f64 {
        self.start + self.step * i as f64
    }

    pub fn end(&self) -> f64 {
        self.point(self.len - 1)
    }

    pub fn extent(&self) -> f64 {
        self.end() - self.start
    }
}

/// Harmonics (ℓ, m) with |s| ≤ ℓ ≤ lmax, ordered by ℓ then m.
pub fn mode_list(s: i32, lmax: i32) -> Vec<(i32, i32)> {
    (s.abs()..=lmax).flat_map(|l| (-l..=l).map(move |m| (l, m))).collect()
}

fn check_spin(s: i32, lmax: i32) -> Result<()> {
    if !(0..=2).contains(&s) {
        return Err(KerrError::InvalidParameter(format!("spin {s} outside 0..=2")));
    }
    if lmax < s || lmax > 12 {
        return Err(KerrError::InvalidParameter(format!("lmax = {lmax} outside {s}..=12")));
    }
    Ok(())
}

fn check_support(data: &[Vec<C64>], what: &str) -> Result<()> {
    let peak = data.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
    for (q, v) in data.iter().enumerate() {
        let edge = v[0].norm().max(v[v.len() - 1].norm());
        if edge > SUPPORT_TOL * peak {
            return Err(KerrError::Support(format!("{what}: mode {q} reaches the grid edge ({edge:e} of peak {peak:e})")));
        }
    }
    Ok(())
}

/// Padded FFT of every mode, a per-bin linear map across modes, inverse FFT.
/// The closure receives the physical frequency k of the bin.
fn spectral_apply(modes: &[Vec<C64>], step: f64, mut apply: impl FnMut(usize, f64, &mut [C64])) -> Vec<Vec<C64>> {
    let n = modes.first().map_or(0, Vec::len);
    let np = n * PADDING;
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(np);
    let inv = planner.plan_fft_inverse(np);
    let mut spec: Vec<Vec<C64>> = modes
        .iter()
        .map(|v| {
            let mut b = v.clone();
            b.resize(np, ZERO);
            fwd.process(&mut b);
            b
        })
        .collect();
    let mut col = vec![ZERO; modes.len()];
    for j in 0..np {
        // rustfft's forward transform pairs bin j with e^{+iκt}; our k multiplies e^{−ikt}.
        let k = -bin_frequency(j, np, step);
        for (q, sp) in spec.iter().enumerate() {
            col[q] = sp[j];
        }
        apply(j, k, &mut col);
        for (q, sp) in spec.iter_mut().enumerate() {
            sp[j] = col[q];
        }
    }
    spec.into_iter()
        .map(|mut b| {
            inv.process(&mut b);
            b.truncate(n);
            b.iter().map(|z| z / np as f64).collect()
        })
        .collect()
}

fn bin_frequency(j: usize, np: usize, step: f64) -> f64 {
    let jj = if j <= np / 2 { j as f64 } else { j as f64 - np as f64 };
    2.0 * PI * jj / (np as f64 * step)
}

/// Direct Fourier sum h Σ f(x_n) e^{ikx_n}.
fn dft_at(v: &[C64], grid: &UniformGrid, k: f64) -> C64 {
    let rot = C64::from_polar(1.0, k * grid.step);
    let mut acc = ZERO;
    let mut ph = ZERO;
    for (n, f) in v.iter().enumerate() {
        if n % 64 == 0 {
            ph = C64::from_polar(1.0, k * grid.point(n));
        }
        acc += f * ph;
        ph *= rot;
    }
    acc * grid.step
}

// ---------------------------------------------------------------- quadrature

#[derive(Clone, Debug)]
struct HalfLine {
    k: Vec<f64>,
    w: Vec<f64>,
}

impl HalfLine {
    fn new(kmax: f64, panel: f64) -> Self {
        let panels = (kmax / panel).ceil().max(1.0) as usize;
        let h = kmax / panels as f64;
        let (x, w) = gauss_legendre(GL_PER_PANEL);
        let mut out = HalfLine { k: Vec::new(), w: Vec::new() };
        for p in 0..panels {
            let mid = (p as f64 + 0.5) * h;
            for (xi, wi) in x.iter().zip(&w) {
                out.k.push(mid + 0.5 * h * xi);
                out.w.push(0.5 * h * wi);
            }
        }
        out
    }
}

fn panel_width(extent: f64) -> f64 {
    PANEL_PHASE / extent
}

/// Sign selecting w^+ (positive frequencies) or w^− (negative frequencies).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

/// A two-point function value with its numerical diagnostics.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoPoint {
    pub value: C64,
    /// Difference to the same sum on panels twice as wide.
    pub quadrature_error: f64,
    /// Integrand magnitude at the cutoff relative to its maximum.
    pub spectral_tail: f64,
    pub tail_warning: bool,
}

/// Σ_nodes W (±k)^{...}: generic half-line sum with an error estimate from coarser panels.
fn half_line_sum(fine: &HalfLine, coarse: &HalfLine, mut integrand: impl FnMut(f64) -> C64) -> TwoPoint {
    let mut peak: f64 = 0.0;
    let mut edge: f64 = 0.0;
    let mut value = ZERO;
    let last = fine.k.len().saturating_sub(1);
    for (i, (&k, &w)) in fine.k.iter().zip(&fine.w).enumerate() {
        let f = integrand(k);
        peak = peak.max(f.norm());
        if i == last {
            edge = f.norm();
        }
        value += f * w;
    }
    let rough: C64 = coarse.k.iter().zip(&coarse.w).map(|(&k, &w)| integrand(k) * w).sum();
    let spectral_tail = if peak > 0.0 { edge / peak } else { 0.0 };
    TwoPoint { value, quadrature_error: (value - rough).norm(), spectral_tail, tail_warning: spectral_tail > TAIL_TOL }
}

fn fd_first_derivative(v: &[C64], step: f64) -> Vec<C64> {
    let n = v.len();
    let width = 2 * SIGMA_STENCIL + 1;
    let mut out = vec![ZERO; n];
    let mut cache: Vec<Option<Vec<f64>>> = vec![None; width];
    for i in 0..n {
        let lo = i.saturating_sub(SIGMA_STENCIL).min(n - width);
        let off = i - lo;
        let w = cache[off].get_or_insert_with(|| {
            let xs: Vec<f64> = (0..width).map(|j| j as f64).collect();
            fornberg_weights(off as f64, &xs, 1).swap_remove(1)
        });
        out[i] = (0..width).map(|j| v[lo + j] * w[j]).sum::<C64>() / step;
    }
    out
}

fn trapezoid(v: &[C64], step: f64) -> C64 {
    let n = v.len();
    (v.iter().sum::<C64>() - (v[0] + v[n - 1]) * 0.5) * step
}

fn l2_norm(data: &[Vec<C64>], step: f64) -> f64 {
    (data.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>() * step).sqrt()
}

// ---------------------------------------------------------------- horizon

/// Data on H in the Kruskal coordinate U: φ_s and φ̄_{−s} = (r₊ − M)^{2s} ∂_U^{2s} φ_s.
#[derive(Clone, Debug)]
pub struct HorizonData {
    pub params: KerrParams,
    pub s: i32,
    pub lmax: i32,
    pub grid: UniformGrid,
    pub profile: Profile,
    pub modes: Vec<(i32, i32)>,
    pub phi: Vec<Vec<C64>>,
    pub phi_bar: Vec<Vec<C64>>,
}

impl HorizonData {
    pub fn norm(&self) -> f64 {
        l2_norm(&self.phi, self.grid.step)
    }

    /// Normalisation c_s = 4 (r₊ − M)^{2s} (r₊² + a²) of w on H.
    pub fn c_s(&self) -> f64 {
        let rp = self.params.r_plus();
        4.0 * (rp - self.params.m).powi(2 * self.s) * (rp * rp + self.params.a * self.params.a)
    }
}

pub fn horizon_data_build(params: &KerrParams, s: i32, lmax: i32, grid: UniformGrid, profile: Profile) -> Result<HorizonData> {
    check_spin(s, lmax)?;
    profile.validate(s, lmax)?;
    let modes = mode_list(s, lmax);
    let phi = profile.sample(&modes, &grid);
    check_support(&phi, "horizon data")?;
    let scale = (params.r_plus() - params.m).powi(2 * s);
    let phi_bar = spectral_apply(&phi, grid.step, |_, k, col| {
        let mult = (-I * k).powi(2 * s) * scale;
        col.iter_mut().for_each(|z| *z *= mult);
    });
    Ok(HorizonData { params: *params, s, lmax, grid, profile, modes, phi, phi_bar })
}

/// (r₊ − M)^{2s} ∂_U^{2s} on grid samples by finite differences of width 2s + 15.
pub fn horizon_b_s(params: &KerrParams, s: i32, grid: &UniformGrid, samples: &[C64]) -> Result<Vec<C64>> {
    if !(0..=2).contains(&s) {
        return Err(KerrError::InvalidParameter(format!("spin {s} outside 0..=2")));
    }
    if samples.len() != grid.len {
        return Err(KerrError::GridMismatch(format!("{} samples on a grid of {}", samples.len(), grid.len)));
    }
    if s == 0 {
        return Ok(samples.to_vec());
    }
    let order = (2 * s) as usize;
    let width = order + 15;
    let n = samples.len();
    let scale = (params.r_plus() - params.m).powi(2 * s) / grid.step.powi(2 * s);
    let xs: Vec<f64> = (0..width).map(|j| j as f64).collect();
    Ok((0..n)
        .map(|i| {
            let lo = i.saturating_sub(width / 2).min(n - width);
            let w = fornberg_weights((i - lo) as f64, &xs, order).swap_remove(order);
            (0..width).map(|j| samples[lo + j] * w[j]).sum::<C64>() * scale
        })
        .collect())
}

fn same_space(a: (&KerrParams, i32, i32, &UniformGrid), b: (&KerrParams, i32, i32, &UniformGrid)) -> Result<()> {
    if a != b {
        return Err(KerrError::GridMismatch("data live on different spaces".into()));
    }
    Ok(())
}

fn horizon_nodes(d1: &HorizonData, d2: &HorizonData) -> Result<(HalfLine, HalfLine)> {
    let kmax = d1.profile.bandwidth().max(d2.profile.bandwidth()).max(1.0);
    if kmax > PI / d1.grid.step {
        return Err(KerrError::GridMismatch(format!("bandwidth {kmax} beyond the grid Nyquist frequency {}", PI / d1.grid.step)));
    }
    let panel = panel_width(d1.grid.extent());
    Ok((HalfLine::new(kmax, panel), HalfLine::new(kmax, 2.0 * panel)))
}

/// w^±_H(φ, φ′) = c_s/2π ∫_{±k>0} |k| k^{2s} conj(φ̂) φ̂′ dk, summed over harmonics.
pub fn w_horizon(d1: &HorizonData, d2: &HorizonData, branch: Branch) -> Result<TwoPoint> {
    same_space((&d1.params, d1.s, d1.lmax, &d1.grid), (&d2.params, d2.s, d2.lmax, &d2.grid))?;
    let (fine, coarse) = horizon_nodes(d1, d2)?;
    let active: Vec<usize> = (0..d1.modes.len()).filter(|&q| d1.phi[q].iter().any(|z| *z != ZERO) && d2.phi[q].iter().any(|z| *z != ZERO)).collect();
    let pref = d1.c_s() / (2.0 * PI);
    let sg = branch.sign();
    let s = d1.s;
    let out = half_line_sum(&fine, &coarse, |kp| {
        let k = sg * kp;
        let inner: C64 = active.iter().map(|&q| dft_at(&d1.phi[q], &d1.grid, k).conj() * dft_at(&d2.phi[q], &d2.grid, k)).sum();
        inner * (kp * k.powi(2 * s) * pref)
    });
    Ok(out)
}

/// σ_H = 2(−1)^s (r₊² + a²) Σ ∫ [conj(φ₁) ∂_U φ̄′ + conj(φ̄) ∂_U φ′₁] dU.
pub fn sigma_horizon(d1: &HorizonData, d2: &HorizonData) -> Result<C64> {
    same_space((&d1.params, d1.s, d1.lmax, &d1.grid), (&d2.params, d2.s, d2.lmax, &d2.grid))?;
    let rp = d1.params.r_plus();
    let pref = 2.0 * (-1f64).powi(d1.s) * (rp * rp + d1.params.a * d1.params.a);
    Ok(sigma_sum(&d1.phi, &d1.phi_bar, &d2.phi, &d2.phi_bar, &d1.grid) * pref)
}

fn sigma_sum(p1: &[Vec<C64>], q1: &[Vec<C64>], p2: &[Vec<C64>], q2: &[Vec<C64>], grid: &UniformGrid) -> C64 {
    let mut total = ZERO;
    for q in 0..p1.len() {
        let dq2 = fd_first_derivative(&q2[q], grid.step);
        let dp2 = fd_first_derivative(&p2[q], grid.step);
        let integrand: Vec<C64> = (0..grid.len).map(|i| p1[q][i].conj() * dq2[i] + q1[q][i].conj() * dp2[i]).collect();
        total += trapezoid(&integrand, grid.step);
    }
    total
}

/// Killing flow by parameter b on H: the dilation U ↦ U e^{κb} with φ_s weighted by e^{−sκb}.
pub fn killing_flow_horizon(d: &HorizonData, b: f64) -> Result<HorizonData> {
    let kb = d.params.kappa_plus() * b;
    let (shrink, weight) = ((-kb).exp(), (-(d.s as f64) * kb).exp());
    let bumps = d
        .profile
        .bumps
        .iter()
        .map(|x| Bump { center: x.center * shrink, width: x.width * shrink, carrier: x.carrier / shrink, amp: x.amp * weight, ..*x })
        .collect();
    horizon_data_build(&d.params, d.s, d.lmax, d.grid, Profile { bumps })
}

// ---------------------------------------------------------------- horizon in Killing time

/// ∂_U^s φ_s in the Killing parameter t on U < 0, U = −e^{−κt}, sampled finely enough for its transform.
struct KillingTime {
    t0: f64,
    dt: f64,
    values: Vec<Vec<C64>>,
    kmax: f64,
}

impl KillingTime {
    fn new(d: &HorizonData) -> Result<Self> {
        let kappa = d.params.kappa_plus();
        let (mut tlo, mut thi, mut kmax) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
        for b in &d.profile.bumps {
            let (ulo, uhi) = (b.center - 1.5 * b.reach(), b.center + 1.5 * b.reach());
            if uhi >= 0.0 {
                return Err(KerrError::Support(format!("bump at U = {} reaches the bifurcation sphere", b.center)));
            }
            tlo = tlo.min(-(-ulo).ln() / kappa);
            thi = thi.max(-(-uhi).ln() / kappa);
            kmax = kmax.max(b.bandwidth() * kappa * ulo.abs());
        }
        if d.profile.bumps.is_empty() {
            return Err(KerrError::InvalidParameter("empty profile".into()));
        }
        let dt = PI / (2.0 * kmax);
        let n = ((thi - tlo) / dt).ceil() as usize + 1;
        let s = d.s as usize;
        let values = d
            .modes
            .iter()
            .map(|&(l, m)| {
                let mine: Vec<&Bump> = d.profile.bumps.iter().filter(|b| b.ell == l && b.m == m).collect();
                (0..n)
                    .map(|i| {
                        let u = -(-kappa * (tlo + dt * i as f64)).exp();
                        mine.iter().map(|b| b.jet::<JET>(u).deriv(s)).sum()
                    })
                    .collect()
            })
            .collect();
        Ok(Self { t0: tlo, dt, values, kmax })
    }

    fn transform(&self, q: usize, k: f64) -> C64 {
        let v = &self.values[q];
        let n = v.len();
        let mut acc = ZERO;
        for (i, f) in v.iter().enumerate() {
            let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
            acc += f * C64::from_polar(w, k * (self.t0 + self.dt * i as f64));
        }
        acc * self.dt
    }

    fn extent(&self) -> f64 {
        self.dt * (self.values.first().map_or(1, Vec::len) - 1) as f64
    }
}

/// Frequency nodes on [−K, K] with P(k) = Σ conj(F̂₁) F̂₂ in Killing time.
struct KillingSpectrum {
    k: Vec<f64>,
    w: Vec<f64>,
    p: Vec<C64>,
    c_s: f64,
    beta: f64,
}

impl KillingSpectrum {
    fn new(d1: &HorizonData, d2: &HorizonData) -> Result<Self> {
        same_space((&d1.params, d1.s, d1.lmax, &d1.grid), (&d2.params, d2.s, d2.lmax, &d2.grid))?;
        let (f1, f2) = (KillingTime::new(d1)?, KillingTime::new(d2)?);
        let kmax = f1.kmax.max(f2.kmax);
        let extent = (f1.extent() + f2.extent()).max(1.0);
        let half = HalfLine::new(kmax, panel_width(extent));
        let (mut k, mut w, mut p) = (Vec::new(), Vec::new(), Vec::new());
        for sg in [-1.0, 1.0] {
            for (&kp, &wk) in half.k.iter().zip(&half.w) {
                let kk = sg * kp;
                k.push(kk);
                w.push(wk);
                p.push((0..d1.modes.len()).map(|q| f1.transform(q, kk).conj() * f2.transform(q, kk)).sum());
            }
        }
        Ok(Self { k, w, p, c_s: d1.c_s(), beta: d1.params.beta() })
    }

    fn sum(&self, mut f: impl FnMut(f64) -> C64) -> C64 {
        self.k.iter().zip(&self.w).zip(&self.p).map(|((&k, &w), &p)| p * f(k) * w).sum::<C64>() * (self.c_s / (2.0 * PI))
    }
}

/// w^±_H evaluated in Killing time with the thermal kernels χ_±, for data supported in U < 0.
pub fn w_horizon_thermal(d1: &HorizonData, d2: &HorizonData, branch: Branch) -> Result<C64> {
    let sp = KillingSpectrum::new(d1, d2)?;
    let beta = sp.beta;
    Ok(sp.sum(|k| C64::from(if branch == Branch::Plus { chi_plus(k, beta) } else { chi_minus(k, beta) })))
}

/// f(x) = (c0 + c1 x) exp(−(x − center)² / 2 width²), a test function for the KMS relation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussTest {
    pub c0: f64,
    pub c1: f64,
    pub center: f64,
    pub width: f64,
}

impl GaussTest {
    pub fn value(&self, x: f64) -> f64 {
        let z = (x - self.center) / self.width;
        (self.c0 + self.c1 * x) * (-0.5 * z * z).exp()
    }

    /// Entire extension of f̂(z) = ∫ f(x) e^{izx} dx.
    pub fn transform(&self, z: C64) -> C64 {
        let (x0, sg) = (self.center, self.width);
        (self.c0 + self.c1 * (x0 + I * sg * sg * z)) * (sg * (2.0 * PI).sqrt()) * (I * z * x0 - z * z * (0.5 * sg * sg)).exp()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KmsReport {
    pub beta: f64,
    /// ∫ f̂(b) w^+(φ, Y_b φ′) db.
    pub lhs: C64,
    /// ∫ f̂(b + iβ) w^−(φ, Y_b φ′) db.
    pub rhs: C64,
    pub residual: f64,
}

/// b-grid sums I_β(k) = Σ db f̂(b + iβ) e^{ibk} at every frequency node.
fn b_transform(sp: &KillingSpectrum, f: &GaussTest, beta: f64) -> (Vec<C64>, Vec<f64>) {
    let kmax = sp.k.iter().fold(0.0f64, |a, k| a.max(k.abs()));
    let sg = f.width;
    let bmax = (2.0 * (40.0 + 0.5 * sg * sg * beta * beta)).sqrt() / sg;
    let db = PI / (2.0 * (kmax + f.center.abs() + 1.0));
    let nb = (bmax / db).ceil() as i64;
    let fh: Vec<C64> = (-nb..=nb).map(|j| f.transform(C64::new(j as f64 * db, beta))).collect();
    let mut out = Vec::with_capacity(sp.k.len());
    let mut mag = Vec::with_capacity(sp.k.len());
    for &k in &sp.k {
        let rot = C64::from_polar(1.0, k * db);
        let mut ph = ZERO;
        let (mut acc, mut abs) = (ZERO, 0.0);
        for (i, v) in fh.iter().enumerate() {
            if i % 64 == 0 {
                ph = C64::from_polar(1.0, k * db * (i as i64 - nb) as f64);
            }
            acc += v * ph;
            abs += v.norm();
            ph *= rot;
        }
        out.push(acc * db);
        mag.push(abs * db);
    }
    (out, mag)
}

/// KMS relation at inverse temperature `beta` for data on H supported in U < 0.
pub fn kms_check(d1: &HorizonData, d2: &HorizonData, f: &GaussTest, beta: f64) -> Result<KmsReport> {
    Ok(kms_scan(d1, d2, f, &[beta])?.remove(0))
}

/// KMS residuals for each trial inverse temperature; the kernels keep the physical β.
pub fn kms_scan(d1: &HorizonData, d2: &HorizonData, f: &GaussTest, betas: &[f64]) -> Result<Vec<KmsReport>> {
    if !(f.width > 0.0) {
        return Err(KerrError::InvalidParameter("test function width must be positive".into()));
    }
    let sp = KillingSpectrum::new(d1, d2)?;
    let beta0 = sp.beta;
    let (i0, m0) = b_transform(&sp, f, 0.0);
    let lhs = weighted(&sp, &i0, |k| chi_plus(k, beta0));
    let lhs_scale = weighted_abs(&sp, &m0, |k| chi_plus(k, beta0));
    betas
        .iter()
        .map(|&beta| {
            if !(beta > 0.0) {
                return Err(KerrError::InvalidParameter(format!("trial beta {beta}")));
            }
            let (ib, mb) = b_transform(&sp, f, beta);
            let rhs = weighted(&sp, &ib, |k| chi_minus(k, beta0));
            let scale = lhs.norm().max(rhs.norm()).max(lhs_scale).max(weighted_abs(&sp, &mb, |k| chi_minus(k, beta0)));
            Ok(KmsReport { beta, lhs, rhs, residual: (lhs - rhs).norm() / scale })
        })
        .collect()
}

fn weighted(sp: &KillingSpectrum, ib: &[C64], kernel: impl Fn(f64) -> f64) -> C64 {
    (0..sp.k.len()).map(|i| sp.p[i] * ib[i] * (kernel(sp.k[i]) * sp.w[i])).sum::<C64>() * (sp.c_s / (2.0 * PI))
}

fn weighted_abs(sp: &KillingSpectrum, mb: &[f64], kernel: impl Fn(f64) -> f64) -> f64 {
    (0..sp.k.len()).map(|i| sp.p[i].norm() * mb[i] * kernel(sp.k[i]).abs() * sp.w[i]).sum::<f64>() * (sp.c_s / (2.0 * PI))
}

// ---------------------------------------------------------------- past null infinity

type PerM = Vec<DMatrix<f64>>;

/// Precomputed A_s^{-1} blocks on a fixed grid at I⁻, per frequency and azimuthal number.
pub struct ScriSpace {
    pub params: KerrParams,
    pub s: i32,
    pub lmax: i32,
    pub grid: UniformGrid,
    pub kmax: f64,
    modes: Vec<(i32, i32)>,
    /// (m, indices into `modes` ordered by ℓ).
    groups: Vec<(i32, Vec<usize>)>,
    fine: HalfLine,
    coarse: HalfLine,
    fine_ops: [Vec<PerM>; 2],
    coarse_ops: [Vec<PerM>; 2],
    bins: Vec<Option<PerM>>,
}

/// A_s^{-1} restricted to ℓ ≤ lmax: V diag(1/N) Vᵀ over the spheroidal eigenvectors at c = ak.
fn a_inverse_block(p: &KerrParams, s: i32, m: i32, lmax: i32, k: f64, couplings: &(DMatrix<f64>, DMatrix<f64>)) -> Result<DMatrix<f64>> {
    let l0 = lmin(s, m);
    let dim = (lmax - l0 + 1).max(0) as usize;
    if s == 0 || dim == 0 {
        return Ok(DMatrix::identity(dim, dim));
    }
    let eig = SymmetricEigen::new(spheroidal_matrix_from(s, m, p.a * k, couplings));
    let mut out = DMatrix::zeros(dim, dim);
    for (j, &lam) in eig.eigenvalues.iter().enumerate() {
        let v = eig.eigenvectors.column(j);
        let head = v.rows(0, dim);
        let n = ts_polynomial(p, s, k, m, 0.5 * lam)?;
        if n <= 0.0 {
            if head.norm() > 1e-10 {
                return Err(KerrError::BoundViolation(format!("N = {n} at k = {k}, m = {m}")));
            }
            continue;
        }
        out += head * head.transpose() / n;
    }
    Ok(out)
}

impl ScriSpace {
    pub fn new(params: &KerrParams, s: i32, lmax: i32, grid: UniformGrid, kmax: f64) -> Result<Self> {
        check_spin(s, lmax)?;
        if !(kmax > 0.0) || kmax > PI / grid.step {
            return Err(KerrError::InvalidParameter(format!("kmax = {kmax} outside (0, {}]", PI / grid.step)));
        }
        let modes = mode_list(s, lmax);
        let groups: Vec<(i32, Vec<usize>)> = (-lmax..=lmax)
            .map(|m| (m, (0..modes.len()).filter(|&q| modes[q].1 == m).collect()))
            .collect();
        let couplings: Vec<(DMatrix<f64>, DMatrix<f64>)> = (-lmax..=lmax)
            .map(|m| {
                let lint = (lmax + BUFFER_ROWS + 4 + (2.0 * params.a.abs() * kmax).ceil() as i32).max(s + m.abs() + BUFFER_ROWS);
                cos_couplings(s, m, lint)
            })
            .collect();
        let ops_at = |k: f64| -> Result<PerM> { (-lmax..=lmax).zip(&couplings).map(|(m, c)| a_inverse_block(params, s, m, lmax, k, c)).collect() };
        let panel = panel_width(grid.extent());
        let fine = HalfLine::new(kmax, panel);
        let coarse = HalfLine::new(kmax, 2.0 * panel);
        let signed = |h: &HalfLine| -> Result<[Vec<PerM>; 2]> {
            Ok([h.k.iter().map(|&k| ops_at(k)).collect::<Result<_>>()?, h.k.iter().map(|&k| ops_at(-k)).collect::<Result<_>>()?])
        };
        let fine_ops = signed(&fine)?;
        let coarse_ops = signed(&coarse)?;
        let np = grid.len * PADDING;
        let bins = (0..np)
            .map(|j| {
                let k = -bin_frequency(j, np, grid.step);
                if k.abs() <= kmax { ops_at(k).map(Some) } else { Ok(None) }
            })
            .collect::<Result<_>>()?;
        Ok(Self { params: *params, s, lmax, grid, kmax, modes, groups, fine, coarse, fine_ops, coarse_ops, bins })
    }

    pub fn modes(&self) -> &[(i32, i32)] {
        &self.modes
    }

    /// The A_s^{-1} block for azimuthal number m at an arbitrary frequency.
    pub fn a_inverse(&self, k: f64, m: i32) -> Result<DMatrix<f64>> {
        if m.abs() > self.lmax {
            return Err(KerrError::Index(format!("m = {m} beyond lmax = {}", self.lmax)));
        }
        let lint = (self.lmax + BUFFER_ROWS + 4 + (2.0 * (self.params.a * k).abs()).ceil() as i32).max(self.s + m.abs() + BUFFER_ROWS);
        a_inverse_block(&self.params, self.s, m, self.lmax, k, &cos_couplings(self.s, m, lint))
    }

    fn quad_form(&self, ops: &PerM, x: &[C64], y: &[C64]) -> C64 {
        let mut acc = ZERO;
        for ((_, idx), mat) in self.groups.iter().zip(ops) {
            for (a, &qa) in idx.iter().enumerate() {
                if x[qa] == ZERO {
                    continue;
                }
                let row: C64 = idx.iter().enumerate().map(|(b, &qb)| y[qb] * mat[(a, b)]).sum();
                acc += x[qa].conj() * row;
            }
        }
        acc
    }
}

/// Data on I⁻ in the retarded-time coordinate 𝔱: the primary ψ̄_{−s} and ψ_s = (2∂_𝔱)^{2s} A_s^{-1} ψ̄_{−s}.
#[derive(Clone, Debug)]
pub struct ScriData {
    pub s: i32,
    pub profile: Profile,
    pub psi_bar: Vec<Vec<C64>>,
    pub psi: Vec<Vec<C64>>,
    grid: UniformGrid,
}

impl ScriData {
    pub fn norm(&self) -> f64 {
        l2_norm(&self.psi_bar, self.grid.step)
    }
}

pub fn scri_data_build(space: &ScriSpace, profile: Profile) -> Result<ScriData> {
    profile.validate(space.s, space.lmax)?;
    let psi_bar = profile.sample(&space.modes, &space.grid);
    check_support(&psi_bar, "scri data")?;
    let s = space.s;
    let mut scratch = vec![ZERO; space.modes.len()];
    let psi = spectral_apply(&psi_bar, space.grid.step, |j, k, col| {
        let Some(ops) = &space.bins[j] else {
            col.iter_mut().for_each(|z| *z = ZERO);
            return;
        };
        let mult = (-2.0 * I * k).powi(2 * s);
        scratch.iter_mut().for_each(|z| *z = ZERO);
        for ((_, idx), mat) in space.groups.iter().zip(ops) {
            for (a, &qa) in idx.iter().enumerate() {
                scratch[qa] = idx.iter().enumerate().map(|(b, &qb)| col[qb] * mat[(a, b)]).sum::<C64>() * mult;
            }
        }
        col.copy_from_slice(&scratch);
    });
    Ok(ScriData { s, profile, psi_bar, psi, grid: space.grid })
}

fn check_scri(space: &ScriSpace, d: &ScriData) -> Result<()> {
    if d.grid != space.grid || d.s != space.s || d.psi_bar.len() != space.modes.len() {
        return Err(KerrError::GridMismatch("scri data built on a different space".into()));
    }
    Ok(())
}

/// Transforms of the primary component at every node of a half line, for one sign.
fn scri_transforms(d: &ScriData, nodes: &HalfLine, sign: f64) -> Vec<Vec<C64>> {
    let active: Vec<bool> = d.psi_bar.iter().map(|v| v.iter().any(|z| *z != ZERO)).collect();
    nodes
        .k
        .iter()
        .map(|&kp| d.psi_bar.iter().zip(&active).map(|(v, &on)| if on { dft_at(v, &d.grid, sign * kp) } else { ZERO }).collect())
        .collect()
}

/// Q(k) = ⟨ψ̂, A_s^{-1}(k) ψ̂′⟩ times |k| k^{2s}, per node of one half line.
fn scri_integrand(space: &ScriSpace, d1: &ScriData, d2: &ScriData, nodes: &HalfLine, ops: &[PerM], sign: f64) -> Vec<C64> {
    let (t1, t2) = (scri_transforms(d1, nodes, sign), scri_transforms(d2, nodes, sign));
    let s = space.s;
    nodes.k.iter().enumerate().map(|(i, &kp)| space.quad_form(&ops[i], &t1[i], &t2[i]) * (kp * (sign * kp).powi(2 * s))).collect()
}

/// w^±_I(ψ, ψ′) = 2^{2s+2}/2π ∫_{±k>0} |k| k^{2s} ⟨ψ̂, A_s^{-1} ψ̂′⟩ dk.
pub fn w_scri(space: &ScriSpace, d1: &ScriData, d2: &ScriData, branch: Branch) -> Result<TwoPoint> {
    check_scri(space, d1)?;
    check_scri(space, d2)?;
    let pref = 4f64.powi(space.s + 1) / (2.0 * PI);
    let side = if branch == Branch::Plus { 0 } else { 1 };
    let sign = branch.sign();
    let fine = scri_integrand(space, d1, d2, &space.fine, &space.fine_ops[side], sign);
    let coarse = scri_integrand(space, d1, d2, &space.coarse, &space.coarse_ops[side], sign);
    let value: C64 = fine.iter().zip(&space.fine.w).map(|(f, w)| f * w).sum::<C64>() * pref;
    let rough: C64 = coarse.iter().zip(&space.coarse.w).map(|(f, w)| f * w).sum::<C64>() * pref;
    let peak = fine.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let edge = fine.last().map_or(0.0, |z| z.norm());
    let spectral_tail = if peak > 0.0 { edge / peak } else { 0.0 };
    Ok(TwoPoint { value, quadrature_error: (value - rough).norm(), spectral_tail, tail_warning: spectral_tail > TAIL_TOL })
}

/// σ_I = 2(−1)^s Σ ∫ [conj(ψ̄) ∂_𝔱 ψ′ + conj(ψ) ∂_𝔱 ψ̄′] d𝔱.
pub fn sigma_scri(space: &ScriSpace, d1: &ScriData, d2: &ScriData) -> Result<C64> {
    check_scri(space, d1)?;
    check_scri(space, d2)?;
    Ok(sigma_sum(&d1.psi_bar, &d1.psi, &d2.psi_bar, &d2.psi, &space.grid) * (2.0 * (-1f64).powi(space.s)))
}

/// Killing flow on I⁻: translation 𝔱 ↦ 𝔱 − b.
pub fn killing_flow_scri(space: &ScriSpace, d: &ScriData, b: f64) -> Result<ScriData> {
    let bumps = d.profile.bumps.iter().map(|x| Bump { center: x.center + b, amp: x.amp * C64::from_polar(1.0, x.carrier * b), ..*x }).collect();
    scri_data_build(space, Profile { bumps })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundStateReport {
    pub branch: Branch,
    /// ∫ f̂(b) w^±(ψ, Y_b ψ′) db with f supported on the half line that should annihilate it.
    pub integral: C64,
    pub scale: f64,
}

impl GroundStateReport {
    pub fn relative(&self) -> f64 {
        if self.scale > 0.0 {
            self.integral.norm() / self.scale
        } else {
            self.integral.norm()
        }
    }
}

/// Ground-state property at I⁻: with f(x) = |x|ⁿ e^{−|x|} on the half line x·(±1) > 0,
/// ∫ f̂(b) w^±(ψ, Y_b ψ′) db vanishes.
pub fn ground_state_check(space: &ScriSpace, d1: &ScriData, d2: &ScriData, branch: Branch, n: u32) -> Result<GroundStateReport> {
    check_scri(space, d1)?;
    check_scri(space, d2)?;
    let sign = branch.sign();
    let side = if branch == Branch::Plus { 0 } else { 1 };
    let q = scri_integrand(space, d1, d2, &space.fine, &space.fine_ops[side], sign);
    let nf = (1..=n).map(|j| j as f64).product::<f64>();
    // f̂(b) = n! / (1 ∓ ib)^{n+1}
    let fhat = |b: f64| C64::from(nf) / (C64::new(1.0, -sign * b)).powi(n as i32 + 1);
    let db = PI / (4.0 * space.kmax);
    let bmax = 60.0f64.max(4.0 * n as f64);
    let nb = (bmax / db).ceil() as i64;
    let fh: Vec<C64> = (-nb..=nb).map(|j| fhat(j as f64 * db)).collect();
    let fabs: f64 = fh.iter().map(|z| z.norm()).sum::<f64>() * db;
    let pref = 4f64.powi(space.s + 1) / (2.0 * PI);
    let (mut integral, mut scale) = (ZERO, 0.0);
    for (i, &kp) in space.fine.k.iter().enumerate() {
        let k = sign * kp;
        let rot = C64::from_polar(1.0, k * db);
        let mut ph = ZERO;
        let mut acc = ZERO;
        for (j, v) in fh.iter().enumerate() {
            if j % 64 == 0 {
                ph = C64::from_polar(1.0, k * db * (j as i64 - nb) as f64);
            }
            acc += v * ph;
            ph *= rot;
        }
        integral += q[i] * acc * db * space.fine.w[i];
        scale += q[i].norm() * fabs * space.fine.w[i];
    }
    Ok(GroundStateReport { branch, integral: integral * pref, scale: scale * pref })
}
