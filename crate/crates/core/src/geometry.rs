//! Kerr background in Boyer–Lindquist, Kerr-star, star-Kerr, Kruskal (KBL) and
//! conformally compactified coordinates.
//!
//! Signature is (+,−,−,−). Coordinate orderings:
//! - `BoyerLindquist`: (t, r, θ, φ)
//! - `KerrStar`: (t*, r, θ, φ*) with t* = t + r_*, φ* = φ + A
//! - `StarKerr`: (*t, r, θ, *φ) with *t = t − r_*, *φ = φ − A
//! - `Kruskal`: (U, V, θ, φ₊) with φ₊ = φ − Ω₊ t
//! - `Conformal`: (t*, x, θ, φ*) with x = 1/r, metric ğ = x² g
//!
//! All component formulas are written once, generically over [`Jet`], so the
//! same code yields values, Christoffel symbols and curvature.

use crate::error::{KerrError, Result};
use crate::jet::{Jet, C64};
use crate::numerics::brent;
use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KerrParams {
    #[serde(rename = "M")]
    pub m: f64,
    pub a: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Horizons {
    pub r_minus: f64,
    pub r_plus: f64,
    pub kappa_minus: f64,
    pub kappa_plus: f64,
    pub omega_plus: f64,
}

impl KerrParams {
    pub fn new(m: f64, a: f64) -> Result<Self> {
        if !(m > 0.0) || !m.is_finite() || !a.is_finite() {
            return Err(KerrError::InvalidParameter(format!("mass must be positive and finite (M = {m}, a = {a})")));
        }
        if a.abs() >= m {
            return Err(KerrError::Extremality { m, a });
        }
        Ok(Self { m, a })
    }

    pub fn horizons(&self) -> Horizons {
        let root = (self.m * self.m - self.a * self.a).sqrt();
        let rp = self.m + root;
        let rm = self.m - root;
        let a2 = self.a * self.a;
        Horizons {
            r_minus: rm,
            r_plus: rp,
            kappa_minus: (rp - rm) / (2.0 * (rm * rm + a2)),
            kappa_plus: (rp - rm) / (2.0 * (rp * rp + a2)),
            omega_plus: self.a / (rp * rp + a2),
        }
    }

    pub fn r_plus(&self) -> f64 {
        self.horizons().r_plus
    }

    pub fn r_minus(&self) -> f64 {
        self.horizons().r_minus
    }

    pub fn kappa_plus(&self) -> f64 {
        self.horizons().kappa_plus
    }

    /// Inverse Hawking temperature 2π/κ₊.
    pub fn beta(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.kappa_plus()
    }

    pub fn delta(&self, r: f64) -> f64 {
        r * r - 2.0 * self.m * r + self.a * self.a
    }

    pub fn rho2(&self, r: f64, theta: f64) -> f64 {
        let c = theta.cos();
        r * r + self.a * self.a * c * c
    }

    pub fn sigma2(&self, r: f64, theta: f64) -> f64 {
        let s = theta.sin();
        let ra = r * r + self.a * self.a;
        ra * ra - self.a * self.a * s * s * self.delta(r)
    }

    pub fn delta_j<const N: usize>(&self, r: Jet<N>) -> Jet<N> {
        r * r - r * (2.0 * self.m) + self.a * self.a
    }

    /// ζ = r − i a cosθ.
    pub fn zeta(&self, r: f64, theta: f64) -> C64 {
        C64::new(r, -self.a * theta.cos())
    }

    /// Ψ₂ = −M/ζ³ in the Kinnersley frame.
    pub fn psi2(&self, r: f64, theta: f64) -> C64 {
        -self.m / self.zeta(r, theta).powi(3)
    }

    /// Canonical Kruskal function G(r) = −e^{−2κ₊ r}(r − r₋)^{r₋/r₊}.
    pub fn kruskal_g(&self, r: f64) -> f64 {
        let h = self.horizons();
        -(-2.0 * h.kappa_plus * r).exp() * (r - h.r_minus).powf(h.r_minus / h.r_plus)
    }

    pub fn kruskal_g_j<const N: usize>(&self, r: Jet<N>) -> Jet<N> {
        let h = self.horizons();
        let e = (r * (-2.0 * h.kappa_plus)).exp();
        let p = if h.r_minus == 0.0 { Jet::one() } else { (r - h.r_minus).powf(h.r_minus / h.r_plus) };
        -(e * p)
    }

    /// Forward map r ↦ UV = (r − r₊)/G(r).
    pub fn kruskal_uv(&self, r: f64) -> f64 {
        (r - self.r_plus()) / self.kruskal_g(r)
    }
}

/// Which radial block a point belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Block {
    Exterior,
    Interior,
}

pub fn block_of(p: &KerrParams, r: f64) -> Result<Block> {
    let h = p.horizons();
    if r > h.r_plus {
        Ok(Block::Exterior)
    } else if r > h.r_minus && r < h.r_plus {
        Ok(Block::Interior)
    } else {
        Err(KerrError::Domain(format!("r = {r} is not inside a block (r- = {}, r+ = {})", h.r_minus, h.r_plus)))
    }
}

/// Default base points for the tortoise and twist functions.
pub fn default_r0(p: &KerrParams, block: Block) -> f64 {
    let h = p.horizons();
    match block {
        Block::Exterior => 3.0 * p.m,
        Block::Interior => 0.5 * (h.r_plus + h.r_minus),
    }
}

/// Zero-constant antiderivatives of (r²+a²)/Δ and a/Δ by partial fractions.
pub fn tortoise_canonical(p: &KerrParams, r: f64) -> (f64, f64) {
    let h = p.horizons();
    let (rp, rm) = (h.r_plus, h.r_minus);
    let w = rp - rm;
    let lp = (r - rp).abs().ln();
    let lm = if rm == 0.0 { 0.0 } else { (r - rm).abs().ln() };
    let rs = r + 2.0 * p.m * rp / w * lp - 2.0 * p.m * rm / w * lm;
    let aa = p.a / w * (lp - (r - rm).abs().ln());
    (rs, aa)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TortoiseTwist {
    pub r_star: f64,
    pub twist: f64,
}

/// r_*(r) = ∫_{r0}^{r} (r'²+a²)/Δ dr' and A(r) = ∫_{r0}^{r} a/Δ dr'.
pub fn tortoise_and_twist(p: &KerrParams, r: f64, r0: f64) -> Result<TortoiseTwist> {
    let b = block_of(p, r)?;
    let b0 = block_of(p, r0)?;
    if b != b0 {
        return Err(KerrError::Domain(format!("r = {r} and r0 = {r0} lie in different blocks")));
    }
    let (s, a) = tortoise_canonical(p, r);
    let (s0, a0) = tortoise_canonical(p, r0);
    Ok(TortoiseTwist { r_star: s - s0, twist: a - a0 })
}

/// Solve G(r) = (r − r₊)/UV for r > r₋. UV = 0 returns r₊ exactly.
pub fn kruskal_radius(p: &KerrParams, uv: f64) -> Result<f64> {
    let h = p.horizons();
    let (rp, rm, k) = (h.r_plus, h.r_minus, h.kappa_plus);
    let q = rm / rp;
    if uv == 0.0 {
        return Ok(rp);
    }
    if !uv.is_finite() {
        return Err(KerrError::NoRoot(format!("UV = {uv}")));
    }
    let target = uv.abs().ln();
    if uv < 0.0 {
        // Exterior: r = r₊ + e^u, strictly increasing residual in u.
        let f = |u: f64| {
            let e = u.exp();
            u + 2.0 * k * (rp + e) - if rm == 0.0 { 0.0 } else { q * (rp - rm + e).ln() } - target
        };
        let mut lo = target - 2.0 * k * rp - 1.0;
        while f(lo) > 0.0 {
            lo -= 1.0 + lo.abs();
        }
        let mut hi = lo + 1.0;
        while f(hi) < 0.0 {
            hi += 1.0 + (hi - lo);
            if hi > 700.0 {
                return Err(KerrError::NoRoot(format!("UV = {uv} beyond representable range")));
            }
        }
        let u = brent(f, lo, hi, 1e-15, 300)?;
        Ok(rp + u.exp())
    } else {
        // Interior: r = r₋ + (r₊ − r₋)/(1 + e^w), increasing residual in w.
        let w0 = rp - rm;
        let r_of = |w: f64| {
            if w > 0.0 {
                let e = (-w).exp();
                rm + w0 * e / (1.0 + e)
            } else {
                rm + w0 / (1.0 + w.exp())
            }
        };
        let f = |w: f64| {
            let r = r_of(w);
            let lp = if w > 0.0 { (w0 / (1.0 + (-w).exp())).ln() } else { (w0).ln() + w - (1.0 + w.exp()).ln() };
            let lm = if rm == 0.0 { 0.0 } else { q * (r - rm).ln() };
            lp + 2.0 * k * r - lm - target
        };
        let mut lo = -1.0;
        while f(lo) > 0.0 {
            lo -= 1.0 + lo.abs();
            if lo < -800.0 {
                return Err(KerrError::NoRoot(format!("UV = {uv} too close to the horizon branch")));
            }
        }
        let mut hi = 1.0;
        while f(hi) < 0.0 {
            hi += 1.0 + hi.abs();
            if hi > 700.0 {
                return Err(KerrError::NoRoot(format!("UV = {uv} admits no radius r > r-")));
            }
        }
        let w = brent(f, lo, hi, 1e-15, 300)?;
        Ok(r_of(w))
    }
}

/// Jet lift of [`kruskal_radius`] by Newton refinement on F(r) = r − r₊ − UV·G(r).
pub fn kruskal_radius_jet<const N: usize>(p: &KerrParams, uv: Jet<N>) -> Result<Jet<N>> {
    let r0 = kruskal_radius(p, uv.re())?;
    let h = p.horizons();
    let g0 = p.kruskal_g(r0);
    let dg0 = g0 * (-2.0 * h.kappa_plus + if h.r_minus == 0.0 { 0.0 } else { h.r_minus / h.r_plus / (r0 - h.r_minus) });
    let fprime = 1.0 - uv.re() * dg0;
    let mut r = Jet::<N>::cst(r0);
    for _ in 0..=N {
        let f = r - h.r_plus - uv * p.kruskal_g_j(r);
        r -= f / fprime;
    }
    Ok(r)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Chart {
    BoyerLindquist,
    KerrStar,
    StarKerr,
    Kruskal,
    Conformal,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartPoint {
    pub chart: Chart,
    pub coords: [f64; 4],
}

impl ChartPoint {
    pub fn new(chart: Chart, coords: [f64; 4]) -> Self {
        Self { chart, coords }
    }

    pub fn bl(t: f64, r: f64, theta: f64, phi: f64) -> Self {
        Self::new(Chart::BoyerLindquist, [t, r, theta, phi])
    }
}

/// Base points of the tortoise/twist functions for the Kerr-star, star-Kerr and
/// conformal charts. The Kruskal chart always uses the canonical zero-constant
/// tortoise coordinate, which is what makes UV = (r − r₊)/G(r) hold.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TortoiseGauge {
    pub r0_exterior: f64,
    pub r0_interior: f64,
}

impl TortoiseGauge {
    pub fn default_for(p: &KerrParams) -> Self {
        Self { r0_exterior: default_r0(p, Block::Exterior), r0_interior: default_r0(p, Block::Interior) }
    }

    fn r0(&self, b: Block) -> f64 {
        match b {
            Block::Exterior => self.r0_exterior,
            Block::Interior => self.r0_interior,
        }
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if !(theta > 0.0 && theta < std::f64::consts::PI) {
        return Err(KerrError::Domain(format!("theta = {theta} must lie in (0, pi)")));
    }
    Ok(())
}

/// Validate a point against its chart domain; returns r.
pub fn chart_radius(p: &KerrParams, pt: &ChartPoint) -> Result<f64> {
    let h = p.horizons();
    let c = pt.coords;
    check_theta(c[2])?;
    match pt.chart {
        Chart::BoyerLindquist => {
            block_of(p, c[1])?;
            Ok(c[1])
        }
        Chart::KerrStar | Chart::StarKerr => {
            if c[1] > h.r_minus {
                Ok(c[1])
            } else {
                Err(KerrError::Domain(format!("r = {} must exceed r- = {}", c[1], h.r_minus)))
            }
        }
        Chart::Kruskal => kruskal_radius(p, c[0] * c[1]),
        Chart::Conformal => {
            let x = c[1];
            if !(x >= 0.0 && x < 1.0 / (4.0 * p.m)) {
                return Err(KerrError::Domain(format!("x = {x} outside [0, 1/(4M))")));
            }
            Ok(if x == 0.0 { f64::INFINITY } else { 1.0 / x })
        }
    }
}

fn to_bl(p: &KerrParams, pt: &ChartPoint, gauge: &TortoiseGauge) -> Result<[f64; 4]> {
    let h = p.horizons();
    let c = pt.coords;
    check_theta(c[2])?;
    match pt.chart {
        Chart::BoyerLindquist => {
            block_of(p, c[1])?;
            Ok(c)
        }
        Chart::KerrStar | Chart::StarKerr => {
            let b = block_of(p, c[1]).map_err(|e| KerrError::Overlap(e.to_string()))?;
            let tt = tortoise_and_twist(p, c[1], gauge.r0(b))?;
            let sg = if pt.chart == Chart::KerrStar { 1.0 } else { -1.0 };
            Ok([c[0] - sg * tt.r_star, c[1], c[2], c[3] - sg * tt.twist])
        }
        Chart::Kruskal => {
            let (u, v) = (c[0], c[1]);
            let k = h.kappa_plus;
            let t = if u < 0.0 && v > 0.0 {
                (v / -u).ln() / (2.0 * k)
            } else if u > 0.0 && v > 0.0 {
                (v / u).ln() / (2.0 * k)
            } else {
                return Err(KerrError::Overlap(format!("Kruskal point (U, V) = ({u}, {v}) lies outside regions I and II")));
            };
            let r = kruskal_radius(p, u * v)?;
            Ok([t, r, c[2], c[3] + h.omega_plus * t])
        }
        Chart::Conformal => {
            let x = c[1];
            if !(x > 0.0) {
                return Err(KerrError::Overlap("x = 0 is null infinity, not part of the BL chart".into()));
            }
            let r = 1.0 / x;
            let b = block_of(p, r).map_err(|e| KerrError::Overlap(e.to_string()))?;
            let tt = tortoise_and_twist(p, r, gauge.r0(b))?;
            Ok([c[0] - tt.r_star, r, c[2], c[3] - tt.twist])
        }
    }
}

fn from_bl(p: &KerrParams, bl: [f64; 4], target: Chart, gauge: &TortoiseGauge) -> Result<[f64; 4]> {
    let h = p.horizons();
    let [t, r, th, ph] = bl;
    let b = block_of(p, r)?;
    match target {
        Chart::BoyerLindquist => Ok(bl),
        Chart::KerrStar | Chart::StarKerr => {
            let tt = tortoise_and_twist(p, r, gauge.r0(b))?;
            let sg = if target == Chart::KerrStar { 1.0 } else { -1.0 };
            Ok([t + sg * tt.r_star, r, th, ph + sg * tt.twist])
        }
        Chart::Kruskal => {
            let (rs, _) = tortoise_canonical(p, r);
            let k = h.kappa_plus;
            let (u, v) = match b {
                Block::Exterior => (-(-k * (t - rs)).exp(), (k * (t + rs)).exp()),
                Block::Interior => ((-k * (t - rs)).exp(), (k * (t + rs)).exp()),
            };
            Ok([u, v, th, ph - h.omega_plus * t])
        }
        Chart::Conformal => {
            if b != Block::Exterior {
                return Err(KerrError::Overlap("conformal chart covers the exterior only".into()));
            }
            let x = 1.0 / r;
            if x >= 1.0 / (4.0 * p.m) {
                return Err(KerrError::Overlap(format!("x = {x} outside [0, 1/(4M))")));
            }
            let tt = tortoise_and_twist(p, r, gauge.r0(b))?;
            Ok([t + tt.r_star, x, th, ph + tt.twist])
        }
    }
}

/// Exact coordinate change between charts, through Boyer–Lindquist.
pub fn chart_transform(p: &KerrParams, pt: &ChartPoint, target: Chart) -> Result<ChartPoint> {
    chart_transform_with(p, pt, target, &TortoiseGauge::default_for(p))
}

pub fn chart_transform_with(p: &KerrParams, pt: &ChartPoint, target: Chart, gauge: &TortoiseGauge) -> Result<ChartPoint> {
    if pt.chart == target {
        chart_radius(p, pt)?;
        return Ok(*pt);
    }
    // Kerr-star and conformal charts share t* and φ*, so that change never needs BL.
    if matches!((pt.chart, target), (Chart::KerrStar, Chart::Conformal) | (Chart::Conformal, Chart::KerrStar)) {
        let c = pt.coords;
        check_theta(c[2])?;
        return if target == Chart::Conformal {
            if !(c[1] > 4.0 * p.m) {
                return Err(KerrError::Overlap(format!("r = {} outside the conformal chart r > 4M", c[1])));
            }
            Ok(ChartPoint::new(target, [c[0], 1.0 / c[1], c[2], c[3]]))
        } else {
            if !(c[1] > 0.0) {
                return Err(KerrError::Overlap("x = 0 has no Kerr-star image".into()));
            }
            chart_radius(p, pt)?;
            Ok(ChartPoint::new(target, [c[0], 1.0 / c[1], c[2], c[3]]))
        };
    }
    let bl = to_bl(p, pt, gauge)?;
    Ok(ChartPoint::new(target, from_bl(p, bl, target, gauge)?))
}

pub type MetricJet<const N: usize> = [[Jet<N>; 4]; 4];

/// Metric components from their closed forms, on jets.
pub fn metric_jet<const N: usize>(p: &KerrParams, chart: Chart, x: &[Jet<N>; 4]) -> Result<MetricJet<N>> {
    let z = Jet::<N>::zero();
    let mut g = [[z; 4]; 4];
    let (m, a) = (p.m, p.a);
    let a2 = a * a;
    let (s, c) = x[2].sin_cos();
    let s2 = s * s;
    let c2 = c * c;
    match chart {
        Chart::BoyerLindquist | Chart::KerrStar | Chart::StarKerr => {
            let r = x[1];
            let delta = p.delta_j(r);
            let rho2 = r * r + c2 * a2;
            let ra = r * r + a2;
            let sig2 = ra * ra - s2 * delta * a2;
            g[0][0] = (delta - s2 * a2) / rho2;
            g[0][3] = r * s2 * (2.0 * m * a) / rho2;
            g[3][0] = g[0][3];
            g[2][2] = -rho2;
            g[3][3] = -(sig2 * s2) / rho2;
            match chart {
                Chart::BoyerLindquist => g[1][1] = -(rho2 / delta),
                Chart::KerrStar => {
                    g[0][1] = Jet::cst(-1.0);
                    g[1][0] = g[0][1];
                    g[1][3] = s2 * a;
                    g[3][1] = g[1][3];
                }
                _ => {
                    g[0][1] = Jet::cst(1.0);
                    g[1][0] = g[0][1];
                    g[1][3] = s2 * (-a);
                    g[3][1] = g[1][3];
                }
            }
        }
        Chart::Kruskal => {
            let h = p.horizons();
            let (u, v) = (x[0], x[1]);
            let r = kruskal_radius_jet(p, u * v)?;
            let gg = p.kruskal_g_j(r);
            let k2 = h.kappa_plus * h.kappa_plus;
            let rp = h.r_plus;
            let rpa = rp * rp + a2;
            let rho2 = r * r + c2 * a2;
            let rho2p = c2 * a2 + rp * rp;
            let ra = r * r + a2;
            let rmm = r - h.r_minus;
            let g1 = gg * gg * s2 * a2 / (rho2 * (4.0 * k2)) * rmm * (r + rp) / (ra * rpa) * (rho2 / ra + rho2p / rpa);
            let g2 = gg * rmm / (rho2 * (2.0 * k2)) * (rho2 * rho2 / (ra * ra) + rho2p * rho2p / (rpa * rpa));
            let g3 = gg * gg * s2 * a2 / (rho2 * (4.0 * k2)) * (r + rp) * (r + rp) / (rpa * rpa);
            // Single power of κ₊ here: the squared power does not reproduce the pulled-back BL metric.
            let g4 = gg * s2 * a / (rho2 * (h.kappa_plus * rpa)) * (rho2p * rmm + ra * (r + rp));
            let delta = p.delta_j(r);
            let sig2 = ra * ra - s2 * delta * a2;
            g[0][0] = -(g1 * v * v) - g3 * v * v;
            g[1][1] = -(g1 * u * u) - g3 * u * u;
            g[0][1] = g2 * (-0.5) + g3 * u * v;
            g[1][0] = g[0][1];
            g[1][3] = -(g4 * u) * 0.5;
            g[3][1] = g[1][3];
            g[0][3] = g4 * v * 0.5;
            g[3][0] = g[0][3];
            g[2][2] = -rho2;
            g[3][3] = -(sig2 * s2) / rho2;
        }
        Chart::Conformal => {
            let xx = x[1];
            let rx2 = xx * xx * c2 * a2 + 1.0;
            let x2 = xx * xx;
            let x3 = x2 * xx;
            g[0][0] = x2 - x3 * (2.0 * m) / rx2;
            g[0][3] = x3 * s2 * (2.0 * m * a) / rx2;
            g[3][0] = g[0][3];
            g[0][1] = Jet::cst(1.0);
            g[1][0] = g[0][1];
            g[1][3] = s2 * (-a);
            g[3][1] = g[1][3];
            g[3][3] = -(s2 * (x2 * a2 + 1.0 + x3 * s2 * (2.0 * m * a2) / rx2));
            g[2][2] = -rx2;
        }
    }
    Ok(g)
}

/// Closed-form inverse of the conformal metric ğ.
pub fn conformal_inverse_jet<const N: usize>(p: &KerrParams, x: &[Jet<N>; 4]) -> MetricJet<N> {
    let z = Jet::<N>::zero();
    let mut gi = [[z; 4]; 4];
    let (m, a) = (p.m, p.a);
    let a2 = a * a;
    let (s, c) = x[2].sin_cos();
    let s2 = s * s;
    let xx = x[1];
    let x2 = xx * xx;
    let rx2 = x2 * c * c * a2 + 1.0;
    let dx = x2 * a2 - xx * (2.0 * m) + 1.0;
    gi[0][0] = -(s2 * a2) / rx2;
    gi[0][1] = (x2 * a2 + 1.0) / rx2;
    gi[1][0] = gi[0][1];
    gi[0][3] = Jet::cst(-a) / rx2;
    gi[3][0] = gi[0][3];
    gi[1][1] = -(x2 * dx) / rx2;
    gi[1][3] = x2 * a / rx2;
    gi[3][1] = gi[1][3];
    gi[2][2] = -(Jet::one() / rx2);
    gi[3][3] = -(Jet::one() / (rx2 * s2));
    gi
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricData {
    pub g: Matrix4<f64>,
    pub g_inv: Matrix4<f64>,
    pub sqrt_det: f64,
}

fn to_matrix<const N: usize>(g: &MetricJet<N>) -> Matrix4<f64> {
    Matrix4::from_fn(|i, j| g[i][j].re())
}

pub fn point_jets<const N: usize>(coords: &[f64; 4]) -> [Jet<N>; 4] {
    [Jet::cst(coords[0]), Jet::cst(coords[1]), Jet::cst(coords[2]), Jet::cst(coords[3])]
}

/// Seed coordinate `dir` as the jet variable.
pub fn seeded_jets<const N: usize>(coords: &[f64; 4], dir: usize) -> [Jet<N>; 4] {
    let mut x = point_jets(coords);
    x[dir] = Jet::var(coords[dir]);
    x
}

pub fn metric(p: &KerrParams, pt: &ChartPoint) -> Result<MetricData> {
    chart_radius(p, pt)?;
    let x = point_jets::<1>(&pt.coords);
    let g = to_matrix(&metric_jet(p, pt.chart, &x)?);
    let g_inv = if pt.chart == Chart::Conformal {
        to_matrix(&conformal_inverse_jet(p, &x))
    } else {
        g.try_inverse().ok_or_else(|| KerrError::Domain("degenerate metric".into()))?
    };
    Ok(MetricData { g, g_inv, sqrt_det: g.determinant().abs().sqrt() })
}

/// Christoffel symbols Γ^μ_{νρ}, stored as `gamma[mu][nu][rho]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChristoffelData {
    pub gamma: [[[f64; 4]; 4]; 4],
}

/// First derivatives `dg[l][i][j] = ∂_l g_ij` from jets.
pub fn metric_derivatives(p: &KerrParams, pt: &ChartPoint) -> Result<[[[f64; 4]; 4]; 4]> {
    let mut dg = [[[0.0; 4]; 4]; 4];
    for (l, slot) in dg.iter_mut().enumerate() {
        let x = seeded_jets::<2>(&pt.coords, l);
        let g = metric_jet(p, pt.chart, &x)?;
        for i in 0..4 {
            for j in 0..4 {
                slot[i][j] = g[i][j].c[1].re;
            }
        }
    }
    Ok(dg)
}

pub fn christoffels_from(g_inv: &Matrix4<f64>, dg: &[[[f64; 4]; 4]; 4]) -> [[[f64; 4]; 4]; 4] {
    let mut gam = [[[0.0; 4]; 4]; 4];
    for mu in 0..4 {
        for nu in 0..4 {
            for rho in nu..4 {
                let mut s = 0.0;
                for sg in 0..4 {
                    s += g_inv[(mu, sg)] * (dg[nu][sg][rho] + dg[rho][sg][nu] - dg[sg][nu][rho]);
                }
                gam[mu][nu][rho] = 0.5 * s;
                gam[mu][rho][nu] = 0.5 * s;
            }
        }
    }
    gam
}

pub fn christoffels(p: &KerrParams, pt: &ChartPoint) -> Result<ChristoffelData> {
    let md = metric(p, pt)?;
    let dg = metric_derivatives(p, pt)?;
    Ok(ChristoffelData { gamma: christoffels_from(&md.g_inv, &dg) })
}

/// max |∇_ρ g_{μν}| at a point.
pub fn metric_compatibility_residual(p: &KerrParams, pt: &ChartPoint) -> Result<f64> {
    let md = metric(p, pt)?;
    let dg = metric_derivatives(p, pt)?;
    let gam = christoffels_from(&md.g_inv, &dg);
    let mut worst = 0.0f64;
    for rho in 0..4 {
        for mu in 0..4 {
            for nu in 0..4 {
                let mut v = dg[rho][mu][nu];
                for s in 0..4 {
                    v -= gam[s][rho][mu] * md.g[(s, nu)] + gam[s][rho][nu] * md.g[(mu, s)];
                }
                worst = worst.max(v.abs());
            }
        }
    }
    Ok(worst)
}

/// Ricci scalar g^{μν} R_{μν} with R_{μν} = ∂_λΓ^λ_{μν} − ∂_νΓ^λ_{μλ} + Γ^λ_{λσ}Γ^σ_{μν} − Γ^λ_{νσ}Γ^σ_{μλ},
/// using second derivatives of the metric from jets along e_i and e_i + e_j.
pub fn ricci_scalar(p: &KerrParams, pt: &ChartPoint) -> Result<f64> {
    let md = metric(p, pt)?;
    let gi = md.g_inv;
    let dg = metric_derivatives(p, pt)?;
    let mut pure = [[[0.0; 4]; 4]; 4];
    for l in 0..4 {
        let x = seeded_jets::<3>(&pt.coords, l);
        let g = metric_jet(p, pt.chart, &x)?;
        for i in 0..4 {
            for j in 0..4 {
                pure[l][i][j] = 2.0 * g[i][j].c[2].re;
            }
        }
    }
    // ddg[k][l][i][j] = ∂_k ∂_l g_ij
    let mut ddg = [[[[0.0; 4]; 4]; 4]; 4];
    for k in 0..4 {
        for l in 0..4 {
            if k == l {
                ddg[k][l] = pure[k];
                continue;
            }
            if l < k {
                continue;
            }
            let mut x = point_jets::<3>(&pt.coords);
            x[k] = Jet::var(pt.coords[k]);
            x[l] = Jet::var(pt.coords[l]);
            let g = metric_jet(p, pt.chart, &x)?;
            for i in 0..4 {
                for j in 0..4 {
                    let mixed = 0.5 * (2.0 * g[i][j].c[2].re - pure[k][i][j] - pure[l][i][j]);
                    ddg[k][l][i][j] = mixed;
                    ddg[l][k][i][j] = mixed;
                }
            }
        }
    }
    let gam = christoffels_from(&gi, &dg);
    // ∂_k g^{ab} = −g^{ac} ∂_k g_cd g^{db}
    let mut dgi = [[[0.0; 4]; 4]; 4];
    for k in 0..4 {
        for a in 0..4 {
            for b in 0..4 {
                let mut s = 0.0;
                for c in 0..4 {
                    for d in 0..4 {
                        s -= gi[(a, c)] * dg[k][c][d] * gi[(d, b)];
                    }
                }
                dgi[k][a][b] = s;
            }
        }
    }
    // dgam[k][mu][nu][rho] = ∂_k Γ^mu_{nu rho}
    let mut dgam = [[[[0.0; 4]; 4]; 4]; 4];
    for k in 0..4 {
        for mu in 0..4 {
            for nu in 0..4 {
                for rho in 0..4 {
                    let mut s = 0.0;
                    for sg in 0..4 {
                        s += dgi[k][mu][sg] * (dg[nu][sg][rho] + dg[rho][sg][nu] - dg[sg][nu][rho])
                            + gi[(mu, sg)] * (ddg[k][nu][sg][rho] + ddg[k][rho][sg][nu] - ddg[k][sg][nu][rho]);
                    }
                    dgam[k][mu][nu][rho] = 0.5 * s;
                }
            }
        }
    }
    let mut rs = 0.0;
    for mu in 0..4 {
        for nu in 0..4 {
            let mut ric = 0.0;
            for l in 0..4 {
                ric += dgam[l][l][mu][nu] - dgam[nu][l][mu][l];
                for s in 0..4 {
                    ric += gam[l][l][s] * gam[s][mu][nu] - gam[l][nu][s] * gam[s][mu][l];
                }
            }
            rs += gi[(mu, nu)] * ric;
        }
    }
    Ok(rs)
}

/// Closed-form Ricci scalar of the conformal metric, R̆ = −(6/ϱ²)(2Δ − r ∂_rΔ).
///
/// This uses the curvature sign opposite to [`ricci_scalar`], so the two differ by a sign.
pub fn conformal_ricci(p: &KerrParams, pt: &ChartPoint) -> Result<f64> {
    if pt.chart != Chart::Conformal {
        return Err(KerrError::Domain("conformal_ricci expects a Conformal chart point".into()));
    }
    let r = chart_radius(p, pt)?;
    let th = pt.coords[2];
    if r.is_infinite() {
        // x → 0 limit of −6 (2Δ − rΔ')/ϱ² = −6(−2Mr + 2a²)/ϱ²·... → 0.
        return Ok(0.0);
    }
    let d = p.delta(r);
    let dd = 2.0 * r - 2.0 * p.m;
    Ok(-(6.0 / p.rho2(r, th)) * (2.0 * d - r * dd))
}
