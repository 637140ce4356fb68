//! Principal null tetrads and the GHP quantities derived from them.
//!
//! Every tetrad is written as closed-form components on jets, so the covariant
//! derivatives entering the spin coefficients, the connection form w_a and the
//! Teukolsky potential Γ_a = B_a − w_a are computed from exact first derivatives
//! and the chart's Christoffel symbols. Nothing here uses the known closed forms
//! of ρ, τ or Γ; those live in [`closed`] and serve as oracles.

use crate::error::{KerrError, Result};
use crate::geometry::{christoffels_from, metric, metric_jet, seeded_jets, Chart, ChartPoint, KerrParams};
use crate::jet::{Jet, C64};
use nalgebra::Matrix4;
use serde::Serialize;

pub const AXIS_EPS: f64 = 1e-8;

/// Complex boost-and-spin rescaling λ(r, θ) = c · r^pr · exp(q cos θ) of the
/// Kinnersley tetrad in Boyer–Lindquist coordinates:
/// l → |λ|² l, n → |λ|⁻² n, m → (λ/λ̄) m.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CustomScaling {
    pub c: C64,
    pub pr: f64,
    pub q: C64,
}

impl CustomScaling {
    pub fn lambda<const N: usize>(&self, r: Jet<N>, theta: Jet<N>) -> Jet<N> {
        r.powf(self.pr) * (theta.cos() * self.q).exp() * self.c
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Scaling {
    Kinnersley,
    Kruskal,
    Conformal,
    Custom(CustomScaling),
}

/// Tetrad components at a point, contravariant, in the chart of `point`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Tetrad {
    pub l: [f64; 4],
    pub n: [f64; 4],
    pub m: [C64; 4],
    pub point: ChartPoint,
    pub scaling: Scaling,
}

pub type VecJet<const N: usize> = [Jet<N>; 4];

fn check_axis<const N: usize>(theta: &Jet<N>) -> Result<()> {
    let s = theta.re().sin();
    if s.abs() <= AXIS_EPS {
        return Err(KerrError::AxisProximity(s));
    }
    Ok(())
}

fn check_pairing(chart: Chart, scaling: &Scaling) -> Result<()> {
    let ok = match scaling {
        Scaling::Kinnersley => matches!(chart, Chart::BoyerLindquist | Chart::KerrStar | Chart::StarKerr),
        Scaling::Custom(_) => chart == Chart::BoyerLindquist,
        Scaling::Kruskal => chart == Chart::Kruskal,
        Scaling::Conformal => chart == Chart::Conformal,
    };
    if ok {
        Ok(())
    } else {
        Err(KerrError::ScalingMismatch(format!("{scaling:?} scaling is not available in the {chart:?} chart")))
    }
}

/// Contravariant (l, n, m) on jets.
pub fn tetrad_jet<const N: usize>(
    p: &KerrParams,
    chart: Chart,
    scaling: &Scaling,
    x: &VecJet<N>,
) -> Result<(VecJet<N>, VecJet<N>, VecJet<N>)> {
    check_pairing(chart, scaling)?;
    check_axis(&x[2])?;
    let (m, a) = (p.m, p.a);
    let a2 = a * a;
    let z = Jet::<N>::zero();
    let i = C64::i();
    let rt2 = std::f64::consts::SQRT_2;
    let (s, c) = x[2].sin_cos();
    // m for the charts whose θ, φ-like coordinates share ∂_θ and a ∂_t-like direction.
    let m_kinnersley = |r: Jet<N>| -> VecJet<N> {
        let pp = (r + c * (i * a)) * rt2;
        [s * (i * a) / pp, z, Jet::one() / pp, Jet::cst(i) / (pp * s)]
    };
    match chart {
        Chart::BoyerLindquist | Chart::KerrStar | Chart::StarKerr => {
            let r = x[1];
            let delta = p.delta_j(r);
            let rho2 = r * r + c * c * a2;
            let ra = r * r + a2;
            let (l, n) = match chart {
                Chart::BoyerLindquist => (
                    [ra / delta, Jet::one(), z, Jet::cst(a) / delta],
                    [ra / (rho2 * 2.0), -(delta / (rho2 * 2.0)), z, Jet::cst(a) / (rho2 * 2.0)],
                ),
                Chart::KerrStar => ([ra * 2.0 / delta, Jet::one(), z, Jet::cst(2.0 * a) / delta], [z, -(delta / (rho2 * 2.0)), z, z]),
                _ => ([z, Jet::one(), z, z], [ra / rho2, -(delta / (rho2 * 2.0)), z, Jet::cst(a) / rho2]),
            };
            let mm = m_kinnersley(r);
            if let Scaling::Custom(cs) = scaling {
                let lam = cs.lambda(r, x[2]);
                let lb = lam.conj();
                let b = lam * lb;
                let ph = lam / lb;
                return Ok((l.map(|v| v * b), n.map(|v| v / b), mm.map(|v| v * ph)));
            }
            Ok((l, n, mm))
        }
        Chart::Kruskal => {
            let h = p.horizons();
            let (u, v) = (x[0], x[1]);
            let r = crate::geometry::kruskal_radius_jet(p, u * v)?;
            let gg = p.kruskal_g_j(r);
            let k = h.kappa_plus;
            let rp = h.r_plus;
            let rpa = rp * rp + a2;
            let rho2 = r * r + c * c * a2;
            let ra = r * r + a2;
            let rmm = r - h.r_minus;
            let l = [z, ra * (-2.0 * k) / (rmm * gg), z, u * (r + rp) * a / (rmm * rpa)];
            let n = [ra * k / rho2, z, z, v * (r + rp) * gg * a / (rho2 * (2.0 * rpa))];
            // ∂_t = −κU∂_U + κV∂_V − Ω₊∂_{φ₊}
            let pp = (r + c * (i * a)) * rt2;
            let mt = s * (i * a) / pp;
            let mm = [-(mt * u) * k, mt * v * k, Jet::one() / pp, Jet::cst(i) / (pp * s) - mt * h.omega_plus];
            Ok((l, n, mm))
        }
        Chart::Conformal => {
            let xx = x[1];
            let x2 = xx * xx;
            let dx = x2 * a2 - xx * (2.0 * m) + 1.0;
            let rx2 = x2 * c * c * a2 + 1.0;
            let l = [(x2 * a2 + 1.0) * 2.0 / dx, -x2, z, x2 * (2.0 * a) / dx];
            let n = [z, dx / (rx2 * 2.0), z, z];
            let pp = (xx * c * (i * a) + 1.0) * rt2;
            let mm = [s * (i * a) / pp, z, Jet::one() / pp, Jet::cst(i) / (pp * s)];
            Ok((l, n, mm))
        }
    }
}

pub fn tetrad_build(p: &KerrParams, point: &ChartPoint, scaling: Scaling) -> Result<Tetrad> {
    crate::geometry::chart_radius(p, point)?;
    let x = crate::geometry::point_jets::<1>(&point.coords);
    let (l, n, m) = tetrad_jet(p, point.chart, &scaling, &x)?;
    Ok(Tetrad { l: l.map(|v| v.re()), n: n.map(|v| v.re()), m: m.map(|v| v.val()), point: *point, scaling })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrameReport {
    /// Residuals of g(l,l), g(n,n), g(l,n)−1, g(m,m), g(m,m̄)+1, g(l,m), g(l,m̄), g(n,m), g(n,m̄), g(m̄,m̄).
    pub residuals: [f64; 10],
    pub max_residual: f64,
    /// Sign of ε(l, n, Re m, Im m) with the volume form √|g| d⁴x.
    pub orientation: i8,
}

fn ip(g: &Matrix4<f64>, u: &[C64; 4], v: &[C64; 4]) -> C64 {
    let mut s = C64::new(0.0, 0.0);
    for i in 0..4 {
        for j in 0..4 {
            s += u[i] * v[j] * g[(i, j)];
        }
    }
    s
}

pub fn frame_check(p: &KerrParams, t: &Tetrad) -> Result<FrameReport> {
    let md = metric(p, &t.point)?;
    let g = &md.g;
    let l = t.l.map(C64::from);
    let n = t.n.map(C64::from);
    let m = t.m;
    let mb = m.map(|v| v.conj());
    let one = C64::new(1.0, 0.0);
    let vals = [
        ip(g, &l, &l),
        ip(g, &n, &n),
        ip(g, &l, &n) - one,
        ip(g, &m, &m),
        ip(g, &m, &mb) + one,
        ip(g, &l, &m),
        ip(g, &l, &mb),
        ip(g, &n, &m),
        ip(g, &n, &mb),
        ip(g, &mb, &mb),
    ];
    let residuals = vals.map(|v| v.norm());
    let max_residual = residuals.iter().cloned().fold(0.0, f64::max);
    let e = Matrix4::from_fn(|i, j| match j {
        0 => t.l[i],
        1 => t.n[i],
        2 => t.m[i].re,
        _ => t.m[i].im,
    });
    let det = e.determinant() * md.sqrt_det;
    Ok(FrameReport { residuals, max_residual, orientation: if det >= 0.0 { 1 } else { -1 } })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpinCoeffs {
    pub rho: C64,
    pub tau: C64,
    pub rho_prime: C64,
    pub tau_prime: C64,
    pub psi2: C64,
}

/// Everything the GHP layer needs at one point.
#[derive(Clone, Debug)]
pub struct GhpPoint {
    pub point: ChartPoint,
    pub g: Matrix4<f64>,
    pub g_inv: Matrix4<f64>,
    pub sqrt_det: f64,
    pub l: [C64; 4],
    pub n: [C64; 4],
    pub m: [C64; 4],
    /// Lowered frame covectors.
    pub l_lo: [C64; 4],
    pub n_lo: [C64; 4],
    pub m_lo: [C64; 4],
    pub mb_lo: [C64; 4],
    /// `dl[a][b] = ∇_a l_b`, likewise for n, m, m̄.
    pub dl: [[C64; 4]; 4],
    pub dn: [[C64; 4]; 4],
    pub dm: [[C64; 4]; 4],
    pub dmb: [[C64; 4]; 4],
    pub spin: SpinCoeffs,
    /// Connection form w_a.
    pub w: [C64; 4],
    /// Teukolsky potential Γ_a.
    pub gamma: [C64; 4],
}

fn lower<const N: usize>(g: &[[Jet<N>; 4]; 4], v: &VecJet<N>) -> VecJet<N> {
    let mut out = [Jet::<N>::zero(); 4];
    for (a, o) in out.iter_mut().enumerate() {
        for b in 0..4 {
            *o += g[a][b] * v[b];
        }
    }
    out
}

fn contract2(u: &[C64; 4], v: &[C64; 4], d: &[[C64; 4]; 4]) -> C64 {
    // u^a v^b ∇_b X_a with d[b][a] = ∇_b X_a
    let mut s = C64::new(0.0, 0.0);
    for a in 0..4 {
        for b in 0..4 {
            s += u[a] * v[b] * d[b][a];
        }
    }
    s
}

/// Frame vectors l, n, m and the inverse metric at a point.
type FrameValues = ([C64; 4], [C64; 4], [C64; 4], [[C64; 4]; 4]);

/// Numerically evaluate the GHP data of a tetrad scaling at a point.
pub fn ghp_at(p: &KerrParams, point: &ChartPoint, scaling: &Scaling) -> Result<GhpPoint> {
    let md = metric(p, point)?;
    let zc = C64::new(0.0, 0.0);
    let mut dg = [[[0.0; 4]; 4]; 4];
    let mut raw = [[[zc; 4]; 4]; 4]; // raw[frame][k][b] = ∂_k X_b
    let mut vals: Option<FrameValues> = None;
    for k in 0..4 {
        let x = seeded_jets::<2>(&point.coords, k);
        let g = metric_jet(p, point.chart, &x)?;
        let (l, n, m) = tetrad_jet(p, point.chart, scaling, &x)?;
        let mb = m.map(|v| v.conj());
        let lows = [lower(&g, &l), lower(&g, &n), lower(&g, &m), lower(&g, &mb)];
        for i in 0..4 {
            for j in 0..4 {
                dg[k][i][j] = g[i][j].c[1].re;
            }
        }
        for f in 0..4 {
            for b in 0..4 {
                raw[f][k][b] = lows[f][b].c[1];
            }
        }
        if vals.is_none() {
            vals = Some((l.map(|v| v.val()), n.map(|v| v.val()), m.map(|v| v.val()), lows.map(|lo| lo.map(|v| v.val()))));
        }
    }
    let (l, n, m, lows) = vals.expect("four seeded evaluations");
    let gam = christoffels_from(&md.g_inv, &dg);
    let mut cov = [[[zc; 4]; 4]; 4];
    for f in 0..4 {
        for a in 0..4 {
            for b in 0..4 {
                let mut v = raw[f][a][b];
                for c in 0..4 {
                    v -= lows[f][c] * gam[c][a][b];
                }
                cov[f][a][b] = v;
            }
        }
    }
    let [dl, dn, dm, dmb] = cov;
    let mb = m.map(|v| v.conj());
    let rho = contract2(&m, &mb, &dl);
    let tau = contract2(&m, &n, &dl);
    let rho_prime = contract2(&mb, &m, &dn);
    let tau_prime = contract2(&mb, &l, &dn);
    let psi2 = psi2_for(p, point, scaling)?;
    let mut w = [zc; 4];
    let mut gamma = [zc; 4];
    let [l_lo, n_lo, m_lo, mb_lo] = lows;
    for a in 0..4 {
        let mut s = zc;
        for b in 0..4 {
            s += n[b] * dl[a][b] + m[b] * dmb[a][b];
        }
        w[a] = s * 0.5;
        gamma[a] = tau * mb_lo[a] - rho * n_lo[a] - w[a];
    }
    Ok(GhpPoint {
        point: *point,
        g: md.g,
        g_inv: md.g_inv,
        sqrt_det: md.sqrt_det,
        l,
        n,
        m,
        l_lo,
        n_lo,
        m_lo,
        mb_lo,
        dl,
        dn,
        dm,
        dmb,
        spin: SpinCoeffs { rho, tau, rho_prime, tau_prime, psi2 },
        w,
        gamma,
    })
}

/// Ψ₂ in the given scaling. Boost weight zero, so only the conformal rescaling
/// m → m/x, n → n/x² changes it (by x⁻²).
fn psi2_for(p: &KerrParams, point: &ChartPoint, scaling: &Scaling) -> Result<C64> {
    let th = point.coords[2];
    let r = crate::geometry::chart_radius(p, point)?;
    Ok(match scaling {
        Scaling::Conformal => {
            let x = point.coords[1];
            // x⁻² (−M/ζ³) = −M x / (1 − i a x cosθ)³
            -p.m * x / C64::new(1.0, -p.a * x * th.cos()).powi(3)
        }
        _ => p.psi2(r, th),
    })
}

pub fn spin_coefficients(p: &KerrParams, t: &Tetrad) -> Result<SpinCoeffs> {
    Ok(ghp_at(p, &t.point, &t.scaling)?.spin)
}

fn dot(dir: &[f64; 4], v: &[C64; 4]) -> C64 {
    (0..4).map(|a| v[a] * dir[a]).sum()
}

/// direction^a w_a.
pub fn connection_form(p: &KerrParams, t: &Tetrad, direction: &[f64; 4]) -> Result<C64> {
    Ok(dot(direction, &ghp_at(p, &t.point, &t.scaling)?.w))
}

/// direction^a Γ_a.
pub fn teukolsky_potential(p: &KerrParams, t: &Tetrad, direction: &[f64; 4]) -> Result<C64> {
    Ok(dot(direction, &ghp_at(p, &t.point, &t.scaling)?.gamma))
}

impl GhpPoint {
    pub fn contract_gamma(&self, v: &[C64; 4]) -> C64 {
        (0..4).map(|a| v[a] * self.gamma[a]).sum()
    }

    pub fn l_gamma(&self) -> C64 {
        self.contract_gamma(&self.l)
    }

    pub fn n_gamma(&self) -> C64 {
        self.contract_gamma(&self.n)
    }

    /// Γ^a = g^{ab} Γ_b.
    pub fn gamma_up(&self) -> [C64; 4] {
        let mut up = [C64::new(0.0, 0.0); 4];
        for (a, u) in up.iter_mut().enumerate() {
            for b in 0..4 {
                *u += self.gamma[b] * self.g_inv[(a, b)];
            }
        }
        up
    }

    /// g^{ab} Γ_a Γ_b.
    pub fn gamma_square(&self) -> C64 {
        let up = self.gamma_up();
        (0..4).map(|a| up[a] * self.gamma[a]).sum()
    }
}

/// ∇_a Γ^a = (1/√|g|) ∂_a(√|g| Γ^a) with eighth-order central differences of
/// step `h` in every coordinate.
pub fn gamma_divergence(p: &KerrParams, point: &ChartPoint, scaling: &Scaling, h: f64) -> Result<C64> {
    const W: [f64; 4] = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];
    let base = ghp_at(p, point, scaling)?;
    let mut div = C64::new(0.0, 0.0);
    for a in 0..4 {
        let mut acc = C64::new(0.0, 0.0);
        for (k, w) in W.iter().enumerate() {
            let off = (k + 1) as f64 * h;
            let mut vals = [C64::new(0.0, 0.0); 2];
            for (slot, sg) in [1.0, -1.0].iter().enumerate() {
                let mut c = point.coords;
                c[a] += sg * off;
                let q = ghp_at(p, &ChartPoint::new(point.chart, c), scaling)?;
                vals[slot] = q.gamma_up()[a] * q.sqrt_det;
            }
            acc += (vals[0] - vals[1]) * *w;
        }
        div += acc / h;
    }
    Ok(div / base.sqrt_det)
}

/// Closed forms used as oracles.
pub mod closed {
    use super::*;

    /// p = r + i a cos θ.
    pub fn p_of(pr: &KerrParams, r: f64, th: f64) -> C64 {
        C64::new(r, pr.a * th.cos())
    }

    pub fn l_gamma(pr: &KerrParams, r: f64, th: f64) -> C64 {
        p_of(pr, r, th) / pr.rho2(r, th)
    }

    pub fn n_gamma(pr: &KerrParams, r: f64, th: f64) -> C64 {
        let rho2 = pr.rho2(r, th);
        (p_of(pr, r, th) * pr.delta(r) - rho2 * (r - pr.m)) / (2.0 * rho2 * rho2)
    }

    pub fn div_gamma(pr: &KerrParams, r: f64, th: f64) -> f64 {
        -1.0 / (2.0 * pr.rho2(r, th))
    }

    pub fn gamma_square(pr: &KerrParams, r: f64, th: f64) -> C64 {
        let cot = th.cos() / th.sin();
        cot * cot / (4.0 * pr.rho2(r, th)) + pr.psi2(r, th)
    }

    /// Contravariant Γ^a in Boyer–Lindquist coordinates for the Kinnersley tetrad.
    pub fn gamma_vector_bl(pr: &KerrParams, r: f64, th: f64) -> [C64; 4] {
        let (m, a) = (pr.m, pr.a);
        let d = pr.delta(r);
        let f = -1.0 / (2.0 * pr.rho2(r, th));
        let i = C64::i();
        [
            (C64::from(m * (r * r - a * a) / d) - p_of(pr, r, th)) * f,
            C64::from((r - m) * f),
            C64::new(0.0, 0.0),
            (C64::from(a * (r - m) / d) + i * th.cos() / th.sin().powi(2)) * f,
        ]
    }

    /// 𝔫^aΓ_a for the Kruskal tetrad.
    pub fn n_gamma_kruskal(pr: &KerrParams, r: f64, th: f64, v: f64) -> C64 {
        let h = pr.horizons();
        let rho2 = pr.rho2(r, th);
        let rp = h.r_plus;
        let bracket = p_of(pr, r, th) * (r - h.r_minus) / rho2
            + (r * rp - pr.m * (r + rp) - pr.a * pr.a) / (rp * rp + pr.a * pr.a);
        -bracket * (pr.kruskal_g(r) * v / (2.0 * rho2))
    }

    /// Exact x → 0 limit of n̆^aΓ̆_a: (−M + i a cos θ)/2.
    pub fn conformal_n_gamma_limit(pr: &KerrParams, th: f64) -> C64 {
        C64::new(-pr.m, pr.a * th.cos()) * 0.5
    }

    /// ζ = r − i a cosθ and the Kinnersley spin coefficients.
    pub fn kinnersley_spin(pr: &KerrParams, r: f64, th: f64) -> SpinCoeffs {
        let z = pr.zeta(r, th);
        let rho2 = pr.rho2(r, th);
        let i = C64::i();
        let rt2 = std::f64::consts::SQRT_2;
        SpinCoeffs {
            rho: -1.0 / z,
            tau: -i * pr.a * th.sin() / (rt2 * rho2),
            rho_prime: pr.delta(r) / (2.0 * z * rho2),
            tau_prime: -i * pr.a * th.sin() / (rt2 * z * z),
            psi2: pr.psi2(r, th),
        }
    }
}
pub use crate::radial::flip_mode_map;
