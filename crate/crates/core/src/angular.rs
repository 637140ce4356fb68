//! Spin-weighted spherical and spheroidal harmonics, the L±ₙ ladder operators
//! and the angular Teukolsky–Starobinsky eigenvalues N(s, ω, m, ℓ).
//!
//! Conventions:
//! - modes are e^{−iωt + imφ}, so ∂_t → −iω and ∂_φ → im, and c = aω;
//! - harmonics use the Jacobi form with a positive normalisation constant,
//!   ₛY_ℓm(θ) ∝ sin^{|m+s|}(θ/2) cos^{|m−s|}(θ/2) P_n^{(|m+s|,|m−s|)}(cos θ),
//!   which differs from Condon–Shortley by (−1)^m for s = 0, m > 0;
//! - the angular operator is 2S̄, with
//!   2S̄ = (sinθ)⁻¹∂_θ sinθ ∂_θ + c²cos²θ − 2sc cosθ − (m + s cosθ)²/sin²θ + s + 2cm − c²,
//!   which for s = 2 is the explicit Kinnersley form. Teukolsky's λ equals −2S̄.

use crate::error::{KerrError, Result};
use crate::geometry::KerrParams;
use crate::jet::{Jet, C64};
use crate::numerics::gauss_legendre;
use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;
use statrs::function::gamma::ln_gamma;
use std::f64::consts::PI;

pub fn lmin(s: i32, m: i32) -> i32 {
    s.abs().max(m.abs())
}

fn check_index(s: i32, ell: i32, m: i32) -> Result<()> {
    if ell < lmin(s, m) {
        return Err(KerrError::Index(format!("need ell >= max(|m|, |s|); got s={s}, ell={ell}, m={m}")));
    }
    Ok(())
}

/// Jacobi parameters and normalisation for fixed (s, m).
struct Family {
    alpha: i32,
    beta: i32,
    lmin: i32,
}

impl Family {
    fn new(s: i32, m: i32) -> Self {
        Self { alpha: (m + s).abs(), beta: (m - s).abs(), lmin: lmin(s, m) }
    }

    fn norm(&self, n: i32) -> f64 {
        let (a, b, nf) = (self.alpha as f64, self.beta as f64, n as f64);
        let ln = ((2.0 * nf + a + b + 1.0) / 2f64.powf(a + b + 1.0)).ln() + ln_gamma(nf + 1.0) + ln_gamma(nf + a + b + 1.0)
            - ln_gamma(nf + a + 1.0)
            - ln_gamma(nf + b + 1.0);
        (0.5 * ln).exp() / (2.0 * PI).sqrt()
    }

    /// ₛY_ℓm(θ) for ℓ = lmin ..= lmax, on jets in θ.
    fn eval_all<const N: usize>(&self, lmax: i32, theta: Jet<N>) -> Vec<Jet<N>> {
        let (a, b) = (self.alpha as f64, self.beta as f64);
        let nmax = (lmax - self.lmin).max(0) as usize;
        let half = theta * 0.5;
        let (sh, ch) = half.sin_cos();
        let pref = (sh * std::f64::consts::SQRT_2).powi(self.alpha) * (ch * std::f64::consts::SQRT_2).powi(self.beta);
        let x = theta.cos();
        let mut p = Vec::with_capacity(nmax + 1);
        p.push(Jet::<N>::one());
        if nmax >= 1 {
            p.push((x - 1.0) * ((a + b + 2.0) * 0.5) + (a + 1.0));
        }
        for n in 2..=nmax {
            let nf = n as f64;
            let k = 2.0 * nf + a + b;
            let c1 = 2.0 * nf * (nf + a + b) * (k - 2.0);
            let c2 = (k - 1.0) * (a * a - b * b);
            let c3 = (k - 1.0) * k * (k - 2.0);
            let c4 = 2.0 * (nf + a - 1.0) * (nf + b - 1.0) * k;
            let next = (p[n - 1] * (x * c3 + c2) - p[n - 2] * c4) / c1;
            p.push(next);
        }
        p.iter().enumerate().map(|(n, pn)| *pn * pref * self.norm(n as i32)).collect()
    }
}

/// Spin-weighted spherical harmonic ₛY_ℓm(θ) (the φ-dependence e^{imφ} is omitted).
pub fn swsh_eval(s: i32, ell: i32, m: i32, theta: f64) -> Result<f64> {
    check_index(s, ell, m)?;
    let f = Family::new(s, m);
    Ok(f.eval_all::<1>(ell, Jet::cst(theta))[(ell - f.lmin) as usize].re())
}

/// All ₛY_ℓm(θ), ℓ = max(|s|,|m|) ..= lmax, as jets in θ.
pub fn swsh_all_jet<const N: usize>(s: i32, m: i32, lmax: i32, theta: Jet<N>) -> Vec<Jet<N>> {
    Family::new(s, m).eval_all(lmax, theta)
}

/// Coupling matrices ⟨ℓ'|cosθ|ℓ⟩ and ⟨ℓ'|cos²θ|ℓ⟩ by Gauss–Legendre quadrature in
/// x = cosθ, exact because the integrands are polynomials for integer s and m.
pub fn cos_couplings(s: i32, m: i32, lmax: i32) -> (DMatrix<f64>, DMatrix<f64>) {
    let f = Family::new(s, m);
    let dim = (lmax - f.lmin + 1) as usize;
    let (xs, ws) = gauss_legendre((lmax + 4) as usize);
    let mut c1 = DMatrix::zeros(dim, dim);
    let mut c2 = DMatrix::zeros(dim, dim);
    for (x, w) in xs.iter().zip(&ws) {
        let th = x.acos();
        let y: Vec<f64> = f.eval_all::<1>(lmax, Jet::cst(th)).iter().map(|v| v.re()).collect();
        for i in 0..dim {
            for j in 0..dim {
                let v = 2.0 * PI * w * y[i] * y[j];
                c1[(i, j)] += v * x;
                c2[(i, j)] += v * x * x;
            }
        }
    }
    (c1, c2)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpheroidalMode {
    pub s: i32,
    pub m: i32,
    pub c: f64,
    pub ell: i32,
    /// Eigenvalue S̄ of the angular operator.
    pub sbar: f64,
    /// Expansion coefficients in ₛY_ℓm for ℓ = lmin ..= lmin + coeffs.len() − 1.
    pub coeffs: Vec<f64>,
    pub lmin: i32,
}

impl SpheroidalMode {
    /// Teukolsky's separation constant λ = −2S̄.
    pub fn lambda(&self) -> f64 {
        -2.0 * self.sbar
    }

    pub fn lmax(&self) -> i32 {
        self.lmin + self.coeffs.len() as i32 - 1
    }

    pub fn eval_jet<const N: usize>(&self, theta: Jet<N>) -> Jet<N> {
        let ys = swsh_all_jet(self.s, self.m, self.lmax(), theta);
        ys.iter().zip(&self.coeffs).fold(Jet::zero(), |acc, (y, c)| acc + *y * *c)
    }

    pub fn eval(&self, theta: f64) -> f64 {
        self.eval_jet::<1>(Jet::cst(theta)).re()
    }
}

/// Matrix of 2S̄ in the ₛY_ℓm basis, ℓ = lmin ..= lmax.
pub fn spheroidal_matrix(s: i32, m: i32, c: f64, lmax: i32) -> DMatrix<f64> {
    spheroidal_matrix_from(s, m, c, &cos_couplings(s, m, lmax))
}

/// As [`spheroidal_matrix`], reusing couplings from [`cos_couplings`]; the truncation is read off their size.
pub fn spheroidal_matrix_from(s: i32, m: i32, c: f64, couplings: &(DMatrix<f64>, DMatrix<f64>)) -> DMatrix<f64> {
    let l0 = lmin(s, m);
    let (c1, c2) = couplings;
    let lmax = l0 + c1.nrows() as i32 - 1;
    let mut mat = c2 * (c * c) - c1 * (2.0 * s as f64 * c);
    let (sf, mf) = (s as f64, m as f64);
    for (k, ell) in (l0..=lmax).enumerate() {
        let lf = ell as f64;
        mat[(k, k)] += -(lf * (lf + 1.0) - sf * sf - sf) + 2.0 * c * mf - c * c;
    }
    // Quadrature leaves round-off asymmetry at the 1e-16 level.
    (&mat + mat.transpose()) * 0.5
}

/// Number of buffer rows discarded at the top of the truncated matrix.
pub const BUFFER_ROWS: i32 = 8;

/// All spheroidal modes with ℓ ≤ lmax − 8 from a truncation at `lmax`.
pub fn spheroidal_solve(s: i32, m: i32, c: f64, lmax: i32) -> Result<Vec<SpheroidalMode>> {
    let l0 = lmin(s, m);
    if lmax < s.abs() + m.abs() + BUFFER_ROWS {
        return Err(KerrError::Truncation(format!("lmax = {lmax} below |s| + |m| + {BUFFER_ROWS}")));
    }
    let mat = spheroidal_matrix(s, m, c, lmax);
    let eig = SymmetricEigen::new(mat);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].partial_cmp(&eig.eigenvalues[i]).unwrap());
    let keep = (lmax - BUFFER_ROWS - l0 + 1).max(0) as usize;
    let mut out = Vec::with_capacity(keep);
    for (k, &idx) in order.iter().take(keep).enumerate() {
        let val = eig.eigenvalues[idx];
        for &other in order.iter().skip(k + 1).take(1) {
            let gap = (eig.eigenvalues[other] - val).abs();
            if gap < 1e-10 {
                return Err(KerrError::Labelling(gap));
            }
        }
        let mut v: Vec<f64> = eig.eigenvectors.column(idx).iter().cloned().collect();
        // Sign: the component that the c → 0 limit selects is positive, falling back to the largest one.
        let pivot = if v[k].abs() > 1e-3 { k } else { (0..v.len()).max_by(|&i, &j| v[i].abs().partial_cmp(&v[j].abs()).unwrap()).unwrap() };
        if v[pivot] < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        out.push(SpheroidalMode { s, m, c, ell: l0 + k as i32, sbar: 0.5 * val, coeffs: v, lmin: l0 });
    }
    Ok(out)
}

/// A single converged spheroidal mode: the truncation grows until S̄ moves less
/// than 1e-10 under lmax → lmax + 4.
pub fn spheroidal_mode(s: i32, m: i32, c: f64, ell: i32) -> Result<SpheroidalMode> {
    check_index(s, ell, m)?;
    let mut lmax = (ell + BUFFER_ROWS + 4 + (2.0 * c.abs()).ceil() as i32).max(s.abs() + m.abs() + BUFFER_ROWS);
    let pick = |lmax: i32| -> Result<SpheroidalMode> {
        let modes = spheroidal_solve(s, m, c, lmax)?;
        modes.into_iter().find(|q| q.ell == ell).ok_or_else(|| KerrError::Truncation(format!("ell = {ell} not resolved at lmax = {lmax}")))
    };
    let mut prev = pick(lmax)?;
    for _ in 0..20 {
        lmax += 4;
        let next = pick(lmax)?;
        if (next.sbar - prev.sbar).abs() < 1e-10 * (1.0 + next.sbar.abs()) {
            return Ok(next);
        }
        prev = next;
    }
    Err(KerrError::Truncation(format!("S-bar did not converge for s={s}, m={m}, c={c}, ell={ell}")))
}

/// Follow labels along a c-grid by maximal overlap with the previous step.
/// Returns, for each grid value, the ℓ label that the overlap assigns to the
/// mode that started as `ell` at the first grid value.
pub fn track_label(s: i32, m: i32, ell: i32, cs: &[f64], lmax: i32) -> Result<Vec<i32>> {
    let mut labels = Vec::with_capacity(cs.len());
    let mut prev: Option<Vec<f64>> = None;
    let mut current = ell;
    for &c in cs {
        let modes = spheroidal_solve(s, m, c, lmax)?;
        if let Some(pv) = &prev {
            let best = modes
                .iter()
                .max_by(|a, b| {
                    let oa: f64 = a.coeffs.iter().zip(pv).map(|(x, y)| x * y).sum::<f64>().abs();
                    let ob: f64 = b.coeffs.iter().zip(pv).map(|(x, y)| x * y).sum::<f64>().abs();
                    oa.partial_cmp(&ob).unwrap()
                })
                .expect("at least one mode");
            current = best.ell;
        }
        let mode = modes.iter().find(|q| q.ell == current).ok_or(KerrError::Labelling(0.0))?;
        prev = Some(mode.coeffs.clone());
        labels.push(current);
    }
    Ok(labels)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LSign {
    Plus,
    Minus,
}

/// L±ₙ = ∂_θ ± (c sinθ − m/sinθ) + n cotθ acting on a mode profile given as a jet in θ.
pub fn lpm<const N: usize>(f: Jet<N>, theta: Jet<N>, n: i32, sign: LSign, c: f64, m: i32) -> Jet<N> {
    let (s, co) = theta.sin_cos();
    let pot = s * c - Jet::cst(m as f64) / s;
    let sg = if sign == LSign::Plus { 1.0 } else { -1.0 };
    f.d() + (pot * sg + co / s * n as f64) * f
}

/// Maximal number of chained L operators supported by [`lpm_apply`].
pub const LPM_MAX_ORDER: usize = 9;

/// Apply L operators right to left (the last entry of `ops` acts first) to a
/// spheroidal mode, returning samples at `thetas`.
pub fn lpm_apply(mode: &SpheroidalMode, ops: &[(i32, LSign)], thetas: &[f64]) -> Result<Vec<f64>> {
    if ops.len() > LPM_MAX_ORDER {
        return Err(KerrError::Truncation(format!("{} chained operators exceed the supported order {LPM_MAX_ORDER}", ops.len())));
    }
    Ok(thetas
        .iter()
        .map(|&th| {
            let t = Jet::<10>::var(th);
            let mut f = mode.eval_jet(t);
            for &(n, sg) in ops.iter().rev() {
                f = lpm(f, t, n, sg, mode.c, mode.m);
            }
            f.re()
        })
        .collect())
}

/// The 4s operators of the L± product for A_s, in the order written
/// (rightmost acts first): L⁺_{−s+1}…L⁺_s L⁻_{−s+1}…L⁻_s.
pub fn a_s_operator_chain(s: i32) -> Vec<(i32, LSign)> {
    let mut v = Vec::new();
    for n in (-s + 1)..=s {
        v.push((n, LSign::Plus));
    }
    for n in (-s + 1)..=s {
        v.push((n, LSign::Minus));
    }
    v
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TSEigenvalue {
    pub s: i32,
    pub m: i32,
    pub ell: i32,
    pub omega: f64,
    pub sbar: f64,
    #[serde(rename = "N")]
    pub n: f64,
}

/// Polynomial form of N in terms of S̄, ∂_t → −iω and ∂_φ → im.
pub fn ts_polynomial(p: &KerrParams, s: i32, omega: f64, m: i32, sbar: f64) -> Result<f64> {
    let a = p.a;
    let dt = C64::new(0.0, -omega);
    let dp = C64::new(0.0, m as f64);
    let sb = C64::from(sbar);
    let l_xi = dt;
    let l_eta = dp * a + dt * (a * a);
    let v = match s {
        0 => C64::from(1.0),
        // The printed S̄² + L_ηL_ξ vanishes at ℓ = 1, ω = 0; the L± product fixes the shift by one.
        1 => (sb - 1.0) * (sb - 1.0) + l_eta * l_xi,
        2 => {
            dp * dt.powi(3) * (18.0 * a.powi(3))
                + dt.powi(4) * (9.0 * a.powi(4))
                + dp * dt * (sb - 2.0) * (sb * 5.0 - 13.0) * (2.0 * a)
                + (sb * sb - sb * 5.0 + 6.0).powi(2)
                + dt * dt * (dp * dp * 9.0 + (sb - 2.0) * (sb * 5.0 - 7.0) * 2.0) * (a * a)
                - dt * dt * (9.0 * p.m * p.m)
        }
        _ => return Err(KerrError::InvalidParameter(format!("TS constants are defined for s in {{0,1,2}}, got {s}"))),
    };
    debug_assert!(v.im.abs() <= 1e-9 * (1.0 + v.re.abs()));
    Ok(v.re)
}

/// The first-order form S̄² + L_ηL_ξ exactly as printed, kept for comparison.
pub fn a1_printed_form(p: &KerrParams, omega: f64, m: i32, sbar: f64) -> f64 {
    let c = p.a * omega;
    sbar * sbar + c * m as f64 - c * c
}

pub fn ts_eigenvalue(p: &KerrParams, s: i32, omega: f64, m: i32, ell: i32) -> Result<TSEigenvalue> {
    let mode = spheroidal_mode(s, m, p.a * omega, ell)?;
    let n = ts_polynomial(p, s, omega, m, mode.sbar)?;
    let bound = match s {
        1 => 0.0,
        2 => 9.0 * p.m * p.m * omega * omega,
        _ => f64::NEG_INFINITY,
    };
    if s > 0 && n <= bound {
        return Err(KerrError::BoundViolation(format!("N({s}, {omega}, {m}, {ell}) = {n} <= {bound}")));
    }
    Ok(TSEigenvalue { s, m, ell, omega, sbar: mode.sbar, n })
}

/// Margin of the positivity bound: N − 0 for s = 1, N − 9M²ω² for s = 2.
pub fn ts_margin(p: &KerrParams, ev: &TSEigenvalue) -> f64 {
    match ev.s {
        2 => ev.n - 9.0 * p.m * p.m * ev.omega * ev.omega,
        _ => ev.n,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OracleResult {
    #[serde(rename = "N")]
    pub n: f64,
    /// ‖A_s S − N S‖ / ‖N S‖ on the grid.
    pub residual: f64,
}

/// Number of θ nodes used by [`ts_oracle`].
pub const ORACLE_NODES: usize = 1024;

/// Distance of the oracle grid from the poles. The 4s chained 1/sinθ terms cancel
/// catastrophically as θ → 0, π; since S is an exact eigenfunction the
/// projection on an interior interval still returns N.
pub const ORACLE_POLE_GAP: f64 = 0.2;

/// Brute-force N: apply the L± product (plus 144M²ω² for s = 2) to the
/// spheroidal harmonic on Gauss–Legendre nodes in θ and project by least squares.
pub fn ts_oracle_full(p: &KerrParams, s: i32, omega: f64, m: i32, ell: i32) -> Result<OracleResult> {
    if s == 0 {
        return Ok(OracleResult { n: 1.0, residual: 0.0 });
    }
    if !(1..=2).contains(&s) {
        return Err(KerrError::InvalidParameter(format!("oracle defined for s in {{0,1,2}}, got {s}")));
    }
    let mode = spheroidal_mode(s, m, p.a * omega, ell)?;
    let ops = a_s_operator_chain(s);
    let (nodes, weights) = crate::numerics::gauss_legendre_on(ORACLE_NODES, ORACLE_POLE_GAP, PI - ORACLE_POLE_GAP);
    let extra = if s == 2 { 144.0 * p.m * p.m * omega * omega } else { 0.0 };
    let scale = 2f64.powi(-2 * s);
    let mut num = 0.0;
    let mut den = 0.0;
    let mut samples = Vec::with_capacity(nodes.len());
    for (&th, &w) in nodes.iter().zip(&weights) {
        let t = Jet::<10>::var(th);
        let f0 = mode.eval_jet(t);
        let mut f = f0;
        for &(n, sg) in ops.iter().rev() {
            f = lpm(f, t, n, sg, mode.c, m);
        }
        let af = (f.re() + extra * f0.re()) * scale;
        let sv = f0.re();
        let wt = w * th.sin();
        num += wt * sv * af;
        den += wt * sv * sv;
        samples.push((wt, sv, af));
    }
    let n = num / den;
    let (mut r2, mut n2) = (0.0, 0.0);
    for (wt, sv, af) in samples {
        r2 += wt * (af - n * sv).powi(2);
        n2 += wt * (n * sv).powi(2);
    }
    let residual = (r2 / n2).sqrt();
    if residual > 1e-6 {
        return Err(KerrError::BoundViolation(format!("oracle projection residual {residual:e} exceeds 1e-6")));
    }
    Ok(OracleResult { n, residual })
}

pub fn ts_oracle(p: &KerrParams, s: i32, omega: f64, m: i32, ell: i32) -> Result<f64> {
    Ok(ts_oracle_full(p, s, omega, m, ell)?.n)
}

/// Coefficients of a spin-weight-s function on the sphere, indexed by (ℓ, m)
/// with max(|s|, |m|) ≤ ℓ ≤ lmax.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpinWeightedField {
    pub s: i32,
    pub lmax: i32,
    coeffs: Vec<C64>,
}

impl SpinWeightedField {
    pub fn zeros(s: i32, lmax: i32) -> Self {
        let n = Self::count(s, lmax);
        Self { s, lmax, coeffs: vec![C64::new(0.0, 0.0); n] }
    }

    fn count(s: i32, lmax: i32) -> usize {
        let l0 = s.abs();
        if lmax < l0 {
            return 0;
        }
        ((l0..=lmax).map(|l| 2 * l + 1).sum::<i32>()) as usize
    }

    fn index(&self, ell: i32, m: i32) -> Result<usize> {
        if ell < self.s.abs() || ell > self.lmax || m.abs() > ell {
            return Err(KerrError::Index(format!("(ell, m) = ({ell}, {m}) outside field with s = {}, lmax = {}", self.s, self.lmax)));
        }
        let before = Self::count(self.s, ell - 1);
        Ok(before + (m + ell) as usize)
    }

    pub fn get(&self, ell: i32, m: i32) -> Result<C64> {
        Ok(self.coeffs[self.index(ell, m)?])
    }

    pub fn set(&mut self, ell: i32, m: i32, v: C64) -> Result<()> {
        let i = self.index(ell, m)?;
        self.coeffs[i] = v;
        Ok(())
    }

    /// Iterate over ((ℓ, m), coefficient).
    pub fn iter(&self) -> impl Iterator<Item = ((i32, i32), C64)> + '_ {
        let l0 = self.s.abs();
        (l0..=self.lmax).flat_map(|l| (-l..=l).map(move |m| (l, m))).zip(self.coeffs.iter().cloned())
    }

    pub fn map_coeffs(&self, f: impl Fn(i32, i32, C64) -> Result<C64>) -> Result<Self> {
        let mut out = self.clone();
        for (k, ((l, m), c)) in self.iter().enumerate() {
            out.coeffs[k] = f(l, m, c)?;
        }
        Ok(out)
    }

    /// Pointwise value Σ c_ℓm ₛY_ℓm(θ) e^{imφ}.
    pub fn synthesize(&self, theta: f64, phi: f64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for m in -self.lmax..=self.lmax {
            let l0 = lmin(self.s, m);
            if l0 > self.lmax {
                continue;
            }
            let ys = swsh_all_jet::<1>(self.s, m, self.lmax, Jet::cst(theta));
            let e = C64::from_polar(1.0, m as f64 * phi);
            for (k, y) in ys.iter().enumerate() {
                let ell = l0 + k as i32;
                acc += self.get(ell, m).unwrap() * y.re() * e;
            }
        }
        acc
    }

    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Norm-equivalent Sobolev norm (Σ (1 + ℓ(ℓ+1))^order |c_ℓm|²)^{1/2}.
pub fn sobolev_norm(field: &SpinWeightedField, order: u32) -> Result<f64> {
    if order > 8 {
        return Err(KerrError::InvalidParameter(format!("Sobolev order {order} > 8")));
    }
    Ok(field
        .iter()
        .map(|((l, _), c)| (1.0 + (l * (l + 1)) as f64).powi(order as i32) * c.norm_sqr())
        .sum::<f64>()
        .sqrt())
}

/// Multiply spheroidal coefficients (at spheroidicity aω) by N(s, ω, m, ℓ).
pub fn a_s_apply(p: &KerrParams, field: &SpinWeightedField, omega: f64) -> Result<SpinWeightedField> {
    field.map_coeffs(|l, m, c| Ok(c * ts_eigenvalue(p, field.s, omega, m, l)?.n))
}

/// Divide spheroidal coefficients by N(s, ω, m, ℓ).
pub fn a_s_inverse(p: &KerrParams, field: &SpinWeightedField, omega: f64) -> Result<SpinWeightedField> {
    field.map_coeffs(|l, m, c| Ok(c / ts_eigenvalue(p, field.s, omega, m, l)?.n))
}
