//! Mode-level GHP calculus in the Kinnersley tetrad (Boyer–Lindquist chart).
//!
//! Fields are modes e^{−iωt + imφ} f(r, θ). The operators þ, þ′ only
//! differentiate in r and ð, ð′ only in θ, so each acts on a [`Jet`] in one
//! variable while the other coordinate is a constant jet. Every background
//! quantity is written together with its barred partner as an explicit
//! analytic function of (r, θ), never through complex conjugation, so the
//! same code is valid at complex r.

use crate::geometry::KerrParams;
use crate::jet::{Jet, C64};
use serde::{Deserialize, Serialize};
use std::f64::consts::SQRT_2;

/// Frequency data of a mode e^{−iωt + imφ}.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Freq {
    pub omega: f64,
    pub m: i32,
}

impl Freq {
    pub fn new(omega: f64, m: i32) -> Self {
        Self { omega, m }
    }

    /// Symbol of ∂_t (and of L_ξ in this tetrad).
    pub fn dt(&self) -> C64 {
        C64::new(0.0, -self.omega)
    }

    /// Symbol of ∂_φ.
    pub fn dphi(&self) -> C64 {
        C64::new(0.0, self.m as f64)
    }

    /// Frequency of the complex-conjugate mode.
    pub fn conj(&self) -> Self {
        Self { omega: -self.omega, m: -self.m }
    }
}

/// Spin and boost weight (s, w) of a section of B(s, w).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Weight {
    pub s: i32,
    pub w: i32,
}

impl Weight {
    pub fn new(s: i32, w: i32) -> Self {
        Self { s, w }
    }

    fn pq(&self) -> (f64, f64) {
        ((self.w + self.s) as f64, (self.w - self.s) as f64)
    }
}

/// Kinnersley background data on jets.
#[derive(Clone, Copy, Debug)]
pub struct Kin<const N: usize> {
    pub mass: f64,
    pub a: f64,
    pub r: Jet<N>,
    pub sin: Jet<N>,
    pub cos: Jet<N>,
    pub zeta: Jet<N>,
    pub zetab: Jet<N>,
    pub rho2: Jet<N>,
    pub delta: Jet<N>,
    pub rho: Jet<N>,
    pub rhob: Jet<N>,
    pub rhop: Jet<N>,
    pub rhopb: Jet<N>,
    pub tau: Jet<N>,
    pub taub: Jet<N>,
    pub taup: Jet<N>,
    pub taupb: Jet<N>,
    /// n^a w_a and its partner.
    pub gam: Jet<N>,
    pub gamb: Jet<N>,
    /// m^a w_a and its partner.
    pub beta: Jet<N>,
    pub betab: Jet<N>,
    /// m̄^a w_a and its partner.
    pub alpha: Jet<N>,
    pub alphab: Jet<N>,
    pub psi2: Jet<N>,
}

impl<const N: usize> Kin<N> {
    pub fn at(p: &KerrParams, r: Jet<N>, th: Jet<N>) -> Self {
        let (mass, a) = (p.m, p.a);
        let i = C64::new(0.0, 1.0);
        let (sin, cos) = th.sin_cos();
        let zeta = r - cos * (i * a);
        let zetab = r + cos * (i * a);
        let rho2 = zeta * zetab;
        let delta = r * r - r * (2.0 * mass) + a * a;
        let rho = -zeta.recip();
        let rhob = -zetab.recip();
        let rhop = delta / (zeta * rho2 * 2.0);
        let rhopb = delta / (zetab * rho2 * 2.0);
        let tau = sin * (-i * a / SQRT_2) / rho2;
        let taub = sin * (i * a / SQRT_2) / rho2;
        let taup = sin * (-i * a / SQRT_2) / zeta.sqr();
        let taupb = sin * (i * a / SQRT_2) / zetab.sqr();
        let half_rm = (r - mass) * 0.5;
        let gam = rho * rho * rhob * delta * 0.5 + rho * rhob * half_rm;
        let gamb = rhob * rhob * rho * delta * 0.5 + rho * rhob * half_rm;
        let cot = cos / sin;
        let beta = cot / (zetab * (2.0 * SQRT_2));
        let betab = cot / (zeta * (2.0 * SQRT_2));
        let alpha = sin * (i * a / SQRT_2) / zeta.sqr() - cot / (zeta * (2.0 * SQRT_2));
        let alphab = sin * (-i * a / SQRT_2) / zetab.sqr() - cot / (zetab * (2.0 * SQRT_2));
        let psi2 = -(zeta.powi(3)).recip() * mass;
        Self {
            mass, a, r, sin, cos, zeta, zetab, rho2, delta, rho, rhob, rhop, rhopb, tau, taub, taup, taupb, gam, gamb, beta, betab, alpha, alphab,
            psi2,
        }
    }

    /// Jet variable r at `r0`, θ held fixed.
    pub fn radial(p: &KerrParams, r0: impl Into<C64>, th: f64) -> Self {
        Self::at(p, Jet::var(r0), Jet::cst(th))
    }

    /// Jet variable θ at `th0`, r held fixed.
    pub fn angular(p: &KerrParams, r: f64, th0: f64) -> Self {
        Self::at(p, Jet::cst(r), Jet::var(th0))
    }

    /// Kinnersley vectors (t, r, θ, φ components).
    pub fn l(&self) -> [Jet<N>; 4] {
        let ra = self.r * self.r + self.a * self.a;
        [ra / self.delta, Jet::one(), Jet::zero(), Jet::cst(self.a) / self.delta]
    }

    pub fn n(&self) -> [Jet<N>; 4] {
        let ra = self.r * self.r + self.a * self.a;
        let d = self.rho2 * 2.0;
        [ra / d, -self.delta / d, Jet::zero(), Jet::cst(self.a) / d]
    }

    pub fn m(&self) -> [Jet<N>; 4] {
        let i = C64::new(0.0, 1.0);
        let k = (self.zetab * SQRT_2).recip();
        [self.sin * k * (i * self.a), Jet::zero(), k, k * i / self.sin]
    }

    pub fn mb(&self) -> [Jet<N>; 4] {
        let i = C64::new(0.0, 1.0);
        let k = (self.zeta * SQRT_2).recip();
        [self.sin * k * (-i * self.a), Jet::zero(), k, k * (-i) / self.sin]
    }
}

fn mode_part<const N: usize>(v: &[Jet<N>; 4], fr: Freq) -> Jet<N> {
    v[0] * fr.dt() + v[3] * fr.dphi()
}

/// þ on B(s, w): l^a∂_a (the l-contraction of the connection form vanishes here).
/// The jet variable must be r.
pub fn tho<const N: usize>(k: &Kin<N>, f: Jet<N>, fr: Freq, _wt: Weight) -> Jet<N> {
    let l = k.l();
    f.d() + mode_part(&l, fr) * f
}

/// þ′ on B(s, w). The jet variable must be r.
pub fn thop<const N: usize>(k: &Kin<N>, f: Jet<N>, fr: Freq, wt: Weight) -> Jet<N> {
    let n = k.n();
    let (p, q) = wt.pq();
    n[1] * f.d() + (mode_part(&n, fr) - k.gam * p - k.gamb * q) * f
}

/// ð on B(s, w). The jet variable must be θ.
pub fn eth<const N: usize>(k: &Kin<N>, f: Jet<N>, fr: Freq, wt: Weight) -> Jet<N> {
    let m = k.m();
    let (p, q) = wt.pq();
    m[2] * f.d() + (mode_part(&m, fr) - k.beta * p - k.alphab * q) * f
}

/// ð′ on B(s, w). The jet variable must be θ.
pub fn ethp<const N: usize>(k: &Kin<N>, f: Jet<N>, fr: Freq, wt: Weight) -> Jet<N> {
    let mb = k.mb();
    let (p, q) = wt.pq();
    mb[2] * f.d() + (mode_part(&mb, fr) - k.alpha * p - k.betab * q) * f
}

/// þ^n starting at weight `wt`; each step raises the boost weight by one.
pub fn tho_pow<const N: usize>(k: &Kin<N>, mut f: Jet<N>, fr: Freq, mut wt: Weight, n: usize) -> (Jet<N>, Weight) {
    for _ in 0..n {
        f = tho(k, f, fr, wt);
        wt.w += 1;
    }
    (f, wt)
}

/// þ′^n starting at weight `wt`; each step lowers the boost weight by one.
pub fn thop_pow<const N: usize>(k: &Kin<N>, mut f: Jet<N>, fr: Freq, mut wt: Weight, n: usize) -> (Jet<N>, Weight) {
    for _ in 0..n {
        f = thop(k, f, fr, wt);
        wt.w -= 1;
    }
    (f, wt)
}

/// ð^n starting at weight `wt`; each step raises the spin weight by one.
pub fn eth_pow<const N: usize>(k: &Kin<N>, mut f: Jet<N>, fr: Freq, mut wt: Weight, n: usize) -> (Jet<N>, Weight) {
    for _ in 0..n {
        f = eth(k, f, fr, wt);
        wt.s += 1;
    }
    (f, wt)
}

/// ð′^n starting at weight `wt`; each step lowers the spin weight by one.
pub fn ethp_pow<const N: usize>(k: &Kin<N>, mut f: Jet<N>, fr: Freq, mut wt: Weight, n: usize) -> (Jet<N>, Weight) {
    for _ in 0..n {
        f = ethp(k, f, fr, wt);
        wt.s -= 1;
    }
    (f, wt)
}

/// Radial symmetry operator R_s on B(s, s) applied to a radial jet.
pub fn radial_symmetry_op<const N: usize>(k: &Kin<N>, f: Jet<N>, fr: Freq, s: i32) -> Jet<N> {
    let sf = s as f64;
    let inner = thop(k, f, fr, Weight::new(s, s)) - k.rhop * (2.0 * sf) * f;
    let outer = tho(k, inner, fr, Weight::new(s, s - 1)) - (k.rho + k.rhob) * inner;
    k.rho2 * outer + (k.zeta + k.zetab) * fr.dt() * ((2.0 * sf - 1.0) * 0.5) * f
}

/// Angular symmetry operator S_s on B(s, s) applied to an angular jet.
pub fn angular_symmetry_op<const N: usize>(k: &Kin<N>, f: Jet<N>, fr: Freq, s: i32) -> Jet<N> {
    let sf = s as f64;
    let inner = ethp(k, f, fr, Weight::new(s, s)) - k.taup * (2.0 * sf) * f;
    let outer = eth(k, inner, fr, Weight::new(s - 1, s)) - (k.tau + k.taupb) * inner;
    k.rho2 * outer + (k.zeta - k.zetab) * fr.dt() * ((2.0 * sf - 1.0) * 0.5) * f
}
