//! Teukolsky–Starobinsky identities, the map B_s and physical mode pairs.
//!
//! A pair is generated by a spin −s mode solution ψ (weight (−s, −s), mode
//! data `mode.flipped()`): the first component is φ_s = þ^{2s}ψ̄ and the
//! second is A_sψ̄ = N ψ̄. Identities are evaluated pointwise at sample
//! radii and angles. Radial derivatives come from Taylor jets of the radial
//! ODE; angular ones from jets of the spheroidal harmonic.

use crate::angular::{ts_eigenvalue, SpheroidalMode};
use crate::error::{KerrError, Result};
use crate::ghp::{self, Freq, Kin, Weight};
use crate::jet::{Jet, C64};
use crate::radial::{radial_operator_build, ModePair, ModeSpec, RadialSolution, CHAIN_ORDER};
use serde::{Deserialize, Serialize};

const K: usize = CHAIN_ORDER;
type J = Jet<K>;

/// Angles at which identities are sampled.
pub const SAMPLE_THETAS: [f64; 3] = [0.5, 1.1, 2.3];
/// Number of radii sampled from a solution grid.
pub const SAMPLE_RADII: usize = 16;
/// Largest tolerated A_s/Ã_s exchange residual when building a pair.
pub const EXCHANGE_TOL: f64 = 1e-5;
/// Largest tolerated finite-difference residual of the generating solution.
pub const INPUT_RESIDUAL_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PairSource {
    FromHertz,
    FromPsi,
}

/// Consistency checks recorded when a pair is built. All are relative.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairChecks {
    /// φ̄_{−s} against B_sφ_s.
    pub b_consistency: f64,
    /// þ^{2s}A_sψ̄ against Ã_sþ^{2s}ψ̄.
    pub exchange: f64,
    /// A_sψ̄ against N ψ̄.
    pub a_diagonal: f64,
    /// φ_s in the spin-s radial equation.
    pub phi_s_residual: f64,
    /// 2^s B_sφ_s against A_sΦ̄ for the Hertz route.
    pub hertz_rel2: Option<f64>,
}

/// Residuals of the three decoupled fourth-order identities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TsResiduals {
    pub plus: f64,
    pub minus: f64,
    pub bar_minus: f64,
}

impl TsResiduals {
    pub fn max(&self) -> f64 {
        self.plus.max(self.minus).max(self.bar_minus)
    }
}

/// A physical pair (φ_s, φ̄_{−s}) at frequency (ω, m).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PhysicalModePair {
    /// Spin-s mode data of the first component.
    pub mode: ModeSpec,
    pub source: PairSource,
    /// Teukolsky–Starobinsky constant.
    pub n: f64,
    /// Generating solution ψ (the pair is built from its conjugate).
    pub psi: RadialSolution,
    /// Radial part of φ_s.
    pub phi_s: RadialSolution,
    /// Radial part of φ_{−s}; the second component is its conjugate.
    pub phi_minus_s: RadialSolution,
    pub checks: PairChecks,
}

impl PhysicalModePair {
    pub fn to_mode_pair(&self) -> Result<ModePair> {
        ModePair::from_solutions(&self.phi_s, &self.phi_minus_s)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| KerrError::InvalidParameter(e.to_string()))
    }
}

fn angular_jet(ang: &SpheroidalMode, th: f64) -> J {
    ang.eval_jet::<K>(Jet::var(th))
}

fn sample_indices(n: usize) -> Vec<usize> {
    let k = SAMPLE_RADII.min(n);
    if k <= 1 {
        return vec![0];
    }
    (0..k).map(|j| j * (n - 1) / (k - 1)).collect()
}

/// Running max of |lhs − rhs| / scale over the angles of one radius.
#[derive(Default)]
struct Residual {
    worst: f64,
    diff: f64,
    scale: f64,
}

impl Residual {
    fn add(&mut self, lhs: C64, rhs: C64, extra: f64) {
        self.diff = self.diff.max((lhs - rhs).norm());
        self.scale = self.scale.max(lhs.norm()).max(rhs.norm()).max(extra);
    }

    fn next_radius(&mut self) {
        if self.scale > 0.0 {
            self.worst = self.worst.max(self.diff / self.scale);
        }
        self.diff = 0.0;
        self.scale = 0.0;
    }
}

fn chi_xi(mode: &ModeSpec, fr: Freq) -> C64 {
    // 9 δ_{s,2} M² L_ξ^s
    if mode.s.abs() == 2 {
        fr.dt().powi(2) * (9.0 * mode.params.m * mode.params.m)
    } else {
        C64::new(0.0, 0.0)
    }
}

/// A_s f = [ζ̄^{2s}ð^{2s}ζ^{2s}ð′^{2s} − 9δM²L_ξ²] f on B(s, −s); θ-jet input.
fn a_s_theta(k: &Kin<K>, f: J, fr: Freq, s: i32, xi: C64) -> J {
    let n = 2 * s as usize;
    let (g, wt) = ghp::ethp_pow(k, f, fr, Weight::new(s, -s), n);
    let (g, _) = ghp::eth_pow(k, k.zeta.powi(2 * s) * g, fr, wt, n);
    k.zetab.powi(2 * s) * g - f * xi
}

/// Ã_s f = [ð^{2s}ζ̄^{2s}ð′^{2s}ζ^{2s} − 9δM²L_ξ²] f on B(s, s); θ-jet input.
fn a_tilde_theta(k: &Kin<K>, f: J, fr: Freq, s: i32, xi: C64) -> J {
    let n = 2 * s as usize;
    let (g, wt) = ghp::ethp_pow(k, k.zeta.powi(2 * s) * f, fr, Weight::new(s, s), n);
    let (g, _) = ghp::eth_pow(k, k.zetab.powi(2 * s) * g, fr, wt, n);
    g - f * xi
}

/// B_s on an r-jet of weight (s, s): ζ̄^{2s}þ′^{2s}ζ^{2s}.
fn b_s_radial(k: &Kin<K>, f: J, fr: Freq, s: i32) -> J {
    let (g, _) = ghp::thop_pow(k, k.zeta.powi(2 * s) * f, fr, Weight::new(s, s), 2 * s as usize);
    k.zetab.powi(2 * s) * g
}

/// B_sφ_s = ζ̄^{2s}þ′^{2s}ζ^{2s}φ_s for a spin-s mode solution, at every grid
/// point and angle `theta`. The boost weight runs (s, s), (s, s−1), …, (s, −s).
pub fn b_s_apply(phi_s: &RadialSolution, theta: f64) -> Result<Vec<C64>> {
    let mode = &phi_s.mode;
    if !(0..=2).contains(&mode.s) {
        return Err(KerrError::InvalidParameter(format!("B_s needs s in {{0,1,2}}, got {}", mode.s)));
    }
    let sv = mode.angular()?.eval(theta);
    let fr = mode.freq();
    Ok((0..phi_s.len())
        .map(|i| {
            let k = Kin::<K>::radial(&mode.params, phi_s.grid[i], theta);
            b_s_radial(&k, phi_s.taylor::<K>(i) * sv, fr, mode.s).val()
        })
        .collect())
}

fn check_generator(mode: &ModeSpec, psi: &RadialSolution) -> Result<()> {
    let want = mode.flipped();
    let same = psi.mode.s == want.s
        && psi.mode.m == want.m
        && psi.mode.ell == want.ell
        && psi.mode.params == want.params
        && (psi.mode.omega - want.omega).abs() <= 1e-14 * (1.0 + want.omega.abs())
        && (psi.mode.sbar - want.sbar).abs() <= 1e-10 * (1.0 + want.sbar.abs());
    if !same {
        return Err(KerrError::InvalidParameter("generating solution must carry the flipped mode data".into()));
    }
    if !(0..=2).contains(&mode.s) {
        return Err(KerrError::InvalidParameter(format!("pairs need s in {{0,1,2}}, got {}", mode.s)));
    }
    if psi.len() >= 9 && psi.value.iter().any(|v| v.norm() > 0.0) {
        let res = psi.residual()?;
        if res > INPUT_RESIDUAL_TOL {
            return Err(KerrError::InvalidParameter(format!("generating solution has residual {res:e}")));
        }
    }
    Ok(())
}

fn build(mode: &ModeSpec, psi: RadialSolution, source: PairSource) -> Result<PhysicalModePair> {
    check_generator(mode, &psi)?;
    let mut mode = *mode;
    mode.sbar = psi.mode.sbar + mode.s as f64;
    let s = mode.s;
    let p = mode.params;
    let fr = mode.freq();
    let xi = chi_xi(&mode, fr);
    let n = ts_eigenvalue(&p, s, mode.omega, mode.m, mode.ell)?.n;
    let ang = mode.angular()?;
    let ode = radial_operator_build(&mode);

    // φ_s = þ^{2s}ψ̄, radially; þ carries no angular dependence.
    let mut phi_val = Vec::with_capacity(psi.len());
    let mut phi_der = Vec::with_capacity(psi.len());
    let mut ode_res: f64 = 0.0;
    for i in 0..psi.len() {
        let k = Kin::<K>::radial(&p, psi.grid[i], crate::radial::THETA_REF);
        let (g, _) = ghp::tho_pow(&k, psi.taylor::<K>(i).conj(), fr, Weight::new(s, -s), 2 * s as usize);
        let (v, d, dd) = (g.c[0], g.c[1], g.c[2] * 2.0);
        let [a, b, c] = ode.coeffs(psi.grid[i]);
        let scale = (a * dd).norm() + (b * d).norm() + (c * v).norm();
        if scale > 0.0 {
            ode_res = ode_res.max((a * dd + b * d + c * v).norm() / scale);
        }
        phi_val.push(v);
        phi_der.push(d);
    }
    let phi_s = RadialSolution { mode, bc: psi.bc.flipped(), grid: psi.grid.clone(), value: phi_val, derivative: phi_der };
    let phi_minus_s = psi.scaled(C64::from(n));

    let (mut b_res, mut exch, mut diag) = (Residual::default(), Residual::default(), Residual::default());
    for i in sample_indices(psi.len()) {
        let r = psi.grid[i];
        let psib = psi.value[i].conj();
        let phi = phi_s.value[i];
        for &th in &SAMPLE_THETAS {
            let sj = angular_jet(&ang, th);
            let sv = sj.val();
            let kr = Kin::<K>::radial(&p, r, th);
            let bs = b_s_radial(&kr, phi_s.taylor::<K>(i) * sv, fr, s).val();
            b_res.add(bs, phi_minus_s.value[i].conj() * sv, 0.0);

            let ka = Kin::<K>::angular(&p, r, th);
            let a_psi = a_s_theta(&ka, sj * psib, fr, s, xi).val();
            diag.add(a_psi, psib * sv * n, (psib * sv * xi).norm());
            let at_phi = a_tilde_theta(&ka, sj * phi, fr, s, xi).val();
            exch.add(phi * sv * n, at_phi, (phi * sv * xi).norm());
        }
        b_res.next_radius();
        exch.next_radius();
        diag.next_radius();
    }
    let checks = PairChecks { b_consistency: b_res.worst, exchange: exch.worst, a_diagonal: diag.worst, phi_s_residual: ode_res, hertz_rel2: None };
    if checks.exchange > EXCHANGE_TOL {
        return Err(KerrError::BoundViolation(format!("exchange identity residual {:e}", checks.exchange)));
    }
    Ok(PhysicalModePair { mode, source, n, psi, phi_s, phi_minus_s, checks })
}

/// The pair (þ^{2s}ψ̄, A_sψ̄) generated by a spin −s mode solution ψ of `mode.flipped()`.
pub fn physical_pair(mode: &ModeSpec, psi: &RadialSolution) -> Result<PhysicalModePair> {
    build(mode, psi.clone(), PairSource::FromPsi)
}

/// Field from a Hertz potential Φ (a spin −s mode solution): φ_s = 2^{−s}þ^{2s}Φ̄.
/// The pair is the physical pair of ψ = 2^{−s}Φ. The second Hertz relation
/// 2^s B_sφ_s = A_sΦ̄ is evaluated directly and recorded.
pub fn hertz_reconstruct(mode: &ModeSpec, phi_irg: &RadialSolution) -> Result<PhysicalModePair> {
    let s = mode.s;
    let scale = 0.5f64.powi(s);
    let mut pair = build(mode, phi_irg.scaled(C64::from(scale)), PairSource::FromHertz)?;
    let p = pair.mode.params;
    let fr = pair.mode.freq();
    let xi = chi_xi(&pair.mode, fr);
    let ang = pair.mode.angular()?;
    let mut rel = Residual::default();
    for i in sample_indices(phi_irg.len()) {
        let r = phi_irg.grid[i];
        for &th in &SAMPLE_THETAS {
            let sj = angular_jet(&ang, th);
            let kr = Kin::<K>::radial(&p, r, th);
            let lhs = b_s_radial(&kr, pair.phi_s.taylor::<K>(i) * sj.val(), fr, s).val() * 2f64.powi(s);
            let ka = Kin::<K>::angular(&p, r, th);
            let rhs = a_s_theta(&ka, sj * phi_irg.value[i].conj(), fr, s, xi).val();
            rel.add(lhs, rhs, (phi_irg.value[i] * sj.val() * xi).norm());
        }
        rel.next_radius();
    }
    pair.checks.hertz_rel2 = Some(rel.worst);
    Ok(pair)
}

/// Residuals of the plus, minus and barred-minus identities, sampled over
/// the pair grid. Each is normalized by the largest term at that radius.
pub fn ts_residuals(pair: &PhysicalModePair) -> Result<TsResiduals> {
    let mode = pair.mode;
    let s = mode.s;
    let n = 2 * s as usize;
    let p = mode.params;
    let fr = mode.freq();
    let frc = fr.conj();
    let xi = chi_xi(&mode, fr);
    let xic = chi_xi(&mode, frc);
    let ang = mode.angular()?;
    let (mut plus, mut minus, mut bar) = (Residual::default(), Residual::default(), Residual::default());
    for i in sample_indices(pair.phi_s.len()) {
        let r = pair.phi_s.grid[i];
        for &th in &SAMPLE_THETAS {
            let sj = angular_jet(&ang, th);
            let sv = sj.val();
            let kr = Kin::<K>::radial(&p, r, th);
            let ka = Kin::<K>::angular(&p, r, th);

            // þ^{2s}ζ̄^{2s}þ′^{2s}ζ^{2s}φ_s = ð^{2s}ζ̄^{2s}ð′^{2s}ζ^{2s}φ_s − 9δM²L_ξ^sφ_s
            let f = pair.phi_s.taylor::<K>(i) * sv;
            let (g, wt) = ghp::thop_pow(&kr, kr.zeta.powi(2 * s) * f, fr, Weight::new(s, s), n);
            let (lhs, _) = ghp::tho_pow(&kr, kr.zetab.powi(2 * s) * g, fr, wt, n);
            let rhs = a_tilde_theta(&ka, sj * pair.phi_s.value[i], fr, s, xi);
            plus.add(lhs.val(), rhs.val(), (f.val() * xi).norm());

            // Φ = ζ^{2s}φ_{−s} solves T_{−s}:
            // þ′^{2s}ζ̄^{2s}þ^{2s}Φ = ð′^{2s}ζ̄^{2s}ð^{2s}Φ − 9δM²L_ξ^sζ^{−2s}Φ
            let f = pair.phi_minus_s.taylor::<K>(i) * sv;
            let (g, wt) = ghp::tho_pow(&kr, f, frc, Weight::new(-s, -s), n);
            let (lhs, _) = ghp::thop_pow(&kr, kr.zetab.powi(2 * s) * g, frc, wt, n);
            let fa = sj * pair.phi_minus_s.value[i];
            let (g, wt) = ghp::eth_pow(&ka, fa, frc, Weight::new(-s, -s), n);
            let (g, _) = ghp::ethp_pow(&ka, ka.zetab.powi(2 * s) * g, frc, wt, n);
            let rhs = g - ka.zeta.powi(-2 * s) * fa * xic;
            minus.add(lhs.val(), rhs.val(), (ka.zeta.powi(-2 * s) * fa * xic).val().norm());

            // þ′^{2s}ζ^{2s}þ^{2s}ψ̄ = [ð^{2s}ζ^{2s}ð′^{2s} − 9δM²L_ξ^sζ̄^{−2s}]ψ̄
            let f = pair.psi.taylor::<K>(i).conj() * sv;
            let (g, wt) = ghp::tho_pow(&kr, f, fr, Weight::new(s, -s), n);
            let (lhs, _) = ghp::thop_pow(&kr, kr.zeta.powi(2 * s) * g, fr, wt, n);
            let fa = sj * pair.psi.value[i].conj();
            let (g, wt) = ghp::ethp_pow(&ka, fa, fr, Weight::new(s, -s), n);
            let (g, _) = ghp::eth_pow(&ka, ka.zeta.powi(2 * s) * g, fr, wt, n);
            let tail = ka.zetab.powi(-2 * s) * fa * xi;
            let rhs = g - tail;
            bar.add(lhs.val(), rhs.val(), tail.val().norm());
        }
        plus.next_radius();
        minus.next_radius();
        bar.next_radius();
    }
    Ok(TsResiduals { plus: plus.worst, minus: minus.worst, bar_minus: bar.worst })
}
