//! Verification suites. Each check reports the identity it tests, a residual,
//! the tolerance it is held to and its wall time.

use crate::config::RunConfig;
use kerrteuk::angular::{self, SpinWeightedField};
use kerrteuk::geometry::{self, Chart, ChartPoint};
use kerrteuk::radial::{self, Bc, ModePair, ModeSpec, RadialSolution, DEFAULT_TOL};
use kerrteuk::tetrad::{self, closed, Scaling};
use kerrteuk::unruh::{self, Branch, Surface};
use kerrteuk::{tsid, KerrParams, Result, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::PI;
use std::time::Instant;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Geometry,
    Tetrad,
    Angular,
    Radial,
    Tsid,
    Unruh,
    All,
}

impl Suite {
    pub fn members(self) -> Vec<Suite> {
        use Suite::*;
        match self {
            All => vec![Geometry, Tetrad, Angular, Radial, Tsid, Unruh],
            s => vec![s],
        }
    }

    pub fn name(self) -> &'static str {
        use Suite::*;
        match self {
            Geometry => "geometry",
            Tetrad => "tetrad",
            Angular => "angular",
            Radial => "radial",
            Tsid => "tsid",
            Unruh => "unruh",
            All => "all",
        }
    }
}

/// Deliberate defects used as negative controls.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Faults {
    /// Flip the sign of the Teukolsky potential Γ_a before it is checked.
    pub gamma_sign: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub id: String,
    pub suite: &'static str,
    /// The identity under test, written out.
    pub equation: &'static str,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Wall time; kept out of reports so they stay reproducible.
    #[serde(skip)]
    pub seconds: f64,
    pub detail: String,
}

struct Recorder<'a> {
    suite: &'static str,
    out: &'a mut Vec<Check>,
}

impl Recorder<'_> {
    /// Run `f`, which returns (residual, detail); an error fails the check.
    fn check(&mut self, id: &str, equation: &'static str, tolerance: f64, f: impl FnOnce() -> Result<(f64, String)>) {
        let t0 = Instant::now();
        let (residual, detail) = match f() {
            Ok(v) => v,
            Err(e) => (f64::INFINITY, format!("error: {e}")),
        };
        self.out.push(Check {
            id: format!("{}.{id}", self.suite),
            suite: self.suite,
            equation,
            residual,
            tolerance,
            pass: residual <= tolerance,
            seconds: t0.elapsed().as_secs_f64(),
            detail,
        });
    }
}

pub fn run_suite(cfg: &RunConfig, suite: Suite, faults: Faults) -> Vec<Check> {
    let mut out = Vec::new();
    for s in suite.members() {
        let mut rec = Recorder { suite: s.name(), out: &mut out };
        match s {
            Suite::Geometry => geometry_suite(cfg, &mut rec),
            Suite::Tetrad => tetrad_suite(cfg, &mut rec, faults),
            Suite::Angular => angular_suite(cfg, &mut rec),
            Suite::Radial => radial_suite(cfg, &mut rec),
            Suite::Tsid => tsid_suite(cfg, &mut rec),
            Suite::Unruh => unruh_suite(cfg, &mut rec),
            Suite::All => unreachable!(),
        }
    }
    out
}

/// The spin sweep a ∈ {0, a_cfg, 0.9} at the configured mass.
fn spin_sweep(cfg: &RunConfig) -> Vec<KerrParams> {
    let m = cfg.params.m;
    let mut v = vec![0.0, cfg.params.a, 0.9 * m];
    v.dedup_by(|x, y| (*x - *y).abs() < 1e-15);
    v.into_iter().filter_map(|a| KerrParams::new(m, a).ok()).collect()
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

// ---------------------------------------------------------------- geometry

fn random_exterior(rng: &mut ChaCha8Rng, p: &KerrParams) -> [f64; 4] {
    let r = p.r_plus() + 0.05 * p.m + rng.random::<f64>() * 20.0 * p.m;
    [rng.random_range(-5.0..5.0), r, rng.random_range(0.1..PI - 0.1), rng.random_range(0.0..2.0 * PI)]
}

fn geometry_suite(cfg: &RunConfig, rec: &mut Recorder) {
    let sweep = spin_sweep(cfg);
    rec.check("horizon-roots", "Δ(r±) = r±² − 2Mr± + a² = 0", 1e-12, || {
        let worst = sweep.iter().map(|p| [p.r_plus(), p.r_minus()].iter().map(|&r| p.delta(r).abs() / (r * r).max(p.m * p.m)).fold(0.0, f64::max)).fold(0.0, f64::max);
        Ok((worst, format!("{} spins", sweep.len())))
    });
    rec.check("surface-gravity", "κ₊ = Δ′(r₊)/(2(r₊² + a²)) = (r₊ − r₋)/(2(r₊² + a²))", 1e-12, || {
        let worst = sweep
            .iter()
            .map(|p| {
                let rp = p.r_plus();
                let k = (2.0 * rp - 2.0 * p.m) / (2.0 * (rp * rp + p.a * p.a));
                (p.kappa_plus() - k).abs() / k
            })
            .fold(0.0, f64::max);
        Ok((worst, String::new()))
    });
    rec.check("metric-compatibility", "∇_a g_bc = 0", 1e-7, || {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut worst: f64 = 0.0;
        for p in &sweep {
            for _ in 0..10 {
                let c = random_exterior(&mut rng, p);
                for ch in [Chart::BoyerLindquist, Chart::KerrStar, Chart::StarKerr] {
                    worst = worst.max(geometry::metric_compatibility_residual(p, &ChartPoint::new(ch, c))?);
                }
                let k = ChartPoint::new(Chart::Kruskal, [-rng.random::<f64>(), 2.0 * rng.random::<f64>(), c[2], c[3]]);
                worst = worst.max(geometry::metric_compatibility_residual(p, &k)?);
            }
        }
        Ok((worst, "BL, Kerr-star, star-Kerr and Kruskal charts".into()))
    });
    rec.check("vacuum-ricci", "R = 0", 1e-8, || {
        let mut worst: f64 = 0.0;
        for p in &sweep {
            worst = worst.max(geometry::ricci_scalar(p, &ChartPoint::bl(0.0, 3.0 * p.m, PI / 3.0, 0.0))?.abs());
            worst = worst.max(geometry::ricci_scalar(p, &ChartPoint::new(Chart::Kruskal, [-0.4, 0.7, 1.0, 0.0]))?.abs());
        }
        Ok((worst, String::new()))
    });
    rec.check("conformal-ricci", "R̆ of ğ = x²g matches its closed form", 1e-5, || {
        let mut worst: f64 = 0.0;
        for p in &sweep {
            for &(x, th) in &[(0.23, PI / 3.0), (0.1, 0.4), (0.2, 2.0)] {
                let pt = ChartPoint::new(Chart::Conformal, [0.0, x / p.m, th, 0.0]);
                let closed = geometry::conformal_ricci(p, &pt)?;
                let numeric = -geometry::ricci_scalar(p, &pt)?;
                worst = worst.max((closed - numeric).abs() / (1.0 + closed.abs()));
            }
        }
        Ok((worst, "curvature sign convention of the closed form is opposite".into()))
    });
    rec.check("chart-round-trip", "BL ∘ (chart) = id on the chart domains", 1e-10, || {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 1);
        let mut worst: f64 = 0.0;
        for p in &sweep {
            for target in [Chart::KerrStar, Chart::StarKerr, Chart::Kruskal, Chart::Conformal] {
                for _ in 0..50 {
                    let mut c = random_exterior(&mut rng, p);
                    if target == Chart::Conformal {
                        c[1] += 4.0 * p.m;
                    }
                    let bl = ChartPoint::bl(c[0], c[1], c[2], c[3]);
                    let back = geometry::chart_transform(p, &geometry::chart_transform(p, &bl, target)?, Chart::BoyerLindquist)?;
                    for k in 0..4 {
                        worst = worst.max((back.coords[k] - c[k]).abs() / (1.0 + c[k].abs()));
                    }
                }
            }
        }
        Ok((worst, String::new()))
    });
    rec.check("tortoise", "dr*/dr = (r² + a²)/Δ, dφ*/dr = a/Δ", 1e-8, || {
        let mut worst: f64 = 0.0;
        for p in &sweep {
            for &r in &[p.r_plus() + 0.3, 4.0 * p.m, 15.0 * p.m] {
                let h = 1e-4 * r;
                let d = |k: usize| {
                    let f = |x: f64| {
                        let t = geometry::tortoise_canonical(p, x);
                        if k == 0 { t.0 } else { t.1 }
                    };
                    (-f(r + 2.0 * h) + 8.0 * f(r + h) - 8.0 * f(r - h) + f(r - 2.0 * h)) / (12.0 * h)
                };
                let want = ((r * r + p.a * p.a) / p.delta(r), p.a / p.delta(r));
                worst = worst.max((d(0) - want.0).abs() / want.0.abs());
                worst = worst.max((d(1) - want.1).abs() / (1.0 + want.1.abs()));
            }
        }
        Ok((worst, "fourth-order differences".into()))
    });
    rec.check("kruskal-inverse", "r(UV) inverts UV = G(r)", 1e-12, || {
        let mut worst: f64 = 0.0;
        for p in &sweep {
            let h = p.horizons();
            for i in 0..200 {
                let r = h.r_minus + 0.01 + (10.0 * p.m - h.r_minus - 0.01) * i as f64 / 199.0;
                if (r - h.r_plus).abs() < 1e-6 {
                    continue;
                }
                let back = geometry::kruskal_radius(p, p.kruskal_uv(r))?;
                worst = worst.max(((back - r) / r).abs());
            }
        }
        Ok((worst, String::new()))
    });
}

// ---------------------------------------------------------------- tetrad

fn exterior_grid(p: &KerrParams, n: usize) -> Vec<(f64, f64)> {
    let rp = p.r_plus();
    let r_hi = 20.0 * p.m;
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        let r = rp + 0.05 * p.m + (r_hi - rp - 0.05 * p.m) * i as f64 / (n - 1) as f64;
        for j in 0..n {
            out.push((r, 0.15 + (PI - 0.3) * j as f64 / (n - 1) as f64));
        }
    }
    out
}

fn ghp(p: &KerrParams, pt: &ChartPoint, scaling: &Scaling, faults: Faults) -> Result<tetrad::GhpPoint> {
    let mut g = tetrad::ghp_at(p, pt, scaling)?;
    if faults.gamma_sign {
        g.gamma = g.gamma.map(|v| -v);
    }
    Ok(g)
}

fn tetrad_suite(cfg: &RunConfig, rec: &mut Recorder, faults: Faults) {
    let sweep = spin_sweep(cfg);
    let tol = cfg.tolerance;
    // One pass over the 20 × 20 grid feeds all four potential identities.
    let t0 = Instant::now();
    let grid_result: Result<[f64; 4]> = (|| {
        let mut worst = [0.0f64; 4];
        for p in &sweep {
            for (r, th) in exterior_grid(p, 20) {
                let pt = ChartPoint::bl(0.0, r, th, 0.0);
                let g = ghp(p, &pt, &Scaling::Kinnersley, faults)?;
                let mut div = tetrad::gamma_divergence(p, &pt, &Scaling::Kinnersley, 1e-2 * p.m)?;
                if faults.gamma_sign {
                    div = -div;
                }
                let e = [
                    rel(g.l_gamma(), closed::l_gamma(p, r, th)),
                    rel(g.n_gamma(), closed::n_gamma(p, r, th)),
                    rel(div, C64::from(closed::div_gamma(p, r, th))),
                    rel(g.gamma_square(), closed::gamma_square(p, r, th)),
                ];
                for k in 0..4 {
                    worst[k] = worst[k].max(e[k]);
                }
            }
        }
        Ok(worst)
    })();
    let grid_secs = t0.elapsed().as_secs_f64() / 4.0;
    let eqs = [
        ("l-gamma", "l^aΓ_a = p/ϱ²"),
        ("n-gamma", "n^aΓ_a = (pΔ − ϱ²(r − M))/(2ϱ⁴)"),
        ("div-gamma", "∇_aΓ^a = −1/(2ϱ²)"),
        ("gamma-square", "Γ_aΓ^a = cot²θ/(4ϱ²) + Ψ₂"),
    ];
    for (k, (id, eq)) in eqs.iter().enumerate() {
        let value = grid_result.clone().map(|w| (w[k], format!("20×20 grid, {} spins", sweep.len())));
        rec.check(id, eq, tol, || value);
        rec.out.last_mut().unwrap().seconds = grid_secs;
    }
    rec.check("frame-normalisation", "l·n = 1, m·m̄ = −1, all other products 0", 1e-10, || {
        let mut worst: f64 = 0.0;
        for p in &sweep {
            for &(r, th) in &[(2.5 * p.m, 0.7), (6.0 * p.m, 2.0), (15.0 * p.m, 1.3)] {
                for ch in [Chart::BoyerLindquist, Chart::KerrStar, Chart::StarKerr] {
                    let t = tetrad::tetrad_build(p, &ChartPoint::new(ch, [0.0, r, th, 0.0]), Scaling::Kinnersley)?;
                    worst = worst.max(tetrad::frame_check(p, &t)?.max_residual);
                }
            }
        }
        Ok((worst, String::new()))
    });
    rec.check("spin-coefficients", "ρ = −1/ζ, τ, ρ′, τ′, Ψ₂ = −M/ζ³ in the Kinnersley frame", 1e-10, || {
        let mut worst: f64 = 0.0;
        for p in &sweep {
            for &(r, th) in &[(2.5 * p.m, 0.7), (6.0 * p.m, 2.0)] {
                let t = tetrad::tetrad_build(p, &ChartPoint::bl(0.0, r, th, 0.0), Scaling::Kinnersley)?;
                let g = tetrad::spin_coefficients(p, &t)?;
                let c = closed::kinnersley_spin(p, r, th);
                for (x, y) in [(g.rho, c.rho), (g.tau, c.tau), (g.rho_prime, c.rho_prime), (g.tau_prime, c.tau_prime), (g.psi2, p.psi2(r, th))] {
                    worst = worst.max((x - y).norm() / (1.0 + y.norm()));
                }
            }
        }
        Ok((worst, String::new()))
    });
    rec.check("kruskal-horizon", "𝔫^aΓ_a = O(V) on H", tol, || {
        let mut worst: f64 = 0.0;
        for p in &sweep {
            let th = 0.8;
            let on_h = ghp(p, &ChartPoint::new(Chart::Kruskal, [-0.7, 0.0, th, 0.0]), &Scaling::Kruskal, faults)?.n_gamma().norm();
            worst = worst.max(on_h);
            for &v in &[1e-2, 1e-3, 1e-4] {
                let pt = ChartPoint::new(Chart::Kruskal, [-0.7, v, th, 0.0]);
                let r = geometry::chart_radius(p, &pt)?;
                let num = ghp(p, &pt, &Scaling::Kruskal, faults)?.n_gamma();
                let want = closed::n_gamma_kruskal(p, r, th, v);
                worst = worst.max((num - want).norm() / (1.0 + want.norm()));
            }
        }
        Ok((worst, "value on V = 0 and agreement with the closed form linear in V".into()))
    });
    rec.check("conformal-limit", "n̆^aΓ̆_a → −M/2 + ia cosθ/2 at I", 1e-6, || {
        let mut worst: f64 = 0.0;
        for p in &sweep {
            for th in [0.5, PI / 2.0, 2.3] {
                let at = |x: f64| ghp(p, &ChartPoint::new(Chart::Conformal, [0.0, x, th, 0.0]), &Scaling::Conformal, faults).map(|g| g.n_gamma());
                let (n2, n3) = (at(1e-3 / p.m)?, at(1e-4 / p.m)?);
                let ext = (n3 * 10.0 - n2) / 9.0;
                worst = worst.max((ext - closed::conformal_n_gamma_limit(p, th)).norm());
                worst = worst.max((ext.re + 0.5 * p.m).abs());
            }
        }
        Ok((worst, "Richardson extrapolation from x = 1e-3, 1e-4".into()))
    });
    rec.check("rescaling", "Γ_a ↦ Γ_a − ∇_a log λ under l ↦ λl, n ↦ λ̄⁻¹n", 1e-12, || {
        let p = cfg.params;
        let cs = tetrad::CustomScaling { c: C64::new(0.7, 0.4), pr: 0.8, q: C64::new(0.3, -0.5) };
        let mut worst: f64 = 0.0;
        for &(r, th) in &[(3.0 * p.m, 1.0), (7.0 * p.m, 2.2)] {
            let pt = ChartPoint::bl(0.0, r, th, 0.0);
            let g0 = ghp(&p, &pt, &Scaling::Kinnersley, faults)?;
            let g1 = ghp(&p, &pt, &Scaling::Custom(cs), faults)?;
            let dl = [C64::from(0.0), C64::from(cs.pr / r), -cs.q * th.sin(), C64::from(0.0)];
            for k in 0..4 {
                worst = worst.max((g1.gamma[k] - (g0.gamma[k] - dl[k])).norm());
            }
        }
        Ok((worst, String::new()))
    });
}

// ---------------------------------------------------------------- angular

/// The TS grid: s ∈ {1, 2}, |m| ≤ m_max, ℓ ≤ ℓ_max, aω ∈ {0, 0.1, 0.5}, a ∈ {0, a_cfg, 0.9}.
pub fn ts_grid(cfg: &RunConfig) -> Vec<(KerrParams, i32, f64, i32, i32)> {
    let mut out = Vec::new();
    for p in spin_sweep(cfg) {
        for c in [0.0, 0.1, 0.5] {
            let omega = if p.a != 0.0 { c / p.a } else { c };
            for s in 1..=2 {
                for m in -cfg.m_max..=cfg.m_max {
                    for ell in s.max(m.abs())..=cfg.ell_max {
                        out.push((p, s, omega, m, ell));
                    }
                }
            }
        }
    }
    out
}

fn angular_suite(cfg: &RunConfig, rec: &mut Recorder) {
    rec.check("swsh-orthonormal", "∫ ₛY_ℓm ₛY_ℓ′m dΩ = δ_ℓℓ′", 1e-12, || {
        let mut worst: f64 = 0.0;
        for s in [-2i32, 0, 1, 2] {
            for m in -3i32..=3 {
                let lmax = 10;
                let (xs, ws) = kerrteuk::numerics::gauss_legendre((lmax + 8) as usize);
                let l0 = s.abs().max(m.abs());
                let dim = (lmax - l0 + 1) as usize;
                let mut gram = vec![vec![0.0; dim]; dim];
                for (x, w) in xs.iter().zip(&ws) {
                    let ys: Vec<f64> = angular::swsh_all_jet::<1>(s, m, lmax, kerrteuk::Jet::cst(x.acos())).iter().map(|v| v.re()).collect();
                    for i in 0..dim {
                        for j in 0..dim {
                            gram[i][j] += 2.0 * PI * w * ys[i] * ys[j];
                        }
                    }
                }
                for (i, row) in gram.iter().enumerate() {
                    for (j, g) in row.iter().enumerate() {
                        worst = worst.max((g - if i == j { 1.0 } else { 0.0 }).abs());
                    }
                }
            }
        }
        Ok((worst, "s ∈ {−2, 0, 1, 2}, |m| ≤ 3, ℓ ≤ 10".into()))
    });
    rec.check("spherical-limit", "S̄ = −(ℓ(ℓ + 1) − s(s + 1))/2 at aω = 0", 1e-12, || {
        let mut worst: f64 = 0.0;
        for s in -2i32..=2 {
            for m in -2i32..=2 {
                for ell in s.abs().max(m.abs())..=6 {
                    let sb = angular::spheroidal_mode(s, m, 0.0, ell)?.sbar;
                    let want = -0.5 * ((ell * (ell + 1)) as f64 - (s * (s + 1)) as f64);
                    worst = worst.max((sb - want).abs() / (1.0 + want.abs()));
                }
            }
        }
        Ok((worst, String::new()))
    });
    rec.check("spheroidal-orthonormal", "Σ_j v_ℓ,j v_ℓ′,j = δ_ℓℓ′ for the spheroidal eigenvectors", 1e-12, || {
        let mut worst: f64 = 0.0;
        for &c in &[0.3, 2.0] {
            let modes = angular::spheroidal_solve(2, 1, c, 24)?;
            for a in &modes {
                for b in &modes {
                    let d: f64 = a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x * y).sum();
                    worst = worst.max((d - if a.ell == b.ell { 1.0 } else { 0.0 }).abs());
                }
            }
        }
        Ok((worst, String::new()))
    });
    let grid = ts_grid(cfg);
    for s in 1..=2 {
        let id = if s == 1 { "ts-oracle-s1" } else { "ts-oracle-s2" };
        let eq = if s == 1 { "N(1) polynomial in S̄ = L₊L₋ chain eigenvalue" } else { "N(2) polynomial in S̄ = L-operator chain eigenvalue" };
        rec.check(id, eq, cfg.tolerance, || {
            let mut worst: f64 = 0.0;
            let mut count = 0;
            for &(p, ss, omega, m, ell) in grid.iter().filter(|g| g.1 == s) {
                let n = angular::ts_eigenvalue(&p, ss, omega, m, ell)?.n;
                let o = angular::ts_oracle(&p, ss, omega, m, ell)?;
                worst = worst.max((n - o).abs() / o.abs());
                count += 1;
            }
            Ok((worst, format!("{count} modes")))
        });
    }
    rec.check("n1-positive", "N(1, ω, m, ℓ) > 0", 0.0, || bound_violations(&grid, 1));
    rec.check("n2-bound", "N(2, ω, m, ℓ) > 9M²ω²", 0.0, || bound_violations(&grid, 2));
    rec.check("a-s-inverse", "A_s A_s⁻¹ = 1 on spheroidal coefficients", 1e-10, || {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 2);
        let mut f = SpinWeightedField::zeros(2, 5);
        for l in 2..=5 {
            for m in -l..=l {
                f.set(l, m, C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))?;
            }
        }
        let back = angular::a_s_apply(&cfg.params, &angular::a_s_inverse(&cfg.params, &f, 0.3)?, 0.3)?;
        let worst = f.iter().zip(back.iter()).map(|((_, x), (_, y))| (x - y).norm()).fold(0.0, f64::max);
        Ok((worst, String::new()))
    });
}

/// Number of grid points violating the bound; the detail reports the smallest margin.
fn bound_violations(grid: &[(KerrParams, i32, f64, i32, i32)], s: i32) -> Result<(f64, String)> {
    let mut violations = 0;
    let mut margin = f64::INFINITY;
    for &(p, ss, omega, m, ell) in grid.iter().filter(|g| g.1 == s) {
        let d = angular::ts_margin(&p, &angular::ts_eigenvalue(&p, ss, omega, m, ell)?);
        margin = margin.min(d);
        if d <= 0.0 {
            violations += 1;
        }
    }
    Ok((violations as f64, format!("minimum margin {margin:.6e}")))
}

// ---------------------------------------------------------------- radial

fn solve(p: &KerrParams, s: i32, omega: f64, m: i32, ell: i32, bc: Bc) -> Result<RadialSolution> {
    let mode = ModeSpec::new(*p, s, omega, m, ell)?;
    radial::integrate_mode(&mode, bc, (p.r_plus() + 0.01 * p.m, 30.0 * p.m), DEFAULT_TOL)
}

fn pair(p: &KerrParams, s: i32, omega: f64, m: i32, ell: i32, bc1: Bc, bc2: Bc) -> Result<ModePair> {
    let mode = ModeSpec::new(*p, s, omega, m, ell)?;
    let range = (p.r_plus() + 0.01 * p.m, 30.0 * p.m);
    let first = radial::integrate_mode(&mode, bc1, range, DEFAULT_TOL)?;
    let second = radial::integrate_mode(&mode.flipped(), bc2, range, DEFAULT_TOL)?;
    ModePair::from_solutions(&first, &second)
}

fn radial_suite(cfg: &RunConfig, rec: &mut Recorder) {
    let p = cfg.params;
    let modes: Vec<(f64, i32, f64, i32, i32)> = vec![(0.0, 0, 0.4, 0, 1), (p.a, 1, 0.3, 1, 2), (p.a, -2, 0.5, -1, 2), (0.9, 2, 0.25, 2, 3)];
    rec.check("operator-form", "ODE coefficients = −½ × Teukolsky radial equation", 1e-10, || {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 3);
        let mut worst: f64 = 0.0;
        for _ in 0..24 {
            let a = rng.random_range(0.0..0.95);
            let s = rng.random_range(-2..=2);
            let m = rng.random_range(-2..=2);
            let mode = ModeSpec::new(KerrParams::new(1.0, a)?, s, rng.random_range(-1.0..1.0), m, 2.max(m.abs()).max(s.abs()))?;
            let r = mode.params.r_plus() + rng.random_range(1.0..50.0);
            let ours = radial::radial_operator_build(&mode).coeffs(r);
            let hand = radial::hand_teukolsky_coeffs(&mode, r, mode.lambda());
            for k in 0..3 {
                worst = worst.max((ours[k] + hand[k] * 0.5).norm() / (1.0 + hand[k].norm()));
            }
        }
        Ok((worst, String::new()))
    });
    let solutions: Result<Vec<(RadialSolution, RadialSolution)>> = modes
        .iter()
        .map(|&(a, s, w, m, l)| {
            let q = KerrParams::new(p.m, a)?;
            Ok((solve(&q, s, w, m, l, Bc::HorizonIn)?, solve(&q, s, w, m, l, Bc::InfinityOut)?))
        })
        .collect();
    rec.check("solution-residual", "T_s R = 0 on the integration grid", cfg.tolerance, || {
        let sols = solutions.as_ref().map_err(Clone::clone)?;
        let mut worst: f64 = 0.0;
        for (i, u) in sols {
            worst = worst.max(i.residual()?).max(u.residual()?);
        }
        Ok((worst, format!("{} modes, in and up solutions", sols.len())))
    });
    rec.check("wronskian", "Δ^{s+1} W[R_in, R_up] = const on [r₊ + 0.01, 30M]", cfg.tolerance, || {
        let sols = solutions.as_ref().map_err(Clone::clone)?;
        let mut worst: f64 = 0.0;
        for (i, u) in sols {
            worst = worst.max(radial::wronskian_drift(i, u)?);
        }
        Ok((worst, String::new()))
    });
    rec.check("flux", "∂_r ∮ √−g J^r dθ dφ = 0", 1e-7, || {
        let mut worst: f64 = 0.0;
        for &(a, s) in &[(0.0, 1), (p.a, 2), (p.a, 0), (0.9, -1)] {
            let q = KerrParams::new(p.m, a)?;
            let f = pair(&q, s, 0.35, 1, 2, Bc::HorizonIn, Bc::HorizonIn)?;
            let h = pair(&q, s, 0.35, 1, 2, Bc::HorizonIn, Bc::InfinityOut)?;
            let samples: Vec<usize> = (0..f.grid.len()).step_by(111).collect();
            worst = worst.max(radial::mode_flux(&f, &h, &samples)?.max_drift);
        }
        Ok((worst, String::new()))
    });
    rec.check("conformal-current", "J̆ = x⁻² J", cfg.tolerance, || {
        let f = pair(&p, 2, 0.35, 1, 2, Bc::HorizonIn, Bc::HorizonOut)?;
        let h = pair(&p, 2, 0.35, 1, 2, Bc::HorizonOut, Bc::HorizonIn)?;
        let mut worst: f64 = 0.0;
        let n = f.grid.len();
        for i in [n * 17 / 20, n * 37 / 40, n - 1] {
            let r = f.grid[i];
            for &th in &[0.6, 1.4, 2.5] {
                let (j, jc) = radial::conformal_current_pair(&f, &h, i, th)?;
                let scale = j.iter().fold(0.0f64, |m, v| m.max(v.norm())) * r * r;
                for k in 0..4 {
                    worst = worst.max((jc[k] - j[k] * r * r).norm() / scale);
                }
            }
        }
        Ok((worst, String::new()))
    });
    let flip_base = solve(&p, 2, 0.3, 1, 2, Bc::HorizonIn);
    rec.check("flip-involution", "flip ∘ flip = id on (s, ω, m, S̄, R)", 1e-12, || {
        let sol = flip_base.as_ref().map_err(Clone::clone)?;
        let back = radial::flip_mode_map(&radial::flip_mode_map(sol));
        let mut worst = (back.mode.sbar - sol.mode.sbar).abs() + (back.mode.s - sol.mode.s).abs() as f64 + (back.mode.omega - sol.mode.omega).abs();
        for i in 0..sol.len() {
            worst = worst.max(rel(back.value[i], sol.value[i])).max(rel(back.derivative[i], sol.derivative[i]));
        }
        Ok((worst, String::new()))
    });
    rec.check("flip-residual", "T_{−2} R̄ = 0 for the flipped s = 2 mode", 1e-6, || {
        let sol = flip_base.as_ref().map_err(Clone::clone)?;
        let f = radial::flip_mode_map(sol);
        Ok((f.residual()?, format!("flipped spin {}", f.mode.s)))
    });
}

// ---------------------------------------------------------------- TS identities

fn tsid_suite(cfg: &RunConfig, rec: &mut Recorder) {
    let a = cfg.params.a;
    let m0 = cfg.params.m;
    let list: Vec<(f64, i32, f64, i32, i32, Bc, bool)> = vec![
        (0.0, 1, 0.3, 1, 1, Bc::HorizonIn, true),
        (a, 1, 0.4, -1, 2, Bc::InfinityOut, false),
        (0.0, 2, 0.25, 1, 2, Bc::HorizonIn, false),
        (a, 2, 0.3, 2, 2, Bc::HorizonIn, true),
        (a, 2, 0.5, -1, 3, Bc::InfinityOut, false),
        (0.0, 2, 0.3, 0, 2, Bc::InfinityOut, false),
    ];
    let pairs: Result<Vec<tsid::PhysicalModePair>> = list
        .iter()
        .map(|&(a, s, w, m, l, bc, hertz)| {
            let p = KerrParams::new(m0, a)?;
            let mode = ModeSpec::new(p, s, w, m, l)?;
            let gen = radial::integrate_mode(&mode.flipped(), bc, (p.r_plus() + 0.2 * m0, 20.0 * m0), 1e-12)?;
            if hertz {
                tsid::hertz_reconstruct(&mode, &gen)
            } else {
                tsid::physical_pair(&mode, &gen)
            }
        })
        .collect();
    let residuals: Result<Vec<(i32, tsid::TsResiduals)>> = pairs.as_ref().map_err(Clone::clone).and_then(|ps| ps.iter().map(|p| Ok((p.mode.s, tsid::ts_residuals(p)?))).collect());
    let summary = |s: i32, pick: fn(&tsid::TsResiduals) -> f64| -> Result<(f64, String)> {
        let rs = residuals.as_ref().map_err(Clone::clone)?;
        let sel: Vec<f64> = rs.iter().filter(|(ss, _)| *ss == s).map(|(_, r)| pick(r)).collect();
        Ok((sel.iter().cloned().fold(0.0, f64::max), format!("{} modes", sel.len())))
    };
    rec.check("plus-s1", "ð̄-chain: 𝔸_s φ̄_{−s} = N þ^{2s}-image of φ_s (spin +1)", 1e-6, || summary(1, |r| r.plus));
    rec.check("minus-s1", "φ_{−s} chain identity with conjugate frequency (spin 1)", 1e-6, || summary(1, |r| r.minus));
    rec.check("plus-s2", "ð̄-chain: 𝔸_s φ̄_{−s} = N þ^{2s}-image of φ_s (spin +2)", 1e-5, || summary(2, |r| r.plus));
    rec.check("minus-s2", "φ_{−s} chain identity with conjugate frequency (spin 2)", 1e-5, || summary(2, |r| r.minus));
    rec.check("bar-minus", "conjugated spin −s chain identity", 1e-5, || {
        let (a, d1) = summary(1, |r| r.bar_minus)?;
        let (b, d2) = summary(2, |r| r.bar_minus)?;
        Ok((a.max(b), format!("{d1} + {d2}")))
    });
    let check_max = |pick: fn(&tsid::PairChecks) -> Option<f64>| -> Result<(f64, String)> {
        let ps = pairs.as_ref().map_err(Clone::clone)?;
        let vals: Vec<f64> = ps.iter().filter_map(|p| pick(&p.checks)).collect();
        Ok((vals.iter().cloned().fold(0.0, f64::max), format!("{} pairs", vals.len())))
    };
    rec.check("b-consistency", "φ̄_{−s} = B_s φ_s", 1e-6, || check_max(|c| Some(c.b_consistency)));
    rec.check("a-diagonal", "A_s φ̄_{−s}-generator = N × generator", 1e-8, || check_max(|c| Some(c.a_diagonal)));
    rec.check("exchange", "þ^{2s} A_s ψ̄ = B_s-exchange of the pair", 1e-5, || check_max(|c| Some(c.exchange)));
    rec.check("hertz-rel2", "2^s B_s φ_s = A_s Φ̄ for the Hertz potential", 1e-5, || check_max(|c| c.hertz_rel2));
}

// ---------------------------------------------------------------- Unruh

fn unruh_suite(cfg: &RunConfig, rec: &mut Recorder) {
    let p = cfg.params;
    let beta = p.beta();
    let xs: Vec<f64> = (-400..=400).map(|i| i as f64 * 0.01 / p.m).collect();
    rec.check("chi-difference", "χ₊(x) − χ₋(x) = x", 1e-12, || {
        Ok((xs.iter().map(|&x| (unruh::chi_plus(x, beta) - unruh::chi_minus(x, beta) - x).abs() / (1.0 + x.abs())).fold(0.0, f64::max), String::new()))
    });
    rec.check("chi-ratio", "χ₊(x) = e^{βx} χ₋(x)", 1e-12, || {
        Ok((xs.iter().map(|&x| (unruh::chi_plus(x, beta) - (beta * x).exp() * unruh::chi_minus(x, beta)).abs() / unruh::chi_plus(x, beta)).fold(0.0, f64::max), String::new()))
    });
    rec.check("chi-limits", "χ±(0) = 1/β, χ± → X± as |x| → ∞", 1e-12, || {
        let at0 = (unruh::chi_plus(0.0, beta) * beta - 1.0).abs().max((unruh::chi_minus(0.0, beta) * beta - 1.0).abs());
        let big = 40.0 * beta;
        let far = (unruh::chi_plus(big, beta) - big).abs().max(unruh::chi_plus(-big, beta).abs()).max((unruh::chi_minus(-big, beta) - big).abs()) / big;
        Ok((at0.max(far), String::new()))
    });
    let spins = [0, 1, 2];
    let h_grid = unruh::random_ranges(Surface::Horizon).3;
    let i_grid = unruh::random_ranges(Surface::Scri).3;
    let spaces: Vec<Result<unruh::ScriSpace>> = spins.iter().map(|&s| unruh::ScriSpace::new(&p, s, 2, i_grid, 12.0)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 4);
    for &s in &spins {
        let seed = rng.random::<u64>();
        rec.check(&format!("positivity-horizon-s{s}"), "w⁺_H(φ, φ) ≥ 0", 1e-10, || {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            let mut worst: f64 = 0.0;
            for _ in 0..50 {
                let d = unruh::horizon_data_build(&p, s, 2, h_grid, unruh::random_profile(&mut r, s, 2, Surface::Horizon))?;
                let w = unruh::w_horizon(&d, &d, Branch::Plus)?.value.re;
                worst = worst.max(-w / d.norm().powi(2));
            }
            Ok((worst.max(0.0), "50 seeded data; residual is max(0, −w⁺/‖φ‖²)".into()))
        });
    }
    for (k, &s) in spins.iter().enumerate() {
        let seed = rng.random::<u64>();
        let space = &spaces[k];
        rec.check(&format!("positivity-scri-s{s}"), "w⁺_I(ψ, ψ) ≥ 0", 1e-10, || {
            let sp = space.as_ref().map_err(Clone::clone)?;
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            let mut worst: f64 = 0.0;
            for _ in 0..50 {
                let d = unruh::scri_data_build(sp, unruh::random_profile(&mut r, s, 2, Surface::Scri))?;
                let w = unruh::w_scri(sp, &d, &d, Branch::Plus)?.value.re;
                worst = worst.max(-w / d.norm().powi(2));
            }
            Ok((worst.max(0.0), "50 seeded data; residual is max(0, −w⁺/‖ψ‖²)".into()))
        });
    }
    let seed = rng.random::<u64>();
    rec.check("commutator-horizon", "w⁺_H − w⁻_H = iσ_H", cfg.tolerance, || {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        for k in 0..20 {
            let s = spins[k % 3];
            let d1 = unruh::horizon_data_build(&p, s, 2, h_grid, unruh::random_profile(&mut r, s, 2, Surface::Horizon))?;
            let d2 = unruh::horizon_data_build(&p, s, 2, h_grid, unruh::random_profile(&mut r, s, 2, Surface::Horizon))?;
            let diff = unruh::w_horizon(&d1, &d2, Branch::Plus)?.value - unruh::w_horizon(&d1, &d2, Branch::Minus)?.value;
            let sig = unruh::sigma_horizon(&d1, &d2)?;
            worst = worst.max((diff - C64::i() * sig).norm() / (d1.norm() * d2.norm() * d1.c_s()));
        }
        Ok((worst, "20 pairs; residual relative to c_s‖φ‖‖φ′‖".into()))
    });
    let seed = rng.random::<u64>();
    rec.check("commutator-scri", "w⁺_I − w⁻_I = iσ_I", cfg.tolerance, || {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        for k in 0..20 {
            let s = spins[k % 3];
            let sp = spaces[k % 3].as_ref().map_err(Clone::clone)?;
            let d1 = unruh::scri_data_build(sp, unruh::random_profile(&mut r, s, 2, Surface::Scri))?;
            let d2 = unruh::scri_data_build(sp, unruh::random_profile(&mut r, s, 2, Surface::Scri))?;
            let wp = unruh::w_scri(sp, &d1, &d2, Branch::Plus)?.value;
            let wm = unruh::w_scri(sp, &d1, &d2, Branch::Minus)?.value;
            let sig = unruh::sigma_scri(sp, &d1, &d2)?;
            // |k|^{2s+1} weights: normalise by the same integral with absolute values.
            let scale = (unruh::w_scri(sp, &d1, &d1, Branch::Plus)?.value.re + unruh::w_scri(sp, &d1, &d1, Branch::Minus)?.value.re).sqrt()
                * (unruh::w_scri(sp, &d2, &d2, Branch::Plus)?.value.re + unruh::w_scri(sp, &d2, &d2, Branch::Minus)?.value.re).sqrt();
            worst = worst.max((wp - wm - C64::i() * sig).norm() / scale);
        }
        Ok((worst, "20 pairs; residual relative to the Cauchy–Schwarz bound of |w⁺| + |w⁻|".into()))
    });
    let kms_pair = |s: i32| -> Result<(unruh::HorizonData, unruh::HorizonData)> {
        let l = s.max(1);
        let b = |ell, m, c, w, nu, re, im| unruh::Bump { ell, m, center: c, width: w, carrier: nu, amp: C64::new(re, im) };
        Ok((
            unruh::horizon_data_build(&p, s, 2, h_grid, unruh::Profile::new(vec![b(l, 1, -1.0, 0.06, 1.0, 1.0, 0.3), b(2, 0, -1.3, 0.08, -0.5, 0.2, -0.4)]))?,
            unruh::horizon_data_build(&p, s, 2, h_grid, unruh::Profile::new(vec![b(l, 1, -0.9, 0.07, -0.5, 0.5, 0.5), b(2, 0, -1.2, 0.06, 0.0, -0.6, 0.1)]))?,
        ))
    };
    let test_fn = unruh::GaussTest { c0: 1.0, c1: 0.7, center: 0.0, width: 0.08 };
    let trial: Vec<f64> = (-5..=5).map(|j| beta * (1.0 + 0.02 * j as f64)).collect();
    let scan: Result<Vec<unruh::KmsReport>> = kms_pair(2).and_then(|(d1, d2)| unruh::kms_scan(&d1, &d2, &test_fn, &trial));
    rec.check("kms", "∫ f̂(b) w⁺(φ, Y_bφ′) db = ∫ f̂(b + iβ) w⁻(φ, Y_bφ′) db, β = 2π/κ₊", 1e-6, || {
        let sc = scan.as_ref().map_err(Clone::clone)?;
        Ok((sc[5].residual, format!("s = 2, |lhs| = {:.3e}", sc[5].lhs.norm())))
    });
    rec.check("beta-scan", "argmin over β′ of the KMS residual is 2π/κ₊", 1.0, || {
        let sc = scan.as_ref().map_err(Clone::clone)?;
        let best = (0..sc.len()).min_by(|&a, &b| sc[a].residual.total_cmp(&sc[b].residual)).unwrap();
        Ok(((best as f64 - 5.0).abs(), format!("grid steps of 2% in β; residual in steps, best β′ = {:.6}", sc[best].beta)))
    });
    rec.check("thermal-representation", "w±_H(φ, φ′) = c_s/2π ∫ χ±(k) conj(F̂) F̂′ dk in Killing time", cfg.tolerance, || {
        let mut worst: f64 = 0.0;
        for s in spins {
            let (d1, d2) = kms_pair(s)?;
            for br in [Branch::Plus, Branch::Minus] {
                let u = unruh::w_horizon(&d1, &d2, br)?.value;
                worst = worst.max(rel(unruh::w_horizon_thermal(&d1, &d2, br)?, u));
            }
        }
        Ok((worst, "Kruskal-U and Killing-time evaluations of the same data".into()))
    });
    let seed = rng.random::<u64>();
    for br in [Branch::Plus, Branch::Minus] {
        let (id, eq) = match br {
            Branch::Plus => ("ground-state-plus", "∫ f̂(b) w⁺_I(ψ, Y_bψ′) db = 0 for supp f ⊂ ℝ₊"),
            Branch::Minus => ("ground-state-minus", "∫ f̂(b) w⁻_I(ψ, Y_bψ′) db = 0 for supp f ⊂ ℝ₋"),
        };
        rec.check(id, eq, 1e-8, || {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            let mut worst: f64 = 0.0;
            for (k, &s) in spins.iter().enumerate() {
                let sp = spaces[k].as_ref().map_err(Clone::clone)?;
                let d1 = unruh::scri_data_build(sp, unruh::random_profile(&mut r, s, 2, Surface::Scri))?;
                let d2 = unruh::scri_data_build(sp, unruh::random_profile(&mut r, s, 2, Surface::Scri))?;
                worst = worst.max(unruh::ground_state_check(sp, &d1, &d2, br, 12)?.relative());
            }
            Ok((worst, "f = |x|¹² e^{−|x|}; residual relative to ∫|f̂||w|".into()))
        });
    }
    let seed = rng.random::<u64>();
    rec.check("invariance-horizon", "w±_H(Y_bφ, Y_bφ′) = w±_H(φ, φ′)", cfg.tolerance, || {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        for &s in &spins {
            let (d1, d2) = kms_pair(s)?;
            let b = r.random_range(-0.5..0.5);
            let (m1, m2) = (unruh::killing_flow_horizon(&d1, b)?, unruh::killing_flow_horizon(&d2, b)?);
            for br in [Branch::Plus, Branch::Minus] {
                worst = worst.max(rel(unruh::w_horizon(&m1, &m2, br)?.value, unruh::w_horizon(&d1, &d2, br)?.value));
            }
        }
        Ok((worst, String::new()))
    });
    let seed = rng.random::<u64>();
    rec.check("invariance-scri", "w±_I(Y_bψ, Y_bψ′) = w±_I(ψ, ψ′)", cfg.tolerance, || {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        for (k, &s) in spins.iter().enumerate() {
            let sp = spaces[k].as_ref().map_err(Clone::clone)?;
            let d1 = unruh::scri_data_build(sp, unruh::random_profile(&mut r, s, 2, Surface::Scri))?;
            let d2 = unruh::scri_data_build(sp, unruh::random_profile(&mut r, s, 2, Surface::Scri))?;
            let b = r.random_range(-2.0..2.0);
            let (m1, m2) = (unruh::killing_flow_scri(sp, &d1, b)?, unruh::killing_flow_scri(sp, &d2, b)?);
            for br in [Branch::Plus, Branch::Minus] {
                let base = unruh::w_scri(sp, &d1, &d2, br)?.value;
                let scale = unruh::w_scri(sp, &d1, &d1, br)?.value.re.sqrt() * unruh::w_scri(sp, &d2, &d2, br)?.value.re.sqrt();
                worst = worst.max((unruh::w_scri(sp, &m1, &m2, br)?.value - base).norm() / scale);
            }
        }
        Ok((worst, "residual relative to the Cauchy–Schwarz bound".into()))
    });
}
