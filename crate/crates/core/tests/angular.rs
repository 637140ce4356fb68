use kerrteuk::angular::*;
use kerrteuk::numerics::gauss_legendre;
use kerrteuk::tetrad::ghp_at;
use kerrteuk::{ChartPoint, Jet, KerrParams, Scaling, C64};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::time::Instant;

fn kp(a: f64) -> KerrParams {
    KerrParams::new(1.0, a).unwrap()
}

fn fact(n: i32) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn binom(n: i32, k: i32) -> f64 {
    if k < 0 || k > n {
        return 0.0;
    }
    fact(n) / (fact(k) * fact(n - k))
}

/// Goldberg's explicit finite sum, an independent construction of ₛY_ℓm.
fn goldberg(s: i32, l: i32, m: i32, th: f64) -> f64 {
    let pre = (fact(l + m) * fact(l - m) * (2 * l + 1) as f64 / (4.0 * PI * fact(l + s) * fact(l - s))).sqrt();
    let sh = (th / 2.0).sin();
    let cot = (th / 2.0).cos() / sh;
    let mut sum = 0.0;
    for r in 0..=(l - s) {
        let b = binom(l - s, r) * binom(l + s, r + s - m);
        if b == 0.0 {
            continue;
        }
        let sign = if (l - r - s).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        sum += b * sign * cot.powi(2 * r + s - m);
    }
    pre * sh.powi(2 * l) * sum
}

#[test]
fn swsh_examples() {
    assert!((swsh_eval(0, 0, 0, 0.3).unwrap() - 0.282095).abs() < 1e-6);
    assert!((swsh_eval(0, 0, 0, 2.9).unwrap() - 1.0 / (4.0 * PI).sqrt()).abs() < 1e-15);
    assert!((swsh_eval(0, 1, 0, 0.0).unwrap() - (3.0 / (4.0 * PI)).sqrt()).abs() < 1e-14);
    assert!(swsh_eval(-2, 1, 0, 0.5).is_err());
    assert!(swsh_eval(0, 2, 3, 0.5).is_err());
}

#[test]
fn swsh_matches_goldberg_up_to_phase() {
    let thetas = [0.2, 0.7, 1.3, 2.1, 2.9];
    for s in -2i32..=2 {
        for l in s.abs()..=8 {
            for m in -l..=l {
                let ratios: Vec<f64> = thetas.iter().map(|&t| swsh_eval(s, l, m, t).unwrap() / goldberg(s, l, m, t)).collect();
                for r in &ratios {
                    assert!((r.abs() - 1.0).abs() < 1e-10, "s={s} l={l} m={m} ratio {r}");
                    assert!((r - ratios[0]).abs() < 1e-10, "phase varies with theta");
                }
            }
        }
    }
}

fn gram_defect(s: i32, m: i32, lmax: i32) -> f64 {
    let (xs, ws) = gauss_legendre((lmax + 8) as usize);
    let l0 = s.abs().max(m.abs());
    let dim = (lmax - l0 + 1) as usize;
    let mut gram = vec![vec![0.0; dim]; dim];
    for (x, w) in xs.iter().zip(&ws) {
        let ys: Vec<f64> = swsh_all_jet::<1>(s, m, lmax, Jet::cst(x.acos())).iter().map(|v| v.re()).collect();
        for i in 0..dim {
            for j in 0..dim {
                gram[i][j] += 2.0 * PI * w * ys[i] * ys[j];
            }
        }
    }
    let mut worst: f64 = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((gram[i][j] - target).abs());
        }
    }
    worst
}

#[test]
fn swsh_orthonormal_spin_minus_two() {
    for m in -8..=8 {
        assert!(gram_defect(-2, m, 8) < 1e-10, "m={m}");
    }
}

#[test]
fn swsh_stable_to_ell_64() {
    for (s, m) in [(0, 0), (-2, 1), (2, -2), (1, 5)] {
        let d = gram_defect(s, m, 64);
        assert!(d < 1e-10, "s={s} m={m} defect {d:e}");
    }
    let v = swsh_eval(-2, 64, 3, 1e-3).unwrap();
    assert!(v.is_finite());
}

fn ladder_factor(l: i32, s: i32, sign: LSign) -> f64 {
    match sign {
        LSign::Minus => (((l + s) * (l - s + 1)) as f64).sqrt(),
        LSign::Plus => (((l - s) * (l + s + 1)) as f64).sqrt(),
    }
}

#[test]
fn ladder_action_at_zero_spheroidicity() {
    let thetas: Vec<f64> = (1..40).map(|k| k as f64 * PI / 40.0).collect();
    for s in -2i32..=2 {
        for l in s.abs().max(1)..=6 {
            for m in -l..=l {
                let mode = spheroidal_mode(s, m, 0.0, l).unwrap();
                // L⁻_s lowers the spin weight, L⁺_{−s} raises it.
                for (op, sign, target) in [((s, LSign::Minus), LSign::Minus, s - 1), ((-s, LSign::Plus), LSign::Plus, s + 1)] {
                    let out = lpm_apply(&mode, &[op], &thetas).unwrap();
                    let k = ladder_factor(l, s, sign);
                    if target.abs() > l {
                        assert!(out.iter().all(|v| v.abs() < 1e-10), "s={s} l={l} m={m}: should annihilate");
                        continue;
                    }
                    let expect: Vec<f64> = thetas.iter().map(|&t| k * swsh_eval(target, l, m, t).unwrap()).collect();
                    let sgn = if out.iter().zip(&expect).map(|(a, b)| a * b).sum::<f64>() >= 0.0 { 1.0 } else { -1.0 };
                    for (a, b) in out.iter().zip(&expect) {
                        assert!((a - sgn * b).abs() < 1e-10, "s={s} l={l} m={m} {sign:?}: {a} vs {}", sgn * b);
                    }
                }
            }
        }
    }
}

#[test]
fn lpm_reduces_to_theta_derivative() {
    for &th in &[0.3, 1.1, 2.5] {
        let t = Jet::<3>::var(th);
        let f = t.cos().sqr();
        for sign in [LSign::Plus, LSign::Minus] {
            let out = lpm(f, t, 0, sign, 0.0, 0);
            assert!((out.re() + 2.0 * th.cos() * th.sin()).abs() < 1e-14);
        }
    }
}

#[test]
fn lpm_chain_order_limit() {
    let mode = spheroidal_mode(2, 0, 0.3, 2).unwrap();
    let ops = vec![(0, LSign::Plus); LPM_MAX_ORDER + 1];
    assert!(lpm_apply(&mode, &ops, &[1.0]).is_err());
    // The oracle pipeline input: the full chain applied through lpm_apply agrees with ts_oracle's projection.
    let chain = a_s_operator_chain(2);
    assert_eq!(chain.len(), 8);
    let th = [0.4, 1.2, 2.2];
    let out = lpm_apply(&mode, &chain, &th).unwrap();
    let n_tilde = ts_oracle(&kp(0.6), 2, 0.5, 0, 2).unwrap() - 9.0 * 0.25;
    for (o, &t) in out.iter().zip(&th) {
        assert!((o / 16.0 - n_tilde * mode.eval(t)).abs() < 1e-7 * n_tilde.abs());
    }
}

#[test]
fn zero_spheroidicity_is_spherical() {
    for s in -2i32..=2 {
        for m in -3..=3 {
            let modes = spheroidal_solve(s, m, 0.0, 20).unwrap();
            for q in &modes {
                let l = q.ell as f64;
                let sf = s as f64;
                assert!((2.0 * q.sbar + l * (l + 1.0) - sf * sf - sf).abs() < 1e-12);
                for (k, c) in q.coeffs.iter().enumerate() {
                    let delta = if k as i32 + q.lmin == q.ell { 1.0 } else { 0.0 };
                    assert!((c - delta).abs() < 1e-12);
                }
            }
        }
    }
}

/// Largest eigenvalue of a symmetric tridiagonal matrix by Sturm bisection.
fn tridiag_max_eig(d: &[f64], e: &[f64]) -> f64 {
    let count_above = |x: f64| {
        let mut cnt = 0;
        let mut q = d[0] - x;
        if q > 0.0 {
            cnt += 1;
        }
        for i in 1..d.len() {
            let qq = if q.abs() < 1e-300 { 1e-300 } else { q };
            q = d[i] - x - e[i - 1] * e[i - 1] / qq;
            if q > 0.0 {
                cnt += 1;
            }
        }
        cnt
    };
    let bound = d.iter().zip(e.iter().chain(std::iter::once(&0.0))).map(|(a, b)| a.abs() + 2.0 * b.abs()).fold(0.0, f64::max);
    let (mut lo, mut hi) = (-bound, bound);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if count_above(mid) >= 1 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// ((1−x²)S′)′ + c²x²S = μS on a cell-centred grid in x.
fn sturm_liouville_top(c: f64, n: usize) -> f64 {
    let h = 2.0 / n as f64;
    let x = |j: f64| -1.0 + j * h;
    let pf = |xx: f64| 1.0 - xx * xx;
    let mut d = Vec::with_capacity(n);
    let mut e = Vec::with_capacity(n - 1);
    for j in 0..n {
        let xc = x(j as f64 + 0.5);
        let pl = pf(x(j as f64));
        let pr = pf(x(j as f64 + 1.0));
        d.push(-(pl + pr) / (h * h) + c * c * xc * xc);
        if j + 1 < n {
            e.push(pr / (h * h));
        }
    }
    tridiag_max_eig(&d, &e)
}

#[test]
fn prolate_eigenvalue_matches_grid_solve() {
    let c = 1.0;
    let mode = spheroidal_mode(0, 0, c, 0).unwrap();
    let mu1 = sturm_liouville_top(c, 4000);
    let mu2 = sturm_liouville_top(c, 8000);
    let mu = (4.0 * mu2 - mu1) / 3.0;
    // 2S̄ = μ + 2cm − c² with m = 0.
    let grid = mu - c * c;
    assert!((2.0 * mode.sbar - grid).abs() < 1e-8, "{} vs {}", 2.0 * mode.sbar, grid);
}

fn eigen_residual(mode: &SpheroidalMode, thetas: &[f64]) -> f64 {
    let (s, m, c) = (mode.s as f64, mode.m as f64, mode.c);
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for &th in thetas {
        let t = Jet::<3>::var(th);
        let f = mode.eval_jet(t);
        let (sn, cs) = (th.sin(), th.cos());
        let lap = f.deriv(2).re + cs / sn * f.deriv(1).re;
        let pot = c * c * cs * cs - 2.0 * s * c * cs - (m + s * cs).powi(2) / (sn * sn) + s + 2.0 * c * m - c * c;
        let r = lap + pot * f.re() - 2.0 * mode.sbar * f.re();
        worst = worst.max(r.abs());
        scale = scale.max(f.re().abs());
    }
    worst / scale
}

#[test]
fn spheroidal_residual_on_grid() {
    let mode = spheroidal_mode(-2, 2, 0.5, 2).unwrap();
    let thetas: Vec<f64> = (0..512).map(|k| (k as f64 + 0.5) * PI / 512.0).collect();
    let res = eigen_residual(&mode, &thetas);
    assert!(res < 1e-8, "residual {res:e}");
    let norm: f64 = mode.coeffs.iter().map(|c| c * c).sum();
    assert!((norm - 1.0).abs() < 1e-12);
}

#[test]
fn spheroidal_vectors_orthonormal() {
    for (s, m, c) in [(-2, 0, 0.5), (2, 2, 1.5), (1, -1, 3.0)] {
        let modes = spheroidal_solve(s, m, c, 30).unwrap();
        for a in &modes {
            for b in &modes {
                let dot: f64 = a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x * y).sum();
                let target = if a.ell == b.ell { 1.0 } else { 0.0 };
                assert!((dot - target).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn labels_continuous_in_c() {
    let cs: Vec<f64> = (0..=200).map(|k| k as f64 * 0.01).collect();
    for (s, m) in [(-2i32, 2i32), (2, 0), (1, -1)] {
        let l0 = s.abs().max(m.abs());
        for ell in l0..l0 + 4 {
            let labels = track_label(s, m, ell, &cs, 24).unwrap();
            assert!(labels.iter().all(|&l| l == ell), "label swap for s={s} m={m} ell={ell}");
        }
    }
}

#[test]
fn truncation_guard() {
    assert!(spheroidal_solve(2, 2, 0.1, 11).is_err());
    assert!(spheroidal_solve(2, 2, 0.1, 12).is_ok());
    let a = spheroidal_mode(-2, 1, 4.0, 3).unwrap();
    let b = spheroidal_solve(-2, 1, 4.0, 60).unwrap().into_iter().find(|q| q.ell == 3).unwrap();
    assert!((a.sbar - b.sbar).abs() < 1e-10);
}

#[test]
fn ts_examples() {
    let p0 = kp(0.0);
    for (m, l) in [(0, 0), (1, 3), (-2, 4)] {
        assert_eq!(ts_eigenvalue(&p0, 0, 0.4, m, l).unwrap().n, 1.0);
        assert_eq!(ts_oracle(&p0, 0, 0.4, m, l).unwrap(), 1.0);
    }
    for l in 2..=6 {
        let ev = ts_eigenvalue(&p0, 2, 0.0, 0, l).unwrap();
        let sbar = spheroidal_solve(2, 0, 0.0, 20).unwrap()[(l - 2) as usize].sbar;
        assert!((ev.n - (6.0 - 5.0 * sbar + sbar * sbar).powi(2)).abs() < 1e-12);
        // Closed form ((ℓ−1)ℓ(ℓ+1)(ℓ+2))²/16 of the spherical case.
        let lf = l as f64;
        assert!((ev.n - ((lf - 1.0) * lf * (lf + 1.0) * (lf + 2.0)).powi(2) / 16.0).abs() < 1e-9);
    }
    let ev = ts_eigenvalue(&kp(0.6), 2, 0.3, 2, 2).unwrap();
    assert!(ev.n > 0.81);
    let orc = ts_oracle(&p0, 2, 0.0, 0, 2).unwrap();
    assert!((orc - 36.0).abs() < 1e-8 * 36.0);
}

#[test]
fn printed_first_order_form_is_shifted() {
    // At ℓ = 1, c = 0 the printed form gives zero while the L± product gives 1.
    let p = kp(0.0);
    let sbar = spheroidal_mode(1, 0, 0.0, 1).unwrap().sbar;
    assert!(a1_printed_form(&p, 0.0, 0, sbar).abs() < 1e-12);
    assert!((ts_oracle(&p, 1, 0.0, 0, 1).unwrap() - 1.0).abs() < 1e-10);
    assert!((ts_eigenvalue(&p, 1, 0.0, 0, 1).unwrap().n - 1.0).abs() < 1e-12);
}

struct GridPoint {
    a: f64,
    s: i32,
    m: i32,
    ell: i32,
    omega: f64,
}

fn criterion_grid() -> Vec<GridPoint> {
    let mut out = Vec::new();
    for a in [0.0, 0.6, 0.9] {
        for c in [0.0, 0.1, 0.5] {
            let omega = if a > 0.0 { c / a } else { c };
            for s in 1i32..=2 {
                for m in -2i32..=2 {
                    for ell in s.max(m.abs())..=6 {
                        out.push(GridPoint { a, s, m, ell, omega });
                    }
                }
            }
        }
    }
    out
}

#[test]
fn ts_polynomial_matches_oracle_on_grid() {
    let t0 = Instant::now();
    let mut worst: f64 = 0.0;
    for g in criterion_grid() {
        let p = kp(g.a);
        let ev = ts_eigenvalue(&p, g.s, g.omega, g.m, g.ell).unwrap();
        let orc = ts_oracle(&p, g.s, g.omega, g.m, g.ell).unwrap();
        let rel = (ev.n - orc).abs() / orc.abs();
        worst = worst.max(rel);
        assert!(rel < 1e-8, "a={} s={} m={} ell={} omega={}: poly {} oracle {}", g.a, g.s, g.m, g.ell, g.omega, ev.n, orc);
    }
    let dt = t0.elapsed().as_secs_f64();
    println!("worst relative deviation {worst:e}, {dt:.2} s");
    assert!(dt < 60.0);
}

#[test]
fn ts_bounds_on_grid() {
    let mut min_margin = f64::INFINITY;
    for g in criterion_grid() {
        let p = kp(g.a);
        let ev = ts_eigenvalue(&p, g.s, g.omega, g.m, g.ell).unwrap();
        let margin = ts_margin(&p, &ev);
        assert!(margin > 0.0);
        min_margin = min_margin.min(margin);
    }
    println!("minimum margin {min_margin}");
}

fn random_field(rng: &mut ChaCha8Rng, s: i32, lmax: i32) -> SpinWeightedField {
    let mut f = SpinWeightedField::zeros(s, lmax);
    for l in s.abs()..=lmax {
        for m in -l..=l {
            f.set(l, m, C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).unwrap();
        }
    }
    f
}

#[test]
fn a_s_inverse_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let p = kp(0.6);
    for s in 0i32..=2 {
        for _ in 0..3 {
            let f = random_field(&mut rng, s, 5);
            let g = a_s_inverse(&p, &a_s_apply(&p, &f, 0.4).unwrap(), 0.4).unwrap();
            for ((_, x), (_, y)) in f.iter().zip(g.iter()) {
                assert!((x - y).norm() < 1e-10 * x.norm().max(1.0));
            }
            if s == 0 {
                assert_eq!(a_s_inverse(&p, &f, 0.4).unwrap(), f);
            }
        }
    }
    let mut single = SpinWeightedField::zeros(2, 6);
    single.set(3, -1, C64::new(2.0, 0.0)).unwrap();
    let out = a_s_inverse(&p, &single, 0.4).unwrap();
    let n = ts_eigenvalue(&p, 2, 0.4, -1, 3).unwrap().n;
    for ((l, m), v) in out.iter() {
        let expect = if (l, m) == (3, -1) { 2.0 / n } else { 0.0 };
        assert!((v - C64::new(expect, 0.0)).norm() < 1e-14);
    }
}

#[test]
fn sobolev_examples() {
    let mut f = SpinWeightedField::zeros(0, 4);
    f.set(2, 1, C64::new(0.3, 0.4)).unwrap();
    assert!((sobolev_norm(&f, 1).unwrap() - 7f64.sqrt() * 0.5).abs() < 1e-14);
    assert!((sobolev_norm(&f, 0).unwrap() - f.l2_norm()).abs() < 1e-15);
    assert!(sobolev_norm(&f, 9).is_err());
    assert!(f.get(5, 0).is_err());
}

#[test]
fn field_norm_matches_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for s in [-2i32, 0, 1] {
        let lmax = 6;
        let f = random_field(&mut rng, s, lmax);
        let (xs, ws) = gauss_legendre(2 * lmax as usize + 4);
        let nphi = 4 * lmax as usize + 4;
        let mut q = 0.0;
        for (&x, &w) in xs.iter().zip(&ws) {
            let th = x.acos();
            for k in 0..nphi {
                let ph = 2.0 * PI * k as f64 / nphi as f64;
                q += w * (2.0 * PI / nphi as f64) * f.synthesize(th, ph).norm_sqr();
            }
        }
        assert!((q.sqrt() - f.l2_norm()).abs() < 1e-8 * f.l2_norm());
    }
}

#[test]
fn eth_from_ladder_matches_ghp_action() {
    // ð on a mode e^{−iωt+imφ}S(θ) of type (s, w): direct m^aΘ_a versus the L⁺ form.
    let p = kp(0.7);
    let omega = 0.35;
    for &(r, th) in &[(4.0, 0.8), (7.5, 2.2)] {
        let g = ghp_at(&p, &ChartPoint::bl(0.0, r, th, 0.0), &Scaling::Kinnersley).unwrap();
        let mw: C64 = (0..4).map(|i| g.m[i] * g.w[i]).sum();
        let mwb: C64 = (0..4).map(|i| g.m[i] * g.w[i].conj()).sum();
        let nw: C64 = (0..4).map(|i| g.m[i].conj() * g.w[i]).sum();
        let nwb: C64 = (0..4).map(|i| g.m[i].conj() * g.w[i].conj()).sum();
        let zeta = C64::new(r, -p.a * th.cos());
        let zb = zeta.conj();
        for s in -2i32..=2 {
            for m in [-1i32, 2] {
                let ell = s.abs().max(m.abs()).max(2);
                let mode = spheroidal_mode(s, m, p.a * omega, ell).unwrap();
                let f = mode.eval_jet(Jet::<2>::var(th));
                let grad = [C64::new(0.0, -omega) * f.val(), C64::new(0.0, 0.0), f.deriv(1), C64::new(0.0, m as f64) * f.val()];
                let ddir: C64 = (0..4).map(|i| g.m[i] * grad[i]).sum();
                let ddir_bar: C64 = (0..4).map(|i| g.m[i].conj() * grad[i]).sum();
                let lp = lpm(f, Jet::<2>::var(th), -s, LSign::Plus, mode.c, m).val();
                let lm = lpm(f, Jet::<2>::var(th), s, LSign::Minus, mode.c, m).val();
                for w in -2..=2 {
                    let (sf, wf) = (s as f64, w as f64);
                    let direct = ddir - ((wf + sf) * mw + (wf - sf) * mwb) * f.val();
                    let dzb = C64::new(0.0, p.a * th.sin()) / (zb * zb);
                    let ladder = (lp / zb + (wf - sf) * dzb * f.val()) / 2f64.sqrt();
                    assert!((direct - ladder).norm() < 1e-6 * (1.0 + ladder.norm()), "eth s={s} w={w}: {direct} vs {ladder}");
                    let direct_p = ddir_bar - ((wf + sf) * nw + (wf - sf) * nwb) * f.val();
                    let dz = C64::new(0.0, -p.a * th.sin()) / (zeta * zeta);
                    let ladder_p = (lm / zeta + (wf + sf) * dz * f.val()) / 2f64.sqrt();
                    assert!((direct_p - ladder_p).norm() < 1e-6 * (1.0 + ladder_p.norm()), "eth' s={s} w={w}: {direct_p} vs {ladder_p}");
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn sobolev_monotone(seed in 0u64..1000, order in 0u32..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_field(&mut rng, 1, 5);
        prop_assert!(sobolev_norm(&f, order + 1).unwrap() >= sobolev_norm(&f, order).unwrap());
    }

    #[test]
    fn ts_matches_oracle_random(s in 1i32..=2, m in -3i32..=3, dl in 0i32..3, c in -1.0f64..1.0, a in 0.05f64..0.95) {
        let ell = s.max(m.abs()) + dl;
        let p = kp(a);
        let omega = c / a;
        let n = ts_eigenvalue(&p, s, omega, m, ell).unwrap().n;
        let o = ts_oracle(&p, s, omega, m, ell).unwrap();
        prop_assert!((n - o).abs() < 1e-8 * o.abs());
    }
}
