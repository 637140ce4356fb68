use kerrteuk::unruh::*;
use kerrteuk::{KerrParams, C64};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::function::erf::erf;
use std::f64::consts::PI;
use std::sync::OnceLock;

fn kerr(a: f64) -> KerrParams {
    KerrParams::new(1.0, a).unwrap()
}

fn bump(ell: i32, m: i32, center: f64, width: f64, carrier: f64, amp: C64) -> Bump {
    Bump { ell, m, center, width, carrier, amp }
}

fn h_grid() -> UniformGrid {
    random_ranges(Surface::Horizon).3
}

fn i_grid() -> UniformGrid {
    random_ranges(Surface::Scri).3
}

fn horizon(p: &KerrParams, s: i32, bumps: Vec<Bump>) -> HorizonData {
    horizon_data_build(p, s, 2, h_grid(), Profile::new(bumps)).unwrap()
}

const SCRI_KMAX: f64 = 12.0;

fn scri_space(s: i32) -> &'static ScriSpace {
    static SPACES: [OnceLock<ScriSpace>; 3] = [OnceLock::new(), OnceLock::new(), OnceLock::new()];
    SPACES[s as usize].get_or_init(|| ScriSpace::new(&kerr(0.6), s, 2, i_grid(), SCRI_KMAX).unwrap())
}

#[test]
fn thermal_kernel_identities() {
    let beta = 2.0 * PI / kerr(0.6).kappa_plus();
    for i in -400..=400 {
        let x = i as f64 * 0.01;
        let (p, m) = (chi_plus(x, beta), chi_minus(x, beta));
        assert!((p - m - x).abs() <= 1e-12 * (1.0 + x.abs()), "x = {x}");
        assert!((p - (beta * x).exp() * m).abs() <= 1e-12 * p.abs().max(1e-300), "x = {x}");
    }
    assert_eq!(chi_plus(0.0, beta), 1.0 / beta);
    assert!((chi_plus(1e-9, beta) - 1.0 / beta).abs() < 1e-9);
    // Large |x| limits: χ₊ → X₊, χ₋ → X₋.
    assert!((chi_plus(40.0, 2.0) - 40.0).abs() < 1e-12);
    assert!(chi_plus(-40.0, 2.0).abs() < 1e-12);
    assert!((chi_minus(-40.0, 2.0) - 40.0).abs() < 1e-12);
    let k = thermal_kernels(-2.0, 0.5).unwrap();
    assert_eq!((k.x_plus, k.x_minus), (0.0, 2.0));
    assert!((k.beta - 4.0 * PI).abs() < 1e-15);
    assert!(thermal_kernels(1.0, 0.0).is_err());
}

#[test]
fn grid_and_profile_validation() {
    assert!(UniformGrid::new(0.0, 1.0, 100).is_err());
    assert!(UniformGrid::new(1.0, 0.0, 64).is_err());
    let p = kerr(0.6);
    let bad_mode = vec![bump(1, 0, -1.0, 0.1, 0.0, C64::new(1.0, 0.0))];
    assert!(horizon_data_build(&p, 2, 2, h_grid(), Profile::new(bad_mode)).is_err());
    let at_edge = vec![bump(2, 0, 0.9, 0.1, 0.0, C64::new(1.0, 0.0))];
    assert!(matches!(horizon_data_build(&p, 2, 2, h_grid(), Profile::new(at_edge)), Err(kerrteuk::KerrError::Support(_))));
    assert!(horizon_data_build(&p, 3, 3, h_grid(), Profile::default()).is_err());
}

#[test]
fn spin_zero_horizon_data_is_the_identity() {
    let p = kerr(0.6);
    let d = horizon(&p, 0, vec![bump(1, -1, -1.0, 0.1, 2.0, C64::new(0.3, -0.7))]);
    for (a, b) in d.phi.iter().flatten().zip(d.phi_bar.iter().flatten()) {
        assert!((a - b).norm() < 1e-13);
    }
}

#[test]
fn derived_horizon_component_matches_exact_derivatives() {
    let p = kerr(0.9);
    let b = bump(2, 1, -1.1, 0.09, -2.5, C64::new(0.8, 0.4));
    let d = horizon(&p, 2, vec![b]);
    let q = d.modes.iter().position(|&x| x == (2, 1)).unwrap();
    let scale = (p.r_plus() - 1.0).powi(4);
    let mut peak: f64 = 0.0;
    let mut err: f64 = 0.0;
    for i in 0..d.grid.len {
        let exact = b.jet::<6>(d.grid.point(i)).deriv(4) * scale;
        peak = peak.max(exact.norm());
        err = err.max((exact - d.phi_bar[q][i]).norm());
    }
    assert!(err < 1e-8 * peak, "err {err:e} peak {peak:e}");
    // Finite differences agree as well.
    let fd = horizon_b_s(&p, 2, &d.grid, &d.phi[q]).unwrap();
    let fd_err = fd.iter().zip(&d.phi_bar[q]).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    assert!(fd_err < 1e-6 * peak, "fd err {fd_err:e}");
}

#[test]
fn horizon_b_s_kills_low_polynomials() {
    let p = kerr(0.6);
    let g = h_grid();
    for s in 1..=2 {
        // Round-off floor of a 2s-th difference quotient; one-sided edge stencils carry weights near 1e5.
        let floor = |vmax: f64| 1e-8 * vmax * (p.r_plus() - 1.0).powi(2 * s) / g.step.powi(2 * s);
        for deg in 0..2 * s {
            let v: Vec<C64> = (0..g.len).map(|i| C64::new(g.point(i).powi(deg), -0.5 * g.point(i).powi(deg))).collect();
            let vmax = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let out = horizon_b_s(&p, s, &g, &v).unwrap();
            let worst = out.iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(worst < floor(vmax), "s = {s} degree {deg}: {worst:e}");
        }
        // Degree 2s gives the constant (2s)! (r₊ − M)^{2s}.
        let v: Vec<C64> = (0..g.len).map(|i| C64::from(g.point(i).powi(2 * s))).collect();
        let fact: f64 = (1..=2 * s).map(|j| j as f64).product();
        let want = fact * (p.r_plus() - 1.0).powi(2 * s);
        let vmax = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for z in horizon_b_s(&p, s, &g, &v).unwrap() {
            assert!((z - want).norm() < floor(vmax), "{z} vs {want}");
        }
    }
}

/// c₀|A|²w² ∫₀^∞ k e^{−w²(k−ν)²} dk in closed form.
fn gaussian_w_plus(p: &KerrParams, b: &Bump) -> f64 {
    let rp = p.r_plus();
    let c0 = 4.0 * (rp * rp + p.a * p.a);
    let al = b.width * b.width;
    let nu = b.carrier;
    let integral = (-al * nu * nu).exp() / (2.0 * al) + nu * PI.sqrt() / (2.0 * al.sqrt()) * (1.0 + erf(al.sqrt() * nu));
    c0 * b.amp.norm_sqr() * al * integral
}

#[test]
fn spin_zero_gaussian_matches_closed_form() {
    let p = kerr(0.6);
    for (nu, w) in [(0.0, 0.1), (2.0, 0.12), (-3.0, 0.08)] {
        let b = bump(0, 0, -1.2, w, nu, C64::new(0.6, 0.8));
        let d = horizon(&p, 0, vec![b]);
        let got = w_horizon(&d, &d, Branch::Plus).unwrap();
        let want = gaussian_w_plus(&p, &b);
        assert!((got.value.re - want).abs() < 1e-10 * want, "nu {nu}: {} vs {want}", got.value.re);
        assert!(got.value.im.abs() < 1e-12 * want);
        assert!(!got.tail_warning && got.quadrature_error < 1e-10 * want);
    }
}

#[test]
fn horizon_two_point_functions_are_hermitian_and_positive() {
    let p = kerr(0.9);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for s in 0..=2 {
        let (g, h) = (random_profile(&mut rng, s, 2, Surface::Horizon), random_profile(&mut rng, s, 2, Surface::Horizon));
        let (dg, dh) = (horizon_data_build(&p, s, 2, h_grid(), g).unwrap(), horizon_data_build(&p, s, 2, h_grid(), h).unwrap());
        for br in [Branch::Plus, Branch::Minus] {
            let a = w_horizon(&dg, &dh, br).unwrap().value;
            let b = w_horizon(&dh, &dg, br).unwrap().value;
            assert!((a - b.conj()).norm() < 1e-12 * a.norm().max(1.0));
            let diag = w_horizon(&dg, &dg, br).unwrap().value;
            assert!(diag.re >= 0.0 && diag.im.abs() < 1e-12 * diag.re.max(1e-300));
        }
    }
}

#[test]
fn horizon_commutator_is_the_symplectic_form() {
    let p = kerr(0.6);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for s in 0..=2 {
        for _ in 0..4 {
            let d1 = horizon_data_build(&p, s, 2, h_grid(), random_profile(&mut rng, s, 2, Surface::Horizon)).unwrap();
            let d2 = horizon_data_build(&p, s, 2, h_grid(), random_profile(&mut rng, s, 2, Surface::Horizon)).unwrap();
            let wp = w_horizon(&d1, &d2, Branch::Plus).unwrap().value;
            let wm = w_horizon(&d1, &d2, Branch::Minus).unwrap().value;
            let sig = sigma_horizon(&d1, &d2).unwrap();
            let scale = d1.norm() * d2.norm() * d1.c_s();
            assert!((wp - wm - I * sig).norm() < 1e-8 * scale, "s = {s}: {} vs {}", wp - wm, I * sig);
            // σ is anti-hermitian in this normalisation: σ(φ, ψ) = −conj σ(ψ, φ).
            let back = sigma_horizon(&d2, &d1).unwrap();
            assert!((sig + back.conj()).norm() < 1e-8 * scale);
        }
    }
}

const I: C64 = C64::new(0.0, 1.0);

#[test]
fn horizon_flow_is_a_group_and_preserves_w() {
    let p = kerr(0.6);
    let d = horizon(&p, 2, vec![bump(2, 2, -1.0, 0.1, 1.5, C64::new(1.0, 0.2)), bump(2, -1, -1.4, 0.12, -1.0, C64::new(-0.3, 0.5))]);
    let e = horizon(&p, 2, vec![bump(2, 2, -1.2, 0.09, 0.5, C64::new(0.4, -0.9))]);
    let two = killing_flow_horizon(&killing_flow_horizon(&d, 0.4).unwrap(), -0.7).unwrap();
    let once = killing_flow_horizon(&d, -0.3).unwrap();
    for (a, b) in two.phi.iter().flatten().zip(once.phi.iter().flatten()) {
        assert!((a - b).norm() < 1e-12);
    }
    for br in [Branch::Plus, Branch::Minus] {
        let base = w_horizon(&d, &e, br).unwrap().value;
        let moved = w_horizon(&killing_flow_horizon(&d, 0.5).unwrap(), &killing_flow_horizon(&e, 0.5).unwrap(), br).unwrap().value;
        assert!((base - moved).norm() < 1e-8 * base.norm(), "{base} vs {moved}");
    }
}

fn kms_data(p: &KerrParams, s: i32) -> (HorizonData, HorizonData) {
    let l = s.max(1);
    (
        horizon(p, s, vec![bump(l, 1, -1.0, 0.06, 1.0, C64::new(1.0, 0.3)), bump(2, 0, -1.3, 0.08, -0.5, C64::new(0.2, -0.4))]),
        horizon(p, s, vec![bump(l, 1, -0.9, 0.07, -0.5, C64::new(0.5, 0.5)), bump(2, 0, -1.2, 0.06, 0.0, C64::new(-0.6, 0.1))]),
    )
}

#[test]
fn killing_time_representation_matches_kruskal_representation() {
    let p = kerr(0.6);
    for s in 0..=2 {
        let (d1, d2) = kms_data(&p, s);
        for br in [Branch::Plus, Branch::Minus] {
            let u = w_horizon(&d1, &d2, br).unwrap().value;
            let t = w_horizon_thermal(&d1, &d2, br).unwrap();
            assert!((u - t).norm() < 1e-8 * u.norm(), "s = {s} {br:?}: {u} vs {t}");
        }
    }
}

#[test]
fn kms_holds_at_the_hawking_temperature_only() {
    let p = kerr(0.6);
    let f = GaussTest { c0: 1.0, c1: 0.7, center: 0.0, width: 0.08 };
    let beta = p.beta();
    for s in [0, 2] {
        let (d1, d2) = kms_data(&p, s);
        let trial: Vec<f64> = (-5..=5).map(|j| beta * (1.0 + 0.02 * j as f64)).collect();
        let scan = kms_scan(&d1, &d2, &f, &trial).unwrap();
        assert!(scan[5].residual < 1e-6, "s = {s}: {:e}", scan[5].residual);
        let best = (0..scan.len()).min_by(|&a, &b| scan[a].residual.partial_cmp(&scan[b].residual).unwrap()).unwrap();
        assert_eq!(best, 5);
        assert!(scan[4].residual > 1e3 * scan[5].residual);
    }
    let bad = horizon(&p, 0, vec![bump(0, 0, 0.0, 0.1, 0.0, C64::new(1.0, 0.0))]);
    assert!(matches!(kms_check(&bad, &bad, &f, beta), Err(kerrteuk::KerrError::Support(_))));
}

#[test]
fn gauss_test_transform_is_the_fourier_transform() {
    let f = GaussTest { c0: 0.4, c1: -1.3, center: 0.3, width: 0.5 };
    for z in [C64::new(0.0, 0.0), C64::new(1.7, 0.0), C64::new(-2.0, 0.8)] {
        let h = 1e-3;
        let num: C64 = (-12000..=12000).map(|j| {
            let x = j as f64 * h;
            (I * z * x).exp() * f.value(x)
        }).sum::<C64>() * h;
        assert!((num - f.transform(z)).norm() < 1e-10, "{num} vs {}", f.transform(z));
    }
}

#[test]
fn spin_zero_scri_is_unweighted() {
    let sp = scri_space(0);
    let b = bump(1, 1, 0.5, 1.0, 1.0, C64::new(0.6, 0.8));
    let d = scri_data_build(sp, Profile::new(vec![b])).unwrap();
    for (a, c) in d.psi.iter().flatten().zip(d.psi_bar.iter().flatten()) {
        assert!((a - c).norm() < 1e-12);
    }
    let got = w_scri(sp, &d, &d, Branch::Plus).unwrap().value.re;
    let p = KerrParams::new(1.0, 0.0).unwrap();
    // Same closed form as on H with c₀ replaced by 4.
    let want = gaussian_w_plus(&p, &b) / (4.0 * (4.0));
    assert!((got - 4.0 * want).abs() < 1e-10 * got, "{got} vs {}", 4.0 * want);
}

#[test]
fn single_harmonic_scri_uses_the_inverse_ts_constant() {
    // With a = 0 the spheroidal basis is the spin-weighted one and A_s is diagonal.
    let p = kerr(0.0);
    let sp = ScriSpace::new(&p, 1, 2, i_grid(), SCRI_KMAX).unwrap();
    let b = bump(2, 1, 0.0, 1.0, 0.8, C64::new(1.0, 0.0));
    let d = scri_data_build(&sp, Profile::new(vec![b])).unwrap();
    let got = w_scri(&sp, &d, &d, Branch::Plus).unwrap().value.re;
    // N(1) = (S̄ − 1)² with S̄ = −(ℓ(ℓ+1) − s² − s)/2 at c = 0.
    let sbar = -0.5 * (6.0 - 2.0);
    let n = (sbar - 1.0f64).powi(2);
    let (al, nu) = (1.0, 0.8);
    // ∫₀^∞ k³ e^{−(k−ν)²} dk by Gauss–Laguerre-free direct quadrature.
    let h = 1e-3;
    let integral: f64 = (1..40000).map(|j| {
        let k = j as f64 * h;
        k.powi(3) * (-al * (k - nu) * (k - nu)).exp()
    }).sum::<f64>() * h;
    let want = 16.0 / (2.0 * PI) * 2.0 * PI * al * integral / n;
    assert!((got - want).abs() < 1e-8 * want, "{got} vs {want}");
    let ev = kerrteuk::angular::ts_eigenvalue(&p, 1, 0.5, 1, 2).unwrap();
    assert!((ev.n - n).abs() < 1e-10);
}

#[test]
fn scri_a_inverse_matches_a_mode_sum() {
    let sp = scri_space(2);
    let p = kerr(0.6);
    for &k in &[-3.0, 0.4, 5.0] {
        for m in -2..=2 {
            let inv = sp.a_inverse(k, m).unwrap();
            let dim = inv.nrows();
            if dim == 0 {
                continue;
            }
            // Σ_ℓ v_ℓ v_ℓᵀ / N_ℓ over individually converged modes, restricted to the first rows.
            let mut oracle = nalgebra::DMatrix::<f64>::zeros(dim, dim);
            let lo = m.abs().max(2);
            for ell in lo..=lo + 24 {
                let mode = kerrteuk::angular::spheroidal_mode(2, m, p.a * k, ell).unwrap();
                let n = kerrteuk::angular::ts_polynomial(&p, 2, k, m, mode.sbar).unwrap();
                let v = nalgebra::DVector::from_vec(mode.coeffs[..dim].to_vec());
                oracle += &v * v.transpose() / n;
            }
            let err = (&inv - &oracle).norm() / oracle.norm();
            assert!(err < 1e-10, "k = {k} m = {m}: {err:e}");
        }
    }
}

#[test]
fn scri_commutator_and_invariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for s in 0..=2 {
        let sp = scri_space(s);
        for _ in 0..3 {
            let d1 = scri_data_build(sp, random_profile(&mut rng, s, 2, Surface::Scri)).unwrap();
            let d2 = scri_data_build(sp, random_profile(&mut rng, s, 2, Surface::Scri)).unwrap();
            let wp = w_scri(sp, &d1, &d2, Branch::Plus).unwrap();
            let wm = w_scri(sp, &d1, &d2, Branch::Minus).unwrap();
            let sig = sigma_scri(sp, &d1, &d2).unwrap();
            let scale = d1.norm() * d2.norm() * 4f64.powi(s + 1) * 10f64.powi(2 * s);
            assert!((wp.value - wm.value - I * sig).norm() < 1e-8 * scale, "s = {s}: {} vs {}", wp.value - wm.value, I * sig);
            let (m1, m2) = (killing_flow_scri(sp, &d1, 1.3).unwrap(), killing_flow_scri(sp, &d2, 1.3).unwrap());
            let moved = w_scri(sp, &m1, &m2, Branch::Plus).unwrap().value;
            assert!((moved - wp.value).norm() < 1e-8 * wp.value.norm().max(1e-8 * scale));
        }
    }
}

#[test]
fn scri_ground_state() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for s in 0..=2 {
        let sp = scri_space(s);
        let d1 = scri_data_build(sp, random_profile(&mut rng, s, 2, Surface::Scri)).unwrap();
        let d2 = scri_data_build(sp, random_profile(&mut rng, s, 2, Surface::Scri)).unwrap();
        for br in [Branch::Plus, Branch::Minus] {
            let r = ground_state_check(sp, &d1, &d2, br, 12).unwrap();
            assert!(r.relative() < 1e-8, "s = {s} {br:?}: {:e}", r.relative());
        }
    }
}

#[test]
fn positivity_on_random_data() {
    let p = kerr(0.6);
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for s in 0..=2 {
        for _ in 0..10 {
            let d = horizon_data_build(&p, s, 2, h_grid(), random_profile(&mut rng, s, 2, Surface::Horizon)).unwrap();
            let w = w_horizon(&d, &d, Branch::Plus).unwrap().value.re;
            assert!(w >= -1e-10 * d.norm().powi(2));
            let e = scri_data_build(scri_space(s), random_profile(&mut rng, s, 2, Surface::Scri)).unwrap();
            let w = w_scri(scri_space(s), &e, &e, Branch::Plus).unwrap().value.re;
            assert!(w >= -1e-10 * e.norm().powi(2));
        }
    }
}

#[test]
fn fornberg_weights_reproduce_known_stencils() {
    let w = kerrteuk::numerics::fornberg_weights(0.0, &[-1.0, 0.0, 1.0], 2);
    assert!((w[1][0] + 0.5).abs() < 1e-15 && w[1][1].abs() < 1e-15 && (w[1][2] - 0.5).abs() < 1e-15);
    assert!((w[2][0] - 1.0).abs() < 1e-15 && (w[2][1] + 2.0).abs() < 1e-15 && (w[2][2] - 1.0).abs() < 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn chi_difference_is_identity(x in -50.0f64..50.0, kappa in 0.05f64..0.5) {
        let k = thermal_kernels(x, kappa).unwrap();
        prop_assert!((k.chi_plus - k.chi_minus - x).abs() <= 1e-12 * (1.0 + x.abs()));
        prop_assert!(k.chi_plus >= 0.0 && k.chi_minus >= 0.0);
        prop_assert!((k.x_plus - k.x_minus - x).abs() <= 1e-15 * (1.0 + x.abs()));
    }

    #[test]
    fn horizon_w_plus_is_positive(seed in 0u64..1000, s in 0i32..=2) {
        let p = kerr(0.6);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = horizon_data_build(&p, s, 2, h_grid(), random_profile(&mut rng, s, 2, Surface::Horizon)).unwrap();
        let w = w_horizon(&d, &d, Branch::Plus).unwrap();
        prop_assert!(w.value.re >= -1e-10 * d.norm().powi(2));
        prop_assert!(!w.tail_warning);
    }
}
