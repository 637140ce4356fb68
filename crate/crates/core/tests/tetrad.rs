use kerrteuk::geometry::*;
use kerrteuk::tetrad::{closed, *};
use kerrteuk::{KerrError, C64};
use proptest::prelude::*;
use std::f64::consts::PI;
use std::time::Instant;

fn kp(a: f64) -> KerrParams {
    KerrParams::new(1.0, a).unwrap()
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

fn grid(p: &KerrParams, n: usize) -> Vec<(f64, f64)> {
    let rp = p.r_plus();
    let mut out = vec![];
    for i in 0..n {
        let r = rp + 0.05 + (20.0 - rp - 0.05) * i as f64 / (n - 1) as f64;
        for j in 0..n {
            let th = 0.15 + (PI - 0.3) * j as f64 / (n - 1) as f64;
            out.push((r, th));
        }
    }
    out
}

#[test]
fn kinnersley_components_in_three_charts() {
    let p = kp(0.6);
    let t = tetrad_build(&p, &ChartPoint::new(Chart::StarKerr, [0.0, 3.0, 1.0, 0.0]), Scaling::Kinnersley).unwrap();
    assert_eq!(t.l, [0.0, 1.0, 0.0, 0.0]);
    let t = tetrad_build(&p, &ChartPoint::new(Chart::KerrStar, [0.0, 3.0, 1.0, 0.0]), Scaling::Kinnersley).unwrap();
    assert_eq!(t.n[0], 0.0);
    // Kerr-star components follow from the BL ones via dt* = dt + (r²+a²)/Δ dr, dφ* = dφ + a/Δ dr.
    let b = tetrad_build(&p, &ChartPoint::bl(0.0, 3.0, 1.0, 0.0), Scaling::Kinnersley).unwrap();
    let d = p.delta(3.0);
    let push = |v: [f64; 4]| [v[0] + (9.36 / d) * v[1], v[1], v[2], v[3] + 0.6 / d * v[1]];
    for k in 0..4 {
        assert!((push(b.l)[k] - t.l[k]).abs() < 1e-14);
        assert!((push(b.n)[k] - t.n[k]).abs() < 1e-14);
    }
}

#[test]
fn frame_checks() {
    for &a in &[0.0, 0.6, 0.9] {
        let p = kp(a);
        for (r, th) in grid(&p, 8) {
            for ch in [Chart::BoyerLindquist, Chart::KerrStar, Chart::StarKerr] {
                let t = tetrad_build(&p, &ChartPoint::new(ch, [0.3, r, th, 0.2]), Scaling::Kinnersley).unwrap();
                assert!(frame_check(&p, &t).unwrap().max_residual < 1e-10);
            }
            let cs = CustomScaling { c: C64::new(0.7, 0.4), pr: 0.8, q: C64::new(0.3, -0.5) };
            let t = tetrad_build(&p, &ChartPoint::bl(0.0, r, th, 0.0), Scaling::Custom(cs)).unwrap();
            assert!(frame_check(&p, &t).unwrap().max_residual < 1e-10);
            let x = 0.24 * (r - p.r_plus()) / 20.0;
            let t = tetrad_build(&p, &ChartPoint::new(Chart::Conformal, [0.0, x, th, 0.0]), Scaling::Conformal).unwrap();
            assert!(frame_check(&p, &t).unwrap().max_residual < 1e-10);
        }
        for &(u, v) in &[(0.0, 0.0), (-0.5, 0.3), (0.4, 0.7), (0.0, 1.0), (-1.0, 0.0)] {
            let t = tetrad_build(&p, &ChartPoint::new(Chart::Kruskal, [u, v, 1.2, 0.0]), Scaling::Kruskal).unwrap();
            assert!(t.l.iter().chain(t.n.iter()).all(|c| c.is_finite()));
            assert!(frame_check(&p, &t).unwrap().max_residual < 1e-10, "a={a} U={u} V={v}");
        }
    }
    let p = kp(0.6);
    let mut t = tetrad_build(&p, &ChartPoint::bl(0.0, 4.0, 1.0, 0.0), Scaling::Kinnersley).unwrap();
    let o = frame_check(&p, &t).unwrap().orientation;
    t.l = t.l.map(|v| v * 1.01);
    let rep = frame_check(&p, &t).unwrap();
    assert!((rep.residuals[2] - 0.01).abs() < 1e-12);
    assert_eq!(rep.orientation, o);
}

#[test]
fn spin_coefficients_match_kinnersley_closed_forms() {
    let s = kp(0.0);
    let t = tetrad_build(&s, &ChartPoint::bl(0.0, 3.0, 1.0, 0.0), Scaling::Kinnersley).unwrap();
    let sc = spin_coefficients(&s, &t).unwrap();
    assert!((sc.rho - C64::from(-1.0 / 3.0)).norm() < 1e-13);
    assert!(sc.tau.norm() < 1e-14 && sc.tau_prime.norm() < 1e-14);
    for &a in &[0.6, 0.9] {
        let p = kp(a);
        for (r, th) in grid(&p, 6) {
            for ch in [Chart::BoyerLindquist, Chart::KerrStar, Chart::StarKerr] {
                let t = tetrad_build(&p, &ChartPoint::new(ch, [0.0, r, th, 0.0]), Scaling::Kinnersley).unwrap();
                let sc = spin_coefficients(&p, &t).unwrap();
                let cl = closed::kinnersley_spin(&p, r, th);
                assert!(rel(sc.rho, cl.rho) < 1e-10);
                assert!(rel(sc.tau, cl.tau) < 1e-10, "{:?} {:?}", sc.tau, cl.tau);
                assert!(rel(sc.rho_prime, cl.rho_prime) < 1e-10);
                assert!(rel(sc.tau_prime, cl.tau_prime) < 1e-10, "{:?} {:?}", sc.tau_prime, cl.tau_prime);
                // Kerr–NUT ratios
                let zr = p.zeta(r, th).conj() / p.zeta(r, th);
                assert!(rel(sc.rho / sc.rho.conj(), zr) < 1e-8);
                assert!(rel(sc.rho_prime / sc.rho_prime.conj(), zr) < 1e-8);
                assert!(rel(-sc.tau_prime / sc.tau.conj(), zr) < 1e-8);
            }
        }
    }
}

#[test]
fn gamma_identities_on_exterior_grid() {
    let start = Instant::now();
    let mut worst = [0.0f64; 4];
    for &a in &[0.0, 0.6, 0.9] {
        let p = kp(a);
        for (r, th) in grid(&p, 20) {
            let pt = ChartPoint::bl(0.0, r, th, 0.0);
            let g = ghp_at(&p, &pt, &Scaling::Kinnersley).unwrap();
            let div = gamma_divergence(&p, &pt, &Scaling::Kinnersley, 1e-2).unwrap();
            let e = [
                rel(g.l_gamma(), closed::l_gamma(&p, r, th)),
                rel(g.n_gamma(), closed::n_gamma(&p, r, th)),
                rel(div, C64::from(closed::div_gamma(&p, r, th))),
                rel(g.gamma_square(), closed::gamma_square(&p, r, th)),
            ];
            for k in 0..4 {
                worst[k] = worst[k].max(e[k]);
            }
        }
    }
    let el = start.elapsed().as_secs_f64();
    assert!(worst.iter().all(|&w| w < 1e-8), "worst relative residuals {worst:?}");
    assert!(el < 5.0, "runtime {el}s");
}

#[test]
fn gamma_spot_values_and_closed_vector() {
    let p = kp(0.6);
    let (r, th) = (3.0, PI / 3.0);
    let g = ghp_at(&p, &ChartPoint::bl(0.0, r, th, 0.0), &Scaling::Kinnersley).unwrap();
    assert!((g.l_gamma() - C64::new(0.330033, 0.033003)).norm() < 1e-6);
    let div = gamma_divergence(&p, &ChartPoint::bl(0.0, r, th, 0.0), &Scaling::Kinnersley, 1e-2).unwrap();
    assert!((div.re + 0.0550055).abs() < 1e-7 && div.im.abs() < 1e-9);
    let up = g.gamma_up();
    let cl = closed::gamma_vector_bl(&p, r, th);
    for k in 0..4 {
        assert!((up[k] - cl[k]).norm() < 1e-12, "component {k}: {} vs {}", up[k], cl[k]);
    }
    let psi2 = g.gamma_square() - (th.cos() / th.sin()).powi(2) / (4.0 * p.rho2(r, th));
    let p2 = KerrParams::new(1.0, 0.6).unwrap();
    let g2 = ghp_at(&p2, &ChartPoint::bl(0.0, 3.0, PI / 4.0, 0.0), &Scaling::Kinnersley).unwrap();
    let psi2b = g2.gamma_square() - 0.25 / p2.rho2(3.0, PI / 4.0);
    assert!(rel(psi2b, p2.psi2(3.0, PI / 4.0)) < 1e-8);
    assert!(rel(psi2, g.spin.psi2) < 1e-8);
}

#[test]
fn gamma_contractions_are_chart_independent() {
    let p = kp(0.9);
    for &(r, th) in &[(2.5, 0.7), (6.0, 2.0), (1.0, 1.0)] {
        let vals: Vec<C64> = [Chart::BoyerLindquist, Chart::KerrStar, Chart::StarKerr]
            .iter()
            .map(|&ch| ghp_at(&p, &ChartPoint::new(ch, [0.0, r, th, 0.0]), &Scaling::Kinnersley).unwrap().n_gamma())
            .collect();
        assert!(rel(vals[1], vals[0]) < 1e-10 && rel(vals[2], vals[0]) < 1e-10);
        assert!(rel(vals[0], closed::n_gamma(&p, r, th)) < 1e-10);
    }
}

#[test]
fn connection_form_reflection_symmetry() {
    let p = kp(0.0);
    for &r in &[2.5, 4.0, 9.0] {
        let t = tetrad_build(&p, &ChartPoint::bl(0.0, r, 1.1, 0.0), Scaling::Kinnersley).unwrap();
        let w = connection_form(&p, &t, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(w.im.abs() < 1e-15);
        // boost part of w_t: ½ n^b ∇_t l_b = −Γ^b_{tr}·½ n_b l^r..., numerically M/(2r²)
        assert!((w.re - 1.0 / (2.0 * r * r)).abs() < 1e-13, "{w}");
    }
}

#[test]
fn rescaling_shifts_gamma_by_log_derivative() {
    let p = kp(0.6);
    let cs = CustomScaling { c: C64::new(0.7, 0.4), pr: 0.8, q: C64::new(0.3, -0.5) };
    for &(r, th) in &[(3.0, 1.0), (7.0, 2.2)] {
        let pt = ChartPoint::bl(0.0, r, th, 0.0);
        let g0 = ghp_at(&p, &pt, &Scaling::Kinnersley).unwrap();
        let g1 = ghp_at(&p, &pt, &Scaling::Custom(cs)).unwrap();
        // ∇λ/λ = (0, pr/r, −q sinθ, 0)
        let dl = [C64::from(0.0), C64::from(cs.pr / r), -cs.q * th.sin(), C64::from(0.0)];
        for k in 0..4 {
            assert!((g1.gamma[k] - (g0.gamma[k] - dl[k])).norm() < 1e-12, "k={k}");
        }
    }
}

#[test]
fn kruskal_contractions() {
    for &a in &[0.0, 0.6, 0.9] {
        let p = kp(a);
        for &(u, v) in &[(-0.5, 0.3), (0.4, 0.7), (-1.5, 2.0), (0.0, 0.8), (-0.8, 0.0), (0.0, 0.0)] {
            let th = 1.1;
            let pt = ChartPoint::new(Chart::Kruskal, [u, v, th, 0.0]);
            let r = chart_radius(&p, &pt).unwrap();
            let g = ghp_at(&p, &pt, &Scaling::Kruskal).unwrap();
            let lg = closed::l_gamma(&p, r, th) * (-u);
            let ng = closed::n_gamma_kruskal(&p, r, th, v);
            assert!((g.l_gamma() - lg).norm() < 1e-8 * (1.0 + lg.norm()), "a={a} U={u} V={v}");
            assert!((g.n_gamma() - ng).norm() < 1e-8 * (1.0 + ng.norm()), "a={a} U={u} V={v}: {} vs {}", g.n_gamma(), ng);
        }
        // Linear vanishing on H = {V = 0}.
        let th = 0.8;
        let slope = |v: f64| ghp_at(&p, &ChartPoint::new(Chart::Kruskal, [-0.7, v, th, 0.0]), &Scaling::Kruskal).unwrap().n_gamma() / v;
        let (s1, s2) = (slope(1e-3), slope(5e-4));
        assert!(((s1 - s2) / s2).norm() < 1e-2);
        assert!(ghp_at(&p, &ChartPoint::new(Chart::Kruskal, [-0.7, 0.0, th, 0.0]), &Scaling::Kruskal).unwrap().n_gamma().norm() < 1e-14);
    }
}

#[test]
fn conformal_contraction_limits() {
    for &a in &[0.0, 0.6, 0.9] {
        let p = kp(a);
        for &th in &[0.5, PI / 2.0, 2.3] {
            let at = |x: f64| ghp_at(&p, &ChartPoint::new(Chart::Conformal, [0.0, x, th, 0.0]), &Scaling::Conformal).unwrap();
            let xs = [1e-2, 1e-3, 1e-4];
            let ns: Vec<C64> = xs.iter().map(|&x| at(x).n_gamma()).collect();
            let ls: Vec<C64> = xs.iter().map(|&x| at(x).l_gamma()).collect();
            // Richardson for O(x) error with ratio 10.
            let ext = (ns[2] * 10.0 - ns[1]) / 9.0;
            let lim = closed::conformal_n_gamma_limit(&p, th);
            assert!((ext - lim).norm() < 1e-6, "a={a} θ={th}: {ext} vs {lim}");
            assert!((ext.re + 0.5).abs() < 1e-6);
            // l̆Γ̆ = lΓ = p/ϱ² ~ x.
            for (x, l) in xs.iter().zip(&ls) {
                assert!((l / *x - C64::new(1.0, 0.0)).norm() < 3.0 * x);
            }
            // Γ̆ = Γ: n̆Γ̆ = x⁻² nΓ pointwise.
            let x = 0.05;
            let r = 1.0 / x;
            assert!(rel(at(x).n_gamma(), closed::n_gamma(&p, r, th) / (x * x)) < 1e-10);
        }
    }
}

#[test]
fn pairing_and_axis_errors() {
    let p = kp(0.6);
    assert!(matches!(
        tetrad_build(&p, &ChartPoint::new(Chart::Kruskal, [-0.5, 0.5, 1.0, 0.0]), Scaling::Kinnersley),
        Err(KerrError::ScalingMismatch(_))
    ));
    assert!(matches!(tetrad_build(&p, &ChartPoint::bl(0.0, 3.0, PI, 0.0), Scaling::Kinnersley), Err(KerrError::Domain(_)) | Err(KerrError::AxisProximity(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn prop_kinnersley_normalization(a in -0.95f64..0.95, r in 2.0f64..50.0, th in 0.01f64..3.13) {
        let p = kp(a);
        prop_assume!(r > p.r_plus() + 1e-3);
        let t = tetrad_build(&p, &ChartPoint::bl(0.0, r, th, 0.0), Scaling::Kinnersley).unwrap();
        prop_assert!(frame_check(&p, &t).unwrap().max_residual < 1e-10);
    }

    #[test]
    fn prop_l_gamma_identity(a in -0.95f64..0.95, r in 2.0f64..50.0, th in 0.05f64..3.09) {
        let p = kp(a);
        prop_assume!(r > p.r_plus() + 1e-2);
        let g = ghp_at(&p, &ChartPoint::bl(0.0, r, th, 0.0), &Scaling::Kinnersley).unwrap();
        prop_assert!(rel(g.l_gamma(), closed::l_gamma(&p, r, th)) < 1e-8);
        prop_assert!(rel(g.gamma_square(), closed::gamma_square(&p, r, th)) < 1e-8);
    }
}
