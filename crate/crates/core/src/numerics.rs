//! Small numerical kernels shared by the physics modules: bracketed root
//! finding, Gauss–Legendre rules, Chebyshev differentiation and an adaptive
//! Dormand–Prince 5(4) integrator.

use crate::error::{KerrError, Result};

/// Brent's method on a sign-changing bracket.
pub fn brent<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, xtol: f64, maxit: usize) -> Result<f64> {
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(KerrError::NoRoot(format!("bracket [{a}, {b}] has no sign change")));
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..maxit {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
    }
    Err(KerrError::NoRoot("Brent iteration limit".into()))
}

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        dp = if d != 0.0 { d } else { dp };
        x[i] = z;
        x[n - 1 - i] = -z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Gauss–Legendre rule mapped to [a, b].
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let h = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    (x.iter().map(|xi| mid + h * xi).collect(), w.iter().map(|wi| wi * h).collect())
}

/// Finite-difference weights at `z` for derivatives 0..=`order` on the nodes `x` (Fornberg's recursion).
/// Row k of the result holds the weights of the k-th derivative.
pub fn fornberg_weights(z: f64, x: &[f64], order: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut c = vec![vec![0.0; n]; order + 1];
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Chebyshev–Gauss–Lobatto points on [a, b], ascending, and the differentiation matrix.
pub fn chebyshev(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<Vec<f64>>) {
    use std::f64::consts::PI;
    let xs: Vec<f64> = (0..=n).map(|j| -(PI * j as f64 / n as f64).cos()).collect();
    let c = |j: usize| if j == 0 || j == n { 2.0 } else { 1.0 };
    let sgn = |j: usize| if j.is_multiple_of(2) { 1.0 } else { -1.0 };
    let mut d = vec![vec![0.0; n + 1]; n + 1];
    for i in 0..=n {
        for j in 0..=n {
            if i != j {
                d[i][j] = c(i) / c(j) * sgn(i + j) / (xs[i] - xs[j]);
            }
        }
    }
    for i in 0..=n {
        let s: f64 = (0..=n).filter(|&j| j != i).map(|j| d[i][j]).sum();
        d[i][i] = -s;
    }
    let scale = 2.0 / (b - a);
    for row in d.iter_mut() {
        for v in row.iter_mut() {
            *v *= scale;
        }
    }
    let pts = xs.iter().map(|x| a + 0.5 * (b - a) * (x + 1.0)).collect();
    (pts, d)
}

/// Apply a real differentiation matrix to complex samples.
pub fn apply_matrix(d: &[Vec<f64>], f: &[num_complex::Complex64]) -> Vec<num_complex::Complex64> {
    d.iter()
        .map(|row| row.iter().zip(f).map(|(a, b)| b * *a).sum())
        .collect()
}

#[derive(Clone, Copy, Debug)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h0: f64,
    pub hmin: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { rtol: 1e-12, atol: 1e-14, h0: 1e-3, hmin: 1e-14, max_steps: 2_000_000 }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Adaptive Dormand–Prince 5(4) integration of `y' = f(x, y)` from `x0`
/// through each value in `outputs` (monotone in the direction of travel).
/// Steps are clipped so every output is hit exactly. The local error is
/// measured against the largest state component, so components passing
/// through zero do not stall the step size.
pub fn dopri5<F>(mut f: F, x0: f64, y0: &[f64], outputs: &[f64], opts: &OdeOptions) -> Result<Vec<Vec<f64>>>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let n = y0.len();
    let mut x = x0;
    let mut y = y0.to_vec();
    let dir = match outputs.last() {
        Some(&xe) if xe < x0 => -1.0,
        _ => 1.0,
    };
    let mut h = opts.h0.abs() * dir;
    let mut out = Vec::with_capacity(outputs.len());
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; n]; 7];
    let mut tmp = vec![0.0; n];
    let mut ynew = vec![0.0; n];
    let mut steps = 0usize;
    f(x, &y, &mut k[0]);
    for &target in outputs {
        while (target - x) * dir > 0.0 {
            if (x + h - target) * dir > 0.0 {
                h = target - x;
            }
            steps += 1;
            if steps > opts.max_steps {
                return Err(KerrError::Integration { r: x, msg: "step budget exhausted".into() });
            }
            let stage = |k: &Vec<Vec<f64>>, coeffs: &[f64], tmp: &mut [f64], y: &[f64], h: f64| {
                for i in 0..n {
                    let mut s = 0.0;
                    for (j, c) in coeffs.iter().enumerate() {
                        s += c * k[j][i];
                    }
                    tmp[i] = y[i] + h * s;
                }
            };
            stage(&k, &[A21], &mut tmp, &y, h);
            f(x + C2 * h, &tmp, &mut k[1]);
            stage(&k, &[A31, A32], &mut tmp, &y, h);
            f(x + C3 * h, &tmp, &mut k[2]);
            stage(&k, &[A41, A42, A43], &mut tmp, &y, h);
            f(x + C4 * h, &tmp, &mut k[3]);
            stage(&k, &[A51, A52, A53, A54], &mut tmp, &y, h);
            f(x + C5 * h, &tmp, &mut k[4]);
            stage(&k, &[A61, A62, A63, A64, A65], &mut tmp, &y, h);
            f(x + h, &tmp, &mut k[5]);
            stage(&k, &[B1, 0.0, B3, B4, B5, B6], &mut ynew, &y, h);
            f(x + h, &ynew, &mut k[6]);
            let ymax = y.iter().chain(ynew.iter()).fold(0.0f64, |acc, v| acc.max(v.abs()));
            let sc = opts.atol + opts.rtol * ymax;
            let mut err = 0.0f64;
            for i in 0..n {
                let e = h * (E1 * k[0][i] + E3 * k[2][i] + E4 * k[3][i] + E5 * k[4][i] + E6 * k[5][i] + E7 * k[6][i]);
                err = err.max((e / sc).abs());
            }
            if !err.is_finite() {
                return Err(KerrError::Integration { r: x, msg: "non-finite state".into() });
            }
            if err <= 1.0 {
                x += h;
                std::mem::swap(&mut y, &mut ynew);
                let last = k[6].clone();
                k[0].copy_from_slice(&last);
                let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                h *= fac;
            } else {
                h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
                if h.abs() < opts.hmin {
                    return Err(KerrError::Integration { r: x, msg: "step size underflow".into() });
                }
            }
        }
        out.push(y.clone());
    }
    Ok(out)
}
