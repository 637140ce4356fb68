//! Truncated Taylor series in one variable with complex coefficients.
//!
//! A `Jet<N>` stores `c[k] = f^{(k)}(x0) / k!` for `k < N`. Arithmetic and the
//! elementary functions propagate the series exactly up to truncation, so a
//! variable seeded with `Jet::var` yields derivatives to machine precision.
//! This replaces complex-step differentiation: the fields being differentiated
//! are themselves complex (null tetrads), so the imaginary unit is not free.

use num_complex::Complex64;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet<const N: usize> {
    pub c: [C64; N],
}

impl<const N: usize> Default for Jet<N> {
    fn default() -> Self {
        Self { c: [ZERO; N] }
    }
}

impl<const N: usize> Jet<N> {
    pub fn cst(v: impl Into<C64>) -> Self {
        let mut j = Self::default();
        j.c[0] = v.into();
        j
    }

    /// Independent variable at `x0` (unit first-order coefficient).
    pub fn var(x0: impl Into<C64>) -> Self {
        let mut j = Self::cst(x0);
        if N > 1 {
            j.c[1] = C64::new(1.0, 0.0);
        }
        j
    }

    /// Variable moving with speed `dir` along the seed direction.
    pub fn seeded(x0: impl Into<C64>, dir: f64) -> Self {
        let mut j = Self::cst(x0);
        if N > 1 {
            j.c[1] = C64::new(dir, 0.0);
        }
        j
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::cst(1.0)
    }

    #[inline]
    pub fn val(&self) -> C64 {
        self.c[0]
    }

    #[inline]
    pub fn re(&self) -> f64 {
        self.c[0].re
    }

    /// k-th derivative at the expansion point.
    pub fn deriv(&self, k: usize) -> C64 {
        let mut f = 1.0;
        for i in 2..=k {
            f *= i as f64;
        }
        self.c[k] * f
    }

    /// Series of the derivative. The top coefficient becomes unknown and is set to zero.
    pub fn d(&self) -> Self {
        let mut out = Self::default();
        for k in 0..N.saturating_sub(1) {
            out.c[k] = self.c[k + 1] * (k as f64 + 1.0);
        }
        out
    }

    pub fn conj(&self) -> Self {
        let mut out = *self;
        for v in out.c.iter_mut() {
            *v = v.conj();
        }
        out
    }

    pub fn scale(&self, s: impl Into<C64>) -> Self {
        let s = s.into();
        let mut out = *self;
        for v in out.c.iter_mut() {
            *v *= s;
        }
        out
    }

    pub fn recip(&self) -> Self {
        Self::one() / *self
    }

    pub fn sqr(&self) -> Self {
        *self * *self
    }

    pub fn powi(&self, n: i32) -> Self {
        if n < 0 {
            return self.powi(-n).recip();
        }
        let mut acc = Self::one();
        let mut base = *self;
        let mut e = n as u32;
        while e > 0 {
            if e & 1 == 1 {
                acc *= base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }

    /// Principal-branch power with complex exponent.
    pub fn powc(&self, alpha: C64) -> Self {
        let f0 = self.c[0];
        let mut h = Self::default();
        h.c[0] = f0.powc(alpha);
        for k in 1..N {
            let mut acc = ZERO;
            for j in 1..=k {
                acc += self.c[j] * h.c[k - j] * ((alpha + 1.0) * j as f64 - k as f64);
            }
            h.c[k] = acc / (f0 * k as f64);
        }
        h
    }

    pub fn powf(&self, alpha: f64) -> Self {
        self.powc(C64::new(alpha, 0.0))
    }

    pub fn sqrt(&self) -> Self {
        let f0 = self.c[0];
        let mut h = Self::default();
        h.c[0] = f0.sqrt();
        for k in 1..N {
            let mut acc = self.c[k];
            for j in 1..k {
                acc -= h.c[j] * h.c[k - j];
            }
            h.c[k] = acc / (h.c[0] * 2.0);
        }
        h
    }

    pub fn exp(&self) -> Self {
        let mut e = Self::default();
        e.c[0] = self.c[0].exp();
        for k in 1..N {
            let mut acc = ZERO;
            for j in 1..=k {
                acc += self.c[j] * e.c[k - j] * j as f64;
            }
            e.c[k] = acc / k as f64;
        }
        e
    }

    pub fn ln(&self) -> Self {
        let f0 = self.c[0];
        let mut g = Self::default();
        g.c[0] = f0.ln();
        for k in 1..N {
            let mut acc = self.c[k] * k as f64;
            for j in 1..k {
                acc -= g.c[j] * self.c[k - j] * j as f64;
            }
            g.c[k] = acc / (f0 * k as f64);
        }
        g
    }

    pub fn sin_cos(&self) -> (Self, Self) {
        let mut s = Self::default();
        let mut c = Self::default();
        s.c[0] = self.c[0].sin();
        c.c[0] = self.c[0].cos();
        for k in 1..N {
            let mut as_ = ZERO;
            let mut ac = ZERO;
            for j in 1..=k {
                let jf = self.c[j] * j as f64;
                as_ += jf * c.c[k - j];
                ac -= jf * s.c[k - j];
            }
            s.c[k] = as_ / k as f64;
            c.c[k] = ac / k as f64;
        }
        (s, c)
    }

    pub fn sin(&self) -> Self {
        self.sin_cos().0
    }

    pub fn cos(&self) -> Self {
        self.sin_cos().1
    }

    /// Evaluate the truncated series at offset `h` from the expansion point.
    pub fn eval_at(&self, h: C64) -> C64 {
        let mut acc = ZERO;
        for k in (0..N).rev() {
            acc = acc * h + self.c[k];
        }
        acc
    }
}

impl<const N: usize> Add for Jet<N> {
    type Output = Self;
    fn add(mut self, o: Self) -> Self {
        for k in 0..N {
            self.c[k] += o.c[k];
        }
        self
    }
}

impl<const N: usize> Sub for Jet<N> {
    type Output = Self;
    fn sub(mut self, o: Self) -> Self {
        for k in 0..N {
            self.c[k] -= o.c[k];
        }
        self
    }
}

impl<const N: usize> Neg for Jet<N> {
    type Output = Self;
    fn neg(mut self) -> Self {
        for v in self.c.iter_mut() {
            *v = -*v;
        }
        self
    }
}

impl<const N: usize> Mul for Jet<N> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mut out = Self::default();
        for i in 0..N {
            if self.c[i] == ZERO {
                continue;
            }
            for j in 0..N - i {
                out.c[i + j] += self.c[i] * o.c[j];
            }
        }
        out
    }
}

impl<const N: usize> Div for Jet<N> {
    type Output = Self;
    fn div(self, b: Self) -> Self {
        let mut q = Self::default();
        let b0 = b.c[0];
        for k in 0..N {
            let mut acc = self.c[k];
            for j in 1..=k {
                acc -= b.c[j] * q.c[k - j];
            }
            q.c[k] = acc / b0;
        }
        q
    }
}

impl<const N: usize> AddAssign for Jet<N> {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<const N: usize> SubAssign for Jet<N> {
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl<const N: usize> MulAssign for Jet<N> {
    fn mul_assign(&mut self, o: Self) {
        *self = *self * o;
    }
}

macro_rules! scalar_ops {
    ($t:ty) => {
        impl<const N: usize> Add<$t> for Jet<N> {
            type Output = Self;
            fn add(mut self, o: $t) -> Self {
                self.c[0] += C64::from(o);
                self
            }
        }
        impl<const N: usize> Sub<$t> for Jet<N> {
            type Output = Self;
            fn sub(mut self, o: $t) -> Self {
                self.c[0] -= C64::from(o);
                self
            }
        }
        impl<const N: usize> Mul<$t> for Jet<N> {
            type Output = Self;
            fn mul(self, o: $t) -> Self {
                self.scale(o)
            }
        }
        impl<const N: usize> Div<$t> for Jet<N> {
            type Output = Self;
            fn div(self, o: $t) -> Self {
                self.scale(C64::new(1.0, 0.0) / C64::from(o))
            }
        }
        impl<const N: usize> Add<Jet<N>> for $t {
            type Output = Jet<N>;
            fn add(self, o: Jet<N>) -> Jet<N> {
                o + self
            }
        }
        impl<const N: usize> Sub<Jet<N>> for $t {
            type Output = Jet<N>;
            fn sub(self, o: Jet<N>) -> Jet<N> {
                -o + self
            }
        }
        impl<const N: usize> Mul<Jet<N>> for $t {
            type Output = Jet<N>;
            fn mul(self, o: Jet<N>) -> Jet<N> {
                o.scale(self)
            }
        }
        impl<const N: usize> Div<Jet<N>> for $t {
            type Output = Jet<N>;
            fn div(self, o: Jet<N>) -> Jet<N> {
                Jet::<N>::cst(self) / o
            }
        }
    };
}

scalar_ops!(f64);
scalar_ops!(C64);
