//! Truncated derivative jets: `f, f', f'', ...` at a single point.
//!
//! Operators act on jets exactly (Leibniz rule), so compositions like
//! `eta (H psi)` are evaluated without finite differences.

use num_complex::Complex64;
use std::ops::{Add, Mul, Neg, Sub};

/// Highest derivative a jet can carry.
pub const MAX_ORDER: usize = 8;

const BINOM: [[f64; MAX_ORDER + 1]; MAX_ORDER + 1] = binomials();

const fn binomials() -> [[f64; MAX_ORDER + 1]; MAX_ORDER + 1] {
    let mut t = [[0.0; MAX_ORDER + 1]; MAX_ORDER + 1];
    let mut n = 0;
    while n <= MAX_ORDER {
        t[n][0] = 1.0;
        let mut k = 1;
        while k <= n {
            t[n][k] = t[n - 1][k - 1] + if k < n { t[n - 1][k] } else { 0.0 };
            k += 1;
        }
        n += 1;
    }
    t
}

/// Value and derivatives `d[0..=order]` of a complex function at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    d: [Complex64; MAX_ORDER + 1],
    order: usize,
}

impl Jet {
    pub fn new(derivs: &[Complex64]) -> Self {
        assert!(!derivs.is_empty() && derivs.len() <= MAX_ORDER + 1);
        let mut d = [Complex64::new(0.0, 0.0); MAX_ORDER + 1];
        d[..derivs.len()].copy_from_slice(derivs);
        Jet {
            d,
            order: derivs.len() - 1,
        }
    }

    pub fn from_real(derivs: &[f64]) -> Self {
        let c: Vec<Complex64> = derivs.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        Jet::new(&c)
    }

    /// A constant; all derivatives vanish up to `MAX_ORDER`.
    pub fn constant(c: Complex64) -> Self {
        let mut d = [Complex64::new(0.0, 0.0); MAX_ORDER + 1];
        d[0] = c;
        Jet { d, order: MAX_ORDER }
    }

    /// The identity function `x -> x` at `x0`.
    pub fn variable(x0: f64) -> Self {
        let mut d = [Complex64::new(0.0, 0.0); MAX_ORDER + 1];
        d[0] = Complex64::new(x0, 0.0);
        d[1] = Complex64::new(1.0, 0.0);
        Jet { d, order: MAX_ORDER }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn value(&self) -> Complex64 {
        self.d[0]
    }

    /// k-th derivative; panics if beyond the carried order.
    pub fn get(&self, k: usize) -> Complex64 {
        assert!(k <= self.order, "jet of order {} has no derivative {k}", self.order);
        self.d[k]
    }

    pub fn derivs(&self) -> &[Complex64] {
        &self.d[..=self.order]
    }

    /// Drop derivatives above `order`.
    pub fn truncate(mut self, order: usize) -> Self {
        self.order = self.order.min(order);
        self
    }

    /// Derivative of the underlying function, one order shorter.
    pub fn diff(&self) -> Self {
        assert!(self.order >= 1, "cannot differentiate a jet of order 0");
        let mut d = [Complex64::new(0.0, 0.0); MAX_ORDER + 1];
        d[..self.order].copy_from_slice(&self.d[1..=self.order]);
        Jet {
            d,
            order: self.order - 1,
        }
    }

    pub fn conj(&self) -> Self {
        let mut out = *self;
        for v in out.d.iter_mut() {
            *v = v.conj();
        }
        out
    }

    pub fn re(&self) -> Self {
        let mut out = *self;
        for v in out.d.iter_mut() {
            *v = Complex64::new(v.re, 0.0);
        }
        out
    }

    pub fn im(&self) -> Self {
        let mut out = *self;
        for v in out.d.iter_mut() {
            *v = Complex64::new(v.im, 0.0);
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = *self;
        for v in out.d[..=out.order].iter_mut() {
            *v *= s;
        }
        out
    }

    /// `exp(f)` via `g' = f' g`.
    pub fn exp(&self) -> Self {
        let n = self.order;
        let mut g = [Complex64::new(0.0, 0.0); MAX_ORDER + 1];
        g[0] = self.d[0].exp();
        for k in 0..n {
            // g^{(k+1)} = sum_j C(k, j) f^{(j+1)} g^{(k-j)}
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..=k {
                s += BINOM[k][j] * self.d[j + 1] * g[k - j];
            }
            g[k + 1] = s;
        }
        Jet { d: g, order: n }
    }

    /// `log(f)`, principal branch for the value.
    pub fn ln(&self) -> Self {
        let n = self.order;
        let f0 = self.d[0];
        let mut l = [Complex64::new(0.0, 0.0); MAX_ORDER + 1];
        l[0] = f0.ln();
        // f^{(k+1)} = sum_j C(k, j) l^{(j+1)} f^{(k-j)}, solved for l^{(k+1)}
        for k in 0..n {
            let mut s = self.d[k + 1];
            for j in 0..k {
                s -= BINOM[k][j] * l[j + 1] * self.d[k - j];
            }
            l[k + 1] = s / f0;
        }
        Jet { d: l, order: n }
    }

    /// `1 / f`.
    pub fn recip(&self) -> Self {
        let n = self.order;
        let f0 = self.d[0];
        let mut r = [Complex64::new(0.0, 0.0); MAX_ORDER + 1];
        r[0] = 1.0 / f0;
        // 0 = sum_j C(k, j) f^{(j)} r^{(k-j)}
        for k in 1..=n {
            let mut s = Complex64::new(0.0, 0.0);
            for j in 1..=k {
                s += BINOM[k][j] * self.d[j] * r[k - j];
            }
            r[k] = -s / f0;
        }
        Jet { d: r, order: n }
    }

    /// Compose with a scalar function given its derivatives at `self.value()`.
    /// `outer[k]` is the k-th derivative of the outer function.
    pub fn compose(&self, outer: &[Complex64]) -> Self {
        // Faa di Bruno through repeated products: h = F(f), h' = F'(f) f'.
        // Build jets of F^{(m)}(f) recursively from the top order down.
        let n = self.order.min(outer.len() - 1);
        let df = (*self).truncate(n).diff();
        let mut level = Jet::constant(outer[n]).truncate(0);
        for m in (0..n).rev() {
            // F^{(m)}(f) has derivative F^{(m+1)}(f) f'
            let deriv = level * df.truncate(n - m - 1);
            let mut d = [Complex64::new(0.0, 0.0); MAX_ORDER + 1];
            d[0] = outer[m];
            d[1..=n - m].copy_from_slice(&deriv.d[..n - m]);
            level = Jet { d, order: n - m };
        }
        level
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        let order = self.order.min(rhs.order);
        let mut d = [Complex64::new(0.0, 0.0); MAX_ORDER + 1];
        for (k, v) in d.iter_mut().enumerate().take(order + 1) {
            *v = self.d[k] + rhs.d[k];
        }
        Jet { d, order }
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        self + (-rhs)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        let order = self.order.min(rhs.order);
        let mut d = [Complex64::new(0.0, 0.0); MAX_ORDER + 1];
        for k in 0..=order {
            let mut s = Complex64::new(0.0, 0.0);
            for (j, c) in BINOM[k].iter().enumerate().take(k + 1) {
                s += c * self.d[j] * rhs.d[k - j];
            }
            d[k] = s;
        }
        Jet { d, order }
    }
}

impl Add<Complex64> for Jet {
    type Output = Jet;
    fn add(mut self, rhs: Complex64) -> Jet {
        self.d[0] += rhs;
        self
    }
}

impl Mul<Complex64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: Complex64) -> Jet {
        self.scale(rhs)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(Complex64::new(rhs, 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn binomial_row() {
        assert_eq!(BINOM[4], [1.0, 4.0, 6.0, 4.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(BINOM[8][4], 70.0);
    }

    #[test]
    fn exp_of_linear_function() {
        // e^{2x} at x = 0.3
        let f = Jet::variable(0.3) * 2.0;
        let e = f.exp();
        let v = (0.6f64).exp();
        for k in 0..=MAX_ORDER {
            assert!((e.get(k).re - v * 2f64.powi(k as i32)).abs() < 1e-12 * v * 256.0);
        }
    }

    #[test]
    fn ln_inverts_exp() {
        let x = Jet::variable(0.7);
        let f = (x * x + c(1.0)) * Complex64::new(0.5, 0.25);
        let back = f.ln().exp();
        for k in 0..=MAX_ORDER {
            assert!((back.get(k) - f.get(k)).norm() < 1e-12);
        }
    }

    #[test]
    fn recip_times_self_is_one() {
        let x = Jet::variable(1.1);
        let f = (x * x * x + c(2.0)).exp() * Complex64::new(1.0, -0.3);
        let one = f * f.recip();
        assert!((one.value() - c(1.0)).norm() < 1e-12);
        for k in 1..=MAX_ORDER {
            assert!(one.get(k).norm() < 1e-9 * f.get(k).norm().max(1.0));
        }
    }

    #[test]
    fn compose_matches_sine_chain() {
        // sin(x^2) at x = 0.4, outer derivatives of sin at 0.16
        let x = Jet::variable(0.4);
        let inner = x * x;
        let s = 0.16f64;
        let outer: Vec<Complex64> = (0..=MAX_ORDER)
            .map(|k| c((s + k as f64 * std::f64::consts::FRAC_PI_2).sin()))
            .collect();
        let h = inner.compose(&outer);
        // closed-form first two derivatives
        assert!((h.get(0).re - s.sin()).abs() < 1e-15);
        assert!((h.get(1).re - 0.8 * s.cos()).abs() < 1e-14);
        let second = 2.0 * s.cos() - 0.64 * s.sin();
        assert!((h.get(2).re - second).abs() < 1e-14);
    }
}
