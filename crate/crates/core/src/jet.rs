//! Truncated Taylor arithmetic in the fiber variable.
//!
//! [`Jet4`] carries a value together with exact partial derivatives up to
//! order four with respect to the n fiber components. Arithmetic on jets
//! (sum, product, quotient, square root, univariate composition) propagates
//! derivatives by the product rule and Faà di Bruno's formula, so every
//! derivative read off a jet is exact up to rounding — no step sizes, no
//! truncation error. Order four is enough for the Douglas tensor, which
//! needs third derivatives of a spray divergence.
//!
//! [`Jet3`] is the order-three view used on public surfaces where fourth
//! derivatives are irrelevant. [`Series`] is the univariate counterpart used
//! to differentiate the φ-derived coefficient functions in the ratio
//! s = β/α.
//!
//! Derivative arrays are stored dense and are symmetric by construction:
//! every write fills all index permutations from one symmetrized value.

use crate::error::{Error, Result};
use crate::tol;

/// Value plus exact y-derivatives up to order 3 (reporting type).
#[derive(Debug, Clone, PartialEq)]
pub struct Jet3 {
    pub value: f64,
    /// length n
    pub d1: Vec<f64>,
    /// n×n, row-major, symmetric
    pub d2: Vec<f64>,
    /// n×n×n, symmetric in all index pairs
    pub d3: Vec<f64>,
}

impl Jet3 {
    pub fn dim(&self) -> usize {
        self.d1.len()
    }

    /// Exact symmetry of the stored derivative arrays (bitwise, the
    /// construction never writes asymmetric entries).
    pub fn is_symmetric(&self) -> bool {
        let n = self.dim();
        for i in 0..n {
            for j in 0..n {
                if self.d2[i * n + j] != self.d2[j * n + i] {
                    return false;
                }
                for k in 0..n {
                    let v = self.d3[(i * n + j) * n + k];
                    let perms = [
                        (i, k, j),
                        (j, i, k),
                        (j, k, i),
                        (k, i, j),
                        (k, j, i),
                    ];
                    if perms
                        .iter()
                        .any(|&(a, b, c)| self.d3[(a * n + b) * n + c] != v)
                    {
                        return false;
                    }
                }
            }
        }
        true
    }
}

impl From<&Jet4> for Jet3 {
    fn from(j: &Jet4) -> Self {
        Jet3 {
            value: j.v,
            d1: j.d1.clone(),
            d2: j.d2.clone(),
            d3: j.d3.clone(),
        }
    }
}

/// Value plus exact y-derivatives up to order 4.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet4 {
    n: usize,
    pub v: f64,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
    pub d3: Vec<f64>,
    pub d4: Vec<f64>,
}

impl Jet4 {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn constant(n: usize, v: f64) -> Self {
        Jet4 {
            n,
            v,
            d1: vec![0.0; n],
            d2: vec![0.0; n * n],
            d3: vec![0.0; n * n * n],
            d4: vec![0.0; n * n * n * n],
        }
    }

    /// The l-th fiber coordinate as a jet at the point y.
    pub fn coordinate(y: &[f64], l: usize) -> Self {
        let n = y.len();
        let mut j = Self::constant(n, y[l]);
        j.d1[l] = 1.0;
        j
    }

    /// Linear form c·y.
    pub fn linear(c: &[f64], y: &[f64]) -> Self {
        let n = y.len();
        let mut j = Self::constant(n, c.iter().zip(y).map(|(a, b)| a * b).sum());
        j.d1.copy_from_slice(c);
        j
    }

    /// Quadratic form yᵀAy for symmetric A (row-major n×n).
    pub fn quadratic_form(a: &[f64], y: &[f64]) -> Self {
        let n = y.len();
        let mut j = Self::constant(n, 0.0);
        let mut val = 0.0;
        for i in 0..n {
            let mut ai_y = 0.0;
            for k in 0..n {
                ai_y += a[i * n + k] * y[k];
            }
            val += y[i] * ai_y;
            j.d1[i] = 2.0 * ai_y;
            for k in 0..n {
                j.d2[i * n + k] = a[i * n + k] + a[k * n + i];
            }
        }
        j.v = val;
        j
    }

    pub fn add(&self, o: &Jet4) -> Jet4 {
        self.zip(o, |a, b| a + b)
    }

    pub fn sub(&self, o: &Jet4) -> Jet4 {
        self.zip(o, |a, b| a - b)
    }

    pub fn scale(&self, c: f64) -> Jet4 {
        let mut r = self.clone();
        r.v *= c;
        for x in r
            .d1
            .iter_mut()
            .chain(r.d2.iter_mut())
            .chain(r.d3.iter_mut())
            .chain(r.d4.iter_mut())
        {
            *x *= c;
        }
        r
    }

    pub fn neg(&self) -> Jet4 {
        self.scale(-1.0)
    }

    fn zip(&self, o: &Jet4, f: impl Fn(f64, f64) -> f64) -> Jet4 {
        debug_assert_eq!(self.n, o.n);
        Jet4 {
            n: self.n,
            v: f(self.v, o.v),
            d1: self.d1.iter().zip(&o.d1).map(|(a, b)| f(*a, *b)).collect(),
            d2: self.d2.iter().zip(&o.d2).map(|(a, b)| f(*a, *b)).collect(),
            d3: self.d3.iter().zip(&o.d3).map(|(a, b)| f(*a, *b)).collect(),
            d4: self.d4.iter().zip(&o.d4).map(|(a, b)| f(*a, *b)).collect(),
        }
    }

    #[inline]
    fn i2(&self, i: usize, j: usize) -> f64 {
        self.d2[i * self.n + j]
    }
    #[inline]
    fn i3(&self, i: usize, j: usize, k: usize) -> f64 {
        self.d3[(i * self.n + j) * self.n + k]
    }
    #[inline]
    fn i4(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.d4[((i * self.n + j) * self.n + k) * self.n + l]
    }

    // Each symmetric entry is computed once for i ≤ j ≤ … and mirrored to
    // every index permutation, so symmetry is bitwise exact.
    fn set2(&mut self, i: usize, j: usize, v: f64) {
        let n = self.n;
        self.d2[i * n + j] = v;
        self.d2[j * n + i] = v;
    }

    fn set3(&mut self, i: usize, j: usize, k: usize, v: f64) {
        let n = self.n;
        for (a, b, c) in [
            (i, j, k),
            (i, k, j),
            (j, i, k),
            (j, k, i),
            (k, i, j),
            (k, j, i),
        ] {
            self.d3[(a * n + b) * n + c] = v;
        }
    }

    fn set4(&mut self, idx: [usize; 4], v: f64) {
        let n = self.n;
        let [i, j, k, l] = idx;
        for (a, b, c, d) in [
            (i, j, k, l),
            (i, j, l, k),
            (i, k, j, l),
            (i, k, l, j),
            (i, l, j, k),
            (i, l, k, j),
            (j, i, k, l),
            (j, i, l, k),
            (j, k, i, l),
            (j, k, l, i),
            (j, l, i, k),
            (j, l, k, i),
            (k, i, j, l),
            (k, i, l, j),
            (k, j, i, l),
            (k, j, l, i),
            (k, l, i, j),
            (k, l, j, i),
            (l, i, j, k),
            (l, i, k, j),
            (l, j, i, k),
            (l, j, k, i),
            (l, k, i, j),
            (l, k, j, i),
        ] {
            self.d4[((a * n + b) * n + c) * n + d] = v;
        }
    }

    /// Leibniz product to order 4.
    pub fn mul(&self, o: &Jet4) -> Jet4 {
        debug_assert_eq!(self.n, o.n);
        let n = self.n;
        let (a, b) = (self, o);
        let mut r = Jet4::constant(n, a.v * b.v);
        for i in 0..n {
            r.d1[i] = a.d1[i] * b.v + a.v * b.d1[i];
        }
        for i in 0..n {
            for j in i..n {
                let t = a.i2(i, j) * b.v
                    + a.d1[i] * b.d1[j]
                    + a.d1[j] * b.d1[i]
                    + a.v * b.i2(i, j);
                r.set2(i, j, t);
            }
        }
        for i in 0..n {
            for j in i..n {
                for k in j..n {
                    let t = a.i3(i, j, k) * b.v
                        + a.i2(i, j) * b.d1[k]
                        + a.i2(i, k) * b.d1[j]
                        + a.i2(j, k) * b.d1[i]
                        + a.d1[i] * b.i2(j, k)
                        + a.d1[j] * b.i2(i, k)
                        + a.d1[k] * b.i2(i, j)
                        + a.v * b.i3(i, j, k);
                    r.set3(i, j, k, t);
                }
            }
        }
        for i in 0..n {
            for j in i..n {
                for k in j..n {
                    for l in k..n {
                        let t = a.i4(i, j, k, l) * b.v
                            + a.i3(i, j, k) * b.d1[l]
                            + a.i3(i, j, l) * b.d1[k]
                            + a.i3(i, k, l) * b.d1[j]
                            + a.i3(j, k, l) * b.d1[i]
                            + a.i2(i, j) * b.i2(k, l)
                            + a.i2(i, k) * b.i2(j, l)
                            + a.i2(i, l) * b.i2(j, k)
                            + a.i2(k, l) * b.i2(i, j)
                            + a.i2(j, l) * b.i2(i, k)
                            + a.i2(j, k) * b.i2(i, l)
                            + a.d1[i] * b.i3(j, k, l)
                            + a.d1[j] * b.i3(i, k, l)
                            + a.d1[k] * b.i3(i, j, l)
                            + a.d1[l] * b.i3(i, j, k)
                            + a.v * b.i4(i, j, k, l);
                        r.set4([i, j, k, l], t);
                    }
                }
            }
        }
        r
    }

    /// Composition with a univariate function given its derivatives
    /// `f[m] = f⁽ᵐ⁾(self.v)`, m = 0..=4 (Faà di Bruno).
    pub fn compose(&self, f: &[f64; 5]) -> Jet4 {
        let n = self.n;
        let u = self;
        let mut r = Jet4::constant(n, f[0]);
        for i in 0..n {
            r.d1[i] = f[1] * u.d1[i];
        }
        for i in 0..n {
            for j in i..n {
                r.set2(i, j, f[2] * u.d1[i] * u.d1[j] + f[1] * u.i2(i, j));
            }
        }
        for i in 0..n {
            for j in i..n {
                for k in j..n {
                    let t = f[3] * u.d1[i] * u.d1[j] * u.d1[k]
                        + f[2]
                            * (u.d1[i] * u.i2(j, k)
                                + u.d1[j] * u.i2(i, k)
                                + u.d1[k] * u.i2(i, j))
                        + f[1] * u.i3(i, j, k);
                    r.set3(i, j, k, t);
                }
            }
        }
        for i in 0..n {
            for j in i..n {
                for k in j..n {
                    for l in k..n {
                        let t = f[4] * u.d1[i] * u.d1[j] * u.d1[k] * u.d1[l]
                            + f[3]
                                * (u.i2(i, j) * u.d1[k] * u.d1[l]
                                    + u.i2(i, k) * u.d1[j] * u.d1[l]
                                    + u.i2(i, l) * u.d1[j] * u.d1[k]
                                    + u.i2(j, k) * u.d1[i] * u.d1[l]
                                    + u.i2(j, l) * u.d1[i] * u.d1[k]
                                    + u.i2(k, l) * u.d1[i] * u.d1[j])
                            + f[2]
                                * (u.i2(i, j) * u.i2(k, l)
                                    + u.i2(i, k) * u.i2(j, l)
                                    + u.i2(i, l) * u.i2(j, k)
                                    + u.i3(j, k, l) * u.d1[i]
                                    + u.i3(i, k, l) * u.d1[j]
                                    + u.i3(i, j, l) * u.d1[k]
                                    + u.i3(i, j, k) * u.d1[l])
                            + f[1] * u.i4(i, j, k, l);
                        r.set4([i, j, k, l], t);
                    }
                }
            }
        }
        r
    }

    /// Reciprocal, guarding against a vanishing value relative to `scale`.
    pub fn recip(&self, scale: f64) -> Result<Jet4> {
        let v = self.v;
        if v.abs() <= tol::SINGULAR_GUARD * scale.abs().max(1.0) {
            return Err(Error::SingularEvaluation(format!(
                "reciprocal of {v:.3e} (scale {scale:.3e})"
            )));
        }
        let iv = 1.0 / v;
        Ok(self.compose(&[
            iv,
            -iv * iv,
            2.0 * iv * iv * iv,
            -6.0 * iv * iv * iv * iv,
            24.0 * iv * iv * iv * iv * iv,
        ]))
    }

    pub fn div(&self, o: &Jet4, scale: f64) -> Result<Jet4> {
        Ok(self.mul(&o.recip(scale)?))
    }

    pub fn sqrt(&self) -> Result<Jet4> {
        let v = self.v;
        if v <= 0.0 {
            return Err(Error::SingularEvaluation(format!(
                "square root of non-positive value {v:.3e}"
            )));
        }
        let r = v.sqrt();
        Ok(self.compose(&[
            r,
            0.5 / r,
            -0.25 / (r * v),
            0.375 / (r * v * v),
            -0.9375 / (r * v * v * v),
        ]))
    }
}

/// Univariate truncated Taylor series: coefficients `c[m] = f⁽ᵐ⁾(s₀)/m!`.
///
/// Long enough (order 7) that the coefficient functions built from φ keep
/// four exact derivatives after one series division.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Series(pub [f64; 8]);

pub const SERIES_LEN: usize = 8;

impl Series {
    pub fn constant(c: f64) -> Self {
        let mut a = [0.0; SERIES_LEN];
        a[0] = c;
        Series(a)
    }

    /// The identity function s ↦ s expanded at s₀.
    pub fn variable(s0: f64) -> Self {
        let mut a = [0.0; SERIES_LEN];
        a[0] = s0;
        a[1] = 1.0;
        Series(a)
    }

    /// Construct from derivative values `f⁽ᵐ⁾(s₀)`.
    pub fn from_derivatives(d: &[f64]) -> Self {
        let mut a = [0.0; SERIES_LEN];
        let mut fact = 1.0;
        for (m, item) in d.iter().enumerate().take(SERIES_LEN) {
            if m > 0 {
                fact *= m as f64;
            }
            a[m] = item / fact;
        }
        Series(a)
    }

    /// `f⁽ᵐ⁾(s₀)` read back from the coefficients.
    pub fn derivative(&self, m: usize) -> f64 {
        let mut fact = 1.0;
        for i in 2..=m {
            fact *= i as f64;
        }
        self.0[m] * fact
    }

    /// First `k+1` derivative values, for feeding [`Jet4::compose`].
    pub fn derivatives<const K: usize>(&self) -> [f64; K] {
        let mut out = [0.0; K];
        for (m, o) in out.iter_mut().enumerate() {
            *o = self.derivative(m);
        }
        out
    }

    pub fn add(&self, o: &Series) -> Series {
        let mut a = self.0;
        for (x, y) in a.iter_mut().zip(o.0.iter()) {
            *x += y;
        }
        Series(a)
    }

    pub fn sub(&self, o: &Series) -> Series {
        let mut a = self.0;
        for (x, y) in a.iter_mut().zip(o.0.iter()) {
            *x -= y;
        }
        Series(a)
    }

    pub fn scale(&self, c: f64) -> Series {
        let mut a = self.0;
        for x in a.iter_mut() {
            *x *= c;
        }
        Series(a)
    }

    pub fn mul(&self, o: &Series) -> Series {
        let mut a = [0.0; SERIES_LEN];
        for i in 0..SERIES_LEN {
            for j in 0..SERIES_LEN - i {
                a[i + j] += self.0[i] * o.0[j];
            }
        }
        Series(a)
    }

    /// Truncated power-series division, guarding the leading coefficient.
    pub fn div(&self, o: &Series, scale: f64) -> Result<Series> {
        if o.0[0].abs() <= tol::SINGULAR_GUARD * scale.abs().max(1.0) {
            return Err(Error::SingularEvaluation(format!(
                "series division by {:.3e} (scale {scale:.3e})",
                o.0[0]
            )));
        }
        let mut q = [0.0; SERIES_LEN];
        for m in 0..SERIES_LEN {
            let mut acc = self.0[m];
            for j in 1..=m {
                acc -= o.0[j] * q[m - j];
            }
            q[m] = acc / o.0[0];
        }
        Ok(Series(q))
    }

    /// Derivative of the series as a function (shifts coefficients).
    pub fn differentiate(&self) -> Series {
        let mut a = [0.0; SERIES_LEN];
        for m in 1..SERIES_LEN {
            a[m - 1] = self.0[m] * m as f64;
        }
        Series(a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn quadratic_form_jet_matches_hand_values() {
        // yᵀy in 2D: d2 = 2I, d3 = d4 = 0.
        let y = [0.3, -1.2];
        let a = [1.0, 0.0, 0.0, 1.0];
        let j = Jet4::quadratic_form(&a, &y);
        assert!(close(j.v, 0.09 + 1.44, 1e-15));
        assert_eq!(j.d2, vec![2.0, 0.0, 0.0, 2.0]);
        assert!(j.d3.iter().all(|&x| x == 0.0));
        assert!(j.d4.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn product_and_compose_reproduce_polynomial_derivatives() {
        // f(y) = (y0 + 2 y1)^2 * y0: check an assortment of derivatives.
        let y = [0.7, -0.4];
        let lin = Jet4::linear(&[1.0, 2.0], &y);
        let y0 = Jet4::coordinate(&y, 0);
        let f = lin.mul(&lin).mul(&y0);
        let (a, b) = (y[0], y[1]);
        let l = a + 2.0 * b;
        assert!(close(f.v, l * l * a, 1e-14));
        // ∂f/∂y0 = 2l·a + l², ∂f/∂y1 = 4l·a
        assert!(close(f.d1[0], 2.0 * l * a + l * l, 1e-14));
        assert!(close(f.d1[1], 4.0 * l * a, 1e-14));
        // ∂²f/∂y0² = 2a + 4l, ∂²f/∂y0∂y1 = 4a + 4l, ∂²f/∂y1² = 8a
        assert!(close(f.i2(0, 0), 2.0 * a + 4.0 * l, 1e-14));
        assert!(close(f.i2(0, 1), 4.0 * a + 4.0 * l, 1e-14));
        assert!(close(f.i2(1, 1), 8.0 * a, 1e-14));
        // ∂³f/∂y0³ = 6, ∂³f/∂y0²∂y1 = 8, ∂³f/∂y0∂y1² = 8, ∂³f/∂y1³ = 0
        assert!(close(f.i3(0, 0, 0), 6.0, 1e-14));
        assert!(close(f.i3(0, 0, 1), 8.0, 1e-14));
        assert!(close(f.i3(0, 1, 1), 8.0, 1e-14));
        assert!(close(f.i3(1, 1, 1), 0.0, 1e-14));
        // cubic ⇒ d4 = 0
        assert!(f.d4.iter().all(|&x| x.abs() < 1e-13));
    }

    #[test]
    fn reciprocal_jet_matches_finite_differences() {
        let y = [1.1, 0.6, -0.3];
        let c = [0.5, -0.2, 0.8];
        let f = |yy: &[f64]| 1.0 / (2.0 + c.iter().zip(yy).map(|(a, b)| a * b).sum::<f64>());
        let lin = Jet4::linear(&c, &y).add(&Jet4::constant(3, 2.0));
        let j = lin.recip(1.0).unwrap();
        assert!(close(j.v, f(&y), 1e-14));
        let h = 1e-5;
        for i in 0..3 {
            let mut yp = y;
            yp[i] += h;
            let mut ym = y;
            ym[i] -= h;
            let fd = (f(&yp) - f(&ym)) / (2.0 * h);
            assert!(close(j.d1[i], fd, 1e-9));
        }
        // second derivative along (0,0)
        let mut yp = y;
        yp[0] += h;
        let mut ym = y;
        ym[0] -= h;
        let fd2 = (f(&yp) - 2.0 * f(&y) + f(&ym)) / (h * h);
        assert!(close(j.i2(0, 0), fd2, 1e-5));
    }

    #[test]
    fn sqrt_jet_fourth_derivative_is_exact() {
        // g(t) = sqrt(1 + t) along y0: compare against the closed form.
        let y = [0.25, 0.0];
        let u = Jet4::coordinate(&y, 0).add(&Jet4::constant(2, 1.0));
        let j = u.sqrt().unwrap();
        let t = 1.25f64;
        assert!(close(j.v, t.sqrt(), 1e-15));
        assert!(close(j.d1[0], 0.5 / t.sqrt(), 1e-15));
        assert!(close(j.i2(0, 0), -0.25 * t.powf(-1.5), 1e-15));
        assert!(close(j.i3(0, 0, 0), 0.375 * t.powf(-2.5), 1e-15));
        assert!(close(j.d4[0], -0.9375 * t.powf(-3.5), 1e-15));
    }

    #[test]
    fn jet3_symmetry_is_exact() {
        let y = [0.9, -0.2, 0.4];
        let a = [2.0, 0.3, 0.1, 0.3, 1.5, -0.2, 0.1, -0.2, 1.0];
        let q = Jet4::quadratic_form(&a, &y);
        let l = Jet4::linear(&[0.2, -0.7, 0.1], &y);
        let f = q.mul(&l).div(&q.add(&Jet4::constant(3, 1.0)), 1.0).unwrap();
        let j3 = Jet3::from(&f);
        assert!(j3.is_symmetric());
    }

    #[test]
    fn series_division_matches_rational_derivatives() {
        // Q(s) = (1 + 2s)/(1 - s²) at s0 = 0.3; compare with hand derivative.
        let s0 = 0.3;
        let s = Series::variable(s0);
        let num = Series::constant(1.0).add(&s.scale(2.0));
        let den = Series::constant(1.0).sub(&s.mul(&s));
        let q = num.div(&den, 1.0).unwrap();
        let v = (1.0 + 2.0 * s0) / (1.0 - s0 * s0);
        assert!(close(q.derivative(0), v, 1e-14));
        // Q'(s) = [2(1-s²) + 2s(1+2s)]/(1-s²)²
        let qp = (2.0 * (1.0 - s0 * s0) + 2.0 * s0 * (1.0 + 2.0 * s0))
            / (1.0 - s0 * s0).powi(2);
        assert!(close(q.derivative(1), qp, 1e-13));
    }

    #[test]
    fn series_differentiate_shifts_coefficients() {
        let s = Series::variable(2.0);
        let f = s.mul(&s).mul(&s); // s³ at s0=2
        let fp = f.differentiate(); // 3s² = 12 at 2
        assert!(close(fp.derivative(0), 12.0, 1e-14));
        assert!(close(fp.derivative(1), 12.0, 1e-14)); // 6s
    }
}
