//! Truncated multivariate Taylor expansions.
//!
//! A [`Jet`] stores all mixed partial derivatives `∂^μ f` with `|μ| ≤ order` of a
//! scalar function at a fixed base point. Coefficients are plain partial
//! derivatives, not divided by `μ!`. Arithmetic on jets is exact up to
//! floating-point roundoff: there is no truncation error below the stored order.
//!
//! Differentiating a jet drops one order (`∂_i` of an order-`K` jet is an
//! order-`K-1` jet), which is how every derived geometric quantity is carried
//! through the engine without numeric differencing.

mod linalg;
mod space;

pub use linalg::{inverse_and_determinant, JetMatrix};
pub use space::JetSpace;

use std::f64::consts::FRAC_PI_2;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::sync::Arc;

use crate::error::{Error, Result};

/// Highest order accepted by [`eval_jet`](crate::expr::eval_jet) and the geometry.
pub const MAX_ORDER: usize = 8;

#[derive(Clone, Debug)]
pub struct Jet {
    space: Arc<JetSpace>,
    order: usize,
    c: Vec<f64>,
}

/// `out += a * b` over the product table truncated at `order`.
fn mul_accumulate(space: &JetSpace, order: usize, out: &mut [f64], a: &[f64], b: &[f64]) {
    let n = space.len(order);
    assert!(out.len() >= n && a.len() >= n && b.len() >= n);
    for t in &space.mul[..space.mul_end[order]] {
        debug_assert!((t.a as usize) < n && (t.b as usize) < n && (t.out as usize) < n);
        // SAFETY: every table entry up to `mul_end[order]` has degree at most
        // `order`, so its indices are below `len(order)`, which all three
        // slices were checked to cover.
        unsafe {
            *out.get_unchecked_mut(t.out as usize) +=
                t.weight * a.get_unchecked(t.a as usize) * b.get_unchecked(t.b as usize);
        }
    }
}

impl Jet {
    pub fn constant(space: &Arc<JetSpace>, value: f64) -> Jet {
        let order = space.order();
        let mut c = vec![0.0; space.len(order)];
        c[0] = value;
        Jet {
            space: space.clone(),
            order,
            c,
        }
    }

    pub fn zero(space: &Arc<JetSpace>) -> Jet {
        Jet::constant(space, 0.0)
    }

    /// The coordinate function `var` with base value `value`.
    pub fn variable(space: &Arc<JetSpace>, var: usize, value: f64) -> Jet {
        assert!(var < space.nvars(), "variable index {var} out of range");
        let mut j = Jet::constant(space, value);
        if space.order() > 0 {
            j.c[1 + var] = 1.0;
        }
        j
    }

    /// Build from raw coefficients in graded-lex order.
    pub fn from_coefficients(space: &Arc<JetSpace>, order: usize, c: Vec<f64>) -> Jet {
        assert!(order <= space.order());
        assert_eq!(c.len(), space.len(order));
        Jet {
            space: space.clone(),
            order,
            c,
        }
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        &self.space
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// The value at the base point.
    pub fn value(&self) -> f64 {
        self.c[0]
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.c
    }

    /// `∂^μ f` at the base point, or `None` when `|μ|` exceeds the order.
    pub fn coeff(&self, mi: &[u8]) -> Option<f64> {
        let k = self.space.index_of(mi)?;
        (k < self.c.len()).then(|| self.c[k])
    }

    pub fn truncate(&self, order: usize) -> Jet {
        let order = order.min(self.order);
        Jet {
            space: self.space.clone(),
            order,
            c: self.c[..self.space.len(order)].to_vec(),
        }
    }

    /// Partial derivative with respect to variable `var`; the result has one order less.
    ///
    /// Panics on an order-0 jet: that means a caller requested too low an order.
    pub fn derivative(&self, var: usize) -> Jet {
        assert!(
            self.order > 0,
            "jet order exhausted: cannot differentiate an order-0 jet"
        );
        let order = self.order - 1;
        let sp = &self.space;
        let c = (0..sp.len(order))
            .map(|k| self.c[sp.shifted(var, k)])
            .collect();
        Jet {
            space: self.space.clone(),
            order,
            c,
        }
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet {
            space: self.space.clone(),
            order: self.order,
            c: self.c.iter().map(|v| v * s).collect(),
        }
    }

    pub fn add_scalar(&self, s: f64) -> Jet {
        let mut r = self.clone();
        r.c[0] += s;
        r
    }

    fn check_space(&self, other: &Jet) {
        debug_assert!(
            Arc::ptr_eq(&self.space, &other.space),
            "jets from different spaces"
        );
    }

    /// `self += a * b`, truncated to the common order.
    pub fn add_product(&mut self, a: &Jet, b: &Jet) {
        self.check_space(a);
        self.check_space(b);
        let order = self.order.min(a.order).min(b.order);
        self.c.truncate(self.space.len(order));
        self.order = order;
        mul_accumulate(&self.space, order, &mut self.c, &a.c, &b.c);
    }

    fn product(&self, other: &Jet) -> Jet {
        self.check_space(other);
        let order = self.order.min(other.order);
        let mut c = vec![0.0; self.space.len(order)];
        mul_accumulate(&self.space, order, &mut c, &self.c, &other.c);
        Jet {
            space: self.space.clone(),
            order,
            c,
        }
    }

    fn combine(&self, other: &Jet, sign: f64) -> Jet {
        self.check_space(other);
        let order = self.order.min(other.order);
        let n = self.space.len(order);
        let c = self.c[..n]
            .iter()
            .zip(&other.c[..n])
            .map(|(a, b)| a + sign * b)
            .collect();
        Jet {
            space: self.space.clone(),
            order,
            c,
        }
    }

    /// Apply a scalar function given its Taylor coefficients `f^(k)(u0)/k!`
    /// at the base value, `k = 0..=order`.
    fn compose_series(&self, taylor: &[f64]) -> Jet {
        let d = self.order;
        debug_assert!(taylor.len() > d);
        let mut h = self.clone();
        h.c[0] = 0.0;
        let mut r = Jet::constant(&self.space, taylor[d]).truncate(d);
        for k in (0..d).rev() {
            r = r.product(&h);
            r.c[0] += taylor[k];
        }
        r
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        let mut t = Vec::with_capacity(self.order + 1);
        let mut fact = 1.0;
        for k in 0..=self.order {
            if k > 0 {
                fact *= k as f64;
            }
            t.push(e / fact);
        }
        self.compose_series(&t)
    }

    pub fn ln(&self) -> Result<Jet> {
        let u0 = self.value();
        if !(u0 > 0.0) {
            return Err(Error::Domain(format!("log of non-positive value {u0}")));
        }
        let mut t = vec![u0.ln()];
        let mut p = 1.0;
        for k in 1..=self.order {
            p *= u0;
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            t.push(sign / (k as f64 * p));
        }
        Ok(self.compose_series(&t))
    }

    /// `self^p` for real `p`; requires a positive base value.
    pub fn powf(&self, p: f64) -> Result<Jet> {
        let u0 = self.value();
        if !(u0 > 0.0) {
            return Err(Error::Domain(format!(
                "real power {p} of non-positive value {u0}"
            )));
        }
        let mut t = Vec::with_capacity(self.order + 1);
        let mut binom = 1.0;
        for k in 0..=self.order {
            if k > 0 {
                binom *= (p - (k - 1) as f64) / k as f64;
            }
            t.push(binom * u0.powf(p - k as f64));
        }
        Ok(self.compose_series(&t))
    }

    pub fn sqrt(&self) -> Result<Jet> {
        let u0 = self.value();
        if !(u0 > 0.0) {
            return Err(Error::Domain(format!("sqrt of non-positive value {u0}")));
        }
        self.powf(0.5)
    }

    pub fn recip(&self) -> Result<Jet> {
        let u0 = self.value();
        if u0 == 0.0 || !u0.is_finite() {
            return Err(Error::Domain("division by zero".into()));
        }
        let inv = 1.0 / u0;
        let mut t = Vec::with_capacity(self.order + 1);
        let mut p = inv;
        for _ in 0..=self.order {
            t.push(p);
            p *= -inv;
        }
        Ok(self.compose_series(&t))
    }

    pub fn div(&self, other: &Jet) -> Result<Jet> {
        Ok(self * &other.recip()?)
    }

    /// Integer power by repeated squaring; negative bases are fine.
    pub fn powi(&self, n: i32) -> Result<Jet> {
        if n < 0 {
            return self.recip()?.powi(-n);
        }
        let mut result = Jet::constant(&self.space, 1.0).truncate(self.order);
        let mut base = self.clone();
        let mut e = n as u32;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        Ok(result)
    }

    pub fn sin(&self) -> Jet {
        let t = trig_series(self.value(), self.order, 0.0);
        self.compose_series(&t)
    }

    pub fn cos(&self) -> Jet {
        let t = trig_series(self.value(), self.order, FRAC_PI_2);
        self.compose_series(&t)
    }

    pub fn tan(&self) -> Result<Jet> {
        let u0 = self.value();
        let s = trig_series(u0, self.order, 0.0);
        let c = trig_series(u0, self.order, FRAC_PI_2);
        if c[0].abs() < 1e-300 {
            return Err(Error::Domain(format!("tan at a pole ({u0})")));
        }
        Ok(self.compose_series(&series_div(&s, &c)))
    }

    pub fn atan(&self) -> Jet {
        let u0 = self.value();
        let d = self.order;
        // 1 / (1 + (u0 + t)^2), then integrate termwise
        let q = [1.0 + u0 * u0, 2.0 * u0, 1.0];
        let mut r = vec![0.0; d.max(1)];
        for k in 0..r.len() {
            let mut acc = if k == 0 { 1.0 } else { 0.0 };
            if k >= 1 {
                acc -= q[1] * r[k - 1];
            }
            if k >= 2 {
                acc -= q[2] * r[k - 2];
            }
            r[k] = acc / q[0];
        }
        let mut t = vec![u0.atan()];
        for k in 1..=d {
            t.push(r[k - 1] / k as f64);
        }
        self.compose_series(&t)
    }

    /// `Some(None)` for a constant, `Some(Some(v))` for the plain coordinate
    /// `z_v + value`, `None` otherwise.
    pub fn as_coordinate(&self) -> Option<Option<usize>> {
        let n = self.space.nvars();
        let first = &self.c[1..self.c.len().min(n + 1)];
        if self.c.iter().skip(n + 1).any(|&v| v != 0.0) {
            return None;
        }
        let mut var = None;
        for (i, &v) in first.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            if v != 1.0 || var.is_some() {
                return None;
            }
            var = Some(i);
        }
        Some(var)
    }

    /// Re-express this jet in another space under a variable map.
    ///
    /// Source variable `i` becomes target variable `map[i]`; a `None` entry
    /// restricts to the base value of that variable (terms with a nonzero
    /// exponent there are discarded).
    pub fn reindex(&self, target: &Arc<JetSpace>, map: &[Option<usize>]) -> Jet {
        assert_eq!(map.len(), self.space.nvars());
        let order = self.order.min(target.order());
        let mut c = vec![0.0; target.len(order)];
        let mut tgt = vec![0u8; target.nvars()];
        for k in 0..self.space.len(order) {
            let mi = self.space.multi_index(k);
            tgt.iter_mut().for_each(|e| *e = 0);
            let mut keep = true;
            for (i, &e) in mi.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                match map[i] {
                    Some(t) => tgt[t] += e,
                    None => {
                        keep = false;
                        break;
                    }
                }
            }
            if keep {
                let idx = target
                    .index_of(&tgt)
                    .expect("reindexed multi-index within target order");
                c[idx] = self.c[k];
            }
        }
        Jet {
            space: target.clone(),
            order,
            c,
        }
    }

    /// Max-norm distance between coefficient tables over the common order.
    pub fn max_abs_diff(&self, other: &Jet) -> f64 {
        let n = self.space.len(self.order.min(other.order));
        self.c[..n]
            .iter()
            .zip(&other.c[..n])
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Taylor coefficients of `sin(u0 + phase + t)` in `t`.
fn trig_series(u0: f64, order: usize, phase: f64) -> Vec<f64> {
    let mut t = Vec::with_capacity(order + 1);
    let mut fact = 1.0;
    for k in 0..=order {
        if k > 0 {
            fact *= k as f64;
        }
        t.push((u0 + phase + k as f64 * FRAC_PI_2).sin() / fact);
    }
    t
}

fn series_div(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut q = vec![0.0; a.len()];
    for k in 0..a.len() {
        let mut acc = a[k];
        for j in 1..=k {
            acc -= b[j] * q[k - j];
        }
        q[k] = acc / b[0];
    }
    q
}

/// Composition of outer jets (in the variables `u`) with inner jets `w(z)`.
///
/// The monomials `(w - w0)^μ / μ!` are built once; each composed jet is then a
/// linear combination of them. Exact up to the smaller of the two orders,
/// because `w - w0` has no constant term.
pub struct Composer {
    inner_space: Arc<JetSpace>,
    monomials: Vec<Jet>,
    order: usize,
}

impl Composer {
    pub fn new(inner: &[Jet], outer_order: usize) -> Composer {
        assert!(!inner.is_empty());
        let inner_space = inner[0].space().clone();
        let order = inner
            .iter()
            .map(Jet::order)
            .min()
            .unwrap()
            .min(outer_order);
        let outer = JetSpace::get(inner.len(), order);
        let deviations: Vec<Jet> = inner
            .iter()
            .map(|w| {
                let mut h = w.truncate(order);
                h.c[0] = 0.0;
                h
            })
            .collect();
        let mut monomials: Vec<Jet> = Vec::with_capacity(outer.len(order));
        monomials.push(Jet::constant(&inner_space, 1.0).truncate(order));
        for k in 1..outer.len(order) {
            let mi = outer.multi_index(k);
            let v = mi.iter().position(|&e| e > 0).unwrap();
            let mut prev = mi.to_vec();
            prev[v] -= 1;
            let p = outer.index_of(&prev).unwrap();
            let m = (&monomials[p] * &deviations[v]).scale(1.0 / mi[v] as f64);
            monomials.push(m);
        }
        Composer {
            inner_space,
            monomials,
            order,
        }
    }

    /// `outer(w(z))` as a jet in the inner variables.
    pub fn compose(&self, outer: &Jet) -> Jet {
        let order = self.order.min(outer.order());
        let n = self.inner_space.len(order);
        let mut c = vec![0.0; n];
        let osp = outer.space();
        for k in 0..osp.len(order) {
            let w = outer.c[k];
            if w == 0.0 {
                continue;
            }
            for (ci, mi) in c.iter_mut().zip(&self.monomials[k].c[..n]) {
                *ci += w * mi;
            }
        }
        Jet {
            space: self.inner_space.clone(),
            order,
            c,
        }
    }
}

impl<'a> Add<&'a Jet> for &'a Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        self.combine(rhs, 1.0)
    }
}

impl<'a> Sub<&'a Jet> for &'a Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        self.combine(rhs, -1.0)
    }
}

impl<'a> Mul<&'a Jet> for &'a Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        self.product(rhs)
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        &self + &rhs
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        &self - &rhs
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        &self * &rhs
    }
}

impl Mul<f64> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl AddAssign<&Jet> for Jet {
    fn add_assign(&mut self, rhs: &Jet) {
        self.check_space(rhs);
        let order = self.order.min(rhs.order);
        let n = self.space.len(order);
        self.c.truncate(n);
        self.order = order;
        for (a, b) in self.c.iter_mut().zip(&rhs.c[..n]) {
            *a += b;
        }
    }
}

impl SubAssign<&Jet> for Jet {
    fn sub_assign(&mut self, rhs: &Jet) {
        self.check_space(rhs);
        let order = self.order.min(rhs.order);
        let n = self.space.len(order);
        self.c.truncate(n);
        self.order = order;
        for (a, b) in self.c.iter_mut().zip(&rhs.c[..n]) {
            *a -= b;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn square_of_variable() {
        let sp = JetSpace::get(1, 2);
        let y = Jet::variable(&sp, 0, 3.0);
        let f = &y * &y;
        assert_eq!(f.coefficients(), &[9.0, 6.0, 2.0]);
    }

    #[test]
    fn sine_at_origin() {
        let sp = JetSpace::get(1, 3);
        let x = Jet::variable(&sp, 0, 0.0);
        let s = x.sin();
        let want = [0.0, 1.0, 0.0, -1.0];
        for (a, b) in s.coefficients().iter().zip(want) {
            assert!(close(*a, b, 1e-15), "{a} vs {b}");
        }
    }

    #[test]
    fn derivative_drops_one_order() {
        let sp = JetSpace::get(2, 4);
        let x = Jet::variable(&sp, 0, 0.5);
        let y = Jet::variable(&sp, 1, -1.5);
        let f = &(&x * &x) * &y; // x^2 y
        let fx = f.derivative(0); // 2xy
        assert_eq!(fx.order(), 3);
        assert!(close(fx.value(), 2.0 * 0.5 * -1.5, 1e-15));
        assert!(close(fx.coeff(&[1, 1]).unwrap(), 2.0, 1e-15));
    }

    #[test]
    fn elementary_functions_against_closed_forms() {
        let sp = JetSpace::get(1, 6);
        let u0 = 0.7;
        let u = Jet::variable(&sp, 0, u0);
        // d^k/du^k of exp, log, sqrt, 1/u, atan, tan at u0
        let exp = u.exp();
        let log = u.ln().unwrap();
        let sqrt = u.sqrt().unwrap();
        let rec = u.recip().unwrap();
        let at = u.atan();
        let tn = u.tan().unwrap();
        let mut fact = 1.0;
        for k in 0..=6usize {
            if k > 0 {
                fact *= k as f64;
            }
            assert!(close(exp.coefficients()[k], u0.exp(), 1e-14));
            if k > 0 {
                let s = if k % 2 == 1 { 1.0 } else { -1.0 };
                let want = s * (fact / k as f64) / u0.powi(k as i32);
                assert!(close(log.coefficients()[k], want, 1e-13));
            }
            let want_rec = if k % 2 == 0 { 1.0 } else { -1.0 } * fact / u0.powi(k as i32 + 1);
            assert!(close(rec.coefficients()[k], want_rec, 1e-13));
        }
        let s = u0.sqrt();
        assert!(close(sqrt.coefficients()[2], -0.25 / (u0 * s), 1e-14));
        assert!(close(at.coefficients()[1], 1.0 / (1.0 + u0 * u0), 1e-14));
        assert!(close(
            at.coefficients()[2],
            -2.0 * u0 / (1.0 + u0 * u0).powi(2),
            1e-14
        ));
        let t = u0.tan();
        assert!(close(tn.coefficients()[1], 1.0 + t * t, 1e-14));
        assert!(close(tn.coefficients()[2], 2.0 * t * (1.0 + t * t), 1e-13));
    }

    #[test]
    fn domain_errors() {
        let sp = JetSpace::get(1, 2);
        let z = Jet::variable(&sp, 0, 0.0);
        assert!(matches!(z.ln(), Err(Error::Domain(_))));
        assert!(matches!(z.sqrt(), Err(Error::Domain(_))));
        assert!(matches!(z.recip(), Err(Error::Domain(_))));
        assert!(z.scale(-1.0).add_scalar(-1.0).powf(0.3).is_err());
        assert!(z.add_scalar(-2.0).powi(3).is_ok());
    }

    #[test]
    fn composition_matches_direct_evaluation() {
        // outer f(u1,u2) = u1^2 u2 + sin(u2), inner u = (x y, x + y)
        let inner_sp = JetSpace::get(2, 5);
        let x = Jet::variable(&inner_sp, 0, 0.3);
        let y = Jet::variable(&inner_sp, 1, 0.8);
        let w1 = &x * &y;
        let w2 = &x + &y;
        let direct = &(&(&w1 * &w1) * &w2) + &w2.sin();

        let outer_sp = JetSpace::get(2, 5);
        let u1 = Jet::variable(&outer_sp, 0, w1.value());
        let u2 = Jet::variable(&outer_sp, 1, w2.value());
        let f = &(&(&u1 * &u1) * &u2) + &u2.sin();
        let comp = Composer::new(&[w1, w2], 5).compose(&f);
        assert!(comp.max_abs_diff(&direct) < 1e-13);
    }

    #[test]
    fn reindex_embeds_and_restricts() {
        let small = JetSpace::get(2, 3); // (x, e)
        let big = JetSpace::get(3, 3); // (x, y1, y2)
        let x = Jet::variable(&small, 0, 0.4);
        let e = Jet::variable(&small, 1, 0.0);
        let f = &(&x * &x) + &(&e * &x); // x^2 + e x
        let g = f.reindex(&big, &[Some(0), None]);
        // restricted to e = 0: x^2
        assert!(close(g.value(), 0.16, 1e-15));
        assert!(close(g.coeff(&[1, 0, 0]).unwrap(), 0.8, 1e-15));
        assert!(close(g.coeff(&[2, 0, 0]).unwrap(), 2.0, 1e-15));
        assert_eq!(g.coeff(&[0, 1, 0]), Some(0.0));
    }
}
