//! Truncated multivariate derivative towers over the four coordinates
//! (x1, x2, y1, y2) of the slit tangent bundle.
//!
//! A [`Jet`] stores all Taylor coefficients (mixed partials divided by the
//! multi-index factorial) of a scalar at a point, up to a fixed total degree.
//! Every partial derivative in the toolkit is taken through this type.

use std::ops::{Add, Mul, Neg, Sub};
use std::sync::OnceLock;
use thiserror::Error;

/// Number of base coordinates: x1, x2, y1, y2.
pub const NVARS: usize = 4;

/// Maximum supported truncation order. The deepest expression in the
/// pipeline (V²(ρ) and S(𝓕)) takes six derivatives of F².
pub const MAX_ORDER: usize = 6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum JetError {
    #[error("jet order mismatch: {0} vs {1}")]
    OrderMismatch(usize, usize),
    #[error("division by a jet with zero value")]
    DivisionByZero,
    #[error("domain error: {0} of non-positive value {1}")]
    Domain(&'static str, f64),
    #[error("multi-index degree {degree} exceeds jet order {order}")]
    DegreeOverflow { degree: usize, order: usize },
    #[error("invalid coordinate axis {0} (expected 0..=3)")]
    InvalidAxis(usize),
    #[error("order {0} exceeds maximum supported order {max}", max = MAX_ORDER)]
    OrderTooLarge(usize),
    #[error("non-finite value produced in jet arithmetic")]
    NonFinite,
    #[error("insufficient jet order for derivative")]
    InsufficientOrder,
}

/// Multi-index over the four coordinates.
pub type MultiIndex = [u8; NVARS];

fn degree(m: &MultiIndex) -> usize {
    m.iter().map(|&d| d as usize).sum()
}

fn pack(m: &MultiIndex) -> usize {
    const B: usize = MAX_ORDER + 1;
    ((m[0] as usize * B + m[1] as usize) * B + m[2] as usize) * B + m[3] as usize
}

struct Tables {
    /// All multi-indices of total degree <= MAX_ORDER in graded
    /// lexicographic order; indices of degree <= k form a prefix.
    monomials: Vec<MultiIndex>,
    /// Packed multi-index -> position in `monomials`.
    rank: Vec<u32>,
    /// Coefficient count per order, C(order+4, 4).
    counts: [usize; MAX_ORDER + 1],
    /// Per order: (pos_a, pos_b, pos_out) product triples.
    pairs: Vec<Vec<(u32, u32, u32)>>,
}

fn tables() -> &'static Tables {
    static TABLES: OnceLock<Tables> = OnceLock::new();
    TABLES.get_or_init(|| {
        let mut monomials = Vec::new();
        for i0 in 0..=MAX_ORDER as u8 {
            for i1 in 0..=MAX_ORDER as u8 {
                for i2 in 0..=MAX_ORDER as u8 {
                    for i3 in 0..=MAX_ORDER as u8 {
                        let m = [i0, i1, i2, i3];
                        if degree(&m) <= MAX_ORDER {
                            monomials.push(m);
                        }
                    }
                }
            }
        }
        monomials.sort_by_key(|m| (degree(m), *m));

        const B: usize = MAX_ORDER + 1;
        let mut rank = vec![u32::MAX; B * B * B * B];
        for (pos, m) in monomials.iter().enumerate() {
            rank[pack(m)] = pos as u32;
        }

        let mut counts = [0usize; MAX_ORDER + 1];
        for (k, c) in counts.iter_mut().enumerate() {
            *c = monomials.iter().filter(|m| degree(m) <= k).count();
        }

        let mut pairs = Vec::with_capacity(MAX_ORDER + 1);
        for order in 0..=MAX_ORDER {
            let n = counts[order];
            let mut v = Vec::new();
            for ia in 0..n {
                let ma = monomials[ia];
                let da = degree(&ma);
                for ib in 0..n {
                    let mb = monomials[ib];
                    if da + degree(&mb) > order {
                        continue;
                    }
                    let sum = [ma[0] + mb[0], ma[1] + mb[1], ma[2] + mb[2], ma[3] + mb[3]];
                    v.push((ia as u32, ib as u32, rank[pack(&sum)]));
                }
            }
            pairs.push(v);
        }

        Tables {
            monomials,
            rank,
            counts,
            pairs,
        }
    })
}

/// Number of Taylor coefficients stored at the given order.
pub fn coeff_count(order: usize) -> usize {
    tables().counts[order]
}

fn factorial(n: u8) -> f64 {
    (1..=n as u64).product::<u64>() as f64
}

/// Dense truncated Taylor tower. Coefficients are Taylor-normalized
/// (mixed partial divided by multi-index factorial) and laid out in
/// graded lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    order: usize,
    coeffs: Vec<f64>,
}

impl Jet {
    pub fn constant(order: usize, value: f64) -> Result<Self, JetError> {
        if order > MAX_ORDER {
            return Err(JetError::OrderTooLarge(order));
        }
        let mut coeffs = vec![0.0; coeff_count(order)];
        coeffs[0] = value;
        Ok(Jet { order, coeffs })
    }

    /// The coordinate function of `axis`, seeded at the given base value.
    pub fn variable(order: usize, axis: usize, value: f64) -> Result<Self, JetError> {
        if axis >= NVARS {
            return Err(JetError::InvalidAxis(axis));
        }
        let mut jet = Jet::constant(order, value)?;
        if order >= 1 {
            let mut unit: MultiIndex = [0; NVARS];
            unit[axis] = 1;
            jet.coeffs[tables().rank[pack(&unit)] as usize] = 1.0;
        }
        Ok(jet)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    /// True if any coefficient is nonzero.
    pub fn coeffs_nonzero(&self) -> bool {
        self.coeffs.iter().any(|&c| c != 0.0)
    }

    /// Mixed partial derivative for the multi-index (coefficient times
    /// the multi-index factorial).
    pub fn partial(&self, idx: MultiIndex) -> Result<f64, JetError> {
        let d = degree(&idx);
        if d > self.order {
            return Err(JetError::DegreeOverflow {
                degree: d,
                order: self.order,
            });
        }
        let pos = tables().rank[pack(&idx)] as usize;
        let fact: f64 = idx.iter().map(|&i| factorial(i)).product();
        Ok(self.coeffs[pos] * fact)
    }

    /// Copy truncated to a lower (or equal) order.
    pub fn truncated(&self, order: usize) -> Jet {
        assert!(order <= self.order, "truncation cannot raise the order");
        Jet {
            order,
            coeffs: self.coeffs[..coeff_count(order)].to_vec(),
        }
    }

    /// Jet of the partial derivative along `axis`; the order drops by one.
    pub fn derivative(&self, axis: usize) -> Result<Jet, JetError> {
        if axis >= NVARS {
            return Err(JetError::InvalidAxis(axis));
        }
        if self.order == 0 {
            return Err(JetError::InsufficientOrder);
        }
        let t = tables();
        let out_order = self.order - 1;
        let mut coeffs = vec![0.0; coeff_count(out_order)];
        for (pos, c) in coeffs.iter_mut().enumerate() {
            let mut m = t.monomials[pos];
            m[axis] += 1;
            let src = t.rank[pack(&m)] as usize;
            *c = self.coeffs[src] * m[axis] as f64;
        }
        Ok(Jet {
            order: out_order,
            coeffs,
        })
    }

    fn check_order(&self, other: &Jet) -> Result<(), JetError> {
        if self.order != other.order {
            Err(JetError::OrderMismatch(self.order, other.order))
        } else {
            Ok(())
        }
    }

    pub fn checked_add(&self, other: &Jet) -> Result<Jet, JetError> {
        self.check_order(other)?;
        Ok(self + other)
    }

    pub fn checked_sub(&self, other: &Jet) -> Result<Jet, JetError> {
        self.check_order(other)?;
        Ok(self - other)
    }

    pub fn checked_mul(&self, other: &Jet) -> Result<Jet, JetError> {
        self.check_order(other)?;
        Ok(self * other)
    }

    pub fn div(&self, other: &Jet) -> Result<Jet, JetError> {
        self.check_order(other)?;
        if other.value() == 0.0 {
            return Err(JetError::DivisionByZero);
        }
        let out = self * &other.recip()?;
        if !out.is_finite() {
            return Err(JetError::NonFinite);
        }
        Ok(out)
    }

    pub fn scale(&self, factor: f64) -> Jet {
        Jet {
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    /// Composition with a univariate analytic function, given the Taylor
    /// coefficients `series[k] = f^(k)(value)/k!` of f at the jet's value.
    fn compose(&self, series: &[f64]) -> Jet {
        debug_assert_eq!(series.len(), self.order + 1);
        let mut w = self.clone();
        w.coeffs[0] = 0.0;
        // Horner evaluation in jet arithmetic.
        let mut acc = Jet::constant(self.order, series[self.order]).unwrap();
        for k in (0..self.order).rev() {
            acc = &acc * &w;
            acc.coeffs[0] += series[k];
        }
        acc
    }

    pub fn recip(&self) -> Result<Jet, JetError> {
        let a = self.value();
        if a == 0.0 {
            return Err(JetError::DivisionByZero);
        }
        let mut series = vec![0.0; self.order + 1];
        let mut c = 1.0 / a;
        for s in series.iter_mut() {
            *s = c;
            c *= -1.0 / a;
        }
        Ok(self.compose(&series))
    }

    pub fn sqrt(&self) -> Result<Jet, JetError> {
        let a = self.value();
        if a <= 0.0 {
            return Err(JetError::Domain("sqrt", a));
        }
        // series[k] = binom(1/2, k) * a^(1/2 - k)
        let mut series = vec![0.0; self.order + 1];
        let mut c = a.sqrt();
        for (k, s) in series.iter_mut().enumerate() {
            *s = c;
            let e = 0.5 - k as f64;
            c *= e / (k as f64 + 1.0) / a;
        }
        Ok(self.compose(&series))
    }

    pub fn exp(&self) -> Result<Jet, JetError> {
        let e = self.value().exp();
        if !e.is_finite() {
            return Err(JetError::NonFinite);
        }
        let mut series = vec![0.0; self.order + 1];
        let mut c = e;
        for (k, s) in series.iter_mut().enumerate() {
            *s = c;
            c /= k as f64 + 1.0;
        }
        Ok(self.compose(&series))
    }

    pub fn ln(&self) -> Result<Jet, JetError> {
        let a = self.value();
        if a <= 0.0 {
            return Err(JetError::Domain("log", a));
        }
        let mut series = vec![0.0; self.order + 1];
        series[0] = a.ln();
        // d^k/dt^k ln t = (-1)^(k-1) (k-1)! / t^k
        let mut c = 1.0 / a;
        for k in 1..=self.order {
            series[k] = c / k as f64;
            c *= -1.0 / a;
        }
        Ok(self.compose(&series))
    }

    pub fn sin(&self) -> Result<Jet, JetError> {
        Ok(self.compose(&trig_series(self.value(), self.order, true)))
    }

    pub fn cos(&self) -> Result<Jet, JetError> {
        Ok(self.compose(&trig_series(self.value(), self.order, false)))
    }

    /// Power with a constant real exponent.
    pub fn powf(&self, exponent: f64) -> Result<Jet, JetError> {
        if exponent == exponent.round() && exponent.abs() <= 16.0 {
            return self.powi(exponent as i32);
        }
        let a = self.value();
        if a <= 0.0 {
            return Err(JetError::Domain("pow", a));
        }
        let mut series = vec![0.0; self.order + 1];
        let mut c = a.powf(exponent);
        for (k, s) in series.iter_mut().enumerate() {
            *s = c;
            c *= (exponent - k as f64) / (k as f64 + 1.0) / a;
        }
        Ok(self.compose(&series))
    }

    /// Integer power by repeated multiplication; exact on polynomials.
    pub fn powi(&self, exponent: i32) -> Result<Jet, JetError> {
        if exponent < 0 {
            return self.recip()?.powi(-exponent);
        }
        let mut acc = Jet::constant(self.order, 1.0)?;
        for _ in 0..exponent {
            acc = &acc * self;
        }
        Ok(acc)
    }
}

fn trig_series(a: f64, order: usize, sin: bool) -> Vec<f64> {
    let (s, c) = a.sin_cos();
    let cycle = if sin { [s, c, -s, -c] } else { [c, -s, -c, s] };
    let mut series = vec![0.0; order + 1];
    let mut fact = 1.0;
    for (k, out) in series.iter_mut().enumerate() {
        if k > 0 {
            fact *= k as f64;
        }
        *out = cycle[k % 4] / fact;
    }
    series
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        assert_eq!(self.order, rhs.order, "jet order mismatch in add");
        Jet {
            order: self.order,
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        assert_eq!(self.order, rhs.order, "jet order mismatch in sub");
        Jet {
            order: self.order,
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        assert_eq!(self.order, rhs.order, "jet order mismatch in mul");
        let mut coeffs = vec![0.0; self.coeffs.len()];
        for &(ia, ib, io) in &tables().pairs[self.order] {
            coeffs[io as usize] += self.coeffs[ia as usize] * rhs.coeffs[ib as usize];
        }
        Jet {
            order: self.order,
            coeffs,
        }
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

/// Directional derivative of `f` along a vector field with jet components
/// `x` (in the coordinate basis ∂x1, ∂x2, ∂y1, ∂y2). The result is carried
/// at the largest order both operands support, which is one less than `f`.
pub fn directional(x: &[Jet; NVARS], f: &Jet) -> Result<Jet, JetError> {
    if f.order() == 0 {
        return Err(JetError::InsufficientOrder);
    }
    let order = x
        .iter()
        .map(|c| c.order())
        .min()
        .unwrap()
        .min(f.order() - 1);
    let mut acc = Jet::constant(order, 0.0)?;
    for (axis, comp) in x.iter().enumerate() {
        let df = f.derivative(axis)?.truncated(order);
        acc = &acc + &(&comp.truncated(order) * &df);
    }
    Ok(acc)
}

/// Lie bracket [X, Y]^a = X^b ∂_b Y^a − Y^b ∂_b X^a of two vector fields
/// given by jet components.
pub fn lie_bracket(x: &[Jet; NVARS], y: &[Jet; NVARS]) -> Result<[Jet; NVARS], JetError> {
    let order = x
        .iter()
        .chain(y.iter())
        .map(|c| c.order())
        .min()
        .unwrap()
        .saturating_sub(1);
    let comp = |a: usize| -> Result<Jet, JetError> {
        let fwd = directional(x, &y[a])?.truncated(order);
        let bwd = directional(y, &x[a])?.truncated(order);
        Ok(&fwd - &bwd)
    };
    Ok([comp(0)?, comp(1)?, comp(2)?, comp(3)?])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn var(axis: usize, value: f64, order: usize) -> Jet {
        Jet::variable(order, axis, value).unwrap()
    }

    #[test]
    fn coefficient_counts() {
        // C(order + 4, 4)
        assert_eq!(coeff_count(0), 1);
        assert_eq!(coeff_count(1), 5);
        assert_eq!(coeff_count(2), 15);
        assert_eq!(coeff_count(6), 210);
    }

    #[test]
    fn seeded_variable() {
        // p = ((0,0),(1,0)), axis 2 (y1), order 2
        let j = var(2, 1.0, 2);
        assert_eq!(j.value(), 1.0);
        assert_eq!(j.partial([0, 0, 1, 0]).unwrap(), 1.0);
        assert_eq!(j.partial([0, 0, 2, 0]).unwrap(), 0.0);
        assert_eq!(j.partial([1, 0, 0, 0]).unwrap(), 0.0);

        let j = var(0, 3.0, 1);
        assert_eq!(j.value(), 3.0);
        assert_eq!(j.partial([1, 0, 0, 0]).unwrap(), 1.0);
    }

    #[test]
    fn invalid_axis_rejected() {
        assert!(matches!(
            Jet::variable(2, 4, 1.0),
            Err(JetError::InvalidAxis(4))
        ));
    }

    #[test]
    fn bilinear_product() {
        // f(x,y) = x1 * y1 at ((2,0),(5,0))
        let f = &var(0, 2.0, 2) * &var(2, 5.0, 2);
        assert_eq!(f.value(), 10.0);
        assert_eq!(f.partial([1, 0, 0, 0]).unwrap(), 5.0);
        assert_eq!(f.partial([0, 0, 1, 0]).unwrap(), 2.0);
        assert_eq!(f.partial([1, 0, 1, 0]).unwrap(), 1.0);
    }

    #[test]
    fn square_of_variable() {
        let x = var(0, 2.0, 2);
        let f = &x * &x;
        assert_eq!(f.value(), 4.0);
        assert_eq!(f.partial([1, 0, 0, 0]).unwrap(), 4.0);
        // second partial is 2, Taylor coefficient is 1
        assert_eq!(f.partial([2, 0, 0, 0]).unwrap(), 2.0);
    }

    #[test]
    fn sqrt_of_norm() {
        // |y| at y = (3,4), order 1
        let y1 = var(2, 3.0, 1);
        let y2 = var(3, 4.0, 1);
        let n = (&(&y1 * &y1) + &(&y2 * &y2)).sqrt().unwrap();
        assert!((n.value() - 5.0).abs() < 1e-14);
        assert!((n.partial([0, 0, 1, 0]).unwrap() - 3.0 / 5.0).abs() < 1e-14);
        assert!((n.partial([0, 0, 0, 1]).unwrap() - 4.0 / 5.0).abs() < 1e-14);
    }

    #[test]
    fn cube_third_partial() {
        let y1 = var(2, 2.0, 3);
        let f = y1.powi(3).unwrap();
        assert_eq!(f.partial([0, 0, 3, 0]).unwrap(), 6.0);
        assert_eq!(f.partial([0, 0, 0, 0]).unwrap(), 8.0);
    }

    #[test]
    fn partial_degree_overflow() {
        let j = var(0, 1.0, 2);
        assert!(matches!(
            j.partial([3, 0, 0, 0]),
            Err(JetError::DegreeOverflow { .. })
        ));
    }

    #[test]
    fn order_mismatch_is_error() {
        let a = var(0, 1.0, 2);
        let b = var(0, 1.0, 3);
        assert!(matches!(
            a.checked_add(&b),
            Err(JetError::OrderMismatch(2, 3))
        ));
        assert!(a.div(&b).is_err());
    }

    #[test]
    fn division_by_zero_value() {
        let a = var(0, 1.0, 2);
        let mut b = var(1, 0.0, 2);
        b = &b * &b; // value 0
        assert!(matches!(a.div(&b), Err(JetError::DivisionByZero)));
    }

    #[test]
    fn domain_errors() {
        let a = Jet::constant(2, -1.0).unwrap();
        assert!(matches!(a.sqrt(), Err(JetError::Domain("sqrt", _))));
        assert!(matches!(a.ln(), Err(JetError::Domain("log", _))));
    }

    #[test]
    fn exp_log_roundtrip() {
        let x = var(0, 0.7, 4);
        let f = x.exp().unwrap().ln().unwrap();
        for (pos, want) in [([0, 0, 0, 0], 0.7), ([1, 0, 0, 0], 1.0)] {
            assert!((f.partial(pos).unwrap() - want).abs() < 1e-12);
        }
        assert!(f.partial([2, 0, 0, 0]).unwrap().abs() < 1e-12);
    }

    #[test]
    fn trig_derivatives() {
        let x = var(1, 0.3, 4);
        let s = x.sin().unwrap();
        let c = x.cos().unwrap();
        assert!((s.partial([0, 1, 0, 0]).unwrap() - 0.3f64.cos()).abs() < 1e-14);
        assert!((c.partial([0, 2, 0, 0]).unwrap() + 0.3f64.cos()).abs() < 1e-13);
    }

    #[test]
    fn directional_derivative_reduces_order() {
        let x1 = var(0, 1.0, 3);
        let f = x1.powi(2).unwrap();
        let field = [
            Jet::constant(3, 2.0).unwrap(),
            Jet::constant(3, 0.0).unwrap(),
            Jet::constant(3, 0.0).unwrap(),
            Jet::constant(3, 0.0).unwrap(),
        ];
        let d = directional(&field, &f).unwrap();
        assert_eq!(d.order(), 2);
        assert_eq!(d.value(), 4.0); // 2 * d/dx1 (x1^2) = 4 x1
    }

    #[test]
    fn determinism() {
        let build = || {
            let y1 = var(2, 1.3, 6);
            let y2 = var(3, -0.4, 6);
            (&(&y1 * &y1) + &(&y2 * &y2)).sqrt().unwrap()
        };
        assert_eq!(build(), build());
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        /// Random polynomial in the four variables, degree <= 3.
        fn poly_jet(coeffs: &[f64; 8], vars: &[Jet; 4]) -> Jet {
            let order = vars[0].order();
            let mut acc = Jet::constant(order, coeffs[0]).unwrap();
            acc = &acc + &vars[0].scale(coeffs[1]);
            acc = &acc + &vars[2].scale(coeffs[2]);
            acc = &acc + &(&vars[0] * &vars[3]).scale(coeffs[3]);
            acc = &acc + &(&vars[1] * &vars[1]).scale(coeffs[4]);
            acc = &acc + &(&(&vars[2] * &vars[2]) * &vars[1]).scale(coeffs[5]);
            acc = &acc + &(&vars[0] * &vars[1]).scale(coeffs[6]);
            acc = &acc + &(&(&vars[3] * &vars[3]) * &vars[3]).scale(coeffs[7]);
            acc
        }

        fn small() -> impl Strategy<Value = f64> {
            // keep coefficients tame so products stay well-scaled
            -2.0..2.0f64
        }

        proptest! {
            #[test]
            fn product_rule_exact_on_polynomials(
                a in proptest::array::uniform8(small()),
                b in proptest::array::uniform8(small()),
                base in proptest::array::uniform4(small()),
            ) {
                let vars = [
                    Jet::variable(6, 0, base[0]).unwrap(),
                    Jet::variable(6, 1, base[1]).unwrap(),
                    Jet::variable(6, 2, base[2]).unwrap(),
                    Jet::variable(6, 3, base[3]).unwrap(),
                ];
                let p = poly_jet(&a, &vars);
                let q = poly_jet(&b, &vars);
                let prod = &p * &q;
                for axis in 0..4 {
                    let lhs = prod.derivative(axis).unwrap();
                    let rhs = &(&p.derivative(axis).unwrap() * &q.truncated(5))
                        + &(&p.truncated(5) * &q.derivative(axis).unwrap());
                    for (x, y) in lhs.coeffs.iter().zip(&rhs.coeffs) {
                        prop_assert!((x - y).abs() <= 1e-9 * (1.0 + x.abs().max(y.abs())));
                    }
                }
            }

            #[test]
            fn addition_commutes_and_derivative_is_linear(
                a in proptest::array::uniform8(small()),
                b in proptest::array::uniform8(small()),
            ) {
                let vars = [
                    Jet::variable(4, 0, 0.3).unwrap(),
                    Jet::variable(4, 1, -0.2).unwrap(),
                    Jet::variable(4, 2, 1.1).unwrap(),
                    Jet::variable(4, 3, 0.5).unwrap(),
                ];
                let p = poly_jet(&a, &vars);
                let q = poly_jet(&b, &vars);
                prop_assert_eq!(&p + &q, &q + &p);
                let lhs = (&p + &q).derivative(2).unwrap();
                let rhs = &p.derivative(2).unwrap() + &q.derivative(2).unwrap();
                prop_assert_eq!(lhs, rhs);
            }

            #[test]
            fn quotient_recovers_numerator(
                a in proptest::array::uniform8(small()),
            ) {
                let vars = [
                    Jet::variable(5, 0, 0.4).unwrap(),
                    Jet::variable(5, 1, 0.1).unwrap(),
                    Jet::variable(5, 2, 0.9).unwrap(),
                    Jet::variable(5, 3, -0.6).unwrap(),
                ];
                let p = poly_jet(&a, &vars);
                // q = 2 + x1^2 has value bounded away from zero
                let q = &Jet::constant(5, 2.0).unwrap() + &(&vars[0] * &vars[0]);
                let r = &p.div(&q).unwrap() * &q;
                for (x, y) in r.coeffs.iter().zip(&p.coeffs) {
                    prop_assert!((x - y).abs() <= 1e-10 * (1.0 + y.abs()));
                }
            }
        }
    }
}
