//! Exact p-adic scalars: valuations, absolute values, projective points,
//! Möbius transformations and ultrametric discs.
//!
//! Everything here works on exact rationals. A rational never has a
//! fractional valuation, but valuations are reported as rationals so that
//! values living on the refined grid (1/e)ℤ of a ramified extension compare
//! on a common scale.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num::{BigInt, BigRational, One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum PadicError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("ramification index must be at least 1")]
    BadRamification,
    #[error("projective point must have a nonzero coordinate")]
    ZeroPoint,
    #[error("Möbius matrix is singular")]
    DegenerateMoebius,
    #[error("points must be pairwise distinct")]
    PointsNotDistinct,
    #[error("operands belong to different fields (p or e differ)")]
    MismatchedParams,
    #[error("cannot parse rational from {0:?}")]
    ParseRational(String),
    #[error("division by zero")]
    DivisionByZero,
}

/// Parameters of the coefficient field: a prime `p` and a ramification
/// index `e`, so valuations live on the grid (1/e)ℤ with val(p) = 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldParams {
    p: u64,
    e: u32,
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

impl FieldParams {
    pub fn new(p: u64, e: u32) -> Result<Self, PadicError> {
        if !is_prime(p) {
            return Err(PadicError::NotPrime(p));
        }
        if e == 0 {
            return Err(PadicError::BadRamification);
        }
        Ok(FieldParams { p, e })
    }

    /// Unramified field ℚ_p.
    pub fn qp(p: u64) -> Result<Self, PadicError> {
        Self::new(p, 1)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn e(&self) -> u32 {
        self.e
    }

    pub fn p_big(&self) -> BigInt {
        BigInt::from(self.p)
    }

    /// Does `v` lie on the value-group grid (1/e)ℤ?
    pub fn on_grid(&self, v: &BigRational) -> bool {
        (v * BigRational::from_integer(BigInt::from(self.e))).is_integer()
    }
}

/// A valuation value: either a rational or +∞ (the valuation of 0).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExtVal {
    Finite(BigRational),
    Infinity,
}

impl ExtVal {
    pub fn from_int(k: i64) -> Self {
        ExtVal::Finite(BigRational::from_integer(BigInt::from(k)))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtVal::Infinity)
    }

    pub fn finite(&self) -> Option<&BigRational> {
        match self {
            ExtVal::Finite(v) => Some(v),
            ExtVal::Infinity => None,
        }
    }
}

impl PartialOrd for ExtVal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtVal {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ExtVal::Infinity, ExtVal::Infinity) => Ordering::Equal,
            (ExtVal::Infinity, ExtVal::Finite(_)) => Ordering::Greater,
            (ExtVal::Finite(_), ExtVal::Infinity) => Ordering::Less,
            (ExtVal::Finite(a), ExtVal::Finite(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for ExtVal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtVal::Finite(v) => write!(f, "{}", v),
            ExtVal::Infinity => write!(f, "inf"),
        }
    }
}

/// Exponent of `p` in a nonzero integer.
fn vp_int(n: &BigInt, p: &BigInt) -> u64 {
    debug_assert!(!n.is_zero());
    let mut n = n.abs();
    let mut k = 0u64;
    loop {
        let (q, r) = num::Integer::div_rem(&n, p);
        if !r.is_zero() {
            return k;
        }
        n = q;
        k += 1;
    }
}

/// p-adic valuation of a rational, with val(0) = ∞ and val(p) = 1.
pub fn val(x: &BigRational, params: &FieldParams) -> ExtVal {
    if x.is_zero() {
        return ExtVal::Infinity;
    }
    let p = params.p_big();
    let vn = vp_int(x.numer(), &p) as i64;
    let vd = vp_int(x.denom(), &p) as i64;
    ExtVal::from_int(vn - vd)
}

/// p-adic absolute value |x| = p^(−val x), exact. |0| = 0.
pub fn abs(x: &BigRational, params: &FieldParams) -> BigRational {
    match val(x, params) {
        ExtVal::Infinity => BigRational::zero(),
        ExtVal::Finite(v) => {
            // x is rational, so v is an integer.
            let k: i64 = v.to_integer().try_into().expect("valuation fits i64");
            pow_rational(&params.p_big(), -k)
        }
    }
}

/// p^k as an exact rational, for any sign of k.
pub fn pow_rational(p: &BigInt, k: i64) -> BigRational {
    if k >= 0 {
        BigRational::from_integer(p.pow(k as u32))
    } else {
        BigRational::new(BigInt::one(), p.pow((-k) as u32))
    }
}

/// An exact rational tagged with its field parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PadicScalar {
    value: BigRational,
    params: FieldParams,
}

impl PadicScalar {
    pub fn new(value: BigRational, params: FieldParams) -> Self {
        PadicScalar { value, params }
    }

    pub fn value(&self) -> &BigRational {
        &self.value
    }

    pub fn params(&self) -> &FieldParams {
        &self.params
    }

    pub fn val(&self) -> ExtVal {
        val(&self.value, &self.params)
    }

    pub fn abs(&self) -> BigRational {
        abs(&self.value, &self.params)
    }

    fn check(&self, other: &Self) {
        assert_eq!(
            self.params, other.params,
            "arithmetic across different fields"
        );
    }
}

impl std::ops::Add for PadicScalar {
    type Output = PadicScalar;
    fn add(self, rhs: Self) -> Self {
        self.check(&rhs);
        PadicScalar::new(self.value + rhs.value, self.params)
    }
}

impl std::ops::Sub for PadicScalar {
    type Output = PadicScalar;
    fn sub(self, rhs: Self) -> Self {
        self.check(&rhs);
        PadicScalar::new(self.value - rhs.value, self.params)
    }
}

impl std::ops::Mul for PadicScalar {
    type Output = PadicScalar;
    fn mul(self, rhs: Self) -> Self {
        self.check(&rhs);
        PadicScalar::new(self.value * rhs.value, self.params)
    }
}

impl std::ops::Div for PadicScalar {
    type Output = PadicScalar;
    fn div(self, rhs: Self) -> Self {
        self.check(&rhs);
        assert!(!rhs.value.is_zero(), "division by zero");
        PadicScalar::new(self.value / rhs.value, self.params)
    }
}

/// Parse a rational written as `"num/den"` or a plain integer string.
pub fn parse_rational(s: &str) -> Result<BigRational, PadicError> {
    let t = s.trim();
    let err = || PadicError::ParseRational(s.to_string());
    if t.is_empty() {
        return Err(err());
    }
    if let Some((n, d)) = t.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| err())?;
        let d = BigInt::from_str(d.trim()).map_err(|_| err())?;
        if d.is_zero() {
            return Err(err());
        }
        Ok(BigRational::new(n, d))
    } else {
        let n = BigInt::from_str(t).map_err(|_| err())?;
        Ok(BigRational::from_integer(n))
    }
}

/// A point of P¹ as a ratio (x0 : x1); the affine value is x0/x1 and
/// `(1 : 0)` is the point at infinity. Stored with the first nonzero
/// coordinate scaled to 1, which makes equality and hashing structural.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjPoint1 {
    x0: BigRational,
    x1: BigRational,
}

impl ProjPoint1 {
    pub fn new(x0: BigRational, x1: BigRational) -> Result<Self, PadicError> {
        if x0.is_zero() && x1.is_zero() {
            return Err(PadicError::ZeroPoint);
        }
        Ok(if !x0.is_zero() {
            let s = x0.clone();
            ProjPoint1 {
                x0: BigRational::one(),
                x1: x1 / s,
            }
        } else {
            ProjPoint1 {
                x0: BigRational::zero(),
                x1: BigRational::one(),
            }
        })
    }

    pub fn from_affine(z: BigRational) -> Self {
        ProjPoint1::new(z, BigRational::one()).expect("(z : 1) is never the zero vector")
    }

    pub fn infinity() -> Self {
        ProjPoint1 {
            x0: BigRational::one(),
            x1: BigRational::zero(),
        }
    }

    pub fn is_infinity(&self) -> bool {
        self.x1.is_zero()
    }

    /// Affine value x0/x1, or `None` for the point at infinity.
    pub fn to_affine(&self) -> Option<BigRational> {
        if self.is_infinity() {
            None
        } else {
            Some(&self.x0 / &self.x1)
        }
    }

    pub fn coords(&self) -> (&BigRational, &BigRational) {
        (&self.x0, &self.x1)
    }

    /// Parse `"inf"` or a rational (affine) value.
    pub fn parse(s: &str) -> Result<Self, PadicError> {
        if s.trim() == "inf" {
            Ok(ProjPoint1::infinity())
        } else {
            Ok(ProjPoint1::from_affine(parse_rational(s)?))
        }
    }
}

impl fmt::Display for ProjPoint1 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.to_affine() {
            Some(z) => write!(f, "{}", z),
            None => write!(f, "inf"),
        }
    }
}

/// A point of P² as (z0 : z1 : z2), first nonzero coordinate scaled to 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjPoint2 {
    z: [BigRational; 3],
}

impl ProjPoint2 {
    pub fn new(z0: BigRational, z1: BigRational, z2: BigRational) -> Result<Self, PadicError> {
        let mut z = [z0, z1, z2];
        let lead = z.iter().position(|c| !c.is_zero()).ok_or(PadicError::ZeroPoint)?;
        let s = z[lead].clone();
        for c in z.iter_mut() {
            *c /= s.clone();
        }
        Ok(ProjPoint2 { z })
    }

    pub fn coords(&self) -> &[BigRational; 3] {
        &self.z
    }
}

/// A Möbius transformation z ↦ (az + b)/(cz + d) with ad − bc ≠ 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Moebius {
    a: BigRational,
    b: BigRational,
    c: BigRational,
    d: BigRational,
}

impl Moebius {
    pub fn new(
        a: BigRational,
        b: BigRational,
        c: BigRational,
        d: BigRational,
    ) -> Result<Self, PadicError> {
        let det = &a * &d - &b * &c;
        if det.is_zero() {
            return Err(PadicError::DegenerateMoebius);
        }
        Ok(Moebius { a, b, c, d })
    }

    pub fn identity() -> Self {
        Moebius {
            a: BigRational::one(),
            b: BigRational::zero(),
            c: BigRational::zero(),
            d: BigRational::one(),
        }
    }

    pub fn entries(&self) -> [&BigRational; 4] {
        [&self.a, &self.b, &self.c, &self.d]
    }

    pub fn det(&self) -> BigRational {
        &self.a * &self.d - &self.b * &self.c
    }

    /// Apply to a projective point: (x0 : x1) ↦ (a x0 + b x1 : c x0 + d x1).
    pub fn apply(&self, z: &ProjPoint1) -> ProjPoint1 {
        let (x0, x1) = z.coords();
        let y0 = &self.a * x0 + &self.b * x1;
        let y1 = &self.c * x0 + &self.d * x1;
        ProjPoint1::new(y0, y1).expect("nonsingular matrix maps nonzero vectors to nonzero")
    }

    /// Matrix product; `(m1.compose(&m2)).apply(z) == m1.apply(&m2.apply(z))`.
    pub fn compose(&self, other: &Moebius) -> Moebius {
        Moebius {
            a: &self.a * &other.a + &self.b * &other.c,
            b: &self.a * &other.b + &self.b * &other.d,
            c: &self.c * &other.a + &self.d * &other.c,
            d: &self.c * &other.b + &self.d * &other.d,
        }
    }

    pub fn inverse(&self) -> Moebius {
        Moebius {
            a: self.d.clone(),
            b: -self.b.clone(),
            c: -self.c.clone(),
            d: self.a.clone(),
        }
    }

    /// Projectively the identity, i.e. a nonzero multiple of the unit matrix.
    pub fn is_identity(&self) -> bool {
        self.b.is_zero() && self.c.is_zero() && self.a == self.d
    }
}

/// The unique Möbius map sending (a, b, c) to (0, 1, ∞).
pub fn normalize_to_standard_triple(
    a: &ProjPoint1,
    b: &ProjPoint1,
    c: &ProjPoint1,
) -> Result<Moebius, PadicError> {
    if a == b || b == c || a == c {
        return Err(PadicError::PointsNotDistinct);
    }
    let (a0, a1) = a.coords();
    let (b0, b1) = b.coords();
    let (c0, c1) = c.coords();
    // Linear forms vanishing at a and at c; m = (L_a(z) · L_a-free scale).
    let la_b = a1 * b0 - a0 * b1; // L_a(b)
    let lc_b = c1 * b0 - c0 * b1; // L_c(b)
    let m = Moebius {
        a: a1 * &lc_b,
        b: -(a0 * &lc_b),
        c: c1 * &la_b,
        d: -(c0 * &la_b),
    };
    debug_assert!(!m.det().is_zero());
    Ok(m)
}

/// An ultrametric disc {x : val(x − center) ≥ radius_val} (or > for open).
///
/// Radii are valuations: larger `radius_val` means a smaller disc.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Disc {
    pub center: BigRational,
    pub radius_val: BigRational,
    pub closed: bool,
    pub params: FieldParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiscRelation {
    Equal,
    FirstInsideSecond,
    SecondInsideFirst,
    Disjoint,
}

impl Disc {
    pub fn closed(center: BigRational, radius_val: BigRational, params: FieldParams) -> Self {
        Disc {
            center,
            radius_val,
            closed: true,
            params,
        }
    }

    pub fn open(center: BigRational, radius_val: BigRational, params: FieldParams) -> Self {
        Disc {
            center,
            radius_val,
            closed: false,
            params,
        }
    }

    /// Effective closed radius on the value grid: membership val ≥ r is
    /// equivalent to val ≥ ceil_grid(r), and val > r to val ≥ next_grid(r),
    /// because attained valuations lie on (1/e)ℤ.
    fn effective_radius(&self) -> BigRational {
        let e = BigRational::from_integer(BigInt::from(self.params.e()));
        let scaled = &self.radius_val * &e;
        let grid_steps = if self.closed {
            scaled.ceil()
        } else {
            scaled.floor() + BigRational::one()
        };
        grid_steps / e
    }
}

/// Trichotomy for a pair of discs: equal, nested, or disjoint.
///
/// Two discs over the same field are never partially overlapping; this is
/// the ultrametric property that makes the Bruhat–Tits tree a tree.
pub fn disc_relation(d1: &Disc, d2: &Disc) -> Result<DiscRelation, PadicError> {
    if d1.params != d2.params {
        return Err(PadicError::MismatchedParams);
    }
    let r1 = d1.effective_radius();
    let r2 = d2.effective_radius();
    let dist = val(&(&d1.center - &d2.center), &d1.params);
    let d_ge = |r: &BigRational| match &dist {
        ExtVal::Infinity => true,
        ExtVal::Finite(v) => v >= r,
    };
    Ok(match r1.cmp(&r2) {
        Ordering::Equal => {
            if d_ge(&r1) {
                DiscRelation::Equal
            } else {
                DiscRelation::Disjoint
            }
        }
        Ordering::Greater => {
            // d1 is the smaller disc.
            if d_ge(&r2) {
                DiscRelation::FirstInsideSecond
            } else {
                DiscRelation::Disjoint
            }
        }
        Ordering::Less => {
            if d_ge(&r1) {
                DiscRelation::SecondInsideFirst
            } else {
                DiscRelation::Disjoint
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn ri(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    fn p5() -> FieldParams {
        FieldParams::qp(5).unwrap()
    }

    /// Independent valuation oracle: fully factor numerator and denominator
    /// by trial division and read off the exponent of p.
    fn val_oracle(x: &BigRational, p: u64) -> Option<i64> {
        if x.is_zero() {
            return None;
        }
        let count = |n: &BigInt| {
            let mut n = n.abs();
            let mut table = std::collections::BTreeMap::new();
            let mut d = BigInt::from(2);
            while &d * &d <= n {
                while (&n % &d).is_zero() {
                    *table.entry(d.clone()).or_insert(0i64) += 1;
                    n /= &d;
                }
                d += 1;
            }
            if n > BigInt::one() {
                *table.entry(n).or_insert(0) += 1;
            }
            table.get(&BigInt::from(p)).copied().unwrap_or(0)
        };
        Some(count(x.numer()) - count(x.denom()))
    }

    #[test]
    fn params_reject_composite_p_and_zero_e() {
        assert_eq!(FieldParams::new(4, 1), Err(PadicError::NotPrime(4)));
        assert_eq!(FieldParams::new(1, 1), Err(PadicError::NotPrime(1)));
        assert_eq!(FieldParams::new(5, 0), Err(PadicError::BadRamification));
        assert!(FieldParams::new(2, 3).is_ok());
    }

    #[test]
    fn val_of_50_thirds_at_5_is_2() {
        let x = r(50, 3);
        assert_eq!(val(&x, &p5()), ExtVal::from_int(2));
        assert_eq!(val_oracle(&x, 5), Some(2));
    }

    #[test]
    fn val_matches_factorization_oracle() {
        let params = p5();
        let cases = [
            r(50, 3),
            r(7, 10),
            r(-125, 4),
            r(1, 625),
            ri(1),
            ri(-2),
            r(375, 15),
        ];
        for x in &cases {
            let got = val(x, &params);
            let want = val_oracle(x, 5).unwrap();
            assert_eq!(got, ExtVal::from_int(want), "val({})", x);
        }
    }

    #[test]
    fn val_of_zero_is_infinite() {
        assert!(val(&BigRational::zero(), &p5()).is_infinite());
        assert_eq!(abs(&BigRational::zero(), &p5()), BigRational::zero());
    }

    #[test]
    fn abs_is_exact_power_of_p() {
        let params = p5();
        assert_eq!(abs(&r(7, 10), &params), ri(5)); // val = −1
        assert_eq!(abs(&ri(5), &params), r(1, 5));
        assert_eq!(abs(&ri(7), &params), ri(1));
    }

    #[test]
    fn ultrametric_inequality_holds() {
        // val(x + y) ≥ min(val x, val y), with equality when the two differ.
        let params = p5();
        let samples = [
            (r(50, 3), r(7, 10)),
            (r(25, 2), r(5, 3)),
            (r(1, 5), r(-1, 5)),
            (ri(625), r(625, 7)),
        ];
        for (x, y) in &samples {
            let vx = val(x, &params);
            let vy = val(y, &params);
            let vsum = val(&(x + y), &params);
            let min = vx.clone().min(vy.clone());
            assert!(vsum >= min, "val({} + {})", x, y);
            if vx != vy {
                assert_eq!(vsum, min);
            }
        }
    }

    #[test]
    fn scalar_ops_respect_valuation() {
        let params = p5();
        let a = PadicScalar::new(r(50, 3), params);
        let b = PadicScalar::new(r(7, 10), params);
        let prod = a.clone() * b.clone();
        // val is additive in products.
        assert_eq!(prod.val(), ExtVal::from_int(2 - 1));
        let quot = a / b;
        assert_eq!(quot.val(), ExtVal::from_int(2 + 1));
    }

    #[test]
    fn parse_rational_accepts_fraction_and_integer() {
        assert_eq!(parse_rational("50/3").unwrap(), r(50, 3));
        assert_eq!(parse_rational(" -7 / 10 ").unwrap(), r(-7, 10));
        assert_eq!(parse_rational("12").unwrap(), ri(12));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn proj_point_parse_and_canonical_form() {
        let inf = ProjPoint1::parse("inf").unwrap();
        assert!(inf.is_infinity());
        assert_eq!(inf, ProjPoint1::infinity());
        let z = ProjPoint1::parse("5").unwrap();
        assert_eq!(z.to_affine(), Some(ri(5)));
        // (10 : 2) and (5 : 1) are the same point.
        let a = ProjPoint1::new(ri(10), ri(2)).unwrap();
        let b = ProjPoint1::new(ri(5), ri(1)).unwrap();
        assert_eq!(a, b);
        assert!(ProjPoint1::new(ri(0), ri(0)).is_err());
    }

    #[test]
    fn moebius_inversion_map_matches_hand_values() {
        // x ↦ 1/(5x): matrix (0, 1; 5, 0).
        let m = Moebius::new(ri(0), ri(1), ri(5), ri(0)).unwrap();
        let one = ProjPoint1::from_affine(ri(1));
        let img = m.apply(&one);
        assert_eq!(img.to_affine(), Some(r(1, 5)));
        let inf_img = m.apply(&ProjPoint1::infinity());
        assert_eq!(inf_img.to_affine(), Some(ri(0)));
        let zero_img = m.apply(&ProjPoint1::from_affine(ri(0)));
        assert!(zero_img.is_infinity());
    }

    #[test]
    fn moebius_compose_and_inverse() {
        let m = Moebius::new(ri(2), ri(1), ri(1), ri(1)).unwrap();
        let n = Moebius::new(ri(0), ri(1), ri(5), ri(0)).unwrap();
        let z = ProjPoint1::from_affine(r(3, 7));
        let lhs = m.compose(&n).apply(&z);
        let rhs = m.apply(&n.apply(&z));
        assert_eq!(lhs, rhs);
        let id = m.compose(&m.inverse());
        assert!(id.is_identity());
        assert!(Moebius::new(ri(1), ri(2), ri(2), ri(4)).is_err());
    }

    #[test]
    fn standard_triple_of_standard_points_is_identity() {
        let zero = ProjPoint1::from_affine(ri(0));
        let one = ProjPoint1::from_affine(ri(1));
        let inf = ProjPoint1::infinity();
        let m = normalize_to_standard_triple(&zero, &one, &inf).unwrap();
        assert!(m.is_identity());
    }

    #[test]
    fn standard_triple_normalizes_infinity_first_triple() {
        // (∞, 1, 0) is sent to (0, 1, ∞) by z ↦ 1/z.
        let inf = ProjPoint1::infinity();
        let one = ProjPoint1::from_affine(ri(1));
        let zero = ProjPoint1::from_affine(ri(0));
        let m = normalize_to_standard_triple(&inf, &one, &zero).unwrap();
        assert_eq!(m.apply(&inf).to_affine(), Some(ri(0)));
        assert_eq!(m.apply(&one).to_affine(), Some(ri(1)));
        assert!(m.apply(&zero).is_infinity());
        // Acts as z ↦ 1/z on a generic point.
        let z = ProjPoint1::from_affine(r(5, 3));
        assert_eq!(m.apply(&z).to_affine(), Some(r(3, 5)));
    }

    #[test]
    fn standard_triple_random_round_trip() {
        let pts = [r(2, 3), ri(-5), r(7, 25)];
        let a = ProjPoint1::from_affine(pts[0].clone());
        let b = ProjPoint1::from_affine(pts[1].clone());
        let c = ProjPoint1::from_affine(pts[2].clone());
        let m = normalize_to_standard_triple(&a, &b, &c).unwrap();
        assert_eq!(m.apply(&a).to_affine(), Some(ri(0)));
        assert_eq!(m.apply(&b).to_affine(), Some(ri(1)));
        assert!(m.apply(&c).is_infinity());
        assert!(normalize_to_standard_triple(&a, &a, &c).is_err());
    }

    #[test]
    fn unit_discs_at_0_and_1_coincide() {
        let params = p5();
        let d0 = Disc::closed(ri(0), ri(0), params);
        let d1 = Disc::closed(ri(1), ri(0), params);
        assert_eq!(disc_relation(&d0, &d1).unwrap(), DiscRelation::Equal);
    }

    #[test]
    fn disc_relation_trichotomy_cases() {
        let params = p5();
        let unit = Disc::closed(ri(0), ri(0), params);
        let small = Disc::closed(ri(0), ri(2), params);
        assert_eq!(
            disc_relation(&small, &unit).unwrap(),
            DiscRelation::FirstInsideSecond
        );
        assert_eq!(
            disc_relation(&unit, &small).unwrap(),
            DiscRelation::SecondInsideFirst
        );
        let far = Disc::closed(r(1, 5), ri(0), params);
        assert_eq!(disc_relation(&unit, &far).unwrap(), DiscRelation::Disjoint);
        let q3 = FieldParams::qp(3).unwrap();
        let other = Disc::closed(ri(0), ri(0), q3);
        assert_eq!(
            disc_relation(&unit, &other),
            Err(PadicError::MismatchedParams)
        );
    }

    #[test]
    fn open_disc_matches_shrunken_closed_disc() {
        let params = p5();
        // Over ℚ_p, {val > 0} = {val ≥ 1}.
        let open = Disc::open(ri(0), ri(0), params);
        let closed = Disc::closed(ri(0), ri(1), params);
        assert_eq!(disc_relation(&open, &closed).unwrap(), DiscRelation::Equal);
        // On the refined grid (1/2)ℤ, {val > 0} = {val ≥ 1/2} instead.
        let ram = FieldParams::new(5, 2).unwrap();
        let open_ram = Disc::open(ri(0), ri(0), ram);
        let half = Disc::closed(ri(0), r(1, 2), ram);
        assert_eq!(
            disc_relation(&open_ram, &half).unwrap(),
            DiscRelation::Equal
        );
    }

    #[test]
    fn grid_membership_tracks_ramification() {
        let q5 = FieldParams::qp(5).unwrap();
        let ram = FieldParams::new(5, 3).unwrap();
        assert!(q5.on_grid(&ri(2)));
        assert!(!q5.on_grid(&r(1, 3)));
        assert!(ram.on_grid(&r(1, 3)));
        assert!(!ram.on_grid(&r(1, 2)));
    }
}
