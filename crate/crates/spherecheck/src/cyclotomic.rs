//! Exact arithmetic in Q(ζ_m), power basis modulo Φ_m.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use once_cell::sync::Lazy;
use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, RwLock};

use crate::Error;

static PHI: Lazy<RwLock<HashMap<u32, Arc<Vec<i64>>>>> = Lazy::new(|| RwLock::new(HashMap::new()));

/// Coefficients of Φ_m, constant term first. Cached; the first writer wins.
pub fn cyclotomic_poly(m: u32) -> Arc<Vec<i64>> {
    assert!(m >= 1);
    if let Some(p) = PHI.read().unwrap().get(&m) {
        return p.clone();
    }
    // x^m − 1 divided by Φ_d for every proper divisor d
    let mut num = vec![0i64; m as usize + 1];
    num[0] = -1;
    num[m as usize] = 1;
    for d in 1..m {
        if m.is_multiple_of(d) {
            let den = cyclotomic_poly(d);
            num = poly_div_exact(&num, &den);
        }
    }
    let p = Arc::new(num);
    PHI.write().unwrap().entry(m).or_insert(p).clone()
}

fn poly_div_exact(num: &[i64], den: &[i64]) -> Vec<i64> {
    // den is monic
    let mut r = num.to_vec();
    let dn = den.len() - 1;
    let qn = r.len() - 1 - dn;
    let mut q = vec![0i64; qn + 1];
    for i in (0..=qn).rev() {
        let c = r[i + dn];
        q[i] = c;
        if c != 0 {
            for (j, &dj) in den.iter().enumerate() {
                r[i + j] -= c * dj;
            }
        }
    }
    debug_assert!(r.iter().all(|&x| x == 0));
    q
}

pub fn euler_phi(m: u32) -> usize {
    cyclotomic_poly(m).len() - 1
}

fn lcm(a: u32, b: u32) -> u32 {
    a / a.gcd(&b) * b
}

fn q(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// An element of Q(ζ_m).
#[derive(Clone, Debug)]
pub struct CycNumber {
    m: u32,
    coeffs: Vec<BigRational>,
}

impl CycNumber {
    pub fn conductor(&self) -> u32 {
        self.m
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn from_rational(r: BigRational) -> Self {
        CycNumber { m: 1, coeffs: vec![r] }
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rational(q(n))
    }

    pub fn zero() -> Self {
        Self::from_int(0)
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    /// ζ_m^e.
    pub fn zeta_pow(m: u32, e: i64) -> Self {
        let e = e.rem_euclid(m as i64) as usize;
        let mut p = vec![BigRational::zero(); e + 1];
        p[e] = BigRational::one();
        Self::reduce(m, p)
    }

    fn reduce(m: u32, mut p: Vec<BigRational>) -> Self {
        let phi = cyclotomic_poly(m);
        let d = phi.len() - 1;
        while p.len() > d {
            let top = p.pop().unwrap();
            if top.is_zero() {
                continue;
            }
            let k = p.len() - d;
            for (j, &c) in phi.iter().enumerate().take(d) {
                if c != 0 {
                    p[k + j] -= &top * q(c);
                }
            }
        }
        p.resize(d, BigRational::zero());
        CycNumber { m, coeffs: p }
    }

    /// Re-express in Q(ζ_big) where m divides big.
    pub fn lift(&self, big: u32) -> Self {
        assert!(big.is_multiple_of(self.m), "conductor {} does not divide {}", self.m, big);
        if big == self.m {
            return self.clone();
        }
        let s = (big / self.m) as usize;
        let mut p = vec![BigRational::zero(); s * (self.coeffs.len().saturating_sub(1)) + 1];
        for (j, c) in self.coeffs.iter().enumerate() {
            p[j * s] = c.clone();
        }
        Self::reduce(big, p)
    }

    fn common(&self, o: &Self) -> (Self, Self) {
        let m = lcm(self.m, o.m);
        (self.lift(m), o.lift(m))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        CycNumber { m: self.m, coeffs: self.coeffs.iter().map(|c| c * r).collect() }
    }

    pub fn scale_int(&self, n: i64) -> Self {
        self.scale(&q(n))
    }

    /// Multiplicative inverse via the extended Euclidean algorithm against Φ_m.
    pub fn inv(&self) -> Result<Self, Error> {
        if self.is_zero() {
            return Err(Error::Invalid("inverse of zero".into()));
        }
        let phi: Vec<BigRational> = cyclotomic_poly(self.m).iter().map(|&c| q(c)).collect();
        let a = trim(self.coeffs.clone());
        // s·a + t·phi = g, we only track s
        let (mut r0, mut r1) = (phi, a);
        let (mut s0, mut s1) = (vec![], vec![BigRational::one()]);
        while !(r1.len() == 1 || r1.is_empty()) {
            let (qt, r) = poly_divmod(&r0, &r1);
            let s2 = poly_sub(&s0, &poly_mul(&qt, &s1));
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = s2;
        }
        if r1.is_empty() {
            // a shares a factor with Φ_m, impossible for a nonzero reduced element
            return Err(Error::Invalid("non-invertible cyclotomic element".into()));
        }
        let c = r1[0].clone();
        let s: Vec<BigRational> = s1.iter().map(|x| x / &c).collect();
        Ok(Self::reduce(self.m, s))
    }

    /// Complex conjugation ζ ↦ ζ⁻¹.
    pub fn conj(&self) -> Self {
        let m = self.m as usize;
        let mut p = vec![BigRational::zero(); m.max(1)];
        for (j, c) in self.coeffs.iter().enumerate() {
            let e = (m - j) % m;
            p[e] += c;
        }
        Self::reduce(self.m, p)
    }

    pub fn is_real(&self) -> bool {
        *self == self.conj()
    }

    /// The rational value, or `None` when the element is irrational.
    pub fn to_rational(&self) -> Option<BigRational> {
        if self.coeffs.iter().skip(1).all(|c| c.is_zero()) {
            Some(self.coeffs.first().cloned().unwrap_or_else(BigRational::zero))
        } else {
            None
        }
    }

    pub fn to_integer(&self) -> Option<BigInt> {
        self.to_rational().filter(|r| r.is_integer()).map(|r| r.to_integer())
    }

    /// Numeric value under ζ_m ↦ exp(2πi/m), for diagnostics and ordering only.
    pub fn to_complex(&self) -> (f64, f64) {
        let (mut re, mut im) = (0.0, 0.0);
        for (j, c) in self.coeffs.iter().enumerate() {
            let x = c.to_f64().unwrap_or(f64::NAN);
            let t = 2.0 * std::f64::consts::PI * j as f64 / self.m as f64;
            re += x * t.cos();
            im += x * t.sin();
        }
        (re, im)
    }

    pub fn to_f64(&self) -> f64 {
        self.to_complex().0
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut r = CycNumber::one();
        for _ in 0..e {
            r = &r * self;
        }
        r
    }
}

fn trim(mut p: Vec<BigRational>) -> Vec<BigRational> {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
    p
}

fn poly_sub(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let n = a.len().max(b.len());
    let mut r = vec![BigRational::zero(); n];
    for (i, x) in a.iter().enumerate() {
        r[i] += x;
    }
    for (i, x) in b.iter().enumerate() {
        r[i] -= x;
    }
    trim(r)
}

fn poly_mul(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut r = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            r[i + j] += x * y;
        }
    }
    trim(r)
}

fn poly_divmod(a: &[BigRational], b: &[BigRational]) -> (Vec<BigRational>, Vec<BigRational>) {
    let mut r = trim(a.to_vec());
    let b = trim(b.to_vec());
    let db = b.len() - 1;
    let lead = b[db].clone();
    if r.len() < b.len() {
        return (vec![], r);
    }
    let mut qt = vec![BigRational::zero(); r.len() - db];
    while r.len() >= b.len() {
        let k = r.len() - b.len();
        let c = r.last().unwrap() / &lead;
        for (j, y) in b.iter().enumerate() {
            r[k + j] -= &c * y;
        }
        qt[k] = c;
        r.pop();
        r = trim(r);
    }
    (trim(qt), r)
}

impl PartialEq for CycNumber {
    fn eq(&self, o: &Self) -> bool {
        let (a, b) = self.common(o);
        a.coeffs == b.coeffs
    }
}

impl Eq for CycNumber {}

impl<'a> Add<&'a CycNumber> for &'a CycNumber {
    type Output = CycNumber;
    fn add(self, o: &CycNumber) -> CycNumber {
        let (mut a, b) = self.common(o);
        for (x, y) in a.coeffs.iter_mut().zip(b.coeffs) {
            *x += y;
        }
        a
    }
}

impl<'a> Sub<&'a CycNumber> for &'a CycNumber {
    type Output = CycNumber;
    fn sub(self, o: &CycNumber) -> CycNumber {
        let (mut a, b) = self.common(o);
        for (x, y) in a.coeffs.iter_mut().zip(b.coeffs) {
            *x -= y;
        }
        a
    }
}

impl<'a> Mul<&'a CycNumber> for &'a CycNumber {
    type Output = CycNumber;
    fn mul(self, o: &CycNumber) -> CycNumber {
        let (a, b) = self.common(o);
        let m = a.m;
        let mut p = vec![BigRational::zero(); (a.coeffs.len() + b.coeffs.len()).saturating_sub(1).max(1)];
        for (i, x) in a.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.coeffs.iter().enumerate() {
                if !y.is_zero() {
                    p[i + j] += x * y;
                }
            }
        }
        CycNumber::reduce(m, p)
    }
}

impl Add for CycNumber {
    type Output = CycNumber;
    fn add(self, o: CycNumber) -> CycNumber {
        &self + &o
    }
}

impl Sub for CycNumber {
    type Output = CycNumber;
    fn sub(self, o: CycNumber) -> CycNumber {
        &self - &o
    }
}

impl Mul for CycNumber {
    type Output = CycNumber;
    fn mul(self, o: CycNumber) -> CycNumber {
        &self * &o
    }
}

impl Neg for CycNumber {
    type Output = CycNumber;
    fn neg(self) -> CycNumber {
        self.scale_int(-1)
    }
}

impl std::iter::Sum for CycNumber {
    fn sum<I: Iterator<Item = CycNumber>>(it: I) -> CycNumber {
        it.fold(CycNumber::zero(), |a, b| &a + &b)
    }
}

impl fmt::Display for CycNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(r) = self.to_rational() {
            return write!(f, "{r}");
        }
        let mut first = true;
        for (j, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            first = false;
            let mono = match j {
                0 => String::new(),
                1 => format!("z{}", self.m),
                _ => format!("z{}^{}", self.m, j),
            };
            if j == 0 {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                f.write_str(&mono)?;
            } else {
                write!(f, "{mag}*{mono}")?;
            }
        }
        Ok(())
    }
}

/// Field operation selector, mirroring the four basic operations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CycOp {
    Add,
    Sub,
    Mul,
    Inv,
}

pub fn cyc_arith(op: CycOp, x: &CycNumber, y: Option<&CycNumber>) -> Result<CycNumber, Error> {
    let need = || y.ok_or_else(|| Error::Invalid("binary operation needs two operands".into()));
    Ok(match op {
        CycOp::Add => x + need()?,
        CycOp::Sub => x - need()?,
        CycOp::Mul => x * need()?,
        CycOp::Inv => x.inv()?,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Trig {
    Cot,
    Csc,
    Cos,
    Sin,
}

/// kind(kπ/m) exactly.
pub fn trig(kind: Trig, k: i64, m: u32) -> Result<CycNumber, Error> {
    assert!(m >= 1);
    let i = CycNumber::zeta_pow(4, 1);
    match kind {
        Trig::Cot => {
            if k.rem_euclid(m as i64) == 0 {
                return Err(Error::Invalid(format!("cot pole at {k}π/{m}")));
            }
            let z = CycNumber::zeta_pow(m, k);
            let num = &z + &CycNumber::one();
            let den = (&z - &CycNumber::one()).inv()?;
            Ok(&(&i * &num) * &den)
        }
        Trig::Csc => {
            if k.rem_euclid(m as i64) == 0 {
                return Err(Error::Invalid(format!("csc pole at {k}π/{m}")));
            }
            let z2 = CycNumber::zeta_pow(2 * m, k);
            let den = (&CycNumber::zeta_pow(m, k) - &CycNumber::one()).inv()?;
            Ok(&(&i.scale_int(2) * &z2) * &den)
        }
        Trig::Cos => {
            let a = CycNumber::zeta_pow(2 * m, k);
            let b = CycNumber::zeta_pow(2 * m, -k);
            Ok((&a + &b).scale(&BigRational::new(1.into(), 2.into())).lift(lcm(4, 2 * m)))
        }
        Trig::Sin => {
            let a = CycNumber::zeta_pow(2 * m, k);
            let b = CycNumber::zeta_pow(2 * m, -k);
            let two_i_inv = i.scale_int(2).inv()?;
            Ok(&(&a - &b) * &two_i_inv)
        }
    }
}

pub fn cot(k: i64, m: u32) -> CycNumber {
    trig(Trig::Cot, k, m).expect("cot argument off the pole set")
}

pub fn csc(k: i64, m: u32) -> CycNumber {
    trig(Trig::Csc, k, m).expect("csc argument off the pole set")
}

pub fn cos(k: i64, m: u32) -> CycNumber {
    trig(Trig::Cos, k, m).unwrap()
}

pub fn sin(k: i64, m: u32) -> CycNumber {
    trig(Trig::Sin, k, m).unwrap()
}

/// The four exact identities among cot/csc/cos at π/5 and 2π/5. Each entry
/// is a label and a list of expressions that must all be equal.
pub fn p5_identities() -> Vec<(&'static str, Vec<CycNumber>)> {
    let c1 = cot(1, 5);
    let c2 = cot(2, 5);
    let s1 = csc(1, 5);
    let s2 = csc(2, 5);
    let cc = &c1 * &c2;
    vec![
        (
            "cot^2(pi/5) - cot^2(2pi/5) = csc^2(pi/5) - csc^2(2pi/5) = 4 cot(pi/5) cot(2pi/5)",
            vec![&(&c1 * &c1) - &(&c2 * &c2), &(&s1 * &s1) - &(&s2 * &s2), cc.scale_int(4)],
        ),
        ("csc(pi/5) csc(2pi/5) = 4 cot(pi/5) cot(2pi/5)", vec![&s1 * &s2, cc.scale_int(4)]),
        (
            "csc(pi/5) cot(pi/5) + csc(2pi/5) cot(2pi/5) = 6 cot(pi/5) cot(2pi/5)",
            vec![&(&s1 * &c1) + &(&s2 * &c2), cc.scale_int(6)],
        ),
        (
            "5 cot(pi/5) cot(2pi/5) = 2(cos(pi/5) + cos(2pi/5))",
            vec![cc.scale_int(5), (&cos(1, 5) + &cos(2, 5)).scale_int(2)],
        ),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> CycNumber {
        CycNumber::from_int(n)
    }

    #[test]
    fn phi_polys() {
        assert_eq!(*cyclotomic_poly(1), vec![-1, 1]);
        assert_eq!(*cyclotomic_poly(4), vec![1, 0, 1]);
        assert_eq!(*cyclotomic_poly(6), vec![1, -1, 1]);
        assert_eq!(*cyclotomic_poly(12), vec![1, 0, -1, 0, 1]);
        assert_eq!(euler_phi(20), 8);
    }

    #[test]
    fn inverse_of_i() {
        let i = CycNumber::zeta_pow(4, 1);
        assert_eq!(i.inv().unwrap(), i.scale_int(-1));
        assert!(CycNumber::zero().inv().is_err());
    }

    #[test]
    fn conductor_lcm() {
        let a = CycNumber::zeta_pow(3, 1);
        let b = CycNumber::zeta_pow(4, 1);
        assert_eq!((&a + &b).conductor(), 12);
    }

    #[test]
    fn simple_values() {
        assert_eq!(cot(1, 4), r(1));
        assert_eq!(csc(1, 2), r(1));
        assert_eq!(cot(1, 2), r(0));
        assert_eq!(cot(1, 4).to_rational().unwrap(), BigRational::one());
        assert!(cot(1, 5).to_rational().is_none());
        assert!(trig(Trig::Cot, 5, 5).is_err());
    }

    #[test]
    fn p5_defect() {
        let mut s = CycNumber::zero();
        for e in 1..5 {
            let l = CycNumber::zeta_pow(5, e);
            let one = CycNumber::one();
            let num = &(&one + &l) * &(&one + &l);
            let den = &(&one - &l) * &(&one - &l);
            s = &s + &(&num * &den.inv().unwrap());
        }
        assert_eq!(s.to_rational().unwrap(), BigRational::from_integer((-4).into()));
    }

    #[test]
    fn identities_hold() {
        let ids = p5_identities();
        assert_eq!(ids.len(), 4);
        for (name, vals) in ids {
            for v in &vals[1..] {
                assert_eq!(&vals[0], v, "{name}");
            }
        }
    }

    #[test]
    fn float_agreement_and_reality() {
        for m in 1..=24u32 {
            for k in 0..(2 * m as i64) {
                let x = k as f64 * std::f64::consts::PI / m as f64;
                let c = cos(k, m);
                let s = sin(k, m);
                assert!((c.to_f64() - x.cos()).abs() < 1e-9);
                assert!((s.to_f64() - x.sin()).abs() < 1e-9);
                assert!(c.is_real() && s.is_real());
                assert_eq!(&(&c * &c) + &(&s * &s), CycNumber::one());
                if k % m as i64 != 0 {
                    let ct = cot(k, m);
                    let cs = csc(k, m);
                    assert!((ct.to_f64() - x.cos() / x.sin()).abs() < 1e-9, "cot {k}/{m}");
                    assert!((cs.to_f64() - 1.0 / x.sin()).abs() < 1e-9, "csc {k}/{m}");
                    assert!(ct.is_real() && cs.is_real());
                }
            }
        }
    }
}
