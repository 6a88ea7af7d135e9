//! Dense univariate polynomials over Z, lowest degree first.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::divisors;

#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntPolynomial {
    coeffs: Vec<BigInt>,
}

impl IntPolynomial {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(BigInt::one())
    }

    pub fn constant(c: BigInt) -> Self {
        Self::new(vec![c])
    }

    /// The monomial `x^k`.
    pub fn monomial(k: usize) -> Self {
        let mut coeffs = vec![BigInt::zero(); k + 1];
        coeffs[k] = BigInt::one();
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<BigInt> {
        self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&BigInt> {
        self.coeffs.last()
    }

    pub fn is_monic(&self) -> bool {
        self.leading().is_some_and(One::is_one)
    }

    pub fn coeff(&self, i: usize) -> BigInt {
        self.coeffs.get(i).cloned().unwrap_or_default()
    }

    pub fn add(&self, other: &Self) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..len).map(|i| self.coeff(i) + other.coeff(i)).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..len).map(|i| self.coeff(i) - other.coeff(i)).collect())
    }

    pub fn neg(&self) -> Self {
        Self::new(self.coeffs.iter().map(|c| -c).collect())
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        Self::new(self.coeffs.iter().map(|x| x * c).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    pub fn evaluate(&self, x: &BigInt) -> BigInt {
        self.coeffs
            .iter()
            .rev()
            .fold(BigInt::zero(), |acc, c| acc * x + c)
    }

    /// Quotient and remainder by a monic divisor.
    pub fn div_rem_monic(&self, divisor: &Self) -> (Self, Self) {
        assert!(divisor.is_monic(), "divisor must be monic");
        let dd = divisor.coeffs.len() - 1;
        if self.coeffs.len() <= dd {
            return (Self::zero(), self.clone());
        }
        let mut rem = self.coeffs.clone();
        let mut quot = vec![BigInt::zero(); rem.len() - dd];
        for i in (dd..rem.len()).rev() {
            let c = std::mem::take(&mut rem[i]);
            if c.is_zero() {
                continue;
            }
            for (j, dc) in divisor.coeffs[..dd].iter().enumerate() {
                rem[i - dd + j] -= &c * dc;
            }
            quot[i - dd] = c;
        }
        rem.truncate(dd);
        (Self::new(quot), Self::new(rem))
    }

    /// Remainder modulo a monic polynomial.
    pub fn rem_monic(&self, divisor: &Self) -> Self {
        self.div_rem_monic(divisor).1
    }

    fn content(&self) -> BigInt {
        self.coeffs
            .iter()
            .fold(BigInt::zero(), |acc, c| acc.gcd(c))
    }

    fn div_exact_scalar(&self, c: &BigInt) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .map(|x| {
                    debug_assert!((x % c).is_zero());
                    x / c
                })
                .collect(),
        )
    }

    /// Pseudo-remainder: `lc(b)^(deg a - deg b + 1) * a mod b`.
    fn pseudo_rem(&self, b: &Self) -> Self {
        let db = b.degree().expect("pseudo-division by zero");
        let lb = b.leading().unwrap().clone();
        let mut r = self.clone();
        let Some(da) = self.degree() else {
            return r;
        };
        if da < db {
            return r;
        }
        let mut e = da - db + 1;
        while let Some(dr) = r.degree() {
            if dr < db {
                break;
            }
            let lr = r.leading().unwrap().clone();
            let shift = dr - db;
            let mut coeffs: Vec<BigInt> = r.coeffs.iter().map(|c| c * &lb).collect();
            for (j, bc) in b.coeffs.iter().enumerate() {
                coeffs[shift + j] -= &lr * bc;
            }
            r = Self::new(coeffs);
            e -= 1;
        }
        r.scale(&num_traits::pow(lb, e))
    }
}

/// Resultant of two integer polynomials by the subresultant algorithm
/// (Collins), exact over Z.
pub fn resultant(a: &IntPolynomial, b: &IntPolynomial) -> BigInt {
    let (Some(da), Some(db)) = (a.degree(), b.degree()) else {
        return BigInt::zero();
    };
    if db == 0 {
        return num_traits::pow(b.coeff(0), da);
    }
    if da == 0 {
        return num_traits::pow(a.coeff(0), db);
    }
    let (ca, cb) = (a.content(), b.content());
    let mut a = a.div_exact_scalar(&ca);
    let mut b = b.div_exact_scalar(&cb);
    let t = num_traits::pow(ca, db) * num_traits::pow(cb, da);
    let mut s = BigInt::one();
    if da < db {
        std::mem::swap(&mut a, &mut b);
        if da % 2 == 1 && db % 2 == 1 {
            s = -s;
        }
    }
    let mut g = BigInt::one();
    let mut h = BigInt::one();
    loop {
        let (dega, degb) = (a.degree().unwrap(), b.degree().unwrap());
        let delta = dega - degb;
        if dega % 2 == 1 && degb % 2 == 1 {
            s = -s;
        }
        let r = a.pseudo_rem(&b);
        if r.is_zero() {
            return BigInt::zero();
        }
        a = b;
        b = r.div_exact_scalar(&(&g * num_traits::pow(h.clone(), delta)));
        g = a.leading().unwrap().clone();
        h = if delta == 0 {
            h
        } else {
            num_traits::pow(g.clone(), delta) / num_traits::pow(h, delta - 1)
        };
        if b.degree() == Some(0) {
            let dega = a.degree().unwrap();
            let lb = b.leading().unwrap().clone();
            let hh = num_traits::pow(lb, dega) / num_traits::pow(h, dega - 1);
            return s * t * hh;
        }
    }
}

/// The `n`-th cyclotomic polynomial, obtained by exact division of
/// `x^n - 1` by the cyclotomic polynomials of the proper divisors of `n`.
pub fn cyclotomic_polynomial(n: u64) -> IntPolynomial {
    assert!(n >= 1, "cyclotomic polynomial needs n >= 1");
    let mut table: Vec<(u64, IntPolynomial)> = Vec::new();
    for m in divisors(n) {
        let mut p = IntPolynomial::monomial(m as usize).sub(&IntPolynomial::one());
        for (dm, phi) in &table {
            if m % dm == 0 {
                let (q, r) = p.div_rem_monic(phi);
                debug_assert!(r.is_zero());
                p = q;
            }
        }
        table.push((m, p));
    }
    table.pop().unwrap().1
}

impl fmt::Debug for IntPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for IntPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let a = c.abs();
            match (i, a.is_one()) {
                (0, _) => write!(f, "{a}")?,
                (1, true) => write!(f, "x")?,
                (1, false) => write!(f, "{a}x")?,
                (_, true) => write!(f, "x^{i}")?,
                (_, false) => write!(f, "{a}x^{i}")?,
            }
        }
        Ok(())
    }
}
