//! Exact arithmetic in `Z[ξ_n]` in the power basis `1, ξ, …, ξ^(d-1)`.
//!
//! Elements are coefficient vectors of length `d = φ(n)`; the coefficient
//! vector is at the same time the Cartesian embedding into `Z^d`.

use std::fmt;
use std::sync::Arc;

use num_bigint::{BigInt, Sign};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{euler_phi, gcd, mod_inverse};
use crate::error::{Error, Result};
use crate::poly::{cyclotomic_polynomial, resultant, IntPolynomial};

/// Check the conductor convention `n > 2`, `n ≢ 2 (mod 4)`.
pub fn validate_conductor(n: u64) -> Result<()> {
    if n <= 2 {
        return Err(Error::InvalidConductor {
            n,
            reason: "conductor must exceed 2".into(),
        });
    }
    if n % 4 == 2 {
        return Err(Error::InvalidConductor {
            n,
            reason: format!("n ≡ 2 mod 4 duplicates the field of conductor {}", n / 2),
        });
    }
    Ok(())
}

/// Shared data for one conductor: the modulus `Φ_n` and the reduced powers
/// of `ξ_n`.
pub struct CyclotomicRing {
    n: u64,
    d: usize,
    phi: IntPolynomial,
    /// `xi_powers[e]` is the reduced coefficient vector of `ξ^e`, `0 <= e < n`.
    xi_powers: Vec<Vec<i64>>,
}

impl CyclotomicRing {
    pub fn new(n: u64) -> Result<Arc<Self>> {
        validate_conductor(n)?;
        Ok(Arc::new(Self::build(n)))
    }

    /// Any `n >= 1`, without the conductor convention. Used where the
    /// ambient ring of `n`-th roots of unity is needed for its own sake.
    pub(crate) fn new_any(n: u64) -> Arc<Self> {
        assert!(n >= 1);
        Arc::new(Self::build(n))
    }

    fn build(n: u64) -> Self {
        let phi = cyclotomic_polynomial(n);
        let d = phi.degree().unwrap();
        let xi_powers = (0..n as usize)
            .map(|e| {
                let r = IntPolynomial::monomial(e).rem_monic(&phi);
                (0..d)
                    .map(|i| r.coeff(i).to_i64().expect("small power coefficient"))
                    .collect()
            })
            .collect();
        Self {
            n,
            d,
            phi,
            xi_powers,
        }
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// Rank `φ(n)`.
    pub fn degree(&self) -> usize {
        self.d
    }

    pub fn modulus(&self) -> &IntPolynomial {
        &self.phi
    }

    pub fn xi_power_coeffs(&self, e: u64) -> &[i64] {
        &self.xi_powers[(e % self.n) as usize]
    }

    pub fn zero(self: &Arc<Self>) -> CycInt {
        CycInt {
            ring: Arc::clone(self),
            coeffs: vec![BigInt::zero(); self.d],
        }
    }

    pub fn one(self: &Arc<Self>) -> CycInt {
        self.integer(BigInt::one())
    }

    pub fn integer(self: &Arc<Self>, c: BigInt) -> CycInt {
        let mut z = self.zero();
        z.coeffs[0] = c;
        z
    }

    /// `ξ_n^e` for any integer exponent.
    pub fn xi_pow(self: &Arc<Self>, e: i64) -> CycInt {
        let e = e.rem_euclid(self.n as i64) as u64;
        CycInt {
            ring: Arc::clone(self),
            coeffs: self
                .xi_power_coeffs(e)
                .iter()
                .map(|&c| BigInt::from(c))
                .collect(),
        }
    }

    /// Canonical representative of a polynomial in `ξ_n` modulo `Φ_n`.
    pub fn reduce(self: &Arc<Self>, p: &IntPolynomial) -> CycInt {
        self.reduce_coeffs(p.coeffs())
    }

    fn reduce_coeffs(self: &Arc<Self>, coeffs: &[BigInt]) -> CycInt {
        let mut out = vec![BigInt::zero(); self.d];
        for (e, c) in coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if e < self.d {
                out[e] += c;
            } else {
                for (o, &t) in out.iter_mut().zip(self.xi_power_coeffs(e as u64)) {
                    if t != 0 {
                        *o += c * t;
                    }
                }
            }
        }
        CycInt {
            ring: Arc::clone(self),
            coeffs: out,
        }
    }

    /// Inverse of the Cartesian embedding.
    pub fn unembed(self: &Arc<Self>, v: &[BigInt]) -> Result<CycInt> {
        if v.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: v.len(),
            });
        }
        Ok(CycInt {
            ring: Arc::clone(self),
            coeffs: v.to_vec(),
        })
    }

    pub fn unembed_i64(self: &Arc<Self>, v: &[i64]) -> Result<CycInt> {
        let v: Vec<BigInt> = v.iter().map(|&c| BigInt::from(c)).collect();
        self.unembed(&v)
    }

    pub fn galois_index(&self, r: i64) -> Result<GaloisIndex> {
        GaloisIndex::new(r, self.n)
    }
}

impl fmt::Debug for CyclotomicRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Z[ξ_{}]", self.n)
    }
}

/// An element of `Z[ξ_n]`.
#[derive(Clone)]
pub struct CycInt {
    ring: Arc<CyclotomicRing>,
    coeffs: Vec<BigInt>,
}

impl CycInt {
    pub fn ring(&self) -> &Arc<CyclotomicRing> {
        &self.ring
    }

    pub fn n(&self) -> u64 {
        self.ring.n
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn as_polynomial(&self) -> IntPolynomial {
        IntPolynomial::new(self.coeffs.clone())
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.ring.n != other.ring.n {
            return Err(Error::ConductorMismatch {
                left: self.ring.n,
                right: other.ring.n,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self {
            ring: Arc::clone(&self.ring),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self {
            ring: Arc::clone(&self.ring),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn neg(&self) -> Self {
        Self {
            ring: Arc::clone(&self.ring),
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        Self {
            ring: Arc::clone(&self.ring),
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let d = self.ring.d;
        let mut prod = vec![BigInt::zero(); 2 * d - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    prod[i + j] += a * b;
                }
            }
        }
        Ok(self.ring.reduce_coeffs(&prod))
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = self.ring.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base).unwrap();
            }
            base = base.mul(&base).unwrap();
            e >>= 1;
        }
        acc
    }

    /// `σ_r`: substitute `ξ → ξ^r` and reduce.
    pub fn galois_apply(&self, r: GaloisIndex) -> Result<Self> {
        if r.modulus != self.ring.n {
            return Err(Error::ConductorMismatch {
                left: self.ring.n,
                right: r.modulus,
            });
        }
        let n = self.ring.n;
        let mut spread = vec![BigInt::zero(); n as usize];
        for (i, c) in self.coeffs.iter().enumerate() {
            spread[((i as u64 * r.r) % n) as usize] += c;
        }
        Ok(self.ring.reduce_coeffs(&spread))
    }

    /// Field norm `N(a) = Res(Φ_n, a)`.
    pub fn norm(&self) -> BigInt {
        if self.is_zero() {
            return BigInt::zero();
        }
        resultant(&self.ring.phi, &self.as_polynomial())
    }

    /// The Cartesian embedding `ι`.
    pub fn embed(&self) -> Vec<BigInt> {
        self.coeffs.clone()
    }

    /// Embedding as machine integers, `None` on overflow.
    pub fn embed_i64(&self) -> Option<Vec<i64>> {
        self.coeffs.iter().map(ToPrimitive::to_i64).collect()
    }

    pub fn is_unit(&self) -> bool {
        self.norm().abs().is_one()
    }

    /// Inverse of a unit: `ε^{-1} = N(ε) · Π_{r ≠ 1} σ_r(ε)`.
    pub fn unit_inverse(&self) -> Result<Self> {
        let norm = self.norm();
        if !norm.abs().is_one() {
            return Err(Error::NotAUnit(norm.to_string()));
        }
        let n = self.ring.n;
        let mut acc = self.ring.one();
        for r in 2..n {
            if gcd(r, n) == 1 {
                acc = acc.mul(&self.galois_apply(GaloisIndex { r, modulus: n })?)?;
            }
        }
        if norm.sign() == Sign::Minus {
            acc = acc.neg();
        }
        debug_assert!(acc.mul(self).unwrap() == self.ring.one());
        Ok(acc)
    }
}

impl PartialEq for CycInt {
    fn eq(&self, other: &Self) -> bool {
        self.ring.n == other.ring.n && self.coeffs == other.coeffs
    }
}

impl Eq for CycInt {}

impl fmt::Debug for CycInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CycInt(n={}, {:?})", self.ring.n, self.coeffs)
    }
}

impl fmt::Display for CycInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.as_polynomial().to_string().replace('x', "ξ");
        write!(f, "{s}")
    }
}

/// JSON form: `{"n": 4, "coeffs": ["1", "-2"]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycIntJson {
    pub n: u64,
    pub coeffs: Vec<String>,
}

impl From<&CycInt> for CycIntJson {
    fn from(x: &CycInt) -> Self {
        Self {
            n: x.n(),
            coeffs: x.coeffs.iter().map(ToString::to_string).collect(),
        }
    }
}

impl TryFrom<CycIntJson> for CycInt {
    type Error = Error;

    fn try_from(j: CycIntJson) -> Result<Self> {
        let ring = CyclotomicRing::new(j.n)?;
        let v = j
            .coeffs
            .iter()
            .map(|s| {
                s.parse::<BigInt>()
                    .map_err(|_| Error::InvalidParameter(format!("not an integer: {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        ring.unembed(&v)
    }
}

impl Serialize for CycInt {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CycIntJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for CycInt {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = CycIntJson::deserialize(d)?;
        CycInt::try_from(j).map_err(serde::de::Error::custom)
    }
}

/// A residue `r ∈ (Z/nZ)^×`, naming the automorphism `σ_r: ξ ↦ ξ^r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GaloisIndex {
    r: u64,
    modulus: u64,
}

impl GaloisIndex {
    pub fn new(r: i64, n: u64) -> Result<Self> {
        let r = r.rem_euclid(n as i64) as u64;
        if gcd(r, n) != 1 {
            return Err(Error::InvalidGaloisIndex { r, n });
        }
        Ok(Self { r, modulus: n })
    }

    pub fn identity(n: u64) -> Self {
        Self { r: 1 % n, modulus: n }
    }

    pub fn value(self) -> u64 {
        self.r
    }

    pub fn modulus(self) -> u64 {
        self.modulus
    }

    /// `σ_r ∘ σ_s = σ_{rs}`.
    pub fn compose(self, other: Self) -> Self {
        assert_eq!(self.modulus, other.modulus);
        Self {
            r: crate::arith::mul_mod(self.r, other.r, self.modulus),
            modulus: self.modulus,
        }
    }

    pub fn inverse(self) -> Self {
        Self {
            r: mod_inverse(self.r, self.modulus).expect("unit residue"),
            modulus: self.modulus,
        }
    }
}

/// `φ(n)` for a conductor.
pub fn rank(n: u64) -> usize {
    euler_phi(n) as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    fn el(ring: &Arc<CyclotomicRing>, c: &[i64]) -> CycInt {
        ring.unembed_i64(c).unwrap()
    }

    #[test]
    fn conductor_convention() {
        assert!(CyclotomicRing::new(2).is_err());
        let err = CyclotomicRing::new(6).unwrap_err();
        assert!(err.to_string().contains("conductor 3"));
        assert!(CyclotomicRing::new(1).is_err());
        assert!(CyclotomicRing::new(12).is_ok());
    }

    #[test]
    fn reduction_examples() {
        let r4 = CyclotomicRing::new(4).unwrap();
        assert_eq!(r4.reduce(&IntPolynomial::monomial(4)), el(&r4, &[1, 0]));
        assert_eq!(r4.reduce(&IntPolynomial::monomial(2)), el(&r4, &[-1, 0]));
        let r5 = CyclotomicRing::new(5).unwrap();
        let p = IntPolynomial::from_i64(&[1, 1, 1, 1]);
        assert_eq!(r5.reduce(&p), el(&r5, &[1, 1, 1, 1]));
        // ξ^4 = -(1 + ξ + ξ^2 + ξ^3)
        assert_eq!(r5.xi_pow(4), el(&r5, &[-1, -1, -1, -1]));
        let phi_at_xi = r5.reduce(r5.modulus());
        assert!(phi_at_xi.is_zero());
    }

    #[test]
    fn multiplication_examples() {
        let r = CyclotomicRing::new(4).unwrap();
        let i = r.xi_pow(1);
        assert_eq!(r.one().mul(&i).unwrap(), i);
        assert_eq!(i.mul(&i).unwrap(), el(&r, &[-1, 0]));
        let a = el(&r, &[1, 1]);
        let b = el(&r, &[1, -1]);
        assert_eq!(a.mul(&b).unwrap(), el(&r, &[2, 0]));
        let r3 = CyclotomicRing::new(3).unwrap();
        assert!(matches!(
            r3.one().mul(&i),
            Err(Error::ConductorMismatch { .. })
        ));
    }

    #[test]
    fn galois_examples() {
        let r = CyclotomicRing::new(4).unwrap();
        let i = r.xi_pow(1);
        let s3 = r.galois_index(3).unwrap();
        assert_eq!(i.galois_apply(s3).unwrap(), el(&r, &[0, -1]));
        assert_eq!(i.galois_apply(GaloisIndex::identity(4)).unwrap(), i);
        assert!(r.galois_index(2).is_err());

        let r12 = CyclotomicRing::new(12).unwrap();
        let x = el(&r12, &[3, -1, 4, 2]);
        let units = [1i64, 5, 7, 11];
        for &a in &units {
            for &b in &units {
                let sa = r12.galois_index(a).unwrap();
                let sb = r12.galois_index(b).unwrap();
                let lhs = x.galois_apply(sb).unwrap().galois_apply(sa).unwrap();
                let rhs = x.galois_apply(sa.compose(sb)).unwrap();
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn norm_examples() {
        let r = CyclotomicRing::new(4).unwrap();
        assert_eq!(r.one().norm(), BigInt::from(1));
        assert_eq!(el(&r, &[1, 1]).norm(), BigInt::from(2));
        assert_eq!(el(&r, &[3, 4]).norm(), BigInt::from(25));
        let r12 = CyclotomicRing::new(12).unwrap();
        let z = r12.one().sub(&r12.xi_pow(1)).unwrap();
        assert_eq!(z.norm().abs(), BigInt::from(1));
        let r5 = CyclotomicRing::new(5).unwrap();
        assert_eq!(el(&r5, &[1, 1, 0, 0]).norm(), BigInt::from(1));
        // N(1 - ξ_p) = p
        assert_eq!(el(&r5, &[1, -1, 0, 0]).norm(), BigInt::from(5));
    }

    #[test]
    fn embedding_examples() {
        let r5 = CyclotomicRing::new(5).unwrap();
        let x = r5.xi_pow(2);
        assert_eq!(x.embed_i64().unwrap(), vec![0, 0, 1, 0]);
        assert_eq!(r5.zero().embed_i64().unwrap(), vec![0; 4]);
        assert!(r5.unembed_i64(&[1, 2]).is_err());
    }

    #[test]
    fn unit_inverse_roundtrip() {
        let r12 = CyclotomicRing::new(12).unwrap();
        let z = r12.one().sub(&r12.xi_pow(1)).unwrap();
        let zi = z.unit_inverse().unwrap();
        assert_eq!(z.mul(&zi).unwrap(), r12.one());
        assert!(r12.integer(BigInt::from(2)).unit_inverse().is_err());
    }

    #[test]
    fn json_form() {
        let r = CyclotomicRing::new(4).unwrap();
        let x = el(&r, &[1, -2]);
        let s = serde_json::to_string(&x).unwrap();
        assert_eq!(s, r#"{"n":4,"coeffs":["1","-2"]}"#);
        let back: CycInt = serde_json::from_str(&s).unwrap();
        assert_eq!(back, x);
        assert!(serde_json::from_str::<CycInt>(r#"{"n":4,"coeffs":["1"]}"#).is_err());
    }
}
