//! Prime ideals of `Z[ξ_n]`, valuations, and the k-free predicates.
//!
//! A prime `𝔭 | ℓ` is stored as the pair `(ℓ, g)` where `g` is a monic
//! irreducible factor of `Φ_n mod ℓ`; then `𝔭 = (ℓ, g(ξ_n))`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{euler_phi, factor_biguint, is_prime, multiplicative_order, primes_up_to};
use crate::cyclotomic::{validate_conductor, CycInt, CyclotomicRing};
use crate::error::{Error, Result};
use crate::fp_poly::factor_poly_mod_p;
use crate::lattice::{ideal_power_step, unit_lattice, IdealLattice};
use crate::poly::IntPolynomial;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "PrimeIdealJson", into = "PrimeIdealJson")]
pub struct PrimeIdeal {
    pub ell: u64,
    pub n: u64,
    pub e: u32,
    pub f: u32,
    g_poly: IntPolynomial,
}

impl PrimeIdeal {
    pub fn g_poly(&self) -> &IntPolynomial {
        &self.g_poly
    }

    /// `g_poly` coefficients, lowest degree first, in `0..ℓ`.
    pub fn g_coeffs(&self) -> Vec<u64> {
        self.g_poly
            .coeffs()
            .iter()
            .map(|c| c.to_u64().expect("lifted coefficient"))
            .collect()
    }

    pub fn norm_big(&self) -> BigInt {
        num_traits::pow(BigInt::from(self.ell), self.f as usize)
    }

    /// `ℓ^f`, or `None` past `u128`.
    pub fn norm(&self) -> Option<u128> {
        (self.ell as u128).checked_pow(self.f)
    }

    pub fn is_ramified(&self) -> bool {
        self.e > 1
    }

    fn sort_key(&self) -> (Option<u128>, u64, Vec<u64>) {
        (self.norm(), self.ell, self.g_coeffs())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PrimeIdealJson {
    ell: u64,
    n: u64,
    e: u32,
    f: u32,
    g_poly: Vec<u64>,
}

impl From<PrimeIdeal> for PrimeIdealJson {
    fn from(p: PrimeIdeal) -> Self {
        Self {
            g_poly: p.g_coeffs(),
            ell: p.ell,
            n: p.n,
            e: p.e,
            f: p.f,
        }
    }
}

impl TryFrom<PrimeIdealJson> for PrimeIdeal {
    type Error = Error;

    fn try_from(j: PrimeIdealJson) -> Result<Self> {
        let g: Vec<BigInt> = j.g_poly.iter().map(|&c| BigInt::from(c)).collect();
        let g_poly = IntPolynomial::new(g);
        split_prime(j.ell, j.n)?
            .into_iter()
            .find(|p| p.g_poly == g_poly && p.e == j.e && p.f == j.f)
            .ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "({}, {:?}) is not a prime ideal of conductor {}",
                    j.ell, j.g_poly, j.n
                ))
            })
    }
}

/// `(e, f, g)` for `ℓ` in `Q(ξ_n)`, from orders alone.
pub fn splitting_type(ell: u64, n: u64) -> Result<(u32, u32, u64)> {
    if !is_prime(ell) {
        return Err(Error::NotPrime(ell));
    }
    let mut m = n;
    let mut ell_part = 1u64;
    while m.is_multiple_of(ell) {
        m /= ell;
        ell_part *= ell;
    }
    let e = euler_phi(ell_part) as u32;
    let f = if m == 1 {
        1
    } else {
        multiplicative_order(ell % m, m).expect("ℓ coprime to m") as u32
    };
    let g = euler_phi(n) / (e as u64 * f as u64);
    Ok((e, f, g))
}

/// All prime ideals above `ell`, in canonical order.
pub fn split_prime(ell: u64, n: u64) -> Result<Vec<PrimeIdeal>> {
    validate_conductor(n)?;
    let (e, f, g) = splitting_type(ell, n)?;
    let phi = crate::poly::cyclotomic_polynomial(n);
    let mut out: Vec<PrimeIdeal> = factor_poly_mod_p(&phi, ell)?
        .into_iter()
        .map(|(fac, mult)| {
            debug_assert_eq!(mult, e);
            debug_assert_eq!(fac.degree(), Some(f as usize));
            PrimeIdeal {
                ell,
                n,
                e: mult,
                f: fac.degree().unwrap_or(0) as u32,
                g_poly: fac.to_int_poly(),
            }
        })
        .collect();
    out.sort_by_key(PrimeIdeal::sort_key);
    debug_assert_eq!(out.len() as u64, g);
    Ok(out)
}

/// Every prime ideal of norm at most `norm_bound`, sorted by `(norm, ℓ, g)`.
pub fn enumerate_prime_ideals(n: u64, norm_bound: u64) -> Result<Vec<PrimeIdeal>> {
    validate_conductor(n)?;
    let mut out = Vec::new();
    for ell in primes_up_to(norm_bound) {
        let (_, f, _) = splitting_type(ell, n)?;
        if (ell as u128).checked_pow(f).is_some_and(|q| q <= norm_bound as u128) {
            out.extend(split_prime(ell, n)?);
        }
    }
    out.sort_by_key(PrimeIdeal::sort_key);
    Ok(out)
}

type LatticeChain = Arc<Mutex<Vec<Arc<IdealLattice>>>>;

/// Per-ring memo of splittings and ideal-power lattices, safe to share
/// between threads.
pub struct IdealCache {
    ring: Arc<CyclotomicRing>,
    splits: Mutex<HashMap<u64, Arc<Vec<PrimeIdeal>>>>,
    powers: Mutex<HashMap<PrimeIdeal, LatticeChain>>,
}

impl IdealCache {
    pub fn new(ring: Arc<CyclotomicRing>) -> Self {
        Self {
            ring,
            splits: Mutex::new(HashMap::new()),
            powers: Mutex::new(HashMap::new()),
        }
    }

    pub fn ring(&self) -> &Arc<CyclotomicRing> {
        &self.ring
    }

    pub fn split(&self, ell: u64) -> Result<Arc<Vec<PrimeIdeal>>> {
        if let Some(s) = self.splits.lock().unwrap().get(&ell) {
            return Ok(s.clone());
        }
        let s = Arc::new(split_prime(ell, self.ring.n())?);
        Ok(self.splits.lock().unwrap().entry(ell).or_insert(s).clone())
    }

    /// `ι(𝔭^m)`, built incrementally and memoised.
    pub fn lattice(&self, ideal: &PrimeIdeal, m: u32) -> Result<Arc<IdealLattice>> {
        let chain = self
            .powers
            .lock()
            .unwrap()
            .entry(ideal.clone())
            .or_insert_with(|| Arc::new(Mutex::new(vec![Arc::new(unit_lattice(&self.ring))])))
            .clone();
        let mut chain = chain.lock().unwrap();
        while chain.len() <= m as usize {
            let step = chain.len() as u32;
            let next = ideal_power_step(&self.ring, ideal, chain.last().unwrap(), step)?;
            chain.push(Arc::new(next));
        }
        Ok(chain[m as usize].clone())
    }

    fn check_ring(&self, x: &CycInt) -> Result<()> {
        if x.n() != self.ring.n() {
            return Err(Error::ConductorMismatch {
                left: self.ring.n(),
                right: x.n(),
            });
        }
        Ok(())
    }

    /// Exact `v_𝔭(x)`.
    pub fn valuation(&self, x: &CycInt, ideal: &PrimeIdeal) -> Result<u32> {
        self.check_ring(x)?;
        if x.is_zero() {
            return Err(Error::ZeroElement);
        }
        // N(𝔭)^v divides N(x), so v <= v_ℓ(N(x)) / f.
        let cap = ell_valuation(&x.norm(), ideal.ell) / ideal.f;
        let mut v = 0;
        while v < cap && self.lattice(ideal, v + 1)?.contains(x)? {
            v += 1;
        }
        Ok(v)
    }

    /// Prime ideal factorisation of `(x)`, in canonical ideal order.
    pub fn factor_element(&self, x: &CycInt) -> Result<Vec<(PrimeIdeal, u32)>> {
        self.check_ring(x)?;
        if x.is_zero() {
            return Err(Error::ZeroElement);
        }
        let mut out = Vec::new();
        for (ell, _) in factor_abs_norm(x)? {
            let ell = u64::try_from(ell).map_err(|_| Error::Overflow("prime above 2^64"))?;
            for p in self.split(ell)?.iter() {
                let v = self.valuation(x, p)?;
                if v > 0 {
                    out.push((p.clone(), v));
                }
            }
        }
        Ok(out)
    }

    /// `(x)` has no `k`-th prime power factor. Zero is never k-free.
    pub fn is_kfree(&self, x: &CycInt, k: u32) -> Result<bool> {
        self.check_ring(x)?;
        check_k(k)?;
        if x.is_zero() {
            return Ok(false);
        }
        for (ell, v) in factor_abs_norm(x)? {
            if v < k {
                continue;
            }
            let ell = u64::try_from(ell).map_err(|_| Error::Overflow("prime above 2^64"))?;
            for p in self.split(ell)?.iter() {
                if p.f * k <= v && self.lattice(p, k)?.contains(x)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// k-free, and divisible only by primes above divisors of `n`.
    pub fn is_in_wk(&self, x: &CycInt, k: u32) -> Result<bool> {
        if !self.is_kfree(x, k)? {
            return Ok(false);
        }
        let n = self.ring.n() as u128;
        Ok(factor_abs_norm(x)?.iter().all(|&(ell, _)| n.is_multiple_of(ell)))
    }
}

fn check_k(k: u32) -> Result<()> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("k must be at least 2, got {k}")));
    }
    Ok(())
}

fn factor_abs_norm(x: &CycInt) -> Result<Vec<(u128, u32)>> {
    let nrm: BigUint = x.norm().abs().to_biguint().expect("absolute value");
    if nrm.is_one() {
        return Ok(Vec::new());
    }
    factor_biguint(&nrm)
}

fn ell_valuation(v: &BigInt, ell: u64) -> u32 {
    let ell = BigInt::from(ell);
    let mut v = v.abs();
    let mut e = 0;
    while !v.is_zero() && (&v % &ell).is_zero() {
        v /= &ell;
        e += 1;
    }
    e
}

pub fn valuation(x: &CycInt, ideal: &PrimeIdeal) -> Result<u32> {
    IdealCache::new(x.ring().clone()).valuation(x, ideal)
}

pub fn is_kfree(x: &CycInt, k: u32) -> Result<bool> {
    IdealCache::new(x.ring().clone()).is_kfree(x, k)
}

pub fn is_in_wk(x: &CycInt, k: u32) -> Result<bool> {
    IdealCache::new(x.ring().clone()).is_in_wk(x, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn el(n: u64, c: &[i64]) -> CycInt {
        let ring = CyclotomicRing::new(n).unwrap();
        let mut c = c.to_vec();
        c.resize(ring.degree(), 0);
        ring.unembed_i64(&c).unwrap()
    }

    fn gi(n: u64) -> CycInt {
        el(n, &[0, 1])
    }

    #[test]
    fn split_examples() {
        let five = split_prime(5, 4).unwrap();
        assert_eq!(five.len(), 2);
        assert!(five.iter().all(|p| p.e == 1 && p.f == 1));
        let gs: Vec<Vec<u64>> = five.iter().map(PrimeIdeal::g_coeffs).collect();
        assert_eq!(gs, vec![vec![2, 1], vec![3, 1]]);

        let two = split_prime(2, 4).unwrap();
        assert_eq!(two.len(), 1);
        assert_eq!((two[0].e, two[0].f), (2, 1));
        assert_eq!(two[0].g_coeffs(), vec![1, 1]);

        let t = split_prime(13, 12).unwrap();
        assert_eq!(t.len(), 4);
        assert!(t.iter().all(|p| p.norm() == Some(13)));

        assert!(matches!(split_prime(9, 4), Err(Error::NotPrime(9))));
        assert!(split_prime(3, 6).is_err());
    }

    #[test]
    fn splitting_sums() {
        for n in [3u64, 4, 5, 7, 8, 9, 12, 15, 16] {
            let phi = euler_phi(n);
            for ell in primes_up_to(200) {
                let ps = split_prime(ell, n).unwrap();
                let sum: u64 = ps.iter().map(|p| (p.e * p.f) as u64).sum();
                assert_eq!(sum, phi, "n={n} ℓ={ell}");
                assert_eq!(ps.iter().any(|p| p.e > 1), n % ell == 0);
                let prod = ps.iter().fold(BigInt::one(), |a, p| a * num_traits::pow(p.norm_big(), p.e as usize));
                assert_eq!(prod, num_traits::pow(BigInt::from(ell), phi as usize));
            }
        }
    }

    #[test]
    fn valuation_examples() {
        let p2 = split_prime(2, 4).unwrap().remove(0);
        assert_eq!(valuation(&el(4, &[1]), &p2).unwrap(), 0);
        assert_eq!(valuation(&el(4, &[1, 1]), &p2).unwrap(), 1);
        assert_eq!(valuation(&el(4, &[2]), &p2).unwrap(), 2);
        assert_eq!(valuation(&el(4, &[4]), &p2).unwrap(), 4);
        assert!(matches!(valuation(&el(4, &[0]), &p2), Err(Error::ZeroElement)));
    }

    #[test]
    fn enumeration() {
        let ids = enumerate_prime_ideals(4, 5).unwrap();
        let norms: Vec<u128> = ids.iter().map(|p| p.norm().unwrap()).collect();
        assert_eq!(norms, vec![2, 5, 5]);
        assert!(enumerate_prime_ideals(4, 1).unwrap().is_empty());
        for n in [4u64, 5, 12] {
            let by_enum = enumerate_prime_ideals(n, 100).unwrap().len() as u64;
            let by_type: u64 = primes_up_to(100)
                .into_iter()
                .map(|ell| {
                    let (_, f, g) = splitting_type(ell, n).unwrap();
                    if (ell as u128).pow(f) <= 100 { g } else { 0 }
                })
                .sum();
            assert_eq!(by_enum, by_type, "n = {n}");
        }
    }

    #[test]
    fn kfree_examples() {
        let four = el(4, &[4]);
        assert!(!is_kfree(&four, 2).unwrap());
        assert!(!is_kfree(&four, 4).unwrap());
        assert!(is_kfree(&four, 5).unwrap());
        assert!(!is_kfree(&el(4, &[0]), 2).unwrap());
        assert!(is_kfree(&gi(4), 2).unwrap());
        assert!(is_kfree(&el(12, &[0, 0, 1, -1]), 3).unwrap());
        assert!(is_kfree(&el(4, &[1, 1]), 2).unwrap());
        assert!(is_kfree(&el(4, &[1, 1]), 1).is_err());
        // (2+i)^2 = 3+4i
        assert!(!is_kfree(&el(4, &[3, 4]), 2).unwrap());
        assert!(is_kfree(&el(4, &[5]), 2).unwrap());
    }

    #[test]
    fn wk_examples() {
        assert!(is_in_wk(&gi(4).pow(3), 2).unwrap());
        assert!(is_in_wk(&el(4, &[1, 1]), 2).unwrap());
        assert!(!is_in_wk(&el(4, &[1, 2]), 2).unwrap());
        assert!(!is_in_wk(&el(4, &[2]), 2).unwrap());
    }

    #[test]
    fn prime_ideal_json() {
        let p = split_prime(13, 12).unwrap().remove(2);
        let s = serde_json::to_string(&p).unwrap();
        assert!(s.contains("\"g_poly\":["), "{s}");
        let back: PrimeIdeal = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
        let bad = r#"{"ell":13,"n":12,"e":1,"f":1,"g_poly":[1,1]}"#;
        assert!(serde_json::from_str::<PrimeIdeal>(bad).is_err());
    }

    #[test]
    fn norm_factorisation_from_valuations() {
        let cache = IdealCache::new(CyclotomicRing::new(12).unwrap());
        for c in [[3i64, -1, 4, 2], [6, 0, 0, 6], [1, 1, 1, 0], [-8, 2, 5, 5]] {
            let x = cache.ring().unembed_i64(&c).unwrap();
            let fac = cache.factor_element(&x).unwrap();
            let rebuilt = fac
                .iter()
                .fold(BigInt::one(), |a, (p, v)| a * num_traits::pow(p.norm_big(), *v as usize));
            assert_eq!(rebuilt, x.norm().abs());
        }
    }

    fn small_vec(d: usize) -> impl Strategy<Value = Vec<i64>> {
        prop::collection::vec(-6i64..=6, d)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn valuation_is_additive(a in small_vec(4), b in small_vec(4), which in 0usize..6) {
            let cache = IdealCache::new(CyclotomicRing::new(12).unwrap());
            let x = cache.ring().unembed_i64(&a).unwrap();
            let y = cache.ring().unembed_i64(&b).unwrap();
            prop_assume!(!x.is_zero() && !y.is_zero());
            let ps: Vec<PrimeIdeal> = [2u64, 3, 13].iter().flat_map(|&l| cache.split(l).unwrap().to_vec()).collect();
            let p = &ps[which % ps.len()];
            let xy = x.mul(&y).unwrap();
            prop_assert_eq!(
                cache.valuation(&xy, p).unwrap(),
                cache.valuation(&x, p).unwrap() + cache.valuation(&y, p).unwrap()
            );
            let s = x.add(&y).unwrap();
            if !s.is_zero() {
                let (vx, vy, vs) = (cache.valuation(&x, p).unwrap(), cache.valuation(&y, p).unwrap(), cache.valuation(&s, p).unwrap());
                prop_assert!(vs >= vx.min(vy));
                if vx != vy {
                    prop_assert_eq!(vs, vx.min(vy));
                }
            }
        }

        #[test]
        fn residue_degree_times_valuation_gives_norm_valuation(a in small_vec(4)) {
            let cache = IdealCache::new(CyclotomicRing::new(5).unwrap());
            let x = cache.ring().unembed_i64(&a).unwrap();
            prop_assume!(!x.is_zero());
            for (ell, v) in factor_abs_norm(&x).unwrap() {
                let total: u32 = cache
                    .split(ell as u64)
                    .unwrap()
                    .iter()
                    .map(|p| p.f * cache.valuation(&x, p).unwrap())
                    .sum();
                prop_assert_eq!(total, v);
            }
        }
    }
}
