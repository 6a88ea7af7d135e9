//! Polynomials over the prime field `F_p` and their factorisation
//! (square-free, distinct-degree, then Cantor-Zassenhaus equal-degree
//! splitting with a fixed-seed generator).

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arith::{is_prime, mod_inverse, mul_mod};
use crate::error::{Error, Result};
use crate::poly::IntPolynomial;

const SPLIT_SEED: u64 = 0x5eed_c1c1;

/// Dense polynomial over `F_p`, lowest degree first, no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FpPoly {
    p: u64,
    c: Vec<u64>,
}

impl FpPoly {
    pub fn new(p: u64, mut c: Vec<u64>) -> Self {
        for x in c.iter_mut() {
            *x %= p;
        }
        while c.last() == Some(&0) {
            c.pop();
        }
        Self { p, c }
    }

    pub fn from_int_poly(f: &IntPolynomial, p: u64) -> Self {
        let pb = BigInt::from(p);
        Self::new(
            p,
            f.coeffs()
                .iter()
                .map(|c| c.mod_floor(&pb).to_u64().unwrap())
                .collect(),
        )
    }

    pub fn zero(p: u64) -> Self {
        Self { p, c: Vec::new() }
    }

    pub fn one(p: u64) -> Self {
        Self::new(p, vec![1])
    }

    pub fn x(p: u64) -> Self {
        Self::new(p, vec![0, 1])
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.c
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.c == [1]
    }

    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    fn lead(&self) -> u64 {
        *self.c.last().unwrap_or(&0)
    }

    pub fn to_int_poly(&self) -> IntPolynomial {
        IntPolynomial::new(self.c.iter().map(|&x| BigInt::from(x)).collect())
    }

    pub fn add(&self, o: &Self) -> Self {
        let len = self.c.len().max(o.c.len());
        let p = self.p;
        Self::new(
            p,
            (0..len)
                .map(|i| {
                    let a = self.c.get(i).copied().unwrap_or(0);
                    let b = o.c.get(i).copied().unwrap_or(0);
                    ((a as u128 + b as u128) % p as u128) as u64
                })
                .collect(),
        )
    }

    pub fn sub(&self, o: &Self) -> Self {
        let len = self.c.len().max(o.c.len());
        let p = self.p;
        Self::new(
            p,
            (0..len)
                .map(|i| {
                    let a = self.c.get(i).copied().unwrap_or(0);
                    let b = o.c.get(i).copied().unwrap_or(0);
                    ((a as u128 + p as u128 - b as u128) % p as u128) as u64
                })
                .collect(),
        )
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero(self.p);
        }
        let p = self.p;
        let mut out = vec![0u64; self.c.len() + o.c.len() - 1];
        for (i, &a) in self.c.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in o.c.iter().enumerate() {
                out[i + j] = ((out[i + j] as u128 + a as u128 * b as u128) % p as u128) as u64;
            }
        }
        Self::new(p, out)
    }

    fn scale(&self, s: u64) -> Self {
        Self::new(self.p, self.c.iter().map(|&a| mul_mod(a, s, self.p)).collect())
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let inv = mod_inverse(self.lead(), self.p).expect("field element");
        self.scale(inv)
    }

    pub fn div_rem(&self, d: &Self) -> (Self, Self) {
        let p = self.p;
        let dd = d.degree().expect("division by zero polynomial");
        if self.c.len() <= dd {
            return (Self::zero(p), self.clone());
        }
        let inv = mod_inverse(d.lead(), p).unwrap();
        let mut r = self.c.clone();
        let mut q = vec![0u64; r.len() - dd];
        for i in (dd..r.len()).rev() {
            let coef = mul_mod(r[i], inv, p);
            if coef == 0 {
                continue;
            }
            q[i - dd] = coef;
            for (j, &dc) in d.c.iter().enumerate() {
                let sub = mul_mod(coef, dc, p);
                r[i - dd + j] = (r[i - dd + j] + p - sub) % p;
            }
        }
        r.truncate(dd);
        (Self::new(p, q), Self::new(p, r))
    }

    pub fn rem(&self, d: &Self) -> Self {
        self.div_rem(d).1
    }

    pub fn gcd(&self, o: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn derivative(&self) -> Self {
        let p = self.p;
        Self::new(
            p,
            self.c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &a)| mul_mod(a, i as u64 % p, p))
                .collect(),
        )
    }

    /// `self^e mod m`.
    pub fn pow_mod(&self, mut e: u128, m: &Self) -> Self {
        let mut base = self.rem(m);
        let mut acc = Self::one(self.p).rem(m);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base).rem(m);
            }
            base = base.mul(&base).rem(m);
            e >>= 1;
        }
        acc
    }

    /// Evaluate at a field element.
    pub fn eval(&self, x: u64) -> u64 {
        self.c
            .iter()
            .rev()
            .fold(0u64, |acc, &c| ((mul_mod(acc, x, self.p) as u128 + c as u128) % self.p as u128) as u64)
    }

    /// `g(x) = f(x)^(1/p)` for `f` with `f' = 0` (coefficients are then
    /// supported on multiples of `p`, and Frobenius is the identity on `F_p`).
    fn pth_root(&self) -> Self {
        let p = self.p as usize;
        Self::new(self.p, self.c.iter().step_by(p).copied().collect())
    }
}

/// Square-free decomposition of a monic polynomial: `(g, e)` with
/// `f = Π g^e`, each `g` square-free and pairwise coprime.
fn squarefree_decomposition(f: &FpPoly) -> Vec<(FpPoly, u32)> {
    let p = f.p;
    let mut out = Vec::new();
    let mut stack = vec![(f.monic(), 1u32)];
    while let Some((f, mult)) = stack.pop() {
        if f.degree().unwrap_or(0) == 0 {
            continue;
        }
        let df = f.derivative();
        if df.is_zero() {
            stack.push((f.pth_root(), mult * p as u32));
            continue;
        }
        let mut c = f.gcd(&df);
        let mut w = f.div_rem(&c).0;
        let mut i = 1u32;
        while !w.is_one() {
            let y = w.gcd(&c);
            let z = w.div_rem(&y).0;
            if !z.is_one() {
                out.push((z.monic(), i * mult));
            }
            i += 1;
            w = y;
            c = c.div_rem(&w).0;
        }
        if !c.is_one() && c.degree().unwrap_or(0) > 0 {
            stack.push((c.pth_root(), mult * p as u32));
        }
    }
    out
}

/// Distinct-degree factorisation of a monic square-free polynomial.
fn distinct_degree(f: &FpPoly) -> Vec<(FpPoly, usize)> {
    let p = f.p;
    let mut out = Vec::new();
    let mut rest = f.clone();
    let x = FpPoly::x(p);
    let mut h = x.clone();
    let mut deg = 0usize;
    while let Some(dr) = rest.degree() {
        if dr < 2 * (deg + 1) {
            break;
        }
        deg += 1;
        h = h.pow_mod(p as u128, &rest);
        let g = rest.gcd(&h.sub(&x));
        if !g.is_one() {
            rest = rest.div_rem(&g).0;
            h = h.rem(&rest);
            out.push((g, deg));
        }
    }
    if let Some(dr) = rest.degree() {
        if dr > 0 {
            out.push((rest.monic(), dr));
        }
    }
    out
}

/// Cantor-Zassenhaus splitting of a product of distinct irreducibles of
/// degree `deg`.
fn equal_degree(f: &FpPoly, deg: usize, rng: &mut ChaCha8Rng) -> Vec<FpPoly> {
    let n = f.degree().unwrap();
    if n == deg {
        return vec![f.monic()];
    }
    let p = f.p;
    loop {
        let a = FpPoly::new(p, (0..n).map(|_| rng.gen_range(0..p)).collect());
        if a.degree().unwrap_or(0) == 0 {
            continue;
        }
        let b = if p == 2 {
            // trace map a + a^2 + ... + a^(2^(deg-1))
            let mut t = a.rem(f);
            let mut acc = t.clone();
            for _ in 1..deg {
                t = t.mul(&t).rem(f);
                acc = acc.add(&t);
            }
            acc
        } else {
            // a^((p^deg - 1)/2) = (a^(1 + p + ... + p^(deg-1)))^((p-1)/2)
            let mut t = a.rem(f);
            let mut norm = t.clone();
            for _ in 1..deg {
                t = t.pow_mod(p as u128, f);
                norm = norm.mul(&t).rem(f);
            }
            norm.pow_mod(((p - 1) / 2) as u128, f).sub(&FpPoly::one(p))
        };
        let g = f.gcd(&b);
        if let Some(dg) = g.degree() {
            if dg > 0 && dg < n {
                let h = f.div_rem(&g).0;
                let mut out = equal_degree(&g, deg, rng);
                out.extend(equal_degree(&h.monic(), deg, rng));
                return out;
            }
        }
    }
}

/// Complete factorisation over `F_ell` into monic irreducibles with
/// multiplicities, sorted by degree then lexicographically by coefficients
/// (lowest degree first). Deterministic for a given input.
pub fn factor_poly_mod_p(f: &IntPolynomial, ell: u64) -> Result<Vec<(FpPoly, u32)>> {
    if !is_prime(ell) {
        return Err(Error::NotPrime(ell));
    }
    if (ell as u128).checked_pow(2).is_none() {
        return Err(Error::InvalidParameter(format!("prime {ell} too large")));
    }
    let fp = FpPoly::from_int_poly(f, ell);
    if fp.degree().unwrap_or(0) == 0 {
        return Ok(Vec::new());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SPLIT_SEED ^ ell);
    let mut out = Vec::new();
    for (sf, mult) in squarefree_decomposition(&fp) {
        for (g, deg) in distinct_degree(&sf) {
            for h in equal_degree(&g, deg, &mut rng) {
                out.push((h, mult));
            }
        }
    }
    out.sort_by(|a, b| {
        a.0.degree()
            .cmp(&b.0.degree())
            .then_with(|| a.0.c.cmp(&b.0.c))
    });
    Ok(out)
}
