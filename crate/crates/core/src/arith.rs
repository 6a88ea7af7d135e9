//! Rational-integer helpers: primality, factorisation, orders and sieves.
//!
//! Factorisation covers integers below 2^128. Miller-Rabin with the first
//! twelve prime bases is deterministic below 3.3 * 10^24; above that the
//! test uses twenty bases and is probabilistic.

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};

const MR_BASES: [u64; 20] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71,
];

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Modular multiplication for moduli up to 2^128.
fn mul_mod_u128(a: u128, b: u128, m: u128) -> u128 {
    if m <= u64::MAX as u128 {
        return mul_mod(a as u64, b as u64, m as u64) as u128;
    }
    let (mut a, mut b) = (a % m, b % m);
    let mut acc = 0u128;
    while b > 0 {
        if b & 1 == 1 {
            acc = add_mod_u128(acc, a, m);
        }
        a = add_mod_u128(a, a, m);
        b >>= 1;
    }
    acc
}

#[inline]
fn add_mod_u128(a: u128, b: u128, m: u128) -> u128 {
    let (s, overflow) = a.overflowing_add(b);
    if overflow || s >= m {
        s.wrapping_sub(m)
    } else {
        s
    }
}

fn pow_mod_u128(mut base: u128, mut exp: u128, m: u128) -> u128 {
    let mut acc = 1u128 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod_u128(acc, base, m);
        }
        base = mul_mod_u128(base, base, m);
        exp >>= 1;
    }
    acc
}

pub fn is_prime(n: u64) -> bool {
    is_prime_u128(n as u128)
}

pub fn is_prime_u128(n: u128) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &MR_BASES {
        let p = p as u128;
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    let rounds = if n < 3_317_044_064_679_887_385_961_981 { 12 } else { 20 };
    'witness: for &a in &MR_BASES[..rounds] {
        let mut x = pow_mod_u128(a as u128, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod_u128(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Brent's variant of Pollard rho; `n` must be odd and composite.
fn pollard_brent(n: u128) -> u128 {
    let mut c = 1u128;
    loop {
        let f = |x: u128| add_mod_u128(mul_mod_u128(x, x, n), c, n);
        let (mut x, mut y, mut g, mut r, mut q) = (0u128, 2u128, 1u128, 1u64, 1u128);
        let mut ys = y;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                let steps = 128.min(r - k);
                for _ in 0..steps {
                    y = f(y);
                    q = mul_mod_u128(q, x.abs_diff(y), n);
                }
                g = gcd_u128(q, n);
                k += steps;
            }
            r *= 2;
        }
        if g == n {
            loop {
                ys = f(ys);
                g = gcd_u128(x.abs_diff(ys), n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return g;
        }
        c += 1;
    }
}

/// Prime factorisation as sorted `(prime, exponent)` pairs. `factor(0)` and
/// `factor(1)` are empty.
pub fn factor_u128(n: u128) -> Vec<(u128, u32)> {
    let mut out: Vec<(u128, u32)> = Vec::new();
    if n < 2 {
        return out;
    }
    let mut n = n;
    let push = |p: u128, out: &mut Vec<(u128, u32)>| match out.iter_mut().find(|(q, _)| *q == p) {
        Some(entry) => entry.1 += 1,
        None => out.push((p, 1)),
    };
    for p in [2u128, 3, 5] {
        while n.is_multiple_of(p) {
            push(p, &mut out);
            n /= p;
        }
    }
    // wheel over 30
    let mut p = 7u128;
    let incs = [4u128, 2, 4, 2, 4, 6, 2, 6];
    let mut i = 0;
    while p <= 1 << 12 && p * p <= n {
        while n.is_multiple_of(p) {
            push(p, &mut out);
            n /= p;
        }
        p += incs[i];
        i = (i + 1) % 8;
    }
    let mut stack = vec![n];
    while let Some(m) = stack.pop() {
        if m == 1 {
            continue;
        }
        if is_prime_u128(m) {
            push(m, &mut out);
            continue;
        }
        if let Some(r) = exact_square_root(m) {
            stack.push(r);
            stack.push(r);
            continue;
        }
        let d = pollard_brent(m);
        stack.push(d);
        stack.push(m / d);
    }
    out.sort_unstable();
    out
}

fn exact_square_root(m: u128) -> Option<u128> {
    let mut r = (m as f64).sqrt() as u128;
    while r * r > m {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|s| s <= m) {
        r += 1;
    }
    (r * r == m).then_some(r)
}

/// Factor an arbitrary-precision non-negative integer, rejecting inputs
/// at or above 2^128.
pub fn factor_biguint(n: &BigUint) -> Result<Vec<(u128, u32)>> {
    let small = n
        .to_u128()
        .ok_or_else(|| Error::FactoringCapacity(n.to_string()))?;
    Ok(factor_u128(small))
}

pub fn factor_u64(n: u64) -> Vec<(u64, u32)> {
    factor_u128(n as u128)
        .into_iter()
        .map(|(p, e)| (p as u64, e))
        .collect()
}

pub fn euler_phi(n: u64) -> u64 {
    factor_u64(n)
        .into_iter()
        .fold(n, |acc, (p, _)| acc / p * (p - 1))
}

pub fn divisors(n: u64) -> Vec<u64> {
    let mut out = vec![1u64];
    for (p, e) in factor_u64(n) {
        let len = out.len();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            for i in 0..len {
                out.push(out[i] * pk);
            }
        }
    }
    out.sort_unstable();
    out
}

/// Multiplicative order of `a` modulo `m`; `None` when `gcd(a, m) != 1`.
pub fn multiplicative_order(a: u64, m: u64) -> Option<u64> {
    if m == 1 {
        return Some(1);
    }
    if gcd(a % m, m) != 1 {
        return None;
    }
    let mut ord = euler_phi(m);
    for (p, _) in factor_u64(ord) {
        while ord.is_multiple_of(p) && pow_mod(a, ord / p, m) == 1 {
            ord /= p;
        }
    }
    Some(ord)
}

pub fn mod_inverse(a: u64, m: u64) -> Option<u64> {
    let (mut old_r, mut r) = (a as i128 % m as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    (old_r == 1).then(|| old_s.rem_euclid(m as i128) as u64)
}

/// Sieve of Eratosthenes.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let limit = limit as usize;
    let mut composite = vec![false; limit + 1];
    let mut out = Vec::new();
    for i in 2..=limit {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= limit {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}
