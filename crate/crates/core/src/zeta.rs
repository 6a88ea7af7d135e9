//! Enclosures of `ζ_K(k)` for `K = Q(ξ_n)` from the Euler product.
//!
//! The partial product runs over every prime ideal above a rational prime
//! `ℓ <= B`, in `f64` interval arithmetic with outward rounding. Primes above
//! `ℓ > B` are covered by the log-tail bound `2φ(n) B^(1-k) / (k-1)`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::arith::{euler_phi, primes_up_to};
use crate::cyclotomic::validate_conductor;
use crate::error::{Error, Result};
use crate::par::{self, Execution};
use crate::prime_ideals::splitting_type;

/// Largest accepted rational prime bound.
pub const MAX_PRIME_BOUND: u64 = 200_000_000;

const CHUNK: usize = 4096;

/// Closed interval `[lo, hi]` of reals with `f64` endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "empty interval [{lo}, {hi}]");
        Self { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Self { lo: x, hi: x }
    }

    /// Widen outward by `ulps` units in the last place on each side.
    pub fn widen(self, ulps: u32) -> Self {
        let (mut lo, mut hi) = (self.lo, self.hi);
        for _ in 0..ulps {
            lo = lo.next_down();
            hi = hi.next_up();
        }
        Self { lo, hi }
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    /// Every point of `self` is strictly below every point of `other`.
    pub fn strictly_below(&self, other: &Self) -> bool {
        self.hi < other.lo
    }

    /// Product of intervals with nonnegative endpoints.
    pub fn mul_pos(self, o: Self) -> Self {
        debug_assert!(self.lo >= 0.0 && o.lo >= 0.0);
        Self {
            lo: (self.lo * o.lo).next_down().max(0.0),
            hi: (self.hi * o.hi).next_up(),
        }
    }

    /// `1 / self` for a positive interval.
    pub fn recip_pos(self) -> Self {
        debug_assert!(self.lo > 0.0);
        Self {
            lo: (1.0 / self.hi).next_down(),
            hi: (1.0 / self.lo).next_up(),
        }
    }

    /// Natural log of a positive interval; `ln` is assumed accurate to
    /// within a few ulps.
    pub fn ln(self) -> Self {
        let (lo, hi) = (self.lo.ln(), self.hi.ln());
        Interval::new(lo, hi).widen(4)
    }

    pub fn ln2() -> Self {
        Interval::point(std::f64::consts::LN_2).widen(1)
    }
}

/// `[x^-e]` enclosure for an integer `x >= 2`.
fn inverse_power(x: u64, e: u32) -> Interval {
    let q = (x as f64).powi(e as i32);
    if !q.is_finite() {
        return Interval::new(0.0, f64::MIN_POSITIVE);
    }
    // powi performs at most 2·log2(e) roundings.
    let slack = 1.0 + 64.0 * f64::EPSILON;
    Interval::new(
        ((1.0 / q).next_down() / slack).next_down(),
        ((1.0 / q).next_up() * slack).next_up(),
    )
}

/// `[(1 - ℓ^(-fk))^g]` for the ideals above `ℓ`.
fn local_factor(ell: u64, n: u64, k: u32) -> Result<Interval> {
    let (_, f, g) = splitting_type(ell, n)?;
    let x = inverse_power(ell, f.saturating_mul(k));
    let one_minus = Interval::new((1.0 - x.hi).next_down(), (1.0 - x.lo).next_up().min(1.0));
    let mut acc = Interval::point(1.0);
    for _ in 0..g {
        acc = acc.mul_pos(one_minus);
    }
    Ok(acc)
}

fn check_args(n: u64, k: u32, prime_bound: u64) -> Result<()> {
    validate_conductor(n)?;
    if k < 2 {
        return Err(Error::InvalidParameter(format!("k must be at least 2, got {k}")));
    }
    if prime_bound < 2 {
        return Err(Error::InvalidParameter(format!(
            "prime bound must be at least 2, got {prime_bound}"
        )));
    }
    if prime_bound > MAX_PRIME_BOUND {
        return Err(Error::ResourceCap {
            requested: prime_bound as u128,
            cap: MAX_PRIME_BOUND as u128,
        });
    }
    Ok(())
}

/// Enclosure of `Π_{𝔭 | ℓ, ℓ <= B} (1 - N(𝔭)^-k)`. Chunk boundaries are fixed,
/// so the result does not depend on the execution mode.
pub fn partial_euler_product(n: u64, k: u32, prime_bound: u64, exec: Execution) -> Result<Interval> {
    check_args(n, k, prime_bound)?;
    let primes = primes_up_to(prime_bound);
    let chunks: Vec<&[u64]> = primes.chunks(CHUNK).collect();
    let parts = par::map(exec, &chunks, |chunk| {
        chunk.iter().try_fold(Interval::point(1.0), |acc, &ell| {
            Ok::<_, Error>(acc.mul_pos(local_factor(ell, n, k)?))
        })
    });
    parts
        .into_iter()
        .try_fold(Interval::point(1.0), |acc, p| Ok(acc.mul_pos(p?)))
}

/// Upper bound on `log Π_{ℓ > B} (1 - N(𝔭)^-k)^-1`.
pub fn tail_log_bound(n: u64, k: u32, prime_bound: u64) -> f64 {
    let phi = euler_phi(n) as f64;
    let b = prime_bound as f64;
    let t = 2.0 * phi * b.powi(1 - k as i32) / (k as f64 - 1.0);
    (t * (1.0 + 16.0 * f64::EPSILON)).next_up()
}

/// Validated `ζ_K(k)` enclosure and its logarithm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZetaValue {
    pub n: u64,
    pub k: u32,
    pub prime_bound: u64,
    pub zeta: Interval,
    pub log_zeta: Interval,
    /// `1/ζ_K(k)`.
    pub density: Interval,
}

impl ZetaValue {
    pub fn report(&self) -> ZetaReport {
        ZetaReport {
            n: self.n,
            k: self.k,
            prime_bound: self.prime_bound,
            lower: self.zeta.lo.to_string(),
            upper: self.zeta.hi.to_string(),
            log_lower: self.log_zeta.lo.to_string(),
            log_upper: self.log_zeta.hi.to_string(),
            precision_bits: f64::MANTISSA_DIGITS,
            rounding: "outward, one ulp per operation".into(),
        }
    }
}

/// Wire form; decimals are shortest round-trip renderings of the `f64` bounds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZetaReport {
    pub n: u64,
    pub k: u32,
    pub prime_bound: u64,
    pub lower: String,
    pub upper: String,
    pub log_lower: String,
    pub log_upper: String,
    pub precision_bits: u32,
    pub rounding: String,
}

pub fn dedekind_zeta(n: u64, k: u32, prime_bound: u64) -> Result<ZetaValue> {
    dedekind_zeta_with(n, k, prime_bound, Execution::default())
}

pub fn dedekind_zeta_with(n: u64, k: u32, prime_bound: u64, exec: Execution) -> Result<ZetaValue> {
    let p = partial_euler_product(n, k, prime_bound, exec)?;
    let t = tail_log_bound(n, k, prime_bound);
    // Tail factor lies in [e^-t, 1], and e^-t >= 1 - t.
    let tail = Interval::new((1.0 - t).next_down().max(0.0), 1.0);
    let density = p.mul_pos(tail);
    let density = Interval::new(density.lo, density.hi.min(1.0));
    if density.lo <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "prime bound {prime_bound} too small for a positive enclosure"
        )));
    }
    let zeta = density.recip_pos();
    let zeta = Interval::new(zeta.lo.max(1.0), zeta.hi);
    let log_p = p.ln();
    let log_zeta = Interval::new((-log_p.hi).next_down().max(0.0), (-log_p.lo + t).next_up());
    Ok(ZetaValue {
        n,
        k,
        prime_bound,
        zeta,
        log_zeta,
        density,
    })
}

/// Enclosure of the density `1/ζ_K(k)`.
pub fn density_constant(n: u64, k: u32, prime_bound: u64) -> Result<Interval> {
    Ok(dedekind_zeta(n, k, prime_bound)?.density)
}

/// Enclosure of `log(2)/ζ_K(k)`.
pub fn entropy_constant(n: u64, k: u32, prime_bound: u64) -> Result<Interval> {
    Ok(density_constant(n, k, prime_bound)?.mul_pos(Interval::ln2()))
}

/// Exact `Π_{N(𝔭) <= B} (1 - N(𝔭)^-k)`: the density of the points that
/// avoid `Γ_{𝔭^k}` for every such `𝔭`, a periodic set by CRT.
pub fn periodic_density(n: u64, k: u32, norm_bound: u64) -> Result<BigRational> {
    check_args(n, k, norm_bound.max(2))?;
    let mut acc = BigRational::one();
    for ell in primes_up_to(norm_bound) {
        let (_, f, g) = splitting_type(ell, n)?;
        let Some(norm) = ell.checked_pow(f).filter(|&q| q <= norm_bound) else {
            continue;
        };
        let qk = num_traits::pow(BigInt::from(norm), k as usize);
        let factor = BigRational::new(&qk - 1, qk);
        for _ in 0..g {
            acc *= &factor;
        }
    }
    Ok(acc)
}
