//! Linear symmetries `x ↦ ε·σ_r(x)` of the k-free set, and the number
//! theoretic checks around the prime `q` and the integer `a_q`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{divisors, euler_phi, factor_u64, gcd, is_prime, mod_inverse, multiplicative_order, pow_mod, primes_up_to};
use crate::cyclotomic::{CycInt, CyclotomicRing, GaloisIndex};
use crate::error::{Error, Result};
use crate::kfree::{sample_points, sieve_box, KFreeBox};
use crate::par::{self, Execution};
use crate::prime_ideals::IdealCache;

/// `-1`, `ξ_n` and cyclotomic units drawn from every `Q(ξ_m)` with `m | n`,
/// `m > 2`: the quotients `(1 - ξ_m^a)/(1 - ξ_m)` for `1 < a < m/2` coprime
/// to `m`, and `1 - ξ_m` itself when `m` is not a prime power. They span a
/// subgroup of finite index in `O_n^×`; the index is not computed.
pub fn unit_generators(n: u64) -> Result<Vec<CycInt>> {
    let ring = CyclotomicRing::new(n)?;
    let mut out = vec![ring.one().neg(), ring.xi_pow(1)];
    let mut push = |u: CycInt| {
        debug_assert!(u.is_unit());
        if !out.contains(&u) {
            out.push(u);
        }
    };
    for m in divisors(n).into_iter().filter(|&m| m > 2) {
        let step = (n / m) as i64;
        if factor_u64(m).len() > 1 {
            push(ring.one().sub(&ring.xi_pow(step))?);
        }
        for a in (2..m.div_ceil(2)).filter(|&a| gcd(a, m) == 1) {
            let mut u = ring.zero();
            for i in 0..a as i64 {
                u = u.add(&ring.xi_pow(i * step))?;
            }
            push(u);
        }
    }
    Ok(out)
}

fn mat_vec(m: &[Vec<i64>], z: &[i64]) -> Result<Vec<i64>> {
    m.iter()
        .map(|row| {
            let s: i128 = row.iter().zip(z).map(|(&a, &b)| a as i128 * b as i128).sum();
            i64::try_from(s).map_err(|_| Error::Overflow("matrix image"))
        })
        .collect()
}

fn mat_mul(a: &[Vec<i64>], b: &[Vec<i64>]) -> Result<Vec<Vec<i64>>> {
    let d = a.len();
    (0..d)
        .map(|i| {
            (0..d)
                .map(|j| {
                    let s: i128 = (0..d).map(|t| a[i][t] as i128 * b[t][j] as i128).sum();
                    i64::try_from(s).map_err(|_| Error::Overflow("matrix product"))
                })
                .collect()
        })
        .collect()
}

/// Exact determinant by fraction-free elimination.
pub fn determinant(m: &[Vec<i64>]) -> BigInt {
    let d = m.len();
    if d == 0 {
        return BigInt::one();
    }
    let mut a: Vec<Vec<BigInt>> = m.iter().map(|r| r.iter().map(|&c| BigInt::from(c)).collect()).collect();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..d - 1 {
        if a[k][k].is_zero() {
            let Some(p) = (k + 1..d).find(|&i| !a[i][k].is_zero()) else {
                return BigInt::zero();
            };
            a.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..d {
            for j in k + 1..d {
                let v = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                a[i][j] = v;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[d - 1][d - 1]
}

/// `ι ∘ (x ↦ ε·σ_r(x)) ∘ ι^{-1}` as an integer matrix acting on columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymmetryElement {
    unit: CycInt,
    galois: GaloisIndex,
    matrix: Vec<Vec<i64>>,
}

impl SymmetryElement {
    pub fn new(unit: &CycInt, galois: GaloisIndex) -> Result<Self> {
        if !unit.is_unit() {
            return Err(Error::NotAUnit(unit.to_string()));
        }
        let ring = unit.ring().clone();
        let d = ring.degree();
        let mut matrix = vec![vec![0i64; d]; d];
        for col in 0..d {
            let image = unit.mul(&ring.xi_pow(col as i64).galois_apply(galois)?)?;
            let v = image.embed_i64().ok_or(Error::Overflow("symmetry matrix entry"))?;
            for (row, c) in matrix.iter_mut().zip(v) {
                row[col] = c;
            }
        }
        let det = determinant(&matrix);
        assert!(det.abs().is_one(), "unit times automorphism has determinant {det}");
        Ok(Self {
            unit: unit.clone(),
            galois,
            matrix,
        })
    }

    pub fn identity(n: u64) -> Result<Self> {
        let ring = CyclotomicRing::new(n)?;
        Self::new(&ring.one(), GaloisIndex::identity(n))
    }

    pub fn n(&self) -> u64 {
        self.unit.n()
    }

    pub fn unit(&self) -> &CycInt {
        &self.unit
    }

    pub fn galois(&self) -> GaloisIndex {
        self.galois
    }

    pub fn matrix(&self) -> &[Vec<i64>] {
        &self.matrix
    }

    pub fn determinant(&self) -> BigInt {
        determinant(&self.matrix)
    }

    /// `(ε, r)·(ε', r') = (ε·σ_r(ε'), r r')`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        let unit = self.unit.mul(&other.unit.galois_apply(self.galois)?)?;
        Self::new(&unit, self.galois.compose(other.galois))
    }

    /// `(σ_{r^{-1}}(ε^{-1}), r^{-1})`.
    pub fn inverse(&self) -> Result<Self> {
        let rinv = self.galois.inverse();
        Self::new(&self.unit.unit_inverse()?.galois_apply(rinv)?, rinv)
    }

    pub fn apply(&self, z: &[i64]) -> Result<Vec<i64>> {
        if z.len() != self.matrix.len() {
            return Err(Error::DimensionMismatch {
                expected: self.matrix.len(),
                got: z.len(),
            });
        }
        mat_vec(&self.matrix, z)
    }

    /// The algebraic image `ε·σ_r(x)`.
    pub fn apply_element(&self, x: &CycInt) -> Result<CycInt> {
        self.unit.mul(&x.galois_apply(self.galois)?)
    }

    /// Matrix product agrees with the composed element.
    pub fn matrix_product(&self, other: &Self) -> Result<Vec<Vec<i64>>> {
        mat_mul(&self.matrix, &other.matrix)
    }

    pub fn describe(&self) -> ElementJson {
        ElementJson {
            n: self.n(),
            unit: self.unit.embed().iter().map(ToString::to_string).collect(),
            r: self.galois.value(),
        }
    }
}

/// `{n, unit: [coeff strings], r}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElementJson {
    pub n: u64,
    pub unit: Vec<String>,
    pub r: u64,
}

/// `(ε, 1)` for each unit generator and `(1, r)` for each `r ≠ 1`.
pub fn generator_elements(n: u64) -> Result<Vec<SymmetryElement>> {
    let ring = CyclotomicRing::new(n)?;
    let mut out = Vec::new();
    for u in unit_generators(n)? {
        out.push(SymmetryElement::new(&u, GaloisIndex::identity(n))?);
    }
    for r in galois_group(n)?.elements.into_iter().skip(1) {
        out.push(SymmetryElement::new(&ring.one(), GaloisIndex::new(r as i64, n)?)?);
    }
    Ok(out)
}

/// Points whose image under an action lost or gained k-freeness.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionFailure {
    pub point: Vec<i64>,
    pub image: Vec<i64>,
    pub direction: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StabiliserReport {
    pub element: ElementJson,
    pub k: u32,
    pub radius: u64,
    pub seed: u64,
    pub checked: usize,
    pub failures: Vec<ActionFailure>,
}

impl StabiliserReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Map sampled k-free points through `s` and `s^{-1}` and test the images.
pub fn verify_stabiliser_action(
    s: &SymmetryElement,
    k: u32,
    radius: u64,
    sample_size: usize,
    seed: u64,
    exec: Execution,
) -> Result<StabiliserReport> {
    let b = sieve_box(s.n(), k, radius)?;
    verify_on_box(s, &b, sample_size, seed, exec)
}

/// As [`verify_stabiliser_action`], reusing an existing box.
pub fn verify_on_box(
    s: &SymmetryElement,
    b: &KFreeBox,
    sample_size: usize,
    seed: u64,
    exec: Execution,
) -> Result<StabiliserReport> {
    let inv = s.inverse()?;
    let ring = s.unit.ring().clone();
    let cache = IdealCache::new(ring.clone());
    let pts = sample_points(b, sample_size, seed);
    let results = par::map(exec, &pts, |p| {
        let mut bad = Vec::new();
        for (el, dir) in [(s, "forward"), (&inv, "inverse")] {
            let img = el.apply(p)?;
            if !cache.is_kfree(&ring.unembed_i64(&img)?, b.k())? {
                bad.push(ActionFailure {
                    point: p.clone(),
                    image: img,
                    direction: dir.into(),
                });
            }
        }
        Ok::<_, Error>(bad)
    });
    let mut failures = Vec::new();
    for r in results {
        failures.extend(r?);
    }
    Ok(StabiliserReport {
        element: s.describe(),
        k: b.k(),
        radius: b.radius(),
        seed,
        checked: pts.len(),
        failures,
    })
}

/// A point where `matrix` fails to preserve k-freeness in either direction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub point: Vec<i64>,
    pub image: Vec<i64>,
    pub point_kfree: bool,
    pub image_kfree: bool,
}

/// Scan shells of growing sup-radius up to `cap` for a point `z` with
/// `z ∈ V_k` xor `Mz ∈ V_k`. `None` means nothing found up to `cap`.
pub fn find_counterexample(n: u64, k: u32, matrix: &[Vec<i64>], cap: u64) -> Result<Option<Counterexample>> {
    let ring = CyclotomicRing::new(n)?;
    let d = ring.degree();
    if matrix.len() != d || matrix.iter().any(|r| r.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: matrix.len(),
        });
    }
    let cache = IdealCache::new(ring.clone());
    for r in 1..=cap as i64 {
        let side = (2 * r + 1) as u64;
        for idx in 0..side.pow(d as u32) {
            let mut z = vec![0i64; d];
            let mut t = idx;
            for c in z.iter_mut().rev() {
                *c = (t % side) as i64 - r;
                t /= side;
            }
            if z.iter().all(|c| c.abs() < r) {
                continue;
            }
            let img = mat_vec(matrix, &z)?;
            let a = cache.is_kfree(&ring.unembed_i64(&z)?, k)?;
            let b = cache.is_kfree(&ring.unembed_i64(&img)?, k)?;
            if a != b {
                return Ok(Some(Counterexample {
                    point: z,
                    image: img,
                    point_kfree: a,
                    image_kfree: b,
                }));
            }
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WkReport {
    pub element: ElementJson,
    pub k: u32,
    pub radius: u64,
    pub norm_bound: u64,
    pub checked_wk: usize,
    pub wk_failures: Vec<ActionFailure>,
    pub checked_coprime: usize,
    pub coprime_failures: Vec<ActionFailure>,
}

impl WkReport {
    pub fn passed(&self) -> bool {
        self.wk_failures.is_empty() && self.coprime_failures.is_empty()
    }
}

/// Check that `s` and `s^{-1}` map `W_k` into itself on the box of radius
/// `radius` (restricted to `|N(x)| <= norm_bound`), and that
/// `gcd((x), (p)) = O` is carried over for sampled `x ∈ V_k` and unramified
/// `p <= 50`.
pub fn verify_wk_preservation(
    s: &SymmetryElement,
    k: u32,
    radius: u64,
    norm_bound: u64,
    coprime_samples: usize,
    seed: u64,
) -> Result<WkReport> {
    let n = s.n();
    let ring = s.unit.ring().clone();
    let cache = IdealCache::new(ring.clone());
    let inv = s.inverse()?;
    let b = sieve_box(n, k, radius)?;
    let mut checked_wk = 0;
    let mut wk_failures = Vec::new();
    for p in b.points() {
        let x = ring.unembed_i64(&p)?;
        if x.norm().abs() > BigInt::from(norm_bound) || !cache.is_in_wk(&x, k)? {
            continue;
        }
        checked_wk += 1;
        for (el, dir) in [(s, "forward"), (&inv, "inverse")] {
            let img = el.apply(&p)?;
            if !cache.is_in_wk(&ring.unembed_i64(&img)?, k)? {
                wk_failures.push(ActionFailure {
                    point: p.clone(),
                    image: img,
                    direction: dir.into(),
                });
            }
        }
    }
    let unramified: Vec<u64> = primes_up_to(50).into_iter().filter(|p| !n.is_multiple_of(*p)).collect();
    let mut checked_coprime = 0;
    let mut coprime_failures = Vec::new();
    for p in sample_points(&b, coprime_samples, seed) {
        let x = ring.unembed_i64(&p)?;
        let nx = x.norm();
        for &q in &unramified {
            // (x) + (q) = O iff no prime above q divides x iff q ∤ N(x).
            if (&nx % q).is_zero() {
                continue;
            }
            checked_coprime += 1;
            for (el, dir) in [(s, "forward"), (&inv, "inverse")] {
                let img = el.apply(&p)?;
                let y = ring.unembed_i64(&img)?;
                let divides = cache.split(q)?.iter().try_fold(false, |acc, id| {
                    Ok::<_, Error>(acc || cache.valuation(&y, id)? > 0)
                })?;
                if divides {
                    coprime_failures.push(ActionFailure {
                        point: p.clone(),
                        image: img,
                        direction: format!("{dir}, p = {q}"),
                    });
                }
            }
        }
    }
    Ok(WkReport {
        element: s.describe(),
        k,
        radius,
        norm_bound,
        checked_wk,
        wk_failures,
        checked_coprime,
        coprime_failures,
    })
}

/// `S_m ∩ [2, bound]`: the primes `ℓ ≡ 1 mod m`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplittingPrimeSet {
    pub m: u64,
    pub bound: u64,
    pub primes: Vec<u64>,
}

pub fn splitting_primes(m: u64, bound: u64) -> Result<SplittingPrimeSet> {
    if m == 0 {
        return Err(Error::InvalidParameter("modulus must be positive".into()));
    }
    let primes = primes_up_to(bound).into_iter().filter(|&l| l % m == 1 % m).collect();
    Ok(SplittingPrimeSet { m, bound, primes })
}

/// Divisors `m > 1` of `n` with `m ≢ 2 mod 4`.
fn admissible_divisors(n: u64) -> Vec<u64> {
    divisors(n).into_iter().filter(|&m| m > 1 && m % 4 != 2).collect()
}

/// Primes `ℓ <= bound` in `S_m` for some admissible `m | n`.
fn h3_primes(n: u64, bound: u64) -> Vec<u64> {
    let ms = admissible_divisors(n);
    primes_up_to(bound)
        .into_iter()
        .filter(|&l| ms.iter().any(|&m| l % m == 1))
        .collect()
}

fn h1(a: u64, n: u64, q: u64) -> bool {
    let q2 = q * q;
    multiplicative_order(a % q2, q2) == Some(n * q)
}

fn h2(a: u64, n: u64) -> bool {
    factor_u64(n).iter().all(|&(p, _)| a.is_multiple_of(p))
}

fn h3(a: u64, n: u64, primes: &[u64]) -> bool {
    primes.iter().all(|&l| {
        let l2 = l * l;
        pow_mod(a % l2, n, l2) != 1
    })
}

/// An integer `a` with (H1) `ord(a mod q²) = nq`, (H2) `p | a` for all
/// primes `p | n`, and (H3) `a^n ≢ 1 mod ℓ²` for `ℓ <= ell_bound` in any
/// `S_m`, `1 < m | n`, `m ≢ 2 mod 4`. Deserialisation re-checks all three.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "AqJson", into = "AqJson")]
pub struct AqCandidate {
    n: u64,
    q: u64,
    a: u64,
    ell_bound: u64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct AqJson {
    n: u64,
    q: u64,
    a: u64,
    ell_bound: u64,
}

impl From<AqCandidate> for AqJson {
    fn from(c: AqCandidate) -> Self {
        Self {
            n: c.n,
            q: c.q,
            a: c.a,
            ell_bound: c.ell_bound,
        }
    }
}

impl TryFrom<AqJson> for AqCandidate {
    type Error = Error;

    fn try_from(j: AqJson) -> Result<Self> {
        AqCandidate::new(j.n, j.q, j.a, j.ell_bound)
    }
}

fn check_aq_args(n: u64, q: u64, ell_bound: u64) -> Result<()> {
    crate::cyclotomic::validate_conductor(n)?;
    if !is_prime(q) || q % n != 1 {
        return Err(Error::InvalidParameter(format!("q = {q} is not a prime ≡ 1 mod {n}")));
    }
    if ell_bound < q {
        return Err(Error::InvalidParameter(format!("ell bound {ell_bound} is below q = {q}")));
    }
    if q.checked_mul(q).is_none() || ell_bound > u32::MAX as u64 {
        return Err(Error::Overflow("q² or ℓ² exceeds u64"));
    }
    Ok(())
}

impl AqCandidate {
    pub fn new(n: u64, q: u64, a: u64, ell_bound: u64) -> Result<Self> {
        check_aq_args(n, q, ell_bound)?;
        let fail = |h: &str| Err(Error::InvalidCandidate(format!("a = {a} violates {h} for n = {n}, q = {q}")));
        if !h1(a, n, q) {
            return fail("(H1)");
        }
        if !h2(a, n) {
            return fail("(H2)");
        }
        if !h3(a, n, &h3_primes(n, ell_bound)) {
            return fail("(H3)");
        }
        Ok(Self { n, q, a, ell_bound })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn a(&self) -> u64 {
        self.a
    }

    pub fn ell_bound(&self) -> u64 {
        self.ell_bound
    }

    /// Re-check (H3) up to a larger bound.
    pub fn extend(&self, ell_bound: u64) -> Result<Self> {
        Self::new(self.n, self.q, self.a, ell_bound.max(self.ell_bound))
    }
}

/// Least `a` in `0..=a_bound` satisfying (H1)–(H3).
pub fn aq_search(n: u64, q: u64, ell_bound: u64, a_bound: u64, exec: Execution) -> Result<AqCandidate> {
    check_aq_args(n, q, ell_bound)?;
    let primes = h3_primes(n, ell_bound);
    let len = a_bound.checked_add(1).ok_or(Error::Overflow("a bound"))?;
    let found = par::find_first(exec, len, |a| h2(a, n) && h1(a, n, q) && h3(a, n, &primes));
    match found {
        Some(a) => Ok(AqCandidate { n, q, a, ell_bound }),
        None => Err(Error::NotFound { a_bound }),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeFactorJson {
    pub ell: String,
    pub f: u32,
    pub valuation: u32,
}

/// Outcome of the four checks on `y = ξ_m^j - a^(n/m)` in `O_m`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub candidate: AqCandidate,
    pub m: u64,
    pub j: u64,
    pub y: Vec<String>,
    pub norm: String,
    pub factors: Vec<PrimeFactorJson>,
    /// `y` is square-free.
    pub in_v2: Option<bool>,
    /// Some prime above `ℓ ∤ m` divides `y`.
    pub outside_w2: Option<bool>,
    /// Every `ℓ` below a prime divisor lies in `S_m`.
    pub primes_in_s_m: Option<bool>,
    /// No prime divisor lies above a prime dividing `n`.
    pub coprime_to_n: Option<bool>,
    pub error: Option<String>,
}

impl LemmaReport {
    pub fn passed(&self) -> bool {
        self.error.is_none()
            && [self.in_v2, self.outside_w2, self.primes_in_s_m, self.coprime_to_n]
                .iter()
                .all(|c| *c == Some(true))
    }
}

pub fn verify_lemma_factors(c: &AqCandidate, m: u64, j: u64) -> Result<LemmaReport> {
    if m < 3 || !c.n.is_multiple_of(m) || m % 4 == 2 {
        return Err(Error::InvalidParameter(format!(
            "m = {m} must satisfy 3 <= m | {}, m ≢ 2 mod 4",
            c.n
        )));
    }
    if gcd(j, m) != 1 {
        return Err(Error::InvalidParameter(format!("j = {j} is not a unit mod {m}")));
    }
    let ring = CyclotomicRing::new(m)?;
    let b = num_traits::pow(BigInt::from(c.a), (c.n / m) as usize);
    let y = ring.xi_pow(j as i64).sub(&ring.integer(b))?;
    let norm = y.norm();
    let mut report = LemmaReport {
        candidate: *c,
        m,
        j,
        y: y.embed().iter().map(ToString::to_string).collect(),
        norm: norm.to_string(),
        factors: Vec::new(),
        in_v2: None,
        outside_w2: None,
        primes_in_s_m: None,
        coprime_to_n: None,
        error: None,
    };
    let cache = IdealCache::new(ring.clone());
    match lemma_checks(&cache, &y, c.n, m) {
        Ok((factors, checks)) => {
            report.factors = factors;
            report.in_v2 = Some(checks[0]);
            report.outside_w2 = Some(checks[1]);
            report.primes_in_s_m = Some(checks[2]);
            report.coprime_to_n = Some(checks[3]);
        }
        Err(e @ (Error::FactoringCapacity(_) | Error::Overflow(_))) => report.error = Some(e.to_string()),
        Err(e) => return Err(e),
    }
    Ok(report)
}

type LemmaChecks = (Vec<PrimeFactorJson>, [bool; 4]);

fn lemma_checks(cache: &IdealCache, y: &CycInt, n: u64, m: u64) -> Result<LemmaChecks> {
    let fac = cache.factor_element(y)?;
    let factors = fac
        .iter()
        .map(|(p, v)| PrimeFactorJson {
            ell: p.ell.to_string(),
            f: p.f,
            valuation: *v,
        })
        .collect();
    let in_v2 = fac.iter().all(|(_, v)| *v < 2);
    let outside_w2 = fac.iter().any(|(p, _)| !m.is_multiple_of(p.ell));
    let in_s_m = !fac.is_empty() && fac.iter().all(|(p, _)| p.ell % m == 1);
    let coprime = fac.iter().all(|(p, _)| !n.is_multiple_of(p.ell));
    Ok((factors, [in_v2, outside_w2, in_s_m, coprime]))
}

/// One relation `Σ α_i ξ^(n_i) = 0` with `n_0 = 0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FourSum {
    pub coefficients: [i64; 4],
    pub exponents: [u64; 4],
    /// `n / gcd(n, n_1, n_2, n_3)`.
    pub reduced_order: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FourSumReport {
    pub n: u64,
    pub coefficient_set: Vec<i64>,
    pub tuples_checked: u64,
    pub vanishing: u64,
    pub survivors: Vec<FourSum>,
    /// Survivors whose reduced order does not divide 6.
    pub violations: Vec<FourSum>,
}

/// Largest `n` accepted by [`vanishing_four_sums`].
pub const FOUR_SUM_MAX_N: u64 = 120;

/// All `α_0 + α_1 ξ^(n_1) + α_2 ξ^(n_2) + α_3 ξ^(n_3) = 0` with
/// `0 <= n_1 <= n_2 <= n_3 < n` and `α_i` from `coefficient_set`, keeping
/// those without a vanishing proper subsum. When the set is closed under
/// negation, `α_0` is fixed to its positive representatives.
pub fn vanishing_four_sums(n: u64, coefficient_set: &[i64]) -> Result<FourSumReport> {
    if n == 0 || n > FOUR_SUM_MAX_N {
        return Err(Error::InvalidParameter(format!("n must lie in 1..={FOUR_SUM_MAX_N}")));
    }
    let mut set = coefficient_set.to_vec();
    set.sort_unstable();
    set.dedup();
    if set.is_empty() || set.contains(&0) {
        return Err(Error::InvalidParameter("coefficients must be nonzero and nonempty".into()));
    }
    let symmetric = set.iter().all(|c| set.contains(&-c));
    let leads: Vec<i64> = if symmetric {
        set.iter().copied().filter(|&c| c > 0).collect()
    } else {
        set.clone()
    };
    let ring = CyclotomicRing::new_any(n);
    let d = ring.degree();
    let pw: Vec<&[i64]> = (0..n).map(|e| ring.xi_power_coeffs(e)).collect();
    let vanishes = |terms: &[(i64, u64)]| {
        (0..d).all(|i| terms.iter().map(|&(a, e)| a * pw[e as usize][i]).sum::<i64>() == 0)
    };
    let mut report = FourSumReport {
        n,
        coefficient_set: set.clone(),
        tuples_checked: 0,
        vanishing: 0,
        survivors: Vec::new(),
        violations: Vec::new(),
    };
    for n1 in 0..n {
        for n2 in n1..n {
            for n3 in n2..n {
                let exps = [0, n1, n2, n3];
                for &a0 in &leads {
                    for &a1 in &set {
                        for &a2 in &set {
                            for &a3 in &set {
                                report.tuples_checked += 1;
                                let terms = [(a0, 0), (a1, n1), (a2, n2), (a3, n3)];
                                if !vanishes(&terms) {
                                    continue;
                                }
                                report.vanishing += 1;
                                let proper = (1u8..15).any(|mask| {
                                    let sub: Vec<(i64, u64)> =
                                        (0..4).filter(|i| mask >> i & 1 == 1).map(|i| terms[i]).collect();
                                    vanishes(&sub)
                                });
                                if proper {
                                    continue;
                                }
                                let g = [n1, n2, n3].iter().fold(n, |g, &e| g.gcd(&e));
                                let sum = FourSum {
                                    coefficients: [a0, a1, a2, a3],
                                    exponents: exps,
                                    reduced_order: n / g,
                                };
                                if 6 % sum.reduced_order != 0 {
                                    report.violations.push(sum.clone());
                                }
                                report.survivors.push(sum);
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(report)
}

/// `(Z/p^a)^×` factor of the CRT decomposition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrtFactor {
    pub p: u64,
    pub a: u32,
    pub modulus: u64,
    pub order: u64,
    pub cyclic: bool,
}

/// `Gal(Q(ξ_n)/Q) ≅ (Z/n)^×` with its Cayley table (entries index
/// `elements`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GaloisGroup {
    pub n: u64,
    pub elements: Vec<u64>,
    pub table: Vec<Vec<usize>>,
    pub crt: Vec<CrtFactor>,
}

impl GaloisGroup {
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn inverse(&self, r: u64) -> Option<u64> {
        mod_inverse(r, self.n)
    }

    pub fn indices(&self) -> Result<Vec<GaloisIndex>> {
        self.elements.iter().map(|&r| GaloisIndex::new(r as i64, self.n)).collect()
    }
}

pub fn galois_group(n: u64) -> Result<GaloisGroup> {
    crate::cyclotomic::validate_conductor(n)?;
    let elements: Vec<u64> = (1..n).filter(|&r| gcd(r, n) == 1).collect();
    let pos = |r: u64| elements.binary_search(&r).expect("closed under products");
    let table = elements
        .iter()
        .map(|&a| elements.iter().map(|&b| pos(a * b % n)).collect())
        .collect();
    let crt = factor_u64(n)
        .into_iter()
        .map(|(p, a)| {
            let modulus = p.pow(a);
            CrtFactor {
                p,
                a,
                modulus,
                order: euler_phi(modulus),
                cyclic: p != 2 || a <= 2,
            }
        })
        .collect();
    Ok(GaloisGroup {
        n,
        elements,
        table,
        crt,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prime_ideals::split_prime;

    /// Rank of the log-embedding matrix over one embedding per conjugate pair.
    fn log_rank(n: u64, units: &[CycInt]) -> usize {
        let embeddings: Vec<u64> = (1..=n / 2).filter(|&r| gcd(r, n) == 1).collect();
        let mut rows: Vec<Vec<f64>> = units
            .iter()
            .map(|u| {
                let c: Vec<f64> = u.embed().iter().map(|x| x.to_string().parse().unwrap()).collect();
                embeddings
                    .iter()
                    .map(|&r| {
                        let (mut re, mut im) = (0.0, 0.0);
                        for (j, cj) in c.iter().enumerate() {
                            let t = std::f64::consts::TAU * (r * j as u64 % n) as f64 / n as f64;
                            re += cj * t.cos();
                            im += cj * t.sin();
                        }
                        re.hypot(im).ln()
                    })
                    .collect()
            })
            .collect();
        let mut rank = 0;
        for col in 0..embeddings.len() {
            let Some(p) = (rank..rows.len()).max_by(|&a, &b| rows[a][col].abs().total_cmp(&rows[b][col].abs()))
            else {
                break;
            };
            if rows[p][col].abs() < 1e-8 {
                continue;
            }
            rows.swap(rank, p);
            let pivot = rows[rank].clone();
            for row in rows.iter_mut().skip(rank + 1) {
                let f = row[col] / pivot[col];
                for (x, y) in row.iter_mut().zip(&pivot) {
                    *x -= f * y;
                }
            }
            rank += 1;
        }
        rank
    }

    #[test]
    fn unit_generators_reach_full_rank() {
        for n in [5u64, 7, 8, 9, 12, 15, 16, 20, 21, 24, 28, 35, 39, 45, 55, 56, 60, 84] {
            let units = unit_generators(n).unwrap();
            let expected = euler_phi(n) as usize / 2 - 1;
            assert_eq!(log_rank(n, &units), expected, "n = {n}");
        }
    }

    #[test]
    fn unit_generator_examples() {
        let u4 = unit_generators(4).unwrap();
        assert_eq!(u4.len(), 2);
        let u12 = unit_generators(12).unwrap();
        let ring = CyclotomicRing::new(12).unwrap();
        assert!(u12.contains(&ring.one().sub(&ring.xi_pow(1)).unwrap()));
        let u5 = unit_generators(5).unwrap();
        let r5 = CyclotomicRing::new(5).unwrap();
        assert!(u5.contains(&r5.one().add(&r5.xi_pow(1)).unwrap()));
        for n in [3u64, 4, 5, 7, 8, 9, 12, 15, 16, 20, 21, 25, 27] {
            for u in unit_generators(n).unwrap() {
                assert!(u.norm().abs().is_one(), "n = {n}: {u}");
            }
        }
    }

    #[test]
    fn matrices() {
        let id = SymmetryElement::identity(5).unwrap();
        for (i, row) in id.matrix().iter().enumerate() {
            for (j, &c) in row.iter().enumerate() {
                assert_eq!(c, (i == j) as i64);
            }
        }
        let ring = CyclotomicRing::new(4).unwrap();
        let rot = SymmetryElement::new(&ring.xi_pow(1), GaloisIndex::identity(4)).unwrap();
        assert_eq!(rot.matrix(), &[vec![0, -1], vec![1, 0]]);
        assert!(SymmetryElement::new(&ring.integer(2.into()), GaloisIndex::identity(4)).is_err());
    }

    #[test]
    fn semidirect_law_on_generators() {
        for n in [5u64, 8, 12] {
            let gens = generator_elements(n).unwrap();
            for a in &gens {
                assert!(a.determinant().abs().is_one());
                for b in &gens {
                    let ab = a.compose(b).unwrap();
                    assert_eq!(ab.matrix(), a.matrix_product(b).unwrap().as_slice());
                }
                let inv = a.inverse().unwrap();
                assert_eq!(a.compose(&inv).unwrap().matrix(), SymmetryElement::identity(n).unwrap().matrix());
            }
        }
    }

    #[test]
    fn matrix_agrees_with_algebra() {
        let ring = CyclotomicRing::new(12).unwrap();
        let e = SymmetryElement::new(&ring.one().sub(&ring.xi_pow(1)).unwrap(), GaloisIndex::new(5, 12).unwrap()).unwrap();
        for z in [[1i64, 2, -3, 4], [0, 0, 1, 0], [-7, 1, 1, 2]] {
            let x = ring.unembed_i64(&z).unwrap();
            assert_eq!(e.apply(&z).unwrap(), e.apply_element(&x).unwrap().embed_i64().unwrap());
        }
    }

    #[test]
    fn stabiliser_small_run() {
        let ring = CyclotomicRing::new(4).unwrap();
        let s = SymmetryElement::new(&ring.xi_pow(1), GaloisIndex::new(3, 4).unwrap()).unwrap();
        let rep = verify_stabiliser_action(&s, 2, 15, 100, 0, Execution::Sequential).unwrap();
        assert!(rep.passed());
        assert_eq!(rep.checked, 100);
    }

    #[test]
    fn shear_is_not_a_symmetry() {
        let shear = vec![vec![1, 1], vec![0, 1]];
        let ce = find_counterexample(4, 2, &shear, 10).unwrap().expect("counterexample");
        assert_ne!(ce.point_kfree, ce.image_kfree);
        let id = vec![vec![1, 0], vec![0, 1]];
        assert!(find_counterexample(4, 2, &id, 6).unwrap().is_none());
    }

    #[test]
    fn wk_preservation() {
        let ring = CyclotomicRing::new(4).unwrap();
        let s = SymmetryElement::new(&ring.xi_pow(1), GaloisIndex::new(3, 4).unwrap()).unwrap();
        let rep = verify_wk_preservation(&s, 2, 6, 1000, 20, 0).unwrap();
        assert!(rep.passed());
        assert!(rep.checked_wk >= 8);
        assert!(rep.checked_coprime > 0);
        let x = ring.unembed_i64(&[1, 1]).unwrap();
        assert!(crate::prime_ideals::is_in_wk(&s.apply_element(&x).unwrap(), 2).unwrap());
    }

    #[test]
    fn splitting_prime_sets() {
        assert_eq!(splitting_primes(12, 100).unwrap().primes, vec![13, 37, 61, 73, 97]);
        for l in splitting_primes(4, 200).unwrap().primes {
            assert_eq!(l % 4, 1);
        }
        for m in [3u64, 5, 8, 12] {
            for l in splitting_primes(m, 300).unwrap().primes {
                let ps = split_prime(l, m).unwrap();
                assert_eq!(ps.len() as u64, euler_phi(m));
                assert!(ps.iter().all(|p| p.f == 1));
            }
        }
    }

    #[test]
    fn hypotheses() {
        assert!(h2(6, 12));
        assert!(!h2(4, 12));
        // 1 has order 1 mod 169.
        assert!(!h1(1, 12, 13));
        assert!(aq_search(12, 11, 100, 10, Execution::Sequential).is_err());
        assert!(matches!(aq_search(12, 13, 100, 5, Execution::Sequential), Err(Error::NotFound { a_bound: 5 })));
    }

    #[test]
    fn aq_small_search_and_json() {
        let c = aq_search(4, 5, 200, 10_000, Execution::Sequential).unwrap();
        let p = aq_search(4, 5, 200, 10_000, Execution::Parallel).unwrap();
        assert_eq!(c, p);
        for a in 0..c.a() {
            assert!(AqCandidate::new(4, 5, a, 200).is_err());
        }
        let s = serde_json::to_string(&c).unwrap();
        let back: AqCandidate = serde_json::from_str(&s).unwrap();
        assert_eq!(back, c);
        let tampered = s.replace(&format!("\"a\":{}", c.a()), &format!("\"a\":{}", c.a() + 1));
        assert!(serde_json::from_str::<AqCandidate>(&tampered).is_err());
        let rep = verify_lemma_factors(&c, 4, 1).unwrap();
        assert!(rep.passed(), "{rep:?}");
    }

    #[test]
    fn four_sums() {
        let r3 = vanishing_four_sums(3, &[-1, 1]).unwrap();
        assert!(r3.violations.is_empty());
        let r5 = vanishing_four_sums(5, &[-1, 1]).unwrap();
        assert!(r5.survivors.is_empty());
        let r6 = vanishing_four_sums(6, &[-1, 1]).unwrap();
        assert!(r6.violations.is_empty());
        assert!(vanishing_four_sums(4, &[0, 1]).is_err());
        // 1 - ξ_4 ... : (1 + ξ^2) vanishes in pairs, so every n = 4 solution splits.
        assert!(vanishing_four_sums(4, &[-1, 1]).unwrap().survivors.is_empty());
    }

    #[test]
    fn galois_groups() {
        let g4 = galois_group(4).unwrap();
        assert_eq!(g4.elements, vec![1, 3]);
        let g12 = galois_group(12).unwrap();
        assert_eq!(g12.order(), 4);
        for (i, row) in g12.table.iter().enumerate() {
            assert_eq!(row[i], 0);
        }
        for n in 3..=100u64 {
            if n % 4 == 2 {
                continue;
            }
            assert_eq!(galois_group(n).unwrap().order() as u64, euler_phi(n));
        }
        let g = galois_group(120).unwrap();
        assert_eq!(g.crt.iter().map(|f| f.order).product::<u64>(), euler_phi(120));
        assert!(!g.crt[0].cyclic);
    }
}
