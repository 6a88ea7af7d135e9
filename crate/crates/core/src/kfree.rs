//! k-free points of `ι(O_n)` inside centred boxes, patch statistics, and
//! admissibility of finite configurations.
//!
//! A box of radius `r` is stored as a flag per point of `[-r, r]^d` in
//! lexicographic order, `x1` most significant.

use std::collections::{BTreeMap, HashSet};
use std::io::Write;
use std::sync::Arc;

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::arith::gcd;
use crate::cyclotomic::CyclotomicRing;
use crate::error::{Error, Result};
use crate::lattice::{ideal_lattice, SmallLattice};
use crate::par::{self, Execution};
use crate::prime_ideals::{enumerate_prime_ideals, IdealCache, PrimeIdeal};
use crate::zeta::{density_constant, Interval, MAX_PRIME_BOUND};

/// Default cap on the number of box points.
pub const DEFAULT_MAX_POINTS: u64 = 1 << 26;

/// How to bound `|N(x)|` over the box.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormBound {
    /// `(d·r)^d`.
    #[default]
    Crude,
    /// Product of per-embedding maxima over box corners, capped by `Crude`.
    Embedding,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SieveOptions {
    pub norm_bound: NormBound,
    pub max_points: u64,
    /// Only sieve with ideals of norm at most this value.
    pub norm_limit: Option<u64>,
    pub exec: Execution,
}

impl Default for SieveOptions {
    fn default() -> Self {
        Self {
            norm_bound: NormBound::Crude,
            max_points: DEFAULT_MAX_POINTS,
            norm_limit: None,
            exec: Execution::default(),
        }
    }
}

/// Upper bound for `|N(x)|` over `x ∈ [-r, r]^d`.
pub fn norm_bound(n: u64, r: u64, kind: NormBound) -> Result<BigUint> {
    let ring = CyclotomicRing::new(n)?;
    let d = ring.degree();
    let crude = num_traits::pow(BigUint::from(d as u64) * r, d);
    if kind == NormBound::Crude || d > 20 || r == 0 {
        return Ok(crude);
    }
    let mut log_bound = d as f64 * (r as f64).ln();
    for u in 1..n.div_ceil(2) {
        if gcd(u, n) != 1 {
            continue;
        }
        let theta = std::f64::consts::TAU * u as f64 / n as f64;
        let w: Vec<(f64, f64)> = (0..d).map(|i| ((theta * i as f64).cos(), (theta * i as f64).sin())).collect();
        // s and -s give the same modulus, so fix s_0 = +1.
        let mut best = 0.0f64;
        for mask in 0u64..(1 << (d - 1)) {
            let (mut re, mut im) = w[0];
            for (i, &(c, s)) in w.iter().enumerate().skip(1) {
                if mask >> (i - 1) & 1 == 1 {
                    re -= c;
                    im -= s;
                } else {
                    re += c;
                    im += s;
                }
            }
            best = best.max(re.hypot(im));
        }
        log_bound += 2.0 * best.ln();
    }
    let emb = (log_bound + 1e-9 * log_bound.abs().max(1.0)).exp().ceil();
    let emb = BigUint::from(emb.to_u128().unwrap_or(u128::MAX));
    Ok(emb.min(crude))
}

/// The k-free points of a centred box.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KFreeBox {
    n: u64,
    k: u32,
    r: u64,
    d: usize,
    flags: Vec<bool>,
    ideals: Vec<PrimeIdeal>,
    norm_bound: BigUint,
}

impl KFreeBox {
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn radius(&self) -> u64 {
        self.r
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn side(&self) -> usize {
        2 * self.r as usize + 1
    }

    pub fn volume(&self) -> usize {
        self.flags.len()
    }

    pub fn flags(&self) -> &[bool] {
        &self.flags
    }

    /// Prime ideals `𝔭` whose powers `𝔭^k` were sieved out.
    pub fn prime_ideals_used(&self) -> &[PrimeIdeal] {
        &self.ideals
    }

    pub fn norm_bound(&self) -> &BigUint {
        &self.norm_bound
    }

    pub fn count(&self) -> usize {
        self.flags.iter().filter(|&&f| f).count()
    }

    pub fn index_of(&self, z: &[i64]) -> Option<usize> {
        if z.len() != self.d {
            return None;
        }
        let r = self.r as i64;
        let side = self.side();
        let mut idx = 0usize;
        for &c in z {
            if c < -r || c > r {
                return None;
            }
            idx = idx * side + (c + r) as usize;
        }
        Some(idx)
    }

    pub fn point_at(&self, mut idx: usize) -> Vec<i64> {
        let side = self.side();
        let mut z = vec![0i64; self.d];
        for c in z.iter_mut().rev() {
            *c = (idx % side) as i64 - self.r as i64;
            idx /= side;
        }
        z
    }

    /// Whether `z` lies in the box and is flagged.
    pub fn contains(&self, z: &[i64]) -> bool {
        self.index_of(z).is_some_and(|i| self.flags[i])
    }

    /// Flagged points in lexicographic order.
    pub fn points(&self) -> impl Iterator<Item = Vec<i64>> + '_ {
        self.flags
            .iter()
            .enumerate()
            .filter(|(_, &f)| f)
            .map(|(i, _)| self.point_at(i))
    }

    /// Flags as a `0`/`1` string in box order.
    pub fn bitstring(&self) -> String {
        self.flags.iter().map(|&f| if f { '1' } else { '0' }).collect()
    }

    /// CSV with header `x1,…,xd,kfree`, one row per box point in box order.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let mut header: Vec<String> = (1..=self.d).map(|i| format!("x{i}")).collect();
        header.push("kfree".into());
        writeln!(w, "{}", header.join(","))?;
        for (i, &f) in self.flags.iter().enumerate() {
            let mut row: Vec<String> = self.point_at(i).iter().map(i64::to_string).collect();
            row.push(u8::from(f).to_string());
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

fn validate_sieve(n: u64, k: u32, r: u64, max_points: u64) -> Result<(Arc<CyclotomicRing>, usize)> {
    let ring = CyclotomicRing::new(n)?;
    if k < 2 {
        return Err(Error::InvalidParameter(format!("k must be at least 2, got {k}")));
    }
    if r < 1 {
        return Err(Error::InvalidParameter("radius must be at least 1".into()));
    }
    let d = ring.degree();
    let total = (2 * r as u128 + 1).checked_pow(d as u32).unwrap_or(u128::MAX);
    if total > max_points as u128 {
        return Err(Error::ResourceCap {
            requested: total,
            cap: max_points as u128,
        });
    }
    Ok((ring, total as usize))
}

pub fn sieve_box(n: u64, k: u32, r: u64) -> Result<KFreeBox> {
    sieve_box_with(n, k, r, &SieveOptions::default())
}

/// Sieve `[-r, r]^d` by every `Γ_{𝔭^k}` with `N(𝔭)^k` at most the norm bound.
pub fn sieve_box_with(n: u64, k: u32, r: u64, opts: &SieveOptions) -> Result<KFreeBox> {
    let (ring, total) = validate_sieve(n, k, r, opts.max_points)?;
    let d = ring.degree();
    let bound = norm_bound(n, r, opts.norm_bound)?;
    let mut limit = bound.nth_root(k);
    if let Some(cap) = opts.norm_limit {
        limit = limit.min(BigUint::from(cap));
    }
    let limit = limit
        .to_u64()
        .filter(|&l| l <= MAX_PRIME_BOUND)
        .ok_or_else(|| Error::ResourceCap {
            requested: limit.to_u128().unwrap_or(u128::MAX),
            cap: MAX_PRIME_BOUND as u128,
        })?;
    let ideals = if limit >= 2 {
        enumerate_prime_ideals(n, limit)?
    } else {
        Vec::new()
    };
    let lattices = par::map(opts.exec, &ideals, |p| ideal_lattice(&ring, p, k)?.to_small())
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let side = 2 * r as usize + 1;
    let slab = total / side;
    let mut flags = vec![true; total];
    let slabs_per_chunk = (side / (8 * par::workers())).max(1);
    let ri = r as i64;
    par::for_each_chunk_mut(opts.exec, &mut flags, slab * slabs_per_chunk, |ci, chunk| {
        let first = (ci * slabs_per_chunk) as i64 - ri;
        let last = first + (chunk.len() / slab) as i64 - 1;
        let mut lo = vec![-ri; d];
        let mut hi = vec![ri; d];
        lo[0] = first;
        hi[0] = last;
        let offset = (first + ri) as usize * slab;
        for lat in &lattices {
            lat.for_each_in_box(&lo, &hi, |z| {
                let idx = z.iter().fold(0usize, |acc, &c| acc * side + (c + ri) as usize);
                chunk[idx - offset] = false;
            });
        }
    });
    flags[total / 2] = false;
    Ok(KFreeBox {
        n,
        k,
        r,
        d,
        flags,
        ideals,
        norm_bound: bound,
    })
}

/// Flags from the pointwise predicate, for cross-checking the sieve.
pub fn pointwise_box(n: u64, k: u32, r: u64, exec: Execution) -> Result<KFreeBox> {
    let (ring, total) = validate_sieve(n, k, r, DEFAULT_MAX_POINTS)?;
    let d = ring.degree();
    let cache = IdealCache::new(ring.clone());
    let mut shell = KFreeBox {
        n,
        k,
        r,
        d,
        flags: Vec::new(),
        ideals: Vec::new(),
        norm_bound: norm_bound(n, r, NormBound::Crude)?,
    };
    let flags = par::map_range(exec, total, |i| {
        let z = shell_point(r, d, i);
        let x = ring.unembed_i64(&z)?;
        cache.is_kfree(&x, k)
    });
    shell.flags = flags.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(shell)
}

fn shell_point(r: u64, d: usize, mut idx: usize) -> Vec<i64> {
    let side = 2 * r as usize + 1;
    let mut z = vec![0i64; d];
    for c in z.iter_mut().rev() {
        *c = (idx % side) as i64 - r as i64;
        idx /= side;
    }
    z
}

/// Empirical density of a box against the `1/ζ_K(k)` enclosure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub n: u64,
    pub k: u32,
    pub radius: u64,
    pub point_count: u64,
    pub box_volume: u64,
    /// Reduced fraction `p/q`.
    pub empirical_density: String,
    pub empirical_density_approx: f64,
    pub reference_density: Interval,
    pub zeta_prime_bound: u64,
    /// `|empirical - mid| / mid` against the reference midpoint.
    pub relative_gap: f64,
}

pub fn density_estimate(b: &KFreeBox, zeta_prime_bound: u64) -> Result<DensityReport> {
    let count = b.count() as u64;
    let vol = b.volume() as u64;
    let exact = Ratio::new(count, vol);
    let approx = count as f64 / vol as f64;
    let reference = density_constant(b.n, b.k, zeta_prime_bound)?;
    let mid = reference.mid();
    Ok(DensityReport {
        n: b.n,
        k: b.k,
        radius: b.r,
        point_count: count,
        box_volume: vol,
        empirical_density: format!("{}/{}", exact.numer(), exact.denom()),
        empirical_density_approx: approx,
        reference_density: reference,
        zeta_prime_bound,
        relative_gap: (approx - mid).abs() / mid,
    })
}

/// Finite list of distinct offsets, kept in lexicographic order; bit `i` of
/// a fill mask refers to offset `i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<i64>>", into = "Vec<Vec<i64>>")]
pub struct PatchShape {
    offsets: Vec<Vec<i64>>,
}

impl PatchShape {
    pub const MAX_OFFSETS: usize = 64;

    pub fn new(mut offsets: Vec<Vec<i64>>) -> Result<Self> {
        let count = offsets.len();
        let shape_err = |reason: &str| Error::ShapeMismatch {
            shape: count,
            reason: reason.into(),
        };
        if offsets.is_empty() {
            return Err(shape_err("shape is empty"));
        }
        if offsets.len() > Self::MAX_OFFSETS {
            return Err(shape_err("more than 64 offsets"));
        }
        let d = offsets[0].len();
        if offsets.iter().any(|o| o.len() != d) {
            return Err(shape_err("offsets of unequal length"));
        }
        let before = offsets.len();
        offsets.sort();
        offsets.dedup();
        if offsets.len() != before {
            return Err(shape_err("repeated offset"));
        }
        Ok(Self { offsets })
    }

    /// The block `{0..w}^d`.
    pub fn block(d: usize, w: i64) -> Result<Self> {
        let pts = (0..(w.max(0) as usize).pow(d as u32))
            .map(|mut i| {
                let mut z = vec![0i64; d];
                for c in z.iter_mut().rev() {
                    *c = (i % w as usize) as i64;
                    i /= w as usize;
                }
                z
            })
            .collect();
        Self::new(pts)
    }

    pub fn offsets(&self) -> &[Vec<i64>] {
        &self.offsets
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.offsets[0].len()
    }
}

impl TryFrom<Vec<Vec<i64>>> for PatchShape {
    type Error = Error;

    fn try_from(v: Vec<Vec<i64>>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<PatchShape> for Vec<Vec<i64>> {
    fn from(s: PatchShape) -> Self {
        s.offsets
    }
}

/// A shape together with an occupancy bit per offset.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PatchConfig {
    pub shape: PatchShape,
    pub fill: u64,
}

impl PatchConfig {
    pub fn is_occupied(&self, i: usize) -> bool {
        self.fill >> i & 1 == 1
    }

    pub fn occupied(&self) -> Vec<Vec<i64>> {
        self.shape
            .offsets
            .iter()
            .enumerate()
            .filter(|(i, _)| self.is_occupied(*i))
            .map(|(_, o)| o.clone())
            .collect()
    }

    pub fn fill_string(&self) -> String {
        (0..self.shape.len())
            .map(|i| if self.is_occupied(i) { '1' } else { '0' })
            .collect()
    }

    pub fn to_json(&self, n: u64, k: u32) -> PatchJson {
        PatchJson {
            n,
            k,
            shape: self.shape.offsets.clone(),
            fill: self.fill_string(),
        }
    }
}

/// Wire form `{n, k, shape, fill}` with `fill` a `0`/`1` string.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatchJson {
    pub n: u64,
    pub k: u32,
    pub shape: Vec<Vec<i64>>,
    pub fill: String,
}

impl PatchJson {
    /// Occupied points, in the order given.
    pub fn occupied_points(&self) -> Result<Vec<Vec<i64>>> {
        if self.fill.chars().count() != self.shape.len() {
            return Err(Error::InvalidParameter(format!(
                "fill has {} bits for {} offsets",
                self.fill.chars().count(),
                self.shape.len()
            )));
        }
        self.fill
            .chars()
            .zip(&self.shape)
            .filter_map(|(c, o)| match c {
                '1' => Some(Ok(o.clone())),
                '0' => None,
                other => Some(Err(Error::InvalidParameter(format!("bad fill character {other:?}")))),
            })
            .collect()
    }
}

/// Occurrence counts of fill masks over all anchors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatchCounts {
    pub shape: PatchShape,
    pub anchors: u64,
    pub counts: BTreeMap<u64, u64>,
}

impl PatchCounts {
    /// `log(#distinct) / |shape|`.
    pub fn entropy_estimate(&self) -> f64 {
        (self.distinct() as f64).ln() / self.shape.len() as f64
    }

    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    pub fn frequency(&self, fill: u64) -> f64 {
        self.counts.get(&fill).copied().unwrap_or(0) as f64 / self.anchors as f64
    }

    pub fn configs(&self) -> impl Iterator<Item = (PatchConfig, u64)> + '_ {
        self.counts.iter().map(|(&fill, &c)| {
            (
                PatchConfig {
                    shape: self.shape.clone(),
                    fill,
                },
                c,
            )
        })
    }
}

pub fn extract_patches(b: &KFreeBox, shape: &PatchShape) -> Result<PatchCounts> {
    extract_patches_with(b, shape, Execution::default())
}

/// Count fill patterns at every anchor `z` with `z + shape` inside the box.
pub fn extract_patches_with(b: &KFreeBox, shape: &PatchShape, exec: Execution) -> Result<PatchCounts> {
    if shape.dim() != b.d {
        return Err(Error::DimensionMismatch {
            expected: b.d,
            got: shape.dim(),
        });
    }
    let r = b.r as i64;
    let d = b.d;
    let lo: Vec<i64> = (0..d).map(|i| -r - shape.offsets.iter().map(|o| o[i]).min().unwrap()).collect();
    let hi: Vec<i64> = (0..d).map(|i| r - shape.offsets.iter().map(|o| o[i]).max().unwrap()).collect();
    if lo.iter().zip(&hi).any(|(a, b)| a > b) {
        return Err(Error::ShapeMismatch {
            shape: shape.len(),
            reason: format!("does not fit in a box of radius {}", b.r),
        });
    }
    let side = b.side() as i64;
    let deltas: Vec<i64> = shape
        .offsets
        .iter()
        .map(|o| o.iter().fold(0i64, |acc, &c| acc * side + c))
        .collect();
    let rest: usize = (1..d).map(|i| (hi[i] - lo[i] + 1) as usize).product();
    let slabs = (hi[0] - lo[0] + 1) as usize;
    let per_slab = par::map_range(exec, slabs, |s| {
        let mut counts = BTreeMap::new();
        let mut z = lo.clone();
        z[0] = lo[0] + s as i64;
        for _ in 0..rest {
            let base = b.index_of(&z).expect("anchor in box") as i64;
            let mask = deltas
                .iter()
                .enumerate()
                .fold(0u64, |m, (i, &dl)| m | (b.flags[(base + dl) as usize] as u64) << i);
            *counts.entry(mask).or_insert(0u64) += 1;
            for j in (1..d).rev() {
                if z[j] < hi[j] {
                    z[j] += 1;
                    break;
                }
                z[j] = lo[j];
            }
        }
        counts
    });
    let mut counts = BTreeMap::new();
    for part in per_slab {
        for (m, c) in part {
            *counts.entry(m).or_insert(0) += c;
        }
    }
    Ok(PatchCounts {
        shape: shape.clone(),
        anchors: (slabs * rest) as u64,
        counts,
    })
}

/// `log(#distinct patches) / |shape|`, a finite-size proxy for the patch
/// counting entropy.
pub fn patch_entropy_estimate(b: &KFreeBox, shape: &PatchShape) -> Result<f64> {
    Ok(extract_patches(b, shape)?.entropy_estimate())
}

/// Outcome of an admissibility test; `witness` is an ideal `𝔭` whose
/// `Γ_{𝔭^k}` cosets are all hit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub admissible: bool,
    pub points: usize,
    pub ideals_checked: usize,
    pub witness: Option<PrimeIdeal>,
}

/// Precomputed `Γ_{𝔭^k}` lattices for repeated admissibility checks.
pub struct AdmissibilityChecker {
    n: u64,
    k: u32,
    d: usize,
    lattices: Vec<(PrimeIdeal, u128, SmallLattice)>,
}

impl AdmissibilityChecker {
    /// Covers patches of up to `max_points` distinct points.
    pub fn new(n: u64, k: u32, max_points: usize) -> Result<Self> {
        let ring = CyclotomicRing::new(n)?;
        if k < 2 {
            return Err(Error::InvalidParameter(format!("k must be at least 2, got {k}")));
        }
        let limit = BigUint::from(max_points).nth_root(k).to_u64().unwrap_or(u64::MAX);
        let ideals = if limit >= 2 {
            enumerate_prime_ideals(n, limit)?
        } else {
            Vec::new()
        };
        let lattices = ideals
            .into_iter()
            .map(|p| {
                let lat = ideal_lattice(&ring, &p, k)?.to_small()?;
                Ok((p, lat.index(), lat))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            n,
            k,
            d: ring.degree(),
            lattices,
        })
    }

    pub fn check(&self, patch: &[Vec<i64>]) -> Result<AdmissibilityReport> {
        if let Some(bad) = patch.iter().find(|p| p.len() != self.d) {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: bad.len(),
            });
        }
        let distinct: HashSet<&Vec<i64>> = patch.iter().collect();
        let size = distinct.len() as u128;
        let mut checked = 0;
        for (p, index, lat) in &self.lattices {
            if *index > size {
                break;
            }
            checked += 1;
            let cosets: HashSet<Vec<i64>> = distinct.iter().map(|z| lat.coset_id(z)).collect();
            if cosets.len() as u128 == *index {
                return Ok(AdmissibilityReport {
                    admissible: false,
                    points: distinct.len(),
                    ideals_checked: checked,
                    witness: Some(p.clone()),
                });
            }
        }
        Ok(AdmissibilityReport {
            admissible: true,
            points: distinct.len(),
            ideals_checked: checked,
            witness: None,
        })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn k(&self) -> u32 {
        self.k
    }
}

/// Does `patch` miss a coset of `Γ_{𝔭^k}` for every prime ideal `𝔭`?
pub fn is_admissible(patch: &[Vec<i64>], n: u64, k: u32) -> Result<bool> {
    let size = patch.iter().collect::<HashSet<_>>().len();
    Ok(AdmissibilityChecker::new(n, k, size)?.check(patch)?.admissible)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeredityReport {
    pub seed: u64,
    pub trials: usize,
    pub window_points: usize,
    pub full_window_admissible: bool,
    pub failed_trials: Vec<usize>,
}

impl HeredityReport {
    pub fn passed(&self) -> bool {
        self.full_window_admissible && self.failed_trials.is_empty()
    }
}

/// Check the flagged points of `b` and `trials` uniformly random subsets of
/// them for admissibility. Trial `t` draws from a generator seeded by
/// `seed + t`.
pub fn hereditary_check(b: &KFreeBox, trials: usize, seed: u64, exec: Execution) -> Result<HeredityReport> {
    let window: Vec<Vec<i64>> = b.points().collect();
    let checker = AdmissibilityChecker::new(b.n, b.k, window.len())?;
    let full = checker.check(&window)?.admissible;
    let outcomes = par::map_range(exec, trials, |t| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(t as u64));
        let subset: Vec<Vec<i64>> = window.iter().filter(|_| rng.gen::<bool>()).cloned().collect();
        checker.check(&subset).map(|rep| rep.admissible)
    });
    let mut failed = Vec::new();
    for (t, ok) in outcomes.into_iter().enumerate() {
        if !ok? {
            failed.push(t);
        }
    }
    Ok(HeredityReport {
        seed,
        trials,
        window_points: window.len(),
        full_window_admissible: full,
        failed_trials: failed,
    })
}

/// Random sample of up to `count` flagged points, in box order.
pub fn sample_points(b: &KFreeBox, count: usize, seed: u64) -> Vec<Vec<i64>> {
    let flagged: Vec<usize> = (0..b.volume()).filter(|&i| b.flags[i]).collect();
    if flagged.len() <= count {
        return flagged.into_iter().map(|i| b.point_at(i)).collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = rand::seq::index::sample(&mut rng, flagged.len(), count).into_vec();
    picked.sort_unstable();
    picked.into_iter().map(|i| b.point_at(flagged[i])).collect()
}
