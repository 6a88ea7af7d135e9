//! Full-rank sublattices of `Z^d` in Hermite normal form.
//!
//! Convention: basis rows are lower triangular. Row `i` is supported on
//! columns `0..=i`, the diagonal entry `h_ii` is positive, and entries left
//! of the diagonal are reduced, `0 <= b_ij < h_jj`. The index `[Z^d : L]` is
//! the product of the diagonal.

use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::cyclotomic::{CycInt, CyclotomicRing};
use crate::error::{Error, Result};
use crate::prime_ideals::PrimeIdeal;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdealLattice {
    n: u64,
    basis: Vec<Vec<BigInt>>,
    index: BigInt,
}

impl IdealLattice {
    /// Wrap an HNF basis computed from `generators`.
    pub fn from_generators(n: u64, d: usize, generators: &[Vec<BigInt>]) -> Result<Self> {
        let basis = hnf(d, generators, None)?;
        Ok(Self::from_basis(n, basis))
    }

    fn from_basis(n: u64, basis: Vec<Vec<BigInt>>) -> Self {
        let index = basis
            .iter()
            .enumerate()
            .fold(BigInt::one(), |acc, (i, row)| acc * &row[i]);
        Self { n, basis, index }
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<BigInt>] {
        &self.basis
    }

    pub fn index(&self) -> &BigInt {
        &self.index
    }

    pub fn diagonal(&self) -> Vec<BigInt> {
        (0..self.dim()).map(|i| self.basis[i][i].clone()).collect()
    }

    fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: len,
            });
        }
        Ok(())
    }

    /// Canonical coset representative: `0 <= z_i < h_ii` for every `i`.
    pub fn coset_id(&self, z: &[BigInt]) -> Result<Vec<BigInt>> {
        self.check_dim(z.len())?;
        let mut z = z.to_vec();
        for i in (0..self.dim()).rev() {
            let q = z[i].div_floor(&self.basis[i][i]);
            if !q.is_zero() {
                for (zj, bj) in z.iter_mut().zip(&self.basis[i]).take(i + 1) {
                    *zj -= &q * bj;
                }
            }
        }
        Ok(z)
    }

    pub fn member(&self, z: &[BigInt]) -> Result<bool> {
        Ok(self.coset_id(z)?.iter().all(Zero::is_zero))
    }

    pub fn member_i64(&self, z: &[i64]) -> Result<bool> {
        let z: Vec<BigInt> = z.iter().map(|&c| BigInt::from(c)).collect();
        self.member(&z)
    }

    pub fn contains(&self, x: &CycInt) -> Result<bool> {
        self.member(x.coeffs())
    }

    /// Is `self ⊆ other`?
    pub fn is_sublattice_of(&self, other: &Self) -> Result<bool> {
        for row in &self.basis {
            if !other.member(row)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn basis_i64(&self) -> Result<Vec<Vec<i64>>> {
        self.basis
            .iter()
            .map(|row| row.iter().map(|c| c.to_i64()).collect::<Option<Vec<_>>>())
            .collect::<Option<Vec<_>>>()
            .ok_or(Error::Overflow("lattice basis to i64"))
    }

    /// Machine-integer echelon basis for box enumeration and coset tests.
    pub fn to_small(&self) -> Result<SmallLattice> {
        let d = self.dim();
        let rev: Vec<Vec<BigInt>> = self
            .basis
            .iter()
            .map(|r| r.iter().rev().cloned().collect())
            .collect();
        let h = hnf(d, &rev, Some(&self.index))?;
        let upper: Vec<Vec<BigInt>> = (0..d)
            .map(|i| h[d - 1 - i].iter().rev().cloned().collect())
            .collect();
        let basis = Self::from_basis(self.n, upper).basis_i64()?;
        Ok(SmallLattice { basis })
    }

    pub fn to_json(&self) -> Result<LatticeJson> {
        Ok(LatticeJson {
            n: self.n,
            d: self.dim(),
            basis: self.basis_i64()?,
            index: self.index.to_u64().ok_or(Error::Overflow("lattice index"))?,
        })
    }

    pub fn from_json(j: &LatticeJson) -> Result<Self> {
        let gens: Vec<Vec<BigInt>> = j
            .basis
            .iter()
            .map(|r| r.iter().map(|&c| BigInt::from(c)).collect())
            .collect();
        let lat = Self::from_generators(j.n, j.d, &gens)?;
        if lat.index != BigInt::from(j.index) {
            return Err(Error::InvalidParameter(format!(
                "stated index {} differs from computed {}",
                j.index, lat.index
            )));
        }
        Ok(lat)
    }
}

/// JSON form `{n, d, basis: [[ints]], index}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeJson {
    pub n: u64,
    pub d: usize,
    pub basis: Vec<Vec<i64>>,
    pub index: u64,
}

/// Hermite normal form of the lattice spanned by `generators` in `Z^d`.
///
/// With `modulus = Some(D)` the caller asserts `D·Z^d ⊆ L`; all entries are
/// then kept reduced modulo `D`, which bounds coefficient growth.
pub fn hnf(d: usize, generators: &[Vec<BigInt>], modulus: Option<&BigInt>) -> Result<Vec<Vec<BigInt>>> {
    for g in generators {
        if g.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: g.len(),
            });
        }
    }
    let reduce = |row: &mut Vec<BigInt>| {
        if let Some(m) = modulus {
            for c in row.iter_mut() {
                *c = c.mod_floor(m);
            }
        }
    };
    let mut rows: Vec<Vec<BigInt>> = generators
        .iter()
        .cloned()
        .map(|mut r| {
            reduce(&mut r);
            r
        })
        .filter(|r| r.iter().any(|c| !c.is_zero()))
        .collect();
    let mut basis: Vec<Vec<BigInt>> = vec![Vec::new(); d];
    for j in (0..d).rev() {
        if let Some(m) = modulus {
            let mut e = vec![BigInt::zero(); d];
            e[j] = m.clone();
            rows.push(e);
        }
        // Euclid on column j until a single row carries a nonzero entry.
        loop {
            let mut nonzero: Vec<usize> = (0..rows.len()).filter(|&i| !rows[i][j].is_zero()).collect();
            if nonzero.len() <= 1 {
                break;
            }
            nonzero.sort_by(|&a, &b| rows[a][j].abs().cmp(&rows[b][j].abs()));
            let p = nonzero[0];
            let pivot = rows[p].clone();
            for &i in &nonzero[1..] {
                let q = rows[i][j].div_floor(&pivot[j]);
                for (c, pc) in rows[i].iter_mut().zip(&pivot).take(j + 1) {
                    *c -= &q * pc;
                }
                reduce(&mut rows[i]);
            }
        }
        let Some(p) = (0..rows.len()).find(|&i| !rows[i][j].is_zero()) else {
            return Err(Error::RankDeficient);
        };
        let mut pivot = rows.swap_remove(p);
        if pivot[j].is_negative() {
            for c in pivot.iter_mut() {
                *c = -&*c;
            }
        }
        if let Some(m) = modulus {
            for c in pivot.iter_mut().take(j) {
                *c = c.mod_floor(m);
            }
        }
        basis[j] = pivot;
        rows.retain(|r| r.iter().any(|c| !c.is_zero()));
    }
    for i in 1..d {
        for j in (0..i).rev() {
            let q = basis[i][j].div_floor(&basis[j][j]);
            if !q.is_zero() {
                let rj = basis[j].clone();
                for (c, pc) in basis[i].iter_mut().zip(&rj).take(j + 1) {
                    *c -= &q * pc;
                }
            }
        }
    }
    Ok(basis)
}

/// `ι(𝔭^m)` as an HNF lattice. The ideal `𝔭 = (ℓ, g(ξ))` has Z-basis the
/// HNF of `{ℓ ξ^i, g(ξ) ξ^i}`; powers use `𝔞𝔭 = ℓ𝔞 + g(ξ)𝔞`, reducing
/// modulo `ℓ^m` since `ℓ^m O ⊆ 𝔭^m`.
pub fn ideal_lattice(ring: &Arc<CyclotomicRing>, ideal: &PrimeIdeal, m: u32) -> Result<IdealLattice> {
    let mut lat = unit_lattice(ring);
    for step in 1..=m {
        lat = ideal_power_step(ring, ideal, &lat, step)?;
    }
    Ok(lat)
}

/// `Z^d = ι(O)`.
pub fn unit_lattice(ring: &Arc<CyclotomicRing>) -> IdealLattice {
    let d = ring.degree();
    let basis = (0..d)
        .map(|i| (0..d).map(|j| BigInt::from((i == j) as i64)).collect())
        .collect();
    IdealLattice::from_basis(ring.n(), basis)
}

/// Given `prev = ι(𝔭^(m-1))`, return `ι(𝔭^m)`.
pub fn ideal_power_step(
    ring: &Arc<CyclotomicRing>,
    ideal: &PrimeIdeal,
    prev: &IdealLattice,
    m: u32,
) -> Result<IdealLattice> {
    if ideal.n != ring.n() {
        return Err(Error::ConductorMismatch {
            left: ring.n(),
            right: ideal.n,
        });
    }
    if m == 0 {
        return Err(Error::InvalidParameter("ideal power step needs m >= 1".into()));
    }
    let d = ring.degree();
    let ell = BigInt::from(ideal.ell);
    let g = ring.reduce(ideal.g_poly());
    let modulus = num_traits::pow(ell.clone(), m as usize);
    let mut gens = Vec::with_capacity(2 * d);
    for row in prev.basis() {
        let b = ring.unembed(row)?;
        gens.push(b.scale(&ell).embed());
        gens.push(b.mul(&g)?.embed());
    }
    let lattice = IdealLattice::from_basis(ring.n(), hnf(d, &gens, Some(&modulus))?);
    debug_assert_eq!(lattice.index, num_traits::pow(ideal.norm_big(), m as usize));
    Ok(lattice)
}

/// Upper echelon basis with `i64` entries: row `i` is supported on columns
/// `i..d`, with positive diagonal. Coordinate 0 is the outermost level of the
/// box walk, so a slab `lo_0..=hi_0` costs in proportion to its width.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmallLattice {
    basis: Vec<Vec<i64>>,
}

impl SmallLattice {
    pub fn basis(&self) -> &[Vec<i64>] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn index(&self) -> u128 {
        (0..self.dim()).map(|i| self.basis[i][i] as u128).product()
    }

    /// Canonical representative with `0 <= z_i < u_ii`.
    pub fn coset_id(&self, z: &[i64]) -> Vec<i64> {
        let mut z = z.to_vec();
        for i in 0..self.dim() {
            let q = z[i].div_euclid(self.basis[i][i]);
            if q != 0 {
                for (zj, bj) in z.iter_mut().zip(&self.basis[i]).skip(i) {
                    *zj -= q * bj;
                }
            }
        }
        z
    }

    pub fn member(&self, z: &[i64]) -> bool {
        self.coset_id(z).iter().all(|&c| c == 0)
    }

    /// Visit every lattice point `z` with `lo_i <= z_i <= hi_i`.
    pub fn for_each_in_box<F: FnMut(&[i64])>(&self, lo: &[i64], hi: &[i64], mut f: F) {
        let mut acc = vec![0i64; self.dim()];
        self.descend(0, lo, hi, &mut acc, &mut f);
    }

    fn descend<F: FnMut(&[i64])>(&self, j: usize, lo: &[i64], hi: &[i64], acc: &mut [i64], f: &mut F) {
        if j == self.dim() {
            f(acc);
            return;
        }
        let h = self.basis[j][j];
        let first = (lo[j] - acc[j]).div_euclid(h) + i64::from((lo[j] - acc[j]).rem_euclid(h) != 0);
        let last = (hi[j] - acc[j]).div_euclid(h);
        if first > last {
            return;
        }
        let row = &self.basis[j];
        for (a, b) in acc.iter_mut().zip(row).skip(j) {
            *a += first * b;
        }
        for c in first..=last {
            self.descend(j + 1, lo, hi, acc, f);
            if c < last {
                for (a, b) in acc.iter_mut().zip(row).skip(j) {
                    *a += b;
                }
            }
        }
        for (a, b) in acc.iter_mut().zip(row).skip(j) {
            *a -= last * b;
        }
    }
}

/// All points of `[-r, r]^d` in lexicographic order.
pub fn box_points(r: u64, d: usize) -> BoxPoints {
    BoxPoints {
        r: r as i64,
        next: Some(vec![-(r as i64); d]),
    }
}

pub struct BoxPoints {
    r: i64,
    next: Option<Vec<i64>>,
}

impl Iterator for BoxPoints {
    type Item = Vec<i64>;

    fn next(&mut self) -> Option<Vec<i64>> {
        let cur = self.next.take()?;
        let mut succ = cur.clone();
        let mut i = succ.len();
        loop {
            if i == 0 {
                break;
            }
            i -= 1;
            if succ[i] < self.r {
                succ[i] += 1;
                self.next = Some(succ);
                break;
            }
            succ[i] = -self.r;
        }
        Some(cur)
    }
}
