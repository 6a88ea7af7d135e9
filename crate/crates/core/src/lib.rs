//! k-free integers of cyclotomic fields `Q(ξ_n)` as point sets in `Z^d`.

pub mod arith;
pub mod cyclotomic;
pub mod error;
pub mod fp_poly;
pub mod kfree;
pub mod lattice;
pub mod par;
pub mod poly;
pub mod prime_ideals;
pub mod symmetries;
pub mod zeta;

pub use cyclotomic::{CycInt, CyclotomicRing, GaloisIndex};
pub use error::{Error, Result};
pub use lattice::{box_points, hnf, ideal_lattice, IdealLattice};
pub use par::Execution;
pub use poly::{cyclotomic_polynomial, IntPolynomial};
pub use prime_ideals::{enumerate_prime_ideals, split_prime, IdealCache, PrimeIdeal};
pub use kfree::{sieve_box, KFreeBox};
pub use zeta::{dedekind_zeta, Interval, ZetaValue};
pub use symmetries::{aq_search, AqCandidate, SymmetryElement};
