//! Exact linear algebra in SL(2, ℚ): products, inverses, closed-form
//! generator powers, rational eigenstructure, mod-2 residues, and the
//! entrywise sup-norm used by the discreteness and accumulation probes.
//!
//! Everything here is computed over arbitrary-precision rationals;
//! floating point never enters except through explicit conversions.

use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use num::bigint::BigInt;
use num::integer::Integer;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use serde::de::{Deserialize, Deserializer};
use serde::ser::{Serialize, Serializer};

use crate::error::Error;

/// Arbitrary-precision rational, always normalized: positive
/// denominator, coprime numerator/denominator.
pub type Rational = BigRational;

/// Small-integer rational constant.
pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `p/q` as an exact rational. Panics if `q == 0`.
pub fn ratio(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

/// `base^k` for integer `k` of either sign (`base > 0`).
pub fn int_pow(base: u32, k: i64) -> Rational {
    let mag = num::pow::pow(BigInt::from(base), k.unsigned_abs() as usize);
    if k >= 0 {
        Rational::from_integer(mag)
    } else {
        Rational::new(BigInt::one(), mag)
    }
}

/// Serialize a rational as `p/q`, or plain `p` when the denominator is 1.
pub fn rat_to_string(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parse `p` or `p/q` (optional sign on `p`) into an exact rational.
pub fn rat_from_str(s: &str) -> Result<Rational, Error> {
    let s = s.trim();
    let parse_int = |t: &str| {
        BigInt::from_str(t.trim()).map_err(|_| Error::Parse(format!("bad integer {t:?}")))
    };
    match s.split_once('/') {
        None => Ok(Rational::from_integer(parse_int(s)?)),
        Some((p, q)) => {
            let p = parse_int(p)?;
            let q = parse_int(q)?;
            if q.is_zero() {
                return Err(Error::Parse(format!("zero denominator in {s:?}")));
            }
            Ok(Rational::new(p, q))
        }
    }
}

/// Rational to double; NaN only for values outside the f64 range in
/// pathological numerator/denominator combinations.
pub fn rat_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// A 2×2 rational matrix with determinant exactly 1, checked on
/// construction. The working representation of every group element.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct UniMat {
    entries: [[Rational; 2]; 2],
}

impl UniMat {
    /// Build from row-major entries, rejecting determinant ≠ 1.
    pub fn new(entries: [[Rational; 2]; 2]) -> Result<Self, Error> {
        let det = &entries[0][0] * &entries[1][1] - &entries[0][1] * &entries[1][0];
        if !det.is_one() {
            return Err(Error::NotUnimodular {
                det: rat_to_string(&det),
            });
        }
        Ok(UniMat { entries })
    }

    /// Construction for products of already-unimodular matrices, where
    /// the determinant is 1 by algebra.
    fn from_product(entries: [[Rational; 2]; 2]) -> Self {
        debug_assert!(
            (&entries[0][0] * &entries[1][1] - &entries[0][1] * &entries[1][0]).is_one()
        );
        UniMat { entries }
    }

    /// Integer-entry convenience constructor (panics on det ≠ 1).
    pub fn from_i64(rows: [[i64; 2]; 2]) -> Self {
        UniMat::new(rows.map(|r| r.map(rat))).expect("integer matrix must have det 1")
    }

    pub fn identity() -> Self {
        UniMat {
            entries: [
                [Rational::one(), Rational::zero()],
                [Rational::zero(), Rational::one()],
            ],
        }
    }

    /// Row-major entry access; `i`, `j` ∈ {0, 1}.
    pub fn entry(&self, i: usize, j: usize) -> &Rational {
        &self.entries[i][j]
    }

    pub fn entries(&self) -> &[[Rational; 2]; 2] {
        &self.entries
    }

    pub fn is_identity(&self) -> bool {
        *self == UniMat::identity()
    }

    /// True for ±I, the center of SL₂.
    pub fn is_central(&self) -> bool {
        let e = &self.entries;
        e[0][1].is_zero() && e[1][0].is_zero() && e[0][0] == e[1][1]
    }

    /// The adjugate [[d, −b], [−c, a]]: the exact inverse, since det = 1.
    pub fn inverse(&self) -> Self {
        let e = &self.entries;
        UniMat::from_product([
            [e[1][1].clone(), -e[0][1].clone()],
            [-e[1][0].clone(), e[0][0].clone()],
        ])
    }

    /// Exact k-th power by binary powering; negative k via the inverse.
    pub fn pow(&self, k: i64) -> Self {
        let mut base = if k < 0 { self.inverse() } else { self.clone() };
        let mut exp = k.unsigned_abs();
        let mut acc = UniMat::identity();
        while exp > 0 {
            if exp & 1 == 1 {
                acc = &acc * &base;
            }
            exp >>= 1;
            if exp > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Largest entrywise |x − y|, exact.
    pub fn sup_dist(&self, other: &UniMat) -> Rational {
        let mut best = Rational::zero();
        for i in 0..2 {
            for j in 0..2 {
                let diff = (&self.entries[i][j] - &other.entries[i][j]).abs();
                if diff > best {
                    best = diff;
                }
            }
        }
        best
    }

    /// Entrywise residues mod 2; all entries must be integers.
    pub fn mod2_residue(&self) -> Result<[[u8; 2]; 2], Error> {
        let two = BigInt::from(2);
        let mut out = [[0u8; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                let e = &self.entries[i][j];
                if !e.is_integer() {
                    return Err(Error::NonIntegerEntry {
                        entry: rat_to_string(e),
                    });
                }
                out[i][j] = u8::try_from(e.to_integer().mod_floor(&two)).expect("residue is 0 or 1");
            }
        }
        Ok(out)
    }

    /// Entries as doubles, row-major (feeds the Möbius action).
    pub fn to_f64(&self) -> [[f64; 2]; 2] {
        [
            [rat_to_f64(&self.entries[0][0]), rat_to_f64(&self.entries[0][1])],
            [rat_to_f64(&self.entries[1][0]), rat_to_f64(&self.entries[1][1])],
        ]
    }

    /// [[2, 1], [0, 1/2]] — first generator of the dense default pair.
    pub fn dense_a() -> Self {
        UniMat::new([[rat(2), rat(1)], [rat(0), ratio(1, 2)]]).expect("det 1")
    }

    /// [[3, 0], [1, 1/3]] — second generator of the dense default pair.
    pub fn dense_b() -> Self {
        UniMat::new([[rat(3), rat(0)], [rat(1), ratio(1, 3)]]).expect("det 1")
    }

    /// [[1, 2], [0, 1]] — first generator of the Γ(2) congruence pair.
    pub fn gamma2_u() -> Self {
        UniMat::from_i64([[1, 2], [0, 1]])
    }

    /// [[1, 0], [2, 1]] — second generator of the Γ(2) congruence pair.
    pub fn gamma2_v() -> Self {
        UniMat::from_i64([[1, 0], [2, 1]])
    }
}

impl Mul for &UniMat {
    type Output = UniMat;

    fn mul(self, rhs: &UniMat) -> UniMat {
        let x = &self.entries;
        let y = &rhs.entries;
        let ent = |i: usize, j: usize| &x[i][0] * &y[0][j] + &x[i][1] * &y[1][j];
        UniMat::from_product([[ent(0, 0), ent(0, 1)], [ent(1, 0), ent(1, 1)]])
    }
}

impl fmt::Display for UniMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let e = &self.entries;
        write!(
            f,
            "[[{},{}],[{},{}]]",
            rat_to_string(&e[0][0]),
            rat_to_string(&e[0][1]),
            rat_to_string(&e[1][0]),
            rat_to_string(&e[1][1])
        )
    }
}

impl Serialize for UniMat {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let e = &self.entries;
        let rows: [[String; 2]; 2] = [
            [rat_to_string(&e[0][0]), rat_to_string(&e[0][1])],
            [rat_to_string(&e[1][0]), rat_to_string(&e[1][1])],
        ];
        rows.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for UniMat {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let rows = <[[String; 2]; 2]>::deserialize(deserializer)?;
        let mut entries = [
            [Rational::zero(), Rational::zero()],
            [Rational::zero(), Rational::zero()],
        ];
        for i in 0..2 {
            for j in 0..2 {
                entries[i][j] = rat_from_str(&rows[i][j]).map_err(serde::de::Error::custom)?;
            }
        }
        UniMat::new(entries).map_err(serde::de::Error::custom)
    }
}

/// The two distinguished generators whose integer powers have
/// triangular closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Generator {
    A,
    B,
}

/// Closed form for integer powers of the distinguished generators,
/// valid for every k ∈ ℤ (k = 0 gives the identity):
///
/// Aᵏ = [[2ᵏ, (4ᵏ−1)/(2ᵏ⁻¹·3)], [0, 2⁻ᵏ]],
/// Bᵏ = [[3ᵏ, 0], [(9ᵏ−1)/(3ᵏ⁻¹·8), 3⁻ᵏ]].
pub fn closed_power(generator: Generator, k: i64) -> UniMat {
    let entries = match generator {
        Generator::A => {
            let off = (int_pow(4, k) - Rational::one()) / (int_pow(2, k - 1) * rat(3));
            [[int_pow(2, k), off], [Rational::zero(), int_pow(2, -k)]]
        }
        Generator::B => {
            let off = (int_pow(9, k) - Rational::one()) / (int_pow(3, k - 1) * rat(8));
            [[int_pow(3, k), Rational::zero()], [off, int_pow(3, -k)]]
        }
    };
    UniMat::new(entries).expect("closed form is unimodular")
}

/// One rational eigenpair: exact eigenvalue with a primitive integer
/// eigenvector whose first nonzero coordinate is positive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EigenPair {
    pub value: Rational,
    pub vector: (BigInt, BigInt),
}

/// √r over ℚ if it exists: both numerator and denominator must be
/// perfect squares.
fn sqrt_rational(r: &Rational) -> Option<Rational> {
    if r.is_negative() {
        return None;
    }
    let (p, q) = (r.numer(), r.denom());
    let sp = p.sqrt();
    let sq = q.sqrt();
    if &(&sp * &sp) == p && &(&sq * &sq) == q {
        Some(Rational::new(sp, sq))
    } else {
        None
    }
}

/// Scale a rational pair to coprime integers with positive leading sign.
fn primitive_vector(x: &Rational, y: &Rational) -> (BigInt, BigInt) {
    let scale = x.denom().lcm(y.denom());
    let a = x.numer() * (&scale / x.denom());
    let b = y.numer() * (&scale / y.denom());
    let g = a.gcd(&b);
    debug_assert!(!g.is_zero(), "eigenvector must be nonzero");
    let (a, b) = (a / &g, b / &g);
    let flip = a.is_negative() || (a.is_zero() && b.is_negative());
    if flip {
        (-a, -b)
    } else {
        (a, b)
    }
}

/// A primitive eigenvector of `m` for the eigenvalue `value`, derived
/// from the kernel of m − λI.
fn eigenvector_for(m: &UniMat, value: &Rational) -> (BigInt, BigInt) {
    let a = m.entry(0, 0);
    let b = m.entry(0, 1);
    let c = m.entry(1, 0);
    let d = m.entry(1, 1);
    if !b.is_zero() {
        // first row (a−λ)x + by = 0 with b ≠ 0: take (b, λ − a)
        primitive_vector(b, &(value - a))
    } else if value != a {
        // lower triangular, λ = d: kernel is the second axis
        (BigInt::zero(), BigInt::one())
    } else if value != d {
        // lower triangular, λ = a ≠ d: cx + (d−λ)y = 0
        primitive_vector(&(d - value), &(-c.clone()))
    } else if !c.is_zero() {
        // [[±1, 0], [c, ±1]]: kernel of [[0,0],[c,0]]
        (BigInt::zero(), BigInt::one())
    } else {
        // ±I: every vector works; canonical choice
        (BigInt::one(), BigInt::zero())
    }
}

/// All rational eigenvalues of `m` with canonical eigenvectors, larger
/// eigenvalue first; empty when tr² − 4 is not the square of a rational.
pub fn eigen_rational(m: &UniMat) -> Vec<EigenPair> {
    let trace = m.entry(0, 0) + m.entry(1, 1);
    let disc = &trace * &trace - rat(4);
    let Some(root) = sqrt_rational(&disc) else {
        return Vec::new();
    };
    let half = ratio(1, 2);
    let hi = (&trace + &root) * &half;
    let lo = (&trace - &root) * &half;
    let mut out = vec![EigenPair {
        vector: eigenvector_for(m, &hi),
        value: hi,
    }];
    if !root.is_zero() {
        out.push(EigenPair {
            vector: eigenvector_for(m, &lo),
            value: lo,
        });
    }
    out
}

/// Whether `m · v` is a rational multiple of `v` (cross product zero).
fn is_eigenvector(m: &UniMat, v: &(BigInt, BigInt)) -> bool {
    let img0 = m.entry(0, 0) * &v.0 + m.entry(0, 1) * &v.1;
    let img1 = m.entry(1, 0) * &v.0 + m.entry(1, 1) * &v.1;
    img0 * Rational::from_integer(v.1.clone()) == img1 * Rational::from_integer(v.0.clone())
}

/// A primitive integer vector spanning a common eigenline of `g` and
/// `h` over ℚ, if one exists. Central (±I) factors leave the other
/// matrix's first eigenvector (or (1,0) if both are central); otherwise
/// `g`'s eigenvectors are tried in eigenvalue order and the first one
/// that `h` preserves wins.
pub fn common_eigenvector(g: &UniMat, h: &UniMat) -> Option<(BigInt, BigInt)> {
    match (g.is_central(), h.is_central()) {
        (true, true) => Some((BigInt::one(), BigInt::zero())),
        (true, false) => eigen_rational(h).into_iter().next().map(|p| p.vector),
        (false, true) => eigen_rational(g).into_iter().next().map(|p| p.vector),
        (false, false) => eigen_rational(g)
            .into_iter()
            .map(|p| p.vector)
            .find(|v| is_eigenvector(h, v)),
    }
}
