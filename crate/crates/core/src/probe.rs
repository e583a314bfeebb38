//! Quantitative probes of the two generating pairs: Diophantine
//! approximations 2ⁿ3ᵐ ≈ 1, the accumulation experiment around the
//! matrix C = [[1, 2/3], [1/8, 13/12]], running identity-gap curves
//! (non-discreteness evidence for ⟨A, B⟩), and the Γ(2) congruence /
//! distinctness / gap certificates for ⟨U, V⟩.
//!
//! Products are computed exactly and converted to floats only for
//! reporting: the entries span many orders of magnitude, and the
//! identity-gap and Γ(2) thresholds are exact rational comparisons.

use std::collections::HashSet;
use std::fmt;
use std::fmt::Write as _;

use serde::{Serialize, Serializer};

use crate::covering::{CurveRecord, CurveReport};
use crate::exact::{
    closed_power, int_pow, rat, rat_to_f64, rat_to_string, ratio, Generator, Rational, UniMat,
};
use crate::words::{walk_words, Hom, Word};

fn ln3() -> f64 {
    3.0_f64.ln()
}

/// An integer pair (n, m) with 2ⁿ3ᵐ close to 1, plus its float ratio
/// and the additive error |n·ln 2 + m·ln 3|.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DioPair {
    pub n: i64,
    pub m: i64,
    pub ratio: f64,
    pub log_error: f64,
}

impl DioPair {
    /// Build the pair, evaluating 2ⁿ3ᵐ exactly before rounding.
    /// `dio_pairs` never emits (0, 0); constructing it directly is
    /// allowed so the trivial probe row (identity matrix) stays
    /// expressible.
    pub fn new(n: i64, m: i64) -> Self {
        let ratio = rat_to_f64(&Self::exact_ratio(n, m));
        let log_error = (n as f64 * std::f64::consts::LN_2 + m as f64 * ln3()).abs();
        DioPair {
            n,
            m,
            ratio,
            log_error,
        }
    }

    /// 2ⁿ3ᵐ as an exact rational.
    pub fn exact_ratio(n: i64, m: i64) -> Rational {
        int_pow(2, n) * int_pow(3, m)
    }
}

/// Candidate-generation strategy for `dio_pairs`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DioMethod {
    /// Enumerate the whole rectangle of exponents.
    Brute,
    /// Derive candidates from continued-fraction convergents of
    /// ln 3 / ln 2 and filter identically.
    Convergents,
}

/// Convergents p/q of ln 3 / ln 2 = 1.58496…, at most `count` of them.
/// The expansion stops early once the double-precision remainder
/// bottoms out or the convergents outgrow what doubles can certify —
/// deep terms of a float continued fraction are noise anyway.
pub fn convergents_log2_3(count: usize) -> Vec<(i64, i64)> {
    const LIMIT: i128 = 1 << 50;
    let mut out = Vec::new();
    let mut x = ln3() / std::f64::consts::LN_2;
    let (mut p_prev, mut q_prev) = (1i128, 0i128);
    let (mut p, mut q) = (0i128, 1i128);
    for _ in 0..count {
        let a = x.floor();
        let ai = a as i128;
        let (p_next, q_next) = (ai * p_prev + p, ai * q_prev + q);
        if p_next > LIMIT || q_next > LIMIT {
            break;
        }
        (p, q) = (p_prev, q_prev);
        (p_prev, q_prev) = (p_next, q_next);
        out.push((p_next as i64, q_next as i64));
        let frac = x - a;
        if frac < 1e-12 {
            break;
        }
        x = 1.0 / frac;
    }
    out
}

/// The exponent bound on |m| implied by a bound on |n|: a pair can
/// only have ratio near 1 when m ≈ −n·ln2/ln3, so the rectangle
/// |m| ≤ ⌈bound·ln2/ln3⌉ + 1 already contains every candidate.
fn m_bound(bound: i64) -> i64 {
    (bound as f64 * std::f64::consts::LN_2 / ln3()).ceil() as i64 + 1
}

/// All pairs (n, m) ≠ (0, 0) with |n| ≤ bound, |m| ≤ ⌈bound·ln2/ln3⌉+1
/// and |2ⁿ3ᵐ − 1| < eps (exact comparison against the binary value of
/// eps), sorted by (log_error, n, m). Both methods return the same
/// set; `Convergents` merely generates fewer candidates.
pub fn dio_pairs(eps: f64, bound: i64, method: DioMethod) -> Vec<DioPair> {
    assert!(eps > 0.0, "eps must be positive");
    assert!(bound >= 1, "bound must be at least 1");
    let eps_exact = Rational::from_float(eps).expect("finite eps");
    let mb = m_bound(bound);
    let keep = |n: i64, m: i64| -> bool {
        if (n, m) == (0, 0) || n.abs() > bound || m.abs() > mb {
            return false;
        }
        let diff = DioPair::exact_ratio(n, m) - rat(1);
        let abs = if diff < rat(0) { -diff } else { diff };
        abs < eps_exact
    };

    let mut hits: Vec<(i64, i64)> = Vec::new();
    match method {
        DioMethod::Brute => {
            for n in -bound..=bound {
                for m in -mb..=mb {
                    if keep(n, m) {
                        hits.push((n, m));
                    }
                }
            }
        }
        DioMethod::Convergents => {
            // candidates: nonnegative integer combinations of two
            // adjacent convergent vectors (p, −q), and their mirrors
            let mut convs = Vec::new();
            for (p, q) in convergents_log2_3(64) {
                let beyond = p > bound;
                convs.push((p, q));
                if beyond {
                    break;
                }
            }
            let mut candidates = std::collections::BTreeSet::new();
            for pair in convs.windows(2) {
                let [(p1, q1), (p2, q2)] = [pair[0], pair[1]];
                let mut s = 0i64;
                while s * p1 <= bound {
                    let mut t = if s == 0 { 1 } else { 0 };
                    while s * p1 + t * p2 <= bound {
                        let (n, m) = (s * p1 + t * p2, -(s * q1 + t * q2));
                        candidates.insert((n, m));
                        candidates.insert((-n, -m));
                        t += 1;
                    }
                    s += 1;
                }
            }
            hits = candidates.into_iter().filter(|&(n, m)| keep(n, m)).collect();
        }
    }

    let mut pairs: Vec<DioPair> = hits.into_iter().map(|(n, m)| DioPair::new(n, m)).collect();
    pairs.sort_by(|a, b| {
        a.log_error
            .total_cmp(&b.log_error)
            .then(a.n.cmp(&b.n))
            .then(a.m.cmp(&b.m))
    });
    pairs
}

/// The matrix the accumulation experiment measures against:
/// C = [[1, 2/3], [1/8, 13/12]], unimodular.
pub fn accumulation_target() -> UniMat {
    UniMat::new([
        [rat(1), ratio(2, 3)],
        [ratio(1, 8), ratio(13, 12)],
    ])
    .expect("C is unimodular")
}

/// Which closed-power product a probe row evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ProductOrder {
    /// Aⁿ·Bᵐ
    AB,
    /// Bⁿ·Aᵐ
    BA,
}

impl fmt::Display for ProductOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProductOrder::AB => "AB",
            ProductOrder::BA => "BA",
        })
    }
}

/// One accumulation measurement: the exact product for the pair and
/// its sup-norm distance to C (evaluated exactly, reported as float).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeRow {
    pub pair: DioPair,
    pub product_order: ProductOrder,
    pub matrix: UniMat,
    #[serde(rename = "dist_to_C")]
    pub dist_to_c: f64,
}

/// The exact product for one pair under the stated order.
pub fn probe_matrix(pair: &DioPair, order: ProductOrder) -> UniMat {
    match order {
        ProductOrder::AB => {
            &closed_power(Generator::A, pair.n) * &closed_power(Generator::B, pair.m)
        }
        ProductOrder::BA => {
            &closed_power(Generator::B, pair.n) * &closed_power(Generator::A, pair.m)
        }
    }
}

/// Measure every pair against C, preserving input order. Distances
/// are reported, not judged: no convergence claim is made either way.
pub fn probe_accumulation(pairs: &[DioPair], order: ProductOrder) -> Vec<ProbeRow> {
    assert!(!pairs.is_empty(), "probe needs at least one pair");
    let c = accumulation_target();
    pairs
        .iter()
        .map(|pair| {
            let matrix = probe_matrix(pair, order);
            let dist_to_c = rat_to_f64(&matrix.sup_dist(&c));
            ProbeRow {
                pair: *pair,
                product_order: order,
                matrix,
                dist_to_c,
            }
        })
        .collect()
}

/// CSV rendering of probe rows, one line per row.
pub fn probe_to_csv(rows: &[ProbeRow]) -> String {
    let mut out = String::from("n,m,ratio,log_error,order,dist_to_C\n");
    for row in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            row.pair.n, row.pair.m, row.pair.ratio, row.pair.log_error, row.product_order,
            row.dist_to_c
        )
        .expect("string write");
    }
    out
}

/// Running minimum of the sup-norm distance to the identity over all
/// nonempty reduced words of length ≤ max_len, scanned in canonical
/// order. Record indices count nonempty words from 0. A terminal
/// value that stays large is discreteness evidence; decay toward 0 is
/// non-discreteness evidence. Comparisons happen on exact rationals;
/// the report carries floats.
pub fn identity_gap(h: &Hom, max_len: usize) -> CurveReport {
    assert!(max_len >= 1, "max_len must be at least 1");
    let identity = UniMat::identity();
    let mut best_exact: Option<Rational> = None;
    let mut best_value = f64::INFINITY;
    let mut best_word = Word::identity();
    let mut records = Vec::new();
    let mut index: u64 = 0;
    walk_words(h, max_len, |word, mat| {
        if word.is_empty() {
            return;
        }
        let gap = mat.sup_dist(&identity);
        if best_exact.as_ref().map_or(true, |b| gap < *b) {
            best_value = rat_to_f64(&gap);
            best_exact = Some(gap);
            best_word = word.clone();
            records.push(CurveRecord {
                expansions: index,
                best_value,
                best_word: best_word.clone(),
            });
        }
        index += 1;
    });
    CurveReport {
        records,
        best_value,
        best_word,
        steps: index,
    }
}

fn serialize_rational<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&rat_to_string(r))
}

/// Certificate report for the Γ(2) pair at a word-length truncation:
/// congruence (every image ≡ I mod 2), injectivity (pairwise distinct
/// images), and the identity gap ≥ 2 on nonempty words — all exact.
#[derive(Debug, Clone, Serialize)]
pub struct Gamma2Report {
    pub max_len: usize,
    pub words_checked: u64,
    pub congruence_ok: bool,
    pub congruence_failures: u64,
    pub distinct_images: u64,
    pub injective: bool,
    pub gap_ok: bool,
    pub gap_failures: u64,
    /// Minimum identity gap over nonempty words, exact.
    #[serde(serialize_with = "serialize_rational")]
    pub min_gap: Rational,
    pub min_gap_float: f64,
    pub min_gap_word: Word,
}

impl Gamma2Report {
    pub fn all_pass(&self) -> bool {
        self.congruence_ok && self.injective && self.gap_ok
    }
}

/// Run all three Γ(2) checks over every reduced word of length
/// ≤ max_len. Failures are counted and reported, never thrown.
pub fn gamma2_certify(max_len: usize) -> Gamma2Report {
    assert!(max_len >= 1, "max_len must be at least 1");
    let hom = Hom::gamma2();
    let identity = UniMat::identity();
    let residue_i = [[1, 0], [0, 1]];

    let mut words_checked: u64 = 0;
    let mut congruence_failures: u64 = 0;
    let mut gap_failures: u64 = 0;
    let mut images: HashSet<UniMat> = HashSet::new();
    let mut min_gap: Option<Rational> = None;
    let mut min_gap_word = Word::identity();

    walk_words(&hom, max_len, |word, mat| {
        words_checked += 1;
        match mat.mod2_residue() {
            Ok(residue) if residue == residue_i => {}
            _ => congruence_failures += 1,
        }
        images.insert(mat.clone());
        if !word.is_empty() {
            let gap = mat.sup_dist(&identity);
            if gap < rat(2) {
                gap_failures += 1;
            }
            if min_gap.as_ref().map_or(true, |b| gap < *b) {
                min_gap = Some(gap);
                min_gap_word = word.clone();
            }
        }
    });

    let distinct_images = images.len() as u64;
    let min_gap = min_gap.expect("max_len ≥ 1 yields nonempty words");
    Gamma2Report {
        max_len,
        words_checked,
        congruence_ok: congruence_failures == 0,
        congruence_failures,
        distinct_images,
        injective: distinct_images == words_checked,
        gap_ok: gap_failures == 0,
        gap_failures,
        min_gap_float: rat_to_f64(&min_gap),
        min_gap,
        min_gap_word,
    }
}
