//! The product space X = ℍ × SL₂(ℚ), the deck action of the free
//! group on it, and estimators for the quotient pseudodistance through
//! the covering formula: d(π·p, π·q) = inf over words w of
//! dist_x(p, w·q).
//!
//! The quotient itself is never materialized; everything observable is
//! an upper bound produced by searching the deck orbit. The base
//! factor moves by Möbius transformations through the dense pair
//! (A, B); the frame factor moves by exact left multiplication through
//! the Γ(2) pair (U, V) and never influences distances — it exists for
//! exact bookkeeping (e.g. freeness evidence).

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt::Write as _;
use std::sync::OnceLock;

use serde::Serialize;

use crate::exact::UniMat;
use crate::hyperbolic::{dist_h, mobius_apply, HPoint};
use crate::words::{walk_words, Hom, Letter, Word};

/// A point of X: a base point in ℍ and an exact unimodular frame.
#[derive(Debug, Clone, PartialEq)]
pub struct XPoint {
    pub base: HPoint,
    pub frame: UniMat,
}

impl XPoint {
    pub fn new(base: HPoint, frame: UniMat) -> Self {
        XPoint { base, frame }
    }

    /// The standard seed (i, I).
    pub fn seed() -> Self {
        XPoint::new(HPoint::i(), UniMat::identity())
    }
}

static DENSE: OnceLock<Hom> = OnceLock::new();
static DISC: OnceLock<Hom> = OnceLock::new();

/// The homomorphism a ↦ A, b ↦ B driving the base factor.
pub fn dense_hom() -> &'static Hom {
    DENSE.get_or_init(Hom::dense)
}

/// The homomorphism a ↦ U, b ↦ V driving the frame factor.
pub fn gamma2_hom() -> &'static Hom {
    DISC.get_or_init(Hom::gamma2)
}

/// The deck action: w·(z, F) = (φ(w)(z), ψ(w)·F) with φ the dense
/// image acting by Möbius maps and ψ the Γ(2) image acting by exact
/// left multiplication.
pub fn deck_apply(w: &Word, p: &XPoint) -> XPoint {
    XPoint {
        base: mobius_apply(&dense_hom().eval(w), p.base),
        frame: &gamma2_hom().eval(w) * &p.frame,
    }
}

/// The product distance on X. The SL₂ factor carries the vanishing
/// pseudodistance, so only the base points matter.
pub fn dist_x(p: &XPoint, q: &XPoint) -> f64 {
    dist_h(p.base, q.base)
}

/// Budget and cutoffs for `orbit_search`.
#[derive(Debug, Clone, Serialize)]
pub struct OrbitSearchConfig {
    /// Maximum node expansions (pops from the frontier).
    pub budget: u64,
    /// Words longer than this are never generated.
    pub max_word_len: usize,
    /// Stop early once the best value is ≤ this.
    pub target_eps: f64,
}

impl Default for OrbitSearchConfig {
    fn default() -> Self {
        OrbitSearchConfig {
            budget: 2000,
            max_word_len: 8,
            target_eps: 0.0,
        }
    }
}

/// One strict improvement of the running minimum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveRecord {
    pub expansions: u64,
    pub best_value: f64,
    pub best_word: Word,
}

/// A monotone best-so-far curve plus its terminal state. `steps` is
/// the number of expansions actually performed (for searches) or
/// candidates scanned (for linear scans).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveReport {
    pub records: Vec<CurveRecord>,
    pub best_value: f64,
    pub best_word: Word,
    pub steps: u64,
}

impl CurveReport {
    /// CSV rendering, one line per improvement.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("expansions,best_value,best_word\n");
        for r in &self.records {
            writeln!(out, "{},{},{}", r.expansions, r.best_value, r.best_word)
                .expect("string write");
        }
        out
    }
}

/// Frontier node: the word, its exact dense image, and the resulting
/// distance value.
struct Node {
    value: f64,
    word: Word,
    mat: UniMat,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    /// Keyed by (value, word); the word order already sorts by length
    /// first, which makes the tie-break (length, canonical).
    fn cmp(&self, other: &Self) -> Ordering {
        self.value
            .total_cmp(&other.value)
            .then_with(|| self.word.cmp(&other.word))
    }
}

/// Best-first search over reduced words for small values of
/// dist_x(p, w·q). Deterministic: the frontier is ordered by
/// (value, length, canonical word order) and children are generated in
/// letter order. Every reported value is a valid upper bound for the
/// covering-formula infimum; nothing here certifies a lower bound.
pub fn orbit_search(p: &XPoint, q: &XPoint, cfg: &OrbitSearchConfig) -> CurveReport {
    assert!(cfg.budget >= 1, "budget must be positive");
    assert!(cfg.max_word_len >= 1, "max_word_len must be positive");
    let hom = dense_hom();
    let value_of = |mat: &UniMat| dist_h(p.base, mobius_apply(mat, q.base));

    let root = Node {
        value: dist_x(p, q),
        word: Word::identity(),
        mat: UniMat::identity(),
    };
    let mut best_value = root.value;
    let mut best_word = root.word.clone();
    let mut records = vec![CurveRecord {
        expansions: 0,
        best_value,
        best_word: best_word.clone(),
    }];
    let mut frontier = BinaryHeap::new();
    frontier.push(std::cmp::Reverse(root));

    let mut expansions: u64 = 0;
    while expansions < cfg.budget && best_value > cfg.target_eps {
        let Some(std::cmp::Reverse(node)) = frontier.pop() else {
            break; // frontier exhausted below max_word_len
        };
        expansions += 1;
        if node.value < best_value {
            best_value = node.value;
            best_word = node.word.clone();
            records.push(CurveRecord {
                expansions,
                best_value,
                best_word: best_word.clone(),
            });
        }
        if node.word.len() >= cfg.max_word_len {
            continue;
        }
        let blocked = node.word.last().map(Letter::inverse);
        for letter in Letter::ALL {
            if Some(letter) == blocked {
                continue;
            }
            let mat = &node.mat * hom.image(letter);
            frontier.push(std::cmp::Reverse(Node {
                value: value_of(&mat),
                word: node.word.appended(letter),
                mat,
            }));
        }
    }

    CurveReport {
        records,
        best_value,
        best_word,
        steps: expansions,
    }
}

/// Brute-force truncation oracle: the exact minimum of
/// dist_x(p, w·q) over all reduced words of length ≤ max_len, with the
/// canonically first witness.
pub fn exhaustive_orbit_min(p: &XPoint, q: &XPoint, max_len: usize) -> (f64, Word) {
    let mut best_value = f64::INFINITY;
    let mut best_word = Word::identity();
    walk_words(dense_hom(), max_len, |word, mat| {
        let value = dist_h(p.base, mobius_apply(mat, q.base));
        if value < best_value {
            best_value = value;
            best_word = word.clone();
        }
    });
    (best_value, best_word)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::LN_2;

    fn pt(re: f64, im: f64) -> HPoint {
        HPoint::new(re, im).unwrap()
    }

    fn random_word(rng: &mut ChaCha8Rng, max_len: usize) -> Word {
        let len = rng.gen_range(0..=max_len);
        let mut w = Word::identity();
        for _ in 0..len {
            w = w.appended(Letter::ALL[rng.gen_range(0..4)]);
        }
        w
    }

    #[test]
    fn deck_action_examples() {
        let p = XPoint::seed();
        assert_eq!(deck_apply(&Word::identity(), &p), p);
        let image = deck_apply(&"a".parse().unwrap(), &p);
        assert!((image.base.re() - 2.0).abs() < 1e-15);
        assert!((image.base.im() - 4.0).abs() < 1e-15);
        assert_eq!(image.frame, UniMat::gamma2_u());
    }

    #[test]
    fn deck_action_respects_word_multiplication() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let w1 = random_word(&mut rng, 6);
            let w2 = random_word(&mut rng, 6);
            let p = XPoint::new(
                pt(rng.gen_range(-3.0..3.0), rng.gen_range(0.25..4.0)),
                UniMat::identity(),
            );
            let stepwise = deck_apply(&w1, &deck_apply(&w2, &p));
            let combined = deck_apply(&w1.mul(&w2), &p);
            assert_eq!(stepwise.frame, combined.frame);
            let scale = 1.0_f64
                .max(combined.base.re().abs())
                .max(combined.base.im().abs());
            assert!((stepwise.base.re() - combined.base.re()).abs() <= 1e-9 * scale);
            assert!((stepwise.base.im() - combined.base.im()).abs() <= 1e-9 * scale);
        }
    }

    #[test]
    fn distance_ignores_frames() {
        let p = XPoint::seed();
        assert_eq!(dist_x(&p, &p), 0.0);
        let q = XPoint::new(pt(0.0, 2.0), UniMat::gamma2_u());
        assert!((dist_x(&p, &q) - LN_2).abs() < 1e-15);
        for frame in [UniMat::dense_a(), UniMat::dense_b(), UniMat::gamma2_v()] {
            let r = XPoint::new(HPoint::i(), frame);
            assert_eq!(dist_x(&p, &r), 0.0);
        }
    }

    #[test]
    fn search_on_coincident_points_stops_immediately() {
        let p = XPoint::seed();
        let report = orbit_search(&p, &p, &OrbitSearchConfig::default());
        assert_eq!(report.best_value, 0.0);
        assert_eq!(report.best_word, Word::identity());
        assert_eq!(report.steps, 0);
        assert_eq!(report.records.len(), 1);
        assert_eq!(report.records[0].expansions, 0);
    }

    #[test]
    fn length_one_candidates_do_not_beat_the_identity() {
        let p = XPoint::seed();
        let q = XPoint::new(pt(0.0, 2.0), UniMat::identity());
        // the four length-1 words all evaluate strictly above ln 2
        let expectations = [
            ("a", 2.141),
            ("A", 0.9624),
            ("b", 2.996),
            ("B", 1.883),
        ];
        for (text, approx) in expectations {
            let w: Word = text.parse().unwrap();
            let value = dist_x(&p, &deck_apply(&w, &q));
            assert!((value - approx).abs() < 1e-3, "{text} gave {value}");
            assert!(value > LN_2);
        }
        let cfg = OrbitSearchConfig {
            budget: 5,
            max_word_len: 1,
            target_eps: 0.0,
        };
        let report = orbit_search(&p, &q, &cfg);
        assert!((report.best_value - LN_2).abs() < 1e-15);
        assert_eq!(report.best_word, Word::identity());
        assert_eq!(report.steps, 5);
    }

    #[test]
    fn exhaustive_minima_are_frozen() {
        let p = XPoint::seed();
        let q = XPoint::new(pt(0.0, 2.0), UniMat::identity());
        for len in 1..=4 {
            let (value, word) = exhaustive_orbit_min(&p, &q, len);
            assert_eq!(value, 0.6931471805599453, "length {len}");
            assert_eq!(word, Word::identity());
        }
        let (v5, w5) = exhaustive_orbit_min(&p, &q, 5);
        assert_eq!(v5, 0.38653320489427795);
        assert_eq!(w5.to_string(), "BaBaB");
        let (v6, w6) = exhaustive_orbit_min(&p, &q, 6);
        assert_eq!(v6, 0.3420969393165028);
        assert_eq!(w6.to_string(), "aBaaBa");
        // monotone in the truncation length
        let mut prev = f64::INFINITY;
        for len in 1..=6 {
            let (value, _) = exhaustive_orbit_min(&p, &q, len);
            assert!(value <= prev);
            prev = value;
        }
    }

    #[test]
    fn search_matches_the_exhaustive_oracle_when_it_drains_the_tree() {
        let p = XPoint::seed();
        let q = XPoint::new(pt(0.0, 2.0), UniMat::identity());
        let cfg = OrbitSearchConfig {
            budget: 161,
            max_word_len: 4,
            target_eps: 0.0,
        };
        let report = orbit_search(&p, &q, &cfg);
        let (value, word) = exhaustive_orbit_min(&p, &q, 4);
        assert_eq!(report.best_value, value);
        assert_eq!(report.best_word, word);
        assert_eq!(report.steps, 161); // the whole length-≤4 tree fits the budget
        for pair in report.records.windows(2) {
            assert!(pair[1].best_value < pair[0].best_value);
        }
        // the witness re-evaluates to the reported value
        let recheck = dist_x(&p, &deck_apply(&report.best_word, &q));
        assert!((recheck - report.best_value).abs() <= 1e-12);
    }

    #[test]
    fn deeper_search_improves_and_stays_monotone() {
        let p = XPoint::seed();
        let q = XPoint::new(pt(0.0, 2.0), UniMat::identity());
        let cfg = OrbitSearchConfig {
            budget: 100_000,
            max_word_len: 6,
            target_eps: 0.0,
        };
        let report = orbit_search(&p, &q, &cfg);
        let (value, _) = exhaustive_orbit_min(&p, &q, 6);
        assert_eq!(report.best_value, value);
        for pair in report.records.windows(2) {
            assert!(pair[1].best_value < pair[0].best_value);
            assert!(pair[1].expansions > pair[0].expansions);
        }
    }

    #[test]
    fn frames_of_nonempty_words_are_never_trivial() {
        // freeness evidence: the frame component separates every word
        // of length ≤ 8 from the seed, by exact arithmetic (the frame
        // of w acting on (i, I) is exactly the Γ(2) image of w)
        let mut checked = 0u64;
        walk_words(gamma2_hom(), 8, |word, mat| {
            if !word.is_empty() {
                assert!(!mat.is_identity(), "word {word}");
                checked += 1;
            }
        });
        assert_eq!(checked, 13_120);
    }

    #[test]
    fn curve_csv_matches_the_documented_header() {
        let p = XPoint::seed();
        let q = XPoint::new(pt(0.0, 2.0), UniMat::identity());
        let cfg = OrbitSearchConfig {
            budget: 5,
            max_word_len: 1,
            target_eps: 0.0,
        };
        let csv = orbit_search(&p, &q, &cfg).to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("expansions,best_value,best_word"));
        assert_eq!(lines.next(), Some("0,0.6931471805599453,"));
        assert_eq!(lines.next(), None);
    }
}
