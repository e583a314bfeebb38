//! Reduced words of the rank-2 free group: the group law, canonical
//! enumeration, and evaluation through generator-image homomorphisms
//! into SL(2, ℚ).

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::de::{Deserialize, Deserializer};
use serde::ser::{Serialize, Serializer};

use crate::error::Error;
use crate::exact::UniMat;

/// A generator letter or its inverse. The derived variant order is the
/// canonical letter order `a < a⁻¹ < b < b⁻¹` used for all tie-breaking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Letter {
    A,
    AInv,
    B,
    BInv,
}

impl Letter {
    /// All letters in canonical order.
    pub const ALL: [Letter; 4] = [Letter::A, Letter::AInv, Letter::B, Letter::BInv];

    pub fn inverse(self) -> Self {
        match self {
            Letter::A => Letter::AInv,
            Letter::AInv => Letter::A,
            Letter::B => Letter::BInv,
            Letter::BInv => Letter::B,
        }
    }

    /// Compact symbol: capitals denote inverses (`a`, `A`, `b`, `B`).
    pub fn symbol(self) -> char {
        match self {
            Letter::A => 'a',
            Letter::AInv => 'A',
            Letter::B => 'b',
            Letter::BInv => 'B',
        }
    }

    pub fn from_symbol(ch: char) -> Option<Self> {
        match ch {
            'a' => Some(Letter::A),
            'A' => Some(Letter::AInv),
            'b' => Some(Letter::B),
            'B' => Some(Letter::BInv),
            _ => None,
        }
    }

    fn index(self) -> usize {
        match self {
            Letter::A => 0,
            Letter::AInv => 1,
            Letter::B => 2,
            Letter::BInv => 3,
        }
    }
}

/// A reduced word; the empty word is the group identity. All
/// constructors cancel adjacent inverse pairs, so the reduced-form
/// invariant always holds.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Word {
    letters: Vec<Letter>,
}

impl Word {
    pub fn identity() -> Self {
        Word::default()
    }

    /// Build with free reduction applied.
    pub fn from_letters<I: IntoIterator<Item = Letter>>(letters: I) -> Self {
        let mut w = Word::identity();
        for l in letters {
            w.push(l);
        }
        w
    }

    /// Append one letter, cancelling against the current last letter.
    pub fn push(&mut self, l: Letter) {
        if self.letters.last() == Some(&l.inverse()) {
            self.letters.pop();
        } else {
            self.letters.push(l);
        }
    }

    /// `self`, then `l` — for search-tree children this never cancels.
    pub fn appended(&self, l: Letter) -> Word {
        let mut w = self.clone();
        w.push(l);
        w
    }

    /// Group law: concatenate and cancel.
    pub fn mul(&self, rhs: &Word) -> Word {
        let mut w = self.clone();
        for &l in &rhs.letters {
            w.push(l);
        }
        w
    }

    /// Reversed sequence of inverted letters; reduced when `self` is.
    pub fn inverse(&self) -> Word {
        Word {
            letters: self.letters.iter().rev().map(|l| l.inverse()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn last(&self) -> Option<Letter> {
        self.letters.last().copied()
    }
}

/// Canonical word order: by length, then lexicographic in the letter
/// order. This is the enumeration and tie-breaking order everywhere.
impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.letters
            .len()
            .cmp(&other.letters.len())
            .then_with(|| self.letters.cmp(&other.letters))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.letters {
            write!(f, "{}", l.symbol())?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = Error;

    /// Parse the compact form; unreduced input is reduced silently.
    fn from_str(s: &str) -> Result<Self, Error> {
        let mut w = Word::identity();
        for ch in s.chars() {
            let l = Letter::from_symbol(ch)
                .ok_or_else(|| Error::Parse(format!("bad word letter {ch:?} in {s:?}")))?;
            w.push(l);
        }
        Ok(w)
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A homomorphism F₂ → SL(2, ℚ), stored as the four letter images.
#[derive(Debug, Clone)]
pub struct Hom {
    images: [UniMat; 4],
}

impl Hom {
    /// Generator images for `a` and `b`; inverses are precomputed.
    pub fn new(image_a: UniMat, image_b: UniMat) -> Self {
        let images = [
            image_a.clone(),
            image_a.inverse(),
            image_b.clone(),
            image_b.inverse(),
        ];
        Hom { images }
    }

    /// The dense default pair a ↦ [[2,1],[0,1/2]], b ↦ [[3,0],[1,1/3]].
    pub fn dense() -> Self {
        Hom::new(UniMat::dense_a(), UniMat::dense_b())
    }

    /// The Γ(2) congruence pair a ↦ [[1,2],[0,1]], b ↦ [[1,0],[2,1]].
    pub fn gamma2() -> Self {
        Hom::new(UniMat::gamma2_u(), UniMat::gamma2_v())
    }

    pub fn image(&self, l: Letter) -> &UniMat {
        &self.images[l.index()]
    }

    /// Exact left-to-right product of the letter images; ε ↦ I.
    pub fn eval(&self, w: &Word) -> UniMat {
        let mut acc = UniMat::identity();
        for &l in w.letters() {
            acc = &acc * self.image(l);
        }
        acc
    }
}

/// Number of reduced words of length ≤ max_len: 1 + 2·(3^max_len − 1)
/// (the identity plus 4·3^(k−1) words at each length k ≥ 1).
pub fn word_count(max_len: usize) -> usize {
    1 + 2 * (3usize.pow(max_len as u32) - 1)
}

/// All reduced words of length ≤ max_len in canonical order.
pub fn enumerate_words(max_len: usize) -> Vec<Word> {
    let mut out = Vec::with_capacity(word_count(max_len));
    let mut level = vec![Word::identity()];
    out.push(Word::identity());
    for _ in 1..=max_len {
        let mut next = Vec::with_capacity(level.len() * 3);
        for w in &level {
            for l in Letter::ALL {
                if w.last() == Some(l.inverse()) {
                    continue;
                }
                let child = w.appended(l);
                out.push(child.clone());
                next.push(child);
            }
        }
        level = next;
    }
    out
}

/// Visit every reduced word of length ≤ max_len in canonical order
/// together with its exact image under `hom`, maintained incrementally
/// (child matrix = parent matrix · letter image).
pub fn walk_words<F: FnMut(&Word, &UniMat)>(hom: &Hom, max_len: usize, mut visit: F) {
    let mut level = vec![(Word::identity(), UniMat::identity())];
    visit(&level[0].0, &level[0].1);
    for _ in 1..=max_len {
        let mut next = Vec::with_capacity(level.len() * 3);
        for (w, m) in &level {
            for l in Letter::ALL {
                if w.last() == Some(l.inverse()) {
                    continue;
                }
                let child = w.appended(l);
                let child_mat = m * hom.image(l);
                visit(&child, &child_mat);
                next.push((child, child_mat));
            }
        }
        level = next;
    }
}
