//! A finite model of quotienting by a free isometric action: finite
//! pseudo-metric spaces, finite permutation groups acting freely and
//! isometrically, the quotient pseudo-metric where the covering
//! formula's infimum is an attained minimum, and the vanishing
//! equivalence (quotient ≡ 0 exactly when the input ≡ 0).
//!
//! Distances are doubles with exact-zero semantics for the vanishing
//! relation; isometry is exact float equality, which the random model
//! generator arranges by construction.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Additive slack for triangle-inequality checks on doubles.
pub const TRIANGLE_SLACK: f64 = 1e-12;

/// A symmetric nonnegative distance matrix with zero diagonal on
/// points {0, …, size−1}. Construction checks structure only (square,
/// nonempty, finite entries); the axioms themselves are reported by
/// [`FinitePseudoMetric::axiom_report`] so that invalid models can be
/// diagnosed instead of rejected.
#[derive(Debug, Clone, PartialEq)]
pub struct FinitePseudoMetric {
    d: Vec<Vec<f64>>,
}

impl FinitePseudoMetric {
    pub fn new(d: Vec<Vec<f64>>) -> Result<Self, Error> {
        if d.is_empty() {
            return Err(Error::InvalidModel("distance matrix is empty".into()));
        }
        let n = d.len();
        for (i, row) in d.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidModel(format!(
                    "row {i} has length {} in a {n}-point model",
                    row.len()
                )));
            }
            for (j, &value) in row.iter().enumerate() {
                if !value.is_finite() {
                    return Err(Error::InvalidModel(format!(
                        "d[{i}][{j}] = {value} is not finite"
                    )));
                }
            }
        }
        Ok(FinitePseudoMetric { d })
    }

    pub fn size(&self) -> usize {
        self.d.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.d[i][j]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.d
    }

    /// True when every entry is exactly 0.
    pub fn is_zero(&self) -> bool {
        self.d.iter().all(|row| row.iter().all(|&v| v == 0.0))
    }

    /// Check the pseudo-metric axioms clause by clause. Symmetry is
    /// exact; the triangle inequality gets `TRIANGLE_SLACK`.
    pub fn axiom_report(&self) -> MetricAxioms {
        let n = self.size();
        let nonnegative = self.d.iter().all(|row| row.iter().all(|&v| v >= 0.0));
        let zero_diagonal = (0..n).all(|i| self.d[i][i] == 0.0);
        let symmetric =
            (0..n).all(|i| (0..n).all(|j| self.d[i][j] == self.d[j][i]));
        let mut triangle = true;
        'outer: for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if self.d[i][k] > self.d[i][j] + self.d[j][k] + TRIANGLE_SLACK {
                        triangle = false;
                        break 'outer;
                    }
                }
            }
        }
        MetricAxioms {
            nonnegative,
            zero_diagonal,
            symmetric,
            triangle,
        }
    }
}

/// Per-clause result of the pseudo-metric axiom check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MetricAxioms {
    pub nonnegative: bool,
    pub zero_diagonal: bool,
    pub symmetric: bool,
    pub triangle: bool,
}

impl MetricAxioms {
    pub fn all(&self) -> bool {
        self.nonnegative && self.zero_diagonal && self.symmetric && self.triangle
    }
}

/// A list of permutations of {0, …, size−1} intended to form a group
/// acting freely by isometries. Construction checks only that each
/// row is a permutation; the group/isometry/freeness clauses are
/// reported by [`validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FreeIsometricAction {
    perms: Vec<Vec<usize>>,
}

impl FreeIsometricAction {
    pub fn new(perms: Vec<Vec<usize>>) -> Result<Self, Error> {
        if perms.is_empty() {
            return Err(Error::InvalidModel("no permutations given".into()));
        }
        let n = perms[0].len();
        for (g, perm) in perms.iter().enumerate() {
            if perm.len() != n {
                return Err(Error::InvalidModel(format!(
                    "permutation {g} has length {} but permutation 0 has {n}",
                    perm.len()
                )));
            }
            let mut seen = vec![false; n];
            for &image in perm {
                if image >= n || seen[image] {
                    return Err(Error::InvalidModel(format!(
                        "row {g} is not a permutation of 0..{n}"
                    )));
                }
                seen[image] = true;
            }
        }
        Ok(FreeIsometricAction { perms })
    }

    pub fn size(&self) -> usize {
        self.perms[0].len()
    }

    pub fn order(&self) -> usize {
        self.perms.len()
    }

    pub fn perms(&self) -> &[Vec<usize>] {
        &self.perms
    }
}

fn compose(outer: &[usize], inner: &[usize]) -> Vec<usize> {
    inner.iter().map(|&i| outer[i]).collect()
}

fn is_identity_perm(perm: &[usize]) -> bool {
    perm.iter().enumerate().all(|(i, &image)| image == i)
}

/// Per-clause validation of a model: metric axioms, matching shapes,
/// group structure (identity and closure; inverses follow for a
/// finite closed set), exact isometry, and freeness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ModelReport {
    pub metric: MetricAxioms,
    pub shapes_agree: bool,
    pub has_identity: bool,
    pub composition_closed: bool,
    pub isometric: bool,
    pub free: bool,
}

impl ModelReport {
    pub fn valid(&self) -> bool {
        self.metric.all()
            && self.shapes_agree
            && self.has_identity
            && self.composition_closed
            && self.isometric
            && self.free
    }

    /// Names of the failing clauses, for error messages.
    pub fn failures(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if !self.metric.nonnegative {
            out.push("nonnegative");
        }
        if !self.metric.zero_diagonal {
            out.push("zero_diagonal");
        }
        if !self.metric.symmetric {
            out.push("symmetric");
        }
        if !self.metric.triangle {
            out.push("triangle");
        }
        if !self.shapes_agree {
            out.push("shapes_agree");
        }
        if !self.has_identity {
            out.push("has_identity");
        }
        if !self.composition_closed {
            out.push("composition_closed");
        }
        if !self.isometric {
            out.push("isometric");
        }
        if !self.free {
            out.push("free");
        }
        out
    }
}

/// Check every clause; failures are reported, never thrown.
pub fn validate(space: &FinitePseudoMetric, action: &FreeIsometricAction) -> ModelReport {
    let metric = space.axiom_report();
    let shapes_agree = action.size() == space.size();
    let perms = action.perms();
    let has_identity = perms.iter().any(|p| is_identity_perm(p));
    let composition_closed = perms.iter().all(|outer| {
        perms
            .iter()
            .all(|inner| perms.contains(&compose(outer, inner)))
    });
    let isometric = shapes_agree
        && perms.iter().all(|perm| {
            let n = space.size();
            (0..n).all(|i| {
                (0..n).all(|j| space.entry(perm[i], perm[j]) == space.entry(i, j))
            })
        });
    let free = perms
        .iter()
        .all(|perm| is_identity_perm(perm) || perm.iter().enumerate().all(|(i, &im)| im != i));
    ModelReport {
        metric,
        shapes_agree,
        has_identity,
        composition_closed,
        isometric,
        free,
    }
}

/// The quotient pseudo-metric plus the data that certifies it: orbit
/// representatives (minimal indices, ascending) and, for each entry,
/// the index of the group element attaining the minimum.
#[derive(Debug, Clone, PartialEq)]
pub struct Quotient {
    pub metric: FinitePseudoMetric,
    pub representatives: Vec<usize>,
    /// witnesses[u][v] indexes the permutation g minimizing
    /// d(rep_u, g(rep_v)); the first attaining index in listed order.
    pub witnesses: Vec<Vec<usize>>,
}

/// Quotient by the covering formula with the infimum an attained
/// minimum: d̄(ū, v̄) = min over g of d(rep_u, g(rep_v)). The output
/// axioms are re-verified before returning.
pub fn quotient_metric(
    space: &FinitePseudoMetric,
    action: &FreeIsometricAction,
) -> Result<Quotient, Error> {
    let report = validate(space, action);
    if !report.valid() {
        return Err(Error::InvalidModel(format!(
            "model fails: {}",
            report.failures().join(", ")
        )));
    }

    let n = space.size();
    let perms = action.perms();
    let mut orbit_of = vec![usize::MAX; n];
    let mut representatives = Vec::new();
    for i in 0..n {
        if orbit_of[i] != usize::MAX {
            continue;
        }
        let u = representatives.len();
        representatives.push(i);
        for perm in perms {
            orbit_of[perm[i]] = u;
        }
    }

    let k = representatives.len();
    let mut d = vec![vec![0.0; k]; k];
    let mut witnesses = vec![vec![0; k]; k];
    for u in 0..k {
        for v in 0..k {
            let mut best = f64::INFINITY;
            let mut witness = 0;
            for (g, perm) in perms.iter().enumerate() {
                let value = space.entry(representatives[u], perm[representatives[v]]);
                if value < best {
                    best = value;
                    witness = g;
                }
            }
            d[u][v] = best;
            witnesses[u][v] = witness;
        }
    }

    let metric = FinitePseudoMetric::new(d)?;
    if !metric.axiom_report().all() {
        return Err(Error::InvalidModel(
            "quotient failed the pseudo-metric re-check".into(),
        ));
    }
    Ok(Quotient {
        metric,
        representatives,
        witnesses,
    })
}

/// Equivalence classes of the exact relation d(x, y) = 0, as sorted
/// classes ordered by their minimal member. Expects a valid
/// pseudo-metric (zero diagonal makes the relation reflexive).
pub fn zero_classes(space: &FinitePseudoMetric) -> Vec<Vec<usize>> {
    let n = space.size();
    let mut class_of = vec![usize::MAX; n];
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for start in 0..n {
        if class_of[start] != usize::MAX {
            continue;
        }
        let id = classes.len();
        let mut members = vec![start];
        class_of[start] = id;
        let mut queue = vec![start];
        while let Some(i) = queue.pop() {
            for j in 0..n {
                if class_of[j] == usize::MAX && space.entry(i, j) == 0.0 {
                    class_of[j] = id;
                    members.push(j);
                    queue.push(j);
                }
            }
        }
        members.sort_unstable();
        classes.push(members);
    }
    classes
}

/// The worked example: the 4-cycle path metric with the antipodal
/// flip. Valid, with a 2-point quotient.
pub fn demo_model() -> (FinitePseudoMetric, FreeIsometricAction) {
    let d = vec![
        vec![0.0, 1.0, 2.0, 1.0],
        vec![1.0, 0.0, 1.0, 2.0],
        vec![2.0, 1.0, 0.0, 1.0],
        vec![1.0, 2.0, 1.0, 0.0],
    ];
    let perms = vec![vec![0, 1, 2, 3], vec![2, 3, 0, 1]];
    (
        FinitePseudoMetric::new(d).expect("demo metric is well-formed"),
        FreeIsometricAction::new(perms).expect("demo action is well-formed"),
    )
}

/// A seeded random valid model: a cyclic group of order ≤ 4 acting on
/// order·orbits ≤ 12 points (at least two orbits, so a nonzero metric
/// forces a nonzero quotient), and a distance matrix that is either
/// identically zero (25%) or a strictly positive metric obtained as a
/// shortest-path closure averaged over the group. The average is
/// computed once per point-pair orbit and assigned to every member,
/// which makes the action an isometry in exact float equality.
pub fn random_model(seed: u64) -> (FinitePseudoMetric, FreeIsometricAction) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let order = rng.gen_range(1..=4usize);
    let orbits = rng.gen_range(2..=12 / order);
    let n = order * orbits;

    let mut shuffled: Vec<usize> = (0..n).collect();
    shuffled.shuffle(&mut rng);
    let mut sigma = vec![0usize; n];
    for cycle in shuffled.chunks(order) {
        for (slot, &point) in cycle.iter().enumerate() {
            sigma[point] = cycle[(slot + 1) % order];
        }
    }
    let mut perms = vec![(0..n).collect::<Vec<usize>>()];
    for _ in 1..order {
        let next = compose(&sigma, perms.last().expect("nonempty"));
        perms.push(next);
    }
    let action = FreeIsometricAction::new(perms).expect("generated rows are permutations");

    let zero = rng.gen_bool(0.25);
    let mut d = vec![vec![0.0; n]; n];
    if !zero {
        for i in 0..n {
            for j in i + 1..n {
                let w = rng.gen_range(0.5..2.0);
                d[i][j] = w;
                d[j][i] = w;
            }
        }
        // shortest-path closure restores the triangle inequality
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let via = d[i][k] + d[k][j];
                    if via < d[i][j] {
                        d[i][j] = via;
                    }
                }
            }
        }
        // group-average once per pair orbit; assigning the single
        // rounded value everywhere keeps the isometry exact
        let mut out = vec![vec![0.0; n]; n];
        let mut assigned = vec![vec![false; n]; n];
        for i in 0..n {
            for j in 0..n {
                if i == j || assigned[i][j] {
                    continue;
                }
                let total: f64 = action
                    .perms()
                    .iter()
                    .map(|perm| d[perm[i]][perm[j]])
                    .sum();
                let avg = total / order as f64;
                for perm in action.perms() {
                    out[perm[i]][perm[j]] = avg;
                    out[perm[j]][perm[i]] = avg;
                    assigned[perm[i]][perm[j]] = true;
                    assigned[perm[j]][perm[i]] = true;
                }
            }
        }
        d = out;
    }

    (
        FinitePseudoMetric::new(d).expect("generated matrix is well-formed"),
        action,
    )
}

/// The JSON wire form of a model: {"d": [[…]], "perms": [[…], …]}.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelJson {
    pub d: Vec<Vec<f64>>,
    pub perms: Vec<Vec<usize>>,
}

impl ModelJson {
    pub fn from_parts(space: &FinitePseudoMetric, action: &FreeIsometricAction) -> Self {
        ModelJson {
            d: space.rows().to_vec(),
            perms: action.perms().to_vec(),
        }
    }

    /// Structural validation (squareness, permutation rows); the
    /// semantic clauses stay with [`validate`].
    pub fn build(self) -> Result<(FinitePseudoMetric, FreeIsometricAction), Error> {
        Ok((
            FinitePseudoMetric::new(self.d)?,
            FreeIsometricAction::new(self.perms)?,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn structural_checks_reject_malformed_input() {
        assert!(FinitePseudoMetric::new(vec![]).is_err());
        assert!(FinitePseudoMetric::new(vec![vec![0.0, 1.0]]).is_err());
        assert!(FinitePseudoMetric::new(vec![vec![f64::NAN]]).is_err());
        assert!(FreeIsometricAction::new(vec![]).is_err());
        assert!(FreeIsometricAction::new(vec![vec![0, 0]]).is_err());
        assert!(FreeIsometricAction::new(vec![vec![0, 2]]).is_err());
        assert!(FreeIsometricAction::new(vec![vec![0, 1], vec![0]]).is_err());
    }

    #[test]
    fn demo_model_is_valid() {
        let (space, action) = demo_model();
        let report = validate(&space, &action);
        assert!(report.valid(), "{report:?}");
    }

    #[test]
    fn all_zero_metric_is_valid_under_any_free_action() {
        let space = FinitePseudoMetric::new(vec![vec![0.0; 4]; 4]).unwrap();
        let (_, action) = demo_model();
        assert!(validate(&space, &action).valid());
        let quotient = quotient_metric(&space, &action).unwrap();
        assert!(quotient.metric.is_zero());
    }

    #[test]
    fn transposition_breaks_only_freeness() {
        let (space, _) = demo_model();
        // (0 2) alone: an isometry of the 4-cycle, but it fixes 1 and 3
        let action =
            FreeIsometricAction::new(vec![vec![0, 1, 2, 3], vec![2, 1, 0, 3]]).unwrap();
        let report = validate(&space, &action);
        assert!(report.metric.all());
        assert!(report.shapes_agree);
        assert!(report.has_identity);
        assert!(report.composition_closed);
        assert!(report.isometric);
        assert!(!report.free);
        assert!(!report.valid());
        assert_eq!(report.failures(), vec!["free"]);
        assert!(matches!(
            quotient_metric(&space, &action),
            Err(Error::InvalidModel(_))
        ));
    }

    #[test]
    fn demo_quotient_is_the_documented_two_point_space() {
        let (space, action) = demo_model();
        let quotient = quotient_metric(&space, &action).unwrap();
        assert_eq!(quotient.representatives, vec![0, 1]);
        assert_eq!(quotient.metric.rows(), &[vec![0.0, 1.0], vec![1.0, 0.0]]);
        // diagonal: min(0, d(0,2)) through the identity
        assert_eq!(quotient.witnesses[0][0], 0);
        // witnesses re-evaluate to the quotient entries exactly
        for (u, &p) in quotient.representatives.iter().enumerate() {
            for (v, &q) in quotient.representatives.iter().enumerate() {
                let g = quotient.witnesses[u][v];
                let moved = action.perms()[g][q];
                assert_eq!(space.entry(p, moved), quotient.metric.entry(u, v));
            }
        }
    }

    #[test]
    fn trivial_action_keeps_the_space() {
        let (space, _) = demo_model();
        let action = FreeIsometricAction::new(vec![vec![0, 1, 2, 3]]).unwrap();
        let quotient = quotient_metric(&space, &action).unwrap();
        assert_eq!(quotient.representatives, vec![0, 1, 2, 3]);
        assert_eq!(quotient.metric, space);
    }

    #[test]
    fn zero_class_examples() {
        let all_zero = FinitePseudoMetric::new(vec![vec![0.0; 5]; 5]).unwrap();
        assert_eq!(zero_classes(&all_zero), vec![vec![0, 1, 2, 3, 4]]);

        let (genuine, _) = demo_model();
        assert_eq!(
            zero_classes(&genuine),
            vec![vec![0], vec![1], vec![2], vec![3]]
        );

        let glued = FinitePseudoMetric::new(vec![
            vec![0.0, 0.0, 1.0],
            vec![0.0, 0.0, 1.0],
            vec![1.0, 1.0, 0.0],
        ])
        .unwrap();
        assert_eq!(zero_classes(&glued), vec![vec![0, 1], vec![2]]);
    }

    #[test]
    fn random_models_are_valid_and_quotient_cleanly() {
        let mut saw_zero = false;
        let mut saw_nonzero = false;
        for seed in 0..100 {
            let (space, action) = random_model(seed);
            assert!(space.size() <= 12, "seed {seed}");
            assert!(action.order() <= 4, "seed {seed}");
            let report = validate(&space, &action);
            assert!(report.valid(), "seed {seed}: {report:?}");

            let quotient = quotient_metric(&space, &action).unwrap();
            assert!(quotient.metric.axiom_report().all(), "seed {seed}");
            assert!(quotient.representatives.len() >= 2, "seed {seed}");

            // the attained minimum re-evaluates exactly
            for (u, &p) in quotient.representatives.iter().enumerate() {
                for (v, &q) in quotient.representatives.iter().enumerate() {
                    let g = quotient.witnesses[u][v];
                    let moved = action.perms()[g][q];
                    assert_eq!(
                        space.entry(p, moved),
                        quotient.metric.entry(u, v),
                        "seed {seed}"
                    );
                }
            }

            // vanishing equivalence at finite scale
            assert_eq!(space.is_zero(), quotient.metric.is_zero(), "seed {seed}");
            saw_zero |= space.is_zero();
            saw_nonzero |= !space.is_zero();

            // zero classes partition the points
            let classes = zero_classes(&space);
            let mut seen = vec![false; space.size()];
            for class in &classes {
                for &member in class {
                    assert!(!seen[member], "seed {seed}");
                    seen[member] = true;
                }
            }
            assert!(seen.into_iter().all(|s| s), "seed {seed}");
            let class_of = |x: usize| {
                classes
                    .iter()
                    .position(|c| c.contains(&x))
                    .expect("partition covers")
            };
            for x in 0..space.size() {
                for y in 0..space.size() {
                    assert_eq!(
                        class_of(x) == class_of(y),
                        space.entry(x, y) == 0.0,
                        "seed {seed}"
                    );
                }
            }
        }
        assert!(saw_zero, "suite never sampled an all-zero model");
        assert!(saw_nonzero, "suite never sampled a nonzero model");
    }

    #[test]
    fn model_json_round_trips() {
        let (space, action) = demo_model();
        let wire = ModelJson::from_parts(&space, &action);
        let text = serde_json::to_string(&wire).unwrap();
        let back: ModelJson = serde_json::from_str(&text).unwrap();
        let (space2, action2) = back.build().unwrap();
        assert_eq!(space, space2);
        assert_eq!(action, action2);
    }
}
