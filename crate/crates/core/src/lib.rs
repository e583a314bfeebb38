//! Exact SL(2,ℚ) arithmetic, free-group machinery, hyperbolic-plane
//! geometry, and search tools for estimating quotient pseudodistances
//! through the covering formula.
//!
//! The crate studies two rank-2 matrix pairs side by side: the dense
//! pair A = [[2,1],[0,1/2]], B = [[3,0],[1,1/3]] (whose generated
//! group is not discrete) and the Γ(2) pair U = [[1,2],[0,1]],
//! V = [[1,0],[2,1]] (free, discrete, congruent to I mod 2). The deck
//! action on ℍ × SL₂ moves the base point through the first pair and
//! an exact frame through the second, and every quantitative claim is
//! either an exact rational computation or a float computation checked
//! against an independent route.
//!
//! Modules:
//! - [`exact`]: rational 2×2 unimodular matrices, closed-form powers,
//!   eigenpairs, congruence residues.
//! - [`words`]: reduced words of the free group F₂, canonical
//!   enumeration, evaluation homomorphisms.
//! - [`hyperbolic`]: the upper half-plane, closed-form distance,
//!   Möbius action, geodesics, quadrature cross-checks.
//! - [`covering`]: the product space, the deck action, best-first
//!   orbit search producing decreasing upper bounds.
//! - [`probe`]: Diophantine pairs 2ⁿ3ᵐ ≈ 1, the accumulation
//!   experiment, identity-gap curves, Γ(2) certificates.
//! - [`finite_cover`]: finite pseudo-metric models where the covering
//!   formula's infimum is an attained minimum.

pub mod covering;
pub mod error;
pub mod exact;
pub mod finite_cover;
pub mod hyperbolic;
pub mod probe;
pub mod words;

pub use error::Error;
