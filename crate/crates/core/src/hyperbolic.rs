//! The open upper half-plane with the curvature −1 metric: Möbius
//! action of exact unimodular matrices, the closed-form distance
//! arcosh(1 + |z−w|²/(2·Im z·Im w)), the infinitesimal density
//! |v|/Im z, geodesics, and quadrature of path lengths as an
//! independent check on the closed form.
//!
//! All geometry is double precision; exactness lives in the matrix
//! layer.

use std::fmt;
use std::str::FromStr;

use crate::error::Error;
use crate::exact::UniMat;

/// Relative tolerance for successive quadrature refinements.
pub const QUAD_REL_TOL: f64 = 1e-11;
/// Dyadic refinement cap; reaching it raises `NoConvergence`.
const MAX_DOUBLINGS: u32 = 22;
/// Relative real-part threshold below which a geodesic counts as
/// vertical (an arc through nearly-aligned points would need an
/// astronomically large radius).
const VERTICAL_EPS: f64 = 1e-12;

/// A point of the open upper half-plane: im > 0 strictly, enforced at
/// construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HPoint {
    re: f64,
    im: f64,
}

impl HPoint {
    pub fn new(re: f64, im: f64) -> Result<Self, Error> {
        if !re.is_finite() || !im.is_finite() || im <= 0.0 {
            return Err(Error::InvalidPoint { re, im });
        }
        Ok(HPoint { re, im })
    }

    /// The base point i = 0 + 1i.
    pub fn i() -> Self {
        HPoint { re: 0.0, im: 1.0 }
    }

    pub fn re(&self) -> f64 {
        self.re
    }

    pub fn im(&self) -> f64 {
        self.im
    }
}

/// Printed as `x+yi` (e.g. `0+1i`, `-0.5+0.5i`).
impl fmt::Display for HPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}+{}i", self.re, self.im)
    }
}

impl FromStr for HPoint {
    type Err = Error;

    /// Parse `x+yi`; the imaginary part may carry its own sign
    /// (`1-0.5i` parses and is then rejected for leaving ℍ).
    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim();
        let body = s
            .strip_suffix('i')
            .ok_or_else(|| Error::Parse(format!("point {s:?} must end in 'i'")))?;
        // the separator is the last sign that neither starts the string
        // nor belongs to an exponent
        let bytes = body.as_bytes();
        let split = (1..bytes.len())
            .rev()
            .find(|&k| {
                (bytes[k] == b'+' || bytes[k] == b'-')
                    && !matches!(bytes[k - 1], b'e' | b'E')
            })
            .ok_or_else(|| Error::Parse(format!("point {s:?} must look like x+yi")))?;
        let re: f64 = body[..split]
            .parse()
            .map_err(|_| Error::Parse(format!("bad real part in {s:?}")))?;
        let im: f64 = body[split..]
            .parse()
            .map_err(|_| Error::Parse(format!("bad imaginary part in {s:?}")))?;
        HPoint::new(re, im)
    }
}

/// The Kobayashi–Royden density of ℍ at `z` in direction `v`: |v|/Im z.
pub fn kr_density(z: HPoint, v: (f64, f64)) -> f64 {
    v.0.hypot(v.1) / z.im
}

/// Closed-form distance arcosh(1 + |z−w|²/(2·Im z·Im w)), with arcosh
/// evaluated as ln(x + √(x²−1)) and the argument clamped to ≥ 1 to
/// absorb rounding for near-equal points.
pub fn dist_h(z: HPoint, w: HPoint) -> f64 {
    let dre = z.re - w.re;
    let dim = z.im - w.im;
    let x = 1.0 + (dre * dre + dim * dim) / (2.0 * z.im * w.im);
    let x = x.max(1.0);
    (x + (x * x - 1.0).sqrt()).ln()
}

/// Möbius action (az+b)/(cz+d) of an exact unimodular matrix, with the
/// entries converted to doubles.
pub fn mobius_apply(m: &UniMat, z: HPoint) -> HPoint {
    let [[a, b], [c, d]] = m.to_f64();
    let den_re = c * z.re + d;
    let den_im = c * z.im;
    let den2 = den_re * den_re + den_im * den_im;
    let num_re = a * z.re + b;
    let re = (num_re * den_re + a * z.im * den_im) / den2;
    // det = 1 collapses the imaginary part to Im z / |cz+d|²; the
    // max() guards the im > 0 invariant against denormal underflow
    let im = (z.im / den2).max(f64::MIN_POSITIVE);
    HPoint { re, im }
}

/// The hyperbolic geodesic through two distinct points: a vertical
/// segment or a semicircular arc centered on the real axis. Endpoint
/// data (heights/angles) is stored in input order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Geodesic {
    Vertical {
        x: f64,
        y_first: f64,
        y_second: f64,
    },
    /// Angles measured from the center, in (0, π).
    Arc {
        center: f64,
        radius: f64,
        theta_first: f64,
        theta_second: f64,
    },
}

/// The geodesic from `z` to `w`: vertical when the real parts agree to
/// 1e−12 relative, otherwise the arc centered at
/// (|w|² − |z|²)/(2(Re w − Re z)).
pub fn geodesic_between(z: HPoint, w: HPoint) -> Result<Geodesic, Error> {
    if z == w {
        return Err(Error::DegeneratePair(format!("{z} equals {w}")));
    }
    let scale = 1.0_f64.max(z.re.abs()).max(w.re.abs());
    if (z.re - w.re).abs() <= VERTICAL_EPS * scale {
        return Ok(Geodesic::Vertical {
            x: z.re,
            y_first: z.im,
            y_second: w.im,
        });
    }
    let center =
        (w.re * w.re + w.im * w.im - z.re * z.re - z.im * z.im) / (2.0 * (w.re - z.re));
    let radius = (z.re - center).hypot(z.im);
    Ok(Geodesic::Arc {
        center,
        radius,
        theta_first: z.im.atan2(z.re - center),
        theta_second: w.im.atan2(w.re - center),
    })
}

impl Geodesic {
    /// The two defining points, reconstructed from the stored data.
    pub fn endpoints(&self) -> (HPoint, HPoint) {
        match *self {
            Geodesic::Vertical {
                x,
                y_first,
                y_second,
            } => (
                HPoint { re: x, im: y_first },
                HPoint {
                    re: x,
                    im: y_second,
                },
            ),
            Geodesic::Arc {
                center,
                radius,
                theta_first,
                theta_second,
            } => {
                let at = |th: f64| HPoint {
                    re: center + radius * th.cos(),
                    im: radius * th.sin(),
                };
                (at(theta_first), at(theta_second))
            }
        }
    }
}

/// Composite Simpson on `n` panels (`n` even).
fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for k in 1..n {
        let weight = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += weight * f(a + k as f64 * h);
    }
    acc * h / 3.0
}

/// Dyadically refine composite Simpson until two successive values
/// agree to `QUAD_REL_TOL`·max(1, |value|), up to `MAX_DOUBLINGS`.
fn refine<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> Result<f64, Error> {
    if a == b {
        return Ok(0.0);
    }
    let mut n = 8;
    let mut prev = simpson(&f, a, b, n);
    for _ in 0..MAX_DOUBLINGS {
        n *= 2;
        let next = simpson(&f, a, b, n);
        if (next - prev).abs() <= QUAD_REL_TOL * 1.0_f64.max(next.abs()) {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::NoConvergence {
        doublings: MAX_DOUBLINGS,
    })
}

/// A piecewise-straight path in ℍ: at least two nodes, consecutive
/// nodes distinct.
#[derive(Debug, Clone, PartialEq)]
pub struct HPath {
    nodes: Vec<HPoint>,
}

impl HPath {
    pub fn new(nodes: Vec<HPoint>) -> Result<Self, Error> {
        if nodes.len() < 2 {
            return Err(Error::DegeneratePair(
                "a path needs at least two nodes".into(),
            ));
        }
        for pair in nodes.windows(2) {
            if pair[0] == pair[1] {
                return Err(Error::DegeneratePair(format!(
                    "repeated consecutive node {}",
                    pair[0]
                )));
            }
        }
        Ok(HPath { nodes })
    }

    pub fn nodes(&self) -> &[HPoint] {
        &self.nodes
    }
}

/// KR length of one straight Euclidean segment, by quadrature of
/// |w−z| / Im(z + t(w−z)) over t ∈ [0, 1].
fn segment_length_kr(z: HPoint, w: HPoint) -> Result<f64, Error> {
    let dre = w.re - z.re;
    let dim = w.im - z.im;
    let speed = dre.hypot(dim);
    refine(move |t| speed / (z.im + t * dim), 0.0, 1.0)
}

/// KR length of a piecewise-straight path (sum over segments).
pub fn path_length_kr(path: &HPath) -> Result<f64, Error> {
    let mut total = 0.0;
    for pair in path.nodes.windows(2) {
        total += segment_length_kr(pair[0], pair[1])?;
    }
    Ok(total)
}

/// KR length along a geodesic by quadrature: ∫ dy/y on verticals,
/// ∫ dθ/sin θ on arcs (the radius cancels against the density).
pub fn geodesic_length_kr(g: &Geodesic) -> Result<f64, Error> {
    match *g {
        Geodesic::Vertical {
            y_first, y_second, ..
        } => {
            let (lo, hi) = if y_first <= y_second {
                (y_first, y_second)
            } else {
                (y_second, y_first)
            };
            refine(|y| 1.0 / y, lo, hi)
        }
        Geodesic::Arc {
            theta_first,
            theta_second,
            ..
        } => {
            let (lo, hi) = if theta_first <= theta_second {
                (theta_first, theta_second)
            } else {
                (theta_second, theta_first)
            };
            refine(|th| 1.0 / th.sin(), lo, hi)
        }
    }
}

/// Quadrature route to the distance: integrate the density along the
/// connecting geodesic. Coincident points give 0.
pub fn dist_by_integration(z: HPoint, w: HPoint) -> Result<f64, Error> {
    if z == w {
        return Ok(0.0);
    }
    geodesic_length_kr(&geodesic_between(z, w)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    fn pt(re: f64, im: f64) -> HPoint {
        HPoint::new(re, im).unwrap()
    }

    #[test]
    fn construction_guards_the_half_plane() {
        assert!(HPoint::new(0.0, 1.0).is_ok());
        assert!(matches!(
            HPoint::new(0.0, 0.0),
            Err(Error::InvalidPoint { .. })
        ));
        assert!(HPoint::new(0.0, -1.0).is_err());
        assert!(HPoint::new(f64::NAN, 1.0).is_err());
        assert!(HPoint::new(0.0, f64::INFINITY).is_err());
    }

    #[test]
    fn point_strings_round_trip() {
        for s in ["0+1i", "0+2i", "-0.5+0.5i", "1.25+0.125i"] {
            let p: HPoint = s.parse().unwrap();
            assert_eq!(p.to_string(), s);
        }
        // parses structurally but leaves the half-plane
        assert!(matches!(
            "1-0.5i".parse::<HPoint>(),
            Err(Error::InvalidPoint { .. })
        ));
        assert!(matches!("0-1i".parse::<HPoint>(), Err(Error::InvalidPoint { .. })));
        assert!("2i".parse::<HPoint>().is_err());
        assert!("1+2".parse::<HPoint>().is_err());
        assert!("".parse::<HPoint>().is_err());
        // exponent signs are not separators
        let p: HPoint = "1e-2+1e-1i".parse().unwrap();
        assert_eq!((p.re(), p.im()), (0.01, 0.1));
    }

    #[test]
    fn distance_examples() {
        let i = HPoint::i();
        assert_eq!(dist_h(i, i), 0.0);
        assert!((dist_h(i, pt(0.0, 2.0)) - LN_2).abs() < 1e-12);
        assert!((dist_h(i, pt(1.0, 1.0)) - 0.9624236501192069).abs() < 1e-15);
    }

    #[test]
    fn density_examples() {
        let i = HPoint::i();
        assert_eq!(kr_density(i, (0.0, 0.0)), 0.0);
        assert_eq!(kr_density(i, (1.0, 0.0)), 1.0);
        assert_eq!(kr_density(pt(0.0, 2.0), (3.0, 4.0)), 2.5);
    }

    #[test]
    fn mobius_examples() {
        let i = HPoint::i();
        let id_img = mobius_apply(&UniMat::identity(), i);
        assert_eq!((id_img.re(), id_img.im()), (0.0, 1.0));
        let a_img = mobius_apply(&UniMat::dense_a(), i);
        assert!((a_img.re() - 2.0).abs() < 1e-15);
        assert!((a_img.im() - 4.0).abs() < 1e-15);
        let v_img = mobius_apply(&UniMat::gamma2_v(), i);
        assert!((v_img.re() - 0.4).abs() < 1e-15);
        assert!((v_img.im() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn geodesic_classification() {
        let i = HPoint::i();
        match geodesic_between(i, pt(0.0, 2.0)).unwrap() {
            Geodesic::Vertical { x, y_first, y_second } => {
                assert_eq!((x, y_first, y_second), (0.0, 1.0, 2.0));
            }
            g => panic!("expected vertical, got {g:?}"),
        }
        match geodesic_between(i, pt(1.0, 1.0)).unwrap() {
            Geodesic::Arc { center, radius, .. } => {
                assert!((center - 0.5).abs() < 1e-15);
                assert!((radius - 5.0_f64.sqrt() / 2.0).abs() < 1e-15);
            }
            g => panic!("expected arc, got {g:?}"),
        }
        match geodesic_between(pt(-1.0, 1.0), pt(1.0, 1.0)).unwrap() {
            Geodesic::Arc { center, radius, .. } => {
                assert!(center.abs() < 1e-15);
                assert!((radius - 2.0_f64.sqrt()).abs() < 1e-15);
            }
            g => panic!("expected arc, got {g:?}"),
        }
        assert!(matches!(
            geodesic_between(i, i),
            Err(Error::DegeneratePair(_))
        ));
    }

    #[test]
    fn geodesic_endpoints_reconstruct() {
        let pairs = [
            (pt(0.0, 1.0), pt(0.0, 2.0)),
            (pt(0.0, 1.0), pt(1.0, 1.0)),
            (pt(-3.5, 0.25), pt(4.0, 6.0)),
        ];
        for (z, w) in pairs {
            let g = geodesic_between(z, w).unwrap();
            let (ez, ew) = g.endpoints();
            let rel = |p: HPoint, q: HPoint| {
                let scale = 1.0_f64.max(p.re.abs()).max(p.im.abs());
                ((p.re - q.re).abs() / scale).max((p.im - q.im).abs() / scale)
            };
            assert!(rel(z, ez) <= 1e-12, "{z} vs {ez}");
            assert!(rel(w, ew) <= 1e-12, "{w} vs {ew}");
        }
    }

    #[test]
    fn integration_reproduces_the_closed_form() {
        let i = HPoint::i();
        let v = dist_by_integration(i, pt(0.0, 2.0)).unwrap();
        assert!((v - LN_2).abs() < 1e-9);
        let arc = dist_by_integration(i, pt(1.0, 1.0)).unwrap();
        assert!((arc - 0.9624236501192069).abs() < 1e-9);
        assert_eq!(dist_by_integration(i, i).unwrap(), 0.0);
    }

    #[test]
    fn chord_is_no_shorter_than_the_geodesic() {
        let i = HPoint::i();
        let w = pt(1.0, 1.0);
        let chord = HPath::new(vec![i, w]).unwrap();
        let len = path_length_kr(&chord).unwrap();
        // along this chord Im ≡ 1, so the length is exactly 1
        assert!(len >= dist_h(i, w) - 1e-9);
        assert!((len - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn degenerate_paths_are_rejected() {
        let i = HPoint::i();
        assert!(HPath::new(vec![i]).is_err());
        assert!(HPath::new(vec![i, i]).is_err());
        assert!(HPath::new(vec![i, pt(0.0, 2.0), pt(0.0, 2.0)]).is_err());
        assert!(HPath::new(vec![i, pt(0.0, 2.0), i]).is_ok());
    }

    #[test]
    fn tan_half_angle_cross_check() {
        let pairs = [
            (pt(0.0, 1.0), pt(1.0, 1.0)),
            (pt(-2.0, 0.5), pt(3.0, 2.0)),
            (pt(0.25, 4.0), pt(0.75, 0.3)),
        ];
        for (z, w) in pairs {
            match geodesic_between(z, w).unwrap() {
                Geodesic::Arc {
                    theta_first,
                    theta_second,
                    ..
                } => {
                    let analytic =
                        ((theta_second / 2.0).tan().ln() - (theta_first / 2.0).tan().ln()).abs();
                    assert!(
                        (analytic - dist_h(z, w)).abs() <= 1e-9,
                        "tan-half mismatch for {z}, {w}"
                    );
                }
                g => panic!("expected arc, got {g:?}"),
            }
        }
    }
}
