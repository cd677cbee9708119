//! Exact rational plane primitives.
//!
//! Everything downstream (intersection detection, face location, winding
//! counts) leans on these predicates being exact, so no floating point is
//! allowed in here. Points double as vectors; a handful of by-reference
//! methods keeps the `BigRational` cloning explicit.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{Signed, Zero};
use std::fmt;
use std::str::FromStr;

/// Exact scalar used for all coordinates and parameters.
pub type Rational = BigRational;

/// Rational from an integer.
pub fn rat(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

/// Rational from a fraction. Panics on a zero denominator.
pub fn ratio(num: i64, den: i64) -> Rational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Point in the plane, also used as a displacement vector.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Point {
    pub x: Rational,
    pub y: Rational,
}

impl Point {
    pub fn new(x: Rational, y: Rational) -> Self {
        Point { x, y }
    }

    /// Point with small integer coordinates.
    pub fn int(x: i64, y: i64) -> Self {
        Point::new(rat(x), rat(y))
    }

    pub fn add(&self, o: &Point) -> Point {
        Point::new(&self.x + &o.x, &self.y + &o.y)
    }

    pub fn sub(&self, o: &Point) -> Point {
        Point::new(&self.x - &o.x, &self.y - &o.y)
    }

    pub fn scale(&self, k: &Rational) -> Point {
        Point::new(&self.x * k, &self.y * k)
    }

    pub fn neg(&self) -> Point {
        Point::new(-self.x.clone(), -self.y.clone())
    }

    /// 2D cross product `self.x * o.y - self.y * o.x`.
    pub fn cross(&self, o: &Point) -> Rational {
        &self.x * &o.y - &self.y * &o.x
    }

    pub fn dot(&self, o: &Point) -> Rational {
        &self.x * &o.x + &self.y * &o.y
    }

    /// Quarter turn counterclockwise.
    pub fn perp(&self) -> Point {
        Point::new(-self.y.clone(), self.x.clone())
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    pub fn to_f64(&self) -> (f64, f64) {
        use num::ToPrimitive;
        (
            self.x.to_f64().unwrap_or(f64::NAN),
            self.y.to_f64().unwrap_or(f64::NAN),
        )
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Sign of the turn `a -> b -> c`: positive for a left (counterclockwise)
/// turn, negative for a right turn, zero for collinear points.
pub fn orient(a: &Point, b: &Point, c: &Point) -> Rational {
    b.sub(a).cross(&c.sub(a))
}

/// Classification of how two closed segments meet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SegSeg {
    /// Disjoint.
    None,
    /// Transversal crossing interior to both segments. `ta` is the
    /// parameter along `a..b`, `tc` along `c..d`.
    Proper { ta: Rational, tc: Rational, at: Point },
    /// Contact involving at least one endpoint.
    Touch { at: Point },
    /// Collinear segments sharing more than a point.
    Overlap,
}

/// Intersect segments `a..b` and `c..d`. Assumes both have nonzero length.
pub fn seg_seg(a: &Point, b: &Point, c: &Point, d: &Point) -> SegSeg {
    let r = b.sub(a);
    let s = d.sub(c);
    let w = c.sub(a);
    let denom = r.cross(&s);

    if denom.is_zero() {
        if !w.cross(&r).is_zero() {
            return SegSeg::None;
        }
        // Collinear. Compare extents along r.
        let rr = r.dot(&r);
        let t0 = w.dot(&r) / &rr;
        let t1 = d.sub(a).dot(&r) / &rr;
        let (lo, hi) = if t0 <= t1 { (t0, t1) } else { (t1, t0) };
        let zero = Rational::zero();
        let one = rat(1);
        if hi < zero || lo > one {
            return SegSeg::None;
        }
        if hi == zero {
            return SegSeg::Touch { at: a.clone() };
        }
        if lo == one {
            return SegSeg::Touch { at: b.clone() };
        }
        return SegSeg::Overlap;
    }

    let ta = w.cross(&s) / &denom;
    let tc = w.cross(&r) / &denom;
    let zero = Rational::zero();
    let one = rat(1);
    if ta < zero || ta > one || tc < zero || tc > one {
        return SegSeg::None;
    }
    let at = a.add(&r.scale(&ta));
    if ta > zero && ta < one && tc > zero && tc < one {
        SegSeg::Proper { ta, tc, at }
    } else {
        SegSeg::Touch { at }
    }
}

/// Strict membership of direction `w` in the wedge swept counterclockwise
/// from `u` to `v`. Boundary rays do not count. A zero wedge (parallel,
/// same sense) contains nothing; a straight wedge (opposite sense) is the
/// open half plane to the left of `u`.
pub fn ccw_wedge_contains(u: &Point, v: &Point, w: &Point) -> bool {
    let uv = u.cross(v);
    if uv.is_positive() {
        u.cross(w).is_positive() && w.cross(v).is_positive()
    } else if uv.is_negative() {
        u.cross(w).is_positive() || w.cross(v).is_positive()
    } else if u.dot(v).is_negative() {
        u.cross(w).is_positive()
    } else {
        false
    }
}

/// True if `v` points exactly along the positive x axis.
pub fn is_east(v: &Point) -> bool {
    v.y.is_zero() && v.x.is_positive()
}

/// First intersection of the ray `q + t dir` (t > 0) with any of `edges`,
/// as the smallest such `t`. Endpoint grazes and collinear overlaps count
/// as hits, which makes the answer conservative for clearance checks.
pub fn ray_first_hit<'a, I>(edges: I, q: &Point, dir: &Point) -> Option<Rational>
where
    I: Iterator<Item = (&'a Point, &'a Point)>,
{
    let zero = Rational::zero();
    let one = rat(1);
    let mut best: Option<Rational> = None;
    let mut consider = |t: Rational| {
        if t > zero && best.as_ref().map_or(true, |b| &t < b) {
            best = Some(t);
        }
    };
    for (a, b) in edges {
        let e = b.sub(a);
        let w = a.sub(q);
        let denom = dir.cross(&e);
        if denom.is_zero() {
            if !w.cross(dir).is_zero() {
                continue;
            }
            let dd = dir.dot(dir);
            let t_a = w.dot(dir) / &dd;
            let t_b = b.sub(q).dot(dir) / &dd;
            let (lo, hi) = if t_a <= t_b { (t_a, t_b) } else { (t_b, t_a) };
            if hi > zero {
                consider(if lo > zero { lo } else { hi });
            }
            continue;
        }
        let t = w.cross(&e) / &denom;
        let u = w.cross(dir) / &denom;
        if u >= zero && u <= one {
            consider(t);
        }
    }
    best
}

/// Parse a rational like `7`, `-3/4`.
pub fn parse_rational(text: &str) -> Result<Rational, String> {
    BigRational::from_str(text.trim()).map_err(|e| format!("bad rational {text:?}: {e}"))
}

/// Render a rational as `p` or `p/q`.
pub fn rational_string(r: &Rational) -> String {
    r.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: i64, y: i64) -> Point {
        Point::int(x, y)
    }

    #[test]
    fn proper_crossing_has_interior_params() {
        let hit = seg_seg(&p(0, 0), &p(4, 4), &p(0, 4), &p(4, 0));
        match hit {
            SegSeg::Proper { ta, tc, at } => {
                assert_eq!(ta, ratio(1, 2));
                assert_eq!(tc, ratio(1, 2));
                assert_eq!(at, p(2, 2));
            }
            other => panic!("expected proper crossing, got {other:?}"),
        }
    }

    #[test]
    fn endpoint_contact_is_touch() {
        assert!(matches!(
            seg_seg(&p(0, 0), &p(2, 0), &p(2, 0), &p(3, 5)),
            SegSeg::Touch { .. }
        ));
        // T-contact: endpoint interior to the other segment.
        assert!(matches!(
            seg_seg(&p(0, 0), &p(4, 0), &p(2, 0), &p(2, 3)),
            SegSeg::Touch { .. }
        ));
    }

    #[test]
    fn collinear_cases() {
        assert_eq!(seg_seg(&p(0, 0), &p(2, 0), &p(3, 0), &p(5, 0)), SegSeg::None);
        assert!(matches!(
            seg_seg(&p(0, 0), &p(2, 0), &p(2, 0), &p(5, 0)),
            SegSeg::Touch { .. }
        ));
        assert_eq!(seg_seg(&p(0, 0), &p(3, 0), &p(1, 0), &p(5, 0)), SegSeg::Overlap);
        assert_eq!(seg_seg(&p(0, 1), &p(2, 1), &p(0, 2), &p(2, 2)), SegSeg::None);
    }

    #[test]
    fn wedge_membership() {
        let e = p(1, 0);
        let n = p(0, 1);
        let w = p(-1, 0);
        let ne = p(1, 1);
        // Narrow wedge east -> north.
        assert!(ccw_wedge_contains(&e, &n, &ne));
        assert!(!ccw_wedge_contains(&e, &n, &w));
        // Reflex wedge north -> east contains west.
        assert!(ccw_wedge_contains(&n, &e, &w));
        assert!(!ccw_wedge_contains(&n, &e, &ne));
        // Straight wedge: open left half plane of`u`.
        assert!(ccw_wedge_contains(&e, &w, &n));
        assert!(!ccw_wedge_contains(&e, &w, &p(0, -1)));
        // Boundary rays excluded.
        assert!(!ccw_wedge_contains(&e, &n, &e));
        assert!(!ccw_wedge_contains(&e, &n, &n));
    }

    #[test]
    fn ray_hits_nearest_edge_first() {
        let a0 = p(2, -1);
        let a1 = p(2, 1);
        let b0 = p(5, -3);
        let b1 = p(5, 3);
        let edges = vec![(&b0, &b1), (&a0, &a1)];
        let t = ray_first_hit(edges.into_iter(), &p(0, 0), &p(1, 0)).unwrap();
        assert_eq!(t, rat(2));
    }

    #[test]
    fn rational_round_trip() {
        let r = ratio(-21, 6);
        let s = rational_string(&r);
        assert_eq!(s, "-7/2");
        assert_eq!(parse_rational(&s).unwrap(), r);
        assert_eq!(parse_rational("5").unwrap(), rat(5));
    }
}
