//! Closed rational polylines and their generic-position validation.
//!
//! A curve is a cyclic vertex list; edge `i` runs `v[i] -> v[(i+1) % len]`.
//! Validation rejects everything that is not a generic immersion: zero
//! edges, exact direction reversals, tangential contacts, overlapping
//! edges, and triple points. What survives is a [`ValidatedCurve`] whose
//! transversal self-intersections are listed in traversal order.
//!
//! Winding numbers and the turning number are computed here directly from
//! coordinates (ray casting and exact east-crossing counts). The
//! combinatorial layer recomputes both through face labels, which gives
//! two independent routes to every invariant.

use crate::exact::{is_east, seg_seg, Point, Rational, SegSeg};
use num::traits::{Signed, Zero};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("not a closed curve: {0}")]
    NotClosed(String),
    #[error("exact direction reversal at vertex {0}")]
    EdgeReversal(usize),
    #[error("tangential intersection between edges {0} and {1}")]
    TangentialIntersection(usize, usize),
    #[error("three or more branches pass through one point (edges {0:?})")]
    TripleOrHigherPoint(Vec<usize>),
    #[error("point lies on the curve")]
    PointOnCurve,
}

/// Closed polyline. Vertices are exact; the curve is traversed in vertex
/// order and implicitly closed back to `vertices[0]`.
#[derive(Clone, Debug)]
pub struct PolylineCurve {
    pub vertices: Vec<Point>,
}

impl PolylineCurve {
    pub fn new(vertices: Vec<Point>) -> Self {
        PolylineCurve { vertices }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn edge(&self, i: usize) -> (&Point, &Point) {
        let n = self.vertices.len();
        (&self.vertices[i % n], &self.vertices[(i + 1) % n])
    }

    pub fn edge_dir(&self, i: usize) -> Point {
        let (a, b) = self.edge(i);
        b.sub(a)
    }

    pub fn segments(&self) -> impl Iterator<Item = (&Point, &Point)> {
        let n = self.vertices.len();
        (0..n).map(move |i| (&self.vertices[i], &self.vertices[(i + 1) % n]))
    }

    pub fn point_at(&self, pos: &CurvePosition) -> Point {
        let (a, b) = self.edge(pos.edge);
        a.add(&b.sub(a).scale(&pos.t))
    }

    pub fn translate(&self, by: &Point) -> PolylineCurve {
        PolylineCurve::new(self.vertices.iter().map(|v| v.add(by)).collect())
    }

    /// Uniform scale about the origin. `k` must be positive to preserve
    /// orientation.
    pub fn scale_uniform(&self, k: &Rational) -> PolylineCurve {
        PolylineCurve::new(self.vertices.iter().map(|v| v.scale(k)).collect())
    }

    /// Mirror across the x axis. Reverses orientation-sensitive data.
    pub fn reflect_y(&self) -> PolylineCurve {
        PolylineCurve::new(
            self.vertices
                .iter()
                .map(|v| Point::new(v.x.clone(), -v.y.clone()))
                .collect(),
        )
    }

    /// Quarter turn counterclockwise about the origin.
    pub fn rotate_quarter(&self) -> PolylineCurve {
        PolylineCurve::new(self.vertices.iter().map(|v| v.perp()).collect())
    }

    /// Same point set traversed backwards.
    pub fn reversed(&self) -> PolylineCurve {
        let mut v = self.vertices.clone();
        v.reverse();
        PolylineCurve::new(v)
    }

    /// Axis-aligned bounding box as (min corner, max corner).
    pub fn bbox(&self) -> (Point, Point) {
        let mut min = self.vertices[0].clone();
        let mut max = self.vertices[0].clone();
        for v in &self.vertices[1..] {
            if v.x < min.x {
                min.x = v.x.clone();
            }
            if v.y < min.y {
                min.y = v.y.clone();
            }
            if v.x > max.x {
                max.x = v.x.clone();
            }
            if v.y > max.y {
                max.y = v.y.clone();
            }
        }
        (min, max)
    }

    pub fn on_curve(&self, p: &Point) -> bool {
        for (a, b) in self.segments() {
            let ab = b.sub(a);
            let ap = p.sub(a);
            if ab.cross(&ap).is_zero() {
                let d = ap.dot(&ab);
                if !d.is_negative() && d <= ab.dot(&ab) {
                    return true;
                }
            }
        }
        false
    }

    /// Winding number of the curve around `p`, or `None` if `p` lies on
    /// the curve. Counts signed crossings of the east ray from `p` with
    /// the half-open rule `min_y <= p.y < max_y`, which is the exact
    /// limit of a ray cast in direction (1, eps) for infinitesimal
    /// eps > 0, so rays through vertices need no retry.
    pub fn point_winding(&self, p: &Point) -> Option<i64> {
        if self.on_curve(p) {
            return None;
        }
        let mut w = 0i64;
        for (a, b) in self.segments() {
            let (sign, lo, hi) = if a.y < b.y {
                (1, a, b)
            } else if b.y < a.y {
                (-1, b, a)
            } else {
                continue;
            };
            if !(lo.y <= p.y && p.y < hi.y) {
                continue;
            }
            // x where the edge meets the horizontal through p.
            let t = (&p.y - &lo.y) / (&hi.y - &lo.y);
            let x = &lo.x + (&hi.x - &lo.x) * t;
            if x > p.x {
                w += sign;
            }
        }
        Some(w)
    }

    /// First curve point strictly east of `q` along the same tilted ray
    /// as [`point_winding`]: edges are filtered by the half-open rule,
    /// and exact x ties fall to the edge with smaller dx/dy, the one the
    /// tilted ray meets first. An ascending hit therefore shows the ray
    /// the edge's left side, a descending hit its right side.
    pub fn first_hit_east(&self, q: &Point) -> EastHit {
        if self.on_curve(q) {
            return EastHit::OnCurve;
        }
        let mut best: Option<(Rational, Rational, EastHitInfo)> = None;
        for i in 0..self.len() {
            let (a, b) = self.edge(i);
            let ascending = if a.y < b.y {
                true
            } else if b.y < a.y {
                false
            } else {
                continue;
            };
            let (lo, hi) = if ascending { (a, b) } else { (b, a) };
            if !(lo.y <= q.y && q.y < hi.y) {
                continue;
            }
            let dy = &b.y - &a.y;
            let t = (&q.y - &a.y) / &dy;
            let x = &a.x + (&b.x - &a.x) * &t;
            if x <= q.x {
                continue;
            }
            let slope = (&b.x - &a.x) / &dy;
            let better = match &best {
                None => true,
                Some((bx, bslope, _)) => x < *bx || (x == *bx && slope < *bslope),
            };
            if better {
                let at = Point::new(x.clone(), q.y.clone());
                best = Some((
                    x,
                    slope,
                    EastHitInfo {
                        edge: i,
                        t,
                        ascending,
                        at,
                    },
                ));
            }
        }
        match best {
            Some((_, _, info)) => EastHit::Hit(info),
            None => EastHit::Clear,
        }
    }

    /// Exact turning number: net revolutions of the edge direction.
    ///
    /// Computed as signed passes of the rotating direction through east.
    /// Each corner turns by less than a half turn (reversals are
    /// rejected), and passes exactly at a corner are attributed to the
    /// departing edge, so corners where the direction only touches east
    /// and comes back cancel. A floating-point exterior-angle sum is kept
    /// as a second route and asserted to agree.
    pub fn turning_number(&self) -> Result<i64, GeometryError> {
        structural_checks(self)?;
        let n = self.len();
        let mut total = 0i64;
        for i in 0..n {
            let u = self.edge_dir((i + n - 1) % n);
            let v = self.edge_dir(i);
            let c = u.cross(&v);
            if c.is_positive() {
                if is_east(&u) || (u.y.is_negative() && v.y.is_positive()) {
                    total += 1;
                }
            } else if c.is_negative() {
                if is_east(&v) || (u.y.is_positive() && v.y.is_negative()) {
                    total -= 1;
                }
            }
        }
        if let Some(by_angles) = self.turning_number_by_angles() {
            assert_eq!(total, by_angles, "turning number routes disagree");
        }
        Ok(total)
    }

    /// Exterior-angle sum route, `None` if coordinates exceed f64 range.
    fn turning_number_by_angles(&self) -> Option<i64> {
        let n = self.len();
        let mut sum = 0.0f64;
        for i in 0..n {
            let u = self.edge_dir((i + n - 1) % n).to_f64();
            let v = self.edge_dir(i).to_f64();
            let dot = u.0 * v.0 + u.1 * v.1;
            let cross = u.0 * v.1 - u.1 * v.0;
            sum += cross.atan2(dot);
        }
        let turns = sum / (2.0 * std::f64::consts::PI);
        if !turns.is_finite() || (turns - turns.round()).abs() > 0.25 {
            return None;
        }
        Some(turns.round() as i64)
    }
}

fn structural_checks(curve: &PolylineCurve) -> Result<(), GeometryError> {
    let n = curve.len();
    if n < 3 {
        return Err(GeometryError::NotClosed(format!(
            "need at least 3 vertices, got {n}"
        )));
    }
    for i in 0..n {
        if curve.edge_dir(i).is_zero() {
            return Err(GeometryError::NotClosed(format!(
                "zero-length edge at index {i}"
            )));
        }
    }
    for i in 0..n {
        let u = curve.edge_dir((i + n - 1) % n);
        let v = curve.edge_dir(i);
        if u.cross(&v).is_zero() && u.dot(&v).is_negative() {
            return Err(GeometryError::EdgeReversal(i));
        }
    }
    Ok(())
}

/// All transversal self-intersections, sorted by first visit.
///
/// Candidate edge pairs come from a sweep over x intervals (sort by min
/// x, prune the active set by max x, skip pairs with disjoint y spans);
/// survivors get the exact segment predicate. The pruning is validated
/// against a plain all-pairs scan in the test suite.
pub fn find_intersections(curve: &PolylineCurve) -> Result<Vec<DoublePoint>, GeometryError> {
    structural_checks(curve)?;
    let n = curve.len();

    struct EdgeSpan {
        idx: usize,
        min_x: Rational,
        max_x: Rational,
        min_y: Rational,
        max_y: Rational,
    }
    let mut spans: Vec<EdgeSpan> = (0..n)
        .map(|i| {
            let (a, b) = curve.edge(i);
            EdgeSpan {
                idx: i,
                min_x: a.x.clone().min(b.x.clone()),
                max_x: a.x.clone().max(b.x.clone()),
                min_y: a.y.clone().min(b.y.clone()),
                max_y: a.y.clone().max(b.y.clone()),
            }
        })
        .collect();
    spans.sort_by(|a, b| a.min_x.cmp(&b.min_x).then(a.idx.cmp(&b.idx)));

    let mut events: BTreeMap<Point, Vec<CurvePosition>> = BTreeMap::new();
    let mut active: Vec<usize> = Vec::new(); // indices into spans
    for s in 0..spans.len() {
        let cur = &spans[s];
        active.retain(|&a| spans[a].max_x >= cur.min_x);
        for &a in &active {
            let other = &spans[a];
            if other.max_y < cur.min_y || cur.max_y < other.min_y {
                continue;
            }
            let (i, j) = if other.idx < cur.idx {
                (other.idx, cur.idx)
            } else {
                (cur.idx, other.idx)
            };
            if j == i + 1 || (i == 0 && j == n - 1) {
                // Adjacent edges share a vertex legitimately; collinear
                // folds were already rejected as reversals.
                continue;
            }
            let (pa, pb) = curve.edge(i);
            let (pc, pd) = curve.edge(j);
            match seg_seg(pa, pb, pc, pd) {
                SegSeg::None => {}
                SegSeg::Proper { ta, tc, at } => {
                    let entry = events.entry(at).or_default();
                    entry.push(CurvePosition::new(i, ta));
                    entry.push(CurvePosition::new(j, tc));
                }
                SegSeg::Touch { .. } | SegSeg::Overlap => {
                    return Err(GeometryError::TangentialIntersection(i, j));
                }
            }
        }
        active.push(s);
    }

    for (_, hits) in events.iter() {
        if hits.len() != 2 {
            return Err(GeometryError::TripleOrHigherPoint(
                hits.iter().map(|pos| pos.edge).collect(),
            ));
        }
    }

    // Order the 2n passes along the curve and pair them up.
    let mut passes: Vec<(CurvePosition, Point)> = events
        .iter()
        .flat_map(|(at, hits)| hits.iter().map(move |pos| (pos.clone(), at.clone())))
        .collect();
    passes.sort_by(|a, b| a.0.cmp(&b.0));
    let mut open: BTreeMap<Point, CurvePosition> = BTreeMap::new();
    let mut double_points = Vec::new();
    for (pos, at) in passes {
        match open.remove(&at) {
            None => {
                open.insert(at, pos);
            }
            Some(first) => double_points.push(DoublePoint {
                first,
                second: pos,
                at,
            }),
        }
    }
    double_points.sort_by(|a, b| a.first.cmp(&b.first));
    Ok(double_points)
}

/// Location on the curve: a parameter `t` in `[0, 1]` along edge `edge`.
/// Ordering is traversal order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct CurvePosition {
    pub edge: usize,
    pub t: Rational,
}

impl CurvePosition {
    pub fn new(edge: usize, t: Rational) -> Self {
        CurvePosition { edge, t }
    }
}

/// Transversal self-intersection. `first` and `second` are the two passes
/// through `at`, with `first < second` in traversal order.
#[derive(Clone, Debug)]
pub struct DoublePoint {
    pub first: CurvePosition,
    pub second: CurvePosition,
    pub at: Point,
}

/// Result of [`PolylineCurve::first_hit_east`].
#[derive(Clone, Debug)]
pub enum EastHit {
    OnCurve,
    Clear,
    Hit(EastHitInfo),
}

#[derive(Clone, Debug)]
pub struct EastHitInfo {
    pub edge: usize,
    pub t: Rational,
    pub ascending: bool,
    pub at: Point,
}

/// A curve that passed genericity validation. Double points are indexed
/// in order of first visit.
#[derive(Clone, Debug)]
pub struct ValidatedCurve {
    curve: PolylineCurve,
    double_points: Vec<DoublePoint>,
}

impl ValidatedCurve {
    pub fn validate(curve: PolylineCurve) -> Result<ValidatedCurve, GeometryError> {
        let double_points = find_intersections(&curve)?;
        Ok(ValidatedCurve {
            curve,
            double_points,
        })
    }

    pub fn curve(&self) -> &PolylineCurve {
        &self.curve
    }

    pub fn double_points(&self) -> &[DoublePoint] {
        &self.double_points
    }

    pub fn turning_number(&self) -> i64 {
        self.curve.turning_number().expect("validated curve")
    }

    /// The `2n` passes through double points in traversal order, each as
    /// (position, double point id).
    pub fn visits(&self) -> Vec<(CurvePosition, usize)> {
        let mut v: Vec<(CurvePosition, usize)> = Vec::with_capacity(2 * self.double_points.len());
        for (id, dp) in self.double_points.iter().enumerate() {
            v.push((dp.first.clone(), id));
            v.push((dp.second.clone(), id));
        }
        v.sort_by(|a, b| a.0.cmp(&b.0));
        v
    }

    pub fn into_parts(self) -> (PolylineCurve, Vec<DoublePoint>) {
        (self.curve, self.double_points)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{rat, ratio};

    fn p(x: i64, y: i64) -> Point {
        Point::int(x, y)
    }

    fn square_ccw() -> PolylineCurve {
        PolylineCurve::new(vec![p(0, 0), p(4, 0), p(4, 4), p(0, 4)])
    }

    fn bowtie() -> PolylineCurve {
        PolylineCurve::new(vec![p(0, 0), p(4, 3), p(4, 0), p(0, 3)])
    }

    #[test]
    fn square_is_simple_with_turning_one() {
        let v = ValidatedCurve::validate(square_ccw()).unwrap();
        assert!(v.double_points().is_empty());
        assert_eq!(v.turning_number(), 1);
        let r = ValidatedCurve::validate(square_ccw().reversed()).unwrap();
        assert_eq!(r.turning_number(), -1);
    }

    #[test]
    fn bowtie_has_one_double_point_and_zero_turning() {
        let v = ValidatedCurve::validate(bowtie()).unwrap();
        assert_eq!(v.double_points().len(), 1);
        let dp = &v.double_points()[0];
        assert_eq!(dp.at, Point::new(rat(2), ratio(3, 2)));
        assert_eq!(dp.first, CurvePosition::new(0, ratio(1, 2)));
        assert_eq!(dp.second, CurvePosition::new(2, ratio(1, 2)));
        assert_eq!(v.turning_number(), 0);
    }

    #[test]
    fn winding_by_ray_cast() {
        let sq = square_ccw();
        assert_eq!(sq.point_winding(&p(2, 2)), Some(1));
        assert_eq!(sq.point_winding(&p(5, 2)), Some(0));
        assert_eq!(sq.point_winding(&p(2, 0)), None);
        assert_eq!(sq.reversed().point_winding(&p(2, 2)), Some(-1));

        let bt = bowtie();
        assert_eq!(bt.point_winding(&p(1, 1)), Some(1), "left lobe");
        assert_eq!(bt.point_winding(&p(3, 1)), Some(-1), "right lobe");
        assert_eq!(bt.point_winding(&p(2, 2)), Some(0), "above the waist");
    }

    #[test]
    fn winding_ray_through_vertex_is_exact() {
        // Diamond whose east vertex is level with the probe.
        let d = PolylineCurve::new(vec![p(2, 0), p(4, 2), p(2, 4), p(0, 2)]);
        assert_eq!(d.point_winding(&p(2, 2)), Some(1));
        assert_eq!(d.point_winding(&p(-1, 2)), Some(0));
        assert_eq!(d.point_winding(&p(5, 2)), Some(0));
    }

    #[test]
    fn rejects_degenerate_curves() {
        // Repeated vertex: edges 1 and 2 retrace each other.
        let spike = PolylineCurve::new(vec![p(0, 0), p(4, 0), p(2, 3), p(4, 0)]);
        assert!(matches!(
            ValidatedCurve::validate(spike),
            Err(GeometryError::EdgeReversal(_))
        ));

        // Vertex (4, 0) lies in the interior of the bottom edge.
        let touch = PolylineCurve::new(vec![p(0, 0), p(8, 0), p(8, 4), p(4, 0), p(0, 4)]);
        assert!(matches!(
            ValidatedCurve::validate(touch),
            Err(GeometryError::TangentialIntersection(..))
        ));

        let two = PolylineCurve::new(vec![p(0, 0), p(1, 1)]);
        assert!(matches!(
            ValidatedCurve::validate(two),
            Err(GeometryError::NotClosed(_))
        ));

        let collinear = PolylineCurve::new(vec![p(0, 0), p(8, 0), p(8, 4), p(6, 0), p(2, 0), p(0, 4)]);
        assert!(matches!(
            ValidatedCurve::validate(collinear),
            Err(GeometryError::TangentialIntersection(..))
        ));
    }

    #[test]
    fn rejects_triple_contact() {
        // Edges 0, 2 and 4 all pass through the origin.
        let star = PolylineCurve::new(vec![
            p(-4, -1),
            p(4, 1),
            p(4, -1),
            p(-4, 1),
            p(0, -4),
            p(0, 4),
        ]);
        match ValidatedCurve::validate(star) {
            Err(GeometryError::TripleOrHigherPoint(_)) => {}
            other => panic!("expected triple point rejection, got {other:?}"),
        }
    }

    #[test]
    fn east_hit_picks_nearest_piece_and_side() {
        let sq = square_ccw();
        match sq.first_hit_east(&p(1, 2)) {
            EastHit::Hit(h) => {
                assert_eq!(h.edge, 1);
                assert!(h.ascending, "interior sees the left of a rising edge");
            }
            other => panic!("{other:?}"),
        }
        match sq.first_hit_east(&Point::new(rat(-1), rat(2))) {
            EastHit::Hit(h) => {
                assert_eq!(h.edge, 3);
                assert!(!h.ascending);
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(sq.first_hit_east(&p(5, 2)), EastHit::Clear));
        assert!(matches!(sq.first_hit_east(&p(2, 0)), EastHit::OnCurve));
    }

    #[test]
    fn east_hit_through_a_crossing_takes_the_westward_branch_above() {
        // From inside the bowtie's left lobe, level with the waist: both
        // strands cross the ray at x = 2; the tilted ray meets edge 2
        // (heading up-left) first.
        let bt = bowtie();
        match bt.first_hit_east(&Point::new(rat(1), ratio(3, 2))) {
            EastHit::Hit(h) => {
                assert_eq!(h.edge, 2);
                assert!(h.ascending);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn visits_interleave_along_the_curve() {
        let v = ValidatedCurve::validate(bowtie()).unwrap();
        let visits = v.visits();
        assert_eq!(visits.len(), 2);
        assert_eq!(visits[0].1, 0);
        assert_eq!(visits[1].1, 0);
        assert!(visits[0].0 < visits[1].0);
    }

    #[test]
    fn transforms_preserve_and_flip_turning() {
        let sq = square_ccw();
        assert_eq!(sq.reflect_y().turning_number().unwrap(), -1);
        assert_eq!(sq.translate(&p(7, -3)).turning_number().unwrap(), 1);
        assert_eq!(sq.scale_uniform(&ratio(3, 5)).turning_number().unwrap(), 1);
    }
}
