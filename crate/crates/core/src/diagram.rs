//! Combinatorial curve diagrams.
//!
//! A diagram is the traversal sequence of crossings (two visits each) plus
//! a sign per crossing. That data determines the rotation system, so faces
//! can be traced, windings propagated from the designated outer face, and
//! crossing indices read off, with no geometry involved. Geometric curves
//! enter through [`CurveDiagram::from_geometry`], which also keeps enough
//! coordinate data ([`DiagramGeometry`]) to locate faces by point and to
//! render.
//!
//! Conventions, fixed once and used everywhere:
//! - Arc `k` runs from visit `k` to visit `k + 1` (cyclically); with no
//!   crossings there is a single arc 0.
//! - A crossing is `Plus` when the second pass crosses the first from
//!   right to left.
//! - Winding increases by one from the right side of a directed arc to
//!   its left side; the outer face has winding zero.

use crate::exact::{ccw_wedge_contains, Point, Rational};
use crate::geometry::{CurvePosition, EastHit, GeometryError, PolylineCurve, ValidatedCurve};
use num::traits::Signed;
use num::{One, Zero};
use std::collections::VecDeque;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DiagramError {
    #[error("label {0} appears {1} times, expected exactly 2")]
    BadMultiplicity(String, usize),
    #[error("malformed code: {0}")]
    BadCode(String),
    #[error("code is not realizable in the plane: traced {faces} faces, expected {expected}")]
    UnrealizableCode { faces: usize, expected: usize },
}

/// Crossing sign: `Plus` when the second visit crosses the first strand
/// from its right to its left.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

/// Side of a directed arc.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn flip(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Side::Left => 0,
            Side::Right => 1,
        }
    }
}

/// One of the four arc ends meeting at a crossing. `tail` is true when
/// the arc departs the crossing here.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct End {
    pub arc: usize,
    pub tail: bool,
}

/// Crossing with its rotation system and labels. `ends` lists the four
/// incident arc ends in counterclockwise order starting from the first
/// visit's outgoing end; `corner_faces[i]` is the face in the sector
/// between `ends[i]` and `ends[i + 1]`.
#[derive(Clone, Debug)]
pub struct Crossing {
    pub sign: Sign,
    pub first_visit: usize,
    pub second_visit: usize,
    pub ends: [End; 4],
    pub corner_faces: [usize; 4],
    pub index: i64,
}

/// Connected component of the complement, as a cyclic boundary of
/// (arc, side) items in trace order.
#[derive(Clone, Debug)]
pub struct Face {
    pub boundary: Vec<(usize, Side)>,
    pub winding: i64,
    pub is_outer: bool,
}

/// Oriented combinatorial diagram with labeled faces and crossings.
#[derive(Clone, Debug)]
pub struct CurveDiagram {
    visits: Vec<usize>,
    crossings: Vec<Crossing>,
    faces: Vec<Face>,
    arc_faces: Vec<[usize; 2]>,
    outer_face: usize,
}

impl CurveDiagram {
    /// Number of crossings.
    pub fn n(&self) -> usize {
        self.crossings.len()
    }

    pub fn arc_count(&self) -> usize {
        if self.visits.is_empty() {
            1
        } else {
            self.visits.len()
        }
    }

    pub fn visits(&self) -> &[usize] {
        &self.visits
    }

    pub fn crossings(&self) -> &[Crossing] {
        &self.crossings
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn outer_face(&self) -> usize {
        self.outer_face
    }

    pub fn arc_face(&self, arc: usize, side: Side) -> usize {
        self.arc_faces[arc][side.index()]
    }

    pub fn winding_multiset(&self) -> Vec<i64> {
        let mut v: Vec<i64> = self.faces.iter().map(|f| f.winding).collect();
        v.sort_unstable();
        v
    }

    pub fn index_multiset(&self) -> Vec<i64> {
        let mut v: Vec<i64> = self.crossings.iter().map(|c| c.index).collect();
        v.sort_unstable();
        v
    }

    /// Structural equality after canonical labeling: same traversal, same
    /// signs, same outer face.
    pub fn same_diagram(&self, other: &CurveDiagram) -> bool {
        self.visits == other.visits
            && self
                .crossings
                .iter()
                .zip(&other.crossings)
                .all(|(a, b)| a.sign == b.sign)
            && self.outer_face == other.outer_face
    }

    /// Build from traversal data. `visits` lists crossing ids (each id in
    /// `0..n` exactly twice) in traversal order; `outer_anchor` names an
    /// (arc, side) item bounding the unbounded face.
    pub fn from_parts(
        visits: Vec<usize>,
        signs: Vec<Sign>,
        outer_anchor: (usize, Side),
    ) -> Result<CurveDiagram, DiagramError> {
        if visits.len() % 2 != 0 {
            return Err(DiagramError::BadCode(format!(
                "odd number of visits ({})",
                visits.len()
            )));
        }
        let n = visits.len() / 2;
        if signs.len() != n {
            return Err(DiagramError::BadCode(format!(
                "{} signs for {} crossings",
                signs.len(),
                n
            )));
        }
        let mut count = vec![0usize; n];
        for &id in &visits {
            if id >= n {
                return Err(DiagramError::BadCode(format!("crossing id {id} out of range")));
            }
            count[id] += 1;
        }
        for (id, &c) in count.iter().enumerate() {
            if c != 2 {
                return Err(DiagramError::BadMultiplicity(format!("{id}"), c));
            }
        }

        // Canonical labels: crossing ids in order of first visit.
        let mut relabel = vec![usize::MAX; n];
        let mut next = 0usize;
        let mut new_visits = Vec::with_capacity(visits.len());
        let mut new_signs = vec![Sign::Plus; n];
        for &id in &visits {
            if relabel[id] == usize::MAX {
                relabel[id] = next;
                new_signs[next] = signs[id];
                next += 1;
            }
            new_visits.push(relabel[id]);
        }

        let arc_count = if n == 0 { 1 } else { 2 * n };
        let (anchor_arc, anchor_side) = outer_anchor;
        if anchor_arc >= arc_count {
            return Err(DiagramError::BadCode(format!(
                "outer marker arc {anchor_arc} out of range (diagram has {arc_count} arcs)"
            )));
        }

        // Rotation system per crossing.
        let mut first = vec![usize::MAX; n];
        let mut second = vec![usize::MAX; n];
        for (v, &id) in new_visits.iter().enumerate() {
            if first[id] == usize::MAX {
                first[id] = v;
            } else {
                second[id] = v;
            }
        }
        let mut proto: Vec<(Sign, usize, usize, [End; 4])> = Vec::with_capacity(n);
        for id in 0..n {
            let (f, s) = (first[id], second[id]);
            let out1 = End { arc: f, tail: true };
            let in1 = End {
                arc: (f + arc_count - 1) % arc_count,
                tail: false,
            };
            let out2 = End { arc: s, tail: true };
            let in2 = End {
                arc: (s + arc_count - 1) % arc_count,
                tail: false,
            };
            let ends = match new_signs[id] {
                Sign::Plus => [out1, out2, in1, in2],
                Sign::Minus => [out1, in2, in1, out2],
            };
            proto.push((new_signs[id], f, s, ends));
        }

        // Trace faces. Entering a crossing with the face on the left, the
        // boundary leaves along the next end clockwise.
        let mut item_face = vec![[usize::MAX; 2]; arc_count];
        let mut faces: Vec<Face> = Vec::new();
        for arc in 0..arc_count {
            for side in [Side::Left, Side::Right] {
                if item_face[arc][side.index()] != usize::MAX {
                    continue;
                }
                let face_id = faces.len();
                let mut boundary = Vec::new();
                let (mut a, mut s) = (arc, side);
                loop {
                    debug_assert_eq!(item_face[a][s.index()], usize::MAX);
                    item_face[a][s.index()] = face_id;
                    boundary.push((a, s));
                    if n == 0 {
                        break;
                    }
                    let (cid, end) = match s {
                        Side::Left => (new_visits[(a + 1) % arc_count], End { arc: a, tail: false }),
                        Side::Right => (new_visits[a], End { arc: a, tail: true }),
                    };
                    let ends = &proto[cid].3;
                    let slot = ends.iter().position(|e| *e == end).expect("end present");
                    let next = ends[(slot + 3) % 4];
                    let na = next.arc;
                    let ns = if next.tail { Side::Left } else { Side::Right };
                    if (na, ns) == (arc, side) {
                        break;
                    }
                    a = na;
                    s = ns;
                }
                faces.push(Face {
                    boundary,
                    winding: 0,
                    is_outer: false,
                });
            }
        }

        let expected = n + 2;
        if faces.len() != expected {
            return Err(DiagramError::UnrealizableCode {
                faces: faces.len(),
                expected,
            });
        }

        let arc_faces: Vec<[usize; 2]> = item_face;
        let outer_face = arc_faces[anchor_arc][anchor_side.index()];
        faces[outer_face].is_outer = true;

        // Windings: breadth-first from the outer face, +1 crossing any arc
        // right-to-left. Realizable rotation systems admit exactly one
        // labeling, so a conflict means the construction above is broken.
        let mut winding = vec![i64::MAX; faces.len()];
        winding[outer_face] = 0;
        let mut queue = VecDeque::from([outer_face]);
        while let Some(f) = queue.pop_front() {
            let w = winding[f];
            for &(a, s) in &faces[f].boundary {
                let (nb, nw) = match s {
                    Side::Left => (arc_faces[a][1], w - 1),
                    Side::Right => (arc_faces[a][0], w + 1),
                };
                if winding[nb] == i64::MAX {
                    winding[nb] = nw;
                    queue.push_back(nb);
                } else {
                    assert_eq!(winding[nb], nw, "winding propagation conflict");
                }
            }
        }
        for (f, w) in winding.iter().enumerate() {
            assert_ne!(*w, i64::MAX, "face {f} unreached by winding propagation");
            faces[f].winding = *w;
        }

        // Corner faces and indices.
        let mut crossings = Vec::with_capacity(n);
        for (sign, f, s, ends) in proto {
            let mut corner_faces = [0usize; 4];
            for i in 0..4 {
                let e = ends[(i + 1) % 4];
                let side = if e.tail { Side::Right } else { Side::Left };
                corner_faces[i] = arc_faces[e.arc][side.index()];
            }
            let mut ws: Vec<i64> = corner_faces.iter().map(|&cf| faces[cf].winding).collect();
            ws.sort_unstable();
            assert!(
                ws[1] == ws[0] + 1 && ws[2] == ws[0] + 1 && ws[3] == ws[0] + 2,
                "corner winding pattern violated: {ws:?}"
            );
            crossings.push(Crossing {
                sign,
                first_visit: f,
                second_visit: s,
                ends,
                corner_faces,
                index: ws[0] + 1,
            });
        }

        Ok(CurveDiagram {
            visits: new_visits,
            crossings,
            faces,
            arc_faces,
            outer_face,
        })
    }

    /// Trace a validated geometric curve into a diagram, keeping the
    /// geometric data needed for rendering and point location.
    pub fn from_geometry(vc: &ValidatedCurve) -> (CurveDiagram, DiagramGeometry) {
        let curve = vc.curve();
        let dps = vc.double_points();

        let ordered = vc.visits();
        let visit_positions: Vec<CurvePosition> = ordered.iter().map(|(p, _)| p.clone()).collect();
        let visit_ids: Vec<usize> = ordered.iter().map(|(_, id)| *id).collect();

        let signs: Vec<Sign> = dps
            .iter()
            .map(|dp| {
                let d1 = curve.edge_dir(dp.first.edge);
                let d2 = curve.edge_dir(dp.second.edge);
                let c = d1.cross(&d2);
                assert!(!num::traits::Zero::is_zero(&c), "transversal crossing");
                if c.is_positive() {
                    Sign::Plus
                } else {
                    Sign::Minus
                }
            })
            .collect();

        let geometry = DiagramGeometry::build(curve.clone(), visit_positions, dps);
        let anchor = geometry.outer_anchor();
        let diagram = CurveDiagram::from_parts(visit_ids, signs, anchor)
            .expect("geometric curve must trace to a planar diagram");
        (diagram, geometry)
    }

    /// Same curve traversed backwards: windings and indices negate, faces
    /// and crossings correspond.
    pub fn reverse(&self) -> CurveDiagram {
        let m = self.visits.len();
        let visits: Vec<usize> = (0..m).map(|k| self.visits[m - 1 - k]).collect();
        // Both strands reverse, so every crossing sign flips. Labels are
        // re-canonicalized by from_parts.
        let signs: Vec<Sign> = self.crossings.iter().map(|c| c.sign.flip()).collect();
        let (a, s) = self.faces[self.outer_face].boundary[0];
        let arc_count = self.arc_count() as i64;
        let anchor_arc = (2 * (arc_count) - 2 - a as i64).rem_euclid(arc_count) as usize;
        let anchor = if m == 0 {
            (0, s.flip())
        } else {
            (anchor_arc, s.flip())
        };
        CurveDiagram::from_parts(visits, signs, anchor).expect("reversal preserves realizability")
    }

    /// Canonical code: labels in first-visit order, outer marker on the
    /// lowest-numbered arc bounding the outer face (plain form preferred).
    pub fn code(&self) -> GaussCode {
        let entries = self
            .visits
            .iter()
            .map(|&id| (id as u64 + 1, self.crossings[id].sign))
            .collect();
        for arc in 0..self.arc_count() {
            if self.arc_faces[arc][Side::Right.index()] == self.outer_face {
                return GaussCode {
                    entries,
                    outer_arc: arc,
                    outer_side: Side::Right,
                };
            }
        }
        for arc in 0..self.arc_count() {
            if self.arc_faces[arc][Side::Left.index()] == self.outer_face {
                return GaussCode {
                    entries,
                    outer_arc: arc,
                    outer_side: Side::Left,
                };
            }
        }
        unreachable!("outer face has no boundary")
    }

    pub fn from_code(code: &GaussCode) -> Result<CurveDiagram, DiagramError> {
        let mut ids: Vec<u64> = Vec::new();
        let mut visits = Vec::with_capacity(code.entries.len());
        let mut signs: Vec<Sign> = Vec::new();
        for &(label, sign) in &code.entries {
            let id = match ids.iter().position(|&l| l == label) {
                Some(i) => {
                    if signs[i] != sign {
                        return Err(DiagramError::BadCode(format!(
                            "label {label} carries both signs"
                        )));
                    }
                    i
                }
                None => {
                    ids.push(label);
                    signs.push(sign);
                    ids.len() - 1
                }
            };
            visits.push(id);
        }
        for (i, &label) in ids.iter().enumerate() {
            let c = visits.iter().filter(|&&v| v == i).count();
            if c != 2 {
                return Err(DiagramError::BadMultiplicity(label.to_string(), c));
            }
        }
        CurveDiagram::from_parts(visits, signs, (code.outer_arc, code.outer_side))
    }
}

/// Gauss code: the traversal as signed labels plus the outer-face marker.
///
/// Text form: whitespace-separated `LABEL+`/`LABEL-` entries followed by
/// `@k` (outer face lies on the right of arc `k`) or `@k~` (on its left).
/// A simple loop has no entries, only the marker.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GaussCode {
    pub entries: Vec<(u64, Sign)>,
    pub outer_arc: usize,
    pub outer_side: Side,
}

impl fmt::Display for GaussCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (label, sign) in &self.entries {
            write!(f, "{}{} ", label, sign.as_char())?;
        }
        write!(f, "@{}", self.outer_arc)?;
        if self.outer_side == Side::Left {
            write!(f, "~")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for GaussCode {
    type Err = DiagramError;

    fn from_str(text: &str) -> Result<GaussCode, DiagramError> {
        let mut entries = Vec::new();
        let mut outer: Option<(usize, Side)> = None;
        for tok in text.split_whitespace() {
            if let Some(rest) = tok.strip_prefix('@') {
                if outer.is_some() {
                    return Err(DiagramError::BadCode("duplicate outer marker".into()));
                }
                let (num, side) = match rest.strip_suffix('~') {
                    Some(num) => (num, Side::Left),
                    None => (rest, Side::Right),
                };
                let arc: usize = num
                    .parse()
                    .map_err(|_| DiagramError::BadCode(format!("bad outer marker {tok:?}")))?;
                outer = Some((arc, side));
                continue;
            }
            if outer.is_some() {
                return Err(DiagramError::BadCode(
                    "entries after the outer marker".into(),
                ));
            }
            let (num, sign) = if let Some(num) = tok.strip_suffix('+') {
                (num, Sign::Plus)
            } else if let Some(num) = tok.strip_suffix('-') {
                (num, Sign::Minus)
            } else {
                return Err(DiagramError::BadCode(format!(
                    "entry {tok:?} must end in + or -"
                )));
            };
            let label: u64 = num
                .parse()
                .map_err(|_| DiagramError::BadCode(format!("bad label {tok:?}")))?;
            entries.push((label, sign));
        }
        let (outer_arc, outer_side) =
            outer.ok_or_else(|| DiagramError::BadCode("missing outer marker @k".into()))?;
        Ok(GaussCode {
            entries,
            outer_arc,
            outer_side,
        })
    }
}

/// Which arc to report for a position that coincides with a crossing
/// visit: the arc departing it or the arc arriving at it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VisitBias {
    Later,
    Earlier,
}

/// Coordinate data retained alongside a traced diagram.
#[derive(Clone, Debug)]
pub struct DiagramGeometry {
    curve: PolylineCurve,
    visit_positions: Vec<CurvePosition>,
    crossing_points: Vec<Point>,
}

impl DiagramGeometry {
    fn build(
        curve: PolylineCurve,
        visit_positions: Vec<CurvePosition>,
        dps: &[crate::geometry::DoublePoint],
    ) -> DiagramGeometry {
        let crossing_points = dps.iter().map(|dp| dp.at.clone()).collect();
        DiagramGeometry {
            curve,
            visit_positions,
            crossing_points,
        }
    }

    pub fn curve(&self) -> &PolylineCurve {
        &self.curve
    }

    pub fn crossing_points(&self) -> &[Point] {
        &self.crossing_points
    }

    pub fn arc_count(&self) -> usize {
        if self.visit_positions.is_empty() {
            1
        } else {
            self.visit_positions.len()
        }
    }

    /// Arc containing `pos`. Positions exactly at a crossing belong to
    /// two arcs; `bias` picks one.
    pub fn arc_at(&self, pos: &CurvePosition, bias: VisitBias) -> usize {
        let m = self.visit_positions.len();
        if m == 0 {
            return 0;
        }
        let k = match bias {
            VisitBias::Later => self.visit_positions.partition_point(|v| v <= pos),
            VisitBias::Earlier => self.visit_positions.partition_point(|v| v < pos),
        };
        (k + m - 1) % m
    }

    /// Polyline of arc `k`, endpoints included.
    pub fn arc_path(&self, k: usize) -> Vec<Point> {
        let m = self.visit_positions.len();
        let verts = &self.curve.vertices;
        let len = verts.len();
        if m == 0 {
            let mut pts = verts.clone();
            pts.push(verts[0].clone());
            return pts;
        }
        let start = &self.visit_positions[k];
        let end = &self.visit_positions[(k + 1) % m];
        let mut pts = vec![self.curve.point_at(start)];
        let mut e = (start.edge + 1) % len;
        // Walk vertex by vertex until reaching the edge holding `end`.
        // `end` on the same edge as `start` with a larger parameter means
        // an empty vertex run.
        if !(start.edge == end.edge && start.t < end.t) {
            loop {
                pts.push(verts[e].clone());
                if e == end.edge {
                    break;
                }
                e = (e + 1) % len;
            }
        }
        pts.push(self.curve.point_at(end));
        pts
    }

    /// Arc `k` as maximal straight pieces `(edge, t_from, t_to)` with
    /// `t_from < t_to`. Pieces whose parameter range collapses are dropped,
    /// so every piece has positive length.
    pub fn arc_pieces(&self, k: usize) -> Vec<(usize, Rational, Rational)> {
        let m = self.visit_positions.len();
        let len = self.curve.len();
        let zero = Rational::zero();
        let one = Rational::one();
        let mut pieces = Vec::new();
        if m == 0 {
            for e in 0..len {
                pieces.push((e, zero.clone(), one.clone()));
            }
            return pieces;
        }
        let start = &self.visit_positions[k];
        let end = &self.visit_positions[(k + 1) % m];
        if start.edge == end.edge && start.t < end.t {
            pieces.push((start.edge, start.t.clone(), end.t.clone()));
            return pieces;
        }
        if start.t < one {
            pieces.push((start.edge, start.t.clone(), one.clone()));
        }
        let mut e = (start.edge + 1) % len;
        while e != end.edge {
            pieces.push((e, zero.clone(), one.clone()));
            e = (e + 1) % len;
        }
        if end.t > zero {
            pieces.push((end.edge, zero, end.t.clone()));
        }
        pieces
    }

    /// Anchor item for the unbounded face: at the smallest vertex in
    /// (x, y) order nothing lies further west, so the outer face occupies
    /// the west direction there.
    fn outer_anchor(&self) -> (usize, Side) {
        let verts = &self.curve.vertices;
        let len = verts.len();
        let v_idx = (0..len).min_by(|&a, &b| verts[a].cmp(&verts[b])).unwrap();
        let d_prev = self.curve.edge_dir((v_idx + len - 1) % len);
        let d_next = self.curve.edge_dir(v_idx);
        let west = Point::int(-1, 0);
        let side = if ccw_wedge_contains(&d_next, &d_prev.neg(), &west) {
            Side::Left
        } else {
            Side::Right
        };
        let pos = CurvePosition::new(v_idx, Rational::from_integer(0.into()));
        (self.arc_at(&pos, VisitBias::Later), side)
    }

    /// Face of `diag` containing `p`.
    pub fn locate_face(&self, diag: &CurveDiagram, p: &Point) -> Result<usize, GeometryError> {
        match self.curve.first_hit_east(p) {
            EastHit::OnCurve => Err(GeometryError::PointOnCurve),
            EastHit::Clear => Ok(diag.outer_face()),
            EastHit::Hit(h) => {
                let pos = CurvePosition::new(h.edge, h.t);
                let (bias, side) = if h.ascending {
                    (VisitBias::Later, Side::Left)
                } else {
                    (VisitBias::Earlier, Side::Right)
                };
                Ok(diag.arc_face(self.arc_at(&pos, bias), side))
            }
        }
    }

    /// Interior point of the given face, found by stepping off the
    /// midpoint of a boundary segment and shrinking the step until the
    /// point locates back to the face.
    pub fn sample_point_in_face(&self, diag: &CurveDiagram, face: usize) -> Option<Point> {
        let &(arc, side) = diag.faces()[face].boundary.first()?;
        let path = self.arc_path(arc);
        let mut best: Option<(Rational, Point, Point)> = None;
        for w in path.windows(2) {
            let d = w[1].sub(&w[0]);
            let l = d.dot(&d);
            if best.as_ref().map_or(true, |(bl, _, _)| l > *bl) {
                let two = Rational::from_integer(2.into());
                let mid = w[0].add(&w[1]).scale(&two.recip());
                best = Some((l, mid, d));
            }
        }
        let (_, mid, d) = best?;
        let normal = match side {
            Side::Left => d.perp(),
            Side::Right => d.perp().neg(),
        };
        // Normalize by the max coordinate so the first step has size ~1.
        let m = normal.x.abs().max(normal.y.abs());
        let unit = normal.scale(&m.recip());
        let mut step = Rational::from_integer(1.into());
        let half = Rational::new(1.into(), 2.into());
        for _ in 0..128 {
            let candidate = mid.add(&unit.scale(&step));
            if let Ok(found) = self.locate_face(diag, &candidate) {
                if found == face {
                    return Some(candidate);
                }
            }
            step *= &half;
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: i64, y: i64) -> Point {
        Point::int(x, y)
    }

    fn traced(verts: Vec<Point>) -> (CurveDiagram, DiagramGeometry) {
        let vc = ValidatedCurve::validate(PolylineCurve::new(verts)).unwrap();
        CurveDiagram::from_geometry(&vc)
    }

    fn bowtie() -> (CurveDiagram, DiagramGeometry) {
        traced(vec![p(0, 0), p(4, 3), p(4, 0), p(0, 3)])
    }

    #[test]
    fn loop_codes_give_two_faces() {
        let ccw: GaussCode = "@0".parse().unwrap();
        let d = CurveDiagram::from_code(&ccw).unwrap();
        assert_eq!(d.n(), 0);
        assert_eq!(d.faces().len(), 2);
        assert_eq!(d.winding_multiset(), vec![0, 1]);
        assert_eq!(d.faces()[d.outer_face()].winding, 0);

        let cw: GaussCode = "@0~".parse().unwrap();
        let d = CurveDiagram::from_code(&cw).unwrap();
        assert_eq!(d.winding_multiset(), vec![-1, 0]);
    }

    #[test]
    fn traced_square_matches_loop_code() {
        let (d, _) = traced(vec![p(0, 0), p(4, 0), p(4, 4), p(0, 4)]);
        assert_eq!(d.n(), 0);
        assert_eq!(d.winding_multiset(), vec![0, 1]);
        assert_eq!(d.code().to_string(), "@0");

        let (d, _) = traced(vec![p(0, 4), p(4, 4), p(4, 0), p(0, 0)]);
        assert_eq!(d.winding_multiset(), vec![-1, 0]);
        assert_eq!(d.code().to_string(), "@0~");
    }

    #[test]
    fn bowtie_diagram_labels() {
        let (d, _) = bowtie();
        assert_eq!(d.n(), 1);
        assert_eq!(d.faces().len(), 3);
        assert_eq!(d.winding_multiset(), vec![-1, 0, 1]);
        assert_eq!(d.index_multiset(), vec![0]);
        assert_eq!(d.crossings()[0].sign, Sign::Plus);
        assert_eq!(d.faces()[d.outer_face()].boundary.len(), 2);
        assert_eq!(d.code().to_string(), "1+ 1+ @1");
    }

    #[test]
    fn faces_carry_the_ray_cast_winding() {
        for (d, g) in [
            bowtie(),
            traced(vec![p(0, 0), p(4, 0), p(4, 4), p(0, 4)]),
            traced(vec![p(2, 0), p(4, 2), p(2, 4), p(0, 2)]),
        ] {
            for f in 0..d.faces().len() {
                let sample = g.sample_point_in_face(&d, f).expect("sample point");
                assert_eq!(
                    g.curve().point_winding(&sample),
                    Some(d.faces()[f].winding),
                    "face {f}"
                );
            }
        }
    }

    #[test]
    fn locate_face_by_point() {
        let (d, g) = bowtie();
        let left = g.locate_face(&d, &p(1, 1)).unwrap();
        assert_eq!(d.faces()[left].winding, 1);
        let right = g.locate_face(&d, &p(3, 1)).unwrap();
        assert_eq!(d.faces()[right].winding, -1);
        let out = g.locate_face(&d, &p(-5, 0)).unwrap();
        assert_eq!(out, d.outer_face());
        assert!(g.locate_face(&d, &p(0, 0)).is_err());
    }

    #[test]
    fn code_round_trip() {
        let (d, _) = bowtie();
        let text = d.code().to_string();
        let back = CurveDiagram::from_code(&text.parse().unwrap()).unwrap();
        assert!(d.same_diagram(&back));
        assert_eq!(back.code().to_string(), text);
    }

    #[test]
    fn reversal_negates_windings_and_is_involutive() {
        let (d, _) = bowtie();
        let r = d.reverse();
        assert_eq!(r.winding_multiset(), vec![-1, 0, 1]);
        assert!(d.same_diagram(&r.reverse()));

        let (sq, _) = traced(vec![p(0, 0), p(4, 0), p(4, 4), p(0, 4)]);
        assert_eq!(sq.reverse().winding_multiset(), vec![-1, 0]);
        assert!(sq.same_diagram(&sq.reverse().reverse()));
    }

    #[test]
    fn reversal_matches_reversed_geometry() {
        let curves = vec![
            vec![p(0, 0), p(4, 3), p(4, 0), p(0, 3)],
            vec![p(0, 0), p(4, 0), p(4, 4), p(0, 4)],
        ];
        for verts in curves {
            let (d, _) = traced(verts.clone());
            let mut rev = verts;
            rev.reverse();
            let (rd, _) = traced(rev);
            assert!(d.reverse().same_diagram(&rd));
        }
    }

    #[test]
    fn interleaved_same_sign_code_is_unrealizable() {
        let code: GaussCode = "1+ 2+ 1+ 2+ @0".parse().unwrap();
        match CurveDiagram::from_code(&code) {
            Err(DiagramError::UnrealizableCode { faces: 2, expected: 4 }) => {}
            other => panic!("expected unrealizable, got {other:?}"),
        }
    }

    #[test]
    fn malformed_codes_are_rejected() {
        let once: GaussCode = "1+ 2+ 1+ @0".parse().unwrap();
        assert!(matches!(
            CurveDiagram::from_code(&once),
            Err(DiagramError::BadCode(_)) | Err(DiagramError::BadMultiplicity(..))
        ));

        let mixed: GaussCode = "1+ 1- @0".parse().unwrap();
        assert!(matches!(
            CurveDiagram::from_code(&mixed),
            Err(DiagramError::BadCode(_))
        ));

        assert!("1* @0".parse::<GaussCode>().is_err());
        assert!("1+ 1+".parse::<GaussCode>().is_err());
        assert!("1+ 1+ @9".parse::<GaussCode>().is_ok_and(|c| {
            matches!(
                CurveDiagram::from_code(&c),
                Err(DiagramError::BadCode(_))
            )
        }));
    }

    #[test]
    fn arc_paths_partition_the_curve() {
        let (d, g) = bowtie();
        assert_eq!(d.arc_count(), 2);
        let p0 = g.arc_path(0);
        let p1 = g.arc_path(1);
        // Both arcs start and end at the single crossing.
        assert_eq!(p0.first(), p1.last());
        assert_eq!(p0.last(), p1.first());
        // Right lobe via (4,3), (4,0); left lobe via (0,3), (0,0).
        assert_eq!(p0.len(), 4);
        assert_eq!(p1.len(), 4);
        assert!(p0.contains(&p(4, 3)) && p0.contains(&p(4, 0)));
        assert!(p1.contains(&p(0, 3)) && p1.contains(&p(0, 0)));
    }

    #[test]
    fn visit_bias_resolves_positions_at_crossings() {
        let (_, g) = bowtie();
        let at = CurvePosition::new(0, num::rational::Ratio::new(1.into(), 2.into()));
        assert_eq!(g.arc_at(&at, VisitBias::Later), 0);
        assert_eq!(g.arc_at(&at, VisitBias::Earlier), 1);
        let before = CurvePosition::new(0, num::rational::Ratio::new(1.into(), 4.into()));
        assert_eq!(g.arc_at(&before, VisitBias::Later), 1);
    }

    #[test]
    fn code_text_round_trip() {
        for text in ["@0", "@0~", "1+ 1+ @1", "1+ 2- 2- 1+ @0~"] {
            let code: GaussCode = text.parse().unwrap();
            assert_eq!(code.to_string(), text);
        }
    }

    #[test]
    fn rebuilt_from_parts_equals_traced(){
        let (d, _) = bowtie();
        let rebuilt = CurveDiagram::from_parts(
            d.visits().to_vec(),
            d.crossings().iter().map(|c| c.sign).collect(),
            (1, Side::Right),
        )
        .unwrap();
        assert!(d.same_diagram(&rebuilt));
    }
}
