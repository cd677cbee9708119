//! Local rearrangements of a diagram: self-tangencies and triple points.
//!
//! A positive tangency pushes two boundary stretches of one face against
//! each other and through, adding two crossings of opposite sign. A
//! negative tangency pulls the two sides of a lens apart, deleting its
//! corner crossings. A triple point slides the three sides of a triangle
//! face across each other. Direct moves (touching strands parallel) change
//! the value by plus or minus two; inverse and triple moves leave it fixed;
//! every move preserves the turning number. [`apply_move`] recomputes both
//! quantities from scratch and panics if the ledger disagrees.
//!
//! Not every two-sided face is a lens: standard curves have outer faces
//! with two boundary items whose corners are distinct loop crossings, and
//! pulling those apart is no tangency at all. Collapse and triangle sites
//! are therefore verified by performing the rearrangement and checking the
//! value and turning laws; item counts alone do not make a site legal.

use crate::diagram::{CurveDiagram, Side, Sign};
use crate::invariants;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MoveError {
    #[error("illegal move site: {0}")]
    IllegalSite(String),
}

/// A legal move location. Tangency positions index into the boundary item
/// list of the named face; a repeated position folds one stretch of the
/// boundary against itself, which is always an inverse contact.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MoveSite {
    /// Two parallel stretches of `face` touch and cross. Adds two
    /// crossings and raises the value by two.
    DirectTangencyPositive { face: usize, first: usize, second: usize },
    /// Two antiparallel stretches of `face` touch and cross. Adds two
    /// crossings and keeps the value.
    InverseTangencyPositive { face: usize, first: usize, second: usize },
    /// The parallel sides of the lens `face` pull apart. Deletes the two
    /// corner crossings and lowers the value by two.
    DirectTangencyNegative { face: usize },
    /// The antiparallel sides of the lens `face` pull apart. Deletes the
    /// two corner crossings and keeps the value.
    InverseTangencyNegative { face: usize },
    /// The triangle `face` flips across its three sides. `case` is one
    /// plus the number of boundary items facing the triangle from the
    /// left, naming the four orientation patterns.
    TriplePoint { face: usize, case: u8 },
}

impl MoveSite {
    pub fn face(&self) -> usize {
        match *self {
            MoveSite::DirectTangencyPositive { face, .. }
            | MoveSite::InverseTangencyPositive { face, .. }
            | MoveSite::DirectTangencyNegative { face }
            | MoveSite::InverseTangencyNegative { face }
            | MoveSite::TriplePoint { face, .. } => face,
        }
    }

    /// Value shift the move produces.
    pub fn predicted_delta(&self) -> i64 {
        match self {
            MoveSite::DirectTangencyPositive { .. } => 2,
            MoveSite::DirectTangencyNegative { .. } => -2,
            _ => 0,
        }
    }

    /// Whether applying the move adds two crossings.
    pub fn adds_crossings(&self) -> bool {
        matches!(
            self,
            MoveSite::DirectTangencyPositive { .. } | MoveSite::InverseTangencyPositive { .. }
        )
    }

    pub fn is_direct(&self) -> bool {
        matches!(
            self,
            MoveSite::DirectTangencyPositive { .. } | MoveSite::DirectTangencyNegative { .. }
        )
    }

    pub fn is_triple(&self) -> bool {
        matches!(self, MoveSite::TriplePoint { .. })
    }
}

/// Crossing the boundary walk reaches after the item `(arc, side)`. Left
/// items are walked forward to the arc head, right items backward to the
/// arc tail.
fn corner_after(d: &CurveDiagram, arc: usize, side: Side) -> usize {
    let m = d.visits().len();
    match side {
        Side::Left => d.visits()[(arc + 1) % m],
        Side::Right => d.visits()[arc],
    }
}

/// Every legal move on `d`, in a fixed order: tangency contacts by face
/// and position pair, then lens collapses by face, then triangle flips by
/// face.
pub fn enumerate_moves(d: &CurveDiagram) -> Vec<MoveSite> {
    let mut sites = Vec::new();
    for (fi, f) in d.faces().iter().enumerate() {
        let items = &f.boundary;
        for i in 0..items.len() {
            for j in i..items.len() {
                if i != j && items[i].1 != items[j].1 {
                    sites.push(MoveSite::DirectTangencyPositive { face: fi, first: i, second: j });
                } else {
                    sites.push(MoveSite::InverseTangencyPositive { face: fi, first: i, second: j });
                }
            }
        }
    }
    for fi in 0..d.faces().len() {
        if let Some((_, direct)) = collapse_outcome(d, fi) {
            if direct {
                sites.push(MoveSite::DirectTangencyNegative { face: fi });
            } else {
                sites.push(MoveSite::InverseTangencyNegative { face: fi });
            }
        }
    }
    for fi in 0..d.faces().len() {
        if let Some((_, case)) = triangle_outcome(d, fi) {
            sites.push(MoveSite::TriplePoint { face: fi, case });
        }
    }
    sites
}

/// Apply `site` to `d`, returning the rearranged diagram and the value
/// shift. The site must come from [`enumerate_moves`] on this diagram.
pub fn apply_move(d: &CurveDiagram, site: MoveSite) -> Result<(CurveDiagram, i64), MoveError> {
    let out = match site {
        MoveSite::DirectTangencyPositive { face, first, second } => {
            apply_tangency(d, face, first, second, true)?
        }
        MoveSite::InverseTangencyPositive { face, first, second } => {
            apply_tangency(d, face, first, second, false)?
        }
        MoveSite::DirectTangencyNegative { face } => apply_collapse(d, face, true)?,
        MoveSite::InverseTangencyNegative { face } => apply_collapse(d, face, false)?,
        MoveSite::TriplePoint { face, case } => apply_triangle(d, face, case)?,
    };
    let delta = site.predicted_delta();
    assert_eq!(
        invariants::jplus(&out),
        invariants::jplus(d) + delta,
        "move ledger diverged from recomputed value"
    );
    assert_eq!(
        invariants::rotation(&out),
        invariants::rotation(d),
        "move changed the turning number"
    );
    Ok((out, delta))
}

/// Crossing signs for a new contact pair. `se` is the side from which the
/// stretch inserted first faces the contact face; the second crossing of
/// the pair always takes the opposite sign.
fn pair_signs(se: Side, direct: bool) -> (Sign, Sign) {
    let x = match (se, direct) {
        (Side::Left, true) => Sign::Minus,
        (Side::Left, false) => Sign::Plus,
        (Side::Right, true) => Sign::Plus,
        (Side::Right, false) => Sign::Minus,
    };
    (x, x.flip())
}

fn apply_tangency(
    d: &CurveDiagram,
    face: usize,
    first: usize,
    second: usize,
    direct: bool,
) -> Result<CurveDiagram, MoveError> {
    let f = d
        .faces()
        .get(face)
        .ok_or_else(|| MoveError::IllegalSite(format!("no face {face}")))?;
    let len = f.boundary.len();
    if first > second || second >= len {
        return Err(MoveError::IllegalSite(format!(
            "positions ({first}, {second}) out of range for a face with {len} items"
        )));
    }
    let (a1, s1) = f.boundary[first];
    let (a2, s2) = f.boundary[second];
    if direct != (first != second && s1 != s2) {
        return Err(MoveError::IllegalSite(
            "contact class does not match the strand orientations".into(),
        ));
    }

    let m = d.visits().len();
    let x = d.n();
    let y = x + 1;
    // One stretch splits around an [x .. y] pair, the other around [x .. y]
    // when parallel and [y .. x] when antiparallel. New visits for arc k go
    // at index k + 1; the pair at the smaller index is inserted first along
    // the traversal and receives the sign from `pair_signs`.
    let (earlier, se) = if first == second || a1 <= a2 { (a1, s1) } else { (a2, s2) };
    let mut plan: Vec<(usize, Vec<usize>)> = if first == second {
        vec![(if m == 0 { 0 } else { a1 + 1 }, vec![x, y, y, x])]
    } else if a1 == a2 {
        vec![(a1 + 1, vec![x, y, x, y])]
    } else {
        let later = if a1 <= a2 { a2 } else { a1 };
        vec![
            (earlier + 1, vec![x, y]),
            (later + 1, if direct { vec![x, y] } else { vec![y, x] }),
        ]
    };
    plan.sort_by(|p, q| q.0.cmp(&p.0));

    let mut new_visits = d.visits().to_vec();
    for (slot, ids) in &plan {
        new_visits.splice(*slot..*slot, ids.iter().copied());
    }
    let mut signs: Vec<Sign> = d.crossings().iter().map(|c| c.sign).collect();
    let (sx, sy) = pair_signs(se, direct);
    signs.push(sx);
    signs.push(sy);

    // The outer face keeps its side of the marker material; only the arc
    // index shifts, by the entries inserted at earlier slots.
    let (m0, s0) = d.faces()[d.outer_face()].boundary[0];
    let anchor_arc = if m == 0 {
        new_visits.len() - 1
    } else {
        m0 + plan
            .iter()
            .filter(|(slot, _)| *slot <= m0)
            .map(|(_, ids)| ids.len())
            .sum::<usize>()
    };

    Ok(CurveDiagram::from_parts(new_visits, signs, (anchor_arc, s0))
        .expect("a tangency across one face keeps the diagram realizable"))
}

/// Lens `face` pulled apart, with its contact class, or `None` when the
/// face is not a detachable lens.
fn collapse_outcome(d: &CurveDiagram, face: usize) -> Option<(CurveDiagram, bool)> {
    let f = &d.faces()[face];
    if f.boundary.len() != 2 {
        return None;
    }
    let (r, sr) = f.boundary[0];
    let (t, st) = f.boundary[1];
    let c1 = corner_after(d, r, sr);
    let c2 = corner_after(d, t, st);
    if c1 == c2 {
        return None;
    }
    // A contact pair carries opposite signs; equal-signed corners mean the
    // two-sided face wraps loops instead of bounding a contact disc.
    if d.crossings()[c1].sign == d.crossings()[c2].sign {
        return None;
    }

    let remap = |id: usize| id - (id > c1) as usize - (id > c2) as usize;
    let new_visits: Vec<usize> = d
        .visits()
        .iter()
        .filter(|&&id| id != c1 && id != c2)
        .map(|&id| remap(id))
        .collect();
    let signs: Vec<Sign> = d
        .crossings()
        .iter()
        .enumerate()
        .filter(|&(id, _)| id != c1 && id != c2)
        .map(|(_, c)| c.sign)
        .collect();
    let anchor = removal_anchor(d, face, c1, c2)?;
    let out = CurveDiagram::from_parts(new_visits, signs, anchor).ok()?;

    let direct = sr != st;
    let delta = if direct { -2 } else { 0 };
    if invariants::jplus(&out) != invariants::jplus(d) + delta
        || invariants::rotation(&out) != invariants::rotation(d)
    {
        return None;
    }
    Some((out, direct))
}

/// Outer marker after deleting crossings `c1` and `c2` by collapsing
/// `face`. The lens sides are the strands that move, so the marker must
/// sit on other material; every face the collapse merges borders the new
/// unbounded region, and a stationary arc keeps its side toward it. The
/// merged gap index is the count of surviving visits up to the old arc.
fn removal_anchor(d: &CurveDiagram, face: usize, c1: usize, c2: usize) -> Option<(usize, Side)> {
    let f = &d.faces()[face];
    let (r, sr) = f.boundary[0];
    let (t, st) = f.boundary[1];
    let merged = [
        d.outer_face(),
        d.arc_face(r, sr.flip()),
        d.arc_face(t, st.flip()),
    ];
    let (m0, s0) = merged
        .iter()
        .flat_map(|&fi| d.faces()[fi].boundary.iter())
        .find(|(a, _)| *a != r && *a != t)
        .copied()?;
    let survivors = d.visits().len() - 4;
    if survivors == 0 {
        return Some((0, s0));
    }
    let kept = d.visits()[..=m0]
        .iter()
        .filter(|&&id| id != c1 && id != c2)
        .count();
    let arc = if kept == 0 { survivors - 1 } else { kept - 1 };
    Some((arc, s0))
}

fn apply_collapse(d: &CurveDiagram, face: usize, direct: bool) -> Result<CurveDiagram, MoveError> {
    if face >= d.faces().len() {
        return Err(MoveError::IllegalSite(format!("no face {face}")));
    }
    match collapse_outcome(d, face) {
        Some((out, dir)) if dir == direct => Ok(out),
        Some(_) => Err(MoveError::IllegalSite(
            "contact class does not match the strand orientations".into(),
        )),
        None => Err(MoveError::IllegalSite(format!(
            "face {face} is not a detachable lens"
        ))),
    }
}

/// Triangle `face` flipped across its sides, with its orientation case, or
/// `None` when the face is not a slide triangle.
fn triangle_outcome(d: &CurveDiagram, face: usize) -> Option<(CurveDiagram, u8)> {
    let f = &d.faces()[face];
    if f.boundary.len() != 3 {
        return None;
    }
    let m = d.visits().len();
    let mut corners = [0usize; 3];
    for (k, &(a, s)) in f.boundary.iter().enumerate() {
        corners[k] = corner_after(d, a, s);
    }
    if corners[0] == corners[1] || corners[0] == corners[2] || corners[1] == corners[2] {
        return None;
    }
    // Sliding swaps the two endpoint visits of each side. The six slots
    // must be distinct or the sides pinch through a shared crossing.
    let mut slots = Vec::with_capacity(6);
    for &(a, _) in &f.boundary {
        slots.push(a);
        slots.push((a + 1) % m);
    }
    let mut sorted = slots.clone();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != 6 {
        return None;
    }

    let mut new_visits = d.visits().to_vec();
    for &(a, _) in &f.boundary {
        new_visits.swap(a, (a + 1) % m);
    }
    let tau = |slot: usize| -> usize {
        for &(a, _) in &f.boundary {
            if slot == a {
                return (a + 1) % m;
            }
            if slot == (a + 1) % m {
                return a;
            }
        }
        slot
    };
    // A corner whose passages change linear order keeps its handedness but
    // flips its stored first-passage sign.
    let mut signs: Vec<Sign> = d.crossings().iter().map(|c| c.sign).collect();
    for &c in &corners {
        let cr = &d.crossings()[c];
        if tau(cr.first_visit) > tau(cr.second_visit) {
            signs[c] = signs[c].flip();
        }
    }

    let side_arcs = [f.boundary[0].0, f.boundary[1].0, f.boundary[2].0];
    let anchor = if d.outer_face() == face {
        let (a0, s0) = f.boundary[0];
        (a0, s0.flip())
    } else {
        let outer = &d.faces()[d.outer_face()];
        *outer
            .boundary
            .iter()
            .find(|(a, _)| !side_arcs.contains(a))
            .unwrap_or(&outer.boundary[0])
    };
    let out = CurveDiagram::from_parts(new_visits, signs, anchor).ok()?;

    if invariants::jplus(&out) != invariants::jplus(d)
        || invariants::rotation(&out) != invariants::rotation(d)
    {
        return None;
    }
    let case = 1 + f.boundary.iter().filter(|(_, s)| *s == Side::Left).count() as u8;
    Some((out, case))
}

fn apply_triangle(d: &CurveDiagram, face: usize, case: u8) -> Result<CurveDiagram, MoveError> {
    if face >= d.faces().len() {
        return Err(MoveError::IllegalSite(format!("no face {face}")));
    }
    match triangle_outcome(d, face) {
        Some((out, c)) if c == case => Ok(out),
        Some((_, c)) => Err(MoveError::IllegalSite(format!(
            "triangle case is {c}, not {case}"
        ))),
        None => Err(MoveError::IllegalSite(format!(
            "face {face} is not a slide triangle"
        ))),
    }
}

/// Lens face created by a positive tangency: the face on the far side of
/// the first middle piece. `before` and `site` locate the contact,
/// `after` is the diagram [`apply_move`] returned.
pub fn created_lens(
    before: &CurveDiagram,
    site: MoveSite,
    after: &CurveDiagram,
) -> Option<usize> {
    let (face, first, second) = match site {
        MoveSite::DirectTangencyPositive { face, first, second }
        | MoveSite::InverseTangencyPositive { face, first, second } => (face, first, second),
        _ => return None,
    };
    let f = &before.faces()[face];
    let (a1, s1) = f.boundary[first];
    let (a2, s2) = f.boundary[second];
    let (ae, se) = if first == second || a1 <= a2 { (a1, s1) } else { (a2, s2) };
    let mid = if before.visits().is_empty() { 0 } else { ae + 1 };
    Some(after.arc_face(mid, se.flip()))
}

/// Crossing budget for randomized walks, from `JPLUS_MAX_CROSSINGS` when
/// set.
pub fn default_crossing_cap() -> usize {
    std::env::var("JPLUS_MAX_CROSSINGS")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(64)
}

/// Which moves a randomized walk may pick. Positive tangencies are also
/// skipped whenever they would push the crossing count past
/// `max_crossings`.
#[derive(Clone, Copy, Debug)]
pub struct WalkPolicy {
    pub max_crossings: usize,
    pub direct_tangencies: bool,
    pub inverse_tangencies: bool,
    pub triple_points: bool,
}

impl Default for WalkPolicy {
    fn default() -> Self {
        WalkPolicy {
            max_crossings: default_crossing_cap(),
            direct_tangencies: true,
            inverse_tangencies: true,
            triple_points: true,
        }
    }
}

impl WalkPolicy {
    fn admits(&self, site: &MoveSite, crossings: usize) -> bool {
        if site.adds_crossings() && crossings + 2 > self.max_crossings {
            return false;
        }
        match site {
            MoveSite::DirectTangencyPositive { .. } | MoveSite::DirectTangencyNegative { .. } => {
                self.direct_tangencies
            }
            MoveSite::InverseTangencyPositive { .. }
            | MoveSite::InverseTangencyNegative { .. } => self.inverse_tangencies,
            MoveSite::TriplePoint { .. } => self.triple_points,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub site: MoveSite,
    pub delta_jplus: i64,
    pub running_jplus: i64,
}

/// Record of a seeded walk. Replaying `steps` against `initial` with
/// [`apply_move`] reproduces `final_diagram`; the running column tracks
/// the value after each step.
#[derive(Clone, Debug)]
pub struct HomotopyTrace {
    pub seed: u64,
    pub initial: CurveDiagram,
    pub initial_jplus: i64,
    pub steps: Vec<TraceStep>,
    pub final_diagram: CurveDiagram,
}

impl HomotopyTrace {
    pub fn final_jplus(&self) -> i64 {
        self.steps
            .last()
            .map_or(self.initial_jplus, |s| s.running_jplus)
    }
}

pub fn random_homotopy(d: &CurveDiagram, steps: usize, seed: u64) -> HomotopyTrace {
    random_homotopy_with(d, steps, seed, WalkPolicy::default())
}

/// Walk `steps` uniformly random legal moves from `d`. Stops early when
/// the policy admits no move; each step picks uniformly among the admitted
/// sites of the current diagram.
pub fn random_homotopy_with(
    d: &CurveDiagram,
    steps: usize,
    seed: u64,
    policy: WalkPolicy,
) -> HomotopyTrace {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cur = d.clone();
    let initial_jplus = invariants::jplus(&cur);
    let mut running = initial_jplus;
    let mut trace = Vec::new();
    for _ in 0..steps {
        let sites: Vec<MoveSite> = enumerate_moves(&cur)
            .into_iter()
            .filter(|s| policy.admits(s, cur.n()))
            .collect();
        if sites.is_empty() {
            break;
        }
        let site = sites[rng.gen_range(0..sites.len())];
        let (next, delta) = apply_move(&cur, site).expect("enumerated site applies");
        running += delta;
        trace.push(TraceStep {
            site,
            delta_jplus: delta,
            running_jplus: running,
        });
        cur = next;
    }
    HomotopyTrace {
        seed,
        initial: d.clone(),
        initial_jplus,
        steps: trace,
        final_diagram: cur,
    }
}
