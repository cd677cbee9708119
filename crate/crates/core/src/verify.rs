//! Self-verification suite: every golden value and identity the library
//! claims, packaged as named checks.
//!
//! Each check is a pure function from a [`GoldenValues`] table to pass or
//! fail with detail. The table is injectable so a corrupted golden can be
//! used to drill the reporting path; the default table holds the true
//! values. Checks are independent and run on separate threads; a panic
//! inside a check (a violated internal identity) is caught and reported
//! as its own failure class so callers can distinguish it from a plain
//! value mismatch.

use crate::constructions::{
    add_interior_loop, connected_sum, curve_with_invariants, inner_loop_curve, interior_sum,
    single_and_double_loop_curve, standard_curve, tunnel_sum, ConnectMode, ConstructError,
};
use crate::diagram::{CurveDiagram, GaussCode, Side};
use crate::exact::{seg_seg, Point, SegSeg};
use crate::geometry::{find_intersections, CurvePosition, PolylineCurve, ValidatedCurve};
use crate::invariants::{self, InvariantReport};
use crate::io::{self, Ingested};
use crate::moves::{self, MoveSite, WalkPolicy};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;
use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};

/// Expected values the checks compare against. All fields are plain data
/// so a test can corrupt one entry and watch exactly one check fail.
#[derive(Clone, Debug)]
pub struct GoldenValues {
    /// `(turning number, expected value)` rows for the standard family.
    pub standard_rows: Vec<(i64, i64)>,
    pub worked_crossings: usize,
    pub worked_winding_square_sum: i64,
    pub worked_index_square_sum: i64,
    pub worked_jplus: i64,
    /// `(n, expected value)` rows for the nested family with `n + 1` turns.
    pub inner_loop_rows: Vec<(i64, i64)>,
    /// `(value, rotation)` of the deep crossing-junction fixture.
    pub deep_interior: (i64, i64),
    /// `(value, rotation)` of the same operands joined through a corridor.
    pub deep_tunnel: (i64, i64),
    pub circle_triple_loop: i64,
    pub touched_loops_value: i64,
    pub lifted_circle_value: i64,
    pub lifted_two_turn_value: i64,
    pub chain_value: i64,
}

impl Default for GoldenValues {
    fn default() -> Self {
        GoldenValues {
            standard_rows: (-10i64..=10)
                .map(|j| (j, if j == 0 { 0 } else { -2 * (j.abs() - 1) }))
                .collect(),
            worked_crossings: 3,
            worked_winding_square_sum: 18,
            worked_index_square_sum: 6,
            worked_jplus: -8,
            inner_loop_rows: (1..=20).map(|n| (n, -n * n - n)).collect(),
            deep_interior: (-12, 6),
            deep_tunnel: (8, 1),
            circle_triple_loop: -12,
            touched_loops_value: -2,
            lifted_circle_value: 24,
            lifted_two_turn_value: 8,
            chain_value: 0,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    /// True when the check died on a violated internal identity rather
    /// than a value mismatch.
    pub panicked: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckOutcome>,
}

impl VerifyReport {
    /// True when at least one check ran and none failed.
    pub fn all_passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    pub fn any_panicked(&self) -> bool {
        self.checks.iter().any(|c| c.panicked)
    }

    pub fn to_json(&self) -> String {
        let passed = self.checks.iter().filter(|c| c.passed).count();
        json!({
            "passed": passed,
            "failed": self.checks.len() - passed,
            "all_passed": self.all_passed(),
            "checks": serde_json::to_value(&self.checks).expect("outcomes serialize"),
        })
        .to_string()
    }
}

type CheckFn = fn(&GoldenValues) -> Result<String, String>;

pub const CHECKS: &[(&str, CheckFn)] = &[
    ("standard-family-values", check_standard_family),
    ("worked-example-labels", check_worked_example),
    ("inner-loop-bound", check_inner_loop_bound),
    ("rotation-equivalence", check_rotation_equivalence),
    ("interior-sum-identity", check_interior_sum),
    ("tunnel-sum-identity", check_tunnel_sum),
    ("loop-addition-identity", check_loop_addition),
    ("walk-ledger", check_walk_ledger),
    ("solution-reconstructions", check_solution_reconstructions),
    ("geometry-oracle", check_geometry_oracle),
    ("round-trip-identities", check_round_trips),
];

/// Run the whole suite, or the checks whose name contains `filter`.
pub fn verify_corpus(filter: Option<&str>) -> VerifyReport {
    verify_corpus_with(filter, &GoldenValues::default())
}

pub fn verify_corpus_with(filter: Option<&str>, goldens: &GoldenValues) -> VerifyReport {
    let selected: Vec<&(&str, CheckFn)> = CHECKS
        .iter()
        .filter(|(name, _)| filter.map_or(true, |f| name.contains(f)))
        .collect();
    let checks = std::thread::scope(|scope| {
        let handles: Vec<_> = selected
            .iter()
            .map(|(name, f)| scope.spawn(move || run_one(name, *f, goldens)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("check wrapper does not panic"))
            .collect()
    });
    VerifyReport { checks }
}

/// Run a single check by its exact name. Panics on an unknown name, which
/// marks a typo in a caller, not a verification failure.
pub fn run_check(name: &str, goldens: &GoldenValues) -> CheckOutcome {
    let (n, f) = CHECKS
        .iter()
        .find(|(n, _)| *n == name)
        .unwrap_or_else(|| panic!("no check named {name:?}"));
    run_one(n, *f, goldens)
}

fn run_one(name: &str, f: CheckFn, goldens: &GoldenValues) -> CheckOutcome {
    match catch_unwind(AssertUnwindSafe(|| f(goldens))) {
        Ok(Ok(detail)) => CheckOutcome {
            name: name.to_string(),
            passed: true,
            panicked: false,
            detail,
        },
        Ok(Err(detail)) => CheckOutcome {
            name: name.to_string(),
            passed: false,
            panicked: false,
            detail,
        },
        Err(payload) => {
            let msg = payload
                .downcast_ref::<String>()
                .map(String::as_str)
                .or_else(|| payload.downcast_ref::<&str>().copied())
                .unwrap_or("opaque panic payload");
            CheckOutcome {
                name: name.to_string(),
                passed: false,
                panicked: true,
                detail: format!("internal identity violated: {msg}"),
            }
        }
    }
}

/// Geometric curves every corpus-wide check iterates over.
pub fn corpus() -> Vec<(String, PolylineCurve)> {
    let mut list = Vec::new();
    for j in -4..=4 {
        list.push((format!("standard {j}"), standard_curve(j)));
    }
    for j in [3, 4, 5, -3] {
        list.push((format!("nested {j}"), inner_loop_curve(j)));
    }
    list.push((
        "single and double loop".to_string(),
        single_and_double_loop_curve(),
    ));
    list
}

fn validated(c: &PolylineCurve) -> Result<ValidatedCurve, String> {
    ValidatedCurve::validate(c.clone()).map_err(|e| format!("validation: {e}"))
}

fn rep(c: &PolylineCurve) -> Result<InvariantReport, String> {
    Ok(invariants::report_for_curve(&validated(c)?))
}

fn diagram(c: &PolylineCurve) -> Result<CurveDiagram, String> {
    Ok(CurveDiagram::from_geometry(&validated(c)?).0)
}

/// Walk policy pinned to the documented default cap, independent of the
/// environment override.
fn pinned_policy() -> WalkPolicy {
    WalkPolicy {
        max_crossings: 64,
        direct_tangencies: true,
        inverse_tangencies: true,
        triple_points: true,
    }
}

fn walk_starts() -> Result<Vec<CurveDiagram>, String> {
    let mut starts = vec![CurveDiagram::from_parts(vec![], vec![], (0, Side::Right))
        .map_err(|e| e.to_string())?];
    for j in [-2, 0, 1, 2, 3] {
        starts.push(diagram(&standard_curve(j))?);
    }
    starts.push(diagram(&inner_loop_curve(3))?);
    Ok(starts)
}

fn check_standard_family(g: &GoldenValues) -> Result<String, String> {
    for &(j, want) in &g.standard_rows {
        let r = rep(&standard_curve(j))?;
        if r.jplus != want {
            return Err(format!("standard curve {j}: value {}, want {want}", r.jplus));
        }
        if r.rotation != j || r.rotation_geometric != Some(j) {
            return Err(format!(
                "standard curve {j}: label rotation {}, geometric {:?}",
                r.rotation, r.rotation_geometric
            ));
        }
    }
    Ok(format!("{} curves match the table", g.standard_rows.len()))
}

fn check_worked_example(g: &GoldenValues) -> Result<String, String> {
    let text = io::curve_to_json(&single_and_double_loop_curve());
    let vc = match io::ingest_str(&text) {
        Ok(Ingested::Curve(vc)) => vc,
        Ok(_) => return Err("template ingested as a bare diagram".to_string()),
        Err(e) => return Err(format!("template did not ingest: {e}")),
    };
    let r = invariants::report_for_curve(&vc);
    let sum_w2: i64 = r.winding_multiset.iter().map(|w| w * w).sum();
    let sum_i2: i64 = r.index_multiset.iter().map(|i| i * i).sum();
    if r.double_points != g.worked_crossings {
        return Err(format!(
            "crossings {}, want {}",
            r.double_points, g.worked_crossings
        ));
    }
    if sum_w2 != g.worked_winding_square_sum {
        return Err(format!(
            "winding square sum {sum_w2}, want {}",
            g.worked_winding_square_sum
        ));
    }
    if sum_i2 != g.worked_index_square_sum {
        return Err(format!(
            "index square sum {sum_i2}, want {}",
            g.worked_index_square_sum
        ));
    }
    if r.jplus != g.worked_jplus {
        return Err(format!("value {}, want {}", r.jplus, g.worked_jplus));
    }
    Ok(format!(
        "n={}, winding squares {sum_w2}, index squares {sum_i2}, value {}",
        r.double_points, r.jplus
    ))
}

fn check_inner_loop_bound(g: &GoldenValues) -> Result<String, String> {
    for &(n, want) in &g.inner_loop_rows {
        let r = rep(&inner_loop_curve(n + 1))?;
        if r.jplus != want {
            return Err(format!("nested curve with {} turns: value {}, want {want}", n + 1, r.jplus));
        }
        if r.bound_slack != 0 {
            return Err(format!(
                "nested curve with {} turns: slack {}, want 0",
                n + 1,
                r.bound_slack
            ));
        }
    }
    // The slack must stay nonnegative away from the extremal family too;
    // geometric corpus plus a spread of combinatorial walk endpoints.
    let mut sampled = 0;
    for (name, c) in corpus() {
        let r = rep(&c)?;
        if r.bound_slack < 0 {
            return Err(format!("{name}: slack {}", r.bound_slack));
        }
        sampled += 1;
    }
    let starts = walk_starts()?;
    for seed in 0..24u64 {
        let start = &starts[(seed as usize) % starts.len()];
        let t = moves::random_homotopy_with(start, 12, 900 + seed, pinned_policy());
        let r = invariants::report_for_diagram(&t.final_diagram);
        if r.bound_slack < 0 {
            return Err(format!("walk seed {}: slack {}", 900 + seed, r.bound_slack));
        }
        sampled += 1;
    }
    Ok(format!(
        "{} tight rows at slack 0; slack nonnegative on {sampled} other diagrams",
        g.inner_loop_rows.len()
    ))
}

fn check_rotation_equivalence(_g: &GoldenValues) -> Result<String, String> {
    let mut curves = 0;
    for (name, c) in corpus() {
        let text = io::curve_to_json(&c);
        let vc = match io::ingest_str(&text) {
            Ok(Ingested::Curve(vc)) => vc,
            _ => return Err(format!("{name}: did not ingest as a curve")),
        };
        let turning = vc.turning_number();
        let (d, _) = CurveDiagram::from_geometry(&vc);
        let labeled = invariants::rotation(&d);
        if labeled != turning {
            return Err(format!("{name}: labels give {labeled}, geometry {turning}"));
        }
        curves += 1;
    }
    let starts = walk_starts()?;
    let mut steps_total = 0usize;
    for seed in 0..500u64 {
        let start = &starts[(seed as usize) % starts.len()];
        let trace = moves::random_homotopy_with(start, 24, seed, pinned_policy());
        let want = invariants::rotation(&trace.initial);
        let mut cur = trace.initial.clone();
        for step in &trace.steps {
            let (next, _) = moves::apply_move(&cur, step.site).map_err(|e| format!("seed {seed}: {e}"))?;
            let got = invariants::rotation(&next);
            if got != want {
                return Err(format!(
                    "seed {seed}: rotation moved from {want} to {got} after {:?}",
                    step.site
                ));
            }
            cur = next;
            steps_total += 1;
        }
        if cur.n() > 64 {
            return Err(format!("seed {seed}: walk passed the crossing cap"));
        }
        if !cur.same_diagram(&trace.final_diagram) {
            return Err(format!("seed {seed}: replay diverged from the trace"));
        }
    }
    Ok(format!(
        "{curves} geometric curves agree; rotation held over 500 walks ({steps_total} steps)"
    ))
}

enum SumKind {
    Interior,
    Tunnel,
}

/// Operands for the randomized sum harnesses: the small standard and
/// nested curves plus walk endpoints re-realized as geometry with the
/// same invariant pair.
fn operand_pool() -> Result<Vec<PolylineCurve>, String> {
    let mut pool = Vec::new();
    for j in -3..=3 {
        pool.push(standard_curve(j));
    }
    for j in [3, 4, -3, -4] {
        pool.push(inner_loop_curve(j));
    }
    let starts = walk_starts()?;
    let mut seen = BTreeSet::new();
    for seed in 0..6u64 {
        let start = &starts[(seed as usize) % starts.len()];
        let trace = moves::random_homotopy_with(start, 6, 1000 + seed, pinned_policy());
        let d = &trace.final_diagram;
        let target = (invariants::rotation(d), invariants::jplus(d));
        if seen.insert(target) {
            let c = curve_with_invariants(target.0, target.1)
                .map_err(|e| format!("realizing walk endpoint {target:?}: {e}"))?;
            pool.push(c);
        }
    }
    Ok(pool)
}

/// `quota` random (host, insert, face, arcs) sums; placement failures are
/// redrawn, anything else is a failure. Each success is verified two
/// ways: against the constructor's prediction and against the closed
/// formula assembled from the operand invariants and the site labels.
fn run_sum_harness(
    pool: &[PolylineCurve],
    quota: usize,
    seed: u64,
    kind: &SumKind,
) -> Result<(usize, usize), String> {
    let mut traced = Vec::new();
    for c in pool {
        let d = diagram(c)?;
        let r = rep(c)?;
        traced.push((c, d, r));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut done = 0usize;
    let mut attempts = 0usize;
    while done < quota {
        attempts += 1;
        if attempts > quota * 60 {
            return Err(format!("only {done} sums placed after {attempts} attempts"));
        }
        let (hc, hd, hr) = &traced[rng.gen_range(0..traced.len())];
        let (ic, id, ir) = &traced[rng.gen_range(0..traced.len())];
        let bounded: Vec<usize> = (0..hd.faces().len())
            .filter(|&f| !hd.faces()[f].is_outer)
            .collect();
        let face = bounded[rng.gen_range(0..bounded.len())];
        let boundary = &hd.faces()[face].boundary;
        let (arc, _) = boundary[rng.gen_range(0..boundary.len())];
        if hd.arc_face(arc, Side::Left) == hd.arc_face(arc, Side::Right) {
            // Both sides of the arc see the host face; the winding step
            // across it is ill-defined, so the formula check below would
            // be ambiguous.
            continue;
        }
        let outer_arcs: Vec<usize> = (0..id.arc_count())
            .filter(|&a| {
                id.arc_face(a, Side::Left) == id.outer_face()
                    || id.arc_face(a, Side::Right) == id.outer_face()
            })
            .collect();
        let iarc = outer_arcs[rng.gen_range(0..outer_arcs.len())];
        let res = match kind {
            SumKind::Interior => interior_sum(hc, face, arc, ic, iarc),
            SumKind::Tunnel => tunnel_sum(hc, face, arc, ic, iarc),
        };
        let got = match res {
            Ok(r) => r,
            Err(ConstructError::PlacementFailure(_)) => continue,
            Err(e) => return Err(format!("attempt {attempts}: {e}")),
        };
        let r = rep(&got.curve)?;
        if r.jplus != got.predicted_jplus || r.rotation != got.predicted_rot {
            return Err(format!(
                "{}: realized ({}, {})",
                got.formula, r.jplus, r.rotation
            ));
        }
        // Closed-form route. The insert may have been placed reversed,
        // which negates its rotation, so both signs are admitted, but
        // one sign must satisfy the value and rotation laws together.
        let wc = hd.faces()[face].winding;
        let other = if hd.arc_face(arc, Side::Left) == face {
            hd.arc_face(arc, Side::Right)
        } else {
            hd.arc_face(arc, Side::Left)
        };
        let step = hd.faces()[face].winding - hd.faces()[other].winding;
        let consistent = [1i64, -1].iter().any(|&e| {
            let placed_rot = e * ir.rotation;
            let (want_j, want_rot) = match kind {
                SumKind::Interior => (
                    hr.jplus + ir.jplus - 2 * wc * placed_rot,
                    hr.rotation + placed_rot,
                ),
                SumKind::Tunnel => (
                    hr.jplus + ir.jplus - 2 * wc * (placed_rot + step),
                    hr.rotation + placed_rot + step,
                ),
            };
            r.jplus == want_j && r.rotation == want_rot
        });
        if !consistent {
            return Err(format!(
                "closed form missed: {} gave ({}, {}) from operands ({}, {}) and ({}, {}), site winding {wc}, step {step}",
                got.formula, r.jplus, r.rotation, hr.jplus, hr.rotation, ir.jplus, ir.rotation
            ));
        }
        done += 1;
    }
    Ok((done, attempts))
}

/// The nested fixture: a three-turn host at value 2 joined with a
/// three-turn insert at value -2 inside a winding-2 face. Site scan order
/// is fixed, so the placed instance and its values are reproducible.
fn deep_fixture(kind: &SumKind) -> Result<(i64, i64), String> {
    let host = curve_with_invariants(3, 2).map_err(|e| e.to_string())?;
    let hd = diagram(&host)?;
    let sites: Vec<(usize, usize)> = (0..hd.arc_count())
        .filter_map(|a| {
            let fl = hd.arc_face(a, Side::Left);
            (hd.faces()[fl].winding == 2).then_some((fl, a))
        })
        .collect();
    let insert = curve_with_invariants(3, -2).map_err(|e| e.to_string())?;
    let id = diagram(&insert)?;
    let iarcs: Vec<usize> = (0..id.arc_count())
        .filter(|&a| id.arc_face(a, Side::Right) == id.outer_face())
        .collect();
    for &(face, arc) in &sites {
        for &iarc in &iarcs {
            let res = match kind {
                SumKind::Interior => interior_sum(&host, face, arc, &insert, iarc),
                SumKind::Tunnel => tunnel_sum(&host, face, arc, &insert, iarc),
            };
            match res {
                Ok(got) => {
                    let r = rep(&got.curve)?;
                    if (r.jplus, r.rotation) != (got.predicted_jplus, got.predicted_rot) {
                        return Err(format!(
                            "fixture formula {} realized ({}, {})",
                            got.formula, r.jplus, r.rotation
                        ));
                    }
                    return Ok((r.jplus, r.rotation));
                }
                Err(ConstructError::PlacementFailure(_)) => continue,
                Err(e) => return Err(format!("fixture: {e}")),
            }
        }
    }
    Err("no fixture site placed".to_string())
}

fn check_interior_sum(g: &GoldenValues) -> Result<String, String> {
    let pool = operand_pool()?;
    let (done, attempts) = run_sum_harness(&pool, 200, 510510, &SumKind::Interior)?;
    let fixture = deep_fixture(&SumKind::Interior)?;
    if fixture != g.deep_interior {
        return Err(format!("deep fixture {fixture:?}, want {:?}", g.deep_interior));
    }
    Ok(format!(
        "{done} sums verified in {attempts} draws; deep fixture at {fixture:?}"
    ))
}

fn check_tunnel_sum(g: &GoldenValues) -> Result<String, String> {
    let pool = operand_pool()?;
    let (done, attempts) = run_sum_harness(&pool, 200, 620620, &SumKind::Tunnel)?;
    let fixture = deep_fixture(&SumKind::Tunnel)?;
    if fixture != g.deep_tunnel {
        return Err(format!("deep fixture {fixture:?}, want {:?}", g.deep_tunnel));
    }
    Ok(format!(
        "{done} sums verified in {attempts} draws; deep fixture at {fixture:?}"
    ))
}

fn check_loop_addition(g: &GoldenValues) -> Result<String, String> {
    let hosts = vec![
        standard_curve(1),
        standard_curve(-1),
        standard_curve(2),
        standard_curve(-2),
        inner_loop_curve(4),
        inner_loop_curve(-4),
        single_and_double_loop_curve(),
    ];
    let mut traced = Vec::new();
    for c in &hosts {
        let d = diagram(c)?;
        let r = rep(c)?;
        traced.push((c, d, r));
    }
    let mut instances = 0;
    for wc in -3..=3i64 {
        for wadj in [-1i64, 1] {
            let mut sites = Vec::new();
            for (c, d, r) in &traced {
                for arc in 0..d.arc_count() {
                    for side in [Side::Left, Side::Right] {
                        let f = d.arc_face(arc, side);
                        let o = d.arc_face(arc, side.flip());
                        if f == o {
                            continue;
                        }
                        let w = d.faces()[f].winding;
                        if w == wc && w - d.faces()[o].winding == wadj {
                            sites.push((*c, f, arc, r));
                        }
                    }
                }
            }
            if sites.is_empty() {
                return Err(format!("no host site with winding {wc}, step {wadj}"));
            }
            for m in 1..=4i64 {
                let mut placed = false;
                for &(c, f, arc, r) in &sites {
                    match add_interior_loop(c, f, arc, m) {
                        Ok(got) => {
                            let out = rep(&got.curve)?;
                            let want_j = r.jplus - m * (m - 1 + 2 * wc * wadj);
                            let want_rot = r.rotation + wadj * m;
                            if out.jplus != want_j
                                || out.jplus != got.predicted_jplus
                                || out.rotation != want_rot
                            {
                                return Err(format!(
                                    "winding {wc}, step {wadj}, depth {m}: realized ({}, {}), closed form ({want_j}, {want_rot}), constructor {}",
                                    out.jplus, out.rotation, got.predicted_jplus
                                ));
                            }
                            placed = true;
                            instances += 1;
                            break;
                        }
                        Err(ConstructError::PlacementFailure(_)) => continue,
                        Err(e) => return Err(format!("winding {wc}, step {wadj}, depth {m}: {e}")),
                    }
                }
                if !placed {
                    return Err(format!(
                        "no placement for winding {wc}, step {wadj}, depth {m}"
                    ));
                }
            }
        }
    }
    let circle = standard_curve(1);
    let cd = diagram(&circle)?;
    let disk = (0..cd.faces().len())
        .find(|&f| !cd.faces()[f].is_outer)
        .expect("the embedded loop bounds a disk");
    let got = add_interior_loop(&circle, disk, 0, 3).map_err(|e| e.to_string())?;
    let out = rep(&got.curve)?;
    if out.jplus != g.circle_triple_loop || got.predicted_jplus != g.circle_triple_loop {
        return Err(format!(
            "circle with a triple loop: value {}, want {}",
            out.jplus, g.circle_triple_loop
        ));
    }
    Ok(format!(
        "{instances} winding/step/depth instances; circle triple loop at {}",
        out.jplus
    ))
}

fn check_walk_ledger(_g: &GoldenValues) -> Result<String, String> {
    let starts = walk_starts()?;
    let mut audited = 0usize;
    for (i, &seed) in [101u64, 202, 303].iter().enumerate() {
        let start = &starts[i % starts.len()];
        let trace = moves::random_homotopy_with(start, 1000, seed, pinned_policy());
        let mut cur = trace.initial.clone();
        let mut running = invariants::jplus(&cur);
        if running != trace.initial_jplus {
            return Err(format!("seed {seed}: initial value recorded wrong"));
        }
        for (k, step) in trace.steps.iter().enumerate() {
            let (next, delta) =
                moves::apply_move(&cur, step.site).map_err(|e| format!("seed {seed}: {e}"))?;
            if delta != step.delta_jplus {
                return Err(format!("seed {seed} step {k}: delta {delta} vs ledger {}", step.delta_jplus));
            }
            running += delta;
            let scratch = invariants::jplus(&next);
            if scratch != running || scratch != step.running_jplus {
                return Err(format!(
                    "seed {seed} step {k}: recomputed {scratch}, ledger {}",
                    step.running_jplus
                ));
            }
            if next.faces().len() != next.n() + 2 {
                return Err(format!(
                    "seed {seed} step {k}: {} faces on {} crossings",
                    next.faces().len(),
                    next.n()
                ));
            }
            cur = next;
            audited += 1;
        }
        if !cur.same_diagram(&trace.final_diagram) {
            return Err(format!("seed {seed}: replay diverged"));
        }
    }

    let fixed_policy = WalkPolicy {
        direct_tangencies: false,
        ..pinned_policy()
    };
    let mut fixed_steps = 0usize;
    for seed in [7u64, 8, 9] {
        let start = &starts[(seed as usize) % starts.len()];
        let trace = moves::random_homotopy_with(start, 300, seed, fixed_policy);
        for step in &trace.steps {
            if step.delta_jplus != 0 || step.running_jplus != trace.initial_jplus {
                return Err(format!(
                    "seed {seed}: value moved without a direct tangency ({:?})",
                    step.site
                ));
            }
        }
        if invariants::jplus(&trace.final_diagram) != trace.initial_jplus {
            return Err(format!("seed {seed}: endpoint value drifted"));
        }
        fixed_steps += trace.steps.len();
    }

    let mut round_trips = 0usize;
    for d in &starts {
        let positives: Vec<MoveSite> = moves::enumerate_moves(d)
            .into_iter()
            .filter(|s| {
                matches!(
                    s,
                    MoveSite::DirectTangencyPositive { .. }
                        | MoveSite::InverseTangencyPositive { .. }
                )
            })
            .take(4)
            .collect();
        for site in positives {
            let (up, _) = moves::apply_move(d, site).map_err(|e| e.to_string())?;
            let lens = moves::created_lens(d, site, &up)
                .ok_or_else(|| format!("no created contact for {site:?}"))?;
            let back = match site {
                MoveSite::DirectTangencyPositive { .. } => {
                    MoveSite::DirectTangencyNegative { face: lens }
                }
                _ => MoveSite::InverseTangencyNegative { face: lens },
            };
            if !moves::enumerate_moves(&up).contains(&back) {
                return Err(format!("created contact of {site:?} is not collapsible"));
            }
            let (down, _) = moves::apply_move(&up, back).map_err(|e| e.to_string())?;
            if !down.same_diagram(d) {
                return Err(format!("{site:?} then collapse is not the identity"));
            }
            round_trips += 1;
        }
    }
    Ok(format!(
        "{audited} audited steps; {fixed_steps} value-fixed steps; {round_trips} create/collapse round trips"
    ))
}

fn lift_by_direct_contacts(mut d: CurveDiagram, count: usize) -> Result<CurveDiagram, String> {
    for k in 0..count {
        let site = moves::enumerate_moves(&d)
            .into_iter()
            .find(|s| matches!(s, MoveSite::DirectTangencyPositive { .. }))
            .ok_or_else(|| format!("no direct contact available at step {k}"))?;
        let (next, delta) = moves::apply_move(&d, site).map_err(|e| e.to_string())?;
        if delta != 2 {
            return Err(format!("direct contact moved the value by {delta}"));
        }
        d = next;
    }
    Ok(d)
}

fn check_solution_reconstructions(g: &GoldenValues) -> Result<String, String> {
    // Four-turn curve, two loop-against-strand contacts.
    let four = lift_by_direct_contacts(diagram(&standard_curve(4))?, 2)?;
    let got = invariants::jplus(&four);
    if got != g.touched_loops_value {
        return Err(format!(
            "four-turn curve after two contacts: {got}, want {}",
            g.touched_loops_value
        ));
    }

    // Embedded loop lifted twelve times. No direct contact exists on the
    // bare loop, so one value-neutral fold opens material first.
    let circle = CurveDiagram::from_parts(vec![], vec![], (0, Side::Right))
        .map_err(|e| e.to_string())?;
    if moves::enumerate_moves(&circle)
        .iter()
        .any(|s| matches!(s, MoveSite::DirectTangencyPositive { .. }))
    {
        return Err("embedded loop offered a direct contact".to_string());
    }
    let fold = moves::enumerate_moves(&circle)
        .into_iter()
        .find(|s| matches!(s, MoveSite::InverseTangencyPositive { .. }))
        .ok_or("embedded loop offers no fold")?;
    let (folded, dz) = moves::apply_move(&circle, fold).map_err(|e| e.to_string())?;
    if dz != 0 {
        return Err(format!("fold moved the value by {dz}"));
    }
    let lifted = lift_by_direct_contacts(folded, 12)?;
    let got = invariants::jplus(&lifted);
    if got != g.lifted_circle_value {
        return Err(format!(
            "loop after twelve contacts: {got}, want {}",
            g.lifted_circle_value
        ));
    }

    // Two-turn curve lifted five times.
    let two = lift_by_direct_contacts(diagram(&standard_curve(2))?, 5)?;
    let got = invariants::jplus(&two);
    if got != g.lifted_two_turn_value {
        return Err(format!(
            "two-turn curve after five contacts: {got}, want {}",
            g.lifted_two_turn_value
        ));
    }

    // Chain of one embedded loop and eight figure eights.
    let mut chain = standard_curve(1);
    for k in 0..8 {
        chain = chain_attach(&chain).map_err(|e| format!("link {k}: {e}"))?;
    }
    let r = rep(&chain)?;
    if r.jplus != g.chain_value {
        return Err(format!("chain value {}, want {}", r.jplus, g.chain_value));
    }
    if r.double_points != 8 {
        return Err(format!("chain has {} crossings, want 8", r.double_points));
    }
    Ok(format!(
        "contacts gave {}, {}, {}; chain value {}",
        g.touched_loops_value, g.lifted_circle_value, g.lifted_two_turn_value, r.jplus
    ))
}

fn chain_attach(host: &PolylineCurve) -> Result<PolylineCurve, String> {
    let hd = diagram(host)?;
    let eight = standard_curve(0);
    let ed = diagram(&eight)?;
    let outer_of = |d: &CurveDiagram| -> Vec<usize> {
        (0..d.arc_count())
            .filter(|&a| {
                d.arc_face(a, Side::Left) == d.outer_face()
                    || d.arc_face(a, Side::Right) == d.outer_face()
            })
            .collect()
    };
    for &a in &outer_of(&hd) {
        for &b in &outer_of(&ed) {
            match connected_sum(host, a, &eight, b, ConnectMode::Flip) {
                Ok(got) => return Ok(got.curve),
                Err(ConstructError::PlacementFailure(_)) => continue,
                Err(e) => return Err(e.to_string()),
            }
        }
    }
    Err("no attachment placed".to_string())
}

fn random_polyline(rng: &mut ChaCha8Rng, n: usize) -> PolylineCurve {
    let mut v: Vec<Point> = Vec::with_capacity(n);
    while v.len() < n {
        let p = Point::int(rng.gen_range(0..=1000), rng.gen_range(0..=1000));
        if v.last() == Some(&p) {
            continue;
        }
        v.push(p);
    }
    PolylineCurve::new(v)
}

/// Plain quadratic scan with the raw segment predicate: the production
/// routine prunes by coordinate spans, this one looks at every pair.
fn all_pairs_crossings(
    c: &PolylineCurve,
) -> Result<Vec<(CurvePosition, CurvePosition, Point)>, String> {
    let n = c.len();
    let mut out = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            let (a, b) = c.edge(i);
            let (d, e) = c.edge(j);
            match seg_seg(a, b, d, e) {
                SegSeg::None => {}
                SegSeg::Proper { ta, tc, at } => {
                    out.push((CurvePosition::new(i, ta), CurvePosition::new(j, tc), at));
                }
                other => return Err(format!("oracle found a non-generic contact: {other:?}")),
            }
        }
    }
    Ok(out)
}

fn check_geometry_oracle(_g: &GoldenValues) -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(4242);
    let mut curves_done = 0usize;
    let mut crossings_total = 0usize;
    let mut rejected = 0usize;
    while curves_done < 100 {
        let c = random_polyline(&mut rng, 200);
        let found = match find_intersections(&c) {
            Ok(v) => v,
            Err(_) => {
                rejected += 1;
                if rejected > 50 {
                    return Err("generator produced too many degenerate curves".to_string());
                }
                continue;
            }
        };
        let mut oracle = all_pairs_crossings(&c)?;
        oracle.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.cmp(&y.1)));
        let mut got: Vec<(CurvePosition, CurvePosition, Point)> = found
            .iter()
            .map(|dp| {
                let (a, b) = (
                    CurvePosition::new(dp.first.edge, dp.first.t.clone()),
                    CurvePosition::new(dp.second.edge, dp.second.t.clone()),
                );
                // The production list orders passes along the curve; the
                // oracle orders by edge pair. Normalize to (min, max).
                if a <= b {
                    (a, b, dp.at.clone())
                } else {
                    (b, a, dp.at.clone())
                }
            })
            .collect();
        got.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.cmp(&y.1)));
        if got.len() != oracle.len() {
            return Err(format!(
                "curve {curves_done}: {} crossings found, oracle sees {}",
                got.len(),
                oracle.len()
            ));
        }
        for (g1, g2) in got.iter().zip(&oracle) {
            if g1 != g2 {
                return Err(format!(
                    "curve {curves_done}: crossing mismatch {g1:?} vs {g2:?}"
                ));
            }
        }
        crossings_total += got.len();
        curves_done += 1;
    }

    let mut faces_checked = 0usize;
    for (name, c) in corpus() {
        let vc = validated(&c)?;
        let (d, geom) = CurveDiagram::from_geometry(&vc);
        for f in 0..d.faces().len() {
            let p = geom
                .sample_point_in_face(&d, f)
                .ok_or_else(|| format!("{name}: face {f} has no sample point"))?;
            let cast = vc
                .curve()
                .point_winding(&p)
                .ok_or_else(|| format!("{name}: sample point landed on the curve"))?;
            if cast != d.faces()[f].winding {
                return Err(format!(
                    "{name}: face {f} labeled {}, ray cast gives {cast}",
                    d.faces()[f].winding
                ));
            }
            faces_checked += 1;
        }
    }
    Ok(format!(
        "100 random curves, {crossings_total} crossings, {rejected} redrawn; {faces_checked} face labels match ray casts"
    ))
}

fn round_trip_diagram(d: &CurveDiagram) -> Result<(), String> {
    let code = d.code();
    let parsed: GaussCode = code
        .to_string()
        .parse()
        .map_err(|e| format!("code text: {e}"))?;
    if parsed != code {
        return Err(format!("code text changed: {code} vs {parsed}"));
    }
    let rebuilt = CurveDiagram::from_code(&parsed).map_err(|e| e.to_string())?;
    if !rebuilt.same_diagram(d) || rebuilt.outer_face() != d.outer_face() {
        return Err(format!("code {code} rebuilt a different diagram"));
    }
    let back = io::diagram_from_json(&io::diagram_to_json(d)).map_err(|e| e.to_string())?;
    if !back.same_diagram(d) || back.outer_face() != d.outer_face() {
        return Err("diagram JSON rebuilt a different diagram".to_string());
    }
    Ok(())
}

fn check_round_trips(_g: &GoldenValues) -> Result<String, String> {
    let mut diagrams = 0usize;
    for (name, c) in corpus() {
        let back =
            io::curve_from_json(&io::curve_to_json(&c)).map_err(|e| format!("{name}: {e}"))?;
        if back.vertices != c.vertices {
            return Err(format!("{name}: curve JSON changed the vertices"));
        }
        let vc = validated(&c)?;
        let rr = vc.curve().reversed().reversed();
        if rr.vertices != vc.curve().vertices {
            return Err(format!("{name}: double reversal changed the vertices"));
        }
        let (d, _) = CurveDiagram::from_geometry(&vc);
        round_trip_diagram(&d).map_err(|e| format!("{name}: {e}"))?;
        let rev = d.reverse();
        if invariants::jplus(&rev) != invariants::jplus(&d) {
            return Err(format!("{name}: value moved under reversal"));
        }
        if invariants::rotation(&rev) != -invariants::rotation(&d) {
            return Err(format!("{name}: rotation did not negate under reversal"));
        }
        if !rev.reverse().same_diagram(&d) {
            return Err(format!("{name}: double reversal changed the diagram"));
        }
        diagrams += 1;
    }

    let starts = walk_starts()?;
    for seed in 0..12u64 {
        let start = &starts[(seed as usize) % starts.len()];
        let trace = moves::random_homotopy_with(start, 10, 40 + seed, pinned_policy());
        let d = &trace.final_diagram;
        round_trip_diagram(d).map_err(|e| format!("walk seed {}: {e}", 40 + seed))?;
        let rev = d.reverse();
        if invariants::jplus(&rev) != invariants::jplus(d) || !rev.reverse().same_diagram(d) {
            return Err(format!("walk seed {}: reversal identities failed", 40 + seed));
        }
        let t2 = io::trace_from_json(&io::trace_to_json(&trace)).map_err(|e| e.to_string())?;
        if t2.seed != trace.seed
            || t2.steps != trace.steps
            || !t2.final_diagram.same_diagram(d)
            || !t2.initial.same_diagram(&trace.initial)
        {
            return Err(format!("walk seed {}: trace JSON changed the walk", 40 + seed));
        }
        diagrams += 1;
    }

    let r = invariants::report_for_curve(&validated(&standard_curve(3))?);
    let back = io::report_from_json(&io::report_to_json(&r)).map_err(|e| e.to_string())?;
    if back != r {
        return Err("report JSON changed the report".to_string());
    }
    Ok(format!(
        "{diagrams} diagrams round-tripped through code text and JSON; reversal identities hold"
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fault_injection_names_exactly_one_failure() {
        let mut g = GoldenValues::default();
        g.worked_jplus = -6;
        let names = [
            "standard-family-values",
            "worked-example-labels",
            "inner-loop-bound",
            "solution-reconstructions",
        ];
        let outcomes: Vec<CheckOutcome> = names.iter().map(|n| run_check(n, &g)).collect();
        let failed: Vec<&CheckOutcome> = outcomes.iter().filter(|o| !o.passed).collect();
        assert_eq!(failed.len(), 1);
        assert_eq!(failed[0].name, "worked-example-labels");
        assert!(!failed[0].panicked);
        assert!(failed[0].detail.contains("-8"));
    }

    #[test]
    fn filtering_selects_by_substring() {
        let report = verify_corpus(Some("standard-family"));
        assert_eq!(report.checks.len(), 1);
        assert!(report.all_passed());
        assert!(report.to_json().contains("\"all_passed\":true"));

        let empty = verify_corpus(Some("no-such-check"));
        assert!(empty.checks.is_empty());
        assert!(!empty.all_passed());
    }

    #[test]
    fn check_names_are_unique_and_stable() {
        let names: BTreeSet<&str> = CHECKS.iter().map(|(n, _)| *n).collect();
        assert_eq!(names.len(), CHECKS.len());
        assert_eq!(CHECKS.len(), 11);
    }
}
