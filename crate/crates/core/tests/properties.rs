//! Randomized invariant properties. Case counts are kept small; the
//! heavy exhaustive comparisons live in the acceptance suite.

use jplus_core::diagram::GaussCode;
use jplus_core::exact::{parse_rational, rat, ratio, rational_string, Point};
use jplus_core::geometry::PolylineCurve;
use jplus_core::invariants;
use jplus_core::io;
use jplus_core::moves::{self, MoveSite, WalkPolicy};
use jplus_core::verify;
use jplus_core::{CurveDiagram, Side, ValidatedCurve};
use proptest::prelude::*;

fn starts() -> Vec<CurveDiagram> {
    let mut list = vec![CurveDiagram::from_parts(vec![], vec![], (0, Side::Right)).unwrap()];
    for (_, c) in verify::corpus() {
        let vc = ValidatedCurve::validate(c).unwrap();
        list.push(CurveDiagram::from_geometry(&vc).0);
    }
    list
}

fn policy() -> WalkPolicy {
    WalkPolicy {
        max_crossings: 32,
        direct_tangencies: true,
        inverse_tangencies: true,
        triple_points: true,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// Every diagram a walk can reach keeps the structural laws: two more
    /// faces than crossings, even invariant, nonnegative slack, rotation
    /// and value stable under double reversal, value stable under single
    /// reversal.
    #[test]
    fn walks_preserve_structural_laws(seed in any::<u64>(), steps in 0usize..30, pick in any::<usize>()) {
        let starts = starts();
        let start = &starts[pick % starts.len()];
        let trace = moves::random_homotopy_with(start, steps, seed, policy());
        let d = &trace.final_diagram;
        prop_assert_eq!(d.faces().len(), d.n() + 2);
        let j = invariants::jplus(d);
        prop_assert_eq!(j.rem_euclid(2), 0);
        prop_assert!(invariants::report_for_diagram(d).bound_slack >= 0);
        let rev = d.reverse();
        prop_assert_eq!(invariants::jplus(&rev), j);
        prop_assert_eq!(invariants::rotation(&rev), -invariants::rotation(d));
        prop_assert!(rev.reverse().same_diagram(d));
        prop_assert_eq!(trace.final_jplus(), j);
    }

    /// The turning number ignores translation, positive scaling, and
    /// quarter turns, and negates under mirroring and reversal.
    #[test]
    fn turning_number_respects_plane_symmetries(
        pick in any::<usize>(),
        dx in -30i64..30,
        dy in -30i64..30,
        num in 1i64..8,
        den in 1i64..8,
        quarters in 0usize..4,
    ) {
        let corpus = verify::corpus();
        let (_, c) = &corpus[pick % corpus.len()];
        let want = ValidatedCurve::validate(c.clone()).unwrap().turning_number();

        let mut moved = c
            .translate(&Point::int(dx, dy))
            .scale_uniform(&ratio(num, den));
        for _ in 0..quarters {
            moved = moved.rotate_quarter();
        }
        let got = ValidatedCurve::validate(moved.clone()).unwrap().turning_number();
        prop_assert_eq!(got, want);

        let mirrored = ValidatedCurve::validate(moved.reflect_y()).unwrap().turning_number();
        prop_assert_eq!(mirrored, -want);
        let reversed = ValidatedCurve::validate(moved.reversed()).unwrap().turning_number();
        prop_assert_eq!(reversed, -want);
    }

    /// Creating a contact and collapsing the lens it made is the
    /// identity on diagrams.
    #[test]
    fn created_contacts_collapse_back(pick in any::<usize>(), which in any::<usize>()) {
        let starts = starts();
        let d = &starts[pick % starts.len()];
        let positives: Vec<MoveSite> = moves::enumerate_moves(d)
            .into_iter()
            .filter(|s| matches!(
                s,
                MoveSite::DirectTangencyPositive { .. } | MoveSite::InverseTangencyPositive { .. }
            ))
            .collect();
        prop_assume!(!positives.is_empty());
        let site = positives[which % positives.len()];
        let (up, delta) = moves::apply_move(d, site).unwrap();
        let lens = moves::created_lens(d, site, &up).expect("positive moves create a lens");
        let back = match site {
            MoveSite::DirectTangencyPositive { .. } => {
                prop_assert_eq!(delta, 2);
                MoveSite::DirectTangencyNegative { face: lens }
            }
            _ => {
                prop_assert_eq!(delta, 0);
                MoveSite::InverseTangencyNegative { face: lens }
            }
        };
        let (down, back_delta) = moves::apply_move(&up, back).unwrap();
        prop_assert_eq!(back_delta, -delta);
        prop_assert!(down.same_diagram(d));
    }

    /// Serialized forms are lossless: curve vertices through JSON, the
    /// diagram through its code text and through JSON.
    #[test]
    fn serialized_forms_are_lossless(pick in any::<usize>(), seed in any::<u64>(), steps in 0usize..12) {
        let corpus = verify::corpus();
        let (_, c) = &corpus[pick % corpus.len()];
        let back = io::curve_from_json(&io::curve_to_json(c)).unwrap();
        prop_assert_eq!(&back.vertices, &c.vertices);

        let vc = ValidatedCurve::validate(c.clone()).unwrap();
        let start = CurveDiagram::from_geometry(&vc).0;
        let d = moves::random_homotopy_with(&start, steps, seed, policy()).final_diagram;
        let code: GaussCode = d.code().to_string().parse().unwrap();
        let from_code = CurveDiagram::from_code(&code).unwrap();
        prop_assert!(from_code.same_diagram(&d));
        prop_assert_eq!(from_code.outer_face(), d.outer_face());
        let from_json = io::diagram_from_json(&io::diagram_to_json(&d)).unwrap();
        prop_assert!(from_json.same_diagram(&d));
        prop_assert_eq!(from_json.outer_face(), d.outer_face());
    }

    /// Rational coordinates survive text form exactly, including
    /// unreduced input fractions.
    #[test]
    fn rational_text_is_exact(n in any::<i64>(), d in any::<i64>()) {
        prop_assume!(d != 0);
        let q = ratio(n, d);
        prop_assert_eq!(parse_rational(&rational_string(&q)).unwrap(), q.clone());

        let curve = PolylineCurve::new(vec![
            Point::new(q.clone(), rat(0)),
            Point::new(rat(1), q.clone()),
            Point::new(-q.clone(), -q),
        ]);
        let back = io::curve_from_json(&io::curve_to_json(&curve)).unwrap();
        prop_assert_eq!(back.vertices, curve.vertices);
    }
}
