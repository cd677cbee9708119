//! Invariants read off a labeled diagram.
//!
//! The tangency invariant is computed by the winding formula
//! `1 + n - sum(w^2) + sum(ind^2)` over faces and crossings. The rotation
//! number is `sum(w) - sum(ind)`. Every report recomputes the rotation
//! geometrically when coordinates exist and asserts the two routes agree;
//! the invariant is likewise asserted even and orientation-independent on
//! every call, so downstream code can rely on both facts unconditionally.

use crate::diagram::CurveDiagram;
use crate::geometry::ValidatedCurve;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tangency invariant of the diagram.
///
/// Always even, invariant under orientation reversal; both are asserted
/// here, as is agreement between the two algebraic arrangements of the
/// formula.
pub fn jplus(d: &CurveDiagram) -> i64 {
    let value = viro_value(d);
    assert_eq!(value % 2, 0, "invariant must be even, got {value}");
    assert_eq!(
        value,
        viro_value(&d.reverse()),
        "invariant changed under orientation reversal"
    );
    value
}

fn viro_value(d: &CurveDiagram) -> i64 {
    let n = d.n() as i64;
    let sum_w2: i64 = d.faces().iter().map(|f| f.winding * f.winding).sum();
    let sum_i2: i64 = d.crossings().iter().map(|c| c.index * c.index).sum();
    let value = 1 + n - sum_w2 + sum_i2;
    // Same identity with the crossing term folded differently.
    let alt = 1 - sum_w2 + d.crossings().iter().map(|c| 1 + c.index * c.index).sum::<i64>();
    assert_eq!(value, alt);
    value
}

/// Rotation number from face and crossing labels.
pub fn rotation(d: &CurveDiagram) -> i64 {
    let sum_w: i64 = d.faces().iter().map(|f| f.winding).sum();
    let sum_i: i64 = d.crossings().iter().map(|c| c.index).sum();
    sum_w - sum_i
}

/// Consolidated invariant data for one curve or diagram.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantReport {
    pub double_points: usize,
    pub rotation: i64,
    /// Turning number of the polyline, present when geometry exists.
    pub rotation_geometric: Option<i64>,
    pub jplus: i64,
    pub winding_multiset: Vec<i64>,
    pub index_multiset: Vec<i64>,
    /// Margin over the lower bound `-n^2 - n`; zero exactly on the
    /// tightest nested-loop curves.
    pub bound_slack: i64,
}

pub fn report_for_diagram(d: &CurveDiagram) -> InvariantReport {
    report(d, None)
}

/// Report for a geometric curve; the polyline turning number is computed
/// independently and must equal the label-derived rotation.
pub fn report_for_curve(vc: &ValidatedCurve) -> InvariantReport {
    let (d, _) = CurveDiagram::from_geometry(vc);
    report(&d, Some(vc.turning_number()))
}

fn report(d: &CurveDiagram, turning: Option<i64>) -> InvariantReport {
    let n = d.n() as i64;
    let rotation = rotation(d);
    if let Some(t) = turning {
        assert_eq!(
            rotation, t,
            "label rotation and geometric turning number disagree"
        );
    }
    let jplus = jplus(d);
    let bound_slack = jplus + n * n + n;
    assert!(bound_slack >= 0, "lower bound violated: slack {bound_slack}");
    InvariantReport {
        double_points: d.n(),
        rotation,
        rotation_geometric: turning,
        jplus,
        winding_multiset: d.winding_multiset(),
        index_multiset: d.index_multiset(),
        bound_slack,
    }
}

#[derive(Debug, Error)]
#[error("{label}: predicted {predicted}, realized {realized}")]
pub struct IdentityViolation {
    pub label: String,
    pub predicted: i64,
    pub realized: i64,
}

/// Exact-equality check for a construction's predicted invariant value
/// against the value recomputed from the realized curve.
pub fn verify_sum_identity(
    label: &str,
    predicted: i64,
    realized: i64,
) -> Result<(), IdentityViolation> {
    if predicted == realized {
        Ok(())
    } else {
        Err(IdentityViolation {
            label: label.to_string(),
            predicted,
            realized,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::Point;
    use crate::geometry::PolylineCurve;

    fn curve(verts: Vec<(i64, i64)>) -> ValidatedCurve {
        ValidatedCurve::validate(PolylineCurve::new(
            verts.into_iter().map(|(x, y)| Point::int(x, y)).collect(),
        ))
        .unwrap()
    }

    #[test]
    fn loop_invariants() {
        let r = report_for_curve(&curve(vec![(0, 0), (4, 0), (4, 4), (0, 4)]));
        assert_eq!(r.double_points, 0);
        assert_eq!(r.jplus, 0);
        assert_eq!(r.rotation, 1);
        assert_eq!(r.rotation_geometric, Some(1));
        assert_eq!(r.bound_slack, 0);

        let r = report_for_curve(&curve(vec![(0, 4), (4, 4), (4, 0), (0, 0)]));
        assert_eq!(r.rotation, -1);
        assert_eq!(r.jplus, 0);
    }

    #[test]
    fn figure_eight_invariants() {
        let r = report_for_curve(&curve(vec![(0, 0), (4, 3), (4, 0), (0, 3)]));
        assert_eq!(r.double_points, 1);
        assert_eq!(r.rotation, 0);
        assert_eq!(r.jplus, 0);
        assert_eq!(r.winding_multiset, vec![-1, 0, 1]);
        assert_eq!(r.index_multiset, vec![0]);
        assert_eq!(r.bound_slack, 2);
    }

    #[test]
    fn reversal_keeps_jplus_and_negates_rotation() {
        let vc = curve(vec![(0, 0), (4, 3), (4, 0), (0, 3)]);
        let (d, _) = crate::diagram::CurveDiagram::from_geometry(&vc);
        let r = d.reverse();
        assert_eq!(jplus(&d), jplus(&r));
        assert_eq!(rotation(&d), -rotation(&r));
    }

    #[test]
    fn identity_check_reports_both_sides() {
        assert!(verify_sum_identity("ok", 4, 4).is_ok());
        let err = verify_sum_identity("mismatch", 4, 6).unwrap_err();
        assert_eq!(err.predicted, 4);
        assert_eq!(err.realized, 6);
        assert!(err.to_string().contains("mismatch"));
    }
}
