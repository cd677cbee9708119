//! Plane curve diagrams and their winding-based invariants.
//!
//! A generic closed curve in the plane is modeled as a rational polyline.
//! From its self-intersections we build a combinatorial diagram (arcs,
//! crossings, faces), label every face with its winding number, and compute
//! the tangency invariant alongside the rotation number. Constructions
//! (standard curve families, connected and interior sums, loop insertion)
//! and local homotopy moves (tangency and triple point moves) come with
//! closed-form predictions for how the invariants change; the library
//! recomputes everything from scratch after each operation and asserts the
//! predictions, so a successful call is also a verified identity.

pub mod constructions;
pub mod diagram;
pub mod exact;
pub mod geometry;
pub mod invariants;
pub mod io;
pub mod moves;
pub mod render;
pub mod verify;

pub use diagram::{CurveDiagram, DiagramGeometry, GaussCode, Side, Sign};
pub use geometry::{PolylineCurve, ValidatedCurve};
pub use invariants::InvariantReport;
pub use moves::{HomotopyTrace, MoveSite, WalkPolicy};
