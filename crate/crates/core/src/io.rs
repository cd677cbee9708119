//! On-disk formats: curve JSON with exact coordinates, diagram and trace
//! JSON, and input sniffing for the command line.
//!
//! Coordinates are written as rational strings (`"p"` or `"p/q"`) so a
//! write/read cycle is exact. On input, plain JSON numbers are accepted
//! too: integers directly, floats by exact binary64 decomposition, never
//! by decimal rounding or snapping.
//!
//! Diagram JSON stores the defining traversal data (visit sequence, one
//! sign per crossing, the outer-face marker) plus derived crossing and
//! face tables for readers. Only the defining data is consumed when
//! loading; the diagram is rebuilt and revalidated from it.

use crate::diagram::{CurveDiagram, DiagramError, GaussCode, Side, Sign};
use crate::exact::{parse_rational, rational_string, Point, Rational};
use crate::geometry::{GeometryError, PolylineCurve, ValidatedCurve};
use crate::invariants::InvariantReport;
use crate::moves::{HomotopyTrace, TraceStep};
use num::bigint::BigInt;
use num::rational::BigRational;
use serde_json::{json, Value};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("malformed JSON: {0}")]
    Json(String),
    #[error("{0}")]
    BadField(String),
    #[error("unrecognized input (expected curve JSON, diagram JSON, or a Gauss code)")]
    UnknownFormat,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
}

fn coord_value(r: &Rational) -> Value {
    Value::String(rational_string(r))
}

fn coord_from(v: &Value) -> Result<Rational, IoError> {
    match v {
        Value::String(s) => parse_rational(s).map_err(IoError::BadField),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(Rational::from_integer(BigInt::from(i)))
            } else if let Some(u) = n.as_u64() {
                Ok(Rational::from_integer(BigInt::from(u)))
            } else {
                n.as_f64()
                    .and_then(BigRational::from_float)
                    .ok_or_else(|| IoError::BadField(format!("coordinate {n} is not finite")))
            }
        }
        other => Err(IoError::BadField(format!(
            "coordinate must be a number or a rational string, got {other}"
        ))),
    }
}

pub fn curve_to_json(curve: &PolylineCurve) -> String {
    let vertices: Vec<Value> = curve
        .vertices
        .iter()
        .map(|p| Value::Array(vec![coord_value(&p.x), coord_value(&p.y)]))
        .collect();
    json!({ "vertices": vertices }).to_string()
}

pub fn curve_from_json(text: &str) -> Result<PolylineCurve, IoError> {
    let v: Value = serde_json::from_str(text).map_err(|e| IoError::Json(e.to_string()))?;
    curve_from_value(&v)
}

fn curve_from_value(v: &Value) -> Result<PolylineCurve, IoError> {
    let verts = v
        .get("vertices")
        .and_then(Value::as_array)
        .ok_or_else(|| IoError::BadField("curve JSON needs a \"vertices\" array".into()))?;
    let mut out = Vec::with_capacity(verts.len());
    for (i, vert) in verts.iter().enumerate() {
        let pair = vert
            .as_array()
            .filter(|a| a.len() == 2)
            .ok_or_else(|| IoError::BadField(format!("vertex {i} must be an [x, y] pair")))?;
        out.push(Point::new(coord_from(&pair[0])?, coord_from(&pair[1])?));
    }
    Ok(PolylineCurve::new(out))
}

fn side_str(s: Side) -> &'static str {
    match s {
        Side::Left => "left",
        Side::Right => "right",
    }
}

fn side_from(v: Option<&Value>) -> Result<Side, IoError> {
    match v.and_then(Value::as_str) {
        Some("left") => Ok(Side::Left),
        Some("right") => Ok(Side::Right),
        _ => Err(IoError::BadField(
            "side must be \"left\" or \"right\"".into(),
        )),
    }
}

fn sign_from(v: &Value) -> Result<Sign, IoError> {
    match v.as_str() {
        Some("+") => Ok(Sign::Plus),
        Some("-") => Ok(Sign::Minus),
        _ => Err(IoError::BadField(format!(
            "sign must be \"+\" or \"-\", got {v}"
        ))),
    }
}

pub fn diagram_to_value(d: &CurveDiagram) -> Value {
    let code = d.code();
    json!({
        "visits": d.visits(),
        "signs": d
            .crossings()
            .iter()
            .map(|c| c.sign.as_char().to_string())
            .collect::<Vec<_>>(),
        "outer_arc": code.outer_arc,
        "outer_side": side_str(code.outer_side),
        "outer_face": d.outer_face(),
        "crossings": d
            .crossings()
            .iter()
            .map(|c| {
                json!({
                    "sign": c.sign.as_char().to_string(),
                    "first_visit": c.first_visit,
                    "second_visit": c.second_visit,
                    "index": c.index,
                })
            })
            .collect::<Vec<_>>(),
        "faces": d
            .faces()
            .iter()
            .map(|f| {
                json!({
                    "winding": f.winding,
                    "is_outer": f.is_outer,
                    "boundary": f
                        .boundary
                        .iter()
                        .map(|&(a, s)| json!([a, side_str(s)]))
                        .collect::<Vec<_>>(),
                })
            })
            .collect::<Vec<_>>(),
    })
}

pub fn diagram_to_json(d: &CurveDiagram) -> String {
    diagram_to_value(d).to_string()
}

pub fn diagram_from_json(text: &str) -> Result<CurveDiagram, IoError> {
    let v: Value = serde_json::from_str(text).map_err(|e| IoError::Json(e.to_string()))?;
    diagram_from_value(&v)
}

fn diagram_from_value(v: &Value) -> Result<CurveDiagram, IoError> {
    let visits = v
        .get("visits")
        .and_then(Value::as_array)
        .ok_or_else(|| IoError::BadField("diagram JSON needs a \"visits\" array".into()))?
        .iter()
        .map(|x| {
            x.as_u64()
                .map(|u| u as usize)
                .ok_or_else(|| IoError::BadField(format!("visit entry {x} is not an id")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let signs = v
        .get("signs")
        .and_then(Value::as_array)
        .ok_or_else(|| IoError::BadField("diagram JSON needs a \"signs\" array".into()))?
        .iter()
        .map(sign_from)
        .collect::<Result<Vec<_>, _>>()?;
    let outer_arc = v
        .get("outer_arc")
        .and_then(Value::as_u64)
        .ok_or_else(|| IoError::BadField("diagram JSON needs \"outer_arc\"".into()))?
        as usize;
    let outer_side = side_from(v.get("outer_side"))?;
    Ok(CurveDiagram::from_parts(
        visits,
        signs,
        (outer_arc, outer_side),
    )?)
}

pub fn report_to_json(r: &InvariantReport) -> String {
    serde_json::to_string(r).expect("report serializes")
}

pub fn report_from_json(text: &str) -> Result<InvariantReport, IoError> {
    serde_json::from_str(text).map_err(|e| IoError::Json(e.to_string()))
}

pub fn trace_to_json(t: &HomotopyTrace) -> String {
    json!({
        "seed": t.seed,
        "initial_jplus": t.initial_jplus,
        "initial": diagram_to_value(&t.initial),
        "steps": serde_json::to_value(&t.steps).expect("steps serialize"),
        "final": diagram_to_value(&t.final_diagram),
    })
    .to_string()
}

pub fn trace_from_json(text: &str) -> Result<HomotopyTrace, IoError> {
    let v: Value = serde_json::from_str(text).map_err(|e| IoError::Json(e.to_string()))?;
    let seed = v
        .get("seed")
        .and_then(Value::as_u64)
        .ok_or_else(|| IoError::BadField("trace JSON needs \"seed\"".into()))?;
    let initial_jplus = v
        .get("initial_jplus")
        .and_then(Value::as_i64)
        .ok_or_else(|| IoError::BadField("trace JSON needs \"initial_jplus\"".into()))?;
    let initial = diagram_from_value(
        v.get("initial")
            .ok_or_else(|| IoError::BadField("trace JSON needs \"initial\"".into()))?,
    )?;
    let final_diagram = diagram_from_value(
        v.get("final")
            .ok_or_else(|| IoError::BadField("trace JSON needs \"final\"".into()))?,
    )?;
    let steps: Vec<TraceStep> = serde_json::from_value(
        v.get("steps")
            .cloned()
            .ok_or_else(|| IoError::BadField("trace JSON needs \"steps\"".into()))?,
    )
    .map_err(|e| IoError::Json(e.to_string()))?;
    Ok(HomotopyTrace {
        seed,
        initial,
        initial_jplus,
        steps,
        final_diagram,
    })
}

/// Input accepted by the command line: geometry when coordinates are
/// present, otherwise a bare combinatorial diagram.
pub enum Ingested {
    Curve(ValidatedCurve),
    Diagram(CurveDiagram),
}

impl Ingested {
    /// The combinatorial diagram, tracing the curve first if needed.
    pub fn diagram(&self) -> CurveDiagram {
        match self {
            Ingested::Curve(vc) => CurveDiagram::from_geometry(vc).0,
            Ingested::Diagram(d) => d.clone(),
        }
    }
}

/// Sniff and parse `text`: a JSON object with `vertices` is a curve
/// (validated on the spot), one with `visits` is a diagram, anything else
/// is tried as a Gauss code.
pub fn ingest_str(text: &str) -> Result<Ingested, IoError> {
    let trimmed = text.trim();
    if trimmed.starts_with('{') {
        let v: Value = serde_json::from_str(trimmed).map_err(|e| IoError::Json(e.to_string()))?;
        let obj = v.as_object().ok_or(IoError::UnknownFormat)?;
        if obj.contains_key("vertices") {
            let curve = curve_from_value(&v)?;
            return Ok(Ingested::Curve(ValidatedCurve::validate(curve)?));
        }
        if obj.contains_key("visits") {
            return Ok(Ingested::Diagram(diagram_from_value(&v)?));
        }
        return Err(IoError::UnknownFormat);
    }
    if trimmed.is_empty() {
        return Err(IoError::UnknownFormat);
    }
    let code: GaussCode = trimmed.parse()?;
    Ok(Ingested::Diagram(CurveDiagram::from_code(&code)?))
}
