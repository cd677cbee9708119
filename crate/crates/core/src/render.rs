//! Deterministic SVG pictures of geometric curves with label layers.
//!
//! The curve is drawn as one closed path; layers add face winding numbers
//! (one per face, at a sampled interior point), crossing indices (bold
//! italic, at the crossing), the rotation number as a caption, and an
//! orientation arrow on the first edge. Output depends only on the input:
//! fixed element order, fixed ids, no timestamps, so identical inputs give
//! byte-identical documents.

use crate::diagram::CurveDiagram;
use crate::exact::Point;
use crate::geometry::ValidatedCurve;
use crate::invariants;
use std::fmt::Write;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("input carries no geometry; rendering needs coordinates")]
    NoGeometry,
    #[error("unknown label layer {0:?}")]
    UnknownLayer(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum LabelLayer {
    Winding,
    Index,
    Rotation,
    OrientationArrows,
}

impl LabelLayer {
    pub const ALL: [LabelLayer; 4] = [
        LabelLayer::Winding,
        LabelLayer::Index,
        LabelLayer::Rotation,
        LabelLayer::OrientationArrows,
    ];

    /// Parse a comma-separated layer list like `winding,index`.
    pub fn parse_list(text: &str) -> Result<Vec<LabelLayer>, RenderError> {
        let mut layers = Vec::new();
        for item in text.split(',') {
            let item = item.trim();
            if item.is_empty() {
                continue;
            }
            let layer = match item {
                "winding" => LabelLayer::Winding,
                "index" => LabelLayer::Index,
                "rotation" => LabelLayer::Rotation,
                "orientation-arrows" => LabelLayer::OrientationArrows,
                other => return Err(RenderError::UnknownLayer(other.to_string())),
            };
            if !layers.contains(&layer) {
                layers.push(layer);
            }
        }
        Ok(layers)
    }
}

/// What to draw. `curve` is `None` when only combinatorics are known,
/// which [`render_svg`] rejects.
pub struct RenderSpec {
    pub curve: Option<ValidatedCurve>,
    pub layers: Vec<LabelLayer>,
    pub stroke_width: f64,
    pub size: u32,
}

impl RenderSpec {
    pub fn new(curve: ValidatedCurve) -> RenderSpec {
        RenderSpec {
            curve: Some(curve),
            layers: Vec::new(),
            stroke_width: 2.0,
            size: 600,
        }
    }
}

struct Canvas {
    scale: f64,
    offset_x: f64,
    offset_y: f64,
    size: f64,
}

impl Canvas {
    /// Map the exact bounding box into the canvas with a margin,
    /// preserving aspect ratio and flipping y so up stays up.
    fn fit(curve: &ValidatedCurve, size: u32) -> Canvas {
        let (lo, hi) = curve.curve().bbox();
        let (lx, ly) = lo.to_f64();
        let (hx, hy) = hi.to_f64();
        let size = size as f64;
        let margin = size / 10.0;
        let span = (hx - lx).max(hy - ly).max(1e-9);
        let scale = (size - 2.0 * margin) / span;
        let offset_x = margin + (size - 2.0 * margin - (hx - lx) * scale) / 2.0 - lx * scale;
        let offset_y = size - margin - (size - 2.0 * margin - (hy - ly) * scale) / 2.0 + ly * scale;
        Canvas {
            scale,
            offset_x,
            offset_y,
            size,
        }
    }

    fn map(&self, p: &Point) -> (f64, f64) {
        let (x, y) = p.to_f64();
        (x * self.scale + self.offset_x, self.offset_y - y * self.scale)
    }
}

fn fmt_coord(v: f64) -> String {
    // Two decimals, with negative zero normalized for stable bytes.
    let s = format!("{:.2}", v);
    if s == "-0.00" {
        "0.00".to_string()
    } else {
        s
    }
}

fn text_label(out: &mut String, class: &str, x: f64, y: f64, font: f64, style: &str, body: &str) {
    write!(
        out,
        "<text class=\"{}\" x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"{:.0}\" \
         text-anchor=\"middle\" dominant-baseline=\"middle\"{}>{}</text>\n",
        class,
        fmt_coord(x),
        fmt_coord(y),
        font,
        style,
        body
    )
    .expect("string write");
}

/// Render `spec` to a standalone SVG document.
pub fn render_svg(spec: &RenderSpec) -> Result<String, RenderError> {
    let vc = spec.curve.as_ref().ok_or(RenderError::NoGeometry)?;
    let (diag, geom) = CurveDiagram::from_geometry(vc);
    let canvas = Canvas::fit(vc, spec.size);
    let font = (spec.size as f64 / 30.0).max(10.0);

    let mut out = String::new();
    write!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{0}\" viewBox=\"0 0 {0} {0}\">\n",
        spec.size
    )
    .expect("string write");

    let arrows = spec.layers.contains(&LabelLayer::OrientationArrows);
    if arrows {
        out.push_str(
            "<defs><marker id=\"arrow\" viewBox=\"0 0 10 10\" refX=\"5\" refY=\"5\" \
             markerWidth=\"6\" markerHeight=\"6\" orient=\"auto-start-reverse\">\
             <path d=\"M 0 0 L 10 5 L 0 10 z\" fill=\"black\"/></marker></defs>\n",
        );
    }

    let verts = &vc.curve().vertices;
    let mut d = String::new();
    for (i, p) in verts.iter().enumerate() {
        let (x, y) = canvas.map(p);
        let cmd = if i == 0 { 'M' } else { 'L' };
        write!(d, "{} {} {} ", cmd, fmt_coord(x), fmt_coord(y)).expect("string write");
    }
    d.push('Z');
    write!(
        out,
        "<path id=\"curve\" d=\"{}\" fill=\"none\" stroke=\"black\" stroke-width=\"{}\" \
         stroke-linejoin=\"round\"/>\n",
        d, spec.stroke_width
    )
    .expect("string write");

    if arrows {
        // A short stub along the middle of edge 0 carries the arrowhead.
        let dir = vc.curve().edge_dir(0);
        let (dx, dy) = dir.to_f64();
        let len = (dx * dx + dy * dy).sqrt().max(1e-9);
        let (ax, ay) = canvas.map(&verts[0]);
        let (bx, by) = canvas.map(&verts[1 % verts.len()]);
        let (mx, my) = ((ax + bx) / 2.0, (ay + by) / 2.0);
        let (ux, uy) = (dx / len, -dy / len);
        write!(
            out,
            "<path id=\"orientation\" d=\"M {} {} L {} {}\" stroke=\"black\" \
             stroke-width=\"{}\" marker-end=\"url(#arrow)\"/>\n",
            fmt_coord(mx - ux),
            fmt_coord(my - uy),
            fmt_coord(mx + ux),
            fmt_coord(my + uy),
            spec.stroke_width
        )
        .expect("string write");
    }

    if spec.layers.contains(&LabelLayer::Winding) {
        for face in 0..diag.faces().len() {
            if let Some(p) = geom.sample_point_in_face(&diag, face) {
                let (x, y) = canvas.map(&p);
                text_label(
                    &mut out,
                    "winding",
                    x,
                    y,
                    font,
                    "",
                    &diag.faces()[face].winding.to_string(),
                );
            }
        }
    }

    if spec.layers.contains(&LabelLayer::Index) {
        for (c, at) in diag.crossings().iter().zip(geom.crossing_points()) {
            let (x, y) = canvas.map(at);
            text_label(
                &mut out,
                "index",
                x,
                y - font * 0.9,
                font,
                " font-style=\"italic\" font-weight=\"bold\"",
                &c.index.to_string(),
            );
        }
    }

    if spec.layers.contains(&LabelLayer::Rotation) {
        let rot = invariants::rotation(&diag);
        text_label(
            &mut out,
            "rotation",
            canvas.size / 2.0,
            font,
            font,
            "",
            &format!("rotation {}", rot),
        );
    }

    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{single_and_double_loop_curve, standard_curve};
    use crate::geometry::PolylineCurve;

    fn validated(c: PolylineCurve) -> ValidatedCurve {
        ValidatedCurve::validate(c).unwrap()
    }

    fn labels_of(svg: &str, class: &str) -> Vec<String> {
        let tag = format!("class=\"{class}\"");
        let mut found: Vec<String> = svg
            .lines()
            .filter(|l| l.contains(&tag))
            .map(|l| {
                let open = l.find('>').unwrap();
                let close = l[open..].find('<').unwrap() + open;
                l[open + 1..close].to_string()
            })
            .collect();
        found.sort();
        found
    }

    #[test]
    fn figure_eight_with_all_layers_shows_every_label() {
        let mut spec = RenderSpec::new(validated(standard_curve(0)));
        spec.layers = LabelLayer::ALL.to_vec();
        let svg = render_svg(&spec).unwrap();
        assert_eq!(labels_of(&svg, "winding"), vec!["-1", "0", "1"]);
        assert_eq!(labels_of(&svg, "index"), vec!["0"]);
        assert_eq!(labels_of(&svg, "rotation"), vec!["rotation 0"]);
        assert!(svg.contains("marker id=\"arrow\""));
    }

    #[test]
    fn worked_example_winding_layer() {
        let mut spec = RenderSpec::new(validated(single_and_double_loop_curve()));
        spec.layers = vec![LabelLayer::Winding];
        let svg = render_svg(&spec).unwrap();
        assert_eq!(labels_of(&svg, "winding"), vec!["0", "1", "2", "2", "3"]);
        assert!(labels_of(&svg, "index").is_empty());
    }

    #[test]
    fn bare_square_is_a_single_closed_path() {
        let square = validated(PolylineCurve::new(vec![
            Point::int(0, 0),
            Point::int(4, 0),
            Point::int(4, 4),
            Point::int(0, 4),
        ]));
        let svg = render_svg(&RenderSpec::new(square)).unwrap();
        assert_eq!(svg.matches("<path").count(), 1);
        assert!(svg.contains("Z\""));
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn output_is_byte_stable() {
        let mut spec = RenderSpec::new(validated(standard_curve(3)));
        spec.layers = LabelLayer::ALL.to_vec();
        let a = render_svg(&spec).unwrap();
        let b = render_svg(&spec).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn missing_geometry_is_an_error() {
        let spec = RenderSpec {
            curve: None,
            layers: Vec::new(),
            stroke_width: 2.0,
            size: 600,
        };
        assert!(matches!(render_svg(&spec), Err(RenderError::NoGeometry)));
    }

    #[test]
    fn layer_lists_parse() {
        assert_eq!(
            LabelLayer::parse_list("winding, index,orientation-arrows").unwrap(),
            vec![
                LabelLayer::Winding,
                LabelLayer::Index,
                LabelLayer::OrientationArrows
            ]
        );
        assert_eq!(LabelLayer::parse_list("").unwrap(), vec![]);
        assert!(matches!(
            LabelLayer::parse_list("winding,bogus"),
            Err(RenderError::UnknownLayer(_))
        ));
    }
}
