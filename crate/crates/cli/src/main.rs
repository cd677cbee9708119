//! Command-line front end. Exit codes: 0 on success, 1 on invalid input
//! or a failed verification, 2 when an internal identity check panics.

use anyhow::{anyhow, bail, Context, Result};
use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use jplus_core::constructions::{
    add_interior_loop, connected_sum, inner_loop_curve, interior_sum, standard_curve, tunnel_sum,
    ConnectMode, ConstructError, PredictedResult,
};
use jplus_core::diagram::Side;
use jplus_core::invariants::{self, InvariantReport};
use jplus_core::io::{self, Ingested};
use jplus_core::moves::{self, MoveSite};
use jplus_core::render::{render_svg, LabelLayer, RenderSpec};
use jplus_core::verify;
use jplus_core::{CurveDiagram, PolylineCurve, ValidatedCurve};
use serde_json::{json, Value};
use std::fs;
use std::io::{Read, Write};
use std::panic::catch_unwind;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(name = "jplus", version, about = "Plane curve diagrams and their invariants")]
struct Cli {
    /// Output format for reports and listings.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Random seed for walks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write output here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Cmd {
    /// Read a curve (JSON or code text) and echo its normalized form.
    Ingest {
        /// Input file; stdin when absent.
        input: Option<PathBuf>,
    },
    /// Invariant report for a curve or diagram.
    Invariants {
        input: Option<PathBuf>,
    },
    /// Build a member of a named curve family.
    Construct {
        #[command(subcommand)]
        what: ConstructCmd,
    },
    /// Combine curves and predict the resulting invariants.
    Sum {
        #[command(subcommand)]
        what: SumCmd,
    },
    /// Enumerate, apply, or randomly chain local moves.
    #[command(name = "move")]
    Move {
        #[command(subcommand)]
        what: MoveCmd,
    },
    /// Draw a curve as SVG.
    Render {
        input: Option<PathBuf>,
        /// Comma-separated layers: winding,index,rotation,orientation-arrows.
        #[arg(long)]
        labels: Option<String>,
    },
    /// Run the self-verification checks.
    Verify {
        /// Only checks whose name contains this substring.
        #[arg(long, value_name = "NAME")]
        filter: Option<String>,
    },
}

#[derive(Subcommand)]
enum ConstructCmd {
    /// Curve with the given turning number and the least crossings.
    Standard {
        #[arg(allow_negative_numbers = true)]
        j: i64,
    },
    /// Tightly nested curve with |j| turns.
    Innerloop {
        #[arg(allow_negative_numbers = true)]
        j: i64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Strict,
    Flip,
    Bridge,
}

impl From<ModeArg> for ConnectMode {
    fn from(m: ModeArg) -> ConnectMode {
        match m {
            ModeArg::Strict => ConnectMode::Strict,
            ModeArg::Flip => ConnectMode::Flip,
            ModeArg::Bridge => ConnectMode::Bridge,
        }
    }
}

#[derive(Subcommand)]
enum SumCmd {
    /// Join in the unbounded face.
    Connected {
        host: PathBuf,
        insert: PathBuf,
        /// Host arc on the unbounded face; scanned when absent.
        #[arg(long)]
        arc: Option<usize>,
        /// Insert arc on its unbounded face; scanned when absent.
        #[arg(long)]
        insert_arc: Option<usize>,
        #[arg(long, value_enum, default_value_t = ModeArg::Strict)]
        mode: ModeArg,
    },
    /// One new crossing inside a bounded host face.
    Interior {
        host: PathBuf,
        insert: PathBuf,
        /// Receiving host face; scanned when absent.
        #[arg(long)]
        face: Option<usize>,
        /// Host arc on that face; scanned when absent.
        #[arg(long)]
        arc: Option<usize>,
        #[arg(long)]
        insert_arc: Option<usize>,
    },
    /// Crossing-free corridor into a bounded host face.
    Tunnel {
        host: PathBuf,
        insert: PathBuf,
        #[arg(long)]
        face: Option<usize>,
        #[arg(long)]
        arc: Option<usize>,
        #[arg(long)]
        insert_arc: Option<usize>,
    },
    /// Hang a nested loop inside a face (the unbounded face is allowed).
    Loop {
        host: PathBuf,
        #[arg(long)]
        face: Option<usize>,
        #[arg(long)]
        arc: Option<usize>,
        /// Nesting depth of the loop.
        #[arg(long, default_value_t = 1)]
        depth: i64,
    },
}

#[derive(Subcommand)]
enum MoveCmd {
    /// List the legal move sites in a fixed order.
    List {
        input: Option<PathBuf>,
    },
    /// Apply the move at the given index of the `list` order.
    Apply {
        input: Option<PathBuf>,
        #[arg(long)]
        site: usize,
    },
    /// Seeded random walk; set JPLUS_MAX_CROSSINGS to change the cap.
    Walk {
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 20)]
        steps: usize,
    },
}

fn main() {
    let code = match catch_unwind(run) {
        Ok(code) => code,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<String>()
                .map(String::as_str)
                .or_else(|| payload.downcast_ref::<&str>().copied())
                .unwrap_or("opaque panic payload");
            complain(&format!("internal identity violated: {msg}"));
            2
        }
    };
    std::process::exit(code);
}

/// Writes the report to stdout. A reader that closes the pipe early is not
/// an error of ours; the caller keeps its exit code. Every other write
/// failure is returned for the caller to report.
fn emit(text: &str) -> std::io::Result<()> {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())?;
    if !text.is_empty() && !text.ends_with('\n') {
        out.write_all(b"\n")?;
    }
    out.flush()
}

/// Best-effort stderr line; a vanished reader must not turn into a panic.
fn complain(msg: &str) {
    let _ = writeln!(std::io::stderr(), "{msg}");
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(std::io::stdout(), "{e}");
                return 0;
            }
            let _ = write!(std::io::stderr(), "{e}");
            return 1;
        }
    };
    let out = cli.out.clone();
    match dispatch(cli) {
        Ok((text, code)) => {
            if let Some(path) = out {
                if let Err(e) = fs::write(&path, &text) {
                    complain(&format!("error: cannot write {}: {e}", path.display()));
                    return 1;
                }
            } else if let Err(e) = emit(&text) {
                if e.kind() != std::io::ErrorKind::BrokenPipe {
                    complain(&format!("error: cannot write output: {e}"));
                    return 1;
                }
            }
            code
        }
        Err(e) => {
            complain(&format!("error: {e:#}"));
            1
        }
    }
}

fn dispatch(cli: Cli) -> Result<(String, i32)> {
    let fmt = cli.format;
    match cli.cmd {
        Cmd::Ingest { input } => Ok((cmd_ingest(&input, fmt)?, 0)),
        Cmd::Invariants { input } => Ok((cmd_invariants(&input, fmt)?, 0)),
        Cmd::Construct { what } => Ok((cmd_construct(what, fmt)?, 0)),
        Cmd::Sum { what } => Ok((cmd_sum(what, fmt)?, 0)),
        Cmd::Move { what } => Ok((cmd_move(what, cli.seed, fmt)?, 0)),
        Cmd::Render { input, labels } => Ok((cmd_render(&input, labels.as_deref())?, 0)),
        Cmd::Verify { filter } => cmd_verify(filter.as_deref(), fmt),
    }
}

fn read_input(path: &Option<PathBuf>) -> Result<String> {
    match path {
        Some(p) if p.as_os_str() != "-" => {
            fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))
        }
        _ => {
            let mut buf = String::new();
            std::io::stdin()
                .read_to_string(&mut buf)
                .context("cannot read stdin")?;
            Ok(buf)
        }
    }
}

fn ingest(path: &Option<PathBuf>) -> Result<Ingested> {
    Ok(io::ingest_str(&read_input(path)?)?)
}

fn load_curve(path: &Path) -> Result<PolylineCurve> {
    let text =
        fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    match io::ingest_str(&text)? {
        Ingested::Curve(vc) => Ok(vc.curve().clone()),
        Ingested::Diagram(_) => bail!(
            "{} holds a bare diagram; this operation needs curve geometry",
            path.display()
        ),
    }
}

fn as_object(text: String) -> serde_json::Map<String, Value> {
    match serde_json::from_str(&text).expect("library JSON is well formed") {
        Value::Object(map) => map,
        _ => unreachable!("library JSON is an object"),
    }
}

fn cmd_ingest(input: &Option<PathBuf>, fmt: Format) -> Result<String> {
    match ingest(input)? {
        Ingested::Curve(vc) => {
            let (d, _) = CurveDiagram::from_geometry(&vc);
            match fmt {
                Format::Json => {
                    let mut obj = as_object(io::curve_to_json(vc.curve()));
                    obj.insert("kind".into(), json!("curve"));
                    obj.insert("crossings".into(), json!(d.n()));
                    obj.insert("code".into(), json!(d.code().to_string()));
                    Ok(Value::Object(obj).to_string())
                }
                Format::Text => Ok(format!(
                    "kind: curve\nvertices: {}\ncrossings: {}\ncode: {}\n",
                    vc.curve().len(),
                    d.n(),
                    d.code()
                )),
            }
        }
        Ingested::Diagram(d) => match fmt {
            Format::Json => {
                let mut obj = match io::diagram_to_value(&d) {
                    Value::Object(map) => map,
                    _ => unreachable!("diagram JSON is an object"),
                };
                obj.insert("kind".into(), json!("diagram"));
                obj.insert("code".into(), json!(d.code().to_string()));
                Ok(Value::Object(obj).to_string())
            }
            Format::Text => Ok(format!(
                "kind: diagram\ncrossings: {}\ncode: {}\n",
                d.n(),
                d.code()
            )),
        },
    }
}

fn report_text(r: &InvariantReport) -> String {
    let list = |v: &[i64]| {
        v.iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    };
    let mut s = String::new();
    s.push_str(&format!("double_points: {}\n", r.double_points));
    s.push_str(&format!("rotation: {}\n", r.rotation));
    if let Some(g) = r.rotation_geometric {
        s.push_str(&format!("rotation_geometric: {g}\n"));
    }
    s.push_str(&format!("jplus: {}\n", r.jplus));
    s.push_str(&format!("winding_multiset: {}\n", list(&r.winding_multiset)));
    s.push_str(&format!("index_multiset: {}\n", list(&r.index_multiset)));
    s.push_str(&format!("bound_slack: {}\n", r.bound_slack));
    s
}

fn cmd_invariants(input: &Option<PathBuf>, fmt: Format) -> Result<String> {
    let report = match ingest(input)? {
        Ingested::Curve(vc) => invariants::report_for_curve(&vc),
        Ingested::Diagram(d) => invariants::report_for_diagram(&d),
    };
    Ok(match fmt {
        Format::Json => io::report_to_json(&report),
        Format::Text => report_text(&report),
    })
}

fn curve_output(curve: &PolylineCurve, label: &str, fmt: Format) -> Result<String> {
    let vc = ValidatedCurve::validate(curve.clone())?;
    let report = invariants::report_for_curve(&vc);
    let (d, _) = CurveDiagram::from_geometry(&vc);
    Ok(match fmt {
        Format::Json => io::curve_to_json(curve),
        Format::Text => format!("{label}\ncode: {}\n{}", d.code(), report_text(&report)),
    })
}

fn cmd_construct(what: ConstructCmd, fmt: Format) -> Result<String> {
    match what {
        ConstructCmd::Standard { j } => {
            curve_output(&standard_curve(j), &format!("standard curve {j}"), fmt)
        }
        ConstructCmd::Innerloop { j } => {
            curve_output(&inner_loop_curve(j), &format!("nested loop curve {j}"), fmt)
        }
    }
}

fn predicted_output(r: &PredictedResult, fmt: Format) -> Result<String> {
    match fmt {
        Format::Json => {
            let mut obj = as_object(io::curve_to_json(&r.curve));
            obj.insert("formula".into(), json!(r.formula));
            obj.insert("predicted_jplus".into(), json!(r.predicted_jplus));
            obj.insert("predicted_rot".into(), json!(r.predicted_rot));
            Ok(Value::Object(obj).to_string())
        }
        Format::Text => {
            let vc = ValidatedCurve::validate(r.curve.clone())?;
            let report = invariants::report_for_curve(&vc);
            Ok(format!(
                "formula: {}\npredicted_jplus: {}\npredicted_rot: {}\n{}",
                r.formula,
                r.predicted_jplus,
                r.predicted_rot,
                report_text(&report)
            ))
        }
    }
}

/// Arcs bounding the unbounded face, in arc order.
fn outer_arcs(d: &CurveDiagram) -> Vec<usize> {
    (0..d.arc_count())
        .filter(|&a| {
            d.arc_face(a, Side::Left) == d.outer_face()
                || d.arc_face(a, Side::Right) == d.outer_face()
        })
        .collect()
}

fn face_arcs(d: &CurveDiagram, face: usize) -> Vec<usize> {
    let mut arcs: Vec<usize> = d.faces()[face].boundary.iter().map(|&(a, _)| a).collect();
    arcs.sort_unstable();
    arcs.dedup();
    arcs
}

/// Candidate host faces: the requested one, or all bounded faces first
/// and the unbounded face last when allowed.
fn candidate_faces(d: &CurveDiagram, face: Option<usize>, allow_outer: bool) -> Vec<usize> {
    if let Some(f) = face {
        return vec![f];
    }
    let mut faces: Vec<usize> = (0..d.faces().len())
        .filter(|&f| !d.faces()[f].is_outer)
        .collect();
    if allow_outer {
        faces.push(d.outer_face());
    }
    faces
}

fn scan<T>(
    label: &str,
    attempts: impl Iterator<Item = Result<T, ConstructError>>,
) -> Result<T> {
    let mut last: Option<ConstructError> = None;
    for attempt in attempts {
        match attempt {
            Ok(v) => return Ok(v),
            Err(e) => last = Some(e),
        }
    }
    match last {
        Some(e) => Err(anyhow!(e).context(format!("no {label} site worked"))),
        None => bail!("no candidate {label} site"),
    }
}

fn cmd_sum(what: SumCmd, fmt: Format) -> Result<String> {
    let result = match what {
        SumCmd::Connected {
            host,
            insert,
            arc,
            insert_arc,
            mode,
        } => {
            let h = load_curve(&host)?;
            let i = load_curve(&insert)?;
            let hd = CurveDiagram::from_geometry(&ValidatedCurve::validate(h.clone())?).0;
            let id = CurveDiagram::from_geometry(&ValidatedCurve::validate(i.clone())?).0;
            let arcs = arc.map_or_else(|| outer_arcs(&hd), |a| vec![a]);
            let iarcs = insert_arc.map_or_else(|| outer_arcs(&id), |a| vec![a]);
            scan(
                "attachment",
                arcs.iter().flat_map(|&a| {
                    let h = &h;
                    let i = &i;
                    let iarcs = &iarcs;
                    iarcs
                        .iter()
                        .map(move |&b| connected_sum(h, a, i, b, mode.into()))
                }),
            )?
        }
        SumCmd::Interior {
            host,
            insert,
            face,
            arc,
            insert_arc,
        } => sum_into_face(&host, &insert, face, arc, insert_arc, false)?,
        SumCmd::Tunnel {
            host,
            insert,
            face,
            arc,
            insert_arc,
        } => sum_into_face(&host, &insert, face, arc, insert_arc, true)?,
        SumCmd::Loop {
            host,
            face,
            arc,
            depth,
        } => {
            let h = load_curve(&host)?;
            let hd = CurveDiagram::from_geometry(&ValidatedCurve::validate(h.clone())?).0;
            let faces = candidate_faces(&hd, face, true);
            scan(
                "loop",
                faces.iter().flat_map(|&f| {
                    let h = &h;
                    let arcs = arc.map_or_else(|| face_arcs(&hd, f), |a| vec![a]);
                    arcs.into_iter()
                        .map(move |a| add_interior_loop(h, f, a, depth))
                }),
            )?
        }
    };
    predicted_output(&result, fmt)
}

fn sum_into_face(
    host: &Path,
    insert: &Path,
    face: Option<usize>,
    arc: Option<usize>,
    insert_arc: Option<usize>,
    tunnel: bool,
) -> Result<PredictedResult> {
    let h = load_curve(host)?;
    let i = load_curve(insert)?;
    let hd = CurveDiagram::from_geometry(&ValidatedCurve::validate(h.clone())?).0;
    let id = CurveDiagram::from_geometry(&ValidatedCurve::validate(i.clone())?).0;
    let faces = candidate_faces(&hd, face, false);
    let iarcs = insert_arc.map_or_else(|| outer_arcs(&id), |a| vec![a]);
    let label = if tunnel { "tunnel" } else { "junction" };
    scan(
        label,
        faces.iter().flat_map(|&f| {
            let h = &h;
            let i = &i;
            let iarcs = &iarcs;
            let arcs = arc.map_or_else(|| face_arcs(&hd, f), |a| vec![a]);
            arcs.into_iter().flat_map(move |a| {
                iarcs.iter().map(move |&b| {
                    if tunnel {
                        tunnel_sum(h, f, a, i, b)
                    } else {
                        interior_sum(h, f, a, i, b)
                    }
                })
            })
        }),
    )
}

fn site_text(site: &MoveSite) -> String {
    let delta = site.predicted_delta();
    match *site {
        MoveSite::DirectTangencyPositive { face, first, second } => format!(
            "create direct contact in face {face} between items {first} and {second} ({delta:+})"
        ),
        MoveSite::InverseTangencyPositive { face, first, second } => format!(
            "create inverse contact in face {face} between items {first} and {second} ({delta:+})"
        ),
        MoveSite::DirectTangencyNegative { face } => {
            format!("collapse direct lens {face} ({delta:+})")
        }
        MoveSite::InverseTangencyNegative { face } => {
            format!("collapse inverse lens {face} ({delta:+})")
        }
        MoveSite::TriplePoint { face, case } => {
            format!("flip triangle {face}, case {case} ({delta:+})")
        }
    }
}

fn cmd_move(what: MoveCmd, seed: u64, fmt: Format) -> Result<String> {
    match what {
        MoveCmd::List { input } => {
            let d = ingest(&input)?.diagram();
            let sites = moves::enumerate_moves(&d);
            Ok(match fmt {
                Format::Json => {
                    let rows: Vec<Value> = sites
                        .iter()
                        .enumerate()
                        .map(|(i, s)| {
                            json!({
                                "index": i,
                                "delta_jplus": s.predicted_delta(),
                                "site": serde_json::to_value(s).expect("sites serialize"),
                            })
                        })
                        .collect();
                    Value::Array(rows).to_string()
                }
                Format::Text => {
                    let mut s = String::new();
                    for (i, site) in sites.iter().enumerate() {
                        s.push_str(&format!("{i}: {}\n", site_text(site)));
                    }
                    s
                }
            })
        }
        MoveCmd::Apply { input, site } => {
            let d = ingest(&input)?.diagram();
            let sites = moves::enumerate_moves(&d);
            let &chosen = sites
                .get(site)
                .ok_or_else(|| anyhow!("no site {site} ({} sites)", sites.len()))?;
            let (next, delta) = moves::apply_move(&d, chosen)?;
            Ok(match fmt {
                Format::Json => {
                    let mut obj = match io::diagram_to_value(&next) {
                        Value::Object(map) => map,
                        _ => unreachable!("diagram JSON is an object"),
                    };
                    obj.insert("delta_jplus".into(), json!(delta));
                    obj.insert("jplus".into(), json!(invariants::jplus(&next)));
                    Value::Object(obj).to_string()
                }
                Format::Text => format!(
                    "applied: {}\ndelta_jplus: {delta:+}\njplus: {}\ncode: {}\n",
                    site_text(&chosen),
                    invariants::jplus(&next),
                    next.code()
                ),
            })
        }
        MoveCmd::Walk { input, steps } => {
            let d = ingest(&input)?.diagram();
            let trace = moves::random_homotopy(&d, steps, seed);
            Ok(match fmt {
                Format::Json => io::trace_to_json(&trace),
                Format::Text => {
                    let mut s = format!(
                        "seed: {}\ninitial jplus: {}\n",
                        trace.seed, trace.initial_jplus
                    );
                    for (i, step) in trace.steps.iter().enumerate() {
                        s.push_str(&format!(
                            "{i}: {} -> {}\n",
                            site_text(&step.site),
                            step.running_jplus
                        ));
                    }
                    s.push_str(&format!(
                        "final jplus: {}\nfinal code: {}\n",
                        trace.final_jplus(),
                        trace.final_diagram.code()
                    ));
                    s
                }
            })
        }
    }
}

fn cmd_render(input: &Option<PathBuf>, labels: Option<&str>) -> Result<String> {
    let vc = match ingest(input)? {
        Ingested::Curve(vc) => vc,
        Ingested::Diagram(_) => bail!("input is a bare diagram; rendering needs curve geometry"),
    };
    let mut spec = RenderSpec::new(vc);
    if let Some(list) = labels {
        spec.layers = LabelLayer::parse_list(list)?;
    }
    Ok(render_svg(&spec)?)
}

fn cmd_verify(filter: Option<&str>, fmt: Format) -> Result<(String, i32)> {
    let report = verify::verify_corpus(filter);
    let code = if report.any_panicked() {
        2
    } else if report.all_passed() {
        0
    } else {
        1
    };
    let text = match fmt {
        Format::Json => report.to_json(),
        Format::Text => {
            let mut s = String::new();
            for c in &report.checks {
                let status = if c.passed {
                    "PASS"
                } else if c.panicked {
                    "PANIC"
                } else {
                    "FAIL"
                };
                s.push_str(&format!("{}: {status} ({})\n", c.name, c.detail));
            }
            let passed = report.checks.iter().filter(|c| c.passed).count();
            s.push_str(&format!("{passed}/{} checks passed\n", report.checks.len()));
            s
        }
    };
    Ok((text, code))
}
