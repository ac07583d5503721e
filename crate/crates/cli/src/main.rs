use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use perimax::deformation::{continue_path, PathOptions, Termination};
use perimax::fixtures::{self, FixtureSpec};
use perimax::json::{framework_to_json, parse_framework};
use perimax::lifting::{classify_folds, export_terrain, lifting_with_residuals};
use perimax::ppt::{certify_ppt, find_rigidifying_edges, insert_edge_orbit};
use perimax::relax::{relax, ultrarigidity_probe, Sublattice};
use perimax::rigidity::{check_periodic_stress, count_identity_check, flex_space, periodic_stress_space};
use perimax::svg::export_svg;
use perimax::topology::{check_noncrossing, trace_faces};
use perimax::{ErrorClass, PeriodicFramework, TileRange};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "perimax", version, about = "Rigidity, liftings and deformations of planar periodic frameworks")]
struct Cli {
    /// Suppress log lines on stderr; JSON reports are still printed.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Counts, spectral dimensions and count identities.
    Analyze { file: PathBuf },
    /// Pointed pseudo-triangulation certificate.
    Ppt { file: PathBuf },
    /// Periodic stress basis, or a check of a given stress.
    Stress {
        file: PathBuf,
        /// Comma-separated stress values, one per edge orbit.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        values: Option<Vec<f64>>,
    },
    /// Lift a periodic stress to a terrain and write it as OBJ.
    Lift {
        file: PathBuf,
        #[arg(long, default_value_t = 0)]
        stress_index: usize,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        c0: f64,
        #[arg(long, default_value = "2x2", value_parser = parse_tiles)]
        tiles: TileRange,
        #[arg(long)]
        out: PathBuf,
    },
    /// Draw a block of tiles as SVG, faces coloured by orbit.
    Svg {
        file: PathBuf,
        #[arg(long, default_value = "3x3", value_parser = parse_tiles)]
        tiles: TileRange,
        #[arg(long)]
        out: PathBuf,
    },
    /// Unfold onto a sublattice given as `a,b,0,d`.
    Relax {
        file: PathBuf,
        #[arg(long, value_parser = parse_matrix)]
        matrix: Sublattice,
        #[arg(long)]
        out: PathBuf,
    },
    /// Flex counts on every sublattice up to an index.
    Ultra {
        file: PathBuf,
        #[arg(long, default_value_t = 4)]
        max_index: usize,
    },
    /// Insert the top-ranked rigidifying edge orbit.
    Rigidify {
        file: PathBuf,
        #[arg(long, default_value_t = perimax::ppt::DEFAULT_CUTOFF)]
        cutoff: i64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Follow the one-parameter flex of a pseudo-triangulation.
    Deform(DeformArgs),
    /// Write a built-in example framework.
    Fixture {
        name: String,
        #[arg(long, allow_hyphen_values = true)]
        theta: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct DeformArgs {
    file: PathBuf,
    #[arg(long, default_value_t = 100)]
    steps: usize,
    #[arg(long, default_value_t = 1e-2)]
    ds: f64,
    #[arg(long, default_value_t = 2)]
    cutoff: i64,
    /// Verdicts to compute per sample.
    #[arg(long, value_delimiter = ',', default_value = "expansive,auxetic")]
    check: Vec<String>,
    /// Walk against the expansive direction.
    #[arg(long)]
    reverse: bool,
    /// Keep going through pointedness and corner events.
    #[arg(long)]
    through_events: bool,
    #[arg(long)]
    out: PathBuf,
}

fn parse_tiles(s: &str) -> Result<TileRange, String> {
    let (r, c) = s.split_once(['x', 'X']).ok_or("expected RxC, e.g. 3x3")?;
    let rows: i64 = r.trim().parse().map_err(|_| format!("bad row count '{r}'"))?;
    let cols: i64 = c.trim().parse().map_err(|_| format!("bad column count '{c}'"))?;
    if rows < 1 || cols < 1 {
        return Err("tile counts must be positive".into());
    }
    Ok(TileRange::grid(rows, cols))
}

fn parse_matrix(s: &str) -> Result<Sublattice, String> {
    let e: Vec<i64> = s.split(',').map(|x| x.trim().parse::<i64>()).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    let e: [i64; 4] = e.try_into().map_err(|_| "expected four integers a,b,0,d".to_string())?;
    Sublattice::from_entries(e).map_err(|e| e.to_string())
}

struct Ctx {
    quiet: bool,
}

impl Ctx {
    fn log(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }

    fn write(&self, path: &Path, text: &str) -> anyhow::Result<()> {
        std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
        self.log(format!("wrote {}", path.display()));
        Ok(())
    }
}

fn load(path: &Path) -> anyhow::Result<PeriodicFramework> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(parse_framework(&text)?)
}

/// Outcome of a command: the JSON report and whether it ended in a numerical failure.
type Report = (Value, bool);

fn run(cli: Cli) -> anyhow::Result<Report> {
    let ctx = Ctx { quiet: cli.quiet };
    let ok = |v: Value| Ok((v, false));
    match cli.command {
        Command::Analyze { file } => {
            let fw = load(&file)?;
            let counts = count_identity_check(&fw)?;
            let report = flex_space(&fw).report;
            let crossing = check_noncrossing(&fw);
            let faces = if crossing.noncrossing { Some(trace_faces(&fw)?) } else { None };
            ok(json!({
                "n": fw.n(),
                "m": fw.m(),
                "n_faces": faces.as_ref().map(|f| f.n_faces()),
                "euler": faces.as_ref().map(|f| f.euler()),
                "sigma": counts.sigma,
                "delta": counts.delta,
                "phi": counts.phi,
                "stress_flex_identity": counts.stress_flex_identity,
                "reduced_identity": counts.reduced_identity,
                "noncrossing": crossing.noncrossing,
                "rank": report.rank,
                "gap_ratio": report.gap_ratio,
            }))
        }
        Command::Ppt { file } => ok(serde_json::to_value(certify_ppt(&load(&file)?)?)?),
        Command::Stress { file, values } => {
            let fw = load(&file)?;
            match values {
                None => {
                    let basis = periodic_stress_space(&fw);
                    let folds: Vec<_> = basis.iter().map(|s| classify_folds(&s.values)).collect();
                    ok(json!({ "dimension": basis.len(), "basis": basis, "folds": folds }))
                }
                Some(s) => {
                    let check = check_periodic_stress(&fw, &s)?;
                    let lifting = if check.equilibrium && check_noncrossing(&fw).noncrossing {
                        let fc = trace_faces(&fw)?;
                        Some(match lifting_with_residuals(&fw, &fc, &s, 0.0) {
                            Ok((_, r)) => json!({ "liftable": true, "residuals": r }),
                            Err(e) => json!({ "liftable": false, "reason": e.to_string() }),
                        })
                    } else {
                        None
                    };
                    ok(json!({ "check": check, "folds": classify_folds(&s), "lifting": lifting }))
                }
            }
        }
        Command::Lift { file, stress_index, c0, tiles, out } => {
            let fw = load(&file)?;
            let fc = trace_faces(&fw)?;
            let basis = periodic_stress_space(&fw);
            let Some(s) = basis.get(stress_index) else {
                bail!(perimax::Error::IndexOutOfRange { what: "stress", index: stress_index, len: basis.len() });
            };
            let (lifting, residuals) = lifting_with_residuals(&fw, &fc, &s.values, c0)?;
            let mesh = export_terrain(&fw, &fc, &lifting, &tiles)?;
            ctx.write(&out, &mesh.to_obj())?;
            ok(json!({
                "stress": s.values,
                "lifting": lifting,
                "residuals": residuals,
                "folds": classify_folds(&s.values),
                "mesh": { "vertices": mesh.vertices.len(), "triangles": mesh.triangles.len() },
            }))
        }
        Command::Svg { file, tiles, out } => {
            let fw = load(&file)?;
            let fc = if check_noncrossing(&fw).noncrossing { trace_faces(&fw).ok() } else { None };
            if fc.is_none() {
                ctx.log("faces could not be traced; drawing edges only");
            }
            ctx.write(&out, &export_svg(&fw, fc.as_ref(), &tiles)?)?;
            ok(json!({ "out": out, "faces": fc.map(|f| f.n_faces()) }))
        }
        Command::Relax { file, matrix, out } => {
            let fw = load(&file)?;
            let u = relax(&fw, matrix)?;
            ctx.write(&out, &framework_to_json(&u.framework))?;
            let r = flex_space(&u.framework).report;
            ok(json!({
                "sublattice": matrix.to_string(),
                "index": matrix.index(),
                "n": u.framework.n(),
                "m": u.framework.m(),
                "sigma": r.sigma,
                "delta": r.delta,
                "phi": r.phi,
            }))
        }
        Command::Ultra { file, max_index } => ok(serde_json::to_value(ultrarigidity_probe(&load(&file)?, max_index)?)?),
        Command::Rigidify { file, cutoff, out } => {
            let fw = load(&file)?;
            let cands = find_rigidifying_edges(&fw, cutoff)?;
            let top = cands[0];
            let next = insert_edge_orbit(&fw, &top)?;
            ctx.write(&out, &framework_to_json(&next))?;
            let r = flex_space(&next).report;
            ok(json!({ "inserted": top, "candidates": cands, "sigma": r.sigma, "phi": r.phi }))
        }
        Command::Deform(a) => {
            let fw = load(&a.file)?;
            for c in &a.check {
                if c != "expansive" && c != "auxetic" {
                    bail!(perimax::Error::InvalidParameter(format!("unknown check '{c}'")));
                }
            }
            let opts = PathOptions {
                steps: a.steps,
                ds: a.ds,
                cutoff: a.cutoff,
                check_expansive: a.check.iter().any(|c| c == "expansive"),
                check_auxetic: a.check.iter().any(|c| c == "auxetic"),
                stop_at_event: !a.through_events,
                reverse: a.reverse,
                allow_non_ppt: false,
            };
            let path = continue_path(&fw, &opts)?;
            ctx.write(&a.out, &serde_json::to_string_pretty(&path)?)?;
            let failed = matches!(path.termination, Termination::CorrectorFailure { .. });
            if failed {
                ctx.log("corrector failed to converge; path truncated");
            }
            let summary = json!({
                "samples": path.samples.len(),
                "termination": path.termination,
                "length_drift": path.length_drift(&fw),
                "expansive_cutoff": a.cutoff,
                "note": "expansiveness is checked on vertex pairs within the cutoff only",
            });
            Ok((summary, failed))
        }
        Command::Fixture { name, theta, out } => {
            let kind = FixtureSpec::from_name(&name, theta)?;
            let text = framework_to_json(&fixtures::fixture(&kind)?);
            match out {
                Some(path) => {
                    ctx.write(&path, &text)?;
                    ok(json!({ "fixture": kind, "out": path }))
                }
                None => ok(serde_json::from_str(&text)?),
            }
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<perimax::Error>().map(|e| e.class()) {
        Some(ErrorClass::Numerical) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok((report, numerical_failure)) => {
            println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            ExitCode::from(if numerical_failure { 3 } else { 0 })
        }
        Err(err) => {
            let code = exit_code(&err);
            let kind = if code == 3 { "numerical" } else { "validation" };
            println!("{}", json!({ "error": format!("{err:#}"), "kind": kind }));
            eprintln!("error: {err:#}");
            ExitCode::from(code)
        }
    }
}
