//! Command-line front end: scenarios, net and end checks, cage retraction,
//! disk fillings and single geodesics.
//!
//! Exit codes: 0 pass, 1 check failure, 2 usage or parse error, 3 numerical
//! failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use flowerflow::ends::check_local_convexity;
use flowerflow::manifold::{Manifold, TangentVector};
use flowerflow::nets::{cage_to_flower, point_to_json, NetDocument};
use flowerflow::scenario::{run_batch, Mode, Scenario};
use flowerflow::Error;

#[derive(Parser)]
#[command(
    name = "flowerflow",
    version,
    about = "Curve-shortening flow on geodesic flowers and cages"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario or a directory of them.
    #[command(subcommand)]
    Flow(FlowCmd),
    /// Measure a net file.
    #[command(subcommand)]
    Net(NetCmd),
    /// Check local convexity of a scenario's ends.
    #[command(subcommand)]
    Ends(EndsCmd),
    /// Retract a cage towards a flower.
    #[command(subcommand)]
    Cage(CageCmd),
    /// Fill a closed curve by its flow.
    #[command(subcommand)]
    Fill(FillCmd),
    /// Geodesics of a manifold.
    #[command(subcommand)]
    Manifold(ManifoldCmd),
}

#[derive(Subcommand)]
enum FlowCmd {
    Run {
        scenario: PathBuf,
        /// Directory for artifacts.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    Batch {
        dir: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum NetCmd {
    Check {
        net: PathBuf,
        /// Manifold id or JSON block, when the file does not name one.
        #[arg(long)]
        manifold: Option<String>,
        #[arg(long, default_value_t = 1e-8)]
        tol_stat: f64,
        #[arg(long, default_value_t = 1e-6)]
        tol_geo: f64,
    },
}

#[derive(Subcommand)]
enum EndsCmd {
    Check {
        scenario: PathBuf,
        /// Pairs per separating curve; defaults to the scenario's setting.
        #[arg(long)]
        samples: Option<usize>,
    },
}

#[derive(Subcommand)]
enum CageCmd {
    Retract {
        cage: PathBuf,
        #[arg(long)]
        t: f64,
        #[arg(long)]
        manifold: Option<String>,
    },
}

#[derive(Subcommand)]
enum FillCmd {
    Disk {
        scenario: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum ManifoldCmd {
    /// Minimizing geodesic between two points, or a geodesic shot from one.
    Geodesic {
        /// Manifold id or JSON block.
        manifold: String,
        #[arg(long, num_args = 2, allow_negative_numbers = true, value_names = ["A", "B"])]
        from: Vec<f64>,
        #[arg(long, num_args = 2, allow_negative_numbers = true, value_names = ["A", "B"], conflicts_with = "velocity")]
        to: Option<Vec<f64>>,
        #[arg(long, num_args = 2, allow_negative_numbers = true, value_names = ["A", "B"], requires = "time")]
        velocity: Option<Vec<f64>>,
        #[arg(long)]
        time: Option<f64>,
        /// Points sampled along a minimizing geodesic.
        #[arg(long, default_value_t = 16)]
        samples: usize,
    },
}

fn code_of(e: &Error) -> u8 {
    if e.is_numerical() {
        3
    } else {
        2
    }
}

fn fail(e: Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(code_of(&e))
}

fn print(v: &Value) {
    println!(
        "{}",
        serde_json::to_string_pretty(v).expect("JSON values serialize")
    );
}

fn read_json(path: &Path) -> Result<Value, Error> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Invalid {
        path: String::new(),
        message: format!("malformed JSON in {}: {e}", path.display()),
    })
}

fn manifold_for(doc: &Value, flag: Option<&str>) -> Result<Manifold, Error> {
    match flag {
        Some(s) => Manifold::from_json(
            &serde_json::from_str(s).unwrap_or_else(|_| Value::String(s.into())),
        ),
        None => NetDocument::manifold_of(doc)?.ok_or_else(|| Error::Invalid {
            path: "manifold".into(),
            message: "missing; name it in the file or pass --manifold".into(),
        }),
    }
}

fn run_scenario(s: &Scenario, out: &Path) -> ExitCode {
    match s.run(Some(out)) {
        Ok(r) => {
            print(&r.summary);
            ExitCode::from(r.status.exit_code() as u8)
        }
        Err(e) => fail(e),
    }
}

fn flow(cmd: FlowCmd) -> ExitCode {
    match cmd {
        FlowCmd::Run { scenario, out } => match Scenario::load(&scenario) {
            Ok(s) => run_scenario(&s, &out),
            Err(e) => fail(e),
        },
        FlowCmd::Batch { dir, jobs, out } => match run_batch(&dir, jobs, Some(&out)) {
            Ok(report) => {
                print!("{}", report.table());
                for r in &report.rows {
                    if let Some(msg) = &r.message {
                        eprintln!("{}: {msg}", r.file.display());
                    }
                }
                ExitCode::from(report.exit_code() as u8)
            }
            Err(e) => fail(e),
        },
    }
}

fn net_check(
    path: &Path,
    manifold: Option<&str>,
    tol_stat: f64,
    tol_geo: f64,
) -> Result<ExitCode, Error> {
    let v = read_json(path)?;
    let m = manifold_for(&v, manifold)?;
    let doc = NetDocument::from_json(&m, &v)?;
    let x = doc.measure(&m)?;
    let ok = x.is_geodesic_net(tol_stat, tol_geo);
    print(&json!({"measurement": x, "geodesic_net": ok, "tol_stat": tol_stat, "tol_geo": tol_geo}));
    Ok(ExitCode::from(if ok { 0 } else { 1 }))
}

fn ends_check(path: &Path, samples: Option<usize>) -> Result<ExitCode, Error> {
    let s = Scenario::load(path)?;
    let d = s.ends.as_ref().ok_or_else(|| Error::Invalid {
        path: "ends".into(),
        message: "the scenario declares no ends".into(),
    })?;
    let n = samples.unwrap_or(s.convexity_samples);
    let mut reports = Vec::new();
    let mut ok = true;
    for (i, sigma) in d.sigmas.iter().enumerate() {
        let r = check_local_convexity(&s.manifold, d, i, n, s.seed)?;
        ok &= r.pass && r.valid;
        reports.push(json!({"name": sigma.name, "level": sigma.level, "report": r}));
    }
    print(
        &json!({"scenario": s.name, "delta": d.delta, "seed": s.seed, "pass": ok, "sigma": reports}),
    );
    Ok(ExitCode::from(if ok { 0 } else { 1 }))
}

fn cage_retract(path: &Path, t: f64, manifold: Option<&str>) -> Result<ExitCode, Error> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Invalid {
            path: "--t".into(),
            message: "must lie in [0, 1]".into(),
        });
    }
    let v = read_json(path)?;
    let m = manifold_for(&v, manifold)?;
    let NetDocument::Cage(cage) = NetDocument::from_json(&m, &v)? else {
        return Err(Error::Invalid {
            path: "cage".into(),
            message: "expected a cage file".into(),
        });
    };
    let out = cage_to_flower(&m, &cage, t)?;
    let lengths: Vec<Value> = out
        .edge_lengths(&m)?
        .iter()
        .map(|((a, b), l)| json!({"edge": format!("{a}-{b}"), "length": l}))
        .collect();
    let mut doc = NetDocument::Cage(out).to_json(&m);
    doc["t"] = json!(t);
    doc["edge_lengths"] = Value::Array(lengths);
    print(&doc);
    Ok(ExitCode::SUCCESS)
}

fn fill_disk(path: &Path, out: &Path) -> Result<ExitCode, Error> {
    let mut s = Scenario::load(path)?;
    match &s.initial {
        NetDocument::Flower(f) if f.petals.len() == 1 => {}
        _ => {
            return Err(Error::Invalid {
                path: "initial_net".into(),
                message: "a filling needs a closed curve (one petal)".into(),
            })
        }
    }
    if s.config.is_none() {
        return Err(Error::Invalid {
            path: "flow_config".into(),
            message: "missing".into(),
        });
    }
    s.mode = Mode::Fill;
    Ok(run_scenario(&s, out))
}

fn pair(v: &[f64]) -> [f64; 2] {
    [v[0], v[1]]
}

fn geodesic(
    manifold: &str,
    from: &[f64],
    to: Option<&[f64]>,
    velocity: Option<&[f64]>,
    time: Option<f64>,
    samples: usize,
) -> Result<ExitCode, Error> {
    let m = Manifold::from_json(
        &serde_json::from_str(manifold).unwrap_or_else(|_| Value::String(manifold.into())),
    )?;
    let p = m.point(pair(from))?;
    let out = match (to, velocity, time) {
        (Some(to), _, _) => {
            let q = m.point(pair(to))?;
            let mut settings = m.clone();
            settings.solver.segment_samples = samples.max(2);
            let g = settings.minimizing_geodesic(&p, &q)?;
            json!({
                "manifold": m.to_json(),
                "start": point_to_json(&g.start),
                "end": point_to_json(&g.end),
                "length": g.length,
                "initial_velocity": g.initial_velocity.components,
                "terminal_velocity": g.terminal_velocity.components,
                "samples": g.samples.iter().map(point_to_json).collect::<Vec<_>>(),
            })
        }
        (None, Some(v), Some(t)) => {
            let (q, w) = m.geodesic_shoot(&p, &TangentVector::new(p, pair(v)), t)?;
            json!({
                "manifold": m.to_json(),
                "start": point_to_json(&p),
                "end": point_to_json(&q),
                "terminal_velocity": w.components,
            })
        }
        _ => {
            return Err(Error::Invalid {
                path: "geodesic".into(),
                message: "give --to, or --velocity with --time".into(),
            })
        }
    };
    print(&out);
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Flow(cmd) => return flow(cmd),
        Command::Net(NetCmd::Check {
            net,
            manifold,
            tol_stat,
            tol_geo,
        }) => net_check(&net, manifold.as_deref(), tol_stat, tol_geo),
        Command::Ends(EndsCmd::Check { scenario, samples }) => ends_check(&scenario, samples),
        Command::Cage(CageCmd::Retract { cage, t, manifold }) => {
            cage_retract(&cage, t, manifold.as_deref())
        }
        Command::Fill(FillCmd::Disk { scenario, out }) => fill_disk(&scenario, &out),
        Command::Manifold(ManifoldCmd::Geodesic {
            manifold,
            from,
            to,
            velocity,
            time,
            samples,
        }) => geodesic(
            &manifold,
            &from,
            to.as_deref(),
            velocity.as_deref(),
            time,
            samples,
        ),
    };
    result.unwrap_or_else(fail)
}
