//! Command-line surface: define groups, run the constructions, verify
//! properties, export artifacts.
//!
//! Exit codes: 0 on success, 1 on verification failure (the report is still
//! emitted), 2 on usage or configuration errors. Output is deterministic for
//! fixed inputs: maps are key-sorted and enumerations are emitted in
//! canonical order.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::builtin;
use crate::cprs::{verify_geodesic_autostackable, Checks, Cprs, CprsJson, FlowEntryJson, FlowTable};
use crate::error::{Error, Result};
use crate::fftp;
use crate::group::{ball_to_json, build_ball, Ball, GroupSpec, DEFAULT_BALL_LIMIT};
use crate::words::OrderKind;

#[derive(Parser)]
#[command(name = "autostack", version, about = "Workbench for fellow-traveler witness automata, prefix-rewriting systems, flow functions, and almost-convexity paths")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
    Dot,
}

#[derive(Args)]
struct GroupArg {
    /// Path to a group specification JSON file
    #[arg(long)]
    group: PathBuf,
    /// Ball entry limit
    #[arg(long, default_value_t = DEFAULT_BALL_LIMIT)]
    max_ball: usize,
}

#[derive(Args)]
struct OutArg {
    /// Write the artifact here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate a Cayley ball: geodesic lengths and normal forms
    Ball {
        #[command(flatten)]
        group: GroupArg,
        #[arg(long)]
        radius: u32,
        #[arg(long, value_enum, default_value = "shortlex")]
        order: OrderArg,
        #[command(flatten)]
        out: OutArg,
    },
    /// Search for the least fellow-traveler constant at desk scale
    FftpCheck {
        #[command(flatten)]
        group: GroupArg,
        #[arg(long)]
        max_k: u32,
        #[arg(long)]
        max_len: usize,
        /// Ball radius override (default: what the search needs)
        #[arg(long)]
        radius: Option<u32>,
    },
    /// Build the word-difference witness automaton for a verified constant
    WitnessAutomaton {
        #[command(flatten)]
        group: GroupArg,
        #[arg(long)]
        k: u32,
        /// Emit the accepted pairs up to this padded length instead of the
        /// machine
        #[arg(long)]
        enumerate_pairs: Option<usize>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Refine the witness language into a rewriting system with minimal
    /// right sides and pinned last letters, then verify it
    RefineCprs {
        #[command(flatten)]
        group: GroupArg,
        #[arg(long)]
        k: u32,
        /// Verification length bound
        #[arg(long, default_value_t = 5)]
        max_len: usize,
        #[command(flatten)]
        out: OutArg,
    },
    /// Transform a weight non-increasing system into a bounded one
    TheoremA {
        #[command(flatten)]
        group: GroupArg,
        /// Path to the input system JSON
        #[arg(long)]
        cprs: PathBuf,
        /// Constant override (default: state count of the rule automaton)
        #[arg(long)]
        k: Option<usize>,
        /// Ball radius override
        #[arg(long)]
        radius: Option<u32>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Extract the flow function of a system on a ball
    Flow {
        #[command(flatten)]
        group: GroupArg,
        #[arg(long)]
        cprs: PathBuf,
        #[arg(long)]
        radius: u32,
        #[command(flatten)]
        out: OutArg,
    },
    /// Check the geodesic decrease property of a flow table
    VerifyGeo {
        #[command(flatten)]
        group: GroupArg,
        /// Path to the flow table JSON
        #[arg(long)]
        flow: PathBuf,
        #[arg(long)]
        radius: u32,
        #[arg(long, value_enum, default_value = "shortlex")]
        order: OrderArg,
    },
    /// Build almost-convexity paths for all sphere pairs at distance ≤ 2
    AlmostConvex {
        #[command(flatten)]
        group: GroupArg,
        #[arg(long)]
        cprs: PathBuf,
        /// Sphere radius
        #[arg(long)]
        n: u32,
        #[command(flatten)]
        out: OutArg,
    },
    /// Rewrite a word to its normal form
    Rewrite {
        /// Path to the system JSON
        #[arg(long)]
        cprs: PathBuf,
        /// The word, letters concatenated (or comma-separated)
        #[arg(long)]
        word: String,
        #[arg(long, default_value_t = 10_000)]
        step_limit: usize,
        /// Include the full rewrite trace
        #[arg(long)]
        trace: bool,
    },
    /// Emit a built-in artifact: a group spec or the example system
    Export {
        /// One of: z2, z2xz2, d-infinity, z2xz2-cprs
        #[arg(long)]
        builtin: String,
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum OrderArg {
    Srev,
    Shortlex,
}

impl From<OrderArg> for OrderKind {
    fn from(o: OrderArg) -> OrderKind {
        match o {
            OrderArg::Srev => OrderKind::Srev,
            OrderArg::Shortlex => OrderKind::Shortlex,
        }
    }
}

fn load_group(arg: &GroupArg) -> Result<GroupSpec> {
    let text = fs::read_to_string(&arg.group)?;
    GroupSpec::from_json_str(&text)
}

fn load_cprs(path: &PathBuf) -> Result<Cprs> {
    let text = fs::read_to_string(path)?;
    let j: CprsJson = serde_json::from_str(&text)?;
    Cprs::from_json(&j)
}

fn emit(out: &OutArg, stdout: &mut dyn Write, payload: &str) -> Result<()> {
    match &out.out {
        Some(p) => {
            fs::write(p, payload)?;
            writeln!(stdout, "wrote {}", p.display())?;
        }
        None => writeln!(stdout, "{payload}")?,
    }
    Ok(())
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)?)
}

struct BallFor {
    ball: Ball,
}

fn ball_for(spec: &GroupSpec, radius: u32, order: OrderKind, limit: usize) -> Result<BallFor> {
    Ok(BallFor {
        ball: build_ball(spec, radius, order, limit)?,
    })
}

/// Runs the CLI on explicit arguments, writing to the given stream; returns
/// the process exit code.
pub fn run<I>(args: I, stdout: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = String>,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stdout, "{e}");
            return 2;
        }
    };
    match dispatch(cli, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stdout, "error: {e}");
            2
        }
    }
}

fn dispatch(cli: Cli, stdout: &mut dyn Write) -> Result<i32> {
    match cli.command {
        Command::Ball {
            group,
            radius,
            order,
            out,
        } => {
            let spec = load_group(&group)?;
            let b = ball_for(&spec, radius, order.into(), group.max_ball)?.ball;
            let entries = ball_to_json(&spec, &b);
            let payload = match out.format {
                Format::Text => entries
                    .iter()
                    .map(|e| format!("{:?} {} {}", e.element.vec, e.length, e.nf.join("")))
                    .collect::<Vec<_>>()
                    .join("\n"),
                _ => to_json(&entries)?,
            };
            emit(&out, stdout, &payload)?;
            Ok(0)
        }
        Command::FftpCheck {
            group,
            max_k,
            max_len,
            radius,
        } => {
            let spec = load_group(&group)?;
            let r = radius.unwrap_or((max_len as u32).max(max_k));
            let ball = ball_for(&spec, r, OrderKind::Shortlex, group.max_ball)?.ball;
            let report = fftp::fftp_search(&spec, &ball, max_k, max_len)?;
            writeln!(stdout, "{}", to_json(&report)?)?;
            Ok(0)
        }
        Command::WitnessAutomaton {
            group,
            k,
            enumerate_pairs,
            out,
        } => {
            let spec = load_group(&group)?;
            let ball = ball_for(&spec, 4 * k + 2, OrderKind::Srev, group.max_ball)?.ball;
            let wa = fftp::build_witness_automaton(&spec, &ball, k)?;
            let payload = match (enumerate_pairs, out.format) {
                (Some(len), _) => {
                    let pairs: Vec<[Vec<String>; 2]> = wa
                        .language
                        .enumerate_pairs(len)?
                        .into_iter()
                        .map(|(u, v)| {
                            [
                                spec.alphabet.word_to_names(&u),
                                spec.alphabet.word_to_names(&v),
                            ]
                        })
                        .collect();
                    to_json(&pairs)?
                }
                (None, Format::Dot) => wa.language.machine().to_dot("witness"),
                (None, _) => to_json(&wa.language.to_json())?,
            };
            emit(&out, stdout, &payload)?;
            Ok(0)
        }
        Command::RefineCprs {
            group,
            k,
            max_len,
            out,
        } => {
            let spec = load_group(&group)?;
            let radius = (4 * k + 2).max(max_len as u32 * 2);
            let ball = ball_for(&spec, radius, OrderKind::Srev, group.max_ball)?.ball;
            let wa = fftp::build_witness_automaton(&spec, &ball, k)?;
            let lp = fftp::to_lprime(&wa.language.minimized())?;
            let lpp = fftp::to_lpp(&lp)?;
            let sys = Cprs::new(spec.alphabet.clone(), lpp, OrderKind::Srev)?;
            let report = sys.verify(&spec, &ball, max_len, Checks::default())?;
            #[derive(Serialize)]
            struct Out {
                system: CprsJson,
                verification: crate::cprs::VerifyReport,
            }
            let payload = to_json(&Out {
                system: sys.to_json(),
                verification: report.clone(),
            })?;
            emit(&out, stdout, &payload)?;
            Ok(if report.pass() { 0 } else { 1 })
        }
        Command::TheoremA {
            group,
            cprs,
            k,
            radius,
            out,
        } => {
            let spec = load_group(&group)?;
            let sys = load_cprs(&cprs)?;
            let k_eff = k.unwrap_or_else(|| sys.rules().machine().pumping_bound());
            let wt_max = spec.alphabet.max_letter_weight();
            let wt_min = spec.alphabet.min_letter_weight();
            let needed = ((num_rational::Rational64::from_integer(2 * k_eff as i64) * wt_max
                + wt_max)
                / wt_min)
                .ceil()
                .to_integer() as u32;
            let r = radius.unwrap_or(needed);
            let ball = ball_for(&spec, r, sys.order(), group.max_ball)?.ball;
            let (s, report) = sys.theorem_a_construct(&spec, &ball, k)?;
            #[derive(Serialize)]
            struct Out {
                report: crate::cprs::TheoremAReport,
                system: CprsJson,
            }
            let payload = to_json(&Out {
                report,
                system: s.to_json(),
            })?;
            emit(&out, stdout, &payload)?;
            Ok(0)
        }
        Command::Flow {
            group,
            cprs,
            radius,
            out,
        } => {
            let spec = load_group(&group)?;
            let sys = load_cprs(&cprs)?;
            let ball = ball_for(&spec, radius, sys.order(), group.max_ball)?.ball;
            let ft = sys.flow_function(&spec, &ball)?;
            let payload = to_json(&ft.to_json(&spec, &ball)?)?;
            emit(&out, stdout, &payload)?;
            Ok(0)
        }
        Command::VerifyGeo {
            group,
            flow,
            radius,
            order,
        } => {
            let spec = load_group(&group)?;
            let text = fs::read_to_string(&flow)?;
            let entries: Vec<FlowEntryJson> = serde_json::from_str(&text)?;
            let ft = FlowTable::from_json(&spec, radius, &entries)?;
            let ball = ball_for(&spec, radius, order.into(), group.max_ball)?.ball;
            let report = verify_geodesic_autostackable(&ft, &spec, &ball)?;
            writeln!(stdout, "{}", to_json(&report)?)?;
            Ok(if report.pass() { 0 } else { 1 })
        }
        Command::AlmostConvex {
            group,
            cprs,
            n,
            out,
        } => {
            let spec = load_group(&group)?;
            let sys = load_cprs(&cprs)?;
            let ball = ball_for(&spec, n + 2, sys.order(), group.max_ball)?.ball;
            #[derive(Serialize)]
            struct PathOut {
                from: crate::group::ElementJson,
                to: crate::group::ElementJson,
                label: Vec<String>,
                ok: bool,
                #[serde(skip_serializing_if = "Option::is_none")]
                error: Option<String>,
            }
            let mut results = Vec::new();
            let mut failures = 0;
            let sphere: Vec<_> = ball.sphere(n as usize).to_vec();
            for g in &sphere {
                for h in &sphere {
                    // a difference outside the ball is farther than 2
                    let d = match ball.entry(&spec.mul(&spec.inv(g), h)) {
                        Some(e) => e.length,
                        None => continue,
                    };
                    if d > 2 {
                        continue;
                    }
                    match sys.almost_convex_path(&spec, &ball, g, h, n) {
                        Ok(p) => results.push(PathOut {
                            from: g.to_json(),
                            to: h.to_json(),
                            label: spec.alphabet.word_to_names(&p),
                            ok: true,
                            error: None,
                        }),
                        Err(e) => {
                            failures += 1;
                            results.push(PathOut {
                                from: g.to_json(),
                                to: h.to_json(),
                                label: Vec::new(),
                                ok: false,
                                error: Some(e.to_string()),
                            });
                        }
                    }
                }
            }
            let payload = to_json(&results)?;
            emit(&out, stdout, &payload)?;
            Ok(if failures == 0 { 0 } else { 1 })
        }
        Command::Rewrite {
            cprs,
            word,
            step_limit,
            trace,
        } => {
            let sys = load_cprs(&cprs)?;
            let w = if word.contains(',') {
                let names: Vec<String> = word.split(',').map(|x| x.trim().to_string()).collect();
                sys.alphabet().word_from_names(&names)?
            } else {
                sys.alphabet().parse_word(&word)?
            };
            let (nf, tr) = sys.normal_form(&w, step_limit)?;
            #[derive(Serialize)]
            struct Out {
                input: Vec<String>,
                normal_form: Vec<String>,
                steps: usize,
                #[serde(skip_serializing_if = "Option::is_none")]
                trace: Option<crate::cprs::RewriteTrace>,
            }
            let payload = to_json(&Out {
                input: sys.alphabet().word_to_names(&w),
                normal_form: sys.alphabet().word_to_names(&nf),
                steps: tr.steps.len(),
                trace: if trace { Some(tr) } else { None },
            })?;
            writeln!(stdout, "{payload}")?;
            Ok(0)
        }
        Command::Export { builtin: which, out } => {
            let payload = match which.as_str() {
                "z2" => to_json(&builtin::z2_spec().to_json())?,
                "z2xz2" => to_json(&builtin::z2xz2_spec().to_json())?,
                "d-infinity" => to_json(&builtin::d_infinity_spec().to_json())?,
                "z2xz2-cprs" => {
                    let sys = builtin::z2xz2_system()?;
                    match out.format {
                        Format::Dot => sys.rules().machine().to_dot("rules"),
                        _ => to_json(&sys.to_json())?,
                    }
                }
                other => {
                    return Err(Error::Config(format!(
                        "unknown builtin `{other}` (expected z2, z2xz2, d-infinity, z2xz2-cprs)"
                    )))
                }
            };
            emit(&out, stdout, &payload)?;
            Ok(0)
        }
    }
}
