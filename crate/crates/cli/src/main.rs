//! Command-line front end: explore, check, simulate, compare and trace
//! link layer protocol scenarios.
//!
//! Exit codes: 0 = property holds / run complete, 1 = property fails
//! (counterexample written when applicable), 2 = verdict unknown because
//! the horizon truncated the search, 3 = usage or configuration error.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num::{BigRational, One, ToPrimitive, Zero};

use linklayer::bisim::strong_bisim;
use linklayer::explore::{check_deadlock_freedom, explore, ExploreOpts, Plts};
use linklayer::liveness::{holds_outright, prob_at_least, Outcome};
use linklayer::network::{NetCtx, NetState};
use linklayer::scenario::{builtin_scenario, Protocol, ScenarioConfig};
use linklayer::sim::{
    counterexample_trace, monte_carlo, read_trace, run_trial, verify_counterexample_trace,
    verify_simulation_trace, write_trace, TraceHeader, TRACE_VERSION,
};

#[derive(Parser)]
#[command(name = "linklayer", version, about = "Collision-aware link layer protocol analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct Common {
    /// Built-in scenario (hidden, exposed, star) or a config file path.
    #[arg(long)]
    scenario: String,
    /// Protocol variant override.
    #[arg(long)]
    protocol: Option<Protocol>,
    /// Slot horizon override.
    #[arg(long)]
    horizon: Option<u32>,
    /// State budget override.
    #[arg(long)]
    budget: Option<usize>,
    /// Disable clock-offset state folding.
    #[arg(long)]
    no_normalize: bool,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Property {
    PacketDelivery,
    WeakPacketDelivery,
}

#[derive(Subcommand)]
enum Command {
    /// Build the transition system and print its statistics.
    Explore(Common),
    /// Check deadlock freedom and a delivery property.
    Check {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = Property::PacketDelivery)]
        property: Property,
        /// Qualitative check: every complete path delivers.
        #[arg(long, conflicts_with = "min_prob")]
        outright: bool,
        /// Quantitative check: minimum delivery probability over all
        /// schedulers, compared against the threshold.
        #[arg(long)]
        min_prob: bool,
        /// Probability threshold for --min-prob, as `p/q` or an integer.
        #[arg(long, default_value = "1")]
        threshold: String,
        /// Where to write a counterexample trace on failure.
        #[arg(long)]
        counterexample: Option<PathBuf>,
    },
    /// Monte-Carlo simulation of the scenario.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1000)]
        trials: u32,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Compare the scenario against a permuted node composition.
    Bisim {
        #[command(flatten)]
        common: Common,
        /// Comma-separated node order, e.g. `C,A,B`; default reversed.
        #[arg(long)]
        order: Option<String>,
    },
    /// Record or verify simulation traces.
    Trace {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        seed: Option<u64>,
        /// Write a fresh trace here.
        #[arg(long, conflicts_with = "replay")]
        out: Option<PathBuf>,
        /// Verify a previously written trace.
        #[arg(long)]
        replay: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn load_scenario(common: &Common) -> Result<ScenarioConfig, String> {
    let protocol = common.protocol.unwrap_or(Protocol::Csma);
    let mut cfg = match builtin_scenario(&common.scenario, protocol) {
        Some(cfg) => cfg,
        None => {
            let file = File::open(&common.scenario)
                .map_err(|e| format!("cannot open scenario `{}`: {e}", common.scenario))?;
            serde_json::from_reader(BufReader::new(file))
                .map_err(|e| format!("cannot parse scenario: {e}"))?
        }
    };
    if let Some(p) = common.protocol {
        cfg.protocol = p;
    }
    if let Some(h) = common.horizon {
        cfg.horizon = h;
    }
    if let Some(b) = common.budget {
        cfg.budget = b;
    }
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

fn build_plts(cfg: &ScenarioConfig, common: &Common) -> Result<(NetCtx, NetState, Plts), String> {
    let (ctx, init) = cfg.build().map_err(|e| e.to_string())?;
    let plts = explore(
        &ctx,
        init.clone(),
        ExploreOpts {
            horizon: cfg.horizon,
            budget: cfg.budget,
            normalize: !common.no_normalize,
        },
    )
    .map_err(|e| e.to_string())?;
    Ok((ctx, init, plts))
}

fn parse_threshold(s: &str) -> Result<BigRational, String> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: i64 = n.trim().parse().map_err(|_| "bad threshold numerator".to_string())?;
        let d: i64 = d.trim().parse().map_err(|_| "bad threshold denominator".to_string())?;
        if d <= 0 {
            return Err("threshold denominator must be positive".into());
        }
        Ok(BigRational::new(n.into(), d.into()))
    } else {
        let n: i64 = s.parse().map_err(|_| format!("bad threshold `{s}`"))?;
        Ok(BigRational::from_integer(n.into()))
    }
}

fn show_prob(p: &BigRational) -> String {
    if p.is_zero() {
        "0".into()
    } else if p.is_one() {
        "1".into()
    } else {
        format!("{p} (~{:.6})", p.to_f64().unwrap_or(f64::NAN))
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Explore(common) => {
            let cfg = load_scenario(&common)?;
            let (_, _, p) = build_plts(&cfg, &common)?;
            let report = check_deadlock_freedom(&p);
            if common.format == Format::Json {
                println!(
                    "{}",
                    serde_json::json!({
                        "scenario": cfg.name,
                        "protocol": cfg.protocol.to_string(),
                        "horizon": p.horizon,
                        "states": p.num_states(),
                        "transitions": p.num_transitions(),
                        "truncated": p.num_truncated(),
                        "normalized": p.normalized,
                        "deadlock_free": report.passed(),
                    })
                );
            } else {
                println!("scenario    {} ({})", cfg.name, cfg.protocol);
                println!("horizon     {} slots", p.horizon);
                println!("states      {}", p.num_states());
                println!("transitions {}", p.num_transitions());
                println!("truncated   {}", p.num_truncated());
                println!("normalized  {}", p.normalized);
                println!(
                    "deadlock-free {} ({} states checked)",
                    report.passed(),
                    report.checked
                );
                if !report.passed() {
                    let show = report.offenders.len().min(10);
                    println!("offending states: {:?}", &report.offenders[..show]);
                }
            }
            Ok(ExitCode::from(if report.passed() { 0 } else { 1 }))
        }

        Command::Check { common, property, outright, min_prob, threshold, counterexample } => {
            let cfg = load_scenario(&common)?;
            let (ctx, init, p) = build_plts(&cfg, &common)?;
            let deadlock = check_deadlock_freedom(&p);
            let weak = property == Property::WeakPacketDelivery;
            let queries = cfg.delivery_queries(weak);
            if queries.is_empty() {
                return Err("scenario has no tracked (one-shot) packets".into());
            }
            let threshold = parse_threshold(&threshold)?;
            let quantitative = min_prob || !outright;

            let mut all_hold = true;
            let mut any_unknown = false;
            let mut lines = Vec::new();
            let mut json_items = Vec::new();
            let mut ce_written = false;

            let write_ce = |ce: &linklayer::liveness::CounterexamplePath,
                                ce_written: &mut bool|
             -> Result<(), String> {
                if let Some(path) = &counterexample {
                    if !*ce_written {
                        let (h, recs) =
                            counterexample_trace(&ctx, &p, ce, &cfg.name, &cfg.protocol.to_string());
                        let f = File::create(path).map_err(|e| e.to_string())?;
                        write_trace(BufWriter::new(f), &h, &recs).map_err(|e| e.to_string())?;
                        verify_counterexample_trace(&ctx, &init, &recs)
                            .map_err(|e| format!("exported counterexample failed replay: {e}"))?;
                        *ce_written = true;
                    }
                }
                Ok(())
            };

            for (label, q) in &queries {
                if quantitative {
                    let v = prob_at_least(&p, q, &threshold);
                    all_hold &= v.holds;
                    lines.push(format!(
                        "min-prob {label}: {} (threshold {}, triggers {}, {})",
                        v.minimum
                            .as_ref()
                            .map(show_prob)
                            .unwrap_or_else(|| "n/a (no trigger)".into()),
                        show_prob(&threshold),
                        v.triggers_checked,
                        if v.truncation_involved { "horizon-bounded" } else { "exact" },
                    ));
                    json_items.push(serde_json::json!({
                        "packet": label,
                        "mode": "min-prob",
                        "minimum": v.minimum.as_ref().map(|m| m.to_string()),
                        "holds": v.holds,
                        "truncation": v.truncation_involved,
                    }));
                    if !v.holds {
                        if let Outcome::Counterexample(ce) = holds_outright(&p, q) {
                            write_ce(&ce, &mut ce_written)?;
                        }
                    }
                } else {
                    let outcome = holds_outright(&p, q);
                    let verdict = match &outcome {
                        Outcome::Holds => "holds".to_string(),
                        Outcome::Unknown => {
                            any_unknown = true;
                            "unknown (horizon)".to_string()
                        }
                        Outcome::Counterexample(ce) => {
                            all_hold = false;
                            write_ce(ce, &mut ce_written)?;
                            format!(
                                "counterexample ({} prefix + {} avoid steps, {})",
                                ce.prefix.len(),
                                ce.avoid.len(),
                                if ce.cycle_start.is_some() { "lasso" } else { "dead end" },
                            )
                        }
                    };
                    lines.push(format!("outright {label}: {verdict}"));
                    json_items.push(serde_json::json!({
                        "packet": label,
                        "mode": "outright",
                        "verdict": verdict,
                    }));
                }
            }

            if common.format == Format::Json {
                println!(
                    "{}",
                    serde_json::json!({
                        "scenario": cfg.name,
                        "protocol": cfg.protocol.to_string(),
                        "deadlock_free": deadlock.passed(),
                        "results": json_items,
                        "holds": all_hold,
                        "unknown": any_unknown,
                    })
                );
            } else {
                println!("deadlock-free: {} ({} states)", deadlock.passed(), deadlock.checked);
                for l in lines {
                    println!("{l}");
                }
            }
            if !deadlock.passed() || !all_hold {
                Ok(ExitCode::from(1))
            } else if any_unknown {
                Ok(ExitCode::from(2))
            } else {
                Ok(ExitCode::from(0))
            }
        }

        Command::Simulate { common, trials, seed } => {
            let cfg = load_scenario(&common)?;
            let (ctx, init) = cfg.build().map_err(|e| e.to_string())?;
            let seed = seed.unwrap_or(cfg.seed);
            let tracked = cfg.tracked_packets();
            let stats = monte_carlo(&ctx, &init, &tracked, cfg.horizon, trials, seed)
                .map_err(|e| e.to_string())?;
            if common.format == Format::Json {
                println!("{}", serde_json::to_string(&stats).map_err(|e| e.to_string())?);
            } else {
                println!(
                    "{} ({}), {} trials, horizon {}, seed {}",
                    cfg.name, cfg.protocol, stats.trials, stats.horizon, seed
                );
                println!("delivery rate     {:.4}", stats.delivery_rate);
                println!("horizon exhausted {}", stats.horizon_exhausted);
                println!("mean collisions   {:.3} slots/trial", stats.mean_collision_slots);
                for pk in &stats.packets {
                    println!(
                        "  {}: {}/{} delivered{}",
                        pk.label,
                        pk.delivered,
                        stats.trials,
                        pk.mean_latency_slots
                            .map(|l| format!(", mean latency {l:.2} slots"))
                            .unwrap_or_default(),
                    );
                }
                println!("worst attempts histogram: {:?}", stats.retry_histogram);
            }
            Ok(ExitCode::from(0))
        }

        Command::Bisim { common, order } => {
            let cfg = load_scenario(&common)?;
            let order_idx: Vec<usize> = match order {
                Some(names) => names
                    .split(',')
                    .map(str::trim)
                    .map(|n| {
                        cfg.nodes
                            .iter()
                            .position(|x| x == n)
                            .ok_or_else(|| format!("unknown node `{n}` in --order"))
                    })
                    .collect::<Result<_, _>>()?,
                None => (0..cfg.nodes.len()).rev().collect(),
            };
            let (ctx, init, p1) = build_plts(&cfg, &common)?;
            let init2 = linklayer::scenario::permute_composition(&init, &order_idx)
                .map_err(|e| e.to_string())?;
            let p2 = explore(
                &ctx,
                init2,
                ExploreOpts {
                    horizon: cfg.horizon,
                    budget: cfg.budget,
                    normalize: !common.no_normalize,
                },
            )
            .map_err(|e| e.to_string())?;
            let r = strong_bisim(&p1, &p2);
            if common.format == Format::Json {
                println!(
                    "{}",
                    serde_json::json!({
                        "equivalent": r.equivalent,
                        "classes": r.num_classes,
                        "witness": r.witness.as_ref().map(|w| {
                            w.iter().map(|a| a.to_string()).collect::<Vec<_>>()
                        }),
                        "left_states": p1.num_states(),
                        "right_states": p2.num_states(),
                    })
                );
            } else {
                let order_names: Vec<&str> =
                    order_idx.iter().map(|&i| cfg.nodes[i].as_str()).collect();
                println!(
                    "{} vs composition order {:?}: {}",
                    cfg.name,
                    order_names,
                    if r.equivalent { "bisimilar" } else { "NOT bisimilar" }
                );
                println!(
                    "classes {} (left {} / right {} states)",
                    r.num_classes,
                    p1.num_states(),
                    p2.num_states()
                );
                if let Some(w) = &r.witness {
                    let labels: Vec<String> = w.iter().map(|a| a.to_string()).collect();
                    println!("distinguishing labels: {labels:?}");
                }
            }
            Ok(ExitCode::from(if r.equivalent { 0 } else { 1 }))
        }

        Command::Trace { common, seed, out, replay } => {
            let cfg = load_scenario(&common)?;
            let (ctx, init) = cfg.build().map_err(|e| e.to_string())?;
            let tracked = cfg.tracked_packets();
            if let Some(path) = replay {
                let f = File::open(&path).map_err(|e| e.to_string())?;
                let (header, records) = read_trace(BufReader::new(f)).map_err(|e| e.to_string())?;
                let result = match header.kind.as_str() {
                    "simulation" => {
                        verify_simulation_trace(&ctx, &init, &tracked, &header, &records)
                    }
                    "counterexample" => verify_counterexample_trace(&ctx, &init, &records),
                    other => Err(format!("unknown trace kind `{other}`")),
                };
                match result {
                    Ok(()) => {
                        println!("trace verified: {} records", records.len());
                        Ok(ExitCode::from(0))
                    }
                    Err(e) => {
                        eprintln!("trace mismatch: {e}");
                        Ok(ExitCode::from(1))
                    }
                }
            } else {
                let seed = seed.unwrap_or(cfg.seed);
                let (_, records) = run_trial(&ctx, &init, &tracked, cfg.horizon, seed)
                    .map_err(|e| e.to_string())?;
                let header = TraceHeader {
                    version: TRACE_VERSION,
                    kind: "simulation".into(),
                    scenario: cfg.name.clone(),
                    protocol: cfg.protocol.to_string(),
                    seed,
                    horizon: cfg.horizon,
                };
                match out {
                    Some(path) => {
                        let f = File::create(&path).map_err(|e| e.to_string())?;
                        write_trace(BufWriter::new(f), &header, &records)
                            .map_err(|e| e.to_string())?;
                        println!("wrote {} records to {}", records.len(), path.display());
                    }
                    None => {
                        let stdout = std::io::stdout();
                        write_trace(stdout.lock(), &header, &records)
                            .map_err(|e| e.to_string())?;
                    }
                }
                Ok(ExitCode::from(0))
            }
        }
    }
}
