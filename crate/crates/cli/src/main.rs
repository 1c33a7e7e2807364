mod args;
mod input;

use std::fmt::Write as _;
use std::process::ExitCode;

use clap::Parser;
use ggs_core::beauville::{certify_not_beauville, level_persistence, verify_standard_structure, CheckOptions, Verdict};
use ggs_core::error::Error;
use ggs_core::ggs::{DefiningVector, OrderMode, ScanConfig};
use ggs_core::group::FiniteQuotient;
use ggs_core::properties::{run_suite, Suite};
use ggs_core::sweep::{flag_counts, sweep_vectors, SweepOptions};
use serde::Serialize;
use serde_json::{json, Value};

use args::{Cli, Command, Format, Opts};
use input::{resolve_vectors, Level};

const OK: u8 = 0;
const MISMATCH: u8 = 1;
const USAGE: u8 = 2;
const CAP: u8 = 3;

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            e if e.is_cap() => CAP,
            Error::Construction(_) => MISMATCH,
            _ => USAGE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

/// One result per vector (or per level), with its text rendering.
struct Item {
    value: Value,
    text: String,
    ok: bool,
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}

fn check_options(o: &Opts) -> CheckOptions {
    CheckOptions {
        orbit_cap: o.cap_orbit,
        enum_cap: o.cap_enum,
        ..CheckOptions::default()
    }
}

fn scan(o: &Opts) -> ScanConfig {
    ScanConfig {
        max_depth: o.cap_scan,
        ..ScanConfig::default()
    }
}

fn classify(v: &DefiningVector, o: &Opts) -> Item {
    let inv = v.invariants();
    let mut text = format!(
        "{v}\n  R = {:?}\n  S = {:?}\n  infinite: {}\n  periodic: {}\n  class E: {}\n  q: {}\n",
        inv.r,
        inv.s,
        inv.infinite,
        inv.periodic,
        inv.class_e,
        inv.q.map_or("-".into(), |q| q.to_string())
    );
    let mut value = json!({ "invariants": to_value(&inv) });
    if inv.infinite && inv.periodic && v.n() >= 2 {
        match v.lambda_prime(scan(o)) {
            Ok(t) => {
                let _ = writeln!(
                    text,
                    "  thresholds: mu = {}, m10 = {}, lambda' = {}, m = {}, m_G = {}",
                    t.mu, t.m10, t.lambda_prime, t.m, t.m_g
                );
                value["thresholds"] = to_value(&t);
            }
            Err(e) => {
                let _ = writeln!(text, "  thresholds: {e}");
                value["thresholds_error"] = json!(e.to_string());
            }
        }
    }
    Item { value, text, ok: true }
}

fn order(v: &DefiningVector, o: &Opts) -> Result<Item, Failure> {
    let profile = v.t_sequence(o.r, o.s)?;
    let depth = o.depth.unwrap_or(profile.m_rs + 3);
    let c = v.order_of(o.r, o.s, o.i, o.j, depth, OrderMode::Both)?;
    let text = format!(
        "{v}\n  a^({} p^{}) b^({} p^{}) at depth {depth}: formula {} oracle {} t = {:?}\n",
        o.i,
        o.r,
        o.j,
        o.s,
        c.formula.unwrap_or(0),
        c.oracle.unwrap_or(0),
        profile.t_seq
    );
    Ok(Item {
        value: json!({ "comparison": to_value(&c), "profile": to_value(&profile) }),
        text,
        ok: c.agree(),
    })
}

fn beauville(v: &DefiningVector, o: &Opts, finite: bool, persistence: bool) -> Result<Item, Failure> {
    let opts = check_options(o);
    let level = match Level::parse(o.level.as_deref())? {
        Level::Auto if finite => return Err(Failure::usage("finite mode needs an explicit --level")),
        Level::Auto => v.lambda_prime(scan(o))?.m_g,
        Level::List(l) if l.len() == 1 => l[0],
        Level::List(_) => return Err(Failure::usage("beauville takes a single level")),
    };
    let (report, c) = verify_standard_structure(v, Some(level), &opts, finite)?;
    let mut text = format!("{v}\n  level {level}: {}\n  c target {}\n", report.verdict, c.pattern.target);
    for p in &report.pairs {
        let _ = writeln!(text, "  pair x{} y{}: {:?}", p.x + 1, p.y + 1, p.status);
    }
    let mut ok = report.verdict == Verdict::Beauville;
    let mut value = json!({ "level": level, "report": to_value(&report), "c": to_value(&c) });
    if persistence {
        let pers = level_persistence(v, level, &opts)?;
        let _ = writeln!(
            text,
            "  level {}: {} (orders {:?} -> {:?})",
            level + 1,
            if pers.holds { "persists" } else { "does not persist" },
            pers.orders_k0,
            pers.orders_k1
        );
        ok &= pers.holds;
        value["persistence"] = to_value(&pers);
    }
    Ok(Item { value, text, ok })
}

fn certify(v: &DefiningVector, o: &Opts) -> Result<Vec<Item>, Failure> {
    let levels = match Level::parse(o.level.as_deref())? {
        Level::List(l) => l,
        Level::Auto => return Err(Failure::usage("certify needs --level")),
    };
    let opts = check_options(o);
    levels
        .into_iter()
        .map(|k| {
            let mut q = FiniteQuotient::new(v, k)?;
            let report = certify_not_beauville(&mut q, &opts)?;
            Ok(Item {
                text: format!("{v}\n  level {k}: {}\n", report.verdict),
                ok: report.verdict == Verdict::NotBeauvilleCertified,
                value: json!({ "level": k, "report": to_value(&report) }),
            })
        })
        .collect()
}

fn sweep(vectors: &[DefiningVector], o: &Opts) -> Result<Item, Failure> {
    let levels = match Level::parse(o.level.as_deref())? {
        Level::List(l) => l,
        Level::Auto => Vec::new(),
    };
    let opts = SweepOptions {
        levels,
        check: check_options(o),
    };
    let rows = sweep_vectors(vectors, &opts);
    let counts = flag_counts(&rows);
    let mut text = String::new();
    for r in &rows {
        let _ = write!(
            text,
            "{:<32} R={:<10} infinite={:<5} periodic={:<5} E={:<4} m_G={}",
            r.vector,
            format!("{:?}", r.r),
            r.infinite,
            r.periodic,
            r.class_e,
            r.m_g.map_or("-".into(), |m| m.to_string())
        );
        for (k, verdict) in &r.verdicts {
            let _ = write!(text, " k{k}={verdict}");
        }
        text.push('\n');
    }
    let _ = writeln!(text, "{counts:?}");
    Ok(Item {
        value: json!({ "rows": to_value(&rows), "counts": to_value(&counts) }),
        text,
        ok: true,
    })
}

fn properties(v: &DefiningVector, o: &Opts) -> Result<Vec<Item>, Failure> {
    let suites: Vec<Suite> = match o.suite.as_deref() {
        None => return Err(Failure::usage("properties needs --suite")),
        Some("all") => Suite::ALL.to_vec(),
        Some(s) => s.split(',').map(str::parse).collect::<Result<_, _>>()?,
    };
    suites
        .into_iter()
        .map(|suite| {
            let report = run_suite(suite, v, o.depth, o.cap_enum)?;
            let mut text = match report.depth {
                0 => format!("{v}\n  {suite}: "),
                d => format!("{v}\n  {suite} at depth {d}: "),
            };
            text.push_str(if report.passed() { "pass\n" } else { "FAIL\n" });
            for c in &report.checks {
                let _ = writeln!(text, "    [{}] {} {}", if c.passed { "ok" } else { "!!" }, c.name, c.detail);
            }
            Ok(Item {
                ok: report.passed(),
                value: to_value(&report),
                text,
            })
        })
        .collect()
}

fn run(cli: &Cli) -> Result<(Vec<Item>, Vec<String>), Failure> {
    let o = &cli.opts;
    let (spec, sweep_mode) = match &cli.command {
        Command::Sweep(t) => (&t.spec, true),
        Command::Classify(t) | Command::Order(t) | Command::Certify(t) | Command::Properties(t) => (&t.spec, false),
        Command::Beauville { target, .. } => (&target.spec, false),
    };
    let vectors = resolve_vectors(spec, o, sweep_mode)?;
    let names = vectors.iter().map(ToString::to_string).collect();
    let mut items = Vec::new();
    match &cli.command {
        Command::Sweep(_) => items.push(sweep(&vectors, o)?),
        _ => {
            for v in &vectors {
                match &cli.command {
                    Command::Classify(_) => items.push(classify(v, o)),
                    Command::Order(_) => items.push(order(v, o)?),
                    Command::Beauville { finite, persistence, .. } => items.push(beauville(v, o, *finite, *persistence)?),
                    Command::Certify(_) => items.extend(certify(v, o)?),
                    Command::Properties(_) => items.extend(properties(v, o)?),
                    Command::Sweep(_) => unreachable!(),
                }
            }
        }
    }
    Ok((items, names))
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Classify(_) => "classify",
        Command::Order(_) => "order",
        Command::Beauville { .. } => "beauville",
        Command::Certify(_) => "certify",
        Command::Sweep(_) => "sweep",
        Command::Properties(_) => "properties",
    }
}

/// Report envelope; converting through `Value` sorts every object's keys.
fn envelope(cli: &Cli, vectors: &[String], items: &[Item], ok: bool) -> Value {
    let o = &cli.opts;
    to_value(&json!({
        "tool": "ggs",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command_name(&cli.command),
        "vectors": vectors,
        "level": o.level.clone().unwrap_or_else(|| "auto".into()),
        "depth": o.depth,
        "caps": { "enum": o.cap_enum, "orbit": o.cap_orbit, "scan": o.cap_scan },
        "seed": o.seed,
        "ok": ok,
        "results": items.iter().map(|i| i.value.clone()).collect::<Vec<_>>(),
    }))
}

fn emit(cli: &Cli, body: String) -> Result<(), Failure> {
    match &cli.opts.out {
        Some(path) => std::fs::write(path, body).map_err(|e| Failure::usage(format!("{}: {e}", path.display()))),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = run(&cli).and_then(|(items, vectors)| {
        let ok = items.iter().all(|i| i.ok);
        let body = match cli.opts.format {
            Format::Json => serde_json::to_string_pretty(&envelope(&cli, &vectors, &items, ok)).unwrap() + "\n",
            Format::Text => items.iter().map(|i| i.text.as_str()).collect(),
        };
        emit(&cli, body)?;
        Ok(if ok { OK } else { MISMATCH })
    });
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("ggs: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
