//! Command-line front end. Every command reads a system config and prints
//! one JSON report; `--dot` additionally writes a Graphviz file.
//!
//! Exit codes: 0 success, 2 bad input, 3 size cap reached, 4 verification
//! failure, 5 internal error.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::building::{BallCache, Building};
use crate::clump::{sheets, unfolding_sequence, Clump, ClumpRecord};
use crate::cog::{canonical_cog, is_admissible, presentation, show_type};
use crate::config::{parse_config, SystemConfig};
use crate::covering::{build_covering, check_covering, label_sequence, verify_labeling};
use crate::error::{Error, Result};
use crate::symmetry::{
    apartments_through_base, classify_discreteness, quotient_cog, transitivity_witness, type_permutation_group,
};

#[derive(Parser, Debug)]
#[command(name = "rabuild", version, about = "Right-angled buildings, clumps and coverings of complexes of groups")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON system description.
    #[arg(global = true, long, short)]
    pub config: Option<PathBuf>,
    /// Radius of the ball to work with.
    #[arg(global = true, long, default_value_t = 1)]
    pub radius: usize,
    /// Override the chamber cap from the config.
    #[arg(global = true, long)]
    pub cap_chambers: Option<usize>,
    /// Seed for randomized unfolding orders.
    #[arg(global = true, long)]
    pub seed: Option<u64>,
    /// Write the JSON report here instead of standard output.
    #[arg(global = true, long, short)]
    pub output: Option<PathBuf>,
    /// Also write a Graphviz rendering of the main complex.
    #[arg(global = true, long)]
    pub dot: Option<PathBuf>,
    /// Ball cache file for `ball`: reused when it matches the config and radius, written otherwise.
    #[arg(global = true, long)]
    pub cache: Option<PathBuf>,
    /// Where `unfold-trace` writes the final clump and its unfolding steps.
    #[arg(global = true, long)]
    pub record: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Nerve, spherical subsets, symmetry group and presentation of Γ₀.
    Info,
    /// Chambers of the ball `Y_n`.
    Ball,
    /// Each unfolding step from `Y_0` to `Y_n`.
    UnfoldTrace,
    /// The edge labeling of `Y_n` and its verification.
    Label,
    /// Check the covering `G_X(Y_n) → G_X(Y_0)`.
    VerifyCovering,
    /// Index of `π_1(G_X(Y_n))` in `Γ₀`.
    Index,
    /// Discreteness of the automorphism groups.
    Classify,
    /// Apartment fragments through the base chamber in `Y_n`.
    Apartments,
    /// Transitivity witnesses between the first fragment and every other.
    Witness,
    /// Quotient of `G_X(Y_n)` by the full type-permutation group.
    Quotient,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Input(_) | Error::Domain(_) => 2,
        Error::Size { .. } => 3,
        Error::Verification(_) => 4,
        Error::Internal(_) => 5,
    }
}

struct Ctx {
    cfg: SystemConfig,
    b: Building,
    radius: usize,
    seed: Option<u64>,
    cache: Option<PathBuf>,
    record: Option<PathBuf>,
}

impl Ctx {
    fn chamber(&self, c: &crate::building::Chamber) -> String {
        self.b.gp().show(c)
    }
}

/// Parses arguments, runs the command, and returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli) {
        Ok((report, dot)) => {
            let text = serde_json::to_string_pretty(&report).expect("reports serialize") + "\n";
            if let Err(e) = emit(&cli, &text, dot) {
                eprintln!("{e}");
                return 2;
            }
            let failed = report.get("passed").and_then(Value::as_bool) == Some(false);
            if failed {
                4
            } else {
                0
            }
        }
        Err(e) => {
            let diag = json!({ "error": e.to_string(), "exit_code": exit_code(&e) });
            eprintln!("{}", serde_json::to_string_pretty(&diag).unwrap());
            exit_code(&e)
        }
    }
}

fn emit(cli: &Cli, text: &str, dot: Option<String>) -> std::io::Result<()> {
    match &cli.output {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    if let (Some(p), Some(d)) = (&cli.dot, dot) {
        std::fs::write(p, d)?;
    }
    Ok(())
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}

pub fn run(cli: &Cli) -> Result<(Value, Option<String>)> {
    let path = cli.config.as_ref().ok_or_else(|| Error::Input("missing --config".into()))?;
    let text = std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
    let mut cfg = parse_config(&text)?;
    if let Some(c) = cli.cap_chambers {
        cfg.chamber_cap = c;
    }
    if cli.radius > cfg.radius_cap {
        return Err(Error::Size { what: "radius".into(), cap: cfg.radius_cap, reached: cli.radius });
    }
    let b = cfg.building()?;
    let ctx = Ctx { cfg, b, radius: cli.radius, seed: cli.seed, cache: cli.cache.clone(), record: cli.record.clone() };
    let (mut report, dot) = match cli.command {
        Command::Info => (info(&ctx)?, None),
        Command::Ball => ball(&ctx)?,
        Command::UnfoldTrace => (unfold_trace(&ctx)?, None),
        Command::Label => (label(&ctx)?, None),
        Command::VerifyCovering => (verify(&ctx)?, None),
        Command::Index => (index(&ctx)?, None),
        Command::Classify => (to_value(&classify_discreteness(ctx.b.sys(), &ctx.cfg.q)?), None),
        Command::Apartments => (apartments(&ctx)?, None),
        Command::Witness => (witness(&ctx)?, None),
        Command::Quotient => quotient(&ctx)?,
    };
    if let Value::Object(m) = &mut report {
        m.insert("config_sha256".into(), Value::String(ctx.cfg.hash()));
    }
    Ok((report, dot))
}

fn info(ctx: &Ctx) -> Result<Value> {
    let b = &ctx.b;
    let y0 = canonical_cog(b, &Clump::base())?;
    Ok(json!({
        "generators": ctx.cfg.generators,
        "q": ctx.cfg.q,
        "commuting": b.sys().commuting_pairs().iter().map(|&(s, t)| [b.sys().name(s), b.sys().name(t)]).collect::<Vec<_>>(),
        "spherical_subsets": b.spherical_subsets().len(),
        "maximal_spherical": b.maximal_spherical().iter().map(|&t| show_type(b, t)).collect::<Vec<_>>(),
        "finite": b.sys().is_finite(),
        "type_permutations": type_permutation_group(b.sys(), &ctx.cfg.q).len(),
        "presentation": presentation(b, &y0).to_string(),
    }))
}

fn ball(ctx: &Ctx) -> Result<(Value, Option<String>)> {
    let (y, reused) = match &ctx.cache {
        Some(p) => {
            let (cache, reused) = BallCache::load_or_build(&ctx.b, ctx.radius, &ctx.cfg.hash(), p)?;
            (cache.clump(), Some(reused))
        }
        None => (ctx.b.ball(ctx.radius)?, None),
    };
    let layers = ctx.b.ball_layers(ctx.radius)?;
    let dot = canonical_cog(&ctx.b, &y)?.to_dot(&ctx.b);
    let report = json!({
        "radius": ctx.radius,
        "chambers": y.len(),
        "layer_sizes": layers.iter().map(Vec::len).collect::<Vec<_>>(),
        "layers": layers.iter().map(|l| l.iter().map(|c| ctx.chamber(c)).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "sides": y.sides(&ctx.b).len(),
        "cache_reused": reused,
    });
    Ok((report, Some(dot)))
}

fn sequence(ctx: &Ctx) -> Result<crate::clump::UnfoldingSequence> {
    match ctx.seed {
        Some(s) => unfolding_sequence(&ctx.b, ctx.radius, Some(&mut ChaCha8Rng::seed_from_u64(s))),
        None => unfolding_sequence(&ctx.b, ctx.radius, None::<&mut ChaCha8Rng>),
    }
}

fn unfold_trace(ctx: &Ctx) -> Result<Value> {
    let b = &ctx.b;
    let seq = sequence(ctx)?;
    let mut steps = Vec::new();
    for (i, k) in seq.sides.iter().enumerate() {
        let part = sheets(b, &seq.clumps[i], k)?;
        let next = &seq.clumps[i + 1];
        steps.push(json!({
            "step": i + 1,
            "side_type": b.sys().name(k.ty),
            "mirrors": k.mirrors.len(),
            "sheets": part.blocks.len(),
            "sheet_law": part.blocks.len() as u32 == b.q(k.ty) - 1,
            "chambers": next.len(),
            "admissible": is_admissible(b, next)?.admissible,
        }));
    }
    let ok = steps.iter().all(|s| s["sheet_law"] == true && s["admissible"] == true);
    if let Some(p) = &ctx.record {
        let rec = ClumpRecord::from_sequence(&seq, &ctx.cfg.hash());
        let text = serde_json::to_string(&rec).expect("records serialize") + "\n";
        std::fs::write(p, text).map_err(|e| Error::Input(format!("{}: {e}", p.display())))?;
    }
    Ok(json!({
        "radius": ctx.radius,
        "seed": ctx.seed,
        "steps": steps,
        "radius_index": seq.radius_index,
        "chambers": seq.last().len(),
        "matches_ball": seq.last() == &b.ball(ctx.radius)?,
        "passed": ok,
    }))
}

fn label(ctx: &Ctx) -> Result<Value> {
    let b = &ctx.b;
    let seq = sequence(ctx)?;
    let labels = label_sequence(b, &seq)?;
    let l = labels.last().unwrap();
    let report = verify_labeling(b, seq.last(), l)?;
    let entries: Vec<Value> = l
        .labels
        .iter()
        .filter(|(_, d)| !d.is_zero())
        .map(|((f, t), d)| {
            json!({
                "from": crate::cog::show_face(b, f),
                "to": crate::cog::show_face(b, t),
                "label": d.support().iter().map(|s| format!("{}^{}", b.sys().name(s), d.component(s))).collect::<Vec<_>>().join(" "),
            })
        })
        .collect();
    Ok(json!({
        "radius": ctx.radius,
        "edges": l.len(),
        "nontrivial_labels": entries,
        "report": to_value(&report),
        "passed": report.passed(),
    }))
}

fn verify(ctx: &Ctx) -> Result<Value> {
    let b = &ctx.b;
    let seq = sequence(ctx)?;
    let labels = label_sequence(b, &seq)?;
    let c = seq.last();
    let l = labels.last().unwrap();
    let lab = verify_labeling(b, c, l)?;
    let check = check_covering(b, c, l)?;
    Ok(json!({
        "radius": ctx.radius,
        "chambers": c.len(),
        "labeling_passed": lab.passed(),
        "fiber_pairs": check.fiber_pairs,
        "morphism": to_value(&check.morphism),
        "fibers": to_value(&check.fibers),
        "sheet_counts": check.sheet_counts,
        "sheets": check.sheets(),
        "passed": lab.passed() && check.passed(),
    }))
}

fn index(ctx: &Ctx) -> Result<Value> {
    let seq = sequence(ctx)?;
    let labels = label_sequence(&ctx.b, &seq)?;
    let cov = build_covering(&ctx.b, seq.last(), labels.last().unwrap())?;
    Ok(json!({ "radius": ctx.radius, "index": cov.sheets, "chambers": seq.last().len() }))
}

fn apartments(ctx: &Ctx) -> Result<Value> {
    let frags = apartments_through_base(&ctx.b, ctx.radius, ctx.cfg.chamber_cap)?;
    Ok(json!({
        "radius": ctx.radius,
        "count": frags.len(),
        "fragments": frags.iter().map(|f| f.chambers.iter().map(|c| ctx.chamber(c)).collect::<Vec<_>>()).collect::<Vec<_>>(),
    }))
}

fn witness(ctx: &Ctx) -> Result<Value> {
    let frags = apartments_through_base(&ctx.b, ctx.radius, ctx.cfg.chamber_cap)?;
    let mut out = Vec::new();
    for (j, to) in frags.iter().enumerate() {
        let w = transitivity_witness(&ctx.b, &frags[0], to, ctx.radius)?;
        let moved: Vec<[String; 2]> = w
            .automorphism
            .map
            .iter()
            .filter(|(k, v)| k != v)
            .map(|(k, v)| [ctx.chamber(k), ctx.chamber(v)])
            .collect();
        out.push(json!({ "from": 0, "to": j, "swaps": w.swaps, "moved": moved }));
    }
    Ok(json!({ "radius": ctx.radius, "fragments": frags.len(), "witnesses": out, "passed": true }))
}

fn quotient(ctx: &Ctx) -> Result<(Value, Option<String>)> {
    let b = &ctx.b;
    let h = type_permutation_group(b.sys(), &ctx.cfg.q);
    let y = b.ball(ctx.radius)?;
    let q = quotient_cog(b, &y, &h)?;
    let orders: Vec<String> = q.quotient.groups.iter().map(|g| format!("order {}", g.len())).collect();
    let dot = q.quotient.to_dot(&orders);
    let report = json!({
        "radius": ctx.radius,
        "group_order": q.group_order,
        "subdivision_vertices": q.subdivision.chains.len(),
        "quotient_vertices": q.quotient.vertex_count(),
        "quotient_edges": q.quotient.edges.len(),
        "complex_check": to_value(&q.complex_check),
        "covering_morphism": to_value(&q.covering.morphism),
        "covering_fibers": to_value(&q.covering.fibers),
        "sheets": q.covering.sheets(),
        "passed": q.passed(),
    });
    Ok((report, Some(dot)))
}
