use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use cubelink::campaign::{self, Campaign, Check, Report};
use cubelink::complex::PolytopalComplex;
use cubelink::generators::{InstanceKind, InstanceSpec};
use cubelink::linker::{link_in_star, PolytopeLinker, StarOutcome, StarProblem};
use cubelink::oracle::{Linkage, Mode, DEFAULT_BUDGET};
use cubelink::Error;

#[derive(Parser)]
#[command(name = "cubelink", version, about = "Linkage campaigns on cubes and cubical polytopes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification campaign and print its report.
    Verify(VerifyArgs),
    /// Build a linkage for given pairs with the constructive linker.
    Construct(ConstructArgs),
    /// Print face counts and faces of an instance.
    Inspect(InspectArgs),
    /// Time a campaign over several repetitions.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Cube,
    #[value(alias = "glued")]
    GluedChain,
    #[value(alias = "star")]
    StarOfVertex,
    FromFile,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Exhaustive,
    Sampled,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Args)]
struct InstanceArgs {
    #[arg(long, value_enum, default_value = "cube")]
    kind: Kind,
    #[arg(long, default_value_t = 4)]
    dim: usize,
    /// Number of cubes in a glued chain; also selects the chain as the host
    /// of a star.
    #[arg(long)]
    chain_length: Option<usize>,
    /// Star center (vertex id).
    #[arg(long)]
    center: Option<usize>,
    /// Complex JSON file; implies `--kind from-file`.
    #[arg(long)]
    instance: Option<PathBuf>,
}

impl InstanceArgs {
    fn spec(&self) -> InstanceSpec {
        let kind = match (self.instance.is_some(), self.kind) {
            (true, _) | (_, Kind::FromFile) => InstanceKind::FromFile,
            (_, Kind::Cube) => InstanceKind::Cube,
            (_, Kind::GluedChain) => InstanceKind::GluedChain,
            (_, Kind::StarOfVertex) => InstanceKind::StarOfVertex,
        };
        InstanceSpec {
            kind,
            dim: self.dim,
            chain_length: match (kind, self.chain_length) {
                (InstanceKind::GluedChain, None) => Some(2),
                (_, n) => n,
            },
            center: self.center,
            file: self.instance.clone(),
            seed: None,
        }
    }
}

#[derive(Args)]
struct CampaignArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long, default_value = "k_linked")]
    check: String,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, value_enum, default_value = "exhaustive")]
    mode: ModeArg,
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, env = "CUBELINK_JOBS")]
    jobs: Option<usize>,
    /// Search node budget per oracle call.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    /// Reduce cube terminal sets to orbit representatives.
    #[arg(long)]
    symmetry: bool,
}

impl CampaignArgs {
    fn campaign(&self) -> Result<Campaign, Error> {
        let check: Check = self.check.parse()?;
        let mode = match self.mode {
            ModeArg::Exhaustive => Mode::Exhaustive,
            ModeArg::Sampled => Mode::Sampled {
                n: self.samples,
                seed: self.seed,
            },
        };
        let jobs = self
            .jobs
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
        Ok(Campaign {
            instance: self.instance.spec(),
            check,
            k: self.k,
            mode,
            symmetry: self.symmetry,
            budget: self.budget,
            jobs,
        })
    }
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    campaign: CampaignArgs,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct ConstructArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Pairs as `s-t` separated by commas; vertices by id or label.
    #[arg(long)]
    pairs: String,
    /// Unpaired vertex to avoid (even dimension).
    #[arg(long)]
    avoid: Option<String>,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct InspectArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Also list every face.
    #[arg(long)]
    faces: bool,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    campaign: CampaignArgs,
    #[arg(long, default_value_t = 3)]
    repeat: usize,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Verify(a) => verify(&a),
        Command::Construct(a) => construct(&a),
        Command::Inspect(a) => inspect(&a),
        Command::Bench(a) => bench(&a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn print_report(r: &Report, format: Format) -> Result<(), Error> {
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(r)?),
        Format::Csv => print!("{}", r.to_csv()),
        Format::Text => print!("{}", r.to_text()),
    }
    Ok(())
}

fn verify(a: &VerifyArgs) -> Result<ExitCode, Error> {
    let c = a.campaign.campaign()?;
    log::info!(
        "running {} on {:?} d={} with {} workers",
        c.check.name(),
        c.instance.kind,
        c.instance.dim,
        c.jobs
    );
    let report = campaign::run(&c)?;
    print_report(&report, a.format)?;
    Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn vertex(c: &PolytopalComplex, text: &str) -> Result<usize, Error> {
    let text = text.trim();
    if let Some(v) = c.labels().iter().position(|l| l == text) {
        return Ok(v);
    }
    match text.parse::<usize>() {
        Ok(v) if c.contains_vertex(v) => Ok(v),
        Ok(v) => Err(Error::ForeignVertex(v)),
        Err(_) => Err(Error::InvalidProblem(format!("unknown vertex {text:?}"))),
    }
}

fn parse_pairs(c: &PolytopalComplex, text: &str) -> Result<Vec<(usize, usize)>, Error> {
    text.split(',')
        .map(|p| {
            let (s, t) = p
                .split_once('-')
                .ok_or_else(|| Error::InvalidProblem(format!("pair {p:?} is not of the form s-t")))?;
            Ok((vertex(c, s)?, vertex(c, t)?))
        })
        .collect()
}

fn linkage_json(c: &PolytopalComplex, l: &Linkage) -> Value {
    json!({
        "paths": l.paths,
        "labels": l
            .paths
            .iter()
            .map(|p| p.iter().map(|&v| c.label(v)).collect::<Vec<_>>())
            .collect::<Vec<_>>(),
    })
}

fn construct(a: &ConstructArgs) -> Result<ExitCode, Error> {
    let inst = a.instance.spec().build()?;
    let c = &inst.complex;
    let pairs = parse_pairs(c, &a.pairs)?;
    let avoid = a.avoid.as_deref().map(|x| vertex(c, x)).transpose()?;
    let result = if let Some(center) = inst.center {
        let mut pairs = pairs.clone();
        if let Some(i) = pairs.iter().position(|&(s, t)| s == center || t == center) {
            pairs.swap(0, i);
            if pairs[0].1 == center {
                pairs[0] = (center, pairs[0].0);
            }
        }
        link_in_star(&StarProblem {
            star: c.clone(),
            pairs,
        })
        .map(|out| match out {
            StarOutcome::Linked { linkage, branch } => {
                let mut v = linkage_json(c, &linkage);
                v["branch"] = json!(branch);
                v
            }
            StarOutcome::Refused { facet } => json!({
                "refused": "configuration_df",
                "facet": c.face(facet).map(<[usize]>::to_vec).unwrap_or_default(),
            }),
        })
    } else {
        let linker = PolytopeLinker::new(c)?.with_budget(a.budget);
        let out = match avoid {
            Some(x) => linker.strong_link(&pairs, x),
            None => linker.link(&pairs),
        };
        out.map(|o| {
            let mut v = linkage_json(c, &o.linkage);
            v["branch"] = json!(o.branch);
            v["star_branch"] = json!(o.star_branch);
            v
        })
    };
    let value = match result {
        Ok(v) => v,
        Err(e @ Error::Contract { .. }) => {
            println!("{}", json!({ "error": e.to_string() }));
            return Ok(ExitCode::from(1));
        }
        Err(e) => return Err(e),
    };
    match a.format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&value)?),
        Format::Csv => {
            println!("path,vertices");
            for (i, p) in value["labels"].as_array().into_iter().flatten().enumerate() {
                let labels: Vec<&str> = p.as_array().unwrap().iter().filter_map(Value::as_str).collect();
                println!("{i},{}", labels.join(" "));
            }
        }
        Format::Text => {
            for p in value["labels"].as_array().into_iter().flatten() {
                let labels: Vec<&str> = p.as_array().unwrap().iter().filter_map(Value::as_str).collect();
                println!("{}", labels.join(" - "));
            }
            if let Some(b) = value["branch"].as_str() {
                println!("branch: {b}");
            }
            if value.get("refused").is_some() {
                println!("refused: Configuration dF");
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn inspect(a: &InspectArgs) -> Result<ExitCode, Error> {
    let inst = a.instance.spec().build()?;
    let c = &inst.complex;
    let (g, _) = c.graph();
    let fv = c.f_vector();
    let faces: Vec<Vec<Vec<&str>>> = if a.faces {
        (0..fv.len())
            .map(|d| {
                c.faces_of_dim(d)
                    .iter()
                    .map(|f| f.iter().map(|&v| c.label(v)).collect())
                    .collect()
            })
            .collect()
    } else {
        Vec::new()
    };
    match a.format {
        Format::Json => {
            let mut v = json!({
                "dim": c.dim(),
                "f_vector": fv,
                "vertices": g.n(),
                "edges": g.edge_count(),
                "center": inst.center,
            });
            if a.faces {
                v["faces"] = json!(faces);
            }
            println!("{}", serde_json::to_string_pretty(&v)?);
        }
        Format::Csv => {
            println!("dim,faces");
            for (d, n) in fv.iter().enumerate() {
                println!("{d},{n}");
            }
        }
        Format::Text => {
            println!("dimension: {}", c.dim().map_or("empty".into(), |d| d.to_string()));
            println!("f-vector: {fv:?}");
            println!("graph: {} vertices, {} edges", g.n(), g.edge_count());
            for (d, layer) in faces.iter().enumerate() {
                println!("{d}-faces:");
                for f in layer {
                    println!("  {{{}}}", f.join(","));
                }
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn bench(a: &BenchArgs) -> Result<ExitCode, Error> {
    let c = a.campaign.campaign()?;
    let mut times = Vec::with_capacity(a.repeat);
    let mut checked = 0;
    let mut passed = true;
    for _ in 0..a.repeat.max(1) {
        let start = Instant::now();
        let r = campaign::run(&c)?;
        times.push(start.elapsed().as_secs_f64());
        checked = r.checked;
        passed &= r.passed();
    }
    let best = times.iter().copied().fold(f64::INFINITY, f64::min);
    let mean = times.iter().sum::<f64>() / times.len() as f64;
    let rate = checked as f64 / best;
    match a.format {
        Format::Json => println!(
            "{}",
            serde_json::to_string_pretty(&json!({
                "check": c.check.name(),
                "jobs": c.jobs,
                "checked": checked,
                "runs": times,
                "best_s": best,
                "mean_s": mean,
                "per_second": rate,
            }))?
        ),
        Format::Csv => {
            println!("check,jobs,checked,best_s,mean_s,per_second");
            println!("{},{},{checked},{best:.4},{mean:.4},{rate:.0}", c.check.name(), c.jobs);
        }
        Format::Text => {
            println!("{}: {checked} instances, {} workers", c.check.name(), c.jobs);
            println!("best {best:.3} s, mean {mean:.3} s, {rate:.0} instances/s");
        }
    }
    Ok(if passed { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
