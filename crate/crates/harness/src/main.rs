use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fpp_core::cluster_stats::{boundary_connected_sizes, open_clusters};
use fpp_core::critical_geometry::{innermost_circuit, lowest_crossing, outermost_circuit};
use fpp_core::geodesics::{count_geodesics, detour_bound, lower_bound_certificate, monotone_paths, CertificateOutcome, CountLimits};
use fpp_core::lattice::{annulus_sequence, LatticeBox, Vertex};
use fpp_core::passage::{certify_confinement_with, ConfinementGoal, ConfinementOptions};
use fpp_core::random_field::{sample_configuration, Configuration, EdgeDistribution, SeedSpec};
use fpp_harness::experiment::CONFINEMENT_GROWTH;
use fpp_harness::{Delta1, ExperimentSpec, HarnessError, Result};
use serde_json::json;

#[derive(Parser)]
#[command(name = "fpp", version, about = "First-passage percolation experiments on the square lattice")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every cell of a spec file
    Run {
        spec: PathBuf,
        /// Results directory; defaults to the `output_dir` of the spec file
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Summarize a results directory
    Report { dir: PathBuf },
    /// Print a sampled configuration
    Sample(One),
    /// Passage time from the origin to (n, 0)
    Time(One),
    /// Number of optimal paths from the origin to (n, 0)
    Count(One),
    /// Lowest left-right open crossing of [0, n]^2
    Crossing(One),
    /// Innermost and outermost open circuits of the annuli at scale n
    Circuits(One),
    /// Open cluster statistics of [0, n]^2
    Clusters(One),
    /// Accessible-square lower bound on the optimal-path count
    Certify(One),
}

#[derive(Args, Clone)]
struct One {
    /// Probability that an edge has weight 0 (otherwise 1)
    #[arg(long)]
    p: f64,
    #[arg(long)]
    n: u32,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    rep: u64,
    /// Box as x_min,x_max,y_min,y_max
    #[arg(long, value_parser = parse_box, allow_hyphen_values = true)]
    r#box: Option<LatticeBox>,
    #[arg(long, default_value_t = 1_000_000_000)]
    cap: u64,
    #[arg(long, default_value_t = 1_000_000_000)]
    steps: u64,
    /// Annulus scale exponent, or `auto`
    #[arg(long, default_value = "auto", value_parser = parse_delta1)]
    delta1: Delta1,
    #[arg(long, default_value_t = 32)]
    tile: u32,
    #[arg(long)]
    json: bool,
}

fn parse_box(s: &str) -> std::result::Result<LatticeBox, String> {
    let v: Vec<i32> = s.split(',').map(|x| x.trim().parse::<i32>().map_err(|e| e.to_string())).collect::<std::result::Result<_, _>>()?;
    match v[..] {
        [a, b, c, d] => LatticeBox::new(a, b, c, d).map_err(|e| e.to_string()),
        _ => Err("expected x_min,x_max,y_min,y_max".into()),
    }
}

fn parse_delta1(s: &str) -> std::result::Result<Delta1, String> {
    if s == "auto" {
        return Ok(Delta1::Auto);
    }
    let d: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if d > 0.0 && d < 1.0 {
        Ok(Delta1::Fixed(d))
    } else {
        Err(format!("{d} is outside (0, 1)"))
    }
}

impl One {
    fn dist(&self) -> Result<EdgeDistribution> {
        Ok(EdgeDistribution::bernoulli(self.p)?)
    }

    fn seed(&self) -> SeedSpec {
        SeedSpec { master_seed: self.seed, replicate_index: self.rep }
    }

    fn sample(&self, default: LatticeBox) -> Result<Configuration> {
        Ok(sample_configuration(self.r#box.unwrap_or(default), &self.dist()?, self.seed()))
    }

    fn square(&self) -> Result<LatticeBox> {
        Ok(LatticeBox::new(0, self.n as i32, 0, self.n as i32)?)
    }

    /// The given box, or the first box in which optimal paths are confined.
    fn confined(&self, goal: ConfinementGoal) -> Result<(Configuration, Option<bool>)> {
        if let Some(b) = self.r#box {
            return Ok((sample_configuration(b, &self.dist()?, self.seed()), None));
        }
        let opts = ConfinementOptions { goal, growth: CONFINEMENT_GROWTH, ..ConfinementOptions::default() };
        let (config, c) = certify_confinement_with(&self.dist()?, self.n, self.seed(), &opts)?;
        let ok = match goal {
            ConfinementGoal::Time => c.time_exact,
            ConfinementGoal::Paths => c.certified,
        };
        Ok((config, Some(ok)))
    }
}

fn emit(json: bool, value: serde_json::Value, human: String) {
    if json {
        println!("{value}");
    } else {
        println!("{human}");
    }
}

fn target(a: &One) -> Vertex {
    Vertex::new(a.n as i32, 0)
}

fn execute(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Run { spec, out } => {
            let text = std::fs::read_to_string(&spec).map_err(|e| HarnessError::io(&spec, e))?;
            let spec = ExperimentSpec::parse(&text)?;
            let out = out
                .or_else(|| spec.output_dir.as_ref().map(PathBuf::from))
                .ok_or_else(|| HarnessError::Usage("no --out and no output_dir in the spec file".into()))?;
            let s = fpp_harness::run(&spec, &out)?;
            eprintln!(
                "{}: {} cells, {} already done, {} completed, {} failed",
                out.display(),
                s.total,
                s.skipped,
                s.completed,
                s.failures.len()
            );
            for f in &s.failures {
                eprintln!("failed: p={} n={} rep={}: {}", f.p, f.n, f.rep, f.error);
            }
            Ok(s.exit_code())
        }
        Command::Report { dir } => {
            let rep = fpp_harness::report(&dir)?;
            print!("{}", rep.summary_csv());
            for v in &rep.verdicts {
                println!("{v}");
            }
            Ok(0)
        }
        Command::Sample(a) => {
            let c = a.sample(LatticeBox::centered(a.n as i32)?)?;
            emit(a.json, json!({ "bbox": c.bbox().to_string(), "dump": c.dump() }), c.dump());
            Ok(0)
        }
        Command::Time(a) => {
            let (c, certified) = a.confined(ConfinementGoal::Time)?;
            let t = fpp_core::passage::passage_time(&c, &[Vertex::ORIGIN], &[target(&a)])?;
            emit(a.json, json!({ "T": t.to_string(), "bbox": c.bbox().to_string(), "certified": certified }), t.to_string());
            Ok(0)
        }
        Command::Count(a) => {
            let (c, certified) = a.confined(ConfinementGoal::Paths)?;
            let r = count_geodesics(&c, Vertex::ORIGIN, target(&a), &CountLimits::new(a.cap, a.steps))?;
            let mono = monotone_paths(&c, Vertex::ORIGIN, target(&a))?;
            let mut lower = r.count.lower_bound().clone().max(mono.count);
            if r.count.is_overflow() {
                lower = lower.max(detour_bound(&c, Vertex::ORIGIN, target(&a))?.lower_bound());
            }
            let value = json!({
                "count": r.count.exact().map(|x| x.to_string()),
                "overflow": r.count.is_overflow(),
                "count_lower": lower.to_string(),
                "T": r.time.to_string(),
                "max_len": r.max_len,
                "bbox": c.bbox().to_string(),
                "certified": certified,
            });
            emit(a.json, value, r.count.to_string());
            Ok(0)
        }
        Command::Crossing(a) => {
            let b = a.r#box.unwrap_or(a.square()?);
            let c = a.sample(b)?;
            match lowest_crossing(&c, b) {
                Some(x) => emit(
                    a.json,
                    json!({ "length": x.len(), "vertices": x.path.vertices().iter().map(|v| [v.x, v.y]).collect::<Vec<_>>() }),
                    x.to_vertex_list().trim_end().to_string(),
                ),
                None => emit(a.json, json!({ "length": null }), "none".into()),
            }
            Ok(0)
        }
        Command::Circuits(a) => {
            let seq = annulus_sequence(a.n, a.delta1.resolve(a.n))?;
            let c = a.sample(seq.outermost_box())?;
            let mut rows = Vec::new();
            let mut text = String::new();
            for (i, ann) in seq.annuli().iter().enumerate() {
                let inner = innermost_circuit(&c, ann).map(|x| x.circuit.len());
                let outer = outermost_circuit(&c, ann).map(|x| x.circuit.len());
                let show = |x: Option<usize>| x.map_or("none".to_string(), |l| l.to_string());
                text.push_str(&format!("A{} {}: innermost {} outermost {}\n", i + 1, ann.outer(), show(inner), show(outer)));
                rows.push(json!({ "annulus": i + 1, "outer": ann.outer().to_string(), "innermost": inner, "outermost": outer }));
            }
            emit(a.json, json!(rows), text.trim_end().to_string());
            Ok(0)
        }
        Command::Clusters(a) => {
            let b = a.r#box.unwrap_or(a.square()?);
            let c = a.sample(b)?;
            let d = open_clusters(&c, b);
            let tiles = boundary_connected_sizes(&c, b, a.tile);
            let full: Vec<usize> = tiles.iter().filter(|t| !t.truncated).map(|t| t.count).collect();
            let mean = (!full.is_empty()).then(|| full.iter().sum::<usize>() as f64 / full.len() as f64);
            emit(
                a.json,
                json!({ "largest": d.largest(), "clusters": d.num_clusters(), "tiles": full.len(), "boundary_mean": mean }),
                format!(
                    "largest {}\nclusters {}\nboundary-connected mean {}",
                    d.largest(),
                    d.num_clusters(),
                    mean.map_or("n/a".into(), |m| format!("{m:.3}"))
                ),
            );
            Ok(0)
        }
        Command::Certify(a) => {
            let half = 2 * a.n as i32;
            let c = a.sample(LatticeBox::centered(half)?)?;
            match lower_bound_certificate(&c, a.n, a.delta1.resolve(a.n))? {
                CertificateOutcome::Certificate(cert) => emit(
                    a.json,
                    json!({ "kappa": cert.kappa, "lower_bound": cert.lower_bound.to_string(), "m": cert.m }),
                    format!("kappa {}\n2^kappa {}", cert.kappa, cert.lower_bound),
                ),
                CertificateOutcome::NotApplicable => emit(a.json, json!({ "kappa": null }), "not-applicable".into()),
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("fpp: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
