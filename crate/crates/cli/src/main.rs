use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gsc_core::io::{
    format_real, graph_edge_list, graph_vertex_table, parse_carpet_spec, parse_config, report_csv,
    report_json, samples_csv, table_csv, ConfigDocument, RunManifest, SolverSection,
};
use gsc_core::studies::{capacity_sequence, padded_operator, task_seed};
use gsc_core::{
    build_crosswire, build_inner_graph, build_outer_graph, gibbs_hard_wall, resistance_sequence,
    run_studies, sample_gff_batch, validate_gsc_with, CarpetSpec, Error, Observable, RunMode,
    StudyPlan,
};

#[derive(Parser)]
#[command(name = "gsc", version, about = "Carpet graphs, Green's functions and hard-wall free fields")]
struct Cli {
    #[command(flatten)]
    input: Input,
    /// Directory for artifacts and the run manifest.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Serial execution, zero runtimes and a fixed timestamp for byte-identical replay.
    #[arg(long, global = true)]
    deterministic: bool,
    /// Master seed; overrides the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Input {
    /// Full configuration document.
    #[arg(long, global = true, conflicts_with_all = ["spec", "preset"])]
    config: Option<PathBuf>,
    /// Carpet spec file (the `[carpet]` keys at top level).
    #[arg(long, global = true, conflicts_with = "preset")]
    spec: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    preset: Option<Preset>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    SierpinskiCarpet,
    MengerSponge,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Outer,
    Inner,
    Crosswire,
}

#[derive(Subcommand)]
enum Command {
    /// Check the four carpet axioms.
    Validate {
        /// Repeat the non-diagonality check on level-2 blocks.
        #[arg(long)]
        deep: bool,
    },
    /// Export a graph as a vertex table and an edge list.
    Build {
        #[arg(long)]
        level: u32,
        #[arg(long, value_enum, default_value = "outer")]
        kind: Kind,
    },
    /// Green entries of V_N killed outside V_{N+pad}.
    Green {
        #[arg(long)]
        level: u32,
        /// Vertex id pairs `i:j` in V_N; the diagonal when absent.
        #[arg(long, value_delimiter = ',')]
        pairs: Vec<String>,
    },
    /// Crosswire resistances and successive ratios.
    Resistance {
        #[arg(long, default_value_t = 3)]
        n_max: u32,
    },
    /// Schur and equilibrium capacities.
    Capacity {
        #[arg(long, value_delimiter = ',', default_value = "0,1,2")]
        levels: Vec<u32>,
        /// Resistance factor; estimated from the crosswire at level 3 when absent.
        #[arg(long)]
        rho: Option<f64>,
    },
    /// Exact free field samples on V_N killed outside V_{N+pad}.
    Sample {
        #[arg(long)]
        level: u32,
        #[arg(long, default_value_t = 10)]
        count: usize,
    },
    /// Hard-wall Gibbs run with the wall on V_N.
    Wall {
        #[arg(long)]
        level: u32,
    },
    /// Every scaling study.
    Study,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::Config(list) = &e {
                for m in list {
                    eprintln!("  {m}");
                }
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn load(cli: &Cli) -> Result<ConfigDocument, Error> {
    let mut doc = if let Some(p) = &cli.input.config {
        parse_config(p)?
    } else {
        let (id, spec) = if let Some(p) = &cli.input.spec {
            let text = std::fs::read_to_string(p).map_err(|e| Error::Config(vec![format!("{}: {e}", p.display())]))?;
            parse_carpet_spec(&text)?
        } else {
            match cli.input.preset {
                Some(Preset::SierpinskiCarpet) => ("sierpinski_carpet".into(), CarpetSpec::sierpinski_carpet()),
                Some(Preset::MengerSponge) => ("menger_sponge".into(), CarpetSpec::menger_sponge()),
                None => return Err(Error::Config(vec!["one of --config, --spec or --preset is required".into()])),
            }
        };
        let solver = SolverSection::default();
        let plan = StudyPlan { spec_id: id.clone(), pad: solver.pad, ..StudyPlan::default() };
        ConfigDocument { spec_id: id, carpet: spec, solver, chain: plan.chain.clone(), plan }
    };
    if let Some(s) = cli.seed {
        doc.plan.seed = s;
        doc.chain.seed = s;
        doc.plan.chain.seed = s;
    }
    Ok(doc)
}

fn run(cli: &Cli) -> Result<u8, Error> {
    let doc = load(cli)?;
    let spec = &doc.carpet;
    let caps = doc.solver.caps();
    let solver = doc.solver.solver_config();
    let pad = doc.solver.pad;
    let mode = RunMode { deterministic: cli.deterministic };
    let args: Vec<String> = std::env::args().collect();
    let mut manifest = RunManifest::new(spec, args, doc.plan.seed, cli.deterministic);
    let out = &cli.out;
    let path = |name: &str| -> PathBuf { out.join(name) };
    let mut code = 0u8;
    match &cli.command {
        Command::Validate { deep } => {
            let report = validate_gsc_with(spec, *deep);
            let fails = report.failures();
            println!("spec {}: {}", doc.spec_id, if fails.is_empty() { "valid" } else { "INVALID" });
            for (name, st) in [
                ("GSC1 symmetry", &report.symmetry),
                ("GSC2 connectedness", &report.connectedness),
                ("GSC3 non-diagonality", &report.non_diagonality),
                ("GSC4 borders", &report.borders),
            ] {
                match st {
                    gsc_core::AxiomStatus::Pass => println!("  {name}: pass"),
                    gsc_core::AxiomStatus::Fail { witness } => println!("  {name}: FAIL {witness:?}"),
                }
            }
            let mut json = serde_json::to_value(&report).expect("report serializes");
            json["failures"] = serde_json::json!(fails);
            manifest.emit(&path("validation.json"), &format!("{}\n", serde_json::to_string_pretty(&json).unwrap()))?;
            if !fails.is_empty() {
                code = 2;
            }
        }
        Command::Build { level, kind } => {
            let g = match kind {
                Kind::Outer => build_outer_graph(spec, *level, &caps)?,
                Kind::Inner => build_inner_graph(spec, *level, &caps)?,
                Kind::Crosswire => build_crosswire(spec, *level, &caps)?,
            };
            println!("{} vertices, {} edges", g.len(), g.num_edges());
            manifest.emit(&path("vertices.txt"), &graph_vertex_table(&g))?;
            manifest.emit(&path("edges.txt"), &graph_edge_list(&g))?;
        }
        Command::Green { level, pairs } => {
            let (g, op, inner) = padded_operator(spec, *level, level + pad, solver, &caps)?;
            let parsed: Vec<(usize, usize)> = if pairs.is_empty() {
                (0..inner.len()).map(|i| (i, i)).collect()
            } else {
                pairs.iter().map(|p| parse_pair(p, inner.len())).collect::<Result<_, _>>()?
            };
            let local: Vec<usize> = op.locals(&inner)?;
            let mut rows = Vec::new();
            for &(i, j) in &parsed {
                let col = op.green_column(local[j])?;
                let mut resid = op.apply(&col);
                resid[local[j]] -= 1.0;
                let r = resid.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                let name = format!("G({};{})", join(g.coord(inner[i])), join(g.coord(inner[j])));
                rows.push(vec![
                    doc.spec_id.clone(),
                    level.to_string(),
                    (level + pad).to_string(),
                    name,
                    format_real(col[local[i]]),
                    format_real(r),
                ]);
            }
            manifest.emit(&path("green.csv"), &table_csv(&["spec_id", "N", "M_pad", "quantity", "value", "residual"], &rows))?;
            println!("{} entries", rows.len());
        }
        Command::Resistance { n_max } => {
            let seq = resistance_sequence(spec, *n_max, &caps)?;
            let rows: Vec<Vec<String>> = seq
                .iter()
                .map(|r| {
                    println!("N={} R={:.10} rho_hat={}", r.level, r.resistance, r.rho_hat.map_or("-".into(), |v| format!("{v:.6}")));
                    vec![
                        doc.spec_id.clone(),
                        r.level.to_string(),
                        format_real(r.resistance),
                        r.rho_hat.map_or(String::new(), format_real),
                    ]
                })
                .collect();
            manifest.emit(&path("resistance.csv"), &table_csv(&["spec_id", "N", "resistance", "rho_hat"], &rows))?;
        }
        Command::Capacity { levels, rho } => {
            let rho = match rho {
                Some(r) => *r,
                None => gsc_core::estimate_rho(spec, 3, &caps)?,
            };
            let plan = StudyPlan { capacity_levels: levels.clone(), ..doc.plan.clone() };
            let report = capacity_sequence(spec, &plan, rho, solver, mode, &caps)?;
            for r in &report.rows {
                println!("N={} {} = {}", r.level, r.quantity, r.value);
            }
            manifest.emit(&path("capacity.csv"), &report_csv(&report))?;
        }
        Command::Sample { level, count } => {
            let (_, op, inner) = padded_operator(spec, *level, level + pad, solver, &caps)?;
            let seed = task_seed(doc.plan.seed, 100, *level);
            manifest.task_seeds.insert("sample".into(), seed);
            let local = op.locals(&inner)?;
            let mut samples = sample_gff_batch(&op, *count, seed)?;
            for s in &mut samples {
                s.values = local.iter().map(|&i| s.values[i]).collect();
            }
            manifest.emit(&path("samples.csv"), &samples_csv(&samples))?;
            println!("{} samples on {} vertices", samples.len(), inner.len());
        }
        Command::Wall { level } => {
            let (_, op, inner) = padded_operator(spec, *level, level + pad, solver, &caps)?;
            let wall = op.locals(&inner)?;
            let mut chain = doc.chain.clone();
            if cli.seed.is_none() {
                chain.seed = task_seed(doc.plan.seed, 101, *level);
            }
            manifest.task_seeds.insert("wall".into(), chain.seed);
            let obs = vec![Observable { name: "mean_height".into(), vertices: wall.clone() }];
            let run = gibbs_hard_wall(&op, &wall, &chain, &obs, false, cli.deterministic, &caps)?;
            for s in &run.stats.observables {
                println!("{}: {:.6} +- {:.6} (r_hat {:?})", s.name, s.mean, s.stderr, s.r_hat);
            }
            let stats = format!("{}\n", serde_json::to_string_pretty(&run.stats).unwrap());
            manifest.emit(&path("wall_stats.json"), &stats)?;
            let mut rows = Vec::new();
            for (c, tr) in run.traces.iter().enumerate() {
                for (t, v) in tr[0].iter().enumerate() {
                    rows.push(vec![c.to_string(), t.to_string(), format_real(*v)]);
                }
            }
            manifest.emit(&path("wall_trace.csv"), &table_csv(&["chain", "step", "mean_height"], &rows))?;
        }
        Command::Study => {
            manifest.task_seeds.insert("master".into(), doc.plan.seed);
            let report = run_studies(spec, &doc.plan, solver, mode, &caps)?;
            for r in &report.rows {
                manifest.task_seeds.insert(format!("{}:{}", r.study, r.level), r.seed);
            }
            manifest.emit(&path("report.csv"), &report_csv(&report))?;
            manifest.emit(&path("report.json"), &report_json(&report))?;
            println!("{} rows", report.rows.len());
        }
    }
    manifest.write(&path("manifest.json"))?;
    Ok(code)
}

fn parse_pair(p: &str, n: usize) -> Result<(usize, usize), Error> {
    let bad = || Error::Input(format!("pair {p:?} must be i:j with ids below {n}"));
    let (a, b) = p.split_once(':').ok_or_else(bad)?;
    let (a, b): (usize, usize) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
    if a >= n || b >= n {
        return Err(bad());
    }
    Ok((a, b))
}

fn join(c: &[i64]) -> String {
    c.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}
