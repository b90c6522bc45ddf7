//! Command-line front end: each subcommand runs the pipeline up to one stage
//! and writes that stage's artifacts into the output directory.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ioforensics::graph::format_percent;
use ioforensics::pipeline::{render_text, run_pipeline, Pipeline, PipelineConfig, PipelineError};

#[derive(Debug, Parser)]
#[command(name = "ioforensics", version, about = "Information-operation archive forensics")]
struct Cli {
    /// Pipeline configuration (TOML). Relative input paths resolve against
    /// its directory.
    #[arg(long, global = true, default_value = "pipeline.toml")]
    config: PathBuf,
    /// Overrides `experiment.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides `output_dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Log stage progress (-v) or everything (-vv).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse and validate the corpora; writes overview.json.
    Ingest,
    /// Build the interaction graph; writes graph.json, graph.graphml, edges.csv.
    Graph,
    /// Label accounts; writes taxonomy.json and labels.csv.
    Taxonomy,
    /// Match takedown accounts to live successors; writes sequels.csv.
    Sequels,
    /// Run the explicit/implicit removal experiment; writes experiments.json.
    Experiment,
    /// Write the per-user corpus for the external classifier.
    ClassifyExport,
    /// Run every stage; writes report.json, report.txt and all artifacts.
    Report,
}

fn load_config(cli: &Cli) -> Result<PipelineConfig, PipelineError> {
    let mut config = PipelineConfig::load(&cli.config)?;
    if let Some(seed) = cli.seed {
        config.experiment.seed = seed;
    }
    if let Some(out) = &cli.out {
        config.output_dir = out.clone();
    }
    Ok(config)
}

fn run(cli: &Cli) -> Result<(), PipelineError> {
    let config = load_config(cli)?;
    if let Command::Report = cli.command {
        let out = run_pipeline(&config)?;
        print!("{}", render_text(&out.report));
        println!("report: {}", out.report_path.display());
        for a in &out.artifacts {
            println!("wrote {}", a.display());
        }
        return Ok(());
    }

    let mut p = Pipeline::new(config)?;
    let written = match cli.command {
        Command::Ingest => {
            let ingest = p.ingest()?;
            for (corpus, o) in &ingest.overview {
                println!(
                    "{corpus}: {} users, {} tweets ({} retweets), {} rows rejected, {} follow trains",
                    o.users, o.tweets, o.retweets, o.rejected_rows, o.follow_trains
                );
            }
            vec![p.write_json("overview.json", &ingest.overview)?]
        }
        Command::Graph => {
            let section = p.graph()?;
            let m = &section.full.metrics;
            println!(
                "full graph: {} nodes, {} edges, density {:.3}, diameter {}, avg path {}",
                m.node_count,
                m.edge_count,
                m.density,
                m.diameter.map_or_else(|| "-".into(), |d| d.to_string()),
                m.avg_path_length.map_or_else(|| "-".into(), |x| format!("{x:.3}")),
            );
            for w in &section.windows {
                println!("{}: {} nodes, {} edges", w.name, w.row.metrics.node_count, w.row.metrics.edge_count);
            }
            let mut files = vec![p.write_json("graph.json", &*section)?];
            files.extend(p.write_graph_artifacts()?);
            files
        }
        Command::Taxonomy => {
            let section = p.taxonomy_section()?;
            for (corpus, types) in &section.types_by_corpus {
                let cells: Vec<String> = types.iter().map(|(t, n)| format!("{t}={n}")).collect();
                println!("{corpus}: {}", cells.join(" "));
            }
            println!("explicit nodes: {}, implicit nodes: {}", section.explicit_nodes, section.implicit_nodes);
            vec![p.write_json("taxonomy.json", &section)?, p.write_labels()?]
        }
        Command::Sequels => {
            let sequels = p.sequels()?;
            for c in sequels.sequels() {
                println!(
                    "{} -> {}  username {:.3}  ({})",
                    c.takedown_username.as_deref().unwrap_or(&c.takedown_user_id),
                    c.live_username.as_deref().unwrap_or(&c.live_user_id),
                    c.scores.username_ratio,
                    c.rule_fired.as_str()
                );
            }
            println!("{} sequel pairs among {} candidates", sequels.sequels().count(), sequels.candidates.len());
            vec![p.write_sequels()?]
        }
        Command::Experiment => {
            let table = p.experiments()?;
            for row in &table.rows {
                match (&row.metrics, &row.deltas) {
                    (Some(m), deltas) => {
                        let density = deltas.as_ref().and_then(|d| d.density).map_or_else(|| "-".into(), format_percent);
                        println!("{:<16} nodes {:>8.1}  density {:.3} ({density})", row.name, m.node_count, m.density);
                    }
                    (None, _) => println!("{:<16} absent: {}", row.name, row.absent_reason.as_deref().unwrap_or("")),
                }
            }
            vec![p.write_json("experiments.json", &*table)?]
        }
        Command::ClassifyExport => vec![p.write_classify_export()?],
        Command::Report => unreachable!("handled above"),
    };
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
