mod config;

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use inmaca_core::attractor::build_t_f;
use inmaca_core::genome::annotate::annotate;
use inmaca_core::genome::dna::Encoding;
use inmaca_core::genome::synth::{synth_sequences, synth_windows, CODING, PROMOTER};
use inmaca_core::genome::training::encode_labeled;
use inmaca_core::io::eval::{evaluate, time_buckets};
use inmaca_core::io::fasta::{parse_fasta, write_fasta};
use inmaca_core::io::labels::{read_labels, read_truth, write_labels, write_truth, LabelRecord};
use inmaca_core::io::model::{load_model, save_model, ClassifierModel};
use inmaca_core::io::report::{exon_report, promoter_report};
use inmaca_core::io::write_atomic;
use inmaca_core::pipeline::{coding_patterns, train_from_truth, train_from_windows};
use inmaca_core::tree::{Route, TreeRoot};
use inmaca_core::{DnaSequence, Error, Result};

use crate::config::{check_window_length, resolve_window, FileConfig};

const WORKERS_ENV: &str = "INMACA_WORKERS";

#[derive(Parser)]
#[command(
    name = "inmaca",
    version,
    about = "Fuzzy MACA classifiers for coding regions and promoters"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Master seed; overrides the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// One of 54, 108, 162, 252, 354.
    #[arg(long, global = true)]
    window_length: Option<usize>,
    /// Accept any positive multiple of 3 as the window length.
    #[arg(long, global = true)]
    allow_custom: bool,
    /// TOML file with [window], [train], [annotate] and [synth] sections.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum EncodingArg {
    Direct,
    Features,
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    Coding,
    Promoter,
}

#[derive(Subcommand)]
enum Command {
    /// Train a model from labeled windows or from sequences with truth records.
    Train {
        #[arg(
            long,
            required_unless_present = "windows",
            conflicts_with = "windows",
            requires = "truth"
        )]
        fasta: Option<PathBuf>,
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long, requires = "labels")]
        windows: Option<PathBuf>,
        #[arg(long)]
        labels: Option<PathBuf>,
        #[arg(long, value_enum)]
        encoding: Option<EncodingArg>,
        /// Cell count for feature encoding.
        #[arg(long, default_value_t = 8)]
        cells: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Annotate sequences and write exon and promoter reports per sequence.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        fasta: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score a model on labeled windows or on sequences with truth records.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(
            long,
            required_unless_present = "windows",
            conflicts_with = "windows",
            requires = "truth"
        )]
        fasta: Option<PathBuf>,
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long, requires = "labels")]
        windows: Option<PathBuf>,
        #[arg(long)]
        labels: Option<PathBuf>,
        /// Class counted as positive for sensitivity and specificity.
        #[arg(long)]
        positive: Option<String>,
        /// Dataset sizes for the timing table, in windows.
        #[arg(long, value_delimiter = ',', default_value = "5000,6000,10000,20000")]
        timing: Vec<usize>,
        /// Write the report as JSON here as well as printing it.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a synthetic corpus: labeled windows, sequences and truth records.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        sequences: Option<usize>,
        #[arg(long)]
        coding_windows: Option<usize>,
        #[arg(long)]
        noncoding_windows: Option<usize>,
    },
    /// Print a node's rules, T and F, and its basin table.
    InspectBasins {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_enum, default_value = "coding")]
        which: Which,
        /// Route indices from the root, comma separated.
        #[arg(long, value_delimiter = ',')]
        node: Vec<usize>,
    },
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())).into())
}

fn read_fasta(path: &Path) -> Result<Vec<DnaSequence>> {
    parse_fasta(BufReader::new(open(path)?))
}

fn labeled_windows(windows: &Path, labels: &Path) -> Result<Vec<(Vec<u8>, String)>> {
    let seqs = read_fasta(windows)?;
    let labels = read_labels(open(labels)?)?;
    let by_id: HashMap<&str, &str> = labels.iter().map(|l| (l.id.as_str(), l.class.as_str())).collect();
    seqs.iter()
        .map(|s| {
            let class = by_id
                .get(s.id.as_str())
                .ok_or_else(|| Error::Labels(format!("window {} has no label", s.id)))?;
            Ok((s.bases().to_vec(), class.to_string()))
        })
        .collect()
}

fn safe_name(id: &str) -> String {
    id.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || "._-".contains(c) {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn pick(m: &inmaca_core::ModelFile, which: Which) -> Result<&ClassifierModel> {
    match which {
        Which::Coding => Ok(&m.coding),
        Which::Promoter => m
            .promoter
            .as_ref()
            .ok_or_else(|| Error::InvalidParameter("model has no promoter classifier".into())),
    }
}

fn run(cli: Cli) -> Result<()> {
    let g = &cli.global;
    let mut file = FileConfig::load(g.config.as_deref())?;
    let seed = g.seed.or(file.seed).unwrap_or(0);
    if let Some(l) = g.window_length {
        check_window_length(l, g.allow_custom)?;
    }
    let stdout = std::io::stdout();
    let mut out = stdout.lock();

    match cli.command {
        Command::Train {
            fasta,
            truth,
            windows,
            labels,
            encoding,
            cells,
            out: model_path,
        } => {
            let enc = encoding.map(|e| match e {
                EncodingArg::Direct => Encoding::Direct,
                EncodingArg::Features => Encoding::Features { cells },
            });
            let window = resolve_window(&file.window, g.window_length, enc, g.allow_custom)?;
            let model = if let (Some(f), Some(t)) = (&fasta, &truth) {
                let seqs = read_fasta(f)?;
                let truth = read_truth(open(t)?)?;
                train_from_truth(&seqs, &truth, &window, &file.train, seed)?
            } else if let (Some(w), Some(l)) = (&windows, &labels) {
                train_from_windows(&labeled_windows(w, l)?, &window, &file.train, seed)?
            } else {
                return Err(Error::InvalidParameter(
                    "give --fasta/--truth or --windows/--labels".into(),
                ));
            };
            save_model(&model, &model_path)?;
            let t = &model.coding.training;
            writeln!(
                out,
                "model\t{}\nclasses\t{}\ncounts\t{:?}\nroot_fitness\t{:.4}\ntraining_accuracy\t{:.4}\nnodes\t{}\ndepth\t{}\npromoter_model\t{}",
                model_path.display(),
                model.coding.classes.join(","),
                t.counts,
                t.root_fitness,
                t.training_accuracy,
                t.nodes,
                t.depth,
                model.promoter.is_some()
            )?;
        }
        Command::Predict { model, fasta, out: dir } => {
            let m = load_model(&model)?;
            if let Some(l) = g.window_length {
                if l != m.window.length {
                    return Err(Error::InvalidParameter(format!(
                        "--window-length {l} differs from the model's {}",
                        m.window.length
                    )));
                }
            }
            let seqs = read_fasta(&fasta)?;
            let mut acfg = file.annotate.clone();
            acfg.coding_class = m.coding.class_index(CODING)?;
            if let Some(p) = &m.promoter {
                acfg.promoter.class = p.class_index(PROMOTER)?;
            }
            std::fs::create_dir_all(&dir)?;
            for s in &seqs {
                let a = annotate(
                    s,
                    &m.coding.tree,
                    m.promoter.as_ref().map(|p| &p.tree),
                    &m.window,
                    &acfg,
                )?;
                let name = safe_name(&s.id);
                write_atomic(&dir.join(format!("{name}.exons.tsv")), exon_report(&a).as_bytes())?;
                write_atomic(
                    &dir.join(format!("{name}.promoters.tsv")),
                    promoter_report(&a).as_bytes(),
                )?;
                for d in &a.diagnostics {
                    eprintln!("note: {}: {d}", s.id);
                }
                writeln!(out, "{}\t{}\t{}", s.id, a.coding.len(), a.promoters.len())?;
            }
        }
        Command::Evaluate {
            model,
            fasta,
            truth,
            windows,
            labels,
            positive,
            timing,
            out: report_path,
        } => {
            let m = load_model(&model)?;
            let c = &m.coding;
            let lp = if let (Some(w), Some(l)) = (&windows, &labels) {
                let pairs = labeled_windows(w, l)?;
                encode_labeled(
                    pairs.iter().map(|(b, c)| (b.as_slice(), c.as_str())),
                    &c.classes,
                    &m.window,
                )?
            } else if let (Some(f), Some(t)) = (&fasta, &truth) {
                let seqs = read_fasta(f)?;
                let truth = read_truth(open(t)?)?;
                file.train.max_per_class = usize::MAX;
                coding_patterns(&seqs, &truth, &m.window, &file.train, seed)?
            } else {
                return Err(Error::InvalidParameter(
                    "give --fasta/--truth or --windows/--labels".into(),
                ));
            };
            let positive = match positive {
                Some(p) => c.class_index(&p)?,
                None => c.class_index(CODING).unwrap_or(c.classes.len() - 1),
            };
            let mut report = evaluate(&c.tree, &c.classes, &lp.patterns, positive)?;
            if !timing.is_empty() {
                let probe: Vec<_> = lp.patterns.iter().map(|(s, _)| s.clone()).collect();
                report.timing = time_buckets(&c.tree, &probe, &timing)?;
            }
            write!(out, "{}", report.to_text())?;
            if let Some(p) = report_path {
                write_atomic(&p, report.to_json().as_bytes())?;
            }
        }
        Command::Synth {
            out: dir,
            sequences,
            coding_windows,
            noncoding_windows,
        } => {
            let mut s = file.synth.clone();
            s.seed = seed;
            if let Some(l) = g.window_length.or(file.window.length) {
                s.window_length = l;
            }
            s.sequences = sequences.unwrap_or(s.sequences);
            s.coding_windows = coding_windows.unwrap_or(s.coding_windows);
            s.noncoding_windows = noncoding_windows.unwrap_or(s.noncoding_windows);
            let windows = synth_windows(&s)?;
            let (seqs, truth) = synth_sequences(&s)?;
            std::fs::create_dir_all(&dir)?;
            let wseqs: Vec<DnaSequence> = windows
                .iter()
                .map(|w| DnaSequence::new(w.id.clone(), &w.bases))
                .collect::<Result<_>>()?;
            let labels: Vec<LabelRecord> = windows
                .iter()
                .map(|w| LabelRecord {
                    id: w.id.clone(),
                    class: w.class.clone(),
                })
                .collect();
            let mut buf = Vec::new();
            write_fasta(&mut buf, &wseqs)?;
            write_atomic(&dir.join("windows.fa"), &buf)?;
            buf.clear();
            write_labels(&mut buf, &labels)?;
            write_atomic(&dir.join("windows.tsv"), &buf)?;
            buf.clear();
            write_fasta(&mut buf, &seqs)?;
            write_atomic(&dir.join("sequences.fa"), &buf)?;
            buf.clear();
            write_truth(&mut buf, &truth)?;
            write_atomic(&dir.join("truth.tsv"), &buf)?;
            writeln!(
                out,
                "windows\t{}\nsequences\t{}\ntruth\t{}",
                windows.len(),
                seqs.len(),
                truth.len()
            )?;
        }
        Command::InspectBasins { model, which, node } => {
            let m = load_model(&model)?;
            let c = pick(&m, which)?;
            let quant = c.tree.dynamics.quant;
            let root = match &c.tree.root {
                TreeRoot::Leaf(l) => {
                    writeln!(
                        out,
                        "leaf\tclass={}\tpurity={}\tsupport={}",
                        c.classes[l.class], l.purity, l.support
                    )?;
                    return Ok(());
                }
                TreeRoot::Split(n) => n,
            };
            let n = root
                .descend(&node)
                .ok_or_else(|| Error::InvalidParameter(format!("no split node at path {node:?}")))?;
            let tf = build_t_f(&n.rules);
            let rules: Vec<String> = n.rules.numbers().iter().map(|r| r.to_string()).collect();
            writeln!(
                out,
                "node\t{node:?}\ndepth\t{}\nsupport\t{}\nfitness\t{:.4}",
                n.depth, n.support, n.fitness
            )?;
            writeln!(out, "rules\t{}", rules.join(" "))?;
            writeln!(out, "T")?;
            for row in &tf.t {
                let r: Vec<String> = row.iter().map(|v| v.to_string()).collect();
                writeln!(out, "{}", r.join(" "))?;
            }
            let f: Vec<String> = tf.f.iter().map(|v| v.to_string()).collect();
            writeln!(out, "F\t{}", f.join(" "))?;
            writeln!(out, "route\tattractor\tkind\tclass\tpurity\tsupport")?;
            for (i, e) in n.routes.iter().enumerate() {
                let cycle: Vec<String> = e
                    .signature
                    .states()
                    .iter()
                    .map(|s| {
                        let cells: Vec<String> = s.iter().map(|&q| format!("{:.3}", q as f64 * quant)).collect();
                        cells.join(",")
                    })
                    .collect();
                let (kind, class, purity, support) = match &e.route {
                    Route::Leaf(l) => ("leaf", c.classes[l.class].as_str(), l.purity, l.support),
                    Route::Child { purity, node } => {
                        ("child", c.classes[node.majority_class].as_str(), *purity, node.support)
                    }
                };
                writeln!(
                    out,
                    "{i}\t{}\t{kind}\t{class}\t{purity:.4}\t{support}",
                    cycle.join(" > ")
                )?;
            }
        }
    }
    Ok(())
}

fn init_workers() -> Result<()> {
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        let n: usize = v
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("{WORKERS_ENV}={v:?} is not a count")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match init_workers().and_then(|_| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        // reader went away, e.g. `| head`
        Err(Error::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}: {e}", e.kind());
            ExitCode::FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;
    use inmaca_core::genome::dna::encode_window;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn names_are_sanitized() {
        assert_eq!(safe_name("chr1/part:2"), "chr1_part_2");
    }

    #[test]
    fn encoding_flag_maps() {
        let w = resolve_window(
            &Default::default(),
            Some(54),
            Some(Encoding::Features { cells: 8 }),
            false,
        )
        .unwrap();
        assert_eq!(w.cells(), 8);
        assert!(encode_window(&[b'A'; 54], &w).is_ok());
    }
}
