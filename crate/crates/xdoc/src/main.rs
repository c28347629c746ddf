use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use xdoc::lexicon::{check, import_candidates};
use xdoc::pipeline::{run_pipeline, PipelineOptions, PipelineSpec};
use xdoc::report::{render_report, Audience};
use xdoc::stage::{read_xml, Stage, StageKind, StageSpec, CANDIDATES_FILE, ONTOLOGY_FILE};
use xdoc_core::morph::Lexicon;
use xdoc_core::postag::coverage_report;

#[derive(Parser)]
#[command(name = "xdoc", version, about = "Staged XML annotation of German technical and medical text")]
struct Cli {
    /// Stage defaults, one `stage key=value ...` line per stage.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Worker threads for pipelines (0: one per core).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Write every stage's output and keep files after a failure.
    #[arg(long, global = true)]
    keep_intermediate: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Io {
    /// Input file; standard input when absent or `-`.
    input: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum AudienceArg {
    Expert,
    Developer,
}

#[derive(Subcommand)]
enum Command {
    /// Detect tokens, abbreviations, patterns and sentences in plain text.
    Structure {
        /// Token pattern file, `seed`, `seed:casting` or `none` (repeatable).
        #[arg(long)]
        patterns: Vec<String>,
        /// Abbreviation list (repeatable); the seed list by default.
        #[arg(long)]
        abbrev: Vec<String>,
        /// Character map file, `seed` for umlaut transliteration, or `none` (default).
        #[arg(long)]
        charmap: Option<String>,
        #[arg(long)]
        no_colon_terminal: bool,
        #[command(flatten)]
        io: Io,
    },
    /// Add part-of-speech tags from the lexicon and heuristics.
    Tag {
        #[arg(long)]
        lexicon: Vec<String>,
        #[arg(long)]
        heuristics: Vec<String>,
        /// Print tagging coverage to standard error.
        #[arg(long)]
        coverage: bool,
        #[command(flatten)]
        io: Io,
    },
    /// Chart-parse every sentence.
    Parse {
        /// Grammar module file or `seed:NAME` (repeatable); `seed:core` by default.
        #[arg(long)]
        grammar: Vec<String>,
        /// Accepted root category (repeatable).
        #[arg(long)]
        root: Vec<String>,
        #[arg(long)]
        max_edges: Option<usize>,
        /// Write lexicon candidates for assumed tokens to this file.
        #[arg(long)]
        candidates: Option<PathBuf>,
        #[command(flatten)]
        io: Io,
    },
    /// Semantic tagging, case frames and structural relations.
    Sem {
        #[arg(long)]
        semlex: Vec<String>,
        /// Fill case frames of concepts.
        #[arg(long)]
        frames: bool,
        /// Compact frame layout with slot forms as attributes.
        #[arg(long)]
        ex7_style: bool,
        /// Structural rule file or `seed` (repeatable).
        #[arg(long)]
        structural: Vec<String>,
        #[command(flatten)]
        io: Io,
    },
    /// Induce lexicon candidates and an ontology from tagged documents.
    Bootstrap {
        #[arg(long)]
        threshold: Option<f64>,
        /// Directory of tagged XML documents.
        dir: PathBuf,
        /// Output directory.
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Run a pipeline file over several inputs.
    Pipeline {
        spec: PathBuf,
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Render an annotated document as HTML.
    Report {
        #[arg(long, value_enum, default_value = "expert")]
        audience: AudienceArg,
        #[command(flatten)]
        io: Io,
    },
    /// Lexicon maintenance.
    #[command(subcommand)]
    Lexicon(LexiconCommand),
}

#[derive(Subcommand)]
enum LexiconCommand {
    /// Append reviewed candidates to a lexicon file.
    Import {
        candidates: PathBuf,
        #[arg(long)]
        into: PathBuf,
        /// Write the merged lexicon here instead of updating `--into`.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Validate lexicon files.
    Check {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
}

fn read_input(input: &Option<PathBuf>) -> Result<Vec<u8>> {
    match input {
        Some(p) if p.as_os_str() != "-" => fs::read(p).with_context(|| format!("cannot read {}", p.display())),
        _ => {
            let mut buf = Vec::new();
            io::stdin().read_to_end(&mut buf).context("cannot read standard input")?;
            Ok(buf)
        }
    }
}

fn write_output(output: &Option<PathBuf>, text: &str) -> Result<()> {
    match output {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn input_name(input: &Option<PathBuf>) -> String {
    match input {
        Some(p) if p.as_os_str() != "-" => p.display().to_string(),
        _ => "<stdin>".to_string(),
    }
}

fn set_list(spec: &mut StageSpec, key: &str, values: &[String]) -> Result<()> {
    if !values.is_empty() {
        spec.set(key, values.join(","), Path::new(""))?;
    }
    Ok(())
}

fn load_defaults(config: &Option<PathBuf>) -> Result<Vec<StageSpec>> {
    match config {
        Some(p) => Ok(PipelineSpec::load(p)?.stages.into_iter().map(|(_, s)| s).collect()),
        None => Ok(Vec::new()),
    }
}

fn run_stage(spec: StageSpec, defaults: &[StageSpec], io: &Io) -> Result<Vec<String>> {
    let stage = Stage::load(&spec.with_defaults(defaults))?;
    let input = read_input(&io.input)?;
    let out = stage.process(&input).with_context(|| input_name(&io.input))?;
    write_output(&io.output, &out.xml)?;
    Ok(out.candidates)
}

fn run(cli: Cli) -> Result<()> {
    let defaults = load_defaults(&cli.config)?;
    let here = Path::new("");
    match cli.command {
        Command::Structure {
            patterns,
            abbrev,
            charmap,
            no_colon_terminal,
            io,
        } => {
            let mut spec = StageSpec::new(StageKind::Structure);
            set_list(&mut spec, "patterns", &patterns)?;
            set_list(&mut spec, "abbrev", &abbrev)?;
            if let Some(c) = charmap {
                spec.set("charmap", c, here)?;
            }
            if no_colon_terminal {
                spec.set("colon", "no", here)?;
            }
            run_stage(spec, &defaults, &io)?;
        }
        Command::Tag {
            lexicon,
            heuristics,
            coverage,
            io,
        } => {
            let mut spec = StageSpec::new(StageKind::Tag);
            set_list(&mut spec, "lexicon", &lexicon)?;
            set_list(&mut spec, "heuristics", &heuristics)?;
            let stage = Stage::load(&spec.with_defaults(&defaults))?;
            let out = stage.process(&read_input(&io.input)?).with_context(|| input_name(&io.input))?;
            write_output(&io.output, &out.xml)?;
            if coverage {
                let c = coverage_report(&read_xml(out.xml.as_bytes())?);
                eprintln!(
                    "tokens {} lexicon {} heuristic {} unknown {} pretagged {} untagged {} unknown-ratio {:.3}",
                    c.total,
                    c.lexicon,
                    c.heuristic,
                    c.unknown,
                    c.pretagged,
                    c.untagged,
                    c.unknown_ratio()
                );
            }
        }
        Command::Parse {
            grammar,
            root,
            max_edges,
            candidates,
            io,
        } => {
            let mut spec = StageSpec::new(StageKind::Parse);
            set_list(&mut spec, "grammar", &grammar)?;
            set_list(&mut spec, "roots", &root)?;
            if let Some(m) = max_edges {
                spec.set("max-edges", m.to_string(), here)?;
            }
            if let Some(c) = &candidates {
                spec.set("candidates", c.to_string_lossy(), here)?;
            }
            let spec = spec.with_defaults(&defaults);
            let stage = Stage::load(&spec)?;
            let out = stage.process(&read_input(&io.input)?).with_context(|| input_name(&io.input))?;
            write_output(&io.output, &out.xml)?;
            if let Stage::Parse(p) = &stage {
                if let Some(path) = &p.candidates {
                    let mut lines: Vec<String> = Vec::new();
                    for c in out.candidates {
                        if !lines.contains(&c) {
                            lines.push(c);
                        }
                    }
                    let text: String = lines.iter().map(|l| format!("{}\n", l)).collect();
                    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?;
                }
            }
        }
        Command::Sem {
            semlex,
            frames,
            ex7_style,
            structural,
            io,
        } => {
            let mut spec = StageSpec::new(StageKind::Sem);
            set_list(&mut spec, "semlex", &semlex)?;
            if frames || ex7_style {
                spec.set("frames", "yes", here)?;
            }
            if ex7_style {
                spec.set("style", "compact", here)?;
            }
            set_list(&mut spec, "structural", &structural)?;
            run_stage(spec, &defaults, &io)?;
        }
        Command::Bootstrap { threshold, dir, output } => {
            let mut spec = StageSpec::new(StageKind::Bootstrap);
            if let Some(t) = threshold {
                spec.set("threshold", t.to_string(), here)?;
            }
            let Stage::Bootstrap(stage) = Stage::load(&spec.with_defaults(&defaults))? else {
                unreachable!()
            };
            let mut files: Vec<PathBuf> = fs::read_dir(&dir)
                .with_context(|| format!("cannot read {}", dir.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "xml"))
                .collect();
            files.sort();
            let mut docs = Vec::new();
            for f in &files {
                let bytes = fs::read(f).with_context(|| format!("cannot read {}", f.display()))?;
                docs.push(read_xml(&bytes).with_context(|| f.display().to_string())?);
            }
            let out = stage.run(&docs);
            fs::create_dir_all(&output)?;
            fs::write(output.join(CANDIDATES_FILE), &out.lexicon)?;
            fs::write(output.join(ONTOLOGY_FILE), &out.ontology)?;
        }
        Command::Pipeline { spec, inputs, output } => {
            let spec = PipelineSpec::load(&spec)?;
            let opts = PipelineOptions {
                jobs: cli.jobs,
                keep_intermediate: cli.keep_intermediate,
                defaults,
            };
            run_pipeline(&spec, &inputs, &output, &opts)?;
        }
        Command::Report { audience, io } => {
            let doc = read_xml(&read_input(&io.input)?).with_context(|| input_name(&io.input))?;
            let audience = match audience {
                AudienceArg::Expert => Audience::Expert,
                AudienceArg::Developer => Audience::Developer,
            };
            write_output(&io.output, &render_report(&doc, audience))?;
        }
        Command::Lexicon(LexiconCommand::Import { candidates, into, output }) => {
            let lex = fs::read_to_string(&into).with_context(|| format!("cannot read {}", into.display()))?;
            let cands = fs::read_to_string(&candidates).with_context(|| format!("cannot read {}", candidates.display()))?;
            let (merged, summary) = import_candidates(&lex, &cands)?;
            let target = output.unwrap_or(into);
            fs::write(&target, merged).with_context(|| format!("cannot write {}", target.display()))?;
            eprintln!("added {} entries, skipped {} duplicates", summary.added, summary.duplicates);
        }
        Command::Lexicon(LexiconCommand::Check { files }) => {
            let mut failed = false;
            for f in &files {
                let text = fs::read_to_string(f).with_context(|| format!("cannot read {}", f.display()))?;
                match Lexicon::parse(&text).map_err(anyhow::Error::from).and_then(|l| check(&l).map(|_| l)) {
                    Ok(l) => println!("{}: {} entries", f.display(), l.entries().len()),
                    Err(e) => {
                        eprintln!("{}: {}", f.display(), e);
                        failed = true;
                    }
                }
            }
            if failed {
                bail!("lexicon check failed");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("xdoc: {:#}", e);
            ExitCode::FAILURE
        }
    }
}
