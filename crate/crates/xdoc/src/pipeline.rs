//! Pipelines of stages run over many input files.

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use rayon::prelude::*;

use crate::stage::{read_xml, BootstrapOutput, Stage, StageKind, StageSpec, CANDIDATES_FILE, ONTOLOGY_FILE};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DependencyOrderError {
    #[error("pipeline has no stages")]
    Empty,
    #[error("stage `{stage}` on line {line} cannot follow `{after}`")]
    OutOfOrder { stage: StageKind, after: StageKind, line: usize },
    #[error("stage `{stage}` on line {line} requires `{requires}` earlier in the pipeline")]
    MissingPrerequisite { stage: StageKind, requires: StageKind, line: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PipelineSpec {
    /// Stages with the line they were declared on.
    pub stages: Vec<(usize, StageSpec)>,
}

impl PipelineSpec {
    /// One `stage key=value ...` per line; `#` starts a comment. Relative
    /// paths resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<PipelineSpec> {
        let mut stages = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let spec = StageSpec::parse_line(line, base).with_context(|| format!("line {}", i + 1))?;
            stages.push((i + 1, spec));
        }
        Ok(PipelineSpec { stages })
    }

    pub fn load(path: &Path) -> Result<PipelineSpec> {
        let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        PipelineSpec::parse(&text, base).with_context(|| format!("{}", path.display()))
    }

    /// Stages must appear in pipeline order, each at most once, and
    /// bootstrapping needs tagged documents.
    pub fn validate(&self) -> Result<(), DependencyOrderError> {
        if self.stages.is_empty() {
            return Err(DependencyOrderError::Empty);
        }
        for w in self.stages.windows(2) {
            let ((_, a), (line, b)) = (&w[0], &w[1]);
            if b.kind <= a.kind {
                return Err(DependencyOrderError::OutOfOrder {
                    stage: b.kind,
                    after: a.kind,
                    line: *line,
                });
            }
        }
        for (line, s) in &self.stages {
            if s.kind == StageKind::Bootstrap && !self.stages.iter().any(|(_, t)| t.kind == StageKind::Tag) {
                return Err(DependencyOrderError::MissingPrerequisite {
                    stage: s.kind,
                    requires: StageKind::Tag,
                    line: *line,
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default)]
pub struct PipelineOptions {
    /// Worker threads; 0 picks the number of cores.
    pub jobs: usize,
    /// Write the output of every stage and keep files after a failure.
    pub keep_intermediate: bool,
    /// Per-stage defaults, overridden by the pipeline's own options.
    pub defaults: Vec<StageSpec>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PipelineSummary {
    pub outputs: Vec<PathBuf>,
    /// Lexicon candidate lines from parsing, first occurrence order.
    pub candidates: Vec<String>,
    pub bootstrap: Option<BootstrapOutput>,
}

struct FileRun {
    steps: Vec<(StageKind, String)>,
    candidates: Vec<String>,
    error: Option<anyhow::Error>,
}

fn run_file(stages: &[Stage], input: &Path) -> FileRun {
    let mut run = FileRun {
        steps: Vec::new(),
        candidates: Vec::new(),
        error: None,
    };
    let mut data = match fs::read(input) {
        Ok(d) => d,
        Err(e) => {
            run.error = Some(anyhow!("cannot read {}: {}", input.display(), e));
            return run;
        }
    };
    for stage in stages.iter().filter(|s| s.kind() != StageKind::Bootstrap) {
        match stage.process(&data) {
            Ok(out) => {
                run.candidates.extend(out.candidates);
                data = out.xml.clone().into_bytes();
                run.steps.push((stage.kind(), out.xml));
            }
            Err(e) => {
                run.error = Some(e.context(format!("{}: stage `{}`", input.display(), stage.kind())));
                break;
            }
        }
    }
    run
}

fn output_stem(input: &Path) -> Result<String> {
    input
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .ok_or_else(|| anyhow!("input {} has no file name", input.display()))
}

/// Runs `spec` over every input and writes `<stem>.xml` for each into
/// `outdir`. Bootstrapping writes the candidate lexicon and ontology there
/// too. On failure the files written so far are removed unless
/// intermediates are kept.
pub fn run_pipeline(spec: &PipelineSpec, inputs: &[PathBuf], outdir: &Path, opts: &PipelineOptions) -> Result<PipelineSummary> {
    spec.validate()?;
    let stages = spec
        .stages
        .iter()
        .map(|(line, s)| Stage::load(&s.with_defaults(&opts.defaults)).with_context(|| format!("stage `{}` on line {}", s.kind, line)))
        .collect::<Result<Vec<_>>>()?;
    let mut seen = HashMap::new();
    let mut stems = Vec::new();
    for input in inputs {
        let stem = output_stem(input)?;
        if let Some(prev) = seen.insert(stem.clone(), input) {
            bail!("inputs {} and {} would write the same output", prev.display(), input.display());
        }
        stems.push(stem);
    }
    fs::create_dir_all(outdir).with_context(|| format!("cannot create {}", outdir.display()))?;

    let pool = rayon::ThreadPoolBuilder::new().num_threads(opts.jobs).build()?;
    let runs: Vec<FileRun> = pool.install(|| inputs.par_iter().map(|i| run_file(&stages, i)).collect());

    let mut written = Vec::new();
    let result = write_results(&stages, &stems, runs, outdir, opts, &mut written);
    if result.is_err() && !opts.keep_intermediate {
        for p in &written {
            let _ = fs::remove_file(p);
        }
    }
    result
}

fn write(path: PathBuf, content: &str, written: &mut Vec<PathBuf>) -> Result<PathBuf> {
    fs::write(&path, content).with_context(|| format!("cannot write {}", path.display()))?;
    written.push(path.clone());
    Ok(path)
}

fn write_results(
    stages: &[Stage],
    stems: &[String],
    runs: Vec<FileRun>,
    outdir: &Path,
    opts: &PipelineOptions,
    written: &mut Vec<PathBuf>,
) -> Result<PipelineSummary> {
    let mut summary = PipelineSummary::default();
    let mut seen = BTreeSet::new();
    let mut finals = Vec::new();
    let mut failure = None;
    for (stem, run) in stems.iter().zip(runs) {
        if opts.keep_intermediate {
            for (i, (kind, xml)) in run.steps.iter().enumerate() {
                write(outdir.join(format!("{}.{}-{}.xml", stem, i + 1, kind)), xml, written)?;
            }
        }
        if let Some(e) = run.error {
            failure.get_or_insert(e);
            continue;
        }
        for c in run.candidates {
            if seen.insert(c.clone()) {
                summary.candidates.push(c);
            }
        }
        let last = run.steps.last().map(|s| s.1.clone()).unwrap_or_default();
        summary.outputs.push(write(outdir.join(format!("{}.xml", stem)), &last, written)?);
        finals.push(last);
    }
    if let Some(e) = failure {
        return Err(e);
    }
    for stage in stages {
        match stage {
            Stage::Parse(p) => {
                if let Some(path) = &p.candidates {
                    let mut text = summary.candidates.join("\n");
                    if !text.is_empty() {
                        text.push('\n');
                    }
                    write(path.clone(), &text, written)?;
                }
            }
            Stage::Bootstrap(b) => {
                let docs = finals.iter().map(|x| read_xml(x.as_bytes())).collect::<Result<Vec<_>>>()?;
                let out = b.run(&docs);
                write(outdir.join(CANDIDATES_FILE), &out.lexicon, written)?;
                write(outdir.join(ONTOLOGY_FILE), &out.ontology, written)?;
                summary.bootstrap = Some(out);
            }
            _ => {}
        }
    }
    Ok(summary)
}
