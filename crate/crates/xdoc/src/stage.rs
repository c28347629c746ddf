//! Stage invocations as `stage key=value ...` and their loaded resources.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use xdoc_core::annotation::{parse_xml, serialize_xml, Document};
use xdoc_core::bootstrap::{cluster_concepts, concept_candidates, detect_findings, induce_lexicon, lexicon_text, DEFAULT_THRESHOLD};
use xdoc_core::morph::Lexicon;
use xdoc_core::parser::{parse_document, parse_module, Grammar, GrammarModule, ParseOptions};
use xdoc_core::postag::{parse_heuristics, tag_document, Heuristic};
use xdoc_core::sem::{fill_frames, interpret_structure, parse_structural_rules, sem_tag, FrameStyle, SemLexicon, StructuralRule};
use xdoc_core::seed;
use xdoc_core::structure::{detect_structure, normalize_input, parse_patterns, AbbreviationLexicon, CharMap, StructureConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StageKind {
    Structure,
    Tag,
    Parse,
    Sem,
    Bootstrap,
}

impl StageKind {
    pub const ALL: [StageKind; 5] = [StageKind::Structure, StageKind::Tag, StageKind::Parse, StageKind::Sem, StageKind::Bootstrap];

    pub fn as_str(self) -> &'static str {
        match self {
            StageKind::Structure => "structure",
            StageKind::Tag => "tag",
            StageKind::Parse => "parse",
            StageKind::Sem => "sem",
            StageKind::Bootstrap => "bootstrap",
        }
    }

    pub fn parse(s: &str) -> Option<StageKind> {
        StageKind::ALL.into_iter().find(|k| k.as_str() == s)
    }

    fn keys(self) -> &'static [&'static str] {
        match self {
            StageKind::Structure => &["patterns", "abbrev", "charmap", "colon"],
            StageKind::Tag => &["lexicon", "heuristics"],
            StageKind::Parse => &["grammar", "roots", "max-edges", "candidates"],
            StageKind::Sem => &["semlex", "frames", "style", "structural"],
            StageKind::Bootstrap => &["threshold"],
        }
    }
}

impl fmt::Display for StageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One option; relative paths in `value` resolve against `base`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageOption {
    pub key: String,
    pub value: String,
    pub base: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageSpec {
    pub kind: StageKind,
    pub options: Vec<StageOption>,
}

impl StageSpec {
    pub fn new(kind: StageKind) -> StageSpec {
        StageSpec { kind, options: Vec::new() }
    }

    /// Sets `key`, replacing an earlier value.
    pub fn set(&mut self, key: &str, value: impl Into<String>, base: &Path) -> Result<()> {
        if !self.kind.keys().contains(&key) {
            bail!("stage `{}` has no option `{}` (known: {})", self.kind, key, self.kind.keys().join(", "));
        }
        self.options.retain(|o| o.key != key);
        self.options.push(StageOption {
            key: key.to_string(),
            value: value.into(),
            base: base.to_path_buf(),
        });
        Ok(())
    }

    /// Reads `stage key=value ...`.
    pub fn parse_line(line: &str, base: &Path) -> Result<StageSpec> {
        let mut words = line.split_whitespace();
        let name = words.next().ok_or_else(|| anyhow!("empty stage line"))?;
        let kind = StageKind::parse(name).ok_or_else(|| anyhow!("unknown stage `{}`", name))?;
        let mut spec = StageSpec::new(kind);
        for w in words {
            let (k, v) = w.split_once('=').ok_or_else(|| anyhow!("option `{}` is not key=value", w))?;
            spec.set(k, v, base)?;
        }
        Ok(spec)
    }

    /// This invocation on top of `defaults` for the same stage.
    pub fn with_defaults(&self, defaults: &[StageSpec]) -> StageSpec {
        let mut out = StageSpec::new(self.kind);
        for d in defaults.iter().filter(|d| d.kind == self.kind) {
            for o in &d.options {
                out.options.retain(|x| x.key != o.key);
                out.options.push(o.clone());
            }
        }
        for o in &self.options {
            out.options.retain(|x| x.key != o.key);
            out.options.push(o.clone());
        }
        out
    }

    fn get(&self, key: &str) -> Option<&StageOption> {
        self.options.iter().find(|o| o.key == key)
    }

    fn flag(&self, key: &str, default: bool) -> Result<bool> {
        match self.get(key).map(|o| o.value.as_str()) {
            None => Ok(default),
            Some("yes" | "true" | "1") => Ok(true),
            Some("no" | "false" | "0") => Ok(false),
            Some(v) => bail!("option `{}` expects yes or no, got `{}`", key, v),
        }
    }
}

/// A resource named by an option value: `seed`, `seed:NAME`, `none` or a
/// file path.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Source {
    Seed(Option<String>),
    None,
    File(PathBuf),
}

fn sources(opt: Option<&StageOption>) -> Vec<Source> {
    let Some(o) = opt else { return Vec::new() };
    o.value
        .split(',')
        .filter(|v| !v.is_empty())
        .map(|v| match v {
            "seed" => Source::Seed(None),
            "none" => Source::None,
            v => match v.strip_prefix("seed:") {
                Some(name) => Source::Seed(Some(name.to_string())),
                None => Source::File(o.base.join(v)),
            },
        })
        .collect()
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn with_file<T, E: fmt::Display>(path: &Path, r: std::result::Result<T, E>) -> Result<T> {
    r.map_err(|e| anyhow!("{}: {}", path.display(), e))
}

fn seed_only(src: &Source, what: &str) -> Result<()> {
    match src {
        Source::Seed(Some(n)) => bail!("no seed {} `{}`", what, n),
        _ => Ok(()),
    }
}

pub struct StructureStage {
    pub config: StructureConfig,
    pub charmap: CharMap,
}

pub struct TagStage {
    pub lexicon: Lexicon,
    pub heuristics: Vec<Heuristic>,
}

pub struct ParseStage {
    pub grammar: Grammar,
    pub options: ParseOptions,
    pub candidates: Option<PathBuf>,
}

pub struct SemStage {
    pub lexicon: SemLexicon,
    pub frames: Option<FrameStyle>,
    pub rules: Vec<StructuralRule>,
}

pub struct BootstrapStage {
    pub threshold: f64,
}

/// A stage with its resources loaded.
pub enum Stage {
    Structure(StructureStage),
    Tag(TagStage),
    Parse(ParseStage),
    Sem(SemStage),
    Bootstrap(BootstrapStage),
}

/// Output of a document stage.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Processed {
    pub xml: String,
    /// Lexicon candidate lines found by the parser.
    pub candidates: Vec<String>,
}

/// Candidate files and ontology produced by bootstrapping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BootstrapOutput {
    pub lexicon: String,
    pub ontology: String,
}

pub const CANDIDATES_FILE: &str = "candidates.lex";
pub const ONTOLOGY_FILE: &str = "ontology.tsv";

impl Stage {
    pub fn load(spec: &StageSpec) -> Result<Stage> {
        let stage = match spec.kind {
            StageKind::Structure => Stage::Structure(load_structure(spec)?),
            StageKind::Tag => Stage::Tag(load_tag(spec)?),
            StageKind::Parse => Stage::Parse(load_parse(spec)?),
            StageKind::Sem => Stage::Sem(load_sem(spec)?),
            StageKind::Bootstrap => {
                let threshold = match spec.get("threshold") {
                    Some(o) => o.value.parse::<f64>().with_context(|| format!("invalid threshold `{}`", o.value))?,
                    None => DEFAULT_THRESHOLD,
                };
                Stage::Bootstrap(BootstrapStage { threshold })
            }
        };
        Ok(stage)
    }

    pub fn kind(&self) -> StageKind {
        match self {
            Stage::Structure(_) => StageKind::Structure,
            Stage::Tag(_) => StageKind::Tag,
            Stage::Parse(_) => StageKind::Parse,
            Stage::Sem(_) => StageKind::Sem,
            Stage::Bootstrap(_) => StageKind::Bootstrap,
        }
    }

    /// Runs a document stage on one input. Structure detection reads plain
    /// text, the other stages annotated XML.
    pub fn process(&self, input: &[u8]) -> Result<Processed> {
        if let Stage::Structure(s) = self {
            let text = normalize_input(input, &s.charmap)?;
            return Ok(Processed {
                xml: serialize_xml(&detect_structure(&text, &s.config)),
                candidates: Vec::new(),
            });
        }
        let doc = read_xml(input)?;
        let (doc, candidates) = match self {
            Stage::Tag(t) => (tag_document(doc, &t.lexicon, &t.heuristics), Vec::new()),
            Stage::Parse(p) => {
                let (doc, c) = parse_document(doc, &p.grammar, &p.options);
                (doc, c.iter().map(|c| c.to_line()).collect())
            }
            Stage::Sem(s) => {
                let mut doc = sem_tag(doc, &s.lexicon);
                if let Some(style) = s.frames {
                    doc = fill_frames(doc, &s.lexicon, style).0;
                }
                if !s.rules.is_empty() {
                    doc = interpret_structure(doc, &s.rules).0;
                }
                (doc, Vec::new())
            }
            Stage::Bootstrap(_) => bail!("bootstrap works on a whole corpus"),
            Stage::Structure(_) => unreachable!(),
        };
        Ok(Processed {
            xml: serialize_xml(&doc),
            candidates,
        })
    }
}

/// Parses annotated XML, reporting errors with line and column.
pub fn read_xml(input: &[u8]) -> Result<Document> {
    parse_xml(input).map_err(|e| {
        let text = String::from_utf8_lossy(input);
        let (line, col) = e.line_col(&text);
        anyhow!("{}:{}: {}", line, col, e)
    })
}

impl BootstrapStage {
    pub fn run(&self, corpus: &[Document]) -> BootstrapOutput {
        let findings = detect_findings(corpus);
        BootstrapOutput {
            lexicon: lexicon_text(&induce_lexicon(&findings)),
            ontology: cluster_concepts(&concept_candidates(&findings), self.threshold).to_text(),
        }
    }
}

fn load_structure(spec: &StageSpec) -> Result<StructureStage> {
    let mut config = StructureConfig::default();
    for src in sources(spec.get("patterns")) {
        seed_only(&src, "pattern set").or_else(|e| match &src {
            Source::Seed(Some(n)) if n == "casting" => Ok(()),
            _ => Err(e),
        })?;
        match src {
            Source::Seed(_) => config.patterns.extend(seed::casting_patterns()),
            Source::None => config.patterns.clear(),
            Source::File(p) => config.patterns.extend(with_file(&p, parse_patterns(&read(&p)?))?),
        }
    }
    let abbrev = sources(spec.get("abbrev"));
    let mut text = String::new();
    if abbrev.is_empty() {
        text.push_str(seed::ABBREVIATIONS);
    }
    for src in &abbrev {
        seed_only(src, "abbreviation list")?;
        match src {
            Source::Seed(_) => text.push_str(seed::ABBREVIATIONS),
            Source::None => text.clear(),
            Source::File(p) => {
                let more = read(p)?;
                with_file(p, AbbreviationLexicon::parse(&more))?;
                text.push_str(&more);
            }
        }
        text.push('\n');
    }
    config.abbreviations = AbbreviationLexicon::parse(&text)?;
    let mut charmap = CharMap::new();
    for src in sources(spec.get("charmap")) {
        seed_only(&src, "character map")?;
        match src {
            Source::Seed(_) => charmap = CharMap::transliteration(),
            Source::None => charmap = CharMap::new(),
            Source::File(p) => charmap = with_file(&p, CharMap::parse(&read(&p)?))?,
        }
    }
    config.set_colon_terminal(spec.flag("colon", true)?);
    Ok(StructureStage { config, charmap })
}

fn load_tag(spec: &StageSpec) -> Result<TagStage> {
    let mut text = String::new();
    let lex = sources(spec.get("lexicon"));
    if lex.is_empty() {
        text.push_str(seed::LEXICON);
    }
    for src in lex {
        seed_only(&src, "lexicon")?;
        match src {
            Source::Seed(_) => text.push_str(seed::LEXICON),
            Source::None => {}
            Source::File(p) => text.push_str(&read(&p)?),
        }
        text.push('\n');
    }
    let lexicon = Lexicon::parse(&text).context("lexicon")?;
    let mut heuristics = Vec::new();
    let heur = sources(spec.get("heuristics"));
    if heur.is_empty() {
        heuristics = seed::heuristics();
    }
    for src in heur {
        match src {
            Source::Seed(None) => heuristics.extend(seed::heuristics()),
            Source::Seed(Some(n)) if n == "adjective" => {
                heuristics.extend(parse_heuristics(seed::ADJECTIVE_HEURISTICS).expect("seed heuristics are well-formed"))
            }
            Source::Seed(Some(n)) => bail!("no seed heuristics `{}`", n),
            Source::None => {}
            Source::File(p) => heuristics.extend(with_file(&p, parse_heuristics(&read(&p)?))?),
        }
    }
    Ok(TagStage { lexicon, heuristics })
}

fn load_parse(spec: &StageSpec) -> Result<ParseStage> {
    let mut modules: Vec<GrammarModule> = Vec::new();
    let srcs = sources(spec.get("grammar"));
    if srcs.is_empty() {
        modules.push(seed::grammar_module("core").expect("core module"));
    }
    for src in srcs {
        match src {
            Source::Seed(None) => modules.push(seed::grammar_module("core").expect("core module")),
            Source::Seed(Some(n)) => modules.push(seed::grammar_module(&n).ok_or_else(|| anyhow!("no seed grammar module `{}`", n))?),
            Source::None => {}
            Source::File(p) => {
                let name = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                modules.push(with_file(&p, parse_module(&name, &read(&p)?))?);
            }
        }
    }
    let grammar = Grammar::from_modules(&modules)?;
    let mut options = ParseOptions::default();
    if let Some(o) = spec.get("roots") {
        options.roots = Some(o.value.split(',').filter(|s| !s.is_empty()).map(String::from).collect());
    }
    if let Some(o) = spec.get("max-edges") {
        options.max_edges = o.value.parse().with_context(|| format!("invalid max-edges `{}`", o.value))?;
    }
    let candidates = spec.get("candidates").map(|o| o.base.join(&o.value));
    Ok(ParseStage {
        grammar,
        options,
        candidates,
    })
}

fn load_sem(spec: &StageSpec) -> Result<SemStage> {
    let mut lexicon = SemLexicon::new();
    let srcs = sources(spec.get("semlex"));
    let srcs = if srcs.is_empty() { vec![Source::Seed(None)] } else { srcs };
    for src in srcs {
        seed_only(&src, "semantic lexicon")?;
        let more = match src {
            Source::Seed(_) => seed::semantic_lexicon(),
            Source::None => SemLexicon::new(),
            Source::File(p) => with_file(&p, SemLexicon::parse(&read(&p)?))?,
        };
        for e in more.entries() {
            lexicon.insert(e.clone());
        }
    }
    let frames = if spec.flag("frames", false)? {
        Some(match spec.get("style").map(|o| o.value.as_str()) {
            None | Some("dtd") => FrameStyle::Dtd,
            Some("ex7" | "compact") => FrameStyle::Compact,
            Some(v) => bail!("unknown frame style `{}` (dtd or compact)", v),
        })
    } else {
        None
    };
    let mut rules = Vec::new();
    for src in sources(spec.get("structural")) {
        seed_only(&src, "structural rules")?;
        match src {
            Source::Seed(_) => rules.extend(seed::structural_rules()),
            Source::None => rules.clear(),
            Source::File(p) => rules.extend(with_file(&p, parse_structural_rules(&read(&p)?))?),
        }
    }
    Ok(SemStage { lexicon, frames, rules })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stage_lines() {
        let s = StageSpec::parse_line("parse grammar=a.gr,seed:np-extra roots=NP", Path::new("/x")).unwrap();
        assert_eq!(s.kind, StageKind::Parse);
        assert_eq!(
            sources(s.get("grammar")),
            [Source::File(PathBuf::from("/x/a.gr")), Source::Seed(Some("np-extra".into()))]
        );
        assert!(StageSpec::parse_line("parse colour=red", Path::new("")).is_err());
        assert!(StageSpec::parse_line("lemmatize", Path::new("")).is_err());
        assert!(StageSpec::parse_line("tag lexicon", Path::new("")).is_err());
    }

    #[test]
    fn defaults_are_overridden() {
        let base = Path::new("");
        let d = StageSpec::parse_line("sem frames=yes style=compact", base).unwrap();
        let s = StageSpec::parse_line("sem style=dtd", base).unwrap().with_defaults(&[d]);
        assert_eq!(s.get("frames").unwrap().value, "yes");
        assert_eq!(s.get("style").unwrap().value, "dtd");
    }

    #[test]
    fn structure_reads_text() {
        let stage = Stage::load(&StageSpec::new(StageKind::Structure)).unwrap();
        let out = stage.process("Leber dunkelrot.".as_bytes()).unwrap();
        assert!(out.xml.contains("<S>Leber dunkelrot<IP SENT=\"end\">.</IP></S>"), "{}", out.xml);
        assert!(stage.process(&[0xff, 0xfe]).is_err());
        let umlaut = stage.process("f\u{fc}r".as_bytes()).unwrap();
        assert!(umlaut.xml.contains("f\u{fc}r"));
        let spec = StageSpec::parse_line("structure charmap=seed", Path::new("")).unwrap();
        let out = Stage::load(&spec).unwrap().process("f\u{fc}r".as_bytes()).unwrap();
        assert!(out.xml.contains("fuer"));
    }

    #[test]
    fn xml_errors_have_positions() {
        let stage = Stage::load(&StageSpec::new(StageKind::Tag)).unwrap();
        let err = stage.process(b"<DOC>\n<S></DOC>").unwrap_err().to_string();
        assert!(err.starts_with("2:"), "{}", err);
    }
}
