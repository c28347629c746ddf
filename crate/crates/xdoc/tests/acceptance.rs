use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::panic;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::rc::Rc;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use xdoc_core::annotation::{leaf_tokens, parse_xml_str, serialize_element, serialize_xml, Document, Element, LeafToken, Node};
use xdoc_core::bootstrap::{cluster_concepts, detect_findings, induce_lexicon, ConceptCandidate};
use xdoc_core::features::{unify, Case, FeatureSet, Gender, Number};
use xdoc_core::parser::{parse, parse_document, parse_module, partial_cover, Chart, Grammar, ParseNode, ParseOptions, Token};
use xdoc_core::postag::tag_document;
use xdoc_core::seed;
use xdoc_core::sem::{fill_frames, interpret_structure, sem_tag, FrameStyle};
use xdoc_core::structure::{detect_structure, StructureConfig};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn timed<T>(limit: Duration, what: &str, f: impl FnOnce() -> T) -> Result<T, String> {
    let t = Instant::now();
    let out = f();
    let el = t.elapsed();
    ensure(el < limit, || format!("{} took {:.2?}, limit {:.2?}", what, el, limit))?;
    Ok(out)
}

// ---------------------------------------------------------------- golden data

fn strip_layout(e: &mut Element) {
    let kids: Vec<Node> = e
        .take_children()
        .into_iter()
        .filter_map(|n| match n {
            Node::Text(t) if t.trim().is_empty() => None,
            Node::Text(t) => Some(Node::Text(t.trim().to_string())),
            Node::Element(mut c) => {
                strip_layout(&mut c);
                Some(Node::Element(c))
            }
        })
        .collect();
    e.set_children(kids);
}

fn canonical(e: &Element) -> String {
    let mut e = e.clone();
    strip_layout(&mut e);
    serialize_element(&e)
}

fn expected(xml: &str) -> String {
    canonical(&parse_xml_str(xml).unwrap().root)
}

fn token_sequence(e: &Element) -> Vec<(String, String)> {
    leaf_tokens(e)
        .iter()
        .map(|t| match t {
            LeafToken::Word(w) => (String::new(), w.to_string()),
            LeafToken::Element(el) => (el.name().to_string(), el.text_content()),
        })
        .collect()
}

fn analyse(text: &str, modules: &[&str]) -> Document {
    let doc = tag_document(detect_structure(text, &seed::structure_config()), &seed::lexicon(), &seed::heuristics());
    parse_document(doc, &seed::grammar(modules), &ParseOptions::default()).0
}

fn single_phrase(doc: &Document) -> Result<String, String> {
    let s = doc.sentences()[0];
    let kids: Vec<&Element> = s.child_elements().collect();
    ensure(kids.len() == 1, || format!("no single parse: {}", serialize_element(s)))?;
    Ok(canonical(kids[0]))
}

const EXAMPLE_1: &str = "<DOC>Anwesend<IP>:</IP>\n<ABBR>Univ.-Prof.</ABBR>\n<ABBR>Dr.</ABBR><ABBR>med.</ABBR>Dieter Krause<IP>,</IP>\n\
    Direktor des Institutes fuer Rechtsmedizin</DOC>";

const EXAMPLE_2: &str = r#"<PRODUCT Method="Sandguss" Material="CC333G">
    <N>Gussstueck</N>
    <NORM><N>EN</N><NR>1982</NR></NORM>
    <IP>-</IP><MAT-ID>CC333G</MAT-ID><IP>-</IP><METHODE>GS</METHODE><IP>-</IP><MODELLNR>XXXX</MODELLNR>
</PRODUCT>"#;

const EXAMPLE_3: &str = r#"<NP TYPE="COMPLEX" RULE="NPC3" GEN="FEM" NUM="PL" CAS="_">
  <NP TYPE="FULL" RULE="NP1" CAS="_" NUM="PL" GEN="FEM"><N SRC="UNG">Blutanhaftungen</N></NP>
  <PP CAS="DAT"><PRP CAS="DAT">an</PRP>
    <NP TYPE="FULL" RULE="NP2" CAS="DAT" NUM="SG" GEN="FEM"><DETD>der</DETD><N SRC="UC1">Gekroesewurzel</N></NP>
  </PP>
</NP>"#;

const EXAMPLE_4: &str = r#"<NP TYPE="COMPLEX" RULE="NPC3" GEN="MAS" NUM="SG" CAS="NOM">
  <NP TYPE="FULL" RULE="NP3" CAS="NOM" NUM="SG" GEN="MAS"><DETI>kein</DETI><XXX AS="ADJ">ungehoeriger</XXX><N>Inhalt</N></NP>
  <PP CAS="DAT"><PRP CAS="DAT">in</PRP>
    <NP TYPE="FULL" RULE="NP2" CAS="DAT" NUM="SG" GEN="FEM"><DETD>der</DETD><N SRC="UC1">Mundhoehle</N></NP>
  </PP>
</NP>"#;

const EXAMPLE_5: &str = r#"<PP CAS="AKK"><PRP CAS="AKK">durch</PRP>
  <NP TYPE="COMPLEX" RULE="NPC1" GEN="NTR" NUM="SG" CAS="AKK">
    <NP TYPE="FULL" RULE="NP1" CAS="AKK" NUM="SG" GEN="NTR"><N>Schaffen</N></NP>
    <NP TYPE="FULL" RULE="NP2" CAS="GEN" NUM="SG" GEN="MAS"><DETD>des</DETD><N>Zusammenhalts</N></NP>
  </NP>
</PP>"#;

const EXAMPLE_7: &str = r#"<CONCEPT TYPE="Prozess"><WORD>Fertigen</WORD><DESC>Schaffung von etwas</DESC>
  <SLOTS><RELATION>
    <RESULT FORM="N(gen, fak) P(akk, fak, von)">fester Koerper</RESULT>
    <SOURCE FORM="P(dat, fak, aus)">aus formlosem Stoff</SOURCE>
    <INSTRUMENT FORM="P(akk, fak, durch)">durch Schaffen des Zusammenhalts</INSTRUMENT>
  </RELATION></SLOTS>
</CONCEPT>"#;

fn criterion_1() -> Outcome {
    let reference = parse_xml_str(EXAMPLE_1).unwrap();
    let doc = timed(Duration::from_secs(1), "structure", || {
        detect_structure(
            "Anwesend: Univ.-Prof. Dr. med. Dieter Krause, Direktor des Institutes fuer Rechtsmedizin",
            &seed::structure_config(),
        )
    })?;
    let got = token_sequence(&doc.root);
    let want = token_sequence(&reference.root);
    ensure(got == want, || format!("token sequence {:?}, expected {:?}", got, want))?;
    Ok(format!("{} tokens match", got.len()))
}

fn criterion_2() -> Outcome {
    let config = StructureConfig {
        patterns: seed::casting_patterns(),
        ..seed::structure_config()
    };
    let doc = timed(Duration::from_secs(1), "structure", || detect_structure("Gussstueck EN 1982 - CC333G - GS - XXXX", &config))?;
    let product = doc.root.find_all("PRODUCT");
    ensure(product.len() == 1, || format!("{} PRODUCT elements", product.len()))?;
    let got = canonical(product[0]);
    let want = expected(EXAMPLE_2);
    ensure(got == want, || format!("got {}", got))?;
    Ok("PRODUCT element identical".into())
}

fn criterion_3() -> Outcome {
    let cases = [
        ("Blutanhaftungen an der Gekroesewurzel", EXAMPLE_3),
        ("kein ungehoeriger Inhalt in der Mundhoehle", EXAMPLE_4),
        ("durch Schaffen des Zusammenhalts", EXAMPLE_5),
    ];
    let mut times = Vec::new();
    for (text, want) in cases {
        let t = Instant::now();
        let doc = timed(Duration::from_secs(1), text, || analyse(text, &["core"]))?;
        times.push(format!("{:.0?}", t.elapsed()));
        let got = single_phrase(&doc)?;
        ensure(got == expected(want), || format!("`{}` parsed as {}", text, got))?;
    }
    Ok(format!("3 trees identical ({})", times.join(", ")))
}

fn criterion_4() -> Outcome {
    let doc = analyse(
        "Fertigen fester Koerper aus formlosem Stoff durch Schaffen des Zusammenhalts",
        &["core", "np-extra"],
    );
    let lex = seed::semantic_lexicon();
    let (doc, concepts) = fill_frames(sem_tag(doc, &lex), &lex, FrameStyle::Compact);
    ensure(concepts.len() == 1, || format!("{} concepts", concepts.len()))?;
    let fills: Vec<(String, String)> = concepts[0].fills.iter().map(|f| (f.relation.clone(), f.content.clone())).collect();
    let want: Vec<(String, String)> = [
        ("RESULT", "fester Koerper"),
        ("SOURCE", "aus formlosem Stoff"),
        ("INSTRUMENT", "durch Schaffen des Zusammenhalts"),
    ]
    .iter()
    .map(|(a, b)| (a.to_string(), b.to_string()))
    .collect();
    ensure(fills == want, || format!("slots {:?}", fills))?;
    let block = doc.root.find_all("CONCEPT").into_iter().find(|c| c.has_element_children());
    let block = block.map(canonical).unwrap_or_default();
    ensure(block == expected(EXAMPLE_7), || format!("frame block {}", block))?;

    let doc = sem_tag(detect_structure("Leber dunkelrot.", &seed::structure_config()), &lex);
    let tags: Vec<(String, String)> = leaf_tokens(doc.sentences()[0])
        .iter()
        .take(2)
        .map(|t| t.element().map(|e| (e.name().to_string(), e.attr("TYPE").unwrap_or("").to_string())).unwrap_or_default())
        .collect();
    let want_tags = [("CONCEPT".to_string(), "organ".to_string()), ("PROPERTY".to_string(), "color".to_string())];
    ensure(tags == want_tags, || format!("tags {:?}", tags))?;
    let (_, rels) = interpret_structure(doc, &seed::structural_rules());
    let rels: Vec<(String, Vec<String>)> = rels.into_iter().map(|r| (r.relation, r.args)).collect();
    ensure(
        rels == [("has-color".to_string(), vec!["Leber".to_string(), "dunkelrot".to_string()])],
        || format!("relations {:?}", rels),
    )?;
    Ok("frame slots, organ/color tags and has-color(Leber, dunkelrot)".into())
}

// ------------------------------------------------------------ parser oracle

type Triple = (usize, usize, usize);
type Set = BTreeSet<Triple>;
type Dims = [bool; 3];

const DIM_NAMES: [&str; 3] = ["CAS", "NUM", "GEN"];
const VALUE_NAMES: [&[&str]; 3] = [&["NOM", "GEN", "DAT", "AKK"], &["SG", "PL"], &["MAS", "FEM", "NTR"]];

fn all_triples() -> Set {
    let mut s = Set::new();
    for c in 0..4 {
        for n in 0..2 {
            for g in 0..3 {
                s.insert((c, n, g));
            }
        }
    }
    s
}

fn project(t: Triple, dims: Dims) -> [Option<usize>; 3] {
    let v = [t.0, t.1, t.2];
    [0, 1, 2].map(|i| if dims[i] { Some(v[i]) } else { None })
}

/// Every triple agreeing with some member of `s` on `dims`.
fn lift(s: &Set, dims: Dims) -> Set {
    let keys: BTreeSet<[Option<usize>; 3]> = s.iter().map(|&t| project(t, dims)).collect();
    all_triples().into_iter().filter(|&t| keys.contains(&project(t, dims))).collect()
}

fn to_feature_set(s: &Set) -> FeatureSet {
    s.iter().fold(FeatureSet::EMPTY, |acc, &(c, n, g)| {
        acc.union(FeatureSet::triple(Case::ALL[c], Number::ALL[n], Gender::ALL[g]))
    })
}

fn from_feature_set(f: FeatureSet) -> Set {
    f.triples()
        .map(|(c, n, g)| {
            (
                Case::ALL.iter().position(|x| *x == c).unwrap(),
                Number::ALL.iter().position(|x| *x == n).unwrap(),
                Gender::ALL.iter().position(|x| *x == g).unwrap(),
            )
        })
        .collect()
}

fn show_set(s: &Set) -> String {
    let parts: Vec<String> = s.iter().map(|(c, n, g)| format!("{}{}{}", c, n, g)).collect();
    format!("{{{}}}", parts.join(","))
}

#[derive(Clone)]
struct Item {
    cats: Vec<String>,
    unknown: bool,
    constants: Set,
    constant_text: Vec<String>,
    groups: Vec<(usize, Dims)>,
}

#[derive(Clone)]
struct Rule {
    id: String,
    lhs: Item,
    rhs: Vec<Item>,
}

const TERMINALS: [&str; 3] = ["A", "B", "C"];
const PHRASES: [&str; 3] = ["P", "Q", "R"];

fn random_subset(rng: &mut StdRng, n: usize) -> Vec<usize> {
    loop {
        let v: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
        if !v.is_empty() {
            return v;
        }
    }
}

fn random_constants(rng: &mut StdRng) -> (Set, Vec<String>) {
    let mut allowed: [Vec<usize>; 3] = [vec![0, 1, 2, 3], vec![0, 1], vec![0, 1, 2]];
    let mut text = Vec::new();
    for d in 0..3 {
        if rng.gen_bool(0.25) {
            allowed[d] = random_subset(rng, VALUE_NAMES[d].len());
            let names: Vec<&str> = allowed[d].iter().map(|&v| VALUE_NAMES[d][v]).collect();
            text.push(format!("{}={}", DIM_NAMES[d], names.join("+")));
        }
    }
    let set = all_triples()
        .into_iter()
        .filter(|&(c, n, g)| allowed[0].contains(&c) && allowed[1].contains(&n) && allowed[2].contains(&g))
        .collect();
    (set, text)
}

fn random_grammar(rng: &mut StdRng) -> Vec<Rule> {
    let count = rng.gen_range(2..=15);
    let symbols: Vec<&str> = TERMINALS.iter().chain(PHRASES.iter()).copied().collect();
    (0..count)
        .map(|k| {
            let len = *[1, 1, 2, 2, 2, 3].choose(rng).unwrap();
            let lhs_cat = PHRASES.choose(rng).unwrap().to_string();
            let (c, t) = random_constants(rng);
            let mut lhs = Item {
                cats: vec![lhs_cat],
                unknown: false,
                constants: c,
                constant_text: t,
                groups: Vec::new(),
            };
            let mut rhs: Vec<Item> = (0..len)
                .map(|_| {
                    let k = rng.gen_range(1..=2);
                    let mut cats: Vec<String> = symbols.choose_multiple(rng, k).map(|s| s.to_string()).collect();
                    cats.dedup();
                    let (c, t) = random_constants(rng);
                    Item {
                        cats,
                        unknown: rng.gen_bool(0.25),
                        constants: c,
                        constant_text: t,
                        groups: Vec::new(),
                    }
                })
                .collect();
            for g in 0..rng.gen_range(0..=2) {
                let d = random_subset(rng, 3);
                let dims = [d.contains(&0), d.contains(&1), d.contains(&2)];
                let members: Vec<usize> = (0..=len).collect();
                let k = rng.gen_range(2..=len + 1);
                for &m in members.choose_multiple(rng, k) {
                    let item = if m == 0 { &mut lhs } else { &mut rhs[m - 1] };
                    item.groups.push((g, dims));
                }
            }
            Rule {
                id: format!("R{}", k),
                lhs,
                rhs,
            }
        })
        .collect()
}

fn item_text(i: &Item, cats: bool) -> String {
    let mut parts = i.constant_text.clone();
    for (g, dims) in &i.groups {
        let ds: Vec<&str> = (0..3).filter(|&d| dims[d]).map(|d| DIM_NAMES[d]).collect();
        parts.push(format!("@g{}:{}", g, ds.join("+")));
    }
    let mut head = if cats { i.cats.join("|") } else { i.cats[0].clone() };
    if i.unknown {
        head.push_str("|XXX");
    }
    if parts.is_empty() {
        head
    } else {
        format!("{}[{}]", head, parts.join(", "))
    }
}

fn grammar_text(rules: &[Rule]) -> String {
    rules
        .iter()
        .map(|r| {
            let rhs: Vec<String> = r.rhs.iter().map(|i| item_text(i, true)).collect();
            format!("{}: {} -> {}\n", r.id, item_text(&r.lhs, false), rhs.join(" "))
        })
        .collect()
}

struct Sentence {
    /// `None` for an unknown token.
    readings: Vec<Option<Vec<(String, Set)>>>,
}

fn random_sentence(rng: &mut StdRng, max_len: usize) -> Sentence {
    let n = rng.gen_range(1..=max_len);
    let readings = (0..n)
        .map(|_| {
            if rng.gen_bool(0.15) {
                return None;
            }
            let k = rng.gen_range(1..=2);
            let cats: Vec<&str> = TERMINALS.choose_multiple(rng, k).copied().collect();
            Some(
                cats.into_iter().map(|c| {
                    let set: Set = loop {
                        let density = *[0.1, 0.4, 0.9].choose(rng).unwrap();
                        let s: Set = all_triples().into_iter().filter(|_| rng.gen_bool(density)).collect();
                        if !s.is_empty() {
                            break s;
                        }
                    };
                    (c.to_string(), set)
                })
                .collect(),
            )
        })
        .collect();
    Sentence { readings }
}

fn tokens_of(s: &Sentence) -> Vec<Token> {
    s.readings
        .iter()
        .enumerate()
        .map(|(i, r)| match r {
            None => Token::unknown(format!("w{}", i)),
            Some(rs) => Token::new(format!("w{}", i), rs.iter().map(|(c, f)| (c.clone(), to_feature_set(f))).collect()),
        })
        .collect()
}

/// A derivation found by top-down enumeration, with its bottom-up features.
struct Derivation {
    cat: String,
    rule: Option<usize>,
    token: Option<usize>,
    children: Vec<Rc<Derivation>>,
    features: Set,
}

/// Solves a rule's agreement by narrowing all members at once from the
/// group values of the previous round, until nothing changes.
fn oracle_solve(rule: &Rule, ctx: &Set, daughters: &[&Set]) -> Option<(Set, Vec<Set>)> {
    let mut values: Vec<Set> = std::iter::once(ctx.intersection(&rule.lhs.constants).copied().collect())
        .chain(daughters.iter().zip(&rule.rhs).map(|(d, i)| d.intersection(&i.constants).copied().collect()))
        .collect();
    let items: Vec<&Item> = std::iter::once(&rule.lhs).chain(rule.rhs.iter()).collect();
    loop {
        if values.iter().any(|v| v.is_empty()) {
            return None;
        }
        let mut groups: BTreeMap<usize, Set> = BTreeMap::new();
        for (v, item) in values.iter().zip(&items) {
            for (g, dims) in &item.groups {
                let l = lift(v, *dims);
                let e = groups.entry(*g).or_insert_with(all_triples);
                *e = e.intersection(&l).copied().collect();
            }
        }
        let next: Vec<Set> = values
            .iter()
            .zip(&items)
            .map(|(v, item)| {
                item.groups
                    .iter()
                    .fold(v.clone(), |acc, (g, dims)| acc.intersection(&lift(&groups[g], *dims)).copied().collect())
            })
            .collect();
        if next == values {
            let lhs = values.remove(0);
            return Some((lhs, values));
        }
        values = next;
    }
}

/// Category, span and the categories banned by the unary chain above.
type MemoKey = (String, usize, usize, BTreeSet<String>);

struct Oracle<'a> {
    rules: &'a [Rule],
    sentence: &'a Sentence,
    memo: HashMap<MemoKey, Rc<Vec<Rc<Derivation>>>>,
    budget: usize,
}

impl<'a> Oracle<'a> {
    fn charge(&mut self, n: usize) -> Option<()> {
        self.budget = self.budget.checked_sub(n)?;
        Some(())
    }

    /// Derivations of category `cat` over `[i, j)`.
    fn of_cat(&mut self, cat: &str, i: usize, j: usize, banned: &BTreeSet<String>) -> Option<Rc<Vec<Rc<Derivation>>>> {
        let key = (cat.to_string(), i, j, banned.clone());
        if let Some(v) = self.memo.get(&key) {
            return Some(v.clone());
        }
        let mut out = Vec::new();
        if j == i + 1 {
            match &self.sentence.readings[i] {
                None if cat == "XXX" => out.push(Rc::new(Derivation {
                    cat: cat.into(),
                    rule: None,
                    token: Some(i),
                    children: Vec::new(),
                    features: all_triples(),
                })),
                Some(rs) => {
                    for (c, f) in rs {
                        if c == cat && !f.is_empty() {
                            out.push(Rc::new(Derivation {
                                cat: cat.into(),
                                rule: None,
                                token: Some(i),
                                children: Vec::new(),
                                features: f.clone(),
                            }));
                        }
                    }
                }
                None => {}
            }
        }
        for (r, rule) in self.rules.iter().enumerate() {
            if rule.lhs.cats[0] != cat {
                continue;
            }
            let k = rule.rhs.len();
            if k > j - i {
                continue;
            }
            let mut below = if k == 1 { banned.clone() } else { BTreeSet::new() };
            if k == 1 {
                below.insert(cat.to_string());
            }
            for split in compositions(i, j, k) {
                let mut options = Vec::new();
                for (m, item) in rule.rhs.iter().enumerate() {
                    options.push(self.of_item(item, split[m], split[m + 1], &below)?);
                }
                let mut pick = vec![0usize; k];
                if options.iter().any(|o| o.is_empty()) {
                    continue;
                }
                loop {
                    let ds: Vec<Rc<Derivation>> = (0..k).map(|m| options[m][pick[m]].clone()).collect();
                    let feats: Vec<&Set> = ds.iter().map(|d| &d.features).collect();
                    self.charge(1)?;
                    if let Some((lhs, _)) = oracle_solve(rule, &all_triples(), &feats) {
                        out.push(Rc::new(Derivation {
                            cat: cat.into(),
                            rule: Some(r),
                            token: None,
                            children: ds,
                            features: lhs,
                        }));
                    }
                    let mut m = k;
                    loop {
                        if m == 0 {
                            break;
                        }
                        m -= 1;
                        pick[m] += 1;
                        if pick[m] < options[m].len() {
                            break;
                        }
                        pick[m] = 0;
                        if m == 0 {
                            m = usize::MAX;
                            break;
                        }
                    }
                    if m == usize::MAX {
                        break;
                    }
                }
            }
        }
        let out = Rc::new(out);
        self.memo.insert(key, out.clone());
        Some(out)
    }

    fn of_item(&mut self, item: &Item, i: usize, j: usize, banned: &BTreeSet<String>) -> Option<Vec<Rc<Derivation>>> {
        let mut cats: Vec<&str> = item.cats.iter().map(String::as_str).collect();
        if item.unknown {
            cats.push("XXX");
        }
        let mut out = Vec::new();
        for c in cats {
            if banned.contains(c) {
                continue;
            }
            for d in self.of_cat(c, i, j, banned)?.iter() {
                if !d.features.is_disjoint(&item.constants) {
                    out.push(d.clone());
                }
            }
        }
        Some(out)
    }

    fn trees(&mut self) -> Option<Vec<String>> {
        let n = self.sentence.readings.len();
        let mut out = Vec::new();
        for cat in PHRASES {
            for d in self.of_cat(cat, 0, n, &BTreeSet::new())?.iter() {
                out.push(self.refine(d, &d.features, None));
            }
        }
        out.sort();
        Some(out)
    }

    fn refine(&self, d: &Derivation, ctx: &Set, assumed: Option<&str>) -> String {
        match d.rule {
            None => {
                let mut s = format!("{}@{}{}", d.cat, d.token.unwrap(), show_set(ctx));
                if d.cat == "XXX" {
                    s.push('=');
                    s.push_str(assumed.unwrap());
                }
                s
            }
            Some(r) => {
                let rule = &self.rules[r];
                let feats: Vec<&Set> = d.children.iter().map(|c| &c.features).collect();
                let (lhs, ds) = oracle_solve(rule, ctx, &feats)
                    .or_else(|| oracle_solve(rule, &all_triples(), &feats))
                    .expect("derivation satisfies its rule");
                let mut s = format!("({}{}", rule.id, show_set(&lhs));
                for ((c, f), item) in d.children.iter().zip(&ds).zip(&rule.rhs) {
                    s.push(' ');
                    s.push_str(&self.refine(c, f, Some(&item.cats[0])));
                }
                s.push(')');
                s
            }
        }
    }
}

/// Split points `i = p0 < p1 < ... < pk = j`.
fn compositions(i: usize, j: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 1 {
        return vec![vec![i, j]];
    }
    let mut out = Vec::new();
    for m in i + 1..j {
        for mut rest in compositions(m, j, k - 1) {
            rest.insert(0, i);
            out.push(rest);
        }
    }
    out
}

fn chart_tree(node: &ParseNode, g: &Grammar) -> String {
    let f = show_set(&from_feature_set(node.features));
    match (node.token, node.rule) {
        (Some(t), _) => {
            let mut s = format!("{}@{}{}", node.cat, t, f);
            if let Some(a) = &node.assumed {
                s.push('=');
                s.push_str(a);
            }
            s
        }
        (None, Some(r)) => {
            let mut s = format!("({}{}", g.rules[r].id, f);
            for c in &node.children {
                s.push(' ');
                s.push_str(&chart_tree(c, g));
            }
            s.push(')');
            s
        }
        (None, None) => "?".into(),
    }
}

fn criterion_5() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5eed_0005);
    let (mut compared, mut skipped, mut trees, mut ambiguous) = (0, 0, 0, 0);
    let mut attempts = 0;
    while compared < 300 && attempts < 5000 {
        attempts += 1;
        let rules = random_grammar(&mut rng);
        let text = grammar_text(&rules);
        let g = Grammar::from_modules(&[parse_module("random", &text).map_err(|e| format!("{}\n{}", e, text))?]).map_err(|e| e.to_string())?;
        let sentence = random_sentence(&mut rng, 8);
        let mut oracle = Oracle {
            rules: &rules,
            sentence: &sentence,
            memo: HashMap::new(),
            budget: 4_000,
        };
        let Some(want) = oracle.trees() else {
            skipped += 1;
            continue;
        };
        let result = parse(&tokens_of(&sentence), &g, &ParseOptions::default());
        if result.truncated {
            skipped += 1;
            continue;
        }
        let mut got: Vec<String> = result.complete.iter().map(|t| chart_tree(t, &g)).collect();
        got.sort();
        if got != want {
            return Err(format!(
                "mismatch on grammar\n{}tokens {:?}\nchart {:?}\noracle {:?}",
                text,
                sentence.readings.iter().map(|r| r.as_ref().map(|v| v.iter().map(|x| x.0.clone()).collect::<Vec<_>>())).collect::<Vec<_>>(),
                got,
                want
            ));
        }
        compared += 1;
        trees += want.len();
        ambiguous += usize::from(want.len() > 1);
    }
    ensure(compared >= 200, || format!("only {} instances compared ({} skipped)", compared, skipped))?;
    Ok(format!(
        "{} instances, 0 mismatches, {} trees, {} ambiguous, {} skipped as too large",
        compared, trees, ambiguous, skipped
    ))
}

// ---------------------------------------------------------- partial covers

fn all_tilings(n: usize, spans: &BTreeSet<(usize, usize)>) -> Vec<Vec<(usize, usize)>> {
    let mut out = Vec::new();
    for cuts in 0u32..(1 << (n.saturating_sub(1))) {
        let mut tiling = Vec::new();
        let mut start = 0;
        for p in 1..=n {
            if p == n || cuts & (1 << (p - 1)) != 0 {
                tiling.push((start, p));
                start = p;
            }
        }
        if tiling.iter().all(|s| s.1 == s.0 + 1 || spans.contains(s)) {
            out.push(tiling);
        }
    }
    out
}

fn criterion_6() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5eed_0006);
    let cap = 64;
    let (mut charts, mut covers, mut multi) = (0, 0, 0);
    while charts < 150 {
        let rules = random_grammar(&mut rng);
        let g = Grammar::from_modules(&[parse_module("random", &grammar_text(&rules)).unwrap()]).unwrap();
        let sentence = random_sentence(&mut rng, 8);
        let chart = Chart::build(&tokens_of(&sentence), &g, 200_000);
        if chart.truncated {
            continue;
        }
        let n = chart.n;
        let spans: BTreeSet<(usize, usize)> = chart.edges.iter().map(|e| (e.start, e.end)).collect();
        let exhaustive = all_tilings(n, &spans);
        let min = exhaustive.iter().map(Vec::len).min().unwrap();
        let minimal: BTreeSet<Vec<(usize, usize)>> = exhaustive.into_iter().filter(|t| t.len() == min).collect();
        let returned = partial_cover(&chart, &g, cap);
        ensure(!returned.is_empty(), || "no cover returned".into())?;
        let mut seen = BTreeSet::new();
        for cover in &returned {
            let tiling: Vec<(usize, usize)> = cover.iter().map(|&e| (chart.edges[e].start, chart.edges[e].end)).collect();
            let mut at = 0;
            for s in &tiling {
                ensure(s.0 == at && s.1 > s.0, || format!("cover {:?} does not tile [0, {})", tiling, n))?;
                at = s.1;
            }
            ensure(at == n, || format!("cover {:?} does not reach {}", tiling, n))?;
            ensure(tiling.len() == min, || format!("cover {:?} has {} fragments, minimum {}", tiling, tiling.len(), min))?;
            ensure(seen.insert(tiling.clone()), || format!("cover {:?} returned twice", tiling))?;
        }
        if minimal.len() <= cap {
            ensure(seen == minimal, || format!("returned {:?}, minimal tilings {:?}", seen, minimal))?;
        } else {
            ensure(returned.len() == cap, || "cap not filled".into())?;
        }
        charts += 1;
        covers += returned.len();
        multi += usize::from(min < n);
    }
    Ok(format!("{} charts, {} covers, {} with multi-token fragments, all minimal tilings", charts, covers, multi))
}

// ------------------------------------------------------------- unification

fn random_triples(rng: &mut StdRng) -> Set {
    let density = rng.gen_range(0.0..1.0);
    all_triples().into_iter().filter(|_| rng.gen_bool(density)).collect()
}

fn oracle_unify(a: &Set, b: &Set) -> Option<Set> {
    let i: Set = a.intersection(b).copied().collect();
    if i.is_empty() {
        None
    } else {
        Some(i)
    }
}

fn criterion_7() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5eed_0007);
    let rounds = 2000;
    for _ in 0..rounds {
        let (a, b, c) = (random_triples(&mut rng), random_triples(&mut rng), random_triples(&mut rng));
        let (fa, fb, fc) = (to_feature_set(&a), to_feature_set(&b), to_feature_set(&c));
        let got = unify(fa, fb).map(from_feature_set);
        ensure(got == oracle_unify(&a, &b), || format!("unify({:?}, {:?}) = {:?}", a, b, got))?;
        ensure(unify(fa, fb) == unify(fb, fa), || "not commutative".into())?;
        if !a.is_empty() {
            ensure(unify(fa, fa) == Some(fa), || "not idempotent".into())?;
        }
        if let Some(u) = unify(fa, fb) {
            ensure(u.is_subset(fa) && u.is_subset(fb), || "result not a subset".into())?;
        }
        let left = unify(fa, fb).and_then(|x| unify(x, fc));
        let right = unify(fb, fc).and_then(|x| unify(fa, x));
        ensure(left == right, || "not associative".into())?;
    }
    Ok(format!("{} triples of sets, 0 failures", rounds))
}

// -------------------------------------------------------------- round trip

const NAMES: &[&str] = &["DOC", "S", "NP", "PP", "N", "XXX", "MAT-ID", "a.b", "_x"];
const TEXT_CHARS: &[char] = &['a', 'b', 'Z', ' ', '&', '<', '>', '"', '\'', '.', ',', '-', '1'];

fn random_text(rng: &mut StdRng, max: usize) -> String {
    let len = rng.gen_range(1..=max);
    (0..len).map(|_| *TEXT_CHARS.choose(rng).unwrap()).collect()
}

fn random_element(rng: &mut StdRng, depth: usize) -> Element {
    let mut e = Element::new(*NAMES.choose(rng).unwrap());
    for _ in 0..rng.gen_range(0..3) {
        let key: String = (0..rng.gen_range(1..=3)).map(|_| rng.gen_range(b'A'..=b'Z') as char).collect();
        e.set_attr(key, random_text(rng, 5));
    }
    for _ in 0..rng.gen_range(0..5) {
        if depth > 0 && rng.gen_bool(0.6) {
            e.push(random_element(rng, depth - 1));
        } else {
            e.push_text(random_text(rng, 8));
        }
    }
    e
}

fn criterion_8() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5eed_0008);
    let rounds = 1500;
    for k in 0..rounds {
        let doc = Document::new(random_element(&mut rng, 4));
        let text = serialize_xml(&doc);
        let back = parse_xml_str(&text).map_err(|e| format!("document {}: {}\n{}", k, e, text))?;
        ensure(back == doc, || format!("document {} changed:\n{}", k, text))?;
        ensure(serialize_xml(&back) == text, || format!("document {} serialized differently", k))?;
    }
    Ok(format!("{} documents, 0 failures", rounds))
}

// -------------------------------------------------------------- morphology

fn criterion_9() -> Outcome {
    let lex = seed::lexicon();
    let (mut entries, mut checks, mut empty) = (0, 0, 0);
    let mut failures = Vec::new();
    for e in lex.entries().iter().filter(|e| e.pos.is_open_class()) {
        entries += 1;
        for c in Case::ALL {
            for n in Number::ALL {
                for g in Gender::ALL {
                    let t = FeatureSet::triple(c, n, g);
                    let forms = match &e.paradigm {
                        Some(_) => lex.inflect(e, t).map_err(|err| format!("{}: {}", e.root, err))?,
                        None if !e.features.intersect(t).is_empty() => vec![e.root.clone()],
                        None => Vec::new(),
                    };
                    if e.features.intersect(t).is_empty() {
                        if !forms.is_empty() {
                            failures.push(format!("{} {:?}: forms {:?} outside the entry's features", e.root, (c, n, g), forms));
                        }
                        empty += 1;
                        continue;
                    }
                    if forms.is_empty() {
                        failures.push(format!("{} {:?}: no form", e.root, (c, n, g)));
                    }
                    for f in forms {
                        checks += 1;
                        let ok = lex
                            .analyze(&f)
                            .iter()
                            .any(|a| a.pos == e.pos && a.lemma == e.lemma() && unify(a.features, t).is_some());
                        if !ok {
                            failures.push(format!("{} {:?}: `{}` not analysed back", e.root, (c, n, g), f));
                        }
                    }
                }
            }
        }
    }
    ensure(failures.is_empty(), || format!("{} failures, first: {}", failures.len(), failures[0]))?;
    ensure(checks > 0, || "no open-class entries".into())?;
    Ok(format!("{} entries, {} form checks, {} combinations outside entry features, 0 failures", entries, checks, empty))
}

// --------------------------------------------------------------- bootstrap

fn criterion_10() -> Outcome {
    let text = "Harnblase leer.\nHarnleiter frei.\nNierenoberflaeche glatt.\nVorsteherdruese altersentsprechend.";
    let doc = tag_document(detect_structure(text, &seed::structure_config()), &seed::lexicon(), &seed::heuristics());
    let induced = induce_lexicon(&detect_findings(&[doc]));
    let of = |pos: &str| -> BTreeSet<String> { induced.iter().filter(|e| e.pos.to_string() == pos).map(|e| e.surface.clone()).collect() };
    let set = |v: &[&str]| -> BTreeSet<String> { v.iter().map(|s| s.to_string()).collect() };
    let nouns = of("N");
    let adjectives = of("ADJ");
    ensure(nouns == set(&["Harnblase", "Harnleiter", "Nierenoberflaeche", "Vorsteherdruese"]), || format!("nouns {:?}", nouns))?;
    ensure(adjectives == set(&["leer", "frei", "glatt", "altersentsprechend"]), || format!("adjectives {:?}", adjectives))?;
    ensure(induced.len() == 8, || format!("{} candidates", induced.len()))?;

    let cands = [
        ConceptCandidate::new("Harnblase", ["leer", "gefuellt"]),
        ConceptCandidate::new("Magen", ["leer", "gefuellt"]),
        ConceptCandidate::new("Nierenoberflaeche", ["glatt"]),
    ];
    let onto = cluster_concepts(&cands, 0.5);
    let parts: BTreeSet<BTreeSet<String>> = onto.clusters.iter().map(|c| c.members.iter().cloned().collect()).collect();
    let want: BTreeSet<BTreeSet<String>> = [set(&["Harnblase", "Magen"]), set(&["Nierenoberflaeche"])].into_iter().collect();
    ensure(parts == want, || format!("clusters {:?}", parts))?;
    Ok("4 nouns, 4 adjectives; clusters {Harnblase, Magen} {Nierenoberflaeche}".into())
}

// ------------------------------------------------------------- composition

const CORPUS_WORDS: &[&str] = &[
    "Leber", "dunkelrot", "Harnblase", "leer", "Niere", "blass", "Fertigen", "fester", "Koerper", "aus", "formlosem", "Stoff",
    "durch", "Schaffen", "des", "Zusammenhalts", "kein", "ungehoeriger", "Inhalt", "in", "der", "Mundhoehle", "Dr.",
    "Blutanhaftungen", "an", "Gekroesewurzel", "Magen", "gefuellt", "Harnleiter", "frei", "z.B.", "3,5",
];

fn xdoc(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_xdoc")).args(args).output().map_err(|e| e.to_string())?;
    ensure(out.status.success(), || format!("xdoc {:?}: {}", args, String::from_utf8_lossy(&out.stderr)))
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("temporary paths are UTF-8")
}

fn criterion_11() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut rng = StdRng::seed_from_u64(0x5eed_0011);
    let mut inputs: Vec<PathBuf> = Vec::new();
    for k in 0..20 {
        let mut text = String::new();
        for _ in 0..rng.gen_range(1..=4) {
            let words: Vec<&str> = (0..rng.gen_range(2..=7)).map(|_| *CORPUS_WORDS.choose(&mut rng).unwrap()).collect();
            text.push_str(&words.join(" "));
            text.push_str(if rng.gen_bool(0.8) { ".\n" } else { ": " });
        }
        let p = dir.path().join(format!("doc{:02}.txt", k));
        fs::write(&p, text).map_err(|e| e.to_string())?;
        inputs.push(p);
    }
    let spec = dir.path().join("pipeline.txt");
    fs::write(
        &spec,
        "structure\ntag\nparse grammar=seed:core,seed:np-extra\nsem frames=yes structural=seed\n",
    )
    .map_err(|e| e.to_string())?;
    let out = dir.path().join("out");
    let mut args = vec!["--jobs", "4", "pipeline", path_str(&spec)];
    args.extend(inputs.iter().map(|p| path_str(p)));
    args.extend(["-o", path_str(&out)]);
    xdoc(&args)?;

    let manual = dir.path().join("manual");
    fs::create_dir_all(&manual).map_err(|e| e.to_string())?;
    for input in &inputs {
        let stem = input.file_stem().unwrap().to_string_lossy().into_owned();
        let step = |k: usize| manual.join(format!("{}.{}.xml", stem, k));
        xdoc(&["structure", path_str(input), "-o", path_str(&step(1))])?;
        xdoc(&["tag", path_str(&step(1)), "-o", path_str(&step(2))])?;
        xdoc(&["parse", "--grammar", "seed:core", "--grammar", "seed:np-extra", path_str(&step(2)), "-o", path_str(&step(3))])?;
        xdoc(&["sem", "--frames", "--structural", "seed", path_str(&step(3)), "-o", path_str(&step(4))])?;
        let a = fs::read(out.join(format!("{}.xml", stem))).map_err(|e| e.to_string())?;
        let b = fs::read(step(4)).map_err(|e| e.to_string())?;
        ensure(a == b, || format!("{} differs between pipeline and manual chaining", stem))?;
    }
    Ok(format!("{} documents byte-identical", inputs.len()))
}

type Criterion = (u32, &'static str, Option<Duration>, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 11] = [
        (1, "structure golden example", Some(Duration::from_secs(1)), criterion_1),
        (2, "casting pattern golden example", Some(Duration::from_secs(1)), criterion_2),
        (3, "parse tree golden examples", Some(Duration::from_secs(3)), criterion_3),
        (4, "frames and semantic tags", None, criterion_4),
        (5, "chart parser vs enumeration oracle", Some(Duration::from_secs(60)), criterion_5),
        (6, "partial covers vs exhaustive minimum", Some(Duration::from_secs(30)), criterion_6),
        (7, "unification laws", None, criterion_7),
        (8, "XML round trip", None, criterion_8),
        (9, "morphology duality", None, criterion_9),
        (10, "bootstrapping", None, criterion_10),
        (11, "pipeline composition", None, criterion_11),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (n, name, limit, f) in criteria {
        let t = Instant::now();
        let result = panic::catch_unwind(f).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {}", msg))
        });
        let elapsed = t.elapsed();
        let result = match (result, limit) {
            (Ok(_), Some(l)) if elapsed >= l => Err(format!("took {:.2?}, limit {:.2?}", elapsed, l)),
            (r, _) => r,
        };
        match result {
            Ok(detail) => println!("criterion {}: PASS {} ({}; {:.2?})", n, name, detail, elapsed),
            Err(e) => {
                failed += 1;
                println!("criterion {}: FAIL {} ({:.2?}): {}", n, name, elapsed, e);
            }
        }
    }
    if failed > 0 {
        println!("{} of 11 criteria failed", failed);
        std::process::exit(1);
    }
    println!("all 11 criteria passed");
}
