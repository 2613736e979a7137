//! Binary trigger labels for the event, sentiment and topic chains.
//!
//! Triggers come from word lists rather than parsers: event phrases stand in
//! for frame targets, sentiment and negation lists for the sentiment track,
//! and noun/verb word lists plus suffix rules for topic words. Labels produced
//! by real taggers can be supplied through the label file instead.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::data::{Story, SyntheticLexicons};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Aspect {
    Event,
    Sentiment,
    Topic,
}

impl Aspect {
    pub const ALL: [Aspect; 3] = [Aspect::Event, Aspect::Sentiment, Aspect::Topic];

    pub fn name(self) -> &'static str {
        match self {
            Aspect::Event => "event",
            Aspect::Sentiment => "sentiment",
            Aspect::Topic => "topic",
        }
    }
}

impl fmt::Display for Aspect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Aspect {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "event" => Ok(Aspect::Event),
            "sentiment" => Ok(Aspect::Sentiment),
            "topic" => Ok(Aspect::Topic),
            other => Err(Error::Config(format!(
                "unknown aspect `{other}` (expected event, sentiment or topic)"
            ))),
        }
    }
}

/// Three binary sequences aligned with the concatenated context tokens.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TriggerLabels {
    pub event: Vec<bool>,
    pub sentiment: Vec<bool>,
    pub topic: Vec<bool>,
}

impl TriggerLabels {
    pub fn zeros(len: usize) -> Self {
        TriggerLabels {
            event: vec![false; len],
            sentiment: vec![false; len],
            topic: vec![false; len],
        }
    }

    pub fn len(&self) -> usize {
        self.event.len()
    }

    pub fn is_empty(&self) -> bool {
        self.event.is_empty()
    }

    pub fn get(&self, aspect: Aspect) -> &[bool] {
        match aspect {
            Aspect::Event => &self.event,
            Aspect::Sentiment => &self.sentiment,
            Aspect::Topic => &self.topic,
        }
    }

    pub fn bitstring(&self, aspect: Aspect) -> String {
        self.get(aspect).iter().map(|b| if *b { '1' } else { '0' }).collect()
    }
}

/// Noun/verb proxy: explicit words plus suffix patterns.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TopicRules {
    pub words: HashSet<String>,
    pub suffixes: Vec<String>,
}

impl TopicRules {
    pub fn matches(&self, token: &str) -> bool {
        self.words.contains(token)
            || self.suffixes.iter().any(|s| {
                token.len() > s.len() + 1 && token.ends_with(s.as_str()) && token.chars().all(char::is_alphabetic)
            })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LexiconSet {
    /// Event triggers; multi-token entries are phrases.
    pub event_terms: Vec<Vec<String>>,
    pub sentiment_terms: HashSet<String>,
    pub negation_terms: HashSet<String>,
    pub topic: TopicRules,
}

impl LexiconSet {
    pub fn add_event(&mut self, phrase: &str) {
        let toks: Vec<String> = phrase.split_whitespace().map(str::to_lowercase).collect();
        if !toks.is_empty() && !self.event_terms.contains(&toks) {
            self.event_terms.push(toks);
        }
    }

    /// Lexicons matching exactly the words planted by the synthetic generator.
    /// Event verbs double as topic words.
    pub fn from_synthetic(lex: &SyntheticLexicons) -> Self {
        let mut set = LexiconSet::default();
        for e in &lex.events {
            set.add_event(e);
        }
        set.sentiment_terms = lex.positive.iter().chain(&lex.negative).cloned().collect();
        set.negation_terms = lex.negations.iter().cloned().collect();
        set.topic.words = lex.topics.iter().chain(&lex.events).cloned().collect();
        set
    }
}

/// Labels one context token sequence.
///
/// Event phrases are matched at every start position from left to right and
/// every token inside any match is marked, so overlapping phrases never mask
/// each other.
pub fn label_story<S: AsRef<str>>(tokens: &[S], lex: &LexiconSet) -> TriggerLabels {
    let toks: Vec<&str> = tokens.iter().map(AsRef::as_ref).collect();
    let mut labels = TriggerLabels::zeros(toks.len());
    for start in 0..toks.len() {
        for phrase in &lex.event_terms {
            let end = start + phrase.len();
            if end <= toks.len() && phrase.iter().zip(&toks[start..end]).all(|(p, t)| p == t) {
                labels.event[start..end].iter_mut().for_each(|b| *b = true);
            }
        }
    }
    for (i, t) in toks.iter().enumerate() {
        labels.sentiment[i] = lex.sentiment_terms.contains(*t) || lex.negation_terms.contains(*t);
        labels.topic[i] = lex.topic.matches(t);
    }
    labels
}

/// Per-aspect lexicon files. Absent entries give empty lists.
#[derive(Clone, Debug, Default)]
pub struct LexiconPaths {
    pub event: Option<PathBuf>,
    pub sentiment: Option<PathBuf>,
    pub negation: Option<PathBuf>,
    pub topic: Option<PathBuf>,
}

impl LexiconPaths {
    /// `event.txt`, `sentiment.txt`, `negation.txt` and `topic.txt` in `dir`.
    pub fn in_dir(dir: &Path) -> Self {
        LexiconPaths {
            event: Some(dir.join("event.txt")),
            sentiment: Some(dir.join("sentiment.txt")),
            negation: Some(dir.join("negation.txt")),
            topic: Some(dir.join("topic.txt")),
        }
    }
}

fn read_terms(path: &Option<PathBuf>, aspect: &str) -> Result<Vec<String>> {
    let Some(path) = path else { return Ok(Vec::new()) };
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("{aspect} lexicon {}: {e}", path.display())))?;
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for line in text.lines() {
        let term = line.trim();
        if term.is_empty() || term.starts_with('#') {
            continue;
        }
        let term = term.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase();
        if seen.insert(term.clone()) {
            out.push(term);
        }
    }
    Ok(out)
}

/// Loads one term per line; `#` starts a comment line. In the topic file a
/// line `*ing` is a suffix rule.
pub fn load_lexicons(paths: &LexiconPaths) -> Result<LexiconSet> {
    let mut set = LexiconSet::default();
    for e in read_terms(&paths.event, "event")? {
        set.add_event(&e);
    }
    set.sentiment_terms = read_terms(&paths.sentiment, "sentiment")?.into_iter().collect();
    set.negation_terms = read_terms(&paths.negation, "negation")?.into_iter().collect();
    for t in read_terms(&paths.topic, "topic")? {
        match t.strip_prefix('*') {
            Some(suffix) if !suffix.is_empty() => set.topic.suffixes.push(suffix.to_string()),
            _ => {
                set.topic.words.insert(t);
            }
        }
    }
    Ok(set)
}

pub fn save_lexicons(dir: &Path, lex: &LexiconSet) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let write = |name: &str, mut lines: Vec<String>| -> Result<()> {
        lines.sort();
        let path = dir.join(name);
        let mut body = lines.join("\n");
        body.push('\n');
        fs::write(&path, body).map_err(|e| Error::io(&path, e))
    };
    write("event.txt", lex.event_terms.iter().map(|p| p.join(" ")).collect())?;
    write("sentiment.txt", lex.sentiment_terms.iter().cloned().collect())?;
    write("negation.txt", lex.negation_terms.iter().cloned().collect())?;
    let mut topic: Vec<String> = lex.topic.words.iter().cloned().collect();
    topic.extend(lex.topic.suffixes.iter().map(|s| format!("*{s}")));
    write("topic.txt", topic)
}

/// Labels keyed by story id.
pub type LabelMap = HashMap<String, TriggerLabels>;

pub fn label_corpus(stories: &[Story], lex: &LexiconSet) -> LabelMap {
    stories
        .iter()
        .map(|s| (s.id.clone(), label_story(&s.context_tokens(), lex)))
        .collect()
}

/// Reads `story_id<TAB>aspect<TAB>bitstring` rows. Every story must list
/// all three aspects with equal lengths.
pub fn load_label_file(path: &Path) -> Result<LabelMap> {
    let origin = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut partial: BTreeMap<String, (usize, [Option<Vec<bool>>; 3])> = BTreeMap::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 3 {
            return Err(Error::parse(&origin, lineno, format!("expected 3 columns, found {}", cols.len())));
        }
        let aspect: Aspect = cols[1]
            .trim()
            .parse()
            .map_err(|e: Error| Error::parse(&origin, lineno, e.to_string()))?;
        let bits = cols[2]
            .trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::parse(&origin, lineno, format!("bad label character `{other}`"))),
            })
            .collect::<Result<Vec<bool>>>()?;
        let entry = partial.entry(cols[0].trim().to_string()).or_insert((lineno, [None, None, None]));
        let slot = &mut entry.1[Aspect::ALL.iter().position(|a| *a == aspect).unwrap()];
        if slot.is_some() {
            return Err(Error::parse(&origin, lineno, format!("duplicate {aspect} row for {}", cols[0])));
        }
        *slot = Some(bits);
    }
    let mut out = LabelMap::new();
    for (id, (lineno, [e, s, t])) in partial {
        let (Some(event), Some(sentiment), Some(topic)) = (e, s, t) else {
            return Err(Error::parse(&origin, lineno, format!("story {id} is missing an aspect")));
        };
        if event.len() != sentiment.len() || event.len() != topic.len() {
            return Err(Error::parse(&origin, lineno, format!("story {id} has unequal label lengths")));
        }
        out.insert(id, TriggerLabels { event, sentiment, topic });
    }
    Ok(out)
}

pub fn write_label_file(path: &Path, stories: &[Story], labels: &LabelMap) -> Result<()> {
    let mut body = String::new();
    for s in stories {
        let Some(l) = labels.get(&s.id) else { continue };
        for a in Aspect::ALL {
            body.push_str(&format!("{}\t{}\t{}\n", s.id, a, l.bitstring(a)));
        }
    }
    fs::write(path, body).map_err(|e| Error::io(path, e))
}

/// Checks every story has labels matching its context length.
pub fn check_alignment(stories: &[Story], labels: &LabelMap) -> Result<()> {
    for s in stories {
        let t = s.context_tokens().len();
        match labels.get(&s.id) {
            None => return Err(Error::Contract(format!("no trigger labels for story {}", s.id))),
            Some(l) if l.len() != t => {
                return Err(Error::Contract(format!(
                    "labels for story {} cover {} tokens, context has {t}",
                    s.id,
                    l.len()
                )))
            }
            Some(_) => {}
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(v: &[bool]) -> Vec<u8> {
        v.iter().map(|b| *b as u8).collect()
    }

    fn ricky_lexicons() -> LexiconSet {
        let mut lex = LexiconSet::default();
        for e in ["fell", "hiking", "woods"] {
            lex.add_event(e);
        }
        lex.sentiment_terms.insert("fell".into());
        lex.topic.words = ["ricky", "fell", "hiking", "woods"].into_iter().map(String::from).collect();
        lex
    }

    #[test]
    fn ricky_sentence_rows() {
        let toks = crate::data::tokenize("Ricky fell while hiking in the woods");
        let l = label_story(&toks, &ricky_lexicons());
        assert_eq!(bits(&l.event), [0, 1, 0, 1, 0, 0, 1]);
        assert_eq!(bits(&l.sentiment), [0, 1, 0, 0, 0, 0, 0]);
        assert_eq!(bits(&l.topic), [1, 1, 0, 1, 0, 0, 1]);
    }

    #[test]
    fn empty_lexicons_give_zeros() {
        let l = label_story(&["a", "b", "c"], &LexiconSet::default());
        assert_eq!(l, TriggerLabels::zeros(3));
    }

    #[test]
    fn saturated_lexicons_give_ones() {
        let toks = ["a", "b", "c"];
        let mut lex = LexiconSet::default();
        for t in toks {
            lex.add_event(t);
            lex.sentiment_terms.insert(t.into());
            lex.topic.words.insert(t.into());
        }
        let l = label_story(&toks, &lex);
        for a in Aspect::ALL {
            assert!(l.get(a).iter().all(|b| *b));
        }
    }

    #[test]
    fn phrases_and_negation() {
        let mut lex = LexiconSet::default();
        lex.add_event("went on");
        lex.negation_terms.insert("not".into());
        lex.topic.suffixes.push("ing".into());
        let l = label_story(&["sam", "went", "on", "not", "hiking", "ing"], &lex);
        assert_eq!(bits(&l.event), [0, 1, 1, 0, 0, 0]);
        assert_eq!(bits(&l.sentiment), [0, 0, 0, 1, 0, 0]);
        assert_eq!(bits(&l.topic), [0, 0, 0, 0, 1, 0]);
    }

    #[test]
    fn load_lexicons_collapses_duplicates_and_comments() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("sentiment.txt"), "# list\namazing\nterrible\n").unwrap();
        let paths = LexiconPaths {
            sentiment: Some(dir.path().join("sentiment.txt")),
            ..Default::default()
        };
        assert_eq!(load_lexicons(&paths).unwrap().sentiment_terms.len(), 2);
        fs::write(dir.path().join("sentiment.txt"), "amazing\nterrible\nAmazing\namazing\n").unwrap();
        assert_eq!(load_lexicons(&paths).unwrap().sentiment_terms.len(), 2);
    }

    #[test]
    fn missing_lexicon_names_aspect() {
        let paths = LexiconPaths {
            negation: Some(PathBuf::from("/nonexistent/negation.txt")),
            ..Default::default()
        };
        let err = load_lexicons(&paths).unwrap_err();
        assert_eq!(err.category(), "config");
        assert!(err.to_string().contains("negation"));
    }

    #[test]
    fn label_file_round_trip() {
        let (stories, lex) = crate::data::generate_synthetic(3, 5, &Default::default());
        let labels = label_corpus(&stories, &LexiconSet::from_synthetic(&lex));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("labels.tsv");
        write_label_file(&path, &stories, &labels).unwrap();
        let back = load_label_file(&path).unwrap();
        assert_eq!(back, labels);
        check_alignment(&stories, &back).unwrap();
    }

    #[test]
    fn label_file_missing_aspect() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("labels.tsv");
        fs::write(&path, "s1\tevent\t010\ns1\ttopic\t110\n").unwrap();
        assert_eq!(load_label_file(&path).unwrap_err().category(), "parse");
    }
}
