//! Story corpora, vocabulary, word vectors and the synthetic story generator.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use log::warn;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::tensor::Tensor;

pub const CONTEXT_SENTENCES: usize = 4;
const CORPUS_HEADER: &str = "id\tsent1\tsent2\tsent3\tsent4\tending_a\tending_b\tgold";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Ending {
    A,
    B,
}

impl Ending {
    pub fn other(self) -> Ending {
        match self {
            Ending::A => Ending::B,
            Ending::B => Ending::A,
        }
    }
}

impl fmt::Display for Ending {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Ending::A => "A",
            Ending::B => "B",
        })
    }
}

/// A four-sentence context with two candidate endings.
#[derive(Clone, Debug, PartialEq)]
pub struct Story {
    pub id: String,
    pub context: Vec<Vec<String>>,
    pub ending_a: Vec<String>,
    pub ending_b: Vec<String>,
    pub gold: Ending,
}

impl Story {
    /// All context sentences as one token stream.
    pub fn context_tokens(&self) -> Vec<&str> {
        self.context.iter().flatten().map(String::as_str).collect()
    }

    pub fn ending(&self, which: Ending) -> &[String] {
        match which {
            Ending::A => &self.ending_a,
            Ending::B => &self.ending_b,
        }
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.context.len() != CONTEXT_SENTENCES {
            return Err(format!(
                "story {} has {} context sentences, expected {CONTEXT_SENTENCES}",
                self.id,
                self.context.len()
            ));
        }
        if self.context.iter().any(Vec::is_empty) || self.ending_a.is_empty() || self.ending_b.is_empty() {
            return Err(format!("story {} has an empty sentence", self.id));
        }
        Ok(())
    }
}

fn is_edge_punct(c: char) -> bool {
    matches!(
        c,
        '.' | ',' | '!' | '?' | ';' | ':' | '"' | '\'' | '(' | ')' | '[' | ']' | '`'
    )
}

/// Lowercases, splits on whitespace and peels punctuation off both ends of
/// every word, each punctuation character becoming its own token.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for word in text.split_whitespace() {
        let word = word.to_lowercase();
        let chars: Vec<char> = word.chars().collect();
        let mut start = 0;
        let mut end = chars.len();
        while start < end && is_edge_punct(chars[start]) {
            start += 1;
        }
        while end > start && is_edge_punct(chars[end - 1]) {
            end -= 1;
        }
        out.extend(chars[..start].iter().map(|c| c.to_string()));
        if start < end {
            out.push(chars[start..end].iter().collect());
        }
        out.extend(chars[end..].iter().map(|c| c.to_string()));
    }
    out
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Parses a cloze TSV file (header row, 8 tab-separated columns).
pub fn load_corpus(path: &Path) -> Result<Vec<Story>> {
    parse_corpus(&read_to_string(path)?, &path.display().to_string())
}

pub fn parse_corpus(text: &str, origin: &str) -> Result<Vec<Story>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.split('\t').count() == 8 => {}
        Some(_) => return Err(Error::parse(origin, 1, "header row must have 8 columns")),
        None => return Err(Error::parse(origin, 1, "missing header row")),
    }
    let mut stories = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 8 {
            return Err(Error::parse(
                origin,
                lineno,
                format!("expected 8 columns, found {}", cols.len()),
            ));
        }
        let mut tokens = Vec::with_capacity(6);
        for (c, col) in cols[1..7].iter().enumerate() {
            let t = tokenize(col);
            if t.is_empty() {
                return Err(Error::parse(origin, lineno, format!("empty field in column {}", c + 2)));
            }
            tokens.push(t);
        }
        let gold = match cols[7].trim() {
            "A" | "a" | "1" => Ending::A,
            "B" | "b" | "2" => Ending::B,
            other => return Err(Error::parse(origin, lineno, format!("gold must be A or B, got `{other}`"))),
        };
        let id = cols[0].trim();
        if id.is_empty() {
            return Err(Error::parse(origin, lineno, "empty story id"));
        }
        let ending_b = tokens.pop().unwrap();
        let ending_a = tokens.pop().unwrap();
        stories.push(Story {
            id: id.to_string(),
            context: tokens,
            ending_a,
            ending_b,
            gold,
        });
    }
    Ok(stories)
}

pub fn write_corpus(path: &Path, stories: &[Story]) -> Result<()> {
    fs::write(path, serialize_corpus(stories)?).map_err(|e| Error::io(path, e))
}

pub fn serialize_corpus(stories: &[Story]) -> Result<String> {
    let mut out = String::from(CORPUS_HEADER);
    out.push('\n');
    for s in stories {
        s.validate().map_err(Error::Contract)?;
        out.push_str(&s.id);
        for sent in s.context.iter().chain([&s.ending_a, &s.ending_b]) {
            out.push('\t');
            out.push_str(&sent.join(" "));
        }
        out.push('\t');
        out.push_str(&s.gold.to_string());
        out.push('\n');
    }
    Ok(out)
}

/// Splits off the last `validation` stories, in file order.
pub fn split_validation(stories: &[Story], validation: usize) -> (Vec<Story>, Vec<Story>) {
    let cut = stories.len().saturating_sub(validation);
    (stories[..cut].to_vec(), stories[cut..].to_vec())
}

/// Token to index map. Index 0 is the unknown token.
#[derive(Clone, Debug, Default)]
pub struct Vocabulary {
    index: HashMap<String, usize>,
    tokens: Vec<String>,
}

impl Vocabulary {
    pub const UNKNOWN: usize = 0;

    pub fn from_stories(stories: &[Story]) -> Self {
        let mut v = Vocabulary::default();
        for s in stories {
            for t in s.context.iter().chain([&s.ending_a, &s.ending_b]).flatten() {
                v.insert(t);
            }
        }
        v
    }

    pub fn insert(&mut self, token: &str) -> usize {
        if let Some(&i) = self.index.get(token) {
            return i;
        }
        self.tokens.push(token.to_string());
        let i = self.tokens.len();
        self.index.insert(token.to_string(), i);
        i
    }

    pub fn get(&self, token: &str) -> usize {
        self.index.get(token).copied().unwrap_or(Self::UNKNOWN)
    }

    pub fn token(&self, index: usize) -> Option<&str> {
        index.checked_sub(1).and_then(|i| self.tokens.get(i)).map(String::as_str)
    }

    /// Known tokens, excluding the unknown slot.
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn encode<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<usize> {
        tokens.iter().map(|t| self.get(t.as_ref())).collect()
    }
}

/// Word vectors indexed by [`Vocabulary`]; row 0 is the zero vector.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingTable {
    table: Tensor,
    pub frozen: bool,
}

impl EmbeddingTable {
    pub fn new(table: Tensor) -> Result<Self> {
        if table.shape().len() != 2 || table.shape()[0] == 0 {
            return Err(Error::Contract(format!(
                "embedding table must be a non-empty matrix, got {:?}",
                table.shape()
            )));
        }
        if table.data()[..table.shape()[1]].iter().any(|v| *v != 0.0) {
            return Err(Error::Contract("unknown-token row must be zero".into()));
        }
        Ok(EmbeddingTable { table, frozen: true })
    }

    pub fn dim(&self) -> usize {
        self.table.shape()[1]
    }

    pub fn rows(&self) -> usize {
        self.table.shape()[0]
    }

    pub fn row(&self, index: usize) -> &[f64] {
        let d = self.dim();
        let i = if index < self.rows() { index } else { Vocabulary::UNKNOWN };
        &self.table.data()[i * d..(i + 1) * d]
    }

    pub fn tensor(&self) -> &Tensor {
        &self.table
    }
}

/// Loads `token v1 .. vd` lines for the tokens in `vocab`; tokens missing
/// from the file keep a zero row. A leading `count dim` header is skipped.
pub fn load_embeddings(path: &Path, vocab: &Vocabulary) -> Result<EmbeddingTable> {
    let origin = path.display().to_string();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut dim: Option<usize> = None;
    let mut rows: Vec<(usize, Vec<f64>)> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let lineno = idx + 1;
        let mut fields = line.split_whitespace();
        let Some(token) = fields.next() else { continue };
        let rest: Vec<&str> = fields.collect();
        if idx == 0 && rest.len() == 1 && token.parse::<usize>().is_ok() && rest[0].parse::<usize>().is_ok() {
            continue;
        }
        match dim {
            None if rest.is_empty() => return Err(Error::parse(&origin, lineno, "line has no vector values")),
            None => dim = Some(rest.len()),
            Some(d) if d != rest.len() => {
                return Err(Error::parse(
                    &origin,
                    lineno,
                    format!("inconsistent dimension: expected {d}, found {}", rest.len()),
                ))
            }
            Some(_) => {}
        }
        let slot = vocab.get(token);
        if slot == Vocabulary::UNKNOWN {
            continue;
        }
        let values = rest
            .iter()
            .map(|v| v.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::parse(&origin, lineno, format!("bad float: {e}")))?;
        rows.push((slot, values));
    }
    let d = dim.ok_or_else(|| Error::parse(&origin, 1, "empty embeddings file"))?;
    if rows.is_empty() {
        warn!("{origin}: no vocabulary token has a vector; embedding table is all zeros");
    }
    let mut table = Tensor::zeros(&[vocab.len() + 1, d]);
    for (slot, values) in rows {
        table.data_mut()[slot * d..(slot + 1) * d].copy_from_slice(&values);
    }
    EmbeddingTable::new(table)
}

pub fn save_embeddings(path: &Path, vocab: &Vocabulary, table: &EmbeddingTable) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for (i, token) in vocab.tokens().iter().enumerate() {
        let mut line = token.clone();
        for v in table.row(i + 1) {
            line.push(' ');
            line.push_str(&v.to_string());
        }
        writeln!(w, "{line}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Gaussian word vectors for every vocabulary token, `N(0, scale^2)` per
/// component. Used for synthetic corpora.
pub fn random_embeddings(vocab: &Vocabulary, dim: usize, scale: f64, seed: u64) -> EmbeddingTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, scale).expect("finite scale");
    let mut table = Tensor::zeros(&[vocab.len() + 1, dim]);
    for v in &mut table.data_mut()[dim..] {
        *v = normal.sample(&mut rng);
    }
    EmbeddingTable::new(table).expect("row 0 is zero")
}

/// Sizes of the disjoint synthetic trigger lexicons.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyntheticSpec {
    pub topics: usize,
    pub sentiment_per_polarity: usize,
    pub events: usize,
    pub negations: usize,
    pub fillers: usize,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            topics: 6,
            sentiment_per_polarity: 5,
            events: 8,
            negations: 2,
            fillers: 6,
        }
    }
}

/// Word lists planted by [`generate_synthetic`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyntheticLexicons {
    pub events: Vec<String>,
    pub positive: Vec<String>,
    pub negative: Vec<String>,
    pub negations: Vec<String>,
    pub topics: Vec<String>,
    pub fillers: Vec<String>,
}

fn words(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

/// Deterministic synthetic cloze corpus.
///
/// Every context plants one topic noun and one sentiment polarity. The
/// coherent ending repeats the topic with a word of the same polarity; the
/// incoherent ending names a different topic, and half of the time also
/// flips the polarity.
pub fn generate_synthetic(n: usize, seed: u64, spec: &SyntheticSpec) -> (Vec<Story>, SyntheticLexicons) {
    assert!(spec.topics >= 2 && spec.sentiment_per_polarity >= 1 && spec.events >= 1 && spec.fillers >= 1);
    let lex = SyntheticLexicons {
        events: words("ev", spec.events),
        positive: words("pos", spec.sentiment_per_polarity),
        negative: words("neg", spec.sentiment_per_polarity),
        negations: words("nt", spec.negations),
        topics: words("tp", spec.topics),
        fillers: words("fw", spec.fillers),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pick = |rng: &mut ChaCha8Rng, xs: &[String]| xs.choose(rng).expect("non-empty lexicon").clone();
    let mut stories = Vec::with_capacity(n);
    for k in 0..n {
        let topic = pick(&mut rng, &lex.topics);
        let positive = rng.random_bool(0.5);
        let (same, opposite) = if positive {
            (&lex.positive, &lex.negative)
        } else {
            (&lex.negative, &lex.positive)
        };
        let mut context = Vec::with_capacity(CONTEXT_SENTENCES);
        for s in 0..CONTEXT_SENTENCES {
            let mut sent = vec![pick(&mut rng, &lex.fillers)];
            if s == 0 || rng.random_bool(0.5) {
                sent.push(topic.clone());
            }
            sent.push(pick(&mut rng, &lex.events));
            if !lex.negations.is_empty() && rng.random_bool(0.15) {
                sent.push(pick(&mut rng, &lex.negations));
            }
            if s == CONTEXT_SENTENCES - 1 || rng.random_bool(0.5) {
                sent.push(pick(&mut rng, same));
            }
            sent.push(pick(&mut rng, &lex.fillers));
            sent.push(".".into());
            context.push(sent);
        }
        let ending = |rng: &mut ChaCha8Rng, topic: &str, polar: &[String]| {
            vec![
                pick(rng, &lex.fillers),
                topic.to_string(),
                pick(rng, &lex.events),
                pick(rng, polar),
                ".".into(),
            ]
        };
        let coherent = ending(&mut rng, &topic, same);
        let other: Vec<String> = lex.topics.iter().filter(|t| **t != topic).cloned().collect();
        let wrong_topic = pick(&mut rng, &other);
        let incoherent = if rng.random_bool(0.5) {
            ending(&mut rng, &wrong_topic, same)
        } else {
            ending(&mut rng, &wrong_topic, opposite)
        };
        let gold = if rng.random_bool(0.5) { Ending::A } else { Ending::B };
        let (ending_a, ending_b) = match gold {
            Ending::A => (coherent, incoherent),
            Ending::B => (incoherent, coherent),
        };
        stories.push(Story {
            id: format!("syn-{seed}-{k}"),
            context,
            ending_a,
            ending_b,
            gold,
        });
    }
    (stories, lex)
}
