//! Rule-based trigger labelling, shown on the "Ricky fell while hiking in the
//! woods" sentence and on a lexicon directory read from disk.
//!
//! cargo run --example trigger_labels [-- lexicon_dir "some sentence"]

use memchain::data::tokenize;
use memchain::labeler::{label_story, load_lexicons, Aspect, LexiconPaths, LexiconSet};

fn print_rows(tokens: &[String], lex: &LexiconSet) {
    let labels = label_story(tokens, lex);
    let width = tokens.iter().map(|t| t.len()).max().unwrap_or(1).max(1);
    print!("{:<10}", "");
    for t in tokens {
        print!(" {t:>width$}");
    }
    println!();
    for aspect in Aspect::ALL {
        print!("{:<10}", aspect.name());
        for b in labels.get(aspect) {
            print!(" {:>width$}", *b as u8);
        }
        println!();
    }
}

fn main() -> memchain::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if let [dir, sentence] = args.as_slice() {
        let lex = load_lexicons(&LexiconPaths::in_dir(dir.as_ref()))?;
        print_rows(&tokenize(sentence), &lex);
        return Ok(());
    }

    // "fell" evokes a frame and carries sentiment; nouns and verbs are topical
    let mut lex = LexiconSet::default();
    for e in ["fell", "hiking", "woods"] {
        lex.add_event(e);
    }
    lex.sentiment_terms.insert("fell".into());
    lex.negation_terms.insert("not".into());
    lex.topic.words.extend(["ricky", "woods"].map(String::from));
    lex.topic.suffixes.push("ing".into());
    lex.topic.words.insert("fell".into());

    print_rows(&tokenize("Ricky fell while hiking in the woods"), &lex);
    println!();
    print_rows(&tokenize("Ricky was not hiking in the woods."), &lex);
    Ok(())
}
