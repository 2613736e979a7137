mod common;

use std::collections::HashSet;

use common::Fixture;
use memchain::data::{generate_synthetic, parse_corpus, serialize_corpus, tokenize, Ending, SyntheticSpec};
use memchain::labeler::{label_story, Aspect, LexiconSet};
use proptest::prelude::*;
use proptest::test_runner::RngSeed;

proptest! {
    #![proptest_config(ProptestConfig {
        rng_seed: RngSeed::Fixed(7),
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn tokenizer_is_total_and_stable(text in "\\PC{0,80}") {
        let tokens = tokenize(&text);
        prop_assert_eq!(&tokens, &tokenize(&text));
        for t in &tokens {
            prop_assert!(!t.is_empty());
            prop_assert!(!t.chars().any(char::is_whitespace));
            prop_assert_eq!(t, &t.to_lowercase());
        }
        // re-tokenising the space-joined tokens changes nothing
        prop_assert_eq!(tokenize(&tokens.join(" ")), tokens);
    }

    #[test]
    fn corpus_round_trips(n in 1usize..20, seed in 0u64..1000) {
        let (stories, _) = generate_synthetic(n, seed, &SyntheticSpec::default());
        let text = serialize_corpus(&stories).unwrap();
        prop_assert_eq!(parse_corpus(&text, "mem").unwrap(), stories);
    }

    #[test]
    fn adding_lexicon_entries_never_removes_a_trigger(
        words in prop::collection::vec("[a-e]{1,2}", 1..15),
        base in prop::collection::vec("[a-e]{1,2}", 0..6),
        extra in "[a-e]{1,2}",
        which in 0usize..3,
    ) {
        let mut lex = LexiconSet::default();
        for w in &base {
            lex.add_event(w);
            lex.sentiment_terms.insert(w.clone());
            lex.topic.words.insert(w.clone());
        }
        let before = label_story(&words, &lex);
        match which {
            0 => lex.add_event(&format!("{extra} {}", words[0])),
            1 => { lex.negation_terms.insert(extra.clone()); }
            _ => { lex.topic.words.insert(extra.clone()); }
        }
        let after = label_story(&words, &lex);
        prop_assert_eq!(after.len(), words.len());
        for a in Aspect::ALL {
            for (b, c) in before.get(a).iter().zip(after.get(a)) {
                prop_assert!(!*b || *c);
            }
        }
    }
}

#[test]
fn synthetic_gold_is_balanced() {
    let (stories, _) = generate_synthetic(600, 4, &SyntheticSpec::default());
    let a = stories.iter().filter(|s| s.gold == Ending::A).count() as f64 / 600.0;
    assert!((0.42..=0.58).contains(&a), "gold A fraction {a}");
    assert!(stories.iter().all(|s| s.validate().is_ok()));
}

#[test]
fn topic_overlap_alone_separates_the_synthetic_task() {
    let fx = Fixture::new(64, 7, 4);
    let mut correct = 0;
    for s in &fx.stories {
        let context: HashSet<&str> = s.context_tokens().into_iter().collect();
        let score = |e: Ending| {
            s.ending(e)
                .iter()
                .filter(|t| t.starts_with("tp") && context.contains(t.as_str()))
                .count()
        };
        let pick = if score(Ending::A) >= score(Ending::B) { Ending::A } else { Ending::B };
        correct += (pick == s.gold) as usize;
    }
    assert_eq!(correct, 64);
}

#[test]
fn synthetic_labels_mark_the_planted_triggers() {
    let fx = Fixture::new(50, 12, 4);
    for s in &fx.stories {
        let l = &fx.labels[&s.id];
        for (i, tok) in s.context_tokens().into_iter().enumerate() {
            let event = tok.starts_with("ev");
            let sentiment = tok.starts_with("pos") || tok.starts_with("neg") || tok.starts_with("nt");
            let topic = tok.starts_with("tp") || event;
            assert_eq!(l.event[i], event, "{tok}");
            assert_eq!(l.sentiment[i], sentiment, "{tok}");
            assert_eq!(l.topic[i], topic, "{tok}");
        }
    }
}
