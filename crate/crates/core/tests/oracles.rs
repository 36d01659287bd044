//! Independent oracles for the computed expectations used across the suite.
//!
//! Each oracle here re-derives a value by a different route from the library
//! code (string rewriting instead of symbol vectors, raw substring counts
//! instead of model tables) and freezes or cross-checks it.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use segmenta::bpe::{self, Budget};
use segmenta::corpus::Corpus;
use segmenta::lmstats;
use segmenta::segcore::{self, Fraction, MarkerPolicy};

/// Reference BPE on space-separated strings: each word is kept as
/// `" s1 s2 ... "`, pairs are counted by splitting, and a merge is a
/// leftmost non-overlapping textual replacement of `" l r "` by `" lr "`.
fn oracle_bpe(
    counts: &[(&str, u64)],
    merges: usize,
    marker: Option<char>,
) -> Vec<(String, String)> {
    let mut words: Vec<(String, u64, String)> = counts
        .iter()
        .map(|&(w, c)| {
            let mut syms: Vec<String> = w.chars().map(|ch| ch.to_string()).collect();
            if let Some(m) = marker {
                syms.push(m.to_string());
            }
            (format!(" {} ", syms.join(" ")), c, w.to_owned())
        })
        .collect();
    words.sort_by(|a, b| b.1.cmp(&a.1).then(a.2.cmp(&b.2)));
    let mut vocab: Vec<String> = words
        .iter()
        .flat_map(|(s, _, _)| s.split_whitespace().map(str::to_owned).collect::<Vec<_>>())
        .collect();
    vocab.sort();
    vocab.dedup();

    let mut learned = Vec::new();
    while learned.len() < merges {
        // first-seen order of pairs, with summed counts
        let mut order: Vec<(String, String)> = Vec::new();
        let mut totals: BTreeMap<(String, String), u64> = BTreeMap::new();
        for (s, c, _) in &words {
            let syms: Vec<&str> = s.split_whitespace().collect();
            for w in syms.windows(2) {
                let key = (w[0].to_owned(), w[1].to_owned());
                if !totals.contains_key(&key) {
                    order.push(key.clone());
                }
                *totals.entry(key).or_insert(0) += c;
            }
        }
        let best = order
            .iter()
            .filter(|(l, r)| !vocab.contains(&format!("{l}{r}")))
            .fold(None::<(&(String, String), u64)>, |best, p| {
                let c = totals[p];
                match best {
                    Some((_, bc)) if bc >= c => best,
                    _ => Some((p, c)),
                }
            });
        let Some(((l, r), _)) = best else { break };
        let (l, r) = (l.clone(), r.clone());
        let pat = format!(" {l} {r} ");
        let rep = format!(" {l}{r} ");
        for (s, _, _) in &mut words {
            // textual replacement must restart after each hit so that
            // overlapping candidates resolve leftmost-first
            let mut out = String::new();
            let mut rest = s.as_str();
            while let Some(pos) = rest.find(&pat) {
                out.push_str(&rest[..pos]);
                out.push_str(&rep[..rep.len() - 1]);
                rest = &rest[pos + pat.len() - 1..];
            }
            out.push_str(rest);
            *s = out;
        }
        vocab.push(format!("{l}{r}"));
        learned.push((l, r));
    }
    learned
}

fn oracle_apply(merges: &[(String, String)], word: &str, marker: Option<char>) -> Vec<String> {
    let mut syms: Vec<String> = word.chars().map(|c| c.to_string()).collect();
    if let Some(m) = marker {
        syms.push(m.to_string());
    }
    for (l, r) in merges {
        let mut i = 0;
        while i + 1 < syms.len() {
            if &syms[i] == l && &syms[i + 1] == r {
                let right = syms.remove(i + 1);
                syms[i].push_str(&right);
            }
            i += 1;
        }
    }
    syms
}

const TOY: [(&str, u64); 5] = [
    ("low", 5),
    ("lowest", 2),
    ("newer", 6),
    ("wider", 3),
    ("new", 2),
];

fn pairs(t: &bpe::MergeTable) -> Vec<(String, String)> {
    t.merges()
        .iter()
        .map(|m| (m.left.clone(), m.right.clone()))
        .collect()
}

#[test]
fn oracle_reproduces_toy_merges() {
    let got = oracle_bpe(&TOY, 8, Some('·'));
    let expected: Vec<(String, String)> = [
        ("e", "r"),
        ("er", "·"),
        ("n", "e"),
        ("ne", "w"),
        ("l", "o"),
        ("lo", "w"),
        ("new", "er·"),
        ("low", "·"),
    ]
    .iter()
    .map(|(a, b)| (a.to_string(), b.to_string()))
    .collect();
    assert_eq!(got, expected);
    let (table, _) = bpe::train(
        &Corpus::from_counts(TOY).unwrap(),
        Budget::Merges(8),
        MarkerPolicy::default(),
    )
    .unwrap();
    assert_eq!(pairs(&table), expected);
}

#[test]
fn oracle_replays_newer_and_oov_words() {
    let merges = oracle_bpe(&TOY, 8, Some('·'));
    assert_eq!(oracle_apply(&merges, "newer", Some('·')), ["newer·"]);
    assert_eq!(oracle_apply(&merges, "lower", Some('·')), ["low", "er·"]);
    assert_eq!(oracle_apply(&merges, "deer", Some('·')), ["d", "e", "er·"]);
}

#[test]
fn single_pair_word_halts_after_two_merges() {
    let merges = oracle_bpe(&[("ab", 1)], 10, Some('·'));
    assert_eq!(merges.len(), 2);
    let (t, _) = bpe::train(
        &Corpus::from_counts([("ab", 1)]).unwrap(),
        Budget::Merges(10),
        MarkerPolicy::default(),
    )
    .unwrap();
    assert_eq!(pairs(&t), merges);
}

fn random_corpus(rng: &mut ChaCha8Rng, alphabet: &[char]) -> Vec<(String, u64)> {
    let n = rng.gen_range(1..12);
    let mut out: BTreeMap<String, u64> = BTreeMap::new();
    for _ in 0..n {
        let len = rng.gen_range(1..8);
        let w: String = (0..len)
            .map(|_| alphabet[rng.gen_range(0..alphabet.len())])
            .collect();
        out.insert(w, rng.gen_range(1..10));
    }
    out.into_iter().collect()
}

#[test]
fn oracle_agrees_on_random_corpora() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for round in 0..300 {
        let alphabet: &[char] = if round % 3 == 0 {
            &['a', 'b']
        } else {
            &['a', 'b', 'c', 'd', 'é']
        };
        let corpus = random_corpus(&mut rng, alphabet);
        let borrowed: Vec<(&str, u64)> = corpus.iter().map(|(w, c)| (w.as_str(), *c)).collect();
        let marker = if round % 2 == 0 { Some('·') } else { None };
        let policy = marker.map_or(MarkerPolicy::none(), MarkerPolicy::end_of_word);
        let budget = rng.gen_range(0..25);
        let expected = oracle_bpe(&borrowed, budget, marker);
        let (table, trace) = bpe::train(
            &Corpus::from_counts(borrowed.clone()).unwrap(),
            Budget::Merges(budget),
            policy,
        )
        .unwrap();
        assert_eq!(pairs(&table), expected, "corpus {corpus:?}");
        assert_eq!(trace.len(), expected.len());
        for (w, _) in &borrowed {
            let got = table.apply(w).unwrap().segments().to_vec();
            assert_eq!(got, oracle_apply(&expected, w, marker), "word {w}");
        }
    }
}

#[test]
fn utf8_oracle_for_byte_segments() {
    for word in ["é", "ab", "naïve", "日本", "🙂x"] {
        let mut buf = [0u8; 4];
        let expected: Vec<String> = word
            .chars()
            .flat_map(|c| c.encode_utf8(&mut buf).as_bytes().to_vec())
            .map(|b| {
                let hex = b"0123456789abcdef";
                String::from_utf8(vec![hex[(b >> 4) as usize], hex[(b & 15) as usize]]).unwrap()
            })
            .collect();
        let seg = segcore::segment_bytes(word).unwrap();
        assert_eq!(seg.segments(), expected.as_slice());
    }
    assert_eq!(
        segcore::segment_bytes("é").unwrap().segments(),
        ["c3", "a9"]
    );
}

/// Cut positions by locating each segment in the word in turn.
fn oracle_cuts(word: &str, segs: &[&str]) -> Vec<usize> {
    let mut cuts = Vec::new();
    let mut pos = 0;
    for s in segs {
        assert!(word[pos..].starts_with(s));
        pos += s.len();
        if pos < word.len() {
            cuts.push(pos);
        }
    }
    cuts
}

#[test]
fn boundary_oracle_for_canines() {
    assert_eq!(oracle_cuts("canines", &["can", "in", "e", "s"]), [3, 5, 6]);
    assert_eq!(oracle_cuts("canines", &["canine", "s"]), [6]);
    // P = 1/3, R = 1/1, F1 = 2PR/(P+R) = (2/3)/(4/3) = 1/2
    let cand = segcore::Segmentation::reference("can in e s").unwrap();
    let refr = segcore::Segmentation::reference("canine s").unwrap();
    let s = segcore::compare_segmentations(&cand, &refr).unwrap();
    assert_eq!(
        (s.precision, s.recall, s.f1),
        (
            Fraction::new(1, 3),
            Fraction::new(1, 1),
            Fraction::new(1, 2)
        )
    );
}

const TOY_TEXT: &str = "low low low low low lowest lowest newer newer newer newer newer newer \
                        wider wider wider new new";

/// Counts of `next` after `ctx` over the raw toy text, where `$` stands for
/// the end of a word and `^` for its beginning.
fn raw_bigram(ctx: char, next: char) -> (u64, u64) {
    let mut pair = 0;
    let mut total = 0;
    for word in TOY_TEXT.split_whitespace() {
        let framed: Vec<char> = std::iter::once('^')
            .chain(word.chars())
            .chain(std::iter::once('$'))
            .collect();
        for w in framed.windows(2) {
            if w[0] == ctx {
                total += 1;
                if w[1] == next {
                    pair += 1;
                }
            }
        }
    }
    (pair, total)
}

fn toy_char_sequences(with_marker: bool) -> Vec<Vec<String>> {
    TOY_TEXT
        .split_whitespace()
        .map(|w| {
            let mut s: Vec<String> = w.chars().map(String::from).collect();
            if with_marker {
                s.push("·".into());
            }
            s
        })
        .collect()
}

#[test]
fn char_bigram_matches_count_ratio() {
    let (pair, total) = raw_bigram('w', '$');
    assert_eq!((pair, total), (7, 18));

    // with the marker as an explicit token, p(· | w) is the same ratio
    let lm = lmstats::train_ngram(&toy_char_sequences(true), 2, 0.0).unwrap();
    let p = lm.prob(&["w".to_owned()], "·").unwrap();
    assert_eq!(p, 7.0 / 18.0);

    // add-1 over 10 letters + end + unknown
    let lm = lmstats::train_ngram(&toy_char_sequences(false), 2, 1.0).unwrap();
    assert_eq!(lm.vocab().len(), 12);
    let p = lm.prob(&["w".to_owned()], lmstats::END).unwrap();
    assert_eq!(p, (7.0 + 1.0) / (18.0 + 12.0));
}

#[test]
fn sequence_log_prob_matches_product_of_ratios() {
    let lm = lmstats::train_ngram(&toy_char_sequences(false), 2, 0.0).unwrap();
    let mut expected = 0.0;
    let framed = ['^', 'l', 'o', 'w', 'e', 'r', '$'];
    for w in framed.windows(2) {
        let (pair, total) = raw_bigram(w[0], w[1]);
        expected += (pair as f64 / total as f64).ln();
    }
    let got = lm.sequence_log_prob(&["l", "o", "w", "e", "r"]).unwrap();
    assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
    assert!(got.is_finite() && got < 0.0);
}

#[test]
fn trigram_against_enumeration() {
    let seqs = toy_char_sequences(false);
    let k = 0.5;
    let lm = lmstats::train_ngram(&seqs, 3, k).unwrap();
    // enumerate all trigrams directly over padded strings
    let mut tri: BTreeMap<(String, String, String), u64> = BTreeMap::new();
    let mut ctx: BTreeMap<(String, String), u64> = BTreeMap::new();
    for s in &seqs {
        let mut padded = vec!["<s>".to_owned(), "<s>".to_owned()];
        padded.extend(s.iter().cloned());
        padded.push("</s>".to_owned());
        for w in padded.windows(3) {
            *tri.entry((w[0].clone(), w[1].clone(), w[2].clone()))
                .or_insert(0) += 1;
            *ctx.entry((w[0].clone(), w[1].clone())).or_insert(0) += 1;
        }
    }
    let v = 12.0;
    let word = ["w", "i", "d", "e", "s", "t"];
    let mut padded = vec!["<s>".to_owned(), "<s>".to_owned()];
    padded.extend(word.iter().map(|s| s.to_string()));
    padded.push("</s>".to_owned());
    let mut expected = 0.0;
    for w in padded.windows(3) {
        let c = *tri
            .get(&(w[0].clone(), w[1].clone(), w[2].clone()))
            .unwrap_or(&0) as f64;
        let t = *ctx.get(&(w[0].clone(), w[1].clone())).unwrap_or(&0) as f64;
        expected += ((c + k) / (t + k * v)).ln();
    }
    let got = lm.sequence_log_prob(&word).unwrap();
    assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
}
