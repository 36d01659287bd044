use std::collections::HashSet;

use proptest::prelude::*;
use segmenta::align::{self, AttentionMatrix};
use segmenta::bpe::{self, Budget, TrainOptions};
use segmenta::corpus::{self, Corpus, NormConfig};
use segmenta::lmstats;
use segmenta::segcore::{self, ByteSegmenter, CharSegmenter, MarkerPolicy, Segmenter};
use segmenta::semlab::{self, Concat, FocusOptions, Lexicon, MeaningFunction, Side};

fn word() -> impl Strategy<Value = String> {
    "[a-dé日]{1,8}"
}

fn corpus_strategy() -> impl Strategy<Value = Vec<(String, u64)>> {
    prop::collection::btree_map("[a-e]{1,7}", 1u64..20, 1..15).prop_map(|m| m.into_iter().collect())
}

proptest! {
    #[test]
    fn char_and_byte_round_trip(w in "\\PC{1,10}".prop_filter("no marker", |w| !w.contains('·') && !w.is_empty())) {
        for seg in [
            CharSegmenter::new(MarkerPolicy::default()).segment(&w).unwrap(),
            CharSegmenter::new(MarkerPolicy::none()).segment(&w).unwrap(),
            ByteSegmenter.segment(&w).unwrap(),
        ] {
            prop_assert_eq!(segcore::join(&seg).unwrap(), w.clone());
        }
        let n = w.chars().count();
        prop_assert_eq!(segcore::segment_chars(&w, MarkerPolicy::none()).unwrap().len(), n);
        prop_assert_eq!(segcore::segment_chars(&w, MarkerPolicy::default()).unwrap().len(), n + 1);
    }

    #[test]
    fn self_comparison_is_perfect(w in word(), cuts in prop::collection::vec(any::<bool>(), 8)) {
        let chars: Vec<char> = w.chars().collect();
        let mut segs = vec![String::new()];
        for (i, c) in chars.iter().enumerate() {
            if i > 0 && cuts[i % cuts.len()] {
                segs.push(String::new());
            }
            segs.last_mut().unwrap().push(*c);
        }
        let seg = segcore::Segmentation::reference(&segs.join(" ")).unwrap();
        let s = segcore::compare_segmentations(&seg, &seg).unwrap();
        prop_assert_eq!(s.f1, segcore::Fraction::from_integer(1));
    }

    #[test]
    fn swapping_swaps_precision_and_recall(w in "[a-z]{2,10}", a in any::<u16>(), b in any::<u16>()) {
        let split = |mask: u16| {
            let mut segs = vec![String::new()];
            for (i, c) in w.chars().enumerate() {
                if i > 0 && mask & (1 << (i % 16)) != 0 {
                    segs.push(String::new());
                }
                segs.last_mut().unwrap().push(c);
            }
            segcore::Segmentation::reference(&segs.join(" ")).unwrap()
        };
        let (x, y) = (split(a), split(b));
        let xy = segcore::compare_segmentations(&x, &y).unwrap();
        let yx = segcore::compare_segmentations(&y, &x).unwrap();
        prop_assert_eq!(xy.precision, yx.recall);
        prop_assert_eq!(xy.recall, yx.precision);
        prop_assert_eq!(xy.f1, yx.f1);
        let equal = xy.candidate_boundaries == xy.reference_boundaries;
        let one = segcore::Fraction::from_integer(1);
        prop_assert_eq!(equal, xy.precision == one && xy.recall == one);
    }

    #[test]
    fn bpe_closure_and_vocab_arithmetic(c in corpus_strategy(), budget in 0usize..30) {
        let corpus = Corpus::from_counts(c.clone()).unwrap();
        let (t, trace) = bpe::train(&corpus, Budget::Merges(budget), MarkerPolicy::default()).unwrap();
        prop_assert_eq!(t.vocab_size() - t.seed_alphabet().len(), t.merges().len());
        prop_assert_eq!(trace.len(), t.merges().len());
        for (w, _) in &c {
            let seg = t.apply(w).unwrap();
            prop_assert_eq!(segcore::join(&seg).unwrap(), w.clone());
            for s in seg.segments() {
                prop_assert!(t.contains(s), "{} not in vocab", s);
            }
        }
        let back = bpe::MergeTable::from_file_str(&t.to_file_string()).unwrap();
        prop_assert_eq!(back, t);
    }

    #[test]
    fn bpe_prefix_tables_refine(c in corpus_strategy(), probe in "[a-f]{1,9}") {
        let corpus = Corpus::from_counts(c.clone()).unwrap();
        let (t, _) = bpe::train(&corpus, Budget::Merges(20), MarkerPolicy::default()).unwrap();
        let full = t.apply(&probe).unwrap();
        for k in 0..=t.merges().len() {
            let coarse_cuts = full.boundaries();
            let fine = t.truncated(k).apply(&probe).unwrap();
            prop_assert!(coarse_cuts.is_subset(&fine.boundaries()));
        }
    }

    #[test]
    fn unknown_chars_pass_through(c in corpus_strategy(), w in "[xyz]{1,5}") {
        let corpus = Corpus::from_counts(c).unwrap();
        let (t, _) = bpe::train(&corpus, Budget::Merges(10), MarkerPolicy::none()).unwrap();
        let seg = t.apply(&w).unwrap();
        prop_assert_eq!(seg.len(), w.chars().count());
    }

    #[test]
    fn parallel_training_is_identical(c in corpus_strategy()) {
        let corpus = Corpus::from_counts(c).unwrap();
        let seq = bpe::train(&corpus, Budget::Merges(15), MarkerPolicy::default()).unwrap();
        let par = bpe::train_with(&corpus, Budget::Merges(15), MarkerPolicy::default(), TrainOptions { parallel: true }).unwrap();
        prop_assert_eq!(seq, par);
    }

    #[test]
    fn zipf_profile_invariants(c in corpus_strategy()) {
        let corpus = Corpus::from_counts(c).unwrap();
        let z = corpus::zipf_profile(&corpus).unwrap();
        let ranks = z.rank_frequency();
        prop_assert!(ranks.windows(2).all(|w| w[0].count >= w[1].count));
        prop_assert_eq!(ranks.iter().map(|e| e.count).sum::<u64>(), corpus.total_tokens());
        let total = corpus.total_tokens();
        for k in 0..=ranks.len() {
            let tail: u64 = ranks[k..].iter().map(|e| e.count).sum();
            prop_assert_eq!(z.head_tokens(k) + tail, total);
            if k > 0 {
                prop_assert!(z.head_mass(k) >= z.head_mass(k - 1));
            }
        }
        prop_assert_eq!(z.head_mass(ranks.len()), 1.0);
    }

    #[test]
    fn normalization_is_idempotent(text in "\\PC{0,40}", lower in any::<bool>(), strip in any::<bool>()) {
        let cfg = NormConfig { lowercase: lower, strip_punctuation: strip };
        for tok in text.split_whitespace() {
            let once = cfg.normalize(tok);
            prop_assert_eq!(cfg.normalize(&once), once.clone());
        }
        let a = Corpus::load(text.as_bytes(), &cfg).unwrap();
        let b = Corpus::load(text.as_bytes(), &cfg).unwrap();
        prop_assert_eq!(a.total_tokens(), a.word_types().map(|(_, c)| c).sum::<u64>());
        prop_assert_eq!(a, b);
    }

    #[test]
    fn ngram_distributions_normalize(
        seqs in prop::collection::vec(prop::collection::vec("[a-d]", 1..6), 1..8),
        n in 1usize..4,
        k in 0.01f64..3.0,
    ) {
        let lm = lmstats::train_ngram(&seqs, n, k).unwrap();
        prop_assert!(lm.max_normalization_error() < 1e-9);
        for s in &seqs {
            let lp = lm.sequence_log_prob(s).unwrap();
            prop_assert!(lp.is_finite() && lp <= 0.0);
        }
    }

    #[test]
    fn unigram_scores_are_additive(
        seqs in prop::collection::vec(prop::collection::vec("[a-d]", 1..6), 1..8),
        left in prop::collection::vec("[a-e]", 1..5),
        right in prop::collection::vec("[a-e]", 1..5),
    ) {
        let lm = lmstats::train_ngram(&seqs, 1, 1.0).unwrap();
        let end = lm.prob(&[], lmstats::END).unwrap().ln();
        let whole: Vec<String> = left.iter().chain(&right).cloned().collect();
        let sum = lm.sequence_log_prob(&left).unwrap() + lm.sequence_log_prob(&right).unwrap() - end;
        prop_assert!((lm.sequence_log_prob(&whole).unwrap() - sum).abs() < 1e-9);
    }

    #[test]
    fn char_level_oov_rate_is_zero(words in prop::collection::vec("[a-f]{1,6}", 1..10), eval in prop::collection::vec("[a-f]{1,6}", 1..10)) {
        let train = Corpus::from_text(&words.join(" "), &NormConfig::default()).unwrap();
        let alphabet: HashSet<String> = train.word_types().flat_map(|(w, _)| w.chars().map(String::from).collect::<Vec<_>>()).collect();
        let eval: Vec<String> = eval.into_iter().filter(|w| w.chars().all(|c| alphabet.contains(&c.to_string()))).collect();
        prop_assume!(!eval.is_empty());
        let eval = Corpus::from_text(&eval.join(" "), &NormConfig::default()).unwrap();
        let chars = lmstats::segment_corpus(&eval, &CharSegmenter::new(MarkerPolicy::none())).unwrap();
        prop_assert_eq!(lmstats::oov_rate(&alphabet, &chars).unwrap().token_rate(), 0.0);
    }

    #[test]
    fn budget_is_monotone(v in 1u64..100_000, d in 1u64..4096) {
        let b = lmstats::embedding_param_count(v, d).unwrap();
        prop_assert_eq!(b.param_count, v * d);
        prop_assert!(lmstats::embedding_param_count(v + 1, d).unwrap().param_count > b.param_count);
        prop_assert!(lmstats::embedding_param_count(v, d + 1).unwrap().param_count > b.param_count);
    }

    #[test]
    fn argmax_ignores_row_scaling(
        rows in prop::collection::vec(prop::collection::vec(0.0f64..1.0, 4), 1..6),
        scales in prop::collection::vec(0.001f64..1000.0, 6),
    ) {
        let rows: Vec<Vec<f64>> = rows.into_iter().map(|mut r| { r[0] += 1e-3; r }).collect();
        let src = ["a", "b", "c", "d"];
        let tgt: Vec<String> = (0..rows.len()).map(|i| format!("t{i}")).collect();
        let am = AttentionMatrix::from_segments(&src.map(String::from), &tgt, rows.clone()).unwrap();
        let scaled: Vec<Vec<f64>> = rows.iter().zip(&scales).map(|(r, s)| r.iter().map(|w| w * s).collect()).collect();
        let am2 = AttentionMatrix::from_segments(&src.map(String::from), &tgt, scaled).unwrap();
        prop_assert_eq!(align::hard_align(&am).unwrap(), align::hard_align(&am2).unwrap());
    }

    #[test]
    fn alignment_is_permutation_equivariant(
        rows in prop::collection::vec(prop::collection::vec(0.01f64..1.0, 4), 1..5),
        perm in Just(vec![0usize, 1, 2, 3]).prop_shuffle(),
    ) {
        let src: Vec<String> = ["a", "b", "c", "d"].map(String::from).to_vec();
        let tgt: Vec<String> = (0..rows.len()).map(|i| format!("t{i}")).collect();
        let am = AttentionMatrix::from_segments(&src, &tgt, rows.clone()).unwrap();
        // column j of the permuted matrix is column perm[j] of the original
        let psrc: Vec<String> = perm.iter().map(|&j| src[j].clone()).collect();
        let prows: Vec<Vec<f64>> = rows.iter().map(|r| perm.iter().map(|&j| r[j]).collect()).collect();
        let pam = AttentionMatrix::from_segments(&psrc, &tgt, prows).unwrap();
        let base = align::hard_align(&am).unwrap();
        let permuted = align::hard_align(&pam).unwrap();
        for (&(t, s), &(pt, ps)) in base.links.iter().zip(&permuted.links) {
            prop_assert_eq!(t, pt);
            // ties may resolve differently once columns move
            prop_assert_eq!(rows[t][perm[ps]], rows[t][s]);
        }
    }

    #[test]
    fn rendering_is_deterministic(rows in prop::collection::vec(prop::collection::vec(0.01f64..1.0, 3), 1..4)) {
        let src = ["per", "i", "odo"].map(String::from);
        let tgt: Vec<String> = (0..rows.len()).map(|i| format!("x{i}")).collect();
        let am = AttentionMatrix::from_segments(&src, &tgt, rows).unwrap();
        let al = align::hard_align(&am).unwrap();
        for f in [align::RenderFormat::Text, align::RenderFormat::Svg] {
            prop_assert_eq!(align::render(&am, &al, f).unwrap(), align::render(&am, &al, f).unwrap());
        }
    }

    #[test]
    fn mu_equations_hold(entries in prop::collection::btree_map("[ab]{1,4}", "[A-C]", 1..15), spaced in any::<bool>()) {
        let m = MeaningFunction::new(entries).unwrap();
        let concat = if spaced { Concat::spaced() } else { Concat::plain() };
        let mu = semlab::build_mu(&m, concat);
        let report = semlab::mu_check(&mu, &m);
        prop_assert!(report.all_pass(), "{}", report.to_tsv());
    }

    #[test]
    fn residue_lookup_matches_lexicon(words in prop::collection::btree_set("[abc]{1,6}", 1..12), residue in "[abc]{1,3}") {
        let lex = Lexicon::new(words.iter().map(|w| (w.clone(), w.to_uppercase()))).unwrap();
        let f = semlab::decompose(&lex, &residue, Side::Prefix).unwrap();
        for w in &words {
            if let Some(alpha) = w.strip_prefix(residue.as_str()).filter(|a| !a.is_empty()) {
                prop_assert_eq!(f.apply(alpha), lex.meaning(w));
            }
        }
        for (alpha, _) in f.domain() {
            let whole = residue.clone() + alpha;
            prop_assert!(lex.meaning(&whole).is_some());
        }
        prop_assert_eq!(f.apply("zzz"), None);
    }

    #[test]
    fn focus_sets_contain_the_word(words in prop::collection::btree_set("[abc]{2,6}", 1..12), pick in any::<prop::sample::Index>(), a in 0usize..6, b in 1usize..6) {
        let words: Vec<String> = words.into_iter().collect();
        let lex = Lexicon::new(words.iter().map(|w| (w.clone(), w.to_uppercase()))).unwrap();
        let w = pick.get(&words);
        let len = w.chars().count();
        let start = a % len;
        let end = (start + b).min(len);
        prop_assume!(!(start == 0 && end == len));
        let alts = semlab::focus_alternatives(&lex, w, start..end, FocusOptions::default()).unwrap();
        prop_assert!(alts.iter().any(|(x, _)| x == w));
        for (x, m) in &alts {
            prop_assert_eq!(lex.meaning(x), Some(m));
        }
    }

    #[test]
    fn coordination_preserves_length(parts in prop::collection::vec("[a-z]{1,5}", 1..6)) {
        let lex = Lexicon::new([("orthodontists", "O")]).unwrap();
        let out = semlab::coordinate_expand(&parts, "dontists", Side::Suffix, &lex, None).unwrap();
        prop_assert_eq!(out.len(), parts.len());
    }

    #[test]
    fn prosodic_gate_is_monotone(s in "[a-z]{1,12}", k in 2usize..6) {
        if semlab::prosodic_gate(&s, k) {
            prop_assert!(semlab::prosodic_gate(&s, k - 1));
        }
    }
}

#[test]
fn toy_bpe_oov_token_rate_is_zero() {
    let corpus = Corpus::from_counts([
        ("low", 5),
        ("lowest", 2),
        ("newer", 6),
        ("wider", 3),
        ("new", 2),
    ])
    .unwrap();
    let (t, _) = bpe::train(&corpus, Budget::Merges(8), MarkerPolicy::default()).unwrap();
    let vocab: HashSet<String> = t.vocab().map(str::to_owned).collect();
    let eval = Corpus::from_counts([("lower", 1)]).unwrap();
    let segmented = lmstats::segment_corpus(&eval, &t).unwrap();
    let rate = lmstats::oov_rate(&vocab, &segmented).unwrap();
    assert_eq!(rate.token_rate(), 0.0);
    let word_vocab: HashSet<&str> = corpus.word_types().map(|(w, _)| w).collect();
    assert_eq!(
        lmstats::oov_rate(&word_vocab, &eval).unwrap().type_rate(),
        1.0
    );
}
