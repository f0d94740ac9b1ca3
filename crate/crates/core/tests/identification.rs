mod support;

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use svlink_core::eval::evaluate_bundle;
use svlink_core::pipeline::fit_models;
use svlink_core::svident::{match_variables, SvConfig};
use svlink_core::Lexicon;
use support::*;

#[test]
fn planted_links_are_recovered_at_rank_one() {
    let bundle = load_fixture();
    let gold = bundle.gold_links.clone().unwrap();
    assert_eq!(gold.len(), 18);
    let models = fit_models(&bundle, Lexicon::builtin_shared()).unwrap();
    let cfg = SvConfig::default();
    for g in &gold {
        let p = &bundle.publications[&g.publication_id];
        let s = &p.sentences[g.sentence_index];
        assert_eq!(s.text, bundle.variables[&g.variable_id].question_text);
        let m = match_variables(&s.text, p.language, &models.bank, &p.dataset_ids, &cfg);
        assert_eq!(m[0].variable_id, g.variable_id);
    }
    let r = evaluate_bundle(&bundle, &fixture_config(1), Lexicon::builtin_shared()).unwrap();
    assert!(r.link_recall >= 0.9, "{r:?}");
    assert!(r.link_precision >= 0.8, "{r:?}");
}

#[test]
fn distractors_are_positive_but_unlinked() {
    let bundle = load_fixture();
    let r = evaluate_bundle(&bundle, &fixture_config(1), Lexicon::builtin_shared()).unwrap();
    assert_eq!(r.counts.sentence.fp, 4);
    assert_eq!(r.counts.link.fp, 0);
}

#[test]
fn threshold_sweeps_are_monotone() {
    let bundle = load_fixture();
    for knob in 0..3 {
        let mut last = (usize::MAX, usize::MAX);
        for step in 0..=10 {
            let t = step as f64 / 10.0;
            let mut sv = SvConfig::default();
            match knob {
                0 => sv.tau_classifier = t,
                1 => sv.tau_retrieval = t,
                _ => sv.min_match_sim = t,
            }
            let counts = identification_counts(&bundle, sv);
            assert!(counts.0 <= last.0 && counts.1 <= last.1, "knob {knob} step {step}: {counts:?} after {last:?}");
            last = counts;
        }
    }
}

#[test]
fn links_respect_dataset_relation() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let bundle = random_bundle(&mut rng);
        assert!(foreign_links(&bundle, &SvConfig::default()).is_empty());
        assert!(foreign_links(&bundle, &permissive_sv()).is_empty());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn lower_thresholds_never_lose_links(seed in any::<u64>(), a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let bundle = random_bundle(&mut ChaCha8Rng::seed_from_u64(seed));
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let loose = SvConfig { tau_classifier: lo, tau_retrieval: lo, min_match_sim: lo, ..SvConfig::default() };
        let strict = SvConfig { tau_classifier: hi, tau_retrieval: hi, min_match_sim: hi, ..SvConfig::default() };
        let l = identification_counts(&bundle, loose);
        let s = identification_counts(&bundle, strict);
        prop_assert!(s.0 <= l.0 && s.1 <= l.1);
    }

    #[test]
    fn random_bundles_never_link_foreign_datasets(seed in any::<u64>()) {
        let bundle = random_bundle(&mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(foreign_links(&bundle, &permissive_sv()), Vec::<String>::new());
    }
}

#[test]
fn gold_sentences_are_unique() {
    let bundle = load_fixture();
    let gold = bundle.gold_links.unwrap();
    let keys: BTreeSet<_> = gold.iter().map(|g| (&g.publication_id, g.sentence_index)).collect();
    assert_eq!(keys.len(), gold.len());
}
