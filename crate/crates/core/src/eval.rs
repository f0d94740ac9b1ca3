//! Precision / recall against gold links.
//!
//! Sentence level compares the set of sentences classified as variable
//! sentences with the set of sentences that carry at least one gold link.
//! Link level counts a predicted `(publication, sentence, variable)` triple
//! as a true positive only on an exact match.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::config::ServiceConfig;
use crate::corpus::{CorpusBundle, GoldLink};
use crate::pipeline::{fit_models, identify_all, PipelineError};
use crate::textproc::Lexicon;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Counts {
    pub fn of<T: Ord>(predicted: &BTreeSet<T>, gold: &BTreeSet<T>) -> Self {
        let tp = predicted.intersection(gold).count();
        Self { tp, fp: predicted.len() - tp, fn_: gold.len() - tp }
    }

    /// 0 when nothing was predicted.
    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    /// 0 when there is nothing to find.
    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn f1(&self) -> f64 {
        f1(self.precision(), self.recall())
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

pub fn f1(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelCounts {
    pub sentence: Counts,
    pub link: Counts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub link_precision: f64,
    pub link_recall: f64,
    pub link_f1: f64,
    pub counts: LevelCounts,
}

pub type SentenceKey = (String, usize);
pub type LinkKey = (String, usize, String);

pub fn score(
    predicted_sentences: &BTreeSet<SentenceKey>,
    predicted_links: &BTreeSet<LinkKey>,
    gold: &[GoldLink],
) -> EvalResult {
    let gold_links: BTreeSet<LinkKey> = gold
        .iter()
        .map(|g| (g.publication_id.clone(), g.sentence_index, g.variable_id.clone()))
        .collect();
    let gold_sentences: BTreeSet<SentenceKey> = gold_links.iter().map(|(p, s, _)| (p.clone(), *s)).collect();
    let sentence = Counts::of(predicted_sentences, &gold_sentences);
    let link = Counts::of(predicted_links, &gold_links);
    EvalResult {
        precision: sentence.precision(),
        recall: sentence.recall(),
        f1: sentence.f1(),
        link_precision: link.precision(),
        link_recall: link.recall(),
        link_f1: link.f1(),
        counts: LevelCounts { sentence, link },
    }
}

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("corpus has no gold links file")]
    MissingGold,
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
}

/// Runs identification over the bundle and scores it against its gold links.
pub fn evaluate_bundle(bundle: &CorpusBundle, config: &ServiceConfig, lexicon: std::sync::Arc<Lexicon>) -> Result<EvalResult, EvalError> {
    let gold = bundle.gold_links.as_ref().ok_or(EvalError::MissingGold)?;
    let validation = crate::corpus::validate_links(bundle);
    if !validation.ok {
        return Err(PipelineError::ValidationFailed(validation).into());
    }
    config.sv.validate().map_err(PipelineError::from)?;
    let models = fit_models(bundle, lexicon)?;
    let mut sentences = BTreeSet::new();
    let mut links = BTreeSet::new();
    for (pid, ident) in identify_all(bundle, &models, config) {
        for c in ident.classifications.iter().filter(|c| c.is_variable_sentence) {
            sentences.insert((pid.clone(), c.sentence_index));
        }
        for l in ident.links {
            links.insert((pid.clone(), l.sentence_index, l.variable_id));
        }
    }
    Ok(score(&sentences, &links, gold))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gold(items: &[(&str, usize, &str)]) -> Vec<GoldLink> {
        items
            .iter()
            .map(|(p, s, v)| GoldLink { publication_id: p.to_string(), sentence_index: *s, variable_id: v.to_string() })
            .collect()
    }

    fn keys(g: &[GoldLink]) -> (BTreeSet<SentenceKey>, BTreeSet<LinkKey>) {
        let links: BTreeSet<LinkKey> = g.iter().map(|g| (g.publication_id.clone(), g.sentence_index, g.variable_id.clone())).collect();
        (links.iter().map(|(p, s, _)| (p.clone(), *s)).collect(), links)
    }

    #[test]
    fn perfect_predictions() {
        let g = gold(&[("p1", 0, "v1"), ("p1", 2, "v2"), ("p2", 1, "v1")]);
        let (s, l) = keys(&g);
        let r = score(&s, &l, &g);
        assert_eq!((r.precision, r.recall, r.f1), (1.0, 1.0, 1.0));
        assert_eq!((r.link_precision, r.link_recall, r.link_f1), (1.0, 1.0, 1.0));
    }

    #[test]
    fn empty_predictions() {
        let g = gold(&[("p1", 0, "v1")]);
        let r = score(&BTreeSet::new(), &BTreeSet::new(), &g);
        assert_eq!((r.precision, r.recall, r.f1), (0.0, 0.0, 0.0));
        assert_eq!((r.link_precision, r.link_recall, r.link_f1), (0.0, 0.0, 0.0));
        assert_eq!(r.counts.link, Counts { tp: 0, fp: 0, fn_: 1 });
    }

    #[test]
    fn exact_triple_match_only() {
        let g = gold(&[("p1", 0, "v1")]);
        let links = BTreeSet::from([("p1".to_string(), 0, "v2".to_string()), ("p1".to_string(), 0, "v1".to_string())]);
        let sentences = BTreeSet::from([("p1".to_string(), 0)]);
        let r = score(&sentences, &links, &g);
        assert_eq!(r.counts.link, Counts { tp: 1, fp: 1, fn_: 0 });
        assert_eq!(r.link_precision, 0.5);
        assert_eq!(r.precision, 1.0);
    }

    #[test]
    fn counts_serialize_with_fn_key() {
        let v = serde_json::to_value(Counts { tp: 1, fp: 2, fn_: 3 }).unwrap();
        assert_eq!(v, serde_json::json!({"tp":1,"fp":2,"fn":3}));
    }

    proptest! {
        #[test]
        fn rates_agree_with_counts(
            pred in proptest::collection::btree_set(0usize..30, 0..20),
            gold in proptest::collection::btree_set(0usize..30, 0..20),
        ) {
            let c = Counts::of(&pred, &gold);
            let p = c.precision();
            let r = c.recall();
            prop_assert!((0.0..=1.0).contains(&p) && (0.0..=1.0).contains(&r));
            if c.tp + c.fp > 0 {
                prop_assert!((p * (c.tp + c.fp) as f64 - c.tp as f64).abs() < 1e-9);
            }
            if c.tp + c.fn_ > 0 {
                prop_assert!((r * (c.tp + c.fn_) as f64 - c.tp as f64).abs() < 1e-9);
            }
            let f = c.f1();
            if p + r == 0.0 {
                prop_assert_eq!(f, 0.0);
            } else {
                prop_assert!((f - 2.0 * p * r / (p + r)).abs() < 1e-12);
            }
        }
    }
}
