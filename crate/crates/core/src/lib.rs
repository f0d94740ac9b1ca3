//! Links scholarly publications to the survey variables of their research
//! datasets: detects variable-defining sentences, matches them to candidate
//! variables, summarizes documents and serves everything through a search
//! index and REST service.

pub mod config;
pub mod corpus;
pub mod eval;
pub mod hash;
pub mod mock_backend;
pub mod pipeline;
pub mod searchidx;
pub mod service;
pub mod summarize;
pub mod svident;
pub mod textproc;

pub use corpus::{CorpusBundle, Publication, ResearchDataset, SurveyVariable};
pub use textproc::{Language, LanguageTag, Lexicon};
