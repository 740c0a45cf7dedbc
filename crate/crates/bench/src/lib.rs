//! Shared inputs for the criterion benchmarks.

use reda_core::synthetic::collocation_corpus;
use reda_core::{rng_for, NGramModel, Sentence, SynonymDict, TrainOptions};

pub struct Fixture {
    pub corpus: Vec<Sentence>,
    pub model: NGramModel,
    pub dict: SynonymDict,
}

/// Synthetic corpus, its model, and a pseudo dictionary over its vocabulary.
pub fn fixture(lines: usize) -> Fixture {
    let corpus = collocation_corpus(lines, &mut rng_for(7, 0));
    let model = reda_core::ngram::train_sentences(&corpus, &TrainOptions::default()).expect("non-empty corpus");
    let vocab = model.unigram_ranking().len();
    let dict = reda_core::gen_pseudo_dict(&model, 1, vocab, vocab - 1, &mut rng_for(7, 1)).expect("vocabulary fits");
    Fixture { corpus, model, dict }
}
