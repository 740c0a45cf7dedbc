//! Random-edit text augmentation (REDA) and its n-gram-guided variant.
//!
//! Five edit operations (synonym replacement, random swap, random insertion,
//! random deletion, random mix) generate a pool of candidate texts. The REDA
//! program picks from the pool at random; the n-gram program picks the
//! candidates a word 4-gram language model scores highest. The [`eval`]
//! module measures how well each program restores perturbed text.

pub mod augment;
pub mod edit_ops;
pub mod error;
pub mod eval;
pub mod lexicon;
pub mod ngram;
pub mod record;
pub mod synthetic;
pub mod tokenizer;

pub use augment::{
    augment_dataset, augment_pair, augment_text, build_pool, num_edits, select, AugmentConfig, CandidatePool, Mode,
    PairAugmentation, Program, Selection, TextAugmentation,
};
pub use edit_ops::{EditKind, EditOp};
pub use error::{Error, Result};
pub use lexicon::{gen_pseudo_dict, load_synonyms, SynonymDict};
pub use ngram::{NGramModel, ScoredText, TrainOptions};
pub use record::TextPairRecord;
pub use tokenizer::{detokenize, tokenize, Joiner, Lexicon, Sentence, TextCodec, TokenizeMode};

pub use rand_chacha::ChaCha8Rng;

/// Independent RNG stream `stream` of `seed`. Used wherever work is split
/// per record or per trial so results do not depend on scheduling.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
