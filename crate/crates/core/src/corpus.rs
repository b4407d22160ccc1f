use std::collections::HashSet;

use crate::error::{Error, Result};

/// One utterance of vector-quantised codes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Utterance {
    pub id: String,
    pub codes: Vec<usize>,
}

impl Utterance {
    pub fn new(id: impl Into<String>, codes: Vec<usize>) -> Self {
        Utterance { id: id.into(), codes }
    }
}

/// Validated collection of utterances over a fixed code vocabulary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    utterances: Vec<Utterance>,
    vocab_size: usize,
}

impl Corpus {
    pub fn new(utterances: Vec<Utterance>, vocab_size: usize) -> Result<Self> {
        if utterances.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let mut seen = HashSet::with_capacity(utterances.len());
        for utt in &utterances {
            if !seen.insert(utt.id.as_str()) {
                return Err(Error::DuplicateUtterance(utt.id.clone()));
            }
            if utt.codes.is_empty() {
                return Err(Error::EmptyUtterance(utt.id.clone()));
            }
            if let Some(&code) = utt.codes.iter().find(|&&c| c >= vocab_size) {
                return Err(Error::CodeOutOfRange {
                    utterance: utt.id.clone(),
                    code,
                    vocab_size,
                });
            }
        }
        Ok(Corpus {
            utterances,
            vocab_size,
        })
    }

    pub fn utterances(&self) -> &[Utterance] {
        &self.utterances
    }

    pub fn len(&self) -> usize {
        self.utterances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.utterances.is_empty()
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn total_frames(&self) -> usize {
        self.utterances.iter().map(|u| u.codes.len()).sum()
    }

    pub fn get(&self, id: &str) -> Option<&Utterance> {
        self.utterances.iter().find(|u| u.id == id)
    }
}
