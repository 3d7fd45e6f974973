//! Flat indexing of joint parent configurations.
//!
//! Configurations are encoded mixed-radix with the first listed parent as
//! the most significant digit, so for parents with cardinalities `(2, 3)` the
//! configurations `(0,0), (0,1), (0,2), (1,0), ...` map to `0, 1, 2, 3, ...`.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParentConfigCodec {
    cards: Vec<usize>,
    strides: Vec<usize>,
    size: usize,
}

impl ParentConfigCodec {
    pub fn new(cards: Vec<usize>) -> Self {
        let mut strides = vec![1; cards.len()];
        let mut size = 1usize;
        for (stride, &card) in strides.iter_mut().zip(cards.iter()).rev() {
            *stride = size;
            size *= card;
        }
        ParentConfigCodec {
            cards,
            strides,
            size,
        }
    }

    /// Number of joint configurations (1 for an empty parent list).
    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    pub fn cardinalities(&self) -> &[usize] {
        &self.cards
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    /// Encodes a parent-state tuple. Values are not range-checked; see [`Self::try_encode`].
    pub fn encode(&self, states: &[usize]) -> usize {
        debug_assert_eq!(states.len(), self.cards.len());
        self.encode_iter(states.iter().copied())
    }

    pub fn encode_iter(&self, states: impl IntoIterator<Item = usize>) -> usize {
        states
            .into_iter()
            .zip(self.strides.iter())
            .map(|(s, &stride)| s * stride)
            .sum()
    }

    pub fn try_encode(&self, states: &[usize]) -> Result<usize> {
        if states.len() != self.cards.len() {
            return Err(Error::DimensionMismatch {
                expected: self.cards.len(),
                actual: states.len(),
            });
        }
        for (pos, (&s, &card)) in states.iter().zip(self.cards.iter()).enumerate() {
            if s >= card {
                return Err(Error::StateOutOfRange {
                    node: format!("parent #{pos}"),
                    state: s,
                    cardinality: card,
                });
            }
        }
        Ok(self.encode(states))
    }

    pub fn decode(&self, index: usize) -> Vec<usize> {
        let mut out = vec![0; self.cards.len()];
        self.decode_into(index, &mut out);
        out
    }

    pub fn decode_into(&self, mut index: usize, out: &mut [usize]) {
        debug_assert!(index < self.size);
        for (slot, &stride) in out.iter_mut().zip(self.strides.iter()) {
            *slot = index / stride;
            index %= stride;
        }
    }
}
