//! The 26 capital letters and sets of them.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{McganError, Result};

pub const NUM_LETTERS: usize = 26;

/// Letter `A..=Z` for an index `0..26`.
pub fn letter(index: usize) -> char {
    assert!(index < NUM_LETTERS, "letter index {index} out of range");
    (b'A' + index as u8) as char
}

/// Index of an ASCII capital letter (case-insensitive).
pub fn letter_index(c: char) -> Option<usize> {
    let c = c.to_ascii_uppercase();
    c.is_ascii_uppercase().then(|| (c as u8 - b'A') as usize)
}

/// A subset of `{0..25}`, stored as a bitmask; iteration is in letter order.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LetterSet(u32);

impl LetterSet {
    pub const EMPTY: LetterSet = LetterSet(0);
    pub const ALL: LetterSet = LetterSet((1 << NUM_LETTERS) - 1);

    pub fn from_indices(indices: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut bits = 0u32;
        for i in indices {
            if i >= NUM_LETTERS {
                return Err(McganError::InvalidInput(format!(
                    "letter index {i} outside 0..{NUM_LETTERS}"
                )));
            }
            bits |= 1 << i;
        }
        Ok(LetterSet(bits))
    }

    /// Parses letters such as `"TOWER"`; repeated letters are ignored.
    pub fn from_word(word: &str) -> Result<Self> {
        let mut bits = 0u32;
        for c in word.chars() {
            let i = letter_index(c)
                .ok_or_else(|| McganError::InvalidInput(format!("`{c}` is not a letter A-Z")))?;
            bits |= 1 << i;
        }
        Ok(LetterSet(bits))
    }

    pub fn contains(self, i: usize) -> bool {
        i < NUM_LETTERS && self.0 & (1 << i) != 0
    }

    pub fn insert(&mut self, i: usize) {
        assert!(i < NUM_LETTERS);
        self.0 |= 1 << i;
    }

    pub fn without(self, i: usize) -> Self {
        LetterSet(self.0 & !(1 << i))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn complement(self) -> Self {
        LetterSet(!self.0 & Self::ALL.0)
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..NUM_LETTERS).filter(move |&i| self.contains(i))
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.iter().collect()
    }
}

impl fmt::Debug for LetterSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LetterSet({self})")
    }
}

impl fmt::Display for LetterSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in self.iter() {
            write!(f, "{}", letter(i))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tower_indices() {
        let s = LetterSet::from_word("TOWER").unwrap();
        assert_eq!(s.to_vec(), vec![4, 14, 17, 19, 22]);
        assert_eq!(s.to_string(), "EORTW");
        assert_eq!(s.complement().len(), 21);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(LetterSet::from_indices([26]).is_err());
        assert!(LetterSet::from_word("T1").is_err());
        assert_eq!(letter_index('q'), Some(16));
    }
}
