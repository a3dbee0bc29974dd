pub mod analysis;
pub mod baseline_translation;
pub mod cli;
pub mod config;
pub mod error;
pub mod font_data;
pub mod gan;
pub mod glyph_net;
pub mod letters;
pub mod mcgan_stack;
pub mod orna_net;

pub use error::{McganError, Result};
pub use letters::{letter, letter_index, LetterSet, NUM_LETTERS};
