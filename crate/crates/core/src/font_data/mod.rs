//! Glyph images, 26-letter stacks, synthetic ornamentation and dataset I/O.

mod dataset;
mod glyph;
mod gradient;
mod manifest;
mod stack;
pub mod store;
mod synthetic;

pub use dataset::{generate_color_dataset, generate_synthetic_fonts, import_font_dirs, sample_distinct};
pub use glyph::{normalize_glyph, resize, GlyphImage, RawImage, GLYPH_PIXELS, GLYPH_SIZE};
pub use gradient::{apply_gradient, luminance, GradientSpec, Rgb, BACKGROUND};
pub use manifest::{DatasetManifest, ManifestEntry, Split};
pub use stack::{from_network, mask_stack, to_network, ColorGlyphSet, ColorImage, GlyphStack, SHAPE_THRESHOLD};
pub use synthetic::{FontStyle, SyntheticFont};
