//! Renders a few procedural fonts, stores them as glyph-stack PNGs with a
//! manifest, and writes a contact sheet.
//!
//! cargo run --example synthetic_fonts -- [out_dir]

use std::path::PathBuf;

use mcgan::font_data::store::{read_stack_png, write_contact_sheet};
use mcgan::font_data::{generate_synthetic_fonts, ColorGlyphSet, ColorImage, Split};

fn main() -> mcgan::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "out/synthetic_fonts".into()));
    let manifest = generate_synthetic_fonts(&out, 6, 42, Some(Split::Train))?;
    println!("{} fonts, manifest at {}", manifest.len(), out.join("manifest.tsv").display());

    let mut rows = Vec::new();
    for entry in &manifest.entries {
        let stack = read_stack_png(&manifest.resolve(entry))?;
        rows.push(ColorGlyphSet::new(stack.channels().iter().map(ColorImage::from_gray).collect())?);
    }
    let refs: Vec<&ColorGlyphSet> = rows.iter().collect();
    write_contact_sheet(&out.join("sheet.png"), &refs, 26)?;
    println!("sheet at {}", out.join("sheet.png").display());
    Ok(())
}
