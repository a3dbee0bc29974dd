//! Paints one font with several random gradients and outlines.

use mcgan::font_data::store::write_contact_sheet;
use mcgan::font_data::{apply_gradient, ColorGlyphSet, GradientSpec, SyntheticFont};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> mcgan::Result<()> {
    let stack = SyntheticFont::from_seed(7).render()?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut sets = Vec::new();
    for _ in 0..4 {
        let spec = GradientSpec::random(&mut rng);
        println!("{spec:?}");
        let images = stack.channels().iter().map(|g| apply_gradient(g, &spec)).collect::<mcgan::Result<_>>()?;
        sets.push(ColorGlyphSet::new(images)?);
    }
    let path = std::env::temp_dir().join("gradient_ornaments.png");
    write_contact_sheet(&path, &sets.iter().collect::<Vec<_>>(), 26)?;
    println!("wrote {}", path.display());
    Ok(())
}
