//! Trains the single-network 78-channel baseline for a few steps and lays
//! its prediction beside the observed letters.

use mcgan::baseline_translation::{new_baseline, predict_baseline, write_comparison_sheet};
use mcgan::font_data::{apply_gradient, ColorGlyphSet, GradientSpec, SyntheticFont};
use mcgan::gan::StackGanConfig;
use mcgan::LetterSet;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> mcgan::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut sets = Vec::new();
    for seed in 0..4 {
        let stack = SyntheticFont::from_seed(seed).render()?;
        let paint = GradientSpec::random(&mut rng);
        let images = stack.channels().iter().map(|g| apply_gradient(g, &paint)).collect::<mcgan::Result<_>>()?;
        sets.push(ColorGlyphSet::new(images)?);
    }
    let corpus: Vec<_> = sets.iter().map(ColorGlyphSet::to_stack_tensor).collect();
    let mut baseline = new_baseline(StackGanConfig::reduced())?;
    for i in 0..60 {
        let r = baseline.step(&corpus)?;
        if i % 20 == 0 {
            println!("step {i:>2}  l1 {:.4}", r.l1);
        }
    }
    let observed = sets[0].restrict(LetterSet::from_word("TOWER")?)?;
    let pred = predict_baseline(&baseline.g_spec, &baseline.g, &observed)?;
    let path = std::env::temp_dir().join("baseline_comparison.png");
    // Without an MC-GAN result at hand, the baseline fills that row too.
    write_comparison_sheet(&path, &observed, &pred, &pred, Some(&sets[0]))?;
    println!("wrote {}", path.display());
    Ok(())
}
