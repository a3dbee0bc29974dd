//! Few-shot synthesis: pretrain GlyphNet briefly, fine-tune on five
//! colored letters of an unseen font, and write all 26.
//!
//! cargo run --release --example synthesize_tower -- [out_dir] [g1_checkpoint]

use std::path::PathBuf;

use mcgan::cli::mean_abs_error;
use mcgan::font_data::{apply_gradient, ColorGlyphSet, GradientSpec, SyntheticFont};
use mcgan::gan::{LossLog, StackGan, StackGanConfig};
use mcgan::glyph_net::new_glyphnet;
use mcgan::mcgan_stack::{write_synthesis, FineTuneState, TrainConfig};
use mcgan::LetterSet;
use rand::SeedableRng;

fn main() -> mcgan::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = PathBuf::from(args.next().unwrap_or_else(|| "out/synthesize_tower".into()));
    let g1 = match args.next() {
        Some(path) => StackGan::load(&PathBuf::from(path))?,
        None => {
            let corpus: Vec<_> = (0..5)
                .map(|s| SyntheticFont::from_seed(s).render().map(|f| f.to_tensor()))
                .collect::<mcgan::Result<_>>()?;
            let mut g1 = new_glyphnet(StackGanConfig::reduced())?;
            for _ in 0..200 {
                g1.step(&corpus)?;
            }
            g1
        }
    };

    let stack = SyntheticFont::from_seed(0).render()?;
    let paint = GradientSpec::random(&mut rand_chacha::ChaCha8Rng::seed_from_u64(3));
    let truth = ColorGlyphSet::new(stack.channels().iter().map(|g| apply_gradient(g, &paint)).collect::<mcgan::Result<_>>()?)?;
    let tower = LetterSet::from_word("TOWER")?;
    let observed = truth.restrict(tower)?;

    let config = TrainConfig {
        epochs: 60,
        ..TrainConfig::reduced()
    };
    let mut state = FineTuneState::new(&observed, &g1.g_spec, &g1.g, config, None)?;
    let mut log = LossLog::new();
    state.run(&mut log)?;
    let result = state.synthesize()?;
    write_synthesis(&out, &result)?;
    log.save(&out.join("loss.tsv"))?;
    println!("observed MAE {:.4}", mean_abs_error(&result, &truth, tower));
    println!("held-out MAE {:.4}", mean_abs_error(&result, &truth, tower.complement()));
    println!("glyphs in {}", out.display());
    Ok(())
}
