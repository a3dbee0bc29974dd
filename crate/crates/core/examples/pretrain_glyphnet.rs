//! Pretrains a small GlyphNet with checkpoints, then resumes the same run
//! to a later step.
//!
//! cargo run --release --example pretrain_glyphnet -- [out_dir]

use std::path::PathBuf;

use mcgan::font_data::SyntheticFont;
use mcgan::gan::runner::{run_training, RunOptions};
use mcgan::gan::StackGanConfig;
use mcgan::glyph_net::new_glyphnet;

fn main() -> mcgan::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "out/pretrain_glyphnet".into()));
    let corpus: Vec<_> = (0..5)
        .map(|s| SyntheticFont::from_seed(s).render().map(|f| f.to_tensor()))
        .collect::<mcgan::Result<_>>()?;
    let config = StackGanConfig::reduced();
    let opts = |steps| RunOptions {
        steps,
        checkpoint_every: 20,
        out_dir: Some(out.clone()),
        prefix: "glyphnet".into(),
    };

    let first = run_training(new_glyphnet(config.clone())?, &corpus, &opts(40))?;
    println!("stopped at {}", first.trainer.iteration);
    // The fresh trainer is replaced by the checkpoint at step 40.
    let resumed = run_training(new_glyphnet(config)?, &corpus, &opts(80))?;
    for (step, l1) in resumed.log.series("l1").iter().step_by(10) {
        println!("step {step:>3}  l1 {l1:.4}");
    }
    println!("checkpoints: {:?}", resumed.checkpoints);
    Ok(())
}
