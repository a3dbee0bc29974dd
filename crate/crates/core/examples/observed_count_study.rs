//! How much do more observed letters help? Runs the observed-count and
//! letter-correlation studies with a briefly pretrained GlyphNet.
//!
//! cargo run --release --example observed_count_study -- [out_dir]

use std::path::PathBuf;

use mcgan::analysis::{correlation_study, observed_count_study, write_correlation_study, write_count_study, SsimConfig};
use mcgan::font_data::SyntheticFont;
use mcgan::gan::StackGanConfig;
use mcgan::glyph_net::new_glyphnet;
use mcgan::letter;

fn main() -> mcgan::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "out/observed_count_study".into()));
    let train: Vec<_> = (0..5)
        .map(|s| SyntheticFont::from_seed(s).render().map(|f| f.to_tensor()))
        .collect::<mcgan::Result<_>>()?;
    let mut g1 = new_glyphnet(StackGanConfig::reduced())?;
    for _ in 0..150 {
        g1.step(&train)?;
    }

    let fonts: Vec<_> = (100..130).map(|s| SyntheticFont::from_seed(s).render()).collect::<mcgan::Result<_>>()?;
    let ssim = SsimConfig::default();
    let study = observed_count_study(&g1.g_spec, &g1.g, &fonts, 1..=8, 0, &ssim)?;
    for (n, m) in study.medians() {
        println!("n = {n}  median SSIM {m:.4}");
    }
    write_count_study(&out.join("count"), &study)?;

    let table = correlation_study(&g1.g_spec, &g1.g, &fonts, 0, &ssim)?;
    let (best, worst) = table.extremes(4);
    let names = |r: &[(usize, f64)]| r.iter().map(|b| letter(b.0)).collect::<String>();
    println!("E is best predicted from {} and worst from {}", names(&best), names(&worst));
    write_correlation_study(&out.join("correlation"), &table)?;
    Ok(())
}
