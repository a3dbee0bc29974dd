//! Checks that test fonts do not duplicate any training font.

use mcgan::analysis::nearest_neighbor;
use mcgan::font_data::SyntheticFont;

fn main() -> mcgan::Result<()> {
    let train: Vec<_> = (0..20)
        .map(|s| SyntheticFont::from_seed(s).render().map(|f| (format!("train{s:02}"), f)))
        .collect::<mcgan::Result<_>>()?;
    for s in [3, 500, 501] {
        let query = SyntheticFont::from_seed(s).render()?;
        let (id, d) = nearest_neighbor(&query, &train)?;
        let verdict = if d == 0.0 { "duplicate" } else { "distinct" };
        println!("font {s:>3}: nearest {id} at {d:.4} ({verdict})");
    }
    Ok(())
}
