//! Quantitative studies of a pretrained GlyphNet: SSIM, which observed
//! letters best predict which others, how quality scales with the number of
//! observed letters, and a train/test leakage check.

pub mod neighbors;
pub mod plot;
pub mod ssim;
pub mod studies;

use std::fmt::Write as _;
use std::path::Path;

pub use neighbors::{nearest_neighbor, nearest_neighbor_check, stack_distance};
pub use plot::box_plot;
pub use ssim::{ssim, ssim_pixels, SsimConfig};
pub use studies::{correlation_study, median, observed_count_study, quantile, CorrelationTable, CountStudy};

use crate::error::{McganError, Result};
use crate::letters::{letter, NUM_LETTERS};

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(McganError::io(path))
}

fn scores_text(scores: &[f64]) -> String {
    scores.iter().map(|s| format!("{s:?}\n")).collect()
}

fn save_png(path: &Path, img: &image::RgbImage) -> Result<()> {
    img.save(path).map_err(|e| McganError::Image {
        path: path.to_path_buf(),
        msg: e.to_string(),
    })
}

fn summary_row(label: &str, s: &[f64]) -> String {
    let q = |p| quantile(s, p).map_or("nan".to_string(), |v| format!("{v:.6}"));
    format!("{label}\t{}\t{}\t{}\t{}\n", s.len(), q(0.25), q(0.5), q(0.75))
}

/// Writes `scores/n{n}.txt` (raw lists), `medians.tsv` and `count.png`.
pub fn write_count_study(dir: &Path, study: &CountStudy) -> Result<()> {
    let scores_dir = dir.join("scores");
    std::fs::create_dir_all(&scores_dir).map_err(McganError::io(&scores_dir))?;
    let mut table = String::from("n\tcount\tq1\tmedian\tq3\n");
    for (n, s) in &study.per_n {
        write(&scores_dir.join(format!("n{n}.txt")), &scores_text(s))?;
        table.push_str(&summary_row(&n.to_string(), s));
    }
    write(&dir.join("medians.tsv"), &table)?;
    let series: Vec<Vec<f64>> = study.per_n.iter().map(|e| e.1.clone()).collect();
    save_png(&dir.join("count.png"), &box_plot(&series))
}

/// Writes `scores/{α}_given_{β}.txt` and `scores/{α}_given_any.txt`,
/// `informative.tsv` with the two best and two worst observed letters per
/// generated letter, and `given_any.png`.
pub fn write_correlation_study(dir: &Path, table: &CorrelationTable) -> Result<()> {
    let scores_dir = dir.join("scores");
    std::fs::create_dir_all(&scores_dir).map_err(McganError::io(&scores_dir))?;
    let mut summary = String::from("letter\tcount\tq1\tmedian\tq3\n");
    let mut informative = String::from("letter\tbest\tsecond\tsecond_worst\tworst\n");
    let mut series = Vec::with_capacity(NUM_LETTERS);
    for a in 0..NUM_LETTERS {
        let la = letter(a);
        for b in (0..NUM_LETTERS).filter(|&b| b != a) {
            let s = table.given(a, b);
            if !s.is_empty() {
                write(&scores_dir.join(format!("{la}_given_{}.txt", letter(b))), &scores_text(s))?;
            }
        }
        let any = table.given_any(a);
        write(&scores_dir.join(format!("{la}_given_any.txt")), &scores_text(&any))?;
        summary.push_str(&summary_row(&la.to_string(), &any));
        let (best, worst) = table.extremes(a);
        let cell = |e: Option<&(usize, f64)>| e.map_or("-".to_string(), |(b, m)| format!("{}:{m:.4}", letter(*b)));
        let _ = writeln!(
            informative,
            "{la}\t{}\t{}\t{}\t{}",
            cell(best.first()),
            cell(best.get(1)),
            cell(worst.get(1)),
            cell(worst.first())
        );
        series.push(any);
    }
    write(&dir.join("given_any.tsv"), &summary)?;
    write(&dir.join("informative.tsv"), &informative)?;
    save_png(&dir.join("given_any.png"), &box_plot(&series))
}
