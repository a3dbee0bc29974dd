//! Pretraining: observation sampling, resumable runs and loss descent.

mod common;

use common::*;
use mcgan::baseline_translation::new_baseline;
use mcgan::font_data::SyntheticFont;
use mcgan::gan::runner::{run_training, RunOptions};
use mcgan::gan::{ObservedCounts, StackGan, StackGanConfig};
use mcgan::glyph_net::new_glyphnet;
use mcgan::NUM_LETTERS;
use mcgan_nn::Tensor;

/// Frequencies are checked within this many binomial standard deviations.
const SIGMAS: f64 = 3.0;

fn within(count: usize, trials: usize, p: f64) -> bool {
    let mean = trials as f64 * p;
    let sd = (trials as f64 * p * (1.0 - p)).sqrt();
    (count as f64 - mean).abs() <= SIGMAS * sd
}

#[test]
fn observation_sets_are_uniform_in_size_and_letter() {
    let counts = ObservedCounts::default();
    let trials = 20_000;
    let mut r = rng(5);
    let mut by_size = [0usize; NUM_LETTERS + 1];
    let mut by_letter = [0usize; NUM_LETTERS];
    for _ in 0..trials {
        let s = counts.sample_set(&mut r);
        by_size[s.len()] += 1;
        for l in s.iter() {
            by_letter[l] += 1;
        }
    }
    let probs = counts.probabilities();
    for (n, &c) in by_size.iter().enumerate() {
        if probs[n] == 0.0 {
            assert_eq!(c, 0, "size {n}");
        } else {
            assert!(within(c, trials, probs[n]), "size {n}: {c}");
        }
    }
    // A letter is in a set of size n with probability n/26.
    let mean_size: f64 = probs.iter().enumerate().map(|(n, p)| n as f64 * p).sum();
    for (l, &c) in by_letter.iter().enumerate() {
        assert!(within(c, trials, mean_size / NUM_LETTERS as f64), "letter {l}: {c}");
    }
}

fn tiny_config() -> StackGanConfig {
    StackGanConfig {
        generator: mcgan::gan::GeneratorArch {
            width: 4,
            ..mcgan::gan::GeneratorArch::reduced()
        },
        discriminator: mcgan::gan::DiscriminatorArch {
            widths: [4, 4],
            ..mcgan::gan::DiscriminatorArch::reduced()
        },
        batch_size: 2,
        seed: 11,
        ..StackGanConfig::reduced()
    }
}

fn glyph_corpus(n: u64) -> Vec<Tensor> {
    (0..n).map(|s| SyntheticFont::from_seed(s).render().unwrap().to_tensor()).collect()
}

fn assert_same(a: &StackGan, b: &StackGan) {
    assert_eq!(a.iteration, b.iteration);
    assert_eq!(a.g.max_abs_diff(&b.g), 0.0);
    assert_eq!(a.d.max_abs_diff(&b.d), 0.0);
}

#[test]
fn saving_and_resuming_reproduces_an_uninterrupted_run() {
    let corpus = glyph_corpus(3);
    let dir = tempfile::tempdir().unwrap();

    let mut straight = new_glyphnet(tiny_config()).unwrap();
    let reports: Vec<_> = (0..4).map(|_| straight.step(&corpus).unwrap()).collect();

    let mut first = new_glyphnet(tiny_config()).unwrap();
    for _ in 0..2 {
        first.step(&corpus).unwrap();
    }
    let path = dir.path().join("half.ckpt");
    first.save(&path).unwrap();
    let mut resumed = StackGan::load(&path).unwrap();
    let tail: Vec<_> = (0..2).map(|_| resumed.step(&corpus).unwrap()).collect();
    assert_eq!(&reports[2..], &tail[..]);
    assert_same(&straight, &resumed);
}

#[test]
fn run_training_resumes_from_its_output_directory() {
    let corpus = glyph_corpus(2);
    let dir = tempfile::tempdir().unwrap();
    let opts = |steps| RunOptions {
        steps,
        checkpoint_every: 2,
        out_dir: Some(dir.path().to_path_buf()),
        prefix: "glyphnet".into(),
    };
    let whole = run_training(new_glyphnet(tiny_config()).unwrap(), &corpus, &RunOptions::in_memory(5)).unwrap();

    let part = run_training(new_glyphnet(tiny_config()).unwrap(), &corpus, &opts(3)).unwrap();
    assert_eq!(part.checkpoints.len(), 2);
    // A fresh trainer is ignored in favour of the checkpoint at step 3.
    let rest = run_training(new_glyphnet(tiny_config()).unwrap(), &corpus, &opts(5)).unwrap();
    assert_same(&whole.trainer, &rest.trainer);
    assert_eq!(whole.log.records, rest.log.records);

    let mut other = tiny_config();
    other.seed += 1;
    assert!(run_training(new_glyphnet(other).unwrap(), &corpus, &opts(6)).is_err());
}

fn mean_l1(reports: &[mcgan::gan::StepReport]) -> f64 {
    reports.iter().map(|r| r.l1).sum::<f64>() / reports.len() as f64
}

#[test]
fn glyphnet_reconstruction_loss_falls() {
    let corpus = glyph_corpus(3);
    let mut t = new_glyphnet(tiny_config()).unwrap();
    let reports: Vec<_> = (0..60).map(|_| t.step(&corpus).unwrap()).collect();
    let (start, end) = (mean_l1(&reports[..5]), mean_l1(&reports[55..]));
    assert!(end < 0.6 * start, "{start} -> {end}");
}

#[test]
fn baseline_reconstruction_loss_halves() {
    let corpus: Vec<Tensor> = (0..2)
        .map(|s| {
            let (_, colored) = colored_font(s);
            colored.to_stack_tensor()
        })
        .collect();
    let mut t = new_baseline(tiny_config()).unwrap();
    let reports: Vec<_> = (0..60).map(|_| t.step(&corpus).unwrap()).collect();
    let (start, end) = (mean_l1(&reports[..5]), mean_l1(&reports[55..]));
    assert!(end < 0.5 * start, "{start} -> {end}");
}
