//! Checkpointed, resumable training runs of a [`StackGan`].

use std::path::{Path, PathBuf};

use mcgan_nn::Tensor;

use super::log::LossLog;
use super::stack_gan::StackGan;
use crate::error::{McganError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    /// Total iterations, counting any completed before a resume.
    pub steps: u64,
    /// Checkpoint period in iterations; 0 keeps only the final one.
    pub checkpoint_every: u64,
    /// Directory for checkpoints and `loss.tsv`; `None` trains in memory.
    pub out_dir: Option<PathBuf>,
    /// File-name prefix of checkpoints, e.g. `glyphnet`.
    pub prefix: String,
}

impl RunOptions {
    pub fn in_memory(steps: u64) -> Self {
        RunOptions {
            steps,
            checkpoint_every: 0,
            out_dir: None,
            prefix: "run".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub trainer: StackGan,
    pub log: LossLog,
    pub checkpoints: Vec<PathBuf>,
}

pub fn checkpoint_path(dir: &Path, prefix: &str, iteration: u64) -> PathBuf {
    dir.join(format!("{prefix}-{iteration:08}.ckpt"))
}

/// Highest-iteration checkpoint `prefix-NNNNNNNN.ckpt` in `dir`, if any.
pub fn latest_checkpoint(dir: &Path, prefix: &str) -> Result<Option<PathBuf>> {
    if !dir.is_dir() {
        return Ok(None);
    }
    let mut best: Option<(u64, PathBuf)> = None;
    for entry in std::fs::read_dir(dir).map_err(McganError::io(dir))? {
        let path = entry.map_err(McganError::io(dir))?.path();
        let Some(name) = path.file_name().and_then(|n| n.to_str()) else {
            continue;
        };
        let Some(num) = name
            .strip_prefix(prefix)
            .and_then(|r| r.strip_prefix('-'))
            .and_then(|r| r.strip_suffix(".ckpt"))
        else {
            continue;
        };
        if let Ok(it) = num.parse::<u64>() {
            if best.as_ref().is_none_or(|b| it > b.0) {
                best = Some((it, path));
            }
        }
    }
    Ok(best.map(|b| b.1))
}

/// Trains until `opts.steps`. With an output directory, resumes from the
/// latest checkpoint there (discarding log lines past it), so an
/// interrupted run continues on the same trajectory.
pub fn run_training(fresh: StackGan, corpus: &[Tensor], opts: &RunOptions) -> Result<RunOutcome> {
    let mut trainer = fresh;
    let mut log = LossLog::new();
    let mut checkpoints = Vec::new();
    if let Some(dir) = &opts.out_dir {
        if let Some(path) = latest_checkpoint(dir, &opts.prefix)? {
            let resumed = StackGan::load(&path)?;
            if resumed.config != trainer.config || resumed.g_spec != trainer.g_spec {
                return Err(McganError::Config(vec![format!(
                    "{} was written with a different configuration; use a fresh output directory",
                    path.display()
                )]));
            }
            trainer = resumed;
            let log_path = dir.join("loss.tsv");
            if log_path.is_file() {
                let text = std::fs::read_to_string(&log_path).map_err(McganError::io(&log_path))?;
                log = LossLog::parse(&text, &log_path)?;
                log.records.retain(|r| r.0 < trainer.iteration);
            }
        }
    }
    while trainer.iteration < opts.steps {
        trainer.step(corpus)?.log_into(&mut log);
        let it = trainer.iteration;
        let periodic = opts.checkpoint_every > 0 && it.is_multiple_of(opts.checkpoint_every);
        if let Some(dir) = &opts.out_dir {
            if periodic || it == opts.steps {
                let path = checkpoint_path(dir, &opts.prefix, it);
                trainer.save(&path)?;
                log.save(&dir.join("loss.tsv"))?;
                checkpoints.push(path);
            }
        }
    }
    Ok(RunOutcome {
        trainer,
        log,
        checkpoints,
    })
}
