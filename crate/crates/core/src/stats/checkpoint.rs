//! Versioned checkpoints and chunked, resumable replicate runs.
//!
//! A checkpoint records the experiment label and configuration, the
//! frontier key (the first replicate not yet folded in), and the named
//! accumulators. Replicates are folded strictly in index order, so a run
//! resumed from any checkpoint ends in exactly the state of an uninterrupted
//! run.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};

use super::{Accumulator, Stream, StreamKey};
use crate::error::{Error, Result};

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub label: String,
    pub config: serde_json::Value,
    pub total_replicates: u64,
    pub frontier: StreamKey,
    pub accumulators: BTreeMap<String, Accumulator>,
}

impl Checkpoint {
    pub fn is_complete(&self) -> bool {
        self.frontier.replicate_index >= self.total_replicates
    }

    pub fn accumulator(&self, name: &str) -> Result<&Accumulator> {
        self.accumulators
            .get(name)
            .ok_or_else(|| Error::Checkpoint(format!("no accumulator named {name:?}")))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        match value.get("version").and_then(|v| v.as_u64()) {
            Some(v) if v == u64::from(CHECKPOINT_VERSION) => {}
            Some(v) => {
                return Err(Error::Checkpoint(format!(
                    "version {v} is not supported (expected {CHECKPOINT_VERSION})"
                )))
            }
            None => return Err(Error::Checkpoint("missing version field".into())),
        }
        Ok(serde_json::from_value(value)?)
    }

    /// Atomic write: temporary file, then rename.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut tmp = path.as_os_str().to_owned();
        tmp.push(".tmp");
        let tmp = PathBuf::from(tmp);
        std::fs::write(&tmp, self.to_json()? + "\n")?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// How a chunked run ended.
#[derive(Debug, Clone, PartialEq)]
pub enum RunStatus {
    Complete(Checkpoint),
    Interrupted(Checkpoint),
}

impl RunStatus {
    pub fn checkpoint(&self) -> &Checkpoint {
        match self {
            RunStatus::Complete(c) | RunStatus::Interrupted(c) => c,
        }
    }

    pub fn into_checkpoint(self) -> Checkpoint {
        match self {
            RunStatus::Complete(c) | RunStatus::Interrupted(c) => c,
        }
    }
}

/// A replicate plan processed in chunks. Each replicate returns one value
/// per accumulator name, in the order of `names`.
#[derive(Debug, Clone)]
pub struct ResumableRun {
    pub label: String,
    pub config: serde_json::Value,
    pub seed: u64,
    pub replicates: u64,
    pub chunk: u64,
    pub names: Vec<String>,
    pub reservoir: Option<usize>,
    pub checkpoint_path: Option<PathBuf>,
    /// Stop after this many chunks in this invocation (for testing resume).
    pub stop_after_chunks: Option<u64>,
}

impl ResumableRun {
    pub fn new(label: impl Into<String>, config: serde_json::Value, seed: u64, replicates: u64) -> Self {
        Self {
            label: label.into(),
            config,
            seed,
            replicates,
            chunk: 1024,
            names: vec!["value".into()],
            reservoir: None,
            checkpoint_path: None,
            stop_after_chunks: None,
        }
    }

    fn fresh(&self) -> Checkpoint {
        let make = || match self.reservoir {
            Some(k) => Accumulator::with_reservoir(k),
            None => Accumulator::new(),
        };
        Checkpoint {
            version: CHECKPOINT_VERSION,
            label: self.label.clone(),
            config: self.config.clone(),
            total_replicates: self.replicates,
            frontier: StreamKey::new(self.seed, 0),
            accumulators: self.names.iter().map(|n| (n.clone(), make())).collect(),
        }
    }

    fn check_compatible(&self, ckpt: &Checkpoint) -> Result<()> {
        if ckpt.label != self.label {
            return Err(Error::Checkpoint(format!(
                "checkpoint is for {:?}, not {:?}",
                ckpt.label, self.label
            )));
        }
        if ckpt.config != self.config {
            return Err(Error::Checkpoint("checkpoint configuration differs from this run".into()));
        }
        if ckpt.frontier.seed != self.seed || ckpt.total_replicates != self.replicates {
            return Err(Error::Checkpoint("checkpoint seed or replicate count differs".into()));
        }
        if ckpt.accumulators.keys().ne(self.sorted_names().iter()) {
            return Err(Error::Checkpoint("checkpoint accumulator names differ".into()));
        }
        Ok(())
    }

    fn sorted_names(&self) -> Vec<String> {
        let mut v = self.names.clone();
        v.sort();
        v
    }

    pub fn run<F>(&self, resume: Option<Checkpoint>, stop: Option<&AtomicBool>, f: F) -> Result<RunStatus>
    where
        F: Fn(u64, &mut Stream) -> Vec<f64> + Sync + Send,
    {
        if self.chunk == 0 {
            return Err(Error::config("chunk size must be positive"));
        }
        let mut state = match resume {
            Some(c) => {
                self.check_compatible(&c)?;
                c
            }
            None => self.fresh(),
        };
        let mut chunks_done = 0u64;
        while !state.is_complete() {
            if stop.is_some_and(|s| s.load(Ordering::SeqCst))
                || self.stop_after_chunks.is_some_and(|k| chunks_done >= k)
            {
                self.persist(&state)?;
                return Ok(RunStatus::Interrupted(state));
            }
            let start = state.frontier.replicate_index;
            let end = (start + self.chunk).min(self.replicates);
            let rows: Vec<Vec<f64>> = (start..end)
                .into_par_iter()
                .map(|r| f(r, &mut Stream::new(self.seed, r)))
                .collect();
            for (r, row) in (start..end).zip(rows) {
                if row.len() != self.names.len() {
                    return Err(Error::AccumulatorMismatch(format!(
                        "replicate {r} returned {} values for {} accumulators",
                        row.len(),
                        self.names.len()
                    )));
                }
                let key = StreamKey::new(self.seed, r);
                for (name, x) in self.names.iter().zip(row) {
                    state
                        .accumulators
                        .get_mut(name)
                        .expect("accumulators created from names")
                        .push_keyed(x, key);
                }
            }
            state.frontier = StreamKey::new(self.seed, end);
            chunks_done += 1;
            self.persist(&state)?;
        }
        Ok(RunStatus::Complete(state))
    }

    fn persist(&self, state: &Checkpoint) -> Result<()> {
        match &self.checkpoint_path {
            Some(p) => state.save(p),
            None => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plan() -> ResumableRun {
        let mut run = ResumableRun::new("demo", serde_json::json!({"x": 1}), 77, 1000);
        run.chunk = 64;
        run.names = vec!["u".into(), "e".into()];
        run.reservoir = Some(8);
        run
    }

    fn body(_: u64, s: &mut Stream) -> Vec<f64> {
        vec![s.uniform(), s.exp1()]
    }

    #[test]
    fn interrupted_then_resumed_equals_uninterrupted() {
        let full = plan().run(None, None, body).unwrap();
        assert!(matches!(full, RunStatus::Complete(_)));

        let dir = std::env::temp_dir().join(format!("ltmax-ckpt-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("c.json");
        let mut first = plan();
        first.checkpoint_path = Some(path.clone());
        first.stop_after_chunks = Some(3);
        let part = first.run(None, None, body).unwrap();
        assert!(matches!(part, RunStatus::Interrupted(_)));
        let loaded = Checkpoint::load(&path).unwrap();
        assert_eq!(&loaded, part.checkpoint());
        assert_eq!(loaded.frontier.replicate_index, 192);

        let resumed = plan().run(Some(loaded), None, body).unwrap();
        assert_eq!(resumed.checkpoint(), full.checkpoint());
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn stop_flag_drains() {
        let flag = AtomicBool::new(true);
        let st = plan().run(None, Some(&flag), body).unwrap();
        assert_eq!(st.checkpoint().frontier.replicate_index, 0);
    }

    #[test]
    fn rejects_foreign_checkpoints() {
        let done = plan().run(None, None, body).unwrap().into_checkpoint();
        let mut other = plan();
        other.config = serde_json::json!({"x": 2});
        assert!(other.run(Some(done.clone()), None, body).is_err());
        let mut text = done.to_json().unwrap();
        text = text.replacen("\"version\": 1", "\"version\": 99", 1);
        assert!(matches!(Checkpoint::from_json(&text), Err(Error::Checkpoint(_))));
    }
}
