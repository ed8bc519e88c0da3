//! Output writers: CSV trajectories and crossings, JSON-lines event logs,
//! genealogy documents, and the per-run manifest with content hashes.

use crate::jump::TstPath;
use crate::ode::{CrossingEvent, CrossingKind, MutationEvent, Trajectory};
use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    hex_string(&hasher.finalize())
}

fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::from("time");
    for id in &traj.trait_ids {
        out.push_str(&format!(",trait_{id}"));
    }
    out.push('\n');
    for (t, row) in traj.times.iter().zip(&traj.states) {
        out.push_str(&format!("{t:?}"));
        for v in row {
            out.push_str(&format!(",{v:?}"));
        }
        out.push('\n');
    }
    out
}

pub fn crossings_csv(events: &[CrossingEvent]) -> String {
    let mut out = String::from("time,trait,kind,level\n");
    for e in events {
        let kind = match e.kind {
            CrossingKind::Up => "up",
            CrossingKind::Down => "down",
        };
        out.push_str(&format!("{:?},{},{kind},{:?}\n", e.time, e.trait_id, e.level));
    }
    out
}

pub fn mutation_events_jsonl(events: &[MutationEvent]) -> String {
    let mut out = String::new();
    for e in events {
        out.push_str(&serde_json::to_string(e).expect("serializable event"));
        out.push('\n');
    }
    out
}

/// One line per jump: event record plus the occupied ids of the post-jump
/// state.
pub fn jump_path_jsonl(path: &TstPath) -> String {
    let mut out = String::new();
    for (state, event) in path.states().skip(1).zip(&path.events) {
        let occupied: Vec<u32> = state.seq.occupied_ids().collect();
        let line = json!({
            "index": event.index,
            "clock": event.clock,
            "wait": event.wait,
            "beta": event.beta,
            "parent_id": event.parent_id,
            "mutant_id": event.mutant_id,
            "rank": event.rank,
            "case": event.case,
            "resamples": event.resamples,
            "occupied_after": occupied,
        });
        out.push_str(&line.to_string());
        out.push('\n');
    }
    out
}

pub fn to_pretty_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s
}

#[derive(Debug, Serialize)]
pub struct OutputEntry {
    pub file: String,
    pub sha256: String,
    pub bytes: usize,
}

/// Run manifest: tool version, seed, config hash, wall time, and a content
/// hash for every output file.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub config_sha256: String,
    pub wall_time_s: f64,
    pub outputs: Vec<OutputEntry>,
}

/// Collects output files, writes them into `dir`, and finishes with a
/// `manifest.json` listing every file with its hash.
pub struct RunWriter {
    dir: PathBuf,
    manifest: Manifest,
}

impl RunWriter {
    pub fn new(dir: &Path, command: &str, config_bytes: &[u8], seed: Option<u64>) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(RunWriter {
            dir: dir.to_path_buf(),
            manifest: Manifest {
                tool: "tstlab".into(),
                version: env!("CARGO_PKG_VERSION").into(),
                command: command.into(),
                seed,
                config_sha256: sha256_hex(config_bytes),
                wall_time_s: 0.0,
                outputs: Vec::new(),
            },
        })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> io::Result<()> {
        fs::write(self.dir.join(name), contents)?;
        self.manifest.outputs.push(OutputEntry {
            file: name.to_string(),
            sha256: sha256_hex(contents.as_bytes()),
            bytes: contents.len(),
        });
        Ok(())
    }

    pub fn finish(mut self, wall_time_s: f64) -> io::Result<()> {
        self.manifest.wall_time_s = wall_time_s;
        fs::write(
            self.dir.join("manifest.json"),
            to_pretty_json(&self.manifest),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_uses_roundtrip_floats() {
        let mut traj = Trajectory::new(vec![0, 2]);
        traj.push(0.0, &[1.0, 0.1]);
        traj.push(0.5, &[0.75, 0.25]);
        let csv = trajectory_csv(&traj);
        assert_eq!(csv, "time,trait_0,trait_2\n0.0,1.0,0.1\n0.5,0.75,0.25\n");
    }

    #[test]
    fn hash_is_stable() {
        assert_eq!(
            sha256_hex(b"tstlab"),
            sha256_hex(b"tstlab"),
        );
        assert_ne!(sha256_hex(b"a"), sha256_hex(b"b"));
    }
}
