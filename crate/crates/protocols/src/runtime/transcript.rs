//! Byte-accounted record of every frame a session carried.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::ProtocolError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "C->S")]
    ClientToServer,
    #[serde(rename = "S->C")]
    ServerToClient,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::ClientToServer => "C->S",
            Direction::ServerToClient => "S->C",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entry {
    pub direction: Direction,
    pub step: String,
    /// Frame size on the wire, header included.
    pub bytes: usize,
    pub tag: u8,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Transcript {
    pub entries: Vec<Entry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupBy {
    Step,
    Direction,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReportRow {
    pub key: String,
    pub frames: usize,
    pub client_to_server: usize,
    pub server_to_client: usize,
}

impl Transcript {
    pub fn push(&mut self, e: Entry) {
        self.entries.push(e);
    }

    pub fn total(&self, dir: Direction) -> usize {
        self.entries.iter().filter(|e| e.direction == dir).map(|e| e.bytes).sum()
    }

    pub fn forward_bytes(&self) -> usize {
        self.total(Direction::ClientToServer)
    }

    pub fn backward_bytes(&self) -> usize {
        self.total(Direction::ServerToClient)
    }

    pub fn total_bytes(&self) -> usize {
        self.entries.iter().map(|e| e.bytes).sum()
    }

    /// Index of the first entry with this step label.
    pub fn position(&self, step: &str) -> Option<usize> {
        self.entries.iter().position(|e| e.step == step)
    }

    pub fn count(&self, step: &str) -> usize {
        self.entries.iter().filter(|e| e.step == step).count()
    }

    /// One JSON object per line.
    pub fn to_jsonl(&self) -> String {
        let mut s = String::new();
        for e in &self.entries {
            s.push_str(&serde_json::to_string(e).expect("entry serializes"));
            s.push('\n');
        }
        s
    }

    pub fn from_jsonl(text: &str) -> Result<Self, ProtocolError> {
        let entries = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| serde_json::from_str(l).map_err(|e| ProtocolError::Decode(e.to_string())))
            .collect::<Result<_, _>>()?;
        Ok(Self { entries })
    }

    /// Aggregates byte counts, rows sorted by key.
    pub fn report(&self, by: GroupBy) -> Vec<ReportRow> {
        let mut rows: BTreeMap<String, ReportRow> = BTreeMap::new();
        for e in &self.entries {
            let key = match by {
                GroupBy::Step => e.step.clone(),
                GroupBy::Direction => e.direction.to_string(),
            };
            let row = rows.entry(key.clone()).or_insert(ReportRow {
                key,
                frames: 0,
                client_to_server: 0,
                server_to_client: 0,
            });
            row.frames += 1;
            match e.direction {
                Direction::ClientToServer => row.client_to_server += e.bytes,
                Direction::ServerToClient => row.server_to_client += e.bytes,
            }
        }
        rows.into_values().collect()
    }
}
