//! The four question categories the system answers.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Query category; also the label of every corpus example.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TaskLabel {
    /// Genetic information retrieval (coordinates, strand, chromosome).
    Task1,
    /// Gene to brain-region relationship (binary).
    Task2,
    /// Gene to Alzheimer's disease relationship with reasoning.
    Task3,
    /// Brain region to Alzheimer's disease relationship via a given gene.
    Task4,
}

impl TaskLabel {
    pub const ALL: [TaskLabel; 4] = [Self::Task1, Self::Task2, Self::Task3, Self::Task4];

    /// Zero-based index, used for score vectors and tie-breaking.
    pub const fn index(self) -> usize {
        match self {
            Self::Task1 => 0,
            Self::Task2 => 1,
            Self::Task3 => 2,
            Self::Task4 => 3,
        }
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    /// One-based task number as used on the command line.
    pub const fn number(self) -> u8 {
        self.index() as u8 + 1
    }
}

impl fmt::Display for TaskLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Task{}", self.number())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown task label `{0}` (expected 1-4 or Task1-Task4)")]
pub struct ParseTaskError(pub String);

impl FromStr for TaskLabel {
    type Err = ParseTaskError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        let digits = lower.strip_prefix("task").unwrap_or(&lower).trim();
        match digits {
            "1" => Ok(Self::Task1),
            "2" => Ok(Self::Task2),
            "3" => Ok(Self::Task3),
            "4" => Ok(Self::Task4),
            _ => Err(ParseTaskError(s.to_string())),
        }
    }
}
