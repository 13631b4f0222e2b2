//! Labeled windows and datasets.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::gesture::{GestureLabel, N_CLASSES};
use crate::window::ImuWindow;
use crate::{Error, Result};

/// Current dataset schema version.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Hand {
    Left,
    Right,
}

impl Hand {
    pub fn tag(self) -> &'static str {
        match self {
            Hand::Left => "L",
            Hand::Right => "R",
        }
    }

    pub fn from_tag(s: &str) -> Option<Hand> {
        match s {
            "L" => Some(Hand::Left),
            "R" => Some(Hand::Right),
            _ => None,
        }
    }
}

impl fmt::Display for Hand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledWindow {
    pub window: ImuWindow,
    pub label: GestureLabel,
    /// 1-based subject number.
    pub subject_id: u32,
    pub hand: Hand,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub schema_version: u32,
    /// Seed the generator was run with; `None` for loaded or recorded data.
    pub seed: Option<u64>,
    /// Name of the pseudo-random generator behind `seed`.
    pub rng: Option<String>,
}

impl Default for DatasetMeta {
    fn default() -> Self {
        DatasetMeta { schema_version: SCHEMA_VERSION, seed: None, rng: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub samples: Vec<LabeledWindow>,
    pub meta: DatasetMeta,
}

impl Dataset {
    pub fn new(samples: Vec<LabeledWindow>, meta: DatasetMeta) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Empty("dataset has no samples"));
        }
        Ok(Dataset { samples, meta })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Distinct subject ids, ascending.
    pub fn subjects(&self) -> Vec<u32> {
        let mut ids: Vec<u32> = self.samples.iter().map(|s| s.subject_id).collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    /// Whether the subject ids are exactly `k, k+1, ..., k+n-1`.
    pub fn subjects_contiguous(&self) -> bool {
        let ids = self.subjects();
        ids.windows(2).all(|w| w[1] == w[0] + 1)
    }

    /// Per-subject class counts, keyed by subject id.
    pub fn class_counts(&self) -> BTreeMap<u32, [usize; N_CLASSES]> {
        let mut out = BTreeMap::new();
        for s in &self.samples {
            out.entry(s.subject_id).or_insert([0; N_CLASSES])[s.label.code()] += 1;
        }
        out
    }

    pub fn of_subjects<'a>(&'a self, ids: &'a [u32]) -> impl Iterator<Item = &'a LabeledWindow> + 'a {
        self.samples.iter().filter(move |s| ids.contains(&s.subject_id))
    }
}
