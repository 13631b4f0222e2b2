//! Gesture taxonomy: the five gestures of interest plus the Random class.

use core::fmt;
use core::str::FromStr;

use alloc::string::String;

use serde::{Deserialize, Serialize};

use crate::Error;

/// Number of classes the recognizer distinguishes.
pub const N_CLASSES: usize = 6;

/// Recognized arm gesture. Integer codes are stable (`0..=5` in declaration
/// order) and are used by the model file and every report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "&'static str", try_from = "String")]
#[repr(u8)]
pub enum GestureLabel {
    /// Everyday movement that is not a signal.
    Random = 0,
    /// "X" with the hands above the head.
    RecommendedStop = 1,
    /// Back and forth movement of the arm.
    RecommendedEvacuation = 2,
    /// Arms extended outwards and down until the wrists cross.
    EmergencyContained = 3,
    /// Figure-8 drawn with the watch hand.
    Fire = 4,
    /// Repeated left/right wrist rotation.
    Distress = 5,
}

impl GestureLabel {
    pub const ALL: [GestureLabel; N_CLASSES] = [
        GestureLabel::Random,
        GestureLabel::RecommendedStop,
        GestureLabel::RecommendedEvacuation,
        GestureLabel::EmergencyContained,
        GestureLabel::Fire,
        GestureLabel::Distress,
    ];

    /// The five gestures of interest, i.e. everything except Random.
    pub const SIGNALS: [GestureLabel; 5] = [
        GestureLabel::RecommendedStop,
        GestureLabel::RecommendedEvacuation,
        GestureLabel::EmergencyContained,
        GestureLabel::Fire,
        GestureLabel::Distress,
    ];

    #[inline]
    pub fn code(self) -> usize {
        self as usize
    }

    pub fn from_code(code: usize) -> Option<Self> {
        Self::ALL.get(code).copied()
    }

    /// Short tag used in CSV files and logs.
    pub fn short(self) -> &'static str {
        match self {
            GestureLabel::Random => "Rnd",
            GestureLabel::RecommendedStop => "RS",
            GestureLabel::RecommendedEvacuation => "RE",
            GestureLabel::EmergencyContained => "EC",
            GestureLabel::Fire => "F",
            GestureLabel::Distress => "DS",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GestureLabel::Random => "Random",
            GestureLabel::RecommendedStop => "RecommendedStop",
            GestureLabel::RecommendedEvacuation => "RecommendedEvacuation",
            GestureLabel::EmergencyContained => "EmergencyContained",
            GestureLabel::Fire => "Fire",
            GestureLabel::Distress => "Distress",
        }
    }

    pub fn is_signal(self) -> bool {
        self != GestureLabel::Random
    }
}

impl fmt::Display for GestureLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short())
    }
}

impl FromStr for GestureLabel {
    type Err = Error;

    /// Accepts the short tag or the full name, case-insensitively.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        Self::ALL
            .iter()
            .copied()
            .find(|l| l.short().eq_ignore_ascii_case(s) || l.name().eq_ignore_ascii_case(s))
            .or_else(|| s.eq_ignore_ascii_case("R").then_some(GestureLabel::Random))
            .ok_or_else(|| Error::UnknownLabel(s.into()))
    }
}

impl From<GestureLabel> for &'static str {
    fn from(l: GestureLabel) -> Self {
        l.short()
    }
}

impl TryFrom<String> for GestureLabel {
    type Error = Error;
    fn try_from(s: String) -> Result<Self, Error> {
        s.parse()
    }
}
