//! Gesture → Morse code → vibration timeline, and back.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::gesture::GestureLabel;
use crate::{Error, Result};

pub const DOT_MS: u32 = 200;
pub const DASH_MS: u32 = 400;
pub const LETTER_GAP_MS: u32 = 400;
/// Off time between two symbols of the same letter.
pub const DEFAULT_INTRA_GAP_MS: u32 = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Token {
    Dot,
    Dash,
    LetterSpace,
}

impl Token {
    pub fn symbol(self) -> char {
        match self {
            Token::Dot => '.',
            Token::Dash => '-',
            Token::LetterSpace => ' ',
        }
    }
}

/// Dots and dashes with single letter spaces strictly between letters.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct MorseCode(Vec<Token>);

impl MorseCode {
    pub fn new(tokens: Vec<Token>) -> Result<Self> {
        let bad = |why: &str| Err(Error::MalformedCode(String::from(why)));
        if tokens.first() == Some(&Token::LetterSpace) || tokens.last() == Some(&Token::LetterSpace) {
            return bad("leading or trailing letter space");
        }
        if tokens.windows(2).any(|w| w[0] == Token::LetterSpace && w[1] == Token::LetterSpace) {
            return bad("adjacent letter spaces");
        }
        Ok(MorseCode(tokens))
    }

    pub fn tokens(&self) -> &[Token] {
        &self.0
    }

    pub fn dots(&self) -> usize {
        self.0.iter().filter(|&&t| t == Token::Dot).count()
    }

    pub fn dashes(&self) -> usize {
        self.0.iter().filter(|&&t| t == Token::Dash).count()
    }
}

impl fmt::Display for MorseCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.iter().try_for_each(|t| fmt::Write::write_char(f, t.symbol()))
    }
}

impl FromStr for MorseCode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let tokens = s
            .chars()
            .map(|c| match c {
                '.' => Ok(Token::Dot),
                '-' => Ok(Token::Dash),
                ' ' => Ok(Token::LetterSpace),
                other => Err(Error::MalformedCode(format!("unexpected character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        MorseCode::new(tokens)
    }
}

impl TryFrom<String> for MorseCode {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<MorseCode> for String {
    fn from(c: MorseCode) -> String {
        format!("{c}")
    }
}

/// The vibration pattern announcing each signal.
pub fn gesture_to_morse(g: GestureLabel) -> Result<MorseCode> {
    let s = match g {
        GestureLabel::Random => return Err(Error::NoCodeForRandom),
        GestureLabel::RecommendedStop => ".-. ...",
        GestureLabel::EmergencyContained => ". -.-.",
        GestureLabel::RecommendedEvacuation => ".-. .",
        GestureLabel::Fire => "..-.",
        GestureLabel::Distress => "-.. ...",
    };
    s.parse()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Timing {
    pub dot_ms: u32,
    pub dash_ms: u32,
    pub letter_gap_ms: u32,
    pub intra_gap_ms: u32,
}

impl Default for Timing {
    fn default() -> Self {
        Timing { dot_ms: DOT_MS, dash_ms: DASH_MS, letter_gap_ms: LETTER_GAP_MS, intra_gap_ms: DEFAULT_INTRA_GAP_MS }
    }
}

impl Timing {
    /// Durations must be positive and each pair (dot, dash) and (intra gap,
    /// letter gap) distinct, so timelines stay decodable.
    pub fn validate(&self) -> Result<()> {
        let all = [self.dot_ms, self.dash_ms, self.letter_gap_ms, self.intra_gap_ms];
        if all.contains(&0) || self.dot_ms == self.dash_ms || self.intra_gap_ms == self.letter_gap_ms {
            return Err(Error::InvalidConfig(format!("undecodable timing {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VibState {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub state: VibState,
    pub duration_ms: u32,
}

impl Segment {
    pub fn on(ms: u32) -> Self {
        Segment { state: VibState::On, duration_ms: ms }
    }

    pub fn off(ms: u32) -> Self {
        Segment { state: VibState::Off, duration_ms: ms }
    }
}

/// Alternating On/Off segments that start and end On.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VibrationTimeline(Vec<Segment>);

impl VibrationTimeline {
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        let bad = |why: &str| Err(Error::MalformedTimeline(String::from(why)));
        match (segments.first(), segments.last()) {
            (None, _) | (_, None) => return bad("empty timeline"),
            (Some(a), Some(b)) if a.state != VibState::On || b.state != VibState::On => {
                return bad("timeline must start and end with On")
            }
            _ => {}
        }
        if segments.iter().any(|s| s.duration_ms == 0) {
            return bad("zero-length segment");
        }
        if segments.windows(2).any(|w| w[0].state == w[1].state) {
            return bad("adjacent segments share a state");
        }
        Ok(VibrationTimeline(segments))
    }

    pub fn segments(&self) -> &[Segment] {
        &self.0
    }

    pub fn total_ms(&self) -> u32 {
        self.0.iter().map(|s| s.duration_ms).sum()
    }

    pub fn on_ms(&self) -> u32 {
        self.0.iter().filter(|s| s.state == VibState::On).map(|s| s.duration_ms).sum()
    }
}

impl fmt::Display for VibrationTimeline {
    /// One `ON <ms>` / `OFF <ms>` line per segment.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            let tag = if s.state == VibState::On { "ON" } else { "OFF" };
            write!(f, "{tag} {}", s.duration_ms)?;
        }
        Ok(())
    }
}

pub fn morse_to_timeline(code: &MorseCode) -> Result<VibrationTimeline> {
    morse_to_timeline_with(code, &Timing::default())
}

pub fn morse_to_timeline_with(code: &MorseCode, timing: &Timing) -> Result<VibrationTimeline> {
    timing.validate()?;
    if code.0.is_empty() {
        return Err(Error::EmptyCode);
    }
    let mut out = Vec::with_capacity(2 * code.0.len());
    let mut prev_on = false;
    for &t in &code.0 {
        match t {
            Token::LetterSpace => {
                out.push(Segment::off(timing.letter_gap_ms));
                prev_on = false;
            }
            Token::Dot | Token::Dash => {
                if prev_on {
                    out.push(Segment::off(timing.intra_gap_ms));
                }
                out.push(Segment::on(if t == Token::Dot { timing.dot_ms } else { timing.dash_ms }));
                prev_on = true;
            }
        }
    }
    VibrationTimeline::new(out)
}

pub fn timeline_to_morse(timeline: &VibrationTimeline) -> Result<MorseCode> {
    timeline_to_morse_with(timeline, &Timing::default())
}

pub fn timeline_to_morse_with(timeline: &VibrationTimeline, timing: &Timing) -> Result<MorseCode> {
    timing.validate()?;
    // Re-check in case the timeline was built by deserialization.
    let segs = VibrationTimeline::new(timeline.0.clone())?.0;
    let mut tokens = Vec::with_capacity(segs.len());
    for s in segs {
        let unknown = || Error::MalformedTimeline(format!("unexpected {:?} duration {} ms", s.state, s.duration_ms));
        match s.state {
            VibState::On if s.duration_ms == timing.dot_ms => tokens.push(Token::Dot),
            VibState::On if s.duration_ms == timing.dash_ms => tokens.push(Token::Dash),
            VibState::Off if s.duration_ms == timing.letter_gap_ms => tokens.push(Token::LetterSpace),
            VibState::Off if s.duration_ms == timing.intra_gap_ms => {}
            _ => return Err(unknown()),
        }
    }
    MorseCode::new(tokens)
}
