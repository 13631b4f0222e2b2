//! Parametric generator for MoRSE-like IMU windows.
//!
//! Each class is a motion recipe over a 5 s window at 50 Hz: an arm pose
//! (the direction of gravity in the watch frame) plus periodic or piecewise
//! motion on the accelerometer and gyroscope axes. Subjects differ in
//! amplitude, tempo and how the watch sits on the wrist; every window adds
//! its own phase, tempo and pose jitter and Gaussian sensor noise. Left-hand
//! subjects see the x axes mirrored.
//!
//! Random windows mix everyday motifs: low-passed random drift, slow posture
//! ramps, walking bounce and short low-amplitude oscillations.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, DatasetMeta, Hand, LabeledWindow, SCHEMA_VERSION};
use crate::gesture::{GestureLabel, N_CLASSES};
use crate::math::{cos, sin, sqrt};
use crate::window::{ImuWindow, N_CHANNELS, SAMPLE_PERIOD_MS, WINDOW_LEN};
use crate::{Error, Result};

/// Recorded in dataset metadata.
pub const RNG_NAME: &str = "ChaCha8 (rand_chacha 0.9), stream = subject id";

/// Default sensor-noise standard deviation, in m/s² and rad/s.
pub const DEFAULT_NOISE: f64 = 0.5;

const G: f64 = 9.81;

/// Hands and per-class counts (Rnd, RS, RE, EC, F, DS) of the seven
/// recorded subjects.
pub const TABLE3: [(Hand, [usize; N_CLASSES]); 7] = [
    (Hand::Left, [100, 100, 100, 100, 100, 101]),
    (Hand::Right, [100, 100, 100, 100, 100, 100]),
    (Hand::Right, [100, 71, 101, 99, 99, 100]),
    (Hand::Right, [100, 100, 100, 100, 100, 100]),
    (Hand::Right, [100, 100, 101, 101, 106, 115]),
    (Hand::Left, [100, 103, 102, 102, 101, 101]),
    (Hand::Left, [100, 100, 100, 100, 100, 100]),
];

/// Hand of a 1-based subject: as recorded for the first seven, then alternating.
pub fn default_hand(subject_id: u32) -> Hand {
    match subject_id {
        1..=7 => TABLE3[subject_id as usize - 1].0,
        n if n % 2 == 0 => Hand::Right,
        _ => Hand::Left,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubjectProfile {
    pub subject_id: u32,
    pub hand: Hand,
    pub amplitude_scale: f64,
    pub tempo_scale: f64,
    pub noise_std: f64,
    /// Roll, pitch and yaw of the watch on the wrist, radians.
    pub orientation: [f64; 3],
    pub rng_seed: u64,
}

impl SubjectProfile {
    /// A neutral profile: unit scales, no watch rotation.
    pub fn neutral(subject_id: u32, hand: Hand, noise_std: f64, rng_seed: u64) -> Self {
        SubjectProfile {
            subject_id,
            hand,
            amplitude_scale: 1.0,
            tempo_scale: 1.0,
            noise_std,
            orientation: [0.0; 3],
            rng_seed,
        }
    }

    /// Draws the subject's traits from the start of its stream. Returns the
    /// stream positioned for window generation.
    pub fn draw(subject_id: u32, hand: Hand, noise_std: f64, master_seed: u64) -> (Self, ChaCha8Rng) {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(subject_id as u64);
        let profile = SubjectProfile {
            subject_id,
            hand,
            amplitude_scale: rng.random_range(0.7..1.3),
            tempo_scale: rng.random_range(0.8..1.25),
            noise_std,
            orientation: [rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)],
            rng_seed: master_seed,
        };
        (profile, rng)
    }

    /// The profile's own stream, as used by [`gen_dataset`].
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.rng_seed);
        rng.set_stream(self.subject_id as u64);
        rng
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.amplitude_scale > 0.0
            && self.tempo_scale > 0.0
            && self.noise_std >= 0.0
            && self.noise_std.is_finite()
            && self.orientation.iter().all(|a| a.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("invalid profile for subject {}", self.subject_id)))
        }
    }
}

type Vec3 = [f64; 3];

/// Rotation matrix for roll (x), pitch (y), yaw (z), applied in that order.
fn rotation(a: [f64; 3]) -> [[f64; 3]; 3] {
    let (sr, cr) = (sin(a[0]), cos(a[0]));
    let (sp, cp) = (sin(a[1]), cos(a[1]));
    let (sy, cy) = (sin(a[2]), cos(a[2]));
    [
        [cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr],
        [sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr],
        [-sp, cp * sr, cp * cr],
    ]
}

fn rotate(m: &[[f64; 3]; 3], v: Vec3) -> Vec3 {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}

fn unit(v: Vec3) -> Vec3 {
    let n = sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    [v[0] / n, v[1] / n, v[2] / n]
}

fn smoothstep(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    x * x * (3.0 - 2.0 * x)
}

const TAU: f64 = 2.0 * PI;

/// One sample of a template: gravity direction (unit) and motion readings.
struct Frame {
    down: Vec3,
    acc: Vec3,
    gyro: Vec3,
}

/// Per-window random draws shared by all samples of the window.
struct Jitter {
    amp: f64,
    tempo: f64,
    phase: f64,
    onset: f64,
    /// Seconds during which the arm actually moves; idle outside.
    active: (f64, f64),
}

/// 1 inside `active`, 0 outside, with 0.3 s cosine ramps.
fn envelope(t: f64, active: (f64, f64)) -> f64 {
    const RAMP: f64 = 0.3;
    let up = smoothstep((t - active.0) / RAMP);
    let down = smoothstep((active.1 - t) / RAMP);
    up.min(down)
}

fn render_gesture(label: GestureLabel, t: f64, j: &Jitter) -> Frame {
    let a = j.amp;
    let tau = t * j.tempo + j.phase;
    match label {
        // Both arms raised, crossing repeatedly overhead.
        GestureLabel::RecommendedStop => {
            let w = TAU * 0.9;
            Frame {
                down: [-1.0, 0.0, 0.25],
                acc: [0.6 * a * sin(2.0 * w * tau), 3.5 * a * sin(w * tau), 0.0],
                gyro: [0.5 * a * sin(2.0 * w * tau), 0.0, 2.0 * a * cos(w * tau)],
            }
        }
        // Lift the arm for about 1.5 s, then swing it back and forth.
        GestureLabel::RecommendedEvacuation => {
            let lift_end = 1.5 + j.onset;
            let s = t * j.tempo - j.onset;
            let lift = smoothstep(s / 1.5);
            let down = [1.0 - 2.0 * lift, 0.0, 0.6];
            if t < lift_end {
                let pulse = if (0.0..1.5).contains(&s) { sin(PI * s / 1.5) } else { 0.0 };
                Frame { down, acc: [0.0, 0.0, 1.2 * a * pulse], gyro: [0.0, 1.6 * a * pulse, 0.0] }
            } else {
                let w = TAU * 1.3;
                let u = tau - lift_end;
                Frame { down, acc: [4.0 * a * sin(w * u), 0.0, 0.0], gyro: [0.0, 2.5 * a * cos(w * u), 0.0] }
            }
        }
        // Arms sweep out and down until the wrists cross, then back.
        GestureLabel::EmergencyContained => {
            let w = TAU * 0.55;
            Frame {
                down: [0.3, 0.2, 1.0],
                acc: [0.0, 3.0 * a * sin(w * tau), 2.0 * a * sin(w * tau + PI / 3.0)],
                gyro: [1.2 * a * cos(w * tau), 0.8 * a * sin(2.0 * w * tau), 0.0],
            }
        }
        // Figure-8 with the watch hand: fundamental on x, double tone on y.
        GestureLabel::Fire => {
            let w = TAU * 0.7;
            Frame {
                down: [0.2, -0.3, 1.0],
                acc: [3.0 * a * sin(w * tau), 2.5 * a * sin(2.0 * w * tau), 0.0],
                gyro: [1.2 * a * cos(2.0 * w * tau), 0.0, 1.8 * a * cos(w * tau)],
            }
        }
        // Fast left-right wrist rotation, mostly about the forearm (x) axis.
        GestureLabel::Distress => {
            let w = TAU * 2.8;
            Frame {
                down: [0.4, 0.0, 1.0],
                acc: [0.0, 0.8 * a * sin(w * tau), 0.2 * a * sin(2.0 * w * tau)],
                gyro: [5.0 * a * sin(w * tau), 0.6 * a * sin(w * tau + 1.0), 0.4 * a * sin(2.0 * w * tau)],
            }
        }
        GestureLabel::Random => unreachable!("random windows are rendered by mixing motifs"),
    }
}

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Everyday motion: a random subset (at least one) of drift, posture ramp,
/// walking bounce, a low-amplitude oscillation burst and a gesture-like
/// wave of the arm.
fn render_random<R: Rng + ?Sized>(p: &SubjectProfile, rng: &mut R, out: &mut [[f64; N_CHANNELS]; WINDOW_LEN]) {
    let mut pick = [false; 5];
    while !pick.iter().any(|&b| b) {
        for b in pick.iter_mut() {
            *b = rng.random_bool(0.5);
        }
    }
    let d0 = unit([rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-0.2..1.0)]);
    let d1 = if pick[1] {
        unit([rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-0.2..1.0)])
    } else {
        d0
    };
    let mut drift = [0.0f64; N_CHANNELS];
    let mut vel = [0.0f64; N_CHANNELS];
    let drift_scale = [1.5, 1.5, 1.5, 0.6, 0.6, 0.6];
    let walk_f = rng.random_range(1.6..2.2) * p.tempo_scale;
    let walk_a = rng.random_range(1.0..2.5) * p.amplitude_scale;
    let walk_phase = rng.random_range(0.0..1.0);
    let osc_f = rng.random_range(0.3..4.0);
    let osc_axis = rng.random_range(0..N_CHANNELS);
    let osc_a = rng.random_range(0.5..2.0) * if osc_axis < 3 { 1.0 } else { 0.4 } * p.amplitude_scale;
    let osc_start = rng.random_range(0.0..4.0);
    let osc_len = rng.random_range(0.5..2.5);
    let wave_f = rng.random_range(0.5..3.0) * p.tempo_scale;
    let wave_axes = [rng.random_range(0..3), 3 + rng.random_range(0..3)];
    let wave_a = [rng.random_range(1.0..3.0) * p.amplitude_scale, rng.random_range(0.5..2.5) * p.amplitude_scale];
    let wave_start = rng.random_range(0.0..3.0);
    let wave_len = rng.random_range(1.0..3.5);
    for (k, row) in out.iter_mut().enumerate() {
        let t = k as f64 * (SAMPLE_PERIOD_MS as f64 / 1000.0);
        let s = smoothstep(t / 5.0);
        let down = unit([d0[0] + (d1[0] - d0[0]) * s, d0[1] + (d1[1] - d0[1]) * s, d0[2] + (d1[2] - d0[2]) * s]);
        let mut v = [G * down[0], G * down[1], G * down[2], 0.0, 0.0, 0.0];
        if pick[0] {
            for c in 0..N_CHANNELS {
                vel[c] = 0.9 * vel[c] + 0.1 * normal(rng);
                drift[c] = 0.95 * drift[c] + vel[c];
                v[c] += drift_scale[c] * drift[c] * 0.5;
            }
        }
        if pick[2] {
            let ph = TAU * (walk_f * t + walk_phase);
            v[2] += walk_a * sin(ph);
            v[0] += 0.3 * walk_a * sin(0.5 * ph);
            v[4] += 0.2 * walk_a * cos(0.5 * ph);
        }
        if pick[3] && t >= osc_start && t < osc_start + osc_len {
            v[osc_axis] += osc_a * sin(TAU * osc_f * (t - osc_start)) * sin(PI * (t - osc_start) / osc_len);
        }
        if pick[4] && t >= wave_start && t < wave_start + wave_len {
            let ph = TAU * wave_f * (t - wave_start);
            let e = sin(PI * (t - wave_start) / wave_len);
            v[wave_axes[0]] += wave_a[0] * sin(ph) * e;
            v[wave_axes[1]] += wave_a[1] * cos(ph) * e;
        }
        *row = v;
    }
}

/// Renders one window for `label` as performed by `profile`.
pub fn gen_window<R: Rng + ?Sized>(label: GestureLabel, profile: &SubjectProfile, rng: &mut R) -> ImuWindow {
    let mut rows = [[0.0f64; N_CHANNELS]; WINDOW_LEN];
    let pose = rotation([
        profile.orientation[0] + rng.random_range(-0.15..0.15),
        profile.orientation[1] + rng.random_range(-0.15..0.15),
        profile.orientation[2] + rng.random_range(-0.15..0.15),
    ]);
    if label == GestureLabel::Random {
        render_random(profile, rng, &mut rows);
    } else {
        let jitter = Jitter {
            amp: profile.amplitude_scale * rng.random_range(0.85..1.15),
            tempo: profile.tempo_scale * rng.random_range(0.9..1.1),
            phase: rng.random_range(0.0..2.0),
            onset: rng.random_range(-0.3..0.3),
            active: (rng.random_range(0.0..1.2), rng.random_range(3.8..5.3)),
        };
        for (k, row) in rows.iter_mut().enumerate() {
            let t = k as f64 * (SAMPLE_PERIOD_MS as f64 / 1000.0);
            let f = render_gesture(label, t, &jitter);
            let e = envelope(t, jitter.active);
            let d = unit(f.down);
            *row = [
                G * d[0] + e * f.acc[0],
                G * d[1] + e * f.acc[1],
                G * d[2] + e * f.acc[2],
                e * f.gyro[0],
                e * f.gyro[1],
                e * f.gyro[2],
            ];
        }
    }
    let mut w = ImuWindow::zeros();
    for (k, row) in rows.iter().enumerate() {
        let acc = rotate(&pose, [row[0], row[1], row[2]]);
        let gyro = rotate(&pose, [row[3], row[4], row[5]]);
        for c in 0..3 {
            w.channel_mut(c)[k] = acc[c];
            w.channel_mut(c + 3)[k] = gyro[c];
        }
    }
    if profile.noise_std > 0.0 {
        for c in 0..N_CHANNELS {
            for x in w.channel_mut(c) {
                *x += profile.noise_std * normal(rng);
            }
        }
    }
    if profile.hand == Hand::Left {
        for c in [0, 3] {
            for x in w.channel_mut(c) {
                *x = -*x;
            }
        }
    }
    w
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub n_subjects: u32,
    pub per_class: usize,
    /// Use the recorded per-subject class counts instead of `per_class`.
    pub table3: bool,
    pub noise_std: f64,
    pub seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig { n_subjects: 7, per_class: 100, table3: false, noise_std: DEFAULT_NOISE, seed: 1 }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_subjects == 0 {
            return Err(Error::InvalidConfig("need at least one subject".into()));
        }
        if self.table3 && self.n_subjects as usize > TABLE3.len() {
            return Err(Error::InvalidConfig(format!("recorded counts exist for {} subjects only", TABLE3.len())));
        }
        if !self.table3 && self.per_class == 0 {
            return Err(Error::InvalidConfig("per-class count must be at least 1".into()));
        }
        if !(self.noise_std >= 0.0) || !self.noise_std.is_finite() {
            return Err(Error::InvalidConfig("noise must be a finite non-negative number".into()));
        }
        Ok(())
    }

    fn counts(&self, subject_id: u32) -> [usize; N_CLASSES] {
        if self.table3 {
            TABLE3[subject_id as usize - 1].1
        } else {
            [self.per_class; N_CLASSES]
        }
    }
}

/// All windows of one subject, ordered by class code then index.
pub fn gen_subject(cfg: &GenConfig, subject_id: u32) -> Vec<LabeledWindow> {
    let hand = default_hand(subject_id);
    let (profile, mut rng) = SubjectProfile::draw(subject_id, hand, cfg.noise_std, cfg.seed);
    let counts = cfg.counts(subject_id);
    let mut out = Vec::with_capacity(counts.iter().sum());
    for label in GestureLabel::ALL {
        for _ in 0..counts[label.code()] {
            out.push(LabeledWindow { window: gen_window(label, &profile, &mut rng), label, subject_id, hand });
        }
    }
    out
}

/// Subjects are numbered from 1 and generated from independent streams.
pub fn gen_dataset(cfg: &GenConfig) -> Result<Dataset> {
    cfg.validate()?;
    let samples = (1..=cfg.n_subjects).flat_map(|s| gen_subject(cfg, s)).collect();
    Dataset::new(samples, meta(cfg))
}

pub fn meta(cfg: &GenConfig) -> DatasetMeta {
    DatasetMeta { schema_version: SCHEMA_VERSION, seed: Some(cfg.seed), rng: Some(String::from(RNG_NAME)) }
}
