//! Discrete-event simulation of the responder broadcast protocol.
//!
//! A recognized signal is advertised for 10 s to every node within radio
//! range, subject to three gates: it is not Random, the node is not already
//! transmitting, and it differs from the last signal the node sent. With
//! location tracking on, a transmission waits for a GPS fix. Receivers
//! queue the signal's Morse vibration and record it in their inbox.
//!
//! Automatic delivery is attempted once, when an advertisement starts, for
//! every node in range at that moment. Nodes that arrive later, or whose
//! packet was dropped, pick the message up with a manual scan.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::gesture::GestureLabel;
use crate::math::sqrt;
use crate::morse::{gesture_to_morse, morse_to_timeline_with, Timing, VibrationTimeline};
use crate::{Error, Result};

/// How long an event is advertised.
pub const TTL_MS: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub radio_range_m: f64,
    /// Independent per-link loss probability.
    pub drop_prob: f64,
    pub latency_ms: u64,
    pub seed: u64,
    pub ttl_ms: u64,
    /// Forget the last sent signal after this long; `None` keeps it until a
    /// different signal is sent.
    pub dedup_timeout_ms: Option<u64>,
    pub timing: Timing,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            radio_range_m: 30.0,
            drop_prob: 0.0,
            latency_ms: 50,
            seed: 0,
            ttl_ms: TTL_MS,
            dedup_timeout_ms: None,
            timing: Timing::default(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.radio_range_m >= 0.0) || !self.radio_range_m.is_finite() {
            return Err(Error::InvalidConfig("radio range must be finite and non-negative".into()));
        }
        if !(0.0..=1.0).contains(&self.drop_prob) {
            return Err(Error::InvalidConfig("drop probability must lie in [0, 1]".into()));
        }
        self.timing.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Location {
    pub lat: f64,
    pub lon: f64,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.lat, self.lon)
    }
}

fn show_loc(l: &Option<Location>) -> String {
    l.map_or_else(|| String::from("none"), |l| l.to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GestureEvent {
    pub user_id: String,
    pub gesture: GestureLabel,
    pub location: Option<Location>,
    /// Virtual time the advertisement started (or was requested, while pending).
    pub timestamp_ms: u64,
    pub confidence: f64,
}

impl GestureEvent {
    pub fn new(
        user_id: String,
        gesture: GestureLabel,
        location: Option<Location>,
        timestamp_ms: u64,
        confidence: f64,
    ) -> Result<Self> {
        if gesture == GestureLabel::Random {
            return Err(Error::GatingViolation("Random is never broadcast".into()));
        }
        if !(0.0..=1.0).contains(&confidence) {
            return Err(Error::InvalidConfig(format!("confidence {confidence} outside [0, 1]")));
        }
        Ok(GestureEvent { user_id, gesture, location, timestamp_ms, confidence })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transmission {
    pub event: GestureEvent,
    /// Last millisecond at which the event can be received.
    pub expires_at_ms: u64,
}

impl Transmission {
    pub fn active_at(&self, now: u64) -> bool {
        now >= self.event.timestamp_ms && now <= self.expires_at_ms
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InboxEntry {
    pub from: String,
    pub gesture: GestureLabel,
    pub location: Option<Location>,
    pub sent_at_ms: u64,
    pub received_at_ms: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    Recognizing,
    /// Waiting for a GPS fix before advertising.
    Pending,
    Transmitting,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Recognizing => "recognizing",
            Mode::Pending => "pending",
            Mode::Transmitting => "transmitting",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeState {
    pub user_id: String,
    /// Metres; used only for range checks.
    pub position: [f64; 2],
    pub location_enabled: bool,
    pub gps_available: bool,
    pub location: Option<Location>,
    pub current_tx: Option<Transmission>,
    pub pending: Option<GestureEvent>,
    pub last_sent_gesture: Option<GestureLabel>,
    pub last_sent_at_ms: Option<u64>,
    /// Most recent recognizer output and its confidence.
    pub last_recognized: Option<(GestureLabel, f64)>,
    pub inbox: Vec<InboxEntry>,
    pub vibration_queue: Vec<VibrationTimeline>,
    /// (sender, advertisement start) pairs already received.
    pub seen: BTreeSet<(String, u64)>,
}

impl NodeState {
    pub fn new(user_id: impl Into<String>) -> Self {
        NodeState {
            user_id: user_id.into(),
            position: [0.0, 0.0],
            location_enabled: false,
            gps_available: false,
            location: None,
            current_tx: None,
            pending: None,
            last_sent_gesture: None,
            last_sent_at_ms: None,
            last_recognized: None,
            inbox: Vec::new(),
            vibration_queue: Vec::new(),
            seen: BTreeSet::new(),
        }
    }

    pub fn active_tx(&self, now: u64) -> Option<&Transmission> {
        self.current_tx.as_ref().filter(|t| t.active_at(now))
    }

    pub fn mode(&self, now: u64) -> Mode {
        if self.active_tx(now).is_some() {
            Mode::Transmitting
        } else if self.pending.is_some() {
            Mode::Pending
        } else {
            Mode::Recognizing
        }
    }

    fn distance(&self, other: &NodeState) -> f64 {
        let dx = self.position[0] - other.position[0];
        let dy = self.position[1] - other.position[1];
        sqrt(dx * dx + dy * dy)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateReason {
    RandomGesture,
    Busy,
    Duplicate,
}

impl fmt::Display for GateReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GateReason::RandomGesture => "RandomGesture",
            GateReason::Busy => "Busy",
            GateReason::Duplicate => "Duplicate",
        })
    }
}

/// `Ok` when `g` may be sent now, otherwise the first failing gate.
pub fn should_transmit(
    node: &NodeState,
    g: GestureLabel,
    now: u64,
    cfg: &SimConfig,
) -> core::result::Result<(), GateReason> {
    if g == GestureLabel::Random {
        return Err(GateReason::RandomGesture);
    }
    if node.active_tx(now).is_some() {
        return Err(GateReason::Busy);
    }
    if node.last_sent_gesture == Some(g) {
        let remembered = match (cfg.dedup_timeout_ms, node.last_sent_at_ms) {
            (Some(timeout), Some(at)) => now.saturating_sub(at) <= timeout,
            _ => true,
        };
        if remembered {
            return Err(GateReason::Duplicate);
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub enum TxStart {
    Started(Transmission),
    /// Location tracking is on but there is no fix yet. Carries the event
    /// it replaced, if any.
    Pending {
        replaced: Option<GestureEvent>,
    },
}

fn start(node: &mut NodeState, mut event: GestureEvent, now: u64, cfg: &SimConfig) -> Transmission {
    event.timestamp_ms = now;
    event.location = if node.location_enabled { node.location } else { None };
    let tx = Transmission { event, expires_at_ms: now + cfg.ttl_ms };
    node.last_sent_gesture = Some(tx.event.gesture);
    node.last_sent_at_ms = Some(now);
    node.current_tx = Some(tx.clone());
    tx
}

pub fn begin_transmit(
    node: &mut NodeState,
    g: GestureLabel,
    confidence: f64,
    now: u64,
    cfg: &SimConfig,
) -> Result<TxStart> {
    if let Err(reason) = should_transmit(node, g, now, cfg) {
        return Err(Error::GatingViolation(format!("{} cannot send {g}: {reason}", node.user_id)));
    }
    let event = GestureEvent::new(node.user_id.clone(), g, None, now, confidence)?;
    if node.location_enabled && !node.gps_available {
        let replaced = node.pending.replace(event);
        return Ok(TxStart::Pending { replaced });
    }
    node.pending = None;
    Ok(TxStart::Started(start(node, event, now, cfg)))
}

/// Starts a pending event once it may go out: a fix arrived or location
/// tracking was switched off.
pub fn promote_pending(node: &mut NodeState, now: u64, cfg: &SimConfig) -> Option<Transmission> {
    if node.pending.is_none() || (node.location_enabled && !node.gps_available) || node.active_tx(now).is_some() {
        return None;
    }
    let event = node.pending.take()?;
    Some(start(node, event, now, cfg))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LinkOutcome {
    Scheduled { receiver: String, at_ms: u64 },
    Dropped { receiver: String },
}

fn link(
    sender: &NodeState,
    tx: &Transmission,
    receiver: &NodeState,
    at_ms: u64,
    cfg: &SimConfig,
    rng: &mut ChaCha8Rng,
) -> Option<LinkOutcome> {
    if receiver.user_id == sender.user_id
        || receiver.distance(sender) > cfg.radio_range_m
        || receiver.seen.contains(&(sender.user_id.clone(), tx.event.timestamp_ms))
        || at_ms > tx.expires_at_ms
        || at_ms < tx.event.timestamp_ms + cfg.latency_ms
    {
        return None;
    }
    let dropped = rng.random::<f64>() < cfg.drop_prob;
    let receiver = receiver.user_id.clone();
    Some(if dropped { LinkOutcome::Dropped { receiver } } else { LinkOutcome::Scheduled { receiver, at_ms } })
}

/// Delivery attempts for a transmission that has just started, one per
/// other node in range, in node-id order.
pub fn deliver(
    sender: &NodeState,
    tx: &Transmission,
    nodes: &BTreeMap<String, NodeState>,
    cfg: &SimConfig,
    rng: &mut ChaCha8Rng,
) -> Vec<LinkOutcome> {
    let at = tx.event.timestamp_ms + cfg.latency_ms;
    nodes.values().filter_map(|r| link(sender, tx, r, at, cfg, rng)).collect()
}

/// Immediate attempts at `now` for every transmission `scanner` can hear,
/// as (sender id, outcome).
pub fn manual_scan(
    scanner: &NodeState,
    nodes: &BTreeMap<String, NodeState>,
    now: u64,
    cfg: &SimConfig,
    rng: &mut ChaCha8Rng,
) -> Vec<(String, LinkOutcome)> {
    nodes
        .values()
        .filter_map(|s| {
            let tx = s.active_tx(now)?;
            link(s, tx, scanner, now, cfg, rng).map(|o| (s.user_id.clone(), o))
        })
        .collect()
}

/// Records a reception and queues its vibration. Returns `false` for a
/// repeat of an event already received.
pub fn on_receive(node: &mut NodeState, event: &GestureEvent, now: u64, timing: &Timing) -> Result<bool> {
    if !node.seen.insert((event.user_id.clone(), event.timestamp_ms)) {
        return Ok(false);
    }
    let timeline = morse_to_timeline_with(&gesture_to_morse(event.gesture)?, timing)?;
    node.vibration_queue.push(timeline);
    node.inbox.push(InboxEntry {
        from: event.user_id.clone(),
        gesture: event.gesture,
        location: event.location,
        sent_at_ms: event.timestamp_ms,
        received_at_ms: now,
    });
    Ok(true)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Action {
    Gesture {
        label: GestureLabel,
        confidence: f64,
    },
    Scan,
    /// Location tracking on or off.
    Gps(bool),
    /// A GPS fix.
    Locate {
        lat: f64,
        lon: f64,
    },
    Move {
        x: f64,
        y: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptLine {
    pub t_ms: u64,
    pub node: String,
    pub action: Action,
}

impl fmt::Display for ScriptLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} ", self.t_ms, self.node)?;
        match self.action {
            Action::Gesture { label, confidence: 1.0 } => write!(f, "gesture {label}"),
            Action::Gesture { label, confidence } => write!(f, "gesture {label} {confidence}"),
            Action::Scan => f.write_str("scan"),
            Action::Gps(on) => write!(f, "gps {}", if on { "on" } else { "off" }),
            Action::Locate { lat, lon } => write!(f, "locate {lat} {lon}"),
            Action::Move { x, y } => write!(f, "move {x} {y}"),
        }
    }
}

/// Parses `<t_ms> <node_id> <action> [args]` lines. Blank lines and lines
/// starting with `#` are skipped; times must not decrease.
pub fn parse_script(text: &str) -> Result<Vec<ScriptLine>> {
    let mut out: Vec<ScriptLine> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |msg: String| Error::MalformedScript { line, msg };
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = trimmed.split_whitespace().collect();
        if parts.len() < 3 {
            return Err(err("expected `<t_ms> <node> <action> [args]`".into()));
        }
        let t_ms: u64 = parts[0].parse().map_err(|_| err(format!("bad time {:?}", parts[0])))?;
        let num = |s: &str| -> Result<f64> {
            s.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| err(format!("bad number {s:?}")))
        };
        let args = &parts[3..];
        let arity = |n: usize| -> Result<()> {
            if args.len() == n {
                Ok(())
            } else {
                Err(err(format!("{} takes {n} argument(s)", parts[2])))
            }
        };
        let action = match parts[2] {
            "gesture" => {
                if args.is_empty() || args.len() > 2 {
                    return Err(err("gesture takes a label and an optional confidence".into()));
                }
                let label: GestureLabel = args[0].parse().map_err(|_| err(format!("unknown label {:?}", args[0])))?;
                let confidence = args.get(1).map(|s| num(s)).transpose()?.unwrap_or(1.0);
                if !(0.0..=1.0).contains(&confidence) {
                    return Err(err("confidence must lie in [0, 1]".into()));
                }
                Action::Gesture { label, confidence }
            }
            "scan" => {
                arity(0)?;
                Action::Scan
            }
            "gps" => {
                arity(1)?;
                match args[0] {
                    "on" => Action::Gps(true),
                    "off" => Action::Gps(false),
                    other => return Err(err(format!("gps takes on|off, got {other:?}"))),
                }
            }
            "locate" => {
                arity(2)?;
                Action::Locate { lat: num(args[0])?, lon: num(args[1])? }
            }
            "move" => {
                arity(2)?;
                Action::Move { x: num(args[0])?, y: num(args[1])? }
            }
            other => return Err(err(format!("unknown action {other:?}"))),
        };
        if out.last().is_some_and(|p| p.t_ms > t_ms) {
            return Err(err("time goes backwards".into()));
        }
        out.push(ScriptLine { t_ms, node: parts[1].to_string(), action });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
enum Ev {
    Arrive { sender: String, event: GestureEvent },
    Expire { started_ms: u64 },
    Act(Action),
}

/// Internal events run before script actions at the same millisecond.
type Key = (u64, u8, u64);

pub struct Simulator {
    cfg: SimConfig,
    nodes: BTreeMap<String, NodeState>,
    queue: BTreeMap<Key, (String, Ev)>,
    seq: u64,
    rng: ChaCha8Rng,
    log: Vec<String>,
    now: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioResult {
    pub log: Vec<String>,
    pub nodes: BTreeMap<String, NodeState>,
    pub end_ms: u64,
}

impl ScenarioResult {
    pub fn log_text(&self) -> String {
        let mut s = String::new();
        for l in &self.log {
            s.push_str(l);
            s.push('\n');
        }
        s
    }

    /// One line per node describing its final state.
    pub fn summary(&self) -> Vec<String> {
        self.nodes
            .values()
            .map(|n| {
                format!(
                    "{} mode={} last_sent={} inbox={} vibrations={} pending={}",
                    n.user_id,
                    n.mode(self.end_ms),
                    n.last_sent_gesture.map_or_else(|| "none".to_string(), |g| g.to_string()),
                    n.inbox.len(),
                    n.vibration_queue.len(),
                    n.pending.as_ref().map_or_else(|| "none".to_string(), |e| e.gesture.to_string()),
                )
            })
            .collect()
    }
}

impl Simulator {
    pub fn new(cfg: SimConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Simulator {
            cfg,
            nodes: BTreeMap::new(),
            queue: BTreeMap::new(),
            seq: 0,
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            log: Vec::new(),
            now: 0,
        })
    }

    pub fn nodes(&self) -> &BTreeMap<String, NodeState> {
        &self.nodes
    }

    fn push(&mut self, t: u64, class: u8, node: String, ev: Ev) {
        self.seq += 1;
        self.queue.insert((t, class, self.seq), (node, ev));
    }

    pub fn schedule(&mut self, line: &ScriptLine) {
        self.push(line.t_ms, 1, line.node.clone(), Ev::Act(line.action));
    }

    fn log(&mut self, node: &str, event: &str, details: &str) {
        let mut s = String::new();
        let _ = write!(s, "{} {} {}", self.now, node, event);
        if !details.is_empty() {
            s.push(' ');
            s.push_str(details);
        }
        self.log.push(s);
    }

    fn node(&mut self, id: &str) -> &mut NodeState {
        self.nodes.entry(id.to_string()).or_insert_with(|| NodeState::new(id))
    }

    fn announce(&mut self, id: &str, tx: Transmission) {
        let e = &tx.event;
        let details = format!("{} loc={} until={}", e.gesture, show_loc(&e.location), tx.expires_at_ms);
        self.log(id, "tx_start", &details);
        self.push(tx.expires_at_ms + 1, 0, id.to_string(), Ev::Expire { started_ms: e.timestamp_ms });
        let sender = self.nodes[id].clone();
        let outcomes = deliver(&sender, &tx, &self.nodes, &self.cfg, &mut self.rng);
        for o in outcomes {
            match o {
                LinkOutcome::Scheduled { receiver, at_ms } => {
                    self.push(at_ms, 0, receiver, Ev::Arrive { sender: id.to_string(), event: tx.event.clone() })
                }
                LinkOutcome::Dropped { receiver } => {
                    let d = format!("{id} {}", tx.event.gesture);
                    self.log(&receiver, "drop", &d);
                }
            }
        }
    }

    fn receive(&mut self, id: &str, sender: &str, event: &GestureEvent) -> Result<()> {
        let timing = self.cfg.timing;
        let now = self.now;
        if on_receive(self.node(id), event, now, &timing)? {
            let code = gesture_to_morse(event.gesture)?;
            let total = self.nodes[id].vibration_queue.last().map_or(0, |t| t.total_ms());
            let d = format!("{sender} {} loc={}", event.gesture, show_loc(&event.location));
            self.log(id, "recv", &d);
            self.log(id, "vibrate", &format!("{code} {total}ms"));
        }
        Ok(())
    }

    fn act(&mut self, id: &str, action: Action) -> Result<()> {
        let now = self.now;
        let cfg = self.cfg;
        match action {
            Action::Gesture { label, confidence } => {
                self.log(id, "gesture", &format!("{label} {confidence:.2}"));
                self.node(id).last_recognized = Some((label, confidence));
                if let Err(reason) = should_transmit(self.node(id), label, now, &cfg) {
                    self.log(id, "blocked", &format!("{reason} {label}"));
                    return Ok(());
                }
                match begin_transmit(self.node(id), label, confidence, now, &cfg)? {
                    TxStart::Started(tx) => self.announce(id, tx),
                    TxStart::Pending { replaced } => {
                        if let Some(old) = replaced {
                            self.log(id, "pending_replaced", &old.gesture.to_string());
                        }
                        self.log(id, "pending", &format!("{label} awaiting-fix"));
                    }
                }
            }
            Action::Scan => {
                self.log(id, "scan", "");
                self.node(id);
                let scanner = self.nodes[id].clone();
                let outcomes = manual_scan(&scanner, &self.nodes, now, &cfg, &mut self.rng);
                for (sender, o) in outcomes {
                    let event = self.nodes[&sender].current_tx.as_ref().map(|t| t.event.clone());
                    let Some(event) = event else { continue };
                    match o {
                        LinkOutcome::Scheduled { .. } => self.receive(id, &sender, &event)?,
                        LinkOutcome::Dropped { .. } => self.log(id, "drop", &format!("{sender} {}", event.gesture)),
                    }
                }
            }
            Action::Gps(on) => {
                self.node(id).location_enabled = on;
                self.log(id, "gps", if on { "on" } else { "off" });
                if let Some(tx) = promote_pending(self.node(id), now, &cfg) {
                    self.announce(id, tx);
                }
            }
            Action::Locate { lat, lon } => {
                let n = self.node(id);
                n.gps_available = true;
                n.location = Some(Location { lat, lon });
                self.log(id, "locate", &format!("{lat} {lon}"));
                if let Some(tx) = promote_pending(self.node(id), now, &cfg) {
                    self.announce(id, tx);
                }
            }
            Action::Move { x, y } => {
                self.node(id).position = [x, y];
                self.log(id, "move", &format!("{x} {y}"));
            }
        }
        Ok(())
    }

    /// Processes queued events up to and including `until_ms`.
    pub fn run_until(&mut self, until_ms: u64) -> Result<()> {
        while let Some(entry) = self.queue.first_entry() {
            if entry.key().0 > until_ms {
                break;
            }
            let ((t, _, _), (id, ev)) = entry.remove_entry();
            self.now = t;
            match ev {
                Ev::Act(a) => self.act(&id, a)?,
                Ev::Arrive { sender, event } => self.receive(&id, &sender, &event)?,
                Ev::Expire { started_ms } => {
                    let n = self.node(&id);
                    if n.current_tx.as_ref().is_some_and(|tx| tx.event.timestamp_ms == started_ms) {
                        let g = n.current_tx.take().map(|tx| tx.event.gesture);
                        self.log(&id, "tx_end", &g.map(|g| g.to_string()).unwrap_or_default());
                    }
                }
            }
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<ScenarioResult> {
        self.run_until(u64::MAX)?;
        Ok(ScenarioResult { log: self.log, nodes: self.nodes, end_ms: self.now })
    }
}

/// Runs a whole script; the log covers every event until the queue drains.
pub fn run_scenario(script: &[ScriptLine], cfg: &SimConfig) -> Result<ScenarioResult> {
    let mut sim = Simulator::new(*cfg)?;
    for line in script {
        sim.schedule(line);
    }
    sim.finish()
}

/// Text rendering of a node's Messages screen.
pub fn watch_panel(node: &NodeState, now: u64) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "== received ==");
    if node.inbox.is_empty() {
        let _ = writeln!(s, "(none)");
    }
    for m in &node.inbox {
        let _ = writeln!(
            s,
            "{} {} {} loc={} at={}",
            m.from,
            m.gesture,
            m.gesture.name(),
            show_loc(&m.location),
            m.received_at_ms
        );
    }
    let _ = writeln!(s, "== own ==");
    let _ = writeln!(s, "id: {}", node.user_id);
    let _ = writeln!(s, "mode: {}", node.mode(now));
    match node.last_recognized {
        Some((g, c)) => {
            let _ = writeln!(s, "last gesture: {g} ({c:.2})");
        }
        None => {
            let _ = writeln!(s, "last gesture: none");
        }
    }
    s
}
