//! External objectives over newline-delimited JSON.
//!
//! ```text
//! -> {"type":"hello","dim":256}          <- {"type":"ready"}
//! -> {"type":"eval","gen":3,"codes":[[...],...]}
//! <- {"type":"scores","gen":3,"scores":[...]}
//! -> {"type":"bye"}
//! ```
//!
//! Floats are written with 17 significant digits. A reply that is late,
//! malformed, for the wrong generation or of the wrong length is an error;
//! it never turns into a score.

use std::io::{BufRead, BufReader, BufWriter, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::time::Duration;

use serde::Deserialize;

use super::{check_dims, NoiseSpec, Objective, ObjectiveError, ScoreRecord};

/// Line-oriented message channel to a peer.
pub trait Transport: Send {
    fn send(&mut self, line: &str) -> Result<(), ObjectiveError>;
    /// Next line from the peer, without its terminator.
    fn recv(&mut self, timeout: Duration) -> Result<String, ObjectiveError>;
}

fn push_f64(out: &mut String, x: f64) {
    use std::fmt::Write as _;
    write!(out, "{x:.16e}").expect("writing to a String");
}

pub fn hello_message(dim: usize) -> String {
    format!("{{\"type\":\"hello\",\"dim\":{dim}}}")
}

pub fn eval_message(gen: usize, codes: &[Vec<f64>]) -> String {
    let mut s = format!("{{\"type\":\"eval\",\"gen\":{gen},\"codes\":[");
    for (i, c) in codes.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        s.push('[');
        for (j, x) in c.iter().enumerate() {
            if j > 0 {
                s.push(',');
            }
            push_f64(&mut s, *x);
        }
        s.push(']');
    }
    s.push_str("]}");
    s
}

pub fn scores_message(gen: u64, scores: &[f64]) -> String {
    let mut s = format!("{{\"type\":\"scores\",\"gen\":{gen},\"scores\":[");
    for (i, x) in scores.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        push_f64(&mut s, *x);
    }
    s.push_str("]}");
    s
}

pub const READY_MESSAGE: &str = "{\"type\":\"ready\"}";
pub const BYE_MESSAGE: &str = "{\"type\":\"bye\"}";

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScoresReply {
    #[serde(rename = "type")]
    kind: String,
    gen: u64,
    scores: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ReadyReply {
    #[serde(rename = "type")]
    kind: String,
}

/// Validate a scores reply for generation `gen` carrying `n` scores.
pub fn parse_scores(line: &str, gen: usize, n: usize) -> Result<Vec<f64>, ObjectiveError> {
    let bad = |m: String| ObjectiveError::ProtocolError(m);
    let reply: ScoresReply =
        serde_json::from_str(line).map_err(|e| bad(format!("malformed reply: {e}")))?;
    if reply.kind != "scores" {
        return Err(bad(format!(
            "expected a scores message, got type {:?}",
            reply.kind
        )));
    }
    if reply.gen != gen as u64 {
        return Err(bad(format!(
            "reply for generation {} while waiting for {gen}",
            reply.gen
        )));
    }
    if reply.scores.len() != n {
        return Err(bad(format!("{} scores for {n} codes", reply.scores.len())));
    }
    if reply.scores.iter().any(|s| !s.is_finite()) {
        return Err(bad("non-finite score".into()));
    }
    Ok(reply.scores)
}

/// Objective answered by a peer. Optionally applies the noise model on top
/// of the peer's responses.
pub struct ExternalObjective {
    transport: Box<dyn Transport>,
    dim: usize,
    timeout: Duration,
    noise: NoiseSpec,
    requests: usize,
    closed: bool,
}

impl ExternalObjective {
    /// Perform the handshake.
    pub fn connect(
        mut transport: Box<dyn Transport>,
        dim: usize,
        timeout: Duration,
        noise: NoiseSpec,
    ) -> Result<Self, ObjectiveError> {
        transport.send(&hello_message(dim))?;
        let line = transport.recv(timeout)?;
        match serde_json::from_str::<ReadyReply>(&line) {
            Ok(r) if r.kind == "ready" => {}
            _ => {
                return Err(ObjectiveError::ProtocolError(format!(
                    "expected ready, got {line:?}"
                )))
            }
        }
        Ok(Self {
            transport,
            dim,
            timeout,
            noise,
            requests: 0,
            closed: false,
        })
    }

    /// Number of eval requests sent so far.
    pub fn requests(&self) -> usize {
        self.requests
    }

    pub fn close(&mut self) -> Result<(), ObjectiveError> {
        if !self.closed {
            self.closed = true;
            self.transport.send(BYE_MESSAGE)?;
        }
        Ok(())
    }
}

impl Drop for ExternalObjective {
    fn drop(&mut self) {
        let _ = self.close();
    }
}

impl Objective for ExternalObjective {
    fn dim(&self) -> usize {
        self.dim
    }

    fn evaluate(
        &mut self,
        gen: usize,
        codes: &[Vec<f64>],
    ) -> Result<Vec<ScoreRecord>, ObjectiveError> {
        check_dims(codes, self.dim)?;
        if self.closed {
            return Err(ObjectiveError::ProtocolError(
                "connection already closed".into(),
            ));
        }
        self.transport.send(&eval_message(gen, codes))?;
        self.requests += 1;
        let line = self.transport.recv(self.timeout)?;
        let scores = parse_scores(&line, gen, codes.len())?;
        Ok(scores
            .into_iter()
            .enumerate()
            .map(|(i, raw)| {
                let noisy = if self.noise.alpha == 0.0 {
                    raw
                } else {
                    self.noise.apply(raw, gen, i)
                };
                ScoreRecord {
                    raw,
                    noisy,
                    clean: raw,
                }
            })
            .collect())
    }
}

/// Peer running as a child process, spoken to over its stdin and stdout.
pub struct ChildTransport {
    child: Child,
    stdin: Option<BufWriter<ChildStdin>>,
    lines: Receiver<Result<String, String>>,
}

impl ChildTransport {
    pub fn spawn(mut command: Command) -> Result<Self, ObjectiveError> {
        let mut child = command
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()?;
        let stdin = child.stdin.take().map(BufWriter::new);
        let stdout = child.stdout.take().expect("stdout is piped");
        let (tx, rx) = mpsc::channel();
        std::thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let msg = line.map_err(|e| e.to_string());
                let stop = msg.is_err();
                if tx.send(msg).is_err() || stop {
                    break;
                }
            }
        });
        Ok(Self {
            child,
            stdin,
            lines: rx,
        })
    }

    fn exit_description(&mut self) -> String {
        match self.child.try_wait() {
            Ok(Some(status)) => format!("peer exited with {status}"),
            _ => "peer closed its output".to_string(),
        }
    }
}

impl Transport for ChildTransport {
    fn send(&mut self, line: &str) -> Result<(), ObjectiveError> {
        let Some(stdin) = self.stdin.as_mut() else {
            return Err(ObjectiveError::PeerCrash("input already closed".into()));
        };
        let res = stdin
            .write_all(line.as_bytes())
            .and_then(|_| stdin.write_all(b"\n"))
            .and_then(|_| stdin.flush());
        res.map_err(|e| ObjectiveError::PeerCrash(format!("write failed: {e}")))
    }

    fn recv(&mut self, timeout: Duration) -> Result<String, ObjectiveError> {
        match self.lines.recv_timeout(timeout) {
            Ok(Ok(line)) => Ok(line),
            Ok(Err(e)) => Err(ObjectiveError::ProtocolError(format!(
                "unreadable reply: {e}"
            ))),
            Err(RecvTimeoutError::Timeout) => Err(ObjectiveError::PeerTimeout(timeout)),
            Err(RecvTimeoutError::Disconnected) => {
                // give the process a moment to be reaped for a useful message
                std::thread::sleep(Duration::from_millis(20));
                Err(ObjectiveError::PeerCrash(self.exit_description()))
            }
        }
    }
}

impl Drop for ChildTransport {
    fn drop(&mut self) {
        self.stdin = None;
        for _ in 0..50 {
            if let Ok(Some(_)) = self.child.try_wait() {
                return;
            }
            std::thread::sleep(Duration::from_millis(10));
        }
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

type Responder = Box<dyn FnMut(&str) -> Vec<String> + Send>;

/// In-process peer: every sent line is handed to a closure whose returned
/// lines become the replies. An empty queue times out immediately.
pub struct LoopbackTransport {
    responder: Responder,
    queue: std::collections::VecDeque<String>,
    pub sent: Vec<String>,
}

impl LoopbackTransport {
    pub fn new(responder: impl FnMut(&str) -> Vec<String> + Send + 'static) -> Self {
        Self {
            responder: Box::new(responder),
            queue: Default::default(),
            sent: Vec::new(),
        }
    }

    /// Loopback running the reference peer logic in `mode`.
    pub fn peer(mode: PeerMode) -> Self {
        let mut state = PeerState::new(mode);
        Self::new(move |line| state.handle(line).unwrap_or_default())
    }
}

impl Transport for LoopbackTransport {
    fn send(&mut self, line: &str) -> Result<(), ObjectiveError> {
        self.sent.push(line.to_string());
        let replies = (self.responder)(line);
        self.queue.extend(replies);
        Ok(())
    }

    fn recv(&mut self, timeout: Duration) -> Result<String, ObjectiveError> {
        self.queue
            .pop_front()
            .ok_or(ObjectiveError::PeerTimeout(timeout))
    }
}

/// Behaviour of the reference peer. Everything except `Echo` is a fault
/// injection for protocol tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PeerMode {
    /// Score each code by its first coordinate.
    Echo,
    /// One score too many.
    WrongLength,
    /// Echo the wrong generation.
    WrongGen,
    /// Reply with a line that is not JSON.
    Garbage,
    /// Reply with the right shape but a non-numeric score.
    NonNumeric,
    /// Never answer eval requests.
    Silent,
    /// Exit after answering this many eval requests.
    CrashAfter(usize),
}

impl std::str::FromStr for PeerMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "echo" => Self::Echo,
            "wrong-length" => Self::WrongLength,
            "wrong-gen" => Self::WrongGen,
            "garbage" => Self::Garbage,
            "non-numeric" => Self::NonNumeric,
            "silent" => Self::Silent,
            other => match other
                .strip_prefix("crash-after-")
                .and_then(|n| n.parse().ok())
            {
                Some(n) => Self::CrashAfter(n),
                None => return Err(format!("unknown peer mode {other:?}")),
            },
        })
    }
}

/// Protocol state of the reference peer.
pub struct PeerState {
    mode: PeerMode,
    answered: usize,
}

impl PeerState {
    pub fn new(mode: PeerMode) -> Self {
        Self { mode, answered: 0 }
    }

    /// Replies to one incoming line; `None` means the peer should exit.
    pub fn handle(&mut self, line: &str) -> Option<Vec<String>> {
        let msg: serde_json::Value = match serde_json::from_str(line) {
            Ok(v) => v,
            Err(_) => return Some(vec![]),
        };
        match msg.get("type").and_then(|t| t.as_str()) {
            Some("hello") => Some(vec![READY_MESSAGE.to_string()]),
            Some("bye") => None,
            Some("eval") => {
                if let PeerMode::CrashAfter(n) = self.mode {
                    if self.answered >= n {
                        return None;
                    }
                }
                let gen = msg.get("gen").and_then(|g| g.as_u64()).unwrap_or(0);
                let codes = msg
                    .get("codes")
                    .and_then(|c| c.as_array())
                    .cloned()
                    .unwrap_or_default();
                let mut scores: Vec<f64> = codes
                    .iter()
                    .map(|c| c.get(0).and_then(|x| x.as_f64()).unwrap_or(0.0))
                    .collect();
                self.answered += 1;
                let reply = match self.mode {
                    PeerMode::Echo | PeerMode::CrashAfter(_) => scores_message(gen, &scores),
                    PeerMode::WrongLength => {
                        scores.push(0.0);
                        scores_message(gen, &scores)
                    }
                    PeerMode::WrongGen => scores_message(gen + 1, &scores),
                    PeerMode::Garbage => "scores: all good".to_string(),
                    PeerMode::NonNumeric => {
                        let fake = vec!["\"high\""; scores.len()].join(",");
                        format!("{{\"type\":\"scores\",\"gen\":{gen},\"scores\":[{fake}]}}")
                    }
                    PeerMode::Silent => return Some(vec![]),
                };
                Some(vec![reply])
            }
            _ => Some(vec![]),
        }
    }
}

/// Serve the protocol on the given streams until `bye`, end of input or a
/// simulated crash.
pub fn run_peer<R: BufRead, W: Write>(
    input: R,
    mut output: W,
    mode: PeerMode,
) -> std::io::Result<()> {
    let mut state = PeerState::new(mode);
    for line in input.lines() {
        match state.handle(&line?) {
            Some(replies) => {
                for r in replies {
                    writeln!(output, "{r}")?;
                }
                output.flush()?;
            }
            None => break,
        }
    }
    Ok(())
}
