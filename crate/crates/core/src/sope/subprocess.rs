//! Line-delimited JSON protocol spoken with an external tracker process.
//!
//! ```text
//! harness -> tracker  {"cmd":"init","seq":"<id>","frame":"<path>","repr":"box","box":[x,y,w,h]}
//! tracker -> harness  {"status":"ok"}
//! harness -> tracker  {"cmd":"track","t":<int>,"frame":"<path>"}
//! tracker -> harness  {"t":<int>,"box":[...]} | {"t":<int>,"rle":{...}} | {"t":<int>,"absent":true}
//! harness -> tracker  {"cmd":"end"}          (tracker must exit 0)
//! ```
//!
//! One process is spawned per (pair, view) run. The sequence id and view
//! are also exported as `VISTA_SEQ` and `VISTA_VIEW`.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use serde::Serialize;

use super::{InitRequest, TrackerDriver, TrackerSession};
use crate::error::{Error, Result};
use crate::geometry::{BBox, BinaryMask};
use crate::metrics::ScoreMode;
use crate::model::{SequencePair, TargetState, View};

pub const DEFAULT_FRAME_TIMEOUT: Duration = Duration::from_secs(60);

const STDERR_TAIL_LINES: usize = 20;

#[derive(Debug, Clone)]
pub struct SubprocessDriver {
    command: String,
    repr: ScoreMode,
    timeout: Duration,
}

impl SubprocessDriver {
    /// `command` is run through `sh -c`.
    pub fn new(command: impl Into<String>, repr: ScoreMode) -> Self {
        Self {
            command: command.into(),
            repr,
            timeout: DEFAULT_FRAME_TIMEOUT,
        }
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    pub fn command(&self) -> &str {
        &self.command
    }
}

#[derive(Serialize)]
#[serde(tag = "cmd", rename_all = "lowercase")]
enum Request<'a> {
    Init {
        seq: &'a str,
        frame: &'a str,
        repr: ScoreMode,
        #[serde(rename = "box", skip_serializing_if = "Option::is_none")]
        bbox: Option<BBox>,
        #[serde(skip_serializing_if = "Option::is_none")]
        rle: Option<&'a BinaryMask>,
    },
    Track {
        t: u64,
        frame: &'a str,
    },
    End,
}

struct SubprocessSession {
    child: Child,
    stdin: Option<ChildStdin>,
    lines: Receiver<std::io::Result<String>>,
    stderr_tail: Arc<Mutex<Vec<String>>>,
    stderr_reader: Option<thread::JoinHandle<()>>,
    timeout: Duration,
    finished: bool,
}

impl SubprocessSession {
    /// Give the stderr reader a moment to drain after the process exited.
    fn drain_stderr(&mut self) {
        let deadline = Instant::now() + Duration::from_millis(200);
        if let Some(h) = &self.stderr_reader {
            while !h.is_finished() && Instant::now() < deadline {
                thread::sleep(Duration::from_millis(2));
            }
        }
    }

    fn diagnostics(&self) -> String {
        let tail = self.stderr_tail.lock().map(|t| t.join(" | ")).unwrap_or_default();
        if tail.is_empty() {
            String::new()
        } else {
            format!(" (stderr: {tail})")
        }
    }

    fn abort(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
        self.stdin = None;
        self.finished = true;
    }

    fn send(&mut self, req: &Request<'_>) -> Result<()> {
        let line = serde_json::to_string(req)?;
        let stdin = self
            .stdin
            .as_mut()
            .ok_or_else(|| Error::Driver("tracker stdin already closed".into()))?;
        let res = stdin
            .write_all(line.as_bytes())
            .and_then(|_| stdin.write_all(b"\n"))
            .and_then(|_| stdin.flush());
        if let Err(e) = res {
            let diag = self.diagnostics();
            self.abort();
            return Err(Error::Driver(format!("writing to tracker failed: {e}{diag}")));
        }
        Ok(())
    }

    fn recv(&mut self) -> Result<serde_json::Value> {
        match self.lines.recv_timeout(self.timeout) {
            Ok(Ok(line)) => serde_json::from_str(&line).map_err(|e| {
                self.abort();
                Error::Protocol(format!("malformed reply {:?}: {e}", truncate(&line)))
            }),
            Ok(Err(e)) => {
                self.abort();
                Err(Error::Driver(format!("reading from tracker failed: {e}")))
            }
            Err(RecvTimeoutError::Timeout) => {
                self.abort();
                Err(Error::Timeout(self.timeout))
            }
            Err(RecvTimeoutError::Disconnected) => {
                let status = self.child.wait().ok();
                self.drain_stderr();
                let diag = self.diagnostics();
                self.finished = true;
                Err(Error::Driver(format!(
                    "tracker closed its output{}{diag}",
                    status.map(|s| format!(" ({s})")).unwrap_or_default()
                )))
            }
        }
    }

    fn protocol_error(&mut self, msg: String) -> Error {
        self.abort();
        Error::Protocol(msg)
    }
}

fn truncate(s: &str) -> String {
    s.chars().take(120).collect()
}

/// Decode a `track` reply for frame `t`.
fn parse_reply(t: u64, value: &serde_json::Value) -> std::result::Result<TargetState, String> {
    let obj = value
        .as_object()
        .ok_or_else(|| format!("reply for t={t} is not a JSON object"))?;
    match obj.get("t").and_then(|v| v.as_u64()) {
        Some(got) if got == t => {}
        Some(got) => return Err(format!("expected reply for t={t}, got t={got}")),
        None => return Err(format!("reply for t={t} lacks an integer \"t\"")),
    }
    let bbox = obj.get("box");
    let rle = obj.get("rle");
    let absent = obj.get("absent");
    match (bbox, rle, absent) {
        (Some(b), None, None) => {
            let b: BBox = serde_json::from_value(b.clone()).map_err(|e| format!("bad box at t={t}: {e}"))?;
            if !b.is_finite() || b.w < 0.0 || b.h < 0.0 {
                return Err(format!("invalid box at t={t}: {:?}", b.to_array()));
            }
            Ok(TargetState::Box(b))
        }
        (None, Some(r), None) => serde_json::from_value::<BinaryMask>(r.clone())
            .map(TargetState::Mask)
            .map_err(|e| format!("bad rle at t={t}: {e}")),
        (None, None, Some(serde_json::Value::Bool(true))) => Ok(TargetState::Absent),
        _ => Err(format!(
            "reply for t={t} must carry exactly one of \"box\", \"rle\" or \"absent\": true"
        )),
    }
}

impl TrackerSession for SubprocessSession {
    fn init(&mut self, req: &InitRequest<'_>) -> Result<()> {
        let frame = req.frame.to_string_lossy();
        let (repr, bbox, rle) = match &req.state {
            TargetState::Box(b) => (ScoreMode::Box, Some(*b), None),
            TargetState::Mask(m) => (ScoreMode::Mask, None, Some(m)),
            TargetState::Absent => return Err(Error::InvalidArgument("cannot initialize on an absent target".into())),
        };
        self.send(&Request::Init {
            seq: req.seq,
            frame: &frame,
            repr,
            bbox,
            rle,
        })?;
        let reply = self.recv()?;
        match reply.get("status").and_then(|s| s.as_str()) {
            Some("ok") => Ok(()),
            Some(other) => Err(self.protocol_error(format!("init rejected with status {other:?}: {reply}"))),
            None => Err(self.protocol_error(format!("expected {{\"status\":\"ok\"}} after init, got {reply}"))),
        }
    }

    fn track(&mut self, t: u64, frame: &Path) -> Result<TargetState> {
        let frame = frame.to_string_lossy();
        self.send(&Request::Track { t, frame: &frame })?;
        let reply = self.recv()?;
        parse_reply(t, &reply).map_err(|msg| self.protocol_error(msg))
    }

    fn finish(mut self: Box<Self>) -> Result<()> {
        self.send(&Request::End)?;
        self.stdin = None;
        let deadline = Instant::now() + self.timeout;
        loop {
            match self.child.try_wait() {
                Ok(Some(status)) => {
                    self.finished = true;
                    if status.success() {
                        return Ok(());
                    }
                    self.drain_stderr();
                    let diag = self.diagnostics();
                    return Err(Error::Protocol(format!("tracker exited with {status} after end{diag}")));
                }
                Ok(None) if Instant::now() < deadline => thread::sleep(Duration::from_millis(5)),
                Ok(None) => {
                    self.abort();
                    return Err(Error::Timeout(self.timeout));
                }
                Err(e) => {
                    self.abort();
                    return Err(Error::Driver(format!("waiting for tracker failed: {e}")));
                }
            }
        }
    }
}

impl Drop for SubprocessSession {
    fn drop(&mut self) {
        if !self.finished {
            self.abort();
        }
    }
}

fn spawn_reader<R: Read + Send + 'static>(stream: R) -> Receiver<std::io::Result<String>> {
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        for line in BufReader::new(stream).lines() {
            let stop = line.is_err();
            if tx.send(line).is_err() || stop {
                break;
            }
        }
    });
    rx
}

impl TrackerDriver for SubprocessDriver {
    fn output_repr(&self) -> ScoreMode {
        self.repr
    }

    fn open(&self, pair: &SequencePair, view: View) -> Result<Box<dyn TrackerSession>> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(&self.command)
            .env("VISTA_SEQ", &pair.id)
            .env("VISTA_VIEW", view.as_str())
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| Error::Driver(format!("cannot start {:?}: {e}", self.command)))?;
        let stdin = child.stdin.take();
        let stdout = child.stdout.take().expect("stdout is piped");
        let stderr = child.stderr.take().expect("stderr is piped");
        let stderr_tail = Arc::new(Mutex::new(Vec::new()));
        let tail = Arc::clone(&stderr_tail);
        let stderr_reader = thread::spawn(move || {
            for line in BufReader::new(stderr).lines().map_while(|l| l.ok()) {
                if let Ok(mut t) = tail.lock() {
                    if t.len() == STDERR_TAIL_LINES {
                        t.remove(0);
                    }
                    t.push(line);
                }
            }
        });
        Ok(Box::new(SubprocessSession {
            child,
            stdin,
            lines: spawn_reader(stdout),
            stderr_tail,
            stderr_reader: Some(stderr_reader),
            timeout: self.timeout,
            finished: false,
        }))
    }

    fn describe(&self) -> String {
        format!("cmd:{}", self.command)
    }
}
