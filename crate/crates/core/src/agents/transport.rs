//! Byte transports carrying protocol lines.

use std::collections::VecDeque;
use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::Duration;

use super::AgentError;

pub trait Transport: Send {
    fn send(&mut self, line: &str) -> Result<(), AgentError>;
    /// Next line from the peer, waiting at most `timeout`.
    fn recv(&mut self, timeout: Duration) -> Result<String, AgentError>;
}

/// A child process speaking the protocol on stdin/stdout. The child is
/// killed when the transport is dropped.
pub struct Subprocess {
    child: Child,
    stdin: Option<ChildStdin>,
    lines: Receiver<std::io::Result<String>>,
}

impl Subprocess {
    pub fn spawn(program: &str, args: &[String]) -> Result<Self, AgentError> {
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| AgentError::Transport(format!("cannot start `{program}`: {e}")))?;
        let stdin = child.stdin.take();
        let stdout = child.stdout.take().expect("stdout is piped");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let stop = line.is_err();
                if tx.send(line).is_err() || stop {
                    break;
                }
            }
        });
        Ok(Subprocess { child, stdin, lines: rx })
    }
}

impl Transport for Subprocess {
    fn send(&mut self, line: &str) -> Result<(), AgentError> {
        let stdin = self.stdin.as_mut().ok_or(AgentError::StreamClosed)?;
        let written = stdin.write_all(line.as_bytes()).and_then(|_| stdin.write_all(b"\n")).and_then(|_| stdin.flush());
        written.map_err(|e| match e.kind() {
            std::io::ErrorKind::BrokenPipe => AgentError::StreamClosed,
            _ => AgentError::Transport(e.to_string()),
        })
    }

    fn recv(&mut self, timeout: Duration) -> Result<String, AgentError> {
        match self.lines.recv_timeout(timeout) {
            Ok(Ok(line)) => Ok(line),
            Ok(Err(e)) => Err(AgentError::Transport(e.to_string())),
            Err(RecvTimeoutError::Timeout) => Err(AgentError::Timeout(timeout)),
            Err(RecvTimeoutError::Disconnected) => Err(AgentError::StreamClosed),
        }
    }
}

impl Drop for Subprocess {
    fn drop(&mut self) {
        self.stdin.take();
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// Each outgoing line is POSTed to `url`; a non-empty response body is the
/// peer's reply.
pub struct Http {
    url: String,
    agent: ureq::Agent,
    timeout: Duration,
    pending: VecDeque<String>,
}

impl Http {
    pub fn new(url: &str, timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder().timeout_global(Some(timeout)).build().into();
        Http { url: url.to_string(), agent, timeout, pending: VecDeque::new() }
    }
}

impl Transport for Http {
    fn send(&mut self, line: &str) -> Result<(), AgentError> {
        let mut resp = self
            .agent
            .post(&self.url)
            .header("content-type", "application/json")
            .send(line)
            .map_err(|e| match e {
                ureq::Error::Timeout(_) => AgentError::Timeout(self.timeout),
                other => AgentError::Transport(other.to_string()),
            })?;
        let body = resp.body_mut().read_to_string().map_err(|e| AgentError::Transport(e.to_string()))?;
        if !body.trim().is_empty() {
            self.pending.push_back(body.trim().to_string());
        }
        Ok(())
    }

    fn recv(&mut self, _timeout: Duration) -> Result<String, AgentError> {
        self.pending.pop_front().ok_or(AgentError::StreamClosed)
    }
}

/// What an in-process peer does with a message.
#[derive(Debug, Clone, PartialEq)]
pub enum Reply {
    Line(String),
    /// Never answers; the next receive times out.
    Silence,
    /// Hangs up.
    Close,
}

/// In-process peer driven by a closure, for tests and embedding.
pub struct FnTransport<F> {
    respond: F,
    queue: VecDeque<Reply>,
    closed: bool,
}

impl<F: FnMut(&str) -> Reply + Send> FnTransport<F> {
    pub fn new(respond: F) -> Self {
        FnTransport { respond, queue: VecDeque::new(), closed: false }
    }
}

impl<F: FnMut(&str) -> Reply + Send> Transport for FnTransport<F> {
    fn send(&mut self, line: &str) -> Result<(), AgentError> {
        if self.closed {
            return Err(AgentError::StreamClosed);
        }
        let reply = (self.respond)(line);
        self.queue.push_back(reply);
        Ok(())
    }

    fn recv(&mut self, timeout: Duration) -> Result<String, AgentError> {
        match self.queue.pop_front() {
            Some(Reply::Line(l)) => Ok(l),
            Some(Reply::Silence) => Err(AgentError::Timeout(timeout)),
            Some(Reply::Close) | None => {
                self.closed = true;
                Err(AgentError::StreamClosed)
            }
        }
    }
}
