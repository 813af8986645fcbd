//! Line-delimited JSON messages between the debugger and a remote oracle.

use std::io::{BufRead, BufReader, ErrorKind, Write};
use std::net::{TcpListener, ToSocketAddrs};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{Answer, BugReport, DebugError, DebugOutcome, DebugTree, Diagnosis, NodeClass, Oracle, Session};
use crate::bilattice::TruthValue4;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Message {
    Ask {
        id: usize,
        atom: String,
        kind: Diagnosis,
    },
    Answer {
        id: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        class: Option<NodeClass>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        value: Option<TruthValue4>,
    },
    Bug(BugReport),
    #[serde(rename = "nobug")]
    NoBug {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        notice: Option<String>,
    },
}

impl Message {
    pub fn answer(id: usize, a: Answer) -> Message {
        match a {
            Answer::Class(c) => Message::Answer { id, class: Some(c), value: None },
            Answer::Value(v) => Message::Answer { id, class: None, value: Some(v) },
        }
    }

    pub fn outcome(o: &DebugOutcome) -> Message {
        match o {
            DebugOutcome::Bug(r) => Message::Bug(r.clone()),
            DebugOutcome::NoBug { inadmissible } => {
                Message::NoBug { notice: inadmissible.then(|| "inadmissible query".to_string()) }
            }
        }
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("messages serialize")
    }

    pub fn parse(line: &str) -> Result<Message, DebugError> {
        serde_json::from_str(line).map_err(|e| DebugError::Protocol(format!("{}: {}", e, line.trim())))
    }
}

/// Reads the answer to an answer message, checking it is for `id`.
fn accept(m: Message, id: usize) -> Result<Answer, DebugError> {
    match m {
        Message::Answer { id: got, class, value } if got == id => match (class, value) {
            (Some(c), None) => Ok(Answer::Class(c)),
            (None, Some(v)) => Ok(Answer::Value(v)),
            _ => Err(DebugError::Protocol("an answer needs exactly one of class and value".into())),
        },
        Message::Answer { id: got, .. } => Err(DebugError::Protocol(format!("answer for node {} while asking {}", got, id))),
        other => Err(DebugError::Protocol(format!("expected an answer, got {}", other.to_line()))),
    }
}

/// An oracle on the other end of a line stream.
pub struct JsonOracle<R, W> {
    reader: R,
    writer: W,
}

impl<R: BufRead, W: Write> JsonOracle<R, W> {
    pub fn new(reader: R, writer: W) -> Self {
        JsonOracle { reader, writer }
    }

    pub fn send(&mut self, m: &Message) -> Result<(), DebugError> {
        writeln!(self.writer, "{}", m.to_line())?;
        self.writer.flush()?;
        Ok(())
    }

    /// Runs a whole session: asks over the stream and finishes with the bug
    /// or nobug message.
    pub fn run(mut self, tree: &DebugTree, kind: Diagnosis) -> Result<(DebugOutcome, Vec<Message>), DebugError> {
        let mut session = Session::new(&mut self, kind);
        let outcome = session.find_bug(tree)?;
        let transcript = std::mem::take(&mut session.transcript);
        drop(session);
        self.send(transcript.last().expect("the outcome is recorded"))?;
        Ok((outcome, transcript))
    }
}

impl<R: BufRead, W: Write> Oracle for JsonOracle<R, W> {
    fn ask(&mut self, node: &DebugTree, kind: Diagnosis) -> Result<Answer, DebugError> {
        self.send(&Message::Ask { id: node.id, atom: node.literal(), kind })?;
        loop {
            let mut line = String::new();
            let n = self.reader.read_line(&mut line).map_err(|e| match e.kind() {
                ErrorKind::WouldBlock | ErrorKind::TimedOut => DebugError::Timeout,
                _ => DebugError::Io(e),
            })?;
            if n == 0 {
                return Err(DebugError::Disconnected);
            }
            if line.trim().is_empty() {
                continue;
            }
            return accept(Message::parse(&line)?, node.id);
        }
    }
}

/// Answers taken in order from a recorded transcript. Non-answer messages in
/// the transcript are skipped.
pub struct ReplayOracle {
    answers: std::vec::IntoIter<Message>,
}

impl ReplayOracle {
    pub fn parse(src: &str) -> Result<ReplayOracle, DebugError> {
        let mut answers = Vec::new();
        for line in src.lines().filter(|l| !l.trim().is_empty()) {
            let m = Message::parse(line)?;
            if matches!(m, Message::Answer { .. }) {
                answers.push(m);
            }
        }
        Ok(ReplayOracle { answers: answers.into_iter() })
    }
}

impl Oracle for ReplayOracle {
    fn ask(&mut self, node: &DebugTree, _: Diagnosis) -> Result<Answer, DebugError> {
        let m = self.answers.next().ok_or(DebugError::Disconnected)?;
        accept(m, node.id)
    }
}

/// Serve one session on a local TCP port. `on_bound` receives the actual
/// address before the server blocks waiting for a client.
pub fn serve_tcp(
    addr: impl ToSocketAddrs,
    tree: &DebugTree,
    kind: Diagnosis,
    timeout: Option<Duration>,
    on_bound: impl FnOnce(std::net::SocketAddr),
) -> Result<(DebugOutcome, Vec<Message>), DebugError> {
    let listener = TcpListener::bind(addr)?;
    on_bound(listener.local_addr()?);
    let (stream, _) = listener.accept()?;
    stream.set_read_timeout(timeout)?;
    let reader = BufReader::new(stream.try_clone()?);
    JsonOracle::new(reader, stream).run(tree, kind)
}
