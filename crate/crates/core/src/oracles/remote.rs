// SPDX-License-Identifier: Apache-2.0

use std::io::{self, BufRead, BufReader, Write};
use std::net::TcpStream;
use std::process::{Child, Command, Stdio};
use std::thread;
use std::time::Duration;

use log::warn;
use serde_json::Value;

use super::protocol::{bye_request, classify_batch_request, classify_request, hello_request};
use super::{MembershipOracle, OracleError};
use crate::logic::PartialInterpretation;

/// One open byte stream to a remote classifier.
pub struct Connection {
    reader: Box<dyn BufRead + Send>,
    writer: Box<dyn Write + Send>,
    child: Option<Child>,
}

impl Connection {
    pub fn new(reader: impl BufRead + Send + 'static, writer: impl Write + Send + 'static) -> Self {
        Self { reader: Box::new(reader), writer: Box::new(writer), child: None }
    }

    pub fn tcp(addr: &str) -> io::Result<Self> {
        let stream = TcpStream::connect(addr)?;
        stream.set_nodelay(true)?;
        let reader = BufReader::new(stream.try_clone()?);
        Ok(Self::new(reader, stream))
    }

    /// Spawns `program args...` and talks to it over stdin/stdout.
    pub fn spawn(command: &[String]) -> io::Result<Self> {
        let (program, args) = command
            .split_first()
            .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "empty teacher command"))?;
        let mut child = Command::new(program).args(args).stdin(Stdio::piped()).stdout(Stdio::piped()).spawn()?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        Ok(Self { reader: Box::new(BufReader::new(stdout)), writer: Box::new(stdin), child: Some(child) })
    }

    fn send(&mut self, line: &str) -> io::Result<()> {
        let mut buf = Vec::with_capacity(line.len() + 1);
        buf.extend_from_slice(line.as_bytes());
        buf.push(b'\n');
        self.writer.write_all(&buf)?;
        self.writer.flush()
    }

    fn recv(&mut self) -> io::Result<String> {
        let mut line = String::new();
        if self.reader.read_line(&mut line)? == 0 {
            return Err(io::Error::new(io::ErrorKind::UnexpectedEof, "teacher closed the stream"));
        }
        Ok(line)
    }
}

impl Drop for Connection {
    fn drop(&mut self) {
        if let Some(mut child) = self.child.take() {
            let _ = self.send(&bye_request());
            // closing stdin lets a well-behaved child exit on its own
            self.writer = Box::new(io::sink());
            for _ in 0..20 {
                if let Ok(Some(_)) = child.try_wait() {
                    return;
                }
                thread::sleep(Duration::from_millis(10));
            }
            let _ = child.kill();
            let _ = child.wait();
        }
    }
}

type Connector = Box<dyn FnMut() -> io::Result<Connection> + Send>;

/// Membership teacher answered by a classifier over the line protocol.
///
/// Transport failures are retried on a fresh connection (with a new
/// handshake) up to `max_retries` times; protocol violations are not.
pub struct RemoteTeacher {
    connector: Connector,
    conn: Option<Connection>,
    n_vars: usize,
    model: String,
    next_id: u64,
    max_retries: u32,
    retry_delay: Duration,
}

impl RemoteTeacher {
    /// Connects and performs the handshake; the declared width must equal `n_vars`.
    pub fn connect(
        connector: impl FnMut() -> io::Result<Connection> + Send + 'static,
        n_vars: usize,
    ) -> Result<Self, OracleError> {
        let mut t = Self {
            connector: Box::new(connector),
            conn: None,
            n_vars,
            model: String::new(),
            next_id: 1,
            max_retries: 3,
            retry_delay: Duration::from_millis(50),
        };
        t.with_retries(|_| Ok(()))?;
        Ok(t)
    }

    pub fn tcp(addr: &str, n_vars: usize) -> Result<Self, OracleError> {
        let addr = addr.to_string();
        Self::connect(move || Connection::tcp(&addr), n_vars)
    }

    pub fn spawn(command: Vec<String>, n_vars: usize) -> Result<Self, OracleError> {
        Self::connect(move || Connection::spawn(&command), n_vars)
    }

    pub fn with_max_retries(mut self, retries: u32) -> Self {
        self.max_retries = retries;
        self
    }

    pub fn with_retry_delay(mut self, delay: Duration) -> Self {
        self.retry_delay = delay;
        self
    }

    /// Model name declared in the handshake.
    pub fn model(&self) -> &str {
        &self.model
    }

    fn handshake(&mut self, mut conn: Connection) -> Result<Connection, Attempt> {
        conn.send(&hello_request()).map_err(Attempt::Io)?;
        let line = conn.recv().map_err(Attempt::Io)?;
        let msg = parse(&line).map_err(Attempt::Fatal)?;
        if msg.get("op").and_then(Value::as_str) != Some("hello") {
            return Err(Attempt::Fatal(OracleError::Protocol(format!("expected hello reply, got {}", line.trim()))));
        }
        let declared = msg
            .get("n_vars")
            .and_then(Value::as_u64)
            .ok_or_else(|| Attempt::Fatal(OracleError::Protocol("hello reply lacks integer n_vars".into())))?;
        if declared as usize != self.n_vars {
            return Err(Attempt::Fatal(OracleError::Handshake { remote: declared as usize, local: self.n_vars }));
        }
        self.model = msg.get("model").and_then(Value::as_str).unwrap_or_default().to_string();
        Ok(conn)
    }

    fn with_retries<T>(&mut self, mut op: impl FnMut(&mut Connection) -> Result<T, Attempt>) -> Result<T, OracleError> {
        let mut attempts = 0u32;
        loop {
            attempts += 1;
            let result = match self.conn.take() {
                Some(c) => Ok(c),
                None => (self.connector)().map_err(Attempt::Io).and_then(|c| self.handshake(c)),
            }
            .and_then(|mut c| {
                let r = op(&mut c);
                if !matches!(r, Err(Attempt::Io(_))) {
                    self.conn = Some(c);
                }
                r
            });
            match result {
                Ok(v) => return Ok(v),
                Err(Attempt::Fatal(e)) => return Err(e),
                Err(Attempt::Io(e)) if attempts > self.max_retries => {
                    return Err(OracleError::Transport { attempts, source: e });
                }
                Err(Attempt::Io(e)) => {
                    warn!("teacher transport failure (attempt {attempts}): {e}; reconnecting");
                    thread::sleep(self.retry_delay);
                }
            }
        }
    }

    fn fresh_id(&mut self) -> u64 {
        let id = self.next_id;
        self.next_id += 1;
        id
    }
}

enum Attempt {
    Io(io::Error),
    Fatal(OracleError),
}

fn parse(line: &str) -> Result<Value, OracleError> {
    let v: Value = serde_json::from_str(line)
        .map_err(|e| OracleError::Protocol(format!("malformed response `{}`: {e}", line.trim())))?;
    if !v.is_object() {
        return Err(OracleError::Protocol(format!("response is not an object: {}", line.trim())));
    }
    if let Some(err) = v.get("error") {
        return Err(OracleError::Remote(err.to_string()));
    }
    Ok(v)
}

fn check_id(msg: &Value, id: u64) -> Result<(), OracleError> {
    match msg.get("id").and_then(Value::as_u64) {
        Some(got) if got == id => Ok(()),
        other => Err(OracleError::Protocol(format!("response id {other:?} does not echo request id {id}"))),
    }
}

fn label(v: &Value) -> Result<bool, OracleError> {
    match v.as_u64() {
        Some(0) => Ok(false),
        Some(1) => Ok(true),
        _ => Err(OracleError::LabelOutOfRange(v.to_string())),
    }
}

impl MembershipOracle for RemoteTeacher {
    fn n_vars(&self) -> usize {
        self.n_vars
    }

    fn query(&mut self, i: &PartialInterpretation) -> Result<bool, OracleError> {
        if i.len() != self.n_vars {
            return Err(OracleError::Width { expected: self.n_vars, found: i.len() });
        }
        let id = self.fresh_id();
        let request = classify_request(id, &i.encode());
        self.with_retries(|c| {
            c.send(&request).map_err(Attempt::Io)?;
            let line = c.recv().map_err(Attempt::Io)?;
            let msg = parse(&line).map_err(Attempt::Fatal)?;
            check_id(&msg, id).map_err(Attempt::Fatal)?;
            let y = msg.get("y").ok_or_else(|| Attempt::Fatal(OracleError::Protocol("response lacks `y`".into())))?;
            label(y).map_err(Attempt::Fatal)
        })
    }

    fn query_batch(&mut self, items: &[PartialInterpretation]) -> Result<Vec<bool>, OracleError> {
        if items.is_empty() {
            return Ok(Vec::new());
        }
        if let Some(bad) = items.iter().find(|i| i.len() != self.n_vars) {
            return Err(OracleError::Width { expected: self.n_vars, found: bad.len() });
        }
        let id = self.fresh_id();
        let xs: Vec<String> = items.iter().map(|i| i.encode()).collect();
        let request = classify_batch_request(id, &xs);
        self.with_retries(|c| {
            c.send(&request).map_err(Attempt::Io)?;
            let line = c.recv().map_err(Attempt::Io)?;
            let msg = parse(&line).map_err(Attempt::Fatal)?;
            check_id(&msg, id).map_err(Attempt::Fatal)?;
            let ys = msg
                .get("ys")
                .and_then(Value::as_array)
                .ok_or_else(|| Attempt::Fatal(OracleError::Protocol("response lacks array `ys`".into())))?;
            if ys.len() != xs.len() {
                return Err(Attempt::Fatal(OracleError::Protocol(format!(
                    "batch of {} answered with {} labels",
                    xs.len(),
                    ys.len()
                ))));
            }
            ys.iter().map(label).collect::<Result<Vec<_>, _>>().map_err(Attempt::Fatal)
        })
    }
}

impl Drop for RemoteTeacher {
    fn drop(&mut self) {
        if let Some(c) = self.conn.as_mut() {
            if c.child.is_none() {
                let _ = c.send(&bye_request());
            }
        }
    }
}
