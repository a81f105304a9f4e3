// SPDX-License-Identifier: Apache-2.0

//! Newline-delimited JSON protocol spoken with remote classifiers.
//!
//! ```text
//! > {"op":"hello"}
//! < {"op":"hello","n_vars":3,"model":"mlp"}
//! > {"id":7,"op":"classify","x":"1?0"}
//! < {"id":7,"y":1}
//! > {"id":8,"op":"classify_batch","xs":["1?0","000"]}
//! < {"id":8,"ys":[1,0]}
//! > {"op":"bye"}
//! ```
//!
//! Unknown fields are ignored. Unknown ops and malformed requests are
//! answered with `{"error":...}` and the connection stays open.

use std::io::{self, BufRead, Write};

use serde::Serialize;
use serde_json::Value;

use crate::logic::PartialInterpretation;

#[derive(Serialize)]
pub struct Hello<'a> {
    pub op: &'a str,
}

#[derive(Serialize)]
pub struct HelloReply<'a> {
    pub op: &'a str,
    pub n_vars: usize,
    pub model: &'a str,
}

#[derive(Serialize)]
pub struct Classify<'a> {
    pub id: u64,
    pub op: &'a str,
    pub x: &'a str,
}

#[derive(Serialize)]
pub struct ClassifyBatch<'a> {
    pub id: u64,
    pub op: &'a str,
    pub xs: &'a [String],
}

#[derive(Serialize)]
pub struct Label {
    pub id: u64,
    pub y: u8,
}

#[derive(Serialize)]
pub struct Labels {
    pub id: u64,
    pub ys: Vec<u8>,
}

#[derive(Serialize)]
pub struct ErrorReply {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub id: Option<u64>,
    pub error: String,
}

pub fn hello_request() -> String {
    serde_json::to_string(&Hello { op: "hello" }).expect("static message")
}

pub fn bye_request() -> String {
    serde_json::to_string(&Hello { op: "bye" }).expect("static message")
}

pub fn classify_request(id: u64, x: &str) -> String {
    serde_json::to_string(&Classify { id, op: "classify", x }).expect("plain strings serialize")
}

pub fn classify_batch_request(id: u64, xs: &[String]) -> String {
    serde_json::to_string(&ClassifyBatch { id, op: "classify_batch", xs }).expect("plain strings serialize")
}

/// Serves classification requests for `classify` until `bye` or end of input.
///
/// Returns the number of requests answered (including error replies).
pub fn serve<R, W, F>(reader: R, mut writer: W, n_vars: usize, model: &str, mut classify: F) -> io::Result<u64>
where
    R: BufRead,
    W: Write,
    F: FnMut(&PartialInterpretation) -> bool,
{
    let mut answered = 0u64;
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut reply = match handle(&line, n_vars, model, &mut classify) {
            Handled::Reply(r) => r,
            Handled::Bye => break,
        };
        // one write per line keeps small replies in one segment
        reply.push('\n');
        writer.write_all(reply.as_bytes())?;
        writer.flush()?;
        answered += 1;
    }
    Ok(answered)
}

enum Handled {
    Reply(String),
    Bye,
}

fn handle<F>(line: &str, n_vars: usize, model: &str, classify: &mut F) -> Handled
where
    F: FnMut(&PartialInterpretation) -> bool,
{
    let error = |id: Option<u64>, error: String| {
        Handled::Reply(serde_json::to_string(&ErrorReply { id, error }).expect("error reply"))
    };
    let msg: Value = match serde_json::from_str(line) {
        Ok(v) => v,
        Err(e) => return error(None, format!("malformed request: {e}")),
    };
    let id = msg.get("id").and_then(Value::as_u64);
    let decode = |x: &Value| -> Result<PartialInterpretation, String> {
        let s = x.as_str().ok_or("input must be a string")?;
        let i = PartialInterpretation::decode(s).map_err(|e| e.to_string())?;
        if i.len() != n_vars {
            return Err(format!("input has {} positions, expected {n_vars}", i.len()));
        }
        Ok(i)
    };
    match msg.get("op").and_then(Value::as_str) {
        Some("hello") => {
            Handled::Reply(serde_json::to_string(&HelloReply { op: "hello", n_vars, model }).expect("hello reply"))
        }
        Some("bye") => Handled::Bye,
        Some("classify") => {
            let Some(id) = id else {
                return error(None, "classify requires an integer id".into());
            };
            match msg.get("x").ok_or_else(|| "missing field `x`".to_string()).and_then(decode) {
                Ok(i) => Handled::Reply(serde_json::to_string(&Label { id, y: classify(&i) as u8 }).expect("label")),
                Err(e) => error(Some(id), e),
            }
        }
        Some("classify_batch") => {
            let Some(id) = id else {
                return error(None, "classify_batch requires an integer id".into());
            };
            let Some(xs) = msg.get("xs").and_then(Value::as_array) else {
                return error(Some(id), "missing array field `xs`".into());
            };
            let mut ys = Vec::with_capacity(xs.len());
            for x in xs {
                match decode(x) {
                    Ok(i) => ys.push(classify(&i) as u8),
                    Err(e) => return error(Some(id), e),
                }
            }
            Handled::Reply(serde_json::to_string(&Labels { id, ys }).expect("labels"))
        }
        Some(other) => error(id, format!("unknown op `{other}`")),
        None => error(id, "missing field `op`".into()),
    }
}
