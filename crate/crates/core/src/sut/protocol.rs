//! Line-delimited JSON protocol between the harness and an external system
//! under test.
//!
//! The harness writes one request per line to the child's standard input
//! and reads exactly one response line from its standard output before
//! sending the next request. Diagnostics belong on standard error.
//!
//! ```text
//! request:  {"id":7,"image_path":"/abs/img.png","task":"detection"}
//! response: {"id":7,"status":"ok","label":"cat"}
//!           {"id":7,"status":"ok","detections":[{"label":"red","score":1.0,"bbox":[10.0,10.0,20.0,20.0]}]}
//!           {"id":7,"status":"err","message":"dark_frame"}
//! ```
//!
//! The response id must echo the request id. A request line that is not
//! valid JSON is answered with id 0 and a `protocol:` message.

use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{Detection, SutOutput};
use crate::suite::Task;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Request {
    pub id: u64,
    pub image_path: String,
    pub task: Task,
}

impl Request {
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("request serializes")
    }
}

#[derive(Serialize)]
#[serde(untagged)]
enum ResponseOut<'a> {
    Label {
        id: u64,
        status: &'static str,
        label: &'a str,
    },
    Detections {
        id: u64,
        status: &'static str,
        detections: &'a [Detection],
    },
    Err {
        id: u64,
        status: &'static str,
        message: &'a str,
    },
}

/// Encodes `output` as the response line (without newline) for request `id`.
pub fn encode_response(id: u64, output: &SutOutput) -> String {
    let out = match output {
        SutOutput::Classification { label } => ResponseOut::Label {
            id,
            status: "ok",
            label,
        },
        SutOutput::Detections { items } => ResponseOut::Detections {
            id,
            status: "ok",
            detections: items,
        },
        SutOutput::Error { message } => ResponseOut::Err {
            id,
            status: "err",
            message,
        },
    };
    serde_json::to_string(&out).expect("response serializes")
}

/// Decodes a response line for request `expected_id`.
///
/// Any deviation from the protocol becomes a `protocol:`-prefixed
/// [`SutOutput::Error`].
pub fn decode_response(line: &str, expected_id: u64, task: Task) -> SutOutput {
    match try_decode(line, expected_id, task) {
        Ok(out) => out,
        Err(why) => SutOutput::error(format!("protocol: {why}")),
    }
}

fn try_decode(line: &str, expected_id: u64, task: Task) -> Result<SutOutput, String> {
    let v: Value = serde_json::from_str(line.trim_end()).map_err(|e| format!("malformed response: {e}"))?;
    let obj = v.as_object().ok_or("response is not a JSON object")?;
    let id = obj.get("id").and_then(Value::as_u64).ok_or("response lacks a numeric id")?;
    if id != expected_id {
        return Err(format!("response id {id} does not match request id {expected_id}"));
    }
    match obj.get("status").and_then(Value::as_str) {
        Some("err") => {
            let message = obj
                .get("message")
                .and_then(Value::as_str)
                .ok_or("err response lacks a message")?;
            Ok(SutOutput::error(message))
        }
        Some("ok") => match task {
            Task::Classification => {
                let label = obj
                    .get("label")
                    .and_then(Value::as_str)
                    .ok_or("classification response lacks a label")?;
                Ok(SutOutput::Classification {
                    label: label.to_string(),
                })
            }
            Task::Detection => {
                let raw = obj
                    .get("detections")
                    .ok_or("detection response lacks detections")?;
                let items: Vec<Detection> = serde_json::from_value(raw.clone())
                    .map_err(|e| format!("bad detections: {e}"))?;
                for (i, d) in items.iter().enumerate() {
                    if !(0.0..=1.0).contains(&d.score) {
                        return Err(format!("detection {i}: score {} outside [0, 1]", d.score));
                    }
                    if !(d.bbox.w > 0.0 && d.bbox.h > 0.0) {
                        return Err(format!("detection {i}: bbox needs w, h > 0"));
                    }
                }
                Ok(SutOutput::Detections { items })
            }
        },
        Some(other) => Err(format!("unknown status {other:?}")),
        None => Err("response lacks a status".into()),
    }
}

/// Serves requests from `input` until it closes, answering each line with
/// `handler`'s output. Used by adapter executables.
pub fn serve<H, R, W>(mut handler: H, input: R, mut output: W) -> io::Result<()>
where
    H: FnMut(&Request) -> SutOutput,
    R: BufRead,
    W: Write,
{
    for line in input.lines() {
        let line = line?;
        let response = match serde_json::from_str::<Request>(&line) {
            Ok(req) => encode_response(req.id, &handler(&req)),
            Err(e) => {
                // echo the id when the line is JSON that carries one
                let id = serde_json::from_str::<Value>(&line)
                    .ok()
                    .and_then(|v| v.get("id").and_then(Value::as_u64))
                    .unwrap_or(0);
                encode_response(id, &SutOutput::error(format!("protocol: malformed request: {e}")))
            }
        };
        output.write_all(response.as_bytes())?;
        output.write_all(b"\n")?;
        output.flush()?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bbox::BBox;

    #[test]
    fn request_line_shape() {
        let r = Request {
            id: 3,
            image_path: "/x/y.png".into(),
            task: Task::Detection,
        };
        assert_eq!(r.to_line(), r#"{"id":3,"image_path":"/x/y.png","task":"detection"}"#);
    }

    #[test]
    fn response_lines() {
        assert_eq!(
            encode_response(1, &SutOutput::Classification { label: "cat".into() }),
            r#"{"id":1,"status":"ok","label":"cat"}"#
        );
        assert_eq!(
            encode_response(2, &SutOutput::error("dark_frame")),
            r#"{"id":2,"status":"err","message":"dark_frame"}"#
        );
        let det = SutOutput::Detections {
            items: vec![Detection {
                label: "red".into(),
                score: 1.0,
                bbox: BBox::new(10.0, 10.0, 20.0, 20.0),
            }],
        };
        let line = encode_response(3, &det);
        assert_eq!(
            line,
            r#"{"id":3,"status":"ok","detections":[{"label":"red","score":1.0,"bbox":[10.0,10.0,20.0,20.0]}]}"#
        );
        assert_eq!(decode_response(&line, 3, Task::Detection), det);
    }

    #[test]
    fn decode_failures_are_protocol_errors() {
        let cases = [
            ("not json", 1, Task::Classification),
            (r#"{"id":2,"status":"ok","label":"x"}"#, 1, Task::Classification),
            (r#"{"id":1,"status":"ok"}"#, 1, Task::Classification),
            (r#"{"id":1,"status":"maybe"}"#, 1, Task::Classification),
            (r#"{"id":1,"status":"err"}"#, 1, Task::Detection),
            (
                r#"{"id":1,"status":"ok","detections":[{"label":"a","score":1.5,"bbox":[0,0,1,1]}]}"#,
                1,
                Task::Detection,
            ),
            (
                r#"{"id":1,"status":"ok","detections":[{"label":"a","score":0.5,"bbox":[0,0,0,1]}]}"#,
                1,
                Task::Detection,
            ),
        ];
        for (line, id, task) in cases {
            match decode_response(line, id, task) {
                SutOutput::Error { message } => assert!(message.starts_with("protocol: "), "{message}"),
                other => panic!("{line} decoded to {other:?}"),
            }
        }
    }

    #[test]
    fn serve_answers_every_line() {
        let input = b"{\"id\":5,\"image_path\":\"a.png\",\"task\":\"classification\"}\nnot json\n{\"id\":9}\n";
        let mut out = Vec::new();
        serve(
            |req| SutOutput::Classification {
                label: req.image_path.clone(),
            },
            &input[..],
            &mut out,
        )
        .unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], r#"{"id":5,"status":"ok","label":"a.png"}"#);
        assert!(lines[1].starts_with(r#"{"id":0,"status":"err","message":"protocol: "#));
        assert!(lines[2].starts_with(r#"{"id":9,"status":"err","message":"protocol: "#));
    }
}
