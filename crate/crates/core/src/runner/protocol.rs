//! Line-delimited JSON protocol spoken with external subjects.
//!
//! Request:  `{"id":"<case-id-hex>","input":<datum>}`
//! Response: `{"id":"<same>","output":<datum>}` or `{"id":"<same>","error":"<message>"}`
//!
//! One message per line, UTF-8, `\n` terminated. Responses may arrive out of
//! order and are matched by id.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::model::Datum;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Request {
    pub id: String,
    pub input: Datum,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Response {
    Output { id: String, output: Datum },
    Error { id: String, error: String },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawResponse {
    id: String,
    #[serde(default)]
    output: Option<Datum>,
    #[serde(default)]
    error: Option<String>,
}

impl Response {
    pub fn id(&self) -> &str {
        match self {
            Response::Output { id, .. } | Response::Error { id, .. } => id,
        }
    }

    pub fn parse(line: &str) -> Result<Response, String> {
        let raw: RawResponse = serde_json::from_str(line).map_err(|e| e.to_string())?;
        match (raw.output, raw.error) {
            (Some(output), None) => Ok(Response::Output { id: raw.id, output }),
            (None, Some(error)) => Ok(Response::Error { id: raw.id, error }),
            (Some(_), Some(_)) => Err("response carries both output and error".into()),
            (None, None) => Err("response carries neither output nor error".into()),
        }
    }

    pub fn to_line(&self) -> String {
        let value = match self {
            Response::Output { id, output } => serde_json::json!({ "id": id, "output": output }),
            Response::Error { id, error } => serde_json::json!({ "id": id, "error": error }),
        };
        value.to_string()
    }
}

impl Request {
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("datum serialization is infallible")
    }
}

/// Serves `evaluate` over the protocol until `input` reaches EOF.
///
/// Returns an error message naming the offending request line if a request
/// cannot be parsed.
pub fn serve<R, W, F>(input: R, mut output: W, evaluate: F) -> Result<usize, String>
where
    R: BufRead,
    W: Write,
    F: Fn(&Datum) -> Result<Datum, String>,
{
    let mut served = 0;
    for (i, line) in input.lines().enumerate() {
        let line = line.map_err(|e| format!("line {}: {e}", i + 1))?;
        if line.is_empty() {
            continue;
        }
        let req: Request =
            serde_json::from_str(&line).map_err(|e| format!("line {}: malformed request: {e}", i + 1))?;
        let resp = match evaluate(&req.input) {
            Ok(output) => Response::Output { id: req.id, output },
            Err(error) => Response::Error { id: req.id, error },
        };
        writeln!(output, "{}", resp.to_line()).map_err(|e| e.to_string())?;
        output.flush().map_err(|e| e.to_string())?;
        served += 1;
    }
    Ok(served)
}
