//! JSON keypoint documents.
//!
//! ```json
//! {"lambda": 4.0, "keypoints": [[12.7, 8.3, 0.98]], "fallbacks": ["none"]}
//! ```
//!
//! `fallbacks` is optional. Unknown keys are ignored on read and never
//! written. Keys are emitted in the order `lambda`, `keypoints`, `fallbacks`;
//! numbers use the shortest decimal form that round-trips.

use std::fs;
use std::path::Path;

use heatmap_codec::{Fallback, Point};
use serde::Serialize;
use serde_json::Value;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Keypoint {
    pub x: f64,
    pub y: f64,
    pub score: f64,
}

impl Keypoint {
    pub fn new(x: f64, y: f64, score: f64) -> Self {
        Self { x, y, score }
    }

    pub fn point(&self) -> Point {
        Point::new(self.x, self.y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KeypointDocument {
    pub lambda: f64,
    pub keypoints: Vec<Keypoint>,
    /// One label per keypoint when present.
    pub fallbacks: Option<Vec<Fallback>>,
}

#[derive(Serialize)]
struct Wire<'a> {
    lambda: f64,
    keypoints: Vec<[f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fallbacks: Option<Vec<&'a str>>,
}

impl KeypointDocument {
    pub fn new(lambda: f64, keypoints: Vec<Keypoint>) -> Self {
        Self { lambda, keypoints, fallbacks: None }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(Error::format("lambda", "lambda must be a finite number > 0"));
        }
        if let Some(i) = self
            .keypoints
            .iter()
            .position(|k| !(k.x.is_finite() && k.y.is_finite() && k.score.is_finite()))
        {
            return Err(Error::format("keypoints", format!("keypoint {i} is not finite")));
        }
        if let Some(f) = &self.fallbacks {
            if f.len() != self.keypoints.len() {
                return Err(Error::format(
                    "fallbacks",
                    format!("{} labels for {} keypoints", f.len(), self.keypoints.len()),
                ));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        self.validate()?;
        let wire = Wire {
            lambda: self.lambda,
            keypoints: self.keypoints.iter().map(|k| [k.x, k.y, k.score]).collect(),
            fallbacks: self.fallbacks.as_ref().map(|f| f.iter().map(|f| f.label()).collect()),
        };
        let mut s = serde_json::to_string(&wire).map_err(|e| Error::InvalidInput(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let root: Value = serde_json::from_str(text).map_err(|e| Error::format("json", e.to_string()))?;
        let obj = root.as_object().ok_or_else(|| Error::format("json", "top level must be an object"))?;

        let lambda = obj
            .get("lambda")
            .ok_or_else(|| Error::format("lambda", "missing field"))?
            .as_f64()
            .ok_or_else(|| Error::format("lambda", "must be a number"))?;

        let entries = obj
            .get("keypoints")
            .ok_or_else(|| Error::format("keypoints", "missing field"))?
            .as_array()
            .ok_or_else(|| Error::format("keypoints", "must be an array"))?;
        let keypoints = entries
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let bad = || Error::format("keypoints", format!("entry {i} must be an [x, y, score] array of numbers"));
                let arr = e.as_array().filter(|a| a.len() == 3).ok_or_else(bad)?;
                let n = |j: usize| arr[j].as_f64().ok_or_else(bad);
                Ok(Keypoint::new(n(0)?, n(1)?, n(2)?))
            })
            .collect::<Result<Vec<_>>>()?;

        let fallbacks = match obj.get("fallbacks") {
            None | Some(Value::Null) => None,
            Some(v) => {
                let arr = v.as_array().ok_or_else(|| Error::format("fallbacks", "must be an array"))?;
                Some(
                    arr.iter()
                        .map(|f| {
                            f.as_str()
                                .and_then(Fallback::from_label)
                                .ok_or_else(|| Error::format("fallbacks", format!("unknown label {f}")))
                        })
                        .collect::<Result<Vec<_>>>()?,
                )
            }
        };

        let doc = Self { lambda, keypoints, fallbacks };
        doc.validate()?;
        Ok(doc)
    }
}

pub fn read_keypoints(path: impl AsRef<Path>) -> Result<KeypointDocument> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    KeypointDocument::from_json(&text)
}

pub fn write_keypoints(path: impl AsRef<Path>, doc: &KeypointDocument) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, doc.to_json()?).map_err(|e| Error::io(path, e))
}
