use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{AugmentError, OpKind};
use crate::dataio::{ClassId, NUM_CLASSES, SIGN_CLASSES};

const ROTATE_TEXT: f64 = 5.0;
const ROTATE_SYMBOL: f64 = 15.0;
const TRANSLATE: f64 = 3.0;
const SCALE: f64 = 0.15;
const SALT_PEPPER: f64 = 0.05;
const LIGHTING: f64 = 0.3;
const PERSPECTIVE: f64 = 3.0;

/// Per-class table of permitted ops and their caps.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassPolicy {
    caps: [BTreeMap<OpKind, f64>; NUM_CLASSES],
}

impl Default for ClassPolicy {
    fn default() -> Self {
        let caps = std::array::from_fn(|class| {
            let text = SIGN_CLASSES[class].has_text();
            let mut m = BTreeMap::new();
            m.insert(OpKind::Rotate, if text { ROTATE_TEXT } else { ROTATE_SYMBOL });
            m.insert(OpKind::Translate, TRANSLATE);
            m.insert(OpKind::Scale, SCALE);
            m.insert(OpKind::SaltPepper, SALT_PEPPER);
            m.insert(OpKind::Lighting, LIGHTING);
            m.insert(OpKind::Perspective, PERSPECTIVE);
            let (h, v) = match class {
                0 | 1 | 8 => (true, true),
                9 => (true, false),
                _ => (false, false),
            };
            if h {
                m.insert(OpKind::FlipH, 1.0);
            }
            if v {
                m.insert(OpKind::FlipV, 1.0);
            }
            m
        });
        Self { caps }
    }
}

impl ClassPolicy {
    pub fn empty() -> Self {
        Self {
            caps: std::array::from_fn(|_| BTreeMap::new()),
        }
    }

    pub fn set(&mut self, class: ClassId, kind: OpKind, cap: f64) -> Result<(), AugmentError> {
        if !(0.0..=kind.max_cap()).contains(&cap) {
            return Err(AugmentError::OutOfRange {
                op: kind.name(),
                detail: format!("cap {cap} outside [0, {}]", kind.max_cap()),
            });
        }
        self.caps[class.index()].insert(kind, cap);
        Ok(())
    }

    pub fn remove(&mut self, class: ClassId, kind: OpKind) {
        self.caps[class.index()].remove(&kind);
    }

    pub fn cap(&self, class: ClassId, kind: OpKind) -> Option<f64> {
        self.caps[class.index()].get(&kind).copied()
    }

    /// Serializes as `class_id op cap` lines.
    pub fn to_text(&self) -> String {
        let mut s = String::from("# class_id op cap\n");
        for (class, m) in self.caps.iter().enumerate() {
            for (kind, cap) in m {
                writeln!(s, "{class} {kind} {cap}").unwrap();
            }
        }
        s
    }

    /// Parses the text table. Blank lines and `#` comments are skipped;
    /// classes without lines permit nothing.
    pub fn parse(text: &str) -> Result<Self, AugmentError> {
        let mut policy = Self::empty();
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let err = |reason: String| AugmentError::PolicyParse { line, reason };
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let fields: Vec<&str> = content.split_whitespace().collect();
            let [class, op, cap] = fields[..] else {
                return Err(err(format!("expected 3 fields, got {}", fields.len())));
            };
            let class = class
                .parse::<usize>()
                .map_err(|e| err(format!("class {class:?}: {e}")))
                .and_then(|c| ClassId::new(c).map_err(|e| err(e.to_string())))?;
            let kind: OpKind = op.parse().map_err(err)?;
            let cap: f64 = cap.parse().map_err(|e| err(format!("cap {cap:?}: {e}")))?;
            if policy.cap(class, kind).is_some() {
                return Err(err(format!("duplicate entry for class {} {kind}", class.index())));
            }
            policy.set(class, kind, cap).map_err(|e| err(e.to_string()))?;
        }
        Ok(policy)
    }

    /// Lists departures from the built-in safety rules: no flips on text
    /// signs, no vertical flip of the give-way triangle, every op for the
    /// closed-to-all sign.
    pub fn safety_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for class in ClassId::all() {
            let text = class.info().has_text();
            for kind in [OpKind::FlipH, OpKind::FlipV] {
                if text && self.cap(class, kind).is_some() {
                    out.push(format!("class {} permits {kind} on a text sign", class.index()));
                }
            }
        }
        if self.caps[9].contains_key(&OpKind::FlipV) {
            out.push("class 9 permits flip_v".into());
        }
        for kind in OpKind::ALL {
            if !self.caps[0].contains_key(&kind) {
                out.push(format!("class 0 lacks {kind}"));
            }
        }
        out
    }
}

/// Permitted ops and caps for a class, in `OpKind` order.
pub fn allowed_ops(class_id: usize, policy: &ClassPolicy) -> Result<Vec<(OpKind, f64)>, AugmentError> {
    let class = ClassId::new(class_id)?;
    Ok(policy.caps[class.index()].iter().map(|(k, c)| (*k, *c)).collect())
}
