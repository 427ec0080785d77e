use std::fmt;
use std::str::FromStr;

use rand::Rng;

use super::{adjust_lighting, flip, homography_for, salt_pepper, warp, AugmentError};
use crate::numcore::Tensor;

pub const MAX_ROTATION_DEG: f64 = 30.0;
pub const MAX_SHIFT_PX: f64 = 6.0;
pub const MAX_SCALE_DEVIATION: f64 = 0.3;
pub const MAX_BRIGHTNESS: f64 = 0.4;
pub const MAX_CONTRAST_DEVIATION: f64 = 0.5;
pub const MAX_CORNER_OFFSET_PX: f64 = 5.0;
const RANGE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OpKind {
    Rotate,
    Translate,
    Scale,
    FlipH,
    FlipV,
    SaltPepper,
    Lighting,
    Perspective,
}

impl OpKind {
    pub const ALL: [OpKind; 8] = [
        OpKind::Rotate,
        OpKind::Translate,
        OpKind::Scale,
        OpKind::FlipH,
        OpKind::FlipV,
        OpKind::SaltPepper,
        OpKind::Lighting,
        OpKind::Perspective,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OpKind::Rotate => "rotate",
            OpKind::Translate => "translate",
            OpKind::Scale => "scale",
            OpKind::FlipH => "flip_h",
            OpKind::FlipV => "flip_v",
            OpKind::SaltPepper => "salt_pepper",
            OpKind::Lighting => "lighting",
            OpKind::Perspective => "perspective",
        }
    }

    /// Upper bound a policy cap may take for this kind.
    ///
    /// Caps mean: max |theta| in degrees; max |dx|, |dy| in pixels; max
    /// |factor - 1|; max noise probability; max |brightness| and
    /// |contrast - 1|; max |corner offset| per coordinate. Flip caps are
    /// ignored and must be 1.
    pub fn max_cap(self) -> f64 {
        match self {
            OpKind::Rotate => MAX_ROTATION_DEG,
            OpKind::Translate => MAX_SHIFT_PX,
            OpKind::Scale => MAX_SCALE_DEVIATION,
            OpKind::FlipH | OpKind::FlipV => 1.0,
            OpKind::SaltPepper => 1.0,
            OpKind::Lighting => MAX_BRIGHTNESS,
            OpKind::Perspective => MAX_CORNER_OFFSET_PX,
        }
    }

    pub fn is_geometric(self) -> bool {
        matches!(
            self,
            OpKind::Rotate | OpKind::Translate | OpKind::Scale | OpKind::Perspective
        )
    }
}

impl fmt::Display for OpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OpKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        OpKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown op {s:?}"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlipAxis {
    Horizontal,
    Vertical,
}

/// A fully parameterized augmentation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AugmentOp {
    Rotate {
        theta_deg: f64,
    },
    Translate {
        dx: f64,
        dy: f64,
    },
    Scale {
        factor: f64,
    },
    FlipH,
    FlipV,
    SaltPepper {
        p: f64,
        seed: u64,
    },
    Lighting {
        brightness: f64,
        contrast: f64,
    },
    /// Per-corner `(dx, dy)` offsets, corners ordered top-left, top-right,
    /// bottom-right, bottom-left.
    Perspective {
        offsets: [[f64; 2]; 4],
    },
}

fn out_of_range(op: &'static str, detail: String) -> AugmentError {
    AugmentError::OutOfRange { op, detail }
}

impl AugmentOp {
    pub fn kind(&self) -> OpKind {
        match self {
            AugmentOp::Rotate { .. } => OpKind::Rotate,
            AugmentOp::Translate { .. } => OpKind::Translate,
            AugmentOp::Scale { .. } => OpKind::Scale,
            AugmentOp::FlipH => OpKind::FlipH,
            AugmentOp::FlipV => OpKind::FlipV,
            AugmentOp::SaltPepper { .. } => OpKind::SaltPepper,
            AugmentOp::Lighting { .. } => OpKind::Lighting,
            AugmentOp::Perspective { .. } => OpKind::Perspective,
        }
    }

    /// The cap-relevant magnitude, comparable against a policy cap.
    pub fn magnitude(&self) -> f64 {
        match *self {
            AugmentOp::Rotate { theta_deg } => theta_deg.abs(),
            AugmentOp::Translate { dx, dy } => dx.abs().max(dy.abs()),
            AugmentOp::Scale { factor } => (factor - 1.0).abs(),
            AugmentOp::FlipH | AugmentOp::FlipV => 0.0,
            AugmentOp::SaltPepper { p, .. } => p,
            AugmentOp::Lighting { brightness, contrast } => brightness.abs().max((contrast - 1.0).abs()),
            AugmentOp::Perspective { offsets } => offsets.iter().flatten().fold(0.0, |m, v| m.max(v.abs())),
        }
    }

    /// Checks the absolute parameter ranges.
    pub fn validate(&self) -> Result<(), AugmentError> {
        let finite = match *self {
            AugmentOp::Rotate { theta_deg } => theta_deg.is_finite(),
            AugmentOp::Translate { dx, dy } => dx.is_finite() && dy.is_finite(),
            AugmentOp::Scale { factor } => factor.is_finite(),
            AugmentOp::SaltPepper { p, .. } => p.is_finite(),
            AugmentOp::Lighting { brightness, contrast } => brightness.is_finite() && contrast.is_finite(),
            AugmentOp::Perspective { offsets } => offsets.iter().flatten().all(|v| v.is_finite()),
            AugmentOp::FlipH | AugmentOp::FlipV => true,
        };
        let name = self.kind().name();
        if !finite {
            return Err(out_of_range(name, "non-finite parameter".into()));
        }
        match *self {
            AugmentOp::Lighting { brightness, contrast } => {
                if brightness.abs() > MAX_BRIGHTNESS + RANGE_TOL {
                    return Err(out_of_range(
                        name,
                        format!("|brightness| {brightness} > {MAX_BRIGHTNESS}"),
                    ));
                }
                if (contrast - 1.0).abs() > MAX_CONTRAST_DEVIATION + RANGE_TOL {
                    return Err(out_of_range(name, format!("contrast {contrast} outside [0.5, 1.5]")));
                }
                Ok(())
            }
            AugmentOp::SaltPepper { p, .. } if !(0.0..=1.0).contains(&p) => {
                Err(out_of_range(name, format!("p {p} outside [0, 1]")))
            }
            _ => {
                let m = self.magnitude();
                let max = self.kind().max_cap();
                if m > max + RANGE_TOL {
                    Err(out_of_range(name, format!("magnitude {m} > {max}")))
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Whether this op respects a policy cap for its kind.
    pub fn within_cap(&self, cap: f64) -> bool {
        let tol = RANGE_TOL;
        match *self {
            AugmentOp::Lighting { brightness, contrast } => {
                brightness.abs() <= cap.min(MAX_BRIGHTNESS) + tol
                    && (contrast - 1.0).abs() <= cap.min(MAX_CONTRAST_DEVIATION) + tol
            }
            _ => self.magnitude() <= cap + tol,
        }
    }
}

impl fmt::Display for AugmentOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind())?;
        match *self {
            AugmentOp::Rotate { theta_deg } => write!(f, " {theta_deg}"),
            AugmentOp::Translate { dx, dy } => write!(f, " {dx} {dy}"),
            AugmentOp::Scale { factor } => write!(f, " {factor}"),
            AugmentOp::FlipH | AugmentOp::FlipV => Ok(()),
            AugmentOp::SaltPepper { p, seed } => write!(f, " {p} {seed}"),
            AugmentOp::Lighting { brightness, contrast } => write!(f, " {brightness} {contrast}"),
            AugmentOp::Perspective { offsets } => {
                for v in offsets.iter().flatten() {
                    write!(f, " {v}")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for AugmentOp {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let mut parts = s.split_whitespace();
        let kind: OpKind = parts.next().ok_or("empty op")?.parse()?;
        let rest: Vec<&str> = parts.collect();
        let nums = |n: usize| -> Result<Vec<f64>, String> {
            if rest.len() != n {
                return Err(format!("{kind} takes {n} parameters, got {}", rest.len()));
            }
            rest.iter()
                .map(|t| t.parse::<f64>().map_err(|e| format!("{t:?}: {e}")))
                .collect()
        };
        Ok(match kind {
            OpKind::Rotate => AugmentOp::Rotate { theta_deg: nums(1)?[0] },
            OpKind::Translate => {
                let v = nums(2)?;
                AugmentOp::Translate { dx: v[0], dy: v[1] }
            }
            OpKind::Scale => AugmentOp::Scale { factor: nums(1)?[0] },
            OpKind::FlipH => {
                nums(0)?;
                AugmentOp::FlipH
            }
            OpKind::FlipV => {
                nums(0)?;
                AugmentOp::FlipV
            }
            OpKind::SaltPepper => {
                if rest.len() != 2 {
                    return Err(format!("salt_pepper takes 2 parameters, got {}", rest.len()));
                }
                let p = rest[0].parse::<f64>().map_err(|e| format!("{:?}: {e}", rest[0]))?;
                let seed = rest[1].parse::<u64>().map_err(|e| format!("{:?}: {e}", rest[1]))?;
                AugmentOp::SaltPepper { p, seed }
            }
            OpKind::Lighting => {
                let v = nums(2)?;
                AugmentOp::Lighting {
                    brightness: v[0],
                    contrast: v[1],
                }
            }
            OpKind::Perspective => {
                let v = nums(8)?;
                let mut offsets = [[0.0; 2]; 4];
                for (i, o) in offsets.iter_mut().enumerate() {
                    *o = [v[2 * i], v[2 * i + 1]];
                }
                AugmentOp::Perspective { offsets }
            }
        })
    }
}

/// Draws an op of the given kind with parameters uniform within `cap`.
pub fn sample_op<R: Rng>(kind: OpKind, cap: f64, rng: &mut R) -> AugmentOp {
    let mut sym = |c: f64| if c > 0.0 { rng.random_range(-c..=c) } else { 0.0 };
    match kind {
        OpKind::Rotate => AugmentOp::Rotate { theta_deg: sym(cap) },
        OpKind::Translate => AugmentOp::Translate {
            dx: sym(cap),
            dy: sym(cap),
        },
        OpKind::Scale => AugmentOp::Scale { factor: 1.0 + sym(cap) },
        OpKind::FlipH => AugmentOp::FlipH,
        OpKind::FlipV => AugmentOp::FlipV,
        OpKind::SaltPepper => {
            let p = if cap > 0.0 { rng.random_range(0.0..=cap) } else { 0.0 };
            AugmentOp::SaltPepper { p, seed: rng.random() }
        }
        OpKind::Lighting => {
            let brightness = sym(cap.min(MAX_BRIGHTNESS));
            let contrast = 1.0 + sym(cap.min(MAX_CONTRAST_DEVIATION));
            AugmentOp::Lighting { brightness, contrast }
        }
        OpKind::Perspective => {
            let mut offsets = [[0.0; 2]; 4];
            for v in offsets.iter_mut().flatten() {
                *v = sym(cap);
            }
            AugmentOp::Perspective { offsets }
        }
    }
}

/// Applies a parameterized op to an `[h, w, c]` image.
pub fn apply_op(img: &Tensor<f32>, op: &AugmentOp) -> Result<Tensor<f32>, AugmentError> {
    op.validate()?;
    match *op {
        AugmentOp::FlipH => flip(img, FlipAxis::Horizontal),
        AugmentOp::FlipV => flip(img, FlipAxis::Vertical),
        AugmentOp::SaltPepper { p, seed } => salt_pepper(img, p, seed),
        AugmentOp::Lighting { brightness, contrast } => Ok(adjust_lighting(img, brightness, contrast)),
        _ => warp(img, &homography_for(op)?),
    }
}
