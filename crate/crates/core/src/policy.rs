//! Uncertainty policies: turning `{POS, NEG, UNC, MISSING}` annotations
//! into soft targets plus a loss-inclusion mask.
//!
//! | policy      | UNC target          | UNC in loss |
//! |-------------|---------------------|-------------|
//! | `ignore`    | 0 (unused)          | no          |
//! | `ones`      | 1                   | yes         |
//! | `zeros`     | 0                   | yes         |
//! | `ones-lsr`  | `u ~ U(a1, b1)`     | yes         |
//! | `zeros-lsr` | `u ~ U(a0, b0)`     | yes         |
//!
//! POS maps to 1 and NEG to 0 under every policy. MISSING is always masked
//! out. Smoothing draws are made once per cell from
//! [`rng::cell_uniform`](crate::rng::cell_uniform) keyed by
//! `(seed, row, column)`, so a cell's target never depends on how the
//! matrix is traversed.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::{Label, LabelMatrix};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::rng::{self, stream};

pub type SoftTargets = Grid<f64>;
pub type LossMask = Grid<bool>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyKind {
    Ignore,
    Ones,
    Zeros,
    OnesLsr,
    ZerosLsr,
}

impl PolicyKind {
    pub fn needs_lsr(self) -> bool {
        matches!(self, PolicyKind::OnesLsr | PolicyKind::ZerosLsr)
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PolicyKind::Ignore => "ignore",
            PolicyKind::Ones => "ones",
            PolicyKind::Zeros => "zeros",
            PolicyKind::OnesLsr => "ones-lsr",
            PolicyKind::ZerosLsr => "zeros-lsr",
        })
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "ignore" => PolicyKind::Ignore,
            "ones" => PolicyKind::Ones,
            "zeros" => PolicyKind::Zeros,
            "ones-lsr" => PolicyKind::OnesLsr,
            "zeros-lsr" => PolicyKind::ZerosLsr,
            other => {
                return Err(Error::Policy(format!(
                    "unknown policy `{other}` (expected ignore, ones, zeros, ones-lsr, zeros-lsr)"
                )))
            }
        })
    }
}

/// Bounds of the uniform smoothing draw.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LsrParams {
    pub a: f64,
    pub b: f64,
}

impl LsrParams {
    pub const ONES_DEFAULT: LsrParams = LsrParams { a: 0.55, b: 0.85 };
    pub const ZEROS_DEFAULT: LsrParams = LsrParams { a: 0.0, b: 0.3 };

    pub fn new(a: f64, b: f64) -> Result<Self> {
        let p = LsrParams { a, b };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0 <= self.a && self.a <= self.b && self.b <= 1.0) {
            return Err(Error::Policy(format!(
                "smoothing bounds must satisfy 0 <= a <= b <= 1, got a={}, b={}",
                self.a, self.b
            )));
        }
        Ok(())
    }

    /// Maps a unit draw onto `[a, b]`.
    fn scale(&self, u: f64) -> f64 {
        // clamp guards the b=a+tiny rounding edge; u < 1 keeps this <= b anyway
        (self.a + (self.b - self.a) * u).clamp(self.a, self.b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyPolicy {
    pub kind: PolicyKind,
    pub lsr: Option<LsrParams>,
}

impl UncertaintyPolicy {
    pub const IGNORE: Self = Self::plain(PolicyKind::Ignore);
    pub const ONES: Self = Self::plain(PolicyKind::Ones);
    pub const ZEROS: Self = Self::plain(PolicyKind::Zeros);

    const fn plain(kind: PolicyKind) -> Self {
        UncertaintyPolicy { kind, lsr: None }
    }

    pub fn ones_lsr(a: f64, b: f64) -> Result<Self> {
        Self::new(PolicyKind::OnesLsr, Some(LsrParams::new(a, b)?))
    }

    pub fn zeros_lsr(a: f64, b: f64) -> Result<Self> {
        Self::new(PolicyKind::ZerosLsr, Some(LsrParams::new(a, b)?))
    }

    pub fn new(kind: PolicyKind, lsr: Option<LsrParams>) -> Result<Self> {
        let p = UncertaintyPolicy { kind, lsr };
        p.validate()?;
        Ok(p)
    }

    /// `kind` with the default smoothing bounds where it needs them.
    pub fn with_defaults(kind: PolicyKind) -> Self {
        let lsr = match kind {
            PolicyKind::OnesLsr => Some(LsrParams::ONES_DEFAULT),
            PolicyKind::ZerosLsr => Some(LsrParams::ZEROS_DEFAULT),
            _ => None,
        };
        UncertaintyPolicy { kind, lsr }
    }

    pub fn validate(&self) -> Result<()> {
        match (self.kind.needs_lsr(), &self.lsr) {
            (true, None) => Err(Error::Policy(format!(
                "`{}` requires smoothing bounds",
                self.kind
            ))),
            (false, Some(_)) => Err(Error::Policy(format!(
                "`{}` takes no smoothing bounds",
                self.kind
            ))),
            (true, Some(p)) => p.validate(),
            (false, None) => Ok(()),
        }
    }
}

impl fmt::Display for UncertaintyPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.lsr {
            Some(p) => write!(f, "{}({}, {})", self.kind, p.a, p.b),
            None => write!(f, "{}", self.kind),
        }
    }
}

pub fn apply_policy(
    labels: &LabelMatrix,
    policy: &UncertaintyPolicy,
    seed: u64,
) -> Result<(SoftTargets, LossMask)> {
    policy.validate()?;
    let (n, k) = labels.shape();
    let mut targets = Grid::filled(n, k, 0.0);
    let mut mask = Grid::filled(n, k, false);
    for i in 0..n {
        for c in 0..k {
            let (t, m) = match labels.get(i, c) {
                Label::Pos => (1.0, true),
                Label::Neg => (0.0, true),
                Label::Missing => (0.0, false),
                Label::Unc => match policy.kind {
                    PolicyKind::Ignore => (0.0, false),
                    PolicyKind::Ones => (1.0, true),
                    PolicyKind::Zeros => (0.0, true),
                    PolicyKind::OnesLsr | PolicyKind::ZerosLsr => {
                        let params = policy.lsr.expect("validated");
                        let u = rng::cell_uniform(seed, stream::LSR, i, c);
                        (params.scale(u), true)
                    }
                },
            };
            targets.set(i, c, t);
            mask.set(i, c, m);
        }
    }
    Ok((targets, mask))
}
