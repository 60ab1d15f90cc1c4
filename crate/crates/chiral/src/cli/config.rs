//! Suite configuration files.
//!
//! A configuration is a TOML file with three sections:
//!
//! ```toml
//! [patch]
//! n = 2            # flat coordinates
//! m = 0            # angular coordinates
//! flat = ["x", "y"]  # optional names
//!
//! [twist]
//! H = ":c[1] c[2] c[3]:"   # closed 3-form on the patch
//! F_A = ":c[1] c[2]:"      # curvature of the circle bundle over the patch
//! F_Ahat = "2*:c[1] c[2]:" # curvature of the dual bundle
//! H3 = "0"                 # base part of the bundle flux
//!
//! [run]
//! suites = ["tduality-proof"]
//! seed = 7
//! samples = 20
//! order = 4
//! ```
//!
//! Form values are mini-language expressions over the `c[i]` of the patch.
//! Everything is validated before any check runs.

use super::expr::{parse_field, ExprError};
use crate::cdr::{field_form, Patch};
use crate::coeff::CoordinateSystem;
use crate::courant::{Flux, ReductionData};
use crate::geom::DiffForm;
use serde::Deserialize;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed config: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("`{key}`: {source}")]
    Expr { key: String, source: ExprError },
    #[error("`{key}`: {msg}")]
    Invalid { key: String, msg: String },
    #[error("unknown suite `{0}`")]
    UnknownSuite(String),
}

fn invalid(key: &str, msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.into(),
        msg: msg.into(),
    }
}

/// The checks a configuration can select.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SuiteName {
    TopologicalOpe,
    Homotopy,
    Vanishing,
    Untwisting,
    CourantAxioms,
    Hori,
    CliffordSign,
    Heisenberg,
    TdualityProof,
    Intertwining,
    TCh,
    Characters,
}

/// Suite groups selectable from `verify`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Group {
    Cdr,
    Courant,
    Tduality,
    Characters,
}

impl SuiteName {
    pub const ALL: [SuiteName; 12] = [
        SuiteName::TopologicalOpe,
        SuiteName::Homotopy,
        SuiteName::Vanishing,
        SuiteName::Untwisting,
        SuiteName::CourantAxioms,
        SuiteName::Hori,
        SuiteName::CliffordSign,
        SuiteName::Heisenberg,
        SuiteName::TdualityProof,
        SuiteName::Intertwining,
        SuiteName::TCh,
        SuiteName::Characters,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SuiteName::TopologicalOpe => "topological-ope",
            SuiteName::Homotopy => "homotopy",
            SuiteName::Vanishing => "vanishing",
            SuiteName::Untwisting => "untwisting",
            SuiteName::CourantAxioms => "courant-axioms",
            SuiteName::Hori => "hori",
            SuiteName::CliffordSign => "clifford-sign",
            SuiteName::Heisenberg => "heisenberg",
            SuiteName::TdualityProof => "tduality-proof",
            SuiteName::Intertwining => "intertwining",
            SuiteName::TCh => "t-ch",
            SuiteName::Characters => "characters",
        }
    }

    pub fn group(self) -> Group {
        use SuiteName::*;
        match self {
            TopologicalOpe | Homotopy | Vanishing | Untwisting => Group::Cdr,
            CourantAxioms | Hori | CliffordSign => Group::Courant,
            Heisenberg | TdualityProof | Intertwining | TCh => Group::Tduality,
            Characters => Group::Characters,
        }
    }
}

impl fmt::Display for SuiteName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SuiteName {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SuiteName::ALL
            .into_iter()
            .find(|x| x.as_str() == s)
            .ok_or_else(|| ConfigError::UnknownSuite(s.to_string()))
    }
}

impl FromStr for Group {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cdr" => Ok(Group::Cdr),
            "courant" => Ok(Group::Courant),
            "tduality" => Ok(Group::Tduality),
            "characters" => Ok(Group::Characters),
            _ => Err(format!("unknown group `{s}` (expected cdr, courant, tduality or characters)")),
        }
    }
}

#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    patch: RawPatch,
    #[serde(default)]
    twist: RawTwist,
    #[serde(default)]
    run: RawRun,
}

#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
struct RawPatch {
    n: usize,
    #[serde(default)]
    m: usize,
    flat: Option<Vec<String>>,
    angular: Option<Vec<String>>,
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
struct RawTwist {
    #[serde(rename = "H")]
    h: Option<String>,
    #[serde(rename = "F_A")]
    f_a: Option<String>,
    #[serde(rename = "F_Ahat")]
    f_ahat: Option<String>,
    #[serde(rename = "H3")]
    h3: Option<String>,
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
struct RawRun {
    suites: Option<Vec<String>>,
    seed: Option<u64>,
    samples: Option<usize>,
    order: Option<u32>,
    max_weight: Option<i64>,
    max_poly_degree: Option<u32>,
    corrupted: Option<bool>,
}

/// A validated configuration.
#[derive(Clone)]
pub struct SuiteConfig {
    pub patch: Patch,
    /// The 3-form twisting the patch.
    pub h: Option<Flux>,
    /// Circle-bundle data over the patch.
    pub reduction: Option<ReductionData>,
    pub suites: Vec<SuiteName>,
    pub seed: u64,
    pub samples: usize,
    /// Truncation order in q for characters.
    pub order: u32,
    /// Weight bound for basis sweeps.
    pub max_weight: i64,
    /// Coefficient degree bound for basis sweeps and random data.
    pub max_poly_degree: u32,
    /// Replace the Courant bracket by the negative control.
    pub corrupted: bool,
}

fn parse_form(patch: &Patch, key: &str, text: &str, degree: usize, closed: bool) -> Result<DiffForm, ConfigError> {
    let e = parse_field(patch.ctx(), text).map_err(|source| ConfigError::Expr {
        key: key.into(),
        source,
    })?;
    let w = field_form(patch.ctx(), &e).ok_or_else(|| invalid(key, "not a differential form"))?;
    if !w.is_zero() && w.degree() != Some(degree) {
        return Err(invalid(key, format!("expected a {degree}-form")));
    }
    if closed && !w.d().is_zero() {
        return Err(invalid(key, "form is not closed"));
    }
    Ok(w)
}

impl SuiteConfig {
    pub fn load(path: &std::path::Path) -> Result<Self, ConfigError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let raw: RawConfig = toml::from_str(text)?;
        let (n, m) = (raw.patch.n, raw.patch.m);
        let flat = raw
            .patch
            .flat
            .unwrap_or_else(|| (1..=n).map(|i| format!("x{i}")).collect());
        let angular = raw
            .patch
            .angular
            .unwrap_or_else(|| (1..=m).map(|i| format!("t{i}")).collect());
        if flat.len() != n || angular.len() != m {
            return Err(invalid("patch", "coordinate names do not match n and m"));
        }
        let coords = CoordinateSystem::new(flat, angular).map_err(|e| invalid("patch", e.to_string()))?;
        let patch = Patch::new(coords).map_err(|e| invalid("patch", e.to_string()))?;

        let h = match &raw.twist.h {
            Some(t) => {
                let w = parse_form(&patch, "H", t, 3, true)?;
                Some(Flux::new(w).map_err(|e| invalid("H", e.to_string()))?)
            }
            None => None,
        };
        let t = &raw.twist;
        let reduction = if t.f_a.is_some() || t.f_ahat.is_some() || t.h3.is_some() {
            if m != 0 {
                return Err(invalid("twist", "bundle data needs a flat base patch (m = 0)"));
            }
            let get = |key: &str, v: &Option<String>, k: usize| -> Result<DiffForm, ConfigError> {
                match v {
                    Some(s) => parse_form(&patch, key, s, k, key != "H3"),
                    None => Ok(DiffForm::zero(n, m)),
                }
            };
            let f_a = get("F_A", &t.f_a, 2)?;
            let f_ahat = get("F_Ahat", &t.f_ahat, 2)?;
            let h3 = get("H3", &t.h3, 3)?;
            if n == 0 && (t.f_a.is_some() || t.f_ahat.is_some()) && (!f_a.is_zero() || !f_ahat.is_zero()) {
                return Err(invalid("twist", "curvature over a point must vanish"));
            }
            Some(ReductionData::new(f_a, h3, f_ahat).map_err(|e| invalid("twist", e.to_string()))?)
        } else {
            None
        };

        let r = raw.run;
        let suites = match r.suites {
            Some(v) => {
                let mut s = v.iter().map(|x| x.parse()).collect::<Result<Vec<SuiteName>, _>>()?;
                s.sort();
                s.dedup();
                s
            }
            None => SuiteName::ALL.to_vec(),
        };
        let samples = r.samples.unwrap_or(20);
        if samples == 0 {
            return Err(invalid("run.samples", "must be positive"));
        }
        let max_weight = r.max_weight.unwrap_or(2);
        if !(0..=4).contains(&max_weight) {
            return Err(invalid("run.max_weight", "must lie in 0..=4"));
        }
        let order = r.order.unwrap_or(4);
        if order > 8 {
            return Err(invalid("run.order", "must be at most 8"));
        }
        Ok(SuiteConfig {
            patch,
            h,
            reduction,
            suites,
            seed: r.seed.unwrap_or(0),
            samples,
            order,
            max_weight,
            max_poly_degree: r.max_poly_degree.unwrap_or(2),
            corrupted: r.corrupted.unwrap_or(false),
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        self.patch.dims()
    }

    /// The selected suites belonging to `g`.
    pub fn suites_in(&self, g: Group) -> Vec<SuiteName> {
        self.suites.iter().copied().filter(|s| s.group() == g).collect()
    }
}
