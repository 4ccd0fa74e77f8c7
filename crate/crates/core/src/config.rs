//! Model configuration files.
//!
//! A model is described by a TOML document with sections `[phi]`, `[dist]`,
//! `[q]`, `[lattice]` and `[initial]`. Rationals are written as `"p/q"`
//! strings so values survive the round trip exactly:
//!
//! ```toml
//! [phi]
//! kind = "power_sum"        # "constant" | "power_sum" | "reciprocal_periodic"
//! m = 1
//! include_zero_term = false
//!
//! [dist]
//! kind = "linear"           # "linear" | "polynomial" | "piecewise_linear"
//!
//! [q]
//! kind = "zero"             # "zero" | "constant" | "lattice_periodic"
//!
//! [lattice]
//! kind = "arithmetic"       # "arithmetic" | "explicit"
//! kappa = 1
//!
//! [initial]
//! rule = "fixed"            # "virtual_zeroth" | "fixed"
//! value = 1
//! ```

use num::bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::dist::{DistKind, DistributionFamily, Knot};
use crate::error::{Error, Result};
use crate::lattice::GoodSequence;
use crate::model::{InitialRule, OppenheimModel};
use crate::phi::PhiFamily;
use crate::qspec::QSpec;
use crate::rational::parse_rational;

/// Parsed model configuration, convertible to an [`OppenheimModel`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub phi: PhiSection,
    pub dist: DistSection,
    #[serde(default)]
    pub q: QSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<LatticeSection>,
    #[serde(default)]
    pub initial: InitialSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PhiSection {
    Constant { value: String },
    PowerSum {
        m: u32,
        #[serde(default)]
        include_zero_term: bool,
    },
    ReciprocalPeriodic { periods: Vec<u64> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistSection {
    Linear,
    Polynomial { coefficients: Vec<String> },
    PiecewiseLinear { knots: Vec<[String; 2]> },
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum QSection {
    #[default]
    Zero,
    Constant { value: String },
    LatticePeriodic { values: Vec<u64> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LatticeSection {
    Arithmetic { kappa: u64 },
    Explicit { values: Vec<u64>, tail_step: u64 },
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSection {
    #[default]
    VirtualZeroth,
    Fixed { value: u64 },
}

/// Keys allowed in a section besides its tag, by `(section, tag value)`.
/// Serde's unknown-field rejection does not reach inside tag-dispatched
/// enums, so section keys are checked against the schema by hand.
fn allowed_keys(section: &str, tag: &str) -> Option<&'static [&'static str]> {
    Some(match (section, tag) {
        ("phi", "constant") => &["value"],
        ("phi", "power_sum") => &["m", "include_zero_term"],
        ("phi", "reciprocal_periodic") => &["periods"],
        ("dist", "linear") => &[],
        ("dist", "polynomial") => &["coefficients"],
        ("dist", "piecewise_linear") => &["knots"],
        ("q", "zero") => &[],
        ("q", "constant") => &["value"],
        ("q", "lattice_periodic") => &["values"],
        ("lattice", "arithmetic") => &["kappa"],
        ("lattice", "explicit") => &["values", "tail_step"],
        ("initial", "virtual_zeroth") => &[],
        ("initial", "fixed") => &["value"],
        _ => return None,
    })
}

fn reject_unknown_keys(text: &str) -> Result<()> {
    let raw: toml::Table =
        toml::from_str(text).map_err(|e| Error::InvalidConfig(format!("model config: {e}")))?;
    for (section, value) in &raw {
        let Some(table) = value.as_table() else {
            continue;
        };
        let tag_key = if section == "initial" { "rule" } else { "kind" };
        let Some(tag) = table.get(tag_key).and_then(|v| v.as_str()) else {
            continue;
        };
        let Some(allowed) = allowed_keys(section, tag) else {
            continue;
        };
        for key in table.keys() {
            if key != tag_key && !allowed.contains(&key.as_str()) {
                return Err(Error::InvalidConfig(format!(
                    "model config: unknown key `{section}.{key}` for {tag_key} \"{tag}\""
                )));
            }
        }
    }
    Ok(())
}

impl ModelConfig {
    /// Parses a TOML document.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg =
            toml::from_str(text).map_err(|e| Error::InvalidConfig(format!("model config: {e}")))?;
        reject_unknown_keys(text)?;
        Ok(cfg)
    }

    /// Serializes back to TOML.
    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// JSON echo for reports and manifests.
    pub fn echo_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }

    /// Builds and structurally validates the model.
    pub fn build(&self) -> Result<OppenheimModel> {
        let phi = match &self.phi {
            PhiSection::Constant { value } => PhiFamily::Constant {
                value: parse_rational(value)?,
            },
            PhiSection::PowerSum {
                m,
                include_zero_term,
            } => PhiFamily::PowerSum {
                m: *m,
                include_zero_term: *include_zero_term,
            },
            PhiSection::ReciprocalPeriodic { periods } => PhiFamily::ReciprocalPeriodic {
                denominators: periods.clone(),
            },
        };
        let dist = match &self.dist {
            DistSection::Linear => DistributionFamily::linear(),
            DistSection::Polynomial { coefficients } => {
                let coefficients = coefficients
                    .iter()
                    .map(|s| parse_rational(s))
                    .collect::<Result<Vec<_>>>()?;
                DistributionFamily::Identical(DistKind::Polynomial { coefficients })
            }
            DistSection::PiecewiseLinear { knots } => {
                let knots = knots
                    .iter()
                    .map(|[t, v]| {
                        Ok(Knot {
                            t: parse_rational(t)?,
                            v: parse_rational(v)?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                DistributionFamily::Identical(DistKind::PiecewiseLinear { knots })
            }
        };
        let q = match &self.q {
            QSection::Zero => QSpec::Zero,
            QSection::Constant { value } => QSpec::Constant {
                value: parse_rational(value)?,
            },
            QSection::LatticePeriodic { values } => QSpec::LatticePeriodic {
                values: values.clone(),
            },
        };
        let lattice = match &self.lattice {
            None => None,
            Some(LatticeSection::Arithmetic { kappa }) => {
                Some(GoodSequence::Arithmetic { kappa: *kappa })
            }
            Some(LatticeSection::Explicit { values, tail_step }) => Some(GoodSequence::Explicit {
                values: values.clone(),
                tail_step: *tail_step,
            }),
        };
        let initial = match &self.initial {
            InitialSection::VirtualZeroth => InitialRule::VirtualZeroth,
            InitialSection::Fixed { value } => InitialRule::Fixed(BigInt::from(*value)),
        };
        OppenheimModel::new(phi, dist, q, initial, lattice)
    }
}
