//! JSON form of the model parameters:
//!
//! ```json
//! {"xi": [0, 0], "Omega": [[1, 0], [0, 1]], "alpha": [3, 0],
//!  "mixing": {"type": "st", "nu": 5}}
//! ```
//!
//! `mixing.type` is one of `sn`, `st` (with `nu`), `sde` (optional `p`,
//! defaulting to the model dimension) or `ssl` (with `q`).

use serde::{Deserialize, Serialize};

use super::SmsnParams;
use crate::error::{Error, Result};
use crate::mixing::MixingDistribution;
use crate::numerics::{Matrix, Vector};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsDocument {
    pub xi: Vec<f64>,
    #[serde(rename = "Omega")]
    pub omega: Vec<Vec<f64>>,
    pub alpha: Vec<f64>,
    pub mixing: MixingDocument,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum MixingDocument {
    Sn,
    St {
        nu: f64,
    },
    Sde {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        p: Option<usize>,
    },
    Ssl {
        q: f64,
    },
}

impl MixingDocument {
    pub fn to_mixing(self, dim: usize) -> Result<MixingDistribution<f64>> {
        match self {
            Self::Sn => Ok(MixingDistribution::Degenerate),
            Self::St { nu } => MixingDistribution::skew_t(nu),
            Self::Sde { p } => MixingDistribution::skew_double_exponential(p.unwrap_or(dim)),
            Self::Ssl { q } => MixingDistribution::skew_slash(q),
        }
    }

    pub fn from_mixing(mixing: &MixingDistribution<f64>) -> Self {
        match *mixing {
            MixingDistribution::Degenerate => Self::Sn,
            MixingDistribution::InvSqrtChiSq { nu } => Self::St { nu },
            MixingDistribution::SqrtGamma { dim } => Self::Sde { p: Some(dim) },
            MixingDistribution::InvPowUniform { q } => Self::Ssl { q },
        }
    }
}

impl ParamsDocument {
    pub fn to_params(&self) -> Result<SmsnParams<f64>> {
        let xi = Vector::new(self.xi.clone())?;
        let omega = Matrix::from_rows(&self.omega)?;
        let alpha = Vector::new(self.alpha.clone())?;
        let mixing = self.mixing.to_mixing(xi.dim())?;
        SmsnParams::new(xi, omega, alpha, mixing)
    }

    pub fn from_params(params: &SmsnParams<f64>) -> Self {
        Self {
            xi: params.location().as_slice().to_vec(),
            omega: params.scale().to_rows(),
            alpha: params.shape().as_slice().to_vec(),
            mixing: MixingDocument::from_mixing(params.mixing()),
        }
    }
}

impl SmsnParams<f64> {
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ParamsDocument =
            serde_json::from_str(text).map_err(|e| Error::InvalidParameter(format!("parameter JSON: {e}")))?;
        doc.to_params()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ParamsDocument::from_params(self)).expect("parameters serialize")
    }
}
