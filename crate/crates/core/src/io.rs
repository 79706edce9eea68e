//! Versioned JSON schemas for configs.
//!
//! Kernels and channels serialize as arrays of rows (row-major over the
//! input tuple, fastest index last). Cross-implementation byte equality is
//! not a goal; value equality within 1e-12 is.
//!
//! Row ordering of the auxiliary factors:
//! - `u_given_s[s][u]`
//! - `v_given_us[u * |S| + s][v]`
//! - `w_given_uvs[(u * |V| + v) * |S| + s][w]`

use serde::{Deserialize, Serialize};

use crate::codec::SimParams;
use crate::dmc::Channel;
use crate::error::{Error, Result};
use crate::prob::{AuxChannel, CondKernel, SourceModel};
use crate::region::{DistortionMeasure, ScenarioConfig};

pub const SCHEMA_VERSION: u32 = 1;

fn schema_version_default() -> u32 {
    SCHEMA_VERSION
}

fn check_version(found: u32) -> Result<()> {
    if found != SCHEMA_VERSION {
        return Err(Error::AlphabetMismatch {
            context: format!("unsupported schema_version {found}, expected {SCHEMA_VERSION}"),
        });
    }
    Ok(())
}

fn flatten(rows: &[Vec<f64>]) -> Vec<f64> {
    rows.iter().flatten().copied().collect()
}

fn to_rows(flat: &[f64], width: usize) -> Vec<Vec<f64>> {
    flat.chunks(width).map(|c| c.to_vec()).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelSchema {
    #[serde(default = "schema_version_default")]
    pub schema_version: u32,
    /// `transition[x][y] = P(y | x)`
    pub transition: Vec<Vec<f64>>,
}

impl ChannelSchema {
    pub fn to_channel(&self) -> Result<Channel<f64>> {
        check_version(self.schema_version)?;
        let rows = self.transition.len();
        let cols = self.transition.first().map_or(0, |r| r.len());
        if self.transition.iter().any(|r| r.len() != cols) {
            return Err(Error::AlphabetMismatch {
                context: "ragged transition matrix".into(),
            });
        }
        Channel::new(rows, cols, flatten(&self.transition))
    }

    pub fn from_channel(ch: &Channel<f64>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            transition: to_rows(ch.transition(), ch.output_size()),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SourceSchema {
    pub p_s: Vec<f64>,
    /// `t_given_s[s][t]`
    pub t_given_s: Vec<Vec<f64>>,
    /// `e_given_t[t][e]`
    pub e_given_t: Vec<Vec<f64>>,
}

impl SourceSchema {
    pub fn to_source(&self) -> Result<SourceModel<f64>> {
        let nt = self.t_given_s.first().map_or(0, |r| r.len());
        let ne = self.e_given_t.first().map_or(0, |r| r.len());
        SourceModel::new(
            self.p_s.clone(),
            CondKernel::new(vec![self.t_given_s.len()], nt, flatten(&self.t_given_s))?,
            CondKernel::new(vec![self.e_given_t.len()], ne, flatten(&self.e_given_t))?,
        )
    }

    pub fn from_source(src: &SourceModel<f64>) -> Self {
        Self {
            p_s: src.p_s().to_vec(),
            t_given_s: to_rows(src.t_given_s().rows(), src.t_size()),
            e_given_t: to_rows(src.e_given_t().rows(), src.e_size()),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DistortionSchema {
    pub recon_size: usize,
    /// `matrix[s][s_hat]`
    pub matrix: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioSchema {
    #[serde(default = "schema_version_default")]
    pub schema_version: u32,
    pub source: SourceSchema,
    pub ch1: ChannelSchema,
    pub ch2: ChannelSchema,
    pub rho1: f64,
    pub rho2: f64,
    /// Defaults to Hamming over the source alphabet when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distortion: Option<DistortionSchema>,
}

impl ScenarioSchema {
    pub fn to_scenario(&self) -> Result<ScenarioConfig<f64>> {
        check_version(self.schema_version)?;
        let src = self.source.to_source()?;
        let distortion = match &self.distortion {
            None => DistortionMeasure::hamming(src.s_size()),
            Some(d) => DistortionMeasure::new(src.s_size(), d.recon_size, flatten(&d.matrix))?,
        };
        ScenarioConfig::new(
            src,
            self.ch1.to_channel()?,
            self.ch2.to_channel()?,
            self.rho1,
            self.rho2,
            distortion,
        )
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AuxSchema {
    #[serde(default = "schema_version_default")]
    pub schema_version: u32,
    pub u_size: usize,
    pub v_size: usize,
    pub w_size: usize,
    pub u_given_s: Vec<Vec<f64>>,
    pub v_given_us: Vec<Vec<f64>>,
    pub w_given_uvs: Vec<Vec<f64>>,
}

impl AuxSchema {
    pub fn to_aux(&self) -> Result<AuxChannel<f64>> {
        check_version(self.schema_version)?;
        let s_size = self.u_given_s.len();
        AuxChannel::new(
            CondKernel::new(vec![s_size], self.u_size, flatten(&self.u_given_s))?,
            CondKernel::new(
                vec![self.u_size, s_size],
                self.v_size,
                flatten(&self.v_given_us),
            )?,
            CondKernel::new(
                vec![self.u_size, self.v_size, s_size],
                self.w_size,
                flatten(&self.w_given_uvs),
            )?,
        )
    }

    pub fn from_aux(aux: &AuxChannel<f64>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            u_size: aux.u_size(),
            v_size: aux.v_size(),
            w_size: aux.w_size(),
            u_given_s: to_rows(aux.u_given_s().rows(), aux.u_size()),
            v_given_us: to_rows(aux.v_given_us().rows(), aux.v_size()),
            w_given_uvs: to_rows(aux.w_given_uvs().rows(), aux.w_size()),
        }
    }
}

/// Bundled experiment config: scenario + auxiliary triple + sim parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSchema {
    #[serde(default = "schema_version_default")]
    pub schema_version: u32,
    pub scenario: ScenarioSchema,
    pub aux: AuxSchema,
    pub sim: SimParams,
    /// Run the exact-leakage oracle after simulating (small n only).
    #[serde(default)]
    pub exact_leakage: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::assemble_joint;

    #[test]
    fn scenario_round_trip_preserves_values() {
        let text = r#"{
            "schema_version": 1,
            "source": {
                "p_s": [0.5, 0.5],
                "t_given_s": [[0.9, 0.1], [0.1, 0.9]],
                "e_given_t": [[0.9, 0.1], [0.1, 0.9]]
            },
            "ch1": {"transition": [[1.0, 0.0], [0.0, 1.0]]},
            "ch2": {"transition": [[0.89, 0.11], [0.11, 0.89]]},
            "rho1": 1.0,
            "rho2": 2.0
        }"#;
        let schema: ScenarioSchema = serde_json::from_str(text).unwrap();
        let sc = schema.to_scenario().unwrap();
        assert_eq!(sc.src.s_size(), 2);
        assert_eq!(sc.distortion.recon_size(), 2);
        assert_eq!(sc.rho2, 2.0);
        // serialize back and reload: same joint law
        let again: ScenarioSchema = serde_json::from_str(
            &serde_json::to_string(&ScenarioSchema {
                schema_version: SCHEMA_VERSION,
                source: SourceSchema::from_source(&sc.src),
                ch1: ChannelSchema::from_channel(&sc.ch1),
                ch2: ChannelSchema::from_channel(&sc.ch2),
                rho1: sc.rho1,
                rho2: sc.rho2,
                distortion: None,
            })
            .unwrap(),
        )
        .unwrap();
        let sc2 = again.to_scenario().unwrap();
        let a = sc.src.joint_ste();
        let b = sc2.src.joint_ste();
        for (x, y) in a.mass().iter().zip(b.mass()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn aux_round_trip() {
        let aux = crate::prob::AuxChannel::<f64>::copies(2, false, true, false);
        let schema = AuxSchema::from_aux(&aux);
        let back = serde_json::from_str::<AuxSchema>(&serde_json::to_string(&schema).unwrap())
            .unwrap()
            .to_aux()
            .unwrap();
        let src = crate::prob::SourceModel::<f64>::binary_symmetric(0.1, 0.1).unwrap();
        let a = assemble_joint(&src, &aux).unwrap();
        let b = assemble_joint(&src, &back).unwrap();
        for (x, y) in a.mass().iter().zip(b.mass()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn unsupported_version_is_rejected() {
        let text = r#"{"schema_version": 9, "transition": [[1.0]]}"#;
        let schema: ChannelSchema = serde_json::from_str(text).unwrap();
        assert!(schema.to_channel().is_err());
    }
}
