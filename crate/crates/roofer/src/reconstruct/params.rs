//! The intermediate JSON parameter file: fitted primitive parameters
//! grouped with their cost and metadata, written after fitting and consumed
//! by the reconstruction step.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimizer::CostBreakdown;
use crate::pointcloud::{GlobalTranslation, Point3};
use crate::primitives::{Pose, PrimitiveKind, RoofPrimitive, ShapeParams};
use crate::util::atomic_write;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ThetaP {
    pub l: f64,
    pub w: f64,
    pub h: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Theta0 {
    pub kappa: f64,
    pub t: [f64; 3],
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CostJson {
    pub j1: f64,
    pub j2: f64,
    pub beta: f64,
    pub j: f64,
}

/// Serialized form of a fitted primitive.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ParamsFile {
    pub kind: PrimitiveKind,
    pub theta_p: ThetaP,
    pub theta_0: Theta0,
    pub t_global: [f64; 3],
    pub cost: CostJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub srs_name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub converged: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
}

impl ParamsFile {
    pub fn new(prim: &RoofPrimitive, cost: &CostBreakdown) -> ParamsFile {
        ParamsFile {
            kind: prim.kind,
            theta_p: ThetaP {
                l: prim.shape.length,
                w: prim.shape.width,
                h: prim.shape.rise,
                rho: prim.shape.ridge_ratio,
            },
            theta_0: Theta0 {
                kappa: prim.pose.rotation,
                t: [
                    prim.pose.translation.x,
                    prim.pose.translation.y,
                    prim.pose.translation.z,
                ],
            },
            t_global: [prim.t_global.x, prim.t_global.y, prim.t_global.z],
            cost: CostJson {
                j1: cost.j1,
                j2: cost.j2,
                beta: cost.beta,
                j: cost.j,
            },
            srs_name: None,
            converged: None,
            id: None,
        }
    }

    pub fn primitive(&self) -> Result<RoofPrimitive> {
        let shape = ShapeParams {
            length: self.theta_p.l,
            width: self.theta_p.w,
            rise: self.theta_p.h,
            ridge_ratio: self.theta_p.rho,
        };
        let prim = RoofPrimitive {
            kind: self.kind,
            shape,
            pose: Pose::new(
                self.theta_0.kappa,
                Point3::new(self.theta_0.t[0], self.theta_0.t[1], self.theta_0.t[2]),
            ),
            t_global: GlobalTranslation::new(self.t_global[0], self.t_global[1], self.t_global[2]),
        };
        prim.validate()?;
        Ok(prim)
    }

    pub fn cost_breakdown(&self) -> CostBreakdown {
        CostBreakdown {
            j1: self.cost.j1,
            j2: self.cost.j2,
            beta: self.cost.beta,
            j: self.cost.j,
        }
    }
}

/// Serialize to pretty JSON.
pub fn params_to_json(params: &ParamsFile) -> String {
    serde_json::to_string_pretty(params).expect("params serialize")
}

/// Parse and validate a params document; schema violations surface the
/// offending field in the message.
pub fn params_from_json(text: &str) -> Result<ParamsFile> {
    let params: ParamsFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        message: e.to_string(),
    })?;
    params.primitive()?;
    Ok(params)
}

pub fn write_params_json(params: &ParamsFile, path: &Path) -> Result<()> {
    atomic_write(path, params_to_json(params).as_bytes())
}

pub fn read_params_json(path: &Path) -> Result<ParamsFile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    params_from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hip_params() -> ParamsFile {
        let prim = RoofPrimitive {
            kind: PrimitiveKind::Hip,
            shape: ShapeParams::new_hip(11.25, 7.5, 2.875, 0.4375),
            pose: Pose::new(0.3125, Point3::new(0.125, -0.25, 4.5)),
            t_global: GlobalTranslation::new(583_012.5, 4_507_250.25, 11.125),
        };
        let cost = CostBreakdown {
            j1: 0.0625,
            j2: 0.03125,
            beta: 10.0,
            j: 0.375,
        };
        ParamsFile::new(&prim, &cost)
    }

    #[test]
    fn roundtrip_is_exact() {
        let params = hip_params();
        let text = params_to_json(&params);
        let back = params_from_json(&text).unwrap();
        assert_eq!(back, params);
        assert_eq!(back.primitive().unwrap(), params.primitive().unwrap());
    }

    #[test]
    fn rho_present_only_for_hip() {
        let hip_text = params_to_json(&hip_params());
        assert!(hip_text.contains("\"rho\""));

        let gable = RoofPrimitive {
            kind: PrimitiveKind::Gable,
            shape: ShapeParams::new(10.0, 8.0, 3.0),
            pose: Pose::IDENTITY,
            t_global: GlobalTranslation::ZERO,
        };
        let cost = CostBreakdown {
            j1: 0.0,
            j2: 0.0,
            beta: 10.0,
            j: 0.0,
        };
        let gable_text = params_to_json(&ParamsFile::new(&gable, &cost));
        assert!(!gable_text.contains("\"rho\""));
    }

    #[test]
    fn missing_kind_names_the_field() {
        let text = r#"{
            "theta_p": {"l": 10.0, "w": 8.0, "h": 3.0},
            "theta_0": {"kappa": 0.0, "t": [0.0, 0.0, 0.0]},
            "t_global": [0.0, 0.0, 0.0],
            "cost": {"j1": 0.0, "j2": 0.0, "beta": 10.0, "j": 0.0}
        }"#;
        let err = params_from_json(text).unwrap_err();
        assert!(err.to_string().contains("kind"), "message: {err}");
    }

    #[test]
    fn hip_without_rho_is_invalid() {
        let text = r#"{
            "kind": "hip",
            "theta_p": {"l": 10.0, "w": 8.0, "h": 3.0},
            "theta_0": {"kappa": 0.0, "t": [0.0, 0.0, 0.0]},
            "t_global": [0.0, 0.0, 0.0],
            "cost": {"j1": 0.0, "j2": 0.0, "beta": 10.0, "j": 0.0}
        }"#;
        let err = params_from_json(text).unwrap_err();
        assert!(err.to_string().contains("rho"), "message: {err}");
    }

    #[test]
    fn file_roundtrip() {
        let dir = std::env::temp_dir().join(format!("roofer-params-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("b1.json");
        let params = hip_params();
        write_params_json(&params, &path).unwrap();
        assert_eq!(read_params_json(&path).unwrap(), params);
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
