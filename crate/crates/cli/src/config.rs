//! JSON run configuration: schema-validated, unknown keys rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use mmfem_core::assembly::RegionMaterials;
use mmfem_core::error::{Error, Result};
use mmfem_core::materials::IsotropicParams;
use mmfem_core::solver::{SolveMethod, SolverSettings};
use mmfem_core::studies::{AnnulusCase, Bvp, ElasticTensorKind, Pairing, StudySpec};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub study: StudyConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub materials: Option<MaterialsConfig>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_seed() -> u64 {
    0x5eed
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub bvp: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub case: Option<String>,
    pub pairing: String,
    pub level: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lc: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lc_sweep: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<usize>>,
    /// Tensor for `T2-elastic` runs: "macro", "micro" or "e".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elastic_tensor: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MaterialsConfig {
    pub region1: IsotropicParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region2: Option<IsotropicParams>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub method: String,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            method: "auto".into(),
            tolerance: 1e-10,
            max_iterations: 20_000,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub vtk: bool,
    pub csv: bool,
    pub summary: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: PathBuf::from("out"),
            vtk: true,
            csv: true,
            summary: true,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig> {
        let content = std::fs::read_to_string(path)
            .map_err(|e| Error::Parameter(format!("cannot read config {}: {e}", path.display())))?;
        let config: RunConfig = serde_json::from_str(&content).map_err(|e| {
            Error::Parameter(format!(
                "config {} line {} column {}: {e}",
                path.display(),
                e.line(),
                e.column()
            ))
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.bvp()?;
        self.pairing()?;
        self.case()?;
        self.solver_settings()?;
        self.elastic_tensor_kind()?;
        if let Some(m) = &self.materials {
            m.region1.validate()?;
            if let Some(r2) = &m.region2 {
                r2.validate()?;
            }
            let needs_region2 = matches!(self.bvp()?, Bvp::RectBimaterial)
                || matches!(self.case()?, AnnulusCase::B);
            if needs_region2 && m.region2.is_none() {
                return Err(Error::Parameter(
                    "this study has two material regions; materials.region2 is required".into(),
                ));
            }
        }
        if self.study.level > 3 {
            return Err(Error::Parameter(format!(
                "study.level {} out of range 0..=3",
                self.study.level
            )));
        }
        Ok(())
    }

    pub fn bvp(&self) -> Result<Bvp> {
        match self.study.bvp.as_str() {
            "rect-bimaterial" => Ok(Bvp::RectBimaterial),
            "annulus-shear" => Ok(Bvp::AnnulusShear),
            other => Err(Error::Parameter(format!(
                "unknown bvp '{other}'; expected rect-bimaterial or annulus-shear"
            ))),
        }
    }

    pub fn case(&self) -> Result<AnnulusCase> {
        match self.study.case.as_deref() {
            None | Some("A") => Ok(AnnulusCase::A),
            Some("B") => Ok(AnnulusCase::B),
            Some(other) => Err(Error::Parameter(format!(
                "unknown case '{other}'; expected A or B"
            ))),
        }
    }

    pub fn pairing(&self) -> Result<Pairing> {
        Pairing::parse(&self.study.pairing)
    }

    pub fn elastic_tensor_kind(&self) -> Result<ElasticTensorKind> {
        match self.study.elastic_tensor.as_deref() {
            None | Some("macro") => Ok(ElasticTensorKind::Macro),
            Some("micro") => Ok(ElasticTensorKind::Micro),
            Some("e") => Ok(ElasticTensorKind::ElasticE),
            Some(other) => Err(Error::Parameter(format!(
                "unknown elastic_tensor '{other}'; expected macro, micro or e"
            ))),
        }
    }

    pub fn solver_settings(&self) -> Result<SolverSettings> {
        let method = match self.solver.method.as_str() {
            "auto" => SolveMethod::Auto,
            "direct" => SolveMethod::Direct,
            "cg" => SolveMethod::ConjugateGradient,
            other => {
                return Err(Error::Parameter(format!(
                    "unknown solver method '{other}'; expected auto, direct or cg"
                )))
            }
        };
        Ok(SolverSettings {
            method,
            tolerance: self.solver.tolerance,
            max_iterations: self.solver.max_iterations,
        })
    }

    pub fn study_spec(&self) -> Result<StudySpec> {
        Ok(StudySpec {
            bvp: self.bvp()?,
            case: self.case()?,
            pairing: self.pairing()?,
            level: self.study.level,
            l_c: self.study.lc,
            solver: self.solver_settings()?,
            quad_degree: 6,
        })
    }

    /// Region materials: custom block when present, study presets
    /// otherwise; the study-level Lc override applies to both.
    pub fn region_materials(&self) -> Result<RegionMaterials> {
        let materials = match &self.materials {
            Some(m) => {
                let mut pairs = vec![(1u32, m.region1)];
                if let Some(r2) = m.region2 {
                    pairs.push((2, r2));
                }
                RegionMaterials::micromorphic(&pairs)?
            }
            None => mmfem_core::studies::study_materials(self.bvp()?, self.case()?, None)?,
        };
        Ok(match self.study.lc {
            Some(lc) => materials.with_l_c(lc),
            None => materials,
        })
    }
}
