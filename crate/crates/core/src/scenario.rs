//! Scenario configuration (TOML).
//!
//! Relative paths inside a scenario are resolved against the directory of
//! the scenario file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::calibration::CalibrationSpec;
use crate::channel::{ChannelConfig, InterfaceModel};
use crate::error::{Error, Result};
use crate::interface::{
    fit_logistic, fit_velocity_polynomials, read_profile_csv, Fragment, VelocityPolynomials,
    DEFAULT_WALL_TEMPERATURE_OFFSET,
};
use crate::props::{Polynomial, PropertyModel, Species, SpeciesRole};
use crate::subgrid::SubgridSettings;
use crate::two_step::TwoStepParams;
use crate::wall_law::WallLawParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FoulingModel {
    WallFunction,
    TwoStep,
    Both,
}

impl FoulingModel {
    pub fn wall_function(self) -> bool {
        matches!(self, Self::WallFunction | Self::Both)
    }

    pub fn two_step(self) -> bool {
        matches!(self, Self::TwoStep | Self::Both)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeciesConfig {
    pub name: String,
    pub molar_mass: f64,
    pub role: SpeciesRole,
    #[serde(default)]
    pub heat_capacity: Option<f64>,
}

/// Overrides of the water-like property defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropertiesConfig {
    pub species: Option<Vec<SpeciesConfig>>,
    pub density: Option<Polynomial>,
    pub viscosity: Option<Polynomial>,
    pub saturation: Option<Polynomial>,
    pub diffusivity: Option<f64>,
    pub conductivity: Option<f64>,
    pub heat_capacity: Option<f64>,
    pub turbulent_schmidt: Option<f64>,
    pub turbulent_prandtl: Option<f64>,
    pub t_min: Option<f64>,
    pub t_max: Option<f64>,
}

impl PropertiesConfig {
    pub fn build(&self) -> Result<PropertyModel> {
        let mut m = PropertyModel::water_like();
        if let Some(species) = &self.species {
            m.species = species
                .iter()
                .map(|s| Species {
                    name: s.name.clone(),
                    molar_mass: s.molar_mass,
                    role: s.role,
                    heat_capacity: s.heat_capacity,
                })
                .collect();
        }
        macro_rules! apply {
            ($($field:ident),*) => {$(
                if let Some(v) = &self.$field {
                    m.$field = v.clone();
                }
            )*};
        }
        apply!(density, viscosity, saturation, diffusivity, conductivity, heat_capacity,
               turbulent_schmidt, turbulent_prandtl, t_min, t_max);
        m.validate()?;
        Ok(m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterfaceConfig {
    #[serde(default = "default_offset")]
    pub wall_temperature_offset: f64,
    pub polynomials: Option<VelocityPolynomials>,
    /// Config fragment written by the fit command.
    pub polynomials_file: Option<PathBuf>,
    /// Profile CSVs, one per inlet velocity, fitted at load time.
    pub data_files: Option<Vec<PathBuf>>,
}

fn default_offset() -> f64 {
    DEFAULT_WALL_TEMPERATURE_OFFSET
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub output_dir: PathBuf,
    pub fouling_model: FoulingModel,
    #[serde(default)]
    pub properties: PropertiesConfig,
    #[serde(default)]
    pub channel: ChannelConfig,
    #[serde(default)]
    pub wall_law: WallLawParams,
    pub interface_bc: InterfaceConfig,
    #[serde(default)]
    pub subgrid: SubgridSettings,
    #[serde(default)]
    pub two_step: TwoStepParams,
    pub calibration: Option<CalibrationSpec>,
}

/// A parsed and validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub file: ScenarioFile,
    pub path: PathBuf,
    pub props: PropertyModel,
    /// SHA-256 of the scenario text.
    pub config_hash: String,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    /// Parses `text` as if it were read from `path`.
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let file: ScenarioFile =
            toml::from_str(text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let props = file.properties.build()?;
        file.channel.validate()?;
        file.wall_law.validate()?;
        file.subgrid.validate()?;
        file.two_step.validate()?;
        if let Some(c) = &file.calibration {
            c.validate()?;
        }
        let scenario = Self {
            config_hash: hex::encode(Sha256::digest(text.as_bytes())),
            path: path.to_path_buf(),
            props,
            file,
        };
        scenario.check_interface()?;
        Ok(scenario)
    }

    pub fn base_dir(&self) -> PathBuf {
        self.path.parent().map(Path::to_path_buf).unwrap_or_default()
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir().join(p)
        }
    }

    pub fn output_dir(&self) -> PathBuf {
        self.resolve(&self.file.output_dir)
    }

    fn check_interface(&self) -> Result<()> {
        let bc = &self.file.interface_bc;
        let given = [bc.polynomials.is_some(), bc.polynomials_file.is_some(), bc.data_files.is_some()];
        if given.iter().filter(|g| **g).count() != 1 {
            return Err(Error::Config(
                "interface_bc needs exactly one of `polynomials`, `polynomials_file`, `data_files`".into(),
            ));
        }
        if !(bc.wall_temperature_offset.is_finite()) {
            return Err(Error::Config("wall_temperature_offset must be finite".into()));
        }
        if let Some(vp) = &bc.polynomials {
            vp.validate()?;
        }
        let files = bc.polynomials_file.iter().chain(bc.data_files.iter().flatten());
        for f in files {
            let p = self.resolve(f);
            if !p.is_file() {
                return Err(Error::Config(format!("referenced file {} does not exist", p.display())));
            }
        }
        Ok(())
    }

    /// Interface model, reading or fitting the polynomials as configured.
    pub fn interface_model(&self) -> Result<InterfaceModel> {
        let bc = &self.file.interface_bc;
        let polynomials = if let Some(vp) = &bc.polynomials {
            vp.clone()
        } else if let Some(f) = &bc.polynomials_file {
            let path = self.resolve(f);
            let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            let fragment = Fragment::from_toml(&text)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            fragment.interface_bc.polynomials
        } else {
            let files = bc.data_files.as_deref().unwrap_or_default();
            let per_velocity = files
                .iter()
                .map(|f| {
                    let data = read_profile_csv(&self.resolve(f))?;
                    Ok((data.u_in, fit_logistic(&data.fit_samples())?.params))
                })
                .collect::<Result<Vec<_>>>()?;
            fit_velocity_polynomials(&per_velocity)?.polynomials
        };
        polynomials.validate()?;
        Ok(InterfaceModel {
            polynomials,
            wall_temperature_offset: bc.wall_temperature_offset,
        })
    }
}
