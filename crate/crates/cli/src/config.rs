use std::path::Path;

use nalgebra::DVector;
use serde::Deserialize;

use staf_core::adp::{AdpConfig, Excitation, GradientConvention, GroundTruth};
use staf_core::centers::{adp_centers, polygon_centers, triangle_centers, CenterMap};
use staf_core::chase::ChaseConfig;
use staf_core::dynamics::{BoxDomain, RegulatorDrift};
use staf_core::Point;

use crate::CliError;

/// Contents of a `--config` file. Every key is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub out: Option<String>,
    #[serde(default)]
    pub centers: CentersSection,
    #[serde(default)]
    pub chase: ChaseSection,
    #[serde(default)]
    pub adp: AdpSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CentersSection {
    pub kind: Option<CenterKind>,
    pub radius: Option<f64>,
    pub count: Option<usize>,
    pub phase: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CenterKind {
    Triangle,
    Adp,
    Polygon,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChaseSection {
    pub dt: Option<f64>,
    pub total_time: Option<f64>,
    pub inner_iterations: Option<usize>,
    pub x0: Option<Vec<f64>>,
    pub a0: Option<Vec<f64>>,
    pub domain_half_width: Option<f64>,
    pub condition_cap: Option<f64>,
    pub transient: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdpSection {
    pub dt: Option<f64>,
    pub total_time: Option<f64>,
    pub x0: Option<Vec<f64>>,
    pub critic0: Option<Vec<f64>>,
    pub actor0: Option<Vec<f64>>,
    pub critic_gain: Option<f64>,
    pub actor_gain: Option<f64>,
    pub state_cap: Option<f64>,
    pub weight_cap: Option<f64>,
    pub convention: Option<Convention>,
    pub drift: Option<Drift>,
    pub ground_truth: Option<bool>,
    pub excitation_amplitude: Option<f64>,
    pub excitation_duration: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    Partial,
    Total,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Drift {
    Standard,
    Abbreviated,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub out: Option<String>,
    pub dt: Option<f64>,
    pub total_time: Option<f64>,
    pub inner_iterations: Option<usize>,
    pub x0: Option<Vec<f64>>,
    pub seed: Option<u64>,
    pub ground_truth: Option<bool>,
}

pub fn load(path: Option<&Path>) -> Result<FileConfig, CliError> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn point(name: &str, values: Vec<f64>, dim: usize) -> Result<Point, CliError> {
    if values.len() != dim {
        return Err(CliError::Config(format!(
            "{name} needs {dim} values, got {}",
            values.len()
        )));
    }
    Ok(Point::from_vec(values))
}

pub fn center_map(section: &CentersSection, default: CenterKind) -> Result<CenterMap, CliError> {
    let kind = section.kind.unwrap_or(default);
    let map = match kind {
        CenterKind::Triangle => {
            if section.count.is_some() || section.phase.is_some() {
                return Err(CliError::Config(
                    "centers.count and centers.phase apply only to kind = \"polygon\"".into(),
                ));
            }
            triangle_centers(section.radius.unwrap_or(0.1))
        }
        CenterKind::Polygon => polygon_centers(
            section.count.unwrap_or(3),
            section.radius.unwrap_or(0.1),
            section.phase.unwrap_or(0.0),
        ),
        CenterKind::Adp => {
            if section.radius.is_some() || section.count.is_some() || section.phase.is_some() {
                return Err(CliError::Config(
                    "kind = \"adp\" takes no radius, count or phase".into(),
                ));
            }
            Ok(adp_centers())
        }
    };
    map.map_err(CliError::from)
}

pub struct ChaseSetup {
    pub config: ChaseConfig,
    pub centers: CenterMap,
    pub transient: f64,
    pub out: Option<String>,
}

pub fn chase_setup(file: FileConfig, cli: Overrides) -> Result<ChaseSetup, CliError> {
    let centers = center_map(&file.centers, CenterKind::Triangle)?;
    let s = file.chase;
    let mut config = ChaseConfig::default();
    if let Some(v) = cli.dt.or(s.dt) {
        config.dt = v;
    }
    if let Some(v) = cli.total_time.or(s.total_time) {
        config.total_time = v;
    }
    if let Some(v) = cli.inner_iterations.or(s.inner_iterations) {
        config.inner_iterations = v;
    }
    if let Some(v) = cli.x0.or(s.x0) {
        config.initial_state = point("x0", v, 2)?;
    }
    config.initial_weights = match s.a0 {
        Some(v) => point("a0", v, centers.count())?,
        None => DVector::zeros(centers.count()),
    };
    if let Some(hw) = s.domain_half_width {
        config.domain = Some(BoxDomain::symmetric(2, hw)?);
    }
    if let Some(cap) = s.condition_cap {
        config.gram.condition_cap = cap;
    }
    config.validate()?;
    let transient = s.transient.unwrap_or(1.0);
    if !(transient >= 0.0 && transient.is_finite()) {
        return Err(CliError::Config(
            "chase.transient must be finite and >= 0".into(),
        ));
    }
    Ok(ChaseSetup {
        config,
        centers,
        transient,
        out: cli.out.or(file.out),
    })
}

pub struct AdpSetup {
    pub config: AdpConfig,
    pub centers: CenterMap,
    pub convention: GradientConvention,
    pub drift: RegulatorDrift,
    pub out: Option<String>,
}

pub fn adp_setup(file: FileConfig, cli: Overrides) -> Result<AdpSetup, CliError> {
    let centers = center_map(&file.centers, CenterKind::Adp)?;
    let m = centers.count();
    let s = file.adp;
    let mut config = AdpConfig {
        initial_critic: DVector::from_element(m, 1.0),
        initial_actor: DVector::from_element(m, 1.0),
        ..AdpConfig::default()
    };
    if let Some(v) = cli.dt.or(s.dt) {
        config.dt = v;
    }
    if let Some(v) = cli.total_time.or(s.total_time) {
        config.total_time = v;
    }
    if let Some(v) = cli.x0.or(s.x0) {
        config.initial_state = point("x0", v, 2)?;
    }
    if let Some(v) = s.critic0 {
        config.initial_critic = point("critic0", v, m)?;
    }
    if let Some(v) = s.actor0 {
        config.initial_actor = point("actor0", v, m)?;
    }
    if let Some(v) = s.critic_gain {
        config.critic_gain = v;
    }
    if let Some(v) = s.actor_gain {
        config.actor_gain = v;
    }
    if let Some(v) = s.state_cap {
        config.state_cap = v;
    }
    if let Some(v) = s.weight_cap {
        config.weight_cap = v;
    }
    let ground_truth = cli.ground_truth.or(s.ground_truth).unwrap_or(true);
    config.ground_truth = ground_truth.then(GroundTruth::regulator);
    let amplitude = s.excitation_amplitude.unwrap_or(0.0);
    if amplitude != 0.0 {
        let duration = s.excitation_duration.unwrap_or(5.0);
        let seed = cli.seed.or(file.seed).unwrap_or(0);
        config.excitation = Some(Excitation::with_seed(amplitude, duration, seed));
    } else if s.excitation_duration.is_some() {
        return Err(CliError::Config(
            "adp.excitation_duration set without adp.excitation_amplitude".into(),
        ));
    }
    config.validate()?;
    let convention = match s.convention {
        Some(Convention::Total) => GradientConvention::Total,
        _ => GradientConvention::Partial,
    };
    let drift = match s.drift {
        Some(Drift::Abbreviated) => RegulatorDrift::Abbreviated,
        _ => RegulatorDrift::Standard,
    };
    Ok(AdpSetup {
        config,
        centers,
        convention,
        drift,
        out: cli.out.or(file.out),
    })
}
