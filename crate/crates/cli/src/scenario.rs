//! Scenario files: one JSON object whose `kind` selects the run type.

use std::fmt;
use std::path::Path;

use dsl_core::gravity::{ExperimentConfig, SelfGravitySphere};
use dsl_core::guidance::{Sampling, Symmetry};
use dsl_core::pilot::PilotSpec;
use dsl_core::spectral::GridSpec;
use dsl_core::PhysicalConstants;
use num_complex::Complex;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

/// Steps per run when `dt` is omitted.
pub const DEFAULT_STEPS: f64 = 1000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Evolve,
    Gaussian,
    Trajectories,
    Relax,
    Phases,
    Selfgrav,
}

impl Kind {
    pub const ALL: [Kind; 6] = [
        Kind::Evolve,
        Kind::Gaussian,
        Kind::Trajectories,
        Kind::Relax,
        Kind::Phases,
        Kind::Selfgrav,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kind::Evolve => "evolve",
            Kind::Gaussian => "gaussian",
            Kind::Trajectories => "trajectories",
            Kind::Relax => "relax",
            Kind::Phases => "phases",
            Kind::Selfgrav => "selfgrav",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Initial soliton shape, centred at `center` with `|phi|^2` rms width
/// `width` (for `raised_cosine`, `width` is the half support).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    Gaussian,
    Sech,
    RaisedCosine,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolitonInit {
    pub profile: Profile,
    pub center: Vec<f64>,
    pub width: f64,
    /// Internal wave vector `q`, multiplying the profile by `exp(i q.x)`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub momentum: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveScenario {
    pub constants: PhysicalConstants<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
    pub pilot: PilotSpec<f64>,
    pub grid: GridSpec<f64>,
    pub soliton: SolitonInit,
    #[serde(default)]
    pub t0: f64,
    pub t_final: f64,
    pub dt: Option<f64>,
    /// Steps between rows of the trajectory CSV.
    pub sample_every: Option<usize>,
    /// Largest tolerated width ratio; a breach above it fails the run.
    pub breach_severity: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianScenario {
    pub constants: PhysicalConstants<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
    pub pilot: PilotSpec<f64>,
    /// Real `A(0)` per axis.
    pub a0: Vec<f64>,
    /// Initial barycentre per axis.
    pub x0: Vec<f64>,
    #[serde(default)]
    pub t0: f64,
    pub t_final: f64,
    pub dt: Option<f64>,
    /// When present, the final Gaussian is also written on this grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSpec {
    pub sampling: Sampling<f64>,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoriesScenario {
    pub constants: PhysicalConstants<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
    /// Single-particle pilot; particles move independently.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pilot: Option<PilotSpec<f64>>,
    /// One orbital per particle, combined according to `symmetry`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orbitals: Option<Vec<PilotSpec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symmetry: Option<Symmetry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_positions: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<EnsembleSpec>,
    #[serde(default)]
    pub t0: f64,
    pub t_final: f64,
    pub dt: Option<f64>,
    /// Steps between recorded rows.
    pub record_every: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BinsSpec {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cells: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelaxScenario {
    pub constants: PhysicalConstants<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
    pub pilot: PilotSpec<f64>,
    pub ensemble: EnsembleSpec,
    pub bins: BinsSpec,
    #[serde(default)]
    pub t0: f64,
    pub t_final: f64,
    pub dt: Option<f64>,
    /// Number of equal intervals between H evaluations.
    pub intervals: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhasesScenario {
    pub constants: PhysicalConstants<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
    pub experiment: ExperimentConfig<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelfgravScenario {
    pub constants: PhysicalConstants<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
    pub sphere: SelfGravitySphere<f64>,
    /// Centre-to-centre distances to tabulate, in metres.
    pub distances: Vec<f64>,
    pub tau: f64,
    pub alpha: Complex<f64>,
    pub beta: Complex<f64>,
}

/// A parsed scenario. Serializes with its `kind` tag.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Scenario {
    Evolve(EvolveScenario),
    Gaussian(GaussianScenario),
    Trajectories(TrajectoriesScenario),
    Relax(RelaxScenario),
    Phases(PhasesScenario),
    Selfgrav(SelfgravScenario),
}

macro_rules! each {
    ($s:expr, $v:ident => $e:expr) => {
        match $s {
            Scenario::Evolve($v) => $e,
            Scenario::Gaussian($v) => $e,
            Scenario::Trajectories($v) => $e,
            Scenario::Relax($v) => $e,
            Scenario::Phases($v) => $e,
            Scenario::Selfgrav($v) => $e,
        }
    };
}

impl Scenario {
    pub fn kind(&self) -> Kind {
        match self {
            Scenario::Evolve(_) => Kind::Evolve,
            Scenario::Gaussian(_) => Kind::Gaussian,
            Scenario::Trajectories(_) => Kind::Trajectories,
            Scenario::Relax(_) => Kind::Relax,
            Scenario::Phases(_) => Kind::Phases,
            Scenario::Selfgrav(_) => Kind::Selfgrav,
        }
    }

    pub fn constants(&self) -> &PhysicalConstants<f64> {
        each!(self, s => &s.constants)
    }

    pub fn seed(&self) -> u64 {
        each!(self, s => s.seed)
    }

    pub fn set_seed(&mut self, seed: u64) {
        each!(self, s => s.seed = seed)
    }

    pub fn output_dir(&self) -> Option<&str> {
        each!(self, s => s.output_dir.as_deref())
    }

    pub fn set_output_dir(&mut self, dir: String) {
        each!(self, s => s.output_dir = Some(dir))
    }

    /// Fills documented defaults: `dt = (t_final - t0) / 1000` and the
    /// sampling cadences.
    pub fn fill_defaults(&mut self) {
        let default_dt = |t0: f64, t1: f64| (t1 - t0) / DEFAULT_STEPS;
        match self {
            Scenario::Evolve(s) => {
                let dt = *s.dt.get_or_insert(default_dt(s.t0, s.t_final));
                let steps = steps_for(s.t0, s.t_final, dt);
                s.sample_every.get_or_insert((steps / 200).max(1));
                s.breach_severity.get_or_insert(dsl_core::soliton::BREACH_THRESHOLD);
            }
            Scenario::Gaussian(s) => {
                s.dt.get_or_insert(default_dt(s.t0, s.t_final));
            }
            Scenario::Trajectories(s) => {
                s.dt.get_or_insert(default_dt(s.t0, s.t_final));
                s.record_every.get_or_insert(1);
                if s.orbitals.is_some() {
                    s.symmetry.get_or_insert(Symmetry::Product);
                }
            }
            Scenario::Relax(s) => {
                s.dt.get_or_insert(default_dt(s.t0, s.t_final));
                s.intervals.get_or_insert(10);
            }
            Scenario::Phases(_) | Scenario::Selfgrav(_) => {}
        }
    }

    /// Checks cross-field requirements that serde cannot express.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |path: &str, msg: String| Err(CliError::Config(format!("{path}: {msg}")));
        self.constants()
            .validate()
            .map_err(|e| CliError::Config(format!("constants: {e}")))?;
        let check_time = |t0: f64, t1: f64, dt: Option<f64>| -> Result<(), CliError> {
            if !(t1 > t0) || !t1.is_finite() || !t0.is_finite() {
                return bad("t_final", format!("must exceed t0 = {t0}, got {t1}"));
            }
            match dt {
                Some(dt) if !(dt > 0.0) || !dt.is_finite() => bad("dt", format!("must be positive, got {dt}")),
                _ => Ok(()),
            }
        };
        match self {
            Scenario::Evolve(s) => {
                check_time(s.t0, s.t_final, s.dt)?;
                if !(s.soliton.width > 0.0) || !s.soliton.width.is_finite() {
                    return bad("soliton.width", format!("must be positive, got {}", s.soliton.width));
                }
                if s.sample_every == Some(0) {
                    return bad("sample_every", "must be at least 1".into());
                }
            }
            Scenario::Gaussian(s) => check_time(s.t0, s.t_final, s.dt)?,
            Scenario::Trajectories(s) => {
                check_time(s.t0, s.t_final, s.dt)?;
                match (&s.pilot, &s.orbitals) {
                    (Some(_), None) => {
                        if s.initial_positions.is_some() == s.ensemble.is_some() {
                            return bad(
                                "initial_positions",
                                "give exactly one of `initial_positions` and `ensemble`".into(),
                            );
                        }
                        if s.symmetry.is_some() {
                            return bad("symmetry", "only applies together with `orbitals`".into());
                        }
                    }
                    (None, Some(orbitals)) => {
                        if s.ensemble.is_some() {
                            return bad("ensemble", "not supported with `orbitals`".into());
                        }
                        let n = s.initial_positions.as_ref().map_or(0, Vec::len);
                        if n != orbitals.len() {
                            return bad(
                                "initial_positions",
                                format!("need one position per orbital ({}), got {n}", orbitals.len()),
                            );
                        }
                    }
                    _ => return bad("pilot", "give exactly one of `pilot` and `orbitals`".into()),
                }
                if s.record_every == Some(0) {
                    return bad("record_every", "must be at least 1".into());
                }
            }
            Scenario::Relax(s) => {
                check_time(s.t0, s.t_final, s.dt)?;
                if s.intervals == Some(0) {
                    return bad("intervals", "must be at least 1".into());
                }
                if s.bins.cells.is_some() && s.bins.width.is_some() {
                    return bad("bins", "give at most one of `cells` and `width`".into());
                }
            }
            Scenario::Phases(_) => {}
            Scenario::Selfgrav(s) => {
                if s.distances.is_empty() {
                    return bad("distances", "needs at least one entry".into());
                }
            }
        }
        Ok(())
    }
}

/// Number of steps of at most `dt` covering `[t0, t1]`.
pub fn steps_for(t0: f64, t1: f64, dt: f64) -> usize {
    ((t1 - t0) / dt).ceil().max(0.0) as usize
}

impl<'de> Deserialize<'de> for Scenario {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let value = Value::deserialize(d)?;
        from_value(value).map_err(serde::de::Error::custom)
    }
}

fn typed<T: serde::de::DeserializeOwned>(value: Value) -> Result<T, CliError> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner().to_string();
        CliError::Config(describe(&path, &inner))
    })
}

/// Joins the failing path with the field named by a missing-field message,
/// so a missing `mass` under `constants` reads `constants.mass`.
fn describe(path: &str, message: &str) -> String {
    let base = if path == "." { "" } else { path };
    if let Some(field) = message
        .strip_prefix("missing field `")
        .and_then(|rest| rest.split('`').next())
    {
        let full = if base.is_empty() {
            field.to_string()
        } else {
            format!("{base}.{field}")
        };
        return format!("{full}: missing required field");
    }
    if base.is_empty() {
        message.to_string()
    } else {
        format!("{base}: {message}")
    }
}

/// Parses a scenario from a JSON value without filling defaults.
pub fn from_value(mut value: Value) -> Result<Scenario, CliError> {
    let obj = value
        .as_object_mut()
        .ok_or_else(|| CliError::Config("scenario must be a JSON object".into()))?;
    let kind = match obj.remove("kind") {
        Some(Value::String(s)) => Kind::parse(&s).ok_or_else(|| {
            let names: Vec<_> = Kind::ALL.iter().map(|k| k.name()).collect();
            CliError::Config(format!(
                "kind: unknown kind `{s}`, expected one of {}",
                names.join(", ")
            ))
        })?,
        Some(other) => return Err(CliError::Config(format!("kind: expected a string, got {other}"))),
        None => return Err(CliError::Config("kind: missing required field".into())),
    };
    Ok(match kind {
        Kind::Evolve => Scenario::Evolve(typed(value)?),
        Kind::Gaussian => Scenario::Gaussian(typed(value)?),
        Kind::Trajectories => Scenario::Trajectories(typed(value)?),
        Kind::Relax => Scenario::Relax(typed(value)?),
        Kind::Phases => Scenario::Phases(typed(value)?),
        Kind::Selfgrav => Scenario::Selfgrav(typed(value)?),
    })
}

/// Parses, fills defaults and validates a scenario given as JSON text.
pub fn parse_scenario_str(text: &str) -> Result<Scenario, CliError> {
    let value: Value = serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid JSON: {e}")))?;
    let mut s = from_value(value)?;
    s.fill_defaults();
    s.validate()?;
    Ok(s)
}

/// Reads and resolves the scenario file at `path`.
pub fn parse_scenario(path: &Path) -> Result<Scenario, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_scenario_str(&text)
}
