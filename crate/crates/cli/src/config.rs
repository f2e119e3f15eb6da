//! Scenario files: JSON schemas, strict validation, and construction of the
//! library objects they describe.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use liepoisson::algebra::Mat3;
use liepoisson::verify::EquivalencePairing;
use liepoisson::{
    ControlLaw, FullState, HeavyTopParams, HeavyTopRotorParams, IntegratorSpec, ReducedState,
    RigidBodyParams, RigidBodyRotorParams, Rotation3, SystemDef, Vec3,
};

use crate::error::{config_error, io_error, CliError};

pub const SYSTEM_KINDS: [&str; 6] = [
    "rigid_body",
    "rigid_body_torque",
    "rigid_body_rotors",
    "heavy_top",
    "heavy_top_rotors",
    "rigid_body_full",
];

pub const CONTROL_LAWS: [&str; 5] = [
    "torque_p",
    "constant_torque",
    "bloch",
    "rotor_gain",
    "ht_rotor_gain",
];

pub const METHODS: [&str; 2] = ["rk4", "splitting"];

fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse {
        path: path.display().to_string(),
        message: format!("{} at line {}, column {}", e, e.line(), e.column()),
    })
}

fn req<T: Clone>(field: &Option<T>, name: &str, owner: &str) -> Result<T, CliError> {
    field
        .clone()
        .ok_or_else(|| CliError::Validation(format!("{owner} requires field {name:?}")))
}

fn forbid_unused(fields: &[(&str, bool)], allowed: &[&str], owner: &str) -> Result<(), CliError> {
    for (name, present) in fields {
        if *present && !allowed.contains(name) {
            return Err(CliError::Validation(format!(
                "field {name:?} is not used by {owner}"
            )));
        }
    }
    Ok(())
}

fn vec3(a: [f64; 3]) -> Vec3 {
    Vec3::new(a[0], a[1], a[2])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub kind: String,
    #[serde(default)]
    pub inertia: Option<[f64; 3]>,
    #[serde(default)]
    pub locked_inertia: Option<[f64; 3]>,
    #[serde(default)]
    pub rotor_inertia: Option<Vec<f64>>,
    #[serde(default)]
    pub mgh: Option<f64>,
    #[serde(default)]
    pub chi: Option<[f64; 3]>,
}

/// A validated system: either one of the reduced models or the unreduced
/// rigid body carrying its attitude.
pub enum SystemSpec {
    Reduced(SystemDef),
    Full(RigidBodyParams),
}

impl SystemConfig {
    fn fields(&self) -> [(&'static str, bool); 5] {
        [
            ("inertia", self.inertia.is_some()),
            ("locked_inertia", self.locked_inertia.is_some()),
            ("rotor_inertia", self.rotor_inertia.is_some()),
            ("mgh", self.mgh.is_some()),
            ("chi", self.chi.is_some()),
        ]
    }

    pub fn build(&self) -> Result<SystemSpec, CliError> {
        let owner = format!("system kind {:?}", self.kind);
        let allowed: &[&str] = match self.kind.as_str() {
            "rigid_body" | "rigid_body_torque" | "rigid_body_full" => &["inertia"],
            "rigid_body_rotors" => &["locked_inertia", "rotor_inertia"],
            "heavy_top" => &["inertia", "mgh", "chi"],
            "heavy_top_rotors" => &["locked_inertia", "rotor_inertia", "mgh", "chi"],
            other => {
                return Err(CliError::Validation(format!(
                    "unknown system kind {other:?}; admissible values: {}",
                    SYSTEM_KINDS.join(", ")
                )))
            }
        };
        forbid_unused(&self.fields(), allowed, &owner)?;
        let spec = match self.kind.as_str() {
            "rigid_body" => SystemSpec::Reduced(SystemDef::RigidBody(
                RigidBodyParams::new(vec3(req(&self.inertia, "inertia", &owner)?))
                    .map_err(config_error)?,
            )),
            "rigid_body_torque" => SystemSpec::Reduced(SystemDef::RigidBodyTorque(
                RigidBodyParams::new(vec3(req(&self.inertia, "inertia", &owner)?))
                    .map_err(config_error)?,
            )),
            "rigid_body_full" => SystemSpec::Full(
                RigidBodyParams::new(vec3(req(&self.inertia, "inertia", &owner)?))
                    .map_err(config_error)?,
            ),
            "rigid_body_rotors" => {
                let rotor = req(&self.rotor_inertia, "rotor_inertia", &owner)?;
                if rotor.len() != 3 {
                    return Err(CliError::Validation(format!(
                        "{owner} requires rotor_inertia of length 3, got {}",
                        rotor.len()
                    )));
                }
                SystemSpec::Reduced(SystemDef::RigidBodyRotors(
                    RigidBodyRotorParams::new(
                        vec3(req(&self.locked_inertia, "locked_inertia", &owner)?),
                        Vec3::new(rotor[0], rotor[1], rotor[2]),
                    )
                    .map_err(config_error)?,
                ))
            }
            "heavy_top" => SystemSpec::Reduced(SystemDef::HeavyTop(
                HeavyTopParams::new(
                    vec3(req(&self.inertia, "inertia", &owner)?),
                    req(&self.mgh, "mgh", &owner)?,
                    vec3(req(&self.chi, "chi", &owner)?),
                )
                .map_err(config_error)?,
            )),
            "heavy_top_rotors" => {
                let rotor = req(&self.rotor_inertia, "rotor_inertia", &owner)?;
                if rotor.len() != 2 {
                    return Err(CliError::Validation(format!(
                        "{owner} requires rotor_inertia of length 2, got {}",
                        rotor.len()
                    )));
                }
                SystemSpec::Reduced(SystemDef::HeavyTopRotors(
                    HeavyTopRotorParams::new(
                        vec3(req(&self.locked_inertia, "locked_inertia", &owner)?),
                        [rotor[0], rotor[1]],
                        req(&self.mgh, "mgh", &owner)?,
                        vec3(req(&self.chi, "chi", &owner)?),
                    )
                    .map_err(config_error)?,
                ))
            }
            _ => unreachable!("kind screened above"),
        };
        Ok(spec)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlConfig {
    pub law: String,
    #[serde(default)]
    pub p: Option<[f64; 3]>,
    #[serde(default)]
    pub tau: Option<[f64; 3]>,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub k: Option<f64>,
}

impl ControlConfig {
    pub fn build(&self) -> Result<ControlLaw, CliError> {
        let owner = format!("control law {:?}", self.law);
        let fields = [
            ("p", self.p.is_some()),
            ("tau", self.tau.is_some()),
            ("epsilon", self.epsilon.is_some()),
            ("k", self.k.is_some()),
        ];
        let (allowed, law): (&[&str], ControlLaw) = match self.law.as_str() {
            "torque_p" => (
                &["p"],
                ControlLaw::torque_p(vec3(req(&self.p, "p", &owner)?)),
            ),
            "constant_torque" => (
                &["tau"],
                ControlLaw::constant_torque(vec3(req(&self.tau, "tau", &owner)?)),
            ),
            "bloch" => (
                &["epsilon"],
                ControlLaw::bloch(req(&self.epsilon, "epsilon", &owner)?),
            ),
            "rotor_gain" => (&["k"], ControlLaw::rotor_gain(req(&self.k, "k", &owner)?)),
            "ht_rotor_gain" => (
                &["k"],
                ControlLaw::ht_rotor_gain(req(&self.k, "k", &owner)?),
            ),
            other => {
                return Err(CliError::Validation(format!(
                    "unknown control law {other:?}; admissible values: {}",
                    CONTROL_LAWS.join(", ")
                )))
            }
        };
        forbid_unused(&fields, allowed, &owner)?;
        Ok(law)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    pub method: String,
    pub step: f64,
    pub t_final: f64,
    #[serde(default)]
    pub reorth_every: Option<usize>,
}

impl IntegratorConfig {
    pub fn build(&self) -> Result<IntegratorSpec, CliError> {
        let mut spec = match self.method.as_str() {
            "rk4" => IntegratorSpec::rk4(self.step, self.t_final),
            "splitting" => IntegratorSpec::splitting(self.step, self.t_final),
            other => {
                return Err(CliError::Validation(format!(
                    "unknown integrator method {other:?}; admissible values: {}",
                    METHODS.join(", ")
                )))
            }
        };
        if let Some(n) = self.reorth_every {
            spec.reorth_every = n;
        }
        spec.validate().map_err(config_error)?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialStateConfig {
    #[serde(default)]
    pub pi: Option<[f64; 3]>,
    #[serde(default)]
    pub alpha: Option<[f64; 3]>,
    #[serde(default)]
    pub ell: Option<Vec<f64>>,
    #[serde(default)]
    pub gamma: Option<[f64; 3]>,
    #[serde(default)]
    pub theta: Option<Vec<f64>>,
    #[serde(default)]
    pub attitude: Option<[[f64; 3]; 3]>,
}

impl InitialStateConfig {
    fn fields(&self) -> [(&'static str, bool); 6] {
        [
            ("pi", self.pi.is_some()),
            ("alpha", self.alpha.is_some()),
            ("ell", self.ell.is_some()),
            ("gamma", self.gamma.is_some()),
            ("theta", self.theta.is_some()),
            ("attitude", self.attitude.is_some()),
        ]
    }

    fn fixed_len(&self, field: &Option<Vec<f64>>, name: &str, len: usize, owner: &str) -> Result<Vec<f64>, CliError> {
        let v = req(field, name, owner)?;
        if v.len() != len {
            return Err(CliError::Validation(format!(
                "{owner} requires {name} of length {len}, got {}",
                v.len()
            )));
        }
        Ok(v)
    }

    pub fn build_reduced(&self, sys: &SystemDef) -> Result<ReducedState, CliError> {
        let owner = format!("initial state for {:?}", sys.name());
        let allowed: &[&str] = match sys {
            SystemDef::RigidBody(_) | SystemDef::RigidBodyTorque(_) => &["pi"],
            SystemDef::RigidBodyRotors(_) => &["pi", "alpha", "ell"],
            SystemDef::HeavyTop(_) => &["pi", "gamma"],
            SystemDef::HeavyTopRotors(_) => &["pi", "gamma", "theta", "ell"],
        };
        forbid_unused(&self.fields(), allowed, &owner)?;
        let pi = vec3(req(&self.pi, "pi", &owner)?);
        let state = match sys {
            SystemDef::RigidBody(_) | SystemDef::RigidBodyTorque(_) => {
                ReducedState::RigidBody { pi }
            }
            SystemDef::RigidBodyRotors(_) => {
                let ell = self.fixed_len(&self.ell, "ell", 3, &owner)?;
                ReducedState::RigidBodyRotor {
                    pi,
                    alpha: vec3(req(&self.alpha, "alpha", &owner)?),
                    ell: Vec3::new(ell[0], ell[1], ell[2]),
                }
            }
            SystemDef::HeavyTop(_) => ReducedState::HeavyTop {
                pi,
                gamma: vec3(req(&self.gamma, "gamma", &owner)?),
            },
            SystemDef::HeavyTopRotors(_) => {
                let ell = self.fixed_len(&self.ell, "ell", 2, &owner)?;
                let theta = self.fixed_len(&self.theta, "theta", 2, &owner)?;
                ReducedState::HeavyTopRotor {
                    pi,
                    gamma: vec3(req(&self.gamma, "gamma", &owner)?),
                    theta: [theta[0], theta[1]],
                    ell: [ell[0], ell[1]],
                }
            }
        };
        Ok(state)
    }

    pub fn build_full(&self) -> Result<FullState, CliError> {
        let owner = "initial state for rigid_body_full";
        forbid_unused(&self.fields(), &["pi", "attitude"], owner)?;
        let pi = vec3(req(&self.pi, "pi", owner)?);
        let attitude = match &self.attitude {
            None => Rotation3::identity(),
            Some(rows) => {
                let m = Mat3::new(
                    rows[0][0], rows[0][1], rows[0][2], rows[1][0], rows[1][1], rows[1][2],
                    rows[2][0], rows[2][1], rows[2][2],
                );
                Rotation3::try_new(m).map_err(config_error)?
            }
        };
        Ok(FullState { attitude, pi })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputsConfig {
    pub csv: bool,
    pub summary: bool,
    pub every: usize,
}

impl Default for OutputsConfig {
    fn default() -> Self {
        OutputsConfig {
            csv: true,
            summary: true,
            every: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub system: SystemConfig,
    #[serde(default)]
    pub control: Option<ControlConfig>,
    pub integrator: IntegratorConfig,
    pub initial_state: InitialStateConfig,
    #[serde(default)]
    pub outputs: OutputsConfig,
}

/// A scenario ready to run.
pub enum BuiltScenario {
    Reduced {
        sys: SystemDef,
        law: Option<ControlLaw>,
        x0: ReducedState,
        spec: IntegratorSpec,
    },
    Full {
        params: RigidBodyParams,
        law: Option<ControlLaw>,
        x0: FullState,
        spec: IntegratorSpec,
    },
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        load_json(path)
    }

    pub fn build(&self) -> Result<BuiltScenario, CliError> {
        if self.name.is_empty() || !self.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
            return Err(CliError::Validation(format!(
                "scenario name {:?} must be a nonempty [A-Za-z0-9_-]+ token (it names output files)",
                self.name
            )));
        }
        if self.outputs.every == 0 {
            return Err(CliError::Validation(
                "outputs.every must be at least 1".into(),
            ));
        }
        let law = self.control.as_ref().map(|c| c.build()).transpose()?;
        let spec = self.integrator.build()?;
        match self.system.build()? {
            SystemSpec::Reduced(sys) => {
                if let Some(law) = &law {
                    if !law.admissible_for(&sys) {
                        return Err(CliError::Validation(format!(
                            "control law {:?} does not drive the channels of {:?}",
                            law.name(),
                            sys.name()
                        )));
                    }
                }
                let x0 = self.initial_state.build_reduced(&sys)?;
                Ok(BuiltScenario::Reduced { sys, law, x0, spec })
            }
            SystemSpec::Full(params) => {
                if let Some(law) = &law {
                    law.body_torque(&params, &Vec3::zeros())
                        .map_err(config_error)?;
                }
                if spec.method != liepoisson::Method::Rk4 {
                    return Err(CliError::Validation(
                        "rigid_body_full runs integrate with rk4 only".into(),
                    ));
                }
                let x0 = self.initial_state.build_full()?;
                Ok(BuiltScenario::Full {
                    params,
                    law,
                    x0,
                    spec,
                })
            }
        }
    }
}

pub const PAIRINGS: [&str; 3] = [
    "rb_torque_vs_rotor",
    "rotor_vs_heavy_top",
    "ht_rotor_vs_rotor",
];

fn default_samples() -> usize {
    1000
}

fn default_equiv_tol() -> f64 {
    1e-12
}

fn default_port_tol() -> f64 {
    1e-13
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquivalenceScenario {
    pub name: String,
    pub pairing: String,
    #[serde(default)]
    pub locked_inertia: Option<[f64; 3]>,
    #[serde(default)]
    pub rotor_inertia: Option<Vec<f64>>,
    #[serde(default)]
    pub inertia: Option<[f64; 3]>,
    #[serde(default)]
    pub mgh: Option<f64>,
    #[serde(default)]
    pub chi: Option<[f64; 3]>,
    #[serde(default)]
    pub k: Option<f64>,
    #[serde(default)]
    pub p: Option<[f64; 3]>,
    #[serde(default)]
    pub p0: Option<[f64; 3]>,
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_equiv_tol")]
    pub tolerance: f64,
    #[serde(default)]
    pub perturb: f64,
}

impl EquivalenceScenario {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        load_json(path)
    }

    pub fn build(&self) -> Result<EquivalencePairing, CliError> {
        let owner = format!("pairing {:?}", self.pairing);
        let fields = [
            ("locked_inertia", self.locked_inertia.is_some()),
            ("rotor_inertia", self.rotor_inertia.is_some()),
            ("inertia", self.inertia.is_some()),
            ("mgh", self.mgh.is_some()),
            ("chi", self.chi.is_some()),
            ("k", self.k.is_some()),
            ("p", self.p.is_some()),
            ("p0", self.p0.is_some()),
            ("lambda", self.lambda.is_some()),
        ];
        match self.pairing.as_str() {
            "rb_torque_vs_rotor" => {
                forbid_unused(&fields, &["locked_inertia", "rotor_inertia", "k", "p"], &owner)?;
                let rotor = req(&self.rotor_inertia, "rotor_inertia", &owner)?;
                if rotor.len() != 3 {
                    return Err(CliError::Validation(format!(
                        "{owner} requires rotor_inertia of length 3, got {}",
                        rotor.len()
                    )));
                }
                Ok(EquivalencePairing::RbTorqueVsRotor {
                    locked_inertia: vec3(req(&self.locked_inertia, "locked_inertia", &owner)?),
                    rotor_inertia: Vec3::new(rotor[0], rotor[1], rotor[2]),
                    k: req(&self.k, "k", &owner)?,
                    p: vec3(req(&self.p, "p", &owner)?),
                })
            }
            "rotor_vs_heavy_top" => {
                forbid_unused(&fields, &["inertia", "mgh", "chi", "lambda"], &owner)?;
                Ok(EquivalencePairing::RotorVsHeavyTop {
                    inertia: vec3(req(&self.inertia, "inertia", &owner)?),
                    mgh: req(&self.mgh, "mgh", &owner)?,
                    chi: vec3(req(&self.chi, "chi", &owner)?),
                    lambda: req(&self.lambda, "lambda", &owner)?,
                })
            }
            "ht_rotor_vs_rotor" => {
                forbid_unused(
                    &fields,
                    &["locked_inertia", "rotor_inertia", "mgh", "chi", "k", "p0", "lambda"],
                    &owner,
                )?;
                let rotor = req(&self.rotor_inertia, "rotor_inertia", &owner)?;
                if rotor.len() != 2 {
                    return Err(CliError::Validation(format!(
                        "{owner} requires rotor_inertia of length 2, got {}",
                        rotor.len()
                    )));
                }
                Ok(EquivalencePairing::HtRotorVsRotor {
                    locked_inertia: vec3(req(&self.locked_inertia, "locked_inertia", &owner)?),
                    rotor_inertia: [rotor[0], rotor[1]],
                    mgh: req(&self.mgh, "mgh", &owner)?,
                    chi: vec3(req(&self.chi, "chi", &owner)?),
                    k: req(&self.k, "k", &owner)?,
                    p0: vec3(req(&self.p0, "p0", &owner)?),
                    lambda: req(&self.lambda, "lambda", &owner)?,
                })
            }
            other => Err(CliError::Validation(format!(
                "unknown pairing {other:?}; admissible values: {}",
                PAIRINGS.join(", ")
            ))),
        }
    }
}

pub const PORT_KINDS: [&str; 3] = ["trivial_oscillator", "trivial_rotor_stage", "force"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BalanceScenario {
    pub system: SystemConfig,
    pub control: ControlConfig,
    pub initial_state: InitialStateConfig,
    pub step: f64,
    pub t_final: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PortScenario {
    pub name: String,
    pub kind: String,
    #[serde(default)]
    pub dof: Option<usize>,
    #[serde(default)]
    pub locked_inertia: Option<[f64; 3]>,
    #[serde(default)]
    pub rotor_inertia: Option<[f64; 3]>,
    #[serde(default)]
    pub pi: Option<[f64; 3]>,
    #[serde(default)]
    pub channels: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub force: Option<Vec<f64>>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_port_tol")]
    pub tolerance: f64,
    #[serde(default)]
    pub balance: Option<BalanceScenario>,
}

impl PortScenario {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        load_json(path)
    }

    /// The port together with the chart dimension it lives on.
    pub fn build(&self) -> Result<(liepoisson::PortSpec, usize), CliError> {
        use liepoisson::{CanonicalSystem, PortSpec};
        let owner = format!("port kind {:?}", self.kind);
        let fields = [
            ("dof", self.dof.is_some()),
            ("locked_inertia", self.locked_inertia.is_some()),
            ("rotor_inertia", self.rotor_inertia.is_some()),
            ("pi", self.pi.is_some()),
            ("channels", self.channels.is_some()),
            ("force", self.force.is_some()),
        ];
        match self.kind.as_str() {
            "trivial_oscillator" => {
                forbid_unused(&fields, &["dof"], &owner)?;
                let dof = self.dof.unwrap_or(2);
                if dof == 0 {
                    return Err(CliError::Validation("dof must be at least 1".into()));
                }
                Ok((PortSpec::trivial(&CanonicalSystem::oscillator(dof)), dof))
            }
            "trivial_rotor_stage" => {
                forbid_unused(&fields, &["locked_inertia", "rotor_inertia", "pi"], &owner)?;
                let params = RigidBodyRotorParams::new(
                    vec3(req(&self.locked_inertia, "locked_inertia", &owner)?),
                    vec3(req(&self.rotor_inertia, "rotor_inertia", &owner)?),
                )
                .map_err(config_error)?;
                let stage =
                    CanonicalSystem::rotor_stage(&params, vec3(req(&self.pi, "pi", &owner)?));
                Ok((PortSpec::trivial(&stage), 3))
            }
            "force" => {
                forbid_unused(&fields, &["channels", "force"], &owner)?;
                let channels = req(&self.channels, "channels", &owner)?;
                let force = req(&self.force, "force", &owner)?;
                let dof = channels.first().map(|c| c.len()).unwrap_or(0);
                if dof == 0 {
                    return Err(CliError::Validation(
                        "force port requires at least one nonempty channel".into(),
                    ));
                }
                let port = PortSpec::force(channels, force).map_err(config_error)?;
                Ok((port, dof))
            }
            other => Err(CliError::Validation(format!(
                "unknown port kind {other:?}; admissible values: {}",
                PORT_KINDS.join(", ")
            ))),
        }
    }
}
