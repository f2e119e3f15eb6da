//! The concrete systems: free/torqued rigid body, rigid body with internal
//! rotors, heavy top, and heavy top with two rotors, plus the unreduced
//! rigid-body dynamics on attitude-momentum pairs.

use crate::algebra::{hat, Mat3, Rotation3, Vec3};
use crate::error::{Error, Result};
use crate::poisson::Coords;

const CHI_TOL: f64 = 1e-12;
/// Control components off the admissible channels larger than this are
/// rejected.
pub const CONTROL_CHANNEL_TOL: f64 = 1e-12;

fn positive(v: &Vec3) -> bool {
    v.iter().all(|x| x.is_finite() && *x > 0.0)
}

/// Principal moments of inertia of a rigid body.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidBodyParams {
    pub inertia: Vec3,
}

impl RigidBodyParams {
    pub fn new(inertia: Vec3) -> Result<Self> {
        if !positive(&inertia) {
            return Err(Error::SingularInertia);
        }
        Ok(RigidBodyParams { inertia })
    }

    /// Legendre map: body momentum of a body angular velocity.
    pub fn momentum(&self, omega: &Vec3) -> Vec3 {
        self.inertia.component_mul(omega)
    }

    /// Inverse Legendre map.
    pub fn velocity(&self, pi: &Vec3) -> Vec3 {
        pi.component_div(&self.inertia)
    }
}

/// Rigid body carrying three rotors, one per principal axis.
/// `locked_inertia` holds the locked moments (carrier plus rotors, minus the
/// spun axis contribution); `rotor_inertia` the rotor moments about their
/// spin axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidBodyRotorParams {
    pub locked_inertia: Vec3,
    pub rotor_inertia: Vec3,
}

impl RigidBodyRotorParams {
    pub fn new(locked_inertia: Vec3, rotor_inertia: Vec3) -> Result<Self> {
        if !positive(&locked_inertia) || !positive(&rotor_inertia) {
            return Err(Error::SingularInertia);
        }
        Ok(RigidBodyRotorParams {
            locked_inertia,
            rotor_inertia,
        })
    }

    /// Legendre map: `(omega, alpha_dot) -> (pi, ell)` with
    /// `ell_i = J_i (omega_i + alpha_dot_i)` and `pi_i = Ibar_i omega_i + ell_i`.
    pub fn momenta(&self, omega: &Vec3, alpha_dot: &Vec3) -> (Vec3, Vec3) {
        let ell = self.rotor_inertia.component_mul(&(omega + alpha_dot));
        let pi = self.locked_inertia.component_mul(omega) + ell;
        (pi, ell)
    }

    /// Inverse Legendre map: `(pi, ell) -> (omega, alpha_dot)`.
    pub fn velocities(&self, pi: &Vec3, ell: &Vec3) -> (Vec3, Vec3) {
        let omega = (pi - ell).component_div(&self.locked_inertia);
        let alpha_dot = ell.component_div(&self.rotor_inertia) - omega;
        (omega, alpha_dot)
    }
}

/// Heavy top: principal moments, the weight-times-lever constant `mgh`, and
/// the unit vector `chi` from the fixed point toward the center of mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeavyTopParams {
    pub inertia: Vec3,
    pub mgh: f64,
    pub chi: Vec3,
}

impl HeavyTopParams {
    pub fn new(inertia: Vec3, mgh: f64, chi: Vec3) -> Result<Self> {
        if !positive(&inertia) {
            return Err(Error::SingularInertia);
        }
        if !mgh.is_finite() {
            return Err(Error::InvalidConfig {
                message: "mgh must be finite".into(),
            });
        }
        let norm = chi.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > CHI_TOL {
            return Err(Error::ChiNotUnit { norm });
        }
        Ok(HeavyTopParams { inertia, mgh, chi })
    }

    pub fn momentum(&self, omega: &Vec3) -> Vec3 {
        self.inertia.component_mul(omega)
    }

    pub fn velocity(&self, pi: &Vec3) -> Vec3 {
        pi.component_div(&self.inertia)
    }
}

/// Heavy top with rotors on the first two principal axes. `locked_inertia`
/// holds the locked moments for all three axes; `rotor_inertia` the two
/// rotor moments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeavyTopRotorParams {
    pub locked_inertia: Vec3,
    pub rotor_inertia: [f64; 2],
    pub mgh: f64,
    pub chi: Vec3,
}

impl HeavyTopRotorParams {
    pub fn new(locked_inertia: Vec3, rotor_inertia: [f64; 2], mgh: f64, chi: Vec3) -> Result<Self> {
        if !positive(&locked_inertia)
            || !rotor_inertia.iter().all(|x| x.is_finite() && *x > 0.0)
        {
            return Err(Error::SingularInertia);
        }
        if !mgh.is_finite() {
            return Err(Error::InvalidConfig {
                message: "mgh must be finite".into(),
            });
        }
        let norm = chi.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > CHI_TOL {
            return Err(Error::ChiNotUnit { norm });
        }
        Ok(HeavyTopRotorParams {
            locked_inertia,
            rotor_inertia,
            mgh,
            chi,
        })
    }

    /// Legendre map: `(omega, theta_dot) -> (pi, ell)` with rotors on axes
    /// 1 and 2 only: `ell_i = J_i (omega_i + theta_dot_i)`,
    /// `pi_i = Ibar_i omega_i + ell_i` for i = 1, 2 and `pi_3 = Ibar_3 omega_3`.
    pub fn momenta(&self, omega: &Vec3, theta_dot: &[f64; 2]) -> (Vec3, [f64; 2]) {
        let ell = [
            self.rotor_inertia[0] * (omega.x + theta_dot[0]),
            self.rotor_inertia[1] * (omega.y + theta_dot[1]),
        ];
        let pi = Vec3::new(
            self.locked_inertia.x * omega.x + ell[0],
            self.locked_inertia.y * omega.y + ell[1],
            self.locked_inertia.z * omega.z,
        );
        (pi, ell)
    }

    /// Inverse Legendre map: `(pi, ell) -> (omega, theta_dot)`.
    pub fn velocities(&self, pi: &Vec3, ell: &[f64; 2]) -> (Vec3, [f64; 2]) {
        let omega = Vec3::new(
            (pi.x - ell[0]) / self.locked_inertia.x,
            (pi.y - ell[1]) / self.locked_inertia.y,
            pi.z / self.locked_inertia.z,
        );
        let theta_dot = [
            ell[0] / self.rotor_inertia[0] - omega.x,
            ell[1] / self.rotor_inertia[1] - omega.y,
        ];
        (omega, theta_dot)
    }
}

/// State of a reduced system. Momenta live in ambient dual coordinates;
/// rotor angles are carried alongside as cyclic variables.
#[derive(Debug, Clone, PartialEq)]
pub enum ReducedState {
    RigidBody {
        pi: Vec3,
    },
    RigidBodyRotor {
        pi: Vec3,
        alpha: Vec3,
        ell: Vec3,
    },
    HeavyTop {
        pi: Vec3,
        gamma: Vec3,
    },
    HeavyTopRotor {
        pi: Vec3,
        gamma: Vec3,
        theta: [f64; 2],
        ell: [f64; 2],
    },
}

impl ReducedState {
    pub fn variant(&self) -> &'static str {
        match self {
            ReducedState::RigidBody { .. } => "rigid_body",
            ReducedState::RigidBodyRotor { .. } => "rigid_body_rotors",
            ReducedState::HeavyTop { .. } => "heavy_top",
            ReducedState::HeavyTopRotor { .. } => "heavy_top_rotors",
        }
    }

    pub fn pi(&self) -> Vec3 {
        match self {
            ReducedState::RigidBody { pi }
            | ReducedState::RigidBodyRotor { pi, .. }
            | ReducedState::HeavyTop { pi, .. }
            | ReducedState::HeavyTopRotor { pi, .. } => *pi,
        }
    }

    /// Flat component names, matching the [`Coords`] order.
    pub fn component_names(&self) -> Vec<String> {
        let tag = |base: &str, n: usize| (1..=n).map(move |i| format!("{base}_{i}")).collect::<Vec<_>>();
        match self {
            ReducedState::RigidBody { .. } => tag("pi", 3),
            ReducedState::RigidBodyRotor { .. } => {
                let mut v = tag("pi", 3);
                v.extend(tag("alpha", 3));
                v.extend(tag("l", 3));
                v
            }
            ReducedState::HeavyTop { .. } => {
                let mut v = tag("pi", 3);
                v.extend(tag("gamma", 3));
                v
            }
            ReducedState::HeavyTopRotor { .. } => {
                let mut v = tag("pi", 3);
                v.extend(tag("gamma", 3));
                v.extend(tag("theta", 2));
                v.extend(tag("l", 2));
                v
            }
        }
    }
}

impl Coords for ReducedState {
    fn dim(&self) -> usize {
        match self {
            ReducedState::RigidBody { .. } => 3,
            ReducedState::RigidBodyRotor { .. } => 9,
            ReducedState::HeavyTop { .. } => 6,
            ReducedState::HeavyTopRotor { .. } => 10,
        }
    }

    fn coord(&self, i: usize) -> f64 {
        match self {
            ReducedState::RigidBody { pi } => pi[i],
            ReducedState::RigidBodyRotor { pi, alpha, ell } => match i {
                0..=2 => pi[i],
                3..=5 => alpha[i - 3],
                _ => ell[i - 6],
            },
            ReducedState::HeavyTop { pi, gamma } => {
                if i < 3 {
                    pi[i]
                } else {
                    gamma[i - 3]
                }
            }
            ReducedState::HeavyTopRotor {
                pi,
                gamma,
                theta,
                ell,
            } => match i {
                0..=2 => pi[i],
                3..=5 => gamma[i - 3],
                6..=7 => theta[i - 6],
                _ => ell[i - 8],
            },
        }
    }

    fn set_coord(&mut self, i: usize, value: f64) {
        match self {
            ReducedState::RigidBody { pi } => pi[i] = value,
            ReducedState::RigidBodyRotor { pi, alpha, ell } => match i {
                0..=2 => pi[i] = value,
                3..=5 => alpha[i - 3] = value,
                _ => ell[i - 6] = value,
            },
            ReducedState::HeavyTop { pi, gamma } => {
                if i < 3 {
                    pi[i] = value
                } else {
                    gamma[i - 3] = value
                }
            }
            ReducedState::HeavyTopRotor {
                pi,
                gamma,
                theta,
                ell,
            } => match i {
                0..=2 => pi[i] = value,
                3..=5 => gamma[i - 3] = value,
                6..=7 => theta[i - 6] = value,
                _ => ell[i - 8] = value,
            },
        }
    }
}

/// One of the five reduced systems with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum SystemDef {
    RigidBody(RigidBodyParams),
    RigidBodyTorque(RigidBodyParams),
    RigidBodyRotors(RigidBodyRotorParams),
    HeavyTop(HeavyTopParams),
    HeavyTopRotors(HeavyTopRotorParams),
}

impl SystemDef {
    pub fn name(&self) -> &'static str {
        match self {
            SystemDef::RigidBody(_) => "rigid_body",
            SystemDef::RigidBodyTorque(_) => "rigid_body_torque",
            SystemDef::RigidBodyRotors(_) => "rigid_body_rotors",
            SystemDef::HeavyTop(_) => "heavy_top",
            SystemDef::HeavyTopRotors(_) => "heavy_top_rotors",
        }
    }

    /// The [`ReducedState`] variant this system evolves.
    pub fn state_variant(&self) -> &'static str {
        match self {
            SystemDef::RigidBody(_) | SystemDef::RigidBodyTorque(_) => "rigid_body",
            SystemDef::RigidBodyRotors(_) => "rigid_body_rotors",
            SystemDef::HeavyTop(_) => "heavy_top",
            SystemDef::HeavyTopRotors(_) => "heavy_top_rotors",
        }
    }

    pub fn check_state(&self, x: &ReducedState) -> Result<()> {
        if x.variant() != self.state_variant() {
            return Err(Error::VariantMismatch {
                expected: self.state_variant(),
                got: x.variant(),
            });
        }
        Ok(())
    }

    /// All-zero state of the matching variant.
    pub fn zero_state(&self) -> ReducedState {
        match self {
            SystemDef::RigidBody(_) | SystemDef::RigidBodyTorque(_) => ReducedState::RigidBody {
                pi: Vec3::zeros(),
            },
            SystemDef::RigidBodyRotors(_) => ReducedState::RigidBodyRotor {
                pi: Vec3::zeros(),
                alpha: Vec3::zeros(),
                ell: Vec3::zeros(),
            },
            SystemDef::HeavyTop(_) => ReducedState::HeavyTop {
                pi: Vec3::zeros(),
                gamma: Vec3::zeros(),
            },
            SystemDef::HeavyTopRotors(_) => ReducedState::HeavyTopRotor {
                pi: Vec3::zeros(),
                gamma: Vec3::zeros(),
                theta: [0.0; 2],
                ell: [0.0; 2],
            },
        }
    }

    pub fn hamiltonian(&self, x: &ReducedState) -> Result<f64> {
        self.check_state(x)?;
        Ok(match (self, x) {
            (SystemDef::RigidBody(p), ReducedState::RigidBody { pi })
            | (SystemDef::RigidBodyTorque(p), ReducedState::RigidBody { pi }) => {
                0.5 * pi.component_div(&p.inertia).dot(pi)
            }
            (SystemDef::RigidBodyRotors(p), ReducedState::RigidBodyRotor { pi, ell, .. }) => {
                let d = pi - ell;
                0.5 * (d.component_div(&p.locked_inertia).dot(&d)
                    + ell.component_div(&p.rotor_inertia).dot(ell))
            }
            (SystemDef::HeavyTop(p), ReducedState::HeavyTop { pi, gamma }) => {
                0.5 * pi.component_div(&p.inertia).dot(pi) + p.mgh * gamma.dot(&p.chi)
            }
            (
                SystemDef::HeavyTopRotors(p),
                ReducedState::HeavyTopRotor { pi, gamma, ell, .. },
            ) => {
                0.5 * ((pi.x - ell[0]).powi(2) / p.locked_inertia.x
                    + (pi.y - ell[1]).powi(2) / p.locked_inertia.y
                    + pi.z.powi(2) / p.locked_inertia.z
                    + ell[0].powi(2) / p.rotor_inertia[0]
                    + ell[1].powi(2) / p.rotor_inertia[1])
                    + p.mgh * gamma.dot(&p.chi)
            }
            _ => unreachable!("check_state pins the variant"),
        })
    }

    /// Body angular velocity `omega = dh/dpi`.
    pub fn omega(&self, x: &ReducedState) -> Result<Vec3> {
        self.check_state(x)?;
        Ok(match (self, x) {
            (SystemDef::RigidBody(p), ReducedState::RigidBody { pi })
            | (SystemDef::RigidBodyTorque(p), ReducedState::RigidBody { pi }) => p.velocity(pi),
            (SystemDef::RigidBodyRotors(p), ReducedState::RigidBodyRotor { pi, ell, .. }) => {
                (pi - ell).component_div(&p.locked_inertia)
            }
            (SystemDef::HeavyTop(p), ReducedState::HeavyTop { pi, .. }) => p.velocity(pi),
            (
                SystemDef::HeavyTopRotors(p),
                ReducedState::HeavyTopRotor { pi, ell, .. },
            ) => Vec3::new(
                (pi.x - ell[0]) / p.locked_inertia.x,
                (pi.y - ell[1]) / p.locked_inertia.y,
                pi.z / p.locked_inertia.z,
            ),
            _ => unreachable!("check_state pins the variant"),
        })
    }

    /// Gradient of the Hamiltonian in flat state coordinates.
    pub fn gradient(&self, x: &ReducedState) -> Result<ReducedState> {
        self.check_state(x)?;
        let omega = self.omega(x)?;
        Ok(match (self, x) {
            (SystemDef::RigidBody(_), ReducedState::RigidBody { .. })
            | (SystemDef::RigidBodyTorque(_), ReducedState::RigidBody { .. }) => {
                ReducedState::RigidBody { pi: omega }
            }
            (SystemDef::RigidBodyRotors(p), ReducedState::RigidBodyRotor { ell, .. }) => {
                ReducedState::RigidBodyRotor {
                    pi: omega,
                    alpha: Vec3::zeros(),
                    ell: ell.component_div(&p.rotor_inertia) - omega,
                }
            }
            (SystemDef::HeavyTop(p), ReducedState::HeavyTop { .. }) => ReducedState::HeavyTop {
                pi: omega,
                gamma: p.mgh * p.chi,
            },
            (
                SystemDef::HeavyTopRotors(p),
                ReducedState::HeavyTopRotor { ell, .. },
            ) => ReducedState::HeavyTopRotor {
                pi: omega,
                gamma: p.mgh * p.chi,
                theta: [0.0; 2],
                ell: [
                    ell[0] / p.rotor_inertia[0] - omega.x,
                    ell[1] / p.rotor_inertia[1] - omega.y,
                ],
            },
            _ => unreachable!("check_state pins the variant"),
        })
    }

    /// Flat indices of the admissible control channels.
    pub fn channel_indices(&self) -> &'static [usize] {
        match self {
            SystemDef::RigidBody(_) | SystemDef::HeavyTop(_) => &[],
            SystemDef::RigidBodyTorque(_) => &[0, 1, 2],
            SystemDef::RigidBodyRotors(_) => &[6, 7, 8],
            SystemDef::HeavyTopRotors(_) => &[8, 9],
        }
    }

    /// Unit basis of the admissible control directions, in state shape.
    pub fn control_channels(&self) -> Vec<ReducedState> {
        self.channel_indices()
            .iter()
            .map(|&i| {
                let mut v = self.zero_state();
                v.set_coord(i, 1.0);
                v
            })
            .collect()
    }

    fn check_control(&self, u: &ReducedState) -> Result<()> {
        self.check_state(u)?;
        let channels = self.channel_indices();
        for i in 0..u.dim() {
            if channels.contains(&i) {
                continue;
            }
            let magnitude = u.coord(i).abs();
            if magnitude > CONTROL_CHANNEL_TOL {
                return Err(Error::ControlOutsideW {
                    system: self.name(),
                    index: i,
                    magnitude,
                });
            }
        }
        Ok(())
    }

    /// Equations of motion with an optional vertically lifted control vector
    /// `u` (state-shaped, supported on the control channels).
    pub fn reduced_vf(&self, x: &ReducedState, u: Option<&ReducedState>) -> Result<ReducedState> {
        self.check_state(x)?;
        if let Some(u) = u {
            self.check_control(u)?;
        }
        let omega = self.omega(x)?;
        let mut dx = match (self, x) {
            (SystemDef::RigidBody(_), ReducedState::RigidBody { pi })
            | (SystemDef::RigidBodyTorque(_), ReducedState::RigidBody { pi }) => {
                ReducedState::RigidBody {
                    pi: pi.cross(&omega),
                }
            }
            (SystemDef::RigidBodyRotors(p), ReducedState::RigidBodyRotor { pi, ell, .. }) => {
                ReducedState::RigidBodyRotor {
                    pi: pi.cross(&omega),
                    alpha: ell.component_div(&p.rotor_inertia) - omega,
                    ell: Vec3::zeros(),
                }
            }
            (SystemDef::HeavyTop(p), ReducedState::HeavyTop { pi, gamma }) => {
                ReducedState::HeavyTop {
                    pi: pi.cross(&omega) + p.mgh * gamma.cross(&p.chi),
                    gamma: gamma.cross(&omega),
                }
            }
            (
                SystemDef::HeavyTopRotors(p),
                ReducedState::HeavyTopRotor {
                    pi, gamma, ell, ..
                },
            ) => ReducedState::HeavyTopRotor {
                pi: pi.cross(&omega) + p.mgh * gamma.cross(&p.chi),
                gamma: gamma.cross(&omega),
                theta: [
                    ell[0] / p.rotor_inertia[0] - omega.x,
                    ell[1] / p.rotor_inertia[1] - omega.y,
                ],
                ell: [0.0; 2],
            },
            _ => unreachable!("check_state pins the variant"),
        };
        if let Some(u) = u {
            dx = dx.scaled_add(1.0, u);
        }
        Ok(dx)
    }

    /// Instantaneous power fed through the control channels:
    /// `<grad h, u>` in flat coordinates.
    pub fn supplied_power(&self, x: &ReducedState, u: &ReducedState) -> Result<f64> {
        let g = self.gradient(x)?;
        self.check_control(u)?;
        Ok(g.dot(u))
    }

    /// Casimir diagnostics of the underlying bracket space, as (name, value).
    pub fn casimir_values(&self, x: &ReducedState) -> Result<Vec<(&'static str, f64)>> {
        self.check_state(x)?;
        Ok(match x {
            ReducedState::RigidBody { pi } | ReducedState::RigidBodyRotor { pi, .. } => {
                vec![("casimir_1", pi.norm_squared())]
            }
            ReducedState::HeavyTop { pi, gamma }
            | ReducedState::HeavyTopRotor { pi, gamma, .. } => vec![
                ("casimir_1", gamma.norm_squared()),
                ("casimir_2", pi.dot(gamma)),
            ],
        })
    }
}

/// Unreduced rigid-body state: attitude plus body angular momentum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FullState {
    pub attitude: Rotation3,
    pub pi: Vec3,
}

/// Derivative of a [`FullState`]; the attitude slot is a general matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FullDeriv {
    pub attitude_dot: Mat3,
    pub pi_dot: Vec3,
}

/// Spatial angular momentum `A pi`, the conserved momentum map of the free
/// rigid body.
pub fn momentum_map_so3(x: &FullState) -> Vec3 {
    x.attitude.apply(&x.pi)
}

/// Unreduced rigid-body equations with a body torque:
/// `A_dot = A hat(omega)`, `pi_dot = pi x omega + torque`.
pub fn full_rb_vf(params: &RigidBodyParams, x: &FullState, torque: &Vec3) -> FullDeriv {
    let omega = params.velocity(&x.pi);
    FullDeriv {
        attitude_dot: x.attitude.matrix() * hat(&omega),
        pi_dot: x.pi.cross(&omega) + torque,
    }
}
