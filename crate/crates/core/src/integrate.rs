//! Fixed-step integrators and trajectory recording: classical RK4 in ambient
//! coordinates and a splitting scheme whose kinetic substep is an exact
//! coadjoint rotation.

use crate::algebra::{exp_so3, reorthonormalize, Vec3};
use crate::control::ControlLaw;
use crate::error::{Error, Result};
use crate::poisson::Coords;
use crate::systems::{
    full_rb_vf, momentum_map_so3, FullDeriv, FullState, ReducedState, RigidBodyParams, SystemDef,
};

/// Integration method. The splitting scheme applies to reduced states only.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Rk4,
    Splitting,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Rk4 => "rk4",
            Method::Splitting => "splitting",
        }
    }
}

/// Fixed-step run description. `reorth_every` controls how often unreduced
/// runs project the attitude back onto the rotation group (0 disables it).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorSpec {
    pub method: Method,
    pub step: f64,
    pub t_final: f64,
    pub reorth_every: usize,
}

impl IntegratorSpec {
    pub fn rk4(step: f64, t_final: f64) -> Self {
        IntegratorSpec {
            method: Method::Rk4,
            step,
            t_final,
            reorth_every: 100,
        }
    }

    pub fn splitting(step: f64, t_final: f64) -> Self {
        IntegratorSpec {
            method: Method::Splitting,
            step,
            t_final,
            reorth_every: 100,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.step.is_finite() || self.step <= 0.0 {
            return Err(Error::InvalidConfig {
                message: format!("step must be positive and finite, got {}", self.step),
            });
        }
        if !self.t_final.is_finite() || self.t_final < self.step {
            return Err(Error::InvalidConfig {
                message: format!(
                    "t_final must be finite and at least one step, got {}",
                    self.t_final
                ),
            });
        }
        Ok(())
    }

    /// Number of steps, robust against `t_final/step` landing a hair under
    /// an integer.
    pub fn n_steps(&self) -> usize {
        (self.t_final / self.step + 1e-9).floor() as usize
    }
}

/// Derivative value an integrator can sanity-check.
pub trait FlowDeriv {
    fn all_finite(&self) -> bool;
}

/// State an explicit one-step integrator can advance: cloneable, with an
/// ambient `x + c * d` update against its derivative type.
pub trait FlowState: Clone {
    type Deriv: FlowDeriv;
    fn axpy(&self, c: f64, d: &Self::Deriv) -> Self;
    fn all_finite(&self) -> bool;
}

impl FlowDeriv for f64 {
    fn all_finite(&self) -> bool {
        self.is_finite()
    }
}

impl FlowState for f64 {
    type Deriv = f64;
    fn axpy(&self, c: f64, d: &f64) -> f64 {
        self + c * d
    }
    fn all_finite(&self) -> bool {
        self.is_finite()
    }
}

impl FlowDeriv for ReducedState {
    fn all_finite(&self) -> bool {
        (0..self.dim()).all(|i| self.coord(i).is_finite())
    }
}

impl FlowState for ReducedState {
    type Deriv = ReducedState;
    fn axpy(&self, c: f64, d: &ReducedState) -> ReducedState {
        assert_eq!(
            self.variant(),
            d.variant(),
            "state and derivative variants must match"
        );
        self.scaled_add(c, d)
    }
    fn all_finite(&self) -> bool {
        FlowDeriv::all_finite(self)
    }
}

impl FlowDeriv for FullDeriv {
    fn all_finite(&self) -> bool {
        self.attitude_dot.iter().all(|x| x.is_finite()) && self.pi_dot.iter().all(|x| x.is_finite())
    }
}

impl FlowState for FullState {
    type Deriv = FullDeriv;
    fn axpy(&self, c: f64, d: &FullDeriv) -> FullState {
        FullState {
            attitude: crate::algebra::Rotation3::from_matrix_unchecked(
                self.attitude.matrix() + d.attitude_dot * c,
            ),
            pi: self.pi + c * d.pi_dot,
        }
    }
    fn all_finite(&self) -> bool {
        self.attitude.matrix().iter().all(|x| x.is_finite()) && self.pi.iter().all(|x| x.is_finite())
    }
}

/// One classical RK4 step of size `h`.
pub fn rk4_step<S, F>(f: &mut F, x: &S, h: f64) -> Result<S>
where
    S: FlowState,
    F: FnMut(&S) -> Result<S::Deriv>,
{
    let nonfinite = || Error::NonFinite { step: None };
    let k1 = f(x)?;
    if !k1.all_finite() {
        return Err(nonfinite());
    }
    let k2 = f(&x.axpy(0.5 * h, &k1))?;
    if !k2.all_finite() {
        return Err(nonfinite());
    }
    let k3 = f(&x.axpy(0.5 * h, &k2))?;
    if !k3.all_finite() {
        return Err(nonfinite());
    }
    let k4 = f(&x.axpy(h, &k3))?;
    if !k4.all_finite() {
        return Err(nonfinite());
    }
    let y = x
        .axpy(h / 6.0, &k1)
        .axpy(h / 3.0, &k2)
        .axpy(h / 3.0, &k3)
        .axpy(h / 6.0, &k4);
    if !y.all_finite() {
        return Err(nonfinite());
    }
    Ok(y)
}

fn potential_kick(sys: &SystemDef, x: &mut ReducedState, dt: f64) {
    match (sys, &mut *x) {
        (SystemDef::HeavyTop(p), ReducedState::HeavyTop { pi, gamma }) => {
            *pi += dt * p.mgh * gamma.cross(&p.chi);
        }
        (SystemDef::HeavyTopRotors(p), ReducedState::HeavyTopRotor { pi, gamma, .. }) => {
            *pi += dt * p.mgh * gamma.cross(&p.chi);
        }
        _ => {}
    }
}

/// One Strang step: half potential kick, exact coadjoint rotation by
/// `exp(-h omega)` with the rotor angles drifting at their conjugate rates,
/// then the second half kick. Controls are not applied here; the driver adds
/// them as a separate Euler kick on the control channels.
pub fn splitting_step(sys: &SystemDef, x: &ReducedState, h: f64) -> Result<ReducedState> {
    sys.check_state(x)?;
    let mut s = x.clone();
    potential_kick(sys, &mut s, 0.5 * h);
    let omega = sys.omega(&s)?;
    let rot = exp_so3(&(-h * omega));
    let rates = sys.gradient(&s)?;
    match &mut s {
        ReducedState::RigidBody { pi } => {
            *pi = rot.apply(pi);
        }
        ReducedState::RigidBodyRotor { pi, alpha, .. } => {
            *pi = rot.apply(pi);
            if let ReducedState::RigidBodyRotor { ell: rate, .. } = &rates {
                *alpha += h * rate;
            }
        }
        ReducedState::HeavyTop { pi, gamma } => {
            *pi = rot.apply(pi);
            *gamma = rot.apply(gamma);
        }
        ReducedState::HeavyTopRotor {
            pi, gamma, theta, ..
        } => {
            *pi = rot.apply(pi);
            *gamma = rot.apply(gamma);
            if let ReducedState::HeavyTopRotor { ell: rate, .. } = &rates {
                theta[0] += h * rate[0];
                theta[1] += h * rate[1];
            }
        }
    }
    potential_kick(sys, &mut s, 0.5 * h);
    Ok(s)
}

/// Named time series recorded alongside a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticSeries {
    pub name: String,
    pub values: Vec<f64>,
}

/// Sampled states at uniform times plus named diagnostic series of the same
/// length.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<S> {
    pub times: Vec<f64>,
    pub states: Vec<S>,
    pub diagnostics: Vec<DiagnosticSeries>,
}

impl<S> Trajectory<S> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn diagnostic(&self, name: &str) -> Option<&[f64]> {
        self.diagnostics
            .iter()
            .find(|d| d.name == name)
            .map(|d| d.values.as_slice())
    }

    pub fn diagnostic_names(&self) -> Vec<&str> {
        self.diagnostics.iter().map(|d| d.name.as_str()).collect()
    }
}

fn attach_step(e: Error, step: usize) -> Error {
    match e {
        Error::NonFinite { step: None } => Error::NonFinite { step: Some(step) },
        other => other,
    }
}

fn record_reduced(
    sys: &SystemDef,
    law: Option<&ControlLaw>,
    x: &ReducedState,
    series: &mut [DiagnosticSeries],
) -> Result<()> {
    let mut values = vec![sys.hamiltonian(x)?];
    for (_, v) in sys.casimir_values(x)? {
        values.push(v);
    }
    let power = match law {
        Some(l) => {
            let u = l.vlift(sys, x)?;
            sys.supplied_power(x, &u)?
        }
        None => 0.0,
    };
    values.push(power);
    debug_assert_eq!(values.len(), series.len());
    for (slot, v) in series.iter_mut().zip(values) {
        slot.values.push(v);
    }
    Ok(())
}

/// Integrates a reduced system, recording energy, the Casimirs of its
/// bracket space, and the supplied control power at every sample.
pub fn integrate_reduced(
    sys: &SystemDef,
    law: Option<&ControlLaw>,
    x0: &ReducedState,
    spec: &IntegratorSpec,
) -> Result<Trajectory<ReducedState>> {
    spec.validate()?;
    sys.check_state(x0)?;
    if let Some(l) = law {
        if !l.admissible_for(sys) {
            return Err(Error::InadmissibleLaw {
                law: l.name(),
                system: sys.name(),
            });
        }
    }
    let n = spec.n_steps();
    let mut names = vec!["energy".to_string()];
    for (cname, _) in sys.casimir_values(x0)? {
        names.push(cname.to_string());
    }
    names.push("supplied_power".to_string());
    let mut traj = Trajectory {
        times: Vec::with_capacity(n + 1),
        states: Vec::with_capacity(n + 1),
        diagnostics: names
            .into_iter()
            .map(|name| DiagnosticSeries {
                name,
                values: Vec::with_capacity(n + 1),
            })
            .collect(),
    };
    let mut x = x0.clone();
    record_reduced(sys, law, &x, &mut traj.diagnostics)?;
    traj.times.push(0.0);
    traj.states.push(x.clone());
    let h = spec.step;
    for i in 1..=n {
        x = match spec.method {
            Method::Rk4 => rk4_step(
                &mut |y: &ReducedState| {
                    let u = law.map(|l| l.vlift(sys, y)).transpose()?;
                    sys.reduced_vf(y, u.as_ref())
                },
                &x,
                h,
            ),
            Method::Splitting => splitting_step(sys, &x, h).and_then(|s| match law {
                Some(l) => {
                    let u = l.vlift(sys, &s)?;
                    Ok(s.axpy(h, &u))
                }
                None => Ok(s),
            }),
        }
        .map_err(|e| attach_step(e, i))?;
        if !FlowState::all_finite(&x) {
            return Err(Error::NonFinite { step: Some(i) });
        }
        record_reduced(sys, law, &x, &mut traj.diagnostics)?;
        traj.times.push(i as f64 * h);
        traj.states.push(x.clone());
    }
    Ok(traj)
}

fn record_full(
    params: &RigidBodyParams,
    law: Option<&ControlLaw>,
    x: &FullState,
    series: &mut [DiagnosticSeries],
) -> Result<()> {
    let omega = params.velocity(&x.pi);
    let energy = 0.5 * x.pi.dot(&omega);
    let momentum = momentum_map_so3(x);
    let power = match law {
        Some(l) => omega.dot(&l.body_torque(params, &x.pi)?),
        None => 0.0,
    };
    let values = [
        energy,
        x.pi.norm_squared(),
        momentum.x,
        momentum.y,
        momentum.z,
        power,
    ];
    debug_assert_eq!(values.len(), series.len());
    for (slot, v) in series.iter_mut().zip(values) {
        slot.values.push(v);
    }
    Ok(())
}

/// Integrates the unreduced rigid body with RK4 in ambient attitude
/// coordinates, projecting back onto the rotation group every
/// `reorth_every` steps. Records energy, the squared momentum norm, the
/// spatial momentum components, and the supplied power.
pub fn integrate_full(
    params: &RigidBodyParams,
    law: Option<&ControlLaw>,
    x0: &FullState,
    spec: &IntegratorSpec,
) -> Result<Trajectory<FullState>> {
    spec.validate()?;
    if spec.method != Method::Rk4 {
        return Err(Error::InvalidConfig {
            message: "unreduced runs support the rk4 method only".into(),
        });
    }
    let initial_defect = x0.attitude.defect();
    if !initial_defect.is_finite() || initial_defect > crate::algebra::ROTATION_TOL {
        return Err(Error::NotOrthogonal {
            defect: initial_defect,
        });
    }
    let n = spec.n_steps();
    let names = [
        "energy",
        "casimir_1",
        "momentum_1",
        "momentum_2",
        "momentum_3",
        "supplied_power",
    ];
    let mut traj = Trajectory {
        times: Vec::with_capacity(n + 1),
        states: Vec::with_capacity(n + 1),
        diagnostics: names
            .iter()
            .map(|name| DiagnosticSeries {
                name: name.to_string(),
                values: Vec::with_capacity(n + 1),
            })
            .collect(),
    };
    let mut x = *x0;
    record_full(params, law, &x, &mut traj.diagnostics)?;
    traj.times.push(0.0);
    traj.states.push(x);
    for i in 1..=n {
        x = rk4_step(
            &mut |y: &FullState| {
                let torque = match law {
                    Some(l) => l.body_torque(params, &y.pi)?,
                    None => Vec3::zeros(),
                };
                Ok(full_rb_vf(params, y, &torque))
            },
            &x,
            spec.step,
        )
        .map_err(|e| attach_step(e, i))?;
        if spec.reorth_every > 0 && i % spec.reorth_every == 0 {
            x.attitude = reorthonormalize(x.attitude.matrix()).map_err(|e| attach_step(e, i))?;
        }
        if !FlowState::all_finite(&x) {
            return Err(Error::NonFinite { step: Some(i) });
        }
        record_full(params, law, &x, &mut traj.diagnostics)?;
        traj.times.push(i as f64 * spec.step);
        traj.states.push(x);
    }
    Ok(traj)
}
