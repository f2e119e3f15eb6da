//! Structure checks: bracket axioms, agreement of hand-coded vector fields
//! with bracket-derived ones, conservation along trajectories, reduction
//! consistency, feedback equivalences, ports and energy balance, gradient
//! hygiene, and integrator order probes.

use std::ops::Range;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::Vec3;
use crate::control::{
    equiv_map_ht, equiv_map_ht_rotor, equiv_map_rotor_to_torque, matching_residual, ControlLaw,
};
use crate::error::{Error, Result};
use crate::integrate::{integrate_full, integrate_reduced, IntegratorSpec, Trajectory};
use crate::poisson::{
    bracket_product, bracket_rotor, fd_gradient, lp_bracket_se3, lp_bracket_so3, BracketSign,
    Coords, LpFactor, ProductPoint, RotorPoint, Se3Dual, SmoothFn,
};
use crate::systems::{
    FullState, HeavyTopParams, HeavyTopRotorParams, ReducedState, RigidBodyParams,
    RigidBodyRotorParams, SystemDef,
};

/// Seed used by every check unless the caller overrides it.
pub const DEFAULT_SEED: u64 = 0x5EED;

/// Inner tolerance for the Jacobi identity on linear functionals.
pub const JACOBI_TOL: f64 = 1e-13;

/// Finite-difference step for gradient validation.
pub const FD_STEP: f64 = 1e-6;

/// Outcome of one check. `passed` holds exactly when
/// `observed <= tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    pub observed: f64,
    pub tolerance: f64,
    pub context: String,
}

impl CheckReport {
    pub fn from_observed(
        name: impl Into<String>,
        observed: f64,
        tolerance: f64,
        context: impl Into<String>,
    ) -> Self {
        CheckReport {
            name: name.into(),
            passed: observed <= tolerance,
            observed,
            tolerance,
            context: context.into(),
        }
    }
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform sample with momenta in [-2, 2] and the flat coordinates in
/// `angles` drawn from [0, 2 pi).
fn sample_point<P: Coords>(template: &P, angles: &Range<usize>, rng: &mut ChaCha8Rng) -> P {
    let mut p = template.clone();
    for i in 0..p.dim() {
        let v = if angles.contains(&i) {
            rng.random_range(0.0..std::f64::consts::TAU)
        } else {
            rng.random_range(-2.0..2.0)
        };
        p.set_coord(i, v);
    }
    p
}

/// Flat indices of a state holding rotor angles.
fn angle_indices(sys: &SystemDef) -> Range<usize> {
    match sys {
        SystemDef::RigidBodyRotors(_) => 3..6,
        SystemDef::HeavyTopRotors(_) => 6..8,
        _ => 0..0,
    }
}

/// Random state of the variant `sys` evolves.
pub fn sample_state(sys: &SystemDef, rng: &mut ChaCha8Rng) -> ReducedState {
    sample_point(&sys.zero_state(), &angle_indices(sys), rng)
}

fn random_coeffs<P: Coords>(template: &P, rng: &mut ChaCha8Rng) -> P {
    let mut p = template.clone();
    for i in 0..p.dim() {
        p.set_coord(i, rng.random_range(-1.0..1.0));
    }
    p
}

/// Random smooth test function `c0 + <a, p> + <b, p><c, p>` with its
/// analytic gradient.
fn random_test_fn<P>(template: &P, rng: &mut ChaCha8Rng) -> SmoothFn<P>
where
    P: Coords + Send + Sync + 'static,
{
    let a = random_coeffs(template, rng);
    let b = random_coeffs(template, rng);
    let c = random_coeffs(template, rng);
    let c0: f64 = rng.random_range(-1.0..1.0);
    let (a2, b2, c2) = (a.clone(), b.clone(), c.clone());
    SmoothFn::new(
        move |p: &P| c0 + a.dot(p) + b.dot(p) * c.dot(p),
        move |p: &P| a2.scaled_add(c2.dot(p), &b2).scaled_add(b2.dot(p), &c2),
    )
}

/// Reconstructs the bracket of two linear functionals as an explicit affine
/// function by evaluating the implemented bracket at the origin and at the
/// basis points. Exact because such a bracket is affine in the point.
fn linearized_bracket<P, B>(bracket: &B, f: &SmoothFn<P>, g: &SmoothFn<P>, template: &P) -> Result<SmoothFn<P>>
where
    P: Coords + Send + Sync + 'static,
    B: Fn(&SmoothFn<P>, &SmoothFn<P>, &P) -> Result<f64>,
{
    let zero = template.zeros_like();
    let b0 = bracket(f, g, &zero)?;
    let mut coeffs = zero.clone();
    for i in 0..zero.dim() {
        let mut ei = zero.clone();
        ei.set_coord(i, 1.0);
        coeffs.set_coord(i, bracket(f, g, &ei)? - b0);
    }
    Ok(SmoothFn::affine(coeffs, b0))
}

fn bracket_axiom_reports<P, B>(
    label: &str,
    template: &P,
    angles: Range<usize>,
    bracket: B,
    samples: usize,
    tol: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<CheckReport>>
where
    P: Coords + Send + Sync + 'static,
    B: Fn(&SmoothFn<P>, &SmoothFn<P>, &P) -> Result<f64>,
{
    let mut antisym = 0.0f64;
    let mut leibniz = 0.0f64;
    let mut jacobi = 0.0f64;
    for _ in 0..samples {
        let p = sample_point(template, &angles, rng);
        let f = random_test_fn(template, rng);
        let g = random_test_fn(template, rng);
        let k = random_test_fn(template, rng);

        let fk = bracket(&f, &k, &p)?;
        let kf = bracket(&k, &f, &p)?;
        antisym = antisym.max((fk + kf).abs() / 1.0f64.max(fk.abs()));

        let fg = SmoothFn::product(&f, &g);
        let lhs = bracket(&fg, &k, &p)?;
        let rhs = f.eval(&p) * bracket(&g, &k, &p)? + g.eval(&p) * bracket(&f, &k, &p)?;
        leibniz = leibniz.max((lhs - rhs).abs() / 1.0f64.max(lhs.abs() + rhs.abs()));

        let xi = SmoothFn::linear(random_coeffs(template, rng));
        let eta = SmoothFn::linear(random_coeffs(template, rng));
        let zeta = SmoothFn::linear(random_coeffs(template, rng));
        let inner_ez = linearized_bracket(&bracket, &eta, &zeta, template)?;
        let inner_zx = linearized_bracket(&bracket, &zeta, &xi, template)?;
        let inner_xe = linearized_bracket(&bracket, &xi, &eta, template)?;
        let j = bracket(&xi, &inner_ez, &p)?
            + bracket(&eta, &inner_zx, &p)?
            + bracket(&zeta, &inner_xe, &p)?;
        jacobi = jacobi.max(j.abs());
    }
    let ctx = |what: &str| format!("{what} over {samples} samples on {label}");
    Ok(vec![
        CheckReport::from_observed(
            format!("bracket_{label}_antisymmetry"),
            antisym,
            tol,
            ctx("max scale-guarded |{f,k} + {k,f}|"),
        ),
        CheckReport::from_observed(
            format!("bracket_{label}_leibniz"),
            leibniz,
            tol,
            ctx("max scale-guarded |{fg,k} - f{g,k} - g{f,k}|"),
        ),
        CheckReport::from_observed(
            format!("bracket_{label}_jacobi"),
            jacobi,
            JACOBI_TOL,
            ctx("max |cyclic sum of nested brackets| on linear functionals"),
        ),
    ])
}

/// Bracket space a structure check runs on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BracketSpace {
    So3Dual,
    Se3Dual,
    Rotor3,
    ProductSo3Rotor3,
    ProductSe3Rotor2,
}

impl BracketSpace {
    pub const ALL: [BracketSpace; 5] = [
        BracketSpace::So3Dual,
        BracketSpace::Se3Dual,
        BracketSpace::Rotor3,
        BracketSpace::ProductSo3Rotor3,
        BracketSpace::ProductSe3Rotor2,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            BracketSpace::So3Dual => "so3_dual",
            BracketSpace::Se3Dual => "se3_dual",
            BracketSpace::Rotor3 => "rotor",
            BracketSpace::ProductSo3Rotor3 => "product_so3_rotor",
            BracketSpace::ProductSe3Rotor2 => "product_se3_rotor",
        }
    }
}

/// Antisymmetry and Leibniz on random closures against `tol`, plus the
/// Jacobi identity on linear functionals against [`JACOBI_TOL`].
pub fn check_bracket_axioms(
    space: BracketSpace,
    samples: usize,
    tol: f64,
    seed: u64,
) -> Result<Vec<CheckReport>> {
    let rng = &mut rng_from_seed(seed);
    let label = space.label();
    match space {
        BracketSpace::So3Dual => bracket_axiom_reports(
            label,
            &Vec3::zeros(),
            0..0,
            |f, k, p| Ok(lp_bracket_so3(f, k, p, BracketSign::Minus)),
            samples,
            tol,
            rng,
        ),
        BracketSpace::Se3Dual => bracket_axiom_reports(
            label,
            &Se3Dual::new(Vec3::zeros(), Vec3::zeros()),
            0..0,
            |f, k, p| Ok(lp_bracket_se3(f, k, p, BracketSign::Minus)),
            samples,
            tol,
            rng,
        ),
        BracketSpace::Rotor3 => bracket_axiom_reports(
            label,
            &RotorPoint::new(vec![0.0; 3], vec![0.0; 3])?,
            0..3,
            bracket_rotor,
            samples,
            tol,
            rng,
        ),
        BracketSpace::ProductSo3Rotor3 => bracket_axiom_reports(
            label,
            &ProductPoint::new(LpFactor::So3(Vec3::zeros()), vec![0.0; 3], vec![0.0; 3])?,
            3..6,
            |f, k, p| bracket_product(f, k, p, BracketSign::Minus),
            samples,
            tol,
            rng,
        ),
        BracketSpace::ProductSe3Rotor2 => bracket_axiom_reports(
            label,
            &ProductPoint::new(
                LpFactor::Se3(Se3Dual::new(Vec3::zeros(), Vec3::zeros())),
                vec![0.0; 2],
                vec![0.0; 2],
            )?,
            6..8,
            |f, k, p| bracket_product(f, k, p, BracketSign::Minus),
            samples,
            tol,
            rng,
        ),
    }
}

fn state_from_flat(sys: &SystemDef, flat: &[f64]) -> ReducedState {
    let mut s = sys.zero_state();
    for (i, v) in flat.iter().enumerate() {
        s.set_coord(i, *v);
    }
    s
}

fn flat_of<P: Coords>(p: &P) -> Vec<f64> {
    (0..p.dim()).map(|i| p.coord(i)).collect()
}

fn copy_flat<P: Coords>(template: &P, flat: &[f64]) -> P {
    let mut p = template.zeros_like();
    for (i, v) in flat.iter().enumerate() {
        p.set_coord(i, *v);
    }
    p
}

/// Derivative of every flat coordinate obtained through the bracket
/// `{coordinate, h}` on the system's bracket space, with no control applied.
fn bracket_derived_vf(sys: &SystemDef, x: &ReducedState) -> Result<Vec<f64>> {
    fn derive<P, B>(
        sys: &SystemDef,
        x: &ReducedState,
        template: &P,
        bracket: B,
    ) -> Result<Vec<f64>>
    where
        P: Coords + Send + Sync + 'static,
        B: Fn(&SmoothFn<P>, &SmoothFn<P>, &P) -> Result<f64>,
    {
        let point = copy_flat(template, &flat_of(x));
        let (se, sg, te, tg) = (sys.clone(), sys.clone(), template.zeros_like(), template.zeros_like());
        let h = SmoothFn::new(
            move |p: &P| {
                let s = state_from_flat(&se, &flat_of(p));
                se.hamiltonian(&s).expect("variant is fixed by construction")
            },
            move |p: &P| {
                let s = state_from_flat(&sg, &flat_of(p));
                let g = sg.gradient(&s).expect("variant is fixed by construction");
                copy_flat(&tg, &flat_of(&g))
            },
        );
        let _ = te;
        (0..point.dim())
            .map(|j| bracket(&SmoothFn::coordinate(&point, j), &h, &point))
            .collect()
    }

    match sys {
        SystemDef::RigidBody(_) | SystemDef::RigidBodyTorque(_) => derive(
            sys,
            x,
            &Vec3::zeros(),
            |f, k, p| Ok(lp_bracket_so3(f, k, p, BracketSign::Minus)),
        ),
        SystemDef::RigidBodyRotors(_) => derive(
            sys,
            x,
            &ProductPoint::new(LpFactor::So3(Vec3::zeros()), vec![0.0; 3], vec![0.0; 3])?,
            |f, k, p| bracket_product(f, k, p, BracketSign::Minus),
        ),
        SystemDef::HeavyTop(_) => derive(
            sys,
            x,
            &Se3Dual::new(Vec3::zeros(), Vec3::zeros()),
            |f, k, p| Ok(lp_bracket_se3(f, k, p, BracketSign::Minus)),
        ),
        SystemDef::HeavyTopRotors(_) => derive(
            sys,
            x,
            &ProductPoint::new(
                LpFactor::Se3(Se3Dual::new(Vec3::zeros(), Vec3::zeros())),
                vec![0.0; 2],
                vec![0.0; 2],
            )?,
            |f, k, p| bracket_product(f, k, p, BracketSign::Minus),
        ),
    }
}

/// Compares the hand-coded equations of motion against the bracket route
/// `{coordinate, h}` at random states.
pub fn check_derivation_chain(
    sys: &SystemDef,
    samples: usize,
    tol: f64,
    seed: u64,
) -> Result<CheckReport> {
    let mut rng = rng_from_seed(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let x = sample_state(sys, &mut rng);
        let direct = sys.reduced_vf(&x, None)?;
        let derived = bracket_derived_vf(sys, &x)?;
        for (j, d) in derived.iter().enumerate() {
            worst = worst.max((direct.coord(j) - d).abs());
        }
    }
    Ok(CheckReport::from_observed(
        format!("derivation_chain_{}", sys.name()),
        worst,
        tol,
        format!(
            "max |hand-coded vf - {{coordinate, h}}| over {samples} random states of {}",
            sys.name()
        ),
    ))
}

/// Scale-guarded drift of a state function along a trajectory:
/// `max_t |q(x_t) - q(x_0)| / max(1, |q(x_0)|)`.
pub fn check_conservation<S>(
    traj: &Trajectory<S>,
    name: &str,
    quantity: &dyn Fn(&S) -> f64,
    tol: f64,
) -> Result<CheckReport> {
    if traj.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    let q0 = quantity(&traj.states[0]);
    let scale = 1.0f64.max(q0.abs());
    let mut drift = 0.0f64;
    for s in &traj.states {
        drift = drift.max((quantity(s) - q0).abs());
    }
    Ok(CheckReport::from_observed(
        format!("conservation_{name}"),
        drift / scale,
        tol,
        format!(
            "initial value {q0:.6e}, absolute drift {drift:.3e}, {} samples",
            traj.len()
        ),
    ))
}

/// Same drift measure applied to a recorded diagnostic series.
pub fn check_series_conservation<S>(
    traj: &Trajectory<S>,
    series: &str,
    tol: f64,
) -> Result<CheckReport> {
    let values = traj
        .diagnostic(series)
        .ok_or_else(|| Error::MissingDiagnostic {
            name: series.to_string(),
        })?;
    if values.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    let q0 = values[0];
    let scale = 1.0f64.max(q0.abs());
    let drift = values.iter().fold(0.0f64, |m, v| m.max((v - q0).abs()));
    Ok(CheckReport::from_observed(
        format!("conservation_{series}"),
        drift / scale,
        tol,
        format!(
            "initial value {q0:.6e}, absolute drift {drift:.3e}, {} samples",
            values.len()
        ),
    ))
}

/// Runs the unreduced rigid body and the reduced one side by side and
/// compares the body momentum streams. `pi0_reduced` overrides the reduced
/// initial condition (the match of the two is part of what is checked).
pub fn check_reduction_consistency(
    params: &RigidBodyParams,
    x0_full: &FullState,
    pi0_reduced: Option<Vec3>,
    law: Option<&ControlLaw>,
    spec: &IntegratorSpec,
    tol: f64,
) -> Result<CheckReport> {
    let full = integrate_full(params, law, x0_full, spec)?;
    let sys = match law {
        Some(_) => SystemDef::RigidBodyTorque(*params),
        None => SystemDef::RigidBody(*params),
    };
    let x0 = ReducedState::RigidBody {
        pi: pi0_reduced.unwrap_or(x0_full.pi),
    };
    let reduced = integrate_reduced(&sys, law, &x0, spec)?;
    let mut worst = 0.0f64;
    for (f, r) in full.states.iter().zip(&reduced.states) {
        worst = worst.max((f.pi - r.pi()).amax());
    }
    Ok(CheckReport::from_observed(
        "reduction_consistency",
        worst,
        tol,
        format!(
            "max |pi_full - pi_reduced| over {} samples, law: {}",
            full.len(),
            law.map(|l| l.name()).unwrap_or("none"),
        ),
    ))
}

/// One of the three closed-loop identifications shipped with the toolkit.
#[derive(Debug, Clone, PartialEq)]
pub enum EquivalencePairing {
    /// Torqued rigid body (`u = p x omega`) against the rotor system closed
    /// with `u = k (pi x omega)`, on the invariant set `ell = k pi + p`.
    RbTorqueVsRotor {
        locked_inertia: Vec3,
        rotor_inertia: Vec3,
        k: f64,
        p: Vec3,
    },
    /// Torqued rigid body with inertia `I + lambda` and `p = -mgh lambda chi`
    /// against the free heavy top, on the set `gamma = lambda omega`.
    RotorVsHeavyTop {
        inertia: Vec3,
        mgh: f64,
        chi: Vec3,
        lambda: f64,
    },
    /// Torqued rigid body with inertia `Ibar + lambda` and
    /// `p = p0 - mgh lambda chi` against the heavy top with rotors closed
    /// with `u = k (gamma x omega)`, on the set `ell = k gamma + p0`,
    /// `gamma = lambda omega`. The rotor stack has no third wheel, so the
    /// set additionally pins `omega_3` through `p0_3 = -k gamma_3`.
    HtRotorVsRotor {
        locked_inertia: Vec3,
        rotor_inertia: [f64; 2],
        mgh: f64,
        chi: Vec3,
        k: f64,
        p0: Vec3,
        lambda: f64,
    },
}

impl EquivalencePairing {
    pub fn name(&self) -> &'static str {
        match self {
            EquivalencePairing::RbTorqueVsRotor { .. } => "rb_torque_vs_rotor",
            EquivalencePairing::RotorVsHeavyTop { .. } => "rotor_vs_heavy_top",
            EquivalencePairing::HtRotorVsRotor { .. } => "ht_rotor_vs_rotor",
        }
    }
}

/// Pullback residual of one pairing over random states of its invariant
/// set. `perturb` shifts the torque-side constant vector along e1 and must
/// make the check fail when it is of size 1e-3 or more.
pub fn check_equivalence(
    pairing: &EquivalencePairing,
    samples: usize,
    tol: f64,
    seed: u64,
    perturb: f64,
) -> Result<CheckReport> {
    let mut rng = rng_from_seed(seed);
    let shift = Vec3::new(perturb, 0.0, 0.0);
    let box_sample = |rng: &mut ChaCha8Rng| rng.random_range(-2.0f64..2.0);
    let (sys1, law1, sys2, law2, map, states, context): (
        SystemDef,
        ControlLaw,
        SystemDef,
        Option<ControlLaw>,
        _,
        Vec<ReducedState>,
        String,
    ) = match pairing {
        EquivalencePairing::RbTorqueVsRotor {
            locked_inertia,
            rotor_inertia,
            k,
            p,
        } => {
            let sys2 = SystemDef::RigidBodyRotors(RigidBodyRotorParams::new(
                *locked_inertia,
                *rotor_inertia,
            )?);
            let sys1 = SystemDef::RigidBodyTorque(RigidBodyParams::new(*locked_inertia)?);
            let map = equiv_map_rotor_to_torque(*k, *p)?;
            let mut states = Vec::with_capacity(samples);
            for _ in 0..samples {
                let pi = Vec3::new(
                    box_sample(&mut rng),
                    box_sample(&mut rng),
                    box_sample(&mut rng),
                );
                let alpha = Vec3::new(
                    rng.random_range(0.0..std::f64::consts::TAU),
                    rng.random_range(0.0..std::f64::consts::TAU),
                    rng.random_range(0.0..std::f64::consts::TAU),
                );
                states.push(ReducedState::RigidBodyRotor {
                    pi,
                    alpha,
                    ell: *k * pi + *p,
                });
            }
            (
                sys1,
                ControlLaw::torque_p(*p + shift),
                sys2,
                Some(ControlLaw::rotor_gain(*k)),
                map,
                states,
                format!("invariant set ell = k pi + p with k = {k}, p = {p:?}"),
            )
        }
        EquivalencePairing::RotorVsHeavyTop {
            inertia,
            mgh,
            chi,
            lambda,
        } => {
            let ht = HeavyTopParams::new(*inertia, *mgh, *chi)?;
            let sys2 = SystemDef::HeavyTop(ht);
            let shifted = inertia + Vec3::repeat(*lambda);
            let sys1 = SystemDef::RigidBodyTorque(RigidBodyParams::new(shifted)?);
            let p = -*mgh * *lambda * *chi;
            let map = equiv_map_ht();
            let mut states = Vec::with_capacity(samples);
            for _ in 0..samples {
                let omega = Vec3::new(
                    box_sample(&mut rng),
                    box_sample(&mut rng),
                    box_sample(&mut rng),
                );
                states.push(ReducedState::HeavyTop {
                    pi: inertia.component_mul(&omega),
                    gamma: *lambda * omega,
                });
            }
            (
                sys1,
                ControlLaw::torque_p(p + shift),
                sys2,
                None,
                map,
                states,
                format!(
                    "substitution gamma = lambda omega with lambda = {lambda}; torque side runs inertia I + lambda and p = -mgh lambda chi"
                ),
            )
        }
        EquivalencePairing::HtRotorVsRotor {
            locked_inertia,
            rotor_inertia,
            mgh,
            chi,
            k,
            p0,
            lambda,
        } => {
            let params =
                HeavyTopRotorParams::new(*locked_inertia, *rotor_inertia, *mgh, *chi)?;
            let sys2 = SystemDef::HeavyTopRotors(params);
            let shifted = locked_inertia + Vec3::repeat(*lambda);
            let sys1 = SystemDef::RigidBodyTorque(RigidBodyParams::new(shifted)?);
            let p = p0 - *mgh * *lambda * *chi;
            let map = equiv_map_ht_rotor();
            let pinned = k.abs() > 1e-12 && lambda.abs() > 1e-12;
            if !pinned && p0.z.abs() > 1e-12 {
                return Err(Error::InvalidConfig {
                    message: "third rotor channel is absent: p0_3 must vanish when k*lambda = 0"
                        .into(),
                });
            }
            let mut states = Vec::with_capacity(samples);
            for _ in 0..samples {
                let omega3 = if pinned {
                    -p0.z / (k * lambda)
                } else {
                    box_sample(&mut rng)
                };
                let omega = Vec3::new(box_sample(&mut rng), box_sample(&mut rng), omega3);
                let gamma = *lambda * omega;
                let ell = [k * gamma.x + p0.x, k * gamma.y + p0.y];
                let pi = Vec3::new(
                    locked_inertia.x * omega.x + ell[0],
                    locked_inertia.y * omega.y + ell[1],
                    locked_inertia.z * omega.z,
                );
                let theta = [
                    rng.random_range(0.0..std::f64::consts::TAU),
                    rng.random_range(0.0..std::f64::consts::TAU),
                ];
                states.push(ReducedState::HeavyTopRotor {
                    pi,
                    gamma,
                    theta,
                    ell,
                });
            }
            (
                sys1,
                ControlLaw::torque_p(p + shift),
                sys2,
                Some(ControlLaw::ht_rotor_gain(*k)),
                map,
                states,
                format!(
                    "set ell = k gamma + p0, gamma = lambda omega (k = {k}, lambda = {lambda}); omega_3 pinned to -p0_3/(k lambda) because the third rotor channel is absent"
                ),
            )
        }
    };
    let residual = matching_residual(&sys1, Some(&law1), &sys2, law2.as_ref(), &map, &states)?;
    Ok(CheckReport::from_observed(
        format!("equivalence_{}", pairing.name()),
        residual,
        tol,
        format!(
            "{context}; {samples} samples; torque-side perturbation {perturb:.1e}"
        ),
    ))
}

/// Closed-loop first integral of the rotor gain law: drift of
/// `ell - k pi` along an integration.
pub fn check_rotor_first_integral(
    params: &RigidBodyRotorParams,
    k: f64,
    x0: &ReducedState,
    spec: &IntegratorSpec,
    tol: f64,
) -> Result<CheckReport> {
    let sys = SystemDef::RigidBodyRotors(*params);
    let law = ControlLaw::rotor_gain(k);
    let traj = integrate_reduced(&sys, Some(&law), x0, spec)?;
    let value = |s: &ReducedState| match s {
        ReducedState::RigidBodyRotor { pi, ell, .. } => ell - k * pi,
        _ => unreachable!("integrate_reduced preserves the variant"),
    };
    let first = value(&traj.states[0]);
    let mut drift = 0.0f64;
    for s in &traj.states {
        drift = drift.max((value(s) - first).amax());
    }
    Ok(CheckReport::from_observed(
        "rotor_first_integral",
        drift,
        tol,
        format!(
            "max |(ell - k pi)(t) - (ell - k pi)(0)| with k = {k} over {} samples",
            traj.len()
        ),
    ))
}

/// Point of a canonical chart, `dof` positions followed by `dof` momenta.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonPoint {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
}

impl CanonPoint {
    pub fn zeros(dof: usize) -> Self {
        CanonPoint {
            q: vec![0.0; dof],
            p: vec![0.0; dof],
        }
    }
}

impl Coords for CanonPoint {
    fn dim(&self) -> usize {
        self.q.len() + self.p.len()
    }
    fn coord(&self, i: usize) -> f64 {
        let n = self.q.len();
        if i < n {
            self.q[i]
        } else {
            self.p[i - n]
        }
    }
    fn set_coord(&mut self, i: usize, value: f64) {
        let n = self.q.len();
        if i < n {
            self.q[i] = value;
        } else {
            self.p[i - n] = value;
        }
    }
}

/// Hamiltonian system on a canonical chart with the block two-form
/// `dq ^ dp`.
pub struct CanonicalSystem {
    pub dof: usize,
    pub h: SmoothFn<CanonPoint>,
}

impl CanonicalSystem {
    /// Uncoupled harmonic oscillators, `h = 1/2 sum (p_i^2 + q_i^2)`.
    pub fn oscillator(dof: usize) -> Self {
        CanonicalSystem {
            dof,
            h: SmoothFn::new(
                |z: &CanonPoint| {
                    0.5 * (z.q.iter().map(|x| x * x).sum::<f64>()
                        + z.p.iter().map(|x| x * x).sum::<f64>())
                },
                |z: &CanonPoint| z.clone(),
            ),
        }
    }

    /// The rotor stage of the rigid body with rotors: chart `(alpha, ell)`
    /// with the body momentum frozen as a parameter.
    pub fn rotor_stage(params: &RigidBodyRotorParams, pi: Vec3) -> Self {
        let (locked, rotor) = (params.locked_inertia, params.rotor_inertia);
        let (locked_g, rotor_g, pi_g) = (locked, rotor, pi);
        CanonicalSystem {
            dof: 3,
            h: SmoothFn::new(
                move |z: &CanonPoint| {
                    let ell = Vec3::new(z.p[0], z.p[1], z.p[2]);
                    let d = pi - ell;
                    0.5 * (d.component_div(&locked).dot(&d)
                        + ell.component_div(&rotor).dot(&ell))
                },
                move |z: &CanonPoint| {
                    let ell = Vec3::new(z.p[0], z.p[1], z.p[2]);
                    let omega = (pi_g - ell).component_div(&locked_g);
                    let dp = ell.component_div(&rotor_g) - omega;
                    CanonPoint {
                        q: vec![0.0; 3],
                        p: vec![dp.x, dp.y, dp.z],
                    }
                },
            ),
        }
    }

    /// Hamiltonian vector field `(dh/dp, -dh/dq)`.
    pub fn xh(&self, z: &CanonPoint) -> CanonPoint {
        let g = self.h.grad(z);
        CanonPoint {
            q: g.p.clone(),
            p: g.q.iter().map(|x| -x).collect(),
        }
    }
}

/// Port on a canonical chart: an extra flow `Y` paired with an effort
/// one-form `alpha`, both in `(q, p)` components.
#[derive(Clone)]
pub struct PortSpec {
    pub name: String,
    flow: Arc<dyn Fn(&CanonPoint) -> CanonPoint + Send + Sync>,
    effort: Arc<dyn Fn(&CanonPoint) -> CanonPoint + Send + Sync>,
}

impl PortSpec {
    pub fn new(
        name: impl Into<String>,
        flow: impl Fn(&CanonPoint) -> CanonPoint + Send + Sync + 'static,
        effort: impl Fn(&CanonPoint) -> CanonPoint + Send + Sync + 'static,
    ) -> Self {
        PortSpec {
            name: name.into(),
            flow: Arc::new(flow),
            effort: Arc::new(effort),
        }
    }

    /// The trivial port `(X_H, dH)`.
    pub fn trivial(sys: &CanonicalSystem) -> Self {
        let h1 = sys.h.clone();
        let h2 = sys.h.clone();
        PortSpec::new(
            "trivial",
            move |z: &CanonPoint| {
                let g = h1.grad(z);
                CanonPoint {
                    q: g.p.clone(),
                    p: g.q.iter().map(|x| -x).collect(),
                }
            },
            move |z: &CanonPoint| h2.grad(z),
        )
    }

    /// Vertically lifted force on the given channel columns:
    /// `Y = (0, B f)` with effort `alpha = i_Y omega = (-B f, 0)`.
    pub fn force(channels: Vec<Vec<f64>>, force: Vec<f64>) -> Result<Self> {
        if channels.len() != force.len() {
            return Err(Error::DimensionMismatch {
                expected: channels.len(),
                got: force.len(),
            });
        }
        let dof = channels.first().map(|c| c.len()).unwrap_or(0);
        if channels.iter().any(|c| c.len() != dof) {
            return Err(Error::DimensionMismatch {
                expected: dof,
                got: channels.iter().map(|c| c.len()).max().unwrap_or(0),
            });
        }
        let mut bf = vec![0.0; dof];
        for (col, f) in channels.iter().zip(&force) {
            for (slot, b) in bf.iter_mut().zip(col) {
                *slot += b * f;
            }
        }
        let bf2 = bf.clone();
        Ok(PortSpec::new(
            "force",
            move |_: &CanonPoint| CanonPoint {
                q: vec![0.0; dof],
                p: bf.clone(),
            },
            move |_: &CanonPoint| CanonPoint {
                q: bf2.iter().map(|x| -x).collect(),
                p: vec![0.0; dof],
            },
        ))
    }

    /// Same flow with the effort replaced, for detector tests.
    pub fn with_effort(
        &self,
        effort: impl Fn(&CanonPoint) -> CanonPoint + Send + Sync + 'static,
    ) -> Self {
        PortSpec {
            name: format!("{}_modified", self.name),
            flow: self.flow.clone(),
            effort: Arc::new(effort),
        }
    }

    pub fn flow(&self, z: &CanonPoint) -> CanonPoint {
        (self.flow)(z)
    }

    pub fn effort(&self, z: &CanonPoint) -> CanonPoint {
        (self.effort)(z)
    }
}

/// Defect of the port condition: the effort must equal the contraction of
/// the flow with the canonical two-form, `alpha = (-Y_p, Y_q)`.
pub fn check_port_condition(
    port: &PortSpec,
    dof: usize,
    samples: usize,
    tol: f64,
    seed: u64,
) -> CheckReport {
    let mut rng = rng_from_seed(seed);
    let template = CanonPoint::zeros(dof);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let z = sample_point(&template, &(0..0), &mut rng);
        let y = port.flow(&z);
        let contraction = CanonPoint {
            q: y.p.iter().map(|x| -x).collect(),
            p: y.q.clone(),
        };
        let defect = port.effort(&z).scaled_add(-1.0, &contraction).max_abs();
        worst = worst.max(defect);
    }
    CheckReport::from_observed(
        format!("port_condition_{}", port.name),
        worst,
        tol,
        format!("max |alpha - i_Y omega| over {samples} samples on a {dof}-dof chart"),
    )
}

/// Max defect of the energy balance along a recorded run: central-difference
/// dH/dt against the supplied-power series.
pub fn energy_balance_residual<S>(traj: &Trajectory<S>, step: f64) -> Result<f64> {
    let energy = traj
        .diagnostic("energy")
        .ok_or_else(|| Error::MissingDiagnostic {
            name: "energy".into(),
        })?;
    let power = traj
        .diagnostic("supplied_power")
        .ok_or_else(|| Error::MissingDiagnostic {
            name: "supplied_power".into(),
        })?;
    if energy.len() < 3 {
        return Err(Error::EmptyTrajectory);
    }
    let mut worst = 0.0f64;
    for i in 1..energy.len() - 1 {
        let dh = (energy[i + 1] - energy[i - 1]) / (2.0 * step);
        worst = worst.max((dh - power[i]).abs());
    }
    Ok(worst)
}

/// Energy balance along one run against an absolute tolerance (the caller
/// picks it as O(step^2) plus a conservation floor).
pub fn check_port_balance<S>(traj: &Trajectory<S>, step: f64, tol: f64) -> Result<CheckReport> {
    let worst = energy_balance_residual(traj, step)?;
    Ok(CheckReport::from_observed(
        "port_balance",
        worst,
        tol,
        format!(
            "max |central-difference dH/dt - supplied power| over {} samples at step {step:.1e}",
            traj.len()
        ),
    ))
}

/// Measured convergence order of the energy-balance residual between `step`
/// and `step/2`; reports the deviation from the expected order 2.
pub fn check_energy_balance_order(
    sys: &SystemDef,
    law: &ControlLaw,
    x0: &ReducedState,
    t_final: f64,
    step: f64,
    tol_deviation: f64,
) -> Result<CheckReport> {
    let run = |h: f64| -> Result<f64> {
        let traj = integrate_reduced(sys, Some(law), x0, &IntegratorSpec::rk4(h, t_final))?;
        energy_balance_residual(&traj, h)
    };
    let r1 = run(step)?;
    let r2 = run(0.5 * step)?;
    let order = (r1 / r2).log2();
    Ok(CheckReport::from_observed(
        "energy_balance_order",
        (order - 2.0).abs(),
        tol_deviation,
        format!(
            "residual {r1:.3e} at h = {step:.1e}, {r2:.3e} at h/2; measured order {order:.3}"
        ),
    ))
}

/// Analytic gradients of the Hamiltonian against central finite
/// differences at random states, scale-guarded relative.
pub fn check_gradients(sys: &SystemDef, samples: usize, tol: f64, seed: u64) -> Result<CheckReport> {
    let mut rng = rng_from_seed(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let x = sample_state(sys, &mut rng);
        let analytic = sys.gradient(&x)?;
        let sys2 = sys.clone();
        let fd = fd_gradient(
            &move |y: &ReducedState| sys2.hamiltonian(y).expect("variant preserved"),
            &x,
            FD_STEP,
        );
        let defect = fd.scaled_add(-1.0, &analytic).max_abs() / 1.0f64.max(analytic.max_abs());
        worst = worst.max(defect);
    }
    Ok(CheckReport::from_observed(
        format!("gradients_{}", sys.name()),
        worst,
        tol,
        format!(
            "max relative |fd - analytic| with step {FD_STEP:.1e} over {samples} random states"
        ),
    ))
}

/// Richardson probe of the RK4 order on the free rigid body; reports the
/// deviation of the measured order from 4.
pub fn check_rk4_order(
    params: &RigidBodyParams,
    pi0: Vec3,
    t_final: f64,
    step: f64,
    tol_deviation: f64,
) -> Result<CheckReport> {
    let sys = SystemDef::RigidBody(*params);
    let x0 = ReducedState::RigidBody { pi: pi0 };
    let run = |h: f64| -> Result<Vec3> {
        let traj = integrate_reduced(&sys, None, &x0, &IntegratorSpec::rk4(h, t_final))?;
        Ok(traj.states.last().expect("nonempty trajectory").pi())
    };
    let reference = run(step / 64.0)?;
    let e1 = (run(step)? - reference).norm();
    let e2 = (run(step / 2.0)? - reference).norm();
    let order = (e1 / e2).log2();
    Ok(CheckReport::from_observed(
        "rk4_order",
        (order - 4.0).abs(),
        tol_deviation,
        format!(
            "endpoint errors {e1:.3e} at h = {step:.1e} and {e2:.3e} at h/2 against an h/64 reference; measured order {order:.3}"
        ),
    ))
}

fn suite_systems() -> Result<[SystemDef; 5]> {
    Ok([
        SystemDef::RigidBody(RigidBodyParams::new(Vec3::new(1.0, 2.0, 3.0))?),
        SystemDef::RigidBodyTorque(RigidBodyParams::new(Vec3::new(1.0, 2.0, 3.0))?),
        SystemDef::RigidBodyRotors(RigidBodyRotorParams::new(
            Vec3::new(2.0, 3.0, 4.0),
            Vec3::new(0.5, 0.7, 0.9),
        )?),
        SystemDef::HeavyTop(HeavyTopParams::new(
            Vec3::new(1.0, 1.5, 2.0),
            2.0,
            Vec3::new(0.0, 0.0, 1.0),
        )?),
        SystemDef::HeavyTopRotors(HeavyTopRotorParams::new(
            Vec3::new(2.0, 2.5, 3.0),
            [0.4, 0.7],
            1.5,
            Vec3::new(0.0, 0.0, 1.0),
        )?),
    ])
}

/// The full battery of structure checks at their standard tolerances.
pub fn standard_suite(seed: u64) -> Result<Vec<CheckReport>> {
    let mut reports = Vec::new();

    for space in BracketSpace::ALL {
        reports.extend(check_bracket_axioms(space, 1000, 1e-12, seed)?);
    }

    let systems = suite_systems()?;
    for sys in &systems {
        reports.push(check_derivation_chain(sys, 1000, 1e-12, seed)?);
        reports.push(check_gradients(sys, 500, 1e-6, seed)?);
    }

    let rb_params = RigidBodyParams::new(Vec3::new(1.0, 2.0, 3.0))?;
    let rb = SystemDef::RigidBody(rb_params);
    let pi0 = ReducedState::RigidBody {
        pi: Vec3::new(1.0, 1.0, 1.0),
    };
    let rk4_run = integrate_reduced(&rb, None, &pi0, &IntegratorSpec::rk4(1e-3, 10.0))?;
    let mut r = check_series_conservation(&rk4_run, "energy", 1e-10)?;
    r.name = "conservation_energy_rb_rk4".into();
    reports.push(r);
    let mut r = check_series_conservation(&rk4_run, "casimir_1", 1e-9)?;
    r.name = "conservation_casimir_rb_rk4".into();
    reports.push(r);

    let split_run = integrate_reduced(&rb, None, &pi0, &IntegratorSpec::splitting(1e-3, 10.0))?;
    let mut r = check_series_conservation(&split_run, "casimir_1", 1e-12)?;
    r.name = "conservation_casimir_rb_splitting".into();
    reports.push(r);

    let ht = &systems[3];
    let ht0 = ReducedState::HeavyTop {
        pi: Vec3::new(0.5, -0.3, 1.2),
        gamma: Vec3::new(0.1, 0.2, 0.97),
    };
    let ht_run = integrate_reduced(ht, None, &ht0, &IntegratorSpec::splitting(1e-3, 10.0))?;
    let mut r = check_series_conservation(&ht_run, "casimir_1", 1e-12)?;
    r.name = "conservation_casimir1_ht_splitting".into();
    reports.push(r);
    let mut r = check_series_conservation(&ht_run, "casimir_2", 1e-12)?;
    r.name = "conservation_casimir2_ht_splitting".into();
    reports.push(r);

    let x0_full = FullState {
        attitude: crate::algebra::Rotation3::identity(),
        pi: Vec3::new(1.0, 1.0, 1.0),
    };
    let spec = IntegratorSpec::rk4(1e-3, 10.0);
    reports.push(check_reduction_consistency(
        &rb_params, &x0_full, None, None, &spec, 1e-12,
    )?);
    let torque = ControlLaw::constant_torque(Vec3::new(0.02, -0.01, 0.03));
    let mut r = check_reduction_consistency(
        &rb_params,
        &x0_full,
        None,
        Some(&torque),
        &spec,
        1e-12,
    )?;
    r.name = "reduction_consistency_torqued".into();
    reports.push(r);

    let full_run = integrate_full(&rb_params, None, &x0_full, &spec)?;
    for axis in 1..=3 {
        let mut r = check_series_conservation(&full_run, &format!("momentum_{axis}"), 1e-9)?;
        r.name = format!("momentum_map_drift_{axis}");
        reports.push(r);
    }

    let pairings = [
        EquivalencePairing::RbTorqueVsRotor {
            locked_inertia: Vec3::new(2.0, 3.0, 4.0),
            rotor_inertia: Vec3::new(0.5, 0.7, 0.9),
            k: 0.5,
            p: Vec3::new(0.3, -0.2, 0.7),
        },
        EquivalencePairing::RotorVsHeavyTop {
            inertia: Vec3::new(1.0, 1.5, 2.0),
            mgh: 2.0,
            chi: Vec3::new(0.0, 0.0, 1.0),
            lambda: 0.7,
        },
        EquivalencePairing::HtRotorVsRotor {
            locked_inertia: Vec3::new(2.0, 2.5, 3.0),
            rotor_inertia: [0.4, 0.7],
            mgh: 1.5,
            chi: Vec3::new(0.0, 0.0, 1.0),
            k: 0.6,
            p0: Vec3::new(0.2, -0.1, 0.05),
            lambda: 0.5,
        },
    ];
    for pairing in &pairings {
        reports.push(check_equivalence(pairing, 1000, 1e-12, seed, 0.0)?);
    }

    let rotor_params = RigidBodyRotorParams::new(Vec3::new(2.0, 3.0, 4.0), Vec3::new(0.5, 0.7, 0.9))?;
    let rotor0 = ReducedState::RigidBodyRotor {
        pi: Vec3::new(1.0, 0.5, -0.3),
        alpha: Vec3::zeros(),
        ell: Vec3::new(0.2, -0.1, 0.4),
    };
    reports.push(check_rotor_first_integral(
        &rotor_params,
        0.5,
        &rotor0,
        &IntegratorSpec::rk4(1e-3, 10.0),
        1e-9,
    )?);

    let osc = CanonicalSystem::oscillator(2);
    reports.push(check_port_condition(&PortSpec::trivial(&osc), 2, 1000, 1e-13, seed));
    let stage = CanonicalSystem::rotor_stage(&rotor_params, Vec3::new(1.0, 0.5, -0.3));
    let mut r = check_port_condition(&PortSpec::trivial(&stage), 3, 1000, 1e-13, seed);
    r.name = "port_condition_trivial_rotor_stage".into();
    reports.push(r);
    let force = PortSpec::force(
        vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]],
        vec![0.4, -0.7],
    )?;
    reports.push(check_port_condition(&force, 3, 1000, 1e-13, seed));

    let torque_sys = SystemDef::RigidBodyTorque(rb_params);
    let rb_torqued = integrate_reduced(
        &torque_sys,
        Some(&torque),
        &pi0,
        &IntegratorSpec::rk4(1e-3, 1.0),
    )?;
    let mut r = check_port_balance(&rb_torqued, 1e-3, 1e-4)?;
    r.name = "port_balance_rb_torque".into();
    reports.push(r);
    reports.push(check_energy_balance_order(
        &torque_sys,
        &torque,
        &pi0,
        1.0,
        1e-3,
        0.2,
    )?);

    let rotor_sys = SystemDef::RigidBodyRotors(rotor_params);
    let gain = ControlLaw::rotor_gain(0.5);
    let rotor_run = integrate_reduced(
        &rotor_sys,
        Some(&gain),
        &rotor0,
        &IntegratorSpec::rk4(1e-3, 1.0),
    )?;
    let mut r = check_port_balance(&rotor_run, 1e-3, 1e-4)?;
    r.name = "port_balance_rotor_gain".into();
    reports.push(r);

    reports.push(check_rk4_order(&rb_params, Vec3::new(1.0, 1.0, 1.0), 1.0, 0.02, 0.2)?);

    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bracket_axioms_hold_on_every_space() {
        for space in BracketSpace::ALL {
            for report in check_bracket_axioms(space, 50, 1e-12, DEFAULT_SEED).unwrap() {
                assert!(report.passed, "{}: {:e}", report.name, report.observed);
            }
        }
    }

    #[test]
    fn derivation_chain_holds_for_all_systems() {
        for sys in suite_systems().unwrap() {
            let report = check_derivation_chain(&sys, 50, 1e-12, DEFAULT_SEED).unwrap();
            assert!(report.passed, "{}: {:e}", report.name, report.observed);
        }
    }

    #[test]
    fn conservation_detects_a_drifting_series() {
        let rb = SystemDef::RigidBody(RigidBodyParams::new(Vec3::new(1.0, 2.0, 3.0)).unwrap());
        let x0 = ReducedState::RigidBody {
            pi: Vec3::new(1.0, 1.0, 1.0),
        };
        let mut traj =
            integrate_reduced(&rb, None, &x0, &IntegratorSpec::rk4(0.01, 1.0)).unwrap();
        let report = check_series_conservation(&traj, "energy", 1e-10).unwrap();
        assert!(report.passed);
        let n = traj.diagnostics[0].values.len();
        traj.diagnostics[0].values[n - 1] += 1e-3;
        let report = check_series_conservation(&traj, "energy", 1e-10).unwrap();
        assert!(!report.passed);
        assert!(matches!(
            check_series_conservation(&traj, "missing", 1e-10),
            Err(Error::MissingDiagnostic { .. })
        ));
    }

    #[test]
    fn reduction_consistency_detects_mismatched_start() {
        let params = RigidBodyParams::new(Vec3::new(1.0, 2.0, 3.0)).unwrap();
        let x0 = FullState {
            attitude: crate::algebra::Rotation3::identity(),
            pi: Vec3::new(1.0, 1.0, 1.0),
        };
        let spec = IntegratorSpec::rk4(0.01, 1.0);
        let good = check_reduction_consistency(&params, &x0, None, None, &spec, 1e-12).unwrap();
        assert!(good.passed, "observed {:e}", good.observed);
        let bad = check_reduction_consistency(
            &params,
            &x0,
            Some(Vec3::new(1.0, 1.0, 1.0 + 1e-3)),
            None,
            &spec,
            1e-12,
        )
        .unwrap();
        assert!(!bad.passed);
    }

    #[test]
    fn equivalences_pass_exactly_and_fail_when_perturbed() {
        let pairing = EquivalencePairing::RbTorqueVsRotor {
            locked_inertia: Vec3::new(2.0, 3.0, 4.0),
            rotor_inertia: Vec3::new(0.5, 0.7, 0.9),
            k: 0.5,
            p: Vec3::new(0.3, -0.2, 0.7),
        };
        let good = check_equivalence(&pairing, 100, 1e-12, DEFAULT_SEED, 0.0).unwrap();
        assert!(good.passed, "observed {:e}", good.observed);
        let bad = check_equivalence(&pairing, 100, 1e-12, DEFAULT_SEED, 1e-3).unwrap();
        assert!(!bad.passed);
        assert!(bad.observed > 1e-4);
    }

    #[test]
    fn degenerate_gain_is_an_error() {
        let pairing = EquivalencePairing::RbTorqueVsRotor {
            locked_inertia: Vec3::new(2.0, 3.0, 4.0),
            rotor_inertia: Vec3::new(0.5, 0.7, 0.9),
            k: 1.0,
            p: Vec3::zeros(),
        };
        assert!(matches!(
            check_equivalence(&pairing, 10, 1e-12, DEFAULT_SEED, 0.0),
            Err(Error::DegenerateGain)
        ));
    }

    #[test]
    fn port_condition_trivial_and_perturbed() {
        let osc = CanonicalSystem::oscillator(2);
        let trivial = PortSpec::trivial(&osc);
        let good = check_port_condition(&trivial, 2, 200, 1e-13, DEFAULT_SEED);
        assert!(good.passed, "observed {:e}", good.observed);
        let h = osc.h.clone();
        let perturbed = trivial.with_effort(move |z: &CanonPoint| {
            let mut g = h.grad(z);
            g.q[0] += 1e-3;
            g
        });
        let bad = check_port_condition(&perturbed, 2, 200, 1e-13, DEFAULT_SEED);
        assert!(!bad.passed);
        assert!(bad.observed > 1e-4);
    }

    #[test]
    fn uncontrolled_run_balances_to_conservation_floor() {
        let rb = SystemDef::RigidBody(RigidBodyParams::new(Vec3::new(1.0, 2.0, 3.0)).unwrap());
        let x0 = ReducedState::RigidBody {
            pi: Vec3::new(1.0, 1.0, 1.0),
        };
        let traj = integrate_reduced(&rb, None, &x0, &IntegratorSpec::rk4(1e-3, 1.0)).unwrap();
        let report = check_port_balance(&traj, 1e-3, 1e-9).unwrap();
        assert!(report.passed, "observed {:e}", report.observed);
    }

    #[test]
    fn gradient_check_catches_the_right_scale() {
        for sys in suite_systems().unwrap() {
            let report = check_gradients(&sys, 100, 1e-6, DEFAULT_SEED).unwrap();
            assert!(report.passed, "{}: {:e}", report.name, report.observed);
        }
    }

    #[test]
    fn rk4_order_is_near_four() {
        let params = RigidBodyParams::new(Vec3::new(1.0, 2.0, 3.0)).unwrap();
        let report = check_rk4_order(&params, Vec3::new(1.0, 1.0, 1.0), 1.0, 0.02, 0.2).unwrap();
        assert!(report.passed, "{}", report.context);
    }

    #[test]
    fn checks_are_deterministic_in_the_seed() {
        let pairing = EquivalencePairing::RotorVsHeavyTop {
            inertia: Vec3::new(1.0, 1.5, 2.0),
            mgh: 2.0,
            chi: Vec3::new(0.0, 0.0, 1.0),
            lambda: 0.7,
        };
        let a = check_equivalence(&pairing, 50, 1e-12, 42, 0.0).unwrap();
        let b = check_equivalence(&pairing, 50, 1e-12, 42, 0.0).unwrap();
        assert_eq!(a.observed.to_bits(), b.observed.to_bits());
        let c = check_equivalence(&pairing, 50, 1e-12, 43, 0.0).unwrap();
        assert!(c.passed);
    }
}
