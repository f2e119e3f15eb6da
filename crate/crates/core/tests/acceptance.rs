//! End-to-end acceptance gate for the library: each test exercises one
//! criterion at its stated tolerance and prints a single pass/fail line
//! (run with `--nocapture` to see them all).

use std::time::Instant;

use liepoisson::algebra::{hat, Mat3};
use liepoisson::poisson::Coords;
use liepoisson::verify::{
    check_bracket_axioms, check_conservation, check_derivation_chain, check_energy_balance_order,
    check_equivalence, check_gradients, check_port_condition, check_reduction_consistency,
    check_rk4_order, check_rotor_first_integral, check_series_conservation, BracketSpace,
    CanonicalSystem, CheckReport, EquivalencePairing, PortSpec, DEFAULT_SEED,
};
use liepoisson::{
    exp_so3, integrate_full, integrate_reduced, ControlLaw, FullState, HeavyTopParams,
    HeavyTopRotorParams, IntegratorSpec, ReducedState, RigidBodyParams, RigidBodyRotorParams,
    Rotation3, SystemDef, Vec3,
};
use rand::{Rng, SeedableRng};

fn gate(criterion: &str, reports: &[CheckReport], started: Instant, budget_s: f64) {
    let elapsed = started.elapsed().as_secs_f64();
    let worst = reports
        .iter()
        .max_by(|a, b| {
            (a.observed / a.tolerance)
                .partial_cmp(&(b.observed / b.tolerance))
                .expect("finite ratios")
        })
        .expect("at least one report");
    let all_pass = reports.iter().all(|r| r.passed) && elapsed <= budget_s;
    println!(
        "[{}] {}: worst {} observed {:.3e} (tol {:.1e}), {} checks, {:.2} s (budget {:.0} s)",
        if all_pass { "PASS" } else { "FAIL" },
        criterion,
        worst.name,
        worst.observed,
        worst.tolerance,
        reports.len(),
        elapsed,
        budget_s,
    );
    for r in reports {
        assert!(
            r.passed,
            "{} observed {:e} exceeds {:e}: {}",
            r.name, r.observed, r.tolerance, r.context
        );
    }
    assert!(elapsed <= budget_s, "runtime {elapsed:.2} s over budget {budget_s} s");
}

fn systems() -> [SystemDef; 5] {
    [
        SystemDef::RigidBody(RigidBodyParams::new(Vec3::new(1.0, 2.0, 3.0)).unwrap()),
        SystemDef::RigidBodyTorque(RigidBodyParams::new(Vec3::new(1.0, 2.0, 3.0)).unwrap()),
        SystemDef::RigidBodyRotors(
            RigidBodyRotorParams::new(Vec3::new(2.0, 3.0, 4.0), Vec3::new(0.5, 0.7, 0.9)).unwrap(),
        ),
        SystemDef::HeavyTop(
            HeavyTopParams::new(Vec3::new(1.0, 1.5, 2.0), 2.0, Vec3::new(0.0, 0.0, 1.0)).unwrap(),
        ),
        SystemDef::HeavyTopRotors(
            HeavyTopRotorParams::new(
                Vec3::new(2.0, 2.5, 3.0),
                [0.4, 0.7],
                1.5,
                Vec3::new(0.0, 0.0, 1.0),
            )
            .unwrap(),
        ),
    ]
}

#[test]
fn criterion_1_bracket_axioms() {
    let started = Instant::now();
    let mut reports = Vec::new();
    for space in BracketSpace::ALL {
        reports.extend(check_bracket_axioms(space, 1000, 1e-12, DEFAULT_SEED).unwrap());
    }
    gate("criterion 1 bracket axioms", &reports, started, 5.0);
}

#[test]
fn criterion_2_derivation_chain() {
    let started = Instant::now();
    let reports: Vec<_> = systems()
        .iter()
        .map(|sys| check_derivation_chain(sys, 1000, 1e-12, DEFAULT_SEED).unwrap())
        .collect();
    gate("criterion 2 derivation chain", &reports, started, 5.0);
}

#[test]
fn criterion_3_conservation() {
    let started = Instant::now();
    let rb = SystemDef::RigidBody(RigidBodyParams::new(Vec3::new(1.0, 2.0, 3.0)).unwrap());
    let x0 = ReducedState::RigidBody {
        pi: Vec3::new(1.0, 1.0, 1.0),
    };
    let mut reports = Vec::new();

    let rk4 = integrate_reduced(&rb, None, &x0, &IntegratorSpec::rk4(1e-3, 10.0)).unwrap();
    reports.push(check_series_conservation(&rk4, "energy", 1e-10).unwrap());
    reports.push(check_series_conservation(&rk4, "casimir_1", 1e-9).unwrap());

    let split = integrate_reduced(&rb, None, &x0, &IntegratorSpec::splitting(1e-3, 10.0)).unwrap();
    let mut r = check_series_conservation(&split, "casimir_1", 1e-12).unwrap();
    r.name = "conservation_casimir_1_splitting".into();
    reports.push(r);

    let ht = SystemDef::HeavyTop(
        HeavyTopParams::new(Vec3::new(1.0, 1.5, 2.0), 2.0, Vec3::new(0.0, 0.0, 1.0)).unwrap(),
    );
    let ht0 = ReducedState::HeavyTop {
        pi: Vec3::new(0.5, -0.3, 1.2),
        gamma: Vec3::new(0.1, 0.2, 0.97),
    };
    let ht_run = integrate_reduced(&ht, None, &ht0, &IntegratorSpec::splitting(1e-3, 10.0)).unwrap();
    assert_eq!(ht_run.len(), 10_001);
    for series in ["casimir_1", "casimir_2"] {
        let mut r = check_series_conservation(&ht_run, series, 1e-12).unwrap();
        r.name = format!("conservation_{series}_ht_splitting");
        reports.push(r);
    }
    gate("criterion 3 conservation", &reports, started, 10.0);
}

#[test]
fn criterion_4_momentum_map_and_reduction() {
    let started = Instant::now();
    let params = RigidBodyParams::new(Vec3::new(1.0, 2.0, 3.0)).unwrap();
    let x0 = FullState {
        attitude: Rotation3::identity(),
        pi: Vec3::new(1.0, 1.0, 1.0),
    };
    let spec = IntegratorSpec::rk4(1e-3, 10.0);
    let mut reports = Vec::new();
    let full = integrate_full(&params, None, &x0, &spec).unwrap();
    for axis in 1..=3 {
        let mut r = check_series_conservation(&full, &format!("momentum_{axis}"), 1e-9).unwrap();
        r.name = format!("momentum_map_drift_{axis}");
        reports.push(r);
    }
    reports.push(
        check_reduction_consistency(&params, &x0, None, None, &spec, 1e-12).unwrap(),
    );
    let torque = ControlLaw::constant_torque(Vec3::new(0.02, -0.01, 0.03));
    let mut r =
        check_reduction_consistency(&params, &x0, None, Some(&torque), &spec, 1e-12).unwrap();
    r.name = "reduction_consistency_torqued".into();
    reports.push(r);
    gate("criterion 4 momentum map and reduction", &reports, started, 10.0);
}

#[test]
fn criterion_5_equivalences() {
    let started = Instant::now();
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
    let mut reports = Vec::new();
    for pairing in &pairings {
        let clean = check_equivalence(pairing, 1000, 1e-12, DEFAULT_SEED, 0.0).unwrap();
        let perturbed = check_equivalence(pairing, 1000, 1e-12, DEFAULT_SEED, 1e-3).unwrap();
        assert!(
            !perturbed.passed && perturbed.observed > 1e-6,
            "{} must detect a 1e-3 perturbation, saw {:e}",
            perturbed.name,
            perturbed.observed
        );
        reports.push(clean);
    }

    let rotor_params =
        RigidBodyRotorParams::new(Vec3::new(2.0, 3.0, 4.0), Vec3::new(0.5, 0.7, 0.9)).unwrap();
    let x0 = ReducedState::RigidBodyRotor {
        pi: Vec3::new(1.0, 0.5, -0.3),
        alpha: Vec3::zeros(),
        ell: Vec3::new(0.2, -0.1, 0.4),
    };
    let spec = IntegratorSpec::rk4(1e-3, 10.0);
    reports.push(check_rotor_first_integral(&rotor_params, 0.5, &x0, &spec, 1e-9).unwrap());

    let sys = SystemDef::RigidBodyRotors(rotor_params);
    let law = ControlLaw::rotor_gain(0.5);
    let traj = integrate_reduced(&sys, Some(&law), &x0, &spec).unwrap();
    let wrong_k = 0.5 + 1e-3;
    let probe = |s: &ReducedState| match s {
        ReducedState::RigidBodyRotor { pi, ell, .. } => (ell - wrong_k * pi).x,
        _ => unreachable!(),
    };
    let detector = check_conservation(&traj, "first_integral_wrong_gain", &probe, 1e-9).unwrap();
    assert!(
        !detector.passed && detector.observed > 1e-6,
        "first-integral check must detect a perturbed gain, saw {:e}",
        detector.observed
    );
    gate("criterion 5 feedback equivalences", &reports, started, 10.0);
}

#[test]
fn criterion_6_port_balance() {
    let started = Instant::now();
    let mut reports = Vec::new();
    let osc = CanonicalSystem::oscillator(2);
    reports.push(check_port_condition(
        &PortSpec::trivial(&osc),
        2,
        1000,
        1e-13,
        DEFAULT_SEED,
    ));
    let rotor_params =
        RigidBodyRotorParams::new(Vec3::new(2.0, 3.0, 4.0), Vec3::new(0.5, 0.7, 0.9)).unwrap();
    let stage = CanonicalSystem::rotor_stage(&rotor_params, Vec3::new(1.0, 0.5, -0.3));
    let mut r = check_port_condition(&PortSpec::trivial(&stage), 3, 1000, 1e-13, DEFAULT_SEED);
    r.name = "port_condition_trivial_rotor_stage".into();
    reports.push(r);
    let force = PortSpec::force(
        vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]],
        vec![0.4, -0.7],
    )
    .unwrap();
    reports.push(check_port_condition(&force, 3, 1000, 1e-13, DEFAULT_SEED));

    let rb = RigidBodyParams::new(Vec3::new(1.0, 2.0, 3.0)).unwrap();
    let torque_sys = SystemDef::RigidBodyTorque(rb);
    let torque = ControlLaw::constant_torque(Vec3::new(0.02, -0.01, 0.03));
    let pi0 = ReducedState::RigidBody {
        pi: Vec3::new(1.0, 1.0, 1.0),
    };
    let mut r =
        check_energy_balance_order(&torque_sys, &torque, &pi0, 1.0, 1e-3, 0.2).unwrap();
    r.name = "energy_balance_order_constant_torque".into();
    reports.push(r);

    let rotor_sys = SystemDef::RigidBodyRotors(rotor_params);
    let gain = ControlLaw::rotor_gain(0.5);
    let rotor0 = ReducedState::RigidBodyRotor {
        pi: Vec3::new(1.0, 0.5, -0.3),
        alpha: Vec3::zeros(),
        ell: Vec3::new(0.2, -0.1, 0.4),
    };
    let mut r = check_energy_balance_order(&rotor_sys, &gain, &rotor0, 1.0, 1e-3, 0.2).unwrap();
    r.name = "energy_balance_order_rotor_gain".into();
    reports.push(r);
    gate("criterion 6 port balance", &reports, started, 10.0);
}

fn exp_series_oracle(xi: &Vec3) -> Mat3 {
    let x = hat(xi);
    let mut term = Mat3::identity();
    let mut sum = Mat3::identity();
    for k in 1..=30 {
        term = term * x / (k as f64);
        sum += term;
    }
    sum
}

#[test]
fn criterion_7_numerics_hygiene() {
    let started = Instant::now();
    let mut reports = Vec::new();
    for sys in &systems() {
        reports.push(check_gradients(sys, 1000, 1e-6, DEFAULT_SEED).unwrap());
    }

    let params = RigidBodyParams::new(Vec3::new(1.0, 2.0, 3.0)).unwrap();
    reports.push(check_rk4_order(&params, Vec3::new(1.0, 1.0, 1.0), 1.0, 0.02, 0.2).unwrap());

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let mut worst = 0.0f64;
    for i in 0..1000 {
        let xi = if i % 10 == 0 {
            Vec3::new(
                rng.random_range(-1e-7..1e-7),
                rng.random_range(-1e-7..1e-7),
                rng.random_range(-1e-7..1e-7),
            )
        } else {
            Vec3::new(
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
            )
        };
        let defect = (exp_so3(&xi).matrix() - exp_series_oracle(&xi)).amax();
        worst = worst.max(defect);
    }
    reports.push(CheckReport::from_observed(
        "exp_so3_vs_series_oracle",
        worst,
        1e-12,
        "max |exp_so3 - 30-term series| over 1000 samples including near-zero angles",
    ));
    gate("criterion 7 numerics hygiene", &reports, started, 10.0);
}

#[test]
fn reduced_states_expose_flat_coordinates() {
    let x = ReducedState::HeavyTopRotor {
        pi: Vec3::new(1.0, 2.0, 3.0),
        gamma: Vec3::new(4.0, 5.0, 6.0),
        theta: [7.0, 8.0],
        ell: [9.0, 10.0],
    };
    assert_eq!(x.dim(), 10);
    assert_eq!((0..10).map(|i| x.coord(i)).collect::<Vec<_>>(), (1..=10).map(f64::from).collect::<Vec<_>>());
}
