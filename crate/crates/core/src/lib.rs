//! Simulation and verification toolkit for controlled Hamiltonian systems
//! with symmetry: Lie-Poisson brackets on the duals of so(3) and se(3),
//! rigid bodies with and without internal rotors, the heavy top, feedback
//! equivalences between torqued and rotor-driven systems, and structure
//! checks that keep the whole stack honest.

pub mod algebra;
pub mod control;
pub mod error;
pub mod integrate;
pub mod poisson;
pub mod systems;
pub mod verify;

pub use algebra::{exp_so3, hat, reorthonormalize, vee, Mat3, Rotation3, Vec3};
pub use control::{ControlLaw, EquivalenceMap};
pub use error::{Error, Result};
pub use integrate::{integrate_full, integrate_reduced, IntegratorSpec, Method, Trajectory};
pub use poisson::{BracketSign, Coords, LpFactor, ProductPoint, RotorPoint, Se3Dual, SmoothFn};
pub use systems::{
    momentum_map_so3, FullState, HeavyTopParams, HeavyTopRotorParams, ReducedState,
    RigidBodyParams, RigidBodyRotorParams, SystemDef,
};
pub use verify::{
    check_bracket_axioms, check_conservation, check_derivation_chain, check_energy_balance_order,
    check_equivalence, check_gradients, check_port_balance, check_port_condition,
    check_reduction_consistency, check_rk4_order, check_rotor_first_integral,
    check_series_conservation, standard_suite, BracketSpace, CanonPoint, CanonicalSystem,
    CheckReport, EquivalencePairing, PortSpec, DEFAULT_SEED,
};
