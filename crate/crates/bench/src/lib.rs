//! Shared fixtures for the criterion benches.

use liepoisson::{
    HeavyTopParams, ReducedState, RigidBodyParams, RigidBodyRotorParams, SystemDef, Vec3,
};

pub fn rigid_body() -> SystemDef {
    SystemDef::RigidBody(RigidBodyParams::new(Vec3::new(1.0, 2.0, 3.0)).expect("valid inertia"))
}

pub fn rotor_body() -> SystemDef {
    SystemDef::RigidBodyRotors(
        RigidBodyRotorParams::new(Vec3::new(2.0, 3.0, 4.0), Vec3::new(0.5, 0.7, 0.9))
            .expect("valid inertias"),
    )
}

pub fn heavy_top() -> SystemDef {
    SystemDef::HeavyTop(
        HeavyTopParams::new(Vec3::new(1.0, 1.5, 2.0), 2.0, Vec3::new(0.0, 0.0, 1.0))
            .expect("valid parameters"),
    )
}

pub fn rb_state() -> ReducedState {
    ReducedState::RigidBody {
        pi: Vec3::new(1.0, 0.5, -0.3),
    }
}

pub fn rotor_state() -> ReducedState {
    ReducedState::RigidBodyRotor {
        pi: Vec3::new(1.0, 0.5, -0.3),
        alpha: Vec3::new(0.1, 0.2, 0.3),
        ell: Vec3::new(0.2, -0.1, 0.4),
    }
}

pub fn ht_state() -> ReducedState {
    ReducedState::HeavyTop {
        pi: Vec3::new(0.5, -0.3, 1.2),
        gamma: Vec3::new(0.1, 0.2, 0.97),
    }
}
