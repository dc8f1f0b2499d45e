//! Built-in example models, embedded so the binary can materialize them
//! and the tests can share them.

use crate::model::{load_model, SphereModel};

pub const NIXON_SRC: &str = include_str!("../fixtures/nixon.sph");
pub const NIXON_WEAK_SRC: &str = include_str!("../fixtures/nixon_weak.sph");

/// All built-in fixtures as `(file name, contents)` pairs.
pub const ALL: &[(&str, &str)] = &[
    ("nixon.sph", NIXON_SRC),
    ("nixon_weak.sph", NIXON_WEAK_SRC),
];

/// The centered missile-launch model.
pub fn nixon() -> SphereModel {
    load_model(NIXON_SRC).expect("embedded fixture is valid")
}

/// The weakly centered missile-launch model.
pub fn nixon_weak() -> SphereModel {
    load_model(NIXON_WEAK_SRC).expect("embedded fixture is valid")
}
