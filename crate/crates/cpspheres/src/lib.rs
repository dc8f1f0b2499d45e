//! Model checking for counterfactuals and comparative plausibility with
//! ceteris paribus clauses over finite sphere models.

pub mod arena;
pub mod cpsets;
pub mod eval;
pub mod fixtures;
pub mod formula;
pub mod model;
pub mod search;
pub mod translate;
pub mod update;
pub mod weights;
