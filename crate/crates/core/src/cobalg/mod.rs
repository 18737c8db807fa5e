//! Dotted cobordisms over `Z[H]` between crossingless tangles.

mod cobsum;
mod smoothing;
pub mod surface;

pub use cobsum::{
    compose_topology, deloop_legs, evaluate, evaluate_sum, glue_smoothings, glue_topology,
    handle_expansion, handle_relation, CobSum, Cobordism, DeloopLegs, Glued, Origin, RawComp,
    Term, TopComp, Topology, TopologyBuilder,
};
pub use smoothing::{Cycles, Smoothing};
