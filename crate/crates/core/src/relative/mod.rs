//! Horosphere systems over peripheral cosets, the coned-off relative graph
//! and lifts of relative geodesics.

mod graph;
mod horospheres;
mod lift;

pub use graph::{build_relative_graph, thinness_constant, trusted_triples, RelEdge, RelPath, RelativeGraph, ThinnessReport};
pub use horospheres::{
    build_horospheres, horosphere_axioms_report, horosphere_axioms_stability, set_diameter, tie_set,
    AxiomStability, Horosphere, HorosphereAxioms, HorosphereSystem, Witness,
};
pub use lift::{
    certify_lifts, depth, horosphere_quasiconvexity, lift, lift_distortion_bound, measure_lift_constants,
    rel_hull_depth, simple_loop_lift_report, Lift, LiftCertificate, LiftConstants, LiftViolation, LoopReport,
};

#[cfg(test)]
mod tests;
