//! The quasiconvexity battery: projections and convergence functions,
//! hull testers with growth verdicts, Dirichlet sets and parabolic
//! intersection diagnostics.

mod dirichlet;
mod notions;
mod projection;
mod visible;

pub use dirichlet::{
    check_fundamental, check_star_convex, dirichlet, dirichlet_projection_bound, orbit_in_ball,
    parabolic_intersection_report, CoveringReport, DirichletProjection, DirichletSet, Intersection,
    ParabolicReport, ParabolicRow, StarConvexity,
};
pub use notions::{
    combine, consistency_check, measure_alpha, measure_relative, measure_visible, measure_weak_alpha, run_battery,
    test_quasiconvexity, BatteryParams, ChainLink, Level, Measurement, Notion, ParamStatus, QCBody, QCReport,
    Stabilized, Status, Verdict, DYNAMICAL_NOTE,
};
pub use projection::{
    convergence_function, convergence_sup, convergence_table, project, projection_bound_check,
    projection_diameter, projection_qiso_check, sample_trusted_edges, Convergence, FrontierProxy,
    ProjectionBound, QisoReport,
};
pub use visible::{
    ehull_check, floyd_set_diameter, visible_hull, visible_table, EHullReport, EHullViolation, HullBound,
    VisibleEntry, VisibleMode, VisibleTable,
};
