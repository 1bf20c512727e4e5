//! Exact rigidity checks for the fixed-point data of circle actions.
//!
//! A weight matrix lists, for each isolated fixed point, the integer weights of the
//! tangent representation together with an orientation sign. From it we build the
//! rational functions `T_{x,y}(z)` and `L(z)`, decide whether they are constant in `z`,
//! compute Chern numbers through the Bott residue sum, and sweep bounded weight spaces
//! exhaustively.

pub mod algebra;
pub mod bott;
pub mod cli;
pub mod rigidity;
pub mod search;

pub use algebra::{AlgebraError, BivarPoly, DenomFactors, LaurentPoly, LaurentRational};
pub use bott::{
    chern_number, classify_two_fixed_points, elementary_symmetric, is_boundary_candidate,
    kosniowski_bound, realizability_screen, BottError, ChernPartition, ClassLabel, Violation,
};
pub use rigidity::{
    candidate_constant, check, is_l_rigid, is_rigid, l_candidate_constant, l_series,
    normalize_signs_for_l, pair_partition, parity_check, quasilinear, t_series, term_fraction,
    Mode, RigidityError, RigidityVerdict, Row, Sign, WeightMatrix, Witness, WitnessPoint,
};
pub use search::{
    canonical_form, enumerate_candidates, passes_prefilter, problem_2_4_search,
    quasilinearity_test, quasilinearity_test_in, sweep, Budget, Find, Problem24Solution,
    SearchError, SearchReport, SearchSpec, SearchStats, SignPolicy, Tag,
};
