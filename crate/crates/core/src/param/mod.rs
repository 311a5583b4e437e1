//! Function parameters: expression trees, RO certificates, Matuszewska
//! indices, transforms and pseudoconcavity.

mod concave;
mod expr;
mod representation;
mod ro;
mod transform;

pub use concave::{
    concave_majorant, peetre_log_constant, pseudoconcavity_test, upper_hull, ConcaveMajorant, PseudoconcavityConfig,
    PseudoconcavityReport,
};
pub use expr::{ParamExpr, PiecewiseLinear, Representation, Table};
pub use representation::{build_from_representation, sample_representation};
pub use ro::{
    check_weight_condition, matuszewska_indices, ro_log_constant, ro_membership, BoundSide, IndexConfig, IndexEstimate,
    RoConfig, RoReport, RoWitness, WeightCondition, WeightConfig, WindowSlopes,
};
pub use transform::{
    class_b_check, phi_from_psi, psi_from_phi, reiteration_compose, ClassBCheck, Reiteration, SampleRange,
};
