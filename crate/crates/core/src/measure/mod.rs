//! Exact measure theory on finite spaces: image measures, conditional
//! expectation, the pairing `⟨φ, μ⟩`, fibre products, and the two
//! measure-extension criteria decided by linear programming.

pub mod extension;
pub mod fiber;
pub mod simplex;
pub mod space;

pub use extension::{
    extend_measure_eq, extend_measure_ineq, lambda_tilde, verify_certificate, Certificate, Constraint, ConstraintKind,
    ExtensionError, LinFeasProblem,
};
pub use fiber::{fiber_product, rectangle_via_base, rectangle_via_left, rectangle_via_right, FiberSpace};
pub use space::{cond_exp, image_measure, image_weights, pair, FinProbSpace, MeasurableMap, MeasureError, RationalFn};
