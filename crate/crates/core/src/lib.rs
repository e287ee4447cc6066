// `!(a < b)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod drawdown;
pub mod error;
pub mod formulas;
pub mod kernels;
pub mod levy_model;
pub mod quadrature;
pub mod scale_functions;
pub mod simulator;
pub mod table;

pub use drawdown::DrawdownSpec;
pub use error::{Error, Result};
pub use formulas::{Query, Resolvent};
pub use kernels::{KernelContext, TransformSpec};
pub use levy_model::{ModelParams, RootSet};
pub use quadrature::QuadratureConfig;
pub use scale_functions::{ScaleEval, ScaleFamily, ScaleRep, Scaled};
pub use simulator::{Estimate, Functional, SimConfig};
pub use table::CurveTable;
