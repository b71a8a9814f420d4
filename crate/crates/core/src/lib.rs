//! Exact valuation arithmetic: ordered value groups, truncated Hahn series,
//! polynomial machinery with Hasse–Schmidt derivatives, pseudo-convergent
//! sequences and complete-intersection presentations built from them.

pub mod ci;
pub mod error;
pub mod field;
pub mod group;
pub mod poly;
pub mod pseudo;
pub mod series;
pub mod threshold;

pub use error::{Error, Result};
pub use field::{Coeff, FieldConfig};
pub use group::{compare, GroupElement, Value, Q};
pub use series::{Certainty, Series, ValResult};
pub use poly::{MultiPoly, TowerSpec};
pub use pseudo::PseudoSequence;
pub use threshold::{Mode, ThresholdCertificate, ThresholdProblem};
