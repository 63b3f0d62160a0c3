//! Fields on chart × fiber and their derivatives: nested forward-mode AD
//! plus a central-difference oracle.

mod diff;
mod dual;
mod fd;
mod jet;
mod sample;

pub use diff::{
    constants, field_first, field_second, first, partial, second, seeded, third, Direction, Field,
    Mapping, Scalar, SecondJet, Var,
};
pub use dual::{Dual, Real};
pub use fd::{
    default_step, fd_oracle, fd_reference, STEP_LOW_ORDER, STEP_SECOND_ORDER, STEP_THIRD_ORDER,
};
pub use jet::{jet_eval, Jet, Orders};
pub use sample::{euclidean_norm, ChartBox, TangentSample, FIBER_FLOOR};
