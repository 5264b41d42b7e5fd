pub mod certificate;
pub mod certified;
pub mod enumeration;
pub mod error;
pub mod families;
pub mod genericity;
pub mod recheck;
pub mod sampling;
pub mod scalar;
pub mod selftest;
pub mod sequence;
pub mod spaceability;
pub mod spaces;
pub mod value;
pub mod witnesses;

pub use certificate::{Certificate, ClaimKind, Family, Item};
pub use certified::CertifiedReal;
pub use error::{Error, ParseError, Result};
pub use families::{BranchId, Index, IndexSet};
pub use scalar::{Rational, Scalar};
pub use sequence::{
    DivergenceSchedule, Evaluation, ScheduleKind, SeriesVerdict, SymbolicSequence, Tail, TailClass,
    TailTerm,
};
pub use value::Value;
