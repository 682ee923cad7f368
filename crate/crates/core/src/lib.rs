//! Finite truncations of the generic Kripke model `K_n`, the free Heyting
//! algebras they carry, and tools for intuitionistic propositional formulas.

pub mod completion;
pub mod decide;
pub mod dejongh;
pub mod error;
pub mod experiments;
pub mod formula;
pub mod frame;
pub mod heyting;
pub mod lift;
pub mod models;
pub mod nodeset;
pub mod poset;
pub mod universal;

pub use error::{Error, Result};
pub use frame::Frame;
pub use nodeset::NodeSet;
pub use poset::{Extremal, Poset};
pub use universal::{build_universal, Limits, UniversalModel};
