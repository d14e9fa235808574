//! Attainable Picard numbers of abelian varieties, computed exactly.
//!
//! An abelian variety is modelled by its isogeny decomposition
//! ([`decomp::Decomposition`]); its Picard number is the sum of the
//! closed-form values of the Albert types of its factors ([`albert`]).
//! [`range`] enumerates every value reachable in a fixed dimension from a
//! [`catalog::Catalog`] of simple blocks.

pub mod albert;
pub mod asymptotics;
pub mod catalog;
pub mod cli;
pub mod decomp;
pub mod range;
pub mod verify;

pub use albert::{AlbertType, CharContext, SplitPolicy};
pub use catalog::{Catalog, CatalogMode};
pub use decomp::{Block, Decomposition};
