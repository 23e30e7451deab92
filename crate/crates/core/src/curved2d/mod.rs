//! Elements with one curved boundary edge.
//!
//! Three treatments are offered: generator values on an auxiliary
//! triangle ([`generators`]), a polynomial reconstructed from the other
//! unknowns ([`subset`]), and a layer of clipped finite elements around
//! the boundary ([`ribbon`]).

pub mod generators;
pub mod ribbon;
pub mod subset;

use serde::Serialize;

use crate::error::VemError;

pub use generators::{build_generator_set, generator_count, GeneratorSet};
pub use ribbon::RibbonDiscretization;
pub use subset::subset_polynomial;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurvedStrategy {
    Generators,
    Subset,
    SubsetMfd,
    Ribbon,
    /// Curved edges replaced by their chords.
    Facet,
}

impl std::str::FromStr for CurvedStrategy {
    type Err = VemError;
    fn from_str(s: &str) -> Result<Self, VemError> {
        match s {
            "generators" => Ok(CurvedStrategy::Generators),
            "subset" => Ok(CurvedStrategy::Subset),
            "subset-mfd" => Ok(CurvedStrategy::SubsetMfd),
            "ribbon" => Ok(CurvedStrategy::Ribbon),
            "facet" => Ok(CurvedStrategy::Facet),
            _ => Err(VemError::Config(format!("unknown curved strategy '{s}'"))),
        }
    }
}

impl std::fmt::Display for CurvedStrategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CurvedStrategy::Generators => "generators",
            CurvedStrategy::Subset => "subset",
            CurvedStrategy::SubsetMfd => "subset-mfd",
            CurvedStrategy::Ribbon => "ribbon",
            CurvedStrategy::Facet => "facet",
        })
    }
}
