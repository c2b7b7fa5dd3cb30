//! Infinitesimal group actions on jets of a germ.

mod generators;
mod kernel;
mod moduli;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use generators::{divergence_free_basis, divergence_free_dim, gamma_generators, GeneratorBuilder, Part};
pub use kernel::{kernel_route, KernelElement, KernelReport};
pub use moduli::{jet_vector, membership, moduli_dimension, ModuliOptions, ModuliReport, OrderRow};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BaseGroup {
    R,
    C,
    L,
    A,
    K,
}

impl BaseGroup {
    pub fn has_source(self) -> bool {
        matches!(self, BaseGroup::R | BaseGroup::A | BaseGroup::K)
    }

    pub fn has_target_fields(self) -> bool {
        matches!(self, BaseGroup::L | BaseGroup::A)
    }

    pub fn has_matrices(self) -> bool {
        matches!(self, BaseGroup::C | BaseGroup::K)
    }
}

impl fmt::Display for BaseGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for BaseGroup {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "R" | "r" => BaseGroup::R,
            "C" | "c" => BaseGroup::C,
            "L" | "l" => BaseGroup::L,
            "A" | "a" => BaseGroup::A,
            "K" | "k" => BaseGroup::K,
            other => return Err(Error::UnsupportedGroup(format!("unknown base group `{other}`"))),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VolumeSide {
    None,
    Source,
    Target,
}

impl fmt::Display for VolumeSide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VolumeSide::None => "none",
            VolumeSide::Source => "source",
            VolumeSide::Target => "target",
        })
    }
}

impl FromStr for VolumeSide {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "none" => VolumeSide::None,
            "source" => VolumeSide::Source,
            "target" => VolumeSide::Target,
            other => return Err(Error::InvalidArgument(format!("unknown side `{other}`"))),
        })
    }
}

/// A Mather group with an optional volume constraint.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupSpec {
    pub base: BaseGroup,
    pub volume: VolumeSide,
}

impl GroupSpec {
    pub fn new(base: BaseGroup, volume: VolumeSide) -> Result<Self> {
        use BaseGroup::*;
        use VolumeSide as V;
        let ok = match base {
            R => matches!(volume, V::None | V::Source),
            L | C => matches!(volume, V::None | V::Target),
            A | K => true,
        };
        if !ok {
            return Err(Error::UnsupportedGroup(format!("{base} with volume constraint on the {volume} side")));
        }
        Ok(GroupSpec { base, volume })
    }

    pub fn unconstrained(self) -> GroupSpec {
        GroupSpec { base: self.base, volume: VolumeSide::None }
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.volume {
            VolumeSide::None => write!(f, "{}", self.base),
            VolumeSide::Source => write!(f, "{}_Omega_n", self.base),
            VolumeSide::Target => write!(f, "{}_Omega_p", self.base),
        }
    }
}
