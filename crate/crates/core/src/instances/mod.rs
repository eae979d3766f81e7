//! Built-in monoid and group instances.

mod arctan;
mod circle;
mod cyclic;
mod dyadic;
mod general_lattice;
mod lattice;
mod semilattice;
mod set_algebra;

pub use arctan::{arctan_n_fold, ArctanElem, ArctanSemigroup, PointWindow, ARCTAN_TOLERANCE};
pub use circle::{Mod1, Mod1Window, RationalsMod1};
pub use cyclic::{FiniteCyclic, FullWindow};
pub use dyadic::{Dyadic, DyadicRationals, DyadicWindow};
pub use general_lattice::GeneralLattice;
pub use lattice::{BoxWindow, LatticeZd};
pub use semilattice::MeetSemilattice;
pub use set_algebra::{SetAlgebraGroup, SubsetWindow, MAX_GROUND_SET};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::scalar::parse_rational;

/// Instance description as read from an instance file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InstanceSpec {
    Lattice { dimension: usize },
    GeneralLattice { generators: Vec<Vec<String>> },
    Dyadic { dimension: usize },
    FiniteCyclic { moduli: Vec<u64> },
    RationalsMod1,
    SetAlgebra { size: u32 },
    MeetSemilattice {
        table: Vec<Vec<usize>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        labels: Option<Vec<String>>,
    },
    DivisorLattice { n: u64 },
    Arctan,
}

/// A built instance of any kind.
#[derive(Clone, Debug)]
pub enum AnyInstance {
    Lattice(LatticeZd),
    GeneralLattice(GeneralLattice),
    Dyadic(DyadicRationals),
    FiniteCyclic(FiniteCyclic),
    RationalsMod1(RationalsMod1),
    SetAlgebra(SetAlgebraGroup),
    MeetSemilattice(MeetSemilattice),
    Arctan(ArctanSemigroup),
}

/// Validates parameters and builds the instance.
pub fn build_instance(spec: &InstanceSpec) -> Result<AnyInstance> {
    Ok(match spec {
        InstanceSpec::Lattice { dimension } => AnyInstance::Lattice(LatticeZd::new(*dimension)?),
        InstanceSpec::GeneralLattice { generators } => {
            let gens = generators
                .iter()
                .map(|g| g.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()?;
            AnyInstance::GeneralLattice(GeneralLattice::new(gens)?)
        }
        InstanceSpec::Dyadic { dimension } => AnyInstance::Dyadic(DyadicRationals::new(*dimension)?),
        InstanceSpec::FiniteCyclic { moduli } => AnyInstance::FiniteCyclic(FiniteCyclic::new(moduli.clone())?),
        InstanceSpec::RationalsMod1 => AnyInstance::RationalsMod1(RationalsMod1),
        InstanceSpec::SetAlgebra { size } => AnyInstance::SetAlgebra(SetAlgebraGroup::new(*size)?),
        InstanceSpec::MeetSemilattice { table, labels } => {
            AnyInstance::MeetSemilattice(MeetSemilattice::from_table(table.clone(), labels.clone())?)
        }
        InstanceSpec::DivisorLattice { n } => AnyInstance::MeetSemilattice(MeetSemilattice::divisors(*n)?),
        InstanceSpec::Arctan => AnyInstance::Arctan(ArctanSemigroup),
    })
}

/// Runs `$body` with `$s` bound to the concrete instance inside an [`AnyInstance`].
#[macro_export]
macro_rules! with_instance {
    ($any:expr, $s:ident => $body:expr) => {
        match $any {
            $crate::instances::AnyInstance::Lattice($s) => $body,
            $crate::instances::AnyInstance::GeneralLattice($s) => $body,
            $crate::instances::AnyInstance::Dyadic($s) => $body,
            $crate::instances::AnyInstance::FiniteCyclic($s) => $body,
            $crate::instances::AnyInstance::RationalsMod1($s) => $body,
            $crate::instances::AnyInstance::SetAlgebra($s) => $body,
            $crate::instances::AnyInstance::MeetSemilattice($s) => $body,
            $crate::instances::AnyInstance::Arctan($s) => $body,
        }
    };
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Structure;
    use crate::error::Error;

    #[test]
    fn builds_from_json() {
        let spec: InstanceSpec = serde_json::from_str(r#"{"kind":"finite_cyclic","moduli":[6]}"#).unwrap();
        let inst = build_instance(&spec).unwrap();
        assert_eq!(with_instance!(&inst, s => s.name()), "Z/6");
        let AnyInstance::FiniteCyclic(g) = inst else { panic!() };
        assert_eq!(g.exponent(), Some(6));
    }

    #[test]
    fn rejects_dependent_generators_and_large_sets() {
        let spec: InstanceSpec =
            serde_json::from_str(r#"{"kind":"general_lattice","generators":[["1","0"],["2","0"]]}"#).unwrap();
        assert_eq!(build_instance(&spec).unwrap_err(), Error::DependentGenerators);
        let spec = InstanceSpec::SetAlgebra { size: 30 };
        assert!(build_instance(&spec).is_err());
        let spec: InstanceSpec =
            serde_json::from_str(r#"{"kind":"general_lattice","generators":[["1","0"],["1/2","1/2"]]}"#).unwrap();
        assert!(build_instance(&spec).is_ok());
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(serde_json::from_str::<InstanceSpec>(r#"{"kind":"lattice","dimension":2,"x":1}"#).is_err());
    }
}
