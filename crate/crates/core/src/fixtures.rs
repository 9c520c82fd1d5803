//! Shipped example models.
//!
//! `design-original` holds the two design modules as statecharts; composed
//! with the handshake protocol they deadlock when a decision request from
//! the computations module coincides with a suspend from the designer.
//! `design-repaired` holds the transformed machines with two extra
//! acknowledgments emitted "for any case", which removes the trap.

use crate::compose::SystemModel;
use crate::error::Result;
use crate::formula::symbols;
use crate::io::{parse_model, ModelFile};

pub const M1: &str = include_str!("../fixtures/m1/m1.csm");
pub const M1_ENV: &str = include_str!("../fixtures/m1/m1.env");
pub const DESIGN_ORIGINAL: &str = include_str!("../fixtures/design-original/design.csm");
pub const DESIGN_REPAIRED: &str = include_str!("../fixtures/design-repaired/design.csm");

pub fn design_original() -> ModelFile {
    parse_model(DESIGN_ORIGINAL).expect("shipped fixture parses")
}

pub fn design_repaired() -> ModelFile {
    parse_model(DESIGN_REPAIRED).expect("shipped fixture parses")
}

/// Applies the repair: `SendStopIteration` also acknowledges a decision
/// request and `ProduceDecisionRequest` also acknowledges a stop request.
pub fn repair(system: &SystemModel) -> Result<SystemModel> {
    let mut machines = system.machines.clone();
    for m in &mut machines {
        match m.name.as_str() {
            "DIM" => {
                *m = m.augment_outputs("SendStopIteration", &symbols(["ACKDecisionRequest"]))?
            }
            "CCM" => {
                *m = m.augment_outputs("ProduceDecisionRequest", &symbols(["ACKStopIteration"]))?
            }
            _ => {}
        }
    }
    let mut repaired = SystemModel::new(&system.name, machines)?;
    repaired.accepting = system.accepting.clone();
    Ok(repaired)
}
