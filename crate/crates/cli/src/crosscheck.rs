//! Thin adapter from the library's cross-check suite to run verdicts.

use anyhow::Result;
use std::collections::BTreeMap;

use crate::run::CheckVerdict;

/// Outcome of one cross-check family.
pub struct CrossCheck {
    pub verdicts: BTreeMap<String, CheckVerdict>,
}

impl CrossCheck {
    pub fn all_pass(&self) -> bool {
        self.verdicts.values().all(|v| v.pass)
    }
}

/// Runs the library suite and converts outcomes to verdicts.
pub fn cross_check(seed: u64) -> Result<CrossCheck> {
    let result = degregorio::verify::cross_check(seed)?;
    Ok(CrossCheck {
        verdicts: result
            .checks
            .into_iter()
            .map(|(name, c)| {
                (
                    name,
                    CheckVerdict {
                        pass: c.pass,
                        value: c.value,
                        tolerance: c.tolerance,
                    },
                )
            })
            .collect(),
    })
}
