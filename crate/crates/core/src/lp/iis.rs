//! Deletion-filter IIS extraction over a designated set of candidate tags.

use std::collections::BTreeSet;

use super::{DenseSimplex, LinearProgram, LpBackend, LpOutcome, Tag};
use crate::error::{Error, Result};

/// Candidate tags forming an irreducible inconsistent subsystem together with
/// the non-candidate ("base") part of the program.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IisReport {
    /// Members in candidate order.
    pub tags: Vec<Tag>,
}

impl IisReport {
    pub fn contains(&self, tag: Tag) -> bool {
        self.tags.contains(&tag)
    }
}

pub fn extract_iis(lp: &LinearProgram, candidates: &[Tag], tol: f64) -> Result<IisReport> {
    extract_iis_with(&DenseSimplex::default(), lp, candidates, tol)
}

/// Finds an IIS among `candidates`, which are ordered oldest first.
///
/// Candidates are dropped one at a time starting from the most recent; a drop
/// is kept whenever the rest of the program stays infeasible. The result `S`
/// satisfies: base ∪ S is infeasible and base ∪ S \ {s} is feasible for every
/// `s ∈ S`.
pub fn extract_iis_with<B: LpBackend + ?Sized>(
    backend: &B,
    lp: &LinearProgram,
    candidates: &[Tag],
    tol: f64,
) -> Result<IisReport> {
    let probe = lp.feasibility_only();
    let witness = match backend.solve(&probe, tol)? {
        LpOutcome::Infeasible { witness } => witness,
        _ => return Err(Error::NotInfeasible),
    };
    let all: BTreeSet<Tag> = candidates.iter().copied().collect();
    if !backend.is_feasible(&probe.without_tags(&all), tol)? {
        return Err(Error::BaseInfeasible);
    }

    let restricted_infeasible = |keep: &[Tag]| -> Result<bool> {
        let drop: BTreeSet<Tag> = all.difference(&keep.iter().copied().collect()).copied().collect();
        Ok(!backend.is_feasible(&probe.without_tags(&drop), tol)?)
    };

    // the Farkas support usually narrows the candidates before filtering
    let narrowed: Vec<Tag> = candidates
        .iter()
        .copied()
        .filter(|t| witness.contains(t))
        .collect();
    let mut kept: Vec<Tag> = if narrowed.len() < candidates.len() && restricted_infeasible(&narrowed)? {
        narrowed
    } else {
        candidates.to_vec()
    };

    let mut i = kept.len();
    while i > 0 {
        i -= 1;
        let mut trial = kept.clone();
        trial.remove(i);
        if restricted_infeasible(&trial)? {
            kept = trial;
        }
    }
    Ok(IisReport { tags: kept })
}
