//! Forcing, agreement and disagreement sets of a world relative to the
//! actual world and a cp-set, plus paired-subset enumeration and the
//! maximal cp-set construction.

use std::cmp::Ordering;

use crate::eval::{sat, EvalError};
use crate::formula::{CpSet, Formula};
use crate::model::{SphereModel, World};
use crate::update::UpdateTag;
use crate::weights::{cmp_xel, weight_of_formula};

/// The three Γ-relative sets of a world `y` w.r.t. the actual world `x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WorldProfile {
    pub world: World,
    /// Members of Γ that y satisfies.
    pub forcing: CpSet,
    /// Members of Γ on which y agrees with x.
    pub agreement: CpSet,
    /// Members of Γ on which y differs from x.
    pub disagreement: CpSet,
}

pub fn profile(
    m: &SphereModel,
    x: World,
    y: World,
    g: &CpSet,
    u: UpdateTag,
) -> Result<WorldProfile, EvalError> {
    let mut forcing = Vec::new();
    let mut agreement = Vec::new();
    let mut disagreement = Vec::new();
    for member in g.members() {
        let at_x = sat(m, x, member, u)?;
        let at_y = sat(m, y, member, u)?;
        if at_y {
            forcing.push(member.clone());
        }
        if at_x == at_y {
            agreement.push(member.clone());
        } else {
            disagreement.push(member.clone());
        }
    }
    Ok(WorldProfile {
        world: y,
        forcing: CpSet::new(forcing),
        agreement: CpSet::new(agreement),
        disagreement: CpSet::new(disagreement),
    })
}

/// The forcing set of `x` itself: members of Γ that x satisfies.
pub fn forcing_set(
    m: &SphereModel,
    x: World,
    g: &CpSet,
    u: UpdateTag,
) -> Result<CpSet, EvalError> {
    let mut out = Vec::new();
    for member in g.members() {
        if sat(m, x, member, u)? {
            out.push(member.clone());
        }
    }
    Ok(CpSet::new(out))
}

/// Members of Γ that x does not satisfy.
pub fn forcing_complement(
    m: &SphereModel,
    x: World,
    g: &CpSet,
    u: UpdateTag,
) -> Result<CpSet, EvalError> {
    let mut out = Vec::new();
    for member in g.members() {
        if !sat(m, x, member, u)? {
            out.push(member.clone());
        }
    }
    Ok(CpSet::new(out))
}

/// All paired subsets of a paired set, including the empty set and the set
/// itself. 2^(pairs) subsets.
pub fn paired_subsets(g: &CpSet) -> Result<Vec<CpSet>, EvalError> {
    let pairs = dual_pairs(g)?;
    let mut out = Vec::with_capacity(1 << pairs.len());
    for mask in 0u64..(1 << pairs.len()) {
        let mut members = Vec::new();
        for (i, (a, b)) in pairs.iter().enumerate() {
            if mask & (1 << i) != 0 {
                members.push(a.clone());
                members.push(b.clone());
            }
        }
        out.push(CpSet::new(members));
    }
    Ok(out)
}

/// Splits a paired set into its dual pairs, in canonical member order.
pub fn dual_pairs(g: &CpSet) -> Result<Vec<(Formula, Formula)>, EvalError> {
    if !g.is_paired() {
        return Err(EvalError::NonPairedSet { set: g.to_string() });
    }
    let mut pairs = Vec::new();
    let mut seen: Vec<&Formula> = Vec::new();
    for member in g.members() {
        if seen.contains(&member) {
            continue;
        }
        let dual = member.dual();
        seen.push(member);
        if let Some(pos) = g.members().iter().position(|m| *m == dual) {
            seen.push(&g.members()[pos]);
        }
        pairs.push((member.clone(), dual));
    }
    Ok(pairs)
}

/// Tie handling in [`maximal_cp_set`] when a member and its dual have
/// equal weight (possible only on weakly centered models).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TieRule {
    /// Keep the member the actual world falsifies (the defining clause).
    FalsifiedMember,
    /// Keep both members of the pair.
    KeepBoth,
}

/// The maximal cp-set of Γ at (m, x): per dual pair the member of higher
/// weight; on equal weights, per the tie rule.
pub fn maximal_cp_set(
    m: &SphereModel,
    x: World,
    g: &CpSet,
    u: UpdateTag,
    tie: TieRule,
) -> Result<CpSet, EvalError> {
    let mut out = Vec::new();
    for (a, b) in dual_pairs(g)? {
        let wa = weight_of_formula(m, x, &a, u)?;
        let wb = weight_of_formula(m, x, &b, u)?;
        match cmp_xel(&wa, &wb) {
            Ordering::Greater => out.push(a),
            Ordering::Less => out.push(b),
            Ordering::Equal => match tie {
                TieRule::KeepBoth => {
                    out.push(a);
                    out.push(b);
                }
                TieRule::FalsifiedMember => {
                    // A is in the set iff x satisfies its dual.
                    if sat(m, x, &b, u)? {
                        out.push(a);
                    } else {
                        out.push(b);
                    }
                }
            },
        }
    }
    Ok(CpSet::new(out))
}
