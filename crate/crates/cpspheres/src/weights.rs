//! Weights of formulas and sets of formulas, with their comparisons.
//!
//! The weight of a formula at a world is the list of per-shell counts of
//! satisfying worlds, from the innermost sphere outward. Weights compare
//! inverse-lexicographically: at the first shell where the counts differ,
//! fewer satisfying worlds means strictly higher weight (more implausible).
//! The weight of a set is the list of its member weights sorted from
//! highest to lowest, compared lexicographically with a prefix rule.

use std::cmp::Ordering;
use std::fmt;

use crate::eval::{sat, EvalError};
use crate::formula::{CpSet, Formula};
use crate::model::{SphereModel, World, WorldSet};
use crate::update::UpdateTag;

/// Per-shell satisfaction counts, innermost first.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FormulaWeight {
    pub counts: Vec<usize>,
}

impl fmt::Display for FormulaWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.counts.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Member weights sorted from highest to lowest under [`cmp_xel`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SetWeight {
    pub parts: Vec<FormulaWeight>,
}

impl fmt::Display for SetWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, p) in self.parts.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "]")
    }
}

/// Counts, per shell of the chain around `x`, the worlds satisfying `a`
/// under the update tag `u`.
pub fn weight_of_formula(
    m: &SphereModel,
    x: World,
    a: &Formula,
    u: UpdateTag,
) -> Result<FormulaWeight, EvalError> {
    let sys = m.system(x);
    let mut counts = Vec::with_capacity(sys.spheres.len());
    let mut prev = WorldSet::EMPTY;
    for &sphere in &sys.spheres {
        let shell = sphere.difference(prev);
        let mut n = 0;
        for w in shell.iter() {
            if sat(m, w, a, u)? {
                n += 1;
            }
        }
        counts.push(n);
        prev = sphere;
    }
    Ok(FormulaWeight { counts })
}

/// Inverse-lexicographic comparison of formula weights: `Greater` means
/// strictly higher weight, which at the first differing shell is the list
/// with FEWER satisfying worlds.
pub fn cmp_xel(wa: &FormulaWeight, wb: &FormulaWeight) -> Ordering {
    debug_assert_eq!(wa.counts.len(), wb.counts.len(), "weights from different chains");
    for (a, b) in wa.counts.iter().zip(&wb.counts) {
        if a != b {
            return b.cmp(a);
        }
    }
    Ordering::Equal
}

/// Significance comparison: `a` is at least as significant as `b` when
/// max{w(a), w(ā)} is at least max{w(b), w(b̄)} under [`cmp_xel`].
pub fn cmp_significance(
    m: &SphereModel,
    x: World,
    a: &Formula,
    b: &Formula,
    u: UpdateTag,
) -> Result<Ordering, EvalError> {
    Ok(cmp_xel(&max_weight(m, x, a, u)?, &max_weight(m, x, b, u)?))
}

fn max_weight(
    m: &SphereModel,
    x: World,
    a: &Formula,
    u: UpdateTag,
) -> Result<FormulaWeight, EvalError> {
    let w = weight_of_formula(m, x, a, u)?;
    let wd = weight_of_formula(m, x, &a.dual(), u)?;
    Ok(if cmp_xel(&wd, &w) == Ordering::Greater { wd } else { w })
}

/// Weight of a set: member weights sorted from highest to lowest. The
/// empty set has the empty list as its weight, the minimum under
/// [`cmp_lex`].
pub fn weight_of_set(
    m: &SphereModel,
    x: World,
    g: &CpSet,
    u: UpdateTag,
) -> Result<SetWeight, EvalError> {
    let mut parts = Vec::with_capacity(g.len());
    for member in g.members() {
        parts.push(weight_of_formula(m, x, member, u)?);
    }
    parts.sort_by(|a, b| cmp_xel(b, a));
    Ok(SetWeight { parts })
}

/// Lexicographic comparison of set weights, elementwise under [`cmp_xel`];
/// when one list is a prefix of the other, the shorter one is smaller.
pub fn cmp_lex(ga: &SetWeight, gb: &SetWeight) -> Ordering {
    for (a, b) in ga.parts.iter().zip(&gb.parts) {
        let ord = cmp_xel(a, b);
        if ord != Ordering::Equal {
            return ord;
        }
    }
    ga.parts.len().cmp(&gb.parts.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::formula::parse;

    const D: UpdateTag = UpdateTag::Disagreement;

    fn w(m: &SphereModel, src: &str) -> FormulaWeight {
        let x = m.world_named("x").unwrap();
        weight_of_formula(m, x, &parse(src).unwrap(), D).unwrap()
    }

    #[test]
    fn centered_fixture_weights() {
        let m = fixtures::nixon();
        assert_eq!(w(&m, "p").counts, [0, 1, 1, 1, 1]);
        assert_eq!(w(&m, "~p").counts, [1, 0, 0, 0, 0]);
        assert_eq!(w(&m, "e1").counts, [0, 1, 1, 0, 0]);
        assert_eq!(w(&m, "e2").counts, [0, 1, 1, 0, 0]);
        assert_eq!(w(&m, "l").counts, [0, 0, 0, 1, 1]);
        assert_eq!(w(&m, "h").counts, [0, 0, 0, 1, 1]);
        assert_eq!(w(&m, "~l").counts, [1, 1, 1, 0, 0]);
        assert_eq!(w(&m, "~h").counts, [1, 1, 1, 0, 0]);
        assert_eq!(w(&m, "~e1").counts, [1, 0, 0, 1, 1]);
    }

    #[test]
    fn centered_fixture_weight_chain() {
        // ~h = ~l < ~e1 = ~e2 < ~p < p < e1 = e2 < h = l, low to high.
        let m = fixtures::nixon();
        let chain = ["~h", "~l", "~e1", "~e2", "~p", "p", "e1", "e2", "h", "l"];
        let strict = [false, true, false, true, true, true, false, true, false];
        let weights: Vec<FormulaWeight> = chain.iter().map(|s| w(&m, s)).collect();
        for i in 0..strict.len() {
            let ord = cmp_xel(&weights[i], &weights[i + 1]);
            if strict[i] {
                assert_eq!(ord, Ordering::Less, "{} vs {}", chain[i], chain[i + 1]);
            } else {
                assert_eq!(ord, Ordering::Equal, "{} vs {}", chain[i], chain[i + 1]);
            }
        }
    }

    #[test]
    fn weak_fixture_weights() {
        // e1/~e1 recomputed from the fixture valuation; the rest match the
        // centered fixture pattern with the three-world innermost sphere.
        let m = fixtures::nixon_weak();
        assert_eq!(w(&m, "p").counts, [0, 1, 1, 1, 1]);
        assert_eq!(w(&m, "~p").counts, [3, 0, 0, 0, 0]);
        assert_eq!(w(&m, "e1").counts, [2, 0, 0, 1, 1]);
        assert_eq!(w(&m, "~e1").counts, [1, 1, 1, 0, 0]);
        assert_eq!(w(&m, "e2").counts, [0, 1, 1, 0, 0]);
        assert_eq!(w(&m, "~e2").counts, [3, 0, 0, 1, 1]);
        assert_eq!(w(&m, "l").counts, [0, 0, 0, 1, 1]);
        assert_eq!(w(&m, "~l").counts, [3, 1, 1, 0, 0]);
    }

    #[test]
    fn significance_examples() {
        let m = fixtures::nixon();
        let x = m.world_named("x").unwrap();
        let f = |s: &str| parse(s).unwrap();
        // h outweighs e1: max{h, ~h} = h beats max{e1, ~e1} = e1.
        assert_eq!(
            cmp_significance(&m, x, &f("h"), &f("e1"), D).unwrap(),
            Ordering::Greater
        );
        // e1 outweighs p: max{e1, ~e1} = e1 beats max{p, ~p} = p.
        assert_eq!(
            cmp_significance(&m, x, &f("e1"), &f("p"), D).unwrap(),
            Ordering::Greater
        );
        assert_eq!(
            cmp_significance(&m, x, &f("h"), &f("l"), D).unwrap(),
            Ordering::Equal
        );
    }

    #[test]
    fn set_weights_sort_descending() {
        let m = fixtures::nixon();
        let x = m.world_named("x").unwrap();
        let g = CpSet::paired([parse("e1").unwrap(), parse("e2").unwrap()]);
        let sw = weight_of_set(&m, x, &g, D).unwrap();
        let counts: Vec<&[usize]> = sw.parts.iter().map(|p| p.counts.as_slice()).collect();
        // e1 = e2 outweigh their duals, so they lead.
        assert_eq!(
            counts,
            [
                &[0, 1, 1, 0, 0][..],
                &[0, 1, 1, 0, 0][..],
                &[1, 0, 0, 1, 1][..],
                &[1, 0, 0, 1, 1][..],
            ]
        );
        let singleton = CpSet::new([parse("h").unwrap()]);
        let sw = weight_of_set(&m, x, &singleton, D).unwrap();
        assert_eq!(sw.parts.len(), 1);
        assert_eq!(sw.parts[0].counts, [0, 0, 0, 1, 1]);
    }

    #[test]
    fn empty_set_is_minimum() {
        let m = fixtures::nixon();
        let x = m.world_named("x").unwrap();
        let empty = weight_of_set(&m, x, &CpSet::empty(), D).unwrap();
        assert!(empty.parts.is_empty());
        let g = CpSet::paired([parse("e1").unwrap()]);
        let sw = weight_of_set(&m, x, &g, D).unwrap();
        assert_eq!(cmp_lex(&empty, &sw), Ordering::Less);
        assert_eq!(cmp_lex(&empty, &empty), Ordering::Equal);
    }

    #[test]
    fn pairs_set_outranks_less_significant_pairs_set() {
        // {l, ~l} sits strictly above {e1, e2, ~e1, ~e2} at x.
        let m = fixtures::nixon();
        let x = m.world_named("x").unwrap();
        let ls = CpSet::paired([parse("l").unwrap()]);
        let es = CpSet::paired([parse("e1").unwrap(), parse("e2").unwrap()]);
        let wl = weight_of_set(&m, x, &ls, D).unwrap();
        let we = weight_of_set(&m, x, &es, D).unwrap();
        assert_eq!(cmp_lex(&wl, &we), Ordering::Greater);
    }

    #[test]
    fn subset_weight_is_monotone() {
        let m = fixtures::nixon();
        let x = m.world_named("x").unwrap();
        let atoms = ["p", "e1", "e2", "l", "h"];
        let members: Vec<Formula> = atoms
            .iter()
            .flat_map(|a| {
                let f = parse(a).unwrap();
                [f.dual(), f]
            })
            .collect();
        // All subset pairs of a 5-element pool, exhaustively.
        let pool = &members[..5];
        for mask_small in 0u32..32 {
            for mask_big in 0u32..32 {
                if mask_small & !mask_big != 0 {
                    continue;
                }
                let pick = |mask: u32| {
                    CpSet::new(
                        pool.iter()
                            .enumerate()
                            .filter(|(i, _)| mask & (1 << i) != 0)
                            .map(|(_, f)| f.clone()),
                    )
                };
                let (small, big) = (pick(mask_small), pick(mask_big));
                let ws = weight_of_set(&m, x, &small, D).unwrap();
                let wb = weight_of_set(&m, x, &big, D).unwrap();
                assert_ne!(
                    cmp_lex(&ws, &wb),
                    Ordering::Greater,
                    "monotonicity failed for {small} vs {big}"
                );
            }
        }
    }
}
