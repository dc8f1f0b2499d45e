//! Model-relative elimination of cp-sets: `hat` rewrites a single
//! comparative-plausibility node with a non-empty paired set into a
//! base-language formula that agrees with it at the anchor point under the
//! disagreement update, and `star` iterates hat until no non-empty cp-set
//! remains.

use std::cmp::Ordering;

use thiserror::Error;

use crate::cpsets::{forcing_set, paired_subsets};
use crate::eval::EvalError;
use crate::formula::{CpSet, Formula};
use crate::model::{Centering, SphereModel, World};
use crate::update::UpdateTag;
use crate::weights::{cmp_lex, weight_of_set, SetWeight};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TranslateError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("operands must be free of cp-connectives with non-empty sets")]
    OperandsNotFlat,
    #[error("cp-set must be non-empty and paired")]
    BadSet,
    #[error("translation under the implausibility update is only supported on centered models")]
    ImplausibilityOnWeak,
}

const TAG: UpdateTag = UpdateTag::Disagreement;

/// The paired subsets of Γ together with their set weights at (m, x),
/// and x's forcing sets over each complement Γ\λ.
struct Lambdas {
    subsets: Vec<CpSet>,
    weights: Vec<SetWeight>,
    /// ⋀ of x's forcing set over Γ\λ, per subset.
    complements: Vec<Formula>,
}

fn lambdas(m: &SphereModel, x: World, g: &CpSet) -> Result<Lambdas, TranslateError> {
    let subsets = paired_subsets(g)?;
    let mut weights = Vec::with_capacity(subsets.len());
    let mut complements = Vec::with_capacity(subsets.len());
    for lam in &subsets {
        weights.push(weight_of_set(m, x, lam, TAG)?);
        let rest = g.difference(lam);
        let forced = forcing_set(m, x, &rest, TAG)?;
        complements.push(Formula::conj(forced.members().iter().cloned()));
    }
    Ok(Lambdas { subsets, weights, complements })
}

/// Base-language counterpart of `a <=[g] b` at the anchor (m, x): one
/// conjunct per paired subset λ of g, guarded by the λ-ordering induced by
/// the set weights at (m, x).
pub fn hat(
    m: &SphereModel,
    x: World,
    a: &Formula,
    b: &Formula,
    g: &CpSet,
) -> Result<Formula, TranslateError> {
    if a.cpl() != 0 || b.cpl() != 0 {
        return Err(TranslateError::OperandsNotFlat);
    }
    if g.is_empty() || !g.is_paired() {
        return Err(TranslateError::BadSet);
    }
    let ls = lambdas(m, x, g)?;
    let mut conjuncts = Vec::with_capacity(ls.subsets.len());
    for (i, _) in ls.subsets.iter().enumerate() {
        // Premise: no λ' strictly below λ admits an A-world matching x on
        // the rest of Γ.
        let mut premise = Vec::new();
        // Conclusion lhs: some λ'' at or below λ does.
        let mut lhs = Vec::new();
        for (j, _) in ls.subsets.iter().enumerate() {
            let ord = cmp_lex(&ls.weights[j], &ls.weights[i]);
            let witness = Formula::and(a.clone(), ls.complements[j].clone());
            if ord == Ordering::Less {
                premise.push(Formula::not(Formula::diamond(witness.clone())));
            }
            if ord != Ordering::Greater {
                lhs.push(witness);
            }
        }
        let rhs = Formula::and(b.clone(), ls.complements[i].clone());
        conjuncts.push(Formula::implies(
            Formula::conj(premise),
            Formula::lewis_pl(Formula::disj(lhs), rhs),
        ));
    }
    Ok(Formula::conj(conjuncts))
}

/// Number of connective nodes of the hat-applicable plausibility node, for
/// the maximal-size selection in [`star`].
fn hat_ready_size(f: &Formula) -> Option<usize> {
    if let Formula::CpPlausibility(a, g, b) = f {
        if !g.is_empty() && a.cpl() == 0 && b.cpl() == 0 {
            return Some(f.size());
        }
    }
    None
}

fn max_hat_ready(f: &Formula) -> Option<usize> {
    let own = hat_ready_size(f);
    let inner = match f {
        Formula::Atom(_) | Formula::Falsum => None,
        Formula::Implies(lhs, rhs) => max_hat_ready(lhs).max(max_hat_ready(rhs)),
        Formula::CpCounterfactual(lhs, g, rhs) | Formula::CpPlausibility(lhs, g, rhs) => {
            let mut best = max_hat_ready(lhs).max(max_hat_ready(rhs));
            for member in g.members() {
                best = best.max(max_hat_ready(member));
            }
            best
        }
    };
    own.max(inner)
}

fn replace_hat_ready(
    m: &SphereModel,
    x: World,
    f: &Formula,
    size: usize,
) -> Result<Formula, TranslateError> {
    if hat_ready_size(f) == Some(size) {
        let Formula::CpPlausibility(a, g, b) = f else { unreachable!() };
        return hat(m, x, a, b, g);
    }
    Ok(match f {
        Formula::Atom(_) | Formula::Falsum => f.clone(),
        Formula::Implies(lhs, rhs) => Formula::implies(
            replace_hat_ready(m, x, lhs, size)?,
            replace_hat_ready(m, x, rhs, size)?,
        ),
        Formula::CpCounterfactual(lhs, g, rhs) => Formula::cf(
            replace_hat_ready(m, x, lhs, size)?,
            replace_in_set(m, x, g, size)?,
            replace_hat_ready(m, x, rhs, size)?,
        ),
        Formula::CpPlausibility(lhs, g, rhs) => Formula::pl(
            replace_hat_ready(m, x, lhs, size)?,
            replace_in_set(m, x, g, size)?,
            replace_hat_ready(m, x, rhs, size)?,
        ),
    })
}

fn replace_in_set(
    m: &SphereModel,
    x: World,
    g: &CpSet,
    size: usize,
) -> Result<CpSet, TranslateError> {
    let mut members = Vec::with_capacity(g.len());
    for member in g.members() {
        members.push(replace_hat_ready(m, x, member, size)?);
    }
    Ok(CpSet::new(members))
}

/// Iterated hat-elimination at the anchor (m, x): at each round the
/// largest innermost hat-applicable plausibility nodes are replaced, until
/// no cp-connective with a non-empty set remains. Expects the
/// plausibility-only language; run `rewrite_cf_to_pl` first.
pub fn star(m: &SphereModel, x: World, f: &Formula) -> Result<Formula, TranslateError> {
    let mut current = f.rewrite_cf_to_pl();
    while current.cpl() != 0 {
        let size = max_hat_ready(&current)
            .expect("a formula with positive cpl has a hat-applicable node");
        current = replace_hat_ready(m, x, &current, size)?;
    }
    Ok(current)
}

/// Guard used by the CLI: translation is backed by the disagreement update
/// (hence also agreement everywhere, and implausibility on centered
/// models).
pub fn check_tag_supported(m: &SphereModel, u: UpdateTag) -> Result<(), TranslateError> {
    if u == UpdateTag::Implausibility && m.centering == Centering::Weak {
        return Err(TranslateError::ImplausibilityOnWeak);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::sat;
    use crate::fixtures;
    use crate::formula::parse;
    use crate::model::load_model;

    fn f(src: &str) -> Formula {
        parse(src).unwrap()
    }

    fn gamma() -> CpSet {
        CpSet::paired([f("e1"), f("e2")])
    }

    #[test]
    fn hat_is_equisatisfiable_on_the_fixture() {
        let m = fixtures::nixon();
        let x = m.world_named("x").unwrap();
        let original = Formula::pl(f("p"), gamma(), f("h"));
        let translated = hat(&m, x, &f("p"), &f("h"), &gamma()).unwrap();
        assert_eq!(translated.cpl(), 0);
        assert_eq!(
            sat(&m, x, &original, TAG).unwrap(),
            sat(&m, x, &translated, TAG).unwrap()
        );
    }

    #[test]
    fn hat_has_one_conjunct_per_paired_subset() {
        let m = fixtures::nixon();
        let x = m.world_named("x").unwrap();
        let translated = hat(&m, x, &f("p"), &f("h"), &gamma()).unwrap();
        // Four paired subsets, so a conjunction of four implications:
        // three & nodes chaining them.
        let mut count = 0;
        let mut stack = vec![&translated];
        while let Some(node) = stack.pop() {
            if let Formula::CpPlausibility(..) = node {
                count += 1;
                continue;
            }
            if let Formula::Implies(lhs, rhs) = node {
                stack.push(lhs);
                stack.push(rhs);
            }
        }
        // Each conjunct carries one top-level <=[] plus the ~<> guards,
        // which also desugar to <=[] nodes; at least 4 conjunct heads.
        assert!(count >= 4, "found {count} plausibility nodes");
    }

    #[test]
    fn hat_on_two_world_models_exhaustively() {
        // Every valuation of a 2-world centered model, Γ = {p, ~p}.
        for bits in 0u8..4 {
            let mut src = String::from("centering: centered\nworlds: x y\nval p:");
            if bits & 1 != 0 {
                src.push_str(" x");
            }
            if bits & 2 != 0 {
                src.push_str(" y");
            }
            src.push_str("\nspheres x: {x} {x y}\nspheres y: {y}\n");
            let m = load_model(&src).unwrap();
            let x = m.world_named("x").unwrap();
            let g = CpSet::paired([f("p")]);
            for (a, b) in [("p", "~p"), ("~p", "p"), ("p", "p"), ("false", "p")] {
                let original = Formula::pl(f(a), g.clone(), f(b));
                let translated = hat(&m, x, &f(a), &f(b), &g).unwrap();
                assert_eq!(
                    sat(&m, x, &original, TAG).unwrap(),
                    sat(&m, x, &translated, TAG).unwrap(),
                    "valuation {bits}, {a} <= {b}"
                );
            }
        }
    }

    #[test]
    fn hat_rejects_bad_inputs() {
        let m = fixtures::nixon();
        let x = m.world_named("x").unwrap();
        assert_eq!(
            hat(&m, x, &f("p"), &f("h"), &CpSet::empty()).unwrap_err(),
            TranslateError::BadSet
        );
        assert_eq!(
            hat(&m, x, &f("p <=[e1, ~e1] h"), &f("h"), &gamma()).unwrap_err(),
            TranslateError::OperandsNotFlat
        );
    }

    #[test]
    fn star_fixes_base_language_formulas() {
        let m = fixtures::nixon();
        let x = m.world_named("x").unwrap();
        for src in ["p", "p <=[] h", "p -> (h <=[] e1)"] {
            let g = f(src);
            assert_eq!(star(&m, x, &g).unwrap(), g, "{src}");
        }
    }

    #[test]
    fn star_on_single_node_equals_hat() {
        let m = fixtures::nixon();
        let x = m.world_named("x").unwrap();
        let original = Formula::pl(f("p"), gamma(), f("h"));
        assert_eq!(
            star(&m, x, &original).unwrap(),
            hat(&m, x, &f("p"), &f("h"), &gamma()).unwrap()
        );
    }

    #[test]
    fn star_eliminates_nested_sets_and_stays_equisatisfiable() {
        let m = fixtures::nixon();
        let g = CpSet::paired([f("l")]);
        let inner = Formula::pl(f("p"), gamma(), f("h"));
        let nested = Formula::pl(inner, g, f("e1"));
        for world in ["x", "v1", "y1"] {
            let x = m.world_named(world).unwrap();
            let translated = star(&m, x, &nested).unwrap();
            assert_eq!(translated.cpl(), 0);
            assert_eq!(
                sat(&m, x, &nested, TAG).unwrap(),
                sat(&m, x, &translated, TAG).unwrap(),
                "world {world}"
            );
        }
    }

    #[test]
    fn star_handles_counterfactuals_via_rewrite() {
        let m = fixtures::nixon();
        for world in ["x", "v1", "y1"] {
            let x = m.world_named(world).unwrap();
            for src in [
                "p =>[e1, e2, ~e1, ~e2] h",
                "p =>[l, ~l] ~h",
                "(p =>[e1, ~e1] h) -> (h <=[l, ~l] p)",
            ] {
                let original = f(src);
                let translated = star(&m, x, &original).unwrap();
                assert_eq!(translated.cpl(), 0, "{src}");
                assert_eq!(
                    sat(&m, x, &original, TAG).unwrap(),
                    sat(&m, x, &translated, TAG).unwrap(),
                    "world {world}, {src}"
                );
            }
        }
    }

    #[test]
    fn tag_guard() {
        assert!(check_tag_supported(&fixtures::nixon(), UpdateTag::Implausibility).is_ok());
        assert!(check_tag_supported(&fixtures::nixon_weak(), UpdateTag::Disagreement).is_ok());
        assert_eq!(
            check_tag_supported(&fixtures::nixon_weak(), UpdateTag::Implausibility).unwrap_err(),
            TranslateError::ImplausibilityOnWeak
        );
    }
}
