//! Dynamic satisfaction: each cp-operator with a non-empty set updates the
//! current model at the evaluation world and checks its Lewis core there.
//! Variant b (the default, [`sat`]) keeps evaluating operands in the
//! updated model, so nested cp-operators compound updates. Variants a and
//! c exist for differential testing.

use thiserror::Error;

use crate::formula::{CpSet, Formula};
use crate::model::{SphereModel, World};
use crate::update::{update, UpdateTag};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("cp-set {{{set}}} is not closed under duals")]
    NonPairedSet { set: String },
    #[error("world index {index} is out of range")]
    UnknownWorld { index: usize },
}

/// Semantics variants for the cp-clause.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    /// Spheres from the updated system, operands evaluated in the model
    /// before the update (updates never compound).
    A,
    /// Operands evaluated in the updated model (the default semantics).
    B,
    /// The update replaces the sphere system of every world at once.
    C,
}

/// One step of an evaluation trace.
#[derive(Clone, Debug)]
pub struct TraceStep {
    pub world: String,
    pub formula: String,
    /// 0 is the input model; each update bumps the generation.
    pub generation: u64,
    /// Chain inspected by a modal clause, if any.
    pub spheres: Vec<String>,
    pub verdict: bool,
    pub children: Vec<TraceStep>,
}

impl TraceStep {
    fn render(&self, depth: usize, out: &mut String) {
        out.push_str(&"  ".repeat(depth));
        out.push_str(&format!(
            "[gen {}] {} ⊨ {} : {}",
            self.generation, self.world, self.formula, self.verdict
        ));
        if !self.spheres.is_empty() {
            out.push_str(&format!("  spheres {}", self.spheres.join(" ")));
        }
        out.push('\n');
        for c in &self.children {
            c.render(depth + 1, out);
        }
    }
}

#[derive(Clone, Debug)]
pub struct EvalTrace {
    pub root: TraceStep,
}

impl std::fmt::Display for EvalTrace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut out = String::new();
        self.root.render(0, &mut out);
        write!(f, "{out}")
    }
}

struct Ctx {
    tag: UpdateTag,
    variant: Variant,
    record: bool,
    next_gen: u64,
}

impl Ctx {
    #[allow(clippy::too_many_arguments)]
    fn step(
        &self,
        m: &SphereModel,
        gen: u64,
        x: World,
        f: &Formula,
        verdict: bool,
        spheres: Vec<String>,
        children: Vec<TraceStep>,
    ) -> Option<TraceStep> {
        self.record.then(|| TraceStep {
            world: m.name(x).to_string(),
            formula: f.to_string(),
            generation: gen,
            spheres,
            verdict,
            children,
        })
    }
}

/// Satisfaction under the default semantics (variant b).
pub fn sat(m: &SphereModel, x: World, f: &Formula, u: UpdateTag) -> Result<bool, EvalError> {
    let mut ctx = Ctx { tag: u, variant: Variant::B, record: false, next_gen: 1 };
    Ok(go(&mut ctx, m, 0, x, f)?.0)
}

/// Satisfaction plus a full step trace.
pub fn sat_traced(
    m: &SphereModel,
    x: World,
    f: &Formula,
    u: UpdateTag,
) -> Result<(bool, EvalTrace), EvalError> {
    let mut ctx = Ctx { tag: u, variant: Variant::B, record: true, next_gen: 1 };
    let (v, step) = go(&mut ctx, m, 0, x, f)?;
    Ok((v, EvalTrace { root: step.expect("trace recording is on") }))
}

/// Satisfaction under a chosen cp-clause variant.
pub fn sat_variant(
    m: &SphereModel,
    x: World,
    f: &Formula,
    u: UpdateTag,
    variant: Variant,
) -> Result<bool, EvalError> {
    let mut ctx = Ctx { tag: u, variant, record: false, next_gen: 1 };
    Ok(go(&mut ctx, m, 0, x, f)?.0)
}

/// True when every world of the model satisfies the formula.
pub fn valid_in_model(m: &SphereModel, f: &Formula, u: UpdateTag) -> Result<bool, EvalError> {
    for x in m.worlds() {
        if !sat(m, x, f, u)? {
            return Ok(false);
        }
    }
    Ok(true)
}

fn go(
    ctx: &mut Ctx,
    m: &SphereModel,
    gen: u64,
    x: World,
    f: &Formula,
) -> Result<(bool, Option<TraceStep>), EvalError> {
    if x.0 >= m.world_count() {
        return Err(EvalError::UnknownWorld { index: x.0 });
    }
    match f {
        Formula::Atom(name) => {
            let v = m.atom_extension(name).contains(x);
            Ok((v, ctx.step(m, gen, x, f, v, vec![], vec![])))
        }
        Formula::Falsum => Ok((false, ctx.step(m, gen, x, f, false, vec![], vec![]))),
        Formula::Implies(lhs, rhs) => {
            let (lv, lt) = go(ctx, m, gen, x, lhs)?;
            if !lv {
                let children = lt.into_iter().collect();
                return Ok((true, ctx.step(m, gen, x, f, true, vec![], children)));
            }
            let (rv, rt) = go(ctx, m, gen, x, rhs)?;
            let children = lt.into_iter().chain(rt).collect();
            Ok((rv, ctx.step(m, gen, x, f, rv, vec![], children)))
        }
        Formula::CpCounterfactual(a, g, b) => modal(ctx, m, gen, x, f, a, g, b, true),
        Formula::CpPlausibility(a, g, b) => modal(ctx, m, gen, x, f, a, g, b, false),
    }
}

#[allow(clippy::too_many_arguments)]
fn modal(
    ctx: &mut Ctx,
    m: &SphereModel,
    gen: u64,
    x: World,
    f: &Formula,
    a: &Formula,
    g: &CpSet,
    b: &Formula,
    counterfactual: bool,
) -> Result<(bool, Option<TraceStep>), EvalError> {
    if g.is_empty() {
        // Plain Lewis clause in the current model.
        let (v, children) = if counterfactual {
            lewis_cf(ctx, m, m, gen, x, a, b)?
        } else {
            lewis_pl(ctx, m, m, gen, x, a, b)?
        };
        let spheres = sphere_names(ctx, m, x);
        return Ok((v, ctx.step(m, gen, x, f, v, spheres, children)));
    }
    if !g.is_paired() {
        return Err(EvalError::NonPairedSet { set: g.to_string() });
    }
    let updated = match ctx.variant {
        Variant::A | Variant::B => update(m, x, g, ctx.tag)?,
        Variant::C => {
            let mut out = m.clone();
            for y in m.worlds() {
                out.systems[y.0] = update(m, y, g, ctx.tag)?.systems[y.0].clone();
            }
            out
        }
    };
    let new_gen = ctx.next_gen;
    ctx.next_gen += 1;
    // Variant a takes spheres from the updated system but keeps judging
    // the operands in the pre-update model.
    let operand_model = match ctx.variant {
        Variant::A => m,
        Variant::B | Variant::C => &updated,
    };
    let (v, children) = if counterfactual {
        lewis_cf(ctx, &updated, operand_model, new_gen, x, a, b)?
    } else {
        lewis_pl(ctx, &updated, operand_model, new_gen, x, a, b)?
    };
    let spheres = sphere_names(ctx, &updated, x);
    Ok((v, ctx.step(operand_model, new_gen, x, f, v, spheres, children)))
}

fn sphere_names(ctx: &Ctx, m: &SphereModel, x: World) -> Vec<String> {
    if ctx.record {
        m.system(x).spheres.iter().map(|s| m.format_worlds(*s)).collect()
    } else {
        vec![]
    }
}

/// A □→ B: vacuously true when no sphere holds an A-world; otherwise some
/// sphere must contain an A-world and satisfy A → B throughout.
fn lewis_cf(
    ctx: &mut Ctx,
    sphere_model: &SphereModel,
    operand_model: &SphereModel,
    gen: u64,
    x: World,
    a: &Formula,
    b: &Formula,
) -> Result<(bool, Vec<TraceStep>), EvalError> {
    let mut children = Vec::new();
    let mut seen_a = false;
    for &sphere in &sphere_model.system(x).spheres {
        let mut has_a = false;
        let mut all_ab = true;
        for y in sphere.iter() {
            let (av, at) = go(ctx, operand_model, gen, y, a)?;
            children.extend(at);
            if av {
                has_a = true;
                let (bv, bt) = go(ctx, operand_model, gen, y, b)?;
                children.extend(bt);
                if !bv {
                    all_ab = false;
                }
            }
        }
        if has_a {
            seen_a = true;
            if all_ab {
                return Ok((true, children));
            }
        }
    }
    Ok((!seen_a, children))
}

/// A ≼ B: every sphere containing a B-world contains an A-world.
fn lewis_pl(
    ctx: &mut Ctx,
    sphere_model: &SphereModel,
    operand_model: &SphereModel,
    gen: u64,
    x: World,
    a: &Formula,
    b: &Formula,
) -> Result<(bool, Vec<TraceStep>), EvalError> {
    let mut children = Vec::new();
    for &sphere in &sphere_model.system(x).spheres {
        let mut has_b = false;
        let mut has_a = false;
        for y in sphere.iter() {
            let (bv, bt) = go(ctx, operand_model, gen, y, b)?;
            children.extend(bt);
            if bv {
                has_b = true;
            }
            let (av, at) = go(ctx, operand_model, gen, y, a)?;
            children.extend(at);
            if av {
                has_a = true;
            }
        }
        if has_b && !has_a {
            return Ok((false, children));
        }
        // By nesting, once a sphere holds an A-world every larger one does.
        if has_a {
            return Ok((true, children));
        }
    }
    Ok((true, children))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::formula::parse;

    const D: UpdateTag = UpdateTag::Disagreement;
    const I: UpdateTag = UpdateTag::Implausibility;
    const A: UpdateTag = UpdateTag::Agreement;

    fn check(m: &SphereModel, world: &str, src: &str, u: UpdateTag) -> bool {
        let x = m.world_named(world).unwrap();
        sat(m, x, &parse(src).unwrap(), u).unwrap()
    }

    #[test]
    fn base_counterfactual_is_false_without_cp_set() {
        let m = fixtures::nixon();
        assert!(!check(&m, "x", "p =>[] h", D));
    }

    #[test]
    fn fault_pairs_flip_the_verdict() {
        let m = fixtures::nixon();
        assert!(check(&m, "x", "p =>[e1, e2, ~e1, ~e2] h", D));
        assert!(!check(&m, "x", "p =>[e1, e2, l, ~e1, ~e2, ~l] h", D));
    }

    #[test]
    fn vacuous_counterfactual_is_true() {
        let m = fixtures::nixon();
        for g in ["", "e1, ~e1"] {
            let src = format!("false =>[{g}] h");
            assert!(check(&m, "x", &src, D));
        }
    }

    #[test]
    fn boolean_clauses() {
        let m = fixtures::nixon();
        assert!(check(&m, "v1", "p & e1", D));
        assert!(!check(&m, "x", "p | e1", D));
        assert!(check(&m, "x", "~p", D));
        assert!(check(&m, "x", "p -> h", D));
        assert!(check(&m, "x", "true", D));
        assert!(!check(&m, "x", "false", D));
    }

    #[test]
    fn plausibility_clause() {
        let m = fixtures::nixon();
        // e-worlds sit closer to x than h-worlds.
        assert!(check(&m, "x", "e1 <=[] h", D));
        assert!(!check(&m, "x", "h <=[] e1", D));
        // Comparative plausibility with the fault pairs removed: after the
        // update h-worlds move inward.
        assert!(check(&m, "x", "h <=[e1, e2, ~e1, ~e2] e1", D));
    }

    #[test]
    fn non_paired_set_is_rejected_with_the_set_named() {
        let m = fixtures::nixon();
        let x = m.world_named("x").unwrap();
        let f = parse("p =>[e1, e2, l] h").unwrap();
        let err = sat(&m, x, &f, D).unwrap_err();
        assert_eq!(err, EvalError::NonPairedSet { set: "e1, e2, l".into() });
    }

    #[test]
    fn unknown_world_is_rejected() {
        let m = fixtures::nixon();
        let err = sat(&m, World(99), &parse("p").unwrap(), D).unwrap_err();
        assert_eq!(err, EvalError::UnknownWorld { index: 99 });
    }

    #[test]
    fn weak_fixture_separates_implausibility_from_disagreement() {
        let m = fixtures::nixon_weak();
        assert!(!check(&m, "x", "p =>[e1, ~e1] h", D));
        assert!(check(&m, "x", "p =>[e1, ~e1] h", I));
        assert_eq!(
            check(&m, "x", "p =>[e1, ~e1] h", A),
            check(&m, "x", "p =>[e1, ~e1] h", D)
        );
    }

    #[test]
    fn variants_agree_without_cp_sets() {
        let m = fixtures::nixon();
        let x = m.world_named("x").unwrap();
        for src in ["p =>[] h", "e1 <=[] h", "p -> (e1 <=[] p)"] {
            let f = parse(src).unwrap();
            let b = sat(&m, x, &f, D).unwrap();
            for v in [Variant::A, Variant::C] {
                assert_eq!(sat_variant(&m, x, &f, D, v).unwrap(), b, "{src}");
            }
        }
    }

    #[test]
    fn variants_a_and_b_agree_on_flat_cp_formulas() {
        let m = fixtures::nixon();
        for world in ["x", "v1", "y1"] {
            let x = m.world_named(world).unwrap();
            for src in [
                "p =>[e1, e2, ~e1, ~e2] h",
                "p =>[l, ~l] ~h",
                "h <=[e1, ~e1] e1",
            ] {
                let f = parse(src).unwrap();
                assert_eq!(
                    sat_variant(&m, x, &f, D, Variant::A).unwrap(),
                    sat(&m, x, &f, D).unwrap(),
                    "{world} {src}"
                );
            }
        }
    }

    #[test]
    fn validity_in_model() {
        let m = fixtures::nixon();
        assert!(valid_in_model(&m, &Formula::top(), D).unwrap());
        assert!(valid_in_model(&m, &parse("(p <=[] h) | (h <=[] p)").unwrap(), D).unwrap());
        assert!(!valid_in_model(&m, &parse("p").unwrap(), D).unwrap());
    }

    #[test]
    fn trace_records_updates() {
        let m = fixtures::nixon();
        let x = m.world_named("x").unwrap();
        let f = parse("p =>[e1, e2, ~e1, ~e2] h").unwrap();
        let (v, trace) = sat_traced(&m, x, &f, D).unwrap();
        assert!(v);
        assert_eq!(trace.root.generation, 1);
        assert!(trace.root.spheres.contains(&"{x y1}".to_string()));
        assert!(!trace.root.children.is_empty());
        let rendered = trace.to_string();
        assert!(rendered.contains("gen 1"));
    }

    #[test]
    fn interdefinability_on_fixture() {
        let m = fixtures::nixon();
        for world in ["x", "v1", "y2"] {
            let x = m.world_named(world).unwrap();
            for src in [
                "p =>[e1, e2, ~e1, ~e2] h",
                "p =>[] h",
                "h <=[e1, ~e1] e1",
                "e1 <=[] h",
            ] {
                let f = parse(src).unwrap();
                for u in UpdateTag::ALL {
                    let base = sat(&m, x, &f, u).unwrap();
                    assert_eq!(sat(&m, x, &f.rewrite_cf_to_pl(), u).unwrap(), base);
                    assert_eq!(sat(&m, x, &f.rewrite_pl_to_cf(), u).unwrap(), base);
                }
            }
        }
    }
}
