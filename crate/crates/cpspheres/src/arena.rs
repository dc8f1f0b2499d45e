//! Rival ceteris paribus semantics and their head-to-head comparison:
//! strict evaluation (CP), naive counting (NC), maximal supersets (MS)
//! and the weight-based disagreement update (DIS), plus the order
//! properties separating the weight comparator from the counting ones.

use std::cmp::Ordering;
use std::fmt::Write as _;

use crate::cpsets::profile;
use crate::eval::{self, EvalError};
use crate::formula::{CpSet, Formula};
use crate::model::{Centering, SphereModel, SphereSystem, World, WorldSet};
use crate::update::{update, UpdateTag};
use crate::weights::{cmp_lex, weight_of_set};

/// Member and operand satisfaction inside this module is static, so the
/// tag never reaches an update; disagreement is the house default.
const TAG: UpdateTag = UpdateTag::Disagreement;

/// Strict evaluation: candidates are the worlds agreeing with `x` on all
/// of `g`, and the counterfactual is Lewis-evaluated over them on the
/// original chain. Vacuously true when no candidate satisfies `a`.
pub fn eval_strict(
    m: &SphereModel,
    x: World,
    a: &Formula,
    b: &Formula,
    g: &CpSet,
) -> Result<bool, EvalError> {
    let sys = m.system(x);
    let mut candidates = WorldSet::EMPTY;
    for y in sys.universe().iter() {
        if profile(m, x, y, g, TAG)?.disagreement.is_empty() {
            candidates.insert(y);
        }
    }
    lewis_cf_on_chain(m, &sys.spheres, a, b, candidates)
}

/// Naive counting: worlds ranked by the cardinality of their agreement
/// set, descending, ties broken by the original sphere rank; the
/// counterfactual is Lewis-evaluated on the induced chain.
pub fn eval_naive_counting(
    m: &SphereModel,
    x: World,
    a: &Formula,
    b: &Formula,
    g: &CpSet,
) -> Result<bool, EvalError> {
    let chain = counting_chain(m, x, g)?;
    lewis_cf_on_chain(m, &chain, a, b, WorldSet::full(m.world_count()))
}

fn counting_chain(m: &SphereModel, x: World, g: &CpSet) -> Result<Vec<WorldSet>, EvalError> {
    let sys = m.system(x);
    let mut rows: Vec<(usize, usize, World)> = Vec::new();
    for y in sys.universe().iter() {
        let agreement = profile(m, x, y, g, TAG)?.agreement.len();
        rows.push((agreement, sys.rank_of(y).expect("y is reachable"), y));
    }
    rows.sort_by(|p, q| q.0.cmp(&p.0).then(p.1.cmp(&q.1)));
    let mut chain = Vec::with_capacity(rows.len());
    let mut cur = WorldSet::EMPTY;
    for (i, (agr, rank, y)) in rows.iter().enumerate() {
        cur.insert(*y);
        let boundary = rows
            .get(i + 1)
            .is_none_or(|(na, nr, _)| (na, nr) != (agr, rank));
        if boundary {
            chain.push(cur);
        }
    }
    Ok(chain)
}

/// Maximal supersets: y is at least as close as v when v's agreement set
/// is contained in y's. Equal agreement sets fall back to the original
/// sphere rank, so the empty set induces a total order matching the
/// spheres; incomparable agreement sets leave the worlds incomparable.
/// The counterfactual uses the general preferential clause: every a-world
/// w sees an a-world v at least as close whose a-predecessors all
/// satisfy b.
pub fn eval_maximal_supersets(
    m: &SphereModel,
    x: World,
    a: &Formula,
    b: &Formula,
    g: &CpSet,
) -> Result<bool, EvalError> {
    let sys = m.system(x);
    let universe: Vec<World> = sys.universe().iter().collect();
    let mut agreements = Vec::with_capacity(universe.len());
    for &y in &universe {
        agreements.push(profile(m, x, y, g, TAG)?.agreement);
    }
    let rank = |y: World| sys.rank_of(y).expect("y is reachable");
    let leq = |yi: usize, vi: usize| {
        let (ay, av) = (&agreements[yi], &agreements[vi]);
        (av.is_subset(ay) && ay != av)
            || (ay == av && rank(universe[yi]) <= rank(universe[vi]))
    };
    let mut a_worlds = Vec::new();
    for (i, &y) in universe.iter().enumerate() {
        if eval::sat(m, y, a, TAG)? {
            a_worlds.push(i);
        }
    }
    for &wi in &a_worlds {
        let mut witnessed = false;
        'v: for &vi in &a_worlds {
            if !leq(vi, wi) {
                continue;
            }
            for &zi in &a_worlds {
                if leq(zi, vi) && !eval::sat(m, universe[zi], b, TAG)? {
                    continue 'v;
                }
            }
            witnessed = true;
            break;
        }
        if !witnessed {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Disagreement-update verdict. Paired sets go through the dynamic
/// evaluator; non-paired sets are run mechanically through the update so
/// that the contradictory verdicts they produce can be exhibited.
pub fn eval_disagreement(
    m: &SphereModel,
    x: World,
    a: &Formula,
    b: &Formula,
    g: &CpSet,
) -> Result<bool, EvalError> {
    if g.is_empty() || g.is_paired() {
        eval::sat(m, x, &Formula::cf(a.clone(), g.clone(), b.clone()), TAG)
    } else {
        let updated = update(m, x, g, TAG)?;
        eval::sat(&updated, x, &Formula::lewis_cf(a.clone(), b.clone()), TAG)
    }
}

/// Lewis counterfactual over an explicit chain, restricted to candidate
/// worlds: the smallest sphere holding a candidate a-world decides.
fn lewis_cf_on_chain(
    m: &SphereModel,
    chain: &[WorldSet],
    a: &Formula,
    b: &Formula,
    candidates: WorldSet,
) -> Result<bool, EvalError> {
    let mut ma = WorldSet::EMPTY;
    let mut mb = WorldSet::EMPTY;
    for y in candidates.iter() {
        if eval::sat(m, y, a, TAG)? {
            ma.insert(y);
        }
        if eval::sat(m, y, b, TAG)? {
            mb.insert(y);
        }
    }
    for &s in chain {
        let a_here = s.intersection(ma);
        if !a_here.is_empty() {
            return Ok(a_here.is_subset(mb));
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComparisonRow {
    pub counterfactual: String,
    pub clause: String,
    pub cp: bool,
    pub nc: bool,
    pub ms: bool,
    pub dis: bool,
}

/// Verdicts of all four methods for each (antecedent, set, consequent)
/// row.
pub fn comparison_table(
    m: &SphereModel,
    x: World,
    rows: &[(Formula, CpSet, Formula)],
) -> Result<Vec<ComparisonRow>, EvalError> {
    rows.iter()
        .map(|(a, g, b)| {
            Ok(ComparisonRow {
                counterfactual: Formula::cf(a.clone(), g.clone(), b.clone()).to_string(),
                clause: g.to_string(),
                cp: eval_strict(m, x, a, b, g)?,
                nc: eval_naive_counting(m, x, a, b, g)?,
                ms: eval_maximal_supersets(m, x, a, b, g)?,
                dis: eval_disagreement(m, x, a, b, g)?,
            })
        })
        .collect()
}

pub fn render_table(rows: &[ComparisonRow]) -> String {
    let mut out = String::new();
    let width = rows
        .iter()
        .map(|r| r.counterfactual.len())
        .max()
        .unwrap_or(14)
        .max(14);
    let _ = writeln!(out, "{:width$}  CP     NC     MS     DIS", "counterfactual");
    for r in rows {
        let _ = writeln!(
            out,
            "{:width$}  {:<5}  {:<5}  {:<5}  {:<5}",
            r.counterfactual, r.cp, r.nc, r.ms, r.dis
        );
    }
    out
}

/// Model with a dual companion for every world reachable from `x`: the
/// companion flips every atom, sits in exactly the spheres of its
/// original, and exists only to flatten formula weights. The result is
/// weakly centered because `x` shares its innermost sphere with its
/// companion.
pub fn dual_world_augmentation(m: &SphereModel, x: World) -> SphereModel {
    let n = m.world_count();
    let names: Vec<String> = m
        .names
        .iter()
        .cloned()
        .chain(m.names.iter().map(|s| format!("{s}_bar")))
        .collect();
    let full = WorldSet::full(n);
    let valuation = m
        .valuation
        .iter()
        .map(|(atom, &ext)| {
            let dual_ext = WorldSet(full.difference(ext).0 << n);
            (atom.clone(), ext.union(dual_ext))
        })
        .collect();
    let systems: Vec<SphereSystem> = (0..2 * n)
        .map(|w| {
            if w == x.0 {
                let spheres = m
                    .system(x)
                    .spheres
                    .iter()
                    .map(|&s| s.union(WorldSet(s.0 << n)))
                    .collect();
                SphereSystem::new(spheres)
            } else if w < n {
                m.systems[w].clone()
            } else {
                SphereSystem::new(vec![WorldSet::singleton(World(w))])
            }
        })
        .collect();
    SphereModel { names, valuation, systems, centering: Centering::Weak }
}

#[derive(Clone, Debug, Default)]
pub struct DemoReport {
    pub checks: usize,
    pub mismatches: Vec<String>,
}

impl DemoReport {
    pub fn agreed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Runs the agreement update on the dual-world augmentation, drops the
/// companions from the resulting chain, and compares the verdicts with
/// naive counting on the original model over literal operand pairs. The
/// subsumption is prose, not a numbered result, so divergences are
/// reported rather than asserted.
pub fn nc_as_agreement_demo(
    m: &SphereModel,
    x: World,
    g: &CpSet,
) -> Result<DemoReport, EvalError> {
    let n = m.world_count();
    let augmented = dual_world_augmentation(m, x);
    let chain: Vec<WorldSet> = if g.is_empty() {
        m.system(x).spheres.clone()
    } else {
        update(&augmented, x, g, UpdateTag::Agreement)?.systems[x.0]
            .spheres
            .iter()
            .map(|s| s.intersection(WorldSet::full(n)))
            .filter(|s| !s.is_empty())
            .collect::<Vec<_>>()
    };
    let chain = SphereSystem::new(chain).collapsed().spheres;

    let mut pool: Vec<Formula> = Vec::new();
    for atom in m.valuation.keys() {
        pool.push(Formula::atom(atom));
        pool.push(Formula::not(Formula::atom(atom)));
    }
    let mut report = DemoReport::default();
    for a in &pool {
        for b in &pool {
            let via_agreement =
                lewis_cf_on_chain(m, &chain, a, b, WorldSet::full(n))?;
            let via_counting = eval_naive_counting(m, x, a, b, g)?;
            report.checks += 1;
            if via_agreement != via_counting {
                report.mismatches.push(format!(
                    "{a} =>[{g}] {b} at {}: agreement-on-duals {via_agreement}, naive counting {via_counting}",
                    m.name(x)
                ));
            }
        }
    }
    Ok(report)
}

#[derive(Clone, Debug)]
pub struct OrderPropertyReport {
    pub pairs: usize,
    /// Increment for the cardinality comparator (naive counting).
    pub increment_counting_holds: bool,
    /// Increment for the superset comparator (maximal supersets).
    pub increment_supersets_holds: bool,
    /// Increment for the weight comparator read in agreement polarity.
    pub increment_agreement_holds: bool,
    /// First pair where Increment fails in disagreement polarity.
    pub increment_disagreement_counterexample: Option<String>,
    /// Γ ⊆ Δ implies w(Γ) precedes w(Δ), the dual of Increment.
    pub monotonicity_holds: bool,
    /// Swapping a member for a logical equivalent keeps the weight.
    pub equivalence_holds: bool,
}

/// Exhaustively checks the Increment and Equivalence conditions over all
/// subset pairs of literal sets at `x`. Increment holds for the counting
/// and superset comparators and for the weight comparator read in
/// agreement polarity; in disagreement polarity the dual (monotonicity)
/// holds instead and Increment fails whenever a subset is strictly
/// lighter.
pub fn order_properties(m: &SphereModel, x: World) -> Result<OrderPropertyReport, EvalError> {
    let mut pool: Vec<Formula> = Vec::new();
    for atom in m.valuation.keys().take(3) {
        pool.push(Formula::atom(atom));
        pool.push(Formula::not(Formula::atom(atom)));
    }
    let subsets: Vec<CpSet> = (0u32..(1 << pool.len()))
        .map(|bits| {
            CpSet::new(
                pool.iter()
                    .enumerate()
                    .filter(|(i, _)| bits & (1 << i) != 0)
                    .map(|(_, f)| f.clone()),
            )
        })
        .collect();
    let mut report = OrderPropertyReport {
        pairs: 0,
        increment_counting_holds: true,
        increment_supersets_holds: true,
        increment_agreement_holds: true,
        increment_disagreement_counterexample: None,
        monotonicity_holds: true,
        equivalence_holds: true,
    };
    for small in &subsets {
        for large in &subsets {
            if !small.is_subset(large) {
                continue;
            }
            report.pairs += 1;
            report.increment_counting_holds &= large.len() >= small.len();
            report.increment_supersets_holds &= small.is_subset(large);
            let ws = weight_of_set(m, x, small, TAG)?;
            let wl = weight_of_set(m, x, large, TAG)?;
            let cmp = cmp_lex(&ws, &wl);
            report.monotonicity_holds &= cmp != Ordering::Greater;
            // Agreement polarity: heavier means closer, so the superset
            // is at least as prioritized.
            report.increment_agreement_holds &= cmp != Ordering::Greater;
            // Disagreement polarity: lighter means closer, so a strictly
            // heavier superset breaks Increment.
            if cmp == Ordering::Less && report.increment_disagreement_counterexample.is_none() {
                report.increment_disagreement_counterexample =
                    Some(format!("[{small}] strictly precedes [{large}]"));
            }
        }
    }
    for f in &pool {
        let g = CpSet::new([f.clone(), f.dual()]);
        let replaced = CpSet::new([Formula::not(Formula::not(f.clone())), f.dual()]);
        let wg = weight_of_set(m, x, &g, TAG)?;
        let wr = weight_of_set(m, x, &replaced, TAG)?;
        report.equivalence_holds &=
            cmp_lex(&wg, &wr) == Ordering::Equal && cmp_lex(&wr, &wg) == Ordering::Equal;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::formula::parse_cp_set;

    fn atom(s: &str) -> Formula {
        Formula::atom(s)
    }

    #[test]
    fn comparison_grid_on_launch_model() {
        let m = fixtures::nixon();
        let x = m.world_named("x").unwrap();
        let g = parse_cp_set("e1, e2, ~e1, ~e2").unwrap();
        let g_prime = parse_cp_set("e1, e2, ~e1, ~e2, l, ~l").unwrap();
        let rows = vec![
            (atom("p"), g.clone(), atom("h")),
            (atom("p"), g_prime.clone(), atom("h")),
            (atom("p"), g, Formula::not(atom("h"))),
            (atom("p"), g_prime, Formula::not(atom("h"))),
        ];
        let table = comparison_table(&m, x, &rows).unwrap();
        let grid: Vec<[bool; 4]> = table.iter().map(|r| [r.cp, r.nc, r.ms, r.dis]).collect();
        assert_eq!(
            grid,
            vec![
                [true, true, true, true],
                [true, true, false, false],
                [false, false, false, false],
                [true, false, false, true],
            ]
        );
    }

    #[test]
    fn non_paired_sets_give_contradictory_verdicts() {
        let m = fixtures::nixon();
        let x = m.world_named("x").unwrap();
        let delta = parse_cp_set("e1, e2, l").unwrap();
        let delta_bar = parse_cp_set("~e1, ~e2, ~l").unwrap();
        assert!(!eval_disagreement(&m, x, &atom("p"), &atom("h"), &delta).unwrap());
        assert!(eval_disagreement(&m, x, &atom("p"), &atom("h"), &delta_bar).unwrap());
    }

    #[test]
    fn strict_is_vacuous_when_nothing_agrees_everywhere() {
        let m = fixtures::nixon();
        let x = m.world_named("x").unwrap();
        let g_prime = parse_cp_set("e1, e2, ~e1, ~e2, l, ~l").unwrap();
        assert!(eval_strict(&m, x, &atom("p"), &atom("h"), &g_prime).unwrap());
        assert!(eval_strict(&m, x, &atom("p"), &Formula::not(atom("h")), &g_prime).unwrap());
    }

    #[test]
    fn all_methods_match_lewis_on_empty_set() {
        let m = fixtures::nixon();
        let empty = CpSet::empty();
        let operands = [atom("p"), atom("h"), atom("e1"), Formula::not(atom("l"))];
        for world in ["x", "v1", "y2"] {
            let x = m.world_named(world).unwrap();
            for a in &operands {
                for b in &operands {
                    let lewis = eval::sat(
                        &m,
                        x,
                        &Formula::lewis_cf(a.clone(), b.clone()),
                        UpdateTag::Disagreement,
                    )
                    .unwrap();
                    assert_eq!(eval_strict(&m, x, a, b, &empty).unwrap(), lewis);
                    assert_eq!(eval_naive_counting(&m, x, a, b, &empty).unwrap(), lewis);
                    assert_eq!(eval_maximal_supersets(&m, x, a, b, &empty).unwrap(), lewis);
                    assert_eq!(eval_disagreement(&m, x, a, b, &empty).unwrap(), lewis);
                }
            }
        }
    }

    #[test]
    fn empty_row_list_gives_empty_table() {
        let m = fixtures::nixon();
        let x = m.world_named("x").unwrap();
        assert!(comparison_table(&m, x, &[]).unwrap().is_empty());
    }

    #[test]
    fn augmentation_flattens_literal_weights() {
        use crate::weights::{cmp_xel, weight_of_formula};
        let m = fixtures::nixon();
        let x = m.world_named("x").unwrap();
        let augmented = dual_world_augmentation(&m, x);
        assert!(augmented.validate().is_ok());
        let literals = [atom("e1"), Formula::not(atom("e1")), atom("l"), atom("h")];
        let w0 = weight_of_formula(&augmented, x, &literals[0], TAG).unwrap();
        for f in &literals[1..] {
            let w = weight_of_formula(&augmented, x, f, TAG).unwrap();
            assert_eq!(cmp_xel(&w0, &w), Ordering::Equal, "{f}");
        }
    }

    #[test]
    fn counting_matches_agreement_on_duals() {
        let m = fixtures::nixon();
        let x = m.world_named("x").unwrap();
        for src in ["", "e1, ~e1", "e1, e2, ~e1, ~e2", "e1, e2, ~e1, ~e2, l, ~l"] {
            let g = parse_cp_set(src).unwrap();
            let report = nc_as_agreement_demo(&m, x, &g).unwrap();
            assert!(report.checks > 0);
            assert!(report.agreed(), "{:?}", report.mismatches.first());
        }
    }

    #[test]
    fn order_properties_separate_the_comparators() {
        let m = fixtures::nixon();
        let x = m.world_named("x").unwrap();
        let report = order_properties(&m, x).unwrap();
        assert!(report.pairs > 100);
        assert!(report.increment_counting_holds);
        assert!(report.increment_supersets_holds);
        assert!(report.increment_agreement_holds);
        assert!(report.monotonicity_holds);
        assert!(report.equivalence_holds);
        assert!(report.increment_disagreement_counterexample.is_some());
    }
}
