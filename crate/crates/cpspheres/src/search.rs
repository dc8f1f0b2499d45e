//! Bounded model enumeration and brute-force sweeps: axiom validity,
//! countermodel search and the differential checks behind the general
//! equivalence statements (agreement vs disagreement, implausibility vs
//! disagreement on centered models, maximal-set equivalence, weight
//! propositions, translation equisatisfiability, update preservation).
//!
//! The hot loops evaluate corpus formulas through per-world satisfaction
//! bitmasks. Updated chains always come from [`crate::update::update`] and
//! the masks are differentially spot-checked against [`crate::eval::sat`],
//! so the fast path cannot silently drift from the reference semantics.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::collections::HashMap;
use std::rc::Rc;

use thiserror::Error;

use crate::cpsets::{self, TieRule};
use crate::eval::{self, EvalError};
use crate::formula::{CpSet, Formula};
use crate::model::{save_model, Centering, SphereModel, SphereSystem, World, WorldSet};
use crate::translate;
use crate::update::{update, UpdateTag};
use crate::weights::{cmp_lex, cmp_xel, FormulaWeight, SetWeight};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SearchError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("enumeration would yield {count} models, over the cap of {cap}")]
    CapExceeded { count: u128, cap: u128 },
}

#[derive(Clone, Debug)]
pub struct EnumerationBounds {
    pub max_worlds: usize,
    pub atoms: Vec<String>,
    pub centering: Centering,
    pub max_spheres: usize,
    /// Guard against accidentally huge enumerations.
    pub cap: u128,
}

impl EnumerationBounds {
    pub fn new(max_worlds: usize, atoms: &[&str], centering: Centering) -> Self {
        EnumerationBounds {
            max_worlds,
            atoms: atoms.iter().map(|s| s.to_string()).collect(),
            centering,
            max_spheres: max_worlds,
            cap: 1 << 24,
        }
    }
}

/// All strictly increasing sphere chains around world 0..n centered at
/// `center`, respecting the centering tag and the length bound.
fn chains_around(
    n: usize,
    center: World,
    centering: Centering,
    max_spheres: usize,
) -> Vec<Vec<WorldSet>> {
    let full = WorldSet::full(n);
    let mut out = Vec::new();
    let starts: Vec<WorldSet> = match centering {
        Centering::Centered => vec![WorldSet::singleton(center)],
        Centering::Weak => subsets_of(full.difference(WorldSet::singleton(center)))
            .into_iter()
            .map(|s| s.union(WorldSet::singleton(center)))
            .collect(),
    };
    for start in starts {
        extend_chain(&mut vec![start], full, max_spheres, &mut out);
    }
    out.sort();
    out
}

fn extend_chain(
    chain: &mut Vec<WorldSet>,
    full: WorldSet,
    max_spheres: usize,
    out: &mut Vec<Vec<WorldSet>>,
) {
    out.push(chain.clone());
    if chain.len() == max_spheres {
        return;
    }
    let top = *chain.last().expect("chain is non-empty");
    for add in subsets_of(full.difference(top)) {
        if add.is_empty() {
            continue;
        }
        chain.push(top.union(add));
        extend_chain(chain, full, max_spheres, out);
        chain.pop();
    }
}

fn subsets_of(set: WorldSet) -> Vec<WorldSet> {
    let mut out = vec![WorldSet::EMPTY];
    for w in set.iter() {
        let bit = WorldSet::singleton(w);
        for i in 0..out.len() {
            out.push(out[i].union(bit));
        }
    }
    out.sort();
    out
}

/// Number of models the bounds describe.
pub fn model_count(b: &EnumerationBounds) -> u128 {
    let mut total: u128 = 0;
    for n in 1..=b.max_worlds {
        let valuations = 1u128 << (n * b.atoms.len());
        let mut per_model: u128 = 1;
        for w in 0..n {
            per_model =
                per_model.saturating_mul(chains_around(n, World(w), b.centering, b.max_spheres).len() as u128);
        }
        total = total.saturating_add(valuations.saturating_mul(per_model));
    }
    total
}

/// Visits every model within bounds in a deterministic order. Returns how
/// many models were visited.
pub fn for_each_model<F>(b: &EnumerationBounds, mut visit: F) -> Result<usize, SearchError>
where
    F: FnMut(&SphereModel),
{
    let count = model_count(b);
    if count > b.cap {
        return Err(SearchError::CapExceeded { count, cap: b.cap });
    }
    let mut seen = 0;
    for n in 1..=b.max_worlds {
        let names: Vec<String> = (0..n).map(|i| format!("w{i}")).collect();
        let per_world: Vec<Vec<Vec<WorldSet>>> = (0..n)
            .map(|w| chains_around(n, World(w), b.centering, b.max_spheres))
            .collect();
        let mut chain_idx = vec![0usize; n];
        loop {
            let systems: Vec<SphereSystem> = (0..n)
                .map(|w| SphereSystem::new(per_world[w][chain_idx[w]].clone()))
                .collect();
            for val_bits in 0u64..(1 << (n * b.atoms.len())) {
                let mut valuation = std::collections::BTreeMap::new();
                for (ai, atom) in b.atoms.iter().enumerate() {
                    let ext = (val_bits >> (ai * n)) & ((1 << n) - 1);
                    valuation.insert(atom.clone(), WorldSet(ext));
                }
                let m = SphereModel {
                    names: names.clone(),
                    valuation,
                    systems: systems.clone(),
                    centering: b.centering,
                };
                debug_assert!(m.validate().is_ok());
                visit(&m);
                seen += 1;
            }
            // Advance the mixed-radix chain selector.
            let mut pos = 0;
            loop {
                if pos == n {
                    break;
                }
                chain_idx[pos] += 1;
                if chain_idx[pos] < per_world[pos].len() {
                    break;
                }
                chain_idx[pos] = 0;
                pos += 1;
            }
            if pos == n {
                break;
            }
        }
    }
    Ok(seen)
}

/// Materialized enumeration, for small bounds and tests.
pub fn enumerate_models(b: &EnumerationBounds) -> Result<Vec<SphereModel>, SearchError> {
    let mut out = Vec::new();
    for_each_model(b, |m| out.push(m.clone()))?;
    Ok(out)
}

// ---------------------------------------------------------------------------
// Formula corpus
// ---------------------------------------------------------------------------

/// Propositional formulas over the atoms with at most `max_conn`
/// implication nodes (all other connectives being sugar over those).
pub fn propositional_pool(atoms: &[&str], max_conn: usize) -> Vec<Formula> {
    let mut by_size: Vec<Vec<Formula>> = Vec::with_capacity(max_conn + 1);
    let mut leaves: Vec<Formula> = atoms.iter().map(|a| Formula::atom(*a)).collect();
    leaves.push(Formula::Falsum);
    by_size.push(leaves);
    for size in 1..=max_conn {
        let mut level = Vec::new();
        for left in 0..size {
            let right = size - 1 - left;
            for a in &by_size[left] {
                for b in &by_size[right] {
                    level.push(Formula::implies(a.clone(), b.clone()));
                }
            }
        }
        by_size.push(level);
    }
    by_size.into_iter().flatten().collect()
}

/// The paired literal cp-sets used by the sweeps: one or both atom pairs.
pub fn literal_cp_sets(atoms: &[&str]) -> Vec<CpSet> {
    let mut out = vec![CpSet::empty()];
    for a in atoms {
        out.push(CpSet::paired([Formula::atom(*a)]));
    }
    out.push(CpSet::paired(atoms.iter().map(|a| Formula::atom(*a))));
    out
}

/// The sweep corpus: small propositional formulas plus every
/// counterfactual and comparative-plausibility combination of tiny
/// operands and literal cp-sets. Every formula has cp-depth at most 1 and
/// propositional operands.
pub fn corpus(atoms: &[&str]) -> Vec<Formula> {
    let mut out = propositional_pool(atoms, 3);
    let operands = propositional_pool(atoms, 1);
    for g in literal_cp_sets(atoms) {
        for a in &operands {
            for b in &operands {
                out.push(Formula::cf(a.clone(), g.clone(), b.clone()));
                out.push(Formula::pl(a.clone(), g.clone(), b.clone()));
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Mask evaluation
// ---------------------------------------------------------------------------

/// Per-model evaluation context: satisfaction verdicts as world bitmasks,
/// with updated chains served by the real update code and cached per
/// (world, set, tag).
type ChainCache = HashMap<(usize, UpdateTag), HashMap<CpSet, Rc<Vec<WorldSet>>>>;

pub struct MaskCtx<'a> {
    pub m: &'a SphereModel,
    full: WorldSet,
    chains: RefCell<ChainCache>,
}

impl<'a> MaskCtx<'a> {
    pub fn new(m: &'a SphereModel) -> MaskCtx<'a> {
        MaskCtx {
            m,
            full: WorldSet::full(m.world_count()),
            chains: RefCell::new(HashMap::new()),
        }
    }

    fn not(&self, s: WorldSet) -> WorldSet {
        self.full.difference(s)
    }

    /// The chain governing a modal clause at `x` for set `g` under `u`.
    /// The empty set leaves the original chain in place.
    pub fn chain(&self, x: World, g: &CpSet, u: UpdateTag) -> Result<Rc<Vec<WorldSet>>, EvalError> {
        if let Some(c) = self
            .chains
            .borrow()
            .get(&(x.0, u))
            .and_then(|inner| inner.get(g))
        {
            return Ok(c.clone());
        }
        let chain = if g.is_empty() {
            Rc::new(self.m.system(x).spheres.clone())
        } else {
            Rc::new(update(self.m, x, g, u)?.systems[x.0].spheres.clone())
        };
        self.chains
            .borrow_mut()
            .entry((x.0, u))
            .or_default()
            .insert(g.clone(), chain.clone());
        Ok(chain)
    }

    /// Worlds satisfying `f` under tag `u`. Modal nodes whose operands
    /// contain further modal structure fall back to the reference
    /// evaluator; corpus formulas never do.
    pub fn mask(&self, f: &Formula, u: UpdateTag) -> Result<WorldSet, EvalError> {
        Ok(match f {
            Formula::Atom(name) => self.m.atom_extension(name),
            Formula::Falsum => WorldSet::EMPTY,
            Formula::Implies(a, b) => {
                let ma = self.mask(a, u)?;
                let mb = self.mask(b, u)?;
                self.not(ma).union(mb)
            }
            Formula::CpCounterfactual(a, g, b) | Formula::CpPlausibility(a, g, b) => {
                if !g.is_empty() && !g.is_paired() {
                    return Err(EvalError::NonPairedSet { set: g.to_string() });
                }
                if !a.is_propositional() || !b.is_propositional() {
                    let mut out = WorldSet::EMPTY;
                    for x in self.m.worlds() {
                        if eval::sat(self.m, x, f, u)? {
                            out.insert(x);
                        }
                    }
                    return Ok(out);
                }
                let ma = self.mask(a, u)?;
                let mb = self.mask(b, u)?;
                let cf = matches!(f, Formula::CpCounterfactual(..));
                let mut out = WorldSet::EMPTY;
                for x in self.m.worlds() {
                    let chain = self.chain(x, g, u)?;
                    let v = if cf {
                        lewis_cf_mask(&chain, ma, mb)
                    } else {
                        lewis_pl_mask(&chain, ma, mb)
                    };
                    if v {
                        out.insert(x);
                    }
                }
                out
            }
        })
    }

    /// Verdict of a single modal clause at `x` with an explicitly chosen
    /// set (used for the maximal-set equivalence, where the set may be
    /// non-paired and the reference evaluator would refuse it).
    pub fn modal_verdict(
        &self,
        x: World,
        a: &Formula,
        g: &CpSet,
        b: &Formula,
        u: UpdateTag,
        counterfactual: bool,
    ) -> Result<bool, EvalError> {
        let ma = self.mask(a, u)?;
        let mb = self.mask(b, u)?;
        let chain = self.chain(x, g, u)?;
        Ok(if counterfactual {
            lewis_cf_mask(&chain, ma, mb)
        } else {
            lewis_pl_mask(&chain, ma, mb)
        })
    }

    /// Weight of a propositional formula at `x` from its mask, against the
    /// original chain.
    pub fn weight(&self, x: World, mask: WorldSet) -> FormulaWeight {
        let mut counts = Vec::new();
        let mut prev = WorldSet::EMPTY;
        for &s in &self.m.system(x).spheres {
            counts.push(s.difference(prev).intersection(mask).len());
            prev = s;
        }
        FormulaWeight { counts }
    }
}

/// Lewis counterfactual on masks: the smallest sphere holding an A-world
/// decides; vacuously true without one.
pub fn lewis_cf_mask(chain: &[WorldSet], ma: WorldSet, mb: WorldSet) -> bool {
    for &s in chain {
        let a_here = s.intersection(ma);
        if !a_here.is_empty() {
            return a_here.is_subset(mb);
        }
    }
    true
}

/// Comparative plausibility on masks: the smallest sphere holding a
/// B-world must hold an A-world.
pub fn lewis_pl_mask(chain: &[WorldSet], ma: WorldSet, mb: WorldSet) -> bool {
    for &s in chain {
        if !s.intersection(mb).is_empty() {
            return !s.intersection(ma).is_empty();
        }
    }
    true
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct Violation {
    pub check: String,
    pub model: String,
    pub world: String,
    pub formula: String,
}

#[derive(Clone, Debug, Default)]
pub struct SweepReport {
    pub models: usize,
    pub checks: u64,
    pub violations: Vec<Violation>,
    /// Observations that are reported, not asserted.
    pub notes: Vec<String>,
}

impl SweepReport {
    fn violation(&mut self, check: &str, m: &SphereModel, world: &str, formula: String) {
        // Keep reports bounded; the first few witnesses are enough to act on.
        if self.violations.len() < 32 {
            self.violations.push(Violation {
                check: check.to_string(),
                model: save_model(m),
                world: world.to_string(),
                formula,
            });
        } else {
            self.violations.push(Violation {
                check: check.to_string(),
                model: String::new(),
                world: world.to_string(),
                formula,
            });
        }
    }
}

// ---------------------------------------------------------------------------
// Axiom sweep
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AxiomSystem {
    /// Weak centering: (cpr), (cpa), (tr), (co), (w).
    VW,
    /// Centering: VW plus (c).
    VC,
}

/// Substitution instances of the axiom schemata over a small operand pool.
/// All instances are base-language (empty cp-sets).
pub fn axiom_instances(system: AxiomSystem, atoms: &[&str]) -> Vec<(String, Formula)> {
    let pool: Vec<Formula> = {
        let a = Formula::atom(atoms[0]);
        let b = Formula::atom(*atoms.get(1).unwrap_or(&atoms[0]));
        vec![
            a.clone(),
            b.clone(),
            Formula::not(a.clone()),
            Formula::and(a.clone(), b.clone()),
            Formula::or(a.clone(), b.clone()),
            Formula::implies(a, b),
        ]
    };
    let pl = Formula::lewis_pl;
    let mut out = Vec::new();
    for a in &pool {
        // (w): A -> (A <= true)
        out.push((
            "w".to_string(),
            Formula::implies(a.clone(), pl(a.clone(), Formula::top())),
        ));
        if system == AxiomSystem::VC {
            // (c): (A <= true) -> A
            out.push((
                "c".to_string(),
                Formula::implies(pl(a.clone(), Formula::top()), a.clone()),
            ));
        }
        for b in &pool {
            // (cpa): (A <= A|B) | (B <= A|B)
            let ab = Formula::or(a.clone(), b.clone());
            out.push((
                "cpa".to_string(),
                Formula::or(pl(a.clone(), ab.clone()), pl(b.clone(), ab)),
            ));
            // (co): (A <= B) | (B <= A)
            out.push((
                "co".to_string(),
                Formula::or(pl(a.clone(), b.clone()), pl(b.clone(), a.clone())),
            ));
            // (cpr): from the tautology B -> A infer A <= B.
            if tautology(&Formula::implies(b.clone(), a.clone()), atoms) {
                out.push(("cpr".to_string(), pl(a.clone(), b.clone())));
            }
            for c in &pool {
                // (tr): (A <= B) & (B <= C) -> (A <= C)
                out.push((
                    "tr".to_string(),
                    Formula::implies(
                        Formula::and(pl(a.clone(), b.clone()), pl(b.clone(), c.clone())),
                        pl(a.clone(), c.clone()),
                    ),
                ));
            }
        }
    }
    out
}

/// Truth-table check over the given atoms.
fn tautology(f: &Formula, atoms: &[&str]) -> bool {
    fn eval_bool(f: &Formula, atoms: &[&str], bits: u32) -> bool {
        match f {
            Formula::Atom(name) => atoms
                .iter()
                .position(|a| a == name)
                .is_some_and(|i| bits & (1 << i) != 0),
            Formula::Falsum => false,
            Formula::Implies(a, b) => !eval_bool(a, atoms, bits) || eval_bool(b, atoms, bits),
            _ => panic!("tautology check is propositional only"),
        }
    }
    (0u32..(1 << atoms.len())).all(|bits| eval_bool(f, atoms, bits))
}

/// Sweeps the axiom instances over every enumerated model. Base-language
/// instances never trigger an update, so the verdicts are identical under
/// every update tag; the sweep still evaluates under the given tag.
pub fn check_axioms(
    b: &EnumerationBounds,
    system: AxiomSystem,
    u: UpdateTag,
    instances: &[(String, Formula)],
) -> Result<SweepReport, SearchError> {
    let mut report = SweepReport::default();
    let mut failure: Option<EvalError> = None;
    let mut index = 0usize;
    report.models = for_each_model(b, |m| {
        if failure.is_some() {
            return;
        }
        let ctx = MaskCtx::new(m);
        for (name, f) in instances {
            match ctx.mask(f, u) {
                Ok(mask) => {
                    report.checks += 1;
                    for x in m.worlds() {
                        if !mask.contains(x) {
                            report.violation(
                                &format!("axiom-{name}-{system:?}"),
                                m,
                                m.name(x),
                                f.to_string(),
                            );
                        }
                    }
                }
                Err(e) => failure = Some(e),
            }
        }
        // Differential honesty check on a sliver of the stream.
        if index.is_multiple_of(2000) {
            for (_, f) in instances.iter().step_by(50) {
                let lhs = ctx.mask(f, u).ok();
                let rhs: Option<WorldSet> = m
                    .worlds()
                    .try_fold(WorldSet::EMPTY, |mut acc, x| {
                        if eval::sat(m, x, f, u).ok()? {
                            acc.insert(x);
                        }
                        Some(acc)
                    });
                assert_eq!(lhs, rhs, "mask evaluator diverged from reference");
            }
        }
        index += 1;
    })?;
    if let Some(e) = failure {
        return Err(e.into());
    }
    Ok(report)
}

/// First enumerated (model, world) falsifying `f`, using the reference
/// evaluator.
pub fn find_countermodel(
    f: &Formula,
    b: &EnumerationBounds,
    u: UpdateTag,
) -> Result<Option<(SphereModel, World)>, SearchError> {
    let mut found: Option<(SphereModel, World)> = None;
    let mut failure: Option<EvalError> = None;
    for_each_model(b, |m| {
        if found.is_some() || failure.is_some() {
            return;
        }
        for x in m.worlds() {
            match eval::sat(m, x, f, u) {
                Ok(true) => {}
                Ok(false) => {
                    found = Some((m.clone(), x));
                    return;
                }
                Err(e) => {
                    failure = Some(e);
                    return;
                }
            }
        }
    })?;
    if let Some(e) = failure {
        return Err(e.into());
    }
    Ok(found)
}

// ---------------------------------------------------------------------------
// Theorem sweep
// ---------------------------------------------------------------------------

/// Per-model work shared by several checks.
struct GammaData {
    gamma: CpSet,
    /// Masks of the members, aligned with `gamma.members()`.
    member_masks: Vec<WorldSet>,
}

/// A modal corpus formula destructured once, with its set resolved to an
/// index into the shared gamma list so per-model loops avoid set clones.
struct ModalTriple {
    a: Formula,
    b: Formula,
    gamma_idx: usize,
    counterfactual: bool,
    display: String,
}

/// Runs the differential checks backing the paper-level equivalences over
/// every model in bounds and the generated corpus. Violations of claims
/// that only hold on centered models are logged as notes when the bounds
/// are weakly centered.
pub fn theorem_sweep(b: &EnumerationBounds) -> Result<SweepReport, SearchError> {
    let atoms: Vec<&str> = b.atoms.iter().map(|s| s.as_str()).collect();
    let corpus = corpus(&atoms);
    let gammas: Vec<CpSet> = literal_cp_sets(&atoms).into_iter().filter(|g| !g.is_empty()).collect();
    let modal: Vec<ModalTriple> = corpus
        .iter()
        .filter_map(|f| {
            let (a, g, b_op, counterfactual) = match f {
                Formula::CpCounterfactual(a, g, b) => (a, g, b, true),
                Formula::CpPlausibility(a, g, b) => (a, g, b, false),
                _ => return None,
            };
            let gamma_idx = gammas.iter().position(|cand| cand == g)?;
            Some(ModalTriple {
                a: (**a).clone(),
                b: (**b_op).clone(),
                gamma_idx,
                counterfactual,
                display: f.to_string(),
            })
        })
        .collect();
    let prop_pool = propositional_pool(&atoms, 1);

    let mut report = SweepReport::default();
    let mut failure: Option<SearchError> = None;
    let mut index = 0usize;
    let mut id_divergences = 0u64;
    report.models = for_each_model(b, |m| {
        if failure.is_some() {
            return;
        }
        if let Err(e) = sweep_one_model(
            m,
            b.centering,
            &corpus,
            &modal,
            &gammas,
            &prop_pool,
            index,
            &mut report,
            &mut id_divergences,
        ) {
            failure = Some(e.into());
        }
        index += 1;
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    if b.centering == Centering::Weak {
        report.notes.push(format!(
            "implausibility/disagreement verdicts diverged {id_divergences} times (expected on weakly centered models; logged, not asserted)"
        ));
    }
    Ok(report)
}

#[allow(clippy::too_many_arguments)]
fn sweep_one_model(
    m: &SphereModel,
    centering: Centering,
    corpus: &[Formula],
    modal: &[ModalTriple],
    gammas: &[CpSet],
    prop_pool: &[Formula],
    index: usize,
    report: &mut SweepReport,
    id_divergences: &mut u64,
) -> Result<(), EvalError> {
    use UpdateTag::{Agreement as A, Disagreement as D, Implausibility as I};
    let ctx = MaskCtx::new(m);

    // (a) agreement/disagreement equality; (b) implausibility on centered.
    for f in corpus {
        let md = ctx.mask(f, D)?;
        let ma = ctx.mask(f, A)?;
        report.checks += 1;
        if ma != md {
            for x in md.difference(ma).union(ma.difference(md)).iter() {
                report.violation("a-d-equality", m, m.name(x), f.to_string());
            }
        }
        let mi = ctx.mask(f, I)?;
        report.checks += 1;
        if mi != md {
            if centering == Centering::Centered {
                for x in md.difference(mi).union(mi.difference(md)).iter() {
                    report.violation("i-d-equality", m, m.name(x), f.to_string());
                }
            } else {
                *id_divergences += 1;
            }
        }
    }

    // (c) Γ vs Γ_M on every modal corpus formula, every tag. The maximal
    // set only depends on (world, set, tag), so it is computed once per
    // combination.
    let mut maximal: HashMap<(usize, usize, UpdateTag), CpSet> = HashMap::new();
    for u in UpdateTag::ALL {
        for x in m.worlds() {
            for (gi, g) in gammas.iter().enumerate() {
                let gm = cpsets::maximal_cp_set(m, x, g, u, TieRule::FalsifiedMember)?;
                maximal.insert((x.0, gi, u), gm);
            }
        }
    }
    for t in modal {
        let g = &gammas[t.gamma_idx];
        for u in UpdateTag::ALL {
            for x in m.worlds() {
                let gm = &maximal[&(x.0, t.gamma_idx, u)];
                let with_g = ctx.modal_verdict(x, &t.a, g, &t.b, u, t.counterfactual)?;
                let with_gm = ctx.modal_verdict(x, &t.a, gm, &t.b, u, t.counterfactual)?;
                report.checks += 1;
                if with_g != with_gm {
                    report.violation("maximal-set-equivalence", m, m.name(x), t.display.clone());
                }
            }
        }
    }

    // Per-(x, Γ) structural checks: symmetry, monotonicity, duality,
    // forcing-complement clauses, preservation.
    let gamma_data: Vec<GammaData> = gammas
        .iter()
        .map(|g| {
            let member_masks = g
                .members()
                .iter()
                .map(|f| ctx.mask(f, D))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(GammaData { gamma: g.clone(), member_masks })
        })
        .collect::<Result<_, EvalError>>()?;

    for x in m.worlds() {
        // (d) Symmetry: the comparison of two weights equals the flipped
        // comparison of the dual weights.
        let pool_weights: Vec<(WorldSet, FormulaWeight, FormulaWeight)> = prop_pool
            .iter()
            .map(|f| {
                let mask = ctx.mask(f, D)?;
                let full = WorldSet::full(m.world_count());
                Ok((mask, ctx.weight(x, mask), ctx.weight(x, full.difference(mask))))
            })
            .collect::<Result<_, EvalError>>()?;
        for (i, (_, wa, wda)) in pool_weights.iter().enumerate() {
            for (_, wb, wdb) in pool_weights.iter().skip(i) {
                report.checks += 1;
                if cmp_xel(wa, wb) != cmp_xel(wdb, wda) {
                    report.violation("weight-symmetry", m, m.name(x), String::new());
                }
            }
        }

        // (e) Monotonicity over all subset pairs of the literal sets.
        let set_weight = |members: &[usize], gd: &GammaData| -> SetWeight {
            let mut parts: Vec<FormulaWeight> =
                members.iter().map(|&i| ctx.weight(x, gd.member_masks[i])).collect();
            parts.sort_by(|a, b| cmp_xel(b, a));
            SetWeight { parts }
        };
        for gd in &gamma_data {
            let n = gd.gamma.len();
            let full_weight = set_weight(&(0..n).collect::<Vec<_>>(), gd);
            for mask_small in 0u32..(1 << n) {
                let small: Vec<usize> = (0..n).filter(|i| mask_small & (1 << i) != 0).collect();
                let ws = set_weight(&small, gd);
                report.checks += 1;
                if cmp_lex(&ws, &full_weight) == Ordering::Greater {
                    report.violation("weight-monotonicity", m, m.name(x), gd.gamma.to_string());
                }
            }
        }

        for gd in &gamma_data {
            // Profiles of every reachable world, from masks.
            let universe = m.system(x).universe();
            let profiles: Vec<(World, Vec<usize>, Vec<usize>)> = universe
                .iter()
                .map(|y| {
                    let mut dis = Vec::new();
                    let mut agr = Vec::new();
                    for (i, mask) in gd.member_masks.iter().enumerate() {
                        if mask.contains(x) == mask.contains(y) {
                            agr.push(i);
                        } else {
                            dis.push(i);
                        }
                    }
                    (y, agr, dis)
                })
                .collect();

            // (f) Duality: the disagreement ordering mirrors the agreement
            // ordering.
            for (y, ay, dy) in &profiles {
                for (z, az, dz) in &profiles {
                    let dis_cmp = cmp_lex(&set_weight(dy, gd), &set_weight(dz, gd));
                    let agr_cmp = cmp_lex(&set_weight(az, gd), &set_weight(ay, gd));
                    report.checks += 1;
                    if dis_cmp != agr_cmp {
                        report.violation(
                            "agreement-disagreement-duality",
                            m,
                            &format!("{} vs {}", m.name(*y), m.name(*z)),
                            gd.gamma.to_string(),
                        );
                    }
                }
            }

            // (g) Forcing-complement clauses 3-5 over every paired subset.
            let lambdas = cpsets::paired_subsets(&gd.gamma)?;
            for lam in &lambdas {
                let lam_idx: Vec<usize> = gd
                    .gamma
                    .members()
                    .iter()
                    .enumerate()
                    .filter(|(_, f)| lam.contains(f))
                    .map(|(i, _)| i)
                    .collect();
                // Mask of ⋀ of x's forcing set over Γ\λ.
                let mut conj_rest = WorldSet::full(m.world_count());
                for (i, mask) in gd.member_masks.iter().enumerate() {
                    if !lam_idx.contains(&i) && mask.contains(x) {
                        conj_rest = conj_rest.intersection(*mask);
                    }
                }
                // Mask of ⋀ of x's forcing set over λ.
                let mut conj_lam = WorldSet::full(m.world_count());
                for &i in &lam_idx {
                    if gd.member_masks[i].contains(x) {
                        conj_lam = conj_lam.intersection(gd.member_masks[i]);
                    }
                }
                let lam_weight = set_weight(&lam_idx, gd);
                for (y, ay, dy) in &profiles {
                    let d_in_lam = dy.iter().all(|i| lam_idx.contains(i));
                    report.checks += 3;
                    if conj_rest.contains(*y) != d_in_lam {
                        report.violation("complement-clause-3", m, m.name(*y), lam.to_string());
                    }
                    let lam_in_a = lam_idx.iter().all(|i| ay.contains(i));
                    if conj_lam.contains(*y) != lam_in_a {
                        report.violation("complement-clause-4", m, m.name(*y), lam.to_string());
                    }
                    if d_in_lam
                        && cmp_lex(&set_weight(dy, gd), &lam_weight) == Ordering::Greater
                    {
                        report.violation("complement-clause-5", m, m.name(*y), lam.to_string());
                    }
                }
            }

            // Preservation: updated models stay valid, with the same tag.
            for u in UpdateTag::ALL {
                let updated = update(m, x, &gd.gamma, u)?;
                report.checks += 1;
                if updated.validate().is_err()
                    || updated.system(x).universe() != m.system(x).universe()
                {
                    report.violation("update-preservation", m, m.name(x), gd.gamma.to_string());
                }
            }
        }
    }

    // Differential spot check: the mask evaluator against the reference
    // evaluator on a slice of the corpus.
    if index.is_multiple_of(1009) {
        for f in corpus.iter().step_by(101) {
            for u in UpdateTag::ALL {
                let mask = ctx.mask(f, u)?;
                for x in m.worlds() {
                    assert_eq!(
                        mask.contains(x),
                        eval::sat(m, x, f, u)?,
                        "mask evaluator diverged from reference on {f}"
                    );
                }
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Interdefinability and translation sweeps
// ---------------------------------------------------------------------------

/// Checks that a formula, its counterfactual-free rewrite and its
/// plausibility-free rewrite are satisfied by exactly the same worlds.
pub fn interdefinability_sweep(b: &EnumerationBounds) -> Result<SweepReport, SearchError> {
    let atoms: Vec<&str> = b.atoms.iter().map(|s| s.as_str()).collect();
    let corpus = corpus(&atoms);
    let rewritten: Vec<(Formula, Formula, Formula)> = corpus
        .iter()
        .map(|f| (f.clone(), f.rewrite_cf_to_pl(), f.rewrite_pl_to_cf()))
        .collect();
    let mut report = SweepReport::default();
    let mut failure: Option<EvalError> = None;
    report.models = for_each_model(b, |m| {
        if failure.is_some() {
            return;
        }
        let ctx = MaskCtx::new(m);
        for (f, as_pl, as_cf) in &rewritten {
            let mut run = || -> Result<(), EvalError> {
                let base = ctx.mask(f, UpdateTag::Disagreement)?;
                report.checks += 2;
                if ctx.mask(as_pl, UpdateTag::Disagreement)? != base {
                    report.violation("cf-to-pl-equivalence", m, "*", f.to_string());
                }
                if ctx.mask(as_cf, UpdateTag::Disagreement)? != base {
                    report.violation("pl-to-cf-equivalence", m, "*", f.to_string());
                }
                Ok(())
            };
            if let Err(e) = run() {
                failure = Some(e);
                return;
            }
        }
    })?;
    if let Some(e) = failure {
        return Err(e.into());
    }
    Ok(report)
}

/// Verdict of the hat-translation of `a <=[g] b` at `x`, computed against
/// masks without materializing the formula. Mirrors `translate::hat`
/// exactly; the sweep spot-checks the two against each other.
fn hat_verdict_masked(
    ctx: &MaskCtx<'_>,
    x: World,
    ma: WorldSet,
    mb: WorldSet,
    lambda_weights: &[SetWeight],
    complement_masks: &[WorldSet],
) -> Result<bool, EvalError> {
    let chain = ctx.chain(x, &CpSet::empty(), UpdateTag::Disagreement)?;
    let universe = chain.last().copied().unwrap_or(WorldSet::EMPTY);
    for i in 0..lambda_weights.len() {
        let mut premise = true;
        let mut lhs = WorldSet::EMPTY;
        for j in 0..lambda_weights.len() {
            let ord = cmp_lex(&lambda_weights[j], &lambda_weights[i]);
            let witness = ma.intersection(complement_masks[j]);
            if ord == Ordering::Less && !witness.intersection(universe).is_empty() {
                premise = false;
            }
            if ord != Ordering::Greater {
                lhs = lhs.union(witness);
            }
        }
        if premise {
            let rhs = mb.intersection(complement_masks[i]);
            if !lewis_pl_mask(&chain, lhs, rhs) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Sweeps translation equisatisfiability: for every enumerated (model,
/// world) and every corpus plausibility node with a non-empty set
/// (including the nodes produced by rewriting counterfactuals), the
/// hat-translation agrees with the original under the disagreement
/// update. Periodically cross-checks the fast path against the real
/// `translate::star` and the reference evaluator.
pub fn translation_sweep(b: &EnumerationBounds) -> Result<SweepReport, SearchError> {
    let atoms: Vec<&str> = b.atoms.iter().map(|s| s.as_str()).collect();
    let operands = propositional_pool(&atoms, 1);
    let gammas: Vec<CpSet> = literal_cp_sets(&atoms).into_iter().filter(|g| !g.is_empty()).collect();

    // The plausibility triples reachable from the corpus after cf→pl
    // rewriting: direct nodes (a, g, b), vacuity guards (false, g, a) and
    // rewritten counterfactual cores (a & ~b, g, a & b).
    let mut triples: Vec<(Formula, usize, Formula)> = Vec::new();
    for (gi, _) in gammas.iter().enumerate() {
        for a in &operands {
            triples.push((Formula::Falsum, gi, a.clone()));
            for b_op in &operands {
                triples.push((a.clone(), gi, b_op.clone()));
                triples.push((
                    Formula::and(a.clone(), Formula::not(b_op.clone())),
                    gi,
                    Formula::and(a.clone(), b_op.clone()),
                ));
            }
        }
    }

    const TAG: UpdateTag = UpdateTag::Disagreement;
    let mut report = SweepReport::default();
    let mut failure: Option<EvalError> = None;
    let mut index = 0usize;
    report.models = for_each_model(b, |m| {
        if failure.is_some() {
            return;
        }
        let ctx = MaskCtx::new(m);
        let mut run = || -> Result<(), EvalError> {
            // λ machinery per (x, Γ): subset weights and the masks of x's
            // forcing conjunctions over each complement.
            for x in m.worlds() {
                let mut per_gamma: Vec<(Vec<SetWeight>, Vec<WorldSet>)> = Vec::new();
                for g in &gammas {
                    let subsets = cpsets::paired_subsets(g)?;
                    let mut weights = Vec::with_capacity(subsets.len());
                    let mut comp_masks = Vec::with_capacity(subsets.len());
                    for lam in &subsets {
                        let mut parts: Vec<FormulaWeight> = lam
                            .members()
                            .iter()
                            .map(|f| Ok(ctx.weight(x, ctx.mask(f, TAG)?)))
                            .collect::<Result<_, EvalError>>()?;
                        parts.sort_by(|a, b| cmp_xel(b, a));
                        weights.push(SetWeight { parts });
                        let rest = g.difference(lam);
                        let mut conj = WorldSet::full(m.world_count());
                        for f in rest.members() {
                            let mask = ctx.mask(f, TAG)?;
                            if mask.contains(x) {
                                conj = conj.intersection(mask);
                            }
                        }
                        comp_masks.push(conj);
                    }
                    per_gamma.push((weights, comp_masks));
                }
                for (a, gi, b_op) in &triples {
                    let g = &gammas[*gi];
                    let ma = ctx.mask(a, TAG)?;
                    let mb = ctx.mask(b_op, TAG)?;
                    let original = {
                        let chain = ctx.chain(x, g, TAG)?;
                        lewis_pl_mask(&chain, ma, mb)
                    };
                    let (weights, comp_masks) = &per_gamma[*gi];
                    let translated = hat_verdict_masked(&ctx, x, ma, mb, weights, comp_masks)?;
                    report.checks += 1;
                    if original != translated {
                        report.violation(
                            "translation-equisatisfiability",
                            m,
                            m.name(x),
                            Formula::pl(a.clone(), g.clone(), b_op.clone()).to_string(),
                        );
                    }
                }
            }
            // Differential: materialize star() on a slice and compare with
            // both the fast verdicts and the reference evaluator.
            if index.is_multiple_of(977) {
                let x = World(0);
                for (a, gi, b_op) in triples.iter().step_by(37) {
                    let f = Formula::pl(a.clone(), gammas[*gi].clone(), b_op.clone());
                    let starred = translate::star(m, x, &f).expect("star on corpus node");
                    assert_eq!(starred.cpl(), 0);
                    let lhs = eval::sat(m, x, &f, TAG)?;
                    let rhs = eval::sat(m, x, &starred, TAG)?;
                    assert_eq!(lhs, rhs, "star diverged from reference on {f}");
                    let ma = ctx.mask(a, TAG)?;
                    let mb = ctx.mask(b_op, TAG)?;
                    let (weights, comp_masks) = {
                        // Rebuild λ data for x = w0 only.
                        let g = &gammas[*gi];
                        let subsets = cpsets::paired_subsets(g)?;
                        let mut weights = Vec::new();
                        let mut comp_masks = Vec::new();
                        for lam in &subsets {
                            let mut parts: Vec<FormulaWeight> = lam
                                .members()
                                .iter()
                                .map(|f| Ok(ctx.weight(x, ctx.mask(f, TAG)?)))
                                .collect::<Result<_, EvalError>>()?;
                            parts.sort_by(|a, b| cmp_xel(b, a));
                            weights.push(SetWeight { parts });
                            let rest = g.difference(lam);
                            let mut conj = WorldSet::full(m.world_count());
                            for f in rest.members() {
                                let mask = ctx.mask(f, TAG)?;
                                if mask.contains(x) {
                                    conj = conj.intersection(mask);
                                }
                            }
                            comp_masks.push(conj);
                        }
                        (weights, comp_masks)
                    };
                    let fast = hat_verdict_masked(&ctx, x, ma, mb, &weights, &comp_masks)?;
                    assert_eq!(fast, rhs, "fast hat verdict diverged on {f}");
                }
            }
            Ok(())
        };
        if let Err(e) = run() {
            failure = Some(e);
        }
        index += 1;
    })?;
    if let Some(e) = failure {
        return Err(e.into());
    }
    Ok(report)
}

/// Update preservation over the full enumeration: criterion companion to
/// the in-sweep check, runnable on weakly centered bounds too.
pub fn preservation_sweep(b: &EnumerationBounds) -> Result<SweepReport, SearchError> {
    let atoms: Vec<&str> = b.atoms.iter().map(|s| s.as_str()).collect();
    let gammas = literal_cp_sets(&atoms);
    let mut report = SweepReport::default();
    let mut failure: Option<EvalError> = None;
    report.models = for_each_model(b, |m| {
        if failure.is_some() {
            return;
        }
        for x in m.worlds() {
            for g in &gammas {
                for u in UpdateTag::ALL {
                    match update(m, x, g, u) {
                        Ok(updated) => {
                            report.checks += 1;
                            if updated.validate().is_err()
                                || updated.system(x).universe() != m.system(x).universe()
                            {
                                report.violation("update-preservation", m, m.name(x), g.to_string());
                            }
                        }
                        Err(e) => {
                            failure = Some(e);
                            return;
                        }
                    }
                }
            }
        }
    })?;
    if let Some(e) = failure {
        return Err(e.into());
    }
    Ok(report)
}

/// Searches for a formula and model where the cp-clause variants a and b
/// disagree. Reported, not asserted: the paper argues the divergence
/// informally.
pub fn find_variant_divergence(
    b: &EnumerationBounds,
) -> Result<Option<(SphereModel, World, Formula)>, SearchError> {
    let atoms: Vec<&str> = b.atoms.iter().map(|s| s.as_str()).collect();
    let lits: Vec<Formula> = atoms
        .iter()
        .flat_map(|a| [Formula::atom(*a), Formula::not(Formula::atom(*a))])
        .collect();
    let gammas: Vec<CpSet> =
        literal_cp_sets(&atoms).into_iter().filter(|g| !g.is_empty()).collect();
    // Nested candidates: the inner modal operand makes the two variants
    // read different models.
    let mut candidates = Vec::new();
    for g in &gammas {
        for a in &lits {
            for c in &lits {
                for d in &lits {
                    let inner_cf = Formula::lewis_cf(c.clone(), d.clone());
                    let inner_pl = Formula::lewis_pl(c.clone(), d.clone());
                    candidates.push(Formula::cf(a.clone(), g.clone(), inner_cf.clone()));
                    candidates.push(Formula::cf(a.clone(), g.clone(), inner_pl.clone()));
                    candidates.push(Formula::pl(inner_cf, g.clone(), a.clone()));
                    candidates.push(Formula::pl(a.clone(), g.clone(), inner_pl));
                }
            }
        }
    }
    let mut found: Option<(SphereModel, World, Formula)> = None;
    let mut failure: Option<EvalError> = None;
    for_each_model(b, |m| {
        if found.is_some() || failure.is_some() {
            return;
        }
        for x in m.worlds() {
            for f in &candidates {
                let res = (|| -> Result<bool, EvalError> {
                    let va = eval::sat_variant(m, x, f, UpdateTag::Disagreement, eval::Variant::A)?;
                    let vb = eval::sat(m, x, f, UpdateTag::Disagreement)?;
                    Ok(va != vb)
                })();
                match res {
                    Ok(true) => {
                        found = Some((m.clone(), x, f.clone()));
                        return;
                    }
                    Ok(false) => {}
                    Err(e) => {
                        failure = Some(e);
                        return;
                    }
                }
            }
        }
    })?;
    if let Some(e) = failure {
        return Err(e.into());
    }
    Ok(found)
}
