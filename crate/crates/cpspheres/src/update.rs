//! The three model updates: implausibility (i), agreement (a) and
//! disagreement (d). Each rebuilds the system of spheres around the actual
//! world by re-ranking its reachable worlds on the weight of their
//! forcing / agreement / disagreement set, tie-broken by the original
//! sphere rank.

use std::cmp::Ordering;
use std::fmt;

use crate::cpsets::profile;
use crate::eval::EvalError;
use crate::formula::CpSet;
use crate::model::{Centering, SphereModel, SphereSystem, World, WorldSet};
use crate::weights::{cmp_lex, weight_of_set, SetWeight};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UpdateTag {
    Implausibility,
    Agreement,
    Disagreement,
}

impl UpdateTag {
    pub const ALL: [UpdateTag; 3] =
        [UpdateTag::Implausibility, UpdateTag::Agreement, UpdateTag::Disagreement];

    pub fn letter(self) -> char {
        match self {
            UpdateTag::Implausibility => 'i',
            UpdateTag::Agreement => 'a',
            UpdateTag::Disagreement => 'd',
        }
    }

    pub fn from_letter(c: char) -> Option<UpdateTag> {
        match c {
            'i' => Some(UpdateTag::Implausibility),
            'a' => Some(UpdateTag::Agreement),
            'd' => Some(UpdateTag::Disagreement),
            _ => None,
        }
    }
}

impl fmt::Display for UpdateTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// Sort key of a world during an update.
#[derive(Clone, Debug)]
pub struct RankKey {
    pub setweight: SetWeight,
    /// Index of the innermost original sphere containing the world.
    pub origrank: usize,
}

/// One row of the ranking table behind an update.
#[derive(Clone, Debug)]
pub struct TraceRow {
    pub world: World,
    /// The tag-relevant set (forcing, agreement or disagreement).
    pub set: CpSet,
    pub key: RankKey,
    /// Index of the sphere of the updated chain this world first enters.
    pub level: usize,
}

/// Compares rank keys in update order: ascending set weight for i and d,
/// descending for a, then ascending original rank.
fn cmp_keys(u: UpdateTag, a: &RankKey, b: &RankKey) -> Ordering {
    let by_weight = match u {
        UpdateTag::Agreement => cmp_lex(&b.setweight, &a.setweight),
        _ => cmp_lex(&a.setweight, &b.setweight),
    };
    by_weight.then(a.key_rank_cmp(b))
}

impl RankKey {
    fn key_rank_cmp(&self, other: &RankKey) -> Ordering {
        self.origrank.cmp(&other.origrank)
    }
}

fn ranked_worlds(
    m: &SphereModel,
    x: World,
    g: &CpSet,
    u: UpdateTag,
) -> Result<Vec<(World, CpSet, RankKey)>, EvalError> {
    if x.0 >= m.world_count() {
        return Err(EvalError::UnknownWorld { index: x.0 });
    }
    let sys = m.system(x);
    let mut rows = Vec::new();
    for y in sys.universe().iter() {
        let p = profile(m, x, y, g, u)?;
        let set = match u {
            UpdateTag::Implausibility => p.forcing,
            UpdateTag::Agreement => p.agreement,
            UpdateTag::Disagreement => p.disagreement,
        };
        let setweight = weight_of_set(m, x, &set, u)?;
        let origrank = sys.rank_of(y).expect("y is in the universe");
        rows.push((y, set, RankKey { setweight, origrank }));
    }
    rows.sort_by(|a, b| cmp_keys(u, &a.2, &b.2).then(a.0.cmp(&b.0)));
    Ok(rows)
}

/// Builds the updated chain from ranked rows: one sphere per distinct key
/// level, cumulatively, duplicates collapsed. Returns the chain and the
/// level each world enters at.
fn chain_from_rows(
    u: UpdateTag,
    rows: &[(World, CpSet, RankKey)],
) -> (Vec<WorldSet>, Vec<usize>) {
    let mut spheres: Vec<WorldSet> = Vec::new();
    let mut levels = Vec::with_capacity(rows.len());
    let mut current = WorldSet::EMPTY;
    for (i, (y, _, key)) in rows.iter().enumerate() {
        let new_level = i == 0 || cmp_keys(u, &rows[i - 1].2, key) != Ordering::Equal;
        if new_level && !current.is_empty() {
            spheres.push(current);
        }
        current.insert(*y);
        levels.push(spheres.len());
    }
    if !current.is_empty() {
        spheres.push(current);
    }
    (spheres, levels)
}

/// The updated model: differs from `m` only in the system of spheres
/// around `x`. Pairedness of `g` is not checked here; formula evaluation
/// enforces it before calling in.
pub fn update(
    m: &SphereModel,
    x: World,
    g: &CpSet,
    u: UpdateTag,
) -> Result<SphereModel, EvalError> {
    let rows = ranked_worlds(m, x, g, u)?;
    let (mut spheres, _) = chain_from_rows(u, &rows);
    // Weakly centered implausibility variant: the actual world is forced
    // into the innermost sphere. Inserting it into every sphere keeps the
    // chain nested.
    if m.centering == Centering::Weak
        && u == UpdateTag::Implausibility
        && !spheres.first().is_some_and(|s| s.contains(x))
    {
        for s in &mut spheres {
            s.insert(x);
        }
    }
    let mut out = m.clone();
    out.systems[x.0] = SphereSystem::new(spheres).collapsed();
    Ok(out)
}

/// The ranking table behind [`update`], for inspection and dumps.
pub fn update_trace(
    m: &SphereModel,
    x: World,
    g: &CpSet,
    u: UpdateTag,
) -> Result<Vec<TraceRow>, EvalError> {
    let rows = ranked_worlds(m, x, g, u)?;
    let (_, levels) = chain_from_rows(u, &rows);
    Ok(rows
        .into_iter()
        .zip(levels)
        .map(|((world, set, key), level)| TraceRow { world, set, key, level })
        .collect())
}
