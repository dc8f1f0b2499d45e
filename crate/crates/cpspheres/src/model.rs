//! Finite sphere models: worlds, valuations and per-world systems of
//! nested spheres, plus the text file format for loading and saving them.
//!
//! Worlds are indices into the model's name table and sets of worlds are
//! `u64` bitmasks, so a model holds at most 64 worlds.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

pub const MAX_WORLDS: usize = 64;

/// Index of a world in its model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct World(pub usize);

impl fmt::Display for World {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// A set of worlds as a bitmask.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct WorldSet(pub u64);

impl WorldSet {
    pub const EMPTY: WorldSet = WorldSet(0);

    pub fn singleton(w: World) -> WorldSet {
        WorldSet(1 << w.0)
    }

    pub fn full(n: usize) -> WorldSet {
        debug_assert!(n <= MAX_WORLDS);
        if n == MAX_WORLDS {
            WorldSet(u64::MAX)
        } else {
            WorldSet((1u64 << n) - 1)
        }
    }

    pub fn contains(self, w: World) -> bool {
        self.0 & (1 << w.0) != 0
    }

    pub fn insert(&mut self, w: World) {
        self.0 |= 1 << w.0;
    }

    pub fn remove(&mut self, w: World) {
        self.0 &= !(1 << w.0);
    }

    pub fn union(self, other: WorldSet) -> WorldSet {
        WorldSet(self.0 | other.0)
    }

    pub fn intersection(self, other: WorldSet) -> WorldSet {
        WorldSet(self.0 & other.0)
    }

    pub fn difference(self, other: WorldSet) -> WorldSet {
        WorldSet(self.0 & !other.0)
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset(self, other: WorldSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = World> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let idx = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(World(idx))
            }
        })
    }
}

impl FromIterator<World> for WorldSet {
    fn from_iter<T: IntoIterator<Item = World>>(iter: T) -> Self {
        let mut set = WorldSet::EMPTY;
        for w in iter {
            set.insert(w);
        }
        set
    }
}

/// Whether every world's innermost sphere is exactly itself, or merely
/// contains itself.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Centering {
    Centered,
    Weak,
}

impl fmt::Display for Centering {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Centering::Centered => write!(f, "centered"),
            Centering::Weak => write!(f, "weak"),
        }
    }
}

/// The nested spheres around one world, innermost first, strictly
/// increasing, all non-empty.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SphereSystem {
    pub spheres: Vec<WorldSet>,
}

impl SphereSystem {
    pub fn new(spheres: Vec<WorldSet>) -> SphereSystem {
        SphereSystem { spheres }
    }

    /// Union of all spheres: the worlds reachable from the center.
    pub fn universe(&self) -> WorldSet {
        self.spheres.last().copied().unwrap_or(WorldSet::EMPTY)
    }

    pub fn innermost(&self) -> WorldSet {
        self.spheres.first().copied().unwrap_or(WorldSet::EMPTY)
    }

    /// Drops consecutive duplicate spheres, keeping the chain strictly
    /// increasing.
    pub fn collapsed(&self) -> SphereSystem {
        let mut spheres: Vec<WorldSet> = Vec::with_capacity(self.spheres.len());
        for &s in &self.spheres {
            if spheres.last() != Some(&s) {
                spheres.push(s);
            }
        }
        SphereSystem { spheres }
    }

    /// Index of the smallest sphere containing `w`, if any. This is the
    /// rank of `w` around the center.
    pub fn rank_of(&self, w: World) -> Option<usize> {
        self.spheres.iter().position(|s| s.contains(w))
    }
}

/// A finite sphere model.
#[derive(Clone, Debug, PartialEq)]
pub struct SphereModel {
    pub names: Vec<String>,
    pub valuation: BTreeMap<String, WorldSet>,
    pub systems: Vec<SphereSystem>,
    pub centering: Centering,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("model violates sphere conditions:\n{}", reports.join("\n"))]
    Invalid { reports: Vec<String> },
}

impl SphereModel {
    pub fn world_count(&self) -> usize {
        self.names.len()
    }

    pub fn worlds(&self) -> impl Iterator<Item = World> {
        (0..self.names.len()).map(World)
    }

    pub fn world_named(&self, name: &str) -> Option<World> {
        self.names.iter().position(|n| n == name).map(World)
    }

    pub fn name(&self, w: World) -> &str {
        &self.names[w.0]
    }

    /// Worlds where the atom holds; unknown atoms hold nowhere.
    pub fn atom_extension(&self, atom: &str) -> WorldSet {
        self.valuation.get(atom).copied().unwrap_or(WorldSet::EMPTY)
    }

    pub fn system(&self, w: World) -> &SphereSystem {
        &self.systems[w.0]
    }

    pub fn format_worlds(&self, set: WorldSet) -> String {
        let names: Vec<&str> = set.iter().map(|w| self.name(w)).collect();
        format!("{{{}}}", names.join(" "))
    }

    /// Checks non-emptiness, nesting and the centering condition, returning
    /// one human-readable report per violation.
    pub fn violations(&self) -> Vec<String> {
        let mut reports = Vec::new();
        let all = WorldSet::full(self.world_count());
        for (atom, ext) in &self.valuation {
            if !ext.is_subset(all) {
                reports.push(format!("valuation of `{atom}` mentions an unknown world"));
            }
        }
        for w in self.worlds() {
            let name = self.name(w);
            let sys = self.system(w);
            if sys.spheres.is_empty() {
                reports.push(format!("world {name}: sphere system is empty"));
                continue;
            }
            for (i, s) in sys.spheres.iter().enumerate() {
                if s.is_empty() {
                    reports.push(format!("world {name}: sphere {i} is empty"));
                }
                if !s.is_subset(all) {
                    reports.push(format!("world {name}: sphere {i} mentions an unknown world"));
                }
                if i > 0 && !(sys.spheres[i - 1].is_subset(*s) && sys.spheres[i - 1] != *s) {
                    reports.push(format!(
                        "world {name}: sphere {i} does not strictly extend sphere {}",
                        i - 1
                    ));
                }
            }
            match self.centering {
                Centering::Centered => {
                    if sys.innermost() != WorldSet::singleton(w) {
                        reports.push(format!(
                            "world {name}: innermost sphere is {} but centering requires {{{name}}}",
                            self.format_worlds(sys.innermost())
                        ));
                    }
                }
                Centering::Weak => {
                    if !sys.innermost().contains(w) {
                        reports.push(format!(
                            "world {name}: innermost sphere {} does not contain {name}",
                            self.format_worlds(sys.innermost())
                        ));
                    }
                }
            }
        }
        reports
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let reports = self.violations();
        if reports.is_empty() {
            Ok(())
        } else {
            Err(ModelError::Invalid { reports })
        }
    }
}

/// Parses the model text format:
///
/// ```text
/// centering: centered
/// worlds: x v1 v2
/// val p: x v1
/// spheres x: {x} {x v1} {x v1 v2}
/// ```
///
/// `#` starts a comment; every world needs a `spheres` line.
pub fn load_model(source: &str) -> Result<SphereModel, ModelError> {
    let syntax = |line: usize, message: String| ModelError::Syntax { line, message };
    let mut centering: Option<Centering> = None;
    let mut names: Option<Vec<String>> = None;
    let mut valuation: BTreeMap<String, WorldSet> = BTreeMap::new();
    let mut sphere_lines: Vec<(usize, String, String)> = Vec::new();

    for (idx, raw) in source.lines().enumerate() {
        let lineno = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (head, rest) = line
            .split_once(':')
            .ok_or_else(|| syntax(lineno, format!("expected `key: value`, got `{line}`")))?;
        let head = head.trim();
        let rest = rest.trim();
        match head {
            "centering" => {
                let value = match rest {
                    "centered" => Centering::Centered,
                    "weak" => Centering::Weak,
                    other => {
                        return Err(syntax(
                            lineno,
                            format!("centering must be `centered` or `weak`, got `{other}`"),
                        ))
                    }
                };
                if centering.replace(value).is_some() {
                    return Err(syntax(lineno, "duplicate `centering` line".into()));
                }
            }
            "worlds" => {
                let list: Vec<String> = rest.split_whitespace().map(str::to_string).collect();
                if list.is_empty() {
                    return Err(syntax(lineno, "`worlds` line names no worlds".into()));
                }
                if list.len() > MAX_WORLDS {
                    return Err(syntax(
                        lineno,
                        format!("at most {MAX_WORLDS} worlds are supported"),
                    ));
                }
                let mut sorted = list.clone();
                sorted.sort();
                sorted.dedup();
                if sorted.len() != list.len() {
                    return Err(syntax(lineno, "duplicate world name".into()));
                }
                if names.replace(list).is_some() {
                    return Err(syntax(lineno, "duplicate `worlds` line".into()));
                }
            }
            _ if head.starts_with("val ") || head == "val" => {
                let atom = head.strip_prefix("val").unwrap().trim();
                if atom.is_empty() {
                    return Err(syntax(lineno, "`val` line names no atom".into()));
                }
                if valuation.contains_key(atom) {
                    return Err(syntax(lineno, format!("duplicate `val {atom}` line")));
                }
                valuation.insert(atom.to_string(), WorldSet::EMPTY);
                sphere_lines.push((lineno, format!("val {atom}"), rest.to_string()));
            }
            _ if head.starts_with("spheres ") => {
                let world = head.strip_prefix("spheres").unwrap().trim().to_string();
                sphere_lines.push((lineno, format!("spheres {world}"), rest.to_string()));
            }
            other => {
                return Err(syntax(lineno, format!("unknown directive `{other}`")));
            }
        }
    }

    let centering =
        centering.ok_or_else(|| syntax(0, "missing `centering` line".to_string()))?;
    let names = names.ok_or_else(|| syntax(0, "missing `worlds` line".to_string()))?;

    let lookup = |lineno: usize, name: &str| -> Result<World, ModelError> {
        names
            .iter()
            .position(|n| n == name)
            .map(World)
            .ok_or_else(|| syntax(lineno, format!("unknown world `{name}`")))
    };

    let mut systems: Vec<Option<SphereSystem>> = vec![None; names.len()];
    for (lineno, head, rest) in sphere_lines {
        if let Some(atom) = head.strip_prefix("val ") {
            let mut ext = WorldSet::EMPTY;
            for name in rest.split_whitespace() {
                ext.insert(lookup(lineno, name)?);
            }
            valuation.insert(atom.to_string(), ext);
        } else if let Some(world) = head.strip_prefix("spheres ") {
            let w = lookup(lineno, world)?;
            let spheres = parse_sphere_list(lineno, &rest, &|n| lookup(lineno, n))?;
            // Duplicate spheres are a presentation artifact; the strictly
            // increasing chain is the canonical form.
            let system = SphereSystem::new(spheres).collapsed();
            if systems[w.0].replace(system).is_some() {
                return Err(syntax(lineno, format!("duplicate `spheres {world}` line")));
            }
        }
    }

    let mut missing = Vec::new();
    let mut resolved = Vec::with_capacity(names.len());
    for (i, sys) in systems.into_iter().enumerate() {
        match sys {
            Some(sys) => resolved.push(sys),
            None => missing.push(names[i].clone()),
        }
    }
    if !missing.is_empty() {
        return Err(syntax(
            0,
            format!("missing `spheres` line for: {}", missing.join(", ")),
        ));
    }

    let model = SphereModel { names, valuation, systems: resolved, centering };
    model.validate()?;
    Ok(model)
}

fn parse_sphere_list(
    lineno: usize,
    rest: &str,
    lookup: &dyn Fn(&str) -> Result<World, ModelError>,
) -> Result<Vec<WorldSet>, ModelError> {
    let syntax = |message: String| ModelError::Syntax { line: lineno, message };
    let mut spheres = Vec::new();
    let mut chars = rest.char_indices().peekable();
    while let Some(&(start, ch)) = chars.peek() {
        if ch.is_whitespace() {
            chars.next();
            continue;
        }
        if ch != '{' {
            return Err(syntax(format!("expected `{{`, got `{}`", &rest[start..])));
        }
        chars.next();
        let mut end = None;
        for (i, c) in chars.by_ref() {
            if c == '}' {
                end = Some(i);
                break;
            }
        }
        let end = end.ok_or_else(|| syntax("unterminated `{`".to_string()))?;
        let mut set = WorldSet::EMPTY;
        for name in rest[start + 1..end].split_whitespace() {
            set.insert(lookup(name)?);
        }
        spheres.push(set);
    }
    if spheres.is_empty() {
        return Err(syntax("sphere list is empty".to_string()));
    }
    Ok(spheres)
}

/// Renders a model back into the text format accepted by [`load_model`].
pub fn save_model(model: &SphereModel) -> String {
    let mut out = String::new();
    out.push_str(&format!("centering: {}\n", model.centering));
    out.push_str(&format!("worlds: {}\n", model.names.join(" ")));
    for (atom, ext) in &model.valuation {
        let names: Vec<&str> = ext.iter().map(|w| model.name(w)).collect();
        out.push_str(&format!("val {atom}: {}\n", names.join(" ")));
    }
    for w in model.worlds() {
        let spheres: Vec<String> = model
            .system(w)
            .spheres
            .iter()
            .map(|s| model.format_worlds(*s))
            .collect();
        out.push_str(&format!("spheres {}: {}\n", model.name(w), spheres.join(" ")));
    }
    out
}
