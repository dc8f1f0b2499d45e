//! Formula AST, concrete syntax, duals and the counterfactual /
//! comparative-plausibility rewrites.
//!
//! The primitive connectives are atoms, falsum, implication and the two
//! modal families (the ceteris paribus counterfactual `A =>[G] B` and the
//! ceteris paribus comparative plausibility `A <=[G] B`). Negation,
//! conjunction, disjunction, verum and the possibility operator are sugar
//! that expands to primitives at construction time, so structural equality
//! is equality of the expanded trees.

use std::fmt;

use thiserror::Error;

/// A formula of the ceteris paribus conditional language.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Atom(String),
    Falsum,
    Implies(Box<Formula>, Box<Formula>),
    /// `A =>[G] B`: if A were the case, all things in G being equal, B would be.
    CpCounterfactual(Box<Formula>, CpSet, Box<Formula>),
    /// `A <=[G] B`: all things in G being equal, A is at least as plausible as B.
    CpPlausibility(Box<Formula>, CpSet, Box<Formula>),
}

impl Formula {
    pub fn atom(name: impl Into<String>) -> Formula {
        Formula::Atom(name.into())
    }

    pub fn falsum() -> Formula {
        Formula::Falsum
    }

    /// `true`, expanded as `false -> false`.
    pub fn top() -> Formula {
        Formula::implies(Formula::Falsum, Formula::Falsum)
    }

    pub fn implies(lhs: Formula, rhs: Formula) -> Formula {
        Formula::Implies(Box::new(lhs), Box::new(rhs))
    }

    /// `~A`, expanded as `A -> false`.
    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::implies(f, Formula::Falsum)
    }

    /// `A & B`, expanded as `~(A -> ~B)`.
    pub fn and(lhs: Formula, rhs: Formula) -> Formula {
        Formula::not(Formula::implies(lhs, Formula::not(rhs)))
    }

    /// `A | B`, expanded as `~A -> B`.
    pub fn or(lhs: Formula, rhs: Formula) -> Formula {
        Formula::implies(Formula::not(lhs), rhs)
    }

    pub fn cf(antecedent: Formula, cpset: CpSet, consequent: Formula) -> Formula {
        Formula::CpCounterfactual(Box::new(antecedent), cpset, Box::new(consequent))
    }

    pub fn pl(lhs: Formula, cpset: CpSet, rhs: Formula) -> Formula {
        Formula::CpPlausibility(Box::new(lhs), cpset, Box::new(rhs))
    }

    /// Plain Lewis counterfactual (empty cp-set).
    pub fn lewis_cf(antecedent: Formula, consequent: Formula) -> Formula {
        Formula::cf(antecedent, CpSet::empty(), consequent)
    }

    /// Plain Lewis comparative plausibility (empty cp-set).
    pub fn lewis_pl(lhs: Formula, rhs: Formula) -> Formula {
        Formula::pl(lhs, CpSet::empty(), rhs)
    }

    /// `<>A`, expanded as `~(false <=[] A)`.
    pub fn diamond(f: Formula) -> Formula {
        Formula::not(Formula::lewis_pl(Formula::Falsum, f))
    }

    /// Conjunction of a list; the empty conjunction is `true`.
    pub fn conj(parts: impl IntoIterator<Item = Formula>) -> Formula {
        let mut iter = parts.into_iter();
        match iter.next() {
            None => Formula::top(),
            Some(first) => iter.fold(first, Formula::and),
        }
    }

    /// Disjunction of a list; the empty disjunction is `false`.
    pub fn disj(parts: impl IntoIterator<Item = Formula>) -> Formula {
        let mut iter = parts.into_iter();
        match iter.next() {
            None => Formula::Falsum,
            Some(first) => iter.fold(first, Formula::or),
        }
    }

    /// The dual of a formula: strips one outer negation when present,
    /// otherwise prefixes one. Involutive.
    pub fn dual(&self) -> Formula {
        match self {
            Formula::Implies(lhs, rhs) if **rhs == Formula::Falsum => (**lhs).clone(),
            other => Formula::not(other.clone()),
        }
    }

    /// Number of cp-connectives with non-empty cp-sets, counting inside
    /// cp-set members as well.
    pub fn cpl(&self) -> usize {
        match self {
            Formula::Atom(_) | Formula::Falsum => 0,
            Formula::Implies(lhs, rhs) => lhs.cpl() + rhs.cpl(),
            Formula::CpCounterfactual(lhs, cpset, rhs)
            | Formula::CpPlausibility(lhs, cpset, rhs) => {
                let own = usize::from(!cpset.is_empty());
                let inner: usize = cpset.members().iter().map(Formula::cpl).sum();
                own + inner + lhs.cpl() + rhs.cpl()
            }
        }
    }

    /// Number of connective nodes (atoms and falsum count zero).
    pub fn size(&self) -> usize {
        match self {
            Formula::Atom(_) | Formula::Falsum => 0,
            Formula::Implies(lhs, rhs) => 1 + lhs.size() + rhs.size(),
            Formula::CpCounterfactual(lhs, cpset, rhs)
            | Formula::CpPlausibility(lhs, cpset, rhs) => {
                let inner: usize = cpset.members().iter().map(Formula::size).sum();
                1 + inner + lhs.size() + rhs.size()
            }
        }
    }

    /// True when the formula contains no modal connective at all.
    pub fn is_propositional(&self) -> bool {
        match self {
            Formula::Atom(_) | Formula::Falsum => true,
            Formula::Implies(lhs, rhs) => lhs.is_propositional() && rhs.is_propositional(),
            _ => false,
        }
    }

    /// Atom names occurring in the formula, including inside cp-sets.
    pub fn atoms(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out.sort();
        out.dedup();
        out
    }

    fn collect_atoms(&self, out: &mut Vec<String>) {
        match self {
            Formula::Atom(name) => out.push(name.clone()),
            Formula::Falsum => {}
            Formula::Implies(lhs, rhs) => {
                lhs.collect_atoms(out);
                rhs.collect_atoms(out);
            }
            Formula::CpCounterfactual(lhs, cpset, rhs)
            | Formula::CpPlausibility(lhs, cpset, rhs) => {
                lhs.collect_atoms(out);
                rhs.collect_atoms(out);
                for member in cpset.members() {
                    member.collect_atoms(out);
                }
            }
        }
    }

    /// Replaces every counterfactual `A =>[G] B` by
    /// `(false <=[G] A) | ~((A & ~B) <=[G] (A & B))`, recursively,
    /// including inside cp-sets.
    pub fn rewrite_cf_to_pl(&self) -> Formula {
        match self {
            Formula::Atom(_) | Formula::Falsum => self.clone(),
            Formula::Implies(lhs, rhs) => {
                Formula::implies(lhs.rewrite_cf_to_pl(), rhs.rewrite_cf_to_pl())
            }
            Formula::CpCounterfactual(lhs, cpset, rhs) => {
                let a = lhs.rewrite_cf_to_pl();
                let b = rhs.rewrite_cf_to_pl();
                let g = cpset.map(Formula::rewrite_cf_to_pl);
                Formula::or(
                    Formula::pl(Formula::Falsum, g.clone(), a.clone()),
                    Formula::not(Formula::pl(
                        Formula::and(a.clone(), Formula::not(b.clone())),
                        g,
                        Formula::and(a, b),
                    )),
                )
            }
            Formula::CpPlausibility(lhs, cpset, rhs) => Formula::pl(
                lhs.rewrite_cf_to_pl(),
                cpset.map(Formula::rewrite_cf_to_pl),
                rhs.rewrite_cf_to_pl(),
            ),
        }
    }

    /// Replaces every comparative plausibility `A <=[G] B` by
    /// `((A | B) =>[G] false) | ((A | B) =>[G] ~A)`, recursively,
    /// including inside cp-sets.
    pub fn rewrite_pl_to_cf(&self) -> Formula {
        match self {
            Formula::Atom(_) | Formula::Falsum => self.clone(),
            Formula::Implies(lhs, rhs) => {
                Formula::implies(lhs.rewrite_pl_to_cf(), rhs.rewrite_pl_to_cf())
            }
            Formula::CpCounterfactual(lhs, cpset, rhs) => Formula::cf(
                lhs.rewrite_pl_to_cf(),
                cpset.map(Formula::rewrite_pl_to_cf),
                rhs.rewrite_pl_to_cf(),
            ),
            Formula::CpPlausibility(lhs, cpset, rhs) => {
                let a = lhs.rewrite_pl_to_cf();
                let b = rhs.rewrite_pl_to_cf();
                let g = cpset.map(Formula::rewrite_pl_to_cf);
                let either = Formula::or(a.clone(), b);
                Formula::or(
                    Formula::cf(either.clone(), g.clone(), Formula::Falsum),
                    Formula::not(Formula::cf(either, g, Formula::not(a))),
                )
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_prec(self, Prec::Modal, f)
    }
}

/// A finite ceteris paribus set of formulas.
///
/// Members are kept canonically sorted by printed form with duplicates
/// removed, so equality and hashing are deterministic. Pairedness (closure
/// under duals) is a property checked at evaluation time, not here.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct CpSet {
    members: Vec<Formula>,
}

impl CpSet {
    pub fn new(members: impl IntoIterator<Item = Formula>) -> CpSet {
        let mut members: Vec<Formula> = members.into_iter().collect();
        members.sort_by(|a, b| a.to_string().cmp(&b.to_string()).then_with(|| a.cmp(b)));
        members.dedup();
        CpSet { members }
    }

    pub fn empty() -> CpSet {
        CpSet::default()
    }

    /// The paired set `{A, ~A, B, ~B, ...}` over the given formulas.
    pub fn paired(seed: impl IntoIterator<Item = Formula>) -> CpSet {
        let mut members = Vec::new();
        for f in seed {
            members.push(f.dual());
            members.push(f);
        }
        CpSet::new(members)
    }

    pub fn members(&self) -> &[Formula] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, f: &Formula) -> bool {
        self.members.contains(f)
    }

    /// True iff the dual of every member is also a member.
    pub fn is_paired(&self) -> bool {
        self.members.iter().all(|m| self.contains(&m.dual()))
    }

    pub fn is_subset(&self, other: &CpSet) -> bool {
        self.members.iter().all(|m| other.contains(m))
    }

    /// Set difference `self \ other`.
    pub fn difference(&self, other: &CpSet) -> CpSet {
        CpSet::new(self.members.iter().filter(|m| !other.contains(m)).cloned())
    }

    pub fn union(&self, other: &CpSet) -> CpSet {
        CpSet::new(self.members.iter().chain(other.members.iter()).cloned())
    }

    fn map(&self, f: impl Fn(&Formula) -> Formula) -> CpSet {
        CpSet::new(self.members.iter().map(f))
    }
}

impl fmt::Display for CpSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, member) in self.members.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{member}")?;
        }
        Ok(())
    }
}

/// Convenience free function mirroring the operation vocabulary.
pub fn dual(f: &Formula) -> Formula {
    f.dual()
}

pub fn is_paired(g: &CpSet) -> bool {
    g.is_paired()
}

pub fn cpl(f: &Formula) -> usize {
    f.cpl()
}

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Prec {
    Modal,
    Implies,
    Or,
    And,
    Not,
}

/// Recognized sugar patterns, from most to least specific.
enum Shape<'a> {
    Top,
    And(&'a Formula, &'a Formula),
    Not(&'a Formula),
    Or(&'a Formula, &'a Formula),
    Implies(&'a Formula, &'a Formula),
}

fn shape(f: &Formula) -> Option<Shape<'_>> {
    let Formula::Implies(lhs, rhs) = f else {
        return None;
    };
    if **rhs == Formula::Falsum {
        if **lhs == Formula::Falsum {
            return Some(Shape::Top);
        }
        // `~(a -> ~b)` prints as `a & b`.
        if let Formula::Implies(a, inner) = &**lhs {
            if let Formula::Implies(b, falsum) = &**inner {
                if **falsum == Formula::Falsum {
                    return Some(Shape::And(a, b));
                }
            }
        }
        return Some(Shape::Not(lhs));
    }
    // `~a -> b` prints as `a | b`.
    if let Formula::Implies(a, falsum) = &**lhs {
        if **falsum == Formula::Falsum {
            return Some(Shape::Or(a, rhs));
        }
    }
    Some(Shape::Implies(lhs, rhs))
}

fn write_prec(f: &Formula, min: Prec, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    match f {
        Formula::Atom(name) => write!(out, "{name}"),
        Formula::Falsum => write!(out, "false"),
        Formula::Implies(..) => match shape(f).expect("implication shape") {
            Shape::Top => write!(out, "true"),
            Shape::And(a, b) => paren(min > Prec::And, out, |out| {
                write_prec(a, Prec::And, out)?;
                write!(out, " & ")?;
                write_prec(b, Prec::Not, out)
            }),
            Shape::Not(a) => paren(min > Prec::Not, out, |out| {
                write!(out, "~")?;
                write_prec(a, Prec::Not, out)
            }),
            Shape::Or(a, b) => paren(min > Prec::Or, out, |out| {
                write_prec(a, Prec::Or, out)?;
                write!(out, " | ")?;
                write_prec(b, Prec::And, out)
            }),
            Shape::Implies(a, b) => paren(min > Prec::Implies, out, |out| {
                write_prec(a, Prec::Or, out)?;
                write!(out, " -> ")?;
                write_prec(b, Prec::Implies, out)
            }),
        },
        Formula::CpCounterfactual(a, g, b) => paren(min > Prec::Modal, out, |out| {
            write_prec(a, Prec::Implies, out)?;
            write!(out, " =>[{g}] ")?;
            write_prec(b, Prec::Implies, out)
        }),
        Formula::CpPlausibility(a, g, b) => paren(min > Prec::Modal, out, |out| {
            write_prec(a, Prec::Implies, out)?;
            write!(out, " <=[{g}] ")?;
            write_prec(b, Prec::Implies, out)
        }),
    }
}

fn paren(
    needed: bool,
    out: &mut fmt::Formatter<'_>,
    body: impl FnOnce(&mut fmt::Formatter<'_>) -> fmt::Result,
) -> fmt::Result {
    if needed {
        write!(out, "(")?;
        body(out)?;
        write!(out, ")")
    } else {
        body(out)
    }
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

#[derive(Debug, Error, PartialEq, Eq)]
#[error("syntax error at {line}:{col}: {message} (expected {})", expected.join(", "))]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
    pub expected: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    False,
    True,
    Tilde,
    Amp,
    Pipe,
    Arrow,
    CfArrow, // =>
    PlArrow, // <=
    LBracket,
    RBracket,
    Comma,
    LParen,
    RParen,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::False => write!(f, "`false`"),
            Tok::True => write!(f, "`true`"),
            Tok::Tilde => write!(f, "`~`"),
            Tok::Amp => write!(f, "`&`"),
            Tok::Pipe => write!(f, "`|`"),
            Tok::Arrow => write!(f, "`->`"),
            Tok::CfArrow => write!(f, "`=>`"),
            Tok::PlArrow => write!(f, "`<=`"),
            Tok::LBracket => write!(f, "`[`"),
            Tok::RBracket => write!(f, "`]`"),
            Tok::Comma => write!(f, "`,`"),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src, pos: 0, line: 1, col: 1 }
    }

    fn error(&self, message: impl Into<String>, expected: &[&str]) -> ParseError {
        ParseError {
            line: self.line,
            col: self.col,
            message: message.into(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn bump(&mut self, len: usize) {
        for ch in self.src[self.pos..self.pos + len].chars() {
            if ch == '\n' {
                self.line += 1;
                self.col = 1;
            } else {
                self.col += 1;
            }
        }
        self.pos += len;
    }

    fn next_token(&mut self) -> Result<(Tok, usize, usize), ParseError> {
        loop {
            let rest = &self.src[self.pos..];
            let Some(ch) = rest.chars().next() else {
                return Ok((Tok::Eof, self.line, self.col));
            };
            if ch.is_whitespace() {
                self.bump(ch.len_utf8());
                continue;
            }
            let (line, col) = (self.line, self.col);
            let tok = match ch {
                '~' => Some((Tok::Tilde, 1)),
                '&' => Some((Tok::Amp, 1)),
                '|' => Some((Tok::Pipe, 1)),
                '[' => Some((Tok::LBracket, 1)),
                ']' => Some((Tok::RBracket, 1)),
                ',' => Some((Tok::Comma, 1)),
                '(' => Some((Tok::LParen, 1)),
                ')' => Some((Tok::RParen, 1)),
                '-' if rest.starts_with("->") => Some((Tok::Arrow, 2)),
                '=' if rest.starts_with("=>") => Some((Tok::CfArrow, 2)),
                '<' if rest.starts_with("<=") => Some((Tok::PlArrow, 2)),
                c if c.is_ascii_alphabetic() || c == '_' => {
                    let len = rest
                        .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
                        .unwrap_or(rest.len());
                    let word = &rest[..len];
                    let tok = match word {
                        "false" => Tok::False,
                        "true" => Tok::True,
                        _ => Tok::Ident(word.to_string()),
                    };
                    Some((tok, len))
                }
                _ => None,
            };
            let Some((tok, len)) = tok else {
                let bad: String = rest.chars().take_while(|c| !c.is_whitespace()).collect();
                return Err(self.error(
                    format!("unknown token `{bad}`"),
                    &["identifier", "`false`", "`true`", "`~`", "`(`"],
                ));
            };
            self.bump(len);
            return Ok((tok, line, col));
        }
    }
}

struct Parser {
    tokens: Vec<(Tok, usize, usize)>,
    index: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.index].0
    }

    fn advance(&mut self) -> Tok {
        let tok = self.tokens[self.index].0.clone();
        if self.index + 1 < self.tokens.len() {
            self.index += 1;
        }
        tok
    }

    fn error_here(&self, message: impl Into<String>, expected: &[&str]) -> ParseError {
        let (tok, line, col) = &self.tokens[self.index];
        ParseError {
            line: *line,
            col: *col,
            message: format!("{}: found {tok}", message.into()),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn expect(&mut self, want: Tok, expected: &[&str]) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.advance();
            Ok(())
        } else {
            Err(self.error_here("unexpected token", expected))
        }
    }

    /// Modal level: non-associative, lowest precedence.
    fn formula(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.implication()?;
        let cf = match self.peek() {
            Tok::CfArrow => true,
            Tok::PlArrow => false,
            _ => return Ok(lhs),
        };
        self.advance();
        self.expect(Tok::LBracket, &["`[`"])?;
        let mut members = Vec::new();
        if *self.peek() != Tok::RBracket {
            loop {
                members.push(self.formula()?);
                if *self.peek() == Tok::Comma {
                    self.advance();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RBracket, &["`]`", "`,`"])?;
        let rhs = self.implication()?;
        if matches!(self.peek(), Tok::CfArrow | Tok::PlArrow) {
            return Err(self.error_here(
                "modal operators are non-associative; parenthesize nested modal operands",
                &["`)`", "end of input"],
            ));
        }
        let cpset = CpSet::new(members);
        Ok(if cf { Formula::cf(lhs, cpset, rhs) } else { Formula::pl(lhs, cpset, rhs) })
    }

    /// `->`, right-associative.
    fn implication(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.disjunction()?;
        if *self.peek() == Tok::Arrow {
            self.advance();
            let rhs = self.implication()?;
            Ok(Formula::implies(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.conjunction()?;
        while *self.peek() == Tok::Pipe {
            self.advance();
            let rhs = self.conjunction()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.unary()?;
        while *self.peek() == Tok::Amp {
            self.advance();
            let rhs = self.unary()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.advance() {
            Tok::Tilde => Ok(Formula::not(self.unary()?)),
            Tok::False => Ok(Formula::Falsum),
            Tok::True => Ok(Formula::top()),
            Tok::Ident(name) => Ok(Formula::Atom(name)),
            Tok::LParen => {
                let inner = self.formula()?;
                self.expect(Tok::RParen, &["`)`"])?;
                Ok(inner)
            }
            _ => {
                self.index -= 1;
                Err(self.error_here(
                    "expected a formula",
                    &["identifier", "`false`", "`true`", "`~`", "`(`"],
                ))
            }
        }
    }
}

/// Parses a comma-separated list of formulas into a [`CpSet`]. Blank
/// input gives the empty set.
pub fn parse_cp_set(source: &str) -> Result<CpSet, ParseError> {
    if source.trim().is_empty() {
        return Ok(CpSet::empty());
    }
    // Wrap the list in a throwaway modal formula to reuse the grammar.
    match parse(&format!("false =>[{source}] false"))? {
        Formula::CpCounterfactual(_, set, _) => Ok(set),
        _ => unreachable!("wrapper parses to a counterfactual"),
    }
}

/// Parses the ASCII concrete syntax into a [`Formula`].
pub fn parse(source: &str) -> Result<Formula, ParseError> {
    let mut lexer = Lexer::new(source);
    let mut tokens = Vec::new();
    loop {
        let (tok, line, col) = lexer.next_token()?;
        let eof = tok == Tok::Eof;
        tokens.push((tok, line, col));
        if eof {
            break;
        }
    }
    let mut parser = Parser { tokens, index: 0 };
    let formula = parser.formula()?;
    if *parser.peek() != Tok::Eof {
        return Err(parser.error_here("trailing input after formula", &["end of input"]));
    }
    Ok(formula)
}
