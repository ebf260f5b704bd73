//! Syntax objects: roles, concepts, axioms, ontologies, databases and
//! (unions of) conjunctive queries.

use std::borrow::Borrow;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::graphalg::Graph;

/// An interned identifier: concept name, role name, constant or variable.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Name(Arc<str>);

impl Name {
    pub fn new(s: &str) -> Self {
        Name(Arc::from(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Name {
    fn from(s: &str) -> Self {
        Name::new(s)
    }
}

impl From<String> for Name {
    fn from(s: String) -> Self {
        Name(Arc::from(s))
    }
}

impl std::ops::Deref for Name {
    type Target = str;

    fn deref(&self) -> &str {
        &self.0
    }
}

impl Borrow<str> for Name {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Deterministic supply of names that avoid a reserved set.
#[derive(Clone, Debug)]
pub struct Fresh {
    prefix: String,
    next: usize,
    used: BTreeSet<Name>,
}

impl Fresh {
    pub fn new(prefix: &str, used: impl IntoIterator<Item = Name>) -> Self {
        Fresh { prefix: prefix.to_string(), next: 0, used: used.into_iter().collect() }
    }

    pub fn next(&mut self) -> Name {
        loop {
            self.next += 1;
            let candidate = Name::from(format!("{}{}", self.prefix, self.next));
            if self.used.insert(candidate.clone()) {
                return candidate;
            }
        }
    }

    pub fn reserve(&mut self, name: Name) {
        self.used.insert(name);
    }
}

/// A role name or the inverse of one.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Role {
    pub name: Name,
    pub inverse: bool,
}

impl Role {
    pub fn new(name: impl Into<Name>) -> Self {
        Role { name: name.into(), inverse: false }
    }

    pub fn inv_of(name: impl Into<Name>) -> Self {
        Role { name: name.into(), inverse: true }
    }

    pub fn inv(&self) -> Role {
        Role { name: self.name.clone(), inverse: !self.inverse }
    }

    /// Orient an edge `(from, to)` along this role into a database atom.
    pub fn atom(&self, from: Name, to: Name) -> Atom {
        if self.inverse {
            Atom::Binary(self.name.clone(), to, from)
        } else {
            Atom::Binary(self.name.clone(), from, to)
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.inverse {
            write!(f, "inv({})", self.name)
        } else {
            write!(f, "{}", self.name)
        }
    }
}

impl fmt::Debug for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Concept {
    Top,
    Bot,
    Atomic(Name),
    /// Flattened, sorted, duplicate free, at least two conjuncts.
    Conj(Vec<Concept>),
    Exists(Role, Box<Concept>),
}

impl Concept {
    pub fn atomic(name: impl Into<Name>) -> Self {
        Concept::Atomic(name.into())
    }

    pub fn exists(role: Role, filler: Concept) -> Self {
        Concept::Exists(role, Box::new(filler))
    }

    /// Conjunction with flattening, sorting and removal of `top`.
    pub fn conj(parts: impl IntoIterator<Item = Concept>) -> Self {
        let mut flat = BTreeSet::new();
        for p in parts {
            match p {
                Concept::Top => {}
                Concept::Conj(cs) => flat.extend(cs),
                other => {
                    flat.insert(other);
                }
            }
        }
        let mut flat: Vec<Concept> = flat.into_iter().collect();
        match flat.len() {
            0 => Concept::Top,
            1 => flat.pop().unwrap(),
            _ => Concept::Conj(flat),
        }
    }

    pub fn has_inverse(&self) -> bool {
        match self {
            Concept::Exists(r, c) => r.inverse || c.has_inverse(),
            Concept::Conj(cs) => cs.iter().any(Concept::has_inverse),
            _ => false,
        }
    }

    pub fn has_bot(&self) -> bool {
        match self {
            Concept::Bot => true,
            Concept::Exists(_, c) => c.has_bot(),
            Concept::Conj(cs) => cs.iter().any(Concept::has_bot),
            _ => false,
        }
    }

    /// `A`, `top`, `bot`, `exists r . top` or `exists inv(r) . top`.
    pub fn is_basic(&self) -> bool {
        match self {
            Concept::Top | Concept::Bot | Concept::Atomic(_) => true,
            Concept::Exists(_, c) => **c == Concept::Top,
            _ => false,
        }
    }

    /// Conjuncts of this concept (a non-conjunction is its own single conjunct).
    pub fn conjuncts(&self) -> Vec<&Concept> {
        match self {
            Concept::Conj(cs) => cs.iter().collect(),
            Concept::Top => vec![],
            c => vec![c],
        }
    }

    pub fn subconcepts(&self, out: &mut BTreeSet<Concept>) {
        out.insert(self.clone());
        match self {
            Concept::Conj(cs) => cs.iter().for_each(|c| c.subconcepts(out)),
            Concept::Exists(_, c) => c.subconcepts(out),
            _ => {}
        }
    }

    pub fn names(&self, concepts: &mut BTreeSet<Name>, roles: &mut BTreeSet<Name>) {
        match self {
            Concept::Atomic(a) => {
                concepts.insert(a.clone());
            }
            Concept::Conj(cs) => cs.iter().for_each(|c| c.names(concepts, roles)),
            Concept::Exists(r, c) => {
                roles.insert(r.name.clone());
                c.names(concepts, roles);
            }
            _ => {}
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, tight: bool) -> fmt::Result {
        match self {
            Concept::Top => f.write_str("top"),
            Concept::Bot => f.write_str("bot"),
            Concept::Atomic(a) => write!(f, "{a}"),
            Concept::Conj(cs) => {
                if tight {
                    f.write_str("(")?;
                }
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" & ")?;
                    }
                    c.fmt_prec(f, true)?;
                }
                if tight {
                    f.write_str(")")?;
                }
                Ok(())
            }
            Concept::Exists(r, c) => {
                write!(f, "exists {r} . ")?;
                c.fmt_prec(f, true)
            }
        }
    }
}

impl fmt::Display for Concept {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, false)
    }
}

impl fmt::Debug for Concept {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Axiom {
    ConceptInclusion(Concept, Concept),
    RoleInclusion(Role, Role),
    /// `exists inv(r) . top <= C`
    RangeRestriction(Name, Concept),
    RoleDisjointness(Vec<Name>),
    Functionality(Name),
    /// `B1 & ... & Bn <= B` over basic concepts.
    HornConceptInclusion(Vec<Concept>, Concept),
}

impl Axiom {
    /// The axiom as a concept inclusion, if it is one of the concept-level forms.
    pub fn as_inclusion(&self) -> Option<(Concept, Concept)> {
        match self {
            Axiom::ConceptInclusion(c, d) => Some((c.clone(), d.clone())),
            Axiom::RangeRestriction(r, c) => {
                Some((Concept::exists(Role::inv_of(r.clone()), Concept::Top), c.clone()))
            }
            Axiom::HornConceptInclusion(lhs, rhs) => {
                Some((Concept::conj(lhs.iter().cloned()), rhs.clone()))
            }
            _ => None,
        }
    }

    pub fn names(&self, concepts: &mut BTreeSet<Name>, roles: &mut BTreeSet<Name>) {
        match self {
            Axiom::RoleInclusion(r, s) => {
                roles.insert(r.name.clone());
                roles.insert(s.name.clone());
            }
            Axiom::RoleDisjointness(rs) => roles.extend(rs.iter().cloned()),
            Axiom::Functionality(r) => {
                roles.insert(r.clone());
            }
            Axiom::RangeRestriction(r, c) => {
                roles.insert(r.clone());
                c.names(concepts, roles);
            }
            Axiom::ConceptInclusion(..) | Axiom::HornConceptInclusion(..) => {
                let (c, d) = self.as_inclusion().unwrap();
                c.names(concepts, roles);
                d.names(concepts, roles);
            }
        }
    }
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axiom::ConceptInclusion(c, d) => write!(f, "{c} <= {d}"),
            Axiom::RoleInclusion(r, s) => write!(f, "{r} <= {s}"),
            Axiom::RangeRestriction(r, c) => write!(f, "range {r} <= {c}"),
            Axiom::RoleDisjointness(rs) => {
                let names: Vec<&str> = rs.iter().map(Name::as_str).collect();
                write!(f, "disjoint-roles {}", names.join(", "))
            }
            Axiom::Functionality(r) => write!(f, "func {r}"),
            Axiom::HornConceptInclusion(lhs, rhs) => {
                write!(f, "{} <= {rhs}", Concept::conj(lhs.iter().cloned()))
            }
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Dialect {
    El,
    ElBot,
    ElhBot,
    ElhdrBot,
    Eli,
    EliBot,
    ElhiBot,
    DlLiteR,
    DlLiteRHorn,
    DlLiteF,
    DlLiteFEq,
}

impl Dialect {
    pub const ALL: [Dialect; 11] = [
        Dialect::El,
        Dialect::ElBot,
        Dialect::ElhBot,
        Dialect::ElhdrBot,
        Dialect::Eli,
        Dialect::EliBot,
        Dialect::ElhiBot,
        Dialect::DlLiteFEq,
        Dialect::DlLiteR,
        Dialect::DlLiteRHorn,
        Dialect::DlLiteF,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Dialect::El => "EL",
            Dialect::ElBot => "EL_bot",
            Dialect::ElhBot => "ELH_bot",
            Dialect::ElhdrBot => "ELHdr_bot",
            Dialect::Eli => "ELI",
            Dialect::EliBot => "ELI_bot",
            Dialect::ElhiBot => "ELHI_bot",
            Dialect::DlLiteR => "DL-Lite-R",
            Dialect::DlLiteRHorn => "DL-Lite-R-horn",
            Dialect::DlLiteF => "DL-Lite-F",
            Dialect::DlLiteFEq => "DL-Lite-F-eq",
        }
    }

    pub fn from_name(s: &str) -> Option<Dialect> {
        Dialect::ALL.into_iter().find(|d| d.name().eq_ignore_ascii_case(s))
    }

    pub fn is_dllite(self) -> bool {
        matches!(self, Dialect::DlLiteR | Dialect::DlLiteRHorn | Dialect::DlLiteF | Dialect::DlLiteFEq)
    }

    /// Member of the EL family that lives inside ELHI_bot.
    pub fn is_horn_el(self) -> bool {
        !self.is_dllite()
    }

    fn admits_inclusion(self, c: &Concept, d: &Concept) -> bool {
        let basic_lhs = |c: &Concept, conj: bool| {
            if conj {
                c.conjuncts().iter().all(|x| x.is_basic() && **x != Concept::Bot)
            } else {
                c.is_basic() && *c != Concept::Bot
            }
        };
        let rhs_basic = d.is_basic();
        match self {
            Dialect::El => !c.has_inverse() && !d.has_inverse() && !c.has_bot() && !d.has_bot(),
            Dialect::ElBot | Dialect::ElhBot => !c.has_inverse() && !d.has_inverse(),
            Dialect::ElhdrBot => {
                let range = matches!(c, Concept::Exists(r, f) if r.inverse && **f == Concept::Top);
                (range || !c.has_inverse()) && !d.has_inverse()
            }
            Dialect::Eli => !c.has_bot() && !d.has_bot(),
            Dialect::EliBot | Dialect::ElhiBot => true,
            Dialect::DlLiteR => {
                (basic_lhs(c, false) && rhs_basic) || (basic_lhs(c, true) && *d == Concept::Bot)
            }
            Dialect::DlLiteRHorn => basic_lhs(c, true) && rhs_basic,
            Dialect::DlLiteF => {
                (basic_lhs(c, false) && rhs_basic) || (basic_lhs(c, true) && *d == Concept::Bot)
            }
            Dialect::DlLiteFEq => false,
        }
    }

    pub fn admits(self, axiom: &Axiom) -> bool {
        match axiom {
            Axiom::ConceptInclusion(..) | Axiom::HornConceptInclusion(..) | Axiom::RangeRestriction(..) => {
                let (c, d) = axiom.as_inclusion().unwrap();
                if matches!(axiom, Axiom::RangeRestriction(..))
                    && matches!(self, Dialect::El | Dialect::ElBot | Dialect::ElhBot)
                {
                    return false;
                }
                self.admits_inclusion(&c, &d)
            }
            Axiom::RoleInclusion(r, s) => match self {
                Dialect::ElhBot | Dialect::ElhdrBot => !r.inverse && !s.inverse,
                Dialect::ElhiBot | Dialect::DlLiteR | Dialect::DlLiteRHorn => true,
                _ => false,
            },
            Axiom::RoleDisjointness(_) => {
                matches!(self, Dialect::DlLiteR | Dialect::DlLiteRHorn | Dialect::DlLiteF)
            }
            Axiom::Functionality(_) => matches!(self, Dialect::DlLiteF | Dialect::DlLiteFEq),
        }
    }
}

impl fmt::Display for Dialect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Ontology {
    pub dialect: Dialect,
    pub axioms: Vec<Axiom>,
}

impl Ontology {
    pub fn empty() -> Self {
        Ontology { dialect: Dialect::El, axioms: vec![] }
    }

    /// Build an ontology in a declared dialect, rejecting axioms it does not admit.
    pub fn new(dialect: Dialect, axioms: Vec<Axiom>) -> Result<Self> {
        let o = Ontology { dialect, axioms: normalize_horn_form(dialect, axioms) };
        check_dialect(&o, dialect)?;
        Ok(o)
    }

    /// Build an ontology tagged with the least dialect admitting all axioms.
    pub fn infer(axioms: Vec<Axiom>) -> Result<Self> {
        for d in Dialect::ALL {
            if axioms.iter().all(|a| d.admits(a)) {
                return Ok(Ontology { dialect: d, axioms: normalize_horn_form(d, axioms) });
            }
        }
        let culprit = axioms.iter().find(|a| !Dialect::ElhiBot.admits(a)).unwrap();
        Err(Error::Dialect { axiom: culprit.to_string(), dialect: Dialect::ElhiBot })
    }

    pub fn concept_names(&self) -> BTreeSet<Name> {
        self.signature().0
    }

    pub fn role_names(&self) -> BTreeSet<Name> {
        self.signature().1
    }

    pub fn signature(&self) -> (BTreeSet<Name>, BTreeSet<Name>) {
        let mut c = BTreeSet::new();
        let mut r = BTreeSet::new();
        for a in &self.axioms {
            a.names(&mut c, &mut r);
        }
        (c, r)
    }

    /// Subconcepts of all concept-level axioms.
    pub fn sub(&self) -> BTreeSet<Concept> {
        let mut out = BTreeSet::new();
        for a in &self.axioms {
            if let Some((c, d)) = a.as_inclusion() {
                c.subconcepts(&mut out);
                d.subconcepts(&mut out);
            }
        }
        out
    }

    pub fn inclusions(&self) -> Vec<(Concept, Concept)> {
        self.axioms.iter().filter_map(Axiom::as_inclusion).collect()
    }

    pub fn role_inclusions(&self) -> Vec<(Role, Role)> {
        self.axioms
            .iter()
            .filter_map(|a| match a {
                Axiom::RoleInclusion(r, s) => Some((r.clone(), s.clone())),
                _ => None,
            })
            .collect()
    }

    pub fn disjoint_roles(&self) -> Vec<Vec<Name>> {
        self.axioms
            .iter()
            .filter_map(|a| match a {
                Axiom::RoleDisjointness(rs) => Some(rs.clone()),
                _ => None,
            })
            .collect()
    }

    pub fn functional_roles(&self) -> BTreeSet<Name> {
        self.axioms
            .iter()
            .filter_map(|a| match a {
                Axiom::Functionality(r) => Some(r.clone()),
                _ => None,
            })
            .collect()
    }

    pub fn with_axioms(&self, extra: impl IntoIterator<Item = Axiom>) -> Ontology {
        let mut axioms = self.axioms.clone();
        axioms.extend(extra);
        Ontology { dialect: Dialect::ElhiBot, axioms }
    }
}

/// DL-Lite dialects store basic-shaped inclusions as Horn inclusions.
fn normalize_horn_form(dialect: Dialect, axioms: Vec<Axiom>) -> Vec<Axiom> {
    if !dialect.is_dllite() {
        return axioms;
    }
    axioms
        .into_iter()
        .map(|a| match a {
            Axiom::ConceptInclusion(c, d) if d.is_basic() && c.conjuncts().iter().all(|x| x.is_basic()) => {
                Axiom::HornConceptInclusion(c.conjuncts().into_iter().cloned().collect(), d)
            }
            other => other,
        })
        .collect()
}

pub fn check_dialect(o: &Ontology, dialect: Dialect) -> Result<()> {
    match o.axioms.iter().find(|a| !dialect.admits(a)) {
        Some(a) => Err(Error::Dialect { axiom: a.to_string(), dialect }),
        None => Ok(()),
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Schema {
    pub full: bool,
    pub names: BTreeSet<Name>,
}

impl Schema {
    pub fn full() -> Self {
        Schema { full: true, names: BTreeSet::new() }
    }

    pub fn of(names: impl IntoIterator<Item = Name>) -> Self {
        Schema { full: false, names: names.into_iter().collect() }
    }

    pub fn contains(&self, name: &str) -> bool {
        self.full || self.names.contains(name)
    }

    /// A full schema as an explicit name set over the given signature, minus `drop`.
    pub fn full_minus(signature: impl IntoIterator<Item = Name>, drop: &[&str]) -> Self {
        Schema::of(signature.into_iter().filter(|n| !drop.contains(&n.as_str())))
    }
}

/// A unary or binary atom. Terms are constants in databases and variables in queries.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    Unary(Name, Name),
    Binary(Name, Name, Name),
}

impl Atom {
    pub fn unary(p: impl Into<Name>, a: impl Into<Name>) -> Self {
        Atom::Unary(p.into(), a.into())
    }

    pub fn binary(p: impl Into<Name>, a: impl Into<Name>, b: impl Into<Name>) -> Self {
        Atom::Binary(p.into(), a.into(), b.into())
    }

    pub fn pred(&self) -> &Name {
        match self {
            Atom::Unary(p, _) | Atom::Binary(p, _, _) => p,
        }
    }

    pub fn terms(&self) -> Vec<&Name> {
        match self {
            Atom::Unary(_, a) => vec![a],
            Atom::Binary(_, a, b) => vec![a, b],
        }
    }

    pub fn map_terms(&self, mut f: impl FnMut(&Name) -> Name) -> Atom {
        match self {
            Atom::Unary(p, a) => Atom::Unary(p.clone(), f(a)),
            Atom::Binary(p, a, b) => Atom::Binary(p.clone(), f(a), f(b)),
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            Atom::Unary(..) => 1,
            Atom::Binary(..) => 2,
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Unary(p, a) => write!(f, "{p}({a})"),
            Atom::Binary(p, a, b) => write!(f, "{p}({a},{b})"),
        }
    }
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Default, Debug)]
pub struct Database {
    pub facts: BTreeSet<Atom>,
}

impl Database {
    pub fn new() -> Self {
        Database::default()
    }

    /// Build a database, rejecting predicates used with two arities.
    pub fn from_facts(facts: impl IntoIterator<Item = Atom>) -> Result<Self> {
        let db = Database { facts: facts.into_iter().collect() };
        db.check_arities()?;
        Ok(db)
    }

    pub fn check_arities(&self) -> Result<()> {
        let mut seen: BTreeMap<&Name, usize> = BTreeMap::new();
        for f in &self.facts {
            let ar = *seen.entry(f.pred()).or_insert(f.arity());
            if ar != f.arity() {
                return Err(Error::InvalidDatabase(format!("predicate {} used with arities 1 and 2", f.pred())));
            }
        }
        Ok(())
    }

    pub fn insert(&mut self, fact: Atom) -> bool {
        self.facts.insert(fact)
    }

    pub fn contains(&self, fact: &Atom) -> bool {
        self.facts.contains(fact)
    }

    pub fn domain(&self) -> BTreeSet<Name> {
        self.facts.iter().flat_map(|f| f.terms().into_iter().cloned()).collect()
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    pub fn predicates(&self) -> BTreeSet<Name> {
        self.facts.iter().map(|f| f.pred().clone()).collect()
    }

    /// Facts over the constants in `consts`.
    pub fn induced(&self, consts: &BTreeSet<Name>) -> Database {
        Database {
            facts: self.facts.iter().filter(|f| f.terms().iter().all(|t| consts.contains(*t))).cloned().collect(),
        }
    }
}

impl fmt::Display for Database {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for fact in &self.facts {
            writeln!(f, "{fact}")?;
        }
        Ok(())
    }
}

/// A conjunctive query. `vars` lists every variable, including any answer
/// variable of a rooted concept query that occurs in no atom.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Cq {
    pub answer: Vec<Name>,
    pub atoms: Vec<Atom>,
    pub vars: BTreeSet<Name>,
}

impl Cq {
    /// Validated constructor used for user input.
    pub fn new(answer: Vec<Name>, atoms: Vec<Atom>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for x in &answer {
            if !seen.insert(x) {
                return Err(Error::InvalidQuery(format!("answer variable {x} repeated")));
            }
        }
        let q = Cq::from_parts(answer, atoms);
        let in_atoms: BTreeSet<&Name> = q.atoms.iter().flat_map(|a| a.terms()).collect();
        if let Some(x) = q.answer.iter().find(|x| !in_atoms.contains(x)) {
            return Err(Error::InvalidQuery(format!("answer variable {x} occurs in no atom")));
        }
        if q.atoms.is_empty() {
            return Err(Error::InvalidQuery("query has no atoms".into()));
        }
        Ok(q)
    }

    /// Unvalidated constructor: sorts and deduplicates atoms.
    pub fn from_parts(answer: Vec<Name>, atoms: Vec<Atom>) -> Self {
        let atoms: Vec<Atom> = atoms.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        let mut vars: BTreeSet<Name> = answer.iter().cloned().collect();
        for a in &atoms {
            vars.extend(a.terms().into_iter().cloned());
        }
        Cq { answer, atoms, vars }
    }

    pub fn boolean(atoms: Vec<Atom>) -> Self {
        Cq::from_parts(vec![], atoms)
    }

    pub fn arity(&self) -> usize {
        self.answer.len()
    }

    pub fn is_answer(&self, v: &str) -> bool {
        self.answer.iter().any(|a| a.as_str() == v)
    }

    pub fn quantified(&self) -> BTreeSet<Name> {
        self.vars.iter().filter(|v| !self.is_answer(v)).cloned().collect()
    }

    /// `|q|`: number of atoms plus number of variables.
    pub fn size(&self) -> usize {
        self.atoms.len() + self.vars.len()
    }

    /// Subquery induced by a variable set; answer variables outside it are dropped.
    pub fn restrict(&self, keep: &BTreeSet<Name>) -> Cq {
        let atoms = self.atoms.iter().filter(|a| a.terms().iter().all(|t| keep.contains(*t))).cloned().collect();
        let answer = self.answer.iter().filter(|x| keep.contains(*x)).cloned().collect();
        let mut q = Cq::from_parts(answer, atoms);
        q.vars = keep.clone();
        q
    }

    /// Apply a variable substitution.
    pub fn rename(&self, f: &BTreeMap<Name, Name>) -> Cq {
        let get = |v: &Name| f.get(v).cloned().unwrap_or_else(|| v.clone());
        let mut q = Cq::from_parts(
            self.answer.iter().map(get).collect(),
            self.atoms.iter().map(|a| a.map_terms(get)).collect(),
        );
        q.vars.extend(self.vars.iter().map(get));
        q
    }

    pub fn predicates(&self) -> BTreeSet<Name> {
        self.atoms.iter().map(|a| a.pred().clone()).collect()
    }

    /// Atoms mentioning `v`.
    pub fn atoms_of<'a>(&'a self, v: &'a Name) -> impl Iterator<Item = &'a Atom> + 'a {
        self.atoms.iter().filter(move |a| a.terms().contains(&v))
    }
}

impl fmt::Display for Cq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let head: Vec<&str> = self.answer.iter().map(Name::as_str).collect();
        let body: Vec<String> = self.atoms.iter().map(Atom::to_string).collect();
        write!(f, "q({}) :- {}", head.join(","), body.join(", "))
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Ucq {
    pub disjuncts: Vec<Cq>,
}

impl Ucq {
    pub fn new(disjuncts: Vec<Cq>) -> Result<Self> {
        let Some(first) = disjuncts.first() else {
            return Err(Error::InvalidQuery("a UCQ needs at least one disjunct".into()));
        };
        if disjuncts.iter().any(|d| d.arity() != first.arity()) {
            return Err(Error::InvalidQuery("disjuncts have different arities".into()));
        }
        Ok(Ucq { disjuncts })
    }

    pub fn single(q: Cq) -> Self {
        Ucq { disjuncts: vec![q] }
    }

    /// Arity of the first disjunct; 0 for the empty UCQ.
    pub fn arity(&self) -> usize {
        self.disjuncts.first().map_or(0, Cq::arity)
    }
}

impl fmt::Display for Ucq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in &self.disjuncts {
            writeln!(f, "{q}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct Omq {
    pub ontology: Ontology,
    pub schema: Schema,
    pub query: Ucq,
}

impl Omq {
    pub fn new(ontology: Ontology, schema: Schema, query: Ucq) -> Self {
        Omq { ontology, schema, query }
    }

    /// The same ontology and schema with a different query.
    pub fn with_query(&self, query: Ucq) -> Omq {
        Omq { ontology: self.ontology.clone(), schema: self.schema.clone(), query }
    }

    /// Concept and role names the schema may use, made explicit.
    pub fn schema_names(&self) -> BTreeSet<Name> {
        let (mut c, r) = self.ontology.signature();
        c.extend(r);
        for q in &self.query.disjuncts {
            c.extend(q.predicates());
        }
        if self.schema.full {
            c
        } else {
            self.schema.names.clone()
        }
    }
}

/// View a CQ as a database whose constants are its variables.
pub fn cq_as_database(q: &Cq) -> Database {
    Database { facts: q.atoms.iter().cloned().collect() }
}

pub fn gaifman_graph(q: &Cq) -> Graph<Name> {
    let mut g = Graph::new();
    for v in &q.vars {
        g.add_vertex(v.clone());
    }
    for a in &q.atoms {
        if let Atom::Binary(_, x, y) = a {
            g.add_edge(x, y);
        }
    }
    g
}

pub fn restrict_database(d: &Database, s: &Schema) -> Database {
    Database { facts: d.facts.iter().filter(|f| s.contains(f.pred())).cloned().collect() }
}

/// The tree-shaped CQ `q_C(root)` of an ELI concept; `fresh` supplies inner variables.
pub fn concept_as_cq(c: &Concept, root: &Name, fresh: &mut Fresh) -> Result<Cq> {
    let mut atoms = Vec::new();
    concept_atoms(c, root, fresh, &mut atoms)?;
    Ok(Cq::from_parts(vec![root.clone()], atoms))
}

fn concept_atoms(c: &Concept, x: &Name, fresh: &mut Fresh, out: &mut Vec<Atom>) -> Result<()> {
    match c {
        Concept::Top => Ok(()),
        Concept::Bot => Err(Error::Precondition("bot has no query counterpart".into())),
        Concept::Atomic(a) => {
            out.push(Atom::Unary(a.clone(), x.clone()));
            Ok(())
        }
        Concept::Conj(cs) => cs.iter().try_for_each(|d| concept_atoms(d, x, fresh, out)),
        Concept::Exists(r, d) => {
            let y = fresh.next();
            out.push(r.atom(x.clone(), y.clone()));
            concept_atoms(d, &y, fresh, out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conj_flattens_and_sorts() {
        let c = Concept::conj([
            Concept::atomic("B"),
            Concept::conj([Concept::atomic("A"), Concept::atomic("C")]),
            Concept::Top,
            Concept::atomic("A"),
        ]);
        assert_eq!(c.to_string(), "A & B & C");
    }

    #[test]
    fn concept_query_shapes() {
        let mut fresh = Fresh::new("y", []);
        let x = Name::new("x");
        let c = Concept::exists(Role::new("r"), Concept::atomic("A"));
        let q = concept_as_cq(&c, &x, &mut fresh).unwrap();
        assert_eq!(q.to_string(), "q(x) :- A(y1), r(x,y1)");
        let top = concept_as_cq(&Concept::Top, &x, &mut fresh).unwrap();
        assert_eq!(top.vars.len(), 1);
        assert!(top.atoms.is_empty());
        let inv = Concept::exists(Role::inv_of("r"), Concept::Top);
        let q = concept_as_cq(&inv, &x, &mut fresh).unwrap();
        assert_eq!(q.atoms, vec![Atom::binary("r", "y2", "x")]);
    }

    #[test]
    fn answer_variables_are_validated() {
        assert!(Cq::new(vec!["x".into()], vec![Atom::unary("A", "y")]).is_err());
        assert!(Cq::new(vec!["x".into(), "x".into()], vec![Atom::unary("A", "x")]).is_err());
        assert!(Cq::new(vec!["x".into()], vec![Atom::unary("A", "x")]).is_ok());
    }

    #[test]
    fn dialect_checks() {
        let inv = Axiom::ConceptInclusion(
            Concept::exists(Role::inv_of("r"), Concept::atomic("A")),
            Concept::atomic("B"),
        );
        let o = Ontology { dialect: Dialect::El, axioms: vec![inv.clone()] };
        assert!(check_dialect(&o, Dialect::El).is_err());
        assert!(check_dialect(&o, Dialect::Eli).is_ok());
        assert_eq!(Ontology::infer(vec![inv]).unwrap().dialect, Dialect::Eli);
        let sub = Axiom::ConceptInclusion(Concept::atomic("A"), Concept::atomic("B"));
        assert_eq!(Ontology::infer(vec![sub.clone()]).unwrap().dialect, Dialect::El);
        let f = Axiom::Functionality("r".into());
        assert_eq!(Ontology::infer(vec![f.clone()]).unwrap().dialect, Dialect::DlLiteFEq);
        assert_eq!(Ontology::infer(vec![f, sub]).unwrap().dialect, Dialect::DlLiteF);
    }

    #[test]
    fn mixed_arity_rejected() {
        let r = Database::from_facts([Atom::unary("A", "a"), Atom::binary("A", "a", "b")]);
        assert!(r.is_err());
    }
}
