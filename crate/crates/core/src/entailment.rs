//! Reasoning over Horn ontologies.
//!
//! Ontologies are brought into a normal form over concept-name ids. The
//! [`Reasoner`] computes, for a seed set of names, the least type of an
//! element that carries the seed and nothing else: closure under the
//! conjunctive rules plus everything its anonymous successors force back
//! onto it. Closures of all seeds met while computing one closure are solved
//! together as a least fixpoint and memoized.
//!
//! DL-Lite ontologies are handled by translating their inclusions into the
//! same normal form; role disjointness is compiled into `A <= bot` axioms for
//! the anonymous part and checked directly on databases.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};
use crate::model::{Atom, Axiom, Concept, Database, Name, Ontology, Role};

/// A set of concepts from `sub(O)`.
pub type ConceptType = BTreeSet<Concept>;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NormalAxiom {
    /// `top <= A`
    TopSub(usize),
    /// `A <= bot`
    BotSup(usize),
    /// `A1 & A2 <= A`; `A1 == A2` encodes `A1 <= A`.
    ConjSub(usize, usize, usize),
    /// `exists r . A <= B`
    ExistsSub(Role, usize, usize),
    /// `A <= exists r . B`
    SubExists(usize, Role, usize),
}

/// Normalized ontology over dense concept-name ids.
#[derive(Clone, Debug)]
pub struct NormalOntology {
    names: Vec<Name>,
    index: HashMap<Name, usize>,
    pub axioms: Vec<NormalAxiom>,
    pub role_inclusions: Vec<(Role, Role)>,
    pub disjoint_roles: Vec<Vec<Name>>,
    pub functional: BTreeSet<Name>,
    /// Fresh name id -> the concept it was introduced for.
    pub meaning: BTreeMap<usize, Concept>,
    lhs_cache: HashMap<Concept, usize>,
    rhs_cache: HashMap<Concept, usize>,
    fresh: usize,
    pub top: usize,
    pub bot: usize,
}

impl NormalOntology {
    fn empty() -> Self {
        let mut no = NormalOntology {
            names: vec![],
            index: HashMap::new(),
            axioms: vec![],
            role_inclusions: vec![],
            disjoint_roles: vec![],
            functional: BTreeSet::new(),
            meaning: BTreeMap::new(),
            lhs_cache: HashMap::new(),
            rhs_cache: HashMap::new(),
            fresh: 0,
            top: 0,
            bot: 0,
        };
        no.top = no.intern(&Name::new("$top"));
        no.bot = no.intern(&Name::new("$bot"));
        no.axioms.push(NormalAxiom::TopSub(no.top));
        no
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.len() <= 2
    }

    pub fn name(&self, id: usize) -> &Name {
        &self.names[id]
    }

    pub fn id(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    /// Whether `id` is a name of the input signature (not fresh, not top/bot).
    pub fn is_original(&self, id: usize) -> bool {
        id != self.top && id != self.bot && !self.meaning.contains_key(&id)
    }

    pub fn intern(&mut self, name: &Name) -> usize {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        self.names.push(name.clone());
        self.index.insert(name.clone(), self.names.len() - 1);
        self.names.len() - 1
    }

    fn fresh_name(&mut self, meaning: &Concept) -> usize {
        self.fresh += 1;
        let id = self.intern(&Name::from(format!("${}", self.fresh)));
        self.meaning.insert(id, meaning.clone());
        id
    }

    /// A name `X` with `C <= X` entailed and `X` derivable only through `C`.
    pub fn lhs_name(&mut self, c: &Concept) -> usize {
        if let Some(&x) = self.lhs_cache.get(c) {
            return x;
        }
        let x = match c {
            Concept::Top => self.top,
            Concept::Bot => self.bot,
            Concept::Atomic(a) => self.intern(a),
            Concept::Conj(cs) => {
                let parts: Vec<usize> = cs.iter().map(|d| self.lhs_name(d)).collect();
                let mut acc = parts[0];
                for &p in &parts[1..] {
                    let x = self.fresh_name(c);
                    self.axioms.push(NormalAxiom::ConjSub(acc, p, x));
                    acc = x;
                }
                acc
            }
            Concept::Exists(r, d) => {
                let inner = self.lhs_name(d);
                let x = self.fresh_name(c);
                self.axioms.push(NormalAxiom::ExistsSub(r.clone(), inner, x));
                x
            }
        };
        self.lhs_cache.insert(c.clone(), x);
        x
    }

    /// A name `X` with `X <= C`.
    pub fn rhs_name(&mut self, c: &Concept) -> usize {
        if let Some(&x) = self.rhs_cache.get(c) {
            return x;
        }
        let x = match c {
            Concept::Top => self.top,
            Concept::Bot => self.bot,
            Concept::Atomic(a) => self.intern(a),
            _ => {
                let x = self.fresh_name(c);
                self.emit_rhs(x, c);
                x
            }
        };
        self.rhs_cache.insert(c.clone(), x);
        x
    }

    /// Emit axioms for `a <= c`.
    fn emit_rhs(&mut self, a: usize, c: &Concept) {
        match c {
            Concept::Top => {}
            Concept::Bot => self.axioms.push(NormalAxiom::BotSup(a)),
            Concept::Atomic(b) => {
                let b = self.intern(b);
                if a != b {
                    self.axioms.push(NormalAxiom::ConjSub(a, a, b));
                }
            }
            Concept::Conj(cs) => cs.iter().for_each(|d| self.emit_rhs(a, d)),
            Concept::Exists(r, d) => {
                let b = self.rhs_name(d);
                self.axioms.push(NormalAxiom::SubExists(a, r.clone(), b));
            }
        }
    }

    pub fn add_inclusion(&mut self, c: &Concept, d: &Concept) {
        if c.has_bot() && c.conjuncts().contains(&&Concept::Bot) {
            return;
        }
        let a = self.lhs_name(c);
        if a == self.top {
            // top <= D: route through a name so the shape stays TopSub.
            match d {
                Concept::Atomic(b) => {
                    let b = self.intern(b);
                    self.axioms.push(NormalAxiom::TopSub(b));
                    return;
                }
                _ => {
                    let x = self.fresh_name(&Concept::Top);
                    self.axioms.push(NormalAxiom::TopSub(x));
                    self.emit_rhs(x, d);
                    return;
                }
            }
        }
        self.emit_rhs(a, d);
    }

    pub fn display_axiom(&self, a: &NormalAxiom) -> String {
        let n = |i: &usize| self.names[*i].to_string();
        match a {
            NormalAxiom::TopSub(b) => format!("top <= {}", n(b)),
            NormalAxiom::BotSup(b) => format!("{} <= bot", n(b)),
            NormalAxiom::ConjSub(x, y, z) if x == y => format!("{} <= {}", n(x), n(z)),
            NormalAxiom::ConjSub(x, y, z) => format!("{} & {} <= {}", n(x), n(y), n(z)),
            NormalAxiom::ExistsSub(r, x, z) => format!("exists {r} . {} <= {}", n(x), n(z)),
            NormalAxiom::SubExists(x, r, z) => format!("{} <= exists {r} . {}", n(x), n(z)),
        }
    }
}

impl fmt::Display for NormalOntology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for a in &self.axioms {
            writeln!(f, "{}", self.display_axiom(a))?;
        }
        for (r, s) in &self.role_inclusions {
            writeln!(f, "{r} <= {s}")?;
        }
        Ok(())
    }
}

/// Normal form of an ontology from the EL family.
pub fn normalize(o: &Ontology) -> Result<NormalOntology> {
    if o.dialect.is_dllite() {
        return Err(Error::Precondition(format!("normalize expects an ELHI_bot dialect, got {}", o.dialect)));
    }
    normalize_horn(o)
}

/// Normal form of any supported ontology; DL-Lite inclusions are translated.
pub fn normalize_horn(o: &Ontology) -> Result<NormalOntology> {
    let mut no = NormalOntology::empty();
    let (concepts, _) = o.signature();
    for c in &concepts {
        no.intern(c);
    }
    for (c, d) in o.inclusions() {
        no.add_inclusion(&c, &d);
    }
    no.role_inclusions = o.role_inclusions();
    no.disjoint_roles = o.disjoint_roles();
    no.functional = o.functional_roles();
    Ok(no)
}

/// Reflexive-transitive role hierarchy, closed under inverses.
#[derive(Clone, Debug, Default)]
pub struct RoleHierarchy {
    sup: HashMap<Role, BTreeSet<Role>>,
}

impl RoleHierarchy {
    pub fn new(inclusions: &[(Role, Role)]) -> Self {
        let mut edges: HashMap<Role, Vec<Role>> = HashMap::new();
        for (r, s) in inclusions {
            edges.entry(r.clone()).or_default().push(s.clone());
            edges.entry(r.inv()).or_default().push(s.inv());
        }
        let roles: Vec<Role> = edges.keys().cloned().collect();
        let mut sup = HashMap::new();
        for r in roles {
            let mut seen = BTreeSet::from([r.clone()]);
            let mut queue = VecDeque::from([r.clone()]);
            while let Some(x) = queue.pop_front() {
                for y in edges.get(&x).into_iter().flatten() {
                    if seen.insert(y.clone()) {
                        queue.push_back(y.clone());
                    }
                }
            }
            sup.insert(r, seen);
        }
        RoleHierarchy { sup }
    }

    /// All `s` with `r <= s`, including `r`.
    pub fn supers(&self, r: &Role) -> BTreeSet<Role> {
        self.sup.get(r).cloned().unwrap_or_else(|| BTreeSet::from([r.clone()]))
    }

    pub fn entails(&self, r: &Role, s: &Role) -> bool {
        r == s || self.sup.get(r).is_some_and(|x| x.contains(s))
    }

    /// All roles `r` with `r <= s`.
    pub fn subs(&self, s: &Role) -> BTreeSet<Role> {
        let mut out: BTreeSet<Role> = self.sup.iter().filter(|(_, sups)| sups.contains(s)).map(|(r, _)| r.clone()).collect();
        out.insert(s.clone());
        out
    }

    /// Whether an edge carrying `r` (closed upwards) violates a disjointness set.
    pub fn violates(&self, r: &Role, disjoint: &[Vec<Name>]) -> bool {
        let sups = self.supers(r);
        let fwd: BTreeSet<&Name> = sups.iter().filter(|s| !s.inverse).map(|s| &s.name).collect();
        let bwd: BTreeSet<&Name> = sups.iter().filter(|s| s.inverse).map(|s| &s.name).collect();
        disjoint.iter().any(|set| set.iter().all(|n| fwd.contains(n)) || set.iter().all(|n| bwd.contains(n)))
    }
}

/// Least-type closure engine over a normal ontology.
pub struct Reasoner {
    pub no: NormalOntology,
    pub roles: RoleHierarchy,
    n: usize,
    conj: Vec<Vec<(usize, usize)>>,
    top_sub: Vec<usize>,
    sub_exists: Vec<Vec<(Role, usize)>>,
    via: HashMap<Role, Vec<(usize, usize)>>,
    exists_sub: Vec<(Role, usize, usize)>,
    memo: HashMap<FixedBitSet, FixedBitSet>,
}

impl Reasoner {
    pub fn new(mut no: NormalOntology) -> Self {
        let roles = RoleHierarchy::new(&no.role_inclusions);
        if !no.disjoint_roles.is_empty() {
            let extra: Vec<NormalAxiom> = no
                .axioms
                .iter()
                .filter_map(|a| match a {
                    NormalAxiom::SubExists(x, r, _) if roles.violates(r, &no.disjoint_roles) => {
                        Some(NormalAxiom::BotSup(*x))
                    }
                    _ => None,
                })
                .collect();
            no.axioms.extend(extra);
        }
        let n = no.len();
        let mut conj = vec![vec![]; n];
        let mut top_sub = vec![];
        let mut sub_exists = vec![vec![]; n];
        let mut exists_sub = vec![];
        for a in &no.axioms {
            match a {
                NormalAxiom::TopSub(b) => top_sub.push(*b),
                NormalAxiom::BotSup(x) => conj[*x].push((*x, no.bot)),
                NormalAxiom::ConjSub(x, y, z) => {
                    conj[*x].push((*y, *z));
                    if x != y {
                        conj[*y].push((*x, *z));
                    }
                }
                NormalAxiom::ExistsSub(r, x, z) => exists_sub.push((r.clone(), *x, *z)),
                NormalAxiom::SubExists(x, r, z) => sub_exists[*x].push((r.clone(), *z)),
            }
        }
        let mut reasoner =
            Reasoner { no, roles, n, conj, top_sub, sub_exists, via: HashMap::new(), exists_sub, memo: HashMap::new() };
        let mut all_roles: BTreeSet<Role> = BTreeSet::new();
        for (r, _, _) in &reasoner.exists_sub {
            all_roles.extend(reasoner.roles.subs(r));
        }
        for list in &reasoner.sub_exists {
            for (r, _) in list {
                all_roles.insert(r.clone());
                all_roles.insert(r.inv());
            }
        }
        for r in all_roles {
            reasoner.via_for(&r);
        }
        reasoner
    }

    /// Build a reasoner for any supported ontology.
    pub fn for_ontology(o: &Ontology) -> Result<Self> {
        Ok(Reasoner::new(normalize_horn(o)?))
    }

    /// Pairs `(A', B')` with `exists rho . A' <= B'` and `r <= rho`.
    fn via_for(&mut self, r: &Role) -> &[(usize, usize)] {
        if !self.via.contains_key(r) {
            let list: Vec<(usize, usize)> = self
                .exists_sub
                .iter()
                .filter(|(rho, _, _)| self.roles.entails(r, rho))
                .map(|(_, a, b)| (*a, *b))
                .collect();
            self.via.insert(r.clone(), list);
        }
        &self.via[r]
    }

    pub fn names(&self) -> usize {
        self.n
    }

    pub fn empty_set(&self) -> FixedBitSet {
        let mut s = FixedBitSet::with_capacity(self.n);
        s.insert(self.no.top);
        s
    }

    pub fn seed_of(&self, ids: impl IntoIterator<Item = usize>) -> FixedBitSet {
        let mut s = self.empty_set();
        s.extend(ids);
        s
    }

    /// Closure under `top <= A` and the conjunctive rules.
    fn local(&self, t: &mut FixedBitSet) {
        t.insert(self.no.top);
        for &b in &self.top_sub {
            t.insert(b);
        }
        let mut stack: Vec<usize> = t.ones().collect();
        while let Some(x) = stack.pop() {
            for &(y, z) in &self.conj[x] {
                if t.contains(y) && !t.contains(z) {
                    t.insert(z);
                    stack.push(z);
                }
            }
        }
    }

    fn child_seed(&mut self, parent: &FixedBitSet, r: &Role, b: usize) -> FixedBitSet {
        let mut s = self.seed_of([b]);
        let inv = r.inv();
        let list = self.via_for(&inv).to_vec();
        for (a2, b2) in list {
            if parent.contains(a2) {
                s.insert(b2);
            }
        }
        s
    }

    /// Least type of an element whose only told facts are `seed`.
    pub fn closure(&mut self, seed: &FixedBitSet) -> FixedBitSet {
        if let Some(t) = self.memo.get(seed) {
            return t.clone();
        }
        let mut seeds: Vec<FixedBitSet> = vec![seed.clone()];
        let mut types: Vec<FixedBitSet> = vec![{
            let mut t = seed.clone();
            self.local(&mut t);
            t
        }];
        let mut idx: HashMap<FixedBitSet, usize> = HashMap::from([(seed.clone(), 0)]);
        loop {
            let mut changed = false;
            let mut i = 0;
            while i < seeds.len() {
                let mut t = types[i].clone();
                if !t.contains(self.no.bot) {
                    let gens: Vec<(Role, usize)> =
                        t.ones().flat_map(|a| self.sub_exists[a].iter().cloned()).collect();
                    for (r, b) in gens {
                        let cs = self.child_seed(&t, &r, b);
                        let ct = if let Some(done) = self.memo.get(&cs) {
                            done.clone()
                        } else if let Some(&j) = idx.get(&cs) {
                            types[j].clone()
                        } else {
                            let mut ct = cs.clone();
                            self.local(&mut ct);
                            idx.insert(cs.clone(), seeds.len());
                            seeds.push(cs);
                            types.push(ct.clone());
                            ct
                        };
                        if ct.contains(self.no.bot) {
                            t.insert(self.no.bot);
                        }
                        let list = self.via_for(&r).to_vec();
                        for (a2, b2) in list {
                            if ct.contains(a2) {
                                t.insert(b2);
                            }
                        }
                    }
                    self.local(&mut t);
                }
                if t != types[i] {
                    types[i] = t;
                    changed = true;
                }
                i += 1;
            }
            if !changed {
                break;
            }
        }
        let result = types[0].clone();
        for (s, t) in seeds.into_iter().zip(types) {
            self.memo.insert(s, t);
        }
        result
    }

    /// Anonymous successors forced by a closed type: `(role, filler name, child type)`.
    pub fn children(&mut self, t: &FixedBitSet) -> Vec<(Role, usize, FixedBitSet)> {
        if t.contains(self.no.bot) {
            return vec![];
        }
        let gens: Vec<(Role, usize)> = t.ones().flat_map(|a| self.sub_exists[a].iter().cloned()).collect();
        let mut out = Vec::new();
        for (r, b) in gens {
            let cs = self.child_seed(t, &r, b);
            let ct = self.closure(&cs);
            out.push((r, b, ct));
        }
        out
    }

    /// All distinct types occurring in the anonymous tree below a closed type, including itself.
    pub fn tree_types(&mut self, root: &FixedBitSet) -> Vec<FixedBitSet> {
        let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
        let mut out = Vec::new();
        let mut queue = VecDeque::from([root.clone()]);
        while let Some(t) = queue.pop_front() {
            if !seen.insert(t.ones().collect()) {
                continue;
            }
            for (_, _, ct) in self.children(&t) {
                queue.push_back(ct);
            }
            out.push(t);
        }
        out
    }

    /// Whether `t` contains `bot`.
    pub fn is_bot(&self, t: &FixedBitSet) -> bool {
        t.contains(self.no.bot)
    }
}

/// Types of database constants after saturation, with role-closed edges.
#[derive(Clone, Debug)]
pub struct Saturation {
    pub consts: Vec<Name>,
    pub index: HashMap<Name, usize>,
    pub types: Vec<FixedBitSet>,
    /// Base facts plus role-inclusion consequences.
    pub role_closed: Database,
    pub inconsistent: bool,
}

impl Saturation {
    pub fn type_of(&self, c: &str) -> Option<&FixedBitSet> {
        self.index.get(c).map(|&i| &self.types[i])
    }
}

/// Saturate a database: least types of its constants and role closure.
pub fn saturate_with(r: &mut Reasoner, d: &Database) -> Saturation {
    let consts: Vec<Name> = d.domain().into_iter().collect();
    let index: HashMap<Name, usize> = consts.iter().enumerate().map(|(i, c)| (c.clone(), i)).collect();
    let mut types: Vec<FixedBitSet> = consts.iter().map(|_| r.empty_set()).collect();
    let mut edges: Vec<Vec<(usize, Role)>> = vec![vec![]; consts.len()];
    let mut role_closed = Database::new();
    for f in &d.facts {
        role_closed.insert(f.clone());
        match f {
            Atom::Unary(a, c) => {
                if let Some(id) = r.no.id(a) {
                    types[index[c]].insert(id);
                }
            }
            Atom::Binary(p, a, b) => {
                let role = Role::new(p.clone());
                edges[index[a]].push((index[b], role.clone()));
                edges[index[b]].push((index[a], role.inv()));
                for s in r.roles.supers(&role) {
                    role_closed.insert(s.atom(a.clone(), b.clone()));
                }
            }
        }
    }
    let mut changed = true;
    while changed {
        changed = false;
        for i in 0..consts.len() {
            let mut t = r.closure(&types[i]);
            for (j, role) in edges[i].clone() {
                let list = r.via_for(&role).to_vec();
                for (a2, b2) in list {
                    if types[j].contains(a2) {
                        t.insert(b2);
                    }
                }
            }
            if t != types[i] {
                types[i] = r.closure(&t);
                changed = true;
            }
        }
    }
    let mut inconsistent = types.iter().any(|t| r.is_bot(t));
    if !inconsistent && !r.no.disjoint_roles.is_empty() {
        inconsistent = violates_disjointness(&role_closed, &r.no.disjoint_roles);
    }
    if !inconsistent && !r.no.functional.is_empty() {
        inconsistent = violates_functionality(&role_closed, &r.no.functional);
    }
    Saturation { consts, index, types, role_closed, inconsistent }
}

pub fn violates_disjointness(d: &Database, disjoint: &[Vec<Name>]) -> bool {
    let mut pairs: HashMap<(&Name, &Name), BTreeSet<&Name>> = HashMap::new();
    for f in &d.facts {
        if let Atom::Binary(p, a, b) = f {
            pairs.entry((a, b)).or_default().insert(p);
        }
    }
    pairs.values().any(|rs| disjoint.iter().any(|set| set.iter().all(|n| rs.contains(n))))
}

pub fn violates_functionality(d: &Database, functional: &BTreeSet<Name>) -> bool {
    let mut succ: HashMap<(&Name, &Name), &Name> = HashMap::new();
    for f in &d.facts {
        if let Atom::Binary(p, a, b) = f {
            if functional.contains(p) {
                if let Some(prev) = succ.insert((p, a), b) {
                    if prev != b {
                        return true;
                    }
                }
            }
        }
    }
    false
}

/// A database together with entailed concept facts over `sub(O)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtendedDatabase {
    pub base: Database,
    pub concept_facts: BTreeSet<(Concept, Name)>,
    pub inconsistent: bool,
}

impl ExtendedDatabase {
    /// Base facts plus the atomic concept facts among the concept facts.
    pub fn as_database(&self) -> Database {
        let mut d = self.base.clone();
        for (c, a) in &self.concept_facts {
            if let Concept::Atomic(n) = c {
                d.insert(Atom::Unary(n.clone(), a.clone()));
            }
        }
        d
    }
}

/// Reasoner with a probe name for every concept of `sub(O)` and any extras.
pub fn probed_reasoner(o: &Ontology, extra: &[Concept]) -> Result<(Reasoner, Vec<(Concept, usize)>)> {
    let mut no = normalize_horn(o)?;
    let mut probes = Vec::new();
    for c in o.sub().iter().chain(extra) {
        if *c == Concept::Bot {
            continue;
        }
        let id = no.lhs_name(c);
        probes.push((c.clone(), id));
    }
    Ok((Reasoner::new(no), probes))
}

/// Saturation of `d` with concept facts for every concept in `sub(O)`.
pub fn saturate(d: &Database, o: &Ontology) -> Result<ExtendedDatabase> {
    let (mut r, probes) = probed_reasoner(o, &[])?;
    let sat = saturate_with(&mut r, d);
    let mut concept_facts = BTreeSet::new();
    for (i, c) in sat.consts.iter().enumerate() {
        for (concept, id) in &probes {
            if sat.types[i].contains(*id) {
                concept_facts.insert((concept.clone(), c.clone()));
            }
        }
    }
    Ok(ExtendedDatabase { base: sat.role_closed, concept_facts, inconsistent: sat.inconsistent })
}

/// Whether `O, D |= C(a)` for `C` in `sub(O)`; inconsistent inputs entail everything.
pub fn entailed_concept_fact(d: &Database, o: &Ontology, c: &Concept, a: &Name) -> Result<bool> {
    if !o.sub().contains(c) && !matches!(c, Concept::Atomic(_) | Concept::Top) {
        return Err(Error::Precondition(format!("{c} is not a subconcept of the ontology")));
    }
    Ok(entails_concept(d, o, c, a)?)
}

/// `O, D |= C(a)` for any concept.
pub fn entails_concept(d: &Database, o: &Ontology, c: &Concept, a: &Name) -> Result<bool> {
    let (mut r, probes) = probed_reasoner(o, std::slice::from_ref(c))?;
    let probe = probes.iter().find(|(x, _)| x == c).map(|(_, id)| *id);
    let sat = saturate_with(&mut r, d);
    if sat.inconsistent {
        return Ok(true);
    }
    let Some(t) = sat.type_of(a) else {
        return Ok(*c == Concept::Top);
    };
    Ok(probe.is_some_and(|p| t.contains(p)) || *c == Concept::Top)
}

/// `O |= C <= D`.
pub fn subsumes(o: &Ontology, c: &Concept, d: &Concept) -> Result<bool> {
    let mut no = normalize_horn(o)?;
    let x = no.rhs_name(c);
    let y = no.lhs_name(d);
    let mut r = Reasoner::new(no);
    let seed = r.seed_of([x]);
    let t = r.closure(&seed);
    Ok(r.is_bot(&t) || t.contains(y))
}

/// Whether every model realizing `t1` realizes `t2`.
pub fn type_implies(o: &Ontology, t1: &ConceptType, t2: &ConceptType) -> Result<bool> {
    let mut no = normalize_horn(o)?;
    let seeds: Vec<usize> = t1.iter().map(|c| no.rhs_name(c)).collect();
    let probes: Vec<usize> = t2.iter().map(|c| no.lhs_name(c)).collect();
    let mut r = Reasoner::new(no);
    let root = r.closure(&r.seed_of(seeds));
    if r.is_bot(&root) {
        return Ok(true);
    }
    Ok(r.tree_types(&root).iter().any(|t| probes.iter().all(|&p| t.contains(p))))
}

/// Inclusion-maximal `t'` with `O |= and(t) <= exists r . and(t')`, as subsets of `sub(O)`.
pub fn max_successor_types(o: &Ontology, t: &ConceptType, r: &Role) -> Result<Vec<ConceptType>> {
    let mut no = normalize_horn(o)?;
    let seeds: Vec<usize> = t.iter().map(|c| no.rhs_name(c)).collect();
    let sub: Vec<Concept> = o.sub().into_iter().filter(|c| *c != Concept::Bot).collect();
    let probes: Vec<(Concept, usize)> = sub.iter().map(|c| (c.clone(), no.lhs_name(c))).collect();
    let mut reasoner = Reasoner::new(no);
    let root = reasoner.closure(&reasoner.seed_of(seeds));
    if reasoner.is_bot(&root) {
        return Ok(vec![]);
    }
    let mut found: Vec<ConceptType> = Vec::new();
    for (s, _, ct) in reasoner.children(&root) {
        if !reasoner.roles.entails(&s, r) {
            continue;
        }
        let ty: ConceptType = probes.iter().filter(|(_, id)| ct.contains(*id)).map(|(c, _)| c.clone()).collect();
        found.push(ty);
    }
    let mut maximal: Vec<ConceptType> = Vec::new();
    for t in &found {
        if found.iter().any(|u| u != t && u.is_superset(t)) {
            continue;
        }
        if !maximal.contains(t) {
            maximal.push(t.clone());
        }
    }
    maximal.sort();
    Ok(maximal)
}

/// Whether `d` is consistent with `o`.
pub fn is_consistent(d: &Database, o: &Ontology) -> Result<bool> {
    let mut r = Reasoner::for_ontology(o)?;
    Ok(!saturate_with(&mut r, d).inconsistent)
}

/// Whether a concept is satisfiable with respect to `o`.
pub fn is_satisfiable(o: &Ontology, c: &Concept) -> Result<bool> {
    Ok(!subsumes(o, c, &Concept::Bot)?)
}

/// The inclusions of an ontology rendered as axioms (range restrictions expanded).
pub fn concept_axioms(o: &Ontology) -> Vec<Axiom> {
    o.inclusions().into_iter().map(|(c, d)| Axiom::ConceptInclusion(c, d)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Dialect;

    fn a(n: &str) -> Concept {
        Concept::atomic(n)
    }

    fn ex(r: &str, c: Concept) -> Concept {
        Concept::exists(Role::new(r), c)
    }

    fn onto(axioms: Vec<(Concept, Concept)>) -> Ontology {
        Ontology::infer(axioms.into_iter().map(|(c, d)| Axiom::ConceptInclusion(c, d)).collect()).unwrap()
    }

    #[test]
    fn normal_form_shapes() {
        let o = onto(vec![(a("A"), ex("r", Concept::conj([a("B"), a("C")])))]);
        let no = normalize(&o).unwrap();
        // top <= $top, A <= exists r . X, X <= B, X <= C
        assert_eq!(no.axioms.len(), 4);
        let range = Ontology::new(Dialect::ElhdrBot, vec![Axiom::RangeRestriction("r".into(), a("C"))]).unwrap();
        let no = normalize(&range).unwrap();
        assert!(no
            .axioms
            .iter()
            .any(|x| matches!(x, NormalAxiom::ExistsSub(r, f, _) if r.inverse && *f == no.top)));
    }

    #[test]
    fn subsumption_examples() {
        let o = onto(vec![(a("A"), ex("r", a("B"))), (ex("r", a("B")), a("C"))]);
        assert!(subsumes(&o, &a("A"), &a("C")).unwrap());
        assert!(subsumes(&Ontology::empty(), &a("A"), &a("A")).unwrap());
        let o1 = onto(vec![(a("A2"), a("A4"))]);
        assert!(subsumes(&o1, &a("A2"), &Concept::conj([a("A4"), a("A2")])).unwrap());
        assert!(!subsumes(&o1, &a("A4"), &a("A2")).unwrap());
    }

    #[test]
    fn inverse_roles_propagate_up() {
        // A <= exists r . B, B <= exists inv(r) . C  ... C arrives at the parent? No: B's
        // r-predecessor is the A element; the axiom creates a fresh one. Use the
        // backward axiom form instead.
        let o = Ontology::infer(vec![
            Axiom::ConceptInclusion(a("A"), ex("r", a("B"))),
            Axiom::ConceptInclusion(Concept::exists(Role::inv_of("r"), a("A")), a("D")),
            Axiom::ConceptInclusion(ex("r", a("D")), a("E")),
        ])
        .unwrap();
        assert!(subsumes(&o, &a("A"), &a("E")).unwrap());
        assert!(!subsumes(&o, &a("B"), &a("D")).unwrap());
    }

    #[test]
    fn saturation_examples() {
        let o1 = onto(vec![(a("A2"), a("A4"))]);
        let d = Database::from_facts([Atom::unary("A2", "a")]).unwrap();
        let ext = saturate(&d, &o1).unwrap();
        assert!(ext.as_database().contains(&Atom::unary("A4", "a")));
        let o = onto(vec![(ex("r", a("B")), a("A"))]);
        let d = Database::from_facts([Atom::binary("r", "a", "b"), Atom::unary("B", "b")]).unwrap();
        assert!(saturate(&d, &o).unwrap().as_database().contains(&Atom::unary("A", "a")));
        assert_eq!(saturate(&d, &Ontology::empty()).unwrap().as_database(), d);
    }

    #[test]
    fn types_and_successors() {
        let o1 = onto(vec![(a("A2"), a("A4"))]);
        let t = |xs: &[&str]| xs.iter().map(|x| a(x)).collect::<ConceptType>();
        assert!(type_implies(&o1, &t(&["A2"]), &t(&["A4"])).unwrap());
        assert!(!type_implies(&Ontology::empty(), &t(&["A"]), &t(&["B"])).unwrap());
        let o = onto(vec![(a("A"), ex("r", a("B"))), (a("B"), a("C"))]);
        let succ = max_successor_types(&o, &t(&["A"]), &Role::new("r")).unwrap();
        assert_eq!(succ.len(), 1);
        assert!(succ[0].contains(&a("B")) && succ[0].contains(&a("C")));
        assert!(max_successor_types(&Ontology::empty(), &t(&["A"]), &Role::new("r")).unwrap().is_empty());
    }

    #[test]
    fn consistency_examples() {
        let o = onto(vec![(a("A"), Concept::Bot)]);
        let d = Database::from_facts([Atom::unary("A", "a")]).unwrap();
        assert!(!is_consistent(&d, &o).unwrap());
        let f = Ontology::infer(vec![Axiom::Functionality("r".into())]).unwrap();
        let d = Database::from_facts([Atom::binary("r", "a", "b"), Atom::binary("r", "a", "c")]).unwrap();
        assert!(!is_consistent(&d, &f).unwrap());
        assert!(is_consistent(&d, &Ontology::empty()).unwrap());
        // Anonymous bot: A forces a successor that is B, and B is unsatisfiable.
        let o = onto(vec![(a("A"), ex("r", a("B"))), (a("B"), Concept::Bot)]);
        let d = Database::from_facts([Atom::unary("A", "a")]).unwrap();
        assert!(!is_consistent(&d, &o).unwrap());
    }
}
