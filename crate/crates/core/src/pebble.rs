//! Labelings that certify homomorphisms into the chase, and the existential
//! pebble game played over them.
//!
//! A labeling sends each variable to a database constant, to the marker
//! `Exist` (the variable lives in a component matched entirely inside the
//! anonymous part), or to an anchored label `((x', y'), a)` (the variable is
//! matched into the anonymous tree entered from constant `a` along the guarded
//! pair `(x', y')`). Every condition on labelings is either about a single
//! variable or about two variables sharing an atom, so the game reduces to
//! `(k+1)`-consistency over these binary constraints.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use fixedbitset::FixedBitSet;

use crate::chase::{canonical_model_with, ChaseDb};
use crate::entailment::{saturate_with, Reasoner};
use crate::error::{Error, Result};
use crate::eval::{all_tuples, check_schema, Algorithm, EvalResult, EvalStats};
use crate::graphalg::dtree;
use crate::homtools::{find_homomorphism_in, Target, VarMap};
use crate::model::{check_dialect, gaifman_graph, Atom, Cq, Database, Dialect, Name, Omq, Ontology};

/// Upper bound on the number of game positions.
pub const POSITION_CAP: usize = 400_000_000;

pub type GuardedPair = (Name, Name);

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Const(Name),
    Exist,
    Anchored(GuardedPair, Name),
}

/// Leveled reach sets of a guarded pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reach {
    pub level_of: BTreeMap<Name, BTreeSet<usize>>,
}

impl Reach {
    pub fn level(&self, i: usize) -> BTreeSet<Name> {
        self.level_of.iter().filter(|(_, ls)| ls.contains(&i)).map(|(v, _)| v.clone()).collect()
    }

    pub fn all(&self) -> BTreeSet<Name> {
        self.level_of.keys().cloned().collect()
    }

    /// Whether every variable has exactly one level.
    pub fn is_leveled(&self) -> bool {
        self.level_of.values().all(|l| l.len() == 1)
    }

    pub fn contains(&self, v: &str) -> bool {
        self.level_of.contains_key(v)
    }

    pub fn in_level0(&self, v: &str) -> bool {
        self.level_of.get(v).is_some_and(|l| l.contains(&0))
    }
}

/// Guarded pairs `(x, y)`: variables linked by an atom, in both orientations.
pub fn guarded_pairs(q: &Cq) -> BTreeSet<GuardedPair> {
    let mut out = BTreeSet::new();
    for a in &q.atoms {
        if let Atom::Binary(_, x, y) = a {
            if x != y {
                out.insert((x.clone(), y.clone()));
                out.insert((y.clone(), x.clone()));
            }
        }
    }
    out
}

/// Least leveled sets closed under: `x` at 0 and `y` at 1; successors of a
/// variable at level `i > 0` at `i + 1`; predecessors of a variable at level
/// `i + 1` at `i`. Levels are capped at `|var(q)| + 1`.
pub fn reach(q: &Cq, pair: &GuardedPair) -> Result<Reach> {
    let (x, y) = pair;
    if q.is_answer(y) {
        return Err(Error::Precondition(format!("{y} is an answer variable")));
    }
    if !guarded_pairs(q).contains(pair) {
        return Err(Error::Precondition(format!("({x},{y}) is not a guarded pair")));
    }
    let cap = q.vars.len() + 1;
    let mut succ: HashMap<&Name, Vec<&Name>> = HashMap::new();
    let mut pred: HashMap<&Name, Vec<&Name>> = HashMap::new();
    for a in &q.atoms {
        if let Atom::Binary(_, u, v) = a {
            succ.entry(u).or_default().push(v);
            pred.entry(v).or_default().push(u);
        }
    }
    let mut level_of: BTreeMap<Name, BTreeSet<usize>> = BTreeMap::new();
    let mut stack: Vec<(Name, usize)> = vec![(x.clone(), 0), (y.clone(), 1)];
    while let Some((v, i)) = stack.pop() {
        if !level_of.entry(v.clone()).or_default().insert(i) {
            continue;
        }
        if i > 0 && i < cap {
            for u in succ.get(&v).into_iter().flatten() {
                stack.push(((*u).clone(), i + 1));
            }
        }
        if i >= 1 {
            for z in pred.get(&v).into_iter().flatten() {
                stack.push(((*z).clone(), i - 1));
            }
        }
    }
    Ok(Reach { level_of })
}

/// Whether `q|reach(x,y)` is a homomorphic preimage of a ditree rooted at
/// `x`'s class, together with the ditree (answer variable `x`).
pub fn exists_eligible(q: &Cq, pair: &GuardedPair) -> Result<(bool, Option<Cq>)> {
    let r = reach(q, pair)?;
    if !r.is_leveled() || r.all().iter().any(|v| q.is_answer(v) && !r.in_level0(v)) {
        return Ok((false, None));
    }
    let sub = q.restrict(&r.all());
    let mut rooted = Cq::from_parts(vec![pair.0.clone()], sub.atoms.clone());
    rooted.vars = sub.vars.clone();
    match dtree(&rooted)? {
        Some(t) if t.answer == vec![pair.0.clone()] => Ok((true, Some(t))),
        _ => Ok((false, None)),
    }
}

/// Maximal connected components of `q` containing only quantified variables.
pub fn exists_mccs(q: &Cq) -> Vec<Cq> {
    gaifman_graph(q)
        .components()
        .into_iter()
        .filter(|c| c.iter().all(|v| !q.is_answer(v)))
        .map(|c| q.restrict(&c))
        .collect()
}

/// `q+`: attach a fresh copy of `C` at every variable whose chase satisfies a left-hand side `C`.
pub fn extend_query_plus(omq: &Omq) -> Result<Cq> {
    if omq.query.disjuncts.len() != 1 {
        return Err(Error::Precondition("q+ is defined for CQs".into()));
    }
    extend_cq_plus(&omq.ontology, &omq.query.disjuncts[0])
}

pub fn extend_cq_plus(o: &Ontology, q: &Cq) -> Result<Cq> {
    crate::treelike::extend_with_lhs(o, q)
}

fn require_elhdr(omq: &Omq) -> Result<()> {
    check_dialect(&omq.ontology, Dialect::ElhdrBot)?;
    if !omq.schema.full {
        return Err(Error::Schema("the pebble game needs the full schema".into()));
    }
    Ok(())
}

/// Precomputed structure for checking labelings of one CQ over one database.
pub struct LabelingContext {
    pub q: Cq,
    pub model: ChaseDb,
    target: Target,
    ch_minus: Target,
    originals: BTreeSet<Name>,
    reaches: BTreeMap<GuardedPair, Reach>,
    dtrees: BTreeMap<GuardedPair, Cq>,
    rep: BTreeMap<GuardedPair, GuardedPair>,
    mcc_of: BTreeMap<Name, usize>,
    mcc_ok: Vec<bool>,
    dtree_cache: std::sync::Mutex<HashMap<(GuardedPair, Name), bool>>,
}

impl LabelingContext {
    /// Returns `None` when `d` is inconsistent with the ontology.
    pub fn new(omq: &Omq, q: &Cq, d: &Database) -> Result<Option<Self>> {
        check_schema(d, &omq.schema)?;
        let mut reasoner = Reasoner::for_ontology(&omq.ontology)?;
        if saturate_with(&mut reasoner, d).inconsistent {
            return Ok(None);
        }
        let mut reaches = BTreeMap::new();
        let mut dtrees = BTreeMap::new();
        for p in guarded_pairs(q) {
            if q.is_answer(&p.1) {
                continue;
            }
            let r = reach(q, &p)?;
            let (ok, t) = exists_eligible(q, &p)?;
            if ok {
                dtrees.insert(p.clone(), t.unwrap());
            }
            reaches.insert(p, r);
        }
        let mut rep = BTreeMap::new();
        for p in dtrees.keys() {
            let r = &reaches[p];
            let level0 = r.level(0);
            let level1 = r.level(1);
            let chosen = reaches
                .keys()
                .find(|(a, b)| level0.contains(a) && level1.contains(b))
                .cloned()
                .unwrap_or_else(|| p.clone());
            rep.insert(p.clone(), chosen);
        }
        let mccs = exists_mccs(q);
        let mut mcc_of = BTreeMap::new();
        let mut mcc_trees = Vec::new();
        for (i, m) in mccs.iter().enumerate() {
            for v in &m.vars {
                mcc_of.insert(v.clone(), i);
            }
            let t = if m.atoms.is_empty() { None } else { dtree(m)? };
            mcc_trees.push(t);
        }
        let depth = dtrees
            .values()
            .chain(mcc_trees.iter().flatten())
            .map(|t| tree_depth(t))
            .max()
            .unwrap_or(0)
            .max(1);
        let model = match canonical_model_with(&mut reasoner, &omq.ontology, d, depth) {
            Ok(m) => m,
            Err(Error::Inconsistent) => return Ok(None),
            Err(e) => return Err(e),
        };
        let target = Target::new(&model.facts);
        let originals = model.originals();
        let ch_minus = Target::with_constants(&model.facts.induced(&originals), originals.iter().cloned());
        let mcc_ok = mcc_trees
            .iter()
            .zip(&mccs)
            .map(|(t, m)| match t {
                Some(t) => {
                    let b = Cq::from_parts(vec![], t.atoms.clone());
                    find_homomorphism_in(&b, &target, &VarMap::new()).is_some()
                }
                None => m.atoms.is_empty(),
            })
            .collect();
        Ok(Some(LabelingContext {
            q: q.clone(),
            model,
            target,
            ch_minus,
            originals,
            reaches,
            dtrees,
            rep,
            mcc_of,
            mcc_ok,
            dtree_cache: Default::default(),
        }))
    }

    pub fn originals(&self) -> &BTreeSet<Name> {
        &self.originals
    }

    pub fn reach_of(&self, p: &GuardedPair) -> Option<&Reach> {
        self.reaches.get(p)
    }

    pub fn is_eligible(&self, p: &GuardedPair) -> bool {
        self.dtrees.contains_key(p)
    }

    /// `D |= (O, S, dtree_(x,y))(a)`.
    pub fn dtree_holds(&self, p: &GuardedPair, a: &Name) -> bool {
        let key = (p.clone(), a.clone());
        if let Some(&v) = self.dtree_cache.lock().unwrap().get(&key) {
            return v;
        }
        let v = match self.dtrees.get(p) {
            Some(t) => {
                let fixed = VarMap::from([(p.0.clone(), a.clone())]);
                self.target.id(a).is_some() && find_homomorphism_in(t, &self.target, &fixed).is_some()
            }
            None => false,
        };
        self.dtree_cache.lock().unwrap().insert(key, v);
        v
    }

    fn unary_holds(&self, atom: &Atom, c: &Name) -> bool {
        match atom {
            Atom::Unary(p, _) => self.ch_minus.id(c).is_some_and(|i| self.ch_minus.unary_holds(p, i)),
            Atom::Binary(p, _, _) => self.ch_minus.id(c).is_some_and(|i| self.ch_minus.successors(p, i).contains(&i)),
        }
    }

    fn edge_holds(&self, p: &str, a: &Name, b: &Name) -> bool {
        match (self.ch_minus.id(a), self.ch_minus.id(b)) {
            (Some(i), Some(j)) => self.ch_minus.successors(p, i).contains(&j),
            _ => false,
        }
    }

    /// Conditions on a single variable. `strict` adds the constraints used by
    /// the game: anchored labels use representative pairs and sit in
    /// `reach \ reach^0`, and `Exist` labels need a satisfiable component.
    pub fn unary_ok(&self, z: &Name, l: &Label, strict: bool) -> bool {
        match l {
            Label::Const(c) => {
                self.originals.contains(c)
                    && self.q.atoms.iter().filter(|a| a.terms().iter().all(|t| *t == z)).all(|a| self.unary_holds(a, c))
            }
            Label::Exist => {
                if self.q.is_answer(z) {
                    return false;
                }
                !strict || self.mcc_of.get(z).is_some_and(|&i| self.mcc_ok[i])
            }
            Label::Anchored(p, a) => {
                if self.q.is_answer(z) || !self.originals.contains(a) {
                    return false;
                }
                if !strict {
                    return true;
                }
                self.rep.get(p) == Some(p)
                    && self.reaches.get(p).is_some_and(|r| r.contains(z) && !r.in_level0(z))
                    && self.dtree_holds(p, a)
            }
        }
    }

    /// Conditions on two distinct variables linked by at least one atom.
    pub fn pair_ok(&self, u: &Name, lu: &Label, v: &Name, lv: &Label, strict: bool) -> bool {
        for atom in &self.q.atoms {
            let Atom::Binary(p, x, y) = atom else { continue };
            let (lx, ly) = if x == u && y == v {
                (lu, lv)
            } else if x == v && y == u {
                (lv, lu)
            } else {
                continue;
            };
            if !self.atom_ok(p, x, lx, ly) {
                return false;
            }
        }
        self.guard_ok(u, lu, v, lv, strict) && self.guard_ok(v, lv, u, lu, strict)
    }

    fn atom_ok(&self, p: &str, x: &Name, lx: &Label, ly: &Label) -> bool {
        // Role atoms between constants must hold in the database part.
        if let (Label::Const(a), Label::Const(b)) = (lx, ly) {
            if !self.edge_holds(p, a, b) {
                return false;
            }
        }
        // Anonymous elements have no edges back into the database.
        if matches!(ly, Label::Const(_)) && !matches!(lx, Label::Const(_)) {
            return false;
        }
        // An anchored tree is closed under successors.
        if let Label::Anchored(..) = lx {
            if ly != lx {
                return false;
            }
        }
        // The predecessor of an anchored element is its anchor or lies in the same tree.
        if let Label::Anchored(pair, a) = ly {
            let in0 = self.reaches.get(pair).is_some_and(|r| r.in_level0(x));
            if in0 {
                if *lx != Label::Const(a.clone()) {
                    return false;
                }
            } else if lx != ly {
                return false;
            }
        }
        true
    }

    /// A constant followed by a non-constant needs an eligible pair `(x, y)` whose dtree holds at the constant.
    fn guard_ok(&self, x: &Name, lx: &Label, y: &Name, ly: &Label, strict: bool) -> bool {
        let Label::Const(a) = lx else { return true };
        if matches!(ly, Label::Const(_)) {
            return true;
        }
        let pair = (x.clone(), y.clone());
        if !self.is_eligible(&pair) || !self.dtree_holds(&pair, a) {
            return false;
        }
        let Label::Anchored(p2, a2) = ly else { return false };
        if a2 != a {
            return false;
        }
        if strict {
            self.rep.get(&pair) == Some(p2)
        } else {
            let r = &self.reaches[&pair];
            r.in_level0(&p2.0) && r.level_of.get(&p2.1).is_some_and(|l| l.contains(&1)) && self.reaches.contains_key(p2)
        }
    }

    /// Components labeled entirely outside the database must map into the chase.
    fn mcc_conditions(&self, labels: &BTreeMap<Name, Label>, on: &BTreeSet<Name>) -> bool {
        let mut comps: BTreeMap<usize, Vec<&Name>> = BTreeMap::new();
        for (v, &i) in &self.mcc_of {
            comps.entry(i).or_default().push(v);
        }
        comps.iter().all(|(i, vs)| {
            let all_in = vs.iter().all(|v| on.contains(*v));
            let none_const = vs.iter().all(|v| !matches!(labels.get(*v), Some(Label::Const(_))));
            !(all_in && none_const) || self.mcc_ok[*i]
        })
    }
}

/// Depth of a rooted tree CQ (root = its answer variable).
fn tree_depth(t: &Cq) -> usize {
    let Some(root) = t.answer.first() else { return 0 };
    let mut depth: BTreeMap<&Name, usize> = BTreeMap::from([(root, 0)]);
    let mut frontier = vec![root];
    let mut best = 0;
    while let Some(v) = frontier.pop() {
        let dv = depth[v];
        for a in &t.atoms {
            if let Atom::Binary(_, x, y) = a {
                if x == v && !depth.contains_key(y) {
                    depth.insert(y, dv + 1);
                    best = best.max(dv + 1);
                    frontier.push(y);
                }
            }
        }
    }
    best
}

/// Whether `labels` is a D-labeling of `q` on the variables in `on`.
pub fn is_d_labeling(omq: &Omq, d: &Database, labels: &BTreeMap<Name, Label>, on: &BTreeSet<Name>) -> Result<bool> {
    require_elhdr(omq)?;
    let q = single_cq(omq)?;
    let Some(ctx) = LabelingContext::new(omq, q, d)? else {
        return Err(Error::Precondition("database is inconsistent with the ontology".into()));
    };
    Ok(check_labeling(&ctx, labels, on, false))
}

pub fn check_labeling(ctx: &LabelingContext, labels: &BTreeMap<Name, Label>, on: &BTreeSet<Name>, strict: bool) -> bool {
    let vars: Vec<&Name> = on.iter().filter(|v| ctx.q.vars.contains(*v)).collect();
    for v in &vars {
        let Some(l) = labels.get(*v) else { return false };
        if ctx.q.is_answer(v) && !matches!(l, Label::Const(_)) {
            return false;
        }
        if !ctx.unary_ok(v, l, strict) {
            return false;
        }
    }
    for (i, u) in vars.iter().enumerate() {
        for v in &vars[i + 1..] {
            if !ctx.pair_ok(u, &labels[*u], v, &labels[*v], strict) {
                return false;
            }
        }
    }
    ctx.mcc_conditions(labels, on)
}

fn single_cq(omq: &Omq) -> Result<&Cq> {
    match omq.query.disjuncts.as_slice() {
        [q] => Ok(q),
        _ => Err(Error::Precondition("expected a single CQ".into())),
    }
}

/// Labeling induced by a homomorphism into the chase.
pub fn labeling_from_homomorphism(ctx: &LabelingContext, h: &VarMap) -> BTreeMap<Name, Label> {
    let mut out = BTreeMap::new();
    for v in &ctx.q.vars {
        let c = &h[v];
        if ctx.originals.contains(c) {
            out.insert(v.clone(), Label::Const(c.clone()));
        }
    }
    // Anchor variables reachable from a crossing pair.
    for (pair, r) in &ctx.reaches {
        let (x, y) = pair;
        let (Some(Label::Const(a)), false) = (out.get(x).cloned(), ctx.originals.contains(&h[y])) else { continue };
        if !ctx.is_eligible(pair) || !ctx.dtree_holds(pair, &a) {
            continue;
        }
        let rep = ctx.rep[pair].clone();
        for z in r.all() {
            if !r.in_level0(&z) && !out.contains_key(&z) {
                out.insert(z, Label::Anchored(rep.clone(), a.clone()));
            }
        }
    }
    for v in &ctx.q.vars {
        out.entry(v.clone()).or_insert(Label::Exist);
    }
    out
}

/// The modified existential `(k+1)`-pebble game on `q+`; true iff Duplicator wins.
pub fn pebble_evaluate(omq: &Omq, d: &Database, a: &[Name], k: usize) -> Result<bool> {
    require_elhdr(omq)?;
    let q = single_cq(omq)?;
    let qp = extend_cq_plus(&omq.ontology, q)?;
    let Some(ctx) = LabelingContext::new(omq, &qp, d)? else {
        return Ok(true);
    };
    Game::new(&ctx, a, k)?.duplicator_wins()
}

/// Answers of a UCQ through the pebble game, one game per disjunct and candidate tuple.
pub fn pebble_answers(omq: &Omq, d: &Database, k: usize) -> Result<EvalResult> {
    require_elhdr(omq)?;
    check_schema(d, &omq.schema)?;
    let mut answers = BTreeSet::new();
    let mut consistent = true;
    let mut nodes = 0;
    let tuples = all_tuples(&d.domain(), omq.query.arity());
    for p in &omq.query.disjuncts {
        let qp = extend_cq_plus(&omq.ontology, p)?;
        let Some(ctx) = LabelingContext::new(omq, &qp, d)? else {
            consistent = false;
            answers = tuples.clone();
            break;
        };
        for t in &tuples {
            if answers.contains(t) {
                continue;
            }
            let mut game = Game::new(&ctx, t, k)?;
            nodes += game.positions();
            if game.duplicator_wins()? {
                answers.insert(t.clone());
            }
        }
    }
    Ok(EvalResult { consistent, answers, algorithm: Algorithm::Pebble, stats: EvalStats { chase_size: 0, search_nodes: nodes } })
}

/// Positions of the game: a partial labeling of at most `k+1` quantified
/// variables, stored per variable set as a bitset over mixed-radix label tuples.
struct Game {
    doms: Vec<Vec<u32>>,
    sets: Vec<VarSet>,
    set_id: HashMap<Vec<u16>, usize>,
    alive: FixedBitSet,
    dead_from_start: bool,
}

struct VarSet {
    vars: Vec<u16>,
    strides: Vec<usize>,
    offset: usize,
    len: usize,
}

impl Game {
    fn new(ctx: &LabelingContext, a: &[Name], k: usize) -> Result<Self> {
        let q = &ctx.q;
        if a.len() != q.arity() {
            return Err(Error::Precondition("tuple length differs from the query arity".into()));
        }
        let pinned: BTreeMap<Name, Label> =
            q.answer.iter().cloned().zip(a.iter().map(|c| Label::Const(c.clone()))).collect();
        let mut dead = q.answer.iter().zip(a).any(|(x, c)| pinned[x] != Label::Const(c.clone()));
        let pin_names: BTreeSet<Name> = pinned.keys().cloned().collect();
        if !check_labeling(ctx, &pinned, &pin_names, true) {
            dead = true;
        }
        let vars: Vec<Name> = q.quantified().into_iter().collect();
        let vid: HashMap<&Name, usize> = vars.iter().enumerate().map(|(i, v)| (v, i)).collect();
        let mut candidates: Vec<Label> = ctx.originals.iter().map(|c| Label::Const(c.clone())).collect();
        candidates.push(Label::Exist);
        for p in ctx.reaches.keys() {
            if ctx.rep.get(p) == Some(p) && ctx.is_eligible(p) {
                for c in &ctx.originals {
                    candidates.push(Label::Anchored(p.clone(), c.clone()));
                }
            }
        }
        let mut neighbours: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); vars.len()];
        let mut answer_links: Vec<Vec<Name>> = vec![vec![]; vars.len()];
        for atom in &q.atoms {
            if let Atom::Binary(_, x, y) = atom {
                match (vid.get(x), vid.get(y)) {
                    (Some(&i), Some(&j)) if i != j => {
                        neighbours[i].insert(j);
                        neighbours[j].insert(i);
                    }
                    (Some(&i), None) => answer_links[i].push(y.clone()),
                    (None, Some(&j)) => answer_links[j].push(x.clone()),
                    _ => {}
                }
            }
        }
        let mut domains: Vec<Vec<Label>> = vars
            .iter()
            .enumerate()
            .map(|(i, v)| {
                candidates
                    .iter()
                    .filter(|l| ctx.unary_ok(v, l, true))
                    .filter(|l| answer_links[i].iter().all(|x| ctx.pair_ok(v, l, x, &pinned[x], true)))
                    .cloned()
                    .collect()
            })
            .collect();
        // Arc consistency over atoms between quantified variables.
        loop {
            let mut changed = false;
            for i in 0..vars.len() {
                for &j in &neighbours[i] {
                    let before = domains[i].len();
                    let dj = domains[j].clone();
                    domains[i].retain(|l| dj.iter().any(|m| ctx.pair_ok(&vars[i], l, &vars[j], m, true)));
                    changed |= domains[i].len() != before;
                }
            }
            if !changed {
                break;
            }
        }
        if domains.iter().any(Vec::is_empty) {
            dead = true;
        }
        let mut game = Game {
            doms: domains.iter().map(|d| (0..d.len() as u32).collect()).collect(),
            sets: vec![],
            set_id: HashMap::new(),
            alive: FixedBitSet::new(),
            dead_from_start: dead,
        };
        if dead {
            return Ok(game);
        }
        // Compatibility tables for adjacent variables, indexed by domain positions.
        let mut compat: HashMap<(usize, usize), FixedBitSet> = HashMap::new();
        for i in 0..vars.len() {
            for &j in &neighbours[i] {
                let w = domains[j].len();
                let mut bits = FixedBitSet::with_capacity(domains[i].len() * w);
                for (li, l) in domains[i].iter().enumerate() {
                    for (lj, m) in domains[j].iter().enumerate() {
                        if ctx.pair_ok(&vars[i], l, &vars[j], m, true) {
                            bits.insert(li * w + lj);
                        }
                    }
                }
                compat.insert((i, j), bits);
            }
        }
        let width = (k + 1).min(vars.len());
        let mut layer: Vec<Vec<u16>> = vec![vec![]];
        let mut total = 0usize;
        for size in 0..=width {
            for vs in &layer {
                let mut strides = vec![0; vs.len()];
                let mut len = 1usize;
                for (p, &v) in vs.iter().enumerate().rev() {
                    strides[p] = len;
                    len = len.saturating_mul(domains[v as usize].len());
                }
                total = total.saturating_add(len);
                if total > POSITION_CAP {
                    return Err(Error::CapExceeded(format!("more than {POSITION_CAP} pebble positions")));
                }
                game.set_id.insert(vs.clone(), game.sets.len());
                game.sets.push(VarSet { vars: vs.clone(), strides, offset: 0, len });
            }
            if size == width {
                break;
            }
            layer = layer
                .iter()
                .flat_map(|vs| {
                    let start = vs.last().map_or(0, |&v| v as usize + 1);
                    (start..vars.len()).map(move |z| {
                        let mut v2 = vs.clone();
                        v2.push(z as u16);
                        v2
                    })
                })
                .collect();
        }
        let mut offset = 0;
        for s in &mut game.sets {
            s.offset = offset;
            offset += s.len;
        }
        game.alive = FixedBitSet::with_capacity(offset);
        let mut labels = Vec::new();
        for s in &game.sets {
            for idx in 0..s.len {
                s.decode(idx, &mut labels);
                let ok = (0..s.vars.len()).all(|p| {
                    (p + 1..s.vars.len()).all(|r| {
                        let (i, j) = (s.vars[p] as usize, s.vars[r] as usize);
                        match compat.get(&(i, j)) {
                            Some(bits) => bits.contains(labels[p] as usize * domains[j].len() + labels[r] as usize),
                            None => true,
                        }
                    })
                });
                if ok {
                    game.alive.insert(s.offset + idx);
                }
            }
        }
        Ok(game)
    }

    fn positions(&self) -> usize {
        self.alive.count_ones(..)
    }

    /// Index of `labels` (aligned with `vars`) extended or shrunk to the set `target`.
    fn entry(&self, target: usize, vars: &[u16], labels: &[u32], extra: Option<(u16, u32)>) -> usize {
        let t = &self.sets[target];
        let mut idx = t.offset;
        for (p, &v) in t.vars.iter().enumerate() {
            let l = match extra {
                Some((z, lz)) if z == v => lz,
                _ => labels[vars.iter().position(|&u| u == v).expect("variable in source set")],
            };
            idx += l as usize * t.strides[p];
        }
        idx
    }

    fn with_var(vars: &[u16], z: u16) -> Vec<u16> {
        let mut v2 = vars.to_vec();
        let at = v2.partition_point(|&u| u < z);
        v2.insert(at, z);
        v2
    }

    fn has_extension(&self, vars: &[u16], labels: &[u32], z: u16) -> bool {
        let ext = self.set_id[&Self::with_var(vars, z)];
        self.doms[z as usize].iter().any(|&l| self.alive.contains(self.entry(ext, vars, labels, Some((z, l)))))
    }

    /// Elimination: a position dies when some unpebbled variable has no
    /// surviving extension, or when a sub-position dies. Duplicator wins iff
    /// the empty position survives.
    fn duplicator_wins(&mut self) -> Result<bool> {
        if self.dead_from_start {
            return Ok(false);
        }
        let nvars = self.doms.len() as u16;
        let width = self.sets.iter().map(|s| s.vars.len()).max().unwrap_or(0);
        let mut queue: Vec<usize> = Vec::new();
        let mut labels = Vec::new();
        for sid in 0..self.sets.len() {
            let s = &self.sets[sid];
            if s.vars.len() >= width {
                continue;
            }
            for idx in 0..s.len {
                if !self.alive.contains(s.offset + idx) {
                    continue;
                }
                s.decode(idx, &mut labels);
                if (0..nvars).any(|z| !s.vars.contains(&z) && !self.has_extension(&s.vars, &labels, z)) {
                    queue.push(s.offset + idx);
                }
            }
        }
        for &g in &queue {
            self.alive.set(g, false);
        }
        while let Some(g) = queue.pop() {
            if g == 0 {
                return Ok(false);
            }
            let sid = self.sets.partition_point(|s| s.offset <= g) - 1;
            let vars = self.sets[sid].vars.clone();
            self.sets[sid].decode(g - self.sets[sid].offset, &mut labels);
            // Super-positions lose this sub-position.
            if vars.len() < width {
                for z in (0..nvars).filter(|z| !vars.contains(z)) {
                    let ext = self.set_id[&Self::with_var(&vars, z)];
                    for li in 0..self.doms[z as usize].len() as u32 {
                        let e = self.entry(ext, &vars, &labels, Some((z, li)));
                        if self.alive.contains(e) {
                            self.alive.set(e, false);
                            queue.push(e);
                        }
                    }
                }
            }
            // Sub-positions may have lost their last extension.
            for p in 0..vars.len() {
                let mut sub = vars.clone();
                let z = sub.remove(p);
                let mut sl = labels.clone();
                sl.remove(p);
                let sub_id = self.set_id[&sub];
                let e = self.entry(sub_id, &sub, &sl, None);
                if self.alive.contains(e) && !self.has_extension(&sub, &sl, z) {
                    self.alive.set(e, false);
                    queue.push(e);
                }
            }
        }
        Ok(self.alive.contains(0))
    }
}

impl VarSet {
    fn decode(&self, mut idx: usize, out: &mut Vec<u32>) {
        out.clear();
        for &s in &self.strides {
            out.push((idx / s) as u32);
            idx %= s;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::evaluate_naive;
    use crate::model::{Ontology, Schema, Ucq};
    use crate::surface::{parse_database, parse_ontology, parse_query};

    fn cq(s: &str) -> Cq {
        parse_query(s).unwrap().disjuncts.remove(0)
    }

    fn pair(x: &str, y: &str) -> GuardedPair {
        (x.into(), y.into())
    }

    #[test]
    fn reach_examples() {
        let r = reach(&cq("q() :- r(x,y)"), &pair("x", "y")).unwrap();
        assert_eq!(r.level(0), BTreeSet::from(["x".into()]));
        assert_eq!(r.level(1), BTreeSet::from(["y".into()]));
        let r = reach(&cq("q() :- r(x,y), s(y,z)"), &pair("x", "y")).unwrap();
        assert!(r.level(2).contains("z"));
        let r = reach(&cq("q() :- r(x,y), s(w,y)"), &pair("x", "y")).unwrap();
        assert!(r.level(0).contains("w"));
        assert!(reach(&cq("q(y) :- r(x,y)"), &pair("x", "y")).is_err());
    }

    #[test]
    fn eligibility_examples() {
        let (ok, t) = exists_eligible(&cq("q() :- r(x,y)"), &pair("x", "y")).unwrap();
        assert!(ok);
        assert_eq!(t.unwrap().atoms.len(), 1);
        let (ok, t) = exists_eligible(&cq("q() :- r(x,y), r(z,y)"), &pair("x", "y")).unwrap();
        assert!(ok);
        let t = t.unwrap();
        assert_eq!(t.vars.len(), 2);
        let (ok, _) = exists_eligible(&cq("q() :- r(x,y), s(y,v), t(v,y)"), &pair("x", "y")).unwrap();
        assert!(!ok);
    }

    #[test]
    fn mcc_examples() {
        assert_eq!(exists_mccs(&cq("q(x) :- A(x), r(u,v)")).len(), 1);
        assert_eq!(exists_mccs(&cq("q() :- r(x,y), s(y,z)")).len(), 1);
        assert!(exists_mccs(&cq("q(x) :- r(x,y)")).is_empty());
    }

    #[test]
    fn q_plus_examples() {
        let q = cq("q() :- A(x), r(x,y)");
        let empty = Omq::new(Ontology::empty(), Schema::full(), Ucq::single(q.clone()));
        assert_eq!(extend_query_plus(&empty).unwrap(), q);
        let o = parse_ontology("A <= B").unwrap();
        let plus = extend_query_plus(&Omq::new(o, Schema::full(), Ucq::single(q.clone()))).unwrap();
        assert_eq!(plus.atoms, q.atoms);
        let o = parse_ontology("exists r . top <= B").unwrap();
        let plus = extend_query_plus(&Omq::new(o, Schema::full(), Ucq::single(q.clone()))).unwrap();
        assert_eq!(plus.vars.len(), 3);
    }

    #[test]
    fn labeling_examples() {
        let d = parse_database("A(a)\nr(a,b)").unwrap();
        let omq = Omq::new(Ontology::empty(), Schema::full(), Ucq::single(cq("q() :- A(x), r(x,y)")));
        let on: BTreeSet<Name> = ["x".into(), "y".into()].into();
        let l = BTreeMap::from([("x".into(), Label::Const("a".into())), ("y".into(), Label::Const("b".into()))]);
        assert!(is_d_labeling(&omq, &d, &l, &on).unwrap());
        let bad = BTreeMap::from([("x".into(), Label::Exist), ("y".into(), Label::Const("b".into()))]);
        assert!(!is_d_labeling(&omq, &d, &bad, &on).unwrap());
        let o = parse_ontology("A <= exists r . top").unwrap();
        let omq = Omq::new(o, Schema::full(), Ucq::single(cq("q() :- A(x), r(x,y)")));
        let d = parse_database("A(a)").unwrap();
        let l = BTreeMap::from([
            ("x".into(), Label::Const("a".into())),
            ("y".into(), Label::Anchored(pair("x", "y"), "a".into())),
        ]);
        assert!(is_d_labeling(&omq, &d, &l, &on).unwrap());
    }

    #[test]
    fn game_agrees_on_small_cases() {
        let o = parse_ontology("A <= exists r . (B & exists s . C)\nB <= D").unwrap();
        let omq = Omq::new(o, Schema::full(), parse_query("q(x) :- r(x,y), D(y), s(y,z)").unwrap());
        let d = parse_database("A(a)\nr(b,c)\nB(c)").unwrap();
        let naive = evaluate_naive(&omq, &d).unwrap();
        let game = pebble_answers(&omq, &d, 1).unwrap();
        assert_eq!(naive.answers, game.answers);
        assert_eq!(naive.answers.len(), 1);
    }

    #[test]
    fn example_one_game() {
        let o = parse_ontology("A2 <= A4").unwrap();
        let q = "q() :- r(x2,x1), r(x4,x1), r(x2,x3), r(x4,x3), A1(x1), A2(x2), A3(x3), A4(x4)";
        let omq = Omq::new(o, Schema::full(), parse_query(q).unwrap());
        let d = parse_database("A1(a)\nA2(b)\nA3(c)\nr(b,a)\nr(b,c)").unwrap();
        assert!(pebble_evaluate(&omq, &d, &[], 1).unwrap());
        let d2 = parse_database("A1(a)\nA2(b)\nA3(c)\nr(b,a)").unwrap();
        assert!(!pebble_evaluate(&omq, &d2, &[], 1).unwrap());
    }
}
