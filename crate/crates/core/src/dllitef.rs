//! DL-Lite^F: the split into inclusions and functionality assertions,
//! functional merging of queries, the rewriting `rew` and UBCQ_1-equivalence.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Mutex;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graphalg::is_minor;
use crate::homtools::contractions;
use crate::entailment::is_consistent;
use crate::model::{concept_as_cq, gaifman_graph, Atom, Axiom, Concept, Cq, Database, Dialect, Fresh, Name, Omq, Ontology, Schema, Ucq};
use crate::treelike::{canonical_key, contains_full_schema, decide_tw_equiv_full, omq_entails, TwEquivVerdict};

/// Queries with more variables than this are refused by [`rew`].
pub const REW_VAR_CAP: usize = 10;

/// Candidate trees per contraction beyond which [`rew`] gives up.
pub const REW_TREE_CAP: usize = 24;

/// `O^⊑` and `O^=` of a DL-Lite^F ontology.
#[derive(Clone, Debug)]
pub struct FunctionalSplit {
    pub inclusions: Ontology,
    pub functionalities: BTreeSet<Name>,
}

pub fn split_ontology(o: &Ontology) -> Result<FunctionalSplit> {
    if !matches!(o.dialect, Dialect::DlLiteF | Dialect::DlLiteFEq) {
        return Err(Error::Precondition(format!("expected a DL-Lite^F ontology, got {}", o.dialect)));
    }
    Ok(split_any(o))
}

fn split_any(o: &Ontology) -> FunctionalSplit {
    let (funcs, rest): (Vec<Axiom>, Vec<Axiom>) =
        o.axioms.iter().cloned().partition(|a| matches!(a, Axiom::Functionality(_)));
    let functionalities = funcs
        .into_iter()
        .map(|a| match a {
            Axiom::Functionality(r) => r,
            _ => unreachable!(),
        })
        .collect();
    FunctionalSplit { inclusions: Ontology { dialect: o.dialect, axioms: rest }, functionalities }
}

/// No constant has two distinct `r`-successors for a functional `r`.
pub fn satisfies_functionality(d: &Database, funcs: &BTreeSet<Name>) -> bool {
    let mut succ: BTreeMap<(&Name, &Name), &Name> = BTreeMap::new();
    for f in &d.facts {
        if let Atom::Binary(r, a, b) = f {
            if funcs.contains(r) {
                if let Some(prev) = succ.insert((r, a), b) {
                    if prev != b {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Least contraction of `q` in which every functional role has at most one
/// successor per variable.
pub fn id_f_cq(q: &Cq, funcs: &BTreeSet<Name>) -> Cq {
    let mut cur = q.clone();
    loop {
        let mut succ: BTreeMap<(&Name, &Name), &Name> = BTreeMap::new();
        let mut clash = None;
        for a in &cur.atoms {
            if let Atom::Binary(r, x, y) = a {
                if !funcs.contains(r) {
                    continue;
                }
                match succ.insert((r, x), y) {
                    Some(prev) if prev != y => {
                        clash = Some((prev.clone(), y.clone()));
                        break;
                    }
                    _ => {}
                }
            }
        }
        let Some((y1, y2)) = clash else { return cur };
        let (keep, drop) = if cur.is_answer(&y2) || (!cur.is_answer(&y1) && y2 < y1) { (y2, y1) } else { (y1, y2) };
        cur = cur.rename(&BTreeMap::from([(drop.clone(), keep)]));
        cur.vars.remove(&drop);
    }
}

pub fn id_f(q: &Ucq, funcs: &BTreeSet<Name>) -> Ucq {
    Ucq { disjuncts: q.disjuncts.iter().map(|p| id_f_cq(p, funcs)).collect() }
}

/// How a generated query hangs off the generating atom.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GenMode {
    /// The query's single answer variable is the named term of the atom.
    Rooted(Name),
    /// The query is Boolean.
    Detached,
}

/// `{at}, O^⊑ |= p`, with `p`'s answer variable sent to the root in rooted mode.
pub fn generates(o: &Ontology, at: &Atom, p: &Cq, mode: &GenMode) -> Result<bool> {
    let incl = split_any(o).inclusions;
    let d = Database::from_facts([at.clone()])?;
    let tuple = match mode {
        GenMode::Rooted(x) => vec![x.clone()],
        GenMode::Detached => vec![],
    };
    if p.arity() != tuple.len() {
        return Err(Error::Precondition(format!("generated query has arity {}, expected {}", p.arity(), tuple.len())));
    }
    omq_entails(&incl, &Ucq::single(p.clone()), &d, &tuple)
}

/// A tree `r(x,y) ∧ φ(y)` hanging off the articulation point `x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QueryTree {
    pub root: Name,
    pub atoms: BTreeSet<Atom>,
}

impl QueryTree {
    /// The tree as a unary CQ answered at its root.
    pub fn as_cq(&self) -> Cq {
        Cq::from_parts(vec![self.root.clone()], self.atoms.iter().cloned().collect())
    }
}

/// Every tree of `q`: one per binary atom and orientation whose far side is
/// tree-shaped and attached to the rest of `q` only through that atom.
pub fn query_trees(q: &Cq) -> Vec<QueryTree> {
    let g = gaifman_graph(q);
    let mut out = Vec::new();
    for e in &q.atoms {
        let Atom::Binary(_, a, b) = e else { continue };
        if a == b {
            continue;
        }
        for (x, y) in [(a, b), (b, a)] {
            let mut comp = BTreeSet::from([y.clone()]);
            let mut stack = vec![y.clone()];
            while let Some(u) = stack.pop() {
                for w in g.neighbors(&u) {
                    if w != x && comp.insert(w.clone()) {
                        stack.push(w.clone());
                    }
                }
            }
            let atoms: BTreeSet<Atom> =
                q.atoms.iter().filter(|f| f.terms().iter().any(|t| comp.contains(*t))).cloned().collect();
            let linking = atoms.iter().filter(|f| f.terms().contains(&x)).count();
            let loops = atoms.iter().any(|f| matches!(f, Atom::Binary(_, s, t) if s == t));
            let edges = atoms.iter().filter(|f| f.arity() == 2).count();
            if linking == 1 && !loops && edges == comp.len() {
                out.push(QueryTree { root: x.clone(), atoms });
            }
        }
    }
    out
}

/// Shape of a generating atom relative to its root.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Pattern {
    Concept(Name),
    Out(Name),
    In(Name),
}

impl Pattern {
    fn at(&self, x: &Name, z: &Name) -> Atom {
        match self {
            Pattern::Concept(a) => Atom::unary(a.clone(), x.clone()),
            Pattern::Out(r) => Atom::binary(r.clone(), x.clone(), z.clone()),
            Pattern::In(r) => Atom::binary(r.clone(), z.clone(), x.clone()),
        }
    }
}

struct Generators<'a> {
    incl: &'a Ontology,
    patterns: Vec<Pattern>,
    cache: Mutex<HashMap<(String, bool), Vec<Pattern>>>,
}

impl Generators<'_> {
    fn of(&self, p: &Cq, rooted: bool) -> Result<Vec<Pattern>> {
        let key = (canonical_key(p), rooted);
        if let Some(v) = self.cache.lock().unwrap().get(&key) {
            return Ok(v.clone());
        }
        let x = Name::new("_gx");
        let z = Name::new("_gz");
        let (mode, q) = if rooted {
            let renamed = p.rename(&BTreeMap::from([(p.answer[0].clone(), x.clone())]));
            (GenMode::Rooted(x.clone()), renamed)
        } else {
            (GenMode::Detached, p.clone())
        };
        let mut found = Vec::new();
        for pat in &self.patterns {
            if generates(self.incl, &pat.at(&x, &z), &q, &mode)? {
                found.push(pat.clone());
            }
        }
        self.cache.lock().unwrap().insert(key, found.clone());
        Ok(found)
    }
}

fn require_boolean_full(q: &Omq) -> Result<()> {
    if !q.schema.full {
        return Err(Error::Schema("this operation needs the full schema".into()));
    }
    if q.query.disjuncts.iter().any(|p| p.arity() != 0) {
        return Err(Error::Precondition("expected a Boolean UCQ".into()));
    }
    Ok(())
}

/// Rewriting of a full-schema DL-Lite^F OMQ into a UBCQ that agrees with it on
/// every database satisfying the functionality assertions. Besides the
/// contraction, tree-removal and detachment disjuncts it carries one star per
/// way of deriving a disjointness violation, and concept atoms left on the
/// database side may be traded for an atom that derives them.
pub fn rew(q: &Omq) -> Result<Ucq> {
    require_boolean_full(q)?;
    if !q.ontology.dialect.is_dllite() {
        return Err(Error::Precondition(format!("expected a DL-Lite ontology, got {}", q.ontology.dialect)));
    }
    if let Some(p) = q.query.disjuncts.iter().find(|p| p.vars.len() > REW_VAR_CAP) {
        return Err(Error::CapExceeded(format!("{} variables in {p}, at most {REW_VAR_CAP} supported", p.vars.len())));
    }
    let incl = split_any(&q.ontology).inclusions;
    let (mut concepts, mut roles) = incl.signature();
    for p in &q.query.disjuncts {
        for a in &p.atoms {
            match a {
                Atom::Unary(c, _) => concepts.insert(c.clone()),
                Atom::Binary(r, _, _) => roles.insert(r.clone()),
            };
        }
    }
    let mut patterns: Vec<Pattern> = concepts.into_iter().map(Pattern::Concept).collect();
    for r in roles {
        patterns.push(Pattern::Out(r.clone()));
        patterns.push(Pattern::In(r));
    }
    let gens = Generators { incl: &incl, patterns, cache: Mutex::new(HashMap::new()) };
    let mut out: BTreeMap<String, Cq> = BTreeMap::new();
    for p in &q.query.disjuncts {
        let gp = gaifman_graph(p);
        let parts: Vec<Vec<Cq>> = contractions(p)
            .into_par_iter()
            .map(|(pc, _)| rew_contraction(&pc, &gp, &gens))
            .collect::<Result<_>>()?;
        for c in parts.into_iter().flatten() {
            out.entry(canonical_key(&c)).or_insert(c);
        }
    }
    for c in inconsistency_disjuncts(&gens)? {
        out.entry(canonical_key(&c)).or_insert(c);
    }
    Ok(Ucq { disjuncts: out.into_values().collect() })
}

/// Star-shaped BCQs matched exactly by the databases that violate a
/// disjointness axiom of `O^⊑`.
fn inconsistency_disjuncts(gens: &Generators) -> Result<Vec<Cq>> {
    let x = Name::new("x");
    let mut fresh = Fresh::new("z", [x.clone()]);
    let mut out = Vec::new();
    for pat in &gens.patterns {
        let at = pat.at(&x, &fresh.next());
        if !is_consistent(&Database::from_facts([at.clone()])?, gens.incl)? {
            out.push(Cq::boolean(vec![at]));
        }
    }
    for (lhs, rhs) in gens.incl.inclusions() {
        if rhs != Concept::Bot {
            continue;
        }
        let parts: Vec<&Concept> = lhs.conjuncts().into_iter().filter(|c| **c != Concept::Top).collect();
        let mut stars: Vec<Vec<Atom>> = vec![vec![]];
        if parts.is_empty() {
            stars = gens.patterns.iter().map(|p| vec![p.at(&x, &fresh.next())]).collect();
        }
        for b in parts {
            let shape = concept_as_cq(b, &x, &mut fresh)?;
            let z = fresh.next();
            let mut opts = Vec::new();
            for pat in &gens.patterns {
                let at = pat.at(&x, &z);
                if generates(gens.incl, &at, &shape, &GenMode::Rooted(x.clone()))? {
                    opts.push(at);
                }
            }
            stars = stars
                .into_iter()
                .flat_map(|s| {
                    opts.iter().map(move |at| {
                        let mut s = s.clone();
                        s.push(at.clone());
                        s
                    })
                })
                .collect();
        }
        out.extend(stars.into_iter().filter(|s| !s.is_empty()).map(Cq::boolean));
    }
    for rs in gens.incl.disjoint_roles() {
        let y = fresh.next();
        out.push(Cq::boolean(rs.iter().map(|r| Atom::binary(r.clone(), x.clone(), y.clone())).collect()));
    }
    Ok(out)
}

fn rew_contraction(pc: &Cq, gp: &crate::graphalg::Graph<Name>, gens: &Generators) -> Result<Vec<Cq>> {
    let mut trees = Vec::new();
    for t in query_trees(pc) {
        let g = gens.of(&t.as_cq(), true)?;
        if !g.is_empty() {
            trees.push((t, g));
        }
    }
    if trees.len() > REW_TREE_CAP {
        return Err(Error::CapExceeded(format!("{} generatable trees in {pc}", trees.len())));
    }
    let mut out = Vec::new();
    let mut chosen = Vec::new();
    choose_trees(0, &trees, &mut chosen, &mut |sel: &[usize]| -> Result<()> {
        let removed: BTreeSet<&Atom> = sel.iter().flat_map(|&i| trees[i].0.atoms.iter()).collect();
        let rest: Vec<Atom> = pc.atoms.iter().filter(|a| !removed.contains(a)).cloned().collect();
        let p2 = Cq::boolean(rest);
        if !is_minor(&gaifman_graph(&p2), gp)? {
            return Ok(());
        }
        let mut fresh = Fresh::new("z", pc.vars.iter().cloned());
        let mut partial: Vec<Vec<Atom>> = vec![vec![]];
        for a in &p2.atoms {
            let mut options = vec![a.clone()];
            if let Atom::Unary(_, x) = a {
                let z = fresh.next();
                let shape = Cq::from_parts(vec![x.clone()], vec![a.clone()]);
                options.extend(gens.of(&shape, true)?.iter().map(|pat| pat.at(x, &z)).filter(|b| b != a));
            }
            partial = partial
                .into_iter()
                .flat_map(|acc| {
                    options.iter().map(move |o| {
                        let mut acc = acc.clone();
                        acc.push(o.clone());
                        acc
                    })
                })
                .collect();
        }
        for &i in sel {
            let (t, pats) = &trees[i];
            let z = fresh.next();
            partial = partial
                .into_iter()
                .flat_map(|atoms| {
                    let z = z.clone();
                    pats.iter().map(move |pat| {
                        let mut a = atoms.clone();
                        a.push(pat.at(&t.root, &z));
                        a
                    })
                })
                .collect();
        }
        for atoms in partial {
            detach(&Cq::boolean(atoms), gens, &mut fresh, &mut out)?;
        }
        Ok(())
    })?;
    Ok(out)
}

/// All subsets of pairwise atom-disjoint trees.
fn choose_trees(
    i: usize,
    trees: &[(QueryTree, Vec<Pattern>)],
    chosen: &mut Vec<usize>,
    f: &mut dyn FnMut(&[usize]) -> Result<()>,
) -> Result<()> {
    if i == trees.len() {
        return f(chosen);
    }
    choose_trees(i + 1, trees, chosen, f)?;
    if chosen.iter().all(|&j| trees[j].0.atoms.is_disjoint(&trees[i].0.atoms)) {
        chosen.push(i);
        choose_trees(i + 1, trees, chosen, f)?;
        chosen.pop();
    }
    Ok(())
}

/// Every way of replacing detachedly generatable components by a generating atom.
fn detach(p: &Cq, gens: &Generators, fresh: &mut Fresh, out: &mut Vec<Cq>) -> Result<()> {
    let mut variants: Vec<Vec<Atom>> = vec![vec![]];
    for comp in gaifman_graph(p).components() {
        let part = p.restrict(&comp);
        let mut options = vec![part.atoms.clone()];
        let (x, z) = (fresh.next(), fresh.next());
        for pat in gens.of(&part, false)? {
            options.push(vec![pat.at(&x, &z)]);
        }
        variants = variants
            .into_iter()
            .flat_map(|acc| {
                options.iter().map(move |o| {
                    let mut a = acc.clone();
                    a.extend(o.iter().cloned());
                    a
                })
            })
            .collect();
    }
    out.extend(variants.into_iter().filter(|a| !a.is_empty()).map(Cq::boolean));
    Ok(())
}

/// UBCQ_1-equivalence of a full-schema DL-Lite^F OMQ, by reduction to the
/// functionality-free OMQ over the merged query.
pub fn decide_ubcq1_equiv(q: &Omq) -> Result<TwEquivVerdict> {
    require_boolean_full(q)?;
    let split = split_any(&q.ontology);
    let q2 = Omq::new(split.inclusions, Schema::full(), id_f(&q.query, &split.functionalities));
    Ok(match decide_tw_equiv_full(&q2, 1)? {
        TwEquivVerdict::Yes(w) => TwEquivVerdict::Yes(q.with_query(w.query)),
        other => other,
    })
}

/// Per-BCQ decider for [`ubcq_equiv_via_disjuncts`].
pub type BcqDecider<'a> = dyn Fn(&Omq, usize) -> Result<bool> + Sync + 'a;

/// Built-in per-BCQ decider; handles `k = 1` only.
pub fn bcq1_decider(q: &Omq, k: usize) -> Result<bool> {
    if k != 1 {
        return Err(Error::Precondition(format!("built-in decider handles k = 1, got {k}")));
    }
    Ok(decide_ubcq1_equiv(q)?.is_yes())
}

/// `(O, full, p) ⊆ (O, full, p2)` with functionality handled by merging.
pub fn contained_with_functionality(o: &Ontology, p: &Cq, p2: &Cq) -> Result<bool> {
    let split = split_any(o);
    let side = |c: &Cq| {
        Omq::new(split.inclusions.clone(), Schema::full(), Ucq::single(id_f_cq(c, &split.functionalities)))
    };
    contains_full_schema(&side(p), &side(p2))
}

/// UBCQ_k-equivalence assembled from a per-disjunct decider: every disjunct
/// must be accepted by the decider or be contained in an accepted disjunct.
pub fn ubcq_equiv_via_disjuncts(q: &Omq, k: usize, decider: &BcqDecider) -> Result<bool> {
    require_boolean_full(q)?;
    let ds = &q.query.disjuncts;
    let good: Vec<bool> =
        ds.iter().map(|p| decider(&q.with_query(Ucq::single(p.clone())), k)).collect::<Result<_>>()?;
    for (i, p) in ds.iter().enumerate() {
        if good[i] {
            continue;
        }
        let mut covered = false;
        for (j, p2) in ds.iter().enumerate() {
            if good[j] && contained_with_functionality(&q.ontology, p, p2)? {
                covered = true;
                break;
            }
        }
        if !covered {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphalg::cq_treewidth;
    use crate::surface::{parse_ontology, parse_query};

    fn dlf(src: &str) -> Ontology {
        let o = parse_ontology(src).unwrap();
        Ontology::new(Dialect::DlLiteF, o.axioms).unwrap()
    }

    fn bq(src: &str) -> Cq {
        parse_query(src).unwrap().disjuncts.remove(0)
    }

    fn funcs(rs: &[&str]) -> BTreeSet<Name> {
        rs.iter().map(|r| Name::new(r)).collect()
    }

    #[test]
    fn split_partitions_axioms() {
        let s = split_ontology(&dlf("A <= B\nfunc r")).unwrap();
        assert_eq!(s.inclusions.axioms.len(), 1);
        assert_eq!(s.functionalities, funcs(&["r"]));
        let s = split_ontology(&dlf("func r\nfunc s")).unwrap();
        assert!(s.inclusions.axioms.is_empty());
        assert_eq!(s.functionalities, funcs(&["r", "s"]));
        let s = split_ontology(&Ontology::new(Dialect::DlLiteF, vec![]).unwrap()).unwrap();
        assert!(s.inclusions.axioms.is_empty() && s.functionalities.is_empty());
        assert!(split_ontology(&Ontology::empty()).is_err());
    }

    #[test]
    fn functionality_check() {
        let d = Database::from_facts([Atom::binary("r", "a", "b"), Atom::binary("r", "a", "c")]).unwrap();
        assert!(!satisfies_functionality(&d, &funcs(&["r"])));
        assert!(satisfies_functionality(&d, &funcs(&[])));
        let d = Database::from_facts([Atom::binary("r", "a", "b"), Atom::binary("r", "a", "b")]).unwrap();
        assert!(satisfies_functionality(&d, &funcs(&["r"])));
    }

    #[test]
    fn id_f_merges_to_fixpoint() {
        let q = bq("q() :- r(x,y1), r(x,y2), A(y1), B(y2)");
        let m = id_f_cq(&q, &funcs(&["r"]));
        assert_eq!(m.vars.len(), 2);
        assert_eq!(m.atoms.len(), 3);
        assert_eq!(id_f_cq(&q, &funcs(&[])), q);
        let q = bq("q() :- r(x,y1), r(x,y2), s(y1,z1), s(y2,z2)");
        let m = id_f_cq(&q, &funcs(&["r", "s"]));
        assert_eq!(m.vars.len(), 3);
        assert_eq!(id_f_cq(&m, &funcs(&["r", "s"])), m);
    }

    #[test]
    fn generation_examples() {
        let o = dlf("A <= exists r . top\nexists inv(r) . top <= B");
        let x = Name::new("x");
        let root = GenMode::Rooted(x.clone());
        let at = Atom::unary("A", "x");
        assert!(generates(&o, &at, &bq("q(x) :- r(x,y), B(y)"), &root).unwrap());
        assert!(generates(&o, &at, &bq("q(x) :- A(x)"), &root).unwrap());
        let empty = Ontology::new(Dialect::DlLiteF, vec![]).unwrap();
        assert!(!generates(&empty, &at, &bq("q(x) :- r(x,y)"), &root).unwrap());
    }

    #[test]
    fn trees_need_an_articulation_point() {
        let q = bq("q() :- r(x,y), s(y,z), A(z), t(x,w), t(w,x)");
        let trees = query_trees(&q);
        assert!(trees.iter().any(|t| t.root == Name::new("x") && t.atoms.len() == 3));
        assert!(!trees.iter().any(|t| t.root == Name::new("x") && t.atoms.len() == 1));
    }

    #[test]
    fn rew_replaces_generated_trees() {
        let o = dlf("A <= exists r . top\nexists inv(r) . top <= B");
        let q = Omq::new(o, Schema::full(), Ucq::single(bq("q() :- r(x,y), B(y)")));
        let r = rew(&q).unwrap();
        assert!(r.disjuncts.iter().any(|p| p.atoms == vec![Atom::unary("A", p.vars.iter().next().unwrap().clone())]));
    }

    #[test]
    fn rew_without_ontology_is_the_minor_closed_contractions() {
        let p = bq("q() :- r(x,y), r(y,z), s(z,x), A(x), r(z,w)");
        let q = Omq::new(Ontology::new(Dialect::DlLiteF, vec![]).unwrap(), Schema::full(), Ucq::single(p.clone()));
        let got: BTreeSet<String> = rew(&q).unwrap().disjuncts.iter().map(canonical_key).collect();
        let gp = gaifman_graph(&p);
        let want: BTreeSet<String> = contractions(&p)
            .into_iter()
            .filter(|(c, _)| is_minor(&gaifman_graph(c), &gp).unwrap())
            .map(|(c, _)| canonical_key(&c))
            .collect();
        assert!(want.contains(&canonical_key(&p)));
        assert_eq!(got, want);
    }

    #[test]
    fn ubcq1_fixtures() {
        let o = dlf("func r");
        let merge = Omq::new(o.clone(), Schema::full(), Ucq::single(bq("q() :- r(x,y1), r(x,y2), A(y1), B(y2)")));
        match decide_ubcq1_equiv(&merge).unwrap() {
            TwEquivVerdict::Yes(w) => {
                assert_eq!(w.ontology.axioms, o.axioms);
                assert!(w.query.disjuncts.iter().all(|p| cq_treewidth(p).unwrap() <= 1));
            }
            v => panic!("expected Yes, got {}", v.label()),
        }
        let cycle = Omq::new(o, Schema::full(), Ucq::single(bq("q() :- r(x1,x2), s(x3,x2), r(x3,x4), s(x1,x4)")));
        assert!(decide_ubcq1_equiv(&cycle).unwrap().is_no());
    }

    #[test]
    fn disjunct_reduction() {
        let empty = Ontology::new(Dialect::DlLiteF, vec![]).unwrap();
        let tri = bq("q() :- r(x,y), r(y,z), r(z,x)");
        let tri_a = bq("q() :- r(x,y), r(y,z), r(z,x), A(x)");
        let path = bq("q() :- r(x,y)");
        let one = |ds: Vec<Cq>| Omq::new(empty.clone(), Schema::full(), Ucq { disjuncts: ds });
        assert!(!ubcq_equiv_via_disjuncts(&one(vec![tri.clone()]), 1, &bcq1_decider).unwrap());
        assert!(ubcq_equiv_via_disjuncts(&one(vec![tri.clone(), path]), 1, &bcq1_decider).unwrap());
        let four = bq("q() :- s(x,y), s(y,z), s(z,w), s(w,x), s(x,z)");
        assert!(!ubcq_equiv_via_disjuncts(&one(vec![tri_a.clone(), four]), 1, &bcq1_decider).unwrap());
        assert!(!ubcq_equiv_via_disjuncts(&one(vec![tri_a, tri]), 1, &bcq1_decider).unwrap());
    }
}
