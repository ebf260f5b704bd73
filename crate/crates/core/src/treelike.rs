//! Semantic tree-likeness: UCQ_k-approximations, full-schema containment,
//! maximum contractions and rewritings, and the deciders built on them.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use fixedbitset::FixedBitSet;
use rayon::prelude::*;

use crate::chase::canonical_model;
use crate::entailment::{is_consistent, normalize_horn, probed_reasoner, saturate_with, Reasoner};
use crate::error::{Error, Result};
use crate::eval::default_steps;
use crate::graphalg::{cq_treewidth, k_unravel, permutations};
use crate::homtools::{contractions, entails_tuple, find_homomorphism_in, Target, VarMap};
use crate::model::{
    check_dialect, concept_as_cq, cq_as_database, Atom, Axiom, Concept, Cq, Database, Dialect, Fresh, Name, Omq,
    Ontology, Role, Schema, Ucq,
};

/// Cap on states visited by the backward counterexample search.
pub const SEARCH_CAP: usize = 200_000;

/// Default number of constants for counterexample search.
pub const DEFAULT_BUDGET: usize = 5;

/// A database with a tuple separating two OMQs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub database: Database,
    pub tuple: Vec<Name>,
}

#[derive(Clone, Debug)]
pub enum TwEquivVerdict {
    Yes(Omq),
    No(Option<Counterexample>),
    Unknown(String),
}

impl TwEquivVerdict {
    pub fn label(&self) -> &'static str {
        match self {
            TwEquivVerdict::Yes(_) => "YES",
            TwEquivVerdict::No(_) => "NO",
            TwEquivVerdict::Unknown(_) => "UNKNOWN",
        }
    }

    pub fn is_yes(&self) -> bool {
        matches!(self, TwEquivVerdict::Yes(_))
    }

    pub fn is_no(&self) -> bool {
        matches!(self, TwEquivVerdict::No(_))
    }
}

fn require_full(q: &Omq) -> Result<()> {
    if q.schema.full {
        Ok(())
    } else {
        Err(Error::Schema("this operation needs the full schema".into()))
    }
}

/// Functionality assertions fall outside the Horn fragment handled here.
fn require_horn(o: &Ontology) -> Result<()> {
    match o.axioms.iter().find(|a| matches!(a, Axiom::Functionality(_))) {
        Some(a) => Err(Error::Dialect { axiom: a.to_string(), dialect: Dialect::ElhiBot }),
        None => Ok(()),
    }
}

/// Canonical string of a CQ up to renaming of quantified variables.
///
/// Variables are colored by iterated neighborhood refinement; ties are broken
/// by trying every order within color classes when that is cheap, and by name
/// otherwise (so very symmetric queries may get distinct keys).
pub fn canonical_key(q: &Cq) -> String {
    let quant: Vec<Name> = q.quantified().into_iter().collect();
    let answer_pos = |v: &Name| q.answer.iter().position(|a| a == v);
    let mut color: BTreeMap<Name, String> = quant.iter().map(|v| (v.clone(), String::new())).collect();
    let term = |v: &Name, color: &BTreeMap<Name, String>| match answer_pos(v) {
        Some(i) => format!("a{i}"),
        None => format!("c[{}]", color[v]),
    };
    let mut classes = 0;
    loop {
        let mut next = BTreeMap::new();
        for v in &quant {
            let mut sig: Vec<String> = q
                .atoms_of(v)
                .map(|a| match a {
                    Atom::Unary(p, _) => format!("{p}"),
                    Atom::Binary(p, x, y) if x == y => format!("{p}@"),
                    Atom::Binary(p, x, y) if x == v => format!("{p}>{}", term(y, &color)),
                    Atom::Binary(p, x, _) => format!("{p}<{}", term(x, &color)),
                })
                .collect();
            sig.sort();
            next.insert(v.clone(), format!("{}|{}", color[v], sig.join(",")));
        }
        // Compress colors to ranks to keep strings short.
        let distinct: BTreeSet<&String> = next.values().collect();
        let rank: BTreeMap<&String, usize> = distinct.iter().enumerate().map(|(i, s)| (*s, i)).collect();
        let compressed: BTreeMap<Name, String> = next.iter().map(|(v, s)| (v.clone(), rank[s].to_string())).collect();
        let n = distinct.len();
        color = compressed;
        if n == classes {
            break;
        }
        classes = n;
    }
    let mut groups: BTreeMap<usize, Vec<Name>> = BTreeMap::new();
    for v in &quant {
        groups.entry(color[v].parse::<usize>().unwrap()).or_default().push(v.clone());
    }
    let groups: Vec<Vec<Name>> = groups.into_values().collect();
    let cost: f64 = groups.iter().map(|g| (1..=g.len()).map(|i| i as f64).product::<f64>()).product();
    let render = |order: &[Name]| -> String {
        let names: BTreeMap<&Name, String> = order.iter().enumerate().map(|(i, v)| (v, format!("v{i}"))).collect();
        let t = |v: &Name| match answer_pos(v) {
            Some(i) => format!("a{i}"),
            None => names[v].clone(),
        };
        let mut atoms: Vec<String> = q
            .atoms
            .iter()
            .map(|a| match a {
                Atom::Unary(p, x) => format!("{p}({})", t(x)),
                Atom::Binary(p, x, y) => format!("{p}({},{})", t(x), t(y)),
            })
            .collect();
        atoms.sort();
        format!("{}:{}", q.answer.len(), atoms.join(","))
    };
    if cost > 5040.0 {
        let order: Vec<Name> = groups.concat();
        return render(&order);
    }
    let perms: Vec<Vec<Vec<usize>>> = groups.iter().map(|g| permutations(g.len())).collect();
    let mut best: Option<String> = None;
    let mut idx = vec![0usize; groups.len()];
    loop {
        let order: Vec<Name> =
            groups.iter().zip(&perms).zip(&idx).flat_map(|((g, ps), &i)| ps[i].iter().map(|&j| g[j].clone())).collect();
        let s = render(&order);
        if best.as_ref().is_none_or(|b| s < *b) {
            best = Some(s);
        }
        let mut pos = 0;
        loop {
            if pos == idx.len() {
                return best.unwrap();
            }
            idx[pos] += 1;
            if idx[pos] < perms[pos].len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

pub fn isomorphic(p: &Cq, q: &Cq) -> bool {
    p.arity() == q.arity() && p.atoms.len() == q.atoms.len() && canonical_key(p) == canonical_key(q)
}

/// All contractions of disjuncts with treewidth at most `k`, up to isomorphism.
pub fn ucq_k_approximation(q: &Omq, k: usize) -> Result<Omq> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for p in &q.query.disjuncts {
        for (c, _) in contractions(p) {
            if cq_treewidth(&c)? <= k && seen.insert(canonical_key(&c)) {
                out.push(c);
            }
        }
    }
    Ok(q.with_query(Ucq { disjuncts: out }))
}

/// Whether `p` has a disjunct entailed at the answer tuple of `q1` over `ch_o(D_q1)`.
fn disjunct_contained(o: &Ontology, q1: &Cq, q2: &Ucq) -> Result<bool> {
    let d = cq_as_database(q1);
    let model = match canonical_model(&d, o, default_steps(q2).max(1)) {
        Ok(m) => m,
        Err(Error::Inconsistent) => return Ok(true),
        Err(e) => return Err(e),
    };
    let target = Target::with_constants(&model.facts, q1.vars.iter().cloned());
    Ok(q2.disjuncts.iter().any(|p| {
        p.arity() == q1.arity() && {
            let mut fixed = VarMap::new();
            let ok = p.answer.iter().zip(&q1.answer).all(|(x, a)| match fixed.get(x) {
                Some(b) => b == a,
                None => {
                    fixed.insert(x.clone(), a.clone());
                    true
                }
            });
            ok && find_homomorphism_in(p, &target, &fixed).is_some()
        }
    }))
}

/// `Q1 ⊆ Q2` for full-schema OMQs: every consistent disjunct of `Q1`, read as a
/// database, entails `Q2` at its own answer tuple under the ontology of `Q2`.
pub fn contains_full_schema(q1: &Omq, q2: &Omq) -> Result<bool> {
    require_full(q1)?;
    require_full(q2)?;
    require_horn(&q1.ontology)?;
    require_horn(&q2.ontology)?;
    for p in &q1.query.disjuncts {
        if !is_consistent(&cq_as_database(p), &q1.ontology)? {
            continue;
        }
        if !disjunct_contained(&q2.ontology, p, &q2.query)? {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn equivalent_full_schema(q1: &Omq, q2: &Omq) -> Result<bool> {
    Ok(contains_full_schema(q1, q2)? && contains_full_schema(q2, q1)?)
}

pub fn is_empty_full_schema(q: &Omq) -> Result<bool> {
    require_full(q)?;
    for p in &q.query.disjuncts {
        if is_consistent(&cq_as_database(p), &q.ontology)? {
            return Ok(false);
        }
    }
    Ok(true)
}

fn single_cq(q: &Omq) -> Result<&Cq> {
    match q.query.disjuncts.as_slice() {
        [p] => Ok(p),
        _ => Err(Error::Precondition("expected a single CQ".into())),
    }
}

fn with_cq(q: &Omq, p: Cq) -> Omq {
    q.with_query(Ucq::single(p))
}

/// Contractions of `q` that preserve equivalence and admit no proper
/// equivalence-preserving contraction, up to isomorphism.
pub fn maximum_contractions(q: &Omq) -> Result<Vec<Omq>> {
    require_full(q)?;
    require_horn(&q.ontology)?;
    let p = single_cq(q)?;
    if is_empty_full_schema(q)? {
        return Err(Error::Precondition("the OMQ is empty".into()));
    }
    let all = contractions(p);
    let equiv: Vec<bool> = all
        .par_iter()
        .map(|(c, _)| equivalent_full_schema(q, &with_cq(q, c.clone())))
        .collect::<Result<Vec<_>>>()?;
    let good: Vec<&(Cq, crate::homtools::ContractionSpec)> =
        all.iter().zip(&equiv).filter(|(_, e)| **e).map(|(c, _)| c).collect();
    let coarser = |a: &[BTreeSet<Name>], b: &[BTreeSet<Name>]| {
        a.len() < b.len() && b.iter().all(|blk| a.iter().any(|big| blk.is_subset(big)))
    };
    let mut out: Vec<Omq> = Vec::new();
    let mut seen = HashSet::new();
    for (c, spec) in &good {
        if good.iter().any(|(_, s2)| coarser(&s2.blocks, &spec.blocks)) {
            continue;
        }
        if seen.insert(canonical_key(c)) {
            out.push(with_cq(q, c.clone()));
        }
    }
    Ok(out)
}

/// Pairs `(x, C)` with `C` a left-hand side of the ontology and `x` in `C` in the chase of `D_q`.
pub fn lhs_attachments(o: &Ontology, q: &Cq) -> Result<Vec<(Name, Concept)>> {
    let lhs: BTreeSet<Concept> =
        o.inclusions().into_iter().map(|(c, _)| c).filter(|c| *c != Concept::Top && !c.has_bot()).collect();
    if lhs.is_empty() {
        return Ok(vec![]);
    }
    let extra: Vec<Concept> = lhs.iter().cloned().collect();
    let (mut r, probes) = probed_reasoner(o, &extra)?;
    let sat = saturate_with(&mut r, &cq_as_database(q));
    let mut out = Vec::new();
    for x in &q.vars {
        let Some(t) = sat.type_of(x) else { continue };
        for c in &lhs {
            let Some((_, id)) = probes.iter().find(|(p, _)| p == c) else { continue };
            if sat.inconsistent || t.contains(*id) {
                out.push((x.clone(), c.clone()));
            }
        }
    }
    Ok(out)
}

/// `base` extended with a fresh copy of `q_C` rooted at `x` for each attachment.
pub fn attach(base: &Cq, attachments: &[(Name, Concept)], avoid: &BTreeSet<Name>) -> Result<Cq> {
    let mut fresh = Fresh::new("u", avoid.iter().cloned().chain(base.vars.iter().cloned()));
    let mut atoms = base.atoms.clone();
    let mut vars = base.vars.clone();
    for (x, c) in attachments {
        let copy = concept_as_cq(c, x, &mut fresh)?;
        vars.extend(copy.vars.iter().cloned());
        atoms.extend(copy.atoms);
    }
    let mut out = Cq::from_parts(base.answer.clone(), atoms);
    out.vars = vars;
    Ok(out)
}

/// `q'`: `q` with all left-hand-side copies attached.
pub fn extend_with_lhs(o: &Ontology, q: &Cq) -> Result<Cq> {
    attach(q, &lhs_attachments(o, q)?, &BTreeSet::new())
}

/// A rewriting built from the first maximum contraction and the first
/// homomorphism into the chase of `D_q`.
pub fn rewriting(q: &Omq) -> Result<Omq> {
    let p = single_cq(q)?;
    let maxc = maximum_contractions(q)?;
    let qc = single_cq(&maxc[0])?.clone();
    let steps = qc.vars.len().max(1);
    let model = canonical_model(&cq_as_database(p), &q.ontology, steps)?;
    let target = Target::with_constants(&model.facts, p.vars.iter().cloned());
    let fixed: VarMap = qc.answer.iter().map(|x| (x.clone(), x.clone())).collect();
    let h = find_homomorphism_in(&qc, &target, &fixed)
        .ok_or_else(|| Error::Precondition("maximum contraction has no homomorphism into the chase".into()))?;
    let range: BTreeSet<Name> = h.values().cloned().collect();
    let w: BTreeSet<Name> = range.iter().filter(|c| p.vars.contains(*c)).cloned().collect();
    let mut v = w.clone();
    for c in &range {
        if let Some(root) = chase_root(&model.provenance, c) {
            if p.vars.contains(&root) {
                v.insert(root);
            }
        }
    }
    let atts: Vec<(Name, Concept)> = lhs_attachments(&q.ontology, p)?.into_iter().filter(|(x, _)| v.contains(x)).collect();
    let mut base = p.restrict(&w);
    base.vars.extend(v.iter().cloned());
    let out = attach(&base, &atts, &p.vars)?;
    Ok(with_cq(q, out))
}

fn chase_root(prov: &BTreeMap<Name, crate::chase::Provenance>, c: &Name) -> Option<Name> {
    use crate::chase::Provenance;
    let mut cur = c.clone();
    let mut hops = 0;
    loop {
        match prov.get(&cur)? {
            Provenance::Original => return if hops == 0 { None } else { Some(cur) },
            Provenance::TypeCopy { origin, .. } => return Some(origin.clone()),
            Provenance::Anonymous { parent, .. } => {
                cur = parent.clone();
                hops += 1;
            }
        }
    }
}

/// Disjuncts that survive pruning: consistent, and not contained in another survivor.
pub fn prune_disjuncts(q: &Omq) -> Result<Vec<Cq>> {
    let mut alive: Vec<Cq> = Vec::new();
    for p in &q.query.disjuncts {
        if is_consistent(&cq_as_database(p), &q.ontology)? {
            alive.push(p.clone());
        }
    }
    let mut i = 0;
    while i < alive.len() {
        let qi = with_cq(q, alive[i].clone());
        let mut drop = false;
        for (j, pj) in alive.iter().enumerate() {
            if i == j {
                continue;
            }
            let qj = with_cq(q, pj.clone());
            if contains_full_schema(&qi, &qj)? && (!contains_full_schema(&qj, &qi)? || j < i) {
                drop = true;
                break;
            }
        }
        if drop {
            alive.remove(i);
        } else {
            i += 1;
        }
    }
    Ok(alive)
}

/// Subquery candidates of `q'`: a kept variable set `W` containing the answer
/// variables, plus the left-hand-side copies at every variable of some `V ⊇ W`.
fn candidates(p: &Cq, atts: &[(Name, Concept)], k: usize) -> Result<Vec<Cq>> {
    let quant: Vec<Name> = p.quantified().into_iter().collect();
    let att_vars: BTreeSet<Name> = atts.iter().map(|(x, _)| x.clone()).collect();
    let mut out: Vec<Cq> = Vec::new();
    let mut seen = HashSet::new();
    let n = quant.len();
    if n > 16 {
        return Err(Error::CapExceeded(format!("{n} quantified variables exceed the subquery enumeration cap")));
    }
    for wmask in 0u32..(1 << n) {
        let w: BTreeSet<Name> = p
            .answer
            .iter()
            .cloned()
            .chain(quant.iter().enumerate().filter(|(i, _)| wmask >> i & 1 == 1).map(|(_, v)| v.clone()))
            .collect();
        let extra: Vec<&Name> = p.vars.iter().filter(|v| !w.contains(*v) && att_vars.contains(*v)).collect();
        let w_att: Vec<&Name> = w.iter().filter(|v| att_vars.contains(*v)).collect();
        // Copies are all-or-nothing per variable.
        let choices = 1u32 << (w_att.len() + extra.len());
        for vmask in 0..choices {
            let mut chosen: BTreeSet<&Name> = BTreeSet::new();
            for (i, x) in w_att.iter().chain(extra.iter()).enumerate() {
                if vmask >> i & 1 == 1 {
                    chosen.insert(x);
                }
            }
            let sel: Vec<(Name, Concept)> = atts.iter().filter(|(x, _)| chosen.contains(x)).cloned().collect();
            let mut base = p.restrict(&w);
            base.vars.extend(chosen.iter().map(|x| (*x).clone()));
            let c = attach(&base, &sel, &p.vars)?;
            if c.atoms.is_empty() || c.vars.iter().any(|v| c.atoms_of(v).next().is_none()) {
                continue;
            }
            if cq_treewidth(&c)? > k {
                continue;
            }
            if seen.insert(canonical_key(&c)) {
                out.push(c);
            }
        }
    }
    out.sort_by(|a, b| (a.atoms.len(), a.vars.len(), canonical_key(a)).cmp(&(b.atoms.len(), b.vars.len(), canonical_key(b))));
    Ok(out)
}

/// Exact CQ_k-equivalence for full-schema OMQs.
pub fn decide_tw_equiv_full(q: &Omq, k: usize) -> Result<TwEquivVerdict> {
    require_full(q)?;
    require_horn(&q.ontology)?;
    let alive = prune_disjuncts(q)?;
    if alive.is_empty() {
        return empty_witness(q, k);
    }
    let mut witnesses = Vec::new();
    for p in &alive {
        let qp = with_cq(q, p.clone());
        let atts = lhs_attachments(&q.ontology, p)?;
        let cands = candidates(p, &atts, k)?;
        let verdicts: Vec<Result<bool>> = cands.par_iter().map(|c| equivalent_full_schema(&qp, &with_cq(q, c.clone()))).collect();
        let mut found = None;
        for (c, v) in cands.iter().zip(verdicts) {
            if v? {
                found = Some(c.clone());
                break;
            }
        }
        match found {
            Some(c) => witnesses.push(c),
            None => return Ok(TwEquivVerdict::No(full_schema_counterexample(q, p, k)?)),
        }
    }
    let witness = q.with_query(Ucq { disjuncts: witnesses });
    debug_assert!(equivalent_full_schema(q, &witness)?);
    Ok(TwEquivVerdict::Yes(witness))
}

/// `D_p` with the answer tuple of `p`, if it separates `Q` from its approximation.
fn full_schema_counterexample(q: &Omq, p: &Cq, k: usize) -> Result<Option<Counterexample>> {
    let qa = ucq_k_approximation(q, k)?;
    if disjunct_contained(&q.ontology, p, &qa.query)? {
        return Ok(None);
    }
    Ok(Some(Counterexample { database: cq_as_database(p), tuple: p.answer.clone() }))
}

/// Witness for an empty OMQ: an inconsistent candidate of treewidth at most `k`,
/// falling back to a 1-unraveling of the first disjunct.
fn empty_witness(q: &Omq, k: usize) -> Result<TwEquivVerdict> {
    let p = &q.query.disjuncts[0];
    let atts = lhs_attachments(&q.ontology, p)?;
    for c in candidates(p, &atts, k)? {
        if !is_consistent(&cq_as_database(&c), &q.ontology)? {
            return Ok(TwEquivVerdict::Yes(with_cq(q, c)));
        }
    }
    let d = cq_as_database(p);
    let u = k_unravel(&d, &p.answer, 1, p.vars.len() + 1)?;
    let c = Cq::from_parts(p.answer.clone(), u.database.facts.iter().cloned().collect());
    if !is_consistent(&u.database, &q.ontology)? && cq_treewidth(&c)? <= k {
        return Ok(TwEquivVerdict::Yes(with_cq(q, c)));
    }
    Ok(TwEquivVerdict::Unknown("the OMQ is empty but no small inconsistent witness was found".into()))
}

/// CQ_k/UCQ_k-equivalence: exact for the full schema, a bounded counterexample search otherwise.
pub fn decide_tw_equiv_general(q: &Omq, k: usize, budget: usize) -> Result<TwEquivVerdict> {
    require_horn(&q.ontology)?;
    if q.schema.full {
        return decide_tw_equiv_full(q, k);
    }
    let qa = ucq_k_approximation(q, k)?;
    let outcome = counterexample_search(q, &qa, budget)?;
    Ok(match outcome.counterexample {
        Some(cx) => TwEquivVerdict::No(Some(cx)),
        None => TwEquivVerdict::Unknown(format!(
            "no counterexample with at most {budget} constants ({} states{})",
            outcome.explored,
            if outcome.complete { "" } else { ", search cap reached" }
        )),
    })
}

#[derive(Clone, Debug)]
pub struct SearchOutcome {
    pub counterexample: Option<Counterexample>,
    pub explored: usize,
    /// False when the state cap cut the search short.
    pub complete: bool,
}

/// Search for an S-database `D` and tuple `a` with `D |= Q1(a)` and `D ⊭ Q2(a)`,
/// over databases of at most `budget` constants derived backwards from `Q1`.
pub fn counterexample_search(q1: &Omq, q2: &Omq, budget: usize) -> Result<SearchOutcome> {
    require_horn(&q1.ontology)?;
    require_horn(&q2.ontology)?;
    let back = Backward::new(&q1.ontology, &q1.query)?;
    let schema = q1.schema.clone();
    let accept = |s: &Cq| -> Result<Option<Counterexample>> {
        let d = cq_as_database(s);
        if !omq_entails(&q1.ontology, &q1.query, &d, &s.answer)? {
            return Ok(None);
        }
        if q2.query.disjuncts.is_empty() || !omq_entails(&q2.ontology, &q2.query, &d, &s.answer)? {
            return Ok(Some(Counterexample { database: d, tuple: s.answer.clone() }));
        }
        Ok(None)
    };
    back.search(&q1.query.disjuncts, &schema, budget, &accept)
}

/// `O, D |= q(a)` through the canonical model; inconsistent inputs entail everything.
pub fn omq_entails(o: &Ontology, q: &Ucq, d: &Database, a: &[Name]) -> Result<bool> {
    let model = match canonical_model(d, o, default_steps(q).max(1)) {
        Ok(m) => m,
        Err(Error::Inconsistent) => return Ok(true),
        Err(e) => return Err(e),
    };
    let target = Target::with_constants(&model.facts, d.domain().into_iter().chain(a.iter().cloned()));
    Ok(q.disjuncts.iter().any(|p| p.arity() == a.len() && entails_tuple(p, &target, a)))
}

/// `Q1 ⊆ Q2` for DL-Lite^R_horn OMQs over any schema, by exhaustive backward
/// search over databases with at most `|q1| * (|Σ| + 1)` constants.
pub fn contains_dllite_horn(q1: &Omq, q2: &Omq) -> Result<bool> {
    Ok(dllite_horn_witness(q1, q2)?.is_none())
}

/// A witness of non-containment, if one exists within the bound.
pub fn dllite_horn_witness(q1: &Omq, q2: &Omq) -> Result<Option<Counterexample>> {
    check_dialect(&q1.ontology, Dialect::DlLiteRHorn)?;
    check_dialect(&q2.ontology, Dialect::DlLiteRHorn)?;
    let size = q1.query.disjuncts.iter().map(Cq::size).max().unwrap_or(0);
    let sigma = q1.schema_names().len();
    let bound = size * (sigma + 1);
    let outcome = counterexample_search(q1, q2, bound)?;
    if outcome.counterexample.is_none() && !outcome.complete {
        return Err(Error::CapExceeded(format!("containment search visited {} states", outcome.explored)));
    }
    Ok(outcome.counterexample)
}

/// Backward chaining over the ontology, from query atoms towards database facts.
struct Backward {
    reasoner: Reasoner,
    /// Concept name -> left-hand sides whose right-hand side entails it.
    unary: BTreeMap<Name, Vec<Concept>>,
    /// Role name -> strictly smaller roles.
    roles: BTreeMap<Name, Vec<Role>>,
    /// Left-hand side -> anonymous children it forces: (role, child type).
    folds: Vec<(Concept, Vec<(Role, FixedBitSet)>)>,
    ids: BTreeMap<Name, usize>,
}

impl Backward {
    fn new(o: &Ontology, q: &Ucq) -> Result<Self> {
        let mut no = normalize_horn(o)?;
        let incl: Vec<(Concept, Concept)> = o.inclusions().into_iter().filter(|(_, d)| *d != Concept::Bot).collect();
        let rhs_ids: Vec<usize> = incl.iter().map(|(_, d)| no.rhs_name(d)).collect();
        let lhs_seed: Vec<usize> = incl.iter().map(|(c, _)| no.rhs_name(c)).collect();
        let (mut concepts, role_names) = o.signature();
        for p in &q.disjuncts {
            for a in &p.atoms {
                if let Atom::Unary(n, _) = a {
                    concepts.insert(n.clone());
                }
            }
        }
        let ids: BTreeMap<Name, usize> = concepts.iter().map(|c| (c.clone(), no.intern(c))).collect();
        let mut reasoner = Reasoner::new(no);
        let mut unary: BTreeMap<Name, Vec<Concept>> = BTreeMap::new();
        for ((c, _), &rid) in incl.iter().zip(&rhs_ids) {
            let t = reasoner.closure(&reasoner.seed_of([rid]));
            for (a, &aid) in &ids {
                if t.contains(aid) && !matches!(c, Concept::Atomic(x) if x == a) {
                    let list = unary.entry(a.clone()).or_default();
                    if !list.contains(c) {
                        list.push(c.clone());
                    }
                }
            }
        }
        let mut roles = BTreeMap::new();
        for r in &role_names {
            let me = Role::new(r.clone());
            let subs: Vec<Role> = reasoner.roles.subs(&me).into_iter().filter(|s| *s != me).collect();
            if !subs.is_empty() {
                roles.insert(r.clone(), subs);
            }
        }
        let mut folds = Vec::new();
        let mut seen = BTreeSet::new();
        for ((c, _), &sid) in incl.iter().zip(&lhs_seed) {
            if !seen.insert(c.clone()) {
                continue;
            }
            let t = reasoner.closure(&reasoner.seed_of([sid]));
            if reasoner.is_bot(&t) {
                continue;
            }
            let kids: Vec<(Role, FixedBitSet)> = reasoner.children(&t).into_iter().map(|(r, _, ct)| (r, ct)).collect();
            if !kids.is_empty() {
                folds.push((c.clone(), kids));
            }
        }
        Ok(Backward { reasoner, unary, roles, folds, ids })
    }

    fn replace(&self, s: &Cq, remove: &[&Atom], x: &Name, c: &Concept) -> Result<Cq> {
        let atoms: Vec<Atom> = s.atoms.iter().filter(|a| !remove.contains(a)).cloned().collect();
        let mut base = Cq::from_parts(s.answer.clone(), atoms);
        base.vars = base.atoms.iter().flat_map(|a| a.terms().into_iter().cloned()).chain(s.answer.iter().cloned()).collect();
        base.vars.insert(x.clone());
        attach(&base, &[(x.clone(), c.clone())], &BTreeSet::new())
    }

    fn successors(&self, s: &Cq) -> Result<Vec<Cq>> {
        let mut out = Vec::new();
        for a in &s.atoms {
            match a {
                Atom::Unary(p, x) => {
                    for c in self.unary.get(p).into_iter().flatten() {
                        if *c == Concept::Top && s.atoms_of(x).count() == 1 {
                            continue;
                        }
                        out.push(self.replace(s, &[a], x, c)?);
                    }
                }
                Atom::Binary(p, x, y) => {
                    for r in self.roles.get(p).into_iter().flatten() {
                        let atoms: Vec<Atom> =
                            s.atoms.iter().map(|b| if b == a { r.atom(x.clone(), y.clone()) } else { b.clone() }).collect();
                        out.push(Cq::from_parts(s.answer.clone(), atoms));
                    }
                }
            }
        }
        // Fold a quantified leaf into its only neighbor.
        for y in s.quantified() {
            let mine: Vec<&Atom> = s.atoms_of(&y).collect();
            let mut parent: Option<&Name> = None;
            let mut roles: Vec<Role> = Vec::new();
            let mut unary: Vec<usize> = Vec::new();
            let mut ok = true;
            for a in &mine {
                match a {
                    Atom::Unary(p, _) => match self.ids.get(p) {
                        Some(&id) => unary.push(id),
                        None => ok = false,
                    },
                    Atom::Binary(p, u, v) => {
                        let (other, role) = if v == &y && u != &y {
                            (u, Role::new(p.clone()))
                        } else if u == &y && v != &y {
                            (v, Role::inv_of(p.clone()))
                        } else {
                            ok = false;
                            continue;
                        };
                        if parent.is_some_and(|x| x != other) {
                            ok = false;
                        }
                        parent = Some(other);
                        roles.push(role);
                    }
                }
            }
            let Some(x) = parent else { continue };
            if !ok {
                continue;
            }
            for (c, kids) in &self.folds {
                let fits = kids.iter().any(|(r, ct)| {
                    roles.iter().all(|rho| self.reasoner.roles.entails(r, rho)) && unary.iter().all(|&u| ct.contains(u))
                });
                if fits {
                    out.push(self.replace(s, &mine, x, c)?);
                }
            }
        }
        // Identify two variables, never two answer variables.
        let vars: Vec<&Name> = s.vars.iter().collect();
        for i in 0..vars.len() {
            for j in i + 1..vars.len() {
                let (u, v) = (vars[i], vars[j]);
                if s.is_answer(u) && s.is_answer(v) {
                    continue;
                }
                let (keep, gone) = if s.is_answer(v) { (v, u) } else { (u, v) };
                let m = BTreeMap::from([(gone.clone(), keep.clone())]);
                out.push(s.rename(&m));
            }
        }
        Ok(out)
    }

    fn search(
        &self,
        start: &[Cq],
        schema: &Schema,
        budget: usize,
        accept: &(dyn Fn(&Cq) -> Result<Option<Counterexample>> + Sync),
    ) -> Result<SearchOutcome> {
        let in_schema = |s: &Cq| s.atoms.iter().all(|a| schema.contains(a.pred()));
        let max_atoms = budget * budget * (self.roles.len() + 2) + budget * (self.ids.len() + 1) + 8;
        let mut seen: HashSet<String> = HashSet::new();
        let mut layer: Vec<Cq> = Vec::new();
        for s in start {
            if seen.insert(canonical_key(s)) && s.vars.len() <= budget {
                layer.push(s.clone());
            }
        }
        let mut explored = 0;
        while !layer.is_empty() {
            explored += layer.len();
            let results: Vec<Result<Option<Counterexample>>> =
                layer.par_iter().map(|s| if in_schema(s) { accept(s) } else { Ok(None) }).collect();
            for r in results {
                if let Some(cx) = r? {
                    return Ok(SearchOutcome { counterexample: Some(cx), explored, complete: true });
                }
            }
            if explored > SEARCH_CAP {
                return Ok(SearchOutcome { counterexample: None, explored, complete: false });
            }
            let expanded: Vec<Result<Vec<Cq>>> = layer.par_iter().map(|s| self.successors(s)).collect();
            let mut next = Vec::new();
            for succ in expanded {
                for s in succ? {
                    if s.vars.len() > budget || s.atoms.len() > max_atoms || s.atoms.is_empty() {
                        continue;
                    }
                    if seen.insert(canonical_key(&s)) {
                        next.push(s);
                    }
                }
            }
            layer = next;
        }
        Ok(SearchOutcome { counterexample: None, explored, complete: true })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{parse_ontology, parse_query};

    fn omq(o: &str, q: &str) -> Omq {
        let o = if o.is_empty() { Ontology::empty() } else { parse_ontology(o).unwrap() };
        Omq::new(o, Schema::full(), parse_query(q).unwrap())
    }

    const GRID: &str = "q() :- r(x2,x1), r(x4,x1), r(x2,x3), r(x4,x3), A1(x1), A2(x2), A3(x3), A4(x4)";

    #[test]
    fn canonical_keys_ignore_variable_names() {
        let a = parse_query("q(x) :- r(x,y), r(y,z), A(z)").unwrap().disjuncts.remove(0);
        let b = parse_query("q(x) :- r(x,u), r(u,w), A(w)").unwrap().disjuncts.remove(0);
        let c = parse_query("q(x) :- r(x,u), r(u,w), A(u)").unwrap().disjuncts.remove(0);
        assert!(isomorphic(&a, &b));
        assert!(!isomorphic(&a, &c));
    }

    #[test]
    fn approximation_examples() {
        let q = omq("A2 <= A4", GRID);
        let qa = ucq_k_approximation(&q, 1).unwrap();
        let merged = parse_query("q() :- r(x2,x1), r(x2,x3), A1(x1), A2(x2), A3(x3), A4(x2)").unwrap().disjuncts.remove(0);
        assert!(qa.query.disjuncts.iter().any(|d| isomorphic(d, &merged)));
        let grid = parse_query(GRID).unwrap().disjuncts.remove(0);
        assert!(!qa.query.disjuncts.iter().any(|d| isomorphic(d, &grid)));
    }

    #[test]
    fn containment_examples() {
        let q = omq("A2 <= A4", GRID);
        assert!(contains_full_schema(&q, &q).unwrap());
        let sub = omq("A2 <= A4", "q() :- r(x2,x1), r(x2,x3), A1(x1), A2(x2), A3(x3)");
        assert!(contains_full_schema(&q, &sub).unwrap());
        assert!(contains_full_schema(&sub, &q).unwrap());
        assert!(!contains_full_schema(&omq("", "q(x) :- A(x)"), &omq("", "q(x) :- B(x)")).unwrap());
    }

    #[test]
    fn emptiness_examples() {
        assert!(is_empty_full_schema(&omq("A <= bot", "q(x) :- A(x)")).unwrap());
        assert!(!is_empty_full_schema(&omq("", "q(x) :- A(x)")).unwrap());
        assert!(is_empty_full_schema(&omq("A1 & A2 <= bot", "q() :- A1(x), r(x,y), A2(x)")).unwrap());
    }

    #[test]
    fn maximum_contraction_examples() {
        let q = omq("", "q() :- A(x), A(y)");
        let m = maximum_contractions(&q).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].query.disjuncts[0].vars.len(), 1);
        let q = omq("", "q(x) :- r(x,y), A(y)");
        assert_eq!(maximum_contractions(&q).unwrap().len(), 1);
    }

    #[test]
    fn decide_examples() {
        assert!(decide_tw_equiv_full(&omq("A2 <= A4", GRID), 1).unwrap().is_yes());
        let v = decide_tw_equiv_full(&omq("", GRID), 1).unwrap();
        assert!(matches!(v, TwEquivVerdict::No(Some(_))));
        assert!(decide_tw_equiv_full(&omq("", GRID), 2).unwrap().is_yes());
    }

    #[test]
    fn rewriting_keeps_equivalence() {
        let q = omq("A2 <= A4", GRID);
        let r = rewriting(&q).unwrap();
        assert!(equivalent_full_schema(&q, &r).unwrap());
        assert_eq!(cq_treewidth(&r.query.disjuncts[0]).unwrap(), 1);
        let q = omq("", "q() :- r(x,y), r(y,z), r(x,w)");
        let r = rewriting(&q).unwrap();
        assert_eq!(r.query.disjuncts[0].atoms.len(), 2);
    }

    #[test]
    fn dllite_horn_containment() {
        let mut q1 = omq("dialect: DL-Lite-R-horn", "q(x) :- A(x)");
        let mut q2 = omq("dialect: DL-Lite-R-horn", "q(x) :- B(x)");
        let s = Schema::of(["A".into(), "B".into()]);
        q1.schema = s.clone();
        q2.schema = s;
        assert!(contains_dllite_horn(&q1, &q1).unwrap());
        let w = dllite_horn_witness(&q1, &q2).unwrap().unwrap();
        assert_eq!(w.database.to_string().trim(), "A(x)");
        let mut q3 = omq("dialect: DL-Lite-R-horn\nA <= B", "q(x) :- A(x)");
        let mut q4 = omq("dialect: DL-Lite-R-horn\nA <= B", "q(x) :- B(x)");
        q3.schema = q1.schema.clone();
        q4.schema = q1.schema.clone();
        assert!(contains_dllite_horn(&q3, &q4).unwrap());
        assert!(!contains_dllite_horn(&q4, &q3).unwrap());
    }
}
