//! Certain-answer evaluation of OMQs.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use fixedbitset::FixedBitSet;
use rayon::prelude::*;

use crate::chase::{canonical_model_with, ChaseDb};
use crate::entailment::{saturate_with, Reasoner};
use crate::error::{Error, Result};
use crate::graphalg::{cq_treewidth, treewidth};
use crate::homtools::{cq_answers_in, Target};
use crate::model::{gaifman_graph, Atom, Cq, Database, Name, Omq, Schema, Ucq};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algorithm {
    Naive,
    Fpt,
    Pebble,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Naive => "naive",
            Algorithm::Fpt => "fpt",
            Algorithm::Pebble => "pebble",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EvalStats {
    pub chase_size: usize,
    pub search_nodes: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvalResult {
    pub consistent: bool,
    pub answers: BTreeSet<Vec<Name>>,
    pub algorithm: Algorithm,
    pub stats: EvalStats,
}

impl EvalResult {
    /// Boolean reading: some tuple (for Boolean queries, the empty one) is an answer.
    pub fn holds(&self) -> bool {
        !self.answers.is_empty()
    }
}

/// Reject databases that use names outside the schema.
pub fn check_schema(d: &Database, s: &Schema) -> Result<()> {
    match d.predicates().into_iter().find(|p| !s.contains(p)) {
        Some(p) => Err(Error::Schema(format!("`{p}` is not in the schema"))),
        None => Ok(()),
    }
}

/// All tuples of the given arity over `dom`.
pub fn all_tuples(dom: &BTreeSet<Name>, arity: usize) -> BTreeSet<Vec<Name>> {
    let mut out: BTreeSet<Vec<Name>> = BTreeSet::from([vec![]]);
    for _ in 0..arity {
        out = out
            .into_iter()
            .flat_map(|t| {
                dom.iter().map(move |c| {
                    let mut t2 = t.clone();
                    t2.push(c.clone());
                    t2
                })
            })
            .collect();
    }
    out
}

/// Rounds of the canonical-model construction needed for `q`.
pub fn default_steps(q: &Ucq) -> usize {
    q.disjuncts.iter().map(|p| p.vars.len()).max().unwrap_or(0)
}

/// Either the canonical model, or `None` when `d` is inconsistent with the ontology.
pub fn model_for(omq: &Omq, d: &Database, steps: usize) -> Result<Option<ChaseDb>> {
    check_schema(d, &omq.schema)?;
    let mut reasoner = Reasoner::for_ontology(&omq.ontology)?;
    if saturate_with(&mut reasoner, d).inconsistent {
        return Ok(None);
    }
    match canonical_model_with(&mut reasoner, &omq.ontology, d, steps) {
        Ok(m) => Ok(Some(m)),
        Err(Error::Inconsistent) => Ok(None),
        Err(e) => Err(e),
    }
}

fn inconsistent_result(omq: &Omq, d: &Database, algorithm: Algorithm) -> EvalResult {
    EvalResult {
        consistent: false,
        answers: all_tuples(&d.domain(), omq.query.arity()),
        algorithm,
        stats: EvalStats::default(),
    }
}

/// Canonical model plus homomorphism search.
pub fn evaluate_naive(omq: &Omq, d: &Database) -> Result<EvalResult> {
    let Some(model) = model_for(omq, d, default_steps(&omq.query))? else {
        return Ok(inconsistent_result(omq, d, Algorithm::Naive));
    };
    let originals = model.originals();
    let target = Target::new(&model.facts);
    let allowed = |c: &Name| originals.contains(c);
    let answers: BTreeSet<Vec<Name>> =
        omq.query.disjuncts.iter().flat_map(|p| cq_answers_in(p, &target, Some(&allowed))).collect();
    Ok(EvalResult {
        consistent: true,
        answers,
        algorithm: Algorithm::Naive,
        stats: EvalStats { chase_size: model.facts.len(), search_nodes: 0 },
    })
}

/// Saturation, canonical model and treewidth-`k` dynamic programming.
pub fn evaluate_fpt(omq: &Omq, d: &Database, k: usize) -> Result<EvalResult> {
    for p in &omq.query.disjuncts {
        let tw = cq_treewidth(p)?;
        if tw > k {
            return Err(Error::Precondition(format!("disjunct has treewidth {tw} > {k}")));
        }
    }
    let Some(model) = model_for(omq, d, default_steps(&omq.query))? else {
        return Ok(inconsistent_result(omq, d, Algorithm::Fpt));
    };
    let originals = model.originals();
    let target = Target::new(&model.facts);
    let mut answers = BTreeSet::new();
    let mut nodes = 0;
    for p in &omq.query.disjuncts {
        let plan = TwPlan::new(p, &target)?;
        let cands = plan.candidate_tuples(&originals);
        let results: Vec<(Vec<Name>, bool, usize)> = cands
            .into_par_iter()
            .map(|tuple| {
                let (ok, n) = plan.run(&tuple);
                (tuple, ok, n)
            })
            .collect();
        for (tuple, ok, n) in results {
            nodes += n;
            if ok {
                answers.insert(tuple);
            }
        }
    }
    Ok(EvalResult {
        consistent: true,
        answers,
        algorithm: Algorithm::Fpt,
        stats: EvalStats { chase_size: model.facts.len(), search_nodes: nodes },
    })
}

/// Plain CQ matching by dynamic programming over a tree decomposition of the
/// quantified part, with the answer variables pinned to `a`.
pub fn evaluate_tw_cq(q: &Cq, d: &Database, k: usize, a: &[Name]) -> Result<bool> {
    let tw = cq_treewidth(q)?;
    if tw > k {
        return Err(Error::Precondition(format!("query has treewidth {tw} > {k}")));
    }
    if a.len() != q.arity() {
        return Err(Error::Precondition("tuple length differs from the query arity".into()));
    }
    let target = Target::with_constants(d, a.iter().cloned());
    let plan = TwPlan::new(q, &target)?;
    Ok(plan.run(a).0)
}

/// A compiled DP plan for one CQ over one target.
struct TwPlan<'t> {
    q: &'t Cq,
    target: &'t Target,
    quantified: Vec<Name>,
    qid: HashMap<Name, usize>,
    bags: Vec<Vec<usize>>,
    /// Children of each bag in a rooted orientation, listed from the root.
    order: Vec<usize>,
    children: Vec<Vec<usize>>,
    /// Atoms to check per bag (each atom assigned to one covering bag).
    bag_atoms: Vec<Vec<usize>>,
    /// Arc-consistent candidate sets for quantified variables, ignoring answer pins.
    domains: Vec<FixedBitSet>,
}

impl<'t> TwPlan<'t> {
    fn new(q: &'t Cq, target: &'t Target) -> Result<Self> {
        let quantified: Vec<Name> = q.quantified().into_iter().collect();
        let qid: HashMap<Name, usize> = quantified.iter().enumerate().map(|(i, v)| (v.clone(), i)).collect();
        let g = gaifman_graph(q).induced(&quantified.iter().cloned().collect());
        let mut g = g;
        for v in &quantified {
            g.add_vertex(v.clone());
        }
        let (_, td) = treewidth(&g)?;
        let bags: Vec<Vec<usize>> = td.bags.iter().map(|b| b.iter().map(|v| qid[v]).collect()).collect();
        let n = bags.len();
        let mut adj = vec![vec![]; n];
        for &(x, y) in &td.tree {
            adj[x].push(y);
            adj[y].push(x);
        }
        let mut children = vec![vec![]; n];
        let mut order = vec![0];
        let mut seen = vec![false; n];
        seen[0] = true;
        let mut i = 0;
        while i < order.len() {
            let u = order[i];
            for &w in &adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    children[u].push(w);
                    order.push(w);
                }
            }
            i += 1;
        }
        let mut bag_atoms = vec![vec![]; n];
        for (ai, atom) in q.atoms.iter().enumerate() {
            let qs: Vec<usize> = atom.terms().iter().filter_map(|t| qid.get(*t).copied()).collect();
            let home = bags.iter().position(|b| qs.iter().all(|v| b.contains(v))).unwrap_or(0);
            bag_atoms[home].push(ai);
        }
        let mut plan = TwPlan { q, target, quantified, qid, bags, order, children, bag_atoms, domains: vec![] };
        plan.domains = plan.initial_domains();
        Ok(plan)
    }

    /// Unary filtering plus arc consistency over binary atoms between quantified variables.
    fn initial_domains(&self) -> Vec<FixedBitSet> {
        let n = self.target.len();
        let mut doms: Vec<FixedBitSet> = self
            .quantified
            .iter()
            .map(|_| {
                let mut s = FixedBitSet::with_capacity(n);
                s.insert_range(..);
                s
            })
            .collect();
        for atom in &self.q.atoms {
            if let Atom::Unary(p, x) = atom {
                if let Some(&i) = self.qid.get(x) {
                    let keep: Vec<usize> = doms[i].ones().filter(|&c| self.target.unary_holds(p, c as u32)).collect();
                    doms[i].clear();
                    doms[i].extend(keep);
                }
            }
        }
        loop {
            let mut changed = false;
            for atom in &self.q.atoms {
                if let Atom::Binary(p, x, y) = atom {
                    if let (Some(&i), Some(&j)) = (self.qid.get(x), self.qid.get(y)) {
                        let keep_i: Vec<usize> = doms[i]
                            .ones()
                            .filter(|&c| self.target.successors(p, c as u32).iter().any(|&e| doms[j].contains(e as usize)))
                            .collect();
                        if keep_i.len() != doms[i].count_ones(..) {
                            doms[i].clear();
                            doms[i].extend(keep_i);
                            changed = true;
                        }
                        let keep_j: Vec<usize> = doms[j]
                            .ones()
                            .filter(|&c| self.target.predecessors(p, c as u32).iter().any(|&e| doms[i].contains(e as usize)))
                            .collect();
                        if keep_j.len() != doms[j].count_ones(..) {
                            doms[j].clear();
                            doms[j].extend(keep_j);
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                return doms;
            }
        }
    }

    /// Tuples of allowed constants surviving unary and neighbourhood filters for answer variables.
    fn candidate_tuples(&self, allowed: &BTreeSet<Name>) -> Vec<Vec<Name>> {
        let per_var: Vec<Vec<Name>> = self
            .q
            .answer
            .iter()
            .map(|x| {
                allowed
                    .iter()
                    .filter(|c| {
                        let Some(id) = self.target.id(c) else { return false };
                        self.q.atoms.iter().all(|atom| match atom {
                            Atom::Unary(p, y) if y == x => self.target.unary_holds(p, id),
                            Atom::Binary(p, y, z) if y == x && self.qid.contains_key(z) => {
                                let j = self.qid[z];
                                self.target.successors(p, id).iter().any(|&e| self.domains[j].contains(e as usize))
                            }
                            Atom::Binary(p, z, y) if y == x && self.qid.contains_key(z) => {
                                let j = self.qid[z];
                                self.target.predecessors(p, id).iter().any(|&e| self.domains[j].contains(e as usize))
                            }
                            _ => true,
                        })
                    })
                    .cloned()
                    .collect()
            })
            .collect();
        let mut out: Vec<Vec<Name>> = vec![vec![]];
        for cands in per_var {
            out = out
                .into_iter()
                .flat_map(|t| {
                    cands.iter().map(move |c| {
                        let mut t2 = t.clone();
                        t2.push(c.clone());
                        t2
                    })
                })
                .collect();
        }
        out
    }

    /// Decide the pinned tuple; also returns the number of bag tuples built.
    fn run(&self, a: &[Name]) -> (bool, usize) {
        let mut pin: HashMap<&Name, u32> = HashMap::new();
        for (x, c) in self.q.answer.iter().zip(a) {
            let Some(id) = self.target.id(c) else { return (false, 0) };
            if let Some(prev) = pin.insert(x, id) {
                if prev != id {
                    return (false, 0);
                }
            }
        }
        let ground_ok = self
            .q
            .atoms
            .iter()
            .filter(|atom| atom.terms().iter().all(|t| !self.qid.contains_key(*t)))
            .all(|atom| self.target.holds(atom, &|t: &Name| pin.get(t).copied()));
        if !ground_ok || self.quantified.is_empty() {
            return (ground_ok, 0);
        }
        let mut nodes = 0;
        let mut rels: Vec<Vec<Vec<u32>>> = vec![vec![]; self.bags.len()];
        for &b in self.order.iter().rev() {
            let mut rel = self.bag_relation(b, &pin);
            nodes += rel.len();
            for &c in &self.children[b] {
                let shared: Vec<(usize, usize)> = self.bags[b]
                    .iter()
                    .enumerate()
                    .filter_map(|(i, v)| self.bags[c].iter().position(|w| w == v).map(|j| (i, j)))
                    .collect();
                let keys: std::collections::HashSet<Vec<u32>> =
                    rels[c].iter().map(|t| shared.iter().map(|&(_, j)| t[j]).collect()).collect();
                rel.retain(|t| keys.contains(&shared.iter().map(|&(i, _)| t[i]).collect::<Vec<u32>>()));
            }
            if rel.is_empty() {
                return (false, nodes);
            }
            rels[b] = rel;
        }
        (true, nodes)
    }

    /// All assignments of the bag's variables satisfying the bag's atoms.
    fn bag_relation(&self, b: usize, pin: &HashMap<&Name, u32>) -> Vec<Vec<u32>> {
        let vars = &self.bags[b];
        let atoms: Vec<&Atom> = self.bag_atoms[b].iter().map(|&i| &self.q.atoms[i]).collect();
        let mut out = Vec::new();
        let mut h: BTreeMap<usize, u32> = BTreeMap::new();
        self.extend(vars, 0, &atoms, pin, &mut h, &mut out);
        out
    }

    fn value(&self, t: &Name, pin: &HashMap<&Name, u32>, h: &BTreeMap<usize, u32>) -> Option<u32> {
        match self.qid.get(t) {
            Some(i) => h.get(i).copied(),
            None => pin.get(t).copied(),
        }
    }

    fn extend(
        &self,
        vars: &[usize],
        pos: usize,
        atoms: &[&Atom],
        pin: &HashMap<&Name, u32>,
        h: &mut BTreeMap<usize, u32>,
        out: &mut Vec<Vec<u32>>,
    ) {
        if pos == vars.len() {
            out.push(vars.iter().map(|v| h[v]).collect());
            return;
        }
        let v = vars[pos];
        let name = &self.quantified[v];
        // Candidates from an already assigned neighbour when possible.
        let mut cands: Option<Vec<u32>> = None;
        for atom in atoms {
            if let Atom::Binary(p, x, y) = atom {
                if x == name {
                    if let Some(c) = self.value(y, pin, h) {
                        cands = Some(self.target.predecessors(p, c).to_vec());
                        break;
                    }
                } else if y == name {
                    if let Some(c) = self.value(x, pin, h) {
                        cands = Some(self.target.successors(p, c).to_vec());
                        break;
                    }
                }
            }
        }
        let cands = cands.unwrap_or_else(|| self.domains[v].ones().map(|c| c as u32).collect());
        for c in cands {
            if !self.domains[v].contains(c as usize) {
                continue;
            }
            h.insert(v, c);
            let ok = atoms.iter().all(|atom| {
                let ts = atom.terms();
                if !ts.iter().any(|t| *t == name) {
                    return true;
                }
                let vals: Vec<Option<u32>> = ts.iter().map(|t| self.value(t, pin, h)).collect();
                if vals.iter().any(Option::is_none) {
                    return true;
                }
                self.target.holds(atom, &|t: &Name| self.value(t, pin, h))
            });
            if ok {
                self.extend(vars, pos + 1, atoms, pin, h, out);
            }
            h.remove(&v);
        }
    }
}
