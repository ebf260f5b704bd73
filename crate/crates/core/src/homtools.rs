//! Homomorphisms from queries into databases, answers, contractions and cores.
//!
//! The search runs on an indexed copy of the target: constants become dense
//! ids, unary predicates become bitsets and binary predicates sorted
//! adjacency lists. Variable domains are pruned by arc consistency before
//! backtracking.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};
use crate::graphalg::{self, Graph};
use crate::model::{cq_as_database, gaifman_graph, Atom, Cq, Database, Name, Ucq};

pub type VarMap = BTreeMap<Name, Name>;

/// Indexed database used as a homomorphism target.
pub struct Target {
    consts: Vec<Name>,
    ids: HashMap<Name, u32>,
    unary: HashMap<Name, FixedBitSet>,
    out: HashMap<Name, Vec<Vec<u32>>>,
    inn: HashMap<Name, Vec<Vec<u32>>>,
}

impl Target {
    pub fn new(d: &Database) -> Self {
        Target::with_constants(d, std::iter::empty())
    }

    /// Index `d`, additionally registering constants that may occur in no fact.
    pub fn with_constants(d: &Database, extra: impl IntoIterator<Item = Name>) -> Self {
        let mut dom = d.domain();
        dom.extend(extra);
        let consts: Vec<Name> = dom.into_iter().collect();
        let ids: HashMap<Name, u32> = consts.iter().enumerate().map(|(i, c)| (c.clone(), i as u32)).collect();
        let n = consts.len();
        let mut unary: HashMap<Name, FixedBitSet> = HashMap::new();
        let mut out: HashMap<Name, Vec<Vec<u32>>> = HashMap::new();
        let mut inn: HashMap<Name, Vec<Vec<u32>>> = HashMap::new();
        for f in &d.facts {
            match f {
                Atom::Unary(p, a) => {
                    unary.entry(p.clone()).or_insert_with(|| FixedBitSet::with_capacity(n)).insert(ids[a] as usize);
                }
                Atom::Binary(p, a, b) => {
                    out.entry(p.clone()).or_insert_with(|| vec![vec![]; n])[ids[a] as usize].push(ids[b]);
                    inn.entry(p.clone()).or_insert_with(|| vec![vec![]; n])[ids[b] as usize].push(ids[a]);
                }
            }
        }
        for lists in out.values_mut().chain(inn.values_mut()) {
            for l in lists.iter_mut() {
                l.sort_unstable();
                l.dedup();
            }
        }
        Target { consts, ids, unary, out, inn }
    }

    pub fn len(&self) -> usize {
        self.consts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.consts.is_empty()
    }

    pub fn constant(&self, id: u32) -> &Name {
        &self.consts[id as usize]
    }

    pub fn id(&self, c: &str) -> Option<u32> {
        self.ids.get(c).copied()
    }

    pub fn constants(&self) -> &[Name] {
        &self.consts
    }

    /// Sorted `p`-successors of `a`.
    pub fn successors(&self, p: &str, a: u32) -> &[u32] {
        self.out.get(p).map_or(&[], |o| &o[a as usize])
    }

    /// Sorted `p`-predecessors of `a`.
    pub fn predecessors(&self, p: &str, a: u32) -> &[u32] {
        self.inn.get(p).map_or(&[], |o| &o[a as usize])
    }

    pub fn unary_holds(&self, p: &str, a: u32) -> bool {
        self.unary.get(p).is_some_and(|s| s.contains(a as usize))
    }

    fn has_edge(&self, p: &Name, a: u32, b: u32) -> bool {
        self.out.get(p).is_some_and(|o| o[a as usize].binary_search(&b).is_ok())
    }

    fn has_unary(&self, p: &Name, a: u32) -> bool {
        self.unary.get(p).is_some_and(|s| s.contains(a as usize))
    }

    pub fn holds(&self, atom: &Atom, h: &dyn Fn(&Name) -> Option<u32>) -> bool {
        match atom {
            Atom::Unary(p, x) => h(x).is_some_and(|a| self.has_unary(p, a)),
            Atom::Binary(p, x, y) => match (h(x), h(y)) {
                (Some(a), Some(b)) => self.has_edge(p, a, b),
                _ => false,
            },
        }
    }
}

#[derive(Clone, Copy)]
enum CAtom {
    Unary(usize, usize),
    Binary(usize, usize, usize),
}

/// A CQ compiled against one target.
struct Problem<'t> {
    target: &'t Target,
    vars: Vec<Name>,
    preds: Vec<Name>,
    atoms: Vec<CAtom>,
    /// Atom indices per variable.
    incident: Vec<Vec<usize>>,
    domains: Vec<FixedBitSet>,
}

impl<'t> Problem<'t> {
    /// Returns `None` when some domain is already empty.
    fn new(q: &Cq, target: &'t Target, fixed: &VarMap) -> Option<Self> {
        let vars: Vec<Name> = q.vars.iter().cloned().collect();
        let vid: HashMap<&Name, usize> = vars.iter().enumerate().map(|(i, v)| (v, i)).collect();
        let mut preds = Vec::new();
        let mut pid: HashMap<&Name, usize> = HashMap::new();
        let mut atoms = Vec::new();
        let mut incident = vec![vec![]; vars.len()];
        for a in &q.atoms {
            let p = *pid.entry(a.pred()).or_insert_with(|| {
                preds.push(a.pred().clone());
                preds.len() - 1
            });
            let c = match a {
                Atom::Unary(_, x) => CAtom::Unary(p, vid[x]),
                Atom::Binary(_, x, y) => CAtom::Binary(p, vid[x], vid[y]),
            };
            let idx = atoms.len();
            atoms.push(c);
            match c {
                CAtom::Unary(_, x) => incident[x].push(idx),
                CAtom::Binary(_, x, y) => {
                    incident[x].push(idx);
                    if y != x {
                        incident[y].push(idx);
                    }
                }
            }
        }
        let n = target.len();
        let mut domains = Vec::with_capacity(vars.len());
        for v in &vars {
            let mut d = FixedBitSet::with_capacity(n);
            match fixed.get(v) {
                Some(c) => {
                    if let Some(id) = target.id(c) {
                        d.insert(id as usize);
                    } else if !incident[vid[v]].is_empty() {
                        return None;
                    }
                }
                None => d.insert_range(..),
            }
            domains.push(d);
        }
        let mut pb = Problem { target, vars, preds, atoms, incident, domains };
        for (i, v) in pb.vars.iter().enumerate() {
            if fixed.contains_key(v) && target.id(&fixed[v]).is_none() {
                // Atom-free variable fixed to a constant outside the target.
                pb.domains[i] = FixedBitSet::with_capacity(0);
            }
        }
        if pb.arc_consistency() {
            Some(pb)
        } else {
            None
        }
    }

    fn pred(&self, p: usize) -> &Name {
        &self.preds[p]
    }

    /// Prune domains; false if one becomes empty.
    fn arc_consistency(&mut self) -> bool {
        for i in 0..self.atoms.len() {
            match self.atoms[i] {
                CAtom::Unary(p, x) => {
                    let Some(s) = self.target.unary.get(self.pred(p)) else {
                        return false;
                    };
                    self.domains[x].intersect_with(s);
                }
                CAtom::Binary(p, x, y) if x == y => {
                    let keep: Vec<usize> = self.domains[x]
                        .ones()
                        .filter(|&a| self.target.has_edge(self.pred(p), a as u32, a as u32))
                        .collect();
                    let mut d = FixedBitSet::with_capacity(self.target.len());
                    d.extend(keep);
                    self.domains[x] = d;
                }
                CAtom::Binary(p, _, _) => {
                    if !self.target.out.contains_key(self.pred(p)) {
                        return false;
                    }
                }
            }
        }
        if self.domains.iter().enumerate().any(|(i, d)| d.is_clear() && !self.incident[i].is_empty()) {
            return false;
        }
        let mut changed = true;
        while changed {
            changed = false;
            for i in 0..self.atoms.len() {
                let CAtom::Binary(p, x, y) = self.atoms[i] else { continue };
                if x == y {
                    continue;
                }
                let pred = self.pred(p).clone();
                let out = &self.target.out[&pred];
                let inn = &self.target.inn[&pred];
                let dx: Vec<usize> = self.domains[x].ones().collect();
                for a in dx {
                    if !out[a].iter().any(|&b| self.domains[y].contains(b as usize)) {
                        self.domains[x].set(a, false);
                        changed = true;
                    }
                }
                let dy: Vec<usize> = self.domains[y].ones().collect();
                for b in dy {
                    if !inn[b].iter().any(|&a| self.domains[x].contains(a as usize)) {
                        self.domains[y].set(b, false);
                        changed = true;
                    }
                }
                if self.domains[x].is_clear() || self.domains[y].is_clear() {
                    return false;
                }
            }
        }
        true
    }

    /// Greedy order: `first` variables (in the given order), then most-connected.
    fn order(&self, first: &[usize]) -> Vec<usize> {
        let n = self.vars.len();
        let degree: Vec<usize> = self.incident.iter().map(Vec::len).collect();
        let mut placed = vec![false; n];
        let mut order = Vec::with_capacity(n);
        for &f in first {
            if !placed[f] {
                placed[f] = true;
                order.push(f);
            }
        }
        while order.len() < n {
            let best = (0..n)
                .filter(|&v| !placed[v])
                .max_by(|&a, &b| {
                    let ca = self.links_to(a, &placed);
                    let cb = self.links_to(b, &placed);
                    ca.cmp(&cb)
                        .then(degree[a].cmp(&degree[b]))
                        .then(self.domains[b].count_ones(..).cmp(&self.domains[a].count_ones(..)))
                        .then(self.vars[b].cmp(&self.vars[a]))
                })
                .unwrap();
            placed[best] = true;
            order.push(best);
        }
        order
    }

    fn links_to(&self, v: usize, placed: &[bool]) -> usize {
        self.incident[v]
            .iter()
            .filter(|&&i| match self.atoms[i] {
                CAtom::Binary(_, x, y) => (x == v && placed[y]) || (y == v && placed[x]),
                CAtom::Unary(..) => false,
            })
            .count()
    }

    fn candidates(&self, v: usize, h: &[Option<u32>]) -> Vec<u32> {
        let mut best: Option<&Vec<u32>> = None;
        for &i in &self.incident[v] {
            if let CAtom::Binary(p, x, y) = self.atoms[i] {
                let list = if y == v && x != v {
                    h[x].map(|a| &self.target.out[self.pred(p)][a as usize])
                } else if x == v && y != v {
                    h[y].map(|b| &self.target.inn[self.pred(p)][b as usize])
                } else {
                    None
                };
                if let Some(l) = list {
                    if best.is_none_or(|b| l.len() < b.len()) {
                        best = Some(l);
                    }
                }
            }
        }
        match best {
            Some(l) => l.iter().copied().filter(|&c| self.domains[v].contains(c as usize)).collect(),
            None => self.domains[v].ones().map(|c| c as u32).collect(),
        }
    }

    fn consistent(&self, v: usize, c: u32, h: &[Option<u32>]) -> bool {
        self.incident[v].iter().all(|&i| match self.atoms[i] {
            CAtom::Unary(..) => true,
            CAtom::Binary(p, x, y) => {
                let a = if x == v { Some(c) } else { h[x] };
                let b = if y == v { Some(c) } else { h[y] };
                match (a, b) {
                    (Some(a), Some(b)) => self.target.has_edge(self.pred(p), a, b),
                    _ => true,
                }
            }
        })
    }

    /// Depth-first search along `order[pos..]`; `visit` returns false to stop.
    fn search(&self, order: &[usize], pos: usize, h: &mut Vec<Option<u32>>, visit: &mut dyn FnMut(&[Option<u32>]) -> bool) -> bool {
        if pos == order.len() {
            return visit(h);
        }
        let v = order[pos];
        if self.incident[v].is_empty() && self.domains[v].is_clear() {
            // Atom-free variable pinned outside the target: leave unassigned.
            return self.search(order, pos + 1, h, visit);
        }
        for c in self.candidates(v, h) {
            if self.consistent(v, c, h) {
                h[v] = Some(c);
                if !self.search(order, pos + 1, h, visit) {
                    h[v] = None;
                    return false;
                }
                h[v] = None;
            }
        }
        true
    }

    fn to_map(&self, h: &[Option<u32>], fixed: &VarMap) -> VarMap {
        self.vars
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let c = match h[i] {
                    Some(c) => self.target.constant(c).clone(),
                    None => fixed[v].clone(),
                };
                (v.clone(), c)
            })
            .collect()
    }
}

/// First homomorphism from `q` to `target` extending `fixed`.
pub fn find_homomorphism(q: &Cq, target: &Database, fixed: &VarMap) -> Option<VarMap> {
    let t = Target::with_constants(target, fixed.values().cloned());
    find_homomorphism_in(q, &t, fixed)
}

/// As [`find_homomorphism`] on a pre-indexed target.
pub fn find_homomorphism_in(q: &Cq, t: &Target, fixed: &VarMap) -> Option<VarMap> {
    if let Some(v) = fixed.keys().find(|v| !q.vars.contains(*v)) {
        panic!("fixed assignment mentions {v}, which is not a variable of the query");
    }
    let pb = Problem::new(q, t, fixed)?;
    let order = pb.order(&[]);
    let mut h = vec![None; pb.vars.len()];
    let mut found = None;
    pb.search(&order, 0, &mut h, &mut |h| {
        found = Some(h.to_vec());
        false
    });
    found.map(|h| pb.to_map(&h, fixed))
}

/// Checked variant of [`find_homomorphism`] that reports bad fixed maps as errors.
pub fn try_find_homomorphism(q: &Cq, target: &Database, fixed: &VarMap) -> Result<Option<VarMap>> {
    if let Some(v) = fixed.keys().find(|v| !q.vars.contains(*v)) {
        return Err(Error::Precondition(format!("{v} is not a variable of the query")));
    }
    Ok(find_homomorphism(q, target, fixed))
}

/// Whether `q` maps into `t` sending its answer tuple to `tuple`.
pub fn entails_tuple(q: &Cq, t: &Target, tuple: &[Name]) -> bool {
    let fixed: VarMap = q.answer.iter().cloned().zip(tuple.iter().cloned()).collect();
    find_homomorphism_in(q, t, &fixed).is_some()
}

/// Answer tuples of one CQ over an indexed target, optionally restricting answer constants.
pub fn cq_answers_in(q: &Cq, t: &Target, allowed: Option<&dyn Fn(&Name) -> bool>) -> BTreeSet<Vec<Name>> {
    let mut out = BTreeSet::new();
    let Some(mut pb) = Problem::new(q, t, &VarMap::new()) else {
        return out;
    };
    if let Some(ok) = allowed {
        for x in &q.answer {
            let i = pb.vars.iter().position(|v| v == x).unwrap();
            let keep: Vec<usize> = pb.domains[i].ones().filter(|&c| ok(&t.consts[c])).collect();
            let mut d = FixedBitSet::with_capacity(t.len());
            d.extend(keep);
            pb.domains[i] = d;
        }
        if !pb.arc_consistency() {
            return out;
        }
    }
    let ans: Vec<usize> = q.answer.iter().map(|x| pb.vars.iter().position(|v| v == x).unwrap()).collect();
    let ans_order = pb.order(&ans);
    let rest: Vec<usize> = ans_order[ans.len()..].to_vec();
    let head: Vec<usize> = ans_order[..ans.len()].to_vec();
    let mut h = vec![None; pb.vars.len()];
    pb.search(&head, 0, &mut h, &mut |partial| {
        let mut hh = partial.to_vec();
        let mut ok = false;
        pb.search(&rest, 0, &mut hh, &mut |_| {
            ok = true;
            false
        });
        if ok {
            out.insert(ans.iter().map(|&i| t.consts[partial[i].unwrap() as usize].clone()).collect());
        }
        true
    });
    out
}

/// Union over disjuncts of answer tuples of `q` on `d`.
pub fn all_answers(q: &Ucq, d: &Database) -> BTreeSet<Vec<Name>> {
    let t = Target::new(d);
    q.disjuncts.iter().flat_map(|p| cq_answers_in(p, &t, None)).collect()
}

/// Every homomorphism from `q` to `d` (exponential; for small instances).
pub fn all_homomorphisms(q: &Cq, d: &Database) -> Vec<VarMap> {
    let t = Target::new(d);
    let Some(pb) = Problem::new(q, &t, &VarMap::new()) else {
        return vec![];
    };
    let order = pb.order(&[]);
    let mut h = vec![None; pb.vars.len()];
    let mut out = Vec::new();
    pb.search(&order, 0, &mut h, &mut |h| {
        out.push(pb.to_map(h, &VarMap::new()));
        true
    });
    out
}

/// A partition of the variables of a query, as produced by [`contractions`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContractionSpec {
    pub blocks: Vec<BTreeSet<Name>>,
    /// Variable -> representative of its block.
    pub map: VarMap,
}

/// All contractions of `q`, each once, with the partition that produced it.
pub fn contractions(q: &Cq) -> Vec<(Cq, ContractionSpec)> {
    let vars: Vec<Name> = q.vars.iter().cloned().collect();
    let n = vars.len();
    let mut out = Vec::new();
    let mut rgs = vec![0usize; n];
    fn finish(rgs: &[usize], vars: &[Name], q: &Cq, out: &mut Vec<(Cq, ContractionSpec)>) {
        let k = rgs.iter().copied().max().map_or(0, |m| m + 1);
        let mut blocks: Vec<BTreeSet<Name>> = vec![BTreeSet::new(); k];
        for (v, &b) in vars.iter().zip(rgs.iter()) {
            blocks[b].insert(v.clone());
        }
        if blocks.iter().any(|b| b.iter().filter(|v| q.is_answer(v)).count() > 1) {
            return;
        }
        let c = contract(q, &blocks);
        let map = blocks
            .iter()
            .flat_map(|b| {
                let rep = b.iter().find(|v| q.is_answer(v)).unwrap_or_else(|| b.iter().next().unwrap()).clone();
                b.iter().map(move |v| (v.clone(), rep.clone()))
            })
            .collect();
        out.push((c, ContractionSpec { blocks, map }));
    }
    // Restricted-growth strings: rgs[0] = 0, rgs[i] <= 1 + max(rgs[..i]).
    fn rgs_rec(i: usize, max: usize, rgs: &mut Vec<usize>, vars: &[Name], q: &Cq, out: &mut Vec<(Cq, ContractionSpec)>) {
        if i == vars.len() {
            finish(rgs, vars, q, out);
            return;
        }
        let limit = if i == 0 { 0 } else { max + 1 };
        for b in 0..=limit {
            rgs[i] = b;
            rgs_rec(i + 1, if i == 0 { 0 } else { max.max(b) }, rgs, vars, q, out);
        }
    }
    if n == 0 {
        out.push((q.clone(), ContractionSpec { blocks: vec![], map: VarMap::new() }));
        return out;
    }
    rgs_rec(0, 0, &mut rgs, &vars, q, &mut out);
    out
}

/// Contraction of `q` identifying the variables of each block in `blocks`.
pub fn contract(q: &Cq, blocks: &[BTreeSet<Name>]) -> Cq {
    let mut map = VarMap::new();
    for b in blocks {
        let rep = b.iter().find(|v| q.is_answer(v)).unwrap_or_else(|| b.iter().next().unwrap()).clone();
        for v in b {
            map.insert(v.clone(), rep.clone());
        }
    }
    q.rename(&map)
}

/// Whether `p` maps into `q` sending answer variables positionally.
pub fn maps_into(p: &Cq, q: &Cq) -> bool {
    let fixed: VarMap = p.answer.iter().cloned().zip(q.answer.iter().cloned()).collect();
    find_homomorphism(p, &cq_as_database(q), &fixed).is_some()
}

/// Plain CQ equivalence: homomorphisms both ways fixing answer variables.
pub fn cq_equivalent(p: &Cq, q: &Cq) -> bool {
    maps_into(p, q) && maps_into(q, p)
}

/// A core of `q` by iterated removal of retractable variables.
pub fn core(q: &Cq) -> Cq {
    let mut cur = q.clone();
    'outer: loop {
        let identity: VarMap = cur.answer.iter().map(|x| (x.clone(), x.clone())).collect();
        for v in cur.quantified() {
            let keep: BTreeSet<Name> = cur.vars.iter().filter(|w| **w != v).cloned().collect();
            let smaller = cur.restrict(&keep);
            let target = Target::with_constants(&cq_as_database(&smaller), smaller.vars.iter().cloned());
            if find_homomorphism_in(&cur, &target, &identity).is_some() {
                cur = smaller;
                continue 'outer;
            }
        }
        return cur;
    }
}

/// `d |= p` and every homomorphism from `p` to `d` is injective.
pub fn io_satisfies(d: &Database, p: &Cq) -> Result<bool> {
    if !p.answer.is_empty() {
        return Err(Error::Precondition("io_satisfies needs a Boolean query".into()));
    }
    let t = Target::new(d);
    if find_homomorphism_in(p, &t, &VarMap::new()).is_none() {
        return Ok(false);
    }
    Ok(collision(p, &t).is_none())
}

/// A pair of variables some homomorphism into `t` identifies.
fn collision(p: &Cq, t: &Target) -> Option<(Name, Name)> {
    let vars: Vec<&Name> = p.vars.iter().collect();
    for (i, x) in vars.iter().enumerate() {
        for y in &vars[i + 1..] {
            let merged = contract(p, &[BTreeSet::from([(*x).clone(), (*y).clone()])]);
            if find_homomorphism_in(&merged, t, &VarMap::new()).is_some() {
                return Some(((*x).clone(), (*y).clone()));
            }
        }
    }
    None
}

/// Merge collided variables until every homomorphism into `d` is injective.
pub fn io_contraction(d: &Database, p: &Cq) -> Result<Cq> {
    if !p.answer.is_empty() {
        return Err(Error::Precondition("io_contraction needs a Boolean query".into()));
    }
    let t = Target::new(d);
    if find_homomorphism_in(p, &t, &VarMap::new()).is_none() {
        return Err(Error::Precondition("the database does not satisfy the query".into()));
    }
    let mut cur = p.clone();
    while let Some((x, y)) = collision(&cur, &t) {
        cur = contract(&cur, &[BTreeSet::from([x, y])]);
    }
    Ok(cur)
}

/// `nt(p)`: drop all dangling trees of a connected Boolean CQ of treewidth above 1.
pub fn strip_trees(p: &Cq) -> Result<Cq> {
    if !p.answer.is_empty() {
        return Err(Error::Precondition("strip_trees needs a Boolean query".into()));
    }
    let g = gaifman_graph(p);
    if g.components().len() != 1 {
        return Err(Error::Precondition("strip_trees needs a connected query".into()));
    }
    if graphalg::cq_treewidth(p)? <= 1 {
        return Err(Error::Precondition("strip_trees is undefined on treewidth-1 queries".into()));
    }
    let mut live: BTreeSet<Name> = p.vars.clone();
    loop {
        let sub: Graph<Name> = g.induced(&live);
        let leaf = live.iter().find(|v| sub.neighbors(v).count() <= 1).cloned();
        match leaf {
            Some(v) => {
                live.remove(&v);
            }
            None => break,
        }
    }
    Ok(p.restrict(&live))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Cq {
        Cq::boolean(vec![
            Atom::binary("r", "x2", "x1"),
            Atom::binary("r", "x4", "x1"),
            Atom::binary("r", "x2", "x3"),
            Atom::binary("r", "x4", "x3"),
            Atom::unary("A1", "x1"),
            Atom::unary("A2", "x2"),
            Atom::unary("A3", "x3"),
            Atom::unary("A4", "x4"),
        ])
    }

    #[test]
    fn first_homomorphism_is_lexicographic() {
        let q = Cq::new(vec!["x".into()], vec![Atom::unary("A", "x")]).unwrap();
        let d = Database::from_facts([Atom::unary("A", "b"), Atom::unary("A", "a")]).unwrap();
        let h = find_homomorphism(&q, &d, &VarMap::new()).unwrap();
        assert_eq!(h["x"], Name::new("a"));
    }

    #[test]
    fn grid_maps_to_itself_only_with_all_edges() {
        let q = grid();
        assert!(find_homomorphism(&q, &cq_as_database(&q), &VarMap::new()).is_some());
        let mut d = cq_as_database(&q);
        d.facts.remove(&Atom::binary("r", "x2", "x3"));
        assert!(find_homomorphism(&q, &d, &VarMap::new()).is_none());
    }

    #[test]
    fn answers_simple() {
        let q = Ucq::single(Cq::new(vec!["x".into()], vec![Atom::unary("A", "x")]).unwrap());
        let d = Database::from_facts([Atom::unary("A", "a"), Atom::unary("B", "b")]).unwrap();
        assert_eq!(all_answers(&q, &d), BTreeSet::from([vec![Name::new("a")]]));
        assert!(all_answers(&q, &Database::new()).is_empty());
    }

    #[test]
    fn contraction_counts() {
        let q = Cq::boolean(vec![Atom::binary("r", "x", "y")]);
        assert_eq!(contractions(&q).len(), 2);
        let q3 = Cq::boolean(vec![Atom::binary("r", "x", "y"), Atom::binary("r", "y", "z")]);
        assert_eq!(contractions(&q3).len(), 5);
        let q4 = Cq::boolean(vec![Atom::binary("r", "a", "b"), Atom::binary("r", "c", "d")]);
        assert_eq!(contractions(&q4).len(), 15);
        let ans = Cq::new(vec!["x".into(), "y".into()], vec![Atom::binary("r", "x", "y")]).unwrap();
        assert_eq!(contractions(&ans).len(), 1);
        let mixed = Cq::new(vec!["x".into()], vec![Atom::binary("r", "x", "y")]).unwrap();
        let cs = contractions(&mixed);
        assert_eq!(cs.len(), 2);
        assert!(cs.iter().any(|(c, _)| c.atoms == vec![Atom::binary("r", "x", "x")]));
    }

    #[test]
    fn cores() {
        assert_eq!(core(&grid()), grid());
        let q = Cq::boolean(vec![Atom::unary("A", "x"), Atom::unary("A", "y")]);
        assert_eq!(core(&q).atoms.len(), 1);
        let tri = Cq::boolean(vec![
            Atom::binary("r", "x", "y"),
            Atom::binary("r", "y", "z"),
            Atom::binary("r", "x", "z"),
            Atom::binary("r", "u", "v"),
        ]);
        let c = core(&tri);
        assert_eq!(c.atoms.len(), 3);
        assert!(!c.vars.contains("u") && !c.vars.contains("v"));
    }

    #[test]
    fn injective_only() {
        let p = Cq::boolean(vec![Atom::binary("r", "x", "y")]);
        let ab = Database::from_facts([Atom::binary("r", "a", "b")]).unwrap();
        let aa = Database::from_facts([Atom::binary("r", "a", "a")]).unwrap();
        assert!(io_satisfies(&ab, &p).unwrap());
        assert!(!io_satisfies(&aa, &p).unwrap());
        let p2 = Cq::boolean(vec![Atom::binary("r", "x", "y"), Atom::binary("r", "z", "y")]);
        let d = Database::from_facts([Atom::binary("r", "a", "b"), Atom::binary("r", "c", "b")]).unwrap();
        assert!(!io_satisfies(&d, &p2).unwrap());
        assert_eq!(io_contraction(&aa, &p).unwrap().atoms, vec![Atom::binary("r", "x", "x")]);
        assert_eq!(io_contraction(&ab, &p).unwrap(), p);
    }

    #[test]
    fn dangling_trees() {
        let mut atoms = grid().atoms;
        atoms.push(Atom::binary("r", "x1", "z1"));
        atoms.push(Atom::binary("r", "z1", "z2"));
        assert_eq!(strip_trees(&Cq::boolean(atoms)).unwrap(), grid());
        assert_eq!(strip_trees(&grid()).unwrap(), grid());
        let cyc = vec![
            Atom::binary("r", "x1", "x2"),
            Atom::binary("r", "x2", "x3"),
            Atom::binary("r", "x3", "x4"),
            Atom::binary("r", "x4", "x1"),
        ];
        let mut with_loop = cyc.clone();
        with_loop.push(Atom::binary("r", "x1", "w"));
        with_loop.push(Atom::binary("r", "w", "w"));
        assert_eq!(strip_trees(&Cq::boolean(with_loop)).unwrap(), Cq::boolean(cyc));
        assert!(strip_trees(&Cq::boolean(vec![Atom::binary("r", "x", "y")])).is_err());
    }
}
