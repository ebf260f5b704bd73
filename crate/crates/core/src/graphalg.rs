//! Graph utilities: exact treewidth with a validated decomposition, ditree
//! tests, the `dtree` construction, unravelings and small minor tests.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::error::{Error, Result};
use crate::homtools;
use crate::model::{gaifman_graph, Atom, Cq, Database, Fresh, Name};

/// Largest graph (after preprocessing, per component) handed to the exact search.
pub const TREEWIDTH_CAP: usize = 24;
/// Largest host graph accepted by [`is_minor`].
pub const MINOR_CAP: usize = 12;
/// Largest number of bags an unraveling may create.
pub const UNRAVEL_BAG_CAP: usize = 200_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph<V: Ord + Clone> {
    adj: BTreeMap<V, BTreeSet<V>>,
}

impl<V: Ord + Clone> Default for Graph<V> {
    fn default() -> Self {
        Graph { adj: BTreeMap::new() }
    }
}

impl<V: Ord + Clone> Graph<V> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_edges(edges: impl IntoIterator<Item = (V, V)>) -> Self {
        let mut g = Graph::new();
        for (a, b) in edges {
            g.add_vertex(a.clone());
            g.add_vertex(b.clone());
            g.add_edge(&a, &b);
        }
        g
    }

    pub fn add_vertex(&mut self, v: V) {
        self.adj.entry(v).or_default();
    }

    /// Adds an undirected edge; self-loops are ignored.
    pub fn add_edge(&mut self, a: &V, b: &V) {
        if a == b {
            self.add_vertex(a.clone());
            return;
        }
        self.adj.entry(a.clone()).or_default().insert(b.clone());
        self.adj.entry(b.clone()).or_default().insert(a.clone());
    }

    pub fn vertices(&self) -> impl Iterator<Item = &V> {
        self.adj.keys()
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn neighbors(&self, v: &V) -> impl Iterator<Item = &V> {
        self.adj.get(v).into_iter().flatten()
    }

    pub fn has_edge(&self, a: &V, b: &V) -> bool {
        self.adj.get(a).is_some_and(|n| n.contains(b))
    }

    pub fn edges(&self) -> Vec<(V, V)> {
        let mut out = Vec::new();
        for (a, ns) in &self.adj {
            for b in ns {
                if a < b {
                    out.push((a.clone(), b.clone()));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.adj.values().map(BTreeSet::len).sum::<usize>() / 2
    }

    pub fn components(&self) -> Vec<BTreeSet<V>> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for v in self.adj.keys() {
            if seen.contains(v) {
                continue;
            }
            let mut comp = BTreeSet::new();
            let mut queue = VecDeque::from([v.clone()]);
            seen.insert(v.clone());
            while let Some(u) = queue.pop_front() {
                for w in self.neighbors(&u) {
                    if seen.insert(w.clone()) {
                        queue.push_back(w.clone());
                    }
                }
                comp.insert(u);
            }
            out.push(comp);
        }
        out
    }

    pub fn induced(&self, keep: &BTreeSet<V>) -> Graph<V> {
        let mut g = Graph::new();
        for v in keep {
            if self.adj.contains_key(v) {
                g.add_vertex(v.clone());
                for w in self.neighbors(v) {
                    if keep.contains(w) {
                        g.add_edge(v, w);
                    }
                }
            }
        }
        g
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeDecomposition<V: Ord + Clone> {
    pub bags: Vec<BTreeSet<V>>,
    /// Undirected tree edges between bag indices.
    pub tree: Vec<(usize, usize)>,
}

impl<V: Ord + Clone + std::fmt::Debug> TreeDecomposition<V> {
    pub fn width(&self) -> usize {
        self.bags.iter().map(BTreeSet::len).max().unwrap_or(0).saturating_sub(1)
    }

    /// Checks coverage of vertices and edges, connectedness of occurrences, and that `tree` is a tree.
    pub fn validate(&self, g: &Graph<V>) -> std::result::Result<(), String> {
        let n = self.bags.len();
        if n == 0 {
            return Err("no bags".into());
        }
        if self.tree.len() != n - 1 {
            return Err("bag graph is not a tree".into());
        }
        let mut tadj = vec![vec![]; n];
        for &(a, b) in &self.tree {
            tadj[a].push(b);
            tadj[b].push(a);
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &w in &tadj[u] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err("bag graph is disconnected".into());
        }
        for v in g.vertices() {
            let holding: Vec<usize> = (0..n).filter(|&i| self.bags[i].contains(v)).collect();
            if holding.is_empty() {
                return Err(format!("vertex {v:?} uncovered"));
            }
            let set: BTreeSet<usize> = holding.iter().copied().collect();
            let mut reached = BTreeSet::from([holding[0]]);
            let mut stack = vec![holding[0]];
            while let Some(u) = stack.pop() {
                for &w in &tadj[u] {
                    if set.contains(&w) && reached.insert(w) {
                        stack.push(w);
                    }
                }
            }
            if reached.len() != set.len() {
                return Err(format!("bags of {v:?} are not connected"));
            }
        }
        for (a, b) in g.edges() {
            if !self.bags.iter().any(|bag| bag.contains(&a) && bag.contains(&b)) {
                return Err(format!("edge {a:?}-{b:?} uncovered"));
            }
        }
        Ok(())
    }
}

/// Exact treewidth with a witness decomposition.
pub fn treewidth<V: Ord + Clone + std::fmt::Debug>(g: &Graph<V>) -> Result<(usize, TreeDecomposition<V>)> {
    let verts: Vec<V> = g.vertices().cloned().collect();
    if verts.is_empty() {
        return Ok((0, TreeDecomposition { bags: vec![BTreeSet::new()], tree: vec![] }));
    }
    let index: BTreeMap<&V, usize> = verts.iter().enumerate().map(|(i, v)| (v, i)).collect();
    let n = verts.len();
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for (a, b) in g.edges() {
        adj[index[&a]].insert(index[&b]);
        adj[index[&b]].insert(index[&a]);
    }
    let mut order = Vec::with_capacity(n);
    let mut width = 0;
    for comp in g.components() {
        let ids: Vec<usize> = comp.iter().map(|v| index[v]).collect();
        let (w, ord) = component_order(&ids, &adj)?;
        width = width.max(w);
        order.extend(ord);
    }
    let td = decomposition_from_order(n, &adj, &order);
    let td = TreeDecomposition {
        bags: td.bags.into_iter().map(|b| b.into_iter().map(|i| verts[i].clone()).collect()).collect(),
        tree: td.tree,
    };
    debug_assert_eq!(td.width(), width);
    debug_assert!(td.validate(g).is_ok());
    Ok((td.width(), td))
}

/// Optimal elimination order for one connected component.
fn component_order(ids: &[usize], adj: &[BTreeSet<usize>]) -> Result<(usize, Vec<usize>)> {
    let mut live: BTreeSet<usize> = ids.iter().copied().collect();
    let mut work: BTreeMap<usize, BTreeSet<usize>> =
        ids.iter().map(|&v| (v, adj[v].iter().copied().filter(|w| live.contains(w)).collect())).collect();
    let mut order = Vec::new();
    let mut low = 0;
    // Simplicial elimination (covers degree <= 1) is safe for exact width.
    loop {
        let pick = live.iter().copied().find(|&v| {
            let ns: Vec<usize> = work[&v].iter().copied().collect();
            ns.iter().enumerate().all(|(i, a)| ns[i + 1..].iter().all(|b| work[a].contains(b)))
        });
        let Some(v) = pick else { break };
        low = low.max(work[&v].len());
        eliminate(&mut work, v);
        live.remove(&v);
        order.push(v);
    }
    if live.is_empty() {
        return Ok((low, order));
    }
    let rest: Vec<usize> = live.iter().copied().collect();
    if rest.len() > TREEWIDTH_CAP {
        return Err(Error::CapExceeded(format!(
            "treewidth search on {} vertices exceeds the cap of {TREEWIDTH_CAP}",
            rest.len()
        )));
    }
    let m = rest.len();
    let local: BTreeMap<usize, usize> = rest.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let masks: Vec<u32> = rest
        .iter()
        .map(|v| work[v].iter().fold(0u32, |acc, w| acc | (1 << local[w])))
        .collect();
    let (w, ord) = exact_order(m, &masks);
    order.extend(ord.into_iter().map(|i| rest[i]));
    Ok((low.max(w), order))
}

fn eliminate(work: &mut BTreeMap<usize, BTreeSet<usize>>, v: usize) {
    let ns: Vec<usize> = work[&v].iter().copied().collect();
    for &a in &ns {
        let e = work.get_mut(&a).unwrap();
        e.remove(&v);
        e.extend(ns.iter().copied().filter(|&b| b != a));
    }
    work.remove(&v);
}

/// Subset dynamic program over elimination prefixes.
fn exact_order(m: usize, adj: &[u32]) -> (usize, Vec<usize>) {
    let full: u32 = if m == 32 { u32::MAX } else { (1u32 << m) - 1 };
    let q = |s: u32, v: usize| -> u32 {
        let mut comp = 1u32 << v;
        let mut frontier = comp;
        while frontier != 0 {
            let mut next = 0u32;
            let mut f = frontier;
            while f != 0 {
                let u = f.trailing_zeros() as usize;
                f &= f - 1;
                next |= adj[u] & s;
            }
            frontier = next & !comp;
            comp |= next;
        }
        let mut out = 0u32;
        let mut c = comp;
        while c != 0 {
            let u = c.trailing_zeros() as usize;
            c &= c - 1;
            out |= adj[u];
        }
        (out & !comp & !s).count_ones()
    };
    let size = 1usize << m;
    let mut dp = vec![u8::MAX; size];
    let mut choice = vec![u8::MAX; size];
    dp[0] = 0;
    for s in 1..size as u32 {
        let mut best = u8::MAX;
        let mut arg = u8::MAX;
        let mut bits = s;
        while bits != 0 {
            let v = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let prev = s & !(1 << v);
            let pv = dp[prev as usize];
            if pv >= best {
                continue;
            }
            let cost = (q(prev, v) as u8).max(pv);
            if cost < best {
                best = cost;
                arg = v as u8;
            }
        }
        dp[s as usize] = best;
        choice[s as usize] = arg;
    }
    let mut order = Vec::with_capacity(m);
    let mut s = full;
    while s != 0 {
        let v = choice[s as usize] as usize;
        order.push(v);
        s &= !(1 << v);
    }
    order.reverse();
    (dp[full as usize] as usize, order)
}

fn decomposition_from_order(n: usize, adj: &[BTreeSet<usize>], order: &[usize]) -> TreeDecomposition<usize> {
    let mut pos = vec![0; n];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    let mut filled: Vec<BTreeSet<usize>> = adj.to_vec();
    let mut bags = Vec::with_capacity(n);
    let mut later_sets = Vec::with_capacity(n);
    for &v in order {
        let later: BTreeSet<usize> = filled[v].iter().copied().filter(|&w| pos[w] > pos[v]).collect();
        for &a in &later {
            for &b in &later {
                if a != b {
                    filled[a].insert(b);
                }
            }
        }
        let mut bag = later.clone();
        bag.insert(v);
        bags.push(bag);
        later_sets.push(later);
    }
    let mut tree = Vec::new();
    let mut roots = Vec::new();
    for (i, later) in later_sets.iter().enumerate() {
        match later.iter().min_by_key(|&&w| pos[w]) {
            Some(&w) => tree.push((i, pos[w])),
            None => roots.push(i),
        }
    }
    for pair in roots.windows(2) {
        tree.push((pair[0], pair[1]));
    }
    TreeDecomposition { bags, tree }
}

/// Treewidth of the Gaifman graph of the quantified part; 1 if that part has no edges.
pub fn cq_treewidth(q: &Cq) -> Result<usize> {
    let quantified = q.quantified();
    let g = gaifman_graph(q).induced(&quantified);
    Ok(treewidth(&g)?.0.max(1))
}

/// Whether the role facts of `d` form a directed tree (multi-edges allowed, no loops).
pub fn is_ditree(d: &Database) -> bool {
    let dom = d.domain();
    let mut parent: BTreeMap<&Name, &Name> = BTreeMap::new();
    for f in &d.facts {
        if let Atom::Binary(_, a, b) = f {
            if a == b {
                return false;
            }
            if let Some(p) = parent.insert(b, a) {
                if p != a {
                    return false;
                }
            }
        }
    }
    let roots: Vec<&Name> = dom.iter().filter(|c| !parent.contains_key(c)).collect();
    if roots.len() != 1 {
        return false;
    }
    // Every vertex must reach the root by following parents without cycling.
    for c in &dom {
        let mut cur = c;
        let mut steps = 0;
        while let Some(p) = parent.get(cur) {
            cur = p;
            steps += 1;
            if steps > dom.len() {
                return false;
            }
        }
        if cur != roots[0] {
            return false;
        }
    }
    true
}

/// Root of a ditree database, if it is one.
pub fn ditree_root(d: &Database) -> Option<Name> {
    if !is_ditree(d) {
        return None;
    }
    let children: BTreeSet<&Name> = d
        .facts
        .iter()
        .filter_map(|f| match f {
            Atom::Binary(_, _, b) => Some(b),
            _ => None,
        })
        .collect();
    d.domain().into_iter().find(|c| !children.contains(c))
}

/// Merge variables with a common successor until fixpoint; return the result
/// rooted at its single answer variable if it is a ditree.
pub fn dtree(q: &Cq) -> Result<Option<Cq>> {
    let g = gaifman_graph(q);
    if g.components().len() > 1 {
        return Err(Error::Precondition("dtree needs a connected query".into()));
    }
    let mut cur = q.clone();
    loop {
        let mut parent_of: BTreeMap<&Name, &Name> = BTreeMap::new();
        let mut merge = None;
        for a in &cur.atoms {
            if let Atom::Binary(_, x, y) = a {
                if let Some(p) = parent_of.insert(y, x) {
                    if p != x {
                        merge = Some((p.clone().min(x.clone()), p.clone().max(x.clone())));
                        break;
                    }
                }
            }
        }
        let Some((keep, gone)) = merge else { break };
        if cur.is_answer(&keep) && cur.is_answer(&gone) {
            return Ok(None);
        }
        let (keep, gone) = if cur.is_answer(&gone) { (gone, keep) } else { (keep, gone) };
        let sub = BTreeMap::from([(gone, keep)]);
        cur = cur.rename(&sub);
    }
    let db = crate::model::cq_as_database(&cur);
    let root = if cur.atoms.iter().all(|a| a.arity() == 1) {
        cur.vars.iter().next().cloned()
    } else {
        ditree_root(&db)
    };
    match root {
        Some(r) if cur.atoms.iter().all(|a| a.arity() == 1) || is_ditree(&db) => {
            let mut out = Cq::from_parts(vec![r], cur.atoms.clone());
            out.vars = cur.vars.clone();
            Ok(Some(out))
        }
        _ => Ok(None),
    }
}

/// Bookkeeping for one constant of an unraveling.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnravelNode {
    pub constant: Name,
    pub projection: Name,
    pub bag: usize,
    pub depth: usize,
}

#[derive(Clone, Debug)]
pub struct Unraveling {
    pub database: Database,
    pub nodes: Vec<UnravelNode>,
    /// π on every constant, including the kept tuple constants (mapped to themselves).
    pub projection: BTreeMap<Name, Name>,
    pub bags: Vec<BTreeSet<Name>>,
    pub bag_parent: Vec<Option<usize>>,
}

/// Truncated k-unraveling of `d` up to the tuple `a`.
pub fn k_unravel(d: &Database, a: &[Name], k: usize, depth: usize) -> Result<Unraveling> {
    let tuple: BTreeSet<Name> = a.iter().cloned().collect();
    let free = Database {
        facts: d.facts.iter().filter(|f| f.terms().iter().all(|t| !tuple.contains(*t))).cloned().collect(),
    };
    let mut used: BTreeSet<Name> = d.domain();
    used.extend(tuple.iter().cloned());
    let mut fresh = Fresh::new("u", used);
    let mut un = Unraveler::new(&free, k, &mut fresh);
    un.grow(None, BTreeSet::new(), BTreeMap::new(), depth + 1)?;
    let (mut database, mut nodes, mut projection, mut bags, mut bag_parent) = un.finish();
    // Constants linked only to the tuple get a single root bag of their own.
    let free_dom = free.domain();
    for c in d.domain().into_iter().filter(|c| !tuple.contains(c) && !free_dom.contains(c)) {
        let u = fresh.next();
        projection.insert(u.clone(), c.clone());
        nodes.push(UnravelNode { constant: u.clone(), projection: c, bag: bags.len(), depth: 0 });
        bags.push(BTreeSet::from([u]));
        bag_parent.push(None);
    }
    for f in &d.facts {
        let terms = f.terms();
        if terms.iter().all(|t| tuple.contains(*t)) {
            database.insert(f.clone());
            continue;
        }
        if let Atom::Binary(r, x, y) = f {
            if tuple.contains(x) && !tuple.contains(y) {
                for n in nodes.iter().filter(|n| &n.projection == y) {
                    database.insert(Atom::Binary(r.clone(), x.clone(), n.constant.clone()));
                }
            } else if tuple.contains(y) && !tuple.contains(x) {
                for n in nodes.iter().filter(|n| &n.projection == x) {
                    database.insert(Atom::Binary(r.clone(), n.constant.clone(), y.clone()));
                }
            }
        }
    }
    for t in &tuple {
        projection.insert(t.clone(), t.clone());
    }
    Ok(Unraveling { database, nodes, projection, bags, bag_parent })
}

/// Treewidth-1 unraveling rooted at the constant `a` itself.
pub fn unravel1_at(d: &Database, a: &Name, depth: usize) -> Result<Unraveling> {
    if !d.domain().contains(a) {
        return Err(Error::Precondition(format!("{a} is not a constant of the database")));
    }
    let mut fresh = Fresh::new("u", d.domain());
    let mut un = Unraveler::new(d, 1, &mut fresh);
    let root_consts = BTreeSet::from([a.clone()]);
    let pi = BTreeMap::from([(a.clone(), a.clone())]);
    un.grow(None, root_consts, pi, depth)?;
    let (database, nodes, projection, bags, bag_parent) = un.finish();
    Ok(Unraveling { database, nodes, projection, bags, bag_parent })
}

type UnravelParts = (Database, Vec<UnravelNode>, BTreeMap<Name, Name>, Vec<BTreeSet<Name>>, Vec<Option<usize>>);

struct Unraveler<'a> {
    d: &'a Database,
    k: usize,
    fresh: &'a mut Fresh,
    dom: Vec<Name>,
    out: Database,
    nodes: Vec<UnravelNode>,
    projection: BTreeMap<Name, Name>,
    bags: Vec<BTreeSet<Name>>,
    bag_parent: Vec<Option<usize>>,
}

impl<'a> Unraveler<'a> {
    fn new(d: &'a Database, k: usize, fresh: &'a mut Fresh) -> Self {
        Unraveler {
            d,
            k,
            fresh,
            dom: d.domain().into_iter().collect(),
            out: Database::new(),
            nodes: vec![],
            projection: BTreeMap::new(),
            bags: vec![],
            bag_parent: vec![],
        }
    }

    fn finish(self) -> UnravelParts {
        (self.out, self.nodes, self.projection, self.bags, self.bag_parent)
    }

    /// Adds a bag whose constants `consts` project via `pi`, then its subtree.
    /// `levels` counts the bag levels still to add below `parent`.
    fn grow(
        &mut self,
        parent: Option<usize>,
        consts: BTreeSet<Name>,
        pi: BTreeMap<Name, Name>,
        levels: usize,
    ) -> Result<()> {
        let here = if parent.is_some() || !consts.is_empty() {
            if self.bags.len() >= UNRAVEL_BAG_CAP {
                return Err(Error::CapExceeded(format!("unraveling exceeds {UNRAVEL_BAG_CAP} bags")));
            }
            let id = self.bags.len();
            let depth = parent.map_or(0, |p| self.depth_of(p) + 1);
            let originals: BTreeSet<Name> = consts.iter().map(|c| pi[c].clone()).collect();
            let inverse: BTreeMap<&Name, &Name> = consts.iter().map(|c| (&pi[c], c)).collect();
            for f in self.d.induced(&originals).facts {
                self.out.insert(f.map_terms(|t| inverse[t].clone()));
            }
            for c in &consts {
                if !self.projection.contains_key(c) {
                    self.projection.insert(c.clone(), pi[c].clone());
                    self.nodes.push(UnravelNode { constant: c.clone(), projection: pi[c].clone(), bag: id, depth });
                }
            }
            self.bags.push(consts.clone());
            self.bag_parent.push(parent);
            Some(id)
        } else {
            None
        };
        if levels == 0 {
            return Ok(());
        }
        let size = (self.k + 1).min(self.dom.len());
        let parent_image: BTreeSet<Name> = consts.iter().map(|c| pi[c].clone()).collect();
        for set in subsets_of_size(&self.dom, size) {
            let set: BTreeSet<Name> = set.into_iter().collect();
            if self.d.induced(&set).is_empty() {
                continue;
            }
            if here.is_some() && (set.is_disjoint(&parent_image) || set == parent_image) {
                continue;
            }
            let back: BTreeMap<&Name, &Name> = consts.iter().map(|c| (&pi[c], c)).collect();
            let mut child_pi = BTreeMap::new();
            let mut child_consts = BTreeSet::new();
            for o in &set {
                let c = match back.get(o) {
                    Some(c) => (*c).clone(),
                    None => self.fresh.next(),
                };
                child_pi.insert(c.clone(), o.clone());
                child_consts.insert(c);
            }
            self.grow(here.or(parent), child_consts, child_pi, levels - 1)?;
        }
        Ok(())
    }

    fn depth_of(&self, mut b: usize) -> usize {
        let mut d = 0;
        while let Some(p) = self.bag_parent[b] {
            d += 1;
            b = p;
        }
        d
    }
}

fn subsets_of_size<T: Clone>(items: &[T], size: usize) -> Vec<Vec<T>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec<T: Clone>(items: &[T], start: usize, size: usize, cur: &mut Vec<T>, out: &mut Vec<Vec<T>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            cur.push(items[i].clone());
            rec(items, i + 1, size, cur, out);
            cur.pop();
        }
    }
    rec(items, 0, size, &mut cur, &mut out);
    out
}

pub(crate) fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    fn heap(k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(cur.clone());
            return;
        }
        for i in 0..k {
            heap(k - 1, cur, out);
            if k % 2 == 0 {
                cur.swap(i, k - 1);
            } else {
                cur.swap(0, k - 1);
            }
        }
    }
    heap(n, &mut cur, &mut out);
    out
}

/// Whether `h` is a minor of `g`, by search over connected branch sets.
pub fn is_minor<V: Ord + Clone, W: Ord + Clone>(h: &Graph<V>, g: &Graph<W>) -> Result<bool> {
    let n = g.vertex_count();
    if n > MINOR_CAP {
        return Err(Error::CapExceeded(format!("minor test on {n} vertices exceeds the cap of {MINOR_CAP}")));
    }
    let m = h.vertex_count();
    if m > n || h.edge_count() > g.edge_count() {
        return Ok(false);
    }
    if m == 0 {
        return Ok(true);
    }
    let gv: Vec<&W> = g.vertices().collect();
    let gi: BTreeMap<&W, usize> = gv.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    let gadj: Vec<u32> =
        gv.iter().map(|v| g.neighbors(v).fold(0u32, |acc, w| acc | (1 << gi[w]))).collect();
    // h vertices in BFS order so every vertex after the first in a component has an earlier neighbor.
    let hv: Vec<&V> = {
        let mut order = Vec::new();
        let mut seen = BTreeSet::new();
        for start in h.vertices() {
            if !seen.insert(start) {
                continue;
            }
            let mut queue = VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                order.push(u);
                for w in h.neighbors(u) {
                    if seen.insert(w) {
                        queue.push_back(w);
                    }
                }
            }
        }
        order
    };
    let hi: BTreeMap<&V, usize> = hv.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    let earlier: Vec<Vec<usize>> =
        hv.iter().enumerate().map(|(i, v)| h.neighbors(v).map(|w| hi[w]).filter(|&j| j < i).collect()).collect();
    let connected: Vec<u32> = (1u32..(1u32 << n))
        .filter(|&s| {
            let start = s.trailing_zeros();
            let mut comp = 1u32 << start;
            loop {
                let mut next = comp;
                let mut c = comp;
                while c != 0 {
                    let u = c.trailing_zeros() as usize;
                    c &= c - 1;
                    next |= gadj[u] & s;
                }
                if next == comp {
                    break;
                }
                comp = next;
            }
            comp == s
        })
        .collect();
    let nbr = |s: u32| {
        let mut out = 0u32;
        let mut c = s;
        while c != 0 {
            let u = c.trailing_zeros() as usize;
            c &= c - 1;
            out |= gadj[u];
        }
        out
    };
    fn search(
        i: usize,
        used: u32,
        sets: &mut Vec<u32>,
        earlier: &[Vec<usize>],
        connected: &[u32],
        nbr: &dyn Fn(u32) -> u32,
        n: usize,
    ) -> bool {
        if i == earlier.len() {
            return true;
        }
        let remaining = earlier.len() - i;
        if (n as u32 - used.count_ones()) < remaining as u32 {
            return false;
        }
        for &s in connected {
            if s & used != 0 {
                continue;
            }
            let ns = nbr(s);
            if earlier[i].iter().all(|&j| ns & sets[j] != 0) {
                sets.push(s);
                if search(i + 1, used | s, sets, earlier, connected, nbr, n) {
                    return true;
                }
                sets.pop();
            }
        }
        false
    }
    Ok(search(0, 0, &mut Vec::new(), &earlier, &connected, &nbr, n))
}

/// Treewidth of a database's Gaifman graph.
pub fn database_treewidth(d: &Database) -> Result<usize> {
    let mut g = Graph::new();
    for c in d.domain() {
        g.add_vertex(c);
    }
    for f in &d.facts {
        if let Atom::Binary(_, a, b) = f {
            g.add_edge(a, b);
        }
    }
    Ok(treewidth(&g)?.0)
}

/// Whether the unraveling maps into `d` by its projection (point 1 of the unraveling lemma).
pub fn projection_is_homomorphism(u: &Unraveling, d: &Database) -> bool {
    u.database.facts.iter().all(|f| d.contains(&f.map_terms(|t| u.projection.get(t).cloned().unwrap_or_else(|| t.clone()))))
}

/// A homomorphism from `d1` to `d2` fixing `fixed`, if any.
pub fn database_homomorphism(d1: &Database, d2: &Database, fixed: &[Name]) -> Option<BTreeMap<Name, Name>> {
    let q = Cq::from_parts(fixed.to_vec(), d1.facts.iter().cloned().collect());
    homtools::find_homomorphism(&q, d2, &fixed.iter().map(|c| (c.clone(), c.clone())).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle(n: usize) -> Graph<usize> {
        Graph::from_edges((0..n).map(|i| (i, (i + 1) % n)))
    }

    fn complete(n: usize) -> Graph<usize> {
        Graph::from_edges((0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))))
    }

    #[test]
    fn treewidth_of_small_graphs() {
        assert_eq!(treewidth(&cycle(4)).unwrap().0, 2);
        assert_eq!(treewidth(&Graph::from_edges([(0, 1)])).unwrap().0, 1);
        assert_eq!(treewidth(&complete(4)).unwrap().0, 3);
        assert_eq!(treewidth(&Graph::<usize>::new()).unwrap().0, 0);
    }

    #[test]
    fn grid_treewidth() {
        // 3x3 grid has treewidth 3.
        let id = |r: usize, c: usize| r * 3 + c;
        let mut edges = vec![];
        for r in 0..3 {
            for c in 0..3 {
                if r + 1 < 3 {
                    edges.push((id(r, c), id(r + 1, c)));
                }
                if c + 1 < 3 {
                    edges.push((id(r, c), id(r, c + 1)));
                }
            }
        }
        let g = Graph::from_edges(edges);
        let (w, td) = treewidth(&g).unwrap();
        assert_eq!(w, 3);
        td.validate(&g).unwrap();
    }

    #[test]
    fn ditree_examples() {
        let d = Database::from_facts([
            Atom::binary("r", "a", "b"),
            Atom::binary("s", "a", "b"),
            Atom::binary("r", "b", "c"),
        ])
        .unwrap();
        assert!(is_ditree(&d));
        assert!(!is_ditree(&Database::from_facts([Atom::binary("r", "a", "a")]).unwrap()));
        let two_parents = Database::from_facts([Atom::binary("r", "a", "b"), Atom::binary("r", "c", "b")]).unwrap();
        assert!(!is_ditree(&two_parents));
    }

    #[test]
    fn dtree_examples() {
        let q = Cq::boolean(vec![Atom::binary("r", "x", "y"), Atom::binary("s", "z", "y")]);
        let t = dtree(&q).unwrap().unwrap();
        assert_eq!(t.atoms, vec![Atom::binary("r", "x", "y"), Atom::binary("s", "x", "y")]);
        assert_eq!(t.answer, vec![Name::new("x")]);
        let cyc = Cq::boolean(vec![Atom::binary("r", "x", "y"), Atom::binary("r", "y", "x")]);
        assert!(dtree(&cyc).unwrap().is_none());
        let fork = Cq::boolean(vec![Atom::binary("r", "x", "y"), Atom::binary("r", "x", "z")]);
        assert_eq!(dtree(&fork).unwrap().unwrap().atoms, fork.atoms);
        let split = Cq::boolean(vec![Atom::unary("A", "x"), Atom::unary("B", "y")]);
        assert!(dtree(&split).is_err());
    }

    #[test]
    fn minors() {
        let edge = Graph::from_edges([(0, 1)]);
        assert!(is_minor(&edge, &cycle(4)).unwrap());
        assert!(!is_minor(&complete(4), &cycle(4)).unwrap());
        assert!(is_minor(&cycle(4), &cycle(4)).unwrap());
        assert!(is_minor(&cycle(3), &cycle(6)).unwrap());
        assert!(!is_minor(&cycle(3), &Graph::from_edges([(0, 1), (1, 2), (2, 3)])).unwrap());
    }

    #[test]
    fn unravel_examples() {
        let d = Database::from_facts([Atom::unary("A", "a")]).unwrap();
        let u = k_unravel(&d, &[], 1, 0).unwrap();
        assert_eq!(u.database.len(), 1);
        let c = u.nodes[0].constant.clone();
        assert_eq!(u.projection[&c], Name::new("a"));
        assert!(u.database.contains(&Atom::Unary("A".into(), c)));

        let cyc = Database::from_facts([
            Atom::binary("r", "a", "b"),
            Atom::binary("r", "b", "c"),
            Atom::binary("r", "c", "d"),
            Atom::binary("r", "d", "a"),
        ])
        .unwrap();
        let u = k_unravel(&cyc, &[], 1, 3).unwrap();
        assert!(projection_is_homomorphism(&u, &cyc));
        assert_eq!(database_treewidth(&u.database).unwrap(), 1);

        let all: Vec<Name> = cyc.domain().into_iter().collect();
        assert_eq!(k_unravel(&cyc, &all, 1, 3).unwrap().database, cyc);
    }

    #[test]
    fn unravel_at_constant() {
        let d = Database::from_facts([Atom::unary("A", "a")]).unwrap();
        assert_eq!(unravel1_at(&d, &"a".into(), 3).unwrap().database, d);
        let two = Database::from_facts([Atom::binary("r", "a", "b"), Atom::binary("r", "b", "a")]).unwrap();
        let u = unravel1_at(&two, &"a".into(), 2).unwrap();
        assert!(projection_is_homomorphism(&u, &two));
        assert!(u.database.domain().contains("a"));
        assert!(unravel1_at(&two, &"z".into(), 1).is_err());
    }
}
