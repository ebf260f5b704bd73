//! The oblivious chase and the truncated canonical model used for evaluation.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use fixedbitset::FixedBitSet;

use crate::entailment::{saturate_with, ConceptType, Reasoner, RoleHierarchy};
use crate::error::{Error, Result};
use crate::model::{cq_as_database, Atom, Axiom, Concept, Cq, Database, Fresh, Name, Ontology, Role};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Provenance {
    Original,
    /// Copy of an element type found in the anonymous tree below `origin`.
    TypeCopy { origin: Name, ty: ConceptType },
    Anonymous { parent: Name, role: Role, via: Option<Axiom>, depth: usize },
}

/// A chased database with per-constant provenance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChaseDb {
    pub facts: Database,
    pub provenance: BTreeMap<Name, Provenance>,
}

impl ChaseDb {
    pub fn is_original(&self, c: &str) -> bool {
        matches!(self.provenance.get(c), Some(Provenance::Original))
    }

    pub fn originals(&self) -> BTreeSet<Name> {
        self.provenance.iter().filter(|(_, p)| **p == Provenance::Original).map(|(c, _)| c.clone()).collect()
    }

    /// Provenance as JSON, one entry per non-original constant.
    pub fn provenance_json(&self) -> serde_json::Value {
        let mut out = serde_json::Map::new();
        for (c, p) in &self.provenance {
            let v = match p {
                Provenance::Original => serde_json::json!({"kind": "original"}),
                Provenance::TypeCopy { origin, ty } => serde_json::json!({
                    "kind": "type_copy",
                    "origin": origin.as_str(),
                    "type": ty.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
                }),
                Provenance::Anonymous { parent, role, via, depth } => serde_json::json!({
                    "kind": "anonymous",
                    "parent": parent.as_str(),
                    "role": role.to_string(),
                    "via": via.as_ref().map(|a| a.to_string()),
                    "depth": depth,
                }),
            };
            out.insert(c.to_string(), v);
        }
        serde_json::Value::Object(out)
    }
}

/// Adjacency view of a growing fact set, used to evaluate concepts.
#[derive(Default)]
struct Interp {
    labels: HashMap<Name, BTreeSet<Name>>,
    out: HashMap<Name, Vec<(Name, Name)>>,
    inn: HashMap<Name, Vec<(Name, Name)>>,
}

impl Interp {
    fn build(facts: &BTreeSet<Atom>) -> Self {
        let mut i = Interp::default();
        for f in facts {
            match f {
                Atom::Unary(p, a) => {
                    i.labels.entry(a.clone()).or_default().insert(p.clone());
                }
                Atom::Binary(p, a, b) => {
                    i.out.entry(a.clone()).or_default().push((p.clone(), b.clone()));
                    i.inn.entry(b.clone()).or_default().push((p.clone(), a.clone()));
                }
            }
        }
        i
    }

    fn successors<'a>(&'a self, e: &Name, r: &'a Role) -> impl Iterator<Item = &'a Name> + 'a {
        let list = if r.inverse { self.inn.get(e) } else { self.out.get(e) };
        list.into_iter().flatten().filter(move |(p, _)| *p == r.name).map(|(_, x)| x)
    }

    fn holds(&self, c: &Concept, e: &Name, memo: &mut HashMap<(Concept, Name), bool>) -> bool {
        match c {
            Concept::Top => true,
            Concept::Bot => false,
            Concept::Atomic(a) => self.labels.get(e).is_some_and(|l| l.contains(a)),
            Concept::Conj(cs) => cs.iter().all(|d| self.holds(d, e, memo)),
            Concept::Exists(r, d) => {
                let key = (c.clone(), e.clone());
                if let Some(&v) = memo.get(&key) {
                    return v;
                }
                let succ: Vec<Name> = self.successors(e, r).cloned().collect();
                let v = succ.iter().any(|x| self.holds(d, x, memo));
                memo.insert(key, v);
                v
            }
        }
    }
}

/// The oblivious chase, creating anonymous elements only up to forest depth `depth`.
/// Fails with [`Error::Inconsistent`] when a `bot` axiom fires or a role
/// disjointness is violated within that depth.
pub fn oblivious_chase(d: &Database, o: &Ontology, depth: usize) -> Result<ChaseDb> {
    let roles = RoleHierarchy::new(&o.role_inclusions());
    let inclusions = o.inclusions();
    let mut facts: BTreeSet<Atom> = d.facts.clone();
    let mut provenance: BTreeMap<Name, Provenance> =
        d.domain().into_iter().map(|c| (c, Provenance::Original)).collect();
    let mut depth_of: HashMap<Name, usize> = provenance.keys().map(|c| (c.clone(), 0)).collect();
    let mut fresh = Fresh::new("_n", d.domain());
    let mut fired: HashSet<(Name, usize)> = HashSet::new();
    loop {
        close_roles(&mut facts, &roles);
        let interp = Interp::build(&facts);
        let mut memo = HashMap::new();
        let mut firings = Vec::new();
        for e in provenance.keys() {
            for (i, (c, _)) in inclusions.iter().enumerate() {
                if !fired.contains(&(e.clone(), i)) && interp.holds(c, e, &mut memo) {
                    firings.push((e.clone(), i));
                }
            }
        }
        if firings.is_empty() {
            break;
        }
        for (e, i) in firings {
            fired.insert((e.clone(), i));
            let (_, rhs) = &inclusions[i];
            if rhs.conjuncts().contains(&&Concept::Bot) {
                return Err(Error::Inconsistent);
            }
            let axiom = Axiom::ConceptInclusion(inclusions[i].0.clone(), rhs.clone());
            let base = depth_of[&e];
            attach(rhs, &e, base, depth, &axiom, &mut fresh, &mut facts, &mut provenance, &mut depth_of);
        }
    }
    let facts = Database { facts };
    if crate::entailment::violates_disjointness(&facts, &o.disjoint_roles()) {
        return Err(Error::Inconsistent);
    }
    Ok(ChaseDb { facts, provenance })
}

#[allow(clippy::too_many_arguments)]
fn attach(
    c: &Concept,
    at: &Name,
    at_depth: usize,
    limit: usize,
    axiom: &Axiom,
    fresh: &mut Fresh,
    facts: &mut BTreeSet<Atom>,
    provenance: &mut BTreeMap<Name, Provenance>,
    depth_of: &mut HashMap<Name, usize>,
) {
    match c {
        Concept::Top | Concept::Bot => {}
        Concept::Atomic(a) => {
            facts.insert(Atom::Unary(a.clone(), at.clone()));
        }
        Concept::Conj(cs) => {
            for d in cs {
                attach(d, at, at_depth, limit, axiom, fresh, facts, provenance, depth_of);
            }
        }
        Concept::Exists(r, d) => {
            if at_depth >= limit {
                return;
            }
            let y = fresh.next();
            provenance.insert(
                y.clone(),
                Provenance::Anonymous { parent: at.clone(), role: r.clone(), via: Some(axiom.clone()), depth: at_depth + 1 },
            );
            depth_of.insert(y.clone(), at_depth + 1);
            facts.insert(r.atom(at.clone(), y.clone()));
            attach(d, &y, at_depth + 1, limit, axiom, fresh, facts, provenance, depth_of);
        }
    }
}

fn close_roles(facts: &mut BTreeSet<Atom>, roles: &RoleHierarchy) {
    let extra: Vec<Atom> = facts
        .iter()
        .filter_map(|f| match f {
            Atom::Binary(p, a, b) => Some((Role::new(p.clone()), a, b)),
            _ => None,
        })
        .flat_map(|(r, a, b)| roles.supers(&r).into_iter().map(move |s| s.atom(a.clone(), b.clone())))
        .collect();
    facts.extend(extra);
}

/// The chase of a CQ viewed as a database.
pub fn chase_of_cq(q: &Cq, o: &Ontology, depth: usize) -> Result<ChaseDb> {
    oblivious_chase(&cq_as_database(q), o, depth)
}

/// Facts among original constants.
pub fn chase_restriction(c: &ChaseDb) -> Database {
    let originals = c.originals();
    c.facts.induced(&originals)
}

/// Truncated canonical model: saturation, type copies, then `steps` rounds
/// of adding maximal successors that are not yet witnessed.
pub fn canonical_model(d: &Database, o: &Ontology, steps: usize) -> Result<ChaseDb> {
    let mut reasoner = Reasoner::for_ontology(o)?;
    canonical_model_with(&mut reasoner, o, d, steps)
}

pub fn canonical_model_with(reasoner: &mut Reasoner, o: &Ontology, d: &Database, steps: usize) -> Result<ChaseDb> {
    let sat = saturate_with(reasoner, d);
    if sat.inconsistent {
        return Err(Error::Inconsistent);
    }
    let probes: Vec<(Concept, usize)> = o
        .sub()
        .into_iter()
        .filter_map(|c| {
            let id = match &c {
                Concept::Top => Some(reasoner.no.top),
                Concept::Atomic(a) => reasoner.no.id(a),
                _ => None,
            };
            id.map(|i| (c, i))
        })
        .collect();
    let mut b = Builder {
        facts: sat.role_closed.facts.clone(),
        provenance: sat.consts.iter().map(|c| (c.clone(), Provenance::Original)).collect(),
        types: HashMap::new(),
        adj: HashMap::new(),
        fresh_n: Fresh::new("_n", sat.consts.iter().cloned()),
        fresh_t: Fresh::new("_t", sat.consts.iter().cloned()),
    };
    for f in &sat.role_closed.facts {
        if let Atom::Binary(p, x, y) = f {
            let r = Role::new(p.clone());
            b.adj.entry(x.clone()).or_default().push((y.clone(), r.clone()));
            b.adj.entry(y.clone()).or_default().push((x.clone(), r.inv()));
        }
    }
    let mut frontier: Vec<Name> = Vec::new();
    for (i, c) in sat.consts.iter().enumerate() {
        b.set_type(reasoner, c, sat.types[i].clone());
        frontier.push(c.clone());
    }
    for (i, c) in sat.consts.iter().enumerate() {
        let root = sat.types[i].clone();
        let mut tree = reasoner.tree_types(&root);
        tree.retain(|t| *t != root);
        for t in tree {
            let name = b.fresh_t.next();
            let ty: ConceptType = probes.iter().filter(|(_, id)| t.contains(*id)).map(|(c, _)| c.clone()).collect();
            b.provenance.insert(name.clone(), Provenance::TypeCopy { origin: c.clone(), ty });
            b.set_type(reasoner, &name, t);
            frontier.push(name);
        }
    }
    for _ in 0..steps {
        let mut next = Vec::new();
        for a in &frontier {
            let ta = b.types[a].clone();
            let depth = match &b.provenance[a] {
                Provenance::Anonymous { depth, .. } => *depth,
                _ => 0,
            };
            let mut cands: Vec<(BTreeSet<Role>, Role, FixedBitSet)> = Vec::new();
            for (r, _, ct) in reasoner.children(&ta) {
                let rs = reasoner.roles.supers(&r);
                cands.push((rs, r, ct));
            }
            let mut kept: Vec<(BTreeSet<Role>, Role, FixedBitSet)> = Vec::new();
            for (i, (rs, r, ct)) in cands.iter().enumerate() {
                let dominated = cands.iter().enumerate().any(|(j, (rs2, _, ct2))| {
                    let ge = rs2.is_superset(rs) && ct.is_subset(ct2);
                    let strictly = rs2 != rs || ct2 != ct;
                    ge && (strictly || j < i)
                });
                if !dominated {
                    kept.push((rs.clone(), r.clone(), ct.clone()));
                }
            }
            for (rs, r, ct) in kept {
                let witnessed = b.adj.get(a).is_some_and(|succ| {
                    let mut by_target: BTreeMap<&Name, BTreeSet<&Role>> = BTreeMap::new();
                    for (y, role) in succ {
                        by_target.entry(y).or_default().insert(role);
                    }
                    by_target.iter().any(|(y, roles)| rs.iter().all(|s| roles.contains(s)) && ct.is_subset(&b.types[*y]))
                });
                if witnessed {
                    continue;
                }
                let y = b.fresh_n.next();
                b.provenance
                    .insert(y.clone(), Provenance::Anonymous { parent: a.clone(), role: r.clone(), via: None, depth: depth + 1 });
                for s in &rs {
                    b.facts.insert(s.atom(a.clone(), y.clone()));
                    b.adj.entry(a.clone()).or_default().push((y.clone(), s.clone()));
                    b.adj.entry(y.clone()).or_default().push((a.clone(), s.inv()));
                }
                b.set_type(reasoner, &y, ct);
                next.push(y);
            }
        }
        frontier = next;
        if frontier.is_empty() {
            break;
        }
    }
    Ok(ChaseDb { facts: Database { facts: b.facts }, provenance: b.provenance })
}

struct Builder {
    facts: BTreeSet<Atom>,
    provenance: BTreeMap<Name, Provenance>,
    types: HashMap<Name, FixedBitSet>,
    adj: HashMap<Name, Vec<(Name, Role)>>,
    fresh_n: Fresh,
    fresh_t: Fresh,
}

impl Builder {
    fn set_type(&mut self, r: &Reasoner, c: &Name, t: FixedBitSet) {
        for id in t.ones() {
            if r.no.is_original(id) {
                self.facts.insert(Atom::Unary(r.no.name(id).clone(), c.clone()));
            }
        }
        self.types.insert(c.clone(), t);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{parse_database, parse_ontology};

    fn db(s: &str) -> Database {
        parse_database(s).unwrap()
    }

    #[test]
    fn oblivious_examples() {
        let o = parse_ontology("A <= exists r . B").unwrap();
        let c = oblivious_chase(&db("A(a)"), &o, 1).unwrap();
        assert_eq!(c.facts, db("A(a)\nr(a,_n1)\nB(_n1)"));
        assert_eq!(chase_restriction(&c), db("A(a)"));
        let o = parse_ontology("r <= s\nA <= exists r . top").unwrap();
        let c = oblivious_chase(&db("r(a,b)"), &o, 0).unwrap();
        assert!(c.facts.contains(&Atom::binary("s", "a", "b")));
        assert_eq!(chase_restriction(&c), db("r(a,b)\ns(a,b)"));
        let o = parse_ontology("A <= exists r . A").unwrap();
        let c = oblivious_chase(&db("A(a)"), &o, 3).unwrap();
        assert_eq!(c.facts, db("A(a)\nr(a,_n1)\nA(_n1)\nr(_n1,_n2)\nA(_n2)\nr(_n2,_n3)\nA(_n3)"));
    }

    #[test]
    fn oblivious_fires_even_if_satisfied() {
        let o = parse_ontology("A <= exists r . B").unwrap();
        let c = oblivious_chase(&db("A(a)\nr(a,b)\nB(b)"), &o, 1).unwrap();
        assert_eq!(c.provenance.len(), 3);
    }

    #[test]
    fn canonical_examples() {
        let o = parse_ontology("A <= exists r . B").unwrap();
        let c = canonical_model(&db("A(a)"), &o, 1).unwrap();
        assert!(c.facts.facts.iter().any(|f| matches!(f, Atom::Binary(p, x, y) if p.as_str() == "r" && x.as_str() == "a"
            && c.facts.contains(&Atom::Unary("B".into(), y.clone())))));
        let d = db("A(a)\nr(a,b)");
        let c = canonical_model(&d, &Ontology::empty(), 3).unwrap();
        assert_eq!(c.facts, d);
        let bot = parse_ontology("A <= bot").unwrap();
        assert!(matches!(canonical_model(&db("A(a)"), &bot, 1), Err(Error::Inconsistent)));
    }

    #[test]
    fn canonical_skips_witnessed_successors() {
        let o = parse_ontology("A <= exists r . B").unwrap();
        let c = canonical_model(&db("A(a)\nr(a,b)\nB(b)"), &o, 2).unwrap();
        assert!(c.provenance.values().all(|p| !matches!(p, Provenance::Anonymous { .. })));
    }

    #[test]
    fn saturation_feeds_canonical_model() {
        let o = parse_ontology("B1 <= A1\nexists r . B1 <= C").unwrap();
        let c = canonical_model(&db("B1(x)\nr(y,x)"), &o, 2).unwrap();
        assert!(c.facts.contains(&Atom::unary("A1", "x")));
        assert!(c.facts.contains(&Atom::unary("C", "y")));
    }
}
