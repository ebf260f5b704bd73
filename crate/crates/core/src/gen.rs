//! Seeded random instances: ontologies, databases of bounded treewidth and
//! CQs/UCQs built from random partial k-trees.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::model::{Atom, Axiom, Concept, Cq, Database, Dialect, Name, Ontology, Role, Ucq};

/// Concept and role names `A1..An`, `r1..rm`.
#[derive(Clone, Debug)]
pub struct Signature {
    pub concepts: Vec<Name>,
    pub roles: Vec<Name>,
}

impl Signature {
    pub fn new(concepts: usize, roles: usize) -> Self {
        Signature {
            concepts: (1..=concepts).map(|i| Name::from(format!("A{i}"))).collect(),
            roles: (1..=roles).map(|i| Name::from(format!("r{i}"))).collect(),
        }
    }

    pub fn names(&self) -> BTreeSet<Name> {
        self.concepts.iter().chain(&self.roles).cloned().collect()
    }
}

fn pick<R: Rng, T: Clone>(rng: &mut R, xs: &[T]) -> T {
    xs.choose(rng).expect("nonempty choice").clone()
}

fn role<R: Rng>(rng: &mut R, sig: &Signature, inverses: bool) -> Role {
    let r = pick(rng, &sig.roles);
    if inverses && rng.gen_bool(0.4) {
        Role::inv_of(r)
    } else {
        Role::new(r)
    }
}

/// EL-style concept of depth at most `depth`, with optional inverse roles.
pub fn random_concept<R: Rng>(rng: &mut R, sig: &Signature, depth: usize, inverses: bool) -> Concept {
    let roll: f64 = rng.gen();
    if depth == 0 || roll < 0.35 {
        return if rng.gen_bool(0.1) { Concept::Top } else { Concept::atomic(pick(rng, &sig.concepts)) };
    }
    if roll < 0.6 {
        let n = rng.gen_range(2..=3);
        return Concept::conj((0..n).map(|_| random_concept(rng, sig, depth - 1, inverses)));
    }
    Concept::exists(role(rng, sig, inverses), random_concept(rng, sig, depth - 1, inverses))
}

/// Random ontology of up to `max_axioms` axioms admitted by `dialect`
/// (EL family only; DL-Lite ontologies come from [`random_dllite_f`]).
pub fn random_ontology<R: Rng>(rng: &mut R, dialect: Dialect, sig: &Signature, max_axioms: usize, depth: usize) -> Ontology {
    let inverses = matches!(dialect, Dialect::Eli | Dialect::EliBot | Dialect::ElhiBot);
    let bot = !matches!(dialect, Dialect::El | Dialect::Eli);
    let hier = matches!(dialect, Dialect::ElhBot | Dialect::ElhdrBot | Dialect::ElhiBot);
    let range = dialect == Dialect::ElhdrBot;
    let n = rng.gen_range(0..=max_axioms);
    let mut axioms = Vec::new();
    while axioms.len() < n {
        let roll: f64 = rng.gen();
        let ax = if hier && roll < 0.12 && sig.roles.len() > 1 {
            let r = role(rng, sig, inverses);
            let s = role(rng, sig, inverses);
            if r == s || r == s.inv() {
                continue;
            }
            Axiom::RoleInclusion(r, s)
        } else if range && roll < 0.22 {
            Axiom::RangeRestriction(pick(rng, &sig.roles), random_concept(rng, sig, 1, false))
        } else if bot && roll < 0.3 {
            let lhs = random_concept(rng, sig, depth.min(1), inverses);
            if lhs == Concept::Top {
                continue;
            }
            Axiom::ConceptInclusion(lhs, Concept::Bot)
        } else {
            let lhs = random_concept(rng, sig, depth, inverses);
            let rhs = random_concept(rng, sig, depth, inverses);
            if lhs == rhs || rhs == Concept::Top {
                continue;
            }
            Axiom::ConceptInclusion(lhs, rhs)
        };
        axioms.push(ax);
    }
    Ontology::new(dialect, axioms).expect("generator respects the dialect")
}

/// Random DL-Lite^F ontology: basic inclusions, existential right-hand sides,
/// disjointness of basic concepts and functionality assertions.
pub fn random_dllite_f<R: Rng>(rng: &mut R, sig: &Signature, max_axioms: usize) -> Ontology {
    let basic = |rng: &mut R| -> Concept {
        if rng.gen_bool(0.5) {
            Concept::atomic(pick(rng, &sig.concepts))
        } else {
            Concept::exists(role(rng, sig, true), Concept::Top)
        }
    };
    let n = rng.gen_range(0..=max_axioms);
    let mut axioms = Vec::new();
    while axioms.len() < n {
        let roll: f64 = rng.gen();
        let ax = if roll < 0.2 {
            Axiom::Functionality(pick(rng, &sig.roles))
        } else if roll < 0.3 {
            Axiom::HornConceptInclusion(vec![basic(rng), basic(rng)], Concept::Bot)
        } else {
            let (l, r) = (basic(rng), basic(rng));
            if l == r {
                continue;
            }
            Axiom::ConceptInclusion(l, r)
        };
        axioms.push(ax);
    }
    Ontology::new(Dialect::DlLiteF, axioms).expect("generator respects the dialect")
}

/// Edges of a random connected graph of treewidth at most `k` on `n` vertices,
/// grown one vertex at a time from random bags of a width-`k` decomposition.
pub fn random_partial_ktree<R: Rng>(rng: &mut R, n: usize, k: usize, density: f64) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    let mut bags: Vec<Vec<usize>> = vec![vec![0]];
    for v in 1..n {
        let host = bags.choose(rng).unwrap().clone();
        let mut keep: Vec<usize> = host.clone();
        keep.shuffle(rng);
        keep.truncate(k.max(1));
        let mut linked = false;
        for &u in &keep {
            if rng.gen_bool(density) {
                edges.push((u, v));
                linked = true;
            }
        }
        if !linked {
            edges.push((keep[0], v));
        }
        keep.push(v);
        bags.push(keep);
    }
    edges
}

fn orient<R: Rng>(rng: &mut R, sig: &Signature, edges: &[(usize, usize)], names: &[Name]) -> Vec<Atom> {
    edges
        .iter()
        .map(|&(u, v)| {
            let (a, b) = if rng.gen_bool(0.5) { (u, v) } else { (v, u) };
            Atom::binary(pick(rng, &sig.roles), names[a].clone(), names[b].clone())
        })
        .collect()
}

fn unary_atoms<R: Rng>(rng: &mut R, sig: &Signature, names: &[Name], p: f64) -> Vec<Atom> {
    let mut out = Vec::new();
    for x in names {
        while rng.gen_bool(p) {
            out.push(Atom::unary(pick(rng, &sig.concepts), x.clone()));
            if out.len() > 4 * names.len() {
                break;
            }
        }
    }
    out
}

/// Connected CQ over `nvars` variables of treewidth at most `k` with `arity` answer variables.
pub fn random_cq<R: Rng>(rng: &mut R, sig: &Signature, nvars: usize, k: usize, arity: usize) -> Cq {
    let names: Vec<Name> = (0..nvars).map(|i| Name::from(format!("x{i}"))).collect();
    let edges = random_partial_ktree(rng, nvars, k, 0.6);
    let mut atoms = orient(rng, sig, &edges, &names);
    atoms.extend(unary_atoms(rng, sig, &names, 0.3));
    if atoms.is_empty() {
        atoms.push(Atom::unary(pick(rng, &sig.concepts), names[0].clone()));
    }
    let mut order = names.clone();
    order.shuffle(rng);
    let answer = order.into_iter().take(arity.min(nvars)).collect();
    Cq::from_parts(answer, atoms)
}

/// UCQ of one to `max_disjuncts` CQs sharing an arity.
pub fn random_ucq<R: Rng>(rng: &mut R, sig: &Signature, max_vars: usize, k: usize, arity: usize, max_disjuncts: usize) -> Ucq {
    let n = rng.gen_range(1..=max_disjuncts);
    let disjuncts = (0..n)
        .map(|_| {
            let nv = rng.gen_range(arity.max(1)..=max_vars.max(arity.max(1)));
            random_cq(rng, sig, nv, k, arity)
        })
        .collect();
    Ucq::new(disjuncts).expect("disjuncts share an arity")
}

/// Random database over `nconsts` constants `c0..` with about `nfacts` facts.
pub fn random_database<R: Rng>(rng: &mut R, sig: &Signature, nconsts: usize, nfacts: usize) -> Database {
    let consts: Vec<Name> = (0..nconsts).map(|i| Name::from(format!("c{i}"))).collect();
    let mut d = Database::new();
    for _ in 0..nfacts {
        if rng.gen_bool(0.45) {
            d.insert(Atom::unary(pick(rng, &sig.concepts), pick(rng, &consts)));
        } else {
            d.insert(Atom::binary(pick(rng, &sig.roles), pick(rng, &consts), pick(rng, &consts)));
        }
    }
    d
}

/// Database of treewidth at most `k` grown from a random width-`k` decomposition.
pub fn random_tw_database<R: Rng>(rng: &mut R, sig: &Signature, nconsts: usize, k: usize) -> Database {
    let consts: Vec<Name> = (0..nconsts).map(|i| Name::from(format!("c{i}"))).collect();
    let edges = random_partial_ktree(rng, nconsts, k, 0.7);
    let mut d = Database::new();
    for a in orient(rng, sig, &edges, &consts) {
        d.insert(a);
    }
    for a in unary_atoms(rng, sig, &consts, 0.45) {
        d.insert(a);
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphalg::cq_treewidth;
    use crate::model::{check_dialect, gaifman_graph};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_cqs_respect_treewidth() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let sig = Signature::new(3, 2);
        for k in 1..=2 {
            for _ in 0..50 {
                let q = random_cq(&mut rng, &sig, 6, k, 1);
                assert!(cq_treewidth(&q).unwrap() <= k);
                assert_eq!(gaifman_graph(&q).components().len(), 1);
            }
        }
    }

    #[test]
    fn generated_ontologies_respect_dialects() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let sig = Signature::new(4, 2);
        for d in [Dialect::El, Dialect::ElhdrBot, Dialect::EliBot] {
            for _ in 0..30 {
                let o = random_ontology(&mut rng, d, &sig, 6, 2);
                assert!(check_dialect(&o, d).is_ok());
            }
        }
        for _ in 0..30 {
            assert!(check_dialect(&random_dllite_f(&mut rng, &sig, 5), Dialect::DlLiteF).is_ok());
        }
    }
}
