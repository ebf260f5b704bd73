use std::time::Instant;

use omqlab::gen::{random_cq, Signature};
use omqlab::graphalg::cq_treewidth;
use omqlab::homtools::core;
use omqlab::model::{Ontology, Omq, Schema, Ucq};
use omqlab::surface::{parse_ontology, parse_query};
use omqlab::treelike::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GRID: &str = "q() :- r(x2,x1), r(x4,x1), r(x2,x3), r(x4,x3), A1(x1), A2(x2), A3(x3), A4(x4)";
const OMEGA2: &str = "B1 <= A1\nB2 <= A1\nexists r . B1 <= A4\nB2 <= A3";

#[test]
fn example_one_schema_sensitivity() {
    let o = parse_ontology(OMEGA2).unwrap();
    let q = parse_query(GRID).unwrap();
    let full = Omq::new(o.clone(), Schema::full(), q.clone());
    let v = decide_tw_equiv_general(&full, 1, 6).unwrap();
    assert!(matches!(v, TwEquivVerdict::No(Some(_))));
    let t = Instant::now();
    let s = Schema::full_minus(full.schema_names(), &["A1"]);
    let partial = Omq::new(o, s, q);
    let v = decide_tw_equiv_general(&partial, 1, 6).unwrap();
    eprintln!("{:?} in {:?}", v, t.elapsed());
    assert!(matches!(v, TwEquivVerdict::Unknown(_)));
}

#[test]
fn backward_search_rewrites_missing_predicates() {
    let o = parse_ontology(OMEGA2).unwrap();
    let q = parse_query(GRID).unwrap();
    let names = Omq::new(o.clone(), Schema::full(), q.clone()).schema_names();
    let omq = Omq::new(o, Schema::full_minus(names, &["A4"]), q);
    let TwEquivVerdict::No(Some(cx)) = decide_tw_equiv_general(&omq, 1, 6).unwrap() else { panic!("expected a counterexample") };
    assert!(cx.database.facts.iter().all(|f| f.pred().as_str() != "A4"));
    assert!(cx.database.facts.iter().any(|f| f.pred().as_str() == "B1"));
}

#[test]
fn grohe_base_case() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let sig = Signature::new(2, 2);
    for _ in 0..100 {
        let n = rng.gen_range(2..=7);
        let arity = rng.gen_range(0..=1);
        let q = random_cq(&mut rng, &sig, n, 3, arity);
        let omq = Omq::new(Ontology::empty(), Schema::full(), Ucq::single(q.clone()));
        for k in 1..=2 {
            let expected = cq_treewidth(&core(&q)).unwrap() <= k;
            let v = decide_tw_equiv_full(&omq, k).unwrap();
            assert_eq!(v.is_yes(), expected, "{q} k={k}");
        }
    }
}
