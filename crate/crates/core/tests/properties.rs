use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use omqlab::chase::oblivious_chase;
use omqlab::dllitef::{id_f_cq, split_ontology};
use omqlab::entailment::is_consistent;
use omqlab::eval::{evaluate_fpt, evaluate_naive};
use omqlab::gen::{random_cq, random_database, random_dllite_f, random_ontology, random_ucq, Signature};
use omqlab::graphalg::{cq_treewidth, database_homomorphism, database_treewidth, k_unravel, projection_is_homomorphism};
use omqlab::homtools::{contractions, core, cq_equivalent, maps_into};
use omqlab::model::{Database, Dialect, Omq, Schema};
use omqlab::surface::{
    parse_database, parse_ontology, parse_query, serialize_database, serialize_ontology, serialize_query,
};
use omqlab::treelike::{contains_full_schema, isomorphic, ucq_k_approximation};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn sig() -> Signature {
    Signature::new(3, 2)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parsers_never_panic(text in "\\PC{0,60}") {
        let _ = parse_query(&text);
        let _ = parse_database(&text);
        let _ = parse_ontology(&text);
    }

    #[test]
    fn query_text_round_trips(seed in any::<u64>()) {
        let q = random_ucq(&mut rng(seed), &sig(), 5, 2, 1, 3);
        let back = parse_query(&serialize_query(&q)).unwrap();
        prop_assert_eq!(back.disjuncts.len(), q.disjuncts.len());
        for (p, b) in q.disjuncts.iter().zip(&back.disjuncts) {
            prop_assert!(isomorphic(p, b), "{} vs {}", p, b);
        }
    }

    #[test]
    fn database_text_round_trips(seed in any::<u64>()) {
        let d = random_database(&mut rng(seed), &sig(), 5, 8);
        prop_assert_eq!(parse_database(&serialize_database(&d)).unwrap(), d);
    }

    #[test]
    fn ontology_text_is_stable(seed in any::<u64>()) {
        // Parsing normalizes role inclusions between inverses, so compare after one pass.
        let o = random_ontology(&mut rng(seed), Dialect::ElhiBot, &sig(), 6, 2);
        let once = parse_ontology(&serialize_ontology(&o)).unwrap();
        prop_assert_eq!(once.axioms.len(), o.axioms.len());
        prop_assert_eq!(parse_ontology(&serialize_ontology(&once)).unwrap(), once);
    }

    #[test]
    fn generated_queries_respect_treewidth(seed in any::<u64>(), k in 1usize..=3) {
        let q = random_cq(&mut rng(seed), &sig(), 6, k, 0);
        prop_assert!(cq_treewidth(&q).unwrap() <= k);
    }

    #[test]
    fn core_is_equivalent_and_idempotent(seed in any::<u64>()) {
        let q = random_cq(&mut rng(seed), &sig(), 6, 2, 1);
        let c = core(&q);
        prop_assert!(cq_equivalent(&q, &c));
        prop_assert!(c.atoms.len() <= q.atoms.len());
        prop_assert!(isomorphic(&core(&c), &c));
    }

    #[test]
    fn contractions_are_homomorphic_images(seed in any::<u64>()) {
        let q = random_cq(&mut rng(seed), &sig(), 4, 2, 1);
        for (c, _) in contractions(&q) {
            prop_assert!(maps_into(&q, &c));
        }
    }

    #[test]
    fn approximation_is_contained(seed in any::<u64>(), k in 1usize..=2) {
        let mut r = rng(seed);
        let o = random_ontology(&mut r, Dialect::ElhdrBot, &sig(), 4, 2);
        let q = random_ucq(&mut r, &sig(), 4, 3, 0, 1);
        let omq = Omq::new(o, Schema::full(), q);
        let qa = ucq_k_approximation(&omq, k).unwrap();
        prop_assert!(qa.query.disjuncts.iter().all(|p| cq_treewidth(p).unwrap() <= k));
        prop_assert!(contains_full_schema(&qa, &omq).unwrap());
    }

    #[test]
    fn naive_and_fpt_agree(seed in any::<u64>()) {
        let mut r = rng(seed);
        let o = random_ontology(&mut r, Dialect::ElhiBot, &sig(), 5, 2);
        let q = random_ucq(&mut r, &sig(), 4, 2, 1, 2);
        let d = random_database(&mut r, &sig(), 4, 7);
        let omq = Omq::new(o, Schema::full(), q);
        prop_assert_eq!(evaluate_naive(&omq, &d).unwrap().answers, evaluate_fpt(&omq, &d, 2).unwrap().answers);
    }

    #[test]
    fn chase_grows_with_depth(seed in any::<u64>(), depth in 0usize..3) {
        let mut r = rng(seed);
        let o = random_ontology(&mut r, Dialect::EliBot, &sig(), 5, 2);
        let d = random_database(&mut r, &sig(), 4, 6);
        match (oblivious_chase(&d, &o, depth), oblivious_chase(&d, &o, depth + 1)) {
            (Ok(a), Ok(b)) => {
                let fixed: Vec<_> = d.domain().into_iter().collect();
                prop_assert!(database_homomorphism(&a.facts, &b.facts, &fixed).is_some());
            }
            (Err(_), deeper) => prop_assert!(deeper.is_err()),
            (Ok(_), Err(_)) => {}
        }
    }

    #[test]
    fn unraveling_projects_and_stays_narrow(seed in any::<u64>(), k in 1usize..=2) {
        let d = random_database(&mut rng(seed), &sig(), 4, 6);
        let u = k_unravel(&d, &[], k, 2).unwrap();
        prop_assert!(projection_is_homomorphism(&u, &d));
        prop_assert!(database_treewidth(&u.database).unwrap() <= k);
    }

    #[test]
    fn unraveling_preserves_consistency(seed in any::<u64>()) {
        let mut r = rng(seed);
        let o = random_ontology(&mut r, Dialect::EliBot, &sig(), 4, 2);
        let d = random_database(&mut r, &sig(), 4, 6);
        let u = k_unravel(&d, &[], 1, 3).unwrap();
        prop_assert_eq!(is_consistent(&d, &o).unwrap(), is_consistent(&u.database, &o).unwrap());
    }

    #[test]
    fn id_f_is_idempotent_and_a_contraction(seed in any::<u64>()) {
        let mut r = rng(seed);
        let o = random_dllite_f(&mut r, &sig(), 5);
        let funcs = split_ontology(&o).unwrap().functionalities;
        let q = random_cq(&mut r, &sig(), 5, 2, 0);
        let once = id_f_cq(&q, &funcs);
        prop_assert_eq!(id_f_cq(&once, &funcs), once.clone());
        prop_assert!(maps_into(&q, &once));
    }

    #[test]
    fn empty_database_is_consistent(seed in any::<u64>()) {
        let o = random_ontology(&mut rng(seed), Dialect::ElhdrBot, &sig(), 5, 2);
        prop_assert!(is_consistent(&Database::new(), &o).unwrap());
    }
}
