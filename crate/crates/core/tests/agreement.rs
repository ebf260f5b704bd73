use omqlab::eval::{evaluate_fpt, evaluate_naive};
use omqlab::gen::{random_database, random_ontology, random_ucq, Signature};
use omqlab::model::{Dialect, Omq, Schema};
use omqlab::pebble::pebble_answers;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn naive_fpt_and_pebble_agree_on_random_triples() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let sig = Signature::new(3, 2);
    let mut interesting = 0;
    let mut via_ontology = 0;
    for i in 0..2000 {
        let k = rng.gen_range(1..=2);
        let o = random_ontology(&mut rng, Dialect::ElhdrBot, &sig, 6, 2);
        let arity = rng.gen_range(0..=1);
        let q = random_ucq(&mut rng, &sig, 5, k, arity, 2);
        let d = random_database(&mut rng, &sig, 6, 12);
        let omq = Omq::new(o, Schema::full(), q);
        let naive = evaluate_naive(&omq, &d).unwrap();
        let fpt = evaluate_fpt(&omq, &d, k).unwrap();
        let pebble = pebble_answers(&omq, &d, k).unwrap();
        if naive.consistent && !naive.answers.is_empty() && naive.answers.len() < d.domain().len().pow(arity as u32) {
            interesting += 1;
        }
        if naive.consistent && naive.answers != omqlab::homtools::all_answers(&omq.query, &d) {
            via_ontology += 1;
        }
        assert_eq!(naive.answers, fpt.answers, "fpt #{i}\n{}\n{}\n{}", format!("{:?}", omq.ontology.axioms), omq.query, d);
        assert_eq!(naive.answers, pebble.answers, "pebble #{i}\n{:?}\n{}\n{}", omq.ontology.axioms, omq.query, d);
    }
    eprintln!("interesting: {interesting}, via ontology: {via_ontology}");
}
