//! Certain answers of an ontology-mediated query with the three evaluators.

use omqlab::eval::{evaluate_fpt, evaluate_naive};
use omqlab::model::{Omq, Schema};
use omqlab::pebble::pebble_answers;
use omqlab::surface::{parse_database, parse_ontology, parse_query};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let o = parse_ontology("dialect: ELHdr_bot\nexists hasPart . Engine <= Vehicle\nCar <= exists hasPart . Engine\n")?;
    let q = parse_query("q(x) :- Vehicle(x)")?;
    let d = parse_database("Car(beetle)\nhasPart(t1,e1)\nEngine(e1)\nWheel(w1)\n")?;
    let omq = Omq::new(o, Schema::full(), q);

    let naive = evaluate_naive(&omq, &d)?;
    let fpt = evaluate_fpt(&omq, &d, 1)?;
    let pebble = pebble_answers(&omq, &d, 1)?;
    for (name, r) in [("naive", &naive), ("fpt", &fpt), ("pebble", &pebble)] {
        println!("{name:>6}: {:?}", r.answers);
    }
    assert_eq!(naive.answers, fpt.answers);
    assert_eq!(naive.answers, pebble.answers);
    Ok(())
}
