//! Oblivious chase and canonical model of a small database.

use omqlab::chase::{canonical_model, oblivious_chase};
use omqlab::entailment::is_consistent;
use omqlab::surface::{parse_database, parse_ontology, serialize_database};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let o = parse_ontology("dialect: ELI_bot\nPerson <= exists parent . Person\nexists inv(parent) . top <= Parent\n")?;
    let d = parse_database("Person(ada)")?;

    let chase = oblivious_chase(&d, &o, 2)?;
    println!("oblivious chase, depth 2:\n{}", serialize_database(&chase.facts));

    let model = canonical_model(&d, &o, 2)?;
    println!("canonical model, 2 rounds: {} facts", model.facts.facts.len());

    let clash = parse_ontology("dialect: ELI_bot\nPerson & Parent <= bot\nPerson <= exists parent . Person\nexists inv(parent) . top <= Parent\n")?;
    println!("consistent with the clash axiom: {}", is_consistent(&d, &clash)?);
    Ok(())
}
