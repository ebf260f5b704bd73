//! Containment and subsumption under ontologies.

use omqlab::entailment::subsumes;
use omqlab::model::{Omq, Schema};
use omqlab::surface::{parse_concept, parse_ontology, parse_query};
use omqlab::treelike::contains_full_schema;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let o = parse_ontology("dialect: ELI_bot\nStudent <= exists enrolled . Course\nexists inv(enrolled) . top <= Course\n")?;
    let c = parse_concept("Student")?;
    let d = parse_concept("exists enrolled . Course")?;
    println!("Student <= exists enrolled . Course: {}", subsumes(&o, &c, &d)?);

    let q1 = Omq::new(o.clone(), Schema::full(), parse_query("q(x) :- Student(x)")?);
    let q2 = Omq::new(o, Schema::full(), parse_query("q(x) :- enrolled(x,y)")?);
    println!("students are contained in enrolled: {}", contains_full_schema(&q1, &q2)?);
    println!("and conversely: {}", contains_full_schema(&q2, &q1)?);
    Ok(())
}
