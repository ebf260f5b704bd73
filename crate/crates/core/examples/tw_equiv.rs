//! Deciding equivalence to an OMQ of bounded treewidth, with and without a schema.

use omqlab::model::{Omq, Schema};
use omqlab::surface::{parse_ontology, parse_query, parse_schema, serialize_database};
use omqlab::treelike::{decide_tw_equiv_full, decide_tw_equiv_general, TwEquivVerdict};

const SQUARE: &str = "q() :- r(x2,x1), r(x4,x1), r(x2,x3), r(x4,x3), A1(x1), A2(x2), A3(x3), A4(x4)";

fn report(name: &str, v: &TwEquivVerdict) {
    match v {
        TwEquivVerdict::Yes(w) => println!("{name}: YES, witness {}", w.query.disjuncts[0]),
        TwEquivVerdict::No(Some(c)) => println!("{name}: NO, counterexample\n{}", serialize_database(&c.database)),
        TwEquivVerdict::No(None) => println!("{name}: NO"),
        TwEquivVerdict::Unknown(why) => println!("{name}: UNKNOWN ({why})"),
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let q = parse_query(SQUARE)?;
    let yes = parse_ontology("dialect: ELHdr_bot\nA2 <= A4\n")?;
    report("A2 <= A4", &decide_tw_equiv_full(&Omq::new(yes, Schema::full(), q.clone()), 1)?);

    let no = parse_ontology("dialect: ELHdr_bot\nB1 <= A1\nB2 <= A1\nexists r . B1 <= A4\nB2 <= A3\n")?;
    report("full schema", &decide_tw_equiv_general(&Omq::new(no.clone(), Schema::full(), q.clone()), 1, 6)?);

    let schema = parse_schema("A2\nA3\nA4\nB1\nB2\nr\n")?;
    report("schema without A1", &decide_tw_equiv_general(&Omq::new(no, schema, q), 1, 6)?);
    Ok(())
}
