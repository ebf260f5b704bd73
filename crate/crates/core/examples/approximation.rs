//! UCQ_k-approximation, its soundness, and the rewriting through maximum contractions.

use omqlab::model::{Omq, Schema};
use omqlab::surface::{parse_ontology, parse_query};
use omqlab::treelike::{contains_full_schema, equivalent_full_schema, maximum_contractions, rewriting, ucq_k_approximation};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let o = parse_ontology("dialect: ELHdr_bot\nB1 <= A1\nB2 <= A1\nexists r . B1 <= A4\nB2 <= A3\n")?;
    let q = parse_query("q() :- r(x2,x1), r(x4,x1), r(x2,x3), r(x4,x3), A1(x1), A2(x2), A3(x3), A4(x4)")?;
    let omq = Omq::new(o, Schema::full(), q);

    let approx = ucq_k_approximation(&omq, 1)?;
    println!("UCQ_1-approximation has {} disjuncts", approx.query.disjuncts.len());
    println!("contained in the original: {}", contains_full_schema(&approx, &omq)?);
    println!("equivalent to the original: {}", equivalent_full_schema(&approx, &omq)?);

    for m in maximum_contractions(&omq)? {
        println!("maximum contraction: {}", m.query.disjuncts[0]);
    }
    println!("rewriting: {}", rewriting(&omq)?.query.disjuncts[0]);
    Ok(())
}
