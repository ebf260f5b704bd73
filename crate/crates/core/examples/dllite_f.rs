//! DL-Lite with functional roles: the rewriting into Boolean CQs and the treewidth-1 test.

use omqlab::dllitef::{decide_ubcq1_equiv, id_f_cq, rew, split_ontology};
use omqlab::model::{Omq, Schema};
use omqlab::surface::{parse_ontology, parse_query};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let o = parse_ontology("dialect: DL-Lite-F\nA <= exists r . top\nexists inv(r) . top <= B\nfunc r\n")?;
    let split = split_ontology(&o)?;
    println!("functional roles: {:?}", split.functionalities);

    let q = parse_query("q() :- r(x,y), B(y)")?;
    let omq = Omq::new(o.clone(), Schema::full(), q);
    let r = rew(&omq)?;
    println!("rewriting with {} disjuncts:", r.disjuncts.len());
    for p in &r.disjuncts {
        println!("  {p}");
    }

    // Functionality merges the two r-successors of x, closing the diamond into a path.
    let diamond = parse_query("q() :- r(x,y), r(x,z), s(y,w), s(z,w)")?;
    println!("id_F: {}", id_f_cq(&diamond.disjuncts[0], &split.functionalities));
    let v = decide_ubcq1_equiv(&Omq::new(o, Schema::full(), diamond))?;
    println!("equivalent to a union of treewidth-1 BCQs: {}", v.label());
    Ok(())
}
