//! Treewidth, cores and contractions of conjunctive queries.

use omqlab::graphalg::cq_treewidth;
use omqlab::homtools::{contractions, core};
use omqlab::surface::parse_query;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let square = parse_query("q() :- r(x2,x1), r(x4,x1), r(x2,x3), r(x4,x3), A1(x1), A2(x2), A3(x3), A4(x4)")?;
    let folded = parse_query("q() :- r(x,y), r(x,z), r(w,y), A(y), A(z)")?;
    for q in [&square, &folded] {
        let p = &q.disjuncts[0];
        println!("{p}");
        println!("  treewidth {}, core {}", cq_treewidth(p)?, core(p));
    }
    let p = &square.disjuncts[0];
    let narrow = contractions(p).into_iter().filter(|(c, _)| cq_treewidth(c).map_or(false, |w| w <= 1)).count();
    println!("contractions of the square with treewidth 1: {narrow}");
    Ok(())
}
