//! k-unravelings: bounded-treewidth covers of a database that preserve answers.

use omqlab::graphalg::{database_treewidth, k_unravel, projection_is_homomorphism, unravel1_at};
use omqlab::model::Name;
use omqlab::surface::{parse_database, serialize_database};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let d = parse_database("r(a,b)\nr(b,c)\nr(c,a)\nA(a)\n")?;

    let u = unravel1_at(&d, &Name::from("a"), 3)?;
    println!("1-unraveling at a, depth 3:\n{}", serialize_database(&u.database));

    let u2 = k_unravel(&d, &[], 1, 3)?;
    println!("{} bags, treewidth {}", u2.bags.len(), database_treewidth(&u2.database)?);
    println!("projection is a homomorphism: {}", projection_is_homomorphism(&u2, &d));
    Ok(())
}
