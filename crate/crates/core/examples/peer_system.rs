//! A peer system built programmatically, evaluated from neighborhood
//! solutions up to peer consistent answers. A second system shows a peer
//! whose trust relationships cannot be reconciled.

use pdes::dec::ConjunctiveQuery;
use pdes::pdes::{Pdes, PdesBuilder, Trust};
use pdes::relational::atoms;

fn main() -> pdes::Result<()> {
    let mut b = PdesBuilder::new();
    b.peer("P1", &[("R1", 3)])
        .peer("P2", &[("R2", 2), ("S2", 2)])
        .trust("P1", Trust::Less, "P2")
        .facts("P1", &atoms("R1(a,2,5), R1(c,4,2), R1(f,3,5)"))
        .facts("P2", &atoms("R2(c,4), R2(d,5), S2(4,2), S2(5,3)"));
    b.dec("P1", "P2", "R2(x,y), S2(y,z) -> R1(x,y,z)")?;
    b.dec("P1", "P2", "R1(x,y,z), R2(x,w) -> y = w")?;
    let pdes = b.build()?;
    let solver = pdes.solver();
    println!("accessible from P1: {:?}", pdes.schema.accessible("P1")?);
    let dbar = solver.neighborhood_instance("P1")?;
    println!("neighborhood instance: {dbar}");
    for ns in solver.neighborhood_solutions("P1", &dbar)? {
        println!("  neighborhood solution: {ns}");
    }
    let r = solver.solutions("P1")?;
    for s in &r.solutions {
        println!("  solution: {s}");
    }
    println!("core: {}", r.core);
    let q = ConjunctiveQuery::parse("exists y,z: R1(x,y,z)")?;
    println!("peer consistent answers to {q}: {:?}", solver.pca("P1", &q)?.render());

    let conflict = Pdes::parse(
        "preorder null\npeer P { P/2 }\npeer Q { Q/2 }\npeer C { C/2 }\n\
         trust P less Q\ntrust P less C\ninstance Q { Q(a,b) }\n\
         dec P Q : Q(x,y) -> P(x,y)\ndec P C : P(x,y) -> C(x,y)\n",
    )?;
    let q = ConjunctiveQuery::parse("P(x,y)")?;
    println!("\nconflicting trust, answers: {:?}", conflict.solver().pca("P", &q)?.render());
    Ok(())
}
