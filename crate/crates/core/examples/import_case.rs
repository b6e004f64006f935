//! Import peers: the unique solution as the least model of a Datalog program,
//! and restricted import with local constraints.

use pdes::import::{classify, import_program, import_solve, least_model, restricted_import_solve};
use pdes::pdes::Pdes;

const SYSTEM: &str = "preorder null
peer P1 { R1/2 }
peer P2 { R2/2, S2/2 }
trust P1 less P2
instance P1 { R1(a,2) }
instance P2 { R2(d,5), S2(5,3) }
dec P1 P2 : R2(x,y), S2(y,z) -> R1(x,y)
";

const RESTRICTED: &str = "preorder null
peer P { P/2 }
peer Q { Q/2 }
trust P less Q
instance P { P(a,b), P(a,c) }
instance Q { Q(a,d) }
dec P Q : Q(x,y) -> P(x,y)
dec P P : P(x,y), P(x,z), P(x,v) -> y = z | z = v | v = y
";

fn main() -> pdes::Result<()> {
    let pdes = Pdes::parse(SYSTEM)?;
    println!("kind of P1: {:?}", classify(&pdes).kind("P1"));
    let dbar = pdes.solver().neighborhood_instance("P1")?;
    let program = import_program(&pdes, "P1", &dbar)?;
    println!("import program:\n{program}");
    let lm = least_model(&program);
    println!("least model after {} rounds: {}", lm.rounds, lm.model);
    println!("import solution: {}", import_solve(&pdes, "P1")?);

    let pdes = Pdes::parse(RESTRICTED)?;
    println!("\nkind of P: {:?}", classify(&pdes).kind("P"));
    for s in restricted_import_solve(&pdes, "P")?.solutions {
        println!("  solution: {s}");
    }
    Ok(())
}
