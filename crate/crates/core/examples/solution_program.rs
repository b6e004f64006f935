//! Solution programs: generate a peer's disjunctive program, print it, and
//! read solutions off the stable models computed by the built-in solver.

use pdes::asp::{emit_text, AspOptions, AspSolver, Disjunction};
use pdes::dec::ConjunctiveQuery;
use pdes::pdes::Pdes;

const SYSTEM: &str = "preorder null
peer P1 { R1/2 }
peer P2 { R2/2 }
trust P1 same P2
instance P1 { R1(a,null), R1(s,t) }
instance P2 { R2(c,d), R2(a,e) }
dec P1 P2 : R2(x,y) -> exists z: R1(x,z)
";

fn main() -> pdes::Result<()> {
    let pdes = Pdes::parse(SYSTEM)?;
    let asp = AspSolver::new(&pdes, AspOptions::default());
    let run = asp.run("P1", None)?;
    print!("{}", emit_text(run.program(), Disjunction::Bar));
    println!("ground size: {}", run.ground_size);
    for (i, d) in run.instances.iter().enumerate() {
        println!("model {i}: {d}");
    }
    let q = ConjunctiveQuery::parse("exists y: R1(x,y)")?;
    println!("peer consistent answers via models: {:?}", asp.pca("P1", &q)?.render());
    println!("direct semantics:                   {:?}", pdes.solver().pca("P1", &q)?.render());
    Ok(())
}
