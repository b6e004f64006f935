//! Constraint syntax, null-aware satisfaction, constraint rewriting and the
//! ref-acyclicity test.

use pdes::dec::{n_rewrite_constraint, ref_acyclic, Constraint};
use pdes::nullquery::{classical_holds, n_holds};
use pdes::relational::atoms;

fn main() -> pdes::Result<()> {
    let fd = Constraint::parse("R(x,y,z1), R(x,y,z2) -> z1 = z2")?;
    println!("key constraint:      {fd}");
    println!("rewritten:           {}", n_rewrite_constraint(&fd));

    let ric = Constraint::parse("P(x,y,z) -> exists v: R(x,y,v)")?;
    let d = atoms("P(a,5,d), P(b,null,a), R(a,5,3), R(a,3,7)");
    println!("\nreferential:         {ric}");
    println!("instance:            {d}");
    println!("holds (null-aware):  {}", n_holds(&d, &ric));
    println!("holds (classical):   {}", classical_holds(&d, &ric));

    let acyclic = [Constraint::parse("S(x) -> Q(x)")?, Constraint::parse("Q(x) -> exists y: T(x,y)")?];
    let cyclic = [Constraint::parse("S(x) -> exists y: Q(x,y)")?, Constraint::parse("Q(x,y) -> S(y)")?];
    println!("\nref-acyclic: {:?}", ref_acyclic(&acyclic));
    println!("ref-cyclic:  {:?}", ref_acyclic(&cyclic));

    match Constraint::parse("R(x) -> exists y: S(y) | exists z: T(z)") {
        Ok(c) => println!("\naccepted {c}"),
        Err(e) => println!("\nrejected: {e}"),
    }
    Ok(())
}
