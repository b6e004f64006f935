//! The restricted chase: universal and simple referential constraints are
//! applied with null for existential variables; rules never fire on null in
//! a relevant position, and constraints whose existentials join are left out.

use pdes::chase::{r_chase_rounds, split_sigma};
use pdes::dec::Constraint;
use pdes::relational::atoms;

fn main() -> pdes::Result<()> {
    let sigma = [
        "T(x,y) -> R(x,y)",
        "R(x,y), S(y,z) -> Q(x,y,z) | T(x,z)",
        "forall x,y: R(x,y) -> exists z: Q(x,y,z), x != y",
        "forall x,y,z: Q(x,y,z) -> exists w: R(x,z), S(x,w)",
        "R(x) -> exists y: T(x,y), S(y)",
    ]
    .iter()
    .map(|t| Constraint::parse(t))
    .collect::<pdes::Result<Vec<_>>>()?;
    let split = split_sigma(&sigma);
    println!("universal:   {}", split.sigma1.len());
    println!("referential: {}", split.sigma2_minus.len());
    for c in &split.excluded {
        println!("excluded:    {c}");
    }
    for d in ["T(a,null)", "T(a,b)", "R(a,a)", "R(a,b), S(b,c)"] {
        let out = r_chase_rounds(&atoms(d), &split);
        println!("chase({d}) = {} after {} rounds", out.instance, out.rounds);
    }
    Ok(())
}
