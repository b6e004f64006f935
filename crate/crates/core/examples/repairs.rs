//! Repairs of a single inconsistent instance under the null-based preorder
//! and under symmetric-difference minimality.

use pdes::dec::Constraint;
use pdes::relational::atoms;
use pdes::repair::{delta_repairs, null_repairs};

fn show(label: &str, base: &str, sigma: &[&str]) -> pdes::Result<()> {
    let sigma = sigma.iter().map(|t| Constraint::parse(t)).collect::<pdes::Result<Vec<_>>>()?;
    let base = atoms(base);
    println!("{label}: {base}");
    for r in null_repairs(&base, &sigma)?.repairs {
        println!("  null-based repair: {r}");
    }
    for r in delta_repairs(&base, &sigma)?.repairs {
        println!("  Δ repair:          {r}");
    }
    Ok(())
}

fn main() -> pdes::Result<()> {
    show("referential", "R(a,b)", &["R(x,y) -> exists z: S(y,z)"])?;
    show("joined existential", "R(a)", &["R(x) -> exists y: T(x,y), S(y)"])?;
    show(
        "key and denial",
        "T(a,b), T(a,c), S(a,c)",
        &["T(x,y), T(x,z) -> y = z", "T(x,y), S(x,y) -> false"],
    )?;
    Ok(())
}
