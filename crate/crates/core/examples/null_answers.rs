//! Null-aware query answering: a null in a join or comparison position never
//! matches, while a null in a position the query only passes through can be
//! returned. The rewritten query computes the same answers classically.

use pdes::dec::{n_rewrite_query, ConjunctiveQuery};
use pdes::nullquery::{classical_answers, n_answers};
use pdes::relational::atoms;

fn main() -> pdes::Result<()> {
    let d = atoms("R(a,b), R(c,d), R(e,null), S(b,f), S(d,g), S(null,j)");
    let q = ConjunctiveQuery::parse("exists y: R(x,y), S(y,z)")?;
    println!("instance: {d}");
    println!("query:    {q}");
    println!("null-aware answers: {:?}", n_answers(&d, &q).render());
    println!("classical answers:  {:?}", classical_answers(&d, &q).render());

    let rewritten = n_rewrite_query(&q);
    println!("rewritten query:    {rewritten}");
    println!("classical answers of the rewriting: {:?}", classical_answers(&d, &rewritten).render());

    let d = atoms("P(f,7), P(f,5), P(null,8), P(b,null)");
    let q = ConjunctiveQuery::parse("exists y: P(x,y), y > 5")?;
    println!("\ninstance: {d}");
    println!("query:    {q}");
    println!("null-aware answers: {:?}", n_answers(&d, &q).render());
    Ok(())
}
