//! Parser for system definition files.
//!
//! ```text
//! preorder null | delta
//! peer P1 { R1/3, S1/1 }
//! trust P1 less P2            # or: trust P1 same P2
//! instance P1 { R1(c,4,2), S1(3) }
//! dec P1 P2 : forall x,y: R2(x,y) -> exists z: R1(x,y,z)
//! query P1 : exists y: R1(x,y,z)
//! ```
//!
//! Statements may be separated by newlines, `;` or `.`. Inside instance
//! blocks bare identifiers are constants and `null` is the null value; inside
//! constraints and queries identifiers are variables.

use crate::dec::ConstraintParser;
use crate::error::Result;
use crate::lexer::{Cursor, Tok};
use crate::pdes::{Pdes, PdesBuilder, Trust};
use crate::relational::{name, Constant, GroundAtom, Instance};
use crate::repair::PreorderKind;

fn ground_term(cur: &mut Cursor) -> Result<Constant> {
    match cur.next() {
        Tok::Ident(s) | Tok::Number(s) | Tok::Str(s) => Ok(Constant::new(&s)),
        other => Err(cur.error(format!("expected a constant, found {other:?}"))),
    }
}

fn ground_atom(cur: &mut Cursor) -> Result<GroundAtom> {
    let pred = cur.ident()?;
    let mut args = Vec::new();
    if cur.eat(&Tok::LParen) && !cur.eat(&Tok::RParen) {
        args.push(ground_term(cur)?);
        while cur.eat(&Tok::Comma) {
            args.push(ground_term(cur)?);
        }
        cur.expect(Tok::RParen)?;
    }
    Ok(GroundAtom::from_parts(name(&pred), args))
}

/// Parse ground atoms separated by commas or whitespace, up to `stop` or end of input.
fn atom_sequence(cur: &mut Cursor, stop: &Tok) -> Result<Instance> {
    let mut out = Instance::new();
    loop {
        while cur.eat(&Tok::Comma) {}
        if cur.peek() == stop || cur.at_eof() {
            return Ok(out);
        }
        out.insert(ground_atom(cur)?);
    }
}

/// Parse a list of ground atoms such as `R(a,2), S(null)`.
pub fn parse_atom_list(text: &str) -> Result<Instance> {
    let mut cur = Cursor::new(text)?;
    let d = atom_sequence(&mut cur, &Tok::Eof)?;
    if !cur.at_eof() {
        return Err(cur.error("trailing input after atom list"));
    }
    Ok(d)
}

fn separators(cur: &mut Cursor) {
    while cur.eat(&Tok::Semi) || cur.eat(&Tok::Dot) {}
}

/// Parse a definition file into a validated system.
pub fn parse_definition(text: &str) -> Result<Pdes> {
    let mut cur = Cursor::new(text)?;
    let mut b = PdesBuilder::new();
    separators(&mut cur);
    while !cur.at_eof() {
        let kw = cur.ident()?;
        match kw.as_str() {
            "preorder" => {
                let k = cur.ident()?;
                let kind = match k.as_str() {
                    "null" => PreorderKind::NullBased,
                    "delta" => PreorderKind::SymmetricDelta,
                    _ => return Err(cur.error(format!("unknown preorder {k}; expected null or delta"))),
                };
                b.preorder(kind);
            }
            "peer" => {
                let p = cur.ident()?;
                cur.expect(Tok::LBrace)?;
                let mut preds = Vec::new();
                while !cur.eat(&Tok::RBrace) {
                    let r = cur.ident()?;
                    cur.expect(Tok::Slash)?;
                    let arity = match cur.next() {
                        Tok::Number(n) => n.parse::<usize>().map_err(|_| cur.error("arity must be a natural number"))?,
                        other => return Err(cur.error(format!("expected an arity, found {other:?}"))),
                    };
                    preds.push((r, arity));
                    if !cur.eat(&Tok::Comma) {
                        cur.expect(Tok::RBrace)?;
                        break;
                    }
                }
                let refs: Vec<(&str, usize)> = preds.iter().map(|(r, a)| (r.as_str(), *a)).collect();
                b.peer(&p, &refs);
            }
            "trust" => {
                let p = cur.ident()?;
                let t = match cur.ident()?.as_str() {
                    "less" => Trust::Less,
                    "same" => Trust::Same,
                    other => return Err(cur.error(format!("unknown trust {other}; expected less or same"))),
                };
                let q = cur.ident()?;
                b.trust(&p, t, &q);
            }
            "instance" => {
                let p = cur.ident()?;
                cur.expect(Tok::LBrace)?;
                let d = atom_sequence(&mut cur, &Tok::RBrace)?;
                cur.expect(Tok::RBrace)?;
                b.facts(&p, &d);
            }
            "dec" => {
                let p = cur.ident()?;
                let q = cur.ident()?;
                cur.expect(Tok::Colon)?;
                let mut c = ConstraintParser::constraint(&mut cur)?;
                c.owner = Some((name(&p), name(&q)));
                b.constraint(c);
            }
            "query" => {
                let p = cur.ident()?;
                cur.expect(Tok::Colon)?;
                let q = ConstraintParser::query(&mut cur)?;
                b.query(&p, q);
            }
            other => {
                return Err(cur.error(format!(
                    "unknown statement {other}; expected preorder, peer, trust, instance, dec or query"
                )))
            }
        }
        separators(&mut cur);
    }
    b.build()
}
