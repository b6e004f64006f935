//! Parser for constraints and conjunctive queries.
//!
//! ```text
//! [dec <From> <To> :] [forall <vars> :] <atom> {, <atom>} -> <disjunct> { (or | "|") <disjunct> }
//! disjunct := [exists <vars> :] <literal> {, <literal>}
//! literal  := Name(<term>,...) | t=t | t!=t | t<t | t<=t | t>t | t>=t | isnull(t) | isnotnull(t) | false
//! query    := [exists <vars> :] <literal> {, <literal>}
//! ```
//!
//! Identifiers in term position are variables; constants are integers or
//! quoted strings (`"a"`), plus the keyword `null` where it is allowed.

use std::collections::BTreeSet;

use super::{Atom, Builtin, CmpOp, Conjunct, ConjunctiveQuery, Constraint, Literal, Term, Var};
use crate::error::{Error, Result};
use crate::lexer::{Cursor, Tok};
use crate::relational::{name, Constant, Name};

/// Parse a single constraint, optionally prefixed by `dec P Q :`.
pub fn parse_constraint(text: &str) -> Result<Constraint> {
    let mut cur = Cursor::new(text)?;
    let c = ConstraintParser::constraint(&mut cur)?;
    if !cur.at_eof() {
        return Err(cur.error("trailing input after constraint"));
    }
    Ok(c)
}

/// Parse a conjunctive query, optionally prefixed by `query P :`.
pub fn parse_query(text: &str) -> Result<ConjunctiveQuery> {
    parse_query_for(text).map(|(_, q)| q)
}

/// Parse a conjunctive query and return the peer named by a `query P :` prefix, if any.
pub fn parse_query_for(text: &str) -> Result<(Option<Name>, ConjunctiveQuery)> {
    let mut cur = Cursor::new(text)?;
    let peer = if cur.eat_kw("query") {
        let p = cur.ident()?;
        cur.expect(Tok::Colon)?;
        Some(name(&p))
    } else {
        None
    };
    let q = ConstraintParser::query(&mut cur)?;
    if !cur.at_eof() {
        return Err(cur.error("trailing input after query"));
    }
    Ok((peer, q))
}

/// Token-level parsing routines, reused by the definition-file parser.
pub struct ConstraintParser;

impl ConstraintParser {
    fn var_list(cur: &mut Cursor) -> Result<Vec<Var>> {
        let mut vars = vec![name(&cur.ident()?)];
        while cur.eat(&Tok::Comma) {
            vars.push(name(&cur.ident()?));
        }
        cur.expect(Tok::Colon)?;
        Ok(vars)
    }

    fn term(cur: &mut Cursor) -> Result<Term> {
        match cur.next() {
            Tok::Ident(s) if s == "null" => Ok(Term::Const(Constant::Null)),
            Tok::Ident(s) => Ok(Term::Var(name(&s))),
            Tok::Number(s) | Tok::Str(s) => Ok(Term::Const(Constant::new(&s))),
            other => Err(cur.error(format!("expected a term, found {other:?}"))),
        }
    }

    fn cmp_op(tok: &Tok) -> Option<CmpOp> {
        Some(match tok {
            Tok::Eq => CmpOp::Eq,
            Tok::Neq => CmpOp::Neq,
            Tok::Lt => CmpOp::Lt,
            Tok::Leq => CmpOp::Leq,
            Tok::Gt => CmpOp::Gt,
            Tok::Geq => CmpOp::Geq,
            _ => return None,
        })
    }

    fn atom_args(cur: &mut Cursor) -> Result<Vec<Term>> {
        let mut terms = Vec::new();
        if cur.eat(&Tok::LParen) {
            if !cur.eat(&Tok::RParen) {
                terms.push(Self::term(cur)?);
                while cur.eat(&Tok::Comma) {
                    terms.push(Self::term(cur)?);
                }
                cur.expect(Tok::RParen)?;
            }
        }
        Ok(terms)
    }

    /// Parse one literal (database atom or builtin).
    pub fn literal(cur: &mut Cursor) -> Result<Literal> {
        if let Tok::Ident(id) = cur.peek().clone() {
            let next = cur.peek_at(1).clone();
            if Self::cmp_op(&next).is_none() {
                match id.as_str() {
                    "false" => {
                        cur.next();
                        return Ok(Literal::Builtin(Builtin::False));
                    }
                    "isnull" | "isnotnull" => {
                        cur.next();
                        cur.expect(Tok::LParen)?;
                        let t = Self::term(cur)?;
                        cur.expect(Tok::RParen)?;
                        let b = if id == "isnull" { Builtin::IsNull(t) } else { Builtin::IsNotNull(t) };
                        return Ok(Literal::Builtin(b));
                    }
                    "null" => {}
                    _ => {
                        cur.next();
                        let terms = Self::atom_args(cur)?;
                        return Ok(Literal::Atom(Atom { pred: name(&id), terms }));
                    }
                }
            }
        }
        let a = Self::term(cur)?;
        let op = Self::cmp_op(cur.peek()).ok_or_else(|| cur.error("expected a comparison operator"))?;
        cur.next();
        let b = Self::term(cur)?;
        Ok(Literal::Builtin(Builtin::Cmp(op, a, b)))
    }

    fn literal_list(cur: &mut Cursor) -> Result<Vec<Literal>> {
        let mut lits = vec![Self::literal(cur)?];
        while cur.eat(&Tok::Comma) {
            lits.push(Self::literal(cur)?);
        }
        Ok(lits)
    }

    /// Parse a constraint at the cursor (no trailing-input check).
    pub fn constraint(cur: &mut Cursor) -> Result<Constraint> {
        let (line, col) = (cur.spanned().line, cur.spanned().col);
        let owner = if cur.eat_kw("dec") {
            let p = cur.ident()?;
            let q = cur.ident()?;
            cur.expect(Tok::Colon)?;
            Some((name(&p), name(&q)))
        } else {
            None
        };
        let mut forall = if cur.eat_kw("forall") { Self::var_list(cur)? } else { Vec::new() };
        let mut body = Vec::new();
        for lit in Self::literal_list(cur)? {
            match lit {
                Literal::Atom(a) => body.push(a),
                Literal::Builtin(b) => {
                    return Err(Error::parse(line, col, format!("builtin {b} is not allowed in the antecedent; move its negation to the consequent")))
                }
            }
        }
        cur.expect(Tok::Arrow)?;
        let mut head = Vec::new();
        loop {
            let exists = if cur.eat_kw("exists") { Self::var_list(cur)? } else { Vec::new() };
            let literals = Self::literal_list(cur)?;
            head.push(Conjunct { exists, literals });
            if !(cur.eat_kw("or") || cur.eat(&Tok::Bar)) {
                break;
            }
        }
        // Implicit universals: undeclared antecedent variables.
        for a in &body {
            for v in a.vars() {
                if !forall.contains(v) {
                    forall.push(v.clone());
                }
            }
        }
        let c = Constraint { owner, forall, body, head };
        validate_constraint(&c).map_err(|e| match e {
            Error::Safety(m) => Error::Safety(format!("{m} (constraint starting at {line}:{col})")),
            other => other,
        })?;
        Ok(c)
    }

    /// Parse a query at the cursor (no trailing-input check).
    pub fn query(cur: &mut Cursor) -> Result<ConjunctiveQuery> {
        let exists = if cur.eat_kw("exists") { Self::var_list(cur)? } else { Vec::new() };
        let literals = Self::literal_list(cur)?;
        let mut free = Vec::new();
        for l in &literals {
            for v in l.vars() {
                if !exists.contains(v) && !free.contains(v) {
                    free.push(v.clone());
                }
            }
        }
        let q = ConjunctiveQuery { free, exists, literals };
        validate_query(&q)?;
        Ok(q)
    }
}

fn has_explicit_null(terms: &[&Term]) -> bool {
    terms.iter().any(|t| t.is_null_const())
}

/// Check the safety and shape conditions of a constraint.
pub(crate) fn validate_constraint(c: &Constraint) -> Result<()> {
    if c.body.is_empty() {
        return Err(Error::Safety("a constraint needs at least one antecedent atom".into()));
    }
    if c.head.is_empty() {
        return Err(Error::Safety("a constraint needs at least one consequent disjunct".into()));
    }
    let mut seen = BTreeSet::new();
    for v in &c.forall {
        if !seen.insert(v.clone()) {
            return Err(Error::Safety(format!("variable {v} quantified twice")));
        }
    }
    for a in &c.body {
        if has_explicit_null(&a.terms.iter().collect::<Vec<_>>()) {
            return Err(Error::Safety("explicit null is not allowed in constraints".into()));
        }
    }
    let existential = c.head.iter().filter(|d| !d.exists.is_empty()).count();
    if existential > 1 {
        return Err(Error::Safety("at most one existential disjunct is supported".into()));
    }
    if existential == 1 && c.head.iter().any(|d| d.exists.is_empty() && !d.is_builtin_only()) {
        return Err(Error::Safety(
            "an existential consequent may only be combined with builtin disjuncts".into(),
        ));
    }
    for d in &c.head {
        for w in &d.exists {
            if !seen.insert(w.clone()) {
                return Err(Error::Safety(format!("variable {w} quantified twice")));
            }
        }
        for l in &d.literals {
            let terms: Vec<&Term> = match l {
                Literal::Atom(a) => a.terms.iter().collect(),
                Literal::Builtin(b) => b.terms(),
            };
            if has_explicit_null(&terms) {
                return Err(Error::Safety("explicit null is not allowed in constraints".into()));
            }
            for v in terms.into_iter().filter_map(Term::as_var) {
                if !c.forall.contains(v) && !d.exists.contains(v) {
                    return Err(Error::Safety(format!("variable {v} in the consequent is not quantified")));
                }
            }
        }
        for w in &d.exists {
            if !d.atoms().any(|a| a.vars().any(|v| v == w)) {
                return Err(Error::Safety(format!("existential variable {w} does not occur in a database atom")));
            }
        }
    }
    Ok(())
}

fn validate_query(q: &ConjunctiveQuery) -> Result<()> {
    let mut seen = BTreeSet::new();
    for v in &q.exists {
        if !seen.insert(v.clone()) {
            return Err(Error::Safety(format!("variable {v} quantified twice")));
        }
    }
    let in_atoms: BTreeSet<&Var> = q.atoms().flat_map(|a| a.vars()).collect();
    for l in &q.literals {
        if let Literal::Builtin(b) = l {
            for v in b.terms().into_iter().filter_map(Term::as_var) {
                if q.exists.contains(v) && !in_atoms.contains(v) {
                    return Err(Error::Safety(format!(
                        "existential variable {v} occurs only in builtins"
                    )));
                }
            }
        }
    }
    for v in &q.exists {
        if !in_atoms.contains(v) {
            return Err(Error::Safety(format!("existential variable {v} does not occur in a database atom")));
        }
    }
    Ok(())
}
