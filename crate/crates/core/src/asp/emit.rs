//! Text form of logic programs in the common disjunctive answer-set syntax,
//! and a parser for the same form.
//!
//! Predicate names are lowercased and nickname atoms are written
//! `r_ann(args, ann)`. Variables are uppercased. Constants stay bare when
//! they are integers or start with a lowercase letter; other constants are
//! quoted. Facts come first, then the rules in generation order.

use std::collections::BTreeMap;

use super::program::{Annotation, BodyLit, LogicProgram, PAtom, Rule, RuleKind, DOM};
use crate::dec::{Builtin, CmpOp, Term};
use crate::error::{Error, Result};
use crate::lexer::{Cursor, Tok};
use crate::relational::{name, Constant};

/// Disjunction symbol of rule heads.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Disjunction {
    /// `a | b`
    #[default]
    Bar,
    /// `a v b`
    V,
}

impl Disjunction {
    fn symbol(self) -> &'static str {
        match self {
            Disjunction::Bar => " | ",
            Disjunction::V => " v ",
        }
    }
}

const ANN_SUFFIX: &str = "_ann";

fn constant_text(c: &Constant) -> String {
    let t = c.token();
    if c.is_null() {
        return "null".into();
    }
    let digits = t.strip_prefix('-').unwrap_or(t);
    if !digits.is_empty() && digits.chars().all(|ch| ch.is_ascii_digit()) {
        return t.to_string();
    }
    let mut chars = t.chars();
    let bare = matches!(chars.next(), Some(ch) if ch.is_ascii_lowercase())
        && chars.all(|ch| ch.is_ascii_alphanumeric() || ch == '_')
        && !matches!(t, "not" | "v" | "null");
    if bare {
        t.to_string()
    } else if t.contains('"') {
        format!("'{t}'")
    } else {
        format!("\"{t}\"")
    }
}

/// Uppercased variable names of one rule, made distinct when two names collide.
fn variable_names(rule: &Rule) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    let mut used: BTreeMap<String, usize> = BTreeMap::new();
    for v in rule.vars() {
        let mut up = v.to_uppercase();
        if !up.starts_with(|c: char| c.is_ascii_uppercase() || c == '_') {
            up = format!("V{up}");
        }
        let n = used.entry(up.clone()).or_insert(0);
        *n += 1;
        let text = if *n == 1 { up } else { format!("{up}_{n}") };
        out.insert(v.to_string(), text);
    }
    out
}

fn term_text(t: &Term, vars: &BTreeMap<String, String>) -> String {
    match t {
        Term::Var(v) => vars.get(v.as_ref()).cloned().unwrap_or_else(|| v.to_uppercase()),
        Term::Const(c) => constant_text(c),
    }
}

fn atom_text(a: &PAtom, vars: &BTreeMap<String, String>) -> String {
    let mut args: Vec<String> = a.terms.iter().map(|t| term_text(t, vars)).collect();
    let mut pred = a.pred.to_lowercase();
    if let Some(ann) = a.ann {
        pred.push_str(ANN_SUFFIX);
        args.push(ann.token().into());
    }
    if args.is_empty() {
        pred
    } else {
        format!("{pred}({})", args.join(","))
    }
}

fn builtin_text(b: &Builtin, vars: &BTreeMap<String, String>) -> String {
    match b {
        Builtin::Cmp(op, x, y) => format!("{} {} {}", term_text(x, vars), op.symbol(), term_text(y, vars)),
        Builtin::IsNull(t) => format!("{} = null", term_text(t, vars)),
        Builtin::IsNotNull(t) => format!("{} != null", term_text(t, vars)),
        Builtin::False => "0 != 0".into(),
    }
}

/// Text of one rule.
pub fn rule_text(rule: &Rule, disj: Disjunction) -> String {
    let vars = variable_names(rule);
    let head: Vec<String> = rule.head.iter().map(|a| atom_text(a, &vars)).collect();
    let body: Vec<String> = rule
        .body
        .iter()
        .map(|l| match l {
            BodyLit::Pos(a) => atom_text(a, &vars),
            BodyLit::Neg(a) => format!("not {}", atom_text(a, &vars)),
            BodyLit::Builtin(b) => builtin_text(b, &vars),
        })
        .collect();
    match (head.is_empty(), body.is_empty()) {
        (_, true) => format!("{}.", head.join(disj.symbol())),
        (true, false) => format!(":- {}.", body.join(", ")),
        (false, false) => format!("{} :- {}.", head.join(disj.symbol()), body.join(", ")),
    }
}

/// Deterministic text of a program, one fact or rule per line.
pub fn emit_text(prog: &LogicProgram, disj: Disjunction) -> String {
    let none = BTreeMap::new();
    let mut out = String::new();
    for f in &prog.facts {
        out.push_str(&atom_text(f, &none));
        out.push_str(".\n");
    }
    for r in &prog.rules {
        out.push_str(&rule_text(r, disj));
        out.push('\n');
    }
    out
}

fn parse_term(cur: &mut Cursor) -> Result<Term> {
    match cur.next() {
        Tok::Ident(s) if s.starts_with(|c: char| c.is_uppercase() || c == '_') => Ok(Term::Var(name(&s))),
        Tok::Ident(s) | Tok::Number(s) | Tok::Str(s) => Ok(Term::Const(Constant::new(&s))),
        other => Err(cur.error(format!("expected a term, found {other:?}"))),
    }
}

fn parse_atom(cur: &mut Cursor) -> Result<PAtom> {
    let pred = cur.ident()?;
    let mut terms = Vec::new();
    if cur.eat(&Tok::LParen) {
        terms.push(parse_term(cur)?);
        while cur.eat(&Tok::Comma) {
            terms.push(parse_term(cur)?);
        }
        cur.expect(Tok::RParen)?;
    }
    if let Some(base) = pred.strip_suffix(ANN_SUFFIX) {
        if let Some(Term::Const(c)) = terms.last() {
            if let Some(ann) = Annotation::from_token(c.token()) {
                terms.pop();
                return Ok(PAtom::annotated(&name(base), terms, ann));
            }
        }
    }
    Ok(PAtom::plain(&name(&pred), terms))
}

fn cmp_op(t: &Tok) -> Option<CmpOp> {
    Some(match t {
        Tok::Eq => CmpOp::Eq,
        Tok::Neq => CmpOp::Neq,
        Tok::Lt => CmpOp::Lt,
        Tok::Leq => CmpOp::Leq,
        Tok::Gt => CmpOp::Gt,
        Tok::Geq => CmpOp::Geq,
        _ => return None,
    })
}

fn parse_body_lit(cur: &mut Cursor) -> Result<BodyLit> {
    if cur.is_kw("not") && matches!(cur.peek_at(1), Tok::Ident(_)) {
        cur.next();
        return Ok(BodyLit::Neg(parse_atom(cur)?));
    }
    if cmp_op(cur.peek_at(1)).is_some() || matches!(cur.peek(), Tok::Number(_) | Tok::Str(_)) {
        let a = parse_term(cur)?;
        let op = cmp_op(&cur.next()).ok_or_else(|| cur.error("expected a comparison operator"))?;
        let b = parse_term(cur)?;
        return Ok(BodyLit::Builtin(Builtin::Cmp(op, a, b)));
    }
    Ok(BodyLit::Pos(parse_atom(cur)?))
}

/// Parse program text in the emitted form. Ground single-atom rules without a
/// body become facts; the universe is read from the `dom` facts.
pub fn parse_program(text: &str) -> Result<LogicProgram> {
    let mut cur = Cursor::new(text)?;
    let mut facts = Vec::new();
    let mut rules = Vec::new();
    while !cur.at_eof() {
        let mut head = Vec::new();
        if !matches!(cur.peek(), Tok::If) {
            head.push(parse_atom(&mut cur)?);
            while cur.eat(&Tok::Bar) || cur.eat_kw("v") {
                head.push(parse_atom(&mut cur)?);
            }
        }
        let mut body = Vec::new();
        if cur.eat(&Tok::If) {
            body.push(parse_body_lit(&mut cur)?);
            while cur.eat(&Tok::Comma) {
                body.push(parse_body_lit(&mut cur)?);
            }
        }
        cur.expect(Tok::Dot)?;
        if head.is_empty() && body.is_empty() {
            return Err(cur.error("empty rule"));
        }
        let ground = head.len() == 1 && head[0].vars().next().is_none();
        if body.is_empty() && ground && rules.is_empty() {
            facts.push(head.pop().expect("one head atom"));
        } else {
            rules.push(Rule { head, body, kind: RuleKind::Parsed });
        }
    }
    let universe = facts
        .iter()
        .filter(|f| f.pred.as_ref() == DOM && f.ann.is_none() && f.terms.len() == 1)
        .filter_map(|f| match &f.terms[0] {
            Term::Const(c) => Some(c.clone()),
            Term::Var(_) => None,
        })
        .collect();
    if facts.is_empty() && rules.is_empty() {
        return Err(Error::parse(1, 1, "empty program"));
    }
    Ok(LogicProgram { facts, rules, universe, lazy_closed_world: false, warnings: Vec::new() })
}
