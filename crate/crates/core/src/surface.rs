//! Text formats: ontologies (`.dl`), databases (`.db`), queries (`.cq`),
//! schemas (`.schema`) and JSON answer sets.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, ParseError, Result, Span};
use crate::model::{Atom, Axiom, Concept, Cq, Database, Dialect, Fresh, Name, Ontology, Role, Schema, Ucq};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Top,
    Bot,
    Exists,
    Inv,
    Range,
    Func,
    DisjointRoles,
    Amp,
    Dot,
    Comma,
    LParen,
    RParen,
    Le,
    Turnstile,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Top => "`top`".into(),
            Tok::Bot => "`bot`".into(),
            Tok::Exists => "`exists`".into(),
            Tok::Inv => "`inv`".into(),
            Tok::Range => "`range`".into(),
            Tok::Func => "`func`".into(),
            Tok::DisjointRoles => "`disjoint-roles`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Comma => "`,`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Le => "`<=`".into(),
            Tok::Turnstile => "`:-`".into(),
        }
    }
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    col: usize,
    len: usize,
}

fn err(line: usize, col: usize, len: usize, message: impl Into<String>, expected: &[&str]) -> ParseError {
    ParseError {
        span: Span { line, col: col.max(1), len: len.max(1) },
        message: message.into(),
        expected: expected.iter().map(|s| s.to_string()).collect(),
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Strip a `#` comment and a trailing carriage return.
fn strip_line(raw: &str) -> &str {
    let line = raw.strip_suffix('\r').unwrap_or(raw);
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn lex(line: &str, lineno: usize, keywords: bool) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if is_ident_start(c) {
            let start = i;
            while i < chars.len() && is_ident_char(chars[i]) {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            let rest: String = chars[i..].iter().take(6).collect();
            let tok = match word.as_str() {
                "disjoint" if keywords && rest == "-roles" && chars.get(i + 6).is_none_or(|c| !is_ident_char(*c)) => {
                    i += 6;
                    Tok::DisjointRoles
                }
                "top" if keywords => Tok::Top,
                "bot" if keywords => Tok::Bot,
                "exists" if keywords => Tok::Exists,
                "inv" if keywords => Tok::Inv,
                "range" if keywords => Tok::Range,
                "func" if keywords => Tok::Func,
                _ => Tok::Ident(word),
            };
            out.push(Token { tok, col, len: i - start });
            continue;
        }
        let (tok, len) = match c {
            '&' => (Tok::Amp, 1),
            '.' => (Tok::Dot, 1),
            ',' => (Tok::Comma, 1),
            '(' => (Tok::LParen, 1),
            ')' => (Tok::RParen, 1),
            '<' if chars.get(i + 1) == Some(&'=') => (Tok::Le, 2),
            ':' if chars.get(i + 1) == Some(&'-') => (Tok::Turnstile, 2),
            _ => return Err(err(lineno, col, 1, format!("unexpected character {c:?}"), &[])),
        };
        out.push(Token { tok, col, len });
        i += len;
    }
    Ok(out)
}

struct Cursor<'a> {
    toks: &'a [Token],
    pos: usize,
    line: usize,
    end_col: usize,
}

impl<'a> Cursor<'a> {
    fn new(toks: &'a [Token], line: usize, text: &str) -> Self {
        Cursor { toks, pos: 0, line, end_col: text.chars().count() + 1 }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|t| &t.tok)
    }

    fn here(&self) -> (usize, usize) {
        match self.toks.get(self.pos) {
            Some(t) => (t.col, t.len),
            None => (self.end_col, 1),
        }
    }

    fn fail(&self, expected: &[&str]) -> ParseError {
        let (col, len) = self.here();
        let message = match self.peek() {
            Some(t) => format!("unexpected {}", t.describe()),
            None => "unexpected end of line".to_string(),
        };
        err(self.line, col, len, message, expected)
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if self.eat(&tok) {
            Ok(())
        } else {
            Err(self.fail(&[what]))
        }
    }

    fn ident(&mut self) -> Result<Name, ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let n = Name::from(s.as_str());
                self.pos += 1;
                Ok(n)
            }
            _ => Err(self.fail(&["identifier"])),
        }
    }

    fn done(&self) -> Result<(), ParseError> {
        if self.pos == self.toks.len() {
            Ok(())
        } else {
            Err(self.fail(&["end of line"]))
        }
    }
}

fn parse_role(c: &mut Cursor) -> Result<Role, ParseError> {
    if c.eat(&Tok::Inv) {
        c.expect(Tok::LParen, "`(`")?;
        let n = c.ident()?;
        c.expect(Tok::RParen, "`)`")?;
        Ok(Role::inv_of(n))
    } else {
        match c.peek() {
            Some(Tok::Ident(_)) => Ok(Role::new(c.ident()?)),
            _ => Err(c.fail(&["role name", "`inv(`"])),
        }
    }
}

fn parse_concept_at(c: &mut Cursor) -> Result<Concept, ParseError> {
    let mut parts = vec![parse_primary(c)?];
    while c.eat(&Tok::Amp) {
        parts.push(parse_primary(c)?);
    }
    Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Concept::conj(parts) })
}

fn parse_primary(c: &mut Cursor) -> Result<Concept, ParseError> {
    match c.peek() {
        Some(Tok::Top) => {
            c.pos += 1;
            Ok(Concept::Top)
        }
        Some(Tok::Bot) => {
            c.pos += 1;
            Ok(Concept::Bot)
        }
        Some(Tok::Ident(_)) => Ok(Concept::Atomic(c.ident()?)),
        Some(Tok::Exists) => {
            c.pos += 1;
            let r = parse_role(c)?;
            c.expect(Tok::Dot, "`.`")?;
            let filler = parse_primary(c)?;
            Ok(Concept::exists(r, filler))
        }
        Some(Tok::LParen) => {
            c.pos += 1;
            let inner = parse_concept_at(c)?;
            c.expect(Tok::RParen, "`)`")?;
            Ok(inner)
        }
        _ => Err(c.fail(&["concept"])),
    }
}

/// Parse a single concept expression.
pub fn parse_concept(text: &str) -> Result<Concept, ParseError> {
    let line = strip_line(text.lines().next().unwrap_or(""));
    if text.lines().filter(|l| !strip_line(l).trim().is_empty()).count() > 1 {
        return Err(err(2, 1, 1, "a concept must fit on one line", &[]));
    }
    let toks = lex(line, 1, true)?;
    let mut c = Cursor::new(&toks, 1, line);
    let concept = parse_concept_at(&mut c)?;
    c.done()?;
    Ok(concept)
}

enum Raw {
    Axiom(Axiom),
    /// `IDENT <= IDENT`, resolved once all lines are read.
    Ambiguous(Name, Name),
}

fn parse_axiom_line(c: &mut Cursor) -> Result<Raw, ParseError> {
    match c.peek() {
        Some(Tok::Range) => {
            c.pos += 1;
            let r = c.ident()?;
            c.expect(Tok::Le, "`<=`")?;
            let d = parse_concept_at(c)?;
            c.done()?;
            return Ok(Raw::Axiom(Axiom::RangeRestriction(r, d)));
        }
        Some(Tok::Func) => {
            c.pos += 1;
            let r = c.ident()?;
            c.done()?;
            return Ok(Raw::Axiom(Axiom::Functionality(r)));
        }
        Some(Tok::DisjointRoles) => {
            c.pos += 1;
            let mut rs = vec![c.ident()?];
            c.expect(Tok::Comma, "`,`")?;
            rs.push(c.ident()?);
            while c.eat(&Tok::Comma) {
                rs.push(c.ident()?);
            }
            c.done()?;
            return Ok(Raw::Axiom(Axiom::RoleDisjointness(rs)));
        }
        _ => {}
    }
    if let (Some(Tok::Ident(a)), Some(Tok::Le), Some(Tok::Ident(b)), None) =
        (c.peek(), c.peek_at(1), c.peek_at(2), c.peek_at(3))
    {
        return Ok(Raw::Ambiguous(Name::from(a.as_str()), Name::from(b.as_str())));
    }
    if c.peek() == Some(&Tok::Inv) {
        let r = parse_role(c)?;
        c.expect(Tok::Le, "`<=`")?;
        let s = parse_role(c)?;
        c.done()?;
        return Ok(Raw::Axiom(role_inclusion(r, s)));
    }
    if matches!(c.peek(), Some(Tok::Ident(_))) && c.peek_at(1) == Some(&Tok::Le) && c.peek_at(2) == Some(&Tok::Inv) {
        let r = parse_role(c)?;
        c.pos += 1;
        let s = parse_role(c)?;
        c.done()?;
        return Ok(Raw::Axiom(role_inclusion(r, s)));
    }
    let lhs = parse_concept_at(c)?;
    c.expect(Tok::Le, "`<=`")?;
    let rhs = parse_concept_at(c)?;
    c.done()?;
    Ok(Raw::Axiom(Axiom::ConceptInclusion(lhs, rhs)))
}

/// `inv(r) <= inv(s)` is stored as the equivalent `r <= s`.
fn role_inclusion(r: Role, s: Role) -> Axiom {
    if r.inverse && s.inverse {
        Axiom::RoleInclusion(r.inv(), s.inv())
    } else {
        Axiom::RoleInclusion(r, s)
    }
}

/// Parse an ontology; the dialect is the `dialect:` header or the least admitting one.
pub fn parse_ontology(text: &str) -> Result<Ontology> {
    let mut header: Option<Dialect> = None;
    let mut raws: Vec<(usize, Raw)> = Vec::new();
    for (i, raw) in text.split('\n').enumerate() {
        let lineno = i + 1;
        let line = strip_line(raw);
        if line.trim().is_empty() {
            continue;
        }
        if let Some(rest) = line.trim_start().strip_prefix("dialect:") {
            let col = line.len() - line.trim_start().len() + 1;
            if header.is_some() || !raws.is_empty() {
                return Err(err(lineno, col, 8, "the dialect header must come first", &[]).into());
            }
            let name = rest.trim();
            header = Some(Dialect::from_name(name).ok_or_else(|| {
                let expected: Vec<&str> = Dialect::ALL.iter().map(|d| d.name()).collect();
                err(lineno, col + 8, name.len(), format!("unknown dialect `{name}`"), &expected)
            })?);
            continue;
        }
        let toks = lex(line, lineno, true)?;
        let mut c = Cursor::new(&toks, lineno, line);
        raws.push((lineno, parse_axiom_line(&mut c)?));
    }
    let mut concepts = BTreeSet::new();
    let mut roles = BTreeSet::new();
    for (_, r) in &raws {
        if let Raw::Axiom(a) = r {
            a.names(&mut concepts, &mut roles);
        }
    }
    let mut axioms = Vec::new();
    for (lineno, r) in raws {
        let a = match r {
            Raw::Axiom(a) => a,
            Raw::Ambiguous(x, y) => {
                if roles.contains(&x) || roles.contains(&y) {
                    Axiom::RoleInclusion(Role::new(x), Role::new(y))
                } else {
                    Axiom::ConceptInclusion(Concept::Atomic(x), Concept::Atomic(y))
                }
            }
        };
        let mut c2 = BTreeSet::new();
        let mut r2 = BTreeSet::new();
        a.names(&mut c2, &mut r2);
        a.names(&mut concepts, &mut roles);
        if let Some(n) = c2.iter().find(|n| roles.contains(*n)).or_else(|| r2.iter().find(|n| concepts.contains(*n))) {
            return Err(err(lineno, 1, 1, format!("`{n}` is used both as a concept name and as a role name"), &[]).into());
        }
        axioms.push(a);
    }
    match header {
        Some(d) => Ontology::new(d, axioms),
        None => Ontology::infer(axioms),
    }
}

/// Serialize an ontology; the output parses back to an equal ontology.
pub fn serialize_ontology(o: &Ontology) -> String {
    let (_, roles) = o.signature();
    let mut concept_like_roles: BTreeMap<Name, usize> = BTreeMap::new();
    for a in &o.axioms {
        let mut c = BTreeSet::new();
        let mut r = BTreeSet::new();
        if !matches!(a, Axiom::RoleInclusion(..)) {
            a.names(&mut c, &mut r);
            for n in r {
                *concept_like_roles.entry(n).or_default() += 1;
            }
        }
    }
    let mut out = format!("dialect: {}\n", o.dialect.name());
    for a in &o.axioms {
        match a {
            Axiom::RoleInclusion(r, s)
                if !r.inverse
                    && !s.inverse
                    && !concept_like_roles.contains_key(&r.name)
                    && !concept_like_roles.contains_key(&s.name)
                    && roles.contains(&r.name) =>
            {
                // Plain `r <= s` would read back as a concept inclusion.
                out.push_str(&format!("{} <= {}\n", r.inv(), s.inv()));
            }
            _ => out.push_str(&format!("{a}\n")),
        }
    }
    out
}

fn parse_atom(c: &mut Cursor) -> Result<Atom, ParseError> {
    let p = c.ident()?;
    c.expect(Tok::LParen, "`(`")?;
    let a = c.ident()?;
    let atom = if c.eat(&Tok::Comma) {
        let b = c.ident()?;
        Atom::Binary(p, a, b)
    } else {
        Atom::Unary(p, a)
    };
    c.expect(Tok::RParen, "`)`")?;
    Ok(atom)
}

/// Parse a database, one fact per line.
pub fn parse_database(text: &str) -> Result<Database, ParseError> {
    let mut d = Database::new();
    let mut arity: BTreeMap<Name, usize> = BTreeMap::new();
    for (i, raw) in text.split('\n').enumerate() {
        let lineno = i + 1;
        let line = strip_line(raw);
        if line.trim().is_empty() {
            continue;
        }
        let toks = lex(line, lineno, false)?;
        let mut c = Cursor::new(&toks, lineno, line);
        let (col, len) = c.here();
        let atom = parse_atom(&mut c)?;
        c.done()?;
        let prev = *arity.entry(atom.pred().clone()).or_insert(atom.arity());
        if prev != atom.arity() {
            return Err(err(
                lineno,
                col,
                len,
                format!("`{}` is used with arity {} and {}", atom.pred(), prev, atom.arity()),
                &[],
            ));
        }
        d.insert(atom);
    }
    Ok(d)
}

pub fn serialize_database(d: &Database) -> String {
    d.to_string()
}

/// Parse a (U)CQ from datalog-style rules, one rule per line.
pub fn parse_query(text: &str) -> Result<Ucq, ParseError> {
    let mut head: Option<(Name, Vec<Name>, usize)> = None;
    let mut disjuncts = Vec::new();
    let mut arity: BTreeMap<Name, usize> = BTreeMap::new();
    for (i, raw) in text.split('\n').enumerate() {
        let lineno = i + 1;
        let line = strip_line(raw);
        if line.trim().is_empty() {
            continue;
        }
        let toks = lex(line, lineno, false)?;
        let mut c = Cursor::new(&toks, lineno, line);
        let (hcol, _) = c.here();
        let name = c.ident()?;
        c.expect(Tok::LParen, "`(`")?;
        let mut vars = Vec::new();
        if !c.eat(&Tok::RParen) {
            vars.push(c.ident()?);
            while c.eat(&Tok::Comma) {
                vars.push(c.ident()?);
            }
            c.expect(Tok::RParen, "`)`")?;
        }
        let hlen = c.toks[..c.pos].last().map(|t| t.col + t.len - hcol).unwrap_or(1);
        c.expect(Tok::Turnstile, "`:-`")?;
        let mut atoms = Vec::new();
        loop {
            let (col, len) = c.here();
            let atom = parse_atom(&mut c)?;
            let prev = *arity.entry(atom.pred().clone()).or_insert(atom.arity());
            if prev != atom.arity() {
                return Err(err(
                    lineno,
                    col,
                    len,
                    format!("`{}` is used with arity {} and {}", atom.pred(), prev, atom.arity()),
                    &[],
                ));
            }
            atoms.push(atom);
            if !c.eat(&Tok::Comma) {
                break;
            }
        }
        c.done()?;
        match &head {
            None => head = Some((name, vars.clone(), lineno)),
            Some((n0, v0, l0)) => {
                if *n0 != name || *v0 != vars {
                    return Err(err(
                        lineno,
                        hcol,
                        hlen,
                        format!("head does not match the head on line {l0}"),
                        &[],
                    ));
                }
            }
        }
        let q = Cq::new(vars, atoms).map_err(|e| err(lineno, hcol, hlen, e.to_string(), &[]))?;
        disjuncts.push(q);
    }
    if disjuncts.is_empty() {
        let n = text.split('\n').count().max(1);
        return Err(err(n, 1, 1, "no query rule found", &["rule `q(x) :- ...`"]));
    }
    Ok(Ucq { disjuncts })
}

/// Rules in parseable form; answer variables of later disjuncts are renamed to
/// those of the first one, since all heads must agree.
pub fn serialize_query(q: &Ucq) -> String {
    let Some(first) = q.disjuncts.first() else {
        return String::new();
    };
    let distinct = |p: &Cq| p.answer.iter().collect::<BTreeSet<_>>().len() == p.answer.len();
    let mut out = String::new();
    for p in &q.disjuncts {
        let aligned = if p.answer == first.answer || !distinct(p) || !distinct(first) {
            p.clone()
        } else {
            let mut f: BTreeMap<Name, Name> = p.answer.iter().cloned().zip(first.answer.iter().cloned()).collect();
            let mut fresh = Fresh::new("v", p.vars.iter().chain(&first.answer).cloned());
            for v in &p.vars {
                if !f.contains_key(v) && first.answer.contains(v) {
                    f.insert(v.clone(), fresh.next());
                }
            }
            p.rename(&f)
        };
        out.push_str(&format!("{aligned}\n"));
    }
    out
}

pub fn serialize_cq(q: &Cq) -> String {
    format!("{q}\n")
}

/// Parse a schema file: `full`, or one name per line.
pub fn parse_schema(text: &str) -> Result<Schema, ParseError> {
    let mut names = BTreeSet::new();
    let mut full = false;
    for (i, raw) in text.split('\n').enumerate() {
        let line = strip_line(raw).trim();
        if line.is_empty() {
            continue;
        }
        if line == "full" {
            full = true;
            continue;
        }
        let ok = line.chars().next().is_some_and(is_ident_start) && line.chars().all(is_ident_char);
        if !ok {
            let col = strip_line(raw).find(line).unwrap_or(0) + 1;
            return Err(err(i + 1, col, line.chars().count(), format!("invalid name `{line}`"), &["identifier"]));
        }
        names.insert(Name::from(line));
    }
    Ok(if full { Schema::full() } else { Schema::of(names) })
}

pub fn serialize_schema(s: &Schema) -> String {
    if s.full {
        return "full\n".into();
    }
    s.names.iter().map(|n| format!("{n}\n")).collect()
}

/// JSON answer set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Answers {
    pub consistent: bool,
    pub answers: Vec<Vec<String>>,
}

impl Answers {
    pub fn new(consistent: bool, tuples: impl IntoIterator<Item = Vec<Name>>) -> Self {
        let mut answers: Vec<Vec<String>> =
            tuples.into_iter().map(|t| t.iter().map(|n| n.to_string()).collect()).collect();
        answers.sort();
        answers.dedup();
        Answers { consistent, answers }
    }
}

pub fn serialize_answers(a: &Answers) -> String {
    serde_json::to_string(a).expect("answers serialize")
}

/// Read a file and wrap decoding failures as parse errors.
pub fn read_text(path: &std::path::Path) -> Result<String> {
    let bytes = std::fs::read(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    String::from_utf8(bytes).map_err(|e| {
        let upto = &e.as_bytes()[..e.utf8_error().valid_up_to()];
        let line = upto.iter().filter(|b| **b == b'\n').count() + 1;
        let col = upto.iter().rev().take_while(|b| **b != b'\n').count() + 1;
        Error::Parse(err(line, col, 1, "invalid UTF-8", &[]))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ontology_examples() {
        let o = parse_ontology("A2 <= A4").unwrap();
        assert_eq!(o.dialect, Dialect::El);
        assert_eq!(o.axioms, vec![Axiom::ConceptInclusion(Concept::atomic("A2"), Concept::atomic("A4"))]);
        let o = parse_ontology("B <= exists r . (B1 & B2 & exists r . top)").unwrap();
        assert_eq!(o.axioms.len(), 1);
        assert_eq!(o.axioms[0].to_string(), "B <= exists r . (B1 & B2 & exists r . top)");
        let o = parse_ontology("func r").unwrap();
        assert_eq!(o.axioms, vec![Axiom::Functionality("r".into())]);
        assert_eq!(o.dialect, Dialect::DlLiteFEq);
    }

    #[test]
    fn exists_binds_tighter() {
        let c = parse_concept("exists r . A & B").unwrap();
        assert_eq!(c, Concept::conj([Concept::exists(Role::new("r"), Concept::atomic("A")), Concept::atomic("B")]));
    }

    #[test]
    fn ambiguous_inclusions() {
        let o = parse_ontology("r <= s\nA <= exists r . top").unwrap();
        assert!(matches!(o.axioms[0], Axiom::RoleInclusion(..)));
        let o = parse_ontology("r <= s").unwrap();
        assert!(matches!(o.axioms[0], Axiom::ConceptInclusion(..)));
        let o = Ontology::infer(vec![Axiom::RoleInclusion(Role::new("r"), Role::new("s"))]).unwrap();
        assert_eq!(parse_ontology(&serialize_ontology(&o)).unwrap(), o);
    }

    #[test]
    fn database_examples() {
        let d = parse_database("A1(a)\nr(b,a)").unwrap();
        assert_eq!(d.len(), 2);
        let e = parse_database("A(a)\nA(a,b)").unwrap_err();
        assert_eq!(e.span.line, 2);
        assert!(parse_database("A(a").is_err());
    }

    #[test]
    fn query_examples() {
        let q = parse_query("q() :- r(x2,x1), r(x4,x1), r(x2,x3), r(x4,x3), A1(x1), A2(x2), A3(x3), A4(x4)").unwrap();
        assert_eq!(q.disjuncts[0].atoms.len(), 8);
        assert!(parse_query("q(x) :- A(x)\nq(y) :- A(y)").is_err());
        assert_eq!(parse_query("q() :- A(x)\nq() :- B(x)").unwrap().disjuncts.len(), 2);
        let e = parse_query("q(x) :- A(y)").unwrap_err();
        assert_eq!((e.span.line, e.span.col), (1, 1));
    }

    #[test]
    fn answers_json() {
        assert_eq!(serialize_answers(&Answers::new(true, [vec![]])), r#"{"consistent":true,"answers":[[]]}"#);
        assert_eq!(serialize_answers(&Answers::new(true, [])), r#"{"consistent":true,"answers":[]}"#);
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_ontology("A <= B\nA <= exists . B").unwrap_err();
        match e {
            Error::Parse(p) => {
                assert_eq!((p.span.line, p.span.col), (2, 13));
                assert!(p.expected.iter().any(|x| x.contains("role")));
            }
            other => panic!("{other}"),
        }
    }
}
