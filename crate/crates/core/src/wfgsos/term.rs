//! Terms over a signature, and a small tokenizer shared by the text
//! formats of this crate.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

/// Named operators with arities.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    ops: BTreeMap<String, usize>,
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds an operator; returns `false` if the name is taken with a
    /// different arity.
    pub fn insert(&mut self, name: &str, arity: usize) -> bool {
        match self.ops.get(name) {
            Some(a) => *a == arity,
            None => {
                self.ops.insert(name.to_string(), arity);
                true
            }
        }
    }

    pub fn arity(&self, name: &str) -> Option<usize> {
        self.ops.get(name).copied()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.ops.contains_key(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, usize)> {
        self.ops.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }
}

impl<S: AsRef<str>> FromIterator<(S, usize)> for Signature {
    fn from_iter<I: IntoIterator<Item = (S, usize)>>(iter: I) -> Self {
        Signature { ops: iter.into_iter().map(|(k, v)| (k.as_ref().to_string(), v)).collect() }
    }
}

/// A term: a variable leaf or an operator applied to subterms.
///
/// Subterm vectors are shared, so cloning is cheap.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(Arc<str>),
    App(Arc<str>, Arc<[Term]>),
}

impl Term {
    pub fn var(name: &str) -> Self {
        Term::Var(name.into())
    }

    pub fn app(op: &str, args: Vec<Term>) -> Self {
        Term::App(op.into(), args.into())
    }

    pub fn constant(op: &str) -> Self {
        Term::app(op, Vec::new())
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::App(_, args) => args.iter().all(Term::is_ground),
        }
    }

    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(v) => {
                out.insert(v.to_string());
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    /// Simultaneous substitution; unmapped variables stay.
    pub fn substitute(&self, sigma: &BTreeMap<String, Term>) -> Term {
        match self {
            Term::Var(v) => sigma.get(&**v).cloned().unwrap_or_else(|| self.clone()),
            Term::App(op, args) => {
                if self.is_ground() {
                    return self.clone();
                }
                Term::App(op.clone(), args.iter().map(|a| a.substitute(sigma)).collect())
            }
        }
    }

    /// Renames variables; unmapped variables stay.
    pub fn rename(&self, sigma: &BTreeMap<String, String>) -> Term {
        let as_terms: BTreeMap<String, Term> = sigma.iter().map(|(k, v)| (k.clone(), Term::var(v))).collect();
        self.substitute(&as_terms)
    }

    pub fn op(&self) -> Option<&str> {
        match self {
            Term::App(op, _) => Some(op),
            Term::Var(_) => None,
        }
    }

    pub fn args(&self) -> &[Term] {
        match self {
            Term::App(_, args) => args,
            Term::Var(_) => &[],
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) => 0,
            Term::App(_, args) => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
        }
    }

    /// Checks operators and arities against `sig`.
    pub fn check(&self, sig: &Signature) -> Result<(), String> {
        match self {
            Term::Var(_) => Ok(()),
            Term::App(op, args) => {
                match sig.arity(op) {
                    None => return Err(format!("unknown operator `{op}`")),
                    Some(n) if n != args.len() => {
                        return Err(format!("operator `{op}` expects {n} arguments, got {}", args.len()))
                    }
                    _ => {}
                }
                args.iter().try_for_each(|a| a.check(sig))
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::App(op, args) if args.is_empty() => write!(f, "{op}"),
            Term::App(op, args) => {
                write!(f, "{op}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// An unresolved tree of identifiers with optional argument lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawTerm {
    pub name: String,
    pub args: Option<Vec<RawTerm>>,
    /// Byte offset of the name within the parsed text.
    pub pos: usize,
}

/// Error with a byte offset into the scanned text.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScanError {
    pub pos: usize,
    pub message: String,
}

/// Cursor over a single line or fragment.
pub struct Scanner<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Scanner<'a> {
    pub fn new(text: &'a str) -> Self {
        Scanner { text, pos: 0 }
    }

    pub fn pos(&self) -> usize {
        self.pos
    }

    pub fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    pub fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.text.len() - trimmed.len();
    }

    pub fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos == self.text.len()
    }

    pub fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.rest().chars().next()
    }

    pub fn error(&self, message: impl Into<String>) -> ScanError {
        ScanError { pos: self.pos, message: message.into() }
    }

    /// Consumes `token` if it comes next.
    pub fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, token: &str) -> Result<(), ScanError> {
        if self.eat(token) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{token}`")))
        }
    }

    /// Consumes an identifier `[A-Za-z_#][A-Za-z0-9_'#.-]*` if present. A
    /// directly following `[...]` group becomes part of it.
    pub fn ident(&mut self) -> Option<String> {
        self.skip_ws();
        let rest = self.rest();
        let mut chars = rest.char_indices();
        match chars.next() {
            Some((_, c)) if c.is_ascii_alphabetic() || c == '_' || c == '#' => {}
            _ => return None,
        }
        let mut end = rest.len();
        for (i, c) in chars {
            if !(c.is_ascii_alphanumeric() || matches!(c, '_' | '\'' | '#')) {
                end = i;
                break;
            }
        }
        if rest[end..].starts_with('[') {
            if let Some(close) = rest[end..].find(']') {
                let group: String = rest[end..end + close + 1].chars().filter(|c| !c.is_whitespace()).collect();
                let name = format!("{}{}", &rest[..end], group);
                self.pos += end + close + 1;
                return Some(name);
            }
        }
        self.pos += end;
        Some(rest[..end].to_string())
    }

    /// Consumes a weight literal: `inf`, `tt`/`ff`, digits, `p/q`,
    /// decimals, or a table element name.
    pub fn weight_literal(&mut self) -> Option<String> {
        self.skip_ws();
        let rest = self.rest();
        let end = rest
            .find(|c: char| !(c.is_ascii_alphanumeric() || matches!(c, '/' | '.' | '_' | '\'')))
            .unwrap_or(rest.len());
        if end == 0 {
            return None;
        }
        self.pos += end;
        Some(rest[..end].to_string())
    }

    /// `name` or `name(t, ...)`, recursively.
    pub fn raw_term(&mut self) -> Result<RawTerm, ScanError> {
        self.skip_ws();
        let pos = self.pos;
        let name = self.ident().ok_or_else(|| self.error("expected a term"))?;
        let args = if self.eat("(") {
            let mut args = Vec::new();
            if !self.eat(")") {
                loop {
                    args.push(self.raw_term()?);
                    if self.eat(")") {
                        break;
                    }
                    self.expect(",")?;
                }
            }
            Some(args)
        } else {
            None
        };
        Ok(RawTerm { name, args, pos })
    }
}

impl RawTerm {
    /// Resolves against `sig`; names outside it become variables when
    /// `allow_vars` holds.
    pub fn to_term(&self, sig: &Signature, allow_vars: bool) -> Result<Term, ScanError> {
        let err = |m: String| ScanError { pos: self.pos, message: m };
        match (sig.arity(&self.name), &self.args) {
            (Some(n), args) => {
                let args = args.as_deref().unwrap_or(&[]);
                if args.len() != n {
                    return Err(err(format!(
                        "operator `{}` expects {n} arguments, got {}",
                        self.name,
                        args.len()
                    )));
                }
                let sub = args.iter().map(|a| a.to_term(sig, allow_vars)).collect::<Result<Vec<_>, _>>()?;
                Ok(Term::app(&self.name, sub))
            }
            (None, None) if allow_vars => Ok(Term::var(&self.name)),
            (None, _) => Err(err(format!("unknown operator `{}`", self.name))),
        }
    }
}

/// Parses a term over `sig`. Unknown nullary names are variables when
/// `allow_vars` holds.
pub fn parse_term(text: &str, sig: &Signature, allow_vars: bool) -> Result<Term, ScanError> {
    let mut sc = Scanner::new(text);
    let raw = sc.raw_term()?;
    if !sc.at_end() {
        return Err(sc.error("unexpected trailing input"));
    }
    raw.to_term(sig, allow_vars)
}

/// Splits on `sep` at bracket depth zero.
pub fn split_top_level(text: &str, sep: char) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in text.char_indices() {
        match c {
            '(' | '[' | '{' => depth += 1,
            ')' | ']' | '}' => depth -= 1,
            c if c == sep && depth == 0 => {
                out.push((start, &text[start..i]));
                start = i + c.len_utf8();
            }
            _ => {}
        }
    }
    out.push((start, &text[start..]));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig() -> Signature {
        [("nil", 0), ("pre[a,2]", 1), ("plus", 2)].into_iter().collect()
    }

    #[test]
    fn parse_and_display() {
        let t = parse_term("plus(pre[a, 2](nil), nil)", &sig(), false).unwrap();
        assert_eq!(t.to_string(), "plus(pre[a,2](nil), nil)");
        assert!(t.is_ground());
        assert_eq!(parse_term(&t.to_string(), &sig(), false).unwrap(), t);
        let open = parse_term("plus(x, nil)", &sig(), true).unwrap();
        assert_eq!(open.vars(), BTreeSet::from(["x".to_string()]));
        assert!(parse_term("plus(x, nil)", &sig(), false).is_err());
        let e = parse_term("plus(nil)", &sig(), false).unwrap_err();
        assert!(e.message.contains("expects 2"));
        assert!(parse_term("plus(nil, nil) junk", &sig(), false).is_err());
    }

    #[test]
    fn substitution() {
        let t = parse_term("plus(x, pre[a,2](y))", &sig(), true).unwrap();
        let sigma = BTreeMap::from([("x".to_string(), Term::constant("nil"))]);
        assert_eq!(t.substitute(&sigma).to_string(), "plus(nil, pre[a,2](y))");
        let r = t.rename(&BTreeMap::from([("y".to_string(), "x".to_string())]));
        assert_eq!(r.to_string(), "plus(x, pre[a,2](x))");
    }

    #[test]
    fn top_level_split() {
        let parts: Vec<&str> = split_top_level("a(b, c), d[e,f], g", ',').into_iter().map(|p| p.1).collect();
        assert_eq!(parts, vec!["a(b, c)", " d[e,f]", " g"]);
    }
}
