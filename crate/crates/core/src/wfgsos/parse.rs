//! The line-oriented specification file format.
//!
//! ```text
//! # comment
//! monoid rat-plus-inf              # or: monoid m { elems: ...; unit: ...; add: ... }
//! labels a b
//! sig nil/0 plus/2
//! wsig bot/0 oplus/2
//! leaf inf                         # weight of process leaves
//! interp oplus = sum
//! process P = plus(nil, nil)       # named ground term
//! rule plus(x1, x2) -[a]-> oplus(phi1, phi2) when x1 -[a]-> phi1, x2 -[a]-> phi2
//! ```
//!
//! Premises are `x -[a]-> phi`, `x -/[b]`, `total(phi)=w` and
//! `club(phi, C) ni y` (`∋` is accepted for `ni`). In a target, names of
//! weight operators build weight terms, names of process operators build
//! process leaves, premise variables are weight variables and any other
//! bare name is a process variable.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::monoid::{Club, Monoid};

use super::interp::{Combinator, Interpretation};
use super::rule::{ClubPremise, Negative, Positive, Rule, TotalPremise, WTerm};
use super::term::{parse_term, split_top_level, RawTerm, ScanError, Scanner, Signature};
use super::Specification;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.col, self.message)
    }
}

impl ParseError {
    fn at(line: &Line, offset: usize, message: impl Into<String>) -> Self {
        let col = line.text[..offset.min(line.text.len())].chars().count() + line.indent + 1;
        ParseError { line: line.number, col, message: message.into() }
    }
}

/// A logical line: comment-free text, its 1-based number and the column
/// offset of its first character.
struct Line {
    number: usize,
    indent: usize,
    text: String,
}

fn strip_comment(raw: &str) -> &str {
    let bytes = raw.as_bytes();
    for (i, c) in raw.char_indices() {
        if c == '#' {
            let before_ok = i == 0 || bytes[i - 1].is_ascii_whitespace();
            let after_ok = raw[i + 1..].chars().next().is_none_or(|n| n.is_whitespace() || n == '#');
            if before_ok && after_ok {
                return &raw[..i];
            }
        }
    }
    raw
}

fn logical_lines(text: &str) -> Vec<Line> {
    let mut out: Vec<Line> = Vec::new();
    let mut open: Option<Line> = None;
    for (n, raw) in text.lines().enumerate() {
        let body = strip_comment(raw);
        if let Some(mut l) = open.take() {
            l.text.push(' ');
            l.text.push_str(body.trim());
            if l.text.matches('{').count() <= l.text.matches('}').count() {
                out.push(l);
            } else {
                open = Some(l);
            }
            continue;
        }
        let trimmed = body.trim_start();
        if trimmed.trim().is_empty() {
            continue;
        }
        let line = Line { number: n + 1, indent: body.len() - trimmed.len(), text: trimmed.trim_end().to_string() };
        if line.text.starts_with("monoid") && line.text.matches('{').count() > line.text.matches('}').count() {
            open = Some(line);
        } else {
            out.push(line);
        }
    }
    out.extend(open);
    out
}

fn scan_err(line: &Line, base: usize, e: ScanError) -> ParseError {
    ParseError::at(line, base + e.pos, e.message)
}

fn parse_sig(line: &Line, rest: &str, base: usize) -> Result<Signature, ParseError> {
    let mut sig = Signature::new();
    let mut sc = Scanner::new(rest);
    while !sc.at_end() {
        let name = sc.ident().ok_or_else(|| ParseError::at(line, base + sc.pos(), "expected an operator name"))?;
        sc.expect("/").map_err(|e| scan_err(line, base, e))?;
        sc.skip_ws();
        let digits: String = sc.rest().chars().take_while(char::is_ascii_digit).collect();
        let arity: usize = digits.parse().map_err(|_| ParseError::at(line, base + sc.pos(), "expected an arity"))?;
        sc.eat(&digits);
        if !sig.insert(&name, arity) {
            return Err(ParseError::at(line, base, format!("operator `{name}` declared twice")));
        }
    }
    Ok(sig)
}

/// Parses a specification file.
pub fn parse_spec(text: &str) -> Result<Specification, ParseError> {
    let lines = logical_lines(text);
    let mut monoid = None;
    let mut labels = None;
    let mut sig = Signature::new();
    let mut wsig = Signature::new();
    let mut leaf_line = None;
    let mut body = Vec::new();
    for line in &lines {
        let (kw, rest) = line.text.split_once(char::is_whitespace).unwrap_or((&line.text, ""));
        let base = line.text.len() - rest.len();
        match kw {
            "monoid" => {
                if monoid.is_some() {
                    return Err(ParseError::at(line, 0, "duplicate `monoid` line"));
                }
                monoid = Some(Monoid::parse_declaration(rest).map_err(|e| ParseError::at(line, base, e.to_string()))?);
            }
            "labels" => labels = Some(rest.split_whitespace().map(str::to_string).collect::<BTreeSet<_>>()),
            "sig" => {
                for (n, a) in parse_sig(line, rest, base)?.iter() {
                    sig.insert(n, a);
                }
            }
            "wsig" => {
                for (n, a) in parse_sig(line, rest, base)?.iter() {
                    wsig.insert(n, a);
                }
            }
            "leaf" => leaf_line = Some((line, rest, base)),
            "interp" | "rule" | "process" => body.push((line, kw, rest, base)),
            other => return Err(ParseError::at(line, 0, format!("unknown directive `{other}`"))),
        }
    }
    let top = || ParseError { line: 1, col: 1, message: String::new() };
    let monoid = monoid.ok_or_else(|| ParseError { message: "missing `monoid` line".into(), ..top() })?;
    let labels = labels.ok_or_else(|| ParseError { message: "missing `labels` line".into(), ..top() })?;
    let leaf = match leaf_line {
        Some((line, rest, base)) => monoid.parse_weight(rest).map_err(|e| ParseError::at(line, base, e.to_string()))?,
        None => monoid
            .one()
            .ok_or_else(|| ParseError { message: "missing `leaf` line".into(), ..top() })?,
    };
    let mut interp = Interpretation::new(leaf);
    let mut rules = Vec::new();
    let mut processes = BTreeMap::new();
    for (line, kw, rest, base) in body {
        if kw == "process" {
            let (name, term) = rest
                .split_once('=')
                .ok_or_else(|| ParseError::at(line, base, "expected `process <name> = <term>`"))?;
            let t = parse_term(term, &sig, false).map_err(|e| scan_err(line, base + name.len() + 1, e))?;
            if processes.insert(name.trim().to_string(), t).is_some() {
                return Err(ParseError::at(line, base, format!("process `{}` defined twice", name.trim())));
            }
        } else if kw == "interp" {
            let (name, comb) = rest
                .split_once('=')
                .ok_or_else(|| ParseError::at(line, base, "expected `interp <op> = <combinator>`"))?;
            let name: String = name.chars().filter(|c| !c.is_whitespace()).collect();
            let c = Combinator::parse(comb, &monoid, &sig).map_err(|e| ParseError::at(line, base + name.len() + 1, e))?;
            if interp.ops.insert(name.clone(), c).is_some() {
                return Err(ParseError::at(line, base, format!("`{name}` interpreted twice")));
            }
        } else {
            rules.push(parse_rule(line, rest, base, &monoid, &sig, &wsig)?);
        }
    }
    Ok(Specification { monoid, labels, sig, wsig, rules, interp, processes })
}

/// Offset of the keyword `when` at bracket depth zero.
fn find_when(text: &str) -> Option<usize> {
    let mut depth = 0i32;
    let bytes = text.as_bytes();
    for (i, c) in text.char_indices() {
        match c {
            '(' | '[' | '{' => depth += 1,
            ')' | ']' | '}' => depth -= 1,
            'w' if depth == 0 && text[i..].starts_with("when") => {
                let before = i == 0 || bytes[i - 1].is_ascii_whitespace();
                let after = text[i + 4..].chars().next().is_none_or(char::is_whitespace);
                if before && after {
                    return Some(i);
                }
            }
            _ => {}
        }
    }
    None
}

fn parse_label(sc: &mut Scanner<'_>) -> Option<String> {
    sc.skip_ws();
    let rest = sc.rest();
    let end = rest.find(']')?;
    let label = rest[..end].trim().to_string();
    sc.eat(&rest[..end + 1]);
    (!label.is_empty()).then_some(label)
}

fn parse_rule(
    line: &Line,
    text: &str,
    base: usize,
    m: &Monoid,
    sig: &Signature,
    wsig: &Signature,
) -> Result<Rule, ParseError> {
    let (head, premises) = match find_when(text) {
        Some(i) => (&text[..i], Some((i + 4, &text[i + 4..]))),
        None => (text, None),
    };
    let mut sc = Scanner::new(head);
    let err = |sc: &Scanner<'_>, msg: &str| ParseError::at(line, base + sc.pos(), msg);
    let op = sc.ident().ok_or_else(|| err(&sc, "expected the source operator"))?;
    let mut args = Vec::new();
    if sc.eat("(") && !sc.eat(")") {
        loop {
            args.push(sc.ident().ok_or_else(|| err(&sc, "expected a variable"))?);
            if sc.eat(")") {
                break;
            }
            sc.expect(",").map_err(|e| scan_err(line, base, e))?;
        }
    }
    sc.expect("-[").map_err(|e| scan_err(line, base, e))?;
    let label = parse_label(&mut sc).ok_or_else(|| err(&sc, "expected `label]`"))?;
    sc.expect("->").map_err(|e| scan_err(line, base, e))?;
    let target_pos = base + sc.pos();
    let target_text = sc.rest();

    let mut rule = Rule {
        op,
        args,
        label,
        positive: Vec::new(),
        negative: Vec::new(),
        totals: Vec::new(),
        clubs: Vec::new(),
        target: WTerm::op("", vec![]),
    };
    if let Some((off, text)) = premises {
        for (p_off, p) in split_top_level(text, ',') {
            let at = base + off + p_off;
            parse_premise(line, at, p, m, &mut rule)?;
        }
    }
    let phis: BTreeSet<&str> = rule.positive.iter().map(|p| p.var.as_str()).collect();
    let mut tsc = Scanner::new(target_text);
    let raw = tsc.raw_term().map_err(|e| scan_err(line, target_pos, e))?;
    if !tsc.at_end() {
        return Err(ParseError::at(line, target_pos + tsc.pos(), "unexpected text after the target"));
    }
    rule.target = resolve(&raw, sig, wsig, &phis).map_err(|e| scan_err(line, target_pos, e))?;
    Ok(rule)
}

fn resolve(raw: &RawTerm, sig: &Signature, wsig: &Signature, phis: &BTreeSet<&str>) -> Result<WTerm, ScanError> {
    if wsig.contains(&raw.name) {
        let args = raw.args.as_deref().unwrap_or(&[]);
        let sub = args.iter().map(|a| resolve(a, sig, wsig, phis)).collect::<Result<Vec<_>, _>>()?;
        return Ok(WTerm::Op(raw.name.clone(), sub));
    }
    if raw.args.is_none() && phis.contains(raw.name.as_str()) {
        return Ok(WTerm::WVar(raw.name.clone()));
    }
    raw.to_term(sig, true).map(WTerm::Proc)
}

fn parse_premise(line: &Line, at: usize, text: &str, m: &Monoid, rule: &mut Rule) -> Result<(), ParseError> {
    let lead = text.len() - text.trim_start().len();
    let at = at + lead;
    let text = text.trim();
    let bad = |msg: String| ParseError::at(line, at, msg);
    if let Some(rest) = text.strip_prefix("total(") {
        let (var, w) = rest.split_once(')').ok_or_else(|| bad("expected `total(phi)=w`".into()))?;
        let w = w.trim().strip_prefix('=').ok_or_else(|| bad("expected `=` after `total(..)`".into()))?;
        let weight = m.parse_weight(w).map_err(|e| bad(e.to_string()))?;
        rule.totals.push(TotalPremise { var: var.trim().to_string(), weight });
        return Ok(());
    }
    if let Some(rest) = text.strip_prefix("club(") {
        let mut depth = 0i32;
        let close = rest
            .char_indices()
            .find(|&(_, c)| {
                match c {
                    '(' | '{' => depth += 1,
                    ')' | '}' => depth -= 1,
                    _ => {}
                }
                depth < 0
            })
            .map(|(i, _)| i)
            .ok_or_else(|| bad("expected `club(phi, C) ni y`".into()))?;
        let (inner, tail) = (&rest[..close], &rest[close + 1..]);
        let (var, club) = inner.split_once(',').ok_or_else(|| bad("expected `club(phi, C)`".into()))?;
        let club = Club::parse(m, club).map_err(|e| bad(e.to_string()))?;
        let tail = tail.trim();
        let y = tail
            .strip_prefix('∋')
            .or_else(|| tail.strip_prefix("ni "))
            .ok_or_else(|| bad("expected `ni y` or `∋ y`".into()))?
            .trim();
        if y.is_empty() || y.contains(char::is_whitespace) {
            return Err(bad("expected a single variable after `ni`".into()));
        }
        rule.clubs.push(ClubPremise { var: var.trim().to_string(), club, target: y.to_string() });
        return Ok(());
    }
    let mut sc = Scanner::new(text);
    let x = sc.ident().ok_or_else(|| bad("expected a premise".into()))?;
    let arg = rule
        .args
        .iter()
        .position(|a| *a == x)
        .ok_or_else(|| bad(format!("`{x}` is not an argument of the source")))?;
    if sc.eat("-/[") {
        let label = parse_label(&mut sc).ok_or_else(|| bad("expected `label]`".into()))?;
        sc.eat("->");
        if !sc.at_end() {
            return Err(ParseError::at(line, at + sc.pos(), "unexpected text after negative premise"));
        }
        rule.negative.push(Negative { arg, label });
    } else if sc.eat("-[") {
        let label = parse_label(&mut sc).ok_or_else(|| bad("expected `label]`".into()))?;
        sc.expect("->").map_err(|e| scan_err(line, at, e))?;
        let var = sc.ident().ok_or_else(|| ParseError::at(line, at + sc.pos(), "expected a weight variable"))?;
        if !sc.at_end() {
            return Err(ParseError::at(line, at + sc.pos(), "unexpected text after premise"));
        }
        rule.positive.push(Positive { arg, label, var });
    } else {
        return Err(ParseError::at(line, at + sc.pos(), "expected `-[a]-> phi` or `-/[b]`"));
    }
    Ok(())
}

/// Writes a specification in the format read by [`parse_spec`].
/// Literal weight functions inside targets are not representable.
pub fn emit_spec(s: &Specification) -> String {
    let m = &s.monoid;
    let mut out = String::new();
    out.push_str(&format!("monoid {}\n", m.declaration()));
    out.push_str(&format!("labels {}\n", s.labels.iter().cloned().collect::<Vec<_>>().join(" ")));
    let sig_line = |g: &Signature| g.iter().map(|(n, a)| format!("{n}/{a}")).collect::<Vec<_>>().join(" ");
    out.push_str(&format!("sig {}\n", sig_line(&s.sig)));
    out.push_str(&format!("wsig {}\n", sig_line(&s.wsig)));
    out.push_str(&format!("leaf {}\n", m.format_weight(&s.interp.leaf)));
    for (op, c) in &s.interp.ops {
        out.push_str(&format!("interp {op} = {}\n", c.format(m)));
    }
    for (name, t) in &s.processes {
        out.push_str(&format!("process {name} = {t}\n"));
    }
    for r in &s.rules {
        out.push_str(&format!("rule {}\n", r.format(m)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monoid::Weight;

    const RACE: &str = "\
# two-way choice
monoid rat-plus-inf
labels a b
sig nil/0 pre[a,2]/1 plus/2
wsig bot/0 diam[2]/1 oplus/2
leaf inf
interp bot = zero
interp diam[2] = normalize(2)
interp oplus = sum
process P = plus(pre[a,2](nil), nil)
rule nil -[a]-> bot
rule pre[a,2](x) -[a]-> diam[2](x)
rule plus(x1, x2) -[a]-> oplus(phi1, phi2) when x1 -[a]-> phi1, x2 -[a]-> phi2
rule plus(x1, x2) -[b]-> oplus(phi1, bot) when x1 -[b]-> phi1, x2 -/[b] ->
rule plus(x1, x2) -[b]-> phi when x1 -[a]-> phi, total(phi) = 2, club(phi, nonzero) ∋ y
";

    #[test]
    fn parses_and_round_trips() {
        let s = parse_spec(RACE).unwrap();
        assert_eq!(s.rules.len(), 5);
        assert_eq!(s.interp.leaf, Weight::Infinity);
        assert_eq!(s.processes["P"].to_string(), "plus(pre[a,2](nil), nil)");
        assert_eq!(s.rules[3].negative.len(), 1);
        assert_eq!(s.rules[4].totals[0].weight, Weight::int(2));
        assert_eq!(s.rules[4].clubs[0].club, Club::NonZero);
        assert!(matches!(&s.rules[1].target, WTerm::Op(op, a) if op == "diam[2]" && a[0] == WTerm::pvar("x")));
        let emitted = emit_spec(&s);
        assert_eq!(parse_spec(&emitted).unwrap(), s);
        assert_eq!(emit_spec(&parse_spec(&emitted).unwrap()), emitted);
    }

    #[test]
    fn table_monoid_block() {
        let text = "monoid m4 {\n  elems: 0 a b 1;  # carrier\n  unit: 0;\n  add: a a -> a, a b -> 1, a 1 -> 1, b b -> b, b 1 -> 1, 1 1 -> 1\n}\nlabels a\nleaf 1\n";
        let s = parse_spec(text).unwrap();
        assert_eq!(s.monoid.name(), "m4");
        assert_eq!(parse_spec(&emit_spec(&s)).unwrap(), s);
    }

    #[test]
    fn errors_cite_positions() {
        let e = parse_spec("monoid nat-plus\nlabels a\nfoo bar\n").unwrap_err();
        assert_eq!((e.line, e.col), (3, 1));
        let e = parse_spec("monoid nat-plus\nlabels a\nsig f/1\nrule f(x) -[a]-> y when z -[a]-> phi\n").unwrap_err();
        assert_eq!(e.line, 4);
        assert_eq!(e.col, 25);
        assert!(e.message.contains("`z`"));
        let e = parse_spec("labels a\n").unwrap_err();
        assert!(e.message.contains("monoid"));
        assert!(parse_spec("monoid bogus\nlabels a\n").is_err());
    }

    #[test]
    fn context_holes_are_not_comments() {
        let text = "monoid nat-plus\nlabels a\nsig f/2\nwsig k/2\ninterp k = context(f(#0, #1); ww) # trailing\n";
        let s = parse_spec(text).unwrap();
        assert!(matches!(s.interp.ops["k"], Combinator::Context { .. }));
    }
}
