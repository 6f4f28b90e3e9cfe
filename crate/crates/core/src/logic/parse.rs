//! Lexer and recursive-descent parsers for formulas and structure files.

use thiserror::Error;

use super::formula::{Formula, Term};
use super::structure::{FinStructure, Signature, StructureError, SymbolKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown symbol `{name}` at {pos}")]
    UnknownSymbol { name: String, pos: usize },
    #[error("`{symbol}` expects {expected} argument(s), got {got}")]
    ArityMismatch { symbol: String, expected: usize, got: usize },
    #[error(transparent)]
    Structure(#[from] StructureError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Num(String),
    Elem(usize),
    LParen,
    RParen,
    LBrack,
    RBrack,
    LBrace,
    RBrace,
    Comma,
    Semi,
    Colon,
    Eq,
    Neq,
    Bang,
    Amp,
    Bar,
    Caret,
    Tilde,
    Arrow,
    Monus,
    Minus,
    Less,
    Slash,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) | Tok::Num(s) => format!("`{s}`"),
            Tok::Elem(k) => format!("`#{k}`"),
            other => format!("{other:?}"),
        }
    }
}

pub(crate) fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let start = i;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(text[start..i].to_string()), start));
            continue;
        }
        if c.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            out.push((Tok::Num(text[start..i].to_string()), start));
            continue;
        }
        let next = bytes.get(i + 1).map(|b| *b as char);
        let (tok, len) = match (c, next) {
            ('#', Some(d)) if d.is_ascii_digit() => {
                let mut j = i + 1;
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                let k = text[i + 1..j].parse().map_err(|_| ParseError::Syntax {
                    pos: start,
                    msg: "element literal out of range".into(),
                })?;
                (Tok::Elem(k), j - i)
            }
            ('-', Some('>')) => (Tok::Arrow, 2),
            ('-', Some('.')) => (Tok::Monus, 2),
            ('-', _) => (Tok::Minus, 1),
            ('!', Some('=')) => (Tok::Neq, 2),
            ('!', _) => (Tok::Bang, 1),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            ('[', _) => (Tok::LBrack, 1),
            (']', _) => (Tok::RBrack, 1),
            ('{', _) => (Tok::LBrace, 1),
            ('}', _) => (Tok::RBrace, 1),
            (',', _) => (Tok::Comma, 1),
            (';', _) => (Tok::Semi, 1),
            (':', _) => (Tok::Colon, 1),
            ('=', _) => (Tok::Eq, 1),
            ('&', _) => (Tok::Amp, 1),
            ('|', _) => (Tok::Bar, 1),
            ('^', _) => (Tok::Caret, 1),
            ('~', _) => (Tok::Tilde, 1),
            ('<', _) => (Tok::Less, 1),
            ('/', _) => (Tok::Slash, 1),
            _ => {
                return Err(ParseError::Syntax { pos: start, msg: format!("unexpected character `{c}`") });
            }
        };
        out.push((tok, start));
        i += len;
    }
    Ok(out)
}

/// Token cursor shared by every text format in the crate.
pub(crate) struct Cursor {
    toks: Vec<(Tok, usize)>,
    at: usize,
    end: usize,
}

impl Cursor {
    pub(crate) fn new(text: &str) -> Result<Self, ParseError> {
        Ok(Cursor { toks: lex(text)?, at: 0, end: text.len() })
    }

    pub(crate) fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(t, _)| t)
    }

    pub(crate) fn peek_at(&self, offset: usize) -> Option<&Tok> {
        self.toks.get(self.at + offset).map(|(t, _)| t)
    }

    pub(crate) fn pos(&self) -> usize {
        self.toks.get(self.at).map(|(_, p)| *p).unwrap_or(self.end)
    }

    pub(crate) fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.at).map(|(t, _)| t.clone());
        if t.is_some() {
            self.at += 1;
        }
        t
    }

    pub(crate) fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    pub(crate) fn eat_keyword(&mut self, kw: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Ident(s)) if s == kw) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    pub(crate) fn error(&self, msg: impl Into<String>) -> ParseError {
        let found = match self.peek() {
            Some(t) => t.describe(),
            None => "end of input".to_string(),
        };
        ParseError::Syntax { pos: self.pos(), msg: format!("{}, found {found}", msg.into()) }
    }

    pub(crate) fn expect(&mut self, tok: &Tok) -> Result<(), ParseError> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.error(format!("expected {}", tok.describe())))
        }
    }

    pub(crate) fn expect_keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.eat_keyword(kw) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{kw}`")))
        }
    }

    pub(crate) fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.at += 1;
                Ok(s)
            }
            _ => Err(self.error("expected identifier")),
        }
    }

    pub(crate) fn number(&mut self) -> Result<usize, ParseError> {
        match self.peek() {
            Some(Tok::Num(s)) => {
                let n = s.parse().map_err(|_| self.error("number too large"))?;
                self.at += 1;
                Ok(n)
            }
            _ => Err(self.error("expected number")),
        }
    }

    /// Parses `p/q`, `p` or `-p/q`.
    pub(crate) fn rational(&mut self) -> Result<crate::rational::Rational, ParseError> {
        let pos = self.pos();
        let neg = self.eat(&Tok::Minus);
        let mut text = String::new();
        if neg {
            text.push('-');
        }
        match self.bump() {
            Some(Tok::Num(n)) => text.push_str(&n),
            _ => return Err(ParseError::Syntax { pos, msg: "expected rational literal".into() }),
        }
        if self.peek() == Some(&Tok::Slash) && matches!(self.peek_at(1), Some(Tok::Num(_))) {
            self.bump();
            if let Some(Tok::Num(d)) = self.bump() {
                text.push('/');
                text.push_str(&d);
            }
        }
        crate::rational::parse_rational(&text).map_err(|e| ParseError::Syntax { pos, msg: e.to_string() })
    }

    pub(crate) fn at_end(&self) -> bool {
        self.at >= self.toks.len()
    }

    pub(crate) fn finish(&self) -> Result<(), ParseError> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.error("expected end of input"))
        }
    }
}

const KEYWORDS: &[&str] = &["exists", "forall", "true", "false"];

fn is_variable(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase())
        && chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit())
        && !KEYWORDS.contains(&name)
}

/// Parses a first-order formula over `sig`.
///
/// Grammar, loosest binding first: `->` (right associative), `|`, `&`,
/// then `!`, quantifiers `exists x (..)` / `forall x (..)`, atoms
/// `R(t,..)`, `t = t`, `t != t`, `t < t` (when `<` is a binary relation),
/// `true`, `false`.
pub fn parse_formula(text: &str, sig: &Signature) -> Result<Formula, ParseError> {
    let mut cur = Cursor::new(text)?;
    let f = formula(&mut cur, sig)?;
    cur.finish()?;
    Ok(f)
}

pub fn parse_term(text: &str, sig: &Signature) -> Result<Term, ParseError> {
    let mut cur = Cursor::new(text)?;
    let t = term(&mut cur, sig)?;
    cur.finish()?;
    Ok(t)
}

pub(crate) fn formula(cur: &mut Cursor, sig: &Signature) -> Result<Formula, ParseError> {
    let lhs = disjunction(cur, sig)?;
    if cur.eat(&Tok::Arrow) {
        let rhs = formula(cur, sig)?;
        return Ok(Formula::implies(lhs, rhs));
    }
    Ok(lhs)
}

fn disjunction(cur: &mut Cursor, sig: &Signature) -> Result<Formula, ParseError> {
    let mut parts = vec![conjunction(cur, sig)?];
    while cur.eat(&Tok::Bar) {
        parts.push(conjunction(cur, sig)?);
    }
    Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Formula::Or(parts) })
}

fn conjunction(cur: &mut Cursor, sig: &Signature) -> Result<Formula, ParseError> {
    let mut parts = vec![unary(cur, sig)?];
    while cur.eat(&Tok::Amp) {
        parts.push(unary(cur, sig)?);
    }
    Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Formula::And(parts) })
}

fn unary(cur: &mut Cursor, sig: &Signature) -> Result<Formula, ParseError> {
    if cur.eat(&Tok::Bang) {
        return Ok(Formula::not(unary(cur, sig)?));
    }
    if cur.eat(&Tok::LParen) {
        let f = formula(cur, sig)?;
        cur.expect(&Tok::RParen)?;
        return Ok(f);
    }
    for (kw, exists) in [("exists", true), ("forall", false)] {
        if cur.eat_keyword(kw) {
            let pos = cur.pos();
            let v = cur.ident()?;
            if !is_variable(&v) || sig.kind_of(&v).is_some() {
                return Err(ParseError::Syntax { pos, msg: format!("`{v}` is not a variable name") });
            }
            let body = unary(cur, sig)?;
            return Ok(if exists { Formula::exists(&v, body) } else { Formula::forall(&v, body) });
        }
    }
    if cur.eat_keyword("true") {
        return Ok(Formula::True);
    }
    if cur.eat_keyword("false") {
        return Ok(Formula::False);
    }
    atom(cur, sig)
}

fn atom(cur: &mut Cursor, sig: &Signature) -> Result<Formula, ParseError> {
    if let Some(Tok::Ident(name)) = cur.peek() {
        if let Some(SymbolKind::Relation(arity)) = sig.kind_of(name) {
            let name = name.clone();
            cur.bump();
            let args = if cur.peek() == Some(&Tok::LParen) { term_args(cur, sig)? } else { Vec::new() };
            if args.len() != arity {
                return Err(ParseError::ArityMismatch { symbol: name, expected: arity, got: args.len() });
            }
            return Ok(Formula::Rel(name, args));
        }
    }
    let lhs = term(cur, sig)?;
    match cur.peek() {
        Some(Tok::Eq) => {
            cur.bump();
            Ok(Formula::Eq(lhs, term(cur, sig)?))
        }
        Some(Tok::Neq) => {
            cur.bump();
            Ok(Formula::not(Formula::Eq(lhs, term(cur, sig)?)))
        }
        Some(Tok::Less) => {
            let pos = cur.pos();
            match sig.kind_of("<") {
                Some(SymbolKind::Relation(2)) => {}
                Some(SymbolKind::Relation(k)) => {
                    return Err(ParseError::ArityMismatch { symbol: "<".into(), expected: k, got: 2 })
                }
                _ => return Err(ParseError::UnknownSymbol { name: "<".into(), pos }),
            }
            cur.bump();
            Ok(Formula::Rel("<".into(), vec![lhs, term(cur, sig)?]))
        }
        _ => Err(cur.error("expected `=`, `!=` or `<` after term")),
    }
}

fn term_args(cur: &mut Cursor, sig: &Signature) -> Result<Vec<Term>, ParseError> {
    cur.expect(&Tok::LParen)?;
    let mut args = Vec::new();
    if cur.eat(&Tok::RParen) {
        return Ok(args);
    }
    loop {
        args.push(term(cur, sig)?);
        if cur.eat(&Tok::RParen) {
            return Ok(args);
        }
        cur.expect(&Tok::Comma)?;
    }
}

pub(crate) fn term(cur: &mut Cursor, sig: &Signature) -> Result<Term, ParseError> {
    let pos = cur.pos();
    if !matches!(cur.peek(), Some(Tok::Elem(_) | Tok::Ident(_))) {
        return Err(cur.error("expected term"));
    }
    match cur.bump() {
        Some(Tok::Elem(k)) => Ok(Term::Elem(k)),
        Some(Tok::Ident(name)) => match sig.kind_of(&name) {
            Some(SymbolKind::Constant) => Ok(Term::Const(name)),
            Some(SymbolKind::Function(arity)) => {
                let args = if cur.peek() == Some(&Tok::LParen) { term_args(cur, sig)? } else { Vec::new() };
                if args.len() != arity {
                    return Err(ParseError::ArityMismatch { symbol: name, expected: arity, got: args.len() });
                }
                Ok(Term::App(name, args))
            }
            Some(SymbolKind::Relation(_)) => Err(ParseError::Syntax { pos, msg: format!("relation `{name}` used as a term") }),
            None if is_variable(&name) && cur.peek() != Some(&Tok::LParen) => Ok(Term::Var(name)),
            None => Err(ParseError::UnknownSymbol { name, pos }),
        },
        _ => unreachable!(),
    }
}

/// Parses one `structure <name> { ... }` block.
pub fn parse_structure(text: &str) -> Result<FinStructure, ParseError> {
    let mut cur = Cursor::new(text)?;
    let s = structure_block(&mut cur)?;
    cur.finish()?;
    Ok(s)
}

fn symbol_name(cur: &mut Cursor) -> Result<String, ParseError> {
    if cur.eat(&Tok::Less) {
        return Ok("<".into());
    }
    cur.ident()
}

fn index_tuple(cur: &mut Cursor) -> Result<Vec<usize>, ParseError> {
    cur.expect(&Tok::LParen)?;
    let mut out = Vec::new();
    if cur.eat(&Tok::RParen) {
        return Ok(out);
    }
    loop {
        out.push(cur.number()?);
        if cur.eat(&Tok::RParen) {
            return Ok(out);
        }
        cur.expect(&Tok::Comma)?;
    }
}

pub(crate) fn structure_block(cur: &mut Cursor) -> Result<FinStructure, ParseError> {
    cur.expect_keyword("structure")?;
    let name = cur.ident()?;
    cur.expect(&Tok::LBrace)?;
    cur.expect_keyword("universe")?;
    cur.expect(&Tok::Eq)?;
    let size = cur.number()?;
    cur.expect(&Tok::Semi)?;
    let mut builder = FinStructure::builder(&name, size);
    while !cur.eat(&Tok::RBrace) {
        let kind = cur.ident()?;
        match kind.as_str() {
            "relation" | "function" => {
                let sym = symbol_name(cur)?;
                cur.expect(&Tok::Slash)?;
                let arity = cur.number()?;
                cur.expect(&Tok::Eq)?;
                cur.expect(&Tok::LBrace)?;
                let mut tuples = Vec::new();
                let mut graph = Vec::new();
                if !cur.eat(&Tok::RBrace) {
                    loop {
                        let args = index_tuple(cur)?;
                        if kind == "function" {
                            cur.expect(&Tok::Arrow)?;
                            graph.push((args, cur.number()?));
                        } else {
                            tuples.push(args);
                        }
                        if cur.eat(&Tok::RBrace) {
                            break;
                        }
                        cur.expect(&Tok::Comma)?;
                    }
                }
                builder = if kind == "function" {
                    builder.function(&sym, arity, graph)
                } else {
                    builder.relation(&sym, arity, tuples)
                };
            }
            "constant" => {
                let sym = cur.ident()?;
                cur.expect(&Tok::Eq)?;
                builder = builder.constant(&sym, cur.number()?);
            }
            _ => {
                cur.at -= 1;
                return Err(cur.error("expected `relation`, `function` or `constant`"));
            }
        }
        cur.expect(&Tok::Semi)?;
    }
    Ok(builder.build()?)
}
