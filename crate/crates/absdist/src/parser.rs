//! Reader for the Prolog subset accepted by the analyzer.
//!
//! Supported: facts and rules with conjunctive bodies, lists, quoted atoms,
//! integers, the usual comparison and arithmetic operators, and the
//! directives `entry`, `trust success`, `use_module/2` and `module/2`.
//! Disjunction, if-then-else and negation are rejected.

use std::fmt;

use thiserror::Error;

use crate::program::{Clause, EntryDecl, PredKey, Predicate, Program, TrustDecl};
use crate::term::Term;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("duplicate entry declaration for {0}")]
    DuplicateEntry(String),
    #[error("entry declaration for undefined predicate {0}")]
    UndefinedEntry(String),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Var(String),
    Name(String),
    Int(String),
    Punct(char),
    End,
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
    /// `(` immediately follows, so a name is a functor.
    call: bool,
}

const SYMBOL_CHARS: &str = "+-*/\\^<>=~:.?@#&$";

struct Lexer<'a> {
    src: &'a [u8],
    text: &'a str,
    pos: usize,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer { src: text.as_bytes(), text, pos: 0, line: 1, col: 1 }
    }

    fn peek_char(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn peek_at(&self, k: usize) -> Option<char> {
        self.text[self.pos..].chars().nth(k)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek_char()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        ParseError::Syntax { line: self.line, col: self.col, msg: msg.into() }
    }

    fn skip_layout(&mut self) -> Result<(), ParseError> {
        loop {
            match self.peek_char() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('%') => {
                    while let Some(c) = self.bump() {
                        if c == '\n' {
                            break;
                        }
                    }
                }
                Some('/') if self.peek_at(1) == Some('*') => {
                    let (line, col) = (self.line, self.col);
                    self.bump();
                    self.bump();
                    loop {
                        match self.bump() {
                            Some('*') if self.peek_char() == Some('/') => {
                                self.bump();
                                break;
                            }
                            Some(_) => {}
                            None => {
                                return Err(ParseError::Syntax { line, col, msg: "unterminated block comment".into() })
                            }
                        }
                    }
                }
                _ => return Ok(()),
            }
        }
    }

    fn take_while(&mut self, f: impl Fn(char) -> bool) -> String {
        let start = self.pos;
        while self.peek_char().is_some_and(&f) {
            self.bump();
        }
        self.text[start..self.pos].to_string()
    }

    fn next(&mut self) -> Result<Token, ParseError> {
        self.skip_layout()?;
        let (line, col) = (self.line, self.col);
        let Some(c) = self.peek_char() else {
            return Ok(Token { tok: Tok::Eof, line, col, call: false });
        };
        let alnum = |c: char| c.is_ascii_alphanumeric() || c == '_';
        let tok = if c.is_ascii_uppercase() || c == '_' {
            Tok::Var(self.take_while(alnum))
        } else if c.is_ascii_lowercase() {
            Tok::Name(self.take_while(alnum))
        } else if c.is_ascii_digit() {
            Tok::Int(self.take_while(|c| c.is_ascii_digit()))
        } else if c == '\'' {
            self.bump();
            let mut s = String::new();
            loop {
                match self.bump() {
                    Some('\'') if self.peek_char() == Some('\'') => {
                        self.bump();
                        s.push('\'');
                    }
                    Some('\'') => break,
                    Some('\\') => match self.bump() {
                        Some('n') => s.push('\n'),
                        Some('t') => s.push('\t'),
                        Some(c) => s.push(c),
                        None => return Err(ParseError::Syntax { line, col, msg: "unterminated quoted atom".into() }),
                    },
                    Some(c) => s.push(c),
                    None => return Err(ParseError::Syntax { line, col, msg: "unterminated quoted atom".into() }),
                }
            }
            Tok::Name(s)
        } else if c == '.' && self.peek_at(1).is_none_or(|n| n.is_whitespace() || n == '%') {
            self.bump();
            Tok::End
        } else if SYMBOL_CHARS.contains(c) {
            Tok::Name(self.take_while(|c| SYMBOL_CHARS.contains(c)))
        } else if "(),|[]{}".contains(c) {
            self.bump();
            if c == '[' && self.peek_char() == Some(']') {
                self.bump();
                Tok::Name("[]".into())
            } else {
                Tok::Punct(c)
            }
        } else if c == '!' || c == ';' {
            self.bump();
            Tok::Name(c.to_string())
        } else {
            return Err(self.err(format!("unexpected character `{c}`")));
        };
        let call = matches!(tok, Tok::Name(_)) && self.src.get(self.pos) == Some(&b'(');
        Ok(Token { tok, line, col, call })
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Assoc {
    Xfx,
    Xfy,
    Yfx,
}

fn infix_op(name: &str) -> Option<(u32, Assoc)> {
    use Assoc::*;
    Some(match name {
        ":-" => (1200, Xfx),
        ";" => (1100, Xfy),
        "->" => (1050, Xfy),
        "," => (1000, Xfy),
        "=" | "\\=" | "==" | "\\==" | "is" | "<" | ">" | "=<" | ">=" | "=:=" | "=\\=" | "@<" | "@>" | "@=<" | "@>=" => {
            (700, Xfx)
        }
        "+" | "-" => (500, Yfx),
        "*" | "/" | "//" | "mod" | "rem" => (400, Yfx),
        _ => return None,
    })
}

fn prefix_op(name: &str) -> Option<u32> {
    match name {
        ":-" => Some(1200),
        "\\+" => Some(900),
        _ => None,
    }
}

struct Parser<'a> {
    lex: Lexer<'a>,
    tok: Token,
    /// Operators treated as terminators (directive keywords).
    stop: &'static [&'static str],
    fresh: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Result<Self, ParseError> {
        let mut lex = Lexer::new(text);
        let tok = lex.next()?;
        Ok(Parser { lex, tok, stop: &[], fresh: 0 })
    }

    fn advance(&mut self) -> Result<Token, ParseError> {
        let next = self.lex.next()?;
        Ok(std::mem::replace(&mut self.tok, next))
    }

    fn err_at(tok: &Token, msg: impl Into<String>) -> ParseError {
        ParseError::Syntax { line: tok.line, col: tok.col, msg: msg.into() }
    }

    fn expect_punct(&mut self, c: char) -> Result<(), ParseError> {
        if self.tok.tok == Tok::Punct(c) {
            self.advance()?;
            Ok(())
        } else {
            Err(Self::err_at(&self.tok, format!("expected `{c}`")))
        }
    }

    /// The name of the current token when it can act as an infix operator.
    fn infix_here(&self) -> Option<(String, u32, Assoc)> {
        let name = match &self.tok.tok {
            Tok::Name(n) if !self.tok.call => n.clone(),
            Tok::Punct(',') => ",".to_string(),
            _ => return None,
        };
        if self.stop.contains(&name.as_str()) {
            return None;
        }
        infix_op(&name).map(|(p, a)| (name, p, a))
    }

    fn starts_term(tok: &Tok) -> bool {
        matches!(tok, Tok::Var(_) | Tok::Name(_) | Tok::Int(_) | Tok::Punct('(') | Tok::Punct('['))
    }

    fn parse(&mut self, max: u32) -> Result<Term, ParseError> {
        let (mut left, mut left_prec) = self.primary(max)?;
        while let Some((name, prec, assoc)) = self.infix_here() {
            let (lmax, rmax) = match assoc {
                Assoc::Xfx => (prec - 1, prec - 1),
                Assoc::Xfy => (prec - 1, prec),
                Assoc::Yfx => (prec, prec - 1),
            };
            if prec > max || left_prec > lmax {
                break;
            }
            let op = self.advance()?;
            if !Self::starts_term(&self.tok.tok) {
                return Err(Self::err_at(&op, format!("expected a term after `{name}`")));
            }
            let right = self.parse(rmax)?;
            left = Term::compound(name, vec![left, right]);
            left_prec = prec;
        }
        Ok(left)
    }

    fn primary(&mut self, max: u32) -> Result<(Term, u32), ParseError> {
        let tok = self.advance()?;
        let term = match tok.tok.clone() {
            Tok::Var(v) => {
                if v == "_" {
                    self.fresh += 1;
                    Term::var(format!("_G{}", self.fresh))
                } else {
                    Term::var(v)
                }
            }
            Tok::Int(n) => Term::atom(n),
            Tok::Punct('(') => {
                let saved = std::mem::take(&mut self.stop);
                let t = self.parse(1200)?;
                self.stop = saved;
                self.expect_punct(')')?;
                t
            }
            Tok::Punct('[') => self.list()?,
            Tok::Name(name) if tok.call => {
                self.advance()?;
                let mut args = vec![self.arg()?];
                while self.tok.tok == Tok::Punct(',') {
                    self.advance()?;
                    args.push(self.arg()?);
                }
                self.expect_punct(')')?;
                Term::compound(name, args)
            }
            Tok::Name(name) if name == "-" && matches!(self.tok.tok, Tok::Int(_)) => {
                let Tok::Int(n) = self.advance()?.tok else { unreachable!() };
                Term::atom(format!("-{n}"))
            }
            Tok::Name(name) => match prefix_op(&name) {
                Some(p) if p <= max && Self::starts_term(&self.tok.tok) => {
                    let arg = self.parse(if name == ":-" { p - 1 } else { p })?;
                    return Ok((Term::compound(name, vec![arg]), p));
                }
                _ => Term::atom(name),
            },
            Tok::End | Tok::Eof => return Err(Self::err_at(&tok, "unexpected end of clause")),
            Tok::Punct(c) => return Err(Self::err_at(&tok, format!("unexpected `{c}`"))),
        };
        Ok((term, 0))
    }

    fn arg(&mut self) -> Result<Term, ParseError> {
        let saved = std::mem::take(&mut self.stop);
        let t = self.parse(999);
        self.stop = saved;
        t
    }

    fn list(&mut self) -> Result<Term, ParseError> {
        let mut items = vec![self.arg()?];
        while self.tok.tok == Tok::Punct(',') {
            self.advance()?;
            items.push(self.arg()?);
        }
        let tail = if self.tok.tok == Tok::Punct('|') {
            self.advance()?;
            self.arg()?
        } else {
            Term::nil()
        };
        self.expect_punct(']')?;
        Ok(Term::list(items, tail))
    }

    fn end(&mut self) -> Result<(), ParseError> {
        match self.tok.tok {
            Tok::End => {
                self.advance()?;
                Ok(())
            }
            _ => Err(Self::err_at(&self.tok, "expected `.` at end of clause")),
        }
    }
}

fn conjuncts(t: Term, out: &mut Vec<Term>) {
    match t {
        Term::Compound(n, mut args) if n == "," && args.len() == 2 => {
            let right = args.pop().expect("binary");
            let left = args.pop().expect("binary");
            conjuncts(left, out);
            conjuncts(right, out);
        }
        other => out.push(other),
    }
}

fn check_goal(g: &Term, line: usize) -> Result<(), ParseError> {
    let err = |msg: String| ParseError::Syntax { line, col: 1, msg };
    match g {
        Term::Var(v) => Err(err(format!("variable goal `{v}` is not supported"))),
        Term::Atom(a) if a.parse::<i64>().is_ok() => Err(err(format!("number `{a}` is not callable"))),
        Term::Compound(n, args) if args.len() == 2 && (n == ";" || n == "->") => {
            Err(err(format!("`{n}` is not supported in clause bodies")))
        }
        Term::Compound(n, args) if args.len() == 1 && n == "\\+" => Err(err("negation is not supported".into())),
        _ => Ok(()),
    }
}

fn pred_list(t: &Term) -> Vec<PredKey> {
    let mut out = Vec::new();
    let mut cur = t;
    while let Term::Compound(n, args) = cur {
        if n != "." || args.len() != 2 {
            break;
        }
        if let Term::Compound(slash, pa) = &args[0] {
            if slash == "/" && pa.len() == 2 {
                if let (Some((name, 0)), Some((arity, 0))) = (pa[0].functor(), pa[1].functor()) {
                    if let Ok(a) = arity.parse() {
                        out.push(PredKey::new(name, a));
                    }
                }
            }
        }
        cur = &args[1];
    }
    out
}

struct Builder {
    program: Program,
}

impl Builder {
    fn add_clause(&mut self, head: Term, body: Vec<Term>, line: usize) -> Result<(), ParseError> {
        let key = match &head {
            Term::Var(_) => return Err(ParseError::Syntax { line, col: 1, msg: "clause head is a variable".into() }),
            Term::Atom(a) if a.parse::<i64>().is_ok() => {
                return Err(ParseError::Syntax { line, col: 1, msg: "clause head is a number".into() })
            }
            h => PredKey::of(h).expect("callable"),
        };
        for g in &body {
            check_goal(g, line)?;
        }
        let clause = Clause { head, body, line };
        match self.program.predicates.iter_mut().find(|p| p.key == key) {
            Some(p) => p.clauses.push(clause),
            None => self.program.predicates.push(Predicate { key, clauses: vec![clause] }),
        }
        Ok(())
    }
}

fn directive(p: &mut Parser<'_>, b: &mut Builder, colon: &Token) -> Result<(), ParseError> {
    let keyword = match &p.tok.tok {
        Tok::Name(n) if !p.tok.call && (n == "entry" || n == "trust") => Some(n.clone()),
        _ => None,
    };
    let Some(keyword) = keyword else {
        let t = p.parse(1199)?;
        p.end()?;
        if let Term::Compound(n, args) = &t {
            if n == "use_module" && args.len() == 2 {
                b.program.imports.extend(pred_list(&args[1]));
            }
        }
        return Ok(());
    };
    p.advance()?;
    if keyword == "trust" {
        if let Tok::Name(n) = &p.tok.tok {
            if !p.tok.call && (n == "success" || n == "pred") {
                p.advance()?;
            }
        }
    }
    p.stop = &[":", "=>"];
    let head = p.parse(199)?;
    let mut pre = Vec::new();
    let mut post = Vec::new();
    if p.tok.tok == Tok::Name(":".into()) {
        p.advance()?;
        conjuncts(p.parse(1049)?, &mut pre);
    }
    if keyword == "trust" && p.tok.tok == Tok::Name("=>".into()) {
        p.advance()?;
        conjuncts(p.parse(1049)?, &mut post);
    }
    p.stop = &[];
    p.end()?;
    if PredKey::of(&head).is_none() || matches!(head, Term::Atom(ref a) if a.parse::<i64>().is_ok()) {
        return Err(Parser::err_at(colon, format!("{keyword} declaration needs a predicate head")));
    }
    if keyword == "entry" {
        let key = PredKey::of(&head).expect("callable");
        if b.program.entries.iter().any(|e| e.pred() == key) {
            return Err(ParseError::DuplicateEntry(key.to_string()));
        }
        b.program.entries.push(EntryDecl { head, props: pre });
    } else {
        b.program.trusts.push(TrustDecl { head, pre, post });
    }
    Ok(())
}

/// Parses a program. Entry declarations must name a defined predicate.
pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    let mut p = Parser::new(text)?;
    let mut b = Builder { program: Program::default() };
    while p.tok.tok != Tok::Eof {
        p.fresh = 0;
        let start = p.tok.clone();
        if start.tok == Tok::Name(":-".into()) && !start.call {
            p.advance()?;
            directive(&mut p, &mut b, &start)?;
            continue;
        }
        let t = p.parse(1200)?;
        p.end()?;
        match t {
            Term::Compound(n, mut args) if n == ":-" && args.len() == 2 => {
                let body_t = args.pop().expect("binary");
                let head = args.pop().expect("binary");
                let mut body = Vec::new();
                conjuncts(body_t, &mut body);
                b.add_clause(head, body, start.line)?;
            }
            head => b.add_clause(head, Vec::new(), start.line)?,
        }
    }
    for e in &b.program.entries {
        let key = e.pred();
        if b.program.predicate(&key).is_none() && b.program.trust(&key).is_none() {
            return Err(ParseError::UndefinedEntry(key.to_string()));
        }
    }
    Ok(b.program)
}

/// Parses a single term, e.g. a goal for the concrete interpreter.
pub fn parse_term(text: &str) -> Result<Term, ParseError> {
    let mut p = Parser::new(text)?;
    let t = p.parse(1200)?;
    match p.tok.tok {
        Tok::End | Tok::Eof => Ok(t),
        _ => Err(Parser::err_at(&p.tok, "unexpected text after term")),
    }
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Var(s) | Tok::Name(s) | Tok::Int(s) => f.write_str(s),
            Tok::Punct(c) => write!(f, "{c}"),
            Tok::End => f.write_str("."),
            Tok::Eof => f.write_str("end of file"),
        }
    }
}
