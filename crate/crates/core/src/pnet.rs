//! The `.pnet` textual model format: a line-oriented language for declaring
//! high-level and coloured nets, plus a canonical printer and a model-fusion
//! helper used to assemble composite nets.
//!
//! ```text
//! net "<name>" kind <hlpn|cpn> [timed]
//! colset <Name> = enum { a b c } [timed]
//! colset <Name> = product A * B [timed]
//! var <name> : <ColourSet>
//! place <Name> : <ColourSet> [init n'sym[@+t] ++ ...]
//! trans <Name> [guard <expr>] [kind source budget <n>]
//! arc <Node> -> <Node> : <expr> [@+<delay>]
//! arc <Place> -o <Trans> [: <threshold>]
//! bind <trans> = <registered-function-name>
//! ```
//!
//! Comments run from `#` to end of line. Names containing spaces are
//! double-quoted. Guards are conjunctions (`and`) of `v == sym`, `v != sym`,
//! and `v in { syms }`. Output-arc expressions are variables, symbols,
//! tuples, applications of registered host functions, or `seq(a, b, ...)`
//! on source transitions (the k-th firing emits the k-th symbol). The `-o`
//! form declares an inhibitor arc (high-level nets only), and `bind` wraps
//! every output arc of a transition in the named function.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::cpn::{
    CpnBuildError, CpnModel, CpnPlace, CpnTrans, EvalError, Expr, Guard, InputArc, OutputArc,
    Pattern, eval_expr,
};
use crate::hlpn::{BuildError, Net, NetBuilder, RuleError, RuleOutput, TransKind};
use crate::registry::FnRegistry;
use crate::value::{ColourKind, ColourSet, Value};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("{line}:{col}: expected {expected}")]
    SyntaxError {
        line: u32,
        col: u32,
        expected: String,
    },
    #[error("{line}:{col}: colour set {name} is not declared")]
    UndeclaredColourSet { line: u32, col: u32, name: String },
    #[error("{line}:{col}: {name} is neither a declared variable nor a known symbol")]
    UndeclaredVariable { line: u32, col: u32, name: String },
    #[error("{line}:{col}: place {place} is untimed but its marking carries a timestamp")]
    TimedTokenInUntimedPlace { line: u32, col: u32, place: String },
    #[error("{line}:{col}: {name} does not name a declared node")]
    UnknownNode { line: u32, col: u32, name: String },
    #[error("{line}:{col}: {name} is already declared")]
    DuplicateName { line: u32, col: u32, name: String },
    #[error("function {name} is not registered")]
    UnknownFunction { name: String },
    #[error("arc {from} -> {to} is invalid: {why}")]
    InvalidArc { from: String, to: String, why: String },
    #[error("model is not well-formed: {0}")]
    Cpn(#[from] CpnBuildError),
    #[error("model is not well-formed: {0}")]
    Hlpn(#[from] BuildError),
}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Quoted(String),
    Int(u64),
    Arrow,
    Inhibit,
    PlusPlus,
    AtPlus,
    EqEq,
    NotEq,
    Eq,
    Colon,
    Star,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Comma,
    Tick,
    Newline,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Quoted(s) => format!("\"{s}\""),
            Tok::Int(n) => format!("`{n}`"),
            Tok::Arrow => "`->`".into(),
            Tok::Inhibit => "`-o`".into(),
            Tok::PlusPlus => "`++`".into(),
            Tok::AtPlus => "`@+`".into(),
            Tok::EqEq => "`==`".into(),
            Tok::NotEq => "`!=`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Star => "`*`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Tick => "`'`".into(),
            Tok::Newline => "end of line".into(),
            Tok::Eof => "end of file".into(),
        }
    }
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: u32,
    col: u32,
}

fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let mut line: u32 = 1;
    let mut col: u32 = 1;
    let mut chars = src.chars().peekable();

    macro_rules! push {
        ($tok:expr, $l:expr, $c:expr) => {
            out.push(Token {
                tok: $tok,
                line: $l,
                col: $c,
            })
        };
    }

    while let Some(&c) = chars.peek() {
        let (tl, tc) = (line, col);
        match c {
            '\n' => {
                chars.next();
                push!(Tok::Newline, tl, tc);
                line += 1;
                col = 1;
            }
            ' ' | '\t' | '\r' => {
                chars.next();
                col += 1;
            }
            '#' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                    col += 1;
                }
            }
            '"' => {
                chars.next();
                col += 1;
                let mut s = String::new();
                loop {
                    match chars.next() {
                        Some('"') => {
                            col += 1;
                            break;
                        }
                        Some('\n') | None => {
                            return Err(ParseError::SyntaxError {
                                line: tl,
                                col: tc,
                                expected: "closing `\"`".into(),
                            })
                        }
                        Some(c) => {
                            s.push(c);
                            col += 1;
                        }
                    }
                }
                push!(Tok::Quoted(s), tl, tc);
            }
            c if c.is_ascii_digit() => {
                let mut n: u64 = 0;
                while let Some(&d) = chars.peek() {
                    if let Some(v) = d.to_digit(10) {
                        n = n
                            .checked_mul(10)
                            .and_then(|n| n.checked_add(v as u64))
                            .ok_or(ParseError::SyntaxError {
                                line: tl,
                                col: tc,
                                expected: "a number that fits in 64 bits".into(),
                            })?;
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                push!(Tok::Int(n), tl, tc);
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_ascii_alphanumeric() || d == '_' {
                        s.push(d);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                push!(Tok::Ident(s), tl, tc);
            }
            '-' => {
                chars.next();
                col += 1;
                match chars.peek() {
                    Some('>') => {
                        chars.next();
                        col += 1;
                        push!(Tok::Arrow, tl, tc);
                    }
                    Some('o') => {
                        chars.next();
                        col += 1;
                        push!(Tok::Inhibit, tl, tc);
                    }
                    _ => {
                        return Err(ParseError::SyntaxError {
                            line: tl,
                            col: tc,
                            expected: "`->` or `-o`".into(),
                        })
                    }
                }
            }
            '+' => {
                chars.next();
                col += 1;
                if chars.peek() == Some(&'+') {
                    chars.next();
                    col += 1;
                    push!(Tok::PlusPlus, tl, tc);
                } else {
                    return Err(ParseError::SyntaxError {
                        line: tl,
                        col: tc,
                        expected: "`++`".into(),
                    });
                }
            }
            '@' => {
                chars.next();
                col += 1;
                if chars.peek() == Some(&'+') {
                    chars.next();
                    col += 1;
                    push!(Tok::AtPlus, tl, tc);
                } else {
                    return Err(ParseError::SyntaxError {
                        line: tl,
                        col: tc,
                        expected: "`@+`".into(),
                    });
                }
            }
            '=' => {
                chars.next();
                col += 1;
                if chars.peek() == Some(&'=') {
                    chars.next();
                    col += 1;
                    push!(Tok::EqEq, tl, tc);
                } else {
                    push!(Tok::Eq, tl, tc);
                }
            }
            '!' => {
                chars.next();
                col += 1;
                if chars.peek() == Some(&'=') {
                    chars.next();
                    col += 1;
                    push!(Tok::NotEq, tl, tc);
                } else {
                    return Err(ParseError::SyntaxError {
                        line: tl,
                        col: tc,
                        expected: "`!=`".into(),
                    });
                }
            }
            ':' => {
                chars.next();
                col += 1;
                push!(Tok::Colon, tl, tc);
            }
            '*' => {
                chars.next();
                col += 1;
                push!(Tok::Star, tl, tc);
            }
            '{' => {
                chars.next();
                col += 1;
                push!(Tok::LBrace, tl, tc);
            }
            '}' => {
                chars.next();
                col += 1;
                push!(Tok::RBrace, tl, tc);
            }
            '(' => {
                chars.next();
                col += 1;
                push!(Tok::LParen, tl, tc);
            }
            ')' => {
                chars.next();
                col += 1;
                push!(Tok::RParen, tl, tc);
            }
            ',' => {
                chars.next();
                col += 1;
                push!(Tok::Comma, tl, tc);
            }
            '\'' => {
                chars.next();
                col += 1;
                push!(Tok::Tick, tl, tc);
            }
            _ => {
                return Err(ParseError::SyntaxError {
                    line: tl,
                    col: tc,
                    expected: "a token".into(),
                })
            }
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

// ---------------------------------------------------------------------------
// Raw syntax tree
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    Hlpn,
    Cpn,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RawColourDef {
    Enum(Vec<String>),
    Product(Vec<String>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawColset {
    pub name: String,
    pub def: RawColourDef,
    pub timed: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawInit {
    pub count: u64,
    pub symbol: String,
    pub delay: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawPlace {
    pub name: String,
    pub colset: String,
    pub init: Vec<RawInit>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RawGuard {
    Eq(String, String),
    Ne(String, String),
    In(String, Vec<String>),
    All(Vec<RawGuard>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawTrans {
    pub name: String,
    pub guard: Option<RawGuard>,
    pub source_budget: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RawExpr {
    Name(String),
    Call { name: String, args: Vec<RawExpr> },
    Tuple(Vec<RawExpr>),
    Seq(Vec<String>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RawArcKind {
    Normal { expr: RawExpr, delay: u64 },
    Inhibitor { threshold: u32 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawArc {
    pub from: String,
    pub to: String,
    pub kind: RawArcKind,
}

/// The syntax tree of one model file, with `bind` sugar already applied.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawModel {
    pub name: String,
    pub kind: ModelKind,
    pub timed: bool,
    pub colsets: Vec<RawColset>,
    pub vars: Vec<(String, String)>,
    pub places: Vec<RawPlace>,
    pub trans: Vec<RawTrans>,
    pub arcs: Vec<RawArc>,
}

impl RawModel {
    pub fn is_var(&self, name: &str) -> bool {
        self.vars.iter().any(|(v, _)| v == name)
    }

    pub fn is_symbol(&self, name: &str) -> bool {
        self.colsets.iter().any(|cs| match &cs.def {
            RawColourDef::Enum(symbols) => symbols.iter().any(|s| s == name),
            RawColourDef::Product(_) => false,
        })
    }

    fn colset(&self, name: &str) -> Option<&RawColset> {
        self.colsets.iter().find(|cs| cs.name == name)
    }
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos.min(self.toks.len() - 1)]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos.min(self.toks.len() - 1)].clone();
        if self.pos < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, expected: &str) -> ParseError {
        let t = self.peek();
        ParseError::SyntaxError {
            line: t.line,
            col: t.col,
            expected: expected.to_string(),
        }
    }

    fn eat(&mut self, tok: Tok) -> Result<Token, ParseError> {
        if self.peek().tok == tok {
            Ok(self.next())
        } else {
            Err(self.err(&tok.describe()))
        }
    }

    fn eat_keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        match &self.peek().tok {
            Tok::Ident(s) if s == kw => {
                self.next();
                Ok(())
            }
            _ => Err(self.err(&format!("`{kw}`"))),
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(s) if s == kw)
    }

    /// A name is a bare identifier or a quoted string.
    fn name(&mut self, what: &str) -> Result<(String, u32, u32), ParseError> {
        let t = self.peek().clone();
        match &t.tok {
            Tok::Ident(s) => {
                self.next();
                Ok((s.clone(), t.line, t.col))
            }
            Tok::Quoted(s) => {
                self.next();
                Ok((s.clone(), t.line, t.col))
            }
            _ => Err(self.err(what)),
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, u32, u32), ParseError> {
        let t = self.peek().clone();
        match &t.tok {
            Tok::Ident(s) => {
                self.next();
                Ok((s.clone(), t.line, t.col))
            }
            _ => Err(self.err(what)),
        }
    }

    fn int(&mut self, what: &str) -> Result<u64, ParseError> {
        match self.peek().tok {
            Tok::Int(n) => {
                self.next();
                Ok(n)
            }
            _ => Err(self.err(what)),
        }
    }

    fn end_of_line(&mut self) -> Result<(), ParseError> {
        match self.peek().tok {
            Tok::Newline => {
                self.next();
                Ok(())
            }
            Tok::Eof => Ok(()),
            _ => Err(self.err("end of line")),
        }
    }

    fn skip_blank_lines(&mut self) {
        while self.peek().tok == Tok::Newline {
            self.next();
        }
    }
}

/// Parses source into the raw syntax tree without resolving functions.
pub fn parse_raw(src: &str) -> Result<RawModel, ParseError> {
    let toks = tokenize(src)?;
    let mut p = Parser { toks, pos: 0 };

    p.skip_blank_lines();
    p.eat_keyword("net")
        .map_err(|_| p.err("net declaration"))?;
    let name = match p.next() {
        Token {
            tok: Tok::Quoted(s),
            ..
        } => s,
        _ => {
            p.pos = p.pos.saturating_sub(1);
            return Err(p.err("quoted model name"));
        }
    };
    p.eat_keyword("kind")?;
    let (kind_name, kl, kc) = p.ident("`hlpn` or `cpn`")?;
    let kind = match kind_name.as_str() {
        "hlpn" => ModelKind::Hlpn,
        "cpn" => ModelKind::Cpn,
        _ => {
            return Err(ParseError::SyntaxError {
                line: kl,
                col: kc,
                expected: "`hlpn` or `cpn`".into(),
            })
        }
    };
    let timed = if p.at_keyword("timed") {
        p.next();
        true
    } else {
        false
    };
    p.end_of_line()?;

    let mut model = RawModel {
        name,
        kind,
        timed,
        colsets: Vec::new(),
        vars: Vec::new(),
        places: Vec::new(),
        trans: Vec::new(),
        arcs: Vec::new(),
    };
    // bind lines collected as (trans, function, line, col) and applied last
    let mut binds: Vec<(String, String, u32, u32)> = Vec::new();

    loop {
        p.skip_blank_lines();
        if p.peek().tok == Tok::Eof {
            break;
        }
        let (stmt, line, col) = p.ident("a declaration (colset, var, place, trans, arc, bind)")?;
        match stmt.as_str() {
            "colset" => parse_colset(&mut p, &mut model)?,
            "var" => parse_var(&mut p, &mut model)?,
            "place" => parse_place(&mut p, &mut model)?,
            "trans" => parse_trans(&mut p, &mut model)?,
            "arc" => parse_arc(&mut p, &mut model)?,
            "bind" => {
                let (trans, _, _) = p.name("transition name")?;
                p.eat(Tok::Eq)?;
                let (func, fl, fc) = p.ident("function name")?;
                p.end_of_line()?;
                binds.push((trans, func, fl, fc));
            }
            _ => {
                return Err(ParseError::SyntaxError {
                    line,
                    col,
                    expected: "a declaration (colset, var, place, trans, arc, bind)".into(),
                })
            }
        }
    }

    for (trans, func, line, col) in binds {
        if !model.trans.iter().any(|t| t.name == trans) {
            return Err(ParseError::UnknownNode {
                line,
                col,
                name: trans,
            });
        }
        for arc in model.arcs.iter_mut().filter(|a| a.from == trans) {
            if let RawArcKind::Normal { expr, .. } = &mut arc.kind {
                let inner = std::mem::replace(expr, RawExpr::Name(String::new()));
                *expr = match inner {
                    RawExpr::Tuple(items) => RawExpr::Call {
                        name: func.clone(),
                        args: items,
                    },
                    other => RawExpr::Call {
                        name: func.clone(),
                        args: vec![other],
                    },
                };
            }
        }
    }

    validate_names(&model)?;
    Ok(model)
}

fn parse_colset(p: &mut Parser, model: &mut RawModel) -> Result<(), ParseError> {
    let (name, line, col) = p.name("colour set name")?;
    if model.colset(&name).is_some() {
        return Err(ParseError::DuplicateName { line, col, name });
    }
    p.eat(Tok::Eq)?;
    let (form, fl, fc) = p.ident("`enum` or `product`")?;
    let def = match form.as_str() {
        "enum" => {
            p.eat(Tok::LBrace)?;
            let mut symbols = Vec::new();
            while p.peek().tok != Tok::RBrace {
                let (sym, _, _) = p.ident("a symbol")?;
                symbols.push(sym);
            }
            p.eat(Tok::RBrace)?;
            if symbols.is_empty() {
                return Err(ParseError::SyntaxError {
                    line: fl,
                    col: fc,
                    expected: "at least one symbol".into(),
                });
            }
            RawColourDef::Enum(symbols)
        }
        "product" => {
            let mut components = Vec::new();
            loop {
                let (comp, cl, cc) = p.name("component colour set")?;
                if model.colset(&comp).is_none() {
                    return Err(ParseError::UndeclaredColourSet {
                        line: cl,
                        col: cc,
                        name: comp,
                    });
                }
                components.push(comp);
                if p.peek().tok == Tok::Star {
                    p.next();
                } else {
                    break;
                }
            }
            if components.len() < 2 {
                return Err(ParseError::SyntaxError {
                    line: fl,
                    col: fc,
                    expected: "at least two product components".into(),
                });
            }
            RawColourDef::Product(components)
        }
        _ => {
            return Err(ParseError::SyntaxError {
                line: fl,
                col: fc,
                expected: "`enum` or `product`".into(),
            })
        }
    };
    let timed = if p.at_keyword("timed") {
        p.next();
        true
    } else {
        false
    };
    p.end_of_line()?;
    model.colsets.push(RawColset { name, def, timed });
    Ok(())
}

fn parse_var(p: &mut Parser, model: &mut RawModel) -> Result<(), ParseError> {
    let (name, line, col) = p.ident("variable name")?;
    if model.is_var(&name) {
        return Err(ParseError::DuplicateName { line, col, name });
    }
    p.eat(Tok::Colon)?;
    let (colset, cl, cc) = p.name("colour set name")?;
    if model.colset(&colset).is_none() {
        return Err(ParseError::UndeclaredColourSet {
            line: cl,
            col: cc,
            name: colset,
        });
    }
    p.end_of_line()?;
    model.vars.push((name, colset));
    Ok(())
}

fn parse_place(p: &mut Parser, model: &mut RawModel) -> Result<(), ParseError> {
    let (name, line, col) = p.name("place name")?;
    if model.places.iter().any(|pl| pl.name == name)
        || model.trans.iter().any(|t| t.name == name)
    {
        return Err(ParseError::DuplicateName { line, col, name });
    }
    p.eat(Tok::Colon)?;
    let (colset, cl, cc) = p.name("colour set name")?;
    let Some(cs) = model.colset(&colset) else {
        return Err(ParseError::UndeclaredColourSet {
            line: cl,
            col: cc,
            name: colset,
        });
    };
    let place_timed = cs.timed;
    let mut init = Vec::new();
    if p.at_keyword("init") {
        p.next();
        loop {
            let count = p.int("token count")?;
            p.eat(Tok::Tick)?;
            let (symbol, _, _) = p.ident("a symbol")?;
            let mut delay = 0;
            if p.peek().tok == Tok::AtPlus {
                let at = p.next();
                delay = p.int("a timestamp")?;
                if !place_timed {
                    return Err(ParseError::TimedTokenInUntimedPlace {
                        line: at.line,
                        col: at.col,
                        place: name,
                    });
                }
            }
            init.push(RawInit {
                count,
                symbol,
                delay,
            });
            if p.peek().tok == Tok::PlusPlus {
                p.next();
            } else {
                break;
            }
        }
    }
    p.end_of_line()?;
    model.places.push(RawPlace { name, colset, init });
    Ok(())
}

fn parse_trans(p: &mut Parser, model: &mut RawModel) -> Result<(), ParseError> {
    let (name, line, col) = p.name("transition name")?;
    if model.places.iter().any(|pl| pl.name == name)
        || model.trans.iter().any(|t| t.name == name)
    {
        return Err(ParseError::DuplicateName { line, col, name });
    }
    let mut guard = None;
    let mut source_budget = None;
    loop {
        if p.at_keyword("guard") {
            if guard.is_some() {
                return Err(p.err("at most one guard clause"));
            }
            p.next();
            guard = Some(parse_guard(p)?);
        } else if p.at_keyword("kind") {
            p.next();
            p.eat_keyword("source")?;
            p.eat_keyword("budget")?;
            let budget = p.int("a firing budget")?;
            let budget = u32::try_from(budget).map_err(|_| p.err("a budget below 2^32"))?;
            source_budget = Some(budget);
        } else {
            break;
        }
    }
    p.end_of_line()?;
    model.trans.push(RawTrans {
        name,
        guard,
        source_budget,
    });
    Ok(())
}

fn parse_guard(p: &mut Parser) -> Result<RawGuard, ParseError> {
    let mut atoms = vec![parse_guard_atom(p)?];
    while p.at_keyword("and") {
        p.next();
        atoms.push(parse_guard_atom(p)?);
    }
    Ok(if atoms.len() == 1 {
        atoms.pop().unwrap()
    } else {
        RawGuard::All(atoms)
    })
}

fn parse_guard_atom(p: &mut Parser) -> Result<RawGuard, ParseError> {
    let (var, _, _) = p.ident("a variable")?;
    match p.peek().tok {
        Tok::EqEq => {
            p.next();
            let (sym, _, _) = p.ident("a symbol")?;
            Ok(RawGuard::Eq(var, sym))
        }
        Tok::NotEq => {
            p.next();
            let (sym, _, _) = p.ident("a symbol")?;
            Ok(RawGuard::Ne(var, sym))
        }
        Tok::Ident(ref s) if s == "in" => {
            p.next();
            p.eat(Tok::LBrace)?;
            let mut symbols = Vec::new();
            while p.peek().tok != Tok::RBrace {
                let (sym, _, _) = p.ident("a symbol")?;
                symbols.push(sym);
            }
            p.eat(Tok::RBrace)?;
            Ok(RawGuard::In(var, symbols))
        }
        _ => Err(p.err("`==`, `!=`, or `in`")),
    }
}

fn parse_arc(p: &mut Parser, model: &mut RawModel) -> Result<(), ParseError> {
    let (from, _, _) = p.name("a node name")?;
    let inhibitor = match p.peek().tok {
        Tok::Arrow => {
            p.next();
            false
        }
        Tok::Inhibit => {
            p.next();
            true
        }
        _ => return Err(p.err("`->` or `-o`")),
    };
    let (to, _, _) = p.name("a node name")?;
    let kind = if inhibitor {
        let threshold = if p.peek().tok == Tok::Colon {
            p.next();
            let n = p.int("an inhibition threshold")?;
            u32::try_from(n).map_err(|_| p.err("a threshold below 2^32"))?
        } else {
            1
        };
        RawArcKind::Inhibitor { threshold }
    } else {
        p.eat(Tok::Colon)?;
        let expr = parse_expr(p)?;
        let delay = if p.peek().tok == Tok::AtPlus {
            p.next();
            p.int("a delay")?
        } else {
            0
        };
        RawArcKind::Normal { expr, delay }
    };
    p.end_of_line()?;
    model.arcs.push(RawArc { from, to, kind });
    Ok(())
}

fn parse_expr(p: &mut Parser) -> Result<RawExpr, ParseError> {
    match p.peek().tok.clone() {
        Tok::LParen => {
            p.next();
            let mut items = vec![parse_expr(p)?];
            while p.peek().tok == Tok::Comma {
                p.next();
                items.push(parse_expr(p)?);
            }
            p.eat(Tok::RParen)?;
            if items.len() < 2 {
                return Err(p.err("a tuple of at least two expressions"));
            }
            Ok(RawExpr::Tuple(items))
        }
        Tok::Ident(name) => {
            p.next();
            if p.peek().tok != Tok::LParen {
                return Ok(RawExpr::Name(name));
            }
            p.next();
            if name == "seq" {
                let mut symbols = Vec::new();
                loop {
                    let (sym, _, _) = p.ident("a symbol")?;
                    symbols.push(sym);
                    match p.peek().tok {
                        Tok::Comma => {
                            p.next();
                        }
                        _ => break,
                    }
                }
                p.eat(Tok::RParen)?;
                Ok(RawExpr::Seq(symbols))
            } else {
                let mut args = vec![parse_expr(p)?];
                while p.peek().tok == Tok::Comma {
                    p.next();
                    args.push(parse_expr(p)?);
                }
                p.eat(Tok::RParen)?;
                Ok(RawExpr::Call { name, args })
            }
        }
        _ => Err(p.err("an expression")),
    }
}

/// Every bare name in an arc expression or guard must be a declared
/// variable or a symbol of some enumeration colour set.
fn validate_names(model: &RawModel) -> Result<(), ParseError> {
    fn check_expr(model: &RawModel, expr: &RawExpr) -> Result<(), ParseError> {
        match expr {
            RawExpr::Name(name) => {
                if model.is_var(name) || model.is_symbol(name) {
                    Ok(())
                } else {
                    Err(ParseError::UndeclaredVariable {
                        line: 0,
                        col: 0,
                        name: name.clone(),
                    })
                }
            }
            RawExpr::Call { args, .. } => args.iter().try_for_each(|a| check_expr(model, a)),
            RawExpr::Tuple(items) => items.iter().try_for_each(|a| check_expr(model, a)),
            RawExpr::Seq(symbols) => {
                for sym in symbols {
                    if !model.is_symbol(sym) {
                        return Err(ParseError::UndeclaredVariable {
                            line: 0,
                            col: 0,
                            name: sym.clone(),
                        });
                    }
                }
                Ok(())
            }
        }
    }
    fn check_guard(model: &RawModel, guard: &RawGuard) -> Result<(), ParseError> {
        let var_ok = |name: &str| {
            if model.is_var(name) {
                Ok(())
            } else {
                Err(ParseError::UndeclaredVariable {
                    line: 0,
                    col: 0,
                    name: name.to_string(),
                })
            }
        };
        let sym_ok = |name: &str| {
            if model.is_symbol(name) {
                Ok(())
            } else {
                Err(ParseError::UndeclaredVariable {
                    line: 0,
                    col: 0,
                    name: name.to_string(),
                })
            }
        };
        match guard {
            RawGuard::Eq(v, s) | RawGuard::Ne(v, s) => {
                var_ok(v)?;
                sym_ok(s)
            }
            RawGuard::In(v, symbols) => {
                var_ok(v)?;
                symbols.iter().try_for_each(|s| sym_ok(s))
            }
            RawGuard::All(parts) => parts.iter().try_for_each(|g| check_guard(model, g)),
        }
    }

    for arc in &model.arcs {
        if let RawArcKind::Normal { expr, .. } = &arc.kind {
            check_expr(model, expr)?;
        }
    }
    for t in &model.trans {
        if let Some(guard) = &t.guard {
            check_guard(model, guard)?;
        }
    }
    for place in &model.places {
        for init in &place.init {
            if !model.is_symbol(&init.symbol) {
                return Err(ParseError::UndeclaredVariable {
                    line: 0,
                    col: 0,
                    name: init.symbol.clone(),
                });
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Compilation
// ---------------------------------------------------------------------------

/// A compiled model: either a high-level net or a coloured net.
#[derive(Clone, Debug)]
pub enum ParsedModel {
    Hlpn(Net),
    Cpn(CpnModel),
}

impl ParsedModel {
    pub fn name(&self) -> &str {
        match self {
            ParsedModel::Hlpn(net) => net.name(),
            ParsedModel::Cpn(model) => &model.name,
        }
    }
}

/// Parses and compiles a model, resolving function names in `registry`.
pub fn parse_model(src: &str, registry: &FnRegistry) -> Result<ParsedModel, ParseError> {
    let raw = parse_raw(src)?;
    compile(&raw, registry)
}

/// Compiles a raw syntax tree against a function registry.
pub fn compile(raw: &RawModel, registry: &FnRegistry) -> Result<ParsedModel, ParseError> {
    match raw.kind {
        ModelKind::Hlpn => compile_hlpn(raw, registry).map(ParsedModel::Hlpn),
        ModelKind::Cpn => compile_cpn(raw, registry).map(ParsedModel::Cpn),
    }
}

fn build_colours(raw: &RawModel) -> Result<Vec<ColourSet>, ParseError> {
    let index_of = |name: &str| {
        raw.colsets
            .iter()
            .position(|cs| cs.name == name)
            .ok_or_else(|| ParseError::UndeclaredColourSet {
                line: 0,
                col: 0,
                name: name.to_string(),
            })
    };
    raw.colsets
        .iter()
        .map(|cs| {
            let kind = match &cs.def {
                RawColourDef::Enum(symbols) => ColourKind::Enum(symbols.clone()),
                RawColourDef::Product(components) => {
                    let idx: Result<Vec<usize>, ParseError> =
                        components.iter().map(|c| index_of(c)).collect();
                    ColourKind::Product(idx?)
                }
            };
            Ok(ColourSet {
                name: cs.name.clone(),
                kind,
                timed: cs.timed,
            })
        })
        .collect()
}

fn compile_expr(
    raw: &RawModel,
    registry: &FnRegistry,
    expr: &RawExpr,
) -> Result<Expr, ParseError> {
    match expr {
        RawExpr::Name(name) => {
            if raw.is_var(name) {
                Ok(Expr::Var(name.clone()))
            } else if raw.is_symbol(name) {
                Ok(Expr::Sym(name.clone()))
            } else {
                Err(ParseError::UndeclaredVariable {
                    line: 0,
                    col: 0,
                    name: name.clone(),
                })
            }
        }
        RawExpr::Call { name, args } => {
            let func = registry
                .get(name)
                .ok_or_else(|| ParseError::UnknownFunction { name: name.clone() })?;
            let args: Result<Vec<Expr>, ParseError> = args
                .iter()
                .map(|a| compile_expr(raw, registry, a))
                .collect();
            Ok(Expr::Apply {
                name: name.clone(),
                func,
                args: args?,
            })
        }
        RawExpr::Tuple(items) => {
            let items: Result<Vec<Expr>, ParseError> = items
                .iter()
                .map(|a| compile_expr(raw, registry, a))
                .collect();
            Ok(Expr::Tuple(items?))
        }
        RawExpr::Seq(symbols) => Ok(Expr::Seq(symbols.clone())),
    }
}

fn compile_guard(guard: &RawGuard) -> Guard {
    match guard {
        RawGuard::Eq(var, sym) => Guard::Eq(var.clone(), Value::Sym(sym.clone())),
        RawGuard::Ne(var, sym) => Guard::Ne(var.clone(), Value::Sym(sym.clone())),
        RawGuard::In(var, symbols) => Guard::In(
            var.clone(),
            symbols.iter().map(|s| Value::Sym(s.clone())).collect(),
        ),
        RawGuard::All(parts) => Guard::All(parts.iter().map(compile_guard).collect()),
    }
}

fn compile_pattern(raw: &RawModel, expr: &RawExpr) -> Result<Pattern, ParseError> {
    match expr {
        RawExpr::Name(name) => {
            if raw.is_var(name) {
                Ok(Pattern::Var(name.clone()))
            } else if raw.is_symbol(name) {
                Ok(Pattern::Sym(name.clone()))
            } else {
                Err(ParseError::UndeclaredVariable {
                    line: 0,
                    col: 0,
                    name: name.clone(),
                })
            }
        }
        RawExpr::Tuple(items) => {
            let parts: Result<Vec<Pattern>, ParseError> =
                items.iter().map(|i| compile_pattern(raw, i)).collect();
            Ok(Pattern::Tuple(parts?))
        }
        RawExpr::Call { name, .. } => Err(ParseError::InvalidArc {
            from: String::new(),
            to: String::new(),
            why: format!("input arcs carry patterns, not the application {name}(...)"),
        }),
        RawExpr::Seq(_) => Err(ParseError::InvalidArc {
            from: String::new(),
            to: String::new(),
            why: "input arcs carry patterns, not seq(...)".into(),
        }),
    }
}

fn node_role(raw: &RawModel, name: &str) -> Option<NodeRole> {
    if raw.places.iter().any(|p| p.name == name) {
        Some(NodeRole::Place)
    } else if raw.trans.iter().any(|t| t.name == name) {
        Some(NodeRole::Trans)
    } else {
        None
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum NodeRole {
    Place,
    Trans,
}

fn compile_cpn(raw: &RawModel, registry: &FnRegistry) -> Result<CpnModel, ParseError> {
    let colours = build_colours(raw)?;
    let colour_index = |name: &str| {
        raw.colsets
            .iter()
            .position(|cs| cs.name == name)
            .ok_or_else(|| ParseError::UndeclaredColourSet {
                line: 0,
                col: 0,
                name: name.to_string(),
            })
    };

    let vars: Result<Vec<(String, usize)>, ParseError> = raw
        .vars
        .iter()
        .map(|(name, colset)| Ok((name.clone(), colour_index(colset)?)))
        .collect();

    let places: Result<Vec<CpnPlace>, ParseError> = raw
        .places
        .iter()
        .map(|p| {
            Ok(CpnPlace {
                name: p.name.clone(),
                colour: colour_index(&p.colset)?,
                init: p
                    .init
                    .iter()
                    .map(|i| (Value::Sym(i.symbol.clone()), i.count, i.delay))
                    .collect(),
            })
        })
        .collect();

    let transitions: Vec<CpnTrans> = raw
        .trans
        .iter()
        .map(|t| CpnTrans {
            name: t.name.clone(),
            guard: t.guard.as_ref().map(compile_guard).unwrap_or(Guard::True),
        })
        .collect();
    if let Some(t) = raw.trans.iter().find(|t| t.source_budget.is_some()) {
        return Err(ParseError::InvalidArc {
            from: t.name.clone(),
            to: String::new(),
            why: "source transitions are a high-level net feature".into(),
        });
    }

    let mut input_arcs = Vec::new();
    let mut output_arcs = Vec::new();
    for arc in &raw.arcs {
        let from_role = node_role(raw, &arc.from).ok_or_else(|| ParseError::UnknownNode {
            line: 0,
            col: 0,
            name: arc.from.clone(),
        })?;
        let to_role = node_role(raw, &arc.to).ok_or_else(|| ParseError::UnknownNode {
            line: 0,
            col: 0,
            name: arc.to.clone(),
        })?;
        let invalid = |why: &str| ParseError::InvalidArc {
            from: arc.from.clone(),
            to: arc.to.clone(),
            why: why.to_string(),
        };
        match &arc.kind {
            RawArcKind::Inhibitor { .. } => {
                return Err(invalid("inhibitor arcs are a high-level net feature"))
            }
            RawArcKind::Normal { expr, delay } => match (from_role, to_role) {
                (NodeRole::Place, NodeRole::Trans) => {
                    if *delay > 0 {
                        return Err(invalid("input arcs cannot declare a delay"));
                    }
                    let pattern = compile_pattern(raw, expr).map_err(|e| match e {
                        ParseError::InvalidArc { why, .. } => ParseError::InvalidArc {
                            from: arc.from.clone(),
                            to: arc.to.clone(),
                            why,
                        },
                        other => other,
                    })?;
                    input_arcs.push(InputArc {
                        place: raw.places.iter().position(|p| p.name == arc.from).unwrap(),
                        trans: raw.trans.iter().position(|t| t.name == arc.to).unwrap(),
                        pattern,
                    });
                }
                (NodeRole::Trans, NodeRole::Place) => {
                    output_arcs.push(OutputArc {
                        trans: raw.trans.iter().position(|t| t.name == arc.from).unwrap(),
                        place: raw.places.iter().position(|p| p.name == arc.to).unwrap(),
                        expr: compile_expr(raw, registry, expr)?,
                        delay: *delay,
                    });
                }
                _ => return Err(invalid("arcs must connect a place and a transition")),
            },
        }
    }

    CpnModel {
        name: raw.name.clone(),
        timed: raw.timed,
        colours,
        vars: vars?,
        places: places?,
        transitions,
        input_arcs,
        output_arcs,
    }
    .validate()
    .map_err(ParseError::from)
}

fn compile_hlpn(raw: &RawModel, registry: &FnRegistry) -> Result<Net, ParseError> {
    if raw.timed
        || raw.colsets.iter().any(|cs| cs.timed)
        || raw
            .arcs
            .iter()
            .any(|a| matches!(&a.kind, RawArcKind::Normal { delay, .. } if *delay > 0))
    {
        return Err(ParseError::InvalidArc {
            from: raw.name.clone(),
            to: String::new(),
            why: "timed inscriptions are a coloured net feature".into(),
        });
    }

    let colours = build_colours(raw)?;
    let mut builder = NetBuilder::new(&raw.name);
    for cs in colours {
        builder.colour(cs);
    }
    for place in &raw.places {
        let colour = builder
            .colour_index(&place.colset)
            .ok_or_else(|| ParseError::UndeclaredColourSet {
                line: 0,
                col: 0,
                name: place.colset.clone(),
            })?;
        let pid = builder.place(&place.name, colour);
        for init in &place.init {
            builder.init(pid, Value::Sym(init.symbol.clone()), init.count);
        }
    }

    // compiled output expressions and guards per transition
    type RuleParts = (Option<Guard>, Vec<(String, Expr)>);
    let mut rule_parts: Vec<RuleParts> = Vec::new();
    for t in &raw.trans {
        let kind = match t.source_budget {
            Some(budget) => TransKind::Source { budget },
            None => TransKind::Normal,
        };
        builder.transition(&t.name, kind);
        rule_parts.push((t.guard.as_ref().map(compile_guard), Vec::new()));
    }

    for arc in &raw.arcs {
        let from_role = node_role(raw, &arc.from).ok_or_else(|| ParseError::UnknownNode {
            line: 0,
            col: 0,
            name: arc.from.clone(),
        })?;
        let to_role = node_role(raw, &arc.to).ok_or_else(|| ParseError::UnknownNode {
            line: 0,
            col: 0,
            name: arc.to.clone(),
        })?;
        let invalid = |why: &str| ParseError::InvalidArc {
            from: arc.from.clone(),
            to: arc.to.clone(),
            why: why.to_string(),
        };
        match &arc.kind {
            RawArcKind::Inhibitor { threshold } => {
                if from_role != NodeRole::Place || to_role != NodeRole::Trans {
                    return Err(invalid("inhibitor arcs run from a place to a transition"));
                }
                builder.weighted_inhibitor(&arc.from, &arc.to, *threshold);
            }
            RawArcKind::Normal { expr, delay } => {
                debug_assert_eq!(*delay, 0);
                match (from_role, to_role) {
                    (NodeRole::Place, NodeRole::Trans) => {
                        let RawExpr::Name(var) = expr else {
                            return Err(invalid(
                                "input arcs of a high-level net carry a single variable",
                            ));
                        };
                        if !raw.is_var(var) {
                            return Err(ParseError::UndeclaredVariable {
                                line: 0,
                                col: 0,
                                name: var.clone(),
                            });
                        }
                        builder.arc(&arc.from, &arc.to, var);
                    }
                    (NodeRole::Trans, NodeRole::Place) => {
                        let compiled = compile_expr(raw, registry, expr)?;
                        let ti = raw.trans.iter().position(|t| t.name == arc.from).unwrap();
                        if let Expr::Seq(symbols) = &compiled {
                            let budget = raw.trans[ti].source_budget.ok_or_else(|| {
                                invalid("seq(...) requires a source transition")
                            })?;
                            if budget as usize != symbols.len() {
                                return Err(invalid(
                                    "seq(...) length must equal the source budget",
                                ));
                            }
                        }
                        builder.arc(&arc.from, &arc.to, &print_expr(expr));
                        rule_parts[ti].1.push((arc.to.clone(), compiled));
                    }
                    _ => return Err(invalid("arcs must connect a place and a transition")),
                }
            }
        }
    }

    // synthesize each transition's rule from its guard and output arcs
    let place_order: Vec<String> = raw.places.iter().map(|p| p.name.clone()).collect();
    for (ti, (guard, outputs)) in rule_parts.into_iter().enumerate() {
        let place_ids: Result<Vec<(crate::hlpn::PlaceId, Expr)>, ParseError> = outputs
            .into_iter()
            .map(|(place, expr)| {
                let idx = place_order.iter().position(|p| *p == place).unwrap();
                Ok((crate::hlpn::PlaceId(idx as u32), expr))
            })
            .collect();
        let place_ids = place_ids?;
        let rule = move |binding: &crate::hlpn::Binding| -> Result<RuleOutput, RuleError> {
            if let Some(guard) = &guard {
                match guard.holds(&binding.vars) {
                    Ok(true) => {}
                    Ok(false) => return Err(RuleError::Reject),
                    Err(e) => return Err(RuleError::Fail(e.to_string())),
                }
            }
            let mut out = Vec::with_capacity(place_ids.len());
            for (place, expr) in &place_ids {
                match eval_expr(expr, &binding.vars, binding.source_index) {
                    Ok(value) => out.push((*place, value)),
                    Err(EvalError::Rejected(_)) => return Err(RuleError::Reject),
                    Err(e) => return Err(RuleError::Fail(e.to_string())),
                }
            }
            Ok(out)
        };
        builder.rule(crate::hlpn::TransId(ti as u32), rule);
    }

    builder.build().map_err(ParseError::from)
}

// ---------------------------------------------------------------------------
// Printer
// ---------------------------------------------------------------------------

fn print_name(name: &str) -> String {
    let bare = !name.is_empty()
        && name.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !matches!(
            name,
            "net" | "kind" | "colset" | "var" | "place" | "trans" | "arc" | "bind" | "init"
                | "guard" | "source" | "budget" | "timed" | "enum" | "product" | "seq" | "in"
                | "and" | "hlpn" | "cpn"
        );
    if bare {
        name.to_string()
    } else {
        format!("\"{name}\"")
    }
}

fn print_expr(expr: &RawExpr) -> String {
    match expr {
        RawExpr::Name(name) => name.clone(),
        RawExpr::Call { name, args } => {
            let args: Vec<String> = args.iter().map(print_expr).collect();
            format!("{name}({})", args.join(", "))
        }
        RawExpr::Tuple(items) => {
            let items: Vec<String> = items.iter().map(print_expr).collect();
            format!("({})", items.join(", "))
        }
        RawExpr::Seq(symbols) => format!("seq({})", symbols.join(", ")),
    }
}

fn print_guard(guard: &RawGuard) -> String {
    match guard {
        RawGuard::Eq(var, sym) => format!("{var} == {sym}"),
        RawGuard::Ne(var, sym) => format!("{var} != {sym}"),
        RawGuard::In(var, symbols) => format!("{var} in {{ {} }}", symbols.join(" ")),
        RawGuard::All(parts) => parts
            .iter()
            .map(print_guard)
            .collect::<Vec<String>>()
            .join(" and "),
    }
}

/// Prints the canonical source of a raw model. `parse_raw(print_raw(m))`
/// yields a tree equal to `m`.
pub fn print_raw(model: &RawModel) -> String {
    let mut out = String::new();
    let kind = match model.kind {
        ModelKind::Hlpn => "hlpn",
        ModelKind::Cpn => "cpn",
    };
    let timed = if model.timed { " timed" } else { "" };
    let _ = writeln!(out, "net \"{}\" kind {kind}{timed}", model.name);

    for cs in &model.colsets {
        let timed = if cs.timed { " timed" } else { "" };
        match &cs.def {
            RawColourDef::Enum(symbols) => {
                let _ = writeln!(
                    out,
                    "colset {} = enum {{ {} }}{timed}",
                    print_name(&cs.name),
                    symbols.join(" ")
                );
            }
            RawColourDef::Product(components) => {
                let parts: Vec<String> = components.iter().map(|c| print_name(c)).collect();
                let _ = writeln!(
                    out,
                    "colset {} = product {}{timed}",
                    print_name(&cs.name),
                    parts.join(" * ")
                );
            }
        }
    }
    for (name, colset) in &model.vars {
        let _ = writeln!(out, "var {name} : {}", print_name(colset));
    }
    for place in &model.places {
        let mut line = format!("place {} : {}", print_name(&place.name), print_name(&place.colset));
        if !place.init.is_empty() {
            let entries: Vec<String> = place
                .init
                .iter()
                .map(|i| {
                    if i.delay > 0 {
                        format!("{}'{}@+{}", i.count, i.symbol, i.delay)
                    } else {
                        format!("{}'{}", i.count, i.symbol)
                    }
                })
                .collect();
            line.push_str(" init ");
            line.push_str(&entries.join(" ++ "));
        }
        let _ = writeln!(out, "{line}");
    }
    for t in &model.trans {
        let mut line = format!("trans {}", print_name(&t.name));
        if let Some(guard) = &t.guard {
            let _ = write!(line, " guard {}", print_guard(guard));
        }
        if let Some(budget) = t.source_budget {
            let _ = write!(line, " kind source budget {budget}");
        }
        let _ = writeln!(out, "{line}");
    }
    for arc in &model.arcs {
        match &arc.kind {
            RawArcKind::Inhibitor { threshold } => {
                let suffix = if *threshold == 1 {
                    String::new()
                } else {
                    format!(" : {threshold}")
                };
                let _ = writeln!(
                    out,
                    "arc {} -o {}{suffix}",
                    print_name(&arc.from),
                    print_name(&arc.to)
                );
            }
            RawArcKind::Normal { expr, delay } => {
                let suffix = if *delay > 0 {
                    format!(" @+{delay}")
                } else {
                    String::new()
                };
                let _ = writeln!(
                    out,
                    "arc {} -> {} : {}{suffix}",
                    print_name(&arc.from),
                    print_name(&arc.to),
                    print_expr(expr)
                );
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Fusion
// ---------------------------------------------------------------------------

/// Fuses several raw models into one composite.
///
/// Places sharing both a name and a colour-set name are merged into one
/// place; enumeration colour sets sharing a name are unioned. Everything
/// else is kept apart by prefixing the component label: transitions always,
/// and places or colour sets whose names collide incompatibly. Variables
/// with one name but different colour sets are renamed apart.
pub fn fuse_raw(name: &str, parts: &[(&str, &RawModel)]) -> RawModel {
    let mut out = RawModel {
        name: name.to_string(),
        kind: ModelKind::Hlpn,
        timed: false,
        colsets: Vec::new(),
        vars: Vec::new(),
        places: Vec::new(),
        trans: Vec::new(),
        arcs: Vec::new(),
    };

    for (label, part) in parts {
        // colour sets: union enums by name, share identical products,
        // otherwise rename this component's colour set apart
        let mut colset_rename: Vec<(String, String)> = Vec::new();
        for cs in &part.colsets {
            match out.colsets.iter_mut().find(|c| c.name == cs.name) {
                None => out.colsets.push(cs.clone()),
                Some(existing) => {
                    let compatible = match (&mut existing.def, &cs.def) {
                        (RawColourDef::Enum(have), RawColourDef::Enum(add)) => {
                            for sym in add {
                                if !have.contains(sym) {
                                    have.push(sym.clone());
                                }
                            }
                            true
                        }
                        (RawColourDef::Product(have), RawColourDef::Product(add)) => have == add,
                        _ => false,
                    };
                    if existing.timed != cs.timed {
                        // a timed and an untimed set cannot merge
                        if compatible {
                            colset_rename.push((cs.name.clone(), format!("{label}/{}", cs.name)));
                            let mut renamed = cs.clone();
                            renamed.name = format!("{label}/{}", cs.name);
                            out.colsets.push(renamed);
                        }
                        continue;
                    }
                    if !compatible {
                        colset_rename.push((cs.name.clone(), format!("{label}/{}", cs.name)));
                        let mut renamed = cs.clone();
                        renamed.name = format!("{label}/{}", cs.name);
                        out.colsets.push(renamed);
                    }
                }
            }
        }
        let colset_of = |name: &str| -> String {
            colset_rename
                .iter()
                .find(|(old, _)| old == name)
                .map(|(_, new)| new.clone())
                .unwrap_or_else(|| name.to_string())
        };
        // product components may reference renamed sets
        for cs in out.colsets.iter_mut() {
            if cs.name.starts_with(&format!("{label}/")) {
                if let RawColourDef::Product(components) = &mut cs.def {
                    for c in components {
                        *c = colset_of(c);
                    }
                }
            }
        }

        // variables: share identical (name, colset); rename conflicts apart
        let mut var_rename: Vec<(String, String)> = Vec::new();
        for (var, colset) in &part.vars {
            let colset = colset_of(colset);
            match out.vars.iter().find(|(v, _)| v == var) {
                None => out.vars.push((var.clone(), colset)),
                Some((_, existing)) if *existing == colset => {}
                Some(_) => {
                    let mut fresh = format!("{var}_{label}");
                    fresh = fresh.replace(['-', '/'], "_");
                    var_rename.push((var.clone(), fresh.clone()));
                    out.vars.push((fresh, colset));
                }
            }
        }
        let var_of = |name: &str| -> String {
            var_rename
                .iter()
                .find(|(old, _)| old == name)
                .map(|(_, new)| new.clone())
                .unwrap_or_else(|| name.to_string())
        };

        // places: merge on (name, colset); rename apart otherwise
        let mut place_rename: Vec<(String, String)> = Vec::new();
        for place in &part.places {
            let colset = colset_of(&place.colset);
            match out.places.iter_mut().find(|p| p.name == place.name) {
                None => out.places.push(RawPlace {
                    name: place.name.clone(),
                    colset,
                    init: place.init.clone(),
                }),
                Some(existing) if existing.colset == colset => {
                    existing.init.extend(place.init.iter().cloned());
                }
                Some(_) => {
                    let fresh = format!("{label}/{}", place.name);
                    place_rename.push((place.name.clone(), fresh.clone()));
                    out.places.push(RawPlace {
                        name: fresh,
                        colset,
                        init: place.init.clone(),
                    });
                }
            }
        }
        let place_of = |name: &str| -> String {
            place_rename
                .iter()
                .find(|(old, _)| old == name)
                .map(|(_, new)| new.clone())
                .unwrap_or_else(|| name.to_string())
        };

        // transitions: always prefixed with the component label
        let trans_of = |name: &str| -> String { format!("{label}/{name}") };
        for t in &part.trans {
            out.trans.push(RawTrans {
                name: trans_of(&t.name),
                guard: t.guard.as_ref().map(|g| rename_guard(g, &var_of)),
                source_budget: t.source_budget,
            });
        }

        let is_trans = |name: &str| part.trans.iter().any(|t| t.name == name);
        for arc in &part.arcs {
            let map_node = |name: &str| -> String {
                if is_trans(name) {
                    trans_of(name)
                } else {
                    place_of(name)
                }
            };
            let kind = match &arc.kind {
                RawArcKind::Inhibitor { threshold } => RawArcKind::Inhibitor {
                    threshold: *threshold,
                },
                RawArcKind::Normal { expr, delay } => RawArcKind::Normal {
                    expr: rename_expr(expr, part, &var_of),
                    delay: *delay,
                },
            };
            out.arcs.push(RawArc {
                from: map_node(&arc.from),
                to: map_node(&arc.to),
                kind,
            });
        }
    }
    out
}

fn rename_expr(expr: &RawExpr, part: &RawModel, var_of: &dyn Fn(&str) -> String) -> RawExpr {
    match expr {
        RawExpr::Name(name) => {
            if part.is_var(name) {
                RawExpr::Name(var_of(name))
            } else {
                RawExpr::Name(name.clone())
            }
        }
        RawExpr::Call { name, args } => RawExpr::Call {
            name: name.clone(),
            args: args.iter().map(|a| rename_expr(a, part, var_of)).collect(),
        },
        RawExpr::Tuple(items) => {
            RawExpr::Tuple(items.iter().map(|a| rename_expr(a, part, var_of)).collect())
        }
        RawExpr::Seq(symbols) => RawExpr::Seq(symbols.clone()),
    }
}

fn rename_guard(guard: &RawGuard, var_of: &dyn Fn(&str) -> String) -> RawGuard {
    match guard {
        RawGuard::Eq(var, sym) => RawGuard::Eq(var_of(var), sym.clone()),
        RawGuard::Ne(var, sym) => RawGuard::Ne(var_of(var), sym.clone()),
        RawGuard::In(var, symbols) => RawGuard::In(var_of(var), symbols.clone()),
        RawGuard::All(parts) => {
            RawGuard::All(parts.iter().map(|g| rename_guard(g, var_of)).collect())
        }
    }
}

/// The symbols every enumeration colour set would need for `fuse_raw` to
/// union cleanly; exposed for catalog sanity checks.
pub fn enum_symbols(model: &RawModel) -> BTreeSet<(String, String)> {
    let mut out = BTreeSet::new();
    for cs in &model.colsets {
        if let RawColourDef::Enum(symbols) = &cs.def {
            for sym in symbols {
                out.insert((cs.name.clone(), sym.clone()));
            }
        }
    }
    out
}
