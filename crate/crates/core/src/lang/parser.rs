use thiserror::Error;

use super::{Expr, Program, Stmt, VarId};
use crate::machine_int::{BinOp, Width};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("{line}:{col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("{line}:{col}: constant {literal} does not fit in {bits}-bit integers")]
    ConstantOutOfRange {
        line: usize,
        col: usize,
        literal: String,
        bits: u32,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(u128),
    Assign,
    Semi,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Question,
    Op(BinOp),
    Assume,
    Choice,
    Or,
    Loop,
    If,
    Else,
    While,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Int(n) => format!("integer `{n}`"),
            Tok::Assign => "`:=`".into(),
            Tok::Semi => "`;`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Question => "`?`".into(),
            Tok::Op(op) => format!("`{op}`"),
            Tok::Assume => "`assume`".into(),
            Tok::Choice => "`choice`".into(),
            Tok::Or => "`or`".into(),
            Tok::Loop => "`loop`".into(),
            Tok::If => "`if`".into(),
            Tok::Else => "`else`".into(),
            Tok::While => "`while`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
    text: String,
}

fn syntax(line: usize, col: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line,
        col,
        message: message.into(),
    }
}

fn lex(src: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        let (sl, sc) = (line, col);
        let tok = if c.is_ascii_digit() {
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            let n = text
                .parse::<u128>()
                .map_err(|_| syntax(sl, sc, format!("integer literal `{text}` is too large")))?;
            Tok::Int(n)
        } else if c.is_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            match word.as_str() {
                "assume" => Tok::Assume,
                "choice" => Tok::Choice,
                "or" => Tok::Or,
                "loop" => Tok::Loop,
                "if" => Tok::If,
                "else" => Tok::Else,
                "while" => Tok::While,
                _ => Tok::Ident(word),
            }
        } else {
            let next = chars.get(i + 1).copied();
            let (tok, len) = match (c, next) {
                (':', Some('=')) => (Tok::Assign, 2),
                ('=', Some('=')) => (Tok::Op(BinOp::Eq), 2),
                ('&', Some('&')) => (Tok::Op(BinOp::And), 2),
                ('|', Some('|')) => (Tok::Op(BinOp::Or), 2),
                (';', _) => (Tok::Semi, 1),
                ('{', _) => (Tok::LBrace, 1),
                ('}', _) => (Tok::RBrace, 1),
                ('(', _) => (Tok::LParen, 1),
                (')', _) => (Tok::RParen, 1),
                ('?', _) => (Tok::Question, 1),
                ('+', _) => (Tok::Op(BinOp::Plus), 1),
                ('-', _) => (Tok::Op(BinOp::Minus), 1),
                ('*', _) => (Tok::Op(BinOp::Mult), 1),
                ('<', _) => (Tok::Op(BinOp::Lt), 1),
                _ => return Err(syntax(sl, sc, format!("unexpected character `{c}`"))),
            };
            i += len;
            tok
        };
        col += i - start;
        out.push(Spanned {
            tok,
            line: sl,
            col: sc,
            text: chars[start..i].iter().collect(),
        });
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        col,
        text: String::new(),
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    vars: Vec<String>,
    width: Width,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        &self.toks[(self.pos + n).min(self.toks.len() - 1)].tok
    }

    fn bump(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, expected: &str) -> ParseError {
        let t = &self.toks[self.pos];
        syntax(
            t.line,
            t.col,
            format!("expected {expected}, found {}", t.tok.describe()),
        )
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error_here(&tok.describe()))
        }
    }

    fn intern(&mut self, name: String) -> VarId {
        match self.vars.iter().position(|v| *v == name) {
            Some(i) => VarId(i),
            None => {
                self.vars.push(name);
                VarId(self.vars.len() - 1)
            }
        }
    }

    // stmt := atom (';' stmt)?
    fn stmt(&mut self) -> Result<Stmt, ParseError> {
        let first = self.atom()?;
        if *self.peek() == Tok::Semi {
            self.bump();
            // tolerate a trailing separator before `}` or end of input
            if matches!(self.peek(), Tok::RBrace | Tok::Eof) {
                return Ok(first);
            }
            let rest = self.stmt()?;
            Ok(Stmt::seq_right(first, rest))
        } else {
            Ok(first)
        }
    }

    fn block(&mut self) -> Result<Stmt, ParseError> {
        self.expect(Tok::LBrace)?;
        let s = self.stmt()?;
        self.expect(Tok::RBrace)?;
        Ok(s)
    }

    fn atom(&mut self) -> Result<Stmt, ParseError> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.bump();
                let v = self.intern(name);
                self.expect(Tok::Assign)?;
                let e = self.expr(0)?;
                Ok(Stmt::Assign(v, e))
            }
            Tok::Assume => {
                self.bump();
                Ok(Stmt::Assume(self.expr(0)?))
            }
            Tok::Choice => {
                self.bump();
                let a = self.block()?;
                self.expect(Tok::Or)?;
                let b = self.block()?;
                Ok(Stmt::choice(a, b))
            }
            Tok::Loop => {
                self.bump();
                Ok(Stmt::looping(self.block()?))
            }
            Tok::If => {
                self.bump();
                let cond = self.expr(0)?;
                let then = self.block()?;
                self.expect(Tok::Else)?;
                let els = self.block()?;
                Ok(Stmt::if_else(cond, then, els))
            }
            Tok::While => {
                self.bump();
                let cond = self.expr(0)?;
                let body = self.block()?;
                Ok(Stmt::while_loop(cond, body))
            }
            _ => Err(self.error_here("a statement")),
        }
    }

    fn expr(&mut self, min_prec: u8) -> Result<Expr, ParseError> {
        let mut lhs = self.primary()?;
        while let Tok::Op(op) = *self.peek() {
            if op.precedence() < min_prec {
                break;
            }
            self.bump();
            let rhs = self.expr(op.precedence() + 1)?;
            lhs = Expr::binop(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn literal(&self, magnitude: u128, negative: bool, at: &Spanned, text: String) -> Result<Expr, ParseError> {
        let value = if negative {
            -(magnitude as i128)
        } else {
            magnitude as i128
        };
        if magnitude > i128::MAX as u128 || !self.width.inbounds(value) {
            return Err(ParseError::ConstantOutOfRange {
                line: at.line,
                col: at.col,
                literal: text,
                bits: self.width.bits(),
            });
        }
        Ok(Expr::Const(value as i64))
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        match self.peek().clone() {
            Tok::Int(n) => {
                let t = self.bump();
                let text = t.text.clone();
                self.literal(n, false, &t, text)
            }
            Tok::Op(BinOp::Minus) if matches!(self.peek_at(1), Tok::Int(_)) => {
                let sign = self.bump();
                let t = self.bump();
                let Tok::Int(n) = t.tok else { unreachable!() };
                self.literal(n, true, &sign, format!("-{}", t.text))
            }
            Tok::Ident(name) => {
                self.bump();
                Ok(Expr::Var(self.intern(name)))
            }
            Tok::Question => {
                self.bump();
                Ok(Expr::Unknown)
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr(0)?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            _ => Err(self.error_here("an expression")),
        }
    }
}

/// Parses a program. The variable set is every identifier, in order of first
/// occurrence; `if` and `while` are desugared into the core statements.
pub fn parse(text: &str, width: Width) -> Result<Program, ParseError> {
    parse_with_vars(text, width, &[])
}

/// Like [`parse`], but the variable set starts out as `vars` (in that order)
/// and is extended with any further identifiers found in the text.
pub fn parse_with_vars(text: &str, width: Width, vars: &[String]) -> Result<Program, ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        vars: vars.to_vec(),
        width,
    };
    let body = p.stmt()?;
    if *p.peek() != Tok::Eof {
        return Err(p.error_here("`;` or end of input"));
    }
    Ok(Program {
        vars: p.vars,
        body,
        width,
    })
}
