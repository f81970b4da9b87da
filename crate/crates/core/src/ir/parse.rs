use num_bigint::BigInt;

use super::{BasicBlock, BinOp, BlockId, Expr, Instruction, IrError, Program, Terminator, UnOp};

const KEYWORDS: &[&str] = &["block", "entry", "goto", "br", "exit", "print", "input"];

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(BigInt),
    Punct(&'static str),
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

// Longest first so that `<=` wins over `<`.
const PUNCT: &[&str] = &[
    "==", "!=", "<=", ">=", "&&", "||", "{", "}", "(", ")", ";", "=", "<", ">", "+", "-", "*", "!",
];

fn lex(src: &str) -> Result<Vec<Token>, IrError> {
    let mut out = Vec::new();
    let mut line = 1;
    let mut col = 1;
    let mut rest = src;
    while let Some(c) = rest.chars().next() {
        if c == '\n' {
            line += 1;
            col = 1;
            rest = &rest[1..];
            continue;
        }
        if c.is_whitespace() {
            col += 1;
            rest = &rest[c.len_utf8()..];
            continue;
        }
        if c == '#' {
            let end = rest.find('\n').unwrap_or(rest.len());
            rest = &rest[end..];
            continue;
        }
        let (tok, len) = if c.is_ascii_alphabetic() || c == '_' {
            let len = rest
                .find(|ch: char| !(ch.is_ascii_alphanumeric() || ch == '_' || ch == '.'))
                .unwrap_or(rest.len());
            (Tok::Ident(rest[..len].to_owned()), len)
        } else if c.is_ascii_digit() {
            let len = rest
                .find(|ch: char| !ch.is_ascii_digit())
                .unwrap_or(rest.len());
            let v: BigInt = rest[..len].parse().expect("digits");
            (Tok::Num(v), len)
        } else if let Some(p) = PUNCT.iter().find(|p| rest.starts_with(**p)) {
            (Tok::Punct(p), p.len())
        } else {
            return Err(IrError::Syntax {
                line,
                col,
                message: format!("unexpected character `{c}`"),
            });
        };
        out.push(Token { tok, line, col });
        col += rest[..len].chars().count();
        rest = &rest[len..];
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, IrError> {
        let t = &self.toks[self.pos];
        Err(IrError::Syntax {
            line: t.line,
            col: t.col,
            message: message.into(),
        })
    }

    fn describe(&self) -> String {
        match self.peek() {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Num(n) => format!("`{n}`"),
            Tok::Punct(p) => format!("`{p}`"),
            Tok::Eof => "end of input".to_owned(),
        }
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Tok::Punct(q) if *q == p)
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn expect_punct(&mut self, p: &str) -> Result<(), IrError> {
        if self.is_punct(p) {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected `{p}`, found {}", self.describe()))
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), IrError> {
        if self.is_keyword(kw) {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected `{kw}`, found {}", self.describe()))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, IrError> {
        match self.peek() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => self.error(format!("expected {what}, found {}", self.describe())),
        }
    }

    fn program(&mut self) -> Result<Program, IrError> {
        let mut entry = None;
        while self.is_keyword("entry") {
            self.bump();
            entry = Some(BlockId::new(self.ident("block name")?));
            self.expect_punct(";")?;
        }
        let mut blocks = Vec::new();
        loop {
            blocks.push(self.block()?);
            if matches!(self.peek(), Tok::Eof) {
                break;
            }
        }
        match entry {
            Some(e) => Program::new(blocks, e),
            None => Program::from_blocks(blocks),
        }
    }

    fn block(&mut self) -> Result<BasicBlock, IrError> {
        self.expect_keyword("block")?;
        let id = BlockId::new(self.ident("block name")?);
        self.expect_punct("{")?;
        let mut instrs = Vec::new();
        let term = loop {
            if let Some(t) = self.terminator()? {
                break t;
            }
            instrs.push(self.instruction()?);
        };
        self.expect_punct("}")?;
        Ok(BasicBlock { id, instrs, term })
    }

    fn terminator(&mut self) -> Result<Option<Terminator>, IrError> {
        let t = if self.is_keyword("goto") {
            self.bump();
            Terminator::Goto(BlockId::new(self.ident("block name")?))
        } else if self.is_keyword("br") {
            self.bump();
            let cond = self.expr()?;
            let on_true = BlockId::new(self.ident("true target")?);
            let on_false = BlockId::new(self.ident("false target")?);
            Terminator::Branch {
                cond,
                on_true,
                on_false,
            }
        } else if self.is_keyword("exit") {
            self.bump();
            Terminator::Exit
        } else {
            return Ok(None);
        };
        self.expect_punct(";")?;
        Ok(Some(t))
    }

    fn instruction(&mut self) -> Result<Instruction, IrError> {
        if self.is_keyword("print") {
            self.bump();
            let value = self.expr()?;
            self.expect_punct(";")?;
            return Ok(Instruction::Print { value });
        }
        if self.is_punct("}") || matches!(self.peek(), Tok::Eof) {
            return self.error("block must end with `goto`, `br` or `exit`");
        }
        let target = self.ident("instruction")?;
        self.expect_punct("=")?;
        let instr = if self.is_keyword("input") {
            self.bump();
            Instruction::Input { target }
        } else {
            Instruction::Assign {
                target,
                value: self.expr()?,
            }
        };
        self.expect_punct(";")?;
        Ok(instr)
    }

    fn expr(&mut self) -> Result<Expr, IrError> {
        self.binary(1)
    }

    fn binary_op(&self) -> Option<BinOp> {
        match self.peek() {
            Tok::Punct(p) => BinOp::ALL.into_iter().find(|op| op.symbol() == *p),
            _ => None,
        }
    }

    fn binary(&mut self, min_prec: u8) -> Result<Expr, IrError> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.binary_op() {
            if op.precedence() < min_prec {
                break;
            }
            self.bump();
            let rhs = self.binary(op.precedence() + 1)?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, IrError> {
        if self.is_punct("-") {
            self.bump();
            if let Tok::Num(n) = self.peek() {
                let n = -n.clone();
                self.bump();
                return Ok(Expr::Lit(n));
            }
            return Ok(Expr::unary(UnOp::Neg, self.unary()?));
        }
        if self.is_punct("!") {
            self.bump();
            return Ok(Expr::unary(UnOp::Not, self.unary()?));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr, IrError> {
        match self.peek().clone() {
            Tok::Num(n) => {
                self.bump();
                Ok(Expr::Lit(n))
            }
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.bump();
                Ok(Expr::Var(s))
            }
            Tok::Punct("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect_punct(")")?;
                Ok(e)
            }
            _ => self.error(format!("expected expression, found {}", self.describe())),
        }
    }
}

/// Parses a whole program in the textual IR format.
pub fn parse_program(text: &str) -> Result<Program, IrError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
    };
    if matches!(p.peek(), Tok::Eof) {
        return p.error("expected `block`");
    }
    p.program()
}

/// Parses a single expression, e.g. a `--cond` argument.
pub fn parse_expr(text: &str) -> Result<Expr, IrError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
    };
    let e = p.expr()?;
    if !matches!(p.peek(), Tok::Eof) {
        return p.error(format!("unexpected {} after expression", p.describe()));
    }
    Ok(e)
}
