// SPDX-License-Identifier: Apache-2.0

//! Tokenizer shared by the model, marks and scenario languages.

use std::fmt;

use super::{ParseError, SourceLoc};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    /// Decimal integer, kept as text until the parser range-checks it.
    Int(String),
    Dollar,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Semi,
    Colon,
    Comma,
    Dot,
    Assign,
    Arrow,
    EqEq,
    NotEq,
    Lt,
    Le,
    Gt,
    Ge,
    Plus,
    Minus,
    Star,
    Bang,
    AndAnd,
    OrOr,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(name) => return write!(f, "`{name}`"),
            Tok::Int(n) => return write!(f, "`{n}`"),
            Tok::Eof => return f.write_str("end of input"),
            Tok::Dollar => "$",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::Semi => ";",
            Tok::Colon => ":",
            Tok::Comma => ",",
            Tok::Dot => ".",
            Tok::Assign => "=",
            Tok::Arrow => "->",
            Tok::EqEq => "==",
            Tok::NotEq => "!=",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Bang => "!",
            Tok::AndAnd => "&&",
            Tok::OrOr => "||",
        };
        write!(f, "`{s}`")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub loc: SourceLoc,
}

pub fn tokenize(file: &str, text: &str) -> Result<Vec<Token>, ParseError> {
    let mut lexer = Lexer {
        file,
        chars: text.chars().collect(),
        pos: 0,
        line: 1,
        col: 1,
    };
    let mut out = Vec::new();
    loop {
        let token = lexer.next_token()?;
        let done = token.tok == Tok::Eof;
        out.push(token);
        if done {
            return Ok(out);
        }
    }
}

struct Lexer<'a> {
    file: &'a str,
    chars: Vec<char>,
    pos: usize,
    line: u32,
    col: u32,
}

impl Lexer<'_> {
    fn loc(&self) -> SourceLoc {
        SourceLoc {
            file: self.file.to_string(),
            line: self.line,
            column: self.col,
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek2(&self) -> Option<char> {
        self.chars.get(self.pos + 1).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.get(self.pos).copied()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('/') if self.peek2() == Some('/') => {
                    while let Some(c) = self.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                _ => return,
            }
        }
    }

    fn next_token(&mut self) -> Result<Token, ParseError> {
        self.skip_trivia();
        let loc = self.loc();
        let Some(c) = self.bump() else {
            return Ok(Token { tok: Tok::Eof, loc });
        };
        let tok = match c {
            'A'..='Z' | 'a'..='z' | '_' => {
                let mut s = String::from(c);
                while let Some(c) = self.peek().filter(|c| c.is_ascii_alphanumeric() || *c == '_') {
                    s.push(c);
                    self.bump();
                }
                Tok::Ident(s)
            }
            '0'..='9' => {
                let mut s = String::from(c);
                while let Some(c) = self.peek().filter(char::is_ascii_digit) {
                    s.push(c);
                    self.bump();
                }
                Tok::Int(s)
            }
            '$' => Tok::Dollar,
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ';' => Tok::Semi,
            ':' => Tok::Colon,
            ',' => Tok::Comma,
            '.' => Tok::Dot,
            '+' => Tok::Plus,
            '*' => Tok::Star,
            '-' => self.follow('>', Tok::Arrow, Tok::Minus),
            '=' => self.follow('=', Tok::EqEq, Tok::Assign),
            '!' => self.follow('=', Tok::NotEq, Tok::Bang),
            '<' => self.follow('=', Tok::Le, Tok::Lt),
            '>' => self.follow('=', Tok::Ge, Tok::Gt),
            '&' if self.peek() == Some('&') => {
                self.bump();
                Tok::AndAnd
            }
            '|' if self.peek() == Some('|') => {
                self.bump();
                Tok::OrOr
            }
            other => {
                return Err(ParseError {
                    loc,
                    expected: "a token".into(),
                    found: format!("character {other:?}"),
                })
            }
        };
        Ok(Token { tok, loc })
    }

    fn follow(&mut self, next: char, matched: Tok, single: Tok) -> Tok {
        if self.peek() == Some(next) {
            self.bump();
            matched
        } else {
            single
        }
    }
}
