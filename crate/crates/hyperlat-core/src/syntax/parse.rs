//! Recursive-descent parser for the ASCII formula syntax.
//!
//! ```text
//! formula := quant | impl
//! quant   := ("forall" | "exists") var ("," var)* "." formula
//! impl    := disj ("->" formula)?
//! disj    := conj ("\/" conj)*
//! conj    := neg ("/\" neg)*
//! neg     := "~" neg | atom
//! atom    := "top" | "bot" | ident "(" term ("," term)* ")"
//!          | term "=" term | "(" formula ")"
//! term    := ident | ident "(" term ("," term)* ")"
//! ```
//!
//! The parser is signature-directed: a bare identifier is resolved to a
//! relation atom, a constant, or a variable by looking it up, which is what
//! lets `P` and `c = x` share one grammar.

use super::{Formula, Signature, SyntaxError, Term, KEYWORDS};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    Comma,
    Dot,
    Arrow,
    Wedge,
    Vee,
    Tilde,
    Eq,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(name) => format!("`{name}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::Wedge => "`/\\`".into(),
            Tok::Vee => "`\\/`".into(),
            Tok::Tilde => "`~`".into(),
            Tok::Eq => "`=`".into(),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, SyntaxError> {
    let bytes = src.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\r' | '\n' => i += 1,
            '(' => {
                toks.push((Tok::LParen, i));
                i += 1;
            }
            ')' => {
                toks.push((Tok::RParen, i));
                i += 1;
            }
            ',' => {
                toks.push((Tok::Comma, i));
                i += 1;
            }
            '.' => {
                toks.push((Tok::Dot, i));
                i += 1;
            }
            '~' => {
                toks.push((Tok::Tilde, i));
                i += 1;
            }
            '=' => {
                toks.push((Tok::Eq, i));
                i += 1;
            }
            '-' if bytes.get(i + 1) == Some(&b'>') => {
                toks.push((Tok::Arrow, i));
                i += 2;
            }
            '/' if bytes.get(i + 1) == Some(&b'\\') => {
                toks.push((Tok::Wedge, i));
                i += 2;
            }
            '\\' if bytes.get(i + 1) == Some(&b'/') => {
                toks.push((Tok::Vee, i));
                i += 2;
            }
            c if c.is_ascii_alphabetic() => {
                let start = i;
                while i < bytes.len()
                    && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                toks.push((Tok::Ident(src[start..i].to_string()), start));
            }
            other => {
                return Err(SyntaxError::Parse {
                    offset: i,
                    message: format!("unexpected character `{other}`"),
                })
            }
        }
    }
    Ok(toks)
}

struct Parser<'a> {
    sig: &'a Signature,
    toks: Vec<(Tok, usize)>,
    pos: usize,
    eof: usize,
}

/// Parses `src` against `sig`. Errors carry byte offsets into `src`.
pub fn parse_formula(sig: &Signature, src: &str) -> Result<Formula, SyntaxError> {
    let toks = lex(src)?;
    let mut parser = Parser { sig, toks, pos: 0, eof: src.len() };
    let formula = parser.formula()?;
    if let Some((tok, offset)) = parser.peek() {
        return Err(SyntaxError::Parse {
            offset,
            message: format!("unexpected trailing {}", tok.describe()),
        });
    }
    Ok(formula)
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<(Tok, usize)> {
        self.toks.get(self.pos).cloned()
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map_or(self.eof, |(_, o)| *o)
    }

    fn bump(&mut self) -> Option<(Tok, usize)> {
        let t = self.peek();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<usize, SyntaxError> {
        match self.peek() {
            Some((tok, offset)) if tok == want => {
                self.pos += 1;
                Ok(offset)
            }
            Some((tok, offset)) => Err(SyntaxError::Parse {
                offset,
                message: format!("expected {}, found {}", want.describe(), tok.describe()),
            }),
            None => Err(SyntaxError::Parse {
                offset: self.eof,
                message: format!("expected {}, found end of input", want.describe()),
            }),
        }
    }

    fn fail<T>(&self, message: impl Into<String>) -> Result<T, SyntaxError> {
        Err(SyntaxError::Parse { offset: self.here(), message: message.into() })
    }

    fn formula(&mut self) -> Result<Formula, SyntaxError> {
        match self.peek() {
            Some((Tok::Ident(word), _)) if word == "forall" || word == "exists" => self.quant(),
            _ => self.implication(),
        }
    }

    fn quant(&mut self) -> Result<Formula, SyntaxError> {
        let (tok, _) = self.bump().expect("caller peeked a quantifier");
        let universal = matches!(&tok, Tok::Ident(w) if w == "forall");
        let mut vars = vec![self.binder_name()?];
        while matches!(self.peek(), Some((Tok::Comma, _))) {
            self.bump();
            vars.push(self.binder_name()?);
        }
        self.expect(Tok::Dot)?;
        let mut body = self.formula()?;
        for var in vars.into_iter().rev() {
            body = if universal {
                Formula::forall(&var, body)
            } else {
                Formula::exists(&var, body)
            };
        }
        Ok(body)
    }

    fn binder_name(&mut self) -> Result<String, SyntaxError> {
        match self.bump() {
            Some((Tok::Ident(name), offset)) => {
                if KEYWORDS.contains(&name.as_str()) {
                    Err(SyntaxError::Parse {
                        offset,
                        message: format!("`{name}` is a keyword, not a variable"),
                    })
                } else if self.sig.declares(&name) {
                    Err(SyntaxError::Parse {
                        offset,
                        message: format!("cannot bind `{name}`: it is a declared symbol"),
                    })
                } else {
                    Ok(name)
                }
            }
            Some((tok, offset)) => Err(SyntaxError::Parse {
                offset,
                message: format!("expected a variable, found {}", tok.describe()),
            }),
            None => Err(SyntaxError::Parse {
                offset: self.eof,
                message: "expected a variable, found end of input".into(),
            }),
        }
    }

    fn implication(&mut self) -> Result<Formula, SyntaxError> {
        let lhs = self.disjunction()?;
        if matches!(self.peek(), Some((Tok::Arrow, _))) {
            self.bump();
            // The right-hand side may be another implication (right
            // associativity) or a bare quantified formula.
            let rhs = self.formula()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula, SyntaxError> {
        let mut lhs = self.conjunction()?;
        while matches!(self.peek(), Some((Tok::Vee, _))) {
            self.bump();
            let rhs = self.conjunction()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Formula, SyntaxError> {
        let mut lhs = self.negation()?;
        while matches!(self.peek(), Some((Tok::Wedge, _))) {
            self.bump();
            let rhs = self.negation()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn negation(&mut self) -> Result<Formula, SyntaxError> {
        if matches!(self.peek(), Some((Tok::Tilde, _))) {
            self.bump();
            let inner = self.negation()?;
            return Ok(Formula::not(inner));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Formula, SyntaxError> {
        match self.peek() {
            Some((Tok::LParen, _)) => {
                self.bump();
                let inner = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            Some((Tok::Ident(word), _)) if word == "top" => {
                self.bump();
                Ok(Formula::Top)
            }
            Some((Tok::Ident(word), _)) if word == "bot" => {
                self.bump();
                Ok(Formula::Bottom)
            }
            Some((Tok::Ident(word), offset)) if word == "forall" || word == "exists" => {
                Err(SyntaxError::Parse {
                    offset,
                    message: format!("`{word}` needs parentheses in this position"),
                })
            }
            Some((Tok::Ident(name), offset)) => {
                self.bump();
                if matches!(self.peek(), Some((Tok::LParen, _))) {
                    let args = self.argument_list()?;
                    if let Some(expected) = self.sig.relation_arity(&name) {
                        if expected != args.len() {
                            return Err(SyntaxError::ArityMismatch {
                                name,
                                expected,
                                got: args.len(),
                            });
                        }
                        return Ok(Formula::Atom(name, args));
                    }
                    if let Some(expected) = self.sig.function_arity(&name) {
                        if expected != args.len() {
                            return Err(SyntaxError::ArityMismatch {
                                name,
                                expected,
                                got: args.len(),
                            });
                        }
                        let lhs = Term::App(name, args);
                        self.expect(Tok::Eq)?;
                        let rhs = self.term()?;
                        return Ok(Formula::Equals(lhs, rhs));
                    }
                    return Err(SyntaxError::UnknownSymbol { name, offset });
                }
                // Bare identifier: nullary relation, or the left side of an
                // equality (constant or variable).
                if let Some(expected) = self.sig.relation_arity(&name) {
                    if expected != 0 {
                        return Err(SyntaxError::ArityMismatch { name, expected, got: 0 });
                    }
                    return Ok(Formula::Atom(name, Vec::new()));
                }
                let lhs = self.resolve_bare_term(name)?;
                self.expect(Tok::Eq)?;
                let rhs = self.term()?;
                Ok(Formula::Equals(lhs, rhs))
            }
            Some((tok, offset)) => Err(SyntaxError::Parse {
                offset,
                message: format!("expected a formula, found {}", tok.describe()),
            }),
            None => self.fail("expected a formula, found end of input"),
        }
    }

    fn argument_list(&mut self) -> Result<Vec<Term>, SyntaxError> {
        self.expect(Tok::LParen)?;
        let mut args = vec![self.term()?];
        while matches!(self.peek(), Some((Tok::Comma, _))) {
            self.bump();
            args.push(self.term()?);
        }
        self.expect(Tok::RParen)?;
        Ok(args)
    }

    fn term(&mut self) -> Result<Term, SyntaxError> {
        match self.bump() {
            Some((Tok::Ident(name), offset)) => {
                if KEYWORDS.contains(&name.as_str()) {
                    return Err(SyntaxError::Parse {
                        offset,
                        message: format!("`{name}` cannot appear in a term"),
                    });
                }
                if matches!(self.peek(), Some((Tok::LParen, _))) {
                    let args = self.argument_list()?;
                    let expected = match self.sig.function_arity(&name) {
                        Some(a) => a,
                        None if self.sig.relation_arity(&name).is_some() => {
                            return Err(SyntaxError::Parse {
                                offset,
                                message: format!("relation `{name}` used as a term"),
                            })
                        }
                        None => return Err(SyntaxError::UnknownSymbol { name, offset }),
                    };
                    if expected != args.len() {
                        return Err(SyntaxError::ArityMismatch {
                            name,
                            expected,
                            got: args.len(),
                        });
                    }
                    return Ok(Term::App(name, args));
                }
                self.resolve_bare_term(name)
            }
            Some((tok, offset)) => Err(SyntaxError::Parse {
                offset,
                message: format!("expected a term, found {}", tok.describe()),
            }),
            None => self.fail("expected a term, found end of input"),
        }
    }

    /// A lone identifier in term position: constant if declared nullary,
    /// otherwise a variable.
    fn resolve_bare_term(&mut self, name: String) -> Result<Term, SyntaxError> {
        if let Some(expected) = self.sig.function_arity(&name) {
            if expected != 0 {
                return Err(SyntaxError::ArityMismatch { name, expected, got: 0 });
            }
            return Ok(Term::App(name, Vec::new()));
        }
        if self.sig.relation_arity(&name).is_some() {
            return self.fail(format!("relation `{name}` used as a term"));
        }
        Ok(Term::Var(name))
    }
}
