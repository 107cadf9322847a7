//! Concrete syntax for SLTL formulas, service constraints and constraint
//! files.
//!
//! ```text
//! phi ::= "true" | "false" | "type(" id ")" | "!" phi | phi "&" phi
//!       | phi "|" phi | phi "->" phi | "<" sc ">" phi | "[" sc "]" phi
//!       | "F" phi | "G" phi | "X" phi | phi "U" phi | "(" phi ")"
//! sc  ::= "true" | id | "!" sc | sc "&" sc | sc "|" sc | "(" sc ")"
//! ```
//!
//! Precedence, tightest first: unary, `U`, `&`, `|`, `->`. Identifiers are
//! taxonomy ids; quoted strings additionally resolve via display names.

use crate::domain::DomainModel;
use crate::ontology::TermRef;

use super::{conjoin, template, Formula, ServiceConstraint, SltlError, TemplateKind};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    True,
    False,
    Type,
    FOp,
    GOp,
    XOp,
    UOp,
    Ident(String),
    Str(String),
    Bang,
    Amp,
    Pipe,
    Arrow,
    Lt,
    Gt,
    LBrack,
    RBrack,
    LParen,
    RParen,
    Comma,
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | ':' | '.')
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, SltlError> {
    let mut toks = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(offset, c)) = chars.peek() {
        match c {
            c if c.is_whitespace() => {
                chars.next();
            }
            '!' => {
                chars.next();
                toks.push((offset, Tok::Bang));
            }
            '&' => {
                chars.next();
                toks.push((offset, Tok::Amp));
            }
            '|' => {
                chars.next();
                toks.push((offset, Tok::Pipe));
            }
            '-' => {
                chars.next();
                match chars.peek() {
                    Some(&(_, '>')) => {
                        chars.next();
                        toks.push((offset, Tok::Arrow));
                    }
                    _ => {
                        return Err(SltlError::Syntax {
                            offset,
                            msg: "expected '->'".into(),
                        })
                    }
                }
            }
            '<' => {
                chars.next();
                toks.push((offset, Tok::Lt));
            }
            '>' => {
                chars.next();
                toks.push((offset, Tok::Gt));
            }
            '[' => {
                chars.next();
                toks.push((offset, Tok::LBrack));
            }
            ']' => {
                chars.next();
                toks.push((offset, Tok::RBrack));
            }
            '(' => {
                chars.next();
                toks.push((offset, Tok::LParen));
            }
            ')' => {
                chars.next();
                toks.push((offset, Tok::RParen));
            }
            ',' => {
                chars.next();
                toks.push((offset, Tok::Comma));
            }
            '"' | '\u{201c}' => {
                let close = if c == '"' { '"' } else { '\u{201d}' };
                chars.next();
                let mut s = String::new();
                let mut closed = false;
                for (_, d) in chars.by_ref() {
                    if d == close {
                        closed = true;
                        break;
                    }
                    s.push(d);
                }
                if !closed {
                    return Err(SltlError::Syntax {
                        offset,
                        msg: "unterminated string".into(),
                    });
                }
                toks.push((offset, Tok::Str(s)));
            }
            c if is_ident_char(c) => {
                let mut s = String::new();
                while let Some(&(_, d)) = chars.peek() {
                    if is_ident_char(d) {
                        s.push(d);
                        chars.next();
                    } else {
                        break;
                    }
                }
                let tok = match s.as_str() {
                    "true" => Tok::True,
                    "false" => Tok::False,
                    "type" => Tok::Type,
                    "F" => Tok::FOp,
                    "G" => Tok::GOp,
                    "X" => Tok::XOp,
                    "U" => Tok::UOp,
                    _ => Tok::Ident(s),
                };
                toks.push((offset, tok));
            }
            _ => {
                return Err(SltlError::Syntax {
                    offset,
                    msg: format!("unexpected character '{c}'"),
                })
            }
        }
    }
    Ok(toks)
}

#[derive(Clone, Copy)]
enum Tax {
    Service,
    Type,
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    model: &'a DomainModel,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(o, _)| *o).unwrap_or(self.end)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), SltlError> {
        let offset = self.offset();
        match self.next() {
            Some(t) if t == tok => Ok(()),
            Some(t) => Err(SltlError::Syntax {
                offset,
                msg: format!("expected {what}, found {t:?}"),
            }),
            None => Err(SltlError::Syntax {
                offset,
                msg: format!("expected {what} at end of input"),
            }),
        }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, SltlError> {
        Err(SltlError::Syntax {
            offset: self.offset(),
            msg: msg.into(),
        })
    }

    // phi ::= implies-level
    fn formula(&mut self) -> Result<Formula, SltlError> {
        let lhs = self.or_level()?;
        if self.peek() == Some(&Tok::Arrow) {
            self.next();
            let rhs = self.formula()?;
            Ok(Formula::implies(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn or_level(&mut self) -> Result<Formula, SltlError> {
        let mut lhs = self.and_level()?;
        while self.peek() == Some(&Tok::Pipe) {
            self.next();
            let rhs = self.and_level()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and_level(&mut self) -> Result<Formula, SltlError> {
        let mut lhs = self.until_level()?;
        while self.peek() == Some(&Tok::Amp) {
            self.next();
            let rhs = self.until_level()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn until_level(&mut self) -> Result<Formula, SltlError> {
        let lhs = self.unary()?;
        if self.peek() == Some(&Tok::UOp) {
            self.next();
            let rhs = self.until_level()?;
            Ok(Formula::until(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn unary(&mut self) -> Result<Formula, SltlError> {
        match self.peek() {
            Some(Tok::True) => {
                self.next();
                Ok(Formula::True)
            }
            Some(Tok::False) => {
                self.next();
                Ok(Formula::False)
            }
            Some(Tok::Bang) => {
                self.next();
                Ok(Formula::not(self.unary()?))
            }
            Some(Tok::FOp) => {
                self.next();
                Ok(Formula::finally(self.unary()?))
            }
            Some(Tok::GOp) => {
                self.next();
                Ok(Formula::globally(self.unary()?))
            }
            Some(Tok::XOp) => {
                self.next();
                Ok(Formula::next(self.unary()?))
            }
            Some(Tok::Type) => {
                self.next();
                self.expect(Tok::LParen, "'(' after type")?;
                let atom = self.term(Tax::Type)?;
                self.expect(Tok::RParen, "')'")?;
                Ok(Formula::TypeAtom(atom))
            }
            Some(Tok::Lt) => {
                self.next();
                let sc = self.sc_or()?;
                self.expect(Tok::Gt, "'>'")?;
                Ok(Formula::diamond(sc, self.unary()?))
            }
            Some(Tok::LBrack) => {
                self.next();
                let sc = self.sc_or()?;
                self.expect(Tok::RBrack, "']'")?;
                Ok(Formula::box_(sc, self.unary()?))
            }
            Some(Tok::LParen) => {
                self.next();
                let f = self.formula()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(f)
            }
            Some(t) => {
                let t = t.clone();
                self.err(format!("unexpected token {t:?}"))
            }
            None => self.err("unexpected end of input"),
        }
    }

    fn sc_or(&mut self) -> Result<ServiceConstraint, SltlError> {
        let mut lhs = self.sc_and()?;
        while self.peek() == Some(&Tok::Pipe) {
            self.next();
            let rhs = self.sc_and()?;
            lhs = ServiceConstraint::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn sc_and(&mut self) -> Result<ServiceConstraint, SltlError> {
        let mut lhs = self.sc_unary()?;
        while self.peek() == Some(&Tok::Amp) {
            self.next();
            let rhs = self.sc_unary()?;
            lhs = ServiceConstraint::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn sc_unary(&mut self) -> Result<ServiceConstraint, SltlError> {
        match self.peek() {
            Some(Tok::True) => {
                self.next();
                Ok(ServiceConstraint::True)
            }
            Some(Tok::Bang) => {
                self.next();
                Ok(ServiceConstraint::Not(Box::new(self.sc_unary()?)))
            }
            Some(Tok::LParen) => {
                self.next();
                let sc = self.sc_or()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(sc)
            }
            Some(Tok::Ident(_)) | Some(Tok::Str(_)) => {
                let atom = self.term(Tax::Service)?;
                Ok(ServiceConstraint::Atom(atom))
            }
            Some(t) => {
                let t = t.clone();
                self.err(format!("unexpected token {t:?} in service constraint"))
            }
            None => self.err("unexpected end of input in service constraint"),
        }
    }

    fn term(&mut self, which: Tax) -> Result<TermRef, SltlError> {
        let text = match self.next() {
            Some(Tok::Ident(s)) | Some(Tok::Str(s)) => s,
            _ => return self.err("expected identifier or quoted name"),
        };
        let taxonomy = match which {
            Tax::Service => &self.model.service_taxonomy,
            Tax::Type => &self.model.type_taxonomy,
        };
        taxonomy
            .resolve(&text)
            .map_err(|e| SltlError::Resolve(text, e.to_string()))
    }
}

fn make_parser<'a>(text: &str, model: &'a DomainModel) -> Result<Parser<'a>, SltlError> {
    Ok(Parser {
        toks: lex(text)?,
        pos: 0,
        end: text.len(),
        model,
    })
}

/// Parse a single SLTL formula, resolving all atoms against the domain.
pub fn parse_formula(text: &str, model: &DomainModel) -> Result<Formula, SltlError> {
    let mut p = make_parser(text, model)?;
    let f = p.formula()?;
    if p.peek().is_some() {
        return p.err("trailing input after formula");
    }
    Ok(f)
}

/// Parse a standalone service constraint.
pub fn parse_service_constraint(
    text: &str,
    model: &DomainModel,
) -> Result<ServiceConstraint, SltlError> {
    let mut p = make_parser(text, model)?;
    let sc = p.sc_or()?;
    if p.peek().is_some() {
        return p.err("trailing input after service constraint");
    }
    Ok(sc)
}

/// Parse one constraint-file line: either a formula or a template
/// invocation of the form `template: kind(arg, ...)`.
pub fn parse_constraint_line(line: &str, model: &DomainModel) -> Result<Formula, SltlError> {
    match line.trim().strip_prefix("template:") {
        Some(rest) => parse_template_invocation(rest, model),
        None => parse_formula(line, model),
    }
}

fn parse_template_invocation(text: &str, model: &DomainModel) -> Result<Formula, SltlError> {
    let mut p = make_parser(text, model)?;
    let kind_name = match p.next() {
        Some(Tok::Ident(s)) => s,
        _ => return p.err("expected template name"),
    };
    let kind = TemplateKind::from_name(&kind_name)?;
    p.expect(Tok::LParen, "'(' after template name")?;
    let mut args = Vec::new();
    if p.peek() != Some(&Tok::RParen) {
        loop {
            args.push(p.term(Tax::Service)?);
            match p.peek() {
                Some(Tok::Comma) => {
                    p.next();
                }
                _ => break,
            }
        }
    }
    p.expect(Tok::RParen, "')'")?;
    if p.peek().is_some() {
        return p.err("trailing input after template invocation");
    }
    template(kind, &args)
}

/// Parse a constraint file: one formula or template per line, `#` comments,
/// all lines conjoined.
pub fn parse_constraint_file(text: &str, model: &DomainModel) -> Result<Formula, SltlError> {
    let mut formulas = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        formulas.push(parse_constraint_line(line, model)?);
    }
    Ok(conjoin(formulas))
}
