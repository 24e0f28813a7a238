use num::Zero;
use thiserror::Error;

use super::ast::{AtomKind, DivergenceAtom, KlExpression, LagrangianObjective};
use super::basis::{BasisTerm, DistRef, Family, Signature};
use crate::term_algebra::{parse_rational, Rational};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown distribution reference at byte {offset}: {found}")]
    UnknownDistribution { offset: usize, found: String },
    #[error("{kind} atom at byte {offset} has mismatched signatures: {left} vs {right}")]
    MismatchedSignatures {
        kind: String,
        offset: usize,
        left: String,
        right: String,
    },
}

fn syntax(offset: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        offset,
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Plus,
    Minus,
    Star,
    Slash,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Pipe,
    Comma,
    Number(String),
    Ident(String),
}

struct Lexer {
    toks: Vec<(usize, Tok)>,
    end: usize,
}

fn lex(text: &str) -> Result<Lexer, ParseError> {
    let bytes = text.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0usize;
    while i < bytes.len() {
        let b = bytes[i];
        match b {
            b' ' | b'\t' | b'\n' | b'\r' => i += 1,
            b'+' => {
                toks.push((i, Tok::Plus));
                i += 1;
            }
            b'-' => {
                toks.push((i, Tok::Minus));
                i += 1;
            }
            b'*' => {
                toks.push((i, Tok::Star));
                i += 1;
            }
            b'/' => {
                toks.push((i, Tok::Slash));
                i += 1;
            }
            b'(' => {
                toks.push((i, Tok::LParen));
                i += 1;
            }
            b')' => {
                toks.push((i, Tok::RParen));
                i += 1;
            }
            b'[' => {
                toks.push((i, Tok::LBracket));
                i += 1;
            }
            b']' => {
                toks.push((i, Tok::RBracket));
                i += 1;
            }
            b'|' => {
                toks.push((i, Tok::Pipe));
                i += 1;
            }
            b',' => {
                toks.push((i, Tok::Comma));
                i += 1;
            }
            b'0'..=b'9' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                toks.push((start, Tok::Number(text[start..i].to_string())));
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                toks.push((start, Tok::Ident(text[start..i].to_string())));
            }
            _ => return Err(syntax(i, format!("unexpected character {:?}", b as char))),
        }
    }
    Ok(Lexer {
        toks,
        end: bytes.len(),
    })
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    fn next(&mut self) -> Option<(usize, Tok)> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<usize, ParseError> {
        match self.next() {
            Some((o, t)) if t == want => Ok(o),
            Some((o, t)) => Err(syntax(o, format!("expected {what}, found {t:?}"))),
            None => Err(syntax(self.end, format!("expected {what}, found end of input"))),
        }
    }

    fn parse_number(&mut self) -> Result<Rational, ParseError> {
        let (o, t) = self
            .next()
            .ok_or_else(|| syntax(self.end, "expected number"))?;
        let Tok::Number(num) = t else {
            return Err(syntax(o, format!("expected number, found {t:?}")));
        };
        let mut lit = num;
        if matches!(self.peek(), Some(Tok::Slash)) {
            self.next();
            let (o2, t2) = self
                .next()
                .ok_or_else(|| syntax(self.end, "expected denominator"))?;
            let Tok::Number(den) = t2 else {
                return Err(syntax(o2, format!("expected denominator, found {t2:?}")));
            };
            lit = format!("{lit}/{den}");
        }
        parse_rational(&lit).ok_or_else(|| syntax(o, format!("bad numeric literal {lit:?}")))
    }

    fn parse_dist(&mut self) -> Result<(usize, DistRef), ParseError> {
        let (o, t) = self
            .next()
            .ok_or_else(|| syntax(self.end, "expected distribution"))?;
        let Tok::Ident(name) = &t else {
            return Err(syntax(o, format!("expected distribution, found {t:?}")));
        };
        let family = match name.as_str() {
            "p" => Family::P,
            "q" => Family::Q,
            other => {
                return Err(ParseError::UnknownDistribution {
                    offset: o,
                    found: other.to_string(),
                })
            }
        };
        self.expect(Tok::LParen, "'('")?;
        let (vo, vt) = self
            .next()
            .ok_or_else(|| syntax(self.end, "expected variable"))?;
        let first = match &vt {
            Tok::Ident(v) if v == "x" => 'x',
            Tok::Ident(v) if v == "z" => 'z',
            _ => {
                return Err(ParseError::UnknownDistribution {
                    offset: vo,
                    found: format!("{}({:?}", family.letter(), vt),
                })
            }
        };
        let signature = match self.peek() {
            Some(Tok::RParen) => {
                if first == 'x' {
                    Signature::MargX
                } else {
                    Signature::MargZ
                }
            }
            Some(Tok::Comma) => {
                self.next();
                let (o2, t2) = self
                    .next()
                    .ok_or_else(|| syntax(self.end, "expected variable"))?;
                match (&first, &t2) {
                    ('x', Tok::Ident(v)) if v == "z" => Signature::Joint,
                    _ => {
                        return Err(ParseError::UnknownDistribution {
                            offset: o2,
                            found: format!("{}({},...)", family.letter(), first),
                        })
                    }
                }
            }
            Some(Tok::Pipe) => {
                self.next();
                let (o2, t2) = self
                    .next()
                    .ok_or_else(|| syntax(self.end, "expected variable"))?;
                match (&first, &t2) {
                    ('x', Tok::Ident(v)) if v == "z" => Signature::CondXGivenZ,
                    ('z', Tok::Ident(v)) if v == "x" => Signature::CondZGivenX,
                    _ => {
                        return Err(ParseError::UnknownDistribution {
                            offset: o2,
                            found: format!("{}({}|...)", family.letter(), first),
                        })
                    }
                }
            }
            _ => return Err(syntax(self.offset(), "expected ')', ',' or '|'")),
        };
        self.expect(Tok::RParen, "')'")?;
        Ok((o, DistRef::new(family, signature)))
    }

    fn parse_divergence_pair(&mut self) -> Result<(usize, DistRef, DistRef), ParseError> {
        self.expect(Tok::LParen, "'('")?;
        let (lo, left) = self.parse_dist()?;
        self.expect(Tok::Pipe, "'||'")?;
        self.expect(Tok::Pipe, "'||'")?;
        let (_, right) = self.parse_dist()?;
        self.expect(Tok::RParen, "')'")?;
        Ok((lo, left, right))
    }

    fn parse_term(&mut self, obj: &mut LagrangianObjective, sign: Rational) -> Result<(), ParseError> {
        let coef = if matches!(self.peek(), Some(Tok::Number(_))) {
            let c = self.parse_number()?;
            self.expect(Tok::Star, "'*'")?;
            c
        } else {
            Rational::from_integer(1.into())
        };
        let coef = sign * coef;
        let (o, t) = self
            .next()
            .ok_or_else(|| syntax(self.end, "expected objective term"))?;
        let Tok::Ident(name) = &t else {
            return Err(syntax(o, format!("expected objective term, found {t:?}")));
        };
        match name.as_str() {
            "I_q" => obj.add_expression(KlExpression::InfoQ, &coef),
            "I_p" => obj.add_expression(KlExpression::InfoP, &coef),
            "KL" => {
                let (ao, left, right) = self.parse_divergence_pair()?;
                if left.signature != right.signature {
                    return Err(ParseError::MismatchedSignatures {
                        kind: "KL".into(),
                        offset: ao,
                        left: left.to_string(),
                        right: right.to_string(),
                    });
                }
                // D(d||d) is identically zero; it contributes nothing.
                if left != right {
                    obj.add_expression(KlExpression::kl(left.family, left.signature), &coef);
                }
            }
            "JS" | "MMD" | "W" | "F" => {
                let kind = match name.as_str() {
                    "JS" => AtomKind::Js,
                    "MMD" => AtomKind::Mmd,
                    "W" => AtomKind::W,
                    _ => AtomKind::F,
                };
                let (ao, left, right) = self.parse_divergence_pair()?;
                match DivergenceAtom::new(kind, left, right, coef) {
                    Some(atom) => obj.add_atom(atom),
                    None => {
                        return Err(ParseError::MismatchedSignatures {
                            kind: name.clone(),
                            offset: ao,
                            left: left.to_string(),
                            right: right.to_string(),
                        })
                    }
                }
            }
            "E_p" | "E_q" => {
                let outer = if name == "E_p" { Family::P } else { Family::Q };
                self.expect(Tok::LBracket, "'['")?;
                match self.next() {
                    Some((_, Tok::Ident(kw))) if kw == "log" => {}
                    Some((o2, t2)) => {
                        return Err(syntax(o2, format!("expected 'log', found {t2:?}")))
                    }
                    None => return Err(syntax(self.end, "expected 'log'")),
                }
                let (_, dist) = self.parse_dist()?;
                self.expect(Tok::RBracket, "']'")?;
                obj.add_log_term(BasisTerm::new(outer, dist), &coef);
            }
            other => return Err(syntax(o, format!("unknown objective atom {other:?}"))),
        }
        Ok(())
    }
}

/// Parses the textual objective grammar.
///
/// An objective is a signed sum of terms `[coef *] atom`, where atoms are
/// `I_q`, `I_p`, `KL(d||d)`, `JS(d||d)`, `MMD(d||d)`, `W(d||d)`, `F(d||d)`
/// or `E_p[log d]` / `E_q[log d]`, and `d` ranges over the ten
/// distribution references. Whitespace is insignificant; coefficients may
/// be integers, fractions or decimals and are kept exact.
pub fn parse_objective(text: &str) -> Result<LagrangianObjective, ParseError> {
    let lexer = lex(text)?;
    let mut p = Parser {
        toks: lexer.toks,
        pos: 0,
        end: lexer.end,
    };
    let mut obj = LagrangianObjective::zero();
    if p.peek().is_none() {
        return Err(syntax(0, "empty objective"));
    }
    let mut sign = Rational::from_integer(1.into());
    if matches!(p.peek(), Some(Tok::Minus)) {
        p.next();
        sign = -sign;
    } else if matches!(p.peek(), Some(Tok::Plus)) {
        p.next();
    }
    p.parse_term(&mut obj, sign)?;
    while let Some(t) = p.peek() {
        let sign = match t {
            Tok::Plus => Rational::from_integer(1.into()),
            Tok::Minus => -Rational::from_integer(1.into()),
            _ => {
                return Err(syntax(
                    p.offset(),
                    format!("expected '+' or '-' between terms, found {t:?}"),
                ))
            }
        };
        p.next();
        p.parse_term(&mut obj, sign)?;
    }
    Ok(obj)
}

/// Parses the structured (JSON map) objective format: each key is a single
/// atom in the text grammar, each value its coefficient (number or string;
/// strings may carry exact fractions like `"1/3"`).
pub fn parse_objective_json(text: &str) -> Result<LagrangianObjective, ParseError> {
    let map: serde_json::Map<String, serde_json::Value> = serde_json::from_str(text)
        .map_err(|e| syntax(0, format!("invalid objective JSON: {e}")))?;
    let mut obj = LagrangianObjective::zero();
    for (key, value) in &map {
        let coef_text = match value {
            serde_json::Value::Number(n) => n.to_string(),
            serde_json::Value::String(s) => s.clone(),
            other => {
                return Err(syntax(
                    0,
                    format!("coefficient for {key:?} must be a number, got {other}"),
                ))
            }
        };
        let coef = parse_rational(&coef_text)
            .ok_or_else(|| syntax(0, format!("bad coefficient {coef_text:?} for {key:?}")))?;
        if coef.is_zero() {
            continue;
        }
        let single = parse_objective(key)?;
        obj = obj.linear_combine(&coef, &single);
    }
    Ok(obj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term_algebra::{rat, rat_int};

    #[test]
    fn parses_direct_transcription() {
        let obj = parse_objective("1*I_q + 1*KL(q(x,z)||p(x,z))").unwrap();
        assert_eq!(obj.kl_part.info_q(), &rat_int(1));
        assert_eq!(
            obj.kl_part
                .get(KlExpression::kl(Family::Q, Signature::Joint)),
            &rat_int(1)
        );
        assert!(obj.atoms.is_empty());
    }

    #[test]
    fn parses_infogan_shape_with_js_atom() {
        let obj = parse_objective("-1*I_p + KL(p(z|x)||q(z|x)) + 2*JS(q(x)||p(x))").unwrap();
        assert_eq!(obj.kl_part.info_p(), &rat_int(-1));
        assert_eq!(
            obj.kl_part
                .get(KlExpression::kl(Family::P, Signature::CondZGivenX)),
            &rat_int(1)
        );
        assert_eq!(obj.atoms.len(), 1);
        assert_eq!(obj.atoms[0].kind, AtomKind::Js);
        assert_eq!(obj.atoms[0].weight, rat_int(2));
    }

    #[test]
    fn self_divergence_parses_to_zero() {
        let obj = parse_objective("KL(q(x)||q(x))").unwrap();
        assert!(obj.kl_part.is_zero());
        assert!(obj.log_terms.is_zero());
        assert!(obj.atoms.is_empty());
    }

    #[test]
    fn decimals_become_exact_rationals() {
        let obj = parse_objective("0.5*I_q - 0.25*E_q[log p(x|z)]").unwrap();
        assert_eq!(obj.kl_part.info_q(), &rat(1, 2));
        let idx = BasisTerm::new(
            Family::Q,
            DistRef::new(Family::P, Signature::CondXGivenZ),
        )
        .index();
        assert_eq!(obj.log_terms.get(idx), &rat(-1, 4));
    }

    #[test]
    fn whitespace_insensitive() {
        let a = parse_objective("1*I_q+2*KL(q(z)||p(z))").unwrap();
        let b = parse_objective("  1 * I_q  +  2 * KL( q( z ) | | p( z ) ) ").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn syntax_errors_carry_byte_offsets() {
        let err = parse_objective("1*I_q + ^").unwrap_err();
        assert_eq!(err, syntax(8, "unexpected character '^'"));
        match parse_objective("1*").unwrap_err() {
            ParseError::Syntax { offset, .. } => assert_eq!(offset, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_distribution_rejected() {
        match parse_objective("KL(r(x)||p(x))").unwrap_err() {
            ParseError::UnknownDistribution { offset, found } => {
                assert_eq!(offset, 3);
                assert_eq!(found, "r");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn mismatched_signatures_rejected() {
        assert!(matches!(
            parse_objective("JS(q(x)||p(z))").unwrap_err(),
            ParseError::MismatchedSignatures { .. }
        ));
        assert!(matches!(
            parse_objective("KL(q(x,z)||p(z))").unwrap_err(),
            ParseError::MismatchedSignatures { .. }
        ));
    }

    #[test]
    fn print_parse_round_trip() {
        let texts = [
            "1*I_q + 1*KL(q(x,z)||p(x,z))",
            "-1*I_p + KL(p(z|x)||q(z|x)) + 2*JS(q(x)||p(x))",
            "0.5*I_q - 3*MMD(q(z)||p(z)) + 1/3*E_p[log q(z|x)]",
            "2*W(q(x,z)||p(x,z)) - 1*F(q(z)||p(z))",
            "0*I_q",
        ];
        for t in texts {
            let once = parse_objective(t).unwrap();
            let printed = once.to_string();
            let twice = parse_objective(&printed).unwrap();
            assert_eq!(once, twice, "round trip failed for {t:?} -> {printed:?}");
        }
    }

    #[test]
    fn json_objective_format() {
        let obj = parse_objective_json(
            r#"{"I_q": 1, "KL(q(x,z)||p(x,z))": "1/2", "JS(q(x)||p(x))": 0.25}"#,
        )
        .unwrap();
        assert_eq!(obj.kl_part.info_q(), &rat_int(1));
        assert_eq!(
            obj.kl_part
                .get(KlExpression::kl(Family::Q, Signature::Joint)),
            &rat(1, 2)
        );
        assert_eq!(obj.atoms[0].weight, rat(1, 4));
    }
}
