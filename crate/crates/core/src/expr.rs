//! Text form of algebra elements.
//!
//! ```text
//! element ::= ['+'|'-'] term (('+'|'-') term)*
//! term    ::= factor ('*' factor)*
//! factor  ::= 'g'INT | NUMBER | '(' re ('+'|'-') im 'i' ')'
//!           | 'adj(' element ')' | '(' element ')'
//! ```
//!
//! `Element`'s `Display` output is accepted by this grammar and parses back
//! to an equal element.

use num_complex::Complex64;

use crate::algebra::{AlgebraError, Conjugation, Element, Generator};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

/// Parses `text` with `adj` interpreted under the coordinate conjugation.
pub fn parse_expression(text: &str) -> Result<Element, ParseError> {
    parse_expression_with(text, &Conjugation::Coordinate)
}

/// Parses `text` with `adj` interpreted under `conjugation`.
pub fn parse_expression_with(text: &str, conjugation: &Conjugation) -> Result<Element, ParseError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        conjugation,
    };
    p.skip_ws();
    if p.at_end() {
        return Err(p.error("empty expression"));
    }
    let e = p.element()?;
    p.skip_ws();
    if !p.at_end() {
        return Err(p.error(&format!("unexpected '{}'", p.peek_char())));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    conjugation: &'a Conjugation,
}

impl Parser<'_> {
    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn peek_char(&self) -> char {
        std::str::from_utf8(&self.src[self.pos..])
            .ok()
            .and_then(|s| s.chars().next())
            .unwrap_or('?')
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b) if b.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn error_at(&self, pos: usize, message: &str) -> ParseError {
        let before = &self.src[..pos.min(self.src.len())];
        let line = 1 + before.iter().filter(|&&b| b == b'\n').count();
        let line_start = before.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
        let column = 1 + String::from_utf8_lossy(&before[line_start..]).chars().count();
        ParseError {
            line,
            column,
            message: message.to_string(),
        }
    }

    fn error(&self, message: &str) -> ParseError {
        self.error_at(self.pos, message)
    }

    fn expect(&mut self, b: u8) -> Result<(), ParseError> {
        self.skip_ws();
        if self.peek() == Some(b) {
            self.pos += 1;
            Ok(())
        } else if self.at_end() {
            Err(self.error(&format!("expected '{}', found end of input", b as char)))
        } else {
            Err(self.error(&format!("expected '{}', found '{}'", b as char, self.peek_char())))
        }
    }

    fn element(&mut self) -> Result<Element, ParseError> {
        self.skip_ws();
        let mut sign = 1.0;
        match self.peek() {
            Some(b'+') => self.pos += 1,
            Some(b'-') => {
                self.pos += 1;
                sign = -1.0;
            }
            _ => {}
        }
        let mut acc = self.term()?.scale(Complex64::new(sign, 0.0));
        loop {
            self.skip_ws();
            let sign = match self.peek() {
                Some(b'+') => 1.0,
                Some(b'-') => -1.0,
                _ => break,
            };
            self.pos += 1;
            let t = self.term()?;
            acc += &t.scale(Complex64::new(sign, 0.0));
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Element, ParseError> {
        let mut acc = self.factor()?;
        loop {
            self.skip_ws();
            if self.peek() != Some(b'*') {
                break;
            }
            self.pos += 1;
            let f = self.factor()?;
            acc = &acc * &f;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Element, ParseError> {
        self.skip_ws();
        let start = self.pos;
        match self.peek() {
            None => Err(self.error("expected a factor, found end of input")),
            Some(b'(') => {
                if let Some((z, end)) = self.complex_literal() {
                    self.pos = end;
                    return Ok(Element::scalar(z));
                }
                self.pos += 1;
                let e = self.element()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(b) if b.is_ascii_digit() || b == b'.' => {
                let (x, end) = scan_number(self.src, self.pos)
                    .ok_or_else(|| self.error("malformed number"))?;
                self.pos = end;
                Ok(Element::scalar(Complex64::new(x, 0.0)))
            }
            Some(b) if b.is_ascii_alphabetic() => {
                while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
                    self.pos += 1;
                }
                let ident = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                if ident == "adj" {
                    self.expect(b'(')?;
                    let inner = self.element()?;
                    self.expect(b')')?;
                    return inner.involute(self.conjugation).map_err(|e| match e {
                        AlgebraError::OutsideBlock { index, dim } => self.error_at(
                            start,
                            &format!("adj: generator g{index} outside conjugation block of dimension {dim}"),
                        ),
                        other => self.error_at(start, &other.to_string()),
                    });
                }
                if let Some(digits) = ident.strip_prefix('g') {
                    if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
                        let index = digits
                            .parse::<u32>()
                            .ok()
                            .and_then(|i| Generator::new(i).ok())
                            .ok_or_else(|| {
                                self.error_at(start, &format!("unknown generator token '{ident}'"))
                            })?;
                        return Ok(Element::generator(index));
                    }
                }
                Err(self.error_at(start, &format!("unknown generator token '{ident}'")))
            }
            Some(_) => Err(self.error(&format!("unexpected '{}'", self.peek_char()))),
        }
    }

    /// Tries `(re±imi)` at the current position without consuming input.
    fn complex_literal(&self) -> Option<(Complex64, usize)> {
        let s = self.src;
        let mut i = self.pos + 1;
        let skip = |i: &mut usize| {
            while s.get(*i).is_some_and(|b| b.is_ascii_whitespace()) {
                *i += 1;
            }
        };
        skip(&mut i);
        let mut re_sign = 1.0;
        if let Some(&b) = s.get(i) {
            if b == b'+' || b == b'-' {
                re_sign = if b == b'-' { -1.0 } else { 1.0 };
                i += 1;
            }
        }
        let (re, j) = scan_number(s, i)?;
        i = j;
        skip(&mut i);
        let im_sign = match s.get(i)? {
            b'+' => 1.0,
            b'-' => -1.0,
            _ => return None,
        };
        i += 1;
        skip(&mut i);
        let (im, j) = scan_number(s, i)?;
        i = j;
        skip(&mut i);
        if s.get(i)? != &b'i' {
            return None;
        }
        i += 1;
        skip(&mut i);
        if s.get(i)? != &b')' {
            return None;
        }
        Some((Complex64::new(re_sign * re, im_sign * im), i + 1))
    }
}

/// Scans an unsigned decimal `digits[.digits][e[+-]digits]` starting at `i`.
fn scan_number(s: &[u8], mut i: usize) -> Option<(f64, usize)> {
    let start = i;
    let digits = |i: &mut usize| {
        let from = *i;
        while s.get(*i).is_some_and(u8::is_ascii_digit) {
            *i += 1;
        }
        *i - from
    };
    let mut n = digits(&mut i);
    if s.get(i) == Some(&b'.') {
        i += 1;
        n += digits(&mut i);
    }
    if n == 0 {
        return None;
    }
    if matches!(s.get(i), Some(b'e') | Some(b'E')) {
        let mut j = i + 1;
        if matches!(s.get(j), Some(b'+') | Some(b'-')) {
            j += 1;
        }
        if digits(&mut j) > 0 {
            i = j;
        }
    }
    let text = std::str::from_utf8(&s[start..i]).ok()?;
    text.parse::<f64>().ok().map(|x| (x, i))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Word;

    fn w(ix: &[u32]) -> Word {
        Word::from_indices(ix).unwrap()
    }

    #[test]
    fn parses_sums_with_complex_coefficients() {
        let e = parse_expression("g1*g2 + (0+1i)*g3").unwrap();
        let expected = Element::word(w(&[1, 2])) + Element::term(w(&[3]), Complex64::new(0.0, 1.0));
        assert_eq!(e, expected);
    }

    #[test]
    fn adj_reverses_under_coordinate_conjugation() {
        assert_eq!(parse_expression("adj(g1*g2)").unwrap(), Element::word(w(&[2, 1])));
        let swap = Conjugation::pair_swap(1);
        assert_eq!(parse_expression_with("adj(g1)", &swap).unwrap(), Element::g(2));
    }

    #[test]
    fn distributes() {
        assert_eq!(
            parse_expression("g1*(g2+g3)").unwrap(),
            parse_expression("g1*g2 + g1*g3").unwrap()
        );
    }

    #[test]
    fn numbers_signs_and_units() {
        assert_eq!(
            parse_expression("-2.5e-1*g1 - 1").unwrap(),
            Element::g(1).scale(Complex64::new(-0.25, 0.0)) - Element::unit()
        );
        assert!(parse_expression("0").unwrap().is_zero());
        assert_eq!(
            parse_expression("(-1.5e-3-2.0i)").unwrap(),
            Element::scalar(Complex64::new(-1.5e-3, -2.0))
        );
    }

    #[test]
    fn display_round_trips() {
        let e = Element::term(w(&[2, 1]), Complex64::new(-1e-20, 3.5))
            + Element::term(w(&[]), Complex64::new(0.1, -0.0));
        assert_eq!(parse_expression(&e.to_string()).unwrap(), e);
    }

    #[test]
    fn reports_positions() {
        let err = parse_expression("g1 +\n  x2").unwrap_err();
        assert_eq!((err.line, err.column), (2, 3));
        assert!(err.message.contains("unknown generator token 'x2'"));
        assert!(parse_expression("g0").is_err());
        assert!(parse_expression("g1 *").is_err());
        assert!(parse_expression("(g1").is_err());
        assert!(parse_expression("").is_err());
        assert!(parse_expression("g1 g2").is_err());
    }
}
