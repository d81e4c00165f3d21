//! The norm mini-language:
//!
//! ```text
//! p:<real> | wl1:<w1>,<w2> | poly:(x1,y1);(x2,y2);... | rot:<radians>:(<expr>)
//!          | sum:<w>*(<expr>)+<w>*(<expr>)+...
//! ```
//!
//! Reals accept `inf`, `pi`, and products/quotients such as `1/3` or `pi/4`.

use super::Norm;
use crate::error::{Error, Result};
use crate::vec2::Vec2;

/// Parse a norm expression.
pub fn parse_norm(input: &str) -> Result<Norm> {
    let compact: String = input.chars().filter(|c| !c.is_whitespace()).collect();
    let mut p = Parser { s: compact.as_bytes(), pos: 0, src: input };
    let norm = p.expr()?;
    if p.pos != p.s.len() {
        return Err(p.fail("trailing characters"));
    }
    Ok(norm)
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
    src: &'a str,
}

impl<'a> Parser<'a> {
    fn fail(&self, reason: &str) -> Error {
        Error::NormParse {
            input: self.src.to_string(),
            reason: format!("{reason} (at offset {})", self.pos),
        }
    }

    fn peek(&self) -> Option<u8> {
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.fail(&format!("expected `{}`", c as char)))
        }
    }

    fn keyword(&mut self, kw: &str) -> bool {
        if self.s[self.pos..].starts_with(kw.as_bytes()) {
            self.pos += kw.len();
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Norm> {
        if self.keyword("p:") {
            let p = self.real()?;
            Norm::p(p)
        } else if self.keyword("wl1:") {
            let w1 = self.real()?;
            self.eat(b',')?;
            let w2 = self.real()?;
            Norm::weighted_l1(w1, w2)
        } else if self.keyword("poly:") {
            let mut pts = vec![self.point()?];
            while self.peek() == Some(b';') {
                self.pos += 1;
                pts.push(self.point()?);
            }
            Norm::polygonal(&pts)
        } else if self.keyword("rot:") {
            let angle = self.real()?;
            self.eat(b':')?;
            let inner = self.parenthesized()?;
            Norm::rotated(angle, inner)
        } else if self.keyword("sum:") {
            let mut terms = vec![self.weighted_term()?];
            while self.peek() == Some(b'+') {
                self.pos += 1;
                terms.push(self.weighted_term()?);
            }
            Norm::sum(terms)
        } else {
            Err(self.fail("expected one of p:, wl1:, poly:, rot:, sum:"))
        }
    }

    fn parenthesized(&mut self) -> Result<Norm> {
        self.eat(b'(')?;
        let n = self.expr()?;
        self.eat(b')')?;
        Ok(n)
    }

    fn weighted_term(&mut self) -> Result<(f64, Norm)> {
        let w = self.real()?;
        self.eat(b'*')?;
        Ok((w, self.parenthesized()?))
    }

    fn point(&mut self) -> Result<Vec2> {
        self.eat(b'(')?;
        let x = self.real()?;
        self.eat(b',')?;
        let y = self.real()?;
        self.eat(b')')?;
        Ok(Vec2::new(x, y))
    }

    fn real(&mut self) -> Result<f64> {
        let mut v = self.atom()?;
        loop {
            match self.peek() {
                Some(b'/') => {
                    self.pos += 1;
                    v /= self.atom()?;
                }
                Some(b'*') if self.s.get(self.pos + 1) != Some(&b'(') => {
                    self.pos += 1;
                    v *= self.atom()?;
                }
                _ => return Ok(v),
            }
        }
    }

    fn atom(&mut self) -> Result<f64> {
        let neg = if self.peek() == Some(b'-') {
            self.pos += 1;
            true
        } else {
            false
        };
        let v = if self.keyword("inf") {
            f64::INFINITY
        } else if self.keyword("pi") {
            std::f64::consts::PI
        } else {
            let start = self.pos;
            while let Some(c) = self.peek() {
                let exp_sign = (c == b'-' || c == b'+')
                    && self.pos > start
                    && matches!(self.s[self.pos - 1], b'e' | b'E');
                if c.is_ascii_digit() || c == b'.' || c == b'e' || c == b'E' || exp_sign {
                    self.pos += 1;
                } else {
                    break;
                }
            }
            let text = std::str::from_utf8(&self.s[start..self.pos]).unwrap_or("");
            text.parse::<f64>().map_err(|_| self.fail("expected a number"))?
        };
        Ok(if neg { -v } else { v })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_each_form() {
        assert_eq!(parse_norm("p:1").unwrap(), Norm::l1());
        assert_eq!(parse_norm("p:inf").unwrap(), Norm::linf());
        let w = parse_norm("wl1:1/3,3").unwrap();
        assert!((w.eval(Vec2::new(1.0, 1.0)) - 10.0 / 3.0).abs() < 1e-15);
        let poly = parse_norm("poly:(1,1);(-1,1);(-1,-1);(1,-1)").unwrap();
        assert_eq!(poly.eval(Vec2::new(2.0, -5.0)), 5.0);
        let r = parse_norm("rot:pi/4:(p:1)").unwrap();
        assert!((r.eval(Vec2::E1) - 2f64.sqrt()).abs() < 1e-12);
        let s = parse_norm("sum: 1*(p:1) + 2*(rot:0.5:(p:2))").unwrap();
        assert!((s.eval(Vec2::E1) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn round_trips_through_display() {
        for src in ["p:1", "p:inf", "wl1:0.5,3", "sum:1*(p:1)+1*(rot:0.7853981633974483:(p:1))"] {
            let n = parse_norm(src).unwrap();
            assert_eq!(parse_norm(&n.to_string()).unwrap(), n);
        }
    }

    #[test]
    fn reports_errors() {
        assert!(matches!(parse_norm("q:2"), Err(Error::NormParse { .. })));
        assert!(matches!(parse_norm("p:2)"), Err(Error::NormParse { .. })));
        assert!(matches!(parse_norm("p:0.5"), Err(Error::InvalidNorm(_))));
        assert!(matches!(parse_norm("wl1:1,-1"), Err(Error::InvalidNorm(_))));
    }
}
