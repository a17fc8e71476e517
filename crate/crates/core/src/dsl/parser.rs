//! Hand-written LL(1) parser.
//!
//! ```text
//! expr   := term (('+' | '-') term)* | '0'
//! term   := ['-'] [coeff ['*']] factor*
//! coeff  := int ['/' int]
//! factor := name group*
//! group  := ('^' | '_') ('{' index* '}' | index)
//! index  := letter [''']
//! ```

use num_rational::Rational64;

use super::{DslError, Expression, Factor, Index, IndexGroup, Span, Term};

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

fn err<T>(at: usize, message: impl Into<String>) -> Result<T, DslError> {
    Err(DslError::Syntax {
        at,
        message: message.into(),
    })
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn int(&mut self) -> Result<i64, DslError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return err(start, "expected an integer");
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        text.parse().or_else(|_| err(start, "integer out of range"))
    }

    fn coeff(&mut self) -> Result<Option<Rational64>, DslError> {
        if !matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            return Ok(None);
        }
        let at = self.pos;
        let n = self.int()?;
        let d = if self.eat(b'/') { self.int()? } else { 1 };
        if d == 0 {
            return err(at, "zero denominator");
        }
        self.eat(b'*');
        Ok(Some(Rational64::new(n, d)))
    }

    fn index(&mut self) -> Result<Index, DslError> {
        let at = self.pos;
        match self.src.get(self.pos) {
            Some(c) if c.is_ascii_alphabetic() => {
                self.pos += 1;
                let dotted = self.src.get(self.pos) == Some(&b'\'');
                if dotted {
                    self.pos += 1;
                }
                Ok(Index {
                    letter: *c as char,
                    dotted,
                    at: Span(at),
                })
            }
            _ => err(at, "expected an index letter"),
        }
    }

    fn group(&mut self, upper: bool) -> Result<IndexGroup, DslError> {
        let mut indices = Vec::new();
        if self.eat(b'{') {
            loop {
                match self.peek() {
                    Some(b'}') => {
                        self.pos += 1;
                        break;
                    }
                    None => return err(self.pos, "unclosed '{'"),
                    _ => indices.push(self.index()?),
                }
            }
        } else {
            self.skip_ws();
            indices.push(self.index()?);
        }
        Ok(IndexGroup { upper, indices })
    }

    fn factor(&mut self) -> Result<Factor, DslError> {
        self.skip_ws();
        let at = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[at..self.pos]).expect("ascii").to_string();
        let mut groups = Vec::new();
        loop {
            match self.src.get(self.pos) {
                Some(b'^') => {
                    self.pos += 1;
                    groups.push(self.group(true)?);
                }
                Some(b'_') => {
                    self.pos += 1;
                    groups.push(self.group(false)?);
                }
                _ => break,
            }
        }
        Ok(Factor { name, groups, at: Span(at) })
    }

    fn term(&mut self, negate: bool) -> Result<Term, DslError> {
        let start = self.pos;
        let mut coeff = Rational64::from_integer(if negate { -1 } else { 1 });
        let explicit = self.coeff()?;
        if let Some(c) = explicit {
            coeff *= c;
        }
        let mut factors = Vec::new();
        while matches!(self.peek(), Some(c) if c.is_ascii_alphabetic()) {
            factors.push(self.factor()?);
        }
        if factors.is_empty() && explicit.is_none() {
            return err(self.pos.max(start), "expected a term");
        }
        Ok(Term { coeff, factors })
    }

    fn expression(&mut self) -> Result<Expression, DslError> {
        let mut terms = Vec::new();
        if self.peek().is_none() {
            return Ok(Expression { terms });
        }
        let mut negate = self.eat(b'-');
        loop {
            terms.push(self.term(negate)?);
            negate = match self.peek() {
                Some(b'+') => false,
                Some(b'-') => true,
                None => break,
                Some(c) if c.is_ascii() => return err(self.pos, format!("unexpected '{}'", c as char)),
                Some(_) => return err(self.pos, "non-ASCII input"),
            };
            self.pos += 1;
        }
        terms.retain(|t| *t.coeff.numer() != 0);
        Ok(Expression { terms })
    }
}

/// Syntax only; symbols and index rules are checked separately.
pub fn parse_syntax(text: &str) -> Result<Expression, DslError> {
    if let Some(at) = text.bytes().position(|b| !b.is_ascii()) {
        return err(at, "non-ASCII input");
    }
    Parser { src: text.as_bytes(), pos: 0 }.expression()
}

/// One expression per non-blank line; `#` starts a comment. Offsets in
/// errors are relative to the file.
pub fn parse_file(text: &str) -> Result<Vec<(usize, Expression)>, DslError> {
    let mut out = Vec::new();
    let mut base = 0;
    for (n, line) in text.split_inclusive('\n').enumerate() {
        let body = line.split('#').next().unwrap_or("");
        if !body.trim().is_empty() {
            let e = parse_syntax(body).map_err(|e| match e {
                DslError::Syntax { at, message } => DslError::Syntax { at: at + base, message },
                e => e,
            })?;
            out.push((n + 1, shift(e, base)));
        }
        base += line.len();
    }
    Ok(out)
}

fn shift(mut e: Expression, base: usize) -> Expression {
    for t in &mut e.terms {
        for f in &mut t.factors {
            f.at.0 += base;
            for g in &mut f.groups {
                for i in &mut g.indices {
                    i.at.0 += base;
                }
            }
        }
    }
    e
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ix(c: char) -> Index {
        Index {
            letter: c,
            dotted: false,
            at: Span(0),
        }
    }

    fn grp(upper: bool, s: &str) -> IndexGroup {
        IndexGroup {
            upper,
            indices: s.chars().filter(|c| !c.is_whitespace()).map(ix).collect(),
        }
    }

    fn fac(name: &str, groups: Vec<IndexGroup>) -> Factor {
        Factor {
            name: name.into(),
            groups,
            at: Span(0),
        }
    }

    #[test]
    fn quartic_pattern_by_hand() {
        let e = parse_syntax("g^{l m} W_l^{a b} W_m^{c a} phi^{b} phibar_{c}").unwrap();
        let want = Expression {
            terms: vec![Term {
                coeff: Rational64::from_integer(1),
                factors: vec![
                    fac("g", vec![grp(true, "lm")]),
                    fac("W", vec![grp(false, "l"), grp(true, "ab")]),
                    fac("W", vec![grp(false, "m"), grp(true, "ca")]),
                    fac("phi", vec![grp(true, "b")]),
                    fac("phibar", vec![grp(false, "c")]),
                ],
            }],
        };
        assert_eq!(e, want);
        assert_eq!(e.terms[0].factors[2].at.0, 18);
    }

    #[test]
    fn coefficients_and_signs() {
        let e = parse_syntax("-2/4 x^{a} - 3*y_a + z").unwrap();
        let c: Vec<Rational64> = e.terms.iter().map(|t| t.coeff).collect();
        assert_eq!(c, vec![Rational64::new(-1, 2), Rational64::from_integer(-3), Rational64::from_integer(1)]);
        assert_eq!(e.to_string(), "-1/2 x^{a} - 3 y_{a} + z");
    }

    #[test]
    fn dotted_indices() {
        let e = parse_syntax("Omega^{a}_{A A'}").unwrap();
        let f = &e.terms[0].factors[0];
        assert_eq!(f.rank(), 3);
        assert!(f.groups[1].indices[1].dotted);
        assert_eq!(e.to_string(), "Omega^{a}_{A A'}");
    }

    #[test]
    fn zero_and_empty() {
        assert!(parse_syntax("").unwrap().terms.is_empty());
        assert!(parse_syntax("0").unwrap().terms.is_empty());
        assert_eq!(Expression::default().to_string(), "0");
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        for (text, at) in [("x^{a", 4), ("x^ 1", 3), ("x + ", 4), ("x ) y", 2), ("1/0 x", 0), ("φ", 0)] {
            match parse_syntax(text) {
                Err(DslError::Syntax { at: got, .. }) => assert_eq!(got, at, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn files_skip_comments() {
        let src = "# header\nphi^{a} phibar_{a}\n\n  x_{b} # trailing\n";
        let v = parse_file(src).unwrap();
        assert_eq!(v.len(), 2);
        assert_eq!(v[0].0, 2);
        assert_eq!(v[1].1.terms[0].factors[0].at.0, 31);
    }
}
