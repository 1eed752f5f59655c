//! Recursive-descent parser for polynomial expressions.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary ('*' unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' integer)?
//! atom   := integer ('/' integer)? | identifier | '(' expr ')'
//! ```

use num_bigint::BigInt;
use num_traits::Zero;

use super::{Polynomial, Vars};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub fn parse_poly(text: &str, vars: &Vars) -> Result<Polynomial> {
    let mut parser = Parser {
        src: text.as_bytes(),
        pos: 0,
        vars,
    };
    let p = parser.expr()?;
    parser.skip_ws();
    if parser.pos < parser.src.len() {
        return Err(parser.error("unexpected trailing input"));
    }
    Ok(p)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    vars: &'a Vars,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> Error {
        let found = match self.src.get(self.pos) {
            Some(&c) => format!("{message} (found `{}`)", c as char),
            None => format!("{message} (found end of input)"),
        };
        Error::Syntax {
            position: self.pos,
            message: found,
        }
    }

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

    fn expr(&mut self) -> Result<Polynomial> {
        let mut acc = self.term()?;
        loop {
            if self.eat(b'+') {
                acc = acc.add(&self.term()?)?;
            } else if self.eat(b'-') {
                acc = acc.sub(&self.term()?)?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Polynomial> {
        let mut acc = self.unary()?;
        while self.eat(b'*') {
            acc = acc.mul(&self.unary()?)?;
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Polynomial> {
        if self.eat(b'-') {
            Ok(self.unary()?.neg())
        } else if self.eat(b'+') {
            self.unary()
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Polynomial> {
        let base = self.atom()?;
        if self.eat(b'^') {
            self.skip_ws();
            let start = self.pos;
            let digits = self.digits();
            if digits.is_empty() {
                return Err(self.error("expected a nonnegative integer exponent"));
            }
            let exp: u32 = digits.parse().map_err(|_| Error::Syntax {
                position: start,
                message: format!("exponent `{digits}` out of range"),
            })?;
            Ok(base.pow(exp))
        } else {
            Ok(base)
        }
    }

    fn digits(&mut self) -> String {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }

    fn atom(&mut self) -> Result<Polynomial> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.error("expected `)`"));
                }
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() => {
                let numer: BigInt = self.digits().parse().expect("digits");
                let mut value = Scalar::from_integer(numer);
                // `p/q` is a literal; `/` is not a general operator.
                if self.src.get(self.pos) == Some(&b'/') {
                    self.pos += 1;
                    let denom = self.digits();
                    if denom.is_empty() {
                        return Err(self.error("expected a denominator after `/`"));
                    }
                    let denom: BigInt = denom.parse().expect("digits");
                    if denom.is_zero() {
                        return Err(self.error("zero denominator"));
                    }
                    value /= Scalar::from_integer(denom);
                }
                Ok(Polynomial::constant(self.vars, value))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
                Polynomial::var_named(self.vars, name)
            }
            _ => Err(self.error("expected a number, variable or `(`")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Degree;
    use crate::scalar::int;

    #[test]
    fn parses_examples() {
        let xy = Vars::xy();
        let p = parse_poly("x", &xy).unwrap();
        assert_eq!(p, Polynomial::var(&xy, 0));

        let p = parse_poly("y^2 + 1 + x", &xy).unwrap();
        assert_eq!(p.num_terms(), 3);
        assert_eq!(p.coefficient(&[0, 2]), int(1));
        assert_eq!(p.coefficient(&[0, 0]), int(1));
        assert_eq!(p.coefficient(&[1, 0]), int(1));
        assert_eq!(p.total_degree(), Degree::Finite(2));

        let p = parse_poly("(x+y)^2 - x^2 - 2*x*y", &xy).unwrap();
        assert_eq!(p, parse_poly("y^2", &xy).unwrap());
    }

    #[test]
    fn rational_literals_and_unary_minus() {
        let xy = Vars::xy();
        let p = parse_poly("-1/2*x + -(y - 3/4)", &xy).unwrap();
        assert_eq!(p.to_string(), "-1/2*x - y + 3/4");
    }

    #[test]
    fn errors_carry_positions() {
        let xy = Vars::xy();
        match parse_poly("x + * y", &xy) {
            Err(Error::Syntax { position, .. }) => assert_eq!(position, 4),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_poly("x + z", &xy),
            Err(Error::UnknownVariable { .. })
        ));
        assert!(matches!(parse_poly("2x", &xy), Err(Error::Syntax { .. })));
        assert!(matches!(parse_poly("(x", &xy), Err(Error::Syntax { .. })));
        assert!(matches!(parse_poly("x^-1", &xy), Err(Error::Syntax { .. })));
        assert!(matches!(parse_poly("1/0", &xy), Err(Error::Syntax { .. })));
    }
}
