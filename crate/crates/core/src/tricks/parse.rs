use std::collections::BTreeSet;

use super::{Primitive, TimeScale, TrickExpr};
use crate::error::{Error, Result};

/// The trick-expression grammar, for help and usage messages.
pub const GRAMMAR: &str = "\
expr    := concat
concat  := product ('#' product)*
product := shifted ('*' shifted)*
shifted := scaled ('!O')?
scaled  := power ('@' RATIONAL)?
power   := atom ('^' INTEGER)?
atom    := 'O' | 'S' | 'K' | 'U' | 'rev' '(' expr ')' | '(' expr ')'

INTEGER  := '-'? DIGITS            (nonzero, e.g. 2, -1)
RATIONAL := DIGITS ('.' DIGITS)? | DIGITS '/' DIGITS   (in (0, 1], e.g. 0.5, 1/3)";

const MAX_DECIMALS: usize = 15;

/// Parses a trick expression. Whitespace is ignored between tokens.
pub fn parse(src: &str) -> Result<TrickExpr> {
    let mut p = Parser {
        src: src.as_bytes(),
        pos: 0,
        expected: BTreeSet::new(),
    };
    p.skip_ws();
    if p.pos == p.src.len() {
        return Err(p.error_expecting(&["O", "S", "K", "U", "rev", "("]));
    }
    let e = p.concat()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.error_expecting(&["end of input"]));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    // Tokens that would have been accepted at `pos`; reset on every advance.
    expected: BTreeSet<&'static str>,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn advance_to(&mut self, pos: usize) {
        self.pos = pos;
        self.expected.clear();
    }

    fn eat(&mut self, tok: &'static str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(tok.as_bytes()) {
            self.advance_to(self.pos + tok.len());
            true
        } else {
            self.expected.insert(tok);
            false
        }
    }

    fn error_expecting(&mut self, extra: &[&'static str]) -> Error {
        self.skip_ws();
        self.expected.extend(extra.iter().copied());
        Error::Syntax {
            offset: self.pos,
            expected: self.expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn concat(&mut self) -> Result<TrickExpr> {
        let mut left = self.product()?;
        while self.eat("#") {
            let right = self.product()?;
            left = TrickExpr::concat(left, right);
        }
        Ok(left)
    }

    fn product(&mut self) -> Result<TrickExpr> {
        let mut left = self.shifted()?;
        while self.eat("*") {
            let right = self.shifted()?;
            left = TrickExpr::product(left, right);
        }
        Ok(left)
    }

    fn shifted(&mut self) -> Result<TrickExpr> {
        let inner = self.scaled()?;
        if self.eat("!") {
            if !self.eat("O") {
                return Err(self.error_expecting(&[]));
            }
            return Ok(TrickExpr::o_shift(inner));
        }
        self.expected.remove("!");
        self.expected.insert("!O");
        Ok(inner)
    }

    fn scaled(&mut self) -> Result<TrickExpr> {
        let inner = self.power()?;
        if self.eat("@") {
            let c = self.rational()?;
            return Ok(TrickExpr::time_scale(inner, c));
        }
        Ok(inner)
    }

    fn power(&mut self) -> Result<TrickExpr> {
        let inner = self.atom()?;
        if self.eat("^") {
            let start = self.pos;
            let n = self.integer()?;
            if n == 0 {
                self.pos = start;
                return Err(self.error_expecting(&["nonzero INTEGER"]));
            }
            return Ok(TrickExpr::power(inner, n));
        }
        Ok(inner)
    }

    fn atom(&mut self) -> Result<TrickExpr> {
        for (tok, p) in [
            ("O", Primitive::O),
            ("S", Primitive::S),
            ("K", Primitive::K),
            ("U", Primitive::U),
        ] {
            if self.eat(tok) {
                return Ok(TrickExpr::prim(p));
            }
        }
        if self.eat("rev") {
            if !self.eat("(") {
                return Err(self.error_expecting(&[]));
            }
            let inner = self.concat()?;
            if !self.eat(")") {
                return Err(self.error_expecting(&[]));
            }
            return Ok(TrickExpr::reverse(inner));
        }
        if self.eat("(") {
            let inner = self.concat()?;
            if !self.eat(")") {
                return Err(self.error_expecting(&[]));
            }
            return Ok(inner);
        }
        Err(self.error_expecting(&[]))
    }

    fn digits(&mut self) -> Option<(usize, usize)> {
        let start = self.pos;
        let mut end = start;
        while end < self.src.len() && self.src[end].is_ascii_digit() {
            end += 1;
        }
        (end > start).then_some((start, end))
    }

    fn text(&self, span: (usize, usize)) -> &str {
        std::str::from_utf8(&self.src[span.0..span.1]).expect("ascii digits")
    }

    fn integer(&mut self) -> Result<i32> {
        let negative = self.eat("-");
        self.skip_ws();
        let Some(span) = self.digits() else {
            return Err(self.error_expecting(&["INTEGER"]));
        };
        let magnitude: i64 = match self.text(span).parse() {
            Ok(v) => v,
            Err(_) => return Err(self.error_expecting(&["INTEGER"])),
        };
        let value = if negative { -magnitude } else { magnitude };
        let Ok(value) = i32::try_from(value) else {
            return Err(self.error_expecting(&["INTEGER"]));
        };
        self.advance_to(span.1);
        Ok(value)
    }

    fn rational(&mut self) -> Result<TimeScale> {
        self.skip_ws();
        let start = self.pos;
        let Some(int_span) = self.digits() else {
            return Err(self.error_expecting(&["RATIONAL"]));
        };
        let bad = |p: &mut Self| {
            p.pos = start;
            p.error_expecting(&["RATIONAL in (0, 1]"])
        };
        let parse_u64 = |s: &str| s.parse::<u64>().ok();
        let Some(int) = parse_u64(self.text(int_span)) else {
            return Err(bad(self));
        };
        let mut end = int_span.1;
        let (numer, denom) = match self.src.get(end) {
            Some(b'.') => {
                self.pos = end + 1;
                let Some(frac_span) = self.digits() else {
                    return Err(self.error_expecting(&["DIGITS"]));
                };
                let frac = self.text(frac_span);
                if frac.len() > MAX_DECIMALS {
                    return Err(bad(self));
                }
                let denom = 10u64.pow(frac.len() as u32);
                let Some(f) = parse_u64(frac) else {
                    return Err(bad(self));
                };
                end = frac_span.1;
                match int.checked_mul(denom).and_then(|v| v.checked_add(f)) {
                    Some(n) => (n, denom),
                    None => return Err(bad(self)),
                }
            }
            Some(b'/') => {
                self.pos = end + 1;
                let Some(den_span) = self.digits() else {
                    return Err(self.error_expecting(&["DIGITS"]));
                };
                let Some(d) = parse_u64(self.text(den_span)) else {
                    return Err(bad(self));
                };
                end = den_span.1;
                (int, d)
            }
            _ => (int, 1),
        };
        match TimeScale::new(numer, denom) {
            Ok(c) => {
                self.advance_to(end);
                Ok(c)
            }
            Err(_) => Err(bad(self)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tricks::Primitive::*;

    fn p(x: Primitive) -> TrickExpr {
        TrickExpr::prim(x)
    }

    #[test]
    fn grammar_examples() {
        assert_eq!(
            parse("S^2 * K").unwrap(),
            TrickExpr::product(TrickExpr::power(p(S), 2), p(K))
        );
        assert_eq!(
            parse("S^-1 * K^-1").unwrap(),
            TrickExpr::product(TrickExpr::power(p(S), -1), TrickExpr::power(p(K), -1))
        );
        assert_eq!(
            parse("S # S!O").unwrap(),
            TrickExpr::concat(p(S), TrickExpr::o_shift(p(S)))
        );
    }

    #[test]
    fn precedence_and_associativity() {
        // ^ binds tighter than @, which binds tighter than !O
        assert_eq!(
            parse("K^2@0.5!O").unwrap(),
            TrickExpr::o_shift(TrickExpr::time_scale(
                TrickExpr::power(p(K), 2),
                TimeScale::half()
            ))
        );
        assert_eq!(
            parse("S * K * U").unwrap(),
            TrickExpr::product(TrickExpr::product(p(S), p(K)), p(U))
        );
        assert_eq!(
            parse("S # K # O").unwrap(),
            TrickExpr::concat(TrickExpr::concat(p(S), p(K)), p(O))
        );
        assert_eq!(
            parse("S * K # O * S").unwrap(),
            TrickExpr::concat(
                TrickExpr::product(p(S), p(K)),
                TrickExpr::product(p(O), p(S))
            )
        );
        assert_eq!(
            parse("U * K@0.5").unwrap(),
            TrickExpr::product(p(U), TrickExpr::time_scale(p(K), TimeScale::half()))
        );
    }

    #[test]
    fn whitespace_is_insignificant() {
        assert_eq!(parse("  S ^ - 1*K  ").unwrap(), parse("S^-1*K").unwrap());
        assert_eq!(parse("rev ( S ) ! O").unwrap(), parse("rev(S)!O").unwrap());
    }

    #[test]
    fn rationals() {
        assert_eq!(parse("K@1/2").unwrap(), parse("K@0.5").unwrap());
        assert_eq!(
            parse("K@1").unwrap(),
            TrickExpr::time_scale(p(K), TimeScale::new(1, 1).unwrap())
        );
        assert!(matches!(parse("K@1.5"), Err(Error::Syntax { offset: 2, .. })));
        assert!(matches!(parse("K@0"), Err(Error::Syntax { .. })));
        assert!(matches!(parse("K@3/2"), Err(Error::Syntax { .. })));
    }

    fn syntax(src: &str) -> (usize, Vec<String>) {
        match parse(src) {
            Err(Error::Syntax { offset, expected }) => (offset, expected),
            other => panic!("expected syntax error for {src:?}, got {other:?}"),
        }
    }

    #[test]
    fn syntax_errors_report_offset_and_expectations() {
        let (offset, expected) = syntax("S * ");
        assert_eq!(offset, 4);
        assert!(expected.contains(&"S".to_string()));
        assert!(expected.contains(&"(".to_string()));

        let (offset, expected) = syntax("SK");
        assert_eq!(offset, 1);
        for tok in ["*", "#", "^", "@", "!O", "end of input"] {
            assert!(expected.contains(&tok.to_string()), "{tok} missing from {expected:?}");
        }

        let (offset, expected) = syntax("(S * K");
        assert_eq!(offset, 6);
        assert!(expected.contains(&")".to_string()));

        let (offset, _) = syntax("S^");
        assert_eq!(offset, 2);
        let (offset, _) = syntax("S^0");
        assert_eq!(offset, 2);
        let (offset, _) = syntax("S!K");
        assert_eq!(offset, 2);
        let (offset, _) = syntax("");
        assert_eq!(offset, 0);
        let (offset, _) = syntax("X");
        assert_eq!(offset, 0);
        let (offset, _) = syntax("rev S");
        assert_eq!(offset, 4);
    }
}
