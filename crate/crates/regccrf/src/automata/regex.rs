//! Regular-expression front end for describing label languages.
//!
//! The surface syntax is deliberately small: alternation `|`, concatenation by
//! juxtaposition, the postfix operators `*`, `+`, `?` and `{n}`, and grouping
//! with parentheses. A symbol is either a single non-reserved character or a
//! bracketed name such as `[B-ARG0]`, so multi-character labels stay readable.
//! Whitespace between tokens is ignored. An empty group `()` denotes the empty
//! string.

use std::fmt;

use thiserror::Error;

use super::Alphabet;

/// Syntax tree for a regular expression over a fixed label alphabet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RegexAst {
    /// The empty string.
    Empty,
    /// A single alphabet symbol, stored by name.
    Symbol(String),
    /// Concatenation of two or more factors.
    Concat(Vec<RegexAst>),
    /// Alternation between two or more branches.
    Alternation(Vec<RegexAst>),
    /// Zero or more repetitions.
    Star(Box<RegexAst>),
    /// One or more repetitions.
    Plus(Box<RegexAst>),
    /// Zero or one occurrence.
    Optional(Box<RegexAst>),
    /// Exactly `n` repetitions.
    Repeat(Box<RegexAst>, usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("undeclared symbol `{symbol}` at offset {offset}")]
    UndeclaredSymbol { symbol: String, offset: usize },
}

/// Parses `source` into an AST, checking every symbol against `alphabet`.
pub fn parse_regex(source: &str, alphabet: &Alphabet) -> Result<RegexAst, ParseError> {
    let mut parser = Parser {
        chars: source.chars().collect(),
        pos: 0,
        alphabet,
    };
    let ast = parser.expr()?;
    parser.skip_ws();
    if let Some(c) = parser.peek() {
        return Err(parser.syntax(format!("unexpected `{c}`")));
    }
    Ok(ast)
}

const RESERVED: &[char] = &['|', '*', '+', '?', '{', '}', '(', ')', '[', ']'];

struct Parser<'a> {
    chars: Vec<char>,
    pos: usize,
    alphabet: &'a Alphabet,
}

impl Parser<'_> {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn syntax(&self, message: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            offset: self.pos,
            message: message.into(),
        }
    }

    fn expr(&mut self) -> Result<RegexAst, ParseError> {
        let mut branches = vec![self.concat()?];
        loop {
            self.skip_ws();
            if self.peek() == Some('|') {
                self.bump();
                branches.push(self.concat()?);
            } else {
                break;
            }
        }
        Ok(if branches.len() == 1 {
            branches.pop().unwrap()
        } else {
            RegexAst::Alternation(branches)
        })
    }

    fn concat(&mut self) -> Result<RegexAst, ParseError> {
        let mut factors = vec![self.repeat()?];
        loop {
            self.skip_ws();
            match self.peek() {
                Some(c) if c == '|' || c == ')' => break,
                None => break,
                _ => factors.push(self.repeat()?),
            }
        }
        Ok(if factors.len() == 1 {
            factors.pop().unwrap()
        } else {
            RegexAst::Concat(factors)
        })
    }

    fn repeat(&mut self) -> Result<RegexAst, ParseError> {
        let atom = self.atom()?;
        self.skip_ws();
        match self.peek() {
            Some('*') => {
                self.bump();
                Ok(RegexAst::Star(Box::new(atom)))
            }
            Some('+') => {
                self.bump();
                Ok(RegexAst::Plus(Box::new(atom)))
            }
            Some('?') => {
                self.bump();
                Ok(RegexAst::Optional(Box::new(atom)))
            }
            Some('{') => {
                self.bump();
                self.skip_ws();
                let start = self.pos;
                let mut digits = String::new();
                while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                    digits.push(self.bump().unwrap());
                }
                if digits.is_empty() {
                    self.pos = start;
                    return Err(self.syntax("expected a repetition count"));
                }
                let n: usize = digits
                    .parse()
                    .map_err(|_| self.syntax("repetition count out of range"))?;
                self.skip_ws();
                if self.peek() != Some('}') {
                    return Err(self.syntax("expected `}`"));
                }
                self.bump();
                Ok(RegexAst::Repeat(Box::new(atom), n))
            }
            _ => Ok(atom),
        }
    }

    fn atom(&mut self) -> Result<RegexAst, ParseError> {
        self.skip_ws();
        match self.peek() {
            Some('(') => {
                self.bump();
                self.skip_ws();
                if self.peek() == Some(')') {
                    self.bump();
                    return Ok(RegexAst::Empty);
                }
                let inner = self.expr()?;
                self.skip_ws();
                if self.peek() != Some(')') {
                    return Err(self.syntax("expected `)`"));
                }
                self.bump();
                Ok(inner)
            }
            Some('[') => {
                let open = self.pos;
                self.bump();
                let mut name = String::new();
                loop {
                    match self.peek() {
                        Some(']') => {
                            self.bump();
                            break;
                        }
                        Some(c) => {
                            name.push(c);
                            self.bump();
                        }
                        None => {
                            return Err(ParseError::Syntax {
                                offset: open,
                                message: "unclosed `[`".into(),
                            })
                        }
                    }
                }
                if name.is_empty() {
                    return Err(ParseError::Syntax {
                        offset: open,
                        message: "empty symbol name".into(),
                    });
                }
                self.symbol(name, open)
            }
            Some(c) if !RESERVED.contains(&c) && !c.is_whitespace() => {
                let at = self.pos;
                self.bump();
                self.symbol(c.to_string(), at)
            }
            Some(c) => Err(self.syntax(format!("unexpected `{c}`"))),
            None => Err(self.syntax("unexpected end of input")),
        }
    }

    fn symbol(&mut self, name: String, offset: usize) -> Result<RegexAst, ParseError> {
        if self.alphabet.index_of(&name).is_none() {
            return Err(ParseError::UndeclaredSymbol {
                symbol: name,
                offset,
            });
        }
        Ok(RegexAst::Symbol(name))
    }
}

impl RegexAst {
    fn is_atomic(&self) -> bool {
        matches!(self, RegexAst::Empty | RegexAst::Symbol(_))
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, in_concat: bool) -> fmt::Result {
        match self {
            RegexAst::Empty => write!(f, "()"),
            RegexAst::Symbol(name) => {
                let mut chars = name.chars();
                let first = chars.next();
                let single = first.is_some() && chars.next().is_none();
                if single && !RESERVED.contains(&first.unwrap()) && !first.unwrap().is_whitespace()
                {
                    write!(f, "{name}")
                } else {
                    write!(f, "[{name}]")
                }
            }
            RegexAst::Concat(parts) => {
                for part in parts {
                    part.fmt_prec(f, true)?;
                }
                Ok(())
            }
            RegexAst::Alternation(parts) => {
                if in_concat {
                    write!(f, "(")?;
                }
                for (i, part) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, "|")?;
                    }
                    part.fmt_prec(f, false)?;
                }
                if in_concat {
                    write!(f, ")")?;
                }
                Ok(())
            }
            RegexAst::Star(c) | RegexAst::Plus(c) | RegexAst::Optional(c) => {
                let op = match self {
                    RegexAst::Star(_) => '*',
                    RegexAst::Plus(_) => '+',
                    _ => '?',
                };
                if c.is_atomic() {
                    c.fmt_prec(f, true)?;
                } else {
                    write!(f, "(")?;
                    c.fmt_prec(f, false)?;
                    write!(f, ")")?;
                }
                write!(f, "{op}")
            }
            RegexAst::Repeat(c, n) => {
                if c.is_atomic() {
                    c.fmt_prec(f, true)?;
                } else {
                    write!(f, "(")?;
                    c.fmt_prec(f, false)?;
                    write!(f, ")")?;
                }
                write!(f, "{{{n}}}")
            }
        }
    }
}

impl fmt::Display for RegexAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abc() -> Alphabet {
        Alphabet::new(["a", "b", "c"]).unwrap()
    }

    #[test]
    fn parses_alternation_of_starred_groups() {
        let ast = parse_regex("(ac)*|(bc)*", &abc()).unwrap();
        let sym = |s: &str| RegexAst::Symbol(s.into());
        assert_eq!(
            ast,
            RegexAst::Alternation(vec![
                RegexAst::Star(Box::new(RegexAst::Concat(vec![sym("a"), sym("c")]))),
                RegexAst::Star(Box::new(RegexAst::Concat(vec![sym("b"), sym("c")]))),
            ])
        );
    }

    #[test]
    fn parses_bracketed_symbols() {
        let alphabet = Alphabet::new(["O", "B-ARG0", "I-ARG0"]).unwrap();
        let ast = parse_regex("O* [B-ARG0] [I-ARG0]*", &alphabet).unwrap();
        assert_eq!(ast.to_string(), "O*[B-ARG0][I-ARG0]*");
    }

    #[test]
    fn parses_bounded_repetition() {
        let ast = parse_regex("(a b){3}", &abc()).unwrap();
        assert_eq!(ast.to_string(), "(ab){3}");
    }

    #[test]
    fn rejects_undeclared_symbol() {
        let err = parse_regex("a|d", &abc()).unwrap_err();
        assert_eq!(
            err,
            ParseError::UndeclaredSymbol {
                symbol: "d".into(),
                offset: 2
            }
        );
    }

    #[test]
    fn rejects_double_postfix() {
        assert!(matches!(
            parse_regex("a**", &abc()),
            Err(ParseError::Syntax { offset: 2, .. })
        ));
    }

    #[test]
    fn rejects_unbalanced_group() {
        assert!(matches!(
            parse_regex("(ab", &abc()),
            Err(ParseError::Syntax { .. })
        ));
    }

    #[test]
    fn empty_group_is_empty_string() {
        assert_eq!(parse_regex("()", &abc()).unwrap(), RegexAst::Empty);
    }

    #[test]
    fn display_round_trips() {
        for src in ["(ac)*|(bc)*", "a?b+c*", "(a|b)c{2}", "abc", "a|b|c"] {
            let ast = parse_regex(src, &abc()).unwrap();
            let printed = ast.to_string();
            assert_eq!(parse_regex(&printed, &abc()).unwrap(), ast, "{src}");
        }
    }
}
