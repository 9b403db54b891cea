//! Step-size expressions: either a plain number or arithmetic over the
//! measured smoothness constant `L` and the delay `tau`, e.g. "0.6/(L*tau)".
//! Supported: + - * /, parentheses, unary minus, decimal and scientific
//! literals.

use crate::{config_err, CliError};

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Open,
    Close,
}

fn tokenize(src: &str) -> Result<Vec<Token>, CliError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' => i += 1,
            '+' => {
                out.push(Token::Plus);
                i += 1;
            }
            '-' => {
                out.push(Token::Minus);
                i += 1;
            }
            '*' => {
                out.push(Token::Star);
                i += 1;
            }
            '/' => {
                out.push(Token::Slash);
                i += 1;
            }
            '(' => {
                out.push(Token::Open);
                i += 1;
            }
            ')' => {
                out.push(Token::Close);
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < bytes.len() && matches!(bytes[i] as char, '0'..='9' | '.') {
                    i += 1;
                }
                // exponent part, with optional sign
                if i < bytes.len() && matches!(bytes[i] as char, 'e' | 'E') {
                    let mut k = i + 1;
                    if k < bytes.len() && matches!(bytes[k] as char, '+' | '-') {
                        k += 1;
                    }
                    if k < bytes.len() && (bytes[k] as char).is_ascii_digit() {
                        i = k;
                        while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text = &src[start..i];
                let v: f64 = text
                    .parse()
                    .map_err(|_| config_err(format!("bad number '{text}' in step expression")))?;
                out.push(Token::Num(v));
            }
            c if c.is_ascii_alphabetic() => {
                let start = i;
                while i < bytes.len() && (bytes[i] as char).is_ascii_alphanumeric() {
                    i += 1;
                }
                out.push(Token::Ident(src[start..i].to_string()));
            }
            _ => return Err(config_err(format!("unexpected character '{c}' in step expression"))),
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    l: f64,
    tau: f64,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn expr(&mut self) -> Result<f64, CliError> {
        let mut v = self.term()?;
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.pos += 1;
                    v += self.term()?;
                }
                Some(Token::Minus) => {
                    self.pos += 1;
                    v -= self.term()?;
                }
                _ => return Ok(v),
            }
        }
    }

    fn term(&mut self) -> Result<f64, CliError> {
        let mut v = self.factor()?;
        loop {
            match self.peek() {
                Some(Token::Star) => {
                    self.pos += 1;
                    v *= self.factor()?;
                }
                Some(Token::Slash) => {
                    self.pos += 1;
                    v /= self.factor()?;
                }
                _ => return Ok(v),
            }
        }
    }

    fn factor(&mut self) -> Result<f64, CliError> {
        match self.peek().cloned() {
            Some(Token::Minus) => {
                self.pos += 1;
                Ok(-self.factor()?)
            }
            Some(Token::Num(v)) => {
                self.pos += 1;
                Ok(v)
            }
            Some(Token::Ident(name)) => {
                self.pos += 1;
                match name.as_str() {
                    "L" => Ok(self.l),
                    "tau" => Ok(self.tau),
                    other => {
                        Err(config_err(format!("unknown name '{other}' in step expression, expected L or tau")))
                    }
                }
            }
            Some(Token::Open) => {
                self.pos += 1;
                let v = self.expr()?;
                match self.peek() {
                    Some(Token::Close) => {
                        self.pos += 1;
                        Ok(v)
                    }
                    _ => Err(config_err("unbalanced parenthesis in step expression")),
                }
            }
            _ => Err(config_err("step expression ends unexpectedly")),
        }
    }
}

/// Evaluates a step-size expression with the given measured constants and
/// requires a positive finite result.
pub fn eval_eta(spec: &str, l: f64, tau: u32) -> Result<f64, CliError> {
    let tokens = tokenize(spec)?;
    if tokens.is_empty() {
        return Err(config_err("empty step expression"));
    }
    let mut p = Parser { tokens: &tokens, pos: 0, l, tau: tau as f64 };
    let v = p.expr()?;
    if p.pos != tokens.len() {
        return Err(config_err(format!("trailing input in step expression '{spec}'")));
    }
    if !v.is_finite() || v <= 0.0 {
        return Err(config_err(format!("step expression '{spec}' evaluates to {v}, need a positive finite step")));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_numbers() {
        assert_eq!(eval_eta("0.25", 1.0, 1).unwrap(), 0.25);
        assert_eq!(eval_eta("1e-3", 1.0, 1).unwrap(), 1e-3);
        assert_eq!(eval_eta("2.5E2", 1.0, 1).unwrap(), 250.0);
    }

    #[test]
    fn uses_measured_constants() {
        assert_eq!(eval_eta("0.6/(L*tau)", 3.0, 5).unwrap(), 0.6 / 15.0);
        assert_eq!(eval_eta("0.1/tau", 99.0, 4).unwrap(), 0.1 / 4.0);
        assert_eq!(eval_eta("L", 7.0, 1).unwrap(), 7.0);
        assert_eq!(eval_eta(" 1 / L ", 8.0, 1).unwrap(), 0.125);
    }

    #[test]
    fn precedence_and_grouping() {
        assert_eq!(eval_eta("1+2*3", 0.0, 1).unwrap(), 7.0);
        assert_eq!(eval_eta("(1+2)*3", 0.0, 1).unwrap(), 9.0);
        assert_eq!(eval_eta("2-(1-3)", 0.0, 1).unwrap(), 4.0);
        assert_eq!(eval_eta("1 - -2", 0.0, 1).unwrap(), 3.0);
        assert_eq!(eval_eta("8/2/2", 0.0, 1).unwrap(), 2.0);
    }

    #[test]
    fn rejections() {
        assert!(eval_eta("", 1.0, 1).is_err());
        assert!(eval_eta("0.6/(L*tau", 1.0, 1).is_err());
        assert!(eval_eta("0.6)", 1.0, 1).is_err());
        assert!(eval_eta("x+1", 1.0, 1).is_err());
        assert!(eval_eta("1 2", 1.0, 1).is_err());
        assert!(eval_eta("-0.1", 1.0, 1).is_err());
        assert!(eval_eta("0", 1.0, 1).is_err());
        assert!(eval_eta("1/0", 1.0, 1).is_err());
        assert!(eval_eta("eta", 1.0, 1).is_err());
        assert!(eval_eta("1..2", 1.0, 1).is_err());
    }
}
