//! Tokenizer for the annotation language.
//!
//! `//` starts a comment running to end of line.  Trigger markers are the
//! two-character tokens `{:` and `:}`.

use num_bigint::BigInt;

use super::ast::{Diagnostic, Span};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Num(BigInt),
    // Keywords.
    Param,
    Array,
    Int,
    Forall,
    Where,
    True,
    False,
    Abs,
    Define,
    Typecheck,
    Struct,
    Void,
    Immutable,
    Unique,
    UniqueField,
    UniquePointerField,
    // Punctuation.
    LParen,
    RParen,
    LBrack,
    RBrack,
    LBrace,
    RBrace,
    TrigOpen,
    TrigClose,
    Semi,
    Comma,
    Dot,
    Amp,
    Assign,
    // Operators.
    Lt,
    Le,
    Gt,
    Ge,
    EqEq,
    Ne,
    Bang,
    AndAnd,
    OrOr,
    Implies,
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
}

impl Tok {
    /// Surface text used in diagnostics.
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Num(n) => format!("number `{n}`"),
            Tok::Param => "`param`".into(),
            Tok::Array => "`array`".into(),
            Tok::Int => "`int`".into(),
            Tok::Forall => "`forall`".into(),
            Tok::Where => "`where`".into(),
            Tok::True => "`true`".into(),
            Tok::False => "`false`".into(),
            Tok::Abs => "`abs`".into(),
            Tok::Define => "`define`".into(),
            Tok::Typecheck => "`typecheck`".into(),
            Tok::Struct => "`struct`".into(),
            Tok::Void => "`void`".into(),
            Tok::Immutable => "`immutable`".into(),
            Tok::Unique => "`unique`".into(),
            Tok::UniqueField => "`unique_field`".into(),
            Tok::UniquePointerField => "`unique_pointer_field`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBrack => "`[`".into(),
            Tok::RBrack => "`]`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::TrigOpen => "`{:`".into(),
            Tok::TrigClose => "`:}`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Assign => "`=`".into(),
            Tok::Lt => "`<`".into(),
            Tok::Le => "`<=`".into(),
            Tok::Gt => "`>`".into(),
            Tok::Ge => "`>=`".into(),
            Tok::EqEq => "`==`".into(),
            Tok::Ne => "`!=`".into(),
            Tok::Bang => "`!`".into(),
            Tok::AndAnd => "`&&`".into(),
            Tok::OrOr => "`||`".into(),
            Tok::Implies => "`==>`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Percent => "`%`".into(),
        }
    }
}

fn keyword(word: &str) -> Option<Tok> {
    Some(match word {
        "param" => Tok::Param,
        "array" => Tok::Array,
        "int" => Tok::Int,
        "forall" => Tok::Forall,
        "where" => Tok::Where,
        "true" => Tok::True,
        "false" => Tok::False,
        "abs" => Tok::Abs,
        "define" => Tok::Define,
        "typecheck" => Tok::Typecheck,
        "struct" => Tok::Struct,
        "void" => Tok::Void,
        "immutable" => Tok::Immutable,
        "unique" => Tok::Unique,
        "unique_field" => Tok::UniqueField,
        "unique_pointer_field" => Tok::UniquePointerField,
        _ => return None,
    })
}

/// Tokenize `src`, or return the first lexical error.
pub fn lex(src: &str) -> Result<Vec<(Tok, Span)>, Diagnostic> {
    let bytes = src.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        match b {
            b' ' | b'\t' | b'\r' | b'\n' => {
                i += 1;
            }
            b'/' if bytes.get(i + 1) == Some(&b'/') => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            b'0'..=b'9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let text = &src[start..i];
                let value: BigInt = text.parse().expect("digit run parses as integer");
                toks.push((Tok::Num(value), Span::new(start, i)));
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                let word = &src[start..i];
                let tok = keyword(word).unwrap_or_else(|| Tok::Ident(word.to_string()));
                toks.push((tok, Span::new(start, i)));
            }
            _ => {
                let start = i;
                let two = |c: u8| bytes.get(i + 1) == Some(&c);
                let (tok, len) = match b {
                    b'(' => (Tok::LParen, 1),
                    b')' => (Tok::RParen, 1),
                    b'[' => (Tok::LBrack, 1),
                    b']' => (Tok::RBrack, 1),
                    b'{' if two(b':') => (Tok::TrigOpen, 2),
                    b'{' => (Tok::LBrace, 1),
                    b'}' => (Tok::RBrace, 1),
                    b':' if two(b'}') => (Tok::TrigClose, 2),
                    b';' => (Tok::Semi, 1),
                    b',' => (Tok::Comma, 1),
                    b'.' => (Tok::Dot, 1),
                    b'&' if two(b'&') => (Tok::AndAnd, 2),
                    b'&' => (Tok::Amp, 1),
                    b'|' if two(b'|') => (Tok::OrOr, 2),
                    b'=' if two(b'=') && bytes.get(i + 2) == Some(&b'>') => (Tok::Implies, 3),
                    b'=' if two(b'=') => (Tok::EqEq, 2),
                    b'=' => (Tok::Assign, 1),
                    b'<' if two(b'=') => (Tok::Le, 2),
                    b'<' => (Tok::Lt, 1),
                    b'>' if two(b'=') => (Tok::Ge, 2),
                    b'>' => (Tok::Gt, 1),
                    b'!' if two(b'=') => (Tok::Ne, 2),
                    b'!' => (Tok::Bang, 1),
                    b'+' => (Tok::Plus, 1),
                    b'-' => (Tok::Minus, 1),
                    b'*' => (Tok::Star, 1),
                    b'/' => (Tok::Slash, 1),
                    b'%' => (Tok::Percent, 1),
                    _ => {
                        return Err(Diagnostic::error(
                            "lex-unexpected-char",
                            format!("unexpected character `{}`", src[start..].chars().next().unwrap()),
                            Some(Span::new(start, start + 1)),
                        ));
                    }
                };
                toks.push((tok, Span::new(start, start + len)));
                i += len;
            }
        }
    }
    Ok(toks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn operators_lex_greedily() {
        let toks = lex("==> == = <= < {: :} && & || !=").unwrap();
        let kinds: Vec<Tok> = toks.into_iter().map(|(t, _)| t).collect();
        assert_eq!(
            kinds,
            vec![
                Tok::Implies,
                Tok::EqEq,
                Tok::Assign,
                Tok::Le,
                Tok::Lt,
                Tok::TrigOpen,
                Tok::TrigClose,
                Tok::AndAnd,
                Tok::Amp,
                Tok::OrOr,
                Tok::Ne,
            ]
        );
    }

    #[test]
    fn comments_and_spans() {
        let src = "x // trailing words\n  y";
        let toks = lex(src).unwrap();
        assert_eq!(toks.len(), 2);
        assert_eq!(toks[0].0, Tok::Ident("x".into()));
        assert_eq!(toks[1].0, Tok::Ident("y".into()));
        assert_eq!(toks[1].1, Span::new(22, 23));
    }

    #[test]
    fn keywords_versus_identifiers() {
        let toks = lex("forall forAll unique_field uniqueness").unwrap();
        assert_eq!(toks[0].0, Tok::Forall);
        assert_eq!(toks[1].0, Tok::Ident("forAll".into()));
        assert_eq!(toks[2].0, Tok::UniqueField);
        assert_eq!(toks[3].0, Tok::Ident("uniqueness".into()));
    }

    #[test]
    fn rejects_stray_character() {
        let err = lex("a $ b").unwrap_err();
        assert_eq!(err.code, "lex-unexpected-char");
        assert_eq!(err.span.unwrap().start, 2);
    }
}
