use std::fmt;

use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TokenKind {
    Ident,
    Int,
    Str,
    Keyword,
    Punct,
    End,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    /// Source text; for strings, the decoded contents.
    pub lexeme: String,
    pub line: usize,
    pub column: usize,
}

impl Token {
    pub fn is(&self, kind: TokenKind, lexeme: &str) -> bool {
        self.kind == kind && self.lexeme == lexeme
    }

    pub fn is_punct(&self, p: &str) -> bool {
        self.is(TokenKind::Punct, p)
    }

    pub fn is_keyword(&self, k: &str) -> bool {
        self.is(TokenKind::Keyword, k)
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            TokenKind::End => f.write_str("end of input"),
            TokenKind::Str => write!(f, "string {:?}", self.lexeme),
            _ => write!(f, "`{}`", self.lexeme),
        }
    }
}

pub const END_LEXEME: &str = "<end>";

pub const KEYWORDS: &[&str] = &[
    "module", "end", "macro", "in", "forall", "ren", "and", "true", "false", "if", "else",
    "switch", "case", "default", "break", "print", "new", "int",
];

const PUNCT2: &[&str] = &["=>", "==", "!=", "<=", ">=", "&&", "||"];
const PUNCT1: &str = "(){}[],;:.=<>+-*/!'";

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: unexpected character {ch:?}")]
pub struct LexError {
    pub line: usize,
    pub column: usize,
    pub ch: char,
}

pub fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

fn ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Splits source text into tokens, ending with an end marker. `%` starts a
/// comment running to the end of the line.
pub fn tokenize(source: &str) -> Result<Vec<Token>, LexError> {
    let chars: Vec<char> = source.chars().collect();
    let mut toks = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);

    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_col) = (line, col);
        let mut push = |kind, lexeme: String| {
            toks.push(Token {
                kind,
                lexeme,
                line: start_line,
                column: start_col,
            })
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
        } else if c.is_whitespace() {
            i += 1;
            col += 1;
        } else if c == '%' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
        } else if ident_start(c) {
            let s = i;
            while i < chars.len() && ident_char(chars[i]) {
                i += 1;
            }
            let word: String = chars[s..i].iter().collect();
            col += i - s;
            let kind = if is_keyword(&word) {
                TokenKind::Keyword
            } else {
                TokenKind::Ident
            };
            push(kind, word);
        } else if c.is_ascii_digit() {
            let s = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            col += i - s;
            push(TokenKind::Int, chars[s..i].iter().collect());
        } else if c == '"' {
            let mut text = String::new();
            i += 1;
            col += 1;
            loop {
                let Some(&ch) = chars.get(i) else {
                    return Err(LexError {
                        line: start_line,
                        column: start_col,
                        ch: '"',
                    });
                };
                i += 1;
                col += 1;
                match ch {
                    '"' => break,
                    '\n' => {
                        return Err(LexError {
                            line: start_line,
                            column: start_col,
                            ch: '"',
                        })
                    }
                    '\\' => {
                        let esc = chars.get(i).copied();
                        let decoded = match esc {
                            Some('n') => '\n',
                            Some('t') => '\t',
                            Some('"') => '"',
                            Some('\\') => '\\',
                            _ => {
                                return Err(LexError {
                                    line,
                                    column: col - 1,
                                    ch: '\\',
                                })
                            }
                        };
                        text.push(decoded);
                        i += 1;
                        col += 1;
                    }
                    other => text.push(other),
                }
            }
            push(TokenKind::Str, text);
        } else {
            let two: String = chars[i..chars.len().min(i + 2)].iter().collect();
            if PUNCT2.contains(&two.as_str()) {
                i += 2;
                col += 2;
                push(TokenKind::Punct, two);
            } else if PUNCT1.contains(c) {
                i += 1;
                col += 1;
                push(TokenKind::Punct, c.to_string());
            } else {
                return Err(LexError {
                    line,
                    column: col,
                    ch: c,
                });
            }
        }
    }
    toks.push(Token {
        kind: TokenKind::End,
        lexeme: END_LEXEME.to_string(),
        line,
        column: col,
    });
    Ok(toks)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<(TokenKind, String)> {
        tokenize(src)
            .unwrap()
            .into_iter()
            .map(|t| (t.kind, t.lexeme))
            .collect()
    }

    fn tok(kind: TokenKind, s: &str) -> (TokenKind, String) {
        (kind, s.to_string())
    }

    #[test]
    fn call_statement() {
        use TokenKind::*;
        assert_eq!(
            kinds("Age(tom);"),
            vec![
                tok(Ident, "Age"),
                tok(Punct, "("),
                tok(Ident, "tom"),
                tok(Punct, ")"),
                tok(Punct, ";"),
                tok(End, END_LEXEME),
            ]
        );
    }

    #[test]
    fn empty_input() {
        assert_eq!(kinds(""), vec![tok(TokenKind::End, END_LEXEME)]);
    }

    #[test]
    fn comment_is_dropped() {
        use TokenKind::*;
        let expected = vec![
            tok(Ident, "x"),
            tok(Punct, "="),
            tok(Int, "100"),
            tok(End, END_LEXEME),
        ];
        assert_eq!(kinds("x = 100 % pay"), expected);
    }

    #[test]
    fn two_char_operators_win() {
        use TokenKind::*;
        assert_eq!(
            kinds("a => b == c = d"),
            vec![
                tok(Ident, "a"),
                tok(Punct, "=>"),
                tok(Ident, "b"),
                tok(Punct, "=="),
                tok(Ident, "c"),
                tok(Punct, "="),
                tok(Ident, "d"),
                tok(End, END_LEXEME),
            ]
        );
    }

    #[test]
    fn positions_are_one_based() {
        let toks = tokenize("module Emp.\n  Age(x)").unwrap();
        assert_eq!((toks[0].line, toks[0].column), (1, 1));
        assert_eq!((toks[1].line, toks[1].column), (1, 8));
        assert_eq!((toks[3].line, toks[3].column), (2, 3));
        let end = toks.last().unwrap();
        assert_eq!((end.line, end.column), (2, 9));
    }

    #[test]
    fn strings_decode_escapes() {
        let toks = tokenize(r#""a\"b\n""#).unwrap();
        assert_eq!(toks[0].kind, TokenKind::Str);
        assert_eq!(toks[0].lexeme, "a\"b\n");
    }

    #[test]
    fn stray_character_is_reported() {
        assert_eq!(
            tokenize("x = 1;\n  y = $100"),
            Err(LexError {
                line: 2,
                column: 7,
                ch: '$'
            })
        );
    }

    #[test]
    fn unterminated_string() {
        assert_eq!(
            tokenize("print(\"abc"),
            Err(LexError {
                line: 1,
                column: 7,
                ch: '"'
            })
        );
    }
}
