use super::AnalyzeError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    /// Bare or double-quoted identifier. Quoted identifiers never match keywords.
    Ident {
        text: String,
        quoted: bool,
    },
    Int(i64),
    Decimal(String),
    Str(String),
    Comma,
    Dot,
    LParen,
    RParen,
    Semi,
    Star,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub offset: usize,
}

impl Token {
    pub fn is_keyword(&self, kw: &str) -> bool {
        matches!(&self.tok, Tok::Ident { text, quoted: false } if text.eq_ignore_ascii_case(kw))
    }
}

pub(crate) fn tokenize(sql: &str) -> Result<Vec<Token>, AnalyzeError> {
    let bytes = sql.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let syntax = |offset: usize, message: &str| AnalyzeError::Syntax {
        offset,
        message: message.to_string(),
    };

    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let tok = match c {
            b' ' | b'\t' | b'\r' | b'\n' => {
                i += 1;
                continue;
            }
            b'-' if bytes.get(i + 1) == Some(&b'-') => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
                continue;
            }
            b',' => single(&mut i, Tok::Comma),
            b'.' => single(&mut i, Tok::Dot),
            b'(' => single(&mut i, Tok::LParen),
            b')' => single(&mut i, Tok::RParen),
            b';' => single(&mut i, Tok::Semi),
            b'*' => single(&mut i, Tok::Star),
            b'=' => single(&mut i, Tok::Eq),
            b'<' => match bytes.get(i + 1) {
                Some(b'=') => double(&mut i, Tok::Le),
                Some(b'>') => double(&mut i, Tok::Ne),
                _ => single(&mut i, Tok::Lt),
            },
            b'>' => match bytes.get(i + 1) {
                Some(b'=') => double(&mut i, Tok::Ge),
                _ => single(&mut i, Tok::Gt),
            },
            b'!' if bytes.get(i + 1) == Some(&b'=') => double(&mut i, Tok::Ne),
            b'\'' => {
                let mut s = String::new();
                i += 1;
                loop {
                    match bytes.get(i) {
                        None => return Err(syntax(start, "unterminated string literal")),
                        Some(b'\'') if bytes.get(i + 1) == Some(&b'\'') => {
                            s.push('\'');
                            i += 2;
                        }
                        Some(b'\'') => {
                            i += 1;
                            break;
                        }
                        Some(_) => {
                            let ch = sql[i..].chars().next().unwrap();
                            s.push(ch);
                            i += ch.len_utf8();
                        }
                    }
                }
                Tok::Str(s)
            }
            b'"' => {
                let end = sql[i + 1..]
                    .find('"')
                    .ok_or_else(|| syntax(start, "unterminated quoted identifier"))?;
                let text = sql[i + 1..i + 1 + end].to_string();
                i += end + 2;
                Tok::Ident { text, quoted: true }
            }
            b'0'..=b'9' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if bytes.get(i) == Some(&b'.')
                    && bytes.get(i + 1).is_some_and(|b| b.is_ascii_digit())
                {
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                    Tok::Decimal(sql[start..i].to_string())
                } else {
                    let text = &sql[start..i];
                    Tok::Int(
                        text.parse()
                            .map_err(|_| syntax(start, "integer literal out of range"))?,
                    )
                }
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                Tok::Ident {
                    text: sql[start..i].to_string(),
                    quoted: false,
                }
            }
            _ => {
                let ch = sql[i..].chars().next().unwrap();
                return Err(syntax(start, &format!("unexpected character `{ch}`")));
            }
        };
        out.push(Token { tok, offset: start });
    }
    Ok(out)
}

fn single(i: &mut usize, t: Tok) -> Tok {
    *i += 1;
    t
}

fn double(i: &mut usize, t: Tok) -> Tok {
    *i += 2;
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(sql: &str) -> Vec<Tok> {
        tokenize(sql).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn basic_tokens() {
        assert_eq!(
            kinds("a.b >= 'it''s' -- tail\n<> 12"),
            vec![
                Tok::Ident {
                    text: "a".into(),
                    quoted: false
                },
                Tok::Dot,
                Tok::Ident {
                    text: "b".into(),
                    quoted: false
                },
                Tok::Ge,
                Tok::Str("it's".into()),
                Tok::Ne,
                Tok::Int(12),
            ]
        );
    }

    #[test]
    fn offsets_and_errors() {
        let toks = tokenize("SELECT  x").unwrap();
        assert_eq!(toks[1].offset, 8);
        match tokenize("SELECT 'abc") {
            Err(AnalyzeError::Syntax { offset, .. }) => assert_eq!(offset, 7),
            other => panic!("{other:?}"),
        }
        match tokenize("SELECT #") {
            Err(AnalyzeError::Syntax { offset, .. }) => assert_eq!(offset, 7),
            other => panic!("{other:?}"),
        }
    }
}
