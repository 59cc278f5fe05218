use super::{parse_query, AnalyzeError, ParsedQuery};
use crate::catalog::Catalog;

/// One `;`-terminated statement of a workload file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Statement {
    pub ordinal: usize,
    /// Byte offset of the statement start in the file.
    pub offset: usize,
    pub text: String,
}

/// Splits workload text on `;`, honoring string literals, quoted identifiers
/// and `--` line comments. Comment-only or blank fragments are dropped.
pub fn split_statements(text: &str) -> Vec<Statement> {
    let mut out = Vec::new();
    let mut buf = String::new();
    let mut start: Option<usize> = None;
    let mut chars = text.char_indices().peekable();
    let mut quote: Option<char> = None;

    let flush = |buf: &mut String, start: &mut Option<usize>, out: &mut Vec<Statement>| {
        let trimmed = buf.trim();
        if !trimmed.is_empty() {
            out.push(Statement {
                ordinal: out.len(),
                offset: start.unwrap_or(0),
                text: trimmed.to_string(),
            });
        }
        buf.clear();
        *start = None;
    };

    while let Some((i, c)) = chars.next() {
        if let Some(q) = quote {
            buf.push(c);
            if c == q {
                quote = None;
            }
            continue;
        }
        match c {
            '-' if chars.peek().is_some_and(|&(_, n)| n == '-') => {
                for (_, n) in chars.by_ref() {
                    if n == '\n' {
                        buf.push('\n');
                        break;
                    }
                }
            }
            ';' => {
                buf.push(';');
                flush(&mut buf, &mut start, &mut out);
            }
            _ => {
                if start.is_none() && !c.is_whitespace() {
                    start = Some(i);
                }
                if c == '\'' || c == '"' {
                    quote = Some(c);
                }
                buf.push(c);
            }
        }
    }
    flush(&mut buf, &mut start, &mut out);
    out
}

/// Parses every statement of a workload file; query ids are statement
/// ordinals. Errors name the failing ordinal.
pub fn parse_workload(text: &str, catalog: &Catalog) -> Result<Vec<ParsedQuery>, AnalyzeError> {
    let statements = split_statements(text);
    if statements.is_empty() {
        return Err(AnalyzeError::EmptyWorkload);
    }
    statements
        .iter()
        .map(|s| {
            let mut q = parse_query(&s.text, catalog).map_err(|e| AnalyzeError::Statement {
                ordinal: s.ordinal,
                source: Box::new(e),
            })?;
            q.id = s.ordinal;
            Ok(q)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_with_comments_and_strings() {
        let s = split_statements(
            "-- header; not a split\nSELECT 'a;b' FROM t;\n\n  select 2 -- x;y\n;  -- trailing\n",
        );
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].text, "SELECT 'a;b' FROM t;");
        assert_eq!(s[0].offset, 23);
        assert_eq!(s[1].ordinal, 1);
        assert!(s[1].text.starts_with("select 2"));
    }

    #[test]
    fn fixture_workload_parses() {
        let c = Catalog::from_json_str(include_str!("../../fixtures/retail_catalog.json")).unwrap();
        let w = parse_workload(include_str!("../../fixtures/retail_workload.sql"), &c).unwrap();
        assert_eq!(w.len(), 8);
        assert_eq!(
            w.iter().map(|q| q.id).collect::<Vec<_>>(),
            (0..8).collect::<Vec<_>>()
        );
    }

    #[test]
    fn error_names_ordinal() {
        let c = Catalog::from_json_str(include_str!("../../fixtures/retail_catalog.json")).unwrap();
        let err = parse_workload(
            "SELECT COUNT(*) FROM sales; SELECT * FROM sales WHERE amount IN (SELECT amount FROM sales);",
            &c,
        )
        .unwrap_err();
        assert_eq!(
            err.to_string(),
            "statement 1: unsupported feature: subquery"
        );
        assert_eq!(
            parse_workload("-- nothing\n", &c),
            Err(AnalyzeError::EmptyWorkload)
        );
    }
}
