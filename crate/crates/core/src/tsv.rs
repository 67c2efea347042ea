//! Tab-separated text with backslash escaping inside fields.
//!
//! `\t`, `\n`, `\r` and `\\` are escaped so a field never contains a raw
//! separator. Unknown escapes are kept verbatim.

/// Escape one field for writing.
pub fn escape(field: &str) -> String {
    let mut out = String::with_capacity(field.len());
    for c in field.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

/// Reverse of [`escape`].
pub fn unescape(field: &str) -> String {
    let mut out = String::with_capacity(field.len());
    let mut chars = field.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('\\') => out.push('\\'),
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            Some(other) => {
                out.push('\\');
                out.push(other);
            }
            None => out.push('\\'),
        }
    }
    out
}

/// Join escaped fields into one line (no trailing newline).
pub fn join_fields<'a>(fields: impl IntoIterator<Item = &'a str>) -> String {
    fields
        .into_iter()
        .map(escape)
        .collect::<Vec<_>>()
        .join("\t")
}

/// Split a line into unescaped fields. A trailing `\r` is dropped.
pub fn split_fields(line: &str) -> Vec<String> {
    let line = line.strip_suffix('\r').unwrap_or(line);
    line.split('\t').map(unescape).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn escapes_separators() {
        assert_eq!(escape("a\tb\nc\\d"), "a\\tb\\nc\\\\d");
        assert_eq!(split_fields("a\\tb\tc"), vec!["a\tb", "c"]);
    }

    proptest! {
        #[test]
        fn fields_round_trip(fields in proptest::collection::vec(".*", 1..5)) {
            let line = join_fields(fields.iter().map(String::as_str));
            prop_assert!(!line.contains('\n'));
            prop_assert_eq!(split_fields(&line), fields);
        }
    }
}
