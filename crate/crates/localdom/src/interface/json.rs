//! Position-tracking JSON reader and canonical writer.
//!
//! The reader is recursive descent over RFC 8259 JSON. Every value keeps the
//! line and column where it starts, so later schema and reference checks can
//! point at the offending token. Objects keep their keys in source order;
//! duplicates are reported, not silently merged.

use std::fmt;

/// 1-based line and column (in characters).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: &'static str,
    pub pos: Pos,
    pub message: String,
    pub hint: String,
}

impl Diagnostic {
    pub fn error(
        code: &'static str,
        pos: Pos,
        message: impl Into<String>,
        hint: impl Into<String>,
    ) -> Diagnostic {
        Diagnostic {
            severity: Severity::Error,
            code,
            pos,
            message: message.into(),
            hint: hint.into(),
        }
    }

    pub fn warning(
        code: &'static str,
        pos: Pos,
        message: impl Into<String>,
        hint: impl Into<String>,
    ) -> Diagnostic {
        Diagnostic {
            severity: Severity::Warning,
            code,
            pos,
            message: message.into(),
            hint: hint.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        write!(
            f,
            "{}: {sev}[{}]: {} (hint: {})",
            self.pos, self.code, self.message, self.hint
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Value {
    pub pos: Pos,
    pub kind: Kind,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Kind {
    Null,
    Bool(bool),
    /// Raw numeral text as written.
    Number(String),
    String(String),
    Array(Vec<Value>),
    Object(Vec<Member>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Member {
    pub key: String,
    pub key_pos: Pos,
    pub value: Value,
}

impl Value {
    pub fn new(kind: Kind) -> Value {
        Value {
            pos: Pos::default(),
            kind,
        }
    }

    pub fn string(s: impl Into<String>) -> Value {
        Value::new(Kind::String(s.into()))
    }

    pub fn number(n: impl ToString) -> Value {
        Value::new(Kind::Number(n.to_string()))
    }

    pub fn bool(b: bool) -> Value {
        Value::new(Kind::Bool(b))
    }

    pub fn array(items: impl IntoIterator<Item = Value>) -> Value {
        Value::new(Kind::Array(items.into_iter().collect()))
    }

    /// Object with keys in the given order.
    pub fn object<K: Into<String>>(members: impl IntoIterator<Item = (K, Value)>) -> Value {
        Value::new(Kind::Object(
            members
                .into_iter()
                .map(|(k, v)| Member {
                    key: k.into(),
                    key_pos: Pos::default(),
                    value: v,
                })
                .collect(),
        ))
    }

    pub fn type_name(&self) -> &'static str {
        match self.kind {
            Kind::Null => "null",
            Kind::Bool(_) => "boolean",
            Kind::Number(_) => "number",
            Kind::String(_) => "string",
            Kind::Array(_) => "array",
            Kind::Object(_) => "object",
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match &self.kind {
            Kind::String(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_array(&self) -> Option<&[Value]> {
        match &self.kind {
            Kind::Array(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_object(&self) -> Option<&[Member]> {
        match &self.kind {
            Kind::Object(m) => Some(m),
            _ => None,
        }
    }

    /// Last member named `key`.
    pub fn get(&self, key: &str) -> Option<&Value> {
        self.as_object()?
            .iter()
            .rev()
            .find(|m| m.key == key)
            .map(|m| &m.value)
    }
}

/// Duplicate keys and similar recoverable problems.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Strictness {
    #[default]
    Strict,
    Lenient,
}

const MAX_DEPTH: usize = 256;

struct Reader<'a> {
    chars: Vec<char>,
    at: usize,
    line: usize,
    column: usize,
    strictness: Strictness,
    notes: &'a mut Vec<Diagnostic>,
}

type Read<T> = Result<T, Diagnostic>;

/// Parses one JSON value. Warnings (lenient duplicates) go to `notes`.
pub fn parse(
    text: &str,
    strictness: Strictness,
    notes: &mut Vec<Diagnostic>,
) -> Result<Value, Diagnostic> {
    let mut r = Reader {
        chars: text.chars().collect(),
        at: 0,
        line: 1,
        column: 1,
        strictness,
        notes,
    };
    if r.peek() == Some('\u{feff}') {
        r.bump();
    }
    r.skip_ws();
    let v = r.value(0)?;
    r.skip_ws();
    if let Some(c) = r.peek() {
        return Err(Diagnostic::error(
            "E0107",
            r.pos(),
            format!("unexpected `{}` after the document", c.escape_debug()),
            "remove trailing content after the closing brace",
        ));
    }
    Ok(v)
}

impl Reader<'_> {
    fn pos(&self) -> Pos {
        Pos {
            line: self.line,
            column: self.column,
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.at).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.get(self.at).copied()?;
        self.at += 1;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(' ' | '\t' | '\n' | '\r')) {
            self.bump();
        }
    }

    fn eof(&self, what: &str) -> Diagnostic {
        Diagnostic::error(
            "E0101",
            self.pos(),
            format!("unexpected end of input while reading {what}"),
            "the file looks truncated; complete or regenerate it",
        )
    }

    fn expect(&mut self, want: char, what: &str) -> Read<()> {
        match self.peek() {
            Some(c) if c == want => {
                self.bump();
                Ok(())
            }
            Some(c) => Err(Diagnostic::error(
                "E0102",
                self.pos(),
                format!("expected `{want}` {what}, found `{}`", c.escape_debug()),
                format!("insert `{want}`"),
            )),
            None => Err(self.eof(what)),
        }
    }

    fn value(&mut self, depth: usize) -> Read<Value> {
        if depth > MAX_DEPTH {
            return Err(Diagnostic::error(
                "E0108",
                self.pos(),
                "nesting too deep",
                format!("documents nest at most {MAX_DEPTH} levels"),
            ));
        }
        let pos = self.pos();
        let kind = match self.peek() {
            None => return Err(self.eof("a value")),
            Some('{') => self.object(depth)?,
            Some('[') => self.array(depth)?,
            Some('"') => Kind::String(self.string()?),
            Some('t') => self.word("true", Kind::Bool(true))?,
            Some('f') => self.word("false", Kind::Bool(false))?,
            Some('n') => self.word("null", Kind::Null)?,
            Some(c) if c == '-' || c.is_ascii_digit() => Kind::Number(self.number()?),
            Some(c) => {
                return Err(Diagnostic::error(
                    "E0103",
                    pos,
                    format!(
                        "unexpected `{}` where a value should start",
                        c.escape_debug()
                    ),
                    "values are objects, arrays, strings, numbers, true, false or null",
                ))
            }
        };
        Ok(Value { pos, kind })
    }

    fn word(&mut self, word: &str, kind: Kind) -> Read<Kind> {
        let pos = self.pos();
        for want in word.chars() {
            match self.bump() {
                Some(c) if c == want => {}
                None => return Err(self.eof(&format!("`{word}`"))),
                Some(_) => {
                    return Err(Diagnostic::error(
                        "E0103",
                        pos,
                        format!("malformed literal, expected `{word}`"),
                        "check the spelling of true, false and null",
                    ))
                }
            }
        }
        Ok(kind)
    }

    fn number(&mut self) -> Read<String> {
        let pos = self.pos();
        let mut out = String::new();
        let bad = |msg: &str| {
            Diagnostic::error("E0104", pos, format!("malformed number: {msg}"), "write numbers as in JSON, e.g. 3, -1 or 2.5; fractions go in strings such as \"5/2\"")
        };
        if self.peek() == Some('-') {
            out.push(self.bump().expect("peeked"));
        }
        match self.peek() {
            Some('0') => out.push(self.bump().expect("peeked")),
            Some(c) if c.is_ascii_digit() => {
                while let Some(c) = self.peek().filter(char::is_ascii_digit) {
                    out.push(c);
                    self.bump();
                }
            }
            _ => return Err(bad("missing digits")),
        }
        if self.peek() == Some('.') {
            out.push(self.bump().expect("peeked"));
            if !self.peek().is_some_and(|c| c.is_ascii_digit()) {
                return Err(bad("missing digits after the decimal point"));
            }
            while let Some(c) = self.peek().filter(char::is_ascii_digit) {
                out.push(c);
                self.bump();
            }
        }
        if matches!(self.peek(), Some('e' | 'E')) {
            out.push(self.bump().expect("peeked"));
            if matches!(self.peek(), Some('+' | '-')) {
                out.push(self.bump().expect("peeked"));
            }
            if !self.peek().is_some_and(|c| c.is_ascii_digit()) {
                return Err(bad("missing exponent digits"));
            }
            while let Some(c) = self.peek().filter(char::is_ascii_digit) {
                out.push(c);
                self.bump();
            }
        }
        Ok(out)
    }

    fn hex4(&mut self) -> Read<u32> {
        let mut v = 0;
        for _ in 0..4 {
            let pos = self.pos();
            let c = self.bump().ok_or_else(|| self.eof("a unicode escape"))?;
            let d = c.to_digit(16).ok_or_else(|| {
                Diagnostic::error(
                    "E0105",
                    pos,
                    format!("`{}` is not a hex digit", c.escape_debug()),
                    "unicode escapes are \\u followed by four hex digits",
                )
            })?;
            v = v * 16 + d;
        }
        Ok(v)
    }

    fn string(&mut self) -> Read<String> {
        self.expect('"', "to open a string")?;
        let mut out = String::new();
        loop {
            let pos = self.pos();
            match self.bump() {
                None => return Err(self.eof("a string")),
                Some('"') => return Ok(out),
                Some('\\') => {
                    let c = self.bump().ok_or_else(|| self.eof("an escape"))?;
                    match c {
                        '"' => out.push('"'),
                        '\\' => out.push('\\'),
                        '/' => out.push('/'),
                        'b' => out.push('\u{8}'),
                        'f' => out.push('\u{c}'),
                        'n' => out.push('\n'),
                        'r' => out.push('\r'),
                        't' => out.push('\t'),
                        'u' => {
                            let hi = self.hex4()?;
                            let code = if (0xd800..0xdc00).contains(&hi) {
                                if self.bump() != Some('\\') || self.bump() != Some('u') {
                                    return Err(Diagnostic::error(
                                        "E0105",
                                        pos,
                                        "unpaired surrogate in unicode escape",
                                        "write the full surrogate pair or the character itself",
                                    ));
                                }
                                let lo = self.hex4()?;
                                if !(0xdc00..0xe000).contains(&lo) {
                                    return Err(Diagnostic::error(
                                        "E0105",
                                        pos,
                                        "invalid low surrogate in unicode escape",
                                        "write the character itself",
                                    ));
                                }
                                0x10000 + ((hi - 0xd800) << 10) + (lo - 0xdc00)
                            } else {
                                hi
                            };
                            match char::from_u32(code) {
                                Some(ch) => out.push(ch),
                                None => {
                                    return Err(Diagnostic::error(
                                        "E0105",
                                        pos,
                                        "unicode escape names no character",
                                        "write the character itself",
                                    ))
                                }
                            }
                        }
                        other => {
                            return Err(Diagnostic::error(
                                "E0105",
                                pos,
                                format!("unknown escape `\\{}`", other.escape_debug()),
                                "valid escapes are \\\" \\\\ \\/ \\b \\f \\n \\r \\t \\uXXXX",
                            ))
                        }
                    }
                }
                Some(c) if (c as u32) < 0x20 => {
                    return Err(Diagnostic::error(
                        "E0106",
                        pos,
                        "control character inside a string",
                        "escape it, e.g. \\n; a missing closing quote also causes this",
                    ))
                }
                Some(c) => out.push(c),
            }
        }
    }

    fn array(&mut self, depth: usize) -> Read<Kind> {
        self.expect('[', "to open an array")?;
        let mut items = Vec::new();
        self.skip_ws();
        if self.peek() == Some(']') {
            self.bump();
            return Ok(Kind::Array(items));
        }
        loop {
            self.skip_ws();
            items.push(self.value(depth + 1)?);
            self.skip_ws();
            match self.peek() {
                Some(',') => {
                    self.bump();
                }
                Some(']') => {
                    self.bump();
                    return Ok(Kind::Array(items));
                }
                Some(c) => {
                    return Err(Diagnostic::error(
                        "E0102",
                        self.pos(),
                        format!(
                            "expected `,` or `]` in an array, found `{}`",
                            c.escape_debug()
                        ),
                        "separate array items with commas",
                    ))
                }
                None => return Err(self.eof("an array")),
            }
        }
    }

    fn object(&mut self, depth: usize) -> Read<Kind> {
        self.expect('{', "to open an object")?;
        let mut members: Vec<Member> = Vec::new();
        self.skip_ws();
        if self.peek() == Some('}') {
            self.bump();
            return Ok(Kind::Object(members));
        }
        loop {
            self.skip_ws();
            let key_pos = self.pos();
            match self.peek() {
                Some('"') => {}
                Some(c) => {
                    return Err(Diagnostic::error(
                        "E0102",
                        key_pos,
                        format!("expected a quoted key, found `{}`", c.escape_debug()),
                        "object keys are double-quoted strings",
                    ))
                }
                None => return Err(self.eof("an object")),
            }
            let key = self.string()?;
            self.skip_ws();
            self.expect(':', "after an object key")?;
            self.skip_ws();
            let value = self.value(depth + 1)?;
            if let Some(first) = members.iter().find(|m| m.key == key) {
                let msg = format!("duplicate key `{key}` (first at {})", first.key_pos);
                match self.strictness {
                    Strictness::Strict => {
                        return Err(Diagnostic::error(
                            "E0109",
                            key_pos,
                            msg,
                            "remove one of the entries",
                        ))
                    }
                    Strictness::Lenient => self.notes.push(Diagnostic::warning(
                        "W0109",
                        key_pos,
                        msg + "; the last one wins",
                        "remove one of the entries",
                    )),
                }
            }
            members.push(Member {
                key,
                key_pos,
                value,
            });
            self.skip_ws();
            match self.peek() {
                Some(',') => {
                    self.bump();
                }
                Some('}') => {
                    self.bump();
                    return Ok(Kind::Object(members));
                }
                Some(c) => {
                    return Err(Diagnostic::error(
                        "E0102",
                        self.pos(),
                        format!(
                            "expected `,` or `}}` in an object, found `{}`",
                            c.escape_debug()
                        ),
                        "separate members with commas",
                    ))
                }
                None => return Err(self.eof("an object")),
            }
        }
    }
}

// ---------------------------------------------------------------- writer

fn escape(s: &str, out: &mut String) {
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
}

/// Single-line rendering.
pub fn compact(v: &Value) -> String {
    let mut out = String::new();
    write_compact(v, &mut out);
    out
}

fn write_compact(v: &Value, out: &mut String) {
    match &v.kind {
        Kind::Null => out.push_str("null"),
        Kind::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Kind::Number(n) => out.push_str(n),
        Kind::String(s) => escape(s, out),
        Kind::Array(items) => {
            out.push('[');
            for (k, item) in items.iter().enumerate() {
                if k > 0 {
                    out.push_str(", ");
                }
                write_compact(item, out);
            }
            out.push(']');
        }
        Kind::Object(members) => {
            out.push('{');
            for (k, m) in members.iter().enumerate() {
                if k > 0 {
                    out.push_str(", ");
                }
                escape(&m.key, out);
                out.push_str(": ");
                write_compact(&m.value, out);
            }
            out.push('}');
        }
    }
}

const WIDTH: usize = 100;

/// Deterministic layout: a container stays on one line when it fits in
/// [`WIDTH`] columns, otherwise its items go one per line.
pub fn pretty(v: &Value) -> String {
    let mut out = String::new();
    write_pretty(v, 0, &mut out);
    out.push('\n');
    out
}

fn write_pretty(v: &Value, indent: usize, out: &mut String) {
    let flat = compact(v);
    if indent + flat.chars().count() <= WIDTH || !matches!(v.kind, Kind::Array(_) | Kind::Object(_))
    {
        out.push_str(&flat);
        return;
    }
    let pad = " ".repeat(indent + 2);
    match &v.kind {
        Kind::Array(items) => {
            out.push_str("[\n");
            for (k, item) in items.iter().enumerate() {
                out.push_str(&pad);
                write_pretty(item, indent + 2, out);
                out.push_str(if k + 1 < items.len() { ",\n" } else { "\n" });
            }
        }
        Kind::Object(members) => {
            out.push_str("{\n");
            for (k, m) in members.iter().enumerate() {
                out.push_str(&pad);
                escape(&m.key, out);
                out.push_str(": ");
                write_pretty(&m.value, indent + 2, out);
                out.push_str(if k + 1 < members.len() { ",\n" } else { "\n" });
            }
        }
        _ => unreachable!("scalars are written flat"),
    }
    out.push_str(&" ".repeat(indent));
    out.push(if matches!(v.kind, Kind::Array(_)) {
        ']'
    } else {
        '}'
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ok(text: &str) -> Value {
        parse(text, Strictness::Strict, &mut Vec::new()).unwrap()
    }

    fn err(text: &str) -> Diagnostic {
        parse(text, Strictness::Strict, &mut Vec::new()).unwrap_err()
    }

    #[test]
    fn positions_are_tracked() {
        let v = ok("{\n  \"a\": [1,\n   true]\n}");
        let arr = v.get("a").unwrap().as_array().unwrap();
        assert_eq!(arr[1].pos, Pos { line: 3, column: 4 });
    }

    #[test]
    fn truncation_points_at_the_end() {
        let d = err("{\"a\": [1, 2");
        assert_eq!(d.code, "E0101");
        assert_eq!(
            d.pos,
            Pos {
                line: 1,
                column: 12
            }
        );
    }

    #[test]
    fn duplicates_depend_on_mode() {
        assert_eq!(err("{\"a\": 1, \"a\": 2}").code, "E0109");
        let mut notes = Vec::new();
        let v = parse("{\"a\": 1, \"a\": 2}", Strictness::Lenient, &mut notes).unwrap();
        assert_eq!(notes.len(), 1);
        assert_eq!(v.get("a").unwrap().kind, Kind::Number("2".into()));
    }

    #[test]
    fn escapes_round_trip() {
        let v = Value::string("θ \"q\" \\ \n\u{1}");
        let text = compact(&v);
        assert_eq!(ok(&text).as_str(), v.as_str());
        assert_eq!(ok("\"\\ud83d\\ude00\"").as_str(), Some("😀"));
    }

    #[test]
    fn malformed_inputs_are_rejected() {
        for bad in [
            "",
            "[1,]",
            "{\"a\" 1}",
            "01x",
            "-",
            "1.",
            "\"\\x\"",
            "[1] 2",
            "nul",
            "\"\\ud800\"",
        ] {
            assert!(
                parse(bad, Strictness::Strict, &mut Vec::new()).is_err(),
                "{bad:?}"
            );
        }
    }

    #[test]
    fn deep_nesting_is_an_error_not_a_crash() {
        let text = "[".repeat(10_000);
        assert_eq!(err(&text).code, "E0108");
    }

    #[test]
    fn pretty_breaks_long_containers_only() {
        let short = Value::array([Value::number(1), Value::number(2)]);
        assert_eq!(pretty(&short), "[1, 2]\n");
        let long = Value::array((0..60).map(Value::number));
        let text = pretty(&long);
        assert!(text.lines().count() > 2);
        assert_eq!(strip(ok(&text)), long);
    }

    fn strip(mut v: Value) -> Value {
        v.pos = Pos::default();
        match &mut v.kind {
            Kind::Array(items) => {
                let taken = std::mem::take(items);
                *items = taken.into_iter().map(strip).collect();
            }
            Kind::Object(members) => {
                for m in members.iter_mut() {
                    m.key_pos = Pos::default();
                    m.value = strip(m.value.clone());
                }
            }
            _ => {}
        }
        v
    }
}
