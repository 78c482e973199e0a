//! The subset of Nile used for bandwidth intents.
//!
//! ```text
//! define intent <id>: from endpoint('<label>') to endpoint('<label>')
//!     set bandwidth('<max|min>', '<int>', '<unit>')
//! ```
//!
//! Tokens may be separated by any whitespace, including newlines. Any other
//! Nile clause (`for group(...)`, `allow`, `block`, ...) is rejected.

use std::fmt;

use super::IntentError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Unit {
    Kbps,
    Mbps,
    Gbps,
}

impl Unit {
    pub fn kbps_factor(self) -> u64 {
        match self {
            Unit::Kbps => 1,
            Unit::Mbps => 1_000,
            Unit::Gbps => 1_000_000,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Unit::Kbps => "kbps",
            Unit::Mbps => "mbps",
            Unit::Gbps => "gbps",
        }
    }

    /// Case-insensitive unit lookup.
    pub fn parse(s: &str) -> Option<Unit> {
        match s.to_ascii_lowercase().as_str() {
            "kbps" => Some(Unit::Kbps),
            "mbps" => Some(Unit::Mbps),
            "gbps" => Some(Unit::Gbps),
            _ => None,
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundMode {
    Max,
    Min,
}

impl BoundMode {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundMode::Max => "max",
            BoundMode::Min => "min",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BandwidthBound {
    mode: BoundMode,
    value: u64,
    unit: Unit,
}

impl BandwidthBound {
    pub fn new(mode: BoundMode, value: u64, unit: Unit) -> Result<Self, IntentError> {
        if value == 0 {
            return Err(IntentError::InvalidField("bandwidth value must be positive".into()));
        }
        if value.checked_mul(unit.kbps_factor()).is_none() {
            return Err(IntentError::InvalidField("bandwidth value out of range".into()));
        }
        Ok(Self { mode, value, unit })
    }

    pub fn mode(&self) -> BoundMode {
        self.mode
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn unit(&self) -> Unit {
        self.unit
    }

    /// Exact value in kbps.
    pub fn kbps(&self) -> u64 {
        self.value * self.unit.kbps_factor()
    }
}

/// Parsed Nile bandwidth intent.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NileIntent {
    name: String,
    origin: String,
    destination: String,
    bound: BandwidthBound,
}

fn valid_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn valid_label(s: &str) -> bool {
    !s.is_empty() && !s.chars().any(|c| c == '\'' || c == '"' || c == '\n' || c == '\r')
}

impl NileIntent {
    pub fn new(
        name: impl Into<String>,
        origin: impl Into<String>,
        destination: impl Into<String>,
        bound: BandwidthBound,
    ) -> Result<Self, IntentError> {
        let (name, origin, destination) = (name.into(), origin.into(), destination.into());
        if !valid_ident(&name) {
            return Err(IntentError::InvalidField(format!("intent name '{name}'")));
        }
        for label in [&origin, &destination] {
            if !valid_label(label) {
                return Err(IntentError::InvalidField(format!("endpoint label '{label}'")));
            }
        }
        Ok(Self { name, origin, destination, bound })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn origin(&self) -> &str {
        &self.origin
    }

    pub fn destination(&self) -> &str {
        &self.destination
    }

    pub fn bound(&self) -> &BandwidthBound {
        &self.bound
    }

    /// Canonical single-line Nile text.
    pub fn render(&self) -> String {
        format!(
            "define intent {}: from endpoint('{}') to endpoint('{}') set bandwidth('{}', '{}', '{}')",
            self.name,
            self.origin,
            self.destination,
            self.bound.mode.as_str(),
            self.bound.value,
            self.bound.unit
        )
    }
}

impl fmt::Display for NileIntent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Str(String),
    Int(String),
    Colon,
    LParen,
    RParen,
    Comma,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("'{s}'"),
            Tok::Str(s) => format!("string '{s}'"),
            Tok::Int(s) => format!("number {s}"),
            Tok::Colon => "':'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::Comma => "','".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> IntentError {
    IntentError::Syntax { line, column, message: message.into() }
}

fn lex(text: &str) -> Result<Vec<Spanned>, IntentError> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_col) = (line, col);
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            col += 1;
            i += 1;
            continue;
        }
        let single = match c {
            ':' => Some(Tok::Colon),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            _ => None,
        };
        if let Some(tok) = single {
            out.push(Spanned { tok, line: start_line, column: start_col });
            i += 1;
            col += 1;
            continue;
        }
        if c == '\'' || c == '"' {
            let quote = c;
            let mut j = i + 1;
            let mut s = String::new();
            while j < chars.len() && chars[j] != quote {
                if chars[j] == '\n' {
                    return Err(syntax(start_line, start_col, "unterminated string"));
                }
                s.push(chars[j]);
                j += 1;
            }
            if j == chars.len() {
                return Err(syntax(start_line, start_col, "unterminated string"));
            }
            col += j + 1 - i;
            i = j + 1;
            out.push(Spanned { tok: Tok::Str(s), line: start_line, column: start_col });
            continue;
        }
        if c.is_ascii_digit() || c == '-' {
            let mut j = i + 1;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            let s: String = chars[i..j].iter().collect();
            col += j - i;
            i = j;
            out.push(Spanned { tok: Tok::Int(s), line: start_line, column: start_col });
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut j = i + 1;
            while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                j += 1;
            }
            let s: String = chars[i..j].iter().collect();
            col += j - i;
            i = j;
            out.push(Spanned { tok: Tok::Ident(s), line: start_line, column: start_col });
            continue;
        }
        return Err(syntax(start_line, start_col, format!("unexpected character '{c}'")));
    }
    out.push(Spanned { tok: Tok::Eof, line, column: col });
    Ok(out)
}

/// Nile keywords that introduce clauses this grammar does not support.
const OTHER_CLAUSES: &[&str] = &[
    "for", "allow", "block", "add", "remove", "start", "end", "unset", "middlebox", "group",
    "service", "traffic", "protocol", "quota",
];

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn next(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(t: &Spanned, wanted: &str) -> IntentError {
        if let Tok::Ident(word) = &t.tok {
            if OTHER_CLAUSES.contains(&word.to_ascii_lowercase().as_str()) {
                return IntentError::UnsupportedClause {
                    clause: word.clone(),
                    line: t.line,
                    column: t.column,
                };
            }
        }
        syntax(t.line, t.column, format!("expected {wanted}, found {}", t.tok.describe()))
    }

    fn keyword(&mut self, kw: &str) -> Result<(), IntentError> {
        let t = self.next();
        match &t.tok {
            Tok::Ident(s) if s.eq_ignore_ascii_case(kw) => Ok(()),
            _ => Err(Self::unexpected(&t, &format!("'{kw}'"))),
        }
    }

    fn punct(&mut self, want: Tok) -> Result<(), IntentError> {
        let t = self.next();
        if t.tok == want {
            Ok(())
        } else {
            Err(Self::unexpected(&t, &want.describe()))
        }
    }

    fn ident(&mut self) -> Result<String, IntentError> {
        let t = self.next();
        match t.tok {
            Tok::Ident(s) => Ok(s),
            _ => Err(Self::unexpected(&t, "intent identifier")),
        }
    }

    fn string(&mut self, what: &str) -> Result<Spanned, IntentError> {
        let t = self.next();
        match &t.tok {
            Tok::Str(_) => Ok(t),
            _ => Err(Self::unexpected(&t, what)),
        }
    }

    fn endpoint(&mut self) -> Result<String, IntentError> {
        self.keyword("endpoint")?;
        self.punct(Tok::LParen)?;
        let t = self.string("quoted endpoint label")?;
        self.punct(Tok::RParen)?;
        match t.tok {
            Tok::Str(s) if valid_label(&s) => Ok(s),
            _ => Err(syntax(t.line, t.column, "empty endpoint label")),
        }
    }

    fn value(&mut self) -> Result<(u64, usize, usize), IntentError> {
        let t = self.next();
        let raw = match &t.tok {
            Tok::Str(s) => s.trim().to_string(),
            Tok::Int(s) => s.clone(),
            _ => return Err(Self::unexpected(&t, "bandwidth value")),
        };
        let digits = raw.strip_prefix('-').unwrap_or(&raw);
        if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
            return Err(syntax(t.line, t.column, format!("bandwidth value '{raw}' is not an integer")));
        }
        if raw.starts_with('-') || digits.chars().all(|c| c == '0') {
            return Err(IntentError::NonPositiveValue { line: t.line, column: t.column });
        }
        let v: u64 = digits
            .parse()
            .map_err(|_| syntax(t.line, t.column, "bandwidth value out of range"))?;
        Ok((v, t.line, t.column))
    }

    fn bandwidth(&mut self) -> Result<BandwidthBound, IntentError> {
        let t = self.next();
        match &t.tok {
            Tok::Ident(s) if s.eq_ignore_ascii_case("bandwidth") => {}
            Tok::Ident(s) => {
                return Err(IntentError::UnsupportedClause {
                    clause: format!("set {s}"),
                    line: t.line,
                    column: t.column,
                })
            }
            _ => return Err(Self::unexpected(&t, "'bandwidth'")),
        }
        self.punct(Tok::LParen)?;
        let m = self.string("quoted 'max' or 'min'")?;
        let mode = match &m.tok {
            Tok::Str(s) if s.trim().eq_ignore_ascii_case("max") => BoundMode::Max,
            Tok::Str(s) if s.trim().eq_ignore_ascii_case("min") => BoundMode::Min,
            Tok::Str(s) => {
                return Err(syntax(m.line, m.column, format!("bound mode must be 'max' or 'min', found '{s}'")))
            }
            _ => unreachable!(),
        };
        self.punct(Tok::Comma)?;
        let (value, vline, vcol) = self.value()?;
        self.punct(Tok::Comma)?;
        let u = self.string("quoted unit")?;
        let unit = match &u.tok {
            Tok::Str(s) => Unit::parse(s.trim()).ok_or_else(|| IntentError::UnknownUnit {
                unit: s.clone(),
                line: u.line,
                column: u.column,
            })?,
            _ => unreachable!(),
        };
        self.punct(Tok::RParen)?;
        BandwidthBound::new(mode, value, unit)
            .map_err(|_| syntax(vline, vcol, "bandwidth value out of range"))
    }

    fn intent(&mut self) -> Result<NileIntent, IntentError> {
        self.keyword("define")?;
        self.keyword("intent")?;
        let name = self.ident()?;
        self.punct(Tok::Colon)?;
        self.keyword("from")?;
        let origin = self.endpoint()?;
        self.keyword("to")?;
        let destination = self.endpoint()?;
        self.keyword("set")?;
        let bound = self.bandwidth()?;
        let end = self.next();
        if end.tok != Tok::Eof {
            return Err(Self::unexpected(&end, "end of intent"));
        }
        NileIntent::new(name, origin, destination, bound)
    }
}

/// Parses one Nile bandwidth intent.
pub fn parse_nile(text: &str) -> Result<NileIntent, IntentError> {
    let toks = lex(text)?;
    Parser { toks, pos: 0 }.intent()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const ID_TEXT: &str = "define intent qosIntent: from endpoint('cn') to endpoint('ue1') set bandwidth('max', '300', 'kbps')";

    #[test]
    fn parses_reference_clause() {
        let i = parse_nile(ID_TEXT).unwrap();
        assert_eq!(i.name(), "qosIntent");
        assert_eq!(i.origin(), "cn");
        assert_eq!(i.destination(), "ue1");
        assert_eq!(i.bound().mode(), BoundMode::Max);
        assert_eq!(i.bound().value(), 300);
        assert_eq!(i.bound().unit(), Unit::Kbps);
        assert_eq!(i.render(), ID_TEXT);
    }

    #[test]
    fn whitespace_between_tokens_is_free() {
        let text = "define   intent\n  qosIntent :\n\tfrom endpoint ( 'cn' )\n to endpoint('ue1')\n set bandwidth( 'max' ,300,'KBPS' )  \n";
        assert_eq!(parse_nile(text).unwrap(), parse_nile(ID_TEXT).unwrap());
    }

    #[test]
    fn zero_value_rejected() {
        let text = "define intent a: from endpoint('cn') to endpoint('ue1') set bandwidth('max','0','kbps')";
        assert!(matches!(parse_nile(text), Err(IntentError::NonPositiveValue { line: 1, .. })));
        let neg = "define intent a: from endpoint('cn') to endpoint('ue1') set bandwidth('max', -5, 'kbps')";
        assert!(matches!(parse_nile(neg), Err(IntentError::NonPositiveValue { .. })));
    }

    #[test]
    fn unknown_unit_reports_position() {
        let text = "define intent a: from endpoint('cn') to endpoint('ue1')\nset bandwidth('max', '3', 'tbps')";
        match parse_nile(text) {
            Err(IntentError::UnknownUnit { unit, line, column }) => {
                assert_eq!(unit, "tbps");
                assert_eq!((line, column), (2, 27));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn syntax_errors_carry_line_and_column() {
        let text = "define intent a:\nfrom endpoint('cn') too endpoint('ue1') set bandwidth('max','3','kbps')";
        match parse_nile(text) {
            Err(IntentError::Syntax { line, column, .. }) => assert_eq!((line, column), (2, 21)),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_nile(""), Err(IntentError::Syntax { line: 1, column: 1, .. })));
        assert!(matches!(
            parse_nile("define intent a: from endpoint('cn) to"),
            Err(IntentError::Syntax { .. })
        ));
    }

    #[test]
    fn other_clauses_rejected() {
        let text = "define intent a: from endpoint('cn') to endpoint('ue1') for group('students') set bandwidth('max','3','kbps')";
        assert!(matches!(parse_nile(text), Err(IntentError::UnsupportedClause { ref clause, .. }) if clause == "for"));
        let quota = "define intent a: from endpoint('cn') to endpoint('ue1') set quota('max','3','kbps')";
        assert!(matches!(parse_nile(quota), Err(IntentError::UnsupportedClause { .. })));
        let trailing = format!("{ID_TEXT} allow traffic('netflix')");
        assert!(matches!(parse_nile(&trailing), Err(IntentError::UnsupportedClause { .. })));
    }

    #[test]
    fn overflowing_value_rejected() {
        let text = "define intent a: from endpoint('cn') to endpoint('ue1') set bandwidth('max','99999999999999999','gbps')";
        assert!(matches!(parse_nile(text), Err(IntentError::Syntax { .. })));
    }

    fn arb_intent() -> impl Strategy<Value = NileIntent> {
        (
            "[a-zA-Z_][a-zA-Z0-9_]{0,12}",
            "[a-z0-9 ._-]{1,10}",
            "[a-z0-9 ._-]{1,10}",
            prop::bool::ANY,
            1u64..5_000_000,
            prop::sample::select(vec![Unit::Kbps, Unit::Mbps, Unit::Gbps]),
        )
            .prop_map(|(name, o, d, max, v, unit)| {
                let mode = if max { BoundMode::Max } else { BoundMode::Min };
                NileIntent::new(name, o, d, BandwidthBound::new(mode, v, unit).unwrap()).unwrap()
            })
    }

    proptest! {
        #[test]
        fn render_parse_round_trip(intent in arb_intent()) {
            let parsed = parse_nile(&intent.render()).unwrap();
            prop_assert_eq!(&parsed, &intent);
            prop_assert_eq!(super::super::extract_bandwidth(&parsed).kbps(), intent.bound().value() * intent.bound().unit().kbps_factor());
        }
    }
}
