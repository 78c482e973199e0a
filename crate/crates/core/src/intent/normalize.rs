use std::fmt;

use super::{IntentError, Unit};

/// One normalized token of an English intent.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Token {
    Word(String),
    /// Bare integer with no unit next to it.
    Number(u64),
    /// Number with an attached or adjacent bandwidth unit.
    Quantity { value: u64, unit: Unit },
}

impl Token {
    /// Term used for retrieval; numbers collapse onto placeholder terms so
    /// that "300 kbps" and "450 kbps" look alike.
    pub fn term(&self) -> &str {
        match self {
            Token::Word(w) => w,
            Token::Number(_) => "<num>",
            Token::Quantity { .. } => "<bw>",
        }
    }

    pub fn word(&self) -> Option<&str> {
        match self {
            Token::Word(w) => Some(w),
            _ => None,
        }
    }

    /// Quantity in kbps, if this token is one.
    pub fn kbps(&self) -> Option<u64> {
        match self {
            Token::Quantity { value, unit } => value.checked_mul(unit.kbps_factor()),
            _ => None,
        }
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Word(w) => f.write_str(w),
            Token::Number(n) => write!(f, "<num:{n}>"),
            Token::Quantity { value, unit } => write!(f, "<num:{value} {unit}>"),
        }
    }
}

/// Integer or one-decimal-point number as written.
fn parse_number(s: &str) -> Option<(u64, Option<(u64, u32)>)> {
    let (int, frac) = match s.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (s, None),
    };
    if int.is_empty() || !int.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let int: u64 = int.parse().ok()?;
    match frac {
        None => Some((int, None)),
        Some(f) if !f.is_empty() && f.len() <= 9 && f.chars().all(|c| c.is_ascii_digit()) => {
            Some((int, Some((f.parse().ok()?, f.len() as u32))))
        }
        Some(_) => None,
    }
}

/// Converts `int.frac unit` to an integral quantity, stepping down to kbps
/// when the fraction requires it.
fn quantity(int: u64, frac: Option<(u64, u32)>, unit: Unit) -> Option<Token> {
    match frac {
        None => Some(Token::Quantity { value: int, unit }),
        Some((f, digits)) => {
            let scale = 10u64.pow(digits);
            let kbps_num = int
                .checked_mul(unit.kbps_factor())?
                .checked_mul(scale)?
                .checked_add(f.checked_mul(unit.kbps_factor())?)?;
            (kbps_num % scale == 0).then(|| Token::Quantity { value: kbps_num / scale, unit: Unit::Kbps })
        }
    }
}

fn split_unit_suffix(piece: &str) -> Option<(&str, Unit)> {
    let split = piece.find(|c: char| c.is_ascii_alphabetic())?;
    let (num, unit) = piece.split_at(split);
    Some((num, Unit::parse(unit)?))
}

/// Lowercases, strips punctuation and tokenizes on whitespace. Numbers keep
/// an adjacent unit (`300kbps`, `300 Kbps`).
pub fn normalize(text: &str) -> Result<Vec<Token>, IntentError> {
    let lowered = text.to_lowercase();
    let chars: Vec<char> = lowered.chars().collect();
    let mut cleaned = String::with_capacity(chars.len());
    for (i, &c) in chars.iter().enumerate() {
        let keep_dot = c == '.'
            && i > 0
            && chars[i - 1].is_ascii_digit()
            && chars.get(i + 1).is_some_and(|n| n.is_ascii_digit());
        if c.is_alphanumeric() || keep_dot {
            cleaned.push(c);
        } else {
            cleaned.push(' ');
        }
    }

    let pieces: Vec<&str> = cleaned.split_whitespace().collect();
    let mut tokens = Vec::with_capacity(pieces.len());
    let mut i = 0;
    while i < pieces.len() {
        let piece = pieces[i];
        if let Some((int, frac)) = parse_number(piece) {
            if let Some(unit) = pieces.get(i + 1).and_then(|p| Unit::parse(p)) {
                if let Some(tok) = quantity(int, frac, unit) {
                    tokens.push(tok);
                    i += 2;
                    continue;
                }
            }
            tokens.push(match frac {
                None => Token::Number(int),
                Some(_) => Token::Word(piece.to_string()),
            });
            i += 1;
            continue;
        }
        if let Some((num, unit)) = split_unit_suffix(piece) {
            if let Some(tok) = parse_number(num).and_then(|(int, frac)| quantity(int, frac, unit)) {
                tokens.push(tok);
                i += 1;
                continue;
            }
        }
        tokens.push(Token::Word(piece.to_string()));
        i += 1;
    }

    if tokens.is_empty() {
        return Err(IntentError::EmptyIntent);
    }
    Ok(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn render(tokens: &[Token]) -> Vec<String> {
        tokens.iter().map(|t| t.to_string()).collect()
    }

    #[test]
    fn folds_case_and_attaches_units() {
        let t = normalize("Give me 300 Kbps from UE1 to Server").unwrap();
        assert_eq!(render(&t), ["give", "me", "<num:300 kbps>", "from", "ue1", "to", "server"]);
        assert_eq!(normalize("300kbps").unwrap(), normalize("300 kbps").unwrap());
    }

    #[test]
    fn strips_punctuation() {
        let t = normalize("AT LEAST 2 Mbps!").unwrap();
        assert_eq!(render(&t), ["at", "least", "<num:2 mbps>"]);
    }

    #[test]
    fn empty_input_rejected() {
        assert_eq!(normalize(""), Err(IntentError::EmptyIntent));
        assert_eq!(normalize("  ?!, ."), Err(IntentError::EmptyIntent));
    }

    #[test]
    fn numbers_without_units_stay_numbers() {
        let t = normalize("room 42, floor 3.").unwrap();
        assert_eq!(t, vec![
            Token::Word("room".into()),
            Token::Number(42),
            Token::Word("floor".into()),
            Token::Number(3),
        ]);
    }

    #[test]
    fn decimal_quantities_step_down_to_kbps() {
        let t = normalize("about 2.5 Mbps please").unwrap();
        assert_eq!(t[1], Token::Quantity { value: 2500, unit: Unit::Kbps });
        assert_eq!(normalize("1.5gbps").unwrap()[0].kbps(), Some(1_500_000));
    }

    #[test]
    fn unicode_case_folding() {
        let t = normalize("ÜBER 10 KBPS").unwrap();
        assert_eq!(render(&t), ["über", "<num:10 kbps>"]);
    }
}
