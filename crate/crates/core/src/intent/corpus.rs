use std::path::Path;

use super::{normalize, parse_nile, IntentError, NileIntent, TermIndex, Token};

const BUILTIN: &str = include_str!("../../data/exemplars.txt");

#[derive(Debug, Clone, PartialEq)]
pub struct Exemplar {
    english: String,
    nile_text: String,
    nile: NileIntent,
    tokens: Vec<Token>,
}

impl Exemplar {
    pub fn english(&self) -> &str {
        &self.english
    }

    pub fn nile_text(&self) -> &str {
        &self.nile_text
    }

    pub fn nile(&self) -> &NileIntent {
        &self.nile
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }
}

/// Few-shot (english, nile) pairs plus the TF-IDF index over the english side.
#[derive(Debug, Clone, PartialEq)]
pub struct ExemplarCorpus {
    entries: Vec<Exemplar>,
    index: TermIndex,
}

impl ExemplarCorpus {
    pub fn new(pairs: Vec<(String, String)>) -> Result<Self, IntentError> {
        let entries = pairs
            .into_iter()
            .enumerate()
            .map(|(i, (english, nile_text))| {
                let at = |e: IntentError| IntentError::Corpus {
                    line: i + 1,
                    message: format!("entry {}: {e}", i + 1),
                };
                Ok(Exemplar {
                    tokens: normalize(&english).map_err(at)?,
                    nile: parse_nile(&nile_text).map_err(at)?,
                    english,
                    nile_text,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_entries(entries)
    }

    fn from_entries(entries: Vec<Exemplar>) -> Result<Self, IntentError> {
        if entries.is_empty() {
            return Err(IntentError::Corpus { line: 0, message: "corpus has no entries".into() });
        }
        let docs: Vec<Vec<Token>> = entries.iter().map(|e| e.tokens.clone()).collect();
        Ok(Self { index: TermIndex::build(&docs), entries })
    }

    /// Parses the text format: records separated by `---` lines, each an
    /// `EN: <english>` line followed by Nile lines.
    pub fn parse(text: &str) -> Result<Self, IntentError> {
        let mut entries = Vec::new();
        let mut english: Option<(usize, String)> = None;
        let mut nile: Vec<&str> = Vec::new();
        let mut nile_line = 0;

        let mut flush = |english: &mut Option<(usize, String)>, nile: &mut Vec<&str>, nile_line: usize, end: usize| {
            match english.take() {
                None if nile.is_empty() => Ok(()),
                None => Err(IntentError::Corpus { line: nile_line, message: "Nile text without an 'EN:' line".into() }),
                Some((line, _)) if nile.is_empty() => {
                    Err(IntentError::Corpus { line, message: "record has no Nile text".into() })
                }
                Some((line, en)) => {
                    let nile_text = nile.join("\n");
                    nile.clear();
                    let tokens = normalize(&en).map_err(|e| IntentError::Corpus { line, message: e.to_string() })?;
                    let parsed = parse_nile(&nile_text).map_err(|e| IntentError::Corpus {
                        line: nile_line,
                        message: format!("{e} (record ending at line {end})"),
                    })?;
                    entries.push(Exemplar { english: en, nile_text, nile: parsed, tokens });
                    Ok(())
                }
            }
        };

        let mut last = 0;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            last = line_no;
            let line = raw.trim();
            if line == "---" {
                flush(&mut english, &mut nile, nile_line, line_no)?;
            } else if let Some(en) = line.strip_prefix("EN:") {
                if english.is_some() || !nile.is_empty() {
                    return Err(IntentError::Corpus { line: line_no, message: "missing '---' before new record".into() });
                }
                english = Some((line_no, en.trim().to_string()));
            } else if line.is_empty() || line.starts_with('#') && english.is_none() {
                continue;
            } else {
                if nile.is_empty() {
                    nile_line = line_no;
                }
                nile.push(raw);
            }
        }
        flush(&mut english, &mut nile, nile_line, last)?;
        Self::from_entries(entries)
    }

    pub fn load(path: &Path) -> Result<Self, IntentError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| IntentError::Corpus { line: 0, message: format!("{}: {e}", path.display()) })?;
        Self::parse(&text)
    }

    /// Corpus shipped with the crate.
    pub fn builtin() -> Self {
        Self::parse(BUILTIN).expect("bundled exemplar corpus is valid")
    }

    pub fn to_text(&self) -> String {
        self.entries
            .iter()
            .map(|e| format!("EN: {}\n{}\n", e.english, e.nile_text))
            .collect::<Vec<_>>()
            .join("---\n")
    }

    pub fn entries(&self) -> &[Exemplar] {
        &self.entries
    }

    pub fn index(&self) -> &TermIndex {
        &self.index
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
