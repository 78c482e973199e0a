use super::{
    normalize, parse_nile, retrieve_exemplars, BandwidthBound, BoundMode, ExemplarCorpus, IntentError, NileIntent, Token,
};

pub const DEFAULT_RETRIEVAL_K: usize = 3;

/// English intent as typed by the operator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NaturalIntent {
    id: String,
    text: String,
}

impl NaturalIntent {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Result<Self, IntentError> {
        let text = text.into();
        if text.split_whitespace().next().is_none() {
            return Err(IntentError::EmptyIntent);
        }
        Ok(Self { id: id.into(), text })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn text(&self) -> &str {
        &self.text
    }
}

const FILLERS: &[&str] = &["the", "a", "an", "endpoint", "node", "host"];

/// First word after `tokens[at]`, skipping filler words. Words that look like
/// units or keywords are not endpoints.
fn endpoint_after(tokens: &[Token], at: usize) -> Option<String> {
    tokens[at + 1..]
        .iter()
        .map_while(|t| t.word())
        .find(|w| !FILLERS.contains(w))
        .filter(|w| !matches!(*w, "from" | "to" | "at" | "with"))
        .map(str::to_string)
}

const MIN_CUES: &[&str] = &["least", "minimum", "min", "guarantee", "guaranteed", "floor"];
const MAX_CUES: &[&str] = &["most", "maximum", "max", "limit", "cap", "throttle", "exceed", "under", "restrict", "ceiling"];

/// Bound mode stated in the text, if exactly one kind of cue word appears.
fn mode_cue(tokens: &[Token]) -> Option<BoundMode> {
    let has = |cues: &[&str]| tokens.iter().filter_map(Token::word).any(|w| cues.contains(&w));
    match (has(MIN_CUES), has(MAX_CUES)) {
        (true, false) => Some(BoundMode::Min),
        (false, true) => Some(BoundMode::Max),
        _ => None,
    }
}

struct Slots {
    bound_value: u64,
    bound_unit: super::Unit,
    origin: Option<String>,
    destination: Option<String>,
}

fn fill_slots(tokens: &[Token]) -> Result<Slots, IntentError> {
    let quantities: Vec<(usize, &Token)> = tokens
        .iter()
        .enumerate()
        .filter(|(_, t)| matches!(t, Token::Quantity { .. }))
        .collect();
    let Some(&(_, first)) = quantities.first() else {
        return Err(IntentError::Untranslatable("no bandwidth amount with a kbps/mbps/gbps unit".into()));
    };
    let mut kbps: Vec<u64> = quantities.iter().filter_map(|(_, t)| t.kbps()).collect();
    kbps.sort_unstable();
    kbps.dedup();
    if kbps.len() > 1 {
        return Err(IntentError::Ambiguous(kbps));
    }
    let Token::Quantity { value, unit } = first else { unreachable!() };

    let origin_at = tokens.iter().position(|t| t.word() == Some("from"));
    let origin = origin_at.and_then(|i| endpoint_after(tokens, i));
    // "to" only names a destination once a source or amount has been given;
    // otherwise it is usually a verb particle ("want to stream").
    let first_amount = quantities[0].0;
    let anchor = origin.as_ref().and(origin_at).map_or(first_amount, |o| o.min(first_amount));
    let destination = tokens
        .iter()
        .enumerate()
        .skip(anchor)
        .filter(|(_, t)| t.word() == Some("to"))
        .find_map(|(i, _)| endpoint_after(tokens, i));

    Ok(Slots { bound_value: *value, bound_unit: *unit, origin, destination })
}

/// Deterministic retrieval + template translation of English into Nile.
///
/// The top-ranked exemplar supplies the intent name, any endpoint not
/// mentioned in the text, and the bound mode unless the text states one
/// ("at least", "cap", ...).
pub fn translate(intent: &NaturalIntent, corpus: &ExemplarCorpus) -> Result<NileIntent, IntentError> {
    let tokens = normalize(intent.text())?;
    let slots = fill_slots(&tokens)?;
    let top = retrieve_exemplars(&tokens, corpus, DEFAULT_RETRIEVAL_K);
    let template = top[0].exemplar.nile();
    log::debug!(
        "intent {}: template #{} (similarity {:.3})",
        intent.id(),
        top[0].index,
        top[0].similarity
    );

    let filled = NileIntent::new(
        template.name(),
        slots.origin.as_deref().unwrap_or(template.origin()),
        slots.destination.as_deref().unwrap_or(template.destination()),
        BandwidthBound::new(mode_cue(&tokens).unwrap_or(template.bound().mode()), slots.bound_value, slots.bound_unit)?,
    )?;
    // Route through the grammar so the output is exactly what a Nile consumer sees.
    parse_nile(&filled.render())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intent::Unit;

    fn tr(text: &str) -> Result<NileIntent, IntentError> {
        translate(&NaturalIntent::new("t", text).unwrap(), &ExemplarCorpus::builtin())
    }

    #[test]
    fn id_goal_sentence() {
        let n = tr("I need at most 300 kbps from gateway to appserver").unwrap();
        assert_eq!(n.bound().mode(), BoundMode::Max);
        assert_eq!((n.bound().value(), n.bound().unit()), (300, Unit::Kbps));
        assert_eq!((n.origin(), n.destination()), ("gateway", "appserver"));
    }

    #[test]
    fn ood_goal_sentence_keeps_template_endpoints() {
        let n = tr("Limit streaming to 450 kbps").unwrap();
        assert_eq!(n.bound().mode(), BoundMode::Max);
        assert_eq!(n.bound().kbps(), 450);
        let corpus = ExemplarCorpus::builtin();
        let top = &retrieve_exemplars(&normalize("Limit streaming to 450 kbps").unwrap(), &corpus, 1)[0];
        assert_eq!((n.origin(), n.destination()), (top.exemplar.nile().origin(), top.exemplar.nile().destination()));
        assert_eq!(n.name(), top.exemplar.nile().name());
    }

    #[test]
    fn stated_mode_overrides_template() {
        // the closest exemplar is a "max" one, but the text asks for a floor
        let n = tr("Give the tablet at least 150 kbps from core to tablet").unwrap();
        assert_eq!(n.bound().mode(), BoundMode::Min);
        // contradictory cues leave the template's mode in place
        let n = tr("Cap voice at least 64 kbps from pbx to handset").unwrap();
        let corpus = ExemplarCorpus::builtin();
        let q = normalize("Cap voice at least 64 kbps from pbx to handset").unwrap();
        assert_eq!(n.bound().mode(), retrieve_exemplars(&q, &corpus, 1)[0].exemplar.nile().bound().mode());
    }

    #[test]
    fn no_amount_is_untranslatable() {
        assert!(matches!(tr("Please make the network fast"), Err(IntentError::Untranslatable(_))));
        assert!(matches!(tr("give me 300 please"), Err(IntentError::Untranslatable(_))));
    }

    #[test]
    fn conflicting_amounts_are_ambiguous() {
        assert_eq!(tr("300 kbps or maybe 450 kbps"), Err(IntentError::Ambiguous(vec![300, 450])));
        // Same amount written twice is not a conflict.
        assert!(tr("300 kbps, yes 0.3 mbps").is_ok());
    }

    #[test]
    fn verb_particle_to_is_not_an_endpoint() {
        let n = tr("I want to stream 300 kbps from the cdn").unwrap();
        assert_eq!(n.origin(), "cdn");
        assert_ne!(n.destination(), "stream");
    }

    #[test]
    fn minimum_template_selected_for_guarantee_wording() {
        let n = tr("Guarantee at least 128 kbps for voice").unwrap();
        assert_eq!(n.bound().mode(), BoundMode::Min);
        assert_eq!(n.bound().kbps(), 128);
    }

    #[test]
    fn deterministic() {
        let a = tr("cap traffic from edge to tv at 2 mbps");
        assert_eq!(a, tr("cap traffic from edge to tv at 2 mbps"));
        assert_eq!(a.unwrap().bound().kbps(), 2000);
    }
}
