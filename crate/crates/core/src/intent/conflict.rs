use super::{BoundMode, NileIntent};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConflictReason {
    DifferentMax,
    DifferentMin,
    MaxBelowMin,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Conflict {
    /// Index into the store's active list.
    pub stored_index: usize,
    pub stored: NileIntent,
    pub reason: ConflictReason,
}

pub type ConflictReport = Vec<Conflict>;

fn incompatible(a: &NileIntent, b: &NileIntent) -> Option<ConflictReason> {
    if (a.origin(), a.destination()) != (b.origin(), b.destination()) {
        return None;
    }
    let (ka, kb) = (a.bound().kbps(), b.bound().kbps());
    match (a.bound().mode(), b.bound().mode()) {
        (BoundMode::Max, BoundMode::Max) => (ka != kb).then_some(ConflictReason::DifferentMax),
        (BoundMode::Min, BoundMode::Min) => (ka != kb).then_some(ConflictReason::DifferentMin),
        (BoundMode::Max, BoundMode::Min) => (ka < kb).then_some(ConflictReason::MaxBelowMin),
        (BoundMode::Min, BoundMode::Max) => (kb < ka).then_some(ConflictReason::MaxBelowMin),
    }
}

/// Intents accepted so far. Not internally synchronized.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IntentStore {
    active: Vec<NileIntent>,
}

impl IntentStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn active(&self) -> &[NileIntent] {
        &self.active
    }

    /// Adds `candidate` when it conflicts with nothing; otherwise returns the
    /// report and leaves the store unchanged.
    pub fn admit(&mut self, candidate: NileIntent) -> Result<(), ConflictReport> {
        let report = detect_conflict(&candidate, self);
        if report.is_empty() {
            self.active.push(candidate);
            Ok(())
        } else {
            Err(report)
        }
    }
}

/// Every stored intent on the same endpoint pair whose bound cannot hold
/// together with the candidate's. Bounds are compared in kbps.
pub fn detect_conflict(candidate: &NileIntent, store: &IntentStore) -> ConflictReport {
    store
        .active
        .iter()
        .enumerate()
        .filter_map(|(i, s)| {
            incompatible(candidate, s).map(|reason| Conflict { stored_index: i, stored: s.clone(), reason })
        })
        .collect()
}
