use nileztn::intent::{
    extract_bandwidth, translate, translate_via, ConflictReason, ExemplarCorpus, IntentError, IntentStore,
    NaturalIntent, RetrievalBackend,
};

fn intent(text: &str) -> NaturalIntent {
    NaturalIntent::new("t", text).unwrap()
}

#[test]
fn custom_corpus_file_supplies_templates() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("corpus.txt");
    std::fs::write(
        &path,
        "# one exemplar only\nEN: keep the uplink above 1 mbps\n\
         define intent uplinkFloor: from endpoint('ue') to endpoint('core') set bandwidth('min', '1', 'mbps')\n",
    )
    .unwrap();
    let corpus = ExemplarCorpus::load(&path).unwrap();
    let n = translate(&intent("the uplink needs 250 kbps"), &corpus).unwrap();
    assert_eq!(
        n.render(),
        "define intent uplinkFloor: from endpoint('ue') to endpoint('core') set bandwidth('min', '250', 'kbps')"
    );
    assert_eq!(extract_bandwidth(&n).kbps(), 250);
    assert!(matches!(ExemplarCorpus::load(&dir.path().join("nope.txt")), Err(IntentError::Corpus { .. })));
}

#[test]
fn retrieval_backend_agrees_with_direct_translation() {
    let corpus = ExemplarCorpus::builtin();
    let i = intent("Cap traffic from gateway to appserver at 450 kbps");
    let via = translate_via(&RetrievalBackend::new(corpus.clone()), &i).unwrap();
    assert_eq!(via, translate(&i, &corpus).unwrap());
    let err = translate_via(&RetrievalBackend::new(corpus), &intent("hello there")).unwrap_err();
    assert_eq!(err.kind(), "translation-backend");
}

#[test]
fn store_admits_disjoint_and_rejects_overlapping_caps() {
    let corpus = ExemplarCorpus::builtin();
    let tr = |t: &str| translate(&intent(t), &corpus).unwrap();
    let mut store = IntentStore::new();
    store.admit(tr("I need at most 300 kbps from gateway to appserver")).unwrap();
    store.admit(tr("Ensure a minimum of 5 Mbps from camera to recorder")).unwrap();
    // a floor under the existing cap on the same path is compatible
    store.admit(tr("Guarantee at least 100 kbps from gateway to appserver")).unwrap();
    let report = store.admit(tr("Guarantee at least 400 kbps from gateway to appserver")).unwrap_err();
    let reasons: Vec<_> = report.iter().map(|c| c.reason).collect();
    assert_eq!(reasons, [ConflictReason::MaxBelowMin, ConflictReason::DifferentMin]);
    assert_eq!(store.active().len(), 3);
}
