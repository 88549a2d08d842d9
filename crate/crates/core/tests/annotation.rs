use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use retrace_core::annotation::*;
use retrace_core::synthetic::report_fixture;

#[test]
fn every_shipped_leaf_is_reachable() {
    let tree = CitoDecisionTree::shipped();
    tree.validate().unwrap();
    let leaves = tree.leaves();
    assert!(!leaves.is_empty());
    for (path, function) in leaves {
        match traverse_decision_tree(&tree, &path).unwrap() {
            TreeStep::Leaf { function: f, .. } => assert_eq!(f, function),
            other => panic!("{path:?} stopped at {other:?}"),
        }
        assert!(tree.is_function(function.as_str()));
        for depth in 0..path.len() {
            assert!(matches!(traverse_decision_tree(&tree, &path[..depth]).unwrap(), TreeStep::Question { .. }));
        }
    }
}

#[test]
fn reviewing_paths_resolve() {
    let tree = CitoDecisionTree::shipped();
    let reviewing = "Reviewing and eventually giving an opinion on the cited entity";
    let step = traverse_decision_tree(&tree, &[reviewing, "Inconsistent with", "10", "critiques"]).unwrap();
    let TreeStep::Leaf { function, guide_sentence } = step else { panic!("not a leaf") };
    assert_eq!(function.as_str(), "critiques");
    assert_eq!(guide_sentence, "My statements are inconsistent with the cited entity, such that they critiques");
    let step = traverse_decision_tree(&tree, &[reviewing, "Consistent with", "20", "agrees_with"]).unwrap();
    assert!(matches!(step, TreeStep::Leaf { function, .. } if function.as_str() == "agrees_with"));
    let err = traverse_decision_tree(&tree, &[reviewing, "Consistent with", "20", "critiques"]).unwrap_err();
    assert!(matches!(err, AnnotationError::Navigation { .. }));
}

#[test]
fn log_replay_rebuilds_state_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("annotations.jsonl");
    let citations = report_fixture().citations;
    let ids: Vec<String> = citations.iter().map(|c| c.id.clone()).collect();
    let tree = CitoDecisionTree::shipped();
    let functions: Vec<String> = tree.functions.iter().cloned().collect();
    let mut r = ChaCha8Rng::seed_from_u64(1000);
    let live_state = {
        let mut store = AnnotationStore::open(&log, citations.clone(), tree.functions.clone()).unwrap();
        assert!(matches!(
            AnnotationStore::open(&log, vec![], tree.functions.clone()),
            Err(AnnotationError::Locked(_))
        ));
        for n in 0..1000 {
            let input = AnnotationInput {
                sentiment: Some(Sentiment::ALL.choose(&mut r).unwrap().as_str().into()),
                intent: Some(functions.choose(&mut r).unwrap().clone()),
                mentions_retraction: Some(r.gen_bool(0.1)),
                annotator: Some(format!("annotator{}", r.gen_range(0..3))),
            };
            let ts = format!("2021-01-01T00:00:{:02}.{:03}Z", n / 1000, n % 1000);
            store.record(ids.choose(&mut r).unwrap(), &input, Some(ts)).unwrap();
        }
        store.state().to_json()
    };
    let events = read_log(&log).unwrap();
    assert_eq!(events.len(), 1000);
    assert_eq!(replay(&events).to_json(), live_state);
    let reopened = AnnotationStore::open(&log, citations, tree.functions.clone()).unwrap();
    assert_eq!(reopened.state().to_json(), live_state);
}

#[test]
fn invalid_input_reports_every_field() {
    let dir = tempfile::tempdir().unwrap();
    let citations = report_fixture().citations;
    let id = citations[0].id.clone();
    let mut store =
        AnnotationStore::open(&dir.path().join("log.jsonl"), citations, CitoDecisionTree::shipped().functions).unwrap();
    let input = AnnotationInput {
        sentiment: Some("furious".into()),
        intent: Some("likes".into()),
        mentions_retraction: None,
        annotator: Some("a".into()),
    };
    let Err(AnnotationError::Validation(errors)) = store.record(&id, &input, None) else { panic!("accepted") };
    let fields: Vec<&str> = errors.iter().map(|e| e.field.as_str()).collect();
    assert_eq!(fields, ["sentiment", "intent", "mentions_retraction"]);
    assert!(store.events().is_empty());
}

#[test]
fn csv_export_then_import_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let citations: Vec<InTextCitation> = report_fixture().citations.into_iter().take(40).collect();
    let mut buf = Vec::new();
    export_csv(&citations, &mut buf).unwrap();
    let blank: Vec<InTextCitation> = citations
        .iter()
        .map(|c| InTextCitation { sentiment: None, intent: None, mentions_retraction: None, ..c.clone() })
        .collect();
    let mut store =
        AnnotationStore::open(&dir.path().join("log.jsonl"), blank, CitoDecisionTree::shipped().functions).unwrap();
    import_csv(&mut store, buf.as_slice(), None).unwrap();
    for c in citations.iter().filter(|c| c.is_annotated()) {
        let got = store.citation(&c.id).unwrap();
        assert_eq!((got.sentiment, got.intent.clone()), (c.sentiment, c.intent.clone()));
    }
}

#[test]
fn context_keeps_neighbouring_sentences() {
    let text = "Dr. Smith studied archives. The results in [3] were striking. Later work disagreed.";
    let sentences = split_sentences(text);
    assert_eq!(sentences.len(), 3);
    let (ctx, warning) = extract_context(&sentences, 1, Some("[3]")).unwrap();
    assert!(warning.is_none());
    assert_eq!(ctx.sentence_count(), 3);
    assert_eq!(ctx.anchor, "The results in [3] were striking.");
}
