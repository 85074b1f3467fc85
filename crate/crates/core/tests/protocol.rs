use semcom::channel::ChannelConfig;
use semcom::mdl::{ContentElement, MechanismGraph, MechanismNode, SemanticLanguage};
use semcom::protocol::{
    all_cells, data_shower, knowledge_gain, reverse_mentorship, run_session, ApprenticeState,
    CausalQuery, DidacticsPolicy, MessageKind, ProtocolError, QueryLevel, SessionContent,
    SessionOptions, TeacherState,
};

fn node(
    arity: usize,
    parents: Vec<usize>,
    noise_weights: Vec<u8>,
    table: Vec<usize>,
) -> MechanismNode {
    MechanismNode {
        arity,
        parents,
        noise_weights,
        table,
    }
}

/// Root with four values; child copies it through a lookup table.
fn lookup(id: &str) -> ContentElement {
    let g = MechanismGraph {
        nodes: vec![
            node(4, vec![], vec![255, 120, 60, 30], vec![0, 1, 2, 3]),
            node(4, vec![0], vec![255], vec![2, 0, 3, 1]),
        ],
    };
    ContentElement::new(id, g).unwrap()
}

/// Same distribution as [`lookup`] except the child's table ignores its
/// parent, so a minimal description drops the edge.
fn redundant(id: &str) -> ContentElement {
    let g = MechanismGraph {
        nodes: vec![
            node(4, vec![], vec![255, 120, 60, 30], vec![0, 1, 2, 3]),
            node(4, vec![0], vec![255], vec![2, 2, 2, 2]),
        ],
    };
    ContentElement::new(id, g).unwrap()
}

fn content(ids: &[&str]) -> Vec<SessionContent> {
    ids.iter()
        .map(|id| SessionContent {
            element: id.to_string(),
            content_bits: 2048,
        })
        .collect()
}

fn pair(
    elements: Vec<ContentElement>,
    policy: f64,
    budget: usize,
) -> (TeacherState, ApprenticeState) {
    let t = TeacherState::new(
        elements,
        "uniform",
        DidacticsPolicy {
            max_raw_fraction: policy,
        },
        1.0,
    )
    .unwrap();
    let a = ApprenticeState::new(t.universe(), budget);
    (t, a)
}

#[test]
fn no_raw_and_no_queries_leaves_chance_fidelity() {
    // A single deterministic root: the apprentice guesses uniformly.
    let g = MechanismGraph {
        nodes: vec![node(4, vec![], vec![255], vec![3])],
    };
    let (mut t, mut a) = pair(vec![ContentElement::new("c", g).unwrap()], 0.0, 0);
    let tr = run_session(
        &mut t,
        &mut a,
        &ChannelConfig::default(),
        &content(&["c"]),
        1,
        &SessionOptions::default(),
        1,
    )
    .unwrap();
    assert_eq!(tr.nu, 0);
    assert_eq!(tr.zeta, 0);
    assert!((tr.fidelity - 0.25).abs() < 1e-12);
}

#[test]
fn full_raw_complement_alone_gives_fidelity_one() {
    let (mut t, mut a) = pair(vec![lookup("c")], 1.0, 0);
    let tr = run_session(
        &mut t,
        &mut a,
        &ChannelConfig::default(),
        &content(&["c"]),
        1,
        &SessionOptions::default(),
        1,
    )
    .unwrap();
    assert!(tr.nu > 0);
    assert_eq!(tr.zeta, 0);
    assert_eq!(tr.fidelity, 1.0);
    assert_eq!(tr.maturity, 1.0);
}

#[test]
fn mid_maturity_queries_are_interventional() {
    let e = lookup("c");
    let (_, mut a) = pair(vec![e.clone()], 0.9, 2);
    let t = TeacherState::new(vec![e.clone()], "uniform", DidacticsPolicy::default(), 1.0).unwrap();
    a.receive_representation("c", t.language.get("c").unwrap());
    // Eight cells in total; ground four so that maturity is one half.
    let cells = all_cells("c", &e.graph);
    for c in cells.iter().skip(4) {
        a.learn_cell(c, e.graph.nodes[c.node].table[c.index]);
    }
    assert_eq!(a.maturity(), 0.5);
    let qs = a.pose_queries(&["c".into()]);
    assert_eq!(qs.len(), 2);
    assert!(qs.iter().all(|q| q.level == QueryLevel::Interventional));
    // The least likely noise symbols of the root are the most uncertain.
    let targeted: Vec<_> = qs.iter().map(|q| q.cell.clone().unwrap()).collect();
    assert_eq!(targeted, vec![cells[0].clone(), cells[1].clone()]);
}

#[test]
fn fully_known_element_poses_no_queries() {
    let (t, mut a) = pair(vec![lookup("c")], 0.9, 10);
    data_shower(&t.language, &mut a);
    assert!(a.pose_queries(&["c".into()]).is_empty());
}

#[test]
fn answers_ground_cells_and_count_as_gain() {
    let e = lookup("c");
    let (t, mut a) = pair(vec![e.clone()], 0.9, 1);
    a.receive_representation("c", t.language.get("c").unwrap());
    let before = a.clone();
    let same = knowledge_gain(&before, &a);
    assert_eq!((same.cells, same.is_semantically_rich), (0, false));
    let q = a.pose_queries(&["c".into()]).remove(0);
    let answer = t.answer_query(&q).map_err(|e| e.to_string());
    assert!(a.apply_answer(&q, &answer));
    let g = knowledge_gain(&before, &a);
    assert_eq!((g.cells, g.is_semantically_rich), (1, true));
}

#[test]
fn associational_answer_on_independent_variables_is_the_marginal() {
    let g = MechanismGraph {
        nodes: vec![
            node(2, vec![], vec![255, 85], vec![0, 1]),
            node(2, vec![], vec![255, 255], vec![0, 1]),
        ],
    };
    let (t, _) = pair(vec![ContentElement::new("c", g).unwrap()], 0.9, 0);
    let q = CausalQuery {
        element: "c".into(),
        level: QueryLevel::Associational,
        target: "v00".into(),
        setting: [("v01".to_string(), 1)].into(),
        factual: Default::default(),
        cell: None,
    };
    let p = t.answer_query(&q).unwrap();
    assert!((p[0] - 0.75).abs() < 1e-12 && (p[1] - 0.25).abs() < 1e-12);
}

#[test]
fn partial_library_gives_half_maturity() {
    let (t, mut a) = pair(vec![lookup("a"), lookup("b")], 0.9, 0);
    let mut lib = SemanticLanguage::new("uniform");
    lib.insert("a", t.language.get("a").unwrap().clone())
        .unwrap();
    data_shower(&lib, &mut a);
    assert_eq!(a.maturity(), 0.5);
}

#[test]
fn reverse_mentorship_cases() {
    // Shorter apprentice description is adopted.
    let (mut t, mut a) = pair(vec![redundant("c")], 0.9, 0);
    data_shower(&t.language.clone(), &mut a);
    let before = t.language.get("c").unwrap().encoded_len();
    reverse_mentorship(&a, &mut t, "c").unwrap();
    assert!(t.language.get("c").unwrap().encoded_len() < before);
    // Now equal: not superior.
    assert_eq!(
        reverse_mentorship(&a, &mut t, "c"),
        Err(ProtocolError::NotSuperior("c".into()))
    );
    // A teacher without an entry adopts unconditionally.
    t.language.remove("c");
    reverse_mentorship(&a, &mut t, "c").unwrap();
    assert!(t.language.contains("c"));

    // Already minimal: equal lengths.
    let (mut t, mut a) = pair(vec![lookup("c")], 0.9, 0);
    data_shower(&t.language.clone(), &mut a);
    assert_eq!(
        reverse_mentorship(&a, &mut t, "c"),
        Err(ProtocolError::NotSuperior("c".into()))
    );
}

#[test]
fn corrupted_representations_are_repaired_from_the_language() {
    let (mut t, mut a) = pair(vec![lookup("a"), redundant("b")], 0.9, 4);
    let cfg = ChannelConfig {
        bit_error_prob: 0.004,
        payload_bits: 64,
        ..ChannelConfig::default()
    };
    let mut corrections = 0;
    for s in 1..=30 {
        let tr = run_session(
            &mut t,
            &mut a,
            &cfg,
            &content(&["a", "b"]),
            s,
            &SessionOptions::default(),
            u64::from(s),
        )
        .unwrap();
        corrections += tr.corrections;
        assert_eq!(tr.miscorrections, 0);
        if s > 3 {
            assert_eq!(tr.fidelity, 1.0);
            assert!(tr
                .messages
                .iter()
                .filter(|m| m.kind == MessageKind::Representation)
                .all(|m| m.packets == cfg.packets_for(m.payload_bits)));
        }
    }
    assert!(corrections > 0);
}

#[test]
fn queries_against_unknown_elements_fail() {
    let (t, _) = pair(vec![lookup("c")], 0.9, 0);
    let q = CausalQuery {
        element: "zz".into(),
        level: QueryLevel::Interventional,
        target: "v00".into(),
        setting: Default::default(),
        factual: Default::default(),
        cell: None,
    };
    assert_eq!(
        t.answer_query(&q),
        Err(ProtocolError::UnknownElement("zz".into()))
    );
}
