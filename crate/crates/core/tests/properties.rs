use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use semcom::bits::BitString;
use semcom::channel::{
    binary_entropy, bsc, classical_packets_needed, discrete_capacity, entropy, Channel,
    ChannelConfig,
};
use semcom::harness::{generate_truth, kpi_from_trace, run_experiment, ContentSpec, Scenario};
use semcom::kpi::{classify_regime, reasoning_capacity, semantic_impact, total_capacity, Regime};
use semcom::mdl::{
    lagrangian_complexity, pairs_from_symbols, structure_function, ModelFamily, ReprId,
    Representation, SemanticLanguage,
};
use semcom::protocol::{
    run_session, ApprenticeState, DidacticsPolicy, SessionContent, SessionOptions, TeacherState,
};
use semcom::scm::gallery::{random_scm, RandomScmSpec};
use semcom::scm::{CounterfactualQuery, Intervention, Scm};
use semcom::split::{split, Datastream, SplitResult};

fn scm_from_seed(seed: u64) -> Scm {
    random_scm(
        &mut ChaCha8Rng::seed_from_u64(seed),
        &RandomScmSpec::default(),
    )
}

fn light() -> ProptestConfig {
    ProptestConfig::with_cases(24)
}

proptest! {
    #[test]
    fn joint_is_normalized_and_valid(seed in any::<u64>()) {
        let scm = scm_from_seed(seed);
        prop_assert!(scm.validate().is_ok());
        let joint = scm.joint_distribution().unwrap();
        prop_assert!((joint.total() - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn do_pins_the_intervened_variable(seed in any::<u64>(), pick in any::<prop::sample::Index>()) {
        let scm = scm_from_seed(seed);
        let ids = scm.variable_ids();
        let v = pick.index(ids.len());
        let value = scm.variables()[v].arity() - 1;
        let iv = Intervention::none().set(ids[v].clone(), value);
        let d = scm.interventional_distribution(&iv, &ids[v]).unwrap();
        prop_assert!((d.prob(&[value]) - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn counterfactual_without_intervention_is_the_posterior(seed in any::<u64>(), draw in any::<u64>()) {
        let scm = scm_from_seed(seed);
        let ids = scm.variable_ids();
        let world = scm.sample(draw).unwrap();
        let factual: std::collections::BTreeMap<_, _> =
            ids.iter().cloned().zip(world.iter().copied()).take(1).collect();
        let target = ids.last().unwrap().clone();
        let cf = scm
            .counterfactual(&CounterfactualQuery {
                factual: factual.clone(),
                intervention: Intervention::none(),
                target: target.clone(),
            })
            .unwrap();
        let obs = scm
            .interventional_distribution(
                &Intervention { assignments: Default::default(), conditioning: factual },
                &target,
            )
            .unwrap();
        prop_assert!(cf.max_abs_diff(&obs) <= 1e-9);
    }

    #[test]
    fn scm_text_round_trip(seed in any::<u64>()) {
        let scm = scm_from_seed(seed);
        let back = Scm::from_text(&scm.to_text()).unwrap();
        prop_assert_eq!(back.variable_ids(), scm.variable_ids());
        prop_assert!(back.joint_distribution().unwrap().max_abs_diff(&scm.joint_distribution().unwrap()) <= 1e-12);
    }

    #[test]
    fn bits_hex_round_trip(bits in prop::collection::vec(any::<bool>(), 0..200)) {
        let b = BitString::from_bools(bits.clone());
        prop_assert_eq!(BitString::from_hex(&b.to_hex(), bits.len()).unwrap(), b);
    }

    #[test]
    fn structure_function_is_non_increasing(
        symbols in prop::collection::vec(0u32..3, 16..200),
        t1 in 0usize..600,
        dt in 0usize..600,
    ) {
        let pairs = pairs_from_symbols(&symbols, 2);
        let family = ModelFamily::fit_markov(&pairs, 3, 3, 2);
        // The uniform member needs only its header, so small budgets can be
        // infeasible; compare only where both are defined.
        if let (Ok(a), Ok(b)) = (
            structure_function(&family, &pairs, t1 as f64),
            structure_function(&family, &pairs, (t1 + dt) as f64),
        ) {
            prop_assert!(b <= a + 1e-9);
        }
    }

    #[test]
    fn lagrangian_is_monotone_in_lambda(
        symbols in prop::collection::vec(0u32..4, 16..200),
        l1 in 0.0f64..5.0,
        dl in 0.0f64..5.0,
    ) {
        let pairs = pairs_from_symbols(&symbols, 2);
        let family = ModelFamily::fit_markov(&pairs, 4, 4, 2);
        let a = lagrangian_complexity(&family, &pairs, l1).unwrap();
        let b = lagrangian_complexity(&family, &pairs, l1 + dl).unwrap();
        prop_assert!(b.gamma + 1e-9 >= a.gamma);
        prop_assert!(b.k <= a.k);
    }

    #[test]
    fn split_partitions_the_stream(
        symbols in prop::collection::vec(0u32..4, 1..600),
        window in 4usize..64,
        theta in 0.05f64..1.5,
    ) {
        let stream = Datastream::new(symbols.clone(), 4).unwrap();
        let family = ModelFamily::fit_markov(&stream.pairs(), 4, 4, 2);
        let r = split(&stream, &family, window, theta).unwrap();
        prop_assert!(r.covers(symbols.len()));
        prop_assert!((0.0..=1.0).contains(&r.learnable_fraction()));
        prop_assert_eq!(SplitResult::from_text(&r.to_text()).unwrap().classes(), r.classes());
    }

    #[test]
    fn entropy_is_bounded(weights in prop::collection::vec(0.001f64..1.0, 1..64)) {
        let total: f64 = weights.iter().sum();
        let pmf: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let h = entropy(&pmf);
        prop_assert!(h >= -1e-12 && h <= (pmf.len() as f64).log2() + 1e-9);
    }

    #[test]
    fn bsc_capacity_matches_closed_form(p in 0.0f64..=1.0) {
        let c = discrete_capacity(&bsc(p)).unwrap();
        prop_assert!((c - (1.0 - binary_entropy(p))).abs() <= 1e-6);
    }

    #[test]
    fn packet_accounting(
        len in 0usize..2000,
        payload in 8usize..256,
        p in 0.0f64..0.01,
        seed in any::<u64>(),
    ) {
        let cfg = ChannelConfig { payload_bits: payload, bit_error_prob: p, ..ChannelConfig::default() };
        let bits = BitString::from_bools((0..len).map(|i| i % 3 == 0).collect());
        let base = len.div_ceil(payload) as u64;
        let (received, cost) = Channel::new(cfg.clone(), seed).send(&bits);
        prop_assert_eq!(cost.packets, base);
        prop_assert!(received.len() >= len);
        let d = Channel::new(cfg.clone(), seed).send_reliable(&bits, 64);
        prop_assert!(d.cost.packets >= base);
        prop_assert!(d.cost.corrupted_packets <= d.cost.packets);
        if d.delivered {
            prop_assert_eq!(received.len(), d.received.len());
            prop_assert_eq!(d.received.slice(0, len), bits.clone());
        }
        if p == 0.0 {
            prop_assert_eq!(received.slice(0, len), bits);
        }
        prop_assert!(classical_packets_needed(len as u64, &cfg) >= base);
    }

    #[test]
    fn capacities_add_up(w in 0.0f64..1e6, gamma in 0.0f64..1e3, omega in 0.0f64..1e4, eta in 0.0f64..1e4) {
        let cfg = ChannelConfig { bandwidth_w: w, sinr_gamma: gamma, ..ChannelConfig::default() };
        let c = total_capacity(&cfg, omega, eta);
        prop_assert!(c.c_c >= 0.0 && c.c_r >= 0.0);
        prop_assert_eq!(c.c_t, c.c_c + c.c_r);
    }

    #[test]
    fn reasoning_capacity_increases_with_eta(omega in 0.01f64..100.0, eta in 0.0f64..100.0, d in 0.01f64..10.0) {
        prop_assert!(reasoning_capacity(omega, eta + d) > reasoning_capacity(omega, eta));
    }

    #[test]
    fn impact_is_the_classical_oracle(bits in 1u64..1_000_000, payload in 8usize..512, p in 0.0f64..0.001) {
        let cfg = ChannelConfig { payload_bits: payload, bit_error_prob: p, ..ChannelConfig::default() };
        prop_assert_eq!(semantic_impact(bits, &cfg), classical_packets_needed(bits, &cfg));
    }

    #[test]
    fn regimes_progress_along_a_sweep(iota in 1.5f64..1000.0) {
        let order = |r: Regime| match r {
            Regime::Nascent => 0,
            Regime::Converging => 1,
            Regime::AcknowledgementLike => 2,
            Regime::LanguageDominant => 3,
            Regime::RepresentationFailure => 4,
        };
        let mut last = 0;
        let mut seen = std::collections::BTreeSet::new();
        for i in 0..=4000 {
            let eta = 2.0 * iota * i as f64 / 4000.0;
            let r = classify_regime(eta, iota);
            prop_assert!(order(r) >= last && order(r) <= 3, "{eta} {iota} {r}");
            last = order(r);
            seen.insert(order(r));
        }
        prop_assert!(seen.contains(&0) && seen.contains(&2) && seen.contains(&3));
    }

    #[test]
    fn low_impact_never_looks_language_dominant(eta in 0.0f64..100.0, iota in 0.0f64..=1.0) {
        let r = classify_regime(eta, iota);
        prop_assert!(r != Regime::LanguageDominant && r != Regime::AcknowledgementLike);
    }
}

proptest! {
    #![proptest_config(light())]

    #[test]
    fn representation_and_language_round_trip(seed in any::<u64>(), n in 1usize..4) {
        let spec = ContentSpec { elements: n, variables: 3, ..ContentSpec::default() };
        let elements = generate_truth(&spec, seed).unwrap();
        let mut lang = SemanticLanguage::new("suffix-1");
        for (i, e) in elements.iter().enumerate() {
            let r = Representation { id: ReprId(i as u16), graph: e.graph.clone() };
            prop_assert_eq!(Representation::decode(&r.encode()).unwrap(), r.clone());
            lang.insert(e.id.clone(), r).unwrap();
        }
        prop_assert_eq!(SemanticLanguage::from_text(&lang.to_text()).unwrap(), lang);
    }

    #[test]
    fn sessions_never_unlearn(seed in any::<u64>(), budget in 0usize..4, payload in 8usize..96) {
        let spec = ContentSpec { elements: 2, variables: 3, noise_symbols: 2, ..ContentSpec::default() };
        let elements = generate_truth(&spec, seed).unwrap();
        let content: Vec<SessionContent> = elements
            .iter()
            .map(|e| SessionContent { element: e.id.clone(), content_bits: 1024 })
            .collect();
        let mut teacher = TeacherState::new(elements, "uniform", DidacticsPolicy::default(), 1.0).unwrap();
        let mut apprentice = ApprenticeState::new(teacher.universe(), budget);
        let cfg = ChannelConfig { payload_bits: payload, ..ChannelConfig::default() };
        let mut maturity = 0.0;
        let mut nu = u64::MAX;
        for s in 1..=6 {
            let t = run_session(&mut teacher, &mut apprentice, &cfg, &content, s, &SessionOptions::default(), seed ^ u64::from(s)).unwrap();
            prop_assert!((0.0..=1.0).contains(&t.fidelity));
            prop_assert!(t.maturity >= maturity && t.maturity <= 1.0);
            prop_assert!(t.nu <= nu);
            for m in &t.messages {
                prop_assert_eq!(m.plane, m.kind.plane());
            }
            if t.maturity == 1.0 {
                prop_assert_eq!(t.fidelity, 1.0);
            }
            maturity = t.maturity;
            nu = t.nu;
        }
    }

    #[test]
    fn runs_conserve_bits_and_reproduce(seed in any::<u64>(), filler in 0usize..400, ber in prop::sample::select(vec![0.0, 0.001])) {
        let mut s = Scenario::new(seed, 3);
        s.content.filler_symbols = filler;
        s.content.samples_per_session = 64;
        s.channel.bit_error_prob = ber;
        let a = run_experiment(&s).unwrap();
        prop_assert!(a.ledger.is_conserved());
        for session in &a.sessions {
            prop_assert!(session.ledger.is_conserved());
        }
        prop_assert_eq!(a.sessions.len(), 3);
        let b = run_experiment(&s).unwrap();
        prop_assert_eq!(&a, &b);
        let records: Vec<_> = a.messages().cloned().collect();
        prop_assert_eq!(kpi_from_trace(&records, &s.channel, s.semantic.omega).unwrap(), a.kpi_records());
    }
}
