//! Experiment execution: the semantic path and the classical baseline over
//! the same generated content.

use std::ops::AddAssign;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bits::{index_width, BitString};
use crate::channel::{shannon_capacity, Channel, ChannelConfig, TransmissionCost};
use crate::kpi::{KpiRecord, Regime};
use crate::mdl::{lagrangian_complexity, ContentElement, ModelFamily, Pair, SemanticLanguage};
use crate::protocol::{
    data_shower, run_session, ApprenticeState, DidacticsPolicy, MessageKind, MessageRecord,
    SessionContent, SessionOptions, SessionTrace, TeacherState,
};
use crate::split::{resplit_on_high_complexity, split, Datastream, SegmentClass, SourceTag};

use super::scenario::Scenario;
use super::truth::generate_truth;
use super::HarnessError;

pub const FILLER_SOURCE: &str = "filler";
/// Share of an element's block that must be learnable for the element to go
/// over the semantic path.
pub const SEMANTIC_SHARE: f64 = 0.5;

/// Where each generated content bit went. Every bit lands in exactly one of
/// the three destinations.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct BitLedger {
    pub generated: u64,
    /// Bits of elements regenerated by the apprentice.
    pub semantic: u64,
    /// Learnable bits outside any semantic element, sent as plain bits.
    pub raw_complement: u64,
    /// Memorizable bits outside any semantic element.
    pub classical: u64,
}

impl BitLedger {
    pub fn is_conserved(&self) -> bool {
        self.semantic + self.raw_complement + self.classical == self.generated
    }
}

impl AddAssign for BitLedger {
    fn add_assign(&mut self, o: Self) {
        self.generated += o.generated;
        self.semantic += o.semantic;
        self.raw_complement += o.raw_complement;
        self.classical += o.classical;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionReport {
    pub session: u32,
    pub stream_len: usize,
    pub learnable_fraction: f64,
    pub semantic_elements: Vec<String>,
    /// Semantic exchange plus the classical side path. Empty in baseline-only
    /// runs.
    pub trace: SessionTrace,
    pub classical: TransmissionCost,
    pub baseline: TransmissionCost,
    pub ledger: BitLedger,
    pub kpi: Option<KpiRecord>,
}

impl SessionReport {
    /// Packets of the semantic run: the teaching exchange and the classical
    /// side path.
    pub fn semantic_run_packets(&self) -> u64 {
        self.trace.semantic_packets() + self.classical.packets
    }
}

/// Whether the semantic run used fewer packets than the baseline, and whether
/// it did so at full fidelity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dominance {
    pub semantic_packets: u64,
    pub baseline_packets: u64,
    pub min_fidelity: f64,
    pub equal_fidelity: bool,
    pub semantic_cheaper: bool,
    pub statement: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub scenario: Scenario,
    pub tool_version: String,
    pub sessions: Vec<SessionReport>,
    pub aggregate: Option<KpiRecord>,
    pub baseline_total: TransmissionCost,
    pub shannon_capacity: f64,
    pub ledger: BitLedger,
    pub dominance: Option<Dominance>,
    pub language: Option<SemanticLanguage>,
}

impl RunReport {
    pub fn regime_timeline(&self) -> Vec<Regime> {
        self.sessions
            .iter()
            .filter_map(|s| s.kpi.as_ref().map(|k| k.regime))
            .collect()
    }

    /// Per-session rows followed by the aggregate row.
    pub fn kpi_records(&self) -> Vec<KpiRecord> {
        self.sessions
            .iter()
            .filter_map(|s| s.kpi.clone())
            .chain(self.aggregate.clone())
            .collect()
    }

    pub fn messages(&self) -> impl Iterator<Item = &MessageRecord> {
        self.sessions.iter().flat_map(|s| s.trace.messages.iter())
    }
}

struct SessionSeeds {
    samples: u64,
    filler: u64,
    protocol: u64,
    classical: u64,
    baseline: u64,
}

impl SessionSeeds {
    fn draw(rng: &mut ChaCha8Rng) -> Self {
        Self {
            samples: rng.gen(),
            filler: rng.gen(),
            protocol: rng.gen(),
            classical: rng.gen(),
            baseline: rng.gen(),
        }
    }
}

/// Element sample blocks separated by random filler; filler is spread over
/// the gaps before, between and after the blocks.
fn build_stream(
    elements: &[ContentElement],
    scenario: &Scenario,
    seeds: &SessionSeeds,
) -> Result<Datastream, HarnessError> {
    let c = &scenario.content;
    let mut filler_rng = ChaCha8Rng::seed_from_u64(seeds.filler);
    let gaps = elements.len() + 1;
    let gap_len = |g: usize| c.filler_symbols / gaps + usize::from(g < c.filler_symbols % gaps);
    let mut symbols = Vec::new();
    let mut tags = Vec::new();
    let mut push_filler = |symbols: &mut Vec<u32>, tags: &mut Vec<SourceTag>, n: usize| {
        if n > 0 {
            tags.push(SourceTag {
                offset: symbols.len(),
                length: n,
                source: FILLER_SOURCE.to_string(),
            });
            symbols.extend((0..n).map(|_| filler_rng.gen_range(0..c.alphabet as u32)));
        }
    };
    for (g, e) in elements.iter().enumerate() {
        push_filler(&mut symbols, &mut tags, gap_len(g));
        let seed = seeds.samples.wrapping_add(g as u64);
        let samples = e.truth.sample_n(c.samples_per_session, seed)?;
        let offset = symbols.len();
        symbols.extend(samples.iter().flatten().map(|&s| s as u32));
        tags.push(SourceTag {
            offset,
            length: symbols.len() - offset,
            source: e.id.clone(),
        });
    }
    push_filler(&mut symbols, &mut tags, gap_len(elements.len()));
    let mut stream = Datastream::new(symbols, c.alphabet)?;
    stream.tags = tags;
    Ok(stream)
}

fn send_bits(cfg: &ChannelConfig, seed: u64, bits: u64, max_attempts: usize) -> TransmissionCost {
    if bits == 0 {
        return TransmissionCost::default();
    }
    let payload = BitString::from_bools(vec![false; bits as usize]);
    Channel::new(cfg.clone(), seed)
        .send_reliable(&payload, max_attempts)
        .cost
}

/// Runs every session of `scenario`. The result is a pure function of the
/// scenario.
pub fn run_experiment(scenario: &Scenario) -> Result<RunReport, HarnessError> {
    scenario.validate()?;
    let cfg = &scenario.channel;
    let sem = &scenario.semantic;
    let mut master = ChaCha8Rng::seed_from_u64(scenario.seed);
    let elements = generate_truth(&scenario.content, master.gen())?;
    let width = index_width(scenario.content.alphabet) as u64;

    let mut teacher = TeacherState::new(
        elements.clone(),
        "uniform",
        DidacticsPolicy {
            max_raw_fraction: sem.didactics_max_raw,
        },
        sem.lambda,
    )?;
    let mut apprentice = ApprenticeState::new(teacher.universe(), sem.query_budget);
    if let Some(lib) = scenario.load_library()? {
        data_shower(&lib, &mut apprentice);
    }
    let opts = SessionOptions {
        shower: sem.shower,
        reverse_mentorship: sem.reverse_mentorship,
        max_attempts: sem.max_attempts,
    };

    let mut sessions = Vec::with_capacity(scenario.sessions as usize);
    let mut model_chosen = false;
    for session in 1..=scenario.sessions {
        let seeds = SessionSeeds::draw(&mut master);
        let stream = build_stream(&elements, scenario, &seeds)?;
        let generated = stream.len() as u64 * width;
        let baseline = send_bits(cfg, seeds.baseline, generated, sem.max_attempts);

        if sem.baseline_only {
            sessions.push(SessionReport {
                session,
                stream_len: stream.len(),
                learnable_fraction: 0.0,
                semantic_elements: Vec::new(),
                trace: SessionTrace::empty(session),
                classical: TransmissionCost::default(),
                baseline,
                ledger: BitLedger {
                    generated,
                    classical: generated,
                    ..BitLedger::default()
                },
                kpi: None,
            });
            continue;
        }

        let pairs = stream.pairs();
        let family = ModelFamily::fit_markov(
            &pairs,
            scenario.content.alphabet,
            scenario.content.alphabet,
            sem.max_order,
        );
        let mut result = split(&stream, &family, sem.window, sem.theta)?;
        let learnable_pairs: Vec<Pair> = result
            .learnable()
            .flat_map(|s| pairs[s.offset..s.end()].iter().cloned())
            .collect();
        if !learnable_pairs.is_empty() {
            let report = lagrangian_complexity(&family, &learnable_pairs, sem.lambda)?;
            if !model_chosen {
                teacher.language.model_id = report.chosen_model.clone();
                model_chosen = true;
            }
            if let Some(cap) = sem.gamma_cap {
                result = resplit_on_high_complexity(&result, &report, cap);
            }
        }

        // Element-level routing: a block rides the semantic path when enough
        // of it is learnable; everything else goes as plain bits.
        let mut content = Vec::new();
        let mut on_semantic = vec![false; stream.len()];
        for tag in stream.tags.iter().filter(|t| t.source != FILLER_SOURCE) {
            let learnable = result.learnable_in(tag.offset, tag.offset + tag.length);
            if learnable as f64 >= SEMANTIC_SHARE * tag.length as f64 {
                on_semantic[tag.offset..tag.offset + tag.length].fill(true);
                content.push(SessionContent {
                    element: tag.source.clone(),
                    content_bits: tag.length as u64 * width,
                });
            }
        }
        let mut ledger = BitLedger {
            generated,
            ..BitLedger::default()
        };
        let classes = result.classes();
        for (semantic, class) in on_semantic.iter().zip(&classes) {
            match (semantic, class) {
                (true, _) => ledger.semantic += width,
                (false, SegmentClass::Learnable) => ledger.raw_complement += width,
                (false, SegmentClass::Memorizable) => ledger.classical += width,
            }
        }

        let mut trace = if content.is_empty() {
            SessionTrace::empty(session)
        } else {
            run_session(
                &mut teacher,
                &mut apprentice,
                cfg,
                &content,
                session,
                &opts,
                seeds.protocol,
            )?
        };
        trace.maturity = apprentice.maturity();

        let side_bits = ledger.raw_complement + ledger.classical;
        let classical = send_bits(cfg, seeds.classical, side_bits, sem.max_attempts);
        if classical.packets > 0 {
            trace.classical_packets += classical.packets;
            trace.duration_s += classical.seconds;
            trace.messages.push(MessageRecord {
                session,
                plane: MessageKind::Classical.plane(),
                kind: MessageKind::Classical,
                element: String::new(),
                payload_bits: side_bits as usize,
                packets: classical.packets,
                corrupted: classical.corrupted_packets,
                impact_bits: 0,
            });
        }
        let kpi = KpiRecord::for_session(&trace, cfg, sem.omega)?;
        sessions.push(SessionReport {
            session,
            stream_len: stream.len(),
            learnable_fraction: result.learnable_fraction(),
            semantic_elements: content.into_iter().map(|c| c.element).collect(),
            trace,
            classical,
            baseline,
            ledger,
            kpi: Some(kpi),
        });
    }

    let mut ledger = BitLedger::default();
    let mut baseline_total = TransmissionCost::default();
    for s in &sessions {
        ledger += s.ledger;
        baseline_total += s.baseline;
    }
    let (aggregate, dominance, language) = if sem.baseline_only {
        (None, None, None)
    } else {
        let traces: Vec<SessionTrace> = sessions.iter().map(|s| s.trace.clone()).collect();
        let aggregate = KpiRecord::aggregate(&traces, cfg, sem.omega)?;
        (
            Some(aggregate),
            Some(dominance(&sessions, baseline_total.packets)),
            Some(teacher.language.clone()),
        )
    };
    Ok(RunReport {
        scenario: scenario.clone(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        sessions,
        aggregate,
        baseline_total,
        shannon_capacity: shannon_capacity(cfg),
        ledger,
        dominance,
        language,
    })
}

fn dominance(sessions: &[SessionReport], baseline_packets: u64) -> Dominance {
    let semantic_packets: u64 = sessions
        .iter()
        .map(SessionReport::semantic_run_packets)
        .sum();
    let min_fidelity = sessions
        .iter()
        .map(|s| s.trace.fidelity)
        .fold(1.0, f64::min);
    let equal_fidelity = min_fidelity == 1.0;
    let semantic_cheaper = semantic_packets < baseline_packets;
    let statement = format!(
        "semantic run used {semantic_packets} packets against {baseline_packets} for the classical baseline; {} at {} fidelity (minimum session fidelity {min_fidelity})",
        if semantic_cheaper { "fewer" } else { "not fewer" },
        if equal_fidelity { "equal" } else { "lower" },
    );
    Dominance {
        semantic_packets,
        baseline_packets,
        min_fidelity,
        equal_fidelity,
        semantic_cheaper,
        statement,
    }
}
