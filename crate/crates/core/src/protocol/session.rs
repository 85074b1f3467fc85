//! One teaching session over a lossy channel.

use std::collections::BTreeSet;

use crate::channel::{Channel, ChannelConfig, TransmissionCost};
use crate::mdl::Representation;

use super::apprentice::{data_shower, knowledge_gain, score_fidelity, ApprenticeState};
use super::message::{
    Message, MessageBody, MessageKind, MessageRecord, ANSWER_HEADER_BITS, ANSWER_PROB_BITS,
    QUERY_BITS,
};
use super::teacher::{reverse_mentorship, TeacherState};
use super::{all_cells, ProtocolError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SessionOptions {
    pub shower: bool,
    pub reverse_mentorship: bool,
    /// Per-packet attempt cap for protected messages.
    pub max_attempts: usize,
}

impl Default for SessionOptions {
    fn default() -> Self {
        Self {
            shower: false,
            reverse_mentorship: false,
            max_attempts: 32,
        }
    }
}

/// One element scheduled for a session, with the size of the content it
/// stands for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionContent {
    pub element: String,
    pub content_bits: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionTrace {
    pub session: u32,
    pub reps_sent: u64,
    pub rep_packets: u64,
    /// Raw-data packets, retransmissions included.
    pub nu: u64,
    /// Query packets, retransmissions included.
    pub zeta: u64,
    pub answer_packets: u64,
    pub shower_packets: u64,
    /// Packets spent on content sent classically alongside the session.
    pub classical_packets: u64,
    pub duration_s: f64,
    pub fidelity: f64,
    pub knowledge_gain: usize,
    pub maturity: f64,
    /// Content bits of each semantically delivered element.
    pub element_bits: Vec<u64>,
    pub corrections: u64,
    pub miscorrections: u64,
    pub messages: Vec<MessageRecord>,
}

impl SessionTrace {
    /// A session with no semantic traffic.
    pub fn empty(session: u32) -> Self {
        Self {
            session,
            reps_sent: 0,
            rep_packets: 0,
            nu: 0,
            zeta: 0,
            answer_packets: 0,
            shower_packets: 0,
            classical_packets: 0,
            duration_s: 0.0,
            fidelity: 1.0,
            knowledge_gain: 0,
            maturity: 0.0,
            element_bits: Vec::new(),
            corrections: 0,
            miscorrections: 0,
            messages: Vec::new(),
        }
    }

    pub fn semantic_packets(&self) -> u64 {
        self.rep_packets + self.nu + self.zeta + self.answer_packets + self.shower_packets
    }

    pub fn total_packets(&self) -> u64 {
        self.semantic_packets() + self.classical_packets
    }
}

struct Link<'a> {
    channel: Channel,
    max_attempts: usize,
    trace: &'a mut SessionTrace,
}

impl Link<'_> {
    /// Sends `msg` with retransmission; returns whether it arrived intact.
    fn protected(&mut self, msg: &Message, impact_bits: u64) -> bool {
        let bits = crate::bits::BitString::from_bools(vec![false; msg.payload_bits]);
        let d = self.channel.send_reliable(&bits, self.max_attempts);
        self.record(msg, d.cost, impact_bits);
        d.delivered
    }

    fn record(&mut self, msg: &Message, cost: TransmissionCost, impact_bits: u64) {
        let t = &mut *self.trace;
        match msg.kind {
            MessageKind::Representation => {
                t.reps_sent += 1;
                t.rep_packets += cost.packets;
            }
            MessageKind::Raw => t.nu += cost.packets,
            MessageKind::Query => t.zeta += cost.packets,
            MessageKind::QueryAnswer => t.answer_packets += cost.packets,
            MessageKind::LanguageShower => t.shower_packets += cost.packets,
            MessageKind::Classical => t.classical_packets += cost.packets,
        }
        t.duration_s += cost.seconds;
        t.messages.push(MessageRecord {
            session: msg.session,
            plane: msg.plane(),
            kind: msg.kind,
            element: msg.element.clone().unwrap_or_default(),
            payload_bits: msg.payload_bits,
            packets: cost.packets,
            corrupted: cost.corrupted_packets,
            impact_bits,
        });
    }
}

/// Runs one session: didactics, apprentice queries and answers, then
/// regeneration. Protected messages (showers, raw data, queries, answers and
/// representations of elements not yet fully taught) are retransmitted until
/// clean; other representations go out once and are repaired by the
/// apprentice's error correction.
pub fn run_session(
    teacher: &mut TeacherState,
    apprentice: &mut ApprenticeState,
    cfg: &ChannelConfig,
    content: &[SessionContent],
    session: u32,
    opts: &SessionOptions,
    seed: u64,
) -> Result<SessionTrace, ProtocolError> {
    if content.is_empty() {
        return Err(ProtocolError::EmptyContent);
    }
    let ids: Vec<String> = content.iter().map(|c| c.element.clone()).collect();
    let before = apprentice.clone();
    let messages = teacher.compose_didactics(apprentice.maturity(), &ids, session, opts.shower)?;

    let mut trace = SessionTrace {
        element_bits: content.iter().map(|c| c.content_bits).collect(),
        fidelity: 0.0,
        ..SessionTrace::empty(session)
    };
    let mut link = Link {
        channel: Channel::new(cfg.clone(), seed),
        max_attempts: opts.max_attempts,
        trace: &mut trace,
    };
    let mut miscorrected = BTreeSet::new();

    for msg in &messages {
        let element = msg.element.clone().unwrap_or_default();
        let impact = content
            .iter()
            .find(|c| c.element == element)
            .map_or(0, |c| c.content_bits);
        match &msg.body {
            MessageBody::Shower(library) => {
                if link.protected(msg, 0) {
                    data_shower(library, apprentice);
                    for (id, r) in library.iter() {
                        teacher.mark_taught(all_cells(id, &r.graph));
                    }
                }
            }
            MessageBody::Representation(repr) => {
                let got = if teacher.is_fully_taught(&element) {
                    let sent = repr.encode();
                    let (received, cost) = link.channel.send(&sent);
                    link.record(msg, cost, impact);
                    if cost.corrupted_packets > 0 {
                        let fixed =
                            apprentice.correct_representation(&received, apprentice.recent())?;
                        if fixed == *repr {
                            link.trace.corrections += 1;
                        } else {
                            link.trace.miscorrections += 1;
                            miscorrected.insert(element.clone());
                        }
                        Some(fixed)
                    } else {
                        Some(repr.clone())
                    }
                } else if link.protected(msg, impact) {
                    Some(repr.clone())
                } else {
                    None
                };
                if let Some(r) = got {
                    deliver_representation(apprentice, &element, &r);
                }
            }
            MessageBody::Raw(cells) => {
                if link.protected(msg, 0) {
                    for (c, s) in cells {
                        apprentice.learn_cell(c, *s);
                    }
                    teacher.mark_taught(cells.iter().map(|(c, _)| c.clone()));
                }
            }
            MessageBody::Query(_) | MessageBody::Answer { .. } => {
                unreachable!("not composed by the teacher")
            }
        }
    }

    for q in apprentice.pose_queries(&ids) {
        let query_msg = Message {
            session,
            kind: MessageKind::Query,
            element: Some(q.element.clone()),
            payload_bits: QUERY_BITS,
            body: MessageBody::Query(q.clone()),
        };
        if !link.protected(&query_msg, 0) {
            continue;
        }
        let result = teacher.answer_query(&q).map_err(|e| e.to_string());
        let payload_bits = ANSWER_HEADER_BITS
            + result
                .as_ref()
                .map_or(0, |pmf| pmf.len() * ANSWER_PROB_BITS);
        let answer_msg = Message {
            session,
            kind: MessageKind::QueryAnswer,
            element: Some(q.element.clone()),
            payload_bits,
            body: MessageBody::Answer {
                query: q.clone(),
                result: result.clone(),
            },
        };
        if link.protected(&answer_msg, 0) && apprentice.apply_answer(&q, &result) {
            teacher.mark_taught(q.cell.clone());
        }
    }

    apprentice.sync_language();
    if opts.reverse_mentorship {
        for id in &ids {
            match reverse_mentorship(apprentice, teacher, id) {
                Ok(()) => {
                    let adopted = teacher.language.get(id).cloned().unwrap();
                    apprentice.learned_language.insert(id.clone(), adopted)?;
                }
                Err(ProtocolError::NotSuperior(_) | ProtocolError::NoApprenticeEntry(_)) => {}
                Err(e) => return Err(e),
            }
        }
    }

    let mut fidelity = 0.0;
    for id in &ids {
        if miscorrected.contains(id) {
            continue;
        }
        let truth = teacher
            .element(id)
            .ok_or_else(|| ProtocolError::UnknownElement(id.clone()))?;
        fidelity += match apprentice.regenerate(id) {
            Ok(scm) => score_fidelity(&scm, truth)?,
            Err(ProtocolError::NoStructure(_)) => 0.0,
            Err(e) => return Err(e),
        };
    }
    trace.fidelity = fidelity / ids.len() as f64;
    trace.knowledge_gain = {
        let g = knowledge_gain(&before, apprentice);
        g.cells + g.entries
    };
    trace.maturity = apprentice.maturity();
    Ok(trace)
}

fn deliver_representation(apprentice: &mut ApprenticeState, element: &str, repr: &Representation) {
    apprentice.receive_representation(element, repr);
    apprentice.note_recent(element);
}
