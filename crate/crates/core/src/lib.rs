//! Semantic communication simulator: exact structural causal models, an
//! MDL-scored semantic language, a learnable/memorizable stream splitter, a
//! packetized classical channel, a teacher/apprentice protocol, semantic KPIs
//! and a reproducible scenario harness.

pub mod bits;
pub mod channel;
pub mod harness;
pub mod kpi;
pub mod mdl;
pub mod protocol;
pub mod scm;
pub mod split;
