//! JSON-lines transcripts: a header record, one line per message, then a
//! summary record.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use qpip_core::protocol::{Circuit, Direction, ProtocolKind, ProtocolVerdict, Transcript, TranscriptEntry};

use crate::error::{Error, Result};
use crate::format::circuit_hash;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Header {
    pub seed: u64,
    pub q: u32,
    pub d: usize,
    pub protocol: ProtocolKind,
    pub circuit_hash: String,
}

impl Header {
    pub fn new(seed: u64, circuit: &Circuit, d: usize, protocol: ProtocolKind) -> Self {
        Header { seed, q: circuit.q, d, protocol, circuit_hash: circuit_hash(circuit) }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub verdict: ProtocolVerdict,
    pub output: Option<u32>,
    pub high_water: usize,
    pub abort_reason: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Line {
    Header { header: Header },
    Summary { summary: Summary },
    Entry(TranscriptEntry),
}

pub fn write_transcript<W: Write>(mut w: W, header: &Header, t: &Transcript) -> Result<()> {
    serde_json::to_writer(&mut w, &Line::Header { header: header.clone() })?;
    writeln!(w)?;
    for e in &t.entries {
        serde_json::to_writer(&mut w, e)?;
        writeln!(w)?;
    }
    let summary = Summary { verdict: t.verdict, output: t.output, high_water: t.high_water, abort_reason: t.abort_reason.clone() };
    serde_json::to_writer(&mut w, &Line::Summary { summary })?;
    writeln!(w)?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct TranscriptFile {
    pub header: Header,
    pub entries: Vec<TranscriptEntry>,
    pub summary: Option<Summary>,
}

pub fn read_transcript<R: BufRead>(r: R) -> Result<TranscriptFile> {
    let mut header = None;
    let mut entries = Vec::new();
    let mut summary = None;
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<Line>(&line)? {
            Line::Header { header: h } if i == 0 => header = Some(h),
            Line::Header { .. } => return Err(Error::Format(format!("header record on line {}", i + 1))),
            Line::Summary { summary: s } => summary = Some(s),
            Line::Entry(e) => entries.push(e),
        }
    }
    let header = header.ok_or_else(|| Error::Format("transcript has no header".into()))?;
    Ok(TranscriptFile { header, entries, summary })
}

/// Quantum payloads only in an opening run of verifier-to-prover messages.
pub fn classical_after_round_one(entries: &[TranscriptEntry]) -> bool {
    let first = entries.iter().position(|e| !e.message.carries_quantum()).unwrap_or(entries.len());
    entries[..first].iter().all(|e| e.direction == Direction::VerifierToProver) && entries[first..].iter().all(|e| !e.message.carries_quantum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::fixture;
    use qpip_core::protocol::poly::run_poly_qpip;
    use qpip_core::protocol::{RunConfig, StandardProver, Strategy};

    #[test]
    fn write_then_read() {
        let c = fixture("shift").unwrap();
        let mut p = StandardProver::poly(5, 1, Strategy::Honest).unwrap();
        let t = run_poly_qpip(&c, &mut p, &RunConfig::new(1), 3).unwrap();
        let header = Header::new(3, &c, 1, ProtocolKind::Poly);
        let mut buf = Vec::new();
        write_transcript(&mut buf, &header, &t).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.lines().next().unwrap().starts_with(r#"{"header":{"seed":3,"q":5,"d":1,"protocol":"poly""#));
        assert!(text.contains(r#""kind":"AUTH_STATE""#));
        let back = read_transcript(buf.as_slice()).unwrap();
        assert_eq!(back.header, header);
        assert_eq!(back.entries, t.entries);
        assert_eq!(back.summary.unwrap().verdict, ProtocolVerdict::Accept);
        assert!(classical_after_round_one(&back.entries));
    }

    #[test]
    fn scanner_flags_late_quantum_messages() {
        let c = fixture("shift").unwrap();
        let mut p = StandardProver::poly(5, 1, Strategy::Honest).unwrap();
        let mut t = run_poly_qpip(&c, &mut p, &RunConfig::new(1), 4).unwrap();
        let first = t.entries[0].clone();
        t.entries.push(first);
        assert!(!classical_after_round_one(&t.entries));
        assert!(read_transcript(&b"{\"summary\":null}\n"[..]).is_err());
    }
}
