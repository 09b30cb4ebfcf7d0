//! Networked polynomial protocol: newline-delimited JSON over TCP.
//!
//! The verifier opens with `{"hello":{"q":5,"d":1}}`, then sends one
//! [`Message`] per line. The prover answers every line with exactly one
//! line: `{"replies":[...]}`, `{"violation":"..."}` when it cannot follow
//! the instruction, or `{"too_large":{...}}` when its simulator runs out of
//! room. The simulation kernel lives in the prover process.

use std::io::{BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream, ToSocketAddrs};

use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use qpip_core::protocol::poly::{depolarize_payload, drive, LinkReply, PolyVerifier, ProverLink};
use qpip_core::protocol::{run_rngs, Circuit, Kernel, Message, Payload, Prover, ProverContext, RunConfig, StandardProver, Strategy, Transcript};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hello {
    pub q: u32,
    pub d: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Incoming {
    Hello { hello: Hello },
    Message(Message),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum Reply {
    Replies(Vec<Message>),
    Violation(String),
    TooLarge { amps: u64, limit: u64 },
}

fn send_line<T: Serialize, W: Write>(w: &mut W, value: &T) -> std::io::Result<()> {
    let mut line = serde_json::to_vec(value).map_err(std::io::Error::other)?;
    line.push(b'\n');
    w.write_all(&line)?;
    w.flush()
}

/// Verifier side of a connection.
pub struct TcpLink {
    reader: BufReader<TcpStream>,
    writer: TcpStream,
    noise: f64,
    channel_rng: ChaCha20Rng,
}

impl TcpLink {
    pub fn connect<A: ToSocketAddrs>(addr: A, hello: Hello, noise: f64, channel_rng: ChaCha20Rng) -> Result<Self> {
        let writer = TcpStream::connect(addr).map_err(|e| Error::Network(format!("cannot reach prover: {e}")))?;
        writer.set_nodelay(true)?;
        let reader = BufReader::new(writer.try_clone()?);
        let mut link = TcpLink { reader, writer, noise, channel_rng };
        send_line(&mut link.writer, &Incoming::Hello { hello })?;
        match link.read_reply()? {
            Some(Reply::Replies(r)) if r.is_empty() => Ok(link),
            other => Err(Error::Network(format!("unexpected greeting reply {other:?}"))),
        }
    }

    fn read_reply(&mut self) -> Result<Option<Reply>> {
        let mut line = String::new();
        if self.reader.read_line(&mut line)? == 0 {
            return Ok(None);
        }
        Ok(Some(serde_json::from_str(&line)?))
    }
}

impl ProverLink for TcpLink {
    fn exchange(&mut self, msg: &Message) -> qpip_core::Result<LinkReply> {
        let mut sent = msg.clone();
        if let Message::AuthState { payload: Payload::State(p), .. } = &mut sent {
            depolarize_payload(p, self.noise, &mut self.channel_rng);
        }
        if let Err(e) = send_line(&mut self.writer, &Incoming::Message(sent)) {
            return Ok(LinkReply::Violation(format!("connection lost: {e}")));
        }
        Ok(match self.read_reply() {
            Ok(Some(Reply::Replies(r))) => LinkReply::Replies(r),
            Ok(Some(Reply::Violation(v))) => LinkReply::Violation(v),
            Ok(Some(Reply::TooLarge { amps, limit })) => return Err(qpip_core::Error::TooLarge { amps: amps as u128, limit: limit as u128 }),
            Ok(None) => LinkReply::Violation("prover closed the connection".into()),
            Err(e) => LinkReply::Violation(format!("unreadable reply: {e}")),
        })
    }
}

/// One polynomial-protocol run against a prover at `addr`. The verifier
/// and channel streams come from `seed` exactly as in-process.
pub fn run_networked<A: ToSocketAddrs>(addr: A, circuit: &Circuit, config: &RunConfig, seed: u64) -> Result<Transcript> {
    let (vrng, _, crng) = run_rngs(seed);
    let mut verifier = PolyVerifier::new(circuit, config, vrng)?;
    let mut link = TcpLink::connect(addr, Hello { q: circuit.q, d: config.d }, config.noise, crng)?;
    Ok(drive(&mut verifier, &mut link)?)
}

/// Serve one verifier connection with a fresh prover whose randomness is
/// the prover stream of `seed`.
pub fn serve_connection(stream: TcpStream, strategy: &Strategy, seed: u64) -> Result<()> {
    stream.set_nodelay(true)?;
    let mut writer = stream.try_clone()?;
    let reader = BufReader::new(stream);
    let (_, mut rng, _) = run_rngs(seed);
    let mut session: Option<(Kernel, StandardProver)> = None;
    for line in reader.lines() {
        let line = line?;
        let reply = match serde_json::from_str::<Incoming>(&line) {
            Err(e) => Reply::Violation(format!("malformed message: {e}")),
            Ok(Incoming::Hello { hello }) => match (Kernel::new(hello.q), StandardProver::poly(hello.q, hello.d, strategy.clone())) {
                (Ok(k), Ok(p)) => {
                    session = Some((k, p));
                    Reply::Replies(Vec::new())
                }
                (Err(e), _) | (_, Err(e)) => Reply::Violation(e.to_string()),
            },
            Ok(Incoming::Message(msg)) => match session.as_mut() {
                None => Reply::Violation("message before hello".into()),
                Some((kernel, prover)) => {
                    let mut ctx = ProverContext::new(kernel, &mut rng);
                    match prover.handle(&mut ctx, &msg) {
                        Ok(r) => Reply::Replies(r),
                        Err(qpip_core::Error::TooLarge { amps, limit }) => Reply::TooLarge { amps: amps.min(u64::MAX as u128) as u64, limit: limit as u64 },
                        Err(e) => Reply::Violation(e.to_string()),
                    }
                }
            },
        };
        send_line(&mut writer, &reply)?;
    }
    Ok(())
}

/// Accept connections in order; connection `i` uses seed `seed + i`. Stops
/// after `max` connections when given.
pub fn serve(listener: &TcpListener, strategy: &Strategy, seed: u64, max: Option<u64>) -> Result<()> {
    for (i, stream) in (0u64..).zip(listener.incoming()) {
        serve_connection(stream?, strategy, seed.wrapping_add(i))?;
        if max.is_some_and(|m| i + 1 >= m) {
            break;
        }
    }
    Ok(())
}
