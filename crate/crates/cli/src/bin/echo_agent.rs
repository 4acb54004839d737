//! Reference external agent: answers every `observe` with a fixed order on
//! each channel. `--misbehave` makes it break the protocol in one way, for
//! negative tests.

use std::collections::BTreeMap;
use std::io::{self, BufRead, Write};

use clap::{Parser, ValueEnum};
use invsim::agents::protocol::{Act, Message, Ready, PROTOCOL_VERSION};

#[derive(Parser)]
#[command(name = "echo-agent", about = "Protocol test agent")]
struct Args {
    /// Quantity ordered on every channel.
    #[arg(long, default_value_t = 0)]
    order: i64,
    #[arg(long, value_enum)]
    misbehave: Option<Fault>,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Fault {
    MalformedJson,
    MissingOrders,
    NegativeOrder,
    UnknownChannel,
    WrongPeriod,
    WrongType,
    Silent,
    Close,
    Version,
}

fn main() -> io::Result<()> {
    let args = Args::parse();
    let stdin = io::stdin();
    let mut out = io::stdout().lock();
    for line in stdin.lock().lines() {
        let line = line?;
        let msg = match Message::decode(&line) {
            Ok(m) => m,
            Err(e) => {
                eprintln!("echo-agent: {e}");
                return Ok(());
            }
        };
        let reply = match msg {
            Message::Hello(_) => {
                let version = if args.misbehave == Some(Fault::Version) { PROTOCOL_VERSION + 1 } else { PROTOCOL_VERSION };
                Message::Ready(Ready { protocol_version: Some(version), agent: Some("echo-agent".into()) }).encode()
            }
            Message::Observe { period, body } => {
                let orders: BTreeMap<String, i64> =
                    body.observation.channels.iter().map(|c| (c.clone(), args.order)).collect();
                let act = |period: u32, orders: BTreeMap<String, i64>| Message::Act { period, body: Act { orders } }.encode();
                match args.misbehave {
                    Some(Fault::MalformedJson) => "{\"type\": \"act\", ".to_string(),
                    Some(Fault::MissingOrders) => format!(r#"{{"type":"act","period":{period},"payload":{{}}}}"#),
                    Some(Fault::NegativeOrder) => act(period, orders.into_keys().map(|c| (c, -1)).collect()),
                    Some(Fault::UnknownChannel) => act(period, BTreeMap::from([("nowhere".to_string(), 1)])),
                    Some(Fault::WrongPeriod) => act(period + 1, orders),
                    Some(Fault::WrongType) => Message::Ready(Ready::default()).encode(),
                    Some(Fault::Silent) => continue,
                    Some(Fault::Close) => return Ok(()),
                    _ => act(period, orders),
                }
            }
            Message::End { .. } => return Ok(()),
            Message::Ready(_) | Message::Act { .. } => continue,
        };
        writeln!(out, "{reply}")?;
        out.flush()?;
    }
    Ok(())
}
