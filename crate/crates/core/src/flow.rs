//! Packet records and flow extraction.
//!
//! A flow is the set of packets sharing one unidirectional 5-tuple (source
//! address, destination address, source port, destination port, protocol)
//! inside one tumbling time window. Windows are anchored at the first packet
//! timestamp of the capture, so extraction is independent of wall-clock
//! origin.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// TCP flag bit masks, standard header layout.
pub mod tcp_flags {
    pub const FIN: u8 = 0x01;
    pub const SYN: u8 = 0x02;
    pub const RST: u8 = 0x04;
    pub const PSH: u8 = 0x08;
    pub const ACK: u8 = 0x10;
    pub const URG: u8 = 0x20;
    pub const ECE: u8 = 0x40;
    pub const CWR: u8 = 0x80;
}

/// Layer-4 protocol of a packet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Protocol {
    Tcp,
    Udp,
    Other,
}

impl Protocol {
    /// IANA protocol number (0 for anything outside TCP/UDP).
    pub fn numeric_code(self) -> u8 {
        match self {
            Protocol::Tcp => 6,
            Protocol::Udp => 17,
            Protocol::Other => 0,
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Protocol::Tcp => write!(f, "TCP"),
            Protocol::Udp => write!(f, "UDP"),
            Protocol::Other => write!(f, "OTHER"),
        }
    }
}

/// One captured packet, already reduced to the header fields the feature
/// exporter consumes.
#[derive(Debug, Clone, PartialEq)]
pub struct PacketRecord {
    /// Capture timestamp in seconds; inputs must be non-decreasing.
    pub timestamp: f64,
    pub src_ip: String,
    pub dst_ip: String,
    pub src_port: u16,
    pub dst_port: u16,
    pub protocol: Protocol,
    /// Layer-3 size in bytes; must be positive.
    pub length_bytes: u32,
    /// TCP flag mask, zero for non-TCP packets.
    pub tcp_flags: u8,
    pub ttl: u8,
    /// TCP window size, zero for non-TCP packets.
    pub tcp_window: u32,
}

/// Unidirectional 5-tuple identifying a flow; A→B and B→A are distinct.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FlowKey {
    pub src_ip: String,
    pub dst_ip: String,
    pub src_port: u16,
    pub dst_port: u16,
    pub protocol: Protocol,
}

impl FlowKey {
    pub fn of(packet: &PacketRecord) -> Self {
        FlowKey {
            src_ip: packet.src_ip.clone(),
            dst_ip: packet.dst_ip.clone(),
            src_port: packet.src_port,
            dst_port: packet.dst_port,
            protocol: packet.protocol,
        }
    }
}

impl fmt::Display for FlowKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}->{}:{}/{}",
            self.src_ip, self.src_port, self.dst_ip, self.dst_port, self.protocol
        )
    }
}

/// All packets of one flow key inside one time window.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowAggregate {
    pub key: FlowKey,
    pub window_index: u64,
    /// Window length in seconds.
    pub tw: f64,
    /// Non-empty, in capture order.
    pub packets: Vec<PacketRecord>,
}

impl FlowAggregate {
    /// Stable identifier used in verdict exports.
    pub fn flow_id(&self) -> String {
        alloc::format!("{}@{}", self.key, self.window_index)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FlowError {
    /// Input packets were not sorted by timestamp; carries the offending index.
    NonMonotoneTimestamps { index: usize, prev: f64, next: f64 },
    /// A flow aggregate with no packets was passed to the feature exporter.
    EmptyFlow,
}

impl fmt::Display for FlowError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FlowError::NonMonotoneTimestamps { index, prev, next } => write!(
                f,
                "packet {index} breaks timestamp order ({next} after {prev})"
            ),
            FlowError::EmptyFlow => write!(f, "flow aggregate has no packets"),
        }
    }
}

impl core::error::Error for FlowError {}

/// Groups time-ordered packets into per-(flow key, window) aggregates.
///
/// Windows are tumbling with length `tw`, anchored at the first packet's
/// timestamp. The output is ordered by window index, then by first-seen
/// order of the key within the window. Every input packet lands in exactly
/// one aggregate.
pub fn extract_flows(packets: &[PacketRecord], tw: f64) -> Result<Vec<FlowAggregate>, FlowError> {
    assert!(tw > 0.0, "time window must be positive");
    if packets.is_empty() {
        return Ok(Vec::new());
    }
    for (i, pair) in packets.windows(2).enumerate() {
        if pair[1].timestamp < pair[0].timestamp {
            return Err(FlowError::NonMonotoneTimestamps {
                index: i + 1,
                prev: pair[0].timestamp,
                next: pair[1].timestamp,
            });
        }
    }

    let capture_start = packets[0].timestamp;
    let mut slots: BTreeMap<(u64, FlowKey), usize> = BTreeMap::new();
    let mut flows: Vec<FlowAggregate> = Vec::new();

    // Timestamps are sorted, so window indices are non-decreasing across the
    // scan and push order already matches the required output order.
    for packet in packets {
        let window_index = libm::floor((packet.timestamp - capture_start) / tw) as u64;
        let key = FlowKey::of(packet);
        match slots.get(&(window_index, key.clone())) {
            Some(&slot) => flows[slot].packets.push(packet.clone()),
            None => {
                slots.insert((window_index, key.clone()), flows.len());
                flows.push(FlowAggregate {
                    key,
                    window_index,
                    tw,
                    packets: alloc::vec![packet.clone()],
                });
            }
        }
    }
    Ok(flows)
}
