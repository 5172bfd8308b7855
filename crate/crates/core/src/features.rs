//! Per-flow feature vectors.
//!
//! [`featurize`] reduces one [`FlowAggregate`] to a fixed 20-feature row
//! computed from packet headers only: counts, byte volumes, packet-size and
//! inter-arrival statistics, rates, and TCP flag aggregates. Every statistic
//! is defined for single-packet flows (duration and IAT statistics collapse
//! to zero; rates fall back to the window length as denominator).

use alloc::string::String;
use alloc::vec::Vec;

use crate::flow::{tcp_flags, FlowAggregate, FlowError};
use crate::stats;

/// Names of the exported features, in row order.
pub const FEATURE_NAMES: [&str; 20] = [
    "numPktsSnt",
    "numByteSnt",
    "minPktSz",
    "maxPktSz",
    "avePktSize",
    "stdPktSize",
    "duration",
    "minIAT",
    "maxIAT",
    "aveIAT",
    "stdIAT",
    "pktps",
    "bytps",
    "l4Proto",
    "tcpFlags",
    "synCount",
    "ackCount",
    "rstFinCount",
    "ipTTLChg",
    "tcpInitWinSz",
];

/// Dimension of the raw feature row.
pub const FEATURE_DIM: usize = FEATURE_NAMES.len();

/// Ground-truth class of a flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Benign,
    SynFlood,
    UdpFlood,
    Unknown,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Benign => "benign",
            Label::SynFlood => "synflood",
            Label::UdpFlood => "udpflood",
            Label::Unknown => "unknown",
        }
    }

    pub fn parse(s: &str) -> Option<Label> {
        match s {
            "benign" => Some(Label::Benign),
            "synflood" => Some(Label::SynFlood),
            "udpflood" => Some(Label::UdpFlood),
            "unknown" => Some(Label::Unknown),
            _ => None,
        }
    }

    /// Attack classes form the positive class for detection metrics.
    pub fn is_attack(self) -> bool {
        matches!(self, Label::SynFlood | Label::UdpFlood)
    }
}

/// One flow's numeric feature row plus its label and origin.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub label: Label,
    pub flow_id: String,
}

/// Computes the fixed 20-feature row for one flow aggregate.
pub fn featurize(flow: &FlowAggregate) -> Result<FeatureVector, FlowError> {
    let packets = &flow.packets;
    if packets.is_empty() {
        return Err(FlowError::EmptyFlow);
    }

    let n = packets.len();
    let sizes: Vec<f64> = packets.iter().map(|p| p.length_bytes as f64).collect();
    let num_bytes: f64 = sizes.iter().sum();
    let min_size = sizes.iter().cloned().fold(f64::INFINITY, f64::min);
    let max_size = sizes.iter().cloned().fold(f64::NEG_INFINITY, f64::max);

    let iats: Vec<f64> = packets
        .windows(2)
        .map(|pair| pair[1].timestamp - pair[0].timestamp)
        .collect();
    let duration = packets[n - 1].timestamp - packets[0].timestamp;
    let (min_iat, max_iat) = if iats.is_empty() {
        (0.0, 0.0)
    } else {
        (
            iats.iter().cloned().fold(f64::INFINITY, f64::min),
            iats.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        )
    };

    // Single-packet flows have zero duration; rate features fall back to the
    // window length so they stay finite.
    let rate_denominator = if duration > 0.0 { duration } else { flow.tw };

    let mut flag_union: u8 = 0;
    let mut syn_count = 0u32;
    let mut ack_count = 0u32;
    let mut rst_fin_count = 0u32;
    for p in packets {
        flag_union |= p.tcp_flags;
        if p.tcp_flags & tcp_flags::SYN != 0 {
            syn_count += 1;
        }
        if p.tcp_flags & tcp_flags::ACK != 0 {
            ack_count += 1;
        }
        if p.tcp_flags & (tcp_flags::RST | tcp_flags::FIN) != 0 {
            rst_fin_count += 1;
        }
    }

    let ttl_changes = packets
        .windows(2)
        .filter(|pair| pair[0].ttl != pair[1].ttl)
        .count();

    let values = alloc::vec![
        n as f64,
        num_bytes,
        min_size,
        max_size,
        stats::mean(&sizes),
        stats::population_std(&sizes),
        duration,
        min_iat,
        max_iat,
        stats::mean(&iats),
        stats::population_std(&iats),
        n as f64 / rate_denominator,
        num_bytes / rate_denominator,
        flow.key.protocol.numeric_code() as f64,
        flag_union as f64,
        syn_count as f64,
        ack_count as f64,
        rst_fin_count as f64,
        ttl_changes as f64,
        packets[0].tcp_window as f64,
    ];
    debug_assert_eq!(values.len(), FEATURE_DIM);

    Ok(FeatureVector {
        values,
        label: Label::Unknown,
        flow_id: flow.flow_id(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{FlowKey, PacketRecord, Protocol};
    use alloc::string::ToString;
    use alloc::vec;

    fn aggregate(protocol: Protocol, packets: Vec<PacketRecord>) -> FlowAggregate {
        let packets: Vec<PacketRecord> = packets
            .into_iter()
            .map(|mut p| {
                p.protocol = protocol;
                p
            })
            .collect();
        FlowAggregate {
            key: FlowKey::of(&packets[0]),
            window_index: 0,
            tw: 1.0,
            packets,
        }
    }

    fn packet(ts: f64, len: u32, flags: u8) -> PacketRecord {
        PacketRecord {
            timestamp: ts,
            src_ip: "10.0.0.1".to_string(),
            dst_ip: "10.0.0.2".to_string(),
            src_port: 4242,
            dst_port: 80,
            protocol: Protocol::Tcp,
            length_bytes: len,
            tcp_flags: flags,
            ttl: 64,
            tcp_window: 8192,
        }
    }

    fn by_name(row: &FeatureVector, name: &str) -> f64 {
        let idx = FEATURE_NAMES.iter().position(|n| *n == name).unwrap();
        row.values[idx]
    }

    #[test]
    fn single_udp_packet_degenerate_flow() {
        let mut p = packet(0.0, 100, 0);
        p.tcp_window = 0;
        let row = featurize(&aggregate(Protocol::Udp, vec![p])).unwrap();
        assert_eq!(by_name(&row, "numPktsSnt"), 1.0);
        assert_eq!(by_name(&row, "numByteSnt"), 100.0);
        assert_eq!(by_name(&row, "avePktSize"), 100.0);
        assert_eq!(by_name(&row, "stdPktSize"), 0.0);
        assert_eq!(by_name(&row, "duration"), 0.0);
        assert_eq!(by_name(&row, "minIAT"), 0.0);
        assert_eq!(by_name(&row, "aveIAT"), 0.0);
        assert_eq!(by_name(&row, "stdIAT"), 0.0);
        assert_eq!(by_name(&row, "pktps"), 1.0);
        assert_eq!(by_name(&row, "bytps"), 100.0);
        assert_eq!(by_name(&row, "tcpFlags"), 0.0);
        assert_eq!(by_name(&row, "l4Proto"), 17.0);
        assert_eq!(by_name(&row, "tcpInitWinSz"), 0.0);
    }

    #[test]
    fn iat_statistics_hand_arithmetic() {
        // IATs {0.1, 0.2}: mean 0.15, population std 0.05.
        let packets = vec![packet(0.0, 60, 0), packet(0.1, 60, 0), packet(0.3, 60, 0)];
        let row = featurize(&aggregate(Protocol::Tcp, packets)).unwrap();
        assert!((by_name(&row, "minIAT") - 0.1).abs() < 1e-12);
        assert!((by_name(&row, "maxIAT") - 0.2).abs() < 1e-12);
        assert!((by_name(&row, "aveIAT") - 0.15).abs() < 1e-12);
        assert!((by_name(&row, "stdIAT") - 0.05).abs() < 1e-12);
        assert!((by_name(&row, "duration") - 0.3).abs() < 1e-12);
        assert_eq!(by_name(&row, "avePktSize"), 60.0);
        assert_eq!(by_name(&row, "stdPktSize"), 0.0);
    }

    #[test]
    fn flag_union_and_counts() {
        let packets = vec![
            packet(0.0, 60, tcp_flags::SYN),
            packet(0.1, 60, tcp_flags::SYN | tcp_flags::ACK),
        ];
        let row = featurize(&aggregate(Protocol::Tcp, packets)).unwrap();
        assert_eq!(by_name(&row, "tcpFlags"), (tcp_flags::SYN | tcp_flags::ACK) as f64);
        assert_eq!(by_name(&row, "synCount"), 2.0);
        assert_eq!(by_name(&row, "ackCount"), 1.0);
        assert_eq!(by_name(&row, "rstFinCount"), 0.0);
    }

    #[test]
    fn ttl_change_count() {
        let mut a = packet(0.0, 60, 0);
        let mut b = packet(0.1, 60, 0);
        let mut c = packet(0.2, 60, 0);
        a.ttl = 64;
        b.ttl = 63;
        c.ttl = 63;
        let row = featurize(&aggregate(Protocol::Tcp, vec![a, b, c])).unwrap();
        assert_eq!(by_name(&row, "ipTTLChg"), 1.0);
    }

    #[test]
    fn empty_flow_is_an_error() {
        let agg = FlowAggregate {
            key: FlowKey::of(&packet(0.0, 60, 0)),
            window_index: 0,
            tw: 1.0,
            packets: vec![],
        };
        assert_eq!(featurize(&agg), Err(FlowError::EmptyFlow));
    }

    #[test]
    fn label_round_trip() {
        for label in [Label::Benign, Label::SynFlood, Label::UdpFlood, Label::Unknown] {
            assert_eq!(Label::parse(label.as_str()), Some(label));
        }
        assert_eq!(Label::parse("slowloris"), None);
    }
}
