//! Deterministic synthetic traffic generator.
//!
//! Profiles synthesize per-flow packet sequences (benign mixed TCP/UDP, SYN
//! flood, UDP flood) which then pass through the real flow-extraction and
//! featurization pipeline, so generated rows exercise the same code path as
//! captured traffic. Everything is a pure function of the seed: each flow
//! draws from its own derived stream, so generation order never matters.

use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_distr::{Distribution, LogNormal};

use crate::features::{self, FeatureVector, Label};
use crate::flow::{self, tcp_flags, PacketRecord, Protocol};
use crate::rng;

const FLOW_SALT: u64 = 0xf10_3;
const SHUFFLE_SALT: u64 = 0x5417_f1e;

/// Identifier of the feature schema this generator targets.
pub const SCHEMA_ID: &str = "flow20-v1";

/// How a profile assigns TCP flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlagPattern {
    /// SYN first, ACK/PSH data packets, occasional closing FIN.
    Session,
    /// Every packet carries SYN only.
    SynOnly,
    /// Flagless (non-TCP traffic).
    None,
}

/// Destination address/port selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PortModel {
    /// A handful of well-known service ports across several servers.
    WellKnownServices,
    /// Every flow hammers the same destination host and port.
    SingleTarget(u16),
}

/// Generation parameters for one traffic class.
#[derive(Debug, Clone, PartialEq)]
pub struct TrafficProfile {
    pub name: Label,
    /// Mean packets per second; per-flow rates draw from
    /// `packet_rate · (1 ± rate_spread)`.
    pub packet_rate: f64,
    pub rate_spread: f64,
    /// (mean, std) of layer-3 packet sizes in bytes; std 0 means fixed-size.
    pub packet_size: (f64, f64),
    /// Coefficient of variation of inter-arrival times.
    pub iat_jitter: f64,
    pub flag_pattern: FlagPattern,
    pub port_model: PortModel,
    /// Probability a flow is TCP (the rest are UDP).
    pub tcp_probability: f64,
    /// Fraction of low-activity background flows (idle chatter); the rest
    /// cluster in a busy band. Zero means activity is uniform in the band.
    pub idle_fraction: f64,
    /// Lower edge of the busy activity band (busy levels span this to 1).
    pub busy_floor: f64,
    /// Upper edge of the idle activity band (idle levels span 0 to this).
    pub idle_ceiling: f64,
    /// Probability a data packet carries ACK (Session flows).
    pub ack_probability: f64,
    /// Probability the closing packet carries FIN (Session flows).
    pub fin_probability: f64,
    /// Per-packet probability of a TTL change.
    pub ttl_change_probability: f64,
}

impl TrafficProfile {
    /// Application traffic in the 5–50 packets-per-second band: steady TCP
    /// sessions clustered near the top of the band, plus a small share of
    /// irregular mixed TCP/UDP background flows spread across it.
    pub fn benign() -> Self {
        TrafficProfile {
            name: Label::Benign,
            packet_rate: 27.5,
            rate_spread: 45.0 / 55.0,
            packet_size: (400.0, 60.0),
            iat_jitter: 0.1,
            flag_pattern: FlagPattern::Session,
            port_model: PortModel::WellKnownServices,
            tcp_probability: 0.5,
            idle_fraction: 0.04,
            busy_floor: 0.85,
            idle_ceiling: 1.0,
            ack_probability: 0.0,
            fin_probability: 1.0,
            ttl_change_probability: 0.0,
        }
    }

    /// Small SYN-only packets at 500–2000 packets per second, one target.
    pub fn syn_flood() -> Self {
        TrafficProfile {
            name: Label::SynFlood,
            packet_rate: 1250.0,
            rate_spread: 0.6,
            packet_size: (54.0, 0.0),
            iat_jitter: 0.08,
            flag_pattern: FlagPattern::SynOnly,
            port_model: PortModel::SingleTarget(80),
            tcp_probability: 1.0,
            idle_fraction: 0.0,
            busy_floor: 0.0,
            idle_ceiling: 0.0,
            ack_probability: 0.0,
            fin_probability: 0.0,
            ttl_change_probability: 0.0,
        }
    }

    /// Fixed-size UDP datagrams at 500–2000 packets per second, one target.
    pub fn udp_flood() -> Self {
        TrafficProfile {
            name: Label::UdpFlood,
            packet_rate: 1250.0,
            rate_spread: 0.6,
            packet_size: (512.0, 0.0),
            iat_jitter: 0.08,
            flag_pattern: FlagPattern::None,
            port_model: PortModel::SingleTarget(53),
            tcp_probability: 0.0,
            idle_fraction: 0.0,
            busy_floor: 0.0,
            idle_ceiling: 0.0,
            ack_probability: 0.0,
            fin_probability: 0.0,
            ttl_change_probability: 0.0,
        }
    }

    pub fn for_label(label: Label) -> Option<Self> {
        match label {
            Label::Benign => Some(TrafficProfile::benign()),
            Label::SynFlood => Some(TrafficProfile::syn_flood()),
            Label::UdpFlood => Some(TrafficProfile::udp_flood()),
            Label::Unknown => None,
        }
    }
}

/// Flow counts for one environment tag. The tag is metadata only; profiles
/// do not differ per environment.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub environment: String,
    pub benign: usize,
    pub synflood: usize,
    pub udpflood: usize,
}

/// Blueprint of a synthetic reference dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub entries: Vec<ManifestEntry>,
    pub seed: u64,
    pub tw: f64,
    pub schema: String,
}

impl Default for DatasetManifest {
    /// Desk-scale dataset in roughly 48:66:66 class ratio.
    fn default() -> Self {
        DatasetManifest {
            entries: alloc::vec![ManifestEntry {
                environment: String::from("highway"),
                benign: 2000,
                synflood: 2700,
                udpflood: 2700,
            }],
            seed: 42,
            tw: 1.0,
            schema: String::from(SCHEMA_ID),
        }
    }
}

impl DatasetManifest {
    pub fn total_flows(&self) -> usize {
        self.entries
            .iter()
            .map(|e| e.benign + e.synflood + e.udpflood)
            .sum()
    }
}

fn class_code(label: Label) -> u64 {
    match label {
        Label::Benign => 1,
        Label::SynFlood => 2,
        Label::UdpFlood => 3,
        Label::Unknown => 4,
    }
}

/// Synthesizes one flow's packet sequence inside a single time window.
fn generate_packets(
    profile: &TrafficProfile,
    tw: f64,
    generator: &mut rand_chacha::ChaCha8Rng,
) -> Vec<PacketRecord> {
    // Rates draw from the profile band with bulk near the top, so volume
    // features carry a strong mean component.
    let rate_low = profile.packet_rate * (1.0 - profile.rate_spread);
    let rate_high = profile.packet_rate * (1.0 + profile.rate_spread);
    // One activity level per flow drives rate, span, sizes, and window
    // together. Profiles with an idle fraction are bimodal: most flows sit
    // in a busy band, a few are low-activity background chatter.
    let idle = profile.idle_fraction > 0.0 && generator.random_bool(profile.idle_fraction);
    let bimodal = profile.idle_fraction > 0.0;
    let level = |generator: &mut rand_chacha::ChaCha8Rng| -> f64 {
        if !bimodal {
            generator.random_range(0.0..1.0)
        } else if idle && generator.random_bool(0.4) {
            // Irregular flows deviate on a random subset of their
            // characteristics, anywhere below the busy band.
            generator.random_range(0.0..profile.idle_ceiling * profile.busy_floor)
        } else {
            generator.random_range(profile.busy_floor..1.0)
        }
    };
    let rate = rate_low + (rate_high - rate_low) * level(generator);
    let count = (libm::round(rate * tw) as usize).max(1);
    // Regular (busy) flows in bimodal profiles are TCP sessions; protocol
    // only varies among the irregular background flows.
    let is_tcp = if bimodal {
        !idle || generator.random_bool(profile.tcp_probability)
    } else {
        generator.random_bool(profile.tcp_probability)
    };
    let protocol = if is_tcp { Protocol::Tcp } else { Protocol::Udp };

    let (src_ip, dst_ip, src_port, dst_port) = match profile.port_model {
        PortModel::WellKnownServices => {
            let servers = ["198.51.100.7", "198.51.100.21", "203.0.113.5", "203.0.113.40"];
            let tcp_ports = [80u16, 443, 8080, 22];
            let udp_ports = [53u16, 123, 443];
            let dport = if is_tcp {
                *tcp_ports.choose(generator).expect("non-empty")
            } else {
                *udp_ports.choose(generator).expect("non-empty")
            };
            (
                alloc::format!("192.168.0.{}", generator.random_range(2..250u16)),
                String::from(*servers.choose(generator).expect("non-empty")),
                generator.random_range(1024..65000u16),
                dport,
            )
        }
        PortModel::SingleTarget(port) => (
            alloc::format!(
                "172.16.{}.{}",
                generator.random_range(0..255u16),
                generator.random_range(2..255u16)
            ),
            String::from("10.10.0.1"),
            generator.random_range(1024..65000u16),
            port,
        ),
    };

    // Inter-arrival gaps: lognormal multipliers with the profile's
    // coefficient of variation, rescaled so the flow spans most of the
    // window (keeps every generated flow inside a single window).
    let sigma_sq = libm::log(1.0 + profile.iat_jitter * profile.iat_jitter);
    let log_normal =
        LogNormal::new(-sigma_sq / 2.0, libm::sqrt(sigma_sq)).expect("valid lognormal");
    let start = generator.random_range(0.0..0.01 * tw);
    let target_span = (0.55 + 0.42 * level(generator)) * tw;
    let mut timestamps = Vec::with_capacity(count);
    let mut t = start;
    timestamps.push(t);
    for _ in 1..count {
        t += log_normal.sample(generator);
        timestamps.push(t);
    }
    let span = t - start;
    if span > 0.0 {
        let scale = target_span / span;
        for ts in timestamps.iter_mut() {
            *ts = start + (*ts - start) * scale;
        }
    }

    let (size_mean, size_std) = profile.packet_size;
    let size_dist = if size_std > 0.0 {
        let flow_mean = size_mean * (0.4 + 1.2 * level(generator));
        let cv = size_std / size_mean;
        let s2 = libm::log(1.0 + cv * cv);
        Some(LogNormal::new(libm::log(flow_mean) - s2 / 2.0, libm::sqrt(s2)).expect("valid lognormal"))
    } else {
        None
    };

    let ttl_base: u8 = if profile.flag_pattern == FlagPattern::Session {
        *[64u8, 128].choose(generator).expect("non-empty")
    } else {
        64
    };
    let mut ttl = ttl_base;
    let tcp_window: u32 = if !is_tcp {
        0
    } else if profile.flag_pattern == FlagPattern::SynOnly {
        1024
    } else {
        libm::round(65535.0 * generator.random_range(0.3..1.0)) as u32
    };

    timestamps
        .iter()
        .enumerate()
        .map(|(i, &timestamp)| {
            let length_bytes = match size_dist {
                Some(dist) => libm::round(dist.sample(generator).clamp(40.0, 1514.0)) as u32,
                None => size_mean as u32,
            };
            let flags = if !is_tcp {
                0
            } else {
                match profile.flag_pattern {
                    FlagPattern::SynOnly => tcp_flags::SYN,
                    FlagPattern::None => 0,
                    FlagPattern::Session => {
                        if i == 0 {
                            tcp_flags::SYN
                        } else {
                            let mut f = tcp_flags::PSH;
                            if generator.random_bool(profile.ack_probability) {
                                f |= tcp_flags::ACK;
                            }
                            if i + 1 == count && generator.random_bool(profile.fin_probability) {
                                f |= tcp_flags::FIN;
                            }
                            f
                        }
                    }
                }
            };
            if profile.ttl_change_probability > 0.0
                && generator.random_bool(profile.ttl_change_probability)
            {
                ttl = if ttl == ttl_base { ttl_base.wrapping_sub(1) } else { ttl_base };
            }
            PacketRecord {
                timestamp,
                src_ip: src_ip.clone(),
                dst_ip: dst_ip.clone(),
                src_port,
                dst_port,
                protocol,
                length_bytes,
                tcp_flags: flags,
                ttl,
                tcp_window,
            }
        })
        .collect()
}

/// Generates `n_flows` labeled feature rows for one profile. Each flow runs
/// through [`flow::extract_flows`] and [`features::featurize`].
pub fn generate_flows(
    profile: &TrafficProfile,
    n_flows: usize,
    seed: u64,
    tw: f64,
) -> Vec<FeatureVector> {
    assert!(n_flows >= 1, "need at least one flow");
    assert!(tw > 0.0, "time window must be positive");
    (0..n_flows)
        .map(|flow_idx| {
            let mut generator = rng::seeded_rng(rng::derive_seed(
                seed,
                flow_idx as u64,
                FLOW_SALT ^ class_code(profile.name),
            ));
            let packets = generate_packets(profile, tw, &mut generator);
            let aggregates = flow::extract_flows(&packets, tw).expect("generated packets are sorted");
            debug_assert_eq!(aggregates.len(), 1, "flow must fit one window");
            let mut row = features::featurize(&aggregates[0]).expect("non-empty flow");
            row.label = profile.name;
            row.flow_id = alloc::format!("{}-{flow_idx}", profile.name.as_str());
            row
        })
        .collect()
}

/// Generates the manifest's classes and shuffles them with the manifest seed.
pub fn build_reference_dataset(manifest: &DatasetManifest) -> Vec<FeatureVector> {
    let mut rows = Vec::with_capacity(manifest.total_flows());
    for (entry_idx, entry) in manifest.entries.iter().enumerate() {
        let classes = [
            (Label::Benign, entry.benign),
            (Label::SynFlood, entry.synflood),
            (Label::UdpFlood, entry.udpflood),
        ];
        for (label, count) in classes {
            if count == 0 {
                continue;
            }
            let profile = TrafficProfile::for_label(label).expect("generatable class");
            let seed = rng::derive_seed(manifest.seed, entry_idx as u64, class_code(label));
            let mut generated = generate_flows(&profile, count, seed, manifest.tw);
            if manifest.entries.len() > 1 {
                for row in generated.iter_mut() {
                    row.flow_id = alloc::format!("{}-{}", entry.environment, row.flow_id);
                }
            }
            rows.extend(generated);
        }
    }
    use rand::seq::SliceRandom;
    rows.shuffle(&mut rng::seeded_rng(rng::derive_seed(
        manifest.seed,
        SHUFFLE_SALT,
        0,
    )));
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FEATURE_NAMES;

    fn feature(row: &FeatureVector, name: &str) -> f64 {
        let idx = FEATURE_NAMES.iter().position(|n| *n == name).unwrap();
        row.values[idx]
    }

    #[test]
    fn syn_flood_flows_are_syn_dominated() {
        let rows = generate_flows(&TrafficProfile::syn_flood(), 50, 7, 1.0);
        for row in &rows {
            assert!(feature(row, "synCount") >= 1.0);
            assert_eq!(feature(row, "tcpFlags"), tcp_flags::SYN as f64);
            assert_eq!(feature(row, "l4Proto"), 6.0);
            assert_eq!(row.label, Label::SynFlood);
        }
    }

    #[test]
    fn udp_flood_flows_are_flagless_udp() {
        let rows = generate_flows(&TrafficProfile::udp_flood(), 50, 7, 1.0);
        for row in &rows {
            assert_eq!(feature(row, "l4Proto"), 17.0);
            assert_eq!(feature(row, "tcpFlags"), 0.0);
            assert_eq!(feature(row, "synCount"), 0.0);
            assert_eq!(feature(row, "tcpInitWinSz"), 0.0);
        }
    }

    #[test]
    fn generation_is_deterministic_per_seed() {
        let a = generate_flows(&TrafficProfile::benign(), 30, 11, 1.0);
        let b = generate_flows(&TrafficProfile::benign(), 30, 11, 1.0);
        assert_eq!(a, b);
        let c = generate_flows(&TrafficProfile::benign(), 30, 12, 1.0);
        assert_ne!(a, c);
    }

    #[test]
    fn generated_rows_are_finite_and_full_dimension() {
        for profile in [
            TrafficProfile::benign(),
            TrafficProfile::syn_flood(),
            TrafficProfile::udp_flood(),
        ] {
            for row in generate_flows(&profile, 40, 3, 1.0) {
                assert_eq!(row.values.len(), FEATURE_NAMES.len());
                assert!(row.values.iter().all(|v| v.is_finite()));
            }
        }
    }

    #[test]
    fn default_manifest_counts_and_shuffle() {
        let manifest = DatasetManifest {
            entries: alloc::vec![ManifestEntry {
                environment: String::from("highway"),
                benign: 20,
                synflood: 27,
                udpflood: 27,
            }],
            ..DatasetManifest::default()
        };
        let rows = build_reference_dataset(&manifest);
        assert_eq!(rows.len(), 74);
        let benign = rows.iter().filter(|r| r.label == Label::Benign).count();
        let syn = rows.iter().filter(|r| r.label == Label::SynFlood).count();
        let udp = rows.iter().filter(|r| r.label == Label::UdpFlood).count();
        assert_eq!((benign, syn, udp), (20, 27, 27));
        // Shuffled: the classes are interleaved rather than contiguous.
        let first_attack = rows.iter().position(|r| r.label.is_attack()).unwrap();
        assert!(first_attack < 20);
    }

    #[test]
    fn zero_count_class_is_absent() {
        let manifest = DatasetManifest {
            entries: alloc::vec![ManifestEntry {
                environment: String::from("rural"),
                benign: 10,
                synflood: 0,
                udpflood: 5,
            }],
            ..DatasetManifest::default()
        };
        let rows = build_reference_dataset(&manifest);
        assert_eq!(rows.len(), 15);
        assert!(rows.iter().all(|r| r.label != Label::SynFlood));
    }

    #[test]
    fn seed_changes_order_but_not_counts() {
        let mut a = DatasetManifest::default();
        a.entries[0].benign = 15;
        a.entries[0].synflood = 15;
        a.entries[0].udpflood = 15;
        let mut b = a.clone();
        b.seed = 43;
        let rows_a = build_reference_dataset(&a);
        let rows_b = build_reference_dataset(&b);
        assert_eq!(rows_a.len(), rows_b.len());
        assert_ne!(rows_a, rows_b);
    }

    #[test]
    fn benign_and_attack_rates_are_separated() {
        let pktps_idx = FEATURE_NAMES.iter().position(|n| *n == "pktps").unwrap();
        let collect = |profile: &TrafficProfile| -> alloc::vec::Vec<f64> {
            generate_flows(profile, 400, 5, 1.0)
                .iter()
                .map(|r| r.values[pktps_idx])
                .collect()
        };
        let benign = collect(&TrafficProfile::benign());
        let syn = collect(&TrafficProfile::syn_flood());
        let gap = crate::stats::mean(&syn) - crate::stats::mean(&benign);
        assert!(gap >= 5.0 * crate::stats::population_std(&benign));
    }
}
