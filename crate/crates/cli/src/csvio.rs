//! CSV readers and writers for packet records, feature rows, verdicts,
//! telemetry, and report tables.
//!
//! Headers are fixed and matched exactly; they also accept externally
//! produced files (e.g. mapped flow-exporter output) as long as the header
//! matches. Error positions count data rows from 1, columns from 1.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use fedids_core::eval::{AttackReport, ComparisonReport, SweepCell};
use fedids_core::features::{FeatureVector, Label, FEATURE_NAMES};
use fedids_core::fedavg::RoundTelemetry;
use fedids_core::flow::{PacketRecord, Protocol};
use fedids_core::metrics::EvalReport;
use fedids_core::detector::Verdict;

use crate::error::{CliError, CliResult};

pub const PACKET_HEADER: [&str; 10] = [
    "timestamp",
    "src_ip",
    "dst_ip",
    "src_port",
    "dst_port",
    "protocol",
    "length",
    "tcp_flags",
    "ttl",
    "tcp_window",
];

fn open_reader(path: &PathBuf) -> CliResult<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| CliError::io(path, "open", e))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(file))
}

fn check_header(path: &PathBuf, expected: &[&str], record: Option<&csv::StringRecord>) -> CliResult<()> {
    let record = record.ok_or_else(|| {
        CliError::validation(format!("{}: file is empty, expected a header row", path.display()))
    })?;
    let found: Vec<&str> = record.iter().map(str::trim).collect();
    if found.len() != expected.len() {
        return Err(CliError::validation(format!(
            "{}: malformed header: expected {} columns, found {}",
            path.display(),
            expected.len(),
            found.len()
        )));
    }
    for (position, (want, got)) in expected.iter().zip(&found).enumerate() {
        if want != got {
            return Err(CliError::validation(format!(
                "{}: malformed header: expected column `{}` at position {}, found `{}`",
                path.display(),
                want,
                position + 1,
                got
            )));
        }
    }
    Ok(())
}

fn cell<'a>(record: &'a csv::StringRecord, row: usize, column: usize, name: &str) -> CliResult<&'a str> {
    record.get(column).map(str::trim).ok_or_else(|| {
        CliError::validation(format!(
            "data row {row}: missing column {} ({name})",
            column + 1
        ))
    })
}

fn parse_cell<T: std::str::FromStr>(
    record: &csv::StringRecord,
    row: usize,
    column: usize,
    name: &str,
) -> CliResult<T> {
    let raw = cell(record, row, column, name)?;
    raw.parse().map_err(|_| {
        CliError::validation(format!(
            "non-numeric cell at data row {row}, column {} ({name}): `{raw}`",
            column + 1
        ))
    })
}

/// Reads a packet-record CSV, validating the header and every field range.
pub fn read_packets(path: &PathBuf) -> CliResult<Vec<PacketRecord>> {
    let mut reader = open_reader(path)?;
    let mut records = reader.records();
    let header = records
        .next()
        .transpose()
        .map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
    check_header(path, &PACKET_HEADER, header.as_ref())?;

    let mut packets = Vec::new();
    for (idx, record) in records.enumerate() {
        let record = record.map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
        let row = idx + 1;
        let protocol = match cell(&record, row, 5, "protocol")? {
            "TCP" => Protocol::Tcp,
            "UDP" => Protocol::Udp,
            "OTHER" => Protocol::Other,
            other => {
                return Err(CliError::validation(format!(
                    "data row {row}: unknown protocol `{other}` (expected TCP, UDP, or OTHER)"
                )))
            }
        };
        let packet = PacketRecord {
            timestamp: parse_cell(&record, row, 0, "timestamp")?,
            src_ip: cell(&record, row, 1, "src_ip")?.to_string(),
            dst_ip: cell(&record, row, 2, "dst_ip")?.to_string(),
            src_port: parse_cell(&record, row, 3, "src_port")?,
            dst_port: parse_cell(&record, row, 4, "dst_port")?,
            protocol,
            length_bytes: parse_cell(&record, row, 6, "length")?,
            tcp_flags: parse_cell(&record, row, 7, "tcp_flags")?,
            ttl: parse_cell(&record, row, 8, "ttl")?,
            tcp_window: parse_cell(&record, row, 9, "tcp_window")?,
        };
        if packet.length_bytes == 0 {
            return Err(CliError::validation(format!(
                "data row {row}: length must be positive"
            )));
        }
        if packet.protocol == Protocol::Other && (packet.src_port != 0 || packet.dst_port != 0) {
            return Err(CliError::validation(format!(
                "data row {row}: ports must be 0 for protocol OTHER"
            )));
        }
        if packet.protocol != Protocol::Tcp && (packet.tcp_flags != 0 || packet.tcp_window != 0) {
            return Err(CliError::validation(format!(
                "data row {row}: tcp_flags and tcp_window must be 0 for non-TCP packets"
            )));
        }
        packets.push(packet);
    }
    Ok(packets)
}

pub fn write_packets(path: &PathBuf, packets: &[PacketRecord]) -> CliResult<()> {
    let mut out = create_writer(path)?;
    writeln!(out, "{}", PACKET_HEADER.join(",")).map_err(|e| CliError::io(path, "write", e))?;
    for p in packets {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            p.timestamp,
            p.src_ip,
            p.dst_ip,
            p.src_port,
            p.dst_port,
            p.protocol,
            p.length_bytes,
            p.tcp_flags,
            p.ttl,
            p.tcp_window
        )
        .map_err(|e| CliError::io(path, "write", e))?;
    }
    out.flush().map_err(|e| CliError::io(path, "write", e))
}

/// Reads a feature CSV (the 20 schema columns plus `label`). Loaded rows get
/// positional flow ids `row1`, `row2`, ...
pub fn read_features(path: &PathBuf) -> CliResult<Vec<FeatureVector>> {
    let expected: Vec<&str> = FEATURE_NAMES.iter().copied().chain(["label"]).collect();
    let mut reader = open_reader(path)?;
    let mut records = reader.records();
    let header = records
        .next()
        .transpose()
        .map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
    check_header(path, &expected, header.as_ref())?;

    let mut rows = Vec::new();
    for (idx, record) in records.enumerate() {
        let record = record.map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
        let row = idx + 1;
        let mut values = Vec::with_capacity(FEATURE_NAMES.len());
        for (column, name) in FEATURE_NAMES.iter().enumerate() {
            let value: f64 = parse_cell(&record, row, column, name)?;
            if !value.is_finite() {
                return Err(CliError::validation(format!(
                    "data row {row}, column {} ({name}): value must be finite",
                    column + 1
                )));
            }
            values.push(value);
        }
        let label_raw = cell(&record, row, FEATURE_NAMES.len(), "label")?;
        let label = Label::parse(label_raw).ok_or_else(|| {
            CliError::validation(format!(
                "data row {row}: unknown label `{label_raw}` (expected benign, synflood, udpflood, or unknown)"
            ))
        })?;
        rows.push(FeatureVector {
            values,
            label,
            flow_id: format!("row{row}"),
        });
    }
    Ok(rows)
}

pub fn write_features(path: &PathBuf, rows: &[FeatureVector]) -> CliResult<()> {
    let mut out = create_writer(path)?;
    let header: Vec<&str> = FEATURE_NAMES.iter().copied().chain(["label"]).collect();
    writeln!(out, "{}", header.join(",")).map_err(|e| CliError::io(path, "write", e))?;
    for row in rows {
        let mut line = String::new();
        for v in &row.values {
            // Shortest round-trip representation: parses back bit-exactly.
            line.push_str(&format!("{v}"));
            line.push(',');
        }
        line.push_str(row.label.as_str());
        writeln!(out, "{line}").map_err(|e| CliError::io(path, "write", e))?;
    }
    out.flush().map_err(|e| CliError::io(path, "write", e))
}

pub fn write_verdicts(path: &PathBuf, verdicts: &[Verdict]) -> CliResult<()> {
    let mut out = create_writer(path)?;
    writeln!(out, "flow_id,re,label").map_err(|e| CliError::io(path, "write", e))?;
    for v in verdicts {
        writeln!(out, "{},{},{}", v.flow_id, v.re, v.label.as_str())
            .map_err(|e| CliError::io(path, "write", e))?;
    }
    out.flush().map_err(|e| CliError::io(path, "write", e))
}

pub fn write_telemetry(path: &PathBuf, telemetry: &[RoundTelemetry]) -> CliResult<()> {
    let mut out = create_writer(path)?;
    writeln!(out, "round,loss,seconds").map_err(|e| CliError::io(path, "write", e))?;
    for t in telemetry {
        writeln!(out, "{},{},{:.3}", t.round, t.loss, t.seconds)
            .map_err(|e| CliError::io(path, "write", e))?;
    }
    out.flush().map_err(|e| CliError::io(path, "write", e))
}

fn metric(value: Option<f64>) -> String {
    match value {
        Some(v) => format!("{v:.6}"),
        None => "NA".to_string(),
    }
}

fn report_fields(report: &EvalReport) -> String {
    format!(
        "{},{},{},{},{},{},{}",
        metric(report.accuracy),
        metric(report.f1),
        metric(report.fpr),
        report.counts.tp,
        report.counts.tn,
        report.counts.fp,
        report.counts.fn_
    )
}

pub fn write_eval_report(path: &PathBuf, report: &EvalReport) -> CliResult<()> {
    let mut out = create_writer(path)?;
    writeln!(out, "accuracy,f1,fpr,tp,tn,fp,fn,seconds").map_err(|e| CliError::io(path, "write", e))?;
    writeln!(out, "{},{:.3}", report_fields(report), report.wall_time_seconds)
        .map_err(|e| CliError::io(path, "write", e))?;
    out.flush().map_err(|e| CliError::io(path, "write", e))
}

/// Table-shaped sweep output: one row per client count.
pub fn write_sweep_report(path: &PathBuf, cells: &[SweepCell]) -> CliResult<()> {
    let mut out = create_writer(path)?;
    writeln!(out, "k_clients,accuracy,f1,fpr,tp,tn,fp,fn,seconds")
        .map_err(|e| CliError::io(path, "write", e))?;
    for cell in cells {
        writeln!(
            out,
            "{},{},{:.3}",
            cell.k_clients,
            report_fields(&cell.report),
            cell.report.wall_time_seconds
        )
        .map_err(|e| CliError::io(path, "write", e))?;
    }
    out.flush().map_err(|e| CliError::io(path, "write", e))
}

pub fn write_per_attack_report(path: &PathBuf, reports: &[AttackReport]) -> CliResult<()> {
    let mut out = create_writer(path)?;
    writeln!(out, "attack,accuracy,f1,fpr,tp,tn,fp,fn").map_err(|e| CliError::io(path, "write", e))?;
    for r in reports {
        writeln!(out, "{},{}", r.attack.as_str(), report_fields(&r.report))
            .map_err(|e| CliError::io(path, "write", e))?;
    }
    out.flush().map_err(|e| CliError::io(path, "write", e))
}

pub fn write_comparison_report(path: &PathBuf, comparison: &ComparisonReport) -> CliResult<()> {
    let mut out = create_writer(path)?;
    writeln!(out, "mode,accuracy,f1,fpr,tp,tn,fp,fn,seconds")
        .map_err(|e| CliError::io(path, "write", e))?;
    for (mode, report) in [
        ("centralized", &comparison.centralized),
        ("federated", &comparison.federated),
    ] {
        writeln!(
            out,
            "{},{},{:.3}",
            mode,
            report_fields(report),
            report.wall_time_seconds
        )
        .map_err(|e| CliError::io(path, "write", e))?;
    }
    out.flush().map_err(|e| CliError::io(path, "write", e))
}

fn create_writer(path: &PathBuf) -> CliResult<BufWriter<File>> {
    let file = File::create(path).map_err(|e| CliError::io(path, "create", e))?;
    Ok(BufWriter::new(file))
}
