//! CSV emission. Every file starts with `#`-prefixed metadata lines followed
//! by a header row; column sets are fixed per experiment kind.

use std::fs;
use std::io;
use std::path::Path;

use netobs_core::analysis::{OvuRow, SweepResult};
use netobs_core::methods::Preset;
use netobs_core::sim::{Counters, DetectionReport, SimReport};

pub const SWEEP_COLUMNS: &[&str] = &[
    "sweep_variable",
    "delta_m",
    "delta_p_measured",
    "delta_p_bound",
    "hbar",
    "holds",
];
pub const SCALE_COLUMNS: &[&str] = &[
    "sweep_variable",
    "delta_m",
    "delta_p_measured",
    "delta_p_bound",
    "hbar",
    "holds",
    "mode",
];
pub const SIMULATE_COLUMNS: &[&str] = &[
    "category",
    "id",
    "offered_bits",
    "delivered_bits",
    "dropped_bits",
    "offered_rate",
    "delivered_rate",
    "dropped_rate",
];
pub const DETECT_COLUMNS: &[&str] = &["trial", "failure_time", "detection_time", "latency"];
pub const OVU_COLUMNS: &[&str] = &[
    "user_rate",
    "loss_observed",
    "loss_unobserved",
    "loss_observed_fluid",
    "loss_unobserved_fluid",
];

/// Metadata lines written above the header.
#[derive(Debug, Default, Clone)]
pub struct Metadata(Vec<(String, String)>);

impl Metadata {
    pub fn push(&mut self, key: impl Into<String>, value: impl ToString) {
        self.0.push((key.into(), value.to_string()));
    }
}

fn table(meta: &Metadata, columns: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = String::new();
    for (k, v) in &meta.0 {
        out.push_str(&format!("# {k}={v}\n"));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(columns).expect("in-memory write");
    for row in rows {
        debug_assert_eq!(row.len(), columns.len());
        w.write_record(&row).expect("in-memory write");
    }
    out.push_str(&String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8"));
    out
}

pub fn sweep_csv(meta: &Metadata, result: &SweepResult) -> String {
    table(
        meta,
        SWEEP_COLUMNS,
        result.points.iter().map(|p| {
            vec![
                p.value.to_string(),
                p.record.delta_m.value().to_string(),
                p.record.delta_p.value.bps().to_string(),
                p.record.impact_bound().to_string(),
                p.record.hbar.bits().to_string(),
                p.record.holds.to_string(),
            ]
        }),
    )
}

pub fn scale_csv(meta: &Metadata, result: &SweepResult) -> String {
    table(
        meta,
        SCALE_COLUMNS,
        result.points.iter().map(|p| {
            vec![
                p.value.to_string(),
                p.record.delta_m.value().to_string(),
                p.record.delta_p.value.bps().to_string(),
                p.record.impact_bound().to_string(),
                p.record.hbar.bits().to_string(),
                p.record.holds.to_string(),
                p.mode.as_str().to_string(),
            ]
        }),
    )
}

fn counter_row(category: &str, id: &str, c: &Counters, secs: f64) -> Vec<String> {
    vec![
        category.to_string(),
        id.to_string(),
        c.offered.to_string(),
        c.delivered.to_string(),
        c.dropped.to_string(),
        (c.offered as f64 / secs).to_string(),
        (c.delivered as f64 / secs).to_string(),
        (c.dropped as f64 / secs).to_string(),
    ]
}

pub fn simulate_csv(meta: &Metadata, report: &SimReport) -> String {
    let secs = report.duration.secs();
    let rows = report
        .per_flow
        .iter()
        .map(|(id, c)| counter_row("flow", id.as_str(), c, secs))
        .chain(
            report
                .per_method
                .iter()
                .map(|(id, c)| counter_row("method", id.as_str(), c, secs)),
        )
        .chain([
            counter_row("overhead", "", &report.overhead, secs),
            counter_row("total", "", &report.total(), secs),
        ]);
    table(meta, SIMULATE_COLUMNS, rows)
}

pub fn detect_csv(meta: &Metadata, reports: &[DetectionReport]) -> String {
    table(
        meta,
        DETECT_COLUMNS,
        reports.iter().enumerate().map(|(i, r)| {
            vec![
                i.to_string(),
                r.failure_time.to_string(),
                r.detection_time.to_string(),
                r.latency.to_string(),
            ]
        }),
    )
}

pub fn ovu_csv(meta: &Metadata, rows: &[OvuRow]) -> String {
    table(
        meta,
        OVU_COLUMNS,
        rows.iter().map(|r| {
            vec![
                r.user_rate.bps().to_string(),
                r.loss_observed.bps().to_string(),
                r.loss_unobserved.bps().to_string(),
                r.fluid_observed.bps().to_string(),
                r.fluid_unobserved.bps().to_string(),
            ]
        }),
    )
}

/// Writes `contents` next to `path` and renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)
}

/// Human-readable preset catalog, one block per preset.
pub fn catalog(presets: &[Preset]) -> String {
    let mut out = String::new();
    for p in presets {
        let hbar = p.method.observer_factor();
        let octets = hbar.octets().map(|o| format!(" ({o} bytes)")).unwrap_or_default();
        out.push_str(&format!(
            "{}\t{}\thbar={} bits{}\n  {}\n",
            p.name,
            p.method.class(),
            hbar.bits(),
            octets,
            p.summary
        ));
        if let Some(t) = p.method.in_band_params() {
            let encap: Vec<String> = p.encap_octets.iter().map(|(_, o)| o.to_string()).collect();
            let names: Vec<&str> = p.encap_octets.iter().map(|(n, _)| *n).collect();
            let per_hop = t.per_hop().octets().unwrap_or_default();
            let total = t.message().octets().unwrap_or_default();
            out.push_str(&format!(
                "  breakdown: {} encap bytes ({}) + {}x{} per-hop bytes = {} bytes\n",
                encap.join("+"),
                names.join(", "),
                t.hops(),
                per_hop,
                total
            ));
        }
        if let Some(period) = p.method.period() {
            out.push_str(&format!("  default period: {}\n", period));
        }
    }
    out
}
