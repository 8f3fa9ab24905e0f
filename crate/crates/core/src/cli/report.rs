//! Trace and summary files written by the command-line `run` command.
//!
//! A replication's trace is one CSV row per design step with the columns
//!
//! ```text
//! t,N,theta,risk,violation,solver_status,elapsed_ms
//! ```
//!
//! where `theta` is empty while the likelihood is still flat.  Traces are
//! a deterministic function of the configuration and the seed, so the
//! `elapsed_ms` column is pinned to `0`; real wall-clock timings go to the
//! human-readable `run.log` sidecar instead.  This keeps repeated runs
//! byte-identical, which downstream tooling relies on to diff experiments.
//!
//! The cross-replication `summary.csv` reduces each trace to its violation
//! frequency, final state, and risk quantiles.

use crate::controller::TraceRecord;

/// Header of every trace file, in column order.
pub const TRACE_HEADER: [&str; 7] = [
    "t",
    "N",
    "theta",
    "risk",
    "violation",
    "solver_status",
    "elapsed_ms",
];

/// Header of the summary file, in column order.
pub const SUMMARY_HEADER: [&str; 8] = [
    "rep",
    "steps",
    "freq_le_eps",
    "final_theta",
    "final_n",
    "risk_q10",
    "risk_q50",
    "risk_q90",
];

/// Renders a replication trace as CSV text.
pub fn trace_csv(records: &[TraceRecord]) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(TRACE_HEADER)
        .expect("in-memory CSV writes cannot fail");
    for record in records {
        let theta = record.theta.map(|t| t.to_string()).unwrap_or_default();
        writer
            .write_record([
                record.t.to_string(),
                record.n.to_string(),
                theta,
                record.risk.to_string(),
                record.violation.to_string(),
                record.status.to_string(),
                "0".to_string(),
            ])
            .expect("in-memory CSV writes cannot fail");
    }
    let bytes = writer
        .into_inner()
        .expect("in-memory CSV writes cannot fail");
    String::from_utf8(bytes).expect("CSV output is UTF-8")
}

/// Name of the trace file for replication `rep` out of `reps`.
///
/// A single replication writes plain `trace.csv`; multiple replications
/// are numbered `trace_000.csv`, `trace_001.csv`, and so on.
pub fn trace_file_name(rep: u32, reps: u32) -> String {
    if reps == 1 {
        "trace.csv".to_string()
    } else {
        format!("trace_{rep:03}.csv")
    }
}

/// Per-replication reduction reported in `summary.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct RepSummary {
    /// Replication index (zero-based).
    pub rep: u32,
    /// Number of design steps executed.
    pub steps: u64,
    /// Fraction of steps whose observed risk was at most `epsilon`.
    pub freq_le_eps: f64,
    /// Fitted shape after the last step, if the likelihood ever peaked.
    pub final_theta: Option<f64>,
    /// Sample size used at the last step.
    pub final_n: u32,
    /// 10% quantile of the observed risks.
    pub risk_q10: f64,
    /// Median of the observed risks.
    pub risk_q50: f64,
    /// 90% quantile of the observed risks.
    pub risk_q90: f64,
}

/// Empirical quantile with linear interpolation between order statistics.
///
/// `sorted` must be ascending and non-empty; `q` must lie in `[0, 1]`.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of an empty sample");
    assert!(
        (0.0..=1.0).contains(&q),
        "quantile level {q} outside [0, 1]"
    );
    let h = q * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Reduces one replication trace to its summary row.
pub fn summarize(rep: u32, trace: &[TraceRecord], epsilon: f64) -> RepSummary {
    assert!(!trace.is_empty(), "summary of an empty trace");
    let mut risks: Vec<f64> = trace.iter().map(|r| r.risk).collect();
    risks.sort_by(f64::total_cmp);
    let below = trace.iter().filter(|r| r.risk <= epsilon).count();
    let last = trace.last().expect("trace is non-empty");
    RepSummary {
        rep,
        steps: trace.len() as u64,
        freq_le_eps: below as f64 / trace.len() as f64,
        final_theta: last.theta,
        final_n: last.n,
        risk_q10: quantile(&risks, 0.1),
        risk_q50: quantile(&risks, 0.5),
        risk_q90: quantile(&risks, 0.9),
    }
}

/// Renders the cross-replication summary as CSV text.
pub fn summary_csv(summaries: &[RepSummary]) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(SUMMARY_HEADER)
        .expect("in-memory CSV writes cannot fail");
    for s in summaries {
        writer
            .write_record([
                s.rep.to_string(),
                s.steps.to_string(),
                s.freq_le_eps.to_string(),
                s.final_theta.map(|t| t.to_string()).unwrap_or_default(),
                s.final_n.to_string(),
                s.risk_q10.to_string(),
                s.risk_q50.to_string(),
                s.risk_q90.to_string(),
            ])
            .expect("in-memory CSV writes cannot fail");
    }
    let bytes = writer
        .into_inner()
        .expect("in-memory CSV writes cannot fail");
    String::from_utf8(bytes).expect("CSV output is UTF-8")
}

/// One human-readable `run.log` line with the real timings of a
/// replication (the trace file itself stays deterministic).
pub fn run_log_line(rep: u32, trace: &[TraceRecord]) -> String {
    assert!(!trace.is_empty(), "log line for an empty trace");
    let total: std::time::Duration = trace.iter().map(|r| r.elapsed).sum();
    let per_step_ms = total.as_secs_f64() * 1e3 / trace.len() as f64;
    let last = trace.last().expect("trace is non-empty");
    let theta = last
        .theta
        .map(|t| format!("{t:.4}"))
        .unwrap_or_else(|| "flat".to_string());
    let violations = trace.iter().filter(|r| r.violation).count();
    format!(
        "rep {rep}: {steps} steps in {total:.3}s ({per_step_ms:.3} ms/step), \
         final N = {n}, final theta = {theta}, violations = {violations}",
        steps = trace.len(),
        total = total.as_secs_f64(),
        n = last.n,
    )
}
