//! `bench`: cold-cache wall times per order.

use std::time::Instant;

use gammaflow::RnTable;
use serde_json::{json, Value};

use crate::error::Failure;

pub struct Row {
    pub n: u32,
    pub terms: usize,
    /// Best over repetitions, for the step `R_{n-1} -> R_n`.
    pub step_seconds: f64,
    /// Best over repetitions, for `R_3, ..., R_n` from scratch.
    pub cumulative_seconds: f64,
}

pub fn run(max_n: u32, repetitions: u32) -> Result<Vec<Row>, Failure> {
    if max_n < 10 {
        return Err(Failure::usage(format!(
            "bench needs --max-n >= 10, got {max_n}"
        )));
    }
    if repetitions == 0 {
        return Err(Failure::usage("--repetitions must be at least 1"));
    }
    let mut rows: Vec<Row> = (3..=max_n)
        .map(|n| Row {
            n,
            terms: 0,
            step_seconds: f64::INFINITY,
            cumulative_seconds: f64::INFINITY,
        })
        .collect();
    for _ in 0..repetitions {
        let table = RnTable::in_memory();
        let start = Instant::now();
        for row in rows.iter_mut() {
            let t0 = Instant::now();
            let r = table.get(row.n)?;
            row.step_seconds = row.step_seconds.min(t0.elapsed().as_secs_f64());
            row.cumulative_seconds = row.cumulative_seconds.min(start.elapsed().as_secs_f64());
            row.terms = r.len();
        }
    }
    Ok(rows)
}

/// First order whose term count drops below its predecessor's.
pub fn non_monotone(rows: &[Row]) -> Option<u32> {
    rows.windows(2)
        .find(|w| w[1].terms < w[0].terms)
        .map(|w| w[1].n)
}

pub fn machine() -> Value {
    json!({
        "os": std::env::consts::OS,
        "arch": std::env::consts::ARCH,
        "cpus": std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
        "threads": rayon::current_num_threads(),
    })
}

pub fn to_json(rows: &[Row], repetitions: u32) -> Value {
    let orders: Vec<Value> = rows
        .iter()
        .map(|r| {
            json!({
                "n": r.n,
                "terms": r.terms,
                "step_seconds": r.step_seconds,
                "cumulative_seconds": r.cumulative_seconds,
            })
        })
        .collect();
    json!({
        "machine": machine(),
        "repetitions": repetitions,
        "monotone_terms": non_monotone(rows).is_none(),
        "orders": orders,
    })
}

pub fn to_pretty(rows: &[Row]) -> String {
    let mut out = format!(
        "{:>4} {:>8} {:>12} {:>12}\n",
        "n", "terms", "step s", "total s"
    );
    for r in rows {
        out.push_str(&format!(
            "{:>4} {:>8} {:>12.6} {:>12.6}\n",
            r.n, r.terms, r.step_seconds, r.cumulative_seconds
        ));
    }
    out.pop();
    out
}
