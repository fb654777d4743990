//! Self-consistency checks over sweep output.

use anyhow::{anyhow, Result};
use bcrelay_core::model::check_constraints;
use bcrelay_core::{channel_gains, rate_sum, Allocation, NetworkConfig};

use crate::sweep::{set_param, Row, SweepSpec, STATUS_OK};

/// Relative tolerance for re-deriving a row's throughput.
pub const REDERIVE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct AuditFailure {
    pub line: usize,
    pub reason: String,
}

/// Rebuilds the configuration a row was computed with.
///
/// Series labels are whitespace-separated `key=value` tokens naming sweep
/// parameters, applied before the row's own axis values.
pub fn row_config(spec: &SweepSpec, base: &NetworkConfig, row: &Row) -> Result<NetworkConfig> {
    let mut cfg = spec.overrides.apply(base);
    for tok in row.series.split_whitespace() {
        let (k, v) = tok
            .split_once('=')
            .ok_or_else(|| anyhow!("malformed series token `{tok}`"))?;
        let key = match k {
            "pmax" => "Pmax",
            other => other,
        };
        cfg = set_param(&cfg, key, v.parse()?)?;
    }
    cfg = set_param(&cfg, &row.param, row.value)?;
    if let Some(v2) = row.value2 {
        cfg = set_param(&cfg, &row.param2, v2)?;
    }
    Ok(cfg)
}

/// Recomputes the sum rate of every row that carries an integer split and
/// checks the constraints of its allocation.
///
/// Rows without a split (continuous schemes, traces, gaps) are skipped.
/// Returns the failures and the number of rows audited.
pub fn audit_rows(
    rows: &[Row],
    mut cfg_for: impl FnMut(&Row) -> Result<NetworkConfig>,
) -> (Vec<AuditFailure>, usize) {
    let mut failures = Vec::new();
    let mut checked = 0;
    for (i, row) in rows.iter().enumerate() {
        let line = i + 2;
        if row.status != STATUS_OK {
            continue;
        }
        let (Some(m), Some(n), Some(p0), Some(p1), Some(beta), Some(thr)) =
            (row.m, row.n, row.p0, row.p1, row.beta, row.throughput_bits)
        else {
            continue;
        };
        checked += 1;
        let mut fail = |reason: String| failures.push(AuditFailure { line, reason });
        let cfg = match cfg_for(row) {
            Ok(c) => c,
            Err(e) => {
                fail(format!("cannot rebuild configuration: {e:#}"));
                continue;
            }
        };
        let chan = match channel_gains(&cfg) {
            Ok(c) => c,
            Err(e) => {
                fail(e.to_string());
                continue;
            }
        };
        let alloc = Allocation::with_uniform_eigenvalues(m, n, p0, p1, beta);
        let r = rate_sum(&alloc, &chan, &cfg).r_sum;
        if (r - thr).abs() > REDERIVE_TOL * r.abs().max(thr.abs()) {
            fail(format!("throughput {thr} does not match recomputed {r}"));
        }
        let v = check_constraints(&alloc, &chan, &cfg);
        if !v.is_empty() {
            fail(format!("constraint violations {v:?}"));
        }
    }
    (failures, checked)
}
