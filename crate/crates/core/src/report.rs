//! CSV renderings of experiment and bound results. Floats are printed with
//! 17 significant digits so files round-trip and compare byte-for-byte.

use std::fmt::Write;

use crate::analytics::BoundReport;
use crate::experiment::{BiasRecord, CategoryTable, BUCKETS};
use crate::fmt::g17;

pub const RECORDS_HEADER: &str =
    "trial,source,target,category,true_weight,realized_weight,bias,rel_bias,rel_bias_defined";
pub const AGGREGATE_HEADER: &str =
    "category,bucket_lo_pct,bucket_hi_pct,probability,pair_trial_count";
pub const PAIRS_HEADER: &str = "source,target,category,true_weight,mean_bias,mean_rel_bias";
pub const BOUNDS_HEADER: &str =
    "beta,sum_bound,coarse_bound,exact,corollary_bound,sigma,ensemble_size,s_max";

fn opt(x: Option<f64>) -> String {
    x.map(g17).unwrap_or_default()
}

pub fn records_csv(records: &[BiasRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(RECORDS_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.trial,
            r.source,
            r.target,
            r.category,
            g17(r.true_weight),
            g17(r.realized_weight),
            g17(r.bias),
            opt(r.rel_bias),
            u8::from(r.rel_bias.is_some()),
        );
    }
    out
}

/// One row per (category, bucket). `probability` is empty for a category
/// without any record that has a defined relative bias.
pub fn aggregate_csv(table: &CategoryTable) -> String {
    let mut out = String::from(AGGREGATE_HEADER);
    out.push('\n');
    for cat in 1..=4u8 {
        for (bucket, &(lo, hi)) in BUCKETS.iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                cat,
                g17(lo),
                opt(hi),
                opt(table.probability(cat, bucket)),
                table.counts[(cat - 1) as usize][bucket],
            );
        }
    }
    out
}

pub fn pairs_csv(table: &CategoryTable) -> String {
    let mut out = String::from(PAIRS_HEADER);
    out.push('\n');
    for p in &table.pairs {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            p.source,
            p.target,
            p.category,
            g17(p.true_weight),
            g17(p.mean_bias),
            opt(p.mean_rel_bias),
        );
    }
    out
}

pub fn bounds_csv(reports: &[BoundReport]) -> String {
    let mut out = String::from(BOUNDS_HEADER);
    out.push('\n');
    for r in reports {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            g17(r.beta),
            g17(r.sum_bound),
            g17(r.coarse_bound),
            opt(r.exact),
            g17(r.corollary_bound),
            g17(r.sigma),
            r.ensemble_size,
            r.s_max,
        );
    }
    out
}
