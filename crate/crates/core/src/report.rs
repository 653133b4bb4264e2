//! CSV output. Every file starts with a schema line; floats use the shortest
//! representation that round-trips, so equal results give equal bytes.

use std::io::Write;

use crate::error::Result;
use crate::kernel::{AlphaIntegrals, Kernel};
use crate::study::{ConsistencyReport, DistReport, GronwallStudy, RateStudyResult};

pub const CSV_VERSION_LINE: &str = "# stabledrift-csv v1";

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_rate_study<W: Write>(mut w: W, r: &RateStudyResult) -> Result<()> {
    writeln!(w, "{CSV_VERSION_LINE}")?;
    writeln!(
        w,
        "row,eps,bandwidth,median_abs_error,mean_abs_error,n_reps,event_failure_rate,slope,slope_stderr,target,tolerance,pass"
    )?;
    for row in &r.rows {
        writeln!(
            w,
            "eps,{},{},{},{},{},{},,,,,",
            row.eps,
            row.bandwidth,
            row.median_abs_error,
            row.mean_abs_error,
            row.n_reps,
            opt(row.event_failure_rate)
        )?;
    }
    writeln!(w, "summary,,,,,,,{},{},{},{},{}", r.slope, r.slope_stderr, r.target, r.tolerance, r.passed())?;
    Ok(())
}

pub fn write_consistency<W: Write>(mut w: W, r: &ConsistencyReport) -> Result<()> {
    writeln!(w, "{CSV_VERSION_LINE}")?;
    writeln!(w, "row,eps,bandwidth,mean_abs_error,median_abs_error,n_reps,decreasing")?;
    for row in &r.rows {
        writeln!(
            w,
            "eps,{},{},{},{},{},",
            row.eps, row.bandwidth, row.mean_abs_error, row.median_abs_error, row.n_reps
        )?;
    }
    let verdict = r.verdict.map(|v| v.to_string()).unwrap_or_else(|| "none".into());
    writeln!(w, "summary,,,,,,{verdict}")?;
    Ok(())
}

pub fn write_dist_check<W: Write>(mut w: W, r: &DistReport) -> Result<()> {
    writeln!(w, "{CSV_VERSION_LINE}")?;
    writeln!(
        w,
        "# t = {}, shift = {}, pos_weight = {}, neg_weight = {}, decreasing = {}",
        r.t,
        r.shift,
        r.limit.pos_weight,
        r.limit.neg_weight,
        r.decreasing()
    )?;
    writeln!(w, "eps,ks_statistic,threshold,pass")?;
    for row in &r.rows {
        writeln!(w, "{},{},{},{}", row.eps, row.ks_statistic, row.threshold, row.pass)?;
    }
    Ok(())
}

pub fn write_gronwall<W: Write>(mut w: W, r: &GronwallStudy) -> Result<()> {
    writeln!(w, "{CSV_VERSION_LINE}")?;
    writeln!(w, "eps,n_reps,violations,worst_excess,mean_sup_deviation,pass")?;
    for row in &r.rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            row.eps,
            row.n_reps,
            row.violations,
            row.worst_excess,
            row.mean_sup_deviation,
            row.violations == 0
        )?;
    }
    Ok(())
}

/// One row of pointwise estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateRow {
    pub t: f64,
    pub estimate: f64,
    pub truth: f64,
    pub bandwidth: f64,
}

pub fn write_estimates<W: Write>(mut w: W, rows: &[EstimateRow]) -> Result<()> {
    writeln!(w, "{CSV_VERSION_LINE}")?;
    writeln!(w, "t,estimate,truth,abs_error,bandwidth")?;
    for r in rows {
        writeln!(w, "{},{},{},{},{}", r.t, r.estimate, r.truth, (r.estimate - r.truth).abs(), r.bandwidth)?;
    }
    Ok(())
}

pub fn write_kernel_info<W: Write>(mut w: W, kernel: &Kernel, ints: &AlphaIntegrals) -> Result<()> {
    let k = kernel.order();
    let (a, b) = kernel.support();
    writeln!(w, "{CSV_VERSION_LINE}")?;
    let moment_cols: Vec<String> = (0..=k + 1).map(|j| format!("M_{j}")).collect();
    writeln!(w, "family,A,B,k,{},alpha,abs,pos,neg", moment_cols.join(","))?;
    let moments: Vec<String> = kernel.moments().iter().map(|m| m.to_string()).collect();
    writeln!(
        w,
        "{},{},{},{},{},{},{},{},{}",
        kernel.family().name(),
        a,
        b,
        k,
        moments.join(","),
        ints.alpha,
        ints.abs,
        ints.pos,
        ints.neg
    )?;
    Ok(())
}
