use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::catalog::{Identity, Status};
use super::expr::evaluate;
use crate::mp::{BigReal, PrecisionContext};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pass,
    Fail,
    /// Evaluation failed; see `error`.
    Error,
    /// Informational record: value only.
    Reported,
}

/// Result of checking one identity.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub id: String,
    pub status: Status,
    pub source: String,
    pub digits: u32,
    pub tolerance_digits: u32,
    pub lhs: Option<String>,
    pub rhs: Option<String>,
    pub absdiff: Option<String>,
    /// `log10 |lhs - rhs|`, `-inf` when the two agree exactly.
    pub log10_absdiff: Option<f64>,
    pub outcome: Outcome,
    pub pass: bool,
    pub error: Option<String>,
    /// Wall-clock seconds; the only field that differs between runs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_seconds: Option<f64>,
}

impl Report {
    /// A failed theorem (conjectures and informational records never count).
    pub fn is_theorem_failure(&self) -> bool {
        self.status == Status::Theorem && !self.pass
    }

    pub fn without_timing(mut self) -> Self {
        self.runtime_seconds = None;
        self
    }
}

/// Default pass threshold: agreement to `digits - 10` decimal places.
pub fn default_tolerance(ctx: &PrecisionContext) -> u32 {
    ctx.digits().saturating_sub(10).max(1)
}

fn shown(v: &BigReal, ctx: &PrecisionContext) -> String {
    v.to_decimal(default_tolerance(ctx) as usize)
}

pub fn verify(identity: &Identity, ctx: &PrecisionContext) -> Report {
    let tol = identity.record.tolerance.unwrap_or_else(|| default_tolerance(ctx));
    verify_with_tolerance(identity, ctx, tol)
}

pub fn verify_with_tolerance(identity: &Identity, ctx: &PrecisionContext, tolerance_digits: u32) -> Report {
    let start = Instant::now();
    let mut report = Report {
        id: identity.id().to_string(),
        status: identity.status(),
        source: identity.record.source.clone(),
        digits: ctx.digits(),
        tolerance_digits,
        lhs: None,
        rhs: None,
        absdiff: None,
        log10_absdiff: None,
        outcome: Outcome::Error,
        pass: false,
        error: None,
        runtime_seconds: None,
    };
    let lhs = evaluate(&identity.lhs, ctx);
    let rhs = identity.rhs.as_ref().map(|r| evaluate(r, ctx)).transpose();
    match (lhs, rhs) {
        (Ok(l), Ok(None)) => {
            report.lhs = Some(shown(&l, ctx));
            report.outcome = Outcome::Reported;
            report.pass = true;
        }
        (Ok(l), Ok(Some(r))) => {
            let d = (&l - &r).abs();
            let log = d.log10_abs();
            report.lhs = Some(shown(&l, ctx));
            report.rhs = Some(shown(&r, ctx));
            report.absdiff = Some(d.to_decimal(6));
            report.log10_absdiff = Some(if log.is_finite() { (log * 100.0).round() / 100.0 } else { log });
            report.pass = log < -f64::from(tolerance_digits);
            report.outcome = if report.pass { Outcome::Pass } else { Outcome::Fail };
        }
        (Err(e), _) | (_, Err(e)) => {
            report.error = Some(e.to_string());
        }
    }
    report.runtime_seconds = Some(start.elapsed().as_secs_f64());
    report
}

/// Checks several identities in parallel; reports come back in input order.
pub fn verify_suite(identities: &[&Identity], ctx: &PrecisionContext) -> Vec<Report> {
    identities.par_iter().map(|i| verify(i, ctx)).collect()
}
