use std::path::Path;

use ellmom_core::elliptic::EllipticKind;
use ellmom_core::hyper::{pfq_detailed, pfq_exact, HypSpec};
use ellmom_core::identities::catalog::Catalog;
use ellmom_core::identities::pslq::{pslq, required_precision, RelationQuery, DEFAULT_BITS};
use ellmom_core::identities::verify::{default_tolerance, verify_suite, Outcome, Report};
use ellmom_core::identities::{fourier_coeff, fourier_integral, Status};
use ellmom_core::moments::{
    closed_form, conjecture2_sum, moment_comp_pair, moment_from_cube, moment_quadrature, CubeKernel,
    MomentRow, MomentSpec,
};
use ellmom_core::mp::{constant, gamma, ConstantName};
use ellmom_core::{BigReal, PrecisionContext};
use rug::Rational;
use serde::Serialize;

use crate::output::{log10, opt, round2, table, Rendered};
use crate::{Cli, Command, Failure};

pub fn run(cli: &Cli) -> Result<(), Failure> {
    let digits = |default: u32| cli.digits.unwrap_or(default);
    let rendered = match &cli.command {
        Command::Moment { product, n, m } => moment(product, n, m, &context(digits(50))?)?,
        Command::Verify { suite, ids, timings } => {
            let (out, failed) = verify(cli, suite, ids, *timings, &context(digits(50))?)?;
            out.print(cli.format);
            return if failed { Err(Failure::Checks) } else { Ok(()) };
        }
        Command::Conjectures { timings } => conjectures(cli, *timings, &context(digits(60))?)?,
        Command::Pslq { file, bits, precision } => relation(file, *bits, *precision)?,
        Command::Hyper { spec } => hyper(spec, &context(digits(50))?)?,
        Command::Fourier { kind, n } => fourier(kind, *n, &context(digits(50))?)?,
        Command::Zudilin3d => zudilin3d()?,
    };
    rendered.print(cli.format);
    Ok(())
}

fn context(digits: u32) -> Result<PrecisionContext, Failure> {
    Ok(PrecisionContext::new(digits)?)
}

fn rational(s: &str, what: &str) -> Result<Rational, Failure> {
    s.trim()
        .parse::<Rational>()
        .map_err(|_| Failure::Usage(format!("{what}: expected a rational number, got {s:?}")))
}

fn diff(a: &BigReal, b: &BigReal) -> (String, f64) {
    let d = (a - b).abs();
    (d.to_decimal(6), round2(d.log10_abs()))
}

fn catalog(cli: &Cli) -> Result<Catalog, Failure> {
    Ok(match &cli.catalog {
        Some(path) => Catalog::load(path)?,
        None => Catalog::builtin(),
    })
}

#[derive(Serialize)]
struct MomentReport {
    product: String,
    n: String,
    m: String,
    digits: u32,
    /// which closed form was used, if any
    method: Option<String>,
    exact: Option<String>,
    a: Option<String>,
    b: Option<String>,
    closed_form: Option<String>,
    quadrature: String,
    absdiff: Option<String>,
    log10_absdiff: Option<f64>,
}

fn moment(product: &str, n: &str, m: &str, ctx: &PrecisionContext) -> Result<Rendered, Failure> {
    let spec = MomentSpec::parse_product(product, rational(n, "--n")?, rational(m, "--m")?)?;
    let shown = default_tolerance(ctx);
    let closed = closed_form(&spec, ctx)?;
    let quad = moment_quadrature(&spec, ctx)?.value;
    let exact = closed.as_ref().and_then(|c| c.exact.clone());
    let row = MomentRow::new(
        &spec,
        exact.as_ref(),
        closed.as_ref().map_or(&quad, |c| &c.value),
        shown,
    );
    let (absdiff, log) = match &closed {
        Some(c) => {
            let (d, l) = diff(&c.value, &quad);
            (Some(d), Some(l))
        }
        None => (None, None),
    };
    let report = MomentReport {
        product: spec.product_label(),
        n: spec.n.to_string(),
        m: spec.m.to_string(),
        digits: ctx.digits(),
        method: closed.as_ref().map(|c| c.method.to_string()),
        exact: exact.as_ref().map(|e| e.to_string()),
        a: row.a.clone(),
        b: row.b.clone(),
        closed_form: closed.as_ref().map(|c| c.value.to_decimal(shown as usize)),
        quadrature: quad.to_decimal(shown as usize),
        absdiff,
        log10_absdiff: log,
    };
    let mut lines = vec![vec!["moment".to_string(), format!("∫₀¹ {spec} dx")]];
    match &closed {
        Some(c) => {
            lines.push(vec!["method".into(), c.method.into()]);
            if let Some(e) = &report.exact {
                lines.push(vec!["exact".into(), e.clone()]);
            }
            lines.push(vec!["closed form".into(), opt(&report.closed_form)]);
        }
        None => lines.push(vec!["closed form".into(), "none known; numeric only".into()]),
    }
    lines.push(vec!["quadrature".into(), report.quadrature.clone()]);
    if let Some(d) = &report.absdiff {
        lines.push(vec!["|diff|".into(), d.clone()]);
    }
    let csv = vec![
        MomentRow::CSV_HEADER.split(',').map(String::from).collect(),
        vec![
            row.product.clone(),
            row.n.clone(),
            opt(&row.a),
            opt(&row.b),
            row.value.clone(),
            row.digits.to_string(),
        ],
    ];
    Ok(Rendered::new(&report, table(&lines), csv))
}

const REPORT_HEADER: [&str; 7] = ["id", "status", "outcome", "log10_absdiff", "digits", "tolerance", "source"];

fn report_rows(reports: &[Report], timings: bool) -> (String, Vec<Vec<String>>) {
    let mut header: Vec<String> = REPORT_HEADER.iter().map(|s| s.to_string()).collect();
    if timings {
        header.push("seconds".into());
    }
    let mut text = vec![header[..6].to_vec()];
    let mut csv_header = header.clone();
    csv_header.extend(["lhs", "rhs", "absdiff", "error"].map(String::from));
    let mut csv = vec![csv_header];
    for r in reports {
        let outcome = serde_json::to_value(r.outcome).unwrap().as_str().unwrap().to_string();
        let mut row = vec![
            r.id.clone(),
            r.status.to_string(),
            outcome,
            log10(r.log10_absdiff),
            r.digits.to_string(),
            r.tolerance_digits.to_string(),
            r.source.clone(),
        ];
        if timings {
            row.push(r.runtime_seconds.map(|s| format!("{s:.3}")).unwrap_or_default());
        }
        let mut t = row[..6].to_vec();
        if let Some(e) = &r.error {
            t.push(e.clone());
        }
        text.push(t);
        row.extend([opt(&r.lhs), opt(&r.rhs), opt(&r.absdiff), opt(&r.error)]);
        csv.push(row);
    }
    (table(&text), csv)
}

fn verify(
    cli: &Cli,
    suite: &str,
    ids: &[String],
    timings: bool,
    ctx: &PrecisionContext,
) -> Result<(Rendered, bool), Failure> {
    let catalog = catalog(cli)?;
    let mut chosen = catalog.suite(suite)?;
    if !ids.is_empty() {
        for id in ids {
            if catalog.get(id).is_none() {
                return Err(Failure::Usage(format!("unknown identity id {id:?}")));
            }
        }
        chosen.retain(|i| ids.iter().any(|id| id == i.id()));
    }
    let mut reports = verify_suite(&chosen, ctx);
    if !timings {
        reports = reports.into_iter().map(Report::without_timing).collect();
    }
    let failures = reports.iter().filter(|r| r.is_theorem_failure()).count();
    let theorems = reports.iter().filter(|r| r.status == Status::Theorem).count();
    let (mut text, csv) = report_rows(&reports, timings);
    text.push_str(&format!(
        "\n{} of {theorems} theorems pass at {} digits ({} records)\n",
        theorems - failures,
        ctx.digits(),
        reports.len()
    ));
    Ok((Rendered::new(&reports, text, csv), failures > 0))
}

const SUM_TERMS_SOURCE: &str = "4F3 sum form of the K'^3 conjecture";

fn conjectures(cli: &Cli, timings: bool, ctx: &PrecisionContext) -> Result<Rendered, Failure> {
    let catalog = catalog(cli)?;
    let chosen: Vec<_> = catalog
        .identities()
        .iter()
        .filter(|i| i.status() == Status::Conjecture)
        .collect();
    let mut reports = verify_suite(&chosen, ctx);

    let start = std::time::Instant::now();
    let series = conjecture2_sum(ctx)?;
    let w = ctx.working_digits();
    let target = gamma(&BigReal::from_ratio(1, 4, w), ctx)?.powi(8) / (constant(ConstantName::Pi, ctx).powi(4) * 24);
    let tol = default_tolerance(ctx);
    let (absdiff, log) = diff(&series.value, &target);
    let pass = log < -f64::from(tol);
    reports.push(Report {
        id: "conjecture-2-sum".into(),
        status: Status::Conjecture,
        source: format!(
            "{SUM_TERMS_SOURCE}, {} terms extrapolated (plain partial sum {})",
            series.terms,
            series.partial_sum.to_decimal(12)
        ),
        digits: ctx.digits(),
        tolerance_digits: tol,
        lhs: Some(series.value.to_decimal(tol as usize)),
        rhs: Some(target.to_decimal(tol as usize)),
        absdiff: Some(absdiff),
        log10_absdiff: Some(log),
        outcome: if pass { Outcome::Pass } else { Outcome::Fail },
        pass,
        error: None,
        runtime_seconds: Some(start.elapsed().as_secs_f64()),
    });
    if !timings {
        reports = reports.into_iter().map(Report::without_timing).collect();
    }
    let (mut text, csv) = report_rows(&reports, timings);
    text.push('\n');
    for r in &reports {
        text.push_str(&format!("{}: |diff| = {}\n", r.id, opt(&r.absdiff)));
    }
    Ok(Rendered::new(&reports, text, csv))
}

#[derive(Serialize)]
struct PslqReport {
    found: bool,
    values: usize,
    file_digits: u32,
    precision: u32,
    max_coefficient_bits: u32,
    coefficients: Option<Vec<String>>,
    residual: Option<String>,
    confidence: Option<f64>,
    verified_at: Option<u32>,
}

/// Significant digits written in a decimal literal.
fn written_digits(s: &str) -> u32 {
    let mantissa = s.split(['e', 'E']).next().unwrap_or("");
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    digits.trim_start_matches('0').len() as u32
}

fn relation(file: &Path, bits: Option<u32>, precision: Option<u32>) -> Result<Rendered, Failure> {
    let text = std::fs::read_to_string(file)
        .map_err(|e| Failure::Usage(format!("{}: {e}", file.display())))?;
    let lines: Vec<&str> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect();
    if lines.len() < 2 {
        return Err(Failure::Usage(format!("{}: need at least two values", file.display())));
    }
    // short entries such as `1` are exact and do not limit the precision
    let file_digits = lines.iter().map(|l| written_digits(l)).max().unwrap_or(0);
    let precision = precision.unwrap_or(file_digits / 2);
    let bits = match bits {
        Some(b) => b,
        None => {
            let room = precision.saturating_sub(20) * 3 / (5 * lines.len() as u32);
            room.min(DEFAULT_BITS)
        }
    };
    if bits == 0 {
        return Err(Failure::Usage(format!(
            "{} digits are too few for a relation search among {} values; at least {} are needed",
            file_digits,
            lines.len(),
            2 * required_precision(lines.len(), 1)
        )));
    }
    let values = lines
        .iter()
        .map(|l| BigReal::parse(l, file_digits.max(2 * precision)))
        .collect::<ellmom_core::Result<Vec<_>>>()?;
    let query = RelationQuery {
        values,
        max_coefficient_bits: bits,
        precision,
    };
    let found = pslq(&query)?;
    let report = PslqReport {
        found: found.is_some(),
        values: lines.len(),
        file_digits,
        precision,
        max_coefficient_bits: bits,
        coefficients: found.as_ref().map(|r| r.coefficients.iter().map(|c| c.to_string()).collect()),
        residual: found.as_ref().map(|r| r.residual.clone()),
        confidence: found.as_ref().map(|r| r.confidence),
        verified_at: found.as_ref().map(|r| r.verified_at),
    };
    let text = match &report.coefficients {
        Some(c) => table(&[
            vec!["relation".into(), c.join(" ")],
            vec!["residual".into(), opt(&report.residual)],
            vec!["confidence".into(), format!("{:.2}", report.confidence.unwrap_or(0.0))],
            vec!["precision".into(), format!("{precision} digits, verified at {}", file_digits.max(2 * precision))],
        ]),
        None => format!(
            "no relation with coefficients below 2^{bits} at {precision} digits\n"
        ),
    };
    let csv = vec![
        vec!["found".into(), "precision".into(), "bits".into(), "coefficients".into(), "residual".into(), "confidence".into()],
        vec![
            report.found.to_string(),
            precision.to_string(),
            bits.to_string(),
            report.coefficients.as_ref().map(|c| c.join(" ")).unwrap_or_default(),
            opt(&report.residual),
            report.confidence.map(|c| format!("{c:.2}")).unwrap_or_default(),
        ],
    ];
    Ok(Rendered::new(&report, text, csv))
}

#[derive(Serialize)]
struct HyperReport {
    spec: String,
    digits: u32,
    value: String,
    /// exact value of a terminating series with rational parameters
    exact: Option<String>,
    terms: usize,
    error_estimate: String,
}

fn hyper(spec: &str, ctx: &PrecisionContext) -> Result<Rendered, Failure> {
    let spec: HypSpec = spec.parse()?;
    let r = pfq_detailed(&spec, ctx, None)?;
    let shown = default_tolerance(ctx) as usize;
    let report = HyperReport {
        spec: spec.to_string(),
        digits: ctx.digits(),
        value: r.value.to_decimal(shown),
        exact: pfq_exact(&spec).map(|q| q.to_string()),
        terms: r.terms,
        error_estimate: r.error_estimate.abs().to_decimal(3),
    };
    let mut lines = vec![
        vec!["series".into(), report.spec.clone()],
        vec!["value".into(), report.value.clone()],
    ];
    if let Some(e) = &report.exact {
        lines.push(vec!["exact".into(), e.clone()]);
    }
    lines.push(vec!["terms".into(), report.terms.to_string()]);
    let csv = vec![
        vec!["spec".into(), "value".into(), "exact".into(), "terms".into(), "digits".into()],
        vec![report.spec.clone(), report.value.clone(), opt(&report.exact), report.terms.to_string(), report.digits.to_string()],
    ];
    Ok(Rendered::new(&report, table(&lines), csv))
}

#[derive(Serialize)]
struct FourierRow {
    /// frequency of `sin(m t)`
    m: u64,
    closed_form: String,
    quadrature: String,
    absdiff: String,
    log10_absdiff: f64,
}

#[derive(Serialize)]
struct FourierReport {
    kind: String,
    n: u64,
    digits: u32,
    coefficients: Vec<FourierRow>,
}

fn fourier(kind: &str, n: u64, ctx: &PrecisionContext) -> Result<Rendered, Failure> {
    let kind: EllipticKind = kind.parse()?;
    if !matches!(kind, EllipticKind::K | EllipticKind::E) {
        return Err(Failure::Usage(format!("sine series exist for K and E, not {kind}")));
    }
    let coeffs = fourier_coeff(kind, n, ctx)?;
    let shown = default_tolerance(ctx) as usize;
    let mut rows = Vec::new();
    for (m, closed) in [(4 * n + 1, &coeffs.first), (4 * n + 3, &coeffs.second)] {
        let quad = fourier_integral(kind, m, ctx)?;
        let (absdiff, log) = diff(closed, &quad);
        rows.push(FourierRow {
            m,
            closed_form: closed.to_decimal(shown),
            quadrature: quad.to_decimal(shown),
            absdiff,
            log10_absdiff: log,
        });
    }
    let report = FourierReport {
        kind: kind.to_string(),
        n,
        digits: ctx.digits(),
        coefficients: rows,
    };
    let mut lines = vec![vec!["m".to_string(), "closed form".into(), "quadrature".into(), "|diff|".into()]];
    let mut csv = vec![vec!["kind".to_string(), "n".into(), "m".into(), "closed_form".into(), "quadrature".into(), "absdiff".into()]];
    for r in &report.coefficients {
        lines.push(vec![format!("sin({}t)", r.m), r.closed_form.clone(), r.quadrature.clone(), r.absdiff.clone()]);
        csv.push(vec![report.kind.clone(), n.to_string(), r.m.to_string(), r.closed_form.clone(), r.quadrature.clone(), r.absdiff.clone()]);
    }
    let text = format!("{}(sin t) sine coefficients, n = {n}\n{}", report.kind, table(&lines));
    Ok(Rendered::new(&report, text, csv))
}

#[derive(Serialize)]
struct CubeRow {
    kernel: String,
    product: String,
    triple: String,
    single: String,
    error_estimate: String,
    absdiff: String,
    log10_absdiff: f64,
}

fn zudilin3d() -> Result<Rendered, Failure> {
    let ctx = context(20)?;
    let mut rows = Vec::new();
    for kernel in CubeKernel::ALL {
        let cube = moment_from_cube(kernel)?;
        let single = moment_comp_pair(kernel.pair(), &Rational::new(), &ctx)?;
        let (absdiff, log) = diff(&cube.value.with_digits(ctx.working_digits()), &single);
        rows.push(CubeRow {
            kernel: format!("{kernel:?}"),
            product: kernel.pair().spec(0).product_label(),
            triple: cube.value.to_decimal(15),
            single: single.to_decimal(15),
            error_estimate: cube.error_estimate.abs().to_decimal(2),
            absdiff,
            log10_absdiff: log,
        });
    }
    let mut lines = vec![vec!["kernel".to_string(), "product".into(), "triple / 8".into(), "1D".into(), "|diff|".into()]];
    let mut csv = vec![vec!["kernel".to_string(), "product".into(), "triple".into(), "single".into(), "absdiff".into()]];
    for r in &rows {
        lines.push(vec![r.kernel.clone(), r.product.clone(), r.triple.clone(), r.single.clone(), r.absdiff.clone()]);
        csv.push(vec![r.kernel.clone(), r.product.clone(), r.triple.clone(), r.single.clone(), r.absdiff.clone()]);
    }
    Ok(Rendered::new(&rows, table(&lines), csv))
}
