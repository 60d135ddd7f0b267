//! The eight subcommands. Each validates its parameters, calls into the
//! library, and hands a serializable report to the output layer. Exit code
//! conventions: Ok(0) success, Ok(1) reference mismatch or criterion
//! failure, Ok(130) interrupted with state saved, Err(Usage) bad
//! parameters, Err(Failure) runtime error.

use std::sync::atomic::AtomicBool;
use std::time::Instant;

use primecorr::acceptance;
use primecorr::checkpoint::Checkpoint;
use primecorr::experiments::{
    self, count_quadratic_twins_job, domain_comparison, linear_correlation_job,
    quadratic_correlation_job, reference_row, CorrelationRecord, JobControl, TwinCountRow,
    COMPARISON_Q_CAP, COMPARISON_X_CAP, DEFAULT_BLOCK_SIZE,
};
use primecorr::series::{
    euler_product_f, f_truncated, kernel_partial_sums, taylor_data, SeriesParams,
};
use primecorr::spectral::{
    a_k_constant, a_k_constant_corrected, f_sigma_product, quadratic_singular_series,
    wk_empirical, wk_spectrum_truncated,
};

use crate::config::{sigma_grid, single_sigma, RunConfig};
use crate::output::{csv_line, emit_json, float_cell, opt_cell, Format};

pub enum CmdError {
    Usage(String),
    Failure(String),
}

impl From<primecorr::Error> for CmdError {
    fn from(e: primecorr::Error) -> Self {
        CmdError::Failure(e.to_string())
    }
}

fn usage(msg: impl Into<String>) -> CmdError {
    CmdError::Usage(msg.into())
}

const INTERRUPTED: i32 = 130;

// ---------------------------------------------------------------------------
// constants

#[derive(serde::Serialize)]
struct ConstantRow {
    k: u64,
    shift: u64,
    value: f64,
    tail_bound: f64,
    corrected: f64,
    corrected_bound: f64,
}

#[derive(serde::Serialize)]
struct ConstantsReport {
    prime_cutoff: u64,
    pair_constants: Vec<ConstantRow>,
    quadratic_singular_series: SingularRow,
}

#[derive(serde::Serialize)]
struct SingularRow {
    value: f64,
    prime_cutoff: u64,
    tail_estimate: f64,
}

pub fn cmd_constants(cfg: &RunConfig) -> Result<i32, CmdError> {
    let p = cfg.p_cutoff.unwrap_or(1_000_000);
    if p < 5 {
        return Err(usage("constants need --p-cutoff >= 5"));
    }
    let mut rows = Vec::new();
    for k in 1..=8u64 {
        let raw = a_k_constant(k, p)?;
        let corr = a_k_constant_corrected(k, p)?;
        rows.push(ConstantRow {
            k,
            shift: 2 * k,
            value: raw.value,
            tail_bound: raw.error_bound,
            corrected: corr.value,
            corrected_bound: corr.error_bound,
        });
    }
    let gs = quadratic_singular_series(p)?;
    let report = ConstantsReport {
        prime_cutoff: p,
        pair_constants: rows,
        quadratic_singular_series: SingularRow {
            value: gs.value,
            prime_cutoff: gs.prime_cutoff,
            tail_estimate: gs.tail_estimate,
        },
    };
    match cfg.format {
        Format::Json => emit_json(&report),
        Format::Csv => {
            println!("kind,k,shift,value,tail_bound,corrected,corrected_bound,prime_cutoff");
            for r in &report.pair_constants {
                println!(
                    "{}",
                    csv_line(&[
                        "pair_constant".into(),
                        r.k.to_string(),
                        r.shift.to_string(),
                        float_cell(r.value),
                        float_cell(r.tail_bound),
                        float_cell(r.corrected),
                        float_cell(r.corrected_bound),
                        p.to_string(),
                    ])
                );
            }
            let s = &report.quadratic_singular_series;
            println!(
                "{}",
                csv_line(&[
                    "singular_series".into(),
                    String::new(),
                    String::new(),
                    float_cell(s.value),
                    float_cell(s.tail_estimate),
                    String::new(),
                    String::new(),
                    s.prime_cutoff.to_string(),
                ])
            );
        }
        Format::Plain => {
            println!("pair density constants at prime cutoff {p}");
            println!(
                "{:>2} {:>5} {:>10} {:>12} {:>10} {:>12}",
                "k", "shift", "value", "tail_bound", "corrected", "corr_bound"
            );
            for r in &report.pair_constants {
                println!(
                    "{:>2} {:>5} {:>10.5} {:>12.5e} {:>10.5} {:>12.5e}",
                    r.k, r.shift, r.value, r.tail_bound, r.corrected, r.corrected_bound
                );
            }
            let s = &report.quadratic_singular_series;
            println!(
                "quadratic singular series: {:.5} (tail estimate {:.5e})",
                s.value, s.tail_estimate
            );
        }
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// table1

#[derive(serde::Serialize)]
struct TableReportRow {
    x: u64,
    count: u64,
    ratio: f64,
    reference_count: Option<u64>,
    reference_ratio: Option<f64>,
    matches: Option<bool>,
}

fn table_row(row: TwinCountRow) -> TableReportRow {
    let reference = reference_row(row.x);
    let matches = reference.map(|(count, ratio)| {
        row.count == count && (row.ratio - ratio).abs() <= 5e-5
    });
    TableReportRow {
        x: row.x,
        count: row.count,
        ratio: row.ratio,
        reference_count: reference.map(|(c, _)| c),
        reference_ratio: reference.map(|(_, r)| r),
        matches,
    }
}

fn emit_table(rows: &[TableReportRow], format: Format) {
    match format {
        Format::Json => emit_json(&rows),
        Format::Csv => {
            println!("x,count,ratio,reference_count,reference_ratio,matches");
            for r in rows {
                println!(
                    "{}",
                    csv_line(&[
                        r.x.to_string(),
                        r.count.to_string(),
                        float_cell(r.ratio),
                        opt_cell(&r.reference_count),
                        r.reference_ratio.map(float_cell).unwrap_or_default(),
                        opt_cell(&r.matches),
                    ])
                );
            }
        }
        Format::Plain => {
            println!(
                "{:>16} {:>8} {:>9} {:>9} {:>9}  {}",
                "x", "count", "ratio", "ref_cnt", "ref_ratio", "status"
            );
            for r in rows {
                let status = match r.matches {
                    Some(true) => "match",
                    Some(false) => "MISMATCH",
                    None => "not in reference",
                };
                println!(
                    "{:>16} {:>8} {:>9.5} {:>9} {:>9} {}",
                    r.x,
                    r.count,
                    r.ratio,
                    opt_cell(&r.reference_count),
                    r.reference_ratio
                        .map(|v| format!("{v:.5}"))
                        .unwrap_or_default(),
                    status
                );
            }
        }
    }
}

pub fn cmd_table1(cfg: &RunConfig, stop: &AtomicBool) -> Result<i32, CmdError> {
    let x_max = cfg.x.unwrap_or(10_000_000_000_000);
    if x_max < 1000 {
        return Err(usage("table needs --x >= 1000"));
    }
    if x_max > experiments::TWIN_X_CAP {
        return Err(usage(format!(
            "table supports x <= {}, got {x_max}",
            experiments::TWIN_X_CAP
        )));
    }
    let block = cfg.segment_size.unwrap_or(DEFAULT_BLOCK_SIZE);
    let start = Instant::now();
    let mut rows = Vec::new();
    let mut interrupted = false;
    let mut x = 1000u64;
    while x <= x_max {
        let control = JobControl {
            stop: Some(stop),
            checkpoint_path: None,
        };
        let (row, finished) = count_quadratic_twins_job(x, block, &control)?;
        if !finished {
            interrupted = true;
            break;
        }
        rows.push(table_row(row));
        x = x.saturating_mul(10);
    }
    emit_table(&rows, cfg.format);
    eprintln!("table computed in {} ms", start.elapsed().as_millis());
    if interrupted {
        eprintln!("interrupted before x = {x}; partial table above");
        return Ok(INTERRUPTED);
    }
    let mismatches: Vec<&TableReportRow> =
        rows.iter().filter(|r| r.matches == Some(false)).collect();
    for r in &mismatches {
        eprintln!(
            "mismatch at x = {}: count {} vs reference {}, ratio {:.5} vs {:.5}",
            r.x,
            r.count,
            r.reference_count.expect("mismatch implies reference"),
            r.ratio,
            r.reference_ratio.expect("mismatch implies reference"),
        );
    }
    Ok(if mismatches.is_empty() { 0 } else { 1 })
}

// ---------------------------------------------------------------------------
// spectrum

#[derive(serde::Serialize)]
struct SpectrumRow {
    m: u64,
    sigma: f64,
    truncated_sum: f64,
    sum_tail_bound: f64,
    q_trunc: u64,
    product: f64,
    product_bound: f64,
    p_cutoff: u64,
    sum_product_gap: f64,
    empirical: Option<f64>,
    empirical_x: Option<u64>,
}

pub fn cmd_spectrum(cfg: &RunConfig) -> Result<i32, CmdError> {
    let m = cfg.m.unwrap_or(2);
    if m == 0 {
        return Err(usage("spectrum needs --m >= 1"));
    }
    let sigmas = sigma_grid(cfg, 1.5)?;
    for &s in &sigmas {
        if s <= 1.0 {
            return Err(usage(format!(
                "spectrum sigma must exceed 1 (series convergence), got {s}"
            )));
        }
    }
    let q = cfg.q_trunc.unwrap_or(1000);
    let p = cfg.p_cutoff.unwrap_or(100_000);
    let mut rows = Vec::new();
    for &sigma in &sigmas {
        let sum = wk_spectrum_truncated(m, sigma, q)?;
        let prod = f_sigma_product(m, sigma, p)?;
        let empirical = match cfg.x {
            Some(x) => Some(wk_empirical(m, sigma, q, x)?),
            None => None,
        };
        rows.push(SpectrumRow {
            m,
            sigma,
            truncated_sum: sum.value,
            sum_tail_bound: sum.error_bound,
            q_trunc: q,
            product: prod.value,
            product_bound: prod.error_bound,
            p_cutoff: p,
            sum_product_gap: (sum.value - prod.value).abs(),
            empirical,
            empirical_x: cfg.x,
        });
    }
    match cfg.format {
        Format::Json => emit_json(&rows),
        Format::Csv => {
            println!(
                "m,sigma,truncated_sum,sum_tail_bound,q_trunc,product,product_bound,p_cutoff,sum_product_gap,empirical,empirical_x"
            );
            for r in &rows {
                println!(
                    "{}",
                    csv_line(&[
                        r.m.to_string(),
                        float_cell(r.sigma),
                        float_cell(r.truncated_sum),
                        float_cell(r.sum_tail_bound),
                        r.q_trunc.to_string(),
                        float_cell(r.product),
                        float_cell(r.product_bound),
                        r.p_cutoff.to_string(),
                        float_cell(r.sum_product_gap),
                        r.empirical.map(float_cell).unwrap_or_default(),
                        opt_cell(&r.empirical_x),
                    ])
                );
            }
        }
        Format::Plain => {
            println!("spectral density, m = {m}, Q = {q}, P = {p}");
            println!(
                "{:>7} {:>10} {:>12} {:>10} {:>12} {:>10}",
                "sigma", "sum_form", "tail_bound", "product", "prod_bound", "empirical"
            );
            for r in &rows {
                println!(
                    "{:>7.4} {:>10.5} {:>12.5e} {:>10.5} {:>12.5e} {:>10}",
                    r.sigma,
                    r.truncated_sum,
                    r.sum_tail_bound,
                    r.product,
                    r.product_bound,
                    r.empirical
                        .map(|v| format!("{v:.5}"))
                        .unwrap_or_default()
                );
            }
        }
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// series

#[derive(serde::Serialize)]
struct EvalOut {
    value: f64,
    truncation: u64,
    tail_bound: Option<f64>,
    method: &'static str,
}

#[derive(serde::Serialize)]
struct SeriesReport {
    n: u64,
    sigma: f64,
    omega: u32,
    a1: f64,
    a2: f64,
    kernel_sum: EvalOut,
    euler_product: Option<EvalOut>,
}

pub fn cmd_series(cfg: &RunConfig) -> Result<i32, CmdError> {
    let n = cfg.m.unwrap_or(2);
    if n < 2 {
        return Err(usage("series needs --m >= 2 (the integer argument n)"));
    }
    let sigma = single_sigma(cfg, 1.5)?;
    if sigma < 1.0 {
        return Err(usage(format!(
            "series sigma must be >= 1 (1 gives the boundary partial sums), got {sigma}"
        )));
    }
    let q = cfg.q_trunc.unwrap_or(1000);
    let p = cfg.p_cutoff.unwrap_or(100_000);
    let taylor = taylor_data(n)?;

    let (kernel_sum, euler_product) = if sigma > 1.0 {
        let params = SeriesParams::real(n, sigma)?;
        let sum = f_truncated(&params, q)?;
        let prod = euler_product_f(&params, p)?;
        (
            EvalOut {
                value: sum.value.re,
                truncation: sum.truncation,
                tail_bound: Some(sum.tail_bound),
                method: "truncated_sum",
            },
            Some(EvalOut {
                value: prod.value.re,
                truncation: prod.truncation,
                tail_bound: Some(prod.tail_bound),
                method: "euler_product",
            }),
        )
    } else {
        // sigma == 1: conditionally convergent boundary; report the partial
        // sum at Q with no tail bound.
        let partials = kernel_partial_sums(n, q)?;
        let last = partials.last().copied().unwrap_or((0, 0.0));
        (
            EvalOut {
                value: last.1,
                truncation: last.0,
                tail_bound: None,
                method: "partial_sum",
            },
            None,
        )
    };

    let report = SeriesReport {
        n,
        sigma,
        omega: taylor.omega,
        a1: taylor.a1,
        a2: taylor.a2,
        kernel_sum,
        euler_product,
    };
    match cfg.format {
        Format::Json => emit_json(&report),
        Format::Csv => {
            println!("n,sigma,omega,a1,a2,kernel_value,kernel_truncation,kernel_tail,product_value,product_truncation,product_tail");
            let k = &report.kernel_sum;
            let (pv, pt, pb) = match &report.euler_product {
                Some(e) => (
                    float_cell(e.value),
                    e.truncation.to_string(),
                    e.tail_bound.map(float_cell).unwrap_or_default(),
                ),
                None => (String::new(), String::new(), String::new()),
            };
            println!(
                "{}",
                csv_line(&[
                    report.n.to_string(),
                    float_cell(report.sigma),
                    report.omega.to_string(),
                    float_cell(report.a1),
                    float_cell(report.a2),
                    float_cell(k.value),
                    k.truncation.to_string(),
                    k.tail_bound.map(float_cell).unwrap_or_default(),
                    pv,
                    pt,
                    pb,
                ])
            );
        }
        Format::Plain => {
            println!("kernel series at n = {}, sigma = {}", report.n, report.sigma);
            println!("  distinct prime factors: {}", report.omega);
            println!("  a1 = {:.5}   a2 = {:.5}", report.a1, report.a2);
            let k = &report.kernel_sum;
            match k.tail_bound {
                Some(t) => println!(
                    "  {} (Q = {}): {:.5}  tail bound {:.5e}",
                    k.method, k.truncation, k.value, t
                ),
                None => println!("  {} (Q = {}): {:.5}", k.method, k.truncation, k.value),
            }
            if let Some(e) = &report.euler_product {
                println!(
                    "  {} (P = {}): {:.5}  tail bound {:.5e}",
                    e.method,
                    e.truncation,
                    e.value,
                    e.tail_bound.expect("product carries a bound")
                );
            }
        }
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// correlate

fn emit_correlation(rec: &CorrelationRecord, kind: &str, format: Format) {
    match format {
        Format::Json => emit_json(rec),
        Format::Csv => {
            println!("kind,x,m,weighted_sum,pair_count,normalized");
            println!(
                "{}",
                csv_line(&[
                    kind.to_string(),
                    rec.x.to_string(),
                    rec.m.to_string(),
                    float_cell(rec.weighted_sum),
                    rec.pair_count.to_string(),
                    float_cell(rec.normalized),
                ])
            );
        }
        Format::Plain => {
            println!("{kind} correlation");
            println!("  range:        {}", rec.x);
            println!("  shift m:      {}", rec.m);
            println!("  weighted sum: {:.5}", rec.weighted_sum);
            println!("  pair count:   {}", rec.pair_count);
            println!("  normalized:   {:.5}", rec.normalized);
        }
    }
}

pub fn cmd_correlate(cfg: &RunConfig, stop: &AtomicBool) -> Result<i32, CmdError> {
    let control = JobControl {
        stop: Some(stop),
        checkpoint_path: cfg.checkpoint.as_deref(),
    };
    let (rec, finished, kind) = match (cfg.x, cfg.n_limit) {
        (None, Some(n_limit)) => {
            if cfg.m.is_some() {
                return Err(usage("--m does not apply to the quadratic sum (--n-limit)"));
            }
            let block = cfg.segment_size.unwrap_or(DEFAULT_BLOCK_SIZE);
            let (rec, fin) =
                quadratic_correlation_job(n_limit, block, &control).map_err(domain_as_usage)?;
            (rec, fin, "quadratic")
        }
        (Some(x), None) => {
            let m = cfg.m.unwrap_or(2);
            let block = cfg.segment_size.unwrap_or(1 << 20);
            let (rec, fin) =
                linear_correlation_job(x, m, block, &control).map_err(domain_as_usage)?;
            (rec, fin, "linear")
        }
        _ => {
            return Err(usage(
                "choose one mode: --x [--m] for the linear sum, or --n-limit for the quadratic sum",
            ))
        }
    };
    emit_correlation(&rec, kind, cfg.format);
    eprintln!("elapsed {} ms", rec.elapsed_ms);
    if !finished {
        match &cfg.checkpoint {
            Some(p) => eprintln!("interrupted; checkpoint saved at {}", p.display()),
            None => eprintln!("interrupted; no --checkpoint given, partial sums discarded"),
        }
        return Ok(INTERRUPTED);
    }
    Ok(0)
}

/// Parameter rejections from the library (domain and capacity checks run
/// before any work starts) are usage errors at the CLI boundary; anything
/// else stays a runtime failure.
fn domain_as_usage(e: primecorr::Error) -> CmdError {
    match &e {
        primecorr::Error::Domain(msg) | primecorr::Error::Capacity(msg) => {
            CmdError::Usage(msg.clone())
        }
        _ => CmdError::Failure(e.to_string()),
    }
}

// ---------------------------------------------------------------------------
// compare

pub fn cmd_compare(cfg: &RunConfig) -> Result<i32, CmdError> {
    let m = cfg.m.unwrap_or(2);
    let sigma = single_sigma(cfg, 1.5)?;
    if sigma <= 1.0 {
        return Err(usage("compare needs sigma > 1"));
    }
    let x = cfg.x.unwrap_or(1_000_000);
    if x > COMPARISON_X_CAP {
        return Err(usage(format!(
            "compare supports x <= {COMPARISON_X_CAP}, got {x}"
        )));
    }
    let q = cfg.q_trunc.unwrap_or(100);
    if q > COMPARISON_Q_CAP {
        return Err(usage(format!(
            "compare supports q_trunc <= {COMPARISON_Q_CAP}, got {q}"
        )));
    }
    let cmp = domain_comparison(m, sigma, x, q).map_err(domain_as_usage)?;
    match cfg.format {
        Format::Json => emit_json(&cmp),
        Format::Csv => {
            println!(
                "m,sigma,x,q_trunc,kernel_sum,lambda_sum,prediction,kernel_vs_prediction,lambda_vs_prediction,kernel_vs_lambda"
            );
            println!(
                "{}",
                csv_line(&[
                    cmp.m.to_string(),
                    float_cell(cmp.sigma),
                    cmp.x.to_string(),
                    cmp.q_trunc.to_string(),
                    float_cell(cmp.kernel_sum),
                    float_cell(cmp.lambda_sum),
                    float_cell(cmp.prediction),
                    float_cell(cmp.kernel_vs_prediction),
                    float_cell(cmp.lambda_vs_prediction),
                    float_cell(cmp.kernel_vs_lambda),
                ])
            );
        }
        Format::Plain => {
            println!("domain comparison, m = {}, sigma = {}, x = {}, Q = {}", cmp.m, cmp.sigma, cmp.x, cmp.q_trunc);
            println!("  kernel-domain sum:     {:.5}", cmp.kernel_sum);
            println!("  direct Lambda sum:     {:.5}", cmp.lambda_sum);
            println!("  density prediction:    {:.5}", cmp.prediction);
            println!("  kernel vs prediction:  {:.5}", cmp.kernel_vs_prediction);
            println!("  Lambda vs prediction:  {:.5}", cmp.lambda_vs_prediction);
            println!("  kernel vs Lambda:      {:.5}", cmp.kernel_vs_lambda);
        }
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// verify

pub fn cmd_verify(cfg: &RunConfig) -> Result<i32, CmdError> {
    if cfg.format == Format::Csv {
        return Err(usage(
            "verify reports prose details; use plain or json format",
        ));
    }
    let outcomes = acceptance::run_all();
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    match cfg.format {
        Format::Json => emit_json(&outcomes),
        _ => {
            for o in &outcomes {
                println!("{o}");
            }
            println!(
                "{} of {} criteria passed",
                outcomes.len() - failed,
                outcomes.len()
            );
        }
    }
    Ok(if failed == 0 { 0 } else { 1 })
}

// ---------------------------------------------------------------------------
// resume

pub fn cmd_resume(cfg: &RunConfig, stop: &AtomicBool) -> Result<i32, CmdError> {
    let path = cfg
        .checkpoint
        .as_ref()
        .ok_or_else(|| usage("resume needs --checkpoint pointing at a saved job"))?;
    let ck = Checkpoint::load(path)?;
    let control = JobControl {
        stop: Some(stop),
        checkpoint_path: Some(path),
    };
    let param = |key: &str| -> Result<u64, CmdError> {
        ck.params
            .get(key)
            .ok_or_else(|| CmdError::Failure(format!("checkpoint lacks parameter '{key}'")))?
            .parse()
            .map_err(|_| CmdError::Failure(format!("checkpoint parameter '{key}' is not a count")))
    };
    match ck.job_type.as_str() {
        "quadratic_twin_count" => {
            let x = param("x")?;
            let (row, finished) = count_quadratic_twins_job(x, ck.block_size, &control)?;
            emit_twin_row(&row, cfg.format);
            if !finished {
                eprintln!("interrupted again; checkpoint still at {}", path.display());
                return Ok(INTERRUPTED);
            }
        }
        "linear_correlation" => {
            let x = param("x")?;
            let m = param("m")?;
            let (rec, finished) = linear_correlation_job(x, m, ck.block_size, &control)?;
            emit_correlation(&rec, "linear", cfg.format);
            if !finished {
                eprintln!("interrupted again; checkpoint still at {}", path.display());
                return Ok(INTERRUPTED);
            }
        }
        "quadratic_correlation" => {
            let n_limit = param("n_limit")?;
            let (rec, finished) = quadratic_correlation_job(n_limit, ck.block_size, &control)?;
            emit_correlation(&rec, "quadratic", cfg.format);
            if !finished {
                eprintln!("interrupted again; checkpoint still at {}", path.display());
                return Ok(INTERRUPTED);
            }
        }
        other => {
            return Err(CmdError::Failure(format!(
                "checkpoint holds unknown job type '{other}'"
            )))
        }
    }
    Ok(0)
}

fn emit_twin_row(row: &TwinCountRow, format: Format) {
    match format {
        Format::Json => emit_json(row),
        Format::Csv => {
            println!("x,count,ratio");
            println!(
                "{}",
                csv_line(&[
                    row.x.to_string(),
                    row.count.to_string(),
                    float_cell(row.ratio),
                ])
            );
        }
        Format::Plain => {
            println!("quadratic twin count");
            println!("  x:     {}", row.x);
            println!("  count: {}", row.count);
            println!("  ratio: {:.5}", row.ratio);
        }
    }
}
