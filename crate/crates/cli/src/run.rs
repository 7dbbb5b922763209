//! Command dispatch. Every command renders its whole payload in memory and
//! writes it in one atomic step.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;
use std::time::Instant;

use di_forge::channels::{apply_reduction, poisson_to_bernoulli_reduction, Channel, ChannelModel};
use di_forge::codebook::{
    expurgate, expurgate_best, CodebookParams, Expurgation, InputBox, PrimitiveCodebook, RadiusMode,
};
use di_forge::decoder::{identify, DecoderParams};
use di_forge::experiments::bounds::{rr_converse, rr_exponent_limit, rr_lower_bound};
use di_forge::experiments::stats::{
    binomial_test_two_sided, chi_square_two_sample, clopper_pearson, CONFIDENCE,
};
use di_forge::experiments::{
    adversarial_pair, estimate_false_id, estimate_missed_id, rate_report, rr_build, PairSampling,
    ReportRecord,
};
use di_forge::geometry::{haar_rotation, TOL_ORTH, TOL_RADIUS};
use di_forge::rng::derive;
use di_forge::Error;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{
    ChannelName, CommandName, DecoderName, Experiment, Format, Pairs, RunConfig, UsageError,
};

/// Significance level of the reduction demo's tests.
pub const REDUCTION_ALPHA: f64 = 1e-3;

#[derive(Debug, thiserror::Error)]
pub enum Failure {
    #[error("usage: {0}")]
    Usage(#[from] UsageError),
    #[error(transparent)]
    Library(#[from] Error),
    #[error("{0}")]
    Placement(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Usage(_) => 2,
            Self::Library(Error::PlacementExhausted { .. } | Error::Infeasible { .. }) => 3,
            Self::Library(Error::RegimeViolation { .. }) => 4,
            Self::Placement(_) => 3,
            Self::Verification(_) => 5,
            _ => 1,
        }
    }
}

fn io_error(path: &Path, source: std::io::Error) -> Failure {
    Failure::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Writes `payload` to `path` through a temporary file in the same
/// directory, or to standard output.
pub fn emit(path: Option<&Path>, payload: &str) -> Result<(), Failure> {
    match path {
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(payload.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| io_error(Path::new("<stdout>"), e))
        }
        Some(path) => {
            let dir = match path.parent() {
                Some(p) if !p.as_os_str().is_empty() => p,
                _ => Path::new("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io_error(path, e))?;
            tmp.write_all(payload.as_bytes())
                .map_err(|e| io_error(path, e))?;
            tmp.as_file().sync_all().map_err(|e| io_error(path, e))?;
            tmp.persist(path).map_err(|e| io_error(path, e.error))?;
            Ok(())
        }
    }
}

pub fn run(cfg: &RunConfig) -> Result<(), Failure> {
    match cfg.command {
        CommandName::Build => build(cfg),
        CommandName::Verify => verify(cfg),
        CommandName::Simulate => simulate(cfg),
        CommandName::SweepRr => sweep_rr(cfg),
        CommandName::ReduceDemo => reduce_demo(cfg),
        CommandName::Report => report(cfg),
    }
}

/// The run inputs as recorded in reports: the config without output
/// destinations.
fn inputs(cfg: &RunConfig) -> Value {
    let mut v = serde_json::to_value(cfg).unwrap_or(Value::Null);
    if let Value::Object(map) = &mut v {
        map.remove("output");
        map.remove("format");
    }
    v
}

fn metadata(start: Instant) -> Value {
    let unix = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    json!({ "elapsed_s": start.elapsed().as_secs_f64(), "finished_unix": unix })
}

fn build_params(cfg: &RunConfig) -> Result<PrimitiveCodebook, Failure> {
    let n = cfg.n.expect("validated");
    let branching = cfg.branching();
    let seed = cfg.build_seed;
    let params = match cfg.mode {
        RadiusMode::Separated => {
            let t = cfg.t.unwrap_or_else(|| (n as f64).ln());
            CodebookParams::separated(n, t, branching, seed).with_delta(cfg.delta)
        }
        RadiusMode::Capacity => CodebookParams::capacity(n, cfg.delta, branching, seed),
        RadiusMode::RateReliability => {
            let e = cfg.e.expect("validated");
            return Ok(rr_build(n, cfg.layers, cfg.delta, e, branching, seed)?.0);
        }
        RadiusMode::Explicit => CodebookParams::explicit(
            n,
            cfg.radii.clone().expect("validated"),
            cfg.d.expect("validated"),
            branching,
            seed,
        )
        .with_delta(cfg.delta),
    };
    Ok(PrimitiveCodebook::build(params)?)
}

fn load_codebook(path: &Path) -> Result<PrimitiveCodebook, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    Ok(PrimitiveCodebook::from_json(&text)?)
}

fn line(record: &ReportRecord) -> Result<String, Failure> {
    Ok(record.to_line()? + "\n")
}

fn build(cfg: &RunConfig) -> Result<(), Failure> {
    let start = Instant::now();
    let mut cb = build_params(cfg)?;
    if let Some(seed) = cfg.rotation_seed {
        cb = cb.rotate(&haar_rotation(cb.n(), seed))?;
    }
    let document = cb.to_json()?;
    match &cfg.output {
        None => emit(None, &(document + "\n")),
        Some(path) => {
            emit(Some(path), &document)?;
            let retained = expurgate(&cb, &InputBox::unit(cb.n()), 0, false)?.report;
            let result = json!({
                "leaf_count": cb.leaf_count(),
                "radii": cb.params().radii,
                "d": cb.params().min_proj_dist,
                "mode": cb.params().mode,
                "in_unit_cube": retained.retained,
                "path": path,
            });
            let record = ReportRecord::summary("build", inputs(cfg), "built", result)
                .with_metadata(metadata(start));
            emit(None, &line(&record)?)
        }
    }
}

#[derive(Debug, Serialize)]
struct CheckRow {
    check: String,
    pass: bool,
    value: f64,
    limit: f64,
}

fn verify(cfg: &RunConfig) -> Result<(), Failure> {
    let start = Instant::now();
    let path = cfg.input_path().expect("validated");
    // a document the loader refuses is a failed verification, not an I/O problem
    let cb = load_codebook(path).map_err(|e| match e {
        Failure::Library(err @ Error::Schema(_)) => Failure::Verification(err.to_string()),
        other => other,
    })?;
    let inv = cb.check_invariants();
    let mut rows = vec![
        CheckRow {
            check: "direction radii".into(),
            pass: inv.radius_ok,
            value: inv.max_radius_deviation,
            limit: TOL_RADIUS,
        },
        CheckRow {
            check: "path orthogonality".into(),
            pass: inv.orthogonality_ok,
            value: inv.max_path_inner_product,
            limit: TOL_ORTH,
        },
        CheckRow {
            check: "sibling separation".into(),
            pass: inv.sibling_failures == 0,
            value: inv.min_sibling_separation,
            limit: cb.params().min_proj_dist,
        },
    ];

    let r2: f64 = cb.params().radii.iter().map(|r| r * r).sum();
    let ids = cb.leaf_ids();
    let mut worst = 0f64;
    for id in &ids {
        let w = cb.codeword_vector(id)?;
        let d2: f64 = w
            .iter()
            .zip(cb.center())
            .map(|(a, c)| (a - c) * (a - c))
            .sum();
        worst = worst.max((d2 - r2).abs() / r2);
    }
    rows.push(CheckRow {
        check: "codeword radius".into(),
        pass: worst <= TOL_RADIUS,
        value: worst,
        limit: TOL_RADIUS,
    });

    if ids.len() >= 2 {
        let sep = cb.pairwise_projective_separation(None)?;
        rows.push(CheckRow {
            check: if sep.exhaustive {
                "projective separation".into()
            } else {
                format!(
                    "projective separation ({} sampled pairs)",
                    sep.pairs_checked
                )
            },
            pass: sep.min_sep >= sep.bound,
            value: sep.min_sep,
            limit: sep.bound,
        });
    }

    let t = cfg.t.unwrap_or_else(|| (cb.n() as f64).ln());
    let params = DecoderParams::custom(t)?;
    let mut accepted = 0usize;
    for id in &ids {
        let w = cb.codeword_vector(id)?;
        accepted += usize::from(identify(&w, &cb, id, &params)?.accepted);
    }
    rows.push(CheckRow {
        check: "noiseless self-identification".into(),
        pass: accepted == ids.len(),
        value: accepted as f64,
        limit: ids.len() as f64,
    });
    if cfg.t.is_some() && ids.len() >= 2 {
        let (tested, sent) = adversarial_pair(&cb, &ids)?;
        let d = identify(&cb.codeword_vector(&sent)?, &cb, &tested, &params)?;
        let distance = d.per_layer_distance.last().copied().unwrap_or(0.0);
        rows.push(CheckRow {
            check: format!("adversarial pair {tested} vs {sent} rejected"),
            pass: !d.accepted,
            value: distance,
            limit: t,
        });
    }

    let mut table = String::new();
    let width = rows.iter().map(|r| r.check.len()).max().unwrap_or(0);
    for r in &rows {
        let _ = writeln!(
            table,
            "{}  {:<width$}  {:.6e}  (limit {:.6e})",
            if r.pass { "PASS" } else { "FAIL" },
            r.check,
            r.value,
            r.limit
        );
    }
    let failures: Vec<&str> = rows
        .iter()
        .filter(|r| !r.pass)
        .map(|r| r.check.as_str())
        .collect();
    match &cfg.output {
        None => emit(None, &table)?,
        Some(path) => {
            eprint!("{table}");
            let payload = match cfg.format() {
                Format::Csv => csv_rows(&rows)?,
                Format::Json => {
                    let verdict = if failures.is_empty() { "pass" } else { "fail" };
                    let record = ReportRecord::summary("verify", inputs(cfg), verdict, json!(rows))
                        .with_metadata(metadata(start));
                    line(&record)?
                }
            };
            emit(Some(path), &payload)?;
        }
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verification(failures.join(", ")))
    }
}

fn csv_rows<T: Serialize>(rows: &[T]) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| io_error(Path::new("<csv>"), e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

fn channel(cfg: &RunConfig, n: usize) -> Result<ChannelModel, Failure> {
    Ok(match cfg.channel {
        ChannelName::Bernoulli => ChannelModel::bernoulli(n),
        ChannelName::Restricted => ChannelModel::restricted_bernoulli(n, cfg.a, cfg.b)?,
        ChannelName::Poisson => ChannelModel::poisson(n, cfg.peak)?,
    })
}

fn decoder(cfg: &RunConfig, n: usize) -> Result<DecoderParams, Failure> {
    let name = cfg.decoder.unwrap_or(match cfg.channel {
        ChannelName::Poisson => DecoderName::Poisson,
        _ => DecoderName::Capacity,
    });
    Ok(match name {
        DecoderName::Capacity => DecoderParams::capacity(n),
        DecoderName::Poisson => DecoderParams::poisson(n, cfg.peak),
        DecoderName::Rr => DecoderParams::rate_reliability(n, cfg.e.expect("validated")),
        DecoderName::Custom => DecoderParams::custom(cfg.t.expect("validated"))?,
    })
}

/// Moves a unit-cube codebook into the channel's box and keeps the words
/// that fit, trying `cfg.rotations` Haar rotations.
fn fit(
    cfg: &RunConfig,
    cb: &PrimitiveCodebook,
    input_box: &InputBox,
) -> Result<Expurgation, Failure> {
    let placed = if (input_box.lo, input_box.hi) == (0.0, 1.0) {
        cb.clone()
    } else {
        cb.affine_map(input_box.side(), vec![input_box.midpoint(); cb.n()])?
    };
    let first = cfg.rotation_seed.unwrap_or(0);
    Ok(if cfg.rotations == 0 {
        expurgate(&placed, input_box, first, false)?
    } else {
        let seeds: Vec<u64> = (0..cfg.rotations as u64)
            .map(|k| first.wrapping_add(k))
            .collect();
        expurgate_best(&placed, input_box, &seeds)?
    })
}

fn simulate(cfg: &RunConfig) -> Result<(), Failure> {
    let start = Instant::now();
    let cb = match cfg.input_path() {
        Some(path) => load_codebook(path)?,
        None => build_params(cfg)?,
    };
    let ch = channel(cfg, cb.n())?;
    let params = decoder(cfg, cb.n())?;
    let fitted = fit(cfg, &cb, &ch.input_box())?;
    let mut records = vec![ReportRecord::summary(
        "expurgation",
        inputs(cfg),
        "done",
        serde_json::to_value(&fitted.report)?,
    )];
    if fitted.retained.is_empty() {
        return Err(Failure::Placement(format!(
            "no codeword of the {} codebook fits the channel box after {} rotation(s); \
             try --mode explicit with smaller --radii",
            serde_json::to_value(cb.params().mode)?
                .as_str()
                .unwrap_or("given"),
            cfg.rotations.max(1)
        )));
    }
    let ids = &fitted.retained;
    if matches!(cfg.experiment, Experiment::Missed | Experiment::Both) {
        let est = estimate_missed_id(
            &fitted.codebook,
            &ch,
            &params,
            ids,
            cfg.trials,
            cfg.trial_seed,
        )?;
        records.push(ReportRecord::from_estimate("missed_id", inputs(cfg), &est));
    }
    if matches!(cfg.experiment, Experiment::False | Experiment::Both) {
        let sampling = match cfg.pairs {
            Pairs::Adversarial => PairSampling::AdversarialMinSep,
            Pairs::Random => PairSampling::Random,
        };
        let est = estimate_false_id(
            &fitted.codebook,
            &ch,
            &params,
            ids,
            &sampling,
            cfg.trials,
            derive(cfg.trial_seed, 1),
        )?;
        records.push(ReportRecord::from_estimate("false_id", inputs(cfg), &est));
    }
    let meta = metadata(start);
    let records: Vec<ReportRecord> = records
        .into_iter()
        .map(|r| r.with_metadata(meta.clone()))
        .collect();
    emit(
        cfg.output.as_deref(),
        &render_records(&records, cfg.format())?,
    )
}

#[derive(Debug, Serialize)]
struct RecordRow<'a> {
    experiment: &'a str,
    verdict: &'a str,
    p_hat: Option<f64>,
    ci_lo: Option<f64>,
    ci_hi: Option<f64>,
    bound: Option<f64>,
}

fn render_records(records: &[ReportRecord], format: Format) -> Result<String, Failure> {
    match format {
        Format::Json => records.iter().map(line).collect(),
        Format::Csv => csv_rows(
            &records
                .iter()
                .map(|r| RecordRow {
                    experiment: &r.experiment,
                    verdict: &r.verdict,
                    p_hat: r.p_hat,
                    ci_lo: r.ci.map(|c| c[0]),
                    ci_hi: r.ci.map(|c| c[1]),
                    bound: r.bound,
                })
                .collect::<Vec<_>>(),
        ),
    }
}

/// One row of the rate-reliability sweep.
#[derive(Debug, Serialize)]
struct SweepRow {
    n: usize,
    #[serde(rename = "L")]
    layers: usize,
    delta: f64,
    #[serde(rename = "E")]
    e: f64,
    t: f64,
    d: f64,
    status: String,
    n_retained: Option<usize>,
    linear_rate: Option<f64>,
    linearithmic_rate: Option<f64>,
    rr_lower_bound: Option<f64>,
    rr_converse: f64,
    lambda: f64,
}

fn sweep_rr(cfg: &RunConfig) -> Result<(), Failure> {
    let n = cfg.n.expect("validated");
    let ln_n = (n as f64).ln();
    let grid: Vec<f64> = match &cfg.e_grid {
        Some(g) => g.clone(),
        None => cfg.e_scale.iter().map(|c| c / ln_n).collect(),
    };
    let mut rows = Vec::with_capacity(grid.len());
    for e in grid {
        let t = (n as f64 * e).sqrt();
        let mut row = SweepRow {
            n,
            layers: cfg.layers,
            delta: cfg.delta,
            e,
            t,
            d: 3.0 * t,
            status: String::new(),
            n_retained: None,
            linear_rate: None,
            linearithmic_rate: None,
            rr_lower_bound: rr_lower_bound(n, cfg.delta, e, cfg.layers),
            rr_converse: rr_converse(e, 0.0),
            lambda: (-(n as f64) * e).exp2(),
        };
        match rr_build(n, cfg.layers, cfg.delta, e, cfg.branching(), cfg.build_seed) {
            Err(Error::RegimeViolation { limit, .. }) => {
                row.status = format!("regime_violation (E must be < {limit:.6})");
            }
            Err(err @ (Error::Infeasible { .. } | Error::PlacementExhausted { .. })) => {
                row.status = format!("infeasible: {err}");
            }
            Err(err) => return Err(err.into()),
            Ok((cb, _)) => {
                let fitted = fit(cfg, &cb, &InputBox::unit(n))?;
                if fitted.retained.is_empty() {
                    row.status = "no codeword fits the unit cube".into();
                    row.n_retained = Some(0);
                } else {
                    let rep = rate_report(&fitted.codebook, &fitted.report, Some(e))?;
                    row.status = "built".into();
                    row.n_retained = Some(rep.n_retained);
                    row.linear_rate = Some(rep.linear_rate);
                    row.linearithmic_rate = Some(rep.linearithmic_rate);
                }
            }
        }
        rows.push(row);
    }
    debug_assert!(rows
        .iter()
        .all(|r| r.e > 0.0 && rr_exponent_limit(n, cfg.delta) > 0.0));
    let payload = match cfg.format() {
        Format::Csv => csv_rows(&rows)?,
        Format::Json => rows
            .iter()
            .map(|r| {
                let rec = ReportRecord::summary(
                    "sweep_rr",
                    inputs(cfg),
                    &r.status,
                    serde_json::to_value(r)?,
                );
                line(&rec)
            })
            .collect::<Result<String, Failure>>()?,
    };
    emit(cfg.output.as_deref(), &payload)
}

#[derive(Debug, Serialize)]
struct ReductionRow {
    x: f64,
    expected: f64,
    reduced: f64,
    direct: f64,
    binomial_p_value: f64,
    two_sample_p_value: f64,
}

fn reduce_demo(cfg: &RunConfig) -> Result<(), Failure> {
    let start = Instant::now();
    let spec = poisson_to_bernoulli_reduction(cfg.peak)?;
    let trials = usize::try_from(cfg.trials).map_err(|_| UsageError {
        flag: "--trials".into(),
        message: "too large for this platform".into(),
    })?;
    if trials == 0 {
        return Err(Error::NoTrials.into());
    }
    // one block of `trials` independent letters per input value
    let poisson = ChannelModel::poisson(trials, cfg.peak)?;
    let bernoulli = ChannelModel::bernoulli(trials);
    let mut records = Vec::new();
    let mut rows = Vec::new();
    for (k, &x) in cfg.x.iter().enumerate() {
        let p = (spec.induced_param)(x);
        let seed = derive(cfg.trial_seed, k as u64);
        let reduced = apply_reduction(&spec, &poisson.transmit(&vec![x; trials], seed)?);
        let ones = reduced.iter().map(|&b| u64::from(b)).sum::<u64>();
        let direct = bernoulli.transmit(&vec![p; trials], derive(seed, 1))?;
        let direct_ones = direct.iter().filter(|&&y| y == 1.0).count() as u64;
        let n = trials as u64;
        let row = ReductionRow {
            x,
            expected: p,
            reduced: ones as f64 / n as f64,
            direct: direct_ones as f64 / n as f64,
            binomial_p_value: binomial_test_two_sided(ones, n, p),
            two_sample_p_value: chi_square_two_sample(ones, n, direct_ones, n),
        };
        let consistent =
            row.binomial_p_value > REDUCTION_ALPHA && row.two_sample_p_value > REDUCTION_ALPHA;
        let (lo, hi) = clopper_pearson(ones, n, CONFIDENCE);
        let mut rec = ReportRecord::summary(
            "reduce_demo",
            inputs(cfg),
            if consistent {
                "consistent"
            } else {
                "inconsistent"
            },
            serde_json::to_value(&row)?,
        );
        rec.p_hat = Some(row.reduced);
        rec.ci = Some([lo, hi]);
        records.push(rec);
        rows.push(row);
    }
    let payload = match cfg.format() {
        Format::Csv => csv_rows(&rows)?,
        Format::Json => {
            let meta = metadata(start);
            records
                .into_iter()
                .map(|r| line(&r.with_metadata(meta.clone())))
                .collect::<Result<String, Failure>>()?
        }
    };
    emit(cfg.output.as_deref(), &payload)
}

fn report(cfg: &RunConfig) -> Result<(), Failure> {
    let mut records = Vec::new();
    for path in &cfg.input {
        let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
        for (i, l) in text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
        {
            let rec: ReportRecord = serde_json::from_str(l).map_err(|e| {
                Failure::Library(Error::Schema(format!("{}:{}: {e}", path.display(), i + 1)))
            })?;
            records.push(rec);
        }
    }
    let exceeded: Vec<&ReportRecord> = records.iter().filter(|r| r.verdict == "exceeded").collect();
    let payload = match cfg.format() {
        Format::Csv => render_records(&records, Format::Csv)?,
        Format::Json => {
            let mut counts = serde_json::Map::new();
            for r in &records {
                let c = counts.entry(r.verdict.clone()).or_insert(json!(0));
                *c = json!(c.as_u64().unwrap_or(0) + 1);
            }
            let summary = json!({
                "records": records.len(),
                "verdicts": counts,
                "exceeded": exceeded.iter().map(|r| &r.experiment).collect::<Vec<_>>(),
            });
            serde_json::to_string(&summary)? + "\n"
        }
    };
    emit(cfg.output.as_deref(), &payload)?;
    if cfg.check && !exceeded.is_empty() {
        return Err(Failure::Verification(format!(
            "{} record(s) exceed their bound",
            exceeded.len()
        )));
    }
    Ok(())
}
