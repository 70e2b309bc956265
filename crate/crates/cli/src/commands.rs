use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use dddm::analytics::{
    summarize, sweep_concurrent_span, sweep_svg, sweep_visit_counts, sweep_within_span,
    temporal_analysis, temporal_svg, write_sweep_csv, write_temporal_csv, SweepKind, TemporalSpec,
    DEFAULT_WITHIN_SPANS,
};
use dddm::detect::{
    aggregate_windows, condition_status, mhsu_status_basic, mhsu_status_broad, SpanCheck,
};
use dddm::ingest::{parse_dataset, read_status_table, write_dataset, write_status_table};
use dddm::simgen::{default_cohorts, generate_sample, Placement};
use dddm::split::{split_by_id, split_by_time};
use dddm::{DddmParams, RawParams, VisitRecord};
use dddm_service::ServiceConfig;

use crate::error::CliError;
use crate::output::{open, to_json, write_atomic, Sink};
use crate::{
    Cli, Command, DetectArgs, Format, ParamArgs, PlacementArg, ServeArgs, SimulateArgs, SplitArgs,
    SummarizeArgs, SummaryFormat, SweepArgs, SweepKindArg, TemporalArgs,
};

const SAMPLE: &str = "sample.csv";
const STATUS: &str = "status.csv";

pub fn run(cli: Cli) -> Result<(), CliError> {
    let dir = cli.out_dir.as_path();
    match cli.command {
        Command::Simulate(args) => simulate(dir, args),
        Command::DetectMh(args) => detect(dir, Mode::Mh, args),
        Command::DetectSu(args) => detect(dir, Mode::Su, args),
        Command::DetectBasic(args) => detect(dir, Mode::Basic, args),
        Command::DetectBroad(args) => detect(dir, Mode::Broad, args),
        Command::Summarize(args) => summarize_table(dir, args),
        Command::Sweep(args) => sweep(dir, args),
        Command::Temporal(args) => temporal(dir, args),
        Command::Split(args) => split(dir, args),
        Command::Serve(args) => serve(args),
    }
}

fn input_path(explicit: Option<PathBuf>, dir: &Path, default_name: &str) -> PathBuf {
    explicit.unwrap_or_else(|| dir.join(default_name))
}

fn load_dataset(path: &Path) -> Result<Vec<VisitRecord>, CliError> {
    let parsed = parse_dataset(open(path)?).map_err(|e| match CliError::from(e) {
        CliError::Validation(m) => CliError::Validation(format!("{}: {m}", path.display())),
        other => other,
    })?;
    for warning in &parsed.warnings {
        log::warn!("{}: {warning}", path.display());
    }
    Ok(parsed.records)
}

/// Expands `--icd-*` values: each is a comma-separated list or `@file`.
fn code_list(values: &[String], flag: &str) -> Result<Option<Vec<String>>, CliError> {
    if values.is_empty() {
        return Ok(None);
    }
    let mut codes = Vec::new();
    for value in values {
        if let Some(file) = value.strip_prefix('@') {
            let text =
                fs::read_to_string(file).map_err(|e| CliError::io(format!("{flag} {value}"), e))?;
            codes.extend(
                text.lines()
                    .map(str::trim)
                    .filter(|l| !l.is_empty() && !l.starts_with('#'))
                    .map(str::to_string),
            );
        } else {
            codes.extend(
                value
                    .split(',')
                    .map(str::trim)
                    .filter(|c| !c.is_empty())
                    .map(str::to_string),
            );
        }
    }
    Ok(Some(codes))
}

impl ParamArgs {
    fn resolve(&self, defaults: &DddmParams) -> Result<DddmParams, CliError> {
        let raw = RawParams {
            n_mhh: self.n_mhh,
            n_mhp: self.n_mhp,
            n_suh: self.n_suh,
            n_sup: self.n_sup,
            t_mh: self.t_mh,
            t_su: self.t_su,
            t_mhsu: self.t_mhsu,
            icd_mh: code_list(&self.icd_mh, "--icd-mh")?,
            icd_su: code_list(&self.icd_su, "--icd-su")?,
        };
        let params = raw.resolve(defaults)?;
        for warning in params.validate()? {
            log::warn!("{warning}");
        }
        Ok(params)
    }
}

fn simulate(dir: &Path, args: SimulateArgs) -> Result<(), CliError> {
    let placement = match (args.placement, args.seed) {
        (None | Some(PlacementArg::Deterministic), None) => Placement::Deterministic,
        (None | Some(PlacementArg::SeededUniform), Some(seed)) => Placement::SeededUniform { seed },
        (Some(PlacementArg::SeededUniform), None) => {
            return Err(CliError::Validation(
                "--placement seeded-uniform needs --seed".into(),
            ))
        }
        (Some(PlacementArg::Deterministic), Some(_)) => {
            return Err(CliError::Validation(
                "--seed only applies to --placement seeded-uniform".into(),
            ))
        }
    };
    let records = generate_sample(&default_cohorts(), placement)?;
    let ext = if args.format == Format::Json {
        "sample.json"
    } else {
        SAMPLE
    };
    let sink = Sink::resolve(args.out.as_deref(), dir, ext);
    match args.format {
        Format::Csv => sink.write_with(|buf| write_dataset(&records, buf))?,
        Format::Json => sink.write_bytes(&to_json(&records)?)?,
    }
    eprintln!(
        "wrote {} visit records to {}",
        records.len(),
        sink.describe()
    );
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Mh,
    Su,
    Basic,
    Broad,
}

fn detect(dir: &Path, mode: Mode, args: DetectArgs) -> Result<(), CliError> {
    let defaults = match mode {
        Mode::Broad => DddmParams {
            t_mhsu: 360,
            ..DddmParams::default()
        },
        _ => DddmParams::default(),
    };
    let params = args.params.resolve(&defaults)?;
    let records = load_dataset(&input_path(args.input, dir, SAMPLE))?;
    let rows = match mode {
        Mode::Mh => condition_status(&records, &params.mh_criteria())?,
        Mode::Su => condition_status(&records, &params.su_criteria())?,
        Mode::Basic => {
            let check = if args.force {
                SpanCheck::Force
            } else {
                SpanCheck::Enforce
            };
            mhsu_status_basic(&records, &params, check)?
        }
        Mode::Broad => mhsu_status_broad(&records, &params)?,
    };
    let default_name = if args.format == Format::Json {
        "status.json"
    } else {
        STATUS
    };
    let sink = Sink::resolve(args.out.as_deref(), dir, default_name);
    match args.format {
        Format::Csv => sink.write_with(|buf| write_status_table(&rows, buf))?,
        Format::Json => sink.write_bytes(&to_json(&rows)?)?,
    }
    eprintln!("wrote {} status rows to {}", rows.len(), sink.describe());
    Ok(())
}

fn summarize_table(dir: &Path, args: SummarizeArgs) -> Result<(), CliError> {
    let path = input_path(args.input, dir, STATUS);
    let mut rows = read_status_table(open(&path)?).map_err(|e| match CliError::from(e) {
        CliError::Validation(m) => CliError::Validation(format!("{}: {m}", path.display())),
        other => other,
    })?;
    if args.aggregate {
        rows = aggregate_windows(&rows);
    } else if rows.iter().any(|r| r.window_index.is_some()) {
        log::warn!(
            "{} holds windowed rows; counts are per window row (use --aggregate for per client)",
            path.display()
        );
    }
    let stats = summarize(&rows);
    for warning in &stats.warnings {
        log::warn!("{warning}");
    }
    let bytes = match args.format {
        SummaryFormat::Text => stats.render_table().into_bytes(),
        SummaryFormat::Json => to_json(&stats)?,
    };
    let sink = match args.out {
        Some(p) => Sink::resolve(Some(&p), dir, ""),
        None => Sink::Stdout,
    };
    sink.write_bytes(&bytes)
}

fn sweep(dir: &Path, args: SweepArgs) -> Result<(), CliError> {
    let kind = match args.kind {
        SweepKindArg::WithinSpan => SweepKind::WithinSpan,
        SweepKindArg::VisitCount => SweepKind::VisitCount,
        SweepKindArg::ConcurrentSpan => SweepKind::ConcurrentSpan,
    };
    let base = args.params.resolve(&kind.default_base())?;
    let grid = args.grid.unwrap_or_else(|| kind.default_grid());
    let records = load_dataset(&input_path(args.input, dir, SAMPLE))?;
    let series = match kind {
        SweepKind::WithinSpan => vec![sweep_within_span(&records, &base, &grid)?],
        SweepKind::VisitCount => vec![sweep_visit_counts(&records, &base, &grid, args.ratio)?],
        SweepKind::ConcurrentSpan => {
            let spans = args
                .within_spans
                .unwrap_or_else(|| DEFAULT_WITHIN_SPANS.to_vec());
            sweep_concurrent_span(&records, &base, &spans, &grid)?
        }
    };
    let ext = if args.format == Format::Json {
        "json"
    } else {
        "csv"
    };
    let sink = Sink::resolve(args.out.as_deref(), dir, &format!("sweep-{kind}.{ext}"));
    match args.format {
        Format::Csv => sink.write_with(|buf| write_sweep_csv(&series, buf))?,
        Format::Json => sink.write_bytes(&to_json(&series)?)?,
    }
    eprintln!("wrote {} series to {}", series.len(), sink.describe());
    if let Some(svg) = args.svg {
        write_atomic(&svg, sweep_svg(&series).as_bytes())?;
    }
    Ok(())
}

fn temporal(dir: &Path, args: TemporalArgs) -> Result<(), CliError> {
    let spec = TemporalSpec {
        unit: args.unit,
        span: args.span,
        statistic: args.statistic,
    };
    let params = args.params.resolve(&DddmParams::default())?;
    let records = load_dataset(&input_path(args.input, dir, SAMPLE))?;
    let check = if args.force {
        SpanCheck::Force
    } else {
        SpanCheck::Enforce
    };
    let result = temporal_analysis(&records, &params, &spec, check).map_err(|e| match e {
        dddm::Error::SpanExceedsConcurrentWindow { span_days, t_mhsu } => CliError::Validation(format!(
            "--t-mhsu: a {span_days}-day bucket is wider than {t_mhsu} days; raise --t-mhsu, pick a finer --unit, or pass --force"
        )),
        other => other.into(),
    })?;
    for warning in &result.warnings {
        log::warn!("{warning}");
    }
    let ext = if args.format == Format::Json {
        "json"
    } else {
        "csv"
    };
    let sink = Sink::resolve(args.out.as_deref(), dir, &format!("temporal.{ext}"));
    match args.format {
        Format::Csv => sink.write_with(|buf| write_temporal_csv(&result, buf))?,
        Format::Json => sink.write_bytes(&to_json(&result)?)?,
    }
    eprintln!(
        "wrote {} buckets to {}",
        result.buckets.len(),
        sink.describe()
    );
    if let Some(svg) = args.svg {
        write_atomic(&svg, temporal_svg(&result).as_bytes())?;
    }
    Ok(())
}

fn chunk_bytes(records: &[VisitRecord]) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    write_dataset(records, &mut buf)?;
    Ok(buf)
}

fn split(dir: &Path, args: SplitArgs) -> Result<(), CliError> {
    let path = input_path(args.input, dir, SAMPLE);
    let records = load_dataset(&path)?;
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("chunk")
        .to_string();
    let flag = |e: dddm::Error, name: &str| match e {
        dddm::Error::InvalidParams(fields) => CliError::Validation(
            fields
                .iter()
                .map(|f| format!("{name}: {}", f.message))
                .collect::<Vec<_>>()
                .join("; "),
        ),
        other => other.into(),
    };

    let mut files: Vec<(PathBuf, Vec<u8>, usize)> = Vec::new();
    if let Some(n) = args.by_id {
        let chunks = split_by_id(&records, n).map_err(|e| flag(e, "--by-id"))?;
        let width = chunks.len().to_string().len().max(2);
        for (i, chunk) in chunks.iter().enumerate() {
            let name = format!("{stem}_id{:0width$}.csv", i + 1);
            files.push((dir.join(name), chunk_bytes(chunk)?, chunk.len()));
        }
    } else if let Some(t) = args.by_time {
        let chunks =
            split_by_time(&records, t, args.strict_appendix).map_err(|e| flag(e, "--by-time"))?;
        let width = chunks
            .last()
            .map_or(1, |c| c.index.to_string().len())
            .max(2);
        for chunk in &chunks {
            let name = format!("{stem}_time{:0width$}.csv", chunk.index);
            files.push((
                dir.join(name),
                chunk_bytes(&chunk.records)?,
                chunk.records.len(),
            ));
        }
    }
    for (file, bytes, rows) in &files {
        write_atomic(file, bytes)?;
        println!("{}\t{rows}", file.display());
    }
    eprintln!("wrote {} chunk files", files.len());
    Ok(())
}

fn serve(args: ServeArgs) -> Result<(), CliError> {
    let config = ServiceConfig {
        addr: args.addr,
        body_limit: args.body_limit_mb.saturating_mul(1024 * 1024),
        compute_timeout: Duration::from_secs(args.timeout_secs),
        spill_dir: args.spill_dir,
    };
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| CliError::Internal(e.to_string()))?;
    runtime
        .block_on(dddm_service::serve(config))
        .map_err(|e| CliError::io(format!("serving on {}", args.addr), e))
}
