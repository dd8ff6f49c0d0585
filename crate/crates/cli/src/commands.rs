use brier_core::ar1::{generate_synthetic, threshold_sweep, Ar1Model, SeasonalModel, Sweep};
use brier_core::report::{ResultDocument, SCHEMA_VERSION};
use brier_core::simlab::{
    convergence_study, coverage, run_experiment, summarize_trials, true_components,
    ConvergenceStudy, Truths,
};
use brier_core::{BinningScheme, Estimator};
use serde::Serialize;

use crate::args::{Ar1Args, DecomposeArgs, Format, Mode, SimulateArgs};
use crate::error::{CliError, CliResult};
use crate::input::{parse_list, parse_thresholds, read_daily, read_forecasts};

fn json<T: Serialize>(value: &T) -> CliResult<String> {
    let mut out = serde_json::to_string_pretty(value)?;
    out.push('\n');
    Ok(out)
}

fn csv_rows<T: Serialize>(rows: &[T]) -> CliResult<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        writer.serialize(row)?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| CliError::Internal(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Internal(e.to_string()))
}

/// Flattens a JSON value into `path,value` lines with dotted paths.
fn flatten(prefix: &str, value: &serde_json::Value, out: &mut Vec<(String, String)>) {
    use serde_json::Value;
    let join = |key: &str| {
        if prefix.is_empty() {
            key.to_string()
        } else {
            format!("{prefix}.{key}")
        }
    };
    match value {
        Value::Object(map) => map.iter().for_each(|(k, v)| flatten(&join(k), v, out)),
        Value::Array(items) => items
            .iter()
            .enumerate()
            .for_each(|(i, v)| flatten(&join(&i.to_string()), v, out)),
        Value::Null => out.push((prefix.to_string(), String::new())),
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

pub fn decompose(args: &DecomposeArgs) -> CliResult<String> {
    let scheme = match (&args.edges, args.bins) {
        (Some(edges), _) => BinningScheme::from_edges(parse_list("--edges", edges)?)?,
        (None, Some(bins)) => BinningScheme::equal_width(bins)?,
        (None, None) => {
            return Err(CliError::Usage(
                "one of --bins or --edges is required".into(),
            ))
        }
    };
    let series = read_forecasts(&args.input)?;
    let doc = ResultDocument::build(&series, &scheme);
    match args.format {
        Format::Json => json(&doc),
        Format::Csv => {
            let mut fields = Vec::new();
            flatten("", &serde_json::to_value(&doc)?, &mut fields);
            #[derive(Serialize)]
            struct Field<'a> {
                field: &'a str,
                value: &'a str,
            }
            let rows: Vec<Field> = fields
                .iter()
                .map(|(field, value)| Field { field, value })
                .collect();
            csv_rows(&rows)
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Table1Row {
    pub estimator: Estimator,
    pub truth: f64,
    pub sample_variance: f64,
    pub mean_estimated_variance: f64,
    pub variance_ratio: f64,
    pub mean_squared_error: f64,
    pub mean_bias: f64,
}

#[derive(Debug, Serialize)]
pub struct CoverageRow {
    pub estimator: Estimator,
    pub truth: f64,
    pub covered: usize,
    pub fraction: f64,
}

#[derive(Debug, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SimulationReport {
    Table1 {
        schema_version: u32,
        seed: u64,
        trials: usize,
        n: usize,
        truths: Truths,
        rows: Vec<Table1Row>,
    },
    Coverage {
        schema_version: u32,
        seed: u64,
        trials: usize,
        n: usize,
        k: f64,
        truths: Truths,
        rows: Vec<CoverageRow>,
    },
    Convergence {
        schema_version: u32,
        seed: u64,
        grid: Vec<usize>,
        #[serde(flatten)]
        study: ConvergenceStudy,
    },
}

fn parse_grid(text: Option<&str>) -> CliResult<Vec<usize>> {
    let text = text.ok_or_else(|| CliError::Usage("convergence mode needs --grid".into()))?;
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Usage(format!("--grid: `{s}` is not a positive integer")))
        })
        .collect()
}

pub fn simulate(args: &SimulateArgs) -> CliResult<String> {
    let truths = true_components();
    let report = match args.mode {
        Mode::Table1 => {
            let records = run_experiment(args.trials, args.n, args.seed)?;
            let summary = summarize_trials(&records, &truths)?;
            let rows = Estimator::ALL
                .iter()
                .map(|&e| {
                    let s = summary.estimators[e];
                    Table1Row {
                        estimator: e,
                        truth: truths.for_estimator(e),
                        sample_variance: s.sample_variance,
                        mean_estimated_variance: s.mean_estimated_variance,
                        variance_ratio: s.mean_estimated_variance / s.sample_variance,
                        mean_squared_error: s.mean_squared_error,
                        mean_bias: s.mean_bias,
                    }
                })
                .collect();
            SimulationReport::Table1 {
                schema_version: SCHEMA_VERSION,
                seed: args.seed,
                trials: args.trials,
                n: args.n,
                truths,
                rows,
            }
        }
        Mode::Coverage => {
            let records = run_experiment(args.trials, args.n, args.seed)?;
            let covered = coverage(&records, &truths, args.k)?;
            let rows = Estimator::ALL
                .iter()
                .map(|&e| CoverageRow {
                    estimator: e,
                    truth: truths.for_estimator(e),
                    covered: covered[e],
                    fraction: covered[e] as f64 / args.trials as f64,
                })
                .collect();
            SimulationReport::Coverage {
                schema_version: SCHEMA_VERSION,
                seed: args.seed,
                trials: args.trials,
                n: args.n,
                k: args.k,
                truths,
                rows,
            }
        }
        Mode::Convergence => {
            let grid = parse_grid(args.grid.as_deref())?;
            let study = convergence_study(&grid, args.trials, args.seed)?;
            SimulationReport::Convergence {
                schema_version: SCHEMA_VERSION,
                seed: args.seed,
                grid,
                study,
            }
        }
    };
    match args.format {
        Format::Json => json(&report),
        Format::Csv => simulation_csv(&report),
    }
}

fn simulation_csv(report: &SimulationReport) -> CliResult<String> {
    match report {
        SimulationReport::Table1 { rows, .. } => csv_rows(rows),
        SimulationReport::Coverage { rows, .. } => csv_rows(rows),
        SimulationReport::Convergence { study, .. } => {
            // one row per grid size, then the fitted slopes
            let mut out = String::from("n");
            for e in Estimator::ALL {
                out.push(',');
                out.push_str(e.name());
            }
            out.push('\n');
            let rows = study
                .points
                .iter()
                .map(|p| (p.n.to_string(), &p.mean_abs_difference))
                .chain(std::iter::once(("slope".to_string(), &study.slopes)));
            for (label, values) in rows {
                out.push_str(&label);
                for e in Estimator::ALL {
                    out.push_str(&format!(",{}", values[e]));
                }
                out.push('\n');
            }
            Ok(out)
        }
    }
}

#[derive(Debug, Serialize)]
pub struct SweepTableRow {
    pub threshold: f64,
    pub n: usize,
    pub brier: f64,
    pub brier_se: Option<f64>,
    pub rel: f64,
    pub res: f64,
    pub unc: f64,
    pub rel_bc: Option<f64>,
    pub res_bc: Option<f64>,
    pub unc_bc: Option<f64>,
    pub gamma: Option<f64>,
    pub rel_cc: Option<f64>,
    pub res_cc: Option<f64>,
    pub unc_cc: Option<f64>,
    pub var_rel: f64,
    pub var_res: f64,
    pub var_unc: f64,
    pub var_rel_bc: Option<f64>,
    pub var_res_bc: Option<f64>,
    pub var_unc_bc: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct FitSummary {
    pub alpha: f64,
    pub sigma: f64,
    pub beta: [f64; 5],
}

#[derive(Debug, Serialize)]
pub struct SweepReport {
    pub schema_version: u32,
    pub source: &'static str,
    pub fit: FitSummary,
    pub bins: usize,
    pub skipped: usize,
    pub rows: Vec<SweepTableRow>,
}

impl SweepReport {
    fn new(source: &'static str, sweep: Sweep) -> Self {
        let rows = sweep
            .rows
            .into_iter()
            .map(|r| {
                let d = &r.decompositions;
                let bc = d.bias_corrected.as_ref();
                let cc = d.consistency_corrected.as_ref();
                let v = &r.variances;
                let vbc = v.bias_corrected.as_ref();
                SweepTableRow {
                    threshold: r.threshold,
                    n: r.n,
                    brier: r.brier.score,
                    brier_se: r.brier.standard_error,
                    rel: d.traditional.rel,
                    res: d.traditional.res,
                    unc: d.traditional.unc,
                    rel_bc: bc.map(|x| x.rel),
                    res_bc: bc.map(|x| x.res),
                    unc_bc: bc.map(|x| x.unc),
                    gamma: cc.and_then(|x| x.gamma),
                    rel_cc: cc.map(|x| x.rel),
                    res_cc: cc.map(|x| x.res),
                    unc_cc: cc.map(|x| x.unc),
                    var_rel: v.traditional.rel,
                    var_res: v.traditional.res,
                    var_unc: v.traditional.unc,
                    var_rel_bc: vbc.map(|x| x.rel),
                    var_res_bc: vbc.map(|x| x.res),
                    var_unc_bc: vbc.map(|x| x.unc),
                }
            })
            .collect();
        SweepReport {
            schema_version: SCHEMA_VERSION,
            source,
            fit: FitSummary {
                alpha: sweep.ar1.alpha,
                sigma: sweep.ar1.sigma,
                beta: sweep.seasonal.coefficients,
            },
            bins: sweep.bins,
            skipped: sweep.skipped,
            rows,
        }
    }
}

pub fn ar1(args: &Ar1Args) -> CliResult<String> {
    let thresholds = parse_thresholds(&args.thresholds)?;
    let (source, train, test) = if args.synthetic {
        let beta = parse_list("--beta", &args.beta)?;
        let beta: [f64; 5] = beta
            .try_into()
            .map_err(|_| CliError::Usage("--beta needs exactly five coefficients".into()))?;
        if args.days < 4 {
            return Err(CliError::Usage("--days must be at least 4".into()));
        }
        let model = Ar1Model::new(args.alpha, args.sigma)?;
        let series = generate_synthetic(&SeasonalModel::new(beta), &model, args.days, args.seed)?;
        let (train, test) = series.split_at_day((args.days / 2) as i64);
        ("synthetic", train, test)
    } else if let (Some(train), Some(test)) = (&args.train, &args.test) {
        ("files", read_daily(train)?, read_daily(test)?)
    } else if let Some(input) = &args.input {
        let series = read_daily(input)?;
        let days = series.days();
        let split = args
            .split_day
            .unwrap_or_else(|| days[0] + (days[days.len() - 1] - days[0] + 1) / 2);
        let (train, test) = series.split_at_day(split);
        if train.is_empty() || test.is_empty() {
            return Err(CliError::Usage(format!(
                "--split-day {split} leaves an empty training or test part"
            )));
        }
        ("split", train, test)
    } else {
        return Err(CliError::Usage(
            "give --synthetic, --train with --test, or --input".into(),
        ));
    };
    let report = SweepReport::new(
        source,
        threshold_sweep(&train, &test, &thresholds, args.bins)?,
    );
    match args.format {
        Format::Json => json(&report),
        Format::Csv => {
            let b = report.fit.beta;
            let mut out = format!(
                "# alpha={}\n# sigma={}\n# beta={};{};{};{};{}\n# skipped={}\n",
                report.fit.alpha, report.fit.sigma, b[0], b[1], b[2], b[3], b[4], report.skipped
            );
            out.push_str(&csv_rows(&report.rows)?);
            Ok(out)
        }
    }
}
