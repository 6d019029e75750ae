use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde_json::{json, Map, Value};
use ssamt_core::simulation::{run_replication, StudyConfig};
use ssamt_core::*;

use crate::cli::{
    rule_name, DenoiseArgs, ImputeArgs, InputArgs, Method, PreprocessArgs, SimulateArgs, TestArgs, TestChoice,
};
use crate::io::{read_table, write_table, CsvOptions, Table};
use crate::report::*;

struct Input {
    label: String,
    table: Table,
}

fn file_label(path: &Path) -> String {
    path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned())
}

fn csv_options(io: &InputArgs, group_column: Option<&String>) -> CsvOptions {
    let mut label_columns = io.label_column.clone();
    if let Some(g) = group_column {
        if !label_columns.contains(g) {
            label_columns.push(g.clone());
        }
    }
    CsvOptions {
        index_column: io.index_column,
        label_columns,
    }
}

fn load(io: &InputArgs, options: &CsvOptions) -> Result<Vec<Input>> {
    io.inputs
        .iter()
        .map(|p| {
            let table = read_table(p, options)?;
            if table.numeric().next().is_none() {
                bail!("{}: no numeric columns", p.display());
            }
            Ok(Input {
                label: file_label(p),
                table,
            })
        })
        .collect()
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn denoised_paths(dir: &Path, n: usize) -> Vec<PathBuf> {
    if n == 1 {
        vec![dir.join("denoised.csv")]
    } else {
        (1..=n).map(|i| dir.join(format!("denoised_{i}.csv"))).collect()
    }
}

/// Values a model may be fitted on: the series up to its last observation.
fn fit_values<'a>(s: &'a TimeSeries, source: &str) -> Result<&'a [f64]> {
    s.complete_prefix().map_err(|e| match e {
        Error::MissingValues(_) => anyhow::anyhow!(
            "{source}: column {:?} has missing values; run `ssamt impute` first",
            s.name()
        ),
        other => anyhow::anyhow!("{source}: column {:?}: {other}", s.name()),
    })
}

fn qualified(prefix: &Option<String>, name: &str) -> String {
    match prefix {
        Some(p) => format!("{p}:{name}"),
        None => name.to_string(),
    }
}

fn keyed(entries: &[(String, usize)]) -> Value {
    Value::Object(entries.iter().map(|(k, v)| (k.clone(), json!(v))).collect::<Map<_, _>>())
}

/// A bare number for a single entry, otherwise an object keyed by name.
fn collapse(entries: &[(String, usize)]) -> Value {
    match entries {
        [] => Value::Null,
        [(_, v)] => json!(v),
        _ => keyed(entries),
    }
}

/// A bare number when every entry agrees.
fn window_value(entries: &[(String, usize)]) -> Value {
    match entries.first() {
        None => Value::Null,
        Some((_, first)) if entries.iter().all(|(_, v)| v == first) => json!(first),
        _ => keyed(entries),
    }
}

fn diagnose(name: String, observed: &[f64], denoised: &[f64], window: usize, warnings: &mut Vec<String>) -> VariableDiagnostics {
    let score = match goodness_of_denoising(observed, denoised) {
        Ok(s) => Some(s),
        Err(e) => {
            warnings.push(format!("{name}: goodness of denoising undefined ({e})"));
            None
        }
    };
    let residual: Vec<f64> = observed.iter().zip(denoised).map(|(y, f)| y - f).collect();
    let rho = match w_correlation(denoised, &residual, window) {
        Ok(r) => Some(r),
        Err(e) => {
            warnings.push(format!("{name}: w-correlation undefined ({e})"));
            None
        }
    };
    VariableDiagnostics::with_score(name, score, rho)
}

struct Preprocessed {
    tables: Vec<Table>,
    preprocessing: Preprocessing,
    diagnostics: Diagnostics,
    warnings: Vec<String>,
}

fn preprocess(inputs: &[Input], pre: &PreprocessArgs) -> Result<Preprocessed> {
    let rule = pre.rank.rule();
    let multi = inputs.len() > 1;
    let mut tables = Vec::new();
    let mut windows = Vec::new();
    let mut ranks = Vec::new();
    let mut diagnostics = Diagnostics::default();
    let mut warnings = Vec::new();
    if pre.per_group && pre.method != Method::Mssa {
        warnings.push("--per-group only affects --method mssa; ignored".into());
    }
    for input in inputs {
        let prefix = multi.then(|| input.label.clone());
        match pre.method {
            Method::None => tables.push(input.table.clone()),
            Method::Ssa => {
                let series: Vec<&TimeSeries> = input.table.numeric().collect();
                let results: Vec<Result<(TimeSeries, usize, usize)>> = series
                    .par_iter()
                    .map(|s| {
                        let n = fit_values(s, &input.label)?.len();
                        let window = pre.window.unwrap_or(n / 2);
                        let (out, r) = ssa_denoise_with(s, window, rule)
                            .with_context(|| format!("{}: column {:?}, L = {window}", input.label, s.name()))?;
                        Ok((out, window, r))
                    })
                    .collect();
                let mut outputs = Vec::new();
                for (s, res) in series.iter().zip(results) {
                    let (out, window, r) = res?;
                    let name = qualified(&prefix, s.name());
                    let n = s.effective_len();
                    diagnostics.variables.push(diagnose(
                        name.clone(),
                        &s.values()[..n],
                        &out.values()[..n],
                        window,
                        &mut warnings,
                    ));
                    windows.push((name.clone(), window));
                    ranks.push((name, r));
                    outputs.push(out);
                }
                tables.push(input.table.with_numeric(&MultiSeries::new(outputs)?));
            }
            Method::Mssa => {
                let (table, stack_windows, stack_ranks) = if pre.per_group {
                    mssa_per_group(input, pre, rule, &mut diagnostics, &mut warnings, &prefix)?
                } else {
                    mssa_joint(input, pre, rule, &mut diagnostics, &mut warnings, &prefix)?
                };
                tables.push(table);
                windows.extend(stack_windows);
                ranks.extend(stack_ranks);
            }
        }
    }
    let rank = match pre.method {
        Method::None => Value::Null,
        Method::Ssa => keyed(&ranks),
        Method::Mssa => collapse(&ranks),
    };
    Ok(Preprocessed {
        tables,
        preprocessing: Preprocessing {
            method: pre.method.as_str().into(),
            window: window_value(&windows),
            rank,
        },
        diagnostics,
        warnings,
    })
}

type StackOutcome = (Table, Vec<(String, usize)>, Vec<(String, usize)>);

fn mssa_joint(
    input: &Input,
    pre: &PreprocessArgs,
    rule: RankRule,
    diagnostics: &mut Diagnostics,
    warnings: &mut Vec<String>,
    prefix: &Option<String>,
) -> Result<StackOutcome> {
    let series: Vec<&TimeSeries> = input.table.numeric().collect();
    let mut shortest = usize::MAX;
    for s in &series {
        shortest = shortest.min(fit_values(s, &input.label)?.len());
    }
    let window = pre.window.unwrap_or(shortest / 2);
    let ms = input.table.multi_series()?;
    let (out, r) = mssa_denoise_with(&ms, window, rule).with_context(|| format!("{}: joint MSSA, L = {window}", input.label))?;
    for (s, d) in series.iter().zip(out.series()) {
        let n = s.effective_len();
        diagnostics
            .variables
            .push(diagnose(qualified(prefix, s.name()), &s.values()[..n], &d.values()[..n], window, warnings));
    }
    let key = prefix.clone().unwrap_or_else(|| "all".into());
    Ok((input.table.with_numeric(&out), vec![(key.clone(), window)], vec![(key, r)]))
}

fn group_rows(labels: &[String]) -> Vec<(String, Vec<usize>)> {
    let mut groups: Vec<(String, Vec<usize>)> = Vec::new();
    for (i, l) in labels.iter().enumerate() {
        if l.is_empty() {
            continue;
        }
        match groups.iter_mut().find(|(g, _)| g == l) {
            Some((_, rows)) => rows.push(i),
            None => groups.push((l.clone(), vec![i])),
        }
    }
    groups
}

fn mssa_per_group(
    input: &Input,
    pre: &PreprocessArgs,
    rule: RankRule,
    diagnostics: &mut Diagnostics,
    warnings: &mut Vec<String>,
    prefix: &Option<String>,
) -> Result<StackOutcome> {
    let Some(group_column) = &pre.group_column else {
        bail!("--per-group needs --group-column");
    };
    let labels = input
        .table
        .text(group_column)
        .with_context(|| format!("{}: no column {group_column:?}", input.label))?;
    let groups = group_rows(labels);
    let series: Vec<&TimeSeries> = input.table.numeric().collect();
    let mut values: Vec<Vec<f64>> = series.iter().map(|s| s.values().to_vec()).collect();
    let mut windows = Vec::new();
    let mut ranks = Vec::new();
    for (g, rows) in &groups {
        let mut parts = Vec::new();
        for s in &series {
            if rows.iter().any(|&i| s.is_missing(i)) {
                bail!(
                    "{}: column {:?} has missing values in group {g:?}; run `ssamt impute` first",
                    input.label,
                    s.name()
                );
            }
            parts.push(TimeSeries::new(s.name(), rows.iter().map(|&i| s.values()[i]).collect())?);
        }
        let window = pre.window.unwrap_or(rows.len() / 2);
        let (out, r) = mssa_denoise_with(&MultiSeries::new(parts)?, window, rule)
            .with_context(|| format!("{}: MSSA of group {g:?}, L = {window}", input.label))?;
        for (v, d) in values.iter_mut().zip(out.series()) {
            for (&i, &x) in rows.iter().zip(d.values()) {
                v[i] = x;
            }
        }
        windows.push((qualified(prefix, g), window));
        ranks.push((qualified(prefix, g), r));
    }
    let mut outputs = Vec::new();
    for (s, v) in series.iter().zip(values) {
        let out = TimeSeries::from_parts(s.name(), v, s.missing_mask().to_vec())?;
        let n = s.effective_len();
        // rows outside every group are untouched, so w-correlation uses the
        // smallest group window
        let window = windows.iter().map(|(_, w)| *w).min().unwrap_or(2);
        diagnostics
            .variables
            .push(diagnose(qualified(prefix, s.name()), &s.values()[..n], &out.values()[..n], window, warnings));
        outputs.push(out);
    }
    Ok((input.table.with_numeric(&MultiSeries::new(outputs)?), windows, ranks))
}

fn dataset_name(io: &InputArgs) -> String {
    io.inputs.iter().map(|p| file_label(p)).collect::<Vec<_>>().join(",")
}

pub fn denoise(args: &DenoiseArgs) -> Result<()> {
    let options = csv_options(&args.io, args.pre.group_column.as_ref());
    let inputs = load(&args.io, &options)?;
    let pre = preprocess(&inputs, &args.pre)?;
    ensure_dir(&args.io.output_dir)?;
    for (table, path) in pre.tables.iter().zip(denoised_paths(&args.io.output_dir, inputs.len())) {
        write_table(table, &path)?;
    }
    let report = PipelineReport {
        dataset: dataset_name(&args.io),
        preprocessing: pre.preprocessing,
        tests: Vec::new(),
        procedures: Vec::new(),
        diagnostics: pre.diagnostics,
        warnings: pre.warnings,
    };
    write_json(&report, &args.io.output_dir.join("diagnostics.json"))
}

/// `(variable, [(group label, values)])`.
type VariableGroups = (String, Vec<(String, Vec<f64>)>);

/// Per-variable groups, in order of first appearance of each label.
fn build_groups(tables: &[Table], labels: &[String], args: &TestArgs, warnings: &mut Vec<String>) -> Result<Vec<VariableGroups>> {
    let mut out = Vec::new();
    if let Some(group_column) = &args.pre.group_column {
        if tables.len() > 1 {
            bail!("use either --group-column or one input file per group, not both");
        }
        let table = &tables[0];
        let row_labels = table.text(group_column).with_context(|| format!("no column {group_column:?}"))?;
        let blank = row_labels.iter().filter(|l| l.is_empty()).count();
        if blank > 0 {
            warnings.push(format!("{blank} row(s) without a group label were left out"));
        }
        let groups = group_rows(row_labels);
        for s in table.numeric() {
            let mut dropped = 0;
            let per_group = groups
                .iter()
                .map(|(g, rows)| {
                    let vals: Vec<f64> = rows.iter().filter_map(|&i| s.get(i)).collect();
                    dropped += rows.len() - vals.len();
                    (g.clone(), vals)
                })
                .collect();
            if dropped > 0 {
                warnings.push(format!("{}: {dropped} missing value(s) left out of the test", s.name()));
            }
            out.push((s.name().to_string(), per_group));
        }
    } else {
        if tables.len() < 2 {
            bail!("give --group-column, or one --input file per group");
        }
        for s in tables[0].numeric() {
            let name = s.name();
            if tables.iter().any(|t| !t.numeric().any(|c| c.name() == name)) {
                warnings.push(format!("{name}: not present in every input; skipped"));
                continue;
            }
            let mut dropped = 0;
            let per_group = tables
                .iter()
                .zip(labels)
                .map(|(t, label)| {
                    let col = t.numeric().find(|c| c.name() == name).expect("checked above");
                    let vals: Vec<f64> = (0..col.len()).filter_map(|i| col.get(i)).collect();
                    dropped += col.len() - vals.len();
                    (label.clone(), vals)
                })
                .collect();
            if dropped > 0 {
                warnings.push(format!("{name}: {dropped} missing value(s) left out of the test"));
            }
            out.push((name.to_string(), per_group));
        }
    }
    Ok(out)
}

pub fn test(args: &TestArgs) -> Result<()> {
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        bail!("--alpha must lie in (0, 1)");
    }
    if args.procedures.is_empty() {
        bail!("--procedures must name at least one procedure");
    }
    let options = csv_options(&args.io, args.pre.group_column.as_ref());
    let inputs = load(&args.io, &options)?;
    let pre = preprocess(&inputs, &args.pre)?;
    let mut warnings = pre.warnings;

    // The test stage only sees what the preprocessing stage wrote.
    ensure_dir(&args.io.output_dir)?;
    let paths = denoised_paths(&args.io.output_dir, inputs.len());
    for (table, path) in pre.tables.iter().zip(&paths) {
        write_table(table, path)?;
    }
    let tables = paths.iter().map(|p| read_table(p, &options)).collect::<Result<Vec<_>, _>>()?;
    let labels: Vec<String> = inputs.iter().map(|i| i.label.clone()).collect();

    let variables = build_groups(&tables, &labels, args, &mut warnings)?;
    if args.test == TestChoice::T {
        if let Some((_, groups)) = variables.first() {
            if groups.len() != 2 {
                bail!("the two-sample t-test needs exactly 2 groups, found {}; use --test f", groups.len());
            }
        }
    }
    let results: Vec<Result<TestResult, String>> = variables
        .par_iter()
        .map(|(name, groups)| {
            let res = match args.test {
                TestChoice::T => two_sample_t(&groups[0].1, &groups[1].1).map(|t| t.named(name.clone())),
                TestChoice::F => GroupedSample::new(name.clone(), groups.clone()).and_then(|g| one_way_f(&g)),
            };
            res.map_err(|e| format!("{name}: excluded from testing ({e})"))
        })
        .collect();
    let mut tests = Vec::new();
    for r in results {
        match r {
            Ok(t) => tests.push(t),
            Err(w) => warnings.push(w),
        }
    }
    if tests.is_empty() {
        bail!("no variable could be tested");
    }
    if args.test == TestChoice::F {
        if let Dof::Two(d1, d2) = tests[0].dof {
            warnings.push(format!(
                "one-way F-tests use the standard (k-1, N-k) degrees of freedom, here ({d1}, {d2})"
            ));
        }
    }
    if args.pre.method != Method::None && !(args.pre.method == Method::Mssa && args.pre.per_group) && args.pre.group_column.is_some() {
        warnings.push("series were denoised over all rows before being split into groups".into());
    }
    let p: Vec<f64> = tests.iter().map(|t| t.p_value).collect();
    let procedures = args
        .procedures
        .iter()
        .map(|proc| proc.apply(&p, args.alpha).map(|r| ProcedureEntry::from(&r)))
        .collect::<Result<Vec<_>, _>>()?;
    let report = PipelineReport {
        dataset: dataset_name(&args.io),
        preprocessing: pre.preprocessing,
        tests: tests.iter().map(TestEntry::from).collect(),
        procedures,
        diagnostics: pre.diagnostics,
        warnings,
    };
    write_json(&report, &args.io.output_dir.join("report.json"))
}

pub fn impute(args: &ImputeArgs) -> Result<()> {
    if args.io.inputs.len() != 1 {
        bail!("impute takes exactly one --input");
    }
    let options = csv_options(&args.io, None);
    let inputs = load(&args.io, &options)?;
    let input = &inputs[0];
    let series: Vec<&TimeSeries> = input.table.numeric().collect();
    if series.iter().all(|s| !s.has_missing()) {
        bail!("{}: nothing to impute (no missing values)", input.label);
    }
    let rule = args.rank.rule_or(ssamt_core::imputation::DEFAULT_RANK);
    let outcomes: Vec<Option<Result<Imputation, Error>>> = series
        .par_iter()
        .map(|s| {
            s.has_missing().then(|| {
                let window = args.window.unwrap_or(s.len() / 2);
                let opts = ImputeOptions::new(window)
                    .with_rank(rule)
                    .with_tolerance(args.tolerance)
                    .with_max_iter(args.max_iter);
                ssamt_core::impute(s, &opts)
            })
        })
        .collect();
    let mut variables = Vec::new();
    let mut warnings = Vec::new();
    let mut outputs = Vec::new();
    for (s, outcome) in series.iter().zip(outcomes) {
        let mut entry = ImputedVariable {
            variable: s.name().into(),
            missing: s.missing_count(),
            iterations: None,
            converged: None,
            last_change: None,
            error: None,
        };
        match outcome {
            None => outputs.push((*s).clone()),
            Some(Ok(imp)) => {
                if !imp.converged {
                    warnings.push(format!("{}: not converged after {} iterations", s.name(), imp.iterations));
                }
                entry.iterations = Some(imp.iterations);
                entry.converged = Some(imp.converged);
                entry.last_change = Some(imp.last_change);
                outputs.push(imp.series);
            }
            Some(Err(e)) => {
                warnings.push(format!("{}: left unchanged ({e})", s.name()));
                entry.error = Some(e.to_string());
                outputs.push((*s).clone());
            }
        }
        variables.push(entry);
    }
    ensure_dir(&args.io.output_dir)?;
    write_table(
        &input.table.with_numeric(&MultiSeries::new(outputs)?),
        &args.io.output_dir.join("imputed.csv"),
    )?;
    let report = ImputationReport {
        dataset: dataset_name(&args.io),
        window: args.window,
        variables,
        warnings,
    };
    write_json(&report, &args.io.output_dir.join("imputation.json"))
}

pub fn parse_models(spec: &str) -> Result<Vec<SignalKind>> {
    if spec.trim().eq_ignore_ascii_case("all") {
        return Ok(SignalKind::ALL.to_vec());
    }
    spec.split(',')
        .map(|m| m.parse::<SignalKind>().map_err(|e| anyhow::anyhow!("{m:?}: {e}")))
        .collect()
}

pub fn simulation_csv(reports: &[SimulationReport]) -> String {
    let mut out = String::from("model,N,sigma,seed,replications,rank_rule,window,mean_rmse,mean_rank\n");
    for r in reports {
        for (j, w) in r.windows.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                r.model, r.length, r.sigma, r.seed, r.replications, r.rank_rule, w, r.mean_rmse[j], r.mean_rank[j]
            ));
        }
    }
    out
}

pub fn run_simulation(args: &SimulateArgs) -> Result<Vec<SimulationReport>> {
    let models = parse_models(&args.model)?;
    let rule = args.rank.rule();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.threads.unwrap_or(0))
        .build()
        .context("starting worker threads")?;
    models
        .into_iter()
        .map(|kind| {
            let cfg = StudyConfig {
                model: SignalModel::new(kind, args.length)?,
                replications: args.replications,
                windows: args.window.clone(),
                sigma: args.sigma,
                seed: args.seed,
                rank: rule,
            };
            cfg.validate().with_context(|| kind.as_str().to_string())?;
            let outcomes = pool.install(|| {
                (0..cfg.replications)
                    .into_par_iter()
                    .map(|i| run_replication(&cfg, i))
                    .collect::<Result<Vec<_>, _>>()
            })?;
            Ok(SimulationReport::new(&SimReport::from_outcomes(&cfg, &outcomes), rule_name(rule)))
        })
        .collect()
}

pub fn simulate(args: &SimulateArgs) -> Result<()> {
    let reports = run_simulation(args)?;
    ensure_dir(&args.output_dir)?;
    std::fs::write(args.output_dir.join("simulation.csv"), simulation_csv(&reports))
        .with_context(|| format!("writing {}", args.output_dir.display()))?;
    write_json(&reports, &args.output_dir.join("simulation.json"))
}
