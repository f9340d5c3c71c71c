//! Command implementations: each takes its parsed arguments and either
//! completes with output on stdout (or `--out`) or fails with a `CliError`
//! carrying the exit code.

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::path::Path;

use serde::Serialize;

use regccrf::automata::{
    check_unambiguous, determinize, minimize_dfa, regex_to_nfa, Alphabet, AutomataError, Nfa,
};
use regccrf::bio::{build_bio_nfa, BioError, BioSpec};
use regccrf::constrained::{constrained_viterbi, ConstraintError, CrfParams};
use regccrf::experiments::{
    run_arbitrary_gap, run_map_inference, MAP_INFERENCE_DATA_PROBS, MAP_INFERENCE_STRINGS,
};
use regccrf::model::Model;
use regccrf::tagset::ConstrainedTagSet;
use regccrf::train::{evaluate_cross_entropy, train_constrained, ModelRef, TrainError};

use crate::data;
use crate::lang::{self, LanguageFile};
use crate::{
    ArbitraryGapArgs, BuildBioArgs, CheckArgs, CliError, CompileArgs, DecodeArgs, MapInferenceArgs,
    OutputFormat, TrainArgs,
};

fn automata_error(e: AutomataError) -> CliError {
    match e {
        AutomataError::StateBudgetExceeded { .. }
        | AutomataError::EnumerationBudgetExceeded { .. } => CliError::Budget(e.to_string()),
        other => CliError::Usage(other.to_string()),
    }
}

fn bio_error(e: BioError) -> CliError {
    match e {
        BioError::Automata(inner) => automata_error(inner),
        other => CliError::Usage(other.to_string()),
    }
}

fn train_error(e: TrainError) -> CliError {
    match e {
        TrainError::Constraint(c) => CliError::Violation(c.to_string()),
        TrainError::InvalidConfig(_) | TrainError::InvalidDistribution(_) => {
            CliError::Usage(e.to_string())
        }
        other => CliError::Failure(other.to_string()),
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Failure(format!("serialization: {e}")))?;
    s.push('\n');
    Ok(s)
}

fn to_csv<T: Serialize>(rows: &[T]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)
            .map_err(|e| CliError::Failure(format!("serialization: {e}")))?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Failure(format!("serialization: {e}")))?;
    String::from_utf8(bytes).map_err(|e| CliError::Failure(format!("serialization: {e}")))
}

fn write_output(out: Option<&Path>, contents: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, contents)
            .map_err(|e| CliError::Failure(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

/// Reports render as text by default and as JSON on request; they have no
/// tabular form.
fn report_as_json(output: Option<OutputFormat>) -> Result<bool, CliError> {
    match output {
        None => Ok(false),
        Some(OutputFormat::Json) => Ok(true),
        Some(OutputFormat::Csv) => Err(CliError::Usage(
            "this report has no CSV form; use --output json".into(),
        )),
    }
}

#[derive(Serialize)]
struct CompileReport {
    source: String,
    alphabet: Vec<String>,
    input_states: usize,
    input_edges: usize,
    input_ambiguous: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    ambiguity_witness: Option<String>,
    states: usize,
    edges: usize,
    tags_before_reduction: usize,
    tags_after_reduction: usize,
    class_reduction: bool,
}

fn render_compile_report(r: &CompileReport) -> String {
    let status = if r.input_ambiguous {
        format!(
            ", ambiguous ({})",
            r.ambiguity_witness.as_deref().unwrap_or("")
        )
    } else {
        ", unambiguous".to_string()
    };
    format!(
        "alphabet: {}\n\
         input {}: {} states, {} edges{}\n\
         compiled: {} states, {} edges\n\
         tags: {} before class reduction, {} after\n",
        r.alphabet.join(" "),
        r.source,
        r.input_states,
        r.input_edges,
        status,
        r.states,
        r.edges,
        r.tags_before_reduction,
        r.tags_after_reduction,
    )
}

pub fn compile(args: CompileArgs) -> Result<(), CliError> {
    let json = report_as_json(args.output)?;
    let (raw, from_regex) = match (&args.regex, &args.nfa_file) {
        (Some(source), None) => {
            let alphabet = match &args.alphabet {
                Some(symbols) => Alphabet::new(symbols.iter().cloned())
                    .map_err(|e| CliError::Usage(e.to_string()))?,
                None => lang::infer_alphabet(source)?,
            };
            let nfa = regex_to_nfa(source, &alphabet).map_err(automata_error)?;
            (nfa, true)
        }
        (None, Some(path)) => match lang::load_language(path)? {
            LanguageFile::Raw(nfa) => (nfa, false),
            LanguageFile::Model(_) => {
                return Err(CliError::Usage(format!(
                    "{} is already a compiled model",
                    path.display()
                )))
            }
        },
        _ => {
            return Err(CliError::Usage(
                "pass exactly one of a regex argument or --nfa-file".into(),
            ))
        }
    };

    let input_states = raw.num_states();
    let input_edges = raw.num_edges();
    let witness = check_unambiguous(&raw).err();

    // A regex names only a language, so it compiles to the canonical minimal
    // DFA. An automaton file names a specific machine whose edges become the
    // tags, so ambiguity there is an error rather than a determinization
    // trigger.
    let compiled = if from_regex {
        minimize_dfa(&determinize(&raw, args.state_budget).map_err(automata_error)?)
    } else {
        if let Some(w) = &witness {
            return Err(CliError::Violation(format!(
                "the automaton is ambiguous ({w}); compile from a regex to determinize"
            )));
        }
        raw
    };

    let ts = ConstrainedTagSet::build(compiled)
        .map_err(|w| CliError::Violation(format!("the automaton is ambiguous ({w})")))?;
    let tags_before = ts.num_tags();
    let ts = if args.no_class_reduction {
        ts
    } else {
        ts.reduce()
    };

    let report = CompileReport {
        source: if from_regex { "regex" } else { "automaton" }.to_string(),
        alphabet: ts.nfa().alphabet().symbols().to_vec(),
        input_states,
        input_edges,
        input_ambiguous: witness.is_some(),
        ambiguity_witness: witness.map(|w| w.to_string()),
        states: ts.nfa().num_states(),
        edges: ts.nfa().num_edges(),
        tags_before_reduction: tags_before,
        tags_after_reduction: ts.num_tags(),
        class_reduction: !args.no_class_reduction,
    };
    if json {
        print!("{}", to_json(&report)?);
    } else {
        print!("{}", render_compile_report(&report));
    }

    if let Some(path) = &args.out {
        let skeleton = Model::skeleton(ts, 0);
        fs::write(path, skeleton.to_json_string())
            .map_err(|e| CliError::Failure(format!("cannot write {}: {e}", path.display())))?;
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

pub fn check(args: CheckArgs) -> Result<(), CliError> {
    if !args.ambiguity && args.membership.is_none() {
        return Err(CliError::Usage(
            "pass --ambiguity and/or --membership <label-file>".into(),
        ));
    }
    let file = lang::load_language(&args.lang)?;
    let nfa: &Nfa = match &file {
        LanguageFile::Model(m) => m.tag_set.nfa(),
        LanguageFile::Raw(nfa) => nfa,
    };
    let mut violation: Option<String> = None;
    if args.ambiguity {
        match check_unambiguous(nfa) {
            Ok(()) => println!("unambiguous"),
            Err(w) => {
                println!("ambiguous: {w}");
                violation = Some("the automaton is ambiguous".into());
            }
        }
    }
    if let Some(path) = &args.membership {
        let lines = data::read_lines(path)?;
        let mut outside = 0usize;
        for (line, labels) in &lines.rows {
            if nfa.accepts_labels(labels) {
                println!("line {line}: in language");
            } else {
                println!("line {line}: OUTSIDE: {}", labels.join(" "));
                outside += 1;
            }
        }
        println!(
            "{} of {} lines in language",
            lines.rows.len() - outside,
            lines.rows.len()
        );
        if outside > 0 {
            violation = Some(format!(
                "{outside} label sequences are outside the language"
            ));
        }
    }
    match violation {
        Some(m) => Err(CliError::Violation(m)),
        None => Ok(()),
    }
}

pub fn arbitrary_gap(args: ArbitraryGapArgs) -> Result<(), CliError> {
    if args.k_lo < 1 || args.k_lo > args.k_hi || args.k_hi > 20 {
        return Err(CliError::Usage("need 1 <= k-lo <= k-hi <= 20".into()));
    }
    if args.trials < 1 {
        return Err(CliError::Usage("need at least one trial".into()));
    }
    let rows = run_arbitrary_gap(args.k_lo, args.k_hi, args.trials, &args.train.config());
    let contents = match args.output {
        OutputFormat::Csv => to_csv(&rows)?,
        OutputFormat::Json => to_json(&rows)?,
    };
    write_output(args.out.as_deref(), &contents)?;
    if let Some(path) = &args.out {
        eprintln!("wrote {} ({} rows)", path.display(), rows.len());
    }
    let failures: Vec<String> = rows
        .iter()
        .filter_map(|r| r.error.as_ref().map(|e| format!("k = {}: {e}", r.k)))
        .collect();
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Failure(format!(
            "training failed for {} of {} k values:\n  {}",
            failures.len(),
            rows.len(),
            failures.join("\n  ")
        )))
    }
}

/// The disagreement the task is built around: constrained decoding ranks the
/// pairwise-favoured string first, constrained training keeps the data mode.
const EXPECTED_MAP_CD: &str = "bcd";
const EXPECTED_MAP_CT: &str = "acd";

#[derive(Serialize)]
struct MapRow {
    string: String,
    p_data: f64,
    p_cd: f64,
    p_cd_std: f64,
    p_ct: f64,
    p_ct_std: f64,
    map_cd: bool,
    map_ct: bool,
}

#[derive(Serialize)]
struct MapReport {
    trials: usize,
    rows: Vec<MapRow>,
    map_cd: String,
    map_ct: String,
}

pub fn map_inference(args: MapInferenceArgs) -> Result<(), CliError> {
    if args.trials < 1 {
        return Err(CliError::Usage("need at least one trial".into()));
    }
    let result = run_map_inference(args.trials, &args.train.config()).map_err(train_error)?;
    let map_cd = result.trials[0].map_cd.clone();
    let map_ct = result.trials[0].map_ct.clone();
    let rows: Vec<MapRow> = MAP_INFERENCE_STRINGS
        .iter()
        .enumerate()
        .map(|(i, s)| MapRow {
            string: (*s).to_string(),
            p_data: MAP_INFERENCE_DATA_PROBS[i],
            p_cd: result.p_cd[i],
            p_cd_std: result.p_cd_std[i],
            p_ct: result.p_ct[i],
            p_ct_std: result.p_ct_std[i],
            map_cd: *s == map_cd,
            map_ct: *s == map_ct,
        })
        .collect();
    let contents = match args.output {
        OutputFormat::Csv => to_csv(&rows)?,
        OutputFormat::Json => to_json(&MapReport {
            trials: args.trials,
            rows,
            map_cd: map_cd.clone(),
            map_ct: map_ct.clone(),
        })?,
    };
    write_output(args.out.as_deref(), &contents)?;
    if let Some(path) = &args.out {
        eprintln!("wrote {}", path.display());
    }
    for (i, trial) in result.trials.iter().enumerate() {
        if trial.map_cd != EXPECTED_MAP_CD || trial.map_ct != EXPECTED_MAP_CT {
            return Err(CliError::Failure(format!(
                "trial {i} did not reproduce the expected modes: \
                 constrained decoding chose {} (expected {EXPECTED_MAP_CD}), \
                 constrained training chose {} (expected {EXPECTED_MAP_CT})",
                trial.map_cd, trial.map_ct
            )));
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct BioReport {
    core_roles: usize,
    noncore_roles: usize,
    continuation_roles: usize,
    labels: usize,
    states: usize,
    edges: usize,
    tags_before_reduction: usize,
    tags_after_reduction: usize,
    class_reduction: bool,
}

pub fn build_bio(args: BuildBioArgs) -> Result<(), CliError> {
    let json = report_as_json(args.output)?;
    let spec = BioSpec {
        core_roles: args.core.clone(),
        noncore_roles: args.noncore.clone(),
        continuation_roles: args.continuation.clone(),
    };
    let nfa = build_bio_nfa(&spec, args.state_budget).map_err(bio_error)?;
    let ts = ConstrainedTagSet::build(nfa)
        .map_err(|w| CliError::Failure(format!("BIO automaton is ambiguous: {w}")))?;
    let tags_before = ts.num_tags();
    let ts = if args.no_class_reduction {
        ts
    } else {
        ts.reduce()
    };
    let report = BioReport {
        core_roles: spec.core_roles.len(),
        noncore_roles: spec.noncore_roles.len(),
        continuation_roles: spec.continuation_roles.len(),
        labels: ts.nfa().alphabet().len(),
        states: ts.nfa().num_states(),
        edges: ts.nfa().num_edges(),
        tags_before_reduction: tags_before,
        tags_after_reduction: ts.num_tags(),
        class_reduction: !args.no_class_reduction,
    };
    if json {
        print!("{}", to_json(&report)?);
    } else {
        print!(
            "roles: {} core, {} non-core, {} continuation\n\
             labels: {}\n\
             automaton: {} states, {} edges\n\
             tags: {} before class reduction, {} after\n",
            report.core_roles,
            report.noncore_roles,
            report.continuation_roles,
            report.labels,
            report.states,
            report.edges,
            report.tags_before_reduction,
            report.tags_after_reduction,
        );
    }
    if let Some(path) = &args.out {
        let skeleton = Model::skeleton(ts, 0);
        fs::write(path, skeleton.to_json_string())
            .map_err(|e| CliError::Failure(format!("cannot write {}: {e}", path.display())))?;
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

pub fn train(args: TrainArgs) -> Result<(), CliError> {
    let rows = data::read_parallel(&args.data, &args.labels)?;
    if rows.is_empty() {
        return Err(CliError::Usage("the data files are empty".into()));
    }
    let (ts, constrained) = match &args.constrained {
        Some(path) => (lang::load_model(path)?.tag_set, true),
        None => {
            let labels: BTreeSet<String> =
                rows.iter().flat_map(|r| r.labels.iter().cloned()).collect();
            (lang::universal_language(labels)?, false)
        }
    };
    let alphabet = ts.nfa().alphabet().clone();

    let mut violations = Vec::new();
    let mut encoded: Vec<(Vec<String>, Vec<usize>)> = Vec::new();
    for row in &rows {
        match alphabet.encode(&row.labels) {
            Ok(y) => {
                if ts.nfa().accepts(&y) {
                    encoded.push((row.tokens.clone(), y));
                } else {
                    violations.push(format!(
                        "line {}: `{}` is outside the language",
                        row.line,
                        row.labels.join(" ")
                    ));
                }
            }
            Err(e) => violations.push(format!("line {}: {e}", row.line)),
        }
    }
    if !violations.is_empty() {
        let listing = violations.join("\n  ");
        if args.drop_violations {
            eprintln!(
                "dropping {} of {} lines:\n  {listing}",
                violations.len(),
                rows.len()
            );
        } else {
            return Err(CliError::Violation(format!(
                "{} of {} lines violate the constraint \
                 (rerun with --drop-violations to discard them):\n  {listing}",
                violations.len(),
                rows.len()
            )));
        }
    }
    if encoded.is_empty() {
        return Err(CliError::Violation(
            "every line violates the constraint; nothing to train on".into(),
        ));
    }

    let dist = data::to_distribution(&encoded)?;
    let params = train_constrained(&dist, &ts, &args.train.config()).map_err(train_error)?;
    let h =
        evaluate_cross_entropy(&dist, ModelRef::Constrained(&ts, &params)).map_err(train_error)?;
    let entropy = dist.entropy();
    let distinct = dist.entries().len();
    let model = Model::new(ts, params);
    fs::write(&args.out, model.to_json_string())
        .map_err(|e| CliError::Failure(format!("cannot write {}: {e}", args.out.display())))?;
    println!(
        "trained {} model on {} lines ({} distinct pairs)",
        if constrained {
            "a constrained"
        } else {
            "an unconstrained"
        },
        encoded.len(),
        distinct
    );
    println!("cross-entropy: {h:.6} nats (data entropy {entropy:.6})");
    println!("wrote {}", args.out.display());
    Ok(())
}

/// Emission rows beyond the trained maximum length score zero, so longer
/// inputs still decode (transitions and the constraint carry the decision).
fn pad_positions(params: &CrfParams, len: usize) -> CrfParams {
    if len <= params.positions() {
        return params.clone();
    }
    let n = params.num_labels();
    let mut emission = params.emission_table().to_vec();
    emission.resize(len * n, 0.0);
    CrfParams::from_tables(n, params.transition_table().to_vec(), emission)
        .expect("padded tables stay well-formed")
}

pub fn decode(args: DecodeArgs) -> Result<(), CliError> {
    let model = lang::load_model(&args.model)?;
    let lines = data::read_lines(&args.data)?;
    let schema: Vec<String> = lines
        .rows
        .iter()
        .filter(|(_, tokens)| tokens.is_empty())
        .map(|(line, _)| format!("line {line}: empty sequence"))
        .collect();
    if !schema.is_empty() {
        return Err(CliError::Usage(format!(
            "schema violations:\n  {}",
            schema.join("\n  ")
        )));
    }

    let alphabet = model.tag_set.nfa().alphabet().clone();
    let mut padded: HashMap<usize, CrfParams> = HashMap::new();
    let mut outputs = Vec::with_capacity(lines.rows.len());
    let mut unsupported = Vec::new();
    for (line, tokens) in &lines.rows {
        let len = tokens.len();
        let params = padded
            .entry(len)
            .or_insert_with(|| pad_positions(&model.params, len));
        match constrained_viterbi(&model.tag_set, params, len) {
            Ok(y) => outputs.push(alphabet.decode(&y).join(" ")),
            Err(ConstraintError::EmptySupport { len }) => unsupported.push(format!(
                "line {line}: the language has no sequence of length {len}"
            )),
            Err(e) => return Err(CliError::Failure(e.to_string())),
        }
    }
    if !unsupported.is_empty() {
        return Err(CliError::Violation(format!(
            "cannot decode every line:\n  {}",
            unsupported.join("\n  ")
        )));
    }
    let contents = if outputs.is_empty() {
        String::new()
    } else {
        let mut s = outputs.join("\n");
        s.push('\n');
        s
    };
    write_output(args.out.as_deref(), &contents)?;
    if let Some(path) = &args.out {
        eprintln!("wrote {} ({} lines)", path.display(), outputs.len());
    }
    Ok(())
}
