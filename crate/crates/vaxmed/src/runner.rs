//! Executes a scenario: builds its model, walks the requested analyses
//! in order, and emits one report row per result.
//!
//! Error policy: an invalid scenario refuses to run, and enumeration
//! capacity overflows abort the whole run; anything that breaks a single
//! analysis at run time (an unidentifiable contrast, an empty stratum in
//! an exact law) becomes an `error(...)` flag on that row so the rest of
//! the report still lands.
//!
//! Conventions for rows that need a concrete evaluation point:
//! - individual interference effects are reported for the first unit of
//!   the first group with all other members unvaccinated;
//! - the spillover row contrasts everyone-else-vaccinated against
//!   everyone-else-unvaccinated for that same unit;
//! - detection tests condition on the scenario's `l` set.

use crate::detect::{self, DetectConfig};
use crate::estimands::{self, EstimandError, EstimandValue};
use crate::estimation::{self, derive_seed, BootstrapConfig, Dataset, EstimationError};
use crate::interference::{EffectKind, GroupedModel, InterferenceError};
use crate::report::ReportRow;
use crate::scenario::{Analysis, Roles, SampleSection, Scenario, ScenarioError};
use crate::scm::{ModelError, StructuralModel, Value};

/// Command-line overrides applied on top of the scenario's `sample` block.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub n: Option<usize>,
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    /// The scenario failed validation (exit code 1 territory).
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    /// The requested computation exceeds enumeration limits (exit code 2).
    #[error("capacity: {0}")]
    Capacity(String),
    /// The run broke in a way no single row can absorb (exit code 2).
    #[error("runtime: {0}")]
    Runtime(String),
}

fn build_err(e: ScenarioError) -> RunError {
    match e {
        ScenarioError::Capacity(msg) => RunError::Capacity(msg),
        other => RunError::Scenario(other),
    }
}

fn model_capacity(e: &ModelError) -> Option<String> {
    match e {
        ModelError::EnumerationCapExceeded { .. } | ModelError::NoiseTooLarge { .. } => {
            Some(e.to_string())
        }
        _ => None,
    }
}

/// Exact analytic value, with capacity overflows promoted to run aborts
/// and everything else folded into a row flag by the caller.
fn analytic_or_flag(
    row: &mut ReportRow,
    result: Result<f64, EstimationError>,
) -> Result<(), RunError> {
    match result {
        Ok(v) => row.analytic = Some(v),
        Err(EstimationError::Model(m)) if model_capacity(&m).is_some() => {
            return Err(RunError::Capacity(m.to_string()));
        }
        Err(e) => row.flags.push(format!("analytic-error({e})")),
    }
    Ok(())
}

fn effect_row(analysis: &str, ev: &EstimandValue<f64>) -> ReportRow {
    let mut row = ReportRow::new(analysis);
    row.risk_treated = Some(ev.risk_treated);
    row.risk_control = Some(ev.risk_control);
    row.analytic = Some(ev.difference);
    row.ve = ev.ve;
    row
}

fn error_row(analysis: &str, e: impl std::fmt::Display) -> ReportRow {
    let mut row = ReportRow::new(analysis);
    row.flags.push(format!("error({e})"));
    row
}

/// Runs every analysis of a validated scenario and returns the rows in
/// request order. `path_specific` expands to its three decomposition rows.
pub fn run_scenario(s: &Scenario, opts: &RunOptions) -> Result<Vec<ReportRow>, RunError> {
    let issues = s.validate();
    if !issues.is_empty() {
        return Err(ScenarioError::Invalid(issues).into());
    }
    let model: Option<StructuralModel<f64>> = match &s.model {
        Some(section) => Some(section.build().map_err(build_err)?),
        None => None,
    };
    let grouped: Option<GroupedModel<f64>> = match &s.groups {
        Some(section) => Some(section.build().map_err(build_err)?),
        None => None,
    };
    let mut data: Option<Dataset> = None;
    let mut rows = Vec::new();

    for (idx, text) in s.analyses.iter().enumerate() {
        let analysis = Analysis::parse(text).expect("validation parsed every analysis");
        match analysis {
            Analysis::InterferenceTotal
            | Analysis::InterferenceNde
            | Analysis::InterferenceSpillover
            | Analysis::InterferenceAverageTotal(_)
            | Analysis::InterferenceAverageNde(_) => {
                let gm = grouped.as_ref().expect("validation requires groups");
                let alpha = s.groups.as_ref().expect("checked").alpha;
                rows.push(grouped_row(gm, alpha, text, &analysis)?);
            }
            _ => {
                let model = model.as_ref().expect("validation requires a model");
                let roles = s.roles.as_ref().expect("validation requires roles");
                unit_rows(
                    model, roles, s, opts, &mut data, idx, text, &analysis, &mut rows,
                )?;
            }
        }
    }
    Ok(rows)
}

fn grouped_row(
    gm: &GroupedModel<f64>,
    alpha: f64,
    text: &str,
    analysis: &Analysis,
) -> Result<ReportRow, RunError> {
    let others = gm.sizes()[0] - 1;
    let none = vec![0 as Value; others];
    let all = vec![1 as Value; others];
    let at_unit = "unit=(0,0)".to_string();
    let result: Result<ReportRow, InterferenceError> = match analysis {
        Analysis::InterferenceTotal => gm.total_contrast(0, 0, &none).map(|ev| {
            let mut row = effect_row(text, &ev);
            row.flags.push(at_unit.clone());
            row.flags.push("others=unvaccinated".to_string());
            row
        }),
        Analysis::InterferenceNde => gm.nde_contrast(0, 0, &none).map(|ev| {
            let mut row = effect_row(text, &ev);
            row.flags.push(at_unit.clone());
            row.flags.push("others=unvaccinated".to_string());
            row
        }),
        Analysis::InterferenceSpillover => gm.spillover_effect(0, 0, &all, &none).map(|v| {
            let mut row = ReportRow::new(text);
            row.analytic = Some(v);
            row.flags.push(at_unit.clone());
            row.flags.push("others=all-vs-none".to_string());
            row
        }),
        Analysis::InterferenceAverageTotal(w) => {
            gm.average_effects(EffectKind::Total, *w, alpha).map(|v| {
                let mut row = ReportRow::new(text);
                row.analytic = Some(v);
                row
            })
        }
        Analysis::InterferenceAverageNde(w) => gm
            .average_effects(EffectKind::NaturalDirect, *w, alpha)
            .map(|v| {
                let mut row = ReportRow::new(text);
                row.analytic = Some(v);
                row
            }),
        _ => unreachable!("caller dispatches only interference analyses"),
    };
    match result {
        Ok(row) => Ok(row),
        Err(e @ InterferenceError::CapacityExceeded { .. }) => {
            Err(RunError::Capacity(e.to_string()))
        }
        Err(e) => Ok(error_row(text, e)),
    }
}

#[allow(clippy::too_many_arguments)]
fn unit_rows(
    model: &StructuralModel<f64>,
    roles: &Roles,
    s: &Scenario,
    opts: &RunOptions,
    data: &mut Option<Dataset>,
    idx: usize,
    text: &str,
    analysis: &Analysis,
    rows: &mut Vec<ReportRow>,
) -> Result<(), RunError> {
    let a = roles.a.as_str();
    let y = roles.y.as_str();
    let l = roles.l_refs();

    match analysis {
        Analysis::TotalEffect => {
            rows.push(estimand_row(text, estimands::total_effect(model, a, y))?);
        }
        Analysis::Nde => {
            let b = roles.b.as_deref().expect("validation requires b");
            let mut row = estimand_row(text, estimands::natural_direct_effect(model, a, b, y))?;
            match model.dag().check_nde_assumptions(a, b, y, &l) {
                Ok(report) => {
                    for (k, verdict) in report.iter() {
                        if !verdict.holds() {
                            row.flags.push(format!("assumption{k}={verdict}"));
                        }
                    }
                }
                Err(e) => row.flags.push(format!("assumptions-unchecked({e})")),
            }
            rows.push(row);
        }
        Analysis::Nie => {
            let b = roles.b.as_deref().expect("validation requires b");
            rows.push(estimand_row(
                text,
                estimands::natural_indirect_effect(model, a, b, y),
            )?);
        }
        Analysis::Cde(level) => {
            let b = roles.b.as_deref().expect("validation requires b");
            rows.push(estimand_row(
                text,
                estimands::controlled_direct_effect(model, a, b, y, *level),
            )?);
        }
        Analysis::TrialEstimand => {
            let p = roles.p.as_deref().expect("validation requires p");
            rows.push(estimand_row(text, estimands::trial_estimand(model, a, p, y))?);
        }
        Analysis::PathSpecific => {
            let bm = roles.b_m.as_deref().expect("validation requires b_m");
            let bsc = roles.b_sc.as_deref().expect("validation requires b_sc");
            match estimands::path_specific_effects(model, a, bm, bsc, y) {
                Ok(pse) => {
                    rows.push(effect_row(&format!("{text}:via_bm"), &pse.via_bm));
                    rows.push(effect_row(&format!("{text}:via_bsc"), &pse.via_bsc));
                    rows.push(effect_row(&format!("{text}:direct"), &pse.direct));
                }
                Err(e) => rows.push(error_row(text, e)),
            }
        }
        Analysis::Assumptions => {
            let b = roles.b.as_deref().expect("validation requires b");
            let mut row = ReportRow::new(text);
            match model.dag().check_nde_assumptions(a, b, y, &l) {
                Ok(report) => {
                    for (k, verdict) in report.iter() {
                        row.flags.push(format!("assumption{k}={verdict}"));
                    }
                }
                Err(e) => row.flags.push(format!("error({e})")),
            }
            rows.push(row);
        }
        Analysis::PluginNde => {
            let b = roles.b.as_deref().expect("validation requires b");
            let (data, boot) = sampled(model, s, opts, data, idx)?;
            let mut row = ReportRow::new(text);
            match estimation::plugin_nde(data, a, b, y, &l, boot.as_ref()) {
                Ok(est) => fill_plugin(&mut row, &est),
                Err(e) => row.flags.push(format!("error({e})")),
            }
            analytic_or_flag(&mut row, estimation::population_plugin_nde(model, a, b, y, &l))?;
            rows.push(row);
        }
        Analysis::PluginTotal => {
            let (data, boot) = sampled(model, s, opts, data, idx)?;
            let mut row = ReportRow::new(text);
            match estimation::plugin_total(data, a, y, &l, boot.as_ref()) {
                Ok(est) => fill_plugin(&mut row, &est),
                Err(e) => row.flags.push(format!("error({e})")),
            }
            analytic_or_flag(&mut row, estimation::population_plugin_total(model, a, y, &l))?;
            rows.push(row);
        }
        Analysis::Positivity => {
            let b = roles.b.as_deref().expect("validation requires b");
            let (data, _) = sampled(model, s, opts, data, idx)?;
            let mut row = ReportRow::new(text);
            match estimation::positivity_report(data, a, b, y, &l) {
                Ok(report) => {
                    for (cell, arm, _) in report.empty_arm_cells() {
                        row.flags.push(format!("empty-arm(l={cell:?},a={arm})"));
                    }
                    for (cell, arm, level, _) in report.empty_mediator_cells() {
                        row.flags
                            .push(format!("empty-cell(l={cell:?},a={arm},b={level})"));
                    }
                }
                Err(e) => row.flags.push(format!("error({e})")),
            }
            rows.push(row);
        }
        Analysis::MisclassifyNde(flip) => {
            let b = roles.b.as_deref().expect("validation requires b");
            let (data, boot) = sampled(model, s, opts, data, idx)?;
            let seed = effective_seed(s, opts);
            let mut row = ReportRow::new(text);
            let corrupted =
                estimation::misclassify_mediator(data, b, *flip, derive_seed(seed, 500 + idx as u64));
            match corrupted.and_then(|d| estimation::plugin_nde(&d, a, b, y, &l, boot.as_ref())) {
                Ok(est) => fill_plugin(&mut row, &est),
                Err(e) => row.flags.push(format!("error({e})")),
            }
            analytic_or_flag(
                &mut row,
                estimation::population_plugin_nde_misclassified(model, a, b, y, &l, *flip),
            )?;
            rows.push(row);
        }
        Analysis::AltOutcome => {
            let r = roles.r.as_deref().expect("validation requires r");
            let (data, _) = sampled(model, s, opts, data, idx)?;
            let mut row = ReportRow::new(text);
            match detect::alt_outcome_test(data, a, r, &l, &DetectConfig::default()) {
                Ok(res) => {
                    row.estimate = res.difference;
                    row.se = res.se;
                    row.flags.push(format!("verdict={}", res.verdict));
                    if !res.excluded_strata.is_empty() {
                        row.flags
                            .push(format!("excluded-strata={}", res.excluded_strata.len()));
                    }
                }
                Err(e) => row.flags.push(format!("error({e})")),
            }
            let b_nodes = roles.behaviour_nodes();
            match detect::alt_outcome_validity(model.dag(), a, &b_nodes, r, &l) {
                Ok(v) => row.flags.push(format!("test={v}")),
                Err(e) => row.flags.push(format!("error({e})")),
            }
            rows.push(row);
        }
        Analysis::PanelInterpretation => {
            let r = roles.r.as_deref().expect("validation requires r");
            let b_nodes = roles.behaviour_nodes();
            let mut row = ReportRow::new(text);
            match detect::panel_interpretation(model.dag(), a, &b_nodes, y, r, &l) {
                Ok(reading) => row.flags.push(format!("reading={reading}")),
                Err(e) => row.flags.push(format!("error({e})")),
            }
            rows.push(row);
        }
        Analysis::NegativeControl => {
            let f = roles.f.as_deref().expect("validation requires f");
            let (data, _) = sampled(model, s, opts, data, idx)?;
            let mut row = ReportRow::new(text);
            match detect::negative_control_population_test(
                data,
                a,
                y,
                f,
                &l,
                &DetectConfig::default(),
            ) {
                Ok(res) => {
                    row.estimate = res.difference;
                    row.se = res.se;
                    row.flags.push(format!("verdict={}", res.verdict));
                    if !res.excluded_strata.is_empty() {
                        row.flags
                            .push(format!("excluded-strata={}", res.excluded_strata.len()));
                    }
                }
                Err(e) => row.flags.push(format!("error({e})")),
            }
            rows.push(row);
        }
        _ => unreachable!("interference analyses handled by the caller"),
    }
    Ok(())
}

fn estimand_row(
    text: &str,
    result: Result<EstimandValue<f64>, EstimandError>,
) -> Result<ReportRow, RunError> {
    match result {
        Ok(ev) => Ok(effect_row(text, &ev)),
        Err(EstimandError::Model(m)) if model_capacity(&m).is_some() => {
            Err(RunError::Capacity(m.to_string()))
        }
        Err(e) => Ok(error_row(text, e)),
    }
}

fn fill_plugin(row: &mut ReportRow, est: &estimation::PluginEstimate) {
    row.estimate = Some(est.estimate);
    row.se = est.se;
    for flag in &est.flags {
        row.flags.push(flag.to_string());
    }
}

fn effective_seed(s: &Scenario, opts: &RunOptions) -> u64 {
    opts.seed
        .unwrap_or_else(|| s.sample.as_ref().map_or(0, |sm| sm.seed))
}

fn sample_section(s: &Scenario) -> &SampleSection {
    s.sample
        .as_ref()
        .expect("validation requires a sample block for estimator analyses")
}

/// Draws the dataset once, on first use, and derives one bootstrap
/// configuration per analysis position so streams never collide.
fn sampled<'d>(
    model: &StructuralModel<f64>,
    s: &Scenario,
    opts: &RunOptions,
    data: &'d mut Option<Dataset>,
    idx: usize,
) -> Result<(&'d Dataset, Option<BootstrapConfig>), RunError> {
    let section = sample_section(s);
    let n = opts.n.unwrap_or(section.n);
    let seed = effective_seed(s, opts);
    if data.is_none() {
        *data = Some(
            model
                .sample_units(n, seed)
                .map_err(|e| RunError::Runtime(e.to_string()))?,
        );
    }
    let boot = section.bootstrap.map(|replicates| {
        BootstrapConfig::new(derive_seed(seed, 1 + idx as u64)).with_replicates(replicates as usize)
    });
    Ok((data.as_ref().expect("just filled"), boot))
}
