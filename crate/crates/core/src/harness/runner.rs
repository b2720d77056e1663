//! Experiment execution.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, SplitPair};
use crate::exec;
use crate::metrics::{self, Focal, GapValue};
use crate::mitigation::{
    dir_repair, exgr_fit, metac_fit, reweigh, BinaryGroupMap, MitigationKind,
};
use crate::models::{cross_validate, default_grid, fit, Hyperparams, ModelKind};

use super::{
    AccuracyRecord, ChosenHyperparams, ExperimentConfig, FailureRecord, GapRecord, HarnessError,
    Result, ResultsTable, Scope,
};

/// Everything produced by one experiment: the long-form results plus the
/// metadata needed for a reproduction manifest.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentRun {
    pub config: ExperimentConfig,
    pub results: ResultsTable,
    pub chosen_hyperparams: Vec<ChosenHyperparams>,
    pub data_n_rows: usize,
    pub data_n_features: usize,
    pub data_groups: Vec<String>,
}

struct SplitOutput {
    gaps: Vec<GapRecord>,
    accuracies: Vec<AccuracyRecord>,
    failures: Vec<FailureRecord>,
    chosen: Vec<ChosenHyperparams>,
}

/// Runs the full protocol. Deterministic for a fixed config and dataset;
/// splits execute in parallel when the `parallel` feature is enabled, with
/// identical output either way.
///
/// Per-cell failures are recorded in the results table, never silently
/// dropped; only configuration and shared-state errors abort the run.
pub fn run_experiment(config: &ExperimentConfig, data: &Dataset) -> Result<ExperimentRun> {
    config.validate()?;
    let map = BinaryGroupMap::new(config.privileged.clone());
    let privileged_codes =
        map.privileged_codes(data)
            .map_err(|e| HarnessError::InvalidConfig {
                reason: format!("privileged map: {e}"),
            })?;

    let grids: Vec<(ModelKind, Vec<Hyperparams>)> = config
        .models
        .iter()
        .map(|m| {
            (
                m.kind,
                m.grid.clone().unwrap_or_else(|| default_grid(m.kind)),
            )
        })
        .collect();

    // Shared hyperparameter selection: CV once on the first split's
    // training data, reused by every split.
    let shared_hp: Option<Vec<Hyperparams>> = if config.cv_per_split {
        None
    } else {
        let pair = data.stratified_split(config.split_ratio, config.base_seed)?;
        let mut chosen = Vec::with_capacity(grids.len());
        for (kind, grid) in &grids {
            chosen.push(select_hyperparams(
                *kind,
                grid,
                &pair.train,
                config.cv_folds,
                config.base_seed,
            )?);
        }
        Some(chosen)
    };

    let split_outputs = exec::par_map_range(config.n_splits as usize, |i| {
        run_split(
            i as u32,
            config,
            data,
            &map,
            &privileged_codes,
            &grids,
            shared_hp.as_deref(),
        )
    });

    let mut results = ResultsTable::default();
    let mut chosen_hyperparams = Vec::new();
    for out in split_outputs {
        results.gaps.extend(out.gaps);
        results.accuracies.extend(out.accuracies);
        results.failures.extend(out.failures);
        chosen_hyperparams.extend(out.chosen);
    }

    Ok(ExperimentRun {
        config: config.clone(),
        results,
        chosen_hyperparams,
        data_n_rows: data.n_rows(),
        data_n_features: data.n_features(),
        data_groups: data.group_names().to_vec(),
    })
}

fn select_hyperparams(
    kind: ModelKind,
    grid: &[Hyperparams],
    train: &Dataset,
    cv_folds: usize,
    seed: u64,
) -> Result<Hyperparams> {
    if grid.len() == 1 {
        return Ok(grid[0].clone());
    }
    cross_validate(kind, grid, train, cv_folds, seed).map_err(|e| HarnessError::InvalidConfig {
        reason: format!("cross-validation failed: {e}"),
    })
}

#[allow(clippy::too_many_arguments)]
fn run_split(
    split: u32,
    config: &ExperimentConfig,
    data: &Dataset,
    map: &BinaryGroupMap,
    privileged_codes: &BTreeSet<u16>,
    grids: &[(ModelKind, Vec<Hyperparams>)],
    shared_hp: Option<&[Hyperparams]>,
) -> SplitOutput {
    let seed = config.base_seed + u64::from(split);
    let mut out = SplitOutput {
        gaps: Vec::new(),
        accuracies: Vec::new(),
        failures: Vec::new(),
        chosen: Vec::new(),
    };

    let fail_everything = |out: &mut SplitOutput, error: &str| {
        for (kind, _) in grids {
            for mit in &config.mitigations {
                out.failures.push(FailureRecord {
                    split,
                    model: kind.token().into(),
                    mitigation: mit.token().into(),
                    error: error.into(),
                });
            }
        }
    };

    let pair = match data.stratified_split(config.split_ratio, seed) {
        Ok(p) => p,
        Err(e) => {
            fail_everything(&mut out, &format!("split failed: {e}"));
            return out;
        }
    };
    // the map was validated against the full group table, so binarization
    // of subsets cannot fail
    let s_train = map.binarize(&pair.train).expect("validated map");
    let s_test = map.binarize(&pair.test).expect("validated map");

    for (model_idx, (kind, grid)) in grids.iter().enumerate() {
        let hp = match shared_hp {
            Some(chosen) => Ok(chosen[model_idx].clone()),
            None => {
                if grid.len() == 1 {
                    Ok(grid[0].clone())
                } else {
                    cross_validate(*kind, grid, &pair.train, config.cv_folds, seed)
                        .map_err(|e| format!("cross-validation failed: {e}"))
                }
            }
        };
        let hp = match hp {
            Ok(hp) => hp,
            Err(e) => {
                for mit in &config.mitigations {
                    out.failures.push(FailureRecord {
                        split,
                        model: kind.token().into(),
                        mitigation: mit.token().into(),
                        error: e.clone(),
                    });
                }
                continue;
            }
        };
        out.chosen.push(ChosenHyperparams {
            split,
            model: kind.token().into(),
            hyperparams: hp.clone(),
        });

        for mitigation in &config.mitigations {
            match run_cell(
                *kind,
                &hp,
                &pair,
                &s_train,
                &s_test,
                privileged_codes,
                mitigation,
                seed,
            ) {
                Ok((gaps, accuracy)) => {
                    let model = kind.token().to_string();
                    let mit = mitigation.token().to_string();
                    for (scope, group, gap) in gaps {
                        out.gaps.push(GapRecord {
                            split,
                            model: model.clone(),
                            mitigation: mit.clone(),
                            scope,
                            group,
                            notion: gap.notion,
                            value: gap.value,
                        });
                    }
                    out.accuracies.push(AccuracyRecord {
                        split,
                        model,
                        mitigation: mit,
                        accuracy,
                    });
                }
                Err(error) => out.failures.push(FailureRecord {
                    split,
                    model: kind.token().into(),
                    mitigation: mitigation.token().into(),
                    error,
                }),
            }
        }
    }
    out
}

type CellResult = std::result::Result<(Vec<(Scope, String, GapValue)>, f64), String>;

#[allow(clippy::too_many_arguments)]
fn run_cell(
    kind: ModelKind,
    hp: &Hyperparams,
    pair: &SplitPair,
    s_train: &[u8],
    s_test: &[u8],
    privileged_codes: &BTreeSet<u16>,
    mitigation: &MitigationKind,
    seed: u64,
) -> CellResult {
    let y_pred: Vec<u8> = match mitigation {
        MitigationKind::Baseline => {
            let model = fit(kind, hp, &pair.train, seed).map_err(|e| e.to_string())?;
            model.predict_all(&pair.test).map_err(|e| e.to_string())?
        }
        MitigationKind::Reweigh => {
            let weights = reweigh(&pair.train, s_train).map_err(|e| format!("reweigh: {e}"))?;
            let train = pair.train.with_weights(weights).map_err(|e| e.to_string())?;
            let model = fit(kind, hp, &train, seed).map_err(|e| e.to_string())?;
            model.predict_all(&pair.test).map_err(|e| e.to_string())?
        }
        MitigationKind::DirRepair { lambda } => {
            // train and test are repaired independently, each against its
            // own group-conditional quantiles
            let train = dir_repair(&pair.train, s_train, *lambda, None)
                .map_err(|e| format!("dir train: {e}"))?;
            let model = fit(kind, hp, &train, seed).map_err(|e| e.to_string())?;
            let test = dir_repair(&pair.test, s_test, *lambda, None)
                .map_err(|e| format!("dir test: {e}"))?;
            model.predict_all(&test).map_err(|e| e.to_string())?
        }
        MitigationKind::ExGr(params) => {
            let rc = exgr_fit(kind, hp, &pair.train, s_train, params, seed)
                .map_err(|e| format!("exgr: {e}"))?;
            rc.predict_all(&pair.test).map_err(|e| e.to_string())?
        }
        MitigationKind::MetaC(params) => {
            let model = metac_fit(kind, hp, &pair.train, s_train, params, seed)
                .map_err(|e| format!("metac: {e}"))?;
            model
                .predict_all(&pair.test, s_test)
                .map_err(|e| e.to_string())?
        }
    };

    let y_true = pair.test.outcome();
    let group = pair.test.group();
    let mut gaps = Vec::new();
    let subgroup =
        metrics::subgroup_audit(y_true, &y_pred, group).map_err(|e| e.to_string())?;
    for gap in subgroup {
        let name = match gap.focal {
            Focal::Group(code) => pair.test.group_names()[usize::from(code)].clone(),
            Focal::Privileged => "privileged".into(),
        };
        gaps.push((Scope::Subgroup, name, gap));
    }
    let aggregate = metrics::aggregate_audit(y_true, &y_pred, group, privileged_codes)
        .map_err(|e| e.to_string())?;
    for gap in aggregate {
        gaps.push((Scope::Aggregate, "privileged".into(), gap));
    }
    let accuracy = metrics::accuracy(y_true, &y_pred).map_err(|e| e.to_string())?;
    Ok((gaps, accuracy))
}
