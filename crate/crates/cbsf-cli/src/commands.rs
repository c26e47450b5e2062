//! Subcommand implementations. Every command writes its report to the given
//! writer and keeps diagnostics on stderr, so output files are clean CSV.

use std::io::Write;

use rayon::prelude::*;

use cbsf::dataset::{
    generate_groups, split_per_user, GroupSpec, RatingMatrix, Split, TrustGraph, UserId,
};
use cbsf::group::{recommend, CandidateConfig, FuzzyCapacity};
use cbsf::metrics::{
    self, evaluate_split, MetricReport,
};
use cbsf::predictor::{predict_matrix, NeighborStrategy};
use cbsf::similarity::{build_similarity_table, Measure, SimilarityTable};

use crate::config::ExperimentConfig;
use crate::error::CliError;

pub struct LoadedData {
    pub full: RatingMatrix,
    pub trust: Option<TrustGraph>,
}

pub fn load_data(cfg: &ExperimentConfig) -> Result<LoadedData, CliError> {
    let mut full = RatingMatrix::load(&cfg.dataset.ratings, cfg.dataset.format.into())?;
    if let Some([lo, hi]) = cfg.dataset.normalize {
        full = full.normalize_scale(lo, hi)?;
    }
    let trust = match &cfg.dataset.trust {
        Some(path) => {
            let graph = TrustGraph::load(path)?;
            if graph.self_loops_dropped > 0 || graph.clamped > 0 {
                eprintln!(
                    "warning: trust file: dropped {} self-loops, clamped {} weights",
                    graph.self_loops_dropped, graph.clamped
                );
            }
            Some(graph)
        }
        None => None,
    };
    Ok(LoadedData { full, trust })
}

fn make_split(cfg: &ExperimentConfig, full: &RatingMatrix) -> Result<Split, CliError> {
    let split = split_per_user(full, cfg.split.test_ratio, cfg.split.seed)?;
    eprintln!(
        "split: {} train / {} test ratings ({} moved back), seed {}",
        split.train.n_ratings(),
        split.test.len(),
        split.moved_back,
        split.seed
    );
    Ok(split)
}

/// One row per measure x neighbor strategy with RMSE/MAE over the test
/// split.
pub fn predict_eval(cfg: &ExperimentConfig, out: &mut impl Write) -> Result<(), CliError> {
    let data = load_data(cfg)?;
    let split = make_split(cfg, &data.full)?;
    let up = cfg.uasim_params()?;
    let cp = cfg.cbs_params()?;
    let tp = cfg.topsis_params()?;
    let k = cfg.neighbors.k;

    writeln!(out, "dataset,method,strategy,k,rmse,mae,evaluated,skipped")?;
    let measures = [
        Measure::Cosine,
        Measure::Taj,
        Measure::Uasim(up),
        Measure::Uasimj(up),
        Measure::Cbs(up, cp),
    ];
    for measure in measures {
        let table = build_similarity_table(&split.train, &measure)?;
        for strategy in [NeighborStrategy::Knn, NeighborStrategy::Topsis(tp)] {
            let rep = evaluate_split(&split, &table, k, &strategy);
            writeln!(
                out,
                "{},{},{},{},{:.6},{:.6},{},{}",
                cfg.dataset.name,
                measure.name(),
                strategy.name(),
                k,
                rep.rmse,
                rep.mae,
                rep.evaluated,
                rep.skipped
            )?;
        }
    }
    Ok(())
}

/// Per-group metric values at one list length.
#[derive(Debug, Clone, Copy)]
struct GroupCell {
    satisfaction: f64,
    rmse_g: f64,
    mae_g: f64,
    fairness1: f64,
    fairness2: f64,
    novelty: f64,
    ntc: Option<f64>,
    ntr: Option<f64>,
    skipped: usize,
}

fn run_group_pipeline(
    cfg: &ExperimentConfig,
    with_trust_metrics: bool,
    out: &mut impl Write,
) -> Result<(), CliError> {
    let data = load_data(cfg)?;
    if with_trust_metrics && data.trust.is_none() {
        return Err(CliError::Config(
            "novelty-eval needs a trust file: set dataset.trust in the config \
             (or use --preset filmtrust)"
                .into(),
        ));
    }
    let split = make_split(cfg, &data.full)?;

    let baseline = cfg.eval.baseline;
    let (measure, method_label) = if baseline {
        // cosine similarity without Borda enrichment approximates the plain
        // Choquet aggregation baseline; labeled as a reimplementation
        (Measure::Cosine, "cosine-baseline-reimpl".to_string())
    } else {
        let m = cfg.measure()?;
        (m, m.name().to_string())
    };
    let table = build_similarity_table(&split.train, &measure)?;

    // The trust-rating novelty always scores pairs with the combined
    // similarity on the same training restriction.
    let cbs_table: Option<SimilarityTable> = if with_trust_metrics {
        match measure {
            Measure::Cbs(..) => None, // reuse `table`
            _ => Some(build_similarity_table(
                &split.train,
                &Measure::Cbs(cfg.uasim_params()?, cfg.cbs_params()?),
            )?),
        }
    } else {
        None
    };
    let ntr_table: &SimilarityTable = cbs_table.as_ref().unwrap_or(&table);

    let groups = generate_groups(
        &data.full,
        cfg.groups.count,
        cfg.groups.min_size,
        cfg.groups.max_size,
        cfg.groups.seed,
    )?;

    let mut sweep = cfg.eval.n_top.clone();
    sweep.sort_unstable();
    sweep.dedup();
    let max_n = *sweep.last().expect("validated nonempty");

    let strategy = cfg.strategy()?;
    let k = cfg.neighbors.k;
    let cand = CandidateConfig {
        n_filter: cfg.candidates.n_filter,
        n_borda: if baseline { 0 } else { cfg.candidates.n_borda },
        n_top: max_n,
    };
    let trust = data.trust.as_ref();

    let per_group: Vec<Vec<GroupCell>> = groups
        .par_iter()
        .map(|g| -> Result<Vec<GroupCell>, cbsf::Error> {
            let pm = predict_matrix(g, k, &strategy, &table, &split.train)?;
            let cap = FuzzyCapacity::build(g, &split.train);
            let rec = recommend(g, &pm, &cand, &cap);
            let cells = sweep
                .iter()
                .map(|&n| {
                    let items = rec.top_items(n);
                    let skipped = items
                        .iter()
                        .filter_map(|&i| pm.item_pos(i))
                        .map(|ip| {
                            (0..pm.n_members())
                                .filter(|&mp| pm.value(mp, ip).is_none())
                                .count()
                        })
                        .sum();
                    GroupCell {
                        satisfaction: metrics::group_pref(&pm, &items),
                        rmse_g: metrics::rmse_g(g, &items, &pm, &cap),
                        mae_g: metrics::mae_g(g, &items, &pm, &cap),
                        fairness1: metrics::fairness_jain(&pm, &items),
                        fairness2: metrics::fairness_var(&pm, &items),
                        novelty: metrics::novelty(&items, &data.full),
                        ntc: (with_trust_metrics)
                            .then(|| metrics::ntc(&items, &data.full, trust.expect("checked")))
                            ,
                        ntr: (with_trust_metrics).then(|| {
                            metrics::ntr(&items, &data.full, trust.expect("checked"), ntr_table)
                        }),
                        skipped,
                    }
                })
                .collect();
            Ok(cells)
        })
        .collect::<Result<_, _>>()?;

    let rows: Vec<MetricReport> = sweep
        .iter()
        .enumerate()
        .map(|(col, &n)| {
            let cells: Vec<&GroupCell> = per_group.iter().map(|row| &row[col]).collect();
            MetricReport {
                dataset: cfg.dataset.name.clone(),
                method: method_label.clone(),
                strategy: strategy.name().to_string(),
                n_top: n,
                satisfaction: mean_finite(cells.iter().map(|c| c.satisfaction)),
                rmse_g: mean_finite(cells.iter().map(|c| c.rmse_g)),
                mae_g: mean_finite(cells.iter().map(|c| c.mae_g)),
                fairness1: mean_finite(cells.iter().map(|c| c.fairness1)),
                fairness2: mean_finite(cells.iter().map(|c| c.fairness2)),
                novelty: Some(mean_finite(cells.iter().map(|c| c.novelty))),
                ntc: with_trust_metrics
                    .then(|| mean_finite(cells.iter().filter_map(|c| c.ntc))),
                ntr: with_trust_metrics
                    .then(|| mean_finite(cells.iter().filter_map(|c| c.ntr))),
                skipped: cells.iter().map(|c| c.skipped).sum(),
            }
        })
        .collect();

    if with_trust_metrics {
        let negatives: usize = rows
            .iter()
            .filter(|r| r.ntr.is_some_and(|v| v < 0.0))
            .count();
        if negatives > 0 {
            eprintln!(
                "warning: {negatives} rows carry negative trust-rating novelty \
                 (trust-similarity mass above 1)"
            );
        }
    }

    MetricReport::write_csv(out, &rows)?;
    Ok(())
}

/// Means over groups, ignoring groups where a metric was not computable.
fn mean_finite(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut n = 0usize;
    for v in values {
        if v.is_finite() {
            sum += v;
            n += 1;
        }
    }
    if n == 0 {
        f64::NAN
    } else {
        sum / n as f64
    }
}

/// Group satisfaction/consensus/fairness metrics averaged over generated
/// groups, one row per list length.
pub fn group_eval(cfg: &ExperimentConfig, out: &mut impl Write) -> Result<(), CliError> {
    run_group_pipeline(cfg, false, out)
}

/// Novelty, trust-count and trust-rating novelty over the same pipeline.
pub fn novelty_eval(cfg: &ExperimentConfig, out: &mut impl Write) -> Result<(), CliError> {
    run_group_pipeline(cfg, true, out)
}

/// Top-N list for an ad-hoc group, with Choquet scores and provenance
/// totals.
pub fn recommend_group(
    cfg: &ExperimentConfig,
    members: &str,
    out: &mut impl Write,
) -> Result<(), CliError> {
    let ids = parse_members(members)?;
    let data = load_data(cfg)?;
    let missing: Vec<UserId> = ids
        .iter()
        .copied()
        .filter(|&u| data.full.user_index(u).is_none())
        .collect();
    if !missing.is_empty() {
        return Err(CliError::Config(format!(
            "unknown member user ids: {missing:?}"
        )));
    }
    let split = make_split(cfg, &data.full)?;
    let table = build_similarity_table(&split.train, &cfg.measure()?)?;
    let g = GroupSpec::new(0, ids);
    let pm = predict_matrix(&g, cfg.neighbors.k, &cfg.strategy()?, &table, &split.train)?;
    let cap = FuzzyCapacity::build(&g, &split.train);
    let cand = CandidateConfig {
        n_filter: cfg.candidates.n_filter,
        n_borda: cfg.candidates.n_borda,
        n_top: cfg.candidates.n_top,
    };
    let rec = recommend(&g, &pm, &cand, &cap);
    rec.write_csv(out)?;
    let (observed, predicted, missing) = pm.provenance_counts();
    writeln!(
        out,
        "# provenance: observed={observed} predicted={predicted} missing={missing}"
    )?;
    Ok(())
}

fn parse_members(arg: &str) -> Result<Vec<UserId>, CliError> {
    let ids: Result<Vec<UserId>, _> = arg
        .split(',')
        .map(|s| s.trim().parse::<UserId>())
        .collect();
    let ids = ids.map_err(|_| {
        CliError::Config(format!(
            "--members: expected comma-separated user ids, got {arg:?}"
        ))
    })?;
    if ids.is_empty() {
        return Err(CliError::Config("--members: list is empty".into()));
    }
    Ok(ids)
}

/// Emits the `user,item,set` split manifest.
pub fn split_manifest(cfg: &ExperimentConfig, out: &mut impl Write) -> Result<(), CliError> {
    let data = load_data(cfg)?;
    let split = make_split(cfg, &data.full)?;
    split.write_manifest(out)?;
    Ok(())
}
