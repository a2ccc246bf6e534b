use dyson_core::concentration::{uniform_integrability_diag, KPolicy};
use dyson_core::gibbs::{
    griffiths_suite, intermediate_density, susceptibility_fv, GriffithsReport,
};
use dyson_core::model::summability::{summability_report_with, DEFAULT_DIVERGENCE_THRESHOLD};
use dyson_core::model::{enumerate_cross_pairs, k_n, SeriesValue};
use dyson_core::sampler::{batch_means, new_chain_with, ChainOptions, ChainState};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use super::{cell, Outcome, Session, Status};
use crate::cli::{GriffithsArgs, IntermediateArgs, SummabilityArgs, SusceptibilityArgs};
use crate::error::{LabError, LabResult};

#[derive(Debug, Serialize)]
struct SusceptibilityRow {
    beta: f64,
    exact_chi: Option<f64>,
    /// `sum_i <sigma_mid sigma_i>`, the quantity the sampler estimates.
    exact_correlation_sum: Option<f64>,
    exact_nn: Option<f64>,
    mc: Vec<ChainResult>,
}

#[derive(Debug, Clone, Serialize)]
struct ChainResult {
    stream: u64,
    correlation_sum: dyson_core::sampler::EstimateWithError,
    nn: dyson_core::sampler::EstimateWithError,
    field_drift: f64,
}

pub fn susceptibility(a: &SusceptibilityArgs, s: &mut Session) -> LabResult<Outcome> {
    let model = s.model(&a.model)?;
    s.params.values.remove("beta");
    let cfg = s.config.sampler.clone();
    if s.config.exact.n.is_none() {
        s.config.exact.n = cfg.n;
    }
    let setup = s.measure_setup(&a.measure, 8)?;
    let grid = s.grid(
        "beta_grid",
        a.beta_grid.clone(),
        s.config.exact.beta_grid.clone(),
        "0:0.6:0.1",
    )?;
    for b in &grid {
        super::check_beta(*b)?;
    }
    let mode = s
        .params
        .pick("mode", a.mode.clone(), None, "exact".to_string());
    let (exact, mc) = match mode.as_str() {
        "exact" => (true, false),
        "mc" => (false, true),
        "both" => (true, true),
        other => {
            return Err(LabError::usage(format!(
                "unknown mode `{other}`; use exact, mc or both"
            )))
        }
    };
    let seed = s.params.pick("seed", a.seed, cfg.seed, 1);
    let burnin = s.params.pick("burnin", a.burnin, cfg.burnin, 2_000);
    let sweeps = s.params.pick("sweeps", a.sweeps, cfg.sweeps, 20_000);
    let chains = s.params.pick("chains", a.chains, cfg.chains, 1).max(1);
    let cutoff = s.params.pick_opt("cutoff", a.cutoff, cfg.cutoff);
    let stream_csv = s.params.pick(
        "stream_csv",
        a.stream_csv.then_some(true),
        cfg.stream_csv,
        false,
    );
    if mc {
        s.params.seed("sampler", seed);
    } else {
        s.params.values.retain(|k, _| {
            !matches!(
                k.as_str(),
                "seed" | "burnin" | "sweeps" | "chains" | "cutoff" | "stream_csv"
            )
        });
    }
    let mid = setup.volume.len() / 2;
    let mut rows = Vec::with_capacity(grid.len());
    for (bi, &beta) in grid.iter().enumerate() {
        let mut row = SusceptibilityRow {
            beta,
            exact_chi: None,
            exact_correlation_sum: None,
            exact_nn: None,
            mc: Vec::new(),
        };
        if exact {
            let m = s.cache.measure(
                &mut s.params,
                setup.volume,
                beta,
                &setup.mask,
                &setup.bc,
                &model.couplings,
            )?;
            let n = setup.volume.len();
            row.exact_chi = Some(susceptibility_fv(&m));
            row.exact_correlation_sum = Some(m.centered_correlation_sum());
            row.exact_nn =
                (n >= 2).then(|| m.correlation_bits((1 << mid) | (1 << (mid + 1).min(n - 1))));
        }
        if mc {
            let results: Vec<LabResult<(ChainResult, Vec<(f64, f64, f64)>)>> = (0..chains as u64)
                .into_par_iter()
                .map(|c| {
                    let stream = bi as u64 * chains as u64 + c;
                    let options = ChainOptions {
                        stream,
                        cutoff,
                        ..ChainOptions::default()
                    };
                    let mut chain = new_chain_with(
                        setup.volume,
                        beta,
                        &setup.mask,
                        &setup.bc,
                        &model.couplings,
                        seed,
                        &options,
                    )?;
                    run_chain(
                        &mut chain,
                        mid,
                        burnin as u64,
                        sweeps as u64,
                        stream,
                        stream_csv,
                    )
                })
                .collect();
            for (c, r) in results.into_iter().enumerate() {
                let (res, stream_rows) = r?;
                if stream_csv {
                    let rows: Vec<Vec<String>> = stream_rows
                        .iter()
                        .enumerate()
                        .map(|(t, (m, e, x))| {
                            vec![(t + 1).to_string(), cell(*m), cell(*e), cell(*x)]
                        })
                        .collect();
                    s.artifacts.csv(
                        &format!("stream-b{bi:03}-c{c:02}.csv"),
                        &["sweep", "magnetization", "energy", "correlation_sum"],
                        &rows,
                    )?;
                }
                row.mc.push(res);
            }
        }
        rows.push(row);
    }
    let header = [
        "beta",
        "exact_chi",
        "exact_correlation_sum",
        "exact_nn",
        "mc_correlation_sum",
        "mc_stderr",
        "mc_nn",
        "mc_nn_stderr",
    ];
    let mut table = Vec::new();
    let mut lines = vec![format!(
        "{:>8} {:>14} {:>14} {:>22}",
        "beta", "chi_n", "sum_i <s_m s_i>", "mc (stderr)"
    )];
    for r in &rows {
        let opt = |v: Option<f64>| v.map(cell).unwrap_or_default();
        let (mc_mean, mc_se, nn_mean, nn_se) = combine(&r.mc);
        table.push(vec![
            cell(r.beta),
            opt(r.exact_chi),
            opt(r.exact_correlation_sum),
            opt(r.exact_nn),
            opt(mc_mean),
            opt(mc_se),
            opt(nn_mean),
            opt(nn_se),
        ]);
        lines.push(format!(
            "{:>8.4} {:>14} {:>14} {:>22}",
            r.beta,
            r.exact_chi
                .map(|v| format!("{v:.8}"))
                .unwrap_or_else(|| "-".into()),
            r.exact_correlation_sum
                .map(|v| format!("{v:.8}"))
                .unwrap_or_else(|| "-".into()),
            mc_mean
                .map(|v| format!("{v:.5} ({:.1e})", mc_se.unwrap_or(0.0)))
                .unwrap_or_else(|| "-".into()),
        ));
    }
    s.table("susceptibility", &header, &table)?;
    let mut out = Outcome::new(
        Status::Ok,
        json!({ "n": setup.n, "couplings": model.label, "rows": rows }),
    )
    .metric("betas", grid.len());
    if let Some(last) = rows.last() {
        out = out.metric("chi_last", last.exact_chi.or_else(|| combine(&last.mc).0));
    }
    out.lines = lines;
    Ok(out)
}

/// Mean of the chain means and its standard error.
fn combine(chains: &[ChainResult]) -> (Option<f64>, Option<f64>, Option<f64>, Option<f64>) {
    if chains.is_empty() {
        return (None, None, None, None);
    }
    let c = chains.len() as f64;
    let mean = |f: &dyn Fn(&ChainResult) -> f64| chains.iter().map(f).sum::<f64>() / c;
    let se = |f: &dyn Fn(&ChainResult) -> f64| {
        (chains.iter().map(|r| f(r).powi(2)).sum::<f64>()).sqrt() / c
    };
    (
        Some(mean(&|r| r.correlation_sum.mean)),
        Some(se(&|r| r.correlation_sum.stderr)),
        Some(mean(&|r| r.nn.mean)),
        Some(se(&|r| r.nn.stderr)),
    )
}

fn run_chain(
    chain: &mut ChainState,
    mid: usize,
    burnin: u64,
    sweeps: u64,
    stream: u64,
    keep_stream: bool,
) -> LabResult<(ChainResult, Vec<(f64, f64, f64)>)> {
    chain.sweep(burnin);
    let right = (mid + 1).min(chain.sites() - 1);
    let mut sums = Vec::with_capacity(sweeps as usize);
    let mut nn = Vec::with_capacity(sweeps as usize);
    let mut stream_rows = Vec::new();
    for _ in 0..sweeps {
        chain.sweep(1);
        let x = chain.centered_correlation_sample();
        let spins = chain.spins();
        sums.push(x);
        nn.push((spins[mid] * spins[right]) as f64);
        if keep_stream {
            stream_rows.push((chain.magnetization() as f64, chain.energy(), x));
        }
    }
    let mut correlation_sum = batch_means(&sums)?;
    let mut nn_est = batch_means(&nn)?;
    for e in [&mut correlation_sum, &mut nn_est] {
        if (burnin as f64) < 10.0 * e.autocorrelation_time {
            e.warning = true;
        }
    }
    Ok((
        ChainResult {
            stream,
            correlation_sum,
            nn: nn_est,
            field_drift: chain.max_field_drift(),
        },
        stream_rows,
    ))
}

pub fn verify_griffiths(a: &GriffithsArgs, s: &mut Session) -> LabResult<Outcome> {
    let model = s.model(&a.model)?;
    s.params.values.remove("beta");
    let n = s.params.pick("n", a.n, s.config.exact.n, 6);
    if !(2..=dyson_core::model::DEFAULT_ENUMERATION_LIMIT).contains(&n) {
        return Err(LabError::usage("--n must lie in 2..=24"));
    }
    let grid = s.grid(
        "beta_grid",
        a.beta_grid.clone(),
        s.config.exact.beta_grid.clone(),
        "0:0.6:0.1",
    )?;
    for w in grid.windows(2) {
        if !(w[1] > w[0]) {
            return Err(LabError::usage("--beta-grid must be strictly increasing"));
        }
    }
    for b in &grid {
        super::check_beta(*b)?;
    }
    let tol = s
        .params
        .pick("tolerance", a.tolerance, s.config.exact.tolerance, 1e-12);
    let label = model.label.as_f64().unwrap_or(f64::NAN);
    let mut rep = GriffithsReport::default();
    for size in 2..=n {
        griffiths_suite(&model.couplings, label, size, &grid, tol, &mut rep)?;
    }
    let rows: Vec<Vec<String>> = rep
        .violations
        .iter()
        .map(|v| {
            vec![
                format!("{:?}", v.kind),
                v.sites.to_string(),
                cell(v.beta),
                format!("{:#b}", v.subset),
                v.mask_k
                    .map(|k| k.to_string())
                    .unwrap_or_else(|| "full".into()),
                cell(v.gap),
            ]
        })
        .collect();
    s.artifacts.csv(
        "violations.csv",
        &["kind", "sites", "beta", "subset", "mask_k", "gap"],
        &rows,
    )?;
    let pass = rep.passed();
    let lines = vec![
        format!(
            "{} checks, {} violations, worst gap {:.3e}",
            rep.checks,
            rep.violations.len(),
            rep.worst_gap
        ),
        format!(
            "sizes 2..={n}, {} beta values, tolerance {tol:e}",
            grid.len()
        ),
    ];
    let mut out = Outcome::new(
        Status::from_pass(pass),
        json!({ "couplings": model.label, "report": rep }),
    )
    .metric("checks", rep.checks)
    .metric("violations", rep.violations.len())
    .metric("worst_gap", rep.worst_gap);
    out.lines = lines;
    Ok(out)
}

#[derive(Debug, Serialize)]
struct IdentityRow {
    k: usize,
    entropy: f64,
    minus_mean_w: f64,
    log_normalizer: f64,
    identity_residual: f64,
    telescoping_residual: f64,
}

pub fn intermediate(a: &IntermediateArgs, s: &mut Session) -> LabResult<Outcome> {
    let model = s.model(&a.model)?;
    let n = s.params.pick("n", a.n, s.config.exact.n, 2);
    if n == 0 || 2 * n + 1 > dyson_core::model::DEFAULT_ENUMERATION_LIMIT {
        return Err(LabError::usage("--n must satisfy 1 <= 2n + 1 <= 24"));
    }
    let kmax = k_n(n);
    let ks = match s.params.pick_opt("k", a.k.clone(), None) {
        Some(text) => crate::formats::parse_usize_grid(&text)
            .map_err(|e| LabError::usage(format!("--k: {e}")))?,
        None => (0..=kmax).collect(),
    };
    let tol = s
        .params
        .pick("tolerance", a.tolerance, s.config.exact.tolerance, 1e-10);
    let mut rows = Vec::with_capacity(ks.len());
    for &k in &ks {
        let d = intermediate_density(n, k, model.beta, &model.couplings)?;
        rows.push(IdentityRow {
            k,
            entropy: d.entropy,
            minus_mean_w: d.minus_mean_w,
            log_normalizer: d.log_normalizer,
            identity_residual: d.identity_residual,
            telescoping_residual: d.telescoping_residual,
        });
    }
    // The first k_N pairs of the canonical order are the cross pairs of [-N, N], for every N up to max(n, 8).
    let kn_checked = n.max(8);
    let full = enumerate_cross_pairs(kn_checked);
    let kn_property = (1..=kn_checked).all(|m| {
        let prefix = &full[..k_n(m)];
        let mut got: Vec<(i64, i64)> = prefix.iter().map(|p| (p.left, p.right)).collect();
        let mut want: Vec<(i64, i64)> = (1..=m as i64)
            .flat_map(|i| (0..=m as i64).map(move |j| (-i, j)))
            .collect();
        got.sort_unstable();
        want.sort_unstable();
        got == want && enumerate_cross_pairs(m) == prefix
    });
    let ui = uniform_integrability_diag(
        &[n],
        &KPolicy::List { ks: ks.clone() },
        model.beta,
        &model.couplings,
    )?;
    let worst_identity = rows.iter().map(|r| r.identity_residual).fold(0.0, f64::max);
    let worst_telescoping = rows
        .iter()
        .map(|r| r.telescoping_residual)
        .fold(0.0, f64::max);
    let pass = worst_identity <= tol && worst_telescoping <= tol && kn_property;
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.k.to_string(),
                cell(r.entropy),
                cell(r.minus_mean_w),
                cell(r.log_normalizer),
                cell(r.identity_residual),
                cell(r.telescoping_residual),
            ]
        })
        .collect();
    s.table(
        "intermediate",
        &[
            "k",
            "entropy",
            "minus_mean_w",
            "log_normalizer",
            "identity_residual",
            "telescoping_residual",
        ],
        &table,
    )?;
    let ui_rows: Vec<Vec<String>> = ui
        .iter()
        .map(|r| {
            vec![
                r.k.to_string(),
                cell(r.entropy),
                cell(r.bound),
                cell(r.chi),
                r.exceeds.to_string(),
            ]
        })
        .collect();
    s.table(
        "uniform-integrability",
        &["k", "entropy", "bound", "chi", "exceeds"],
        &ui_rows,
    )?;
    let lines = vec![
        format!("N = {n}, k_N = {kmax}, {} indices", ks.len()),
        format!("worst entropy-identity residual {worst_identity:.3e}, telescoping residual {worst_telescoping:.3e}"),
        format!("k_N prefix property for N <= {kn_checked}: {kn_property}"),
    ];
    let mut out = Outcome::new(
        Status::from_pass(pass),
        json!({ "n": n, "k_n": kmax, "rows": rows, "kn_property": kn_property, "uniform_integrability": ui }),
    )
    .metric("worst_identity_residual", worst_identity)
    .metric("worst_telescoping_residual", worst_telescoping)
    .metric("kn_property", kn_property);
    out.lines = lines;
    Ok(out)
}

pub fn summability(a: &SummabilityArgs, s: &mut Session) -> LabResult<Outcome> {
    let model = s.model(&a.model)?;
    s.params.values.remove("beta");
    let threshold = s
        .params
        .pick("threshold", a.threshold, None, DEFAULT_DIVERGENCE_THRESHOLD);
    if !(threshold > 0.0 && threshold.is_finite()) {
        return Err(LabError::usage("--threshold must be positive"));
    }
    let r = summability_report_with(&model.couplings, threshold);
    let show = |v: &SeriesValue| match v {
        SeriesValue::Finite(i) => format!("[{:.12}, {:.12}]", i.lo, i.hi),
        SeriesValue::Divergent {
            threshold,
            witness_index,
        } => {
            format!("divergent (partial sum exceeds {threshold} by i = {witness_index:.3e})")
        }
    };
    let lines = vec![
        format!("sum J          [{:.12}, {:.12}]", r.total.lo, r.total.hi),
        format!("kappa          [{:.12}, {:.12}]", r.kappa.lo, r.kappa.hi),
        format!("sum_i sum_k>=i J(k)^2  {}", show(&r.sum_tail_squares)),
        format!("sup_p p J(p)   {}", r.sup_p_jp),
        format!("C1             {}", show(&r.c1)),
        format!(
            "conditions (i) {}, (ii) {}, (iii) {}",
            r.condition_i, r.condition_ii, r.condition_iii
        ),
    ];
    let mut out = Outcome::new(Status::Ok, json!({ "couplings": model.label, "report": r }))
        .metric("condition_i", r.condition_i)
        .metric("condition_ii", r.condition_ii)
        .metric("condition_iii", r.condition_iii)
        .metric("c1_upper", r.c1.finite().map(|i| i.hi));
    out.lines = lines;
    Ok(out)
}
