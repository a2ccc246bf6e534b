use dyson_core::concentration::{
    constants, continuity_modulus, herbst_scan, verify_gcb as core_gcb, verify_lsi as core_lsi,
    verify_mcb_family, ChiSource, ConcentrationReport, ConstantBundle, FamilySpec,
};
use dyson_core::gibbs::griffiths::straddling_window;
use dyson_core::gibbs::{susceptibility_fv, ExactMeasure};
use dyson_core::model::{BoundaryCondition, InteractionMask, LocalFunction};
use serde_json::json;

use super::{cell, Model, Outcome, Session, Status};
use crate::cli::{HerbstArgs, ModulusArgs, VerifyArgs, VerifyMcbArgs};
use crate::error::{LabError, LabResult};

const DEFAULT_TRIALS: usize = 10_000;
const DEFAULT_SEED: u64 = 7;

/// The measure under test, its constants and the chosen `D`.
struct Instance {
    model: Model,
    measure: ExactMeasure,
    bundle: ConstantBundle,
}

fn instance(a: &VerifyArgs, s: &mut Session) -> LabResult<Instance> {
    let model = s.model(&a.model)?;
    let setup = s.measure_setup(&a.measure, 4)?;
    let measure = s.cache.measure(
        &mut s.params,
        setup.volume,
        model.beta,
        &setup.mask,
        &setup.bc,
        &model.couplings,
    )?;
    let chi_flag = s.params.pick_opt("chi", a.chi, s.config.concentration.chi);
    let (chi, source) = match chi_flag {
        Some(c) => (c, ChiSource::User),
        None => (
            susceptibility_fv(&measure),
            ChiSource::ExactFv { sites: setup.n },
        ),
    };
    let bundle = constants(model.beta, chi, source, &model.couplings, &setup.mask)?;
    Ok(Instance {
        model,
        measure,
        bundle,
    })
}

fn family(a: &VerifyArgs, s: &mut Session) -> (FamilySpec, usize, u64) {
    let cfg = s.config.concentration.clone();
    let trials = s
        .params
        .pick("trials", a.trials, cfg.trials, DEFAULT_TRIALS);
    let seed = s.params.pick("seed", a.seed, cfg.seed, DEFAULT_SEED);
    let search_trials = s.params.pick(
        "search_trials",
        a.search_trials,
        cfg.search_trials,
        FamilySpec::default().search_trials,
    );
    s.params.seed("family", seed);
    (
        FamilySpec {
            search_trials,
            ..FamilySpec::default()
        },
        trials,
        seed,
    )
}

fn constant(a: &VerifyArgs, s: &mut Session, default: f64) -> LabResult<f64> {
    let d = s.params.pick(
        "constant",
        a.constant,
        s.config.concentration.constant,
        default,
    );
    if !(d > 0.0 && d.is_finite()) {
        return Err(LabError::usage("--constant must be positive"));
    }
    Ok(d)
}

/// Stores the report (and the witness on failure) and builds the outcome.
fn finish(s: &mut Session, inst: &Instance, rep: ConcentrationReport) -> LabResult<Outcome> {
    s.artifacts.json(
        "report.json",
        &json!({ "constants": inst.bundle, "report": rep }),
    )?;
    if !rep.pass {
        s.artifacts.json(
            "witness.json",
            &json!({ "description": rep.worst_witness, "ratio": rep.worst_ratio, "table": rep.witness_table }),
        )?;
    }
    let rows: Vec<Vec<String>> = rep
        .margins
        .iter()
        .map(|m| vec![m.label.clone(), cell(m.worst_ratio), cell(m.margin)])
        .collect();
    s.table("margins", &["family", "worst_ratio", "margin"], &rows)?;
    let mut lines = vec![
        format!(
            "n = {}, beta = {}, chi = {:.10} ({:?})",
            inst.measure.sites(),
            inst.model.beta,
            inst.bundle.chi,
            inst.bundle.chi_source
        ),
        format!("D = {:.10}, {} functions checked", rep.constant, rep.trials),
    ];
    for m in &rep.margins {
        lines.push(format!(
            "  {:<16} worst ratio {:.9}",
            m.label, m.worst_ratio
        ));
    }
    lines.push(format!(
        "worst: {} (ratio {:.9})",
        rep.worst_witness, rep.worst_ratio
    ));
    let mut out = Outcome::new(
        Status::from_pass(rep.pass),
        json!({ "couplings": inst.model.label, "constants": inst.bundle, "report": rep }),
    )
    .metric("constant", rep.constant)
    .metric("trials", rep.trials)
    .metric("worst_ratio", rep.worst_ratio);
    out.lines = lines;
    Ok(out)
}

pub fn verify_lsi(a: &VerifyArgs, s: &mut Session) -> LabResult<Outcome> {
    let inst = instance(a, s)?;
    let d = constant(a, s, inst.bundle.d_lsi_bound)?;
    let (spec, trials, seed) = family(a, s);
    let rep = core_lsi(&inst.measure, d, &spec, trials, seed)?;
    finish(s, &inst, rep)
}

pub fn verify_gcb(a: &VerifyArgs, s: &mut Session) -> LabResult<Outcome> {
    let inst = instance(a, s)?;
    let d = constant(a, s, inst.bundle.d_herbst)?;
    let (spec, trials, seed) = family(a, s);
    let rep = core_gcb(&inst.measure, d, &spec, trials, seed)?;
    finish(s, &inst, rep)
}

pub fn verify_mcb(a: &VerifyMcbArgs, s: &mut Session) -> LabResult<Outcome> {
    let inst = instance(&a.verify, s)?;
    let d = constant(&a.verify, s, inst.bundle.d_herbst)?;
    let moments = s.params.pick(
        "moments",
        a.moments.clone(),
        s.config.concentration.moments.clone(),
        vec![2, 4, 6, 8],
    );
    if moments.is_empty() || moments.contains(&0) {
        return Err(LabError::usage("--moments must be positive integers"));
    }
    let (spec, trials, seed) = family(&a.verify, s);
    let rep = verify_mcb_family(&inst.measure, d, &spec, trials, seed, &moments)?;
    finish(s, &inst, rep)
}

pub fn herbst(a: &HerbstArgs, s: &mut Session) -> LabResult<Outcome> {
    let model = s.model(&a.model)?;
    let setup = s.measure_setup(&a.measure, 6)?;
    let m = s.cache.measure(
        &mut s.params,
        setup.volume,
        model.beta,
        &setup.mask,
        &setup.bc,
        &model.couplings,
    )?;
    let sites = s.params.pick("sites", a.sites.clone(), None, vec![0, 1]);
    let coeffs = s
        .params
        .pick("coeffs", a.coeffs.clone(), None, vec![1.0, -0.5]);
    if sites.len() != coeffs.len() {
        return Err(LabError::usage(
            "--sites and --coeffs must have the same length",
        ));
    }
    let f = LocalFunction::linear(&sites, &coeffs)?;
    let lambdas = s.grid(
        "lambdas",
        a.lambdas.clone(),
        s.config.concentration.lambdas.clone(),
        "0.05:1:0.05",
    )?;
    let chi_flag = s.params.pick_opt("chi", a.chi, s.config.concentration.chi);
    let (chi, source) = match chi_flag {
        Some(c) => (c, ChiSource::User),
        None => (susceptibility_fv(&m), ChiSource::ExactFv { sites: setup.n }),
    };
    let bundle = constants(model.beta, chi, source, &model.couplings, &setup.mask)?;
    let d_lsi = s.params.pick(
        "constant",
        a.constant,
        s.config.concentration.constant,
        bundle.d_lsi_bound,
    );
    let scan = herbst_scan(&m, &f, &lambdas, d_lsi, bundle.suac)?;
    let rows: Vec<Vec<String>> = scan
        .rows
        .iter()
        .map(|r| {
            vec![
                cell(r.lambda),
                cell(r.u),
                cell(r.du),
                r.violation.to_string(),
            ]
        })
        .collect();
    s.table("herbst", &["lambda", "u", "du", "violation"], &rows)?;
    let lines = vec![
        format!(
            "n = {}, F = linear on {sites:?} with {coeffs:?}, mean {:.12}",
            setup.n, scan.mean
        ),
        format!(
            "D_lsi = {d_lsi:.10}, suac = {:.10}, slope bound {:.10}",
            bundle.suac, scan.slope_bound
        ),
        format!(
            "max u' = {:.10}, {} violations over {} lambdas",
            scan.rows
                .iter()
                .map(|r| r.du)
                .fold(f64::NEG_INFINITY, f64::max),
            scan.violations,
            scan.rows.len()
        ),
    ];
    let mut out = Outcome::new(
        Status::from_pass(scan.violations == 0),
        json!({ "couplings": model.label, "constants": bundle, "d_lsi": d_lsi, "scan": scan }),
    )
    .metric("slope_bound", scan.slope_bound)
    .metric("violations", scan.violations);
    out.lines = lines;
    Ok(out)
}

pub fn modulus(a: &ModulusArgs, s: &mut Session) -> LabResult<Outcome> {
    let model = s.model(&a.model)?;
    let ns = s.usize_grid(
        "ns",
        a.ns.clone(),
        s.config.concentration.ns.clone(),
        "1,2,4,8,16,32,64,128,256,512,1024,2048,4096,8192,16384,32768",
    )?;
    if ns.is_empty() || ns.contains(&0) {
        return Err(LabError::usage("--ns must list positive integers"));
    }
    let explicit = s
        .params
        .pick_opt("constant", a.constant, s.config.concentration.constant);
    let (d, bundle) = match explicit {
        Some(d) if d > 0.0 && d.is_finite() => (d, None),
        Some(_) => return Err(LabError::usage("--constant must be positive")),
        None => {
            let chi_n = s.params.pick("chi_n", a.chi_n, None, 8);
            if chi_n == 0 || chi_n > dyson_core::model::DEFAULT_ENUMERATION_LIMIT {
                return Err(LabError::usage("--chi-n must lie in 1..=24"));
            }
            let m = s.cache.measure(
                &mut s.params,
                straddling_window(chi_n),
                model.beta,
                &InteractionMask::full(),
                &BoundaryCondition::Free,
                &model.couplings,
            )?;
            let chi = susceptibility_fv(&m);
            let b = constants(
                model.beta,
                chi,
                ChiSource::ExactFv { sites: chi_n },
                &model.couplings,
                &InteractionMask::full(),
            )?;
            (b.d_herbst, Some(b))
        }
    };
    let rows = continuity_modulus(&ns, d, model.beta, &model.couplings)?;
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| vec![r.n.to_string(), cell(r.u_n), cell(r.v_n), cell(r.modulus)])
        .collect();
    s.table("modulus", &["n", "u_n", "v_n", "modulus"], &table)?;
    let monotone = rows
        .windows(2)
        .all(|w| w[1].u_n <= w[0].u_n && w[1].modulus <= w[0].modulus);
    let mut lines = vec![
        format!(
            "D = {d:.10}{}",
            if bundle.is_some() {
                " (Herbst constant from exact chi)"
            } else {
                ""
            }
        ),
        format!("{:>8} {:>14} {:>14} {:>14}", "n", "u_n", "v_n", "modulus"),
    ];
    for r in &rows {
        lines.push(format!(
            "{:>8} {:>14.6e} {:>14.6e} {:>14.6e}",
            r.n, r.u_n, r.v_n, r.modulus
        ));
    }
    let mut out = Outcome::new(
        Status::Ok,
        json!({ "couplings": model.label, "beta": model.beta, "d": d, "constants": bundle, "rows": rows, "monotone": monotone }),
    )
    .metric("d", d)
    .metric("u_last", rows.last().map(|r| r.u_n))
    .metric("monotone", monotone);
    out.lines = lines;
    Ok(out)
}
