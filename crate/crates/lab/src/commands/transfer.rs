use dyson_core::concentration::{constants, ChiSource};
use dyson_core::gibbs::{boltzmann, susceptibility_fv};
use dyson_core::model::{BoundaryCondition, InteractionMask, Window};
use dyson_core::transfer::{
    build_truncation, eigenfunction_density_route, pressure_table, principal_eigen, variation,
    DEFAULT_MAX_ITERATIONS, DEFAULT_TOLERANCE,
};
use serde_json::json;

use super::{cell, Outcome, Session, Status};
use crate::cli::{EigenfunctionArgs, PressureArgs};
use crate::error::{LabError, LabResult};
use crate::formats::Dump;

/// Largest depth whose vectors are also written as CSV.
const CSV_VECTOR_DEPTH: usize = 12;

pub fn pressure(a: &PressureArgs, s: &mut Session) -> LabResult<Outcome> {
    let model = s.model(&a.model)?;
    let cfg = s.config.transfer.clone();
    let depths = s.usize_grid("depths", a.depths.clone(), cfg.depths.clone(), "1..12")?;
    let tol = s
        .params
        .pick("tolerance", a.tolerance, cfg.tolerance, DEFAULT_TOLERANCE);
    let rows = pressure_table(&depths, model.beta, &model.couplings, tol)?;
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.m.to_string(),
                cell(r.log_lambda),
                r.gap.map(cell).unwrap_or_default(),
                cell(r.residual_h),
                cell(r.residual_nu),
            ]
        })
        .collect();
    s.table(
        "pressure",
        &["m", "log_lambda", "gap", "residual_h", "residual_nu"],
        &table,
    )?;
    let mut out = Outcome::new(
        Status::Ok,
        json!({ "beta": model.beta, "couplings": model.label, "rows": rows }),
    );
    out.lines
        .push(format!("{:>4} {:>22} {:>12}", "m", "log lambda", "gap"));
    for r in &rows {
        out.lines.push(format!(
            "{:>4} {:>22.15} {:>12}",
            r.m,
            r.log_lambda,
            r.gap
                .map(|g| format!("{g:.3e}"))
                .unwrap_or_else(|| "-".into())
        ));
    }
    let last = rows.last().map(|r| r.log_lambda);
    Ok(out
        .metric("depths", depths.len())
        .metric("log_lambda_last", last))
}

pub fn eigenfunction(a: &EigenfunctionArgs, s: &mut Session) -> LabResult<Outcome> {
    let model = s.model(&a.model)?;
    let cfg = s.config.transfer.clone();
    let depth = s.params.pick("depth", a.depth, cfg.depth, 8);
    let tol = s
        .params
        .pick("tolerance", a.tolerance, cfg.tolerance, DEFAULT_TOLERANCE);
    let max_iters = s.params.pick(
        "max_iterations",
        a.max_iterations,
        cfg.max_iterations,
        DEFAULT_MAX_ITERATIONS,
    );
    let t = build_truncation(depth, model.beta, &model.couplings)?;
    let e = principal_eigen(&t, tol, max_iters)?;
    let mask_id = InteractionMask::half_line_right().id();
    for (name, v) in [("h.dyex", &e.h), ("nu.dyex", &e.nu)] {
        s.artifacts.add(
            name,
            Dump::new(depth, model.beta, mask_id, v.clone())?.to_bytes(),
        );
    }
    if depth <= CSV_VECTOR_DEPTH && s.csv_enabled() {
        let rows: Vec<Vec<String>> = (0..e.h.len())
            .map(|x| vec![x.to_string(), cell(e.h[x]), cell(e.nu[x])])
            .collect();
        s.artifacts.csv("eigen.csv", &["state", "h", "nu"], &rows)?;
    }
    let var = variation(&e.h);
    let var_rows: Vec<Vec<String>> = var
        .iter()
        .enumerate()
        .map(|(d, v)| vec![d.to_string(), cell(*v)])
        .collect();
    s.table("variation", &["d", "var_d"], &var_rows)?;
    let record = json!({
        "m": depth,
        "beta": model.beta,
        "alpha_or_table_id": model.label,
        "lambda": e.lambda,
        "log_lambda": e.log_lambda,
        "residuals": { "h": e.residual_h, "nu": e.residual_nu },
        "iterations": e.iterations,
        "vector_dump_path": { "h": "h.dyex", "nu": "nu.dyex" },
    });
    s.artifacts.json("eigen.json", &record)?;

    let mut status = Status::Ok;
    let mut lines = vec![
        format!(
            "lambda = {:.15}, log lambda = {:.15}",
            e.lambda, e.log_lambda
        ),
        format!(
            "residuals: h {:.3e}, nu {:.3e} after {} iterations",
            e.residual_h, e.residual_nu, e.iterations
        ),
    ];
    let density_n = s.params.pick_opt("density_n", a.density_n, cfg.density_n);
    let mut route_json = serde_json::Value::Null;
    if let Some(n) = density_n {
        let left = s
            .params
            .pick("left_window", a.left_window, cfg.left_window, n);
        let route = eigenfunction_density_route(n, depth, model.beta, &model.couplings, left)?;
        // Uniform bounds exp(+-8 D beta^2 C1), with D built from the exact susceptibility of the left window.
        let nu_minus = boltzmann(
            Window::new(-(left as i64), -1)?,
            model.beta,
            &InteractionMask::full(),
            &BoundaryCondition::Free,
            &model.couplings,
        )?;
        let chi = susceptibility_fv(&nu_minus);
        let bundle = constants(
            model.beta,
            chi,
            ChiSource::ExactFv { sites: left },
            &model.couplings,
            &InteractionMask::full(),
        )?;
        let c1 = bundle.c1_upper()?;
        let bound = (8.0 * bundle.d_herbst * model.beta * model.beta * c1).exp();
        let (fmin, fmax) = route.f.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), v| {
            (lo.min(*v), hi.max(*v))
        });
        let within = fmin >= 1.0 / bound && fmax <= bound;
        let max_distance = s.params.pick_opt("max_distance", a.max_distance, None);
        let close = max_distance.is_none_or(|m| route.relative_distance <= m);
        if max_distance.is_some() {
            status = Status::from_pass(close && within);
        }
        let rows: Vec<Vec<String>> = (0..route.f.len())
            .map(|x| vec![x.to_string(), cell(route.f[x]), cell(route.eigen.h[x])])
            .collect();
        s.table("density-route", &["state", "f_plus", "h"], &rows)?;
        lines.push(format!(
            "density route N={n}, left window {left}: relative sup distance {:.3e}, residual {:.3e}",
            route.relative_distance, route.residual
        ));
        lines.push(format!(
            "f range [{fmin:.6}, {fmax:.6}] within [{:.6}, {bound:.6}]: {within}",
            1.0 / bound
        ));
        route_json = json!({
            "n": n,
            "left_window": left,
            "relative_distance": route.relative_distance,
            "residual": route.residual,
            "f_min": fmin,
            "f_max": fmax,
            "uniform_bound": bound,
            "within_bounds": within,
            "d": bundle.d_herbst,
            "chi": chi,
            "c1_upper": c1,
        });
    } else if a.max_distance.is_some() {
        return Err(LabError::usage("--max-distance needs --density-n"));
    }
    let mut out = Outcome::new(
        status,
        json!({ "eigen": record, "variation": var, "density_route": route_json }),
    )
    .metric("log_lambda", e.log_lambda)
    .metric("residual_h", e.residual_h);
    if let Some(d) = route_json.get("relative_distance") {
        out = out.metric("relative_distance", d.clone());
    }
    out.lines = lines;
    Ok(out)
}
