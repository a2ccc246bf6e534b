//! Verification suites over families of test functions on exact measures.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gibbs::functional::{tabulate, LSI_SEARCH_MAX_SITES};
use crate::gibbs::{dirichlet_form, entropy_of_square, lsi_constant_search, ExactMeasure};
use crate::math::{abs, exp, exp_m1, gamma, ln_1p, powf};
use crate::model::LocalFunction;
use crate::par::map_indices;

/// Relative slack on every pass/fail ratio.
pub const RATIO_SLACK: f64 = 1e-9;

/// Largest support of the random sparse tables.
pub const MAX_SPARSE_SUPPORT: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum ReportKind {
    Lsi,
    Gcb,
    Mcb,
    Tail,
}

/// Which test functions a suite draws.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FamilySpec {
    /// Random tables on at most `max_support` sites.
    pub sparse_tables: bool,
    /// `c + sum_i a_i sigma_i` with random signs.
    pub linear_forms: bool,
    /// Maximizer of the log-Sobolev search (volumes up to 6 sites).
    pub lsi_witnesses: bool,
    pub max_support: usize,
    /// Random starts given to the log-Sobolev search.
    pub search_trials: usize,
}

impl Default for FamilySpec {
    fn default() -> Self {
        FamilySpec {
            sparse_tables: true,
            linear_forms: true,
            lsi_witnesses: true,
            max_support: MAX_SPARSE_SUPPORT,
            search_trials: 24,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Margin {
    pub label: String,
    pub worst_ratio: f64,
    /// `1 - worst_ratio`; negative on failure.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConcentrationReport {
    pub kind: ReportKind,
    pub constant: f64,
    /// Functions (or moments) actually checked.
    pub trials: usize,
    pub worst_ratio: f64,
    pub worst_witness: String,
    /// Values of the worst function over the volume, indexed by packed configuration.
    pub witness_table: Option<Vec<f64>>,
    pub pass: bool,
    pub margins: Vec<Margin>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Family {
    Sparse,
    Linear,
}

impl Family {
    fn label(self) -> &'static str {
        match self {
            Family::Sparse => "sparse-table",
            Family::Linear => "linear-form",
        }
    }
}

fn families(spec: &FamilySpec) -> Result<Vec<Family>> {
    if spec.max_support == 0 || spec.max_support > MAX_SPARSE_SUPPORT {
        return Err(Error::param(
            "max_support",
            format!("must lie in 1..={MAX_SPARSE_SUPPORT}"),
        ));
    }
    let mut out = Vec::new();
    if spec.sparse_tables {
        out.push(Family::Sparse);
    }
    if spec.linear_forms {
        out.push(Family::Linear);
    }
    Ok(out)
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    exp(rng.random_range(crate::math::ln(lo)..crate::math::ln(hi)))
}

/// Draws one function table over the volume of `n` sites.
fn draw(family: Family, n: usize, max_support: usize, rng: &mut ChaCha8Rng) -> (Vec<f64>, String) {
    let size = 1usize << n;
    let offset = if rng.random::<bool>() { 1.0 } else { 0.0 };
    let amplitude = log_uniform(rng, 1e-2, 4.0);
    match family {
        Family::Sparse => {
            let s = rng.random_range(1..=max_support.min(n));
            let support: Vec<usize> = rand::seq::index::sample(rng, n, s).into_vec();
            let local: Vec<f64> = (0..1usize << s)
                .map(|_| offset + amplitude * rng.random_range(-1.0..=1.0))
                .collect();
            let table = (0..size)
                .map(|x| {
                    let mut idx = 0;
                    for (k, p) in support.iter().enumerate() {
                        idx |= (x >> p & 1) << k;
                    }
                    local[idx]
                })
                .collect();
            (
                table,
                format!("sparse table on positions {support:?}, amplitude {amplitude:.3e}"),
            )
        }
        Family::Linear => {
            let coeffs: Vec<f64> = (0..n)
                .map(|_| {
                    let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                    sign * amplitude * rng.random_range(0.0..=1.0)
                })
                .collect();
            let table = (0..size)
                .map(|x| {
                    let mut v = offset;
                    for (p, a) in coeffs.iter().enumerate() {
                        v += if x >> p & 1 == 1 { *a } else { -*a };
                    }
                    v
                })
                .collect();
            (
                table,
                format!("linear form {offset} + sum a_i sigma_i, a = {coeffs:.3?}"),
            )
        }
    }
}

/// `||delta(F)||_2^2` of a table over the volume.
pub fn table_total_oscillation(f: &[f64], n: usize) -> f64 {
    (0..n)
        .map(|p| {
            let bit = 1usize << p;
            let d = (0..f.len()).fold(0.0f64, |m, x| m.max(abs(f[x] - f[x ^ bit])));
            d * d
        })
        .sum()
}

/// `Ent(f^2) / (2 D Dirichlet(f))`, `None` for vanishing Dirichlet form.
pub fn lsi_check_ratio(m: &ExactMeasure, d: f64, f: &[f64]) -> Option<f64> {
    let dir = dirichlet_form(m, f);
    (dir > 0.0).then(|| entropy_of_square(m, f) / (2.0 * d * dir))
}

/// `log int exp(F - int F) dm`, evaluated as `log1p(int expm1(F - int F))`.
pub fn log_mgf_centered(m: &ExactMeasure, f: &[f64]) -> f64 {
    let mean = m.integrate_table(f);
    ln_1p(m.integrate_table_by(|x| exp_m1(f[x] - mean)))
}

/// `log int e^{F - int F} / (D ||delta F||^2)`, `None` for constant `F`.
pub fn gcb_check_ratio(m: &ExactMeasure, d: f64, f: &[f64]) -> Option<f64> {
    let osc = table_total_oscillation(f, m.sites());
    (osc > 0.0).then(|| log_mgf_centered(m, f) / (d * osc))
}

/// Right-hand side of the moment bound: `(D ||delta F||^2 / 2)^{q/2} q Gamma(q/2)`.
pub fn mcb_bound(d: f64, total_oscillation: f64, q: u32) -> f64 {
    let q = q as f64;
    powf(0.5 * d * total_oscillation, 0.5 * q) * q * gamma(0.5 * q)
}

struct Tally {
    worst: f64,
    witness: String,
    table: Option<Vec<f64>>,
    margins: Vec<Margin>,
    trials: usize,
}

impl Tally {
    fn new() -> Self {
        Tally {
            worst: 0.0,
            witness: String::from("none"),
            table: None,
            margins: Vec::new(),
            trials: 0,
        }
    }

    fn offer(&mut self, ratio: f64, describe: impl FnOnce() -> String, table: &[f64]) {
        self.trials += 1;
        if ratio > self.worst || self.table.is_none() {
            self.worst = ratio;
            self.witness = describe();
            self.table = Some(table.to_vec());
        }
    }

    fn margin(&mut self, label: &str, worst_ratio: f64) {
        self.margins.push(Margin {
            label: String::from(label),
            worst_ratio,
            margin: 1.0 - worst_ratio,
        });
    }

    fn finish(self, kind: ReportKind, constant: f64) -> ConcentrationReport {
        ConcentrationReport {
            kind,
            constant,
            trials: self.trials,
            pass: self.worst <= 1.0 + RATIO_SLACK,
            worst_ratio: self.worst,
            worst_witness: self.witness,
            witness_table: self.table,
            margins: self.margins,
        }
    }
}

/// Runs `ratio` over `trials` random functions, split evenly among the enabled families.
fn random_suite(
    m: &ExactMeasure,
    spec: &FamilySpec,
    trials: usize,
    seed: u64,
    tally: &mut Tally,
    ratio: impl Fn(&[f64]) -> Option<f64> + Sync + Send,
) -> Result<()> {
    let fams = families(spec)?;
    if fams.is_empty() {
        return Ok(());
    }
    let n = m.sites();
    let results = map_indices(trials, |t| {
        let fam = fams[t % fams.len()];
        let mut rng = trial_rng(seed, t);
        let (table, desc) = draw(fam, n, spec.max_support, &mut rng);
        ratio(&table).map(|r| (t, fam, r, table, desc))
    });
    for fam in &fams {
        let mut worst = 0.0f64;
        for (t, f, r, table, desc) in results.iter().flatten() {
            if f == fam {
                worst = worst.max(*r);
                tally.offer(*r, || format!("trial {t}: {desc}"), table);
            }
        }
        tally.margin(fam.label(), worst);
    }
    Ok(())
}

/// Checks `Ent(f^2) <= 2 D Dirichlet(f)` over random functions and the search witness.
pub fn verify_lsi(
    m: &ExactMeasure,
    d: f64,
    spec: &FamilySpec,
    trials: usize,
    seed: u64,
) -> Result<ConcentrationReport> {
    check_constant(d)?;
    let mut tally = Tally::new();
    random_suite(m, spec, trials, seed, &mut tally, |f| {
        lsi_check_ratio(m, d, f)
    })?;
    if spec.lsi_witnesses && m.sites() <= LSI_SEARCH_MAX_SITES {
        let search = lsi_constant_search(m, spec.search_trials, seed)?;
        let table = tabulate(m, &search.witness)?;
        if let Some(r) = lsi_check_ratio(m, d, &table) {
            tally.offer(
                r,
                || {
                    format!(
                        "log-Sobolev search maximizer (ratio {:.12})",
                        search.lower_bound
                    )
                },
                &table,
            );
            tally.margin("search-witness", r);
        }
    }
    if tally.trials == 0 {
        return Err(Error::DegenerateFamily);
    }
    Ok(tally.finish(ReportKind::Lsi, d))
}

/// Checks `log int e^{F - int F} <= D ||delta F||^2` over random functions.
pub fn verify_gcb(
    m: &ExactMeasure,
    d: f64,
    spec: &FamilySpec,
    trials: usize,
    seed: u64,
) -> Result<ConcentrationReport> {
    check_constant(d)?;
    let mut tally = Tally::new();
    random_suite(m, spec, trials, seed, &mut tally, |f| {
        gcb_check_ratio(m, d, f)
    })?;
    if spec.lsi_witnesses && m.sites() <= LSI_SEARCH_MAX_SITES {
        let search = lsi_constant_search(m, spec.search_trials, seed)?;
        let table = tabulate(m, &search.witness)?;
        if let Some(r) = gcb_check_ratio(m, d, &table) {
            tally.offer(r, || String::from("log-Sobolev search maximizer"), &table);
            tally.margin("search-witness", r);
        }
    }
    if tally.trials == 0 {
        return Err(Error::DegenerateFamily);
    }
    Ok(tally.finish(ReportKind::Gcb, d))
}

/// Checks the moment bounds for one function. A constant function checks `0 <= 0`.
pub fn verify_mcb(
    m: &ExactMeasure,
    d: f64,
    f: &LocalFunction,
    moments: &[u32],
) -> Result<ConcentrationReport> {
    verify_mcb_table(m, d, &tabulate(m, f)?, moments)
}

pub fn verify_mcb_table(
    m: &ExactMeasure,
    d: f64,
    f: &[f64],
    moments: &[u32],
) -> Result<ConcentrationReport> {
    check_constant(d)?;
    if moments.is_empty() || moments.contains(&0) {
        return Err(Error::param("moments", "need positive integer moments"));
    }
    let osc = table_total_oscillation(f, m.sites());
    let mean = m.integrate_table(f);
    let mut tally = Tally::new();
    for &q in moments {
        let lhs = m.integrate_table_by(|x| powf(abs(f[x] - mean), q as f64));
        let bound = mcb_bound(d, osc, q);
        let r = if bound > 0.0 {
            lhs / bound
        } else if lhs > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        tally.offer(
            r,
            || format!("moment {q}: {lhs:.6e} vs bound {bound:.6e}"),
            f,
        );
        tally.margin(&format!("m={q}"), r);
    }
    Ok(tally.finish(ReportKind::Mcb, d))
}

/// Moment bounds over a random family; the report keeps one margin per moment.
pub fn verify_mcb_family(
    m: &ExactMeasure,
    d: f64,
    spec: &FamilySpec,
    trials: usize,
    seed: u64,
    moments: &[u32],
) -> Result<ConcentrationReport> {
    check_constant(d)?;
    let fams = families(spec)?;
    if fams.is_empty() || trials == 0 {
        return Err(Error::DegenerateFamily);
    }
    let n = m.sites();
    let reports: Vec<Result<ConcentrationReport>> = map_indices(trials, |t| {
        let mut rng = trial_rng(seed, t);
        let (table, _) = draw(fams[t % fams.len()], n, spec.max_support, &mut rng);
        verify_mcb_table(m, d, &table, moments)
    });
    let mut tally = Tally::new();
    let mut per_moment = alloc::vec![0.0f64; moments.len()];
    for (t, r) in reports.into_iter().enumerate() {
        let r = r?;
        for (slot, mg) in per_moment.iter_mut().zip(&r.margins) {
            *slot = slot.max(mg.worst_ratio);
        }
        if let Some(table) = &r.witness_table {
            tally.offer(
                r.worst_ratio,
                || format!("trial {t}, {}", r.worst_witness),
                table,
            );
        }
    }
    for (q, w) in moments.iter().zip(per_moment) {
        tally.margin(&format!("m={q}"), w);
    }
    Ok(tally.finish(ReportKind::Mcb, d))
}

fn check_constant(d: f64) -> Result<()> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::param("D", "constant must be finite and positive"));
    }
    Ok(())
}
