//! The four subcommands as functions returning data; `main` does the I/O.

use std::fmt::Write as _;
use std::io::Write;

use clap::ValueEnum;
use polplace::linalg::{eigenvalues, match_spectrum, max_abs};
use polplace::spectrum::format_complex;
use polplace::verify::{charpoly_residual, closed_loop_spectrum, spectrum_distance, KAPPA_WARN};
use polplace::{
    place_ackermann, place_bass_gura, place_general, place_partial, place_sequential, place_simon_mitter,
    AssignmentPlan, Complex64, Diagnostics, Gain, Spectrum, StateSpace, StepRecord, Vector,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::files::{read_source, PlanFile};
use crate::generate::{dense_system, integrator_chain, kappa_c, stable_targets, trial_rng, Family};

/// Charpoly residual at or below this passes `verify`.
pub const VERIFY_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    BassGura,
    Ackermann,
    General,
    Partial,
    Sequential,
    SimonMitter,
}

#[derive(Clone, Debug, Serialize)]
pub struct PlaceReport {
    pub method: String,
    pub k: Vec<f64>,
    pub diagnostics: Diagnostics,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<Vec<StepRecord>>,
}

impl PlaceReport {
    fn new(gain: Gain, steps: Option<Vec<StepRecord>>) -> Self {
        PlaceReport {
            method: gain.method.to_string(),
            k: gain.k.iter().copied().collect(),
            diagnostics: gain.diagnostics,
            steps,
        }
    }
}

fn poles<'a>(plan: &'a PlanFile, method: &str) -> CliResult<&'a Spectrum> {
    match plan {
        PlanFile::Poles(p) => Ok(p),
        PlanFile::Groups(_) => Err(CliError::Input(format!("method {method} needs a plan with \"poles\""))),
    }
}

fn groups<'a>(plan: &'a PlanFile, method: &str) -> CliResult<&'a [(Spectrum, Spectrum)]> {
    match plan {
        PlanFile::Groups(g) => Ok(g),
        PlanFile::Poles(_) => Err(CliError::Input(format!("method {method} needs a plan with \"groups\""))),
    }
}

fn single_group<'a>(plan: &'a PlanFile, method: &str) -> CliResult<&'a (Spectrum, Spectrum)> {
    match groups(plan, method)? {
        [g] => Ok(g),
        g => Err(CliError::Input(format!(
            "method {method} takes exactly one group, got {}",
            g.len()
        ))),
    }
}

pub fn place(
    sys: &StateSpace,
    plan: &PlanFile,
    method: MethodArg,
    pulled: Option<&Spectrum>,
) -> CliResult<PlaceReport> {
    if pulled.is_some() && method != MethodArg::General {
        return Err(CliError::Input("--pulled only applies to the general method".into()));
    }
    let gain = match method {
        MethodArg::BassGura => place_bass_gura(sys, poles(plan, "bass-gura")?)?,
        MethodArg::Ackermann => place_ackermann(sys, poles(plan, "ackermann")?)?,
        MethodArg::General => {
            let pulled = pulled.ok_or_else(|| CliError::Input("method general needs --pulled".into()))?;
            place_general(sys, poles(plan, "general")?, pulled)?
        }
        MethodArg::Partial => {
            let (mv, to) = single_group(plan, "partial")?;
            place_partial(sys, mv, to)?
        }
        MethodArg::SimonMitter => {
            let (mv, to) = single_group(plan, "simon-mitter")?;
            let (&[mu], &[lambda]) = (mv.values(), to.values()) else {
                return Err(CliError::Input(
                    "method simon-mitter moves exactly one real eigenvalue".into(),
                ));
            };
            if mu.im != 0.0 || lambda.im != 0.0 {
                return Err(CliError::Input(
                    "method simon-mitter moves exactly one real eigenvalue".into(),
                ));
            }
            place_simon_mitter(sys, mu.re, lambda.re)?
        }
        MethodArg::Sequential => {
            let plan = AssignmentPlan::new(groups(plan, "sequential")?.to_vec())?;
            let (gain, steps) = place_sequential(sys, &plan)?;
            return Ok(PlaceReport::new(gain, Some(steps)));
        }
    };
    Ok(PlaceReport::new(gain, None))
}

#[derive(Deserialize)]
#[serde(untagged)]
enum GainSource {
    List(Vec<f64>),
    Report { k: Vec<f64> },
}

/// A gain given inline (`-2,-3` or `[-2, -3]`), or a path (or `-`) to a JSON
/// list or to a `place` report.
pub fn parse_gain(arg: &str) -> CliResult<Vector> {
    let inline = arg.trim().trim_start_matches('[').trim_end_matches(']');
    let parsed: Result<Vec<f64>, _> = inline.split(',').map(|p| p.trim().parse::<f64>()).collect();
    let values = match parsed {
        Ok(v) if arg != "-" => v,
        _ => {
            let text = read_source(arg)?;
            match serde_json::from_str(&text).map_err(|source| CliError::Json {
                what: arg.into(),
                source,
            })? {
                GainSource::List(v) | GainSource::Report { k: v } => v,
            }
        }
    };
    if values.iter().any(|v| !v.is_finite()) {
        return Err(CliError::Input("gain has a non-finite entry".into()));
    }
    Ok(Vector::from_vec(values))
}

/// The closed-loop spectrum a plan asks for. Groups that leave part of the
/// spectrum alone are completed with the untouched open-loop eigenvalues.
pub fn intended_spectrum(sys: &StateSpace, plan: &PlanFile) -> CliResult<Spectrum> {
    match plan {
        PlanFile::Poles(p) => Ok(p.clone()),
        PlanFile::Groups(g) => {
            let plan = AssignmentPlan::new(g.clone())?;
            let moved = plan.moved();
            if moved.len() == sys.n() {
                return Ok(plan.targets());
            }
            let open = eigenvalues(sys.a())?;
            let hit = match_spectrum(&moved, open.values(), 1e-6 * max_abs(sys.a()).max(1.0))?;
            let rest: Vec<Complex64> = open
                .iter()
                .enumerate()
                .filter(|(i, _)| !hit.contains(i))
                .map(|(_, z)| *z)
                .collect();
            Ok(plan.targets().union(&Spectrum::new(rest)?))
        }
    }
}

#[derive(Clone, Debug)]
pub struct VerifyReport {
    pub charpoly_residual: f64,
    pub spectrum_residual: Option<f64>,
    /// `(target, computed)` pairs, sorted by target.
    pub rows: Vec<(Complex64, Complex64)>,
    pub passed: bool,
}

pub fn verify(sys: &StateSpace, k: &Vector, targets: &Spectrum) -> CliResult<VerifyReport> {
    if k.len() != sys.n() {
        return Err(CliError::Input(format!(
            "gain has {} entries, expected n = {}",
            k.len(),
            sys.n()
        )));
    }
    if targets.len() != sys.n() {
        return Err(CliError::Input(format!(
            "plan gives {} eigenvalues, expected n = {}",
            targets.len(),
            sys.n()
        )));
    }
    let cp = charpoly_residual(sys, k, targets);
    let (spectrum_residual, rows) = match closed_loop_spectrum(sys, k) {
        Ok(ev) => (Some(spectrum_distance(&ev, targets)?), pair_up(targets, &ev)),
        Err(_) => (None, Vec::new()),
    };
    Ok(VerifyReport {
        charpoly_residual: cp,
        spectrum_residual,
        rows,
        passed: cp <= VERIFY_TOL,
    })
}

fn pair_up(targets: &Spectrum, computed: &Spectrum) -> Vec<(Complex64, Complex64)> {
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (i, t) in targets.iter().enumerate() {
        for (j, c) in computed.iter().enumerate() {
            pairs.push(((t - c).norm(), i, j));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut used_t = vec![false; targets.len()];
    let mut used_c = vec![false; computed.len()];
    let mut rows = Vec::new();
    for (_, i, j) in pairs {
        if !used_t[i] && !used_c[j] {
            used_t[i] = true;
            used_c[j] = true;
            rows.push((targets.values()[i], computed.values()[j]));
        }
    }
    rows.sort_by(|a, b| a.0.re.total_cmp(&b.0.re).then(a.0.im.total_cmp(&b.0.im)));
    rows
}

pub fn render_verify(report: &VerifyReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "charpoly_residual  {:e}", report.charpoly_residual);
    match report.spectrum_residual {
        Some(d) => {
            let _ = writeln!(out, "spectrum_residual  {d:e}");
        }
        None => {
            let _ = writeln!(out, "spectrum_residual  unavailable (eigenvalue solver failed)");
        }
    }
    if !report.rows.is_empty() {
        let _ = writeln!(out, "\n{:<28} {:<28} distance", "target", "computed");
        for (t, c) in &report.rows {
            let _ = writeln!(
                out,
                "{:<28} {:<28} {:e}",
                format_complex(*t),
                format_complex(*c),
                (t - c).norm()
            );
        }
    }
    let verdict = if report.passed { "PASS" } else { "FAIL" };
    let _ = writeln!(
        out,
        "\n{verdict}: charpoly_residual {} {VERIFY_TOL:e}",
        if report.passed { "<=" } else { ">" }
    );
    out
}

/// One line of the conditioning study.
#[derive(Clone, Debug, Serialize)]
pub struct CompareRow {
    pub n: usize,
    pub trial: usize,
    pub method: String,
    pub status: String,
    pub charpoly_residual: Option<f64>,
    pub spectrum_distance: Option<f64>,
    pub kappa_c: f64,
    pub max_step_kappa: Option<f64>,
    /// Size of the largest matrix the method inverts; for a failed sequential
    /// run, the largest planned group.
    pub max_inverted_size: Option<usize>,
}

/// Sequential grouping used by the study: each conjugate pair alone, then
/// real eigenvalues by descending modulus in twos. Targets are dealt out to
/// match each group's shape.
pub fn study_plan(open: &Spectrum, targets: &Spectrum) -> CliResult<AssignmentPlan> {
    let groups = open.conjugate_groups();
    let mut moves: Vec<Vec<Complex64>> = groups.iter().filter(|g| g.len() == 2).cloned().collect();
    let mut reals: Vec<Complex64> = groups.iter().filter(|g| g.len() == 1).map(|g| g[0]).collect();
    reals.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
    moves.extend(reals.chunks(2).map(|c| c.to_vec()));

    let t_groups = targets.conjugate_groups();
    let mut t_pairs: Vec<Vec<Complex64>> = t_groups.iter().filter(|g| g.len() == 2).cloned().collect();
    let mut t_reals: Vec<Complex64> = t_groups.iter().filter(|g| g.len() == 1).map(|g| g[0]).collect();
    let mut plan = vec![Vec::new(); moves.len()];
    // singletons first so that an even number of real targets is left for the size-2 groups
    for i in (0..moves.len()).filter(|&i| moves[i].len() == 1) {
        plan[i] = vec![t_reals
            .pop()
            .ok_or_else(|| CliError::Input("targets do not fit the grouping".into()))?];
    }
    for i in (0..moves.len()).filter(|&i| moves[i].len() == 2) {
        plan[i] = match t_pairs.pop() {
            Some(p) => p,
            None => match (t_reals.pop(), t_reals.pop()) {
                (Some(a), Some(b)) => vec![a, b],
                _ => return Err(CliError::Input("targets do not fit the grouping".into())),
            },
        };
    }
    let groups = moves
        .into_iter()
        .zip(plan)
        .map(|(m, t)| Ok((Spectrum::new(m)?, Spectrum::new(t)?)))
        .collect::<CliResult<Vec<_>>>()?;
    Ok(AssignmentPlan::new(groups)?)
}

fn study_row(
    n: usize,
    trial: usize,
    method: &str,
    kappa: f64,
    inverted: Option<usize>,
    outcome: CliResult<(Gain, Option<Vec<StepRecord>>)>,
) -> CompareRow {
    let mut row = CompareRow {
        n,
        trial,
        method: method.into(),
        status: "ok".into(),
        charpoly_residual: None,
        spectrum_distance: None,
        kappa_c: kappa,
        max_step_kappa: None,
        max_inverted_size: inverted,
    };
    match outcome {
        Ok((gain, steps)) => {
            row.charpoly_residual = gain.diagnostics.charpoly_residual;
            row.spectrum_distance = gain.diagnostics.spectrum_residual;
            if let Some(steps) = steps {
                row.max_step_kappa = steps.iter().map(|s| s.kappa).reduce(f64::max);
                row.max_inverted_size = steps.iter().map(StepRecord::inverted_size).max();
            }
        }
        Err(e) => row.status = format!("error: {e}"),
    }
    row
}

/// Places the same random stable targets with Ackermann, Bass-Gura and the
/// sequential method for every `n` and trial. Failures become rows.
pub fn compare(ns: &[usize], trials: usize, seed: u64, family: Family) -> Vec<CompareRow> {
    let mut rows = Vec::new();
    for &n in ns {
        for trial in 0..trials {
            let mut rng = trial_rng(seed, n, trial);
            let sys = match family {
                Family::Dense => loop {
                    if let Some(sys) = dense_system(&mut rng, n) {
                        break sys;
                    }
                },
                Family::IntegratorChain => integrator_chain(n),
            };
            let targets = stable_targets(&mut rng, n);
            let kappa = kappa_c(&sys);
            let full = |g: polplace::Result<Gain>| g.map(|g| (g, None)).map_err(CliError::from);
            rows.push(study_row(
                n,
                trial,
                "ackermann",
                kappa,
                Some(n),
                full(place_ackermann(&sys, &targets)),
            ));
            rows.push(study_row(
                n,
                trial,
                "bass-gura",
                kappa,
                Some(n),
                full(place_bass_gura(&sys, &targets)),
            ));
            let plan = eigenvalues(sys.a())
                .map_err(CliError::from)
                .and_then(|open| study_plan(&open, &targets));
            let planned = plan
                .as_ref()
                .ok()
                .and_then(|p| p.groups().iter().map(|(m, _)| m.len()).max());
            let sequential = plan.and_then(|plan| {
                place_sequential(&sys, &plan)
                    .map(|(g, s)| (g, Some(s)))
                    .map_err(CliError::from)
            });
            rows.push(study_row(n, trial, "sequential", kappa, planned, sequential));
        }
    }
    rows
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.2e}")).unwrap_or_else(|| "-".into())
}

pub fn render_compare_table(rows: &[CompareRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>3} {:>5} {:<11} {:>10} {:>10} {:>11} {:>10} {:>8}  status",
        "n", "trial", "method", "charpoly", "spectrum", "kappa_C", "step_kap", "max_inv"
    );
    for r in rows {
        let flag = if r.kappa_c > KAPPA_WARN { "!" } else { " " };
        let _ = writeln!(
            out,
            "{:>3} {:>5} {:<11} {:>10} {:>10} {:>10.2e}{flag} {:>10} {:>8}  {}",
            r.n,
            r.trial,
            r.method,
            opt(r.charpoly_residual),
            opt(r.spectrum_distance),
            r.kappa_c,
            opt(r.max_step_kappa),
            r.max_inverted_size.map_or("-".to_string(), |s| s.to_string()),
            r.status
        );
    }
    let _ = writeln!(out, "(! marks kappa_C > {KAPPA_WARN:e})");
    out
}

pub fn write_compare_csv(rows: &[CompareRow], out: impl Write) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
