//! End-to-end runs: classification, parameter sweeps and thin wrappers that
//! write simulation, coupling and fluid results to disk.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fluid::{self, FluidOptions, FluidState};
use crate::lyapunov::{
    self, check_log_convexity, ConvexityCheck, KEstimate, KOptions, S0Options, S0Outcome, S0Result, TopExponent,
};
use crate::model::{compose_cycle, scan_transient_support, spectral_radius, validate_spec, SupportScan, ValidatedSpec};
use crate::plan::{Action, ClassifyParams, CoupleParams, ExperimentPlan, FluidParams, SimulateParams, SweepParams};
use crate::seed;
use crate::sim::{self, Configuration};
use crate::stream::RegimeStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Transient,
    Recurrent,
    /// The top exponent's interval contains 0.
    Undecided,
}

/// Which moments of the emptying time are finite, read off `s0` at `s = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MomentClass {
    /// `s0 < 1`: recurrent but `E tau` is infinite.
    NullRecurrent,
    /// `s0 > 1`: `E tau` is finite.
    PositiveRecurrent,
    /// `k(s_max) < 1`: every tested moment is finite.
    AllTestedMomentsFinite,
    /// The `s0` bracket contains 1.
    Unresolved,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationVerdict {
    pub verdict: Verdict,
    pub moment_class: Option<MomentClass>,
    pub text: String,
    pub top_exponent: TopExponent,
    pub s0: S0Result,
    pub support_scan: SupportScan,
    pub k_grid: Vec<KEstimate>,
    pub convexity: Option<ConvexityCheck>,
    pub diagnostics: Vec<String>,
    pub master_seed: u64,
}

/// The decision table: every combination of top-exponent interval and `s0`
/// outcome maps to one verdict.
pub fn decide(top: &TopExponent, s0: &S0Outcome, z: f64) -> (Verdict, Option<MomentClass>) {
    if let S0Outcome::AtZero = s0 {
        return (Verdict::Transient, None);
    }
    if top.lambda - z * top.stderr > 0.0 {
        return (Verdict::Transient, None);
    }
    if top.lambda + z * top.stderr >= 0.0 {
        return (Verdict::Undecided, None);
    }
    let class = match *s0 {
        S0Outcome::Bracket { hi, .. } if hi < 1.0 => MomentClass::NullRecurrent,
        S0Outcome::Bracket { lo, .. } if lo > 1.0 => MomentClass::PositiveRecurrent,
        S0Outcome::Bracket { .. } => MomentClass::Unresolved,
        S0Outcome::LowerBound(m) if m > 1.0 => MomentClass::AllTestedMomentsFinite,
        S0Outcome::LowerBound(_) => MomentClass::Unresolved,
        S0Outcome::AtZero => unreachable!(),
    };
    (Verdict::Recurrent, Some(class))
}

fn verdict_text(verdict: Verdict, class: Option<MomentClass>, s0: &S0Outcome) -> String {
    match (verdict, class, s0) {
        (Verdict::Transient, _, _) => "TRANSIENT".into(),
        (Verdict::Undecided, _, _) => "UNDECIDED: top exponent indistinguishable from 0".into(),
        (_, Some(MomentClass::NullRecurrent), S0Outcome::Bracket { lo, hi }) => {
            format!("RECURRENT, null recurrent: s0 in [{lo:.4}, {hi:.4}], E tau infinite")
        }
        (_, Some(MomentClass::PositiveRecurrent), S0Outcome::Bracket { lo, hi }) => {
            format!("RECURRENT, positive recurrent (E tau < inf): s0 in [{lo:.4}, {hi:.4}]")
        }
        (_, Some(MomentClass::AllTestedMomentsFinite), S0Outcome::LowerBound(m)) => {
            format!("RECURRENT, positive recurrent: E tau^s finite for all s < {m}")
        }
        (_, _, S0Outcome::Bracket { lo, hi }) => {
            format!("RECURRENT: s0 in [{lo:.4}, {hi:.4}], first moment unresolved")
        }
        (_, _, S0Outcome::LowerBound(m)) => format!("RECURRENT: s0 >= {m}"),
        (_, _, S0Outcome::AtZero) => "RECURRENT".into(),
    }
}

/// Top exponent, then `s0`, then the support scan, with cross-checks.
pub fn classify(spec: &ValidatedSpec, p: &ClassifyParams, master: u64) -> Result<ClassificationVerdict> {
    let top = lyapunov::estimate_top_exponent(spec, p.top_n, p.top_replicas, seed::derive(master, "top", 0))?;
    let s0 = lyapunov::estimate_s0(
        spec,
        &top,
        S0Options {
            s_max: p.s_max,
            tol: p.tol,
            confidence: p.confidence,
            budget: p.budget,
            n: p.n,
            replicas: p.replicas,
            max_replicas: p.max_replicas,
            seed: seed::derive(master, "s0", 0),
        },
    )?;
    let scan = scan_transient_support(spec)?;
    let z = lyapunov::z_score(p.confidence);
    let (verdict, moment_class) = decide(&top, &s0.outcome, z);
    let mut diagnostics = Vec::new();

    let k_grid = if p.grid_step > 0.0 {
        let steps = (p.s_max / p.grid_step).round() as usize;
        (0..=steps)
            .map(|i| {
                let s = i as f64 * p.grid_step;
                let opts = KOptions {
                    n: p.n,
                    replicas: p.replicas,
                    seed: seed::derive(master, "grid", s.to_bits()),
                    length_check: p.length_check,
                };
                lyapunov::estimate_k(spec, s, opts)
            })
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };
    let convexity = (k_grid.len() >= 3).then(|| check_log_convexity(&k_grid));

    if scan.found && matches!(s0.outcome, S0Outcome::LowerBound(_)) {
        diagnostics.push(format!(
            "inconsistent evidence: a support combination has spectral radius {:.6} > 1, which forces a finite s0, \
             yet k(s_max) < 1 was estimated; raise s_max or the replica count",
            scan.witness_radius.unwrap_or(f64::NAN)
        ));
    }
    if scan.partial {
        diagnostics
            .push(format!("support scan sampled {} combinations instead of enumerating", scan.combinations_checked));
    }
    if s0.low_confidence {
        diagnostics.push("s0 search ended without full confidence (budget or replica cap reached)".into());
    }
    if let Some(c) = &convexity {
        if !c.ok {
            diagnostics.push(format!("log k(s) fails midpoint convexity near s = {:?}", c.worst.map(|w| w.0)));
        }
    }
    let biased: Vec<f64> = k_grid.iter().filter(|k| k.length_bias).map(|k| k.s).collect();
    if !biased.is_empty() {
        diagnostics.push(format!("k estimates at n and 2n disagree at s = {biased:?}; products may be too short"));
    }
    if spec.deterministic_regimes() {
        let regimes: Vec<_> = (0..spec.stations()).map(|k| spec.law_for_slot(k).atoms()[0].0.clone()).collect();
        let rho = spectral_radius(&compose_cycle(spec, &regimes)?)?;
        diagnostics.push(format!(
            "regimes are deterministic: the cycle matrix is fixed, k(s) = rho(A)^s with rho(A) = {rho:.6}"
        ));
        let gap = (top.lambda - rho.ln()).abs();
        if gap > 10.0 / top.n as f64 + 3.0 * top.stderr {
            diagnostics.push(format!("top exponent {} differs from ln rho(A) = {}", top.lambda, rho.ln()));
        }
    }
    let text = verdict_text(verdict, moment_class, &s0.outcome);
    Ok(ClassificationVerdict {
        verdict,
        moment_class,
        text,
        top_exponent: top,
        s0,
        support_scan: scan,
        k_grid,
        convexity,
        diagnostics,
        master_seed: master,
    })
}

pub fn run_classify(plan: &ExperimentPlan) -> Result<ClassificationVerdict> {
    match &plan.action {
        Action::Classify(p) => classify(&plan.spec, p, plan.seed),
        other => Err(Error::InvalidArgument(format!("plan action is {}, not classify", other.name()))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub theta: f64,
    pub top_exponent: Option<f64>,
    pub s0_lo: Option<f64>,
    pub s0_hi: Option<f64>,
    /// TRANSIENT, NULL_RECURRENT, POSITIVE_RECURRENT, RECURRENT, UNDECIDED,
    /// SKIPPED or ERROR.
    pub verdict: String,
    pub note: String,
}

fn sweep_label(v: &ClassificationVerdict) -> &'static str {
    match (v.verdict, v.moment_class) {
        (Verdict::Transient, _) => "TRANSIENT",
        (Verdict::Undecided, _) => "UNDECIDED",
        (_, Some(MomentClass::NullRecurrent)) => "NULL_RECURRENT",
        (_, Some(MomentClass::PositiveRecurrent | MomentClass::AllTestedMomentsFinite)) => "POSITIVE_RECURRENT",
        _ => "RECURRENT",
    }
}

/// One classification per grid value. Each point's seed depends only on the
/// master seed and the value itself, so reordering the grid reorders rows
/// without changing them.
pub fn run_sweep(spec: &ValidatedSpec, p: &SweepParams, master: u64) -> Vec<SweepRow> {
    let params = ClassifyParams { grid_step: 0.0, ..p.classify.clone() };
    p.grid
        .par_iter()
        .map(|&theta| {
            let blank = |verdict: &str, note: String| SweepRow {
                theta,
                top_exponent: None,
                s0_lo: None,
                s0_hi: None,
                verdict: verdict.into(),
                note,
            };
            let point = match p.axis.apply(spec, theta).and_then(validate_spec) {
                Ok(s) => s,
                Err(e) => return blank("SKIPPED", e.to_string()),
            };
            match classify(&point, &params, seed::derive(master, "sweep", theta.to_bits())) {
                Ok(v) => {
                    let (lo, hi) = match v.s0.outcome {
                        S0Outcome::AtZero => (0.0, 0.0),
                        S0Outcome::LowerBound(m) => (m, f64::INFINITY),
                        S0Outcome::Bracket { lo, hi } => (lo, hi),
                    };
                    SweepRow {
                        theta,
                        top_exponent: Some(v.top_exponent.lambda),
                        s0_lo: Some(lo),
                        s0_hi: Some(hi),
                        verdict: sweep_label(&v).into(),
                        note: if v.s0.low_confidence { "low confidence".into() } else { String::new() },
                    }
                }
                Err(e) => blank("ERROR", e.to_string()),
            }
        })
        .collect()
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// `theta,top_exponent,s0_lo,s0_hi,verdict,note` after a seed comment line.
pub fn write_sweep_csv<W: Write>(mut w: W, rows: &[SweepRow], master: u64) -> std::io::Result<()> {
    writeln!(w, "# master_seed={master}")?;
    writeln!(w, "theta,top_exponent,s0_lo,s0_hi,verdict,note")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.theta,
            opt(r.top_exponent),
            opt(r.s0_lo),
            opt(r.s0_hi),
            r.verdict,
            r.note.replace([',', '\n'], ";")
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulateSummary {
    pub master_seed: u64,
    pub replicas: usize,
    pub censored: usize,
    pub mean_tau: Option<f64>,
    pub moments: Vec<sim::MomentRow>,
    pub tail: Option<sim::TailFit>,
    pub tail_note: Option<String>,
}

pub fn run_simulate(spec: &ValidatedSpec, p: &SimulateParams, master: u64) -> Result<(SimulateSummary, sim::TauStats)> {
    let init = Configuration::new(spec, p.station, p.queues.clone())?;
    let stats = sim::estimate_tau_stats(spec, &init, &p.moments, p.replicas, p.horizon, master)?;
    let points: Vec<(f64, bool)> = stats.samples.iter().map(|s| (s.tau, s.censored)).collect();
    let (tail, tail_note) = match sim::tail_slope(&points) {
        Ok(t) => (Some(t), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let done: Vec<f64> = stats.samples.iter().filter(|s| !s.censored).map(|s| s.tau).collect();
    let summary = SimulateSummary {
        master_seed: master,
        replicas: p.replicas,
        censored: stats.samples.len() - done.len(),
        mean_tau: (!done.is_empty()).then(|| done.iter().sum::<f64>() / done.len() as f64),
        moments: stats.moments.clone(),
        tail,
        tail_note,
    };
    Ok((summary, stats))
}

fn write_moments_csv<W: Write>(mut w: W, rows: &[sim::MomentRow], master: u64) -> std::io::Result<()> {
    writeln!(w, "# master_seed={master}")?;
    writeln!(w, "s,mean,uncensored,censored_fraction,growth_slope,diverging")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.s,
            opt(r.mean),
            r.uncensored,
            r.censored_fraction,
            opt(r.growth_slope),
            r.diverging as u8
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoupleSummary {
    pub master_seed: u64,
    pub report: fluid::CouplingReport,
}

pub fn run_couple(spec: &ValidatedSpec, p: &CoupleParams, master: u64) -> Result<CoupleSummary> {
    let report = fluid::coupling_experiment(spec, p.y0, p.delta, p.replicas, seed::derive(master, "couple", 0))?;
    Ok(CoupleSummary { master_seed: master, report })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FluidSummary {
    pub master_seed: u64,
    pub stream_seed: u64,
    /// Emptying time, or "DIVERGED".
    pub outcome: String,
    pub run: fluid::FluidRun,
}

pub fn run_fluid(spec: &ValidatedSpec, p: &FluidParams, master: u64) -> Result<FluidSummary> {
    let stream_seed = seed::derive(master, "fluid", 0);
    let stream = RegimeStream::new(spec, stream_seed);
    let opts = FluidOptions { rel_tol: p.rel_tol, max_epochs: p.max_epochs, ..FluidOptions::default() };
    let run = fluid::fluid_empty_time(spec, &FluidState::new(p.epoch, p.x.clone()), &stream, opts)?;
    let outcome = match run.outcome.total() {
        Some(t) => t.to_string(),
        None => "DIVERGED".into(),
    };
    Ok(FluidSummary { master_seed: master, stream_seed, outcome, run })
}

fn create(dir: &Path, name: &str) -> Result<(PathBuf, BufWriter<File>)> {
    let path = dir.join(name);
    let f =
        File::create(&path).map_err(|e| Error::Io { context: format!("creating {}", path.display()), source: e })?;
    Ok((path, BufWriter::new(f)))
}

fn io_ctx(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |e| Error::Io { context: format!("writing {}", path.display()), source: e }
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf> {
    let (path, mut w) = create(dir, name)?;
    serde_json::to_writer_pretty(&mut w, value)
        .map_err(|e| Error::Io { context: format!("writing {}", path.display()), source: e.into() })?;
    writeln!(w).and_then(|_| w.flush()).map_err(io_ctx(&path))?;
    Ok(path)
}

/// Runs the plan's action and writes its outputs into `out`. Returns the
/// files written.
pub fn execute(plan: &ExperimentPlan, out: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out)
        .map_err(|e| Error::Io { context: format!("creating {}", out.display()), source: e })?;
    let master = plan.seed;
    let mut written = Vec::new();
    {
        let (path, mut w) = create(out, "plan.resolved.txt")?;
        w.write_all(plan.to_text().as_bytes()).and_then(|_| w.flush()).map_err(io_ctx(&path))?;
        written.push(path);
    }
    match &plan.action {
        Action::Classify(p) => {
            let v = classify(&plan.spec, p, master)?;
            written.push(write_json(out, "verdict.json", &v)?);
            let (path, mut w) = create(out, "k.csv")?;
            writeln!(w, "# master_seed={master}")
                .and_then(|_| lyapunov::write_k_csv(&mut w, &v.k_grid))
                .and_then(|_| w.flush())
                .map_err(io_ctx(&path))?;
            written.push(path);
        }
        Action::Sweep(p) => {
            let rows = run_sweep(&plan.spec, p, master);
            let (path, mut w) = create(out, "sweep.csv")?;
            write_sweep_csv(&mut w, &rows, master).and_then(|_| w.flush()).map_err(io_ctx(&path))?;
            written.push(path);
        }
        Action::Simulate(p) => {
            let (summary, stats) = run_simulate(&plan.spec, p, master)?;
            let (path, mut w) = create(out, "tau.csv")?;
            writeln!(w, "# master_seed={master}")
                .and_then(|_| sim::write_tau_csv(&mut w, &stats.samples))
                .and_then(|_| w.flush())
                .map_err(io_ctx(&path))?;
            written.push(path);
            let (path, mut w) = create(out, "moments.csv")?;
            write_moments_csv(&mut w, &stats.moments, master).and_then(|_| w.flush()).map_err(io_ctx(&path))?;
            written.push(path);
            written.push(write_json(out, "simulate.json", &summary)?);
        }
        Action::Couple(p) => {
            let summary = run_couple(&plan.spec, p, master)?;
            written.push(write_json(out, "couple.json", &summary)?);
        }
        Action::Fluid(p) => {
            let summary = run_fluid(&plan.spec, p, master)?;
            let stream = RegimeStream::new(&plan.spec, summary.stream_seed);
            let (path, mut w) = create(out, "fluid_trace.csv")?;
            writeln!(w, "# master_seed={master}").map_err(io_ctx(&path))?;
            let epochs = p.trace_epochs.min(summary.run.epochs);
            fluid::write_fluid_trace(&mut w, &plan.spec, &FluidState::new(p.epoch, p.x.clone()), &stream, epochs)?;
            w.flush().map_err(io_ctx(&path))?;
            written.push(path);
            written.push(write_json(out, "fluid.json", &summary)?);
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plan::{parse_plan, AxisPath};
    use crate::presets::*;

    fn top(lambda: f64, stderr: f64) -> TopExponent {
        TopExponent { lambda, stderr, n: 100, replicas: 30 }
    }

    #[test]
    fn decision_table_is_total() {
        let outcomes = [
            S0Outcome::AtZero,
            S0Outcome::LowerBound(8.0),
            S0Outcome::LowerBound(0.5),
            S0Outcome::Bracket { lo: 0.5, hi: 0.6 },
            S0Outcome::Bracket { lo: 1.5, hi: 1.6 },
            S0Outcome::Bracket { lo: 0.99, hi: 1.01 },
        ];
        for t in [top(1.0, 0.1), top(-1.0, 0.1), top(0.0, 0.1), top(0.0, 0.0)] {
            for o in &outcomes {
                let (v, c) = decide(&t, o, 2.576);
                match v {
                    Verdict::Recurrent => assert!(c.is_some() && *o != S0Outcome::AtZero),
                    _ => assert!(c.is_none()),
                }
            }
        }
        assert_eq!(
            decide(&top(-1.0, 0.1), &S0Outcome::Bracket { lo: 0.5, hi: 0.6 }, 2.576).1,
            Some(MomentClass::NullRecurrent)
        );
        assert_eq!(decide(&top(0.0, 0.0), &S0Outcome::LowerBound(8.0), 2.576).0, Verdict::Undecided);
    }

    fn quick() -> ClassifyParams {
        ClassifyParams {
            grid_step: 0.0,
            n: 32,
            replicas: 2000,
            top_n: 500,
            top_replicas: 32,
            ..ClassifyParams::default()
        }
    }

    #[test]
    fn classify_examples() {
        let t = classify(&validate_spec(transient_scalar_spec()).unwrap(), &quick(), 1).unwrap();
        assert_eq!(t.verdict, Verdict::Transient);
        assert_eq!(t.s0.outcome, S0Outcome::AtZero);
        assert!(t.diagnostics.iter().any(|d| d.contains("deterministic")));

        let n = classify(&validate_spec(slow_fast_spec(1.25)).unwrap(), &quick(), 1).unwrap();
        assert_eq!((n.verdict, n.moment_class), (Verdict::Recurrent, Some(MomentClass::NullRecurrent)));

        let p = classify(&validate_spec(contracting_scalar_spec()).unwrap(), &quick(), 1).unwrap();
        assert_eq!(p.s0.outcome, S0Outcome::LowerBound(8.0));
        assert_eq!(p.moment_class, Some(MomentClass::AllTestedMomentsFinite));
    }

    #[test]
    fn sweep_skips_invalid_points() {
        let spec = validate_spec(slow_fast_spec(1.25)).unwrap();
        let p = SweepParams {
            axis: AxisPath::Mu { station: 0, atom: 0 },
            grid: vec![0.9, 1.0, 1.5],
            classify: ClassifyParams { replicas: 500, top_n: 100, ..ClassifyParams::sweep_default() },
        };
        let rows = run_sweep(&spec, &p, 3);
        assert_eq!(rows[0].verdict, "SKIPPED");
        assert_eq!(rows[1].verdict, "SKIPPED");
        assert_eq!(rows[2].verdict, "POSITIVE_RECURRENT");
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &rows, 3).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().nth(1).unwrap(), "theta,top_exponent,s0_lo,s0_hi,verdict,note");
    }

    #[test]
    fn empty_sweep_has_header_only() {
        let spec = validate_spec(slow_fast_spec(1.25)).unwrap();
        let p = SweepParams { axis: AxisPath::Lambda(0), grid: vec![], classify: ClassifyParams::sweep_default() };
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &run_sweep(&spec, &p, 0), 0).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 2);
    }

    #[test]
    fn fluid_action_records_divergence() {
        let plan = parse_plan(
            "system\n  d 1\n  lambda 1 1\nstation 0\n  atom 1 1.25 0\nstation 1\n  atom 1 1.5 0\naction fluid\n  x 1\n",
        )
        .unwrap();
        let Action::Fluid(p) = &plan.action else { panic!() };
        assert_eq!(run_fluid(&plan.spec, p, 0).unwrap().outcome, "DIVERGED");
    }

    #[test]
    fn execute_writes_files() {
        let dir = tempfile::tempdir().unwrap();
        let plan = parse_plan(
            "system\n  d 1\n  lambda 1 1\nstation 0\n  atom 1 3 0\nstation 1\n  atom 1 3 0\naction simulate\n  init 0 4 0\n  replicas 200\nseed 5\n",
        )
        .unwrap();
        let files = execute(&plan, dir.path()).unwrap();
        let names: Vec<String> = files.iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect();
        assert_eq!(names, ["plan.resolved.txt", "tau.csv", "moments.csv", "simulate.json"]);
        let tau = std::fs::read_to_string(dir.path().join("tau.csv")).unwrap();
        assert!(tau.starts_with("# master_seed=5\nreplica,seed,tau"));
    }
}
