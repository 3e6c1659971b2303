//! Plain-text experiment plans.
//!
//! ```text
//! # two stations, one random regime law
//! system
//!   d 1
//!   lambda 1 1
//!   discipline exhaustive
//! station 0
//!   atom 0.5 3 0        # weight mu gamma_1 .. gamma_d
//!   atom 0.5 1.25 0
//! station 1
//!   atom 1 3 0
//! action classify
//!   s_max 8
//! seed 42
//! ```
//!
//! Section headers start in column 0; their body lines are indented
//! `key value...` pairs. `#` starts a comment. Unknown sections and keys are
//! errors. Gated atoms list `gamma_0 .. gamma_d`; a revolver plan has a
//! single `station 0` law.
//!
//! Actions and their keys (defaults in [`ClassifyParams::default`] etc.):
//!
//! * `classify`: `s_max tol confidence n replicas max_replicas top_n
//!   top_replicas budget grid_step length_check`
//! * `sweep`: `axis PATH`, `grid v1 v2 ..` or `grid start:stop:step`, plus the
//!   classify keys. `PATH` is `lambda.N`, `station.N.atom.K.mu`,
//!   `station.N.atom.K.weight` or `station.N.atom.K.gamma.J`.
//! * `simulate`: `init STATION q0 .. qd`, `replicas horizon moments`
//! * `couple`: `y0 delta replicas`
//! * `fluid`: `x x0 .. x{d-1}`, `epoch rel_tol max_epochs trace_epochs`

use std::fmt::{self, Write as _};
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{validate_spec, Discipline, PollingSpec, Regime, RegimeLaw, ValidatedSpec};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassifyParams {
    pub s_max: f64,
    pub tol: f64,
    pub confidence: f64,
    pub n: usize,
    pub replicas: usize,
    pub max_replicas: usize,
    pub top_n: usize,
    pub top_replicas: usize,
    pub budget: u64,
    /// Spacing of the reported `k(s)` grid; 0 skips the grid.
    pub grid_step: f64,
    pub length_check: bool,
}

impl Default for ClassifyParams {
    fn default() -> Self {
        Self {
            s_max: 8.0,
            tol: 0.02,
            confidence: 0.99,
            n: 64,
            replicas: 4000,
            max_replicas: 64_000,
            top_n: 1000,
            top_replicas: 64,
            budget: 4_000_000_000,
            grid_step: 0.25,
            length_check: true,
        }
    }
}

impl ClassifyParams {
    /// Cheaper settings used per sweep point.
    pub fn sweep_default() -> Self {
        Self {
            n: 32,
            replicas: 2000,
            max_replicas: 16_000,
            top_n: 500,
            top_replicas: 32,
            budget: 500_000_000,
            grid_step: 0.0,
            length_check: false,
            ..Self::default()
        }
    }
}

/// A scalar inside a [`PollingSpec`] that a sweep can vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AxisPath {
    Lambda(usize),
    Mu { station: usize, atom: usize },
    Weight { station: usize, atom: usize },
    Gamma { station: usize, atom: usize, index: usize },
}

impl fmt::Display for AxisPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            AxisPath::Lambda(n) => write!(f, "lambda.{n}"),
            AxisPath::Mu { station, atom } => write!(f, "station.{station}.atom.{atom}.mu"),
            AxisPath::Weight { station, atom } => write!(f, "station.{station}.atom.{atom}.weight"),
            AxisPath::Gamma { station, atom, index } => write!(f, "station.{station}.atom.{atom}.gamma.{index}"),
        }
    }
}

impl FromStr for AxisPath {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split('.').collect();
        let num = |t: &str| t.parse::<usize>().map_err(|_| format!("bad index '{t}' in axis '{s}'"));
        match parts.as_slice() {
            ["lambda", n] => Ok(AxisPath::Lambda(num(n)?)),
            ["station", n, "atom", k, "mu"] => Ok(AxisPath::Mu { station: num(n)?, atom: num(k)? }),
            ["station", n, "atom", k, "weight"] => Ok(AxisPath::Weight { station: num(n)?, atom: num(k)? }),
            ["station", n, "atom", k, "gamma", j] => {
                Ok(AxisPath::Gamma { station: num(n)?, atom: num(k)?, index: num(j)? })
            }
            _ => Err(format!("unknown axis '{s}'")),
        }
    }
}

impl AxisPath {
    /// Copy of `spec` with the addressed value replaced.
    pub fn apply(&self, spec: &PollingSpec, value: f64) -> Result<PollingSpec> {
        let mut out = spec.clone();
        let missing = || Error::InvalidArgument(format!("axis {self} does not exist in this system"));
        match *self {
            AxisPath::Lambda(n) => *out.lambda.get_mut(n).ok_or_else(missing)? = value,
            AxisPath::Mu { station, atom }
            | AxisPath::Weight { station, atom }
            | AxisPath::Gamma { station, atom, .. } => {
                let law = out.nu.get(station).ok_or_else(missing)?;
                let mut atoms = law.atoms().to_vec();
                let (r, w) = atoms.get_mut(atom).ok_or_else(missing)?;
                match *self {
                    AxisPath::Mu { .. } => r.mu = value,
                    AxisPath::Weight { .. } => *w = value,
                    AxisPath::Gamma { index, .. } => *r.gamma.get_mut(index).ok_or_else(missing)? = value,
                    AxisPath::Lambda(_) => unreachable!(),
                }
                out.nu[station] = RegimeLaw::new(atoms);
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepParams {
    pub axis: AxisPath,
    pub grid: Vec<f64>,
    pub classify: ClassifyParams,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulateParams {
    pub station: usize,
    pub queues: Vec<u64>,
    pub replicas: usize,
    pub horizon: u64,
    pub moments: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoupleParams {
    pub y0: f64,
    pub delta: f64,
    pub replicas: usize,
}

impl Default for CoupleParams {
    fn default() -> Self {
        Self { y0: 2000.0, delta: 0.05, replicas: 1000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FluidParams {
    pub x: Vec<f64>,
    pub epoch: usize,
    pub rel_tol: f64,
    pub max_epochs: usize,
    pub trace_epochs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Action {
    Classify(ClassifyParams),
    Sweep(SweepParams),
    Simulate(SimulateParams),
    Couple(CoupleParams),
    Fluid(FluidParams),
}

impl Action {
    pub fn name(&self) -> &'static str {
        match self {
            Action::Classify(_) => "classify",
            Action::Sweep(_) => "sweep",
            Action::Simulate(_) => "simulate",
            Action::Couple(_) => "couple",
            Action::Fluid(_) => "fluid",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentPlan {
    pub spec: ValidatedSpec,
    pub action: Action,
    pub seed: u64,
}

const DEFAULT_SEED: u64 = 0;

pub fn load_plan(path: &Path) -> Result<ExperimentPlan> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io { context: format!("reading plan {}", path.display()), source: e })?;
    parse_plan(&text)
}

struct Line<'a> {
    no: usize,
    key: &'a str,
    args: Vec<&'a str>,
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn one<T: FromStr>(l: &Line) -> Result<T> {
    match l.args.as_slice() {
        [v] => v.parse().map_err(|_| perr(l.no, format!("{}: cannot parse '{v}'", l.key))),
        _ => Err(perr(l.no, format!("{} takes exactly one value", l.key))),
    }
}

fn list<T: FromStr>(l: &Line) -> Result<Vec<T>> {
    l.args.iter().map(|v| v.parse().map_err(|_| perr(l.no, format!("{}: cannot parse '{v}'", l.key)))).collect()
}

/// `start:stop:step` (inclusive) or an explicit list.
fn grid(l: &Line) -> Result<Vec<f64>> {
    if let [range] = l.args.as_slice() {
        if range.contains(':') {
            let parts: Vec<f64> = range
                .split(':')
                .map(|p| p.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| perr(l.no, format!("bad range '{range}'")))?;
            let [start, stop, step] = parts[..] else {
                return Err(perr(l.no, "range needs start:stop:step"));
            };
            if !(step > 0.0) || stop < start {
                return Err(perr(l.no, "range needs step > 0 and stop >= start"));
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            // rounding keeps printed grid values free of binary noise
            return Ok((0..count).map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12).collect());
        }
    }
    list(l)
}

struct Section<'a> {
    no: usize,
    head: &'a str,
    arg: Option<&'a str>,
    body: Vec<Line<'a>>,
}

fn sections(text: &str) -> Result<Vec<Section<'_>>> {
    let mut out: Vec<Section> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let no = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        let key = tokens.next().expect("nonempty");
        let args: Vec<&str> = tokens.collect();
        if content.starts_with(char::is_whitespace) {
            let sec = out.last_mut().ok_or_else(|| perr(no, "indented line before any section"))?;
            sec.body.push(Line { no, key, args });
        } else {
            if args.len() > 1 {
                return Err(perr(no, format!("section '{key}' takes at most one argument")));
            }
            out.push(Section { no, head: key, arg: args.first().copied(), body: Vec::new() });
        }
    }
    Ok(out)
}

fn classify_key(p: &mut ClassifyParams, l: &Line) -> Result<bool> {
    match l.key {
        "s_max" => p.s_max = one(l)?,
        "tol" => p.tol = one(l)?,
        "confidence" => p.confidence = one(l)?,
        "n" => p.n = one(l)?,
        "replicas" => p.replicas = one(l)?,
        "max_replicas" => p.max_replicas = one(l)?,
        "top_n" => p.top_n = one(l)?,
        "top_replicas" => p.top_replicas = one(l)?,
        "budget" => p.budget = one(l)?,
        "grid_step" => p.grid_step = one(l)?,
        "length_check" => p.length_check = one(l)?,
        _ => return Ok(false),
    }
    Ok(true)
}

fn unknown(l: &Line, section: &str) -> Error {
    perr(l.no, format!("unknown key '{}' in {section}", l.key))
}

fn parse_action(sec: &Section, d: usize) -> Result<Action> {
    let name = sec.arg.ok_or_else(|| perr(sec.no, "action needs a name"))?;
    let body = &sec.body;
    match name {
        "classify" => {
            let mut p = ClassifyParams::default();
            for l in body {
                if !classify_key(&mut p, l)? {
                    return Err(unknown(l, "action classify"));
                }
            }
            Ok(Action::Classify(p))
        }
        "sweep" => {
            let mut classify = ClassifyParams::sweep_default();
            let mut axis = None;
            let mut values = None;
            for l in body {
                match l.key {
                    "axis" => {
                        let s: String = one(l)?;
                        axis = Some(s.parse::<AxisPath>().map_err(|m| perr(l.no, m))?);
                    }
                    "grid" => values = Some(grid(l)?),
                    _ if classify_key(&mut classify, l)? => {}
                    _ => return Err(unknown(l, "action sweep")),
                }
            }
            Ok(Action::Sweep(SweepParams {
                axis: axis.ok_or_else(|| perr(sec.no, "sweep needs an axis"))?,
                grid: values.ok_or_else(|| perr(sec.no, "sweep needs a grid"))?,
                classify,
            }))
        }
        "simulate" => {
            let mut p = SimulateParams {
                station: 0,
                queues: Vec::new(),
                replicas: 10_000,
                horizon: 1_000_000,
                moments: vec![0.5, 1.0, 2.0],
            };
            let mut seen_init = false;
            for l in body {
                match l.key {
                    "init" => {
                        let v: Vec<u64> = list(l)?;
                        if v.len() != d + 2 {
                            return Err(perr(l.no, format!("init needs a station and {} queue lengths", d + 1)));
                        }
                        p.station = v[0] as usize;
                        p.queues = v[1..].to_vec();
                        seen_init = true;
                    }
                    "replicas" => p.replicas = one(l)?,
                    "horizon" => p.horizon = one(l)?,
                    "moments" => p.moments = list(l)?,
                    _ => return Err(unknown(l, "action simulate")),
                }
            }
            if !seen_init {
                return Err(perr(sec.no, "simulate needs an init line"));
            }
            Ok(Action::Simulate(p))
        }
        "couple" => {
            let mut p = CoupleParams::default();
            for l in body {
                match l.key {
                    "y0" => p.y0 = one(l)?,
                    "delta" => p.delta = one(l)?,
                    "replicas" => p.replicas = one(l)?,
                    _ => return Err(unknown(l, "action couple")),
                }
            }
            Ok(Action::Couple(p))
        }
        "fluid" => {
            let mut p = FluidParams { x: Vec::new(), epoch: 0, rel_tol: 1e-9, max_epochs: 100_000, trace_epochs: 200 };
            for l in body {
                match l.key {
                    "x" => {
                        p.x = list(l)?;
                        if p.x.len() != d {
                            return Err(perr(l.no, format!("x needs {d} levels")));
                        }
                    }
                    "epoch" => p.epoch = one(l)?,
                    "rel_tol" => p.rel_tol = one(l)?,
                    "max_epochs" => p.max_epochs = one(l)?,
                    "trace_epochs" => p.trace_epochs = one(l)?,
                    _ => return Err(unknown(l, "action fluid")),
                }
            }
            if p.x.is_empty() {
                return Err(perr(sec.no, "fluid needs an x line"));
            }
            Ok(Action::Fluid(p))
        }
        other => Err(perr(sec.no, format!("unknown action '{other}'"))),
    }
}

/// Parses and validates a plan. A station without a law section is reported
/// by the system validation as an empty law.
/// Station index, header line, atoms.
type StationLaw = (usize, usize, Vec<(Regime, f64)>);

pub fn parse_plan(text: &str) -> Result<ExperimentPlan> {
    let secs = sections(text)?;
    let mut d = None;
    let mut lambda = None;
    let mut discipline = Discipline::Exhaustive;
    let mut laws: Vec<StationLaw> = Vec::new();
    let mut action_sec = None;
    let mut seed = None;
    let mut system_seen = false;
    for sec in &secs {
        match sec.head {
            "system" => {
                if std::mem::replace(&mut system_seen, true) {
                    return Err(perr(sec.no, "duplicate system section"));
                }
                for l in &sec.body {
                    match l.key {
                        "d" => d = Some(one::<usize>(l)?),
                        "lambda" => lambda = Some(list::<f64>(l)?),
                        "discipline" => {
                            let s: String = one(l)?;
                            discipline =
                                Discipline::parse(&s).ok_or_else(|| perr(l.no, format!("unknown discipline '{s}'")))?;
                        }
                        _ => return Err(unknown(l, "system")),
                    }
                }
            }
            "station" => {
                let n: usize =
                    sec.arg.and_then(|a| a.parse().ok()).ok_or_else(|| perr(sec.no, "station needs an index"))?;
                if laws.iter().any(|(m, _, _)| *m == n) {
                    return Err(perr(sec.no, format!("duplicate station {n}")));
                }
                let mut atoms = Vec::new();
                for l in &sec.body {
                    if l.key != "atom" {
                        return Err(unknown(l, "station"));
                    }
                    let v: Vec<f64> = list(l)?;
                    if v.len() < 2 {
                        return Err(perr(l.no, "atom needs weight, mu and gammas"));
                    }
                    atoms.push((Regime::new(v[1], v[2..].to_vec()), v[0]));
                }
                laws.push((n, sec.no, atoms));
            }
            "action" => {
                if action_sec.replace(sec).is_some() {
                    return Err(perr(sec.no, "duplicate action section"));
                }
            }
            "seed" => {
                if !sec.body.is_empty() {
                    return Err(perr(sec.body[0].no, "seed takes its value on the header line"));
                }
                let v = sec.arg.ok_or_else(|| perr(sec.no, "seed needs a value"))?;
                seed = Some(v.parse::<u64>().map_err(|_| perr(sec.no, format!("bad seed '{v}'")))?);
            }
            other => return Err(perr(sec.no, format!("unknown section '{other}'"))),
        }
    }
    let d = d.ok_or_else(|| perr(1, "system section needs d"))?;
    let lambda = lambda.ok_or_else(|| perr(1, "system section needs lambda"))?;
    let law_count = if discipline == Discipline::Revolver { 1 } else { d + 1 };
    let mut nu = vec![RegimeLaw::new(Vec::new()); law_count];
    for (n, line, atoms) in laws {
        if n >= law_count {
            return Err(perr(line, format!("station {n} out of range for this system")));
        }
        nu[n] = RegimeLaw::new(atoms);
    }
    let spec = validate_spec(PollingSpec { d, lambda, nu, discipline })?;
    let action_sec = action_sec.ok_or_else(|| perr(1, "plan needs an action section"))?;
    let action = parse_action(action_sec, d)?;
    Ok(ExperimentPlan { spec, action, seed: seed.unwrap_or(DEFAULT_SEED) })
}

fn join<T: fmt::Display>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

impl ExperimentPlan {
    /// The plan with every default written out; parses back to an equal plan.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let spec = &self.spec;
        let _ =
            writeln!(s, "system\n  d {}\n  lambda {}\n  discipline {}", spec.d, join(&spec.lambda), spec.discipline);
        for (n, law) in spec.nu.iter().enumerate() {
            let _ = writeln!(s, "station {n}");
            for (r, w) in law.atoms() {
                let _ = writeln!(s, "  atom {w} {} {}", r.mu, join(&r.gamma));
            }
        }
        let _ = writeln!(s, "action {}", self.action.name());
        let classify = |s: &mut String, p: &ClassifyParams| {
            let _ = write!(
                s,
                "  s_max {}\n  tol {}\n  confidence {}\n  n {}\n  replicas {}\n  max_replicas {}\n  top_n {}\n  top_replicas {}\n  budget {}\n  grid_step {}\n  length_check {}\n",
                p.s_max, p.tol, p.confidence, p.n, p.replicas, p.max_replicas, p.top_n, p.top_replicas, p.budget, p.grid_step, p.length_check
            );
        };
        match &self.action {
            Action::Classify(p) => classify(&mut s, p),
            Action::Sweep(p) => {
                let _ = writeln!(s, "  axis {}", p.axis);
                let _ = writeln!(s, "  grid {}", join(&p.grid));
                classify(&mut s, &p.classify);
            }
            Action::Simulate(p) => {
                let _ = writeln!(
                    s,
                    "  init {} {}\n  replicas {}\n  horizon {}\n  moments {}",
                    p.station,
                    join(&p.queues),
                    p.replicas,
                    p.horizon,
                    join(&p.moments)
                );
            }
            Action::Couple(p) => {
                let _ = writeln!(s, "  y0 {}\n  delta {}\n  replicas {}", p.y0, p.delta, p.replicas);
            }
            Action::Fluid(p) => {
                let _ = writeln!(
                    s,
                    "  x {}\n  epoch {}\n  rel_tol {}\n  max_epochs {}\n  trace_epochs {}",
                    join(&p.x),
                    p.epoch,
                    p.rel_tol,
                    p.max_epochs,
                    p.trace_epochs
                );
            }
        }
        let _ = writeln!(s, "seed {}", self.seed);
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Violation;

    const NULL_RECURRENT: &str = "\
system
  d 1
  lambda 1 1
station 0
  atom 0.5 3 0
  atom 0.5 1.25 0
station 1
  atom 1 3 0
action classify
";

    #[test]
    fn minimal_plan_gets_defaults() {
        let plan = parse_plan(NULL_RECURRENT).unwrap();
        assert_eq!(plan.spec.discipline, Discipline::Exhaustive);
        assert_eq!(plan.seed, 0);
        assert_eq!(plan.action, Action::Classify(ClassifyParams::default()));
        let again = parse_plan(&plan.to_text()).unwrap();
        assert_eq!(again, plan);
    }

    #[test]
    fn missing_station_names_it() {
        let text = "system\n  d 1\n  lambda 1 1\nstation 0\n  atom 1 3 0\naction classify\n";
        match parse_plan(text) {
            Err(Error::Validation(v)) => assert_eq!(v, vec![Violation::EmptyLaw { station: 1 }]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_key_rejected_with_line() {
        let text = NULL_RECURRENT.replace("action classify\n", "action classify\n  colour blue\n");
        match parse_plan(&text) {
            Err(Error::Parse { line, msg }) => {
                assert_eq!(line, 10);
                assert!(msg.contains("colour"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn sweep_grid_and_round_trip() {
        let text = NULL_RECURRENT.replace(
            "action classify\n",
            "action sweep\n  axis station.0.atom.1.mu\n  grid 1.1:3.0:0.1\n  replicas 500\nseed 9\n",
        );
        let plan = parse_plan(&text).unwrap();
        let Action::Sweep(p) = &plan.action else { panic!() };
        assert_eq!(p.grid.len(), 20);
        assert_eq!(p.grid[1], 1.2);
        assert_eq!(p.grid[19], 3.0);
        assert_eq!(p.classify.replicas, 500);
        assert_eq!(p.axis, AxisPath::Mu { station: 0, atom: 1 });
        assert_eq!(parse_plan(&plan.to_text()).unwrap(), plan);
    }

    #[test]
    fn empty_grid_allowed() {
        let text = NULL_RECURRENT.replace("action classify\n", "action sweep\n  axis lambda.0\n  grid\n");
        let plan = parse_plan(&text).unwrap();
        let Action::Sweep(p) = plan.action else { panic!() };
        assert!(p.grid.is_empty());
    }

    #[test]
    fn axis_paths() {
        for s in ["lambda.1", "station.0.atom.1.mu", "station.2.atom.0.weight", "station.1.atom.0.gamma.1"] {
            assert_eq!(s.parse::<AxisPath>().unwrap().to_string(), s);
        }
        assert!("station.0.mu".parse::<AxisPath>().is_err());
        let plan = parse_plan(NULL_RECURRENT).unwrap();
        let moved = AxisPath::Mu { station: 0, atom: 1 }.apply(&plan.spec, 2.0).unwrap();
        assert_eq!(moved.nu[0].atoms()[1].0.mu, 2.0);
        assert!(AxisPath::Lambda(5).apply(&plan.spec, 1.0).is_err());
    }

    #[test]
    fn other_actions_parse() {
        let sim = NULL_RECURRENT.replace("action classify\n", "action simulate\n  init 0 4 0\n  replicas 10\n");
        let Action::Simulate(p) = parse_plan(&sim).unwrap().action else { panic!() };
        assert_eq!((p.station, p.queues.clone(), p.replicas), (0, vec![4, 0], 10));
        let fl = NULL_RECURRENT.replace("action classify\n", "action fluid\n  x 4\n");
        let plan = parse_plan(&fl).unwrap();
        assert_eq!(parse_plan(&plan.to_text()).unwrap(), plan);
        let co = NULL_RECURRENT.replace("action classify\n", "action couple\n  y0 25\n");
        assert!(matches!(parse_plan(&co).unwrap().action, Action::Couple(CoupleParams { y0, .. }) if y0 == 25.0));
        let bad = NULL_RECURRENT.replace("action classify\n", "action simulate\n  init 0 4\n");
        assert!(matches!(parse_plan(&bad), Err(Error::Parse { .. })));
    }

    #[test]
    fn comments_and_seed() {
        let text = format!("# header\n{NULL_RECURRENT}seed 17 # trailing\n");
        assert_eq!(parse_plan(&text).unwrap().seed, 17);
    }

    #[test]
    fn revolver_single_law() {
        let text =
            "system\n  d 2\n  lambda 1 1 1\n  discipline revolver\nstation 0\n  atom 1 4 0.1 0.1\naction classify\n";
        let plan = parse_plan(text).unwrap();
        assert_eq!(plan.spec.nu.len(), 1);
        let bad = format!("{text}station 1\n  atom 1 4 0.1 0.1\n");
        assert!(matches!(parse_plan(&bad), Err(Error::Parse { .. })));
    }
}
