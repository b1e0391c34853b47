//! Experiment orchestration behind the command-line tool: every run reads
//! its inputs, draws randomness from one seeded generator, writes sorted CSV
//! files plus `summary.csv` / `summary.txt` into the output directory, and
//! reports how many checks failed.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::calculus::{chain_rule_counterexample, power_identity_residual, GradientConvention};
use crate::error::{Error, Result};
use crate::estimate::{check_t1, check_trajectory, phi, EstimateReport, EstimateRow, HarnackVerifier, Status};
use crate::field::VertexField;
use crate::generate::{generate_graph, GraphSpec, MeasureMode, WeightMode};
use crate::graph::{GraphConstants, WeightedGraph};
use crate::kernel::{
    asymmetry, heat_kernel_oracle, heat_kernel_series, mass_check, weighted_asymmetry, KernelBounds,
};
use crate::lemma::{lemma_check_with, LemmaInstance, WeightAnchor};
use crate::paths::shortest_paths;
use crate::pme::{hypothesis_check, integrate, IntegratorConfig, OutputGrid, PmeProblem, Scheme, Trajectory};
use crate::poly::Poly;

/// Relative residual accepted for the power identity.
pub const IDENTITY_TOL: f64 = 1e-10;

/// Where a graph comes from: a document on disk or a named generator.
#[derive(Debug, Clone, PartialEq)]
pub enum GraphSource {
    File(PathBuf),
    Generated { spec: GraphSpec, weights: WeightMode, measure: MeasureMode },
}

impl GraphSource {
    /// An existing file wins; otherwise the text must name a generator.
    pub fn from_arg(arg: &str, random_weights: bool, degree_measure: bool) -> Result<Self> {
        if Path::new(arg).exists() {
            return Ok(GraphSource::File(arg.into()));
        }
        let spec = arg.parse::<GraphSpec>().map_err(|_| {
            Error::InvalidParameter(format!("`{arg}` is neither a graph file nor a generator spec"))
        })?;
        Ok(GraphSource::Generated {
            spec,
            weights: if random_weights { WeightMode::Random } else { WeightMode::Unit },
            measure: if degree_measure { MeasureMode::Degree } else { MeasureMode::Unit },
        })
    }

    fn load(&self, rng: &mut ChaCha8Rng) -> Result<WeightedGraph> {
        match self {
            GraphSource::File(path) => load_graph_file(path),
            GraphSource::Generated { spec, weights, measure } => generate_graph(*spec, *weights, *measure, rng),
        }
    }
}

pub fn load_graph_file(path: &Path) -> Result<WeightedGraph> {
    let text = read(path)?;
    WeightedGraph::parse(&text).map_err(|e| e.context(path.display().to_string()))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Loads a problem document; its `graph` line is resolved relative to the
/// document's directory.
pub fn load_problem_file(path: &Path) -> Result<PmeProblem> {
    let text = read(path)?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    PmeProblem::parse(&text, |r| load_graph_file(&base.join(r))).map_err(|e| e.context(path.display().to_string()))
}

#[derive(Debug, Clone, PartialEq)]
pub enum PairQuery {
    Single { x: String, y: String, t1: f64, t2: f64 },
    /// Uniform vertex pairs and ordered time pairs inside the solved span.
    Random(usize),
}

impl PairQuery {
    /// Parses `random:<n>`.
    pub fn parse_random(s: &str) -> Result<Self> {
        s.strip_prefix("random:")
            .and_then(|n| n.parse().ok())
            .map(PairQuery::Random)
            .ok_or_else(|| Error::InvalidParameter(format!("expected `random:<n>`, got `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    Identity,
    Gradient,
    Harnack,
    Phi,
    Lemma,
    Kernel,
}

impl std::str::FromStr for SweepKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "identity" => SweepKind::Identity,
            "gradient" => SweepKind::Gradient,
            "harnack" => SweepKind::Harnack,
            "phi" => SweepKind::Phi,
            "lemma" => SweepKind::Lemma,
            "kernel" => SweepKind::Kernel,
            _ => return Err(Error::InvalidParameter(format!("unknown sweep `{s}`"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    VerifyIdentity {
        graph: GraphSource,
        field: Option<PathBuf>,
        random_fields: usize,
        m: f64,
        chain_rule: Option<f64>,
    },
    Simulate {
        problem: PathBuf,
        outputs: usize,
        fixed_substeps: Option<usize>,
    },
    VerifyGradientEstimate {
        problem: PathBuf,
        outputs: usize,
    },
    VerifyHarnack {
        problem: PathBuf,
        outputs: usize,
        query: PairQuery,
        path_cap: usize,
        c0: Option<f64>,
    },
    VerifyLemma {
        random: usize,
        grid: usize,
        anchor: WeightAnchor,
    },
    Kernel {
        graph: GraphSource,
        t: f64,
        eps: f64,
        /// `(m, C0)` when bounds are requested.
        bounds: Option<(f64, f64)>,
    },
    Sweep {
        kind: SweepKind,
        count: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub command: Command,
    pub seed: u64,
    pub out: PathBuf,
    /// Integrator tolerance per unit time.
    pub tol: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub summary: String,
    pub failures: usize,
}

/// One line of `summary.csv`.
#[derive(Debug, Clone, PartialEq)]
struct Tally {
    check: String,
    pass: usize,
    fail: usize,
    vacuous: usize,
    worst_margin: Option<f64>,
}

impl Tally {
    fn new(check: impl Into<String>) -> Self {
        Tally { check: check.into(), pass: 0, fail: 0, vacuous: 0, worst_margin: None }
    }

    fn add(&mut self, status: Status, margin: f64) {
        match status {
            Status::Pass => self.pass += 1,
            Status::Fail => self.fail += 1,
            Status::Vacuous => {
                self.vacuous += 1;
                return;
            }
        }
        if self.worst_margin.is_none_or(|w| margin < w) {
            self.worst_margin = Some(margin);
        }
    }

    fn from_report(check: &str, r: &EstimateReport) -> Self {
        let mut t = Tally::new(check);
        for row in &r.rows {
            t.add(row.status, row.margin);
        }
        t
    }
}

fn pass_fail(ok: bool) -> Status {
    if ok {
        Status::Pass
    } else {
        Status::Fail
    }
}

struct Sink {
    dir: PathBuf,
    files: Vec<PathBuf>,
    tallies: Vec<Tally>,
    notes: Vec<String>,
}

impl Sink {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
        Ok(Sink { dir: dir.to_path_buf(), files: vec![], tallies: vec![], notes: vec![] })
    }

    fn csv(&mut self, name: &str, header: &[&str], rows: Vec<Vec<String>>) -> Result<()> {
        let path = self.dir.join(name);
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(header)?;
        for r in rows {
            w.write_record(&r)?;
        }
        w.flush()?;
        self.files.push(path);
        Ok(())
    }

    fn estimates(&mut self, name: &str, g: &WeightedGraph, report: &EstimateReport) -> Result<()> {
        let mut report = report.clone();
        report.sort();
        let rows = report.rows.iter().map(|r| estimate_record(g, r)).collect();
        self.csv(name, &["x", "y", "T1", "T2", "lhs", "rhs", "margin", "status"], rows)
    }

    fn finish(mut self, title: &str) -> Result<Outcome> {
        let rows = self
            .tallies
            .iter()
            .map(|t| {
                vec![
                    t.check.clone(),
                    t.pass.to_string(),
                    t.fail.to_string(),
                    t.vacuous.to_string(),
                    t.worst_margin.map(fmt).unwrap_or_default(),
                ]
            })
            .collect();
        self.csv("summary.csv", &["check", "pass", "fail", "vacuous", "worst_margin"], rows)?;

        let mut text = format!("{title}\n");
        for t in &self.tallies {
            let worst = t.worst_margin.map(|w| format!("{w:.6e}")).unwrap_or_else(|| "-".into());
            let _ = writeln!(
                text,
                "  {:<28} pass {:>6}  fail {:>6}  vacuous {:>6}  worst margin {worst}",
                t.check, t.pass, t.fail, t.vacuous
            );
        }
        for n in &self.notes {
            let _ = writeln!(text, "  {n}");
        }
        let failures: usize = self.tallies.iter().map(|t| t.fail).sum();
        let _ = writeln!(text, "{}", if failures == 0 { "result: ok" } else { "result: FAILED" });
        let path = self.dir.join("summary.txt");
        fs::write(&path, &text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        self.files.push(path);
        Ok(Outcome { files: self.files, summary: text, failures })
    }
}

/// Shortest round-trip formatting, stable across runs.
fn fmt(v: f64) -> String {
    format!("{v}")
}

fn estimate_record(g: &WeightedGraph, r: &EstimateRow) -> Vec<String> {
    vec![
        g.label(r.x).to_string(),
        g.label(r.y).to_string(),
        fmt(r.t1),
        fmt(r.t2),
        fmt(r.lhs),
        fmt(r.rhs),
        fmt(r.margin),
        r.status.to_string(),
    ]
}

fn poly_text(p: &Poly) -> String {
    p.coeffs().iter().map(|c| fmt(*c)).collect::<Vec<_>>().join(" ")
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut sink = Sink::new(&cfg.out)?;
    let integ = IntegratorConfig { tol: cfg.tol, ..IntegratorConfig::default() };
    let title = match &cfg.command {
        Command::VerifyIdentity { graph, field, random_fields, m, chain_rule } => {
            let g = graph.load(&mut rng)?;
            sink.notes.push(describe_graph(&g));
            verify_identity(&mut sink, &g, field.as_deref(), *random_fields, *m, *chain_rule, &mut rng)?;
            format!("verify-identity on {} (seed {})", g.name(), cfg.seed)
        }
        Command::Simulate { problem, outputs, fixed_substeps } => {
            let p = load_problem_file(problem)?;
            let scheme = match fixed_substeps {
                Some(k) => Scheme::FixedRk4 { substeps: *k },
                None => Scheme::Adaptive,
            };
            simulate(&mut sink, &p, &IntegratorConfig { scheme, ..integ }, *outputs)?;
            format!("simulate {}", problem.display())
        }
        Command::VerifyGradientEstimate { problem, outputs } => {
            let p = load_problem_file(problem)?;
            p.validate_theorem_mode()?;
            let traj = integrate(&p, &integ, &OutputGrid::Uniform(*outputs))?;
            let (t1, t2, gap) = check_trajectory(&p, &traj)?;
            sink.estimates("t1.csv", &p.graph, &t1)?;
            sink.estimates("t2.csv", &p.graph, &t2)?;
            sink.tallies.push(Tally::from_report("gradient-estimate-t1", &t1));
            sink.tallies.push(Tally::from_report("gradient-estimate-t2", &t2));
            sink.notes.push(format!("reduced-form gap (relative) {gap:.3e}"));
            format!("verify-gradient-estimate {}", problem.display())
        }
        Command::VerifyHarnack { problem, outputs, query, path_cap, c0 } => {
            let p = load_problem_file(problem)?;
            let traj = integrate(&p, &integ, &OutputGrid::Uniform(*outputs))?;
            verify_harnack(&mut sink, &p, &traj, query, *path_cap, *c0, &mut rng)?;
            format!("verify-harnack {} (seed {})", problem.display(), cfg.seed)
        }
        Command::VerifyLemma { random, grid, anchor } => {
            verify_lemma(&mut sink, *random, *grid, *anchor, &mut rng)?;
            format!("verify-lemma, {random} instances (seed {})", cfg.seed)
        }
        Command::Kernel { graph, t, eps, bounds } => {
            let g = graph.load(&mut rng)?;
            sink.notes.push(describe_graph(&g));
            kernel(&mut sink, &g, *t, *eps, *bounds)?;
            format!("kernel on {} at t = {t}", g.name())
        }
        Command::Sweep { kind, count } => {
            sweep(&mut sink, *kind, *count, &integ, &mut rng)?;
            format!("sweep {kind:?} x{count} (seed {})", cfg.seed)
        }
    };
    sink.finish(&title)
}

fn verify_identity(
    sink: &mut Sink,
    g: &WeightedGraph,
    field: Option<&Path>,
    random_fields: usize,
    m: f64,
    chain_rule: Option<f64>,
    rng: &mut ChaCha8Rng,
) -> Result<()> {
    let mut fields = Vec::new();
    if let Some(path) = field {
        let text = read(path)?;
        fields.push(VertexField::parse(g, &text).map_err(|e| e.context(path.display().to_string()))?);
    }
    for _ in 0..random_fields {
        fields.push(VertexField::from_fn(g.len(), |_| rng.random_range(0.1..10.0)));
    }
    let mut tally = Tally::new("power-identity");
    let mut rows = Vec::new();
    for (i, u) in fields.iter().enumerate() {
        let r = power_identity_residual(g, u, m)?;
        let status = pass_fail(r.relative() <= IDENTITY_TOL);
        tally.add(status, IDENTITY_TOL - r.relative());
        rows.push(vec![i.to_string(), fmt(m), fmt(r.max_abs()), fmt(r.relative()), status.to_string()]);
    }
    sink.csv("identity.csv", &["field", "m", "max_abs_residual", "relative_residual", "status"], rows)?;
    sink.tallies.push(tally);

    if let Some(p) = chain_rule {
        let mut rows = Vec::new();
        for (name, conv) in [("twice-gamma", GradientConvention::TwiceGamma), ("gamma", GradientConvention::Gamma)] {
            let w = chain_rule_counterexample(g, p, conv, 200, rng)?;
            rows.push(match w {
                Some(w) => vec![
                    name.into(),
                    fmt(p),
                    "true".into(),
                    g.label(w.vertex).into(),
                    fmt(w.lhs),
                    fmt(w.rhs),
                ],
                None => vec![name.into(), fmt(p), "false".into(), String::new(), String::new(), String::new()],
            });
        }
        sink.csv("chain_rule.csv", &["convention", "p", "witness", "vertex", "lhs", "rhs"], rows)?;
    }
    Ok(())
}

fn simulate(sink: &mut Sink, p: &PmeProblem, cfg: &IntegratorConfig, outputs: usize) -> Result<()> {
    let traj = integrate(p, cfg, &OutputGrid::Uniform(outputs))?;
    let mut header = vec!["t".to_string()];
    header.extend(p.graph.labels().iter().map(|l| format!("u_{l}")));
    header.push("error".into());
    let rows = (0..traj.len())
        .map(|i| {
            let mut r = vec![fmt(traj.times[i])];
            r.extend(traj.states[i].iter().map(|v| fmt(*v)));
            r.push(fmt(traj.errors[i]));
            r
        })
        .collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    sink.csv("trajectory.csv", &header, rows)?;

    let hyp = hypothesis_check(p, &traj);
    let rows = hyp
        .rows
        .iter()
        .map(|r| {
            vec![
                fmt(r.t),
                r.u_positive.to_string(),
                r.ut_positive.to_string(),
                r.delta_negative.to_string(),
                hyp.m_gt_one.to_string(),
            ]
        })
        .collect();
    sink.csv("hypotheses.csv", &["t", "u_positive", "ut_positive", "delta_negative", "m_gt_one"], rows)?;
    sink.notes.push(format!(
        "{} states on [{}, {}]; hypotheses hold throughout: {}",
        traj.len(),
        p.t1,
        p.t2,
        hyp.all_hold()
    ));
    Ok(())
}

fn random_times(rng: &mut ChaCha8Rng, a: f64, b: f64) -> (f64, f64) {
    loop {
        let s = rng.random_range(a..=b);
        let t = rng.random_range(a..=b);
        if s != t {
            return (s.min(t), s.max(t));
        }
    }
}

fn verify_harnack(
    sink: &mut Sink,
    p: &PmeProblem,
    traj: &Trajectory,
    query: &PairQuery,
    path_cap: usize,
    c0: Option<f64>,
    rng: &mut ChaCha8Rng,
) -> Result<()> {
    let g = &p.graph;
    let verifier = HarnackVerifier::new(p, traj)?;
    let queries = match query {
        PairQuery::Single { x, y, t1, t2 } => vec![(g.index_of(x)?, g.index_of(y)?, *t1, *t2)],
        PairQuery::Random(n) => {
            let (a, b) = traj.span();
            (0..*n)
                .map(|_| {
                    let x = rng.random_range(0..g.len());
                    let y = rng.random_range(0..g.len());
                    let (t1, t2) = random_times(rng, a, b);
                    (x, y, t1, t2)
                })
                .collect()
        }
    };
    let mut bound = EstimateReport::default();
    let mut bounded = EstimateReport::default();
    let mut diag = Vec::new();
    let mut ordering = Tally::new("harnack-c0-ordering");
    let mut truncated = 0;
    for &(x, y, t1, t2) in &queries {
        let r = verifier.bound(x, y, t1, t2, path_cap)?;
        truncated += usize::from(r.phi.truncated);
        diag.push((
            (x, y, t1, t2),
            vec![
                g.label(x).to_string(),
                g.label(y).to_string(),
                fmt(t1),
                fmt(t2),
                r.distance.to_string(),
                fmt(r.phi.value),
                r.phi.path.iter().map(|&v| g.label(v)).collect::<Vec<_>>().join(">"),
                r.phi.paths_considered.to_string(),
                r.phi.truncated.to_string(),
                fmt(r.exponent),
                fmt(r.end_anchored_exponent),
                fmt(r.ratio()),
            ],
        ));
        bound.rows.push(r.row());
        if let Some(c0) = c0 {
            let b = verifier.bounded_psi(x, y, t1, t2, c0, path_cap)?;
            ordering.add(pass_fail(b.ordering_holds), b.exponent - b.path_exponent);
            let margin = b.margin();
            bounded.rows.push(EstimateRow { x, y, t1, t2, lhs: b.lhs, rhs: b.rhs, margin, status: b.status });
        }
    }
    sink.estimates("harnack.csv", g, &bound)?;
    sink.tallies.push(Tally::from_report("harnack", &bound));
    diag.sort_by(|a, b| {
        let (ka, kb) = (a.0, b.0);
        (ka.0, ka.1).cmp(&(kb.0, kb.1)).then(ka.2.total_cmp(&kb.2)).then(ka.3.total_cmp(&kb.3))
    });
    sink.csv(
        "harnack_paths.csv",
        &[
            "x",
            "y",
            "T1",
            "T2",
            "distance",
            "min_phi",
            "path",
            "paths",
            "truncated",
            "exponent",
            "end_anchored_exponent",
            "ratio",
        ],
        diag.into_iter().map(|(_, r)| r).collect(),
    )?;
    if c0.is_some() {
        sink.estimates("harnack_c0.csv", g, &bounded)?;
        sink.tallies.push(Tally::from_report("harnack-c0", &bounded));
        sink.tallies.push(ordering);
    }
    if truncated > 0 {
        sink.notes.push(format!("{truncated} queries hit the path cap; their minimum is not necessarily minimal"));
    }
    if !verifier.hypotheses().all_hold() {
        sink.notes.push("hypotheses fail somewhere on the trajectory; affected rows are vacuous".into());
    }
    Ok(())
}

fn verify_lemma(sink: &mut Sink, n: usize, grid: usize, anchor: WeightAnchor, rng: &mut ChaCha8Rng) -> Result<()> {
    let mut tally = Tally::new(match anchor {
        WeightAnchor::End => "integral-lemma",
        WeightAnchor::Start => "integral-lemma-start-anchored",
    });
    let mut rows = Vec::new();
    for i in 0..n {
        let inst = LemmaInstance::random(rng);
        let r = lemma_check_with(&inst, grid, anchor)?;
        let status = pass_fail(r.holds);
        tally.add(status, r.margin());
        rows.push(vec![
            i.to_string(),
            fmt(inst.c),
            fmt(inst.alpha),
            fmt(inst.t1),
            fmt(inst.t2),
            poly_text(&inst.gamma),
            poly_text(&inst.psi1),
            poly_text(&inst.psi2),
            fmt(r.lhs),
            fmt(r.argmin),
            fmt(r.rhs),
            fmt(r.margin()),
            r.grid.to_string(),
            status.to_string(),
        ]);
    }
    sink.csv(
        "lemma.csv",
        &["instance", "c", "alpha", "T1", "T2", "gamma", "psi1", "psi2", "lhs", "argmin", "rhs", "margin", "grid", "status"],
        rows,
    )?;
    sink.tallies.push(tally);
    Ok(())
}

fn kernel(sink: &mut Sink, g: &WeightedGraph, t: f64, eps: f64, bounds: Option<(f64, f64)>) -> Result<()> {
    let k = heat_kernel_series(g, t, eps)?;
    let kb = KernelBounds::new(g);
    let mut upper_t = Tally::new("kernel-upper-bound");
    let mut lower_t = Tally::new("kernel-lower-bound");
    let mut rows = Vec::new();
    for x in 0..g.len() {
        let upper = bounds.map(|(m, c0)| kb.upper(t, x, c0, m)).transpose()?;
        for y in 0..g.len() {
            let p = k.get(x, y);
            let lower = bounds.map(|(m, c0)| kb.lower(t, x, y, c0, m)).transpose()?;
            let status = match (upper, lower) {
                (Some(u), Some(l)) => {
                    let (su, sl) = (pass_fail(p <= u + 1e-9), pass_fail(l <= p + 1e-9));
                    upper_t.add(su, u - p);
                    lower_t.add(sl, p - l);
                    if su == Status::Pass && sl == Status::Pass {
                        "pass"
                    } else {
                        "fail"
                    }
                }
                _ => "unchecked",
            };
            rows.push(vec![
                g.label(x).to_string(),
                g.label(y).to_string(),
                fmt(p),
                upper.map(fmt).unwrap_or_default(),
                lower.map(fmt).unwrap_or_default(),
                status.to_string(),
            ]);
        }
    }
    sink.csv("kernel.csv", &["x", "y", "p", "upper_bound", "lower_bound", "status"], rows)?;
    let mass = mass_check(&k, g);
    let mut mass_t = Tally::new("kernel-mass");
    mass_t.add(pass_fail(mass.within(eps.max(1e-8))), eps.max(1e-8) - mass.max_deviation);
    sink.tallies.push(mass_t);
    if bounds.is_some() {
        sink.tallies.push(upper_t);
        sink.tallies.push(lower_t);
    }
    sink.notes.push(format!("series order K = {}, certified eps = {eps:e}", k.order.unwrap_or(0)));
    Ok(())
}

/// Connected random graph with `n` vertices, weights in `[0.5, 2]` and the
/// requested measure.
fn sweep_graph(rng: &mut ChaCha8Rng, n: usize, measure: MeasureMode) -> Result<WeightedGraph> {
    let floor = if n > 1 { (2.0 * (n as f64).ln() / n as f64).min(1.0) } else { 1.0 };
    let p = rng.random_range(floor.min(0.6)..=0.6f64.max(floor));
    generate_graph(GraphSpec::Gnp { n, p }, WeightMode::Random, measure, rng)
}

fn sweep(sink: &mut Sink, kind: SweepKind, count: usize, integ: &IntegratorConfig, rng: &mut ChaCha8Rng) -> Result<()> {
    match kind {
        SweepKind::Identity | SweepKind::Gradient => {
            let mut tally = Tally::new(if kind == SweepKind::Identity { "power-identity" } else { "gradient-estimate-t1" });
            let mut rows = Vec::new();
            for case in 0..count {
                let n = rng.random_range(2..=50);
                let measure = if rng.random_bool(0.5) { MeasureMode::Degree } else { MeasureMode::Unit };
                let g = sweep_graph(rng, n, measure)?;
                let u = VertexField::from_fn(n, |_| rng.random_range(0.1..10.0));
                if kind == SweepKind::Identity {
                    for m in [1.5, 2.0, 3.0, -1.0] {
                        let r = power_identity_residual(&g, &u, m)?;
                        let status = pass_fail(r.relative() <= IDENTITY_TOL);
                        tally.add(status, IDENTITY_TOL - r.relative());
                        rows.push(vec![case.to_string(), n.to_string(), fmt(m), fmt(r.relative()), status.to_string()]);
                    }
                } else {
                    let m = rng.random_range(1.1..4.0);
                    let psi = VertexField::from_fn(n, |_| rng.random_range(-3.0..3.0));
                    let delta = VertexField::from_fn(n, |_| -rng.random_range(0.1..3.0));
                    let r = check_t1(&g, &u, &psi, &delta, m, 0.0)?;
                    let worst = r.report.worst().map(|w| w.margin).unwrap_or(0.0);
                    let status = pass_fail(r.report.passed() && r.form_gap <= 1e-10);
                    tally.add(status, worst);
                    rows.push(vec![case.to_string(), n.to_string(), fmt(m), fmt(worst), status.to_string()]);
                }
            }
            let value = if kind == SweepKind::Identity { "relative_residual" } else { "worst_margin" };
            sink.csv(&format!("sweep_{}.csv", if kind == SweepKind::Identity { "identity" } else { "gradient" }), &["case", "n", "m", value, "status"], rows)?;
            sink.tallies.push(tally);
        }
        SweepKind::Harnack => sweep_harnack(sink, count, integ, rng)?,
        SweepKind::Phi => {
            let mut tally = Tally::new("phi-five-sixths");
            let mut rows = Vec::new();
            for case in 0..count {
                let n = rng.random_range(3..=12);
                let g = generate_graph(GraphSpec::Cycle(n), WeightMode::Unit, MeasureMode::Unit, rng)?;
                let t1 = rng.random_range(-1.0..1.0);
                let t2 = t1 + rng.random_range(0.1..3.0);
                let c0 = rng.random_range(0.1..5.0);
                let psi: Vec<Poly> = (0..n).map(|_| bounded_cubic(rng, c0, t1, t2)).collect();
                let y = rng.random_range(0..n);
                let path = shortest_paths(&g, 0, y, 1)?.paths.remove(0);
                let v = phi(&g, &path, &psi, t1, t2)?;
                let bound = 5.0 * c0 * (t2 - t1) / 6.0;
                let status = pass_fail(v <= bound + 1e-9);
                tally.add(status, bound - v);
                rows.push(vec![case.to_string(), n.to_string(), fmt(c0), fmt(t1), fmt(t2), fmt(v), fmt(bound), status.to_string()]);
            }
            sink.csv("sweep_phi.csv", &["case", "n", "C0", "T1", "T2", "phi", "bound", "status"], rows)?;
            sink.tallies.push(tally);
        }
        SweepKind::Lemma => verify_lemma(sink, count, 63, WeightAnchor::End, rng)?,
        SweepKind::Kernel => sweep_kernel(sink, count, rng)?,
    }
    Ok(())
}

/// Random cubic with `max |p| ≤ C0` on `[t1, t2]`.
pub fn bounded_cubic<R: Rng + ?Sized>(rng: &mut R, c0: f64, t1: f64, t2: f64) -> Poly {
    let p = Poly::new((0..4).map(|_| rng.random_range(-1.0..1.0)).collect());
    let peak = p.max_abs_on(t1, t2);
    let target = c0 * rng.random_range(0.0..=1.0);
    if peak == 0.0 {
        p
    } else {
        p.scale(target / peak)
    }
}

/// Spatially constant solution of `−u_t = −ψu^m` (δ ≡ −1), i.e.
/// `u(t) = (u0^{1−m} − (m−1)ψt)^{−1/(m−1)}`.
pub fn constant_solution(u0: f64, m: f64, psi: f64, t: f64) -> f64 {
    (u0.powf(1.0 - m) - (m - 1.0) * psi * t).powf(-1.0 / (m - 1.0))
}

fn sweep_harnack(sink: &mut Sink, count: usize, integ: &IntegratorConfig, rng: &mut ChaCha8Rng) -> Result<()> {
    let mut tally = Tally::new("harnack");
    let mut closed = Tally::new("closed-form-agreement");
    let mut rows = Vec::new();
    let per_problem = 10;
    let problems = count.div_ceil(per_problem);
    for case in 0..problems {
        let n = rng.random_range(3..=12);
        let spec = match rng.random_range(0..3) {
            0 => GraphSpec::Path(n),
            1 => GraphSpec::Cycle(n),
            _ => GraphSpec::Complete(n),
        };
        let g = generate_graph(spec, WeightMode::Unit, MeasureMode::Unit, rng)?;
        let m = rng.random_range(1.2..4.0);
        let psi = rng.random_range(0.05..2.0);
        let u0: f64 = rng.random_range(0.5..2.0);
        let blowup = u0.powf(1.0 - m) / ((m - 1.0) * psi);
        let t2 = 0.5 * blowup;
        let p = PmeProblem::uniform(g, m, -1.0, Poly::constant(psi), u0, 0.0, t2)?;
        let traj = integrate(&p, integ, &OutputGrid::Uniform(20))?;
        let err = traj
            .times
            .iter()
            .zip(&traj.states)
            .map(|(&t, u)| {
                let exact = constant_solution(u0, m, psi, t);
                u.iter().map(|v| (v - exact).abs() / exact).fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        closed.add(pass_fail(err <= 1e-6), 1e-6 - err);
        let verifier = HarnackVerifier::new(&p, &traj)?;
        for _ in 0..per_problem.min(count - case * per_problem) {
            let x = rng.random_range(0..n);
            let y = rng.random_range(0..n);
            let (a, b) = random_times(rng, 0.0, t2);
            let r = verifier.bound(x, y, a, b, 10_000)?;
            tally.add(r.status, r.margin());
            rows.push(vec![
                case.to_string(),
                spec.to_string(),
                p.graph.label(x).to_string(),
                p.graph.label(y).to_string(),
                fmt(a),
                fmt(b),
                fmt(r.lhs),
                fmt(r.rhs),
                fmt(r.margin()),
                r.status.to_string(),
            ]);
        }
    }
    sink.csv(
        "sweep_harnack.csv",
        &["case", "graph", "x", "y", "T1", "T2", "lhs", "rhs", "margin", "status"],
        rows,
    )?;
    sink.tallies.push(closed);
    sink.tallies.push(tally);
    Ok(())
}

fn sweep_kernel(sink: &mut Sink, count: usize, rng: &mut ChaCha8Rng) -> Result<()> {
    let mut tallies: Vec<Tally> = ["oracle-agreement", "mass", "symmetry", "degree-weighted-symmetry", "upper-bound", "lower-bound"]
        .iter()
        .map(|c| Tally::new(format!("kernel-{c}")))
        .collect();
    let mut rows = Vec::new();
    for case in 0..count {
        let n = rng.random_range(2..=30);
        let g = sweep_graph(rng, n, MeasureMode::Degree)?;
        let deg = g.degrees();
        let bounds = KernelBounds::new(&g);
        for t in [0.1, 1.0, 5.0] {
            let s = heat_kernel_series(&g, t, 1e-10)?;
            let o = heat_kernel_oracle(&g, t)?;
            let mut checks = vec![
                ("oracle-agreement", 1e-8 - s.max_abs_diff(&o)),
                ("mass", 1e-8 - mass_check(&s, &g).max_deviation),
                ("symmetry", 1e-10 - asymmetry(&s)),
                ("degree-weighted-symmetry", 1e-10 - weighted_asymmetry(&s, &deg)),
            ];
            for m in [1.5, 2.0, 4.0] {
                let (mut up, mut lo) = (f64::INFINITY, f64::INFINITY);
                for x in 0..n {
                    let u = bounds.upper(t, x, 0.0, m)?;
                    for y in 0..n {
                        up = up.min(u - s.get(x, y));
                        lo = lo.min(s.get(x, y) - bounds.lower(t, x, y, 0.0, m)?);
                    }
                }
                rows.push(kernel_row(case, n, t, Some(m), "upper-bound", up, up >= -1e-9));
                rows.push(kernel_row(case, n, t, Some(m), "lower-bound", lo, lo >= -1e-9));
                tallies[4].add(pass_fail(up >= -1e-9), up);
                tallies[5].add(pass_fail(lo >= -1e-9), lo);
            }
            for (i, (name, margin)) in checks.drain(..).enumerate() {
                tallies[i].add(pass_fail(margin >= 0.0), margin);
                rows.push(kernel_row(case, n, t, None, name, margin, margin >= 0.0));
            }
        }
    }
    rows.sort();
    sink.csv("sweep_kernel.csv", &["case", "n", "t", "m", "check", "margin", "status"], rows)?;
    sink.tallies.extend(tallies);
    Ok(())
}

fn kernel_row(case: usize, n: usize, t: f64, m: Option<f64>, check: &str, margin: f64, ok: bool) -> Vec<String> {
    vec![
        format!("{case:05}"),
        n.to_string(),
        fmt(t),
        m.map(fmt).unwrap_or_default(),
        check.to_string(),
        fmt(margin),
        pass_fail(ok).to_string(),
    ]
}

/// One-line description of a graph and its constants.
pub fn describe_graph(g: &WeightedGraph) -> String {
    let c = GraphConstants::of(g);
    format!(
        "{}: {} vertices, {} edges, D_omega = {}, D_theta = {}, omega_min = {}, theta_max = {}",
        g.name(),
        g.len(),
        g.edge_count(),
        c.d_omega,
        c.d_theta,
        c.omega_min,
        c.theta_max
    )
}
