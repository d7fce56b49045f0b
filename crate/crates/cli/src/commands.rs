//! Subcommand implementations. Each returns an [`Outcome`]; the caller wraps
//! it into a report and picks the exit code.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::{json, Value};
use spectral_intervals::analysis::{self, Check, PowerCondition, ORTHOGONALITY_TOL};
use spectral_intervals::boundary::UNITARY_TOL;
use spectral_intervals::evolution::{self, EigenTerm, RandomFunctionOptions};
use spectral_intervals::expoly::{self, Atom};
use spectral_intervals::paths::{self, Direction};
use spectral_intervals::spectrum::{self, MatrixVerdict, SpectrumReport};
use spectral_intervals::{Error, IntervalUnion, MatrixStructure, PiecewiseExpPoly, ScanOptions, C64};

use crate::report::{checks_csv, csv_table, Outcome, SpectrumRow};
use crate::{CliError, Command, Common, Condition, Problem};

pub const DEFAULT_TOL: f64 = 1e-8;
/// Sample pairs `(x, t)` for the path-sum identities in `verify`.
const IDENTITY_PAIRS: usize = 16;

/// Resolved numerical settings shared by all subcommands.
#[derive(Debug, Clone)]
pub struct Settings {
    pub window: (f64, f64),
    pub tol: f64,
    pub seed: u64,
    pub opts: ScanOptions,
}

impl Settings {
    pub fn resolve(common: &Common, problem: &Problem) -> Result<Self, CliError> {
        let window = match (&common.window, problem.file.window) {
            (Some(w), _) => {
                let (lo, hi) = (w[0], w[1]);
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return Err(CliError::Validation(format!("--window: [{lo}, {hi}] is not a finite interval")));
                }
                (lo, hi)
            }
            (None, Some([lo, hi])) => (lo, hi),
            (None, None) => analysis::default_window(&problem.omega),
        };
        let tol = common.tol.unwrap_or(DEFAULT_TOL);
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(CliError::Validation(format!("--tol: must be positive, got {tol}")));
        }
        let grid_step = common.grid_step.or(problem.file.grid_step);
        if let Some(step) = grid_step {
            if !(step > 0.0 && step.is_finite()) {
                return Err(CliError::Validation(format!("--grid-step: must be positive, got {step}")));
            }
        }
        let mut opts = ScanOptions { grid_step, exec: common.execution(), ..ScanOptions::default() };
        if let Some(t) = &problem.file.tolerances {
            opts.tol_root = t.root.unwrap_or(opts.tol_root);
            opts.tol_eig = t.eig.unwrap_or(opts.tol_eig);
            opts.tol_constant = t.constant.unwrap_or(opts.tol_constant);
        }
        Ok(Settings { window, tol, seed: common.seed, opts })
    }

    fn structure_tol(&self, problem: &Problem) -> f64 {
        problem.file.tolerances.as_ref().and_then(|t| t.structure).unwrap_or(self.tol).max(UNITARY_TOL)
    }
}

pub fn execute(cmd: &Command, common: &Common, problem: &Problem) -> Result<Outcome, CliError> {
    let s = Settings::resolve(common, problem)?;
    match cmd {
        Command::Spectrum { .. } => spectrum_cmd(problem, &s),
        Command::Evolve { t, function, samples, .. } => evolve_cmd(problem, &s, *t, function, *samples),
        Command::Verify { trials, .. } => verify_cmd(problem, &s, *trials),
        Command::Classify { t0, condition, .. } => classify_cmd(problem, &s, *t0, *condition),
        Command::Paths { x, t, .. } => paths_cmd(problem, &s, *x, *t),
        Command::Congruence { modulus, .. } => congruence_cmd(problem, &s, *modulus),
    }
}

fn matrix_check(verdict: &MatrixVerdict) -> Check {
    match verdict {
        MatrixVerdict::SpectralExact => {
            Check::new("spectral_matrix", true, "equal lengths: every eigenspace is spanned by (1, ..., 1)")
        }
        MatrixVerdict::SpectralOnWindow { window, points } => Check::new(
            "spectral_matrix",
            true,
            format!("all {points} eigenspaces in [{}, {}] are spanned by (1, ..., 1)", window.0, window.1),
        ),
        MatrixVerdict::NotSpectral { witness, dimension, .. } => Check::new(
            "spectral_matrix",
            false,
            format!("eigenspace at lambda = {witness} has dimension {dimension} and is not spanned by (1, ..., 1)"),
        )
        .with("witness", *witness)
        .with("dimension", *dimension as f64),
        MatrixVerdict::Undecided { reason } => Check::skipped("spectral_matrix", reason.clone()),
    }
}

fn verdict_label(v: &MatrixVerdict) -> &'static str {
    match v {
        MatrixVerdict::SpectralExact | MatrixVerdict::SpectralOnWindow { .. } => "spectral",
        MatrixVerdict::NotSpectral { .. } => "not_spectral",
        MatrixVerdict::Undecided { .. } => "undecided",
    }
}

/// Shortest round-trip decimal, with an exponent for very small or large values.
fn num(x: f64) -> String {
    format!("{x:?}")
}

fn rows(report: &SpectrumReport) -> Vec<SpectrumRow> {
    report.points.iter().map(SpectrumRow::from).collect()
}

fn spectrum_cmd(p: &Problem, s: &Settings) -> Result<Outcome, CliError> {
    let report = spectrum::spectrum(&p.omega, &p.b, s.window, &s.opts)?;
    let verdict = spectrum::spectral_matrix_check(&p.omega, &p.b, s.window, &s.opts)?;
    let evidence = analysis::spectral_pair_evidence(&p.omega, s.window, &report.lambdas(), &[], ORTHOGONALITY_TOL)?;
    let mut verdicts = vec![matrix_check(&verdict)];
    verdicts.extend(evidence.structural_flags.iter().cloned());
    let table: Vec<Vec<String>> = report
        .points
        .iter()
        .map(|q| {
            vec![
                num(q.lambda),
                q.dimension.to_string(),
                q.constant.to_string(),
                num(q.det_residual),
                num(q.eig_residual),
            ]
        })
        .collect();
    let result = json!({
        "window": [s.window.0, s.window.1],
        "method": report.method,
        "grid_step": report.grid_step,
        "phase_speed_bound": report.phase_speed_bound,
        "count": report.len(),
        "matrix_verdict": verdict_label(&verdict),
        "density_ratio": evidence.density_ratio,
        "max_off_diagonal": evidence.max_off_diagonal,
        "parseval_residual": evidence.parseval_residual,
    });
    Ok(Outcome {
        verdicts,
        spectrum: rows(&report),
        result,
        csv: Some(csv_table(&["lambda", "dimension", "constant", "det_residual", "eig_residual"], &table)),
    })
}

/// One interval's atoms in an `@file` function: `{"freq": f, "poly": [[re, im], ...]}`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AtomSpec {
    freq: f64,
    poly: Vec<[f64; 2]>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FunctionFile {
    intervals: Vec<Vec<AtomSpec>>,
}

/// The test function and, for eigenfunctions, the term used by the spectral oracle.
struct TestFunction {
    f: PiecewiseExpPoly,
    eigen: Option<EigenTerm>,
}

fn parse_function(p: &Problem, s: &Settings, spec: &str) -> Result<TestFunction, CliError> {
    let bad = |msg: String| CliError::Validation(format!("--function {spec}: {msg}"));
    let plain = |f| Ok(TestFunction { f, eigen: None });
    if spec == "bump" {
        return plain(analysis::bump(&p.omega));
    }
    if spec == "random" {
        let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
        return plain(evolution::random_domain_function(&p.omega, &p.b, &mut rng, &RandomFunctionOptions::default())?);
    }
    if let Some(k) = spec.strip_prefix("eigenfunction:") {
        let k: usize = k.parse().map_err(|_| bad("index must be a non-negative integer".into()))?;
        let report = spectrum::spectrum(&p.omega, &p.b, s.window, &s.opts)?;
        let term = EigenTerm::from_report(&report, k, 0, C64::new(1.0, 0.0))
            .ok_or_else(|| bad(format!("the window holds only {} eigenvalues", report.len())))?;
        let f = evolution::eigen_combination(&p.omega, &p.b, std::slice::from_ref(&term))?;
        return Ok(TestFunction { f, eigen: Some(term) });
    }
    if let Some(lam) = spec.strip_prefix("exp:") {
        let lam: f64 = lam.parse().map_err(|_| bad("frequency must be a number".into()))?;
        return plain(PiecewiseExpPoly::exponential(&p.omega, lam));
    }
    if let Some(path) = spec.strip_prefix('@') {
        let text = std::fs::read_to_string(path).map_err(|e| bad(e.to_string()))?;
        let file: FunctionFile = serde_json::from_str(&text).map_err(|e| bad(format!("line {} column {}: {e}", e.line(), e.column())))?;
        let atoms = file
            .intervals
            .into_iter()
            .map(|list| list.into_iter().map(|a| Atom::new(a.freq, a.poly.iter().map(|z| C64::new(z[0], z[1])).collect())).collect())
            .collect();
        return plain(PiecewiseExpPoly::new(&p.omega, atoms).map_err(|e| bad(e.to_string()))?);
    }
    Err(bad("expected bump, random, eigenfunction:K, exp:LAMBDA or @FILE".into()))
}

fn evolve_cmd(p: &Problem, s: &Settings, t: f64, spec: &str, samples: usize) -> Result<Outcome, CliError> {
    if samples == 0 {
        return Err(CliError::Validation("--samples must be at least 1".into()));
    }
    let TestFunction { f, eigen } = parse_function(p, s, spec)?;
    let norm_f = expoly::norm(&f);
    let defect = evolution::boundary_defect(&p.b, &f);
    if defect > s.tol * norm_f.max(1.0) {
        return Err(CliError::Validation(format!(
            "--function {spec}: not in the domain, |B f(alpha) - f(beta)| = {defect:.3e}"
        )));
    }
    let evolved = evolution::apply_u_paths(&p.omega, &p.b, t, &f)?;
    let g = &evolved.function;
    let norm_g = expoly::norm(g);
    let scale = norm_f.max(1.0);
    let mut verdicts = vec![
        Check::new("unitarity", (norm_g - norm_f).abs() < s.tol * scale, format!("||f|| = {norm_f:.12}, ||U(t) f|| = {norm_g:.12}"))
            .with("norm_error", (norm_g - norm_f).abs()),
    ];
    let out_defect = evolution::boundary_defect(&p.b, g);
    verdicts.push(
        Check::new("domain", out_defect < s.tol * scale, format!("|B g(alpha) - g(beta)| = {out_defect:.3e}")).with("defect", out_defect),
    );
    let oracle = match &eigen {
        Some(term) => {
            let want = evolution::apply_u_spectral(&p.omega, &p.b, std::slice::from_ref(term), t)?;
            let err = expoly::max_difference(&p.omega, g, &want);
            Check::new("spectral_oracle", err < s.tol * scale, format!("max |U(t) f - e^(2 pi i lambda t) f| = {err:.3e}"))
                .with("lambda", term.lambda)
                .with("max_error", err)
        }
        None => {
            let back = evolution::apply_u_paths(&p.omega, &p.b, -t, g)?.function;
            let err = expoly::max_difference(&p.omega, &back, &f);
            Check::new("inverse", err < s.tol * scale, format!("max |U(-t) U(t) f - f| = {err:.3e}")).with("max_error", err)
        }
    };
    verdicts.push(oracle);

    let mut table = Vec::new();
    let mut points = Vec::new();
    for i in 0..p.omega.len() {
        let (a, l) = (p.omega.alpha(i), p.omega.length(i));
        for k in 0..samples {
            let x = a + (k as f64 + 0.5) / samples as f64 * l;
            let v = g.eval_in(i, x);
            table.push(vec![num(x), num(v.re), num(v.im)]);
            points.push(json!([x, v.re, v.im]));
        }
    }
    let result = json!({
        "t": t,
        "function": spec,
        "norm_before": norm_f,
        "norm_after": norm_g,
        "total_paths": evolved.total_paths,
        "pieces": evolved.pieces,
        "refinement": evolved.refinement,
        "samples": points,
    });
    Ok(Outcome { verdicts, spectrum: Vec::new(), result, csv: Some(csv_table(&["x", "re", "im"], &table)) })
}

fn identity_check(p: &Problem, s: &Settings) -> Result<(Check, Value), CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut worst: Option<paths::LocalTranslationReport> = None;
    let mut failures = 0;
    for _ in 0..IDENTITY_PAIRS {
        let x = evolution::sample_point(&p.omega, &mut rng);
        let y = evolution::sample_point(&p.omega, &mut rng);
        let r = paths::local_translation_identities(&p.omega, &p.b, x, y - x, s.tol)?;
        if !r.pass {
            failures += 1;
        }
        let replace = match &worst {
            None => true,
            Some(w) => (w.pass && !r.pass) || (w.pass == r.pass && r.max_error > w.max_error),
        };
        if replace {
            worst = Some(r);
        }
    }
    let w = worst.expect("at least one pair");
    let check = Check::new(
        "path_sum_identities",
        failures == 0,
        format!("{failures} of {IDENTITY_PAIRS} pairs (x, t) break the path-sum identities; worst error {:.3e}", w.max_error),
    )
    .with("x", w.x)
    .with("t", w.t)
    .with("max_error", w.max_error);
    Ok((check, serde_json::to_value(&w).expect("plain data")))
}

fn verify_cmd(p: &Problem, s: &Settings, trials: usize) -> Result<Outcome, CliError> {
    let (omega, b) = (&p.omega, &p.b);
    let gap = analysis::gap_criterion(omega, s.tol)?;
    if gap.failed() {
        return Ok(Outcome {
            verdicts: vec![gap],
            result: json!({ "verdict": "not_spectral", "reason": "gap criterion fails, so no boundary matrix is spectral" }),
            ..Outcome::default()
        });
    }
    let verdict = spectrum::spectral_matrix_check(omega, b, s.window, &s.opts)?;
    let report = spectrum::spectrum(omega, b, s.window, &s.opts)?;
    let mut verdicts = vec![gap, matrix_check(&verdict)];

    let (identities, worst_pair) = identity_check(p, s)?;
    verdicts.push(identities);

    let lt = evolution::local_translation_test(omega, b, trials, s.tol, s.seed, s.opts.exec)?;
    let mut check = Check::new(
        "local_translation",
        lt.pass,
        format!("{} of {} random trials of [U(t) f](x) = f(x + t) failed; max error {:.3e}", lt.failures, lt.trials, lt.max_error),
    )
    .with("max_error", lt.max_error);
    if let Some(w) = &lt.witness {
        check = check.with("x", w.x).with("t", w.t).with("error", w.error);
    }
    verdicts.push(check);

    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let f = evolution::random_domain_function(omega, b, &mut rng, &RandomFunctionOptions::default())?;
    let (t1, t2) = (0.37 * omega.measure(), -0.23 * omega.measure());
    let u1 = evolution::apply_u_paths(omega, b, t1, &f)?.function;
    let (nf, n1) = (expoly::norm(&f), expoly::norm(&u1));
    let scale = nf.max(1.0);
    verdicts.push(
        Check::new("unitarity", (n1 - nf).abs() < s.tol * scale, format!("||f|| = {nf:.12}, ||U({t1:.6}) f|| = {n1:.12}"))
            .with("norm_error", (n1 - nf).abs()),
    );
    let u21 = evolution::apply_u_paths(omega, b, t2, &u1)?.function;
    let u12 = evolution::apply_u_paths(omega, b, t1 + t2, &f)?.function;
    let group = expoly::max_difference(omega, &u21, &u12);
    verdicts.push(
        Check::new("group_law", group < s.tol * scale, format!("max |U({t2:.6}) U({t1:.6}) f - U({:.6}) f| = {group:.3e}", t1 + t2))
            .with("max_error", group),
    );

    let suite = analysis::structure_suite(omega, b, &report, &verdict, s.structure_tol(p))?;
    verdicts.extend(suite.into_iter().filter(|c| c.name != "gap_criterion"));

    let mut candidate = Value::Null;
    if let Some(lams) = &p.file.spectrum {
        let ev = analysis::spectral_pair_evidence(omega, s.window, lams, &[], ORTHOGONALITY_TOL)?;
        let computed = report.lambdas();
        let inside: Vec<f64> = lams.iter().copied().filter(|&l| l >= s.window.0 && l <= s.window.1).collect();
        let unmatched = inside.iter().filter(|&&l| !computed.iter().any(|&c| (c - l).abs() <= 1e-6)).count();
        let matches = unmatched == 0 && inside.len() == computed.len();
        verdicts.extend(ev.structural_flags.iter().cloned());
        verdicts.push(Check::new(
            "candidate_spectrum",
            matches,
            format!("{} candidate points in the window, {} computed, {unmatched} unmatched", inside.len(), computed.len()),
        ));
        candidate = json!({ "points": ev.points, "density_ratio": ev.density_ratio, "max_off_diagonal": ev.max_off_diagonal });
    }

    let overall = if verdicts.iter().any(Check::failed) { "not_spectral" } else { verdict_label(&verdict) };
    let result = json!({
        "verdict": overall,
        "matrix_verdict": verdict_label(&verdict),
        "witness": verdict.witness(),
        "local_translation": lt,
        "worst_identity_pair": worst_pair,
        "candidate_spectrum": candidate,
    });
    let csv = checks_csv(&verdicts);
    Ok(Outcome { verdicts, spectrum: rows(&report), result, csv: Some(csv) })
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

/// Runs a suite that may reject a non-spectral pair; the rejection becomes a skipped check.
fn suite_or_skip<T>(name: &'static str, r: spectral_intervals::Result<T>) -> Result<Result<T, Check>, CliError> {
    match r {
        Ok(v) => Ok(Ok(v)),
        Err(e @ Error::NotSpectral { .. }) => Ok(Err(Check::skipped(name, e.to_string()))),
        Err(e) => Err(e.into()),
    }
}

fn classify_cmd(p: &Problem, s: &Settings, t0: Option<f64>, condition: Condition) -> Result<Outcome, CliError> {
    let (omega, b) = (&p.omega, &p.b);
    let tol = s.structure_tol(p);
    let structure = b.classify_structure(tol);
    let summary = format!(
        "T_B = R: {}; F_B = R: {}",
        yes(structure.multiplicative_for_all_t),
        yes(structure.forelli_for_all_t)
    );
    let mut verdicts = Vec::new();
    let mut suite = Value::Null;
    match &structure.structure {
        MatrixStructure::Permutation { .. } => {
            match suite_or_skip("multiplicative_suite", analysis::multiplicative_spectral_suite(omega, b, s.window, &s.opts, tol))? {
                Ok(r) => {
                    verdicts.push(Check::new("full_cycle", r.full_cycle, format!("sigma = {:?}", r.sigma)));
                    verdicts.push(lattice_check(&r.spectrum));
                    verdicts.push(Check::new("tiling", r.tiling.tiles, format!("Omega + {} Z", r.tiling.period)));
                    verdicts.push(chain_check(&r.chain));
                    suite = serde_json::to_value(&r).expect("plain data");
                }
                Err(skip) => verdicts.push(skip),
            }
        }
        MatrixStructure::WeightedPermutation { .. } => {
            match suite_or_skip("forelli_suite", analysis::forelli_spectral_suite(omega, b, s.window, &s.opts, tol))? {
                Ok(r) => {
                    verdicts.push(
                        Check::new("weights", r.max_weight_error < tol, format!("theta0 = {}; worst weight error {:.3e}", r.theta0, r.max_weight_error))
                            .with("theta0", r.theta0)
                            .with("max_weight_error", r.max_weight_error),
                    );
                    verdicts.push(Check::new("jumps_in_lattice", r.jumps_in_lattice, format!("jumps {:?}", r.jumps)));
                    verdicts.push(lattice_check(&r.spectrum));
                    verdicts.push(Check::new("tiling", r.tiling.tiles, format!("Omega + {} Z", r.tiling.period)));
                    verdicts.push(chain_check(&r.chain));
                    suite = serde_json::to_value(&r).expect("plain data");
                }
                Err(skip) => verdicts.push(skip),
            }
        }
        MatrixStructure::General => {}
    }
    let mut power = Value::Null;
    if let Some(t0) = t0 {
        let cond = match condition {
            Condition::Multiplicative => PowerCondition::Multiplicative,
            Condition::Forelli => PowerCondition::Forelli,
        };
        let r = analysis::equal_length_power_suite(omega, b, t0, cond, tol)?;
        verdicts.push(Check::new("power_condition", r.necessary_condition_holds, r.conclusion.clone()).with("p", r.p as f64));
        verdicts.push(
            Check::new(
                "power_aggregate",
                r.aggregate_max_difference < s.tol,
                format!("path coefficients against rows of B^{}: {:.3e}", r.p, r.aggregate_max_difference),
            )
            .with("max_difference", r.aggregate_max_difference),
        );
        power = serde_json::to_value(&r).expect("plain data");
    }
    let result = json!({
        "summary": summary,
        "structure": structure,
        "suite": suite,
        "power": power,
    });
    let csv = checks_csv(&verdicts);
    Ok(Outcome { verdicts, spectrum: Vec::new(), result, csv: Some(csv) })
}

fn lattice_check(m: &analysis::LatticeMatch) -> Check {
    Check::new(
        "spectrum_lattice",
        m.matches,
        format!("{} computed points against {} points of {} (Z {} {})", m.found, m.expected, m.period, if m.offset < 0.0 { '-' } else { '+' }, m.offset.abs()),
    )
    .with("max_error", m.max_error)
}

fn chain_check(c: &analysis::CongruenceChain) -> Check {
    Check::new(
        "congruence_chain",
        c.holds(),
        format!("chain reaches ({}, {}) with shifts in L Z: {}", c.final_interval.0, c.final_interval.1, c.shifts_in_lattice),
    )
}

fn paths_cmd(p: &Problem, s: &Settings, x: f64, t: f64) -> Result<Outcome, CliError> {
    let all = paths::enumerate_paths(&p.omega, &p.b, x, t)?;
    let sums = paths::path_sum_by_end(&p.omega, &all);
    let total: f64 = all.iter().map(|q| q.weight.norm_sqr()).sum();
    let mut verdicts = vec![Check::new("probability", (total - 1.0).abs() < s.tol, format!("sum of |weight|^2 over {} paths = {total:.15}", all.len()))
        .with("total", total)];
    let target = x + t;
    let identities = if p.omega.locate(target).is_some() {
        let r = paths::local_translation_identities(&p.omega, &p.b, x, t, s.tol)?;
        verdicts.push(
            Check::new("identities", r.pass, format!("weights at x + t sum to {}; worst error {:.3e}", r.target_sum, r.max_error))
                .with("max_error", r.max_error),
        );
        serde_json::to_value(&r).expect("plain data")
    } else {
        verdicts.push(Check::skipped("identities", format!("x + t = {target} is not in Omega")));
        Value::Null
    };
    let table: Vec<Vec<String>> = all
        .iter()
        .map(|q| {
            let word: Vec<String> = q.word.iter().map(|i| (i + 1).to_string()).collect();
            let dir = match q.direction {
                Direction::Forward => "forward",
                Direction::Backward => "backward",
            };
            vec![word.join(" "), dir.into(), num(q.remainder), num(q.end), num(q.weight.re), num(q.weight.im)]
        })
        .collect();
    let result = json!({
        "x": x,
        "t": t,
        "count": all.len(),
        "estimate": paths::path_count_estimate(&p.omega, t),
        "paths": all,
        "sums_by_end": sums,
        "identities": identities,
    });
    Ok(Outcome {
        verdicts,
        spectrum: Vec::new(),
        result,
        csv: Some(csv_table(&["word", "direction", "remainder", "end", "re", "im"], &table)),
    })
}

fn congruence_cmd(p: &Problem, s: &Settings, modulus: Option<f64>) -> Result<Outcome, CliError> {
    let omega: &IntervalUnion = &p.omega;
    let a = modulus.unwrap_or_else(|| omega.measure());
    if !(a > 0.0 && a.is_finite()) {
        return Err(CliError::Validation(format!("--modulus: must be positive, got {a}")));
    }
    let tol = s.tol.max(omega.tol());
    let tiling = omega.tiles_by_lattice(a, tol)?;
    let congruence = omega.translation_congruence_to_interval(a, tol)?;
    let disjoint = omega.translates_disjoint(a)?;
    let mut verdicts = vec![
        Check::new("tiling", tiling.tiles, format!("{} overlaps and {} holes modulo {a}", tiling.overlaps.len(), tiling.holes.len())),
        Check::new("translation_congruence", congruence.is_some(), format!("whole-interval shifts in {a} Z onto an interval of length {}", omega.measure())),
        Check::new("disjoint_translates", disjoint, if disjoint { format!("translates Omega + {a} k are pairwise disjoint") } else { format!("some translates Omega + {a} k overlap") }),
    ];
    let mut gaps = Vec::new();
    for i in 0..omega.len().saturating_sub(1) {
        let gap = omega.alpha(i + 1) - omega.beta(i);
        if gap <= tol {
            continue;
        }
        let parts = omega.gap_decomposition(gap, tol)?;
        gaps.push(json!({ "after_interval": i + 1, "gap": gap, "decompositions": parts }));
    }
    verdicts.push(analysis::gap_criterion(omega, tol)?);
    let result = json!({
        "modulus": a,
        "tiling": tiling,
        "congruence": congruence.as_ref().map(|c| json!({ "map": c, "images": c.images(omega) })),
        "gap_decompositions": gaps,
    });
    let csv = checks_csv(&verdicts);
    Ok(Outcome { verdicts, spectrum: Vec::new(), result, csv: Some(csv) })
}
