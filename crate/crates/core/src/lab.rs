//! Experiment driver: Zygmund sandwich, three-lines interpolation, bound
//! sweeps, the double smoothing pipeline and Sobolev-embedding diagnostics.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use rand_xoshiro::SplitMix64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{
    BoundSweepConfig, Config, EmbeddingConfig, EnsembleSpec, PipelineConfig, SandwichConfig, ThreeLinesConfig,
    SCHEMA_VERSION,
};
use crate::decomp::{kernel_l1_norm, lp_shell_value, lp_top_shell, make_parabolic_localizer, Bump, LpFamily, QuadratureSpec};
use crate::error::{invalid, Result};
use crate::exponents;
use crate::grid::{forward_dft, inverse_dft_owned, lattice_norm, Grid, GridFunction, Spectrum, MAX_DIM};
use crate::pseudo::{operator_norm, LinearOperator, OperatorHandle};
use crate::spaces::{lp_norm, shell_sup_norms, sobolev_norm, zygmund_from_shells, FioSpace};
use crate::symbols::{
    interp_family, make_test_symbol, max_abs_diff_of_sum, smooth_split, support_window_check, RoughSymbol,
    TestSymbolSpec, WindowReport,
};

fn mix(seed: u64, a: u64, b: u64) -> u64 {
    let mut x = seed ^ a.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ b.wrapping_mul(0xD1B5_4A32_D192_ED03);
    x ^= x >> 31;
    x
}

fn normal_pair(rng: &mut SplitMix64) -> Complex64 {
    Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
}

// ---------------------------------------------------------------------------
// Ensembles

/// Band-limited random fields, deterministic in `(seed, spec)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Ensemble {
    pub seed: u64,
    pub spec: EnsembleSpec,
    pub members: Vec<GridFunction>,
}

impl Ensemble {
    /// Members are drawn coefficient by coefficient over the cube
    /// `|k|_∞ ≤ k_max` in a fixed order, so they do not depend on `N`.
    pub fn generate(grid: &Grid, spec: &EnsembleSpec, seed: u64) -> Result<Self> {
        spec.validate()?;
        if 4 * spec.k_max >= grid.size() {
            return Err(invalid(format!(
                "ensemble k_max = {} must stay below N/4 = {}",
                spec.k_max,
                grid.size() / 4
            )));
        }
        let members = (0..spec.count)
            .into_par_iter()
            .map(|i| band_limited_field(grid, spec, mix(seed, i as u64, 1)))
            .collect();
        Ok(Self {
            seed,
            spec: *spec,
            members,
        })
    }
}

fn band_limited_field(grid: &Grid, spec: &EnsembleSpec, seed: u64) -> GridFunction {
    let mut rng = SplitMix64::seed_from_u64(seed);
    let km = spec.k_max as i64;
    let mut coeffs = vec![Complex64::new(0.0, 0.0); grid.len()];
    let dim = grid.dim();
    let mut k: [i64; MAX_DIM] = [0; MAX_DIM];
    let total = (2 * km + 1).pow(dim as u32);
    for idx in 0..total {
        let mut rest = idx;
        for d in 0..dim {
            k[d] = (rest % (2 * km + 1)) - km;
            rest /= 2 * km + 1;
        }
        let c = normal_pair(&mut rng);
        let w = (1.0 + lattice_norm(&k).powi(2)).powf(-0.5 * spec.decay);
        coeffs[grid.index_of(&k)] = c * w;
    }
    let f = inverse_dft_owned(Spectrum::new(grid, coeffs).expect("same grid"));
    if spec.real {
        GridFunction::new(grid, f.values().iter().map(|v| Complex64::new(v.re, 0.0)).collect()).expect("same grid")
    } else {
        f
    }
}

// ---------------------------------------------------------------------------
// Reports

/// One line of an experiment report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub id: String,
    pub values: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pass: Option<bool>,
}

impl ReportRow {
    fn new(id: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            values: BTreeMap::new(),
            pass: None,
        }
    }

    fn with(mut self, key: &str, v: f64) -> Self {
        self.values.insert(key.into(), v);
        self
    }

    fn judged(mut self, pass: bool) -> Self {
        self.pass = Some(pass);
        self
    }
}

/// A named pass/fail verdict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub package: String,
    pub version: String,
    pub schema_version: u32,
}

impl Default for Environment {
    fn default() -> Self {
        Self {
            package: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            schema_version: SCHEMA_VERSION,
        }
    }
}

/// Outcome of one experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub parameters: serde_json::Value,
    pub rows: Vec<ReportRow>,
    pub summary: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
    pub passed: bool,
    /// Wall time, recorded only on request since it breaks reproducibility.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub runtime_seconds: Option<f64>,
    pub environment: Environment,
}

impl ExperimentReport {
    fn new(experiment: &str, parameters: serde_json::Value) -> Self {
        Self {
            experiment: experiment.into(),
            parameters,
            rows: Vec::new(),
            summary: BTreeMap::new(),
            checks: Vec::new(),
            passed: true,
            runtime_seconds: None,
            environment: Environment::default(),
        }
    }

    fn check(&mut self, name: &str, passed: bool, detail: String) {
        self.passed &= passed;
        self.checks.push(Check {
            name: name.into(),
            passed,
            detail,
        });
    }

    pub fn check_named(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Rows followed by a summary record, one JSON object per line.
    pub fn to_json_lines(&self) -> Result<String> {
        let mut out = String::new();
        for row in &self.rows {
            let mut obj = serde_json::to_value(row)?;
            obj["experiment"] = serde_json::Value::String(self.experiment.clone());
            out.push_str(&serde_json::to_string(&obj)?);
            out.push('\n');
        }
        let mut head = serde_json::to_value(self)?;
        if let Some(m) = head.as_object_mut() {
            m.remove("rows");
            m.insert("record".into(), "summary".into());
        }
        out.push_str(&serde_json::to_string(&head)?);
        out.push('\n');
        Ok(out)
    }

    /// Plot-ready table of the rows: `id`, `pass` and the union of value keys.
    pub fn to_csv(&self) -> String {
        let mut keys: Vec<&String> = self.rows.iter().flat_map(|r| r.values.keys()).collect();
        keys.sort();
        keys.dedup();
        let mut out = String::from("id,pass");
        for k in &keys {
            out.push(',');
            out.push_str(k);
        }
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.id.replace(',', ";"));
            out.push(',');
            out.push_str(match r.pass {
                Some(true) => "true",
                Some(false) => "false",
                None => "",
            });
            for k in &keys {
                out.push(',');
                if let Some(v) = r.values.get(*k) {
                    out.push_str(&format!("{v:e}"));
                }
            }
            out.push('\n');
        }
        out
    }
}

fn params<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).unwrap_or(serde_json::Value::Null)
}

// ---------------------------------------------------------------------------
// Zygmund sandwich

/// Random field with spectrum `c_k ψ_j(k)²`.
fn shell_pure_field(grid: &Grid, lp: &LpFamily, j: usize, seed: u64) -> Spectrum {
    let mut rng = SplitMix64::seed_from_u64(seed);
    let table = lp.shell(j);
    let coeffs = table
        .iter()
        .map(|&w| {
            if w == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                normal_pair(&mut rng) * (w * w)
            }
        })
        .collect();
    Spectrum::new(grid, coeffs).expect("same grid")
}

/// Lower constant `1/3·2^{(j−1)ρ}` and measured upper constant of the
/// sandwich `‖u‖_∞ ~ 2^{jρ}`-weighted `C^ρ_*` norm of shell-pure `u`.
pub fn zygmund_sandwich_suite(dim: usize, cfg: &SandwichConfig, seed: u64) -> Result<ExperimentReport> {
    let grid = &Grid::new(dim, cfg.size)?;
    let lp = LpFamily::new(grid);
    let top = lp.top();
    for &j in &cfg.shells {
        if j == 0 || j > top {
            return Err(invalid(format!("shell {j} is not a genuine shell on N = {} (1..={top})", grid.size())));
        }
    }
    let mut report = ExperimentReport::new(
        "sandwich",
        serde_json::json!({"n": grid.dim(), "N": grid.size(), "seed": seed, "config": params(cfg)}),
    );
    // (j, sample) -> (sup, shell sups)
    let samples: Vec<(usize, f64, Vec<f64>)> = cfg
        .shells
        .iter()
        .flat_map(|&j| (0..cfg.samples).map(move |i| (j, i)))
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(j, i)| {
            let spec = shell_pure_field(grid, &lp, j, mix(seed, j as u64, i as u64));
            let u = crate::grid::inverse_dft(&spec);
            let sups = shell_sup_norms(&spec, &lp).expect("same grid");
            (j, u.sup_norm(), sups)
        })
        .collect();
    let mut m_upper: f64 = 0.0;
    let mut all_lower = true;
    for &j in &cfg.shells {
        for &rho in &cfg.rhos {
            let mut min_slack = f64::INFINITY;
            let mut max_upper: f64 = 0.0;
            for (_, sup, sups) in samples.iter().filter(|s| s.0 == j) {
                if *sup == 0.0 {
                    continue;
                }
                let z = zygmund_from_shells(sups, rho).value;
                let lower = (((j as f64) - 1.0) * rho).exp2() * sup / 3.0;
                min_slack = min_slack.min(z / lower);
                max_upper = max_upper.max(z / ((((j + 1) as f64) * rho).exp2() * sup));
            }
            let pass = min_slack >= 1.0 - 1e-12;
            all_lower &= pass;
            m_upper = m_upper.max(max_upper);
            report.rows.push(
                ReportRow::new(format!("j={j},rho={rho}"))
                    .with("j", j as f64)
                    .with("rho", rho)
                    .with("lower_slack_min", min_slack)
                    .with("upper_constant_max", max_upper)
                    .judged(pass),
            );
        }
    }
    let zero = GridFunction::zeros(grid);
    let zero_sups = shell_sup_norms(&forward_dft(&zero), &lp)?;
    let zero_ok = zygmund_from_shells(&zero_sups, 1.0).value == 0.0;
    report.rows.push(ReportRow::new("zero").with("zygmund", 0.0).judged(zero_ok));

    let kernel_bound = 3.0
        * (0..lp.len())
            .map(|i| kernel_l1_norm(&lp.multiplier(i)))
            .fold(0.0, f64::max);
    report.summary.insert("upper_constant".into(), m_upper);
    report.summary.insert("kernel_bound".into(), kernel_bound);
    report.check(
        "lower_bound",
        all_lower && zero_ok,
        "1/3·2^((j-1)ρ)·‖u‖∞ ≤ ‖u‖_{C^ρ_*} on every sample".into(),
    );
    report.check(
        "upper_within_kernel_bound",
        m_upper <= kernel_bound,
        format!("M = {m_upper:.6} vs 3·sup‖ψ_i kernel‖₁ = {kernel_bound:.6}"),
    );
    if let Some(pinned) = cfg.pinned_upper {
        let rel = (m_upper - pinned).abs() / pinned;
        report.check(
            "upper_matches_pinned",
            rel <= cfg.upper_tolerance,
            format!("M = {m_upper:.6}, pinned {pinned:.6}, relative deviation {rel:.3e}"),
        );
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// Ratio ascent

/// Outcome of a maximization of `‖Tf‖_{out} / ‖f‖_{in}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AscentResult {
    pub value: f64,
    pub converged: bool,
    pub restarts: usize,
}

const SCREEN_ITERATIONS: usize = 8;
const POLISHED: usize = 4;
const POLISH_ITERATIONS: usize = 200;
/// The ascent has converged when the ratio gained at most `STALL_TOL`
/// (relative) over the last `STALL_WINDOW` steps.
const STALL_WINDOW: usize = 25;
const STALL_TOL: f64 = 1e-3;
const GRADIENT_TOL: f64 = 1e-6;
const LBFGS_MEMORY: usize = 8;

struct RatioProblem<'a> {
    op: &'a dyn LinearOperator,
    space: &'a FioSpace,
    s_in: f64,
    s_out: f64,
    p: f64,
}

fn drop_nyquist(f: &GridFunction) -> GridFunction {
    let grid = f.grid();
    let half = grid.size() as i64 / 2;
    let mut spec = forward_dft(f);
    for (i, c) in spec.coeffs_mut().iter_mut().enumerate() {
        if grid.lattice(i)[..grid.dim()].iter().any(|&k| k == -half) {
            *c = Complex64::new(0.0, 0.0);
        }
    }
    inverse_dft_owned(spec)
}

fn normalized(f: GridFunction) -> GridFunction {
    let n = f.inner(&f).expect("same grid").re.sqrt();
    if n > 0.0 {
        f.scale(Complex64::new(1.0 / n, 0.0))
    } else {
        f
    }
}

impl RatioProblem<'_> {
    fn ratio(&self, f: &GridFunction) -> Result<f64> {
        let den = self.space.norm(f, self.s_in, self.p)?;
        if den == 0.0 {
            return Ok(0.0);
        }
        Ok(self.space.norm(&self.op.apply(f)?, self.s_out, self.p)? / den)
    }

    fn ratio_and_gradient(&self, f: &GridFunction) -> Result<(f64, GridFunction)> {
        let (den, g_in) = self.space.norm_and_gradient(f, self.s_in, self.p)?;
        let tf = self.op.apply(f)?;
        let (num, g_out) = self.space.norm_and_gradient(&tf, self.s_out, self.p)?;
        let r = num / den;
        let pulled = if num > 0.0 { self.op.adjoint(&g_out)? } else { GridFunction::zeros(f.grid()) };
        let grad = pulled.axpy(Complex64::new(-r, 0.0), &g_in)?.scale(Complex64::new(1.0 / den, 0.0));
        Ok((r, drop_nyquist(&grad)))
    }

    /// L-BFGS ascent restricted to functions without Nyquist modes. The ratio
    /// is scale invariant, so iterates are rescaled to unit `ℓ²` norm only
    /// when the curvature memory is reset.
    fn climb(&self, start: GridFunction, iterations: usize) -> Result<(f64, GridFunction, bool)> {
        let dot = |a: &GridFunction, b: &GridFunction| a.inner(b).expect("same grid").re;
        let mut f = start;
        let (mut r, mut g) = self.ratio_and_gradient(&f)?;
        let mut memory: Vec<(GridFunction, GridFunction, f64)> = Vec::new();
        let mut history = vec![r];
        for _ in 0..iterations {
            let gn = dot(&g, &g).sqrt();
            let fnorm = dot(&f, &f).sqrt();
            if r == 0.0 || gn * fnorm <= GRADIENT_TOL * r {
                return Ok((r, f, true));
            }
            // Two-loop recursion on φ = −R: ascent direction d = H·g.
            let mut q = g.clone();
            let mut alphas = Vec::with_capacity(memory.len());
            for (sv, yv, rho) in memory.iter().rev() {
                let a = rho * dot(sv, &q);
                q = q.axpy(Complex64::new(a, 0.0), yv)?;
                alphas.push(a);
            }
            let gamma = match memory.last() {
                Some((sv, yv, _)) => dot(sv, yv) / dot(yv, yv),
                None => 0.1 * fnorm / gn,
            };
            let mut d = q.scale(Complex64::new(gamma, 0.0));
            for ((sv, yv, rho), a) in memory.iter().zip(alphas.iter().rev()) {
                let b = rho * dot(yv, &d);
                d = d.axpy(Complex64::new(a - b, 0.0), sv)?;
            }
            let mut slope = dot(&g, &d);
            if !(slope > 0.0) {
                memory.clear();
                d = g.scale(Complex64::new(0.1 * fnorm / gn, 0.0));
                slope = dot(&g, &d);
            }
            let mut step = 1.0;
            let mut accepted = None;
            while step > 1e-10 {
                let cand = f.axpy(Complex64::new(step, 0.0), &d)?;
                let rc = self.ratio(&cand)?;
                if rc >= r + 1e-4 * step * slope {
                    accepted = Some((rc, cand));
                    break;
                }
                step *= 0.5;
            }
            let Some((_, cand)) = accepted else {
                // No Armijo step left: the ratio is flat to working precision.
                return Ok((r, f, rc_is_flat(gn * fnorm, r)));
            };
            let (r2, g2) = self.ratio_and_gradient(&cand)?;
            let sv = cand.axpy(Complex64::new(-1.0, 0.0), &f)?;
            let yv = g.axpy(Complex64::new(-1.0, 0.0), &g2)?;
            let sy = dot(&sv, &yv);
            if sy > 1e-300 {
                memory.push((sv, yv, 1.0 / sy));
                if memory.len() > LBFGS_MEMORY {
                    memory.remove(0);
                }
            }
            history.push(r2);
            f = cand;
            r = r2;
            g = g2;
            if history.len() > STALL_WINDOW {
                let old = history[history.len() - 1 - STALL_WINDOW];
                if (r - old) / r <= STALL_TOL {
                    return Ok((r, f, true));
                }
            }
        }
        Ok((r, normalized(f), false))
    }
}

fn rc_is_flat(scaled_gradient: f64, r: f64) -> bool {
    scaled_gradient <= 1e-4 * r
}

fn random_starts(grid: &Grid, count: usize, seed: u64) -> Vec<GridFunction> {
    (0..count)
        .map(|i| {
            let mut rng = SplitMix64::seed_from_u64(mix(seed, i as u64, 7));
            let vals = (0..grid.len()).map(|_| normal_pair(&mut rng)).collect();
            normalized(drop_nyquist(&GridFunction::new(grid, vals).expect("same grid")))
        })
        .collect()
}

/// Lower estimate of `‖T‖_{H^{s_in,p}_{FIO} → H^{s_out,p}_{FIO}}`: every
/// restart takes a few ascent steps, then the best few are climbed to
/// convergence.
pub fn ratio_ascent(
    op: &dyn LinearOperator,
    space: &FioSpace,
    s_in: f64,
    s_out: f64,
    p: f64,
    restarts: usize,
    seed: u64,
) -> Result<AscentResult> {
    let problem = RatioProblem {
        op,
        space,
        s_in,
        s_out,
        p,
    };
    let starts = random_starts(op.grid(), restarts, seed);
    let mut screened: Vec<(f64, GridFunction)> = starts
        .into_par_iter()
        .map(|f| problem.climb(f, SCREEN_ITERATIONS).map(|(r, f, _)| (r, f)))
        .collect::<Result<_>>()?;
    screened.sort_by(|a, b| b.0.total_cmp(&a.0));
    let polished: Vec<(f64, bool)> = screened
        .into_iter()
        .take(POLISHED)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(_, f)| problem.climb(f, POLISH_ITERATIONS).map(|(r, _, c)| (r, c)))
        .collect::<Result<_>>()?;
    let best = polished
        .iter()
        .cloned()
        .fold((0.0, true), |acc, x| if x.0 > acc.0 { x } else { acc });
    Ok(AscentResult {
        value: best.0,
        converged: best.1,
        restarts,
    })
}

fn ascent_with_retry(
    op: &dyn LinearOperator,
    space: &FioSpace,
    s_in: f64,
    s_out: f64,
    p: f64,
    restarts: usize,
    seed: u64,
) -> Result<AscentResult> {
    let first = ratio_ascent(op, space, s_in, s_out, p, restarts, seed)?;
    if first.converged {
        return Ok(first);
    }
    ratio_ascent(op, space, s_in, s_out, p, 2 * restarts, seed)
}

// ---------------------------------------------------------------------------
// Three lines

fn max_levels(grid: &Grid) -> usize {
    // Largest J with 2^{J-1} < N/2.
    let mut j = 2;
    while (1usize << j) < grid.size() / 2 {
        j += 1;
    }
    j
}

fn symbol_for(grid: &Grid, spec: &TestSymbolSpec, bump: &Bump) -> Result<RoughSymbol> {
    let mut s = spec.clone();
    s.levels = s.levels.min(max_levels(grid));
    make_test_symbol(grid, &s, bump)
}

/// Boundary norms `M₀`, `M₁` of `F(z) = a_z(x,D)` and the interior norm
/// `M_θ = ‖a(x,D)‖`, compared through `M_θ ≤ (1+tol)·M₀^{1−θ}M₁^θ`.
pub fn three_lines_experiment(cfg: &ThreeLinesConfig, bump: &Bump, seed: u64) -> Result<ExperimentReport> {
    let n = 2;
    let eps = cfg.eps.unwrap_or(0.01 * cfg.r);
    let dp = match cfg.delta_prime {
        Some(d) => d,
        None => exponents::default_delta_prime(n, cfg.p, cfg.r, eps)?,
    };
    let ip = exponents::interp_params(n, cfg.p, cfg.r, dp, eps)?;
    let (tau0, _) = exponents::tau_gamma_exponents(n, ip.p0, ip.r0, eps)?;
    let theta = ip.theta;
    let s = (1.0 - theta) * cfg.t;
    let mut report = ExperimentReport::new(
        "three-lines",
        serde_json::json!({"seed": seed, "config": params(cfg), "interp": params(&ip), "tau0": tau0}),
    );
    for &size in &cfg.sizes {
        if size > 16 {
            return Err(invalid(format!("three-lines needs N <= 16, got {size}")));
        }
        let grid = Grid::new(n, size)?;
        let quad = QuadratureSpec {
            sphere_nodes: cfg.sphere_nodes,
            ..QuadratureSpec::default_for(n)
        };
        let space = FioSpace::new(&grid, &quad)?;
        let a = symbol_for(&grid, &cfg.symbol, bump)?;
        let family = |z: Complex64| -> Result<OperatorHandle> {
            OperatorHandle::new(&interp_family(&a, ip.kappa, ip.lambda, 0.5, z)?, None)
        };
        let mut line0 = Vec::new();
        let mut line1 = Vec::new();
        let mut converged = true;
        for (ti, &t) in cfg.t_samples.iter().enumerate() {
            let op0 = family(Complex64::new(0.0, t))?;
            let r0 = ascent_with_retry(&op0, &space, cfg.t + tau0, cfg.t, ip.p0, cfg.restarts, mix(seed, size as u64, ti as u64))?;
            converged &= r0.converged;
            let op1 = family(Complex64::new(1.0, t))?;
            let r1 = operator_norm(&op1, mix(seed, size as u64, 1000 + ti as u64))?;
            converged &= r1.converged;
            report.rows.push(
                ReportRow::new(format!("N={size},t={t}"))
                    .with("N", size as f64)
                    .with("t", t)
                    .with("line0_norm", r0.value)
                    .with("line1_norm", r1.value)
                    .judged(r0.converged && r1.converged),
            );
            line0.push((t, r0.value));
            line1.push((t, r1.value));
        }
        let m0 = line0.iter().map(|x| x.1).fold(0.0, f64::max);
        let m1 = line1.iter().map(|x| x.1).fold(0.0, f64::max);
        let op_theta = OperatorHandle::new(&a, None)?;
        let mt = ascent_with_retry(
            &op_theta,
            &space,
            s + (1.0 - theta) * tau0,
            s,
            cfg.p,
            cfg.restarts,
            mix(seed, size as u64, 99),
        )?;
        converged &= mt.converged;
        let bound = m0.powf(1.0 - theta) * m1.powf(theta);
        report.summary.insert(format!("N{size}.M0"), m0);
        report.summary.insert(format!("N{size}.M1"), m1);
        report.summary.insert(format!("N{size}.Mtheta"), mt.value);
        report.summary.insert(format!("N{size}.bound"), bound);
        report.check(
            &format!("three_lines_N{size}"),
            mt.value <= (1.0 + cfg.tolerance) * bound,
            format!("M_θ = {:.6} vs (1+{})·M₀^(1-θ)·M₁^θ = {:.6}", mt.value, cfg.tolerance, (1.0 + cfg.tolerance) * bound),
        );
        report.check(
            &format!("ascent_converged_N{size}"),
            converged,
            "every ascent and subspace iteration met its stopping rule".into(),
        );
        let decays = |line: &[(f64, f64)]| -> bool {
            [1.0, -1.0].iter().all(|&sign| {
                let mut tail: Vec<(f64, f64)> = line
                    .iter()
                    .filter(|(t, _)| t * sign >= 10.0)
                    .cloned()
                    .collect();
                tail.sort_by(|a, b| a.0.abs().total_cmp(&b.0.abs()));
                tail.windows(2).all(|w| w[1].1 <= w[0].1 * (1.0 + 1e-9))
            })
        };
        report.check(
            &format!("boundary_decay_N{size}"),
            decays(&line0) && decays(&line1),
            "boundary norms nonincreasing in |t| for |t| >= 10 on both lines".into(),
        );
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// Bound sweep

/// `max_f ‖a(x,D)f‖_{H^{s,p}} / ‖f‖_{H^{s+m+ℓ,p}}` over the ensemble for
/// `ℓ = σ` and `ℓ = τ`, on each grid size.
pub fn bound_sweep(cfg: &BoundSweepConfig, ens: &EnsembleSpec, quad: Option<QuadratureSpec>, bump: &Bump, seed: u64) -> Result<ExperimentReport> {
    let n = 2;
    let eps = cfg.eps.unwrap_or(0.01 * cfg.r);
    let mut report = ExperimentReport::new(
        "bound-sweep",
        serde_json::json!({"seed": seed, "config": params(cfg), "ensemble": params(ens)}),
    );
    let mut maxima: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut sigma_le_tau = true;
    let mut monotone = true;
    let mut skipped = Vec::new();
    for &size in &cfg.sizes {
        let grid = Grid::new(n, size)?;
        let space = FioSpace::new(&grid, &quad.unwrap_or_else(|| QuadratureSpec::default_for(n)))?;
        let ensemble = Ensemble::generate(&grid, ens, seed)?;
        let a = symbol_for(&grid, &cfg.symbol, bump)?;
        let op = OperatorHandle::new(&a, None)?;
        let images: Vec<GridFunction> = ensemble.members.iter().map(|f| op.apply(f)).collect::<Result<_>>()?;
        for (pi, &p) in cfg.ps.iter().enumerate() {
            let sigma = exponents::sigma_exponent(n, p, cfg.r, eps);
            let tg = exponents::tau_gamma_exponents(n, p, cfg.r, eps);
            let interval = exponents::sobolev_interval(n, p, cfg.r, cfg.delta, eps);
            let (sigma, tau, interval) = match (sigma, tg, interval) {
                (Ok(s), Ok(t), Ok(i)) if i.nonempty => (s, t.0, i),
                _ => {
                    skipped.push(p);
                    continue;
                }
            };
            let s = cfg.s.unwrap_or(0.5 * (interval.lo + interval.hi));
            let rows: Vec<(f64, f64)> = ensemble
                .members
                .par_iter()
                .zip(&images)
                .map(|(f, g)| -> Result<(f64, f64)> {
                    let num = space.norm(g, s, p)?;
                    let ds = space.norm(f, s + cfg.m_order + sigma, p)?;
                    let dt = space.norm(f, s + cfg.m_order + tau, p)?;
                    let r = |d: f64| if d > 1e-13 { num / d } else { f64::NAN };
                    Ok((r(ds), r(dt)))
                })
                .collect::<Result<_>>()?;
            let mut mx: f64 = 0.0;
            for (i, &(rs, rt)) in rows.iter().enumerate() {
                if rs.is_nan() || rt.is_nan() {
                    continue;
                }
                mx = mx.max(rs);
                let route_ok = rs <= rt;
                sigma_le_tau &= route_ok;
                let mono = if tau >= sigma { rt <= rs * (1.0 + 1e-12) } else { rs <= rt * (1.0 + 1e-12) };
                monotone &= mono;
                report.rows.push(
                    ReportRow::new(format!("N={size},p={p},f={i}"))
                        .with("N", size as f64)
                        .with("p", p)
                        .with("s", s)
                        .with("sigma", sigma)
                        .with("tau", tau)
                        .with("ratio_sigma", rs)
                        .with("ratio_tau", rt)
                        .judged(route_ok),
                );
            }
            maxima.insert((pi, size), mx);
            report.summary.insert(format!("N{size}.p{p}.max_ratio_sigma"), mx);
        }
    }
    if cfg.sizes.len() >= 2 {
        let (lo, hi) = (cfg.sizes[0], cfg.sizes[cfg.sizes.len() - 1]);
        for (pi, &p) in cfg.ps.iter().enumerate() {
            if let (Some(a), Some(b)) = (maxima.get(&(pi, lo)), maxima.get(&(pi, hi))) {
                let growth = b / a;
                report.summary.insert(format!("p{p}.growth"), growth);
                report.check(
                    &format!("stability_p{p}"),
                    growth <= cfg.growth_limit,
                    format!("max ratio grows by {growth:.4} from N={lo} to N={hi}"),
                );
            }
        }
    }
    report.check(
        "sigma_route_le_tau_route",
        sigma_le_tau,
        "ratio with extra loss σ at most the ratio with extra loss τ on every sample".into(),
    );
    report.check(
        "extra_loss_monotone",
        monotone,
        "a larger extra loss never increases a ratio".into(),
    );
    if !skipped.is_empty() {
        report.summary.insert("skipped_points".into(), skipped.len() as f64);
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// Smoothing pipeline

/// `a = a♯_{1/2} + (a♭_{1/2})♯_β + (a♭_{1/2})♭_β` with its checks.
#[derive(Clone, Debug)]
pub struct PipelineOutcome {
    pub sharp_half: RoughSymbol,
    pub middle: RoughSymbol,
    pub flat_flat: RoughSymbol,
    pub beta: f64,
    pub reconstruction_error: f64,
    pub window: WindowReport,
    /// When the window check fails: largest factor by which the bump radii can
    /// be scaled so that it passes.
    pub admissible_scale: Option<f64>,
}

fn pipeline_parts(a: &RoughSymbol, beta: f64, bump: &Bump) -> Result<(RoughSymbol, RoughSymbol, RoughSymbol)> {
    let first = smooth_split(a, 0.5, bump)?;
    let second = smooth_split(&first.flat, beta, bump)?;
    Ok((first.sharp, second.sharp, second.flat))
}

pub fn smoothing_pipeline(a: &RoughSymbol, p: f64, r: f64, eps: f64, bump: &Bump) -> Result<PipelineOutcome> {
    let n = a.grid().dim();
    let beta = exponents::beta(n, 1.0 / p, r, eps);
    if !(0.0..=1.0).contains(&beta) {
        return Err(invalid(format!("beta = {beta} outside [0, 1] for p = {p}, r = {r}")));
    }
    let (sharp_half, middle, flat_flat) = pipeline_parts(a, beta, bump)?;
    let reconstruction_error = max_abs_diff_of_sum(a, &[&sharp_half, &middle, &flat_flat])?;
    let window = support_window_check(&middle, bump.plateau, beta)?;
    let admissible_scale = if window.passed {
        None
    } else {
        let passes = |scale: f64| -> Result<bool> {
            let b = Bump::new(bump.plateau * scale, bump.support * scale)?;
            let (_, mid, _) = pipeline_parts(a, beta, &b)?;
            Ok(support_window_check(&mid, b.plateau, beta)?.passed)
        };
        let mut lo = 2f64.powi(-20);
        if passes(lo)? {
            let mut hi = 1.0;
            for _ in 0..24 {
                let mid = (lo * hi).sqrt();
                if passes(mid)? {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Some(lo)
        } else {
            None
        }
    };
    Ok(PipelineOutcome {
        sharp_half,
        middle,
        flat_flat,
        beta,
        reconstruction_error,
        window,
        admissible_scale,
    })
}

pub fn pipeline_experiment(grid: &Grid, cfg: &PipelineConfig, bump: &Bump, symbol_bump: &Bump) -> Result<ExperimentReport> {
    let eps = cfg.eps.unwrap_or(0.01 * cfg.r);
    let a = symbol_for(grid, &cfg.symbol, symbol_bump)?;
    let out = smoothing_pipeline(&a, cfg.p, cfg.r, eps, bump)?;
    let mut report = ExperimentReport::new(
        "pipeline",
        serde_json::json!({"n": grid.dim(), "N": grid.size(), "config": params(cfg), "bump": params(bump)}),
    );
    let scale = 1.0 + a.sup_norm();
    report.summary.insert("beta".into(), out.beta);
    report.summary.insert("reconstruction_error".into(), out.reconstruction_error);
    report.summary.insert("sharp_half_sup".into(), out.sharp_half.sup_norm());
    report.summary.insert("middle_sup".into(), out.middle.sup_norm());
    report.summary.insert("flat_flat_sup".into(), out.flat_flat.sup_norm());
    report.summary.insert("window_worst_relative_mass".into(), out.window.worst_relative_mass);
    report.check(
        "reconstruction",
        out.reconstruction_error <= 1e-12 * scale,
        format!("max |a - sum| = {:.3e}", out.reconstruction_error),
    );
    let detail = match out.admissible_scale {
        None if out.window.passed => format!("middle term inside the window with c = {}", bump.plateau),
        None => "no admissible bump radius found down to a scale of 2^-20".into(),
        Some(s) => format!(
            "window fails; largest admissible bump radii: plateau {:.6e}, support {:.6e}",
            bump.plateau * s,
            bump.support * s
        ),
    };
    report.check("middle_window", out.window.passed, detail);
    for v in &out.window.violations {
        report.rows.push(
            ReportRow::new(format!("violation xi={:?} eta={:?}", v.xi, v.eta)).with("relative_magnitude", v.magnitude),
        );
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// Sobolev embeddings

/// Measured constants of `H^{s(p),p} ⊆ H^p_FIO ⊆ H^{−s(p),p}` and the `p = 2`
/// comparability band, with their stability under refinement.
pub fn sobolev_embedding_suite(cfg: &EmbeddingConfig, ens: &EnsembleSpec, quad: Option<QuadratureSpec>, seed: u64) -> Result<ExperimentReport> {
    let n = 2;
    let spec = EnsembleSpec { count: cfg.count, ..*ens };
    let mut report = ExperimentReport::new(
        "embedding",
        serde_json::json!({"seed": seed, "config": params(cfg), "ensemble": params(&spec)}),
    );
    let mut constants: BTreeMap<(usize, usize), (f64, f64)> = BTreeMap::new();
    for &size in &cfg.sizes {
        let grid = Grid::new(n, size)?;
        let space = FioSpace::new(&grid, &quad.unwrap_or_else(|| QuadratureSpec::default_for(n)))?;
        let ensemble = Ensemble::generate(&grid, &spec, seed)?;
        let members: Vec<&GridFunction> = ensemble.members.iter().filter(|f| f.sup_norm() > 0.0).collect();
        // One function on the cap around e₁, in the shell just below N/4.
        let cap = {
            let loc = make_parabolic_localizer(&grid, &[1.0, 0.0, 0.0])?;
            let top = lp_top_shell(&grid);
            let coeffs = (0..grid.len())
                .map(|i| {
                    let radial = lp_shell_value(top - 1, top, lattice_norm(&grid.lattice(i)));
                    Complex64::new(loc.value_at(i) * radial, 0.0)
                })
                .collect();
            inverse_dft_owned(Spectrum::new(&grid, coeffs)?)
        };
        for (pi, &p) in cfg.ps.iter().enumerate() {
            let sp = exponents::s_of_p(n, p)?;
            let eval = |f: &GridFunction| -> Result<(f64, f64, f64)> {
                let h = space.norm(f, 0.0, p)?;
                let up = h / sobolev_norm(f, sp, p)?;
                let low = sobolev_norm(f, -sp, p)? / h;
                let l2 = if p == 2.0 { h / lp_norm(f, 2.0)? } else { f64::NAN };
                Ok((up, low, l2))
            };
            let vals: Vec<(f64, f64, f64)> = members.par_iter().map(|f| eval(f)).collect::<Result<_>>()?;
            let c_up = vals.iter().map(|v| v.0).fold(0.0, f64::max);
            let c_low = vals.iter().map(|v| v.1).fold(0.0, f64::max);
            constants.insert((pi, size), (c_up, c_low));
            let mut row = ReportRow::new(format!("N={size},p={p}"))
                .with("N", size as f64)
                .with("p", p)
                .with("s_p", sp)
                .with("upper_constant", c_up)
                .with("lower_constant", c_low);
            if p == 2.0 {
                let lo = vals.iter().map(|v| v.2).fold(f64::INFINITY, f64::min);
                let hi = vals.iter().map(|v| v.2).fold(0.0, f64::max);
                row = row.with("l2_band_min", lo).with("l2_band_max", hi);
                report.summary.insert(format!("N{size}.l2_band_min"), lo);
                report.summary.insert(format!("N{size}.l2_band_max"), hi);
            }
            let finite = c_up.is_finite() && c_low.is_finite() && c_up > 0.0 && c_low > 0.0;
            report.rows.push(row.judged(finite));
            let (cu, cl, _) = eval(&cap)?;
            report.rows.push(
                ReportRow::new(format!("N={size},p={p},cap"))
                    .with("N", size as f64)
                    .with("p", p)
                    .with("upper_ratio", cu)
                    .with("lower_ratio", cl),
            );
            report.summary.insert(format!("N{size}.p{p}.upper"), c_up);
            report.summary.insert(format!("N{size}.p{p}.lower"), c_low);
        }
    }
    let finite = constants.values().all(|(a, b)| a.is_finite() && b.is_finite());
    report.check("constants_finite", finite, "both embedding constants finite".into());
    if cfg.sizes.len() >= 2 {
        let (lo, hi) = (cfg.sizes[0], cfg.sizes[cfg.sizes.len() - 1]);
        let mut worst: f64 = 0.0;
        for pi in 0..cfg.ps.len() {
            if let (Some(a), Some(b)) = (constants.get(&(pi, lo)), constants.get(&(pi, hi))) {
                worst = worst.max((b.0 / a.0 - 1.0).abs()).max((b.1 / a.1 - 1.0).abs());
            }
        }
        report.summary.insert("worst_relative_change".into(), worst);
        report.check(
            "refinement_stability",
            worst <= cfg.stability,
            format!("largest relative change N={lo}→{hi}: {worst:.4}"),
        );
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// Dispatch

/// Experiments addressable by name.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Sandwich,
    ThreeLines,
    BoundSweep,
    Pipeline,
    Embedding,
}

pub fn run_experiment(which: Experiment, cfg: &Config) -> Result<ExperimentReport> {
    cfg.validate()?;
    let grid = cfg.grid.build()?;
    match which {
        Experiment::Sandwich => zygmund_sandwich_suite(cfg.grid.n, &cfg.sandwich, cfg.seed),
        Experiment::ThreeLines => three_lines_experiment(&cfg.three_lines, &cfg.bump, cfg.seed),
        Experiment::BoundSweep => bound_sweep(&cfg.bound_sweep, &cfg.ensemble, cfg.quadrature, &cfg.bump, cfg.seed),
        Experiment::Pipeline => pipeline_experiment(&grid, &cfg.pipeline, &cfg.pipeline_bump, &cfg.bump),
        Experiment::Embedding => sobolev_embedding_suite(&cfg.embedding, &cfg.ensemble, cfg.quadrature, cfg.seed),
    }
}
