//! Frequency localization: the bump, Littlewood–Paley shells, the annular
//! profile, parabolic caps and the directional localizers built from them.

use std::collections::HashMap;
use std::f64::consts::PI;

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::{inverse_dft, lattice_norm, Grid, Lattice, Multiplier, Spectrum, MAX_DIM};
use crate::sum::pairwise_sum;

/// Smooth radial cutoff equal to 1 on `[0, plateau]` and 0 on `[support, ∞)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bump {
    pub plateau: f64,
    pub support: f64,
}

impl Default for Bump {
    fn default() -> Self {
        Self::STANDARD
    }
}

#[inline]
fn glue(s: f64) -> f64 {
    if s > 0.0 {
        (-1.0 / s).exp()
    } else {
        0.0
    }
}

impl Bump {
    pub const STANDARD: Bump = Bump {
        plateau: 0.5,
        support: 1.0,
    };

    pub fn new(plateau: f64, support: f64) -> Result<Self> {
        if !(plateau > 0.0 && support > plateau && support.is_finite()) {
            return Err(invalid(format!(
                "bump needs 0 < plateau < support, got plateau={plateau}, support={support}"
            )));
        }
        Ok(Self { plateau, support })
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        if t <= self.plateau {
            1.0
        } else if t >= self.support {
            0.0
        } else {
            let u = (t - self.plateau) / (self.support - self.plateau);
            let a = glue(1.0 - u);
            a / (a + glue(u))
        }
    }
}

/// `ψ_j(ρ)` for the shell family with genuine shells `0..=top` and a closure
/// shell `top + 1` carrying everything beyond `2^top`.
#[inline]
pub fn lp_shell_value(j: usize, top: usize, rho: f64) -> f64 {
    let phi = |t: f64| Bump::STANDARD.eval(t);
    match j {
        0 => phi(rho),
        j if j <= top => phi(rho / f64::powi(2.0, j as i32)) - phi(rho / f64::powi(2.0, j as i32 - 1)),
        j if j == top + 1 => 1.0 - phi(rho / f64::powi(2.0, top as i32)),
        _ => 0.0,
    }
}

/// Closed radial interval outside which `ψ_j` vanishes.
pub fn lp_shell_support(j: usize, top: usize) -> (f64, f64) {
    match j {
        0 => (0.0, 1.0),
        j if j <= top => (f64::powi(2.0, j as i32 - 2), f64::powi(2.0, j as i32)),
        j if j == top + 1 => (f64::powi(2.0, top as i32 - 1), f64::INFINITY),
        _ => (f64::INFINITY, f64::INFINITY),
    }
}

/// Index of the last genuine shell on a grid, `log2(N/2)`.
pub fn lp_top_shell(grid: &Grid) -> usize {
    (grid.size() / 2).trailing_zeros() as usize
}

/// Littlewood–Paley multipliers on a grid; they sum to one at every lattice point.
#[derive(Clone, Debug)]
pub struct LpFamily {
    grid: Grid,
    top: usize,
    tables: Vec<Vec<f64>>,
}

impl LpFamily {
    pub fn new(grid: &Grid) -> Self {
        let top = lp_top_shell(grid);
        let norms = grid.frequency_norms();
        let tables = (0..=top + 1)
            .map(|j| norms.iter().map(|&rho| lp_shell_value(j, top, rho)).collect())
            .collect();
        Self {
            grid: grid.clone(),
            top,
            tables,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Number of shells including the closure shell.
    pub fn len(&self) -> usize {
        self.tables.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Last genuine shell index; `top + 1` is the closure shell.
    pub fn top(&self) -> usize {
        self.top
    }

    pub fn shell(&self, j: usize) -> &[f64] {
        &self.tables[j]
    }

    pub fn multiplier(&self, j: usize) -> Multiplier {
        let w = self.tables[j].iter().map(|&v| Complex64::new(v, 0.0)).collect();
        Multiplier::new(&self.grid, w).expect("table matches grid")
    }

    /// Shells whose support meets `{|k| = rho}`.
    pub fn shells_at(&self, rho: f64) -> Vec<usize> {
        (0..self.len())
            .filter(|&j| lp_shell_value(j, self.top, rho) != 0.0)
            .collect()
    }

    /// Largest deviation of `Σ_j ψ_j(k)` from one over the lattice.
    pub fn partition_defect(&self) -> f64 {
        (0..self.grid.len())
            .map(|i| {
                let s: f64 = self.tables.iter().map(|t| t[i]).sum();
                (s - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Annular profile `Ψ = h/√c`, `h(ρ) = φ(ρ/2) − φ(ρ)`, normalized so that
/// `∫₀^∞ Ψ(σρ)² dσ/σ = 1` for every `ρ > 0`.
#[derive(Clone, Copy, Debug)]
pub struct AnnularProfile {
    norm: f64,
}

impl Default for AnnularProfile {
    fn default() -> Self {
        Self::new()
    }
}

impl AnnularProfile {
    pub fn new() -> Self {
        // h² vanishes to all orders at both ends of [1/2, 2], so the trapezoid
        // rule in log u converges faster than any power.
        let nodes = 1 << 13;
        let (a, b) = (0.5f64.ln(), 2.0f64.ln());
        let step = (b - a) / nodes as f64;
        let vals: Vec<f64> = (1..nodes)
            .map(|i| {
                let h = Self::raw((a + i as f64 * step).exp());
                h * h
            })
            .collect();
        Self {
            norm: pairwise_sum(&vals) * step,
        }
    }

    #[inline]
    fn raw(rho: f64) -> f64 {
        Bump::STANDARD.eval(rho / 2.0) - Bump::STANDARD.eval(rho)
    }

    /// The constant `c = ∫ h(u)² du/u`.
    pub fn normalizer(&self) -> f64 {
        self.norm
    }

    #[inline]
    pub fn eval(&self, rho: f64) -> f64 {
        Self::raw(rho) / self.norm.sqrt()
    }

    /// `∫₀^∞ Ψ(σρ)² dσ/σ` by composite Gauss–Legendre in `log σ` over the
    /// window `σρ ∈ [1/2, 2]`.
    pub fn normalization_integral(&self, rho: f64) -> f64 {
        if rho <= 0.0 {
            return 0.0;
        }
        let lo = (0.5 / rho).ln();
        let hi = (2.0 / rho).ln();
        composite_gl(lo, hi, 32, 24, |t| {
            let v = self.eval(t.exp() * rho);
            v * v
        })
    }
}

fn composite_gl(a: f64, b: f64, panels: usize, degree: usize, f: impl Fn(f64) -> f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let rule = GaussLegendre::new(degree).expect("degree >= 2");
    let width = (b - a) / panels as f64;
    let mut parts = Vec::with_capacity(panels * degree);
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * width;
        for &(x, w) in rule.as_node_weight_pairs() {
            parts.push(0.5 * width * w * f(mid + 0.5 * width * x));
        }
    }
    pairwise_sum(&parts)
}

/// Surface measure of `S^{d-1}`.
pub fn sphere_area(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        _ => unreachable!("dimension checked by caller"),
    }
}

/// `∫_{S^{n−1}} φ(|e₁ − ν|/√σ)² dν` as a one-dimensional zonal integral.
pub fn cap_integral(dim: usize, bump: &Bump, sigma: f64) -> f64 {
    let s = sigma.sqrt();
    // |e₁ − ν| = 2 sin(θ/2) for the polar angle θ of ν.
    let angle = |radius: f64| {
        let half = radius * s / 2.0;
        if half >= 1.0 {
            PI
        } else {
            2.0 * half.asin()
        }
    };
    let theta_p = angle(bump.plateau);
    let theta_s = angle(bump.support);
    let jac = |theta: f64| theta.sin().powi(dim as i32 - 2);
    let inner = composite_gl(0.0, theta_p, 4, 24, jac);
    let transition = composite_gl(theta_p, theta_s, 32, 24, |theta| {
        let v = bump.eval(2.0 * (theta / 2.0).sin() / s);
        v * v * jac(theta)
    });
    sphere_area(dim - 1) * (inner + transition)
}

/// `c_σ = (∫ φ(|e₁ − ν|/√σ)² dν)^{−1/2}` from the zonal integral.
pub fn cap_constant(dim: usize, bump: &Bump, sigma: f64) -> f64 {
    cap_integral(dim, bump, sigma).powf(-0.5)
}

/// Nodes and positive weights on the unit sphere `S^{n−1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SphereQuadrature {
    dim: usize,
    nodes: Vec<[f64; MAX_DIM]>,
    weights: Vec<f64>,
}

/// Size of a sphere quadrature as stored in configuration files.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSpec {
    /// Angles on the circle (n = 2) or azimuthal angles (n = 3).
    pub sphere_nodes: usize,
    /// Polar Gauss–Legendre nodes for n = 3; ignored for n = 2.
    #[serde(default = "default_polar")]
    pub polar_nodes: usize,
    #[serde(default = "default_octave")]
    pub sigma_nodes_per_octave: usize,
}

fn default_polar() -> usize {
    26
}

fn default_octave() -> usize {
    64
}

impl QuadratureSpec {
    pub fn default_for(dim: usize) -> Self {
        match dim {
            3 => Self {
                sphere_nodes: 52,
                polar_nodes: 26,
                sigma_nodes_per_octave: 64,
            },
            _ => Self {
                sphere_nodes: 256,
                polar_nodes: 26,
                sigma_nodes_per_octave: 64,
            },
        }
    }

    pub fn build(&self, dim: usize) -> Result<SphereQuadrature> {
        match dim {
            2 => SphereQuadrature::circle(self.sphere_nodes),
            3 => SphereQuadrature::sphere(self.polar_nodes, self.sphere_nodes),
            _ => Err(invalid(format!("no sphere quadrature for dimension {dim}"))),
        }
    }
}

impl SphereQuadrature {
    /// `m` equispaced angles with weights `2π/m`.
    pub fn circle(m: usize) -> Result<Self> {
        if m < 4 {
            return Err(invalid(format!("circle quadrature needs at least 4 nodes, got {m}")));
        }
        let nodes = (0..m)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / m as f64;
                [t.cos(), t.sin(), 0.0]
            })
            .collect();
        Ok(Self {
            dim: 2,
            nodes,
            weights: vec![2.0 * PI / m as f64; m],
        })
    }

    /// Gauss–Legendre in `cos θ` times equispaced azimuth.
    pub fn sphere(polar: usize, azimuth: usize) -> Result<Self> {
        if polar < 2 || azimuth < 4 {
            return Err(invalid(format!(
                "sphere quadrature too small: {polar} polar x {azimuth} azimuthal"
            )));
        }
        let rule = GaussLegendre::new(polar).expect("degree >= 2");
        let mut nodes = Vec::with_capacity(polar * azimuth);
        let mut weights = Vec::with_capacity(polar * azimuth);
        for &(z, w) in rule.as_node_weight_pairs() {
            let r = (1.0 - z * z).sqrt();
            for a in 0..azimuth {
                let t = 2.0 * PI * a as f64 / azimuth as f64;
                nodes.push([r * t.cos(), r * t.sin(), z]);
                weights.push(w * 2.0 * PI / azimuth as f64);
            }
        }
        Ok(Self {
            dim: 3,
            nodes,
            weights,
        })
    }

    pub fn for_grid(grid: &Grid, spec: &QuadratureSpec) -> Result<Self> {
        spec.build(grid.dim())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[[f64; MAX_DIM]] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_weight(&self) -> f64 {
        pairwise_sum(&self.weights)
    }

    pub fn integrate(&self, f: impl Fn(&[f64; MAX_DIM]) -> f64) -> f64 {
        let parts: Vec<f64> = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(x))
            .collect();
        pairwise_sum(&parts)
    }

    /// `c_σ` evaluated with this quadrature.
    ///
    /// Fails when fewer than 8 nodes land inside the cap, since the cap is then
    /// not resolved.
    pub fn cap_normalizer(&self, sigma: f64, bump: &Bump) -> Result<f64> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(invalid(format!("cap scale must be positive, got {sigma}")));
        }
        let s = sigma.sqrt();
        let mut inside = 0usize;
        let parts: Vec<f64> = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(nu, w)| {
                let d = ((1.0 - nu[0]).powi(2) + nu[1] * nu[1] + nu[2] * nu[2]).sqrt();
                let v = bump.eval(d / s);
                if v > 0.0 {
                    inside += 1;
                }
                w * v * v
            })
            .collect();
        if inside < 8 {
            return Err(Error::Resolution(format!(
                "only {inside} quadrature nodes inside the cap at sigma={sigma}"
            )));
        }
        Ok(pairwise_sum(&parts).powf(-0.5))
    }
}

/// Radial part of the localizer integral, shared by every direction.
///
/// For each distinct `|k|²` it stores the log-trapezoid terms
/// `(√σ_i, Ψ(σ_i|k|)·c_{σ_i}·Δ)` over the nodes where `Ψ(σ_i|k|) ≠ 0`.
#[derive(Clone, Debug)]
pub struct LocalizerFactory {
    grid: Grid,
    bump: Bump,
    nodes_per_octave: usize,
    profile: AnnularProfile,
    step: f64,
    sigmas: Vec<(f64, f64)>,
    radial: HashMap<i64, Vec<(f64, f64)>>,
}

impl LocalizerFactory {
    pub fn new(grid: &Grid, nodes_per_octave: usize) -> Result<Self> {
        if nodes_per_octave < 8 {
            return Err(invalid(format!(
                "need at least 8 sigma nodes per octave, got {nodes_per_octave}"
            )));
        }
        let bump = Bump::STANDARD;
        let profile = AnnularProfile::new();
        let dim = grid.dim();
        // σ_i = 4·2^{−i/q}; the smallest scale needed is 1/(2|k|_max).
        let q = nodes_per_octave as f64;
        let octaves = (8.0 * grid.max_frequency_norm()).log2();
        let count = (octaves * q).ceil() as usize + 2;
        let step = std::f64::consts::LN_2 / q;
        let sigmas: Vec<f64> = (0..count).map(|i| 4.0 * (-(i as f64) / q).exp2()).collect();
        let sigmas: Vec<(f64, f64)> = sigmas
            .par_iter()
            .map(|&s| (s, cap_constant(dim, &bump, s)))
            .collect();

        let mut squares: Vec<i64> = (0..grid.len())
            .map(|i| grid.lattice(i).iter().map(|v| v * v).sum())
            .collect();
        squares.sort_unstable();
        squares.dedup();
        let mut factory = Self {
            grid: grid.clone(),
            bump,
            nodes_per_octave,
            profile,
            step,
            sigmas,
            radial: HashMap::new(),
        };
        factory.radial = squares
            .par_iter()
            .map(|&sq| (sq, factory.radial_terms(sq)))
            .collect::<Vec<_>>()
            .into_iter()
            .collect();
        Ok(factory)
    }

    fn radial_terms(&self, sq: i64) -> Vec<(f64, f64)> {
        if sq == 0 {
            return Vec::new();
        }
        let rho = (sq as f64).sqrt();
        if 0.5 / rho < self.sigmas.last().map_or(0.0, |s| s.0) {
            // Off-grid frequency below the tabulated scales.
            let q = self.nodes_per_octave as f64;
            let start = self.sigmas.len();
            let stop = ((4.0 * 2.0 * rho).log2() * q).ceil() as usize + 2;
            let dim = self.grid.dim();
            let extra: Vec<(f64, f64)> = (start..stop)
                .map(|i| {
                    let s = 4.0 * (-(i as f64) / q).exp2();
                    (s, cap_constant(dim, &self.bump, s))
                })
                .collect();
            return self.terms_from(self.sigmas.iter().chain(&extra), rho);
        }
        self.terms_from(self.sigmas.iter(), rho)
    }

    fn terms_from<'a>(&self, sigmas: impl Iterator<Item = &'a (f64, f64)>, rho: f64) -> Vec<(f64, f64)> {
        sigmas
            .filter_map(|&(s, c)| {
                let psi = self.profile.eval(s * rho);
                (psi != 0.0).then(|| (s.sqrt(), psi * c * self.step))
            })
            .collect()
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn nodes_per_octave(&self) -> usize {
        self.nodes_per_octave
    }

    /// `φ_ω(k)` at one lattice frequency.
    pub fn value(&self, omega: &[f64; MAX_DIM], k: &Lattice) -> f64 {
        let sq: i64 = k.iter().map(|v| v * v).sum();
        if sq == 0 {
            return 0.0;
        }
        let rho = (sq as f64).sqrt();
        let mut d2 = 0.0;
        for i in 0..self.grid.dim() {
            let t = k[i] as f64 / rho - omega[i];
            d2 += t * t;
        }
        let d = d2.sqrt();
        if rho < 0.125 || d > 2.0 / rho.sqrt() {
            return 0.0;
        }
        let owned;
        let terms = match self.radial.get(&sq) {
            Some(t) => t,
            None => {
                owned = self.radial_terms(sq);
                &owned
            }
        };
        let mut acc = 0.0;
        for &(root, amp) in terms {
            if d < root * self.bump.support {
                acc += amp * self.bump.eval(d / root);
            }
        }
        acc
    }

    pub fn build(&self, omega: &[f64; MAX_DIM]) -> Result<ParabolicLocalizer> {
        let norm: f64 = omega.iter().take(self.grid.dim()).map(|v| v * v).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 || omega[self.grid.dim()..].iter().any(|&v| v != 0.0) {
            return Err(invalid(format!("direction must be a unit vector, |omega| = {norm}")));
        }
        let entries = (0..self.grid.len())
            .filter_map(|i| {
                let v = self.value(omega, &self.grid.lattice(i));
                (v != 0.0).then_some((i as u32, v))
            })
            .collect();
        Ok(ParabolicLocalizer {
            direction: *omega,
            entries,
        })
    }

    /// Localizers for every node of `quad`, in node order.
    pub fn build_all(&self, quad: &SphereQuadrature) -> Result<Vec<ParabolicLocalizer>> {
        if quad.dim() != self.grid.dim() {
            return Err(Error::Shape(format!(
                "quadrature on S^{} used with a {}-dimensional grid",
                quad.dim() - 1,
                self.grid.dim()
            )));
        }
        quad.nodes().par_iter().map(|w| self.build(w)).collect()
    }
}

/// Sparse table of `φ_ω(k)`; lattice points not listed carry zero.
#[derive(Clone, Debug, PartialEq)]
pub struct ParabolicLocalizer {
    direction: [f64; MAX_DIM],
    entries: Vec<(u32, f64)>,
}

impl ParabolicLocalizer {
    pub fn direction(&self) -> &[f64; MAX_DIM] {
        &self.direction
    }

    /// `(flat index, value)` pairs of the support, in increasing index order.
    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }

    pub fn value_at(&self, index: usize) -> f64 {
        match self.entries.binary_search_by_key(&(index as u32), |e| e.0) {
            Ok(pos) => self.entries[pos].1,
            Err(_) => 0.0,
        }
    }

    pub fn to_multiplier(&self, grid: &Grid) -> Multiplier {
        let mut w = vec![Complex64::new(0.0, 0.0); grid.len()];
        for &(i, v) in &self.entries {
            w[i as usize] = Complex64::new(v, 0.0);
        }
        Multiplier::new(grid, w).expect("length matches grid")
    }
}

/// Convenience wrapper: `φ_ω` on `grid` with the default σ resolution.
pub fn make_parabolic_localizer(grid: &Grid, omega: &[f64; MAX_DIM]) -> Result<ParabolicLocalizer> {
    LocalizerFactory::new(grid, 64)?.build(omega)
}

/// `G(k)² = Σ_ω w_ω φ_ω(k)²`.
pub fn square_function_weight(
    grid: &Grid,
    quad: &SphereQuadrature,
    localizers: &[ParabolicLocalizer],
) -> Result<Vec<f64>> {
    if localizers.len() != quad.len() {
        return Err(Error::Shape(format!(
            "{} localizers for {} quadrature nodes",
            localizers.len(),
            quad.len()
        )));
    }
    let mut per_point: Vec<Vec<f64>> = vec![Vec::new(); grid.len()];
    for (loc, &w) in localizers.iter().zip(quad.weights()) {
        for &(i, v) in loc.entries() {
            per_point[i as usize].push(w * v * v);
        }
    }
    Ok(per_point.iter().map(|terms| pairwise_sum(terms)).collect())
}

/// `Σ_j |K(x_j)| (2π/N)^n` for the kernel `K = F^{-1} m`.
pub fn kernel_l1_norm(m: &Multiplier) -> f64 {
    let spec = Spectrum::new(m.grid(), m.weights().to_vec()).expect("same grid");
    let kernel = inverse_dft(&spec);
    let abs: Vec<f64> = kernel.values().iter().map(|v| v.norm()).collect();
    pairwise_sum(&abs) * m.grid().cell_volume()
}

/// `⟨k⟩^{−2n} φ_ω(k)` as a multiplier.
pub fn damped_localizer(grid: &Grid, loc: &ParabolicLocalizer) -> Multiplier {
    let n = grid.dim() as i32;
    let mut w = vec![Complex64::new(0.0, 0.0); grid.len()];
    for &(i, v) in loc.entries() {
        let rho = lattice_norm(&grid.lattice(i as usize));
        w[i as usize] = Complex64::new(v * (1.0 + rho * rho).powi(-n), 0.0);
    }
    Multiplier::new(grid, w).expect("length matches grid")
}
