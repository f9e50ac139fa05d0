//! Rough symbols `a(x, η)`: dense and separable representations, the
//! `C^r_*S^{m,l}_{1,δ}` seminorm, symbol smoothing, the analytic family `a_z`,
//! support-window checks and generators of test symbols.

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng as _, SeedableRng};
use rand_xoshiro::SplitMix64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decomp::{lp_shell_support, lp_shell_value, lp_top_shell, Bump, LpFamily};
use crate::error::{invalid, Error, Result};
use crate::grid::{
    apply_multiplier, forward_dft, inverse_dft_owned, japanese_bracket, lattice_norm,
    sobolev_weight, Grid, GridFunction, Lattice, Multiplier, Spectrum, MAX_DIM,
};
use crate::spaces::shell_sup_norms;

/// Largest dense table allowed, in entries (`48^4`, about 85 MB of complex values).
pub const DENSE_LIMIT: usize = 48 * 48 * 48 * 48;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `η`-profile `coeff · ⟨η⟩^power · Π_j ψ_j(|η|) · table(η)`.
///
/// Without a table the profile is a closed-form function of real `η`; a table
/// restricts it to lattice points.
#[derive(Clone, Debug, PartialEq)]
pub struct EtaProfile {
    pub coeff: Complex64,
    pub power: Complex64,
    pub shells: Vec<usize>,
    pub table: Option<Arc<Vec<Complex64>>>,
}

impl EtaProfile {
    pub fn one() -> Self {
        Self {
            coeff: Complex64::new(1.0, 0.0),
            power: ZERO,
            shells: Vec::new(),
            table: None,
        }
    }

    /// `⟨η⟩^m`.
    pub fn bracket_power(m: Complex64) -> Self {
        Self {
            power: m,
            ..Self::one()
        }
    }

    pub fn shell(j: usize) -> Self {
        Self {
            shells: vec![j],
            ..Self::one()
        }
    }

    pub fn from_table(grid: &Grid, table: Vec<Complex64>) -> Result<Self> {
        grid.ensure_len(table.len(), "eta table")?;
        Ok(Self {
            table: Some(Arc::new(table)),
            ..Self::one()
        })
    }

    pub fn is_closed_form(&self) -> bool {
        self.table.is_none()
    }

    /// Radial factor at `|η| = rho`, without the table.
    #[inline]
    pub fn radial(&self, rho: f64, top: usize) -> Complex64 {
        let mut v = self.coeff;
        for &j in &self.shells {
            let s = lp_shell_value(j, top, rho);
            if s == 0.0 {
                return ZERO;
            }
            v *= s;
        }
        if self.power != ZERO {
            v *= (self.power * japanese_bracket(rho).ln()).exp();
        }
        v
    }

    /// Closed-form value at real `η`; tables are ignored.
    pub fn eval_continuous(&self, eta: &[f64; MAX_DIM], top: usize) -> Complex64 {
        let rho = eta.iter().map(|v| v * v).sum::<f64>().sqrt();
        self.radial(rho, top)
    }

    /// Values at every lattice point.
    pub fn lattice_values(&self, grid: &Grid) -> Vec<Complex64> {
        let top = lp_top_shell(grid);
        (0..grid.len())
            .map(|i| self.value_at(grid, top, i))
            .collect()
    }

    #[inline]
    pub fn value_at(&self, grid: &Grid, top: usize, index: usize) -> Complex64 {
        let base = self.radial(lattice_norm(&grid.lattice(index)), top);
        match &self.table {
            Some(t) => base * t[index],
            None => base,
        }
    }

    /// Radial interval outside which the shell factors vanish.
    fn shell_window(&self, top: usize) -> (f64, f64) {
        self.shells.iter().fold((0.0, f64::INFINITY), |(lo, hi), &j| {
            let (a, b) = lp_shell_support(j, top);
            (lo.max(a), hi.min(b))
        })
    }

    fn may_overlap_shell(&self, k: usize, top: usize) -> bool {
        let (lo, hi) = self.shell_window(top);
        let (a, b) = lp_shell_support(k, top);
        lo.max(a) < hi.min(b)
    }

    fn with_shell(&self, k: usize) -> Self {
        let mut out = self.clone();
        out.shells.push(k);
        out
    }

    fn scaled(&self, c: Complex64, extra_power: Complex64) -> Self {
        Self {
            coeff: self.coeff * c,
            power: self.power + extra_power,
            ..self.clone()
        }
    }
}

/// One term `b(x)·e(η)` of a separable symbol.
#[derive(Clone, Debug, PartialEq)]
pub struct SeparableTerm {
    pub b: GridFunction,
    pub e: EtaProfile,
}

/// `a(x,η) = Σ_m b_m(x) e_m(η)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SeparableSymbol {
    grid: Grid,
    terms: Vec<SeparableTerm>,
}

impl SeparableSymbol {
    pub fn new(grid: &Grid, terms: Vec<SeparableTerm>) -> Result<Self> {
        if terms.is_empty() {
            return Err(invalid("separable symbol needs at least one term"));
        }
        for t in &terms {
            grid.ensure_same(t.b.grid())?;
            if let Some(table) = &t.e.table {
                grid.ensure_len(table.len(), "eta table")?;
            }
        }
        Ok(Self {
            grid: grid.clone(),
            terms,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn terms(&self) -> &[SeparableTerm] {
        &self.terms
    }

    pub fn rank(&self) -> usize {
        self.terms.len()
    }

    /// `η`-tables of every term, in term order.
    pub fn eta_tables(&self) -> Vec<Vec<Complex64>> {
        self.terms
            .par_iter()
            .map(|t| t.e.lattice_values(&self.grid))
            .collect()
    }
}

/// Table `a(x_i, η_j)` stored `η`-major: entry `j·N^n + i`.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseSymbol {
    grid: Grid,
    data: Vec<Complex64>,
}

fn dense_guard(grid: &Grid) -> Result<()> {
    let entries = grid.len() * grid.len();
    if entries > DENSE_LIMIT {
        return Err(invalid(format!(
            "dense symbol with {entries} entries exceeds the limit of {DENSE_LIMIT}; use the separable form"
        )));
    }
    Ok(())
}

impl DenseSymbol {
    pub fn new(grid: &Grid, data: Vec<Complex64>) -> Result<Self> {
        dense_guard(grid)?;
        if data.len() != grid.len() * grid.len() {
            return Err(Error::Shape(format!(
                "dense symbol has {} entries, grid needs {}",
                data.len(),
                grid.len() * grid.len()
            )));
        }
        Ok(Self {
            grid: grid.clone(),
            data,
        })
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(&[f64; MAX_DIM], &Lattice) -> Complex64 + Sync) -> Result<Self> {
        dense_guard(grid)?;
        let len = grid.len();
        let data = (0..len * len)
            .into_par_iter()
            .map(|idx| f(&grid.position(idx % len), &grid.lattice(idx / len)))
            .collect();
        Ok(Self {
            grid: grid.clone(),
            data,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn column(&self, eta: usize) -> &[Complex64] {
        let len = self.grid.len();
        &self.data[eta * len..(eta + 1) * len]
    }
}

/// A rough symbol in one of its two representations.
#[derive(Clone, Debug, PartialEq)]
pub enum RoughSymbol {
    Dense(DenseSymbol),
    Separable(SeparableSymbol),
}

/// Representation tag.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    Dense,
    Separable,
}

impl From<DenseSymbol> for RoughSymbol {
    fn from(d: DenseSymbol) -> Self {
        RoughSymbol::Dense(d)
    }
}

impl From<SeparableSymbol> for RoughSymbol {
    fn from(s: SeparableSymbol) -> Self {
        RoughSymbol::Separable(s)
    }
}

impl RoughSymbol {
    pub fn grid(&self) -> &Grid {
        match self {
            RoughSymbol::Dense(d) => &d.grid,
            RoughSymbol::Separable(s) => &s.grid,
        }
    }

    pub fn representation(&self) -> Representation {
        match self {
            RoughSymbol::Dense(_) => Representation::Dense,
            RoughSymbol::Separable(_) => Representation::Separable,
        }
    }

    /// Number of terms; dense symbols report the number of `η` columns.
    pub fn rank(&self) -> usize {
        match self {
            RoughSymbol::Dense(d) => d.grid.len(),
            RoughSymbol::Separable(s) => s.rank(),
        }
    }

    pub fn as_separable(&self) -> Option<&SeparableSymbol> {
        match self {
            RoughSymbol::Separable(s) => Some(s),
            RoughSymbol::Dense(_) => None,
        }
    }

    /// `a(·, η_j)` on the grid.
    pub fn column(&self, eta: usize) -> Vec<Complex64> {
        match self {
            RoughSymbol::Dense(d) => d.column(eta).to_vec(),
            RoughSymbol::Separable(s) => {
                let top = lp_top_shell(&s.grid);
                let mut col = vec![ZERO; s.grid.len()];
                for t in &s.terms {
                    let e = t.e.value_at(&s.grid, top, eta);
                    if e == ZERO {
                        continue;
                    }
                    for (c, b) in col.iter_mut().zip(t.b.values()) {
                        *c += b * e;
                    }
                }
                col
            }
        }
    }

    /// Dense table of the symbol, subject to the memory guard.
    pub fn to_dense(&self) -> Result<DenseSymbol> {
        match self {
            RoughSymbol::Dense(d) => Ok(d.clone()),
            RoughSymbol::Separable(s) => {
                dense_guard(&s.grid)?;
                let len = s.grid.len();
                let tables = s.eta_tables();
                let mut data = vec![ZERO; len * len];
                data.par_chunks_mut(len).enumerate().for_each(|(eta, col)| {
                    for (t, tab) in s.terms.iter().zip(&tables) {
                        let e = tab[eta];
                        if e == ZERO {
                            continue;
                        }
                        for (c, b) in col.iter_mut().zip(t.b.values()) {
                            *c += b * e;
                        }
                    }
                });
                DenseSymbol::new(&s.grid, data)
            }
        }
    }

    /// `c·a`.
    pub fn scale(&self, c: Complex64) -> RoughSymbol {
        match self {
            RoughSymbol::Dense(d) => RoughSymbol::Dense(DenseSymbol {
                grid: d.grid.clone(),
                data: d.data.iter().map(|v| v * c).collect(),
            }),
            RoughSymbol::Separable(s) => RoughSymbol::Separable(SeparableSymbol {
                grid: s.grid.clone(),
                terms: s
                    .terms
                    .iter()
                    .map(|t| SeparableTerm {
                        b: t.b.clone(),
                        e: t.e.scaled(c, ZERO),
                    })
                    .collect(),
            }),
        }
    }

    /// Largest `|a(x,η) − b(x,η)|` over the grid.
    pub fn max_abs_diff(&self, other: &RoughSymbol) -> Result<f64> {
        self.grid().ensure_same(other.grid())?;
        let len = self.grid().len();
        Ok((0..len)
            .into_par_iter()
            .map(|eta| {
                let a = self.column(eta);
                let b = other.column(eta);
                a.iter().zip(&b).map(|(u, v)| (u - v).norm()).fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max))
    }

    /// Largest `|a(x,η)|` over the grid.
    pub fn sup_norm(&self) -> f64 {
        let len = self.grid().len();
        (0..len)
            .into_par_iter()
            .map(|eta| self.column(eta).iter().map(|v| v.norm()).fold(0.0, f64::max))
            .reduce(|| 0.0, f64::max)
    }
}

/// Sum of symbols evaluated column by column, for reconstruction checks.
pub fn max_abs_diff_of_sum(target: &RoughSymbol, parts: &[&RoughSymbol]) -> Result<f64> {
    for p in parts {
        target.grid().ensure_same(p.grid())?;
    }
    let len = target.grid().len();
    Ok((0..len)
        .into_par_iter()
        .map(|eta| {
            let mut acc = vec![ZERO; len];
            for p in parts {
                for (a, v) in acc.iter_mut().zip(p.column(eta)) {
                    *a += v;
                }
            }
            target
                .column(eta)
                .iter()
                .zip(&acc)
                .map(|(u, v)| (u - v).norm())
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max))
}

// ---------------------------------------------------------------------------
// Seminorm

/// One multi-index row of a seminorm evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaEntry {
    pub alpha: Vec<usize>,
    /// `sup |∂^α a| / ⟨η⟩^{m−|α|}`.
    pub eta_ratio: f64,
    /// `sup_η ‖∂^α a(·,η)‖_{C^r_*} / ⟨η⟩^{m−|α|+rδ}`.
    pub zygmund_ratio: f64,
}

/// Smallest constant for the two families of bounds, with its breakdown.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolSeminorm {
    pub value: f64,
    pub per_alpha: Vec<AlphaEntry>,
    pub r: f64,
    pub m: f64,
    pub delta: f64,
    pub l: usize,
    /// Number of `η` points scanned.
    pub eta_samples: usize,
}

fn multi_indices(dim: usize, l: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for order in 0..=l {
        let mut cur = vec![0usize; dim];
        fn rec(d: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if d + 1 == cur.len() {
                cur[d] = left;
                out.push(cur.clone());
                return;
            }
            for v in (0..=left).rev() {
                cur[d] = v;
                rec(d + 1, left - v, cur, out);
            }
        }
        rec(0, order, &mut cur, &mut out);
    }
    out
}

const FD1: [(i64, f64); 4] = [(-2, 1.0 / 12.0), (-1, -8.0 / 12.0), (1, 8.0 / 12.0), (2, -1.0 / 12.0)];
const FD2: [(i64, f64); 5] = [
    (-2, -1.0 / 12.0),
    (-1, 16.0 / 12.0),
    (0, -30.0 / 12.0),
    (1, 16.0 / 12.0),
    (2, -1.0 / 12.0),
];

/// Fourth-order finite-difference stencil for `∂^α` with `|α| ≤ 2`, as
/// `(offset, weight)` pairs with unit spacing.
fn stencil(alpha: &[usize]) -> Vec<([i64; MAX_DIM], f64)> {
    let mut pts = vec![([0i64; MAX_DIM], 1.0)];
    for (d, &a) in alpha.iter().enumerate() {
        let one: &[(i64, f64)] = match a {
            0 => &[(0, 1.0)],
            1 => &FD1,
            2 => &FD2,
            _ => unreachable!("order checked by caller"),
        };
        let mut next = Vec::with_capacity(pts.len() * one.len());
        for (off, w) in &pts {
            for &(o, v) in one {
                let mut p = *off;
                p[d] += o;
                next.push((p, w * v));
            }
        }
        pts = next;
    }
    pts
}

fn is_interior(grid: &Grid, k: &Lattice) -> bool {
    let half = grid.size() as i64 / 2;
    k.iter()
        .take(grid.dim())
        .all(|&v| v >= -half + 2 && v <= half - 3)
}

/// Closed-form `∂^α e(η)` by fourth-order differences of step `h`.
fn profile_derivative(e: &EtaProfile, eta: &[f64; MAX_DIM], alpha: &[usize], top: usize, h: f64) -> Complex64 {
    let order: usize = alpha.iter().sum();
    if order == 0 {
        return e.eval_continuous(eta, top);
    }
    let mut acc = ZERO;
    for (off, w) in stencil(alpha) {
        let mut p = *eta;
        for d in 0..MAX_DIM {
            p[d] += off[d] as f64 * h;
        }
        acc += e.eval_continuous(&p, top) * w;
    }
    acc / h.powi(order as i32)
}

/// `η` points for scanning radial closed-form profiles: rays through the
/// first orthant, radii at spacing `1/8` up to 4 and relative spacing `1/32`
/// beyond, capped at the largest lattice radius.
fn radial_sample(grid: &Grid) -> Vec<[f64; MAX_DIM]> {
    let rmax = grid.max_frequency_norm();
    let mut radii: Vec<f64> = (0..=32).map(|i| i as f64 / 8.0).collect();
    let mut r = 4.0;
    while r < rmax {
        r *= 1.0 + 1.0 / 32.0;
        radii.push(r.min(rmax));
    }
    let dirs: Vec<[f64; MAX_DIM]> = match grid.dim() {
        2 => (0..=4)
            .map(|i| {
                let t = i as f64 * std::f64::consts::FRAC_PI_8;
                [t.cos(), t.sin(), 0.0]
            })
            .collect(),
        _ => {
            let mut v = Vec::new();
            for i in 0..=2 {
                let th = i as f64 * std::f64::consts::FRAC_PI_4;
                for j in 0..=2 {
                    let ph = j as f64 * std::f64::consts::FRAC_PI_4;
                    v.push([th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()]);
                }
            }
            v
        }
    };
    let mut out = Vec::with_capacity(radii.len() * dirs.len());
    for &r in &radii {
        for d in &dirs {
            out.push([d[0] * r, d[1] * r, d[2] * r]);
        }
    }
    out
}

/// The `C^r_*S^{m,l}_{1,δ}` seminorm.
///
/// Dense symbols, and separable symbols with tabulated profiles, use
/// fourth-order lattice differences in `η` with the two outermost frequency
/// rings excluded, which restricts them to `l ≤ 2`. Separable symbols with
/// closed-form profiles are differentiated at step `10^{-3}⟨η⟩/4` and scanned
/// over a radial sample of `η`.
pub fn seminorm(a: &RoughSymbol, r: f64, m: f64, delta: f64, l: usize) -> Result<SymbolSeminorm> {
    let closed_form = matches!(a, RoughSymbol::Separable(s) if s.terms.iter().all(|t| t.e.is_closed_form()));
    if !closed_form && l > 2 {
        return Err(invalid(format!(
            "derivative order l = {l} needs closed-form eta profiles; tabulated symbols allow l <= 2"
        )));
    }
    if closed_form && l > 2 {
        return Err(invalid(format!("derivative order l = {l} is above the supported 2")));
    }
    let grid = a.grid().clone();
    let lp = LpFamily::new(&grid);
    let alphas = multi_indices(grid.dim(), l);
    let (rows, samples) = match a {
        RoughSymbol::Separable(s) if closed_form => seminorm_separable(s, &lp, &alphas, r, m, delta),
        _ => seminorm_lattice(a, &lp, &alphas, r, m, delta),
    };
    let value = rows
        .iter()
        .map(|e| e.eta_ratio.max(e.zygmund_ratio))
        .fold(0.0, f64::max);
    Ok(SymbolSeminorm {
        value,
        per_alpha: rows,
        r,
        m,
        delta,
        l,
        eta_samples: samples,
    })
}

fn zygmund_of_values(values: Vec<Complex64>, grid: &Grid, lp: &LpFamily, r: f64) -> f64 {
    if values.iter().all(|v| *v == ZERO) {
        return 0.0;
    }
    let f = GridFunction::new(grid, values).expect("same grid");
    let sups = shell_sup_norms(&forward_dft(&f), lp).expect("same grid");
    crate::spaces::zygmund_from_shells(&sups, r).value
}

fn seminorm_lattice(
    a: &RoughSymbol,
    lp: &LpFamily,
    alphas: &[Vec<usize>],
    r: f64,
    m: f64,
    delta: f64,
) -> (Vec<AlphaEntry>, usize) {
    let grid = a.grid();
    let len = grid.len();
    let interior: Vec<usize> = (0..len).filter(|&i| is_interior(grid, &grid.lattice(i))).collect();
    let columns: Vec<Vec<Complex64>> = (0..len).into_par_iter().map(|i| a.column(i)).collect();
    let rows = alphas
        .iter()
        .map(|alpha| {
            let order: usize = alpha.iter().sum();
            let st = stencil(alpha);
            let (eta_ratio, zygmund_ratio) = interior
                .par_iter()
                .map(|&i| {
                    let k = grid.lattice(i);
                    let mut d = vec![ZERO; len];
                    for (off, w) in &st {
                        let mut q = k;
                        for t in 0..MAX_DIM {
                            q[t] += off[t];
                        }
                        let col = &columns[grid.index_of(&q)];
                        for (acc, v) in d.iter_mut().zip(col) {
                            *acc += v * *w;
                        }
                    }
                    let br = japanese_bracket(lattice_norm(&k));
                    let sup = d.iter().map(|v| v.norm()).fold(0.0, f64::max);
                    let eta = sup / br.powf(m - order as f64);
                    let z = zygmund_of_values(d, grid, lp, r) / br.powf(m - order as f64 + r * delta);
                    (eta, z)
                })
                .reduce(|| (0.0, 0.0), |x, y| (x.0.max(y.0), x.1.max(y.1)));
            AlphaEntry {
                alpha: alpha.clone(),
                eta_ratio,
                zygmund_ratio,
            }
        })
        .collect();
    (rows, interior.len())
}

fn seminorm_separable(
    s: &SeparableSymbol,
    lp: &LpFamily,
    alphas: &[Vec<usize>],
    r: f64,
    m: f64,
    delta: f64,
) -> (Vec<AlphaEntry>, usize) {
    let grid = &s.grid;
    let top = lp.top();
    // ψ_j(D)b_m for every term and shell, None where it vanishes.
    let shell_parts: Vec<Vec<Option<Vec<Complex64>>>> = s
        .terms
        .par_iter()
        .map(|t| {
            let spec = forward_dft(&t.b);
            (0..lp.len())
                .map(|j| {
                    let table = lp.shell(j);
                    let coeffs: Vec<Complex64> =
                        spec.coeffs().iter().zip(table).map(|(c, w)| c * w).collect();
                    if coeffs.iter().all(|c| *c == ZERO) {
                        None
                    } else {
                        let sp = Spectrum::new(grid, coeffs).expect("same grid");
                        Some(inverse_dft_owned(sp).into_values())
                    }
                })
                .collect()
        })
        .collect();
    let etas = radial_sample(grid);
    let rows = alphas
        .iter()
        .map(|alpha| {
            let order: usize = alpha.iter().sum();
            let (eta_ratio, zygmund_ratio) = etas
                .par_iter()
                .map(|eta| {
                    let rho = eta.iter().map(|v| v * v).sum::<f64>().sqrt();
                    let br = japanese_bracket(rho);
                    let h = 1e-3 * (br / 4.0).max(1.0);
                    let d: Vec<Complex64> = s
                        .terms
                        .iter()
                        .map(|t| profile_derivative(&t.e, eta, alpha, top, h))
                        .collect();
                    if d.iter().all(|v| *v == ZERO) {
                        return (0.0, 0.0);
                    }
                    let mut col = vec![ZERO; grid.len()];
                    for (t, &c) in s.terms.iter().zip(&d) {
                        if c == ZERO {
                            continue;
                        }
                        for (acc, b) in col.iter_mut().zip(t.b.values()) {
                            *acc += b * c;
                        }
                    }
                    let sup = col.iter().map(|v| v.norm()).fold(0.0, f64::max);
                    let mut sups = vec![0.0; lp.len()];
                    for (j, slot) in sups.iter_mut().enumerate() {
                        let mut acc: Option<Vec<Complex64>> = None;
                        for (parts, &c) in shell_parts.iter().zip(&d) {
                            if c == ZERO {
                                continue;
                            }
                            if let Some(part) = &parts[j] {
                                let buf = acc.get_or_insert_with(|| vec![ZERO; grid.len()]);
                                for (x, v) in buf.iter_mut().zip(part) {
                                    *x += v * c;
                                }
                            }
                        }
                        *slot = acc.map_or(0.0, |b| b.iter().map(|v| v.norm()).fold(0.0, f64::max));
                    }
                    let z = crate::spaces::zygmund_from_shells(&sups, r).value;
                    (
                        sup / br.powf(m - order as f64),
                        z / br.powf(m - order as f64 + r * delta),
                    )
                })
                .reduce(|| (0.0, 0.0), |x, y| (x.0.max(y.0), x.1.max(y.1)));
            AlphaEntry {
                alpha: alpha.clone(),
                eta_ratio,
                zygmund_ratio,
            }
        })
        .collect();
    (rows, etas.len())
}

// ---------------------------------------------------------------------------
// Smoothing

/// `a = a♯_β + a♭_β`.
#[derive(Clone, Debug, PartialEq)]
pub struct SmoothingSplit {
    pub sharp: RoughSymbol,
    pub flat: RoughSymbol,
    pub beta: f64,
}

/// `φ(2^{−βk}·)` on the lattice, and its complement, for shell `k`.
fn shell_filters(grid: &Grid, bump: &Bump, beta: f64, k: usize) -> (Multiplier, Multiplier) {
    let scale = (-beta * k as f64).exp2();
    let low = Multiplier::from_real_fn(grid, |xi| bump.eval(lattice_norm(xi) * scale));
    let high = Multiplier::from_real_fn(grid, |xi| 1.0 - bump.eval(lattice_norm(xi) * scale));
    (low, high)
}

/// Smoothing split with the smoothing cutoff `bump`.
pub fn smooth_split(a: &RoughSymbol, beta: f64, bump: &Bump) -> Result<SmoothingSplit> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(invalid(format!("beta must lie in [0, 1], got {beta}")));
    }
    let grid = a.grid().clone();
    let top = lp_top_shell(&grid);
    let shells: Vec<usize> = (0..=top + 1).collect();
    let filters: Vec<(Multiplier, Multiplier)> = shells
        .iter()
        .map(|&k| shell_filters(&grid, bump, beta, k))
        .collect();
    match a {
        RoughSymbol::Separable(s) => {
            let pieces: Vec<Vec<(SeparableTerm, SeparableTerm)>> = s
                .terms
                .par_iter()
                .map(|t| {
                    let table_support = t.e.table.as_ref().map(|_| t.e.lattice_values(&grid));
                    shells
                        .iter()
                        .filter(|&&k| t.e.may_overlap_shell(k, top))
                        .filter(|&&k| match &table_support {
                            None => true,
                            Some(vals) => (0..grid.len()).any(|i| {
                                vals[i] != ZERO && lp_shell_value(k, top, lattice_norm(&grid.lattice(i))) != 0.0
                            }),
                        })
                        .map(|&k| {
                            let (low, high) = &filters[k];
                            let e = t.e.with_shell(k);
                            let sharp = apply_multiplier(low, &t.b).expect("same grid");
                            let flat = apply_multiplier(high, &t.b).expect("same grid");
                            (
                                SeparableTerm { b: sharp, e: e.clone() },
                                SeparableTerm { b: flat, e },
                            )
                        })
                        .collect()
                })
                .collect();
            let (sharp, flat): (Vec<_>, Vec<_>) = pieces.into_iter().flatten().unzip();
            Ok(SmoothingSplit {
                sharp: SeparableSymbol::new(&grid, sharp)?.into(),
                flat: SeparableSymbol::new(&grid, flat)?.into(),
                beta,
            })
        }
        RoughSymbol::Dense(d) => {
            let len = grid.len();
            let lp = LpFamily::new(&grid);
            let mut sharp = vec![ZERO; len * len];
            let mut flat = vec![ZERO; len * len];
            sharp
                .par_chunks_mut(len)
                .zip(flat.par_chunks_mut(len))
                .enumerate()
                .for_each(|(eta, (sh, fl))| {
                    let col = GridFunction::new(&grid, d.column(eta).to_vec()).expect("same grid");
                    let weights: Vec<(usize, f64)> = shells
                        .iter()
                        .map(|&k| (k, lp.shell(k)[eta]))
                        .filter(|(_, w)| *w != 0.0)
                        .collect();
                    let combine = |pick: &dyn Fn(&(Multiplier, Multiplier)) -> &Multiplier| {
                        let mut w = vec![ZERO; len];
                        for &(k, s) in &weights {
                            for (acc, v) in w.iter_mut().zip(pick(&filters[k]).weights()) {
                                *acc += v * s;
                            }
                        }
                        Multiplier::new(&grid, w).expect("same grid")
                    };
                    let low = combine(&|f| &f.0);
                    let high = combine(&|f| &f.1);
                    sh.copy_from_slice(apply_multiplier(&low, &col).expect("same grid").values());
                    fl.copy_from_slice(apply_multiplier(&high, &col).expect("same grid").values());
                });
            Ok(SmoothingSplit {
                sharp: DenseSymbol::new(&grid, sharp)?.into(),
                flat: DenseSymbol::new(&grid, flat)?.into(),
                beta,
            })
        }
    }
}

// ---------------------------------------------------------------------------
// Analytic family

/// `a_z(x,η) = e^{w²}⟨η⟩^{−δw}[⟨D⟩^w a(·,η)](x)` with `w = κz + λ`.
pub fn interp_family(a: &RoughSymbol, kappa: f64, lambda: f64, delta: f64, z: Complex64) -> Result<RoughSymbol> {
    if !(0.0..=1.0).contains(&z.re) || !z.im.is_finite() {
        return Err(invalid(format!("z = {z} lies outside the closed strip 0 <= Re z <= 1")));
    }
    let w = z * kappa + lambda;
    if w == ZERO {
        return Ok(a.clone());
    }
    let grid = a.grid().clone();
    let smoothing = sobolev_weight(&grid, w);
    let factor = (w * w).exp();
    match a {
        RoughSymbol::Separable(s) => {
            let terms = s
                .terms
                .par_iter()
                .map(|t| SeparableTerm {
                    b: apply_multiplier(&smoothing, &t.b).expect("same grid"),
                    e: t.e.scaled(factor, -w * delta),
                })
                .collect();
            Ok(SeparableSymbol::new(&grid, terms)?.into())
        }
        RoughSymbol::Dense(d) => {
            let len = grid.len();
            let mut data = vec![ZERO; len * len];
            data.par_chunks_mut(len).enumerate().for_each(|(eta, out)| {
                let col = GridFunction::new(&grid, d.column(eta).to_vec()).expect("same grid");
                let br = japanese_bracket(lattice_norm(&grid.lattice(eta)));
                let scale = factor * (-w * delta * br.ln()).exp();
                let g = apply_multiplier(&smoothing, &col).expect("same grid");
                for (o, v) in out.iter_mut().zip(g.values()) {
                    *o = v * scale;
                }
            });
            Ok(DenseSymbol::new(&grid, data)?.into())
        }
    }
}

// ---------------------------------------------------------------------------
// Support window

/// One offending `(ξ, η)` pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowViolation {
    pub xi: Vec<i64>,
    pub eta: Vec<i64>,
    pub magnitude: f64,
}

/// Outcome of a support-window scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowReport {
    pub passed: bool,
    pub c: f64,
    pub exponent: f64,
    /// Largest relative `ℓ¹` mass of `F_x a(·,η)` outside the window.
    pub worst_relative_mass: f64,
    pub violating_etas: usize,
    /// Largest offending coefficients, capped at 32 entries.
    pub violations: Vec<WindowViolation>,
}

/// Window test: relative `x`-spectrum mass outside
/// `{c|η|^{1/2} ≤ |ξ| ≤ (1+|η|)^γ/16}` at most `1e−10` for every lattice `η`.
pub fn support_window_check(a: &RoughSymbol, c: f64, exponent: f64) -> Result<WindowReport> {
    if !(c > 0.0) {
        return Err(invalid(format!("window constant c must be positive, got {c}")));
    }
    const TOL: f64 = 1e-10;
    // Columns this small are rounding residue of O(1) symbols.
    const ROUNDOFF_FLOOR: f64 = 1e-12;
    let grid = a.grid().clone();
    let len = grid.len();
    let xi_norms = grid.frequency_norms();
    let spectra: Option<(Vec<Vec<Complex64>>, Vec<Vec<Complex64>>)> = a.as_separable().map(|s| {
        (
            s.terms.par_iter().map(|t| forward_dft(&t.b).into_coeffs()).collect(),
            s.eta_tables(),
        )
    });
    let per_eta: Vec<(f64, Vec<WindowViolation>)> = (0..len)
        .into_par_iter()
        .map(|eta| {
            let spec: Vec<Complex64> = match (&spectra, a) {
                (Some((specs, tables)), _) => {
                    let mut acc = vec![ZERO; len];
                    for (sp, tab) in specs.iter().zip(tables) {
                        let e = tab[eta];
                        if e == ZERO {
                            continue;
                        }
                        for (x, v) in acc.iter_mut().zip(sp) {
                            *x += v * e;
                        }
                    }
                    acc
                }
                (None, RoughSymbol::Dense(d)) => {
                    let col = GridFunction::new(&grid, d.column(eta).to_vec()).expect("same grid");
                    forward_dft(&col).into_coeffs()
                }
                (None, RoughSymbol::Separable(_)) => unreachable!(),
            };
            let total: f64 = spec.iter().map(|v| v.norm()).sum();
            if total <= ROUNDOFF_FLOOR {
                return (0.0, Vec::new());
            }
            let k = grid.lattice(eta);
            let rho = lattice_norm(&k);
            let lo = c * rho.sqrt();
            let hi = (1.0 + rho).powf(exponent) / 16.0;
            let mut outside = 0.0;
            let mut bad = Vec::new();
            for (i, v) in spec.iter().enumerate() {
                let x = xi_norms[i];
                if (x < lo || x > hi) && *v != ZERO {
                    outside += v.norm();
                    bad.push((i, v.norm()));
                }
            }
            let rel = outside / total;
            let mut viol = Vec::new();
            if rel > TOL {
                bad.sort_by(|a, b| b.1.total_cmp(&a.1));
                for &(i, mag) in bad.iter().take(4) {
                    viol.push(WindowViolation {
                        xi: grid.lattice(i)[..grid.dim()].to_vec(),
                        eta: k[..grid.dim()].to_vec(),
                        magnitude: mag / total,
                    });
                }
            }
            (rel, viol)
        })
        .collect();
    let worst = per_eta.iter().map(|p| p.0).fold(0.0, f64::max);
    let violating = per_eta.iter().filter(|p| p.0 > TOL).count();
    let mut violations: Vec<WindowViolation> = per_eta.into_iter().flat_map(|p| p.1).collect();
    violations.sort_by(|a, b| b.magnitude.total_cmp(&a.magnitude));
    violations.truncate(32);
    Ok(WindowReport {
        passed: violating == 0,
        c,
        exponent,
        worst_relative_mass: worst,
        violating_etas: violating,
        violations,
    })
}

// ---------------------------------------------------------------------------
// Generators

/// `b = Σ_{j=2}^{J} 2^{−jr} cos(k_j·x + θ_j)` with `k_j` the lattice point
/// nearest to `2^{j−1}u_j` for a random unit vector `u_j`.
pub fn lacunary_field(grid: &Grid, r: f64, levels: usize, seed: u64) -> Result<GridFunction> {
    if !(r > 0.0) {
        return Err(invalid(format!("regularity r must be positive, got {r}")));
    }
    if levels < 2 || (1usize << (levels - 1)) >= grid.size() / 2 {
        return Err(invalid(format!(
            "J = {levels} needs 2 <= J and 2^(J-1) < N/2 = {}",
            grid.size() / 2
        )));
    }
    let mut rng = SplitMix64::seed_from_u64(seed);
    let dim = grid.dim();
    let mut modes = Vec::new();
    for j in 2..=levels {
        let radius = (1u64 << (j - 1)) as f64;
        let k = loop {
            let mut u = [0.0f64; MAX_DIM];
            for v in u.iter_mut().take(dim) {
                *v = rng.sample::<f64, _>(rand_distr::StandardNormal);
            }
            let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm < 1e-12 {
                continue;
            }
            let mut k = [0i64; MAX_DIM];
            for d in 0..dim {
                k[d] = (radius * u[d] / norm).round() as i64;
            }
            if k.iter().any(|&v| v != 0) {
                break k;
            }
        };
        let phase: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        modes.push(((-(j as f64) * r).exp2(), k, phase));
    }
    Ok(GridFunction::from_fn(grid, |x| {
        let v: f64 = modes
            .iter()
            .map(|(amp, k, ph)| {
                let arg: f64 = (0..dim).map(|d| k[d] as f64 * x[d]).sum::<f64>() + ph;
                amp * arg.cos()
            })
            .sum();
        Complex64::new(v, 0.0)
    }))
}

/// `a(x,η) = b(x)`.
pub fn multiplication_symbol(b: &GridFunction) -> RoughSymbol {
    SeparableSymbol {
        grid: b.grid().clone(),
        terms: vec![SeparableTerm {
            b: b.clone(),
            e: EtaProfile::one(),
        }],
    }
    .into()
}

/// `a(x,η) = e(η)`.
pub fn multiplier_symbol(grid: &Grid, e: EtaProfile) -> RoughSymbol {
    tensor_symbol(&GridFunction::constant(grid, Complex64::new(1.0, 0.0)), e)
}

/// `a(x,η) = b(x)e(η)`.
pub fn tensor_symbol(b: &GridFunction, e: EtaProfile) -> RoughSymbol {
    SeparableSymbol {
        grid: b.grid().clone(),
        terms: vec![SeparableTerm { b: b.clone(), e }],
    }
    .into()
}

/// `b♭_δ(x,η) = Σ_k [(1−φ)(2^{−δk}D)b](x)ψ_k(η)`.
pub fn flat_of_b(b: &GridFunction, delta: f64, bump: &Bump) -> Result<RoughSymbol> {
    Ok(smooth_split(&multiplication_symbol(b), delta, bump)?.flat)
}

/// Generator parameters for the named test-symbol kinds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestSymbolSpec {
    /// `multiplier`, `multiplication`, `tensor` or `flat-of-b`.
    pub kind: String,
    /// Regularity of the lacunary `b`.
    #[serde(default = "one")]
    pub r: f64,
    /// Number of lacunary levels.
    #[serde(default = "five", rename = "J")]
    pub levels: usize,
    #[serde(default)]
    pub seed: u64,
    /// Order of the multiplier profile `⟨η⟩^m`.
    #[serde(default)]
    pub m: f64,
    /// Smoothing parameter of `flat-of-b`.
    #[serde(default = "half")]
    pub delta: f64,
}

fn one() -> f64 {
    1.0
}
fn five() -> usize {
    5
}
fn half() -> f64 {
    0.5
}

impl TestSymbolSpec {
    pub fn new(kind: &str) -> Self {
        Self {
            kind: kind.to_string(),
            r: 1.0,
            levels: 5,
            seed: 0,
            m: 0.0,
            delta: 0.5,
        }
    }
}

pub fn make_test_symbol(grid: &Grid, spec: &TestSymbolSpec, bump: &Bump) -> Result<RoughSymbol> {
    let profile = EtaProfile::bracket_power(Complex64::new(spec.m, 0.0));
    match spec.kind.as_str() {
        "multiplier" => Ok(multiplier_symbol(grid, profile)),
        "multiplication" => Ok(multiplication_symbol(&lacunary_field(grid, spec.r, spec.levels, spec.seed)?)),
        "tensor" => Ok(tensor_symbol(&lacunary_field(grid, spec.r, spec.levels, spec.seed)?, profile)),
        "flat-of-b" => flat_of_b(&lacunary_field(grid, spec.r, spec.levels, spec.seed)?, spec.delta, bump),
        other => Err(invalid(format!(
            "unknown symbol kind '{other}' (expected multiplier, multiplication, tensor or flat-of-b)"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::zygmund_norm;
    use proptest::prelude::*;

    fn random_dense(grid: &Grid, seed: u64) -> RoughSymbol {
        let mut rng = SplitMix64::seed_from_u64(seed);
        let len = grid.len();
        let data = (0..len * len)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        DenseSymbol::new(grid, data).unwrap().into()
    }

    #[test]
    fn stencils_are_exact_on_quartics() {
        // f(η) = η₁⁴ + η₁η₂³: ∂₁ = 4η₁³ + η₂³, ∂₁₂ = 3η₂², ∂₂₂ = 6η₁η₂.
        let f = |p: [i64; MAX_DIM]| {
            let (a, b) = (p[0] as f64, p[1] as f64);
            a.powi(4) + a * b.powi(3)
        };
        let eval = |alpha: &[usize]| -> f64 {
            stencil(alpha)
                .iter()
                .map(|(o, w)| w * f([3 + o[0], 2 + o[1], 0]))
                .sum()
        };
        assert!((eval(&[1, 0]) - (108.0 + 8.0)).abs() < 1e-9);
        assert!((eval(&[1, 1]) - 12.0).abs() < 1e-9);
        assert!((eval(&[0, 2]) - 36.0).abs() < 1e-9);
        assert_eq!(multi_indices(2, 2).len(), 6);
        assert_eq!(multi_indices(3, 2).len(), 10);
    }

    #[test]
    fn constant_symbol_has_unit_seminorm() {
        let grid = Grid::new(2, 16).unwrap();
        let a = multiplier_symbol(&grid, EtaProfile::one());
        for (r, delta, l) in [(1.0, 0.0, 0), (0.5, 0.5, 2), (2.0, 1.0, 1)] {
            let sn = seminorm(&a, r, 0.0, delta, l).unwrap();
            assert!((sn.value - 1.0).abs() < 1e-12, "r={r} delta={delta} l={l}: {}", sn.value);
        }
        let dense: RoughSymbol = a.to_dense().unwrap().into();
        assert!((seminorm(&dense, 1.0, 0.0, 0.5, 2).unwrap().value - 1.0).abs() < 1e-12);
        assert!(seminorm(&dense, 1.0, 0.0, 0.5, 3).is_err());
    }

    #[test]
    fn multiplication_seminorm_unrolls() {
        let grid = Grid::new(2, 32).unwrap();
        let lp = LpFamily::new(&grid);
        let b = lacunary_field(&grid, 1.0, 4, 7).unwrap();
        let a = multiplication_symbol(&b);
        let sn = seminorm(&a, 1.0, 0.0, 0.0, 0).unwrap();
        let expected = b.sup_norm().max(zygmund_norm(&b, 1.0, &lp).unwrap().value);
        assert!((sn.value - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn smoothing_reconstructs_dense() {
        let grid = Grid::new(2, 8).unwrap();
        let a = random_dense(&grid, 3);
        for beta in [0.5, 0.7, 0.9] {
            let split = smooth_split(&a, beta, &Bump::STANDARD).unwrap();
            let err = max_abs_diff_of_sum(&a, &[&split.sharp, &split.flat]).unwrap();
            assert!(err <= 1e-12, "beta={beta}: {err}");
        }
    }

    #[test]
    fn x_independent_symbols_have_zero_flat_part() {
        let grid = Grid::new(2, 16).unwrap();
        let a = multiplier_symbol(&grid, EtaProfile::bracket_power(Complex64::new(-0.5, 0.0)));
        let split = smooth_split(&a, 0.5, &Bump::STANDARD).unwrap();
        assert_eq!(split.flat.sup_norm(), 0.0);
        assert!(split.sharp.max_abs_diff(&a).unwrap() <= 1e-15);
        let dense: RoughSymbol = a.to_dense().unwrap().into();
        let split = smooth_split(&dense, 0.7, &Bump::STANDARD).unwrap();
        assert_eq!(split.flat.sup_norm(), 0.0);
    }

    #[test]
    fn plateau_arithmetic_for_a_single_mode() {
        // b = e^{i(8,0)·x}; shell k keeps the mode in a♯ iff φ(8·2^{−k/2}) = 1.
        let grid = Grid::new(2, 256).unwrap();
        let b = GridFunction::plane_wave(&grid, &[8, 0, 0]);
        let split = smooth_split(&multiplication_symbol(&b), 0.5, &Bump::STANDARD).unwrap();
        let flat = split.flat.as_separable().unwrap();
        let top = lp_top_shell(&grid);
        let shell_flat = |k: usize| -> f64 {
            flat.terms()
                .iter()
                .filter(|t| t.e.shells == vec![k])
                .map(|t| t.b.sup_norm())
                .sum()
        };
        assert!(shell_flat(6) > 0.0);
        assert!(shell_flat(6) > 0.1);
        assert!(shell_flat(8) < 1e-12);
        assert_eq!(top + 1, 8);
    }

    #[test]
    fn interp_family_identities() {
        let grid = Grid::new(2, 16).unwrap();
        let b = lacunary_field(&grid, 1.0, 3, 1).unwrap();
        let a = flat_of_b(&b, 0.5, &Bump::STANDARD).unwrap();
        let same = interp_family(&a, 0.0, 0.0, 0.5, Complex64::new(0.3, 4.0)).unwrap();
        assert_eq!(same, a);
        let (kappa, theta) = (0.7, 0.4);
        let at_theta = interp_family(&a, kappa, -kappa * theta, 0.5, Complex64::new(theta, 0.0)).unwrap();
        assert!(at_theta.max_abs_diff(&a).unwrap() <= 1e-12);
        assert!(interp_family(&a, 1.0, 0.0, 0.5, Complex64::new(1.5, 0.0)).is_err());

        let dense: RoughSymbol = a.to_dense().unwrap().into();
        let z = Complex64::new(0.8, -2.0);
        let sep = interp_family(&a, 1.0, -0.2, 0.5, z).unwrap();
        let den = interp_family(&dense, 1.0, -0.2, 0.5, z).unwrap();
        assert!(sep.max_abs_diff(&den).unwrap() <= 1e-11 * sep.sup_norm().max(1e-300));
    }

    #[test]
    fn window_check_examples() {
        let grid = Grid::new(2, 32).unwrap();
        let one = multiplier_symbol(&grid, EtaProfile::one());
        let rep = support_window_check(&one, 0.5, 0.9).unwrap();
        assert!(!rep.passed);

        let grid = Grid::new(2, 128).unwrap();
        let b = GridFunction::plane_wave(&grid, &[8, 0, 0]);
        let a = tensor_symbol(&b, EtaProfile::shell(6));
        let rep = support_window_check(&a, 1.0, 0.9).unwrap();
        assert!(!rep.passed);
        assert!(rep.violations.iter().any(|v| v.xi == vec![8, 0]));
    }

    #[test]
    fn lacunary_examples() {
        let grid = Grid::new(2, 128).unwrap();
        let lp = LpFamily::new(&grid);
        let b = lacunary_field(&grid, 1.0, 5, 42).unwrap();
        let z = zygmund_norm(&b, 1.0, &lp).unwrap().value;
        assert!((1.0 / 6.0..=6.0).contains(&z), "{z}");
        assert_eq!(b, lacunary_field(&grid, 1.0, 5, 42).unwrap());

        let smooth = lacunary_field(&grid, 4.0, 5, 3).unwrap();
        let only2 = lacunary_field(&grid, 4.0, 2, 3).unwrap();
        assert!(smooth.max_abs_diff(&only2) < 3e-4);
        assert!(lacunary_field(&grid, 1.0, 7, 1).is_err());
    }

    #[test]
    fn test_symbol_kinds() {
        let grid = Grid::new(2, 16).unwrap();
        let one = make_test_symbol(&grid, &TestSymbolSpec::new("multiplier"), &Bump::STANDARD).unwrap();
        assert_eq!(one.sup_norm(), 1.0);
        assert!(make_test_symbol(&grid, &TestSymbolSpec::new("bogus"), &Bump::STANDARD).is_err());
        let mut spec = TestSymbolSpec::new("multiplication");
        spec.levels = 3;
        let a = make_test_symbol(&grid, &spec, &Bump::STANDARD).unwrap();
        let sn = seminorm(&a, 1.0, 0.0, 0.0, 0).unwrap();
        assert!(sn.value.is_finite());
    }

    #[test]
    fn flat_of_b_excludes_the_plateau() {
        let grid = Grid::new(2, 64).unwrap();
        let b = lacunary_field(&grid, 1.0, 4, 2).unwrap();
        let a = flat_of_b(&b, 0.5, &Bump::STANDARD).unwrap();
        let sep = a.as_separable().unwrap();
        for t in sep.terms() {
            let k = t.e.shells[0];
            let plateau = 0.5 * (0.5 * k as f64).exp2();
            let spec = forward_dft(&t.b);
            for (i, c) in spec.coeffs().iter().enumerate() {
                if lattice_norm(&grid.lattice(i)) <= plateau {
                    assert!(c.norm() < 1e-12, "shell {k}");
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn seminorm_is_homogeneous(seed in 0u64..1000, c in -3.0f64..3.0, ph in 0.0f64..6.28) {
            let grid = Grid::new(2, 16).unwrap();
            let b = lacunary_field(&grid, 1.0, 3, seed).unwrap();
            let a = flat_of_b(&b, 0.5, &Bump::STANDARD).unwrap();
            let s = Complex64::from_polar(c, ph);
            let base = seminorm(&a, 1.0, 0.0, 0.5, 1).unwrap().value;
            let scaled = seminorm(&a.scale(s), 1.0, 0.0, 0.5, 1).unwrap().value;
            prop_assert!((scaled - s.norm() * base).abs() <= 1e-12 * base.max(1e-300) * 10.0);
        }

        #[test]
        fn seminorm_monotone_in_l(seed in 0u64..1000) {
            let grid = Grid::new(2, 16).unwrap();
            let b = lacunary_field(&grid, 1.0, 3, seed).unwrap();
            let a = flat_of_b(&b, 0.5, &Bump::STANDARD).unwrap();
            let v: Vec<f64> = (0..=2).map(|l| seminorm(&a, 1.0, 0.0, 0.5, l).unwrap().value).collect();
            prop_assert!(v[0] <= v[1] && v[1] <= v[2]);
        }

        #[test]
        fn embedding_is_contractive(seed in 0u64..1000, beta in 0.5f64..1.0) {
            let grid = Grid::new(2, 16).unwrap();
            let b = lacunary_field(&grid, 1.0, 3, seed).unwrap();
            let a = flat_of_b(&b, beta, &Bump::STANDARD).unwrap();
            let (r, m, delta) = (1.0, 0.0, 0.5);
            let coarse = seminorm(&a, r, m, delta, 1).unwrap().value;
            let fine = seminorm(&a, r, m - (beta - delta) * r, beta, 1).unwrap().value;
            prop_assert!(coarse <= fine * (1.0 + 1e-12));
        }
    }
}
