//! `a(x,D)f(x) = (2π)^{−n} Σ_k e^{ik·x} a(x,k) f̂(k)` on the grid: direct and
//! separable application, adjoints and `L²` operator norms.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng as _, SeedableRng};
use rand_xoshiro::SplitMix64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::grid::{forward_dft, inverse_dft_owned, Grid, GridFunction, Spectrum};
use crate::spaces::FioSpace;
use crate::symbols::{DenseSymbol, EtaProfile, RoughSymbol};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Evaluation strategy for `a(x,D)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ApplyPath {
    /// Lattice sum over every `(x, k)` pair, `O(N^{2n})`.
    Direct,
    /// `Σ_m b_m · IDFT(e_m f̂)`, `O(K N^n log N)`.
    Separable,
}

/// A linear map on grid functions together with its adjoint for the grid
/// inner product.
pub trait LinearOperator: Sync {
    fn grid(&self) -> &Grid;
    fn apply(&self, f: &GridFunction) -> Result<GridFunction>;
    fn adjoint(&self, g: &GridFunction) -> Result<GridFunction>;
}

enum Prepared {
    Dense(DenseSymbol),
    Separable {
        terms: Vec<(GridFunction, Vec<Complex64>)>,
        /// Terms whose `b` is constant and whose profile is identically one.
        identity: Vec<bool>,
    },
}

/// `a(x,D)` with the per-path data precomputed.
pub struct OperatorHandle {
    grid: Grid,
    path: ApplyPath,
    prepared: Prepared,
    /// `e^{2πi m/N}` for `m = 0..N`.
    roots: Vec<Complex64>,
}

fn unit_roots(n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|m| Complex64::from_polar(1.0, std::f64::consts::TAU * m as f64 / n as f64))
        .collect()
}

impl OperatorHandle {
    /// Separable symbols default to the separable path, dense ones to the
    /// direct path. Requesting the direct path for a separable symbol
    /// tabulates it under the dense memory guard.
    pub fn new(a: &RoughSymbol, path: Option<ApplyPath>) -> Result<Self> {
        let grid = a.grid().clone();
        let path = path.unwrap_or(match a {
            RoughSymbol::Dense(_) => ApplyPath::Direct,
            RoughSymbol::Separable(_) => ApplyPath::Separable,
        });
        let prepared = match (path, a) {
            (ApplyPath::Direct, _) => Prepared::Dense(a.to_dense()?),
            (ApplyPath::Separable, RoughSymbol::Separable(s)) => {
                let tables = s.eta_tables();
                let identity = s
                    .terms()
                    .iter()
                    .map(|t| t.b.is_constant() && t.e == EtaProfile::one())
                    .collect();
                Prepared::Separable {
                    terms: s.terms().iter().map(|t| t.b.clone()).zip(tables).collect(),
                    identity,
                }
            }
            (ApplyPath::Separable, RoughSymbol::Dense(d)) => {
                // Columns of the η-major table give one term per frequency.
                let len = grid.len();
                let mut terms = Vec::with_capacity(len);
                for eta in 0..len {
                    let mut e = vec![ZERO; len];
                    e[eta] = Complex64::new(1.0, 0.0);
                    terms.push((GridFunction::new(&grid, d.column(eta).to_vec())?, e));
                }
                Prepared::Separable {
                    identity: vec![false; len],
                    terms,
                }
            }
        };
        Ok(Self {
            roots: unit_roots(grid.size()),
            grid,
            path,
            prepared,
        })
    }

    pub fn path(&self) -> ApplyPath {
        self.path
    }

    /// `e^{ik·x_i}` by exact index arithmetic.
    #[inline]
    fn phase(&self, x: usize, k: usize) -> Complex64 {
        let n = self.grid.size();
        let (mut xi, mut ki, mut acc) = (x, k, 0usize);
        for _ in 0..self.grid.dim() {
            let kd = ki % n;
            let xd = xi % n;
            acc += kd * xd;
            xi /= n;
            ki /= n;
        }
        self.roots[acc % n]
    }

    fn apply_direct(&self, d: &DenseSymbol, f: &GridFunction) -> GridFunction {
        let len = self.grid.len();
        let fhat = forward_dft(f);
        let coeffs = fhat.coeffs();
        let norm = (std::f64::consts::TAU).powi(self.grid.dim() as i32).recip();
        let data = d.data();
        let values = (0..len)
            .into_par_iter()
            .map(|i| {
                let mut acc = ZERO;
                for (k, c) in coeffs.iter().enumerate() {
                    if *c != ZERO {
                        acc += self.phase(i, k) * data[k * len + i] * c;
                    }
                }
                acc * norm
            })
            .collect();
        GridFunction::new(&self.grid, values).expect("same grid")
    }

    fn adjoint_direct(&self, d: &DenseSymbol, g: &GridFunction) -> GridFunction {
        let len = self.grid.len();
        let cell = self.grid.cell_volume();
        let gv = g.values();
        let coeffs = (0..len)
            .into_par_iter()
            .map(|k| {
                let col = d.column(k);
                let mut acc = ZERO;
                for i in 0..len {
                    acc += (col[i] * self.phase(i, k)).conj() * gv[i];
                }
                acc * cell
            })
            .collect();
        inverse_dft_owned(Spectrum::new(&self.grid, coeffs).expect("same grid"))
    }

    fn apply_separable(&self, terms: &[(GridFunction, Vec<Complex64>)], identity: &[bool], f: &GridFunction, adjoint: bool) -> GridFunction {
        let fhat = if adjoint { None } else { Some(forward_dft(f)) };
        let parts: Vec<Option<GridFunction>> = terms
            .par_iter()
            .zip(identity)
            .map(|((b, e), &id)| {
                if id {
                    let c = b.values()[0];
                    return Some(if adjoint { f.scale(c.conj()) } else { f.scale(c) });
                }
                if adjoint {
                    let mut h = f.clone();
                    for (v, bv) in h.values_mut().iter_mut().zip(b.values()) {
                        *v *= bv.conj();
                    }
                    let mut spec = forward_dft(&h);
                    if e.iter().all(|c| *c == ZERO) {
                        return None;
                    }
                    for (c, w) in spec.coeffs_mut().iter_mut().zip(e) {
                        *c *= w.conj();
                    }
                    Some(inverse_dft_owned(spec))
                } else {
                    let fh = fhat.as_ref().expect("forward spectrum");
                    if e.iter().zip(fh.coeffs()).all(|(w, c)| *w == ZERO || *c == ZERO) {
                        return None;
                    }
                    let coeffs = fh.coeffs().iter().zip(e).map(|(c, w)| c * w).collect();
                    let mut g = inverse_dft_owned(Spectrum::new(&self.grid, coeffs).expect("same grid"));
                    for (v, bv) in g.values_mut().iter_mut().zip(b.values()) {
                        *v *= bv;
                    }
                    Some(g)
                }
            })
            .collect();
        let mut out = GridFunction::zeros(&self.grid);
        for p in parts.into_iter().flatten() {
            for (o, v) in out.values_mut().iter_mut().zip(p.values()) {
                *o += v;
            }
        }
        out
    }
}

impl LinearOperator for OperatorHandle {
    fn grid(&self) -> &Grid {
        &self.grid
    }

    fn apply(&self, f: &GridFunction) -> Result<GridFunction> {
        self.grid.ensure_same(f.grid())?;
        Ok(match &self.prepared {
            Prepared::Dense(d) => self.apply_direct(d, f),
            Prepared::Separable { terms, identity } => self.apply_separable(terms, identity, f, false),
        })
    }

    fn adjoint(&self, g: &GridFunction) -> Result<GridFunction> {
        self.grid.ensure_same(g.grid())?;
        Ok(match &self.prepared {
            Prepared::Dense(d) => self.adjoint_direct(d, g),
            Prepared::Separable { terms, identity } => self.apply_separable(terms, identity, g, true),
        })
    }
}

/// `a(x,D)f` on the representation's natural path.
pub fn apply(a: &RoughSymbol, f: &GridFunction) -> Result<GridFunction> {
    OperatorHandle::new(a, None)?.apply(f)
}

/// `a(x,D)f` on an explicit path.
pub fn apply_with(a: &RoughSymbol, f: &GridFunction, path: ApplyPath) -> Result<GridFunction> {
    OperatorHandle::new(a, Some(path))?.apply(f)
}

/// Conjugate transpose of `f ↦ a(x,D)f` for the grid inner product.
pub fn adjoint_apply(a: &RoughSymbol, g: &GridFunction) -> Result<GridFunction> {
    OperatorHandle::new(a, None)?.adjoint(g)
}

/// Outcome of an operator-norm estimate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OpNormEstimate {
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

const BLOCK: usize = 4;
const KRYLOV_DEPTH: usize = 8;
const MAX_ITER: usize = 200;
const REL_TOL: f64 = 1e-8;

/// Orthonormalizes `vs` against `basis` and itself, dropping dependent vectors.
fn orthonormalize(basis: &[GridFunction], vs: Vec<GridFunction>) -> Vec<GridFunction> {
    let mut kept: Vec<GridFunction> = Vec::with_capacity(vs.len());
    for mut v in vs {
        let before = v.inner(&v).expect("same grid").re.sqrt();
        for _ in 0..2 {
            for q in basis.iter().chain(&kept) {
                let c = v.inner(q).expect("same grid");
                v = v.axpy(-c, q).expect("same grid");
            }
        }
        let n = v.inner(&v).expect("same grid").re.sqrt();
        if n > 1e-10 * before && n > 1e-300 {
            kept.push(v.scale(Complex64::new(1.0 / n, 0.0)));
        }
    }
    kept
}

/// Largest singular value of `op` by restarted block Krylov iteration on
/// `op*op` with Rayleigh–Ritz extraction; the result is a lower bound of the
/// true norm.
///
/// Each outer iteration spans `BLOCK·(KRYLOV_DEPTH+1)` vectors and restarts
/// from the leading Ritz vectors. Iteration stops once the top Ritz value
/// changes by less than `1e−8` relative, or after 200 restarts.
pub fn operator_norm(op: &dyn LinearOperator, seed: u64) -> Result<OpNormEstimate> {
    let grid = op.grid().clone();
    let normal = |v: &GridFunction| -> Result<GridFunction> { op.adjoint(&op.apply(v)?) };
    let mut rng = SplitMix64::seed_from_u64(seed);
    let start: Vec<GridFunction> = (0..BLOCK.min(grid.len()))
        .map(|_| {
            let vals = (0..grid.len())
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            GridFunction::new(&grid, vals).expect("same grid")
        })
        .collect();
    let mut q = orthonormalize(&[], start);
    let mut prev = f64::NAN;
    for it in 1..=MAX_ITER {
        let mut basis: Vec<GridFunction> = Vec::new();
        let mut images: Vec<GridFunction> = Vec::new();
        let mut block = q;
        for depth in 0..=KRYLOV_DEPTH {
            let t: Vec<GridFunction> = block.iter().map(&normal).collect::<Result<_>>()?;
            basis.extend(block);
            images.extend(t.iter().cloned());
            if depth == KRYLOV_DEPTH || basis.len() >= grid.len() {
                break;
            }
            block = orthonormalize(&basis, t);
            if block.is_empty() {
                break;
            }
        }
        let k = basis.len();
        let h = DMatrix::from_fn(k, k, |i, j| {
            let a = images[j].inner(&basis[i]).expect("same grid");
            let b = images[i].inner(&basis[j]).expect("same grid").conj();
            (a + b) * 0.5
        });
        let eig = SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let value = eig.eigenvalues[order[0]].max(0.0).sqrt();
        if value == 0.0 || (value - prev).abs() <= REL_TOL * value || k >= grid.len() {
            return Ok(OpNormEstimate {
                value,
                iterations: it,
                converged: true,
            });
        }
        prev = value;
        let ritz: Vec<GridFunction> = order
            .iter()
            .take(BLOCK)
            .map(|&col| {
                let mut w = GridFunction::zeros(&grid);
                for (i, v) in basis.iter().enumerate() {
                    w = w.axpy(eig.eigenvectors[(i, col)], v).expect("same grid");
                }
                w
            })
            .collect();
        q = orthonormalize(&[], ritz);
    }
    Ok(OpNormEstimate {
        value: prev,
        iterations: MAX_ITER,
        converged: false,
    })
}

/// `‖a(x,D)‖_{L²→L²}` of the discrete operator.
pub fn opnorm_l2(a: &RoughSymbol) -> Result<OpNormEstimate> {
    operator_norm(&OperatorHandle::new(a, None)?, 0x5eed)
}

/// `‖a(x,D)f‖_{H^{s,p}_{FIO}} / ‖f‖_{H^{s+m+ℓ,p}_{FIO}}`, or `None` when the
/// denominator is below `1e−13`.
pub fn bound_ratio(
    a: &RoughSymbol,
    f: &GridFunction,
    s: f64,
    p: f64,
    m_order: f64,
    extra_loss: f64,
    space: &FioSpace,
) -> Result<Option<f64>> {
    let handle = OperatorHandle::new(a, None)?;
    bound_ratio_with(&handle, f, s, p, m_order, extra_loss, space)
}

/// [`bound_ratio`] for a prepared operator.
pub fn bound_ratio_with(
    op: &dyn LinearOperator,
    f: &GridFunction,
    s: f64,
    p: f64,
    m_order: f64,
    extra_loss: f64,
    space: &FioSpace,
) -> Result<Option<f64>> {
    let den = space.norm(f, s + m_order + extra_loss, p)?;
    if den <= 1e-13 {
        return Ok(None);
    }
    let num = space.norm(&op.apply(f)?, s, p)?;
    Ok(Some(num / den))
}
