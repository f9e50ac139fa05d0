//! Norm evaluators: `L^p`, Sobolev `H^{s,p}`, Zygmund `C^r_*` and the
//! FIO-Hardy norm in its canonical and alternative forms.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decomp::{
    square_function_weight, Bump, LocalizerFactory, LpFamily, ParabolicLocalizer,
    QuadratureSpec, SphereQuadrature,
};
use crate::error::{invalid, Result};
use crate::grid::{
    apply_multiplier, forward_dft, inverse_dft_owned, lattice_norm, sobolev_weight, Grid,
    GridFunction, Spectrum,
};
use crate::sum::pairwise_sum;

pub(crate) fn check_exponent(p: f64) -> Result<()> {
    if p > 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("p must lie in (1, inf), got {p}")))
    }
}

/// `Σ_j |v_j|^p` computed with the maximum factored out.
fn power_sum(values: &[Complex64], p: f64) -> (f64, f64) {
    let m = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if m == 0.0 {
        return (0.0, 0.0);
    }
    let terms: Vec<f64> = values.iter().map(|v| (v.norm() / m).powf(p)).collect();
    (m, pairwise_sum(&terms))
}

pub(crate) fn lp_norm_values(values: &[Complex64], p: f64, cell: f64) -> f64 {
    let (m, s) = power_sum(values, p);
    if m == 0.0 {
        0.0
    } else {
        m * (s * cell).powf(1.0 / p)
    }
}

/// Riemann-sum norm `(Σ_j |f(x_j)|^p (2π/N)^n)^{1/p}`.
pub fn lp_norm(f: &GridFunction, p: f64) -> Result<f64> {
    check_exponent(p)?;
    Ok(lp_norm_values(f.values(), p, f.grid().cell_volume()))
}

/// `‖⟨D⟩^s f‖_p`; `s = 0` takes the `lp_norm` path unchanged.
pub fn sobolev_norm(f: &GridFunction, s: f64, p: f64) -> Result<f64> {
    check_exponent(p)?;
    if s == 0.0 {
        return lp_norm(f, p);
    }
    let g = apply_multiplier(&sobolev_weight(f.grid(), Complex64::new(s, 0.0)), f)?;
    lp_norm(&g, p)
}

/// Per-shell breakdown of a Zygmund norm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZygmundReport {
    pub value: f64,
    pub argmax_shell: usize,
    /// `2^{jr}‖ψ_j(D)f‖_∞` for every shell, closure shell last.
    pub shell_terms: Vec<f64>,
}

/// `‖ψ_j(D)f‖_∞` for every shell of `lp`.
pub fn shell_sup_norms(spectrum: &Spectrum, lp: &LpFamily) -> Result<Vec<f64>> {
    spectrum.grid().ensure_same(lp.grid())?;
    Ok((0..lp.len())
        .into_par_iter()
        .map(|j| {
            let table = lp.shell(j);
            if table
                .iter()
                .zip(spectrum.coeffs())
                .all(|(w, c)| *w == 0.0 || *c == Complex64::new(0.0, 0.0))
            {
                return 0.0;
            }
            let coeffs = spectrum
                .coeffs()
                .iter()
                .zip(table)
                .map(|(c, w)| c * w)
                .collect();
            let spec = Spectrum::new(spectrum.grid(), coeffs).expect("same grid");
            inverse_dft_owned(spec).sup_norm()
        })
        .collect())
}

/// `sup_j 2^{jr}‖ψ_j(D)f‖_∞` over the representable shells.
pub fn zygmund_norm(f: &GridFunction, r: f64, lp: &LpFamily) -> Result<ZygmundReport> {
    zygmund_norm_spectrum(&forward_dft(f), r, lp)
}

pub fn zygmund_norm_spectrum(spectrum: &Spectrum, r: f64, lp: &LpFamily) -> Result<ZygmundReport> {
    let sups = shell_sup_norms(spectrum, lp)?;
    Ok(zygmund_from_shells(&sups, r))
}

pub(crate) fn zygmund_from_shells(sups: &[f64], r: f64) -> ZygmundReport {
    let shell_terms: Vec<f64> = sups
        .iter()
        .enumerate()
        .map(|(j, s)| (j as f64 * r).exp2() * s)
        .collect();
    let (argmax_shell, value) = shell_terms
        .iter()
        .copied()
        .enumerate()
        .fold((0, 0.0), |best, (j, v)| if v > best.1 { (j, v) } else { best });
    ZygmundReport {
        value,
        argmax_shell,
        shell_terms,
    }
}

/// Result of a norm evaluation with its additive pieces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub space: String,
    pub value: f64,
    /// `‖q(D)·f‖_p` term of the FIO-Hardy norms.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub low_frequency: Option<f64>,
    /// `(Σ_ω w_ω ‖φ_ω(D)·f‖_p^p)^{1/p}` term of the FIO-Hardy norms.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sphere_term: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shell_terms: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub argmax_shell: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
}

impl NormReport {
    fn scalar(space: &str, value: f64) -> Self {
        Self {
            space: space.to_string(),
            value,
            low_frequency: None,
            sphere_term: None,
            shell_terms: None,
            argmax_shell: None,
            s: None,
            p: None,
            r: None,
        }
    }

    pub fn lp(f: &GridFunction, p: f64) -> Result<Self> {
        let mut rep = Self::scalar("lp", lp_norm(f, p)?);
        rep.p = Some(p);
        Ok(rep)
    }

    pub fn sobolev(f: &GridFunction, s: f64, p: f64) -> Result<Self> {
        let mut rep = Self::scalar("sobolev", sobolev_norm(f, s, p)?);
        rep.s = Some(s);
        rep.p = Some(p);
        Ok(rep)
    }

    pub fn zygmund(f: &GridFunction, r: f64, lp: &LpFamily) -> Result<Self> {
        let z = zygmund_norm(f, r, lp)?;
        let mut rep = Self::scalar("zygmund", z.value);
        rep.shell_terms = Some(z.shell_terms);
        rep.argmax_shell = Some(z.argmax_shell);
        rep.r = Some(r);
        Ok(rep)
    }
}

/// Low-frequency cutoff `q(ξ) = φ(|ξ|/4)`: one for `|ξ| ≤ 2`, zero beyond 4.
pub fn low_frequency_cutoff(rho: f64) -> f64 {
    Bump::STANDARD.eval(rho / 4.0)
}

/// Discretized FIO-Hardy space on one grid: quadrature, localizers and cutoff.
#[derive(Clone, Debug)]
pub struct FioSpace {
    grid: Grid,
    quad: SphereQuadrature,
    localizers: Vec<ParabolicLocalizer>,
    low: Vec<f64>,
}

impl FioSpace {
    pub fn new(grid: &Grid, spec: &QuadratureSpec) -> Result<Self> {
        let quad = spec.build(grid.dim())?;
        let factory = LocalizerFactory::new(grid, spec.sigma_nodes_per_octave)?;
        let localizers = factory.build_all(&quad)?;
        Ok(Self::from_parts(grid, quad, localizers))
    }

    pub fn from_parts(grid: &Grid, quad: SphereQuadrature, localizers: Vec<ParabolicLocalizer>) -> Self {
        let low = grid
            .frequency_norms()
            .into_iter()
            .map(low_frequency_cutoff)
            .collect();
        Self {
            grid: grid.clone(),
            quad,
            localizers,
            low,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn quadrature(&self) -> &SphereQuadrature {
        &self.quad
    }

    pub fn localizers(&self) -> &[ParabolicLocalizer] {
        &self.localizers
    }

    pub fn low_cutoff(&self) -> &[f64] {
        &self.low
    }

    /// `G(k)²` from the localizers.
    pub fn square_function(&self) -> Vec<f64> {
        square_function_weight(&self.grid, &self.quad, &self.localizers).expect("built together")
    }

    fn weighted_spectrum(&self, f: &GridFunction, s: f64) -> Result<Spectrum> {
        self.grid.ensure_same(f.grid())?;
        let mut spec = forward_dft(f);
        if s != 0.0 {
            spec.apply(&sobolev_weight(&self.grid, Complex64::new(s, 0.0)))?;
        }
        Ok(spec)
    }

    fn low_term(&self, spec: &Spectrum, p: f64) -> f64 {
        let coeffs = spec
            .coeffs()
            .iter()
            .zip(&self.low)
            .map(|(c, q)| c * q)
            .collect();
        let g = inverse_dft_owned(Spectrum::new(&self.grid, coeffs).expect("same grid"));
        lp_norm_values(g.values(), p, self.grid.cell_volume())
    }

    /// `‖φ_ω(D)g‖_p` for every quadrature direction, where `ĝ = spec`.
    pub fn directional_norms(&self, spec: &Spectrum, p: f64) -> Vec<f64> {
        let cell = self.grid.cell_volume();
        self.localizers
            .par_iter()
            .map(|loc| {
                let mut coeffs = vec![Complex64::new(0.0, 0.0); self.grid.len()];
                let mut any = false;
                for &(i, v) in loc.entries() {
                    let c = spec.coeffs()[i as usize];
                    if c != Complex64::new(0.0, 0.0) {
                        any = true;
                    }
                    coeffs[i as usize] = c * v;
                }
                if !any {
                    return 0.0;
                }
                let g = inverse_dft_owned(Spectrum::new(&self.grid, coeffs).expect("same grid"));
                lp_norm_values(g.values(), p, cell)
            })
            .collect()
    }

    fn sphere_term(&self, spec: &Spectrum, p: f64) -> f64 {
        let norms = self.directional_norms(spec, p);
        let m = norms.iter().copied().fold(0.0, f64::max);
        if m == 0.0 {
            return 0.0;
        }
        let terms: Vec<f64> = norms
            .iter()
            .zip(self.quad.weights())
            .map(|(v, w)| w * (v / m).powf(p))
            .collect();
        m * pairwise_sum(&terms).powf(1.0 / p)
    }

    fn report(&self, space: &str, low: f64, sphere: f64, s: f64, p: f64) -> NormReport {
        let mut rep = NormReport::scalar(space, low + sphere);
        rep.low_frequency = Some(low);
        rep.sphere_term = Some(sphere);
        rep.s = Some(s);
        rep.p = Some(p);
        rep
    }

    /// `‖q(D)⟨D⟩^s f‖_p + (Σ_ω w_ω ‖φ_ω(D)⟨D⟩^s f‖_p^p)^{1/p}`.
    pub fn hfio_norm(&self, f: &GridFunction, s: f64, p: f64) -> Result<NormReport> {
        check_exponent(p)?;
        let spec = self.weighted_spectrum(f, s)?;
        let low = self.low_term(&spec, p);
        let sphere = self.sphere_term(&spec, p);
        Ok(self.report("hfio", low, sphere, s, p))
    }

    /// `‖q(D)f‖_p + (Σ_ω w_ω ‖φ_ω(D)f‖_{H^{s,p}}^p)^{1/p}`.
    pub fn hfio_norm_alt(&self, f: &GridFunction, s: f64, p: f64) -> Result<NormReport> {
        check_exponent(p)?;
        let plain = self.weighted_spectrum(f, 0.0)?;
        let low = self.low_term(&plain, p);
        let sphere = if s == 0.0 {
            self.sphere_term(&plain, p)
        } else {
            self.sphere_term(&self.weighted_spectrum(f, s)?, p)
        };
        Ok(self.report("hfio-alt", low, sphere, s, p))
    }

    /// Shortcut for the scalar value of [`FioSpace::hfio_norm`].
    pub fn norm(&self, f: &GridFunction, s: f64, p: f64) -> Result<f64> {
        Ok(self.hfio_norm(f, s, p)?.value)
    }

    /// Value and real gradient of `f ↦ hfio_norm(f, s, p)`.
    ///
    /// The gradient `g` satisfies `d/dt N(f + t h) = Re⟨h, g⟩` at `t = 0` for the
    /// grid inner product `⟨u, v⟩ = Σ u·conj(v)(2π/N)^n`; it is exact wherever
    /// the norm is differentiable.
    pub fn norm_and_gradient(&self, f: &GridFunction, s: f64, p: f64) -> Result<(f64, GridFunction)> {
        check_exponent(p)?;
        self.grid.ensure_same(f.grid())?;
        let weight: Vec<f64> = if s == 0.0 {
            vec![1.0; self.grid.len()]
        } else {
            self.grid
                .frequency_norms()
                .iter()
                .map(|&rho| (1.0 + rho * rho).powf(s / 2.0))
                .collect()
        };
        let spec = forward_dft(f);
        let cell = self.grid.cell_volume();

        // For a real multiplier L = m(D), ‖Lf‖_p has gradient
        // ‖h‖_p^{1−p} L(|h|^{p−2}h) with h = Lf; L is self-adjoint in the grid
        // inner product.
        let term = |mult: &dyn Fn(usize) -> f64| -> (f64, Vec<Complex64>) {
            let coeffs: Vec<Complex64> = spec
                .coeffs()
                .iter()
                .enumerate()
                .map(|(i, c)| c * mult(i))
                .collect();
            let h = inverse_dft_owned(Spectrum::new(&self.grid, coeffs).expect("same grid"));
            let norm = lp_norm_values(h.values(), p, cell);
            if norm == 0.0 {
                return (0.0, vec![Complex64::new(0.0, 0.0); self.grid.len()]);
            }
            let dual: Vec<Complex64> = h
                .values()
                .iter()
                .map(|v| {
                    let a = v.norm();
                    if a == 0.0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        v * (a / norm).powf(p - 2.0) / norm
                    }
                })
                .collect();
            let dual = GridFunction::new(&self.grid, dual).expect("same grid");
            let mut dspec = forward_dft(&dual);
            for (i, c) in dspec.coeffs_mut().iter_mut().enumerate() {
                *c *= mult(i);
            }
            (norm, inverse_dft_owned(dspec).into_values())
        };

        let (low, low_grad) = term(&|i| self.low[i] * weight[i]);
        let parts: Vec<(f64, Vec<Complex64>)> = self
            .localizers
            .par_iter()
            .map(|loc| {
                let mut m = vec![0.0; self.grid.len()];
                for &(i, v) in loc.entries() {
                    m[i as usize] = v * weight[i as usize];
                }
                term(&|i| m[i])
            })
            .collect();
        let norms: Vec<f64> = parts.iter().map(|t| t.0).collect();
        let big = norms.iter().copied().fold(0.0, f64::max);
        let mut grad = low_grad;
        let mut sphere = 0.0;
        if big > 0.0 {
            let terms: Vec<f64> = norms
                .iter()
                .zip(self.quad.weights())
                .map(|(v, w)| w * (v / big).powf(p))
                .collect();
            sphere = big * pairwise_sum(&terms).powf(1.0 / p);
            // d S = S^{1−p} Σ w ‖L_ω f‖^{p−1} d‖L_ω f‖.
            for ((norm_w, g), w) in norms.iter().zip(&parts).map(|(n, t)| (n, &t.1)).zip(self.quad.weights()) {
                if *norm_w == 0.0 {
                    continue;
                }
                let coef = w * (norm_w / sphere).powf(p - 1.0);
                for (acc, v) in grad.iter_mut().zip(g) {
                    *acc += v * coef;
                }
            }
        }
        let grad = GridFunction::new(&self.grid, grad)?;
        Ok((low + sphere, grad))
    }
}

/// Quadrature term of the p = 2, s = 0 norm via the square function:
/// `‖G(D)f‖₂ = ((2π)^{-n} Σ_k G(k)²|f̂(k)|²)^{1/2}`.
pub fn square_function_norm(space: &FioSpace, f: &GridFunction) -> Result<f64> {
    space.grid().ensure_same(f.grid())?;
    let g2 = space.square_function();
    let spec = forward_dft(f);
    let terms: Vec<f64> = spec
        .coeffs()
        .iter()
        .zip(&g2)
        .map(|(c, g)| g * c.norm_sqr())
        .collect();
    let scale = (2.0 * std::f64::consts::PI).powi(-(f.grid().dim() as i32));
    Ok((pairwise_sum(&terms) * scale).sqrt())
}

/// Lattice frequencies inside `[lo, hi]` in radius.
pub fn shell_indices(grid: &Grid, lo: f64, hi: f64) -> Vec<usize> {
    (0..grid.len())
        .filter(|&i| {
            let rho = lattice_norm(&grid.lattice(i));
            rho >= lo && rho <= hi
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Lattice;
    use rand::{Rng, SeedableRng};
    use rand_xoshiro::SplitMix64;
    use std::f64::consts::PI;

    fn band_limited(grid: &Grid, kmax: i64, seed: u64) -> GridFunction {
        let mut rng = SplitMix64::seed_from_u64(seed);
        let mut modes = Vec::new();
        for a in -kmax..=kmax {
            for b in -kmax..=kmax {
                modes.push(([a, b, 0], Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))));
            }
        }
        GridFunction::from_fn(grid, |x| {
            modes
                .iter()
                .map(|(k, c)| c * Complex64::from_polar(1.0, k[0] as f64 * x[0] + k[1] as f64 * x[1]))
                .sum()
        })
    }

    #[test]
    fn lp_examples() {
        let grid = Grid::new(2, 16).unwrap();
        let one = GridFunction::constant(&grid, 1.0.into());
        assert!((lp_norm(&one, 2.0).unwrap() - 2.0 * PI).abs() < 1e-12);
        assert!((lp_norm(&one, 4.0).unwrap() - (4.0 * PI * PI).powf(0.25)).abs() < 1e-12);
        assert_eq!(lp_norm(&GridFunction::zeros(&grid), 3.0).unwrap(), 0.0);
        assert!(lp_norm(&one, 1.0).is_err());
        assert!(lp_norm(&one, f64::INFINITY).is_err());
    }

    #[test]
    fn sobolev_examples() {
        let grid = Grid::new(2, 32).unwrap();
        let f = GridFunction::plane_wave(&grid, &[3, 0, 0]);
        assert!((sobolev_norm(&f, 2.0, 2.0).unwrap() - 20.0 * PI).abs() < 1e-10);
        let g = band_limited(&grid, 6, 5);
        assert_eq!(sobolev_norm(&g, 0.0, 3.0).unwrap(), lp_norm(&g, 3.0).unwrap());
        assert!(sobolev_norm(&g, 1.0, 2.0).unwrap() >= sobolev_norm(&g, 0.0, 2.0).unwrap());
    }

    #[test]
    fn zygmund_examples() {
        let grid = Grid::new(2, 64).unwrap();
        let lp = LpFamily::new(&grid);
        let one = GridFunction::constant(&grid, 1.0.into());
        for r in [-1.0, 0.0, 2.5] {
            let z = zygmund_norm(&one, r, &lp).unwrap();
            assert_eq!(z.value, 1.0);
            assert_eq!(z.argmax_shell, 0);
        }
        let k: Lattice = [24, 0, 0];
        let wave = GridFunction::plane_wave(&grid, &k);
        let z = zygmund_norm(&wave, 1.0, &lp).unwrap();
        let i = grid.index_of(&k);
        let expected = (32.0 * lp.shell(5)[i]).max(64.0 * lp.shell(6)[i]);
        assert!((z.value - expected).abs() < 1e-12 * expected);

        let f = band_limited(&grid, 12, 9);
        assert!(zygmund_norm(&f, 0.5, &lp).unwrap().value <= zygmund_norm(&f, 1.0, &lp).unwrap().value);
    }

    #[test]
    fn hfio_zero_and_alt_agreement() {
        let grid = Grid::new(2, 32).unwrap();
        let space = FioSpace::new(&grid, &QuadratureSpec { sphere_nodes: 64, ..QuadratureSpec::default_for(2) }).unwrap();
        let zero = GridFunction::zeros(&grid);
        assert_eq!(space.hfio_norm(&zero, 0.5, 3.0).unwrap().value, 0.0);
        assert_eq!(space.hfio_norm_alt(&zero, 0.5, 3.0).unwrap().value, 0.0);
        let f = band_limited(&grid, 8, 1);
        let a = space.hfio_norm(&f, 0.0, 1.7).unwrap();
        let b = space.hfio_norm_alt(&f, 0.0, 1.7).unwrap();
        assert_eq!(a.value, b.value);
    }

    #[test]
    fn square_function_cross_check() {
        let grid = Grid::new(2, 32).unwrap();
        let space = FioSpace::new(&grid, &QuadratureSpec { sphere_nodes: 64, ..QuadratureSpec::default_for(2) }).unwrap();
        let f = band_limited(&grid, 10, 2);
        let rep = space.hfio_norm(&f, 0.0, 2.0).unwrap();
        let g = square_function_norm(&space, &f).unwrap();
        assert!((rep.sphere_term.unwrap() - g).abs() <= 1e-8 * g);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let grid = Grid::new(2, 16).unwrap();
        let space = FioSpace::new(&grid, &QuadratureSpec { sphere_nodes: 32, ..QuadratureSpec::default_for(2) }).unwrap();
        let f = band_limited(&grid, 5, 3);
        let h = band_limited(&grid, 5, 4);
        for (s, p) in [(0.0, 1.5), (0.5, 3.0), (-0.3, 2.0)] {
            let (v, g) = space.norm_and_gradient(&f, s, p).unwrap();
            assert!((v - space.norm(&f, s, p).unwrap()).abs() < 1e-10 * v);
            let t = 1e-6;
            let plus = space.norm(&f.axpy(t.into(), &h).unwrap(), s, p).unwrap();
            let minus = space.norm(&f.axpy((-t).into(), &h).unwrap(), s, p).unwrap();
            let fd = (plus - minus) / (2.0 * t);
            let an = h.inner(&g).unwrap().re;
            assert!((fd - an).abs() < 1e-5 * an.abs().max(1.0), "s={s} p={p}: {fd} vs {an}");
        }
    }
}
