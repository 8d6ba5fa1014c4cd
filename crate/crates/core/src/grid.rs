//! Band-limited periodic grid functions: the numerical stand-in for
//! Schwartz space, with the Fourier pair normalized so that
//!
//!   fcheck(xi) = (2pi)^-n * integral f(x) e^{-i<xi,x>} dx      (analysis)
//!   f(x)      = sum_k fcheck(xi_k) e^{i<xi_k,x>} * dualcell    (synthesis)
//!
//! realized as Riemann sums on the box [-L, L)^n with N samples per axis
//! and the dual lattice xi_k = (pi/L) k, k in [-N/2, N/2).

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{MoyalError, Result};
use crate::planewave::PlaneWaveSum;

/// Hard cap on total sample count, bounding memory for dense grids.
pub const MAX_TOTAL_SAMPLES: usize = 1 << 22;

/// Absolute tolerance when snapping frequencies to the dual lattice.
pub const LATTICE_SNAP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Dimension of the underlying space.
    pub n: usize,
    /// Box half-width per axis.
    pub l: f64,
    /// Samples per axis, even.
    pub points: usize,
}

impl GridSpec {
    pub fn new(n: usize, l: f64, points: usize) -> Result<Self> {
        if points == 0 || !points.is_multiple_of(2) {
            return Err(MoyalError::Parse(format!(
                "samples per axis must be even and positive, got {points}"
            )));
        }
        if l <= 0.0 {
            return Err(MoyalError::Parse(format!("box half-width must be positive, got {l}")));
        }
        let total = points.checked_pow(n as u32).unwrap_or(usize::MAX);
        if total > MAX_TOTAL_SAMPLES {
            return Err(MoyalError::CarrierTooLarge {
                dim: total,
                cap: MAX_TOTAL_SAMPLES,
            });
        }
        Ok(Self { n, l, points })
    }

    /// Box size adapted to sigma so that half-shifts by sigma_sharp of any
    /// dual-lattice frequency land on whole grid cells: L^2 = s_min pi N / 4.
    /// Every Poisson entry that is an integer multiple of s_min then yields
    /// exact lattice shifts, which makes the grid Heisenberg representation
    /// satisfy the CCR phase law to machine precision.
    pub fn commensurate(n: usize, points: usize, s_min: f64) -> Result<Self> {
        let l = (s_min * std::f64::consts::PI * points as f64 / 4.0).sqrt();
        Self::new(n, l, points)
    }

    pub fn total_samples(&self) -> usize {
        self.points.pow(self.n as u32)
    }

    /// Sample spacing 2L/N.
    pub fn dx(&self) -> f64 {
        2.0 * self.l / self.points as f64
    }

    /// Dual lattice spacing pi/L.
    pub fn dxi(&self) -> f64 {
        std::f64::consts::PI / self.l
    }

    /// Position cell volume (2L/N)^n.
    pub fn cell_volume(&self) -> f64 {
        self.dx().powi(self.n as i32)
    }

    /// Dual cell volume (pi/L)^n.
    pub fn dual_cell_volume(&self) -> f64 {
        self.dxi().powi(self.n as i32)
    }

    /// Coordinate of sample index j along one axis: -L + j dx.
    pub fn coord(&self, j: usize) -> f64 {
        -self.l + j as f64 * self.dx()
    }

    /// Signed dual index for FFT-ordered index: 0..N/2-1 then -N/2..-1.
    pub fn dual_index(&self, idx: usize) -> i64 {
        let np = self.points as i64;
        let idx = idx as i64;
        if idx < np / 2 {
            idx
        } else {
            idx - np
        }
    }

    /// Frequency of an FFT-ordered index along one axis.
    pub fn freq(&self, idx: usize) -> f64 {
        self.dual_index(idx) as f64 * self.dxi()
    }

    /// Decomposes a flat row-major index (axis 0 slowest) into per-axis indices.
    pub fn unflatten(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0usize; self.n];
        for a in (0..self.n).rev() {
            idx[a] = flat % self.points;
            flat /= self.points;
        }
        idx
    }

    pub fn flatten(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.points + i)
    }

    /// Position vector of a flat sample index.
    pub fn position(&self, flat: usize) -> Vec<f64> {
        self.unflatten(flat).iter().map(|&j| self.coord(j)).collect()
    }

    /// Frequency vector of a flat spectral index.
    pub fn frequency(&self, flat: usize) -> Vec<f64> {
        self.unflatten(flat).iter().map(|&j| self.freq(j)).collect()
    }

    /// Snaps a frequency vector to signed dual indices; errors when any
    /// component is farther than `LATTICE_SNAP_TOL` from the lattice or
    /// outside the resolved band.
    pub fn lattice_indices(&self, freq: &[f64]) -> Result<Vec<i64>> {
        if freq.len() != self.n {
            return Err(MoyalError::DimensionMismatch {
                expected: self.n,
                got: freq.len(),
            });
        }
        let mut ks = Vec::with_capacity(self.n);
        for &f in freq {
            let kf = f / self.dxi();
            let k = kf.round();
            if (kf - k).abs() * self.dxi() > LATTICE_SNAP_TOL {
                return Err(MoyalError::OffLattice(freq.to_vec(), LATTICE_SNAP_TOL));
            }
            let half = (self.points / 2) as i64;
            let ki = k as i64;
            if ki < -half || ki >= half {
                return Err(MoyalError::OffLattice(freq.to_vec(), LATTICE_SNAP_TOL));
            }
            ks.push(ki);
        }
        Ok(ks)
    }

    /// FFT-ordered flat index of a signed dual index vector.
    pub fn flat_of_dual(&self, ks: &[i64]) -> usize {
        let np = self.points as i64;
        ks.iter()
            .fold(0usize, |acc, &k| {
                let idx = if k < 0 { k + np } else { k } as usize;
                acc * self.points + idx
            })
    }
}

/// Complex samples over the position lattice of a `GridSpec`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub spec: GridSpec,
    pub values: Vec<Complex64>,
}

/// Coefficients over the dual lattice, FFT-ordered along each axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub spec: GridSpec,
    pub coeffs: Vec<Complex64>,
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(len)
        } else {
            p.plan_fft_forward(len)
        }
    })
}

/// In-place FFT along every axis of a row-major hypercube.
fn fft_all_axes(spec: &GridSpec, data: &mut [Complex64], inverse: bool) {
    let np = spec.points;
    let fft = plan(np, inverse);
    let mut line = vec![Complex64::new(0.0, 0.0); np];
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    let total = spec.total_samples();
    for axis in 0..spec.n {
        let stride = np.pow((spec.n - 1 - axis) as u32);
        let lines = total / np;
        for li in 0..lines {
            // Base offset of this line: distribute li over the non-axis dims.
            let block = stride * np;
            let outer = li / stride;
            let inner = li % stride;
            let base = outer * block + inner;
            for (s, slot) in line.iter_mut().enumerate() {
                *slot = data[base + s * stride];
            }
            fft.process_with_scratch(&mut line, &mut scratch);
            for (s, slot) in line.iter().enumerate() {
                data[base + s * stride] = *slot;
            }
        }
    }
}

/// Parity (-1)^(sum of signed dual indices) for the centered-box phase.
fn checkerboard_sign(spec: &GridSpec, flat: usize) -> f64 {
    let idx = spec.unflatten(flat);
    let s: i64 = idx.iter().map(|&j| spec.dual_index(j)).sum();
    if s % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

impl GridFunction {
    pub fn zeros(spec: GridSpec) -> Self {
        Self {
            values: vec![Complex64::new(0.0, 0.0); spec.total_samples()],
            spec,
        }
    }

    pub fn from_fn(spec: GridSpec, mut f: impl FnMut(&[f64]) -> Complex64) -> Self {
        let values = (0..spec.total_samples())
            .map(|flat| f(&spec.position(flat)))
            .collect();
        Self { spec, values }
    }

    /// Analysis transform: the inverse Fourier transform in the
    /// (2pi)^-n convention,
    /// fcheck(xi_k) = (2pi)^-n sum_j f(x_j) e^{-i<xi_k,x_j>} (dx)^n.
    pub fn fourier_inverse(&self) -> Spectrum {
        let spec = self.spec;
        let mut data = self.values.clone();
        fft_all_axes(&spec, &mut data, false);
        let scale = spec.cell_volume() / (2.0 * std::f64::consts::PI).powi(spec.n as i32);
        for (flat, c) in data.iter_mut().enumerate() {
            *c *= scale * checkerboard_sign(&spec, flat);
        }
        Spectrum { spec, coeffs: data }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, c| m.max(c.norm()))
    }

    /// Discrete L2 norm: sqrt(sum |f|^2 dx^n).
    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self.values.iter().map(|c| c.norm_sqr()).sum();
        (s * self.spec.cell_volume()).sqrt()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_spec(other)?;
        Ok(Self {
            spec: self.spec,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_spec(other)?;
        Ok(Self {
            spec: self.spec,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            spec: self.spec,
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    /// Pointwise product of sample arrays.
    pub fn pointwise_mul(&self, other: &Self) -> Result<Self> {
        self.check_spec(other)?;
        Ok(Self {
            spec: self.spec,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b)
                .collect(),
        })
    }

    /// Complex conjugate of the samples (the involution of the function algebra).
    pub fn involution(&self) -> Self {
        Self {
            spec: self.spec,
            values: self.values.iter().map(|c| c.conj()).collect(),
        }
    }

    /// Multiplication by the coordinate x^axis.
    pub fn x_multiply(&self, axis: usize) -> Result<Self> {
        if axis >= self.spec.n {
            return Err(MoyalError::DimensionMismatch {
                expected: self.spec.n,
                got: axis,
            });
        }
        let spec = self.spec;
        let stride = spec.points.pow((spec.n - 1 - axis) as u32);
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(flat, v)| {
                let j = (flat / stride) % spec.points;
                v * spec.coord(j)
            })
            .collect();
        Ok(Self { spec, values })
    }

    /// Spectral derivative along `axis`.
    pub fn partial_deriv(&self, axis: usize) -> Result<Self> {
        if axis >= self.spec.n {
            return Err(MoyalError::DimensionMismatch {
                expected: self.spec.n,
                got: axis,
            });
        }
        let mut sp = self.fourier_inverse();
        let spec = self.spec;
        let stride = spec.points.pow((spec.n - 1 - axis) as u32);
        for (flat, c) in sp.coeffs.iter_mut().enumerate() {
            let j = (flat / stride) % spec.points;
            *c *= Complex64::new(0.0, spec.freq(j));
        }
        Ok(sp.fourier_forward())
    }

    /// Schwartz seminorm s_{p,q}(f) = sum over |alpha| <= p, |beta| <= q of
    /// the grid maximum of |x^alpha d_beta f|, derivatives taken spectrally.
    pub fn seminorm(&self, p: usize, q: usize) -> f64 {
        let spec = self.spec;
        let alphas = multi_indices(spec.n, p);
        let betas = multi_indices(spec.n, q);
        // Precompute per-axis coordinate tables.
        let coords: Vec<f64> = (0..spec.points).map(|j| spec.coord(j)).collect();
        let base_spectrum = self.fourier_inverse();
        let mut total = 0.0;
        for beta in &betas {
            let deriv = base_spectrum.apply_derivative(beta).fourier_forward();
            for alpha in &alphas {
                let mut best = 0.0f64;
                for (flat, v) in deriv.values.iter().enumerate() {
                    let mut weight = 1.0;
                    let mut rem = flat;
                    for a in (0..spec.n).rev() {
                        let j = rem % spec.points;
                        rem /= spec.points;
                        let e = alpha[a];
                        if e > 0 {
                            weight *= coords[j].powi(e as i32);
                        }
                    }
                    let m = (v * weight).norm();
                    if m > best {
                        best = m;
                    }
                }
                total += best;
            }
        }
        total
    }

    fn check_spec(&self, other: &Self) -> Result<()> {
        if self.spec != other.spec {
            return Err(MoyalError::SpecMismatch(format!(
                "{:?} vs {:?}",
                self.spec, other.spec
            )));
        }
        Ok(())
    }
}

impl Spectrum {
    pub fn zeros(spec: GridSpec) -> Self {
        Self {
            coeffs: vec![Complex64::new(0.0, 0.0); spec.total_samples()],
            spec,
        }
    }

    /// Synthesis transform: f(x_j) = sum_k coeffs_k e^{i<xi_k,x_j>} (dxi)^n.
    pub fn fourier_forward(&self) -> GridFunction {
        let spec = self.spec;
        let mut data = self.coeffs.clone();
        let scale = spec.dual_cell_volume();
        for (flat, c) in data.iter_mut().enumerate() {
            *c *= scale * checkerboard_sign(&spec, flat);
        }
        fft_all_axes(&spec, &mut data, true);
        GridFunction { spec, values: data }
    }

    /// Discrete L1 norm sum |coeffs| (dxi)^n.
    pub fn l1_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).sum::<f64>() * self.spec.dual_cell_volume()
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.norm()))
    }

    /// Multiplies by e^{-i<xi_k, shift>}: synthesizing afterwards yields the
    /// band-limited translate f(x - shift), exact for any real shift.
    pub fn apply_shift(&self, shift: &[f64]) -> Spectrum {
        let spec = self.spec;
        let mut out = self.coeffs.clone();
        // Per-axis phase tables keep this O(n N^n).
        let tables: Vec<Vec<Complex64>> = (0..spec.n)
            .map(|a| {
                (0..spec.points)
                    .map(|j| Complex64::from_polar(1.0, -spec.freq(j) * shift[a]))
                    .collect()
            })
            .collect();
        for (flat, c) in out.iter_mut().enumerate() {
            let mut rem = flat;
            let mut phase = Complex64::new(1.0, 0.0);
            for a in (0..spec.n).rev() {
                let j = rem % spec.points;
                rem /= spec.points;
                phase *= tables[a][j];
            }
            *c *= phase;
        }
        Spectrum { spec, coeffs: out }
    }

    /// Multiplies by (i xi)^beta for a derivative multi-index.
    pub fn apply_derivative(&self, beta: &[usize]) -> Spectrum {
        let spec = self.spec;
        let mut out = self.coeffs.clone();
        for (flat, c) in out.iter_mut().enumerate() {
            let mut rem = flat;
            let mut factor = Complex64::new(1.0, 0.0);
            for a in (0..spec.n).rev() {
                let j = rem % spec.points;
                rem /= spec.points;
                let e = beta[a];
                if e > 0 {
                    factor *= Complex64::new(0.0, spec.freq(j)).powu(e as u32);
                }
            }
            *c *= factor;
        }
        Spectrum { spec, coeffs: out }
    }

    /// Band-limited evaluation at an arbitrary point:
    /// sum_k coeffs_k e^{i<xi_k, y>} (dxi)^n over retained coefficients.
    pub fn eval_at(&self, y: &[f64], floor_rel: f64) -> Complex64 {
        let spec = self.spec;
        let floor = self.max_abs() * floor_rel;
        let mut acc = Complex64::new(0.0, 0.0);
        for (flat, c) in self.coeffs.iter().enumerate() {
            if c.norm() < floor {
                continue;
            }
            let xi = spec.frequency(flat);
            let phase: f64 = xi.iter().zip(y).map(|(a, b)| a * b).sum();
            acc += c * Complex64::from_polar(1.0, phase);
        }
        acc * spec.dual_cell_volume()
    }

    /// Flat indices of coefficients with |c| >= floor_rel * max|c|,
    /// in increasing index order.
    pub fn retained(&self, floor_rel: f64) -> Vec<usize> {
        let floor = self.max_abs() * floor_rel;
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm() >= floor && c.norm() > 0.0)
            .map(|(i, _)| i)
            .collect()
    }
}

/// All multi-indices alpha in n variables with |alpha| <= max_total,
/// in deterministic lexicographic order.
pub fn multi_indices(n: usize, max_total: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; n];
    loop {
        if cur.iter().sum::<usize>() <= max_total {
            out.push(cur.clone());
        }
        // Lexicographic increment with early pruning.
        let mut a = n;
        loop {
            if a == 0 {
                return out;
            }
            a -= 1;
            cur[a] += 1;
            if cur.iter().sum::<usize>() <= max_total {
                break;
            }
            cur[a] = 0;
        }
    }
}

/// Samples a centered product Gaussian prod_i exp(-(x_i-c_i)^2 / (2 w_i^2)).
pub fn make_gaussian(spec: GridSpec, center: &[f64], widths: &[f64]) -> Result<GridFunction> {
    if center.len() != spec.n || widths.len() != spec.n {
        return Err(MoyalError::DimensionMismatch {
            expected: spec.n,
            got: center.len().max(widths.len()),
        });
    }
    Ok(GridFunction::from_fn(spec, |x| {
        let e: f64 = x
            .iter()
            .zip(center)
            .zip(widths)
            .map(|((xi, c), w)| {
                let t = (xi - c) / w;
                -0.5 * t * t
            })
            .sum();
        Complex64::new(e.exp(), 0.0)
    }))
}

/// Samples a plane-wave sum whose frequencies all lie on the dual lattice.
pub fn sample_planewave(pw: &PlaneWaveSum, spec: GridSpec) -> Result<GridFunction> {
    for t in pw.terms() {
        spec.lattice_indices(&t.freq)?;
    }
    let mut out = GridFunction::zeros(spec);
    for t in pw.terms() {
        for (flat, v) in out.values.iter_mut().enumerate() {
            let x = spec.position(flat);
            let phase: f64 = t.freq.iter().zip(&x).map(|(f, xi)| f * xi).sum();
            *v += t.coeff * Complex64::from_polar(1.0, phase);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn gaussian_1d(l: f64, points: usize) -> GridFunction {
        let spec = GridSpec::new(1, l, points).unwrap();
        make_gaussian(spec, &[0.0], &[1.0]).unwrap()
    }

    #[test]
    fn round_trip_identity() {
        let f = gaussian_1d(12.0, 128);
        let g = f.fourier_inverse().fourier_forward();
        let err = f
            .values
            .iter()
            .zip(&g.values)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));
        assert!(err < 1e-12, "round trip error {err}");
    }

    #[test]
    fn constant_transforms_to_lattice_delta() {
        let spec = GridSpec::new(2, 6.0, 16).unwrap();
        let one = GridFunction::from_fn(spec, |_| Complex64::new(1.0, 0.0));
        let sp = one.fourier_inverse();
        // Support only at xi = 0, and the dual Riemann sum equals 1.
        let zero_flat = spec.flat_of_dual(&[0, 0]);
        for (flat, c) in sp.coeffs.iter().enumerate() {
            if flat != zero_flat {
                assert!(c.norm() < 1e-12, "stray coefficient at {flat}");
            }
        }
        let total = sp.coeffs[zero_flat] * spec.dual_cell_volume();
        assert!((total - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn on_lattice_wave_is_delta() {
        let spec = GridSpec::new(1, 8.0, 64).unwrap();
        let xi0 = 3.0 * spec.dxi();
        let pw = PlaneWaveSum::single(Complex64::new(1.0, 0.0), vec![xi0]);
        let f = sample_planewave(&pw, spec).unwrap();
        let sp = f.fourier_inverse();
        let hit = spec.flat_of_dual(&[3]);
        for (flat, c) in sp.coeffs.iter().enumerate() {
            if flat == hit {
                assert!((c * spec.dual_cell_volume() - Complex64::new(1.0, 0.0)).norm() < 1e-12);
            } else {
                assert!(c.norm() < 1e-12);
            }
        }
    }

    #[test]
    fn off_lattice_wave_rejected() {
        let spec = GridSpec::new(1, 8.0, 64).unwrap();
        let pw = PlaneWaveSum::single(Complex64::new(1.0, 0.0), vec![0.5 * spec.dxi()]);
        assert!(matches!(
            sample_planewave(&pw, spec),
            Err(MoyalError::OffLattice(..))
        ));
    }

    /// Adaptive Simpson quadrature for the defining Fourier integral,
    /// independent of the FFT path.
    fn quad_fourier_inverse(f: impl Fn(f64) -> f64, xi: f64, a: f64, b: f64) -> Complex64 {
        #[allow(clippy::too_many_arguments)]
        fn simpson(
            f: &impl Fn(f64) -> Complex64,
            a: f64,
            b: f64,
            fa: Complex64,
            fm: Complex64,
            fb: Complex64,
            eps: f64,
            depth: usize,
        ) -> Complex64 {
            let m = 0.5 * (a + b);
            let lm = 0.5 * (a + m);
            let rm = 0.5 * (m + b);
            let flm = f(lm);
            let frm = f(rm);
            let h = b - a;
            let whole = (fa + fm * 4.0 + fb) * (h / 6.0);
            let left = (fa + flm * 4.0 + fm) * (h / 12.0);
            let right = (fm + frm * 4.0 + fb) * (h / 12.0);
            let delta = left + right - whole;
            if depth == 0 || delta.norm() < 15.0 * eps {
                left + right + delta / 15.0
            } else {
                simpson(f, a, m, fa, flm, fm, eps / 2.0, depth - 1)
                    + simpson(f, m, b, fm, frm, fb, eps / 2.0, depth - 1)
            }
        }
        let integrand = |x: f64| Complex64::from_polar(f(x), -xi * x);
        let fa = integrand(a);
        let fb = integrand(b);
        let fm = integrand(0.5 * (a + b));
        simpson(&integrand, a, b, fa, fm, fb, 1e-12, 40) / (2.0 * PI)
    }

    #[test]
    fn gaussian_spectrum_matches_quadrature_oracle() {
        // n=1, L=12, N=256: fcheck(xi) ~ (2pi)^{-1/2} e^{-xi^2/2}.
        let spec = GridSpec::new(1, 12.0, 256).unwrap();
        let f = make_gaussian(spec, &[0.0], &[1.0]).unwrap();
        let sp = f.fourier_inverse();
        let gauss = |x: f64| (-0.5 * x * x).exp();
        let mut max_err = 0.0f64;
        for k in [-20i64, -7, -1, 0, 1, 3, 11, 20] {
            let xi = k as f64 * spec.dxi();
            let oracle = quad_fourier_inverse(gauss, xi, -12.0, 12.0);
            let got = sp.coeffs[spec.flat_of_dual(&[k])];
            max_err = max_err.max((oracle - got).norm());
            // Also pin against the closed form.
            let closed = (2.0 * PI).powf(-0.5) * (-0.5 * xi * xi).exp();
            assert!((got.re - closed).abs() < 1e-8);
        }
        assert!(max_err < 1e-8, "max error vs quadrature {max_err}");
    }

    #[test]
    fn seminorm_gaussian_values() {
        // s_{0,0} of a unit Gaussian is 1 (sup attained on the grid at 0).
        let f = gaussian_1d(12.0, 256);
        let s00 = f.seminorm(0, 0);
        assert!((s00 - 1.0).abs() < 1e-12);

        // s_{1,0} = sup|f| + sup|x f| = 1 + e^{-1/2}; the sup of |x e^{-x^2/2}|
        // sits at x = 1, which the grid hits only approximately.
        let s10 = f.seminorm(1, 0);
        let expected = 1.0 + (-0.5f64).exp();
        assert!(
            (s10 - expected).abs() < 1e-3,
            "s_{{1,0}} = {s10}, expected about {expected}"
        );

        // Zero function.
        let z = GridFunction::zeros(f.spec);
        assert_eq!(z.seminorm(3, 2), 0.0);
    }

    #[test]
    fn seminorm_monotone_in_orders() {
        let f = gaussian_1d(12.0, 128);
        let pairs = [(0, 0), (1, 0), (0, 1), (1, 1), (2, 2)];
        for (p, q) in pairs {
            for (p2, q2) in pairs {
                if p <= p2 && q <= q2 {
                    assert!(f.seminorm(p, q) <= f.seminorm(p2, q2) + 1e-12);
                }
            }
        }
    }

    #[test]
    fn l1_norm_of_lattice_delta() {
        let spec = GridSpec::new(1, 8.0, 64).unwrap();
        let pw = PlaneWaveSum::single(Complex64::new(1.0, 0.0), vec![2.0 * spec.dxi()]);
        let f = sample_planewave(&pw, spec).unwrap();
        let l1 = f.fourier_inverse().l1_norm();
        assert!((l1 - 1.0).abs() < 1e-12);

        let z = GridFunction::zeros(spec);
        assert_eq!(z.fourier_inverse().l1_norm(), 0.0);
    }

    #[test]
    fn l1_bound_by_seminorm_gaussian() {
        // ||fcheck||_1 <= (2 pi)^n s_{2n,2n}(f) for the 1-d Gaussian.
        let f = gaussian_1d(12.0, 256);
        let l1 = f.fourier_inverse().l1_norm();
        let bound = 2.0 * PI * f.seminorm(2, 2);
        assert!(l1 <= bound, "l1 {l1} vs bound {bound}");
    }

    #[test]
    fn x_multiply_matches_pointwise() {
        let spec = GridSpec::new(1, 12.0, 128).unwrap();
        let f = make_gaussian(spec, &[0.0], &[1.0]).unwrap();
        let xf = f.x_multiply(0).unwrap();
        let direct = GridFunction::from_fn(spec, |x| {
            Complex64::new(x[0] * (-0.5 * x[0] * x[0]).exp(), 0.0)
        });
        let err = xf
            .values
            .iter()
            .zip(&direct.values)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));
        assert!(err < 1e-12);
    }

    #[test]
    fn spectral_derivative_of_gaussian() {
        let spec = GridSpec::new(1, 12.0, 256).unwrap();
        let f = make_gaussian(spec, &[0.0], &[1.0]).unwrap();
        let df = f.partial_deriv(0).unwrap();
        let direct = GridFunction::from_fn(spec, |x| {
            Complex64::new(-x[0] * (-0.5 * x[0] * x[0]).exp(), 0.0)
        });
        let err = df
            .values
            .iter()
            .zip(&direct.values)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));
        assert!(err < 1e-10, "derivative error {err}");
    }

    #[test]
    fn shift_is_exact_for_band_limited_data() {
        let spec = GridSpec::new(1, 10.0, 64).unwrap();
        // A band-limited function: few low-frequency waves.
        let pw = PlaneWaveSum::from_terms(
            1,
            vec![
                crate::planewave::PlaneWaveTerm {
                    coeff: Complex64::new(1.0, 0.5),
                    freq: vec![spec.dxi()],
                },
                crate::planewave::PlaneWaveTerm {
                    coeff: Complex64::new(0.25, -1.0),
                    freq: vec![-3.0 * spec.dxi()],
                },
            ],
            1e-9,
        );
        let f = sample_planewave(&pw, spec).unwrap();
        let shift = [0.3771];
        let shifted = f.fourier_inverse().apply_shift(&shift).fourier_forward();
        let mut err = 0.0f64;
        for (flat, v) in shifted.values.iter().enumerate() {
            let x = spec.position(flat);
            let expect = pw.eval(&[x[0] - shift[0]]).unwrap();
            err = err.max((v - expect).norm());
        }
        assert!(err < 1e-12, "shift error {err}");
    }

    #[test]
    fn multi_index_enumeration() {
        let idx = multi_indices(2, 2);
        assert_eq!(idx.len(), 6); // (0,0),(0,1),(0,2),(1,0),(1,1),(2,0)
        assert_eq!(idx[0], vec![0, 0]);
        assert!(idx.contains(&vec![1, 1]));
        assert!(idx.contains(&vec![2, 0]));
    }

    #[test]
    fn spec_guards() {
        assert!(GridSpec::new(1, 12.0, 31).is_err());
        assert!(GridSpec::new(1, -1.0, 32).is_err());
        assert!(GridSpec::new(4, 12.0, 256).is_err()); // memory cap
    }
}
