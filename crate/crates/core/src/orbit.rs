//! The homogeneous DFR construction: the Lorentz orbit of a reference
//! symplectic form, stabilizer dimension counting, the tautological
//! Poisson bundle over orbit samples, associated-bundle trivialization
//! consistency, and the tangent-space fiber builder for general
//! Lorentzian metrics.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bundle::{BasePoint, BaseSpace, PoissonBundle};
use crate::error::{MoyalError, Result};
use crate::poisson::PoissonVectorSpace;

/// Tolerance for the Lorentz-group membership and stabilizer checks.
pub const LORENTZ_TOL: f64 = 1e-10;

/// Minkowski metric diag(1, -1, ..., -1).
pub fn minkowski(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| {
        if i != j {
            0.0
        } else if i == 0 {
            1.0
        } else {
            -1.0
        }
    })
}

/// An element of O(1, n-1), validated on construction.
#[derive(Debug, Clone)]
pub struct LorentzElement {
    pub matrix: DMatrix<f64>,
}

impl LorentzElement {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let n = matrix.nrows();
        if matrix.ncols() != n {
            return Err(MoyalError::DimensionMismatch {
                expected: n,
                got: matrix.ncols(),
            });
        }
        let eta = minkowski(n);
        let defect = (matrix.transpose() * &eta * &matrix - &eta)
            .iter()
            .fold(0.0f64, |m, x| m.max(x.abs()));
        if defect > LORENTZ_TOL {
            return Err(MoyalError::NotLorentz { defect });
        }
        Ok(Self { matrix })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            matrix: DMatrix::identity(n, n),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn compose(&self, other: &Self) -> Result<Self> {
        Self::new(&self.matrix * &other.matrix)
    }

    pub fn inverse(&self) -> Self {
        // eta L^T eta is the inverse of a Lorentz matrix; cheaper and more
        // stable than a generic solve.
        let eta = minkowski(self.dim());
        Self {
            matrix: &eta * self.matrix.transpose() * &eta,
        }
    }
}

/// Basis of the Lorentz Lie algebra o(1, n-1): matrices A with
/// A^T eta + eta A = 0, enumerated as rotation and boost generators.
pub fn lorentz_algebra_basis(n: usize) -> Vec<DMatrix<f64>> {
    let mut basis = Vec::with_capacity(n * (n - 1) / 2);
    // Boosts K_i: symmetric generators mixing time with space axis i.
    for i in 1..n {
        let mut g = DMatrix::zeros(n, n);
        g[(0, i)] = 1.0;
        g[(i, 0)] = 1.0;
        basis.push(g);
    }
    // Rotations J_{ij}: antisymmetric generators in the spatial block.
    for i in 1..n {
        for j in (i + 1)..n {
            let mut g = DMatrix::zeros(n, n);
            g[(i, j)] = 1.0;
            g[(j, i)] = -1.0;
            basis.push(g);
        }
    }
    basis
}

/// Matrix exponential by scaling and squaring with a Taylor kernel.
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let norm = a.iter().fold(0.0f64, |m, x| m.max(x.abs())) * n as f64;
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scaled = a / 2f64.powi(squarings as i32);
    let mut term = DMatrix::<f64>::identity(n, n);
    let mut sum = DMatrix::<f64>::identity(n, n);
    for k in 1..=20 {
        term = &term * &scaled / k as f64;
        sum += &term;
    }
    let mut result = sum;
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// A seeded sample of Lorentz elements: exponentials of random Lie-algebra
/// combinations with coefficients in [-spread, spread].
pub fn sample_lorentz(n: usize, count: usize, spread: f64, seed: u64) -> Vec<LorentzElement> {
    let basis = lorentz_algebra_basis(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut a = DMatrix::zeros(n, n);
            for g in &basis {
                a += g * rng.random_range(-spread..spread);
            }
            LorentzElement::new(expm(&a)).expect("exponential of o(1,n-1) is Lorentz")
        })
        .collect()
}

/// Transports sigma0 along Lambda: sigma = Lambda sigma0 Lambda^T, with the
/// upper triangle mirrored so antisymmetry is exact as stored.
pub fn orbit_point(lambda: &LorentzElement, sigma0: &PoissonVectorSpace) -> Result<PoissonVectorSpace> {
    let n = sigma0.dim();
    if lambda.dim() != n {
        return Err(MoyalError::DimensionMismatch {
            expected: n,
            got: lambda.dim(),
        });
    }
    let s0 = sigma0.to_matrix();
    let s = &lambda.matrix * s0 * lambda.matrix.transpose();
    let mut sigma = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            sigma[i][j] = s[(i, j)];
            sigma[j][i] = -s[(i, j)];
        }
    }
    PoissonVectorSpace::new(n, sigma)
}

/// Dimension of the stabilizer Lie algebra
/// { A in o(1, n-1) : A sigma0 + sigma0 A^T = 0 }, from the null space of
/// the linearized condition over the Lorentz algebra basis.
pub fn stabilizer_algebra_dim(sigma0: &PoissonVectorSpace) -> usize {
    let n = sigma0.dim();
    let basis = lorentz_algebra_basis(n);
    let s0 = sigma0.to_matrix();
    // Columns: vectorized A_k sigma0 + sigma0 A_k^T.
    let mut m = DMatrix::<f64>::zeros(n * n, basis.len());
    for (k, g) in basis.iter().enumerate() {
        let img = g * &s0 + &s0 * g.transpose();
        for i in 0..n {
            for j in 0..n {
                m[(i * n + j, k)] = img[(i, j)];
            }
        }
    }
    let sv = m.singular_values();
    let max = sv.iter().cloned().fold(0.0f64, f64::max);
    if max == 0.0 {
        return basis.len();
    }
    let rank = sv.iter().filter(|&&s| s > 1e-10 * max).count();
    basis.len() - rank
}

/// Whether h stabilizes sigma0 within `LORENTZ_TOL`.
pub fn in_stabilizer(h: &LorentzElement, sigma0: &PoissonVectorSpace) -> Result<bool> {
    let moved = orbit_point(h, sigma0)?;
    let mut defect = 0.0f64;
    for i in 0..sigma0.dim() {
        for j in 0..sigma0.dim() {
            defect = defect.max((moved.entry(i, j) - sigma0.entry(i, j)).abs());
        }
    }
    Ok(defect <= LORENTZ_TOL)
}

/// Builds the tautological Poisson bundle over k sampled orbit points: the
/// fiber Poisson tensor at a base point sigma is sigma itself.
pub fn orbit_bundle(sigma0: &PoissonVectorSpace, k: usize, seed: u64) -> Result<PoissonBundle> {
    let n = sigma0.dim();
    let elements = sample_lorentz(n, k, 1.0, seed);
    let rank0 = sigma0.rank();
    let mut points = Vec::with_capacity(k);
    let mut sigmas = Vec::with_capacity(k);
    for (i, el) in elements.iter().enumerate() {
        let sigma = orbit_point(el, sigma0)?;
        if sigma.rank() != rank0 {
            return Err(MoyalError::RankDeficient {
                context: "orbit transport changed the rank",
            });
        }
        // Base coordinates: the independent entries of sigma.
        let mut coords = Vec::with_capacity(n * (n - 1) / 2);
        for a in 0..n {
            for b in (a + 1)..n {
                coords.push(sigma.entry(a, b));
            }
        }
        points.push(BasePoint {
            id: format!("orbit{i}"),
            coords,
            compact: true,
        });
        sigmas.push(sigma);
    }
    let base = BaseSpace::sampled(points, vec![Vec::new(); k])?;
    PoissonBundle::new(base, n, sigmas)
}

/// Trivialization consistency of the associated bundle: the class
/// [g, u0] = [g h, h^{-1} u0] must map to the same (coset, vector) pair,
/// with the coset identified through the transported sigma and the vector
/// through the extended action of g on u0. h must stabilize sigma0.
pub fn trivialization_consistency(
    g: &LorentzElement,
    h: &LorentzElement,
    u0: &[f64],
    sigma0: &PoissonVectorSpace,
) -> Result<bool> {
    if !in_stabilizer(h, sigma0)? {
        let moved = orbit_point(h, sigma0)?;
        let mut defect = 0.0f64;
        for i in 0..sigma0.dim() {
            for j in 0..sigma0.dim() {
                defect = defect.max((moved.entry(i, j) - sigma0.entry(i, j)).abs());
            }
        }
        return Err(MoyalError::NotInStabilizer { defect });
    }
    let n = sigma0.dim();
    if u0.len() != n {
        return Err(MoyalError::DimensionMismatch {
            expected: n,
            got: u0.len(),
        });
    }
    let u = DMatrix::from_fn(n, 1, |i, _| u0[i]);

    // Representative (g, u0).
    let sigma_a = orbit_point(g, sigma0)?;
    let vec_a = &g.matrix * &u;

    // Representative (g h, h^{-1} u0).
    let gh = g.compose(h)?;
    let sigma_b = orbit_point(&gh, sigma0)?;
    let vec_b = &gh.matrix * (h.inverse().matrix * &u);

    let mut coset_defect = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            coset_defect = coset_defect.max((sigma_a.entry(i, j) - sigma_b.entry(i, j)).abs());
        }
    }
    let vec_defect = (&vec_a - &vec_b)
        .iter()
        .fold(0.0f64, |m, x| m.max(x.abs()));
    Ok(coset_defect <= LORENTZ_TOL && vec_defect <= 1e-10)
}

/// Lorentz-invariant diagnostics of an orbit point: (sigma^{mu nu} sigma_{mu nu} / 2,
/// |Pf(sigma)|), indices moved with the Minkowski metric.
pub fn invariant_scalars(sigma: &PoissonVectorSpace) -> (f64, f64) {
    let n = sigma.dim();
    let eta = minkowski(n);
    let s = sigma.to_matrix();
    let lowered = &eta * &s * &eta;
    let mut contraction = 0.0;
    for i in 0..n {
        for j in 0..n {
            contraction += s[(i, j)] * lowered[(i, j)];
        }
    }
    (0.5 * contraction, pfaffian_abs(&s))
}

/// |Pf(A)| for antisymmetric A of even size, by recursive expansion along
/// the first row; intended for the small matrices of this module.
fn pfaffian_abs(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    if !n.is_multiple_of(2) {
        return 0.0;
    }
    fn pf(a: &DMatrix<f64>, rows: &[usize]) -> f64 {
        if rows.is_empty() {
            return 1.0;
        }
        let i = rows[0];
        let mut acc = 0.0;
        for (pos, &j) in rows.iter().enumerate().skip(1) {
            let sign = if pos.is_multiple_of(2) { -1.0 } else { 1.0 };
            let rest: Vec<usize> = rows
                .iter()
                .cloned()
                .filter(|&r| r != i && r != j)
                .collect();
            acc += sign * a[(i, j)] * pf(a, &rest);
        }
        acc
    }
    let rows: Vec<usize> = (0..n).collect();
    pf(a, &rows).abs()
}

/// Builds the tangent-space fiber data for a Lorentzian metric: an
/// orthonormal frame F with F^T g F = eta (positive eigenvalue first),
/// and the transported tensor F sigma0 F^T.
pub fn tangent_dfr_data(
    metric: &DMatrix<f64>,
    sigma0: &PoissonVectorSpace,
) -> Result<PoissonVectorSpace> {
    let n = sigma0.dim();
    if metric.nrows() != n || metric.ncols() != n {
        return Err(MoyalError::DimensionMismatch {
            expected: n,
            got: metric.nrows(),
        });
    }
    let sym = (metric + metric.transpose()) * 0.5;
    if sym == minkowski(n) {
        return Ok(sigma0.clone());
    }
    let eig = nalgebra::SymmetricEigen::new(sym);
    // Signature (1, n-1): exactly one positive eigenvalue.
    let positives = eig.eigenvalues.iter().filter(|&&l| l > 0.0).count();
    if positives != 1 || eig.eigenvalues.iter().any(|&l| l == 0.0) {
        return Err(MoyalError::WrongSignature);
    }
    // Columns ordered: the positive direction first, then space.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let mut frame = DMatrix::<f64>::zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        let scale = eig.eigenvalues[old_col].abs().sqrt().recip();
        for r in 0..n {
            frame[(r, new_col)] = eig.eigenvectors[(r, old_col)] * scale;
        }
    }
    // frame^T metric frame = eta by construction.
    let transported = &frame * sigma0.to_matrix() * frame.transpose();
    let mut sigma = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            sigma[i][j] = transported[(i, j)];
            sigma[j][i] = -transported[(i, j)];
        }
    }
    PoissonVectorSpace::new(n, sigma)
}
