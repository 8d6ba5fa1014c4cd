//! Poisson vector spaces: the musical map, rank decomposition, Darboux
//! bases, and the Heisenberg algebra/group laws they induce.

use nalgebra::DMatrix;

use crate::error::{MoyalError, Result};

/// Relative singular-value threshold that decides the rank of sigma.
pub const RANK_TOL: f64 = 1e-10;

/// A real vector space of dimension `n` with a fixed antisymmetric
/// Poisson tensor `sigma` (possibly degenerate).
#[derive(Debug, Clone, PartialEq)]
pub struct PoissonVectorSpace {
    n: usize,
    /// Row-major n*n entries, sigma[k][l] = sigma^{kl}.
    sigma: Vec<Vec<f64>>,
}

/// Element (xi, lambda) of the Heisenberg algebra/group `V* x R`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeisenbergElement {
    pub xi: Vec<f64>,
    pub lambda: f64,
}

impl HeisenbergElement {
    pub fn new(xi: Vec<f64>, lambda: f64) -> Self {
        Self { xi, lambda }
    }

    pub fn zero(n: usize) -> Self {
        Self {
            xi: vec![0.0; n],
            lambda: 0.0,
        }
    }
}

/// Splitting V = V0 + W adapted to sigma, with the symplectic form
/// omega carried by W in the coordinates of `w_basis`.
#[derive(Debug, Clone)]
pub struct RankDecomposition {
    /// Even rank 2r of sigma.
    pub rank: usize,
    /// 2r columns spanning W = im(sigma_sharp), each of length n.
    pub w_basis: Vec<Vec<f64>>,
    /// n-2r columns spanning the Euclidean orthogonal complement V0 of W.
    pub v0_basis: Vec<Vec<f64>>,
    /// n-2r covectors spanning ker sigma in V*.
    pub ker_basis: Vec<Vec<f64>>,
    /// 2r x 2r antisymmetric invertible matrix: omega in w_basis coordinates.
    pub omega: Vec<Vec<f64>>,
}

impl PoissonVectorSpace {
    /// Validates antisymmetry on construction; defects above `1e-12` are
    /// rejected, smaller ones stored as given.
    pub fn new(n: usize, sigma: Vec<Vec<f64>>) -> Result<Self> {
        if sigma.len() != n || sigma.iter().any(|row| row.len() != n) {
            return Err(MoyalError::DimensionMismatch {
                expected: n,
                got: sigma.len(),
            });
        }
        let mut defect: f64 = 0.0;
        for k in 0..n {
            for l in 0..n {
                defect = defect.max((sigma[k][l] + sigma[l][k]).abs());
            }
        }
        if defect > 1e-12 {
            return Err(MoyalError::NotAntisymmetric { defect });
        }
        Ok(Self { n, sigma })
    }

    /// The zero Poisson structure on R^n.
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            sigma: vec![vec![0.0; n]; n],
        }
    }

    /// n = 2 with sigma^{12} = s.
    pub fn standard_2d(s: f64) -> Self {
        Self {
            n: 2,
            sigma: vec![vec![0.0, s], vec![-s, 0.0]],
        }
    }

    /// Block matrix (0 1_2; -1_2 0) on R^4, the reference DFR tensor.
    pub fn standard_4d() -> Self {
        let mut sigma = vec![vec![0.0; 4]; 4];
        for i in 0..2 {
            sigma[i][i + 2] = 1.0;
            sigma[i + 2][i] = -1.0;
        }
        Self { n: 4, sigma }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn sigma(&self) -> &[Vec<f64>] {
        &self.sigma
    }

    pub fn entry(&self, k: usize, l: usize) -> f64 {
        self.sigma[k][l]
    }

    /// sigma(xi, eta) = sigma^{kl} xi_k eta_l.
    pub fn pairing(&self, xi: &[f64], eta: &[f64]) -> Result<f64> {
        self.check_dim(xi)?;
        self.check_dim(eta)?;
        let mut acc = 0.0;
        for k in 0..self.n {
            for l in 0..self.n {
                acc += self.sigma[k][l] * xi[k] * eta[l];
            }
        }
        Ok(acc)
    }

    /// Musical map sigma_sharp: V* -> V, (sigma_sharp xi)^j = sigma^{kj} xi_k.
    pub fn musical_sharp(&self, xi: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(xi)?;
        let mut v = vec![0.0; self.n];
        for j in 0..self.n {
            for k in 0..self.n {
                v[j] += self.sigma[k][j] * xi[k];
            }
        }
        Ok(v)
    }

    /// Commutator [(xi,l),(eta,m)] = (0, sigma(xi,eta)) of the Heisenberg algebra.
    pub fn heisenberg_commutator(
        &self,
        a: &HeisenbergElement,
        b: &HeisenbergElement,
    ) -> Result<HeisenbergElement> {
        let c = self.pairing(&a.xi, &b.xi)?;
        Ok(HeisenbergElement::new(vec![0.0; self.n], c))
    }

    /// Group law (xi,l)(eta,m) = (xi+eta, l+m - sigma(xi,eta)/2).
    pub fn heisenberg_product(
        &self,
        a: &HeisenbergElement,
        b: &HeisenbergElement,
    ) -> Result<HeisenbergElement> {
        let c = self.pairing(&a.xi, &b.xi)?;
        let xi = a
            .xi
            .iter()
            .zip(&b.xi)
            .map(|(x, y)| x + y)
            .collect::<Vec<_>>();
        Ok(HeisenbergElement::new(xi, a.lambda + b.lambda - 0.5 * c))
    }

    /// Inverse (-xi, -lambda); uses sigma(xi,xi) = 0.
    pub fn heisenberg_inverse(&self, a: &HeisenbergElement) -> Result<HeisenbergElement> {
        self.check_dim(&a.xi)?;
        Ok(HeisenbergElement::new(
            a.xi.iter().map(|x| -x).collect(),
            -a.lambda,
        ))
    }

    /// Sigma as an nalgebra matrix.
    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |k, l| self.sigma[k][l])
    }

    /// Rank of sigma from singular values above `RANK_TOL` relative to the largest.
    pub fn rank(&self) -> usize {
        let m = self.to_matrix();
        let sv = m.singular_values();
        let max = sv.iter().cloned().fold(0.0f64, f64::max);
        if max == 0.0 {
            return 0;
        }
        sv.iter().filter(|&&s| s > RANK_TOL * max).count()
    }

    /// Rank decomposition V = V0 + W with V0 the Euclidean orthogonal
    /// complement of W = im(sigma_sharp), and omega on W satisfying
    /// omega(sharp xi, sharp eta) = sigma(xi, eta).
    pub fn rank_decomposition(&self) -> RankDecomposition {
        let n = self.n;
        let m = self.to_matrix();
        let svd = m.clone().svd(true, true);
        let u = svd.u.as_ref().expect("svd with u");
        let vt = svd.v_t.as_ref().expect("svd with v_t");
        let sv = &svd.singular_values;
        let max = sv.iter().cloned().fold(0.0f64, f64::max);
        let rank = if max == 0.0 {
            0
        } else {
            sv.iter().filter(|&&s| s > RANK_TOL * max).count()
        };

        // Columns of U spanning im(sigma); remaining right-singular vectors
        // span ker(sigma). For antisymmetric sigma these are orthogonal
        // complements of each other.
        let mut w_basis = Vec::with_capacity(rank);
        for j in 0..rank {
            w_basis.push((0..n).map(|i| u[(i, j)]).collect::<Vec<_>>());
        }
        let mut ker_basis = Vec::with_capacity(n - rank);
        for j in rank..n {
            ker_basis.push((0..n).map(|i| vt[(j, i)]).collect::<Vec<_>>());
        }
        // V0 = W^perp; numerically ker(sigma^T) = ker(sigma) for antisymmetric sigma.
        let v0_basis = ker_basis.clone();

        // omega_{ab} = sigma(xi_a, xi_b) with sigma^T xi_a = w_a solved by
        // pseudoinverse on the nonzero singular subspace.
        let mut omega = vec![vec![0.0; rank]; rank];
        if rank > 0 {
            // sigma^T = -sigma = U S V^T transposed: sigma^T = V S U^T, so
            // pinv(sigma^T) w_a with w_a = a-th column of U:
            // pinv(sigma^T) = U S^{-1} V^T restricted to the rank block.
            let mut xis: Vec<Vec<f64>> = Vec::with_capacity(rank);
            for a in 0..rank {
                // w_a = u[:,a]; coefficients of w_a in U basis: e_a.
                // pinv(sigma^T) u_a = sum_j v_j (1/s_j) (u_j . u_a) = v_a / s_a
                // where sigma^T = V S U^T needs checking: sigma = U S V^T =>
                // sigma^T = V S U^T, pinv(sigma^T) = U S^{-1} V^T. Then
                // pinv(sigma^T) w requires w in im(sigma^T) = im(V block).
                // Instead solve least squares directly.
                let w = DMatrix::from_fn(n, 1, |i, _| u[(i, a)]);
                let xi = lstsq(&m.transpose(), &w);
                xis.push((0..n).map(|i| xi[(i, 0)]).collect());
            }
            for a in 0..rank {
                for b in 0..rank {
                    omega[a][b] = self
                        .pairing(&xis[a], &xis[b])
                        .expect("dimension checked");
                }
            }
            // Antisymmetrize exactly against rounding in the least-squares solves.
            for a in 0..rank {
                omega[a][a] = 0.0;
                for b in 0..a {
                    let v = 0.5 * (omega[a][b] - omega[b][a]);
                    omega[a][b] = v;
                    omega[b][a] = -v;
                }
            }
        }

        RankDecomposition {
            rank,
            w_basis,
            v0_basis,
            ker_basis,
            omega,
        }
    }

    fn check_dim(&self, xi: &[f64]) -> Result<()> {
        if xi.len() != self.n {
            return Err(MoyalError::DimensionMismatch {
                expected: self.n,
                got: xi.len(),
            });
        }
        Ok(())
    }
}

/// Least-squares solve A x = b via SVD with the rank tolerance of this module.
fn lstsq(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let svd = a.clone().svd(true, true);
    svd.solve(b, RANK_TOL * svd.singular_values.max())
        .expect("svd solve")
}

/// Change of basis B with B^T omega B equal to the standard symplectic
/// matrix (0 1_r; -1_r 0), built by symplectic Gram-Schmidt with pivoting
/// on the largest remaining |omega_{ij}|.
pub fn darboux_basis(omega: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let m = omega.len();
    if !m.is_multiple_of(2) || omega.iter().any(|row| row.len() != m) {
        return Err(MoyalError::RankDeficient {
            context: "darboux_basis: omega must be square of even size",
        });
    }
    let r = m / 2;
    let om = |u: &[f64], v: &[f64]| -> f64 {
        let mut acc = 0.0;
        for i in 0..m {
            for j in 0..m {
                acc += u[i] * omega[i][j] * v[j];
            }
        }
        acc
    };

    // Working set starts as the standard basis of R^{2r}.
    let mut pool: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            let mut e = vec![0.0; m];
            e[i] = 1.0;
            e
        })
        .collect();
    let mut qs: Vec<Vec<f64>> = Vec::with_capacity(r);
    let mut ps: Vec<Vec<f64>> = Vec::with_capacity(r);

    let scale = omega
        .iter()
        .flatten()
        .fold(0.0f64, |acc, x| acc.max(x.abs()));

    for _ in 0..r {
        // Pivot on the largest |omega(u_i, u_j)| among remaining vectors.
        let (mut bi, mut bj, mut best) = (0, 0, 0.0f64);
        for i in 0..pool.len() {
            for j in (i + 1)..pool.len() {
                let w = om(&pool[i], &pool[j]).abs();
                if w > best {
                    best = w;
                    bi = i;
                    bj = j;
                }
            }
        }
        if best <= RANK_TOL * scale.max(1.0) {
            return Err(MoyalError::RankDeficient {
                context: "darboux_basis: omega is singular",
            });
        }
        let second = pool.swap_remove(bi.max(bj));
        let first = pool.swap_remove(bi.min(bj));
        // Split the normalization evenly over the conjugate pair.
        let w = om(&first, &second);
        let s = w.abs().sqrt();
        let q: Vec<f64> = first.iter().map(|x| x / s).collect();
        let p: Vec<f64> = second.iter().map(|x| x * w.signum() / s).collect();
        // Reduce the remaining pool against the new conjugate pair.
        for u in pool.iter_mut() {
            let a = om(&p, u); // coefficient for q
            let b = om(&q, u); // coefficient for p
            for k in 0..m {
                u[k] += a * q[k] - b * p[k];
            }
        }
        qs.push(q);
        ps.push(p);
    }

    let mut basis = Vec::with_capacity(m);
    basis.extend(qs);
    basis.extend(ps);
    // Return as columns: basis[c] is the c-th column.
    Ok(basis)
}

/// Evaluates B^T omega B for a basis given as columns.
pub fn symplectic_gram(omega: &[Vec<f64>], basis: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let m = basis.len();
    let om = |u: &[f64], v: &[f64]| -> f64 {
        let mut acc = 0.0;
        for i in 0..u.len() {
            for j in 0..v.len() {
                acc += u[i] * omega[i][j] * v[j];
            }
        }
        acc
    };
    (0..m)
        .map(|a| (0..m).map(|b| om(&basis[a], &basis[b])).collect())
        .collect()
}

/// The standard symplectic matrix (0 1_r; -1_r 0) of size 2r.
pub fn standard_symplectic(r: usize) -> Vec<Vec<f64>> {
    let m = 2 * r;
    let mut j = vec![vec![0.0; m]; m];
    for i in 0..r {
        j[i][r + i] = 1.0;
        j[r + i][i] = -1.0;
    }
    j
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn max_abs_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
        let mut d = 0.0f64;
        for (ra, rb) in a.iter().zip(b) {
            for (x, y) in ra.iter().zip(rb) {
                d = d.max((x - y).abs());
            }
        }
        d
    }

    #[test]
    fn musical_sharp_coordinate_formula() {
        let pvs = PoissonVectorSpace::standard_2d(1.0);
        let v = pvs.musical_sharp(&[1.0, 0.0]).unwrap();
        assert_eq!(v, vec![0.0, 1.0]);
    }

    #[test]
    fn musical_sharp_zero_sigma() {
        let pvs = PoissonVectorSpace::zero(3);
        let v = pvs.musical_sharp(&[1.0, -2.0, 0.5]).unwrap();
        assert_eq!(v, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn musical_sharp_kernel_direction() {
        let mut sigma = vec![vec![0.0; 3]; 3];
        sigma[0][1] = 1.0;
        sigma[1][0] = -1.0;
        let pvs = PoissonVectorSpace::new(3, sigma).unwrap();
        let v = pvs.musical_sharp(&[0.0, 0.0, 1.0]).unwrap();
        assert_eq!(v, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn musical_sharp_duality() {
        // <eta, sharp xi> = sigma(xi, eta) for random covectors.
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..100 {
            let n = 4;
            let mut sigma = vec![vec![0.0; n]; n];
            for k in 0..n {
                for l in 0..k {
                    let s = rng.random_range(-1.0..1.0);
                    sigma[l][k] = s;
                    sigma[k][l] = -s;
                }
            }
            let pvs = PoissonVectorSpace::new(n, sigma).unwrap();
            let xi: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let eta: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let sharp = pvs.musical_sharp(&xi).unwrap();
            let lhs: f64 = eta.iter().zip(&sharp).map(|(a, b)| a * b).sum();
            let rhs = pvs.pairing(&xi, &eta).unwrap();
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_non_antisymmetric() {
        let sigma = vec![vec![0.0, 1.0], vec![-1.0 + 1e-6, 0.0]];
        assert!(matches!(
            PoissonVectorSpace::new(2, sigma),
            Err(MoyalError::NotAntisymmetric { .. })
        ));
    }

    #[test]
    fn dimension_mismatch_errors() {
        let pvs = PoissonVectorSpace::standard_2d(1.0);
        assert!(pvs.musical_sharp(&[1.0]).is_err());
        assert!(pvs.pairing(&[1.0, 0.0], &[1.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn heisenberg_commutator_standard_pair() {
        let pvs = PoissonVectorSpace::standard_2d(1.0);
        let a = HeisenbergElement::new(vec![1.0, 0.0], 0.0);
        let b = HeisenbergElement::new(vec![0.0, 1.0], 0.0);
        let c = pvs.heisenberg_commutator(&a, &b).unwrap();
        assert_eq!(c.xi, vec![0.0, 0.0]);
        assert_eq!(c.lambda, 1.0);
        // [a,a] = 0 by antisymmetry.
        let z = pvs.heisenberg_commutator(&a, &a).unwrap();
        assert_eq!(z.lambda, 0.0);
    }

    #[test]
    fn heisenberg_commutator_zero_sigma_is_central() {
        let pvs = PoissonVectorSpace::zero(2);
        let a = HeisenbergElement::new(vec![3.0, -1.0], 2.0);
        let b = HeisenbergElement::new(vec![0.5, 4.0], -1.0);
        let c = pvs.heisenberg_commutator(&a, &b).unwrap();
        assert_eq!(c.lambda, 0.0);
    }

    #[test]
    fn heisenberg_product_and_inverse() {
        let pvs = PoissonVectorSpace::standard_2d(1.0);
        let a = HeisenbergElement::new(vec![1.0, 0.0], 0.0);
        let b = HeisenbergElement::new(vec![0.0, 1.0], 0.0);
        let ab = pvs.heisenberg_product(&a, &b).unwrap();
        assert_eq!(ab.xi, vec![1.0, 1.0]);
        assert_eq!(ab.lambda, -0.5);

        // Identity.
        let e = HeisenbergElement::zero(2);
        let ea = pvs.heisenberg_product(&e, &b).unwrap();
        assert_eq!(ea, b);

        // a * a^{-1} = e.
        let inv = pvs.heisenberg_inverse(&a).unwrap();
        let prod = pvs.heisenberg_product(&a, &inv).unwrap();
        assert_eq!(prod.xi, vec![0.0, 0.0]);
        assert_eq!(prod.lambda, 0.0);
    }

    #[test]
    fn heisenberg_product_associative() {
        let mut rng = StdRng::seed_from_u64(11);
        let pvs = PoissonVectorSpace::standard_2d(1.5);
        for _ in 0..200 {
            let els: Vec<HeisenbergElement> = (0..3)
                .map(|_| {
                    HeisenbergElement::new(
                        vec![rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)],
                        rng.random_range(-2.0..2.0),
                    )
                })
                .collect();
            let ab_c = pvs
                .heisenberg_product(&pvs.heisenberg_product(&els[0], &els[1]).unwrap(), &els[2])
                .unwrap();
            let a_bc = pvs
                .heisenberg_product(&els[0], &pvs.heisenberg_product(&els[1], &els[2]).unwrap())
                .unwrap();
            assert!((ab_c.lambda - a_bc.lambda).abs() < 1e-12);
            for (x, y) in ab_c.xi.iter().zip(&a_bc.xi) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn jacobi_identity_exact() {
        // All double commutators vanish since the extension is central.
        let mut rng = StdRng::seed_from_u64(13);
        let pvs = PoissonVectorSpace::standard_4d();
        for _ in 0..50 {
            let els: Vec<HeisenbergElement> = (0..3)
                .map(|_| {
                    HeisenbergElement::new(
                        (0..4).map(|_| rng.random_range(-1.0..1.0)).collect(),
                        rng.random_range(-1.0..1.0),
                    )
                })
                .collect();
            let inner = pvs.heisenberg_commutator(&els[1], &els[2]).unwrap();
            let outer = pvs.heisenberg_commutator(&els[0], &inner).unwrap();
            assert_eq!(outer.lambda, 0.0);
            assert!(outer.xi.iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn rank_decomposition_rank2_in_r3() {
        let mut sigma = vec![vec![0.0; 3]; 3];
        sigma[0][1] = 1.0;
        sigma[1][0] = -1.0;
        let pvs = PoissonVectorSpace::new(3, sigma).unwrap();
        let rd = pvs.rank_decomposition();
        assert_eq!(rd.rank, 2);
        assert_eq!(rd.w_basis.len(), 2);
        assert_eq!(rd.ker_basis.len(), 1);
        // ker sigma = span{e^3}.
        let k = &rd.ker_basis[0];
        assert!(k[0].abs() < 1e-12 && k[1].abs() < 1e-12 && (k[2].abs() - 1.0).abs() < 1e-12);
        // W = span{e1, e2}: third component of both basis vectors vanishes.
        for w in &rd.w_basis {
            assert!(w[2].abs() < 1e-12);
        }
    }

    #[test]
    fn rank_decomposition_zero_sigma() {
        let pvs = PoissonVectorSpace::zero(3);
        let rd = pvs.rank_decomposition();
        assert_eq!(rd.rank, 0);
        assert!(rd.w_basis.is_empty());
        assert_eq!(rd.v0_basis.len(), 3);
        assert!(rd.omega.is_empty());
    }

    #[test]
    fn rank_decomposition_symplectic_r4() {
        let pvs = PoissonVectorSpace::standard_4d();
        let rd = pvs.rank_decomposition();
        assert_eq!(rd.rank, 4);
        assert!(rd.v0_basis.is_empty());
    }

    #[test]
    fn rank_decomposition_invariants_random() {
        let mut rng = StdRng::seed_from_u64(17);
        for trial in 0..20 {
            let n = 5;
            // Random sigma of rank 2 or 4 depending on the trial.
            let rank_target = if trial % 2 == 0 { 2 } else { 4 };
            let mut a = DMatrix::<f64>::zeros(n, n);
            for _ in 0..(rank_target / 2) {
                let u = DMatrix::from_fn(n, 1, |_, _| rng.random_range(-1.0..1.0f64));
                let v = DMatrix::from_fn(n, 1, |_, _| rng.random_range(-1.0..1.0f64));
                a += &u * v.transpose() - &v * u.transpose();
            }
            let sigma: Vec<Vec<f64>> = (0..n)
                .map(|i| (0..n).map(|j| 0.5 * (a[(i, j)] - a[(j, i)])).collect())
                .collect();
            let pvs = PoissonVectorSpace::new(n, sigma).unwrap();
            let rd = pvs.rank_decomposition();
            assert_eq!(rd.rank, rank_target);

            // W_basis plus V0_basis is a basis of V.
            let mut cols: Vec<Vec<f64>> = rd.w_basis.clone();
            cols.extend(rd.v0_basis.clone());
            let b = DMatrix::from_fn(n, n, |i, j| cols[j][i]);
            assert!(b.determinant().abs() > 1e-8);

            // Every ker_basis covector is killed by the musical map.
            for k in &rd.ker_basis {
                let sharp = pvs.musical_sharp(k).unwrap();
                assert!(sharp.iter().all(|x| x.abs() < 1e-10));
            }

            // omega(sharp xi, sharp eta) = sigma(xi, eta) for random xi, eta:
            // expand sharp xi in w_basis (orthonormal columns of U).
            for _ in 0..25 {
                let xi: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
                let eta: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
                let sx = pvs.musical_sharp(&xi).unwrap();
                let se = pvs.musical_sharp(&eta).unwrap();
                let coef = |v: &[f64]| -> Vec<f64> {
                    rd.w_basis
                        .iter()
                        .map(|w| w.iter().zip(v).map(|(a, b)| a * b).sum())
                        .collect()
                };
                let cx = coef(&sx);
                let ce = coef(&se);
                let mut lhs = 0.0;
                for a in 0..rd.rank {
                    for b in 0..rd.rank {
                        lhs += cx[a] * rd.omega[a][b] * ce[b];
                    }
                }
                let rhs = pvs.pairing(&xi, &eta).unwrap();
                assert!(
                    (lhs - rhs).abs() < 1e-10,
                    "omega compatibility violated: {lhs} vs {rhs}"
                );

                // Image of sharp lies in span(w_basis): projection residual.
                let mut resid = sx.clone();
                for (a, w) in rd.w_basis.iter().enumerate() {
                    for i in 0..n {
                        resid[i] -= cx[a] * w[i];
                    }
                }
                assert!(resid.iter().all(|x| x.abs() < 1e-10));
            }
        }
    }

    #[test]
    fn darboux_identity_on_standard_form() {
        let j = standard_symplectic(2);
        let b = darboux_basis(&j).unwrap();
        let g = symplectic_gram(&j, &b);
        assert!(max_abs_diff(&g, &j) < 1e-12);
    }

    #[test]
    fn darboux_scaled_standard_form() {
        let c = 4.0;
        let j: Vec<Vec<f64>> = standard_symplectic(1)
            .iter()
            .map(|row| row.iter().map(|x| c * x).collect())
            .collect();
        let b = darboux_basis(&j).unwrap();
        let g = symplectic_gram(&j, &b);
        assert!(max_abs_diff(&g, &standard_symplectic(1)) < 1e-12);
        // Diagonal scaling by 1/sqrt(c) does the job; the pivoting variant
        // must produce some basis with the same Gram matrix.
        for col in &b {
            for x in col {
                assert!(x.abs() <= 1.0 / c.sqrt() + 1e-12);
            }
        }
    }

    #[test]
    fn darboux_random_invertible() {
        let mut rng = StdRng::seed_from_u64(23);
        for _ in 0..50 {
            let r = 2;
            let m = 2 * r;
            let mut om = vec![vec![0.0; m]; m];
            loop {
                for i in 0..m {
                    for j in 0..i {
                        let s = rng.random_range(-1.0..1.0);
                        om[j][i] = s;
                        om[i][j] = -s;
                    }
                }
                let d: f64 = DMatrix::from_fn(m, m, |i, j| om[i][j]).determinant();
                if d.abs() > 1e-3 {
                    break;
                }
            }
            let b = darboux_basis(&om).unwrap();
            let g = symplectic_gram(&om, &b);
            assert!(
                max_abs_diff(&g, &standard_symplectic(r)) < 1e-10,
                "Darboux residual too large"
            );
        }
    }

    #[test]
    fn darboux_rejects_singular() {
        let om = vec![vec![0.0; 2]; 2];
        assert!(darboux_basis(&om).is_err());
    }
}
