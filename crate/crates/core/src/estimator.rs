//! Eigenspace channel estimation.
//!
//! The sample Gram of the whole coherence block (pilots and data) is
//! eigendecomposed; with a large array and a long block, every source's
//! channel becomes an eigenvector whose eigenvalue is set by its received
//! power. The desired users' eigenvectors are picked by their rank in the
//! power ordering, the pilot block is projected onto them and despread, and
//! the result is shrunk into a linear MMSE estimate of the `K`-dimensional
//! equivalent channel.

use nalgebra::{DMatrixView, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::config::{OrderedPowerProfile, SourceClass};
use crate::error::{Error, Result};
use crate::linalg::{frobenius, hermitize, max_asymmetry, norm_sqr, outer_gram, CMatrix, CVector};
use crate::signal::PilotMatrix;

/// `(1 / (T N_t)) Y0 Y0^H`, Hermitian positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix(pub CMatrix);

impl GramMatrix {
    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }
}

pub fn sample_gram(y0: &CMatrix) -> GramMatrix {
    let (n, t) = y0.shape();
    let scale = 1.0 / (t.max(1) * n.max(1)) as f64;
    let mut g = outer_gram(y0);
    g.iter_mut().for_each(|z| *z *= scale);
    GramMatrix(g)
}

/// Eigenpairs sorted by ascending eigenvalue.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenBasis {
    pub eigenvalues: Vec<f64>,
    /// Column `j` pairs with `eigenvalues[j]`.
    pub eigenvectors: CMatrix,
}

impl EigenBasis {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `V diag(lambda) V^H`.
    pub fn reconstruct(&self) -> CMatrix {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (j, &l) in self.eigenvalues.iter().enumerate() {
            scaled.column_mut(j).scale_mut(l);
        }
        scaled * v.adjoint()
    }
}

const EIGEN_EPS: f64 = 1e-14;
const EIGEN_MAX_ITER: usize = 10_000;

/// Hermitian eigendecomposition with ascending eigenvalues.
///
/// The input is symmetrized first. Each eigenvector is rotated so that its
/// largest-magnitude entry is real and positive; round-off negatives in the
/// spectrum are clamped to zero.
pub fn eigendecompose_ascending(g: &GramMatrix) -> Result<EigenBasis> {
    let asymmetry = max_asymmetry(&g.0);
    let mut m = g.0.clone();
    hermitize(&mut m);
    let dim = m.nrows();
    let eig = SymmetricEigen::try_new(m, EIGEN_EPS, EIGEN_MAX_ITER).ok_or(Error::EigenNoConvergence {
        dim,
        frobenius: frobenius(&g.0),
        asymmetry,
    })?;

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let mut eigenvectors = CMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
    let mut eigenvalues = Vec::with_capacity(dim);
    for (dst, &src) in order.iter().enumerate() {
        let mut col: CVector = eig.eigenvectors.column(src).into_owned();
        let pivot = col
            .iter()
            .copied()
            .max_by(|a, b| a.norm_sqr().total_cmp(&b.norm_sqr()))
            .unwrap_or(Complex64::new(1.0, 0.0));
        if pivot.norm() > 0.0 {
            let rot = pivot.conj() / pivot.norm();
            col.iter_mut().for_each(|z| *z *= rot);
        }
        eigenvectors.set_column(dst, &col);
        eigenvalues.push(eig.eigenvalues[src].max(0.0));
    }
    Ok(EigenBasis {
        eigenvalues,
        eigenvectors,
    })
}

/// Columns `N_t - M + i_k` of the eigenbasis, one per desired position.
pub fn select_desired_subspace(eig: &EigenBasis, profile: &OrderedPowerProfile) -> Result<CMatrix> {
    let n = eig.dim();
    let m = profile.len();
    if n < m {
        return Err(Error::TooFewAntennas {
            antennas: n,
            required: m,
        });
    }
    let cols: Vec<_> = profile
        .desired_indices
        .iter()
        .map(|&i| eig.eigenvectors.column(n - m + i))
        .collect();
    Ok(CMatrix::from_columns(&cols))
}

/// Label of every eigenvalue position: the top `M` positions inherit the
/// power profile's classes, everything below is noise (`None`).
pub fn position_labels(dim: usize, profile: &OrderedPowerProfile) -> Vec<Option<SourceClass>> {
    let offset = dim.saturating_sub(profile.len());
    (0..dim)
        .map(|j| if j < offset { None } else { Some(profile.labels[j - offset]) })
        .collect()
}

/// Whether the spectrum is layered like the power profile: every block of
/// equally labelled positions (from the top down) sits strictly above the
/// next block, and the lowest block sits above the noise bulk.
pub fn eigenvalues_layered(eig: &EigenBasis, profile: &OrderedPowerProfile) -> bool {
    let labels = position_labels(eig.dim(), profile);
    let mut blocks: Vec<(Option<SourceClass>, f64, f64)> = Vec::new();
    for (j, &lab) in labels.iter().enumerate() {
        let v = eig.eigenvalues[j];
        match blocks.last_mut() {
            Some((l, lo, hi)) if *l == lab => {
                *lo = lo.min(v);
                *hi = hi.max(v);
            }
            _ => blocks.push((lab, v, v)),
        }
    }
    blocks.windows(2).all(|w| w[1].1 > w[0].2)
}

/// Equivalent-channel estimates for one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceEstimate {
    /// `N_t x K`, orthonormal columns.
    pub v_eq: CMatrix,
    /// `V_eq^H Yp`, `K x tau`.
    pub z0p: CMatrix,
    /// Per user, the `K`-dimensional estimate in `V_eq` coordinates.
    pub h_hat: Vec<CVector>,
}

impl SubspaceEstimate {
    /// `V_eq h_hat_k`, the estimate mapped back to antenna space.
    pub fn antenna_domain(&self, k: usize) -> CVector {
        &self.v_eq * &self.h_hat[k]
    }
}

/// Project the pilot block onto `V_eq`, despread with each pilot and apply
/// the MMSE shrinkage `sqrt(P0) / (P0 tau + N0)`.
///
/// `user_power[k]` is the uplink power of the `k`-th user of the cell.
pub fn despread_and_estimate(
    v_eq: &CMatrix,
    yp: DMatrixView<'_, Complex64>,
    pilots: &PilotMatrix,
    user_power: &[f64],
    noise: f64,
) -> Result<SubspaceEstimate> {
    if v_eq.nrows() != yp.nrows() || yp.ncols() != pilots.len() || user_power.len() != pilots.users() {
        return Err(Error::DimensionMismatch {
            what: "despreading inputs",
            expected: format!("{} rows, {} pilot symbols, {} users", v_eq.nrows(), pilots.len(), pilots.users()),
            found: format!("{} rows, {} symbols, {} powers", yp.nrows(), yp.ncols(), user_power.len()),
        });
    }
    let tau = pilots.len() as f64;
    let z0p = v_eq.adjoint() * yp;
    let h_hat = (0..pilots.users())
        .map(|k| {
            let p0 = user_power[k];
            let despread: CVector = &z0p * pilots.pilot(k).map(|z| z.conj());
            despread * Complex64::new(p0.sqrt() / (p0 * tau + noise), 0.0)
        })
        .collect();
    Ok(SubspaceEstimate {
        v_eq: v_eq.clone(),
        z0p,
        h_hat,
    })
}

/// Fraction of the energy of `x` inside the span of `V_eq`.
pub fn subspace_alignment(v_eq: &CMatrix, x: &CVector) -> Result<f64> {
    let total = norm_sqr(x);
    if total == 0.0 {
        return Err(Error::ZeroVector("subspace alignment"));
    }
    let inside: DVector<Complex64> = v_eq.adjoint() * x;
    Ok((norm_sqr(&inside) / total).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{order_powers, Scenario, SystemConfig};
    use crate::linalg::orthonormality_error;
    use crate::rng::complex_normal_matrix;
    use rand::SeedableRng;

    fn rng(seed: u64) -> rand_chacha::ChaCha8Rng {
        rand_chacha::ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn gram_of_zero_is_zero() {
        let g = sample_gram(&CMatrix::from_element(4, 6, Complex64::new(0.0, 0.0)));
        assert!(g.0.iter().all(|z| *z == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn gram_of_single_column_is_outer_product() {
        let mut r = rng(1);
        let mut y = CMatrix::from_element(5, 7, Complex64::new(0.0, 0.0));
        let c = complex_normal_matrix(&mut r, 5, 1, 1.0);
        y.set_column(3, &c.column(0));
        let g = sample_gram(&y);
        let expect = &c * c.adjoint() / Complex64::new(35.0, 0.0);
        assert!(frobenius(&(g.0.clone() - expect)) < 1e-14);
        let rank = g.0.singular_values().iter().filter(|&&s| s > 1e-12).count();
        assert_eq!(rank, 1);
    }

    #[test]
    fn gram_matches_triple_loop() {
        let mut r = rng(2);
        let y = complex_normal_matrix(&mut r, 8, 16, 1.0);
        let g = sample_gram(&y);
        for i in 0..8 {
            for j in 0..8 {
                let mut acc = Complex64::new(0.0, 0.0);
                for t in 0..16 {
                    acc += y[(i, t)] * y[(j, t)].conj();
                }
                acc /= 128.0;
                assert!((g.0[(i, j)] - acc).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn identity_spectrum() {
        let e = eigendecompose_ascending(&GramMatrix(CMatrix::identity(6, 6))).unwrap();
        assert!(e.eigenvalues.iter().all(|&l| (l - 1.0).abs() < 1e-14));
        assert!(orthonormality_error(&e.eigenvectors) < 1e-12);
    }

    #[test]
    fn diagonal_spectrum_sorted() {
        let g = CMatrix::from_diagonal(&DVector::from_vec(vec![
            Complex64::new(3.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(2.0, 0.0),
        ]));
        let e = eigendecompose_ascending(&GramMatrix(g)).unwrap();
        assert_eq!(e.eigenvalues.len(), 3);
        for (got, want) in e.eigenvalues.iter().zip([1.0, 2.0, 3.0]) {
            assert!((got - want).abs() < 1e-14);
        }
        // eigenvalue 1 lives on axis 1, 2 on axis 2, 3 on axis 0; phase fixed to +1
        for (col, axis) in [(0, 1), (1, 2), (2, 0)] {
            assert!((e.eigenvectors[(axis, col)] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn random_hermitian_reconstructs() {
        let mut r = rng(3);
        let a = complex_normal_matrix(&mut r, 16, 16, 1.0);
        let g = &a + a.adjoint();
        let e = eigendecompose_ascending(&GramMatrix(g.clone())).unwrap();
        // eigenvalues of an indefinite matrix are clamped, so reconstruct a PSD one instead
        let psd = &a * a.adjoint();
        let e2 = eigendecompose_ascending(&GramMatrix(psd.clone())).unwrap();
        let err = frobenius(&(e2.reconstruct() - &psd)) / frobenius(&psd);
        assert!(err < 1e-10, "{err}");
        assert!(orthonormality_error(&e.eigenvectors) < 1e-10);
        assert!(e2.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        for j in 0..16 {
            let v = e2.eigenvectors.column(j);
            let resid = (&psd * v - v * Complex64::new(e2.eigenvalues[j], 0.0)).norm();
            assert!(resid < 1e-8 * e2.eigenvalues[15]);
            let pivot = v.iter().max_by(|a, b| a.norm_sqr().total_cmp(&b.norm_sqr())).unwrap();
            assert!(pivot.im.abs() < 1e-15 && pivot.re > 0.0);
        }
    }

    fn indexed_profile(nt: usize) -> (EigenBasis, OrderedPowerProfile) {
        let prof = order_powers(&SystemConfig::reference());
        let eigenvectors = CMatrix::identity(nt, nt);
        let eig = EigenBasis {
            eigenvalues: (0..nt).map(|j| j as f64).collect(),
            eigenvectors,
        };
        (eig, prof)
    }

    #[test]
    fn selection_without_offset() {
        let (eig, prof) = indexed_profile(24);
        let v = select_desired_subspace(&eig, &prof).unwrap();
        // 1-based columns 16..=20
        for (c, idx) in (15..20).enumerate() {
            assert_eq!(v[(idx, c)], Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn selection_at_reference_dims() {
        let (eig, prof) = indexed_profile(128);
        let v = select_desired_subspace(&eig, &prof).unwrap();
        // 1-based columns 120..=124
        for (c, idx) in (119..124).enumerate() {
            assert_eq!(v[(idx, c)], Complex64::new(1.0, 0.0));
        }
        let (eig, _) = indexed_profile(20);
        assert!(select_desired_subspace(&eig, &prof).is_err());
    }

    #[test]
    fn alignment_extremes() {
        let mut v = CMatrix::from_element(4, 2, Complex64::new(0.0, 0.0));
        v[(0, 0)] = Complex64::new(1.0, 0.0);
        v[(1, 1)] = Complex64::new(1.0, 0.0);
        let inside = v.column(1).into_owned();
        assert!((subspace_alignment(&v, &inside).unwrap() - 1.0).abs() < 1e-15);
        let mut outside = CVector::from_element(4, Complex64::new(0.0, 0.0));
        outside[3] = Complex64::new(0.0, 2.0);
        assert_eq!(subspace_alignment(&v, &outside).unwrap(), 0.0);
        let zero = CVector::from_element(4, Complex64::new(0.0, 0.0));
        assert!(matches!(subspace_alignment(&v, &zero), Err(Error::ZeroVector(_))));
    }

    #[test]
    fn noiseless_shrinkage_identity() {
        use crate::signal::build_pilots;
        let mut r = rng(4);
        let h = complex_normal_matrix(&mut r, 8, 1, 1.0);
        let v_eq = crate::linalg::orthonormal_columns(&h);
        let pilots = build_pilots(1, 3).unwrap();
        let (p0, n0) = (2.0f64, 0.5);
        let yp = &h * pilots.pilot(0).transpose() * Complex64::new(p0.sqrt(), 0.0);
        let est = despread_and_estimate(&v_eq, yp.columns(0, 3), &pilots, &[p0], n0).unwrap();
        let expect = v_eq.adjoint() * &h * Complex64::new(p0 * 3.0 / (p0 * 3.0 + n0), 0.0);
        assert!((&est.h_hat[0] - expect.column(0)).norm() < 1e-12);

        let big_noise = despread_and_estimate(&v_eq, yp.columns(0, 3), &pilots, &[p0], 1e12).unwrap();
        assert!(big_noise.h_hat[0].norm() < 1e-9);
    }

    #[test]
    fn planted_subspace_recovered() {
        // Noiseless rank-M observation from orthogonal factors with the
        // reference scenario's power ordering.
        use crate::linalg::principal_angle_energy;
        let cfg = Scenario {
            bs_antennas: 64,
            ..Scenario::default()
        }
        .build();
        let prof = order_powers(&cfg);
        let m = prof.len();
        let mut r = rng(5);
        let basis = crate::linalg::orthonormal_columns(&complex_normal_matrix(&mut r, 64, m, 1.0));
        let t = 400;
        let mut sig = complex_normal_matrix(&mut r, m, t, 1.0);
        // orthogonal rows of equal energy, scaled by sqrt(theta)
        let q = crate::linalg::orthonormal_columns(&sig.adjoint());
        sig = q.adjoint();
        for (i, &th) in prof.theta.iter().enumerate() {
            // distinct levels within each class keep the eigenvectors unique
            let lvl = th * (1.0 + 0.01 * i as f64);
            sig.row_mut(i).scale_mut(lvl.sqrt() * (t as f64).sqrt());
        }
        let y0 = &basis * sig;
        let eig = eigendecompose_ascending(&sample_gram(&y0)).unwrap();
        let v_eq = select_desired_subspace(&eig, &prof).unwrap();
        let planted = basis.columns(prof.desired_indices[0], cfg.users).into_owned();
        assert!(principal_angle_energy(&v_eq, &planted) < 1e-6);
        assert!(orthonormality_error(&v_eq) < 1e-10);
        assert!(eigenvalues_layered(&eig, &prof));
    }
}
