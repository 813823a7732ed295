//! Schmidt decomposition of the biphoton wavefunction.
//!
//! The amplitude matrix, weighted by the square root of the grid cell area,
//! is factored by a one-sided Jacobi singular value decomposition: column
//! pairs are rotated until mutually orthogonal and the singular values are
//! the surviving column norms. Jacobi converges to essentially machine
//! precision, which keeps the Schmidt coefficients reliable well below the
//! truncation floor.
//!
//! [`reduced_density_spectrum`] offers an algebraically independent route to
//! the same coefficients (eigenvalues of the reduced one-photon density
//! matrix) and exists to cross-check the SVD path.

use alloc::vec::Vec;
use num_complex::Complex64;
// Inherent float math comes from libm here; std shadows it in test builds.
#[allow(unused_imports)]
use num_traits::Float;

use crate::biphoton::JointSpectralAmplitude;
use crate::error::{ModelError, Result};

/// Schmidt coefficients sorted in descending order; they sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtSpectrum {
    lambdas: Vec<f64>,
}

impl SchmidtSpectrum {
    /// Normalized coefficients, largest first.
    pub fn coefficients(&self) -> &[f64] {
        &self.lambdas
    }
}

/// Coefficients smaller than this fraction of the leading one are dropped;
/// they sit at the noise floor of the factorization.
const TRUNCATION_RATIO: f64 = 1e-12;

/// Relative off-diagonal threshold at which a column pair counts as
/// orthogonal.
const JACOBI_TOLERANCE: f64 = 1e-14;

const MAX_SWEEPS: usize = 64;

/// Singular values of a dense column-major complex matrix, descending.
fn jacobi_singular_values(rows: usize, cols: usize, a: &mut [Complex64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), rows * cols);
    for _sweep in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let mut app = 0.0;
                let mut aqq = 0.0;
                let mut apq = Complex64::new(0.0, 0.0);
                for i in 0..rows {
                    let x = a[p * rows + i];
                    let y = a[q * rows + i];
                    app += x.norm_sqr();
                    aqq += y.norm_sqr();
                    apq += x.conj() * y;
                }
                let off = apq.norm();
                if off == 0.0 || off <= JACOBI_TOLERANCE * (app * aqq).sqrt() {
                    continue;
                }
                rotated = true;
                // Fold the phase of the cross term into column q, then apply
                // the real Jacobi rotation that zeroes it.
                let phase = apq / off;
                let zeta = (aqq - app) / (2.0 * off);
                let t = if zeta >= 0.0 {
                    1.0 / (zeta + (1.0 + zeta * zeta).sqrt())
                } else {
                    -1.0 / (-zeta + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..rows {
                    let x = a[p * rows + i];
                    let y = a[q * rows + i] * phase.conj();
                    a[p * rows + i] = x * c - y * s;
                    a[q * rows + i] = x * s + y * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sigma: Vec<f64> = (0..cols)
        .map(|p| {
            a[p * rows..(p + 1) * rows]
                .iter()
                .map(|v| v.norm_sqr())
                .sum::<f64>()
                .sqrt()
        })
        .collect();
    sigma.sort_unstable_by(|x, y| y.partial_cmp(x).unwrap());
    sigma
}

fn spectrum_from_sigma(mut sigma: Vec<f64>) -> Result<SchmidtSpectrum> {
    let total: f64 = sigma.iter().map(|s| s * s).sum();
    if !(total > 0.0) {
        return Err(ModelError::EmptyMatrix);
    }
    let leading = sigma[0] * sigma[0];
    sigma.retain(|s| s * s > TRUNCATION_RATIO * leading);
    let lambdas: Vec<f64> = sigma.iter().map(|s| s * s / total).collect();
    Ok(SchmidtSpectrum { lambdas })
}

/// Schmidt coefficients of the biphoton wavefunction via singular value
/// decomposition of the area-weighted amplitude matrix.
pub fn schmidt_decompose(jsa: &JointSpectralAmplitude) -> Result<SchmidtSpectrum> {
    let rows_in = jsa.n_signal();
    let cols_in = jsa.n_idler();
    let weight = jsa.cell_area().sqrt();
    // Column-major copy, transposed if needed so columns are the short side.
    let transpose = cols_in > rows_in;
    let (rows, cols) = if transpose {
        (cols_in, rows_in)
    } else {
        (rows_in, cols_in)
    };
    let mut m = alloc::vec![Complex64::new(0.0, 0.0); rows * cols];
    for i in 0..rows_in {
        for j in 0..cols_in {
            let v = jsa.amplitude(i, j) * weight;
            if transpose {
                m[i * rows + j] = v;
            } else {
                m[j * rows + i] = v;
            }
        }
    }
    spectrum_from_sigma(jacobi_singular_values(rows, cols, &mut m))
}

/// Schmidt coefficients via the eigenvalues of the reduced density matrix
/// `rho = phi phi^dagger` (traced over the idler). Independent of the SVD
/// route; intended for cross-validation.
pub fn reduced_density_spectrum(jsa: &JointSpectralAmplitude) -> Result<SchmidtSpectrum> {
    let ns = jsa.n_signal();
    let ni = jsa.n_idler();
    let weight = jsa.cell_area();
    // rho[i][k] = sum_j phi(i, j) conj(phi(k, j)) * area
    let mut rho = alloc::vec![Complex64::new(0.0, 0.0); ns * ns];
    for i in 0..ns {
        for k in 0..=i {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..ni {
                acc += jsa.amplitude(i, j) * jsa.amplitude(k, j).conj();
            }
            rho[i * ns + k] = acc * weight;
            rho[k * ns + i] = acc.conj() * weight;
        }
    }
    let eigen = hermitian_eigenvalues(ns, &mut rho);
    let total: f64 = eigen.iter().sum();
    if !(total > 0.0) {
        return Err(ModelError::EmptyMatrix);
    }
    let mut lambdas: Vec<f64> = eigen.iter().map(|e| (e / total).max(0.0)).collect();
    lambdas.sort_unstable_by(|x, y| y.partial_cmp(x).unwrap());
    let leading = lambdas[0];
    lambdas.retain(|l| *l > TRUNCATION_RATIO * leading);
    Ok(SchmidtSpectrum { lambdas })
}

/// Eigenvalues of a Hermitian matrix by cyclic complex Jacobi rotations.
fn hermitian_eigenvalues(n: usize, h: &mut [Complex64]) -> Vec<f64> {
    debug_assert_eq!(h.len(), n * n);
    for _sweep in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let hpq = h[p * n + q];
                let off = hpq.norm();
                let scale = (h[p * n + p].re.abs() + h[q * n + q].re.abs()).max(f64::MIN_POSITIVE);
                if off <= 1e-15 * scale {
                    continue;
                }
                rotated = true;
                let phase = hpq / off;
                let zeta = (h[q * n + q].re - h[p * n + p].re) / (2.0 * off);
                let t = if zeta >= 0.0 {
                    1.0 / (zeta + (1.0 + zeta * zeta).sqrt())
                } else {
                    -1.0 / (-zeta + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                // Unitary similarity on the (p, q) plane with
                // U = [[c, s*phase], [-s*conj(phase), c]].
                for k in 0..n {
                    let hkp = h[k * n + p];
                    let hkq = h[k * n + q];
                    h[k * n + p] = hkp * c - hkq * phase.conj() * s;
                    h[k * n + q] = hkp * phase * s + hkq * c;
                }
                for k in 0..n {
                    let hpk = h[p * n + k];
                    let hqk = h[q * n + k];
                    h[p * n + k] = hpk * c - hqk * phase * s;
                    h[q * n + k] = hpk * phase.conj() * s + hqk * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    (0..n).map(|i| h[i * n + i].re).collect()
}

/// Effective number of Schmidt mode pairs, `K = 1 / sum(lambda^2)`; 1 for a
/// separable state.
pub fn schmidt_number(spectrum: &SchmidtSpectrum) -> f64 {
    let s2: f64 = spectrum.lambdas.iter().map(|l| l * l).sum();
    1.0 / s2
}

/// Entanglement entropy `S = -sum(lambda log2 lambda)` in bits, with the
/// `0 log 0 = 0` convention.
pub fn entanglement_entropy(spectrum: &SchmidtSpectrum) -> f64 {
    -spectrum
        .lambdas
        .iter()
        .filter(|l| **l > 0.0)
        .map(|l| l * l.log2())
        .sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::make_grid;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn jsa_from(amps: Vec<Complex64>, ns: usize, ni: usize) -> JointSpectralAmplitude {
        let gs = make_grid(1e15, 1e10, ns).unwrap();
        let gi = make_grid(1.2e15, 1e10, ni).unwrap();
        JointSpectralAmplitude::from_matrix(gs, gi, amps, false).unwrap()
    }

    #[test]
    fn separable_product_has_unit_schmidt_number() {
        let n = 12;
        let f: Vec<f64> = (0..n)
            .map(|i| (-((i as f64 - 5.0) / 3.0).powi(2)).exp())
            .collect();
        let g: Vec<f64> = (0..n).map(|i| 1.0 / (1.0 + (i as f64 - 7.0).powi(2))).collect();
        let mut amps = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                amps.push(Complex64::new(f[i] * g[j], 0.5 * f[i] * g[j]));
            }
        }
        let spec = schmidt_decompose(&jsa_from(amps, n, n)).unwrap();
        assert_relative_eq!(spec.coefficients()[0], 1.0, max_relative = 1e-9);
        assert!((schmidt_number(&spec) - 1.0).abs() < 1e-9);
        assert!(entanglement_entropy(&spec).abs() < 1e-9);
    }

    #[test]
    fn constructed_rank_two_state() {
        // Equal superposition of two orthogonal products on a 4x4 grid.
        let n = 4;
        let mut amps = alloc::vec![Complex64::new(0.0, 0.0); n * n];
        amps[0] = Complex64::new(1.0, 0.0);
        amps[n + 1] = Complex64::new(1.0, 0.0);
        let spec = schmidt_decompose(&jsa_from(amps, n, n)).unwrap();
        assert_eq!(spec.coefficients().len(), 2);
        assert_abs_diff_eq!(spec.coefficients()[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(spec.coefficients()[1], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(schmidt_number(&spec), 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(entanglement_entropy(&spec), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn entropy_of_fixed_spectrum() {
        let spec = SchmidtSpectrum {
            lambdas: alloc::vec![0.7, 0.2, 0.1],
        };
        assert_abs_diff_eq!(entanglement_entropy(&spec), 1.1568, epsilon = 5e-5);
        let trivial = SchmidtSpectrum {
            lambdas: alloc::vec![1.0],
        };
        assert_eq!(entanglement_entropy(&trivial), 0.0);
        assert_eq!(schmidt_number(&trivial), 1.0);
    }

    #[test]
    fn svd_matches_reduced_density_oracle() {
        let mut rng = StdRng::seed_from_u64(20260810);
        for _trial in 0..100 {
            let n = 8;
            let amps: Vec<Complex64> = (0..n * n)
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let jsa = jsa_from(amps, n, n);
            let svd = schmidt_decompose(&jsa).unwrap();
            let eig = reduced_density_spectrum(&jsa).unwrap();
            assert_eq!(svd.coefficients().len(), eig.coefficients().len());
            for (a, b) in svd.coefficients().iter().zip(eig.coefficients().iter()) {
                assert!((a - b).abs() < 1e-10, "svd {a} vs eigen {b}");
            }
        }
    }

    #[test]
    fn invariances_of_schmidt_number() {
        let mut rng = StdRng::seed_from_u64(7);
        let (ns, ni) = (9, 6);
        let amps: Vec<Complex64> = (0..ns * ni)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let base = jsa_from(amps.clone(), ns, ni);
        let k0 = schmidt_number(&schmidt_decompose(&base).unwrap());

        // Global complex scalar.
        let scaled: Vec<Complex64> = amps.iter().map(|a| a * Complex64::new(2.0, -3.0)).collect();
        let k1 = schmidt_number(&schmidt_decompose(&jsa_from(scaled, ns, ni)).unwrap());
        assert_relative_eq!(k0, k1, max_relative = 1e-12);

        // Independent row and column permutations.
        let row_perm = [3usize, 0, 7, 1, 8, 5, 2, 6, 4];
        let col_perm = [5usize, 2, 0, 4, 1, 3];
        let mut permuted = alloc::vec![Complex64::new(0.0, 0.0); ns * ni];
        for i in 0..ns {
            for j in 0..ni {
                permuted[i * ni + j] = amps[row_perm[i] * ni + col_perm[j]];
            }
        }
        let k2 = schmidt_number(&schmidt_decompose(&jsa_from(permuted, ns, ni)).unwrap());
        assert_relative_eq!(k0, k2, max_relative = 1e-12);

        assert!(k0 >= 1.0);
    }

    #[test]
    fn zero_matrix_is_rejected() {
        let amps = alloc::vec![Complex64::new(0.0, 0.0); 16];
        assert!(matches!(
            schmidt_decompose(&jsa_from(amps, 4, 4)),
            Err(ModelError::EmptyMatrix)
        ));
    }

    #[test]
    fn wide_matrices_transpose_cleanly() {
        // A wide matrix must give the same spectrum as its transpose.
        let mut rng = StdRng::seed_from_u64(99);
        let (ns, ni) = (5, 11);
        let amps: Vec<Complex64> = (0..ns * ni)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let wide = jsa_from(amps.clone(), ns, ni);
        let mut t = alloc::vec![Complex64::new(0.0, 0.0); ns * ni];
        for i in 0..ns {
            for j in 0..ni {
                t[j * ns + i] = amps[i * ni + j];
            }
        }
        let tall = jsa_from(t, ni, ns);
        let a = schmidt_decompose(&wide).unwrap();
        let b = schmidt_decompose(&tall).unwrap();
        for (x, y) in a.coefficients().iter().zip(b.coefficients().iter()) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}
