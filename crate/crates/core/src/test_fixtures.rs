//! Matrices shared across module tests.
//!
//! `alpha2_3x6` has a two-way tie at the top off-diagonal Gram value
//! (coherence rank 2); `alpha2_3x6_alt` differs only in the sign of entry
//! (2, 5) and pairs with `alpha2_w` to drop the coherence rank to 1.
//! `alpha1_3x4` and `mu95_3x4` share three columns and have coherence rank 1.
//! `integer_3x5` is integer-valued with a zero Gram entry. `dependent_3x5`
//! has two parallel columns and a row reached by only one column, so its
//! right-hand side `dependent_rhs` forces that column into every solution.

use crate::linalg::DenseMatrix;

pub(crate) const FIXTURE_TIE: f64 = 5e-4;

pub(crate) fn alpha2_3x6() -> DenseMatrix {
    DenseMatrix::from_rows(&[
        &[-0.9802, 0.1, 0.3521, 0.9239, 0.9239, 0.7405],
        &[-1.8282, 0.0, 1.0365, 0.3827, -0.3827, -1.6821],
        &[0.3269, 0.0, 1.3563, 0.0, 0.0, -0.2949],
    ])
    .unwrap()
}

pub(crate) fn alpha2_3x6_alt() -> DenseMatrix {
    DenseMatrix::from_rows(&[
        &[-0.9802, 0.1, 0.3521, 0.9239, 0.9239, 0.7405],
        &[-1.8282, 0.0, 1.0365, 0.3827, -0.3827, -1.6821],
        &[0.3269, 0.0, 1.3563, 0.0, 0.0, 0.2949],
    ])
    .unwrap()
}

pub(crate) fn alpha2_w() -> DenseMatrix {
    DenseMatrix::from_rows(&[
        &[-0.9415, -0.5320, -0.4838],
        &[-0.1623, 1.6821, -0.7120],
        &[-0.1461, -0.8757, -1.1742],
    ])
    .unwrap()
}

pub(crate) fn alpha1_3x4() -> DenseMatrix {
    DenseMatrix::from_rows(&[
        &[0.0010, -0.7998, -0.6002, 0.0717],
        &[0.8001, -0.3558, 0.4798, -0.1913],
        &[0.5999, 0.4801, -0.6398, -0.6412],
    ])
    .unwrap()
}

pub(crate) fn mu95_3x4() -> DenseMatrix {
    DenseMatrix::from_rows(&[
        &[0.0010, -0.7998, -0.6002, 1.4290],
        &[0.8001, -0.3558, 0.4798, 1.2393],
        &[0.5999, 0.4801, -0.6398, -0.6849],
    ])
    .unwrap()
}

pub(crate) fn mu95_w() -> DenseMatrix {
    DenseMatrix::from_rows(&[
        &[-0.2078, 0.9393, 0.1905],
        &[-0.9381, 0.5715, 0.3268],
        &[0.6702, 0.2228, 0.7662],
    ])
    .unwrap()
}

pub(crate) fn integer_3x5() -> DenseMatrix {
    DenseMatrix::from_rows(&[
        &[1.0, -3.0, -6.0, 4.0, -3.0],
        &[2.0, 3.0, -2.0, -2.0, 3.0],
        &[3.0, -2.0, 1.0, 0.0, 4.0],
    ])
    .unwrap()
}

pub(crate) fn integer_rhs() -> Vec<f64> {
    vec![3.6159, -3.5189, 2.6954]
}

pub(crate) fn dependent_3x5() -> DenseMatrix {
    DenseMatrix::from_rows(&[
        &[-1.0, 0.0, -4.0, 2.0, 4.0],
        &[0.0, -1.0, -1.0, 1.0, 2.0],
        &[0.0, 0.0, -1.0, 0.0, 0.0],
    ])
    .unwrap()
}

pub(crate) fn dependent_rhs() -> Vec<f64> {
    vec![-2.0, -0.5, -0.5]
}

pub(crate) fn dependent_candidate() -> Vec<f64> {
    vec![0.0, 0.0, 0.5, 0.0, 0.0]
}

/// Deterministic Gaussian matrix for randomized tests.
pub(crate) fn gaussian_matrix(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let data: Vec<f64> = (0..rows * cols)
        .map(|_| crate::scaling::standard_normal(&mut rng))
        .collect();
    DenseMatrix::new(rows, cols, data).unwrap()
}
