use crate::error::Result;
use crate::esn::StateMatrix;
use crate::linalg::{solve_regularized_ls, DenseMatrix};

/// Trained linear readout: maps a feature vector z to an output v = W z.
#[derive(Debug, Clone)]
pub struct ReadoutLayer {
    pub w_out: DenseMatrix,
    pub lambda: f64,
    pub feature_dim: usize,
    pub target_dim: usize,
}

impl ReadoutLayer {
    /// v = W z for a single feature column.
    pub fn evaluate(&self, z: &[f64]) -> Vec<f64> {
        let mut v = vec![0.0; self.target_dim];
        self.w_out.matvec(z, &mut v);
        v
    }

    /// W applied to every column of a feature matrix.
    pub fn evaluate_all(&self, features: &DenseMatrix) -> DenseMatrix {
        self.w_out.mul(features)
    }
}

/// Fits the readout in closed form: W minimizes the ridge-regularized
/// squared error over the collected features, through one call to the
/// regularized least-squares solver (no iteration anywhere). A singular
/// system with lambda = 0 is reported with a hint to raise lambda.
pub fn train_readout(
    features: &StateMatrix,
    targets: &DenseMatrix,
    lambda: f64,
) -> Result<ReadoutLayer> {
    let w_out = solve_regularized_ls(&features.features, targets, lambda)?;
    Ok(ReadoutLayer {
        feature_dim: w_out.cols(),
        target_dim: w_out.rows(),
        w_out,
        lambda,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::linalg::Rng;

    fn feature_matrix(features: DenseMatrix) -> StateMatrix {
        StateMatrix {
            raw_states: features.clone(),
            features,
            washout: 0,
        }
    }

    #[test]
    fn identity_features_reproduce_targets() {
        let features = feature_matrix(DenseMatrix::identity(4));
        let targets = DenseMatrix::new(
            2,
            4,
            vec![1.0, -2.0, 3.0, 0.5, 0.0, 4.0, -1.0, 2.5],
        )
        .unwrap();
        let readout = train_readout(&features, &targets, 0.0).unwrap();
        assert_eq!(readout.feature_dim, 4);
        assert_eq!(readout.target_dim, 2);
        for i in 0..2 {
            for j in 0..4 {
                assert!((readout.w_out.get(i, j) - targets.get(i, j)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn matches_explicit_normal_equation_formula() {
        // W = Y Z^T (Z Z^T + lambda I)^(-1), evaluated independently
        let mut rng = Rng::new(777);
        let (d, t, m) = (3usize, 40usize, 1usize);
        let z = DenseMatrix::new(d, t, (0..d * t).map(|_| rng.uniform(-1.0, 1.0)).collect())
            .unwrap();
        let y = DenseMatrix::new(m, t, (0..m * t).map(|_| rng.uniform(-1.0, 1.0)).collect())
            .unwrap();
        let lambda = 0.1;

        let readout = train_readout(&feature_matrix(z.clone()), &y, lambda).unwrap();

        let zn = nalgebra::DMatrix::from_fn(d, t, |i, j| z.get(i, j));
        let yn = nalgebra::DMatrix::from_fn(m, t, |i, j| y.get(i, j));
        let gram = &zn * zn.transpose() + lambda * nalgebra::DMatrix::identity(d, d);
        let w_ref = &yn * zn.transpose() * gram.try_inverse().unwrap();

        for i in 0..m {
            for j in 0..d {
                assert!(
                    (readout.w_out.get(i, j) - w_ref[(i, j)]).abs() < 1e-8,
                    "entry ({i},{j}) diverges from the closed-form solution"
                );
            }
        }
    }

    #[test]
    fn training_error_grows_with_lambda() {
        let mut rng = Rng::new(31);
        let (d, t, m) = (5usize, 30usize, 2usize);
        let z = DenseMatrix::new(d, t, (0..d * t).map(|_| rng.uniform(-1.0, 1.0)).collect())
            .unwrap();
        let y = DenseMatrix::new(m, t, (0..m * t).map(|_| rng.uniform(-1.0, 1.0)).collect())
            .unwrap();
        let features = feature_matrix(z.clone());

        let mut previous = -1.0;
        for lambda in [0.0, 1e-6, 1e-3, 0.1, 10.0] {
            let readout = train_readout(&features, &y, lambda).unwrap();
            let predicted = readout.evaluate_all(&z);
            let mut err = 0.0;
            for i in 0..m {
                for j in 0..t {
                    let r = predicted.get(i, j) - y.get(i, j);
                    err += r * r;
                }
            }
            assert!(
                err + 1e-12 >= previous,
                "training error decreased from {previous} to {err} at lambda {lambda}"
            );
            previous = err;
        }
    }

    #[test]
    fn square_full_rank_features_interpolate_at_zero_lambda() {
        let mut rng = Rng::new(99);
        let n = 6;
        let z = DenseMatrix::new(n, n, (0..n * n).map(|_| rng.uniform(-1.0, 1.0)).collect())
            .unwrap();
        let y = DenseMatrix::new(1, n, (0..n).map(|_| rng.uniform(-1.0, 1.0)).collect())
            .unwrap();
        let readout = train_readout(&feature_matrix(z.clone()), &y, 0.0).unwrap();
        let predicted = readout.evaluate_all(&z);
        for j in 0..n {
            assert!((predicted.get(0, j) - y.get(0, j)).abs() < 1e-8);
        }
    }

    #[test]
    fn column_mismatch_is_rejected() {
        let features = feature_matrix(DenseMatrix::zeros(2, 5));
        let targets = DenseMatrix::zeros(1, 4);
        assert!(matches!(
            train_readout(&features, &targets, 0.0),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn singular_system_at_zero_lambda_names_the_remedy() {
        let features = feature_matrix(DenseMatrix::zeros(3, 8));
        let targets = DenseMatrix::zeros(1, 8);
        match train_readout(&features, &targets, 0.0) {
            Err(e @ Error::SingularSystem) => {
                assert!(e.to_string().contains("ridge"));
            }
            other => panic!("expected a singular-system error, got {other:?}"),
        }
        // the same system trains once regularized
        assert!(train_readout(&features, &targets, 1e-8).is_ok());
    }

    #[test]
    fn invalid_lambda_is_rejected() {
        let features = feature_matrix(DenseMatrix::identity(2));
        let targets = DenseMatrix::zeros(1, 2);
        assert!(train_readout(&features, &targets, -1.0).is_err());
        assert!(train_readout(&features, &targets, f64::NAN).is_err());
    }
}
