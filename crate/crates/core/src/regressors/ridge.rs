//! Ridge regression without intercept.
//!
//! `β̂ = argmin Σ (yᵢ − xᵢᵀβ)² + λ‖β‖²`, solved through the primal normal
//! equations `(XᵀX + λI)β = Xᵀy` or the dual form `β = Xᵀ(XXᵀ + λI)⁻¹y`.
//! With `λ = 0` the minimum-norm least-squares solution is returned.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::model::{BoxedModel, FittedModel, LabelResponse, RegressionAlgorithm};

/// Which linear system to solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RidgeSolver {
    /// Primal when `d ≤ n`, dual otherwise.
    #[default]
    Auto,
    Primal,
    Dual,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RidgeConfig {
    pub lambda: f64,
    pub solver: RidgeSolver,
}

impl RidgeConfig {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "ridge penalty must be finite and >= 0, got {lambda}"
            )));
        }
        Ok(Self {
            lambda,
            solver: RidgeSolver::Auto,
        })
    }

    pub fn with_solver(mut self, solver: RidgeSolver) -> Self {
        self.solver = solver;
        self
    }
}

/// A fitted linear predictor `x ↦ xᵀβ`.
#[derive(Debug, Clone)]
pub struct LinearModel {
    coef: Vec<f64>,
    label: String,
}

impl LinearModel {
    pub fn new(coef: Vec<f64>, label: impl Into<String>) -> Self {
        Self {
            coef,
            label: label.into(),
        }
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coef
    }
}

impl FittedModel for LinearModel {
    fn predict(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.coef.len());
        dot(&self.coef, x)
    }

    fn label(&self) -> &str {
        &self.label
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}

/// Ridge regression as a [`RegressionAlgorithm`].
#[derive(Debug, Clone, Copy)]
pub struct Ridge {
    config: RidgeConfig,
}

impl Ridge {
    pub fn new(config: RidgeConfig) -> Self {
        Self { config }
    }

    pub fn with_lambda(lambda: f64) -> Result<Self> {
        Ok(Self::new(RidgeConfig::new(lambda)?))
    }

    pub fn config(&self) -> RidgeConfig {
        self.config
    }
}

impl RegressionAlgorithm for Ridge {
    fn name(&self) -> &str {
        "ridge"
    }

    fn fit(&self, data: &Dataset) -> Result<BoxedModel> {
        Ok(Box::new(ridge_fit(data, self.config)?))
    }

    fn is_symmetric(&self) -> bool {
        true
    }

    fn label_response(&self) -> LabelResponse {
        LabelResponse::Affine
    }
}

/// Fits ridge regression. Points are put in a canonical order first, so the
/// result is bit-for-bit invariant under permutations of `data`.
pub fn ridge_fit(data: &Dataset, config: RidgeConfig) -> Result<LinearModel> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let (n, d) = (data.len(), data.dim());
    let order = canonical_order(data);
    let canon = data.subset(&order);
    let x = DMatrix::from_row_slice(n, d, canon.features());
    let y = DVector::from_column_slice(canon.labels());

    let use_dual = match config.solver {
        RidgeSolver::Auto => d > n,
        RidgeSolver::Primal => false,
        RidgeSolver::Dual => true,
    };
    let beta = if config.lambda == 0.0 {
        min_norm_least_squares(&x, &y)?
    } else if use_dual {
        let mut gram = &x * x.transpose();
        add_diagonal(&mut gram, config.lambda);
        match gram.cholesky() {
            Some(chol) => x.transpose() * chol.solve(&y),
            None => min_norm_penalized(&x, &y, config.lambda)?,
        }
    } else {
        let mut normal = x.transpose() * &x;
        add_diagonal(&mut normal, config.lambda);
        let rhs = x.transpose() * &y;
        match normal.cholesky() {
            Some(chol) => chol.solve(&rhs),
            None => min_norm_penalized(&x, &y, config.lambda)?,
        }
    };
    Ok(LinearModel::new(
        beta.as_slice().to_vec(),
        format!("ridge(lambda={})", config.lambda),
    ))
}

pub(crate) fn add_diagonal(m: &mut DMatrix<f64>, v: f64) {
    for i in 0..m.nrows().min(m.ncols()) {
        m[(i, i)] += v;
    }
}

fn min_norm_least_squares(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
    let svd = x.clone().svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let eps = smax * (x.nrows().max(x.ncols()) as f64) * f64::EPSILON;
    svd.solve(y, eps).map_err(|_| Error::Singular)
}

/// SVD route for the penalized problem: `β = V diag(s/(s²+λ)) Uᵀy`.
fn min_norm_penalized(x: &DMatrix<f64>, y: &DVector<f64>, lambda: f64) -> Result<DVector<f64>> {
    let svd = x.clone().svd(true, true);
    let (u, vt) = match (svd.u, svd.v_t) {
        (Some(u), Some(vt)) => (u, vt),
        _ => return Err(Error::Singular),
    };
    let mut uty = u.transpose() * y;
    for (c, s) in uty.iter_mut().zip(svd.singular_values.iter()) {
        *c *= s / (s * s + lambda);
    }
    Ok(vt.transpose() * uty)
}

fn canonical_order(data: &Dataset) -> Vec<usize> {
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.sort_by(|&a, &b| {
        for (u, v) in data.x(a).iter().zip(data.x(b)) {
            match u.total_cmp(v) {
                Ordering::Equal => continue,
                other => return other,
            }
        }
        data.y(a).total_cmp(&data.y(b))
    });
    order
}
