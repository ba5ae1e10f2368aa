//! Closed-form conformal sets for ridge regression with a positive penalty.
//!
//! Everything is expressed through the dual quantities `G = (XXᵀ + λI)⁻¹`
//! and `c = Gy`. With `Q = G·X·Tᵀ` for a batch of test features `T`:
//!
//! * fitted training residuals are `λcᵢ`;
//! * removing a set `S` of training points moves the prediction at `t` by
//!   `−Σ_{i∈S} Q[i,t]·wᵢ` with `w_S = G_SS⁻¹ c_S`, and the out-of-fold
//!   residual of `i ∈ S` is exactly `|wᵢ|`;
//! * appending `(t, y)` moves the prediction at training point `j` by
//!   `Q[j,t]·(y − μ̂(t))/s` with `s = 1 + (tᵀt − k(t)ᵀG k(t))/λ`.
//!
//! These replace `n` (or `K`, or one per test label) refits by a single
//! factorization.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::conformal::cross::plus_interval;
use crate::conformal::full::{
    conformal_set_from_lines, full_conformal_exact, ResidualLine, SymmetryPolicy,
};
use crate::dataset::Dataset;
use crate::error::{check_alpha, Error, Result};
use crate::folds::FoldPartition;
use crate::order_stats::conformal_rank;
use crate::prediction_set::PredictionSet;
use crate::regressors::{add_diagonal, LinearModel, Ridge, RidgeConfig};

/// Test points handled per block, bounding the `n × block` work matrix.
const BLOCK: usize = 512;

struct TestBlock {
    /// Test rows.
    t: DMatrix<f64>,
    /// `X·Tᵀ`.
    k: DMatrix<f64>,
    /// `G·X·Tᵀ`.
    q: DMatrix<f64>,
    /// `μ̂(T)`.
    mu: DVector<f64>,
}

/// A ridge fit kept in dual form.
#[derive(Debug, Clone)]
pub struct DualRidge {
    lambda: f64,
    dim: usize,
    x: DMatrix<f64>,
    g: DMatrix<f64>,
    c: DVector<f64>,
    coef: DVector<f64>,
    /// Cholesky factor of `XᵀX + λI`, kept when `d ≤ n` where it gives a
    /// better-conditioned test leverage than the dual expression.
    primal: Option<Cholesky<f64, Dyn>>,
}

impl DualRidge {
    pub fn fit(train: &Dataset, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "dual ridge needs a positive penalty, got {lambda}"
            )));
        }
        if train.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let (n, d) = (train.len(), train.dim());
        let x = DMatrix::from_row_slice(n, d, train.features());
        let y = DVector::from_column_slice(train.labels());
        let mut gram = &x * x.transpose();
        add_diagonal(&mut gram, lambda);
        let g = gram.cholesky().ok_or(Error::Singular)?.inverse();
        let c = &g * &y;
        let coef = x.transpose() * &c;
        let primal = if d <= n {
            let mut normal = x.transpose() * &x;
            add_diagonal(&mut normal, lambda);
            normal.cholesky()
        } else {
            None
        };
        Ok(Self {
            lambda,
            dim: d,
            x,
            g,
            c,
            coef,
            primal,
        })
    }

    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }

    pub fn model(&self) -> LinearModel {
        LinearModel::new(
            self.coef.as_slice().to_vec(),
            format!("ridge(lambda={})", self.lambda),
        )
    }

    /// Training residuals `yᵢ − μ̂(xᵢ)`.
    pub fn fitted_residuals(&self) -> Vec<f64> {
        self.c.iter().map(|ci| self.lambda * ci).collect()
    }

    fn test_matrix(&self, features: &[f64]) -> Result<DMatrix<f64>> {
        if self.dim == 0 || !features.len().is_multiple_of(self.dim) {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: features.len(),
            });
        }
        Ok(DMatrix::from_row_slice(
            features.len() / self.dim,
            self.dim,
            features,
        ))
    }

    /// Calls `f` on consecutive blocks of test rows, in order.
    fn for_blocks(&self, features: &[f64], mut f: impl FnMut(&TestBlock)) -> Result<()> {
        let t_all = self.test_matrix(features)?;
        let m = t_all.nrows();
        let mut start = 0;
        while start < m {
            let rows = BLOCK.min(m - start);
            let t = t_all.rows(start, rows).into_owned();
            let k = &self.x * t.transpose();
            let q = &self.g * &k;
            let mu = &t * &self.coef;
            f(&TestBlock { t, k, q, mu });
            start += rows;
        }
        Ok(())
    }

    /// `tᵀ(XᵀX + λI)⁻¹t` for each test row.
    fn test_leverage(&self, block: &TestBlock) -> Vec<f64> {
        let t = &block.t;
        match &self.primal {
            Some(chol) => {
                let solved = chol.solve(&t.transpose());
                (0..t.nrows())
                    .map(|col| t.row(col).transpose().dot(&solved.column(col)))
                    .collect()
            }
            None => (0..t.nrows())
                .map(|col| {
                    (t.row(col).norm_squared() - block.k.column(col).dot(&block.q.column(col)))
                        / self.lambda
                })
                .collect(),
        }
    }

    /// Exact full-conformal sets for each row of `features` (row-major).
    pub fn full_conformal_sets(&self, features: &[f64], alpha: f64) -> Result<Vec<PredictionSet>> {
        Ok(self
            .batch_sets(
                features,
                alpha,
                &BatchRequest {
                    full: true,
                    ..BatchRequest::default()
                },
            )?
            .full)
    }

    /// Jackknife+ intervals for each row of `features`.
    pub fn jackknife_plus_sets(&self, features: &[f64], alpha: f64) -> Result<Vec<PredictionSet>> {
        Ok(self
            .batch_sets(
                features,
                alpha,
                &BatchRequest {
                    jackknife_plus: true,
                    ..BatchRequest::default()
                },
            )?
            .jackknife_plus)
    }

    /// CV+ intervals for each row of `features`.
    pub fn cv_plus_sets(
        &self,
        features: &[f64],
        alpha: f64,
        folds: &FoldPartition,
    ) -> Result<Vec<PredictionSet>> {
        Ok(self
            .batch_sets(
                features,
                alpha,
                &BatchRequest {
                    cv_plus: Some(folds),
                    ..BatchRequest::default()
                },
            )?
            .cv_plus)
    }

    /// Out-of-fold weights `w_S = G_SS⁻¹ c_S` for every fold `S`.
    fn fold_weights(&self, folds: &FoldPartition) -> Result<Vec<f64>> {
        let mut w = vec![0.0; self.len()];
        for fold in folds.folds() {
            let g_ss = DMatrix::from_fn(fold.len(), fold.len(), |a, b| self.g[(fold[a], fold[b])]);
            let c_s = DVector::from_iterator(fold.len(), fold.iter().map(|&i| self.c[i]));
            let w_s = g_ss.cholesky().ok_or(Error::Singular)?.solve(&c_s);
            for (&i, v) in fold.iter().zip(w_s.iter()) {
                w[i] = *v;
            }
        }
        Ok(w)
    }

    /// Several methods on the same test rows, sharing one pass over `Q`.
    pub fn batch_sets(
        &self,
        features: &[f64],
        alpha: f64,
        request: &BatchRequest,
    ) -> Result<BatchSets> {
        check_alpha(alpha)?;
        let n = self.len();
        if (request.jackknife_plus || request.cv_plus.is_some()) && n < 2 {
            return Err(Error::TooFewPoints { needed: 2, got: n });
        }
        let jk_w: Vec<f64> = if request.jackknife_plus {
            (0..n).map(|i| self.c[i] / self.g[(i, i)]).collect()
        } else {
            Vec::new()
        };
        let jk_residuals: Vec<f64> = jk_w.iter().map(|v| v.abs()).collect();
        let cv = match request.cv_plus {
            Some(folds) => {
                if folds.len() != n {
                    return Err(Error::FoldMismatch {
                        partition: folds.len(),
                        data: n,
                    });
                }
                let w = self.fold_weights(folds)?;
                let residuals: Vec<f64> = w.iter().map(|v| v.abs()).collect();
                Some((folds, w, residuals))
            }
            None => None,
        };
        let rank = conformal_rank(n, alpha);
        let fitted = self.fitted_residuals();

        let mut out = BatchSets::default();
        let mut lines = vec![ResidualLine::constant(0.0); n];
        let mut centers = vec![0.0; n];
        let mut shift = vec![0.0; cv.as_ref().map_or(0, |(f, _, _)| f.num_folds())];
        self.for_blocks(features, |block| {
            let (q, mu) = (&block.q, &block.mu);
            let leverage = if request.full {
                self.test_leverage(block)
            } else {
                Vec::new()
            };
            for col in 0..block.t.nrows() {
                let center = mu[col];
                if request.full {
                    let s = 1.0 + leverage[col].max(0.0);
                    for (j, line) in lines.iter_mut().enumerate() {
                        let qj = q[(j, col)];
                        *line = ResidualLine::new(fitted[j] + qj * center / s, -qj / s);
                    }
                    let test = ResidualLine::new(-center / s, 1.0 / s);
                    out.full.push(conformal_set_from_lines(&lines, test, rank));
                }
                if request.jackknife_plus {
                    for (i, ci) in centers.iter_mut().enumerate() {
                        *ci = center - q[(i, col)] * jk_w[i];
                    }
                    out.jackknife_plus
                        .push(plus_interval(&centers, &jk_residuals, alpha));
                }
                if let Some((folds, w, residuals)) = &cv {
                    shift.iter_mut().for_each(|s| *s = 0.0);
                    for i in 0..n {
                        shift[folds.fold_of(i)] += q[(i, col)] * w[i];
                    }
                    for (i, ci) in centers.iter_mut().enumerate() {
                        *ci = center - shift[folds.fold_of(i)];
                    }
                    out.cv_plus.push(plus_interval(&centers, residuals, alpha));
                }
            }
        })?;
        Ok(out)
    }
}

/// Which sets [`DualRidge::batch_sets`] should build.
#[derive(Debug, Clone, Copy, Default)]
pub struct BatchRequest<'a> {
    pub full: bool,
    pub jackknife_plus: bool,
    pub cv_plus: Option<&'a FoldPartition>,
}

/// One entry per test row for every requested method; other fields stay empty.
#[derive(Debug, Clone, Default)]
pub struct BatchSets {
    pub full: Vec<PredictionSet>,
    pub jackknife_plus: Vec<PredictionSet>,
    pub cv_plus: Vec<PredictionSet>,
}

/// Exact full-conformal set for ridge regression at one test point.
///
/// Uses the dual closed form when `λ > 0` and two augmented refits when
/// `λ = 0`.
pub fn full_conformal_ridge_exact(
    train: &Dataset,
    x_new: &[f64],
    ridge: RidgeConfig,
    alpha: f64,
) -> Result<PredictionSet> {
    check_alpha(alpha)?;
    train.check_dim(x_new)?;
    if ridge.lambda == 0.0 {
        return full_conformal_exact(
            train,
            x_new,
            &Ridge::new(ridge),
            alpha,
            SymmetryPolicy::Require,
        );
    }
    let engine = DualRidge::fit(train, ridge.lambda)?;
    Ok(engine.full_conformal_sets(x_new, alpha)?.remove(0))
}
