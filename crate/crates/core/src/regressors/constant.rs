use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::model::{BoxedModel, FittedModel, LabelResponse, RegressionAlgorithm};

/// Predicts the same value everywhere.
#[derive(Debug, Clone)]
pub struct ConstantModel {
    value: f64,
    label: String,
}

impl FittedModel for ConstantModel {
    fn predict(&self, _x: &[f64]) -> f64 {
        self.value
    }

    fn label(&self) -> &str {
        &self.label
    }
}

/// Baseline algorithm that ignores its training data.
#[derive(Debug, Clone, Copy)]
pub struct Constant {
    value: f64,
}

impl Constant {
    pub fn new(value: f64) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "constant prediction must be finite, got {value}"
            )));
        }
        Ok(Self { value })
    }

    pub fn zero() -> Self {
        Self { value: 0.0 }
    }
}

impl RegressionAlgorithm for Constant {
    fn name(&self) -> &str {
        "constant"
    }

    fn fit(&self, _data: &Dataset) -> Result<BoxedModel> {
        Ok(Box::new(ConstantModel {
            value: self.value,
            label: format!("constant({})", self.value),
        }))
    }

    fn is_symmetric(&self) -> bool {
        true
    }

    fn label_response(&self) -> LabelResponse {
        LabelResponse::Independent
    }

    fn fit_augmented(&self, data: &Dataset, _x: &[f64], _y: f64) -> Result<BoxedModel> {
        self.fit(data)
    }
}

pub fn constant_fit(data: &Dataset, c: f64) -> Result<BoxedModel> {
    Constant::new(c)?.fit(data)
}
