use super::{
    eval_expression, parse_expression, CorpusEntry, EvalError, ExpressionNode, ParseError,
};
use crate::oracle::RealFunction;
use crate::scalar::Real;
use crate::RationalSeries;

/// A real function known through a formula, optionally with its exact Taylor
/// series at 0.
#[derive(Clone, Debug)]
pub struct SmoothFunction {
    pub name: String,
    pub expression: ExpressionNode,
    pub exact_series: Option<RationalSeries>,
    /// False when the formula contains a flat (non-analytic) part.
    pub analytic: bool,
}

impl SmoothFunction {
    pub fn new(name: impl Into<String>, expression: ExpressionNode) -> Self {
        let analytic = !expression.uses_flatbump();
        SmoothFunction {
            name: name.into(),
            expression,
            exact_series: None,
            analytic,
        }
    }

    pub fn parse(text: &str) -> Result<Self, ParseError> {
        Ok(Self::new(text, parse_expression(text)?))
    }

    pub fn from_entry(entry: &CorpusEntry) -> Self {
        SmoothFunction {
            name: entry.name.to_string(),
            expression: entry.expression.clone(),
            exact_series: entry.exact_series.clone(),
            analytic: entry.analytic,
        }
    }

    pub fn with_exact_series(mut self, series: RationalSeries) -> Self {
        self.exact_series = Some(series);
        self
    }

    pub fn eval<T: Real>(&self, x: T) -> Result<T, EvalError> {
        eval_expression(&self.expression, x)
    }
}

impl<T: Real> RealFunction<T> for SmoothFunction {
    fn value(&self, x: T) -> Option<T> {
        self.eval(x).ok()
    }
}
