use super::MilpModel;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum VerifyError {
    #[error("expected {expected} values, got {got}")]
    Length { expected: usize, got: usize },
    #[error("variable {index} = {value} outside [{lower}, {upper}]")]
    Bound {
        index: usize,
        value: f64,
        lower: f64,
        upper: f64,
    },
    #[error("variable {index} = {value} is not integral")]
    Integrality { index: usize, value: f64 },
    #[error("constraint {index} violated by {amount}")]
    Constraint { index: usize, amount: f64 },
}

/// Checks a candidate point against every bound, row and integrality
/// requirement of `model`. Shares no code with the solver.
pub fn verify_solution(
    model: &MilpModel,
    values: &[f64],
    feasibility_tol: f64,
    integrality_tol: f64,
) -> Result<(), VerifyError> {
    if values.len() != model.variables.len() {
        return Err(VerifyError::Length {
            expected: model.variables.len(),
            got: values.len(),
        });
    }
    for (index, (v, &value)) in model.variables.iter().zip(values).enumerate() {
        if !(value >= v.lower - feasibility_tol && value <= v.upper + feasibility_tol) {
            return Err(VerifyError::Bound {
                index,
                value,
                lower: v.lower,
                upper: v.upper,
            });
        }
        if v.integer && (value - libm::round(value)).abs() > integrality_tol {
            return Err(VerifyError::Integrality { index, value });
        }
    }
    for (index, c) in model.constraints.iter().enumerate() {
        let amount = c.violation(values);
        if amount > feasibility_tol {
            return Err(VerifyError::Constraint { index, amount });
        }
    }
    Ok(())
}
