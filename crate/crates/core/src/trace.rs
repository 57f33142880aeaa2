//! Per-recursion logs kept by the refuters.

use serde::Serialize;

use crate::circuit::Measures;

/// One branch decision taken by a refuter.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceStep {
    /// Recursion depth (0 for the top-level call).
    pub depth: usize,
    /// Short branch label, e.g. `"base"`, `"case1"`, `"substitute"`.
    pub case: String,
    /// Free-form detail: which variable was substituted, to what, etc.
    pub note: String,
    pub before: Measures,
    pub after: Measures,
}

impl TraceStep {
    /// Binary gates removed by this step (zero when the step grew the circuit).
    pub fn gates_eliminated(&self) -> usize {
        self.before.sigma.saturating_sub(self.after.sigma)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct RefutationTrace {
    pub steps: Vec<TraceStep>,
}

impl RefutationTrace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(
        &mut self,
        depth: usize,
        case: &str,
        note: impl Into<String>,
        before: Measures,
        after: Measures,
    ) {
        self.steps.push(TraceStep {
            depth,
            case: case.to_string(),
            note: note.into(),
            before,
            after,
        });
    }

    pub fn cases(&self) -> Vec<&str> {
        self.steps.iter().map(|s| s.case.as_str()).collect()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}
