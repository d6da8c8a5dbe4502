use std::fmt;
use std::sync::Arc;

/// Cooperative stop signal polled by the long-running loops.
#[derive(Clone, Default)]
pub struct Budget(Option<Arc<dyn Fn() -> bool + Send + Sync>>);

impl Budget {
    pub fn unlimited() -> Self {
        Budget(None)
    }

    /// `check` returns true once the budget is spent.
    pub fn new(check: impl Fn() -> bool + Send + Sync + 'static) -> Self {
        Budget(Some(Arc::new(check)))
    }

    pub fn exhausted(&self) -> bool {
        self.0.as_ref().is_some_and(|f| f())
    }
}

impl fmt::Debug for Budget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.0.is_some() { "Budget(limited)" } else { "Budget(unlimited)" })
    }
}
