use std::fmt;

use serde::Serialize;

/// An ordered list of invariant violations. Empty means valid.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct ValidationReport<V> {
    pub violations: Vec<V>,
}

impl<V> Default for ValidationReport<V> {
    fn default() -> Self {
        Self { violations: Vec::new() }
    }
}

impl<V> ValidationReport<V> {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn push(&mut self, v: V) {
        self.violations.push(v);
    }

    pub fn len(&self) -> usize {
        self.violations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, V> {
        self.violations.iter()
    }
}

impl<V: fmt::Display> fmt::Display for ValidationReport<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}
