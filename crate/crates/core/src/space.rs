use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{FormError, Result};
use crate::nodeset::NodeSet;

/// A finite measure space: ordered nodes with positive weights and an
/// optional set of designated boundary nodes.
///
/// Node order is fixed at construction and every vector and coefficient
/// array in the crate is indexed against it.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureSpace {
    names: Vec<String>,
    mass: Vec<f64>,
    boundary: NodeSet,
}

impl MeasureSpace {
    pub fn new(names: Vec<String>, mass: Vec<f64>, boundary: NodeSet) -> Result<Self> {
        if names.is_empty() {
            return Err(FormError::InvalidSpace("no nodes".into()));
        }
        if names.len() != mass.len() {
            return Err(FormError::DimensionMismatch {
                expected: names.len(),
                got: mass.len(),
            });
        }
        let mut seen = HashMap::new();
        for (i, name) in names.iter().enumerate() {
            if let Some(j) = seen.insert(name.as_str(), i) {
                return Err(FormError::InvalidSpace(format!(
                    "duplicate node name {name:?} at positions {j} and {i}"
                )));
            }
        }
        if let Some((i, m)) = mass
            .iter()
            .enumerate()
            .find(|(_, m)| !(m.is_finite() && **m > 0.0))
        {
            return Err(FormError::InvalidSpace(format!(
                "mass at node {i} must be positive, got {m}"
            )));
        }
        if let Some(x) = boundary.max() {
            if x >= names.len() {
                return Err(FormError::InvalidSpace(format!(
                    "boundary node {x} out of range"
                )));
            }
        }
        Ok(Self {
            names,
            mass,
            boundary,
        })
    }

    /// Nodes named "1".."n" with the given masses and no boundary.
    pub fn with_masses(mass: Vec<f64>) -> Result<Self> {
        let names = (1..=mass.len()).map(|i| i.to_string()).collect();
        Self::new(names, mass, NodeSet::new())
    }

    /// `n` nodes of unit mass named "1".."n".
    pub fn uniform(n: usize) -> Result<Self> {
        Self::with_masses(vec![1.0; n])
    }

    pub fn into_shared(self) -> Arc<Self> {
        Arc::new(self)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, x: usize) -> &str {
        &self.names[x]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn boundary(&self) -> &NodeSet {
        &self.boundary
    }

    pub fn interior(&self) -> NodeSet {
        NodeSet::all(self.len()).difference(&self.boundary)
    }

    /// Same nodes and boundary with every mass multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.names.clone(),
            self.mass.iter().map(|m| m * factor).collect(),
            self.boundary.clone(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_nonpositive_mass() {
        assert!(MeasureSpace::with_masses(vec![1.0, 0.0]).is_err());
        assert!(MeasureSpace::with_masses(vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn rejects_boundary_out_of_range() {
        let err = MeasureSpace::new(vec!["a".into()], vec![1.0], NodeSet::singleton(3));
        assert!(err.is_err());
    }

    #[test]
    fn rejects_duplicate_names() {
        let err = MeasureSpace::new(vec!["a".into(), "a".into()], vec![1.0, 1.0], NodeSet::new());
        assert!(err.is_err());
    }

    #[test]
    fn interior_is_complement_of_boundary() {
        let s = MeasureSpace::new(
            vec!["l".into(), "m".into(), "r".into()],
            vec![0.5, 1.0, 0.5],
            [0usize, 2].into_iter().collect(),
        )
        .unwrap();
        assert_eq!(s.interior().to_vec(), vec![1]);
        assert_eq!(s.index_of("r"), Some(2));
    }
}
