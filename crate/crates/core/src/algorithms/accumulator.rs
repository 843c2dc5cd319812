use std::collections::BTreeMap;

use super::AlgoError;
use crate::instance::{SupportedMatrix, TriInstance};
use crate::oracle::processed_sum;
use crate::semiring::{Semiring, Value};
use crate::triangle::{Triangle, TriangleSet};

/// Running output values for every requested `(i, k)`, together with the
/// set of triangles whose products have been added.
#[derive(Clone, Debug)]
pub struct OutputAccumulator {
    semiring: Semiring,
    values: BTreeMap<(u32, u32), Value>,
    processed: TriangleSet,
}

impl OutputAccumulator {
    pub fn new(inst: &TriInstance) -> Self {
        let zero = inst.semiring.zero();
        OutputAccumulator {
            semiring: inst.semiring,
            values: inst.x.entries().map(|e| (e, zero)).collect(),
            processed: TriangleSet::new(inst.n),
        }
    }

    /// Adds `v` to `X_ik`.
    pub fn add(&mut self, i: u32, k: u32, v: Value) -> Result<(), AlgoError> {
        let s = self.semiring;
        let slot = self
            .values
            .get_mut(&(i, k))
            .ok_or_else(|| AlgoError::Internal(format!("output ({i}, {k}) was not requested")))?;
        *slot = s.add(*slot, v);
        Ok(())
    }

    pub(crate) fn mark_processed<'a>(
        &mut self,
        triangles: impl IntoIterator<Item = &'a Triangle>,
    ) -> Result<(), AlgoError> {
        for t in triangles {
            if !self.processed.insert(*t) {
                return Err(AlgoError::Internal(format!("triangle {t} processed twice")));
            }
        }
        Ok(())
    }

    pub fn get(&self, i: u32, k: u32) -> Option<Value> {
        self.values.get(&(i, k)).copied()
    }

    pub fn values(&self) -> &BTreeMap<(u32, u32), Value> {
        &self.values
    }

    pub fn processed(&self) -> &TriangleSet {
        &self.processed
    }

    /// Recomputes the processed-set sum directly and compares.
    pub fn invariant_holds(&self, inst: &TriInstance) -> bool {
        processed_sum(inst, &self.processed) == self.values
    }

    /// The outputs as a matrix on the pattern of `X`.
    pub fn to_matrix(&self, inst: &TriInstance) -> SupportedMatrix {
        let values = inst
            .x
            .rows
            .iter()
            .enumerate()
            .map(|(i, row)| row.iter().map(|&k| self.values[&(i as u32, k)]).collect())
            .collect();
        SupportedMatrix::new(inst.x.clone(), values)
    }
}
