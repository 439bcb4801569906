use std::fmt;

use crate::error::{Error, Result};

/// Ordered subsystem dimensions of a multipartite Hilbert space.
///
/// Indices are row-major: the last subsystem varies fastest, matching the
/// Kronecker product convention.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DimList(Vec<usize>);

impl DimList {
    pub fn new(dims: impl Into<Vec<usize>>) -> Result<Self> {
        let dims = dims.into();
        if let Some(pos) = dims.iter().position(|&d| d == 0) {
            return Err(Error::InvalidDims(format!(
                "subsystem {pos} has dimension 0"
            )));
        }
        Ok(Self(dims))
    }

    /// A single subsystem of dimension `d`.
    pub fn single(d: usize) -> Result<Self> {
        Self::new(vec![d])
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn dim(&self, k: usize) -> usize {
        self.0[k]
    }

    /// Product of all dimensions (1 for the empty list).
    pub fn total(&self) -> usize {
        self.0.iter().product()
    }

    pub fn concat(&self, other: &DimList) -> DimList {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        DimList(v)
    }

    /// Dimensions of the listed subsystems, in the given order.
    pub fn select(&self, subs: &[usize]) -> DimList {
        DimList(subs.iter().map(|&k| self.0[k]).collect())
    }

    /// Sorted, deduplicated subsystem indices, validated against this list.
    pub fn check_subsystems(&self, subs: &[usize]) -> Result<Vec<usize>> {
        let mut v = subs.to_vec();
        v.sort_unstable();
        v.dedup();
        if let Some(&bad) = v.iter().find(|&&k| k >= self.0.len()) {
            return Err(Error::InvalidDims(format!(
                "subsystem index {bad} out of range for {self}"
            )));
        }
        Ok(v)
    }

    /// Subsystems not in `subs` (which must be sorted).
    pub fn complement(&self, subs: &[usize]) -> Vec<usize> {
        (0..self.0.len()).filter(|k| !subs.contains(k)).collect()
    }

    /// Per-subsystem digits of a flat index.
    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.0.len()];
        for (slot, &d) in out.iter_mut().zip(&self.0).rev() {
            *slot = index % d;
            index /= d;
        }
        out
    }

    pub fn index_of(&self, digits: &[usize]) -> usize {
        digits
            .iter()
            .zip(&self.0)
            .fold(0, |acc, (&x, &d)| acc * d + x)
    }

    /// Digit table for every flat index, `table[i] == self.digits(i)`.
    pub(crate) fn digit_table(&self) -> Vec<Vec<usize>> {
        (0..self.total()).map(|i| self.digits(i)).collect()
    }
}

impl fmt::Display for DimList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl TryFrom<Vec<usize>> for DimList {
    type Error = Error;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        DimList::new(v)
    }
}

impl TryFrom<&[usize]> for DimList {
    type Error = Error;

    fn try_from(v: &[usize]) -> Result<Self> {
        DimList::new(v.to_vec())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digits_round_trip() {
        let d = DimList::new(vec![2, 3, 4]).unwrap();
        assert_eq!(d.total(), 24);
        for i in 0..24 {
            assert_eq!(d.index_of(&d.digits(i)), i);
        }
        assert_eq!(d.digits(23), vec![1, 2, 3]);
        assert_eq!(d.digits(4), vec![0, 1, 0]);
    }

    #[test]
    fn rejects_zero_dimension() {
        assert!(DimList::new(vec![2, 0]).is_err());
    }

    #[test]
    fn empty_list_is_scalar() {
        let d = DimList::new(Vec::new()).unwrap();
        assert_eq!(d.total(), 1);
        assert_eq!(d.digits(0), Vec::<usize>::new());
    }

    #[test]
    fn subsystem_validation() {
        let d = DimList::new(vec![2, 2]).unwrap();
        assert_eq!(d.check_subsystems(&[1, 0, 1]).unwrap(), vec![0, 1]);
        assert!(d.check_subsystems(&[2]).is_err());
        assert_eq!(d.complement(&[1]), vec![0]);
    }
}
