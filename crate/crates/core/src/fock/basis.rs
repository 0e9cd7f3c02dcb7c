use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::policy::NumericalPolicy;

/// Occupation-number basis of `modes` bosonic modes truncated at a total
/// photon number `cutoff`.
///
/// States are ordered by total photon number first and lexicographically
/// (ascending) within each shell, so every number-conserving transform is
/// block diagonal in this ordering.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FockBasis {
    modes: usize,
    cutoff: usize,
    /// Occupations of all basis states, `modes` entries per state.
    occupations: Vec<u16>,
    /// Start offset of each total-photon shell, plus the final dimension.
    shell_offsets: Vec<usize>,
    index: HashMap<Box<[u16]>, usize>,
}

/// Number of occupation vectors of `modes` modes with total at most `cutoff`,
/// i.e. `C(cutoff + modes, modes)`. `None` on overflow.
pub fn basis_dimension(modes: usize, cutoff: usize) -> Option<usize> {
    let mut d: u128 = 1;
    for k in 1..=modes as u128 {
        d = d.checked_mul(cutoff as u128 + k)? / k;
    }
    usize::try_from(d).ok()
}

impl FockBasis {
    pub fn new(modes: usize, cutoff: usize) -> Result<Self> {
        Self::with_policy(modes, cutoff, &NumericalPolicy::default())
    }

    pub fn with_policy(modes: usize, cutoff: usize, policy: &NumericalPolicy) -> Result<Self> {
        if modes == 0 {
            return Err(Error::InvalidParameter("mode count must be at least 1".into()));
        }
        if cutoff > u16::MAX as usize {
            return Err(Error::InvalidParameter(format!("cutoff {cutoff} too large")));
        }
        let overflow = |dimension| Error::DimensionOverflow {
            modes,
            cutoff,
            dimension,
            max: policy.max_dimension,
        };
        let dim = basis_dimension(modes, cutoff).ok_or_else(|| overflow(usize::MAX))?;
        if dim > policy.max_dimension {
            return Err(overflow(dim));
        }

        let mut occupations = Vec::with_capacity(dim * modes);
        let mut shell_offsets = Vec::with_capacity(cutoff + 2);
        let mut scratch = vec![0u16; modes];
        for total in 0..=cutoff {
            shell_offsets.push(occupations.len() / modes);
            push_compositions(total as u16, 0, &mut scratch, &mut occupations);
        }
        shell_offsets.push(dim);
        debug_assert_eq!(occupations.len(), dim * modes);

        let index = occupations
            .chunks_exact(modes)
            .enumerate()
            .map(|(i, occ)| (occ.to_vec().into_boxed_slice(), i))
            .collect();

        Ok(Self {
            modes,
            cutoff,
            occupations,
            shell_offsets,
            index,
        })
    }

    pub fn shared(modes: usize, cutoff: usize) -> Result<Arc<Self>> {
        Self::new(modes, cutoff).map(Arc::new)
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dimension(&self) -> usize {
        self.shell_offsets[self.cutoff + 1]
    }

    pub fn occupation(&self, i: usize) -> &[u16] {
        &self.occupations[i * self.modes..(i + 1) * self.modes]
    }

    pub fn index_of(&self, occupation: &[u16]) -> Option<usize> {
        self.index.get(occupation).copied()
    }

    /// Total photon number of basis state `i`.
    pub fn total(&self, i: usize) -> usize {
        self.occupation(i).iter().map(|&n| n as usize).sum()
    }

    /// Index range of the shell with exactly `total` photons.
    pub fn shell(&self, total: usize) -> std::ops::Range<usize> {
        self.shell_offsets[total]..self.shell_offsets[total + 1]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[u16]> + '_ {
        self.occupations.chunks_exact(self.modes)
    }

    pub(crate) fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.modes {
            return Err(Error::ModeOutOfRange {
                mode,
                modes: self.modes,
            });
        }
        Ok(())
    }
}

/// Appends every composition of `remaining` into the free slots
/// `scratch[slot..]`, in ascending lexicographic order.
fn push_compositions(remaining: u16, slot: usize, scratch: &mut [u16], out: &mut Vec<u16>) {
    if slot + 1 == scratch.len() {
        scratch[slot] = remaining;
        out.extend_from_slice(scratch);
        return;
    }
    for n in 0..=remaining {
        scratch[slot] = n;
        push_compositions(remaining - n, slot + 1, scratch, out);
    }
    scratch[slot] = 0;
}

/// Enumerates the truncated occupation basis in graded lexicographic order.
pub fn enumerate_basis(modes: usize, cutoff: usize) -> Result<FockBasis> {
    FockBasis::new(modes, cutoff)
}
