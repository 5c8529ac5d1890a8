//! Column layout shared by state snapshots, mean-field vectors and CSV rows.
//!
//! All flattened representations of the system use one ordering:
//! populations `N_0..N_{n-1}`, base-station ages `A_0..A_{n-1}`, then the
//! off-diagonal patch ages row-major by source patch
//! (`A_0_1, A_0_2, ..., A_1_0, A_1_2, ...`). `A_i_j` is the age, held at
//! patch `j`, of the freshest data originating from patch `i`.

/// Index arithmetic for the flattened state vector of an `n`-patch system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StateLayout {
    n: usize,
}

impl StateLayout {
    pub fn new(n_patches: usize) -> Self {
        assert!(n_patches >= 1, "layout needs at least one patch");
        Self { n: n_patches }
    }

    pub fn n_patches(&self) -> usize {
        self.n
    }

    /// Total number of state components: `n` populations, `n` base ages and
    /// `n(n-1)` off-diagonal patch ages.
    pub fn width(&self) -> usize {
        self.n * (self.n + 1)
    }

    pub fn population(&self, patch: usize) -> usize {
        debug_assert!(patch < self.n);
        patch
    }

    pub fn base_age(&self, patch: usize) -> usize {
        debug_assert!(patch < self.n);
        self.n + patch
    }

    pub fn patch_age(&self, source: usize, holder: usize) -> usize {
        2 * self.n + off_diagonal_index(self.n, source, holder)
    }

    /// Off-diagonal (source, holder) pairs in storage order.
    pub fn patch_age_pairs(&self) -> impl Iterator<Item = (usize, usize)> {
        let n = self.n;
        (0..n).flat_map(move |i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
    }

    /// CSV header for one trajectory row, including the leading time column.
    pub fn csv_header(&self) -> String {
        let mut cols = Vec::with_capacity(1 + self.width());
        cols.push("t".to_string());
        for i in 0..self.n {
            cols.push(format!("N_{i}"));
        }
        for i in 0..self.n {
            cols.push(format!("A_{i}"));
        }
        for (i, j) in self.patch_age_pairs() {
            cols.push(format!("A_{i}_{j}"));
        }
        cols.join(",")
    }
}

/// Position of the (source, holder) entry in the row-major off-diagonal
/// storage of an n x n age matrix whose diagonal is not stored.
pub(crate) fn off_diagonal_index(n: usize, source: usize, holder: usize) -> usize {
    debug_assert!(source != holder && source < n && holder < n);
    source * (n - 1) + holder - usize::from(holder > source)
}
