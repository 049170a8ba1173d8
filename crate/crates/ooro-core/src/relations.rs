//! Boolean directed occlusion relations and the signed interchange matrix.
//!
//! [`OcclusionRelations`] is the canonical in-memory form: a dense boolean
//! adjacency where `adj[i][j]` means instance `i` occludes instance `j`.
//! [`SignedOrderMatrix`] is the `{-1, 0, 1, 2}` form used in prediction and
//! scene files; `2` marks a mutual pair (both directions annotated, as
//! InstaOrder allows), `1`/`-1` a one-directional pair.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors from relation construction and signed-matrix conversion.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum RelationError {
    #[error("index {index} out of range for {n} instances")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("instance {index} cannot occlude itself")]
    SelfOcclusion { index: usize },
    #[error("inconsistent signed matrix at ({row},{col}): {reason}")]
    InconsistentMatrix {
        row: usize,
        col: usize,
        reason: String,
    },
}

/// Directed pairwise occlusion over a scene's instances.
///
/// Mutual occlusion (both `i→j` and `j→i`) is representable and legal.
/// The diagonal is always false.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OcclusionRelations {
    n: usize,
    adj: Vec<bool>,
}

impl OcclusionRelations {
    /// All-false relation over `n` instances.
    pub fn new(n: usize) -> Self {
        Self {
            n,
            adj: vec![false; n * n],
        }
    }

    /// Builds a relation from occluder → occludee edges.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, RelationError> {
        let mut r = Self::new(n);
        for &(i, j) in edges {
            r.set_occludes(i, j)?;
        }
        Ok(r)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// True iff instance `i` occludes instance `j`.
    ///
    /// Panics on out-of-range indices; callers compare relations of equal size.
    pub fn occludes(&self, i: usize, j: usize) -> bool {
        assert!(i < self.n && j < self.n, "index out of range");
        self.adj[i * self.n + j]
    }

    /// Records that `i` occludes `j`. Idempotent; `j→i` is left untouched.
    pub fn set_occludes(&mut self, i: usize, j: usize) -> Result<(), RelationError> {
        if i == j {
            return Err(RelationError::SelfOcclusion { index: i });
        }
        for idx in [i, j] {
            if idx >= self.n {
                return Err(RelationError::IndexOutOfRange { index: idx, n: self.n });
            }
        }
        self.adj[i * self.n + j] = true;
        Ok(())
    }

    /// True iff no occlusion is asserted anywhere.
    pub fn is_all_zero(&self) -> bool {
        !self.adj.iter().any(|&b| b)
    }

    /// Occluder → occludee edges in row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n)
            .flat_map(move |i| (0..self.n).map(move |j| (i, j)))
            .filter(|&(i, j)| self.adj[i * self.n + j])
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().filter(|&&b| b).count()
    }

    /// Converts to the signed interchange form. Lossless.
    pub fn to_signed(&self) -> SignedOrderMatrix {
        let n = self.n;
        let mut m = vec![vec![0i8; n]; n];
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let fwd = self.adj[i * n + j];
                let bwd = self.adj[j * n + i];
                m[i][j] = match (fwd, bwd) {
                    (true, true) => 2,
                    (true, false) => 1,
                    (false, true) => -1,
                    (false, false) => 0,
                };
            }
        }
        SignedOrderMatrix { n, m }
    }

    /// Rebuilds the boolean relation from a signed matrix.
    ///
    /// Exact inverse of [`to_signed`](Self::to_signed) for every valid input.
    pub fn from_signed(m: &SignedOrderMatrix) -> Result<Self, RelationError> {
        m.validate()?;
        let mut r = Self::new(m.n);
        for i in 0..m.n {
            for j in 0..m.n {
                match m.m[i][j] {
                    1 | 2 => r.adj[i * m.n + j] = true,
                    _ => {}
                }
            }
        }
        Ok(r)
    }
}

/// Square matrix over a scene's instances with entries in `{-1, 0, 1, 2}`.
///
/// `m[i][j] = 1` means `i` occludes `j` (and `m[j][i] = -1`); `2` marks a
/// mutual pair on both entries; `0` means no relation. Serializes as
/// `{"n": int, "m": [[int]]}`, the interchange form used in prediction files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignedOrderMatrix {
    pub n: usize,
    pub m: Vec<Vec<i8>>,
}

impl SignedOrderMatrix {
    /// Checks shape, diagonal, the value range, and cross-entry pairing
    /// (`1` opposite `-1`, `2` opposite `2`).
    pub fn validate(&self) -> Result<(), RelationError> {
        let fail = |row, col, reason: String| RelationError::InconsistentMatrix { row, col, reason };
        if self.m.len() != self.n {
            return Err(fail(self.m.len(), 0, format!("expected {} rows, found {}", self.n, self.m.len())));
        }
        for (i, row) in self.m.iter().enumerate() {
            if row.len() != self.n {
                return Err(fail(i, row.len(), format!("expected {} columns, found {}", self.n, row.len())));
            }
        }
        for i in 0..self.n {
            if self.m[i][i] != 0 {
                return Err(fail(i, i, "nonzero diagonal".to_string()));
            }
            for j in 0..self.n {
                let v = self.m[i][j];
                let w = self.m[j][i];
                match v {
                    0 | -1 | 1 | 2 => {}
                    other => return Err(fail(i, j, format!("value {other} outside {{-1,0,1,2}}"))),
                }
                if v == 1 && w != -1 {
                    return Err(fail(i, j, format!("1 opposite {w}, expected -1")));
                }
                if v == 2 && w != 2 {
                    return Err(fail(i, j, format!("2 opposite {w}, expected 2")));
                }
            }
        }
        Ok(())
    }
}
