//! Periodic 4D lattice geometry and its decomposition over a rank grid.
//!
//! Sites are ordered lexicographically with `x` fastest:
//! `index = x + Lx·(y + Ly·(z + Lz·t))`. Ranks use the same encoding over
//! the rank grid.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const NDIM: usize = 4;

/// Ghost-layer depth. 1×2 rectangle staples reach two sites in each direction.
pub const HALO_DEPTH: usize = 2;

pub type Dims = [usize; NDIM];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeometryError {
    #[error("bad decomposition: {0}")]
    BadDecomposition(String),
    #[error("rank grid {grid:?} has {product} ranks but the communicator has {size}")]
    SizeMismatch { grid: Dims, product: usize, size: usize },
    #[error("site {coord:?} out of bounds for dims {dims:?}")]
    OutOfBounds { coord: [usize; NDIM], dims: Dims },
}

/// A global lattice site.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SiteCoord(pub [usize; NDIM]);

impl SiteCoord {
    pub fn new(x: usize, y: usize, z: usize, t: usize) -> Self {
        SiteCoord([x, y, z, t])
    }

    pub fn in_bounds(&self, dims: &Dims) -> bool {
        self.0.iter().zip(dims).all(|(c, l)| c < l)
    }
}

pub fn volume(dims: &Dims) -> usize {
    dims.iter().product()
}

/// Lexicographic index, `x` fastest.
pub fn site_index(coord: &SiteCoord, dims: &Dims) -> Result<usize, GeometryError> {
    if !coord.in_bounds(dims) {
        return Err(GeometryError::OutOfBounds {
            coord: coord.0,
            dims: *dims,
        });
    }
    Ok(lex_index(&coord.0, dims))
}

#[inline]
pub(crate) fn lex_index(c: &[usize; NDIM], dims: &Dims) -> usize {
    c[0] + dims[0] * (c[1] + dims[1] * (c[2] + dims[2] * c[3]))
}

/// Inverse of [`site_index`].
pub fn site_coord(mut index: usize, dims: &Dims) -> SiteCoord {
    let mut c = [0; NDIM];
    for d in 0..NDIM {
        c[d] = index % dims[d];
        index /= dims[d];
    }
    SiteCoord(c)
}

/// Periodic neighbour one step along `mu`, `sign` = +1 or -1.
pub fn neighbor(coord: &SiteCoord, mu: usize, sign: i32, dims: &Dims) -> SiteCoord {
    let mut c = coord.0;
    let l = dims[mu];
    c[mu] = if sign >= 0 {
        (c[mu] + 1) % l
    } else {
        (c[mu] + l - 1) % l
    };
    SiteCoord(c)
}

/// Update-schedule class: the tuple of coordinates mod `m`, encoded in `[0, m⁴)`.
#[inline]
pub fn parity_class(coord: &SiteCoord, m: usize) -> usize {
    let c = &coord.0;
    (c[0] % m) + m * ((c[1] % m) + m * ((c[2] % m) + m * (c[3] % m)))
}

/// Global dimensions, rank grid and the per-rank slab extents.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Geometry {
    pub global_dims: Dims,
    pub rank_grid: Dims,
    pub local_dims: Dims,
    pub halo_depth: usize,
}

impl Geometry {
    pub fn build(global_dims: Dims, rank_grid: Dims, comm_size: usize) -> Result<Self, GeometryError> {
        for d in 0..NDIM {
            if global_dims[d] == 0 || rank_grid[d] == 0 {
                return Err(GeometryError::BadDecomposition(format!(
                    "dimension {d}: extents and rank counts must be positive"
                )));
            }
            if !global_dims[d].is_multiple_of(rank_grid[d]) {
                return Err(GeometryError::BadDecomposition(format!(
                    "dimension {d}: {} ranks do not divide extent {}",
                    rank_grid[d], global_dims[d]
                )));
            }
        }
        let product: usize = rank_grid.iter().product();
        if product != comm_size {
            return Err(GeometryError::SizeMismatch {
                grid: rank_grid,
                product,
                size: comm_size,
            });
        }
        let mut local_dims = [0; NDIM];
        for d in 0..NDIM {
            local_dims[d] = global_dims[d] / rank_grid[d];
            if rank_grid[d] > 1 && local_dims[d] < HALO_DEPTH {
                return Err(GeometryError::BadDecomposition(format!(
                    "dimension {d}: local extent {} is smaller than the halo depth {HALO_DEPTH}",
                    local_dims[d]
                )));
            }
        }
        Ok(Geometry {
            global_dims,
            rank_grid,
            local_dims,
            halo_depth: HALO_DEPTH,
        })
    }

    pub fn serial(global_dims: Dims) -> Result<Self, GeometryError> {
        Self::build(global_dims, [1; NDIM], 1)
    }

    pub fn num_ranks(&self) -> usize {
        self.rank_grid.iter().product()
    }

    pub fn volume(&self) -> usize {
        volume(&self.global_dims)
    }

    pub fn local_volume(&self) -> usize {
        volume(&self.local_dims)
    }

    pub fn is_decomposed(&self, dim: usize) -> bool {
        self.rank_grid[dim] > 1
    }

    pub fn rank_coords(&self, rank: usize) -> [usize; NDIM] {
        site_coord(rank, &self.rank_grid).0
    }

    pub fn rank_of_coords(&self, coords: &[usize; NDIM]) -> usize {
        lex_index(coords, &self.rank_grid)
    }

    /// Rank one step along `dim` in the periodic rank grid.
    pub fn neighbor_rank(&self, rank: usize, dim: usize, sign: i32) -> usize {
        let c = SiteCoord(self.rank_coords(rank));
        self.rank_of_coords(&neighbor(&c, dim, sign, &self.rank_grid).0)
    }

    /// Global coordinate of the rank's local origin.
    pub fn local_origin(&self, rank: usize) -> [usize; NDIM] {
        let rc = self.rank_coords(rank);
        std::array::from_fn(|d| rc[d] * self.local_dims[d])
    }

    pub fn owner_rank(&self, coord: &SiteCoord) -> Result<usize, GeometryError> {
        if !coord.in_bounds(&self.global_dims) {
            return Err(GeometryError::OutOfBounds {
                coord: coord.0,
                dims: self.global_dims,
            });
        }
        let rc: [usize; NDIM] = std::array::from_fn(|d| coord.0[d] / self.local_dims[d]);
        Ok(self.rank_of_coords(&rc))
    }
}
