//! Rank-local gauge field storage with depth-2 halos in every dimension.
//!
//! Local coordinates run over `[-HALO_DEPTH, L_d + HALO_DEPTH)`; the owned
//! interior is `[0, L_d)`. Links are stored site-major, four directions per
//! site, sites lexicographic over the extended box with `x` fastest.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{lex_index, parity_class, Dims, Geometry, SiteCoord, HALO_DEPTH, NDIM};
use crate::rng::{RngKey, HOT_START_DRAW};
use crate::su3::{random_su3, Complex3x3, Su3Matrix};

pub const LINK_BYTES: usize = 18 * 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error("halo miss: local site {0:?} is outside the stored region")]
    HaloMiss([isize; NDIM]),
    #[error("payload length {got} does not match the expected {expected} bytes")]
    PayloadLength { got: usize, expected: usize },
    #[error("global link array has {got} links, expected {expected}")]
    GlobalLength { got: usize, expected: usize },
}

/// Run metadata carried with a field and written into saved configurations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldMeta {
    pub beta: f64,
    pub c0: f64,
    pub c1: f64,
    pub sweeps: u64,
    pub seed: u64,
}

impl Default for FieldMeta {
    fn default() -> Self {
        FieldMeta {
            beta: 0.0,
            c0: 1.0,
            c1: 0.0,
            sweeps: 0,
            seed: 0,
        }
    }
}

/// Restricts packing to sites of one update class.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ClassFilter {
    pub modulus: usize,
    pub class: usize,
}

/// Which link directions a pack/unpack touches.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DirSet {
    All,
    One(usize),
}

impl DirSet {
    fn range(self) -> std::ops::Range<usize> {
        match self {
            DirSet::All => 0..NDIM,
            DirSet::One(mu) => mu..mu + 1,
        }
    }
}

/// An owned site: its storage index and global position.
#[derive(Clone, Copy, Debug)]
pub struct OwnedSite {
    pub ext: usize,
    pub global: SiteCoord,
    pub global_index: usize,
}

#[derive(Clone, Debug)]
pub struct GaugeField {
    geometry: Geometry,
    rank: usize,
    origin: [usize; NDIM],
    ext: Dims,
    strides: [usize; NDIM],
    links: Vec<Su3Matrix>,
    pub meta: FieldMeta,
}

impl GaugeField {
    fn empty(geometry: Geometry, rank: usize, meta: FieldMeta) -> Self {
        let ext: Dims = std::array::from_fn(|d| geometry.local_dims[d] + 2 * HALO_DEPTH);
        let strides = [1, ext[0], ext[0] * ext[1], ext[0] * ext[1] * ext[2]];
        let n = ext.iter().product::<usize>() * NDIM;
        GaugeField {
            origin: geometry.local_origin(rank),
            geometry,
            rank,
            ext,
            strides,
            links: vec![Su3Matrix::IDENTITY; n],
            meta,
        }
    }

    /// Identity on every link, halos included.
    pub fn cold(geometry: Geometry, rank: usize, meta: FieldMeta) -> Self {
        Self::empty(geometry, rank, meta)
    }

    /// Independent random SU(3) on every link, keyed by global link position
    /// and `meta.seed`. Halos are filled consistently, no exchange needed.
    pub fn hot(geometry: Geometry, rank: usize, meta: FieldMeta) -> Self {
        let mut f = Self::empty(geometry, rank, meta);
        let key = RngKey::new(f.meta.seed).with_draw(HOT_START_DRAW);
        for ext_idx in 0..f.ext_volume() {
            let g = f.global_coord(f.ext_coord(ext_idx));
            let gi = lex_index(&g.0, &f.geometry.global_dims) as u64;
            for mu in 0..NDIM {
                f.links[ext_idx * NDIM + mu] = random_su3(&key.with_link(gi, mu));
            }
        }
        f
    }

    /// Rank-local view of a global link array (global lexicographic order,
    /// four directions per site), halos filled from the periodic lattice.
    pub fn from_global(
        geometry: Geometry,
        rank: usize,
        meta: FieldMeta,
        global: &[Su3Matrix],
    ) -> Result<Self, FieldError> {
        let expected = geometry.volume() * NDIM;
        if global.len() != expected {
            return Err(FieldError::GlobalLength {
                got: global.len(),
                expected,
            });
        }
        let mut f = Self::empty(geometry, rank, meta);
        for ext_idx in 0..f.ext_volume() {
            let g = f.global_coord(f.ext_coord(ext_idx));
            let gi = lex_index(&g.0, &f.geometry.global_dims);
            f.links[ext_idx * NDIM..(ext_idx + 1) * NDIM].copy_from_slice(&global[gi * NDIM..(gi + 1) * NDIM]);
        }
        Ok(f)
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn origin(&self) -> [usize; NDIM] {
        self.origin
    }

    pub fn local_dims(&self) -> Dims {
        self.geometry.local_dims
    }

    pub fn ext_dims(&self) -> Dims {
        self.ext
    }

    pub fn ext_volume(&self) -> usize {
        self.ext.iter().product()
    }

    /// Storage index of a local coordinate, `None` outside the halo.
    #[inline]
    pub fn index(&self, local: [isize; NDIM]) -> Option<usize> {
        let h = HALO_DEPTH as isize;
        let mut idx = 0;
        for d in 0..NDIM {
            let c = local[d] + h;
            if c < 0 || c >= self.ext[d] as isize {
                return None;
            }
            idx += c as usize * self.strides[d];
        }
        Some(idx)
    }

    pub fn index_or_miss(&self, local: [isize; NDIM]) -> Result<usize, FieldError> {
        self.index(local).ok_or(FieldError::HaloMiss(local))
    }

    /// Storage index of an owned site.
    #[inline]
    pub fn owned_index(&self, local: [usize; NDIM]) -> usize {
        (0..NDIM).map(|d| (local[d] + HALO_DEPTH) * self.strides[d]).sum()
    }

    /// Local coordinate of a storage index.
    pub fn ext_coord(&self, mut idx: usize) -> [isize; NDIM] {
        let mut c = [0isize; NDIM];
        for d in 0..NDIM {
            c[d] = (idx % self.ext[d]) as isize - HALO_DEPTH as isize;
            idx /= self.ext[d];
        }
        c
    }

    /// Storage index `steps` sites along `mu`; caller keeps within the halo.
    #[inline]
    pub fn shift(&self, idx: usize, mu: usize, steps: isize) -> usize {
        (idx as isize + steps * self.strides[mu] as isize) as usize
    }

    #[inline]
    pub fn link(&self, site: usize, mu: usize) -> &Su3Matrix {
        &self.links[site * NDIM + mu]
    }

    #[inline]
    pub fn set_link(&mut self, site: usize, mu: usize, u: Su3Matrix) {
        self.links[site * NDIM + mu] = u;
    }

    /// Global site a local coordinate (interior or halo) refers to.
    pub fn global_coord(&self, local: [isize; NDIM]) -> SiteCoord {
        let g = &self.geometry.global_dims;
        SiteCoord(std::array::from_fn(|d| {
            (self.origin[d] as isize + local[d]).rem_euclid(g[d] as isize) as usize
        }))
    }

    /// Local coordinate of a global site if this rank owns it.
    pub fn local_of_global(&self, global: &SiteCoord) -> Option<[usize; NDIM]> {
        let l = &self.geometry.local_dims;
        let mut c = [0; NDIM];
        for d in 0..NDIM {
            let x = global.0[d].checked_sub(self.origin[d])?;
            if x >= l[d] {
                return None;
            }
            c[d] = x;
        }
        Some(c)
    }

    /// Owned sites in local lexicographic order, which is also their global
    /// lexicographic order.
    pub fn owned_sites(&self) -> impl Iterator<Item = OwnedSite> + '_ {
        let l = self.geometry.local_dims;
        let g = self.geometry.global_dims;
        (0..self.geometry.local_volume()).map(move |i| {
            let local = crate::lattice::site_coord(i, &l).0;
            let global = SiteCoord(std::array::from_fn(|d| self.origin[d] + local[d]));
            OwnedSite {
                ext: self.owned_index(local),
                global,
                global_index: lex_index(&global.0, &g),
            }
        })
    }

    /// Owned sites of one update class, in lexicographic order.
    pub fn owned_sites_in_class(&self, filter: ClassFilter) -> Vec<OwnedSite> {
        self.owned_sites()
            .filter(|s| parity_class(&s.global, filter.modulus) == filter.class)
            .collect()
    }

    /// Owned links, site-major in lexicographic order.
    pub fn owned_links(&self) -> Vec<Su3Matrix> {
        let mut out = Vec::with_capacity(self.geometry.local_volume() * NDIM);
        for s in self.owned_sites() {
            out.extend_from_slice(&self.links[s.ext * NDIM..(s.ext + 1) * NDIM]);
        }
        out
    }

    /// Every stored link, halos included.
    pub fn raw_links(&self) -> &[Su3Matrix] {
        &self.links
    }

    pub fn max_unitarity_deviation(&self) -> f64 {
        self.owned_sites()
            .flat_map(|s| (0..NDIM).map(move |mu| (s.ext, mu)))
            .map(|(e, mu)| self.link(e, mu).su3_deviation())
            .fold(0.0, f64::max)
    }

    pub fn reunitarize_owned(&mut self) {
        let sites: Vec<usize> = self.owned_sites().map(|s| s.ext).collect();
        for e in sites {
            for mu in 0..NDIM {
                let u = self.link(e, mu).reunitarized();
                self.set_link(e, mu, u);
            }
        }
    }

    fn region_sites(&self, lo: [isize; NDIM], hi: [isize; NDIM], class: Option<ClassFilter>) -> Vec<usize> {
        let g = &self.geometry.global_dims;
        let mut start = lo;
        let mut step = [1isize; NDIM];
        let mut filter = class;
        if let Some(f) = class {
            let m = f.modulus;
            if g.iter().all(|&n| n % m == 0) {
                // Class digits are local coordinates shifted by the origin,
                // mod m: step straight through the matching sites.
                let mut digits = f.class;
                for d in 0..NDIM {
                    let want = (digits % m) as isize;
                    digits /= m;
                    let off = (want - (self.origin[d] as isize + lo[d])).rem_euclid(m as isize);
                    start[d] = lo[d] + off;
                    step[d] = m as isize;
                }
                filter = None;
            }
        }
        let mut out = Vec::new();
        let range = |d: usize| (start[d]..hi[d]).step_by(step[d] as usize);
        for t in range(3) {
            for z in range(2) {
                for y in range(1) {
                    for x in range(0) {
                        let c = [x, y, z, t];
                        if let Some(f) = filter {
                            if parity_class(&self.global_coord(c), f.modulus) != f.class {
                                continue;
                            }
                        }
                        out.push(self.index(c).expect("region inside the extended box"));
                    }
                }
            }
        }
        out
    }

    /// Serializes links of the box `[lo, hi)`: sites lexicographic, then
    /// direction, then 18 little-endian doubles per link.
    pub fn pack_region(
        &self,
        lo: [isize; NDIM],
        hi: [isize; NDIM],
        dirs: DirSet,
        class: Option<ClassFilter>,
    ) -> Vec<u8> {
        let sites = self.region_sites(lo, hi, class);
        let mut out = Vec::with_capacity(sites.len() * dirs.range().len() * LINK_BYTES);
        for e in sites {
            for mu in dirs.range() {
                for v in self.link(e, mu).to_array() {
                    out.extend_from_slice(&v.to_le_bytes());
                }
            }
        }
        out
    }

    /// Copies links of the box `[src_lo, src_hi)` into the same-shaped box at
    /// `dst_lo`; equivalent to packing one and unpacking into the other.
    pub fn copy_region(
        &mut self,
        src_lo: [isize; NDIM],
        src_hi: [isize; NDIM],
        dst_lo: [isize; NDIM],
        dirs: DirSet,
        class: Option<ClassFilter>,
    ) {
        let dst_hi: [isize; NDIM] = std::array::from_fn(|d| dst_lo[d] + src_hi[d] - src_lo[d]);
        let from = self.region_sites(src_lo, src_hi, class);
        let to = self.region_sites(dst_lo, dst_hi, class);
        assert_eq!(
            from.len(),
            to.len(),
            "source and destination boxes hold different classes"
        );
        for (a, b) in from.into_iter().zip(to) {
            for mu in dirs.range() {
                self.links[b * NDIM + mu] = self.links[a * NDIM + mu];
            }
        }
    }

    /// Inverse of [`GaugeField::pack_region`].
    pub fn unpack_region(
        &mut self,
        lo: [isize; NDIM],
        hi: [isize; NDIM],
        dirs: DirSet,
        class: Option<ClassFilter>,
        bytes: &[u8],
    ) -> Result<(), FieldError> {
        let sites = self.region_sites(lo, hi, class);
        let expected = sites.len() * dirs.range().len() * LINK_BYTES;
        if bytes.len() != expected {
            return Err(FieldError::PayloadLength {
                got: bytes.len(),
                expected,
            });
        }
        let mut chunks = bytes.chunks_exact(LINK_BYTES);
        for e in sites {
            for mu in dirs.range() {
                let chunk = chunks.next().expect("length checked");
                self.set_link(e, mu, decode_link(chunk));
            }
        }
        Ok(())
    }
}

pub(crate) fn decode_link(chunk: &[u8]) -> Su3Matrix {
    let mut a = [0.0; 18];
    for (k, b) in chunk.chunks_exact(8).enumerate() {
        a[k] = f64::from_le_bytes(b.try_into().expect("8-byte chunk"));
    }
    Su3Matrix::new_unchecked(Complex3x3::from_array(&a))
}

pub(crate) fn encode_link(u: &Su3Matrix, out: &mut Vec<u8>) {
    for v in u.to_array() {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meta(seed: u64) -> FieldMeta {
        FieldMeta {
            seed,
            ..Default::default()
        }
    }

    #[test]
    fn hot_start_is_rank_layout_independent() {
        let serial = GaugeField::hot(Geometry::serial([4; 4]).unwrap(), 0, meta(5));
        let g2 = Geometry::build([4; 4], [1, 1, 2, 2], 4).unwrap();
        for rank in 0..4 {
            let f = GaugeField::hot(g2.clone(), rank, meta(5));
            for s in f.owned_sites() {
                let l = serial.local_of_global(&s.global).unwrap();
                for mu in 0..4 {
                    assert_eq!(f.link(s.ext, mu), serial.link(serial.owned_index(l), mu));
                }
            }
        }
    }

    #[test]
    fn halo_of_hot_field_matches_periodic_image() {
        let f = GaugeField::hot(Geometry::serial([4; 4]).unwrap(), 0, meta(1));
        let halo = f.index([0, 0, 0, -1]).unwrap();
        let interior = f.index([0, 0, 0, 3]).unwrap();
        assert_eq!(f.link(halo, 2), f.link(interior, 2));
        assert!(f.index([0, 0, 0, -3]).is_none());
        assert!(f.index([0, 0, 0, 6]).is_none());
        assert!(f.index([0, 0, 0, 5]).is_some());
    }

    #[test]
    fn ext_coord_round_trips() {
        let f = GaugeField::cold(Geometry::serial([4, 2, 4, 2]).unwrap(), 0, meta(0));
        for i in 0..f.ext_volume() {
            assert_eq!(f.index(f.ext_coord(i)), Some(i));
        }
    }

    #[test]
    fn pack_unpack_region_round_trip() {
        let g = Geometry::serial([4; 4]).unwrap();
        let src = GaugeField::hot(g.clone(), 0, meta(2));
        let mut dst = GaugeField::cold(g, 0, meta(2));
        let (lo, hi) = ([-2, -2, 0, 1], [6, 6, 2, 3]);
        let filt = Some(ClassFilter { modulus: 2, class: 1 });
        let bytes = src.pack_region(lo, hi, DirSet::One(1), filt);
        dst.unpack_region(lo, hi, DirSet::One(1), filt, &bytes).unwrap();
        assert_eq!(dst.pack_region(lo, hi, DirSet::One(1), filt), bytes);
        assert!(matches!(
            dst.unpack_region(lo, hi, DirSet::All, filt, &bytes),
            Err(FieldError::PayloadLength { .. })
        ));
    }

    #[test]
    fn from_global_matches_owned_links() {
        let g = Geometry::serial([4; 4]).unwrap();
        let hot = GaugeField::hot(g.clone(), 0, meta(3));
        let global = hot.owned_links();
        let g2 = Geometry::build([4; 4], [2, 1, 1, 1], 2).unwrap();
        let f = GaugeField::from_global(g2, 1, meta(3), &global).unwrap();
        let serial = GaugeField::from_global(g, 0, meta(3), &global).unwrap();
        for s in f.owned_sites() {
            let l = serial.local_of_global(&s.global).unwrap();
            assert_eq!(f.link(s.ext, 0), serial.link(serial.owned_index(l), 0));
        }
        assert_eq!(serial.raw_links(), hot.raw_links());
    }

    #[test]
    fn class_filtered_region_matches_brute_force() {
        let g = Geometry::build([8, 4, 4, 8], [2, 1, 1, 2], 4).unwrap();
        let f = GaugeField::hot(g, 3, meta(4));
        let (lo, hi) = ([-2, -2, -1, 2], [6, 3, 6, 6]);
        for m in [2, 4] {
            for class in [0, 5, m * m * m * m - 1] {
                let filt = ClassFilter { modulus: m, class };
                let mut expected = Vec::new();
                for t in lo[3]..hi[3] {
                    for z in lo[2]..hi[2] {
                        for y in lo[1]..hi[1] {
                            for x in lo[0]..hi[0] {
                                let c = [x, y, z, t];
                                if parity_class(&f.global_coord(c), m) == class {
                                    expected.push(f.index(c).unwrap());
                                }
                            }
                        }
                    }
                }
                assert_eq!(f.region_sites(lo, hi, Some(filt)), expected, "m={m} class={class}");
            }
        }
    }
}
