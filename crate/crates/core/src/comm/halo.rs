use crate::field::{decode_link, ClassFilter, DirSet, GaugeField, LINK_BYTES};
use crate::io::fnv1a64;
use crate::lattice::{lex_index, site_coord, HALO_DEPTH, NDIM};
use crate::su3::Su3Matrix;

use super::{CommError, Communicator, TAG_HALO};

/// Refreshes every halo link from its owner.
pub fn halo_exchange(field: &mut GaugeField, comm: &Communicator) -> Result<(), CommError> {
    halo_exchange_filtered(field, comm, DirSet::All, None)
}

/// Halo exchange restricted to some directions and, optionally, one update
/// class. Dimensions are processed in ascending order, each slab spanning the
/// full extended range of the other dimensions, so edge and corner halos are
/// filled by the later dimensions from already-fresh data.
pub fn halo_exchange_filtered(
    field: &mut GaugeField,
    comm: &Communicator,
    dirs: DirSet,
    class: Option<ClassFilter>,
) -> Result<(), CommError> {
    let geom = field.geometry().clone();
    let h = HALO_DEPTH as isize;
    let l: [isize; NDIM] = std::array::from_fn(|d| geom.local_dims[d] as isize);

    for d in 0..NDIM {
        let slab = |from: isize, to: isize| {
            let mut lo = [-h; NDIM];
            let mut hi: [isize; NDIM] = std::array::from_fn(|e| l[e] + h);
            lo[d] = from;
            hi[d] = to;
            (lo, hi)
        };
        // Low interior travels to the -d neighbour's upper halo and the high
        // interior to the +d neighbour's lower halo.
        let (low_lo, low_hi) = slab(0, h);
        let (high_lo, high_hi) = slab(l[d] - h, l[d]);
        let (uhalo_lo, uhalo_hi) = slab(l[d], l[d] + h);
        let (lhalo_lo, lhalo_hi) = slab(-h, 0);

        if !geom.is_decomposed(d) {
            field.copy_region(low_lo, low_hi, uhalo_lo, dirs, class);
            field.copy_region(high_lo, high_hi, lhalo_lo, dirs, class);
            continue;
        }

        let low = field.pack_region(low_lo, low_hi, dirs, class);
        let high = field.pack_region(high_lo, high_hi, dirs, class);

        let rank = comm.rank();
        let minus = geom.neighbor_rank(rank, d, -1);
        let plus = geom.neighbor_rank(rank, d, 1);
        let tag_down = TAG_HALO + 2 * d as u32;
        let tag_up = tag_down + 1;

        comm.send(minus, tag_down, &low)?;
        comm.send(plus, tag_up, &high)?;
        let from_plus = comm.recv(plus, tag_down)?;
        let from_minus = comm.recv(minus, tag_up)?;
        field.unpack_region(uhalo_lo, uhalo_hi, dirs, class, &from_plus)?;
        field.unpack_region(lhalo_lo, lhalo_hi, dirs, class, &from_minus)?;
    }
    Ok(())
}

/// Assembles the full lattice on rank 0 in global lexicographic order, four
/// directions per site. Other ranks get `None`.
pub fn gather_global_links(field: &GaugeField, comm: &Communicator) -> Result<Option<Vec<Su3Matrix>>, CommError> {
    let mut mine = Vec::with_capacity(field.geometry().local_volume() * NDIM * LINK_BYTES);
    for u in field.owned_links() {
        crate::field::encode_link(&u, &mut mine);
    }
    let Some(parts) = comm.gather(mine)? else {
        return Ok(None);
    };
    let geom = field.geometry();
    let mut global = vec![Su3Matrix::IDENTITY; geom.volume() * NDIM];
    for (rank, bytes) in parts.iter().enumerate() {
        let expected = geom.local_volume() * NDIM * LINK_BYTES;
        if bytes.len() != expected {
            return Err(CommError::Protocol(format!(
                "rank {rank} sent {} bytes of links, expected {expected}",
                bytes.len()
            )));
        }
        let origin = geom.local_origin(rank);
        let mut chunks = bytes.chunks_exact(LINK_BYTES);
        for i in 0..geom.local_volume() {
            let local = site_coord(i, &geom.local_dims).0;
            let g: [usize; NDIM] = std::array::from_fn(|d| origin[d] + local[d]);
            let gi = lex_index(&g, &geom.global_dims);
            for mu in 0..NDIM {
                global[gi * NDIM + mu] = decode_link(chunks.next().expect("length checked"));
            }
        }
    }
    Ok(Some(global))
}

/// FNV-1a over the global payload bytes, identical on every rank.
pub fn global_checksum(field: &GaugeField, comm: &Communicator) -> Result<u64, CommError> {
    let sum = gather_global_links(field, comm)?
        .map(|links| fnv1a64(&crate::io::encode_payload(&links)))
        .unwrap_or(0);
    let bytes = comm.broadcast(sum.to_le_bytes().to_vec())?;
    Ok(u64::from_le_bytes(
        bytes
            .try_into()
            .map_err(|_| CommError::Protocol("checksum broadcast".into()))?,
    ))
}
