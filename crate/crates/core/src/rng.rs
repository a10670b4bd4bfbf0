//! Counter-based keyed random streams.
//!
//! Every random draw in the simulator is addressed by a tuple
//! `(seed, global site, direction, sweep, draw)`. The tuple is packed into a
//! ChaCha8 key, so the numbers a link sees depend only on *which* link is
//! being updated and *when*, never on the rank layout or the thread that
//! happens to perform the update.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The random stream generator handed out by [`RngKey::stream`].
pub type KeyedRng = ChaCha8Rng;

/// Address of one independent random stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct RngKey {
    pub seed: u64,
    /// Global lexicographic site index.
    pub site: u64,
    pub direction: u32,
    pub sweep: u64,
    /// Sub-stream selector (heatbath hit, start-up stream, test draw, ...).
    pub draw: u32,
}

/// Draw sub-stream used for hot-start links; far away from heatbath hit indices.
pub const HOT_START_DRAW: u32 = u32::MAX;

impl RngKey {
    pub fn new(seed: u64) -> Self {
        RngKey {
            seed,
            ..Default::default()
        }
    }

    pub fn with_link(self, site: u64, direction: usize) -> Self {
        RngKey {
            site,
            direction: direction as u32,
            ..self
        }
    }

    pub fn with_sweep(self, sweep: u64) -> Self {
        RngKey { sweep, ..self }
    }

    pub fn with_draw(self, draw: u32) -> Self {
        RngKey { draw, ..self }
    }

    fn key_bytes(&self) -> [u8; 32] {
        let mut k = [0u8; 32];
        k[0..8].copy_from_slice(&self.seed.to_le_bytes());
        k[8..16].copy_from_slice(&self.site.to_le_bytes());
        k[16..24].copy_from_slice(&self.sweep.to_le_bytes());
        k[24..28].copy_from_slice(&self.direction.to_le_bytes());
        k[28..32].copy_from_slice(&self.draw.to_le_bytes());
        k
    }

    /// Fresh generator positioned at the start of this key's stream.
    pub fn stream(&self) -> KeyedRng {
        ChaCha8Rng::from_seed(self.key_bytes())
    }
}

/// Uniform draw on the half-open interval (0, 1]; safe to take the log of.
#[inline]
pub fn uniform_open0<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}
