use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::tensor::{RngSpec, VideoFeature, VideoShape};

/// Native clip length of the short-video attention the noise is tiled from.
pub const BLOCK_FRAMES: usize = 16;

const PERMUTATION_STREAM: u64 = 4;

/// Frame orders for `blocks` tiles; block 0 is always the identity.
pub fn block_permutations(blocks: usize, rng: &RngSpec) -> Vec<Vec<usize>> {
    let mut gen = rng.stream(PERMUTATION_STREAM);
    (0..blocks)
        .map(|b| {
            let mut perm: Vec<usize> = (0..BLOCK_FRAMES).collect();
            if b > 0 {
                perm.shuffle(&mut gen);
            }
            perm
        })
        .collect()
}

/// Tiles a 16-frame noise clip out to `total_frames`, reordering the frames
/// of every block after the first with a seeded permutation. Every output
/// frame is a bitwise copy of some base frame.
pub fn reschedule_noise(base: &VideoFeature, total_frames: usize, rng: &RngSpec) -> Result<VideoFeature> {
    let s = base.shape();
    if s.frames != BLOCK_FRAMES {
        return Err(Error::Parameter(format!("base noise must have {BLOCK_FRAMES} frames, got {}", s.frames)));
    }
    if total_frames == 0 || !total_frames.is_multiple_of(BLOCK_FRAMES) {
        return Err(Error::Parameter(format!(
            "total frames {total_frames} is not a positive multiple of {BLOCK_FRAMES}"
        )));
    }
    let blocks = total_frames / BLOCK_FRAMES;
    let perms = block_permutations(blocks, rng);
    let out_shape = VideoShape { frames: total_frames, ..s };
    let frame = s.spatial();
    let mut data = Vec::with_capacity(out_shape.len());
    for c in 0..s.channels {
        for perm in &perms {
            for &src in perm {
                let start = s.index(c, src, 0, 0);
                data.extend_from_slice(&base.data()[start..start + frame]);
            }
        }
    }
    VideoFeature::new(out_shape, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::sample_gaussian;

    fn base() -> VideoFeature {
        VideoFeature::from_tensor(sample_gaussian(&[2, 16, 3, 3], &RngSpec::new(1)).unwrap()).unwrap()
    }

    #[test]
    fn single_block_is_identity() {
        let b = base();
        let out = reschedule_noise(&b, 16, &RngSpec::new(9)).unwrap();
        assert!(out.to_tensor().bit_eq(&b.to_tensor()));
    }

    #[test]
    fn rejects_partial_blocks() {
        assert!(reschedule_noise(&base(), 24, &RngSpec::new(9)).is_err());
        assert!(reschedule_noise(&base(), 0, &RngSpec::new(9)).is_err());
        let short = base().frames(0, 8).unwrap();
        assert!(reschedule_noise(&short, 16, &RngSpec::new(9)).is_err());
    }

    #[test]
    fn later_blocks_are_shuffled() {
        let perms = block_permutations(8, &RngSpec::new(3));
        assert_eq!(perms[0], (0..16).collect::<Vec<_>>());
        assert!(perms[1..].iter().any(|p| *p != perms[0]));
        for p in &perms {
            let mut sorted = p.clone();
            sorted.sort_unstable();
            assert_eq!(sorted, (0..16).collect::<Vec<_>>());
        }
    }
}
