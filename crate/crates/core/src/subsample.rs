//! Spatial subsampling: decompose one noisy image into four half-resolution
//! sub-images that serve as the noisy input plus three noisy references.
//!
//! Each 2×2 block of a 2N×2N image contributes exactly one pixel to each
//! sub-image, so the four outputs partition the input. In deterministic
//! mode every block uses the same within-block positions; in randomized
//! mode each block draws an independent uniform permutation of the four
//! positions, recorded in the assignment table.

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::grid::{ImageGrid, ReferenceSet};
use crate::seeds;

/// How within-block positions are assigned to the four sub-images.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubsampleMode {
    /// Fixed assignment: position 1 → Y, 2 → A, 3 → B, 4 → C.
    Deterministic,
    /// One independent uniform permutation of the four positions per block.
    Randomized,
}

/// Role of a sub-image in the decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubImage {
    Y,
    A,
    B,
    C,
}

impl SubImage {
    pub const ALL: [SubImage; 4] = [SubImage::Y, SubImage::A, SubImage::B, SubImage::C];

    fn index(self) -> usize {
        match self {
            SubImage::Y => 0,
            SubImage::A => 1,
            SubImage::B => 2,
            SubImage::C => 3,
        }
    }
}

/// Within-block positions, numbered 1..=4, as (row offset, col offset)
/// inside the 2×2 block. Position 1 is the odd-row/odd-col entry in
/// 1-based image coordinates, i.e. the top-left pixel of the block.
const POSITION_OFFSETS: [(usize, usize); 4] = [(0, 0), (1, 0), (0, 1), (1, 1)];

/// Four half-resolution sub-images plus the per-block assignment record.
///
/// `assignment[block]` lists, for (Y, A, B, C) in order, which of the four
/// within-block positions (1..=4) that sub-image took its pixel from; the
/// entries of each record are a permutation of {1, 2, 3, 4}. Blocks are
/// indexed row-major over the N×N block grid.
#[derive(Debug, Clone)]
pub struct SubsampleOutput {
    pub sub_y: ImageGrid,
    pub sub_a: ImageGrid,
    pub sub_b: ImageGrid,
    pub sub_c: ImageGrid,
    pub assignment: Vec<[u8; 4]>,
}

impl SubsampleOutput {
    pub fn sub_image(&self, role: SubImage) -> &ImageGrid {
        match role {
            SubImage::Y => &self.sub_y,
            SubImage::A => &self.sub_a,
            SubImage::B => &self.sub_b,
            SubImage::C => &self.sub_c,
        }
    }

    /// Pack the decomposition as input Y plus references A, B, C.
    pub fn to_reference_set(&self) -> ReferenceSet {
        ReferenceSet::new(
            self.sub_y.clone(),
            self.sub_a.clone(),
            self.sub_b.clone(),
            self.sub_c.clone(),
        )
        .expect("sub-images share dimensions by construction")
    }

    /// Subsample another image of the same size at the block positions
    /// recorded for `role`, so companions (a denoised or clean image) can
    /// be paired with a sub-image by identical pixel sites.
    pub fn extract_matching(&self, image: &ImageGrid, role: SubImage) -> Result<ImageGrid> {
        let blocks_w = self.sub_y.width();
        let blocks_h = self.sub_y.height();
        if image.width() != 2 * blocks_w || image.height() != 2 * blocks_h {
            return Err(Error::DimensionMismatch {
                expected_width: 2 * blocks_w,
                expected_height: 2 * blocks_h,
                got_width: image.width(),
                got_height: image.height(),
            });
        }
        let role_idx = role.index();
        ImageGrid::from_fn(blocks_w, blocks_h, |br, bc| {
            let pos = self.assignment[br * blocks_w + bc][role_idx];
            let (dr, dc) = POSITION_OFFSETS[(pos - 1) as usize];
            image.get(2 * br + dr, 2 * bc + dc)
        })
    }
}

/// Decompose an even-sized image into four sub-images, one pixel per 2×2
/// block each. Deterministic output given (image, mode, seed); the seed is
/// ignored in deterministic mode.
pub fn spatial_subsample(
    image: &ImageGrid,
    mode: SubsampleMode,
    seed: u64,
) -> Result<SubsampleOutput> {
    if image.width() % 2 != 0 || image.height() % 2 != 0 {
        return Err(Error::OddDimensions {
            width: image.width(),
            height: image.height(),
        });
    }
    let blocks_w = image.width() / 2;
    let blocks_h = image.height() / 2;
    let n_blocks = blocks_w * blocks_h;

    let assignment: Vec<[u8; 4]> = match mode {
        SubsampleMode::Deterministic => vec![[1, 2, 3, 4]; n_blocks],
        SubsampleMode::Randomized => {
            let mut rng = seeds::stream(seed, 0);
            (0..n_blocks)
                .map(|_| {
                    let mut perm = [1u8, 2, 3, 4];
                    perm.shuffle(&mut rng);
                    perm
                })
                .collect()
        }
    };

    let mut subs = vec![vec![0.0; n_blocks]; 4];
    for br in 0..blocks_h {
        for bc in 0..blocks_w {
            let block = br * blocks_w + bc;
            for (role_idx, &pos) in assignment[block].iter().enumerate() {
                let (dr, dc) = POSITION_OFFSETS[(pos - 1) as usize];
                subs[role_idx][block] = image.get(2 * br + dr, 2 * bc + dc);
            }
        }
    }

    let mut grids = subs
        .into_iter()
        .map(|data| ImageGrid::new(blocks_w, blocks_h, data));
    Ok(SubsampleOutput {
        sub_y: grids.next().unwrap()?,
        sub_a: grids.next().unwrap()?,
        sub_b: grids.next().unwrap()?,
        sub_c: grids.next().unwrap()?,
        assignment,
    })
}

/// Drop the last column and/or row when odd-sized; identity otherwise.
/// Padding is never used: invented pixel values would contaminate the
/// references.
pub fn crop_to_even(image: &ImageGrid) -> Result<ImageGrid> {
    if image.width() < 2 || image.height() < 2 {
        return Err(Error::TooSmall {
            min_width: 2,
            min_height: 2,
            width: image.width(),
            height: image.height(),
        });
    }
    let w = image.width() & !1;
    let h = image.height() & !1;
    if w == image.width() && h == image.height() {
        return Ok(image.clone());
    }
    ImageGrid::from_fn(w, h, |r, c| image.get(r, c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngExt;

    fn sorted(values: &[f64]) -> Vec<f64> {
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        v
    }

    #[test]
    fn two_by_two_deterministic() {
        let img = ImageGrid::new(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let out = spatial_subsample(&img, SubsampleMode::Deterministic, 0).unwrap();
        assert_eq!(out.sub_y.data(), &[1.0]);
        assert_eq!(out.sub_a.data(), &[3.0]);
        assert_eq!(out.sub_b.data(), &[2.0]);
        assert_eq!(out.sub_c.data(), &[4.0]);
        assert_eq!(out.assignment, vec![[1, 2, 3, 4]]);
    }

    #[test]
    fn constant_image_yields_constant_sub_images() {
        let img = ImageGrid::constant(6, 4, 7.0).unwrap();
        for mode in [SubsampleMode::Deterministic, SubsampleMode::Randomized] {
            let out = spatial_subsample(&img, mode, 99).unwrap();
            for role in SubImage::ALL {
                assert!(out.sub_image(role).data().iter().all(|&v| v == 7.0));
            }
        }
    }

    #[test]
    fn partition_property_randomized() {
        let img = ImageGrid::from_fn(4, 4, |r, c| (r * 4 + c) as f64).unwrap();
        let out = spatial_subsample(&img, SubsampleMode::Randomized, 1234).unwrap();
        let mut pooled = Vec::new();
        for role in SubImage::ALL {
            pooled.extend_from_slice(out.sub_image(role).data());
        }
        assert_eq!(sorted(&pooled), sorted(img.data()));
        for record in &out.assignment {
            let mut positions = *record;
            positions.sort_unstable();
            assert_eq!(positions, [1, 2, 3, 4]);
        }
    }

    #[test]
    fn randomized_is_reproducible_and_seed_sensitive() {
        let mut rng = crate::seeds::stream(5, 0);
        let img = ImageGrid::from_fn(8, 8, |_, _| rng.random_range(0.0..1.0)).unwrap();
        let a = spatial_subsample(&img, SubsampleMode::Randomized, 42).unwrap();
        let b = spatial_subsample(&img, SubsampleMode::Randomized, 42).unwrap();
        assert_eq!(a.assignment, b.assignment);
        assert_eq!(a.sub_y.data(), b.sub_y.data());
        let c = spatial_subsample(&img, SubsampleMode::Randomized, 43).unwrap();
        assert_ne!(a.assignment, c.assignment);
    }

    #[test]
    fn rejects_odd_dimensions() {
        let img = ImageGrid::constant(3, 4, 0.0).unwrap();
        assert!(matches!(
            spatial_subsample(&img, SubsampleMode::Deterministic, 0),
            Err(Error::OddDimensions { .. })
        ));
    }

    #[test]
    fn crop_drops_odd_edges() {
        let img = ImageGrid::from_fn(5, 4, |r, c| (r * 10 + c) as f64).unwrap();
        let cropped = crop_to_even(&img).unwrap();
        assert_eq!(cropped.width(), 4);
        assert_eq!(cropped.height(), 4);
        assert_eq!(cropped.get(3, 3), 33.0);

        let even = ImageGrid::from_fn(4, 4, |r, c| (r + c) as f64).unwrap();
        assert_eq!(crop_to_even(&even).unwrap(), even);

        let odd = ImageGrid::from_fn(3, 3, |r, c| (r * 3 + c) as f64).unwrap();
        let tl = crop_to_even(&odd).unwrap();
        assert_eq!(tl.data(), &[0.0, 1.0, 3.0, 4.0]);

        let tiny = ImageGrid::constant(1, 5, 0.0).unwrap();
        assert!(matches!(crop_to_even(&tiny), Err(Error::TooSmall { .. })));
    }

    #[test]
    fn extract_matching_pairs_by_block_position() {
        let img = ImageGrid::from_fn(4, 4, |r, c| (r * 4 + c) as f64).unwrap();
        let companion = ImageGrid::from_fn(4, 4, |r, c| 100.0 + (r * 4 + c) as f64).unwrap();
        let out = spatial_subsample(&img, SubsampleMode::Randomized, 7).unwrap();
        for role in SubImage::ALL {
            let extracted = out.extract_matching(&companion, role).unwrap();
            for (e, s) in extracted.data().iter().zip(out.sub_image(role).data()) {
                assert_eq!(*e, 100.0 + *s);
            }
        }
        let wrong = ImageGrid::constant(6, 6, 0.0).unwrap();
        assert!(out.extract_matching(&wrong, SubImage::Y).is_err());
    }
}
