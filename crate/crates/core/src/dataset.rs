//! Loading a manifest's images and landmarks into a [`FeatureTable`].

use rayon::prelude::*;

use crate::error::Result;
use crate::features::{region_blocks, FeatureKinds, FeatureTable, RegionSource};
use crate::geometry::RegionScheme;
use crate::image::{load_grayscale_image, Image};
use crate::landmarks::{parse_landmarks, LandmarkSet};
use crate::manifest::{DatasetManifest, Sample};

pub fn load_sample(sample: &Sample) -> Result<(Image, LandmarkSet)> {
    let run = || -> Result<_> { Ok((load_grayscale_image(&sample.image)?, parse_landmarks(&sample.landmarks)?)) };
    run().map_err(|e| e.in_sample(&sample.image))
}

/// Descriptor blocks of every region of `source` for every sample.
pub fn build_feature_table(
    manifest: &DatasetManifest,
    scheme: &RegionScheme,
    source: RegionSource,
    kinds: FeatureKinds,
) -> Result<FeatureTable> {
    let names = source.region_names(scheme);
    let blocks = manifest
        .samples
        .par_iter()
        .map(|sample| {
            let (image, landmarks) = load_sample(sample)?;
            let run = || -> Result<_> {
                let masks = source.masks(&landmarks, scheme, image.width(), image.height())?;
                region_blocks(&image, &masks, &names, kinds)
            };
            run().map_err(|e| e.in_sample(&sample.image))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FeatureTable {
        region_names: names,
        kinds,
        blocks,
    })
}
