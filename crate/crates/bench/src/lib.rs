//! Fixtures shared by the criterion benches.

use vesselmorph::{BinaryMask, Spacing};

/// A wavy band of the given half-width across a `w x h` canvas.
pub fn wavy_band(w: usize, h: usize, half_width: f64) -> BinaryMask {
    BinaryMask::from_fn(w, h, Spacing::default(), |x, y| {
        let center = h as f64 / 2.0 + 12.0 * (x as f64 * std::f64::consts::TAU / 90.0).sin();
        (y as f64 - center).abs() <= half_width
    })
}

/// A soft vessel image matching [`wavy_band`].
pub fn wavy_image(w: usize, h: usize, half_width: f64) -> vesselmorph::GrayImage {
    let band = wavy_band(w, h, half_width);
    vesselmorph::GrayImage::from_fn(w, h, Spacing::default(), |x, y| if band.get(x, y) { 0.8 } else { 0.1 })
        .expect("non-empty canvas")
}
