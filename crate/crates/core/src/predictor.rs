//! Four-neighbour mean predictor.
//!
//! The estimate for `(row, col)` is the rounded mean of whichever of the four
//! rook neighbours lie inside the image (four in the interior, three on an
//! edge, two at a corner). The centre pixel is never read, so on a
//! checkerboard split every prediction depends only on the opposite class.
//!
//! Ties round half away from zero. Encoder and decoder share this function,
//! which is all reversibility needs from the rounding rule.

use crate::image::PixelGrid;

/// Rounded `sum / count`, ties away from zero.
#[inline]
pub fn round_div(sum: i32, count: i32) -> i32 {
    debug_assert!(count > 0);
    let half = count / 2;
    if sum >= 0 {
        (sum + half) / count
    } else {
        -((-sum + half) / count)
    }
}

/// Sum and count of the in-bounds rook neighbours of `(row, col)`.
#[inline]
fn neighbour_sum<G: PixelGrid + ?Sized>(img: &G, row: usize, col: usize) -> (i32, i32) {
    let (w, h) = (img.width(), img.height());
    let mut sum = 0;
    let mut n = 0;
    if row > 0 {
        sum += img.value(row - 1, col);
        n += 1;
    }
    if row + 1 < h {
        sum += img.value(row + 1, col);
        n += 1;
    }
    if col > 0 {
        sum += img.value(row, col - 1);
        n += 1;
    }
    if col + 1 < w {
        sum += img.value(row, col + 1);
        n += 1;
    }
    (sum, n)
}

/// Predicted value of `(row, col)` from its rook neighbours.
///
/// Panics on a 1x1 image, which has no neighbours; callers enforce a 2x2
/// minimum.
#[inline]
pub fn predict<G: PixelGrid + ?Sized>(img: &G, row: usize, col: usize) -> i32 {
    let (sum, n) = neighbour_sum(img, row, col);
    assert!(n > 0, "pixel ({row}, {col}) has no neighbours");
    round_div(sum, n)
}
