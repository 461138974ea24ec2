//! Lossless boundary-pixel preprocessing.
//!
//! Forward direction, for a cover `O` and parameters `(T, t0, t1)`:
//!
//! 1. Every even-class pixel (`(row + col) % 2 == 0`) is predicted from its
//!    odd-class neighbours in `O`. If the prediction is below `t0` the pixel
//!    is raised by `T`; if it is above `255 - t0` it is lowered by `T`.
//! 2. Every odd-class pixel is predicted from the even-class pixels produced
//!    by step 1 and shifted the same way using `t1`.
//! 3. The result, which lies in `[-T, 255 + T]`, is clamped into
//!    `[T, 255 - T]`. A `(2T+1)`-ary location map records, per pixel, how far
//!    below `T` (symbol `v + T`) or above `255 - T` (symbol `255 + T - v`)
//!    the pre-clamp value was, with `2T` meaning "not clamped".
//!
//! The inverse undoes the clamp from the map, then reverses step 2 and step 1
//! in that order. Each pass only reads the class it does not write, so the
//! decoder sees exactly the contexts the encoder saw.

use crate::error::{Error, Result};
use crate::image::{GrayImage, Parity, PixelGrid, WideImage};
use crate::par::{self, Execution};
use crate::predictor::predict;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PreprocessParams {
    t: u8,
    t0: u8,
    t1: u8,
}

impl PreprocessParams {
    pub const MAX: u8 = 127;

    pub fn new(t: u8, t0: u8, t1: u8) -> Result<Self> {
        for (name, v) in [("T", t), ("t0", t0), ("t1", t1)] {
            if !(1..=Self::MAX).contains(&v) {
                return Err(Error::InvalidParam(format!("{name} must be in 1..={}, got {v}", Self::MAX)));
            }
        }
        Ok(PreprocessParams { t, t0, t1 })
    }

    /// Boundary half-width `T`.
    pub fn t(&self) -> u8 {
        self.t
    }

    /// Threshold for the even-class pass.
    pub fn t0(&self) -> u8 {
        self.t0
    }

    /// Threshold for the odd-class pass.
    pub fn t1(&self) -> u8 {
        self.t1
    }

    fn threshold(&self, parity: Parity) -> u8 {
        match parity {
            Parity::Even => self.t0,
            Parity::Odd => self.t1,
        }
    }
}

/// Per-pixel clamp record over the alphabet `{0, ..., 2T}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocationMap {
    width: usize,
    height: usize,
    t: u8,
    symbols: Vec<u8>,
}

impl LocationMap {
    pub fn new(width: usize, height: usize, t: u8, symbols: Vec<u8>) -> Result<Self> {
        if !(1..=PreprocessParams::MAX).contains(&t) {
            return Err(Error::InvalidParam(format!("T must be in 1..=127, got {t}")));
        }
        if symbols.len() != width * height {
            return Err(Error::DimensionMismatch(format!("{} symbols for a {width}x{height} map", symbols.len())));
        }
        if let Some(i) = symbols.iter().position(|&s| s > 2 * t) {
            return Err(Error::corrupt(format!(
                "location map symbol {} at index {i} exceeds 2T = {}",
                symbols[i],
                2 * t
            )));
        }
        Ok(LocationMap { width, height, t, symbols })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn t(&self) -> u8 {
        self.t
    }

    /// `2T + 1`.
    pub fn alphabet_size(&self) -> usize {
        2 * usize::from(self.t) + 1
    }

    /// The "untouched" symbol `2T`.
    pub fn unclamped_symbol(&self) -> u8 {
        2 * self.t
    }

    pub fn symbols(&self) -> &[u8] {
        &self.symbols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.symbols[row * self.width + col]
    }

    /// Positions whose symbol is not `2T`.
    pub fn boundary_count(&self) -> usize {
        let keep = self.unclamped_symbol();
        self.symbols.iter().filter(|&&s| s != keep).count()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PreprocessOutput {
    /// Boundary-free image, every sample in `[T, 255 - T]`.
    pub x: GrayImage,
    pub locmap: LocationMap,
    pub params: PreprocessParams,
}

/// Number of pixels still flagged in the location map after preprocessing.
pub fn boundary_count_after(out: &PreprocessOutput) -> usize {
    out.locmap.boundary_count()
}

/// One prediction made by a pass, for instrumentation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TracedPrediction {
    pub row: usize,
    pub col: usize,
    pub prediction: i32,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Direction {
    Forward,
    Inverse,
}

#[inline]
fn shift_for(prediction: i32, threshold: u8, t: u8, dir: Direction) -> i32 {
    let th = i32::from(threshold);
    let step = if prediction < th {
        i32::from(t)
    } else if prediction > 255 - th {
        -i32::from(t)
    } else {
        0
    };
    match dir {
        Direction::Forward => step,
        Direction::Inverse => -step,
    }
}

/// Shifts every pixel of class `parity` according to its prediction from
/// `src`. Pixels of the other class are copied unchanged.
fn shift_pass(
    src: &WideImage,
    parity: Parity,
    params: &PreprocessParams,
    dir: Direction,
    exec: Execution,
    trace: Option<&mut Vec<TracedPrediction>>,
) -> WideImage {
    let width = src.width();
    let threshold = params.threshold(parity);
    let mut out = src.clone();
    match trace {
        Some(trace) => {
            for row in 0..src.height() {
                for col in (parity.first_col(row)..width).step_by(2) {
                    let p = predict(src, row, col);
                    trace.push(TracedPrediction { row, col, prediction: p });
                    out.pixels_mut()[row * width + col] += shift_for(p, threshold, params.t, dir);
                }
            }
        }
        None => par::for_each_row(exec, out.pixels_mut(), width, |row, line| {
            for col in (parity.first_col(row)..width).step_by(2) {
                line[col] += shift_for(predict(src, row, col), threshold, params.t, dir);
            }
        }),
    }
    out
}

fn clamp_and_map(x1: &WideImage, t: u8) -> (GrayImage, Vec<u8>) {
    let ti = i32::from(t);
    let mut pixels = Vec::with_capacity(x1.pixels().len());
    let mut symbols = Vec::with_capacity(x1.pixels().len());
    for &v in x1.pixels() {
        let (x, l) = if v < ti {
            (ti, v + ti)
        } else if v > 255 - ti {
            (255 - ti, 255 + ti - v)
        } else {
            (v, 2 * ti)
        };
        debug_assert!((0..=2 * ti).contains(&l), "pre-clamp value {v} outside [-T, 255+T]");
        pixels.push(x as u8);
        symbols.push(l as u8);
    }
    (GrayImage::new(x1.width(), x1.height(), pixels).expect("dims preserved"), symbols)
}

fn forward_impl(
    o: &GrayImage,
    params: PreprocessParams,
    exec: Execution,
    mut trace: Option<&mut Vec<TracedPrediction>>,
) -> Result<PreprocessOutput> {
    o.ensure_min_size()?;
    let wide = WideImage::from_gray(o);
    let x0 = shift_pass(&wide, Parity::Even, &params, Direction::Forward, exec, trace.as_deref_mut());
    let x1 = shift_pass(&x0, Parity::Odd, &params, Direction::Forward, exec, trace);
    let (x, symbols) = clamp_and_map(&x1, params.t);
    let locmap = LocationMap { width: o.width(), height: o.height(), t: params.t, symbols };
    Ok(PreprocessOutput { x, locmap, params })
}

/// `O -> (X, L)`.
pub fn forward(o: &GrayImage, params: PreprocessParams) -> Result<PreprocessOutput> {
    forward_impl(o, params, Execution::default(), None)
}

pub fn forward_with(o: &GrayImage, params: PreprocessParams, exec: Execution) -> Result<PreprocessOutput> {
    forward_impl(o, params, exec, None)
}

/// Forward pass that also returns every prediction it computed.
pub fn forward_traced(o: &GrayImage, params: PreprocessParams) -> Result<(PreprocessOutput, Vec<TracedPrediction>)> {
    let mut trace = Vec::new();
    let out = forward_impl(o, params, Execution::Sequential, Some(&mut trace))?;
    Ok((out, trace))
}

/// Undoes the clamp using the location map, returning the pre-clamp image.
fn unclamp(x: &GrayImage, locmap: &LocationMap) -> Result<WideImage> {
    let t = i32::from(locmap.t);
    let keep = locmap.unclamped_symbol();
    let mut out = Vec::with_capacity(x.len());
    for (idx, (&xv, &l)) in x.pixels().iter().zip(locmap.symbols()).enumerate() {
        let (row, col) = (idx / x.width(), idx % x.width());
        let xv = i32::from(xv);
        if xv < t || xv > 255 - t {
            return Err(Error::corrupt(format!("pixel ({row}, {col}) = {xv} is outside [T, 255-T]")));
        }
        if l > keep {
            return Err(Error::corrupt(format!("location map symbol {l} at ({row}, {col}) exceeds 2T")));
        }
        let v = if l == keep {
            xv
        } else if xv == t {
            i32::from(l) - t
        } else if xv == 255 - t {
            255 + t - i32::from(l)
        } else {
            return Err(Error::corrupt(format!(
                "location map flags ({row}, {col}) but its value {xv} is not a clamp bound"
            )));
        };
        out.push(v);
    }
    Ok(WideImage::from_raw(x.width(), x.height(), out))
}

fn inverse_impl(
    x: &GrayImage,
    locmap: &LocationMap,
    params: PreprocessParams,
    exec: Execution,
    mut trace: Option<&mut Vec<TracedPrediction>>,
) -> Result<GrayImage> {
    x.ensure_min_size()?;
    if x.width() != locmap.width || x.height() != locmap.height {
        return Err(Error::DimensionMismatch(format!(
            "image is {}x{} but location map is {}x{}",
            x.width(),
            x.height(),
            locmap.width,
            locmap.height
        )));
    }
    if locmap.t != params.t {
        return Err(Error::corrupt(format!(
            "location map alphabet is for T = {}, parameters say T = {}",
            locmap.t, params.t
        )));
    }
    let x1 = unclamp(x, locmap)?;
    let x0 = shift_pass(&x1, Parity::Odd, &params, Direction::Inverse, exec, trace.as_deref_mut());
    let o = shift_pass(&x0, Parity::Even, &params, Direction::Inverse, exec, trace);
    o.to_gray()
}

/// `(X, L) -> O`. Any inconsistency between `X`, `L` and the parameters is a
/// hard [`Error::Corrupt`].
pub fn inverse(x: &GrayImage, locmap: &LocationMap, params: PreprocessParams) -> Result<GrayImage> {
    inverse_impl(x, locmap, params, Execution::default(), None)
}

pub fn inverse_with(
    x: &GrayImage,
    locmap: &LocationMap,
    params: PreprocessParams,
    exec: Execution,
) -> Result<GrayImage> {
    inverse_impl(x, locmap, params, exec, None)
}

pub fn inverse_traced(
    x: &GrayImage,
    locmap: &LocationMap,
    params: PreprocessParams,
) -> Result<(GrayImage, Vec<TracedPrediction>)> {
    let mut trace = Vec::new();
    let o = inverse_impl(x, locmap, params, Execution::Sequential, Some(&mut trace))?;
    Ok((o, trace))
}
