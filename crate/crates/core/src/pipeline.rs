//! End-to-end embedding and recovery, capacity accounting and the
//! `(t0, t1)` parameter sweep.
//!
//! The bitstream handed to the embedder is the frame from
//! [`frame_payload`](crate::embedder::frame_payload) followed by a 32-bit
//! CRC-32 over the cover dimensions, the cover raster and the payload. The
//! CRC lets extraction reject a marked image that decodes to a plausible
//! but wrong cover.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bits::BitStream;
use crate::codec::{compress, compress_binary_baseline, decompress, CompressedMap};
use crate::embedder::{deframe_payload, frame_payload, ReversibleEmbedder, FRAME_HEADER_BITS};
use crate::error::{Error, Result};
use crate::image::{count_boundary_pixels, psnr, GrayImage, Psnr};
use crate::par::{self, Execution};
use crate::preprocess::{self, PreprocessOutput, PreprocessParams};

pub const DIGEST_BITS: usize = 32;

/// Bits spent on everything except the payload, given a compressed map size.
pub fn side_info_bits(map_bits: usize) -> usize {
    FRAME_HEADER_BITS + map_bits + DIGEST_BITS
}

fn digest(o: &GrayImage, payload: &BitStream) -> u32 {
    let mut h = crc32fast::Hasher::new();
    h.update(&(o.width() as u32).to_be_bytes());
    h.update(&(o.height() as u32).to_be_bytes());
    h.update(o.pixels());
    h.update(&(payload.len() as u32).to_be_bytes());
    h.update(&payload.to_bytes());
    h.finalize()
}

#[derive(Clone, Debug)]
pub struct EmbedResult {
    /// The marked image `Y`.
    pub marked: GrayImage,
    pub params: PreprocessParams,
    pub payload_bits: usize,
    /// Largest payload these parameters admit.
    pub max_payload_bits: usize,
    /// `max_payload_bits / |O|`, bits per pixel.
    pub r_emb: f64,
    /// PSNR of `Y` against the cover.
    pub psnr: Psnr,
    /// Frame header, compressed map and digest.
    pub side_info_bits: usize,
    pub boundary_before: usize,
    pub boundary_after: usize,
}

/// Preprocessed image plus the quantities capacity accounting needs.
struct Prepared {
    pre: PreprocessOutput,
    map: CompressedMap,
    capacity: usize,
}

impl Prepared {
    fn new(o: &GrayImage, params: PreprocessParams, emb: &dyn ReversibleEmbedder, exec: Execution) -> Result<Self> {
        check_embedder(params, emb)?;
        let pre = preprocess::forward_with(o, params, exec)?;
        let map = compress(&pre.locmap);
        let capacity = emb.capacity(&pre.x);
        Ok(Prepared { pre, map, capacity })
    }

    fn side_info(&self) -> usize {
        side_info_bits(self.map.bit_length)
    }

    fn max_payload(&self) -> usize {
        self.capacity.saturating_sub(self.side_info())
    }

    fn embed(&self, o: &GrayImage, payload: &BitStream, emb: &dyn ReversibleEmbedder) -> Result<GrayImage> {
        let mut bits = frame_payload(payload, &self.map, self.pre.params)?;
        bits.push_uint(u64::from(digest(o, payload)), DIGEST_BITS as u32);
        if bits.len() > self.capacity {
            return Err(Error::InsufficientCapacity { needed: bits.len(), available: self.capacity });
        }
        emb.embed(&self.pre.x, &bits)
    }
}

fn check_embedder(params: PreprocessParams, emb: &dyn ReversibleEmbedder) -> Result<()> {
    if params.t() < emb.min_t() {
        return Err(Error::InvalidParam(format!("T = {} is below the embedder's minimum {}", params.t(), emb.min_t())));
    }
    Ok(())
}

fn bpp(bits: usize, o: &GrayImage) -> f64 {
    bits as f64 / o.len() as f64
}

/// Preprocesses `o`, then embeds header, compressed location map, `payload`
/// and digest into the boundary-free image.
pub fn embed_full(
    o: &GrayImage,
    payload: &BitStream,
    params: PreprocessParams,
    emb: &dyn ReversibleEmbedder,
) -> Result<EmbedResult> {
    let prep = Prepared::new(o, params, emb, Execution::default())?;
    let marked = prep.embed(o, payload, emb)?;
    let max_payload_bits = prep.max_payload();
    Ok(EmbedResult {
        psnr: psnr(o, &marked)?,
        marked,
        params,
        payload_bits: payload.len(),
        max_payload_bits,
        r_emb: bpp(max_payload_bits, o),
        side_info_bits: prep.side_info(),
        boundary_before: count_boundary_pixels(o, params.t())?,
        boundary_after: prep.pre.locmap.boundary_count(),
    })
}

/// Recovers `(payload, cover)` from a marked image. Fails as a whole; no
/// partial result is ever returned.
pub fn extract_full(y: &GrayImage, emb: &dyn ReversibleEmbedder) -> Result<(BitStream, GrayImage)> {
    let (bits, x) = emb.extract(y)?;
    let framed = deframe_payload(&bits, y.width(), y.height())?;
    if framed.params.t() < emb.min_t() {
        return Err(Error::corrupt(format!("embedded T = {} is below the embedder's minimum", framed.params.t())));
    }
    let expected = bits
        .slice(framed.frame_bits, bits.len())
        .reader()
        .read_uint(DIGEST_BITS as u32)
        .ok_or_else(|| Error::corrupt("integrity digest missing"))? as u32;
    let locmap = decompress(&framed.map)?;
    let o = preprocess::inverse(&x, &locmap, framed.params)?;
    if digest(&o, &framed.payload) != expected {
        return Err(Error::corrupt(
            "integrity check failed: recovered cover or payload differs from what was embedded",
        ));
    }
    Ok((framed.payload, o))
}

/// Largest payload `embed_full` accepts for these parameters; 0 when the
/// side information alone does not fit.
pub fn max_payload(o: &GrayImage, params: PreprocessParams, emb: &dyn ReversibleEmbedder) -> Result<usize> {
    Ok(Prepared::new(o, params, emb, Execution::default())?.max_payload())
}

/// Payload capacity when embedding straight into `o` without preprocessing:
/// boundary pixels are clamped into `[T, 255 - T]` and flagged in a binary
/// location map, which is compressed with the same coder and carried as side
/// information in place of the `(2T+1)`-ary map.
pub fn max_payload_without_preprocessing(o: &GrayImage, t: u8, emb: &dyn ReversibleEmbedder) -> Result<usize> {
    let map = compress_binary_baseline(o, t);
    let mut clamped = o.clone();
    let (lo, hi) = (t, 255 - t);
    clamped.pixels_mut().iter_mut().for_each(|v| *v = (*v).clamp(lo, hi));
    Ok(emb.capacity(&clamped).saturating_sub(side_info_bits(map.bit_length)))
}

/// `100 * after / before`, undefined for a zero denominator.
pub fn ratio_percent(after: usize, before: usize) -> Option<f64> {
    (before > 0).then(|| 100.0 * after as f64 / before as f64)
}

/// Deterministic filler used when measuring distortion at full capacity.
pub fn filler_payload(bits: usize) -> BitStream {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED);
    (0..bits).map(|_| rng.random::<bool>()).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRecord {
    pub t0: u8,
    pub t1: u8,
    pub boundary_before: usize,
    pub boundary_after: usize,
    pub map_bits_before: usize,
    pub map_bits_after: usize,
    /// Boundary-count ratio in percent; `None` when the cover has none.
    pub r0: Option<f64>,
    /// Compressed-map-size ratio in percent.
    pub r1: Option<f64>,
    pub max_payload_bits: usize,
    pub max_payload_before: usize,
    pub r_emb: f64,
    /// PSNR after embedding a full-capacity payload; `None` when even the
    /// side information does not fit.
    pub psnr: Option<Psnr>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepReport {
    pub t: u8,
    /// One record per `(t0, t1)`, `t0`-major in the order given.
    pub records: Vec<SweepRecord>,
    /// Index of the record with the largest `r_emb`; ties go to the
    /// lexicographically smallest `(t0, t1)`.
    pub best: usize,
}

impl SweepReport {
    pub fn best_record(&self) -> &SweepRecord {
        &self.records[self.best]
    }

    pub fn best_params(&self) -> PreprocessParams {
        let r = self.best_record();
        PreprocessParams::new(self.t, r.t0, r.t1).expect("validated during the sweep")
    }

    pub fn record(&self, t0: u8, t1: u8) -> Option<&SweepRecord> {
        self.records.iter().find(|r| r.t0 == t0 && r.t1 == t1)
    }
}

/// Baseline quantities that do not depend on `(t0, t1)`.
#[derive(Clone, Copy, Debug)]
struct Baseline {
    boundary: usize,
    map_bits: usize,
    max_payload: usize,
}

fn evaluate_cell(
    o: &GrayImage,
    params: PreprocessParams,
    base: Baseline,
    emb: &dyn ReversibleEmbedder,
) -> Result<SweepRecord> {
    let prep = Prepared::new(o, params, emb, Execution::Sequential)?;
    let boundary_after = prep.pre.locmap.boundary_count();
    let max_payload_bits = prep.max_payload();
    let psnr = if prep.capacity >= prep.side_info() {
        let y = prep.embed(o, &filler_payload(max_payload_bits), emb)?;
        Some(psnr(o, &y)?)
    } else {
        None
    };
    Ok(SweepRecord {
        t0: params.t0(),
        t1: params.t1(),
        boundary_before: base.boundary,
        boundary_after,
        map_bits_before: base.map_bits,
        map_bits_after: prep.map.bit_length,
        r0: ratio_percent(boundary_after, base.boundary),
        r1: ratio_percent(prep.map.bit_length, base.map_bits),
        max_payload_bits,
        max_payload_before: base.max_payload,
        r_emb: bpp(max_payload_bits, o),
        psnr,
    })
}

impl Baseline {
    fn new(o: &GrayImage, t: u8, emb: &dyn ReversibleEmbedder) -> Result<Self> {
        Ok(Baseline {
            boundary: count_boundary_pixels(o, t)?,
            map_bits: compress_binary_baseline(o, t).bit_length,
            max_payload: max_payload_without_preprocessing(o, t, emb)?,
        })
    }
}

/// All sweep metrics for a single parameter choice.
pub fn evaluate(o: &GrayImage, params: PreprocessParams, emb: &dyn ReversibleEmbedder) -> Result<SweepRecord> {
    o.ensure_min_size()?;
    check_embedder(params, emb)?;
    evaluate_cell(o, params, Baseline::new(o, params.t(), emb)?, emb)
}

/// Evaluates every `(t0, t1)` in `thresholds x thresholds`.
pub fn sweep(o: &GrayImage, thresholds: &[u8], t: u8, emb: &dyn ReversibleEmbedder) -> Result<SweepReport> {
    sweep_with(o, thresholds, t, emb, Execution::default())
}

pub fn sweep_with(
    o: &GrayImage,
    thresholds: &[u8],
    t: u8,
    emb: &dyn ReversibleEmbedder,
    exec: Execution,
) -> Result<SweepReport> {
    if thresholds.is_empty() {
        return Err(Error::InvalidParam("empty threshold set".into()));
    }
    o.ensure_min_size()?;
    let grid = thresholds
        .iter()
        .flat_map(|&t0| thresholds.iter().map(move |&t1| PreprocessParams::new(t, t0, t1)))
        .collect::<Result<Vec<_>>>()?;
    check_embedder(grid[0], emb)?;
    let base = Baseline::new(o, t, emb)?;
    let records = par::map_collect(exec, &grid, |&params| evaluate_cell(o, params, base, emb))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let best = (0..records.len())
        .min_by(|&a, &b| {
            let (ra, rb) = (&records[a], &records[b]);
            rb.max_payload_bits.cmp(&ra.max_payload_bits).then((ra.t0, ra.t1).cmp(&(rb.t0, rb.t1)))
        })
        .expect("non-empty grid");
    Ok(SweepReport { t, records, best })
}

/// `1..=16`, the default search range for both thresholds.
pub fn default_thresholds() -> Vec<u8> {
    (1..=16).collect()
}
