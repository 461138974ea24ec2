//! Reversible data embedding for covers full of boundary pixels.
//!
//! Pixels near 0 or 255 cannot absorb a `±T` embedding change, so they
//! normally end up in a location map carried as side information. On dark,
//! bright or clipped images that map is large and barely compressible. This
//! crate first moves such pixels into the safe range `[T, 255 - T]` with a
//! prediction-guided, exactly invertible shift ([`preprocess`]), so the
//! remaining `(2T+1)`-ary location map is small. Any
//! [`ReversibleEmbedder`] can then work on the boundary-free image.
//!
//! ```
//! use rdh_core::{embed_full, extract_full, BitStream, GrayImage, PeHistogramShift, PreprocessParams};
//!
//! let cover = GrayImage::from_fn(64, 64, |r, c| if r < 32 { 0 } else { (100 + c % 3) as u8 }).unwrap();
//! let params = PreprocessParams::new(1, 1, 4).unwrap();
//! let payload = BitStream::from_bytes(b"hi");
//! let marked = embed_full(&cover, &payload, params, &PeHistogramShift).unwrap();
//! let (got, restored) = extract_full(&marked.marked, &PeHistogramShift).unwrap();
//! assert_eq!(got, payload);
//! assert_eq!(restored, cover);
//! ```

pub mod bits;
pub mod codec;
pub mod embedder;
pub mod error;
pub mod image;
pub mod par;
pub mod pgm;
pub mod pipeline;
pub mod predictor;
pub mod preprocess;
pub mod synth;

pub use bits::BitStream;
pub use codec::{compress, compress_binary_baseline, decompress, CompressedMap};
pub use embedder::{deframe_payload, frame_payload, PeHistogramShift, ReversibleEmbedder};
pub use error::{Error, ErrorClass, Result};
pub use image::{count_boundary_pixels, parity_of, psnr, GrayImage, Parity, PixelGrid, Psnr, WideImage};
pub use par::Execution;
pub use pgm::{read_pgm, write_pgm, PgmFlavor};
pub use pipeline::{
    embed_full, extract_full, max_payload, max_payload_without_preprocessing, sweep, EmbedResult, SweepRecord,
    SweepReport,
};
pub use predictor::predict;
pub use preprocess::{boundary_count_after, forward, inverse, LocationMap, PreprocessOutput, PreprocessParams};
