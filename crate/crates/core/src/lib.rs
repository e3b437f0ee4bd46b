//! Bit-exact emulation of microscaling (MX) block formats.
//!
//! The crate covers element formats ([`formats`]), shared-scale computation
//! ([`scaling`]), group-wise quantization with symmetric, sign-split (AMX) and
//! zero-point scales ([`quantizer`]), emulated reduced-precision dot products
//! ([`gemm`]), error and outlier statistics ([`analysis`]), randomized Hadamard
//! rotation ([`rotation`]), a cluster-wise Lloyd-Max reference quantizer
//! ([`lloydmax`]) and the tensor file formats used by the `mxemu` binary
//! ([`io`], [`cli`]).
//!
//! ```
//! use mx_emu::{quantize_dequantize, GroupSize, QuantConfig, ScaleMode, Tensor};
//!
//! let x = Tensor::from_vec((0..1024).map(|i| -4.9 + 35.9 * i as f64 / 1023.0).collect());
//! let amx = QuantConfig::amxfp4(GroupSize::Row, ScaleMode::Fp8E5M2);
//! let y = quantize_dequantize(&x, &amx).unwrap();
//! assert_eq!(y.unique().first(), Some(&-5.25));
//! ```

pub mod analysis;
pub mod cli;
pub mod error;
pub mod fixtures;
pub mod formats;
pub mod gemm;
pub mod io;
pub mod lloydmax;
pub mod quantizer;
pub mod rng;
pub mod rotation;
pub mod scaling;
pub mod tensor;

pub use error::{MxError, Result};
pub use formats::{round_real_to_fp, ElementCode, ElementFormat};
pub use quantizer::{
    dequantize, parse_format_spec, quantize, quantize_dequantize, QuantConfig, QuantizedTensor,
    Symmetry,
};
pub use scaling::{AsymScalePair, ScaleMode, TensorScale};
pub use tensor::{GroupLayout, GroupSize, Tensor};
