//! Blind-adaptive scalar quantization through modulo folding.
//!
//! An input `x` is amplified and folded into `[−λ, λ)` before a uniform
//! quantizer. For large enough gain the folded amplitudes are close to
//! uniform whatever the input distribution, so the uniform quantizer stays
//! matched to its input. The crate provides the folding transform and the
//! exact law of folded variables ([`fold`]), quantizer design and
//! distortion measures ([`quant`]), Wasserstein distances ([`metric`]),
//! an oversampled fold/quantize/unfold signal pipeline ([`signal`]), and
//! the experiment harness behind the `foldquant` binary ([`experiments`]).

pub mod config;
pub mod dist;
pub mod error;
pub mod experiments;
pub mod fold;
pub mod metric;
pub mod montecarlo;
pub mod quadrature;
pub mod quant;
pub mod signal;
pub mod special;

pub use dist::Distribution;
pub use error::{Error, Result};
pub use fold::{FoldParams, FoldedDistribution};
pub use quant::Quantizer;
pub use signal::{BandlimitedSignal, SampledSignal};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
