//! Closed-form sum-of-sines approximations of Daubechies wavelets.
//!
//! * [`daub_reference`] builds exact filters and cascade waveforms.
//! * [`sine_fit`] fits `Σ a_k sin(b_k t + c_k)` by Levenberg-Marquardt.
//! * [`closed_form`] ships the published db4/db6/db8 coefficient tables and
//!   evaluates them gated to their support.
//! * [`inharmonic`] relates phases, frequencies and the harmonic grid.
//! * [`spectrum`] gives analytic spectra and a DFT reference.
//! * [`scalogram`] runs CWTs with the closed-form kernels.
//! * [`cli`] wires everything into file-based subcommands.

pub mod cli;
pub mod closed_form;
pub mod daub_reference;
pub mod error;
pub mod format;
pub mod inharmonic;
pub mod scalogram;
pub mod sine_fit;
pub mod spectrum;
pub mod waveform;

pub use error::{Error, Result};
pub use sine_fit::{Kind, SineTerm, SumOfSines};
pub use waveform::SampledWaveform;
