//! Laurent polynomial machinery for scaling polyphase matrices into
//! paraunitary form, and the tight wavelet filter banks built from it.
//!
//! The pipeline, bottom to top:
//!
//! * [`laurent`]: sparse multivariate Laurent polynomials and matrices over
//!   the torus, with the involution `z -> z^-1`.
//! * [`lp2`]: the `[H, I - H H*]` pyramid matrices built from a polyphase
//!   column, their diagonal scaling, and the uniqueness analysis.
//! * [`spectral`]: univariate positivity certificates and spectral
//!   factorization `P(z) = |Q(z)|^2`.
//! * [`filterbank`]: filters, polyphase decomposition, refinement masks,
//!   and the scaled tight wavelet bank construction.
//! * [`refinable`]: cascade evaluation of refinable functions and the
//!   smoothness lower bound.
//! * [`families`]: built-in interpolatory, B-spline and hat filters used
//!   by the worked constructions.

pub mod families;
pub mod filterbank;
pub mod intmat;
pub mod laurent;
pub mod lp2;
pub mod refinable;
pub mod spectral;

pub use filterbank::{DilationSpec, Filter, RefinementMask, WaveletBank};
pub use intmat::IntMatrix;
pub use laurent::{LaurentMatrix, LaurentPoly, SamplingGrid, TorusPoint};
pub use lp2::{Lp2Matrix, PolyphaseVector, ScalingDiagonal};
pub use refinable::{RefinableProfile, SmoothnessEstimate};
pub use spectral::{HermitianLaurentPoly, SpectralFactor};
