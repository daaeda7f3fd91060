//! Measurements of attraction: seminorms, spectra, manifold distance, soliton fits,
//! beat spectra, the Fatou gap and the reduced trace oracle.

pub mod attraction;
pub mod beats;
pub mod fatou;
pub mod manifold;
pub mod norms;
pub mod reduced;
pub mod soliton;
pub mod spectrum;

pub use attraction::{
    kgu1_attraction, lamb_attraction, phi4_kink_run, AttractionReport, KinkRunParams, OrbitRunParams, RunParams,
};
pub use beats::{beat_spectrum, bound_states, BeatSpectrum, BoundState};
pub use fatou::{fatou_check, LimitObject};
pub use manifold::{manifold_distance, ManifoldFit};
pub use norms::{local_seminorm, NormOrder};
pub use reduced::{reduced_oracle_gap, reduced_trace};
pub use soliton::{soliton_fit, SolitonFit};
pub use spectrum::{dominant_frequency, FrequencyEstimate};
