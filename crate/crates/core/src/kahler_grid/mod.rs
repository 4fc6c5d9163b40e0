//! Discretized flat Kähler tori and exterior calculus of End E-valued forms.

mod forms;
mod spectral;
mod torus;

pub use forms::{basis, shuffle_sign, subsets, EndoField, EndoFormField, MixedForm};
pub use spectral::{DerivativeScheme, SpectralEngine};
pub use torus::{Coupling, KahlerTorus, VolumeWeight};
pub(crate) use torus::factorial;
