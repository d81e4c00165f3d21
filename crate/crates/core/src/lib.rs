//! Convex drums under anisotropic perimeter: norms, convex polygons, Dirichlet
//! eigenvalues, the functional `λ(U) + P_ρ(U)` and its numerical minimizers.

pub mod error;
pub mod features;
pub mod functional;
pub mod geometry;
pub mod norm;
pub mod optimizer;
pub mod spectral;
pub mod vec2;

pub use error::{Error, Result};
pub use geometry::{hausdorff_distance, hausdorff_modulo_translation, sandwich_epsilon, CenterMode, ConvexPolygon, SupportVector};
pub use norm::{parse_norm, AdditivityCone, DegenerateDirection, Norm, NormProbe};
pub use vec2::Vec2;
