//! Numerical toolkit for linear fields on Kerr: geometry, null tetrads,
//! spin-weighted spheroidal harmonics, radial Teukolsky solutions,
//! Teukolsky–Starobinsky identities and Unruh-state two-point functions.

pub mod angular;
pub mod error;
pub mod geometry;
pub mod ghp;
pub mod jet;
pub mod numerics;
pub mod radial;
pub mod tetrad;
pub mod tsid;
pub mod unruh;

pub use error::{KerrError, Result};
pub use geometry::{Chart, ChartPoint, ChristoffelData, Horizons, KerrParams, MetricData};
pub use jet::{Jet, C64};
pub use tetrad::{Scaling, SpinCoeffs, Tetrad};
