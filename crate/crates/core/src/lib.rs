//! Class numbers of curves over small binary fields.
//!
//! The library has three layers:
//!
//! * exact arithmetic: [`gfield`] (the fields `GF(2^k)`, `k <= 12`), [`forms`]
//!   (homogeneous quadrics and cubics in four variables over `F_2`), and
//!   [`bounds`] (exact comparisons against `sqrt(q)` expressions);
//! * counting: [`points`] (projective point enumeration, rational-point and
//!   place counts) and [`zeta`] (zeta numerators, class numbers, and count
//!   predictions via Newton's identities);
//! * verification drivers: [`quadforms`] (equivalence of quadrics under
//!   `GL_4(F_2)`), [`census`] (the 24-case candidate sweep and the class
//!   number one certificate), and [`cli`].

pub mod bounds;
pub mod census;
pub mod cli;
pub mod forms;
pub mod gfield;
pub mod points;
pub mod quadforms;
pub mod zeta;

pub use bounds::BoundsReport;
pub use census::{CaseId, CaseReport, CensusMode, ReportFormat};
pub use forms::{Form, GlMatrix, LinearMask};
pub use gfield::{FieldCtx, GfElem};
pub use points::{ClosedPointCounts, PointCounts, ProjPoint};
pub use zeta::ZetaNumerator;
