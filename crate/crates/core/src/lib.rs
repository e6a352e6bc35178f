//! Co-authorship network analytics for spotting authorship-for-sale activity.
//!
//! The crate is organised around a single immutable [`Corpus`]:
//!
//! * [`corpus`] ingests publication records and derives researcher profiles,
//!   publication ages and career stages.
//! * [`graph`] builds windowed co-authorship graphs and the depersonalised
//!   egocentric "shape" of every researcher.
//! * [`detector`] runs the suspicious-author filter cascade and the
//!   largest-connected-component rule.
//! * [`analysis`] holds null-model baselines and external validation against
//!   flag lists, retractions, citations and peer review.
//! * [`report`] aggregates exposure by publisher, journal, country and
//!   institution.
//! * [`synthgen`] generates labelled synthetic corpora for validation.
//!
//! Floating-point outputs are generic over [`Real`] (`f32` or `f64`); the
//! clustering coefficient itself is kept as an exact rational. The aliases
//! below fix the scalar to `f64` for everyday use.

pub mod analysis;
pub mod corpus;
pub mod detector;
pub mod error;
pub mod graph;
pub mod report;
pub mod scalar;
pub mod synthgen;

pub use corpus::{
    career_stage, eligible_publications, publication_age, Authorship, CareerStage, Corpus, DocType,
    FlagList, FlagType, PeerReviewRecord, PublicationRecord, ResearcherIdx, ResearcherProfile,
    YearRange,
};
pub use detector::{DetectorParams, SuspiciousCohort};
pub use error::{Error, Result};
pub use graph::{CoauthorGraph, EgoShape, ShapeKey};
pub use scalar::{MeanSd, Real};

/// Exact clustering coefficient `2E / (N(N-1))`.
pub type Coefficient = num_rational::Ratio<u64>;

/// Default floating-point scalar.
pub type Fraction = f64;

pub type NullModel = analysis::NullModelResult<Fraction>;
pub type Overlap = analysis::OverlapReport<Fraction>;
pub type PublicationBaseline = analysis::PublicationBaseline<Fraction>;
pub type PeerReviewReport = analysis::PeerReviewReport<Fraction>;
pub type TrendPoint = detector::TrendPoint<Fraction>;
pub type ExposureRow = report::ExposureRow<Fraction>;
pub type CountryRow = report::CountryRow<Fraction>;
pub type InstitutionLoadRow = report::InstitutionLoadRow<Fraction>;
pub type Evaluation = synthgen::Evaluation<Fraction>;
