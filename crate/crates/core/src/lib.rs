//! Arithmetic of the Neumann-Setzer family of elliptic curves.
//!
//! A prime p of the form u^2 + 64 gives rise to a pair of isogenous
//! elliptic curves of conductor p. This crate computes their standard
//! invariants, torsion, reduction data and periods (`ec`), constructs and
//! normalizes the family itself (`ns`), builds spaces of modular symbols
//! for prime level and extracts modular degrees through the intersection
//! pairing (`modsym`), evaluates L-values and the Birch
//! Swinnerton-Dyer quantity Sha (`analytic`), and runs bucketed surveys
//! over ranges of the parameter u (`survey`).

pub mod arith;
pub mod numeric;
pub mod ec;
pub mod ns;
pub mod modsym;
pub mod analytic;
pub mod survey;

pub use ec::{
    CurveError, CurveInvariants, KodairaSymbol, LatticeData, PeriodData, RationalPoint, ReductionData,
    ReductionKind, TorsionGroup, WeierstrassModel,
};
pub use ns::{
    EisensteinData, NSPair, NSParameter, NsError, Parity, ParityPrediction, Provenance,
    TwoValuation,
};
pub use modsym::{
    DegreeResult, EigenLattice, ManinSymbolSpace, ModSymError, P1Element,
};
pub use analytic::{AnalyticError, BSDData, CurveTag, HeightComparison, LValueResult};
pub use survey::{
    Bucket, Checkpoint, CurveRecord, FrequencyTable, ParityReport, SurveyConfig, SurveyError,
    SurveyMode, SurveyOutput,
};
