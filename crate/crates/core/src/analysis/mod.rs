//! Divisibility of values of Laurent polynomials along orbits `n ↦ gⁿ` in
//! tori over Q: numeric scans, torsion reduction, hypothesis checks and
//! certificate construction.

mod bbs;
mod gene;
mod hypothesis;
mod instance;
mod morphism;
mod scan;
mod torsion;
mod unity;

pub use bbs::{bbs_conclusion, erdos, BbsCertificate, BbsOptions, ErdosReport, FactorizationFailure, Violation};
pub use gene::{certify_gene, GeneCertificate};
pub use hypothesis::{hypothesis_check, ComponentReport, HypothesisReport};
pub use instance::{extend_s, ExtendReport, InstanceJson, ProblemInstance};
pub use morphism::{certify_morphism, MorphismCertificate, MorphismOptions};
pub use scan::{
    residue_evidence, scan_ideal_inclusion, scan_support_inclusion, ideal_inclusion_at, support_inclusion_at, ScanError,
};
pub use torsion::{residue_instance, torsion_reduce, TorsionReduction};
pub use unity::{unity_points_scan, TorsionPoint, UnityFamily, UnityScan, UNITY_ORDER_BOUND};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::arith::ArithError;
use crate::laurent::{pow_rat, LaurentError};
use crate::lattice::IntMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DiagnosticCode {
    Hypothesis,
    Torsion,
    NoSymbolicQuotient,
    RankDefect,
    NotUnimodular,
    VerifyFail,
    InsufficientEvidence,
    IndexInfinite,
    SolveFail,
    MembershipFail,
}

impl DiagnosticCode {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Hypothesis => "HYPOTHESIS",
            Self::Torsion => "TORSION",
            Self::NoSymbolicQuotient => "NO_SYMBOLIC_QUOTIENT",
            Self::RankDefect => "RANK_DEFECT",
            Self::NotUnimodular => "NOT_UNIMODULAR",
            Self::VerifyFail => "VERIFY_FAIL",
            Self::InsufficientEvidence => "INSUFFICIENT_EVIDENCE",
            Self::IndexInfinite => "INDEX_INFINITE",
            Self::SolveFail => "SOLVE_FAIL",
            Self::MembershipFail => "MEMBERSHIP_FAIL",
        }
    }
}

impl std::fmt::Display for DiagnosticCode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A named refusal. `context` carries whatever was computed before the
/// failing stage (partial certificates, hypothesis reports).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub code: DiagnosticCode,
    pub message: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub failed: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context: Option<serde_json::Value>,
}

impl Diagnostic {
    pub fn new(code: DiagnosticCode, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
            failed: Vec::new(),
            context: None,
        }
    }

    pub fn with_context(mut self, v: impl Serialize) -> Self {
        self.context = serde_json::to_value(v).ok();
        self
    }

    pub fn with_failed(mut self, failed: Vec<String>) -> Self {
        self.failed = failed;
        self
    }
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.code, self.message)?;
        if !self.failed.is_empty() {
            write!(f, " [{}]", self.failed.join(", "))?;
        }
        Ok(())
    }
}

/// Errors that are about the input or the machinery, not the mathematics.
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error(transparent)]
    Laurent(#[from] LaurentError),
    #[error(transparent)]
    Scan(#[from] ScanError),
    #[error("invalid instance: {0}")]
    Instance(String),
    #[error("{0}")]
    Input(String),
}

/// One replayed certificate invariant.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            passed,
            detail: detail.into(),
        }
    }
}

pub fn all_passed(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.passed)
}

/// `φ_A(x)_i = Π_j x_j^{A_ij}` for an `s × d` matrix and a point of length `d`.
pub fn apply_monomial_map(a: &IntMatrix, x: &[BigRational]) -> Vec<BigRational> {
    assert_eq!(a.cols(), x.len(), "map and point dimensions differ");
    (0..a.rows())
        .map(|i| {
            let mut acc = BigRational::one();
            for (j, xj) in x.iter().enumerate() {
                let e = a[(i, j)].to_i64().expect("exponent exceeds 64 bits");
                if e != 0 {
                    acc *= pow_rat(xj, e);
                }
            }
            acc
        })
        .collect()
}

pub fn point_pow(x: &[BigRational], n: i64) -> Vec<BigRational> {
    x.iter().map(|c| pow_rat(c, n)).collect()
}

pub(crate) fn matrix_from_coords(rows: Vec<Vec<BigInt>>, cols: usize) -> IntMatrix {
    IntMatrix::from_rows_with_cols(rows, cols)
}
