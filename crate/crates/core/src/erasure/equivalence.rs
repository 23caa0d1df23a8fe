use serde::{Deserialize, Serialize};

use super::{construct, mrc_check, ErasureSet, Method, ReducedDual};
use crate::error::{Error, Result};
use crate::frame::{DualPair, Tolerances};
use crate::linalg::max_column_rel_diff;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodOutcome {
    pub method: Method,
    pub succeeded: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error_kind: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub duality_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseDifference {
    pub first: Method,
    pub second: Method,
    /// Largest columnwise relative difference.
    pub max_relative: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub erased_indices: Vec<usize>,
    pub mrc_ok: bool,
    pub tolerance: f64,
    pub outcomes: Vec<MethodOutcome>,
    pub differences: Vec<PairwiseDifference>,
    /// At least one method succeeded and every successful pair agrees
    /// within `tolerance`.
    pub all_equal: bool,
    /// Set when the iterative method succeeded but another did not.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub anomaly: Option<String>,
}

impl EquivalenceReport {
    pub fn outcome(&self, method: Method) -> Option<&MethodOutcome> {
        self.outcomes.iter().find(|o| o.method == method)
    }
}

/// Runs all three constructions on the same input and compares them.
/// Construction failures are recorded, never returned.
pub fn equivalence_check<T: Scalar>(
    pair: &DualPair<T>,
    erasure: &ErasureSet,
    tol: f64,
    tolerances: &Tolerances,
) -> Result<EquivalenceReport> {
    let mrc_ok = mrc_check(pair.frame(), erasure, tolerances.rank)?;
    let results: Vec<(Method, Result<ReducedDual<T>>)> = Method::ALL
        .into_iter()
        .map(|m| {
            let out = if mrc_ok {
                construct(pair, erasure, m, tolerances)
                    .and_then(|c| ReducedDual::verify(pair.frame(), erasure, m, c, tolerances))
            } else {
                Err(Error::MrcViolated)
            };
            (m, out)
        })
        .collect();

    let outcomes = results
        .iter()
        .map(|(m, r)| match r {
            Ok(d) => MethodOutcome {
                method: *m,
                succeeded: true,
                error_kind: None,
                error: None,
                duality_residual: Some(d.duality_residual()),
            },
            Err(e) => MethodOutcome {
                method: *m,
                succeeded: false,
                error_kind: Some(e.kind().to_string()),
                error: Some(e.to_string()),
                duality_residual: None,
            },
        })
        .collect::<Vec<_>>();

    let ok: Vec<(Method, &ReducedDual<T>)> = results
        .iter()
        .filter_map(|(m, r)| r.as_ref().ok().map(|d| (*m, d)))
        .collect();
    let mut differences = Vec::new();
    for (i, (ma, a)) in ok.iter().enumerate() {
        for (mb, b) in &ok[i + 1..] {
            differences.push(PairwiseDifference {
                first: *ma,
                second: *mb,
                max_relative: max_column_rel_diff(a.vectors(), b.vectors()),
            });
        }
    }
    let all_equal = !ok.is_empty() && differences.iter().all(|d| d.max_relative <= tol);

    let iterative_ok = outcomes
        .iter()
        .any(|o| o.method == Method::Iterative && o.succeeded);
    let failed_others: Vec<&str> = outcomes
        .iter()
        .filter(|o| o.method != Method::Iterative && !o.succeeded)
        .map(|o| o.method.as_str())
        .collect();
    let anomaly = (iterative_ok && !failed_others.is_empty()).then(|| {
        format!(
            "iterative construction succeeded but {} failed",
            failed_others.join(" and ")
        )
    });

    Ok(EquivalenceReport {
        erased_indices: erasure.one_based(),
        mrc_ok,
        tolerance: tol,
        outcomes,
        differences,
        all_equal,
        anomaly,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::erasure::fixtures::collinear_triple;
    use crate::frame::{canonical_dual, random_dual, Frame};

    #[test]
    fn canonical_random_frame_all_agree() {
        let tol = Tolerances::default();
        let frame = Frame::<f64>::random(40, 60, 8, tol.rank).unwrap();
        let pair = canonical_dual(&frame, &tol).unwrap();
        let e = ErasureSet::new(60, (0..8).map(|i| i * 5).collect()).unwrap();
        let report = equivalence_check(&pair, &e, 1e-8, &tol).unwrap();
        assert!(report.outcomes.iter().all(|o| o.succeeded));
        assert_eq!(report.differences.len(), 3);
        assert!(report.all_equal);
        assert!(report.anomaly.is_none());
    }

    #[test]
    fn collinear_triple_fails_three_ways_without_anomaly() {
        let tol = Tolerances::default();
        let pair = collinear_triple(3);
        let e = ErasureSet::new(5, vec![0]).unwrap();
        let report = equivalence_check(&pair, &e, 1e-8, &tol).unwrap();
        let kinds: Vec<_> = report
            .outcomes
            .iter()
            .map(|o| o.error_kind.clone().unwrap())
            .collect();
        assert_eq!(
            kinds,
            ["DenominatorVanishes", "SingularGram", "SingularOperator"]
        );
        assert!(!report.all_equal);
        assert!(report.anomaly.is_none());
        assert!(report.differences.is_empty());
    }

    #[test]
    fn zero_spread_matches_canonical_report() {
        let tol = Tolerances::default();
        let frame = Frame::<f64>::random(10, 16, 1, tol.rank).unwrap();
        let pair = canonical_dual(&frame, &tol).unwrap();
        let same = random_dual(&pair, 4, 0.0, &tol).unwrap();
        let e = ErasureSet::new(16, vec![3, 11]).unwrap();
        let a = equivalence_check(&pair, &e, 1e-8, &tol).unwrap();
        let b = equivalence_check(&same, &e, 1e-8, &tol).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn mrc_failure_is_recorded() {
        let tol = Tolerances::default();
        let frame = Frame::new(nalgebra::DMatrix::<f64>::identity(3, 3), tol.rank).unwrap();
        let pair = canonical_dual(&frame, &tol).unwrap();
        let e = ErasureSet::new(3, vec![2]).unwrap();
        let report = equivalence_check(&pair, &e, 1e-8, &tol).unwrap();
        assert!(!report.mrc_ok);
        assert!(report
            .outcomes
            .iter()
            .all(|o| o.error_kind.as_deref() == Some("MrcViolated")));
    }
}
