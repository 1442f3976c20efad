//! The candidate census: all pairs `(C_i, Q_i + L^2)`, their small-degree
//! point data, the isolation of the unique case without a closed point of
//! degree at most 3, and the full certificate for that case.
//!
//! Reduced mode processes the 24 cases whose quadric lands in the elliptic
//! class; full mode processes all 64 pairs and only flags membership in the
//! reduced set — the uniqueness claim is always scoped to the 24.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forms::{builtin_candidates, square_linear, Form, FormError, LinearMask};
use crate::points::{
    closed_point_counts, collect_zeros, count_points, jacobian_rank_ok, PointCounts,
    PointsError,
};
use crate::quadforms::{reduced_mask_list, QuadError};
use crate::zeta::{numerator_from_counts, numerator_full, ZetaError};

#[derive(Debug, Error)]
pub enum CensusError {
    #[error("uniqueness violated: {0}")]
    Uniqueness(String),
    #[error("certificate failed: {invariant}")]
    Certificate { invariant: String },
    #[error("certification depth must be 4..=12, got {0}")]
    InvalidDepth(u8),
    #[error(transparent)]
    Points(#[from] PointsError),
    #[error(transparent)]
    Zeta(#[from] ZetaError),
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// One of the 64 candidate cases: family index and squared-linear mask.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CaseId {
    /// 1..=4, selecting the pair `(C_i, Q_i)`.
    pub family: u8,
    pub mask: LinearMask,
}

impl CaseId {
    /// The defining system `[Q_family + mask^2, C_family]`.
    pub fn system(&self) -> Result<[Form; 2], CensusError> {
        let (cubic, quadric) = &builtin_candidates()[self.family as usize - 1];
        let quad = quadric.add(&square_linear(self.mask))?;
        Ok([quad, *cubic])
    }

    /// The case the census isolates: `(C_2, Q_2 + L(1,0,1,1)^2)`.
    pub fn exception() -> CaseId {
        CaseId { family: 2, mask: LinearMask::new(1, 0, 1, 1) }
    }
}

impl std::fmt::Display for CaseId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(C_{}, Q_{} + L({})^2)", self.family, self.family, self.mask)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CensusMode {
    Reduced,
    Full,
}

/// Per-field-degree smoothness evidence: every rational point found was
/// checked to have a rank-2 Jacobian.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JacobianSummary {
    pub field_degree: u8,
    pub points_checked: u64,
    pub all_rank2: bool,
}

/// Deep data attached to the exception case by [`certify_exception`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExceptionCertificate {
    /// Counting depth: counts run over `F_2 .. F_{2^max_degree}`.
    pub max_degree: u8,
    /// True when `max_degree < 8`, in which case the depth-8 consistency
    /// sections are absent.
    pub partial: bool,
    pub genus: u32,
    pub q: u64,
    /// `N_1..N_max_degree`, by direct enumeration.
    pub counts: Vec<u64>,
    /// `B_1..B_max_degree`, by Moebius inversion.
    pub places: Vec<u64>,
    /// Zeta numerator coefficients `a_0..a_8` in decimal.
    pub zeta_coefficients: Vec<String>,
    pub class_number: String,
    /// Counts implied by the numerator, `N_1..N_max_degree`; must equal
    /// `counts` entry by entry.
    pub predicted_counts: Vec<u64>,
    /// Whether the depth-8 Newton reconstruction satisfied the functional
    /// equation (only checked when `max_degree >= 8`).
    pub functional_equation_checked: bool,
    pub weil_check: bool,
    pub jacobian: Vec<JacobianSummary>,
}

/// Census row for one candidate case.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseReport {
    pub id: CaseId,
    pub in_reduced_24: bool,
    /// `N_1..N_3` over `F_2, F_4, F_8`.
    pub counts: [u64; 3],
    /// `B_1..B_3`.
    pub places: [u64; 3],
    pub has_deg_le_3: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    #[serde(default)]
    pub exception: Option<ExceptionCertificate>,
}

fn case_row(id: CaseId, in_reduced_24: bool) -> Result<CaseReport, CensusError> {
    let system = id.system()?;
    let mut counts = [0u64; 3];
    for k in 1..=3u8 {
        counts[k as usize - 1] = count_points(&system, k)?;
    }
    let closed = closed_point_counts(&PointCounts::new(2, counts.to_vec()))?;
    let places = [closed.places[0], closed.places[1], closed.places[2]];
    let has_deg_le_3 = places.iter().sum::<u64>() > 0;
    Ok(CaseReport { id, in_reduced_24, counts, places, has_deg_le_3, exception: None })
}

/// The 24 reduced cases, from the equivalence search, sorted by
/// `(family, mask)`.
pub fn reduced_case_ids() -> Result<Vec<CaseId>, CensusError> {
    let mut out = Vec::with_capacity(24);
    for family in 1..=4u8 {
        let quadric = &builtin_candidates()[family as usize - 1].1;
        for mask in reduced_mask_list(quadric)? {
            out.push(CaseId { family, mask });
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// Tabulates `N_1..N_3` and `B_1..B_3` for each case. Rows are sorted by
/// `(family, mask)` and the result is deterministic.
pub fn run_census(mode: CensusMode) -> Result<Vec<CaseReport>, CensusError> {
    let reduced: BTreeSet<CaseId> = reduced_case_ids()?.into_iter().collect();
    let ids: Vec<CaseId> = match mode {
        CensusMode::Reduced => reduced.iter().copied().collect(),
        CensusMode::Full => (1..=4u8)
            .flat_map(|family| LinearMask::all().map(move |mask| CaseId { family, mask }))
            .collect(),
    };
    let mut rows = Vec::with_capacity(ids.len());
    for (i, id) in ids.iter().enumerate() {
        eprintln!("census: case {}/{} {}", i + 1, ids.len(), id);
        rows.push(case_row(*id, reduced.contains(id))?);
    }
    rows.sort_unstable_by_key(|r| r.id);
    Ok(rows)
}

/// Checks the uniqueness claim over the reduced rows: exactly one case
/// without a closed point of degree at most 3, and it is the expected one.
/// Returns the exception's id.
pub fn verify_uniqueness(rows: &[CaseReport]) -> Result<CaseId, CensusError> {
    let missing: Vec<CaseId> = rows
        .iter()
        .filter(|r| r.in_reduced_24 && !r.has_deg_le_3)
        .map(|r| r.id)
        .collect();
    let reduced_total = rows.iter().filter(|r| r.in_reduced_24).count();
    if reduced_total != 24 {
        return Err(CensusError::Uniqueness(format!(
            "expected 24 reduced cases, saw {reduced_total}"
        )));
    }
    match missing.as_slice() {
        [one] if *one == CaseId::exception() => Ok(*one),
        [] => Err(CensusError::Uniqueness(
            "no reduced case lacks a point of degree <= 3".into(),
        )),
        [one] => Err(CensusError::Uniqueness(format!(
            "unique exception is {one}, expected {}",
            CaseId::exception()
        ))),
        many => Err(CensusError::Uniqueness(format!(
            "{} reduced cases lack points of degree <= 3: {}",
            many.len(),
            many.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(", ")
        ))),
    }
}

fn certificate_err(invariant: impl Into<String>) -> CensusError {
    CensusError::Certificate { invariant: invariant.into() }
}

/// Runs the full certificate for the exception case using its builtin
/// defining forms. `max_degree` is the counting depth (default 8; below 8
/// the certificate is marked partial).
pub fn certify_exception(max_degree: u8) -> Result<CaseReport, CensusError> {
    let id = CaseId::exception();
    let [quadric, cubic] = id.system()?;
    certify_curve(id, &quadric, &cubic, max_degree)
}

/// Certificate core, parameterized over the defining forms so tests can feed
/// corrupted data and watch the certificate fail.
pub fn certify_curve(
    id: CaseId,
    quadric: &Form,
    cubic: &Form,
    max_degree: u8,
) -> Result<CaseReport, CensusError> {
    if !(4..=12).contains(&max_degree) {
        return Err(CensusError::InvalidDepth(max_degree));
    }
    let system = [*quadric, *cubic];

    // every number below is recomputed from raw enumeration in this run
    let mut counts = Vec::with_capacity(max_degree as usize);
    let mut jacobian = Vec::new();
    for k in 1..=max_degree {
        eprintln!("certify: counting rational points over GF(2^{k})");
        let zeros = collect_zeros(&system, k)?;
        counts.push(zeros.len() as u64);
        let mut all_rank2 = true;
        for p in &zeros {
            if !jacobian_rank_ok(quadric, cubic, p)? {
                all_rank2 = false;
            }
        }
        jacobian.push(JacobianSummary {
            field_degree: k,
            points_checked: zeros.len() as u64,
            all_rank2,
        });
        if !all_rank2 {
            return Err(certificate_err(format!(
                "smoothness: a GF(2^{k})-point has Jacobian rank < 2"
            )));
        }
    }

    if counts[..3] != [0, 0, 0] {
        return Err(certificate_err(format!(
            "N_1 = N_2 = N_3 = 0 (found {:?})",
            &counts[..3]
        )));
    }
    let pc = PointCounts::new(2, counts.clone());
    let closed = closed_point_counts(&pc)?;
    if closed.places[3] != 1 {
        return Err(certificate_err(format!("B_4 = 1 (found {})", closed.places[3])));
    }

    let genus = 4;
    let z = numerator_from_counts(&pc, genus)?;
    let h = z.class_number()?;
    if h != num_bigint::BigInt::from(1) {
        return Err(certificate_err(format!("class number h = 1 (found {h})")));
    }

    let predicted = z.predict_counts(u32::from(max_degree))?;
    for k in 1..=max_degree as usize {
        if predicted.counts[k - 1] != counts[k - 1] {
            return Err(certificate_err(format!(
                "predicted N_{k} = {} equals counted {}",
                predicted.counts[k - 1],
                counts[k - 1]
            )));
        }
    }

    let full_depth = max_degree >= 8;
    if full_depth {
        // depth-8 Newton reconstruction must satisfy the functional equation
        let z8 = numerator_full(&pc, genus)?;
        if z8 != z {
            return Err(certificate_err(
                "depth-8 reconstruction equals the depth-4 numerator",
            ));
        }
    }
    if !z.weil_check() {
        return Err(certificate_err("Weil bound |N_k - 2^k - 1| <= 8 * 2^(k/2)"));
    }

    let certificate = ExceptionCertificate {
        max_degree,
        partial: !full_depth,
        genus,
        q: 2,
        counts: counts.clone(),
        places: closed.places.clone(),
        zeta_coefficients: z.coefficients().iter().map(|a| a.to_string()).collect(),
        class_number: h.to_string(),
        predicted_counts: predicted.counts,
        functional_equation_checked: full_depth,
        weil_check: true,
        jacobian,
    };

    Ok(CaseReport {
        id,
        in_reduced_24: true,
        counts: [counts[0], counts[1], counts[2]],
        places: [closed.places[0], closed.places[1], closed.places[2]],
        has_deg_le_3: false,
        exception: Some(certificate),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Json,
    Csv,
    Table,
}

impl ReportFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            ReportFormat::Json => "json",
            ReportFormat::Csv => "csv",
            ReportFormat::Table => "table",
        }
    }
}

/// Renders a report deterministically; identical inputs give byte-identical
/// output in every format.
pub fn render_report(rows: &[CaseReport], format: ReportFormat) -> Result<String, CensusError> {
    match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(rows)?;
            s.push('\n');
            Ok(s)
        }
        ReportFormat::Csv => {
            let mut s = String::from("family,mask,reduced,N1,N2,N3,B1,B2,B3,deg_le_3\n");
            for r in rows {
                s.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{}\n",
                    r.id.family,
                    r.id.mask,
                    r.in_reduced_24,
                    r.counts[0],
                    r.counts[1],
                    r.counts[2],
                    r.places[0],
                    r.places[1],
                    r.places[2],
                    r.has_deg_le_3
                ));
            }
            Ok(s)
        }
        ReportFormat::Table => {
            let mut s = String::from(
                "  i  k1k2k3k4  reduced    N1    N2    N3    B1    B2    B3  deg<=3\n",
            );
            for r in rows {
                s.push_str(&format!(
                    "{:>3}  {:>8}  {:>7}  {:>4}  {:>4}  {:>4}  {:>4}  {:>4}  {:>4}  {:>6}\n",
                    r.id.family,
                    r.id.mask.to_string(),
                    if r.in_reduced_24 { "yes" } else { "no" },
                    r.counts[0],
                    r.counts[1],
                    r.counts[2],
                    r.places[0],
                    r.places[1],
                    r.places[2],
                    if r.has_deg_le_3 { "yes" } else { "no" }
                ));
            }
            Ok(s)
        }
    }
}

/// Writes a rendered report to a file.
pub fn emit_report(
    rows: &[CaseReport],
    format: ReportFormat,
    path: &Path,
) -> Result<(), CensusError> {
    let rendered = render_report(rows, format)?;
    let mut f = std::fs::File::create(path)?;
    f.write_all(rendered.as_bytes())?;
    Ok(())
}

/// Parses a JSON report back; `parse(emit(r)) == r`.
pub fn parse_json_report(text: &str) -> Result<Vec<CaseReport>, CensusError> {
    Ok(serde_json::from_str(text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduced_ids_are_the_24_published_cases() {
        let ids = reduced_case_ids().unwrap();
        assert_eq!(ids.len(), 24);
        let expected: Vec<(u8, &str)> = vec![
            (1, "0011"), (1, "0111"), (1, "1011"), (1, "1100"), (1, "1101"), (1, "1110"),
            (2, "0010"), (2, "0101"), (2, "1011"), (2, "1101"), (2, "1110"), (2, "1111"),
            (3, "0101"), (3, "0111"), (3, "1000"), (3, "1011"), (3, "1110"), (3, "1111"),
            (4, "0110"), (4, "0111"), (4, "1001"), (4, "1011"), (4, "1100"), (4, "1111"),
        ];
        let got: Vec<(u8, String)> =
            ids.iter().map(|c| (c.family, c.mask.to_string())).collect();
        let expected: Vec<(u8, String)> =
            expected.into_iter().map(|(f, m)| (f, m.to_string())).collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn reduced_census_isolates_the_exception() {
        let rows = run_census(CensusMode::Reduced).unwrap();
        assert_eq!(rows.len(), 24);
        assert_eq!(rows.iter().filter(|r| r.has_deg_le_3).count(), 23);
        let exc = verify_uniqueness(&rows).unwrap();
        assert_eq!(exc, CaseId::exception());
        for r in &rows {
            assert_eq!(r.has_deg_le_3, r.places.iter().sum::<u64>() > 0);
            assert_eq!(r.has_deg_le_3, r.counts[1] > 0 || r.counts[2] > 0);
        }
    }

    #[test]
    fn full_census_flags_membership_and_matches_reduced_rows() {
        let full = run_census(CensusMode::Full).unwrap();
        assert_eq!(full.len(), 64);
        assert_eq!(full.iter().filter(|r| r.in_reduced_24).count(), 24);
        let reduced = run_census(CensusMode::Reduced).unwrap();
        let from_full: Vec<&CaseReport> =
            full.iter().filter(|r| r.in_reduced_24).collect();
        for (a, b) in reduced.iter().zip(from_full) {
            assert_eq!(a, b);
        }
        verify_uniqueness(&full).unwrap();
    }

    #[test]
    fn report_formats_are_stable_and_json_roundtrips() {
        let rows = run_census(CensusMode::Reduced).unwrap();
        let json = render_report(&rows, ReportFormat::Json).unwrap();
        let back = parse_json_report(&json).unwrap();
        assert_eq!(rows, back);
        let csv = render_report(&rows, ReportFormat::Csv).unwrap();
        assert_eq!(csv.lines().count(), rows.len() + 1);
        let table = render_report(&rows, ReportFormat::Table).unwrap();
        assert_eq!(table.lines().count(), rows.len() + 1);
        // determinism
        assert_eq!(json, render_report(&rows, ReportFormat::Json).unwrap());
    }

    #[test]
    fn shallow_certificate_is_partial() {
        let report = certify_exception(4).unwrap();
        let cert = report.exception.unwrap();
        assert!(cert.partial);
        assert!(!cert.functional_equation_checked);
        assert_eq!(cert.counts, vec![0, 0, 0, 4]);
        assert_eq!(cert.places, vec![0, 0, 0, 1]);
        assert_eq!(cert.class_number, "1");
        assert_eq!(
            cert.zeta_coefficients,
            vec!["1", "-3", "2", "0", "1", "0", "8", "-24", "16"]
        );
    }

    #[test]
    fn corrupted_cubic_fails_certification() {
        let id = CaseId::exception();
        let [quadric, cubic] = id.system().unwrap();
        let corrupted = cubic
            .add(&crate::forms::parse_form("x1^3", 3).unwrap())
            .unwrap();
        let err = certify_curve(id, &quadric, &corrupted, 4).unwrap_err();
        match err {
            CensusError::Certificate { .. } | CensusError::Zeta(_) | CensusError::Points(_) => {}
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn depth_is_validated() {
        assert!(matches!(certify_exception(3), Err(CensusError::InvalidDepth(3))));
        assert!(matches!(certify_exception(13), Err(CensusError::InvalidDepth(13))));
    }
}
