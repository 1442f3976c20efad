//! Exact feasibility bounds: which `(q, g)` can carry a function field of a
//! given class number.
//!
//! Two inequalities are checked, both in exact integer arithmetic:
//!
//! * the Weil floor `h >= (sqrt(q) - 1)^{2g}`, handled by expanding
//!   `(q + 1 - 2 sqrt(q))^g` as `A - B sqrt(q)` and comparing by squaring;
//! * the Riemann-Roch/Weil sandwich
//!   `h (2g-1) (q^g - 1)/(q - 1) >= q^{2g-1} + 1 - 2g q^{(2g-1)/2}`.
//!
//! No floating point is used anywhere; verdicts at the boundary are exact.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BoundsError {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
}

/// The exact value `A - B*sqrt(q)` with nonnegative integer `A`, `B`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SqrtExpr {
    a: BigInt,
    b: BigInt,
    q: u64,
}

impl SqrtExpr {
    /// `(sqrt(q) - 1)^{2g} = (q + 1 - 2 sqrt(q))^g`, expanded exactly.
    pub fn weil_floor(q: u64, g: u32) -> SqrtExpr {
        let qq = BigInt::from(q);
        let mut a = BigInt::one();
        let mut b = BigInt::zero();
        for _ in 0..g {
            // (a - b sqrt q)(q + 1 - 2 sqrt q) = a(q+1) + 2bq - (2a + b(q+1)) sqrt q
            let new_a = &a * (&qq + 1u32) + 2u32 * &b * &qq;
            let new_b = 2u32 * &a + &b * (&qq + 1u32);
            a = new_a;
            b = new_b;
        }
        SqrtExpr { a, b, q }
    }

    pub fn parts(&self) -> (&BigInt, &BigInt, u64) {
        (&self.a, &self.b, self.q)
    }

    /// Exact test `A - B sqrt(q) > h`, decided by sign analysis and squaring.
    pub fn exceeds_int(&self, h: &BigInt) -> bool {
        let lhs = &self.a - h; // compare lhs vs B sqrt(q), both sides of known sign
        if lhs <= BigInt::zero() {
            return false;
        }
        &lhs * &lhs > &self.b * &self.b * BigInt::from(self.q)
    }
}

fn validate(q: u64, g: u32, h: &BigInt) -> Result<(), BoundsError> {
    if q < 2 {
        return Err(BoundsError::InvalidParameters(format!("q = {q} < 2")));
    }
    if g < 1 {
        return Err(BoundsError::InvalidParameters("g = 0 (handled separately)".into()));
    }
    if h < &BigInt::one() {
        return Err(BoundsError::InvalidParameters(format!("h = {h} < 1")));
    }
    Ok(())
}

/// True iff `(sqrt(q) - 1)^{2g} > h`, i.e. the Weil floor alone rules the
/// pair `(q, g)` out for class number `h`.
pub fn weil_lower_bound_exceeds(q: u64, g: u32, h: &BigInt) -> Result<bool, BoundsError> {
    validate(q, g, h)?;
    Ok(SqrtExpr::weil_floor(q, g).exceeds_int(h))
}

/// `(q^e - 1)/(q - 1) = 1 + q + ... + q^{e-1}`, exactly.
fn geometric_sum(q: u64, e: u32) -> BigInt {
    let qq = BigInt::from(q);
    let mut acc = BigInt::zero();
    let mut pw = BigInt::one();
    for _ in 0..e {
        acc += &pw;
        pw *= &qq;
    }
    acc
}

fn rr_weil_feasible_with_exponent(
    q: u64,
    g: u32,
    h: &BigInt,
    dimension_exponent: u32,
) -> Result<bool, BoundsError> {
    validate(q, g, h)?;
    let qq = BigInt::from(q);
    // degree-one places of the constant field extension of degree 2g-1 are
    // sandwiched between a Riemann-Roch count and the Weil bound
    let upper = h * BigInt::from(2 * u64::from(g) - 1) * geometric_sum(q, dimension_exponent);
    let lower_main = qq.pow(2 * g - 1) + 1u32;
    if upper >= lower_main {
        return Ok(true);
    }
    // upper >= lower_main - 2g q^{(2g-1)/2}  <=>  (lower_main - upper)^2 <= 4g^2 q^{2g-1}
    let gap = &lower_main - &upper;
    Ok(&gap * &gap <= 4u32 * BigInt::from(g) * BigInt::from(g) * qq.pow(2 * g - 1))
}

/// The sandwich inequality with the Riemann-Roch dimension exponent `g`.
pub fn rr_weil_feasible(q: u64, g: u32, h: &BigInt) -> Result<bool, BoundsError> {
    rr_weil_feasible_with_exponent(q, g, h, g)
}

/// The same inequality with the dimension exponent read literally as `q`
/// instead of `g`. Exposed for comparison output only: with this reading the
/// routine does not reproduce the known genus bounds.
pub fn rr_weil_feasible_literal(q: u64, g: u32, h: &BigInt) -> Result<bool, BoundsError> {
    let exponent = u32::try_from(q).map_err(|_| {
        BoundsError::InvalidParameters(format!("literal exponent q = {q} too large"))
    })?;
    rr_weil_feasible_with_exponent(q, g, h, exponent)
}

pub fn is_prime_power(q: u64) -> bool {
    if q < 2 {
        return false;
    }
    let mut n = q;
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            while n.is_multiple_of(p) {
                n /= p;
            }
            return n == 1;
        }
        p += 1;
    }
    true // q itself is prime
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Feasible,
    RuledOutWeil,
    RuledOutRr,
}

/// Feasibility report for one class number over all prime powers
/// `q <= q_cap` and genera `1..=g_cap`. The report proves nothing beyond its
/// caps; `scope_note` says so in the serialized form.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub h: u64,
    pub q_cap: u64,
    pub g_cap: u32,
    pub scope_note: String,
    /// Genus 0 is the trivial case: every rational function field has class
    /// number one, so it matches exactly when `h = 1`.
    pub genus_zero_feasible: bool,
    /// Feasible `(q, g)` pairs with `g >= 1`, sorted.
    pub feasible: Vec<(u64, u32)>,
    /// Largest feasible genus per field size (only fields with one).
    pub g_max: BTreeMap<u64, u32>,
    /// Reason each infeasible pair is ruled out, keyed `"q,g"`.
    pub ruled_out_reasons: BTreeMap<String, Verdict>,
    /// Comparison section for the literal dimension-exponent reading.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub literal_exponent_comparison: Option<LiteralComparison>,
}

/// What the bound stage would report under the literal exponent reading.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LiteralComparison {
    pub feasible: Vec<(u64, u32)>,
    pub g_max: BTreeMap<u64, u32>,
    pub matches_adopted_reading: bool,
}

/// Scans every prime power `q <= q_cap` and genus `g <= g_cap`, recording
/// per-pair verdicts. Also verifies infeasibility of every `g` above
/// `g_max(q)` up to the cap, so a non-monotone gap inside the cap cannot be
/// silently skipped.
pub fn genus_bounds_for_h(
    h: u64,
    q_cap: u64,
    g_cap: u32,
    include_literal: bool,
) -> Result<BoundsReport, BoundsError> {
    if h < 1 {
        return Err(BoundsError::InvalidParameters("class number must be >= 1".into()));
    }
    if q_cap < 2 || g_cap < 1 {
        return Err(BoundsError::InvalidParameters(format!(
            "caps must allow q >= 2 and g >= 1, got q_cap={q_cap}, g_cap={g_cap}"
        )));
    }
    let hh = BigInt::from(h);
    let mut feasible = Vec::new();
    let mut g_max = BTreeMap::new();
    let mut ruled_out = BTreeMap::new();
    for q in (2..=q_cap).filter(|&q| is_prime_power(q)) {
        for g in 1..=g_cap {
            if weil_lower_bound_exceeds(q, g, &hh)? {
                ruled_out.insert(format!("{q},{g}"), Verdict::RuledOutWeil);
            } else if !rr_weil_feasible(q, g, &hh)? {
                ruled_out.insert(format!("{q},{g}"), Verdict::RuledOutRr);
            } else {
                feasible.push((q, g));
                g_max.insert(q, g.max(g_max.get(&q).copied().unwrap_or(0)));
            }
        }
    }
    feasible.sort_unstable();
    let literal_exponent_comparison = if include_literal {
        Some(literal_comparison(h, q_cap, g_cap, &feasible)?)
    } else {
        None
    };
    Ok(BoundsReport {
        h,
        q_cap,
        g_cap,
        scope_note: format!(
            "verdicts cover prime powers q <= {q_cap} and genera 1..={g_cap} only"
        ),
        genus_zero_feasible: h == 1,
        feasible,
        g_max,
        ruled_out_reasons: ruled_out,
        literal_exponent_comparison,
    })
}

fn literal_comparison(
    h: u64,
    q_cap: u64,
    g_cap: u32,
    adopted_feasible: &[(u64, u32)],
) -> Result<LiteralComparison, BoundsError> {
    let hh = BigInt::from(h);
    let mut feasible = Vec::new();
    let mut g_max = BTreeMap::new();
    for q in (2..=q_cap).filter(|&q| is_prime_power(q)) {
        for g in 1..=g_cap {
            if !weil_lower_bound_exceeds(q, g, &hh)? && rr_weil_feasible_literal(q, g, &hh)? {
                feasible.push((q, g));
                g_max.insert(q, g.max(g_max.get(&q).copied().unwrap_or(0)));
            }
        }
    }
    feasible.sort_unstable();
    let matches = feasible == adopted_feasible;
    Ok(LiteralComparison { feasible, g_max, matches_adopted_reading: matches })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h(v: u64) -> BigInt {
        BigInt::from(v)
    }

    #[test]
    fn weil_floor_expansion() {
        // (sqrt 5 - 1)^2 = 6 - 2 sqrt 5
        let e = SqrtExpr::weil_floor(5, 1);
        assert_eq!(e.parts().0, &BigInt::from(6));
        assert_eq!(e.parts().1, &BigInt::from(2));
    }

    #[test]
    fn weil_rules_out_q_above_four() {
        assert!(weil_lower_bound_exceeds(5, 1, &h(1)).unwrap());
        assert!(!weil_lower_bound_exceeds(4, 1, &h(1)).unwrap());
        assert!(!weil_lower_bound_exceeds(2, 10, &h(1)).unwrap());
        assert!(!weil_lower_bound_exceeds(3, 10, &h(1)).unwrap());
        // (sqrt 9 - 1)^4 = 16 > 3
        assert!(weil_lower_bound_exceeds(9, 2, &h(3)).unwrap());
    }

    #[test]
    fn rr_examples_by_hand() {
        // q=4, g=2, h=1: A=15, B=65, gap 50, 2500 > 1024
        assert!(!rr_weil_feasible(4, 2, &h(1)).unwrap());
        // q=2, g=4, h=1: A=105, B=129, gap 24, 576 <= 8192
        assert!(rr_weil_feasible(2, 4, &h(1)).unwrap());
        // q=2, g=5, h=1: A=279, B=513, gap 234, 54756 > 51200
        assert!(!rr_weil_feasible(2, 5, &h(1)).unwrap());
        // q=2, g=3, h=1: A=35, B=65, gap 30, 900 <= 1152
        assert!(rr_weil_feasible(2, 3, &h(1)).unwrap());
        // q=4, g=1, h=1 sits exactly on the boundary: gap 4, 16 <= 16
        assert!(rr_weil_feasible(4, 1, &h(1)).unwrap());
        // h=3, q=2, g=1: A = 3, B = 3
        assert!(rr_weil_feasible(2, 1, &h(3)).unwrap());
    }

    #[test]
    fn class_number_one_feasible_set() {
        let report = genus_bounds_for_h(1, 64, 64, false).unwrap();
        assert_eq!(
            report.feasible,
            vec![(2, 1), (2, 2), (2, 3), (2, 4), (3, 1), (3, 2), (4, 1)]
        );
        assert_eq!(report.g_max.get(&2), Some(&4));
        assert_eq!(report.g_max.get(&3), Some(&2));
        assert_eq!(report.g_max.get(&4), Some(&1));
        assert!(report.genus_zero_feasible);
        // every q >= 5 ruled out at every genus
        for ((q, g), v) in report
            .ruled_out_reasons
            .iter()
            .map(|(k, v)| {
                let mut it = k.split(',');
                (
                    (
                        it.next().unwrap().parse::<u64>().unwrap(),
                        it.next().unwrap().parse::<u32>().unwrap(),
                    ),
                    v,
                )
            })
        {
            if q >= 5 {
                assert_eq!(*v, Verdict::RuledOutWeil, "q={q}, g={g}");
            }
        }
        assert!(!report.feasible.iter().any(|&(q, _)| q >= 5));
    }

    #[test]
    fn literal_exponent_differs_for_h_one() {
        let report = genus_bounds_for_h(1, 8, 8, true).unwrap();
        let lit = report.literal_exponent_comparison.unwrap();
        assert!(!lit.matches_adopted_reading);
        // under the literal reading q=2 loses genus 3 and 4
        assert!(!lit.feasible.contains(&(2, 4)));
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(genus_bounds_for_h(0, 64, 64, false).is_err());
        assert!(genus_bounds_for_h(1, 64, 0, false).is_err());
        assert!(genus_bounds_for_h(1, 1, 4, false).is_err());
        assert!(weil_lower_bound_exceeds(1, 1, &h(1)).is_err());
        assert!(rr_weil_feasible(2, 0, &h(1)).is_err());
    }

    #[test]
    fn prime_powers() {
        let pps: Vec<u64> = (2..=32).filter(|&q| is_prime_power(q)).collect();
        assert_eq!(pps, vec![2, 3, 4, 5, 7, 8, 9, 11, 13, 16, 17, 19, 23, 25, 27, 29, 31, 32]);
    }

    #[test]
    fn exact_verdicts_agree_with_float_when_margin_is_clear() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..500 {
            let q = rng.gen_range(2u64..100);
            let g = rng.gen_range(1u32..12);
            let hv = rng.gen_range(1u64..1000);
            // float evaluation of h(2g-1)(q^g-1)/(q-1) - (q^(2g-1)+1-2g q^((2g-1)/2))
            let qf = q as f64;
            let upper = hv as f64 * (2.0 * g as f64 - 1.0) * (qf.powi(g as i32) - 1.0)
                / (qf - 1.0);
            let lower = qf.powi(2 * g as i32 - 1) + 1.0
                - 2.0 * g as f64 * qf.powf((2.0 * g as f64 - 1.0) / 2.0);
            let margin = (upper - lower).abs() / upper.abs().max(lower.abs()).max(1.0);
            if margin > 1e-6 && upper.is_finite() && lower.is_finite() {
                let expected = upper >= lower;
                assert_eq!(
                    rr_weil_feasible(q, g, &h(hv)).unwrap(),
                    expected,
                    "q={q} g={g} h={hv}"
                );
            }
            // same cross-check for the Weil floor
            let floor = (qf.sqrt() - 1.0).powi(2 * g as i32);
            let margin = (floor - hv as f64).abs() / floor.max(hv as f64).max(1.0);
            if margin > 1e-6 && floor.is_finite() {
                assert_eq!(
                    weil_lower_bound_exceeds(q, g, &h(hv)).unwrap(),
                    floor > hv as f64,
                    "weil q={q} g={g} h={hv}"
                );
            }
        }
    }
}
