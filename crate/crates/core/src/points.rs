//! Projective points of `P^3(GF(2^k))` and rational-point counting.
//!
//! Enumeration follows a fixed chart decomposition: first the points with
//! `x1 = 1` (`2^{3k}` of them), then `x1 = 0, x2 = 1`, then
//! `x1 = x2 = 0, x3 = 1`, then `(0,0,0,1)`. Counting sweeps are exhaustive;
//! they may be partitioned across rayon workers, and the combined result is
//! bit-identical for every partition since partial counts combine by
//! addition and collected zeros are concatenated in chart order.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forms::{Form, FormError};
use crate::gfield::{make_field, FieldCtx, GfElem, GfError, MAX_DEGREE};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PointsError {
    #[error("field degree {0} out of range 1..=12")]
    DegreeOutOfRange(u8),
    #[error("corrupt counts: place count B_{d} = {numerator}/{d} is not a nonnegative integer")]
    CountsCorrupt { d: usize, numerator: i128 },
    #[error("closed-point counts need N_1..N_{needed}, got {got}")]
    MissingCounts { needed: usize, got: usize },
    #[error("point does not lie on the given variety")]
    PointNotOnVariety,
    #[error(transparent)]
    Field(#[from] GfError),
    #[error(transparent)]
    Form(#[from] FormError),
}

/// A point of `P^3` in normalized homogeneous coordinates: the first nonzero
/// coordinate is 1, so each projective class has a unique representative.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct ProjPoint {
    coords: [GfElem; 4],
}

impl ProjPoint {
    /// Normalizes an arbitrary nonzero coordinate vector.
    pub fn new(coords: [GfElem; 4]) -> Result<ProjPoint, PointsError> {
        let k = coords[0].degree();
        for c in &coords {
            if c.degree() != k {
                return Err(GfError::FieldMismatch(k, c.degree()).into());
            }
        }
        let lead = coords
            .iter()
            .position(|c| !c.is_zero())
            .ok_or(PointsError::PointNotOnVariety)?;
        let scale = coords[lead].inv().expect("leading coordinate is nonzero");
        let mut out = coords;
        for c in &mut out {
            *c = c.mul(scale).expect("same field");
        }
        Ok(ProjPoint { coords: out })
    }

    pub fn coords(&self) -> &[GfElem; 4] {
        &self.coords
    }

    pub fn field_degree(&self) -> u8 {
        self.coords[0].degree()
    }

    fn from_raw(ctx: &FieldCtx, raw: [u16; 4]) -> ProjPoint {
        ProjPoint {
            coords: [
                ctx.elem(raw[0]).unwrap(),
                ctx.elem(raw[1]).unwrap(),
                ctx.elem(raw[2]).unwrap(),
                ctx.elem(raw[3]).unwrap(),
            ],
        }
    }
}

/// `|P^3(GF(2^k))| = 2^{3k} + 2^{2k} + 2^k + 1`.
pub fn proj_space_size(k: u8) -> u64 {
    let q = 1u64 << k;
    q * q * q + q * q + q + 1
}

/// The point at a given position of the enumeration order.
fn raw_point_at(k: u8, idx: u64) -> [u16; 4] {
    let q = 1u64 << k;
    let m = q - 1;
    if idx < q * q * q {
        [1, (idx >> (2 * k)) as u16, ((idx >> k) & m) as u16, (idx & m) as u16]
    } else if idx < q * q * q + q * q {
        let r = idx - q * q * q;
        [0, 1, ((r >> k) & m) as u16, (r & m) as u16]
    } else if idx < q * q * q + q * q + q {
        let r = idx - q * q * q - q * q;
        [0, 0, 1, (r & m) as u16]
    } else {
        [0, 0, 0, 1]
    }
}

/// Streams every point of `P^3(GF(2^k))` exactly once, in chart order.
pub fn enumerate_proj_points(
    k: u8,
) -> Result<impl Iterator<Item = ProjPoint>, PointsError> {
    if k == 0 || k > MAX_DEGREE {
        return Err(PointsError::DegreeOutOfRange(k));
    }
    let ctx = make_field(k)?;
    Ok((0..proj_space_size(k)).map(move |idx| ProjPoint::from_raw(ctx, raw_point_at(k, idx))))
}

fn check_degree(k: u8) -> Result<&'static FieldCtx, PointsError> {
    if k == 0 || k > MAX_DEGREE {
        return Err(PointsError::DegreeOutOfRange(k));
    }
    Ok(make_field(k)?)
}

#[inline]
fn system_vanishes(system: &[Form], ctx: &FieldCtx, raw: &[u16; 4]) -> bool {
    system.iter().all(|f| f.evaluate_raw(ctx, raw) == 0)
}

/// Number of points of `P^3(GF(2^k))` at which every form of the system
/// vanishes. The empty system counts all of `P^3`. The sweep is partitioned
/// across the current rayon pool; the count is independent of the partition.
pub fn count_points(system: &[Form], k: u8) -> Result<u64, PointsError> {
    let ctx = check_degree(k)?;
    let total = proj_space_size(k);
    let chunk = 1u64 << 16;
    let n_chunks = total.div_ceil(chunk);
    let count = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * chunk;
            let hi = total.min(lo + chunk);
            let mut n = 0u64;
            for idx in lo..hi {
                if system_vanishes(system, ctx, &raw_point_at(k, idx)) {
                    n += 1;
                }
            }
            n
        })
        .sum();
    Ok(count)
}

/// All zeros of the system, in enumeration order regardless of partitioning.
pub fn collect_zeros(system: &[Form], k: u8) -> Result<Vec<ProjPoint>, PointsError> {
    let ctx = check_degree(k)?;
    let total = proj_space_size(k);
    let chunk = 1u64 << 16;
    let n_chunks = total.div_ceil(chunk);
    let nested: Vec<Vec<ProjPoint>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * chunk;
            let hi = total.min(lo + chunk);
            let mut zs = Vec::new();
            for idx in lo..hi {
                let raw = raw_point_at(k, idx);
                if system_vanishes(system, ctx, &raw) {
                    zs.push(ProjPoint::from_raw(ctx, raw));
                }
            }
            zs
        })
        .collect();
    Ok(nested.into_iter().flatten().collect())
}

/// Rational-point counts `N_1..N_m` of a system over the tower
/// `F_2 c F_4 c ...`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointCounts {
    /// Base field size (2 throughout this crate).
    pub q: u64,
    /// `counts[i]` is `N_{i+1}`.
    pub counts: Vec<u64>,
}

impl PointCounts {
    pub fn new(q: u64, counts: Vec<u64>) -> PointCounts {
        PointCounts { q, counts }
    }

    pub fn get(&self, k: usize) -> Option<u64> {
        self.counts.get(k - 1).copied()
    }

    pub fn depth(&self) -> usize {
        self.counts.len()
    }
}

/// Applies [`count_points`] for `k = 1..=k_max`.
pub fn count_sequence(system: &[Form], k_max: u8) -> Result<PointCounts, PointsError> {
    let mut counts = Vec::with_capacity(k_max as usize);
    for k in 1..=k_max {
        counts.push(count_points(system, k)?);
    }
    Ok(PointCounts::new(2, counts))
}

/// Counts of closed points (places) by degree: `N_k = sum_{d|k} d * B_d`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClosedPointCounts {
    /// `places[i]` is `B_{i+1}`.
    pub places: Vec<u64>,
}

impl ClosedPointCounts {
    pub fn get(&self, d: usize) -> Option<u64> {
        self.places.get(d - 1).copied()
    }
}

fn moebius(mut n: u64) -> i64 {
    let mut mu = 1i64;
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            n /= p;
            if n.is_multiple_of(p) {
                return 0;
            }
            mu = -mu;
        }
        p += 1;
    }
    if n > 1 {
        mu = -mu;
    }
    mu
}

/// Moebius inversion `B_d = (1/d) sum_{e|d} mu(d/e) N_e`. A non-integral or
/// negative value means the input counts cannot come from a variety over
/// `F_2` and is reported as corruption.
pub fn closed_point_counts(pc: &PointCounts) -> Result<ClosedPointCounts, PointsError> {
    let mut places = Vec::with_capacity(pc.counts.len());
    for d in 1..=pc.counts.len() {
        let mut s: i128 = 0;
        for e in 1..=d {
            if d % e == 0 {
                s += i128::from(moebius((d / e) as u64)) * i128::from(pc.counts[e - 1]);
            }
        }
        if s < 0 || s % d as i128 != 0 {
            return Err(PointsError::CountsCorrupt { d, numerator: s });
        }
        places.push((s / d as i128) as u64);
    }
    Ok(ClosedPointCounts { places })
}

/// True iff the zero set has a closed point of degree at most `d`.
/// `N_1..N_d` are always all computed so reports carry the full table.
pub fn has_point_of_degree_at_most(system: &[Form], d: u8) -> Result<bool, PointsError> {
    let pc = count_sequence(system, d)?;
    let closed = closed_point_counts(&pc)?;
    Ok(closed.places.iter().sum::<u64>() > 0)
}

/// Formal partial derivatives of a form in characteristic 2, evaluated at a
/// raw coordinate vector: the term of `d/dx_v` survives iff the exponent of
/// `x_v` is odd.
fn gradient_raw(f: &Form, ctx: &FieldCtx, c: &[u16; 4]) -> [u16; 4] {
    let mut grad = [0u16; 4];
    for e in f.monomials() {
        for v in 0..4 {
            if e[v] % 2 == 1 {
                let mut term = 1u16;
                for (w, &exp) in e.iter().enumerate() {
                    let mut times = exp;
                    if w == v {
                        times -= 1;
                    }
                    for _ in 0..times {
                        term = ctx.mul_raw(term, c[w]);
                    }
                }
                grad[v] ^= term;
            }
        }
    }
    grad
}

fn rank2_raw(ctx: &FieldCtx, r0: &[u16; 4], r1: &[u16; 4]) -> bool {
    for a in 0..4 {
        for b in (a + 1)..4 {
            let det = ctx.mul_raw(r0[a], r1[b]) ^ ctx.mul_raw(r0[b], r1[a]);
            if det != 0 {
                return true;
            }
        }
    }
    false
}

/// True iff the 2x4 Jacobian of `(quadric, cubic)` at `p` has rank 2 over
/// the point's field. Requires `p` on both forms.
pub fn jacobian_rank_ok(
    quadric: &Form,
    cubic: &Form,
    p: &ProjPoint,
) -> Result<bool, PointsError> {
    let k = p.field_degree();
    let ctx = make_field(k)?;
    let raw = [
        p.coords[0].bits(),
        p.coords[1].bits(),
        p.coords[2].bits(),
        p.coords[3].bits(),
    ];
    if quadric.evaluate_raw(ctx, &raw) != 0 || cubic.evaluate_raw(ctx, &raw) != 0 {
        return Err(PointsError::PointNotOnVariety);
    }
    let gq = gradient_raw(quadric, ctx, &raw);
    let gc = gradient_raw(cubic, ctx, &raw);
    Ok(rank2_raw(ctx, &gq, &gc))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{builtin_candidates, parse_form, square_linear, GlMatrix, LinearMask};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Independent oracle: enumerate all nonzero coordinate vectors, keep the
    /// normalized representatives, and evaluate by exponent vectors with
    /// plain F_2 arithmetic.
    fn oracle_count_f2(system: &[Form]) -> u64 {
        let mut n = 0;
        for bits in 1u16..16 {
            let v = [bits >> 3 & 1, bits >> 2 & 1, bits >> 1 & 1, bits & 1];
            // normalized representative: leading nonzero coordinate is 1, and
            // over F_2 every nonzero vector is already normalized; count all
            // and divide by |F_2^*| = 1.
            let vanishes = system.iter().all(|f| {
                let mut acc = 0u16;
                for e in f.monomials() {
                    let mut t = 1u16;
                    for (w, &exp) in e.iter().enumerate() {
                        for _ in 0..exp {
                            t &= v[w];
                        }
                    }
                    acc ^= t;
                }
                acc == 0
            });
            if vanishes {
                n += 1;
            }
        }
        n
    }

    #[test]
    fn enumeration_sizes() {
        assert_eq!(enumerate_proj_points(1).unwrap().count(), 15);
        assert_eq!(enumerate_proj_points(2).unwrap().count(), 85);
        assert_eq!(enumerate_proj_points(4).unwrap().count(), 4369);
        assert!(matches!(
            enumerate_proj_points(0),
            Err(PointsError::DegreeOutOfRange(0))
        ));
        assert!(matches!(
            enumerate_proj_points(13),
            Err(PointsError::DegreeOutOfRange(13))
        ));
    }

    #[test]
    fn enumeration_is_unique_and_normalized() {
        for k in 1..=2u8 {
            let pts: Vec<ProjPoint> = enumerate_proj_points(k).unwrap().collect();
            let set: std::collections::HashSet<_> = pts.iter().map(|p| p.coords).collect();
            assert_eq!(set.len(), pts.len(), "duplicate points at k={k}");
            for p in &pts {
                let lead = p.coords.iter().find(|c| !c.is_zero()).unwrap();
                assert_eq!(lead.bits(), 1, "unnormalized point at k={k}");
            }
        }
    }

    #[test]
    fn chart_partition_is_exact() {
        for k in 1..=MAX_DEGREE {
            let q = 1u64 << k;
            let charts = q * q * q + q * q + q + 1;
            assert_eq!(charts, proj_space_size(k));
            // (2^{4k} - 1) / (2^k - 1)
            assert_eq!(proj_space_size(k) * (q - 1), (1u64 << (4 * k)) - 1);
        }
    }

    #[test]
    fn hyperplane_and_quadric_counts_over_f2() {
        // the plane x1 = 0 is a P^2(F_2): 7 points; encode x1 as x1^2
        // (same zero set over any perfect field of characteristic 2)
        let x1sq = parse_form("x1^2", 2).unwrap();
        assert_eq!(count_points(&[x1sq], 1).unwrap(), 7);
        assert_eq!(oracle_count_f2(&[x1sq]), 7);

        let hyperbolic = parse_form("x1*x2+x3*x4", 2).unwrap();
        assert_eq!(count_points(&[hyperbolic], 1).unwrap(), 9);
        assert_eq!(oracle_count_f2(&[hyperbolic]), 9);

        let elliptic = parse_form("x1*x2+x3*x4+x3^2+x4^2", 2).unwrap();
        assert_eq!(count_points(&[elliptic], 1).unwrap(), 5);
        assert_eq!(oracle_count_f2(&[elliptic]), 5);

        // empty system counts all of P^3
        assert_eq!(count_points(&[], 1).unwrap(), 15);
    }

    #[test]
    fn exception_curve_has_no_small_points() {
        let (c2, q2) = &builtin_candidates()[1];
        let quad = q2.add(&square_linear(LinearMask::new(1, 0, 1, 1))).unwrap();
        let system = [quad, *c2];
        for k in 1..=3u8 {
            assert_eq!(count_points(&system, k).unwrap(), 0, "N_{k} should vanish");
        }
    }

    #[test]
    fn closed_point_count_examples() {
        // P^3 itself
        let pc = count_sequence(&[], 2).unwrap();
        assert_eq!(pc.counts, vec![15, 85]);
        let b = closed_point_counts(&pc).unwrap();
        assert_eq!(b.places, vec![15, 35]);

        let zero3 = closed_point_counts(&PointCounts::new(2, vec![0, 0, 0])).unwrap();
        assert_eq!(zero3.places, vec![0, 0, 0]);

        let deg4 = closed_point_counts(&PointCounts::new(2, vec![0, 0, 0, 4])).unwrap();
        assert_eq!(deg4.places, vec![0, 0, 0, 1]);
    }

    #[test]
    fn corrupt_counts_are_detected() {
        // N_2 < N_1 makes B_2 negative
        let err = closed_point_counts(&PointCounts::new(2, vec![5, 3])).unwrap_err();
        assert!(matches!(err, PointsError::CountsCorrupt { d: 2, .. }));
        // odd difference makes B_2 non-integral
        let err = closed_point_counts(&PointCounts::new(2, vec![1, 4])).unwrap_err();
        assert!(matches!(err, PointsError::CountsCorrupt { d: 2, .. }));
    }

    #[test]
    fn degree_at_most_examples() {
        assert!(has_point_of_degree_at_most(&[], 1).unwrap());
        let (c2, q2) = &builtin_candidates()[1];
        let quad = q2.add(&square_linear(LinearMask::new(1, 0, 1, 1))).unwrap();
        assert!(!has_point_of_degree_at_most(&[quad, *c2], 3).unwrap());
        let (c1, q1) = &builtin_candidates()[0];
        let quad1 = q1.add(&square_linear(LinearMask::new(0, 0, 1, 1))).unwrap();
        assert!(has_point_of_degree_at_most(&[quad1, *c1], 3).unwrap());
    }

    #[test]
    fn degree_at_most_agrees_with_direct_condition() {
        // for F_2 systems: deg<=3 point exists iff N_2 > 0 or N_3 > 0
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..40 {
            let q = Form::from_bits(2, rng.gen_range(0..1 << 10)).unwrap();
            let c = Form::from_bits(3, rng.gen_range(0..1 << 20)).unwrap();
            let system = [q, c];
            let pc = count_sequence(&system, 3).unwrap();
            let direct = pc.counts[1] > 0 || pc.counts[2] > 0;
            assert_eq!(has_point_of_degree_at_most(&system, 3).unwrap(), direct);
        }
    }

    #[test]
    fn counts_invariant_under_gl_substitution() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let (c1, q1) = &builtin_candidates()[0];
        for _ in 0..20 {
            let m = loop {
                if let Ok(m) = GlMatrix::from_encoded(rng.gen()) {
                    break m;
                }
            };
            let sys = [*q1, *c1];
            let sub: Vec<Form> = sys.iter().map(|f| f.substitute(&m)).collect();
            for k in 1..=2u8 {
                assert_eq!(
                    count_points(&sys, k).unwrap(),
                    count_points(&sub, k).unwrap()
                );
            }
        }
    }

    #[test]
    fn collect_zeros_matches_count_and_order() {
        let elliptic = parse_form("x1*x2+x3*x4+x3^2+x4^2", 2).unwrap();
        for k in 1..=3u8 {
            let zeros = collect_zeros(&[elliptic], k).unwrap();
            assert_eq!(zeros.len() as u64, count_points(&[elliptic], k).unwrap());
            // enumeration order: recompute sequentially
            let seq: Vec<ProjPoint> = enumerate_proj_points(k)
                .unwrap()
                .filter(|p| elliptic.evaluate(p.coords()).unwrap().is_zero())
                .collect();
            assert_eq!(zeros, seq);
        }
    }

    #[test]
    fn jacobian_detects_singular_intersection() {
        let q = parse_form("x1*x2", 2).unwrap();
        let c = parse_form("x2^3", 3).unwrap();
        let f1 = make_field(1).unwrap();
        let p = ProjPoint::new([f1.zero(), f1.zero(), f1.one(), f1.zero()]).unwrap();
        assert!(!jacobian_rank_ok(&q, &c, &p).unwrap());
    }

    #[test]
    fn jacobian_requires_point_on_variety() {
        let q = parse_form("x1*x2", 2).unwrap();
        let c = parse_form("x2^3", 3).unwrap();
        let f1 = make_field(1).unwrap();
        let p = ProjPoint::new([f1.one(), f1.one(), f1.zero(), f1.zero()]).unwrap();
        assert!(matches!(
            jacobian_rank_ok(&q, &c, &p),
            Err(PointsError::PointNotOnVariety)
        ));
    }

    #[test]
    fn jacobian_rank_is_scale_invariant() {
        // gradients of homogeneous forms scale by lambda^(deg-1) under
        // p -> lambda p, so the rank cannot depend on the representative
        let (c2, q2) = &builtin_candidates()[1];
        let quad = q2.add(&square_linear(LinearMask::new(1, 0, 1, 1))).unwrap();
        let ctx = make_field(4).unwrap();
        let zeros = collect_zeros(&[quad, *c2], 4).unwrap();
        assert_eq!(zeros.len(), 4);
        for p in &zeros {
            let normalized = gradient_pair_rank(&quad, c2, ctx, p.coords(), 1);
            for lambda in 2..ctx.size() as u16 {
                assert_eq!(normalized, gradient_pair_rank(&quad, c2, ctx, p.coords(), lambda));
            }
        }
    }

    fn gradient_pair_rank(
        quad: &Form,
        cubic: &Form,
        ctx: &FieldCtx,
        coords: &[GfElem; 4],
        lambda: u16,
    ) -> bool {
        let raw = [
            ctx.mul_raw(coords[0].bits(), lambda),
            ctx.mul_raw(coords[1].bits(), lambda),
            ctx.mul_raw(coords[2].bits(), lambda),
            ctx.mul_raw(coords[3].bits(), lambda),
        ];
        let gq = gradient_raw(quad, ctx, &raw);
        let gc = gradient_raw(cubic, ctx, &raw);
        rank2_raw(ctx, &gq, &gc)
    }

    #[test]
    fn exception_curve_deg4_points_are_smooth() {
        let (c2, q2) = &builtin_candidates()[1];
        let quad = q2.add(&square_linear(LinearMask::new(1, 0, 1, 1))).unwrap();
        let zeros = collect_zeros(&[quad, *c2], 4).unwrap();
        assert_eq!(zeros.len(), 4);
        for p in &zeros {
            assert!(jacobian_rank_ok(&quad, c2, p).unwrap());
        }
    }

    #[test]
    fn smaller_field_counts_embed() {
        let mut rng = ChaCha8Rng::seed_from_u64(1234);
        for _ in 0..10 {
            let q = Form::from_bits(2, rng.gen_range(0..1 << 10)).unwrap();
            let c = Form::from_bits(3, rng.gen_range(0..1 << 20)).unwrap();
            let pc = count_sequence(&[q, c], 4).unwrap();
            for e in 1..=4usize {
                for d in (e..=4).filter(|d| d % e == 0) {
                    assert!(
                        pc.counts[e - 1] <= pc.counts[d - 1],
                        "N_{e} > N_{d} for {q:?}, {c:?}"
                    );
                }
            }
        }
    }
}
