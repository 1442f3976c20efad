//! Exact arithmetic in the binary fields `GF(2^k)`, `1 <= k <= 12`.
//!
//! Each field is constructed once from a fixed irreducible modulus and cached
//! for the lifetime of the process, so the same `k` always yields identical
//! arithmetic. Multiplication is driven by log/antilog tables indexed by a
//! primitive element; the antilog table is long enough that three logs can be
//! added without reducing modulo the group order, which keeps cubic-monomial
//! evaluation to a single lookup during the census sweeps.

use std::fmt;
use std::sync::OnceLock;

use thiserror::Error;

/// Largest supported extension degree.
pub const MAX_DEGREE: u8 = 12;

/// Fixed irreducible moduli, indexed by `k - 1`. Bit `i` is the coefficient
/// of `x^i`.
const MODULI: [u32; MAX_DEGREE as usize] = [
    0b10,            // k=1:  x
    0b111,           // k=2:  x^2+x+1
    0b1011,          // k=3:  x^3+x+1
    0b10011,         // k=4:  x^4+x+1
    0b100101,        // k=5:  x^5+x^2+1
    0b1000011,       // k=6:  x^6+x+1
    0b10000011,      // k=7:  x^7+x+1
    0b100011011,     // k=8:  x^8+x^4+x^3+x+1
    0b1000000011,    // k=9:  x^9+x+1
    0b10000001001,   // k=10: x^10+x^3+1
    0b100000000101,  // k=11: x^11+x^2+1
    0b1000000001001, // k=12: x^12+x^3+1
];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GfError {
    #[error("field degree {0} out of range 1..=12")]
    DegreeOutOfRange(u8),
    #[error("bit pattern 0x{bits:x} is not an element of GF(2^{k})")]
    BitsOutOfRange { bits: u16, k: u8 },
    #[error("operands live in different fields: GF(2^{0}) vs GF(2^{1})")]
    FieldMismatch(u8, u8),
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("GF(2^{sub}) does not embed in GF(2^{sup}): {sub} does not divide {sup}")]
    NotSubfield { sub: u8, sup: u8 },
}

/// Arithmetic context for one field `GF(2^k)`.
///
/// Immutable after construction; obtained via [`make_field`] and shared
/// freely across threads.
pub struct FieldCtx {
    k: u8,
    modulus: u32,
    order: u32, // 2^k - 1
    generator: u16,
    /// `log[a]` for `a != 0`; `log[0]` is unused.
    log: Vec<u16>,
    /// `exp[i] = generator^i`, extended to cover sums of three logs.
    exp: Vec<u16>,
}

static FIELDS: [OnceLock<FieldCtx>; MAX_DEGREE as usize] =
    [const { OnceLock::new() }; MAX_DEGREE as usize];

/// Returns the cached context for `GF(2^k)`.
pub fn make_field(k: u8) -> Result<&'static FieldCtx, GfError> {
    if k == 0 || k > MAX_DEGREE {
        return Err(GfError::DegreeOutOfRange(k));
    }
    Ok(FIELDS[k as usize - 1].get_or_init(|| FieldCtx::build(k)))
}

/// Shift-and-reduce product, used only while bootstrapping the tables.
fn mul_slow(mut a: u32, b: u32, k: u8, modulus: u32) -> u32 {
    let mut acc = 0;
    for i in 0..k {
        if b >> i & 1 == 1 {
            acc ^= a;
        }
        a <<= 1;
        if a >> k & 1 == 1 {
            a ^= modulus;
        }
    }
    acc
}

fn prime_factors(mut n: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            out.push(p);
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

impl FieldCtx {
    fn build(k: u8) -> FieldCtx {
        let modulus = MODULI[k as usize - 1];
        let order = (1u32 << k) - 1;
        let generator = Self::find_generator(k, modulus, order);

        let mut log = vec![0u16; 1 << k];
        let mut exp = vec![0u16; 3 * order as usize + 1];
        let mut v = 1u32;
        for (i, e) in exp.iter_mut().enumerate() {
            *e = v as u16;
            if (i as u32) < order {
                log[v as usize] = i as u16;
            }
            v = mul_slow(v, generator as u32, k, modulus);
        }
        FieldCtx { k, modulus, order, generator, log, exp }
    }

    /// Smallest element generating the full multiplicative group. The modulus
    /// table is irreducible but not uniformly primitive (k = 8 is the classic
    /// case where x has order 51), so the generator is found by search.
    fn find_generator(k: u8, modulus: u32, order: u32) -> u16 {
        if order == 1 {
            return 1;
        }
        let factors = prime_factors(order);
        'cand: for g in 2..=order {
            for &p in &factors {
                if pow_slow(g, order / p, k, modulus) == 1 {
                    continue 'cand;
                }
            }
            return g as u16;
        }
        unreachable!("multiplicative group of a finite field is cyclic");
    }

    pub fn degree(&self) -> u8 {
        self.k
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    /// Number of elements, `2^k`.
    pub fn size(&self) -> u32 {
        self.order + 1
    }

    pub fn generator(&self) -> GfElem {
        GfElem { k: self.k, bits: self.generator }
    }

    pub fn zero(&self) -> GfElem {
        GfElem { k: self.k, bits: 0 }
    }

    pub fn one(&self) -> GfElem {
        GfElem { k: self.k, bits: 1 }
    }

    /// Wraps a bit pattern as an element of this field.
    pub fn elem(&self, bits: u16) -> Result<GfElem, GfError> {
        if u32::from(bits) > self.order {
            return Err(GfError::BitsOutOfRange { bits, k: self.k });
        }
        Ok(GfElem { k: self.k, bits })
    }

    /// All elements in bit order: `0, 1, ..., 2^k - 1`.
    pub fn elements(&self) -> impl Iterator<Item = GfElem> + '_ {
        (0..=self.order).map(|b| GfElem { k: self.k, bits: b as u16 })
    }

    // Raw table-driven operations on bit patterns. These skip the context
    // check and are the hot path for point counting.

    #[inline]
    pub(crate) fn mul_raw(&self, a: u16, b: u16) -> u16 {
        if a == 0 || b == 0 {
            return 0;
        }
        self.exp[self.log[a as usize] as usize + self.log[b as usize] as usize]
    }

    pub(crate) fn inv_raw(&self, a: u16) -> u16 {
        debug_assert!(a != 0);
        let l = self.log[a as usize] as u32;
        self.exp[((self.order - l) % self.order) as usize]
    }

    pub(crate) fn pow_raw(&self, a: u16, n: u64) -> u16 {
        if a == 0 {
            return if n == 0 { 1 } else { 0 };
        }
        let e = (u64::from(self.log[a as usize]) * (n % u64::from(self.order)))
            % u64::from(self.order);
        self.exp[e as usize]
    }
}

impl fmt::Display for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF(2^{})/0x{:x}", self.k, self.modulus)
    }
}

impl fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FieldCtx({self})")
    }
}

fn pow_slow(a: u32, mut n: u32, k: u8, modulus: u32) -> u32 {
    let mut base = a;
    let mut acc = 1;
    while n > 0 {
        if n & 1 == 1 {
            acc = mul_slow(acc, base, k, modulus);
        }
        base = mul_slow(base, base, k, modulus);
        n >>= 1;
    }
    acc
}

/// An element of `GF(2^k)` in the polynomial basis.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct GfElem {
    k: u8,
    bits: u16,
}

impl GfElem {
    pub fn field(&self) -> &'static FieldCtx {
        make_field(self.k).expect("GfElem carries a valid degree")
    }

    pub fn degree(&self) -> u8 {
        self.k
    }

    pub fn bits(&self) -> u16 {
        self.bits
    }

    pub fn is_zero(&self) -> bool {
        self.bits == 0
    }

    fn same_field(&self, rhs: &GfElem) -> Result<&'static FieldCtx, GfError> {
        if self.k != rhs.k {
            return Err(GfError::FieldMismatch(self.k, rhs.k));
        }
        Ok(self.field())
    }

    /// Field addition: XOR of representations. A plain method rather than
    /// `ops::Add` because mixed-field operands must surface an error, not
    /// panic.
    #[allow(clippy::should_implement_trait)]
    pub fn add(self, rhs: GfElem) -> Result<GfElem, GfError> {
        self.same_field(&rhs)?;
        Ok(GfElem { k: self.k, bits: self.bits ^ rhs.bits })
    }

    #[allow(clippy::should_implement_trait)]
    pub fn mul(self, rhs: GfElem) -> Result<GfElem, GfError> {
        let ctx = self.same_field(&rhs)?;
        Ok(GfElem { k: self.k, bits: ctx.mul_raw(self.bits, rhs.bits) })
    }

    pub fn inv(self) -> Result<GfElem, GfError> {
        if self.bits == 0 {
            return Err(GfError::ZeroInverse);
        }
        Ok(GfElem { k: self.k, bits: self.field().inv_raw(self.bits) })
    }

    pub fn pow(self, n: u64) -> GfElem {
        GfElem { k: self.k, bits: self.field().pow_raw(self.bits, n) }
    }

    pub fn square(self) -> GfElem {
        GfElem { k: self.k, bits: self.field().mul_raw(self.bits, self.bits) }
    }

    /// Image of `self` under the fixed embedding `GF(2^e) -> GF(2^d)`,
    /// `e | d`. The embedding sends the class of `x` to the root of the
    /// degree-`e` modulus in the target field with the smallest bit value, so
    /// it is a deterministic ring homomorphism.
    pub fn embed(self, target: &FieldCtx) -> Result<GfElem, GfError> {
        let (e, d) = (self.k, target.k);
        if d % e != 0 {
            return Err(GfError::NotSubfield { sub: e, sup: d });
        }
        if e == d {
            return Ok(self);
        }
        let root = embedding_root(e, d);
        let mut acc = 0u16;
        let mut power = 1u16; // root^i
        for i in 0..e {
            if self.bits >> i & 1 == 1 {
                acc ^= power;
            }
            power = target.mul_raw(power, root);
        }
        Ok(GfElem { k: d, bits: acc })
    }
}

/// Smallest root of the degree-`e` modulus inside `GF(2^d)`, cached per pair.
fn embedding_root(e: u8, d: u8) -> u16 {
    static ROOTS: [[OnceLock<u16>; MAX_DEGREE as usize]; MAX_DEGREE as usize] =
        [const { [const { OnceLock::new() }; MAX_DEGREE as usize] }; MAX_DEGREE as usize];
    *ROOTS[e as usize - 1][d as usize - 1].get_or_init(|| {
        let target = make_field(d).expect("degree validated by caller");
        let small_modulus = MODULI[e as usize - 1];
        for cand in 0..target.size() as u16 {
            let mut acc = 0u16;
            for i in 0..=e {
                if small_modulus >> i & 1 == 1 {
                    acc ^= target.pow_raw(cand, u64::from(i));
                }
            }
            if acc == 0 {
                return cand;
            }
        }
        unreachable!("the degree-e modulus splits in GF(2^d) when e | d")
    })
}

impl fmt::Display for GfElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0x{:x}", self.bits)
    }
}

impl fmt::Debug for GfElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0x{:x}@GF(2^{})", self.bits, self.k)
    }
}
