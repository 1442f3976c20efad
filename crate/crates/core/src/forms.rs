//! Homogeneous quadrics and cubics in `x1..x4` with `F_2` coefficients.
//!
//! A form is a bit vector over a fixed monomial order: 10 bits for degree 2,
//! 20 for degree 3. Coefficients stay in `F_2` while evaluation extends
//! scalars to any `GF(2^k)`, so the whole candidate table packs into a few
//! words and evaluation is pure table lookups.
//!
//! Monomial order (index = bit position):
//! degree 2: `x1^2, x1x2, x1x3, x1x4, x2^2, x2x3, x2x4, x3^2, x3x4, x4^2`;
//! degree 3: `x1^3, x1^2x2, x1^2x3, x1^2x4, x1x2^2, x1x2x3, x1x2x4, x1x3^2,
//! x1x3x4, x1x4^2, x2^3, x2^2x3, x2^2x4, x2x3^2, x2x3x4, x2x4^2, x3^3,
//! x3^2x4, x3x4^2, x4^3`.

use std::fmt;
use std::sync::OnceLock;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::gfield::{make_field, FieldCtx, GfElem, GfError};

/// Degree-2 monomials as variable index pairs `(i, j)`, `i <= j`, zero-based.
pub(crate) const DEG2_MONOMIALS: [(u8, u8); 10] = [
    (0, 0), (0, 1), (0, 2), (0, 3), (1, 1), (1, 2), (1, 3), (2, 2), (2, 3), (3, 3),
];

/// Degree-3 monomials as sorted variable index triples.
pub(crate) const DEG3_MONOMIALS: [(u8, u8, u8); 20] = [
    (0, 0, 0), (0, 0, 1), (0, 0, 2), (0, 0, 3), (0, 1, 1), (0, 1, 2), (0, 1, 3),
    (0, 2, 2), (0, 2, 3), (0, 3, 3), (1, 1, 1), (1, 1, 2), (1, 1, 3), (1, 2, 2),
    (1, 2, 3), (1, 3, 3), (2, 2, 2), (2, 2, 3), (2, 3, 3), (3, 3, 3),
];

fn pair_index(a: u8, b: u8) -> u32 {
    let (i, j) = if a <= b { (a, b) } else { (b, a) };
    DEG2_MONOMIALS.iter().position(|&m| m == (i, j)).unwrap() as u32
}

fn triple_index(a: u8, b: u8, c: u8) -> u32 {
    let mut v = [a, b, c];
    v.sort_unstable();
    DEG3_MONOMIALS
        .iter()
        .position(|&m| m == (v[0], v[1], v[2]))
        .unwrap() as u32
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormError {
    #[error("syntax error in form at byte {at}: {what}")]
    Syntax { at: usize, what: String },
    #[error("unknown variable `{0}` (expected x1..x4)")]
    UnknownVariable(String),
    #[error("monomial `{mono}` has degree {found}, expected {expected}")]
    NonHomogeneous { mono: String, found: u32, expected: u32 },
    #[error("unsupported form degree {0} (only 2 and 3)")]
    UnsupportedDegree(u32),
    #[error("degree mismatch: {0} vs {1}")]
    DegreeMismatch(u32, u32),
    #[error(transparent)]
    Field(#[from] GfError),
}

/// Homogeneous form of degree 2 or 3 over `F_2`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Form {
    degree: u32,
    coeffs: u32,
}

impl Form {
    pub fn zero(degree: u32) -> Result<Form, FormError> {
        if degree != 2 && degree != 3 {
            return Err(FormError::UnsupportedDegree(degree));
        }
        Ok(Form { degree, coeffs: 0 })
    }

    /// Builds a form from its coefficient bit vector in the fixed monomial
    /// order (10 bits for degree 2, 20 bits for degree 3).
    pub fn from_bits(degree: u32, coeffs: u32) -> Result<Form, FormError> {
        let width = match degree {
            2 => 10,
            3 => 20,
            d => return Err(FormError::UnsupportedDegree(d)),
        };
        if coeffs >> width != 0 {
            return Err(FormError::Syntax {
                at: 0,
                what: format!("coefficient mask 0x{coeffs:x} wider than {width} bits"),
            });
        }
        Ok(Form { degree, coeffs })
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn coeff_bits(&self) -> u32 {
        self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs == 0
    }

    pub fn monomial_count(&self) -> u32 {
        self.coeffs.count_ones()
    }

    /// Coefficient-wise sum (XOR) of two forms of equal degree.
    pub fn add(&self, rhs: &Form) -> Result<Form, FormError> {
        if self.degree != rhs.degree {
            return Err(FormError::DegreeMismatch(self.degree, rhs.degree));
        }
        Ok(Form { degree: self.degree, coeffs: self.coeffs ^ rhs.coeffs })
    }

    /// Exponent vectors of the monomials with nonzero coefficient.
    pub fn monomials(&self) -> Vec<[u8; 4]> {
        let mut out = Vec::with_capacity(self.coeffs.count_ones() as usize);
        for idx in 0..monomial_table_len(self.degree) {
            if self.coeffs >> idx & 1 == 1 {
                out.push(exponents(self.degree, idx));
            }
        }
        out
    }

    /// Value of the form at a point of `GF(2^k)^4`.
    pub fn evaluate(&self, p: &[GfElem; 4]) -> Result<GfElem, FormError> {
        let k = p[0].degree();
        if p.iter().any(|c| c.degree() != k) {
            let other = p.iter().find(|c| c.degree() != k).unwrap();
            return Err(GfError::FieldMismatch(k, other.degree()).into());
        }
        let ctx = make_field(k)?;
        let coords = [p[0].bits(), p[1].bits(), p[2].bits(), p[3].bits()];
        let bits = self.evaluate_raw(ctx, &coords);
        Ok(ctx.elem(bits)?)
    }

    /// Raw-coordinate evaluation used by the counting loops.
    pub(crate) fn evaluate_raw(&self, ctx: &FieldCtx, c: &[u16; 4]) -> u16 {
        let mut acc = 0u16;
        if self.degree == 2 {
            for (idx, &(i, j)) in DEG2_MONOMIALS.iter().enumerate() {
                if self.coeffs >> idx & 1 == 1 {
                    acc ^= ctx.mul_raw(c[i as usize], c[j as usize]);
                }
            }
        } else {
            for (idx, &(i, j, l)) in DEG3_MONOMIALS.iter().enumerate() {
                if self.coeffs >> idx & 1 == 1 {
                    let ij = ctx.mul_raw(c[i as usize], c[j as usize]);
                    acc ^= ctx.mul_raw(ij, c[l as usize]);
                }
            }
        }
        acc
    }

    /// The composed form `f(Mx)`: `x_i` is replaced by the linear form in
    /// row `i` of `M`, fully expanded with mod-2 cancellation. Degree is
    /// preserved; `substitute(I) = f` and
    /// `substitute(M).substitute(N) = substitute(M * N)`.
    pub fn substitute(&self, m: &GlMatrix) -> Form {
        let mut out = 0u32;
        if self.degree == 2 {
            for (idx, &(i, j)) in DEG2_MONOMIALS.iter().enumerate() {
                if self.coeffs >> idx & 1 == 0 {
                    continue;
                }
                let (ri, rj) = (m.rows[i as usize], m.rows[j as usize]);
                for a in 0..4u8 {
                    if ri >> (3 - a) & 1 == 0 {
                        continue;
                    }
                    for b in 0..4u8 {
                        if rj >> (3 - b) & 1 == 1 {
                            out ^= 1 << pair_index(a, b);
                        }
                    }
                }
            }
        } else {
            for (idx, &(i, j, l)) in DEG3_MONOMIALS.iter().enumerate() {
                if self.coeffs >> idx & 1 == 0 {
                    continue;
                }
                let (ri, rj, rl) =
                    (m.rows[i as usize], m.rows[j as usize], m.rows[l as usize]);
                for a in 0..4u8 {
                    if ri >> (3 - a) & 1 == 0 {
                        continue;
                    }
                    for b in 0..4u8 {
                        if rj >> (3 - b) & 1 == 0 {
                            continue;
                        }
                        for c in 0..4u8 {
                            if rl >> (3 - c) & 1 == 1 {
                                out ^= 1 << triple_index(a, b, c);
                            }
                        }
                    }
                }
            }
        }
        Form { degree: self.degree, coeffs: out }
    }
}

fn monomial_table_len(degree: u32) -> u32 {
    if degree == 2 {
        10
    } else {
        20
    }
}

fn exponents(degree: u32, idx: u32) -> [u8; 4] {
    let mut e = [0u8; 4];
    if degree == 2 {
        let (i, j) = DEG2_MONOMIALS[idx as usize];
        e[i as usize] += 1;
        e[j as usize] += 1;
    } else {
        let (i, j, l) = DEG3_MONOMIALS[idx as usize];
        e[i as usize] += 1;
        e[j as usize] += 1;
        e[l as usize] += 1;
    }
    e
}

/// Parses the normative grammar:
/// `form := mono ('+' mono)* ; mono := factor ('*' factor)* ;
/// factor := var | var '^' digit ; var := 'x1'..'x4'`, whitespace ignored.
/// The single token `0` denotes the zero form (it is also how the zero form
/// renders, keeping parse/render a round trip). Duplicate monomials cancel
/// mod 2.
pub fn parse_form(text: &str, expected_degree: u32) -> Result<Form, FormError> {
    if expected_degree != 2 && expected_degree != 3 {
        return Err(FormError::UnsupportedDegree(expected_degree));
    }
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if compact == "0" {
        return Form::zero(expected_degree);
    }
    if compact.is_empty() {
        return Err(FormError::Syntax { at: 0, what: "empty form".into() });
    }
    let mut coeffs = 0u32;
    let mut offset = 0usize;
    for mono in compact.split('+') {
        if mono.is_empty() {
            return Err(FormError::Syntax { at: offset, what: "empty monomial".into() });
        }
        let mut exps = [0u32; 4];
        for factor in mono.split('*') {
            if factor.is_empty() {
                return Err(FormError::Syntax { at: offset, what: "empty factor".into() });
            }
            let bytes = factor.as_bytes();
            if bytes[0] != b'x' || bytes.len() < 2 {
                return Err(FormError::Syntax {
                    at: offset,
                    what: format!("expected a variable, found `{factor}`"),
                });
            }
            let var = match bytes[1] {
                b'1'..=b'4' => (bytes[1] - b'1') as usize,
                _ => return Err(FormError::UnknownVariable(factor[..2].to_string())),
            };
            let exp = match bytes.len() {
                2 => 1,
                4 if bytes[2] == b'^' && bytes[3].is_ascii_digit() => {
                    u32::from(bytes[3] - b'0')
                }
                _ => {
                    return Err(FormError::Syntax {
                        at: offset,
                        what: format!("malformed factor `{factor}`"),
                    })
                }
            };
            exps[var] += exp;
        }
        let total: u32 = exps.iter().sum();
        if total != expected_degree {
            return Err(FormError::NonHomogeneous {
                mono: mono.to_string(),
                found: total,
                expected: expected_degree,
            });
        }
        coeffs ^= 1 << monomial_index(&exps, expected_degree);
        offset += mono.len() + 1;
    }
    Ok(Form { degree: expected_degree, coeffs })
}

fn monomial_index(exps: &[u32; 4], degree: u32) -> u32 {
    let mut vars = Vec::with_capacity(3);
    for (v, &e) in exps.iter().enumerate() {
        for _ in 0..e {
            vars.push(v as u8);
        }
    }
    if degree == 2 {
        pair_index(vars[0], vars[1])
    } else {
        triple_index(vars[0], vars[1], vars[2])
    }
}

impl fmt::Display for Form {
    /// Canonical rendering: monomials in the normative order, `^` for
    /// exponents of 2 or more, `0` for the zero form.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs == 0 {
            return write!(f, "0");
        }
        let mut first = true;
        for idx in 0..monomial_table_len(self.degree) {
            if self.coeffs >> idx & 1 == 0 {
                continue;
            }
            if !first {
                write!(f, "+")?;
            }
            first = false;
            let e = exponents(self.degree, idx);
            let mut lead = true;
            for (v, &exp) in e.iter().enumerate() {
                if exp == 0 {
                    continue;
                }
                if !lead {
                    write!(f, "*")?;
                }
                lead = false;
                if exp == 1 {
                    write!(f, "x{}", v + 1)?;
                } else {
                    write!(f, "x{}^{}", v + 1, exp)?;
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Form[deg {}: {}]", self.degree, self)
    }
}

impl Serialize for Form {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Forms deserialize from the grammar; the degree is inferred from the first
/// monomial and then enforced across the rest.
impl<'de> Deserialize<'de> for Form {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Form, D::Error> {
        let text = String::deserialize(d)?;
        parse_form_infer(&text).map_err(D::Error::custom)
    }
}

/// Parses a form, inferring the degree (2 or 3) from the first monomial.
pub fn parse_form_infer(text: &str) -> Result<Form, FormError> {
    match parse_form(text, 2) {
        Ok(f) => Ok(f),
        Err(FormError::NonHomogeneous { found: 3, .. }) => parse_form(text, 3),
        Err(e) => Err(e),
    }
}

/// A linear form `k1*x1 + k2*x2 + k3*x3 + k4*x4` with `k_i` in `F_2`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct LinearMask(pub [u8; 4]);

impl LinearMask {
    pub fn new(k1: u8, k2: u8, k3: u8, k4: u8) -> LinearMask {
        for k in [k1, k2, k3, k4] {
            assert!(k <= 1, "mask components are bits");
        }
        LinearMask([k1, k2, k3, k4])
    }

    /// All sixteen masks in lexicographic order on `(k1, k2, k3, k4)`.
    pub fn all() -> impl Iterator<Item = LinearMask> {
        (0..16u8).map(|b| LinearMask([b >> 3 & 1, b >> 2 & 1, b >> 1 & 1, b & 1]))
    }

    pub fn is_zero(&self) -> bool {
        self.0 == [0; 4]
    }
}

impl fmt::Display for LinearMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}{}{}", self.0[0], self.0[1], self.0[2], self.0[3])
    }
}

impl fmt::Debug for LinearMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "L({},{},{},{})", self.0[0], self.0[1], self.0[2], self.0[3])
    }
}

impl From<LinearMask> for String {
    fn from(m: LinearMask) -> String {
        m.to_string()
    }
}

impl TryFrom<String> for LinearMask {
    type Error = String;
    fn try_from(s: String) -> Result<LinearMask, String> {
        let b: Vec<u8> = s
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(format!("bad mask digit `{c}`")),
            })
            .collect::<Result<_, _>>()?;
        if b.len() != 4 {
            return Err(format!("mask `{s}` must have 4 digits"));
        }
        Ok(LinearMask([b[0], b[1], b[2], b[3]]))
    }
}

/// The square of a linear form in characteristic 2: `sum k_i * x_i^2`,
/// with no cross terms.
pub fn square_linear(mask: LinearMask) -> Form {
    let mut coeffs = 0u32;
    for (v, &k) in mask.0.iter().enumerate() {
        if k == 1 {
            coeffs ^= 1 << pair_index(v as u8, v as u8);
        }
    }
    Form { degree: 2, coeffs }
}

/// An invertible 4x4 matrix over `F_2`. Row `i` is the linear form that
/// substitution puts in place of `x_{i+1}`; within a row, bit 3 is the `x1`
/// coefficient, bit 0 the `x4` coefficient.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct GlMatrix {
    rows: [u8; 4],
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("matrix 0x{0:04x} is singular over F_2")]
pub struct SingularMatrix(pub u16);

impl GlMatrix {
    pub fn identity() -> GlMatrix {
        GlMatrix { rows: [0b1000, 0b0100, 0b0010, 0b0001] }
    }

    pub fn new(rows: [u8; 4]) -> Result<GlMatrix, SingularMatrix> {
        let m = GlMatrix { rows: [rows[0] & 0xf, rows[1] & 0xf, rows[2] & 0xf, rows[3] & 0xf] };
        if m.rank() != 4 {
            return Err(SingularMatrix(m.encoded()));
        }
        Ok(m)
    }

    /// Decodes the 16-bit row-major encoding: entries `m11 m12 ... m44` read
    /// from the most significant bit down.
    pub fn from_encoded(bits: u16) -> Result<GlMatrix, SingularMatrix> {
        GlMatrix::new([
            (bits >> 12 & 0xf) as u8,
            (bits >> 8 & 0xf) as u8,
            (bits >> 4 & 0xf) as u8,
            (bits & 0xf) as u8,
        ])
    }

    pub fn encoded(&self) -> u16 {
        (u16::from(self.rows[0]) << 12)
            | (u16::from(self.rows[1]) << 8)
            | (u16::from(self.rows[2]) << 4)
            | u16::from(self.rows[3])
    }

    pub fn entry(&self, i: usize, j: usize) -> u8 {
        self.rows[i] >> (3 - j) & 1
    }

    fn rank(&self) -> u32 {
        let mut rows = self.rows;
        let mut rank = 0;
        for bit in (0..4).rev() {
            if let Some(p) = (rank..4).find(|&r| rows[r] >> bit & 1 == 1) {
                rows.swap(rank, p);
                let pivot = rows[rank];
                for (r, row) in rows.iter_mut().enumerate() {
                    if r != rank && *row >> bit & 1 == 1 {
                        *row ^= pivot;
                    }
                }
                rank += 1;
            }
        }
        rank as u32
    }

    /// Matrix product over `F_2`.
    pub fn mul(&self, rhs: &GlMatrix) -> GlMatrix {
        let mut rows = [0u8; 4];
        for (i, row) in rows.iter_mut().enumerate() {
            for (kk, rhs_row) in rhs.rows.iter().enumerate() {
                if self.entry(i, kk) == 1 {
                    *row ^= rhs_row;
                }
            }
        }
        GlMatrix { rows }
    }

    pub fn inverse(&self) -> GlMatrix {
        let mut rows = self.rows;
        let mut inv = GlMatrix::identity().rows;
        for (rank, bit) in (0..4usize).rev().enumerate() {
            let p = (rank..4)
                .find(|&r| rows[r] >> bit & 1 == 1)
                .expect("GlMatrix is invertible by construction");
            rows.swap(rank, p);
            inv.swap(rank, p);
            let (pr, pi) = (rows[rank], inv[rank]);
            for r in 0..4 {
                if r != rank && rows[r] >> bit & 1 == 1 {
                    rows[r] ^= pr;
                    inv[r] ^= pi;
                }
            }
        }
        GlMatrix { rows: inv }
    }

    /// Applies the matrix to a coordinate vector over `GF(2^k)`:
    /// `y_i = sum_j m_ij * p_j` (selection plus XOR, the scalars being bits).
    pub fn apply(&self, p: &[GfElem; 4]) -> Result<[GfElem; 4], GfError> {
        let k = p[0].degree();
        for c in p.iter() {
            if c.degree() != k {
                return Err(GfError::FieldMismatch(k, c.degree()));
            }
        }
        let ctx = make_field(k)?;
        let mut out = [ctx.zero(); 4];
        for (i, slot) in out.iter_mut().enumerate() {
            let mut bits = 0u16;
            for (j, c) in p.iter().enumerate() {
                if self.entry(i, j) == 1 {
                    bits ^= c.bits();
                }
            }
            *slot = ctx.elem(bits)?;
        }
        Ok(out)
    }
}

impl fmt::Display for GlMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0x{:04x}", self.encoded())
    }
}

impl fmt::Debug for GlMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "GlMatrix(0x{:04x}) [", self.encoded())?;
        for i in 0..4 {
            writeln!(
                f,
                "  {} {} {} {}",
                self.entry(i, 0),
                self.entry(i, 1),
                self.entry(i, 2),
                self.entry(i, 3)
            )?;
        }
        write!(f, "]")
    }
}

impl Serialize for GlMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u16(self.encoded())
    }
}

impl<'de> Deserialize<'de> for GlMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<GlMatrix, D::Error> {
        let bits = u16::deserialize(d)?;
        GlMatrix::from_encoded(bits).map_err(D::Error::custom)
    }
}

/// The four candidate pairs `(C_i, Q_i)`: a cubic and a quadric whose
/// intersection is a canonically embedded genus-4 curve candidate.
pub fn builtin_candidates() -> &'static [(Form, Form); 4] {
    static CANDIDATES: OnceLock<[(Form, Form); 4]> = OnceLock::new();
    CANDIDATES.get_or_init(|| {
        let cubics = [
            "x2^3+x1*x3^2+x4^3+x1^2*x3+x3*x4^2",
            "x2^3+x1*x3^2+x2^2*x3+x2^2*x4+x1^3+x3^2*x4+x1^2*x2+x2*x4^2",
            "x2^2*x3+x1*x4^2+x3^3+x3^2*x4+x1^2*x2+x4^3+x1^2*x3+x3*x4^2",
            "x1^3+x1^2*x3+x1*x4^2+x2^2*x4+x2*x4^2+x3^3+x3*x4^2+x4^3",
        ];
        let quadrics = [
            "x1*x2+x3*x4",
            "x1*x2+x1*x3+x1*x4+x2*x4",
            "x1*x3+x2*x3+x2*x4+x3*x4",
            "x1*x4+x2*x3+x3*x4",
        ];
        let mut out = [(Form::zero(3).unwrap(), Form::zero(2).unwrap()); 4];
        for i in 0..4 {
            out[i] = (
                parse_form(cubics[i], 3).expect("builtin cubic parses"),
                parse_form(quadrics[i], 2).expect("builtin quadric parses"),
            );
        }
        out
    })
}
