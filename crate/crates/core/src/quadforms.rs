//! Equivalence of quadratic forms in four variables under `GL_4(F_2)`.
//!
//! Equivalence is decided by exhausting all 20160 invertible matrices in a
//! fixed order and returning the first witness, so every verdict comes with
//! a checkable certificate. Characteristic-2 form classification by
//! invariants is easy to get subtly wrong; at this size the exhaustive
//! search is cheap and self-verifying.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forms::{parse_form, square_linear, Form, FormError, GlMatrix, LinearMask};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QuadError {
    #[error("equivalence search needs degree-2 forms, got degree {0}")]
    NotQuadratic(u32),
    #[error(transparent)]
    Form(#[from] FormError),
}

/// Order of `GL_4(F_2)`: `(16-1)(16-2)(16-4)(16-8)`.
pub const GL4_ORDER: u64 = 20160;

/// Yields each invertible 4x4 matrix over `F_2` exactly once, in increasing
/// order of the 16-bit row-major encoding.
pub fn gl4_elements() -> impl Iterator<Item = GlMatrix> {
    (0u32..=0xffff).filter_map(|bits| GlMatrix::from_encoded(bits as u16).ok())
}

/// Outcome of an equivalence search: either a matrix carrying `lhs` to
/// `rhs`, or an explicit non-equivalence verdict reached by exhaustion.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivalenceWitness {
    pub lhs: Form,
    pub rhs: Form,
    /// First matrix in stream order with `lhs.substitute(m) == rhs`, if any.
    pub matrix: Option<GlMatrix>,
}

impl EquivalenceWitness {
    pub fn is_equivalent(&self) -> bool {
        self.matrix.is_some()
    }

    /// Re-checks the certificate.
    pub fn verify(&self) -> bool {
        match &self.matrix {
            Some(m) => self.lhs.substitute(m) == self.rhs,
            None => true,
        }
    }
}

/// Exhaustive equivalence search over `GL_4(F_2)`. The search parallelizes
/// over the matrix stream; determinism is preserved because the hit with the
/// minimum stream index wins.
pub fn are_equivalent(lhs: &Form, rhs: &Form) -> Result<EquivalenceWitness, QuadError> {
    for f in [lhs, rhs] {
        if f.degree() != 2 {
            return Err(QuadError::NotQuadratic(f.degree()));
        }
    }
    let matrix = (0u32..=0xffff)
        .into_par_iter()
        .filter_map(|bits| GlMatrix::from_encoded(bits as u16).ok())
        .find_first(|m| lhs.substitute(m) == *rhs);
    Ok(EquivalenceWitness { lhs: *lhs, rhs: *rhs, matrix })
}

/// The canonical elliptic quadric `x1 x2 + x3 x4 + x3^2 + x4^2`: the
/// nondegenerate class with `q^2 + 1` projective zeros, the one every
/// candidate quadric must land in.
pub fn elliptic_reference() -> Form {
    parse_form("x1*x2+x3*x4+x3^2+x4^2", 2).expect("reference quadric parses")
}

/// The masks `L` among all sixteen for which `Q + L^2` is equivalent to the
/// elliptic reference, in lexicographic mask order.
pub fn reduced_mask_list(q: &Form) -> Result<Vec<LinearMask>, QuadError> {
    if q.degree() != 2 {
        return Err(QuadError::NotQuadratic(q.degree()));
    }
    let target = elliptic_reference();
    let mut out = Vec::new();
    for mask in LinearMask::all() {
        let candidate = q.add(&square_linear(mask))?;
        if are_equivalent(&candidate, &target)?.is_equivalent() {
            out.push(mask);
        }
    }
    Ok(out)
}
