//! Raw BLS12-381 group operations for the Python layer.
//!
//! Exposes opaque G1/G2 element handles, compressed (de)serialization with
//! full canonicity + subgroup validation, scalar multiplication, RFC 9380
//! hash-to-curve into G2, and a multi-pairing product check. No protocol
//! logic lives here. Expensive calls release the GIL.

use bls12_381::hash_to_curve::{ExpandMsgXmd, HashToCurve};
use bls12_381::{
    multi_miller_loop, G1Affine, G1Projective, G2Affine, G2Prepared, G2Projective, Gt, Scalar,
};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyBytes;

fn scalar_from_le(bytes: &[u8]) -> PyResult<Scalar> {
    let arr: [u8; 32] = bytes
        .try_into()
        .map_err(|_| PyValueError::new_err("scalar must be 32 bytes"))?;
    let s = Scalar::from_bytes(&arr);
    if bool::from(s.is_some()) {
        Ok(s.unwrap())
    } else {
        Err(PyValueError::new_err("scalar not canonical (>= group order)"))
    }
}

#[pyclass(frozen)]
#[derive(Clone)]
struct G1Elem {
    p: G1Projective,
}

#[pymethods]
impl G1Elem {
    #[staticmethod]
    fn generator() -> Self {
        G1Elem {
            p: G1Projective::generator(),
        }
    }

    #[staticmethod]
    fn identity() -> Self {
        G1Elem {
            p: G1Projective::identity(),
        }
    }

    /// Decode a compressed point, enforcing canonical encoding, curve
    /// membership and prime-order subgroup membership.
    #[staticmethod]
    fn from_compressed(py: Python<'_>, data: &[u8]) -> PyResult<Self> {
        let arr: [u8; 48] = data
            .try_into()
            .map_err(|_| PyValueError::new_err("compressed G1 must be 48 bytes"))?;
        let a = py.allow_threads(move || G1Affine::from_compressed(&arr));
        if bool::from(a.is_some()) {
            Ok(G1Elem {
                p: G1Projective::from(a.unwrap()),
            })
        } else {
            Err(PyValueError::new_err("invalid G1 encoding"))
        }
    }

    fn to_compressed<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        PyBytes::new_bound(py, &G1Affine::from(self.p).to_compressed())
    }

    fn add(&self, other: &G1Elem) -> Self {
        G1Elem {
            p: self.p + other.p,
        }
    }

    fn neg(&self) -> Self {
        G1Elem { p: -self.p }
    }

    /// Multiply by a canonical little-endian 32-byte scalar.
    fn mul(&self, py: Python<'_>, scalar_le: &[u8]) -> PyResult<Self> {
        let s = scalar_from_le(scalar_le)?;
        let p = self.p;
        Ok(G1Elem {
            p: py.allow_threads(move || p * s),
        })
    }

    fn is_identity(&self) -> bool {
        bool::from(self.p.is_identity())
    }

    fn equals(&self, other: &G1Elem) -> bool {
        self.p == other.p
    }

    #[staticmethod]
    fn sum(py: Python<'_>, elems: Vec<Py<G1Elem>>) -> Self {
        let p = py.allow_threads(move || {
            let mut acc = G1Projective::identity();
            for e in &elems {
                acc += e.get().p;
            }
            acc
        });
        G1Elem { p }
    }
}

#[pyclass(frozen)]
#[derive(Clone)]
struct G2Elem {
    p: G2Projective,
}

#[pymethods]
impl G2Elem {
    #[staticmethod]
    fn generator() -> Self {
        G2Elem {
            p: G2Projective::generator(),
        }
    }

    #[staticmethod]
    fn identity() -> Self {
        G2Elem {
            p: G2Projective::identity(),
        }
    }

    #[staticmethod]
    fn from_compressed(py: Python<'_>, data: &[u8]) -> PyResult<Self> {
        let arr: [u8; 96] = data
            .try_into()
            .map_err(|_| PyValueError::new_err("compressed G2 must be 96 bytes"))?;
        let a = py.allow_threads(move || G2Affine::from_compressed(&arr));
        if bool::from(a.is_some()) {
            Ok(G2Elem {
                p: G2Projective::from(a.unwrap()),
            })
        } else {
            Err(PyValueError::new_err("invalid G2 encoding"))
        }
    }

    fn to_compressed<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        PyBytes::new_bound(py, &G2Affine::from(self.p).to_compressed())
    }

    fn add(&self, other: &G2Elem) -> Self {
        G2Elem {
            p: self.p + other.p,
        }
    }

    fn neg(&self) -> Self {
        G2Elem { p: -self.p }
    }

    fn mul(&self, py: Python<'_>, scalar_le: &[u8]) -> PyResult<Self> {
        let s = scalar_from_le(scalar_le)?;
        let p = self.p;
        Ok(G2Elem {
            p: py.allow_threads(move || p * s),
        })
    }

    fn is_identity(&self) -> bool {
        bool::from(self.p.is_identity())
    }

    fn equals(&self, other: &G2Elem) -> bool {
        self.p == other.p
    }

    #[staticmethod]
    fn sum(py: Python<'_>, elems: Vec<Py<G2Elem>>) -> Self {
        let p = py.allow_threads(move || {
            let mut acc = G2Projective::identity();
            for e in &elems {
                acc += e.get().p;
            }
            acc
        });
        G2Elem { p }
    }
}

/// RFC 9380 hash_to_curve (BLS12381G2_XMD:SHA-256_SSWU_RO_) with caller DST.
#[pyfunction]
fn hash_to_g2(py: Python<'_>, msg: &[u8], dst: &[u8]) -> G2Elem {
    let msg = msg.to_vec();
    let dst = dst.to_vec();
    let p = py.allow_threads(move || {
        <G2Projective as HashToCurve<ExpandMsgXmd<sha2::Sha256>>>::hash_to_curve(&msg, &dst)
    });
    G2Elem { p }
}

/// True iff the product of pairings e(a_i, b_i) over all pairs is the
/// identity of the target group.
#[pyfunction]
fn pairing_product_is_identity(py: Python<'_>, pairs: Vec<(Py<G1Elem>, Py<G2Elem>)>) -> bool {
    py.allow_threads(move || {
        let prepared: Vec<(G1Affine, G2Prepared)> = pairs
            .iter()
            .map(|(a, b)| {
                (
                    G1Affine::from(a.get().p),
                    G2Prepared::from(G2Affine::from(b.get().p)),
                )
            })
            .collect();
        let refs: Vec<(&G1Affine, &G2Prepared)> = prepared.iter().map(|(a, b)| (a, b)).collect();
        multi_miller_loop(&refs).final_exponentiation() == Gt::identity()
    })
}

#[pymodule]
fn _blsops(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<G1Elem>()?;
    m.add_class::<G2Elem>()?;
    m.add_function(wrap_pyfunction!(hash_to_g2, m)?)?;
    m.add_function(wrap_pyfunction!(pairing_product_is_identity, m)?)?;
    Ok(())
}
