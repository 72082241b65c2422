//! Exact arithmetic for truncated Iwasawa algebras `Z/p^N[[T]]/(T^M)`,
//! finitely presented modules over them, group rings over finite p-groups
//! and perfect complexes, together with the Kida-type formula evaluators
//! used to check them.

pub mod coeff;
pub mod complex;
pub mod error;
pub mod group;
pub mod kida;
pub(crate) mod linalg;
pub mod matrix;
pub mod module;
pub mod poly;
pub mod random;
pub mod reduce;
pub mod ring;
pub mod schema;

pub use coeff::{HowellForm, PrecisionContext, Residue, ResidueMatrix};
pub use complex::{ChainMap, Classification, KidaReport, PerfectComplex};
pub use error::{Error, Result};
pub use group::{GroupRingElement, GroupRingMatrix, PGroup};
pub use matrix::PolyMatrix;
pub use module::{InvariantReport, LambdaModule, Method};
pub use poly::Poly;
pub use random::{random_complex, random_triangle, selmer_shape, ComplexParams, Family, SelmerShape, Triangle};
pub use reduce::{find_annihilator, lambda_by_reduction, reduce_step, Annihilator, Reduction};
pub use ring::{omega, IwasawaElement, Preparation};
