//! Exact computational algebra for pseudocharacters and determinant laws
//! over commutative rings.
//!
//! The crate provides three equivalent packagings of the
//! characteristic-polynomial data of a group representation, each usable
//! over an arbitrary commutative ring from a constructible tower:
//!
//! * trace pseudocharacters (central functions satisfying the vanishing
//!   signed sum over S_{d+1}),
//! * determinant laws (multiplicative, degree-d homogeneous polynomial
//!   laws on a group algebra or free algebra),
//! * GL_d pseudocharacter data (values of conjugation-invariant functions
//!   of matrix tuples, presented through Donkin generators).
//!
//! The conversions between them are implemented explicitly in both
//! directions, together with brute-force oracles and property suites that
//! verify the equivalences at desk scale. All arithmetic is exact.

pub mod algebra;
pub mod amitsur;
pub mod correspond;
pub mod determinant;
pub mod error;
pub mod group;
pub mod matrix;
pub mod lafforgue;
pub mod rep;
pub mod sample;
pub mod ring;
pub mod suites;
pub mod taylor;

pub use algebra::{AlgebraElement, FreeAlgebraElement, GroupAlgebraElement};
pub use correspond::{
    alpha, alpha_inverse, alpha_inverse_set, char_p_separation_demo, roundtrip_check,
    semisimple_bijection_check, taylor_bridge, ConversionReport, RoundtripInput,
};
pub use determinant::{check_multiplicative_homogeneous, is_gl_valued, Determinant, Domain};
pub use error::{Error, Result};
pub use group::{builtin_group, cyclic_canonical, evaluate_word_in_group, FiniteGroup, GroupHom, Word};
pub use lafforgue::{DonkinExpression, LafforguePC, ThetaTable};
pub use matrix::{CharPoly, SquareMatrix};
pub use rep::{rho_b, Representation};
pub use ring::{parse_ring_name, Ring, Value};
pub use taylor::{cycle_decompose, is_taylor_pc, taylor_defect, taylor_from_rep, TaylorPC};
