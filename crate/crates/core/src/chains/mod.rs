//! Exact linear algebra over ℤ, ℚ and F_p.

mod complex;
mod field;
mod homology;
mod integer;
mod ring;
mod snf;
mod sparse;

pub use complex::{
    total_complex, BoundaryJson, ChainComplex, ChainComplexJson, ChainMap, Multicomplex, SCHEMA_VERSION,
};
pub use field::{rank_mod_p, rank_mod_p_sparse, FieldRank};
pub use homology::{boundary_invariants, group_from_ranks, HomologyEntry, HomologyGroup, HomologyTable};
pub use integer::{integer_invariants, rational_rank, IntegerInvariants};
pub use ring::Ring;
pub use snf::{
    big_determinant, big_matmul, rational_rank_dense, smith_normal_form, smith_normal_form_dense, SmithForm,
};
pub use sparse::{normalize_column, Column, SparseMatrix, SparseMatrixJson};
