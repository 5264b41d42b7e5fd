//! Index combinatorics: heap-coded binary tree branches (an almost-disjoint
//! family covering ℕ₀), Cantor-pairing partitions, and structured index sets.

pub mod branch;
pub mod index;
pub mod pairing;
pub mod set;

pub use branch::{branch_intersection, node_to_branch, tree_code, BranchId};
pub use index::Index;
pub use pairing::{pair, unpair};
pub use set::IndexSet;
