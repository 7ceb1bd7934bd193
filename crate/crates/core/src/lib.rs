//! Order-separation witnesses for HNN extensions of finite groups and for
//! free products of finite groups with commutative subgroups.
//!
//! Elements are separated by explicit homomorphisms onto finite permutation
//! groups. These are built by cutting and re-gluing action graphs (finite
//! covers obtained from disjoint copies) until the induced permutations of
//! the two elements have different orders. A brute-force quotient search in
//! [`oracle`] serves as an independent check.

pub mod engine;
pub mod graphs;
pub mod groups;
pub mod instance;
pub mod oracle;
pub mod perm;
pub mod surgery;
pub mod witness;
pub mod words;
