//! Exact Reidemeister torsion of Z2-graded representations up to homotopy on
//! triangulated closed oriented manifolds.

pub mod complexes;
pub mod corpus;
pub mod graded;
pub mod linalg;
pub mod rep;
pub mod simplicial;
pub mod torsion;
