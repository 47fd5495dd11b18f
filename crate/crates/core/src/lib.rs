//! Linear and quadratic equations in Plücker coordinates cutting out Hilbert
//! schemes of subschemes of projective space, with an independent membership
//! oracle, a quiver description, and a test corpus.

pub mod exactalg;
pub mod rng;
pub mod macaulay;
pub mod polyring;
pub mod grassmann;
pub mod equations;
pub mod quiver;
pub mod membership;
pub mod corpus;
pub mod acceptance;
pub mod parallel;
