pub mod blaschke;
pub mod corpus;
pub mod error;
pub mod hyperbolic;
pub mod indestructible;
pub mod iteration;
pub mod maximal;
pub mod multiset;
pub mod par;
pub mod poly;
pub mod report;
pub mod taylor;
