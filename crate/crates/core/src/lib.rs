pub mod ball;
pub mod coeff;
pub mod curve;
pub mod curvetree;
pub mod error;
pub mod expr;
pub mod field;
pub mod finite;
pub mod gamma;
pub mod linalg;
pub mod mpoly;
pub mod point;
pub mod poincare;
pub mod rtrdim;
pub mod poly1;
pub mod roots;
pub mod series;
pub mod spoly;
pub mod strat;
pub mod tree;
pub mod zassen;
