pub mod cmv;
pub mod conditions;
pub mod direct;
pub mod fixtures;
pub mod fm;
pub mod geometry;
pub mod inverse;
pub mod io;
pub mod schur;
