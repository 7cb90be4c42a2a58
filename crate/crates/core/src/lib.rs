pub mod logic;
pub mod operators;
pub mod postulates;
pub mod rankings;
