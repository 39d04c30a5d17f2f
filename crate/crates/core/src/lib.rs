pub mod bethe;
pub mod cli;
pub mod gaudin;
pub mod liealg;
pub mod linalg;
pub mod opers;
pub mod ratfun;
pub mod repmod;
pub mod scalar;
