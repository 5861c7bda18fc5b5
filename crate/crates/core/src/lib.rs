pub mod config;
pub mod dg;
pub mod io;
pub mod materials;
pub mod mesh;
pub mod quadrature;
pub mod refelem;
pub mod source;
pub mod timeint;
pub mod units;
pub mod verify;
pub mod workflows;
