pub mod run;
pub mod snm;
pub mod sram;
pub mod sweep;
