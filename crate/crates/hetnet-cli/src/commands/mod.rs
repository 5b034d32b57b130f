pub mod compare;
pub mod generate;
pub mod oracle;
pub mod solve;
pub mod sweep;
