pub mod catalog;
pub mod cpp;
pub mod datalog;
pub mod diag;
pub mod dsl;
pub mod facts;
pub mod report;
