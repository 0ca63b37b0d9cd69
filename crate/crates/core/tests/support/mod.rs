#![allow(dead_code)]

pub mod hierarchy;
pub mod randprog;
