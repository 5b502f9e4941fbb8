//! Test-only helpers: a random domain/task generator and a naive simulator
//! that grounds every operator over every object tuple up front.

#![allow(dead_code)]

pub mod fuzz;
pub mod naive;
