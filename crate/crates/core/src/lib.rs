//! Exact computation with randomizations of finite first-order structures.
//!
//! A randomization of a finite structure `M` over a finite probability space
//! `Ω` has as random elements all maps `Ω → M` and as events all subsets of
//! `Ω`. Everything here is computed with exact rationals.

pub mod logic;
pub mod measure;
pub mod randomizer;
pub mod rational;
pub mod rtype;
pub mod stability;

pub use rational::Rational;
