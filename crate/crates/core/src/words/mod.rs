//! Words, normal forms and conjugacy for HNN extensions of finite groups and
//! for free products with commutative subgroups.

pub mod fpc;
pub mod hnn;

use thiserror::Error;

use crate::groups::GroupError;

pub use fpc::{Factor, FpcCase, FpcLetter, FpcPresentation, FpcWord};
pub use hnn::{HnnLetter, HnnPresentation, HnnWord, Syllable};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WordError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("invalid presentation: {0}")]
    Presentation(String),
    #[error("letter {index}: element {element} out of range")]
    BadElement { index: usize, element: usize },
    #[error("letter {0}: identity letters are not allowed")]
    IdentityLetter(usize),
    #[error("letter {0}: stable-letter exponent must be +1 or -1")]
    BadExponent(usize),
    #[error("u is conjugate to v or to v^-1")]
    Conjugate,
}
