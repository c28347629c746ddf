//! Core of a staged XML annotation pipeline for German technical and medical
//! text: structure detection, morphology, part-of-speech tagging, chart
//! parsing with feature unification, semantic tagging and lexicon
//! bootstrapping.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod annotation;
pub mod automaton;
pub mod features;
pub mod structure;
pub mod morph;
pub mod postag;
pub mod seed;
pub mod parser;
pub mod sem;
pub mod bootstrap;
