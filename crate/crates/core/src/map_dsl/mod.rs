//! Holomorphic maps as expression trees with exact symbolic derivatives.

mod expr;
mod holomap;
mod parser;

pub use expr::{differentiate, CRational, Expr, Node, SINGULAR_DENOMINATOR};
pub use holomap::{
    compose, compose_jets, jacobian, library, parse_map, parse_map_with, DomainSpec, HoloMap, Holomorphic, Identity, Jet,
    MapChain, MIN_JACOBIAN_DET,
};
pub use parser::{parse_components, parse_expr, Constants};
