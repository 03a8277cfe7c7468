//! Petri-net modelling, simulation and verification toolkit.
//!
//! The crate provides two executable net layers: a high-level Petri net
//! engine (`hlpn`) whose transition rules are host-registered functions, and
//! a coloured Petri net engine (`cpn`) with colour sets, guards, arc
//! expressions and an integer global clock. Structural analysis lives in
//! `incidence`, stochastic analysis in `sim`, and SMT-LIB2 property emission
//! with external solver invocation in `smtgen`. The `scheme` module
//! implements the modelled subject itself: an ECDSA variant over toy and
//! standard curves plus a location-proof system, and `models` ships the
//! built-in nets for it in the `.pnet` text format handled by `pnet`.

pub mod cpn;
pub mod hlpn;
pub mod incidence;
pub mod models;
pub mod pnet;
pub mod registry;
pub mod scheme;
pub mod sim;
pub mod smtgen;
pub mod value;
