//! The built-in model catalog.
//!
//! Six workflows ship in two layers each: a high-level net driven by a
//! source transition, and a coloured net carrying the full initial marking
//! (in a timed and an untimed variant). Models are embedded as `.pnet`
//! source text and compiled on demand against [`default_registry`], so the
//! parser sees exactly what a user reading the shipped sources sees.
//!
//! Two composite entries, `ecdsa-full` and `lps-full`, fuse the component
//! high-level nets by place name into end-to-end workflows. They are
//! assembled, not shipped as source files.

mod bindings;

use std::fmt;

use thiserror::Error;

use crate::hlpn::Net;
use crate::pnet::{self, ParsedModel, RawModel};

pub use bindings::default_registry;

/// The six workflow names, in catalog order.
pub const MODEL_NAMES: [&str; 6] = [
    "ecdsa-keygen",
    "ecdsa-siggen",
    "ecdsa-sigverify",
    "lps-calc-location",
    "lps-gen-proof",
    "lps-verify-proof",
];

/// The assembled end-to-end nets.
pub const COMPOSITE_NAMES: [&str; 2] = ["ecdsa-full", "lps-full"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Layer {
    Hlpn,
    Cpn,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Timing {
    Untimed,
    Timed,
}

/// Identifies one catalog entry. High-level nets have no timed variant, so
/// their timing is always [`Timing::Untimed`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ModelId {
    pub name: String,
    pub layer: Layer,
    pub timing: Timing,
}

impl ModelId {
    pub fn hlpn(name: &str) -> Self {
        ModelId {
            name: name.to_string(),
            layer: Layer::Hlpn,
            timing: Timing::Untimed,
        }
    }

    pub fn cpn(name: &str, timed: bool) -> Self {
        ModelId {
            name: name.to_string(),
            layer: Layer::Cpn,
            timing: if timed { Timing::Timed } else { Timing::Untimed },
        }
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.layer, self.timing) {
            (Layer::Hlpn, _) => write!(f, "{}/hlpn", self.name),
            (Layer::Cpn, Timing::Untimed) => write!(f, "{}/cpn/untimed", self.name),
            (Layer::Cpn, Timing::Timed) => write!(f, "{}/cpn/timed", self.name),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("unknown model {0}")]
    UnknownModel(String),
}

macro_rules! hlpn_src {
    ($name:literal) => {
        include_str!(concat!("../../models/hlpn/", $name, ".pnet"))
    };
}
macro_rules! cpn_src {
    ($name:literal) => {
        include_str!(concat!("../../models/cpn/", $name, ".pnet"))
    };
}
macro_rules! golden_csv {
    ($name:literal) => {
        include_str!(concat!("../../models/golden/", $name, ".csv"))
    };
}

const HLPN_SOURCES: [(&str, &str); 6] = [
    ("ecdsa-keygen", hlpn_src!("ecdsa-keygen")),
    ("ecdsa-siggen", hlpn_src!("ecdsa-siggen")),
    ("ecdsa-sigverify", hlpn_src!("ecdsa-sigverify")),
    ("lps-calc-location", hlpn_src!("lps-calc-location")),
    ("lps-gen-proof", hlpn_src!("lps-gen-proof")),
    ("lps-verify-proof", hlpn_src!("lps-verify-proof")),
];

const CPN_SOURCES: [(&str, &str); 6] = [
    ("ecdsa-keygen", cpn_src!("ecdsa-keygen")),
    ("ecdsa-siggen", cpn_src!("ecdsa-siggen")),
    ("ecdsa-sigverify", cpn_src!("ecdsa-sigverify")),
    ("lps-calc-location", cpn_src!("lps-calc-location")),
    ("lps-gen-proof", cpn_src!("lps-gen-proof")),
    ("lps-verify-proof", cpn_src!("lps-verify-proof")),
];

const CPN_TIMED_SOURCES: [(&str, &str); 6] = [
    ("ecdsa-keygen", cpn_src!("ecdsa-keygen-timed")),
    ("ecdsa-siggen", cpn_src!("ecdsa-siggen-timed")),
    ("ecdsa-sigverify", cpn_src!("ecdsa-sigverify-timed")),
    ("lps-calc-location", cpn_src!("lps-calc-location-timed")),
    ("lps-gen-proof", cpn_src!("lps-gen-proof-timed")),
    ("lps-verify-proof", cpn_src!("lps-verify-proof-timed")),
];

const GOLDEN_INCIDENCE: [(&str, &str); 6] = [
    ("ecdsa-keygen", golden_csv!("ecdsa-keygen")),
    ("ecdsa-siggen", golden_csv!("ecdsa-siggen")),
    ("ecdsa-sigverify", golden_csv!("ecdsa-sigverify")),
    ("lps-calc-location", golden_csv!("lps-calc-location")),
    ("lps-gen-proof", golden_csv!("lps-gen-proof")),
    ("lps-verify-proof", golden_csv!("lps-verify-proof")),
];

/// All eighteen built-in entries: six high-level nets and each workflow's
/// coloured net in untimed and timed form.
pub fn catalog() -> Vec<ModelId> {
    let mut out = Vec::with_capacity(18);
    for name in MODEL_NAMES {
        out.push(ModelId::hlpn(name));
    }
    for name in MODEL_NAMES {
        out.push(ModelId::cpn(name, false));
        out.push(ModelId::cpn(name, true));
    }
    out
}

/// The embedded `.pnet` source of a catalog entry.
pub fn source(id: &ModelId) -> Result<&'static str, ModelError> {
    let table: &[(&str, &str)] = match (id.layer, id.timing) {
        (Layer::Hlpn, Timing::Untimed) => &HLPN_SOURCES,
        (Layer::Hlpn, Timing::Timed) => return Err(ModelError::UnknownModel(id.to_string())),
        (Layer::Cpn, Timing::Untimed) => &CPN_SOURCES,
        (Layer::Cpn, Timing::Timed) => &CPN_TIMED_SOURCES,
    };
    table
        .iter()
        .find(|(name, _)| *name == id.name)
        .map(|(_, src)| *src)
        .ok_or_else(|| ModelError::UnknownModel(id.to_string()))
}

/// Compiles a catalog entry against the default registry. The shipped
/// sources are known-good, so a parse failure here is a programming error.
pub fn instantiate(id: &ModelId) -> Result<ParsedModel, ModelError> {
    let src = source(id)?;
    Ok(pnet::parse_model(src, default_registry()).expect("shipped model sources compile"))
}

/// The bundled golden incidence CSV for one of the six high-level nets.
pub fn golden_incidence_csv(name: &str) -> Option<&'static str> {
    GOLDEN_INCIDENCE
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, csv)| *csv)
}

fn hlpn_raw(name: &str) -> Result<RawModel, ModelError> {
    let id = ModelId::hlpn(name);
    Ok(pnet::parse_raw(source(&id)?).expect("shipped model sources parse"))
}

/// The fused syntax tree of a composite entry.
pub fn composite_raw(name: &str) -> Result<RawModel, ModelError> {
    let parts: [(&str, &str); 3] = match name {
        "ecdsa-full" => [
            ("keygen", "ecdsa-keygen"),
            ("siggen", "ecdsa-siggen"),
            ("sigverify", "ecdsa-sigverify"),
        ],
        "lps-full" => [
            ("calc", "lps-calc-location"),
            ("gen", "lps-gen-proof"),
            ("verify", "lps-verify-proof"),
        ],
        _ => return Err(ModelError::UnknownModel(name.to_string())),
    };
    let raws: Vec<(&str, RawModel)> = parts
        .iter()
        .map(|(label, model)| Ok((*label, hlpn_raw(model)?)))
        .collect::<Result<_, ModelError>>()?;
    let refs: Vec<(&str, &RawModel)> = raws.iter().map(|(l, r)| (*l, r)).collect();
    Ok(pnet::fuse_raw(name, &refs))
}

/// A high-level net by name: one of the six workflows or a composite.
pub fn hlpn_net(name: &str) -> Result<Net, ModelError> {
    let raw = if COMPOSITE_NAMES.contains(&name) {
        composite_raw(name)?
    } else {
        hlpn_raw(name)?
    };
    match pnet::compile(&raw, default_registry()).expect("built-in nets compile") {
        ParsedModel::Hlpn(net) => Ok(net),
        ParsedModel::Cpn(_) => unreachable!("high-level sources compile to high-level nets"),
    }
}

/// A coloured net by name, in the requested timing variant.
pub fn cpn_model(name: &str, timed: bool) -> Result<crate::cpn::CpnModel, ModelError> {
    match instantiate(&ModelId::cpn(name, timed))? {
        ParsedModel::Cpn(model) => Ok(model),
        ParsedModel::Hlpn(_) => unreachable!("coloured sources compile to coloured nets"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::incidence::matrices;

    #[test]
    fn catalog_lists_six_workflows_in_three_forms() {
        let all = catalog();
        assert_eq!(all.len(), 18);
        assert!(all.contains(&ModelId::hlpn("ecdsa-keygen")));
        assert!(all.contains(&ModelId::cpn("lps-verify-proof", true)));
        assert_eq!(all.iter().filter(|id| id.layer == Layer::Hlpn).count(), 6);
        assert_eq!(
            all.iter().filter(|id| id.timing == Timing::Timed).count(),
            6
        );
    }

    #[test]
    fn every_entry_instantiates_with_its_figure_shape() {
        // (name, hlpn places/trans, cpn places/trans)
        let shapes = [
            ("ecdsa-keygen", (3, 3), (3, 2)),
            ("ecdsa-siggen", (4, 5), (6, 5)),
            ("ecdsa-sigverify", (6, 6), (6, 5)),
            ("lps-calc-location", (3, 3), (3, 2)),
            ("lps-gen-proof", (5, 5), (5, 4)),
            ("lps-verify-proof", (5, 5), (5, 4)),
        ];
        for (name, hlpn_shape, cpn_shape) in shapes {
            let ParsedModel::Hlpn(net) = instantiate(&ModelId::hlpn(name)).unwrap() else {
                panic!("{name} hlpn entry compiled to the wrong layer");
            };
            assert_eq!(
                (net.places().len(), net.transitions().len()),
                hlpn_shape,
                "{name} hlpn shape"
            );
            for timed in [false, true] {
                let model = cpn_model(name, timed).unwrap();
                assert_eq!(
                    (model.places.len(), model.transitions.len()),
                    cpn_shape,
                    "{name} cpn shape (timed: {timed})"
                );
                assert_eq!(model.timed, timed, "{name} timing flag");
            }
        }
    }

    #[test]
    fn timed_key_generation_stamps_inputs_on_odd_ticks() {
        let model = cpn_model("ecdsa-keygen", true).unwrap();
        let inputs = model.place_index("Inputs").unwrap();
        let mut stamps: Vec<u64> = model.places[inputs]
            .init
            .iter()
            .map(|(_, _, delay)| *delay)
            .collect();
        stamps.sort_unstable();
        assert_eq!(stamps, vec![1, 3, 5, 7, 9]);
    }

    #[test]
    fn unknown_ids_are_reported_not_panicked() {
        let ghost = ModelId::hlpn("ghost");
        assert_eq!(
            instantiate(&ghost).err(),
            Some(ModelError::UnknownModel("ghost/hlpn".to_string()))
        );
        assert!(composite_raw("ghost-full").is_err());
    }

    #[test]
    fn golden_incidence_is_bundled_for_each_workflow() {
        for name in MODEL_NAMES {
            let csv = golden_incidence_csv(name).expect("golden present");
            assert!(csv.starts_with("FORWARD\n"), "{name} golden header");
        }
        assert!(golden_incidence_csv("ecdsa-full").is_none());
    }

    #[test]
    fn composites_fuse_and_satisfy_the_combined_identity() {
        for name in COMPOSITE_NAMES {
            let net = hlpn_net(name).unwrap();
            let inc = matrices(&net);
            assert_eq!(
                inc.combined,
                inc.forward.difference(&inc.backward),
                "{name} combined identity"
            );
            // the shared input pool fused into a single place
            let inputs: Vec<&String> = inc
                .places
                .iter()
                .filter(|p| p.as_str() == "Inputs")
                .collect();
            assert_eq!(inputs.len(), 1, "{name} fused one Inputs place");
        }
    }
}
