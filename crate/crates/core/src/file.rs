//! JSON instance files.
//!
//! Costs are stored as exact `"num/den"` strings so that group membership
//! survives a round trip bit for bit. Voter parameters are stored raw; they
//! are normalized when the file is turned into an [`Instance`].

use std::collections::BTreeMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::instance::{format_rational, parse_rational, validate_instance, Instance, Rational, RawInstance};
use crate::utility::Family;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub schema_version: u32,
    pub m: usize,
    pub n: usize,
    #[serde(serialize_with = "ser_costs", deserialize_with = "de_costs")]
    pub costs: Vec<Rational>,
    pub voters: Vec<Family>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, serde_json::Value>,
}

fn ser_costs<S: Serializer>(costs: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(costs.iter().map(format_rational))
}

fn de_costs<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Rational>, D::Error> {
    let raw: Vec<String> = Vec::deserialize(d)?;
    raw.iter()
        .map(|s| parse_rational(s).map_err(serde::de::Error::custom))
        .collect()
}

impl InstanceFile {
    pub fn from_raw(raw: &RawInstance) -> Self {
        InstanceFile {
            schema_version: SCHEMA_VERSION,
            m: raw.costs.len(),
            n: raw.voters.len(),
            costs: raw.costs.clone(),
            voters: raw.voters.clone(),
            metadata: BTreeMap::new(),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if file.schema_version != SCHEMA_VERSION {
            return Err(Error::Parse(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                file.schema_version
            )));
        }
        if file.m != file.costs.len() || file.n != file.voters.len() {
            return Err(Error::Parse(format!(
                "header says m = {}, n = {} but the file lists {} costs and {} voters",
                file.m,
                file.n,
                file.costs.len(),
                file.voters.len()
            )));
        }
        Ok(file)
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("instance files always serialize");
        text.push('\n');
        text
    }

    pub fn to_raw(&self) -> RawInstance {
        RawInstance {
            costs: self.costs.clone(),
            voters: self.voters.clone(),
        }
    }

    pub fn into_instance(self) -> Result<Instance> {
        validate_instance(self.to_raw())
    }
}
