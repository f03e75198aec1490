//! The repeated ad-slot auction game A_{k,ρ}.

use crate::graph::{GameGraph, VertexSpec};
use crate::num::{fmt_q, parse_q, Q};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq)]
pub struct AuctionSpec {
    pub slots: usize,
    /// Keyed by bit strings of length `slots`; character `i` is slot `i+1`.
    pub reward: BTreeMap<String, Q>,
}

#[derive(Debug, thiserror::Error)]
pub enum AuctionError {
    #[error("RewardMissing: no reward for state {0}")]
    RewardMissing(String),
    #[error("slots must be at least 1")]
    NoSlots,
    #[error("too many slots ({0}); at most 16 are supported")]
    TooManySlots(usize),
    #[error("ParseError: {0}")]
    Parse(String),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuctionFile {
    pub slots: usize,
    pub reward: BTreeMap<String, String>,
}

impl AuctionSpec {
    pub fn from_json(text: &str) -> Result<AuctionSpec, AuctionError> {
        let f: AuctionFile = serde_json::from_str(text).map_err(|e| AuctionError::Parse(e.to_string()))?;
        let mut reward = BTreeMap::new();
        for (k, v) in f.reward {
            let x = parse_q(&v).map_err(|e| AuctionError::Parse(format!("reward[{k}]: {e}")))?;
            reward.insert(k, x);
        }
        Ok(AuctionSpec { slots: f.slots, reward })
    }

    pub fn to_json(&self) -> String {
        let f = AuctionFile {
            slots: self.slots,
            reward: self.reward.iter().map(|(k, v)| (k.clone(), fmt_q(v))).collect(),
        };
        serde_json::to_string_pretty(&f).expect("serializable") + "\n"
    }

    /// Reward computed by `f` over all 2^k states.
    pub fn from_fn(slots: usize, f: impl Fn(&[bool]) -> Q) -> AuctionSpec {
        let reward = (0..1usize << slots)
            .map(|mask| {
                let bits: Vec<bool> = (0..slots).map(|i| mask >> i & 1 == 1).collect();
                (bitstring(&bits), f(&bits))
            })
            .collect();
        AuctionSpec { slots, reward }
    }
}

fn bitstring(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

/// Vertex id for slot `l` (1-based) and state `bits`, e.g. `"1:01"`.
pub fn vertex_id(l: usize, bits: &[bool]) -> String {
    format!("{}:{}", l, bitstring(bits))
}

pub fn build_auction_game(spec: &AuctionSpec) -> Result<GameGraph, AuctionError> {
    let k = spec.slots;
    if k == 0 {
        return Err(AuctionError::NoSlots);
    }
    if k > 16 {
        return Err(AuctionError::TooManySlots(k));
    }
    let mut vertices = Vec::new();
    let mut edges = Vec::new();
    for mask in 0..1usize << k {
        let bits: Vec<bool> = (0..k).map(|i| mask >> i & 1 == 1).collect();
        let key = bitstring(&bits);
        let w = spec.reward.get(&key).ok_or_else(|| AuctionError::RewardMissing(key.clone()))?;
        for l in 1..=k {
            let from = vertex_id(l, &bits);
            vertices.push(VertexSpec::new(from.clone(), w.clone()));
            let next = l % k + 1;
            for won in [true, false] {
                let mut b = bits.clone();
                b[l - 1] = won;
                edges.push((from.clone(), vertex_id(next, &b)));
            }
        }
    }
    Ok(GameGraph::new(vertices, edges).expect("auction graph is well formed"))
}
