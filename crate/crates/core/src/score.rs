use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::graph::Network;

/// Per-node scores produced by a measure, aligned with the network's node order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreVector {
    pub measure: String,
    pub ids: Vec<String>,
    pub values: Vec<f64>,
    pub normalized: bool,
    /// Parameters used, rendered as strings. Warnings go under `warning`.
    pub parameters: BTreeMap<String, String>,
}

impl ScoreVector {
    pub fn new(measure: impl Into<String>, net: &Network, values: Vec<f64>, normalized: bool) -> Self {
        debug_assert_eq!(values.len(), net.len());
        ScoreVector {
            measure: measure.into(),
            ids: net.ids(),
            values,
            normalized,
            parameters: BTreeMap::new(),
        }
    }

    pub fn with_param(mut self, name: &str, value: impl ToString) -> Self {
        self.parameters.insert(name.to_string(), value.to_string());
        self
    }

    pub fn get(&self, id: &str) -> Option<f64> {
        self.ids.iter().position(|x| x == id).map(|i| self.values[i])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Node ids ordered by descending score; ties keep id order.
    pub fn ranking(&self) -> Vec<&str> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| {
            self.values[b].partial_cmp(&self.values[a]).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b))
        });
        order.into_iter().map(|i| self.ids[i].as_str()).collect()
    }

    pub fn as_map(&self) -> BTreeMap<String, f64> {
        self.ids.iter().cloned().zip(self.values.iter().copied()).collect()
    }
}
