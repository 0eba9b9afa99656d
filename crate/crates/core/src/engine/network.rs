//! Point-to-multipoint links through a passive splitter.
//!
//! The base scenario's path is the shared feeder fibre. Each active port adds
//! its own drop fibre, the splitter loss and the splitter PDL at that port.

use std::collections::HashSet;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{run_link, LinkMetrics, ScenarioConfig};
use crate::error::{Error, Result};
use crate::link::SPLITTER_1X32_MAX_PDL_DB;
use crate::rng::{derive_seed, seeded};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PortSpec {
    pub id: u32,
    /// Drop fibre from the splitter to this user.
    #[serde(default)]
    pub fiber_length_km: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub splitter_loss_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pdl_db: Option<f64>,
}

impl PortSpec {
    pub fn new(id: u32, fiber_length_km: f64) -> Self {
        Self {
            id,
            fiber_length_km,
            splitter_loss_db: None,
            pdl_db: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkTopology {
    pub port_count: u32,
    pub ports: Vec<PortSpec>,
    /// Default per-port splitter loss. When unset, the base path's
    /// `splitter_loss_db` applies.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub splitter_loss_db: Option<f64>,
    /// Draw each port's PDL uniformly from `[0, max_pdl_db]` when the port
    /// does not fix one.
    pub randomize_pdl: bool,
    pub max_pdl_db: f64,
}

impl Default for NetworkTopology {
    fn default() -> Self {
        Self {
            port_count: 32,
            ports: Vec::new(),
            splitter_loss_db: None,
            randomize_pdl: false,
            max_pdl_db: SPLITTER_1X32_MAX_PDL_DB,
        }
    }
}

impl NetworkTopology {
    pub fn validate(&self) -> Result<()> {
        if self.port_count == 0 {
            return Err(Error::invalid("port_count", "must be > 0"));
        }
        if self.ports.is_empty() || self.ports.len() > self.port_count as usize {
            return Err(Error::invalid(
                "ports",
                format!("{} active ports for {} outputs", self.ports.len(), self.port_count),
            ));
        }
        if !(self.max_pdl_db >= 0.0 && self.max_pdl_db.is_finite()) {
            return Err(Error::invalid("max_pdl_db", "must be >= 0"));
        }
        let mut seen = HashSet::new();
        for p in &self.ports {
            if !seen.insert(p.id) {
                return Err(Error::DuplicatePort(p.id));
            }
            if p.id >= self.port_count {
                return Err(Error::invalid("ports.id", format!("{} >= port_count", p.id)));
            }
            if !(p.fiber_length_km >= 0.0 && p.fiber_length_km.is_finite()) {
                return Err(Error::invalid("ports.fiber_length_km", "must be >= 0"));
            }
            if p.splitter_loss_db.is_some_and(|v| !(v >= 0.0)) {
                return Err(Error::invalid("ports.splitter_loss_db", "must be >= 0"));
            }
            if p.pdl_db.is_some_and(|v| !(v >= 0.0)) {
                return Err(Error::invalid("ports.pdl_db", "must be >= 0"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PortMetrics {
    pub port_id: u32,
    /// Feeder plus drop fibre.
    pub fiber_length_km: f64,
    pub pdl_db: f64,
    pub metrics: LinkMetrics,
}

/// The scenario seen by one port.
pub fn port_scenario(base: &ScenarioConfig, topology: &NetworkTopology, port: &PortSpec) -> ScenarioConfig {
    let port_seed = derive_seed(base.seed, port.id as u64);
    let mut config = base.clone();
    config.network = None;
    config.seed = port_seed;
    config.path.fiber_length_km += port.fiber_length_km;
    config.path.splitter_loss_db = port
        .splitter_loss_db
        .or(topology.splitter_loss_db)
        .unwrap_or(base.path.splitter_loss_db);
    config.path.pdl_db = match port.pdl_db {
        Some(v) => v,
        None if topology.randomize_pdl => seeded(port_seed).random_range(0.0..=topology.max_pdl_db),
        None => base.path.pdl_db,
    };
    config
}

/// Evaluates every active port of `topology` behind the base scenario.
/// Ports run in parallel; results keep the order of `topology.ports`.
pub fn run_network(base: &ScenarioConfig, topology: &NetworkTopology) -> Result<Vec<PortMetrics>> {
    topology.validate().map_err(|e| e.within("network"))?;
    topology
        .ports
        .par_iter()
        .map(|port| {
            let config = port_scenario(base, topology, port);
            Ok(PortMetrics {
                port_id: port.id,
                fiber_length_km: config.path.fiber_length_km,
                pdl_db: config.path.pdl_db,
                metrics: run_link(&config)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::Mode;

    fn topology(ports: Vec<PortSpec>) -> NetworkTopology {
        NetworkTopology {
            ports,
            ..Default::default()
        }
    }

    #[test]
    fn single_zero_length_port_matches_point_to_point() {
        let base = ScenarioConfig::default();
        let out = run_network(&base, &topology(vec![PortSpec::new(0, 0.0)])).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].metrics, run_link(&base).unwrap());
    }

    #[test]
    fn duplicate_ports_rejected() {
        let base = ScenarioConfig::default();
        let t = topology(vec![PortSpec::new(3, 0.0), PortSpec::new(3, 1.0)]);
        assert!(matches!(run_network(&base, &t), Err(Error::DuplicatePort(3))));
        let t = topology(vec![PortSpec::new(40, 0.0)]);
        assert!(run_network(&base, &t).is_err());
        assert!(run_network(&base, &topology(vec![])).is_err());
    }

    #[test]
    fn order_and_seeds_are_stable() {
        let mut base = ScenarioConfig {
            mode: Mode::MonteCarlo,
            slot_count: Some(300_000),
            seed: 9,
            ..Default::default()
        };
        base.path.splitter_loss_db = 0.0;
        let ports: Vec<PortSpec> = (0..6).rev().map(|i| PortSpec::new(i, i as f64)).collect();
        let t = NetworkTopology {
            randomize_pdl: true,
            ..topology(ports)
        };
        let a = run_network(&base, &t).unwrap();
        let b = run_network(&base, &t).unwrap();
        assert_eq!(a, b);
        let ids: Vec<u32> = a.iter().map(|p| p.port_id).collect();
        assert_eq!(ids, vec![5, 4, 3, 2, 1, 0]);
        assert!(a.iter().all(|p| (0.0..=SPLITTER_1X32_MAX_PDL_DB).contains(&p.pdl_db)));
        // a port's result does not depend on which other ports are active
        let single = NetworkTopology {
            ports: vec![t.ports[2].clone()],
            ..t.clone()
        };
        assert_eq!(run_network(&base, &single).unwrap()[0], a[2]);
    }

    #[test]
    fn longer_drop_lowers_rate() {
        let mut base = ScenarioConfig::default();
        base.path.splitter_loss_db = 18.7;
        let t = topology(vec![PortSpec::new(0, 0.0), PortSpec::new(1, 2.0), PortSpec::new(2, 6.4)]);
        let out = run_network(&base, &t).unwrap();
        assert!(out.windows(2).all(|w| w[0].metrics.sifted_rate_hz > w[1].metrics.sifted_rate_hz));
        assert!(out.windows(2).all(|w| w[0].metrics.qber < w[1].metrics.qber));
    }
}
