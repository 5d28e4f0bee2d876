use crate::beamforming::PhaseCodebook;
use crate::error::Result;
use crate::geometry::Antenna;

use super::{amplitude_to_dbm, Propagation, Scenario, Topology};

/// Received powers for one set of codebooks.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkReport {
    /// Power an isotropic probe would see at each panel center, from the
    /// node that lights it (the transmitter, or the previous panel in a
    /// chain).
    pub node_powers_dbm: Vec<f64>,
    /// Direct path alone at the receiver.
    pub direct_power_dbm: f64,
    /// All paths at the receiver, combined coherently.
    pub rx_power_dbm: f64,
}

impl LinkReport {
    /// Panel nodes followed by the receiver.
    pub fn per_node(&self) -> Vec<f64> {
        let mut v = self.node_powers_dbm.clone();
        v.push(self.rx_power_dbm);
        v
    }
}

pub fn link_budget(sc: &Scenario, codebooks: &[PhaseCodebook]) -> Result<LinkReport> {
    let prop = Propagation::new(sc, codebooks)?;
    let mut node_powers_dbm = Vec::with_capacity(sc.panels.len());
    for (i, panel) in sc.panels.iter().enumerate() {
        let probe = Antenna::isotropic(panel.center());
        let v = match sc.topology {
            Topology::Chain if i > 0 => prop.panel_amplitude(sc, i - 1, &probe)?,
            _ => Propagation::direct_amplitude(sc, &probe),
        };
        node_powers_dbm.push(amplitude_to_dbm(v));
    }
    Ok(LinkReport {
        node_powers_dbm,
        direct_power_dbm: amplitude_to_dbm(Propagation::direct_amplitude(sc, &sc.rx)),
        rx_power_dbm: amplitude_to_dbm(prop.received_amplitude(sc, &sc.rx)?),
    })
}
