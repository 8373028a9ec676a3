//! Knowledge generation spread over a rayon pool.

use irsplan_core::propagation::{direct_table, site_tables};
use irsplan_core::{ChannelKnowledge, Scene, TracerConfig};
use rayon::prelude::*;

/// Same tables as the sequential generator; sites are traced in parallel and
/// merged in site order, so the result does not depend on the pool size.
pub fn generate_knowledge_parallel(scene: &Scene, cfg: &TracerConfig, tx_power_dbm: f64) -> ChannelKnowledge {
    let per_site: Vec<_> = scene
        .sites()
        .par_iter()
        .map(|site| site_tables(scene, site, cfg, tx_power_dbm))
        .collect();
    let mut k = ChannelKnowledge {
        direct: direct_table(scene, cfg, tx_power_dbm),
        ..ChannelKnowledge::default()
    };
    for (inc, dep) in per_site {
        k.irs_incident.extend(inc);
        k.irs_departing.extend(dep);
    }
    k
}
