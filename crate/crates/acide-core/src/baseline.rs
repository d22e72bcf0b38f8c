use crate::model::StreamParams;

/// Base station bandwidth for `n` consumers without peer exchange.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Baselines {
    /// One copy of the package per consumer: `n * S/T`.
    pub unicast: f64,
    /// One copy for everybody: `S/T`.
    pub multicast: f64,
}

pub fn baseline_bandwidths(n: usize, stream: &StreamParams) -> Baselines {
    let livestream = stream.livestream_bandwidth();
    Baselines {
        unicast: n as f64 * livestream,
        multicast: livestream,
    }
}
