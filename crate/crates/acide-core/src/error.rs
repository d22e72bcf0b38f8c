use alloc::string::String;
use core::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An operation that needs at least one peer got none.
    EmptyCluster,
    /// A peer was given a non-positive or non-finite bandwidth.
    InvalidPeer {
        id: String,
        upload: f64,
        download: f64,
    },
    /// Package size or delay bound is non-positive or non-finite.
    InvalidStream {
        package_size: f64,
        delay_bound: f64,
    },
    /// `T * sum(u) - (n - 1) * S <= 0`: no finite allocation delivers the
    /// package within the delay bound.
    Infeasible {
        n: usize,
        upload_sum: f64,
    },
    /// The budget is below the livestream bandwidth, so not even one peer fits.
    InsufficientBudget {
        budget: f64,
        livestream: f64,
    },
    InvalidBudget {
        budget: f64,
    },
    /// A bandwidth below `S/T` was passed where the admitted-peer bound needs
    /// `bw >= S/T`.
    BelowLivestream {
        bandwidth: f64,
        livestream: f64,
    },
    /// Exhaustive admission refuses instances with more candidates than this.
    TooManyCandidates {
        n: usize,
        max: usize,
    },
    /// A plan whose vectors disagree in length or hold non-positive entries.
    PlanMismatch(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::EmptyCluster => write!(f, "cluster has no peers"),
            Error::InvalidPeer { id, upload, download } => write!(
                f,
                "peer {id}: bandwidths must be positive and finite (upload {upload}, download {download})"
            ),
            Error::InvalidStream { package_size, delay_bound } => write!(
                f,
                "package size and delay bound must be positive (S = {package_size}, T = {delay_bound})"
            ),
            Error::Infeasible { n, upload_sum } => write!(
                f,
                "cluster of {n} peers with total upload {upload_sum} bps cannot meet the delay bound"
            ),
            Error::InsufficientBudget { budget, livestream } => write!(
                f,
                "budget {budget} bps is below the livestream bandwidth {livestream} bps"
            ),
            Error::InvalidBudget { budget } => write!(f, "budget must be positive, got {budget}"),
            Error::BelowLivestream { bandwidth, livestream } => write!(
                f,
                "bandwidth {bandwidth} bps is below the livestream bandwidth {livestream} bps"
            ),
            Error::TooManyCandidates { n, max } => {
                write!(f, "{n} candidates exceed the exhaustive search limit of {max}")
            }
            Error::PlanMismatch(what) => write!(f, "inconsistent allocation plan: {what}"),
        }
    }
}

impl core::error::Error for Error {}
