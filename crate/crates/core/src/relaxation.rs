use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};

/// Phenomenological lifetimes in seconds.
///
/// `t2` defaults to `t1` and `t_coherence` (singlet–triplet coherence) to
/// `t1 / 3`. `lock_lifetime`, when set, damps the whole deviation uniformly
/// during spin-locks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RelaxationRepr", into = "RelaxationRepr")]
pub struct RelaxationParams {
    pub t1: f64,
    pub t2: f64,
    pub ts: f64,
    pub t_coherence: f64,
    pub lock_lifetime: Option<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RelaxationRepr {
    t1: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    t2: Option<f64>,
    ts: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    t_coherence: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lock_lifetime: Option<f64>,
}

impl RelaxationParams {
    pub fn new(t1: f64, ts: f64) -> Result<Self> {
        Self::with_all(t1, t1, ts, t1 / 3.0, None)
    }

    pub fn with_all(
        t1: f64,
        t2: f64,
        ts: f64,
        t_coherence: f64,
        lock_lifetime: Option<f64>,
    ) -> Result<Self> {
        require_positive("t1", t1)?;
        require_positive("t2", t2)?;
        require_positive("ts", ts)?;
        require_positive("t_coherence", t_coherence)?;
        if let Some(t) = lock_lifetime {
            require_positive("lock_lifetime", t)?;
        }
        Ok(Self { t1, t2, ts, t_coherence, lock_lifetime })
    }

    pub fn with_lock_lifetime(mut self, lifetime: f64) -> Result<Self> {
        require_positive("lock_lifetime", lifetime)?;
        self.lock_lifetime = Some(lifetime);
        Ok(self)
    }
}

impl TryFrom<RelaxationRepr> for RelaxationParams {
    type Error = Error;

    fn try_from(r: RelaxationRepr) -> Result<Self> {
        Self::with_all(
            r.t1,
            r.t2.unwrap_or(r.t1),
            r.ts,
            r.t_coherence.unwrap_or(r.t1 / 3.0),
            r.lock_lifetime,
        )
    }
}

impl From<RelaxationParams> for RelaxationRepr {
    fn from(p: RelaxationParams) -> Self {
        RelaxationRepr {
            t1: p.t1,
            t2: Some(p.t2),
            ts: p.ts,
            t_coherence: Some(p.t_coherence),
            lock_lifetime: p.lock_lifetime,
        }
    }
}
