//! JSON excitation:
//!
//! ```json
//! {
//!   "format": 1,
//!   "grid": {"t0": 0.0, "t_end": 10.0, "dt": 0.001},
//!   "boundary": {
//!     "1": {"kind": "sin", "amplitude": 1.0, "omega": 6.283185307179586},
//!     "12": {"kind": "constant", "value": 0.0}
//!   },
//!   "injections": {"5": {"kind": "constant", "value": 1.0}}
//! }
//! ```
//!
//! `t0` defaults to 0 and `dt` to a ten-thousandth of the horizon.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{check_format, IoError, FORMAT_VERSION};
use crate::graph::VertexPartition;
use crate::scalar::Scalar;
use crate::simulation::{Excitation, Grid, Signal};

/// Default number of steps when `dt` is omitted.
pub const DEFAULT_STEPS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridEntry {
    #[serde(default)]
    pub t0: f64,
    pub t_end: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExcitationDocument {
    pub format: u32,
    pub grid: GridEntry,
    pub boundary: BTreeMap<String, Signal<f64>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub injections: BTreeMap<String, Signal<f64>>,
}

impl ExcitationDocument {
    pub fn from_json(text: &str) -> Result<Self, IoError> {
        serde_json::from_str(text).map_err(IoError::from_json)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("excitation serializes") + "\n"
    }

    pub fn new<T: Scalar>(exc: &Excitation<T>, grid: &Grid<T>) -> Self {
        let keyed = |m: &BTreeMap<usize, Signal<T>>| {
            m.iter()
                .map(|(v, s)| (v.to_string(), s.cast::<f64>()))
                .collect()
        };
        Self {
            format: FORMAT_VERSION,
            grid: GridEntry {
                t0: grid.t0.as_f64(),
                t_end: grid.t_end.as_f64(),
                dt: Some(grid.dt.as_f64()),
            },
            boundary: keyed(&exc.boundary),
            injections: keyed(&exc.injections),
        }
    }

    pub fn grid<T: Scalar>(&self) -> Result<Grid<T>, IoError> {
        let g = &self.grid;
        let (t0, t_end) = (T::lit(g.t0), T::lit(g.t_end));
        let grid = match g.dt {
            Some(dt) => Grid::new(t0, t_end, T::lit(dt)),
            None => Grid::with_steps(t0, t_end, DEFAULT_STEPS),
        };
        grid.map_err(|e| IoError::Schema(format!("grid: {e}")))
    }

    /// Excitation checked against the roles in `partition`.
    pub fn excitation<T: Scalar>(
        &self,
        partition: &VertexPartition,
    ) -> Result<Excitation<T>, IoError> {
        check_format(self.format)?;
        let keyed = |section: &str, m: &BTreeMap<String, Signal<f64>>| {
            m.iter()
                .map(|(k, s)| {
                    k.trim()
                        .parse::<usize>()
                        .map(|v| (v, s.cast::<T>()))
                        .map_err(|_| {
                            IoError::Schema(format!("{section}: key `{k}` is not a vertex id"))
                        })
                })
                .collect::<Result<BTreeMap<_, _>, _>>()
        };
        let exc = Excitation {
            boundary: keyed("boundary", &self.boundary)?,
            injections: keyed("injections", &self.injections)?,
        };
        exc.check(partition)
            .map_err(|e| IoError::Schema(e.to_string()))?;
        Ok(exc)
    }
}
