use std::fmt;
use std::path::PathBuf;

use serde::de::{self, Deserializer, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::potentials::Minibatch;
use crate::samplers::SamplerKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExperimentKind {
    #[serde(rename = "trunc-gauss")]
    TruncGauss,
    #[serde(rename = "wishart-mean-1d")]
    WishartMean1d,
    #[serde(rename = "wishart-precision")]
    WishartPrecision,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::TruncGauss => "trunc-gauss",
            ExperimentKind::WishartMean1d => "wishart-mean-1d",
            ExperimentKind::WishartPrecision => "wishart-precision",
        }
    }
}

/// `"full"` or a positive integer in JSON.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MinibatchSetting(pub Minibatch);

impl Serialize for MinibatchSetting {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0 {
            Minibatch::Full => s.serialize_str("full"),
            Minibatch::Size(b) => s.serialize_u64(b as u64),
        }
    }
}

impl<'de> Deserialize<'de> for MinibatchSetting {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;

        impl Visitor<'_> for V {
            type Value = MinibatchSetting;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a positive integer or \"full\"")
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Self::Value, E> {
                if v == 0 {
                    return Err(E::custom("minibatch must be at least 1"));
                }
                Ok(MinibatchSetting(Minibatch::Size(v as usize)))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Self::Value, E> {
                if v <= 0 {
                    return Err(E::custom("minibatch must be at least 1"));
                }
                self.visit_u64(v as u64)
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Self::Value, E> {
                if v == "full" {
                    Ok(MinibatchSetting(Minibatch::Full))
                } else {
                    Err(E::custom(format!(
                        "unknown minibatch {v:?}, expected an integer or \"full\""
                    )))
                }
            }
        }

        d.deserialize_any(V)
    }
}

fn one() -> usize {
    1
}

fn default_bins() -> usize {
    60
}

fn default_replicates() -> usize {
    200
}

/// JSON run configuration. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: ExperimentKind,
    pub sampler: SamplerKind,
    pub gamma: f64,
    pub num_steps: usize,
    #[serde(default)]
    pub burn_in: usize,
    #[serde(default)]
    pub minibatch: MinibatchSetting,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub myula_lambda: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub record_every: usize,
    #[serde(default)]
    pub record_duals: bool,
    /// Chains for the cross-sectional snapshots; 1 means snapshots are
    /// taken from the running ergodic mean of a single chain.
    #[serde(default = "one")]
    pub num_chains: usize,
    #[serde(default)]
    pub snapshot_steps: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,

    /// Wishart experiments: data count (default 50).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Wishart experiments: matrix side (default 1).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    /// Wishart experiments: prior degrees of freedom (default d + 4).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    #[serde(default)]
    pub data_seed: u64,

    /// Truncated Gaussian: mean and interval (defaults 0 and [-1, 1]).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trunc_mean: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trunc_lo: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trunc_hi: Option<f64>,

    /// Weights of an added stochastic `w_ξ ‖x‖₁` term (SPLA only).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub spla_l1_weights: Vec<f64>,

    #[serde(default = "default_bins")]
    pub histogram_bins: usize,
    #[serde(default = "default_replicates")]
    pub bootstrap_replicates: usize,
}

impl RunConfig {
    /// A config with every optional field at its default.
    pub fn minimal(
        experiment: ExperimentKind,
        sampler: SamplerKind,
        gamma: f64,
        num_steps: usize,
    ) -> Self {
        Self {
            experiment,
            sampler,
            gamma,
            num_steps,
            burn_in: 0,
            minibatch: MinibatchSetting::default(),
            myula_lambda: None,
            seed: 0,
            record_every: 1,
            record_duals: false,
            num_chains: 1,
            snapshot_steps: Vec::new(),
            output_dir: None,
            n: None,
            d: None,
            nu: None,
            data_seed: 0,
            trunc_mean: None,
            trunc_lo: None,
            trunc_hi: None,
            spla_l1_weights: Vec::new(),
            histogram_bins: default_bins(),
            bootstrap_replicates: default_replicates(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minibatch_forms() {
        let base = r#"{"experiment":"trunc-gauss","sampler":"psgla","gamma":0.1,"num_steps":10"#;
        let c: RunConfig = serde_json::from_str(&format!("{base}}}")).unwrap();
        assert_eq!(c.minibatch.0, Minibatch::Size(1));
        let c: RunConfig =
            serde_json::from_str(&format!("{base},\"minibatch\":\"full\"}}")).unwrap();
        assert_eq!(c.minibatch.0, Minibatch::Full);
        let c: RunConfig = serde_json::from_str(&format!("{base},\"minibatch\":8}}")).unwrap();
        assert_eq!(c.minibatch.0, Minibatch::Size(8));
        assert!(serde_json::from_str::<RunConfig>(&format!("{base},\"minibatch\":0}}")).is_err());
        assert!(
            serde_json::from_str::<RunConfig>(&format!("{base},\"minibatch\":\"half\"}}")).is_err()
        );
    }

    #[test]
    fn rejects_unknown_keys() {
        let s = r#"{"experiment":"trunc-gauss","sampler":"psgla","gamma":0.1,"num_steps":10,"gamam":1}"#;
        let err = serde_json::from_str::<RunConfig>(s)
            .unwrap_err()
            .to_string();
        assert!(err.contains("gamam"), "{err}");
    }

    #[test]
    fn round_trips() {
        let mut c =
            RunConfig::minimal(ExperimentKind::WishartMean1d, SamplerKind::Myula, 0.01, 100);
        c.myula_lambda = Some(0.1);
        c.minibatch = MinibatchSetting(Minibatch::Full);
        let s = serde_json::to_string(&c).unwrap();
        assert!(s.contains("\"wishart-mean-1d\""));
        assert_eq!(serde_json::from_str::<RunConfig>(&s).unwrap(), c);
    }
}
