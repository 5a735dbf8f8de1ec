use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::motif::{MixRecipe, MotifSemantics};
use crate::neural::OptimizerConfig;

/// Architecture and training hyperparameters.
///
/// Defaults follow the usual two-layer GCN setting: width 16, learning rate
/// 0.01, dropout 0.5, weight decay 5e-4 on the first layer, at most 200
/// epochs with patience 10 on validation loss.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    /// Graph-convolution layers.
    pub h1: usize,
    /// Perceptron layers after the convolutions.
    pub h2: usize,
    pub hidden_dim: usize,
    pub recipe: MixRecipe,
    pub semantics: MotifSemantics,
    pub optimizer: OptimizerConfig,
    pub max_epochs: usize,
    pub patience: usize,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            h1: 2,
            h2: 0,
            hidden_dim: 16,
            recipe: MixRecipe::edge_only(),
            semantics: MotifSemantics::CoOccurrence,
            optimizer: OptimizerConfig::default(),
            max_epochs: 200,
            patience: 10,
            seed: 0,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.h1 == 0 {
            return Err(Error::Config("h1 must be at least 1".into()));
        }
        if self.hidden_dim == 0 {
            return Err(Error::Config("hidden_dim must be at least 1".into()));
        }
        if self.max_epochs == 0 {
            return Err(Error::Config("max_epochs must be at least 1".into()));
        }
        self.optimizer.validate()
    }

    /// Layer shapes `(in, out)` for `in_dim` features and `n_classes` outputs.
    pub fn layer_dims(&self, in_dim: usize, n_classes: usize) -> Vec<(usize, usize)> {
        let depth = self.h1 + self.h2;
        (0..depth)
            .map(|k| {
                let i = if k == 0 { in_dim } else { self.hidden_dim };
                let o = if k + 1 == depth { n_classes } else { self.hidden_dim };
                (i, o)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dims_for_two_gcn_one_mlp() {
        let c = ModelConfig {
            h1: 2,
            h2: 1,
            ..ModelConfig::default()
        };
        assert_eq!(c.layer_dims(1433, 7), vec![(1433, 16), (16, 16), (16, 7)]);
    }

    #[test]
    fn dims_for_single_layer() {
        let c = ModelConfig {
            h1: 1,
            h2: 0,
            ..ModelConfig::default()
        };
        assert_eq!(c.layer_dims(3703, 6), vec![(3703, 6)]);
    }

    #[test]
    fn validation() {
        assert!(ModelConfig::default().validate().is_ok());
        let bad = ModelConfig {
            h1: 0,
            ..ModelConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = serde_json::from_str::<ModelConfig>(r#"{"h1": 1, "hiden_dim": 4}"#).unwrap_err();
        assert!(err.to_string().contains("hiden_dim"));
    }
}
