//! Low-rank adapter parameter accounting.

use serde::{Deserialize, Serialize};

/// One adapted weight shape, repeated `count` times across the model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdaptedMatrix {
    pub name: String,
    pub rows: u64,
    pub cols: u64,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoraLayerSpec {
    pub matrices: Vec<AdaptedMatrix>,
    pub rank: u64,
    pub base_param_total: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("LoRA spec: {0} must be positive")]
pub struct LoraSpecError(pub String);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoraCount {
    pub added_params: u64,
    pub fraction_of_base: f64,
}

impl LoraLayerSpec {
    pub fn validate(&self) -> Result<(), LoraSpecError> {
        if self.rank == 0 {
            return Err(LoraSpecError("rank".into()));
        }
        if self.base_param_total == 0 {
            return Err(LoraSpecError("base_param_total".into()));
        }
        for m in &self.matrices {
            if m.rows == 0 || m.cols == 0 || m.count == 0 {
                return Err(LoraSpecError(format!("every dimension of `{}`", m.name)));
            }
        }
        Ok(())
    }

    /// Matrices of both specs under `self`'s rank and base total.
    pub fn concat(&self, other: &Self) -> Self {
        let mut matrices = self.matrices.clone();
        matrices.extend(other.matrices.iter().cloned());
        Self {
            matrices,
            rank: self.rank,
            base_param_total: self.base_param_total,
        }
    }

    pub fn with_rank(&self, rank: u64) -> Self {
        Self { rank, ..self.clone() }
    }
}

/// Σ count · r · (rows + cols), and its share of the base model.
pub fn lora_param_count(spec: &LoraLayerSpec) -> Result<LoraCount, LoraSpecError> {
    spec.validate()?;
    let added_params = spec
        .matrices
        .iter()
        .map(|m| m.count * spec.rank * (m.rows + m.cols))
        .sum();
    Ok(LoraCount {
        added_params,
        fraction_of_base: added_params as f64 / spec.base_param_total as f64,
    })
}

/// Parameter total of Llama 3.1 8B (embeddings and LM head included).
pub const LLAMA31_8B_PARAMS: u64 = 8_030_261_248;

/// Every attention and feed-forward projection of a Llama 3.1 8B class
/// model: 32 layers, hidden 4096, 8 KV heads of width 128, MLP 14336.
pub fn llama31_8b_all_projections(rank: u64) -> LoraLayerSpec {
    let m = |name: &str, rows, cols| AdaptedMatrix {
        name: name.into(),
        rows,
        cols,
        count: 32,
    };
    LoraLayerSpec {
        matrices: vec![
            m("q_proj", 4096, 4096),
            m("k_proj", 4096, 1024),
            m("v_proj", 4096, 1024),
            m("o_proj", 4096, 4096),
            m("gate_proj", 4096, 14336),
            m("up_proj", 4096, 14336),
            m("down_proj", 14336, 4096),
        ],
        rank,
        base_param_total: LLAMA31_8B_PARAMS,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn one(rows: u64, cols: u64, rank: u64) -> LoraLayerSpec {
        LoraLayerSpec {
            matrices: vec![AdaptedMatrix {
                name: "w".into(),
                rows,
                cols,
                count: 1,
            }],
            rank,
            base_param_total: 1_000,
        }
    }

    #[test]
    fn direct_formula() {
        assert_eq!(lora_param_count(&one(4, 6, 2)).unwrap().added_params, 20);
        assert!(lora_param_count(&one(0, 6, 2)).is_err());
        assert!(lora_param_count(&one(4, 6, 0)).is_err());
    }

    #[test]
    fn llama_enumeration() {
        let c = lora_param_count(&llama31_8b_all_projections(64)).unwrap();
        // Per layer: 64 · (8192 + 5120 + 5120 + 8192 + 3 · 18432)
        assert_eq!(c.added_params, 32 * 64 * (8192 + 5120 + 5120 + 8192 + 3 * 18432));
        assert_eq!(c.added_params, 167_772_160);
    }

    fn matrix() -> impl Strategy<Value = AdaptedMatrix> {
        (1u64..5000, 1u64..5000, 1u64..64).prop_map(|(rows, cols, count)| AdaptedMatrix {
            name: "m".into(),
            rows,
            cols,
            count,
        })
    }

    fn spec() -> impl Strategy<Value = LoraLayerSpec> {
        (prop::collection::vec(matrix(), 0..8), 1u64..256).prop_map(|(matrices, rank)| LoraLayerSpec {
            matrices,
            rank,
            base_param_total: 8_000_000_000,
        })
    }

    proptest! {
        #[test]
        fn additive_over_concatenation(a in spec(), b in spec()) {
            let b = b.with_rank(a.rank);
            let joined = lora_param_count(&a.concat(&b)).unwrap().added_params;
            prop_assert_eq!(
                joined,
                lora_param_count(&a).unwrap().added_params + lora_param_count(&b).unwrap().added_params
            );
        }

        #[test]
        fn linear_in_rank(a in spec(), k in 1u64..8) {
            let scaled = lora_param_count(&a.with_rank(a.rank * k)).unwrap().added_params;
            prop_assert_eq!(scaled, k * lora_param_count(&a).unwrap().added_params);
        }
    }
}
