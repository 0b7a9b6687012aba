//! Analytical FLOPs and KV-cache accounting for a vision-language
//! pipeline: vision tower, projector, the frequency compressor, and the
//! language-model prefill.
//!
//! Counting conventions (every formula below is auditable against these):
//! - one multiply-accumulate = 2 FLOPs; a matmul `[s,a]x[a,b]` costs
//!   `2*s*a*b`;
//! - attention softmax and normalization layers are excluded (sub-1% and
//!   tool-dependent);
//! - the vision tower's patch-embedding convolution is modeled as one
//!   hidden x hidden matmul-equivalent over the patch tokens; its CLS
//!   token is ignored;
//! - the compressor's transform cost uses 5 real ops per point per FFT
//!   stage (a complex radix-2 butterfly is 10 real ops per 2 points),
//!   with the per-point rotation/normalize work tracked as a separate
//!   lower-order term.

use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};

/// Dense-transformer shape parameters for the language model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransformerCostConfig {
    pub num_layers: u64,
    pub hidden_size: u64,
    pub num_attention_heads: u64,
    pub head_dim: u64,
    pub num_kv_heads: u64,
    pub mlp_intermediate_size: u64,
    pub vocab_size: u64,
    /// Three MLP matmuls (gate/up/down) instead of two.
    pub gated_mlp: bool,
    pub kv_bytes_per_element: u64,
}

impl TransformerCostConfig {
    /// LLaVA-v1.5-7B backbone (Vicuna-7B): 32 layers, d=4096, 32 heads of
    /// 128, SwiGLU MLP of 11008, 32000 vocab, fp16 KV cache.
    pub fn llava_v15_7b() -> Self {
        TransformerCostConfig {
            num_layers: 32,
            hidden_size: 4096,
            num_attention_heads: 32,
            head_dim: 128,
            num_kv_heads: 32,
            mlp_intermediate_size: 11008,
            vocab_size: 32000,
            gated_mlp: true,
            kv_bytes_per_element: 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("num_layers", self.num_layers),
            ("hidden_size", self.hidden_size),
            ("num_attention_heads", self.num_attention_heads),
            ("head_dim", self.head_dim),
            ("num_kv_heads", self.num_kv_heads),
            ("mlp_intermediate_size", self.mlp_intermediate_size),
            ("vocab_size", self.vocab_size),
            ("kv_bytes_per_element", self.kv_bytes_per_element),
        ];
        for (name, v) in fields {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        if self.num_attention_heads * self.head_dim != self.hidden_size {
            return Err(Error::Config(format!(
                "num_attention_heads * head_dim = {} does not equal hidden_size = {}",
                self.num_attention_heads * self.head_dim,
                self.hidden_size
            )));
        }
        Ok(())
    }

    /// Weight count of the matmuls the prefill model touches (attention
    /// and MLP projections plus the LM head; embeddings excluded).
    pub fn param_count(&self) -> u64 {
        let d = self.hidden_size;
        let kv_dim = self.num_kv_heads * self.head_dim;
        let mlp_matmuls = if self.gated_mlp { 3 } else { 2 };
        let per_layer =
            d * d + 2 * d * kv_dim + d * d + mlp_matmuls * d * self.mlp_intermediate_size;
        self.num_layers * per_layer + d * self.vocab_size
    }
}

/// Vision tower, projector, and compressor shape parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VisionPipelineCostConfig {
    pub vit_layers: u64,
    pub vit_hidden: u64,
    pub vit_intermediate: u64,
    /// N^2 patch tokens out of the vision tower.
    pub num_patches: u64,
    /// Widths of the projector MLP, input first: [in, mid, ..., out].
    pub projector_dims: Vec<u64>,
    pub ffc_enabled: bool,
    /// Kept grid side C; required when `ffc_enabled`.
    pub output_side: Option<u64>,
}

impl VisionPipelineCostConfig {
    /// CLIP ViT-L/336 tower with the two-layer 1024->4096->4096 projector.
    /// `output_side` of `Some(c)` enables the compressor at that side.
    pub fn clip_vit_l_336(output_side: Option<u64>) -> Self {
        VisionPipelineCostConfig {
            vit_layers: 24,
            vit_hidden: 1024,
            vit_intermediate: 4096,
            num_patches: 576,
            projector_dims: vec![1024, 4096, 4096],
            ffc_enabled: output_side.is_some(),
            output_side,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("vit_layers", self.vit_layers),
            ("vit_hidden", self.vit_hidden),
            ("vit_intermediate", self.vit_intermediate),
            ("num_patches", self.num_patches),
        ];
        for (name, v) in fields {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        if self.projector_dims.len() < 2 {
            return Err(Error::Config(
                "projector_dims needs at least input and output widths".into(),
            ));
        }
        if self.projector_dims.contains(&0) {
            return Err(Error::Config("projector_dims must be positive".into()));
        }
        if self.ffc_enabled {
            let c = self
                .output_side
                .ok_or_else(|| Error::Config("C is required when ffc_enabled".into()))?;
            let n = self.grid_side()?;
            if c < 1 || c > n {
                return Err(Error::Config(format!(
                    "C = {c} must satisfy 1 <= C <= {n}"
                )));
            }
        }
        Ok(())
    }

    /// N, from N^2 patches; the compressor needs a square grid.
    pub fn grid_side(&self) -> Result<u64> {
        let side = (self.num_patches as f64).sqrt().round() as u64;
        if side * side != self.num_patches {
            return Err(Error::Config(format!(
                "num_patches = {} is not a perfect square",
                self.num_patches
            )));
        }
        Ok(side)
    }

    /// Vision tokens handed to the projector and the language model.
    pub fn tokens_out(&self) -> u64 {
        if self.ffc_enabled {
            let c = self.output_side.unwrap_or(0);
            c * c
        } else {
            self.num_patches
        }
    }
}

/// Cost split of one pipeline configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CostBreakdown {
    pub flops_vision: u64,
    pub flops_projector: u64,
    pub flops_ffc: u64,
    pub flops_llm_prefill: u64,
    pub flops_total: u64,
    pub kv_cache_bytes: u64,
}

impl CostBreakdown {
    /// `(label, flops, share-of-total)` for each component.
    pub fn shares(&self) -> [(&'static str, u64, f64); 4] {
        let total = self.flops_total.max(1) as f64;
        [
            ("vision", self.flops_vision, self.flops_vision as f64 / total),
            (
                "projector",
                self.flops_projector,
                self.flops_projector as f64 / total,
            ),
            ("ffc", self.flops_ffc, self.flops_ffc as f64 / total),
            (
                "llm_prefill",
                self.flops_llm_prefill,
                self.flops_llm_prefill as f64 / total,
            ),
        ]
    }
}

/// `1 - total/total_baseline`, as a fraction.
pub fn flops_reduction(baseline: &CostBreakdown, compressed: &CostBreakdown) -> f64 {
    1.0 - compressed.flops_total as f64 / baseline.flops_total as f64
}

// ---------------------------------------------------------------------------
// Prefill FLOPs and KV cache
// ---------------------------------------------------------------------------

/// Prefill FLOPs of the language model over `seq_len` tokens.
///
/// Per layer:
/// - attention projections `2*s*d*(d + 2*num_kv_heads*head_dim + d)`
///   (query, key, value, output);
/// - attention score and value matmuls `4*s^2*d`;
/// - MLP `(3 if gated else 2) * 2*s*d*mlp_intermediate_size`.
///
/// Plus the LM head `2*s*d*vocab_size` once.
pub fn llm_prefill_flops(cfg: &TransformerCostConfig, seq_len: u64) -> u64 {
    let s = seq_len;
    let d = cfg.hidden_size;
    let kv_dim = cfg.num_kv_heads * cfg.head_dim;
    let attn_proj = 2 * s * d * (d + 2 * kv_dim + d);
    let attn_scores = 4 * s * s * d;
    let mlp_matmuls: u64 = if cfg.gated_mlp { 3 } else { 2 };
    let mlp = mlp_matmuls * 2 * s * d * cfg.mlp_intermediate_size;
    cfg.num_layers * (attn_proj + attn_scores + mlp) + 2 * s * d * cfg.vocab_size
}

/// Bytes of key/value activations cached for `seq_len` tokens:
/// `2 * layers * num_kv_heads * head_dim * seq_len * bytes_per_element`.
pub fn kv_cache_bytes(cfg: &TransformerCostConfig, seq_len: u64) -> u64 {
    2 * cfg.num_layers
        * cfg.num_kv_heads
        * cfg.head_dim
        * seq_len
        * cfg.kv_bytes_per_element
}

/// Vision tower prefill over the patch tokens (patch embedding modeled as
/// one hidden x hidden matmul-equivalent; CLS and layernorms ignored).
fn vision_tower_flops(vcfg: &VisionPipelineCostConfig) -> u64 {
    let s = vcfg.num_patches;
    let d = vcfg.vit_hidden;
    let patch_embed = 2 * s * d * d;
    let attn_proj = 2 * s * d * (4 * d);
    let attn_scores = 4 * s * s * d;
    let mlp = 2 * 2 * s * d * vcfg.vit_intermediate;
    patch_embed + vcfg.vit_layers * (attn_proj + attn_scores + mlp)
}

fn projector_flops(vcfg: &VisionPipelineCostConfig, tokens: u64) -> u64 {
    vcfg.projector_dims
        .windows(2)
        .map(|w| 2 * tokens * w[0] * w[1])
        .sum()
}

/// Full pipeline: vision tower over N^2 patches, optional compressor,
/// projector over the surviving tokens, LLM prefill over those tokens
/// plus `text_tokens`. Parts always sum exactly to the total.
pub fn pipeline_flops(
    tcfg: &TransformerCostConfig,
    vcfg: &VisionPipelineCostConfig,
    text_tokens: u64,
) -> Result<CostBreakdown> {
    tcfg.validate()?;
    vcfg.validate()?;

    let flops_vision = vision_tower_flops(vcfg);
    let vision_tokens = vcfg.tokens_out();
    let flops_ffc = if vcfg.ffc_enabled {
        let n = vcfg.grid_side()?;
        let c = vcfg.output_side.expect("validated");
        let est = ffc_op_count(n, c, vcfg.vit_hidden, 1)?;
        (est.ops + est.linear_ops).round() as u64
    } else {
        0
    };
    let flops_projector = projector_flops(vcfg, vision_tokens);
    let flops_llm_prefill = llm_prefill_flops(tcfg, vision_tokens + text_tokens);

    Ok(CostBreakdown {
        flops_vision,
        flops_projector,
        flops_ffc,
        flops_llm_prefill,
        flops_total: flops_vision + flops_projector + flops_ffc + flops_llm_prefill,
        kv_cache_bytes: kv_cache_bytes(tcfg, vision_tokens + text_tokens),
    })
}

// ---------------------------------------------------------------------------
// Module complexity estimates
// ---------------------------------------------------------------------------

/// Token-compression module families whose dominant cost is compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModuleKind {
    Mlp,
    SelfAttention,
    QueryTransformer,
    Ffc,
}

impl fmt::Display for ModuleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ModuleKind::Mlp => "mlp",
            ModuleKind::SelfAttention => "self_attention",
            ModuleKind::QueryTransformer => "query_transformer",
            ModuleKind::Ffc => "ffc",
        };
        f.write_str(s)
    }
}

/// Dominant-term operation count of one module at concrete shapes, with
/// the generating formula alongside.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexityEstimate {
    pub module_kind: ModuleKind,
    pub symbolic: String,
    /// Dominant-term count.
    pub ops: f64,
    /// Lower-order terms tracked separately (rotation/normalize work of
    /// the transform path); zero for the generic table rows.
    pub linear_ops: f64,
}

/// Real ops per point per FFT stage: a complex radix-2 butterfly costs
/// 10 real ops per 2 points.
pub const FFT_OPS_PER_POINT_PER_STAGE: f64 = 5.0;

/// Rotation (2 mul + 1 add) plus normalization (1 mul) per point, per
/// 1D transform pass; the 2D transform makes two passes per point.
const LINEAR_OPS_PER_POINT: f64 = 8.0;

/// Operation count of the compressor: forward transform over the N x N
/// grid plus inverse over the C x C grid, per hidden channel and batch:
/// `5 * B * h * (N^2*log2(N) + C^2*log2(C))`, with the per-point
/// rotation/reorder work reported in `linear_ops`.
pub fn ffc_op_count(n: u64, c: u64, hidden: u64, batch: u64) -> Result<ComplexityEstimate> {
    if n < 1 || c < 1 || hidden < 1 || batch < 1 {
        return Err(Error::Parameter(
            "ffc_op_count requires positive shapes".into(),
        ));
    }
    if c > n {
        return Err(Error::Shape(format!("need C <= N, got C={c}, N={n}")));
    }
    let (nf, cf, hf, bf) = (n as f64, c as f64, hidden as f64, batch as f64);
    let ops = FFT_OPS_PER_POINT_PER_STAGE
        * bf
        * hf
        * (nf * nf * nf.log2() + cf * cf * cf.log2());
    let linear_ops = LINEAR_OPS_PER_POINT * bf * hf * (nf * nf + cf * cf);
    Ok(ComplexityEstimate {
        module_kind: ModuleKind::Ffc,
        symbolic: format!(
            "5 * B * h_v * (N^2 log2 N + C^2 log2 C) with B={batch}, h_v={hidden}, N={n}, C={c}"
        ),
        ops,
        linear_ops,
    })
}

/// Dominant-term count of a module processing a `(B, N^2, h_v)` feature
/// batch, unit constants:
/// mlp `B*h_v^2*N^2`, self-attention `B*h_v*N^4`,
/// query transformer `B*h_v*N^2*M`, ffc `B*h_v*N^2*log2(N)`.
pub fn module_complexity(
    kind: ModuleKind,
    batch: u64,
    grid_side: u64,
    hidden: u64,
    num_queries: Option<u64>,
) -> Result<ComplexityEstimate> {
    if batch < 1 || grid_side < 1 || hidden < 1 {
        return Err(Error::Parameter(
            "module_complexity requires positive shapes".into(),
        ));
    }
    let (b, n, h) = (batch as f64, grid_side as f64, hidden as f64);
    let tokens = n * n;
    let (ops, symbolic) = match kind {
        ModuleKind::Mlp => (b * h * h * tokens, format!("B*h_v^2*N^2 = {batch}*{hidden}^2*{grid_side}^2")),
        ModuleKind::SelfAttention => (
            b * h * tokens * tokens,
            format!("B*h_v*N^4 = {batch}*{hidden}*{grid_side}^4"),
        ),
        ModuleKind::QueryTransformer => {
            let m = num_queries.ok_or_else(|| {
                Error::Parameter("query_transformer requires the query count M".into())
            })?;
            (
                b * h * tokens * m as f64,
                format!("B*h_v*N^2*M = {batch}*{hidden}*{grid_side}^2*{m}"),
            )
        }
        ModuleKind::Ffc => (
            b * h * tokens * n.log2(),
            format!("B*h_v*N^2*log2(N) = {batch}*{hidden}*{grid_side}^2*log2({grid_side})"),
        ),
    };
    Ok(ComplexityEstimate {
        module_kind: kind,
        symbolic,
        ops,
        linear_ops: 0.0,
    })
}

// ---------------------------------------------------------------------------
// Compression ratio
// ---------------------------------------------------------------------------

/// `100 * (1 - out/in)`.
pub fn compression_ratio_pct(tokens_in: u64, tokens_out: u64) -> Result<f64> {
    if tokens_in == 0 {
        return Err(Error::Parameter("tokens_in must be positive".into()));
    }
    if tokens_out > tokens_in {
        return Err(Error::Parameter(format!(
            "tokens_out = {tokens_out} exceeds tokens_in = {tokens_in}"
        )));
    }
    Ok(100.0 * (1.0 - tokens_out as f64 / tokens_in as f64))
}

/// Render a percentage with one decimal, keeping a second decimal only
/// when the value is exact at two decimals but not at one (so 0.9375
/// prints as "93.75%" while 5/9 prints as "55.6%").
pub fn format_compression_ratio(pct: f64) -> String {
    let at_one = (pct * 10.0).round() / 10.0;
    if (at_one - pct).abs() < 1e-9 {
        return format!("{pct:.1}%");
    }
    let at_two = (pct * 100.0).round() / 100.0;
    if (at_two - pct).abs() < 1e-9 {
        return format!("{pct:.2}%");
    }
    format!("{pct:.1}%")
}

/// Ratio of two token counts rendered per [`format_compression_ratio`].
pub fn compression_ratio(tokens_in: u64, tokens_out: u64) -> Result<String> {
    Ok(format_compression_ratio(compression_ratio_pct(
        tokens_in, tokens_out,
    )?))
}

// ---------------------------------------------------------------------------
// Config file parsing
// ---------------------------------------------------------------------------

/// A parsed cost-config file: transformer shapes, optional vision
/// pipeline shapes, and the text-token count used in comparisons.
#[derive(Debug, Clone, PartialEq)]
pub struct CostConfig {
    pub transformer: TransformerCostConfig,
    pub vision: Option<VisionPipelineCostConfig>,
    pub text_tokens: u64,
}

pub const DEFAULT_TEXT_TOKENS: u64 = 40;

const TRANSFORMER_KEYS: [&str; 9] = [
    "num_layers",
    "hidden_size",
    "num_attention_heads",
    "head_dim",
    "num_kv_heads",
    "mlp_intermediate_size",
    "vocab_size",
    "gated_mlp",
    "kv_bytes_per_element",
];

const VISION_KEYS: [&str; 7] = [
    "vit_layers",
    "vit_hidden",
    "vit_intermediate",
    "num_patches",
    "projector_dims",
    "ffc_enabled",
    "C",
];

/// Parse the flat `key=value` config format. Lines starting with `#` and
/// blank lines are ignored; unknown or duplicate keys are errors naming
/// the key. Vision keys are optional as a group.
pub fn parse_cost_config(text: &str) -> Result<CostConfig> {
    let mut pairs: Vec<(String, String)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("line {}: expected key=value, got '{line}'", lineno + 1))
        })?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if !TRANSFORMER_KEYS.contains(&key.as_str())
            && !VISION_KEYS.contains(&key.as_str())
            && key != "text_tokens"
        {
            return Err(Error::Config(format!("unknown key '{key}'")));
        }
        if pairs.iter().any(|(k, _)| *k == key) {
            return Err(Error::Config(format!("duplicate key '{key}'")));
        }
        pairs.push((key, value));
    }

    let get = |key: &str| pairs.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str());
    let require = |key: &str| {
        get(key).ok_or_else(|| Error::Config(format!("missing required key '{key}'")))
    };
    let parse_u64 = |key: &str, v: &str| {
        v.parse::<u64>()
            .map_err(|_| Error::Config(format!("key '{key}': invalid unsigned integer '{v}'")))
    };
    let parse_bool = |key: &str, v: &str| match v {
        "true" | "1" => Ok(true),
        "false" | "0" => Ok(false),
        _ => Err(Error::Config(format!("key '{key}': invalid boolean '{v}'"))),
    };

    let transformer = TransformerCostConfig {
        num_layers: parse_u64("num_layers", require("num_layers")?)?,
        hidden_size: parse_u64("hidden_size", require("hidden_size")?)?,
        num_attention_heads: parse_u64(
            "num_attention_heads",
            require("num_attention_heads")?,
        )?,
        head_dim: parse_u64("head_dim", require("head_dim")?)?,
        num_kv_heads: parse_u64("num_kv_heads", require("num_kv_heads")?)?,
        mlp_intermediate_size: parse_u64(
            "mlp_intermediate_size",
            require("mlp_intermediate_size")?,
        )?,
        vocab_size: parse_u64("vocab_size", require("vocab_size")?)?,
        gated_mlp: parse_bool("gated_mlp", require("gated_mlp")?)?,
        kv_bytes_per_element: parse_u64(
            "kv_bytes_per_element",
            require("kv_bytes_per_element")?,
        )?,
    };
    transformer.validate()?;

    let any_vision = VISION_KEYS.iter().any(|k| get(k).is_some());
    let vision = if any_vision {
        let mut projector_dims = Vec::new();
        for part in require("projector_dims")?.split(',') {
            projector_dims.push(parse_u64("projector_dims", part.trim())?);
        }
        let ffc_enabled = parse_bool("ffc_enabled", require("ffc_enabled")?)?;
        let output_side = match get("C") {
            Some(v) => Some(parse_u64("C", v)?),
            None => None,
        };
        let vcfg = VisionPipelineCostConfig {
            vit_layers: parse_u64("vit_layers", require("vit_layers")?)?,
            vit_hidden: parse_u64("vit_hidden", require("vit_hidden")?)?,
            vit_intermediate: parse_u64("vit_intermediate", require("vit_intermediate")?)?,
            num_patches: parse_u64("num_patches", require("num_patches")?)?,
            projector_dims,
            ffc_enabled,
            output_side,
        };
        vcfg.validate()?;
        Some(vcfg)
    } else {
        None
    };

    let text_tokens = match get("text_tokens") {
        Some(v) => parse_u64("text_tokens", v)?,
        None => DEFAULT_TEXT_TOKENS,
    };

    Ok(CostConfig {
        transformer,
        vision,
        text_tokens,
    })
}

pub fn load_cost_config(path: impl AsRef<Path>) -> Result<CostConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_cost_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kv_cache_per_token_llava_fp16() {
        let cfg = TransformerCostConfig::llava_v15_7b();
        assert_eq!(kv_cache_bytes(&cfg, 1), 524_288); // 2*32*4096*2
    }

    #[test]
    fn kv_cache_linear_and_vision_only_reduction() {
        let cfg = TransformerCostConfig::llava_v15_7b();
        let b576 = kv_cache_bytes(&cfg, 576);
        let b36 = kv_cache_bytes(&cfg, 36);
        assert_eq!(b576, 576 * kv_cache_bytes(&cfg, 1));
        let reduction = 1.0 - b36 as f64 / b576 as f64;
        assert_eq!(reduction, 0.9375);
    }

    #[test]
    fn kv_cache_reduction_with_text_context() {
        let cfg = TransformerCostConfig::llava_v15_7b();
        let with = |s| kv_cache_bytes(&cfg, s) as f64;
        let reduction = 1.0 - with(36 + 49) / with(576 + 49);
        assert!((reduction - 0.864).abs() < 1e-12);
    }

    #[test]
    fn single_token_prefill_is_twice_param_count() {
        let cfg = TransformerCostConfig::llava_v15_7b();
        let flops = llm_prefill_flops(&cfg, 1) as f64;
        let two_params = 2.0 * cfg.param_count() as f64;
        assert!((flops / two_params - 1.0).abs() < 0.05, "ratio {}", flops / two_params);
    }

    #[test]
    fn doubling_layers_doubles_per_layer_terms() {
        let cfg = TransformerCostConfig::llava_v15_7b();
        let mut doubled = cfg.clone();
        doubled.num_layers *= 2;
        let s = 200;
        let head = 2 * s * cfg.hidden_size * cfg.vocab_size;
        let single = llm_prefill_flops(&cfg, s) - head;
        let twice = llm_prefill_flops(&doubled, s) - head;
        assert_eq!(twice, 2 * single);
    }

    #[test]
    fn validate_rejects_head_mismatch() {
        let mut cfg = TransformerCostConfig::llava_v15_7b();
        cfg.head_dim = 64;
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn ffc_op_count_frozen_value() {
        // 5 * 1024 * (576*log2(24) + 144*log2(12)), computed once
        // independently and frozen.
        let est = ffc_op_count(24, 12, 1024, 1).unwrap();
        let frozen = 16_164_725.762_658_47;
        assert!(
            (est.ops - frozen).abs() / frozen < 1e-12,
            "got {}, frozen {}",
            est.ops,
            frozen
        );
        assert!(est.linear_ops > 0.0);
    }

    #[test]
    fn ffc_op_count_symmetric_at_equal_sides() {
        let est = ffc_op_count(24, 24, 64, 2).unwrap();
        let single_pass = FFT_OPS_PER_POINT_PER_STAGE * 2.0 * 64.0 * 576.0 * 24f64.log2();
        assert!((est.ops - 2.0 * single_pass).abs() < 1e-6);
    }

    #[test]
    fn ffc_op_count_linear_in_hidden_and_batch() {
        let base = ffc_op_count(24, 12, 512, 1).unwrap();
        let wide = ffc_op_count(24, 12, 1024, 1).unwrap();
        let batched = ffc_op_count(24, 12, 512, 2).unwrap();
        assert!((wide.ops - 2.0 * base.ops).abs() < 1e-6);
        assert!((batched.ops - 2.0 * base.ops).abs() < 1e-6);
    }

    #[test]
    fn ffc_op_count_rejects_c_above_n() {
        assert!(ffc_op_count(12, 24, 64, 1).is_err());
    }

    #[test]
    fn module_ordering_in_the_typical_regime() {
        // h_v >> M > N: ffc < query transformer < mlp.
        let ffc = module_complexity(ModuleKind::Ffc, 1, 24, 1024, None).unwrap();
        let qt =
            module_complexity(ModuleKind::QueryTransformer, 1, 24, 1024, Some(144)).unwrap();
        let mlp = module_complexity(ModuleKind::Mlp, 1, 24, 1024, None).unwrap();
        let sa = module_complexity(ModuleKind::SelfAttention, 1, 24, 1024, None).unwrap();
        assert!(ffc.ops < qt.ops && qt.ops < mlp.ops);
        assert_eq!(sa.ops, 339_738_624.0); // 1024 * 24^4
        assert_eq!(mlp.ops, 603_979_776.0); // 1024^2 * 24^2
    }

    #[test]
    fn module_counts_scale_with_batch() {
        for kind in [
            ModuleKind::Mlp,
            ModuleKind::SelfAttention,
            ModuleKind::QueryTransformer,
            ModuleKind::Ffc,
        ] {
            let one = module_complexity(kind, 1, 24, 256, Some(64)).unwrap();
            let two = module_complexity(kind, 2, 24, 256, Some(64)).unwrap();
            assert_eq!(two.ops, 2.0 * one.ops);
        }
    }

    #[test]
    fn query_transformer_needs_query_count() {
        assert!(matches!(
            module_complexity(ModuleKind::QueryTransformer, 1, 24, 256, None),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn ratio_rendering_conventions() {
        assert_eq!(compression_ratio(576, 256).unwrap(), "55.6%");
        assert_eq!(compression_ratio(576, 144).unwrap(), "75.0%");
        assert_eq!(compression_ratio(576, 64).unwrap(), "88.9%");
        assert_eq!(compression_ratio(576, 36).unwrap(), "93.75%");
        assert_eq!(compression_ratio(553, 236).unwrap(), "57.3%");
        assert_eq!(compression_ratio(100, 100).unwrap(), "0.0%");
        assert!(compression_ratio(100, 101).is_err());
    }

    #[test]
    fn pipeline_parts_sum_exactly() {
        let tcfg = TransformerCostConfig::llava_v15_7b();
        let vcfg = VisionPipelineCostConfig::clip_vit_l_336(Some(12));
        let b = pipeline_flops(&tcfg, &vcfg, 40).unwrap();
        assert_eq!(
            b.flops_total,
            b.flops_vision + b.flops_projector + b.flops_ffc + b.flops_llm_prefill
        );
        assert!(b.flops_ffc > 0);
    }

    #[test]
    fn pipeline_without_ffc_matches_baseline_shape() {
        let tcfg = TransformerCostConfig::llava_v15_7b();
        let vcfg = VisionPipelineCostConfig::clip_vit_l_336(None);
        let b = pipeline_flops(&tcfg, &vcfg, 40).unwrap();
        assert_eq!(b.flops_ffc, 0);
        assert_eq!(
            b.flops_llm_prefill,
            llm_prefill_flops(&tcfg, 576 + 40)
        );
        // Reference total for this architecture at 576 vision tokens.
        assert!((b.flops_total as f64 / 8.54e12 - 1.0).abs() < 0.10);
    }

    #[test]
    fn reductions_are_scale_invariant() {
        let tcfg = TransformerCostConfig::llava_v15_7b();
        let base = pipeline_flops(&tcfg, &VisionPipelineCostConfig::clip_vit_l_336(None), 40)
            .unwrap();
        let comp =
            pipeline_flops(&tcfg, &VisionPipelineCostConfig::clip_vit_l_336(Some(6)), 40)
                .unwrap();
        let r = flops_reduction(&base, &comp);
        let scale = |b: &CostBreakdown| CostBreakdown {
            flops_vision: b.flops_vision * 3,
            flops_projector: b.flops_projector * 3,
            flops_ffc: b.flops_ffc * 3,
            flops_llm_prefill: b.flops_llm_prefill * 3,
            flops_total: b.flops_total * 3,
            kv_cache_bytes: b.kv_cache_bytes * 3,
        };
        let r_scaled = flops_reduction(&scale(&base), &scale(&comp));
        assert!((r - r_scaled).abs() < 1e-12);
    }

    const SAMPLE: &str = "\
# sample
num_layers=32
hidden_size=4096
num_attention_heads=32
head_dim=128
num_kv_heads=32
mlp_intermediate_size=11008
vocab_size=32000
gated_mlp=true
kv_bytes_per_element=2
vit_layers=24
vit_hidden=1024
vit_intermediate=4096
num_patches=576
projector_dims=1024,4096,4096
ffc_enabled=true
C=12
text_tokens=40
";

    #[test]
    fn config_parse_roundtrip() {
        let cfg = parse_cost_config(SAMPLE).unwrap();
        assert_eq!(cfg.transformer, TransformerCostConfig::llava_v15_7b());
        assert_eq!(
            cfg.vision,
            Some(VisionPipelineCostConfig::clip_vit_l_336(Some(12)))
        );
        assert_eq!(cfg.text_tokens, 40);
    }

    #[test]
    fn config_unknown_key_named() {
        let text = format!("{SAMPLE}bogus_key=1\n");
        match parse_cost_config(&text) {
            Err(Error::Config(msg)) => assert!(msg.contains("bogus_key"), "{msg}"),
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn config_missing_key_named() {
        let text = SAMPLE.replace("head_dim=128\n", "");
        match parse_cost_config(&text) {
            Err(Error::Config(msg)) => assert!(msg.contains("head_dim"), "{msg}"),
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn config_bad_value_named() {
        let text = SAMPLE.replace("vocab_size=32000", "vocab_size=lots");
        match parse_cost_config(&text) {
            Err(Error::Config(msg)) => assert!(msg.contains("vocab_size"), "{msg}"),
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn config_duplicate_key_rejected() {
        let text = format!("{SAMPLE}num_layers=16\n");
        assert!(matches!(parse_cost_config(&text), Err(Error::Config(_))));
    }

    #[test]
    fn config_vision_section_optional() {
        let llm_only: String = SAMPLE
            .lines()
            .take_while(|l| !l.starts_with("vit_layers"))
            .map(|l| format!("{l}\n"))
            .collect();
        let cfg = parse_cost_config(&llm_only).unwrap();
        assert!(cfg.vision.is_none());
        assert_eq!(cfg.text_tokens, DEFAULT_TEXT_TOKENS);
    }

    #[test]
    fn config_requires_c_when_ffc_enabled() {
        let text = SAMPLE.replace("C=12\n", "");
        match parse_cost_config(&text) {
            Err(Error::Config(msg)) => assert!(msg.contains('C'), "{msg}"),
            other => panic!("expected config error, got {other:?}"),
        }
    }
}
