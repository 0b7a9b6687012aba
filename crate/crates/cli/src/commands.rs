//! Subcommand implementations.

use std::path::Path;
use std::time::{Duration, Instant};

use fvtc_core::cost::{
    flops_reduction, kv_cache_bytes, llm_prefill_flops, load_cost_config, pipeline_flops,
    CostBreakdown, CostConfig,
};
use fvtc_core::dct::{dct1d_fft, dct1d_naive};
use fvtc_core::ffc::{ffc_compress, FfcConfig};
use fvtc_core::spectrum::{
    compaction_stats, compute_spectrum, export_spectrum_csv, generate_synthetic,
};
use fvtc_core::tensor::{
    flatten_grid, read_tensor, reshape_to_grid, write_tensor, FeatureGrid, Tensor,
};
use fvtc_core::verify::{run_all, VerifyOptions};

use crate::genspec;
use crate::{CliError, CliResult};

/// Environment hook that corrupts one verify comparison; a negative
/// control proving the failure path reports and exits correctly.
const INJECT_FAULT_ENV: &str = "FVTC_VERIFY_INJECT_FAULT";

pub fn compress(
    input: &Path,
    keep_side: usize,
    rescale: bool,
    output: &Path,
    json: bool,
) -> CliResult {
    let seq = match read_tensor(input)? {
        Tensor::Sequence(s) => s,
        Tensor::Grid(g) => flatten_grid(&g),
    };
    let side = (seq.length() as f64).sqrt().round() as usize;
    if side * side != seq.length() {
        return Err(CliError::Data(format!(
            "input length {} is not a perfect square",
            seq.length()
        )));
    }
    let cfg = FfcConfig::new(side, keep_side)?.with_rescale(rescale);
    let (out, report) = ffc_compress(&seq, &cfg)?;
    write_tensor(output, &Tensor::Sequence(out))?;
    if json {
        println!("{}", report.to_json());
    } else {
        println!("{}", report.kv_line());
    }
    Ok(())
}

/// Load a grid from a tensor file (reshaping a sequence) or a generator
/// spec. The callers' arg groups guarantee exactly one source.
fn load_grid(input: Option<&Path>, gen: Option<&str>) -> Result<FeatureGrid, CliError> {
    match (input, gen) {
        (Some(path), None) => match read_tensor(path)? {
            Tensor::Grid(g) => Ok(g),
            Tensor::Sequence(s) => Ok(reshape_to_grid(&s)?),
        },
        (None, Some(spec)) => {
            let spec = genspec::parse(spec)?;
            Ok(generate_synthetic(
                spec.kind,
                spec.side,
                spec.hidden,
                spec.seed,
            )?)
        }
        _ => Err(CliError::Usage(
            "exactly one of --input/--gen is required".into(),
        )),
    }
}

pub fn spectrum(input: Option<&Path>, gen: Option<&str>, output: &Path) -> CliResult {
    let grid = load_grid(input, gen)?;
    let map = compute_spectrum(&grid);
    export_spectrum_csv(&map, output)?;
    println!(
        "side={} bins={} output={}",
        map.side(),
        map.side() * map.side(),
        output.display()
    );
    Ok(())
}

pub fn stats(input: Option<&Path>, gen: Option<&str>, corner_sides: &[usize]) -> CliResult {
    if corner_sides.is_empty() {
        return Err(CliError::Usage("--C needs at least one side".into()));
    }
    let grid = load_grid(input, gen)?;
    let stats = compaction_stats(&grid, corner_sides)?;
    for (c, fraction) in &stats.corner_energy_fraction {
        println!("corner_energy_fraction[C={c}]={fraction:.9}");
    }
    println!("flatness={:.9}", stats.flatness);
    Ok(())
}

pub fn gen(spec: &str, output: &Path) -> CliResult {
    let spec = genspec::parse(spec)?;
    let grid = generate_synthetic(spec.kind, spec.side, spec.hidden, spec.seed)?;
    write_tensor(output, &Tensor::Grid(grid))?;
    println!(
        "side={} hidden={} seed={} output={}",
        spec.side,
        spec.hidden,
        spec.seed,
        output.display()
    );
    Ok(())
}

pub fn cost(
    config_path: &Path,
    tokens: Option<u64>,
    keep_side: Option<u64>,
    baseline_tokens: Option<u64>,
    text_tokens: Option<u64>,
    table: bool,
) -> CliResult {
    let mut cfg = load_cost_config(config_path)?;
    if let Some(t) = text_tokens {
        cfg.text_tokens = t;
    }
    if tokens.is_some() && keep_side.is_some() {
        return Err(CliError::Usage(
            "--tokens and --C are mutually exclusive".into(),
        ));
    }

    match tokens {
        Some(seq_len) => {
            if seq_len < 1 {
                return Err(CliError::Usage("--tokens must be >= 1".into()));
            }
            llm_view(&cfg, seq_len, baseline_tokens)
        }
        None => pipeline_view(&mut cfg, keep_side, baseline_tokens, table),
    }
}

/// Language-model-only view: prefill FLOPs over exactly `seq_len` tokens.
fn llm_view(cfg: &CostConfig, seq_len: u64, baseline_tokens: Option<u64>) -> CliResult {
    cfg.transformer.validate()?;
    let flops = llm_prefill_flops(&cfg.transformer, seq_len);
    println!("seq_len={seq_len}");
    println!("llm_prefill_flops={flops}");
    println!("param_count={}", cfg.transformer.param_count());
    println!("kv_cache_bytes={}", kv_cache_bytes(&cfg.transformer, seq_len));
    if let Some(base) = baseline_tokens {
        if base < 1 {
            return Err(CliError::Usage("--baseline-tokens must be >= 1".into()));
        }
        let base_flops = llm_prefill_flops(&cfg.transformer, base);
        println!("baseline_llm_prefill_flops={base_flops}");
        println!(
            "flops_reduction_pct={:.1}",
            100.0 * (1.0 - flops as f64 / base_flops as f64)
        );
    }
    Ok(())
}

fn pipeline_view(
    cfg: &mut CostConfig,
    keep_side: Option<u64>,
    baseline_tokens: Option<u64>,
    table: bool,
) -> CliResult {
    let vision = cfg.vision.as_mut().ok_or_else(|| {
        CliError::Data(
            "config has no vision section; use --tokens for the language-model view".into(),
        )
    })?;
    if let Some(c) = keep_side {
        vision.ffc_enabled = true;
        vision.output_side = Some(c);
    }
    let breakdown = pipeline_flops(&cfg.transformer, vision, cfg.text_tokens)?;

    let baseline = match baseline_tokens {
        Some(n) => {
            if n < 1 {
                return Err(CliError::Usage("--baseline-tokens must be >= 1".into()));
            }
            let mut base_vision = vision.clone();
            base_vision.ffc_enabled = false;
            base_vision.output_side = None;
            base_vision.num_patches = n;
            Some(pipeline_flops(&cfg.transformer, &base_vision, cfg.text_tokens)?)
        }
        None => None,
    };

    if table {
        print_table(&breakdown, baseline.as_ref());
    } else {
        print_kv(vision.tokens_out(), cfg.text_tokens, &breakdown, baseline.as_ref());
    }
    Ok(())
}

fn print_kv(
    vision_tokens: u64,
    text_tokens: u64,
    b: &CostBreakdown,
    baseline: Option<&CostBreakdown>,
) {
    println!("vision_tokens={vision_tokens}");
    println!("text_tokens={text_tokens}");
    println!("flops_vision={}", b.flops_vision);
    println!("flops_projector={}", b.flops_projector);
    println!("flops_ffc={}", b.flops_ffc);
    println!("flops_llm_prefill={}", b.flops_llm_prefill);
    println!("flops_total={}", b.flops_total);
    println!("kv_cache_bytes={}", b.kv_cache_bytes);
    for (label, _, share) in b.shares() {
        println!("share_{label}={share:.4}");
    }
    if let Some(base) = baseline {
        println!("baseline_flops_total={}", base.flops_total);
        println!("baseline_kv_cache_bytes={}", base.kv_cache_bytes);
        println!(
            "flops_reduction_pct={:.1}",
            100.0 * flops_reduction(base, b)
        );
        println!(
            "kv_reduction_pct={:.1}",
            100.0 * (1.0 - b.kv_cache_bytes as f64 / base.kv_cache_bytes as f64)
        );
    }
}

fn print_table(b: &CostBreakdown, baseline: Option<&CostBreakdown>) {
    println!("{:<14} {:>18} {:>8}", "component", "flops", "share");
    for (label, flops, share) in b.shares() {
        println!("{label:<14} {flops:>18} {:>7.1}%", 100.0 * share);
    }
    println!("{:<14} {:>18} {:>8}", "total", b.flops_total, "100.0%");
    println!("{:<14} {:>18}", "kv_cache_bytes", b.kv_cache_bytes);
    if let Some(base) = baseline {
        println!(
            "{:<14} {:>18} {:>7.1}%",
            "baseline",
            base.flops_total,
            100.0 * flops_reduction(base, b)
        );
    }
}

pub fn bench(sizes: &[usize], strict: bool) -> CliResult {
    if sizes.is_empty() {
        return Err(CliError::Usage("--sizes needs at least one length".into()));
    }
    if sizes.contains(&0) {
        return Err(CliError::Usage("--sizes entries must be >= 1".into()));
    }

    // Median of 9 timed runs after 2 warmups, per implementation.
    fn median_time(mut f: impl FnMut()) -> Duration {
        for _ in 0..2 {
            f();
        }
        let mut times: Vec<Duration> = (0..9)
            .map(|_| {
                let t = Instant::now();
                f();
                t.elapsed()
            })
            .collect();
        times.sort();
        times[4]
    }

    let mut ratios = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let x: Vec<f64> = (0..n).map(|i| ((i * 37 + 11) % 101) as f64 / 101.0).collect();
        let naive = median_time(|| {
            std::hint::black_box(dct1d_naive(std::hint::black_box(&x)));
        });
        let fast = median_time(|| {
            std::hint::black_box(dct1d_fft(std::hint::black_box(&x)));
        });
        let ratio = naive.as_secs_f64() / fast.as_secs_f64().max(1e-12);
        println!(
            "N={n} naive_ns={} fft_ns={} ratio={ratio:.2}",
            naive.as_nanos(),
            fast.as_nanos()
        );
        ratios.push((n, naive, fast, ratio));
    }

    // Soft checks: fast path wins at the largest size >= 64, and the
    // speedup does not shrink from the smallest to the largest size.
    let mut complaints = Vec::new();
    if let Some(&(n, naive, fast, _)) = ratios.iter().rev().find(|(n, ..)| *n >= 64) {
        if fast > naive {
            complaints.push(format!(
                "fast path slower than direct at N={n} ({fast:?} > {naive:?})"
            ));
        }
    }
    if ratios.len() >= 2 {
        let first = ratios.first().unwrap();
        let last = ratios.last().unwrap();
        if last.0 > first.0 && last.3 < first.3 {
            complaints.push(format!(
                "speedup shrank from {:.2}x at N={} to {:.2}x at N={}",
                first.3, first.0, last.3, last.0
            ));
        }
    }
    if complaints.is_empty() {
        return Ok(());
    }
    if strict {
        Err(CliError::Verification(complaints.join("; ")))
    } else {
        for c in complaints {
            eprintln!("warning: {c} (timing noise? rerun or use --strict on a quiet machine)");
        }
        Ok(())
    }
}

pub fn verify(max_n: Option<usize>) -> CliResult {
    let opts = VerifyOptions {
        max_n: max_n.unwrap_or(64).max(1),
        inject_fault: std::env::var_os(INJECT_FAULT_ENV).is_some_and(|v| v == "1"),
        ..VerifyOptions::default()
    };
    let results = run_all(&opts);
    for r in &results {
        println!("{}", r.line());
    }
    let failures: Vec<&str> = results
        .iter()
        .filter(|r| !r.passed)
        .map(|r| r.name)
        .collect();
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(format!(
            "suite(s) failed: {}",
            failures.join(", ")
        )))
    }
}
