//! Parser for the `--gen kind:params` synthetic-source grammar.
//!
//! `kind` is `iid` (alias `iid_gaussian`), `ar1`, or `dc` (alias
//! `dc_only`). After the colon comes an optional leading bare number --
//! the kind's own parameter (rho for ar1, the fill value for dc) --
//! followed by comma-separated `N=`, `h=`, and `seed=` assignments.
//! Seeds are mandatory for the random kinds so runs stay reproducible;
//! `dc` draws nothing and defaults to seed 0.
//!
//! Examples: `ar1:0.9,N=24,h=256,seed=7`, `dc:1,N=4,h=2`,
//! `iid:N=24,h=1024,seed=3`.

use fvtc_core::spectrum::SyntheticKind;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenSpec {
    pub kind: SyntheticKind,
    pub side: usize,
    pub hidden: usize,
    pub seed: u64,
}

pub fn parse(spec: &str) -> Result<GenSpec, CliError> {
    let usage = |msg: String| CliError::Usage(format!("bad --gen spec '{spec}': {msg}"));

    let (kind_name, rest) = match spec.split_once(':') {
        Some((k, r)) => (k.trim(), r),
        None => (spec.trim(), ""),
    };

    let mut leading: Option<f64> = None;
    let mut side: Option<usize> = None;
    let mut hidden: Option<usize> = None;
    let mut seed: Option<u64> = None;

    for (i, part) in rest.split(',').enumerate() {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        if let Some((key, value)) = part.split_once('=') {
            match key.trim() {
                "N" => {
                    side = Some(value.trim().parse().map_err(|_| {
                        usage(format!("N must be an unsigned integer, got '{value}'"))
                    })?)
                }
                "h" => {
                    hidden = Some(value.trim().parse().map_err(|_| {
                        usage(format!("h must be an unsigned integer, got '{value}'"))
                    })?)
                }
                "seed" => {
                    seed = Some(value.trim().parse().map_err(|_| {
                        usage(format!("seed must be an unsigned integer, got '{value}'"))
                    })?)
                }
                other => return Err(usage(format!("unknown parameter '{other}'"))),
            }
        } else if i == 0 && leading.is_none() {
            leading = Some(
                part.parse()
                    .map_err(|_| usage(format!("expected a number, got '{part}'")))?,
            );
        } else {
            return Err(usage(format!("expected key=value, got '{part}'")));
        }
    }

    let kind = match kind_name {
        "iid" | "iid_gaussian" => {
            if leading.is_some() {
                return Err(usage("iid takes no leading parameter".into()));
            }
            SyntheticKind::IidGaussian
        }
        "ar1" => SyntheticKind::Ar1 {
            rho: leading.ok_or_else(|| usage("ar1 needs its coefficient, e.g. ar1:0.9".into()))?,
        },
        "dc" | "dc_only" => SyntheticKind::DcOnly {
            value: leading.ok_or_else(|| usage("dc needs its value, e.g. dc:1".into()))?,
        },
        other => return Err(usage(format!("unknown kind '{other}'"))),
    };

    let side = side.ok_or_else(|| usage("missing N=".into()))?;
    let hidden = hidden.ok_or_else(|| usage("missing h=".into()))?;
    let seed = match (seed, kind) {
        (Some(s), _) => s,
        (None, SyntheticKind::DcOnly { .. }) => 0,
        (None, _) => return Err(usage("missing seed= (mandatory for random kinds)".into())),
    };

    Ok(GenSpec {
        kind,
        side,
        hidden,
        seed,
    })
}
