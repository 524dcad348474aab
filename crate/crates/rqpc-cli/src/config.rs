//! Flat key-value experiment configuration files.
//!
//! One `key = value` pair per line, `#` starts a comment. Unknown and
//! duplicated keys are rejected before any computation runs.

use std::collections::BTreeMap;

use anyhow::{anyhow, bail, Context, Result};
use rqpc::analytic::{CodeParams, LinkBudget};
use rqpc::netsim::{ChainConfig, ChainMode, Engine};

/// Parsed experiment file plus the knobs the library does not carry.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub chain: ChainConfig,
    pub engine: Engine,
    pub cycle_time_s: f64,
}

const KNOWN_KEYS: &[&str] = &[
    "engine",
    "hops",
    "source_efficiency",
    "detector_efficiency",
    "coupling_efficiency",
    "distance_km",
    "attenuation_km",
    "block_size",
    "blocks",
    "qubits_per_photon",
    "gate_error_rate",
    "meas_error_rate",
    "transfer_fidelity",
    "cycle_time_ns",
    "trials",
    "seed",
];

fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>> {
    let mut pairs = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("line {}: expected `key = value`, got {raw:?}", lineno + 1))?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if !KNOWN_KEYS.contains(&key.as_str()) {
            bail!("line {}: unknown key {key:?}", lineno + 1);
        }
        if pairs.insert(key.clone(), value).is_some() {
            bail!("line {}: duplicate key {key:?}", lineno + 1);
        }
    }
    Ok(pairs)
}

struct Fields(BTreeMap<String, String>);

impl Fields {
    fn required<T: std::str::FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        let raw = self
            .0
            .get(key)
            .ok_or_else(|| anyhow!("missing required key {key:?}"))?;
        raw.parse()
            .map_err(|e| anyhow!("key {key:?}: cannot parse {raw:?}: {e}"))
    }

    fn optional<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        match self.0.get(key) {
            None => Ok(default),
            Some(raw) => raw
                .parse()
                .map_err(|e| anyhow!("key {key:?}: cannot parse {raw:?}: {e}")),
        }
    }
}

/// Parses an experiment file. `mode` comes from the subcommand, not the
/// file; `seed_override` is the `--seed` flag.
pub fn parse_experiment(
    text: &str,
    mode: ChainMode,
    seed_override: Option<u64>,
) -> Result<Experiment> {
    let fields = Fields(parse_pairs(text)?);

    let engine = match fields
        .optional::<String>("engine", "pattern".into())?
        .as_str()
    {
        "pattern" => Engine::Pattern,
        "exact" => Engine::ExactSmall,
        other => bail!("key \"engine\": expected pattern or exact, got {other:?}"),
    };

    let budget = LinkBudget::new(
        fields.required("source_efficiency")?,
        fields.required("detector_efficiency")?,
        fields.required("coupling_efficiency")?,
        fields.required("distance_km")?,
        fields.required("attenuation_km")?,
    )
    .context("invalid link budget")?;

    let code = CodeParams::new(fields.required("block_size")?, fields.required("blocks")?)
        .context("invalid code parameters")?;

    let cycle_time_ns: f64 = fields.optional("cycle_time_ns", 100.0)?;
    if !(cycle_time_ns.is_finite() && cycle_time_ns > 0.0) {
        bail!("key \"cycle_time_ns\": must be positive, got {cycle_time_ns}");
    }

    let chain = ChainConfig {
        hops: fields.required("hops")?,
        budget,
        code,
        qubits_per_photon: fields.optional("qubits_per_photon", 1)?,
        gate_error_rate: fields.optional("gate_error_rate", 0.0)?,
        meas_error_rate: fields.optional("meas_error_rate", 0.0)?,
        per_hop_transfer_fidelity: fields.optional("transfer_fidelity", 1.0)?,
        trials: fields.required("trials")?,
        seed: seed_override.map_or_else(|| fields.optional("seed", 0), Ok)?,
        mode,
    };
    chain
        .validate()
        .context("invalid experiment configuration")?;

    Ok(Experiment {
        chain,
        engine,
        cycle_time_s: cycle_time_ns * 1e-9,
    })
}

/// FNV-1a over the raw configuration bytes; embedded in artifacts so a
/// result can be traced to the exact inputs that produced it.
pub fn config_hash(bytes: &[u8]) -> String {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{hash:016x}")
}
