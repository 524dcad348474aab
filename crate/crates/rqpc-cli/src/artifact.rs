//! Output artifacts: CSV tables and line-delimited JSON records. Every
//! artifact embeds the tool version, the configuration hash, and the seed,
//! and contains nothing run-dependent beyond them, so replays are
//! byte-identical. Human-readable numbers carry six significant digits;
//! JSON keeps full precision.

use std::io::Write;

use anyhow::Result;
use rqpc::analytic::{MultiplexedFailure, OptimizeOutcome, RateReport};
use rqpc::netsim::TrialStats;
use serde::Serialize;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Six significant digits.
pub fn sig6(x: f64) -> String {
    format!("{x:.5e}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// One row of the resource table.
#[derive(Debug, Serialize)]
pub struct TableRow {
    pub p: f64,
    pub m: Option<u32>,
    pub n: Option<u32>,
    pub p_f: Option<f64>,
    pub total_qubits: Option<usize>,
    pub rate_hz: f64,
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub qubits_per_photon: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub photons: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_f_multiplexed: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_f_multiplexed_std_error: Option<f64>,
}

impl TableRow {
    pub fn infeasible(p: f64, rate_hz: f64) -> Self {
        TableRow {
            p,
            m: None,
            n: None,
            p_f: None,
            total_qubits: None,
            rate_hz,
            status: "infeasible",
            qubits_per_photon: None,
            photons: None,
            p_f_multiplexed: None,
            p_f_multiplexed_std_error: None,
        }
    }

    pub fn set_multiplexed(&mut self, k: u32, photons: u32, mux: MultiplexedFailure) {
        self.qubits_per_photon = Some(k);
        self.photons = Some(photons);
        self.p_f_multiplexed = Some(mux.probability);
        self.p_f_multiplexed_std_error = mux.std_error;
    }
}

fn meta_comment(kind: &str, config_hash: &str, seed: u64) -> String {
    format!("# rqpc {VERSION} {kind} config_hash={config_hash} seed={seed}")
}

#[derive(Serialize)]
struct TableRecord<'a> {
    record: &'static str,
    version: &'static str,
    config_hash: &'a str,
    seed: u64,
    #[serde(flatten)]
    row: &'a TableRow,
}

pub fn write_table(
    mut w: impl Write,
    format: Format,
    rows: &[TableRow],
    config_hash: &str,
    seed: u64,
    multiplexed: bool,
) -> Result<()> {
    match format {
        Format::Csv => {
            writeln!(w, "{}", meta_comment("table", config_hash, seed))?;
            let mut header = String::from("p,m,n,p_f,total_qubits,rate_hz,status");
            if multiplexed {
                header.push_str(
                    ",qubits_per_photon,photons,p_f_multiplexed,p_f_multiplexed_std_error",
                );
            }
            writeln!(w, "{header}")?;
            for row in rows {
                let mut line = format!(
                    "{},{},{},{},{},{},{}",
                    row.p,
                    row.m.map_or(String::new(), |v| v.to_string()),
                    row.n.map_or(String::new(), |v| v.to_string()),
                    row.p_f.map_or(String::new(), sig6),
                    row.total_qubits.map_or(String::new(), |v| v.to_string()),
                    sig6(row.rate_hz),
                    row.status,
                );
                if multiplexed {
                    line.push_str(&format!(
                        ",{},{},{},{}",
                        row.qubits_per_photon
                            .map_or(String::new(), |v| v.to_string()),
                        row.photons.map_or(String::new(), |v| v.to_string()),
                        row.p_f_multiplexed.map_or(String::new(), sig6),
                        row.p_f_multiplexed_std_error.map_or(String::new(), sig6),
                    ));
                }
                writeln!(w, "{line}")?;
            }
        }
        Format::Json => {
            for row in rows {
                let record = TableRecord {
                    record: "table_row",
                    version: VERSION,
                    config_hash,
                    seed,
                    row,
                };
                writeln!(w, "{}", serde_json::to_string(&record)?)?;
            }
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct OptimizeRecord<'a> {
    record: &'static str,
    version: &'static str,
    config_hash: &'a str,
    p: f64,
    pf_target: f64,
    #[serde(flatten)]
    outcome: &'a OptimizeOutcome,
}

pub fn write_optimize(
    mut w: impl Write,
    format: Format,
    p: f64,
    pf_target: f64,
    outcome: &OptimizeOutcome,
    config_hash: &str,
) -> Result<()> {
    match format {
        Format::Csv => {
            writeln!(w, "{}", meta_comment("optimize", config_hash, 0))?;
            writeln!(w, "p,pf_target,m,n,p_f,total_qubits,status")?;
            match outcome {
                OptimizeOutcome::Found(f) => writeln!(
                    w,
                    "{},{},{},{},{},{},ok",
                    p,
                    sig6(pf_target),
                    f.code.m,
                    f.code.n,
                    sig6(f.failure_probability),
                    f.code.total_qubits()
                )?,
                OptimizeOutcome::Infeasible { .. } => {
                    writeln!(w, "{},{},,,,,infeasible", p, sig6(pf_target))?
                }
            }
        }
        Format::Json => {
            let record = OptimizeRecord {
                record: "optimize",
                version: VERSION,
                config_hash,
                p,
                pf_target,
                outcome,
            };
            writeln!(w, "{}", serde_json::to_string(&record)?)?;
        }
    }
    Ok(())
}

/// The combined record a chain or butterfly run produces: experiment
/// identity, the analytic end-to-end estimates, and the Monte Carlo
/// statistics.
#[derive(Serialize)]
pub struct RunArtifact<'a> {
    pub record: &'static str,
    pub version: &'static str,
    pub config_hash: &'a str,
    pub seed: u64,
    pub mode: &'static str,
    pub engine: &'static str,
    pub hops: u32,
    pub block_size: u32,
    pub blocks: u32,
    pub qubits_per_photon: u32,
    pub analytic: &'a RateReport,
    pub stats: &'a TrialStats,
}

pub fn write_run(mut w: impl Write, format: Format, artifact: &RunArtifact) -> Result<()> {
    match format {
        Format::Json => {
            writeln!(w, "{}", serde_json::to_string(artifact)?)?;
        }
        Format::Csv => {
            writeln!(
                w,
                "{}",
                meta_comment(artifact.record, artifact.config_hash, artifact.seed)
            )?;
            writeln!(
                w,
                "mode,engine,hops,block_size,blocks,qubits_per_photon,trials,successes,\
                 heralded_failures,logical_errors,success_rate,success_std_error,\
                 estimated_fidelity,link_probability,per_hop_failure,\
                 end_to_end_success_analytic,end_to_end_fidelity_analytic,rate_per_total_qubit"
            )?;
            let s = artifact.stats;
            let a = artifact.analytic;
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                artifact.mode,
                artifact.engine,
                artifact.hops,
                artifact.block_size,
                artifact.blocks,
                artifact.qubits_per_photon,
                s.trials,
                s.successes,
                s.heralded_failures,
                s.logical_errors,
                sig6(s.success_rate),
                sig6(s.success_std_error),
                sig6(s.estimated_fidelity),
                sig6(a.link_probability),
                sig6(a.per_hop_failure),
                sig6(a.end_to_end_success),
                sig6(a.end_to_end_fidelity),
                sig6(a.rate_per_total_qubit),
            )?;
        }
    }
    Ok(())
}
