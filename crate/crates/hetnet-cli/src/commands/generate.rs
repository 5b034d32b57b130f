//! `hetnet generate`: draw a random scenario and write it as JSON,
//! optionally with a CSV dump of the precomputed per-channel rates.

use hetnet_offload::radio::{build_rate_table, DEFAULT_COMBO_CAP};
use hetnet_offload::scenario;
use hetnet_offload::Scenario;

use crate::flags::GenFlags;
use crate::util::{map_radio, write_text, CliError, EXIT_OK};

#[derive(Debug, clap::Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    gen: GenFlags,
    /// RNG seed; the same seed always yields byte-identical output.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path for the scenario JSON ("-" for stdout).
    #[arg(long, default_value = "-")]
    out: String,
    /// Also write the precomputed per-channel rates to this CSV file.
    #[arg(long)]
    dump_rates: Option<String>,
    /// Cap on precomputed rate-table entries for --dump-rates.
    #[arg(long, default_value_t = DEFAULT_COMBO_CAP)]
    combo_cap: usize,
}

pub fn run(a: GenerateArgs) -> Result<u8, CliError> {
    let s = scenario::generate(&a.gen.to_params(), a.seed)
        .map_err(|e| CliError::Invalid(e.to_string()))?;
    let mut json = serde_json::to_string_pretty(&s)?;
    json.push('\n');
    write_text(&a.out, &json)?;
    if let Some(path) = &a.dump_rates {
        write_text(path, &rates_csv(&s, a.combo_cap)?)?;
    }
    Ok(EXIT_OK)
}

/// One row per macro link and per (channel, co-channel combo, transmitter).
/// `combo` lists the transmitting user per small cell, "-" for idle.
fn rates_csv(s: &Scenario, cap: usize) -> Result<String, CliError> {
    let rt = build_rate_table(s, cap).map_err(map_radio)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["channel", "tier", "user", "cell", "combo", "rate_bps"])
        .map_err(anyhow::Error::new)?;
    for n in 0..s.radio.num_channels {
        for (i, &k) in rt.mues.iter().enumerate() {
            w.write_record([
                n.to_string(),
                "macro".into(),
                k.to_string(),
                "0".into(),
                String::new(),
                format!("{:.6e}", rt.mue_rate[i][n]),
            ])
            .map_err(anyhow::Error::new)?;
        }
        for (c, combo) in rt.combos.iter().enumerate() {
            let label = combo
                .occupants
                .iter()
                .map(|o| o.map_or_else(|| "-".to_string(), |k| k.to_string()))
                .collect::<Vec<_>>()
                .join("/");
            for (slot, occ) in combo.occupants.iter().enumerate() {
                let Some(k) = occ else { continue };
                w.write_record([
                    n.to_string(),
                    "small-cell".into(),
                    k.to_string(),
                    (slot + 1).to_string(),
                    label.clone(),
                    format!("{:.6e}", rt.sue_rate[n][c][slot]),
                ])
                .map_err(anyhow::Error::new)?;
            }
        }
    }
    let bytes = w.into_inner().map_err(anyhow::Error::new)?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
