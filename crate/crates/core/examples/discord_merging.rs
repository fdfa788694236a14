//! Discord as the cost of measuring one half of a bipartite state.
//!
//! Usage: `cargo run --release --example discord_merging`. Prints the full
//! report for the zero/plus mixture and discord across a Werner family.

use qchaos::cli::discord_state;
use qchaos::config::DiscordStateName;
use qchaos::discord::{discord, discord_report, zero_plus_example, DiscordOptions};

fn main() -> qchaos::Result<()> {
    let report = discord_report(&zero_plus_example(), DiscordOptions::default())?;
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));

    println!("\n   p    discord (bits)");
    for i in 0..=10 {
        let p = i as f64 / 10.0;
        let state = discord_state(DiscordStateName::Werner, p)?;
        let d = discord(&state, DiscordOptions { resolution: 16, ..DiscordOptions::default() })?;
        println!("{p:5.2}  {:.6}", d.value);
    }
    Ok(())
}
