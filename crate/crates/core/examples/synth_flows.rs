//! Write a synthetic Comtrade-style flow CSV to stdout.
//!
//! `cargo run --example synth_flows -- 2004-2010 42 > flows.csv`

use trademotif::synth::{flows_to_csv, trade_flows, TradeShape};
use trademotif::YearRange;

fn main() {
    let mut args = std::env::args().skip(1);
    let years: YearRange = args.next().as_deref().unwrap_or("2004-2010").parse().expect("year range");
    let seed: u64 = args.next().map(|s| s.parse().expect("seed")).unwrap_or(42);
    print!("{}", flows_to_csv(&trade_flows(&TradeShape::default(), years, seed)));
}
