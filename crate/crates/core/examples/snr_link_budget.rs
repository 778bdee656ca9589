// Link budget: SNR of a 1550 nm link as fog thickens.
//
// Run with `cargo run --example snr_link_budget`.

use fso_qos::atmos::{self, SizeModel};
use fso_qos::link::{self, LinkParams, SnrRow};

pub fn run_example() -> fso_qos::Result<Vec<SnrRow>> {
    let params = LinkParams::from_json_str(r#"{"power_tx_dbm": 23.0, "fade_margin_db": 3.0}"#)?;
    println!("clear air SNR: {:.2} dB", link::snr_db(&params, 0.0)?);

    let vis = atmos::linear_grid(0.5, 5.0, 10)?;
    let rows = link::snr_sweep_visibility(
        &params,
        &vis,
        &[params.wavelength_nm()],
        1.0,
        550.0,
        SizeModel::Kim,
    )?;
    for (v, r) in vis.iter().zip(&rows) {
        println!(
            "V={v:5.2} km  tau={:6.2} dB  SNR={:7.2} dB",
            r.tau_db, r.snr_db
        );
    }
    Ok(rows)
}

fn main() -> fso_qos::Result<()> {
    run_example().map(|_| ())
}
