// Error metrics for measured against predicted SNR values.
//
// Run with `cargo run --example regression_metrics`.

use fso_qos::metrics::{self, MetricsReport};

pub fn run_example() -> fso_qos::Result<MetricsReport> {
    let measured = [21.4, 19.8, 12.1, 8.7, 17.5, 22.0];
    let predicted = [20.9, 20.6, 13.4, 7.9, 16.8, 21.7];
    let report = metrics::evaluate(&measured, &predicted)?;
    println!("{}", report.to_json_line()?);
    report.write_csv(std::io::stdout().lock())?;

    if let Err(e) = metrics::mape(&[0.0, 1.0], &[0.1, 1.0]) {
        println!("MAPE with a zero reading: {e}");
    }
    Ok(report)
}

fn main() -> fso_qos::Result<()> {
    run_example().map(|_| ())
}
