// Reading a station CSV, dropping incomplete rows, and splitting it.
//
// Run with `cargo run --example weather_dataset`.

use fso_qos::dataset::{self, LoadSchema, ObservationTable, SplitFractions};

const STATION_CSV: &str = "\
station,date,slot,visibility_km,humidity,wind_speed,snr_db
Durban,2016-07-01,08h00,4.5,88,2.1,15.2
Durban,2016-07-01,14h00,12.0,64,4.0,19.9
Durban,2016-07-01,20h00,,91,1.2,14.0
Durban,2016-07-02,08h00,0.8,97,0.5,6.3
Durban,2016-07-02,14h00,9.5,70,3.3,19.1
Durban,2016-07-02,20h00,6.0,82,2.2,17.4
Durban,2016-07-03,08h00,2.2,93,1.0,11.8
Durban,2016-07-03,14h00,15.0,58,5.1,20.4
Durban,2016-07-03,20h00,7.5,79,2.9,18.2
Durban,2016-07-04,08h00,3.1,90,1.8,13.6
Durban,2016-07-04,14h00,18.0,55,4.4,20.8
";

pub fn run_example() -> fso_qos::Result<ObservationTable> {
    let table = dataset::load_observations(STATION_CSV.as_bytes(), &LoadSchema::default())?;
    println!(
        "{}: {} observations, {} dropped, variables {:?}",
        table.station,
        table.n_observations(),
        table.dropped_rows,
        table.features.variable_names()
    );

    let fractions: SplitFractions = "0.8,0.1,0.1".parse()?;
    let parts = dataset::split(&table, fractions, 42)?;
    for (name, part) in [
        ("train", &parts.train),
        ("val", &parts.val),
        ("test", &parts.test),
    ] {
        let stamps: Vec<String> = part.timestamps.iter().map(|t| t.to_string()).collect();
        println!("{name:5} {stamps:?}");
    }
    println!("fingerprint {}", table.fingerprint()?);
    Ok(table)
}

fn main() -> fso_qos::Result<()> {
    run_example().map(|_| ())
}
