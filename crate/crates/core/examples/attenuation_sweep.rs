// Fog attenuation over visibility at three common FSO wavelengths.
//
// Run with `cargo run --example attenuation_sweep`.

use fso_qos::atmos::{self, AttenuationRow, SizeModel, DEFAULT_REFERENCE_WAVELENGTH_NM};

pub fn run_example() -> fso_qos::Result<Vec<AttenuationRow>> {
    let visibilities = atmos::linear_grid(0.5, 10.0, 20)?;
    let wavelengths = [760.0, 850.0, 1550.0];
    let rows = atmos::attenuation_sweep(
        &visibilities,
        &wavelengths,
        1.0,
        DEFAULT_REFERENCE_WAVELENGTH_NM,
        SizeModel::Kruse,
    )?;

    println!("{:>8} {:>8} {:>10} {:>10}", "V (km)", "nm", "Np/km", "dB");
    for r in rows.iter().step_by(3 * 4) {
        println!(
            "{:8.2} {:8.0} {:10.4} {:10.3}",
            r.visibility_km, r.wavelength_nm, r.beta_np_per_km, r.atten_db
        );
    }

    let kim = atmos::attenuation_sweep(
        &[0.7],
        &[1550.0],
        1.0,
        DEFAULT_REFERENCE_WAVELENGTH_NM,
        SizeModel::Kim,
    )?;
    println!(
        "Kim model, 0.7 km fog at 1550 nm: {:.3} dB/km",
        kim[0].atten_db
    );
    Ok(rows)
}

fn main() -> fso_qos::Result<()> {
    let rows = run_example()?;
    atmos::write_attenuation_csv(&rows, std::io::sink())
}
