//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

mod support;

use std::time::{Duration, Instant};

use fso_qos::atmos::{self, OpticalPath, SizeModel};
use fso_qos::dataset::{self, LinkGeometry, SplitFractions, SynthConfig};
use fso_qos::linalg::Matrix;
use fso_qos::link::LinkParams;
use fso_qos::metrics;
use fso_qos::mlp::{self, Activation, TrainConfig};
use fso_qos::pca::{jacobi, SelectionRule};
use fso_qos::pipeline::{self, HybridConfig};

type Outcome = Result<String, String>;

/// Name, check, optional runtime budget.
type Criterion = (&'static str, fn() -> Outcome, Option<Duration>);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

fn attenuation_reproduction() -> Outcome {
    let beta = |wl: f64| {
        atmos::extinction_coefficient(&OpticalPath::new(wl, 1.0, 1.0).unwrap(), SizeModel::Kruse)
            .unwrap()
    };
    let (b1550, b760) = (beta(1550.0), beta(760.0));
    let decline = 100.0 * (b760 - b1550) / b760;
    check(
        within(b1550, 2.13, 0.01) && within(b760, 3.24, 0.01) && within(decline, 34.2, 0.3),
        format!("beta(1550)={b1550:.5} beta(760)={b760:.5} decline={decline:.3}% (targets 2.13±0.01, 3.24±0.01, 34.2±0.3 pp)"),
    )
}

fn visibility_identity() -> Outcome {
    let mut worst = 0.0f64;
    for v in [0.5, 1.0, 5.0, 20.0] {
        let path = OpticalPath::new(550.0, v, v).unwrap();
        for model in [SizeModel::Kruse, SizeModel::Kim] {
            let t = atmos::transmittance(&path, model).unwrap();
            worst = worst.max((t - 0.02).abs());
        }
    }
    check(
        worst <= 1e-12,
        format!("max |T - 0.02| = {worst:e} (tol 1e-12)"),
    )
}

fn kim_continuity() -> Outcome {
    let q = |v: f64| atmos::kim_q(v).unwrap();
    let below = |_: f64| 0.0;
    let middle = |v: f64| v - 0.5;
    let upper = |v: f64| 0.16 * v + 0.34;
    let at_half = q(0.5) == below(0.5) && q(0.5) == middle(0.5);
    let at_one = q(1.0) == middle(1.0) && q(1.0) == upper(1.0);
    let at_ten = atmos::kruse_q(10.0).unwrap() == 1.3 && q(10.0) == 1.3;
    check(
        at_half && at_one && at_ten,
        format!(
            "kim_q(0.5)={} kim_q(1)={} kruse_q(10)={} kim_q(10)={}",
            q(0.5),
            q(1.0),
            atmos::kruse_q(10.0).unwrap(),
            q(10.0)
        ),
    )
}

fn eigensolver_oracle() -> Outcome {
    let mut rng = support::rng(2024);
    let (mut ev_err, mut rec_err, mut orth_err) = (0.0f64, 0.0f64, 0.0f64);
    for trial in 0..200 {
        let n = 1 + trial % 6;
        let rows = support::random_symmetric(n, 5.0, &mut rng);
        let s = Matrix::from_rows(rows.clone()).unwrap();
        let eig = jacobi::eigh_symmetric(&s).map_err(|e| e.to_string())?;
        let oracle = support::eigenvalues_by_bisection(&rows);
        for (a, b) in eig.values.iter().zip(&oracle) {
            ev_err = ev_err.max((a - b).abs());
        }
        let e = &eig.vectors;
        let recon = e
            .matmul(&Matrix::from_diagonal(&eig.values))
            .and_then(|ed| ed.matmul(&e.transpose()))
            .and_then(|r| r.sub(&s))
            .map_err(|e| e.to_string())?;
        rec_err = rec_err.max(recon.frobenius_norm() / s.frobenius_norm().max(f64::MIN_POSITIVE));
        let gram = e
            .transpose()
            .matmul(e)
            .unwrap()
            .sub(&Matrix::identity(n))
            .unwrap();
        orth_err = orth_err.max(gram.max_abs());
    }
    check(
        ev_err <= 1e-7 && rec_err <= 1e-8 && orth_err <= 1e-10,
        format!(
            "200 matrices n<=6: eigenvalue err {ev_err:e} (tol 1e-7), reconstruction {rec_err:e}·‖S‖ (tol 1e-8), orthonormality {orth_err:e} (tol 1e-10)"
        ),
    )
}

fn kaiser_selection() -> Outcome {
    let pairs = [
        (7.624, 1.020),
        (7.234, 0.984),
        (6.204, 1.723),
        (7.354, 0.876),
        (7.104, 0.865),
    ];
    let expected = [2, 1, 2, 1, 1];
    let mut got = Vec::new();
    let mut fixed_two = true;
    for (pc1, pc2) in pairs {
        let values = [pc1, pc2, 0.4, 0.3, 0.2, 0.1];
        got.push(
            SelectionRule::Kaiser
                .select(&values)
                .map_err(|e| e.to_string())?,
        );
        fixed_two &= SelectionRule::Fixed(2)
            .select(&values)
            .map_err(|e| e.to_string())?
            == 2;
    }
    check(
        got == expected && fixed_two,
        format!(
            "kaiser k={got:?} (expected {expected:?}); fixed(2) retains 2 everywhere: {fixed_two}"
        ),
    )
}

fn gradient_check() -> Outcome {
    let mut rng = support::rng(6);
    let acts = [Activation::Tanh, Activation::Logistic, Activation::Linear];
    let h = 1e-6;
    let mut worst = 0.0f64;
    for net_index in 0..20u64 {
        use rand::Rng;
        let k = rng.random_range(1..=4);
        let m = rng.random_range(1..=5);
        let l = rng.random_range(1..=2);
        let hidden = acts[rng.random_range(0..3)];
        let output = acts[rng.random_range(0..3)];
        let mut net = mlp::init_network_with([k, m, l], net_index, hidden, output).unwrap();
        for i in 0..net.parameter_count() {
            *net.parameter_mut(i) = rng.random_range(-1.0..1.0);
        }
        let samples = rng.random_range(1..=5);
        let xs: Vec<Vec<f64>> = (0..samples)
            .map(|_| (0..k).map(|_| rng.random_range(-2.0..2.0)).collect())
            .collect();
        let ts: Vec<Vec<f64>> = (0..samples)
            .map(|_| (0..l).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let (_, grads) = mlp::gradients(&net, &xs, &ts).map_err(|e| e.to_string())?;
        for (i, analytic) in grads.to_vec().into_iter().enumerate() {
            let mut plus = net.clone();
            *plus.parameter_mut(i) += h;
            let mut minus = net.clone();
            *minus.parameter_mut(i) -= h;
            let numeric = (mlp::loss(&plus, &xs, &ts).unwrap()
                - mlp::loss(&minus, &xs, &ts).unwrap())
                / (2.0 * h);
            let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-4);
            worst = worst.max(rel);
        }
    }
    check(
        worst < 1e-6,
        format!("20 nets: max relative error {worst:e} (tol 1e-6, floor 1e-4)"),
    )
}

fn loss_unit() -> Outcome {
    let net = mlp::init_network_with([1, 1, 1], 0, Activation::Tanh, Activation::Linear).unwrap();
    let mut zero = net.clone();
    for i in 0..zero.parameter_count() {
        *zero.parameter_mut(i) = 0.0;
    }
    let l = mlp::loss(&zero, &[vec![0.3]], &[vec![1.0]]).map_err(|e| e.to_string())?;
    check(l == 0.5, format!("loss(e=1, output=0) = {l}"))
}

fn metrics_consistency() -> Outcome {
    let pairs: [(f64, f64); 5] = [
        (4.1611, 17.3140),
        (5.6380, 31.7860),
        (6.1198, 37.4500),
        (3.4714, 12.0507),
        (6.6139, 43.7460),
    ];
    let worst_pair = pairs
        .iter()
        .map(|(r, m)| (r * r - m).abs())
        .fold(0.0f64, f64::max);
    let mut rng = support::rng(8);
    let mut worst_identity = 0.0f64;
    for _ in 0..500 {
        use rand::Rng;
        let n = rng.random_range(1..50);
        let a: Vec<f64> = (0..n).map(|_| rng.random_range(1.0..40.0)).collect();
        let p: Vec<f64> = (0..n).map(|_| rng.random_range(-40.0..40.0)).collect();
        let r = metrics::evaluate(&a, &p).map_err(|e| e.to_string())?;
        worst_identity = worst_identity.max((r.rmse * r.rmse - r.mse).abs() / r.mse.max(1.0));
    }
    check(
        worst_pair <= 0.01 && worst_identity <= 1e-12,
        format!("reported pairs max |RMSE²-MSE| = {worst_pair:.5} (tol 0.01); own identity rel err {worst_identity:e} (tol 1e-12)"),
    )
}

/// Settings of the desk-scale end-to-end run.
const E2E_SNR_NOISE_DB: f64 = 1.0;

fn e2e_run() -> Result<(String, f64, f64, usize), String> {
    let synth = SynthConfig {
        m_observations: 2000,
        noise_std: 0.1,
        visibility_range_km: (1.0, 20.0),
        seed: 11,
        ..SynthConfig::default()
    };
    let table = dataset::synthesize_weather(&synth).map_err(|e| e.to_string())?;
    let table = dataset::attach_snr_target(
        &table,
        &LinkParams::default(),
        LinkGeometry::default(),
        SizeModel::Kruse,
        E2E_SNR_NOISE_DB,
        12,
    )
    .map_err(|e| e.to_string())?;
    let parts = dataset::split(&table, SplitFractions::default(), 13).map_err(|e| e.to_string())?;
    let config = HybridConfig {
        selection_rule: SelectionRule::Kaiser,
        train: TrainConfig {
            learning_rate: 0.3,
            max_epochs: 50,
            seed: 14,
            ..TrainConfig::default()
        },
        ..HybridConfig::default()
    };
    let (model, _) =
        pipeline::fit_hybrid(&parts.train, Some(&parts.val), &config).map_err(|e| e.to_string())?;
    let report = pipeline::evaluate_hybrid(&model, &parts.test).map_err(|e| e.to_string())?;
    let targets = parts.test.targets().map_err(|e| e.to_string())?;
    let mean = targets.iter().sum::<f64>() / targets.len() as f64;
    let baseline = metrics::rmse(targets, &vec![mean; targets.len()]).map_err(|e| e.to_string())?;
    let predictions = pipeline::predict(&model, &parts.test).map_err(|e| e.to_string())?;
    let bytes = format!(
        "{}\n{predictions:?}",
        model.to_json().map_err(|e| e.to_string())?
    );
    Ok((bytes, report.rmse, baseline, model.k_selected))
}

fn end_to_end() -> Outcome {
    let start = Instant::now();
    let (first, rmse, baseline, k) = e2e_run()?;
    let (second, _, _, _) = e2e_run()?;
    let elapsed = start.elapsed();
    let limit = 1.5 * E2E_SNR_NOISE_DB;
    check(
        rmse <= limit && first == second && elapsed < Duration::from_secs(60),
        format!(
            "k={k} test RMSE {rmse:.4} dB (limit {limit}; constant predictor {baseline:.4}); identical reruns: {}; {:.1}s for two runs (limit 60 s)",
            first == second,
            elapsed.as_secs_f64()
        ),
    )
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("attenuation reproduction", attenuation_reproduction, None),
        ("visibility-definition identity", visibility_identity, None),
        ("Kim-model continuity", kim_continuity, None),
        (
            "eigensolver oracle equivalence",
            eigensolver_oracle,
            Some(Duration::from_secs(5)),
        ),
        ("Kaiser selection", kaiser_selection, None),
        (
            "gradient correctness",
            gradient_check,
            Some(Duration::from_secs(5)),
        ),
        ("loss unit", loss_unit, None),
        ("metrics internal consistency", metrics_consistency, None),
        (
            "end-to-end desk-scale run",
            end_to_end,
            Some(Duration::from_secs(60)),
        ),
    ];
    let mut failures = 0;
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let mut outcome = run();
        let elapsed = start.elapsed();
        if let (Some(budget), Ok(detail)) = (budget, &outcome) {
            if elapsed > *budget {
                outcome = Err(format!("{detail}; took {elapsed:?}, budget {budget:?}"));
            }
        }
        match outcome {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("criterion {}: FAIL {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "criterion 10: NOTE per-station metrics, eigenvalues, loss magnitudes and absolute SNR depend on unavailable station data and are not reproduced"
    );
    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
