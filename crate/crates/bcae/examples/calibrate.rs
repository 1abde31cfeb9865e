//! Scratch calibration runs for the figure configurations.

use bcae::analysis::{
    detect_gray_user2, extract_constellation, power_decomposition, user1_label_separable,
    DISTINCT_POINT_TOL,
};
use bcae::autoencoder::{train, ArchSpec, TrainConfig};
use bcae::channel::ChannelConfig;

fn run(label: &str, arch: &ArchSpec, snr1: f64, snr2: f64, seed: u64, steps: usize) {
    let channel = ChannelConfig::new(snr1, snr2, 1.0).unwrap();
    let cfg = TrainConfig {
        steps,
        seed,
        ..TrainConfig::default()
    };
    let t0 = std::time::Instant::now();
    match train(arch, &channel, &cfg) {
        Ok(model) => {
            let c = extract_constellation(&model).unwrap();
            let split = power_decomposition(&c);
            let first = model.history.first().unwrap().loss;
            let last = model.history.last().unwrap().loss;
            println!(
                "{label} seed={seed}: ratio_db={} frac1={:.4} gray={} sep={} distinct={} loss {:.3}->{:.4} ({:.1?})",
                split.ratio_db,
                split.fraction_user1(),
                detect_gray_user2(&c),
                user1_label_separable(&c),
                c.distinct_points(DISTINCT_POINT_TOL),
                first,
                last,
                t0.elapsed()
            );
        }
        Err(e) => println!("{label} seed={seed}: FAILED {e}"),
    }
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let which = args.get(1).map(String::as_str).unwrap_or("all");
    let steps: usize = args
        .get(2)
        .and_then(|s| s.parse().ok())
        .unwrap_or(20_000);
    let t1 = ArchSpec::table1(1, 1).unwrap();
    let t2 = ArchSpec::table2(1, 2).unwrap();

    if which == "all" || which == "fig4" {
        for seed in 1..=5 {
            run("fig4 (5/5)", &t1, 5.0, 5.0, seed, steps);
        }
    }
    if which == "all" || which == "fig3" {
        for seed in 1..=5 {
            run("fig3 (5/30)", &t1, 5.0, 30.0, seed, steps);
        }
    }
    if which == "all" || which == "fig6" {
        for seed in 1..=5 {
            run("fig6 (-10/30)", &t1, -10.0, 30.0, seed, steps);
        }
    }
    if which == "all" || which == "fig7" {
        for seed in 1..=5 {
            run("fig7 (20/40 t2)", &t2, 20.0, 40.0, seed, steps);
        }
    }
    if which == "fig5" {
        for (i, snr2) in [10.0, 15.0, 20.0, 25.0, 30.0].iter().enumerate() {
            for r in 0..3u64 {
                let seed = bcae::streams::derive_seed(20, i as u64, r);
                run(&format!("fig5 snr2={snr2}"), &t1, 10.0, *snr2, seed, steps);
            }
        }
    }
    if which == "fig7scan" {
        for seed in 1..=30 {
            run("fig7 (20/40 t2)", &t2, 20.0, 40.0, seed, steps);
        }
    }
    if which == "fig7range" {
        let from: u64 = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(1);
        let to: u64 = args.get(4).and_then(|s| s.parse().ok()).unwrap_or(from);
        for seed in from..=to {
            run("fig7 (20/40 t2)", &t2, 20.0, 40.0, seed, steps);
        }
    }
    if which == "tentraj" {
        for &s in &[1000usize, 2000, 3000, 5000, 8000, 12000, 20000] {
            for seed in 1..=3u64 {
                run(&format!("10/10 steps={s}"), &t1, 10.0, 10.0, seed, s);
            }
        }
    }
    if which == "fig5rates" {
        for snr2 in [10.0, 15.0, 20.0, 25.0, 30.0] {
            for seed in 1..=15u64 {
                run(&format!("10/{snr2}"), &t1, 10.0, snr2, seed, steps);
            }
        }
    }
    if which == "fig5base" {
        let base: u64 = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(20);
        for (i, snr2) in [10.0, 15.0, 20.0, 25.0, 30.0].iter().enumerate() {
            for r in 0..3u64 {
                let seed = bcae::streams::derive_seed(base, i as u64, r);
                run(&format!("10/{snr2}"), &t1, 10.0, *snr2, seed, steps);
            }
        }
    }
    if which == "fig7dump" {
        let seed: u64 = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(1);
        let channel = ChannelConfig::new(20.0, 40.0, 1.0).unwrap();
        let cfg = TrainConfig {
            steps,
            seed,
            ..TrainConfig::default()
        };
        let model = train(&t2, &channel, &cfg).unwrap();
        let c = extract_constellation(&model).unwrap();
        let mut pts: Vec<(f64, usize, usize)> =
            c.iter().map(|(a, b, x)| (x, a, b)).collect();
        pts.sort_by(|p, q| p.0.total_cmp(&q.0));
        for (x, s1, s2) in pts {
            println!("x={x:+.4} s1={s1} s2={s2:02b}");
        }
    }
}
