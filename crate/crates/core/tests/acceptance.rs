//! Exit criteria. Each test prints one `[PASS]`/`[FAIL]` line and then
//! asserts. Run with `cargo test --test acceptance -- --nocapture`.

mod common;

use std::path::PathBuf;
use std::time::{Duration, Instant};

use common::{dense_smooth, malformed_headers, random_image, random_mask, tally};
use starseg::evaluation::{f1_score, COLOR_FN, COLOR_FP, COLOR_TN, COLOR_TP};
use starseg::io::{
    read_image, read_mask, write_image, write_mask, write_metrics_csv, ImageFileFormat,
    MetricsReport, ReportRow, CSV_HEADER,
};
use starseg::{
    confusion, detail_sum_map, dilated_kernel_2d, generate, metrics, overlay, reconstruct,
    select_optimal_level, smooth, starlet_decompose, sweep_levels, BinaryMask, ConfusionCounts,
    Error, Metrics, SweepEntry, SynthParams, ThresholdPolicy,
};

fn verdict(id: u32, name: &str, pass: bool, detail: String) {
    println!(
        "[{}] AC{id} {name}: {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "AC{id} {name} failed: {detail}");
}

#[test]
fn ac1_perfect_reconstruction() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for seed in 0..20 {
        let img = random_image(64, 64, 1000 + seed);
        let d = starlet_decompose(&img, 5).unwrap();
        worst = worst.max(reconstruct(&d).unwrap().max_abs_diff(&img).unwrap());
    }
    let elapsed = start.elapsed();
    verdict(
        1,
        "perfect reconstruction",
        worst <= 1e-10 && elapsed < Duration::from_secs(5),
        format!("max |err| = {worst:.3e} (tol 1e-10), {elapsed:.2?} (limit 5 s)"),
    );
}

#[test]
fn ac2_filter_bank_fidelity() {
    // Published 5x5 matrix as numerator / denominator pairs.
    let rational: [[(u32, u32); 5]; 5] = [
        [(1, 256), (1, 64), (3, 128), (1, 64), (1, 256)],
        [(1, 64), (1, 16), (3, 32), (1, 16), (1, 64)],
        [(3, 128), (3, 32), (9, 64), (3, 32), (3, 128)],
        [(1, 64), (1, 16), (3, 32), (1, 16), (1, 64)],
        [(1, 256), (1, 64), (3, 128), (1, 64), (1, 256)],
    ];
    let k = dilated_kernel_2d(1).unwrap();
    let mut exact = k.side() == 5;
    for (r, row) in rational.iter().enumerate() {
        for (c, &(n, d)) in row.iter().enumerate() {
            // Dyadic rationals are exact in binary floating point.
            exact &= k.at(r, c) == n as f64 / d as f64;
            exact &= k.at(r, c) * 256.0 == (n * 256 / d) as f64;
        }
    }
    let mut worst_mass = 0.0f64;
    for j in 1..=8 {
        worst_mass = worst_mass.max((dilated_kernel_2d(j).unwrap().sum() - 1.0).abs());
    }
    verdict(
        2,
        "filter-bank fidelity",
        exact && worst_mass <= 1e-12,
        format!("level-1 matrix exact = {exact}, max |mass - 1| over j=1..8 = {worst_mass:.3e} (tol 1e-12)"),
    );
}

#[test]
fn ac3_oracle_equivalence() {
    let mut worst = 0.0f64;
    for seed in 0..10 {
        let img = random_image(16, 16, 3000 + seed);
        for j in 1..=3 {
            let d = smooth(&img, j)
                .unwrap()
                .max_abs_diff(&dense_smooth(&img, j))
                .unwrap();
            worst = worst.max(d);
        }
    }
    verdict(
        3,
        "oracle equivalence",
        worst <= 1e-12,
        format!("separable vs dense mirror convolution, 16x16, j=1..3: max |diff| = {worst:.3e} (tol 1e-12)"),
    );
}

#[test]
fn ac4_telescoping() {
    let mut worst = 0.0f64;
    for seed in 0..10 {
        let img = random_image(64, 48, 4000 + seed);
        let c1 = smooth(&img, 1).unwrap();
        let c2 = smooth(&c1, 2).unwrap();
        for levels in 3..=5 {
            let d = starlet_decompose(&img, levels).unwrap();
            let s = detail_sum_map(&d, &img, 3).unwrap();
            for p in 0..img.pixels().len() {
                let e = (c2.pixels()[p] - d.residual().pixels()[p]) - img.pixels()[p];
                worst = worst.max((s.scores()[p] - e).abs());
            }
        }
    }
    verdict(
        4,
        "telescoping check",
        worst <= 1e-10,
        format!("detail sum minus input vs (c2 - cL) - c0: max |diff| = {worst:.3e} (tol 1e-10)"),
    );
}

#[test]
fn ac5_paper_anchored_selection() {
    let entry = |level, p: f64, r: f64| SweepEntry {
        level,
        metrics: Metrics {
            precision: p,
            recall: r,
            accuracy: 0.0,
            f1: f1_score(p, r),
        },
        counts: ConfusionCounts::default(),
    };
    let sweep = [entry(6, 0.2689, 0.6213), entry(7, 0.2849, 0.8902)];
    let chosen = select_optimal_level(&sweep).unwrap();
    verdict(
        5,
        "paper-anchored selection",
        chosen == 7,
        format!(
            "F1(L=6) = {:.4}, F1(L=7) = {:.4}, selected L = {chosen} (expected 7)",
            sweep[0].metrics.f1, sweep[1].metrics.f1
        ),
    );
}

#[test]
fn ac6_synthetic_benchmark() {
    let start = Instant::now();
    let mut lines = Vec::new();
    let mut all_ok = true;
    for i in 0..10u64 {
        let params = SynthParams {
            width: 256,
            height: 256,
            blob_count: 10 + (i as usize * 20) / 9,
            radius_range: (3.0, 8.0),
            noise_sigma: 0.05,
            roughness_amplitude: 0.1,
            seed: 600 + i,
            ..SynthParams::default()
        };
        let sample = generate(&params).unwrap();
        let sweep =
            sweep_levels(&sample.image, &sample.truth, 3, 8, ThresholdPolicy::Otsu).unwrap();
        let level = select_optimal_level(&sweep.entries).unwrap();
        let m = sweep
            .entries
            .iter()
            .find(|e| e.level == level)
            .unwrap()
            .metrics;
        let ok = m.accuracy >= 0.85 && m.f1 >= 0.5;
        all_ok &= ok;
        lines.push(format!(
            "seed {} blobs {} L={level} (cap {:?}) acc {:.4} f1 {:.4}{}",
            params.seed,
            params.blob_count,
            sweep.capped_at,
            m.accuracy,
            m.f1,
            if ok { "" } else { "  <-- below threshold" }
        ));
    }
    let elapsed = start.elapsed();
    for l in &lines {
        println!("    {l}");
    }
    verdict(
        6,
        "synthetic benchmark",
        all_ok && elapsed < Duration::from_secs(30),
        format!(
            "10 images, accuracy >= 0.85 and F1 >= 0.5 each: {all_ok}; {elapsed:.2?} (limit 30 s)"
        ),
    );
}

#[test]
fn ac7_metrics_oracle() {
    let mut counts_ok = true;
    let mut colors_ok = true;
    for seed in 0..100u64 {
        let w = 8 + (seed as usize % 25);
        let h = 5 + (seed as usize * 7 % 30);
        let density = 0.05 + (seed % 10) as f64 * 0.09;
        let pred = random_mask(w, h, density, 7000 + seed);
        let gt = random_mask(w, h, 0.3, 9000 + seed);
        let c = confusion(&pred, &gt).unwrap();
        let t = tally(&pred, &gt);
        counts_ok &= (c.true_pos, c.false_pos, c.false_neg, c.true_neg) == t;
        let ov = overlay(&pred, &gt).unwrap();
        colors_ok &= ov.count_color(COLOR_TP) as u64 == c.true_pos
            && ov.count_color(COLOR_FP) as u64 == c.false_pos
            && ov.count_color(COLOR_FN) as u64 == c.false_neg
            && ov.count_color(COLOR_TN) as u64 == c.true_neg;
    }
    verdict(
        7,
        "metrics oracle",
        counts_ok && colors_ok,
        format!("100 random pairs: counts == per-pixel tally: {counts_ok}; overlay colors == counts: {colors_ok}"),
    );
}

#[test]
fn ac8_format_round_trips() {
    let fixtures = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let fixture = |n: &str| std::fs::read(fixtures.join(n)).unwrap();

    let mut worst = 0.0f64;
    for seed in 0..20 {
        let img = random_image(37, 23, 8000 + seed);
        for fmt in [ImageFileFormat::PgmBinary, ImageFileFormat::PgmAscii] {
            let back = read_image(&write_image(&img, fmt).unwrap()).unwrap();
            worst = worst.max(back.max_abs_diff(&img).unwrap());
        }
    }
    let gray_ok = worst <= 1.0 / 510.0;

    let mask = BinaryMask::new(2, 1, vec![true, false]).unwrap();
    let mask_bytes = write_mask(&mask, ImageFileFormat::PgmBinary).unwrap();
    let random = random_mask(31, 17, 0.4, 5);
    let mask_ok = mask_bytes == fixture("mask_2x1.pgm")
        && mask_bytes == write_mask(&mask, ImageFileFormat::PgmBinary).unwrap()
        && read_mask(&write_mask(&random, ImageFileFormat::PgmBinary).unwrap()).unwrap() == random;

    let row = |image: &str, level, c: (u64, u64, u64, u64), chosen| {
        let counts = ConfusionCounts {
            true_pos: c.0,
            false_pos: c.1,
            false_neg: c.2,
            true_neg: c.3,
        };
        ReportRow {
            image: image.to_string(),
            level,
            counts,
            metrics: metrics(&counts).unwrap(),
            chosen,
        }
    };
    let report = MetricsReport {
        rows: vec![
            row("img-b", 4, (3, 1, 2, 94), true),
            row("img-a", 3, (5, 5, 5, 85), false),
            row("img-b", 3, (0, 0, 5, 95), false),
            row("img-a", 4, (8, 2, 2, 88), true),
        ],
    };
    let one = MetricsReport {
        rows: vec![row("img-a", 6, (8, 2, 2, 88), true)],
    };
    let csv_ok = write_metrics_csv(&report) == fixture("report_multi.csv")
        && write_metrics_csv(&report) == write_metrics_csv(&report)
        && write_metrics_csv(&one) == fixture("report_one.csv")
        && write_metrics_csv(&MetricsReport::default()) == format!("{CSV_HEADER}\n").into_bytes();

    let mutants = malformed_headers();
    let rejected = mutants
        .iter()
        .filter(|(_, b)| {
            matches!(
                std::panic::catch_unwind(|| read_image(b)),
                Ok(Err(Error::Parse(_)))
            )
        })
        .count();
    let fuzz_ok = mutants.len() >= 20 && rejected == mutants.len();

    verdict(
        8,
        "format round-trips",
        gray_ok && mask_ok && csv_ok && fuzz_ok,
        format!(
            "PGM max err {worst:.3e} (tol {:.3e}); mask golden/exact {mask_ok}; CSV golden/deterministic {csv_ok}; \
             fuzz {rejected}/{} rejected",
            1.0 / 510.0,
            mutants.len()
        ),
    );
}
