//! End-to-end acceptance checks. Runs as a plain binary so that each
//! criterion reports one line, with its measured values and wall time.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use lbd_core::biht::Biht;
use lbd_core::field::{Field, Patch};
use lbd_core::pipeline::{describe_image, edge_correlation, invert_records};
use lbd_core::primal_dual::{objective_real, PrimalDual};
use lbd_core::proxops::{prox_f1_star, prox_f2_star};
use lbd_core::sensing::{build_brief, build_freak, describe, power_iterations, FreakVariant, Pattern};
use lbd_core::wavelet::{analyze, keep_largest, synthesize};
use lbd_core::{
    reconstruct_binary, reconstruct_real, BihtConfig, DescriptorFile, GrayImage, PdConfig, SamplingMode, SolverChoice,
};
use rand::Rng;

const ANGLES: [f64; 4] = [0.0, 45.0, 90.0, 135.0];

type Outcome = Result<String, String>;
type Check = (&'static str, fn() -> Outcome);

fn within(limit_s: u64, start: Instant, detail: String) -> Outcome {
    let t = start.elapsed();
    if t <= Duration::from_secs(limit_s) {
        Ok(detail)
    } else {
        Err(format!("{detail}; took {:.1}s > {limit_s}s", t.as_secs_f64()))
    }
}

fn edges() -> Vec<Patch> {
    ANGLES.iter().map(|&a| edge_patch(32, a, 0.25, 0.75)).collect()
}

fn operator_correctness() -> Outcome {
    let start = Instant::now();
    let patterns = [
        build_brief(8, 16, 1).unwrap(),
        build_freak(8, 16, FreakVariant::Freak, 0).unwrap(),
        build_freak(8, 16, FreakVariant::RaFreak, 2).unwrap(),
        build_freak(8, 16, FreakVariant::ExFreak, 0).unwrap(),
    ];
    let mut g = rng(1);
    let (mut worst_entry, mut worst_adj) = (0.0f64, 0.0f64);
    for p in &patterns {
        let a = dense_matrix(p);
        for _ in 0..100 {
            let x = random_vec(&mut g, 64, -1.0, 1.0);
            let y = random_vec(&mut g, p.len(), -1.0, 1.0);
            let lx = p.forward(&Field::new(8, x.clone()).unwrap()).unwrap();
            for (i, row) in a.iter().enumerate() {
                worst_entry = worst_entry.max((lx[i] - dot(row, &x)).abs());
            }
            let lty = p.adjoint(&y).unwrap();
            let rel = (dot(&lx, &y) - dot(&x, lty.values())).abs() / (norm(&lx) * norm(&y));
            worst_adj = worst_adj.max(rel);
        }
    }
    let detail = format!("max entry error {worst_entry:.1e}, max adjoint gap {worst_adj:.1e}");
    if worst_entry <= 1e-9 && worst_adj <= 1e-10 {
        within(5, start, detail)
    } else {
        Err(detail)
    }
}

fn prox_oracles() -> Outcome {
    let start = Instant::now();
    let mut g = rng(2);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let lambda = g.random_range(0.01..1.0);
        let sigma = g.random_range(0.01..2.0);
        let p = g.random_range(-1.0..1.0);
        let r = g.random_range(-2.0..2.0);
        let want = grid_argmin(-lambda, lambda, |w| sigma * w * p + 0.5 * (w - r) * (w - r));
        worst = worst.max((prox_f1_star(&[r], sigma, lambda, &[p]).unwrap()[0] - want).abs());
        let s = g.random_range(-3.0..3.0);
        let want = grid_argmin(-1.0, 1.0, |w| 0.5 * (w - s) * (w - s));
        worst = worst.max((prox_f2_star(&[s])[0] - want).abs());
    }
    let detail = format!("max deviation from grid search {worst:.1e}");
    if worst <= 2e-5 {
        within(10, start, detail)
    } else {
        Err(detail)
    }
}

fn wavelet() -> Outcome {
    let mut g = rng(3);
    let (mut parseval, mut recon) = (0.0f64, 0.0f64);
    for _ in 0..1000 {
        let f = Field::new(32, random_vec(&mut g, 1024, -1.0, 1.0)).unwrap();
        let w = analyze(&f).unwrap();
        parseval = parseval.max((w.norm() - f.norm()).abs());
        let back = synthesize(&w);
        for (a, b) in back.values().iter().zip(f.values()) {
            recon = recon.max((a - b).abs());
        }
    }
    let mut suboptimal = 0;
    for _ in 0..200 {
        let v = random_vec(&mut g, 8, -1.0, 1.0);
        for k in 0..=8 {
            let mut h = v.clone();
            keep_largest(&mut h, k);
            let err = |p: &[f64]| -> f64 { v.iter().zip(p).map(|(a, b)| (a - b).powi(2)).sum() };
            let best = (0u32..256)
                .filter(|m| m.count_ones() as usize == k)
                .map(|m| err(&(0..8).map(|i| if m >> i & 1 == 1 { v[i] } else { 0.0 }).collect::<Vec<_>>()))
                .fold(f64::INFINITY, f64::min);
            if err(&h) > best + 1e-15 {
                suboptimal += 1;
            }
        }
    }
    let detail = format!("Parseval {parseval:.1e}, reconstruction {recon:.1e}, {suboptimal} suboptimal H_K supports");
    if parseval <= 1e-10 && recon <= 1e-10 && suboptimal == 0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn power_method() -> Outcome {
    let mut worst = 0.0f64;
    for trial in 0..10u64 {
        let side = if trial < 5 { 8 } else { 16 };
        let m = 10 + 5 * trial as usize;
        let p = if trial % 2 == 0 {
            build_brief(side, m, trial).unwrap()
        } else {
            build_freak(side, m, FreakVariant::RaFreak, trial).unwrap()
        };
        let a = dense_matrix(&p);
        let top = nalgebra::DMatrix::from_fn(p.len(), p.patch_len(), |i, j| a[i][j])
            .singular_values()
            .max();
        let est = *power_iterations(&p, 100, trial).last().unwrap();
        worst = worst.max((est - top).abs() / top);
    }
    let detail = format!("max relative error {:.3}%", 100.0 * worst);
    if worst <= 0.01 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn biht_orientations(pattern: &Pattern) -> Vec<f64> {
    edges()
        .iter()
        .zip(ANGLES)
        .map(|(e, a)| {
            let d = describe(pattern, e, true).unwrap();
            let sol = reconstruct_binary(&d, pattern, &BihtConfig::default()).unwrap();
            angle_error(edge_orientation(&sol.patch), a)
        })
        .collect()
}

fn biht_edges() -> Outcome {
    let start = Instant::now();
    let e512 = biht_orientations(&build_freak(32, 512, FreakVariant::Freak, 0).unwrap());
    let e128 = biht_orientations(&build_freak(32, 128, FreakVariant::Freak, 0).unwrap());
    let detail = format!("errors M=512 {:.1?}°, M=128 {:.1?}°", e512, e128);
    if e512.iter().all(|e| *e <= 15.0) && e128.iter().all(|e| *e <= 25.0) {
        within(10, start, detail)
    } else {
        Err(detail)
    }
}

fn pd_edges() -> Outcome {
    let start = Instant::now();
    let p = build_freak(32, 512, FreakVariant::Freak, 0).unwrap();
    let mut errors = Vec::new();
    let mut ranges = Vec::new();
    let mut monotone = true;
    for (e, a) in edges().iter().zip(ANGLES) {
        let d = describe(&p, e, false).unwrap();
        let mut pd = PrimalDual::new(&d, &p, &PdConfig::default()).unwrap();
        pd.run(50);
        let early = objective_real(&pd.estimate(), &d, &p, 0.1).unwrap();
        pd.run(950);
        let x = pd.estimate();
        monotone &= objective_real(&x, &d, &p, 0.1).unwrap() <= early;
        let (lo, hi) = x.values().iter().fold((1.0f64, 0.0f64), |(l, h), v| (l.min(*v), h.max(*v)));
        ranges.push(hi - lo);
        // a flat output has no orientation at all
        errors.push(if hi - lo > 1e-6 { angle_error(edge_orientation(&x), a) } else { f64::NAN });
    }
    let detail = format!(
        "errors {:.1?}° (NaN = flat output), output ranges {:.3?}, objective non-increasing: {monotone}",
        errors, ranges
    );
    if errors.iter().all(|e| *e <= 15.0) && monotone {
        within(30, start, detail)
    } else {
        Err(detail)
    }
}

fn constraints() -> Outcome {
    let p = build_freak(32, 512, FreakVariant::Freak, 0).unwrap();
    let mut g = rng(7);
    let mut patches = edges();
    patches.extend((0..6).map(|_| natural_patch(&mut g, 32)));
    let in_box = |x: &Field| x.values().iter().all(|v| (0.0..=1.0).contains(v));
    let mut outputs_ok = true;
    let mut sparse_ok = true;
    for patch in &patches {
        let bin = describe(&p, patch, true).unwrap();
        let mut solver = Biht::new(&bin, &p, &BihtConfig::default()).unwrap();
        for _ in 0..200 {
            solver.step();
            sparse_ok &= solver.sparse_coeffs().iter().filter(|c| **c != 0.0).count() <= solver.k();
            outputs_ok &= in_box(solver.x());
        }
        let real = describe(&p, patch, false).unwrap();
        outputs_ok &= in_box(&reconstruct_real(&real, &p, &PdConfig::default()).unwrap());
    }
    let flat = Patch::constant(32, 0.37).unwrap();
    let b = reconstruct_binary(&describe(&p, &flat, true).unwrap(), &p, &BihtConfig::default()).unwrap();
    let r = reconstruct_real(&describe(&p, &flat, false).unwrap(), &p, &PdConfig::default()).unwrap();
    let dev = |x: &Field| x.values().iter().fold(0.0f64, |m, v| m.max((v - 0.5).abs()));
    let (db, dr) = (dev(&b.patch), dev(&r));
    let detail = format!(
        "outputs in [0,1]: {outputs_ok}, K-sparse: {sparse_ok}, constant patch deviation BIHT {db:.1e} PD {dr:.1e}"
    );
    if outputs_ok && sparse_ok && db <= 1e-6 && dr <= 1e-6 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn contours() -> Outcome {
    let start = Instant::now();
    let scene = two_shapes(64);
    let p = build_freak(32, 512, FreakVariant::Freak, 0).unwrap();
    let solver = SolverChoice::Biht(BihtConfig::default());
    let rec = lbd_core::pipeline::reconstruct_image(&scene, &p, &solver, &SamplingMode::Grid { offset: 1 }, 0)
        .map_err(|e| e.to_string())?;
    let corr = edge_correlation(&rec.image, &scene).map_err(|e| e.to_string())?;
    let detail = format!("{} patches, Laplacian correlation {corr:.3}", rec.patches);
    if corr >= 0.5 {
        within(300, start, detail)
    } else {
        Err(detail)
    }
}

fn round_trip(scene: &GrayImage, pattern: &Pattern, workers: usize) -> Vec<u8> {
    let records = describe_image(scene, pattern, &SamplingMode::Grid { offset: 4 }, true).unwrap();
    let bytes = DescriptorFile::new(pattern, records).unwrap().to_bytes().unwrap();
    let file = DescriptorFile::from_bytes(&bytes).unwrap();
    file.check_pattern(pattern).unwrap();
    let (w, h) = file.extent();
    let solver = SolverChoice::Biht(BihtConfig::default());
    invert_records(&file.records, pattern, &solver, w, h, workers).unwrap().image.to_pgm()
}

fn determinism() -> Outcome {
    let scene = two_shapes(64);
    let p = build_freak(32, 512, FreakVariant::Freak, 0).unwrap();
    let a = round_trip(&scene, &p, 1);
    let b = round_trip(&scene, &p, 1);
    let c = round_trip(&scene, &p, 4);
    let d = round_trip(&scene, &p, 0);
    let detail = format!("{} byte PGM; run-to-run equal: {}, 1 vs N workers equal: {}", a.len(), a == b, a == c && a == d);
    if a == b && a == c && a == d {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn main() -> ExitCode {
    let criteria: [Check; 9] = [
        ("operator correctness", operator_correctness),
        ("prox oracles", prox_oracles),
        ("wavelet", wavelet),
        ("power method", power_method),
        ("BIHT edge recovery", biht_edges),
        ("primal-dual edge recovery", pd_edges),
        ("constraint suite", constraints),
        ("dense-overlap contours", contours),
        ("end-to-end determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {} {tag} {name}: {detail} [{secs:.2}s]", i + 1);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
