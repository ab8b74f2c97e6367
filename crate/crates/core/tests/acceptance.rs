//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Runs without external data.

mod common;

use std::process::Command;
use std::sync::Arc;

use rand::Rng;
use regionfer::eval::{cross_validate, default_c_grid, default_gamma_grid, grid_search, stratified_kfold};
use regionfer::features::{extract_features, FeatureKinds, RegionSource};
use regionfer::geometry::{partition_grid, rasterize_region, BBox, RegionMask, RegionScheme};
use regionfer::lbp::{build_uniform_table, circular_transitions, lbp_histogram, NUM_BINS};
use regionfer::manifest::load_manifest;
use regionfer::model::SavedModel;
use regionfer::moments::{MomentSet, NCM_ORDERS};
use regionfer::selection::{greedy_forward_select, SelectionParams};
use regionfer::svm::kernel::KernelMatrix;
use regionfer::svm::{smo, train_binary_smo, train_multiclass_ova, TrainParams};
use regionfer::synth::{render_face, template_landmarks, write_dataset, FaceStyle};

use common::*;

type Outcome = Result<String, String>;

fn check(cond: bool, detail: impl Into<String>) -> Outcome {
    if cond {
        Ok(detail.into())
    } else {
        Err(detail.into())
    }
}

fn uniform_enumeration() -> Outcome {
    let table = build_uniform_table();
    let uniform: Vec<u8> = (0..=255u8).filter(|&c| circular_transitions(c) <= 2).collect();
    let mut bins: Vec<usize> = uniform.iter().map(|&c| table.bin(c)).collect();
    let oracle_ok = (0..=255u8).all(|c| table.bin(c) == oracle_bin(c));
    bins.sort_unstable();
    let bijective = bins == (0..58).collect::<Vec<_>>();
    let rest = (0..=255u8).filter(|c| !uniform.contains(c)).all(|c| table.bin(c) == 58);
    check(
        uniform.len() == 58 && bijective && rest && oracle_ok,
        format!("{} uniform codes, bijective onto 0..57: {bijective}", uniform.len()),
    )
}

fn random_mask(r: &mut impl Rng, w: usize, h: usize) -> (Vec<regionfer::Point>, RegionMask) {
    loop {
        let n = r.random_range(3..8);
        let poly = random_polygon(r, n, -2.0, w.max(h) as f64 + 2.0);
        if let Ok(mask) = rasterize_region(&poly, w, h, 0) {
            return (poly, mask);
        }
    }
}

fn lbp_oracle() -> Outcome {
    let mut r = rng(2);
    let mut compared = 0;
    for case in 0..100 {
        let img = random_image(&mut r, 32, 32, 255);
        let (_, mask) = random_mask(&mut r, 32, 32);
        let oracle = oracle_histogram(&img, |x, y| mask.contains(x, y));
        let interior = mask.pixels().filter(|&(x, y)| x > 0 && y > 0 && x < 31 && y < 31).count() as u64;
        match lbp_histogram(&img, &mask, false) {
            Ok(h) => {
                let raw: Vec<u64> = h.bins.iter().map(|&v| v as u64).collect();
                if raw != oracle || h.bins.iter().sum::<f64>() as u64 != interior {
                    return Err(format!("case {case}: histogram differs from the naive loop"));
                }
                compared += 1;
            }
            Err(_) if interior == 0 => {}
            Err(e) => return Err(format!("case {case}: {e}")),
        }
    }
    check(compared >= 90, format!("{compared}/100 masks matched exactly (others border-only)"))
}

fn lbp_shift() -> Outcome {
    let mut r = rng(3);
    for case in 0..100 {
        let img = random_image(&mut r, 32, 32, 245);
        let shifted = regionfer::Image::new(32, 32, img.data().iter().map(|&v| v + 10).collect()).unwrap();
        let (_, mask) = random_mask(&mut r, 32, 32);
        for normalize in [false, true] {
            let a = lbp_histogram(&img, &mask, normalize).map(|h| h.bins);
            let b = lbp_histogram(&shifted, &mask, normalize).map(|h| h.bins);
            match (a, b) {
                (Ok(a), Ok(b)) if a == b => {}
                (Err(_), Err(_)) => {}
                _ => return Err(format!("case {case}: histograms changed")),
            }
        }
    }
    check(true, "100 images, raw and normalized histograms identical")
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() <= tol * a.abs().max(b.abs())
}

fn moment_oracle() -> Outcome {
    let mut r = rng(4);
    let mut worst: f64 = 0.0;
    for case in 0..100 {
        let (_, mask) = random_mask(&mut r, 40, 40);
        let pixels: Vec<(usize, usize)> = mask.pixels().collect();
        let m = MomentSet::compute(&mask).map_err(|e| e.to_string())?;
        for p in 0..4u32 {
            for q in 0..4 - p {
                let raw = oracle_raw(&pixels, p, q) as f64;
                let mu = oracle_mu(&pixels, p, q);
                if !rel_close(m.m[p as usize][q as usize], raw, 1e-12) || !rel_close(m.mu[p as usize][q as usize], mu, 1e-12) {
                    return Err(format!("case {case}: order ({p},{q}) differs from the oracle"));
                }
                if mu != 0.0 {
                    worst = worst.max((m.mu[p as usize][q as usize] - mu).abs() / mu.abs());
                }
            }
        }
        for (k, &(p, q)) in NCM_ORDERS.iter().enumerate() {
            if !rel_close(m.nu[k], oracle_nu(&pixels, p, q), 1e-12) {
                return Err(format!("case {case}: nu{p}{q} differs from the oracle"));
            }
        }
        if m.mu[1][0] != 0.0 || m.mu[0][1] != 0.0 {
            return Err(format!("case {case}: first-order central moments not exactly 0"));
        }
        // translate by (7, -3); the canvas keeps every pixel at y >= 3
        let base: Vec<(usize, usize)> = pixels.iter().map(|&(x, y)| (x, y + 3)).collect();
        let moved: Vec<(usize, usize)> = base.iter().map(|&(x, y)| (x + 7, y - 3)).collect();
        let (a, b) = (
            MomentSet::compute(&RegionMask::from_pixels(0, &base)).unwrap(),
            MomentSet::compute(&RegionMask::from_pixels(0, &moved)).unwrap(),
        );
        if a.mu != b.mu || a.nu != b.nu {
            return Err(format!("case {case}: translation by (7,-3) changed mu or nu"));
        }
    }
    check(true, format!("100 masks, worst relative mu error {worst:.1e}; translation exact"))
}

fn ellipse(rx: f64, ry: f64) -> RegionMask {
    let (cx, cy) = (rx.ceil() + 2.5, ry.ceil() + 2.5);
    let (w, h) = ((2.0 * cx) as usize + 1, (2.0 * cy) as usize + 1);
    let pixels: Vec<(usize, usize)> = (0..h)
        .flat_map(|y| (0..w).map(move |x| (x, y)))
        .filter(|&(x, y)| {
            let (dx, dy) = ((x as f64 + 0.5 - cx) / rx, (y as f64 + 0.5 - cy) / ry);
            dx * dx + dy * dy <= 1.0
        })
        .collect();
    RegionMask::from_pixels(0, &pixels)
}

fn moment_scale() -> Outcome {
    let small = MomentSet::compute(&ellipse(20.0, 30.0)).unwrap().nu;
    let large = MomentSet::compute(&ellipse(40.0, 60.0)).unwrap().nu;
    let worst = small
        .iter()
        .zip(&large)
        .map(|(a, b)| if a == b { 0.0 } else { (a - b).abs() / a.abs().max(b.abs()) })
        .fold(0.0, f64::max);
    check(worst <= 0.02, format!("largest relative nu difference {:.3}%", 100.0 * worst))
}

fn rasterization() -> Outcome {
    let mut r = rng(6);
    let (w, h) = (48, 40);
    for case in 0..50 {
        let (poly, mask) = random_mask(&mut r, w, h);
        for y in 0..h {
            for x in 0..w {
                if mask.contains(x, y) != pnpoly(&poly, x as f64 + 0.5, y as f64 + 0.5) {
                    return Err(format!("polygon {case}: pixel ({x},{y}) disagrees"));
                }
            }
        }
    }
    let bbox = BBox { x0: 13, y0: 7, w: 101, h: 83 };
    for (rows, cols) in [(4, 5), (5, 6)] {
        let blocks = partition_grid(bbox, rows, cols).map_err(|e| e.to_string())?;
        let mut hits = vec![0u32; bbox.w * bbox.h];
        for b in &blocks {
            for (x, y) in b.pixels() {
                if x < bbox.x0 || y < bbox.y0 || x >= bbox.x0 + bbox.w || y >= bbox.y0 + bbox.h {
                    return Err(format!("{rows}x{cols}: block leaves the box"));
                }
                hits[(y - bbox.y0) * bbox.w + (x - bbox.x0)] += 1;
            }
        }
        if blocks.len() != rows * cols || hits.iter().any(|&c| c != 1) {
            return Err(format!("{rows}x{cols} grid is not an exact disjoint cover"));
        }
    }
    check(true, "50 polygons match even-odd test on every pixel center; 4x5 and 5x6 grids cover exactly")
}

fn svm_dual_oracle() -> Outcome {
    let mut r = rng(7);
    let mut worst_gap: f64 = 0.0;
    let mut worst_kkt: f64 = 0.0;
    let mut worst_eq: f64 = 0.0;
    let mut problems = 0;
    for _ in 0..10 {
        let n = r.random_range(2..=5);
        let x: Vec<Vec<f64>> = (0..n).map(|_| vec![r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)]).collect();
        let mut y: Vec<f64> = (0..n).map(|_| if r.random_bool(0.5) { 1.0 } else { -1.0 }).collect();
        y[0] = 1.0;
        y[1] = -1.0;
        for c in [0.5, 5.0] {
            for gamma in [0.5, 2.0] {
                let params = TrainParams::new(c, gamma);
                let mut k = KernelMatrix::from_points(Arc::new(x.clone()), gamma);
                let sol = smo::solve(&mut k, &y, &params, false);
                let brute = brute_force_dual(&x, &y, c, gamma);
                let decisions: Vec<f64> = (0..n).map(|i| sol.training_decision(i, &y)).collect();
                worst_gap = worst_gap.max((sol.objective - brute).abs());
                worst_kkt = worst_kkt.max(smo::max_kkt_violation(&sol.alpha, &y, &decisions, c));
                worst_eq = worst_eq.max(sol.alpha.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>().abs());
                if !sol.converged || sol.alpha.iter().any(|&a| !(0.0..=c).contains(&a)) {
                    return Err("infeasible or unconverged solution".into());
                }
                problems += 1;
            }
        }
    }
    check(
        worst_gap <= 1e-3 && worst_kkt <= 1e-3 && worst_eq <= 1e-9,
        format!(
            "{problems} problems (10 point sets x C in {{0.5,5}} x gamma in {{0.5,2}}): |W - W_grid| <= {worst_gap:.1e}, KKT <= {worst_kkt:.1e}, |sum a y| <= {worst_eq:.1e}"
        ),
    )
}

fn xor() -> Outcome {
    let x = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0], vec![1.0, 0.0]];
    let y = [-1.0, -1.0, 1.0, 1.0];
    let model = train_binary_smo(&x, &y, &TrainParams::new(10.0, 1.0)).map_err(|e| e.to_string())?;
    let correct = x
        .iter()
        .zip(&y)
        .filter(|(xi, &yi)| model.decision(xi).unwrap() * yi > 0.0)
        .count();
    check(correct == 4, format!("{correct}/4 training points correct"))
}

fn dimensionality() -> Outcome {
    let lm = template_landmarks();
    let img = render_face(&lm, &FaceStyle::plain(1), 200, 240);
    let len = |scheme: &str, kinds| {
        let s = RegionScheme::builtin(scheme).unwrap();
        let all: Vec<usize> = (0..s.mask_count()).collect();
        extract_features(&img, &lm, &s, &all, kinds).map(|f| f.values.len()).unwrap_or(0)
    };
    let (l29, n29, l17) = (len("scheme29", FeatureKinds::Lbp), len("scheme29", FeatureKinds::Ncm), len("scheme17", FeatureKinds::Lbp));
    check(
        l29 == 1770 && n29 == 210 && l17 == 1062 && NUM_BINS == 59,
        format!("29 regions + whole face: LBP {l29}, NCM {n29}; 17 regions + whole face: LBP {l17}"),
    )
}

fn selection() -> Outcome {
    let names = ["mouth", "noise_a", "signal_a", "noise_b", "signal_b", "noise_c"];
    let (table, labels, classes) = two_signal_table(50, &names, 2, 4, 6, 10);
    let folds = stratified_kfold(&labels, &classes, 5, 42).map_err(|e| e.to_string())?;
    let params = SelectionParams::new(TrainParams::new(8.0, 0.5));
    let candidates: Vec<usize> = (0..names.len()).collect();
    let run = || greedy_forward_select(&table, &labels, &classes, &candidates, "mouth", &[], &folds, &params);
    let trace = run().map_err(|e| e.to_string())?;
    let again = run().map_err(|e| e.to_string())?;
    let chosen: Vec<&str> = trace.steps.iter().filter_map(|s| s.chosen.as_deref()).collect();
    let first_two: Vec<&str> = chosen.iter().take(2).copied().collect();
    let signals_first = first_two.contains(&"signal_a") && first_two.contains(&"signal_b");
    let mut prev = trace.seed_accuracy;
    let mut monotone = true;
    for s in &trace.steps {
        monotone &= s.best_accuracy >= prev;
        prev = s.best_accuracy;
    }
    let budget = 1 + trace.steps.iter().map(|s| s.candidates.len()).sum::<usize>();
    check(
        labels.len() == 300 && signals_first && monotone && trace == again && trace.cv_runs == budget,
        format!(
            "selected {:?} (accuracy {:.3} -> {:.3}), monotone {monotone}, deterministic {}",
            trace.selected,
            trace.seed_accuracy,
            prev,
            trace == again
        ),
    )
}

fn end_to_end() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let manifest_path = write_dataset(dir.path(), 6, 50, 11).map_err(|e| e.to_string())?;
    let manifest = load_manifest(&manifest_path).map_err(|e| e.to_string())?;
    let scheme = RegionScheme::builtin("scheme29").unwrap();
    let table = regionfer::dataset::build_feature_table(&manifest, &scheme, RegionSource::Scheme, FeatureKinds::Both)
        .map_err(|e| e.to_string())?;
    let all: Vec<usize> = (0..table.region_count()).collect();
    let (x, _) = table.matrix(&all).map_err(|e| e.to_string())?;
    let labels = manifest.labels();
    let folds = stratified_kfold(&labels, &manifest.classes, 5, 42).map_err(|e| e.to_string())?;
    let grid = grid_search(&x, &labels, &manifest.classes, &folds, &default_c_grid(), &default_gamma_grid(), 42)
        .map_err(|e| e.to_string())?;
    let cv = cross_validate(&x, &labels, &manifest.classes, &folds, &TrainParams::new(grid.best_c, grid.best_gamma))
        .map_err(|e| e.to_string())?;
    check(
        cv.mean_accuracy >= 0.95,
        format!(
            "6 classes x 50 faces, C={} gamma={}: mean 5-fold accuracy {:.4}",
            grid.best_c, grid.best_gamma, cv.mean_accuracy
        ),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let manifest = write_dataset(dir.path(), 3, 10, 5).map_err(|e| e.to_string())?;
    let evaluate = |out: &str| {
        Command::new(env!("CARGO_BIN_EXE_regionfer"))
            .args(["evaluate", "--manifest"])
            .arg(&manifest)
            .args(["--seed", "9", "--c", "4", "--gamma", "0.01", "--json", "--out"])
            .arg(dir.path().join(out))
            .status()
            .map_err(|e| e.to_string())
    };
    for out in ["a.json", "b.json"] {
        if !evaluate(out)?.success() {
            return Err("evaluate failed".into());
        }
    }
    let a = std::fs::read(dir.path().join("a.json")).map_err(|e| e.to_string())?;
    let b = std::fs::read(dir.path().join("b.json")).map_err(|e| e.to_string())?;

    let (x, labels) = blobs(&[(0.0, 0.0), (3.0, 0.0), (0.0, 3.0)], 20, 1.5, 12);
    let classes: Vec<String> = ["a", "b", "c"].map(String::from).to_vec();
    let svm = train_multiclass_ova(&x, &labels, &classes, &TrainParams::new(2.0, 0.7)).map_err(|e| e.to_string())?;
    let saved = SavedModel {
        scheme_hash: RegionScheme::builtin("scheme29").unwrap().hash(),
        source: RegionSource::Scheme,
        regions: vec![0, 1],
        kinds: FeatureKinds::Lbp,
        svm,
    };
    let path = dir.path().join("m.bin");
    saved.save(&path).map_err(|e| e.to_string())?;
    let loaded = SavedModel::load(&path).map_err(|e| e.to_string())?;
    let mut r = rng(13);
    let mut identical = true;
    for _ in 0..200 {
        let p = [r.random_range(-3.0..6.0), r.random_range(-3.0..6.0)];
        let (u, v) = (saved.svm.decision_values(&p).unwrap(), loaded.svm.decision_values(&p).unwrap());
        identical &= u.iter().zip(&v).all(|(s, t)| s.to_bits() == t.to_bits());
    }
    check(
        a == b && !a.is_empty() && identical,
        format!("evaluate JSON byte-identical: {}; 200 probes bit-exact after reload: {identical}", a == b),
    )
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 12] = [
        ("uniform pattern enumeration", uniform_enumeration),
        ("LBP oracle equivalence", lbp_oracle),
        ("LBP monotone-shift invariance", lbp_shift),
        ("moment oracle and translation", moment_oracle),
        ("moment scale robustness", moment_scale),
        ("rasterization oracle and grid cover", rasterization),
        ("SVM dual oracle", svm_dual_oracle),
        ("XOR", xor),
        ("feature dimensionality", dimensionality),
        ("selection sanity", selection),
        ("end-to-end synthetic pipeline", end_to_end),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = std::time::Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {:>2} {name}: {detail} [{secs:.1}s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {:>2} {name}: {detail} [{secs:.1}s]", i + 1);
            }
        }
    }
    match std::env::var_os("REGIONFER_CKPLUS_MANIFEST") {
        Some(m) => println!(
            "NOTE criterion 13 CK+ reproduction: run scripts/ckplus_reproduction.sh {} (not part of this suite)",
            m.to_string_lossy()
        ),
        None => println!("SKIP criterion 13 CK+ reproduction: needs user-supplied CK+ data (scripts/ckplus_reproduction.sh)"),
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all 12 criteria passed");
}
