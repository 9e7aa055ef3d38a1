//! Acceptance suite. Prints one PASS/FAIL/SKIP line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use silhouette::bgmodels::{
    gaussian_pdf, gmm_pixel_probability, GmmComponent, GmmParams, GmmPixelModel, ModelRegistry,
};
use silhouette::colorspace::{rgb_to_hsv, rgb_value_plane, ValuePlane};
use silhouette::imageio::{list_masks, read_mask, write_mask};
use silhouette::metrics::{error_percent, evaluate_indexed};
use silhouette::morphology::{dilate, erode, BinaryMask, SeShape, StructuringElement};
use silhouette::pipeline::{extract, load_sequence, ModelSource, PipelineConfig};
use silhouette::synthgen::{generate, write_scene, SceneSpec};

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

type Check = fn() -> Outcome;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Outcome::Fail(format!($($msg)+));
        }
    };
}

fn within(elapsed: Duration, limit_s: f64) -> bool {
    elapsed.as_secs_f64() < limit_s
}

fn random_mask(rng: &mut ChaCha8Rng, w: usize, h: usize, density: f64) -> BinaryMask {
    let bits = (0..w * h).map(|_| rng.gen_bool(density)).collect();
    BinaryMask::new(w, h, bits).unwrap()
}

fn colorspace_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..100_000 {
        let px: [u8; 3] = rng.gen();
        let got = rgb_to_hsv(px);
        let (h, s, v) = common::hsv_oracle(px);
        worst = worst
            .max((got.h - h).abs())
            .max((got.s - s).abs())
            .max((got.v - v).abs());
        ensure!(
            (0.0..360.0).contains(&got.h)
                && (0.0..=1.0).contains(&got.s)
                && (0.0..=1.0).contains(&got.v),
            "{px:?} out of range: {got:?}"
        );
    }
    let t = start.elapsed();
    ensure!(worst <= 1e-9, "max deviation {worst:e}");
    ensure!(within(t, 5.0), "took {t:?}");
    Outcome::Pass(format!("10^5 pixels, max deviation {worst:e}, {t:.2?}"))
}

fn density_sanity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst_area = 0.0f64;
    for _ in 0..20 {
        let mu = rng.gen_range(0.0..1.0);
        let var = rng.gen_range(1e-5..0.25);
        let sd = f64::sqrt(var);
        let area = common::simpson(
            |x| gaussian_pdf(x, mu, var).unwrap(),
            mu - 8.0 * sd,
            mu + 8.0 * sd,
            4000,
        );
        worst_area = worst_area.max((area - 1.0).abs());
    }
    ensure!(worst_area <= 1e-6, "integral off by {worst_area:e}");

    let mut worst_mix = 0.0f64;
    for _ in 0..1000 {
        let k = rng.gen_range(1..=4);
        let raw: Vec<(f64, f64, f64)> = (0..k)
            .map(|_| {
                (
                    rng.gen_range(0.01..1.0),
                    rng.gen_range(0.0..1.0),
                    rng.gen_range(1e-4..0.05),
                )
            })
            .collect();
        let total: f64 = raw.iter().map(|c| c.0).sum();
        let comps: Vec<GmmComponent> = raw
            .into_iter()
            .map(|(w, mu, var)| GmmComponent {
                w: w / total,
                mu,
                var,
            })
            .collect();
        let x = rng.gen_range(0.0..1.0);
        let oracle = common::mixture_oracle(&comps, x);
        let got = gmm_pixel_probability(&GmmPixelModel::from_components(comps), x).unwrap();
        worst_mix = worst_mix.max((got - oracle).abs() / oracle.max(1.0));
    }
    ensure!(worst_mix <= 1e-12, "mixture deviation {worst_mix:e}");
    Outcome::Pass(format!(
        "pdf area error {worst_area:.1e}, mixture deviation {worst_mix:.1e}"
    ))
}

/// Runs 10^4 updates on each of 100 pixels and returns the final mixtures.
fn gmm_run(params: &GmmParams) -> Result<Vec<GmmPixelModel>, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut pixels = Vec::with_capacity(100);
    for p in 0..100 {
        let modes: Vec<f64> = (0..rng.gen_range(1..=3))
            .map(|_| rng.gen_range(0.0..1.0))
            .collect();
        let mut px = GmmPixelModel::new(modes[0], params);
        for step in 0..10_000 {
            let x: f64 = if rng.gen_bool(0.05) {
                rng.gen_range(0.0..1.0)
            } else {
                let m = modes[rng.gen_range(0..modes.len())];
                (m + rng.gen_range(-0.02..0.02)).clamp(0.0, 1.0)
            };
            px.update(x, params);
            let comps = px.components();
            let sum = px.weight_sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(format!("pixel {p} step {step}: weight sum {sum}"));
            }
            if comps.len() > params.k_max || comps.is_empty() {
                return Err(format!("pixel {p} step {step}: {} components", comps.len()));
            }
            if let Some(c) = comps.iter().find(|c| c.var < params.var_floor) {
                return Err(format!("pixel {p} step {step}: var {} below floor", c.var));
            }
        }
        pixels.push(px);
    }
    Ok(pixels)
}

fn gmm_invariants() -> Outcome {
    let start = Instant::now();
    let params = GmmParams::default();
    let a = match gmm_run(&params) {
        Ok(a) => a,
        Err(e) => return Outcome::Fail(e),
    };
    let b = gmm_run(&params).unwrap();
    let bits = |v: &[GmmPixelModel]| -> Vec<u64> {
        v.iter()
            .flat_map(|p| p.components().iter().flat_map(|c| [c.w, c.mu, c.var]))
            .map(f64::to_bits)
            .collect()
    };
    ensure!(bits(&a) == bits(&b), "reruns differ");
    let t = start.elapsed();
    ensure!(within(t, 30.0), "took {t:?}");
    Outcome::Pass(format!(
        "2 x 10^6 updates, invariants held, reruns bit-identical, {t:.2?}"
    ))
}

fn morphology_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for i in 0..200 {
        let density = rng.gen_range(0.1..0.9);
        let m = random_mask(&mut rng, 32, 32, density);
        let other = random_mask(&mut rng, 32, 32, density);
        let shape = if i % 2 == 0 {
            SeShape::Square
        } else {
            SeShape::Cross
        };
        let se = StructuringElement::new(shape, 1 + i % 3).unwrap();
        let offsets = common::se_offsets(shape, se.radius());

        let d = dilate(&m, &se);
        let e = erode(&m, &se);
        ensure!(
            d == common::dilate_naive(&m, &offsets),
            "dilate mismatch on mask {i}"
        );
        ensure!(
            e == common::erode_naive(&m, &offsets, false),
            "erode mismatch on mask {i}"
        );

        let dual = common::erode_naive(&m.complement(), &offsets, true).complement();
        ensure!(d == dual, "duality fails on mask {i}");
        let eroded_complement = erode(&m.complement(), &se).complement();
        for (x, y) in common::interior(&m, se.radius()) {
            ensure!(
                d.get(x, y) == eroded_complement.get(x, y),
                "interior duality fails on mask {i} at ({x}, {y})"
            );
        }

        ensure!(
            m.is_subset_of(&d) && e.is_subset_of(&m),
            "extensivity fails on mask {i}"
        );
        let cells = m
            .cells()
            .iter()
            .zip(other.cells())
            .map(|(a, b)| *a && *b)
            .collect();
        let sub = BinaryMask::new(32, 32, cells).unwrap();
        ensure!(
            dilate(&sub, &se).is_subset_of(&d) && erode(&sub, &se).is_subset_of(&e),
            "monotonicity fails on mask {i}"
        );
    }
    Outcome::Pass("200 masks: oracle, duality, extensivity, monotonicity".into())
}

fn scene_planes(spec: &SceneSpec) -> (Vec<ValuePlane>, Vec<BinaryMask>) {
    let scene = generate(spec).unwrap();
    (
        scene.frames.iter().map(rgb_value_plane).collect(),
        scene.truth,
    )
}

fn clean_scene_exactness() -> Outcome {
    let spec = SceneSpec::preset("walker-clean").unwrap();
    let (planes, truth) = scene_planes(&spec);
    let config = PipelineConfig::for_approach("framediff");
    let registry = ModelRegistry::builtin();
    let out = match extract(
        planes.into_iter().map(Ok),
        &config,
        &registry,
        ModelSource::Train,
    ) {
        Ok(o) => o.result,
        Err(e) => return Outcome::Fail(e.to_string()),
    };
    for f in &out.frames {
        ensure!(
            f.raw == truth[f.index],
            "raw mask {} differs from truth",
            f.index
        );
    }
    let total: f64 = out
        .frames
        .iter()
        .map(|f| error_percent(&f.clean, &truth[f.index]).unwrap())
        .sum();
    let mean = total / out.frames.len() as f64;
    ensure!(mean == 0.0, "clean mean error {mean}");
    Outcome::Pass(format!(
        "{} raw masks exact, clean mean error 0.0",
        out.frames.len()
    ))
}

fn mean_error(approach: &str, planes: &[ValuePlane], truth: &[BinaryMask], skip: usize) -> f64 {
    let config = PipelineConfig::for_approach(approach);
    let out = extract(
        planes.iter().cloned().map(Ok),
        &config,
        &ModelRegistry::builtin(),
        ModelSource::Train,
    )
    .unwrap()
    .result;
    let kept: Vec<_> = out.frames.iter().filter(|f| f.index >= skip).collect();
    let indices: Vec<usize> = kept.iter().map(|f| f.index).collect();
    let preds: Vec<BinaryMask> = kept.iter().map(|f| f.clean.clone()).collect();
    let truths: Vec<BinaryMask> = indices.iter().map(|&i| truth[i].clone()).collect();
    evaluate_indexed(&indices, &preds, &truths, 0)
        .unwrap()
        .mean_error_pct
}

fn drift_ordering() -> Outcome {
    let start = Instant::now();
    let spec = SceneSpec::preset("walker-drift").unwrap();
    let (planes, truth) = scene_planes(&spec);
    let fd = mean_error("framediff", &planes, &truth, 30);
    let sg = mean_error("gaussian", &planes, &truth, 30);
    let gmm = mean_error("gmm", &planes, &truth, 30);
    let t = start.elapsed();
    let detail = format!("framediff {fd:.3}%, gaussian {sg:.3}%, gmm {gmm:.3}%, {t:.2?}");
    ensure!(gmm < sg && sg < fd, "ordering violated: {detail}");
    ensure!(gmm <= 2.0, "gmm above 2%: {detail}");
    ensure!(within(t, 60.0), "too slow: {detail}");
    Outcome::Pass(detail)
}

fn metric_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for i in 0..500 {
        let (w, h) = (rng.gen_range(1..40), rng.gen_range(1..40));
        let [a, b, c] = [0; 3].map(|_| {
            let d = rng.gen_range(0.0..1.0);
            random_mask(&mut rng, w, h, d)
        });
        let ab = error_percent(&a, &b).unwrap();
        ensure!(
            (ab - common::error_oracle(&a, &b)).abs() <= 1e-12,
            "oracle mismatch on triple {i}"
        );
        ensure!(
            ab == error_percent(&b, &a).unwrap(),
            "asymmetric on triple {i}"
        );
        ensure!(
            error_percent(&a, &a).unwrap() == 0.0,
            "identity not zero on triple {i}"
        );
        ensure!(
            error_percent(&a, &a.complement()).unwrap() == 100.0,
            "complement not 100 on triple {i}"
        );
        let bc = error_percent(&b, &c).unwrap();
        let ac = error_percent(&a, &c).unwrap();
        ensure!(ac <= ab + bc + 1e-12, "triangle fails on triple {i}");
    }
    Outcome::Pass("500 triples: oracle, symmetry, identity, complement, triangle".into())
}

fn run_extract(frames: &Path, out: &Path) -> Result<(), String> {
    let o = Command::new(env!("CARGO_BIN_EXE_silhouette"))
        .arg("extract")
        .arg("--input")
        .arg(frames)
        .arg("--out")
        .arg(out)
        .arg("--emit-raw")
        .output()
        .map_err(|e| e.to_string())?;
    if !o.status.success() {
        return Err(String::from_utf8_lossy(&o.stderr).into_owned());
    }
    Ok(())
}

fn dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file())
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            )
        })
        .collect();
    out.sort();
    out
}

fn end_to_end_determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let spec = SceneSpec::preset("walker").unwrap();
    write_scene(&spec, &generate(&spec).unwrap(), tmp.path()).unwrap();
    let frames = tmp.path().join("frames");
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for out in [&a, &b] {
        if let Err(e) = run_extract(&frames, out) {
            return Outcome::Fail(format!("extract failed: {e}"));
        }
    }
    let (da, db) = (dir_bytes(&a), dir_bytes(&b));
    ensure!(!da.is_empty() && da == db, "mask files differ between runs");
    ensure!(
        dir_bytes(&a.join("raw")) == dir_bytes(&b.join("raw")),
        "raw masks differ"
    );

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let rt = tmp.path().join("rt");
    std::fs::create_dir(&rt).unwrap();
    for i in 0..20 {
        let m = random_mask(&mut rng, 1 + i * 7, 1 + i * 3, 0.5);
        let path = rt.join(format!("mask_{i:06}.png"));
        write_mask(&m, &path).unwrap();
        ensure!(
            read_mask(&path).unwrap() == m,
            "round-trip differs for mask {i}"
        );
    }
    Outcome::Pass(format!(
        "{} mask files byte-identical, 20 masks round-trip",
        da.len()
    ))
}

fn weizmann_report() -> Outcome {
    let Ok(root) = std::env::var("SILHOUETTE_WEIZMANN_DIR") else {
        return Outcome::Skip("SILHOUETTE_WEIZMANN_DIR not set".into());
    };
    let root = Path::new(&root);
    let run = || -> silhouette::Result<f64> {
        let seq = load_sequence(&root.join("frames"), None)?;
        let config = PipelineConfig::for_approach("gmm");
        let out = extract(
            seq.planes(),
            &config,
            &ModelRegistry::builtin(),
            ModelSource::Train,
        )?;
        let truth = list_masks(&root.join("truth"))?;
        let mut indices = Vec::new();
        let mut preds = Vec::new();
        let mut truths = Vec::new();
        for (i, path) in truth {
            if let Some(f) = out.result.frames.iter().find(|f| f.index == i && i >= 30) {
                indices.push(i);
                preds.push(f.clean.clone());
                truths.push(read_mask(&path)?);
            }
        }
        Ok(evaluate_indexed(&indices, &preds, &truths, 0)?.mean_error_pct)
    };
    match run() {
        Ok(e) => Outcome::Skip(format!(
            "informational: gmm mean error {e:.3}% (reference 1.5%)"
        )),
        Err(e) => Outcome::Skip(format!("could not evaluate: {e}")),
    }
}

fn main() {
    let checks: [(&str, Check); 9] = [
        ("colorspace oracle", colorspace_oracle),
        ("density sanity", density_sanity),
        ("gmm invariants", gmm_invariants),
        ("morphology oracle and duality", morphology_oracle),
        ("clean-scene exactness", clean_scene_exactness),
        ("ordering under illumination drift", drift_ordering),
        ("metric oracle", metric_oracle),
        ("end-to-end determinism", end_to_end_determinism),
        ("real-sequence report", weizmann_report),
    ];
    let mut failed = 0;
    for (n, (name, check)) in checks.iter().enumerate() {
        let outcome =
            std::panic::catch_unwind(check).unwrap_or_else(|_| Outcome::Fail("panicked".into()));
        let (tag, detail) = match outcome {
            Outcome::Pass(d) => ("PASS", d),
            Outcome::Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
            Outcome::Skip(d) => ("SKIP", d),
        };
        println!("{tag} [{}] {name}: {detail}", n + 1);
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all gating acceptance criteria passed");
}
