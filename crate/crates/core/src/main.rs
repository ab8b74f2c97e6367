use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use regionfer::dataset::{build_feature_table, load_sample};
use regionfer::eval::{
    default_c_grid, default_gamma_grid, evaluate_prepared, grid_search_prepared, stratified_kfold, EvalReport,
    PreparedFolds, PROTOCOL,
};
use regionfer::features::{extract_features_from, normalize_indices, FeatureKinds, FeatureLayout, FeatureTable, RegionSource};
use regionfer::geometry::{RegionMask, RegionScheme, WHOLE_FACE};
use regionfer::image::load_grayscale_image;
use regionfer::landmarks::parse_landmarks;
use regionfer::lbp::LbpLabelMap;
use regionfer::manifest::{load_manifest, DatasetManifest};
use regionfer::model::SavedModel;
use regionfer::moments::MomentSet;
use regionfer::selection::{greedy_forward_select, SelectedRegions, SelectionParams};
use regionfer::svm::{train_multiclass_ova, TrainParams};
use regionfer::{Error, Result};

#[derive(Parser)]
#[command(name = "regionfer", version, about = "Region-based facial expression recognition")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write per-sample feature vectors as CSV
    Extract(ExtractArgs),
    /// Train a one-vs-all SVM on a whole manifest and save it
    Train(TrainArgs),
    /// Cross-validated accuracy over a (C, gamma) grid
    GridSearch(GridSearchArgs),
    /// Greedy forward selection of regions seeded at one region
    SelectRegions(SelectArgs),
    /// Stratified k-fold evaluation with confusion matrix
    Evaluate(EvaluateArgs),
    /// Classify one image
    Predict(PredictArgs),
    /// Draw region boundaries over an image
    InspectRegions(InspectArgs),
}

#[derive(Args, Clone)]
struct DataArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// shipped scheme name (scheme29, scheme17) or path to a scheme JSON
    #[arg(long, default_value = "scheme29")]
    scheme: String,
    /// use an RxC grid over the face box instead of the scheme's regions
    #[arg(long, value_parser = parse_grid)]
    grid: Option<(usize, usize)>,
    #[arg(long, default_value = "both")]
    features: FeatureKinds,
    /// all, selected, or a comma-separated list of region names
    #[arg(long, default_value = "all")]
    regions: String,
    /// region list read by --regions selected
    #[arg(long, default_value = "selected.json")]
    selected_file: PathBuf,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Args, Clone)]
struct SvmArgs {
    #[arg(long, default_value_t = 5)]
    folds: usize,
    /// fixed C; without both --c and --gamma a grid search picks them
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    /// SMO stopping tolerance
    #[arg(long, default_value_t = 1e-3)]
    tol: f64,
}

#[derive(Args)]
struct ExtractArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    out: PathBuf,
    /// directory for per-image LBP label maps (PGM)
    #[arg(long)]
    dump_lbp: Option<PathBuf>,
    /// CSV of raw, central and normalized central moments per region
    #[arg(long)]
    dump_moments: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    svm: SvmArgs,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct GridSearchArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    /// comma-separated C values (default 2^-5, 2^-3, ..., 2^15)
    #[arg(long, value_delimiter = ',')]
    c_grid: Option<Vec<f64>>,
    /// comma-separated gamma values (default 2^-15, 2^-13, ..., 2^3)
    #[arg(long, value_delimiter = ',')]
    gamma_grid: Option<Vec<f64>>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SelectArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long, default_value = "scheme29")]
    scheme: String,
    /// descriptors used to score candidate sets
    #[arg(long, default_value = "lbp")]
    features: FeatureKinds,
    #[arg(long, default_value = "mouth")]
    seed_region: String,
    #[arg(long, default_value_t = 0.0)]
    epsilon: f64,
    #[arg(long)]
    max_regions: Option<usize>,
    /// leave the whole-face block out of scoring and of the output
    #[arg(long)]
    no_whole_face: bool,
    #[command(flatten)]
    svm: SvmArgs,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// selection trace JSON (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// region list for --regions selected
    #[arg(long, default_value = "selected.json")]
    selected_out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    svm: SvmArgs,
    #[arg(long)]
    json: bool,
    /// write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    image: PathBuf,
    #[arg(long)]
    landmarks: PathBuf,
    /// scheme the model was trained with; shipped schemes are tried when omitted
    #[arg(long)]
    scheme: Option<String>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct InspectArgs {
    #[arg(long, default_value = "scheme29")]
    scheme: String,
    #[arg(long)]
    landmarks: PathBuf,
    #[arg(long)]
    image: PathBuf,
    #[arg(long, value_parser = parse_grid)]
    grid: Option<(usize, usize)>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    json: bool,
}

fn parse_grid(s: &str) -> std::result::Result<(usize, usize), String> {
    let (r, c) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected RxC, got {s:?}"))?;
    let parse = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("{v:?}: {e}"));
    Ok((parse(r)?, parse(c)?))
}

fn load_scheme(spec: &str) -> Result<RegionScheme> {
    RegionScheme::load(spec)
}

fn source_of(grid: Option<(usize, usize)>) -> RegionSource {
    match grid {
        Some((rows, cols)) => RegionSource::Grid { rows, cols },
        None => RegionSource::Scheme,
    }
}

/// Indices selected by `--regions` among `names`.
fn resolve_regions(spec: &str, names: &[String], selected_file: &Path) -> Result<Vec<usize>> {
    let lookup = |name: &str| {
        names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownRegion(name.to_string()))
    };
    let indices = match spec {
        "all" => (0..names.len()).collect(),
        "selected" => {
            let text = std::fs::read_to_string(selected_file).map_err(|e| match e.kind() {
                std::io::ErrorKind::NotFound => Error::FileNotFound(selected_file.to_path_buf()),
                _ => Error::Io(e),
            })?;
            let selected: SelectedRegions = serde_json::from_str(&text)?;
            selected.regions.iter().map(|n| lookup(n)).collect::<Result<Vec<_>>>()?
        }
        list => list
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(lookup)
            .collect::<Result<Vec<_>>>()?,
    };
    normalize_indices(&indices, names.len())
}

struct Dataset {
    manifest: DatasetManifest,
    scheme: RegionScheme,
    source: RegionSource,
    table: FeatureTable,
    regions: Vec<usize>,
    x: Vec<Vec<f64>>,
    layout: FeatureLayout,
}

impl Dataset {
    fn load(args: &DataArgs) -> Result<Self> {
        let manifest = load_manifest(&args.manifest)?;
        let scheme = load_scheme(&args.scheme)?;
        let source = source_of(args.grid);
        let table = build_feature_table(&manifest, &scheme, source, args.features)?;
        let regions = resolve_regions(&args.regions, &table.region_names, &args.selected_file)?;
        let (x, layout) = table.matrix(&regions)?;
        Ok(Dataset {
            manifest,
            scheme,
            source,
            table,
            regions,
            x,
            layout,
        })
    }

    fn region_names(&self) -> Vec<String> {
        self.regions.iter().map(|&r| self.table.region_names[r].clone()).collect()
    }
}

/// Fixed parameters, or the best cell of the default grid on these folds.
fn choose_params(prepared: &PreparedFolds, classes: &[String], svm: &SvmArgs, seed: u64) -> Result<(TrainParams, bool)> {
    let base = TrainParams {
        tol: svm.tol,
        seed,
        ..TrainParams::new(1.0, 1.0)
    };
    match (svm.c, svm.gamma) {
        (Some(c), Some(gamma)) => Ok((TrainParams { c, gamma, ..base }, false)),
        (c, gamma) => {
            let c_grid = c.map_or_else(default_c_grid, |c| vec![c]);
            let gamma_grid = gamma.map_or_else(default_gamma_grid, |g| vec![g]);
            let result = grid_search_prepared(prepared, classes, &c_grid, &gamma_grid, &base)?;
            Ok((
                TrainParams {
                    c: result.best_c,
                    gamma: result.best_gamma,
                    ..base
                },
                true,
            ))
        }
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

fn run_extract(args: ExtractArgs) -> Result<()> {
    let data = Dataset::load(&args.data)?;
    let mut writer = csv::Writer::from_path(&args.out).map_err(csv_error)?;
    let mut header = vec!["image".to_string(), "label".to_string()];
    header.extend(data.layout.column_names());
    writer.write_record(&header).map_err(csv_error)?;
    for (sample, row) in data.manifest.samples.iter().zip(&data.x) {
        let mut record = vec![
            sample.image.display().to_string(),
            data.manifest.classes[sample.label].clone(),
        ];
        record.extend(row.iter().map(|v| v.to_string()));
        writer.write_record(&record).map_err(csv_error)?;
    }
    writer.flush()?;

    if args.dump_lbp.is_some() || args.dump_moments.is_some() {
        let names = data.source.region_names(&data.scheme);
        let mut moments = String::from("image,region,m00,m10,m01,cx,cy,mu20,mu11,mu02,mu30,mu21,mu12,mu03,nu20,nu11,nu02,nu30,nu21,nu12,nu03\n");
        if let Some(dir) = &args.dump_lbp {
            std::fs::create_dir_all(dir)?;
        }
        for sample in &data.manifest.samples {
            let (image, landmarks) = load_sample(sample)?;
            let stem = sample.image.file_stem().map_or("image".into(), |s| s.to_string_lossy().into_owned());
            if let Some(dir) = &args.dump_lbp {
                LbpLabelMap::compute(&image).to_image().save_pgm(dir.join(format!("{stem}_lbp.pgm")))?;
            }
            if args.dump_moments.is_some() {
                let masks = data.source.masks(&landmarks, &data.scheme, image.width(), image.height())?;
                for &r in &data.regions {
                    let m = MomentSet::compute(&masks[r]).map_err(|e| e.in_region(&names[r]))?;
                    let mut fields = vec![
                        m.m[0][0],
                        m.m[1][0],
                        m.m[0][1],
                        m.centroid.0,
                        m.centroid.1,
                    ];
                    fields.extend([m.mu[2][0], m.mu[1][1], m.mu[0][2], m.mu[3][0], m.mu[2][1], m.mu[1][2], m.mu[0][3]]);
                    fields.extend(m.nu);
                    let fields: Vec<String> = fields.iter().map(f64::to_string).collect();
                    moments.push_str(&format!("{},{},{}\n", sample.image.display(), names[r], fields.join(",")));
                }
            }
        }
        if let Some(path) = &args.dump_moments {
            std::fs::write(path, moments)?;
        }
    }
    eprintln!(
        "wrote {} samples x {} features to {}",
        data.x.len(),
        data.layout.len(),
        args.out.display()
    );
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}

#[derive(Serialize)]
struct TrainSummary {
    model: String,
    classes: Vec<String>,
    samples: usize,
    features: usize,
    regions: Vec<String>,
    c: f64,
    gamma: f64,
    grid_searched: bool,
    support_vectors: Vec<usize>,
    converged: bool,
}

fn run_train(args: TrainArgs) -> Result<()> {
    let data = Dataset::load(&args.data)?;
    let labels = data.manifest.labels();
    let classes = &data.manifest.classes;
    let (params, searched) = if let (Some(c), Some(gamma)) = (args.svm.c, args.svm.gamma) {
        (
            TrainParams {
                tol: args.svm.tol,
                seed: args.data.seed,
                ..TrainParams::new(c, gamma)
            },
            false,
        )
    } else {
        let folds = stratified_kfold(&labels, classes, args.svm.folds, args.data.seed)?;
        let prepared = PreparedFolds::new(&data.x, &labels, classes.len(), &folds)?;
        choose_params(&prepared, classes, &args.svm, args.data.seed)?
    };
    let svm = train_multiclass_ova(&data.x, &labels, classes, &params)?;
    let summary = TrainSummary {
        model: args.out.display().to_string(),
        classes: classes.clone(),
        samples: data.x.len(),
        features: data.layout.len(),
        regions: data.region_names(),
        c: params.c,
        gamma: params.gamma,
        grid_searched: searched,
        support_vectors: svm.models.iter().map(|m| m.coef.len()).collect(),
        converged: svm.converged(),
    };
    SavedModel {
        scheme_hash: data.scheme.hash(),
        source: data.source,
        regions: data.regions.clone(),
        kinds: args.data.features,
        svm,
    }
    .save(&args.out)?;
    if args.json {
        print!("{}", to_json(&summary));
    } else {
        println!(
            "trained {} classes on {} samples ({} features), C={} gamma={}{}",
            summary.classes.len(),
            summary.samples,
            summary.features,
            summary.c,
            summary.gamma,
            if summary.grid_searched { " (grid search)" } else { "" }
        );
        println!("support vectors per class: {:?}", summary.support_vectors);
        if !summary.converged {
            println!("warning: some SMO runs stopped at the update budget");
        }
        println!("saved {}", summary.model);
    }
    Ok(())
}

fn run_grid_search(args: GridSearchArgs) -> Result<()> {
    let data = Dataset::load(&args.data)?;
    let labels = data.manifest.labels();
    let classes = &data.manifest.classes;
    let folds = stratified_kfold(&labels, classes, args.folds, args.data.seed)?;
    let prepared = PreparedFolds::new(&data.x, &labels, classes.len(), &folds)?;
    let c_grid = args.c_grid.unwrap_or_else(default_c_grid);
    let gamma_grid = args.gamma_grid.unwrap_or_else(default_gamma_grid);
    let base = TrainParams {
        seed: args.data.seed,
        ..TrainParams::new(1.0, 1.0)
    };
    let result = grid_search_prepared(&prepared, classes, &c_grid, &gamma_grid, &base)?;
    if args.json {
        print!("{}", to_json(&result));
        return Ok(());
    }
    let mut out = format!("{:>12}", "C \\ gamma");
    for g in &gamma_grid {
        out.push_str(&format!(" {:>10}", format!("{g:.3e}")));
    }
    out.push('\n');
    for (row, c) in result.table.chunks(gamma_grid.len()).zip(&c_grid) {
        out.push_str(&format!("{:>12}", format!("{c:.3e}")));
        for cell in row {
            out.push_str(&format!(" {:>10.4}", cell.mean_accuracy));
        }
        out.push('\n');
    }
    out.push_str(&format!(
        "best: C={} gamma={} mean accuracy={:.4}\n",
        result.best_c, result.best_gamma, result.best.mean_accuracy
    ));
    print!("{out}");
    Ok(())
}

fn run_select(args: SelectArgs) -> Result<()> {
    let manifest = load_manifest(&args.manifest)?;
    let scheme = load_scheme(&args.scheme)?;
    let table = build_feature_table(&manifest, &scheme, RegionSource::Scheme, args.features)?;
    let labels = manifest.labels();
    let classes = &manifest.classes;
    let folds = stratified_kfold(&labels, classes, args.svm.folds, args.seed)?;
    let whole = scheme.index_of(WHOLE_FACE).filter(|_| !args.no_whole_face);
    let always: Vec<usize> = whole.into_iter().collect();
    let candidates: Vec<usize> = (0..scheme.regions.len()).collect();
    let seed_index = scheme
        .index_of(&args.seed_region)
        .filter(|&i| i < scheme.regions.len())
        .ok_or_else(|| Error::SeedNotInScheme(args.seed_region.clone()))?;

    // C and gamma come from the seed set when not given
    let mut seed_set = always.clone();
    seed_set.push(seed_index);
    let (x, _) = table.matrix(&seed_set)?;
    let prepared = PreparedFolds::new(&x, &labels, classes.len(), &folds)?;
    let (train, _) = choose_params(&prepared, classes, &args.svm, args.seed)?;

    let params = SelectionParams {
        train,
        epsilon: args.epsilon,
        max_regions: args.max_regions,
    };
    let trace = greedy_forward_select(&table, &labels, classes, &candidates, &args.seed_region, &always, &folds, &params)?;
    let mut regions = trace.selected.clone();
    regions.extend(trace.always_included.iter().cloned());
    let selected = SelectedRegions {
        scheme: scheme.name.clone(),
        regions,
    };
    std::fs::write(&args.selected_out, to_json(&selected))?;
    emit(&to_json(&trace), args.out.as_deref())?;
    eprintln!(
        "selected {} regions (C={} gamma={}, {} CV runs); region list in {}",
        trace.selected.len(),
        params.train.c,
        params.train.gamma,
        trace.cv_runs,
        args.selected_out.display()
    );
    Ok(())
}

fn run_evaluate(args: EvaluateArgs) -> Result<()> {
    let data = Dataset::load(&args.data)?;
    let labels = data.manifest.labels();
    let classes = &data.manifest.classes;
    let folds = stratified_kfold(&labels, classes, args.svm.folds, args.data.seed)?;
    let prepared = PreparedFolds::new(&data.x, &labels, classes.len(), &folds)?;
    let (params, _) = choose_params(&prepared, classes, &args.svm, args.data.seed)?;
    let cv = evaluate_prepared(&prepared, classes, &params)?;
    let report = EvalReport {
        protocol: PROTOCOL.to_string(),
        seed: args.data.seed,
        folds: args.svm.folds,
        c: params.c,
        gamma: params.gamma,
        features: format!("{:?}", args.data.features).to_lowercase(),
        regions: data.region_names(),
        per_fold_accuracy: cv.per_fold_accuracy.clone(),
        mean_accuracy: cv.mean_accuracy,
        weighted_accuracy: cv.weighted_accuracy,
        per_class_recall: cv.confusion.recalls().iter().map(|r| 100.0 * r).collect(),
        confusion_matrix: cv.confusion.counts.clone(),
        class_order: classes.clone(),
        converged: cv.converged,
    };
    let text = if args.json { to_json(&report) } else { report.text() };
    emit(&text, args.out.as_deref())
}

#[derive(Serialize)]
struct Prediction {
    label: String,
    decision_values: Vec<(String, f64)>,
}

fn run_predict(args: PredictArgs) -> Result<()> {
    let saved = SavedModel::load(&args.model)?;
    let scheme = match &args.scheme {
        Some(spec) => load_scheme(spec)?,
        None => RegionScheme::builtins()
            .into_iter()
            .find(|s| s.hash() == saved.scheme_hash)
            .ok_or(Error::SchemeMismatch)?,
    };
    saved.check_scheme(&scheme)?;
    let image = load_grayscale_image(&args.image)?;
    let landmarks = parse_landmarks(&args.landmarks)?;
    let features = extract_features_from(&image, &landmarks, &scheme, saved.source, &saved.regions, saved.kinds)?;
    let values = saved.svm.decision_values(&features.values)?;
    let best = regionfer::svm::argmax(&values);
    let prediction = Prediction {
        label: saved.svm.classes[best].clone(),
        decision_values: saved.svm.classes.iter().cloned().zip(values).collect(),
    };
    if args.json {
        print!("{}", to_json(&prediction));
    } else {
        println!("{}", prediction.label);
        for (class, v) in &prediction.decision_values {
            println!("  {class:>8} {v:+.6}");
        }
    }
    Ok(())
}

const PALETTE: [[u8; 3]; 8] = [
    [230, 25, 75],
    [60, 180, 75],
    [255, 225, 25],
    [0, 130, 200],
    [245, 130, 48],
    [145, 30, 180],
    [70, 240, 240],
    [240, 50, 230],
];

fn is_boundary(mask: &RegionMask, x: usize, y: usize) -> bool {
    let inside = |dx: isize, dy: isize| {
        let (nx, ny) = (x as isize + dx, y as isize + dy);
        nx >= 0 && ny >= 0 && mask.contains(nx as usize, ny as usize)
    };
    !(inside(-1, 0) && inside(1, 0) && inside(0, -1) && inside(0, 1))
}

#[derive(Serialize)]
struct RegionInfo {
    index: usize,
    name: String,
    pixels: usize,
    bbox: [usize; 4],
}

fn run_inspect(args: InspectArgs) -> Result<()> {
    let scheme = load_scheme(&args.scheme)?;
    let image = load_grayscale_image(&args.image)?;
    let landmarks = parse_landmarks(&args.landmarks)?;
    let source = source_of(args.grid);
    let masks = source.masks(&landmarks, &scheme, image.width(), image.height())?;
    let names = source.region_names(&scheme);
    let (w, h) = (image.width(), image.height());
    let mut rgb: Vec<u8> = image.data().iter().flat_map(|&v| [v, v, v]).collect();
    for (i, mask) in masks.iter().enumerate() {
        if names[i] == WHOLE_FACE {
            continue;
        }
        let color = PALETTE[i % PALETTE.len()];
        for (x, y) in mask.pixels().filter(|&(x, y)| is_boundary(mask, x, y)) {
            rgb[(y * w + x) * 3..(y * w + x) * 3 + 3].copy_from_slice(&color);
        }
    }
    for p in landmarks.points() {
        let (x, y) = (p.x.round(), p.y.round());
        if x >= 0.0 && y >= 0.0 && (x as usize) < w && (y as usize) < h {
            let at = (y as usize * w + x as usize) * 3;
            rgb[at..at + 3].copy_from_slice(&[255, 255, 255]);
        }
    }
    image::RgbImage::from_raw(w as u32, h as u32, rgb)
        .expect("buffer matches dimensions")
        .save(&args.out)
        .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    let info: Vec<RegionInfo> = masks
        .iter()
        .zip(&names)
        .enumerate()
        .map(|(index, (m, name))| {
            let b = m.bbox();
            RegionInfo {
                index,
                name: name.clone(),
                pixels: m.pixel_count(),
                bbox: [b.x0, b.y0, b.w, b.h],
            }
        })
        .collect();
    if args.json {
        print!("{}", to_json(&info));
    } else {
        for r in &info {
            println!("{:>3} {:<20} {:>7} px  bbox {:?}", r.index, r.name, r.pixels, r.bbox);
        }
        println!("overlay written to {}", args.out.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Extract(a) => run_extract(a),
        Command::Train(a) => run_train(a),
        Command::GridSearch(a) => run_grid_search(a),
        Command::SelectRegions(a) => run_select(a),
        Command::Evaluate(a) => run_evaluate(a),
        Command::Predict(a) => run_predict(a),
        Command::InspectRegions(a) => run_inspect(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let mut msg = format!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                msg.push_str(&format!("\n  caused by: {s}"));
                source = s.source();
            }
            eprintln!("{msg}");
            ExitCode::FAILURE
        }
    }
}
