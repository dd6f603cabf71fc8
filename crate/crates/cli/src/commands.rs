use std::collections::HashMap;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::Args;
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;
use vesselmorph::harness::backend::{serve_job, BackendSpec, StubKind};
use vesselmorph::harness::emit::{plot_svg, read_aggregates};
use vesselmorph::harness::{self, Class, DatasetManifest, LabeledImage, SweepConfig};
use vesselmorph::io::{self, BitDepth};
use vesselmorph::rng::derive_seed;
use vesselmorph::synth::{CurveKind, VesselSpec};
use vesselmorph::tortuosity::image_tortuosity_map;
use vesselmorph::{
    Error, ImageStack, Regression, Rng, SegmenterParams, Spacing, TortuosityParams,
};

use crate::config::{parse_n_values, required, resolve_seed};
use crate::CliError;

type Res = Result<(), CliError>;

fn enum_arg<T: DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.into())).map_err(|_| format!("invalid value {s:?}"))
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e).into())
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e).into())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(Error::from)?;
    write_text(path, &(text + "\n"))
}

fn stem(p: &Path) -> String {
    p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn tortuosity_params(
    radius_um: Option<f64>,
    min_neighbors: Option<usize>,
    prune_spurs_um: Option<f64>,
    regression: Option<Regression>,
) -> Result<TortuosityParams, CliError> {
    let d = TortuosityParams::default();
    let p = TortuosityParams {
        radius_um: radius_um.unwrap_or(d.radius_um),
        min_neighbors: min_neighbors.unwrap_or(d.min_neighbors),
        prune_spurs_um: prune_spurs_um.unwrap_or(d.prune_spurs_um),
        regression: regression.unwrap_or(d.regression),
    };
    p.validate()?;
    Ok(p)
}

#[derive(Debug, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct SegmentArgs {
    /// Input image; repeat for a stack, which is max-projected first.
    #[arg(long = "in", value_name = "PNG")]
    #[serde(rename = "in")]
    pub input: Option<Vec<PathBuf>>,
    /// Output mask PNG.
    #[arg(long, value_name = "PNG")]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub gaussian_sigma: Option<f64>,
    #[arg(long)]
    pub window_um: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub threshold_offset: Option<f64>,
    #[arg(long)]
    pub min_component_area_um2: Option<f64>,
    /// Slice spacing recorded for stacks, µm.
    #[arg(long)]
    pub z_spacing_um: Option<f64>,
}

pub fn segment(a: &SegmentArgs) -> Res {
    let inputs = required(&a.input, "in")?;
    let out = required(&a.out, "out")?;
    let d = SegmenterParams::default();
    let params = SegmenterParams {
        gaussian_sigma: a.gaussian_sigma.unwrap_or(d.gaussian_sigma),
        window_um: a.window_um.unwrap_or(d.window_um),
        threshold_offset: a.threshold_offset.unwrap_or(d.threshold_offset),
        min_component_area_um2: a.min_component_area_um2.unwrap_or(d.min_component_area_um2),
    };
    let slices = inputs
        .iter()
        .map(|p| io::load_image_with_spacing(p, Spacing::default()))
        .collect::<Result<Vec<_>, _>>()?;
    let img = match slices.len() {
        0 => return Err(CliError::Usage("missing --in".into())),
        1 => slices.into_iter().next().unwrap(),
        _ => vesselmorph::max_intensity_projection(&ImageStack::new(slices, a.z_spacing_um.unwrap_or(1.0))?)?,
    };
    let mask = vesselmorph::segment(&img, &params)?;
    io::save_mask(&mask, &out)?;
    Ok(())
}

#[derive(Debug, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct SkeletonizeArgs {
    #[arg(long = "in", value_name = "PNG")]
    #[serde(rename = "in")]
    pub input: Option<PathBuf>,
    /// Skeleton mask PNG.
    #[arg(long, value_name = "PNG")]
    pub out: Option<PathBuf>,
    /// Segment graph JSON (default: next to --out).
    #[arg(long, value_name = "JSON")]
    pub graph: Option<PathBuf>,
    #[arg(long)]
    pub prune_spurs_um: Option<f64>,
}

pub fn skeletonize(a: &SkeletonizeArgs) -> Res {
    let input = required(&a.input, "in")?;
    let out = required(&a.out, "out")?;
    let prune = a.prune_spurs_um.unwrap_or(0.0);
    if !(prune.is_finite() && prune >= 0.0) {
        return Err(Error::param("prune_spurs_um", "must be >= 0").into());
    }
    let mask = io::load_mask_with_spacing(&input, Spacing::default())?;
    let skel = vesselmorph::skeleton::skeletonize_pruned(&mask, prune);
    io::save_mask(skel.mask(), &out)?;
    let graph = a.graph.clone().unwrap_or_else(|| out.with_file_name(format!("{}.graph.json", stem(&out))));
    write_json(&graph, &vesselmorph::decompose(&skel).to_file())
}

#[derive(Debug, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct TortuosityArgs {
    #[arg(long = "in", value_name = "PNG")]
    #[serde(rename = "in")]
    pub input: Option<PathBuf>,
    /// Directory for `<stem>.tortuosity.csv` and `.json` (default: next to the input).
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    pub radius_um: Option<f64>,
    #[arg(long)]
    pub min_neighbors: Option<usize>,
    #[arg(long)]
    pub prune_spurs_um: Option<f64>,
    /// tls or ols.
    #[arg(long)]
    pub regression: Option<Regression>,
}

pub fn tortuosity(a: &TortuosityArgs) -> Res {
    let input = required(&a.input, "in")?;
    let params = tortuosity_params(a.radius_um, a.min_neighbors, a.prune_spurs_um, a.regression)?;
    let out_dir = a
        .out_dir
        .clone()
        .unwrap_or_else(|| input.parent().map(Path::to_path_buf).unwrap_or_default());
    create_dir(&out_dir)?;
    let mask = io::load_mask_with_spacing(&input, Spacing::default())?;
    let map = image_tortuosity_map(&mask, &params)?;
    let mut csv = String::from("x,y,tortuosity_um\n");
    for e in &map.entries {
        csv.push_str(&format!("{},{},{}\n", e.pixel.0, e.pixel.1, e.tortuosity_um));
    }
    let s = stem(&input);
    write_text(&out_dir.join(format!("{s}.tortuosity.csv")), &csv)?;
    let summary = json!({ "mean_um": map.mean, "n_points": map.entries.len(), "params": params });
    write_json(&out_dir.join(format!("{s}.tortuosity.json")), &summary)?;
    println!("{}", serde_json::to_string(&summary).map_err(Error::from)?);
    Ok(())
}

#[derive(Debug, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct AugmentArgs {
    #[arg(long, value_name = "PNG")]
    pub image: Option<PathBuf>,
    #[arg(long, value_name = "PNG")]
    pub mask: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Displacement scale, px [default: 64].
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Field smoothing, px [default: 4].
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of deformed copies [default: 1].
    #[arg(long)]
    pub count: Option<usize>,
}

pub fn augment(a: &AugmentArgs) -> Res {
    let image = required(&a.image, "image")?;
    let mask_path = required(&a.mask, "mask")?;
    let out_dir = required(&a.out_dir, "out-dir")?;
    let d = vesselmorph::ElasticParams::default();
    let seed = resolve_seed(a.seed)?;
    let params = vesselmorph::ElasticParams { alpha: a.alpha.unwrap_or(d.alpha), sigma: a.sigma.unwrap_or(d.sigma), seed };
    params.validate()?;
    let count = a.count.unwrap_or(1);
    let img = io::load_image_with_spacing(&image, Spacing::default())?;
    let mask = io::load_mask_with_spacing(&mask_path, Spacing::default())?;
    create_dir(&out_dir)?;
    let s = stem(&image);
    let outputs = (0..count)
        .into_par_iter()
        .map(|i| -> Result<_, CliError> {
            let copy_seed = derive_seed(seed, &[i as u64]);
            let (wi, wm) = vesselmorph::augment_pair(&img, &mask, &params, &Rng::new(copy_seed))?;
            let img_name = format!("{s}_aug{i:03}.png");
            let mask_name = format!("{s}_aug{i:03}_mask.png");
            io::save_image(&wi, out_dir.join(&img_name), BitDepth::Sixteen)?;
            io::save_mask(&wm, out_dir.join(&mask_name))?;
            Ok(json!({ "image": img_name, "mask": mask_name, "seed": copy_seed }))
        })
        .collect::<Result<Vec<_>, _>>()?;
    write_json(
        &out_dir.join("augment.json"),
        &json!({ "source_image": image, "source_mask": mask_path, "params": params, "outputs": outputs }),
    )
}

#[derive(Debug, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct SynthArgs {
    /// straight, arc, sinusoid or random-walk.
    #[arg(long, value_parser = enum_arg::<CurveKind>)]
    pub kind: Option<CurveKind>,
    #[arg(long)]
    pub length_px: Option<f64>,
    #[arg(long)]
    pub amplitude_px: Option<f64>,
    #[arg(long)]
    pub wavelength_px: Option<f64>,
    #[arg(long)]
    pub arc_radius_px: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub heading_rad: Option<f64>,
    #[arg(long)]
    pub turn_max_rad: Option<f64>,
    #[arg(long)]
    pub tube_radius_px: Option<f64>,
    #[arg(long)]
    pub intensity: Option<f64>,
    #[arg(long)]
    pub background: Option<f64>,
    #[arg(long)]
    pub noise_std: Option<f64>,
    #[arg(long)]
    pub spacing_um: Option<f64>,
    /// Canvas width, px [default: 256].
    #[arg(long)]
    pub width: Option<usize>,
    /// Canvas height, px [default: 192].
    #[arg(long)]
    pub height: Option<usize>,
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub prefix: Option<String>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

pub fn synth(a: &SynthArgs) -> Res {
    let out_dir = required(&a.out_dir, "out-dir")?;
    let d = VesselSpec::default();
    let spec = VesselSpec {
        kind: a.kind.unwrap_or(d.kind),
        length_px: a.length_px.unwrap_or(d.length_px),
        amplitude_px: a.amplitude_px.unwrap_or(d.amplitude_px),
        wavelength_px: a.wavelength_px.unwrap_or(d.wavelength_px),
        arc_radius_px: a.arc_radius_px.unwrap_or(d.arc_radius_px),
        heading_rad: a.heading_rad.unwrap_or(d.heading_rad),
        turn_max_rad: a.turn_max_rad.unwrap_or(d.turn_max_rad),
        tube_radius_px: a.tube_radius_px.unwrap_or(d.tube_radius_px),
        intensity: a.intensity.unwrap_or(d.intensity),
        background: a.background.unwrap_or(d.background),
        noise_std: a.noise_std.unwrap_or(d.noise_std),
        spacing_um: a.spacing_um.unwrap_or(d.spacing_um),
    };
    spec.validate()?;
    let (w, h) = (a.width.unwrap_or(256), a.height.unwrap_or(192));
    let seed = resolve_seed(a.seed)?;
    let prefix = a.prefix.clone().unwrap_or_else(|| "vessel".into());
    let entries = (0..a.count.unwrap_or(1))
        .into_par_iter()
        .map(|i| -> Result<_, CliError> {
            let id = format!("{prefix}{i:04}");
            let item_seed = derive_seed(seed, &[i as u64]);
            let ph = vesselmorph::synth::render(&spec, w, h, &Rng::new(item_seed))?;
            let (image, label) = ph.save(&out_dir, &id)?;
            let cl_dir = out_dir.join("centerlines");
            create_dir(&cl_dir)?;
            let centerline = cl_dir.join(format!("{id}.csv"));
            let mut csv = String::from("x,y\n");
            for p in &ph.centerline.points {
                csv.push_str(&format!("{},{}\n", p[0], p[1]));
            }
            write_text(&centerline, &csv)?;
            Ok(json!({ "id": id, "image": image, "label": label, "centerline": centerline, "seed": item_seed }))
        })
        .collect::<Result<Vec<_>, _>>()?;
    write_json(&out_dir.join("corpus.json"), &json!({ "spec": spec, "width": w, "height": h, "entries": entries }))
}

#[derive(Debug, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct MetricsArgs {
    /// Predicted masks.
    #[arg(long)]
    pub pred_dir: Option<PathBuf>,
    /// Reference masks, matched to predictions by file name.
    #[arg(long)]
    pub ref_dir: Option<PathBuf>,
    /// Where `metrics.csv` and `metrics.json` go.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

fn pngs(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let rd = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut v: Vec<PathBuf> = rd
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("png")))
        .collect();
    v.sort();
    Ok(v)
}

pub fn metrics(a: &MetricsArgs) -> Res {
    let pred_dir = required(&a.pred_dir, "pred-dir")?;
    let ref_dir = required(&a.ref_dir, "ref-dir")?;
    let out_dir = required(&a.out_dir, "out-dir")?;
    let mut pairs = vec![];
    for p in pngs(&pred_dir)? {
        let r = ref_dir.join(p.file_name().expect("listed files have names"));
        if !r.is_file() {
            return Err(Error::IdMismatch { index: pairs.len(), left: stem(&p), right: String::new() }.into());
        }
        pairs.push((stem(&p), p, r));
    }
    if pairs.is_empty() {
        return Err(Error::EmptySet.into());
    }
    let scores = pairs
        .par_iter()
        .map(|(_, p, r)| -> Result<(f64, f64), Error> {
            let (p, r) = (io::load_mask(p)?, io::load_mask(r)?);
            Ok((vesselmorph::iou(&p, &r)?, vesselmorph::dice(&p, &r)?))
        })
        .collect::<Result<Vec<_>, _>>()?;
    create_dir(&out_dir)?;
    let mut csv = String::from("id,iou,dice\n");
    for ((id, _, _), (i, d)) in pairs.iter().zip(&scores) {
        csv.push_str(&format!("{id},{i},{d}\n"));
    }
    write_text(&out_dir.join("metrics.csv"), &csv)?;
    let ious: Vec<f64> = scores.iter().map(|s| s.0).collect();
    let dices: Vec<f64> = scores.iter().map(|s| s.1).collect();
    let summary = json!({
        "n": scores.len(),
        "mean_iou": vesselmorph::stats::mean(&ious),
        "mean_dice": vesselmorph::stats::mean(&dices),
    });
    write_json(&out_dir.join("metrics.json"), &summary)?;
    println!("{}", serde_json::to_string(&summary).map_err(Error::from)?);
    Ok(())
}

#[derive(Debug, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct PrepareArgs {
    #[arg(long)]
    pub images_dir: Option<PathBuf>,
    /// Labels matched to images by file name.
    #[arg(long)]
    pub labels_dir: Option<PathBuf>,
    /// Images kept per class [default: 100].
    #[arg(long)]
    pub count: Option<usize>,
    /// Window grid, columns x rows [default: 4x4].
    #[arg(long)]
    pub grid: Option<String>,
    /// Train, validation and test fractions [default: 0.8,0.1,0.1].
    #[arg(long)]
    pub fractions: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    pub radius_um: Option<f64>,
    #[arg(long)]
    pub min_neighbors: Option<usize>,
    #[arg(long)]
    pub prune_spurs_um: Option<f64>,
    #[arg(long)]
    pub regression: Option<Regression>,
}

fn parse_grid(s: &str) -> Result<(usize, usize), CliError> {
    let bad = || CliError::Usage(format!("grid {s:?} is not of the form COLSxROWS"));
    let (a, b) = s.split_once('x').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

fn parse_fractions(s: &str) -> Result<(f64, f64, f64), CliError> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Usage(format!("fractions {s:?} are not numbers")))?;
    match v[..] {
        [a, b, c] => Ok((a, b, c)),
        _ => Err(CliError::Usage(format!("fractions {s:?} need three values"))),
    }
}

pub fn prepare(a: &PrepareArgs) -> Res {
    let images_dir = required(&a.images_dir, "images-dir")?;
    let labels_dir = required(&a.labels_dir, "labels-dir")?;
    let out_dir = required(&a.out_dir, "out-dir")?;
    let params = tortuosity_params(a.radius_um, a.min_neighbors, a.prune_spurs_um, a.regression)?;
    let grid = parse_grid(a.grid.as_deref().unwrap_or("4x4"))?;
    let fractions = parse_fractions(a.fractions.as_deref().unwrap_or("0.8,0.1,0.1"))?;
    let seed = resolve_seed(a.seed)?;
    let mut images = vec![];
    for image in pngs(&images_dir)? {
        let label = labels_dir.join(image.file_name().expect("listed files have names"));
        if label.is_file() {
            images.push(LabeledImage { id: stem(&image), image, label });
        }
    }
    let ranked = harness::rank_and_select(&images, a.count.unwrap_or(100), &params)?;
    let m = harness::windows_and_split(&ranked, grid, fractions, &Rng::new(seed), &out_dir)?;
    m.save(out_dir.join("manifest.json"))?;
    Ok(())
}

#[derive(Debug, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct SweepArgs {
    /// Manifest holding the source train split.
    #[arg(long)]
    pub source: Option<PathBuf>,
    /// Manifest holding the target train and test splits.
    #[arg(long)]
    pub target: Option<PathBuf>,
    /// Keep only this class of the source manifest.
    #[arg(long, value_parser = enum_arg::<Class>)]
    pub source_class: Option<Class>,
    /// Keep only this class of the target manifest.
    #[arg(long, value_parser = enum_arg::<Class>)]
    pub target_class: Option<Class>,
    /// Built-in backend name (classic, oracle, shrink, dilate,
    /// false-components) or the path of a backend executable.
    #[arg(long)]
    pub backend: Option<String>,
    /// Extra argument passed to an external backend before the job path.
    #[arg(long, allow_hyphen_values = true)]
    pub backend_arg: Option<Vec<String>>,
    #[arg(long)]
    pub timeout_s: Option<f64>,
    /// Sample counts, e.g. `0-40` or `0,10,40` [default: 0-40].
    #[arg(long)]
    pub n_values: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub train_epochs: Option<u32>,
    #[arg(long)]
    pub finetune_epochs: Option<u32>,
    #[arg(long)]
    pub radius_um: Option<f64>,
    #[arg(long)]
    pub min_neighbors: Option<usize>,
    #[arg(long)]
    pub prune_spurs_um: Option<f64>,
    #[arg(long)]
    pub regression: Option<Regression>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Backend job directories [default: <out-dir>/work].
    #[arg(long)]
    pub work_dir: Option<PathBuf>,
}

pub fn sweep(a: &SweepArgs) -> Res {
    let source_path = required(&a.source, "source")?;
    let target_path = required(&a.target, "target")?;
    let out_dir = required(&a.out_dir, "out-dir")?;
    let d = SweepConfig::default();
    let mut backend = BackendSpec::parse(a.backend.as_deref().unwrap_or("classic"));
    if let BackendSpec::Process { args, timeout_s, .. } = &mut backend {
        *args = a.backend_arg.clone().unwrap_or_default();
        if let Some(t) = a.timeout_s {
            *timeout_s = t;
        }
    }
    harness::Backend::new(backend.clone(), HashMap::new())?;
    let config = SweepConfig {
        n_values: match &a.n_values {
            Some(s) => parse_n_values(s)?,
            None => d.n_values,
        },
        seed: resolve_seed(a.seed)?,
        backend,
        tortuosity: tortuosity_params(a.radius_um, a.min_neighbors, a.prune_spurs_um, a.regression)?,
        train_epochs: a.train_epochs.unwrap_or(d.train_epochs),
        finetune_epochs: a.finetune_epochs.unwrap_or(d.finetune_epochs),
    };
    let select = |m: DatasetManifest, class: Option<Class>| match class {
        Some(c) => m.filter_class(c),
        None => m,
    };
    let source = select(DatasetManifest::load(&source_path)?, a.source_class);
    let target = select(DatasetManifest::load(&target_path)?, a.target_class);
    let work_dir = a.work_dir.clone().unwrap_or_else(|| out_dir.join("work"));
    let result = harness::run_sweep(&config, &source, &target, &work_dir)?;
    harness::emit_results(&result, &config, &out_dir)?;
    Ok(())
}

#[derive(Debug, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct PlotArgs {
    #[arg(long, value_name = "CSV")]
    pub aggregates: Option<PathBuf>,
    #[arg(long, value_name = "SVG")]
    pub out: Option<PathBuf>,
}

pub fn plot(a: &PlotArgs) -> Res {
    let aggregates = required(&a.aggregates, "aggregates")?;
    let out = required(&a.out, "out")?;
    write_text(&out, &plot_svg(&read_aggregates(&aggregates)?))
}

#[derive(Debug, Args)]
pub struct BackendArgs {
    #[arg(long, value_parser = enum_arg::<StubKind>, default_value = "classic")]
    pub kind: StubKind,
    /// Manifest whose image/label pairs serve as stub references; jobs may
    /// name the images by any path that resolves to the same file.
    #[arg(long)]
    pub references: Option<PathBuf>,
    /// The job file.
    pub job: PathBuf,
}

pub fn backend(a: &BackendArgs) -> Res {
    let references: HashMap<PathBuf, PathBuf> = match &a.references {
        Some(p) => DatasetManifest::load(p)?
            .entries
            .into_iter()
            .map(|e| (e.image.canonicalize().unwrap_or(e.image), e.label))
            .collect(),
        None => HashMap::new(),
    };
    serve_job(a.kind, &references, &a.job)?;
    let _ = std::io::stdout().flush();
    Ok(())
}
