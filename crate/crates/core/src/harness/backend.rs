//! Segmentation backend protocol.
//!
//! The harness writes `job.json` into a job directory and the backend answers
//! with `done.json` in the same directory. External backends run as a child
//! process given the job path as their last argument; built-in backends run
//! in-process but exchange the same files, so both routes share validation.

use std::collections::HashMap;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::{Command as Process, Stdio};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io;
use crate::raster::{BinaryMask, Spacing};
use crate::rng::{derive_seed, hash_str, Rng};
use crate::segment::{segment, SegmenterParams};

pub const JOB_FILE: &str = "job.json";
pub const DONE_FILE: &str = "done.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Train,
    Finetune,
    Predict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Job {
    pub command: Command,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub model_in: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub model_out: Option<PathBuf>,
    pub images: Vec<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub labels: Option<Vec<PathBuf>>,
    pub epochs: u32,
    pub seed: u64,
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Done {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub masks: Option<Vec<PathBuf>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub model: Option<PathBuf>,
}

/// Built-in backends. `classic` runs the classic segmenter; the others are
/// stubs that derive their output from the reference label of each image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StubKind {
    Classic,
    Oracle,
    Shrink,
    Dilate,
    FalseComponents,
}

impl StubKind {
    pub const ALL: [StubKind; 5] =
        [StubKind::Classic, StubKind::Oracle, StubKind::Shrink, StubKind::Dilate, StubKind::FalseComponents];

    pub fn name(self) -> &'static str {
        match self {
            StubKind::Classic => "classic",
            StubKind::Oracle => "oracle",
            StubKind::Shrink => "shrink",
            StubKind::Dilate => "dilate",
            StubKind::FalseComponents => "false-components",
        }
    }

    fn needs_references(self) -> bool {
        self != StubKind::Classic
    }
}

impl std::str::FromStr for StubKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::param("backend", format!("unknown built-in backend {s:?}")))
    }
}

fn default_timeout() -> f64 {
    3600.0
}

/// Serializable backend descriptor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum BackendSpec {
    Builtin {
        kind: StubKind,
    },
    Process {
        program: PathBuf,
        #[serde(default)]
        args: Vec<String>,
        #[serde(default = "default_timeout")]
        timeout_s: f64,
    },
}

impl BackendSpec {
    /// `oracle`, `shrink`, ... name a built-in backend; anything else is
    /// taken as the path of an executable.
    pub fn parse(s: &str) -> Self {
        match s.parse::<StubKind>() {
            Ok(kind) => BackendSpec::Builtin { kind },
            Err(_) => BackendSpec::Process { program: s.into(), args: vec![], timeout_s: default_timeout() },
        }
    }
}

/// Model artifact written by the built-in backends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StubModel {
    pub kind: StubKind,
    pub trained_on: usize,
    pub finetuned_on: usize,
    pub seed: u64,
}

/// A runnable backend.
#[derive(Debug, Clone)]
pub struct Backend {
    spec: BackendSpec,
    references: Arc<HashMap<PathBuf, PathBuf>>,
}

impl Backend {
    /// `references` maps each image path a stub may be asked to predict to
    /// its reference label path.
    pub fn new(spec: BackendSpec, references: HashMap<PathBuf, PathBuf>) -> Result<Self> {
        match &spec {
            BackendSpec::Process { program, timeout_s, .. } => {
                if !(timeout_s.is_finite() && *timeout_s > 0.0) {
                    return Err(Error::param("timeout_s", "must be > 0"));
                }
                if program.components().count() > 1 && !program.exists() {
                    return Err(Error::BackendUnreachable(format!("{} does not exist", program.display())));
                }
            }
            BackendSpec::Builtin { .. } => {}
        }
        Ok(Self { spec, references: Arc::new(references) })
    }

    pub fn spec(&self) -> &BackendSpec {
        &self.spec
    }

    /// Writes `job.json` into `job_dir`, runs the backend and returns the
    /// validated `done.json`.
    pub fn run(&self, job: &Job, job_dir: &Path) -> Result<Done> {
        validate_job(job)?;
        std::fs::create_dir_all(job_dir).map_err(|e| Error::io(job_dir, e))?;
        std::fs::create_dir_all(&job.out_dir).map_err(|e| Error::io(&job.out_dir, e))?;
        let job_path = job_dir.join(JOB_FILE);
        let done_path = job_dir.join(DONE_FILE);
        let _ = std::fs::remove_file(&done_path);
        write_json(&job_path, job)?;
        match &self.spec {
            BackendSpec::Builtin { kind } => serve_job(*kind, &self.references, &job_path)?,
            BackendSpec::Process { program, args, timeout_s } => {
                run_process(program, args, &job_path, Duration::from_secs_f64(*timeout_s))?
            }
        }
        let text = std::fs::read_to_string(&done_path)
            .map_err(|_| Error::Protocol(format!("backend did not write {}", done_path.display())))?;
        let done: Done = serde_json::from_str(&text).map_err(|e| Error::Protocol(format!("malformed done.json: {e}")))?;
        validate_done(job, &done)?;
        Ok(done)
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

fn validate_job(job: &Job) -> Result<()> {
    if job.images.is_empty() {
        return Err(Error::param("images", "job lists no images"));
    }
    match job.command {
        Command::Train | Command::Finetune => {
            if job.epochs == 0 {
                return Err(Error::param("epochs", "must be >= 1"));
            }
            if job.model_out.is_none() {
                return Err(Error::param("model_out", "required for training"));
            }
            match &job.labels {
                Some(l) if l.len() == job.images.len() => {}
                _ => return Err(Error::param("labels", "training needs one label per image")),
            }
            if job.command == Command::Finetune && job.model_in.is_none() {
                return Err(Error::param("model_in", "required for fine-tuning"));
            }
        }
        Command::Predict => {
            if job.model_in.is_none() {
                return Err(Error::param("model_in", "required for prediction"));
            }
        }
    }
    Ok(())
}

fn stem(p: &Path) -> String {
    p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Checks that a `done.json` answers its job: one readable mask per input
/// image (matched by file stem) at the input's dimensions, or a model file.
pub fn validate_done(job: &Job, done: &Done) -> Result<()> {
    match job.command {
        Command::Train | Command::Finetune => {
            let model = done.model.as_ref().ok_or_else(|| Error::Protocol("done.json has no model".into()))?;
            if !model.is_file() {
                return Err(Error::Protocol(format!("model artifact {} is missing", model.display())));
            }
        }
        Command::Predict => {
            let masks = done.masks.as_ref().ok_or_else(|| Error::Protocol("done.json has no masks".into()))?;
            let by_stem: HashMap<String, &PathBuf> = masks.iter().map(|m| (stem(m), m)).collect();
            for image in &job.images {
                let id = stem(image);
                let mask = by_stem.get(&id).ok_or_else(|| Error::Protocol(format!("no mask for image {id}")))?;
                let m = io::load_mask(mask).map_err(|e| Error::Protocol(format!("mask for {id}: {e}")))?;
                let dims = image_dims(image)?;
                if m.dims() != dims {
                    return Err(Error::Protocol(format!("mask for {id} is {:?}, image is {dims:?}", m.dims())));
                }
            }
            if masks.len() != job.images.len() {
                return Err(Error::Protocol(format!("{} masks for {} images", masks.len(), job.images.len())));
            }
        }
    }
    Ok(())
}

fn image_dims(path: &Path) -> Result<(usize, usize)> {
    let (w, h) = image::image_dimensions(path).map_err(|e| Error::Decode { path: path.into(), message: e.to_string() })?;
    Ok((w as usize, h as usize))
}

fn run_process(program: &Path, args: &[String], job_path: &Path, timeout: Duration) -> Result<()> {
    let mut child = Process::new(program)
        .args(args)
        .arg(job_path)
        .stdin(Stdio::null())
        .stdout(Stdio::null())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| Error::BackendUnreachable(format!("{}: {e}", program.display())))?;
    // drain stderr on a thread so a chatty backend cannot block on a full pipe
    let mut stderr = child.stderr.take().expect("stderr is piped");
    let reader = std::thread::spawn(move || {
        let mut s = String::new();
        let _ = stderr.read_to_string(&mut s);
        s
    });
    let start = Instant::now();
    let status = loop {
        if let Some(status) = child.try_wait().map_err(|e| Error::io(program, e))? {
            break status;
        }
        if start.elapsed() >= timeout {
            let _ = child.kill();
            let _ = child.wait();
            return Err(Error::BackendTimeout { seconds: timeout.as_secs_f64() });
        }
        std::thread::sleep(Duration::from_millis(5));
    };
    let stderr = reader.join().unwrap_or_default();
    if !status.success() {
        return Err(Error::BackendFailed { status: status.to_string(), stderr: stderr.trim().to_string() });
    }
    Ok(())
}

fn read_model(path: &Path) -> Result<StubModel> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Protocol(format!("model {}: {e}", path.display())))
}

/// Executes a job with a built-in backend and writes `done.json` next to
/// the job file.
pub fn serve_job(kind: StubKind, references: &HashMap<PathBuf, PathBuf>, job_path: &Path) -> Result<()> {
    let text = std::fs::read_to_string(job_path).map_err(|e| Error::io(job_path, e))?;
    let job: Job = serde_json::from_str(&text).map_err(|e| Error::Protocol(format!("malformed job.json: {e}")))?;
    validate_job(&job)?;
    let done = match job.command {
        Command::Train | Command::Finetune => {
            let model_out = job.model_out.clone().expect("validated");
            let model = match (&job.command, &job.model_in) {
                (Command::Finetune, Some(m)) => {
                    let base = read_model(m)?;
                    if base.kind != kind {
                        return Err(Error::Protocol(format!("model was trained by {:?}, not {kind:?}", base.kind)));
                    }
                    StubModel { finetuned_on: job.images.len(), seed: job.seed, ..base }
                }
                _ => StubModel { kind, trained_on: job.images.len(), finetuned_on: 0, seed: job.seed },
            };
            if let Some(parent) = model_out.parent() {
                std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
            }
            write_json(&model_out, &model)?;
            Done { masks: None, model: Some(model_out) }
        }
        Command::Predict => {
            let model = read_model(job.model_in.as_deref().expect("validated"))?;
            let mut masks = Vec::with_capacity(job.images.len());
            for image in &job.images {
                let mask = predict_one(kind, &model, references, image, job.seed)?;
                let out = job.out_dir.join(format!("{}.png", stem(image)));
                io::save_mask(&mask, &out)?;
                masks.push(out);
            }
            Done { masks: Some(masks), model: None }
        }
    };
    let done_path = job_path.with_file_name(DONE_FILE);
    write_json(&done_path, &done)
}

/// Spurious blobs added by the false-components stub: fewer as the model
/// sees more fine-tuning samples.
pub fn false_component_count(finetuned_on: usize) -> usize {
    4usize.saturating_sub(finetuned_on / 10)
}

fn predict_one(
    kind: StubKind,
    model: &StubModel,
    references: &HashMap<PathBuf, PathBuf>,
    image: &Path,
    seed: u64,
) -> Result<BinaryMask> {
    if kind == StubKind::Classic {
        let img = io::load_image_with_spacing(image, Spacing::default())?;
        return segment(&img, &SegmenterParams::default());
    }
    debug_assert!(kind.needs_references());
    let label = references
        .get(image)
        .or_else(|| references.get(&image.canonicalize().ok()?))
        .ok_or_else(|| Error::Protocol(format!("no reference label for {}", image.display())))?;
    let reference = io::load_mask_with_spacing(label, Spacing::default())?;
    Ok(match kind {
        StubKind::Classic | StubKind::Oracle => reference,
        StubKind::Shrink => reference.erode(),
        StubKind::Dilate => reference.dilate(),
        StubKind::FalseComponents => {
            let mut out = reference;
            let (w, h) = out.dims();
            let mut rng = Rng::new(derive_seed(seed, &[hash_str(&stem(image))]));
            for _ in 0..false_component_count(model.finetuned_on) {
                let cx = rng.inner().random_range(0..w);
                let cy = rng.inner().random_range(0..h);
                for y in cy.saturating_sub(1)..(cy + 2).min(h) {
                    for x in cx.saturating_sub(1)..(cx + 2).min(w) {
                        out.set(x, y, true);
                    }
                }
            }
            out
        }
    })
}
