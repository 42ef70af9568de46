use std::collections::HashMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use eatradar::dataset_io::{
    frame_labels_to_segments, intervals_to_frame_labels, make_folds, read_annotations, read_cube, read_fold_plan,
    read_predictions, write_annotations, write_fold_plan, write_predictions, CubeHeader, CubeKind, CubeReader,
    CubeWriter, FormatError, Payload,
};
use eatradar::eval::{evaluate_meal, meal_table, EvalReport};
use eatradar::radar_dsp::{
    dt_map, normalize_for_model, process_frames, render_csv, render_pgm, DspPlan, DtMap, Image, RdCube,
};
use eatradar::scene_sim::{meal_synthesizer, sample_meal_script, StatsProfile, SynthOptions};
use eatradar::tcn::{
    build_model, predict_meal, read_checkpoint, train_observed, write_checkpoint, write_history, Meal, TcnError,
};

use crate::manifest::RunManifest;
use crate::settings::Settings;
use crate::{EvaluateArgs, FoldsArgs, PredictArgs, ProcessArgs, RenderArgs, SimulateArgs, TrainArgs};

/// Frames moved per block when streaming cubes.
const BLOCK: usize = 64;

/// Exit 2 for bad input or configuration, 1 for everything else.
pub enum Failure {
    Invalid(anyhow::Error),
    Runtime(anyhow::Error),
}

impl Failure {
    pub fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Invalid(e) | Failure::Runtime(e) => e,
        }
    }

    pub fn code(&self) -> u8 {
        match self {
            Failure::Invalid(_) => 2,
            Failure::Runtime(_) => 1,
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Self {
        match e {
            FormatError::Io { .. } => Failure::Runtime(e.into()),
            _ => Failure::Invalid(e.into()),
        }
    }
}

impl From<TcnError> for Failure {
    fn from(e: TcnError) -> Self {
        match e {
            TcnError::InvalidConfig(_) | TcnError::InputShape { .. } | TcnError::LengthMismatch { .. } => {
                Failure::Invalid(e.into())
            }
            _ => Failure::Runtime(e.into()),
        }
    }
}

fn invalid(msg: impl std::fmt::Display) -> Failure {
    Failure::Invalid(anyhow!("{msg}"))
}

type CmdResult = Result<(), Failure>;

fn load_rd(path: &Path) -> Result<RdCube, Failure> {
    let (h, payload) = read_cube(path)?;
    if h.kind != CubeKind::RdReal {
        return Err(invalid(format!("{}: expected an RD cube, found {:?}", path.display(), h.kind)));
    }
    let data = payload.into_real().expect("kind fixes the scalar type");
    let d = &h.dims;
    RdCube::new(d[0] as usize, d[1] as usize, d[2] as usize, h.fps, data).map_err(|e| Failure::Invalid(e.into()))
}

fn labels_for(annotations: &Path, n_frames: usize, fps: f32) -> Result<eatradar::LabelSequence, Failure> {
    let track = read_annotations(annotations)?;
    Ok(intervals_to_frame_labels(&track, n_frames as u32, fps))
}

fn with_extension_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_stem().unwrap_or_default().to_os_string();
    name.push(suffix);
    path.with_file_name(name)
}

pub fn simulate(settings: &Settings, a: SimulateArgs) -> CmdResult {
    let mut settings = settings.clone();
    if let Some(s) = a.seed {
        settings.seed = s;
    }
    let profile = StatsProfile::by_name(&a.profile)
        .ok_or_else(|| invalid(format!("unknown profile {:?} (expected default or clean)", a.profile)))?;
    if !(a.duration_s > 0.0) {
        return Err(invalid("duration must be positive"));
    }
    let profile = profile.with_duration(a.duration_s);
    let script = sample_meal_script(&profile, settings.seed);
    let cfg = settings.radar(script.n_frames(settings.fps));
    cfg.validate().map_err(|e| Failure::Invalid(e.into()))?;
    let synth = meal_synthesizer(&script, &cfg, settings.seed, SynthOptions::default())
        .map_err(|e| Failure::Invalid(e.into()))?;
    std::fs::create_dir_all(&a.out_dir).with_context(|| format!("creating {}", a.out_dir.display()))?;

    let n = cfg.n_frames;
    let (cube_path, header) = if a.rd {
        let dims = vec![n as u32, cfg.crop_doppler as u32, cfg.crop_range as u32];
        (a.out_dir.join(format!("{}.rd.eatr", a.name)), CubeHeader::new(CubeKind::RdReal, dims, cfg.fps))
    } else {
        let dims = [n, cfg.n_virtual_antennas, cfg.n_chirps, cfg.n_samples].map(|v| v as u32).to_vec();
        (a.out_dir.join(format!("{}.raw.eatr", a.name)), CubeHeader::new(CubeKind::RawComplex, dims, cfg.fps))
    };
    let plan = DspPlan::new(&cfg).map_err(|e| Failure::Invalid(e.into()))?;
    let mut w = CubeWriter::create(&cube_path, header)?;
    let mut start = 0;
    while start < n {
        let end = (start + BLOCK).min(n);
        let raw = synth.synth_frames(start, end);
        if a.rd {
            w.write_real(&process_frames(&plan, &raw).map_err(|e| Failure::Runtime(e.into()))?)?;
        } else {
            w.write_complex(&raw)?;
        }
        start = end;
    }
    w.finish()?;

    let ann_path = a.out_dir.join(format!("{}.annotations.csv", a.name));
    write_annotations(&ann_path, &script.annotations())?;
    let script_path = a.out_dir.join(format!("{}.script.json", a.name));
    std::fs::write(&script_path, serde_json::to_string_pretty(&script).map_err(anyhow::Error::from)? + "\n")
        .with_context(|| format!("writing {}", script_path.display()))?;
    let outputs = [cube_path.clone(), ann_path, script_path];
    RunManifest::new("simulate", &settings, &[], &outputs)?.write_beside(&cube_path)?;
    println!("{}: {n} frames, {} gestures", cube_path.display(), script.gestures.len());
    Ok(())
}

pub fn process(settings: &Settings, a: ProcessArgs) -> CmdResult {
    let mut reader = CubeReader::open(&a.input)?;
    let h = reader.header().clone();
    if h.kind != CubeKind::RawComplex {
        return Err(invalid(format!("{}: expected a raw complex cube, found {:?}", a.input.display(), h.kind)));
    }
    let d = &h.dims;
    let mut cfg = settings.radar(d[0] as usize);
    cfg.n_virtual_antennas = d[1] as usize;
    cfg.n_chirps = d[2] as usize;
    cfg.n_samples = d[3] as usize;
    cfg.fps = h.fps;
    let plan = DspPlan::new(&cfg).map_err(|e| Failure::Invalid(e.into()))?;
    let n = cfg.n_frames;
    let rd_dims = vec![n as u32, cfg.crop_doppler as u32, cfg.crop_range as u32];
    let mut rd_out = CubeWriter::create(&a.out, CubeHeader::new(CubeKind::RdReal, rd_dims, h.fps))?;
    let mut dt_out = match &a.dt {
        Some(p) => {
            let dims = vec![n as u32, cfg.crop_doppler as u32];
            Some(CubeWriter::create(p, CubeHeader::new(CubeKind::DtReal, dims, h.fps))?)
        }
        None => None,
    };
    while reader.frames_remaining() > 0 {
        let k = reader.frames_remaining().min(BLOCK);
        let raw = reader.read_frames(k)?.into_complex().expect("kind fixes the scalar type");
        let rd = process_frames(&plan, &raw).map_err(|e| Failure::Runtime(e.into()))?;
        if let Some(w) = dt_out.as_mut() {
            let block = RdCube::new(k, cfg.crop_doppler, cfg.crop_range, h.fps, rd.clone())
                .map_err(|e| Failure::Runtime(e.into()))?;
            w.write_real(&dt_map(&block).data)?;
        }
        rd_out.write_real(&rd)?;
    }
    rd_out.finish()?;
    let mut outputs = vec![a.out.clone()];
    if let (Some(w), Some(p)) = (dt_out, &a.dt) {
        w.finish()?;
        outputs.push(p.clone());
    }
    RunManifest::new("process", settings, &[a.input.clone()], &outputs)?.write_beside(&a.out)?;
    Ok(())
}

pub fn folds(settings: &Settings, a: FoldsArgs) -> CmdResult {
    let mut ids = a.meals.clone();
    if let Some(dir) = &a.data_dir {
        let entries = std::fs::read_dir(dir).with_context(|| format!("listing {}", dir.display()))?;
        for e in entries {
            let name = e.map_err(anyhow::Error::from)?.file_name().to_string_lossy().into_owned();
            if let Some(id) = name.strip_suffix(".annotations.csv") {
                ids.push(id.to_string());
            }
        }
        ids.sort();
    }
    let seed = a.seed.unwrap_or(settings.seed);
    let plan = make_folds(&ids, a.n_folds, a.val_size, seed)?;
    write_fold_plan(&a.out, &plan)?;
    let mut s = settings.clone();
    s.seed = seed;
    RunManifest::new("folds", &s, &[], &[a.out.clone()])?.write_beside(&a.out)?;
    Ok(())
}

fn load_meal(dir: &Path, id: &str) -> Result<(Meal, [PathBuf; 2]), Failure> {
    let cube_path = dir.join(format!("{id}.rd.eatr"));
    let ann_path = dir.join(format!("{id}.annotations.csv"));
    let rd = load_rd(&cube_path)?;
    let labels = labels_for(&ann_path, rd.n_frames, rd.fps)?;
    let meal = Meal::new(id, normalize_for_model(&rd), labels)?;
    Ok((meal, [cube_path, ann_path]))
}

pub fn train(settings: &Settings, a: TrainArgs) -> CmdResult {
    let mut settings = settings.clone();
    if let Some(s) = a.seed {
        settings.seed = s;
    }
    let plan = read_fold_plan(&a.folds)?;
    let fold = plan
        .folds
        .get(a.fold)
        .ok_or_else(|| invalid(format!("fold {} requested, plan has {}", a.fold, plan.folds.len())))?;
    let mut inputs = vec![a.folds.clone()];
    let mut load = |ids: &[String]| -> Result<Vec<Meal>, Failure> {
        ids.iter()
            .map(|id| {
                let (m, files) = load_meal(&a.data_dir, id)?;
                inputs.extend(files);
                Ok(m)
            })
            .collect()
    };
    let train_set = load(&fold.train)?;
    let val_set = load(&fold.val)?;
    let model = build_model::<f32>(&settings.model(), settings.seed)?;
    eprintln!(
        "training on {} meals, validating on {}, {} parameters",
        train_set.len(),
        val_set.len(),
        model.param_count()
    );
    let trained = train_observed(model, &train_set, &val_set, &settings.train(), |r| {
        let opt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.4}"));
        eprintln!(
            "epoch {:>3}  train {:.4}  val {}  acc {}",
            r.epoch,
            r.train_loss,
            opt(r.val_loss),
            opt(r.val_frame_acc)
        );
    })?;
    for w in &trained.warnings {
        eprintln!("warning: {w}");
    }
    write_checkpoint(&a.out, &trained.model)?;
    let history = with_extension_suffix(&a.out, ".history.csv");
    write_history(&history, &trained.history)?;
    RunManifest::new("train", &settings, &inputs, &[a.out.clone(), history])?.write_beside(&a.out)?;
    eprintln!("kept epoch {}", trained.best_epoch);
    Ok(())
}

pub fn predict(settings: &Settings, a: PredictArgs) -> CmdResult {
    let model = read_checkpoint(&a.model)?;
    let rd = load_rd(&a.input)?;
    let labels = predict_meal(&model, &normalize_for_model(&rd), settings.max_chunk)?;
    write_predictions(&a.out, &labels)?;
    let segments = frame_labels_to_segments(&labels);
    RunManifest::new("predict", settings, &[a.model.clone(), a.input.clone()], &[a.out.clone()])?
        .write_beside(&a.out)?;
    println!("{}: {} frames, {} gesture segments", a.out.display(), labels.len(), segments.len());
    Ok(())
}

fn meal_id(path: &Path) -> String {
    let name = path.file_name().unwrap_or_default().to_string_lossy();
    name.split('.').next().unwrap_or_default().to_string()
}

pub fn evaluate(settings: &Settings, a: EvaluateArgs) -> CmdResult {
    if a.gt.len() != a.pred.len() {
        return Err(invalid(format!("{} ground-truth files but {} prediction files", a.gt.len(), a.pred.len())));
    }
    let mut rows: Vec<(String, EvalReport)> = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (g, p) in a.gt.iter().zip(&a.pred) {
        let pred = read_predictions(p, settings.fps)?;
        let gt = labels_for(g, pred.len(), settings.fps)?;
        let report = evaluate_meal(&gt, &pred, &settings.ks).map_err(|e| Failure::Invalid(e.into()))?;
        let mut id = meal_id(p);
        let n = seen.entry(id.clone()).or_insert(0);
        *n += 1;
        if *n > 1 {
            id = format!("{id}#{n}");
        }
        rows.push((id, report));
    }
    let pooled = EvalReport::pooled(rows.iter().map(|r| &r.1)).expect("at least one pair");
    std::fs::create_dir_all(&a.out_dir).with_context(|| format!("creating {}", a.out_dir.display()))?;
    let mut text = format!("pooled over {} meals\n{}", rows.len(), pooled.to_text());
    for (id, r) in &rows {
        text.push_str(&format!("\n== {id}\n{}", r.to_text()));
    }
    let files = [
        (a.out_dir.join("report.txt"), text),
        (a.out_dir.join("report.csv"), pooled.to_csv()),
        (a.out_dir.join("meals.csv"), meal_table(&rows)),
    ];
    for (path, body) in &files {
        std::fs::write(path, body).with_context(|| format!("writing {}", path.display()))?;
    }
    let inputs: Vec<PathBuf> = a.gt.iter().chain(&a.pred).cloned().collect();
    let outputs: Vec<PathBuf> = files.iter().map(|f| f.0.clone()).collect();
    RunManifest::new("evaluate", settings, &inputs, &outputs)?.write_beside(&outputs[0])?;
    print!("{}", pooled.to_text());
    Ok(())
}

pub fn render(settings: &Settings, a: RenderArgs) -> CmdResult {
    let (h, payload) = read_cube(&a.input)?;
    let data = match payload {
        Payload::Real(v) => v,
        Payload::Complex(_) => return Err(invalid("raw cubes cannot be rendered; process them first")),
    };
    let d = &h.dims;
    let img = match (h.kind, a.frame) {
        (CubeKind::RdReal, Some(t)) => {
            let rd = RdCube::new(d[0] as usize, d[1] as usize, d[2] as usize, h.fps, data)
                .map_err(|e| Failure::Invalid(e.into()))?;
            Image::rd_frame(&rd, t).map_err(|e| Failure::Invalid(e.into()))?
        }
        (CubeKind::RdReal, None) => {
            let rd = RdCube::new(d[0] as usize, d[1] as usize, d[2] as usize, h.fps, data)
                .map_err(|e| Failure::Invalid(e.into()))?;
            Image::dt_map(&dt_map(&rd))
        }
        (CubeKind::DtReal, None) => {
            Image::dt_map(&DtMap { n_frames: d[0] as usize, n_doppler: d[1] as usize, fps: h.fps, data })
        }
        (kind, _) => return Err(invalid(format!("--frame needs an RD cube, found {kind:?}"))),
    };
    let csv = a.out.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if csv {
        render_csv(&a.out, &img)
    } else {
        render_pgm(&a.out, &img)
    }
    .with_context(|| format!("writing {}", a.out.display()))?;
    RunManifest::new("render", settings, &[a.input.clone()], &[a.out.clone()])?.write_beside(&a.out)?;
    Ok(())
}
