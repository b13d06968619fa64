use serde::{Deserialize, Serialize};

use super::report::{EvaluationReport, ReportRow};
use super::{embed_video, extract_video, RunConfig, DEFAULT_DETECTION_THRESHOLD};
use crate::attacks::AttackSpec;
use crate::error::{Error, Result};
use crate::video_io::FrameSequence;
use crate::watermark::{psnr_planes, Domain, EmbedManifest};

#[derive(Debug, Clone)]
pub struct Clip {
    pub name: String,
    pub video: FrameSequence,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub base: RunConfig,
    pub domains: Vec<Domain>,
    pub attacks: Vec<AttackSpec>,
    pub detection_threshold: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            base: RunConfig::default(),
            domains: vec![Domain::Spatial, Domain::Frequency],
            attacks: AttackSpec::standard_set(),
            detection_threshold: DEFAULT_DETECTION_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRecord {
    pub clip: String,
    pub domain: Domain,
    pub manifest: EmbedManifest,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub report: EvaluationReport,
    pub manifests: Vec<ManifestRecord>,
}

/// Mean luma PSNR over the manifest's frames present in `attacked`.
fn mean_psnr(
    original: &FrameSequence,
    attacked: &FrameSequence,
    manifest: &EmbedManifest,
) -> Result<Option<f64>> {
    let mut values = Vec::new();
    for entry in &manifest.frames {
        let (Some(o), Some(a)) = (
            original.frame_by_index(entry.index),
            attacked.frame_by_index(entry.index),
        ) else {
            continue;
        };
        values.push(psnr_planes(&o.luma, &a.luma)?);
    }
    Ok((!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64))
}

/// Embeds, attacks and extracts every clip in every domain.
pub fn run_experiment(clips: &[Clip], cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    if cfg.attacks.is_empty() {
        return Err(Error::Config("at least one attack is required".into()));
    }
    if cfg.domains.is_empty() {
        return Err(Error::Config("at least one domain is required".into()));
    }
    for a in &cfg.attacks {
        a.validate()?;
    }

    let mut rows = Vec::new();
    let mut manifests = Vec::new();
    for clip in clips {
        for &domain in &cfg.domains {
            let stage = |what: &str| format!("{what} [{} / {domain}]", clip.name);
            let run = cfg.base.with_domain(domain);
            let embedded =
                embed_video(&clip.video, &run).map_err(|e| e.in_stage(stage("embed")))?;
            let manifest = embedded.manifest;
            let watermarked = manifest.frames.len();
            let skipped = manifest.skipped.len();

            let before = extract_video(&clip.video, &embedded.video, &manifest)
                .map_err(|e| e.in_stage(stage("extract")))?;
            let psnr_before = mean_psnr(&clip.video, &embedded.video, &manifest)
                .map_err(|e| e.in_stage(stage("psnr")))?;
            let row =
                |attack: &str, params: String, psnr_after, ex: &super::Extraction| ReportRow {
                    clip: clip.name.clone(),
                    domain,
                    attack: attack.to_string(),
                    attack_params: params,
                    frames_total: clip.video.len(),
                    frames_watermarked: watermarked,
                    frames_skipped: skipped,
                    frames_dropped: ex.dropped(),
                    psnr_before_db: psnr_before,
                    psnr_after_db: psnr_after,
                    delta_before: before.mean_delta,
                    delta_after: ex.mean_delta,
                    detected: ex.mean_delta.is_some_and(|d| d >= cfg.detection_threshold),
                    per_frame: ex.frames.clone(),
                };
            rows.push(row("none", String::new(), psnr_before, &before));

            for attack in &cfg.attacks {
                let name = attack.name();
                let attacked = attack
                    .apply(&embedded.video)
                    .map_err(|e| e.in_stage(stage(&format!("attack {name}"))))?;
                let after = extract_video(&clip.video, &attacked, &manifest)
                    .map_err(|e| e.in_stage(stage(&format!("extract after {name}"))))?;
                let psnr_after = mean_psnr(&clip.video, &attacked, &manifest)
                    .map_err(|e| e.in_stage(stage("psnr")))?;
                rows.push(row(name, attack.to_string(), psnr_after, &after));
            }
            manifests.push(ManifestRecord {
                clip: clip.name.clone(),
                domain,
                manifest,
            });
        }
    }
    Ok(ExperimentOutput {
        report: EvaluationReport {
            config: cfg.base.clone(),
            detection_threshold: cfg.detection_threshold,
            rows,
        },
        manifests,
    })
}
