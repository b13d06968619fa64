use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{FrameScore, RunConfig};
use crate::error::{Error, Result};
use crate::watermark::Domain;

/// One (clip, domain, attack) measurement. The `attack == "none"` row holds
/// the before-attack numbers, so its before and after columns agree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub clip: String,
    pub domain: Domain,
    pub attack: String,
    pub attack_params: String,
    pub frames_total: usize,
    pub frames_watermarked: usize,
    pub frames_skipped: usize,
    pub frames_dropped: usize,
    /// Mean luma PSNR of watermarked frames against the original.
    #[serde(with = "db")]
    pub psnr_before_db: Option<f64>,
    #[serde(with = "db")]
    pub psnr_after_db: Option<f64>,
    pub delta_before: Option<f64>,
    pub delta_after: Option<f64>,
    pub detected: bool,
    pub per_frame: Vec<FrameScore>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub config: RunConfig,
    pub detection_threshold: f64,
    pub rows: Vec<ReportRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

impl ReportFormat {
    pub fn from_path(path: &Path) -> Result<Self> {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => Ok(ReportFormat::Json),
            Some(e) if e.eq_ignore_ascii_case("csv") => Ok(ReportFormat::Csv),
            _ => Err(Error::Config(format!(
                "report path {} must end in .json or .csv",
                path.display()
            ))),
        }
    }
}

/// Infinite PSNR (identical frames) is written as the string `"inf"`.
mod db {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            None => s.serialize_none(),
            Some(x) if x.is_finite() => s.serialize_f64(*x),
            Some(x) => Repr::Text(super::fmt_db(*x)).serialize(s),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        Ok(match Option::<Repr>::deserialize(d)? {
            None => None,
            Some(Repr::Num(x)) => Some(x),
            Some(Repr::Text(t)) => Some(match t.as_str() {
                "inf" => f64::INFINITY,
                "-inf" => f64::NEG_INFINITY,
                _ => f64::NAN,
            }),
        })
    }
}

fn fmt_db(x: f64) -> String {
    if x.is_finite() {
        x.to_string()
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_db).unwrap_or_default()
}

impl EvaluationReport {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Integrity(format!("report serialization failed: {e}")))?;
        s.push('\n');
        Ok(s)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| Error::Integrity(format!("CSV serialization failed: {e}"));
        w.write_record([
            "clip",
            "domain",
            "attack",
            "attack_params",
            "frames_total",
            "frames_watermarked",
            "frames_skipped",
            "frames_dropped",
            "psnr_before_db",
            "psnr_after_db",
            "delta_before",
            "delta_after",
            "detected",
            "per_frame_delta",
        ])
        .map_err(err)?;
        for r in &self.rows {
            let per_frame = r
                .per_frame
                .iter()
                .map(|f| match f.delta {
                    Some(d) => format!("{}:{d}", f.index),
                    None => format!("{}:dropped", f.index),
                })
                .collect::<Vec<_>>()
                .join(";");
            w.write_record([
                r.clip.clone(),
                r.domain.to_string(),
                r.attack.clone(),
                r.attack_params.clone(),
                r.frames_total.to_string(),
                r.frames_watermarked.to_string(),
                r.frames_skipped.to_string(),
                r.frames_dropped.to_string(),
                fmt_opt(r.psnr_before_db),
                fmt_opt(r.psnr_after_db),
                fmt_opt(r.delta_before),
                fmt_opt(r.delta_after),
                r.detected.to_string(),
                per_frame,
            ])
            .map_err(err)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::Integrity(format!("CSV serialization failed: {e}")))?;
        Ok(String::from_utf8(bytes).expect("CSV of UTF-8 fields"))
    }

    pub fn render(&self, format: ReportFormat) -> Result<String> {
        match format {
            ReportFormat::Json => self.to_json(),
            ReportFormat::Csv => self.to_csv(),
        }
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = self.render(ReportFormat::from_path(path)?)?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn row(&self, clip: &str, domain: Domain, attack: &str) -> Option<&ReportRow> {
        self.rows
            .iter()
            .find(|r| r.clip == clip && r.domain == domain && r.attack == attack)
    }

    /// Similarity and PSNR tables: one line per clip, columns per domain
    /// (before attack, then each attack).
    pub fn render_tables(&self) -> String {
        let mut clips: Vec<&str> = Vec::new();
        let mut domains: Vec<Domain> = Vec::new();
        let mut attacks: Vec<&str> = Vec::new();
        for r in &self.rows {
            if !clips.contains(&r.clip.as_str()) {
                clips.push(&r.clip);
            }
            if !domains.contains(&r.domain) {
                domains.push(r.domain);
            }
            if r.attack != "none" && !attacks.contains(&r.attack.as_str()) {
                attacks.push(&r.attack);
            }
        }
        let clip_w = clips.iter().map(|c| c.len()).max().unwrap_or(4).max(4);

        let mut out = String::new();
        let tables: [(&str, fn(&ReportRow) -> Option<f64>, usize); 2] = [
            ("Similarity (mean delta)", |r| r.delta_after, 3),
            ("PSNR (dB) vs. original", |r| r.psnr_after_db, 2),
        ];
        for (title, value, prec) in tables {
            let _ = writeln!(out, "{title}");
            let mut header = format!("{:clip_w$}", "clip");
            for d in &domains {
                let _ = write!(header, " | {:>9}", format!("{d}"));
                for a in &attacks {
                    let _ = write!(header, " {a:>9}");
                }
            }
            let _ = writeln!(out, "{header}");
            let _ = writeln!(out, "{}", "-".repeat(header.len()));
            for clip in &clips {
                let mut line = format!("{clip:clip_w$}");
                for d in &domains {
                    line.push_str(" |");
                    for a in std::iter::once("none").chain(attacks.iter().copied()) {
                        let cell = self
                            .row(clip, *d, a)
                            .and_then(value)
                            .map(|v| {
                                if v.is_finite() {
                                    format!("{v:.prec$}")
                                } else {
                                    fmt_db(v)
                                }
                            })
                            .unwrap_or_else(|| "-".into());
                        let _ = write!(line, " {cell:>9}");
                    }
                }
                let _ = writeln!(out, "{line}");
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(attack: &str, psnr: f64) -> ReportRow {
        ReportRow {
            clip: "c".into(),
            domain: Domain::Frequency,
            attack: attack.into(),
            attack_params: String::new(),
            frames_total: 3,
            frames_watermarked: 2,
            frames_skipped: 0,
            frames_dropped: 0,
            psnr_before_db: Some(psnr),
            psnr_after_db: Some(psnr),
            delta_before: Some(1.0),
            delta_after: Some(0.5),
            detected: true,
            per_frame: vec![
                FrameScore {
                    index: 1,
                    delta: Some(0.5),
                },
                FrameScore {
                    index: 2,
                    delta: None,
                },
            ],
        }
    }

    fn report() -> EvaluationReport {
        EvaluationReport {
            config: RunConfig::default(),
            detection_threshold: 0.5,
            rows: vec![row("none", f64::INFINITY), row("lowpass", 30.25)],
        }
    }

    #[test]
    fn infinite_psnr_survives_json() {
        let r = report();
        let text = r.to_json().unwrap();
        assert!(text.contains("\"inf\""));
        let back: EvaluationReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn csv_has_one_line_per_row() {
        let csv = report().to_csv().unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[1].contains(",inf,"));
        assert!(lines[2].ends_with("1:0.5;2:dropped"));
    }

    #[test]
    fn format_from_extension() {
        assert_eq!(
            ReportFormat::from_path(Path::new("a/r.json")).unwrap(),
            ReportFormat::Json
        );
        assert_eq!(
            ReportFormat::from_path(Path::new("r.CSV")).unwrap(),
            ReportFormat::Csv
        );
        assert!(ReportFormat::from_path(Path::new("r.txt")).is_err());
    }

    #[test]
    fn tables_mention_every_attack() {
        let t = report().render_tables();
        assert!(t.contains("lowpass"));
        assert!(t.contains("30.25"));
        assert!(t.contains("0.500"));
    }
}
